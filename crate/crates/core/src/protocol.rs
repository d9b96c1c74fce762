//! Protocol trees: simulation, classification and verification.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{invalid, mismatch, Error, Result};
use crate::measurement::{LocalMeasurement, SeparablePovm};
use crate::numerics::{ComplexMatrix, Tolerance};
use crate::states::{Party, StateSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NodeRepr", into = "NodeRepr")]
pub enum ProtocolNode {
    Measure {
        measurement: LocalMeasurement,
        children: Vec<ProtocolNode>,
    },
    /// The parties announce state `declares`.
    Leaf { declares: usize },
    /// An outcome no state of the intended set can produce.
    Unreachable,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRepr {
    Measure {
        party: Party,
        measurement: LocalMeasurement,
        children: Vec<NodeRepr>,
    },
    Leaf {
        #[serde(deserialize_with = "required_option")]
        leaf: Option<usize>,
    },
}

// Keeps `{"leaf": null}` distinct from a missing key.
fn required_option<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<usize>, D::Error> {
    Option::<usize>::deserialize(d)
}

impl TryFrom<NodeRepr> for ProtocolNode {
    type Error = Error;

    fn try_from(r: NodeRepr) -> Result<Self> {
        match r {
            NodeRepr::Leaf { leaf: Some(j) } => Ok(ProtocolNode::Leaf { declares: j }),
            NodeRepr::Leaf { leaf: None } => Ok(ProtocolNode::Unreachable),
            NodeRepr::Measure {
                party,
                measurement,
                children,
            } => {
                if party != measurement.party() {
                    return invalid(format!(
                        "node party {party} does not match its measurement's party {}",
                        measurement.party()
                    ));
                }
                let children = children
                    .into_iter()
                    .map(ProtocolNode::try_from)
                    .collect::<Result<Vec<_>>>()?;
                ProtocolNode::measure(measurement, children)
            }
        }
    }
}

impl From<ProtocolNode> for NodeRepr {
    fn from(n: ProtocolNode) -> Self {
        match n {
            ProtocolNode::Leaf { declares } => NodeRepr::Leaf {
                leaf: Some(declares),
            },
            ProtocolNode::Unreachable => NodeRepr::Leaf { leaf: None },
            ProtocolNode::Measure {
                measurement,
                children,
            } => NodeRepr::Measure {
                party: measurement.party(),
                measurement,
                children: children.into_iter().map(NodeRepr::from).collect(),
            },
        }
    }
}

impl ProtocolNode {
    pub fn measure(measurement: LocalMeasurement, children: Vec<ProtocolNode>) -> Result<Self> {
        if children.len() != measurement.outcome_count() {
            return invalid(format!(
                "measurement with {} outcomes has {} children",
                measurement.outcome_count(),
                children.len()
            ));
        }
        Ok(ProtocolNode::Measure {
            measurement,
            children,
        })
    }

    pub fn leaf(j: usize) -> Self {
        ProtocolNode::Leaf { declares: j }
    }

    /// Measurement whose children are all placeholders, to be filled by
    /// [`ProtocolTree::fill_leaves`] or replaced by hand.
    pub fn open(measurement: LocalMeasurement) -> Self {
        let children = vec![ProtocolNode::Unreachable; measurement.outcome_count()];
        ProtocolNode::Measure {
            measurement,
            children,
        }
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, ProtocolNode::Measure { .. })
    }

    fn count(&self, f: &mut impl FnMut(&ProtocolNode)) {
        f(self);
        if let ProtocolNode::Measure { children, .. } = self {
            for c in children {
                c.count(f);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProtocolTree {
    pub root: ProtocolNode,
}

/// The six LOCC protocol types (projective or Kraus, by communication class).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolClass {
    P0,
    K0,
    P1,
    K1,
    P2,
    K2,
}

impl ProtocolClass {
    fn from_parts(projective: bool, comm: u8) -> Self {
        match (projective, comm) {
            (true, 0) => ProtocolClass::P0,
            (false, 0) => ProtocolClass::K0,
            (true, 1) => ProtocolClass::P1,
            (false, 1) => ProtocolClass::K1,
            (true, _) => ProtocolClass::P2,
            (false, _) => ProtocolClass::K2,
        }
    }

    pub fn is_projective(self) -> bool {
        matches!(self, ProtocolClass::P0 | ProtocolClass::P1 | ProtocolClass::P2)
    }

    /// 0: no conditioning, 1: one-way, 2: two-way.
    pub fn communication(self) -> u8 {
        match self {
            ProtocolClass::P0 | ProtocolClass::K0 => 0,
            ProtocolClass::P1 | ProtocolClass::K1 => 1,
            ProtocolClass::P2 | ProtocolClass::K2 => 2,
        }
    }
}

impl fmt::Display for ProtocolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for ProtocolClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "P0" => ProtocolClass::P0,
            "K0" => ProtocolClass::K0,
            "P1" => ProtocolClass::P1,
            "K1" => ProtocolClass::K1,
            "P2" => ProtocolClass::P2,
            "K2" => ProtocolClass::K2,
            _ => return invalid(format!("unknown protocol class `{s}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub path: Vec<(Party, usize)>,
    pub a_total: ComplexMatrix,
    pub b_total: ComplexMatrix,
    /// `None` for an unreachable leaf.
    pub declared: Option<usize>,
    pub residual_ranks: Vec<usize>,
    pub probability_given_state: Vec<f64>,
}

impl OutcomeRecord {
    /// Indices of states not annihilated on this path.
    pub fn survivors(&self, set: &StateSet, tol: Tolerance) -> Vec<usize> {
        set.states()
            .iter()
            .enumerate()
            .filter(|(j, _)| self.probability_given_state[*j].sqrt() > tol.abs)
            .map(|(j, _)| j)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    Ambiguous,
    WrongStateSurvives,
    RankTooLow,
    IncompleteNode,
    NonProjectiveWhereRequired,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub path: Vec<(Party, usize)>,
    pub reason: FailureReason,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub records: Vec<OutcomeRecord>,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    fn from_parts(records: Vec<OutcomeRecord>, failures: Vec<Failure>) -> Self {
        VerificationReport {
            ok: failures.is_empty(),
            records,
            failures,
        }
    }

    pub fn has(&self, reason: FailureReason) -> bool {
        self.failures.iter().any(|f| f.reason == reason)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Flag every non-projective node.
    pub require_projective: bool,
}

impl ProtocolTree {
    pub fn new(root: ProtocolNode) -> Self {
        ProtocolTree { root }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serializes")
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.root.count(&mut |_| n += 1);
        n
    }

    /// Number of measurement nodes along the longest path.
    pub fn depth(&self) -> usize {
        fn go(n: &ProtocolNode) -> usize {
            match n {
                ProtocolNode::Measure { children, .. } => 1 + children.iter().map(go).max().unwrap_or(0),
                _ => 0,
            }
        }
        go(&self.root)
    }

    fn check_dims(&self, set: &StateSet) -> Result<()> {
        let (da, db) = set.dims();
        let mut err = None;
        self.root.count(&mut |n| {
            if let ProtocolNode::Measure { measurement: m, .. } = n {
                let want = match m.party() {
                    Party::A => da,
                    Party::B => db,
                };
                if m.dim() != want && err.is_none() {
                    err = Some(format!(
                        "party {} measures in dimension {}, state set has {want}",
                        m.party(),
                        m.dim()
                    ));
                }
            }
            if let ProtocolNode::Leaf { declares } = n {
                if *declares >= set.len() && err.is_none() {
                    err = Some(format!(
                        "leaf declares state {declares}, set has {} states",
                        set.len()
                    ));
                }
            }
        });
        match err {
            Some(e) => mismatch(e),
            None => Ok(()),
        }
    }

    /// One record per root-to-leaf path, in depth-first outcome order.
    pub fn simulate(&self, set: &StateSet, tol: Tolerance) -> Result<Vec<OutcomeRecord>> {
        self.check_dims(set)?;
        let (da, db) = set.dims();
        let norms: Vec<f64> = set.states().iter().map(|s| s.norm_sqr()).collect();
        let mut out = Vec::new();
        let mut path = Vec::new();
        walk(
            &self.root,
            &ComplexMatrix::identity(da),
            &ComplexMatrix::identity(db),
            &mut path,
            &mut |path, node, a, b| {
                let mut ranks = Vec::with_capacity(set.len());
                let mut probs = Vec::with_capacity(set.len());
                for (s, &n0) in set.states().iter().zip(&norms) {
                    let r = s.residual(a, b).expect("dims checked");
                    ranks.push(r.schmidt_rank(tol));
                    probs.push(if n0 > 0.0 { r.norm_sqr() / n0 } else { 0.0 });
                }
                out.push(OutcomeRecord {
                    path: path.to_vec(),
                    a_total: a.clone(),
                    b_total: b.clone(),
                    declared: match node {
                        ProtocolNode::Leaf { declares } => Some(*declares),
                        _ => None,
                    },
                    residual_ranks: ranks,
                    probability_given_state: probs,
                });
            },
        );
        Ok(out)
    }

    /// Classifies by local-operation type and by how measurements condition on
    /// the other party's outcomes.
    pub fn classify(&self, tol: Tolerance) -> ProtocolClass {
        let mut projective = true;
        self.root.count(&mut |n| {
            if let ProtocolNode::Measure { measurement, .. } = n {
                projective &= measurement.check_projective(tol);
            }
        });
        let comm = if self.no_conditioning(tol) {
            0
        } else if self.one_way() {
            1
        } else {
            2
        };
        ProtocolClass::from_parts(projective, comm)
    }

    /// Reachable paths as sequences of (measurement, outcome).
    fn paths(&self) -> Vec<Vec<(&LocalMeasurement, usize)>> {
        fn go<'a>(
            n: &'a ProtocolNode,
            cur: &mut Vec<(&'a LocalMeasurement, usize)>,
            out: &mut Vec<Vec<(&'a LocalMeasurement, usize)>>,
        ) {
            match n {
                ProtocolNode::Measure {
                    measurement,
                    children,
                } => {
                    for (i, c) in children.iter().enumerate() {
                        cur.push((measurement, i));
                        go(c, cur, out);
                        cur.pop();
                    }
                }
                ProtocolNode::Leaf { .. } => out.push(cur.clone()),
                ProtocolNode::Unreachable => {}
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut Vec::new(), &mut out);
        out
    }

    // Each party's next move must be a function of its own past Kraus
    // operators alone. Histories compare by matrix, not by outcome index, so
    // relabeling outcomes does not change the verdict.
    fn no_conditioning(&self, tol: Tolerance) -> bool {
        let paths = self.paths();
        for party in [Party::A, Party::B] {
            let own: Vec<Vec<(&LocalMeasurement, usize)>> = paths
                .iter()
                .map(|p| p.iter().copied().filter(|(m, _)| m.party() == party).collect())
                .collect();
            for (i, p) in own.iter().enumerate() {
                for q in &own[i + 1..] {
                    let mut k = 0;
                    loop {
                        match (p.get(k), q.get(k)) {
                            (None, None) => break,
                            (Some((m1, o1)), Some((m2, o2))) => {
                                if !m1.same_operation(m2, tol) {
                                    return false;
                                }
                                let k1 = &m1.kraus()[*o1];
                                let k2 = &m2.kraus()[*o2];
                                if !k1.approx_eq(k2, tol.abs) {
                                    break;
                                }
                                k += 1;
                            }
                            _ => return false,
                        }
                    }
                }
            }
        }
        true
    }

    fn one_way(&self) -> bool {
        let first = match &self.root {
            ProtocolNode::Measure { measurement, .. } => measurement.party(),
            _ => return true,
        };
        self.paths().iter().all(|p| {
            let mut switched = false;
            p.iter().all(|(m, _)| {
                if m.party() != first {
                    switched = true;
                    true
                } else {
                    !switched
                }
            })
        })
    }

    /// Replaces every terminal node by the leaf its survivors dictate: the
    /// single survivor if there is one, the lowest-index survivor if several,
    /// and `Unreachable` if none.
    pub fn fill_leaves(&mut self, set: &StateSet, tol: Tolerance) -> Result<()> {
        self.check_dims(set)?;
        let (da, db) = set.dims();
        let norms: Vec<f64> = set.states().iter().map(|s| s.norm()).collect();
        fill(
            &mut self.root,
            &ComplexMatrix::identity(da),
            &ComplexMatrix::identity(db),
            &mut |a, b| {
                set.states()
                    .iter()
                    .zip(&norms)
                    .position(|(s, &n0)| s.residual(a, b).expect("dims checked").norm() > tol.abs * n0)
            },
        );
        Ok(())
    }

    pub fn verify_deterministic(&self, set: &StateSet, r_min: usize, tol: Tolerance) -> Result<VerificationReport> {
        if r_min == 0 {
            return invalid("rank floor must be positive");
        }
        self.verify_with(set, &vec![r_min; set.len()], VerifyOptions::default(), tol)
    }

    /// The floor for each declared state is its own original Schmidt rank.
    pub fn verify_rank_preserving(&self, set: &StateSet, tol: Tolerance) -> Result<VerificationReport> {
        let floors = set.schmidt_ranks(tol);
        self.verify_with(set, &floors, VerifyOptions::default(), tol)
    }

    /// General form: `floors[j]` is the minimum residual rank for outcomes
    /// that identify state `j`.
    pub fn verify_with(
        &self,
        set: &StateSet,
        floors: &[usize],
        opts: VerifyOptions,
        tol: Tolerance,
    ) -> Result<VerificationReport> {
        if floors.len() != set.len() {
            return mismatch(format!("{} rank floors for {} states", floors.len(), set.len()));
        }
        let records = self.simulate(set, tol)?;
        let mut failures = Vec::new();

        let mut path = Vec::new();
        node_checks(&self.root, &mut path, opts, tol, &mut failures);

        for rec in &records {
            let surv = rec.survivors(set, tol);
            if surv.is_empty() {
                continue;
            }
            outcome_checks(&rec.path, rec.declared, &surv, &rec.residual_ranks, floors, set, &mut failures);
        }
        Ok(VerificationReport::from_parts(records, failures))
    }
}

fn walk<'a>(
    node: &'a ProtocolNode,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    path: &mut Vec<(Party, usize)>,
    emit: &mut impl FnMut(&[(Party, usize)], &'a ProtocolNode, &ComplexMatrix, &ComplexMatrix),
) {
    match node {
        ProtocolNode::Measure {
            measurement,
            children,
        } => {
            let party = measurement.party();
            for (i, (k, child)) in measurement.kraus().iter().zip(children).enumerate() {
                path.push((party, i));
                match party {
                    Party::A => walk(child, &(k * a), b, path, emit),
                    Party::B => walk(child, a, &(k * b), path, emit),
                }
                path.pop();
            }
        }
        _ => emit(path, node, a, b),
    }
}

fn fill(
    node: &mut ProtocolNode,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    first_survivor: &mut impl FnMut(&ComplexMatrix, &ComplexMatrix) -> Option<usize>,
) {
    match node {
        ProtocolNode::Measure {
            measurement,
            children,
        } => {
            let party = measurement.party();
            for (k, child) in measurement.kraus().iter().zip(children.iter_mut()) {
                match party {
                    Party::A => fill(child, &(k * a), b, first_survivor),
                    Party::B => fill(child, a, &(k * b), first_survivor),
                }
            }
        }
        _ => {
            *node = match first_survivor(a, b) {
                Some(j) => ProtocolNode::Leaf { declares: j },
                None => ProtocolNode::Unreachable,
            }
        }
    }
}

fn node_checks(
    node: &ProtocolNode,
    path: &mut Vec<(Party, usize)>,
    opts: VerifyOptions,
    tol: Tolerance,
    failures: &mut Vec<Failure>,
) {
    if let ProtocolNode::Measure {
        measurement,
        children,
    } = node
    {
        if !measurement.check_complete(tol) {
            failures.push(Failure {
                path: path.clone(),
                reason: FailureReason::IncompleteNode,
                detail: format!("party {} Kraus operators do not resolve the identity", measurement.party()),
            });
        } else if opts.require_projective && !measurement.check_projective(tol) {
            failures.push(Failure {
                path: path.clone(),
                reason: FailureReason::NonProjectiveWhereRequired,
                detail: format!("party {} measurement is not projective", measurement.party()),
            });
        }
        for (i, c) in children.iter().enumerate() {
            path.push((measurement.party(), i));
            node_checks(c, path, opts, tol, failures);
            path.pop();
        }
    }
}

fn outcome_checks(
    path: &[(Party, usize)],
    declared: Option<usize>,
    surv: &[usize],
    ranks: &[usize],
    floors: &[usize],
    set: &StateSet,
    failures: &mut Vec<Failure>,
) {
    let label = |j: usize| set.states()[j].label.clone();
    let names = || surv.iter().map(|&j| label(j)).collect::<Vec<_>>().join(", ");
    let fail = |reason, detail| Failure {
        path: path.to_vec(),
        reason,
        detail,
    };
    let Some(j) = declared else {
        failures.push(fail(
            FailureReason::WrongStateSurvives,
            format!("unreachable leaf reached by {}", names()),
        ));
        return;
    };
    if surv.len() > 1 {
        failures.push(fail(FailureReason::Ambiguous, format!("states {} all survive", names())));
    } else if surv[0] != j {
        failures.push(fail(
            FailureReason::WrongStateSurvives,
            format!("declares {} but {} survives", label(j), names()),
        ));
    } else if ranks[j] < floors[j] {
        failures.push(fail(
            FailureReason::RankTooLow,
            format!("residual rank {} below floor {}", ranks[j], floors[j]),
        ));
    }
}

/// Verifies a separable POVM: every outcome must annihilate all states but
/// the declared one, which keeps rank at least `r_min`.
pub fn verify_sep(povm: &SeparablePovm, set: &StateSet, r_min: usize, tol: Tolerance) -> Result<VerificationReport> {
    if r_min == 0 {
        return invalid("rank floor must be positive");
    }
    if povm.dims != set.dims() {
        return mismatch(format!("POVM is {:?}, state set is {:?}", povm.dims, set.dims()));
    }
    let mut failures = Vec::new();
    if !povm.check_sep_complete(tol)? {
        failures.push(Failure {
            path: Vec::new(),
            reason: FailureReason::IncompleteNode,
            detail: "POVM elements do not sum to the identity".into(),
        });
    }
    let floors = vec![r_min; set.len()];
    let norms: Vec<f64> = set.states().iter().map(|s| s.norm_sqr()).collect();
    let mut records = Vec::new();
    for (i, o) in povm.outcomes.iter().enumerate() {
        if o.declares >= set.len() {
            return invalid(format!("outcome {i} declares state {}, set has {}", o.declares, set.len()));
        }
        let mut ranks = Vec::new();
        let mut probs = Vec::new();
        for (s, &n0) in set.states().iter().zip(&norms) {
            let r = s.residual(&o.a, &o.b)?;
            ranks.push(r.schmidt_rank(tol));
            probs.push(if n0 > 0.0 { r.norm_sqr() / n0 } else { 0.0 });
        }
        let rec = OutcomeRecord {
            path: vec![(Party::A, i), (Party::B, i)],
            a_total: o.a.clone(),
            b_total: o.b.clone(),
            declared: Some(o.declares),
            residual_ranks: ranks,
            probability_given_state: probs,
        };
        let surv = rec.survivors(set, tol);
        if !surv.is_empty() {
            outcome_checks(&rec.path, rec.declared, &surv, &rec.residual_ranks, &floors, set, &mut failures);
        }
        records.push(rec);
    }
    Ok(VerificationReport::from_parts(records, failures))
}

/// Groups records by the state they leave behind; handy for reports.
pub fn survivor_histogram(records: &[OutcomeRecord], set: &StateSet, tol: Tolerance) -> HashMap<Vec<usize>, usize> {
    let mut h = HashMap::new();
    for r in records {
        *h.entry(r.survivors(set, tol)).or_insert(0) += 1;
    }
    h
}
