//! Closed-form bounds and structural conditions on state sets.

use serde::{Deserialize, Serialize};

use crate::catalog::domino_states;
use crate::error::{invalid, mismatch, Result};
use crate::measurement::LocalMeasurement;
use crate::numerics::{support_projector, ComplexMatrix, Tolerance};
use crate::protocol::{ProtocolNode, ProtocolTree};
use crate::states::{pairwise_orthogonal, BipartiteState, Party, StateSet};

/// `⌊D_A/r⌋·⌊D_B/r⌋`, the most states that can be told apart while every
/// outcome keeps Schmidt rank at least `r`.
pub fn nmax(da: usize, db: usize, r: usize) -> Result<usize> {
    if da == 0 || db == 0 || r == 0 {
        return invalid("nmax needs positive dimensions and rank");
    }
    Ok((da / r) * (db / r))
}

pub fn multi_nmax(dims: &[usize], r: usize) -> Result<usize> {
    if dims.len() < 2 {
        return invalid("multi_nmax needs at least two parties");
    }
    if r == 0 || dims.contains(&0) {
        return invalid("multi_nmax needs positive dimensions and rank");
    }
    Ok(dims.iter().map(|d| d / r).product())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub quantity: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub formula_id: String,
}

impl BoundReport {
    pub fn new(quantity: f64, bound: f64, formula_id: impl Into<String>) -> Self {
        BoundReport {
            quantity,
            bound,
            satisfied: quantity <= bound + 1e-12,
            formula_id: formula_id.into(),
        }
    }
}

// (first mover's dimension, second mover's dimension)
fn mover_dims(set: &StateSet, swap: bool) -> (usize, usize) {
    let (da, db) = set.dims();
    if swap {
        (db, da)
    } else {
        (da, db)
    }
}

/// One-way rank-sum bound `Σ R_j ≤ D_A ⌊D_B/r⌋` with Alice first
/// (Bob first when `swap`).
pub fn rank_sum_bound(set: &StateSet, r: usize, swap: bool, tol: Tolerance) -> Result<BoundReport> {
    if r == 0 {
        return invalid("rank floor must be positive");
    }
    let (d1, d2) = mover_dims(set, swap);
    let sum: usize = set.schmidt_ranks(tol).iter().sum();
    Ok(BoundReport::new(sum as f64, (d1 * (d2 / r)) as f64, "rank-sum"))
}

/// `Σ R_j² ≤ D_A D_B`.
pub fn r2_bound(set: &StateSet, tol: Tolerance) -> BoundReport {
    let q: usize = set.schmidt_ranks(tol).iter().map(|r| r * r).sum();
    BoundReport::new(q as f64, (set.dim_a() * set.dim_b()) as f64, "rank-square-sum")
}

/// `2 r_j + max_{k≠j} R_k ≤ D_A + D_B` for a product outcome `a ⊗ b` that
/// identifies state `j`.
pub fn theorem5_check(
    set: &StateSet,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    j: usize,
    tol: Tolerance,
) -> Result<BoundReport> {
    if j >= set.len() {
        return invalid(format!("state index {j} out of range"));
    }
    let ranks = set.schmidt_ranks(tol);
    let mut r_j = 0;
    for (k, s) in set.states().iter().enumerate() {
        let res = s.residual(a, b)?;
        if k == j {
            r_j = res.schmidt_rank(tol);
        } else if res.norm() > tol.abs * s.norm() {
            return invalid(format!(
                "outcome does not annihilate state `{}`, so it does not identify `{}`",
                s.label,
                set.states()[j].label
            ));
        }
    }
    let other = (0..set.len()).filter(|&k| k != j).map(|k| ranks[k]).max().unwrap_or(0);
    Ok(BoundReport::new(
        (2 * r_j + other) as f64,
        (set.dim_a() + set.dim_b()) as f64,
        "separable-outcome",
    ))
}

/// One-way tradeoff `r + R̄ ≤ D_A + D_B/N` with Alice first (Bob when
/// `swap`). When Alice's operator `a` is given, `r_target` may not exceed
/// its rank.
pub fn theorem6_check(
    set: &StateSet,
    a: Option<&ComplexMatrix>,
    r_target: usize,
    swap: bool,
    tol: Tolerance,
) -> Result<BoundReport> {
    let (d1, d2) = mover_dims(set, swap);
    if let Some(a) = a {
        if a.shape() != (d1, d1) {
            return mismatch(format!("first mover's operator must be {d1}x{d1}, got {:?}", a.shape()));
        }
        let ra = a.rank(tol);
        if r_target > ra {
            return invalid(format!(
                "an outcome of rank {ra} cannot preserve rank {r_target}"
            ));
        }
    }
    let n = set.len() as f64;
    let rbar = set.schmidt_ranks(tol).iter().sum::<usize>() as f64 / n;
    Ok(BoundReport::new(
        r_target as f64 + rbar,
        d1 as f64 + d2 as f64 / n,
        "one-way-tradeoff",
    ))
}

/// `N ≤ D_B / (r_max + R̄ − D_A)`; infinite when the denominator is not
/// positive and the bound says nothing.
pub fn corollary7_nbound(db: usize, da: usize, r_max: usize, rbar: f64) -> f64 {
    let denom = r_max as f64 + rbar - da as f64;
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        db as f64 / denom
    }
}

/// Mutual orthogonality of `ρ^A_j ⊗ ρ^B_j`: necessary for telling the set
/// apart by LOCC while every state keeps its Schmidt rank.
pub fn theorem4_check(set: &StateSet, tol: Tolerance) -> bool {
    let hats: Vec<ComplexMatrix> = set.states().iter().map(BipartiteState::hat_rho).collect();
    pairwise_orthogonal(&hats, tol).expect("one shape")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstParty {
    A,
    B,
    Auto,
}

impl std::str::FromStr for FirstParty {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(FirstParty::A),
            "B" | "b" => Ok(FirstParty::B),
            "auto" | "Auto" => Ok(FirstParty::Auto),
            _ => invalid(format!("first party must be A, B or auto, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionNode {
    pub members: Vec<usize>,
    /// Party whose reduced density operators split this subset; `None` at
    /// leaves.
    pub split_by: Option<Party>,
    pub children: Vec<PartitionNode>,
}

impl PartitionNode {
    fn levels(&self) -> usize {
        1 + self.children.iter().map(PartitionNode::levels).max().unwrap_or(0)
    }

    fn complete(&self) -> bool {
        if self.children.is_empty() {
            self.members.len() == 1
        } else {
            self.children.iter().all(PartitionNode::complete)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionTree {
    pub root: PartitionNode,
    pub complete: bool,
}

impl PartitionTree {
    /// Number of split levels along the deepest branch.
    pub fn depth(&self) -> usize {
        self.root.levels() - 1
    }
}

fn orthogonal_density(x: &ComplexMatrix, y: &ComplexMatrix, tol: Tolerance) -> bool {
    x.inner(y).norm() <= tol.abs * x.frobenius_norm() * y.frobenius_norm()
}

/// Connected components of the non-orthogonality graph, ordered by their
/// smallest member.
fn components(members: &[usize], rho: &[ComplexMatrix], tol: Tolerance) -> Vec<Vec<usize>> {
    let n = members.len();
    let mut comp: Vec<usize> = (0..n).collect();
    fn root(c: &mut [usize], mut i: usize) -> usize {
        while c[i] != i {
            c[i] = c[c[i]];
            i = c[i];
        }
        i
    }
    for i in 0..n {
        for k in i + 1..n {
            if !orthogonal_density(&rho[members[i]], &rho[members[k]], tol) {
                let (ri, rk) = (root(&mut comp, i), root(&mut comp, k));
                comp[ri.max(rk)] = ri.min(rk);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut comp, i);
        if index_of[r] == usize::MAX {
            index_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index_of[r]].push(members[i]);
    }
    groups
}

fn split(members: Vec<usize>, party: Party, rho: &[Vec<ComplexMatrix>; 2], tol: Tolerance) -> PartitionNode {
    if members.len() > 1 {
        let groups = components(&members, &rho[party as usize], tol);
        if groups.len() > 1 {
            return PartitionNode {
                members,
                split_by: Some(party),
                children: groups
                    .into_iter()
                    .map(|g| split(g, party.other(), rho, tol))
                    .collect(),
            };
        }
    }
    PartitionNode {
        members,
        split_by: None,
        children: Vec::new(),
    }
}

/// Alternating split of the set into subsets whose reduced density
/// operators on the acting party are orthogonal across subsets.
pub fn cascading_partition(set: &StateSet, first: FirstParty, tol: Tolerance) -> PartitionTree {
    let rho = [
        set.states().iter().map(|s| s.reduced_density(Party::A)).collect(),
        set.states().iter().map(|s| s.reduced_density(Party::B)).collect(),
    ];
    let run = |p: Party| {
        let root = split((0..set.len()).collect(), p, &rho, tol);
        PartitionTree {
            complete: root.complete(),
            root,
        }
    };
    match first {
        FirstParty::A => run(Party::A),
        FirstParty::B => run(Party::B),
        FirstParty::Auto => {
            let a = run(Party::A);
            if a.complete {
                return a;
            }
            let b = run(Party::B);
            if b.complete || b.depth() > a.depth() {
                b
            } else {
                a
            }
        }
    }
}

/// Projective protocol realizing a complete partition: each split measures
/// the projectors onto the combined supports of its children, plus a
/// remainder outcome that no state of the set can reach.
pub fn partition_to_protocol(p: &PartitionTree, set: &StateSet, tol: Tolerance) -> Result<ProtocolTree> {
    if !p.complete {
        return invalid("partition is not complete, so it does not define a protocol");
    }
    Ok(ProtocolTree::new(node_protocol(&p.root, set, tol)?))
}

fn node_protocol(node: &PartitionNode, set: &StateSet, tol: Tolerance) -> Result<ProtocolNode> {
    let Some(party) = node.split_by else {
        return Ok(ProtocolNode::leaf(node.members[0]));
    };
    let dim = match party {
        Party::A => set.dim_a(),
        Party::B => set.dim_b(),
    };
    let mut kraus = Vec::new();
    let mut children = Vec::new();
    let mut covered = ComplexMatrix::zeros(dim, dim);
    for c in &node.children {
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for &j in &c.members {
            let s = &set.states()[j];
            rho = rho.add(&s.reduced_density(party).scale((1.0 / s.norm_sqr()).into()))?;
        }
        let proj = support_projector(&rho, tol)?;
        covered = covered.add(&proj)?;
        kraus.push(proj);
        children.push(node_protocol(c, set, tol)?);
    }
    let rest = ComplexMatrix::identity(dim).sub(&covered)?;
    if rest.max_abs() > tol.abs {
        kraus.push(rest);
        children.push(ProtocolNode::Unreachable);
    }
    ProtocolNode::measure(LocalMeasurement::new(party, kraus)?, children)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurificationReport {
    pub survivors: Vec<usize>,
    pub pure: bool,
    pub residual_rank: usize,
}

/// Whether `Γ = gamma_a ⊗ gamma_b` maps the mixture of the set to a pure
/// state: every surviving residual must be the same up to scale and phase.
pub fn purification_check(
    set: &StateSet,
    gamma_a: &ComplexMatrix,
    gamma_b: &ComplexMatrix,
    tol: Tolerance,
) -> Result<PurificationReport> {
    let mut survivors = Vec::new();
    let mut residuals = Vec::new();
    for (j, s) in set.states().iter().enumerate() {
        let r = s.residual(gamma_a, gamma_b)?;
        if r.norm() > tol.abs * s.norm() {
            survivors.push(j);
            residuals.push(r);
        }
    }
    let pure = !residuals.is_empty()
        && residuals.iter().all(|r| {
            let (x, y) = (residuals[0].norm_sqr(), r.norm_sqr());
            x * y - residuals[0].inner(r).norm_sqr() <= tol.abs * x * y
        });
    let residual_rank = if pure { residuals[0].schmidt_rank(tol) } else { 0 };
    Ok(PurificationReport {
        survivors,
        pure,
        residual_rank,
    })
}

/// Whether applying `a` on one side keeps the nine domino states mutually
/// orthogonal. Always false for the zero operator.
pub fn domino_preserves_orthogonality(a: &ComplexMatrix, party: Party, tol: Tolerance) -> Result<bool> {
    if a.shape() != (3, 3) {
        return mismatch(format!("domino operator must be 3x3, got {:?}", a.shape()));
    }
    let scale = a.frobenius_norm().powi(2);
    if scale == 0.0 {
        return Ok(false);
    }
    let id = ComplexMatrix::identity(3);
    let (oa, ob) = match party {
        Party::A => (a, &id),
        Party::B => (&id, a),
    };
    let states = domino_states();
    let out: Vec<BipartiteState> = states
        .iter()
        .map(|s| s.residual(oa, ob))
        .collect::<Result<_>>()?;
    for i in 0..out.len() {
        for k in i + 1..out.len() {
            let bound = tol.abs * scale * states[i].norm() * states[k].norm();
            if out[i].inner(&out[k]).norm() > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{re, C64};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn one(a: usize, b: usize) -> (usize, usize, C64) {
        (a, b, re(1.0))
    }

    fn set(da: usize, db: usize, states: &[&[(usize, usize, C64)]]) -> StateSet {
        let v = states
            .iter()
            .enumerate()
            .map(|(i, t)| BipartiteState::from_terms(da, db, (i + 1).to_string(), t).unwrap())
            .collect();
        StateSet::new("t", v, tol()).unwrap()
    }

    #[test]
    fn nmax_examples() {
        assert_eq!(nmax(3, 3, 2).unwrap(), 1);
        assert_eq!(nmax(7, 7, 1).unwrap(), 49);
        assert_eq!(nmax(11, 12, 2).unwrap(), 30);
        assert_eq!(nmax(2, 5, 3).unwrap(), 0);
        assert!(nmax(2, 2, 0).is_err());
    }

    #[test]
    fn multi_nmax_examples() {
        assert_eq!(multi_nmax(&[3, 3, 3], 2).unwrap(), 1);
        assert_eq!(multi_nmax(&[4, 4], 2).unwrap(), 4);
        assert_eq!(multi_nmax(&[2, 2, 2], 1).unwrap(), 8);
        assert!(multi_nmax(&[4], 1).is_err());
    }

    #[test]
    fn corollary7_examples() {
        assert_eq!(corollary7_nbound(5, 5, 2, 5.0), 2.5);
        assert_eq!(corollary7_nbound(7, 4, 1, 4.0), 7.0);
        assert!(corollary7_nbound(5, 5, 1, 4.0).is_infinite());
    }

    #[test]
    fn bound_report_edge() {
        assert!(BoundReport::new(8.0, 8.0, "x").satisfied);
        assert!(!BoundReport::new(8.0 + 1e-9, 8.0, "x").satisfied);
    }

    #[test]
    fn identified_outcome_bound_zero_way() {
        let s = set(
            4,
            4,
            &[&[one(0, 2), one(1, 3), one(2, 0), one(3, 1)], &[one(0, 0), one(1, 1), one(2, 2), one(3, 3)]],
        );
        let pa2 = ComplexMatrix::basis_projector(4, [2, 3]);
        let pb1 = ComplexMatrix::basis_projector(4, [0, 1]);
        let rep = theorem5_check(&s, &pa2, &pb1, 0, tol()).unwrap();
        assert_eq!((rep.quantity, rep.bound, rep.satisfied), (8.0, 8.0, true));
        assert!(theorem5_check(&s, &pa2, &ComplexMatrix::identity(4), 0, tol()).is_err());
    }

    #[test]
    fn identified_outcome_bound_two_qubits() {
        let s = set(2, 2, &[&[one(0, 0), one(1, 1)], &[(0, 0, re(1.0)), (1, 1, re(-1.0))]]);
        let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        // |+⟩⟨+| on both sides keeps the first Bell state and kills the second.
        let rep = theorem5_check(&s, &plus, &plus, 0, tol()).unwrap();
        assert_eq!((rep.quantity, rep.bound, rep.satisfied), (4.0, 4.0, true));
        let p0 = ComplexMatrix::basis_projector(2, [0]);
        assert!(theorem5_check(&s, &p0, &plus, 0, tol()).is_err());
    }

    #[test]
    fn first_mover_bound_examples() {
        let s = set(2, 2, &[&[one(0, 0)]]);
        let rep = theorem6_check(&s, None, 1, false, tol()).unwrap();
        assert!(rep.satisfied);
        let small = ComplexMatrix::basis_projector(2, [0]);
        assert!(theorem6_check(&s, Some(&small), 2, false, tol()).is_err());
    }

    #[test]
    fn one_sided_partition_and_protocol() {
        let s = set(2, 2, &[&[one(0, 0), one(0, 1)], &[one(1, 0), one(1, 1)]]);
        let p = cascading_partition(&s, FirstParty::Auto, tol());
        assert!(p.complete);
        assert_eq!(p.root.split_by, Some(Party::A));
        assert_eq!(p.depth(), 1);
        let t = partition_to_protocol(&p, &s, tol()).unwrap();
        assert_eq!(t.depth(), 1);
        assert!(t.verify_rank_preserving(&s, tol()).unwrap().ok);
    }

    #[test]
    fn fixed_first_party_does_not_fall_back() {
        let s = set(2, 2, &[&[one(0, 0), one(0, 1)], &[one(1, 0), one(1, 1)]]);
        let p = cascading_partition(&s, FirstParty::B, tol());
        assert!(!p.complete);
        assert!(p.root.children.is_empty());
        assert!(partition_to_protocol(&p, &s, tol()).is_err());
    }

    #[test]
    fn remainder_outcome_is_unreachable() {
        let s = set(3, 1, &[&[one(0, 0)], &[one(1, 0)]]);
        let p = cascading_partition(&s, FirstParty::A, tol());
        let t = partition_to_protocol(&p, &s, tol()).unwrap();
        match &t.root {
            ProtocolNode::Measure { measurement, children } => {
                assert_eq!(measurement.outcome_count(), 3);
                assert!(measurement.check_projective(tol()));
                assert_eq!(children[2], ProtocolNode::Unreachable);
            }
            _ => panic!("expected a measurement"),
        }
        assert!(t.verify_rank_preserving(&s, tol()).unwrap().ok);
    }

    #[test]
    fn purification_examples() {
        let s = set(2, 2, &[&[one(0, 0), one(1, 1)], &[one(0, 1)]]);
        let id = ComplexMatrix::identity(2);
        let r = purification_check(&s, &id, &id, tol()).unwrap();
        assert_eq!(r.survivors, vec![0, 1]);
        assert!(!r.pure);
        assert_eq!(r.residual_rank, 0);

        // Projecting Bob onto |1⟩ leaves |11⟩ from the first and |01⟩ from
        // the second: not proportional.
        let p1 = ComplexMatrix::basis_projector(2, [1]);
        assert!(!purification_check(&s, &id, &p1, tol()).unwrap().pure);
        // Alice onto |0⟩ and Bob onto |1⟩ leaves only the second state.
        let p0 = ComplexMatrix::basis_projector(2, [0]);
        let r = purification_check(&s, &p0, &p1, tol()).unwrap();
        assert_eq!((r.survivors.clone(), r.pure, r.residual_rank), (vec![1], true, 1));

        let z = ComplexMatrix::zeros(2, 2);
        let r = purification_check(&s, &z, &id, tol()).unwrap();
        assert!(r.survivors.is_empty() && !r.pure);
    }

    #[test]
    fn purification_with_proportional_residuals() {
        // |00⟩+|11⟩ and |00⟩−|11⟩+|22⟩... use two states that agree on a block.
        let s = set(
            3,
            3,
            &[&[one(0, 0), one(1, 1), one(2, 2)], &[one(0, 0), one(1, 1), (2, 2, re(-2.0))]],
        );
        let p = ComplexMatrix::basis_projector(3, [0, 1]);
        let r = purification_check(&s, &p, &p, tol()).unwrap();
        assert_eq!(r.survivors, vec![0, 1]);
        assert!(r.pure);
        assert_eq!(r.residual_rank, 2);
    }

    #[test]
    fn domino_examples() {
        assert!(domino_preserves_orthogonality(&ComplexMatrix::identity(3), Party::A, tol()).unwrap());
        let d = ComplexMatrix::diag_real(&[1.0, 1.0, 0.0]);
        assert!(!domino_preserves_orthogonality(&d, Party::A, tol()).unwrap());
        assert!(!domino_preserves_orthogonality(&d, Party::B, tol()).unwrap());
        assert!(!domino_preserves_orthogonality(&ComplexMatrix::zeros(3, 3), Party::A, tol()).unwrap());
        assert!(domino_preserves_orthogonality(&ComplexMatrix::identity(2), Party::A, tol()).is_err());
    }
}
