//! Built-in example sets, their protocols and the verdicts they should get.
//!
//! Index arithmetic: `shift_mod(x, d)` below is addition modulo the
//! dimension named at each use. The Schmidt-sum constructions wrap Alice's
//! index mod `D_A` and Bob's mod `D_B`; the equal-dimension shift sets wrap
//! both mod `D`.

use serde::{Deserialize, Serialize};

use crate::analysis::{cascading_partition, partition_to_protocol, FirstParty};
use crate::error::{invalid, Error, Result};
use crate::measurement::{LocalMeasurement, SepOutcome, SeparablePovm};
use crate::numerics::{re, ComplexMatrix, Tolerance};
use crate::protocol::{verify_sep, ProtocolClass, ProtocolNode, ProtocolTree};
use crate::states::{BipartiteState, Party, StateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distinguishable {
    Yes,
    No,
    UnknownUnderSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CatalogProtocol {
    Locc { tree: ProtocolTree },
    Sep { povm: SeparablePovm },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub distinguishable: Distinguishable,
    pub r_floor: usize,
    pub rank_preserving: bool,
    /// `P0`..`K2` as the most the protocol may need (projectivity must match,
    /// communication may be less), `SEP`, or `none`.
    pub protocol_class: String,
    pub rank_sum: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub params: Vec<usize>,
    pub state_set: StateSet,
    pub protocols: Vec<CatalogProtocol>,
    pub expected: Expected,
}

impl CatalogEntry {
    /// The first LOCC protocol, if any.
    pub fn tree(&self) -> Option<&ProtocolTree> {
        self.protocols.iter().find_map(|p| match p {
            CatalogProtocol::Locc { tree } => Some(tree),
            _ => None,
        })
    }

    pub fn povm(&self) -> Option<&SeparablePovm> {
        self.protocols.iter().find_map(|p| match p {
            CatalogProtocol::Sep { povm } => Some(povm),
            _ => None,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CatalogInfo {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub defaults: &'static [usize],
    pub summary: &'static str,
}

const ENTRIES: &[CatalogInfo] = &[
    CatalogInfo {
        name: "exstates-4x4",
        params: &[],
        defaults: &[],
        summary: "two rank-4 states split by block projectors on both sides",
    },
    CatalogInfo {
        name: "yu-3x3",
        params: &[],
        defaults: &[],
        summary: "three rank-2 states distinguished by a separable POVM only",
    },
    CatalogInfo {
        name: "beat-schmidt-5x5",
        params: &[],
        defaults: &[],
        summary: "two-way protocol whose rank sum 12 beats the one-way bound 10",
    },
    CatalogInfo {
        name: "sum10-3x3",
        params: &[],
        defaults: &[],
        summary: "six states with rank sum 10 on a 3x3 system",
    },
    CatalogInfo {
        name: "ccsp-4x6",
        params: &[],
        defaults: &[],
        summary: "set with a complete cascading partition starting on Bob",
    },
    CatalogInfo {
        name: "not-ccsp-3x3",
        params: &[],
        defaults: &[],
        summary: "product states with no partition on either side",
    },
    CatalogInfo {
        name: "keep-rj-counterexample-5x5",
        params: &[],
        defaults: &[],
        summary: "orthogonal hat-rho but no rank-preserving local split",
    },
    CatalogInfo {
        name: "bennett9",
        params: &[],
        defaults: &[],
        summary: "the nine domino product states",
    },
    CatalogInfo {
        name: "schmidt-sum-A",
        params: &["D_A", "D_B", "r"],
        defaults: &[4, 6, 3],
        summary: "rank-D_A shift states reaching the one-way rank-sum bound (D_A <= D_B)",
    },
    CatalogInfo {
        name: "schmidt-sum-B",
        params: &["D_A", "D_B", "r"],
        defaults: &[7, 6, 3],
        summary: "rank-r blocks reaching the one-way rank-sum bound (D_B < D_A)",
    },
    CatalogInfo {
        name: "one-way-full-rank",
        params: &["D_A", "D_B"],
        defaults: &[3, 4],
        summary: "D_B rank-D_A shift states told apart one way",
    },
    CatalogInfo {
        name: "appc-threestates",
        params: &["D"],
        defaults: &[8],
        summary: "three rank-D states keeping rank D/2 on matched outcomes",
    },
    CatalogInfo {
        name: "appc-5dim-3states",
        params: &[],
        defaults: &[],
        summary: "three rank-5 states, some outcomes keep rank 2",
    },
    CatalogInfo {
        name: "appd-shift",
        params: &["D", "N"],
        defaults: &[6, 2],
        summary: "N shift states keeping rank floor(D/N) on every outcome",
    },
    CatalogInfo {
        name: "appd-5-2-mixed",
        params: &[],
        defaults: &[],
        summary: "two rank-5 states where only some outcomes keep rank 2",
    },
    CatalogInfo {
        name: "block-diagonal",
        params: &["D_A", "D_B", "r"],
        defaults: &[5, 5, 2],
        summary: "N_max rank-r blocks split by block projectors",
    },
];

pub fn entries() -> &'static [CatalogInfo] {
    ENTRIES
}

pub fn info(name: &str) -> Option<&'static CatalogInfo> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// Splits `name` or `name(p1,p2,...)`.
pub fn parse_spec(spec: &str) -> Result<(String, Vec<usize>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec.to_string(), Vec::new()));
    };
    let Some(inner) = spec[open + 1..].strip_suffix(')') else {
        return invalid(format!("unbalanced parameters in `{spec}`"));
    };
    let params = inner
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidInput(format!("bad parameter in `{spec}`: {e}")))?;
    Ok((spec[..open].to_string(), params))
}

pub fn is_catalog_name(spec: &str) -> bool {
    parse_spec(spec).map(|(n, _)| info(&n).is_some()).unwrap_or(false)
}

pub fn build_spec(spec: &str) -> Result<CatalogEntry> {
    let (name, params) = parse_spec(spec)?;
    build(&name, &params)
}

/// Empty `params` selects the entry's defaults. The entry's protocols are
/// checked against its expectations before it is returned.
pub fn build(name: &str, params: &[usize]) -> Result<CatalogEntry> {
    let Some(info) = info(name) else {
        return Err(Error::UnknownEntry(name.to_string()));
    };
    let params = if params.is_empty() { info.defaults } else { params };
    if params.len() != info.params.len() {
        return invalid(format!(
            "`{name}` takes {} parameters ({}), got {}",
            info.params.len(),
            info.params.join(", "),
            params.len()
        ));
    }
    let tol = Tolerance::default();
    let p = params;
    let entry = match name {
        "exstates-4x4" => exstates(tol),
        "yu-3x3" => yu(tol),
        "beat-schmidt-5x5" => beat_schmidt(tol),
        "sum10-3x3" => sum10(tol),
        "ccsp-4x6" => ccsp(tol),
        "not-ccsp-3x3" => not_ccsp(tol),
        "keep-rj-counterexample-5x5" => keep_rj(tol),
        "bennett9" => bennett9(tol),
        "schmidt-sum-A" => schmidt_sum_a(p[0], p[1], p[2], tol),
        "schmidt-sum-B" => schmidt_sum_b(p[0], p[1], p[2], tol),
        "one-way-full-rank" => one_way_full_rank(p[0], p[1], tol),
        "appc-threestates" => threestates(p[0], tol),
        "appc-5dim-3states" => five_dim(tol),
        "appd-shift" => appd_shift(p[0], p[1], tol),
        "appd-5-2-mixed" => mixed_5_2(tol),
        "block-diagonal" => block_diagonal(p[0], p[1], p[2], tol),
        _ => unreachable!("listed entry without a constructor"),
    }?;
    let mut entry = entry;
    entry.name = name.to_string();
    entry.params = params.to_vec();
    let report = verify_expected(&entry, tol)?;
    if !report.ok {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return invalid(format!("`{name}` fails its own checks: {}", failed.join(", ")));
    }
    Ok(entry)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedReport {
    pub name: String,
    pub ok: bool,
    pub checks: Vec<Check>,
}

/// Re-derives every verdict in `entry.expected` from scratch.
pub fn verify_expected(entry: &CatalogEntry, tol: Tolerance) -> Result<ExpectedReport> {
    let set = &entry.state_set;
    let exp = &entry.expected;
    let ranks = set.schmidt_ranks(tol);
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };

    if let Some(sum) = exp.rank_sum {
        let got: usize = ranks.iter().sum();
        push("rank-sum", got == sum, format!("sum of Schmidt ranks {got}, expected {sum}"));
    }
    match exp.distinguishable {
        Distinguishable::Yes => push(
            "has-protocol",
            !entry.protocols.is_empty(),
            format!("{} protocol(s)", entry.protocols.len()),
        ),
        _ => push(
            "no-protocol",
            entry.protocols.is_empty(),
            format!("{} protocol(s)", entry.protocols.len()),
        ),
    }

    for (i, p) in entry.protocols.iter().enumerate() {
        match p {
            CatalogProtocol::Locc { tree } => {
                let rep = tree.verify_deterministic(set, exp.r_floor, tol)?;
                push(
                    &format!("protocol-{i}-deterministic"),
                    rep.ok,
                    format!("{} records, {} failures at r_min={}", rep.records.len(), rep.failures.len(), exp.r_floor),
                );
                if exp.rank_preserving {
                    let rep = tree.verify_rank_preserving(set, tol)?;
                    push(
                        &format!("protocol-{i}-rank-preserving"),
                        rep.ok,
                        format!("{} failures", rep.failures.len()),
                    );
                }
                let class = tree.classify(tol);
                let passed = match exp.protocol_class.parse::<ProtocolClass>() {
                    Ok(want) => {
                        class.is_projective() == want.is_projective() && class.communication() <= want.communication()
                    }
                    Err(_) => false,
                };
                push(
                    &format!("protocol-{i}-class"),
                    passed,
                    format!("classified {class}, expected at most {}", exp.protocol_class),
                );
            }
            CatalogProtocol::Sep { povm } => {
                let complete = povm.check_sep_complete(tol)?;
                push(&format!("protocol-{i}-complete"), complete, "sum of elements is the identity".into());
                let rep = verify_sep(povm, set, exp.r_floor, tol)?;
                push(
                    &format!("protocol-{i}-deterministic"),
                    rep.ok,
                    format!("{} failures at r_min={}", rep.failures.len(), exp.r_floor),
                );
                if exp.rank_preserving {
                    let max = ranks.iter().copied().max().unwrap_or(0);
                    push(
                        &format!("protocol-{i}-rank-preserving"),
                        rep.ok && exp.r_floor >= max,
                        format!("floor {} against largest rank {max}", exp.r_floor),
                    );
                }
                push(
                    &format!("protocol-{i}-class"),
                    exp.protocol_class == "SEP",
                    format!("separable, expected {}", exp.protocol_class),
                );
            }
        }
    }
    let ok = checks.iter().all(|c| c.passed);
    Ok(ExpectedReport {
        name: entry.name.clone(),
        ok,
        checks,
    })
}

// ---- construction helpers ----

fn basis(da: usize, db: usize, label: &str, terms: &[(usize, usize, f64)]) -> Result<BipartiteState> {
    let t: Vec<_> = terms.iter().map(|&(a, b, z)| (a, b, re(z))).collect();
    BipartiteState::from_terms(da, db, label, &t)
}

fn ones(da: usize, db: usize, label: &str, pairs: &[(usize, usize)]) -> Result<BipartiteState> {
    let t: Vec<_> = pairs.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    basis(da, db, label, &t)
}

/// `Σ |x_i⟩_A |y_i⟩_B` for real vectors.
fn products(label: &str, terms: &[(Vec<f64>, Vec<f64>)]) -> Result<BipartiteState> {
    let (da, db) = (terms[0].0.len(), terms[0].1.len());
    let m = ComplexMatrix::from_fn(db, da, |n, m| {
        re(terms.iter().map(|(x, y)| y[n] * x[m]).sum())
    });
    BipartiteState::new(m, label)
}

fn e(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

fn add(x: &[f64], y: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + s * b).collect()
}

fn shift_mod(x: usize, d: usize) -> usize {
    x % d
}

fn numbered(states: Vec<Result<BipartiteState>>) -> Result<Vec<BipartiteState>> {
    states.into_iter().collect()
}

fn blocks(dim: usize, width: usize) -> Vec<Vec<usize>> {
    (0..dim).step_by(width).map(|s| (s..(s + width).min(dim)).collect()).collect()
}

fn measure(party: Party, dim: usize, blocks: &[Vec<usize>]) -> Result<LocalMeasurement> {
    LocalMeasurement::basis_blocks(party, dim, blocks)
}

fn filled(root: ProtocolNode, set: &StateSet, tol: Tolerance) -> Result<ProtocolTree> {
    let mut t = ProtocolTree::new(root);
    t.fill_leaves(set, tol)?;
    Ok(t)
}

/// Alice measures `ma`, then Bob measures `mb` whatever she got.
fn p0(set: &StateSet, ma: LocalMeasurement, mb: LocalMeasurement, tol: Tolerance) -> Result<ProtocolTree> {
    let children = vec![ProtocolNode::open(mb); ma.outcome_count()];
    filled(ProtocolNode::measure(ma, children)?, set, tol)
}

/// After operators `a ⊗ b`, the acting party splits the survivors by the
/// standard-basis supports of their residuals.
fn settle(set: &StateSet, a: &ComplexMatrix, b: &ComplexMatrix, party: Party, tol: Tolerance) -> Result<ProtocolNode> {
    let mut supports: Vec<(usize, Vec<usize>)> = Vec::new();
    for (j, s) in set.states().iter().enumerate() {
        let r = s.residual(a, b)?;
        if r.norm() <= tol.abs * s.norm() {
            continue;
        }
        let c = r.coeff();
        let support = match party {
            Party::A => (0..c.cols())
                .filter(|&m| (0..c.rows()).any(|n| c[(n, m)].norm() > tol.abs))
                .collect(),
            Party::B => (0..c.rows())
                .filter(|&n| (0..c.cols()).any(|m| c[(n, m)].norm() > tol.abs))
                .collect(),
        };
        supports.push((j, support));
    }
    match supports.len() {
        0 => return Ok(ProtocolNode::Unreachable),
        1 => return Ok(ProtocolNode::leaf(supports[0].0)),
        _ => {}
    }
    let dim = match party {
        Party::A => set.dim_a(),
        Party::B => set.dim_b(),
    };
    let mut used = vec![false; dim];
    let mut bl = Vec::new();
    let mut children = Vec::new();
    for (j, sup) in supports {
        for &i in &sup {
            if used[i] {
                return invalid(format!("residual supports overlap at basis index {i}"));
            }
            used[i] = true;
        }
        bl.push(sup);
        children.push(ProtocolNode::leaf(j));
    }
    let rest: Vec<usize> = (0..dim).filter(|&i| !used[i]).collect();
    if !rest.is_empty() {
        bl.push(rest);
        children.push(ProtocolNode::Unreachable);
    }
    ProtocolNode::measure(measure(party, dim, &bl)?, children)
}

/// Alice measures `ma`; Bob settles each of her outcomes.
fn one_way(set: &StateSet, ma: LocalMeasurement, tol: Tolerance) -> Result<ProtocolTree> {
    let id_b = ComplexMatrix::identity(set.dim_b());
    let children = ma
        .kraus()
        .iter()
        .map(|k| settle(set, k, &id_b, Party::B, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProtocolTree::new(ProtocolNode::measure(ma, children)?))
}

fn entry(
    set: StateSet,
    protocols: Vec<CatalogProtocol>,
    distinguishable: Distinguishable,
    r_floor: usize,
    rank_preserving: bool,
    protocol_class: &str,
    rank_sum: Option<usize>,
) -> CatalogEntry {
    CatalogEntry {
        name: String::new(),
        params: Vec::new(),
        state_set: set,
        protocols,
        expected: Expected {
            distinguishable,
            r_floor,
            rank_preserving,
            protocol_class: protocol_class.to_string(),
            rank_sum,
        },
    }
}

fn locc(tree: ProtocolTree) -> Vec<CatalogProtocol> {
    vec![CatalogProtocol::Locc { tree }]
}

// ---- entries ----

fn exstates(tol: Tolerance) -> Result<CatalogEntry> {
    let states = numbered(vec![
        ones(4, 4, "1", &[(0, 2), (1, 3), (2, 0), (3, 1)]),
        ones(4, 4, "2", &[(0, 0), (1, 1), (2, 2), (3, 3)]),
    ])?;
    let set = StateSet::new("exstates-4x4", states, tol)?;
    let halves = blocks(4, 2);
    let t = p0(&set, measure(Party::A, 4, &halves)?, measure(Party::B, 4, &halves)?, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, 2, false, "P0", Some(8)))
}

fn yu(tol: Tolerance) -> Result<CatalogEntry> {
    let states = numbered(vec![
        ones(3, 3, "1", &[(0, 0), (2, 2)]),
        ones(3, 3, "2", &[(0, 1), (1, 2)]),
        ones(3, 3, "3", &[(1, 0), (2, 1)]),
    ])?;
    let set = StateSet::new("yu-3x3", states, tol)?;
    let s3 = 3f64.sqrt();
    let (alpha, beta) = ((2.0 - s3) / 4.0, 2.0 + s3);
    // (declared state, Alice diagonal, Bob diagonal); E = α·diag(x) ⊗ diag(y)
    let elems: [(usize, [f64; 3], [f64; 3]); 6] = [
        (0, [1.0, 0.0, beta], [1.0, 0.0, beta]),
        (0, [beta, 0.0, 1.0], [beta, 0.0, 1.0]),
        (1, [1.0, beta, 0.0], [0.0, 1.0, beta]),
        (1, [beta, 1.0, 0.0], [0.0, beta, 1.0]),
        (2, [0.0, 1.0, beta], [1.0, beta, 0.0]),
        (2, [0.0, beta, 1.0], [beta, 1.0, 0.0]),
    ];
    let outcomes = elems
        .iter()
        .map(|(j, x, y)| SepOutcome {
            a: ComplexMatrix::diag_real(&x.map(|v| (alpha * v).sqrt())),
            b: ComplexMatrix::diag_real(&y.map(f64::sqrt)),
            declares: *j,
        })
        .collect();
    let povm = SeparablePovm::new((3, 3), outcomes)?;
    Ok(entry(
        set,
        vec![CatalogProtocol::Sep { povm }],
        Distinguishable::Yes,
        2,
        true,
        "SEP",
        Some(6),
    ))
}

fn beat_schmidt(tol: Tolerance) -> Result<CatalogEntry> {
    let states = numbered(vec![
        ones(5, 5, "1", &[(0, 0), (1, 1)]),
        ones(5, 5, "2", &[(0, 2), (1, 3), (2, 4)]),
        ones(5, 5, "3", &[(2, 0), (3, 1), (4, 2)]),
        ones(5, 5, "4", &[(0, 4), (2, 2), (3, 3), (4, 0)]),
    ])?;
    let set = StateSet::new("beat-schmidt-5x5", states, tol)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let alice = LocalMeasurement::new(
        Party::A,
        vec![
            ComplexMatrix::diag_real(&[1.0, 1.0, 1.0, h, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 0.0, 0.0, h, 1.0]),
        ],
    )?;
    let bob = LocalMeasurement::new(
        Party::B,
        vec![
            ComplexMatrix::diag_real(&[1.0, 1.0, 0.0, 0.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 0.0, 1.0, h, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 0.0, 0.0, h, 1.0]),
        ],
    )?;
    // Alice's last split after each of Bob's outcomes.
    let finish = |keep: Vec<usize>| -> Result<ProtocolNode> {
        let rest: Vec<usize> = (0..5).filter(|i| !keep.contains(i)).collect();
        Ok(ProtocolNode::open(measure(Party::A, 5, &[keep, rest])?))
    };
    let after_a1 = ProtocolNode::measure(bob, vec![finish(vec![0, 1])?, finish(vec![0, 1])?, finish(vec![1, 2])?])?;
    let after_a2 = ProtocolNode::open(measure(Party::B, 5, &[vec![1, 2], vec![0, 3, 4]])?);
    let t = filled(ProtocolNode::measure(alice, vec![after_a1, after_a2])?, &set, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, 2, false, "K2", Some(12)))
}

fn sum10(tol: Tolerance) -> Result<CatalogEntry> {
    let phi = [
        vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0],
        vec![2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0],
        vec![2.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0],
    ];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (a0, a1, a2) = (e(3, 0), e(3, 1), e(3, 2));
    let (b0, b1, b2) = (e(3, 0), e(3, 1), e(3, 2));
    let common = |sign: f64, other: &[f64]| {
        vec![
            (a0.iter().map(|x| h * x).collect::<Vec<_>>(), b0.clone()),
            (phi[0].iter().map(|x| h * x).collect(), b2.clone()),
            (add(&a0, other, 1.0).iter().map(|x| sign * x).collect(), b1.clone()),
        ]
    };
    let states = numbered(vec![
        products("1", &common(1.0, &a1)),
        products("2", &common(-1.0, &a2)),
        products("3", &[(a1.clone(), b0.clone())]),
        products("4", &[(a2.clone(), b0.clone())]),
        products("5", &[(phi[1].clone(), b2.clone())]),
        products("6", &[(phi[2].clone(), b2.clone())]),
    ])?;
    let set = StateSet::new("sum10-3x3", states, tol)?;

    let bob = LocalMeasurement::new(
        Party::B,
        vec![
            ComplexMatrix::diag_real(&[1.0, h, 0.0]),
            ComplexMatrix::diag_real(&[0.0, h, 1.0]),
        ],
    )?;
    let proj = |v: &[f64]| {
        let z: Vec<_> = v.iter().map(|&x| re(x)).collect();
        ComplexMatrix::outer(&z, &z)
    };
    // Bob's last step: a ± pair on {i, k} when Alice saw her first vector,
    // the standard basis otherwise.
    let pm = |i: usize, k: usize| -> Result<LocalMeasurement> {
        let plus: Vec<f64> = add(&e(3, i), &e(3, k), 1.0).iter().map(|x| h * x).collect();
        let minus: Vec<f64> = add(&e(3, i), &e(3, k), -1.0).iter().map(|x| h * x).collect();
        let rest = 3 - i - k;
        LocalMeasurement::new(Party::B, vec![proj(&plus), proj(&minus), ComplexMatrix::basis_projector(3, [rest])])
    };
    let standard = || measure(Party::B, 3, &[vec![0], vec![1], vec![2]]);
    let alice_std = LocalMeasurement::new(Party::A, vec![proj(&a0), proj(&a1), proj(&a2)])?;
    let alice_phi = LocalMeasurement::new(Party::A, phi.iter().map(|v| proj(v)).collect())?;
    let after_b1 = ProtocolNode::measure(
        alice_std,
        vec![ProtocolNode::open(pm(0, 1)?), ProtocolNode::open(standard()?), ProtocolNode::open(standard()?)],
    )?;
    let after_b2 = ProtocolNode::measure(
        alice_phi,
        vec![ProtocolNode::open(pm(1, 2)?), ProtocolNode::open(standard()?), ProtocolNode::open(standard()?)],
    )?;
    let t = filled(ProtocolNode::measure(bob, vec![after_b1, after_b2])?, &set, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, 1, false, "K2", Some(10)))
}

fn ccsp(tol: Tolerance) -> Result<CatalogEntry> {
    let states = numbered(vec![
        ones(4, 6, "1", &[(0, 0), (1, 1)]),
        ones(4, 6, "2", &[(0, 2), (1, 3)]),
        ones(4, 6, "3", &[(2, 0), (2, 2), (3, 1), (3, 3)]),
        basis(4, 6, "4", &[(2, 0, 1.0), (2, 2, -1.0), (3, 1, 1.0), (3, 3, -1.0)]),
        ones(4, 6, "5", &[(1, 4), (2, 5)]),
    ])?;
    let set = StateSet::new("ccsp-4x6", states, tol)?;
    let part = cascading_partition(&set, FirstParty::Auto, tol);
    let t = partition_to_protocol(&part, &set, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, 2, true, "P2", Some(10)))
}

fn not_ccsp(tol: Tolerance) -> Result<CatalogEntry> {
    let states = numbered(vec![
        ones(3, 3, "1", &[(0, 0), (1, 0)]),
        ones(3, 3, "2", &[(2, 0), (2, 1)]),
        ones(3, 3, "3", &[(0, 1), (0, 2)]),
        ones(3, 3, "4", &[(1, 2), (2, 2)]),
    ])?;
    let set = StateSet::new("not-ccsp-3x3", states, tol)?;
    let std = vec![vec![0], vec![1], vec![2]];
    let t = p0(&set, measure(Party::A, 3, &std)?, measure(Party::B, 3, &std)?, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, 1, true, "P0", Some(4)))
}

fn keep_rj(tol: Tolerance) -> Result<CatalogEntry> {
    let states = numbered(vec![
        ones(5, 5, "1", &[(0, 1), (1, 2)]),
        ones(5, 5, "2", &[(1, 3), (2, 4)]),
        ones(5, 5, "3", &[(2, 0), (3, 1)]),
        ones(5, 5, "4", &[(3, 2), (4, 3)]),
    ])?;
    let set = StateSet::new("keep-rj-counterexample-5x5", states, tol)?;
    Ok(entry(set, Vec::new(), Distinguishable::UnknownUnderSearch, 2, true, "none", Some(8)))
}

/// The nine domino product states on a 3x3 system.
pub fn domino_states() -> Vec<BipartiteState> {
    let v = |s: &[(usize, usize, f64)], l: &str| basis(3, 3, l, s).expect("valid domino state");
    vec![
        v(&[(1, 1, 1.0)], "1"),
        v(&[(0, 0, 1.0), (0, 1, 1.0)], "2"),
        v(&[(0, 0, 1.0), (0, 1, -1.0)], "3"),
        v(&[(2, 1, 1.0), (2, 2, 1.0)], "4"),
        v(&[(2, 1, 1.0), (2, 2, -1.0)], "5"),
        v(&[(1, 0, 1.0), (2, 0, 1.0)], "6"),
        v(&[(1, 0, 1.0), (2, 0, -1.0)], "7"),
        v(&[(0, 2, 1.0), (1, 2, 1.0)], "8"),
        v(&[(0, 2, 1.0), (1, 2, -1.0)], "9"),
    ]
}

fn bennett9(tol: Tolerance) -> Result<CatalogEntry> {
    let set = StateSet::new("bennett9", domino_states(), tol)?;
    Ok(entry(set, Vec::new(), Distinguishable::UnknownUnderSearch, 1, true, "none", Some(9)))
}

/// Alice's POVM shared by both Schmidt-sum constructions, as Kraus
/// operators (square roots of the diagonal elements).
fn schmidt_povm(da: usize, r: usize) -> Result<LocalMeasurement> {
    let (na, a) = (da / r, da % r);
    let mut kraus = Vec::new();
    for m in 1..na {
        kraus.push(ComplexMatrix::basis_projector(da, (m - 1) * r..m * r));
    }
    let mut last = vec![0.0; da];
    for k in 0..r {
        last[k + (na - 1) * r] = if a != 0 && k >= a { 0.5 } else { 1.0 };
    }
    kraus.push(ComplexMatrix::diag_real(&last.map_sqrt()));
    if a != 0 {
        let mut extra = vec![0.0; da];
        for k in 0..r {
            extra[k + da - r] = if k < r - a { 0.5 } else { 1.0 };
        }
        kraus.push(ComplexMatrix::diag_real(&extra.map_sqrt()));
    }
    LocalMeasurement::new(Party::A, kraus)
}

trait MapSqrt {
    fn map_sqrt(&self) -> Vec<f64>;
}

impl MapSqrt for Vec<f64> {
    fn map_sqrt(&self) -> Vec<f64> {
        self.iter().map(|x| x.sqrt()).collect()
    }
}

fn schmidt_class(povm: &LocalMeasurement) -> &'static str {
    if povm.check_projective(Tolerance::default()) {
        "P1"
    } else {
        "K1"
    }
}

fn schmidt_sum_a(da: usize, db: usize, r: usize, tol: Tolerance) -> Result<CatalogEntry> {
    if r == 0 || r > da || da > db {
        return invalid(format!("schmidt-sum-A needs 1 <= r <= D_A <= D_B, got ({da}, {db}, {r})"));
    }
    let nb = db / r;
    let states = (1..=nb)
        .map(|j| {
            let pairs: Vec<_> = (0..da).map(|k| (k, shift_mod(k + (j - 1) * r, db))).collect();
            ones(da, db, &j.to_string(), &pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = StateSet::new("schmidt-sum-A", states, tol)?;
    let povm = schmidt_povm(da, r)?;
    let class = schmidt_class(&povm);
    let t = one_way(&set, povm, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, r, da == r, class, Some(da * nb)))
}

fn schmidt_sum_b(da: usize, db: usize, r: usize, tol: Tolerance) -> Result<CatalogEntry> {
    if r == 0 || db >= da || r > db {
        return invalid(format!("schmidt-sum-B needs 1 <= r <= D_B < D_A, got ({da}, {db}, {r})"));
    }
    let (na, a, nb) = (da / r, da % r, db / r);
    if r + a > db {
        return invalid(format!("schmidt-sum-B needs r + (D_A mod r) <= D_B, got ({da}, {db}, {r})"));
    }
    let mut states = Vec::new();
    for n in 1..=na {
        let kn = if n == na { r + a - 1 } else { r - 1 };
        for j in 1..=nb {
            let pairs: Vec<_> = (0..=kn)
                .map(|k| (shift_mod(k + (n - 1) * r, da), shift_mod(k + (j - 1) * r, db)))
                .collect();
            states.push(ones(da, db, &((n - 1) * nb + j).to_string(), &pairs)?);
        }
    }
    let set = StateSet::new("schmidt-sum-B", states, tol)?;
    let povm = schmidt_povm(da, r)?;
    let class = schmidt_class(&povm);
    let t = one_way(&set, povm, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, r, a == 0, class, Some(da * nb)))
}

fn one_way_full_rank(da: usize, db: usize, tol: Tolerance) -> Result<CatalogEntry> {
    if da == 0 || da > db {
        return invalid(format!("one-way-full-rank needs 1 <= D_A <= D_B, got ({da}, {db})"));
    }
    let states = (1..=db)
        .map(|j| {
            let pairs: Vec<_> = (0..da).map(|m| (m, shift_mod(j - 1 + m, db))).collect();
            ones(da, db, &j.to_string(), &pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = StateSet::new("one-way-full-rank", states, tol)?;
    let std: Vec<Vec<usize>> = (0..da).map(|i| vec![i]).collect();
    let t = one_way(&set, measure(Party::A, da, &std)?, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, 1, da == 1, "P1", Some(da * db)))
}

/// `½ Σ_{k<D/4} (|2k+o⟩ ± |2k+1+o⟩)(h.c.)`, plus the other half of the space.
fn pair_pm(party: Party, d: usize, offset: usize) -> Result<LocalMeasurement> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = ComplexMatrix::zeros(d, d);
    let mut minus = ComplexMatrix::zeros(d, d);
    for k in 0..d / 4 {
        let (i, l) = (2 * k + offset, 2 * k + 1 + offset);
        let mut vp = vec![re(0.0); d];
        let mut vm = vec![re(0.0); d];
        vp[i] = re(h);
        vp[l] = re(h);
        vm[i] = re(h);
        vm[l] = re(-h);
        plus = plus.add(&ComplexMatrix::outer(&vp, &vp))?;
        minus = minus.add(&ComplexMatrix::outer(&vm, &vm))?;
    }
    let rest = ComplexMatrix::basis_projector(d, (0..d).filter(|i| *i < offset || *i >= offset + d / 2));
    LocalMeasurement::new(party, vec![plus, minus, rest])
}

fn threestates(d: usize, tol: Tolerance) -> Result<CatalogEntry> {
    if d < 8 || d % 4 != 0 {
        return invalid(format!("appc-threestates needs D >= 8 and a multiple of 4, got {d}"));
    }
    let half = d / 2;
    let states = numbered(vec![
        ones(d, d, "1", &(0..d).map(|k| (k, k)).collect::<Vec<_>>()),
        ones(d, d, "2", &(0..d).map(|k| (k, shift_mod(k + half, d))).collect::<Vec<_>>()),
        basis(
            d,
            d,
            "3",
            &(0..d)
                .map(|k| (k, shift_mod(k + half, d), if k % 2 == 0 { 1.0 } else { -1.0 }))
                .collect::<Vec<_>>(),
        ),
    ])?;
    let set = StateSet::new("appc-threestates", states, tol)?;
    let halves = blocks(d, half);
    // Mismatched halves: Bob's ± pairs sit in his occupied half, Alice's in hers.
    let mismatch = |alice_offset: usize, bob_offset: usize| -> Result<ProtocolNode> {
        let alice = ProtocolNode::open(pair_pm(Party::A, d, alice_offset)?);
        let bob = pair_pm(Party::B, d, bob_offset)?;
        ProtocolNode::measure(bob, vec![alice.clone(), alice, ProtocolNode::Unreachable])
    };
    let bob_round = |alice_half: usize| -> Result<ProtocolNode> {
        let children = (0..2)
            .map(|bob_half| {
                if bob_half == alice_half {
                    Ok(ProtocolNode::Unreachable)
                } else {
                    mismatch(alice_half * half, bob_half * half)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ProtocolNode::measure(measure(Party::B, d, &halves)?, children)
    };
    let root = ProtocolNode::measure(measure(Party::A, d, &halves)?, vec![bob_round(0)?, bob_round(1)?])?;
    let t = filled(root, &set, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, d / 4, false, "P2", Some(3 * d)))
}

fn five_dim(tol: Tolerance) -> Result<CatalogEntry> {
    let d = 5;
    let shifted = |s: usize| (0..d).map(|k| (k, shift_mod(k + s, d))).collect::<Vec<_>>();
    let states = numbered(vec![
        ones(d, d, "0", &shifted(0)),
        ones(d, d, "1", &shifted(2)),
        ones(d, d, "2", &shifted(3)),
    ])?;
    let set = StateSet::new("appc-5dim-3states", states, tol)?;
    let split = vec![vec![0, 1], vec![2, 3, 4]];
    let singles: Vec<Vec<usize>> = (0..d).map(|i| vec![i]).collect();
    let std_b = || Ok::<_, Error>(ProtocolNode::open(measure(Party::B, d, &singles)?));
    let bob_round = |children: Vec<ProtocolNode>| ProtocolNode::measure(measure(Party::B, d, &split)?, children);
    let low = bob_round(vec![
        ProtocolNode::Unreachable,
        ProtocolNode::measure(
            measure(Party::A, d, &[vec![0], vec![1], vec![2, 3, 4]])?,
            vec![std_b()?, std_b()?, ProtocolNode::Unreachable],
        )?,
    ])?;
    let high = bob_round(vec![
        ProtocolNode::measure(
            measure(Party::A, d, &[vec![2], vec![3], vec![4], vec![0, 1]])?,
            vec![std_b()?, std_b()?, std_b()?, ProtocolNode::Unreachable],
        )?,
        ProtocolNode::measure(
            measure(Party::A, d, &[vec![2], vec![3, 4], vec![0, 1]])?,
            vec![
                std_b()?,
                ProtocolNode::open(measure(Party::B, d, &[vec![2], vec![3, 4], vec![0, 1]])?),
                ProtocolNode::Unreachable,
            ],
        )?,
    ])?;
    let t = filled(ProtocolNode::measure(measure(Party::A, d, &split)?, vec![low, high])?, &set, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, 1, false, "P2", Some(15)))
}

fn appd_shift(d: usize, n: usize, tol: Tolerance) -> Result<CatalogEntry> {
    if n < 2 || d < n {
        return invalid(format!("appd-shift needs 2 <= N <= D, got ({d}, {n})"));
    }
    let q = d / n;
    if d % q != 0 {
        return invalid(format!("appd-shift needs D to be a multiple of floor(D/N) = {q}, got D = {d}"));
    }
    let states = (1..=n)
        .map(|j| {
            let pairs: Vec<_> = (0..d).map(|k| (k, shift_mod(k + q * (j - 1), d))).collect();
            ones(d, d, &j.to_string(), &pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = StateSet::new("appd-shift", states, tol)?;
    let bl = blocks(d, q);
    let t = p0(&set, measure(Party::A, d, &bl)?, measure(Party::B, d, &bl)?, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, q, q == d, "P0", Some(n * d)))
}

fn mixed_5_2(tol: Tolerance) -> Result<CatalogEntry> {
    let states = numbered(vec![
        ones(5, 5, "1", &(0..5).map(|k| (k, k)).collect::<Vec<_>>()),
        ones(5, 5, "2", &[(0, 2), (1, 3), (2, 0), (3, 4), (4, 1)]),
    ])?;
    let set = StateSet::new("appd-5-2-mixed", states, tol)?;
    let bl = vec![vec![0, 1], vec![2, 3], vec![4]];
    let t = p0(&set, measure(Party::A, 5, &bl)?, measure(Party::B, 5, &bl)?, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, 1, false, "P0", Some(10)))
}

fn block_diagonal(da: usize, db: usize, r: usize, tol: Tolerance) -> Result<CatalogEntry> {
    if r == 0 || r > da || r > db {
        return invalid(format!("block-diagonal needs 1 <= r <= min(D_A, D_B), got ({da}, {db}, {r})"));
    }
    let (na, nb) = (da / r, db / r);
    let mut states = Vec::new();
    for p in 0..na {
        for q in 0..nb {
            let pairs: Vec<_> = (0..r).map(|k| (p * r + k, q * r + k)).collect();
            states.push(ones(da, db, &(p * nb + q + 1).to_string(), &pairs)?);
        }
    }
    let set = StateSet::new("block-diagonal", states, tol)?;
    let t = p0(&set, measure(Party::A, da, &blocks(da, r))?, measure(Party::B, db, &blocks(db, r))?, tol)?;
    Ok(entry(set, locc(t), Distinguishable::Yes, r, true, "P0", Some(na * nb * r)))
}
