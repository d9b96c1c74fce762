//! Exhaustive search over protocols built from projectors aligned with a
//! fixed local basis.
//!
//! Within the family every projector is a block of basis vectors, so the
//! residual of a state after any history is its coefficient matrix (in the
//! rotated basis) restricted to the rows and columns still alive. The search
//! state is the pair of alive-index bitmasks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Result};
use crate::measurement::LocalMeasurement;
use crate::numerics::{ComplexMatrix, Tolerance};
use crate::protocol::{ProtocolClass, ProtocolNode, ProtocolTree};
use crate::states::{Party, StateSet};

/// Largest local dimension the search accepts.
pub const MAX_DIM: usize = 6;
pub const MAX_ROUNDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    BasisAlignedProjective,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub family: Family,
    /// Columns are Alice's basis vectors; `None` is the standard basis.
    pub basis_a: Option<ComplexMatrix>,
    pub basis_b: Option<ComplexMatrix>,
    /// `P0`, `P1` or `P2`.
    pub comm_class: ProtocolClass,
    pub max_rounds: usize,
    pub r_min: usize,
    /// Cut branches early when a survivor's rank is already too low or two
    /// survivors already overlap. Turning it off changes only the running
    /// time.
    pub prune: bool,
}

impl SearchSpec {
    pub fn new(comm_class: ProtocolClass, r_min: usize, max_rounds: usize) -> Self {
        SearchSpec {
            family: Family::BasisAlignedProjective,
            basis_a: None,
            basis_b: None,
            comm_class,
            max_rounds,
            r_min,
            prune: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub found: bool,
    pub protocol: Option<ProtocolTree>,
    /// Every protocol of the family was ruled out. Says nothing about
    /// protocols outside it.
    pub family_exhausted: bool,
    pub nodes_explored: u64,
}

/// Set partitions of `0..n` as block-index vectors (restricted growth
/// strings), fewest blocks first.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur[i] = b;
            rec(i + 1, max.max(b), cur, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    rec(1, 0, &mut cur, &mut out);
    out.sort_by_key(|p| p.iter().max().map_or(0, |m| m + 1));
    out
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

type Key = (u32, u32, Option<Party>, usize);

struct Searcher<'a> {
    coeff: Vec<ComplexMatrix>,
    norms: Vec<f64>,
    dims: (usize, usize),
    spec: &'a SearchSpec,
    tol: Tolerance,
    partitions: Vec<Vec<Vec<usize>>>,
    memo: HashMap<Key, Option<ProtocolNode>>,
    explored: u64,
}

impl Searcher<'_> {
    fn restricted(&self, j: usize, a: u32, b: u32) -> ComplexMatrix {
        self.coeff[j].select(&bits(b), &bits(a))
    }

    /// Surviving states with their residuals.
    fn survivors(&self, a: u32, b: u32) -> Vec<(usize, ComplexMatrix)> {
        (0..self.coeff.len())
            .filter_map(|j| {
                let r = self.restricted(j, a, b);
                (r.frobenius_norm() > self.tol.abs * self.norms[j]).then_some((j, r))
            })
            .collect()
    }

    fn hopeless(&self, surv: &[(usize, ComplexMatrix)]) -> bool {
        if surv.iter().any(|(_, r)| r.rank(self.tol) < self.spec.r_min) {
            return true;
        }
        for (i, (j, x)) in surv.iter().enumerate() {
            for (k, y) in &surv[i + 1..] {
                if x.inner(y).norm() > self.tol.abs * self.norms[*j] * self.norms[*k] {
                    return true;
                }
            }
        }
        false
    }

    /// Leaf when at most one state survives with enough rank.
    fn settled(&self, surv: &[(usize, ComplexMatrix)]) -> Option<Option<ProtocolNode>> {
        match surv {
            [] => Some(Some(ProtocolNode::Unreachable)),
            [(j, r)] => Some((r.rank(self.tol) >= self.spec.r_min).then(|| ProtocolNode::leaf(*j))),
            _ => None,
        }
    }

    /// Indices of `party` on which some survivor has weight.
    fn relevant(&self, surv: &[(usize, ComplexMatrix)], a: u32, b: u32, party: Party) -> Vec<usize> {
        let (alive, other) = match party {
            Party::A => (bits(a), bits(b)),
            Party::B => (bits(b), bits(a)),
        };
        alive
            .into_iter()
            .filter(|&i| {
                surv.iter().any(|(j, _)| {
                    other.iter().any(|&o| {
                        let z = match party {
                            Party::A => self.coeff[*j][(o, i)],
                            Party::B => self.coeff[*j][(i, o)],
                        };
                        z.norm() > self.tol.abs * self.norms[*j]
                    })
                })
            })
            .collect()
    }

    /// Blocks of a partition of `rel` (as index lists), plus the remainder
    /// of the full space when nonempty.
    fn blocks(&self, rel: &[usize], part: &[usize], dim: usize) -> (Vec<Vec<usize>>, Option<Vec<usize>>) {
        let nb = part.iter().max().map_or(0, |m| m + 1);
        let mut bl = vec![Vec::new(); nb];
        for (i, &p) in part.iter().enumerate() {
            bl[p].push(rel[i]);
        }
        let rest: Vec<usize> = (0..dim).filter(|i| !rel.contains(i)).collect();
        (bl, (!rest.is_empty()).then_some(rest))
    }

    fn mask(ix: &[usize]) -> u32 {
        ix.iter().fold(0, |m, i| m | 1 << i)
    }

    /// Alternating search: `last` moved previously and may not move again.
    fn alternate(&mut self, a: u32, b: u32, last: Option<Party>, rounds: usize) -> Option<ProtocolNode> {
        let key = (a, b, last, rounds);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        self.explored += 1;
        let result = self.alternate_uncached(a, b, last, rounds);
        self.memo.insert(key, result.clone());
        result
    }

    fn alternate_uncached(&mut self, a: u32, b: u32, last: Option<Party>, rounds: usize) -> Option<ProtocolNode> {
        let surv = self.survivors(a, b);
        if let Some(done) = self.settled(&surv) {
            return done;
        }
        if rounds == 0 || (self.spec.prune && self.hopeless(&surv)) {
            return None;
        }
        for mover in [Party::A, Party::B] {
            if Some(mover) == last {
                continue;
            }
            let rel = self.relevant(&surv, a, b, mover);
            if rel.len() < 2 {
                continue;
            }
            let dim = match mover {
                Party::A => self.dims.0,
                Party::B => self.dims.1,
            };
            'part: for pi in 0..self.partitions[rel.len()].len() {
                let part = self.partitions[rel.len()][pi].clone();
                if part.iter().all(|&p| p == 0) {
                    continue;
                }
                let (bl, rest) = self.blocks(&rel, &part, dim);
                let mut children = Vec::new();
                for block in &bl {
                    let m = Self::mask(block);
                    let (ca, cb) = match mover {
                        Party::A => (m, b),
                        Party::B => (a, m),
                    };
                    match self.alternate(ca, cb, Some(mover), rounds - 1) {
                        Some(c) => children.push(c),
                        None => continue 'part,
                    }
                }
                let mut all = bl;
                if let Some(r) = rest {
                    all.push(r);
                    children.push(ProtocolNode::Unreachable);
                }
                return Some(self.node(mover, dim, &all, children));
            }
        }
        None
    }

    /// One partition per party, no conditioning.
    fn product_grid(&mut self) -> Option<ProtocolNode> {
        let (da, db) = self.dims;
        let (full_a, full_b) = ((1u32 << da) - 1, (1u32 << db) - 1);
        let surv = self.survivors(full_a, full_b);
        let rel_a = self.relevant(&surv, full_a, full_b, Party::A);
        let rel_b = self.relevant(&surv, full_a, full_b, Party::B);
        for pa in self.partitions[rel_a.len()].clone() {
            let (bla, resta) = self.blocks(&rel_a, &pa, da);
            'pb: for pb in self.partitions[rel_b.len()].clone() {
                self.explored += 1;
                let (blb, restb) = self.blocks(&rel_b, &pb, db);
                let mut grid = Vec::new();
                for x in &bla {
                    let mut row = Vec::new();
                    for y in &blb {
                        let surv = self.survivors(Self::mask(x), Self::mask(y));
                        match self.settled(&surv) {
                            Some(Some(n)) => row.push(n),
                            _ => continue 'pb,
                        }
                    }
                    if restb.is_some() {
                        row.push(ProtocolNode::Unreachable);
                    }
                    grid.push(row);
                }
                let mut all_b = blb;
                all_b.extend(restb);
                let mut children: Vec<ProtocolNode> =
                    grid.into_iter().map(|row| self.node(Party::B, db, &all_b, row)).collect();
                let mut all_a = bla;
                if let Some(r) = resta.clone() {
                    all_a.push(r);
                    children.push(ProtocolNode::Unreachable);
                }
                return Some(self.node(Party::A, da, &all_a, children));
            }
        }
        None
    }

    /// Measurement node in rotated coordinates; mapped back later.
    fn node(&self, party: Party, dim: usize, blocks: &[Vec<usize>], children: Vec<ProtocolNode>) -> ProtocolNode {
        let m = LocalMeasurement::basis_blocks(party, dim, blocks).expect("indices in range");
        ProtocolNode::measure(m, children).expect("one child per block")
    }
}

fn check_basis(u: &Option<ComplexMatrix>, dim: usize, who: &str, tol: Tolerance) -> Result<ComplexMatrix> {
    match u {
        None => Ok(ComplexMatrix::identity(dim)),
        Some(u) => {
            if u.shape() != (dim, dim) {
                return mismatch(format!("{who}'s basis must be {dim}x{dim}, got {:?}", u.shape()));
            }
            if !(&u.adjoint() * u).approx_eq(&ComplexMatrix::identity(dim), tol.abs.max(1e-9)) {
                return invalid(format!("{who}'s basis is not orthonormal"));
            }
            Ok(u.clone())
        }
    }
}

/// Rewrites standard-basis block projectors `P` as `U P U†`.
fn rotate(node: ProtocolNode, ua: &ComplexMatrix, ub: &ComplexMatrix) -> ProtocolNode {
    match node {
        ProtocolNode::Measure { measurement, children } => {
            let u = match measurement.party() {
                Party::A => ua,
                Party::B => ub,
            };
            let kraus = measurement.kraus().iter().map(|p| &(u * p) * &u.adjoint()).collect();
            let m = LocalMeasurement::new(measurement.party(), kraus).expect("same shapes");
            let children = children.into_iter().map(|c| rotate(c, ua, ub)).collect();
            ProtocolNode::measure(m, children).expect("same outcome count")
        }
        other => other,
    }
}

pub fn search_protocols(set: &StateSet, spec: &SearchSpec, tol: Tolerance) -> Result<SearchResult> {
    let (da, db) = set.dims();
    if da > MAX_DIM || db > MAX_DIM {
        return invalid(format!("exhaustive search handles local dimensions up to {MAX_DIM}, got {da}x{db}"));
    }
    if spec.r_min == 0 {
        return invalid("rank floor must be positive");
    }
    if spec.max_rounds == 0 || spec.max_rounds > MAX_ROUNDS {
        return invalid(format!("max_rounds must be between 1 and {MAX_ROUNDS}, got {}", spec.max_rounds));
    }
    if !spec.comm_class.is_projective() {
        return invalid(format!("the family holds projective protocols only, not {}", spec.comm_class));
    }
    let ua = check_basis(&spec.basis_a, da, "Alice", tol)?;
    let ub = check_basis(&spec.basis_b, db, "Bob", tol)?;
    // M' = U_B† M conj(U_A): coefficients in the rotated product basis.
    let coeff = set
        .states()
        .iter()
        .map(|s| &(&ub.adjoint() * s.coeff()) * &ua.conj())
        .collect();
    let mut s = Searcher {
        coeff,
        norms: set.states().iter().map(|s| s.norm()).collect(),
        dims: (da, db),
        spec,
        tol,
        partitions: (0..=da.max(db)).map(set_partitions).collect(),
        memo: HashMap::new(),
        explored: 0,
    };
    let (full_a, full_b) = ((1u32 << da) - 1, (1u32 << db) - 1);
    let node = match spec.comm_class {
        ProtocolClass::P0 => s.product_grid(),
        ProtocolClass::P1 => s.alternate(full_a, full_b, None, spec.max_rounds.min(2)),
        _ => s.alternate(full_a, full_b, None, spec.max_rounds),
    };
    let explored = s.explored;
    let Some(node) = node else {
        return Ok(SearchResult {
            found: false,
            protocol: None,
            family_exhausted: true,
            nodes_explored: explored,
        });
    };
    let tree = ProtocolTree::new(rotate(node, &ua, &ub));
    let ok = tree.verify_deterministic(set, spec.r_min, tol)?.ok;
    Ok(SearchResult {
        found: ok,
        protocol: ok.then_some(tree),
        family_exhausted: false,
        nodes_explored: explored,
    })
}
