//! Bipartite pure states as coefficient matrices.
//!
//! A state `Σ M[n][m] |m⟩_A |n⟩_B` is stored as the matrix `M` with rows
//! indexing Bob and columns indexing Alice. States are not normalized.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};
use crate::numerics::{ComplexMatrix, Tolerance, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::A => "A",
            Party::B => "B",
        })
    }
}

impl std::str::FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Party> {
        match s {
            "A" | "a" => Ok(Party::A),
            "B" | "b" => Ok(Party::B),
            _ => invalid(format!("unknown party `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    coeff: ComplexMatrix,
    pub label: String,
}

impl BipartiteState {
    /// `coeff` has `D_B` rows and `D_A` columns.
    pub fn new(coeff: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if coeff.is_empty() {
            return invalid("state dimensions must be positive");
        }
        Ok(BipartiteState {
            coeff,
            label: label.into(),
        })
    }

    /// Builds a state from `(a, b, amplitude)` terms; repeated index pairs add.
    pub fn from_terms(
        dim_a: usize,
        dim_b: usize,
        label: impl Into<String>,
        terms: &[(usize, usize, C64)],
    ) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return invalid("state dimensions must be positive");
        }
        let mut coeff = ComplexMatrix::zeros(dim_b, dim_a);
        for &(a, b, z) in terms {
            if a >= dim_a || b >= dim_b {
                return invalid(format!(
                    "term |{a}{b}⟩ outside a {dim_a}x{dim_b} system"
                ));
            }
            if !z.re.is_finite() || !z.im.is_finite() {
                return invalid("amplitudes must be finite");
            }
            coeff[(b, a)] += z;
        }
        Ok(BipartiteState {
            coeff,
            label: label.into(),
        })
    }

    pub fn coeff(&self) -> &ComplexMatrix {
        &self.coeff
    }

    pub fn dim_a(&self) -> usize {
        self.coeff.cols()
    }

    pub fn dim_b(&self) -> usize {
        self.coeff.rows()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a(), self.dim_b())
    }

    pub fn schmidt_rank(&self, tol: Tolerance) -> usize {
        self.coeff.rank(tol)
    }

    pub fn reduced_density(&self, party: Party) -> ComplexMatrix {
        match party {
            // ρ^A[m][m'] = Σ_n M[n][m] conj(M[n][m'])
            Party::A => &self.coeff.transpose() * &self.coeff.conj(),
            Party::B => &self.coeff * &self.coeff.adjoint(),
        }
    }

    /// `(a ⊗ b)|ψ⟩`, i.e. coefficient matrix `b · M · aᵀ`.
    pub fn residual(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<BipartiteState> {
        if a.cols() != self.dim_a() || b.cols() != self.dim_b() {
            return mismatch(format!(
                "operators {:?} ⊗ {:?} on a {}x{} state",
                a.shape(),
                b.shape(),
                self.dim_a(),
                self.dim_b()
            ));
        }
        let coeff = &(b * &self.coeff) * &a.transpose();
        Ok(BipartiteState {
            coeff,
            label: self.label.clone(),
        })
    }

    /// `ρ^A ⊗ ρ^B`.
    pub fn hat_rho(&self) -> ComplexMatrix {
        self.reduced_density(Party::A)
            .kron(&self.reduced_density(Party::B))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeff.data().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &BipartiteState) -> C64 {
        self.coeff.inner(&other.coeff)
    }

    /// Full state vector, index `m·D_B + n` for `|m⟩_A|n⟩_B`.
    pub fn to_vector(&self) -> Vec<C64> {
        let (da, db) = self.dims();
        let mut v = Vec::with_capacity(da * db);
        for m in 0..da {
            for n in 0..db {
                v.push(self.coeff[(n, m)]);
            }
        }
        v
    }
}

fn nearly_orthogonal(ip: C64, n1: f64, n2: f64, tol: Tolerance) -> bool {
    ip.norm() <= tol.abs * n1 * n2
}

/// True iff `Tr(X†Y)` vanishes for every pair, relative to the Frobenius
/// norms of the pair.
pub fn pairwise_orthogonal(ms: &[ComplexMatrix], tol: Tolerance) -> Result<bool> {
    if let Some(first) = ms.first() {
        if ms.iter().any(|m| m.shape() != first.shape()) {
            return mismatch("pairwise_orthogonal needs matrices of one shape");
        }
    }
    let norms: Vec<f64> = ms.iter().map(|m| m.frobenius_norm()).collect();
    for i in 0..ms.len() {
        for k in i + 1..ms.len() {
            if !nearly_orthogonal(ms[i].inner(&ms[k]), norms[i], norms[k], tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Serializes as a [`StateSetFile`]; deserializing checks orthogonality at
/// the default tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateSetFile", into = "StateSetFile")]
pub struct StateSet {
    pub name: String,
    dims: (usize, usize),
    states: Vec<BipartiteState>,
}

impl StateSet {
    /// Checks shared dims and pairwise orthogonality of the state vectors.
    pub fn new(name: impl Into<String>, states: Vec<BipartiteState>, tol: Tolerance) -> Result<Self> {
        let Some(first) = states.first() else {
            return invalid("a state set needs at least one state");
        };
        let dims = first.dims();
        if let Some(s) = states.iter().find(|s| s.dims() != dims) {
            return mismatch(format!(
                "state `{}` is {:?}, set is {:?}",
                s.label,
                s.dims(),
                dims
            ));
        }
        for (i, si) in states.iter().enumerate() {
            for sk in &states[i + 1..] {
                if !nearly_orthogonal(si.inner(sk), si.norm(), sk.norm(), tol) {
                    return invalid(format!(
                        "states `{}` and `{}` are not orthogonal",
                        si.label, sk.label
                    ));
                }
            }
        }
        Ok(StateSet {
            name: name.into(),
            dims,
            states,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim_a(&self) -> usize {
        self.dims.0
    }

    pub fn dim_b(&self) -> usize {
        self.dims.1
    }

    pub fn states(&self) -> &[BipartiteState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn schmidt_ranks(&self, tol: Tolerance) -> Vec<usize> {
        self.states.iter().map(|s| s.schmidt_rank(tol)).collect()
    }

    pub fn from_json(text: &str, tol: Tolerance) -> Result<Self> {
        let file: StateSetFile = serde_json::from_str(text)?;
        file.into_set(tol)
    }

    pub fn to_file(&self) -> StateSetFile {
        StateSetFile {
            name: self.name.clone(),
            dims: [self.dims.0, self.dims.1],
            states: self
                .states
                .iter()
                .map(|s| {
                    let mut terms = Vec::new();
                    for a in 0..self.dims.0 {
                        for b in 0..self.dims.1 {
                            let z = s.coeff[(b, a)];
                            if z != C64::new(0.0, 0.0) {
                                terms.push(TermFile {
                                    a,
                                    b,
                                    re: z.re,
                                    im: z.im,
                                });
                            }
                        }
                    }
                    StateFile {
                        label: s.label.clone(),
                        terms,
                    }
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("state set serializes")
    }

    /// ASCII grid with Alice's basis down the side and Bob's across the top.
    /// Each cell lists the labels of states carrying a nonzero `|m⟩_A|n⟩_B`
    /// amplitude.
    pub fn render_grid(&self, tol: Tolerance) -> String {
        let (da, db) = self.dims;
        let mut cells = vec![vec![String::new(); db]; da];
        for s in &self.states {
            let cut = tol.abs * s.coeff.max_abs();
            for (m, row) in cells.iter_mut().enumerate() {
                for (n, cell) in row.iter_mut().enumerate() {
                    if s.coeff[(n, m)].norm() > cut {
                        if !cell.is_empty() {
                            cell.push(',');
                        }
                        cell.push_str(&s.label);
                    }
                }
            }
        }
        let side: Vec<String> = (0..da).map(|m| format!("|{m}>A")).collect();
        let top: Vec<String> = (0..db).map(|n| format!("|{n}>B")).collect();
        let w = cells
            .iter()
            .flatten()
            .chain(&top)
            .map(|c| c.chars().count())
            .max()
            .unwrap_or(1);
        let sw = side.iter().map(|s| s.len()).max().unwrap_or(0);
        let rule = format!("{}+{}", " ".repeat(sw + 1), format!("{}+", "-".repeat(w + 2)).repeat(db));

        let mut out = String::new();
        out.push_str(&" ".repeat(sw + 2));
        for t in &top {
            out.push_str(&format!(" {t:^w$}  "));
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for (m, row) in cells.iter().enumerate() {
            out.push_str(&format!("{:>sw$} |", side[m]));
            for c in row {
                out.push_str(&format!(" {c:^w$} |"));
            }
            out.push('\n');
            out.push_str(&rule);
            out.push('\n');
        }
        out
    }
}

/// On-disk form of a [`StateSet`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateSetFile {
    pub name: String,
    pub dims: [usize; 2],
    pub states: Vec<StateFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub label: String,
    pub terms: Vec<TermFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermFile {
    pub a: usize,
    pub b: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl TryFrom<StateSetFile> for StateSet {
    type Error = Error;

    fn try_from(f: StateSetFile) -> Result<Self> {
        f.into_set(Tolerance::default())
    }
}

impl From<StateSet> for StateSetFile {
    fn from(s: StateSet) -> Self {
        s.to_file()
    }
}

impl StateSetFile {
    pub fn into_set(self, tol: Tolerance) -> Result<StateSet> {
        let [da, db] = self.dims;
        let states = self
            .states
            .into_iter()
            .map(|s| {
                let terms: Vec<_> = s
                    .terms
                    .iter()
                    .map(|t| (t.a, t.b, C64::new(t.re, t.im)))
                    .collect();
                BipartiteState::from_terms(da, db, s.label, &terms)
            })
            .collect::<Result<Vec<_>>>()?;
        StateSet::new(self.name, states, tol)
    }
}

/// Pure state of several parties, amplitudes in row-major party order.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipartiteState {
    dims: Vec<usize>,
    coeff: Vec<C64>,
}

impl MultipartiteState {
    pub fn new(dims: Vec<usize>, coeff: Vec<C64>) -> Result<Self> {
        if dims.len() < 2 {
            return invalid("a multipartite state needs at least two parties");
        }
        if dims.contains(&0) {
            return invalid("party dimensions must be positive");
        }
        let total: usize = dims.iter().product();
        if coeff.len() != total {
            return mismatch(format!(
                "dims {dims:?} need {total} amplitudes, got {}",
                coeff.len()
            ));
        }
        Ok(MultipartiteState { dims, coeff })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Reduced density operator of one party.
    pub fn reduced_density(&self, party: usize) -> ComplexMatrix {
        let d = self.dims[party];
        let inner: usize = self.dims[party + 1..].iter().product();
        let rest = self.coeff.len() / d;
        // Flatten everything except `party` into the column index.
        let x = ComplexMatrix::from_fn(d, rest, |i, c| {
            let (hi, lo) = (c / inner, c % inner);
            self.coeff[(hi * d + i) * inner + lo]
        });
        &x * &x.adjoint()
    }

    /// Smallest rank among the single-party reduced density operators.
    pub fn generalized_schmidt_rank(&self, tol: Tolerance) -> usize {
        (0..self.dims.len())
            .map(|p| self.reduced_density(p).rank(tol))
            .min()
            .expect("at least two parties")
    }
}
