//! Local measurements and separable POVMs.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};
use crate::numerics::{ComplexMatrix, Tolerance};
use crate::states::Party;

/// A generalized measurement by one party: Kraus operators acting on the
/// party's full local space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasurementRepr", into = "MeasurementRepr")]
pub struct LocalMeasurement {
    party: Party,
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MeasurementRepr {
    party: Party,
    kraus: Vec<ComplexMatrix>,
    #[serde(default)]
    labels: Vec<String>,
}

impl TryFrom<MeasurementRepr> for LocalMeasurement {
    type Error = Error;

    fn try_from(r: MeasurementRepr) -> Result<Self> {
        let m = LocalMeasurement::new(r.party, r.kraus)?;
        if r.labels.is_empty() {
            Ok(m)
        } else {
            m.with_labels(r.labels)
        }
    }
}

impl From<LocalMeasurement> for MeasurementRepr {
    fn from(m: LocalMeasurement) -> Self {
        MeasurementRepr {
            party: m.party,
            kraus: m.kraus,
            labels: m.labels,
        }
    }
}

impl LocalMeasurement {
    /// Outcome labels default to "1", "2", ...
    pub fn new(party: Party, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return invalid("a measurement needs at least one Kraus operator");
        };
        let dim = first.rows();
        if dim == 0 {
            return invalid("Kraus operators must be nonempty");
        }
        if let Some(k) = kraus.iter().find(|k| k.shape() != (dim, dim)) {
            return mismatch(format!(
                "Kraus operator {:?} in a dimension-{dim} measurement",
                k.shape()
            ));
        }
        let labels = (1..=kraus.len()).map(|i| i.to_string()).collect();
        Ok(LocalMeasurement {
            party,
            dim,
            kraus,
            labels,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.kraus.len() {
            return invalid(format!(
                "{} labels for {} outcomes",
                labels.len(),
                self.kraus.len()
            ));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Projective measurement onto blocks of standard basis indices.
    pub fn basis_blocks(party: Party, dim: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if let Some(&i) = blocks.iter().flatten().find(|&&i| i >= dim) {
            return invalid(format!("basis index {i} outside dimension {dim}"));
        }
        let kraus = blocks
            .iter()
            .map(|b| ComplexMatrix::basis_projector(dim, b.iter().copied()))
            .collect();
        LocalMeasurement::new(party, kraus)
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn outcome_count(&self) -> usize {
        self.kraus.len()
    }

    /// `Σ K†K`.
    pub fn povm_sum(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            s = s.add(&(&k.adjoint() * k)).expect("same shape");
        }
        s
    }

    pub fn check_complete(&self, tol: Tolerance) -> bool {
        self.povm_sum()
            .approx_eq(&ComplexMatrix::identity(self.dim), tol.abs)
    }

    /// Complete, and every operator is a Hermitian idempotent orthogonal to
    /// the others.
    pub fn check_projective(&self, tol: Tolerance) -> bool {
        if !self.check_complete(tol) {
            return false;
        }
        let zero = ComplexMatrix::zeros(self.dim, self.dim);
        for (l, k) in self.kraus.iter().enumerate() {
            if !k.approx_eq(&k.adjoint(), tol.abs) || !(k * k).approx_eq(k, tol.abs) {
                return false;
            }
            for k2 in &self.kraus[l + 1..] {
                if !(k * k2).approx_eq(&zero, tol.abs) {
                    return false;
                }
            }
        }
        true
    }

    /// Same party and the same Kraus operators up to outcome order.
    pub fn same_operation(&self, other: &LocalMeasurement, tol: Tolerance) -> bool {
        if self.party != other.party
            || self.dim != other.dim
            || self.kraus.len() != other.kraus.len()
        {
            return false;
        }
        let mut used = vec![false; other.kraus.len()];
        self.kraus.iter().all(|k| {
            match (0..other.kraus.len()).find(|&i| !used[i] && k.approx_eq(&other.kraus[i], tol.abs)) {
                Some(i) => {
                    used[i] = true;
                    true
                }
                None => false,
            }
        })
    }
}

/// One product outcome `a ⊗ b` of a separable measurement and the state
/// index it declares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SepOutcome {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub declares: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparablePovm {
    pub dims: (usize, usize),
    pub outcomes: Vec<SepOutcome>,
}

impl SeparablePovm {
    pub fn new(dims: (usize, usize), outcomes: Vec<SepOutcome>) -> Result<Self> {
        let p = SeparablePovm { dims, outcomes };
        p.check_shapes()?;
        Ok(p)
    }

    fn check_shapes(&self) -> Result<()> {
        let (da, db) = self.dims;
        if da == 0 || db == 0 {
            return invalid("POVM dimensions must be positive");
        }
        if self.outcomes.is_empty() {
            return invalid("a POVM needs at least one outcome");
        }
        for (i, o) in self.outcomes.iter().enumerate() {
            if o.a.shape() != (da, da) || o.b.shape() != (db, db) {
                return mismatch(format!(
                    "outcome {i} has operators {:?} ⊗ {:?} on a {da}x{db} system",
                    o.a.shape(),
                    o.b.shape()
                ));
            }
        }
        Ok(())
    }

    /// `E_m = a†a ⊗ b†b`, on the full space with index `m·D_B + n`.
    pub fn element(&self, i: usize) -> ComplexMatrix {
        let o = &self.outcomes[i];
        (&o.a.adjoint() * &o.a).kron(&(&o.b.adjoint() * &o.b))
    }

    pub fn element_sum(&self) -> Result<ComplexMatrix> {
        self.check_shapes()?;
        let n = self.dims.0 * self.dims.1;
        let mut s = ComplexMatrix::zeros(n, n);
        for i in 0..self.outcomes.len() {
            s = s.add(&self.element(i))?;
        }
        Ok(s)
    }

    pub fn check_sep_complete(&self, tol: Tolerance) -> Result<bool> {
        let s = self.element_sum()?;
        Ok(s.approx_eq(&ComplexMatrix::identity(s.rows()), tol.abs))
    }
}
