//! Restoration-unitary synthesis.
//!
//! For each outcome, Bob's branch vector depends linearly on the message
//! `(α, β)`. The matrix `M` whose columns are the branch vectors for
//! `(1, 0)` and `(0, 1)` is that linear map, so the restoration is `M⁻¹`
//! rescaled to a unitary. It exists only when `M⁻¹ M⁻¹† = c·I`.

use serde::{Deserialize, Serialize};

use crate::decomposer::{decompose, GateSequence};
use crate::error::{Result, TeleportError};
use crate::protocol::{branch_map, teleport_all_outcomes, BasisChoice};
use crate::qmath::{equal_up_to_phase, Complex, ComplexMatrix2, EPS};
use crate::sampling::{random_qubit, rng_from_seed};
use crate::simulator::{Outcome, StateVector};

/// Per-outcome restoration unitaries, optionally with gate-sequence names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorationTable {
    unitaries: [ComplexMatrix2; 4],
    decomposition: [Option<GateSequence>; 4],
}

impl RestorationTable {
    /// Entries are indexed by [`Outcome::index`]. Each must be unitary.
    pub fn new(unitaries: [ComplexMatrix2; 4]) -> Result<Self> {
        for u in &unitaries {
            if !u.is_unitary() {
                return Err(TeleportError::NonUnitary);
            }
        }
        Ok(Self {
            unitaries,
            decomposition: Default::default(),
        })
    }

    pub fn from_sequences(sequences: [GateSequence; 4]) -> Self {
        Self {
            unitaries: sequences.clone().map(|s| s.compose()),
            decomposition: sequences.map(Some),
        }
    }

    pub fn unitary(&self, outcome: Outcome) -> ComplexMatrix2 {
        self.unitaries[outcome.index()]
    }

    pub fn unitaries(&self) -> &[ComplexMatrix2; 4] {
        &self.unitaries
    }

    pub fn decomposition(&self, outcome: Outcome) -> Option<&GateSequence> {
        self.decomposition[outcome.index()].as_ref()
    }

    /// Fills in gate sequences for every entry the decomposer can name
    /// within `max_len` gates; other entries stay unnamed.
    pub fn with_decompositions(mut self, max_len: usize) -> Self {
        for (slot, u) in self.decomposition.iter_mut().zip(&self.unitaries) {
            *slot = decompose(u, max_len).ok();
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfeasibleReason {
    /// Branch vectors for `(1,0)` and `(0,1)` are linearly dependent.
    SingularBranch,
    /// `M⁻¹` exists but is not proportional to a unitary.
    NonUnitarySolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolveResult {
    Table(RestorationTable),
    Infeasible {
        reason: InfeasibleReason,
        witness: Outcome,
    },
}

impl SolveResult {
    pub fn table(&self) -> Option<&RestorationTable> {
        match self {
            SolveResult::Table(t) => Some(t),
            SolveResult::Infeasible { .. } => None,
        }
    }

    pub fn into_table(self) -> Option<RestorationTable> {
        match self {
            SolveResult::Table(t) => Some(t),
            SolveResult::Infeasible { .. } => None,
        }
    }
}

/// The four branch-response matrices `M_o`, indexed by [`Outcome::index`].
pub fn branch_matrices(bases: &BasisChoice) -> Result<[ComplexMatrix2; 4]> {
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let first = branch_map(&StateVector::message(one, zero)?, bases)?;
    let second = branch_map(&StateVector::message(zero, one)?, bases)?;
    Ok(Outcome::ALL.map(|o| ComplexMatrix2::from_columns(first.get(o), second.get(o))))
}

/// Rescales `u` to a unitary when `u·u† = c·I` for some `c > 0`.
fn unitarize(u: &ComplexMatrix2) -> Option<ComplexMatrix2> {
    let gram = u.mat_mul(&u.dagger());
    let c = 0.5 * (gram.get(0, 0).re + gram.get(1, 1).re);
    let tol = EPS * gram.max_abs_entry();
    let scalar = ComplexMatrix2::real(c, 0.0, 0.0, c);
    if c <= 0.0 || gram.max_abs_diff(&scalar) > tol {
        return None;
    }
    Some(u.scale(Complex::new(1.0 / c.sqrt(), 0.0)))
}

/// Derives the restoration table for `bases`, or reports the first outcome
/// (row-major) for which no unitary restoration exists.
pub fn solve_restoration(bases: &BasisChoice) -> Result<SolveResult> {
    let matrices = branch_matrices(bases)?;
    let mut unitaries = [ComplexMatrix2::identity(); 4];
    for o in Outcome::ALL {
        let inverse = match matrices[o.index()].inverse() {
            Ok(inv) => inv,
            Err(TeleportError::Singular(_)) => {
                return Ok(SolveResult::Infeasible {
                    reason: InfeasibleReason::SingularBranch,
                    witness: o,
                })
            }
            Err(e) => return Err(e),
        };
        match unitarize(&inverse) {
            Some(u) => unitaries[o.index()] = u,
            None => {
                return Ok(SolveResult::Infeasible {
                    reason: InfeasibleReason::NonUnitarySolution,
                    witness: o,
                })
            }
        }
    }
    Ok(SolveResult::Table(RestorationTable::new(unitaries)?))
}

/// The composition rule `U01 · U00⁻¹ · U10 ≡ U11`, up to global phase.
pub fn check_relation(table: &RestorationTable) -> bool {
    let [u00, u01, u10, u11] = table.unitaries;
    match u00.inverse() {
        Ok(inv) => equal_up_to_phase(&(u01 * inv * u10), &u11),
        Err(_) => false,
    }
}

/// Worst fidelity over `trials` Haar-random messages and every outcome with
/// nonzero probability.
pub fn verify_table(
    bases: &BasisChoice,
    table: &RestorationTable,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(TeleportError::NoTrials);
    }
    let mut rng = rng_from_seed(seed);
    let mut worst = 1.0_f64;
    for _ in 0..trials {
        let [alpha, beta] = random_qubit(&mut rng);
        let msg = StateVector::message(alpha, beta)?;
        for run in teleport_all_outcomes(&msg, bases, table)? {
            worst = worst.min(run.fidelity);
        }
    }
    Ok(worst)
}
