//! How well an eavesdropper does when the measurement bases are secret.
//!
//! The adversary holds Bob's qubit and both classical bits, knows the
//! protocol, and restores with the table solved for a guessed basis pair.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeleportError};
use crate::protocol::{fidelity, pre_measurement_state, BasisChoice};
use crate::qmath::{BasisId, EPS};
use crate::sampling::{random_qubit, rng_from_seed};
use crate::simulator::{Outcome, StateVector};
use crate::solver::solve_restoration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub true_bases: BasisChoice,
    pub guessed_bases: BasisChoice,
    pub trials: usize,
    /// Mean over messages of the outcome-probability-weighted fidelity.
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
    pub max_fidelity: f64,
    /// Conditional fidelity per outcome, averaged over the messages for
    /// which that outcome is possible.
    pub per_outcome_mean: [Option<f64>; 4],
}

pub fn mismatch_fidelity(
    true_bases: &BasisChoice,
    guessed_bases: &BasisChoice,
    trials: usize,
    seed: u64,
) -> Result<AttackReport> {
    if trials == 0 {
        return Err(TeleportError::NoTrials);
    }
    let guess_table = solve_restoration(guessed_bases)?
        .into_table()
        .ok_or_else(|| TeleportError::InfeasibleGuess(guessed_bases.to_string()))?;

    let mut rng = rng_from_seed(seed);
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut outcome_sum = [0.0; 4];
    let mut outcome_count = [0usize; 4];
    for _ in 0..trials {
        let [alpha, beta] = random_qubit(&mut rng);
        let msg = StateVector::message(alpha, beta)?;
        let state = pre_measurement_state(&msg, true_bases)?;
        let mut weighted = 0.0;
        for o in Outcome::ALL {
            let projection = state.project_alice(o)?;
            let Some(bob) = projection.bob_state else {
                continue;
            };
            let restored = bob.apply_1q(&guess_table.unitary(o), 0)?;
            let f = fidelity(&msg, &restored);
            weighted += projection.probability * f;
            outcome_sum[o.index()] += f;
            outcome_count[o.index()] += 1;
        }
        let weighted = weighted.clamp(0.0, 1.0);
        sum += weighted;
        min = min.min(weighted);
        max = max.max(weighted);
    }
    let mean = (sum / trials as f64).clamp(min, max);
    let per_outcome_mean = std::array::from_fn(|k| {
        (outcome_count[k] > 0).then(|| outcome_sum[k] / outcome_count[k] as f64)
    });
    Ok(AttackReport {
        true_bases: *true_bases,
        guessed_bases: *guessed_bases,
        trials,
        mean_fidelity: mean,
        min_fidelity: min,
        max_fidelity: max,
        per_outcome_mean,
    })
}

/// Mean attack fidelity for every (true key, guessed key) combination, where
/// a key is one basis from the alphabet used on both of Alice's qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyspaceReport {
    pub alphabet: Vec<BasisId>,
    pub trials: usize,
    pub seed: u64,
    /// `grid[t][g]`: true key `t`, guessed key `g`. `None` when the guessed
    /// key has no restoration table.
    pub grid: Vec<Vec<Option<f64>>>,
    /// Per true key: expected fidelity for an adversary guessing uniformly
    /// among the usable keys of the alphabet.
    pub uniform_guess_fidelity: Vec<Option<f64>>,
}

pub fn basis_keyspace_report(alphabet: &[BasisId], trials: usize, seed: u64) -> Result<KeyspaceReport> {
    if trials == 0 {
        return Err(TeleportError::NoTrials);
    }
    let key = |b: &BasisId| BasisChoice::new(*b, *b);
    let mut grid = Vec::with_capacity(alphabet.len());
    for t in alphabet {
        let mut row = Vec::with_capacity(alphabet.len());
        for g in alphabet {
            let cell = match mismatch_fidelity(&key(t), &key(g), trials, seed) {
                Ok(report) => Some(report.mean_fidelity),
                Err(TeleportError::InfeasibleGuess(_)) => None,
                Err(e) => return Err(e),
            };
            row.push(cell);
        }
        grid.push(row);
    }
    let uniform_guess_fidelity = grid
        .iter()
        .map(|row| {
            let usable: Vec<f64> = row.iter().flatten().copied().collect();
            (!usable.is_empty()).then(|| usable.iter().sum::<f64>() / usable.len() as f64)
        })
        .collect();
    Ok(KeyspaceReport {
        alphabet: alphabet.to_vec(),
        trials,
        seed,
        grid,
        uniform_guess_fidelity,
    })
}

/// Whether a report's fidelities are ordered and lie in `[0, 1]`.
pub fn report_is_consistent(r: &AttackReport) -> bool {
    let in_unit = |x: f64| (-EPS..=1.0 + EPS).contains(&x);
    in_unit(r.min_fidelity)
        && in_unit(r.max_fidelity)
        && r.min_fidelity <= r.mean_fidelity + EPS
        && r.mean_fidelity <= r.max_fidelity + EPS
        && r.per_outcome_mean.iter().flatten().all(|&f| in_unit(f))
}
