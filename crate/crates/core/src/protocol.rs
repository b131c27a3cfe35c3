//! The teleportation pipeline: pre-measurement state for a basis pair,
//! Bob's conditional branch vectors, and end-to-end runs with a restoration
//! table.
//!
//! Circuit, with qubits `|Msg A B⟩`:
//!
//! ```text
//! (U_msg ⊗ U_A ⊗ I) (H ⊗ I ⊗ I) (CNOT_{0→1} ⊗ I) (|Msg⟩ ⊗ |Bell⟩)
//! ```
//!
//! followed by a computational-basis readout of qubits 0 and 1.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TeleportError};
use crate::qmath::{BasisId, Complex, ComplexMatrix2, GateId, JsonComplex, EPS};
use crate::sampling::rng_from_seed;
use crate::simulator::{Outcome, StateVector};
use crate::solver::RestorationTable;

/// Measurement bases for the message qubit and Alice's half of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisChoice {
    pub msg: BasisId,
    pub alice: BasisId,
}

impl BasisChoice {
    pub const fn new(msg: BasisId, alice: BasisId) -> Self {
        Self { msg, alice }
    }

    /// All sixteen pairs over `{Z, X, Y, −Y}`, message basis varying slowest.
    pub fn named_pairs() -> Vec<BasisChoice> {
        BasisId::NAMED
            .iter()
            .flat_map(|&m| BasisId::NAMED.iter().map(move |&a| BasisChoice::new(m, a)))
            .collect()
    }

    pub fn transforms(&self) -> Result<(ComplexMatrix2, ComplexMatrix2)> {
        Ok((self.msg.transform()?, self.alice.transform()?))
    }
}

impl fmt::Display for BasisChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.msg, self.alice)
    }
}

impl FromStr for BasisChoice {
    type Err = TeleportError;

    /// `"<msg>,<alice>"`, e.g. `Y,Z` or `arb:[..],-Y`. Commas inside
    /// brackets do not split.
    fn from_str(s: &str) -> Result<Self> {
        let mut depth = 0i32;
        let mut split = None;
        for (i, ch) in s.char_indices() {
            match ch {
                '[' => depth += 1,
                ']' => depth -= 1,
                ',' if depth == 0 && split.replace(i).is_some() => {
                    split = None;
                    break;
                }
                _ => {}
            }
        }
        let i = split
            .ok_or_else(|| TeleportError::Parse(format!("expected '<msg>,<alice>', got {s:?}")))?;
        Ok(BasisChoice::new(s[..i].parse()?, s[i + 1..].parse()?))
    }
}

/// Bob's unnormalized conditional vectors, one per outcome, with the uniform
/// 1/2 prefactor of the pre-measurement state removed. Outcome `o` occurs
/// with probability `‖φ_o‖² / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[JsonComplex; 2]; 4]", into = "[[JsonComplex; 2]; 4]")]
pub struct BranchMap {
    branches: [[Complex; 2]; 4],
}

impl From<[[JsonComplex; 2]; 4]> for BranchMap {
    fn from(b: [[JsonComplex; 2]; 4]) -> Self {
        Self {
            branches: b.map(|v| v.map(Complex::from)),
        }
    }
}

impl From<BranchMap> for [[JsonComplex; 2]; 4] {
    fn from(b: BranchMap) -> Self {
        b.branches.map(|v| v.map(JsonComplex::from))
    }
}

impl BranchMap {
    pub fn new(branches: [[Complex; 2]; 4]) -> Self {
        Self { branches }
    }

    pub fn get(&self, outcome: Outcome) -> [Complex; 2] {
        self.branches[outcome.index()]
    }

    pub fn probability(&self, outcome: Outcome) -> f64 {
        let [a, b] = self.get(outcome);
        (a.norm_sqr() + b.norm_sqr()) / 4.0
    }

    /// Sum of squared branch norms; 4 for a normalized message.
    pub fn total_weight(&self) -> f64 {
        Outcome::ALL.iter().map(|&o| 4.0 * self.probability(o)).sum()
    }

    /// True iff `other = e^{iθ} · self` entrywise for a single θ shared by
    /// all four branches.
    pub fn equal_up_to_global_phase(&self, other: &BranchMap, tol: f64) -> bool {
        let flat = |b: &BranchMap| -> Vec<Complex> { b.branches.iter().flatten().copied().collect() };
        let (lhs, rhs) = (flat(self), flat(other));
        let pivot = (0..lhs.len())
            .max_by(|&i, &j| lhs[i].norm().total_cmp(&lhs[j].norm()))
            .unwrap_or(0);
        let phase = if lhs[pivot].norm() > tol {
            let ratio = rhs[pivot] / lhs[pivot];
            if (ratio.norm() - 1.0).abs() > tol {
                return false;
            }
            ratio / ratio.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        lhs.iter().zip(&rhs).all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    /// `Σ_o φ_o φ_o† / 4`: Bob's state averaged over Alice's outcomes.
    pub fn average_density(&self) -> ComplexMatrix2 {
        let mut rho = [[Complex::new(0.0, 0.0); 2]; 2];
        for v in &self.branches {
            for r in 0..2 {
                for c in 0..2 {
                    rho[r][c] += v[r] * v[c].conj() / 4.0;
                }
            }
        }
        ComplexMatrix2 { entries: rho }
    }
}

/// Three-qubit state right before Alice's computational-basis readout.
pub fn pre_measurement_state(msg: &StateVector, bases: &BasisChoice) -> Result<StateVector> {
    if msg.n_qubits() != 1 {
        return Err(TeleportError::WrongQubitCount {
            expected: 1,
            actual: msg.n_qubits(),
        });
    }
    let (u_msg, u_alice) = bases.transforms()?;
    msg.tensor(&StateVector::bell_pair())?
        .apply_cnot(0, 1)?
        .apply_1q(&GateId::H.matrix(), 0)?
        .apply_1q(&u_msg, 0)?
        .apply_1q(&u_alice, 1)
}

pub fn branch_map(msg: &StateVector, bases: &BasisChoice) -> Result<BranchMap> {
    let state = pre_measurement_state(msg, bases)?;
    let two = Complex::new(2.0, 0.0);
    let mut branches = [[Complex::new(0.0, 0.0); 2]; 4];
    for o in Outcome::ALL {
        let base = o.index() << 1;
        branches[o.index()] = [two * state.amplitude(base), two * state.amplitude(base | 1)];
    }
    Ok(BranchMap { branches })
}

/// Closed-form branch coefficients in terms of the entries `x_ij` of
/// `u_msg`, `y_ij` of `u_alice` and the message amplitudes.
pub fn branch_coefficients_formula(
    u_msg: &ComplexMatrix2,
    u_alice: &ComplexMatrix2,
    alpha: Complex,
    beta: Complex,
) -> BranchMap {
    let x = |i: usize, j: usize| u_msg.get(i - 1, j - 1);
    let y = |i: usize, j: usize| u_alice.get(i - 1, j - 1);
    let mut branches = [[Complex::new(0.0, 0.0); 2]; 4];
    for o in Outcome::ALL {
        // message row m+1 of U_msg, Alice row a+1 of U_A
        let m = usize::from(o.m) + 1;
        let a = usize::from(o.a) + 1;
        let phi0 = alpha * (x(m, 1) * y(a, 1) + x(m, 2) * y(a, 1))
            + beta * (x(m, 1) * y(a, 2) - x(m, 2) * y(a, 2));
        let phi1 = alpha * (x(m, 1) * y(a, 2) + x(m, 2) * y(a, 2))
            + beta * (x(m, 1) * y(a, 1) - x(m, 2) * y(a, 1));
        branches[o.index()] = [phi0, phi1];
    }
    BranchMap { branches }
}

/// `|⟨a|b⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm_sqr().clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeSelection {
    Forced(Outcome),
    /// Sample an outcome from its Born probability with a seeded generator.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportRun {
    pub outcome: Outcome,
    pub probability: f64,
    pub bob_before: StateVector,
    pub bob_after: StateVector,
    pub fidelity: f64,
}

fn restore(
    msg: &StateVector,
    table: &RestorationTable,
    outcome: Outcome,
    probability: f64,
    bob_before: StateVector,
) -> Result<TeleportRun> {
    let bob_after = bob_before.apply_1q(&table.unitary(outcome), 0)?;
    Ok(TeleportRun {
        outcome,
        probability,
        fidelity: fidelity(msg, &bob_after),
        bob_before,
        bob_after,
    })
}

pub fn run_teleportation(
    msg: &StateVector,
    bases: &BasisChoice,
    table: &RestorationTable,
    selection: OutcomeSelection,
) -> Result<TeleportRun> {
    let state = pre_measurement_state(msg, bases)?;
    let projections = Outcome::ALL
        .iter()
        .map(|&o| state.project_alice(o))
        .collect::<Result<Vec<_>>>()?;
    let outcome = match selection {
        OutcomeSelection::Forced(o) => o,
        OutcomeSelection::Random(seed) => {
            let u: f64 = rng_from_seed(seed).random();
            let mut acc = 0.0;
            let mut chosen = None;
            for p in projections.iter().filter(|p| p.bob_state.is_some()) {
                chosen = Some(p.outcome);
                acc += p.probability;
                if u < acc {
                    break;
                }
            }
            chosen.ok_or(TeleportError::ZeroVector)?
        }
    };
    let projection = &projections[outcome.index()];
    match (&projection.bob_state, projection.probability > EPS) {
        (Some(bob), true) => restore(msg, table, outcome, projection.probability, bob.clone()),
        _ => Err(TeleportError::ZeroProbabilityOutcome(outcome)),
    }
}

/// One run per outcome, in row-major order. Outcomes whose branch is empty
/// have no conditional state and are left out.
pub fn teleport_all_outcomes(
    msg: &StateVector,
    bases: &BasisChoice,
    table: &RestorationTable,
) -> Result<Vec<TeleportRun>> {
    let state = pre_measurement_state(msg, bases)?;
    let mut runs = Vec::with_capacity(4);
    for o in Outcome::ALL {
        let p = state.project_alice(o)?;
        if let Some(bob) = p.bob_state {
            runs.push(restore(msg, table, o, p.probability, bob)?);
        }
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposer::GateSequence;
    use crate::sampling::{random_qubit, random_unitary, rng_from_seed};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn table(names: [&str; 4]) -> RestorationTable {
        RestorationTable::from_sequences(names.map(|n| n.parse::<GateSequence>().unwrap()))
    }

    fn zz_table() -> RestorationTable {
        table(["I", "X", "Z", "ZX"])
    }

    const ZZ: BasisChoice = BasisChoice::new(BasisId::Z, BasisId::Z);
    const YY: BasisChoice = BasisChoice::new(BasisId::Y, BasisId::Y);
    const YZ: BasisChoice = BasisChoice::new(BasisId::Y, BasisId::Z);

    fn expect_branches(bases: BasisChoice, alpha: Complex, beta: Complex, expected: [[Complex; 2]; 4]) {
        let msg = StateVector::message(alpha, beta).unwrap();
        let got = branch_map(&msg, &bases).unwrap();
        // Hand-written branch displays drop a common prefactor; compare the shapes
        // after rescaling to unit total weight.
        let expected = BranchMap::new(expected);
        let scale = (expected.total_weight() / 4.0).sqrt();
        let rescaled = BranchMap::new(expected.branches.map(|v| v.map(|z| z / scale)));
        assert!(
            got.equal_up_to_global_phase(&rescaled, 1e-9),
            "{bases}: {got:?} vs {rescaled:?}"
        );
    }

    #[test]
    fn standard_branches() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        expect_branches(ZZ, a, b, [[a, b], [b, a], [a, -b], [-b, a]]);
    }

    #[test]
    fn y_y_branches() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let i = c(0.0, 1.0);
        expect_branches(
            YY,
            a,
            b,
            [
                [a + b, i * (-a + b)],
                [a - b, i * (a + b)],
                [i * (a - b), a + b],
                [i * (a + b), -a + b],
            ],
        );
    }

    #[test]
    fn y_z_branches() {
        let (a, b) = (c(0.28, 0.96), c(0.0, 0.0));
        let i = c(0.0, 1.0);
        expect_branches(YZ, a, b, [[a, i * b], [i * b, a], [i * a, b], [b, i * a]]);
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        expect_branches(YZ, a, b, [[a, i * b], [i * b, a], [i * a, b], [b, i * a]]);
    }

    #[test]
    fn y_y_outcome_11_exact_vector() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let i = c(0.0, 1.0);
        let msg = StateVector::message(a, b).unwrap();
        let got = branch_map(&msg, &YY).unwrap();
        // S†/H products leave a factor (1 − i)/2: a phase and a 1/√2 norm
        let phase = c(0.5, -0.5);
        let expected = [i * (a + b) * phase, (-a + b) * phase];
        let v = got.get(Outcome::ALL[3]);
        assert!((v[0] - expected[0]).norm() < EPS && (v[1] - expected[1]).norm() < EPS);
    }

    #[test]
    fn formula_with_identity_transforms() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let id = ComplexMatrix2::identity();
        let got = branch_coefficients_formula(&id, &id, a, b);
        assert_eq!(got, BranchMap::new([[a, b], [b, a], [a, -b], [-b, a]]));
    }

    #[test]
    fn formula_with_beta_zero_uses_alpha_terms_only() {
        let mut rng = rng_from_seed(2);
        let (um, ua) = (random_unitary(&mut rng), random_unitary(&mut rng));
        let got = branch_coefficients_formula(&um, &ua, c(1.0, 0.0), c(0.0, 0.0));
        for o in Outcome::ALL {
            let (m, a) = (o.m as usize, o.a as usize);
            let row_sum = um.get(m, 0) + um.get(m, 1);
            let v = got.get(o);
            assert!((v[0] - row_sum * ua.get(a, 0)).norm() < EPS);
            assert!((v[1] - row_sum * ua.get(a, 1)).norm() < EPS);
        }
    }

    #[test]
    fn formula_matches_simulator_for_y_y() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let u = BasisId::Y.transform().unwrap();
        let formula = branch_coefficients_formula(&u, &u, a, b);
        let simulated = branch_map(&StateVector::message(a, b).unwrap(), &YY).unwrap();
        assert!(formula.equal_up_to_global_phase(&simulated, EPS));
    }

    #[test]
    fn formula_matches_simulator_for_random_unitaries() {
        let mut rng = rng_from_seed(99);
        for _ in 0..200 {
            let (um, ua) = (random_unitary(&mut rng), random_unitary(&mut rng));
            let [a, b] = random_qubit(&mut rng);
            let bases = BasisChoice::new(BasisId::Arbitrary(um), BasisId::Arbitrary(ua));
            let simulated = branch_map(&StateVector::message(a, b).unwrap(), &bases).unwrap();
            let formula = branch_coefficients_formula(&um, &ua, a, b);
            assert!(formula.equal_up_to_global_phase(&simulated, EPS));
            assert!((simulated.total_weight() - 4.0).abs() < EPS);
        }
    }

    #[test]
    fn standard_protocol_restores_every_outcome() {
        let msg = StateVector::message(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let runs = teleport_all_outcomes(&msg, &ZZ, &zz_table()).unwrap();
        assert_eq!(runs.len(), 4);
        for run in &runs {
            assert!((run.probability - 0.25).abs() < EPS);
            assert!(run.fidelity > 1.0 - EPS);
        }
    }

    #[test]
    fn y_y_with_standard_table_fails() {
        let msg = StateVector::message(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let run =
            run_teleportation(&msg, &YY, &zz_table(), OutcomeSelection::Forced(Outcome::ALL[1])).unwrap();
        assert!(run.fidelity < 1.0 - 1e-3);
        assert!((run.fidelity - 0.5).abs() < EPS);
    }

    #[test]
    fn y_y_with_adapted_table_succeeds() {
        let t = table(["HS", "HSX", "HSY", "HSYX"]);
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let [a, b] = random_qubit(&mut rng);
            let msg = StateVector::message(a, b).unwrap();
            for o in Outcome::ALL {
                let run = run_teleportation(&msg, &YY, &t, OutcomeSelection::Forced(o)).unwrap();
                assert!(run.fidelity > 1.0 - EPS);
            }
        }
    }

    #[test]
    fn y_z_with_adapted_table_succeeds() {
        let t = table(["S†", "S†X", "S†Z", "S†ZX"]);
        let msg = StateVector::message(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let runs = teleport_all_outcomes(&msg, &YZ, &t).unwrap();
        assert_eq!(runs.len(), 4);
        assert!((runs.iter().map(|r| r.probability).sum::<f64>() - 1.0).abs() < EPS);
        assert!(runs.iter().all(|r| r.fidelity > 1.0 - EPS));
    }

    #[test]
    fn random_selection_is_seeded() {
        let msg = StateVector::message(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let t = zz_table();
        let a = run_teleportation(&msg, &ZZ, &t, OutcomeSelection::Random(17)).unwrap();
        let b = run_teleportation(&msg, &ZZ, &t, OutcomeSelection::Random(17)).unwrap();
        assert_eq!(a, b);
        let seen: std::collections::BTreeSet<_> = (0..64)
            .map(|s| run_teleportation(&msg, &ZZ, &t, OutcomeSelection::Random(s)).unwrap().outcome)
            .collect();
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn forced_empty_outcome_is_an_error() {
        let xx = BasisChoice::new(BasisId::X, BasisId::X);
        let msg = StateVector::message(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let err = run_teleportation(&msg, &xx, &zz_table(), OutcomeSelection::Forced(Outcome::ALL[2]));
        assert_eq!(err, Err(TeleportError::ZeroProbabilityOutcome(Outcome::ALL[2])));
        // enumeration skips the empty branches instead of failing
        let runs = teleport_all_outcomes(&msg, &xx, &zz_table()).unwrap();
        assert_eq!(runs.len(), 2);
        assert!((runs.iter().map(|r| r.probability).sum::<f64>() - 1.0).abs() < EPS);
    }

    #[test]
    fn bob_average_state_is_maximally_mixed_for_any_bases() {
        let mut rng = rng_from_seed(8);
        let half = ComplexMatrix2::real(0.5, 0.0, 0.0, 0.5);
        let mut choices = BasisChoice::named_pairs();
        for _ in 0..20 {
            choices.push(BasisChoice::new(
                BasisId::Arbitrary(random_unitary(&mut rng)),
                BasisId::Arbitrary(random_unitary(&mut rng)),
            ));
        }
        for bases in choices {
            let [a, b] = random_qubit(&mut rng);
            let map = branch_map(&StateVector::message(a, b).unwrap(), &bases).unwrap();
            assert!(map.average_density().max_abs_diff(&half) < EPS, "{bases}");
        }
    }

    #[test]
    fn basis_choice_parsing() {
        assert_eq!("Y,Z".parse::<BasisChoice>().unwrap(), YZ);
        assert_eq!(
            "-Y, Y".parse::<BasisChoice>().unwrap(),
            BasisChoice::new(BasisId::MinusY, BasisId::Y)
        );
        let arb = "arb:[0,1,1,0],Z".parse::<BasisChoice>().unwrap();
        assert_eq!(arb.msg, BasisId::Arbitrary(GateId::X.matrix()));
        assert!("Y".parse::<BasisChoice>().is_err());
        assert!("Y,Z,X".parse::<BasisChoice>().is_err());
        for pair in BasisChoice::named_pairs() {
            assert_eq!(pair.to_string().parse::<BasisChoice>().unwrap(), pair);
        }
    }

    #[test]
    fn pre_measurement_requires_single_qubit_message() {
        let two = StateVector::bell_pair();
        assert!(pre_measurement_state(&two, &ZZ).is_err());
    }
}
