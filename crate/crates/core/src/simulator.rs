//! Dense statevector simulation for up to three qubits.
//!
//! Qubit 0 is the leftmost ket label, so for `|Msg A B⟩` the message is
//! qubit 0 and Bob's half of the pair is qubit 2. Basis index `k` of an
//! `n`-qubit state stores the amplitude of the ket whose label, read left to
//! right, is the binary expansion of `k` (most significant bit first).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeleportError};
use crate::qmath::{complex_vec, Complex, ComplexMatrix2, EPS, ZERO};

pub const MAX_QUBITS: usize = 3;

/// Inputs whose norm lies within this distance of 1 are renormalized
/// silently; anything further off is rejected.
pub const RENORMALIZE_WINDOW: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    #[serde(with = "complex_vec")]
    amplitudes: Vec<Complex>,
    n_qubits: usize,
}

impl StateVector {
    /// Normalizes `amplitudes`, which must have length `2^n` with
    /// `1 <= n <= 3`.
    pub fn from_amplitudes(amplitudes: Vec<Complex>) -> Result<Self> {
        let n_qubits = match amplitudes.len() {
            2 => 1,
            4 => 2,
            8 => 3,
            other => {
                return Err(TeleportError::Parse(format!(
                    "amplitude count {other} is not 2, 4 or 8"
                )))
            }
        };
        let norm = norm_of(&amplitudes);
        if norm <= EPS {
            return Err(TeleportError::ZeroVector);
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
            n_qubits,
        })
    }

    /// `α|0⟩ + β|1⟩`. Near-unit inputs are renormalized.
    pub fn message(alpha: Complex, beta: Complex) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm * norm <= EPS {
            return Err(TeleportError::ZeroVector);
        }
        if (norm - 1.0).abs() > RENORMALIZE_WINDOW {
            return Err(TeleportError::NotNormalized(norm));
        }
        Self::from_amplitudes(vec![alpha, beta])
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell_pair() -> Self {
        let h = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            amplitudes: vec![h, ZERO, ZERO, h],
            n_qubits: 2,
        }
    }

    /// Computational basis state `|index⟩` on `n_qubits`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(TeleportError::WrongQubitCount {
                expected: MAX_QUBITS,
                actual: n_qubits,
            });
        }
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(TeleportError::BadIndex { index, n_qubits });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            n_qubits,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other`, with `self` on the left (lower qubit indices).
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n_qubits = self.n_qubits + other.n_qubits;
        if n_qubits > MAX_QUBITS {
            return Err(TeleportError::WrongQubitCount {
                expected: MAX_QUBITS,
                actual: n_qubits,
            });
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector {
            amplitudes,
            n_qubits,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply_1q(&self, gate: &ComplexMatrix2, qubit: usize) -> Result<StateVector> {
        self.check_index(qubit)?;
        if !gate.is_unitary() {
            return Err(TeleportError::NonUnitary);
        }
        Ok(StateVector {
            amplitudes: apply_1q_raw(&self.amplitudes, self.n_qubits, gate, qubit),
            n_qubits: self.n_qubits,
        })
    }

    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<StateVector> {
        self.check_index(control)?;
        self.check_index(target)?;
        if control == target {
            return Err(TeleportError::BadIndex {
                index: target,
                n_qubits: self.n_qubits,
            });
        }
        let cbit = bit_mask(self.n_qubits, control);
        let tbit = bit_mask(self.n_qubits, target);
        let mut out = self.amplitudes.clone();
        for (k, amp) in self.amplitudes.iter().enumerate() {
            if k & cbit != 0 {
                out[k ^ tbit] = *amp;
            }
        }
        Ok(StateVector {
            amplitudes: out,
            n_qubits: self.n_qubits,
        })
    }

    /// Projects the first two qubits of a 3-qubit state onto `outcome` and
    /// returns the branch probability together with qubit 2's normalized
    /// conditional state (`None` for an empty branch).
    pub fn project_alice(&self, outcome: Outcome) -> Result<Projection> {
        if self.n_qubits != 3 {
            return Err(TeleportError::WrongQubitCount {
                expected: 3,
                actual: self.n_qubits,
            });
        }
        let base = outcome.index() << 1;
        let branch = [self.amplitudes[base], self.amplitudes[base | 1]];
        let probability = branch[0].norm_sqr() + branch[1].norm_sqr();
        let bob_state = if probability > EPS {
            Some(StateVector::from_amplitudes(branch.to_vec())?)
        } else {
            None
        };
        Ok(Projection {
            outcome,
            probability,
            bob_state,
        })
    }

    fn check_index(&self, qubit: usize) -> Result<()> {
        if qubit < self.n_qubits {
            Ok(())
        } else {
            Err(TeleportError::BadIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            })
        }
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 5e-5)
            .map(|(k, a)| {
                format!(
                    "({})|{:0width$b}⟩",
                    crate::qmath::fmt_complex(*a),
                    k,
                    width = self.n_qubits
                )
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

fn norm_of(amplitudes: &[Complex]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn bit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// Applies `gate` to one tensor factor of an unnormalized amplitude vector.
pub(crate) fn apply_1q_raw(
    amplitudes: &[Complex],
    n_qubits: usize,
    gate: &ComplexMatrix2,
    qubit: usize,
) -> Vec<Complex> {
    let mask = bit_mask(n_qubits, qubit);
    let mut out = amplitudes.to_vec();
    for k in (0..amplitudes.len()).filter(|k| k & mask == 0) {
        let [lo, hi] = gate.apply([amplitudes[k], amplitudes[k | mask]]);
        out[k] = lo;
        out[k | mask] = hi;
    }
    out
}

/// Alice's two classical bits `(m, a)`: `m` from the message qubit, `a` from
/// her half of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Outcome {
    pub m: u8,
    pub a: u8,
}

impl Outcome {
    /// Row-major: 00, 01, 10, 11.
    pub const ALL: [Outcome; 4] = [
        Outcome { m: 0, a: 0 },
        Outcome { m: 0, a: 1 },
        Outcome { m: 1, a: 0 },
        Outcome { m: 1, a: 1 },
    ];

    pub fn new(m: u8, a: u8) -> Result<Self> {
        if m > 1 || a > 1 {
            return Err(TeleportError::Parse(format!("bits must be 0 or 1, got ({m}, {a})")));
        }
        Ok(Self { m, a })
    }

    pub fn index(self) -> usize {
        usize::from(self.m) << 1 | usize::from(self.a)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.m, self.a)
    }
}

impl FromStr for Outcome {
    type Err = TeleportError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "00" => Ok(Outcome::ALL[0]),
            "01" => Ok(Outcome::ALL[1]),
            "10" => Ok(Outcome::ALL[2]),
            "11" => Ok(Outcome::ALL[3]),
            other => Err(TeleportError::Parse(format!("invalid outcome {other:?}"))),
        }
    }
}

impl TryFrom<String> for Outcome {
    type Error = TeleportError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Outcome> for String {
    fn from(o: Outcome) -> String {
        o.to_string()
    }
}

/// Result of projecting Alice's qubits onto one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub outcome: Outcome,
    pub probability: f64,
    /// `None` when the branch is empty.
    pub bob_state: Option<StateVector>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::GateId;
    use crate::sampling::{random_qubit, random_unitary, rng_from_seed};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn assert_state(s: &StateVector, expected: &[Complex]) {
        assert_eq!(s.amplitudes().len(), expected.len());
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() < EPS, "{s} vs {expected:?}");
        }
    }

    #[test]
    fn message_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_state(&StateVector::message(c(1.0, 0.0), ZERO).unwrap(), &[c(1.0, 0.0), ZERO]);
        assert_state(
            &StateVector::message(c(h, 0.0), c(h, 0.0)).unwrap(),
            &[c(h, 0.0), c(h, 0.0)],
        );
        let s = StateVector::message(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        assert_state(&s, &[c(0.6, 0.0), c(0.0, 0.8)]);
        assert_eq!(StateVector::message(ZERO, ZERO), Err(TeleportError::ZeroVector));
        assert!(matches!(
            StateVector::message(c(1.0, 0.0), c(1.0, 0.0)),
            Err(TeleportError::NotNormalized(_))
        ));
        let nearly = StateVector::message(c(1.0 + 5e-7, 0.0), ZERO).unwrap();
        assert!((nearly.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_pair_is_maximally_entangled() {
        let bell = StateVector::bell_pair();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_state(&bell, &[c(h, 0.0), ZERO, ZERO, c(h, 0.0)]);
        assert!((bell.norm_sqr() - 1.0).abs() < EPS);
        // Reduced state of either qubit: outcome probabilities 1/2, 1/2.
        let amps = bell.amplitudes();
        let p_first0 = amps[0].norm_sqr() + amps[1].norm_sqr();
        let p_second0 = amps[0].norm_sqr() + amps[2].norm_sqr();
        assert!((p_first0 - 0.5).abs() < EPS && (p_second0 - 0.5).abs() < EPS);
        // and no coherence between |0⟩ and |1⟩ on the first qubit
        let coherence = amps[0].conj() * amps[2] + amps[1].conj() * amps[3];
        assert!(coherence.norm() < EPS);
    }

    #[test]
    fn single_qubit_gates() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let zero3 = StateVector::basis_state(3, 0).unwrap();
        let s = zero3.apply_1q(&GateId::H.matrix(), 0).unwrap();
        let mut expected = vec![ZERO; 8];
        expected[0b000] = c(h, 0.0);
        expected[0b100] = c(h, 0.0);
        assert_state(&s, &expected);
        assert_eq!(zero3.apply_1q(&ComplexMatrix2::identity(), 1).unwrap(), zero3);
        let flipped = zero3.apply_1q(&GateId::X.matrix(), 2).unwrap();
        assert_eq!(flipped, StateVector::basis_state(3, 0b001).unwrap());
        assert!(matches!(
            zero3.apply_1q(&GateId::X.matrix(), 3),
            Err(TeleportError::BadIndex { .. })
        ));
        assert_eq!(
            zero3.apply_1q(&ComplexMatrix2::real(1.0, 1.0, 0.0, 1.0), 0),
            Err(TeleportError::NonUnitary)
        );
    }

    #[test]
    fn cnot() {
        let alpha = c(0.6, 0.0);
        let beta = c(0.0, 0.8);
        let msg = StateVector::message(alpha, beta).unwrap();
        let zero2 = StateVector::basis_state(2, 0).unwrap();
        let s = msg.tensor(&zero2).unwrap().apply_cnot(0, 1).unwrap();
        let mut expected = vec![ZERO; 8];
        expected[0b000] = alpha;
        expected[0b110] = beta;
        assert_state(&s, &expected);

        let joint = msg.tensor(&StateVector::bell_pair()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let after = joint.apply_cnot(0, 1).unwrap();
        let mut expected = vec![ZERO; 8];
        expected[0b000] = alpha * h;
        expected[0b011] = alpha * h;
        expected[0b110] = beta * h;
        expected[0b101] = beta * h;
        assert_state(&after, &expected);
        assert_eq!(after.apply_cnot(0, 1).unwrap(), joint);
        assert!(joint.apply_cnot(1, 1).is_err());
        assert!(joint.apply_cnot(0, 5).is_err());
    }

    #[test]
    fn projection_of_standard_protocol() {
        let alpha = c(0.6, 0.0);
        let beta = c(0.0, 0.8);
        let msg = StateVector::message(alpha, beta).unwrap();
        let s = msg
            .tensor(&StateVector::bell_pair())
            .unwrap()
            .apply_cnot(0, 1)
            .unwrap()
            .apply_1q(&GateId::H.matrix(), 0)
            .unwrap();
        let p00 = s.project_alice(Outcome::ALL[0]).unwrap();
        assert!((p00.probability - 0.25).abs() < EPS);
        assert_state(p00.bob_state.as_ref().unwrap(), &[alpha, beta]);
        let p11 = s.project_alice(Outcome::ALL[3]).unwrap();
        assert!((p11.probability - 0.25).abs() < EPS);
        assert_state(p11.bob_state.as_ref().unwrap(), &[-beta, alpha]);
        let total: f64 = Outcome::ALL
            .iter()
            .map(|o| s.project_alice(*o).unwrap().probability)
            .sum();
        assert!((total - 1.0).abs() < EPS);
        assert!(msg.project_alice(Outcome::ALL[0]).is_err());
    }

    #[test]
    fn empty_branch_is_flagged() {
        let s = StateVector::basis_state(3, 0).unwrap();
        let p = s.project_alice(Outcome::ALL[2]).unwrap();
        assert_eq!(p.probability, 0.0);
        assert!(p.bob_state.is_none());
    }

    /// g ⊗ I ⊗ I and friends as explicit 8×8 matrices.
    fn kron_embed(g: &ComplexMatrix2, qubit: usize) -> Vec<Vec<Complex>> {
        let mut out = vec![vec![ZERO; 8]; 8];
        for row in 0..8usize {
            for col in 0..8usize {
                let bits = |k: usize, q: usize| (k >> (2 - q)) & 1;
                let others_match = (0..3)
                    .filter(|&q| q != qubit)
                    .all(|q| bits(row, q) == bits(col, q));
                if others_match {
                    out[row][col] = g.get(bits(row, qubit), bits(col, qubit));
                }
            }
        }
        out
    }

    #[test]
    fn ordering_matches_kronecker_products() {
        let mut rng = rng_from_seed(21);
        for qubit in 0..3 {
            let g = random_unitary(&mut rng);
            let raw: Vec<Complex> = (0..8)
                .map(|k| c(k as f64 + 1.0, (k as f64) * 0.5 - 1.0))
                .collect();
            let s = StateVector::from_amplitudes(raw).unwrap();
            let got = s.apply_1q(&g, qubit).unwrap();
            let big = kron_embed(&g, qubit);
            let expected: Vec<Complex> = (0..8)
                .map(|r| (0..8).map(|k| big[r][k] * s.amplitude(k)).sum())
                .collect();
            assert_state(&got, &expected);
        }
    }

    fn arb_state3() -> impl Strategy<Value = StateVector> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8)
            .prop_filter_map("nonzero", |v| {
                StateVector::from_amplitudes(v.into_iter().map(|(r, i)| c(r, i)).collect()).ok()
            })
    }

    proptest! {
        #[test]
        fn gates_preserve_norm(s in arb_state3(), seed in any::<u64>(), qubit in 0usize..3, control in 0usize..3) {
            let mut rng = rng_from_seed(seed);
            let g = random_unitary(&mut rng);
            let after = s.apply_1q(&g, qubit).unwrap();
            prop_assert!((after.norm_sqr() - 1.0).abs() < EPS);
            let target = (control + 1) % 3;
            let after = after.apply_cnot(control, target).unwrap();
            prop_assert!((after.norm_sqr() - 1.0).abs() < EPS);
        }

        #[test]
        fn outcome_probabilities_are_complete(s in arb_state3()) {
            let total: f64 = Outcome::ALL.iter().map(|o| s.project_alice(*o).unwrap().probability).sum();
            prop_assert!((total - 1.0).abs() < EPS);
            for o in Outcome::ALL {
                if let Some(bob) = s.project_alice(o).unwrap().bob_state {
                    prop_assert!((bob.norm_sqr() - 1.0).abs() < EPS);
                }
            }
        }

        #[test]
        fn gate_application_is_linear(seed in any::<u64>(), qubit in 0usize..3) {
            let mut rng = rng_from_seed(seed);
            let g = random_unitary(&mut rng);
            let s1: Vec<Complex> = (0..4).flat_map(|_| random_qubit(&mut rng)).collect();
            let s2: Vec<Complex> = (0..4).flat_map(|_| random_qubit(&mut rng)).collect();
            let sum: Vec<Complex> = s1.iter().zip(&s2).map(|(a, b)| a + b).collect();
            let lhs = apply_1q_raw(&sum, 3, &g, qubit);
            let r1 = apply_1q_raw(&s1, 3, &g, qubit);
            let r2 = apply_1q_raw(&s2, 3, &g, qubit);
            for k in 0..8 {
                prop_assert!((lhs[k] - r1[k] - r2[k]).norm() < EPS);
            }
        }
    }

    #[test]
    fn outcome_parsing() {
        for o in Outcome::ALL {
            assert_eq!(o.to_string().parse::<Outcome>().unwrap(), o);
        }
        assert!("2".parse::<Outcome>().is_err());
        assert!(Outcome::new(2, 0).is_err());
        assert_eq!(Outcome::new(1, 0).unwrap().index(), 2);
    }
}
