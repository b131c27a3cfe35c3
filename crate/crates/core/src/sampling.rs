//! Seeded random draws of messages and unitaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qmath::{Complex, ComplexMatrix2};

pub type TrialRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-uniform qubit state `(α, β)`: two normal draws per amplitude,
/// normalized.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> [Complex; 2] {
    loop {
        let v = [normal_complex(rng), normal_complex(rng)];
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if norm > 1e-12 {
            return [v[0] / norm, v[1] / norm];
        }
    }
}

/// Haar-distributed 2×2 unitary via Gram–Schmidt on two Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix2 {
    loop {
        let a = [normal_complex(rng), normal_complex(rng)];
        let b = [normal_complex(rng), normal_complex(rng)];
        let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
        if na < 1e-12 {
            continue;
        }
        let a = [a[0] / na, a[1] / na];
        let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
        let b = [b[0] - overlap * a[0], b[1] - overlap * a[1]];
        let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
        if nb < 1e-12 {
            continue;
        }
        return ComplexMatrix2::from_columns(a, [b[0] / nb, b[1] / nb]);
    }
}
