//! Complex 2×2 arithmetic, the named gate alphabet and measurement-basis
//! transforms.
//!
//! Everything here is a pure function of its inputs. Comparisons that ignore
//! global phase go through [`equal_up_to_phase`].

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TeleportError};

/// Tolerance for every unitarity, equality and singularity check.
pub const EPS: f64 = 1e-9;

pub type Complex = Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);
pub(crate) const I_UNIT: Complex = Complex::new(0.0, 1.0);

/// `{ "re": .., "im": .. }` on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for JsonComplex {
    fn from(c: Complex) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<JsonComplex> for Complex {
    fn from(c: JsonComplex) -> Self {
        Complex::new(c.re, c.im)
    }
}

/// Serde adapter for sequences of complex numbers.
pub(crate) mod complex_vec {
    use super::{Complex, JsonComplex};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex], s: S) -> Result<S::Ok, S::Error> {
        let repr: Vec<JsonComplex> = v.iter().copied().map(JsonComplex::from).collect();
        repr.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex>, D::Error> {
        let repr = Vec::<JsonComplex>::deserialize(d)?;
        Ok(repr.into_iter().map(Complex::from).collect())
    }
}

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[JsonComplex; 2]; 2]", into = "[[JsonComplex; 2]; 2]")]
pub struct ComplexMatrix2 {
    pub entries: [[Complex; 2]; 2],
}

impl From<[[JsonComplex; 2]; 2]> for ComplexMatrix2 {
    fn from(e: [[JsonComplex; 2]; 2]) -> Self {
        Self::new(e[0][0].into(), e[0][1].into(), e[1][0].into(), e[1][1].into())
    }
}

impl From<ComplexMatrix2> for [[JsonComplex; 2]; 2] {
    fn from(m: ComplexMatrix2) -> Self {
        m.entries.map(|row| row.map(JsonComplex::from))
    }
}

impl ComplexMatrix2 {
    pub const fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Self {
            entries: [[a, b], [c, d]],
        }
    }

    /// Builds a matrix from real entries.
    pub const fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(
            Complex::new(a, 0.0),
            Complex::new(b, 0.0),
            Complex::new(c, 0.0),
            Complex::new(d, 0.0),
        )
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    /// Matrix whose columns are `first` and `second`.
    pub fn from_columns(first: [Complex; 2], second: [Complex; 2]) -> Self {
        Self::new(first[0], second[0], first[1], second[1])
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.entries[row][col]
    }

    pub fn column(&self, col: usize) -> [Complex; 2] {
        [self.entries[0][col], self.entries[1][col]]
    }

    pub fn mat_mul(&self, other: &Self) -> Self {
        let a = &self.entries;
        let b = &other.entries;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn scale(&self, k: Complex) -> Self {
        Self {
            entries: self.entries.map(|row| row.map(|z| z * k)),
        }
    }

    pub fn dagger(&self) -> Self {
        let e = &self.entries;
        Self::new(e[0][0].conj(), e[1][0].conj(), e[0][1].conj(), e[1][1].conj())
    }

    pub fn det(&self) -> Complex {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn trace(&self) -> Complex {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Adjugate inverse. Fails with [`TeleportError::Singular`] when
    /// `|det| <= EPS`.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() <= EPS {
            return Err(TeleportError::Singular(det.norm()));
        }
        let e = &self.entries;
        let inv_det = det.inv();
        Ok(Self::new(e[1][1], -e[0][1], -e[1][0], e[0][0]).scale(inv_det))
    }

    pub fn apply(&self, v: [Complex; 2]) -> [Complex; 2] {
        let e = &self.entries;
        [
            e[0][0] * v[0] + e[0][1] * v[1],
            e[1][0] * v[0] + e[1][1] * v[1],
        ]
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.entries[r][c] - other.entries[r][c]).norm());
            }
        }
        worst
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn is_unitary(&self) -> bool {
        self.mat_mul(&self.dagger())
            .max_abs_diff(&Self::identity())
            <= EPS
    }

    pub fn ensure_unitary(self) -> Result<Self> {
        if self.is_unitary() {
            Ok(self)
        } else {
            Err(TeleportError::NonUnitary)
        }
    }
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn mul(self, rhs: Self) -> Self {
        self.mat_mul(&rhs)
    }
}

impl Mul for &ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn mul(self, rhs: Self) -> ComplexMatrix2 {
        self.mat_mul(rhs)
    }
}

impl fmt::Display for ComplexMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.entries;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            fmt_complex(e[0][0]),
            fmt_complex(e[0][1]),
            fmt_complex(e[1][0]),
            fmt_complex(e[1][1])
        )
    }
}

pub fn mat_mul(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix2 {
    a.mat_mul(b)
}

pub fn dagger(a: &ComplexMatrix2) -> ComplexMatrix2 {
    a.dagger()
}

pub fn det2(a: &ComplexMatrix2) -> Complex {
    a.det()
}

pub fn inverse2(a: &ComplexMatrix2) -> Result<ComplexMatrix2> {
    a.inverse()
}

/// True iff `a = e^{iθ} b` for unitaries `a`, `b`, tested as
/// `|tr(a†b)| >= 2 - EPS`.
pub fn equal_up_to_phase(a: &ComplexMatrix2, b: &ComplexMatrix2) -> bool {
    a.dagger().mat_mul(b).trace().norm() >= 2.0 - EPS
}

/// Four-decimal rendering used in text output, e.g. `0.7071-0.7071i`.
pub fn fmt_complex(z: Complex) -> String {
    let clean = |x: f64| if x.abs() < 5e-5 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re == 0.0, im == 0.0) {
        (true, true) => "0".to_string(),
        (false, true) => format!("{re:.4}"),
        (true, false) => format!("{im:.4}i"),
        (false, false) => format!("{re:.4}{im:+.4}i"),
    }
}

/// Parses `"a+bi"` style complex literals: `1`, `0.5i`, `-1-1i`, `i`, `-i`,
/// `1e-3+2.5i`.
pub fn parse_complex(text: &str) -> Result<Complex> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || TeleportError::Parse(format!("invalid complex number {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let bytes = s.as_bytes();
    // Split at the last sign that is neither leading nor an exponent sign.
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let parse_imag = |part: &str| -> Result<f64> {
        let coeff = part.strip_suffix('i').ok_or_else(bad)?;
        match coeff {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            c => c.parse::<f64>().map_err(|_| bad()),
        }
    };
    let value = match split {
        Some(i) => {
            let (re, im) = s.split_at(i);
            if !im.ends_with('i') {
                return Err(bad());
            }
            Complex::new(re.parse::<f64>().map_err(|_| bad())?, parse_imag(im)?)
        }
        None if s.ends_with('i') => Complex::new(0.0, parse_imag(&s)?),
        None => Complex::new(s.parse::<f64>().map_err(|_| bad())?, 0.0),
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// The single-qubit gate alphabet. Declaration order is the canonical
/// enumeration order used by the decomposer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateId {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdag,
    SqrtX,
    SqrtXdag,
}

impl GateId {
    pub const ALL: [GateId; 9] = [
        GateId::I,
        GateId::X,
        GateId::Y,
        GateId::Z,
        GateId::H,
        GateId::S,
        GateId::Sdag,
        GateId::SqrtX,
        GateId::SqrtXdag,
    ];

    pub fn matrix(self) -> ComplexMatrix2 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = Complex::new(0.5, 0.5);
        let m = Complex::new(0.5, -0.5);
        match self {
            GateId::I => ComplexMatrix2::identity(),
            GateId::X => ComplexMatrix2::real(0.0, 1.0, 1.0, 0.0),
            GateId::Y => ComplexMatrix2::new(ZERO, -I_UNIT, I_UNIT, ZERO),
            GateId::Z => ComplexMatrix2::real(1.0, 0.0, 0.0, -1.0),
            GateId::H => ComplexMatrix2::real(h, h, h, -h),
            GateId::S => ComplexMatrix2::new(ONE, ZERO, ZERO, I_UNIT),
            GateId::Sdag => ComplexMatrix2::new(ONE, ZERO, ZERO, -I_UNIT),
            GateId::SqrtX => ComplexMatrix2::new(p, m, m, p),
            GateId::SqrtXdag => ComplexMatrix2::new(m, p, p, m),
        }
    }

    /// ASCII name, also accepted by [`FromStr`].
    pub fn name(self) -> &'static str {
        match self {
            GateId::I => "I",
            GateId::X => "X",
            GateId::Y => "Y",
            GateId::Z => "Z",
            GateId::H => "H",
            GateId::S => "S",
            GateId::Sdag => "Sdag",
            GateId::SqrtX => "SqrtX",
            GateId::SqrtXdag => "SqrtXdag",
        }
    }

    /// Typographic name as used in the literature (`S†`, `√X†`).
    pub fn symbol(self) -> &'static str {
        match self {
            GateId::Sdag => "S†",
            GateId::SqrtX => "√X",
            GateId::SqrtXdag => "√X†",
            g => g.name(),
        }
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateId {
    type Err = TeleportError;

    fn from_str(s: &str) -> Result<Self> {
        GateId::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s) || g.symbol() == s)
            .ok_or_else(|| TeleportError::Parse(format!("unknown gate {s:?}")))
    }
}

/// Basis in which a single qubit is measured. The associated transform maps
/// the basis onto `{|0⟩, |1⟩}` ahead of a Z readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BasisId {
    Z,
    X,
    Y,
    MinusY,
    Arbitrary(ComplexMatrix2),
}

impl BasisId {
    pub const NAMED: [BasisId; 4] = [BasisId::Z, BasisId::X, BasisId::Y, BasisId::MinusY];

    /// Z → I, X → H, Y → H·S†, −Y → H·S (S or S† acts first), arbitrary
    /// matrices are returned after a unitarity check.
    pub fn transform(&self) -> Result<ComplexMatrix2> {
        Ok(match self {
            BasisId::Z => ComplexMatrix2::identity(),
            BasisId::X => GateId::H.matrix(),
            BasisId::Y => GateId::H.matrix() * GateId::Sdag.matrix(),
            BasisId::MinusY => GateId::H.matrix() * GateId::S.matrix(),
            BasisId::Arbitrary(u) => u.ensure_unitary()?,
        })
    }
}

pub fn basis_transform(b: &BasisId) -> Result<ComplexMatrix2> {
    b.transform()
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisId::Z => f.write_str("Z"),
            BasisId::X => f.write_str("X"),
            BasisId::Y => f.write_str("Y"),
            BasisId::MinusY => f.write_str("-Y"),
            BasisId::Arbitrary(u) => {
                let e = &u.entries;
                write!(f, "arb:[{},{},{},{}]", e[0][0], e[0][1], e[1][0], e[1][1])
            }
        }
    }
}

impl FromStr for BasisId {
    type Err = TeleportError;

    /// `Z`, `X`, `Y`, `-Y`, or `arb:[x11,x12,x21,x22]` with complex entries.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_uppercase().as_str() {
            "Z" => return Ok(BasisId::Z),
            "X" => return Ok(BasisId::X),
            "Y" => return Ok(BasisId::Y),
            "-Y" | "MINUSY" => return Ok(BasisId::MinusY),
            _ => {}
        }
        let body = t
            .strip_prefix("arb:")
            .and_then(|r| r.trim().strip_prefix('['))
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| TeleportError::Parse(format!("unknown basis {s:?}")))?;
        let parts = body
            .split(',')
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()?;
        let [a, b, c, d] = parts[..] else {
            return Err(TeleportError::Parse(format!(
                "arbitrary basis needs 4 entries, got {}",
                parts.len()
            )));
        };
        Ok(BasisId::Arbitrary(ComplexMatrix2::new(a, b, c, d)))
    }
}
