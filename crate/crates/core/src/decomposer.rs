//! Names single-qubit unitaries as short products over the gate alphabet,
//! up to global phase.
//!
//! A sequence `[H, S]` means the matrix product `H·S`: `S` acts on the state
//! first. The search walks sequences breadth-first in canonical order
//! (shorter first, then lexicographic in [`GateId`] declaration order) and
//! keeps only the first sequence reaching each phase class, which is enough
//! because the alphabet generates a finite group.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeleportError};
use crate::qmath::{equal_up_to_phase, ComplexMatrix2, GateId};

/// Default search depth.
pub const MAX_LEN: usize = 4;

/// Entries below this magnitude are skipped when fixing the phase of a
/// fingerprint.
const PIVOT_THRESHOLD: f64 = 1e-6;
const FINGERPRINT_SCALE: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateSequence(Vec<GateId>);

impl GateSequence {
    pub fn new(gates: Vec<GateId>) -> Self {
        Self(gates)
    }

    pub fn gates(&self) -> &[GateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Left-to-right matrix product; the empty sequence is the identity.
    pub fn compose(&self) -> ComplexMatrix2 {
        self.0
            .iter()
            .fold(ComplexMatrix2::identity(), |acc, g| acc * g.matrix())
    }

    /// Typographic rendering such as `HS†YX` or `√X†Y`.
    pub fn symbols(&self) -> String {
        self.0.iter().map(|g| g.symbol()).collect()
    }
}

pub fn compose(seq: &GateSequence) -> ComplexMatrix2 {
    seq.compose()
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            f.write_str(g.name())?;
        }
        Ok(())
    }
}

impl FromStr for GateSequence {
    type Err = TeleportError;

    /// Accepts concatenated names in either spelling (`HSdagYX`, `HS†YX`,
    /// `SqrtXdag Y X`, `√X†YX`); whitespace, `·` and `*` are ignored.
    fn from_str(s: &str) -> Result<Self> {
        const TOKENS: [(&str, GateId); 12] = [
            ("SqrtXdag", GateId::SqrtXdag),
            ("SqrtX", GateId::SqrtX),
            ("Sdag", GateId::Sdag),
            ("√X†", GateId::SqrtXdag),
            ("√X", GateId::SqrtX),
            ("S†", GateId::Sdag),
            ("I", GateId::I),
            ("X", GateId::X),
            ("Y", GateId::Y),
            ("Z", GateId::Z),
            ("H", GateId::H),
            ("S", GateId::S),
        ];
        let mut rest = s.trim();
        let mut gates = Vec::new();
        while !rest.is_empty() {
            rest = rest.trim_start_matches(|c: char| c.is_whitespace() || c == '·' || c == '*');
            if rest.is_empty() {
                break;
            }
            let (tok, g) = TOKENS
                .iter()
                .filter(|(t, _)| rest.starts_with(t))
                .max_by_key(|(t, _)| t.len())
                .ok_or_else(|| TeleportError::Parse(format!("cannot parse gate sequence {s:?}")))?;
            gates.push(*g);
            rest = &rest[tok.len()..];
        }
        if gates.is_empty() {
            return Err(TeleportError::Parse("empty gate sequence".into()));
        }
        Ok(GateSequence(gates))
    }
}

/// Phase-canonical key: divide by the phase of the first non-negligible
/// entry, then round to 12 decimals.
fn fingerprint(m: &ComplexMatrix2) -> [i64; 8] {
    let flat = [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)];
    let pivot = flat
        .iter()
        .find(|z| z.norm() > PIVOT_THRESHOLD)
        .copied()
        .unwrap_or(crate::qmath::ONE);
    let unphase = pivot.conj() / pivot.norm();
    let mut key = [0i64; 8];
    for (k, z) in flat.iter().enumerate() {
        let w = z * unphase;
        key[2 * k] = (w.re * FINGERPRINT_SCALE).round() as i64;
        key[2 * k + 1] = (w.im * FINGERPRINT_SCALE).round() as i64;
    }
    key
}

/// First sequence of at most `max_len` gates (canonical order) whose
/// product equals `u` up to phase.
pub fn decompose(u: &ComplexMatrix2, max_len: usize) -> Result<GateSequence> {
    if !u.is_unitary() {
        return Err(TeleportError::NonUnitary);
    }
    let mut seen = HashSet::new();
    let mut frontier: Vec<(Vec<GateId>, ComplexMatrix2)> = Vec::new();
    for g in GateId::ALL {
        let m = g.matrix();
        if !seen.insert(fingerprint(&m)) {
            continue;
        }
        if equal_up_to_phase(&m, u) {
            return Ok(GateSequence(vec![g]));
        }
        frontier.push((vec![g], m));
    }
    for _ in 1..max_len {
        let mut next = Vec::new();
        for (seq, m) in &frontier {
            for g in GateId::ALL.into_iter().filter(|&g| g != GateId::I) {
                let product = *m * g.matrix();
                if !seen.insert(fingerprint(&product)) {
                    continue;
                }
                let mut extended = seq.clone();
                extended.push(g);
                if equal_up_to_phase(&product, u) {
                    return Ok(GateSequence(extended));
                }
                next.push((extended, product));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Err(TeleportError::NotFound(max_len))
}
