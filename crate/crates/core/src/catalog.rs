//! Restoration sets for the named basis pairs as they are conventionally
//! written. These are aliases for display and regression checks; the solver
//! never reads them.

use crate::decomposer::GateSequence;
use crate::protocol::BasisChoice;
use crate::qmath::BasisId;

use BasisId::{MinusY, Y, Z};

/// `(message basis, Alice basis, [r00, r01, r10, r11])`.
pub const NAMED_TABLES: [(BasisId, BasisId, [&str; 4]); 9] = [
    (Z, Z, ["I", "X", "Z", "ZX"]),
    (Y, Y, ["HS", "HSX", "HSY", "HSYX"]),
    (Y, Z, ["S†", "S†X", "S†Z", "S†ZX"]),
    (Z, Y, ["√X†", "√X†X", "√X†Y", "√X†YX"]),
    (MinusY, MinusY, ["HS†", "HS†X", "HS†Y", "HS†YX"]),
    (MinusY, Z, ["S", "SX", "SZ", "SZX"]),
    (Z, MinusY, ["√X", "√XX", "√XY", "√XYX"]),
    (MinusY, Y, ["ZHS", "ZHSX", "ZHSY", "ZHSYX"]),
    (Y, MinusY, ["YHS", "YHSX", "YHSY", "YHSYX"]),
];

pub fn named_pairs() -> impl Iterator<Item = BasisChoice> {
    NAMED_TABLES
        .iter()
        .map(|(m, a, _)| BasisChoice::new(*m, *a))
}

/// Conventional names for `bases`, if it is one of the catalogued pairs.
pub fn named_restorations(bases: &BasisChoice) -> Option<[GateSequence; 4]> {
    NAMED_TABLES
        .iter()
        .find(|(m, a, _)| *m == bases.msg && *a == bases.alice)
        .map(|(_, _, names)| names.map(|n| n.parse().expect("catalogue entries parse")))
}
