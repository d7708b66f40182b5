//! Reference circuits shipped with the crate.

use crate::circuit::{parse_circuit, ParamCircuit};

pub const MZ1: &str = include_str!("../corpus/mz1.pc");
pub const MZ2: &str = include_str!("../corpus/mz2.pc");
pub const TWO_MODE_MIXING: &str = include_str!("../corpus/two_mode_mixing.pc");
pub const THREE_MODE_MIXING: &str = include_str!("../corpus/three_mode_mixing.pc");
pub const PHASE_SHIFTER: &str = include_str!("../corpus/phase_shifter.pc");

/// `(name, source)` for the four reference interferometers.
pub const TABLE: [(&str, &str); 4] =
    [("mz1", MZ1), ("mz2", MZ2), ("two_mode_mixing", TWO_MODE_MIXING), ("three_mode_mixing", THREE_MODE_MIXING)];

/// Every corpus circuit, including the single-mode phase shifter.
pub const ALL: [(&str, &str); 5] = [
    ("mz1", MZ1),
    ("mz2", MZ2),
    ("two_mode_mixing", TWO_MODE_MIXING),
    ("three_mode_mixing", THREE_MODE_MIXING),
    ("phase_shifter", PHASE_SHIFTER),
];

pub fn by_name(name: &str) -> Option<ParamCircuit> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, src)| parse_circuit(src).expect("corpus circuit parses"))
}

pub fn mz1() -> ParamCircuit {
    parse_circuit(MZ1).expect("corpus circuit parses")
}

pub fn mz2() -> ParamCircuit {
    parse_circuit(MZ2).expect("corpus circuit parses")
}

pub fn two_mode_mixing() -> ParamCircuit {
    parse_circuit(TWO_MODE_MIXING).expect("corpus circuit parses")
}

pub fn three_mode_mixing() -> ParamCircuit {
    parse_circuit(THREE_MODE_MIXING).expect("corpus circuit parses")
}

pub fn phase_shifter() -> ParamCircuit {
    parse_circuit(PHASE_SHIFTER).expect("corpus circuit parses")
}
