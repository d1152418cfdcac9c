//! Shipped example systems.

use crate::config::{System, SystemConfig};
use crate::substitution::{QubitSubstitution, SpinSystem};

pub const VIERDRACHEN: &str = include_str!("../fixtures/vierdrachen.json");
pub const TRIOMINO: &str = include_str!("../fixtures/triomino.json");
pub const PP_FACTOR: &str = include_str!("../fixtures/pp_factor.json");
pub const C4: &str = include_str!("../fixtures/c4.json");
pub const RUDIN_SHAPIRO: &str = include_str!("../fixtures/rudin_shapiro.json");
pub const GASKET: &str = include_str!("../fixtures/gasket.json");
pub const ABA_BAB: &str = include_str!("../fixtures/aba_bab.json");
pub const EVEN_DIGITS: &str = include_str!("../fixtures/bad.json");

/// `(name, json)` for every valid fixture.
pub const ALL: &[(&str, &str)] = &[
    ("vierdrachen", VIERDRACHEN),
    ("triomino", TRIOMINO),
    ("pp_factor", PP_FACTOR),
    ("c4", C4),
    ("rudin_shapiro", RUDIN_SHAPIRO),
    ("gasket", GASKET),
    ("aba_bab", ABA_BAB),
];

pub fn config(json: &str) -> SystemConfig {
    SystemConfig::from_json(json).expect("shipped fixture parses")
}

fn spin(json: &str) -> SpinSystem {
    match config(json).build().expect("shipped fixture is valid") {
        System::Spin(s) => s,
        System::Qubit(_) => panic!("fixture is not a spin system"),
    }
}

fn qubit(json: &str) -> QubitSubstitution {
    config(json).build().expect("shipped fixture is valid").as_qubit().clone()
}

pub fn vierdrachen() -> SpinSystem {
    spin(VIERDRACHEN)
}

pub fn triomino() -> SpinSystem {
    spin(TRIOMINO)
}

pub fn pp_factor() -> SpinSystem {
    spin(PP_FACTOR)
}

pub fn c4() -> SpinSystem {
    spin(C4)
}

pub fn rudin_shapiro() -> SpinSystem {
    spin(RUDIN_SHAPIRO)
}

pub fn gasket() -> QubitSubstitution {
    qubit(GASKET)
}

pub fn aba_bab() -> QubitSubstitution {
    qubit(ABA_BAB)
}

/// Every shipped spin system.
pub fn spin_fixtures() -> Vec<SpinSystem> {
    vec![vierdrachen(), triomino(), pp_factor(), c4(), rudin_shapiro()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_build() {
        for (name, json) in ALL {
            assert!(config(json).build().is_ok(), "{name}");
        }
        assert!(config(EVEN_DIGITS).build().is_err());
    }
}
