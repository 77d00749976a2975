//! The seven-bus two-hub reference network: five generators around two
//! non-generator hub buses, unit reactances and `M = D = I`, `f = 0`, `E = 1`.

use crate::network::{Generator, Line, PowerNetwork};

pub const UNIT_GENERATOR: Generator = Generator {
    inertia: 1.0,
    damping: 1.0,
    power: 0.0,
    emf: 1.0,
    reactance: 1.0,
};

/// Lines of the reference network with unit reactance (zero-based buses).
pub fn two_hub_lines() -> Vec<Line> {
    [(0, 5), (1, 5), (2, 3), (2, 6), (3, 6), (4, 6), (5, 6)]
        .into_iter()
        .map(|(a, b)| Line::new(a, b, 1.0))
        .collect()
}

pub fn two_hub_network() -> PowerNetwork {
    two_hub_with_generators(&[UNIT_GENERATOR; 5])
}

/// Reference topology with custom generator parameters.
///
/// Panics if `generators` does not describe a valid set of five generators.
pub fn two_hub_with_generators(generators: &[Generator]) -> PowerNetwork {
    PowerNetwork::new(generators, 2, two_hub_lines()).expect("reference network is valid")
}
