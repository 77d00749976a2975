//! Workload generators for the benchmarks.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use swingsync::{Generator, Line, Partition, PowerNetwork};

/// Connected random network with `n` generators and `m` non-generator
/// buses: a random tree plus about one extra line per bus.
pub fn random_network(seed: u64, n: usize, m: usize) -> PowerNetwork {
    let mut rng = StdRng::seed_from_u64(seed);
    let gens: Vec<Generator> = (0..n)
        .map(|_| Generator {
            inertia: rng.random_range(0.5..3.0),
            damping: rng.random_range(0.1..2.0),
            power: rng.random_range(-0.5..0.5),
            emf: rng.random_range(0.9..1.1),
            reactance: rng.random_range(0.2..2.0),
        })
        .collect();
    let buses = n + m;
    let mut seen = std::collections::HashSet::new();
    let mut lines = Vec::new();
    for b in 1..buses {
        let a = rng.random_range(0..b);
        seen.insert((a, b));
        lines.push(Line::new(a, b, rng.random_range(0.2..5.0)));
    }
    for _ in 0..buses {
        let a = rng.random_range(0..buses);
        let b = rng.random_range(0..buses);
        if a != b && seen.insert((a.min(b), a.max(b))) {
            lines.push(Line::new(a, b, rng.random_range(0.2..5.0)));
        }
    }
    PowerNetwork::new(&gens, m, lines).expect("generated network is valid")
}

/// Ring of `n` identical generators, each on its own bus, with a hub bus
/// joined to every generator bus. Highly symmetric, so refinement has to
/// keep everything together.
pub fn symmetric_ring(n: usize) -> PowerNetwork {
    let g = Generator {
        inertia: 1.0,
        damping: 1.0,
        power: 0.0,
        emf: 1.0,
        reactance: 1.0,
    };
    let mut lines: Vec<Line> = (0..n).map(|i| Line::new(i, (i + 1) % n, 1.0)).collect();
    lines.extend((0..n).map(|i| Line::new(i, n, 2.0)));
    PowerNetwork::new(&vec![g; n], 1, lines).expect("ring is valid")
}

/// Initial angles in `[-0.5, 0.5)`.
pub fn random_angles(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-0.5..0.5)).collect()
}

/// Partition of `0..n` into contiguous blocks of `size`.
pub fn blocks(n: usize, size: usize) -> Partition {
    let labels: Vec<usize> = (0..n).map(|i| i / size).collect();
    Partition::from_labels(&labels)
}
