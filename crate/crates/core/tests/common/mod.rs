#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use swingsync::fixtures::UNIT_GENERATOR;
use swingsync::{Generator, Line, Partition, PowerNetwork};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_generator(rng: &mut StdRng) -> Generator {
    Generator {
        inertia: rng.random_range(0.5..3.0),
        damping: rng.random_range(0.0..2.0),
        power: rng.random_range(-1.0..1.0),
        emf: rng.random_range(0.8..1.2),
        reactance: rng.random_range(0.2..2.0),
    }
}

/// Random spanning tree over `buses` plus a few extra lines.
pub fn random_lines(rng: &mut StdRng, buses: usize) -> Vec<Line> {
    let mut order: Vec<usize> = (0..buses).collect();
    order.shuffle(rng);
    let mut lines = Vec::new();
    let mut used = std::collections::HashSet::new();
    for k in 1..buses {
        let a = order[k];
        let b = order[rng.random_range(0..k)];
        used.insert((a.min(b), a.max(b)));
        lines.push(Line::new(a, b, rng.random_range(0.2..5.0)));
    }
    let extra = rng.random_range(0..=buses);
    for _ in 0..extra {
        let a = rng.random_range(0..buses);
        let b = rng.random_range(0..buses);
        if a != b && used.insert((a.min(b), a.max(b))) {
            lines.push(Line::new(a, b, rng.random_range(0.2..5.0)));
        }
    }
    lines
}

/// Random valid network with `1..=max_gen` generators and `0..=max_nongen`
/// non-generator buses.
pub fn random_network(rng: &mut StdRng, max_gen: usize, max_nongen: usize) -> PowerNetwork {
    let n = rng.random_range(1..=max_gen);
    let m = rng.random_range(0..=max_nongen);
    random_network_sized(rng, n, m)
}

/// Random valid network with exactly `n` generators and `m` non-generator
/// buses.
pub fn random_network_sized(rng: &mut StdRng, n: usize, m: usize) -> PowerNetwork {
    let gens: Vec<Generator> = (0..n).map(|_| random_generator(rng)).collect();
    let lines = random_lines(rng, n + m);
    PowerNetwork::new(&gens, m, lines).expect("random network is valid")
}

/// Random network with an extra generator that mirrors generator 0: same
/// parameters and the same lines. Swapping generator 0 and the twin (the
/// last generator) is then a symmetry of the network. With `skew_chi`, the
/// twin's generator reactance differs, which breaks the symmetry of `L_D`
/// only.
pub fn twin_network(
    rng: &mut StdRng,
    max_gen: usize,
    max_nongen: usize,
    uniform: bool,
    skew_chi: bool,
) -> PowerNetwork {
    let n0 = rng.random_range(2..max_gen.max(3));
    let m = rng.random_range(0..=max_nongen);
    let mut gens: Vec<Generator> = (0..n0)
        .map(|_| {
            if uniform {
                Generator {
                    reactance: 1.0,
                    ..UNIT_GENERATOR
                }
            } else {
                random_generator(rng)
            }
        })
        .collect();
    let base = random_lines(rng, n0 + m);
    let twin = n0;
    // Shift non-generator buses to make room for the twin's bus.
    let shift = |b: usize| if b >= n0 { b + 1 } else { b };
    let mut lines: Vec<Line> = base
        .iter()
        .map(|l| Line::new(shift(l.from), shift(l.to), l.reactance))
        .collect();
    for l in &base {
        if l.from == 0 || l.to == 0 {
            let other = shift(if l.from == 0 { l.to } else { l.from });
            lines.push(Line::new(twin, other, l.reactance));
        }
    }
    if rng.random_bool(0.5) {
        lines.push(Line::new(0, twin, rng.random_range(0.2..5.0)));
    }
    let mut g = gens[0];
    if skew_chi {
        g.reactance *= 1.7;
    }
    gens.push(g);
    PowerNetwork::new(&gens, m, lines).expect("twin network is valid")
}

/// All set partitions of `0..n`, via restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn rec(pos: usize, n: usize, labels: &mut Vec<usize>, max: usize, out: &mut Vec<Partition>) {
        if pos == n {
            out.push(Partition::from_labels(labels));
            return;
        }
        for l in 0..=max + 1 {
            labels.push(l);
            rec(pos + 1, n, labels, max.max(l), out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut labels = vec![0];
    rec(1, n, &mut labels, 0, &mut out);
    out
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// `Pi_ij` as an explicit permutation matrix.
pub fn transposition(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut p = DMatrix::identity(n, n);
    p.swap_rows(i, j);
    p
}

/// Random member of `S_ij`: `(A + Pi A Pi) / 2`.
pub fn random_s_ij(
    rng: &mut StdRng,
    n: usize,
    i: usize,
    j: usize,
    symmetric: bool,
) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    if symmetric {
        a = (&a + a.transpose()) * 0.5;
    }
    let pi = transposition(n, i, j);
    (&a + &pi * &a * &pi) * 0.5
}

/// Literal weak-synchronization test: hypotheses on `M, D, f, E`, then for
/// two or more clusters `chi` constant per cluster and
/// `Gamma P = P (P^T P)^{-1} P^T Gamma P`.
pub fn weak_sync_oracle(
    net: &PowerNetwork,
    gamma: &DMatrix<f64>,
    part: &Partition,
    tol: f64,
) -> bool {
    let constant = |v: &[f64]| {
        let s = v.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        part.clusters()
            .iter()
            .all(|c| c.iter().all(|&i| (v[i] - v[c[0]]).abs() <= tol * s))
    };
    if part.is_singletons() {
        return true;
    }
    let hypotheses = constant(net.inertia())
        && constant(net.damping())
        && constant(net.power())
        && constant(net.emf());
    if !hypotheses {
        return false;
    }
    if part.num_clusters() == 1 {
        return true;
    }
    if !constant(net.gen_reactance()) {
        return false;
    }
    let n = part.len();
    let mut p = DMatrix::zeros(n, part.num_clusters());
    for (i, &l) in part.labels().iter().enumerate() {
        p[(i, l)] = 1.0;
    }
    let ptp_inv = (p.transpose() * &p).try_inverse().unwrap();
    let gp = gamma * &p;
    let projected = &p * ptp_inv * p.transpose() * &gp;
    max_abs(&(&gp - projected)) <= tol * max_abs(&gp).max(1.0)
}

/// Brute-force equitability: row sums of `Gamma` over each cluster agree
/// within each cluster.
pub fn is_equitable(gamma: &DMatrix<f64>, part: &Partition, tol: f64) -> bool {
    let s = max_abs(gamma).max(1.0);
    part.clusters().iter().all(|c| {
        part.clusters().iter().all(|target| {
            let sums: Vec<f64> = c
                .iter()
                .map(|&i| target.iter().map(|&k| gamma[(i, k)]).sum())
                .collect();
            sums.iter().all(|x| (x - sums[0]).abs() <= tol * s)
        })
    })
}
