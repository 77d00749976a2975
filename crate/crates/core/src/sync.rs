//! Algebraic synchronization tests.
//!
//! Two generators `i`, `j` are synchronized when equal initial angles and
//! velocities keep both the angles and the generator-bus voltages equal for
//! all time. For a partition, *strong* synchronization asks this of every
//! within-cluster pair, while *weak* synchronization only asks that
//! cluster-uniform initial states stay cluster-uniform.
//!
//! Everything here is a tolerance test on floating-point data. Scalar
//! comparisons use `|a - b| <= tol * max(1, |a|, |b|)`; vector and matrix
//! comparisons scale `tol` by `max(1, max-abs-entry)` of the operand.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::aggregation::build_p;
use crate::error::{Error, Result};
use crate::kron::KronSystem;
use crate::network::PowerNetwork;
use crate::partition::Partition;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A condition of the characterization fails: the verdict is negative.
    Condition,
    /// A standing hypothesis of the characterization fails, so no claim is
    /// made about the dynamical property.
    Hypothesis,
}

/// One failed condition. `indices` are zero-based generator indices; the
/// `Gamma` symmetry condition lists `[i, j, r, c]` with `(r, c)` the worst
/// entry. For the cluster-invariance condition of weak synchronization they
/// are `[cluster, column cluster]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub condition: String,
    pub indices: Vec<usize>,
    pub residual: f64,
}

impl Violation {
    fn condition(condition: impl Into<String>, indices: Vec<usize>, residual: f64) -> Self {
        Self {
            kind: ViolationKind::Condition,
            condition: condition.into(),
            indices,
            residual,
        }
    }
}

/// Which characterization produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// General pair test without assuming equal inertia.
    ParameterRatios,
    /// Two-generator system with equal inertia: equal `D`, `f`, `E` suffice.
    EqualParameters,
    /// Equal inertia and at least three generators: invariance of the
    /// parameters and `Gamma` under swapping the pair.
    PermutationSymmetry,
    /// Strong synchronization whose pairs were decided by different tests.
    Pairwise,
    /// Single cluster with uniform parameters.
    UniformCluster,
    /// Weak synchronization: uniform reactance per cluster and an
    /// equitable coupling matrix.
    EquitablePartition,
    /// Nothing to check (single generator or all-singleton partition).
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncReport {
    pub verdict: bool,
    pub criterion: Criterion,
    pub violations: Vec<Violation>,
}

impl SyncReport {
    fn new(criterion: Criterion, violations: Vec<Violation>) -> Self {
        Self {
            verdict: violations.is_empty(),
            criterion,
            violations,
        }
    }

    pub fn hypothesis_failed(&self) -> bool {
        self.violations
            .iter()
            .any(|v| v.kind == ViolationKind::Hypothesis)
    }
}

fn scale(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(1.0, |m, v| m.max(v.abs()))
}

fn scalar_residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / scale([a, b])
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= n || j >= n || i == j {
        Err(Error::BadIndex { i, j, n })
    } else {
        Ok(())
    }
}

fn check_partition(part: &Partition, n: usize) -> Result<()> {
    if part.len() != n {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} generators, network has {n}",
            part.len()
        )));
    }
    Ok(())
}

/// `x_i = x_j` within `tol * max(1, ||x||_inf)`.
pub fn in_x_ij(x: &[f64], i: usize, j: usize, tol: f64) -> Result<bool> {
    check_pair(x.len(), i, j)?;
    Ok((x[i] - x[j]).abs() <= tol * scale(x.iter().copied()))
}

/// Largest entry of `|A Pi_ij - Pi_ij A|` and where it occurs.
pub fn s_ij_residual(a: &DMatrix<f64>, i: usize, j: usize) -> Result<(f64, (usize, usize))> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "square matrix",
            expected: n,
            got: a.ncols(),
        });
    }
    check_pair(n, i, j)?;
    let swap = |k: usize| {
        if k == i {
            j
        } else if k == j {
            i
        } else {
            k
        }
    };
    let mut worst = (0.0, (i, j));
    // (A Pi)[r, c] = A[r, swap(c)], (Pi A)[r, c] = A[swap(r), c]. Only rows
    // and columns i, j can differ.
    for r in 0..n {
        for c in [i, j] {
            for (rr, cc) in [(r, c), (c, r)] {
                let d = (a[(rr, swap(cc))] - a[(swap(rr), cc)]).abs();
                if d > worst.0 {
                    worst = (d, (rr, cc));
                }
            }
        }
    }
    Ok(worst)
}

/// `A Pi_ij = Pi_ij A` within `tol * max(1, max|A|)`.
pub fn in_s_ij(a: &DMatrix<f64>, i: usize, j: usize, tol: f64) -> Result<bool> {
    let (res, _) = s_ij_residual(a, i, j)?;
    Ok(res <= tol * scale(a.iter().copied()))
}

/// Entrywise test for symmetric `A`: `a_ii = a_jj` and `a_ik = a_jk` for all
/// `k != i, j`. Only meaningful when `A` is symmetric.
pub fn in_s_ij_symmetric(a: &DMatrix<f64>, i: usize, j: usize, tol: f64) -> Result<bool> {
    let n = a.nrows();
    check_pair(n, i, j)?;
    let bound = tol * scale(a.iter().copied());
    if (a[(i, i)] - a[(j, j)]).abs() > bound {
        return Ok(false);
    }
    Ok((0..n)
        .filter(|&k| k != i && k != j)
        .all(|k| (a[(i, k)] - a[(j, k)]).abs() <= bound))
}

/// Constant on every cluster of `part`.
pub fn in_x_cl(x: &[f64], part: &Partition, tol: f64) -> bool {
    cluster_spreads(x, part, tol).is_empty()
}

/// Commutes with every within-cluster transposition.
pub fn in_s_cl(a: &DMatrix<f64>, part: &Partition, tol: f64) -> Result<bool> {
    for (i, j) in part.within_pairs() {
        if !in_s_ij(a, i, j, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Clusters on which `x` is not constant, with the extreme members and the
/// spread relative to `max(1, ||x||_inf)`.
fn cluster_spreads(x: &[f64], part: &Partition, tol: f64) -> Vec<(Vec<usize>, f64)> {
    let s = scale(x.iter().copied());
    part.clusters()
        .iter()
        .filter_map(|c| {
            let lo = *c.iter().min_by(|&&a, &&b| x[a].total_cmp(&x[b]))?;
            let hi = *c.iter().max_by(|&&a, &&b| x[a].total_cmp(&x[b]))?;
            let spread = x[hi] - x[lo];
            (spread > tol * s).then(|| (vec![lo.min(hi), lo.max(hi)], spread / s))
        })
        .collect()
}

fn spread_violations(
    x: &[f64],
    part: &Partition,
    tol: f64,
    kind: ViolationKind,
    condition: &str,
) -> Vec<Violation> {
    cluster_spreads(x, part, tol)
        .into_iter()
        .map(|(indices, residual)| Violation {
            kind,
            condition: condition.to_string(),
            indices,
            residual,
        })
        .collect()
}

/// Pair test valid for arbitrary inertia. Checks, with `g = Gamma`,
///
/// * `D_i / M_i = D_j / M_j` and `f_i / M_i = f_j / M_j`,
/// * `E_i g_ik / M_i = E_j g_jk / M_j` and `chi_i g_ik = chi_j g_jk` for `k != i, j`,
/// * `chi_i (E_i g_ii + E_j g_ij) = chi_j (E_i g_ji + E_j g_jj)`.
pub fn pair_sync_general(
    net: &PowerNetwork,
    ks: &KronSystem,
    i: usize,
    j: usize,
    tol: f64,
) -> Result<SyncReport> {
    let n = net.generators();
    check_pair(n, i, j)?;
    let (m, d, f, e, chi) = (
        net.inertia(),
        net.damping(),
        net.power(),
        net.emf(),
        net.gen_reactance(),
    );
    let g = &ks.gamma;
    let mut violations = Vec::new();
    let mut check = |name: &str, a: f64, b: f64, indices: Vec<usize>| {
        let r = scalar_residual(a, b);
        if r > tol {
            violations.push(Violation::condition(name, indices, r));
        }
    };

    check("D/M ratio", d[i] / m[i], d[j] / m[j], vec![i, j]);
    check("f/M ratio", f[i] / m[i], f[j] / m[j], vec![i, j]);
    for k in (0..n).filter(|&k| k != i && k != j) {
        check(
            "E*Gamma/M coupling",
            e[i] * g[(i, k)] / m[i],
            e[j] * g[(j, k)] / m[j],
            vec![i, j, k],
        );
    }
    for k in (0..n).filter(|&k| k != i && k != j) {
        check(
            "chi*Gamma coupling",
            chi[i] * g[(i, k)],
            chi[j] * g[(j, k)],
            vec![i, j, k],
        );
    }
    check(
        "chi*E*Gamma self-coupling",
        chi[i] * (e[i] * g[(i, i)] + e[j] * g[(i, j)]),
        chi[j] * (e[i] * g[(j, i)] + e[j] * g[(j, j)]),
        vec![i, j],
    );
    Ok(SyncReport::new(Criterion::ParameterRatios, violations))
}

/// Pair test for equal inertia, falling back to [`pair_sync_general`] when
/// `M_i != M_j`.
pub fn pair_sync(
    net: &PowerNetwork,
    ks: &KronSystem,
    i: usize,
    j: usize,
    tol: f64,
) -> Result<SyncReport> {
    let n = net.generators();
    check_pair(n, i, j)?;
    if !in_x_ij(net.inertia(), i, j, tol)? {
        return pair_sync_general(net, ks, i, j, tol);
    }

    let mut violations = Vec::new();
    for (name, values) in [
        ("D not in S_ij", net.damping()),
        ("f not in X_ij", net.power()),
        ("E not in X_ij", net.emf()),
    ] {
        if !in_x_ij(values, i, j, tol)? {
            let r = (values[i] - values[j]).abs() / scale(values.iter().copied());
            violations.push(Violation::condition(name, vec![i, j], r));
        }
    }
    if n == 2 {
        return Ok(SyncReport::new(Criterion::EqualParameters, violations));
    }

    let (res, (r, c)) = s_ij_residual(&ks.gamma, i, j)?;
    let s = scale(ks.gamma.iter().copied());
    if res > tol * s {
        violations.push(Violation::condition(
            "Gamma not S_ij-symmetric",
            vec![i, j, r, c],
            res / s,
        ));
    }
    Ok(SyncReport::new(Criterion::PermutationSymmetry, violations))
}

/// Every pair of generators that [`pair_sync`] reports synchronized.
pub fn synchronized_pairs(
    net: &PowerNetwork,
    ks: &KronSystem,
    tol: f64,
) -> Result<Vec<(usize, usize)>> {
    let n = net.generators();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if pair_sync(net, ks, i, j, tol)?.verdict {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

/// Strong synchronization: every within-cluster pair synchronized.
///
/// With equal inertia per cluster and `n >= 3` this is `D in S_cl`,
/// `f, E in X_cl` and `Gamma in S_cl`.
pub fn strong_sync(
    net: &PowerNetwork,
    ks: &KronSystem,
    part: &Partition,
    tol: f64,
) -> Result<SyncReport> {
    check_partition(part, net.generators())?;
    let mut criterion = None;
    let mut violations = Vec::new();
    for (i, j) in part.within_pairs() {
        let report = pair_sync(net, ks, i, j, tol)?;
        criterion = match criterion {
            None => Some(report.criterion),
            Some(c) if c == report.criterion => Some(c),
            Some(_) => Some(Criterion::Pairwise),
        };
        violations.extend(report.violations);
    }
    Ok(SyncReport::new(
        criterion.unwrap_or(Criterion::Trivial),
        violations,
    ))
}

/// `Gamma P` for the aggregation matrix of `part`.
pub fn gamma_p(ks: &KronSystem, part: &Partition) -> DMatrix<f64> {
    &ks.gamma * build_p(part).p
}

/// Weak synchronization.
///
/// Requires `M, D` constant and `f, E` constant on each cluster; failures are
/// reported as [`ViolationKind::Hypothesis`]. For a single cluster the
/// hypotheses suffice. Otherwise the reactances `chi` must be constant per
/// cluster and `Gamma P` must have rows constant within every cluster, i.e.
/// the partition is equitable for `Gamma`.
pub fn weak_sync(
    net: &PowerNetwork,
    ks: &KronSystem,
    part: &Partition,
    tol: f64,
) -> Result<SyncReport> {
    check_partition(part, net.generators())?;
    if part.is_singletons() {
        return Ok(SyncReport::new(Criterion::Trivial, Vec::new()));
    }

    let mut violations = Vec::new();
    for (name, values) in [
        ("M not in S_cl", net.inertia()),
        ("D not in S_cl", net.damping()),
        ("f not in X_cl", net.power()),
        ("E not in X_cl", net.emf()),
    ] {
        violations.extend(spread_violations(
            values,
            part,
            tol,
            ViolationKind::Hypothesis,
            name,
        ));
    }
    if part.num_clusters() == 1 {
        return Ok(SyncReport::new(Criterion::UniformCluster, violations));
    }

    violations.extend(spread_violations(
        net.gen_reactance(),
        part,
        tol,
        ViolationKind::Condition,
        "L_D not in S_cl",
    ));
    let gp = gamma_p(ks, part);
    let s = scale(gp.iter().copied());
    for (l, cluster) in part.clusters().iter().enumerate() {
        for l2 in 0..part.num_clusters() {
            let column: Vec<f64> = cluster.iter().map(|&i| gp[(i, l2)]).collect();
            let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
            if hi - lo > tol * s {
                violations.push(Violation::condition(
                    "X_cl not Gamma-invariant",
                    vec![l, l2],
                    (hi - lo) / s,
                ));
            }
        }
    }
    Ok(SyncReport::new(Criterion::EquitablePartition, violations))
}

/// Splits each cluster into groups whose signatures agree within `bound` in
/// the max norm. Members join the first group whose founding member matches.
fn split_by<F>(part: &Partition, bound: f64, signature: F) -> Partition
where
    F: Fn(usize) -> Vec<f64>,
{
    let mut clusters = Vec::new();
    for cluster in part.clusters() {
        let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
        for &i in cluster {
            let sig = signature(i);
            let found = groups
                .iter_mut()
                .find(|(rep, _)| rep.iter().zip(&sig).all(|(a, b)| (a - b).abs() <= bound));
            match found {
                Some((_, members)) => members.push(i),
                None => groups.push((sig, vec![i])),
            }
        }
        clusters.extend(groups.into_iter().map(|(_, members)| members));
    }
    Partition::new(clusters, part.len())
        .expect("splitting keeps a partition")
        .canonical()
}

/// Coarsest partition refining `seed` that is constant on the generator
/// parameters `(M, D, f, E, chi)` and equitable for `Gamma`: within each
/// cluster, the row sums of `Gamma` over every cluster agree.
///
/// Weighted color refinement; clusters are returned in ascending order of
/// their smallest member.
pub fn coarsest_equitable_refinement(
    ks: &KronSystem,
    net: &PowerNetwork,
    seed: &Partition,
    tol: f64,
) -> Result<Partition> {
    let n = net.generators();
    check_partition(seed, n)?;
    if ks.generators() != n {
        return Err(Error::DimensionMismatch {
            what: "Kron system",
            expected: n,
            got: ks.generators(),
        });
    }

    let mut part = seed.canonical();
    for values in [
        net.inertia(),
        net.damping(),
        net.power(),
        net.emf(),
        net.gen_reactance(),
    ] {
        let bound = tol * scale(values.iter().copied());
        part = split_by(&part, bound, |i| vec![values[i]]);
    }

    let bound = tol * scale(ks.gamma.iter().copied());
    loop {
        let current = part.clone();
        let next = split_by(&current, bound, |i| {
            current
                .clusters()
                .iter()
                .map(|c| c.iter().map(|&k| ks.gamma[(i, k)]).sum())
                .collect()
        });
        if next.num_clusters() == current.num_clusters() {
            return Ok(next);
        }
        part = next;
    }
}
