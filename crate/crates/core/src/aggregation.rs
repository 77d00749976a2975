//! Aggregation-based reduction: generators in a cluster, together with their
//! buses, are merged into a single generator and bus. Non-generator buses are
//! kept as they are.
//!
//! With `P` the zero/one characteristic matrix of the partition the reduced
//! quantities are `M^ = P^T M P`, `D^ = P^T D P`, `f^ = P^T f`,
//! `L_D^ = P^T L_D P`, `L11^ = P^T L11 P`, `L12^ = P^T L12`, with `L22` kept,
//! and `E^` the cluster means of `E`. The reduced model is again a network of
//! the same kind, so it is returned as a [`PowerNetwork`].

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::{build_laplacian, Generator, Line, PowerNetwork};
use crate::partition::Partition;
use crate::simulator::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationMatrix {
    /// `n x n_hat` with `p[(i, l)] = 1` iff generator `i` is in cluster `l`.
    pub p: DMatrix<f64>,
    pub sizes: Vec<usize>,
    labels: Vec<usize>,
}

pub fn build_p(part: &Partition) -> AggregationMatrix {
    let n = part.len();
    let mut p = DMatrix::zeros(n, part.num_clusters());
    for (i, &l) in part.labels().iter().enumerate() {
        p[(i, l)] = 1.0;
    }
    AggregationMatrix {
        p,
        sizes: part.sizes(),
        labels: part.labels().to_vec(),
    }
}

impl AggregationMatrix {
    pub fn full_dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn reduced_dim(&self) -> usize {
        self.p.ncols()
    }

    /// `(P^T P)^{-1} P^T`, which maps a vector to its cluster means.
    pub fn projector(&self) -> DMatrix<f64> {
        let mut q = self.p.transpose();
        for (l, mut row) in q.row_iter_mut().enumerate() {
            row /= self.sizes[l] as f64;
        }
        q
    }

    /// Cluster means of `x`.
    pub fn project(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_dim("full vector", self.full_dim(), x.len())?;
        let mut out = DVector::zeros(self.reduced_dim());
        for (&l, &v) in self.labels.iter().zip(x) {
            out[l] += v;
        }
        for (o, &s) in out.iter_mut().zip(&self.sizes) {
            *o /= s as f64;
        }
        Ok(out)
    }

    /// `P x_hat`: copies each cluster value to its members.
    pub fn lift(&self, x_hat: &[f64]) -> Result<DVector<f64>> {
        check_dim("reduced vector", self.reduced_dim(), x_hat.len())?;
        Ok(DVector::from_iterator(
            self.full_dim(),
            self.labels.iter().map(|&l| x_hat[l]),
        ))
    }
}

fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

fn parallel(reactances: &[f64]) -> f64 {
    match reactances {
        [single] => *single,
        many => many.iter().map(|x| x.recip()).sum::<f64>().recip(),
    }
}

/// `P~^T L P~` with `P~ = blockdiag(P, I)`.
pub fn aggregated_laplacian(net: &PowerNetwork, part: &Partition) -> Result<DMatrix<f64>> {
    check_dim("partition", net.generators(), part.len())?;
    let agg = build_p(part);
    let (n, n_hat, m) = (net.generators(), part.num_clusters(), net.nongen_buses());
    let mut pt = DMatrix::zeros(n + m, n_hat + m);
    pt.view_mut((0, 0), (n, n_hat)).copy_from(&agg.p);
    pt.view_mut((n, n_hat), (m, m)).fill_with_identity();
    let l = build_laplacian(net).full;
    Ok(pt.transpose() * l * pt)
}

/// Reduced network for an arbitrary partition.
///
/// Cluster `l` becomes generator `l`; non-generator bus `n + k` becomes
/// `n_hat + k`. Reactances combine by the parallel rule, so clusters and
/// line bundles of size one keep their original values.
pub fn aggregate(net: &PowerNetwork, part: &Partition) -> Result<PowerNetwork> {
    let n = net.generators();
    if part.len() != n {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} generators, network has {n}",
            part.len()
        )));
    }
    let n_hat = part.num_clusters();

    let generators: Vec<Generator> = part
        .clusters()
        .iter()
        .map(|c| {
            let sum = |v: &[f64]| c.iter().map(|&i| v[i]).sum::<f64>();
            let chis: Vec<f64> = c.iter().map(|&i| net.gen_reactance()[i]).collect();
            Generator {
                inertia: sum(net.inertia()),
                damping: sum(net.damping()),
                power: sum(net.power()),
                emf: sum(net.emf()) / c.len() as f64,
                reactance: parallel(&chis),
            }
        })
        .collect();

    let relabel = |bus: usize| {
        if bus < n {
            part.labels()[bus]
        } else {
            bus - n + n_hat
        }
    };
    let mut bundles: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for line in net.lines() {
        let (a, b) = (relabel(line.from), relabel(line.to));
        if a != b {
            bundles
                .entry((a.min(b), a.max(b)))
                .or_default()
                .push(line.reactance);
        }
    }

    let reduced_l = aggregated_laplacian(net, part)?;
    for r in 0..reduced_l.nrows() {
        for c in 0..reduced_l.ncols() {
            if r != c && reduced_l[(r, c)] > 0.0 {
                return Err(Error::NonLaplacianResult(r, c, reduced_l[(r, c)]));
            }
        }
    }

    let lines = bundles
        .into_iter()
        .map(|((a, b), chis)| Line::new(a, b, parallel(&chis)))
        .collect();
    PowerNetwork::new(&generators, net.nongen_buses(), lines)
}

/// Cluster means of the initial angles and velocities.
pub fn project_initial(
    agg: &AggregationMatrix,
    delta0: &[f64],
    omega0: &[f64],
) -> Result<(DVector<f64>, DVector<f64>)> {
    Ok((agg.project(delta0)?, agg.project(omega0)?))
}

/// Lifts a reduced trajectory to the full generator dimension. Generator-bus
/// voltages are copied to every member bus; non-generator buses pass through.
pub fn lift(agg: &AggregationMatrix, reduced: &Trajectory) -> Result<Trajectory> {
    check_dim(
        "trajectory generators",
        agg.reduced_dim(),
        reduced.generators(),
    )?;
    let n_hat = agg.reduced_dim();
    let lift_all = |samples: &[DVector<f64>]| -> Result<Vec<DVector<f64>>> {
        samples.iter().map(|x| agg.lift(x.as_slice())).collect()
    };
    let lift_buses = |samples: &[DVector<f64>]| -> Result<Vec<DVector<f64>>> {
        samples
            .iter()
            .map(|x| {
                let gen = agg.lift(&x.as_slice()[..n_hat])?;
                Ok(DVector::from_iterator(
                    agg.full_dim() + x.len() - n_hat,
                    gen.iter().chain(&x.as_slice()[n_hat..]).copied(),
                ))
            })
            .collect()
    };
    let voltages = match &reduced.voltages {
        Some(v) => Some(crate::simulator::BusVoltages {
            amplitude: lift_buses(&v.amplitude)?,
            phase: lift_buses(&v.phase)?,
        }),
        None => None,
    };
    Ok(Trajectory {
        times: reduced.times.clone(),
        delta: lift_all(&reduced.delta)?,
        omega: lift_all(&reduced.omega)?,
        voltages,
    })
}
