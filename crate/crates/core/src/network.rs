//! Physical network description: generators, generator buses, non-generator
//! buses and lossless reactance lines.
//!
//! Buses are indexed from zero. Bus `i < n` is the generator bus of generator
//! `i`; buses `n..n + n_bar` carry no generator. Every [`PowerNetwork`] is
//! validated on construction, so downstream code may assume positive
//! parameters and a connected reactance graph.

use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-generator parameters of the classical machine model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// Inertia `M_i > 0`.
    pub inertia: f64,
    /// Damping `D_i >= 0`.
    pub damping: f64,
    /// Mechanical input power `f_i`.
    pub power: f64,
    /// Internal voltage amplitude `E_i > 0`, constant in time.
    pub emf: f64,
    /// Reactance between the generator and its bus, `chi_i > 0`.
    pub reactance: f64,
}

/// A lossless line between two buses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub reactance: f64,
}

impl Line {
    pub fn new(from: usize, to: usize, reactance: f64) -> Self {
        Self {
            from,
            to,
            reactance,
        }
    }

    /// Endpoints with the smaller index first.
    pub fn key(&self) -> (usize, usize) {
        (self.from.min(self.to), self.from.max(self.to))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerNetwork {
    inertia: Vec<f64>,
    damping: Vec<f64>,
    power: Vec<f64>,
    emf: Vec<f64>,
    gen_reactance: Vec<f64>,
    nongen_buses: usize,
    lines: Vec<Line>,
}

impl PowerNetwork {
    /// Builds and validates a network.
    pub fn new(generators: &[Generator], nongen_buses: usize, lines: Vec<Line>) -> Result<Self> {
        let net = Self {
            inertia: generators.iter().map(|g| g.inertia).collect(),
            damping: generators.iter().map(|g| g.damping).collect(),
            power: generators.iter().map(|g| g.power).collect(),
            emf: generators.iter().map(|g| g.emf).collect(),
            gen_reactance: generators.iter().map(|g| g.reactance).collect(),
            nongen_buses,
            lines,
        };
        net.validate()?;
        Ok(net)
    }

    /// Re-checks every structural invariant of the network.
    pub fn validate(&self) -> Result<()> {
        let n = self.generators();
        if n == 0 {
            return Err(Error::InvalidArgument("network has no generators".into()));
        }
        for (name, values) in [
            ("chi", &self.gen_reactance),
            ("M", &self.inertia),
            ("E", &self.emf),
        ] {
            for (index, &value) in values.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::NonpositiveParameter { name, index, value });
                }
            }
        }
        for (index, &value) in self.damping.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::NonpositiveParameter {
                    name: "D",
                    index,
                    value,
                });
            }
        }
        for (index, &value) in self.power.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonpositiveParameter {
                    name: "f",
                    index,
                    value,
                });
            }
        }

        let buses = self.buses();
        let mut seen = HashSet::with_capacity(self.lines.len());
        for (index, line) in self.lines.iter().enumerate() {
            if line.from >= buses || line.to >= buses || line.from == line.to {
                return Err(Error::BadBusIndex {
                    from: line.from,
                    to: line.to,
                    buses,
                });
            }
            if !(line.reactance.is_finite() && line.reactance > 0.0) {
                return Err(Error::NonpositiveParameter {
                    name: "line chi",
                    index,
                    value: line.reactance,
                });
            }
            let key = line.key();
            if !seen.insert(key) {
                return Err(Error::DuplicateLine(key.0, key.1));
            }
        }

        if let Some(bus) = self.unreachable_bus() {
            return Err(Error::DisconnectedNetwork { bus });
        }
        Ok(())
    }

    /// First bus not reachable from bus 0, if any.
    fn unreachable_bus(&self) -> Option<usize> {
        let buses = self.buses();
        let mut adjacency = vec![Vec::new(); buses];
        for line in &self.lines {
            adjacency[line.from].push(line.to);
            adjacency[line.to].push(line.from);
        }
        let mut visited = vec![false; buses];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        while let Some(bus) = queue.pop_front() {
            for &next in &adjacency[bus] {
                if !visited[next] {
                    visited[next] = true;
                    queue.push_back(next);
                }
            }
        }
        visited.iter().position(|v| !v)
    }

    /// Number of generators, `n`.
    pub fn generators(&self) -> usize {
        self.inertia.len()
    }

    /// Number of non-generator buses, `n_bar`.
    pub fn nongen_buses(&self) -> usize {
        self.nongen_buses
    }

    pub fn buses(&self) -> usize {
        self.generators() + self.nongen_buses
    }

    pub fn inertia(&self) -> &[f64] {
        &self.inertia
    }

    pub fn damping(&self) -> &[f64] {
        &self.damping
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn emf(&self) -> &[f64] {
        &self.emf
    }

    pub fn gen_reactance(&self) -> &[f64] {
        &self.gen_reactance
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn generator(&self, i: usize) -> Generator {
        Generator {
            inertia: self.inertia[i],
            damping: self.damping[i],
            power: self.power[i],
            emf: self.emf[i],
            reactance: self.gen_reactance[i],
        }
    }

    pub fn generator_list(&self) -> Vec<Generator> {
        (0..self.generators()).map(|i| self.generator(i)).collect()
    }

    /// Copy of the network with generator parameters replaced.
    pub fn with_generators(&self, generators: &[Generator]) -> Result<Self> {
        Self::new(generators, self.nongen_buses, self.lines.clone())
    }

    /// Diagonal of `L_D`, the generator-to-bus admittances `1/chi_i`.
    pub fn gen_admittance(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.generators(),
            self.gen_reactance.iter().map(|chi| chi.recip()),
        )
    }
}

/// The weighted Laplacian of the bus network, split into generator and
/// non-generator blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianBlocks {
    pub full: DMatrix<f64>,
    pub l11: DMatrix<f64>,
    pub l12: DMatrix<f64>,
    pub l22: DMatrix<f64>,
}

impl LaplacianBlocks {
    /// Splits an assembled Laplacian after the first `n` rows and columns.
    pub fn from_full(full: DMatrix<f64>, n: usize) -> Self {
        let total = full.nrows();
        let m = total - n;
        Self {
            l11: full.view((0, 0), (n, n)).into_owned(),
            l12: full.view((0, n), (n, m)).into_owned(),
            l22: full.view((n, n), (m, m)).into_owned(),
            full,
        }
    }

    pub fn generators(&self) -> usize {
        self.l11.nrows()
    }

    pub fn nongen_buses(&self) -> usize {
        self.l22.nrows()
    }
}

/// Assembles `L` with `L[i][j] = -1/chi_ij` on lines and zero row sums.
pub fn build_laplacian(net: &PowerNetwork) -> LaplacianBlocks {
    let buses = net.buses();
    let mut full = DMatrix::zeros(buses, buses);
    for line in net.lines() {
        let y = line.reactance.recip();
        full[(line.from, line.to)] -= y;
        full[(line.to, line.from)] -= y;
        full[(line.from, line.from)] += y;
        full[(line.to, line.to)] += y;
    }
    LaplacianBlocks::from_full(full, net.generators())
}

/// `L_D = diag(1/chi_1, ..., 1/chi_n)`.
pub fn build_ld(net: &PowerNetwork) -> DMatrix<f64> {
    DMatrix::from_diagonal(&net.gen_admittance())
}
