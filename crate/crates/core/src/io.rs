//! On-disk formats: network and partition JSON, projection sidecar JSON and
//! trajectory CSV. All ids in files are one-based.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::build_p;
use crate::error::Error;
use crate::network::{Generator, Line, PowerNetwork};
use crate::partition::Partition;
use crate::simulator::{BusVoltages, Trajectory};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON at byte offset {offset} (line {line}, column {column}): {message}")]
    Json {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{field}: {message}")]
    Field { field: String, message: String },

    #[error("trajectory CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<csv::Error> for FormatError {
    fn from(e: csv::Error) -> Self {
        FormatError::Csv(e.to_string())
    }
}

/// Byte offset of a one-based (line, column) position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    start + column.saturating_sub(1)
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Json {
        offset: byte_offset(text, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorRecord {
    pub id: usize,
    #[serde(rename = "M")]
    pub inertia: f64,
    #[serde(rename = "D")]
    pub damping: f64,
    #[serde(rename = "f")]
    pub power: f64,
    #[serde(rename = "E")]
    pub emf: f64,
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusRecord {
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub from: usize,
    pub to: usize,
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub generators: Vec<GeneratorRecord>,
    #[serde(default)]
    pub nongen_buses: Vec<BusRecord>,
    #[serde(default)]
    pub lines: Vec<LineRecord>,
}

impl NetworkFile {
    pub fn from_network(net: &PowerNetwork) -> Self {
        let n = net.generators();
        Self {
            generators: (0..n)
                .map(|i| {
                    let g = net.generator(i);
                    GeneratorRecord {
                        id: i + 1,
                        inertia: g.inertia,
                        damping: g.damping,
                        power: g.power,
                        emf: g.emf,
                        chi: g.reactance,
                    }
                })
                .collect(),
            nongen_buses: (n..net.buses()).map(|b| BusRecord { id: b + 1 }).collect(),
            lines: net
                .lines()
                .iter()
                .map(|l| LineRecord {
                    from: l.from + 1,
                    to: l.to + 1,
                    chi: l.reactance,
                })
                .collect(),
        }
    }

    /// Sorts records by id, checks ids and line endpoints, then validates the
    /// network itself.
    pub fn into_network(mut self) -> Result<PowerNetwork, FormatError> {
        self.generators.sort_by_key(|g| g.id);
        self.nongen_buses.sort_by_key(|b| b.id);
        let n = self.generators.len();
        let buses = n + self.nongen_buses.len();
        if n == 0 {
            return Err(FormatError::field(
                "generators",
                "at least one generator is required",
            ));
        }
        for (k, g) in self.generators.iter().enumerate() {
            if g.id != k + 1 {
                return Err(FormatError::field(
                    format!("generators[id={}].id", g.id),
                    format!("generator ids must be exactly 1..{n} without repeats"),
                ));
            }
        }
        for (k, b) in self.nongen_buses.iter().enumerate() {
            if b.id != n + k + 1 {
                return Err(FormatError::field(
                    format!("nongen_buses[id={}].id", b.id),
                    format!("non-generator bus ids must be exactly {}..{buses}", n + 1),
                ));
            }
        }
        for (k, l) in self.lines.iter().enumerate() {
            for (name, id) in [("from", l.from), ("to", l.to)] {
                if id == 0 || id > buses {
                    return Err(FormatError::field(
                        format!("lines[{k}].{name}"),
                        format!("bus {id} is not declared"),
                    ));
                }
            }
        }

        let generators: Vec<Generator> = self
            .generators
            .iter()
            .map(|g| Generator {
                inertia: g.inertia,
                damping: g.damping,
                power: g.power,
                emf: g.emf,
                reactance: g.chi,
            })
            .collect();
        let lines: Vec<Line> = self
            .lines
            .iter()
            .map(|l| Line::new(l.from - 1, l.to - 1, l.chi))
            .collect();
        PowerNetwork::new(&generators, buses - n, lines).map_err(|e| match e {
            Error::NonpositiveParameter {
                name: "line chi",
                index,
                value,
            } => FormatError::field(
                format!("lines[{index}].chi"),
                format!("{value} must be positive"),
            ),
            Error::NonpositiveParameter { name, index, value } => FormatError::field(
                format!("generators[id={}].{name}", index + 1),
                format!("{value} violates its sign constraint"),
            ),
            Error::DuplicateLine(a, b) => FormatError::field(
                "lines",
                format!("duplicate line between buses {} and {}", a + 1, b + 1),
            ),
            Error::BadBusIndex { from, to, .. } => FormatError::field(
                "lines",
                format!(
                    "line ({}, {}) must join two different buses",
                    from + 1,
                    to + 1
                ),
            ),
            Error::DisconnectedNetwork { bus } => FormatError::field(
                "lines",
                format!(
                    "network is disconnected: bus {} is unreachable from bus 1",
                    bus + 1
                ),
            ),
            other => FormatError::field("network", other.to_string()),
        })
    }
}

pub fn parse_network(text: &str) -> Result<PowerNetwork, FormatError> {
    parse_json::<NetworkFile>(text)?.into_network()
}

pub fn network_to_json(net: &PowerNetwork) -> String {
    serde_json::to_string_pretty(&NetworkFile::from_network(net)).expect("serializable")
}

/// Parses `[[1, 2], [3, 4, 5]]` for a network with `n` generators.
pub fn parse_partition(text: &str, n: usize) -> Result<Partition, FormatError> {
    let clusters: Vec<Vec<usize>> = parse_json(text)?;
    Partition::from_one_based(clusters, n)
        .map_err(|e| FormatError::field("partition", e.to_string()))
}

pub fn partition_to_json(part: &Partition) -> String {
    serde_json::to_string(&part.to_one_based()).expect("serializable")
}

/// Sidecar written next to a reduced network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionFile {
    pub clusters: Vec<Vec<usize>>,
    pub cluster_sizes: Vec<usize>,
    /// Rows of the `n x n_hat` aggregation matrix.
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    /// Rows of `(P^T P)^{-1} P^T`.
    pub projector: Vec<Vec<f64>>,
    /// `[original id, reduced id]` for every non-generator bus.
    pub nongen_bus_map: Vec<[usize; 2]>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ProjectionFile {
    pub fn new(net: &PowerNetwork, part: &Partition) -> Self {
        let agg = build_p(part);
        let (n, n_hat) = (net.generators(), part.num_clusters());
        Self {
            clusters: part.to_one_based(),
            cluster_sizes: agg.sizes.clone(),
            p: rows(&agg.p),
            projector: rows(&agg.projector()),
            nongen_bus_map: (0..net.nongen_buses())
                .map(|k| [n + k + 1, n_hat + k + 1])
                .collect(),
        }
    }
}

fn trajectory_header(traj: &Trajectory) -> Vec<String> {
    let n = traj.generators();
    let b = traj.buses();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("delta_{i}")));
    header.extend((1..=n).map(|i| format!("omega_{i}")));
    if traj.voltages.is_some() {
        header.extend((1..=b).map(|i| format!("V_{i}")));
        header.extend((1..=b).map(|i| format!("theta_{i}")));
    }
    header
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one row per sample with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(traj))?;
    for k in 0..traj.len() {
        let mut row = vec![fmt(traj.times[k])];
        row.extend(traj.delta[k].iter().map(|&x| fmt(x)));
        row.extend(traj.omega[k].iter().map(|&x| fmt(x)));
        if let Some(v) = &traj.voltages {
            row.extend(v.amplitude[k].iter().map(|&x| fmt(x)));
            row.extend(v.phase[k].iter().map(|&x| fmt(x)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory, FormatError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let count = |prefix: &str| header.iter().filter(|h| h.starts_with(prefix)).count();
    let (n, b) = (count("delta_"), count("V_"));
    if header.get(0) != Some("t") || header.len() != 1 + 2 * n + 2 * b || count("theta_") != b {
        return Err(FormatError::Csv(format!("unexpected header {header:?}")));
    }

    let mut traj = Trajectory {
        times: Vec::new(),
        delta: Vec::new(),
        omega: Vec::new(),
        voltages: (b > 0).then(|| BusVoltages {
            amplitude: Vec::new(),
            phase: Vec::new(),
        }),
    };
    for (k, record) in r.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FormatError::Csv(format!("row {}: {e}", k + 1)))?;
        let t = values[0];
        if let Some(&prev) = traj.times.last() {
            if t <= prev {
                return Err(FormatError::Csv(format!(
                    "row {}: time is not increasing",
                    k + 1
                )));
            }
        }
        traj.times.push(t);
        traj.delta
            .push(DVector::from_column_slice(&values[1..1 + n]));
        traj.omega
            .push(DVector::from_column_slice(&values[1 + n..1 + 2 * n]));
        if let Some(v) = traj.voltages.as_mut() {
            let base = 1 + 2 * n;
            v.amplitude
                .push(DVector::from_column_slice(&values[base..base + b]));
            v.phase
                .push(DVector::from_column_slice(&values[base + b..base + 2 * b]));
        }
    }
    Ok(traj)
}
