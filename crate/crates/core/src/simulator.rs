//! Time integration of the Kron-reduced swing dynamics
//!
//! ```text
//! M_i dd(delta_i) + D_i d(delta_i) = f_i - sum_k E_i E_k Gamma_ik sin(delta_i - delta_k)
//! ```
//!
//! with classical fixed-step RK4. Angles are not wrapped.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kron::{polar_parts, KronSystem};
use crate::network::PowerNetwork;

#[derive(Debug, Clone, PartialEq)]
pub struct SwingState {
    pub t: f64,
    pub delta: DVector<f64>,
    pub omega: DVector<f64>,
}

/// Bus voltage amplitudes and phases per sample, generator buses first.
#[derive(Debug, Clone, PartialEq)]
pub struct BusVoltages {
    pub amplitude: Vec<DVector<f64>>,
    pub phase: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub delta: Vec<DVector<f64>>,
    pub omega: Vec<DVector<f64>>,
    pub voltages: Option<BusVoltages>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn generators(&self) -> usize {
        self.delta.first().map_or(0, |d| d.len())
    }

    /// Number of buses carried by the voltage columns (zero without them).
    pub fn buses(&self) -> usize {
        self.voltages
            .as_ref()
            .and_then(|v| v.amplitude.first())
            .map_or(0, |a| a.len())
    }

    pub fn final_state(&self) -> Option<SwingState> {
        let k = self.len().checked_sub(1)?;
        Some(SwingState {
            t: self.times[k],
            delta: self.delta[k].clone(),
            omega: self.omega[k].clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    pub with_voltages: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            dt: 1e-3,
            with_voltages: false,
        }
    }
}

/// Right-hand side of the first-order system `(d delta, d omega)`.
///
/// The coupling sum is evaluated as
/// `sin(d_i) (Gamma (E cos d))_i - cos(d_i) (Gamma (E sin d))_i`.
///
/// Panics if the state dimension differs from the number of generators.
pub fn swing_rhs(
    ks: &KronSystem,
    net: &PowerNetwork,
    state: &SwingState,
) -> (DVector<f64>, DVector<f64>) {
    let n = net.generators();
    assert_eq!(state.delta.len(), n, "delta dimension");
    assert_eq!(state.omega.len(), n, "omega dimension");
    let e = net.emf();
    let ec = DVector::from_iterator(n, state.delta.iter().zip(e).map(|(d, e)| e * d.cos()));
    let es = DVector::from_iterator(n, state.delta.iter().zip(e).map(|(d, e)| e * d.sin()));
    let gc = &ks.gamma * &ec;
    let gs = &ks.gamma * &es;
    let domega = DVector::from_fn(n, |i, _| {
        let coupling = es[i] * gc[i] - ec[i] * gs[i];
        (net.power()[i] - coupling - net.damping()[i] * state.omega[i]) / net.inertia()[i]
    });
    (state.omega.clone(), domega)
}

/// `1^T (M omega) + 1^T (D delta) - t 1^T f`, constant along exact solutions.
pub fn drift_invariant(
    net: &PowerNetwork,
    t: f64,
    delta: &DVector<f64>,
    omega: &DVector<f64>,
) -> f64 {
    let momentum: f64 = net
        .inertia()
        .iter()
        .zip(omega.iter())
        .map(|(m, w)| m * w)
        .sum();
    let damping: f64 = net
        .damping()
        .iter()
        .zip(delta.iter())
        .map(|(d, x)| d * x)
        .sum();
    momentum + damping - t * net.power().iter().sum::<f64>()
}

/// Amplitudes and phases of all buses for one angle vector.
pub fn bus_voltages(
    ks: &KronSystem,
    net: &PowerNetwork,
    delta: &[f64],
) -> Result<(DVector<f64>, DVector<f64>)> {
    let vg = ks.gen_bus_phasors(net.emf(), delta)?;
    let vn = ks.nongen_phasors(&vg)?;
    let all = DVector::from_iterator(vg.len() + vn.len(), vg.iter().chain(vn.iter()).copied());
    Ok(polar_parts(&all))
}

/// Fills in the voltage columns of a trajectory.
pub fn recover_voltages(ks: &KronSystem, net: &PowerNetwork, traj: &mut Trajectory) -> Result<()> {
    let mut amplitude = Vec::with_capacity(traj.len());
    let mut phase = Vec::with_capacity(traj.len());
    for delta in &traj.delta {
        let (a, p) = bus_voltages(ks, net, delta.as_slice())?;
        amplitude.push(a);
        phase.push(p);
    }
    traj.voltages = Some(BusVoltages { amplitude, phase });
    Ok(())
}

/// Number of RK4 steps: the last sample is the largest grid point `<= t_end`.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be nonnegative, got {t_end}"
        )));
    }
    Ok((t_end / dt + 1e-9).floor() as usize)
}

/// Classical fixed-step RK4 from `(delta0, omega0)` at `t = 0`.
pub fn integrate(
    ks: &KronSystem,
    net: &PowerNetwork,
    delta0: &[f64],
    omega0: &[f64],
    config: &SimConfig,
) -> Result<Trajectory> {
    let n = net.generators();
    for (what, got) in [("delta0", delta0.len()), ("omega0", omega0.len())] {
        if got != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                got,
            });
        }
    }
    if ks.generators() != n {
        return Err(Error::DimensionMismatch {
            what: "Kron system",
            expected: n,
            got: ks.generators(),
        });
    }
    let steps = step_count(config.t_end, config.dt)?;
    let dt = config.dt;

    let mut state = SwingState {
        t: 0.0,
        delta: DVector::from_column_slice(delta0),
        omega: DVector::from_column_slice(omega0),
    };
    if !all_finite(&state) {
        return Err(Error::NonFiniteState { t: 0.0 });
    }
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        delta: Vec::with_capacity(steps + 1),
        omega: Vec::with_capacity(steps + 1),
        voltages: None,
    };
    traj.times.push(0.0);
    traj.delta.push(state.delta.clone());
    traj.omega.push(state.omega.clone());

    let shifted = |s: &SwingState, h: f64, k: &(DVector<f64>, DVector<f64>)| SwingState {
        t: s.t + h,
        delta: &s.delta + &k.0 * h,
        omega: &s.omega + &k.1 * h,
    };
    for step in 1..=steps {
        let k1 = swing_rhs(ks, net, &state);
        let k2 = swing_rhs(ks, net, &shifted(&state, dt / 2.0, &k1));
        let k3 = swing_rhs(ks, net, &shifted(&state, dt / 2.0, &k2));
        let k4 = swing_rhs(ks, net, &shifted(&state, dt, &k3));
        let t = step as f64 * dt;
        state = SwingState {
            t,
            delta: &state.delta + (&k1.0 + (&k2.0 + &k3.0) * 2.0 + &k4.0) * (dt / 6.0),
            omega: &state.omega + (&k1.1 + (&k2.1 + &k3.1) * 2.0 + &k4.1) * (dt / 6.0),
        };
        if !all_finite(&state) {
            return Err(Error::NonFiniteState { t });
        }
        traj.times.push(t);
        traj.delta.push(state.delta.clone());
        traj.omega.push(state.omega.clone());
    }

    if config.with_voltages {
        recover_voltages(ks, net, &mut traj)?;
    }
    Ok(traj)
}

fn all_finite(s: &SwingState) -> bool {
    s.delta.iter().chain(s.omega.iter()).all(|x| x.is_finite())
}

/// Maximum absolute errors over the time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareMetrics {
    pub max_abs_delta_err: f64,
    pub max_abs_omega_err: f64,
    /// Over all buses; absent unless both trajectories carry voltages.
    pub max_abs_v_err: Option<f64>,
    /// Phase differences are taken modulo `2 pi`.
    pub max_abs_theta_err: Option<f64>,
    pub terminal_delta_err: f64,
}

fn max_diff(a: &[DVector<f64>], b: &[DVector<f64>], diff: impl Fn(f64, f64) -> f64) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(&p, &q)| diff(p, q)))
        .fold(0.0, f64::max)
}

fn angle_diff(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(TAU) - PI).abs()
}

pub fn compare(full: &Trajectory, lifted: &Trajectory) -> Result<CompareMetrics> {
    if full.len() != lifted.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples against {}",
            full.len(),
            lifted.len()
        )));
    }
    if full.is_empty() {
        return Err(Error::GridMismatch("empty trajectories".into()));
    }
    for (k, (a, b)) in full.times.iter().zip(&lifted.times).enumerate() {
        if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(Error::GridMismatch(format!(
                "sample {k}: t = {a} against {b}"
            )));
        }
    }
    if full.generators() != lifted.generators() {
        return Err(Error::DimensionMismatch {
            what: "trajectory generators",
            expected: full.generators(),
            got: lifted.generators(),
        });
    }

    let abs = |p: f64, q: f64| (p - q).abs();
    let (max_abs_v_err, max_abs_theta_err) = match (&full.voltages, &lifted.voltages) {
        (Some(a), Some(b)) if full.buses() == lifted.buses() => (
            Some(max_diff(&a.amplitude, &b.amplitude, abs)),
            Some(max_diff(&a.phase, &b.phase, angle_diff)),
        ),
        (Some(_), Some(_)) => {
            return Err(Error::DimensionMismatch {
                what: "trajectory buses",
                expected: full.buses(),
                got: lifted.buses(),
            })
        }
        _ => (None, None),
    };
    let last = full.len() - 1;
    Ok(CompareMetrics {
        max_abs_delta_err: max_diff(&full.delta, &lifted.delta, abs),
        max_abs_omega_err: max_diff(&full.omega, &lifted.omega, abs),
        max_abs_v_err,
        max_abs_theta_err,
        terminal_delta_err: (&full.delta[last] - &lifted.delta[last]).amax(),
    })
}
