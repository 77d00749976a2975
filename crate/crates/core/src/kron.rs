//! Kron reduction of the bus network onto the generator internal nodes.
//!
//! With `S = L11 - L12 L22^{-1} L12^T` the Schur complement of the
//! non-generator block, the generator-bus voltages satisfy `V_G = X E_G` with
//! `X = (L_D + S)^{-1} L_D`, and the coupling matrix of the swing dynamics is
//! `Gamma = L_D X`. Both `L22` and `L_D + S` are symmetric positive definite
//! for a connected network, so every inverse is applied through a Cholesky
//! factorization.

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::network::{LaplacianBlocks, PowerNetwork};

pub type Phasor = Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct KronSystem {
    /// Diagonal of `L_D`.
    pub ld: DVector<f64>,
    /// `L11 - L12 L22^{-1} L12^T`.
    pub schur: DMatrix<f64>,
    pub x: DMatrix<f64>,
    /// Coupling matrix; the reciprocal line parameters are `1 / gamma[(i, k)]`.
    pub gamma: DMatrix<f64>,
    /// `-L22^{-1} L12^T`, mapping generator-bus voltages to the remaining buses.
    pub nongen_map: DMatrix<f64>,
}

fn factor(m: DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m).ok_or(Error::SingularSystem(what))
}

/// Eliminates the algebraic bus constraints.
pub fn kron_reduce(net: &PowerNetwork, blocks: &LaplacianBlocks) -> Result<KronSystem> {
    let n = net.generators();
    if blocks.generators() != n || blocks.nongen_buses() != net.nongen_buses() {
        return Err(Error::DimensionMismatch {
            what: "laplacian blocks",
            expected: net.buses(),
            got: blocks.full.nrows(),
        });
    }
    let ld = net.gen_admittance();

    let (schur, nongen_map) = if blocks.nongen_buses() == 0 {
        (blocks.l11.clone(), DMatrix::zeros(0, n))
    } else {
        let l22 = factor(blocks.l22.clone(), "L22")?;
        // L22^{-1} L12^T
        let coupling = l22.solve(&blocks.l12.transpose());
        let schur = &blocks.l11 - &blocks.l12 * &coupling;
        (schur, -coupling)
    };

    let mut system = schur.clone();
    for i in 0..n {
        system[(i, i)] += ld[i];
    }
    let system = factor(system, "L_D + Schur complement")?;
    let x = system.solve(&DMatrix::from_diagonal(&ld));
    let mut gamma = x.clone();
    for (i, mut row) in gamma.row_iter_mut().enumerate() {
        row *= ld[i];
    }

    Ok(KronSystem {
        ld,
        schur,
        x,
        gamma,
        nongen_map,
    })
}

impl KronSystem {
    pub fn generators(&self) -> usize {
        self.ld.len()
    }

    pub fn ld_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.ld)
    }

    /// Complex generator voltages `E_i (cos delta_i + i sin delta_i)`.
    pub fn emf_phasors(&self, emf: &[f64], delta: &[f64]) -> Result<DVector<Phasor>> {
        let n = self.generators();
        check_len("E", n, emf.len())?;
        check_len("delta", n, delta.len())?;
        Ok(DVector::from_iterator(
            n,
            emf.iter()
                .zip(delta)
                .map(|(&e, &d)| Phasor::from_polar(e, d)),
        ))
    }

    /// Generator-bus phasors from `L_D V_G = Gamma E_G`.
    pub fn gen_bus_phasors(&self, emf: &[f64], delta: &[f64]) -> Result<DVector<Phasor>> {
        let e = self.emf_phasors(emf, delta)?;
        let mut v = self.gamma.map(Phasor::from) * e;
        for (vi, &y) in v.iter_mut().zip(self.ld.iter()) {
            *vi /= y;
        }
        Ok(v)
    }

    /// Non-generator bus phasors through the cached `-L22^{-1} L12^T`.
    pub fn nongen_phasors(&self, gen_bus: &DVector<Phasor>) -> Result<DVector<Phasor>> {
        check_len("V_G", self.generators(), gen_bus.len())?;
        Ok(self.nongen_map.map(Phasor::from) * gen_bus)
    }

    /// Checks `X 1 = 1`, symmetry, entrywise positivity and positive
    /// definiteness of `Gamma`, and `Gamma = L_D X`, all to absolute `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let n = self.generators();
        let row_sum_err = self
            .x
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max);
        if row_sum_err > tol {
            return Err(Error::InvariantViolation(format!(
                "X 1 != 1 (deviation {row_sum_err:e})"
            )));
        }
        let asym = (&self.gamma - self.gamma.transpose()).amax();
        if asym > tol {
            return Err(Error::InvariantViolation(format!(
                "Gamma not symmetric (deviation {asym:e})"
            )));
        }
        let min_entry = self.gamma.min();
        if min_entry <= 0.0 {
            return Err(Error::InvariantViolation(format!(
                "Gamma has nonpositive entry {min_entry:e}"
            )));
        }
        let sym = (&self.gamma + self.gamma.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig <= 0.0 {
            return Err(Error::InvariantViolation(format!(
                "Gamma not positive definite (eigenvalue {min_eig:e})"
            )));
        }
        let mut ldx = self.x.clone();
        for i in 0..n {
            ldx.row_mut(i).scale_mut(self.ld[i]);
        }
        let diff = (&ldx - &self.gamma).amax();
        if diff > tol {
            return Err(Error::InvariantViolation(format!(
                "Gamma != L_D X (deviation {diff:e})"
            )));
        }
        Ok(())
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}

/// Amplitudes `V_i` and phases `theta_i` of the generator buses.
pub fn recover_gen_bus_voltages(
    ks: &KronSystem,
    emf: &[f64],
    delta: &[f64],
) -> Result<(DVector<f64>, DVector<f64>)> {
    let v = ks.gen_bus_phasors(emf, delta)?;
    Ok(polar_parts(&v))
}

/// Solves `L22 V = -L12^T V_G` for the non-generator bus phasors.
pub fn recover_nongen_voltages(
    blocks: &LaplacianBlocks,
    gen_bus: &DVector<Phasor>,
) -> Result<DVector<Phasor>> {
    check_len("V_G", blocks.generators(), gen_bus.len())?;
    let m = blocks.nongen_buses();
    if m == 0 {
        return Ok(DVector::zeros(0));
    }
    let l22 = factor(blocks.l22.clone(), "L22")?;
    let re = -(&blocks.l12.transpose() * gen_bus.map(|z| z.re));
    let im = -(&blocks.l12.transpose() * gen_bus.map(|z| z.im));
    let re = l22.solve(&re);
    let im = l22.solve(&im);
    Ok(DVector::from_iterator(
        m,
        re.iter().zip(im.iter()).map(|(&a, &b)| Phasor::new(a, b)),
    ))
}

/// Splits phasors into amplitudes and four-quadrant phases.
pub fn polar_parts(v: &DVector<Phasor>) -> (DVector<f64>, DVector<f64>) {
    (v.map(|z| z.norm()), v.map(|z| z.arg()))
}
