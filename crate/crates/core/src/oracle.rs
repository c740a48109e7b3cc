//! Reference energies: dense diagonalisation and closed forms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{dense_matrix, CouplingGraph, HamiltonianSpec, Separation, DISSOCIATION_GAMMA};

/// Largest Hilbert-space dimension handed to the dense solver.
pub const MAX_DENSE_DIM: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub vector: DVector<f64>,
    /// `||H v - E v||`.
    pub residual: f64,
}

/// Lowest eigenpair of a real symmetric matrix.
pub fn ground_state_of(h: DMatrix<f64>) -> Result<GroundState> {
    let dim = h.nrows();
    if dim == 0 || !h.is_square() {
        return domain("matrix must be square and non-empty");
    }
    if dim > MAX_DENSE_DIM {
        return Err(Error::TooLarge { dim, limit: MAX_DENSE_DIM });
    }
    let eig = SymmetricEigen::new(h.clone());
    let (k, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let vector = eig.eigenvectors.column(k).into_owned();
    let residual = (&h * &vector - &vector * energy).norm();
    if residual > 1e-8 {
        return domain(format!("eigen-solver residual {residual:e} exceeds 1e-8"));
    }
    Ok(GroundState { energy, vector, residual })
}

/// Ground state of the truncated model (units `hbar*omega/2`).
pub fn exact_diag(spec: &HamiltonianSpec) -> Result<GroundState> {
    ground_state_of(dense_matrix(spec)?)
}

/// Lowest eigenvalue only; skips the eigenvectors.
pub fn ground_energy(spec: &HamiltonianSpec) -> Result<f64> {
    let h = dense_matrix(spec)?;
    if h.nrows() > MAX_DENSE_DIM {
        return Err(Error::TooLarge { dim: h.nrows(), limit: MAX_DENSE_DIM });
    }
    Ok(h.symmetric_eigenvalues().min())
}

/// Ground energy of two coupled oscillators from the normal modes,
/// `sqrt(1 + gamma/2) + sqrt(1 - gamma/2)`.
pub fn analytic_pair_energy(gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma.abs() > DISSOCIATION_GAMMA {
        return Err(Error::Dissociative { gamma });
    }
    Ok((1.0 + gamma / 2.0).sqrt() + (1.0 - gamma / 2.0).sqrt())
}

/// Binding energy `E(gamma) - E(0)` of the pair (negative).
pub fn analytic_binding_energy(gamma: f64) -> Result<f64> {
    Ok(analytic_pair_energy(gamma)? - 2.0)
}

/// Leading-order dispersion of two end-on oscillators in eV,
/// `-alpha^2 hbar*omega / (2 R^6)`.
pub fn london_1d(alpha: f64, hbar_omega: f64, r: Separation) -> Result<f64> {
    if !(alpha > 0.0 && hbar_omega > 0.0) {
        return domain("polarisability and trapping quantum must be positive");
    }
    if r.is_infinite() {
        return Ok(0.0);
    }
    let inv = r.inverse_cube();
    Ok(-0.5 * alpha * alpha * hbar_omega * inv * inv)
}

/// Dispersion coefficients of a linear molecule pair, in `energy * length^6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LondonCoefficients {
    pub c_par_par: f64,
    pub c_perp_perp: f64,
    pub c_par_perp: f64,
}

impl LondonCoefficients {
    /// From axial/transverse polarisabilities and trapping quanta.
    pub fn new(alpha_par: f64, alpha_perp: f64, hw_par: f64, hw_perp: f64) -> Result<Self> {
        if !(alpha_par >= 0.0 && alpha_perp >= 0.0 && hw_par > 0.0 && hw_perp > 0.0) {
            return domain("polarisabilities must be >= 0 and trapping quanta > 0");
        }
        Ok(Self {
            c_par_par: alpha_par * alpha_par * hw_par / 8.0,
            c_perp_perp: alpha_perp * alpha_perp * hw_perp / 8.0,
            c_par_perp: 0.25 * alpha_par * alpha_perp * hw_par * hw_perp / (hw_par + hw_perp),
        })
    }

    pub fn isotropic(c: f64) -> Self {
        Self { c_par_par: c, c_perp_perp: c, c_par_perp: c }
    }
}

/// London energy of two linear molecules whose axes have polar angles
/// `theta` (from the intermolecular axis) and azimuths `phi`.
pub fn anisotropic_london(
    c: &LondonCoefficients,
    theta_a: f64,
    phi_a: f64,
    theta_b: f64,
    phi_b: f64,
    r: Separation,
) -> Result<f64> {
    let (sa, ca) = theta_a.sin_cos();
    let (sb, cb) = theta_b.sin_cos();
    let orient = sa * sb * (phi_a - phi_b).cos() - 2.0 * ca * cb;
    let bracket = (c.c_par_par + c.c_perp_perp - 2.0 * c.c_par_perp) * orient * orient
        + 3.0 * (c.c_par_perp - c.c_perp_perp) * (ca * ca + cb * cb)
        + 2.0 * (c.c_par_perp + 2.0 * c.c_perp_perp);
    let inv = r.inverse_cube();
    Ok(-bracket * inv * inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub gamma: f64,
    pub d: usize,
    pub energy: f64,
    /// `None` beyond dissociation.
    pub analytic: Option<f64>,
    pub error: Option<f64>,
}

/// Truncated pair energies against the normal-mode result.
pub fn truncation_study(gammas: &[f64], ds: &[usize]) -> Result<Vec<TruncationRow>> {
    let mut rows = Vec::with_capacity(gammas.len() * ds.len());
    for &gamma in gammas {
        let analytic = analytic_pair_energy(gamma).ok();
        for &d in ds {
            let graph = if gamma == 0.0 { CouplingGraph::uncoupled(2)? } else { CouplingGraph::new(2, [(0, 1, gamma)])? };
            let spec = HamiltonianSpec::new(d, graph, Vec::new())?;
            let energy = ground_energy(&spec)?;
            rows.push(TruncationRow { gamma, d, energy, analytic, error: analytic.map(|a| energy - a) });
        }
    }
    Ok(rows)
}
