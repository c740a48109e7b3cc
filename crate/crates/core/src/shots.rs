//! Shot budgets for estimating `<H>` to an absolute error `epsilon`.
//!
//! With `sigma_g` the standard deviation of group `g`'s weighted sum, optimal
//! allocation gives `S = (sum_g sigma_g)^2 / epsilon^2` and assigns shots in
//! proportion to `sigma_g`.
//!
//! The closed-form bounds are stated for a position operator normalised as
//! `a + a^dag`, i.e. twice ours; they are evaluated here with each coupling
//! halved so that they describe the same Pauli coefficients as
//! [`crate::model::build_1d_hamiltonian`].

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grouping::{round_robin_factorization, validate_grouping, MeasurementGroup};
use crate::model::CouplingGraph;
use crate::pauli::{PauliString, PauliSum};

/// Average variance of `P` over Haar-random pure states: `1 - 1/(2^w + 1)`.
pub fn spherical_variance(p: &PauliString) -> f64 {
    let w = p.weight();
    if w == 0 {
        0.0
    } else {
        1.0 - 1.0 / ((w as f64).exp2() + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateModel {
    /// Unitarily invariant average; covariances vanish.
    SphericalMeasure,
    /// The all-zeros computational state.
    UncoupledPure,
    ExplicitVector(Vec<Complex64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Spherical,
    Uncoupled,
    Explicit,
}

impl StateModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            StateModel::SphericalMeasure => ModelKind::Spherical,
            StateModel::UncoupledPure => ModelKind::Uncoupled,
            StateModel::ExplicitVector(_) => ModelKind::Explicit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupShots {
    pub group: usize,
    pub variance: f64,
    /// Share of the total shots assigned to this group.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotEstimate {
    pub total: f64,
    pub per_group: Vec<GroupShots>,
    pub epsilon: f64,
    pub model: ModelKind,
}

impl ShotEstimate {
    /// Shots for group `g` after rounding up its share of `total`.
    pub fn rounded_shots(&self) -> Vec<u64> {
        self.per_group.iter().map(|g| (g.fraction * self.total).ceil() as u64).collect()
    }
}

fn explicit_variance(terms: &[(PauliString, Complex64)], members: &[usize], psi: &[Complex64]) -> f64 {
    let mut g_psi = vec![Complex64::default(); psi.len()];
    for &m in members {
        let (p, a) = terms[m];
        for (k, amp) in psi.iter().enumerate() {
            let (phase, j) = p.apply_to_basis(k);
            g_psi[j] += phase * a * amp;
        }
    }
    let mean: Complex64 = psi.iter().zip(&g_psi).map(|(a, b)| a.conj() * b).sum();
    let second: f64 = g_psi.iter().map(|c| c.norm_sqr()).sum();
    second - mean.re * mean.re
}

/// `G|0...0>` accumulated sparsely, so registers of any width work.
fn zero_state_variance(terms: &[(PauliString, Complex64)], members: &[usize]) -> f64 {
    let mut image: BTreeMap<u64, Complex64> = BTreeMap::new();
    for &m in members {
        let (p, a) = terms[m];
        let (phase, _) = p.apply_to_basis(0);
        *image.entry(p.x_mask()).or_default() += phase * a;
    }
    let mean = image.get(&0).copied().unwrap_or_default();
    let second: f64 = image.values().map(|c| c.norm_sqr()).sum();
    second - mean.re * mean.re
}

/// Optimal-allocation shot count for `groups` of `h` under `model`.
pub fn estimate_shots(
    h: &PauliSum,
    groups: &[MeasurementGroup],
    model: &StateModel,
    epsilon: f64,
) -> Result<ShotEstimate> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return domain(format!("target error must be positive, got {epsilon}"));
    }
    validate_grouping(h, groups)?;
    if let StateModel::ExplicitVector(psi) = model {
        let dim = 1usize << h.num_qubits();
        if psi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: psi.len() });
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return domain(format!("state norm^2 is {norm}, expected 1"));
        }
    }
    let terms = h.terms();
    let mut variances = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        let v = match model {
            StateModel::SphericalMeasure => {
                g.members.iter().map(|&m| terms[m].1.norm_sqr() * spherical_variance(&terms[m].0)).sum()
            }
            StateModel::UncoupledPure => zero_state_variance(&terms, &g.members),
            StateModel::ExplicitVector(psi) => explicit_variance(&terms, &g.members, psi),
        };
        let v = if v < 0.0 {
            if v < -1e-9 {
                log::warn!("group {gi} variance {v} is negative; clamping to zero");
            }
            0.0
        } else {
            v
        };
        variances.push(v);
    }
    let sigma_sum: f64 = variances.iter().map(|v| v.sqrt()).sum();
    let n = groups.len().max(1) as f64;
    let per_group = variances
        .iter()
        .enumerate()
        .map(|(group, &variance)| GroupShots {
            group,
            variance,
            fraction: if sigma_sum > 0.0 { variance.sqrt() / sigma_sum } else { 1.0 / n },
        })
        .collect();
    Ok(ShotEstimate { total: sigma_sum * sigma_sum / (epsilon * epsilon), per_group, epsilon, model: model.kind() })
}

fn check_bound_args(graph: &CouplingGraph, d: usize, epsilon: f64) -> Result<f64> {
    let m = crate::encoding::qubits_for_dim(d)?;
    if graph.n() < 2 {
        return domain("bounds need at least two oscillators");
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return domain(format!("target error must be positive, got {epsilon}"));
    }
    Ok(m as f64)
}

/// `sum_F sqrt(sum_{e in F} gamma_e^2)` over the round-robin rounds, with the
/// couplings halved (see the module docs).
pub fn round_norm_sum(graph: &CouplingGraph) -> Result<f64> {
    let f = round_robin_factorization(graph.n())?;
    let gamma: HashMap<(usize, usize), f64> = graph.edges().iter().map(|e| ((e.i, e.j), e.gamma)).collect();
    Ok(f.rounds()
        .iter()
        .map(|round| {
            round
                .iter()
                .map(|&(i, j)| (gamma.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0) / 2.0).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum())
}

fn abs_gamma_sum(graph: &CouplingGraph) -> f64 {
    graph.edges().iter().map(|e| (e.gamma / 2.0).abs()).sum()
}

/// Closed-form upper bound for grouped measurement over the spherical measure.
pub fn bound_grouped_spherical(graph: &CouplingGraph, d: usize, epsilon: f64) -> Result<f64> {
    let l = check_bound_args(graph, d, epsilon)?;
    let d = d as f64;
    let n = graph.n() as f64;
    let non_int = 2f64.sqrt() / 3.0 * n.sqrt() * (d * d - 1.0).sqrt();
    let poly = 2.0 * d - (4.0 + 2.0 * l) * d * d + (2.0 + 2.0 * l + 0.5 * l * l) * d.powi(3);
    let s = non_int + round_norm_sum(graph)? * poly;
    Ok(s * s / (epsilon * epsilon))
}

/// Closed-form upper bound for measuring every term separately over the
/// spherical measure.
pub fn bound_ungrouped_spherical(graph: &CouplingGraph, d: usize, epsilon: f64) -> Result<f64> {
    check_bound_args(graph, d, epsilon)?;
    let d = d as f64;
    let n = graph.n() as f64;
    let s2 = 2f64.sqrt();
    let non_int = n * 6f64.sqrt() / 3.0 * (d - 1.0);
    let poly = (3.0 + 2.0 * s2) * d.powi(2) - (2.0 + s2) * d.powf(2.5) - (3.5 + 3.0 * s2) * d.powi(3)
        + (1.0 + s2) * d.powf(3.5)
        + (1.5 + s2) * d.powi(4);
    let s = non_int + abs_gamma_sum(graph) * poly;
    Ok(s * s / (epsilon * epsilon))
}

/// Shots for the all-zeros state: `(1/16) c^2 d^4 / epsilon^2` with `c` the
/// round-norm sum (grouped) or the absolute coupling sum (ungrouped).
pub fn bound_uncoupled(graph: &CouplingGraph, d: usize, epsilon: f64, grouped: bool) -> Result<f64> {
    check_bound_args(graph, d, epsilon)?;
    let c = if grouped { round_norm_sum(graph)? } else { abs_gamma_sum(graph) };
    Ok(c * c * (d as f64).powi(4) / (16.0 * epsilon * epsilon))
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return domain("slope needs at least two paired points");
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return domain("log-log fit needs positive data");
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return domain("x values are all equal");
    }
    Ok(sxy / sxx)
}
