//! End-to-end dispersion curve: per-separation VQE, optional noisy
//! re-measurement, and noise subtraction against the separated pair.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grouping::{exact_grouping, MeasurementGroup};
use crate::model::{build_1d_hamiltonian, coupling_parallel, CouplingGraph, HamiltonianSpec, Separation};
use crate::oracle::{exact_diag, london_1d};
use crate::pauli::PauliSum;
use crate::sim::{estimate_energy, expectation_exact, rng_stream, NoiseModel, StateVector};
use crate::vqe::{default_circuit, dispersion_subtract, fidelity_from_counts, run_vqe, Evaluator, VqeConfig};

/// End-on pair at separation `r` with coupling `-4 alpha / R^3`; the
/// separated pair has no edge.
pub fn pair_at(alpha: f64, r: Separation, d: usize) -> Result<HamiltonianSpec> {
    let gamma = coupling_parallel(alpha, r)?;
    let graph = if gamma == 0.0 { CouplingGraph::uncoupled(2)? } else { CouplingGraph::new(2, [(0, 1, gamma)])? };
    HamiltonianSpec::new(d, graph, Vec::new())
}

/// Re-measurement of optimised states under global depolarising noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisySweep {
    pub lambda: f64,
    pub shots_per_group: u64,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionConfig {
    pub alpha: f64,
    pub hbar_omega: f64,
    pub d: usize,
    pub grid: Vec<Separation>,
    /// Optimiser settings; its evaluator drives the optimisation.
    pub vqe: VqeConfig,
    pub noisy: Option<NoisySweep>,
    pub seed: u64,
}

/// One separation. Energies `e_*` are in `hbar*omega/2`; `de_*` are in eV
/// relative to the separated pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub r: Separation,
    pub gamma: f64,
    pub e_exact: f64,
    /// Noise-free expectation of the optimised state.
    pub e_vqe: f64,
    pub de_exact: f64,
    pub de_vqe: f64,
    pub de_noisy: Option<f64>,
    pub de_noisy_stderr: Option<f64>,
    /// Mean of the per-repetition depolarising estimates.
    pub lambda_mean: Option<f64>,
    pub london: f64,
    pub theta: Vec<f64>,
}

#[derive(Clone)]
struct Point {
    h: PauliSum,
    groups: Vec<MeasurementGroup>,
    state: StateVector,
    e_exact: f64,
    e_vqe: f64,
    theta: Vec<f64>,
}

fn optimise(cfg: &DispersionConfig, r: Separation, seed: u64) -> Result<Point> {
    let spec = pair_at(cfg.alpha, r, cfg.d)?;
    let h = build_1d_hamiltonian(&spec)?;
    let groups = exact_grouping(&h, &spec.register_map(), spec.graph())?.groups;
    let circuit = default_circuit(h.num_qubits())?;
    let vqe = VqeConfig { seed, ..cfg.vqe.clone() };
    let vqe = match &vqe.evaluator {
        Evaluator::Sampled { shots, noise } if shots.len() != groups.len() => {
            // one shot count for every circuit of this point's grouping
            let per = shots.first().copied().unwrap_or(0);
            VqeConfig { evaluator: Evaluator::Sampled { shots: vec![per; groups.len()], noise: *noise }, ..vqe }
        }
        _ => vqe,
    };
    let run = run_vqe(&h, &groups, &circuit, &vqe)?;
    let state = StateVector::prepare(&circuit, &run.theta)?;
    let e_vqe = expectation_exact(&state, &h)?;
    let e_exact = exact_diag(&spec)?.energy;
    Ok(Point { h, groups, state, e_exact, e_vqe, theta: run.theta })
}

/// Runs the sweep. The separated pair is optimised first; its all-Z counts in
/// each noisy repetition supply that repetition's depolarising estimate.
pub fn dispersion_sweep(cfg: &DispersionConfig) -> Result<Vec<DispersionRow>> {
    if cfg.grid.is_empty() {
        return domain("separation grid is empty");
    }
    if !(cfg.hbar_omega > 0.0) {
        return domain("trapping quantum must be positive");
    }
    let to_ev = cfg.hbar_omega / 2.0;
    let reference = optimise(cfg, Separation::Infinite, cfg.seed)?;
    let points = cfg
        .grid
        .iter()
        .enumerate()
        .map(|(i, &r)| match r {
            Separation::Infinite => Ok(reference.clone()),
            Separation::Finite(_) => optimise(cfg, r, cfg.seed.wrapping_add(1 + i as u64)),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut noisy: Vec<Vec<f64>> = vec![Vec::new(); points.len()];
    let mut lambdas = Vec::new();
    if let Some(sweep) = cfg.noisy {
        if sweep.repetitions < 2 || sweep.shots_per_group == 0 {
            return domain("noisy sweep needs at least two repetitions and one shot");
        }
        let noise = NoiseModel::new(sweep.lambda)?;
        let z = reference
            .groups
            .iter()
            .position(|g| g.basis.is_diagonal())
            .ok_or_else(|| Error::Domain("separated pair has no all-Z group".into()))?;
        let ref_shots = vec![sweep.shots_per_group; reference.groups.len()];
        let streams = points.len() as u64 + 1;
        for rep in 0..sweep.repetitions as u64 {
            let mut rng = rng_stream(cfg.seed, 1 + rep * streams);
            let inf = estimate_energy(&reference.state, &reference.h, &reference.groups, &ref_shots, noise, &mut rng)?;
            let (_, lambda) = fidelity_from_counts(&inf.groups[z].counts)?;
            lambdas.push(lambda);
            for (i, p) in points.iter().enumerate() {
                let mut rng = rng_stream(cfg.seed, 2 + rep * streams + i as u64);
                let shots = vec![sweep.shots_per_group; p.groups.len()];
                let e = estimate_energy(&p.state, &p.h, &p.groups, &shots, noise, &mut rng)?;
                noisy[i].push(to_ev * dispersion_subtract(e.energy, inf.energy, lambda)?);
            }
        }
    }

    let lambda_mean = (!lambdas.is_empty()).then(|| lambdas.iter().sum::<f64>() / lambdas.len() as f64);
    cfg.grid
        .iter()
        .zip(points)
        .zip(noisy)
        .map(|((&r, p), samples)| {
            let (de_noisy, de_noisy_stderr) = match mean_stderr(&samples) {
                Some((m, s)) => (Some(m), Some(s)),
                None => (None, None),
            };
            Ok(DispersionRow {
                r,
                gamma: coupling_parallel(cfg.alpha, r)?,
                e_exact: p.e_exact,
                e_vqe: p.e_vqe,
                de_exact: to_ev * (p.e_exact - reference.e_exact),
                de_vqe: to_ev * (p.e_vqe - reference.e_vqe),
                de_noisy,
                de_noisy_stderr,
                lambda_mean,
                london: london_1d(cfg.alpha, cfg.hbar_omega, r)?,
                theta: p.theta,
            })
        })
        .collect()
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config(noisy: Option<NoisySweep>) -> DispersionConfig {
        DispersionConfig {
            alpha: 14.5,
            hbar_omega: 9.61,
            d: 4,
            grid: vec![Separation::new(4.0).unwrap(), Separation::Infinite],
            vqe: VqeConfig::default(),
            noisy,
            seed: 1,
        }
    }

    #[test]
    fn noiseless_sweep() {
        let rows = dispersion_sweep(&config(None)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_abs_diff_eq!(rows[0].gamma, -0.90625, epsilon = 1e-15);
        assert!((rows[0].e_vqe - rows[0].e_exact).abs() < 1e-2 * rows[0].e_exact);
        assert!(rows[0].de_exact < 0.0 && rows[0].de_vqe < 0.0);
        assert_eq!(rows[1].de_exact, 0.0);
        assert_eq!(rows[1].de_vqe, 0.0);
        assert_eq!(rows[1].london, 0.0);
        assert!(rows[0].de_noisy.is_none());
    }

    #[test]
    fn noisy_sweep_is_reproducible() {
        let sweep = NoisySweep { lambda: 0.3, shots_per_group: 1024, repetitions: 8 };
        let a = dispersion_sweep(&config(Some(sweep))).unwrap();
        let b = dispersion_sweep(&config(Some(sweep))).unwrap();
        assert_eq!(a, b);
        let l = a[0].lambda_mean.unwrap();
        assert!((l - 0.3).abs() < 0.05, "{l}");
        assert!(a[0].de_noisy_stderr.unwrap() > 0.0);
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_stderr(&[2.0, 2.0, 2.0]), Some((2.0, 0.0)));
        assert_eq!(mean_stderr(&[1.0]), None);
        let (m, s) = mean_stderr(&[1.0, 3.0]).unwrap();
        assert_eq!((m, s), (2.0, 1.0));
    }
}
