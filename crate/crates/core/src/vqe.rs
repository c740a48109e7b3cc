//! Variational loop: parameter-shift gradients, ADAM, fidelity-based noise
//! estimation and the noise-subtracted dispersion energy.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grouping::MeasurementGroup;
use crate::pauli::PauliSum;
use crate::sim::{
    ansatz_circuit, brick_ansatz, estimate_energy, expectation_exact, rng_stream, Circuit, NoiseModel, StateVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 0.25, beta1: 0.9, beta2: 0.99, eps: 1e-8 }
    }
}

/// ADAM with bias-corrected moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
}

impl Adam {
    pub fn new(n: usize, config: AdamConfig) -> Self {
        Self { config, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    /// Descends `theta` along `grad` in place.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) -> Result<()> {
        if theta.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), found: grad.len().min(theta.len()) });
        }
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for k in 0..theta.len() {
            self.m[k] = beta1 * self.m[k] + (1.0 - beta1) * grad[k];
            self.v[k] = beta2 * self.v[k] + (1.0 - beta2) * grad[k] * grad[k];
            theta[k] -= lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + eps);
        }
        Ok(())
    }
}

/// `dE/dtheta_k = (E(theta_k + pi/2) - E(theta_k - pi/2)) / 2` for every `k`.
///
/// Exact when each parameter drives a single Pauli rotation `exp(-i t P / 2)`.
pub fn parameter_shift_gradient<F>(theta: &[f64], mut energy: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut shifted = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        shifted[k] = theta[k] + FRAC_PI_2;
        let plus = energy(&shifted)?;
        shifted[k] = theta[k] - FRAC_PI_2;
        let minus = energy(&shifted)?;
        shifted[k] = theta[k];
        grad.push(0.5 * (plus - minus));
    }
    Ok(grad)
}

/// How energies are obtained during optimisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Evaluator {
    /// State-vector expectation values.
    Exact,
    /// Grouped sampling with `shots[g]` shots for group `g`.
    Sampled { shots: Vec<u64>, noise: NoiseModel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub adam: AdamConfig,
    pub steps: usize,
    pub seed: u64,
    /// Initial angles are drawn from `U(-init_scale, init_scale)`.
    pub init_scale: f64,
    pub evaluator: Evaluator,
    /// Start here instead of a random draw.
    pub initial_theta: Option<Vec<f64>>,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self { adam: AdamConfig::default(), steps: 200, seed: 0, init_scale: 0.1, evaluator: Evaluator::Exact, initial_theta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeRun {
    pub theta: Vec<f64>,
    pub initial_theta: Vec<f64>,
    /// Energy at the start of each step, as seen by the evaluator.
    pub trace: Vec<f64>,
    /// Evaluator energy at the final parameters.
    pub final_energy: f64,
    /// Noise-free expectation at the final parameters.
    pub exact_final_energy: f64,
    pub seed: u64,
    pub shots: Option<Vec<u64>>,
    pub groups: Vec<MeasurementGroup>,
    pub optimizer: Adam,
}

/// The fixed twelve-parameter layout on four qubits, a single brick layer
/// otherwise.
pub fn default_circuit(num_qubits: usize) -> Result<Circuit> {
    if num_qubits == 4 {
        Ok(ansatz_circuit())
    } else {
        brick_ansatz(num_qubits, 1)
    }
}

/// Energy of the prepared state under `evaluator`.
pub fn evaluate<R: Rng + ?Sized>(
    circuit: &Circuit,
    theta: &[f64],
    h: &PauliSum,
    groups: &[MeasurementGroup],
    evaluator: &Evaluator,
    rng: &mut R,
) -> Result<f64> {
    let state = StateVector::prepare(circuit, theta)?;
    match evaluator {
        Evaluator::Exact => expectation_exact(&state, h),
        Evaluator::Sampled { shots, noise } => Ok(estimate_energy(&state, h, groups, shots, *noise, rng)?.energy),
    }
}

/// Optimises `circuit` against `h` with ADAM and parameter-shift gradients.
pub fn run_vqe(h: &PauliSum, groups: &[MeasurementGroup], circuit: &Circuit, config: &VqeConfig) -> Result<VqeRun> {
    if h.num_qubits() != circuit.num_qubits() {
        return Err(Error::DimensionMismatch { expected: circuit.num_qubits(), found: h.num_qubits() });
    }
    if let Evaluator::Sampled { shots, .. } = &config.evaluator {
        if shots.len() != groups.len() {
            return Err(Error::DimensionMismatch { expected: groups.len(), found: shots.len() });
        }
    }
    let n = circuit.num_params();
    let mut rng: ChaCha20Rng = rng_stream(config.seed, 0);
    let initial_theta = match &config.initial_theta {
        Some(t) if t.len() != n => return Err(Error::DimensionMismatch { expected: n, found: t.len() }),
        Some(t) => t.clone(),
        None => {
            if !(config.init_scale >= 0.0 && config.init_scale.is_finite()) {
                return domain("init_scale must be finite and non-negative");
            }
            (0..n).map(|_| config.init_scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
        }
    };
    let mut theta = initial_theta.clone();
    let mut adam = Adam::new(n, config.adam);
    let mut trace = Vec::with_capacity(config.steps);
    for step in 0..config.steps {
        let e = evaluate(circuit, &theta, h, groups, &config.evaluator, &mut rng)?;
        if !e.is_finite() {
            return Err(Error::NonFinite { step, trace });
        }
        trace.push(e);
        let grad =
            parameter_shift_gradient(&theta, |t| evaluate(circuit, t, h, groups, &config.evaluator, &mut rng))?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { step, trace });
        }
        adam.step(&mut theta, &grad)?;
    }
    let final_energy = evaluate(circuit, &theta, h, groups, &config.evaluator, &mut rng)?;
    if !final_energy.is_finite() || theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite { step: config.steps, trace });
    }
    let exact_final_energy = expectation_exact(&StateVector::prepare(circuit, &theta)?, h)?;
    let shots = match &config.evaluator {
        Evaluator::Exact => None,
        Evaluator::Sampled { shots, .. } => Some(shots.clone()),
    };
    Ok(VqeRun {
        theta,
        initial_theta,
        trace,
        final_energy,
        exact_final_energy,
        seed: config.seed,
        shots,
        groups: groups.to_vec(),
        optimizer: adam,
    })
}

/// Fidelity with `|0...0>` and the implied depolarising rate from all-Z
/// counts indexed by bitstring: `F = n_0 / n`, `lambda = (1 - F) / (1 - 2^-M)`.
pub fn fidelity_from_counts(counts: &[u64]) -> Result<(f64, f64)> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return domain("no counts");
    }
    if counts.len() < 2 || !counts.len().is_power_of_two() {
        return domain(format!("count vector length {} is not 2^M with M >= 1", counts.len()));
    }
    let f = counts[0] as f64 / total as f64;
    let lambda = (1.0 - f) / (1.0 - 1.0 / counts.len() as f64);
    Ok((f, lambda))
}

/// `(E_R - E_inf) / (1 - lambda)`.
pub fn dispersion_subtract(e_r: f64, e_inf: f64, lambda: f64) -> Result<f64> {
    if !(lambda < 1.0) {
        return domain(format!("depolarising rate {lambda} leaves no signal"));
    }
    Ok((e_r - e_inf) / (1.0 - lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouping::exact_grouping;
    use crate::model::{build_1d_hamiltonian, HamiltonianSpec};
    use crate::oracle::exact_diag;
    use crate::pauli::PauliString;
    use crate::sim::Gate;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn pair(gamma: f64) -> (PauliSum, Vec<MeasurementGroup>) {
        let spec = HamiltonianSpec::pair(4, gamma).unwrap();
        let h = build_1d_hamiltonian(&spec).unwrap();
        let g = exact_grouping(&h, &spec.register_map(), spec.graph()).unwrap();
        (h, g.groups)
    }

    #[test]
    fn shift_rule_on_cosine() {
        // <0| Ry(t)^dag Z Ry(t) |0> = cos t
        let mut c = Circuit::new(1).unwrap();
        c.push(Gate::Ry { qubit: 0, slot: 0 }).unwrap();
        let z = PauliSum::from_term("Z".parse::<PauliString>().unwrap(), 1.0.into());
        for t in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let g = parameter_shift_gradient(&[t], |p| expectation_exact(&StateVector::prepare(&c, p)?, &z)).unwrap();
            assert_abs_diff_eq!(g[0], -f64::sin(t), epsilon = 1e-10);
        }
    }

    #[test]
    fn shift_rule_matches_finite_differences() {
        let (h, _) = pair(-1.2);
        let c = ansatz_circuit();
        let e = |p: &[f64]| expectation_exact(&StateVector::prepare(&c, p)?, &h);
        let mut rng = rng_stream(11, 0);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..12).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = parameter_shift_gradient(&theta, e).unwrap();
            for k in 0..12 {
                let mut p = theta.clone();
                p[k] += 1e-5;
                let up = e(&p).unwrap();
                p[k] -= 2e-5;
                let dn = e(&p).unwrap();
                assert_abs_diff_eq!(g[k], (up - dn) / 2e-5, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn adam_fixed_point() {
        let mut adam = Adam::new(3, AdamConfig::default());
        let mut theta = vec![0.1, -0.2, 0.3];
        for _ in 0..50 {
            adam.step(&mut theta, &[0.0; 3]).unwrap();
        }
        assert_eq!(theta, vec![0.1, -0.2, 0.3]);
        assert!(adam.step(&mut theta, &[0.0; 2]).is_err());
    }

    #[test]
    fn adam_first_step_has_size_lr() {
        let mut adam = Adam::new(2, AdamConfig::default());
        let mut theta = vec![0.0, 0.0];
        adam.step(&mut theta, &[3.0, -0.01]).unwrap();
        assert_abs_diff_eq!(theta[0], -0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(theta[1], 0.25, epsilon = 1e-5);
    }

    #[test]
    fn exact_run_reaches_ground_state() {
        let (h, groups) = pair(-1.55);
        let run = run_vqe(&h, &groups, &ansatz_circuit(), &VqeConfig::default()).unwrap();
        let exact = exact_diag(&HamiltonianSpec::pair(4, -1.55).unwrap()).unwrap().energy;
        assert_eq!(run.trace.len(), 200);
        assert!((run.final_energy - exact).abs() < 0.01 * exact.abs(), "{} vs {exact}", run.final_energy);
        assert_eq!(run.final_energy, run.exact_final_energy);
    }

    #[test]
    fn stationary_at_optimum() {
        let (h, groups) = pair(-1.0);
        let c = ansatz_circuit();
        // ADAM jitters at a scale set by lr, so anneal it
        let mut theta = None;
        for (lr, steps) in [(0.25, 200), (0.01, 2000), (1e-4, 2000)] {
            let cfg = VqeConfig {
                steps,
                adam: AdamConfig { lr, ..AdamConfig::default() },
                initial_theta: theta,
                ..VqeConfig::default()
            };
            theta = Some(run_vqe(&h, &groups, &c, &cfg).unwrap().theta);
        }
        let theta = theta.unwrap();
        let g = parameter_shift_gradient(&theta, |p| expectation_exact(&StateVector::prepare(&c, p)?, &h)).unwrap();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 1e-3, "gradient norm {norm}");
    }

    #[test]
    fn seeded_runs_are_identical() {
        let (h, groups) = pair(-1.0);
        let cfg = VqeConfig {
            steps: 5,
            seed: 7,
            evaluator: Evaluator::Sampled { shots: vec![256; groups.len()], noise: NoiseModel::new(0.1).unwrap() },
            ..VqeConfig::default()
        };
        let a = run_vqe(&h, &groups, &ansatz_circuit(), &cfg).unwrap();
        let b = run_vqe(&h, &groups, &ansatz_circuit(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = run_vqe(&h, &groups, &ansatz_circuit(), &VqeConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn wrong_shot_vector_is_rejected() {
        let (h, groups) = pair(-1.0);
        let cfg = VqeConfig {
            evaluator: Evaluator::Sampled { shots: vec![10], noise: NoiseModel::noiseless() },
            ..VqeConfig::default()
        };
        assert!(matches!(run_vqe(&h, &groups, &ansatz_circuit(), &cfg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fidelity_edge_cases() {
        assert_eq!(fidelity_from_counts(&[100, 0, 0, 0]).unwrap(), (1.0, 0.0));
        let (f, l) = fidelity_from_counts(&[5; 16]).unwrap();
        assert_abs_diff_eq!(f, 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l, 1.0, epsilon = 1e-15);
        assert!(fidelity_from_counts(&[0; 16]).is_err());
        assert!(fidelity_from_counts(&[1, 2, 3]).is_err());
    }

    #[test]
    fn fidelity_recovers_lambda() {
        let (h, groups) = pair(0.0);
        let z = groups.iter().find(|g| g.basis.is_diagonal()).unwrap();
        let state = StateVector::zero(4).unwrap();
        let mut rng = rng_stream(3, 1);
        let shots = 100_000;
        let m = crate::sim::measure_group(&state, &h, z, shots, NoiseModel::new(0.2).unwrap(), &mut rng).unwrap();
        let (f, lambda) = fidelity_from_counts(&m.counts).unwrap();
        let sd_f = (f * (1.0 - f) / shots as f64).sqrt();
        let sd = sd_f / (1.0 - 1.0 / 16.0);
        assert!((lambda - 0.2).abs() < 5.0 * sd, "lambda {lambda}, sd {sd}");
    }

    #[test]
    fn subtraction() {
        assert_eq!(dispersion_subtract(1.3, 1.3, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(dispersion_subtract(0.99, 1.0, 0.5).unwrap(), -0.02, epsilon = 1e-14);
        assert!(dispersion_subtract(0.0, 1.0, 1.0).is_err());
        assert!(dispersion_subtract(0.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn subtraction_undoes_depolarising_exactly() {
        // (1 - l) E + l Tr[H]/2^M for both points; the trace is gamma-independent
        let (h_r, _) = pair(-1.2);
        let (h_inf, _) = pair(0.0);
        let dim = 16.0;
        let tr_r = h_r.trace().re / dim;
        let tr_inf = h_inf.trace().re / dim;
        assert_abs_diff_eq!(tr_r, tr_inf, epsilon = 1e-12);
        let c = ansatz_circuit();
        let mut rng = rng_stream(5, 0);
        let theta: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let e_r = expectation_exact(&StateVector::prepare(&c, &theta).unwrap(), &h_r).unwrap();
        let e_inf = expectation_exact(&StateVector::zero(4).unwrap(), &h_inf).unwrap();
        for lambda in [0.0, 0.1, 0.3, 0.9] {
            let nr = (1.0 - lambda) * e_r + lambda * tr_r;
            let ni = (1.0 - lambda) * e_inf + lambda * tr_inf;
            assert_abs_diff_eq!(dispersion_subtract(nr, ni, lambda).unwrap(), e_r - e_inf, epsilon = 1e-12);
        }
    }
}
