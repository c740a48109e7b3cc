//! State-vector simulation, sampling and a global depolarising channel.
//!
//! Basis index `k` holds qubit `q` in bit `q` of `k`, matching
//! [`PauliString::apply_to_basis`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grouping::MeasurementGroup;
use crate::pauli::{Pauli, PauliString, PauliSum};

/// Largest register simulated densely.
pub const MAX_SIM_QUBITS: usize = 24;

/// Independent reproducible stream `stream` of the generator seeded by `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `exp(-i theta Z / 2)` with `theta = params[slot]`.
    Rz { qubit: usize, slot: usize },
    /// `exp(-i theta Y / 2)` with `theta = params[slot]`.
    Ry { qubit: usize, slot: usize },
    /// `Rz(pi/2)`.
    S(usize),
    Sdg(usize),
    /// `Ry(pi/2)`.
    R(usize),
    Rdg(usize),
    H(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Rz { qubit, .. } | Gate::Ry { qubit, .. } => (qubit, None),
            Gate::S(q) | Gate::Sdg(q) | Gate::R(q) | Gate::Rdg(q) | Gate::H(q) => (q, None),
            Gate::Cnot { control, target } => (control, Some(target)),
        }
    }

    fn slot(&self) -> Option<usize> {
        match *self {
            Gate::Rz { slot, .. } | Gate::Ry { slot, .. } => Some(slot),
            _ => None,
        }
    }
}

/// A gate list over `num_qubits` wires with `num_params` parameter slots.
/// Each slot drives at most one rotation, which keeps the two-term
/// parameter-shift rule exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    num_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_SIM_QUBITS {
            return domain(format!("circuit width {num_qubits} outside 1..={MAX_SIM_QUBITS}"));
        }
        Ok(Self { num_qubits, num_params: 0, gates: Vec::new() })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let (a, b) = gate.qubits();
        if a >= self.num_qubits || b.is_some_and(|b| b >= self.num_qubits || b == a) {
            return domain(format!("gate {gate:?} does not fit a {}-qubit circuit", self.num_qubits));
        }
        if let Some(slot) = gate.slot() {
            if self.gates.iter().any(|g| g.slot() == Some(slot)) {
                return domain(format!("parameter slot {slot} is already used"));
            }
            self.num_params = self.num_params.max(slot + 1);
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }
}

/// Real two-qubit block on `(a, b)` using slots `first..first + 4`; the
/// identity at zero angles.
///
/// The outer gates map the computational basis to the magic basis, where a
/// product of single-qubit rotations becomes a real orthogonal matrix. That
/// only holds with `R` on the CNOT control, so `R` sits on `a`.
pub fn so4_block(a: usize, b: usize, first: usize) -> Vec<Gate> {
    vec![
        Gate::S(a),
        Gate::S(b),
        Gate::R(a),
        Gate::Cnot { control: a, target: b },
        Gate::Ry { qubit: a, slot: first },
        Gate::Rz { qubit: a, slot: first + 1 },
        Gate::Ry { qubit: b, slot: first + 2 },
        Gate::Rz { qubit: b, slot: first + 3 },
        Gate::Cnot { control: a, target: b },
        Gate::Rdg(a),
        Gate::Sdg(a),
        Gate::Sdg(b),
    ]
}

/// Brick pattern of blocks: per layer, blocks on `(0,1), (2,3), ...` then
/// `(1,2), (3,4), ...`.
pub fn brick_ansatz(num_qubits: usize, layers: usize) -> Result<Circuit> {
    if num_qubits < 2 || layers == 0 {
        return domain("brick ansatz needs two qubits and one layer");
    }
    let mut c = Circuit::new(num_qubits)?;
    let mut slot = 0;
    for _ in 0..layers {
        for start in [0, 1] {
            let mut a = start;
            while a + 1 < num_qubits {
                c.extend(so4_block(a, a + 1, slot))?;
                slot += 4;
                a += 2;
            }
        }
    }
    Ok(c)
}

/// Four-qubit, twelve-parameter ansatz: blocks on (0,1) and (2,3), then (1,2).
pub fn ansatz_circuit() -> Circuit {
    brick_ansatz(4, 1).expect("fixed layout is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_SIM_QUBITS {
            return Err(Error::TooLarge { dim: num_qubits, limit: MAX_SIM_QUBITS });
        }
        let mut amps = vec![Complex64::default(); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() || amps.len() > 1 << MAX_SIM_QUBITS {
            return domain(format!("{} amplitudes is not a supported register size", amps.len()));
        }
        let s = Self { amps };
        if (s.norm() - 1.0).abs() > 1e-10 {
            return domain(format!("state norm {} differs from 1", s.norm()));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn apply_1q(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for k in 0..self.amps.len() {
            if k & bit == 0 {
                let (a0, a1) = (self.amps[k], self.amps[k | bit]);
                self.amps[k] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[k | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    fn apply_phase(&mut self, q: usize, p0: Complex64, p1: Complex64) {
        let bit = 1usize << q;
        for (k, a) in self.amps.iter_mut().enumerate() {
            *a *= if k & bit == 0 { p0 } else { p1 };
        }
    }

    fn apply_ry(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let (c, s) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
        self.apply_1q(q, [[c, -s], [s, c]]);
    }

    fn apply_rz(&mut self, q: usize, theta: f64) {
        let h = theta / 2.0;
        self.apply_phase(q, Complex64::from_polar(1.0, -h), Complex64::from_polar(1.0, h));
    }

    pub fn apply(&mut self, gate: &Gate, params: &[f64]) -> Result<()> {
        let n = self.num_qubits();
        let (a, b) = gate.qubits();
        if a >= n || b.is_some_and(|b| b >= n) {
            return Err(Error::DimensionMismatch { expected: n, found: a.max(b.unwrap_or(0)) + 1 });
        }
        let angle = |slot: usize| {
            params.get(slot).copied().ok_or(Error::DimensionMismatch { expected: slot + 1, found: params.len() })
        };
        match *gate {
            Gate::Rz { qubit, slot } => self.apply_rz(qubit, angle(slot)?),
            Gate::Ry { qubit, slot } => self.apply_ry(qubit, angle(slot)?),
            Gate::S(q) => self.apply_rz(q, FRAC_PI_2),
            Gate::Sdg(q) => self.apply_rz(q, -FRAC_PI_2),
            Gate::R(q) => self.apply_ry(q, FRAC_PI_2),
            Gate::Rdg(q) => self.apply_ry(q, -FRAC_PI_2),
            Gate::H(q) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                self.apply_1q(q, [[h, h], [h, -h]]);
            }
            Gate::Cnot { control, target } => {
                let (cb, tb) = (1usize << control, 1usize << target);
                for k in 0..self.amps.len() {
                    if k & cb != 0 && k & tb == 0 {
                        self.amps.swap(k, k | tb);
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs `circuit` from `|0...0>`.
    pub fn prepare(circuit: &Circuit, params: &[f64]) -> Result<Self> {
        if params.len() != circuit.num_params() {
            return Err(Error::DimensionMismatch { expected: circuit.num_params(), found: params.len() });
        }
        if let Some(bad) = params.iter().position(|t| !t.is_finite()) {
            return domain(format!("parameter {bad} is not finite"));
        }
        let mut s = Self::zero(circuit.num_qubits())?;
        for g in circuit.gates() {
            s.apply(g, params)?;
        }
        Ok(s)
    }

    /// Rotates every qubit so that a Z readout measures the basis letter.
    pub fn rotate_to(&mut self, basis: &PauliString) -> Result<()> {
        if basis.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), found: basis.num_qubits() });
        }
        for q in 0..basis.num_qubits() {
            match basis.letter(q) {
                Pauli::X => self.apply(&Gate::H(q), &[])?,
                Pauli::Y => {
                    self.apply(&Gate::Sdg(q), &[])?;
                    self.apply(&Gate::H(q), &[])?;
                }
                Pauli::Z | Pauli::I => {}
            }
        }
        Ok(())
    }
}

/// `<psi|H|psi>`; the real part for a Hermitian sum.
pub fn expectation_exact(state: &StateVector, h: &PauliSum) -> Result<f64> {
    if h.num_qubits() != state.num_qubits() {
        return Err(Error::DimensionMismatch { expected: state.num_qubits(), found: h.num_qubits() });
    }
    let amps = state.amplitudes();
    let mut e = Complex64::default();
    for (p, c) in h.iter() {
        let mut t = Complex64::default();
        for (k, a) in amps.iter().enumerate() {
            let (phase, j) = p.apply_to_basis(k);
            t += amps[j].conj() * phase * a;
        }
        e += c * t;
    }
    Ok(e.re)
}

/// Global depolarising channel applied once to the final state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    lambda: f64,
}

impl NoiseModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return domain(format!("depolarising rate must lie in [0, 1], got {lambda}"));
        }
        Ok(Self { lambda })
    }

    pub fn noiseless() -> Self {
        Self { lambda: 0.0 }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Draws `shots` outcomes from `probs` by sequential binomials, returning a
/// dense count vector.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; probs.len()];
    let mut left = shots;
    let mut mass = probs.iter().sum::<f64>();
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == probs.len() || mass <= 0.0 {
            counts[k] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let n = Binomial::new(left, q).map_err(|e| Error::Domain(e.to_string()))?.sample(rng);
        counts[k] = n;
        left -= n;
        mass -= p;
    }
    Ok(counts)
}

/// Readout of one group: raw counts in the rotated basis and a parity mean
/// per member (identity members always read `1`).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeasurement {
    pub counts: Vec<u64>,
    pub shots: u64,
    /// `(term index, mean parity)` per member.
    pub estimates: Vec<(usize, f64)>,
}

pub fn measure_group<R: Rng + ?Sized>(
    state: &StateVector,
    h: &PauliSum,
    group: &MeasurementGroup,
    shots: u64,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<GroupMeasurement> {
    if shots == 0 {
        return domain("need at least one shot");
    }
    let terms = h.terms();
    for &m in &group.members {
        let Some((p, _)) = terms.get(m) else {
            return domain(format!("group member {m} is not a term index"));
        };
        if !group.covers(p) {
            return domain(format!("basis {} does not cover {p}", group.basis));
        }
    }
    let mut rotated = state.clone();
    rotated.rotate_to(&group.basis)?;
    let dim = rotated.amps.len();
    let noisy = if noise.lambda > 0.0 {
        Binomial::new(shots, noise.lambda).map_err(|e| Error::Domain(e.to_string()))?.sample(rng)
    } else {
        0
    };
    let mut counts = sample_counts(&rotated.probabilities(), shots - noisy, rng)?;
    for _ in 0..noisy {
        counts[rng.random_range(0..dim)] += 1;
    }
    let estimates = group
        .members
        .iter()
        .map(|&m| {
            let support = terms[m].0.support() as usize;
            let signed: i64 = counts
                .iter()
                .enumerate()
                .map(|(k, &c)| if (k & support).count_ones() % 2 == 0 { c as i64 } else { -(c as i64) })
                .sum();
            (m, signed as f64 / shots as f64)
        })
        .collect();
    Ok(GroupMeasurement { counts, shots, estimates })
}

/// Sampled energy and the raw readouts it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySample {
    pub energy: f64,
    pub groups: Vec<GroupMeasurement>,
}

/// `sum_g sum_{i in g} a_i * estimate_i` with `shots[g]` shots for group `g`.
pub fn estimate_energy<R: Rng + ?Sized>(
    state: &StateVector,
    h: &PauliSum,
    groups: &[MeasurementGroup],
    shots: &[u64],
    noise: NoiseModel,
    rng: &mut R,
) -> Result<EnergySample> {
    if shots.len() != groups.len() {
        return Err(Error::DimensionMismatch { expected: groups.len(), found: shots.len() });
    }
    let terms = h.terms();
    let mut energy = 0.0;
    let mut out = Vec::with_capacity(groups.len());
    for (g, &s) in groups.iter().zip(shots) {
        let m = measure_group(state, h, g, s, noise, rng)?;
        energy += m.estimates.iter().map(|&(i, e)| terms[i].1.re * e).sum::<f64>();
        out.push(m);
    }
    Ok(EnergySample { energy, groups: out })
}
