//! Dipole-coupled oscillator Hamiltonians.
//!
//! All energies are in units of `hbar*omega/2`. In those units a single
//! oscillator contributes `x^2 + p^2` and an edge `(i, j, gamma)` contributes
//! `gamma * x_i * x_j`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::encoding::{
    decompose_position, embed, matrix_to_pauli_real, number_diag_pauli, position_op, qubits_for_dim,
    FockMatrix, RegisterMap, Slot,
};
use crate::error::{domain, Error, Result};
use crate::pauli::PauliSum;

/// `|gamma|` at which one normal mode loses its restoring force.
pub const DISSOCIATION_GAMMA: f64 = 2.0;

/// Intermolecular separation; `Infinite` is the decoupled reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Separation {
    Finite(f64),
    Infinite,
}

impl Separation {
    pub fn new(r: f64) -> Result<Self> {
        if r == f64::INFINITY {
            return Ok(Separation::Infinite);
        }
        if !r.is_finite() || r <= 0.0 {
            return domain(format!("separation must be positive, got {r}"));
        }
        Ok(Separation::Finite(r))
    }

    /// `1/R^3`, zero at infinity.
    pub fn inverse_cube(self) -> f64 {
        match self {
            Separation::Finite(r) => r.powi(-3),
            Separation::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Separation::Infinite)
    }

    pub fn value(self) -> f64 {
        match self {
            Separation::Finite(r) => r,
            Separation::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Separation::Finite(r) => write!(f, "{r}"),
            Separation::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Separation {
    type Err = Error;

    /// Accepts a positive decimal number or the literal `inf`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") {
            return Ok(Separation::Infinite);
        }
        let r: f64 = t.parse().map_err(|_| Error::Parse(format!("invalid separation {s:?}")))?;
        if !r.is_finite() {
            return Err(Error::Parse(format!("invalid separation {s:?}")));
        }
        Separation::new(r).map_err(|e| Error::Parse(e.to_string()))
    }
}

// Finite separations serialise as numbers, the sentinel as "inf".
impl Serialize for Separation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Separation::Finite(r) => s.serialize_f64(*r),
            Separation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Separation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(r) => Separation::new(r),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Parses a comma separated list such as `3.5,4,inf`.
pub fn parse_separation_grid(s: &str) -> Result<Vec<Separation>> {
    if s.trim().is_empty() {
        return Err(Error::Parse("empty separation grid".into()));
    }
    s.split(',').map(str::parse).collect()
}

/// End-on (parallel) coupling `gamma = -4 alpha / R^3`, alpha in cubic angstrom.
pub fn coupling_parallel(alpha: f64, r: Separation) -> Result<f64> {
    check_alpha(alpha)?;
    if r.is_infinite() {
        return Ok(0.0);
    }
    Ok(-4.0 * alpha * r.inverse_cube())
}

/// Side-by-side (perpendicular) coupling `gamma = 2 alpha / R^3`.
pub fn coupling_perpendicular(alpha: f64, r: Separation) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 * alpha * r.inverse_cube())
}

/// Separation at which the parallel coupling reaches `gamma`.
pub fn separation_for_parallel_coupling(alpha: f64, gamma: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(gamma < 0.0) {
        return domain("parallel coupling is negative");
    }
    Ok((4.0 * alpha / -gamma).cbrt())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return domain(format!("polarisability must be positive, got {alpha}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub gamma: f64,
}

/// Oscillators and their pairwise couplings. Edges are stored with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl CouplingGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return domain("graph needs at least one oscillator");
        }
        let mut seen = BTreeMap::new();
        for (a, b, gamma) in edges {
            if a == b {
                return domain(format!("self-loop on oscillator {a}"));
            }
            let (i, j) = (a.min(b), a.max(b));
            if j >= n {
                return domain(format!("edge ({a}, {b}) references an oscillator >= {n}"));
            }
            if !gamma.is_finite() {
                return domain(format!("non-finite coupling on edge ({a}, {b})"));
            }
            if seen.insert((i, j), gamma).is_some() {
                return domain(format!("duplicate edge ({i}, {j})"));
            }
        }
        let edges = seen.into_iter().map(|((i, j), gamma)| Edge { i, j, gamma }).collect();
        Ok(Self { n, edges })
    }

    /// Complete graph with one coupling on every pair.
    pub fn complete(n: usize, gamma: f64) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, gamma))))
    }

    pub fn uncoupled(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn gamma(&self, i: usize, j: usize) -> Option<f64> {
        let (i, j) = (i.min(j), i.max(j));
        self.edges.iter().find(|e| e.i == i && e.j == j).map(|e| e.gamma)
    }

    /// Edges with `|gamma| >= 2`.
    pub fn dissociative_edges(&self) -> Vec<Edge> {
        self.edges.iter().copied().filter(|e| e.gamma.abs() >= DISSOCIATION_GAMMA).collect()
    }

    pub fn is_physical(&self) -> bool {
        self.dissociative_edges().is_empty()
    }

    /// Copy without zero-coupling edges.
    pub fn without_zero_edges(&self) -> Self {
        Self { n: self.n, edges: self.edges.iter().copied().filter(|e| e.gamma != 0.0).collect() }
    }
}

/// `coeff * prod x_osc^power`, with truncated powers of the truncated `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub factors: Vec<(usize, u32)>,
    pub coeff: f64,
}

impl Monomial {
    pub fn new(factors: Vec<(usize, u32)>, coeff: f64) -> Self {
        Self { factors, coeff }
    }

    /// Factors merged per oscillator, zero powers dropped, sorted by index.
    pub fn normalized_factors(&self) -> Vec<(usize, u32)> {
        let mut by_osc = BTreeMap::new();
        for &(osc, p) in &self.factors {
            *by_osc.entry(osc).or_insert(0u32) += p;
        }
        by_osc.into_iter().filter(|&(_, p)| p > 0).collect()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !self.coeff.is_finite() {
            return domain("non-finite monomial coefficient");
        }
        for &(osc, p) in &self.factors {
            if osc >= n {
                return domain(format!("monomial references oscillator {osc} >= {n}"));
            }
            if p == 0 {
                return domain("monomial powers must be >= 1");
            }
        }
        Ok(())
    }
}

/// A one-dimensional oscillator model ready for encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRecord", into = "SpecRecord")]
pub struct HamiltonianSpec {
    d: usize,
    graph: CouplingGraph,
    extra: Vec<Monomial>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRecord {
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(default)]
    edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    extra: Vec<Monomial>,
}

impl TryFrom<SpecRecord> for HamiltonianSpec {
    type Error = Error;

    fn try_from(r: SpecRecord) -> Result<Self> {
        HamiltonianSpec::new(r.d, CouplingGraph::new(r.n, r.edges)?, r.extra)
    }
}

impl From<HamiltonianSpec> for SpecRecord {
    fn from(s: HamiltonianSpec) -> Self {
        SpecRecord {
            d: s.d,
            n: s.graph.n,
            edges: s.graph.edges.iter().map(|e| (e.i, e.j, e.gamma)).collect(),
            extra: s.extra,
        }
    }
}

impl HamiltonianSpec {
    pub fn new(d: usize, graph: CouplingGraph, extra: Vec<Monomial>) -> Result<Self> {
        let m = qubits_for_dim(d)?;
        let qubits = m * graph.n();
        if qubits > crate::pauli::MAX_QUBITS {
            return Err(Error::TooLarge { dim: qubits, limit: crate::pauli::MAX_QUBITS });
        }
        for mono in &extra {
            mono.validate(graph.n())?;
        }
        Ok(Self { d, graph, extra })
    }

    /// Two oscillators with a single coupling.
    pub fn pair(d: usize, gamma: f64) -> Result<Self> {
        Self::new(d, CouplingGraph::new(2, [(0, 1, gamma)])?, Vec::new())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn bits(&self) -> usize {
        self.d.trailing_zeros() as usize
    }

    pub fn num_qubits(&self) -> usize {
        self.bits() * self.n()
    }

    pub fn graph(&self) -> &CouplingGraph {
        &self.graph
    }

    pub fn extra(&self) -> &[Monomial] {
        &self.extra
    }

    pub fn register_map(&self) -> RegisterMap {
        RegisterMap::new(self.n(), self.bits(), 1).expect("validated at construction")
    }

    pub fn is_dissociative(&self) -> bool {
        !self.graph.is_physical()
    }

    pub fn with_extra(mut self, extra: impl IntoIterator<Item = Monomial>) -> Result<Self> {
        for mono in extra {
            mono.validate(self.n())?;
            self.extra.push(mono);
        }
        Ok(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Pauli form of the model: number terms, `gamma x (x) x` edges, then extras.
pub fn build_1d_hamiltonian(spec: &HamiltonianSpec) -> Result<PauliSum> {
    let map = spec.register_map();
    let m = spec.bits();
    let mut h = PauliSum::zero(map.num_qubits())?;
    let number = number_diag_pauli(m)?;
    for i in 0..spec.n() {
        h.add(&embed(&number, &map, &[Slot::new(i)])?)?;
    }
    if !spec.graph.edges.is_empty() {
        let x = decompose_position(spec.d)?;
        let xx = x.tensor(&x)?;
        for e in &spec.graph.edges {
            h.add(&embed(&xx, &map, &[Slot::new(e.i), Slot::new(e.j)])?.scaled(e.gamma.into()))?;
        }
    }
    let mut powers: BTreeMap<u32, PauliSum> = BTreeMap::new();
    for mono in &spec.extra {
        let mut term = PauliSum::identity(map.num_qubits(), mono.coeff)?;
        for (osc, p) in mono.normalized_factors() {
            if !powers.contains_key(&p) {
                let xp = position_op(spec.d)?.pow(p);
                powers.insert(p, matrix_to_pauli_real(xp.matrix())?);
            }
            term = term.mul(&embed(&powers[&p], &map, &[Slot::new(osc)])?)?;
        }
        h.add(&term)?;
    }
    h.simplify();
    Ok(h)
}

/// `op` acting on oscillator `osc` of `n`, identity elsewhere; oscillator `i`
/// carries index weight `d^i`.
fn kron_single(op: &DMatrix<f64>, osc: usize, n: usize) -> DMatrix<f64> {
    let d = op.nrows();
    let low = d.pow(osc as u32);
    let high = d.pow((n - osc - 1) as u32);
    DMatrix::<f64>::identity(high, high).kronecker(op).kronecker(&DMatrix::<f64>::identity(low, low))
}

/// Dense truncated matrix assembled directly from Fock-space operators,
/// without any Pauli algebra.
pub fn dense_matrix(spec: &HamiltonianSpec) -> Result<DMatrix<f64>> {
    let n = spec.n();
    let dim = (spec.d as u128).pow(n as u32);
    if dim > 1 << 14 {
        return Err(Error::TooLarge { dim: dim as usize, limit: 1 << 14 });
    }
    let dim = dim as usize;
    let num = FockMatrix::number_term(spec.d)?.into_matrix();
    let x = position_op(spec.d)?;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n {
        h += kron_single(&num, i, n);
    }
    for e in &spec.graph.edges {
        h += (kron_single(x.matrix(), e.i, n) * kron_single(x.matrix(), e.j, n)) * e.gamma;
    }
    for mono in &spec.extra {
        let mut t = DMatrix::identity(dim, dim) * mono.coeff;
        for (osc, p) in mono.normalized_factors() {
            t *= kron_single(x.pow(p).matrix(), osc, n);
        }
        h += t;
    }
    Ok(h)
}

/// Polarisability triple and trapping quantum of one oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// `(alpha_xx, alpha_yy, alpha_zz)` in cubic angstrom.
    pub alpha: [f64; 3],
    /// Trapping quantum in eV.
    pub hbar_omega: f64,
}

impl OscillatorParams {
    pub fn new(alpha: [f64; 3], hbar_omega: f64) -> Result<Self> {
        for a in alpha {
            if !a.is_finite() || a < 0.0 {
                return domain(format!("polarisability components must be >= 0, got {a}"));
            }
        }
        if alpha.iter().all(|&a| a == 0.0) {
            return domain("polarisability must be positive along some axis");
        }
        if !hbar_omega.is_finite() || hbar_omega <= 0.0 {
            return domain(format!("trapping quantum must be positive, got {hbar_omega}"));
        }
        Ok(Self { alpha, hbar_omega })
    }

    pub fn isotropic(alpha: f64, hbar_omega: f64) -> Result<Self> {
        Self::new([alpha; 3], hbar_omega)
    }

    /// Polarisability from charge, mass and frequency, `q^2 / (mu omega^2)`.
    pub fn from_drude(q: f64, mu: f64, omega: f64, hbar_omega: f64) -> Result<Self> {
        if !(mu > 0.0 && omega > 0.0) {
            return domain("mass and frequency must be positive");
        }
        Self::isotropic(q * q / (mu * omega * omega), hbar_omega)
    }
}

/// Splits a pair separated along `z` into three one-dimensional problems
/// `[x, y, z]`. With different polarisabilities the per-axis coupling uses
/// the geometric mean `sqrt(alpha_a alpha_b)`.
pub fn build_3d_pair(
    a: &OscillatorParams,
    b: &OscillatorParams,
    r: Separation,
    d: usize,
) -> Result<[HamiltonianSpec; 3]> {
    if (a.hbar_omega - b.hbar_omega).abs() > 1e-12 * a.hbar_omega.max(b.hbar_omega) {
        return domain("both oscillators must share one trapping frequency");
    }
    let inv = r.inverse_cube();
    let axis = |k: usize, factor: f64| -> Result<HamiltonianSpec> {
        let gamma = factor * (a.alpha[k] * b.alpha[k]).sqrt() * inv;
        let edges: Vec<_> = if gamma == 0.0 { vec![] } else { vec![(0, 1, gamma)] };
        HamiltonianSpec::new(d, CouplingGraph::new(2, edges)?, Vec::new())
    };
    Ok([axis(0, 2.0)?, axis(1, 2.0)?, axis(2, -4.0)?])
}

/// The three axis problems on one register of `2 * 3 * m` qubits, laid out
/// by [`RegisterMap`] with three axes.
pub fn build_3d_hamiltonian(axes: &[HamiltonianSpec; 3]) -> Result<PauliSum> {
    let d = axes[0].d();
    if axes.iter().any(|s| s.d() != d || s.n() != axes[0].n()) {
        return domain("axis problems must share d and N");
    }
    let map = RegisterMap::new(axes[0].n(), axes[0].bits(), 3)?;
    let mut h = PauliSum::zero(map.num_qubits())?;
    for (k, spec) in axes.iter().enumerate() {
        let part = build_1d_hamiltonian(spec)?;
        let slots: Vec<Slot> = (0..spec.n()).map(|i| Slot { oscillator: i, axis: k }).collect();
        // the 1D register is a concatenation of per-oscillator registers
        h.add(&embed(&part, &map, &slots)?)?;
    }
    h.simplify();
    Ok(h)
}

/// Taylor coefficients of `1/(r - x)` about `x = 0` up to `x^(w-1)`, as
/// monomials on `oscillator`.
pub fn coulomb_taylor(oscillator: usize, r: f64, w: u32) -> Result<Vec<Monomial>> {
    if !r.is_finite() || r <= 0.0 {
        return domain(format!("distance must be positive, got {r}"));
    }
    if w == 0 {
        return domain("expansion order must be >= 1");
    }
    Ok((0..w)
        .map(|k| {
            let factors = if k == 0 { vec![] } else { vec![(oscillator, k)] };
            Monomial::new(factors, r.powi(-(k as i32 + 1)))
        })
        .collect())
}

/// Two coupled oscillators with cubic, mixed cubic and quartic extras.
pub fn example_extended_hamiltonian(gamma: f64, d: usize) -> Result<HamiltonianSpec> {
    let graph = if gamma == 0.0 { CouplingGraph::uncoupled(2)? } else { CouplingGraph::new(2, [(0, 1, gamma)])? };
    let extra = vec![
        Monomial::new(vec![(0, 3)], gamma / 2.0),
        Monomial::new(vec![(1, 3)], gamma / 2.0),
        Monomial::new(vec![(0, 2), (1, 1)], gamma / 4.0),
        Monomial::new(vec![(0, 1), (1, 2)], gamma / 4.0),
        Monomial::new(vec![(0, 4)], 0.1),
        Monomial::new(vec![(1, 4)], 0.1),
    ];
    let extra = extra.into_iter().filter(|m| m.coeff != 0.0).collect();
    HamiltonianSpec::new(d, graph, extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn ground(m: DMatrix<f64>) -> f64 {
        SymmetricEigen::new(m).eigenvalues.min()
    }

    #[test]
    fn couplings() {
        let r4 = Separation::new(4.0).unwrap();
        assert_abs_diff_eq!(coupling_parallel(14.5, r4).unwrap(), -0.90625, epsilon = 1e-15);
        assert_abs_diff_eq!(coupling_perpendicular(14.5, r4).unwrap(), 0.453125, epsilon = 1e-15);
        assert_eq!(coupling_parallel(14.5, Separation::Infinite).unwrap(), 0.0);
        assert_eq!(coupling_perpendicular(14.5, Separation::Infinite).unwrap(), 0.0);
        let r = separation_for_parallel_coupling(14.5, -1.55).unwrap();
        assert_abs_diff_eq!(r, 3.344, epsilon = 1e-3);
        let back = coupling_parallel(14.5, Separation::new(r).unwrap()).unwrap();
        assert_abs_diff_eq!(back, -1.55, epsilon = 1e-12);
        assert!(Separation::new(0.0).is_err());
        assert!(Separation::new(-1.0).is_err());
    }

    #[test]
    fn separation_parsing() {
        assert_eq!("inf".parse::<Separation>().unwrap(), Separation::Infinite);
        assert_eq!(" INF ".parse::<Separation>().unwrap(), Separation::Infinite);
        assert_eq!("3.5".parse::<Separation>().unwrap(), Separation::Finite(3.5));
        assert!("0".parse::<Separation>().is_err());
        assert!("nan".parse::<Separation>().is_err());
        assert!("-inf".parse::<Separation>().is_err());
        assert!("abc".parse::<Separation>().is_err());
        let grid = parse_separation_grid("3.5,4,inf").unwrap();
        assert_eq!(grid.len(), 3);
        assert!(parse_separation_grid("").is_err());
        assert!(parse_separation_grid("3,,4").is_err());
    }

    #[test]
    fn separation_json() {
        let grid: Vec<Separation> = serde_json::from_str(r#"[3.5, "4", "inf"]"#).unwrap();
        assert_eq!(grid, vec![Separation::Finite(3.5), Separation::Finite(4.0), Separation::Infinite]);
        assert_eq!(serde_json::to_string(&grid).unwrap(), r#"[3.5,4.0,"inf"]"#);
        assert!(serde_json::from_str::<Separation>("-1").is_err());
        assert!(serde_json::from_str::<Separation>("null").is_err());
    }

    #[test]
    fn graph_validation() {
        assert!(CouplingGraph::new(2, [(0, 0, 1.0)]).is_err());
        assert!(CouplingGraph::new(2, [(0, 1, 1.0), (1, 0, 1.0)]).is_err());
        assert!(CouplingGraph::new(2, [(0, 2, 1.0)]).is_err());
        let g = CouplingGraph::new(3, [(2, 0, 2.5), (0, 1, 0.5)]).unwrap();
        assert_eq!(g.edges()[0], Edge { i: 0, j: 1, gamma: 0.5 });
        assert_eq!(g.gamma(2, 0), Some(2.5));
        assert!(!g.is_physical());
        assert_eq!(CouplingGraph::complete(5, 1.0).unwrap().edges().len(), 10);
    }

    #[test]
    fn single_uncoupled_oscillator() {
        let spec = HamiltonianSpec::new(2, CouplingGraph::uncoupled(1).unwrap(), vec![]).unwrap();
        let h = build_1d_hamiltonian(&spec).unwrap();
        assert_eq!(h.len(), 2);
        assert_abs_diff_eq!(h.coefficient(&"I".parse().unwrap()).re, 2.0);
        assert_abs_diff_eq!(h.coefficient(&"Z".parse().unwrap()).re, -1.0);
    }

    #[test]
    fn pair_term_count() {
        let h = build_1d_hamiltonian(&HamiltonianSpec::pair(4, -0.7).unwrap()).unwrap();
        assert_eq!(h.len(), 21);
        assert_eq!(h.non_identity_len(), 20);
    }

    #[test]
    fn pauli_route_equals_dense_route() {
        let specs = [
            HamiltonianSpec::pair(2, 0.3).unwrap(),
            HamiltonianSpec::pair(8, -1.2).unwrap(),
            HamiltonianSpec::new(4, CouplingGraph::new(3, [(0, 1, 0.4), (1, 2, -0.9), (0, 2, 0.1)]).unwrap(), vec![])
                .unwrap(),
            HamiltonianSpec::new(8, CouplingGraph::new(3, [(0, 2, 0.7)]).unwrap(), vec![]).unwrap(),
            example_extended_hamiltonian(0.6, 4).unwrap(),
            example_extended_hamiltonian(1.0, 8).unwrap(),
        ];
        for spec in specs {
            let h = build_1d_hamiltonian(&spec).unwrap();
            assert!(h.is_hermitian(1e-12));
            let a = h.to_matrix().map(|c| c.re);
            let b = dense_matrix(&spec).unwrap();
            assert!((a - b).abs().max() < 1e-10);
        }
    }

    #[test]
    fn pair_ground_energy_converges() {
        let e = ground(dense_matrix(&HamiltonianSpec::pair(32, 1.0).unwrap()).unwrap());
        assert_abs_diff_eq!(e, 1.5f64.sqrt() + 0.5f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn trace_independent_of_coupling() {
        for (n, d) in [(2, 2), (2, 4), (3, 4), (4, 2)] {
            for gamma in [0.0, 0.8, -1.9] {
                let spec = HamiltonianSpec::new(d, CouplingGraph::complete(n, gamma).unwrap(), vec![]).unwrap();
                let h = build_1d_hamiltonian(&spec).unwrap();
                let m = h.num_qubits() as f64;
                assert_abs_diff_eq!(h.trace().re / m.exp2(), (n * d) as f64, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn three_d_reduction() {
        let p = OscillatorParams::isotropic(14.5, 9.61).unwrap();
        let r = Separation::new(5.0).unwrap();
        let axes = build_3d_pair(&p, &p, r, 4).unwrap();
        let g: Vec<f64> = axes.iter().map(|s| s.graph().gamma(0, 1).unwrap()).collect();
        assert_abs_diff_eq!(g[0], 2.0 * 14.5 / 125.0);
        assert_abs_diff_eq!(g[1], g[0]);
        assert_abs_diff_eq!(g[2], -2.0 * g[0]);
        let total: f64 = axes.iter().map(|s| ground(dense_matrix(s).unwrap())).sum();
        let full = build_3d_hamiltonian(&axes).unwrap();
        assert_eq!(full.num_qubits(), 12);
        assert_abs_diff_eq!(full.trace().re / 4096.0, 3.0 * 2.0 * 4.0, epsilon = 1e-9);
        // one-axis block of the 3D register reproduces the per-axis problem
        let z_only = build_1d_hamiltonian(&axes[2]).unwrap();
        for (p, c) in z_only.iter().filter(|(p, _)| !p.is_identity()) {
            let mut q = PauliString::identity(12).unwrap();
            for b in 0..2 {
                q.set(4 + b, p.letter(b));
                q.set(10 + b, p.letter(2 + b));
            }
            assert_abs_diff_eq!(full.coefficient(&q).re, c.re, epsilon = 1e-14);
        }
        assert!(total < 6.0);

        let far = build_3d_pair(&p, &p, Separation::Infinite, 4).unwrap();
        let e: f64 = far.iter().map(|s| ground(dense_matrix(s).unwrap())).sum();
        assert_abs_diff_eq!(e, 6.0, epsilon = 1e-12);

        let linear = OscillatorParams::new([0.0, 0.0, 14.5], 9.61).unwrap();
        let axes = build_3d_pair(&linear, &linear, r, 4).unwrap();
        assert!(axes[0].graph().edges().is_empty());
        assert!(axes[1].graph().edges().is_empty());
        assert_abs_diff_eq!(axes[2].graph().gamma(0, 1).unwrap(), coupling_parallel(14.5, r).unwrap());
        let other = OscillatorParams::isotropic(14.5, 5.0).unwrap();
        assert!(build_3d_pair(&p, &other, r, 4).is_err());
    }

    #[test]
    fn coulomb_expansion() {
        let t = coulomb_taylor(0, 2.0, 3).unwrap();
        let c: Vec<f64> = t.iter().map(|m| m.coeff).collect();
        assert_eq!(c, vec![0.5, 0.25, 0.125]);
        assert!(t[0].factors.is_empty());
        assert_eq!(t[2].factors, vec![(0, 2)]);
        let t = coulomb_taylor(1, 1.0, 2).unwrap();
        assert_eq!(t[1].factors, vec![(1, 1)]);
        assert!(coulomb_taylor(0, 0.0, 2).is_err());
        assert!(coulomb_taylor(0, 1.0, 0).is_err());
    }

    #[test]
    fn extended_model_uncoupled_limit() {
        let spec = example_extended_hamiltonian(0.0, 4).unwrap();
        assert!(spec.graph().edges().is_empty());
        let h = build_1d_hamiltonian(&spec).unwrap();
        assert!(h.is_hermitian(1e-14));
        let one = DMatrix::from_diagonal(&FockMatrix::number_term(4).unwrap().into_matrix().diagonal())
            + position_op(4).unwrap().pow(4).into_matrix() * 0.1;
        let e1 = ground(one);
        assert_abs_diff_eq!(ground(dense_matrix(&spec).unwrap()), 2.0 * e1, epsilon = 1e-10);
    }

    #[test]
    fn spec_json() {
        let js = r#"{"d":4,"N":2,"edges":[[0,1,-1.55]],"extra":[{"factors":[[0,3]],"coeff":0.5}]}"#;
        let spec = HamiltonianSpec::from_json(js).unwrap();
        assert_eq!(spec.d(), 4);
        assert_eq!(spec.extra().len(), 1);
        let again = HamiltonianSpec::from_json(&spec.to_json().unwrap()).unwrap();
        assert_eq!(spec, again);
        assert!(HamiltonianSpec::from_json(r#"{"d":3,"N":2}"#).is_err());
        assert!(HamiltonianSpec::from_json(r#"{"d":4,"N":2,"edges":[[0,2,1.0]]}"#).is_err());
        assert!(HamiltonianSpec::from_json(r#"{"d":4,"N":2,"extra":[{"factors":[[0,0]],"coeff":1}]}"#).is_err());
        assert!(HamiltonianSpec::from_json(r#"{"d":4,"N":2,"bogus":1}"#).is_err());
        assert!(HamiltonianSpec::from_json(r#"{"d":4,"N":0}"#).is_err());
        let dis = HamiltonianSpec::from_json(r#"{"d":4,"N":2,"edges":[[0,1,2.0]]}"#).unwrap();
        assert!(dis.is_dissociative());
    }
}
