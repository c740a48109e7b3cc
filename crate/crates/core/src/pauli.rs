//! Pauli strings and weighted Pauli sums.
//!
//! A [`PauliString`] stores its letters as a pair of bit masks: qubit `q`
//! carries `X` when only bit `q` of `x` is set, `Z` when only bit `q` of `z`
//! is set and `Y` when both are. Letters print qubit-0-first, so `"XIZ"` has
//! `X` on qubit 0 and `Z` on qubit 2.
//!
//! Computational basis states are indexed little-endian: qubit `q` is bit `q`
//! of the basis index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest register a [`PauliString`] can describe.
pub const MAX_QUBITS: usize = 64;

/// Coefficients at or below this magnitude are dropped by [`PauliSum::simplify`].
pub const PRUNE_TOLERANCE: f64 = 1e-12;

const I_UNIT: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// A phase-free tensor product of single-qubit Pauli letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    num_qubits: usize,
    x: u64,
    z: u64,
}

fn mask(num_qubits: usize) -> u64 {
    if num_qubits == MAX_QUBITS {
        u64::MAX
    } else {
        (1u64 << num_qubits) - 1
    }
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::Domain(format!(
                "{num_qubits} qubits exceeds the supported maximum of {MAX_QUBITS}"
            )));
        }
        Ok(Self { num_qubits, x: 0, z: 0 })
    }

    /// Builds a string from raw masks; bits beyond `num_qubits` must be clear.
    pub fn from_masks(num_qubits: usize, x: u64, z: u64) -> Result<Self> {
        let id = Self::identity(num_qubits)?;
        let m = mask(num_qubits);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::Domain("mask has bits beyond the register".into()));
        }
        Ok(Self { x, z, ..id })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        let mut p = Self::identity(letters.len())?;
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        Ok(p)
    }

    /// A single letter on qubit `qubit`, identity elsewhere.
    pub fn single(num_qubits: usize, qubit: usize, letter: Pauli) -> Result<Self> {
        if qubit >= num_qubits {
            return Err(Error::Domain(format!("qubit {qubit} outside a {num_qubits}-qubit register")));
        }
        let mut p = Self::identity(num_qubits)?;
        p.set(qubit, letter);
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        debug_assert!(qubit < self.num_qubits);
        Pauli::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, letter: Pauli) {
        assert!(qubit < self.num_qubits, "qubit {qubit} out of range");
        let (bx, bz) = letter.bits();
        let bit = 1u64 << qubit;
        self.x = if bx { self.x | bit } else { self.x & !bit };
        self.z = if bz { self.z | bit } else { self.z & !bit };
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.num_qubits).map(|q| self.letter(q)).collect()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    /// True when every letter is `I` or `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Ordinary product `self * other = phase * P`.
    pub fn mul(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        self.check_len(other)?;
        let mut phase = Complex64::new(1.0, 0.0);
        let overlap = self.support() & other.support();
        let mut bits = overlap;
        while bits != 0 {
            let q = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            phase *= letter_product_phase(self.letter(q), other.letter(q));
        }
        Ok((
            phase,
            PauliString { num_qubits: self.num_qubits, x: self.x ^ other.x, z: self.z ^ other.z },
        ))
    }

    /// Full (not qubit-wise) commutation.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(anti % 2 == 0)
    }

    /// True when at every qubit the letters agree or one of them is `I`.
    pub fn qubit_wise_commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        let both = self.support() & other.support();
        Ok((self.x ^ other.x) & both == 0 && (self.z ^ other.z) & both == 0)
    }

    /// `P|k> = phase |k'>`.
    pub fn apply_to_basis(&self, k: usize) -> (Complex64, usize) {
        let sign = if ((k as u64) & self.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let phase = i_pow(self.y_count()) * sign;
        (phase, k ^ self.x as usize)
    }

    /// Concatenation: `self` on the low qubits, `other` after it.
    pub fn tensor(&self, other: &PauliString) -> Result<PauliString> {
        let n = self.num_qubits + other.num_qubits;
        let id = Self::identity(n)?;
        let shift = self.num_qubits as u32;
        Ok(PauliString {
            x: self.x | other.x.checked_shl(shift).unwrap_or(0),
            z: self.z | other.z.checked_shl(shift).unwrap_or(0),
            ..id
        })
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.num_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let (phase, j) = self.apply_to_basis(k);
            m[(j, k)] = phase;
        }
        m
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, found: other.num_qubits });
        }
        Ok(())
    }
}

fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn letter_product_phase(a: Pauli, b: Pauli) -> Complex64 {
    use Pauli::*;
    match (a, b) {
        (X, Y) | (Y, Z) | (Z, X) => I_UNIT,
        (Y, X) | (Z, Y) | (X, Z) => -I_UNIT,
        _ => Complex64::new(1.0, 0.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses letters qubit-0-first. The empty string is rejected.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let letters = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Parse(format!("invalid Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_letters(&letters).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// A weighted sum of Pauli strings over a fixed register.
///
/// Terms are kept in a sorted map, so iteration order (and therefore the term
/// indices used by measurement groups) is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        PauliString::identity(num_qubits)?;
        Ok(Self { num_qubits, terms: BTreeMap::new() })
    }

    pub fn identity(num_qubits: usize, coeff: f64) -> Result<Self> {
        let mut s = Self::zero(num_qubits)?;
        s.add_term(PauliString::identity(num_qubits)?, coeff.into())?;
        Ok(s)
    }

    pub fn from_term(p: PauliString, coeff: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(p, coeff);
        Self { num_qubits: p.num_qubits(), terms }
    }

    pub fn from_terms<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut s = Self::zero(num_qubits)?;
        for (p, c) in terms {
            s.add_term(p, c)?;
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    /// Terms in index order.
    pub fn terms(&self) -> Vec<(PauliString, Complex64)> {
        self.terms.iter().map(|(p, c)| (*p, *c)).collect()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|(p, _)| p.is_identity())
            .map(|(_, c)| *c)
            .unwrap_or_default()
    }

    /// Number of terms other than the identity.
    pub fn non_identity_len(&self) -> usize {
        self.terms.keys().filter(|p| !p.is_identity()).count()
    }

    pub fn add_term(&mut self, p: PauliString, coeff: Complex64) -> Result<()> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, found: p.num_qubits() });
        }
        *self.terms.entry(p).or_default() += coeff;
        Ok(())
    }

    pub fn add(&mut self, other: &PauliSum) -> Result<()> {
        for (p, c) in &other.terms {
            self.add_term(*p, *c)?;
        }
        Ok(())
    }

    pub fn scaled(&self, factor: Complex64) -> PauliSum {
        PauliSum {
            num_qubits: self.num_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c * factor)).collect(),
        }
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            num_qubits: self.num_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = PauliSum::zero(self.num_qubits)?;
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                let (phase, r) = p.mul(q)?;
                out.add_term(r, phase * a * b)?;
            }
        }
        out.simplify();
        Ok(out)
    }

    /// `self ⊗ other` with `self` on the low qubits.
    pub fn tensor(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = PauliSum::zero(self.num_qubits + other.num_qubits)?;
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                out.add_term(p.tensor(q)?, a * b)?;
            }
        }
        Ok(out)
    }

    /// Drops terms whose magnitude is at most [`PRUNE_TOLERANCE`].
    pub fn simplify(&mut self) {
        self.simplify_with(PRUNE_TOLERANCE);
    }

    pub fn simplify_with(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// `Tr[H]` over the full `2^M` space.
    pub fn trace(&self) -> Complex64 {
        self.identity_coefficient() * (self.num_qubits as f64).exp2()
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.num_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, c) in &self.terms {
            for k in 0..dim {
                let (phase, j) = p.apply_to_basis(k);
                m[(j, k)] += phase * c;
            }
        }
        m
    }

    /// `H|psi>` for a dense amplitude vector.
    pub fn apply(&self, amps: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.num_qubits;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amps.len() });
        }
        let mut out = vec![Complex64::default(); dim];
        for (p, c) in &self.terms {
            for (k, a) in amps.iter().enumerate() {
                let (phase, j) = p.apply_to_basis(k);
                out[j] += phase * c * a;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<PauliSum> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    letters: String,
    re: f64,
    im: f64,
}

impl Serialize for PauliSum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|(p, c)| TermRecord { letters: p.to_string(), re: c.re, im: c.im })
            .collect();
        records.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PauliSum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let records = Vec::<TermRecord>::deserialize(deserializer)?;
        let first = records
            .first()
            .ok_or_else(|| D::Error::custom("a Pauli sum needs at least one term to fix its width"))?;
        let width = first.letters.chars().count();
        let mut sum = PauliSum::zero(width).map_err(D::Error::custom)?;
        for r in &records {
            let p: PauliString = r.letters.parse().map_err(D::Error::custom)?;
            if p.num_qubits() != width {
                return Err(D::Error::custom(format!(
                    "term {} has {} letters, expected {width}",
                    r.letters,
                    p.num_qubits()
                )));
            }
            if !(r.re.is_finite() && r.im.is_finite()) {
                return Err(D::Error::custom("non-finite coefficient"));
            }
            if sum.terms.contains_key(&p) {
                return Err(D::Error::custom(format!("duplicate term {}", r.letters)));
            }
            sum.terms.insert(p, Complex64::new(r.re, r.im));
        }
        Ok(sum)
    }
}
