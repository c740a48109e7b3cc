//! Binary (compact) encoding of truncated bosonic operators.
//!
//! A `d = 2^m` level oscillator occupies `m` qubits and Fock state `|n>` maps
//! to the computational state of `bin_m(n)`, with bit 0 (least significant)
//! on the first qubit of the register. The position operator is normalised as
//! `x = (a + a^dag) / sqrt(2)`, so `x^2 + p^2` has spectrum `2n + 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum, PRUNE_TOLERANCE};

/// `log2(d)` for a power-of-two truncation `d >= 2`.
pub fn qubits_for_dim(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return domain(format!("truncation dimension {d} is not a power of two >= 2"));
    }
    Ok(d.trailing_zeros() as usize)
}

/// The `m` bits of `n`, least significant first.
pub fn encode_fock_index(n: usize, m: usize) -> Result<Vec<u8>> {
    if m >= usize::BITS as usize || n >= (1usize << m) {
        return domain(format!("Fock index {n} does not fit in {m} bits"));
    }
    Ok((0..m).map(|i| ((n >> i) & 1) as u8).collect())
}

/// Position of the lowest zero bit of `n`; incrementing `n` flips bits `0..=k`.
pub fn lowest_zero_bit(n: usize, m: usize) -> Result<usize> {
    if m >= usize::BITS as usize || n + 1 >= (1usize << m) {
        return domain(format!("{n} + 1 is not representable in {m} bits"));
    }
    Ok((!n).trailing_zeros() as usize)
}

/// A dense real operator on one truncated oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    entries: DMatrix<f64>,
}

impl FockMatrix {
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return domain("Fock matrix must be square");
        }
        qubits_for_dim(entries.nrows())?;
        Ok(Self { entries })
    }

    /// Truncated lowering operator, `<n|a|n+1> = sqrt(n+1)`.
    pub fn lowering(d: usize) -> Result<Self> {
        qubits_for_dim(d)?;
        let mut a = DMatrix::zeros(d, d);
        for n in 0..d - 1 {
            a[(n, n + 1)] = ((n + 1) as f64).sqrt();
        }
        Ok(Self { entries: a })
    }

    /// Diagonal `2n + 1`, the exact truncation of `x^2 + p^2`.
    pub fn number_term(d: usize) -> Result<Self> {
        qubits_for_dim(d)?;
        Ok(Self { entries: DMatrix::from_fn(d, d, |i, j| if i == j { (2 * i + 1) as f64 } else { 0.0 }) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Matrix power of the truncated operator (power after truncation).
    pub fn pow(&self, p: u32) -> FockMatrix {
        let mut out = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..p {
            out = &out * &self.entries;
        }
        FockMatrix { entries: out }
    }
}

/// Truncated `x = (a + a^dag)/sqrt(2)`; `<n+1|x|n> = sqrt((n+1)/2)`.
pub fn position_op(d: usize) -> Result<FockMatrix> {
    let a = FockMatrix::lowering(d)?.into_matrix();
    let x = (&a + a.transpose()) * std::f64::consts::FRAC_1_SQRT_2;
    Ok(FockMatrix { entries: x })
}

/// `2^m I - sum_i 2^i Z_i` on `m` qubits; eigenvalue `2n + 1` on `|bin_m(n)>`.
pub fn number_diag_pauli(m: usize) -> Result<PauliSum> {
    if m == 0 {
        return domain("register needs at least one qubit");
    }
    let mut s = PauliSum::identity(m, (m as f64).exp2())?;
    for i in 0..m {
        s.add_term(PauliString::single(m, i, Pauli::Z)?, Complex64::new(-(i as f64).exp2(), 0.0))?;
    }
    Ok(s)
}

/// Pauli decomposition by trace inner products: the coefficient of `P` is
/// `Tr[P A] / 2^M`.
pub fn matrix_to_pauli(mat: &DMatrix<Complex64>) -> Result<PauliSum> {
    if !mat.is_square() {
        return domain("matrix must be square");
    }
    let dim = mat.nrows();
    if dim == 0 || !dim.is_power_of_two() {
        return domain(format!("matrix dimension {dim} is not a power of two"));
    }
    let m = dim.trailing_zeros() as usize;
    let norm = 1.0 / dim as f64;
    let mut out = PauliSum::zero(m)?;
    for x in 0..dim as u64 {
        for z in 0..dim as u64 {
            let p = PauliString::from_masks(m, x, z)?;
            let mut tr = Complex64::default();
            for k in 0..dim {
                let (phase, j) = p.apply_to_basis(k);
                // P|k> = phase |j>, so Tr[A P] = sum_k phase A_{k,j}
                tr += phase * mat[(k, j)];
            }
            let c = tr * norm;
            if c.norm() > PRUNE_TOLERANCE {
                out.add_term(p, c)?;
            }
        }
    }
    Ok(out)
}

pub fn matrix_to_pauli_real(mat: &DMatrix<f64>) -> Result<PauliSum> {
    matrix_to_pauli(&mat.map(|v| Complex64::new(v, 0.0)))
}

fn projector(bit: u8) -> Result<PauliSum> {
    let sign = if bit == 0 { 0.5 } else { -0.5 };
    PauliSum::from_terms(
        1,
        [
            (PauliString::identity(1)?, Complex64::new(0.5, 0.0)),
            (PauliString::single(1, 0, Pauli::Z)?, Complex64::new(sign, 0.0)),
        ],
    )
}

/// `|1><0| = (X - iY)/2` when `raise`, else `|0><1| = (X + iY)/2`.
fn flip(raise: bool) -> Result<PauliSum> {
    let s = if raise { -0.5 } else { 0.5 };
    PauliSum::from_terms(
        1,
        [
            (PauliString::single(1, 0, Pauli::X)?, Complex64::new(0.5, 0.0)),
            (PauliString::single(1, 0, Pauli::Y)?, Complex64::new(0.0, s)),
        ],
    )
}

/// `|n+1><n| + |n><n+1|` on `m` qubits, built from the bit structure of the
/// increment: bits `0..k` flip `1 -> 0`, bit `k` flips `0 -> 1`, higher bits
/// are projectors onto `bin_m(n)`.
pub fn decompose_transition(n: usize, m: usize) -> Result<PauliSum> {
    let k = lowest_zero_bit(n, m)?;
    let bits = encode_fock_index(n, m)?;
    // qubit 0 is the lowest bit, so build from bit 0 upward
    let mut up = PauliSum::identity(0, 1.0)?;
    for (i, &b) in bits.iter().enumerate() {
        let factor = match i.cmp(&k) {
            std::cmp::Ordering::Less => flip(false)?,
            std::cmp::Ordering::Equal => flip(true)?,
            std::cmp::Ordering::Greater => projector(b)?,
        };
        up = up.tensor(&factor)?;
    }
    let mut sym = up.adjoint();
    sym.add(&up)?;
    sym.simplify();
    Ok(sym)
}

/// Pauli form of the truncated `x` built term-by-term from transitions.
pub fn decompose_position(d: usize) -> Result<PauliSum> {
    let m = qubits_for_dim(d)?;
    let mut x = PauliSum::zero(m)?;
    for n in 0..d - 1 {
        let w = ((n + 1) as f64 / 2.0).sqrt();
        x.add(&decompose_transition(n, m)?.scaled(w.into()))?;
    }
    x.simplify();
    Ok(x)
}

/// One `m`-qubit register: the axis `axis` of oscillator `oscillator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub oscillator: usize,
    pub axis: usize,
}

impl Slot {
    pub fn new(oscillator: usize) -> Self {
        Slot { oscillator, axis: 0 }
    }
}

/// Qubit layout for `N` oscillators with `axes` registers of `m` qubits each.
///
/// Register `(i, u)` starts at qubit `(i * axes + u) * m`; bit `b` of the Fock
/// index sits on qubit `start + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterMap {
    oscillators: usize,
    bits: usize,
    axes: usize,
}

impl RegisterMap {
    pub fn new(oscillators: usize, bits: usize, axes: usize) -> Result<Self> {
        if oscillators == 0 || bits == 0 {
            return domain("register map needs at least one oscillator and one qubit per register");
        }
        if axes != 1 && axes != 3 {
            return domain(format!("axis count must be 1 or 3, got {axes}"));
        }
        let total = oscillators * bits * axes;
        if total > crate::pauli::MAX_QUBITS {
            return Err(Error::TooLarge { dim: total, limit: crate::pauli::MAX_QUBITS });
        }
        Ok(Self { oscillators, bits, axes })
    }

    pub fn one_dimensional(oscillators: usize, d: usize) -> Result<Self> {
        Self::new(oscillators, qubits_for_dim(d)?, 1)
    }

    pub fn oscillators(&self) -> usize {
        self.oscillators
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn num_qubits(&self) -> usize {
        self.oscillators * self.bits * self.axes
    }

    pub fn registers(&self) -> usize {
        self.oscillators * self.axes
    }

    pub fn offset(&self, slot: Slot) -> Result<usize> {
        if slot.oscillator >= self.oscillators || slot.axis >= self.axes {
            return domain(format!("slot {slot:?} outside the register map"));
        }
        Ok((slot.oscillator * self.axes + slot.axis) * self.bits)
    }

    pub fn qubit(&self, slot: Slot, bit: usize) -> Result<usize> {
        if bit >= self.bits {
            return domain(format!("bit {bit} outside an {}-qubit register", self.bits));
        }
        Ok(self.offset(slot)? + bit)
    }

    /// Register holding `qubit`.
    pub fn slot_of(&self, qubit: usize) -> Slot {
        let reg = qubit / self.bits;
        Slot { oscillator: reg / self.axes, axis: reg % self.axes }
    }

    /// Mask of the qubits of one register.
    pub fn register_mask(&self, slot: Slot) -> Result<u64> {
        let off = self.offset(slot)?;
        Ok((((1u128 << self.bits) - 1) as u64) << off)
    }
}

/// Places `ps` (one register per entry of `slots`, concatenated low to high)
/// onto the full register, identity elsewhere.
pub fn embed(ps: &PauliSum, map: &RegisterMap, slots: &[Slot]) -> Result<PauliSum> {
    let width = map.bits() * slots.len();
    if ps.num_qubits() != width {
        return Err(Error::DimensionMismatch { expected: width, found: ps.num_qubits() });
    }
    for (i, a) in slots.iter().enumerate() {
        if slots[..i].contains(a) {
            return domain(format!("slot {a:?} used twice"));
        }
    }
    let offsets = slots.iter().map(|&s| map.offset(s)).collect::<Result<Vec<_>>>()?;
    let total = map.num_qubits();
    let mut out = PauliSum::zero(total)?;
    for (p, c) in ps.iter() {
        let mut q = PauliString::identity(total)?;
        for (j, &off) in offsets.iter().enumerate() {
            for b in 0..map.bits() {
                q.set(off + b, p.letter(j * map.bits() + b));
            }
        }
        out.add_term(q, *c)?;
    }
    Ok(out)
}
