//! Pauli strings on up to 64 qubits stored as X/Z bit masks.
//!
//! The Hermitian string with masks (x, z) acts on qubit j as I, X, Z or Y
//! depending on the bits; qubit j corresponds to bit j of a basis index.

use std::fmt;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: Self = Self { x: 0, z: 0 };

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Qubits acted on, ascending.
    pub fn support(&self) -> Vec<usize> {
        let m = self.x | self.z;
        (0..64).filter(|&j| m >> j & 1 == 1).collect()
    }

    /// Number of Y factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// P|b⟩ = phase · |b ⊕ x⟩.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (u64, C64) {
        // Per qubit the Hermitian factor is i^{x z} X^x Z^z.
        let sign = if (self.z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let phase = match self.y_count() % 4 {
            0 => C64::new(sign, 0.0),
            1 => C64::new(0.0, sign),
            2 => C64::new(-sign, 0.0),
            _ => C64::new(0.0, -sign),
        };
        (b ^ self.x, phase)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Dense text, one character per qubit with qubit 0 first.
    pub fn to_text(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|j| match (self.x >> j & 1, self.z >> j & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            })
            .collect()
    }

    pub fn from_text(text: &str) -> Option<Self> {
        let mut p = Self::IDENTITY;
        for (j, ch) in text.chars().enumerate() {
            if j >= 64 {
                return None;
            }
            match ch {
                'I' => {}
                'X' => p.x |= 1 << j,
                'Y' => {
                    p.x |= 1 << j;
                    p.z |= 1 << j;
                }
                'Z' => p.z |= 1 << j,
                _ => return None,
            }
        }
        Some(p)
    }
}

impl fmt::Display for PauliString {
    /// Sparse form such as `X0 Z1 Y3`; the identity prints as `I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self
            .support()
            .into_iter()
            .map(|j| {
                let c = match (self.x >> j & 1, self.z >> j & 1) {
                    (1, 0) => 'X',
                    (1, 1) => 'Y',
                    _ => 'Z',
                };
                format!("{c}{j}")
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Operator in the "raw" basis B(x, z) = ⊗_j X^{x_j} Z^{z_j}, which
/// multiplies without phase bookkeeping beyond a sign.
#[derive(Debug, Clone, Default)]
pub(crate) struct RawSum {
    pub terms: Vec<(u64, u64, C64)>,
}

impl RawSum {
    pub fn scalar(c: C64) -> Self {
        Self { terms: vec![(0, 0, c)] }
    }

    /// B(x1,z1)·B(x2,z2) = (−1)^{|z1 ∧ x2|} B(x1⊕x2, z1⊕z2).
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(x1, z1, c1) in &self.terms {
            for &(x2, z2, c2) in &other.terms {
                let sign = if (z1 & x2).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                terms.push((x1 ^ x2, z1 ^ z2, c1 * c2 * sign));
            }
        }
        Self { terms }
    }

    /// Converts each raw term into a Hermitian Pauli string coefficient:
    /// B(x, z) = (−i)^{|x∧z|} P(x, z).
    pub fn into_pauli(self) -> impl Iterator<Item = (PauliString, C64)> {
        self.terms.into_iter().map(|(x, z, c)| {
            let ph = match (x & z).count_ones() % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, -1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, 1.0),
            };
            (PauliString { x, z }, c * ph)
        })
    }
}
