//! Matrix-form QUBO and Ising models and the exact transform between them.
//!
//! Spins follow `x = (1 - z) / 2`: bit 0 is spin +1 (qubit `|0>`), bit 1 is
//! spin -1 (qubit `|1>`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitConvention;
use crate::error::{Error, Result, MAX_QUBITS};
use crate::pbool::check_bits;

/// `x^T q x + c^T x + offset` with symmetric `q` and zero diagonal.
///
/// A product term `a x_i x_j` is stored as `a/2` in both `q[i][j]` and
/// `q[j][i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboModel {
    pub n: usize,
    /// Row-major `n * n`.
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub offset: f64,
}

/// `offset + sum_i h_i z_i + sum_{i<j} r_ij z_i z_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub n: usize,
    pub h: Vec<f64>,
    /// Couplings keyed by `(i, j)` with `i < j`.
    pub r: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

/// Anything that assigns an energy to every basis index.
pub trait EnergyModel: Sync {
    fn num_vars(&self) -> usize;

    /// Energy of basis state `index` (variable 0 is the most significant bit).
    fn energy_at(&self, index: usize) -> f64;

    /// All `2^n` energies in ascending index order.
    fn energy_table(&self) -> Result<Vec<f64>> {
        let n = self.num_vars();
        if n > MAX_QUBITS {
            return Err(Error::ResourceGuard { n, max: MAX_QUBITS });
        }
        let size = 1usize << n;
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            Ok((0..size).into_par_iter().map(|i| self.energy_at(i)).collect())
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok((0..size).map(|i| self.energy_at(i)).collect())
        }
    }
}

impl QuboModel {
    pub fn zeros(n: usize) -> Self {
        QuboModel {
            n,
            q: vec![0.0; n * n],
            c: vec![0.0; n],
            offset: 0.0,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    /// Adds the product term `a x_i x_j`; `i == j` folds into the linear part.
    pub fn add_pair(&mut self, i: usize, j: usize, a: f64) {
        if i == j {
            self.c[i] += a;
        } else {
            self.q[i * self.n + j] += a / 2.0;
            self.q[j * self.n + i] += a / 2.0;
        }
    }

    pub fn eval(&self, bits: &[u8]) -> Result<f64> {
        check_bits(bits, self.n)?;
        Ok(self.eval_unchecked(|i| bits[i] == 1))
    }

    fn eval_unchecked(&self, set: impl Fn(usize) -> bool) -> f64 {
        let mut e = self.offset;
        for i in 0..self.n {
            if !set(i) {
                continue;
            }
            e += self.c[i];
            let row = &self.q[i * self.n..(i + 1) * self.n];
            for (j, &qij) in row.iter().enumerate() {
                if j != i && qij != 0.0 && set(j) {
                    e += qij;
                }
            }
        }
        e
    }

    /// The equivalent spin model under `x = (1 - z) / 2`.
    pub fn to_ising(&self) -> IsingModel {
        let n = self.n;
        let mut offset = self.offset;
        let mut h = vec![0.0; n];
        let mut r = BTreeMap::new();
        for i in 0..n {
            offset += self.c[i] / 2.0;
            h[i] -= self.c[i] / 2.0;
        }
        for i in 0..n {
            for j in i + 1..n {
                let a = self.get(i, j) + self.get(j, i);
                if a == 0.0 {
                    continue;
                }
                let quarter = a / 4.0;
                offset += quarter;
                h[i] -= quarter;
                h[j] -= quarter;
                r.insert((i, j), quarter);
            }
        }
        IsingModel { n, h, r, offset }
    }
}

impl IsingModel {
    pub fn zeros(n: usize) -> Self {
        IsingModel {
            n,
            h: vec![0.0; n],
            r: BTreeMap::new(),
            offset: 0.0,
        }
    }

    /// Accumulates a coupling, reordering the pair so that `i < j`.
    pub fn add_coupling(&mut self, i: usize, j: usize, r: f64) -> Result<()> {
        if i == j {
            return Err(Error::RepeatedQubit(i));
        }
        for q in [i, j] {
            if q >= self.n {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    num_vars: self.n,
                });
            }
        }
        *self.r.entry((i.min(j), i.max(j))).or_insert(0.0) += r;
        Ok(())
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.r.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: spins.len(),
            });
        }
        if let Some((pos, &s)) = spins.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(Error::Alphabet {
                position: pos,
                value: s as i64,
                alphabet: "spin",
            });
        }
        Ok(self.eval_unchecked(|i| spins[i] as f64))
    }

    fn eval_unchecked(&self, spin: impl Fn(usize) -> f64) -> f64 {
        let mut e = self.offset;
        for (i, &h) in self.h.iter().enumerate() {
            e += h * spin(i);
        }
        for (&(i, j), &r) in &self.r {
            e += r * spin(i) * spin(j);
        }
        e
    }

    /// Inverse transform, `z = 1 - 2x`.
    pub fn to_qubo(&self) -> QuboModel {
        let mut m = QuboModel::zeros(self.n);
        m.offset = self.offset;
        for (i, &h) in self.h.iter().enumerate() {
            m.offset += h;
            m.c[i] -= 2.0 * h;
        }
        for (&(i, j), &r) in &self.r {
            m.offset += r;
            m.c[i] -= 2.0 * r;
            m.c[j] -= 2.0 * r;
            m.add_pair(i, j, 4.0 * r);
        }
        m
    }

    /// True when every field, coupling and the offset are zero.
    pub fn is_zero(&self) -> bool {
        self.offset == 0.0 && self.h.iter().all(|&h| h == 0.0) && self.r.values().all(|&r| r == 0.0)
    }
}

/// Spin vector for a bit vector, `z_i = 1 - 2 x_i`.
/// `-3 x0 - 3 x3 + 2 x0 x1 + 2 x1 x2 + 2 x2 x3`, minimized only by `1001`.
pub fn didactic_qubo() -> QuboModel {
    let mut m = QuboModel::zeros(4);
    m.c = vec![-3.0, 0.0, 0.0, -3.0];
    m.add_pair(0, 1, 2.0);
    m.add_pair(1, 2, 2.0);
    m.add_pair(2, 3, 2.0);
    m
}

pub fn spins_from_bits(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&b| 1 - 2 * b as i8).collect()
}

impl EnergyModel for QuboModel {
    fn num_vars(&self) -> usize {
        self.n
    }

    fn energy_at(&self, index: usize) -> f64 {
        let n = self.n;
        self.eval_unchecked(|i| BitConvention::bit(index, i, n) == 1)
    }
}

impl EnergyModel for IsingModel {
    fn num_vars(&self) -> usize {
        self.n
    }

    fn energy_at(&self, index: usize) -> f64 {
        let n = self.n;
        self.eval_unchecked(|i| 1.0 - 2.0 * BitConvention::bit(index, i, n) as f64)
    }
}
