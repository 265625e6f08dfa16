//! Dense statevector simulator.
//!
//! Qubit 0 is the most significant bit of the basis index, matching
//! [`BitConvention`](crate::bits::BitConvention). Sampling uses ChaCha8
//! seeded with `seed_from_u64`, so shot counts are reproducible bit for bit.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleQubitGate {
    H,
    X,
    Rx(f64),
    Rz(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoQubitGate {
    /// Control first, target second.
    Cx,
    Cz,
    Rzz(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ShotCounts {
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
}

impl ShotCounts {
    pub fn get(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn frequency(&self, index: usize) -> f64 {
        self.get(index) as f64 / self.total as f64
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyRegister);
    }
    if n > MAX_QUBITS {
        return Err(Error::ResourceGuard { n, max: MAX_QUBITS });
    }
    Ok(())
}

const I: Complex64 = Complex64::new(0.0, 1.0);

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_n(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        if index >= amps.len() {
            return Err(Error::IndexOutOfRange {
                index,
                num_vars: amps.len(),
            });
        }
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// `|+>^n`, equal to `H^n |0...0>`.
    pub fn uniform(n: usize) -> Result<Self> {
        check_n(n)?;
        let a = 1.0 / ((1usize << n) as f64).sqrt();
        Ok(StateVector {
            n,
            amps: vec![Complex64::new(a, 0.0); 1 << n],
        })
    }

    /// Wraps raw amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_n(n)?;
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|`, equal to 1 for states that differ by a global phase.
    pub fn fidelity_amplitude(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn mask(&self, q: usize) -> usize {
        1usize << (self.n - 1 - q)
    }

    pub fn apply(mut self, gate: SingleQubitGate, qubit: usize) -> Result<Self> {
        self.apply_mut(gate, qubit)?;
        Ok(self)
    }

    pub fn apply_two(mut self, gate: TwoQubitGate, q1: usize, q2: usize) -> Result<Self> {
        self.apply_two_mut(gate, q1, q2)?;
        Ok(self)
    }

    pub fn apply_mut(&mut self, gate: SingleQubitGate, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let m = match gate {
            SingleQubitGate::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [[s.into(), s.into()], [s.into(), (-s).into()]]
            }
            SingleQubitGate::X => [[0.0.into(), 1.0.into()], [1.0.into(), 0.0.into()]],
            SingleQubitGate::Rx(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [[c.into(), -I * s], [-I * s, c.into()]]
            }
            SingleQubitGate::Rz(theta) => {
                let ph = Complex64::from_polar(1.0, -theta / 2.0);
                [[ph, 0.0.into()], [0.0.into(), ph.conj()]]
            }
        };
        self.apply_matrix(qubit, m);
        Ok(())
    }

    fn apply_matrix(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let mask = self.mask(qubit);
        for block in self.amps.chunks_exact_mut(2 * mask) {
            let (lo, hi) = block.split_at_mut(mask);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m[0][0] * x + m[0][1] * y;
                *b = m[1][0] * x + m[1][1] * y;
            }
        }
    }

    /// `exp(-i beta X)` on one qubit, i.e. `RX(2 beta)`, without the generic
    /// complex matrix product.
    pub(crate) fn mix_qubit(&mut self, qubit: usize, cos: f64, sin: f64) {
        let mask = self.mask(qubit);
        for block in self.amps.chunks_exact_mut(2 * mask) {
            let (lo, hi) = block.split_at_mut(mask);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                // c x - i s y
                *a = Complex64::new(cos * x.re + sin * y.im, cos * x.im - sin * y.re);
                *b = Complex64::new(cos * y.re + sin * x.im, cos * y.im - sin * x.re);
            }
        }
    }

    /// `exp(-i beta sum_q X_q)`.
    pub(crate) fn mix_all(&mut self, beta: f64) {
        let (sin, cos) = beta.sin_cos();
        for q in 0..self.n {
            self.mix_qubit(q, cos, sin);
        }
    }

    pub fn apply_two_mut(&mut self, gate: TwoQubitGate, q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::RepeatedQubit(q1));
        }
        let (m1, m2) = (self.mask(q1), self.mask(q2));
        match gate {
            TwoQubitGate::Cx => {
                for i in 0..self.amps.len() {
                    if i & m1 != 0 && i & m2 == 0 {
                        self.amps.swap(i, i | m2);
                    }
                }
            }
            TwoQubitGate::Cz => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m1 != 0 && i & m2 != 0 {
                        *a = -*a;
                    }
                }
            }
            TwoQubitGate::Rzz(theta) => {
                let even = Complex64::from_polar(1.0, -theta / 2.0);
                let odd = even.conj();
                for (i, a) in self.amps.iter_mut().enumerate() {
                    let parity = ((i & m1 != 0) as u8) ^ ((i & m2 != 0) as u8);
                    *a *= if parity == 0 { even } else { odd };
                }
            }
        }
        Ok(())
    }

    /// `amp_b <- amp_b * exp(-i gamma E_b)`.
    pub fn apply_diagonal_phase(mut self, energies: &[f64], gamma: f64) -> Result<Self> {
        self.apply_diagonal_phase_mut(energies, gamma)?;
        Ok(self)
    }

    pub fn apply_diagonal_phase_mut(&mut self, energies: &[f64], gamma: f64) -> Result<()> {
        self.check_table(energies)?;
        for (a, &e) in self.amps.iter_mut().zip(energies) {
            let (s, c) = (gamma * e).sin_cos();
            *a *= Complex64::new(c, -s);
        }
        Ok(())
    }

    /// `exp(-i gamma E_b)` for every basis state.
    pub(crate) fn phase_table(energies: &[f64], gamma: f64) -> Vec<Complex64> {
        energies
            .iter()
            .map(|&e| {
                let (s, c) = (gamma * e).sin_cos();
                Complex64::new(c, -s)
            })
            .collect()
    }

    /// Multiplies by a precomputed phase table, or by its conjugate.
    pub(crate) fn apply_phases(&mut self, phases: &[Complex64], conjugate: bool) {
        if conjugate {
            for (a, ph) in self.amps.iter_mut().zip(phases) {
                *a *= ph.conj();
            }
        } else {
            for (a, ph) in self.amps.iter_mut().zip(phases) {
                *a *= ph;
            }
        }
    }

    fn check_table(&self, energies: &[f64]) -> Result<()> {
        if energies.len() != self.amps.len() {
            Err(Error::EnergyTableSize {
                expected: self.amps.len(),
                got: energies.len(),
            })
        } else {
            Ok(())
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum_b |amp_b|^2 E_b`, accumulated in ascending index order.
    pub fn expectation_diagonal(&self, energies: &[f64]) -> Result<f64> {
        self.check_table(energies)?;
        Ok(self
            .amps
            .iter()
            .zip(energies)
            .fold(0.0, |acc, (a, &e)| acc + a.norm_sqr() * e))
    }

    /// Multinomial draw of `shots` terminal measurements.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<ShotCounts> {
        if shots == 0 {
            return Err(Error::InvalidParams("shots must be at least 1".into()));
        }
        let probs = self.probabilities();
        let dist = WeightedIndex::new(&probs)
            .map_err(|e| Error::InvalidParams(format!("cannot sample state: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(dist.sample(&mut rng)).or_insert(0) += 1;
        }
        Ok(ShotCounts {
            counts,
            total: shots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let amps: Vec<Complex64> = (0..1 << n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    fn assert_states_close(a: &StateVector, b: &StateVector) {
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn init_zero() {
        let s = StateVector::zero(2).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(StateVector::zero(1).unwrap().amplitudes().len(), 2);
        assert!(matches!(StateVector::zero(0), Err(Error::EmptyRegister)));
        assert!(matches!(
            StateVector::zero(MAX_QUBITS + 1),
            Err(Error::ResourceGuard { .. })
        ));
    }

    #[test]
    fn hadamard_on_zero() {
        let s = StateVector::zero(1).unwrap().apply(SingleQubitGate::H, 0).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn cx_turns_10_into_11() {
        let a = FRAC_1_SQRT_2;
        let s = StateVector::from_amplitudes(vec![
            a.into(),
            0.0.into(),
            a.into(),
            0.0.into(),
        ])
        .unwrap()
        .apply_two(TwoQubitGate::Cx, 0, 1)
        .unwrap();
        let p = s.probabilities();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[3], 0.5, epsilon = 1e-15);
        assert_eq!(p[1] + p[2], 0.0);
    }

    #[test]
    fn rx_pi_flips_with_phase() {
        let s = StateVector::zero(1).unwrap().apply(SingleQubitGate::Rx(PI), 0).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[1].im, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.probabilities()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn x_on_qubit_zero_is_msb() {
        let s = StateVector::zero(8).unwrap().apply(SingleQubitGate::X, 0).unwrap();
        assert_eq!(s.probabilities()[128], 1.0);
    }

    #[test]
    fn bell_state_probabilities_and_samples() {
        let s = StateVector::zero(2)
            .unwrap()
            .apply(SingleQubitGate::H, 0)
            .unwrap()
            .apply_two(TwoQubitGate::Cx, 0, 1)
            .unwrap();
        let p = s.probabilities();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[3], 0.5, epsilon = 1e-15);
        let counts = s.sample(4000, 11).unwrap();
        assert_eq!(counts.get(0) + counts.get(3), 4000);
        assert_eq!(counts, s.sample(4000, 11).unwrap());
        assert!(s.sample(0, 1).is_err());
    }

    #[test]
    fn deterministic_state_samples_one_outcome() {
        let s = StateVector::basis(3, 5).unwrap();
        let c = s.sample(100, 3).unwrap();
        assert_eq!(c.get(5), 100);
        assert_eq!(c.counts.len(), 1);
    }

    #[test]
    fn gate_errors() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.clone().apply(SingleQubitGate::H, 2),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            s.apply_two(TwoQubitGate::Cx, 1, 1),
            Err(Error::RepeatedQubit(1))
        ));
    }

    #[test]
    fn diagonal_phase_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_state(3, &mut rng);
        let e: Vec<f64> = (0..8).map(|i| i as f64 * 0.7 - 2.0).collect();
        assert_eq!(s.clone().apply_diagonal_phase(&e, 0.0).unwrap(), s);
        let flat = vec![3.3; 8];
        let t = s.clone().apply_diagonal_phase(&flat, 0.8).unwrap();
        for (a, b) in t.probabilities().iter().zip(s.probabilities()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(s.fidelity_amplitude(&t), 1.0, epsilon = 1e-12);
        assert!(matches!(
            s.apply_diagonal_phase(&e[..4], 1.0),
            Err(Error::EnergyTableSize { .. })
        ));
    }

    #[test]
    fn expectation_cases() {
        let e: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let zero = StateVector::zero(4).unwrap();
        assert_eq!(zero.expectation_diagonal(&e).unwrap(), e[0]);
        // didactic energies, uniform superposition
        let q = {
            let mut m = crate::model::QuboModel::zeros(4);
            m.c = vec![-3.0, 0.0, 0.0, -3.0];
            m.add_pair(0, 1, 2.0);
            m.add_pair(1, 2, 2.0);
            m.add_pair(2, 3, 2.0);
            m
        };
        let table = crate::model::EnergyModel::energy_table(&q).unwrap();
        let u = StateVector::uniform(4).unwrap();
        assert_abs_diff_eq!(u.expectation_diagonal(&table).unwrap(), -1.5, epsilon = 1e-12);
    }

    #[test]
    fn gate_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_state(3, &mut rng);
        let hh = s
            .clone()
            .apply(SingleQubitGate::H, 1)
            .unwrap()
            .apply(SingleQubitGate::H, 1)
            .unwrap();
        assert_states_close(&hh, &s);
        let cxcx = s
            .clone()
            .apply_two(TwoQubitGate::Cx, 2, 0)
            .unwrap()
            .apply_two(TwoQubitGate::Cx, 2, 0)
            .unwrap();
        assert_states_close(&cxcx, &s);
        let rz2 = s
            .clone()
            .apply(SingleQubitGate::Rz(0.4), 0)
            .unwrap()
            .apply(SingleQubitGate::Rz(-1.3), 0)
            .unwrap();
        let rz1 = s.clone().apply(SingleQubitGate::Rz(-0.9), 0).unwrap();
        assert_abs_diff_eq!(rz1.fidelity_amplitude(&rz2), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mix_matches_rx() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_state(4, &mut rng);
        let mut fast = s.clone();
        fast.mix_all(0.37);
        let mut slow = s;
        for q in 0..4 {
            slow = slow.apply(SingleQubitGate::Rx(0.74), q).unwrap();
        }
        assert_states_close(&fast, &slow);
    }

    #[test]
    fn unitarity_over_long_random_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 6;
        let mut s = random_state(n, &mut rng);
        for _ in 0..1000 {
            let q = rng.gen_range(0..n);
            let theta = rng.gen_range(-PI..PI);
            s = match rng.gen_range(0..7) {
                0 => s.apply(SingleQubitGate::H, q).unwrap(),
                1 => s.apply(SingleQubitGate::X, q).unwrap(),
                2 => s.apply(SingleQubitGate::Rx(theta), q).unwrap(),
                3 => s.apply(SingleQubitGate::Rz(theta), q).unwrap(),
                k => {
                    let q2 = (q + 1 + rng.gen_range(0..n - 1)) % n;
                    let g = [TwoQubitGate::Cx, TwoQubitGate::Cz, TwoQubitGate::Rzz(theta)][k - 4];
                    s.apply_two(g, q, q2).unwrap()
                }
            };
        }
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-9);
    }
}
