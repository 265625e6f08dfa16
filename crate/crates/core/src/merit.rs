//! Figures of merit for sampling the optimum.

use serde::{Deserialize, Serialize};

use crate::oracle::SolutionClass;

/// Returned by [`tts`] when the optimum is never sampled.
pub const TTS_INFINITE: u64 = u64::MAX;

/// Coefficient of performance: `p_star` relative to uniform guessing.
pub fn cop(p_star: f64, n: usize) -> f64 {
    p_star * (n as f64).exp2()
}

/// Shots needed to see the optimum at least once with confidence `alpha`,
/// times the per-shot cost `lambda`.
pub fn tts(p_star: f64, alpha: f64, lambda: u64) -> u64 {
    if p_star <= 0.0 {
        return TTS_INFINITE;
    }
    if p_star >= 1.0 {
        return lambda;
    }
    let shots = ((1.0 - alpha).ln() / (1.0 - p_star).ln()).ceil().max(1.0);
    (shots as u64).saturating_mul(lambda)
}

/// `tts` with `alpha = 0.99` and unit shot cost.
pub fn tts_default(p_star: f64) -> u64 {
    tts(p_star, 0.99, 1)
}

/// One row of a per-depth report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritRow {
    pub p: usize,
    pub expectation: f64,
    pub prob_optimal: f64,
    pub prob_feasible: f64,
    pub cop: f64,
    pub tts: u64,
    pub most_probable_index: usize,
    pub most_probable_class: SolutionClass,
}

impl MeritRow {
    /// Summarizes a measurement distribution against per-state classes.
    pub fn from_distribution(
        p: usize,
        expectation: f64,
        probs: &[f64],
        classes: &[SolutionClass],
    ) -> Self {
        let n = probs.len().trailing_zeros() as usize;
        let mut prob_optimal = 0.0;
        let mut prob_feasible = 0.0;
        for (&pr, &c) in probs.iter().zip(classes) {
            if c == SolutionClass::Optimal {
                prob_optimal += pr;
            }
            if c.is_feasible() {
                prob_feasible += pr;
            }
        }
        // first index wins ties so the choice is reproducible
        let mut best = 0;
        for (i, &pr) in probs.iter().enumerate() {
            if pr > probs[best] {
                best = i;
            }
        }
        MeritRow {
            p,
            expectation,
            prob_optimal,
            prob_feasible,
            cop: cop(prob_optimal, n),
            tts: tts_default(prob_optimal),
            most_probable_index: best,
            most_probable_class: classes[best],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cop_values() {
        assert_eq!(cop(1.0 / 256.0, 8), 1.0);
        assert_eq!(cop(0.0, 8), 0.0);
        assert!((cop(0.3129, 8) - 80.1024).abs() < 1e-12);
    }

    #[test]
    fn tts_values() {
        assert_eq!(tts_default(0.5), 7);
        assert_eq!(tts_default(0.99), 1);
        assert_eq!(tts_default(0.0414), 109);
        assert_eq!(tts_default(0.0), TTS_INFINITE);
        assert_eq!(tts_default(1.0), 1);
        assert_eq!(tts(0.5, 0.99, 3), 21);
    }

    #[test]
    fn row_from_distribution() {
        use SolutionClass::*;
        let probs = [0.1, 0.4, 0.4, 0.1];
        let classes = [Infeasible, Optimal, Feasible, Infeasible];
        let r = MeritRow::from_distribution(2, -1.0, &probs, &classes);
        assert_eq!(r.most_probable_index, 1);
        assert_eq!(r.most_probable_class, Optimal);
        assert!((r.prob_feasible - 0.8).abs() < 1e-15);
        assert_eq!(r.cop, 1.6);
        assert_eq!(r.tts, tts_default(0.4));
    }
}
