//! Choosing the resonance weights `M5`, `M6` by linear programming.
//!
//! Every assignment's energy is affine in the two weights,
//! `E = e0 + M5 e1 + M6 e2`, so after enumerating all assignments the
//! search for the widest feasible/infeasible gap is an LP in
//! `(M5, M6, u, v, gap)`.

use serde::{Deserialize, Serialize};

use crate::bits::BitConvention;
use crate::boost::{DesignInstance, DesignWeights};
use crate::error::{Error, Result};
use crate::model::EnergyModel;
use crate::oracle::{classify, SolutionClass, Spectrum};
use crate::simplex::LpProblem;

pub const DEFAULT_WEIGHT_BOUND: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompEntry {
    pub index: usize,
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub class: SolutionClass,
}

impl DecompEntry {
    pub fn energy(&self, m5: f64, m6: f64) -> f64 {
        self.e0 + m5 * self.e1 + m6 * self.e2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDecomposition {
    pub n: usize,
    pub entries: Vec<DecompEntry>,
}

/// Splits every assignment's energy into the part fixed by `M1..M4` and
/// the coefficients of `M5` and `M6`. `base.m5` and `base.m6` are ignored.
pub fn decompose_energies(instance: &DesignInstance, base: &DesignWeights) -> Result<EnergyDecomposition> {
    let n = instance.num_qubits();
    let e0 = instance.structural_poly(base)?.to_qubo()?.energy_table()?;
    let g = instance.violation();
    let terms = g.merged();
    let e1: Vec<f64> = (0..e0.len())
        .map(|idx| {
            g.constant
                + terms
                    .iter()
                    .filter(|(v, _)| BitConvention::bit(idx, *v, n) == 1)
                    .map(|(_, a)| a)
                    .sum::<f64>()
        })
        .collect();
    let classes = classify(&Spectrum::from_energies(n, e0.clone()), instance)?;
    let entries = classes
        .entries
        .iter()
        .map(|s| DecompEntry {
            index: s.index,
            e0: e0[s.index],
            e1: e1[s.index],
            e2: e1[s.index] * e1[s.index],
            class: s.class.expect("classified"),
        })
        .collect();
    Ok(EnergyDecomposition { n, entries })
}

impl EnergyDecomposition {
    fn split(&self) -> (Vec<DecompEntry>, Vec<DecompEntry>) {
        self.entries.iter().partition(|e| e.class.is_feasible())
    }

    /// `min infeasible - max feasible` at the given weights.
    pub fn separation(&self, m5: f64, m6: f64) -> Result<f64> {
        let (feas, infeas) = self.split();
        if feas.is_empty() {
            return Err(Error::EmptyClass("feasible"));
        }
        if infeas.is_empty() {
            return Err(Error::EmptyClass("infeasible"));
        }
        let hi = feas.iter().map(|e| e.energy(m5, m6)).fold(f64::NEG_INFINITY, f64::max);
        let lo = infeas.iter().map(|e| e.energy(m5, m6)).fold(f64::INFINITY, f64::min);
        Ok(lo - hi)
    }
}

/// Which class constraints to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pruning {
    /// One row per assignment.
    None,
    /// Only rows that can bind for some nonnegative weights.
    #[default]
    Dominance,
}

/// Keeps entries not dominated in `(e0, e1, e2)`; `upper` selects whether
/// larger (feasible side) or smaller (infeasible side) coordinates win.
fn pareto(entries: &[DecompEntry], upper: bool) -> Vec<DecompEntry> {
    let key = |e: &DecompEntry| {
        let s = if upper { 1.0 } else { -1.0 };
        [s * e.e0, s * e.e1, s * e.e2]
    };
    let mut sorted: Vec<DecompEntry> = entries.to_vec();
    sorted.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        kb[0].total_cmp(&ka[0])
            .then(kb[1].total_cmp(&ka[1]))
            .then(kb[2].total_cmp(&ka[2]))
            .then(a.index.cmp(&b.index))
    });
    let mut kept: Vec<DecompEntry> = Vec::new();
    for e in sorted {
        let k = key(&e);
        let dominated = kept.iter().any(|f| {
            let kf = key(f);
            kf.iter().zip(&k).all(|(a, b)| a >= b)
        });
        if !dominated {
            kept.push(e);
        }
    }
    kept.sort_by_key(|e| e.index);
    kept
}

/// The LP together with the assignment behind each class row.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationLp {
    pub lp: LpProblem,
    /// Basis index per row; the final row is the gap link and has none.
    pub row_index: Vec<Option<usize>>,
}

pub const VAR_M5: usize = 0;
pub const VAR_M6: usize = 1;
pub const VAR_U: usize = 2;
pub const VAR_V: usize = 3;
pub const VAR_GAP: usize = 4;

/// Maximize `gap` subject to every feasible energy `<= u`, every
/// infeasible energy `>= v`, `gap <= v - u` and `0 <= M5, M6 <= bound`.
pub fn build_separation_lp(dec: &EnergyDecomposition, bound: f64, pruning: Pruning) -> Result<SeparationLp> {
    if !(bound >= 0.0 && bound.is_finite()) {
        return Err(Error::InvalidConfig(format!("weight bound {bound} must be a nonnegative number")));
    }
    let (feas, infeas) = dec.split();
    if feas.is_empty() {
        return Err(Error::EmptyClass("feasible"));
    }
    if infeas.is_empty() {
        return Err(Error::EmptyClass("infeasible"));
    }
    let (feas, infeas) = match pruning {
        Pruning::None => (feas, infeas),
        Pruning::Dominance => (pareto(&feas, true), pareto(&infeas, false)),
    };
    let mut lp = LpProblem::new(vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    lp.set_bounds(VAR_M5, Some(0.0), Some(bound));
    lp.set_bounds(VAR_M6, Some(0.0), Some(bound));
    for v in [VAR_U, VAR_V, VAR_GAP] {
        lp.set_bounds(v, None, None);
    }
    let mut row_index = Vec::new();
    for e in &feas {
        lp.add_le(vec![e.e1, e.e2, -1.0, 0.0, 0.0], -e.e0);
        row_index.push(Some(e.index));
    }
    for e in &infeas {
        lp.add_ge(vec![e.e1, e.e2, 0.0, -1.0, 0.0], -e.e0);
        row_index.push(Some(e.index));
    }
    lp.add_le(vec![0.0, 0.0, 1.0, -1.0, 1.0], 0.0);
    row_index.push(None);
    Ok(SeparationLp { lp, row_index })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    #[serde(rename = "M5")]
    pub m5: f64,
    #[serde(rename = "M6")]
    pub m6: f64,
    pub gap: f64,
    pub separation_ok: bool,
    /// Assignments whose class rows are tight at the optimum.
    #[serde(skip)]
    pub active: Vec<usize>,
}

impl TuneResult {
    pub fn weights(&self, base: &DesignWeights) -> DesignWeights {
        DesignWeights {
            m5: self.m5,
            m6: self.m6,
            ..*base
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Solves the LP and re-measures the gap over all assignments.
pub fn solve_separation(dec: &EnergyDecomposition, sep: &SeparationLp) -> Result<TuneResult> {
    let sol = sep.lp.solve()?;
    let (m5, m6) = (sol.x[VAR_M5], sol.x[VAR_M6]);
    let gap = dec.separation(m5, m6)?;
    let active = sol.active_rows.iter().filter_map(|&r| sep.row_index[r]).collect();
    Ok(TuneResult {
        m5,
        m6,
        gap,
        separation_ok: gap > 0.0,
        active,
    })
}

/// Decompose, build the pruned LP and solve it.
pub fn tune(instance: &DesignInstance, base: &DesignWeights, bound: f64) -> Result<TuneResult> {
    let dec = decompose_energies(instance, base)?;
    let sep = build_separation_lp(&dec, bound, Pruning::Dominance)?;
    solve_separation(&dec, &sep)
}
