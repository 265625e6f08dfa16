//! Exhaustive ground truth: every basis energy, classified against the
//! constrained source problem.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use crate::bits::BitConvention;
use crate::error::{Error, Result, MAX_QUBITS};
use crate::model::EnergyModel;

/// Tolerance for treating two energies (or costs) as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionClass {
    Optimal,
    Feasible,
    Infeasible,
}

impl SolutionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SolutionClass::Optimal => "optimal",
            SolutionClass::Feasible => "feasible",
            SolutionClass::Infeasible => "infeasible",
        }
    }

    /// Optimal solutions are feasible too.
    pub fn is_feasible(self) -> bool {
        !matches!(self, SolutionClass::Infeasible)
    }
}

/// Decides feasibility of a basis state against the original constrained
/// problem and reports its true objective.
pub trait FeasibilityOracle {
    fn num_vars(&self) -> usize;

    /// `Some(cost)` when `index` decodes to a feasible solution.
    fn feasible_cost(&self, index: usize) -> Option<f64>;
}

/// Every assignment is feasible with its energy as cost.
pub struct Unconstrained<'a, M>(pub &'a M);

impl<M: EnergyModel> FeasibilityOracle for Unconstrained<'_, M> {
    fn num_vars(&self) -> usize {
        self.0.num_vars()
    }

    fn feasible_cost(&self, index: usize) -> Option<f64> {
        Some(self.0.energy_at(index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub index: usize,
    pub energy: f64,
    pub class: Option<SolutionClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n: usize,
    pub entries: Vec<SpectrumEntry>,
    /// True when entries are ordered by ascending energy instead of index.
    pub sorted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub max_feasible: f64,
    pub min_infeasible: f64,
    /// `min_infeasible - max_feasible`; positive certifies the encoding.
    pub gap: f64,
}

impl SeparationReport {
    pub fn separated(&self) -> bool {
        self.gap > 0.0
    }
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::ResourceGuard { n, max: MAX_QUBITS })
    } else {
        Ok(())
    }
}

/// Evaluates all `2^n` basis energies, ascending index order.
pub fn enumerate(model: &impl EnergyModel) -> Result<Spectrum> {
    let n = model.num_vars();
    guard(n)?;
    let table = model.energy_table()?;
    Ok(Spectrum::from_energies(n, table))
}

/// Tags every entry as optimal, feasible or infeasible.
pub fn classify(spectrum: &Spectrum, oracle: &impl FeasibilityOracle) -> Result<Spectrum> {
    if spectrum.n != oracle.num_vars() {
        return Err(Error::SizeMismatch {
            spectrum: spectrum.n,
            instance: oracle.num_vars(),
        });
    }
    let costs: Vec<Option<f64>> = spectrum
        .entries
        .iter()
        .map(|e| oracle.feasible_cost(e.index))
        .collect();
    let best = costs.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let entries = spectrum
        .entries
        .iter()
        .zip(&costs)
        .map(|(e, cost)| {
            let class = match cost {
                Some(c) if *c <= best + TIE_TOLERANCE => SolutionClass::Optimal,
                Some(_) => SolutionClass::Feasible,
                None => SolutionClass::Infeasible,
            };
            SpectrumEntry {
                class: Some(class),
                ..*e
            }
        })
        .collect();
    Ok(Spectrum {
        n: spectrum.n,
        entries,
        sorted: spectrum.sorted,
    })
}

/// All indices within [`TIE_TOLERANCE`] of the minimum energy, ascending.
pub fn ground_states(spectrum: &Spectrum) -> Vec<usize> {
    let min = spectrum.min_energy();
    let mut out: Vec<usize> = spectrum
        .entries
        .iter()
        .filter(|e| e.energy <= min + TIE_TOLERANCE)
        .map(|e| e.index)
        .collect();
    out.sort_unstable();
    out
}

/// Highest feasible energy against lowest infeasible energy.
pub fn separation_report(spectrum: &Spectrum) -> Result<SeparationReport> {
    let mut max_feasible = f64::NEG_INFINITY;
    let mut min_infeasible = f64::INFINITY;
    let mut seen_feasible = false;
    let mut seen_infeasible = false;
    for e in &spectrum.entries {
        match e.class {
            Some(c) if c.is_feasible() => {
                seen_feasible = true;
                max_feasible = max_feasible.max(e.energy);
            }
            Some(_) => {
                seen_infeasible = true;
                min_infeasible = min_infeasible.min(e.energy);
            }
            None => {}
        }
    }
    if !seen_feasible {
        return Err(Error::EmptyClass("feasible"));
    }
    if !seen_infeasible {
        return Err(Error::EmptyClass("infeasible"));
    }
    Ok(SeparationReport {
        max_feasible,
        min_infeasible,
        gap: min_infeasible - max_feasible,
    })
}

/// Separation check that never materializes the spectrum.
pub fn stream_separation(
    model: &impl EnergyModel,
    oracle: &impl FeasibilityOracle,
) -> Result<SeparationReport> {
    let n = model.num_vars();
    guard(n)?;
    if n != oracle.num_vars() {
        return Err(Error::SizeMismatch {
            spectrum: n,
            instance: oracle.num_vars(),
        });
    }
    let mut max_feasible = f64::NEG_INFINITY;
    let mut min_infeasible = f64::INFINITY;
    for idx in 0..1usize << n {
        let e = model.energy_at(idx);
        if oracle.feasible_cost(idx).is_some() {
            max_feasible = max_feasible.max(e);
        } else {
            min_infeasible = min_infeasible.min(e);
        }
    }
    if max_feasible == f64::NEG_INFINITY {
        return Err(Error::EmptyClass("feasible"));
    }
    if min_infeasible == f64::INFINITY {
        return Err(Error::EmptyClass("infeasible"));
    }
    Ok(SeparationReport {
        max_feasible,
        min_infeasible,
        gap: min_infeasible - max_feasible,
    })
}

impl Spectrum {
    pub fn from_energies(n: usize, energies: Vec<f64>) -> Self {
        let entries = energies
            .into_iter()
            .enumerate()
            .map(|(index, energy)| SpectrumEntry {
                index,
                energy,
                class: None,
            })
            .collect();
        Spectrum {
            n,
            entries,
            sorted: false,
        }
    }

    pub fn min_energy(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.energy)
            .fold(f64::INFINITY, f64::min)
    }

    /// Entry for a basis index regardless of ordering.
    pub fn entry(&self, index: usize) -> Option<&SpectrumEntry> {
        if !self.sorted {
            return self.entries.get(index);
        }
        self.entries.iter().find(|e| e.index == index)
    }

    /// Copy ordered by ascending energy, ties broken by index.
    pub fn sorted_by_energy(&self) -> Spectrum {
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.index.cmp(&b.index)));
        Spectrum {
            n: self.n,
            entries,
            sorted: true,
        }
    }

    pub fn indices_with(&self, pred: impl Fn(SolutionClass) -> bool) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .entries
            .iter()
            .filter(|e| e.class.is_some_and(&pred))
            .map(|e| e.index)
            .collect();
        out.sort_unstable();
        out
    }

    /// `index,bitstring,energy,class`, one row per entry in stored order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,bitstring,energy,class\n");
        for e in &self.entries {
            let class = e.class.map_or("unclassified", SolutionClass::as_str);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                e.index,
                BitConvention::bitstring(e.index, self.n),
                e.energy,
                class
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IsingModel, QuboModel};

    fn didactic() -> QuboModel {
        let mut m = QuboModel::zeros(4);
        m.c = vec![-3.0, 0.0, 0.0, -3.0];
        m.add_pair(0, 1, 2.0);
        m.add_pair(1, 2, 2.0);
        m.add_pair(2, 3, 2.0);
        m
    }

    /// Feasible iff exactly one of the first two bits is set; cost = index.
    struct OneHotPair;

    impl FeasibilityOracle for OneHotPair {
        fn num_vars(&self) -> usize {
            4
        }
        fn feasible_cost(&self, index: usize) -> Option<f64> {
            let a = BitConvention::bit(index, 0, 4);
            let b = BitConvention::bit(index, 1, 4);
            (a + b == 1).then_some(index as f64)
        }
    }

    #[test]
    fn didactic_unique_minimum() {
        let s = enumerate(&didactic()).unwrap();
        assert_eq!(s.entries.len(), 16);
        assert_eq!(s.min_energy(), -6.0);
        assert_eq!(ground_states(&s), vec![9]);
        assert_eq!(BitConvention::bitstring(9, 4), "1001");
        let via_ising = enumerate(&didactic().to_ising()).unwrap();
        assert_eq!(ground_states(&via_ising), vec![9]);
    }

    #[test]
    fn enumerate_matches_eval() {
        let m = didactic();
        let s = enumerate(&m).unwrap();
        for e in &s.entries {
            let bits = BitConvention::decode(e.index, 4);
            assert_eq!(e.energy, m.eval(&bits).unwrap());
        }
    }

    #[test]
    fn constant_model_is_fully_degenerate() {
        let mut m = IsingModel::zeros(3);
        m.offset = 2.5;
        let s = enumerate(&m).unwrap();
        assert!(s.entries.iter().all(|e| e.energy == 2.5));
        assert_eq!(ground_states(&s), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn resource_guard() {
        let m = IsingModel::zeros(MAX_QUBITS + 1);
        assert!(matches!(enumerate(&m), Err(Error::ResourceGuard { .. })));
    }

    #[test]
    fn classify_is_energy_independent() {
        let s = enumerate(&didactic()).unwrap();
        let c1 = classify(&s, &OneHotPair).unwrap();
        let mut shifted = s.clone();
        for e in &mut shifted.entries {
            e.energy += 100.0;
        }
        let c2 = classify(&shifted.sorted_by_energy(), &OneHotPair).unwrap();
        for e in &c1.entries {
            assert_eq!(c2.entry(e.index).unwrap().class, e.class);
        }
        // bits 01xx and 10xx are feasible; cheapest is index 4
        assert_eq!(c1.indices_with(|c| c == SolutionClass::Optimal), vec![4]);
        assert_eq!(c1.indices_with(SolutionClass::is_feasible).len(), 8);
    }

    #[test]
    fn classify_size_mismatch() {
        let s = enumerate(&QuboModel::zeros(3)).unwrap();
        assert!(matches!(
            classify(&s, &OneHotPair),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn separation_and_empty_classes() {
        let s = enumerate(&didactic()).unwrap();
        assert!(matches!(separation_report(&s), Err(Error::EmptyClass(_))));
        let c = classify(&s, &OneHotPair).unwrap();
        let rep = separation_report(&c).unwrap();
        assert_eq!(rep.gap, rep.min_infeasible - rep.max_feasible);
        let streamed = stream_separation(&didactic(), &OneHotPair).unwrap();
        assert_eq!(streamed, rep);
    }

    #[test]
    fn csv_layout() {
        let s = classify(&enumerate(&didactic()).unwrap(), &OneHotPair).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,bitstring,energy,class");
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[10], "9,1001,-6,feasible");
    }
}
