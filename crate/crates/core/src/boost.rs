//! Output-filter selection for an ideal dc-dc boost converter, as a
//! penalized binary program.
//!
//! Variables are laid out `xL_0.., xC_0.., z_00, z_01, ..` where `z_ij`
//! stands for the product `xL_i * xC_j`. The objective is the component
//! cost plus six penalty blocks:
//!
//! * `M1 (sum xL - 1)^2`, `M2 (sum xC - 1)^2` select one of each part;
//! * `M3 sum (3 z + xL xC - 2 xL z - 2 xC z)` ties `z` to the product;
//! * `M4 (sum z - 1)^2` keeps exactly one pair active;
//! * `M5 g + M6 g^2` penalizes the resonance constraint approximately,
//!   with `g = 1 - sum z_ij L_i C_j / T` and `T = (kappa / 2 pi f_sw)^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bits::BitConvention;
use crate::error::{Error, Result};
use crate::model::QuboModel;
use crate::oracle::FeasibilityOracle;
use crate::pbool::{LinearExpr, PseudoBooleanPoly, VarKind, VarRegistry};

/// Relative slack on the ripple thresholds so that parts sitting exactly on
/// a limit survive floating-point rounding.
const BOUNDARY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConverterSpec {
    /// Input voltage (V).
    pub v_s: f64,
    /// Resistive load (ohm).
    #[serde(rename = "R")]
    pub r_load: f64,
    /// Duty cycle, strictly inside (0, 1).
    pub d: f64,
    /// Switching frequency (Hz).
    pub f_sw: f64,
    /// Maximum peak inductor current ripple (A).
    pub di_max: f64,
    /// Maximum peak capacitor voltage ripple (V).
    pub dv_max: f64,
    /// Resonance safety factor, `f_res <= f_sw / kappa`.
    pub kappa: f64,
}

impl ConverterSpec {
    /// The worked example's operating point.
    pub fn reference() -> Self {
        ConverterSpec {
            v_s: 12.0,
            r_load: 10.0,
            d: 0.5,
            f_sw: 1e5,
            di_max: 3.0,
            dv_max: 0.2,
            kappa: 15.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_s", self.v_s),
            ("R", self.r_load),
            ("f_sw", self.f_sw),
            ("di_max", self.di_max),
            ("dv_max", self.dv_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(Error::InvalidConfig(format!("duty cycle {} outside (0, 1)", self.d)));
        }
        if !(self.kappa > 1.0) {
            return Err(Error::InvalidConfig(format!("kappa {} must exceed 1", self.kappa)));
        }
        Ok(())
    }

    /// Ideal continuous-conduction boost gain, `v_o = v_s / (1 - d)`.
    pub fn output_voltage(&self) -> f64 {
        self.v_s / (1.0 - self.d)
    }

    /// Smallest inductance meeting the current-ripple limit.
    pub fn min_inductance(&self) -> f64 {
        self.d * self.v_s / (2.0 * self.f_sw * self.di_max)
    }

    /// Smallest capacitance meeting the voltage-ripple limit.
    pub fn min_capacitance(&self) -> f64 {
        self.d * self.output_voltage() / (2.0 * self.f_sw * self.r_load * self.dv_max)
    }

    /// `(kappa / (2 pi f_sw))^2`, the least admissible `L C` product (s^2).
    pub fn resonance_threshold(&self) -> f64 {
        (self.kappa / (2.0 * PI * self.f_sw)).powi(2)
    }
}

pub fn derived_output_voltage(spec: &ConverterSpec) -> f64 {
    spec.output_voltage()
}

fn check_component(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidComponent(v))
    }
}

/// Peak inductor current ripple (A) for inductance `l` (H).
pub fn ripple_current(l: f64, spec: &ConverterSpec) -> Result<f64> {
    check_component(l)?;
    Ok(spec.v_s / (2.0 * l) * spec.d / spec.f_sw)
}

/// Peak capacitor voltage ripple (V) for capacitance `c` (F).
pub fn ripple_voltage(c: f64, spec: &ConverterSpec) -> Result<f64> {
    check_component(c)?;
    Ok(spec.output_voltage() / (2.0 * spec.r_load * c) * spec.d / spec.f_sw)
}

/// LC filter resonance frequency (Hz).
pub fn resonance(l: f64, c: f64) -> Result<f64> {
    check_component(l)?;
    check_component(c)?;
    Ok(1.0 / (2.0 * PI * (l * c).sqrt()))
}

/// A catalog part in SI units with its price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub value: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComponentCatalog {
    pub inductors: Vec<Component>,
    pub capacitors: Vec<Component>,
}

impl ComponentCatalog {
    pub fn validate(&self) -> Result<()> {
        if self.inductors.is_empty() || self.capacitors.is_empty() {
            return Err(Error::Infeasible("catalog needs at least one inductor and one capacitor".into()));
        }
        for c in self.inductors.iter().chain(&self.capacitors) {
            check_component(c.value)?;
            if !(c.cost >= 0.0 && c.cost.is_finite()) {
                return Err(Error::InvalidConfig(format!("component cost {} must be non-negative", c.cost)));
            }
        }
        Ok(())
    }
}

/// Penalty weights `M1..M6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignWeights {
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
    #[serde(rename = "M3")]
    pub m3: f64,
    #[serde(rename = "M4")]
    pub m4: f64,
    #[serde(rename = "M5")]
    pub m5: f64,
    #[serde(rename = "M6")]
    pub m6: f64,
}

impl DesignWeights {
    /// `M1..M4 = 5` with the given resonance weights.
    pub fn with_resonance(m5: f64, m6: f64) -> Self {
        DesignWeights {
            m1: 5.0,
            m2: 5.0,
            m3: 5.0,
            m4: 5.0,
            m5,
            m6,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.m1, self.m2, self.m3, self.m4, self.m5, self.m6]
    }

    pub fn validate(&self) -> Result<()> {
        match self.as_array().into_iter().find(|w| !(*w >= 0.0)) {
            Some(w) => Err(Error::NegativeWeight(w)),
            None => Ok(()),
        }
    }
}

/// Unit system for the resonance violation `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationUnits {
    /// `g = 1 - sum z L C / T`, dimensionless.
    #[default]
    Relative,
    /// `g = T - sum z L C` in s^2.
    Si,
}

/// A preprocessed design problem with its qubit layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignInstance {
    pub spec: ConverterSpec,
    pub inductors: Vec<Component>,
    pub capacitors: Vec<Component>,
    pub units: ViolationUnits,
    registry: VarRegistry,
}

/// Drops parts that violate a ripple limit (equality kept) and lays out
/// the qubits.
pub fn preprocess(catalog: &ComponentCatalog, spec: &ConverterSpec) -> Result<DesignInstance> {
    spec.validate()?;
    catalog.validate()?;
    let l_min = spec.min_inductance();
    let c_min = spec.min_capacitance();
    let inductors: Vec<Component> = catalog
        .inductors
        .iter()
        .copied()
        .filter(|c| c.value >= l_min * (1.0 - BOUNDARY_RTOL))
        .collect();
    let capacitors: Vec<Component> = catalog
        .capacitors
        .iter()
        .copied()
        .filter(|c| c.value >= c_min * (1.0 - BOUNDARY_RTOL))
        .collect();
    if inductors.is_empty() {
        return Err(Error::Infeasible(format!(
            "no inductor meets the current-ripple limit (need L >= {l_min:.3e} H)"
        )));
    }
    if capacitors.is_empty() {
        return Err(Error::Infeasible(format!(
            "no capacitor meets the voltage-ripple limit (need C >= {c_min:.3e} F)"
        )));
    }
    Ok(DesignInstance::from_parts(*spec, inductors, capacitors))
}

impl DesignInstance {
    fn from_parts(spec: ConverterSpec, inductors: Vec<Component>, capacitors: Vec<Component>) -> Self {
        let mut registry = VarRegistry::new();
        for i in 0..inductors.len() {
            registry.push(format!("xL{i}"), VarKind::Decision).expect("fresh name");
        }
        for j in 0..capacitors.len() {
            registry.push(format!("xC{j}"), VarKind::Decision).expect("fresh name");
        }
        for i in 0..inductors.len() {
            for j in 0..capacitors.len() {
                registry
                    .push(format!("z{i}{j}"), VarKind::AuxProduct)
                    .expect("fresh name");
            }
        }
        DesignInstance {
            spec,
            inductors,
            capacitors,
            units: ViolationUnits::default(),
            registry,
        }
    }

    pub fn with_units(mut self, units: ViolationUnits) -> Self {
        self.units = units;
        self
    }

    pub fn num_qubits(&self) -> usize {
        let (nl, nc) = (self.inductors.len(), self.capacitors.len());
        nl + nc + nl * nc
    }

    pub fn registry(&self) -> &VarRegistry {
        &self.registry
    }

    pub fn l_var(&self, i: usize) -> usize {
        i
    }

    pub fn c_var(&self, j: usize) -> usize {
        self.inductors.len() + j
    }

    pub fn z_var(&self, i: usize, j: usize) -> usize {
        self.inductors.len() + self.capacitors.len() + i * self.capacitors.len() + j
    }

    fn l_vars(&self) -> Vec<usize> {
        (0..self.inductors.len()).map(|i| self.l_var(i)).collect()
    }

    fn c_vars(&self) -> Vec<usize> {
        (0..self.capacitors.len()).map(|j| self.c_var(j)).collect()
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nc = self.capacitors.len();
        (0..self.inductors.len()).flat_map(move |i| (0..nc).map(move |j| (i, j)))
    }

    /// Linear resonance violation `g(z)`, positive when violated.
    pub fn violation(&self) -> LinearExpr {
        let t = self.spec.resonance_threshold();
        let (scale, constant) = match self.units {
            ViolationUnits::Relative => (1.0 / t, 1.0),
            ViolationUnits::Si => (1.0, t),
        };
        let terms = self
            .pairs()
            .map(|(i, j)| {
                let lc = self.inductors[i].value * self.capacitors[j].value;
                (self.z_var(i, j), -lc * scale)
            })
            .collect();
        LinearExpr::new(terms, constant)
    }

    /// Cost plus the `M1..M4` blocks; the resonance terms are left out.
    pub fn structural_poly(&self, w: &DesignWeights) -> Result<PseudoBooleanPoly> {
        w.validate()?;
        let mut p = PseudoBooleanPoly::new(self.num_qubits());
        for (i, c) in self.inductors.iter().enumerate() {
            p.add_term(&[self.l_var(i)], c.cost)?;
        }
        for (j, c) in self.capacitors.iter().enumerate() {
            p.add_term(&[self.c_var(j)], c.cost)?;
        }
        p = p.add_equality_penalty(&LinearExpr::sum_minus(&self.l_vars(), 1.0), w.m1)?;
        p = p.add_equality_penalty(&LinearExpr::sum_minus(&self.c_vars(), 1.0), w.m2)?;
        let mut rosenberg = PseudoBooleanPoly::new(self.num_qubits());
        for (i, j) in self.pairs() {
            let (x, y, z) = (self.l_var(i), self.c_var(j), self.z_var(i, j));
            rosenberg.add_term(&[z], 3.0)?;
            rosenberg.add_term(&[x, y], 1.0)?;
            rosenberg.add_term(&[x, z], -2.0)?;
            rosenberg.add_term(&[y, z], -2.0)?;
        }
        p.add_poly(&rosenberg, w.m3)?;
        let zs: Vec<usize> = self.pairs().map(|(i, j)| self.z_var(i, j)).collect();
        p.add_equality_penalty(&LinearExpr::sum_minus(&zs, 1.0), w.m4)
    }

    /// The full penalized objective as a polynomial.
    pub fn objective_poly(&self, w: &DesignWeights) -> Result<PseudoBooleanPoly> {
        self.structural_poly(w)?
            .add_unbalanced_penalty(&self.violation(), w.m5, w.m6)
    }

    pub fn build_qubo(&self, weights: &DesignWeights) -> Result<DesignQubo> {
        let qubo = self.objective_poly(weights)?.to_qubo()?;
        Ok(DesignQubo {
            qubo,
            weights: *weights,
            instance: self.clone(),
        })
    }

    /// Reads a basis state back as an engineering design.
    pub fn decode(&self, index: usize) -> DesignSolution {
        let n = self.num_qubits();
        let bit = |v: usize| BitConvention::bit(index, v, n) == 1;
        let ls: Vec<usize> = (0..self.inductors.len()).filter(|&i| bit(self.l_var(i))).collect();
        let cs: Vec<usize> = (0..self.capacitors.len()).filter(|&j| bit(self.c_var(j))).collect();
        let z_consistent = self
            .pairs()
            .all(|(i, j)| bit(self.z_var(i, j)) == (bit(self.l_var(i)) && bit(self.c_var(j))));
        let inductor = (ls.len() == 1).then(|| ls[0]);
        let capacitor = (cs.len() == 1).then(|| cs[0]);
        let one_hot_ok = inductor.is_some() && capacitor.is_some();
        let di_l = inductor.map(|i| ripple_current(self.inductors[i].value, &self.spec).expect("validated part"));
        let dv_c = capacitor.map(|j| ripple_voltage(self.capacitors[j].value, &self.spec).expect("validated part"));
        let ripple_ok = match (di_l, dv_c) {
            (Some(di), Some(dv)) => {
                di <= self.spec.di_max * (1.0 + BOUNDARY_RTOL)
                    && dv <= self.spec.dv_max * (1.0 + BOUNDARY_RTOL)
            }
            _ => false,
        };
        let (cost, f_res, resonance_ok) = match (inductor, capacitor) {
            (Some(i), Some(j)) => {
                let (l, c) = (self.inductors[i], self.capacitors[j]);
                let f = resonance(l.value, c.value).expect("validated part");
                let ok = l.value * c.value >= self.spec.resonance_threshold();
                (Some(l.cost + c.cost), Some(f), ok)
            }
            _ => (None, None, false),
        };
        DesignSolution {
            index,
            inductor,
            capacitor,
            cost,
            di_l,
            dv_c,
            f_res,
            one_hot_ok,
            z_consistent,
            resonance_ok,
            ripple_ok,
        }
    }
}

impl FeasibilityOracle for DesignInstance {
    fn num_vars(&self) -> usize {
        self.num_qubits()
    }

    fn feasible_cost(&self, index: usize) -> Option<f64> {
        let s = self.decode(index);
        if s.feasible() {
            s.cost
        } else {
            None
        }
    }
}

/// The penalized model together with the weights and instance behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignQubo {
    pub qubo: QuboModel,
    pub weights: DesignWeights,
    pub instance: DesignInstance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub index: usize,
    pub inductor: Option<usize>,
    pub capacitor: Option<usize>,
    /// Euros; present only when one inductor and one capacitor are chosen.
    pub cost: Option<f64>,
    pub di_l: Option<f64>,
    pub dv_c: Option<f64>,
    pub f_res: Option<f64>,
    pub one_hot_ok: bool,
    pub z_consistent: bool,
    pub resonance_ok: bool,
    pub ripple_ok: bool,
}

impl DesignSolution {
    pub fn feasible(&self) -> bool {
        self.one_hot_ok && self.z_consistent && self.resonance_ok
    }
}

/// On-disk instance description, with component values in uH / uF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub spec: ConverterSpec,
    pub inductors: Vec<InductorEntry>,
    pub capacitors: Vec<CapacitorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<DesignWeights>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InductorEntry {
    #[serde(rename = "uH")]
    pub micro_henry: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitorEntry {
    #[serde(rename = "uF")]
    pub micro_farad: f64,
    pub cost: f64,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn catalog(&self) -> ComponentCatalog {
        ComponentCatalog {
            inductors: self
                .inductors
                .iter()
                .map(|e| Component {
                    value: e.micro_henry * 1e-6,
                    cost: e.cost,
                })
                .collect(),
            capacitors: self
                .capacitors
                .iter()
                .map(|e| Component {
                    value: e.micro_farad * 1e-6,
                    cost: e.cost,
                })
                .collect(),
        }
    }

    pub fn instance(&self) -> Result<DesignInstance> {
        preprocess(&self.catalog(), &self.spec)
    }
}

const BUILTIN: [(&str, &str); 3] = [
    ("instance1", include_str!("../instances/instance1.json")),
    ("instance2", include_str!("../instances/instance2.json")),
    ("instance3", include_str!("../instances/instance3.json")),
];

/// One of the bundled instances: `instance1`, `instance2` or `instance3`.
pub fn builtin(name: &str) -> Option<InstanceFile> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| InstanceFile::from_json(text).expect("bundled instance parses"))
}

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inst(name: &str) -> DesignInstance {
        builtin(name).unwrap().instance().unwrap()
    }

    #[test]
    fn output_voltage() {
        let spec = ConverterSpec::reference();
        assert_eq!(spec.output_voltage(), 24.0);
        let s = ConverterSpec { d: 0.75, ..spec };
        assert_eq!(derived_output_voltage(&s), 48.0);
        let s = ConverterSpec { d: 1e-12, ..spec };
        assert_relative_eq!(s.output_voltage(), 12.0, max_relative = 1e-9);
    }

    #[test]
    fn ripple_and_resonance_formulas() {
        let spec = ConverterSpec::reference();
        assert_relative_eq!(ripple_current(10e-6, &spec).unwrap(), 3.0, max_relative = 1e-12);
        let dv = ripple_voltage(54e-6, &spec).unwrap();
        assert_relative_eq!(dv, 24.0 * 0.5 / (2.0 * 10.0 * 54e-6 * 1e5), max_relative = 1e-12);
        assert!(dv <= 0.2);
        let f = resonance(22e-6, 115e-6).unwrap();
        assert_relative_eq!(f, 3164.2, max_relative = 1e-3);
        assert!(f <= spec.f_sw / spec.kappa);
        assert!(ripple_current(0.0, &spec).is_err());
        assert!(resonance(1e-6, -1.0).is_err());
    }

    #[test]
    fn thresholds_keep_whole_catalog() {
        let spec = ConverterSpec::reference();
        assert_relative_eq!(spec.min_inductance(), 10e-6, max_relative = 1e-12);
        assert_relative_eq!(spec.min_capacitance(), 30e-6, max_relative = 1e-12);
        assert_relative_eq!(spec.resonance_threshold(), 5.6995e-10, max_relative = 1e-4);
        let sizes: Vec<usize> = builtin_names().map(|n| inst(n).num_qubits()).collect();
        assert_eq!(sizes, vec![8, 11, 15]);
    }

    #[test]
    fn tight_current_ripple_empties_instance() {
        let mut f = builtin("instance1").unwrap();
        f.spec.di_max = 1.0;
        assert!(matches!(f.instance(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn single_large_pair() {
        let catalog = ComponentCatalog {
            inductors: vec![Component { value: 1.0, cost: 1.0 }],
            capacitors: vec![Component { value: 1.0, cost: 1.0 }],
        };
        let d = preprocess(&catalog, &ConverterSpec::reference()).unwrap();
        assert_eq!(d.num_qubits(), 3);
    }

    #[test]
    fn layout_names() {
        let d = inst("instance1");
        let names: Vec<&str> = d.registry().names().iter().map(String::as_str).collect();
        assert_eq!(names, ["xL0", "xL1", "xC0", "xC1", "z00", "z01", "z10", "z11"]);
        assert_eq!(d.z_var(1, 0), 6);
    }

    #[test]
    fn decode_optimal_instance1() {
        let d = inst("instance1");
        let s = d.decode(98);
        assert_eq!(s.inductor, Some(1));
        assert_eq!(s.capacitor, Some(0));
        assert_relative_eq!(s.cost.unwrap(), 1.9, max_relative = 1e-12);
        assert!(s.one_hot_ok && s.z_consistent && s.resonance_ok && s.ripple_ok);
        let empty = d.decode(0);
        assert!(!empty.one_hot_ok);
        assert_eq!(empty.cost, None);
        assert!(!empty.feasible());
    }

    #[test]
    fn decode_instance2_648() {
        let d = inst("instance2");
        let s = d.decode(648);
        assert_eq!((s.inductor, s.capacitor), (Some(1), Some(0)));
        assert!(s.feasible());
    }

    #[test]
    fn negative_weight_rejected() {
        let d = inst("instance1");
        let mut w = DesignWeights::with_resonance(1.0, 1.0);
        w.m3 = -0.5;
        assert!(matches!(d.build_qubo(&w), Err(Error::NegativeWeight(_))));
    }

    #[test]
    fn violation_sign() {
        let d = inst("instance1");
        let g = d.violation();
        let n = d.num_qubits();
        // L=22uH, C=54uF satisfied; L=10uH, C=54uF violated
        let at = |idx: usize| g.eval(&BitConvention::decode(idx, n));
        assert!(at(98) < 0.0);
        assert!(at(BitConvention::encode(&[1, 0, 1, 0, 1, 0, 0, 0]).unwrap()) > 0.0);
    }

    #[test]
    fn instance_json_round_trip() {
        let f = builtin("instance3").unwrap();
        let back = InstanceFile::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        assert!(builtin("instance9").is_none());
    }
}
