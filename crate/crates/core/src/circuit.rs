//! Gate-level QAOA circuits: construction, lowering to `{H, RZ, CX}`,
//! depth and two-qubit counts, and OpenQASM 2.0 text.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::IsingModel;
use crate::qaoa::QaoaParams;
use crate::statevec::{SingleQubitGate, StateVector, TwoQubitGate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Rx(usize, f64),
    Rz(usize, f64),
    /// `exp(-i theta/2 Z Z)`.
    Rzz(usize, usize, f64),
    /// Control first.
    Cx(usize, usize),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "h",
            Gate::X(_) => "x",
            Gate::Rx(..) => "rx",
            Gate::Rz(..) => "rz",
            Gate::Rzz(..) => "rzz",
            Gate::Cx(..) => "cx",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Rx(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Rzz(a, b, _) | Gate::Cx(a, b) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Rz(_, t) | Gate::Rzz(_, _, t) => Some(t),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Rzz(..) | Gate::Cx(..))
    }

    fn check(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::RepeatedQubit(qs[0]));
        }
        if let Some(t) = self.angle() {
            if !t.is_finite() {
                return Err(Error::InvalidParams(format!("non-finite angle {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    pub measure: bool,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit {
            n,
            gates: Vec::new(),
            measure: false,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn with(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    /// Runs the circuit on `state` in place.
    pub fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: state.num_qubits(),
            });
        }
        for g in &self.gates {
            match *g {
                Gate::H(q) => state.apply_mut(SingleQubitGate::H, q)?,
                Gate::X(q) => state.apply_mut(SingleQubitGate::X, q)?,
                Gate::Rx(q, t) => state.apply_mut(SingleQubitGate::Rx(t), q)?,
                Gate::Rz(q, t) => state.apply_mut(SingleQubitGate::Rz(t), q)?,
                Gate::Rzz(a, b, t) => state.apply_two_mut(TwoQubitGate::Rzz(t), a, b)?,
                Gate::Cx(a, b) => state.apply_two_mut(TwoQubitGate::Cx, a, b)?,
            }
        }
        Ok(())
    }

    /// The state reached from `|0...0>`.
    pub fn simulate(&self) -> Result<StateVector> {
        let mut s = StateVector::zero(self.n)?;
        self.apply_to(&mut s)?;
        Ok(s)
    }

    /// Depth of the greedy as-soon-as-possible layering.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n];
        let mut depth = 0;
        for g in &self.gates {
            let qs = g.qubits();
            let layer = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for q in qs {
                level[q] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn count(&self, name: &str) -> usize {
        self.gates.iter().filter(|g| g.name() == name).count()
    }
}

/// The QAOA ansatz for `model`: a Hadamard layer, then per layer the
/// fields as `RZ(2 gamma h_i)` in qubit order, the couplings as
/// `RZZ(2 gamma r_ik)` in `(i, k)` order, and `RX(2 beta)` on every qubit.
pub fn build_qaoa_circuit(model: &IsingModel, params: &QaoaParams) -> Result<Circuit> {
    params.validate()?;
    let n = model.n;
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::H(q))?;
    }
    for (&beta, &gamma) in params.beta.iter().zip(&params.gamma) {
        for (q, &h) in model.h.iter().enumerate() {
            if h != 0.0 {
                c.push(Gate::Rz(q, 2.0 * gamma * h))?;
            }
        }
        for (&(i, k), &r) in &model.r {
            if r != 0.0 {
                c.push(Gate::Rzz(i, k, 2.0 * gamma * r))?;
            }
        }
        for q in 0..n {
            c.push(Gate::Rx(q, 2.0 * beta))?;
        }
    }
    c.measure = true;
    Ok(c)
}

fn lower(g: Gate, out: &mut Vec<Gate>, all: bool) {
    match g {
        Gate::Rzz(a, b, t) => out.extend([Gate::Cx(a, b), Gate::Rz(b, t), Gate::Cx(a, b)]),
        Gate::Rx(q, t) if all => out.extend([Gate::H(q), Gate::Rz(q, t), Gate::H(q)]),
        Gate::X(q) if all => out.extend([Gate::H(q), Gate::Rz(q, std::f64::consts::PI), Gate::H(q)]),
        other => out.push(other),
    }
}

/// Rewrites the circuit over `{H, RZ, CX}`; equal up to global phase.
pub fn decompose(c: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(c.gates.len());
    for &g in &c.gates {
        lower(g, &mut gates, true);
    }
    Circuit {
        n: c.n,
        gates,
        measure: c.measure,
    }
}

/// Only replaces `RZZ` by `CX RZ CX`.
pub fn decompose_rzz(c: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(c.gates.len());
    for &g in &c.gates {
        lower(g, &mut gates, false);
    }
    Circuit {
        n: c.n,
        gates,
        measure: c.measure,
    }
}

/// OpenQASM 2.0 text; `RZZ` gates are written as `cx; rz; cx`.
pub fn export_qasm(c: &Circuit) -> String {
    let c = decompose_rzz(c);
    let mut s = String::new();
    s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", c.n);
    let _ = writeln!(s, "creg c[{}];", c.n);
    for g in &c.gates {
        let _ = match *g {
            Gate::H(q) | Gate::X(q) => writeln!(s, "{} q[{q}];", g.name()),
            Gate::Rx(q, t) | Gate::Rz(q, t) => writeln!(s, "{}({t:.16e}) q[{q}];", g.name()),
            Gate::Cx(a, b) => writeln!(s, "cx q[{a}],q[{b}];"),
            Gate::Rzz(..) => unreachable!("lowered above"),
        };
    }
    if c.measure {
        s.push_str("measure q -> c;\n");
    }
    s
}

fn parse_qubit(tok: &str) -> Option<usize> {
    tok.trim().strip_prefix("q[")?.strip_suffix(']')?.parse().ok()
}

/// Reads back text written by [`export_qasm`].
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let err = |message: &str| Error::QasmParse {
            line: line_no,
            message: message.to_string(),
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let stmt = line.strip_suffix(';').ok_or_else(|| err("missing ';'"))?.trim();
        if stmt.starts_with("OPENQASM") || stmt.starts_with("include") || stmt.starts_with("creg") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            let n = rest
                .trim()
                .strip_prefix("q[")
                .and_then(|r| r.strip_suffix(']'))
                .and_then(|r| r.parse().ok())
                .ok_or_else(|| err("bad qreg"))?;
            circuit = Some(Circuit::new(n));
            continue;
        }
        let c = circuit.as_mut().ok_or_else(|| err("gate before qreg"))?;
        if stmt == "measure q -> c" {
            c.measure = true;
            continue;
        }
        let (head, args) = stmt.split_once(' ').ok_or_else(|| err("expected gate and operands"))?;
        let (name, angle) = match head.split_once('(') {
            Some((name, a)) => {
                let a = a.strip_suffix(')').ok_or_else(|| err("unclosed angle"))?;
                (name, Some(a.parse::<f64>().map_err(|_| err("bad angle"))?))
            }
            None => (head, None),
        };
        let qs: Vec<usize> = args
            .split(',')
            .map(parse_qubit)
            .collect::<Option<_>>()
            .ok_or_else(|| err("bad operand"))?;
        let gate = match (name, angle, qs.as_slice()) {
            ("h", None, &[q]) => Gate::H(q),
            ("x", None, &[q]) => Gate::X(q),
            ("rx", Some(t), &[q]) => Gate::Rx(q, t),
            ("rz", Some(t), &[q]) => Gate::Rz(q, t),
            ("cx", None, &[a, b]) => Gate::Cx(a, b),
            _ => return Err(Error::UnknownGate(stmt.to_string())),
        };
        c.push(gate).map_err(|e| err(&e.to_string()))?;
    }
    circuit.ok_or(Error::QasmParse {
        line: 0,
        message: "no qreg declaration".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::qaoa_state;
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// Column `j` is the circuit applied to basis state `j`.
    fn unitary(c: &Circuit) -> Vec<Vec<Complex64>> {
        (0..1usize << c.num_qubits())
            .map(|j| {
                let mut s = StateVector::basis(c.num_qubits(), j).unwrap();
                c.apply_to(&mut s).unwrap();
                s.into_amplitudes()
            })
            .collect()
    }

    fn equal_up_to_phase(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> bool {
        let flat_a: Vec<Complex64> = a.iter().flatten().copied().collect();
        let flat_b: Vec<Complex64> = b.iter().flatten().copied().collect();
        let k = flat_a.iter().position(|z| z.norm() > 1e-6).unwrap();
        let phase = flat_b[k] / flat_a[k];
        (phase.norm() - 1.0).abs() < 1e-12
            && flat_a.iter().zip(&flat_b).all(|(x, y)| (x * phase - y).norm() < 1e-12)
    }

    fn didactic() -> IsingModel {
        let mut m = IsingModel::zeros(4);
        m.h = vec![1.0, -1.0, -1.0, 1.0];
        for i in 0..3 {
            m.add_coupling(i, i + 1, 0.5).unwrap();
        }
        m.offset = -1.5;
        m
    }

    #[test]
    fn didactic_gate_census() {
        let p = QaoaParams::new(vec![0.3], vec![0.7]).unwrap();
        let c = build_qaoa_circuit(&didactic(), &p).unwrap();
        assert_eq!([c.count("h"), c.count("rz"), c.count("rzz"), c.count("rx")], [4, 4, 3, 4]);
    }

    #[test]
    fn zero_model_has_only_h_and_rx() {
        let p = QaoaParams::new(vec![0.3], vec![0.7]).unwrap();
        let c = build_qaoa_circuit(&IsingModel::zeros(3), &p).unwrap();
        assert_eq!(c.gates().len(), 6);
        assert_eq!(c.count("h") + c.count("rx"), 6);
    }

    #[test]
    fn circuit_matches_fast_path() {
        let m = didactic();
        let p = QaoaParams::new(vec![0.4, -0.2], vec![0.9, 0.35]).unwrap();
        let fast = qaoa_state(&m, &p).unwrap();
        let slow = build_qaoa_circuit(&m, &p).unwrap().simulate().unwrap();
        assert!((slow.fidelity_amplitude(&fast) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rzz_identity() {
        for theta in [0.3, std::f64::consts::FRAC_PI_2, -1.1] {
            let c = Circuit::new(2).with(Gate::Rzz(0, 1, theta)).unwrap();
            let d = decompose(&c);
            assert_eq!(d.gates(), &[Gate::Cx(0, 1), Gate::Rz(1, theta), Gate::Cx(0, 1)]);
            assert!(equal_up_to_phase(&unitary(&c), &unitary(&d)));
        }
    }

    #[test]
    fn rx_and_x_identities() {
        for theta in [0.3, 2.0, -1.1] {
            let c = Circuit::new(1).with(Gate::Rx(0, theta)).unwrap();
            let d = decompose(&c);
            assert_eq!(d.gates(), &[Gate::H(0), Gate::Rz(0, theta), Gate::H(0)]);
            assert!(equal_up_to_phase(&unitary(&c), &unitary(&d)));
        }
        let c = Circuit::new(1).with(Gate::X(0)).unwrap();
        assert!(equal_up_to_phase(&unitary(&c), &unitary(&decompose(&c))));
    }

    #[test]
    fn h_cx_untouched() {
        let c = Circuit::new(2)
            .with(Gate::H(0))
            .unwrap()
            .with(Gate::Cx(0, 1))
            .unwrap();
        assert_eq!(decompose(&c), c);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(Circuit::new(3).depth(), 0);
        let c = Circuit::new(2)
            .with(Gate::H(0))
            .unwrap()
            .with(Gate::H(1))
            .unwrap()
            .with(Gate::Cx(0, 1))
            .unwrap();
        assert_eq!((c.depth(), c.two_qubit_count()), (2, 1));
    }

    #[test]
    fn rejects_bad_gates() {
        let mut c = Circuit::new(2);
        assert!(matches!(c.push(Gate::H(2)), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(c.push(Gate::Cx(1, 1)), Err(Error::RepeatedQubit(1))));
        assert!(c.push(Gate::Rz(0, f64::NAN)).is_err());
    }

    #[test]
    fn bell_qasm() {
        let mut c = Circuit::new(2)
            .with(Gate::H(0))
            .unwrap()
            .with(Gate::Cx(0, 1))
            .unwrap();
        c.measure = true;
        let text = export_qasm(&c);
        let h = text.find("h q[0];").unwrap();
        let cx = text.find("cx q[0],q[1];").unwrap();
        assert!(h < cx);
        assert!(text.starts_with("OPENQASM 2.0;"));
        assert!(text.ends_with("measure q -> c;\n"));
        assert_eq!(parse_qasm(&text).unwrap(), c);
    }

    #[test]
    fn empty_qasm() {
        let text = export_qasm(&Circuit::new(3));
        assert_eq!(text, "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[3];\n");
        assert_eq!(parse_qasm(&text).unwrap(), Circuit::new(3));
    }

    #[test]
    fn qasm_rejects_foreign_gates() {
        let text = "OPENQASM 2.0;\nqreg q[2];\nccx q[0],q[1];\n";
        assert!(matches!(parse_qasm(text), Err(Error::UnknownGate(_))));
        assert!(matches!(parse_qasm("h q[0];\n"), Err(Error::QasmParse { line: 1, .. })));
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let q = 0..n;
        let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
        let t = -4.0f64..4.0;
        prop_oneof![
            q.clone().prop_map(Gate::H),
            q.clone().prop_map(Gate::X),
            (q.clone(), t.clone()).prop_map(|(q, t)| Gate::Rx(q, t)),
            (q, t.clone()).prop_map(|(q, t)| Gate::Rz(q, t)),
            (pair.clone(), t).prop_map(|((a, b), t)| Gate::Rzz(a, b, t)),
            pair.prop_map(|(a, b)| Gate::Cx(a, b)),
        ]
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        (2usize..=5).prop_flat_map(|n| {
            proptest::collection::vec(arb_gate(n), 0..30).prop_map(move |gs| {
                let mut c = Circuit::new(n);
                for g in gs {
                    c.push(g).unwrap();
                }
                c
            })
        })
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn decomposition_preserves_state(c in arb_circuit(), seed in any::<u64>()) {
            let mut a = random_state(c.num_qubits(), seed);
            let mut b = a.clone();
            c.apply_to(&mut a).unwrap();
            let d = decompose(&c);
            d.apply_to(&mut b).unwrap();
            prop_assert!((a.fidelity_amplitude(&b) - 1.0).abs() < 1e-9);
            // each RZZ (one two-qubit gate) becomes two CX
            prop_assert_eq!(d.two_qubit_count(), c.two_qubit_count() + c.count("rzz"));
            prop_assert_eq!(d.count("cx"), c.count("cx") + 2 * c.count("rzz"));
            prop_assert!(d.gates().iter().all(|g| matches!(g, Gate::H(_) | Gate::Rz(..) | Gate::Cx(..))));
        }

        #[test]
        fn qasm_round_trip(c in arb_circuit()) {
            let lowered = decompose_rzz(&c);
            prop_assert_eq!(parse_qasm(&export_qasm(&c)).unwrap(), lowered);
        }

        #[test]
        fn depth_ignores_commuting_swap(c in arb_circuit()) {
            // swapping adjacent gates on disjoint qubits keeps the layering
            let gates = c.gates().to_vec();
            if let Some(k) = (1..gates.len()).find(|&k| {
                let (a, b) = (gates[k - 1].qubits(), gates[k].qubits());
                a.iter().all(|q| !b.contains(q))
            }) {
                let mut swapped = gates.clone();
                swapped.swap(k - 1, k);
                let mut d = Circuit::new(c.num_qubits());
                for g in swapped {
                    d.push(g).unwrap();
                }
                prop_assert_eq!(d.depth(), c.depth());
            }
        }
    }
}
