//! Pseudo-Boolean polynomials and the constructions that turn constrained
//! binary problems into penalized, at-most-quadratic objectives.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::QuboModel;

/// Coefficients smaller than this in magnitude are dropped on simplification.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// A polynomial over binary variables, with `x_i^2 = x_i` always reduced.
///
/// Term keys are strictly increasing index lists; the empty key is the
/// constant term.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PseudoBooleanPoly {
    num_vars: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

/// `sum_i a_i x_i + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinearExpr {
    pub fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        LinearExpr { terms, constant }
    }

    /// Sum of the listed variables minus `rhs`, i.e. the residual of
    /// `sum x_i = rhs`.
    pub fn sum_minus(vars: &[usize], rhs: f64) -> Self {
        LinearExpr {
            terms: vars.iter().map(|&v| (v, 1.0)).collect(),
            constant: -rhs,
        }
    }

    /// Coefficients merged per variable, zeros removed, ascending index.
    pub fn merged(&self) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(v, a) in &self.terms {
            *acc.entry(v).or_insert(0.0) += a;
        }
        acc.into_iter().filter(|&(_, a)| a != 0.0).collect()
    }

    pub fn eval(&self, bits: &[u8]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|&(v, a)| a * bits[v] as f64)
                .sum::<f64>()
    }

    fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.merged().is_empty()
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|&(v, _)| v).max()
    }
}

/// Auxiliary variable `w = x_a x_b` introduced by quadratization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuxProduct {
    pub index: usize,
    pub factors: (usize, usize),
}

impl PseudoBooleanPoly {
    pub fn new(num_vars: usize) -> Self {
        PseudoBooleanPoly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn coefficient(&self, vars: &[usize]) -> f64 {
        let key = normalize_key(vars);
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn constant(&self) -> f64 {
        self.coefficient(&[])
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Extends the variable range; existing terms are untouched.
    pub fn grow(&mut self, extra: usize) -> std::ops::Range<usize> {
        let start = self.num_vars;
        self.num_vars += extra;
        start..self.num_vars
    }

    /// Accumulates `coeff * prod(x_v)`, reducing repeated indices.
    pub fn add_term(&mut self, vars: &[usize], coeff: f64) -> Result<()> {
        if let Some(&bad) = vars.iter().find(|&&v| v >= self.num_vars) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                num_vars: self.num_vars,
            });
        }
        let key = normalize_key(vars);
        let slot = self.terms.entry(key.clone()).or_insert(0.0);
        *slot += coeff;
        if slot.abs() < PRUNE_THRESHOLD {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn add_constant(&mut self, c: f64) {
        // empty key never fails the range check
        let _ = self.add_term(&[], c);
    }

    pub fn add_poly(&mut self, other: &PseudoBooleanPoly, scale: f64) -> Result<()> {
        for (k, c) in other.terms() {
            self.add_term(k, scale * c)?;
        }
        Ok(())
    }

    /// Drops near-zero coefficients. Idempotent.
    pub fn simplify(mut self) -> Self {
        self.terms.retain(|_, c| c.abs() >= PRUNE_THRESHOLD);
        self
    }

    pub fn eval(&self, bits: &[u8]) -> Result<f64> {
        check_bits(bits, self.num_vars)?;
        Ok(self
            .terms
            .iter()
            .filter(|(k, _)| k.iter().all(|&v| bits[v] == 1))
            .map(|(_, &c)| c)
            .sum())
    }

    fn check_expr(&self, expr: &LinearExpr) -> Result<()> {
        match expr.max_index() {
            Some(m) if m >= self.num_vars => Err(Error::IndexOutOfRange {
                index: m,
                num_vars: self.num_vars,
            }),
            _ => Ok(()),
        }
    }

    /// Adds `scale * expr^2`, expanded with `x^2 = x`.
    fn add_squared(&mut self, expr: &LinearExpr, scale: f64) -> Result<()> {
        let lin = expr.merged();
        let c = expr.constant;
        for (a_pos, &(i, a)) in lin.iter().enumerate() {
            self.add_term(&[i], scale * (a * a + 2.0 * c * a))?;
            for &(j, b) in &lin[a_pos + 1..] {
                self.add_term(&[i, j], scale * 2.0 * a * b)?;
            }
        }
        self.add_constant(scale * c * c);
        Ok(())
    }

    fn add_linear(&mut self, expr: &LinearExpr, scale: f64) -> Result<()> {
        for (i, a) in expr.merged() {
            self.add_term(&[i], scale * a)?;
        }
        self.add_constant(scale * expr.constant);
        Ok(())
    }

    /// `p + weight * (a^T x - b)^2` where `expr` holds `a^T x - b`.
    pub fn add_equality_penalty(mut self, expr: &LinearExpr, weight: f64) -> Result<Self> {
        check_weight(weight)?;
        self.check_expr(expr)?;
        if weight == 0.0 || expr.is_zero() {
            return Ok(self);
        }
        self.add_squared(expr, weight)?;
        Ok(self)
    }

    /// Encodes `a^T x <= b` exactly with binary slack bits
    /// `s = sum_k 2^k s_k`, adding `weight * (a^T x + s - b)^2`.
    ///
    /// The slack count is `ceil(log2(b - min_x a^T x + 1))`. Returns the
    /// indices of the appended slack variables, least significant first.
    pub fn encode_slack_inequality(
        mut self,
        coeffs: &[(usize, f64)],
        bound: f64,
        weight: f64,
    ) -> Result<(Self, Vec<usize>)> {
        check_weight(weight)?;
        let lhs = LinearExpr::new(coeffs.to_vec(), 0.0);
        self.check_expr(&lhs)?;
        for &(_, a) in coeffs {
            if a.fract() != 0.0 || !a.is_finite() {
                return Err(Error::NonIntegerCoefficient(a));
            }
        }
        if bound.fract() != 0.0 || !bound.is_finite() {
            return Err(Error::NonIntegerCoefficient(bound));
        }
        let merged = lhs.merged();
        let min_lhs: i64 = merged.iter().map(|&(_, a)| (a as i64).min(0)).sum();
        let b = bound as i64;
        let range = b - min_lhs;
        if range < 0 {
            return Err(Error::UnsatisfiableInequality { bound: b, min_lhs });
        }
        let k = slack_bits(range as u64);
        let slack: Vec<usize> = self.grow(k).collect();
        let mut terms = merged;
        terms.extend(slack.iter().enumerate().map(|(bit, &v)| (v, (1u64 << bit) as f64)));
        let expr = LinearExpr::new(terms, -bound);
        if weight > 0.0 {
            self.add_squared(&expr, weight)?;
        }
        Ok((self, slack))
    }

    /// `p + lambda1 * g + lambda2 * g^2` for a linear violation measure `g`
    /// (positive when the inequality is violated).
    pub fn add_unbalanced_penalty(
        mut self,
        g: &LinearExpr,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        check_weight(lambda1)?;
        check_weight(lambda2)?;
        self.check_expr(g)?;
        if lambda1 != 0.0 {
            self.add_linear(g, lambda1)?;
        }
        if lambda2 != 0.0 {
            self.add_squared(g, lambda2)?;
        }
        Ok(self)
    }

    /// Reduces cubic terms to quadratic ones by substituting `w = x_a x_b`
    /// (the two lowest indices of each cubic term) with the Rosenberg
    /// penalty `weight * (3w + x_a x_b - 2 x_a w - 2 x_b w)`.
    ///
    /// A pair shared by several cubic terms reuses one auxiliary variable.
    pub fn rosenberg_quadratize(self, weight: f64) -> Result<(Self, Vec<AuxProduct>)> {
        check_weight(weight)?;
        let degree = self.degree();
        if degree > 3 {
            return Err(Error::DegreeTooHigh {
                found: degree,
                max: 3,
            });
        }
        if degree < 3 {
            return Ok((self, Vec::new()));
        }
        let mut out = PseudoBooleanPoly::new(self.num_vars);
        let mut aux: Vec<AuxProduct> = Vec::new();
        let mut by_pair: HashMap<(usize, usize), usize> = HashMap::new();
        for (key, c) in self.terms() {
            if key.len() < 3 {
                out.add_term(key, c)?;
                continue;
            }
            let pair = (key[0], key[1]);
            let w = match by_pair.get(&pair) {
                Some(&w) => w,
                None => {
                    let w = out.grow(1).start;
                    by_pair.insert(pair, w);
                    aux.push(AuxProduct {
                        index: w,
                        factors: pair,
                    });
                    w
                }
            };
            out.add_term(&[w, key[2]], c)?;
        }
        for a in &aux {
            let (x, y) = a.factors;
            let w = a.index;
            out.add_term(&[w], 3.0 * weight)?;
            out.add_term(&[x, y], weight)?;
            out.add_term(&[x, w], -2.0 * weight)?;
            out.add_term(&[y, w], -2.0 * weight)?;
        }
        Ok((out, aux))
    }

    /// Normalizes an at-most-quadratic polynomial into matrix form.
    pub fn to_qubo(&self) -> Result<QuboModel> {
        let degree = self.degree();
        if degree > 2 {
            return Err(Error::DegreeTooHigh {
                found: degree,
                max: 2,
            });
        }
        let mut model = QuboModel::zeros(self.num_vars);
        for (key, c) in self.terms() {
            match *key {
                [] => model.offset += c,
                [i] => model.c[i] += c,
                [i, j] => model.add_pair(i, j, c),
                _ => unreachable!(),
            }
        }
        Ok(model)
    }
}

/// Smallest `K` with `2^K - 1 >= range`, i.e. `ceil(log2(range + 1))`.
pub fn slack_bits(range: u64) -> usize {
    (u64::BITS - range.leading_zeros()) as usize
}

fn normalize_key(vars: &[usize]) -> Vec<usize> {
    let mut key = vars.to_vec();
    key.sort_unstable();
    key.dedup();
    key
}

fn check_weight(w: f64) -> Result<()> {
    if w < 0.0 || w.is_nan() {
        Err(Error::NegativeWeight(w))
    } else {
        Ok(())
    }
}

pub(crate) fn check_bits(bits: &[u8], n: usize) -> Result<()> {
    if bits.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: bits.len(),
        });
    }
    if let Some((pos, &b)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
        return Err(Error::Alphabet {
            position: pos,
            value: b as i64,
            alphabet: "binary",
        });
    }
    Ok(())
}

/// Role a variable plays in an encoded problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Decision,
    AuxProduct,
    Slack,
}

/// Names and roles for a contiguous 0-based variable range.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarRegistry {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    index: HashMap<String, usize>,
}

impl VarRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a fresh name and returns its index. Duplicate names are
    /// rejected by returning the existing index as an error value.
    pub fn push(&mut self, name: impl Into<String>, kind: VarKind) -> std::result::Result<usize, usize> {
        let name = name.into();
        if let Some(&existing) = self.index.get(&name) {
            return Err(existing);
        }
        let idx = self.names.len();
        self.index.insert(name.clone(), idx);
        self.names.push(name);
        self.kinds.push(kind);
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn kind(&self, idx: usize) -> VarKind {
        self.kinds[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn didactic() -> PseudoBooleanPoly {
        let mut p = PseudoBooleanPoly::new(4);
        p.add_term(&[0], -3.0).unwrap();
        p.add_term(&[3], -3.0).unwrap();
        p.add_term(&[0, 1], 2.0).unwrap();
        p.add_term(&[1, 2], 2.0).unwrap();
        p.add_term(&[2, 3], 2.0).unwrap();
        p
    }

    fn all_assignments(n: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..1usize << n).map(move |i| crate::bits::BitConvention::decode(i, n))
    }

    #[test]
    fn didactic_eval() {
        let p = didactic();
        assert_eq!(p.eval(&[1, 0, 0, 1]).unwrap(), -6.0);
        assert_eq!(p.eval(&[0, 0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn eval_rejects_bad_input() {
        let p = didactic();
        assert!(matches!(p.eval(&[1, 0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(p.eval(&[1, 0, 3, 0]), Err(Error::Alphabet { .. })));
    }

    #[test]
    fn repeated_index_reduces() {
        let mut p = PseudoBooleanPoly::new(2);
        p.add_term(&[1, 1, 0], 2.0).unwrap();
        assert_eq!(p.coefficient(&[0, 1]), 2.0);
        assert_eq!(p.degree(), 2);
        assert!(p.add_term(&[2], 1.0).is_err());
    }

    #[test]
    fn cancellation_prunes_term() {
        let mut p = PseudoBooleanPoly::new(2);
        p.add_term(&[0, 1], 1.5).unwrap();
        p.add_term(&[1, 0], -1.5).unwrap();
        assert_eq!(p.terms().count(), 0);
    }

    #[test]
    fn one_hot_penalty_expansion() {
        let p = PseudoBooleanPoly::new(2)
            .add_equality_penalty(&LinearExpr::sum_minus(&[0, 1], 1.0), 5.0)
            .unwrap();
        assert_eq!(p.coefficient(&[0]), -5.0);
        assert_eq!(p.coefficient(&[1]), -5.0);
        assert_eq!(p.coefficient(&[0, 1]), 10.0);
        assert_eq!(p.constant(), 5.0);
    }

    #[test]
    fn equality_penalty_trivial_cases() {
        let base = didactic();
        let zero = LinearExpr::new(vec![(0, 0.0)], 0.0);
        assert_eq!(base.clone().add_equality_penalty(&zero, 3.0).unwrap(), base);
        let e = LinearExpr::sum_minus(&[0, 1], 1.0);
        assert_eq!(base.clone().add_equality_penalty(&e, 0.0).unwrap(), base);
        assert!(matches!(
            base.add_equality_penalty(&e, -1.0),
            Err(Error::NegativeWeight(_))
        ));
    }

    #[test]
    fn unbalanced_one_minus_x() {
        let g = LinearExpr::new(vec![(0, -1.0)], 1.0);
        let p = PseudoBooleanPoly::new(1)
            .add_unbalanced_penalty(&g, 1.0, 1.0)
            .unwrap();
        assert_eq!(p.constant(), 2.0);
        assert_eq!(p.coefficient(&[0]), -2.0);
        let zero = LinearExpr::default();
        let q = didactic().add_unbalanced_penalty(&zero, 2.0, 3.0).unwrap();
        assert_eq!(q, didactic());
        assert!(didactic().add_unbalanced_penalty(&g, -0.1, 0.0).is_err());
    }

    fn min_over_slack(p: &PseudoBooleanPoly, x: &[u8], slack: &[usize]) -> f64 {
        let n = p.num_vars();
        (0..1usize << slack.len())
            .map(|s| {
                let mut bits = vec![0u8; n];
                bits[..x.len()].copy_from_slice(x);
                for (k, &v) in slack.iter().enumerate() {
                    bits[v] = ((s >> k) & 1) as u8;
                }
                p.eval(&bits).unwrap()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn slack_at_most_two_of_three() {
        let (p, slack) = PseudoBooleanPoly::new(3)
            .encode_slack_inequality(&[(0, 1.0), (1, 1.0), (2, 1.0)], 2.0, 1.0)
            .unwrap();
        assert_eq!(slack, vec![3, 4]);
        let mut satisfied = 0;
        for x in all_assignments(3) {
            let pen = min_over_slack(&p, &x, &slack);
            let ok = x.iter().map(|&b| b as u32).sum::<u32>() <= 2;
            if ok {
                satisfied += 1;
                assert_eq!(pen, 0.0);
            } else {
                assert!(pen >= 1.0);
            }
        }
        assert_eq!(satisfied, 7);
    }

    #[test]
    fn slack_bit_counts() {
        let (_, s) = PseudoBooleanPoly::new(1)
            .encode_slack_inequality(&[(0, 1.0)], 1.0, 1.0)
            .unwrap();
        assert_eq!(s.len(), 1);
        let (p, s) = PseudoBooleanPoly::new(1)
            .encode_slack_inequality(&[(0, -1.0)], 0.0, 2.0)
            .unwrap();
        assert_eq!(s.len(), 1);
        for x in [[0u8], [1u8]] {
            assert_eq!(min_over_slack(&p, &x, &s), 0.0);
        }
        assert_eq!(slack_bits(0), 0);
        assert_eq!(slack_bits(2), 2);
        assert_eq!(slack_bits(3), 2);
        assert_eq!(slack_bits(4), 3);
    }

    #[test]
    fn slack_errors() {
        let p = PseudoBooleanPoly::new(2);
        assert!(matches!(
            p.clone().encode_slack_inequality(&[(0, 0.5)], 1.0, 1.0),
            Err(Error::NonIntegerCoefficient(_))
        ));
        assert!(matches!(
            p.encode_slack_inequality(&[(0, 1.0), (1, 1.0)], -1.0, 1.0),
            Err(Error::UnsatisfiableInequality { bound: -1, min_lhs: 0 })
        ));
    }

    #[test]
    fn rosenberg_penalty_table() {
        // 3w + xy - 2xw - 2yw over all (x, y, w)
        for idx in 0..8 {
            let b = crate::bits::BitConvention::decode(idx, 3);
            let (x, y, w) = (b[0] as i32, b[1] as i32, b[2] as i32);
            let h = 3 * w + x * y - 2 * x * w - 2 * y * w;
            if w == x * y {
                assert_eq!(h, 0);
            } else {
                assert!(h >= 1);
            }
        }
    }

    #[test]
    fn rosenberg_cubic_minimum() {
        let mut p = PseudoBooleanPoly::new(3);
        p.add_term(&[0, 1, 2], 1.0).unwrap();
        let (q, aux) = p.clone().rosenberg_quadratize(5.0).unwrap();
        assert_eq!(aux.len(), 1);
        assert_eq!(q.num_vars(), 4);
        assert!(q.degree() <= 2);
        let orig_min = all_assignments(3)
            .map(|x| p.eval(&x).unwrap())
            .fold(f64::INFINITY, f64::min);
        let quad_min = all_assignments(4)
            .map(|x| q.eval(&x).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(orig_min, quad_min);
    }

    #[test]
    fn rosenberg_passthrough_and_degree_guard() {
        let (q, aux) = didactic().rosenberg_quadratize(3.0).unwrap();
        assert!(aux.is_empty());
        assert_eq!(q, didactic());
        let mut p = PseudoBooleanPoly::new(4);
        p.add_term(&[0, 1, 2, 3], 1.0).unwrap();
        assert!(matches!(
            p.rosenberg_quadratize(1.0),
            Err(Error::DegreeTooHigh { found: 4, max: 3 })
        ));
    }

    #[test]
    fn to_qubo_didactic() {
        let q = didactic().to_qubo().unwrap();
        assert_eq!(q.c, vec![-3.0, 0.0, 0.0, -3.0]);
        assert_eq!(q.get(0, 1), 1.0);
        assert_eq!(q.get(1, 0), 1.0);
        assert_eq!(q.get(1, 2), 1.0);
        assert_eq!(q.get(2, 3), 1.0);
        assert_eq!(q.get(0, 3), 0.0);
        for x in all_assignments(4) {
            assert_eq!(q.eval(&x).unwrap(), didactic().eval(&x).unwrap());
        }
    }

    #[test]
    fn to_qubo_constant_and_degree_guard() {
        let mut p = PseudoBooleanPoly::new(2);
        p.add_constant(4.5);
        let q = p.to_qubo().unwrap();
        assert_eq!(q.offset, 4.5);
        assert!(q.c.iter().all(|&c| c == 0.0));
        let mut cubic = PseudoBooleanPoly::new(3);
        cubic.add_term(&[0, 1, 2], 1.0).unwrap();
        assert!(cubic.to_qubo().is_err());
    }

    #[test]
    fn registry_contiguous_unique() {
        let mut r = VarRegistry::new();
        assert_eq!(r.push("a", VarKind::Decision), Ok(0));
        assert_eq!(r.push("w", VarKind::AuxProduct), Ok(1));
        assert_eq!(r.push("a", VarKind::Slack), Err(0));
        assert_eq!(r.get("w"), Some(1));
        assert_eq!(r.kind(1), VarKind::AuxProduct);
        assert_eq!(r.len(), 2);
    }
}
