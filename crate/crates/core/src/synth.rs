//! Penalty-model synthesis: find `h`, `J` whose ground manifold is a truth table.
//!
//! For every valid assignment `v` the energy must equal a common level `E0`,
//! and every invalid `u` must sit at least `gap` above it. All of these are
//! linear in the unknown coefficients, so the search is a linear program over
//! `2^n` constraints.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};
use crate::gates::{verify_gate, GateTemplate, TruthTable};
use crate::ising::IsingModel;

/// Largest table arity accepted.
pub const MAX_SYNTH_VARS: usize = 10;

/// Which pairs may carry a coupling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CouplingGraph {
    Complete,
    Edges(Vec<(usize, usize)>),
}

impl CouplingGraph {
    fn pairs(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        match self {
            CouplingGraph::Complete => Ok((0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect()),
            CouplingGraph::Edges(edges) => {
                let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
                for &(i, j) in edges {
                    if i >= n || j >= n {
                        return Err(Error::IndexOutOfRange { index: i.max(j), n });
                    }
                    if i == j {
                        return Err(Error::SelfCoupling(i));
                    }
                    pairs.push((i.min(j), i.max(j)));
                }
                pairs.sort_unstable();
                pairs.dedup();
                Ok(pairs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOptions {
    pub graph: CouplingGraph,
    /// Required separation of invalid states.
    pub gap: f64,
    /// Bound on every `|h_i|` and `|J_ij|`.
    pub bound: f64,
}

impl SynthesisOptions {
    pub fn new(gap: f64, bound: f64) -> Self {
        Self {
            graph: CouplingGraph::Complete,
            gap,
            bound,
        }
    }
}

/// Spin-product features of one assignment: `[s_0 .. s_{n-1}, s_i s_j ...]`.
fn features(bits: u64, n: usize, pairs: &[(usize, usize)]) -> Vec<f64> {
    let s: Vec<f64> = (0..n)
        .map(|i| if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 })
        .collect();
    let mut f = s.clone();
    f.extend(pairs.iter().map(|&(i, j)| s[i] * s[j]));
    f
}

fn row_bits(bits: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (bits >> i) & 1 == 1).collect()
}

fn lp_error(e: microlp::Error) -> Error {
    Error::Parameter(format!("linear program: {e}"))
}

struct Rows {
    valid: Vec<Vec<f64>>,
    invalid: Vec<Vec<f64>>,
}

fn build_rows(table: &TruthTable, pairs: &[(usize, usize)]) -> Rows {
    let n = table.n_vars();
    let mut rows = Rows {
        valid: Vec::new(),
        invalid: Vec::new(),
    };
    for bits in 0..1u64 << n {
        let f = features(bits, n, pairs);
        if table.contains(&row_bits(bits, n)) {
            rows.valid.push(f);
        } else {
            rows.invalid.push(f);
        }
    }
    rows
}

/// Largest achievable gap within the bound, and the invalid-state count that
/// falls short of `target` at that optimum.
fn max_gap(rows: &Rows, n_coef: usize, bound: f64, target: f64) -> Result<(f64, usize)> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let coef: Vec<Variable> = (0..n_coef).map(|_| lp.add_var(0.0, (-bound, bound))).collect();
    let e0 = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let gap = lp.add_var(1.0, (0.0, f64::INFINITY));
    for f in &rows.valid {
        let mut terms: Vec<(Variable, f64)> = coef.iter().copied().zip(f.iter().copied()).collect();
        terms.push((e0, -1.0));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, 0.0);
    }
    for f in &rows.invalid {
        let mut terms: Vec<(Variable, f64)> = coef.iter().copied().zip(f.iter().copied()).collect();
        terms.push((e0, -1.0));
        terms.push((gap, -1.0));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let sol = lp
        .solve()
        .map_err(lp_error)?
        .into_solution()
        .map_err(|_| Error::Parameter("linear program interrupted".into()))?;
    let x: Vec<f64> = coef.iter().map(|&v| sol.var_value(v)).collect();
    let level = sol.var_value(e0);
    let short = rows
        .invalid
        .iter()
        .filter(|f| dot(&x, f) - level < target - 1e-9)
        .count();
    Ok((sol.var_value(gap), short))
}

/// Smallest-L1 coefficient vector achieving exactly the target gap.
fn min_norm(rows: &Rows, n_coef: usize, bound: f64, target: f64) -> Result<Vec<f64>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let pos: Vec<Variable> = (0..n_coef).map(|_| lp.add_var(1.0, (0.0, bound))).collect();
    let neg: Vec<Variable> = (0..n_coef).map(|_| lp.add_var(1.0, (0.0, bound))).collect();
    let e0 = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let split = |f: &[f64]| -> Vec<(Variable, f64)> {
        let mut terms = Vec::with_capacity(2 * f.len() + 1);
        for (k, &c) in f.iter().enumerate() {
            terms.push((pos[k], c));
            terms.push((neg[k], -c));
        }
        terms.push((e0, -1.0));
        terms
    };
    for f in &rows.valid {
        lp.add_constraint(split(f).as_slice(), ComparisonOp::Eq, 0.0);
    }
    for f in &rows.invalid {
        lp.add_constraint(split(f).as_slice(), ComparisonOp::Ge, target);
    }
    for k in 0..n_coef {
        lp.add_constraint(&[(pos[k], 1.0), (neg[k], 1.0)][..], ComparisonOp::Le, bound);
    }
    let sol = lp
        .solve()
        .map_err(lp_error)?
        .into_solution()
        .map_err(|_| Error::Parameter("linear program interrupted".into()))?;
    Ok((0..n_coef)
        .map(|k| sol.var_value(pos[k]) - sol.var_value(neg[k]))
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn to_template(
    table: &TruthTable,
    pairs: &[(usize, usize)],
    coef: &[f64],
    gap: f64,
    name: &str,
) -> Result<GateTemplate> {
    let n = table.n_vars();
    let mut model = IsingModel::new(n);
    for i in 0..n {
        model.set_h(i, coef[i])?;
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let v = coef[n + k];
        if v != 0.0 {
            model.set_coupling(i, j, v)?;
        }
    }
    let ports: BTreeMap<String, usize> = table
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), i))
        .collect();
    Ok(GateTemplate {
        name: name.to_string(),
        model,
        ports,
        valid: table.clone(),
        gap,
    })
}

/// Finds coefficients whose ground manifold is exactly `table`.
///
/// Among the solutions reaching `opts.gap`, the one with smallest L1 norm is
/// taken and snapped to a 1/4 grid when the snapped model still verifies.
pub fn synthesize_penalty(table: &TruthTable, opts: &SynthesisOptions) -> Result<GateTemplate> {
    let n = table.n_vars();
    if n > MAX_SYNTH_VARS {
        return Err(Error::TooLarge {
            n,
            cap: MAX_SYNTH_VARS,
        });
    }
    if !(opts.gap > 0.0) || !(opts.bound >= opts.gap / 2.0) {
        return Err(Error::Parameter(format!(
            "need gap > 0 and bound >= gap/2, got gap {} bound {}",
            opts.gap, opts.bound
        )));
    }
    let pairs = opts.graph.pairs(n)?;
    let n_coef = n + pairs.len();
    let rows = build_rows(table, &pairs);
    if rows.invalid.is_empty() {
        return to_template(table, &pairs, &vec![0.0; n_coef], opts.gap, "synth");
    }

    let (best_gap, short) = max_gap(&rows, n_coef, opts.bound, opts.gap)?;
    if best_gap < opts.gap - 1e-9 {
        return Err(Error::Synthesis {
            violated: short,
            gap: opts.gap,
            best_gap,
        });
    }
    let raw = min_norm(&rows, n_coef, opts.bound, opts.gap)?;

    let snapped: Vec<f64> = raw.iter().map(|v| (v * 4.0).round() / 4.0).collect();
    let candidate = to_template(table, &pairs, &snapped, opts.gap, "synth")?;
    if snapped.iter().all(|v| v.abs() <= opts.bound) && verify_gate(&candidate).pass {
        return Ok(candidate);
    }
    let cleaned: Vec<f64> = raw
        .iter()
        .map(|&v| if v.abs() < 1e-12 { 0.0 } else { v })
        .collect();
    let template = to_template(table, &pairs, &cleaned, opts.gap, "synth")?;
    if verify_gate(&template).pass {
        Ok(template)
    } else {
        Err(Error::Synthesis {
            violated: short,
            gap: opts.gap,
            best_gap,
        })
    }
}

/// Valid rows of the 1x1 multiplier unit `(a, b, c, d, carry, sum)`:
/// `2 carry + sum = a b + c + d`.
pub fn mult_unit_table() -> TruthTable {
    TruthTable::from_predicate(6, |v| {
        let lhs = 2 * u8::from(v[4]) + u8::from(v[5]);
        let rhs = u8::from(v[0] && v[1]) + u8::from(v[2]) + u8::from(v[3]);
        lhs == rhs
    })
    .and_then(|t| t.with_names(&["a", "b", "c", "d", "carry", "sum"]))
    .expect("static table")
}

/// Synthesizes the multiplier unit, widening the bound only if needed.
pub fn synthesize_mult_unit(gap: f64, bound: f64) -> Result<GateTemplate> {
    let table = mult_unit_table();
    let mut b = bound;
    loop {
        match synthesize_penalty(&table, &SynthesisOptions::new(gap, b)) {
            Ok(mut t) => {
                t.name = "mult-unit".into();
                return Ok(t);
            }
            Err(Error::Synthesis { .. }) if b < 8.0 * bound => b *= 2.0,
            Err(e) => return Err(e),
        }
    }
}

/// The default multiplier unit (gap 1, coefficient bound 2), computed once.
pub fn mult_unit() -> &'static GateTemplate {
    static UNIT: OnceLock<GateTemplate> = OnceLock::new();
    UNIT.get_or_init(|| synthesize_mult_unit(1.0, 2.0).expect("multiplier unit is synthesizable"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::nor_gate;

    #[test]
    fn nor_from_table() {
        let table = nor_gate().valid;
        let t = synthesize_penalty(&table, &SynthesisOptions::new(2.0, 1.0)).unwrap();
        let r = verify_gate(&t);
        assert!(r.pass, "{r:?}");
        let ground = t.model.brute_force_ground().unwrap();
        let bits: Vec<Vec<bool>> = ground.ground_bits();
        assert_eq!(bits.len(), 4);
        assert!(bits.iter().all(|b| table.contains(b)));
    }

    #[test]
    fn multiplier_unit() {
        let unit = mult_unit();
        let r = verify_gate(unit);
        assert!(r.pass, "{r:?}");
        let g = unit.model.brute_force_ground().unwrap();
        assert_eq!(g.ground_states.len(), 16);
        assert!(g.gap.unwrap() >= 1.0 - 1e-9);
        for s in &g.ground_states {
            let b = s.to_bits();
            let v = |i: usize| u8::from(b[i]);
            assert_eq!(2 * v(4) + v(5), v(0) * v(1) + v(2) + v(3));
        }
        // coefficients land on the quarter grid
        for &h in unit.model.biases() {
            assert_eq!(h * 4.0, (h * 4.0).round());
        }
        for (_, _, j) in unit.model.couplings() {
            assert_eq!(j * 4.0, (j * 4.0).round());
            assert!(j.abs() <= 2.0);
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let a = synthesize_mult_unit(1.0, 2.0).unwrap();
        let b = synthesize_mult_unit(1.0, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn all_valid_gives_zero_model() {
        let table = TruthTable::from_predicate(3, |_| true).unwrap();
        let t = synthesize_penalty(&table, &SynthesisOptions::new(1.0, 1.0)).unwrap();
        assert!(t.model.biases().iter().all(|&h| h == 0.0));
        assert_eq!(t.model.coupling_count(), 0);
    }

    #[test]
    fn xor_without_couplings_is_infeasible() {
        // XOR of two inputs into a third spin has no 3-spin quadratic model
        let table = TruthTable::from_predicate(3, |v| v[2] == (v[0] ^ v[1])).unwrap();
        let err = synthesize_penalty(&table, &SynthesisOptions::new(1.0, 1.0)).unwrap_err();
        match err {
            Error::Synthesis { violated, best_gap, .. } => {
                assert!(violated > 0);
                assert!(best_gap < 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn restricted_graph_is_honoured() {
        // NOR still works with the output coupled to each input only
        let table = nor_gate().valid;
        let opts = SynthesisOptions {
            graph: CouplingGraph::Edges(vec![(0, 2), (1, 2)]),
            gap: 1.0,
            bound: 2.0,
        };
        match synthesize_penalty(&table, &opts) {
            Ok(t) => {
                assert!(!t.model.has_coupling(0, 1));
                assert!(verify_gate(&t).pass);
            }
            Err(Error::Synthesis { .. }) => {}
            Err(e) => panic!("{e:?}"),
        }
    }

    #[test]
    fn bad_parameters() {
        let table = nor_gate().valid;
        assert!(synthesize_penalty(&table, &SynthesisOptions::new(0.0, 1.0)).is_err());
        assert!(synthesize_penalty(&table, &SynthesisOptions::new(2.0, 0.5)).is_err());
        let wide = TruthTable::from_predicate(11, |v| v[0]).unwrap();
        assert!(matches!(
            synthesize_penalty(&wide, &SynthesisOptions::new(1.0, 1.0)),
            Err(Error::TooLarge { .. })
        ));
    }
}
