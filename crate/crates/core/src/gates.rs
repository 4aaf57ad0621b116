//! Gate Hamiltonians and their composition into circuits.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinState, BRUTE_FORCE_CAP};

/// Legal assignments of a set of Boolean variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n_vars: usize,
    valid: BTreeSet<Vec<bool>>,
    names: Vec<String>,
}

impl TruthTable {
    pub fn new(n_vars: usize, rows: impl IntoIterator<Item = Vec<bool>>) -> Result<Self> {
        let mut valid = BTreeSet::new();
        for row in rows {
            if row.len() != n_vars {
                return Err(Error::TruthTable(format!(
                    "row of length {} in a table of arity {n_vars}",
                    row.len()
                )));
            }
            if !valid.insert(row) {
                return Err(Error::TruthTable("duplicate row".into()));
            }
        }
        if valid.is_empty() {
            return Err(Error::TruthTable("no valid rows".into()));
        }
        let names = (0..n_vars).map(|i| format!("x{i}")).collect();
        Ok(Self {
            n_vars,
            valid,
            names,
        })
    }

    /// Table of all assignments satisfying `pred`.
    pub fn from_predicate(n_vars: usize, pred: impl Fn(&[bool]) -> bool) -> Result<Self> {
        let rows = (0..1u64 << n_vars)
            .map(|x| (0..n_vars).map(|i| (x >> i) & 1 == 1).collect::<Vec<_>>())
            .filter(|row| pred(row));
        Self::new(n_vars, rows)
    }

    pub fn with_names(mut self, names: &[&str]) -> Result<Self> {
        if names.len() != self.n_vars {
            return Err(Error::TruthTable(format!(
                "{} names for {} variables",
                names.len(),
                self.n_vars
            )));
        }
        self.names = names.iter().map(|s| s.to_string()).collect();
        Ok(self)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, bits: &[bool]) -> bool {
        self.valid.contains(bits)
    }

    /// Valid rows in lexicographic order.
    pub fn rows(&self) -> impl Iterator<Item = &Vec<bool>> {
        self.valid.iter()
    }

    pub fn len(&self) -> usize {
        self.valid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid.is_empty()
    }
}

/// A gate's Ising block together with its intended logic.
#[derive(Debug, Clone, PartialEq)]
pub struct GateTemplate {
    pub name: String,
    pub model: IsingModel,
    pub ports: BTreeMap<String, usize>,
    pub valid: TruthTable,
    /// Declared separation between the valid manifold and everything else.
    pub gap: f64,
}

impl GateTemplate {
    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn port(&self, name: &str) -> Option<usize> {
        self.ports.get(name).copied()
    }
}

fn three_port(name: &str, model: IsingModel, valid: TruthTable) -> GateTemplate {
    let ports = [("in_a", 0), ("in_b", 1), ("out", 2)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    GateTemplate {
        name: name.into(),
        model,
        ports,
        valid,
        gap: 2.0,
    }
}

/// NOR: `h = (0.5, 0.5, 1)`, `J01 = 0.5`, `J02 = J12 = 1`.
pub fn nor_gate() -> GateTemplate {
    let model =
        IsingModel::from_parts(vec![0.5, 0.5, 1.0], &[(0, 1, 0.5), (0, 2, 1.0), (1, 2, 1.0)])
            .expect("static coefficients");
    let valid = TruthTable::from_predicate(3, |v| v[2] == !(v[0] || v[1]))
        .and_then(|t| t.with_names(&["in_a", "in_b", "out"]))
        .expect("static table");
    three_port("nor", model, valid)
}

/// AND: the NOR block with the signs of `h0`, `h1`, `J02`, `J12` reversed.
pub fn and_gate() -> GateTemplate {
    let model = IsingModel::from_parts(
        vec![-0.5, -0.5, 1.0],
        &[(0, 1, 0.5), (0, 2, -1.0), (1, 2, -1.0)],
    )
    .expect("static coefficients");
    let valid = TruthTable::from_predicate(3, |v| v[2] == (v[0] && v[1]))
        .and_then(|t| t.with_names(&["in_a", "in_b", "out"]))
        .expect("static table");
    three_port("and", model, valid)
}

/// Inter-gate coupling flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    /// `J = -1`: both ends carry the same bit.
    Wire,
    /// `J = +1`: the ends carry complementary bits.
    Not,
}

impl Link {
    pub fn coupling(self) -> f64 {
        match self {
            Link::Wire => -1.0,
            Link::Not => 1.0,
        }
    }
}

/// A named port on a gate instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub gate: usize,
    pub port: String,
}

impl PortRef {
    pub fn new(gate: usize, port: &str) -> Self {
        Self {
            gate,
            port: port.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CircuitGraph {
    pub gates: Vec<GateTemplate>,
    pub links: Vec<(PortRef, PortRef, Link)>,
    pub exports: Vec<(String, PortRef)>,
}

impl CircuitGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_gate(&mut self, gate: GateTemplate) -> usize {
        self.gates.push(gate);
        self.gates.len() - 1
    }

    pub fn link(&mut self, a: PortRef, b: PortRef, kind: Link) {
        self.links.push((a, b, kind));
    }

    pub fn export(&mut self, name: &str, port: PortRef) {
        self.exports.push((name.to_string(), port));
    }
}

/// A composed circuit: one model plus exported port positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedCircuit {
    pub model: IsingModel,
    pub ports: BTreeMap<String, usize>,
    /// Global index of each gate's spin 0.
    pub offsets: Vec<usize>,
}

/// Concatenates gate blocks and adds the `±1` links between them.
pub fn compose(graph: &CircuitGraph) -> Result<ComposedCircuit> {
    let mut model = IsingModel::new(0);
    let offsets: Vec<usize> = graph.gates.iter().map(|g| model.append(&g.model)).collect();

    let resolve = |r: &PortRef| -> Result<usize> {
        let gate = graph
            .gates
            .get(r.gate)
            .ok_or_else(|| Error::Circuit(format!("no gate instance {}", r.gate)))?;
        let local = gate.port(&r.port).ok_or_else(|| {
            Error::Circuit(format!("gate {} ({}) has no port '{}'", r.gate, gate.name, r.port))
        })?;
        Ok(offsets[r.gate] + local)
    };

    let mut linked = BTreeSet::new();
    for (a, b, kind) in &graph.links {
        if a.gate == b.gate {
            return Err(Error::Circuit(format!(
                "link {}.{} - {}.{} stays inside one gate",
                a.gate, a.port, b.gate, b.port
            )));
        }
        let (i, j) = (resolve(a)?, resolve(b)?);
        let key = (i.min(j), i.max(j));
        if !linked.insert(key) {
            return Err(Error::Circuit(format!("duplicate link between spins {i} and {j}")));
        }
        model.add_coupling(i, j, kind.coupling())?;
    }

    let mut ports = BTreeMap::new();
    for (name, r) in &graph.exports {
        if ports.insert(name.clone(), resolve(r)?).is_some() {
            return Err(Error::Circuit(format!("port '{name}' exported twice")));
        }
    }
    Ok(ComposedCircuit {
        model,
        ports,
        offsets,
    })
}

/// Three NOR gates: `carry = NOR(!a, !b)`, `sum = NOR(NOR(a, b), carry)`.
///
/// Spins 0-2 form `NOR(a, b)`, spins 3-5 the carry gate whose inputs are
/// NOT-linked to `a` and `b`, spins 6-8 the sum gate wired to spins 5 and 2.
pub fn half_adder() -> ComposedCircuit {
    let mut g = CircuitGraph::new();
    let first = g.add_gate(nor_gate());
    let carry = g.add_gate(nor_gate());
    let sum = g.add_gate(nor_gate());
    g.link(PortRef::new(first, "in_a"), PortRef::new(carry, "in_a"), Link::Not);
    g.link(PortRef::new(first, "in_b"), PortRef::new(carry, "in_b"), Link::Not);
    g.link(PortRef::new(carry, "out"), PortRef::new(sum, "in_a"), Link::Wire);
    g.link(PortRef::new(first, "out"), PortRef::new(sum, "in_b"), Link::Wire);
    g.export("a", PortRef::new(first, "in_a"));
    g.export("b", PortRef::new(first, "in_b"));
    g.export("carry", PortRef::new(carry, "out"));
    g.export("sum", PortRef::new(sum, "out"));
    compose(&g).expect("static half-adder wiring")
}

/// Outcome of checking a template against exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub pass: bool,
    pub e0: f64,
    /// `None` when no state lies above the ground level.
    pub achieved_gap: Option<f64>,
    /// Ground states outside the valid set, or valid states off the ground level.
    pub offending: Vec<Vec<bool>>,
}

pub fn verify_gate(gate: &GateTemplate) -> GateReport {
    if gate.n() > BRUTE_FORCE_CAP {
        return GateReport {
            pass: false,
            e0: f64::NAN,
            achieved_gap: None,
            offending: Vec::new(),
        };
    }
    let report = gate
        .model
        .brute_force_ground()
        .expect("size checked above");
    let ground: BTreeSet<Vec<bool>> = report.ground_bits().into_iter().collect();
    let mut offending: Vec<Vec<bool>> = ground
        .iter()
        .filter(|b| !gate.valid.contains(b))
        .cloned()
        .collect();
    offending.extend(gate.valid.rows().filter(|r| !ground.contains(*r)).cloned());

    // with every state valid there is nothing to separate
    let all_valid = gate.valid.len() as u64 == 1u64 << gate.n();
    let gap_ok = all_valid || report.gap.is_some_and(|g| g >= gate.gap - 1e-9);
    GateReport {
        pass: offending.is_empty() && gap_ok,
        e0: report.e0,
        achieved_gap: report.gap,
        offending,
    }
}

/// Bits of a state restricted to named ports.
pub fn read_ports(ports: &BTreeMap<String, usize>, state: &SpinState) -> BTreeMap<String, bool> {
    ports
        .iter()
        .map(|(k, &i)| (k.clone(), state.bit(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn nor_template() {
        let g = nor_gate();
        assert_eq!(g.model.biases(), &[0.5, 0.5, 1.0]);
        let r = verify_gate(&g);
        assert!(r.pass);
        assert_eq!(r.e0, -1.5);
        assert_eq!(r.achieved_gap, Some(2.0));
        assert!(g.valid.contains(&bits("001")));
        assert_eq!(
            g.model.energy(&SpinState::from_bits(&bits("001"))).unwrap(),
            -1.5
        );
    }

    #[test]
    fn and_template() {
        let g = and_gate();
        let r = verify_gate(&g);
        assert!(r.pass);
        assert_eq!(r.achieved_gap, Some(2.0));
        let e = |s: &str| g.model.energy(&SpinState::from_bits(&bits(s))).unwrap();
        assert_eq!(e("111"), -1.5);
        assert_eq!(e("000"), -1.5);
        assert_eq!(e("110"), 0.5);
    }

    #[test]
    fn de_morgan() {
        let nor = nor_gate();
        let and = and_gate();
        let complemented: BTreeSet<Vec<bool>> = nor
            .valid
            .rows()
            .map(|r| vec![!r[0], !r[1], r[2]])
            .collect();
        let and_rows: BTreeSet<Vec<bool>> = and.valid.rows().cloned().collect();
        assert_eq!(complemented, and_rows);
    }

    #[test]
    fn broken_nor_fails_verification() {
        let mut g = nor_gate();
        g.model.set_coupling(0, 2, -1.0).unwrap();
        let r = verify_gate(&g);
        assert!(!r.pass);
        assert!(!r.offending.is_empty());
    }

    #[test]
    fn single_gate_composition_is_identity() {
        let mut g = CircuitGraph::new();
        let id = g.add_gate(nor_gate());
        g.export("out", PortRef::new(id, "out"));
        let c = compose(&g).unwrap();
        assert_eq!(c.model, nor_gate().model);
        assert_eq!(c.ports["out"], 2);
    }

    #[test]
    fn two_nors_wired() {
        let mut g = CircuitGraph::new();
        let a = g.add_gate(nor_gate());
        let b = g.add_gate(nor_gate());
        g.link(PortRef::new(a, "out"), PortRef::new(b, "in_a"), Link::Wire);
        let c = compose(&g).unwrap();
        assert_eq!(c.model.n(), 6);
        let r = c.model.brute_force_ground().unwrap();
        assert_eq!(r.e0, -4.0);
        for s in &r.ground_states {
            assert_eq!(s.get(2), s.get(3));
        }
    }

    #[test]
    fn nor_with_not_is_or() {
        let mut g = CircuitGraph::new();
        let nor = g.add_gate(nor_gate());
        // a lone spin with no bias acts as a free output terminal
        let terminal = g.add_gate(GateTemplate {
            name: "terminal".into(),
            model: IsingModel::new(1),
            ports: [("x".to_string(), 0)].into_iter().collect(),
            valid: TruthTable::from_predicate(1, |_| true).unwrap(),
            gap: 0.0,
        });
        g.link(PortRef::new(nor, "out"), PortRef::new(terminal, "x"), Link::Not);
        let c = compose(&g).unwrap();
        let r = c.model.brute_force_ground().unwrap();
        assert_eq!(r.ground_states.len(), 4);
        for s in &r.ground_states {
            let b = s.to_bits();
            assert_eq!(b[3], b[0] || b[1]);
        }
    }

    #[test]
    fn compose_errors() {
        let mut g = CircuitGraph::new();
        let a = g.add_gate(nor_gate());
        let b = g.add_gate(nor_gate());
        g.link(PortRef::new(a, "out"), PortRef::new(b, "nope"), Link::Wire);
        assert!(matches!(compose(&g), Err(Error::Circuit(_))));

        let mut g = CircuitGraph::new();
        let a = g.add_gate(nor_gate());
        let b = g.add_gate(nor_gate());
        g.link(PortRef::new(a, "out"), PortRef::new(b, "in_a"), Link::Wire);
        g.link(PortRef::new(b, "in_a"), PortRef::new(a, "out"), Link::Not);
        assert!(matches!(compose(&g), Err(Error::Circuit(_))));

        let mut g = CircuitGraph::new();
        let a = g.add_gate(nor_gate());
        g.link(PortRef::new(a, "out"), PortRef::new(5, "in_a"), Link::Wire);
        assert!(matches!(compose(&g), Err(Error::Circuit(_))));
    }

    #[test]
    fn half_adder_truth() {
        let ha = half_adder();
        assert_eq!(ha.model.n(), 9);
        assert_eq!(ha.model.coupling(2, 7), -1.0);
        assert_eq!(ha.model.coupling(0, 3), 1.0);
        let r = ha.model.brute_force_ground().unwrap();
        assert_eq!(r.e0, -8.5);
        assert_eq!(r.ground_states.len(), 4);
        let mut seen = BTreeSet::new();
        for s in &r.ground_states {
            let p = read_ports(&ha.ports, s);
            assert_eq!(p["sum"], p["a"] ^ p["b"]);
            assert_eq!(p["carry"], p["a"] && p["b"]);
            seen.insert((p["a"], p["b"]));
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn truth_table_validation() {
        assert!(TruthTable::new(2, vec![vec![true]]).is_err());
        assert!(TruthTable::new(1, vec![vec![true], vec![true]]).is_err());
        assert!(TruthTable::new(1, Vec::<Vec<bool>>::new()).is_err());
    }
}
