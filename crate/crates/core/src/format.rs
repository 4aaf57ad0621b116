//! Line-oriented text formats for models and their sidecars.
//!
//! Model file:
//!
//! ```text
//! # comment
//! n 3
//! h 0 0.5
//! J 0 1 0.5
//! ```
//!
//! Port sidecar lines are `port <name> <spin>`; network sidecar lines are
//! `role <A|B|P> <bit> <spin>`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ising::IsingModel;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-empty lines with comments stripped, tagged with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((k + 1, fields))
    })
}

fn parse_field<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from '{s}'")))
}

pub fn write_model(model: &IsingModel) -> String {
    let mut out = String::new();
    writeln!(out, "n {}", model.n()).unwrap();
    for (i, h) in model.biases().iter().enumerate() {
        writeln!(out, "h {i} {h}").unwrap();
    }
    for (i, j, v) in model.couplings() {
        writeln!(out, "J {i} {j} {v}").unwrap();
    }
    out
}

pub fn parse_model(text: &str) -> Result<IsingModel> {
    let mut model: Option<IsingModel> = None;
    let mut seen_h = BTreeSet::new();
    let mut seen_j = BTreeSet::new();
    let mut pending: Vec<(usize, Vec<&str>)> = Vec::new();

    for (line, fields) in content_lines(text) {
        if fields[0] == "n" {
            if model.is_some() {
                return Err(parse_err(line, "duplicate 'n' line"));
            }
            if fields.len() != 2 {
                return Err(parse_err(line, "expected 'n <count>'"));
            }
            model = Some(IsingModel::new(parse_field(line, fields[1], "spin count")?));
        } else {
            pending.push((line, fields));
        }
    }
    let mut model = model.ok_or_else(|| parse_err(0, "missing 'n <count>' line"))?;

    for (line, fields) in pending {
        let wrap = |e: Error| parse_err(line, e.to_string());
        match fields[0] {
            "h" => {
                if fields.len() != 3 {
                    return Err(parse_err(line, "expected 'h <i> <value>'"));
                }
                let i: usize = parse_field(line, fields[1], "index")?;
                let v: f64 = parse_field(line, fields[2], "value")?;
                if !seen_h.insert(i) {
                    return Err(parse_err(line, format!("duplicate bias for spin {i}")));
                }
                model.set_h(i, v).map_err(wrap)?;
            }
            "J" => {
                if fields.len() != 4 {
                    return Err(parse_err(line, "expected 'J <i> <j> <value>'"));
                }
                let i: usize = parse_field(line, fields[1], "index")?;
                let j: usize = parse_field(line, fields[2], "index")?;
                let v: f64 = parse_field(line, fields[3], "value")?;
                if i >= j {
                    return Err(parse_err(line, format!("coupling indices must satisfy i < j, got {i} {j}")));
                }
                if !seen_j.insert((i, j)) {
                    return Err(parse_err(line, format!("duplicate coupling {i} {j}")));
                }
                model.set_coupling(i, j, v).map_err(wrap)?;
            }
            other => return Err(parse_err(line, format!("unknown record '{other}'"))),
        }
    }
    Ok(model)
}

pub fn write_ports(ports: &BTreeMap<String, usize>) -> String {
    let mut entries: Vec<_> = ports.iter().collect();
    entries.sort_by_key(|(name, &spin)| (spin, (*name).clone()));
    entries
        .into_iter()
        .map(|(name, spin)| format!("port {name} {spin}\n"))
        .collect()
}

pub fn parse_ports(text: &str) -> Result<BTreeMap<String, usize>> {
    let mut ports = BTreeMap::new();
    for (line, fields) in content_lines(text) {
        if fields.len() != 3 || fields[0] != "port" {
            return Err(parse_err(line, "expected 'port <name> <spin>'"));
        }
        let spin = parse_field(line, fields[2], "spin index")?;
        if ports.insert(fields[1].to_string(), spin).is_some() {
            return Err(parse_err(line, format!("duplicate port '{}'", fields[1])));
        }
    }
    Ok(ports)
}

/// Which integer a role qubit belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoleKind {
    FactorA,
    FactorB,
    Product,
}

impl RoleKind {
    pub fn tag(self) -> &'static str {
        match self {
            RoleKind::FactorA => "A",
            RoleKind::FactorB => "B",
            RoleKind::Product => "P",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "A" => Some(RoleKind::FactorA),
            "B" => Some(RoleKind::FactorB),
            "P" => Some(RoleKind::Product),
            _ => None,
        }
    }
}

/// `(kind, bit, spin)` triples, written in kind/bit order.
pub fn write_roles(roles: &[(RoleKind, usize, usize)]) -> String {
    let mut sorted = roles.to_vec();
    sorted.sort();
    sorted
        .into_iter()
        .map(|(kind, bit, spin)| format!("role {} {bit} {spin}\n", kind.tag()))
        .collect()
}

pub fn parse_roles(text: &str) -> Result<Vec<(RoleKind, usize, usize)>> {
    let mut seen = BTreeSet::new();
    let mut roles = Vec::new();
    for (line, fields) in content_lines(text) {
        if fields.len() != 4 || fields[0] != "role" {
            return Err(parse_err(line, "expected 'role <A|B|P> <bit> <spin>'"));
        }
        let kind = RoleKind::from_tag(fields[1])
            .ok_or_else(|| parse_err(line, format!("unknown role '{}'", fields[1])))?;
        let bit = parse_field(line, fields[2], "bit index")?;
        let spin = parse_field(line, fields[3], "spin index")?;
        if !seen.insert((kind, bit)) {
            return Err(parse_err(line, format!("duplicate role {} {bit}", kind.tag())));
        }
        roles.push((kind, bit, spin));
    }
    Ok(roles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reader_accepts_any_order_and_comments() {
        let text = "# nor\nJ 1 2 1\nh 2 1 # output\nn 3\nh 0 0.5\nh 1 0.5\nJ 0 1 0.5\nJ 0 2 1\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.biases(), &[0.5, 0.5, 1.0]);
        assert_eq!(m.coupling(1, 2), 1.0);
        assert_eq!(m.coupling_count(), 3);
    }

    #[test]
    fn reader_errors_carry_line_numbers() {
        let cases = [
            ("n 2\nh 0 x\n", 2),
            ("n 2\nJ 1 0 1\n", 2),
            ("n 2\nJ 0 1 1\nJ 0 1 2\n", 3),
            ("n 2\nh 0 1\n\nh 0 1\n", 4),
            ("n 2\nh 5 1\n", 2),
            ("n 2\nq 1\n", 2),
            ("n 2\nn 3\n", 2),
        ];
        for (text, line) in cases {
            match parse_model(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(parse_model("h 0 1\n").is_err());
    }

    #[test]
    fn sidecars_round_trip() {
        let ports: BTreeMap<String, usize> =
            [("a".to_string(), 0), ("out".to_string(), 2)].into_iter().collect();
        assert_eq!(parse_ports(&write_ports(&ports)).unwrap(), ports);
        let roles = vec![(RoleKind::Product, 0, 7), (RoleKind::FactorA, 1, 3)];
        let parsed = parse_roles(&write_roles(&roles)).unwrap();
        assert_eq!(parsed, vec![(RoleKind::FactorA, 1, 3), (RoleKind::Product, 0, 7)]);
        assert!(parse_roles("role Z 0 1\n").is_err());
    }

    proptest! {
        #[test]
        fn model_text_round_trip(
            h in proptest::collection::vec(-1e6f64..1e6, 1..8),
            raw in proptest::collection::vec((0usize..8, 0usize..8, -1e3f64..1e3), 0..12),
        ) {
            let n = h.len();
            let mut m = IsingModel::new(n);
            for (i, v) in h.iter().enumerate() {
                m.set_h(i, *v).unwrap();
            }
            for (i, j, v) in raw {
                if i < n && j < n && i != j {
                    m.set_coupling(i, j, v).unwrap();
                }
            }
            prop_assert_eq!(parse_model(&write_model(&m)).unwrap(), m);
        }
    }
}
