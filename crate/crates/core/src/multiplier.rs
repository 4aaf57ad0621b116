//! Array multipliers built from 6-spin multiplier units.
//!
//! Cell `(i, j)` adds `a_i b_j` to an incoming partial sum and carry. Carries
//! ripple to cell `(i + 1, j)` in the same row; sums move down-left to cell
//! `(i - 1, j + 1)`, which has the same binary weight `i + j`. Factor bits are
//! copied along rows and columns by wired copy spins inside each cell, so no
//! spin has more than a handful of neighbours.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::format::RoleKind;
use crate::gates::GateTemplate;
use crate::ising::{ClampAssignment, FoldedModel, IsingModel, SpinState, DEGENERACY_TOL};
use crate::synth::mult_unit;

/// Local spin indices inside a unit cell.
pub mod port {
    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const SUM_IN: usize = 2;
    pub const CARRY_IN: usize = 3;
    pub const CARRY: usize = 4;
    pub const SUM: usize = 5;
}

/// Per-qubit role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    FactorA(usize),
    FactorB(usize),
    Product(usize),
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkOptions {
    /// Insert one relay spin into every inter-cell wire.
    pub interconnect_chains: bool,
    /// Magnitude of inter-cell couplings.
    pub chain_strength: f64,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            interconnect_chains: false,
            chain_strength: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierNetwork {
    pub n1: usize,
    pub n2: usize,
    /// Global index of spin 0 of cell `(i, j)`, stored at `i + j * n1`.
    cells: Vec<usize>,
    pub model: IsingModel,
    pub roles: Vec<Role>,
    /// Boundary addend inputs that always carry 0.
    pub zero_inputs: Vec<usize>,
    /// Number of inter-cell couplings (chains count twice).
    pub link_count: usize,
    pub chain_qubits: usize,
    pub expected_e0: f64,
    pub options: NetworkOptions,
    unit_e0: f64,
}

/// How the product is imposed when factoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductClamp {
    /// Remove the product spins by exact fold-in.
    Fold,
    /// Leave them free and add a bias of the given magnitude toward each bit.
    Bias(f64),
}

impl Default for ProductClamp {
    fn default() -> Self {
        ProductClamp::Bias(1.1)
    }
}

/// A network with some spins fixed, ready to anneal.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedProblem {
    pub folded: FoldedModel,
    /// Extra bias added on top of the network model (bias-mode clamps only).
    pub bias_shift: f64,
}

impl ClampedProblem {
    /// The model to hand to a solver.
    pub fn model(&self) -> &IsingModel {
        &self.folded.model
    }

    /// Ground energy of the reduced model when the clamp is satisfiable.
    pub fn reference_e0(&self, net: &MultiplierNetwork) -> f64 {
        net.expected_e0 + self.bias_shift - self.folded.offset
    }

    pub fn expand(&self, reduced: &SpinState) -> Result<SpinState> {
        self.folded.expand(reduced)
    }
}

/// Decoded integers from one network state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FactorOutcome {
    pub m: u64,
    pub n: u64,
    pub p: u64,
    pub is_ground: bool,
}

impl MultiplierNetwork {
    pub fn build(n1: usize, n2: usize, options: NetworkOptions) -> Result<Self> {
        Self::build_with_unit(n1, n2, options, mult_unit())
    }

    pub fn build_with_unit(
        n1: usize,
        n2: usize,
        options: NetworkOptions,
        unit: &GateTemplate,
    ) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Parameter("factor widths must be at least 1".into()));
        }
        if n1 + n2 > 64 {
            return Err(Error::Parameter("product wider than 64 bits".into()));
        }
        if !(options.chain_strength > 0.0) {
            return Err(Error::Parameter("chain strength must be positive".into()));
        }
        let unit_e0 = unit.model.brute_force_ground()?.e0;
        let mut model = IsingModel::new(0);
        let mut cells = Vec::with_capacity(n1 * n2);
        for _ in 0..n1 * n2 {
            cells.push(model.append(&unit.model));
        }
        let spin = |i: usize, j: usize, p: usize| cells[i + j * n1] + p;

        let mut wires: Vec<(usize, usize)> = Vec::new();
        let mut zero_inputs = Vec::new();
        let mut roles: BTreeMap<usize, Role> = BTreeMap::new();

        for j in 0..n2 {
            for i in 0..n1 {
                // factor fan-out
                if j + 1 < n2 {
                    wires.push((spin(i, j, port::A), spin(i, j + 1, port::A)));
                }
                if i + 1 < n1 {
                    wires.push((spin(i, j, port::B), spin(i + 1, j, port::B)));
                }
                // carry ripple along the row
                if i + 1 < n1 {
                    wires.push((spin(i, j, port::CARRY), spin(i + 1, j, port::CARRY_IN)));
                } else if j + 1 < n2 {
                    wires.push((spin(i, j, port::CARRY), spin(i, j + 1, port::SUM_IN)));
                } else {
                    roles.insert(spin(i, j, port::CARRY), Role::Product(n1 + n2 - 1));
                }
                // partial sums move to the next row
                if i == 0 {
                    if j + 1 < n2 {
                        roles.insert(spin(i, j, port::SUM), Role::Product(j));
                    }
                } else if j + 1 < n2 {
                    wires.push((spin(i, j, port::SUM), spin(i - 1, j + 1, port::SUM_IN)));
                }
                if j + 1 == n2 {
                    roles.insert(spin(i, j, port::SUM), Role::Product(i + j));
                }
                if j == 0 {
                    zero_inputs.push(spin(i, j, port::SUM_IN));
                }
                if i == 0 {
                    zero_inputs.push(spin(i, j, port::CARRY_IN));
                }
            }
        }
        for i in 0..n1 {
            roles.insert(spin(i, 0, port::A), Role::FactorA(i));
        }
        for j in 0..n2 {
            roles.insert(spin(0, j, port::B), Role::FactorB(j));
        }

        let strength = options.chain_strength;
        let mut chain_qubits = 0;
        let mut link_count = 0;
        for (x, y) in wires {
            if options.interconnect_chains {
                let relay = model.add_spins(1);
                model.set_coupling(x, relay, -strength)?;
                model.set_coupling(relay, y, -strength)?;
                chain_qubits += 1;
                link_count += 2;
            } else {
                model.set_coupling(x, y, -strength)?;
                link_count += 1;
            }
        }

        let mut role_vec = vec![Role::Internal; model.n()];
        for (s, r) in roles {
            role_vec[s] = r;
        }
        zero_inputs.sort_unstable();
        let expected_e0 = unit_e0 * (n1 * n2) as f64 - strength * link_count as f64;
        Ok(Self {
            n1,
            n2,
            cells,
            model,
            roles: role_vec,
            zero_inputs,
            link_count,
            chain_qubits,
            expected_e0,
            options,
            unit_e0,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.model.n()
    }

    pub fn product_bits(&self) -> usize {
        self.n1 + self.n2
    }

    /// Global index of local port `p` in cell `(i, j)`.
    pub fn cell_spin(&self, i: usize, j: usize, p: usize) -> usize {
        self.cells[i + j * self.n1] + p
    }

    pub fn unit_e0(&self) -> f64 {
        self.unit_e0
    }

    fn role_spin(&self, want: Role) -> usize {
        self.roles
            .iter()
            .position(|&r| r == want)
            .expect("every role bit is assigned")
    }

    pub fn factor_a_spins(&self) -> Vec<usize> {
        (0..self.n1).map(|k| self.role_spin(Role::FactorA(k))).collect()
    }

    pub fn factor_b_spins(&self) -> Vec<usize> {
        (0..self.n2).map(|k| self.role_spin(Role::FactorB(k))).collect()
    }

    pub fn product_spins(&self) -> Vec<usize> {
        (0..self.product_bits())
            .map(|k| self.role_spin(Role::Product(k)))
            .collect()
    }

    /// `(kind, bit, spin)` triples for the network sidecar.
    pub fn role_table(&self) -> Vec<(RoleKind, usize, usize)> {
        let mut out = Vec::new();
        for (s, r) in self.roles.iter().enumerate() {
            match *r {
                Role::FactorA(k) => out.push((RoleKind::FactorA, k, s)),
                Role::FactorB(k) => out.push((RoleKind::FactorB, k, s)),
                Role::Product(k) => out.push((RoleKind::Product, k, s)),
                Role::Internal => {}
            }
        }
        out.sort();
        out
    }

    fn boundary_clamps(&self) -> ClampAssignment {
        self.zero_inputs.iter().map(|&s| (s, false)).collect()
    }

    fn insert_value(clamps: &mut ClampAssignment, spins: &[usize], value: u64) -> Result<()> {
        if spins.len() < 64 && value >> spins.len() != 0 {
            return Err(Error::Range {
                value,
                bits: spins.len(),
            });
        }
        for (k, &s) in spins.iter().enumerate() {
            clamps.insert(s, (value >> k) & 1 == 1)?;
        }
        Ok(())
    }

    /// Only the boundary zeros folded; every role spin stays free.
    pub fn clamp_none(&self) -> Result<ClampedProblem> {
        Ok(ClampedProblem {
            folded: self.model.clamp_fold(&self.boundary_clamps())?,
            bias_shift: 0.0,
        })
    }

    /// Forward direction: both factors fixed, product left to the solver.
    pub fn clamp_factors(&self, m: u64, n: u64) -> Result<ClampedProblem> {
        let mut clamps = self.boundary_clamps();
        Self::insert_value(&mut clamps, &self.factor_a_spins(), m)?;
        Self::insert_value(&mut clamps, &self.factor_b_spins(), n)?;
        Ok(ClampedProblem {
            folded: self.model.clamp_fold(&clamps)?,
            bias_shift: 0.0,
        })
    }

    /// Inverse direction: product fixed, factors left to the solver.
    pub fn clamp_product(&self, p: u64, method: ProductClamp) -> Result<ClampedProblem> {
        let spins = self.product_spins();
        match method {
            ProductClamp::Fold => {
                let mut clamps = self.boundary_clamps();
                Self::insert_value(&mut clamps, &spins, p)?;
                Ok(ClampedProblem {
                    folded: self.model.clamp_fold(&clamps)?,
                    bias_shift: 0.0,
                })
            }
            ProductClamp::Bias(strength) => {
                if !(strength > 0.0) {
                    return Err(Error::Parameter("bias strength must be positive".into()));
                }
                let mut probe = ClampAssignment::new();
                Self::insert_value(&mut probe, &spins, p)?;
                let mut biased = self.model.clone();
                for &s in &spins {
                    let bit = probe.get(s).unwrap_or(false);
                    biased.add_h(s, if bit { -strength } else { strength })?;
                }
                Ok(ClampedProblem {
                    folded: biased.clamp_fold(&self.boundary_clamps())?,
                    bias_shift: -strength * spins.len() as f64,
                })
            }
        }
    }

    fn read(&self, state: &SpinState, spins: &[usize]) -> u64 {
        spins
            .iter()
            .enumerate()
            .map(|(k, &s)| u64::from(state.bit(s)) << k)
            .sum()
    }

    /// Positional read-out of a full-length network state.
    pub fn decode(&self, state: &SpinState) -> Result<FactorOutcome> {
        let energy = self.model.energy(state)?;
        Ok(FactorOutcome {
            m: self.read(state, &self.factor_a_spins()),
            n: self.read(state, &self.factor_b_spins()),
            p: self.read(state, &self.product_spins()),
            is_ground: energy <= self.expected_e0 + DEGENERACY_TOL
                && self.zero_inputs.iter().all(|&s| !state.bit(s)),
        })
    }
}

pub fn expected_ground_energy(net: &MultiplierNetwork) -> f64 {
    net.expected_e0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n1: usize, n2: usize) -> MultiplierNetwork {
        MultiplierNetwork::build(n1, n2, NetworkOptions::default()).unwrap()
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(net(1, 1).qubit_count(), 6);
        assert_eq!(net(2, 3).qubit_count(), 36);
        let chained = MultiplierNetwork::build(
            2,
            2,
            NetworkOptions {
                interconnect_chains: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(chained.qubit_count(), 24 + chained.chain_qubits);
        assert!(chained.chain_qubits > 0);
    }

    #[test]
    fn roles_cover_each_bit_once() {
        for (n1, n2) in [(1, 1), (2, 3), (3, 2), (4, 4)] {
            let n = net(n1, n2);
            let mut products: Vec<usize> = n
                .roles
                .iter()
                .filter_map(|r| match r {
                    Role::Product(k) => Some(*k),
                    _ => None,
                })
                .collect();
            products.sort_unstable();
            assert_eq!(products, (0..n1 + n2).collect::<Vec<_>>());
            assert_eq!(n.factor_a_spins().len(), n1);
            assert_eq!(n.factor_b_spins().len(), n2);
        }
    }

    #[test]
    fn single_cell_multiplies() {
        let n = net(1, 1);
        assert_eq!(n.expected_e0, n.unit_e0());
        for m in 0..2 {
            for k in 0..2 {
                let c = n.clamp_factors(m, k).unwrap();
                let g = c.model().brute_force_ground().unwrap();
                assert_eq!(g.ground_states.len(), 1);
                let full = c.expand(&g.ground_states[0]).unwrap();
                let out = n.decode(&full).unwrap();
                assert_eq!(out.p, m * k);
                assert!(out.is_ground);
            }
        }
    }

    #[test]
    fn decode_positional() {
        let n = net(4, 4);
        let mut bits = vec![false; n.qubit_count()];
        for (k, s) in n.factor_a_spins().into_iter().enumerate() {
            bits[s] = (3 >> k) & 1 == 1;
        }
        for (k, s) in n.factor_b_spins().into_iter().enumerate() {
            bits[s] = (5 >> k) & 1 == 1;
        }
        for (k, s) in n.product_spins().into_iter().enumerate() {
            bits[s] = (15 >> k) & 1 == 1;
        }
        let out = n.decode(&SpinState::from_bits(&bits)).unwrap();
        assert_eq!((out.m, out.n, out.p), (3, 5, 15));
        // internal spins are inconsistent here
        assert!(!out.is_ground);

        let zero = n.decode(&SpinState::from_bits(&vec![false; n.qubit_count()])).unwrap();
        assert_eq!((zero.m, zero.n, zero.p), (0, 0, 0));
        assert!(n.decode(&SpinState::from_bits(&[true])).is_err());
    }

    #[test]
    fn range_errors() {
        let n = net(2, 2);
        assert!(matches!(n.clamp_factors(4, 0), Err(Error::Range { .. })));
        assert!(matches!(n.clamp_product(16, ProductClamp::Fold), Err(Error::Range { .. })));
        assert!(MultiplierNetwork::build(0, 2, NetworkOptions::default()).is_err());
    }
}
