//! Ising-model carrier: biases, pairwise couplings, exact energies.
//!
//! The energy of a spin configuration `s` is
//!
//! ```text
//! E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j
//! ```
//!
//! with every unordered pair counted once. Spins are `+1` (bit 1) or `-1`
//! (bit 0). Indices are 0-based; figure labels `Q1, Q2, ...` map to `0, 1, ...`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default upper bound on spins for exhaustive enumeration.
pub const BRUTE_FORCE_CAP: usize = 26;

/// Absolute tolerance used when comparing energies for degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    h: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
}

fn canonical(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

fn check_finite(what: impl FnOnce() -> String, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what(),
            value,
        })
    }
}

impl IsingModel {
    /// A model over `n` spins with all coefficients zero.
    pub fn new(n: usize) -> Self {
        Self {
            h: vec![0.0; n],
            couplings: BTreeMap::new(),
        }
    }

    pub fn from_parts(h: Vec<f64>, couplings: &[(usize, usize, f64)]) -> Result<Self> {
        let mut model = Self::new(h.len());
        for (i, &v) in h.iter().enumerate() {
            model.set_h(i, v)?;
        }
        for &(i, j, v) in couplings {
            model.set_coupling(i, j, v)?;
        }
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self, i: usize) -> f64 {
        self.h[i]
    }

    pub fn biases(&self) -> &[f64] {
        &self.h
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n() })
        }
    }

    pub fn set_h(&mut self, i: usize, value: f64) -> Result<()> {
        self.check_index(i)?;
        check_finite(|| format!("h[{i}]"), value)?;
        self.h[i] = value;
        Ok(())
    }

    pub fn add_h(&mut self, i: usize, delta: f64) -> Result<()> {
        self.check_index(i)?;
        self.set_h(i, self.h[i] + delta)
    }

    /// Sets `J_ij` (order of `i`, `j` is irrelevant).
    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::SelfCoupling(i));
        }
        check_finite(|| format!("J[{i},{j}]"), value)?;
        self.couplings.insert(canonical(i, j), value);
        Ok(())
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, delta: f64) -> Result<()> {
        let current = if i == j { 0.0 } else { self.coupling(i, j) };
        self.set_coupling(i, j, current + delta)
    }

    /// `J_ij`, zero when the pair is not coupled.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings.get(&canonical(i, j)).copied().unwrap_or(0.0)
    }

    pub fn has_coupling(&self, i: usize, j: usize) -> bool {
        self.couplings.contains_key(&canonical(i, j))
    }

    /// Couplings as `(i, j, J)` with `i < j`, in ascending key order.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn coupling_count(&self) -> usize {
        self.couplings.len()
    }

    /// Every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            h: self.h.iter().map(|v| v * factor).collect(),
            couplings: self
                .couplings
                .iter()
                .map(|(&k, &v)| (k, v * factor))
                .collect(),
        }
    }

    /// Disjoint union: `other`'s spins are appended after this model's.
    /// Returns the index offset applied to `other`.
    pub fn append(&mut self, other: &IsingModel) -> usize {
        let offset = self.n();
        self.h.extend_from_slice(&other.h);
        for (i, j, v) in other.couplings() {
            self.couplings.insert((i + offset, j + offset), v);
        }
        offset
    }

    /// Adds `count` fresh spins with zero bias and returns the first new index.
    pub fn add_spins(&mut self, count: usize) -> usize {
        let first = self.n();
        self.h.resize(first + count, 0.0);
        first
    }

    /// Per-spin neighbour lists `(j, J_ij)`, each pair listed from both ends.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for (i, j, v) in self.couplings() {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    pub fn energy(&self, state: &SpinState) -> Result<f64> {
        if state.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: state.len(),
            });
        }
        Ok(self.energy_unchecked(state.spins()))
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> f64 {
        let linear: f64 = self.h.iter().zip(s).map(|(h, &si)| h * f64::from(si)).sum();
        let quadratic: f64 = self
            .couplings
            .iter()
            .map(|(&(i, j), &v)| v * f64::from(s[i] * s[j]))
            .sum();
        linear + quadratic
    }

    /// Folds clamped spins into the remaining ones.
    ///
    /// A clamped spin `s_c` contributes `h_c s_c` to the constant offset and
    /// `J_cj s_c` to the bias of every free neighbour `j`. Couplings between two
    /// clamped spins go to the offset.
    pub fn clamp_fold(&self, clamps: &ClampAssignment) -> Result<FoldedModel> {
        for (&index, _) in clamps.iter() {
            self.check_index(index)?;
        }
        let mut free = Vec::with_capacity(self.n() - clamps.len());
        let mut new_index = vec![usize::MAX; self.n()];
        for i in 0..self.n() {
            if !clamps.contains(i) {
                new_index[i] = free.len();
                free.push(i);
            }
        }
        let spin_of = |i: usize| clamps.get(i).map(|b| if b { 1.0 } else { -1.0 });

        let mut reduced = IsingModel::new(free.len());
        let mut offset = 0.0;
        for (i, &hi) in self.h.iter().enumerate() {
            match spin_of(i) {
                Some(s) => offset += hi * s,
                None => reduced.h[new_index[i]] += hi,
            }
        }
        for (i, j, v) in self.couplings() {
            match (spin_of(i), spin_of(j)) {
                (Some(si), Some(sj)) => offset += v * si * sj,
                (Some(si), None) => reduced.h[new_index[j]] += v * si,
                (None, Some(sj)) => reduced.h[new_index[i]] += v * sj,
                (None, None) => {
                    reduced
                        .couplings
                        .insert((new_index[i], new_index[j]), v);
                }
            }
        }
        Ok(FoldedModel {
            model: reduced,
            offset,
            free,
            clamps: clamps.clone(),
            full_n: self.n(),
        })
    }

    pub fn brute_force_ground(&self) -> Result<GroundReport> {
        self.brute_force_ground_with_cap(BRUTE_FORCE_CAP)
    }

    /// Exhaustive search over all `2^n` states.
    ///
    /// The enumeration runs in Gray-code order inside blocks of `2^12` states;
    /// energies are recomputed exactly at each block start so accumulated
    /// rounding stays far below [`DEGENERACY_TOL`].
    pub fn brute_force_ground_with_cap(&self, cap: usize) -> Result<GroundReport> {
        let n = self.n();
        if n > cap || n >= 63 {
            return Err(Error::TooLarge { n, cap });
        }
        const BLOCK_BITS: usize = 12;
        let low_bits = n.min(BLOCK_BITS);
        let blocks: u64 = 1u64 << (n - low_bits);
        let adj = self.adjacency();

        let partials: Vec<Partial> = (0..blocks)
            .into_par_iter()
            .map(|block| {
                let mut s: Vec<i8> = (0..n)
                    .map(|i| {
                        if i >= low_bits && (block >> (i - low_bits)) & 1 == 1 {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect();
                let mut field: Vec<f64> = (0..n)
                    .map(|i| {
                        self.h[i]
                            + adj[i]
                                .iter()
                                .map(|&(j, v)| v * f64::from(s[j]))
                                .sum::<f64>()
                    })
                    .collect();
                let mut energy = self.energy_unchecked(&s);
                let mut index = block << low_bits;
                let mut partial = Partial::default();
                partial.offer(index, energy);
                for k in 1u64..(1u64 << low_bits) {
                    let bit = k.trailing_zeros() as usize;
                    let si = f64::from(s[bit]);
                    energy -= 2.0 * si * field[bit];
                    for &(j, v) in &adj[bit] {
                        field[j] -= 2.0 * v * si;
                    }
                    s[bit] = -s[bit];
                    index ^= 1u64 << bit;
                    partial.offer(index, energy);
                }
                partial
            })
            .collect();

        let mut total = Partial::default();
        for p in partials {
            total.merge(p);
        }
        let mut ground = total.ground;
        ground.sort_by_key(|&(idx, _)| idx);
        let e0 = ground
            .iter()
            .map(|&(_, e)| e)
            .fold(f64::INFINITY, f64::min);
        let ground_states = ground
            .into_iter()
            .map(|(idx, _)| SpinState::from_index(idx, n))
            .collect();
        let gap = if total.excited.is_finite() {
            Some(total.excited - e0)
        } else {
            None
        };
        Ok(GroundReport {
            e0,
            ground_states,
            gap,
        })
    }
}

#[derive(Debug, Default)]
struct Partial {
    /// States within tolerance of the running minimum.
    ground: Vec<(u64, f64)>,
    min: f64,
    /// Lowest energy seen above `min + tol`.
    excited: f64,
}

impl Partial {
    fn offer(&mut self, index: u64, energy: f64) {
        if self.ground.is_empty() {
            self.min = energy;
            self.excited = f64::INFINITY;
            self.ground.push((index, energy));
            return;
        }
        if energy < self.min - DEGENERACY_TOL {
            self.min = energy;
            let min = self.min;
            let mut demoted = f64::INFINITY;
            self.ground.retain(|&(_, e)| {
                if e <= min + DEGENERACY_TOL {
                    true
                } else {
                    demoted = demoted.min(e);
                    false
                }
            });
            self.excited = self.excited.min(demoted);
            self.ground.push((index, energy));
        } else if energy <= self.min + DEGENERACY_TOL {
            self.min = self.min.min(energy);
            self.ground.push((index, energy));
        } else {
            self.excited = self.excited.min(energy);
        }
    }

    fn merge(&mut self, other: Partial) {
        if other.ground.is_empty() {
            return;
        }
        if self.ground.is_empty() {
            *self = other;
            return;
        }
        self.excited = self.excited.min(other.excited);
        for (idx, e) in other.ground {
            self.offer(idx, e);
        }
    }
}

/// Result of exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundReport {
    pub e0: f64,
    /// All ground states, ordered by their binary index (spin 0 least significant).
    pub ground_states: Vec<SpinState>,
    /// Distance to the first excited level; `None` when every state is ground.
    pub gap: Option<f64>,
}

impl GroundReport {
    pub fn ground_bits(&self) -> Vec<Vec<bool>> {
        self.ground_states.iter().map(SpinState::to_bits).collect()
    }
}

/// A configuration of `±1` spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinState(Vec<i8>);

impl SpinState {
    /// Fails on any entry other than `-1` or `+1`.
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Parameter(format!(
                "spin {pos} has value {}, expected -1 or +1",
                spins[pos]
            )));
        }
        Ok(Self(spins))
    }

    pub(crate) fn from_raw(spins: Vec<i8>) -> Self {
        debug_assert!(spins.iter().all(|&s| s == 1 || s == -1));
        Self(spins)
    }

    /// Bit 1 maps to `+1`, bit 0 to `-1`.
    pub fn from_bits(bits: &[bool]) -> Self {
        Self(bits.iter().map(|&b| if b { 1 } else { -1 }).collect())
    }

    /// Spin `i` is `+1` iff bit `i` of `index` is set.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self((0..n).map(|i| if (index >> i) & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.0.iter().map(|&s| s > 0).collect()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i] > 0
    }

    /// Every spin reversed.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// `0`/`1` characters, spin 0 first.
    pub fn bit_string(&self) -> String {
        self.0.iter().map(|&s| if s > 0 { '1' } else { '0' }).collect()
    }
}

pub fn bits_to_spins(bits: &[bool]) -> SpinState {
    SpinState::from_bits(bits)
}

pub fn spins_to_bits(state: &SpinState) -> Vec<bool> {
    state.to_bits()
}

/// Spin index to fixed bit value.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClampAssignment(BTreeMap<usize, bool>);

impl ClampAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a clamp; clamping the same spin twice is an error.
    pub fn insert(&mut self, index: usize, bit: bool) -> Result<()> {
        if self.0.insert(index, bit).is_some() {
            return Err(Error::Parameter(format!("spin {index} clamped twice")));
        }
        Ok(())
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        self.0.get(&index).copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.contains_key(&index)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &bool)> {
        self.0.iter()
    }
}

impl FromIterator<(usize, bool)> for ClampAssignment {
    fn from_iter<T: IntoIterator<Item = (usize, bool)>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// A model with some spins folded out, plus what is needed to map back.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedModel {
    pub model: IsingModel,
    pub offset: f64,
    /// `free[k]` is the original index of reduced spin `k`.
    pub free: Vec<usize>,
    pub clamps: ClampAssignment,
    full_n: usize,
}

impl FoldedModel {
    pub fn full_n(&self) -> usize {
        self.full_n
    }

    /// Reassembles a full-length state from a reduced one.
    pub fn expand(&self, reduced: &SpinState) -> Result<SpinState> {
        if reduced.len() != self.free.len() {
            return Err(Error::Dimension {
                expected: self.free.len(),
                got: reduced.len(),
            });
        }
        let mut spins = vec![0i8; self.full_n];
        for (&index, &bit) in self.clamps.iter() {
            spins[index] = if bit { 1 } else { -1 };
        }
        for (k, &orig) in self.free.iter().enumerate() {
            spins[orig] = reduced.get(k);
        }
        Ok(SpinState(spins))
    }

    /// Energy of the original model at the merged state.
    pub fn total_energy(&self, reduced: &SpinState) -> Result<f64> {
        Ok(self.model.energy(reduced)? + self.offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn nor_model() -> IsingModel {
        IsingModel::from_parts(vec![0.5, 0.5, 1.0], &[(0, 1, 0.5), (0, 2, 1.0), (1, 2, 1.0)])
            .unwrap()
    }

    fn st(v: &[i8]) -> SpinState {
        SpinState::new(v.to_vec()).unwrap()
    }

    #[test]
    fn nor_energies() {
        let m = nor_model();
        assert_eq!(m.energy(&st(&[-1, -1, 1])).unwrap(), -1.5);
        // 0.5 + 0.5 + 1 + 0.5 + 1 + 1
        assert_eq!(m.energy(&st(&[1, 1, 1])).unwrap(), 4.5);
    }

    #[test]
    fn empty_and_zero_models() {
        assert_eq!(IsingModel::new(0).energy(&st(&[])).unwrap(), 0.0);
        assert_eq!(IsingModel::new(3).energy(&st(&[1, -1, 1])).unwrap(), 0.0);
    }

    #[test]
    fn energy_dimension_error() {
        let err = nor_model().energy(&st(&[1, 1])).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 3, got: 2 });
    }

    #[test]
    fn coupling_is_symmetric_and_rejects_self() {
        let mut m = IsingModel::new(3);
        m.set_coupling(2, 0, -0.75).unwrap();
        assert_eq!(m.coupling(0, 2), -0.75);
        assert_eq!(m.coupling(2, 0), -0.75);
        assert_eq!(m.couplings().next(), Some((0, 2, -0.75)));
        assert_eq!(m.set_coupling(1, 1, 1.0), Err(Error::SelfCoupling(1)));
        assert!(matches!(m.set_h(5, 1.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(m.set_h(0, f64::NAN), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn spin_state_rejects_zero() {
        assert!(SpinState::new(vec![1, 0]).is_err());
    }

    #[test]
    fn bits_and_spins() {
        assert_eq!(bits_to_spins(&[true]).spins(), &[1]);
        assert_eq!(bits_to_spins(&[false]).spins(), &[-1]);
        let bits = vec![true, false, false, true];
        assert_eq!(spins_to_bits(&bits_to_spins(&bits)), bits);
    }

    #[test]
    fn fold_with_no_clamps_is_identity() {
        let m = nor_model();
        let f = m.clamp_fold(&ClampAssignment::new()).unwrap();
        assert_eq!(f.model, m);
        assert_eq!(f.offset, 0.0);
    }

    #[test]
    fn fold_nor_output_high() {
        let clamps: ClampAssignment = [(2, true)].into_iter().collect();
        let f = nor_model().clamp_fold(&clamps).unwrap();
        assert_eq!(f.model.biases(), &[1.5, 1.5]);
        assert_eq!(f.model.coupling(0, 1), 0.5);
        assert_eq!(f.offset, 1.0);
        let g = f.model.brute_force_ground().unwrap();
        assert_eq!(g.ground_states, vec![st(&[-1, -1])]);
        assert_eq!(g.e0 + f.offset, -1.5);
    }

    #[test]
    fn fold_nor_output_low() {
        let clamps: ClampAssignment = [(2, false)].into_iter().collect();
        let f = nor_model().clamp_fold(&clamps).unwrap();
        assert_eq!(f.model.biases(), &[-0.5, -0.5]);
        assert_eq!(f.model.coupling(0, 1), 0.5);
        assert_eq!(f.offset, -1.0);
        let g = f.model.brute_force_ground().unwrap();
        assert_eq!(g.ground_states.len(), 3);
        assert_eq!(g.e0 + f.offset, -1.5);
        let expanded: Vec<_> = g
            .ground_states
            .iter()
            .map(|s| f.expand(s).unwrap().to_bits())
            .collect();
        assert!(expanded.iter().all(|b| !b[2] && (b[0] || b[1])));
    }

    #[test]
    fn fold_rejects_out_of_range() {
        let clamps: ClampAssignment = [(7, true)].into_iter().collect();
        assert!(matches!(
            nor_model().clamp_fold(&clamps),
            Err(Error::IndexOutOfRange { index: 7, n: 3 })
        ));
    }

    #[test]
    fn nor_ground_manifold() {
        let g = nor_model().brute_force_ground().unwrap();
        assert_eq!(g.e0, -1.5);
        assert_eq!(g.gap, Some(2.0));
        let mut states = g.ground_states.clone();
        states.sort_by_key(|s| s.spins().to_vec());
        assert_eq!(
            states,
            vec![st(&[-1, -1, 1]), st(&[-1, 1, -1]), st(&[1, -1, -1]), st(&[1, 1, -1])]
        );
    }

    #[test]
    fn single_spin_ground() {
        let m = IsingModel::from_parts(vec![1.0], &[]).unwrap();
        let g = m.brute_force_ground().unwrap();
        assert_eq!(g.e0, -1.0);
        assert_eq!(g.ground_states, vec![st(&[-1])]);
        assert_eq!(g.gap, Some(2.0));
    }

    #[test]
    fn all_degenerate_has_no_gap() {
        let g = IsingModel::new(3).brute_force_ground().unwrap();
        assert_eq!(g.ground_states.len(), 8);
        assert_eq!(g.gap, None);
    }

    #[test]
    fn cap_enforced() {
        let m = IsingModel::new(30);
        assert_eq!(
            m.brute_force_ground(),
            Err(Error::TooLarge { n: 30, cap: 26 })
        );
        assert!(IsingModel::new(5).brute_force_ground_with_cap(4).is_err());
    }

    #[test]
    fn gray_code_blocks_match_direct_enumeration() {
        // 15 spins spans several 2^12 blocks
        let n = 15;
        let mut m = IsingModel::new(n);
        for i in 0..n {
            m.set_h(i, ((i * 7) % 5) as f64 * 0.25 - 0.5).unwrap();
            m.set_coupling(i, (i + 1) % n, if i % 3 == 0 { 1.0 } else { -0.5 }).unwrap();
            m.set_coupling(i, (i + 4) % n, 0.25).unwrap();
        }
        let g = m.brute_force_ground().unwrap();
        let energies: Vec<f64> = (0..1u64 << n)
            .map(|x| m.energy(&SpinState::from_index(x, n)).unwrap())
            .collect();
        let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((g.e0 - min).abs() < 1e-12);
        let ground: Vec<SpinState> = (0..1u64 << n)
            .filter(|&x| energies[x as usize] <= min + DEGENERACY_TOL)
            .map(|x| SpinState::from_index(x, n))
            .collect();
        assert_eq!(g.ground_states, ground);
        let next = energies
            .iter()
            .cloned()
            .filter(|&e| e > min + DEGENERACY_TOL)
            .fold(f64::INFINITY, f64::min);
        assert!((g.gap.unwrap() - (next - min)).abs() < 1e-12);
    }
}
