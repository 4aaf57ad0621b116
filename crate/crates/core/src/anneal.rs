//! Classical simulated annealing with single-spin-flip Metropolis dynamics.
//!
//! Shot `k` of a run draws its generator seed from
//! `mix64(master_seed ^ (k * 0x9E37_79B9_7F4A_7C15))`, where `mix64` is the
//! SplitMix64 finalizer. Shots are independent, so results do not depend on
//! how many worker threads execute them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinState, DEGENERACY_TOL};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-shot seed derived from the run's master seed.
pub fn derive_seed(master: u64, shot: u64) -> u64 {
    mix64(master ^ shot.wrapping_mul(GOLDEN_GAMMA))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Geometric,
    Linear,
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(ScheduleKind::Geometric),
            "linear" => Ok(ScheduleKind::Linear),
            other => Err(Error::Parameter(format!("unknown schedule '{other}'"))),
        }
    }
}

/// Temperature ramp, in the same units as model energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub t_hot: f64,
    pub t_cold: f64,
    pub sweeps: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            kind: ScheduleKind::Geometric,
            t_hot: 3.0,
            t_cold: 0.05,
            sweeps: 2000,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_cold > 0.0) || !(self.t_hot >= self.t_cold) || !self.t_hot.is_finite() {
            return Err(Error::Parameter(format!(
                "need t_hot >= t_cold > 0, got {} and {}",
                self.t_hot, self.t_cold
            )));
        }
        if self.sweeps == 0 {
            return Err(Error::Parameter("sweeps must be at least 1".into()));
        }
        Ok(())
    }

    /// Temperature of sweep `k` (0-based); the last sweep runs at `t_cold`.
    pub fn temperature(&self, k: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.t_cold;
        }
        let x = k as f64 / (self.sweeps - 1) as f64;
        match self.kind {
            ScheduleKind::Geometric => self.t_hot * (self.t_cold / self.t_hot).powf(x),
            ScheduleKind::Linear => self.t_hot + (self.t_cold - self.t_hot) * x,
        }
    }
}

/// Metropolis rule: downhill moves always, uphill with probability `exp(-dE/T)`.
pub fn metropolis_accept(delta_e: f64, temperature: f64, uniform: f64) -> bool {
    delta_e <= 0.0 || uniform < (-delta_e / temperature).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotResult {
    pub shot: u64,
    pub seed: u64,
    pub state: SpinState,
    pub energy: f64,
}

/// Adjacency in flat arrays for the inner loop.
struct Compiled<'a> {
    model: &'a IsingModel,
    start: Vec<usize>,
    neighbour: Vec<usize>,
    weight: Vec<f64>,
}

impl<'a> Compiled<'a> {
    fn new(model: &'a IsingModel) -> Self {
        let adj = model.adjacency();
        let mut start = Vec::with_capacity(adj.len() + 1);
        let mut neighbour = Vec::new();
        let mut weight = Vec::new();
        start.push(0);
        for list in &adj {
            for &(j, v) in list {
                neighbour.push(j);
                weight.push(v);
            }
            start.push(neighbour.len());
        }
        Self {
            model,
            start,
            neighbour,
            weight,
        }
    }

    fn shot(&self, schedule: &Schedule, shot: u64, seed: u64) -> ShotResult {
        let n = self.model.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let mut field: Vec<f64> = (0..n)
            .map(|i| {
                let couplings: f64 = (self.start[i]..self.start[i + 1])
                    .map(|e| self.weight[e] * f64::from(s[self.neighbour[e]]))
                    .sum();
                self.model.h(i) + couplings
            })
            .collect();
        let mut energy = self.model.energy_unchecked(&s);

        for sweep in 0..schedule.sweeps {
            let t = schedule.temperature(sweep);
            for i in 0..n {
                let si = f64::from(s[i]);
                let delta = -2.0 * si * field[i];
                let u: f64 = if delta > 0.0 { rng.random() } else { 0.0 };
                if metropolis_accept(delta, t, u) {
                    s[i] = -s[i];
                    energy += delta;
                    for e in self.start[i]..self.start[i + 1] {
                        field[self.neighbour[e]] -= 2.0 * self.weight[e] * si;
                    }
                }
            }
        }

        let exact = self.model.energy_unchecked(&s);
        assert!(
            (exact - energy).abs() < 1e-6,
            "incremental energy drifted: {energy} vs {exact}"
        );
        ShotResult {
            shot,
            seed,
            state: SpinState::from_raw(s),
            energy: exact,
        }
    }
}

/// One annealing run from a random start.
pub fn anneal_shot(model: &IsingModel, schedule: &Schedule, seed: u64) -> Result<ShotResult> {
    schedule.validate()?;
    if model.n() == 0 {
        return Err(Error::Parameter("model has no spins".into()));
    }
    Ok(Compiled::new(model).shot(schedule, 0, seed))
}

/// `n_shots` independent shots in parallel, returned in shot order.
pub fn run_shots(
    model: &IsingModel,
    schedule: &Schedule,
    n_shots: usize,
    master_seed: u64,
) -> Result<Vec<ShotResult>> {
    schedule.validate()?;
    if n_shots == 0 {
        return Err(Error::Parameter("need at least one shot".into()));
    }
    if model.n() == 0 {
        return Err(Error::Parameter("model has no spins".into()));
    }
    let compiled = Compiled::new(model);
    Ok((0..n_shots as u64)
        .into_par_iter()
        .map(|k| compiled.shot(schedule, k, derive_seed(master_seed, k)))
        .collect())
}

/// Aggregate statistics of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub shots: usize,
    pub master_seed: u64,
    pub best_energy: f64,
    pub reference_e0: Option<f64>,
    pub ground_hits: Option<usize>,
    pub histogram: BTreeMap<String, usize>,
}

impl RunSummary {
    /// Histogram keyed by `key(shot)`; ground hits counted against `reference_e0`.
    pub fn from_shots(
        shots: &[ShotResult],
        master_seed: u64,
        reference_e0: Option<f64>,
        key: impl Fn(&ShotResult) -> String,
    ) -> Self {
        let mut histogram = BTreeMap::new();
        for s in shots {
            *histogram.entry(key(s)).or_insert(0) += 1;
        }
        let best_energy = shots.iter().map(|s| s.energy).fold(f64::INFINITY, f64::min);
        let ground_hits = reference_e0.map(|e0| {
            shots
                .iter()
                .filter(|s| s.energy <= e0 + DEGENERACY_TOL)
                .count()
        });
        Self {
            shots: shots.len(),
            master_seed,
            best_energy,
            reference_e0,
            ground_hits,
            histogram,
        }
    }

    /// Histogram keyed by the raw bit string of each final state.
    pub fn by_bits(shots: &[ShotResult], master_seed: u64, reference_e0: Option<f64>) -> Self {
        Self::from_shots(shots, master_seed, reference_e0, |s| s.state.bit_string())
    }

    pub fn ground_rate(&self) -> Option<f64> {
        self.ground_hits.map(|h| h as f64 / self.shots as f64)
    }

    /// Line-oriented `key value` text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "shots {}", self.shots).unwrap();
        writeln!(out, "seed {}", self.master_seed).unwrap();
        writeln!(out, "best_energy {}", self.best_energy).unwrap();
        if let Some(e0) = self.reference_e0 {
            writeln!(out, "reference_e0 {e0}").unwrap();
        }
        if let (Some(h), Some(r)) = (self.ground_hits, self.ground_rate()) {
            writeln!(out, "ground_hits {h}").unwrap();
            writeln!(out, "ground_rate {r}").unwrap();
        }
        for (k, v) in &self.histogram {
            writeln!(out, "outcome {k} {v}").unwrap();
        }
        out
    }
}

/// Per-shot CSV: `shot,energy,ground_hit,state_bits[,extra...]`.
pub fn shots_csv(
    shots: &[ShotResult],
    reference_e0: Option<f64>,
    extra_header: &[&str],
    extra: impl Fn(&ShotResult) -> Vec<String>,
) -> String {
    let mut out = String::from("shot,energy,ground_hit,state_bits");
    for h in extra_header {
        out.push(',');
        out.push_str(h);
    }
    out.push('\n');
    for s in shots {
        let hit = reference_e0.is_some_and(|e0| s.energy <= e0 + DEGENERACY_TOL);
        write!(out, "{},{},{},{}", s.shot, s.energy, u8::from(hit), s.state.bit_string()).unwrap();
        for v in extra(s) {
            out.push(',');
            out.push_str(&v);
        }
        out.push('\n');
    }
    out
}

/// Count table in the layout of a two-column outcome table: one row per
/// label, one column per run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeTable {
    pub row_labels: Vec<String>,
    pub columns: Vec<(String, BTreeMap<String, usize>)>,
}

impl OutcomeTable {
    pub fn new(row_labels: Vec<String>) -> Self {
        Self {
            row_labels,
            columns: Vec::new(),
        }
    }

    pub fn add_column(&mut self, label: &str, counts: BTreeMap<String, usize>) {
        self.columns.push((label.to_string(), counts));
    }

    /// Tab-separated rendering; labels missing from a column count as zero.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("outcome");
        for (label, _) in &self.columns {
            out.push('\t');
            out.push_str(label);
        }
        out.push('\n');
        for row in &self.row_labels {
            out.push_str(row);
            for (_, counts) in &self.columns {
                write!(out, "\t{}", counts.get(row).copied().unwrap_or(0)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Table with a row for every key seen in `summary`, in key order.
pub fn summarize_table(summary: &RunSummary, column: &str) -> String {
    let mut table = OutcomeTable::new(summary.histogram.keys().cloned().collect());
    table.add_column(column, summary.histogram.clone());
    table.render()
}
