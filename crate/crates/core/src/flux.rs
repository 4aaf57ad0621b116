//! Classical transient simulation of coupled flux qubits.
//!
//! Each qubit is a main loop (`L_q + L_x`) closed through a two-junction
//! SQUID whose arms carry `L_t` each. The transverse flux `Φ_t` enters the
//! SQUID through `M_t`; the SQUID loop sees `Φ_0 − Φ_t`, so `Φ_t = Φ_0/2`
//! cancels the Josephson term (single well) and `Φ_t = 0` gives the
//! double well. Junctions follow the RCSJ model with a parallel noise source
//! that is held constant over each noise sample.
//!
//! For junction arm `k ∈ {0, 1}` of qubit `i`, flux quantization around the
//! loop formed by that arm and the main loop reads
//!
//! ```text
//! L_t I_ik + L_m (I_i0 + I_i1) − Σ_j M_ij (I_j0 + I_j1)
//!     = Φ_x,i ± (Φ_0 − Φ_t)/2 − θ_ik Φ_0 / 2π
//! ```
//!
//! and the arm current drives the junction:
//! `I_ik + I_n = I_c sin θ + (Φ_0/2π)(θ'/R + C θ'')`.
//! Positive `I_q = I_i0 + I_i1` reads as bit 1.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::anneal::{derive_seed, OutcomeTable};
use crate::error::{Error, Result};
use crate::ising::IsingModel;

/// Magnetic flux quantum (Wb).
pub const PHI0: f64 = 2.067_833_848e-15;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

/// Bias current per unit of `h`.
pub const BIAS_CURRENT_UNIT: f64 = 10.5e-6;
/// Mutual inductance per unit of `|J|`.
pub const COUPLING_MUTUAL_UNIT: f64 = 8e-12;
/// Polarity of `M_ij` relative to `J_ij`. With `+1`, a positive mutual adds
/// `+M_ij I_q,j` to the flux of qubit `i` and couples antiferromagnetically,
/// as checked by the two-qubit calibration test.
pub const COUPLING_SIGN: f64 = 1.0;
pub const MAX_ABS_H: f64 = 2.0;
pub const MAX_ABS_J: f64 = 1.0;

const TWO_PI_OVER_PHI0: f64 = 2.0 * PI / PHI0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitCircuitParams {
    pub ic: f64,
    pub r: f64,
    pub c: f64,
    pub l_t: f64,
    pub l_q: f64,
    pub l_x: f64,
    pub m_t: f64,
    pub m_x: f64,
}

impl Default for QubitCircuitParams {
    fn default() -> Self {
        Self {
            ic: 4e-6,
            r: 3.2e3,
            c: 17e-15,
            l_t: 5e-12,
            l_q: 250e-12,
            l_x: 10e-12,
            m_t: 2e-12,
            m_x: 4e-12,
        }
    }
}

impl QubitCircuitParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("Ic", self.ic),
            ("R", self.r),
            ("C", self.c),
            ("L_t", self.l_t),
            ("L_q", self.l_q),
            ("L_x", self.l_x),
            ("M_t", self.m_t),
            ("M_x", self.m_x),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Series inductance of the main loop.
    pub fn main_loop_inductance(&self) -> f64 {
        self.l_q + self.l_x
    }

    /// Stewart–McCumber parameter `2π I_c R² C / Φ_0`.
    pub fn mccumber(&self) -> f64 {
        TWO_PI_OVER_PHI0 * self.ic * self.r * self.r * self.c
    }

    /// Junction plasma frequency (Hz).
    pub fn plasma_frequency(&self) -> f64 {
        (TWO_PI_OVER_PHI0 * self.ic / self.c).sqrt() / (2.0 * PI)
    }
}

/// `sqrt(4 k_B T B / R)`.
pub fn johnson_sigma(r: f64, temperature: f64, bandwidth: f64) -> Result<f64> {
    if !(r > 0.0) || !(temperature > 0.0) || !(bandwidth >= 0.0) {
        return Err(Error::Parameter(format!(
            "need R > 0, T > 0, B >= 0; got {r}, {temperature}, {bandwidth}"
        )));
    }
    Ok((4.0 * K_B * temperature * bandwidth / r).sqrt())
}

/// Bias currents `h_i · 10.5 µA` and mutuals `J_ij · 8 pH` (symmetric, zero
/// diagonal).
pub fn logical_to_physical(model: &IsingModel) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = model.n();
    let mut ix = Vec::with_capacity(n);
    for (i, &h) in model.biases().iter().enumerate() {
        if h.abs() > MAX_ABS_H {
            return Err(Error::Parameter(format!(
                "bias h[{i}] = {h} outside ±{MAX_ABS_H}"
            )));
        }
        ix.push(h * BIAS_CURRENT_UNIT);
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, j, v) in model.couplings() {
        if v.abs() > MAX_ABS_J {
            return Err(Error::Parameter(format!(
                "coupling J[{i},{j}] = {v} outside ±{MAX_ABS_J}"
            )));
        }
        let mij = COUPLING_SIGN * v * COUPLING_MUTUAL_UNIT;
        m[(i, j)] = mij;
        m[(j, i)] = mij;
    }
    Ok((ix, m))
}

/// Physical network: per-qubit circuits, bias currents and mutuals.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub qubits: Vec<QubitCircuitParams>,
    pub bias_current: Vec<f64>,
    pub mutual: DMatrix<f64>,
}

impl NetworkLayout {
    pub fn new(
        qubits: Vec<QubitCircuitParams>,
        bias_current: Vec<f64>,
        mutual: DMatrix<f64>,
    ) -> Result<Self> {
        let n = qubits.len();
        if bias_current.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: bias_current.len(),
            });
        }
        if mutual.nrows() != n || mutual.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: mutual.nrows(),
            });
        }
        for q in &qubits {
            q.validate()?;
        }
        for i in 0..n {
            if mutual[(i, i)] != 0.0 {
                return Err(Error::Parameter(format!("mutual M[{i},{i}] must be zero")));
            }
            for j in 0..n {
                if mutual[(i, j)] != mutual[(j, i)] {
                    return Err(Error::Parameter(format!("mutual matrix not symmetric at {i},{j}")));
                }
                if mutual[(i, j)].abs() >= 0.5 * qubits[i].main_loop_inductance() {
                    return Err(Error::Parameter(format!(
                        "mutual M[{i},{j}] too large for the loop inductance"
                    )));
                }
            }
        }
        Ok(Self {
            qubits,
            bias_current,
            mutual,
        })
    }

    /// Layout for an Ising model with identical default qubits.
    pub fn from_model(model: &IsingModel) -> Result<Self> {
        let (ix, m) = logical_to_physical(model)?;
        Self::new(vec![QubitCircuitParams::default(); model.n()], ix, m)
    }

    pub fn n(&self) -> usize {
        self.qubits.len()
    }

    /// External flux `I_x M_x` threading the main loop of qubit `i`.
    pub fn bias_flux(&self, i: usize) -> f64 {
        self.bias_current[i] * self.qubits[i].m_x
    }

    pub fn main_loop_inductance(&self, i: usize) -> f64 {
        self.qubits[i].main_loop_inductance()
    }

    /// Arm-current inductance matrix (`2n × 2n`, arm `k` of qubit `i` at `2i + k`).
    fn inductance_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut l = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let lm = self.main_loop_inductance(i);
            for k in 0..2 {
                let r = 2 * i + k;
                l[(r, r)] += self.qubits[i].l_t;
                for kk in 0..2 {
                    l[(r, 2 * i + kk)] += lm;
                }
                for j in 0..n {
                    if j != i {
                        for kk in 0..2 {
                            l[(r, 2 * j + kk)] -= self.mutual[(i, j)];
                        }
                    }
                }
            }
        }
        l
    }
}

/// Piecewise-linear transverse-flux waveform: hold at `Φ_0/2`, ramp to 0,
/// hold at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    pub warmup: f64,
    pub duration: f64,
    pub hold: f64,
}

impl Default for Ramp {
    fn default() -> Self {
        Self {
            warmup: 0.1e-9,
            duration: 2e-9,
            hold: 0.2e-9,
        }
    }
}

impl Ramp {
    pub fn validate(&self) -> Result<()> {
        if !(self.warmup >= 0.0) || !(self.duration > 0.0) || !(self.hold >= 0.0) {
            return Err(Error::Parameter("ramp times must be non-negative with a positive ramp".into()));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.warmup + self.duration + self.hold
    }

    pub fn transverse_flux(&self, t: f64) -> f64 {
        if t < self.warmup {
            PHI0 / 2.0
        } else if t < self.warmup + self.duration {
            PHI0 / 2.0 * (1.0 - (t - self.warmup) / self.duration)
        } else {
            0.0
        }
    }

    /// Control current producing [`Ramp::transverse_flux`] through `M_t`.
    pub fn transverse_current(&self, t: f64, params: &QubitCircuitParams) -> f64 {
        self.transverse_flux(t) / params.m_t
    }
}

/// Per-junction noise current, one sample per `sample_interval`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub sample_interval: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            sigma: 0.13e-6,
            sample_interval: 0.5e-12,
        }
    }
}

impl NoiseSpec {
    /// Johnson noise of `r` at `temperature`, sampled at twice `bandwidth`.
    pub fn johnson(r: f64, temperature: f64, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) {
            return Err(Error::Parameter("bandwidth must be positive".into()));
        }
        Ok(Self {
            sigma: johnson_sigma(r, temperature, bandwidth)?,
            sample_interval: 0.5 / bandwidth,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) || !(self.sample_interval > 0.0) {
            return Err(Error::Parameter(format!(
                "noise needs sigma >= 0 and a positive interval, got {} and {}",
                self.sigma, self.sample_interval
            )));
        }
        Ok(())
    }
}

/// Gaussian sample stream for one junction.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl NoiseStream {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        let normal = if sigma > 0.0 {
            Some(Normal::new(0.0, sigma).map_err(|e| Error::Parameter(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            normal,
        })
    }

    pub fn sample(&mut self) -> f64 {
        match &self.normal {
            Some(d) => d.sample(&mut self.rng),
            None => 0.0,
        }
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    /// Keep every `k`-th step in the trace; `None` records only the end state.
    pub decimate: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 0.05e-12,
            decimate: None,
        }
    }
}

/// Time series and read-out of one shot.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub times: Vec<f64>,
    /// `currents[t][i]`: circulating current of qubit `i`.
    pub currents: Vec<Vec<f64>>,
    /// `phases[t][2i + k]`: phase of junction `k` of qubit `i`.
    pub phases: Vec<Vec<f64>>,
    pub final_currents: Vec<f64>,
    pub bits: Vec<bool>,
}

impl TraceSet {
    /// `t,Iq_1..Iq_n` with time in seconds and currents in amperes.
    pub fn to_csv(&self) -> String {
        let n = self.final_currents.len();
        let mut out = String::from("t");
        for i in 1..=n {
            write!(out, ",Iq_{i}").unwrap();
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.currents) {
            write!(out, "{t:e}").unwrap();
            for v in row {
                write!(out, ",{v:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

struct Dynamics {
    n: usize,
    l_inv: DMatrix<f64>,
    ext: Vec<f64>,
    ic: Vec<f64>,
    inv_c: Vec<f64>,
    inv_rc: Vec<f64>,
}

impl Dynamics {
    fn new(layout: &NetworkLayout) -> Result<Self> {
        let l = layout.inductance_matrix();
        let l_inv = l
            .try_inverse()
            .ok_or_else(|| Error::Parameter("inductance matrix is singular".into()))?;
        let n = layout.n();
        let per_junction = |f: &dyn Fn(&QubitCircuitParams) -> f64| -> Vec<f64> {
            (0..2 * n).map(|r| f(&layout.qubits[r / 2])).collect()
        };
        Ok(Self {
            n,
            l_inv,
            ext: (0..2 * n).map(|r| layout.bias_flux(r / 2)).collect(),
            ic: per_junction(&|q| q.ic),
            inv_c: per_junction(&|q| 1.0 / q.c),
            inv_rc: per_junction(&|q| 1.0 / (q.r * q.c)),
        })
    }

    /// Arm currents; `scratch` holds the loop drive fluxes on return.
    fn arm_currents(&self, theta: &[f64], phi_t: f64, scratch: &mut [f64], out: &mut [f64]) {
        let half_sq = (PHI0 - phi_t) / 2.0;
        for (r, d) in scratch.iter_mut().enumerate() {
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            *d = self.ext[r] + sign * half_sq - theta[r] / TWO_PI_OVER_PHI0;
        }
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..2 * self.n).map(|c| self.l_inv[(r, c)] * scratch[c]).sum();
        }
    }

    fn loop_currents(&self, theta: &[f64], phi_t: f64) -> Vec<f64> {
        let mut arms = vec![0.0; 2 * self.n];
        let mut drive = vec![0.0; 2 * self.n];
        self.arm_currents(theta, phi_t, &mut drive, &mut arms);
        arms.chunks(2).map(|p| p[0] + p[1]).collect()
    }

    /// Writes `(θ', ω')` for state `(θ, ω)`.
    fn rhs(
        &self,
        theta: &[f64],
        omega: &[f64],
        phi_t: f64,
        noise: &[f64],
        scratch: &mut [f64],
        d_theta: &mut [f64],
        d_omega: &mut [f64],
    ) {
        // d_theta doubles as the drive buffer until it is overwritten below.
        self.arm_currents(theta, phi_t, d_theta, scratch);
        for r in 0..2 * self.n {
            d_theta[r] = omega[r];
            d_omega[r] = TWO_PI_OVER_PHI0
                * self.inv_c[r]
                * (scratch[r] + noise[r] - self.ic[r] * theta[r].sin())
                - omega[r] * self.inv_rc[r];
        }
    }
}

/// Integrates one shot with fourth-order Runge–Kutta.
pub fn simulate_shot(
    layout: &NetworkLayout,
    noise: &NoiseSpec,
    ramp: &Ramp,
    opts: &SimOptions,
    seed: u64,
) -> Result<TraceSet> {
    noise.validate()?;
    ramp.validate()?;
    if layout.n() == 0 {
        return Err(Error::Parameter("layout has no qubits".into()));
    }
    if !(opts.dt > 0.0) {
        return Err(Error::Parameter("time step must be positive".into()));
    }
    let ratio = noise.sample_interval / opts.dt;
    let substeps = ratio.round() as usize;
    if substeps == 0 || (ratio - substeps as f64).abs() > 1e-6 * ratio {
        return Err(Error::Parameter(format!(
            "time step {} must divide the noise interval {}",
            opts.dt, noise.sample_interval
        )));
    }

    let dyn_ = Dynamics::new(layout)?;
    let m = 2 * layout.n();
    let mut streams = (0..m)
        .map(|r| NoiseStream::new(noise.sigma, derive_seed(seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;

    let mut theta: Vec<f64> = (0..m).map(|r| if r % 2 == 0 { PI / 2.0 } else { -PI / 2.0 }).collect();
    let mut omega = vec![0.0; m];
    let mut noise_now = vec![0.0; m];

    let steps = (ramp.total() / opts.dt).round() as usize;
    let dt = opts.dt;
    let mut trace = TraceSet {
        times: Vec::new(),
        currents: Vec::new(),
        phases: Vec::new(),
        final_currents: Vec::new(),
        bits: Vec::new(),
    };
    let record = |trace: &mut TraceSet, t: f64, theta: &[f64]| {
        trace.times.push(t);
        trace.currents.push(dyn_.loop_currents(theta, ramp.transverse_flux(t)));
        trace.phases.push(theta.to_vec());
    };

    let mut scratch = vec![0.0; m];
    let (mut k1t, mut k1w) = (vec![0.0; m], vec![0.0; m]);
    let (mut k2t, mut k2w) = (vec![0.0; m], vec![0.0; m]);
    let (mut k3t, mut k3w) = (vec![0.0; m], vec![0.0; m]);
    let (mut k4t, mut k4w) = (vec![0.0; m], vec![0.0; m]);
    let (mut tt, mut tw) = (vec![0.0; m], vec![0.0; m]);

    for step in 0..steps {
        let t = step as f64 * dt;
        if let Some(k) = opts.decimate {
            if step % k.max(1) == 0 {
                record(&mut trace, t, &theta);
            }
        }
        if step % substeps == 0 {
            for (v, s) in noise_now.iter_mut().zip(streams.iter_mut()) {
                *v = s.sample();
            }
        }
        let p0 = ramp.transverse_flux(t);
        let p1 = ramp.transverse_flux(t + dt / 2.0);
        let p2 = ramp.transverse_flux(t + dt);

        dyn_.rhs(&theta, &omega, p0, &noise_now, &mut scratch, &mut k1t, &mut k1w);
        for r in 0..m {
            tt[r] = theta[r] + dt / 2.0 * k1t[r];
            tw[r] = omega[r] + dt / 2.0 * k1w[r];
        }
        dyn_.rhs(&tt, &tw, p1, &noise_now, &mut scratch, &mut k2t, &mut k2w);
        for r in 0..m {
            tt[r] = theta[r] + dt / 2.0 * k2t[r];
            tw[r] = omega[r] + dt / 2.0 * k2w[r];
        }
        dyn_.rhs(&tt, &tw, p1, &noise_now, &mut scratch, &mut k3t, &mut k3w);
        for r in 0..m {
            tt[r] = theta[r] + dt * k3t[r];
            tw[r] = omega[r] + dt * k3w[r];
        }
        dyn_.rhs(&tt, &tw, p2, &noise_now, &mut scratch, &mut k4t, &mut k4w);
        for r in 0..m {
            theta[r] += dt / 6.0 * (k1t[r] + 2.0 * k2t[r] + 2.0 * k3t[r] + k4t[r]);
            omega[r] += dt / 6.0 * (k1w[r] + 2.0 * k2w[r] + 2.0 * k3w[r] + k4w[r]);
        }
        // A junction voltage far above the gap scale means the step is too coarse.
        if let Some(r) = (0..m).find(|&r| !theta[r].is_finite() || omega[r].abs() > 1e15) {
            return Err(Error::Instability {
                time: t + dt,
                detail: format!("junction {r}: phase {} rate {}", theta[r], omega[r]),
            });
        }
    }

    let t_end = steps as f64 * dt;
    if opts.decimate.is_some() {
        record(&mut trace, t_end, &theta);
    }
    trace.final_currents = dyn_.loop_currents(&theta, ramp.transverse_flux(t_end));
    trace.bits = trace.final_currents.iter().map(|&i| i > 0.0).collect();
    Ok(trace)
}

/// Final bits of many shots.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub master_seed: u64,
    pub bits: Vec<Vec<bool>>,
    pub final_currents: Vec<Vec<f64>>,
}

impl Ensemble {
    /// Counts per bit pattern over the chosen qubits.
    pub fn counts(&self, qubits: &[usize]) -> BTreeMap<Vec<bool>, usize> {
        let mut out = BTreeMap::new();
        for b in &self.bits {
            *out.entry(qubits.iter().map(|&q| b[q]).collect()).or_insert(0) += 1;
        }
        out
    }
}

pub fn run_ensemble(
    layout: &NetworkLayout,
    noise: &NoiseSpec,
    ramp: &Ramp,
    opts: &SimOptions,
    n_shots: usize,
    master_seed: u64,
) -> Result<Ensemble> {
    if n_shots == 0 {
        return Err(Error::Parameter("need at least one shot".into()));
    }
    let opts = SimOptions {
        decimate: None,
        ..*opts
    };
    let traces = (0..n_shots as u64)
        .into_par_iter()
        .map(|k| simulate_shot(layout, noise, ramp, &opts, derive_seed(master_seed, k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        master_seed,
        bits: traces.iter().map(|t| t.bits.clone()).collect(),
        final_currents: traces.into_iter().map(|t| t.final_currents).collect(),
    })
}

/// How the NOR output is held during the inverse run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampMode {
    /// An extra over-biased qubit coupled ferromagnetically to the output.
    ControlQubit,
    /// Over-bias applied to the output qubit itself.
    DirectBias,
}

/// Logical model of the inverse-NOR experiment: inputs 0 and 1, output 2,
/// and (in control-qubit mode) control qubit 3.
pub fn nor_inverse_model(clamp: bool, mode: ClampMode, strength: f64) -> Result<IsingModel> {
    let toward = if clamp { -strength } else { strength };
    match mode {
        ClampMode::ControlQubit => IsingModel::from_parts(
            vec![0.5, 0.5, 1.0, toward],
            &[(0, 1, 0.5), (0, 2, 1.0), (1, 2, 1.0), (2, 3, -1.0)],
        ),
        ClampMode::DirectBias => IsingModel::from_parts(
            vec![0.5, 0.5, toward],
            &[(0, 1, 0.5), (0, 2, 1.0), (1, 2, 1.0)],
        ),
    }
}

pub fn nor_inverse_layout(clamp: bool, mode: ClampMode, strength: f64) -> Result<NetworkLayout> {
    NetworkLayout::from_model(&nor_inverse_model(clamp, mode, strength)?)
}

/// Whether final bits satisfy `out = NOR(a, b)` with the output at `clamp`.
pub fn nor_shot_valid(bits: &[bool], clamp: bool) -> bool {
    bits[2] == !(bits[0] || bits[1]) && bits[2] == clamp
}

/// Input-pair labels in spin notation, in table order.
pub const INPUT_LABELS: [&str; 4] = ["(-1,-1)", "(-1,+1)", "(+1,-1)", "(+1,+1)"];

fn input_label(a: bool, b: bool) -> String {
    INPUT_LABELS[usize::from(a) * 2 + usize::from(b)].to_string()
}

/// Input-pair counts of an inverse-NOR ensemble, keyed by [`INPUT_LABELS`].
pub fn input_counts(ensemble: &Ensemble) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for b in &ensemble.bits {
        *out.entry(input_label(b[0], b[1])).or_insert(0) += 1;
    }
    out
}

/// Two-column table of input pairs for output clamped to 0 and to 1.
pub fn inverse_nor_table(clamp0: &Ensemble, clamp1: &Ensemble) -> String {
    let mut table = OutcomeTable::new(INPUT_LABELS.iter().map(|s| s.to_string()).collect());
    table.add_column("out=0", input_counts(clamp0));
    table.add_column("out=1", input_counts(clamp1));
    table.render()
}

/// Effective single-qubit potential along the common-mode loop flux.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    /// Junction flux `θ Φ_0 / 2π` of the common mode (Wb).
    pub flux: Vec<f64>,
    /// Potential energy (J).
    pub energy: Vec<f64>,
    /// Flux of every local minimum, ascending.
    pub minima: Vec<f64>,
    /// Circulating current at each minimum.
    pub minima_currents: Vec<f64>,
}

impl PotentialProfile {
    pub fn equilibria(&self) -> usize {
        self.minima.len()
    }

    /// Index into `minima` of the lowest well.
    pub fn deepest(&self) -> Option<usize> {
        let step = self.flux.get(1).map_or(1.0, |f| f - self.flux[0]);
        let energy_at = |f: f64| {
            let k = ((f - self.flux[0]) / step).round() as usize;
            self.energy[k]
        };
        (0..self.minima.len()).min_by(|&a, &b| {
            energy_at(self.minima[a]).total_cmp(&energy_at(self.minima[b]))
        })
    }
}

/// Potential of qubit `qubit` with its bias replaced by `phi_x` and its
/// neighbours frozen at `neighbour_currents` (zero when `None`).
///
/// Both SQUID arms are taken as symmetric with the arm phase difference set
/// by the SQUID flux; screening by `L_t` is neglected (`2π L_t I_c/Φ_0 ≈ 0.06`).
pub fn static_potential(
    layout: &NetworkLayout,
    qubit: usize,
    phi_t: f64,
    phi_x: f64,
    neighbour_currents: Option<&[f64]>,
) -> Result<PotentialProfile> {
    let n = layout.n();
    if qubit >= n {
        return Err(Error::IndexOutOfRange { index: qubit, n });
    }
    let coupled: f64 = match neighbour_currents {
        Some(c) if c.len() != n => {
            return Err(Error::Dimension {
                expected: n,
                got: c.len(),
            })
        }
        Some(c) => (0..n)
            .filter(|&j| j != qubit)
            .map(|j| layout.mutual[(qubit, j)] * c[j])
            .sum(),
        None => 0.0,
    };
    let q = &layout.qubits[qubit];
    let phi_ext = phi_x + coupled;
    let l_eff = q.main_loop_inductance() + q.l_t / 2.0;
    let e_j = q.ic / TWO_PI_OVER_PHI0;
    let cos_delta = (PI * (PHI0 - phi_t) / PHI0).cos();

    const POINTS: usize = 8001;
    let lo = phi_ext - 2.0 * PHI0;
    let step = 4.0 * PHI0 / (POINTS - 1) as f64;
    let flux: Vec<f64> = (0..POINTS).map(|k| lo + k as f64 * step).collect();
    let energy: Vec<f64> = flux
        .iter()
        .map(|&f| {
            (phi_ext - f).powi(2) / (2.0 * l_eff)
                - 2.0 * e_j * cos_delta * (TWO_PI_OVER_PHI0 * f).cos()
        })
        .collect();
    // Ignore ripples below a tiny fraction of the Josephson scale.
    let tol = 1e-9 * e_j;
    let minima: Vec<f64> = (1..POINTS - 1)
        .filter(|&k| energy[k] < energy[k - 1] - tol && energy[k] <= energy[k + 1] - tol)
        .map(|k| flux[k])
        .collect();
    let minima_currents = minima.iter().map(|&f| (phi_ext - f) / l_eff).collect();
    Ok(PotentialProfile {
        flux,
        energy,
        minima,
        minima_currents,
    })
}
