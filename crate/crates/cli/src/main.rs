use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qafactor::anneal::{run_shots, shots_csv, summarize_table, RunSummary, Schedule, ScheduleKind};
use qafactor::capacity::{estimate, CapacityInput};
use qafactor::flux::{
    input_counts, nor_inverse_layout, nor_shot_valid, run_ensemble, simulate_shot, ClampMode,
    NoiseSpec, Ramp, SimOptions, INPUT_LABELS,
};
use qafactor::format::{parse_model, parse_ports, write_model, write_ports, write_roles};
use qafactor::gates::{and_gate, half_adder, nor_gate, verify_gate};
use qafactor::ising::IsingModel;
use qafactor::multiplier::{MultiplierNetwork, NetworkOptions, ProductClamp};
use qafactor::synth::synthesize_mult_unit;
use qafactor::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self {
            code,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Range { .. } | Error::Parameter(_) => EXIT_USAGE,
            Error::Synthesis { .. } => EXIT_VERIFY,
            Error::Instability { .. } => EXIT_NUMERIC,
            _ => EXIT_DATA,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "qafactor", version, about = "Invertible Ising logic, annealed multiplication and factoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gate models
    Gates {
        #[command(subcommand)]
        action: GatesAction,
    },
    /// Multiplier network synthesis
    Synth {
        #[command(subcommand)]
        action: SynthAction,
    },
    /// Anneal a model file
    Anneal(AnnealCmd),
    /// Factor an integer by running a multiplier backwards
    Factor(FactorCmd),
    /// Multiply two integers on a multiplier network
    Multiply(MultiplyCmd),
    /// Exhaustively check a model file
    Verify(VerifyCmd),
    /// Circuit-level flux-qubit experiments
    Circuit {
        #[command(subcommand)]
        action: CircuitAction,
    },
    /// Chip capacity estimate
    Capacity(CapacityCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum GateKind {
    Nor,
    And,
    HalfAdder,
    MultUnit,
}

#[derive(Subcommand)]
enum GatesAction {
    /// Print a gate model; with --out also write `<prefix>.ising` and `<prefix>.ports`
    Emit {
        kind: GateKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SynthAction {
    /// Build an array multiplier network
    Mult {
        #[arg(long)]
        bits_a: usize,
        #[arg(long)]
        bits_b: usize,
        /// Insert relay qubits into inter-cell wires
        #[arg(long)]
        chains: bool,
        #[arg(long, default_value_t = 1.0)]
        chain_strength: f64,
        /// Write `<prefix>.ising` and `<prefix>.roles`
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct AnnealFlags {
    #[arg(long, default_value_t = 200)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    sweeps: usize,
    #[arg(long, default_value_t = 3.0)]
    t_hot: f64,
    #[arg(long, default_value_t = 0.05)]
    t_cold: f64,
    #[arg(long, default_value = "geometric")]
    schedule: String,
    /// Per-shot CSV log
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl AnnealFlags {
    fn schedule(&self) -> Result<Schedule, Failure> {
        let schedule = Schedule {
            kind: self.schedule.parse::<ScheduleKind>()?,
            t_hot: self.t_hot,
            t_cold: self.t_cold,
            sweeps: self.sweeps,
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

#[derive(Args)]
struct AnnealCmd {
    model: PathBuf,
    /// Count shots at or below this energy as ground hits
    #[arg(long)]
    reference_e0: Option<f64>,
    /// Compute the reference energy by exhaustive search
    #[arg(long, conflicts_with = "reference_e0")]
    oracle: bool,
    #[command(flatten)]
    flags: AnnealFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClampKind {
    Fold,
    Bias,
}

#[derive(Args)]
struct FactorCmd {
    product: u64,
    #[arg(long)]
    bits_a: Option<usize>,
    #[arg(long)]
    bits_b: Option<usize>,
    /// Use ceil(bitlen(P)/2) bits for both factors
    #[arg(long, conflicts_with_all = ["bits_a", "bits_b"])]
    balanced: bool,
    #[arg(long, value_enum, default_value = "fold")]
    clamp: ClampKind,
    #[arg(long, default_value_t = 1.1)]
    bias_strength: f64,
    #[arg(long)]
    chains: bool,
    #[command(flatten)]
    flags: AnnealFlags,
}

#[derive(Args)]
struct MultiplyCmd {
    m: u64,
    n: u64,
    #[arg(long)]
    bits_a: Option<usize>,
    #[arg(long)]
    bits_b: Option<usize>,
    #[command(flatten)]
    flags: AnnealFlags,
}

#[derive(Args)]
struct VerifyCmd {
    model: PathBuf,
    #[arg(long)]
    ports: Option<PathBuf>,
    /// Compare the ground manifold on the ports with a shipped gate
    #[arg(long, value_enum, requires = "ports")]
    gate: Option<GateKind>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Control,
    Direct,
}

#[derive(Subcommand)]
enum CircuitAction {
    /// Inverse NOR with the output held at --clamp
    NorInverse {
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        clamp: u8,
        #[arg(long, default_value_t = 200)]
        shots: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        ramp_ns: f64,
        #[arg(long, default_value_t = 50.0)]
        dt_fs: f64,
        /// Noise standard deviation in microamperes
        #[arg(long, default_value_t = 0.13)]
        noise_sigma: f64,
        #[arg(long, value_enum, default_value = "control")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1.1)]
        strength: f64,
        /// Write `t,Iq_1..Iq_n` traces of every shot to this directory
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        decimate: usize,
        /// Exit with the verification code if any shot breaks the NOR relation
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args)]
struct CapacityCmd {
    #[arg(long, default_value_t = 515.0)]
    unit_width_um: f64,
    #[arg(long, default_value_t = 530.0)]
    unit_height_um: f64,
    #[arg(long, default_value_t = 19.0)]
    chip_mm: f64,
    #[arg(long, default_value_t = 200.0)]
    margin_um: f64,
    #[arg(long, default_value_t = 100)]
    chips: u64,
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn read_model(path: &Path) -> Result<IsingModel, Failure> {
    parse_model(&read_file(path)?).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn bitlen(v: u64) -> usize {
    (64 - v.leading_zeros() as usize).max(1)
}

fn gate_model(kind: GateKind) -> Result<(IsingModel, BTreeMap<String, usize>), Failure> {
    Ok(match kind {
        GateKind::Nor => {
            let g = nor_gate();
            (g.model, g.ports)
        }
        GateKind::And => {
            let g = and_gate();
            (g.model, g.ports)
        }
        GateKind::HalfAdder => {
            let h = half_adder();
            (h.model, h.ports)
        }
        GateKind::MultUnit => {
            let g = synthesize_mult_unit(1.0, 2.0)?;
            let report = verify_gate(&g);
            if !report.pass {
                return Err(Failure::new(EXIT_VERIFY, "synthesized unit failed verification"));
            }
            eprintln!("verified: E0 {} gap {:?}", report.e0, report.achieved_gap);
            (g.model, g.ports)
        }
    })
}

fn cmd_gates_emit(kind: GateKind, out: Option<PathBuf>) -> CmdResult {
    let (model, ports) = gate_model(kind)?;
    let text = write_model(&model);
    print!("{text}");
    if let Some(prefix) = out {
        write_file(&with_ext(&prefix, "ising"), &text)?;
        write_file(&with_ext(&prefix, "ports"), &write_ports(&ports))?;
    }
    Ok(())
}

fn cmd_synth_mult(
    bits_a: usize,
    bits_b: usize,
    chains: bool,
    chain_strength: f64,
    out: Option<PathBuf>,
) -> CmdResult {
    let net = MultiplierNetwork::build(
        bits_a,
        bits_b,
        NetworkOptions {
            interconnect_chains: chains,
            chain_strength,
        },
    )?;
    println!("cells {}", bits_a * bits_b);
    println!("qubits {}", net.qubit_count());
    println!("chain_qubits {}", net.chain_qubits);
    println!("boundary_zero_inputs {}", net.zero_inputs.len());
    println!("expected_e0 {}", net.expected_e0);
    if let Some(prefix) = out {
        let mut model = format!("# boundary inputs fixed to 0: {:?}\n", net.zero_inputs);
        model.push_str(&write_model(&net.model));
        write_file(&with_ext(&prefix, "ising"), &model)?;
        write_file(&with_ext(&prefix, "roles"), &write_roles(&net.role_table()))?;
    }
    Ok(())
}

fn cmd_anneal(cmd: AnnealCmd) -> CmdResult {
    let model = read_model(&cmd.model)?;
    let schedule = cmd.flags.schedule()?;
    let reference = if cmd.oracle {
        Some(model.brute_force_ground()?.e0)
    } else {
        cmd.reference_e0
    };
    println!("seed {}", cmd.flags.seed);
    let shots = run_shots(&model, &schedule, cmd.flags.shots, cmd.flags.seed)?;
    let summary = RunSummary::by_bits(&shots, cmd.flags.seed, reference);
    print!("{}", summary.to_text());
    if let Some(path) = &cmd.flags.csv {
        write_file(path, &shots_csv(&shots, reference, &[], |_| Vec::new()))?;
    }
    Ok(())
}

fn cmd_factor(cmd: FactorCmd) -> CmdResult {
    let p = cmd.product;
    let (n1, n2) = if cmd.balanced {
        let w = bitlen(p).div_ceil(2);
        (w, w)
    } else {
        (cmd.bits_a.unwrap_or(bitlen(p)), cmd.bits_b.unwrap_or(bitlen(p)))
    };
    let net = MultiplierNetwork::build(
        n1,
        n2,
        NetworkOptions {
            interconnect_chains: cmd.chains,
            ..Default::default()
        },
    )?;
    let method = match cmd.clamp {
        ClampKind::Fold => ProductClamp::Fold,
        ClampKind::Bias => ProductClamp::Bias(cmd.bias_strength),
    };
    let problem = net.clamp_product(p, method)?;
    let schedule = cmd.flags.schedule()?;
    let e0 = problem.reference_e0(&net);
    println!("seed {}", cmd.flags.seed);
    println!("network {n1}x{n2} qubits {} free {}", net.qubit_count(), problem.model().n());
    let shots = run_shots(problem.model(), &schedule, cmd.flags.shots, cmd.flags.seed)?;
    let decode = |s: &qafactor::anneal::ShotResult| {
        net.decode(&problem.expand(&s.state).expect("reduced state has the right size"))
            .expect("expanded state has the network size")
    };
    let summary = RunSummary::from_shots(&shots, cmd.flags.seed, Some(e0), |s| {
        let o = decode(s);
        format!("({},{})", o.m, o.n)
    });
    let ground = RunSummary::from_shots(
        &shots
            .iter()
            .filter(|s| s.energy <= e0 + 1e-9)
            .cloned()
            .collect::<Vec<_>>(),
        cmd.flags.seed,
        Some(e0),
        |s| {
            let o = decode(s);
            format!("({},{})", o.m, o.n)
        },
    );
    print!("{}", summary.to_text());
    println!("ground-hit factor pairs:");
    if ground.shots > 0 {
        print!("{}", summarize_table(&ground, "count"));
    }
    if let Some(path) = &cmd.flags.csv {
        let csv = shots_csv(&shots, Some(e0), &["M", "N", "P"], |s| {
            let o = decode(s);
            vec![o.m.to_string(), o.n.to_string(), o.p.to_string()]
        });
        write_file(path, &csv)?;
    }
    Ok(())
}

fn cmd_multiply(cmd: MultiplyCmd) -> CmdResult {
    let n1 = cmd.bits_a.unwrap_or(bitlen(cmd.m));
    let n2 = cmd.bits_b.unwrap_or(bitlen(cmd.n));
    let net = MultiplierNetwork::build(n1, n2, NetworkOptions::default())?;
    let problem = net.clamp_factors(cmd.m, cmd.n)?;
    let schedule = cmd.flags.schedule()?;
    let e0 = problem.reference_e0(&net);
    println!("seed {}", cmd.flags.seed);
    let shots = run_shots(problem.model(), &schedule, cmd.flags.shots, cmd.flags.seed)?;
    let best = shots
        .iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy).then(a.shot.cmp(&b.shot)))
        .expect("at least one shot");
    let out = net.decode(&problem.expand(&best.state)?)?;
    let summary = RunSummary::from_shots(&shots, cmd.flags.seed, Some(e0), |s| {
        net.decode(&problem.expand(&s.state).unwrap()).unwrap().p.to_string()
    });
    println!("product {}", out.p);
    println!("ground_reached {}", best.energy <= e0 + 1e-9);
    print!("{}", summary.to_text());
    if let Some(path) = &cmd.flags.csv {
        let csv = shots_csv(&shots, Some(e0), &["M", "N", "P"], |s| {
            let o = net.decode(&problem.expand(&s.state).unwrap()).unwrap();
            vec![o.m.to_string(), o.n.to_string(), o.p.to_string()]
        });
        write_file(path, &csv)?;
    }
    Ok(())
}

/// Ground states projected onto the ports, in port-name order.
fn port_manifold(
    model: &IsingModel,
    ports: &BTreeMap<String, usize>,
) -> Result<BTreeSet<Vec<bool>>, Failure> {
    let g = model.brute_force_ground()?;
    Ok(g
        .ground_states
        .iter()
        .map(|s| ports.values().map(|&i| s.bit(i)).collect())
        .collect())
}

fn cmd_verify(cmd: VerifyCmd) -> CmdResult {
    let model = read_model(&cmd.model)?;
    let report = model.brute_force_ground()?;
    println!("spins {}", model.n());
    println!("e0 {}", report.e0);
    println!("ground_states {}", report.ground_states.len());
    match report.gap {
        Some(g) => println!("gap {g}"),
        None => println!("gap none"),
    }
    let ports = match &cmd.ports {
        Some(path) => Some(parse_ports(&read_file(path)?).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))?),
        None => None,
    };
    if let Some(ports) = &ports {
        if let Some((name, &i)) = ports.iter().find(|(_, &i)| i >= model.n()) {
            return Err(Failure::new(EXIT_DATA, format!("port {name} points at spin {i} outside the model")));
        }
        let names: Vec<&str> = ports.keys().map(String::as_str).collect();
        println!("ports {}", names.join(" "));
        for row in port_manifold(&model, ports)? {
            let bits: String = row.iter().map(|&b| if b { '1' } else { '0' }).collect();
            println!("ground {bits}");
        }
    }
    if let (Some(kind), Some(ports)) = (cmd.gate, &ports) {
        let (ref_model, ref_ports) = gate_model(kind)?;
        if ref_ports.keys().ne(ports.keys()) {
            return Err(Failure::new(EXIT_VERIFY, "port names differ from the reference gate"));
        }
        if port_manifold(&ref_model, &ref_ports)? != port_manifold(&model, ports)? {
            println!("verdict fail");
            return Err(Failure::new(EXIT_VERIFY, "ground manifold differs from the reference gate"));
        }
        println!("verdict pass");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_nor_inverse(
    clamp: u8,
    shots: usize,
    seed: u64,
    ramp_ns: f64,
    dt_fs: f64,
    noise_sigma: f64,
    mode: ModeArg,
    strength: f64,
    trace: Option<PathBuf>,
    decimate: usize,
    strict: bool,
) -> CmdResult {
    let clamp = clamp == 1;
    let mode = match mode {
        ModeArg::Control => ClampMode::ControlQubit,
        ModeArg::Direct => ClampMode::DirectBias,
    };
    let layout = nor_inverse_layout(clamp, mode, strength)?;
    let noise = NoiseSpec {
        sigma: noise_sigma * 1e-6,
        ..Default::default()
    };
    let ramp = Ramp {
        duration: ramp_ns * 1e-9,
        ..Default::default()
    };
    let opts = SimOptions {
        dt: dt_fs * 1e-15,
        decimate: None,
    };
    println!("seed {seed}");
    let ensemble = run_ensemble(&layout, &noise, &ramp, &opts, shots, seed)?;
    let counts = input_counts(&ensemble);
    println!("outcome\tout={}", u8::from(clamp));
    for label in INPUT_LABELS {
        println!("{label}\t{}", counts.get(label).copied().unwrap_or(0));
    }
    let invalid = ensemble.bits.iter().filter(|b| !nor_shot_valid(b, clamp)).count();
    println!("invalid {invalid}");
    if let Some(dir) = trace {
        fs::create_dir_all(&dir).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", dir.display())))?;
        let opts = SimOptions {
            decimate: Some(decimate.max(1)),
            ..opts
        };
        for k in 0..shots as u64 {
            let t = simulate_shot(&layout, &noise, &ramp, &opts, qafactor::anneal::derive_seed(seed, k))?;
            write_file(&dir.join(format!("shot_{k:04}.csv")), &t.to_csv())?;
        }
    }
    if strict && invalid > 0 {
        return Err(Failure::new(EXIT_VERIFY, format!("{invalid} shots broke the NOR relation")));
    }
    Ok(())
}

fn cmd_capacity(cmd: CapacityCmd) -> CmdResult {
    let r = estimate(&CapacityInput {
        unit_width_um: cmd.unit_width_um,
        unit_height_um: cmd.unit_height_um,
        chip_edge_mm: cmd.chip_mm,
        margin_um: cmd.margin_um,
        chips: cmd.chips,
    })?;
    println!("units_across {}", r.units_across);
    println!("units_down {}", r.units_down);
    println!("array {0}x{0}", r.side);
    println!("units_per_chip {}", r.units_per_chip);
    println!("total_units {}", r.total_units);
    println!("max_bits {}", r.max_bits);
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Gates {
            action: GatesAction::Emit { kind, out },
        } => cmd_gates_emit(kind, out),
        Command::Synth {
            action:
                SynthAction::Mult {
                    bits_a,
                    bits_b,
                    chains,
                    chain_strength,
                    out,
                },
        } => cmd_synth_mult(bits_a, bits_b, chains, chain_strength, out),
        Command::Anneal(c) => cmd_anneal(c),
        Command::Factor(c) => cmd_factor(c),
        Command::Multiply(c) => cmd_multiply(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Circuit {
            action:
                CircuitAction::NorInverse {
                    clamp,
                    shots,
                    seed,
                    ramp_ns,
                    dt_fs,
                    noise_sigma,
                    mode,
                    strength,
                    trace,
                    decimate,
                    strict,
                },
        } => cmd_nor_inverse(
            clamp, shots, seed, ramp_ns, dt_fs, noise_sigma, mode, strength, trace, decimate, strict,
        ),
        Command::Capacity(c) => cmd_capacity(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
