use std::collections::BTreeSet;

use qafactor::anneal::{run_shots, summarize_table, RunSummary, Schedule};
use qafactor::gates::nor_gate;
use qafactor::ising::{ClampAssignment, SpinState};
use qafactor::multiplier::{MultiplierNetwork, NetworkOptions, ProductClamp};

#[test]
fn nor_always_reaches_its_valid_set() {
    let nor = nor_gate();
    let shots = run_shots(&nor.model, &Schedule::default(), 100, 2024).unwrap();
    for s in &shots {
        assert_eq!(s.energy, -1.5);
        assert!(nor.valid.contains(&s.state.to_bits()));
    }
}

#[test]
fn clamped_nor_output_one_forces_zero_inputs() {
    let nor = nor_gate();
    let clamps: ClampAssignment = [(2, true)].into_iter().collect();
    let folded = nor.model.clamp_fold(&clamps).unwrap();
    let shots = run_shots(&folded.model, &Schedule::default(), 100, 7).unwrap();
    for s in &shots {
        assert_eq!(s.state.spins(), &[-1, -1]);
    }
}

#[test]
fn inverse_nor_covers_the_three_valid_inputs() {
    let nor = nor_gate();
    let clamps: ClampAssignment = [(2, false)].into_iter().collect();
    let folded = nor.model.clamp_fold(&clamps).unwrap();
    let shots = run_shots(&folded.model, &Schedule::default(), 200, 99).unwrap();
    let summary = RunSummary::by_bits(&shots, 99, Some(-1.5 - folded.offset));
    let support: BTreeSet<&str> = summary.histogram.keys().map(String::as_str).collect();
    assert_eq!(support, BTreeSet::from(["01", "10", "11"]));
    assert_eq!(summary.ground_hits, Some(200));
    let table = summarize_table(&summary, "out=0");
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn never_below_ground() {
    let net = MultiplierNetwork::build(2, 2, NetworkOptions::default()).unwrap();
    for p in [4, 6, 9] {
        let problem = net.clamp_product(p, ProductClamp::Fold).unwrap();
        let e0 = problem.model().brute_force_ground().unwrap().e0;
        let shots = run_shots(
            problem.model(),
            &Schedule {
                sweeps: 200,
                ..Default::default()
            },
            64,
            p,
        )
        .unwrap();
        for s in &shots {
            assert!(s.energy >= e0, "P={p}: {} < {e0}", s.energy);
            assert_eq!(s.energy, problem.model().energy(&s.state).unwrap());
        }
    }
}

#[test]
fn longer_schedules_do_not_lower_the_hit_rate() {
    let net = MultiplierNetwork::build(2, 2, NetworkOptions::default()).unwrap();
    let problem = net.clamp_product(6, ProductClamp::Fold).unwrap();
    let e0 = problem.reference_e0(&net);
    let rate = |sweeps| {
        let shots = run_shots(
            problem.model(),
            &Schedule {
                sweeps,
                ..Default::default()
            },
            400,
            5,
        )
        .unwrap();
        RunSummary::by_bits(&shots, 5, Some(e0)).ground_rate().unwrap()
    };
    let nor = nor_gate();
    let nor_rate = |sweeps| {
        let shots = run_shots(
            &nor.model,
            &Schedule {
                sweeps,
                ..Default::default()
            },
            400,
            5,
        )
        .unwrap();
        RunSummary::by_bits(&shots, 5, Some(-1.5)).ground_rate().unwrap()
    };
    assert!(nor_rate(2000) >= nor_rate(20));
    assert!(rate(2000) >= rate(20));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let net = MultiplierNetwork::build(3, 3, NetworkOptions::default()).unwrap();
    let problem = net.clamp_product(15, ProductClamp::Fold).unwrap();
    let schedule = Schedule {
        sweeps: 300,
        ..Default::default()
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let shots = pool.install(|| run_shots(problem.model(), &schedule, 64, 31).unwrap());
        RunSummary::by_bits(&shots, 31, None).to_text()
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(rayon::current_num_threads().max(2)));
    assert_eq!(one, run(1));
}

#[test]
fn state_bits_in_csv_match_spins() {
    let nor = nor_gate();
    let shots = run_shots(&nor.model, &Schedule::default(), 3, 0).unwrap();
    let csv = qafactor::anneal::shots_csv(&shots, Some(-1.5), &[], |_| vec![]);
    for (line, s) in csv.lines().skip(1).zip(&shots) {
        let bits = line.rsplit(',').next().unwrap();
        let parsed: Vec<bool> = bits.chars().map(|c| c == '1').collect();
        assert_eq!(SpinState::from_bits(&parsed), s.state);
    }
}
