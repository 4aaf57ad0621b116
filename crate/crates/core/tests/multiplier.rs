use std::collections::BTreeSet;

use qafactor::multiplier::{MultiplierNetwork, NetworkOptions, ProductClamp};

fn plain(n1: usize, n2: usize) -> MultiplierNetwork {
    MultiplierNetwork::build(n1, n2, NetworkOptions::default()).unwrap()
}

fn chained(n1: usize, n2: usize) -> MultiplierNetwork {
    MultiplierNetwork::build(
        n1,
        n2,
        NetworkOptions {
            interconnect_chains: true,
            ..Default::default()
        },
    )
    .unwrap()
}

/// All `(M, N)` pairs decoded from the ground manifold of a product-clamped network.
fn factor_set(net: &MultiplierNetwork, p: u64, method: ProductClamp) -> BTreeSet<(u64, u64)> {
    let problem = net.clamp_product(p, method).unwrap();
    let ground = problem.model().brute_force_ground().unwrap();
    assert!(
        (ground.e0 - problem.reference_e0(net)).abs() < 1e-9,
        "P={p}: e0 {} vs reference {}",
        ground.e0,
        problem.reference_e0(net)
    );
    ground
        .ground_states
        .iter()
        .map(|s| {
            let full = problem.expand(s).unwrap();
            let out = net.decode(&full).unwrap();
            (out.m, out.n)
        })
        .collect()
}

fn factor_pairs(p: u64, max_m: u64, max_n: u64) -> BTreeSet<(u64, u64)> {
    (0..=max_m)
        .flat_map(|m| (0..=max_n).map(move |n| (m, n)))
        .filter(|&(m, n)| m * n == p)
        .collect()
}

#[test]
fn unclamped_network_energy_matches_oracle() {
    for (n1, n2) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let net = plain(n1, n2);
        let free = net.clamp_none().unwrap();
        let ground = free.model().brute_force_ground().unwrap();
        assert!((ground.e0 + free.folded.offset - net.expected_e0).abs() < 1e-9);
        // Every input combination is a ground state, and each multiplies correctly.
        assert_eq!(ground.ground_states.len(), 1 << (n1 + n2));
        for s in &ground.ground_states {
            let out = net.decode(&free.expand(s).unwrap()).unwrap();
            assert!(out.is_ground);
            assert_eq!(out.p, out.m * out.n);
        }
    }
}

#[test]
fn forward_two_by_two_is_unique_and_correct() {
    let net = plain(2, 2);
    for m in 0..4 {
        for n in 0..4 {
            let problem = net.clamp_factors(m, n).unwrap();
            let ground = problem.model().brute_force_ground().unwrap();
            assert_eq!(ground.ground_states.len(), 1, "{m}x{n}");
            assert!((ground.e0 - problem.reference_e0(&net)).abs() < 1e-9);
            let out = net.decode(&problem.expand(&ground.ground_states[0]).unwrap()).unwrap();
            assert_eq!((out.m, out.n, out.p), (m, n, m * n));
            assert!(out.is_ground);
        }
    }
}

#[test]
fn forward_rectangular_networks() {
    for (n1, n2) in [(1, 3), (3, 1), (2, 3)] {
        let net = plain(n1, n2);
        for m in 0..1u64 << n1 {
            for n in 0..1u64 << n2 {
                let problem = net.clamp_factors(m, n).unwrap();
                let ground = problem.model().brute_force_ground().unwrap();
                assert_eq!(ground.ground_states.len(), 1);
                let out = net.decode(&problem.expand(&ground.ground_states[0]).unwrap()).unwrap();
                assert_eq!(out.p, m * n, "{n1}x{n2}: {m}*{n}");
            }
        }
    }
}

#[test]
fn inverse_is_sound_and_complete_on_two_by_two() {
    let net = plain(2, 2);
    for p in 0..16 {
        let want = factor_pairs(p, 3, 3);
        let problem = net.clamp_product(p, ProductClamp::Fold).unwrap();
        let ground = problem.model().brute_force_ground().unwrap();
        if want.is_empty() {
            // Unrepresentable products leave the clamp frustrated.
            assert!(ground.e0 > problem.reference_e0(&net) + 0.5, "P={p}");
            continue;
        }
        assert_eq!(factor_set(&net, p, ProductClamp::Fold), want, "P={p}");
    }
    assert!(factor_set(&net, 9, ProductClamp::Fold).contains(&(3, 3)));
}

#[test]
fn fold_and_bias_agree() {
    let net = plain(2, 2);
    for p in [0, 2, 4, 6, 9] {
        assert_eq!(
            factor_set(&net, p, ProductClamp::Fold),
            factor_set(&net, p, ProductClamp::Bias(1.1)),
            "P={p}"
        );
    }
}

#[test]
fn chains_are_transparent() {
    for (n1, n2) in [(1, 1), (1, 2), (2, 1)] {
        let a = plain(n1, n2);
        let b = chained(n1, n2);
        assert_eq!(b.qubit_count(), a.qubit_count() + b.chain_qubits);
        assert!((b.expected_e0 - (a.expected_e0 - b.chain_qubits as f64)).abs() < 1e-9);
        let fb = b.clamp_none().unwrap();
        let ground = fb.model().brute_force_ground().unwrap();
        assert!((ground.e0 + fb.folded.offset - b.expected_e0).abs() < 1e-9);
        for p in 0..1u64 << (n1 + n2) {
            if factor_pairs(p, (1 << n1) - 1, (1 << n2) - 1).is_empty() {
                continue;
            }
            assert_eq!(
                factor_set(&a, p, ProductClamp::Fold),
                factor_set(&b, p, ProductClamp::Fold)
            );
        }
    }
    // 2x2 with relays is too big for the oracle unclamped, but fits once the
    // product is folded out.
    let a = plain(2, 2);
    let b = chained(2, 2);
    assert_eq!(
        factor_set(&a, 6, ProductClamp::Fold),
        factor_set(&b, 6, ProductClamp::Fold)
    );
}

#[test]
fn chain_strength_scales_link_energy() {
    let net = MultiplierNetwork::build(
        1,
        2,
        NetworkOptions {
            interconnect_chains: false,
            chain_strength: 2.0,
        },
    )
    .unwrap();
    let free = net.clamp_none().unwrap();
    let ground = free.model().brute_force_ground().unwrap();
    assert!((ground.e0 + free.folded.offset - net.expected_e0).abs() < 1e-9);
    assert!((net.expected_e0 - (2.0 * net.unit_e0() - 2.0 * net.link_count as f64)).abs() < 1e-9);
}

#[test]
fn range_errors() {
    let net = plain(2, 2);
    assert!(net.clamp_factors(4, 0).is_err());
    assert!(net.clamp_factors(0, 4).is_err());
    assert!(net.clamp_product(16, ProductClamp::Fold).is_err());
    assert!(MultiplierNetwork::build(0, 2, NetworkOptions::default()).is_err());
}
