mod common;

use rand::Rng;
use sagnn::graph::{ConflictGraph, ShiftOperator};
use sagnn::policy::{
    adam_step, forward, lagrangian_value_and_grad, load_params, load_params_expecting, save_params, AdamState,
    ArchConfig, Direction, ParamGrads, Phase, PolicyParameters,
};
use sagnn::schedule::Requirements;
use sagnn::Error;

/// Relative error used for gradient checks: `|a − n| / max(|a|, |n|, 1e-3)`.
/// The floor turns the test into an absolute one for tiny coordinates, where
/// finite differences only carry rounding noise.
fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

fn randomize_norm(params: &mut PolicyParameters, rng: &mut impl Rng) {
    for l in &mut params.layers {
        l.gamma.mapv_inplace(|_| rng.random_range(0.5..1.5));
        l.beta.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        l.running_mean.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        l.running_var.mapv_inplace(|_| rng.random_range(0.5..2.0));
    }
    params.output_bias = rng.random_range(-0.5..0.5);
}

fn check_gradient(arch: &ArchConfig, graphs: usize, per_group: usize, seed: u64) -> (f64, usize) {
    let h = 1e-5;
    let mut rng = common::rng(seed);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for gi in 0..graphs {
        let k = rng.random_range(8..=20);
        let g = common::random_graph(k, 0.3, &mut rng);
        let lambda: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0)).collect();
        let req = Requirements::uniform(k, rng.random_range(0.0..0.3)).unwrap();
        let mut params = PolicyParameters::init(arch, seed * 100 + gi as u64).unwrap();
        randomize_norm(&mut params, &mut rng);

        let (_, grads, _) = lagrangian_value_and_grad(&g, &lambda, &req, &params).unwrap();
        let groups: Vec<Vec<f64>> = grads.groups().iter().map(|s| s.to_vec()).collect();
        for (gid, analytic) in groups.iter().enumerate() {
            for _ in 0..per_group.min(analytic.len()) {
                let idx = rng.random_range(0..analytic.len());
                let value_at = |delta: f64| {
                    let mut p = params.clone();
                    p.learnable_mut()[gid][idx] += delta;
                    lagrangian_value_and_grad(&g, &lambda, &req, &p).unwrap().0
                };
                let numeric = (value_at(h) - value_at(-h)) / (2.0 * h);
                worst = worst.max(rel_err(analytic[idx], numeric));
                checked += 1;
            }
        }
    }
    (worst, checked)
}

#[test]
fn gradient_matches_finite_differences() {
    let arch = ArchConfig {
        features: 8,
        ..ArchConfig::default()
    };
    let (worst, checked) = check_gradient(&arch, 5, 3, 7);
    assert!(checked >= 100, "{checked}");
    assert!(worst < 1e-4, "worst relative error {worst}");
}

#[test]
fn gradient_matches_with_raw_adjacency() {
    let arch = ArchConfig {
        features: 6,
        layers: 2,
        operator: ShiftOperator::Adjacency,
        ..ArchConfig::default()
    };
    let (worst, _) = check_gradient(&arch, 3, 4, 11);
    assert!(worst < 1e-4, "worst relative error {worst}");
}

fn assert_equivariant(phase: Phase, seed: u64) {
    let mut rng = common::rng(seed);
    let arch = ArchConfig {
        features: 16,
        ..ArchConfig::default()
    };
    let mut params = PolicyParameters::init(&arch, seed).unwrap();
    randomize_norm(&mut params, &mut rng);
    let k = 25;
    let g = common::random_graph(k, 0.2, &mut rng);
    let lambda: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..3.0)).collect();
    let (out, _) = forward(&g, &lambda, &params, phase).unwrap();
    for _ in 0..20 {
        let perm = common::random_permutation(k, &mut rng);
        let pg = g.permuted(&perm).unwrap();
        let mut pl = vec![0.0; k];
        for i in 0..k {
            pl[perm[i]] = lambda[i];
        }
        let (pout, _) = forward(&pg, &pl, &params, phase).unwrap();
        for i in 0..k {
            assert!((pout[perm[i]] - out[i]).abs() < 1e-10);
        }
    }
}

#[test]
fn forward_is_permutation_equivariant() {
    assert_equivariant(Phase::Eval, 3);
    assert_equivariant(Phase::Train, 4);
}

#[test]
fn adam_follows_reference_trace() {
    // Scalar ascent with lr 0.01 from 0.3, gradients 0.5, −0.2, 1, 0, 3.
    let expected = [
        0.3099999998,
        0.3134560581883489,
        0.3203474391023335,
        0.32599243900626024,
        0.3327823179404018,
    ];
    let arch = ArchConfig {
        layers: 1,
        features: 1,
        order: 0,
        ..ArchConfig::default()
    };
    let mut params = PolicyParameters::zeros(&arch).unwrap();
    for g in params.learnable_mut() {
        g.fill(0.3);
    }
    let mut state = AdamState::new(&params);
    for (t, g) in [0.5, -0.2, 1.0, 0.0, 3.0].into_iter().enumerate() {
        let mut grads = ParamGrads::zeros_like(&params);
        grads.layers[0].taps.fill(g);
        grads.layers[0].gamma.fill(g);
        grads.layers[0].beta.fill(g);
        grads.output_weight.fill(g);
        grads.output_bias = g;
        adam_step(&mut params, &grads, &mut state, 0.01, Direction::Ascent).unwrap();
        for group in params.learnable_mut() {
            assert!((group[0] - expected[t]).abs() < 1e-12, "step {}: {}", t + 1, group[0]);
        }
    }
}

#[test]
fn adam_descent_mirrors_ascent() {
    let arch = ArchConfig {
        features: 4,
        layers: 2,
        ..ArchConfig::default()
    };
    let base = PolicyParameters::init(&arch, 1).unwrap();
    let mut grads = ParamGrads::zeros_like(&base);
    grads.output_weight.fill(0.7);
    let (mut up, mut down) = (base.clone(), base.clone());
    adam_step(&mut up, &grads, &mut AdamState::new(&base), 0.1, Direction::Ascent).unwrap();
    adam_step(&mut down, &grads, &mut AdamState::new(&base), 0.1, Direction::Descent).unwrap();
    for i in 0..4 {
        let b = base.output_weight[i];
        assert!(((up.output_weight[i] - b) + (down.output_weight[i] - b)).abs() < 1e-15);
    }
}

#[test]
fn checkpoints_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = common::rng(5);
    let arch = ArchConfig {
        features: 12,
        ..ArchConfig::default()
    };
    let mut params = PolicyParameters::init(&arch, 9).unwrap();
    randomize_norm(&mut params, &mut rng);
    let path = dir.path().join("p.json");
    save_params(&path, &params).unwrap();
    let back = load_params(&path).unwrap();
    assert_eq!(back, params);

    let g = ConflictGraph::from_edges(3, [(0, 1), (1, 2)], 0).unwrap();
    let l = [0.3, 1.1, 0.0];
    assert_eq!(forward(&g, &l, &back, Phase::Eval).unwrap().0, forward(&g, &l, &params, Phase::Eval).unwrap().0);

    let other = ArchConfig {
        order: 2,
        ..arch.clone()
    };
    match load_params_expecting(&path, &other) {
        Err(Error::ArchMismatch(m)) => assert!(m.contains("order"), "{m}"),
        r => panic!("expected mismatch, got {r:?}"),
    }
}

#[test]
fn training_phase_ignores_running_statistics() {
    let mut rng = common::rng(6);
    let arch = ArchConfig {
        features: 8,
        ..ArchConfig::default()
    };
    let params = PolicyParameters::init(&arch, 2).unwrap();
    let mut shifted = params.clone();
    randomize_norm(&mut shifted, &mut rng);
    for (a, b) in shifted.layers.iter_mut().zip(&params.layers) {
        a.gamma = b.gamma.clone();
        a.beta = b.beta.clone();
    }
    shifted.output_bias = params.output_bias;
    let g = common::random_graph(10, 0.3, &mut rng);
    let l: Vec<f64> = (0..10).map(|i| i as f64 * 0.2).collect();
    assert_eq!(forward(&g, &l, &params, Phase::Train).unwrap().0, forward(&g, &l, &shifted, Phase::Train).unwrap().0);
    assert_ne!(forward(&g, &l, &params, Phase::Eval).unwrap().0, forward(&g, &l, &shifted, Phase::Eval).unwrap().0);
}
