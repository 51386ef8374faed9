mod common;

use proptest::prelude::*;
use sagnn::schedule::{
    objective, per_step_lagrangian, success_indicator, successful_transmissions, time_avg_success, violation_level,
    Requirements, Schedule,
};

#[test]
fn success_matches_neighbour_scan_for_every_schedule() {
    let mut rng = common::rng(1);
    for k in 1..=8 {
        let g = common::random_graph(k, 0.4, &mut rng);
        let adj = g.adjacency_matrix();
        for mask in 0..1u32 << k {
            let on = common::bits(mask, k);
            let s = Schedule::from_bools(on.iter().copied());
            let expect = common::oracle_successes(&adj, &on);
            assert_eq!(successful_transmissions(&g, &s).unwrap(), expect);
            assert_eq!(objective(&g, &s).unwrap(), expect.iter().sum::<f64>());
        }
    }
}

#[test]
fn indicator_is_one_exactly_when_no_neighbour_transmits() {
    let mut rng = common::rng(2);
    let g = common::random_graph(7, 0.5, &mut rng);
    for mask in 0..1u32 << 7 {
        let on = common::bits(mask, 7);
        let ind = success_indicator(&g, &Schedule::from_bools(on.iter().copied())).unwrap();
        for i in 0..7 {
            let quiet = g.neighbors(i).iter().all(|&j| !on[j]);
            assert_eq!(ind[i], if quiet { 1.0 } else { 0.0 });
        }
    }
}

proptest! {
    #[test]
    fn silencing_a_link_never_hurts_others(k in 2usize..12, p in 0.0f64..1.0, seed in any::<u64>(), mask in any::<u32>(), off in 0usize..12) {
        let mut rng = common::rng(seed);
        let g = common::random_graph(k, p, &mut rng);
        let on = common::bits(mask, k);
        let off = off % k;
        let mut quieter = on.clone();
        quieter[off] = false;
        let before = successful_transmissions(&g, &Schedule::from_bools(on)).unwrap();
        let after = successful_transmissions(&g, &Schedule::from_bools(quieter)).unwrap();
        for i in (0..k).filter(|&i| i != off) {
            prop_assert!(after[i] >= before[i]);
        }
    }

    #[test]
    fn lagrangian_is_affine_in_lambda(k in 1usize..12, seed in any::<u64>(), mask in any::<u32>(), t in 0.0f64..1.0) {
        let mut rng = common::rng(seed);
        let g = common::random_graph(k, 0.3, &mut rng);
        let s = Schedule::from_bools(common::bits(mask, k));
        let req = Requirements::uniform(k, 0.1).unwrap();
        let l1: Vec<f64> = (0..k).map(|i| (i % 3) as f64).collect();
        let l2: Vec<f64> = (0..k).map(|i| 0.5 + (i % 2) as f64).collect();
        let mix: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let v = |l: &[f64]| per_step_lagrangian(&g, &s, l, &req).unwrap();
        prop_assert!((v(&mix) - (t * v(&l1) + (1.0 - t) * v(&l2))).abs() < 1e-10);
        prop_assert_eq!(v(&vec![0.0; k]), objective(&g, &s).unwrap());
    }

    #[test]
    fn time_average_is_mean_of_steps(k in 1usize..10, seed in any::<u64>(), steps in 1usize..20) {
        let mut rng = common::rng(seed);
        let g = common::random_graph(k, 0.4, &mut rng);
        let schedules: Vec<Schedule> = (0..steps)
            .map(|_| Schedule::from_bools((0..k).map(|_| rand::Rng::random_bool(&mut rng, 0.5))))
            .collect();
        let avg = time_avg_success(&g, &schedules).unwrap();
        for i in 0..k {
            let count = schedules.iter().filter(|s| successful_transmissions(&g, s).unwrap()[i] == 1.0).count();
            prop_assert!((avg[i] - count as f64 / steps as f64).abs() < 1e-12);
        }
        let req = Requirements::uniform(k, 0.2).unwrap();
        for (lvl, a) in violation_level(&avg, &req).unwrap().iter().zip(&avg) {
            prop_assert!((lvl - (0.2 - a) / 0.2).abs() < 1e-12);
        }
    }
}
