use gamefibers::document::{parse_game, write_game};
use gamefibers::equilibrium::{is_equilibrium, nash_map, support_enumeration_2p};
use gamefibers::fiber::{fiber_report, generic_rank, payoff_jacobian, trace_fiber, TraceConfig};
use gamefibers::generate::gen_random;
use gamefibers::linalg::subspace_distance;
use gamefibers::linear::{affine_level_set, extract_affine, test_joint_affinity};
use gamefibers::payoff::{is_zero_sum, payoff_at_reduced, total_payoff};
use gamefibers::profile::project_to_simplex;
use gamefibers::sampling::{random_profile, seeded_rng, uniform_simplex};
use gamefibers::{GameSpec, StrategyProfile};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=4, 2..=3)
}

fn game(zero_sum: bool, affine: bool) -> impl Strategy<Value = GameSpec> {
    (shape(), any::<u64>()).prop_map(move |(counts, seed)| {
        gen_random(counts.len(), &counts, seed, zero_sum, affine).unwrap()
    })
}

/// A game together with a seeded profile on its strategy space.
fn game_and_profile(
    zero_sum: bool,
    affine: bool,
) -> impl Strategy<Value = (GameSpec, StrategyProfile)> {
    (game(zero_sum, affine), any::<u64>()).prop_map(|(g, seed)| {
        let s = random_profile(&mut seeded_rng(seed), g.strategy_counts());
        (g, s)
    })
}

/// Textbook expected payoff: sum over every pure profile of its
/// probability times the payoff there.
fn literal_payoff(g: &GameSpec, s: &StrategyProfile) -> Vec<f64> {
    let mut total = vec![0.0; g.players()];
    let mut profile = vec![0usize; g.players()];
    loop {
        let prob: f64 = profile
            .iter()
            .enumerate()
            .map(|(i, &j)| s.block(i)[j])
            .product();
        for (t, v) in total.iter_mut().zip(g.payoff(&profile).unwrap()) {
            *t += prob * v;
        }
        let mut p = g.players();
        loop {
            if p == 0 {
                return total;
            }
            p -= 1;
            profile[p] += 1;
            if profile[p] < g.strategy_counts()[p] {
                break;
            }
            profile[p] = 0;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn payoff_matches_literal_sum((g, s) in game_and_profile(false, false)) {
        let fast = total_payoff(&g, &s).unwrap();
        for (a, b) in fast.values().iter().zip(literal_payoff(&g, &s)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn payoff_is_linear_in_each_block(
        (g, s) in game_and_profile(false, false),
        seed in any::<u64>(),
        alpha in 0.0f64..=1.0,
    ) {
        let mut rng = seeded_rng(seed);
        for player in 0..g.players() {
            let m = g.strategy_counts()[player];
            let (a, b) = (uniform_simplex(&mut rng, m), uniform_simplex(&mut rng, m));
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
            let at = |sigma: &[f64]| total_payoff(&g, &s.unilateral_replace(player, sigma).unwrap()).unwrap();
            let (pa, pb, pm) = (at(&a), at(&b), at(&mix));
            for i in 0..g.players() {
                let expected = alpha * pa.values()[i] + (1.0 - alpha) * pb.values()[i];
                prop_assert!((pm.values()[i] - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_sum_holds_at_every_profile((g, s) in game_and_profile(true, false)) {
        prop_assert!(is_zero_sum(&g, 1e-12));
        prop_assert!(total_payoff(&g, &s).unwrap().sum().abs() <= 1e-12);
    }

    #[test]
    fn pure_profiles_reproduce_the_table(g in game(false, false)) {
        for profile in g.profiles() {
            let s = StrategyProfile::pure(g.strategy_counts(), &profile).unwrap();
            let value = total_payoff(&g, &s).unwrap();
            prop_assert_eq!(value.values(), g.payoff(&profile).unwrap());
        }
    }

    #[test]
    fn documents_round_trip(g in game(false, false)) {
        let text = write_game(&g);
        let back = parse_game(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(write_game(&back), text);
    }

    #[test]
    fn reduce_then_embed_is_identity((g, s) in game_and_profile(false, false)) {
        let back = s.reduce().embed(&g).unwrap();
        prop_assert!(back.max_abs_diff(&s) <= 1e-15);
    }

    #[test]
    fn tolerance_renormalizes_small_errors_only(seed in any::<u64>(), m in 2usize..6, err in -1e-6f64..1e-6) {
        let mut block = uniform_simplex(&mut seeded_rng(seed), m);
        block[0] += err;
        let accepted = StrategyProfile::with_tolerance(vec![block.clone()], 1e-9);
        if err.abs() <= 5e-10 {
            let s = accepted.unwrap();
            prop_assert!((s.block(0).iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        } else if err.abs() > 2e-9 {
            prop_assert!(accepted.is_err());
        }
    }

    #[test]
    fn projection_lands_on_simplex_and_is_nearest(v in prop::collection::vec(-2.0f64..2.0, 1..6), seed in any::<u64>()) {
        let p = project_to_simplex(&v).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let dist = |q: &[f64]| q.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut rng = seeded_rng(seed);
        for _ in 0..20 {
            let q = uniform_simplex(&mut rng, v.len());
            prop_assert!(dist(&p) <= dist(&q) + 1e-12);
        }
    }

    #[test]
    fn rank_plus_nullity_is_reduced_dimension((g, s) in game_and_profile(false, false)) {
        prop_assume!(s.min_entry() >= 1e-6);
        let report = fiber_report(&g, &s, 0).unwrap();
        prop_assert_eq!(report.jacobian_rank + report.fiber_dimension(), g.reduced_dim());
        prop_assert!(report.jacobian_rank <= g.players());
    }

    #[test]
    fn generated_affine_games_are_affine(g in game(false, true)) {
        prop_assert!(test_joint_affinity(&g, 1e-12));
    }

    #[test]
    fn affine_representation_matches_payoffs((g, s) in game_and_profile(false, true)) {
        let rep = extract_affine(&g, false).unwrap();
        let r = s.reduce();
        let direct = total_payoff(&g, &s).unwrap();
        for (a, b) in rep.evaluate(r.coords()).iter().zip(direct.values()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn linear_and_local_analyses_agree((g, s) in game_and_profile(false, true)) {
        prop_assume!(s.min_entry() >= 1e-6);
        let rep = extract_affine(&g, false).unwrap();
        prop_assert_eq!(generic_rank(&g, 16, 0), rep.rank());
        let report = fiber_report(&g, &s, rep.rank()).unwrap();
        let payoff = total_payoff(&g, &s).unwrap();
        let set = affine_level_set(&rep, payoff.values()).unwrap();
        let set = set.affine().expect("level set through a profile is non-empty");
        prop_assert_eq!(set.dimension, report.fiber_dimension());
        prop_assert!(subspace_distance(&set.kernel_basis, &report.nullspace_basis) <= 1e-8);
        prop_assert!(subspace_distance(&report.nullspace_basis, &set.kernel_basis) <= 1e-8);
    }

    #[test]
    fn zero_sum_generic_rank_is_below_player_count(g in game(true, false)) {
        prop_assert!(generic_rank(&g, 16, 1) < g.players());
    }

    #[test]
    fn traced_points_stay_on_the_level_set((g, s) in game_and_profile(false, false), step in 0.005f64..0.05) {
        prop_assume!(s.min_entry() >= 0.02);
        let k = generic_rank(&g, 16, 2);
        let report = fiber_report(&g, &s, k).unwrap();
        prop_assume!(report.regular && report.fiber_dimension() > 0);
        let config = TraceConfig { step, max_steps: 30, tol: 1e-10, generic_rank: Some(k), ..TraceConfig::default() };
        let path = trace_fiber(&g, &s, &config).unwrap();
        for p in &path.points {
            let value = payoff_at_reduced(&g, p.coords()).unwrap();
            prop_assert!(value.max_abs_diff(path.target_payoff.values()) <= 1e-10);
        }
        prop_assert!(path.max_payoff_drift <= 1e-10);
    }

    #[test]
    fn equilibria_are_nash_map_fixed_points(counts in prop::collection::vec(2usize..=3, 2), seed in any::<u64>()) {
        let g = gen_random(2, &counts, seed, false, false).unwrap();
        for report in support_enumeration_2p(&g, 1e-9).unwrap() {
            prop_assert!(report.converged);
            prop_assert!(nash_map(&g, &report.profile).unwrap().max_abs_diff(&report.profile) <= 1e-9);
        }
    }

    #[test]
    fn moving_profiles_are_not_equilibria((g, s) in game_and_profile(false, false)) {
        let image = nash_map(&g, &s).unwrap();
        let report = is_equilibrium(&g, &s, 1e-9).unwrap();
        if image.max_abs_diff(&s) > 1e-9 {
            prop_assert!(!report.converged);
        }
    }
}

#[test]
fn jacobian_matches_finite_differences_on_seeded_games() {
    let mut rng = seeded_rng(17);
    for seed in 0..50 {
        let counts = [2 + seed as usize % 3, 3, 2];
        let g = gen_random(3, &counts, seed, seed % 2 == 0, false).unwrap();
        let s = random_profile(&mut rng, &counts);
        let jac = payoff_jacobian(&g, &s).unwrap();
        let r = s.reduce().0;
        let h = 1e-5;
        for c in 0..r.len() {
            let (mut plus, mut minus) = (r.clone(), r.clone());
            plus[c] += h;
            minus[c] -= h;
            let fp = payoff_at_reduced(&g, &plus).unwrap();
            let fm = payoff_at_reduced(&g, &minus).unwrap();
            for i in 0..3 {
                let fd = (fp.values()[i] - fm.values()[i]) / (2.0 * h);
                assert!(
                    (fd - jac[(i, c)]).abs() <= 1e-6,
                    "seed {seed} entry ({i}, {c})"
                );
            }
        }
    }
}
