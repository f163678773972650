use polyrange::environment::DisorderField;
use polyrange::exper::fit_exponent;
use polyrange::lattice::{ball_points, Point};
use polyrange::limits::{Atom, WeightedPointProcess};
use polyrange::lpp::{l_b, DEFAULT_EXACT_CAP};
use polyrange::params::{heuristic_orders, raw_regions};
use polyrange::partition::{log_partition_exact, two_site_log_partition, Coupling, Event};
use polyrange::rng::rng_from_seed;
use polyrange::variational::{solve_t_beta, SolveBudget};
use polyrange::walk::simulate_walk;
use polyrange::{classify_region, ModelParams, Region};
use proptest::prelude::*;
use rand::seq::index;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walk_range_bounds(seed in any::<u64>(), n in 1usize..400, d in 1usize..5) {
        let w = simulate_walk(&mut rng_from_seed(seed), n, d).unwrap();
        prop_assert!(w.range_size >= 2);
        prop_assert!(w.range_size <= n + 1);
        prop_assert!(w.max_disp <= n as f64);
        prop_assert!(w.range_size as f64 >= w.max_disp.ceil() + 1.0);
        prop_assert_eq!(w.sites.len(), w.range_size);
    }

    #[test]
    fn event_partition_functions_are_bounded(seed in 0u64..1000, n in 2usize..7, beta in 0.0f64..2.0, h in 0.0f64..2.0) {
        let field = DisorderField::new(seed, 1.5, 0.7).unwrap();
        let c = [Coupling::new(beta, h)];
        let all = log_partition_exact(&field, 2, n, &c, None).unwrap()[0];
        let three = log_partition_exact(&field, 2, n, &c, Some(&Event::RangeAtLeast(3))).unwrap()[0];
        let two = two_site_log_partition(&field, 2, n, c[0]);
        prop_assert!(all.is_finite());
        prop_assert!(three <= all + 1e-12);
        prop_assert!(two <= all + 1e-12);
        let sum = two.exp() + three.exp();
        prop_assert!((sum / all.exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classifier_agrees_with_raw_inequalities(zeta in -4.0f64..4.0, gamma in -2.0f64..5.0, case in 0usize..3) {
        let (d, alpha) = [(3usize, 2.0), (3, 1.25), (2, 1.5)][case];
        let rep = classify_region(&ModelParams::phase_point(d, alpha, zeta, gamma), false).unwrap();
        let raw = raw_regions(d, alpha, zeta, gamma);
        prop_assert!(raw.len() <= 1);
        match rep.region {
            Region::Boundary => {}
            Region::R5Unsolved => prop_assert_eq!(raw, vec![Region::R5]),
            r => prop_assert_eq!(raw, vec![r]),
        }
        if let Some(xi) = rep.xi {
            prop_assert!((0.0..=1.0).contains(&xi));
        }
    }

    #[test]
    fn heuristic_balances(zeta in -0.9f64..0.6, gamma in 0.0f64..4.0) {
        let p = ModelParams::phase_point(3, 2.0, zeta, gamma);
        let rep = classify_region(&p, false).unwrap();
        let Some(xi) = rep.xi else { return Ok(()) };
        let o = heuristic_orders(&p, xi).unwrap();
        match rep.region {
            Region::R5 => {
                prop_assert!((o.range_exp - o.entropy_exp).abs() < 1e-12);
                prop_assert!(o.energy_exp < o.range_exp);
            }
            Region::R2 => {
                prop_assert!((o.energy_exp - o.entropy_exp).abs() < 1e-12);
                prop_assert!(o.range_exp < o.energy_exp);
            }
            _ => {}
        }
    }

    #[test]
    fn t_beta_nonnegative_and_monotone(seed in any::<u64>(), n in 0usize..8) {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let atoms = (0..n)
            .map(|_| Atom { x: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], w: rng.random_range(-1.0..2.0) })
            .collect();
        let pp = WeightedPointProcess { d: 2, atoms, half_width: 1.0, w_min: 0.01, alpha: 1.5, p: 0.5, q: 0.5 };
        let mut prev = 0.0;
        for beta in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let v = solve_t_beta(&pp, beta, &SolveBudget::default()).unwrap().value;
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn l_b_monotone_in_budget_and_points(seed in any::<u64>(), b in 0.5f64..40.0, k in 2usize..9) {
        let ball = ball_points(2, 4.0);
        let mut rng = rng_from_seed(seed);
        let pts: Vec<Point> = index::sample(&mut rng, ball.len(), k).iter().map(|i| ball[i].clone()).collect();
        let full = l_b(&pts, b, 2, DEFAULT_EXACT_CAP).unwrap();
        prop_assert!(l_b(&pts, 2.0 * b, 2, DEFAULT_EXACT_CAP).unwrap() >= full);
        prop_assert!(l_b(&pts[..k - 1], b, 2, DEFAULT_EXACT_CAP).unwrap() <= full);
    }

    #[test]
    fn planted_power_laws(a in -2.0f64..2.0, c in 0.01f64..100.0) {
        let grid = [10.0, 20.0, 40.0, 80.0, 160.0];
        let vals: Vec<f64> = grid.iter().map(|n: &f64| c * n.powf(a)).collect();
        let f = fit_exponent(&grid, &vals, None, "planted").unwrap();
        prop_assert!((f.exponent - a).abs() < 1e-10);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-9);
    }
}
