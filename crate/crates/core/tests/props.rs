//! Property tests: invariants that must hold on generated parameters,
//! not just on the worked examples.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ruin_lab_core::game::*;
use ruin_lab_core::tail;
use ruin_lab_core::walk::*;

fn arb_rule() -> impl Strategy<Value = Rule> {
    prop_oneof![Just(Rule::Local), Just(Rule::Semilocal)]
}

proptest! {
    #[test]
    fn game_rollout_invariants(
        seed in any::<u64>(),
        weights in prop::collection::vec(1u64..30, 2..6),
        c_inc in 1u64..12,
        c_dec in 1u64..3,
        rule in arb_rule(),
        steps in 1u64..400,
    ) {
        let mut config = GameConfig::with_weights(weights, c_inc, rule);
        config.c_dec = c_dec;
        let mut game = Game::new(config.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut alive_before = game.state.alive_count();
        for _ in 0..steps {
            if game.state.alive_count() == 0 {
                break;
            }
            game.step_random(&mut rng).unwrap();
            let s = &game.state;
            // Weight/alive coherence and the cached total.
            for i in 0..config.n {
                prop_assert_eq!(s.alive[i], s.weights[i] > 0);
            }
            prop_assert_eq!(s.total, s.weights.iter().sum::<u64>());
            // Bankrupt players never re-enter.
            prop_assert!(s.alive_count() <= alive_before);
            alive_before = s.alive_count();
            if rule == Rule::Semilocal {
                prop_assert!(s.total <= config.w0);
            }
        }
    }

    #[test]
    fn apply_step_purity(
        weights in prop::collection::vec(1u64..20, 2..5),
        c_inc in 1u64..8,
        winner in 0usize..5,
    ) {
        let config = GameConfig::with_weights(weights, c_inc, Rule::Local);
        let winner = winner % config.n;
        let state = init_game(&config).unwrap();
        let a = apply_step(&config, &state, winner).unwrap();
        let b = apply_step(&config, &state, winner).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn hit_probability_is_monotone_in_start(
        up in 1u64..5,
        num in 1u32..9,
        wall in 3u64..25,
    ) {
        let p = num as f64 / 10.0;
        let mut prev = 0.0;
        for start in 0..=wall {
            let spec = WalkSpec {
                up_step: up,
                up_prob: p,
                down_step: 1,
                start,
                wall: UpperWall { position: wall, kind: WallKind::Absorbing },
                note: None,
            };
            let h = exact_hit_probability(&spec).unwrap();
            prop_assert!((0.0..=1.0).contains(&h));
            prop_assert!(h >= prev - 1e-12);
            prev = h;
        }
    }

    #[test]
    fn passage_times_are_positive_and_consistent(
        up in 0u64..5,
        num in 1u32..9,
        wall in 2u64..20,
        kind in prop_oneof![Just(WallKind::Reflecting), Just(WallKind::SwapReflecting)],
    ) {
        let spec = WalkSpec {
            up_step: up,
            up_prob: num as f64 / 10.0,
            down_step: 1,
            start: wall,
            wall: UpperWall { position: wall, kind },
            note: None,
        };
        let e = solve_e_recurrence(&spec).unwrap();
        prop_assert!(e.residual < 1e-9);
        prop_assert!(e.e.iter().all(|&v| v >= 1.0 - 1e-12));
        // Passage decomposes over intermediate stops.
        if wall >= 4 {
            let whole = e.passage(wall, 0);
            let split = e.passage(wall, wall / 2) + e.passage(wall / 2, 0);
            prop_assert!((whole - split).abs() < 1e-9 * whole.max(1.0));
        }
    }

    #[test]
    fn binomial_tail_is_a_cdf(t in 1u64..150, n in 2u64..20) {
        let mut prev = 0.0;
        for s in 0..=t as i64 {
            let v = tail::binom_lower_tail(t, n, s).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v >= prev - 1e-14);
            prev = v;
        }
        prop_assert!((prev - 1.0).abs() < 1e-12);
    }
}
