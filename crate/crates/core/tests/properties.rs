use std::collections::VecDeque;

use ibl_delegate::gridworld::{add_error_states, generate_grid, ErrorTag, GameAction, GridSpec, Position};
use ibl_delegate::ibl::{base_level, retrieval_probabilities, IblMemory, IblParams, InstanceKey, InstanceRecord};
use ibl_delegate::io::{format_sig6, load_grid, save_grid};
use ibl_delegate::nav::{q_update, QParams, QTable};
use ibl_delegate::rng::rng_from_seed;
use proptest::prelude::*;

fn small_grid() -> impl Strategy<Value = GridSpec> {
    (2usize..8, 2usize..9, 0.0f64..0.6, any::<u64>()).prop_filter_map("unreachable", |(r, c, w, seed)| {
        generate_grid(r, c, w, Position::new(0, 0), Position::new(r - 1, c - 1), seed).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn probabilities_form_a_distribution(acts in prop::collection::vec(-60.0f64..60.0, 1..30), tau in 0.05f64..5.0) {
        let p = retrieval_probabilities(&acts, tau).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn probabilities_ignore_a_common_shift(acts in prop::collection::vec(-20.0f64..20.0, 1..12), shift in -100.0f64..100.0) {
        let tau = 0.25 * 2f64.sqrt();
        let shifted: Vec<f64> = acts.iter().map(|a| a + shift).collect();
        let (p, q) = (retrieval_probabilities(&acts, tau).unwrap(), retrieval_probabilities(&shifted, tau).unwrap());
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn blended_value_stays_within_outcomes(outcomes in prop::collection::vec(-250.0f64..100.0, 1..10), seed in any::<u64>(), wait in 1u64..50) {
        let mut m: IblMemory<u8, u8> = IblMemory::new(IblParams::standard());
        for x in &outcomes {
            let t = m.advance_clock();
            m.record_observation(InstanceKey { state: 0, action: 0, outcome: *x }, t).unwrap();
        }
        let (lo, hi) = outcomes.iter().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(*x), b.max(*x)));
        let v = m.blended_value(&0, &0, m.clock() + wait, &mut rng_from_seed(seed)).unwrap();
        prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
    }

    #[test]
    fn q_update_contracts(q in -200.0f64..200.0, r in -110.0f64..110.0, m in -200.0f64..200.0, alpha in 0.01f64..=1.0, gamma in 0.0f64..0.99) {
        let (s, s2) = (Position::new(1, 1), Position::new(1, 2));
        let mut t = QTable::new();
        t.set(s, GameAction::Left, q);
        for a in GameAction::ALL {
            t.set(s2, a, m);
        }
        let params = QParams { alpha, gamma, ..QParams::standard() };
        q_update(&mut t, s, GameAction::Left, r, s2, false, &params);
        let target = r + gamma * m;
        let lhs = (t.get(s, GameAction::Left) - target).abs();
        prop_assert!((lhs - (1.0 - alpha) * (q - target).abs()).abs() <= 1e-12);
    }

    #[test]
    fn steps_never_enter_walls(grid in small_grid(), r in 0usize..8, c in 0usize..9, a in 0usize..4) {
        let pos = Position::new(r % grid.rows, c % grid.cols);
        prop_assume!(grid.is_open(pos));
        let out = grid.step(pos, GameAction::ALL[a]);
        prop_assert!(grid.is_open(out.new_pos));
        prop_assert_eq!(out.collided, out.new_pos == pos);
    }

    #[test]
    fn generated_grids_are_connected_and_on_ratio(grid in small_grid()) {
        prop_assert!(grid.bfs_distances().get(grid.start).is_some());
        let eligible = (grid.rows * grid.cols - 2) as f64;
        prop_assert!((grid.walls.len() as f64 - grid.wall_ratio * eligible).abs() <= 1.0);
    }

    #[test]
    fn error_levels_nest(grid in small_grid(), seed in any::<u64>(), k in 1usize..4) {
        let types = ErrorTag::universe(2);
        let low = add_error_states(&grid, k, &types, seed);
        let high = add_error_states(&grid, k + 1, &types, seed);
        if let (Ok(low), Ok(high)) = (low, high) {
            prop_assert!(low.error_cells.iter().all(|(p, t)| high.error_cells.get(p) == Some(t)));
            prop_assert!(high.error_cells.keys().all(|p| grid.is_open(*p) && *p != grid.start && *p != grid.goal));
        }
    }

    #[test]
    fn grid_documents_round_trip(grid in small_grid(), seed in any::<u64>()) {
        let grid = add_error_states(&grid, 1, &ErrorTag::universe(2), seed).unwrap_or(grid);
        prop_assert_eq!(&load_grid(&save_grid(&grid)).unwrap(), &grid);
        let ascii = GridSpec::parse_ascii(&grid.render_ascii()).unwrap();
        prop_assert_eq!((&ascii.walls, &ascii.error_cells, ascii.start, ascii.goal), (&grid.walls, &grid.error_cells, grid.start, grid.goal));
    }

    #[test]
    fn tail_approximation_is_close_for_uniform_spacing(n in 6usize..=100, gap in 1u64..4) {
        let ticks: Vec<u64> = (0..n as u64).map(|i| 1 + i * gap).collect();
        let now = ticks[n - 1] + 1;
        let exact = ticks.iter().map(|t| ((now - t) as f64).powf(-0.5)).sum::<f64>().ln();
        let record = InstanceRecord {
            outcome: 0.0,
            first_time: ticks[0],
            recent_times: ticks[n - 5..].iter().copied().collect::<VecDeque<u64>>(),
            total_count: n as u64,
        };
        let approx = base_level(&record, now, 0.5).unwrap();
        prop_assert!((approx - exact).abs() / exact.abs() <= 0.05);
    }

    #[test]
    fn six_significant_digits(x in -1.0e6f64..1.0e6) {
        let s = format_sig6(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5.0e-6 * x.abs().max(1e-300) + 1e-12, "{} -> {}", x, s);
    }
}
