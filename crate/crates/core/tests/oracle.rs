mod common;

use common::{oracle_solve, random_query};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use triplet_core::dispersion::bbo;
use triplet_core::pmcore::solve_interlinked;

#[test]
fn analytic_solutions_match_brute_force() {
    let crystal = bbo();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    while compared < 15 {
        let q = random_query(&mut rng, &crystal, false);
        let Ok(out) = solve_interlinked(&q) else { continue };
        if out.solutions.is_empty() {
            continue;
        }
        let oracle = oracle_solve(&q);
        assert_eq!(oracle.len(), out.solutions.len(), "{q:?}");
        for s in &out.solutions {
            let r = oracle
                .iter()
                .min_by(|a, b| {
                    let da = (a.theta3 - s.theta3).abs() + (a.beta3 - s.beta3).abs();
                    let db = (b.theta3 - s.theta3).abs() + (b.beta3 - s.beta3).abs();
                    da.total_cmp(&db)
                })
                .unwrap();
            for (a, b) in [
                (r.theta3, s.theta3),
                (r.beta3, s.beta3),
                (r.theta1, s.theta1),
                (r.beta1, s.beta1),
                (r.theta2, s.theta2),
                (r.beta2, s.beta2),
            ] {
                assert!((a - b).abs() < 1e-6, "{a} vs {b} for {q:?}");
            }
        }
        compared += 1;
    }
}

#[test]
fn oracle_agrees_on_infeasible_queries() {
    let crystal = bbo();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 5 {
        let q = random_query(&mut rng, &crystal, false);
        let Ok(out) = solve_interlinked(&q) else { continue };
        if !out.solutions.is_empty() {
            continue;
        }
        assert!(oracle_solve(&q).is_empty(), "{q:?}");
        checked += 1;
    }
}
