mod common;

use common::random_instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeprune::approx::{block_solve, BlockConfig, BlockOptions, BlockPool, Counters};
use treeprune::exact::{solve_exact, ExactConfig};
use treeprune::milp::{max_weight_antichain, BnBConfig};
use treeprune::numcore::{fit_weights, objective_q, primal_objective, relaxed_q, subgradient_q};
use treeprune::oracle;
use treeprune::relax::{relax_and_round, solve_relaxation, RelaxConfig};
use treeprune::rulespace::AttributeScheme;

fn tight_exact(k: u64, scheme: AttributeScheme, gamma: f64) -> ExactConfig {
    ExactConfig {
        budget: k,
        scheme,
        gamma,
        tol: 1e-12,
        bnb: BnBConfig {
            rel_gap_tol: 1e-12,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn exact_matches_enumeration() {
    for seed in 0..6 {
        let inst = random_instance(seed, 4, 2, 40, 30);
        let v = inst.target();
        for scheme in AttributeScheme::ALL {
            for k in [1, 3] {
                let cfg = tight_exact(k, scheme, 1.0);
                let r = solve_exact(&inst.rs, inst.y(), &cfg).unwrap();
                let (best, _) = oracle::brute_force_exact(&inst.rs, &v, 1.0, scheme, k).unwrap();
                assert!(
                    (r.upper - best).abs() <= 1e-8,
                    "seed {seed} {scheme:?} K={k}: {} vs {best}",
                    r.upper
                );
                assert!(inst.rs.is_antichain(&r.selection.support));
                assert!(r.selection.attribute_sum <= k);
            }
        }
    }
}

#[test]
fn woodbury_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..20 {
        let inst = random_instance(100 + seed, 4, 2, 40, 30);
        let rs = &inst.rs;
        let mut support: Vec<usize> = (0..rs.m()).filter(|_| rng.gen_bool(0.3)).take(4).collect();
        support.dedup();
        let gamma = 10f64.powf(rng.gen_range(-1.0..2.0));
        let v = inst.target();
        let q = objective_q(rs, gamma, &support, &v).unwrap();
        let cols: Vec<Vec<f64>> = support.iter().map(|&i| oracle::dense_column(rs, i)).collect();
        let (direct, wd) = oracle::ridge_direct(&cols, gamma, &v).unwrap();
        assert!((q - direct).abs() <= 1e-8 * direct.abs().max(1.0));
        let w = fit_weights(rs, gamma, &support, &v).unwrap();
        for (a, b) in w.iter().zip(&wd) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        let p = primal_objective(rs, gamma, &support, &w, &v);
        assert!((p - q).abs() <= 1e-8 * q.abs().max(1.0));
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..5 {
        let inst = random_instance(200 + seed, 3, 2, 30, 20);
        let rs = &inst.rs;
        let v = inst.target();
        let z: Vec<f64> = (0..rs.m()).map(|_| rng.gen_range(0.1..0.9)).collect();
        let fd = oracle::fd_gradient(rs, 0.8, &z, &v, 1e-5).unwrap();
        let cut = treeprune::numcore::relaxed_cut(rs, 0.8, &z, &v, 0.0, &vec![0; rs.m()]).unwrap();
        for (a, b) in cut.gradient.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-4 * b.abs().max(1e-3), "{a} vs {b}");
        }
        let q = relaxed_q(rs, 0.8, &z, &v).unwrap();
        let dense = oracle::relaxed_q_dense(rs, 0.8, &z, &v).unwrap();
        assert!((q - dense).abs() <= 1e-9 * dense.max(1.0));
        // binary z reduces to the support gradient
        let g = subgradient_q(rs, 0.8, &[], &v).unwrap();
        assert!(g.iter().all(|x| *x <= 0.0));
    }
}

#[test]
fn block_solve_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for seed in 0..20 {
        let inst = random_instance(300 + seed, 3, 3, 50, 40);
        let rs = &inst.rs;
        let t = rng.gen_range(0..rs.num_trees());
        let v = inst.target();
        let lambda = 10f64.powf(rng.gen_range(-2.0..1.0));
        let gamma = 10f64.powf(rng.gen_range(-1.0..1.5));
        let scheme = AttributeScheme::ALL[rng.gen_range(0..3)];
        let mut pool = BlockPool::new(200);
        let mut c = Counters::default();
        let cfg = BlockConfig {
            tol: 1e-12,
            bnb: BnBConfig {
                rel_gap_tol: 1e-12,
                ..Default::default()
            },
            ..Default::default()
        };
        let sol = block_solve(rs, t, &v, lambda, gamma, scheme, &mut pool, &[], &cfg, BlockOptions::default(), &mut c)
            .unwrap();
        let (best, _) = oracle::brute_force_block(rs, t, &v, lambda, gamma, scheme).unwrap();
        assert!((sol.objective - best).abs() <= 1e-8, "seed {seed}: {} vs {best}", sol.objective);
    }
}

#[test]
fn antichain_dp_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let n = rng.gen_range(1..=16);
        let parent: Vec<Option<usize>> = (0..n)
            .map(|i| if i == 0 || rng.gen_bool(0.2) { None } else { Some(rng.gen_range(0..i)) })
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-64..128) as f64 / 64.0).collect();
        let (v, sel) = max_weight_antichain(&parent, &w);
        let brute = oracle::max_antichain_brute(&parent, &w).unwrap();
        assert_eq!(v, brute);
        let chosen: f64 = (0..n).filter(|&i| sel[i]).map(|i| w[i]).sum();
        assert_eq!(chosen, v);
    }
}

#[test]
fn relaxation_sandwich_and_oracle() {
    for seed in 0..4 {
        let inst = random_instance(400 + seed, 2, 2, 24, 10);
        let rs = &inst.rs;
        let v = inst.target();
        let lambda = 0.5;
        let cfg = RelaxConfig {
            tol: 1e-9,
            max_iterations: 5000,
        };
        let scheme = AttributeScheme::DepthWeight;
        let r = relax_and_round(rs, inst.y(), lambda, 1.0, scheme, &cfg).unwrap();
        let (opt, _) = oracle::brute_force_penalized(rs, &v, lambda, 1.0, scheme).unwrap();
        assert!(r.lower_bound <= opt + 1e-9);
        assert!(opt <= r.rounded_objective + 1e-9);
        let pg = oracle::relaxation_oracle(rs, &v, lambda, 1.0, scheme, 3000).unwrap();
        let (_, obj, _, _) = solve_relaxation(rs, inst.y(), lambda, 1.0, scheme, &cfg).unwrap();
        assert!((obj - pg).abs() <= 1e-5 * pg.abs().max(1.0), "seed {seed}: {obj} vs {pg}");
    }
}
