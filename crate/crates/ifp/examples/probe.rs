use ifp::model::{ModelSpec, Primitive};
use ifp::solver::{solve, AssetGrid, SolverConfig};

fn probe(name: &str, spec: &ModelSpec) {
    let report = ifp::model::compute_growth_report(spec).unwrap();
    println!(
        "{name}: G_b={:.4} G_bR={:.4} G_R={:.4} s_bar={:.4} s_bar*G_R={:.4} static_pass={}",
        report.g_beta,
        report.g_beta_r,
        report.g_r,
        report.s_bar,
        report.s_bar * report.g_r,
        report.flags.all_static_pass()
    );
    let grid = AssetGrid::default_for_spec(spec).unwrap();
    match solve(spec, grid, &SolverConfig::default()) {
        Ok(sol) => {
            let alpha = sol.policy.alpha(0);
            println!(
                "  iters={} alpha={:.5} 1-s_bar={:.5} a_bar={:.4} top_slope={:.5}",
                sol.trace.len(),
                alpha,
                1.0 - report.s_bar,
                sol.policy.a_bar(0),
                sol.policy.top_slope(0)
            );
            if let Primitive::Discrete { support } = spec.ret() {
                for &(r, p) in &support[0] {
                    let g = r * (1.0 - alpha);
                    println!(
                        "    R={r} p={p}: R(1-alpha)={g:.4} {}",
                        if g > 1.0 { "(growth)" } else { "" }
                    );
                }
                // kappa for the single-state case: sum p g^k 1{g>1} = 1
                let terms: Vec<(f64, f64)> = support[0]
                    .iter()
                    .map(|&(r, p)| (r * (1.0 - alpha), p))
                    .collect();
                let lam = |s: f64| -> f64 {
                    terms
                        .iter()
                        .filter(|(g, _)| *g > 1.0)
                        .map(|(g, p)| p * g.powf(s))
                        .sum()
                };
                let (mut lo, mut hi) = (1e-6, 50.0);
                if lam(hi) > 1.0 && lam(lo) < 1.0 {
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if lam(mid) < 1.0 {
                            lo = mid
                        } else {
                            hi = mid
                        }
                    }
                    println!("    kappa = {:.4}", 0.5 * (lo + hi));
                }
            }
        }
        Err(e) => println!("  solve failed: {e}"),
    }
}

fn main() {
    let mild = ModelSpec::single_state(
        Primitive::Constant { value: 0.92 },
        Primitive::Discrete {
            support: vec![vec![(1.1, 0.5), (0.9, 0.5)]],
        },
        Primitive::Discrete {
            support: vec![vec![(1.0, 0.6), (0.5, 0.4)]],
        },
        2.0,
    )
    .unwrap();
    probe("mild", &mild);

    let fat = ModelSpec::single_state(
        Primitive::Constant { value: 0.46 },
        Primitive::Discrete {
            support: vec![vec![(2.6, 0.35), (0.7, 0.65)]],
        },
        Primitive::Discrete {
            support: vec![vec![(1.0, 0.6), (0.5, 0.4)]],
        },
        2.0,
    )
    .unwrap();
    probe("fat", &fat);
}
