//! Shared test helpers: an independent value-function-iteration oracle and
//! small utilities for driving the binary.
#![allow(dead_code)] // not every test target uses every helper

use std::path::PathBuf;
use std::process::Command;

use ifp::model::{self, ModelSpec};
use ifp::quad;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ifp"))
}

/// Value function iteration with golden-section maximization on a coarse
/// exponential grid. Solves the same problem as the time-iteration solver
/// through the Bellman equation instead of the Euler equation, so it serves
/// as an independent oracle for the consumption policy.
///
/// The value function is stored and interpolated through the
/// inverse-utility transform w = ((1-gamma) V)^(1/(1-gamma)) (consumption
/// equivalent). Under CRRA the transform is asymptotically linear in
/// wealth, which keeps a 30-node grid accurate and makes linear
/// continuation beyond the top node the right boundary treatment.
pub struct VfiOracle {
    pub grid: Vec<f64>,
    /// Consumption policy, state-major like the solver's.
    pub consumption: Vec<f64>,
    n_states: usize,
}

/// Monotone cubic interpolant (Fritsch–Carlson) over a fixed grid, with
/// linear continuation at both ends from the endpoint derivatives.
struct PchipColumn {
    x: Vec<f64>,
    w: Vec<f64>,
    d: Vec<f64>,
}

impl PchipColumn {
    fn new(x: &[f64], w: &[f64]) -> Self {
        let n = x.len();
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (w[i + 1] - w[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let endpoint = |h0: f64, h1: f64, d0: f64, d1: f64| -> f64 {
            let e = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if e * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && e.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                e
            }
        };
        d[0] = endpoint(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        PchipColumn {
            x: x.to_vec(),
            w: w.to_vec(),
            d,
        }
    }

    fn eval(&self, a: f64) -> f64 {
        let n = self.x.len();
        if a <= self.x[0] {
            return self.w[0] + self.d[0] * (a - self.x[0]);
        }
        if a >= self.x[n - 1] {
            return self.w[n - 1] + self.d[n - 1] * (a - self.x[n - 1]);
        }
        let j = self.x.partition_point(|&p| p < a);
        let (x0, x1) = (self.x[j - 1], self.x[j]);
        let (w0, w1) = (self.w[j - 1], self.w[j]);
        let (d0, d1) = (self.d[j - 1], self.d[j]);
        let h = x1 - x0;
        let t = (a - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * w0 + h10 * h * d0 + h01 * w1 + h11 * h * d1
    }
}

struct Transform {
    gamma: f64,
    /// ln-a coefficient for the log-utility case: 1/(1 - E beta).
    log_scale: f64,
}

impl Transform {
    fn to_w(&self, v: f64) -> f64 {
        if self.gamma == 1.0 {
            (v / self.log_scale).exp()
        } else {
            ((1.0 - self.gamma) * v).powf(1.0 / (1.0 - self.gamma))
        }
    }

    fn to_v(&self, w: f64) -> f64 {
        if self.gamma == 1.0 {
            w.ln() * self.log_scale
        } else {
            w.powf(1.0 - self.gamma) / (1.0 - self.gamma)
        }
    }
}

impl VfiOracle {
    pub fn solve(spec: &ModelSpec, a_min: f64, a_max: f64, n_grid: usize) -> Self {
        let n_states = spec.n_states();
        let gamma = spec.gamma();
        let rule = quad::normal_rule(11).unwrap();

        let (lo, hi) = (a_min.ln(), a_max.ln());
        let step = (hi - lo) / (n_grid - 1) as f64;
        let grid: Vec<f64> = (0..n_grid).map(|i| (lo + step * i as f64).exp()).collect();

        let mean_beta: Vec<f64> = (0..n_states)
            .map(|z| model::conditional_power_moment(spec.beta(), z, 1.0).unwrap())
            .collect();
        let pi = ifp::markov::stationary_distribution(spec.chain()).unwrap();
        let avg_beta: f64 = pi.iter().zip(&mean_beta).map(|(p, b)| p * b).sum();
        let transform = Transform {
            gamma,
            log_scale: 1.0 / (1.0 - avg_beta),
        };

        let joint: Vec<Vec<(f64, f64, f64)>> = (0..n_states)
            .map(|z| {
                let rs = spec.ret().measure(z, &rule);
                let ys = spec.income().measure(z, &rule);
                let mut cell = Vec::new();
                for &(r, wr) in &rs {
                    for &(y, wy) in &ys {
                        cell.push((r, y, wr * wy));
                    }
                }
                cell
            })
            .collect();

        // Shape-preserving cubic interpolation in w-space, with linear
        // continuation at both ends using the endpoint derivatives (the
        // right asymptotic behavior, since w is asymptotically linear).
        let interp_w = |w_col: &PchipColumn, a: f64| -> f64 { w_col.eval(a) };

        // Start from the value of consuming wealth outright.
        let mut w = vec![0.0_f64; n_grid * n_states];
        for z in 0..n_states {
            for (i, &a) in grid.iter().enumerate() {
                w[z * n_grid + i] = transform.to_w(model::utility(gamma, a));
            }
        }
        let mut policy = vec![0.0_f64; n_grid * n_states];

        let columns = |w: &[f64]| -> Vec<PchipColumn> {
            (0..n_states)
                .map(|z| PchipColumn::new(&grid, &w[z * n_grid..(z + 1) * n_grid]))
                .collect()
        };

        let continuation = |cols: &[PchipColumn], savings: f64, z: usize| -> f64 {
            let mut total = 0.0;
            for znext in 0..n_states {
                let p = spec.chain().prob(z, znext);
                if p == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for &(r, y, wt) in &joint[znext] {
                    inner += wt * transform.to_v(interp_w(&cols[znext], r * savings + y));
                }
                total += p * mean_beta[znext] * inner;
            }
            total
        };

        const GOLDEN: f64 = 0.6180339887498949;
        let maximize = |cols: &[PchipColumn], a: f64, z: usize| -> (f64, f64) {
            let objective =
                |c: f64| -> f64 { model::utility(gamma, c) + continuation(cols, a - c, z) };
            let mut lo_c = 1e-9 * a;
            let mut hi_c = a;
            let mut x1 = hi_c - GOLDEN * (hi_c - lo_c);
            let mut x2 = lo_c + GOLDEN * (hi_c - lo_c);
            let mut f1 = objective(x1);
            let mut f2 = objective(x2);
            for _ in 0..90 {
                if f1 < f2 {
                    lo_c = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo_c + GOLDEN * (hi_c - lo_c);
                    f2 = objective(x2);
                } else {
                    hi_c = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi_c - GOLDEN * (hi_c - lo_c);
                    f1 = objective(x1);
                }
                if hi_c - lo_c < 1e-12 * a {
                    break;
                }
            }
            let c_star = 0.5 * (lo_c + hi_c);
            (c_star, objective(c_star))
        };

        for _ in 0..5000 {
            let cols = columns(&w);
            let mut next = vec![0.0_f64; n_grid * n_states];
            let mut worst = 0.0_f64;
            for z in 0..n_states {
                for (i, &a) in grid.iter().enumerate() {
                    let (c_star, v_star) = maximize(&cols, a, z);
                    policy[z * n_grid + i] = c_star;
                    let w_star = transform.to_w(v_star);
                    next[z * n_grid + i] = w_star;
                    let rel = (w_star - w[z * n_grid + i]).abs() / w_star.abs().max(1e-12);
                    worst = worst.max(rel);
                }
            }
            w = next;
            if worst < 1e-12 {
                break;
            }
        }
        // One final maximization pass against the converged value.
        let cols = columns(&w);
        for z in 0..n_states {
            for (i, &a) in grid.iter().enumerate() {
                policy[z * n_grid + i] = maximize(&cols, a, z).0;
            }
        }

        VfiOracle {
            grid,
            consumption: policy,
            n_states,
        }
    }

    pub fn consumption_at_node(&self, i: usize, z: usize) -> f64 {
        self.consumption[z * self.grid.len() + i]
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }
}
