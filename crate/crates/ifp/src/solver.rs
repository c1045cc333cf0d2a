//! Time iteration on the Euler equation: the operator, successive
//! approximation to the optimal consumption policy, and policy diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::model::{self, ModelSpec, Primitive};
use crate::quad;

/// Strictly positive, exponentially spaced wealth grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetGrid {
    points: Vec<f64>,
}

impl AssetGrid {
    /// Exponential spacing between `a_min` and `a_max`; curvature of the
    /// policy concentrates near the borrowing constraint, while the upper
    /// range is nearly linear and tolerates coarse nodes.
    pub fn exponential(a_min: f64, a_max: f64, n: usize) -> Result<Self> {
        if !(a_min > 0.0) || !(a_max > a_min) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < a_min < a_max, got [{a_min}, {a_max}]"
            )));
        }
        if n < 50 {
            return Err(Error::InvalidParameter(
                "asset grid needs at least 50 points".into(),
            ));
        }
        let (lo, hi) = (a_min.ln(), a_max.ln());
        let step = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| (lo + step * i as f64).exp()).collect();
        Ok(AssetGrid { points })
    }

    /// Default grid for a specification: `[1e-3, 200]` times the median of
    /// the unconditional income distribution, 200 nodes.
    pub fn default_for_spec(spec: &ModelSpec) -> Result<Self> {
        let med = median_income(spec)?;
        AssetGrid::exponential(1e-3 * med, 200.0 * med, 200)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    fn from_sorted(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 || points[0] <= 0.0 || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::SchemaViolation(
                "asset grid must be positive and increasing".into(),
            ));
        }
        Ok(AssetGrid { points })
    }
}

/// Median of the unconditional income distribution, taken over the chain's
/// stationary weights (lognormal states enter through a quadrature proxy,
/// which is accurate enough for choosing grid bounds).
fn median_income(spec: &ModelSpec) -> Result<f64> {
    let pi = crate::markov::stationary_distribution(spec.chain())?;
    let rule = quad::normal_rule(21)?;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    for (z, &w) in pi.iter().enumerate() {
        for (y, p) in spec.income().measure(z, &rule) {
            pooled.push((y, w * p));
        }
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    for &(y, p) in &pooled {
        acc += p;
        if acc >= 0.5 {
            return Ok(y);
        }
    }
    Ok(pooled.last().map(|&(y, _)| y).unwrap_or(1.0))
}

/// Consumption policy on an asset grid, one column per exogenous state,
/// with the per-state asymptotic slope and binding threshold.
#[derive(Debug, Clone)]
pub struct Policy {
    grid: AssetGrid,
    n_states: usize,
    /// State-major: `c[z * n_grid + i]`.
    c: Vec<f64>,
    /// Asymptotic consumption slope per state, filled after convergence.
    alpha: Vec<f64>,
    /// Binding threshold per state: consumption equals wealth at and below it.
    a_bar: Vec<f64>,
}

impl Policy {
    /// The policy c(a, z) = a, the usual starting point for time iteration.
    pub fn identity(grid: AssetGrid, n_states: usize) -> Self {
        let n = grid.len();
        let mut c = Vec::with_capacity(n * n_states);
        for _ in 0..n_states {
            c.extend_from_slice(grid.points());
        }
        Policy {
            grid,
            n_states,
            c,
            alpha: vec![1.0; n_states],
            a_bar: vec![f64::INFINITY; n_states],
        }
    }

    /// Build from explicit consumption values, checking the feasibility and
    /// monotonicity invariants at every node.
    pub fn from_parts(
        grid: AssetGrid,
        n_states: usize,
        c: Vec<f64>,
        alpha: Vec<f64>,
        a_bar: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.len();
        if c.len() != n * n_states || alpha.len() != n_states || a_bar.len() != n_states {
            return Err(Error::InvalidParameter(
                "policy buffer sizes do not match grid".into(),
            ));
        }
        let policy = Policy {
            grid,
            n_states,
            c,
            alpha,
            a_bar,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Feasibility (0 < c <= a) and monotonicity of consumption and savings.
    pub fn validate(&self) -> Result<()> {
        let pts = self.grid.points();
        for z in 0..self.n_states {
            let col = self.column(z);
            for (i, (&a, &c)) in pts.iter().zip(col).enumerate() {
                if !(c > 0.0) || c > a * (1.0 + 1e-12) {
                    return Err(Error::DomainError(format!(
                        "consumption {c} outside (0, {a}] at node {i}, state {z}"
                    )));
                }
            }
            for i in 1..pts.len() {
                if col[i] < col[i - 1] {
                    return Err(Error::DomainError(format!(
                        "consumption decreasing at node {i}, state {z}"
                    )));
                }
                let s_prev = pts[i - 1] - col[i - 1];
                let s_cur = pts[i] - col[i];
                if s_cur < s_prev - 1e-12 * pts[i] {
                    return Err(Error::DomainError(format!(
                        "savings decreasing at node {i}, state {z}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &AssetGrid {
        &self.grid
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn column(&self, z: usize) -> &[f64] {
        let n = self.grid.len();
        &self.c[z * n..(z + 1) * n]
    }

    pub fn alpha(&self, z: usize) -> f64 {
        self.alpha[z]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    pub fn a_bar(&self, z: usize) -> f64 {
        self.a_bar[z]
    }

    pub fn binding_thresholds(&self) -> &[f64] {
        &self.a_bar
    }

    /// Consumption at arbitrary wealth: linear interpolation on the grid,
    /// the segment through the origin below it, and linear continuation of
    /// the top segment above it. Defined to be 0 at a = 0.
    pub fn consumption_at(&self, a: f64, z: usize) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        let pts = self.grid.points();
        let col = self.column(z);
        let n = pts.len();
        if a <= pts[0] {
            return col[0] * a / pts[0];
        }
        if a >= pts[n - 1] {
            let slope = self.top_slope(z);
            return col[n - 1] + slope * (a - pts[n - 1]);
        }
        let j = pts.partition_point(|&p| p < a);
        let (a0, a1) = (pts[j - 1], pts[j]);
        let (c0, c1) = (col[j - 1], col[j]);
        c0 + (c1 - c0) * (a - a0) / (a1 - a0)
    }

    /// Slope of the top grid segment, used for extrapolation.
    pub fn top_slope(&self, z: usize) -> f64 {
        let pts = self.grid.points();
        let col = self.column(z);
        let n = pts.len();
        (col[n - 1] - col[n - 2]) / (pts[n - 1] - pts[n - 2])
    }

    /// Copy with each state's asymptotic slope shifted by `sign * steps[z]`
    /// and clamped to [0, 1]. Supports sensitivity analysis of quantities
    /// that consume the slope estimate.
    pub fn with_shifted_alphas(&self, steps: &[f64], sign: f64) -> Policy {
        let alpha = self
            .alpha
            .iter()
            .zip(steps)
            .map(|(a, s)| (a + sign * s).clamp(0.0, 1.0))
            .collect();
        Policy {
            alpha,
            ..self.clone()
        }
    }

    fn same_grid(&self, other: &Policy) -> bool {
        self.n_states == other.n_states && self.grid == other.grid
    }
}

/// Tolerances and quadrature order for the solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence tolerance on the policy distance, in marginal-utility units.
    pub tol_rho: f64,
    pub max_iter: usize,
    /// Gauss–Hermite order per lognormal innovation.
    pub quad_nodes: usize,
    /// Inner root tolerance relative to the wealth level.
    pub root_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_rho: 1e-8,
            max_iter: 2000,
            quad_nodes: 11,
            root_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_rho > 0.0) || !(self.root_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "solver tolerances must be positive".into(),
            ));
        }
        if self.quad_nodes < 5 {
            return Err(Error::InvalidParameter(
                "need at least 5 quadrature nodes".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Per-state discretization of the one-period-ahead shocks: joint (return,
/// income, weight) points of the conditional (R, Y) distribution, plus the
/// conditional mean of the discount factor. Built once per solve.
#[derive(Debug, Clone)]
pub struct ShockTable {
    chain: crate::markov::TransitionMatrix,
    gamma: f64,
    mean_beta: Vec<f64>,
    joint: Vec<Vec<(f64, f64, f64)>>,
}

impl ShockTable {
    pub fn new(spec: &ModelSpec, quad_nodes: usize) -> Result<Self> {
        let rule = quad::normal_rule(quad_nodes)?;
        let n = spec.n_states();
        let mean_beta: Vec<f64> = (0..n)
            .map(|z| model::conditional_power_moment(spec.beta(), z, 1.0))
            .collect::<Result<_>>()?;
        let mut joint = Vec::with_capacity(n);
        for z in 0..n {
            let rs = spec.ret().measure(z, &rule);
            let ys = spec.income().measure(z, &rule);
            let mut cell = Vec::with_capacity(rs.len() * ys.len());
            for &(r, wr) in &rs {
                for &(y, wy) in &ys {
                    cell.push((r, y, wr * wy));
                }
            }
            joint.push(cell);
        }
        Ok(ShockTable {
            chain: spec.chain().clone(),
            gamma: spec.gamma(),
            mean_beta,
            joint,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_states(&self) -> usize {
        self.chain.n_states()
    }
}

#[inline]
fn mu(gamma: f64, c: f64) -> f64 {
    // marginal utility c^(-gamma) on the hot path
    if gamma == 1.0 {
        1.0 / c
    } else if gamma == 2.0 {
        1.0 / (c * c)
    } else {
        c.powf(-gamma)
    }
}

/// Expected discounted marginal return of saving `savings` at state `z`:
/// sum over next states of P(z,z') E[beta|z'] E[ R u'(c(R savings + Y, z')) ],
/// with the convention that a zero return contributes nothing.
pub fn euler_expectation(
    table: &ShockTable,
    policy: &Policy,
    savings: f64,
    z: usize,
) -> Result<f64> {
    if savings < 0.0 {
        return Err(Error::DomainError(format!("negative savings {savings}")));
    }
    let mut total = 0.0;
    for znext in 0..table.chain.n_states() {
        let p = table.chain.prob(z, znext);
        if p == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for &(r, y, w) in &table.joint[znext] {
            if r == 0.0 || w == 0.0 {
                continue;
            }
            let wealth = r * savings + y;
            if wealth <= 0.0 {
                // positive return with zero savings and zero income
                return Ok(f64::INFINITY);
            }
            let c = policy.consumption_at(wealth, znext);
            if c <= 0.0 {
                return Err(Error::DomainError(format!(
                    "interpolated consumption {c} <= 0 at wealth {wealth}, state {znext}"
                )));
            }
            inner += w * r * mu(table.gamma, c);
        }
        total += p * table.mean_beta[znext] * inner;
    }
    Ok(total)
}

/// One sweep of the time iteration operator.
///
/// At each node the binding branch is taken when current marginal utility
/// already dominates the expected return to saving nothing; otherwise the
/// Euler equation is solved by bisection. Sweeps run in ascending wealth
/// order per state so the previous root brackets the next one from below,
/// which also makes consumption monotone by construction. States are
/// processed in parallel; the output does not depend on thread count.
pub fn time_iteration_step(
    table: &ShockTable,
    policy: &Policy,
    config: &SolverConfig,
) -> Result<Policy> {
    let n = policy.grid().len();
    let n_states = policy.n_states();
    let gamma = table.gamma;

    let columns: Vec<Result<(Vec<f64>, f64)>> = exec::map_indexed(n_states, |z| {
        let pts = policy.grid().points();
        let mut col = vec![0.0; n];
        let e0 = euler_expectation(table, policy, 0.0, z)?;
        let a_bar = if e0 == 0.0 {
            f64::INFINITY
        } else if e0.is_finite() {
            e0.powf(-1.0 / gamma)
        } else {
            0.0
        };
        let mut lower = 0.0_f64;
        for (i, &a) in pts.iter().enumerate() {
            if mu(gamma, a) >= e0 {
                col[i] = a; // constraint binds (ties resolve to binding)
                lower = a;
                continue;
            }
            let tol = config.root_tol * a;
            let mut lo = lower.max(tol.min(a * 1e-6));
            let mut hi = a;
            // g(xi) = u'(xi) - E(a - xi); decreasing in xi.
            let g_lo = mu(gamma, lo) - euler_expectation(table, policy, a - lo, z)?;
            if g_lo < 0.0 {
                return Err(Error::RootBracketFailure { asset: a, state: z });
            }
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let g = mu(gamma, mid) - euler_expectation(table, policy, a - mid, z)?;
                if g >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let xi = 0.5 * (lo + hi);
            col[i] = xi;
            lower = xi;
        }
        Ok((col, a_bar))
    });

    let mut c = vec![0.0; n * n_states];
    let mut a_bar = vec![0.0; n_states];
    for (z, res) in columns.into_iter().enumerate() {
        let (col, ab) = res?;
        c[z * n..(z + 1) * n].copy_from_slice(&col);
        a_bar[z] = ab;
    }
    Ok(Policy {
        grid: policy.grid.clone(),
        n_states,
        c,
        alpha: policy.alpha.clone(),
        a_bar,
    })
}

/// Sup distance between two policies in marginal-utility units, over the
/// grid nodes.
pub fn policy_distance(gamma: f64, p1: &Policy, p2: &Policy) -> Result<f64> {
    if !p1.same_grid(p2) {
        return Err(Error::GridMismatch);
    }
    let mut worst = 0.0_f64;
    for (a, b) in p1.c.iter().zip(&p2.c) {
        let d = (mu(gamma, *a) - mu(gamma, *b)).abs();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Deviation from the first-order condition at wealth `a`, state `z`:
/// u'(c(a,z)) - max{ E(a - c(a,z), z), u'(a) }. Zero at the fixed point.
pub fn euler_residual(table: &ShockTable, policy: &Policy, a: f64, z: usize) -> Result<f64> {
    let c = policy.consumption_at(a, z);
    if c <= 0.0 {
        return Err(Error::DomainError(format!("consumption {c} at wealth {a}")));
    }
    let e = euler_expectation(table, policy, (a - c).max(0.0), z)?;
    Ok(mu(table.gamma, c) - e.max(mu(table.gamma, a)))
}

/// Least-squares slope of consumption over the top 10% of grid nodes,
/// clipped to [0,1]. A finite-grid estimate of the asymptotic marginal
/// propensity to consume.
pub fn asymptotic_mpc(policy: &Policy, z: usize) -> f64 {
    let pts = policy.grid().points();
    let col = policy.column(z);
    let n = pts.len();
    let k = (n / 10).max(5).min(n);
    let xs = &pts[n - k..];
    let ys = &col[n - k..];
    let mean_x: f64 = xs.iter().sum::<f64>() / k as f64;
    let mean_y: f64 = ys.iter().sum::<f64>() / k as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    (num / den).clamp(0.0, 1.0)
}

/// A converged policy together with the distance trace of the iteration.
#[derive(Debug, Clone)]
pub struct Solution {
    pub policy: Policy,
    pub trace: Vec<f64>,
}

/// Successive approximation from c0(a, z) = a until the policy distance
/// falls below tolerance.
///
/// Refuses to run when the optimality conditions fail: the iteration is
/// only known to converge under them.
pub fn solve(spec: &ModelSpec, grid: AssetGrid, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let report = model::compute_growth_report(spec)?;
    if !report.flags.discount_growth {
        return Err(Error::AssumptionViolated(format!(
            "discount growth rate {} is not below 1",
            report.g_beta
        )));
    }
    if !report.flags.discounted_return_growth {
        return Err(Error::AssumptionViolated(format!(
            "discounted return growth rate {} is not below 1",
            report.g_beta_r
        )));
    }
    if !report.flags.income_moments {
        return Err(Error::AssumptionViolated(
            "income moment conditions fail (E Y or E u'(Y) infinite)".into(),
        ));
    }
    let table = ShockTable::new(spec, config.quad_nodes)?;
    let start = Policy::identity(grid, spec.n_states());
    solve_from(&table, start, config)
}

/// Successive approximation from an explicit starting policy.
pub fn solve_from(table: &ShockTable, start: Policy, config: &SolverConfig) -> Result<Solution> {
    let gamma = table.gamma;
    let mut current = start;
    let mut trace = Vec::new();
    for _ in 0..config.max_iter {
        let next = time_iteration_step(table, &current, config)?;
        let dist = policy_distance(gamma, &current, &next)?;
        trace.push(dist);
        current = next;
        if dist < config.tol_rho {
            finalize(table, &mut current)?;
            return Ok(Solution {
                policy: current,
                trace,
            });
        }
    }
    let last = *trace.last().unwrap_or(&f64::NAN);
    let iterations = trace.len();
    let _ = finalize(table, &mut current);
    Err(Error::NotConverged {
        policy: Box::new(current),
        trace,
        iterations,
        last_distance: last,
    })
}

/// Fill the asymptotic slopes and refresh the binding thresholds against
/// the final policy.
fn finalize(table: &ShockTable, policy: &mut Policy) -> Result<()> {
    for z in 0..policy.n_states {
        policy.alpha[z] = asymptotic_mpc(policy, z);
    }
    let frozen = policy.clone();
    for z in 0..policy.n_states {
        let e0 = euler_expectation(table, &frozen, 0.0, z)?;
        policy.a_bar[z] = if e0 == 0.0 {
            f64::INFINITY
        } else if e0.is_finite() {
            e0.powf(-1.0 / table.gamma)
        } else {
            0.0
        };
    }
    Ok(())
}

/// Solve two specifications that differ only in income, with the higher
/// income dominating the lower state by state, and check that consumption
/// is pointwise weakly larger under the higher income.
pub fn income_dominance_check(
    spec_lo: &ModelSpec,
    spec_hi: &ModelSpec,
    grid: AssetGrid,
    config: &SolverConfig,
) -> Result<bool> {
    if spec_lo.chain() != spec_hi.chain()
        || spec_lo.beta() != spec_hi.beta()
        || spec_lo.ret() != spec_hi.ret()
        || spec_lo.gamma() != spec_hi.gamma()
    {
        return Err(Error::DominanceUnverifiable(
            "specifications differ outside the income process".into(),
        ));
    }
    verify_income_dominance(spec_lo.income(), spec_hi.income(), spec_lo.n_states())?;
    let lo = solve(spec_lo, grid.clone(), config)?;
    let hi = solve(spec_hi, grid, config)?;
    Ok(lo
        .policy
        .c
        .iter()
        .zip(&hi.policy.c)
        .all(|(cl, ch)| *cl <= *ch + 1e-8))
}

fn verify_income_dominance(lo: &Primitive, hi: &Primitive, n_states: usize) -> Result<()> {
    let fail = |msg: &str| Err(Error::DominanceUnverifiable(msg.into()));
    match (lo, hi) {
        (Primitive::Constant { value: a }, Primitive::Constant { value: b }) => {
            if b >= a {
                Ok(())
            } else {
                fail("constant income is smaller in the supposedly dominating spec")
            }
        }
        (
            Primitive::Lognormal {
                location: ml,
                scale: vl,
            },
            Primitive::Lognormal {
                location: mh,
                scale: vh,
            },
        ) => {
            for z in 0..n_states {
                if vl[z] != vh[z] {
                    return fail("lognormal scales differ; dominance not verifiable");
                }
                if mh[z] < ml[z] {
                    return fail("lognormal location is smaller in the dominating spec");
                }
            }
            Ok(())
        }
        (Primitive::Discrete { support: sl }, Primitive::Discrete { support: sh }) => {
            for z in 0..n_states {
                if sl[z].len() != sh[z].len() {
                    return fail("discrete supports are not coupled (different sizes)");
                }
                for (&(xl, pl), &(xh, ph)) in sl[z].iter().zip(&sh[z]) {
                    if (pl - ph).abs() > 1e-12 {
                        return fail("discrete supports are not coupled (different probabilities)");
                    }
                    if xh < xl {
                        return fail("discrete support point is smaller in the dominating spec");
                    }
                }
            }
            Ok(())
        }
        _ => fail("income processes have different kinds"),
    }
}

// ---------------------------------------------------------------------------
// File formats: CSV policy plus JSON sidecar.

/// Sidecar document stored next to the policy CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicySidecar {
    pub alpha: Vec<f64>,
    pub a_bar: Vec<f64>,
    pub trace: Vec<f64>,
}

/// Render a policy as CSV with columns (state_index, asset, consumption).
pub fn policy_to_csv(policy: &Policy) -> String {
    let mut out = String::from("state_index,asset,consumption\n");
    for z in 0..policy.n_states() {
        let col = policy.column(z);
        for (a, c) in policy.grid().points().iter().zip(col) {
            out.push_str(&format!("{z},{a},{c}\n"));
        }
    }
    out
}

/// Parse a policy CSV and its sidecar back into a [`Policy`] and trace.
pub fn policy_from_csv(csv: &str, sidecar: &PolicySidecar) -> Result<(Policy, Vec<f64>)> {
    let mut grid_points: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in csv.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "state_index,asset,consumption" {
                return Err(Error::SchemaViolation(format!(
                    "unexpected policy CSV header: {line}"
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let err = |field: &str| {
            Error::SchemaViolation(format!("policy CSV line {}: bad {field}", lineno + 1))
        };
        let z: usize = parts
            .next()
            .ok_or_else(|| err("state_index"))?
            .trim()
            .parse()
            .map_err(|_| err("state_index"))?;
        let a: f64 = parts
            .next()
            .ok_or_else(|| err("asset"))?
            .trim()
            .parse()
            .map_err(|_| err("asset"))?;
        let c: f64 = parts
            .next()
            .ok_or_else(|| err("consumption"))?
            .trim()
            .parse()
            .map_err(|_| err("consumption"))?;
        if z == columns.len() {
            columns.push(Vec::new());
        } else if z > columns.len() {
            return Err(Error::SchemaViolation(format!(
                "policy CSV line {}: state index {z} out of order",
                lineno + 1
            )));
        }
        if z == 0 {
            grid_points.push(a);
        } else {
            let i = columns[z].len();
            if grid_points
                .get(i)
                .map(|g| (g - a).abs() > 1e-12 * a.abs().max(1.0))
                != Some(false)
            {
                return Err(Error::SchemaViolation(format!(
                    "policy CSV line {}: asset grid differs across states",
                    lineno + 1
                )));
            }
        }
        columns[z].push(c);
    }
    if columns.is_empty() {
        return Err(Error::SchemaViolation("policy CSV has no data rows".into()));
    }
    let n = grid_points.len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::SchemaViolation(
            "policy CSV columns have unequal lengths".into(),
        ));
    }
    let n_states = columns.len();
    if sidecar.alpha.len() != n_states || sidecar.a_bar.len() != n_states {
        return Err(Error::SchemaViolation(
            "sidecar state count does not match CSV".into(),
        ));
    }
    let grid = AssetGrid::from_sorted(grid_points)?;
    let mut c = Vec::with_capacity(n * n_states);
    for col in &columns {
        c.extend_from_slice(col);
    }
    let policy = Policy::from_parts(
        grid,
        n_states,
        c,
        sidecar.alpha.clone(),
        sidecar.a_bar.clone(),
    )?;
    Ok((policy, sidecar.trace.clone()))
}
