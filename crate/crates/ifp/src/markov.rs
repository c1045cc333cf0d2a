//! Finite Markov chain machinery: discretization, stationary distributions,
//! and long-run growth rates computed as spectral radii.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::{self, Mat};
use crate::rng::Stream;

/// Row-stochastic transition matrix over a finite state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransitionMatrix {
    n_states: usize,
    rows: Mat,
}

impl TryFrom<Vec<Vec<f64>>> for TransitionMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        TransitionMatrix::new(&rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<f64>> {
    fn from(p: TransitionMatrix) -> Vec<Vec<f64>> {
        (0..p.n_states).map(|i| p.rows.row(i).to_vec()).collect()
    }
}

impl TransitionMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "transition matrix must have at least one state".into(),
            ));
        }
        let m = Mat::from_rows(rows)?;
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let p = m.get(i, j);
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i},{j}) = {p} outside [0,1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "row {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(TransitionMatrix {
            n_states: n,
            rows: m,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    #[inline]
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows.get(from, to)
    }

    pub fn row(&self, from: usize) -> &[f64] {
        self.rows.row(from)
    }

    pub fn as_mat(&self) -> &Mat {
        &self.rows
    }

    /// True when every state reaches every other state.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n_states;
        // Boolean reachability closure.
        let mut reach = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                reach[i * n + j] = i == j || self.prob(i, j) > 0.0;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i * n + k] {
                    for j in 0..n {
                        if reach[k * n + j] {
                            reach[i * n + j] = true;
                        }
                    }
                }
            }
        }
        reach.iter().all(|&r| r)
    }
}

/// Finite-state approximation of a Gaussian AR(1), normalized so the chain's
/// stationary mean and variance match the target exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizedAr1 {
    pub states: Vec<f64>,
    pub transition: TransitionMatrix,
    pub source_params: Ar1Params,
}

/// AR(1) parameters stated in stationary terms: the process has stationary
/// distribution N(mean, std_dev^2) and one-period autocorrelation
/// `persistence`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Params {
    pub mean: f64,
    pub persistence: f64,
    pub std_dev: f64,
}

/// Rouwenhorst discretization of a Gaussian AR(1).
///
/// States are evenly spaced on `mean ± std_dev * sqrt(n-1)`; the transition
/// matrix follows the symmetric recursion with p = q = (1 + persistence)/2.
/// The construction is moment-exact: the discrete chain's stationary mean
/// and variance equal `mean` and `std_dev^2`.
pub fn rouwenhorst(
    n_states: usize,
    mean: f64,
    persistence: f64,
    std_dev: f64,
) -> Result<DiscretizedAr1> {
    if n_states < 2 {
        return Err(Error::InvalidParameter(
            "rouwenhorst needs at least 2 states".into(),
        ));
    }
    if !(0.0..1.0).contains(&persistence) {
        return Err(Error::InvalidParameter(format!(
            "persistence {persistence} outside [0,1)"
        )));
    }
    if std_dev <= 0.0 || !std_dev.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "std_dev {std_dev} must be positive"
        )));
    }

    let p = (1.0 + persistence) / 2.0;
    let mut cur = vec![vec![p, 1.0 - p], vec![1.0 - p, p]];
    for size in 3..=n_states {
        let prev = cur;
        let mut next = vec![vec![0.0; size]; size];
        for i in 0..size - 1 {
            for j in 0..size - 1 {
                let v = prev[i][j];
                next[i][j] += p * v;
                next[i][j + 1] += (1.0 - p) * v;
                next[i + 1][j] += (1.0 - p) * v;
                next[i + 1][j + 1] += p * v;
            }
        }
        for row in next.iter_mut().take(size - 1).skip(1) {
            for v in row.iter_mut() {
                *v *= 0.5;
            }
        }
        cur = next;
    }
    // Guard against rounding drift in long recursions.
    for row in cur.iter_mut() {
        let s: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= s;
        }
    }

    let span = std_dev * ((n_states - 1) as f64).sqrt();
    let step = 2.0 * span / (n_states - 1) as f64;
    let states: Vec<f64> = (0..n_states)
        .map(|i| mean - span + step * i as f64)
        .collect();

    Ok(DiscretizedAr1 {
        states,
        transition: TransitionMatrix::new(&cur)?,
        source_params: Ar1Params {
            mean,
            persistence,
            std_dev,
        },
    })
}

/// Unique stationary distribution of an irreducible chain, from the linear
/// system pi P = pi with the normalization sum(pi) = 1.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<Vec<f64>> {
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible(
            "reachability graph is not strongly connected".into(),
        ));
    }
    let n = p.n_states();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    // Rows of A: (P^T - I) with the last equation replaced by sum = 1.
    let mut a = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, p.prob(j, i) - if i == j { 1.0 } else { 0.0 });
        }
    }
    for j in 0..n {
        a.set(n - 1, j, 1.0);
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let mut pi = linalg::solve_linear(&a, &b)?;
    for v in pi.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    for v in pi.iter_mut() {
        *v /= total;
    }
    Ok(pi)
}

/// The matrix of one-period growth weights for a state-dependent factor:
/// entry (z, z') is the transition probability into z' times the conditional
/// mean of the factor at z'. Its spectral radius is the factor's long-run
/// growth rate.
#[derive(Debug, Clone)]
pub struct GrowthOperator {
    matrix: Mat,
}

impl GrowthOperator {
    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }
}

/// Spectral radius of a nonnegative matrix. See [`linalg::spectral_radius`].
pub fn spectral_radius(m: &Mat) -> Result<f64> {
    linalg::spectral_radius(m)
}

/// Long-run growth rate of `prod_{t<=n} phi_t` for a factor with the given
/// per-state conditional means, together with the weight matrix realizing it.
pub fn growth_rate(p: &TransitionMatrix, cond_means: &[f64]) -> Result<(f64, GrowthOperator)> {
    let n = p.n_states();
    if cond_means.len() != n {
        return Err(Error::InvalidParameter(format!(
            "expected {n} conditional means, got {}",
            cond_means.len()
        )));
    }
    if cond_means.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::InvalidParameter(
            "conditional means must be finite and nonnegative".into(),
        ));
    }
    let mut l = Mat::zeros(n);
    for z in 0..n {
        for (znext, mean) in cond_means.iter().enumerate() {
            l.set(z, znext, p.prob(z, znext) * mean);
        }
    }
    let g = spectral_radius(&l)?;
    Ok((g, GrowthOperator { matrix: l }))
}

/// Monte Carlo estimate of the same long-run growth rate, used as an
/// independent check on [`growth_rate`].
///
/// Simulates `n_paths` chains of length `horizon` from the stationary
/// distribution, accumulates `log phi_t` along each path, and returns the
/// n-th root of the average path product together with a delta-method
/// standard error. Each path has its own counter-based stream keyed by
/// `(seed, path)`, so the result does not depend on thread count.
pub fn mc_growth_oracle<F>(
    p: &TransitionMatrix,
    sampler: F,
    horizon: usize,
    n_paths: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    F: Fn(usize, &mut Stream) -> f64 + Sync + Send,
{
    if horizon < 50 {
        return Err(Error::InvalidParameter(
            "horizon must be at least 50".into(),
        ));
    }
    if n_paths < 10_000 {
        return Err(Error::InvalidParameter("need at least 10^4 paths".into()));
    }
    let pi = stationary_distribution(p)?;

    let log_products: Vec<f64> = exec::map_indexed(n_paths, |path| {
        let mut stream = Stream::substream(seed, &[path as u64]);
        let mut z = stream.next_index(&pi);
        let mut log_prod = 0.0;
        for _ in 0..horizon {
            z = stream.next_index(p.row(z));
            let phi = sampler(z, &mut stream);
            log_prod += phi.ln(); // ln(0) = -inf makes the path product 0
        }
        log_prod
    });

    let n = horizon as f64;
    let paths = n_paths as f64;

    // Direct accumulation first; fall back to log-sum-exp if products overflow.
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &lp in &log_products {
        let prod = lp.exp();
        sum += prod;
        sum_sq += prod * prod;
    }
    if sum.is_finite() && sum_sq.is_finite() {
        let mean = sum / paths;
        if mean == 0.0 {
            return Ok((0.0, 0.0));
        }
        let var = (sum_sq / paths - mean * mean).max(0.0);
        let se_mean = (var / paths).sqrt();
        let estimate = mean.powf(1.0 / n);
        // d/dm m^(1/n) = m^(1/n - 1) / n
        let se = estimate / mean * se_mean / n;
        return Ok((estimate, se));
    }

    // Log-sum-exp path for explosive products.
    let max_lp = log_products
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max_lp.is_finite() {
        return Err(Error::Overflow);
    }
    let mut s1 = 0.0; // sum exp(lp - max)
    let mut s2 = 0.0; // sum exp(2(lp - max))
    for &lp in &log_products {
        let d = (lp - max_lp).exp();
        s1 += d;
        s2 += d * d;
    }
    let log_mean = max_lp + (s1 / paths).ln();
    let estimate = (log_mean / n).exp();
    if !estimate.is_finite() {
        return Err(Error::Overflow);
    }
    // Var(X)/mean(X)^2 = s2 * paths / s1^2 - 1, computed in shifted space.
    let rel_var = (s2 * paths / (s1 * s1) - 1.0).max(0.0);
    let se = estimate * (rel_var / paths).sqrt() / n;
    Ok((estimate, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_state() -> TransitionMatrix {
        TransitionMatrix::new(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(TransitionMatrix::new(&[vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::new(&[vec![1.1, -0.1], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::new(&[]).is_err());
    }

    #[test]
    fn stationary_single_state() {
        let p = TransitionMatrix::new(&[vec![1.0]]).unwrap();
        assert_eq!(stationary_distribution(&p).unwrap(), vec![1.0]);
    }

    #[test]
    fn stationary_symmetric() {
        let p = TransitionMatrix::new(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        assert_relative_eq!(pi[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(pi[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn stationary_two_state_by_hand() {
        // pi proportional to (0.2, 0.1)
        let pi = stationary_distribution(&two_state()).unwrap();
        assert_relative_eq!(pi[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(pi[1], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn stationary_rejects_reducible() {
        let p = TransitionMatrix::new(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            stationary_distribution(&p),
            Err(Error::NotIrreducible(_))
        ));
    }

    #[test]
    fn rouwenhorst_two_states_no_persistence() {
        let d = rouwenhorst(2, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(d.states[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(d.states[1], 1.0, epsilon = 1e-14);
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(d.transition.prob(i, j), 0.5, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn rouwenhorst_moment_exactness_grid() {
        for &n in &[2usize, 5, 15] {
            for &rho in &[0.0, 0.5, 0.99] {
                for &(mu, sigma) in &[(0.99_f64, 0.007_f64), (0.0, 1.0), (-3.25, 0.2)] {
                    let d = rouwenhorst(n, mu, rho, sigma).unwrap();
                    assert!(d.states.windows(2).all(|w| w[0] < w[1]));
                    assert!(d.transition.is_irreducible());
                    let pi = stationary_distribution(&d.transition).unwrap();
                    let mean: f64 = pi.iter().zip(&d.states).map(|(p, s)| p * s).sum();
                    let var: f64 = pi
                        .iter()
                        .zip(&d.states)
                        .map(|(p, s)| p * (s - mean) * (s - mean))
                        .sum();
                    assert_relative_eq!(mean, mu, epsilon = 1e-10);
                    assert_relative_eq!(var, sigma * sigma, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn rouwenhorst_rejects_bad_params() {
        assert!(rouwenhorst(1, 0.0, 0.5, 1.0).is_err());
        assert!(rouwenhorst(5, 0.0, 1.0, 1.0).is_err());
        assert!(rouwenhorst(5, 0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn growth_rate_constant_factor() {
        let (g, _) = growth_rate(&two_state(), &[0.95, 0.95]).unwrap();
        assert_relative_eq!(g, 0.95, epsilon = 1e-12);
    }

    #[test]
    fn growth_rate_iid_rows_is_mean() {
        let p = TransitionMatrix::new(&[vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let m = [0.9, 1.1];
        let (g, _) = growth_rate(&p, &m).unwrap();
        assert_relative_eq!(g, 0.3 * 0.9 + 0.7 * 1.1, epsilon = 1e-10);
    }

    #[test]
    fn growth_rate_stochastic_matrix_is_one() {
        for p in [two_state(), TransitionMatrix::new(&[vec![1.0]]).unwrap()] {
            let ones = vec![1.0; p.n_states()];
            let (g, _) = growth_rate(&p, &ones).unwrap();
            assert_relative_eq!(g, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn growth_operator_entries() {
        let p = two_state();
        let (_, l) = growth_rate(&p, &[0.9, 1.1]).unwrap();
        assert_relative_eq!(l.matrix().get(0, 1), 0.1 * 1.1, epsilon = 1e-15);
        assert_relative_eq!(l.matrix().get(1, 0), 0.2 * 0.9, epsilon = 1e-15);
    }

    #[test]
    fn power_growth_identity() {
        // (max_z sum_zhat (L^k)(z, zhat))^(1/k) approaches the radius. The
        // pre-asymptotic constant decays like 1/k, so the k=64 vs k=128 gap
        // is small for moderately persistent chains.
        let p = TransitionMatrix::new(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        for means in [[0.95, 1.05], [0.8, 1.0]] {
            let (g, l) = growth_rate(&p, &means).unwrap();
            let r64 = l.matrix().pow(64).max_row_sum().powf(1.0 / 64.0);
            let r128 = l.matrix().pow(128).max_row_sum().powf(1.0 / 128.0);
            assert!(
                (r64 - r128).abs() < 1e-3,
                "k-growth gap {}",
                (r64 - r128).abs()
            );
            assert!((r128 - g).abs() < 1e-2);
        }
        // Identical rows: the row sums equal the radius power exactly.
        let iid = TransitionMatrix::new(&[vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let (g, l) = growth_rate(&iid, &[0.9, 1.1]).unwrap();
        let r64 = l.matrix().pow(64).max_row_sum().powf(1.0 / 64.0);
        assert_relative_eq!(r64, g, max_relative = 1e-10);
    }

    #[test]
    fn mc_oracle_constant_one() {
        let p = two_state();
        let (est, se) = mc_growth_oracle(&p, |_, _| 1.0, 60, 10_000, 7).unwrap();
        assert_eq!(est, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn mc_oracle_constant_factor_exact() {
        let p = two_state();
        let (est, _) = mc_growth_oracle(&p, |_, _| 0.95, 200, 10_000, 7).unwrap();
        assert_relative_eq!(est, 0.95, epsilon = 1e-12);
    }

    #[test]
    fn mc_oracle_matches_spectral_growth_rate() {
        let p = two_state();
        let m = [0.9, 1.1];
        let (g, _) = growth_rate(&p, &m).unwrap();
        let (est, se) = mc_growth_oracle(&p, |z, _| m[z], 200, 100_000, 2024).unwrap();
        assert!(
            (est - g).abs() <= 2.0 * se,
            "estimate {est} vs growth rate {g}, se {se}"
        );
    }

    #[test]
    fn mc_oracle_validates_preconditions() {
        let p = two_state();
        assert!(mc_growth_oracle(&p, |_, _| 1.0, 10, 10_000, 0).is_err());
        assert!(mc_growth_oracle(&p, |_, _| 1.0, 100, 100, 0).is_err());
    }

    proptest! {
        #[test]
        fn prop_unit_means_give_unit_growth(rows in proptest::collection::vec(
            proptest::collection::vec(0.01f64..1.0, 4), 4))
        {
            let normalized: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    r.iter().map(|v| v / s).collect()
                })
                .collect();
            let p = TransitionMatrix::new(&normalized).unwrap();
            let (g, _) = growth_rate(&p, &[1.0; 4]).unwrap();
            prop_assert!((g - 1.0).abs() < 1e-10);
        }

        #[test]
        fn prop_growth_rate_homogeneous(rows in proptest::collection::vec(
            proptest::collection::vec(0.01f64..1.0, 3), 3),
            means in proptest::collection::vec(0.1f64..2.0, 3),
            k in prop_oneof![Just(0.5f64), Just(2.0f64)])
        {
            let normalized: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    r.iter().map(|v| v / s).collect()
                })
                .collect();
            let p = TransitionMatrix::new(&normalized).unwrap();
            let (g1, _) = growth_rate(&p, &means).unwrap();
            let scaled: Vec<f64> = means.iter().map(|m| m * k).collect();
            let (gk, _) = growth_rate(&p, &scaled).unwrap();
            prop_assert!((gk - k * g1).abs() < 1e-9 * gk.max(1.0));
        }
    }
}
