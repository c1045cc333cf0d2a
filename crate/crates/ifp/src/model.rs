//! Model specification, analytic conditional moments of the primitives, and
//! verification of the growth-rate and mixing conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{self, TransitionMatrix};

/// State-dependent nonnegative primitive process: the discount factor, the
/// gross return, or income. The value drawn at state `z` is independent of
/// the other primitives' innovations given `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    /// The same value in every state, no innovation.
    Constant { value: f64 },
    /// exp(location(z) + scale(z) * N(0,1)).
    Lognormal { location: Vec<f64>, scale: Vec<f64> },
    /// Finite support per state: list of (point, probability).
    Discrete { support: Vec<Vec<(f64, f64)>> },
}

impl Primitive {
    /// Check shape and numeric invariants against a state count.
    pub fn validate(&self, n_states: usize, name: &str) -> Result<()> {
        match self {
            Primitive::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name}: constant value {value} must be finite and >= 0"
                    )));
                }
            }
            Primitive::Lognormal { location, scale } => {
                if location.len() != n_states || scale.len() != n_states {
                    return Err(Error::InvalidParameter(format!(
                        "{name}: lognormal parameter vectors must have length {n_states}"
                    )));
                }
                if location.iter().any(|m| !m.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "{name}: non-finite location"
                    )));
                }
                if scale.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name}: scale must be > 0"
                    )));
                }
            }
            Primitive::Discrete { support } => {
                if support.len() != n_states {
                    return Err(Error::InvalidParameter(format!(
                        "{name}: discrete support must have {n_states} per-state entries"
                    )));
                }
                for (z, points) in support.iter().enumerate() {
                    if points.is_empty() {
                        return Err(Error::InvalidParameter(format!(
                            "{name}: empty support at state {z}"
                        )));
                    }
                    let mut total = 0.0;
                    for &(x, p) in points {
                        if !x.is_finite() || x < 0.0 {
                            return Err(Error::InvalidParameter(format!(
                                "{name}: support point {x} at state {z} must be finite and >= 0"
                            )));
                        }
                        if !p.is_finite() || p < 0.0 {
                            return Err(Error::InvalidParameter(format!(
                                "{name}: probability {p} at state {z} must be >= 0"
                            )));
                        }
                        total += p;
                    }
                    if (total - 1.0).abs() > 1e-12 {
                        return Err(Error::InvalidParameter(format!(
                            "{name}: probabilities at state {z} sum to {total}, not 1"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Value of the primitive at state `z` for a uniform draw `u` in (0,1).
    /// This is the conditional quantile function, so one uniform fully
    /// determines the draw.
    pub fn quantile(&self, z: usize, u: f64) -> f64 {
        match self {
            Primitive::Constant { value } => *value,
            Primitive::Lognormal { location, scale } => {
                (location[z] + scale[z] * crate::rng::normal_quantile(u)).exp()
            }
            Primitive::Discrete { support } => {
                let points = &support[z];
                let mut acc = 0.0;
                for &(x, p) in points {
                    acc += p;
                    if u < acc {
                        return x;
                    }
                }
                points[points.len() - 1].0
            }
        }
    }

    /// Conditional distribution at state `z` as weighted points, using the
    /// supplied normal quadrature rule for the lognormal case.
    pub fn measure(&self, z: usize, normal_rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
        match self {
            Primitive::Constant { value } => vec![(*value, 1.0)],
            Primitive::Lognormal { location, scale } => normal_rule
                .iter()
                .map(|&(x, w)| ((location[z] + scale[z] * x).exp(), w))
                .collect(),
            Primitive::Discrete { support } => support[z].clone(),
        }
    }

    /// True when the value at state `z` is zero with positive probability.
    pub fn has_zero_atom(&self, z: usize) -> bool {
        match self {
            Primitive::Constant { value } => *value == 0.0,
            Primitive::Lognormal { .. } => false,
            Primitive::Discrete { support } => support[z].iter().any(|&(x, p)| x == 0.0 && p > 0.0),
        }
    }
}

/// E_z[X^s] for a primitive X.
///
/// Constant: value^s. Lognormal: exp(s m + s^2 v^2 / 2). Discrete: the
/// exact sum with the conventions 0^s = 0 for s > 0 and 0^0 = 1.
pub fn conditional_power_moment(p: &Primitive, z: usize, s: f64) -> Result<f64> {
    match p {
        Primitive::Constant { value } => {
            if *value == 0.0 && s < 0.0 {
                return Err(Error::UndefinedMoment(format!(
                    "constant 0 raised to negative power {s}"
                )));
            }
            Ok(power(*value, s))
        }
        Primitive::Lognormal { location, scale } => {
            let m = location[z];
            let v = scale[z];
            Ok((s * m + s * s * v * v / 2.0).exp())
        }
        Primitive::Discrete { support } => {
            let mut total = 0.0;
            for &(x, prob) in &support[z] {
                if prob == 0.0 {
                    continue;
                }
                if x == 0.0 && s < 0.0 {
                    return Err(Error::UndefinedMoment(format!(
                        "discrete support contains 0 at state {z} with negative power {s}"
                    )));
                }
                total += prob * power(x, s);
            }
            Ok(total)
        }
    }
}

#[inline]
fn power(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        if s == 0.0 {
            1.0
        } else {
            0.0 // s > 0 by the callers' domain checks
        }
    } else {
        x.powf(s)
    }
}

/// Like [`conditional_power_moment`] but maps an undefined moment to +inf,
/// which is its value as an extended real. Used when building reports where
/// an infinite moment should fail a flag rather than abort.
fn moment_or_infinite(p: &Primitive, z: usize, s: f64) -> f64 {
    conditional_power_moment(p, z, s).unwrap_or(f64::INFINITY)
}

/// CRRA marginal utility u'(c) = c^(-gamma).
pub fn marginal_utility(gamma: f64, c: f64) -> Result<f64> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::DomainError(format!("marginal utility at c = {c}")));
    }
    Ok(c.powf(-gamma))
}

/// Inverse of the CRRA marginal utility: m^(-1/gamma).
pub fn inverse_marginal_utility(gamma: f64, m: f64) -> Result<f64> {
    if m <= 0.0 || !m.is_finite() {
        return Err(Error::DomainError(format!(
            "inverse marginal utility at m = {m}"
        )));
    }
    Ok(m.powf(-1.0 / gamma))
}

/// CRRA utility: c^(1-gamma)/(1-gamma), or log c when gamma = 1.
pub fn utility(gamma: f64, c: f64) -> f64 {
    if gamma == 1.0 {
        c.ln()
    } else {
        c.powf(1.0 - gamma) / (1.0 - gamma)
    }
}

/// A full problem instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ModelSpecDoc", into = "ModelSpecDoc")]
pub struct ModelSpec {
    states: Vec<String>,
    chain: TransitionMatrix,
    beta: Primitive,
    ret: Primitive,
    income: Primitive,
    gamma: f64,
}

/// On-disk shape: {states, transition, beta, ret, income, gamma}.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelSpecDoc {
    states: Vec<String>,
    transition: Vec<Vec<f64>>,
    beta: Primitive,
    ret: Primitive,
    income: Primitive,
    gamma: f64,
}

impl TryFrom<ModelSpecDoc> for ModelSpec {
    type Error = Error;
    fn try_from(doc: ModelSpecDoc) -> Result<Self> {
        let chain = TransitionMatrix::new(&doc.transition)?;
        ModelSpec::new(doc.states, chain, doc.beta, doc.ret, doc.income, doc.gamma)
    }
}

impl From<ModelSpec> for ModelSpecDoc {
    fn from(spec: ModelSpec) -> ModelSpecDoc {
        ModelSpecDoc {
            states: spec.states,
            transition: spec.chain.into(),
            beta: spec.beta,
            ret: spec.ret,
            income: spec.income,
            gamma: spec.gamma,
        }
    }
}

impl ModelSpec {
    pub fn new(
        states: Vec<String>,
        chain: TransitionMatrix,
        beta: Primitive,
        ret: Primitive,
        income: Primitive,
        gamma: f64,
    ) -> Result<Self> {
        let n = chain.n_states();
        if states.len() != n {
            return Err(Error::InvalidParameter(format!(
                "got {} state labels for {n} states",
                states.len()
            )));
        }
        if !chain.is_irreducible() {
            return Err(Error::NotIrreducible(
                "model chain must be irreducible".into(),
            ));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma {gamma} must be > 0"
            )));
        }
        beta.validate(n, "beta")?;
        ret.validate(n, "ret")?;
        income.validate(n, "income")?;
        // Income identically zero would make marginal utility infinite on
        // the whole state space.
        let all_zero = (0..n).all(|z| match &income {
            Primitive::Constant { value } => *value == 0.0,
            Primitive::Lognormal { .. } => false,
            Primitive::Discrete { support } => {
                support[z].iter().all(|&(x, p)| x == 0.0 || p == 0.0)
            }
        });
        if all_zero {
            return Err(Error::InvalidParameter("income is identically zero".into()));
        }
        Ok(ModelSpec {
            states,
            chain,
            beta,
            ret,
            income,
            gamma,
        })
    }

    /// Convenience constructor for a single exogenous state.
    pub fn single_state(
        beta: Primitive,
        ret: Primitive,
        income: Primitive,
        gamma: f64,
    ) -> Result<Self> {
        let chain = TransitionMatrix::new(&[vec![1.0]])?;
        ModelSpec::new(vec!["z0".into()], chain, beta, ret, income, gamma)
    }

    pub fn n_states(&self) -> usize {
        self.chain.n_states()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.states
    }

    pub fn chain(&self) -> &TransitionMatrix {
        &self.chain
    }

    pub fn beta(&self) -> &Primitive {
        &self.beta
    }

    pub fn ret(&self) -> &Primitive {
        &self.ret
    }

    pub fn income(&self) -> &Primitive {
        &self.income
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Pass/fail flags for the model's assumptions. The wealth-growth flag is
/// `None` until a solved policy makes it checkable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    /// Discount growth: G_beta < 1.
    pub discount_growth: bool,
    /// Discounted return growth: G_betaR < 1.
    pub discounted_return_growth: bool,
    /// Income moments: E Y and E u'(Y) finite.
    pub income_moments: bool,
    /// Savings stability: s_bar < 1 and s_bar * G_R < 1.
    pub savings_stability: bool,
    /// Social mobility: a persistent state where income comes near its
    /// global lower bound with positive probability.
    pub social_mobility: bool,
    /// Wealth can grow when large; requires the solved policy's asymptotic
    /// slopes, so it is filled in by the tail analysis.
    pub wealth_growth: Option<bool>,
}

impl AssumptionFlags {
    /// The flags checkable from the specification alone.
    pub fn all_static_pass(&self) -> bool {
        self.discount_growth
            && self.discounted_return_growth
            && self.income_moments
            && self.savings_stability
            && self.social_mobility
    }
}

/// Growth rates, the savings-rate bound, unconditional income moments, and
/// the assumption flags they imply.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub g_beta: f64,
    pub g_beta_r: f64,
    pub g_r: f64,
    /// Savings-rate upper bound (max_z E_z beta' R'^(1-gamma))^(1/gamma).
    pub s_bar: f64,
    /// E Y under the stationary distribution of the chain.
    pub e_y: f64,
    /// E u'(Y) = E Y^(-gamma); `None` means infinite.
    pub e_uprime_y: Option<f64>,
    pub flags: AssumptionFlags,
    pub notes: Vec<String>,
}

/// Compute every growth rate and flag for a specification.
///
/// Conditional independence of the innovations given the state lets every
/// mixed moment factor into per-state products, e.g.
/// E_z beta' R' = sum_z' P(z,z') E_z'[beta] E_z'[R].
pub fn compute_growth_report(spec: &ModelSpec) -> Result<GrowthReport> {
    let n = spec.n_states();
    let p = spec.chain();
    let gamma = spec.gamma();

    let mean_beta: Vec<f64> = (0..n)
        .map(|z| conditional_power_moment(spec.beta(), z, 1.0))
        .collect::<Result<_>>()?;
    let mean_ret: Vec<f64> = (0..n)
        .map(|z| conditional_power_moment(spec.ret(), z, 1.0))
        .collect::<Result<_>>()?;
    let mean_beta_ret: Vec<f64> = mean_beta
        .iter()
        .zip(&mean_ret)
        .map(|(b, r)| b * r)
        .collect();

    let (g_beta, _) = markov::growth_rate(p, &mean_beta)?;
    let (g_beta_r, _) = markov::growth_rate(p, &mean_beta_ret)?;
    let (g_r, _) = markov::growth_rate(p, &mean_ret)?;

    // s_bar = (max_z sum_z' P(z,z') E_z'[beta] E_z'[R^(1-gamma)])^(1/gamma);
    // an undefined return moment makes the bound infinite.
    let ret_pow: Vec<f64> = (0..n)
        .map(|z| moment_or_infinite(spec.ret(), z, 1.0 - gamma))
        .collect();
    let mut worst = 0.0_f64;
    for z in 0..n {
        let mut acc = 0.0;
        for znext in 0..n {
            let w = p.prob(z, znext) * mean_beta[znext];
            if w > 0.0 {
                acc += w * ret_pow[znext];
            }
        }
        worst = worst.max(acc);
    }
    let s_bar = worst.powf(1.0 / gamma);

    let pi = markov::stationary_distribution(p)?;
    let e_y: f64 = (0..n)
        .map(|z| pi[z] * moment_or_infinite(spec.income(), z, 1.0))
        .sum();
    let e_uprime_raw: f64 = (0..n)
        .map(|z| pi[z] * moment_or_infinite(spec.income(), z, -gamma))
        .sum();
    let e_uprime_y = if e_uprime_raw.is_finite() {
        Some(e_uprime_raw)
    } else {
        None
    };

    let mut notes = Vec::new();
    let social_mobility = check_social_mobility(spec, &mut notes);

    let flags = AssumptionFlags {
        discount_growth: g_beta < 1.0,
        discounted_return_growth: g_beta_r < 1.0,
        income_moments: e_y.is_finite() && e_uprime_y.is_some(),
        savings_stability: s_bar < 1.0 && s_bar * g_r < 1.0,
        social_mobility,
        wealth_growth: None,
    };
    notes.push("wealth_growth flag requires a solved policy; see the tail analysis".into());

    Ok(GrowthReport {
        g_beta,
        g_beta_r,
        g_r,
        s_bar,
        e_y,
        e_uprime_y,
        flags,
        notes,
    })
}

/// A state with a positive self-transition where income reaches its global
/// lower bound: exact support-point check in the discrete case, density
/// positive near zero in the lognormal case.
fn check_social_mobility(spec: &ModelSpec, notes: &mut Vec<String>) -> bool {
    let p = spec.chain();
    let n = spec.n_states();
    let persistent: Vec<usize> = (0..n).filter(|&z| p.prob(z, z) > 0.0).collect();
    if persistent.is_empty() {
        return false;
    }
    match spec.income() {
        Primitive::Constant { .. } => true,
        Primitive::Lognormal { .. } => {
            notes.push(
                "income has full support on (0, inf); the low-income bound is 0, \
                 where marginal utility diverges"
                    .into(),
            );
            true
        }
        Primitive::Discrete { support } => {
            let mut y_low = f64::INFINITY;
            for points in support {
                for &(x, prob) in points {
                    if prob > 0.0 {
                        y_low = y_low.min(x);
                    }
                }
            }
            persistent
                .iter()
                .any(|&z| support[z].iter().any(|&(x, prob)| x == y_low && prob > 0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn benhabib_spec() -> ModelSpec {
        // Constant discounting, iid positive discrete returns and income.
        ModelSpec::single_state(
            Primitive::Constant { value: 0.92 },
            Primitive::Discrete {
                support: vec![vec![(1.1, 0.5), (0.9, 0.5)]],
            },
            Primitive::Discrete {
                support: vec![vec![(1.0, 0.6), (0.5, 0.4)]],
            },
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn cpm_constant() {
        let p = Primitive::Constant { value: 0.95 };
        assert_relative_eq!(conditional_power_moment(&p, 0, 1.0).unwrap(), 0.95);
    }

    #[test]
    fn cpm_lognormal_square() {
        let p = Primitive::Lognormal {
            location: vec![0.0],
            scale: vec![1.0],
        };
        assert_relative_eq!(
            conditional_power_moment(&p, 0, 2.0).unwrap(),
            (2.0_f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn cpm_discrete_hand_value() {
        let p = Primitive::Discrete {
            support: vec![vec![(2.0, 0.5), (0.5, 0.5)]],
        };
        let v = conditional_power_moment(&p, 0, -0.5).unwrap();
        let expected = 0.5 * 2.0_f64.powf(-0.5) + 0.5 * 0.5_f64.powf(-0.5);
        assert_relative_eq!(v, expected, max_relative = 1e-12);
        assert_relative_eq!(v, 1.060660, max_relative = 1e-6);
    }

    #[test]
    fn cpm_zero_support_negative_power_rejected() {
        let p = Primitive::Discrete {
            support: vec![vec![(0.0, 0.5), (1.0, 0.5)]],
        };
        assert!(matches!(
            conditional_power_moment(&p, 0, -0.5),
            Err(Error::UndefinedMoment(_))
        ));
    }

    #[test]
    fn cpm_order_zero_is_one() {
        let kinds = [
            Primitive::Constant { value: 0.7 },
            Primitive::Lognormal {
                location: vec![0.3],
                scale: vec![0.5],
            },
            Primitive::Discrete {
                support: vec![vec![(1.5, 0.25), (0.5, 0.75)]],
            },
        ];
        for p in kinds {
            assert_relative_eq!(conditional_power_moment(&p, 0, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn marginal_utility_values() {
        assert_relative_eq!(marginal_utility(1.0, 2.0).unwrap(), 0.5);
        assert_relative_eq!(marginal_utility(1.5, 1.0).unwrap(), 1.0);
        assert_relative_eq!(inverse_marginal_utility(2.0, 4.0).unwrap(), 0.5);
        assert!(marginal_utility(1.0, 0.0).is_err());
        assert!(inverse_marginal_utility(1.0, -1.0).is_err());
    }

    #[test]
    fn marginal_utility_round_trip() {
        for gamma in [0.5, 1.0, 1.5, 2.0, 5.0] {
            for c in [0.001, 0.5, 1.0, 7.3, 500.0] {
                let m = marginal_utility(gamma, c).unwrap();
                let back = inverse_marginal_utility(gamma, m).unwrap();
                assert_relative_eq!(back, c, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn report_benhabib_flags_pass() {
        let report = compute_growth_report(&benhabib_spec()).unwrap();
        assert!(report.flags.discount_growth);
        assert!(report.flags.discounted_return_growth);
        assert!(report.flags.income_moments);
        assert!(report.flags.savings_stability);
        assert!(report.flags.social_mobility);
        assert_eq!(report.flags.wealth_growth, None);
        // Constant beta: G_beta equals the constant exactly.
        assert_relative_eq!(report.g_beta, 0.92, epsilon = 1e-12);
    }

    #[test]
    fn report_unit_beta_fails_discount_flag() {
        let spec = ModelSpec::single_state(
            Primitive::Constant { value: 1.0 },
            Primitive::Constant { value: 1.0 },
            Primitive::Constant { value: 1.0 },
            2.0,
        )
        .unwrap();
        let report = compute_growth_report(&spec).unwrap();
        assert!(!report.flags.discount_growth);
        assert_relative_eq!(report.g_beta, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn report_persistent_volatile_discount_fails() {
        // AR(1) discount chain with high persistence and volatility.
        let d = markov::rouwenhorst(15, 0.99, 0.98, 0.02).unwrap();
        let labels = d.states.iter().map(|s| format!("{s:.6}")).collect();
        let spec = ModelSpec::new(
            labels,
            d.transition.clone(),
            Primitive::Discrete {
                support: d.states.iter().map(|&b| vec![(b, 1.0)]).collect(),
            },
            Primitive::Constant { value: 1.0 },
            Primitive::Constant { value: 1.0 },
            2.0,
        )
        .unwrap();
        let report = compute_growth_report(&spec).unwrap();
        assert!(report.g_beta > 1.0);
        assert!(!report.flags.discount_growth);
    }

    #[test]
    fn reduction_identities_iid_constant_beta() {
        // Constant beta and identical rows: G_betaR = beta E R and
        // s_bar = (beta E R^(1-gamma))^(1/gamma).
        let chain = TransitionMatrix::new(&[vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let beta = 0.9;
        let gamma = 2.0;
        let spec = ModelSpec::new(
            vec!["a".into(), "b".into()],
            chain,
            Primitive::Constant { value: beta },
            Primitive::Discrete {
                support: vec![vec![(1.2, 0.4), (0.8, 0.6)], vec![(1.2, 0.4), (0.8, 0.6)]],
            },
            Primitive::Constant { value: 1.0 },
            gamma,
        )
        .unwrap();
        let report = compute_growth_report(&spec).unwrap();
        let e_r = 0.4 * 1.2 + 0.6 * 0.8;
        let e_r_pow = 0.4 * 1.2_f64.powf(1.0 - gamma) + 0.6 * 0.8_f64.powf(1.0 - gamma);
        assert_relative_eq!(report.g_beta, beta, epsilon = 1e-12);
        assert_relative_eq!(report.g_beta_r, beta * e_r, epsilon = 1e-10);
        assert_relative_eq!(report.g_r, e_r, epsilon = 1e-10);
        assert_relative_eq!(
            report.s_bar,
            (beta * e_r_pow).powf(1.0 / gamma),
            epsilon = 1e-10
        );
    }

    #[test]
    fn log_utility_savings_bound_is_max_expected_discount() {
        // gamma = 1 makes R^(1-gamma) = 1, so s_bar = max_z E_z beta'.
        let chain = TransitionMatrix::new(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let spec = ModelSpec::new(
            vec!["lo".into(), "hi".into()],
            chain.clone(),
            Primitive::Discrete {
                support: vec![vec![(0.9, 1.0)], vec![(0.97, 1.0)]],
            },
            Primitive::Constant { value: 1.01 },
            Primitive::Constant { value: 1.0 },
            1.0,
        )
        .unwrap();
        let report = compute_growth_report(&spec).unwrap();
        let e0: f64 = 0.9 * 0.9 + 0.1 * 0.97;
        let e1: f64 = 0.2 * 0.9 + 0.8 * 0.97;
        assert_relative_eq!(report.s_bar, e0.max(e1), epsilon = 1e-12);
    }

    #[test]
    fn jensen_chain_inequality() {
        // For constant beta, iid returns and gamma >= 1:
        // G_betaR <= (beta E R^(1-gamma)) (E R)^gamma.
        for gamma in [1.0, 1.5, 2.0, 3.0] {
            let spec = ModelSpec::single_state(
                Primitive::Constant { value: 0.92 },
                Primitive::Discrete {
                    support: vec![vec![(1.15, 0.3), (0.95, 0.7)]],
                },
                Primitive::Constant { value: 1.0 },
                gamma,
            )
            .unwrap();
            let report = compute_growth_report(&spec).unwrap();
            let e_r: f64 = 0.3 * 1.15 + 0.7 * 0.95;
            let e_r_pow = 0.3 * 1.15_f64.powf(1.0 - gamma) + 0.7 * 0.95_f64.powf(1.0 - gamma);
            assert!(report.g_beta_r <= 0.92 * e_r_pow * e_r.powf(gamma) + 1e-12);
        }
    }

    #[test]
    fn zero_income_atom_fails_moment_flag_without_error() {
        let spec = ModelSpec::single_state(
            Primitive::Constant { value: 0.9 },
            Primitive::Constant { value: 1.0 },
            Primitive::Discrete {
                support: vec![vec![(0.0, 0.5), (1.0, 0.5)]],
            },
            2.0,
        )
        .unwrap();
        let report = compute_growth_report(&spec).unwrap();
        assert_eq!(report.e_uprime_y, None);
        assert!(!report.flags.income_moments);
    }

    #[test]
    fn social_mobility_requires_low_income_at_persistent_state() {
        // Global minimum income (0.4) occurs only at state 1, which has no
        // self transition, so the mixing flag fails.
        let chain = TransitionMatrix::new(&[vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let spec = ModelSpec::new(
            vec!["a".into(), "b".into()],
            chain,
            Primitive::Constant { value: 0.9 },
            Primitive::Constant { value: 1.0 },
            Primitive::Discrete {
                support: vec![vec![(1.0, 1.0)], vec![(0.4, 1.0)]],
            },
            2.0,
        )
        .unwrap();
        let report = compute_growth_report(&spec).unwrap();
        assert!(!report.flags.social_mobility);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = benhabib_spec();
        let text = spec.to_json().unwrap();
        let back = ModelSpec::from_json(&text).unwrap();
        assert_eq!(back.gamma(), spec.gamma());
        assert_eq!(back.beta(), spec.beta());
        assert_eq!(back.ret(), spec.ret());
        assert_eq!(back.income(), spec.income());
    }

    #[test]
    fn spec_rejects_zero_income_everywhere() {
        assert!(ModelSpec::single_state(
            Primitive::Constant { value: 0.9 },
            Primitive::Constant { value: 1.0 },
            Primitive::Constant { value: 0.0 },
            2.0,
        )
        .is_err());
    }

    #[test]
    fn spec_rejects_reducible_chain() {
        let chain = TransitionMatrix::new(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(ModelSpec::new(
            vec!["a".into(), "b".into()],
            chain,
            Primitive::Constant { value: 0.9 },
            Primitive::Constant { value: 1.0 },
            Primitive::Constant { value: 1.0 },
            2.0,
        )
        .is_err());
    }
}
