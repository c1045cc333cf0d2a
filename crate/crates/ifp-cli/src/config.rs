//! Config document: either an explicit model or a parametric template.
//!
//! Templates keep the sweepable scalars upstream of discretization, so a
//! parameter sweep can re-discretize the affected chains cell by cell.

use serde::{Deserialize, Serialize};

use ifp::error::{Error, Result};
use ifp::markov::{self, TransitionMatrix};
use ifp::model::{ModelSpec, Primitive};

/// Top-level config document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<Template>,
}

impl ConfigDoc {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::SchemaViolation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let doc: ConfigDoc = serde_json::from_str(&text)
            .map_err(|e| Error::SchemaViolation(format!("config {}: {e}", path.display())))?;
        if doc.model.is_some() == doc.template.is_some() {
            return Err(Error::SchemaViolation(
                "config must contain exactly one of \"model\" or \"template\"".into(),
            ));
        }
        Ok(doc)
    }

    /// Materialize the model, discretizing template chains if needed.
    pub fn build_model(&self) -> Result<ModelSpec> {
        match (&self.model, &self.template) {
            (Some(m), None) => Ok(m.clone()),
            (None, Some(t)) => t.build(),
            _ => unreachable!("validated at load"),
        }
    }

    pub fn template_mut(&mut self) -> Result<&mut Template> {
        self.template.as_mut().ok_or_else(|| {
            Error::SchemaViolation("this command needs a config with a \"template\" section".into())
        })
    }
}

/// Primitive specified without reference to a particular state count;
/// broadcast over the discretized chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StatelessPrimitive {
    Constant { value: f64 },
    Lognormal { location: f64, scale: f64 },
    Discrete { support: Vec<(f64, f64)> },
}

impl StatelessPrimitive {
    fn broadcast(&self, n: usize) -> Primitive {
        match self {
            StatelessPrimitive::Constant { value } => Primitive::Constant { value: *value },
            StatelessPrimitive::Lognormal { location, scale } => Primitive::Lognormal {
                location: vec![*location; n],
                scale: vec![*scale; n],
            },
            StatelessPrimitive::Discrete { support } => Primitive::Discrete {
                support: vec![support.clone(); n],
            },
        }
    }
}

/// AR(1) block in innovation form:
/// x' = (1 - rho) mean + rho x + delta * N(0,1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ar1Block {
    pub mean: f64,
    pub rho: f64,
    pub delta: f64,
    /// Node count; 1 collapses the block to its stationary mean.
    pub n: usize,
}

impl Ar1Block {
    fn stationary_std(&self) -> f64 {
        self.delta / (1.0 - self.rho * self.rho).sqrt()
    }

    /// Discretize by Rouwenhorst; a single node is the stationary mean.
    fn discretize(&self) -> Result<(Vec<f64>, TransitionMatrix)> {
        if self.n == 1 {
            return Ok((vec![self.mean], TransitionMatrix::new(&[vec![1.0]])?));
        }
        let d = markov::rouwenhorst(self.n, self.mean, self.rho, self.stationary_std())?;
        Ok((d.states, d.transition))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Template {
    /// The discount factor equals the discretized AR(1) state; the target
    /// stationary distribution of the state is N(mu, sigma^2).
    Ar1Discount {
        n_states: usize,
        mu: f64,
        rho: f64,
        sigma: f64,
        ret: StatelessPrimitive,
        income: StatelessPrimitive,
        gamma: f64,
    },
    /// log R = mu_t + sigma_t * N(0,1), with mu_t an AR(1) level chain and
    /// log sigma_t an AR(1) chain, discretized into a product state space.
    ReturnProduct {
        beta: f64,
        gamma: f64,
        mu: Ar1Block,
        log_sigma: Ar1Block,
        income: StatelessPrimitive,
    },
}

impl Template {
    pub fn build(&self) -> Result<ModelSpec> {
        match self {
            Template::Ar1Discount {
                n_states,
                mu,
                rho,
                sigma,
                ret,
                income,
                gamma,
            } => {
                let d = markov::rouwenhorst(*n_states, *mu, *rho, *sigma)?;
                let n = d.states.len();
                let labels = d.states.iter().map(|b| format!("beta={b:.6}")).collect();
                let beta = Primitive::Discrete {
                    support: d.states.iter().map(|&b| vec![(b, 1.0)]).collect(),
                };
                ModelSpec::new(
                    labels,
                    d.transition,
                    beta,
                    ret.broadcast(n),
                    income.broadcast(n),
                    *gamma,
                )
            }
            Template::ReturnProduct {
                beta,
                gamma,
                mu,
                log_sigma,
                income,
            } => {
                let (mu_states, mu_p) = mu.discretize()?;
                // sigma enters in logs; a single node is the stationary
                // mean of sigma itself, exp(mean + var/2).
                let (sig_states, sig_p) = if log_sigma.n == 1 {
                    let var = log_sigma.stationary_std().powi(2);
                    (
                        vec![(log_sigma.mean + var / 2.0).exp()],
                        TransitionMatrix::new(&[vec![1.0]])?,
                    )
                } else {
                    let (logs, p) = log_sigma.discretize()?;
                    (logs.iter().map(|l| l.exp()).collect(), p)
                };
                let n_mu = mu_states.len();
                let n_sig = sig_states.len();
                let n = n_mu * n_sig;

                let mut rows = vec![vec![0.0; n]; n];
                let mut labels = Vec::with_capacity(n);
                let mut location = Vec::with_capacity(n);
                let mut scale = Vec::with_capacity(n);
                for i in 0..n_mu {
                    for j in 0..n_sig {
                        labels.push(format!("mu={:.6},sigma={:.6}", mu_states[i], sig_states[j]));
                        location.push(mu_states[i]);
                        scale.push(sig_states[j]);
                        for i2 in 0..n_mu {
                            for j2 in 0..n_sig {
                                rows[i * n_sig + j][i2 * n_sig + j2] =
                                    mu_p.prob(i, i2) * sig_p.prob(j, j2);
                            }
                        }
                    }
                }
                ModelSpec::new(
                    labels,
                    TransitionMatrix::new(&rows)?,
                    Primitive::Constant { value: *beta },
                    Primitive::Lognormal { location, scale },
                    income.broadcast(n),
                    *gamma,
                )
            }
        }
    }

    /// Names accepted by [`Template::set_param`].
    pub fn parameter_names(&self) -> Vec<&'static str> {
        match self {
            Template::Ar1Discount { .. } => vec!["mu", "rho", "sigma", "gamma"],
            Template::ReturnProduct { .. } => vec![
                "beta",
                "gamma",
                "mu_bar",
                "rho_mu",
                "delta_mu",
                "sigma_bar",
                "rho_sigma",
                "delta_sigma",
            ],
        }
    }

    /// Overwrite one sweepable scalar slot.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match self {
            Template::Ar1Discount {
                mu,
                rho,
                sigma,
                gamma,
                ..
            } => match name {
                "mu" => *mu = value,
                "rho" => *rho = value,
                "sigma" => *sigma = value,
                "gamma" => *gamma = value,
                _ => return Err(unknown_param(name, self.parameter_names())),
            },
            Template::ReturnProduct {
                beta,
                gamma,
                mu,
                log_sigma,
                ..
            } => match name {
                "beta" => *beta = value,
                "gamma" => *gamma = value,
                "mu_bar" => mu.mean = value,
                "rho_mu" => mu.rho = value,
                "delta_mu" => mu.delta = value,
                "sigma_bar" => log_sigma.mean = value,
                "rho_sigma" => log_sigma.rho = value,
                "delta_sigma" => log_sigma.delta = value,
                _ => return Err(unknown_param(name, self.parameter_names())),
            },
        }
        Ok(())
    }
}

fn unknown_param(name: &str, known: Vec<&'static str>) -> Error {
    Error::SchemaViolation(format!(
        "unknown sweep parameter \"{name}\"; this template accepts: {}",
        known.join(", ")
    ))
}
