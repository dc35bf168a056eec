//! Analytic heavy-tailed laws used as test distributions, with their tail
//! functionals: the hazard-based index `α_F`, the fitted Pareto index
//! `θ_t(F)` and the excess-law decomposition of the KL divergence.
//!
//! Every law is implemented on the log scale `z = log x`: it provides the
//! log-survival `log(1 − F(e^z))` and the log-density of `log X`,
//! `log(x f(x))`. Everything else (cdf, pdf, quantiles, `α_F`, excess
//! integrals) is derived from those two functions, which keeps extreme
//! tails (survival probabilities down to 1e-300) representable.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};
use serde::{Deserialize, Serialize};

use crate::divergences::{kl_excess_vs_pareto, kl_raw, ParetoIndex};
use crate::error::{Error, Result};
use crate::estimators::Sample;
use crate::quadrature::{self, ABS_TOL, REL_TOL};
use crate::roots;

/// Parameters of a law, as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LawSpec {
    /// `F(x) = 1 − x^{−1/θ}`, `x ≥ 1`.
    Pareto {
        #[serde(default = "one")]
        theta: f64,
    },
    /// Pareto change-point law: `α_F = θ₁` on `[1, τ)` and `θ₂` on `[τ, ∞)`.
    ParetoChangePoint { theta1: f64, theta2: f64, tau: f64 },
    /// Positive part of the Cauchy law, `F(x) = (2/π) arctan x`.
    #[serde(alias = "positive_cauchy")]
    Cauchy,
    /// `F(x) = G(log x)` with `G` the gamma d.f. of integer shape and given rate.
    #[serde(alias = "log_gamma")]
    Loggamma {
        #[serde(default = "two_u32")]
        shape: u32,
        #[serde(default = "one")]
        rate: f64,
    },
    /// `F(x) = 1 − c x^{−1/β} log x` on `[x₀, ∞)`, with `c = x₀^{1/β} / log x₀`.
    #[serde(alias = "lpp")]
    LogPerturbedPareto {
        #[serde(default = "one")]
        beta: f64,
        #[serde(default = "euler")]
        x0: f64,
    },
    /// `F(x) = 1 − c_β x^{−1/β} − c_γ x^{−1/γ}` on `[x₀, ∞)`, `x₀` solved from `F(x₀) = 0`.
    Hall {
        #[serde(default = "one")]
        beta: f64,
        #[serde(default = "hall_gamma")]
        gamma: f64,
        #[serde(default = "two")]
        c_beta: f64,
        #[serde(default = "minus_one")]
        c_gamma: f64,
    },
    /// Generalised Pareto, `F(x) = 1 − (1 + ξx/σ)^{−1/ξ}`, `x ≥ 0`.
    Gpd {
        #[serde(default = "one")]
        xi: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn two_u32() -> u32 {
    2
}
fn minus_one() -> f64 {
    -1.0
}
fn euler() -> f64 {
    std::f64::consts::E
}
fn hall_gamma() -> f64 {
    0.4
}

impl LawSpec {
    /// Short identifier used in file names.
    pub fn name(&self) -> &'static str {
        match self {
            LawSpec::Pareto { .. } => "pareto",
            LawSpec::ParetoChangePoint { .. } => "pareto_change_point",
            LawSpec::Cauchy => "cauchy",
            LawSpec::Loggamma { .. } => "loggamma",
            LawSpec::LogPerturbedPareto { .. } => "log_perturbed_pareto",
            LawSpec::Hall { .. } => "hall",
            LawSpec::Gpd { .. } => "gpd",
        }
    }
}

/// Parses `name` or `name:key=value,key=value`, e.g. `pareto:theta=2`.
impl FromStr for LawSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p),
            None => (s.trim(), ""),
        };
        let mut map = serde_json::Map::new();
        map.insert("name".into(), name.to_ascii_lowercase().replace('-', "_").into());
        for kv in params.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::argument(format!("law parameter `{kv}` is not of the form key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::argument(format!("law parameter `{k}` has non-numeric value `{v}`")))?;
            let value = if k.trim() == "shape" && v.fract() == 0.0 && v >= 0.0 {
                serde_json::Value::from(v as u64)
            } else {
                serde_json::Value::from(v)
            };
            map.insert(k.trim().to_string(), value);
        }
        serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| Error::argument(format!("unknown or malformed law `{s}`: {e}")))
    }
}

impl fmt::Display for LawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawSpec::Pareto { theta } => write!(f, "pareto:theta={theta}"),
            LawSpec::ParetoChangePoint { theta1, theta2, tau } => {
                write!(f, "pareto_change_point:theta1={theta1},theta2={theta2},tau={tau}")
            }
            LawSpec::Cauchy => write!(f, "cauchy"),
            LawSpec::Loggamma { shape, rate } => write!(f, "loggamma:shape={shape},rate={rate}"),
            LawSpec::LogPerturbedPareto { beta, x0 } => write!(f, "log_perturbed_pareto:beta={beta},x0={x0}"),
            LawSpec::Hall { beta, gamma, c_beta, c_gamma } => {
                write!(f, "hall:beta={beta},gamma={gamma},c_beta={c_beta},c_gamma={c_gamma}")
            }
            LawSpec::Gpd { xi, scale } => write!(f, "gpd:xi={xi},scale={scale}"),
        }
    }
}

/// A validated law with its derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Law {
    spec: LawSpec,
    x0: f64,
    ln_x0: f64,
    // log normalising constant (log-perturbed Pareto) or log((1 − 1/k)!) (log-gamma)
    aux: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::argument(format!("law parameter `{name}` must be positive and finite, got {v}")))
    }
}

/// `log(1 + e^a)` without overflow.
#[inline]
fn softplus(a: f64) -> f64 {
    if a > 35.0 {
        a + (-a).exp()
    } else {
        a.exp().ln_1p()
    }
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

impl Law {
    pub fn new(spec: LawSpec) -> Result<Self> {
        let mut aux = 0.0;
        let x0 = match &spec {
            LawSpec::Pareto { theta } => {
                positive("theta", *theta)?;
                1.0
            }
            LawSpec::ParetoChangePoint { theta1, theta2, tau } => {
                positive("theta1", *theta1)?;
                positive("theta2", *theta2)?;
                if !(tau.is_finite() && *tau >= 1.0) {
                    return Err(Error::argument(format!("change point tau must be ≥ 1, got {tau}")));
                }
                1.0
            }
            LawSpec::Cauchy => 0.0,
            LawSpec::Loggamma { shape, rate } => {
                if *shape == 0 || *shape > 100 {
                    return Err(Error::argument(format!("log-gamma shape must be in 1..=100, got {shape}")));
                }
                positive("rate", *rate)?;
                aux = ln_factorial(shape - 1);
                1.0
            }
            LawSpec::LogPerturbedPareto { beta, x0 } => {
                positive("beta", *beta)?;
                // F is increasing on [x₀, ∞) iff log x₀ ≥ β
                if !(x0.is_finite() && x0.ln() >= *beta * (1.0 - 1e-12)) {
                    return Err(Error::argument(format!(
                        "log-perturbed Pareto needs x0 ≥ e^beta = {}, got {x0}",
                        beta.exp()
                    )));
                }
                aux = x0.ln() / beta - x0.ln().ln();
                *x0
            }
            LawSpec::Hall { beta, gamma, c_beta, c_gamma } => {
                positive("beta", *beta)?;
                positive("gamma", *gamma)?;
                positive("c_beta", *c_beta)?;
                if !(gamma < beta) {
                    return Err(Error::argument(format!("Hall model needs gamma < beta, got {gamma} ≥ {beta}")));
                }
                if !c_gamma.is_finite() || *c_gamma == 0.0 {
                    return Err(Error::argument("Hall model needs a finite non-zero c_gamma"));
                }
                hall_support_left(*beta, *gamma, *c_beta, *c_gamma)?
            }
            LawSpec::Gpd { xi, scale } => {
                positive("xi", *xi)?;
                positive("scale", *scale)?;
                0.0
            }
        };
        Ok(Law { spec, x0, ln_x0: x0.ln(), aux })
    }

    pub fn pareto(theta: f64) -> Result<Self> {
        Law::new(LawSpec::Pareto { theta })
    }

    /// Pareto change point with index `theta1` below `tau` and `theta2` above.
    pub fn pareto_change_point(theta1: f64, theta2: f64, tau: f64) -> Result<Self> {
        Law::new(LawSpec::ParetoChangePoint { theta1, theta2, tau })
    }

    pub fn cauchy() -> Self {
        Law::new(LawSpec::Cauchy).expect("valid")
    }

    /// Log-gamma with rate 1 and shape 2.
    pub fn log_gamma() -> Self {
        Law::new(LawSpec::Loggamma { shape: 2, rate: 1.0 }).expect("valid")
    }

    pub fn log_perturbed_pareto(beta: f64, x0: f64) -> Result<Self> {
        Law::new(LawSpec::LogPerturbedPareto { beta, x0 })
    }

    /// `F(x) = 1 − 2x^{−1} + x^{−2.5}`.
    pub fn hall() -> Self {
        Law::new(LawSpec::Hall { beta: 1.0, gamma: 0.4, c_beta: 2.0, c_gamma: -1.0 }).expect("valid")
    }

    /// `F(x) = 1 − (1 + x)^{−1}`.
    pub fn gpd() -> Self {
        Law::new(LawSpec::Gpd { xi: 1.0, scale: 1.0 }).expect("valid")
    }

    pub fn spec(&self) -> &LawSpec {
        &self.spec
    }

    pub fn name(&self) -> &'static str {
        self.spec.name()
    }

    /// Left end `x₀` of the support.
    pub fn support_left(&self) -> f64 {
        self.x0
    }

    /// Index of regular variation `γ` of the upper tail.
    pub fn tail_index(&self) -> f64 {
        match self.spec {
            LawSpec::Pareto { theta } => theta,
            LawSpec::ParetoChangePoint { theta2, .. } => theta2,
            LawSpec::Cauchy => 1.0,
            LawSpec::Loggamma { rate, .. } => 1.0 / rate,
            LawSpec::LogPerturbedPareto { beta, .. } => beta,
            LawSpec::Hall { beta, .. } => beta,
            LawSpec::Gpd { xi, .. } => xi,
        }
    }

    /// `log(1 − F(e^z))`.
    pub fn ln_sf_log(&self, z: f64) -> f64 {
        if z <= self.ln_x0 {
            return 0.0;
        }
        match self.spec {
            LawSpec::Pareto { theta } => -z / theta,
            LawSpec::ParetoChangePoint { theta1, theta2, tau } => {
                let lt = tau.ln();
                if z < lt {
                    -z / theta1
                } else {
                    -lt / theta1 - (z - lt) / theta2
                }
            }
            // 1 − F = (2/π) arctan(1/x)
            LawSpec::Cauchy => FRAC_2_PI.ln() + (-z).exp().atan().ln(),
            LawSpec::Loggamma { shape, rate } => {
                // Erlang survival: e^{−y} Σ_{k<a} y^k / k!
                let y = rate * z;
                let ln_y = y.ln();
                let terms = (0..shape).map(|k| k as f64 * ln_y - ln_factorial(k));
                -y + log_sum_exp(terms)
            }
            LawSpec::LogPerturbedPareto { beta, .. } => self.aux - z / beta + z.ln(),
            LawSpec::Hall { beta, gamma, c_beta, c_gamma } => {
                let d = 1.0 / gamma - 1.0 / beta;
                c_beta.ln() - z / beta + ((c_gamma / c_beta) * (-z * d).exp()).ln_1p()
            }
            LawSpec::Gpd { xi, scale } => -softplus(xi.ln() + z - scale.ln()) / xi,
        }
    }

    /// Log-density of `log X` at `z`, i.e. `log(x f(x))` at `x = e^z`.
    pub fn ln_density_log(&self, z: f64) -> f64 {
        if z < self.ln_x0 {
            return f64::NEG_INFINITY;
        }
        match self.spec {
            LawSpec::Pareto { theta } => -theta.ln() - z / theta,
            LawSpec::ParetoChangePoint { theta1, theta2, tau } => {
                let th = if z < tau.ln() { theta1 } else { theta2 };
                self.ln_sf_log(z) - th.ln()
            }
            // x f(x) = (2/π) / (x + 1/x)
            LawSpec::Cauchy => FRAC_2_PI.ln() - z.abs() - (-2.0 * z.abs()).exp().ln_1p(),
            LawSpec::Loggamma { shape, rate } => {
                let a = shape as f64;
                let pow = if shape == 1 { 0.0 } else { (a - 1.0) * z.ln() };
                a * rate.ln() + pow - rate * z - self.aux
            }
            LawSpec::LogPerturbedPareto { beta, .. } => self.aux - z / beta + (z / beta - 1.0).ln(),
            LawSpec::Hall { beta, gamma, c_beta, c_gamma } => {
                let d = 1.0 / gamma - 1.0 / beta;
                let r = (c_gamma / gamma) / (c_beta / beta);
                (c_beta / beta).ln() - z / beta + (r * (-z * d).exp()).ln_1p()
            }
            LawSpec::Gpd { xi, scale } => z - scale.ln() - (1.0 / xi + 1.0) * softplus(xi.ln() + z - scale.ln()),
        }
    }

    /// `1 − F(x)`.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= self.x0 {
            1.0
        } else {
            self.ln_sf_log(x.ln()).exp()
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.x0 {
            return 0.0;
        }
        -self.ln_sf_log(x.ln()).exp_m1()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.x0 || x <= 0.0 {
            return 0.0;
        }
        self.ln_density_log(x.ln()).exp() / x
    }

    /// `α_F(x) = (1 − F(x)) / (x f(x))`.
    pub fn alpha(&self, x: f64) -> Result<f64> {
        if !(x > self.x0 && x.is_finite()) {
            return Err(Error::domain(format!("alpha_F needs x in the open support ({}, ∞), got {x}", self.x0)));
        }
        let z = x.ln();
        let v = match self.spec {
            LawSpec::Pareto { theta } => theta,
            LawSpec::LogPerturbedPareto { beta, .. } => beta / (1.0 - beta / z),
            LawSpec::Hall { beta, gamma, c_beta, c_gamma } => {
                let (sb, sg) = (c_beta * (-z / beta).exp(), c_gamma * (-z / gamma).exp());
                (sb + sg) / (sb / beta + sg / gamma)
            }
            _ => (self.ln_sf_log(z) - self.ln_density_log(z)).exp(),
        };
        Ok(v)
    }

    pub(crate) fn check_threshold(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t >= self.x0 && t.is_finite()) {
            return Err(Error::domain(format!(
                "threshold {t} outside the support [{}, ∞) of {}",
                self.x0,
                self.name()
            )));
        }
        if self.ln_sf_log(t.ln()) == f64::NEG_INFINITY {
            return Err(Error::domain(format!("threshold {t} has zero survival probability")));
        }
        Ok(())
    }

    /// Upper quantile: the `x` with `1 − F(x) = s`, `0 < s < 1`.
    pub fn quantile_sf(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::argument(format!("survival probability must lie in (0, 1), got {s}")));
        }
        let x = match self.spec {
            LawSpec::Pareto { theta } => (-theta * s.ln()).exp(),
            LawSpec::ParetoChangePoint { theta1, theta2, tau } => {
                let s_tau = tau.powf(-1.0 / theta1);
                if s > s_tau {
                    s.powf(-theta1)
                } else {
                    tau * (s / s_tau).powf(-theta2)
                }
            }
            LawSpec::Cauchy => 1.0 / (0.5 * PI * s).tan(),
            LawSpec::Gpd { xi, scale } => scale * (-xi * s.ln()).exp_m1() / xi,
            _ => self.invert_sf(s)?,
        };
        Ok(x)
    }

    /// `F^{-1}(p)`, `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::argument(format!("probability must lie in (0, 1), got {p}")));
        }
        self.quantile_sf(1.0 - p)
    }

    fn invert_sf(&self, s: f64) -> Result<f64> {
        let target = s.ln();
        let f = |z: f64| {
            let ln_sf = self.ln_sf_log(z);
            let d = -(self.ln_density_log(z) - ln_sf).exp();
            (ln_sf - target, d)
        };
        let lo = self.ln_x0;
        let hint = lo + self.tail_index() * (-target) + 1.0;
        let z = roots::solve_decreasing(f, lo, hint)?;
        Ok(z.exp())
    }

    /// One draw. Survival probabilities are drawn uniformly on (0, 1) and
    /// inverted, except for log-gamma which exponentiates a gamma variate.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.spec {
            LawSpec::Loggamma { shape, rate } => {
                let g = Gamma::new(shape as f64, 1.0 / rate).expect("validated parameters");
                let x = g.sample(rng).exp();
                // a zero gamma variate maps onto the support boundary
                if x > 1.0 {
                    x
                } else {
                    f64::from_bits(1.0f64.to_bits() + 1)
                }
            }
            _ => {
                let s: f64 = Open01.sample(rng);
                self.quantile_sf(s).expect("numeric inversion failed inside the support")
            }
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sample> {
        if n == 0 {
            return Err(Error::argument("sample size must be at least 1"));
        }
        let values: Vec<f64> = (0..n).map(|_| self.draw(rng)).collect();
        Sample::new(values)
    }

    /// Log-excess density `log g(y)` over the threshold `t` (pre-validated).
    fn ln_excess_density(&self, ln_t: f64, ln_sf_t: f64, y: f64) -> f64 {
        self.ln_density_log(ln_t + y) - ln_sf_t
    }

    /// Fitted Pareto index `θ_t(F) = ∫_t^∞ log(x/t) F(dx) / (1 − F(t))` by quadrature.
    pub fn theta_fit(&self, t: f64) -> Result<ParetoIndex> {
        self.check_threshold(t)?;
        let (lt, ls) = (t.ln(), self.ln_sf_log(t.ln()));
        let integrand = |y: f64| {
            let lg = self.ln_excess_density(lt, ls, y);
            if lg < -745.0 {
                0.0
            } else {
                y * lg.exp()
            }
        };
        let q = quadrature::integrate_half_line(integrand, ABS_TOL, REL_TOL)?;
        ParetoIndex::new(q.value)
    }

    /// `θ_t(F)` as the `F_t`-mean of `α_F`, i.e. `∫_0^∞ (1 − F(t e^y)) / (1 − F(t)) dy`.
    pub fn theta_fit_mean_alpha(&self, t: f64) -> Result<ParetoIndex> {
        self.check_threshold(t)?;
        let (lt, ls) = (t.ln(), self.ln_sf_log(t.ln()));
        let integrand = |y: f64| {
            let l = self.ln_sf_log(lt + y) - ls;
            if l < -745.0 {
                0.0
            } else {
                l.exp()
            }
        };
        let q = quadrature::integrate_half_line(integrand, ABS_TOL, REL_TOL)?;
        ParetoIndex::new(q.value)
    }

    /// Closed-form `θ_t(F)` where one is known (Pareto, log-perturbed Pareto, Hall).
    pub fn theta_fit_closed(&self, t: f64) -> Option<f64> {
        if self.check_threshold(t).is_err() {
            return None;
        }
        match self.spec {
            LawSpec::Pareto { theta } => Some(theta),
            LawSpec::LogPerturbedPareto { beta, .. } => Some(beta * (1.0 + beta / t.ln())),
            LawSpec::Hall { beta, gamma, c_beta, c_gamma } => {
                let (sb, sg) = (c_beta * t.powf(-1.0 / beta), c_gamma * t.powf(-1.0 / gamma));
                Some((beta * sb + gamma * sg) / (sb + sg))
            }
            _ => None,
        }
    }

    /// Plug-in approximation `θ_{X_{n,k}}(F) ≈ (1/k) Σ_{i≤k} α_F(X_{n,i})`.
    pub fn theta_fit_empirical(&self, sample: &Sample, k: usize) -> Result<ParetoIndex> {
        if k == 0 || k > sample.len() {
            return Err(Error::argument(format!("k must lie in 1..={}, got {k}", sample.len())));
        }
        let mut sum = 0.0;
        for &x in &sample.sorted_desc()[..k] {
            sum += self.alpha(x)?;
        }
        ParetoIndex::new(sum / k as f64)
    }

    /// `(K(F_t, P_θ), K(F_t, P_{θ_t(F)}), K(θ_t(F), θ))`; the first equals
    /// the sum of the other two.
    pub fn decomposition_check(&self, t: f64, theta: ParetoIndex) -> Result<(f64, f64, f64)> {
        let fitted = self.theta_fit(t)?;
        let total = kl_excess_vs_pareto(self, t, theta)?.get();
        let projection = kl_excess_vs_pareto(self, t, fitted)?.get();
        Ok((total, projection, kl_raw(fitted.get(), theta.get())))
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Left end of the Hall support: the point where `1 − F = 1` on the
/// branch where `1 − F` is decreasing.
fn hall_support_left(beta: f64, gamma: f64, c_beta: f64, c_gamma: f64) -> Result<f64> {
    let ln_s = |z: f64| {
        let (sb, sg) = (c_beta * (-z / beta).exp(), c_gamma * (-z / gamma).exp());
        let s = sb + sg;
        let ds = -(sb / beta + sg / gamma);
        (s.ln(), ds / s)
    };
    // with c_gamma < 0 the survival function rises to a maximum first
    let z_start = if c_gamma < 0.0 {
        let d = 1.0 / gamma - 1.0 / beta;
        -((-c_beta * gamma) / (c_gamma * beta)).ln() / d
    } else {
        // both terms decrease; walk left until 1 − F exceeds 1
        let mut z = 0.0;
        while ln_s(z).0 < 0.0 {
            z -= 1.0;
            if z < -1e3 {
                return Err(Error::argument("Hall model: could not locate the support"));
            }
        }
        z
    };
    let (v, _) = ln_s(z_start);
    if !(v >= 0.0) {
        return Err(Error::argument(format!(
            "Hall model never reaches F = 0 on its decreasing branch (max 1 − F = {})",
            v.exp()
        )));
    }
    let z0 = roots::solve_decreasing(ln_s, z_start, z_start + 1.0)?;
    Ok(z0.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn all_laws() -> Vec<Law> {
        vec![
            Law::pareto(1.0).unwrap(),
            Law::pareto(2.5).unwrap(),
            Law::pareto_change_point(3.0, 1.0, 1000.0).unwrap(),
            Law::cauchy(),
            Law::log_gamma(),
            Law::log_perturbed_pareto(1.0, E).unwrap(),
            Law::hall(),
            Law::gpd(),
        ]
    }

    #[test]
    fn closed_inverse_examples() {
        assert!((Law::pareto(1.0).unwrap().quantile(0.75).unwrap() - 4.0).abs() < 1e-12);
        assert!((Law::gpd().quantile(0.9).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn hall_support_left_end() {
        // bisection oracle on 2x^{-1} − x^{-2.5} = 1, decreasing branch x > 1.25^{2/3}
        let h = |x: f64| 2.0 / x - x.powf(-2.5) - 1.0;
        let (mut lo, mut hi) = (1.25f64.powf(2.0 / 3.0), 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let x0 = Law::hall().support_left();
        assert!((x0 - lo).abs() < 1e-10, "{x0} vs {lo}");
        assert!((x0 - 1.389).abs() < 1e-3);
        assert!(Law::hall().cdf(x0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_quantile_cdf() {
        for law in all_laws() {
            let lo = law.support_left().max(1e-3);
            for i in 1..60 {
                let x = lo * (1.0 + 1e-3) * 10f64.powf(i as f64 * 0.2);
                let s = law.sf(x);
                if s <= 1e-300 || s >= 1.0 {
                    continue;
                }
                let back = law.quantile_sf(s).unwrap();
                assert!(((back - x) / x).abs() < 1e-9, "{}: x={x} back={back}", law.name());
            }
        }
    }

    #[test]
    fn density_integrates_to_one() {
        for law in all_laws() {
            let lz0 = law.support_left().max(1e-12).ln();
            let q = quadrature::integrate_half_line(
                |y| {
                    let v = law.ln_density_log(lz0 + y);
                    if v < -745.0 {
                        0.0
                    } else {
                        v.exp()
                    }
                },
                1e-10,
                1e-10,
            )
            .unwrap();
            // Cauchy and GPD have mass below x = 1e-12 ≈ 0
            assert!((q.value - law.sf(lz0.exp())).abs() < 1e-7, "{}: {}", law.name(), q.value);
        }
    }

    #[test]
    fn alpha_examples() {
        let p2 = Law::pareto(2.0).unwrap();
        for &x in &[1.5, 10.0, 1e6] {
            assert!((p2.alpha(x).unwrap() - 2.0).abs() < 1e-12);
        }
        let lpp = Law::log_perturbed_pareto(1.0, E).unwrap();
        assert!((lpp.alpha(E * E).unwrap() - 2.0).abs() < 1e-12);
        let gpd = Law::gpd();
        for &x in &[0.5, 3.0, 1e3] {
            assert!((gpd.alpha(x).unwrap() - (1.0 + x) / x).abs() < 1e-10);
        }
        assert!(gpd.alpha(-1.0).is_err());
        // closed forms agree with the generic S/(x f)
        let hall = Law::hall();
        for &x in &[2.0f64, 20.0, 500.0] {
            let generic = (hall.ln_sf_log(x.ln()) - hall.ln_density_log(x.ln())).exp();
            assert!((hall.alpha(x).unwrap() - generic).abs() < 1e-10);
            let generic = (lpp.ln_sf_log(x.ln() + 1.0) - lpp.ln_density_log(x.ln() + 1.0)).exp();
            assert!((lpp.alpha((x.ln() + 1.0).exp()).unwrap() - generic).abs() < 1e-9);
        }
    }

    #[test]
    fn theta_fit_examples() {
        let p = Law::pareto(1.7).unwrap();
        assert!((p.theta_fit(4.0).unwrap().get() - 1.7).abs() < 1e-8);
        let lpp = Law::log_perturbed_pareto(1.0, E).unwrap();
        assert!((lpp.theta_fit(E * E).unwrap().get() - 1.5).abs() < 1e-8);
        assert_eq!(lpp.theta_fit_closed(E * E), Some(1.5));
        let hall = Law::hall();
        let closed = (2.0 * 50f64.powf(-1.0) - 0.4 * 50f64.powf(-2.5)) / (2.0 * 50f64.powf(-1.0) - 50f64.powf(-2.5));
        assert!((hall.theta_fit(50.0).unwrap().get() - closed).abs() < 1e-6);
        assert!((hall.theta_fit_closed(50.0).unwrap() - closed).abs() < 1e-14);
    }

    #[test]
    fn theta_fit_matches_derived_closed_forms() {
        // log-gamma(2, 1): θ_t = 1 + 1/(1 + log t); GPD: θ_t = (1 + t) log((1 + t)/t)
        let lg = Law::log_gamma();
        let gpd = Law::gpd();
        for &t in &[1.5, 10.0, 1e3, 1e6] {
            let a = lg.theta_fit(t).unwrap().get();
            assert!((a - (1.0 + 1.0 / (1.0 + t.ln()))).abs() < 1e-8, "{t}: {a}");
            let b = gpd.theta_fit(t).unwrap().get();
            assert!((b - (1.0 + t) * (1.0 / t).ln_1p()).abs() < 1e-8, "{t}: {b}");
        }
    }

    #[test]
    fn theta_fit_empirical_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Law::pareto(1.3).unwrap();
        let s = p.sample(50, &mut rng).unwrap();
        assert!((p.theta_fit_empirical(&s, 20).unwrap().get() - 1.3).abs() < 1e-12);
        // GPD α(x) = (1 + x)/x on a 3-point sample, k = n − 1 = 2
        let s = Sample::new(vec![1.0, 3.0, 0.5]).unwrap();
        let v = Law::gpd().theta_fit_empirical(&s, 2).unwrap().get();
        assert!((v - 0.5 * (4.0 / 3.0 + 2.0)).abs() < 1e-12);
        // order statistic outside the support
        let s = Sample::new(vec![0.5, 3.0]).unwrap();
        assert!(p.theta_fit_empirical(&s, 2).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let p = Law::pareto(1.0).unwrap();
        let (a, b, c) = p.decomposition_check(3.0, ParetoIndex::new(1.6).unwrap()).unwrap();
        assert!(b.abs() < 1e-8);
        assert!((a - kl_raw(1.0, 1.6)).abs() < 1e-8);
        assert!((a - b - c).abs() < 2e-8);
        let gpd = Law::gpd();
        let (a, b, c) = gpd.decomposition_check(5.0, ParetoIndex::new(1.3).unwrap()).unwrap();
        assert!((a - b - c).abs() < 2e-8, "{a} {b} {c}");
        let fitted = gpd.theta_fit(5.0).unwrap();
        let (a, b, c) = gpd.decomposition_check(5.0, fitted).unwrap();
        assert_eq!(c, 0.0);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn law_spec_parsing() {
        assert_eq!("cauchy".parse::<LawSpec>().unwrap(), LawSpec::Cauchy);
        assert_eq!("pareto:theta=2".parse::<LawSpec>().unwrap(), LawSpec::Pareto { theta: 2.0 });
        assert_eq!("loggamma".parse::<LawSpec>().unwrap(), LawSpec::Loggamma { shape: 2, rate: 1.0 });
        assert_eq!(
            "hall".parse::<LawSpec>().unwrap(),
            LawSpec::Hall { beta: 1.0, gamma: 0.4, c_beta: 2.0, c_gamma: -1.0 }
        );
        assert!("weibull".parse::<LawSpec>().is_err());
        assert!("pareto:theta".parse::<LawSpec>().is_err());
        for law in all_laws() {
            let back: LawSpec = law.spec().to_string().parse().unwrap();
            assert_eq!(&back, law.spec());
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Law::pareto(0.0).is_err());
        assert!(Law::log_perturbed_pareto(1.0, 2.0).is_err());
        assert!(Law::new(LawSpec::Hall { beta: 0.4, gamma: 1.0, c_beta: 2.0, c_gamma: -1.0 }).is_err());
        assert!(Law::new(LawSpec::Loggamma { shape: 0, rate: 1.0 }).is_err());
    }

    #[test]
    fn samples_are_deterministic_and_in_support() {
        for law in all_laws() {
            let a = law.sample(200, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
            let b = law.sample(200, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
            assert_eq!(a.values(), b.values());
            assert!(a.values().iter().all(|&x| x >= law.support_left()));
        }
    }
}
