//! Closed-form fatigue-life relations.
//!
//! Stress-life: the Basquin power law `σ = c·N^m` (fitted by least squares
//! in log-log space), the Stromeyer endurance-limit variant and the Walker
//! equivalent stress. Strain-life and critical-plane: Coffin–Manson,
//! Smith–Watson–Topper, the SWT critical-plane form, Fatemi–Socie and Xue.
//! The strain-life relations only have a forward form; [`solve_life`] inverts
//! any of them numerically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhysicsError {
    #[error("degenerate Basquin fit: need at least 2 distinct stresses and 2 distinct cycle counts ({distinct_stress} stresses, {distinct_cycles} cycle counts)")]
    DegenerateFit { distinct_stress: usize, distinct_cycles: usize },
    #[error("non-positive input at point {index}: stress {stress}, cycles {cycles}")]
    NonPositiveInput { index: usize, stress: f64, cycles: f64 },
    #[error("Basquin exponent is zero; life is undefined")]
    ZeroExponent,
    #[error("stress must be positive, got {0}")]
    NonPositiveStress(f64),
    #[error("stress ratio R = {0} must be < 1")]
    InvalidRatio(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("life must be positive, got {0}")]
    NonPositiveLife(f64),
    #[error("target {target} lies outside the bracket range [{low}, {high}]")]
    NoRoot { target: f64, low: f64, high: f64 },
    #[error("model is not decreasing across the bracket (f(n_lo) = {at_lo}, f(n_hi) = {at_hi})")]
    NonMonotone { at_lo: f64, at_hi: f64 },
}

/// Fitted Basquin relation `σ = c·N^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasquinFit {
    /// Stress coefficient (MPa).
    pub c: f64,
    /// Exponent; negative for physical S-N curves.
    pub m: f64,
    pub n_points: usize,
    /// Coefficient of determination of the log-log regression.
    pub r2_loglog: f64,
}

impl BasquinFit {
    /// S-N curves decrease; a non-negative exponent is kept but flagged.
    pub fn is_physical(&self) -> bool {
        self.m < 0.0
    }

    pub fn stress_at(&self, cycles: f64) -> f64 {
        self.c * cycles.powf(self.m)
    }

    /// Constants of the equivalent life law `N = A·σ^(-B)`.
    pub fn life_law_constants(&self) -> (f64, f64) {
        (self.c.powf(-1.0 / self.m), -1.0 / self.m)
    }
}

fn count_distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Ordinary least squares of `ln σ = ln c + m·ln N` over `(stress, cycles)`
/// pairs.
pub fn basquin_fit(points: &[(f64, f64)]) -> Result<BasquinFit, PhysicsError> {
    for (index, &(stress, cycles)) in points.iter().enumerate() {
        if !(stress > 0.0 && cycles > 0.0) || !stress.is_finite() || !cycles.is_finite() {
            return Err(PhysicsError::NonPositiveInput { index, stress, cycles });
        }
    }
    let distinct_stress = count_distinct(points.iter().map(|p| p.0));
    let distinct_cycles = count_distinct(points.iter().map(|p| p.1));
    if distinct_stress < 2 || distinct_cycles < 2 {
        return Err(PhysicsError::DegenerateFit { distinct_stress, distinct_cycles });
    }

    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - x_bar, y - y_bar);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let m = sxy / sxx;
    let ln_c = y_bar - m * x_bar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (ln_c + m * x);
            r * r
        })
        .sum();
    Ok(BasquinFit {
        c: ln_c.exp(),
        m,
        n_points: points.len(),
        r2_loglog: 1.0 - ss_res / syy,
    })
}

/// Cycles to failure at `stress`: `N = (σ / c)^(1/m)`.
pub fn basquin_life(fit: &BasquinFit, stress: f64) -> Result<f64, PhysicsError> {
    if fit.m == 0.0 {
        return Err(PhysicsError::ZeroExponent);
    }
    if !(stress > 0.0) {
        return Err(PhysicsError::NonPositiveStress(stress));
    }
    Ok((stress / fit.c).powf(1.0 / fit.m))
}

/// Walker mean-stress correction inputs. At least one of `sigma_max` and
/// `sigma_a` must be set; when both are, they must satisfy
/// `σ_a = σ_max·(1 − R)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkerParams {
    pub gamma: f64,
    pub sigma_max: Option<f64>,
    pub sigma_a: Option<f64>,
    pub r_ratio: f64,
}

const WALKER_CONSISTENCY_RTOL: f64 = 1e-9;

impl WalkerParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.r_ratio < 1.0) {
            return Err(PhysicsError::InvalidRatio(self.r_ratio));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(PhysicsError::InvalidParameter {
                name: "gamma",
                reason: format!("{} not in [0, 1]", self.gamma),
            });
        }
        match (self.sigma_max, self.sigma_a) {
            (None, None) => Err(PhysicsError::MissingParameter("sigma_max or sigma_a".into())),
            (Some(max), Some(amp)) => {
                let implied = max * (1.0 - self.r_ratio) / 2.0;
                if (amp - implied).abs() > WALKER_CONSISTENCY_RTOL * amp.abs().max(implied.abs()) {
                    Err(PhysicsError::InvalidParameter {
                        name: "sigma_a",
                        reason: format!("{amp} inconsistent with sigma_max·(1−R)/2 = {implied}"),
                    })
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn half_range(&self) -> f64 {
        (1.0 - self.r_ratio) / 2.0
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max.unwrap_or_else(|| self.sigma_a.unwrap_or(f64::NAN) / self.half_range())
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_a.unwrap_or_else(|| self.sigma_max.unwrap_or(f64::NAN) * self.half_range())
    }
}

/// `σ_eq = σ_max·((1 − R)/2)^γ`.
pub fn walker_equivalent_stress(p: &WalkerParams) -> Result<f64, PhysicsError> {
    p.validate()?;
    Ok(p.sigma_max() * p.half_range().powf(p.gamma))
}

/// The amplitude form `σ_a·(2/(1 − R))^(1−γ)`; agrees with
/// [`walker_equivalent_stress`] up to rounding.
pub fn walker_equivalent_stress_from_amplitude(p: &WalkerParams) -> Result<f64, PhysicsError> {
    p.validate()?;
    Ok(p.sigma_a() * (1.0 / p.half_range()).powf(1.0 - p.gamma))
}

/// Forward life models. Each variant evaluates the right-hand side of its
/// relation at a given life.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LifeModelSpec {
    /// `σ = σ_f + c·N^m`
    Stromeyer { sigma_f: f64, c: f64, m: f64 },
    /// `Δε = (σ_sc/E)(2N)^b + ε_f(2N)^c`
    CoffinManson { sigma_sc: f64, e_mod: f64, eps_f: f64, b: f64, c_exp: f64 },
    /// `ε_a·σ_a = ((σ_sc/E)(2N)^b + ε_f(2N)^c)·σ_a`
    Swt { sigma_sc: f64, e_mod: f64, eps_f: f64, b: f64, c_exp: f64, sigma_a: f64 },
    /// `σ_max·Δε/2 = (σ_f'²/E)(2N)^b + σ_sc·ε_f(2N)^(b+c)`
    SwtCriticalPlane { sigma_f_prime: f64, e_mod: f64, sigma_sc: f64, eps_f: f64, b: f64, c_exp: f64 },
    /// `(τ_f'/G)(2N)^b0 + γ_f'(2N)^c0`
    FatemiSocie { tau_f_prime: f64, g_mod: f64, gamma_f_prime: f64, b0: f64, c0: f64 },
    /// `(τ_f'/G)(2N)^(2·b0) + γ_f'(2N)^(b0+c0)`
    Xue { tau_f_prime: f64, g_mod: f64, gamma_f_prime: f64, b0: f64, c0: f64 },
}

fn positive(name: &'static str, v: f64) -> Result<(), PhysicsError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(PhysicsError::InvalidParameter { name, reason: format!("must be positive, got {v}") })
    }
}

impl LifeModelSpec {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        match *self {
            LifeModelSpec::Stromeyer { .. } => Ok(()),
            LifeModelSpec::CoffinManson { e_mod, .. }
            | LifeModelSpec::Swt { e_mod, .. }
            | LifeModelSpec::SwtCriticalPlane { e_mod, .. } => positive("e_mod", e_mod),
            LifeModelSpec::FatemiSocie { g_mod, .. } | LifeModelSpec::Xue { g_mod, .. } => {
                positive("g_mod", g_mod)
            }
        }
    }

    /// True when every exponent is negative, the regime in which the
    /// right-hand side is strictly decreasing in life (given non-negative
    /// coefficients).
    pub fn is_decreasing_regime(&self) -> bool {
        match *self {
            LifeModelSpec::Stromeyer { c, m, .. } => c > 0.0 && m < 0.0,
            LifeModelSpec::CoffinManson { b, c_exp, .. }
            | LifeModelSpec::Swt { b, c_exp, .. }
            | LifeModelSpec::SwtCriticalPlane { b, c_exp, .. } => b < 0.0 && c_exp < 0.0,
            LifeModelSpec::FatemiSocie { b0, c0, .. } | LifeModelSpec::Xue { b0, c0, .. } => {
                b0 < 0.0 && c0 < 0.0
            }
        }
    }
}

/// Right-hand side of the chosen relation at life `n_f`.
pub fn life_model_eval(model: &LifeModelSpec, n_f: f64) -> Result<f64, PhysicsError> {
    if !(n_f > 0.0) {
        return Err(PhysicsError::NonPositiveLife(n_f));
    }
    model.validate()?;
    let reversals = 2.0 * n_f;
    let strain_life = |sc: f64, e: f64, ef: f64, b: f64, c: f64| {
        sc / e * reversals.powf(b) + ef * reversals.powf(c)
    };
    Ok(match *model {
        LifeModelSpec::Stromeyer { sigma_f, c, m } => sigma_f + c * n_f.powf(m),
        LifeModelSpec::CoffinManson { sigma_sc, e_mod, eps_f, b, c_exp } => {
            strain_life(sigma_sc, e_mod, eps_f, b, c_exp)
        }
        LifeModelSpec::Swt { sigma_sc, e_mod, eps_f, b, c_exp, sigma_a } => {
            strain_life(sigma_sc, e_mod, eps_f, b, c_exp) * sigma_a
        }
        LifeModelSpec::SwtCriticalPlane { sigma_f_prime, e_mod, sigma_sc, eps_f, b, c_exp } => {
            sigma_f_prime * sigma_f_prime / e_mod * reversals.powf(b)
                + sigma_sc * eps_f * reversals.powf(b + c_exp)
        }
        LifeModelSpec::FatemiSocie { tau_f_prime, g_mod, gamma_f_prime, b0, c0 } => {
            tau_f_prime / g_mod * reversals.powf(b0) + gamma_f_prime * reversals.powf(c0)
        }
        LifeModelSpec::Xue { tau_f_prime, g_mod, gamma_f_prime, b0, c0 } => {
            tau_f_prime / g_mod * reversals.powf(2.0 * b0) + gamma_f_prime * reversals.powf(b0 + c0)
        }
    })
}

/// Measured left-hand-side quantities keyed by name.
///
/// Recognized keys: `stress`, `strain_range`, `strain_amplitude`,
/// `epsilon_swt`, `sigma_max`, `shear_strain_range`, `normal_stress_max`,
/// `yield_strength`, `k`, `tau_max`, `normal_strain_excursion`,
/// `sigma_f_prime`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Observables(pub BTreeMap<String, f64>);

impl Observables {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Result<f64, PhysicsError> {
        self.0.get(name).copied().ok_or_else(|| PhysicsError::MissingParameter(name.to_string()))
    }
}

/// Damage parameter computed from measured quantities, i.e. the left-hand
/// side that [`life_model_eval`] is matched against.
pub fn damage_parameter(model: &LifeModelSpec, obs: &Observables) -> Result<f64, PhysicsError> {
    Ok(match *model {
        LifeModelSpec::Stromeyer { .. } => obs.get("stress")?,
        LifeModelSpec::CoffinManson { .. } => obs.get("strain_range")?,
        LifeModelSpec::Swt { sigma_a, .. } => match obs.get("strain_amplitude") {
            Ok(eps_a) => eps_a * sigma_a,
            Err(_) => obs.get("epsilon_swt")? * obs.get("sigma_max")?,
        },
        LifeModelSpec::SwtCriticalPlane { .. } => obs.get("sigma_max")? * obs.get("strain_range")? / 2.0,
        LifeModelSpec::FatemiSocie { .. } => {
            let k = obs.get("k")?;
            let sy = obs.get("yield_strength")?;
            positive("yield_strength", sy)?;
            obs.get("shear_strain_range")? / 2.0 * (1.0 + k * obs.get("normal_stress_max")? / sy)
        }
        LifeModelSpec::Xue { tau_f_prime, .. } => {
            let sf = obs.get("sigma_f_prime")?;
            positive("sigma_f_prime", sf)?;
            let half_shear = obs.get("shear_strain_range")? / 2.0;
            let eps_n = obs.get("normal_strain_excursion")?;
            (obs.get("tau_max")? / tau_f_prime + obs.get("normal_stress_max")? / (3f64.sqrt() * sf))
                * (3.0 * eps_n * eps_n + half_shear * half_shear).sqrt()
        }
    })
}

const SOLVE_RTOL: f64 = 1e-10;
const SOLVE_MAX_ITER: usize = 200;

/// Life at which `life_model_eval(model, N) = target`, by bisection on
/// `ln N` within `[n_lo, n_hi]`. The model must be decreasing over the
/// bracket.
pub fn solve_life(model: &LifeModelSpec, target: f64, bracket: (f64, f64)) -> Result<f64, PhysicsError> {
    let (n_lo, n_hi) = bracket;
    if !(n_lo > 0.0) {
        return Err(PhysicsError::NonPositiveLife(n_lo));
    }
    if !(n_hi > n_lo) {
        return Err(PhysicsError::InvalidParameter {
            name: "bracket",
            reason: format!("need 0 < n_lo < n_hi, got ({n_lo}, {n_hi})"),
        });
    }
    let at_lo = life_model_eval(model, n_lo)?;
    let at_hi = life_model_eval(model, n_hi)?;
    if !(at_lo > at_hi) {
        return Err(PhysicsError::NonMonotone { at_lo, at_hi });
    }
    if target > at_lo || target < at_hi {
        return Err(PhysicsError::NoRoot { target, low: at_hi, high: at_lo });
    }
    let tol = SOLVE_RTOL * target.abs().max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (n_lo.ln(), n_hi.ln());
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..SOLVE_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let r = life_model_eval(model, mid.exp())? - target;
        if r.abs() <= tol || mid == lo || mid == hi {
            break;
        }
        // decreasing: positive residual means the root lies at larger life
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn two_point_fit_is_exact() {
        let fit = basquin_fit(&[(0.5, 2.0), (0.25, 4.0)]).unwrap();
        assert!(rel(fit.c, 1.0) < 1e-12);
        assert!(rel(fit.m, -1.0) < 1e-12);
        assert!((fit.r2_loglog - 1.0).abs() < 1e-12);
        let (a, b) = fit.life_law_constants();
        assert!(rel(a, 1.0) < 1e-12 && rel(b, 1.0) < 1e-12);
    }

    #[test]
    fn single_stress_level_is_degenerate() {
        assert!(matches!(
            basquin_fit(&[(1.0, 10.0), (1.0, 100.0)]),
            Err(PhysicsError::DegenerateFit { distinct_stress: 1, .. })
        ));
        assert!(matches!(
            basquin_fit(&[(1.0, 10.0), (-2.0, 100.0)]),
            Err(PhysicsError::NonPositiveInput { index: 1, .. })
        ));
    }

    #[test]
    fn increasing_curve_is_fitted_but_flagged() {
        let fit = basquin_fit(&[(1.0, 10.0), (2.0, 100.0)]).unwrap();
        assert!(fit.m > 0.0);
        assert!(!fit.is_physical());
    }

    #[test]
    fn basquin_life_inverts_the_power_law() {
        let unit = BasquinFit { c: 1.0, m: -1.0, n_points: 2, r2_loglog: 1.0 };
        assert!(rel(basquin_life(&unit, 0.5).unwrap(), 2.0) < 1e-15);
        let fit = BasquinFit { c: 2000.0, m: -0.1, n_points: 0, r2_loglog: 1.0 };
        assert!(rel(basquin_life(&fit, 2000.0).unwrap(), 1.0) < 1e-15);
        let stress = 2000.0 * 12345f64.powf(-0.1);
        assert!(rel(basquin_life(&fit, stress).unwrap(), 12345.0) < 1e-9);
        let flat = BasquinFit { m: 0.0, ..fit };
        assert_eq!(basquin_life(&flat, 1.0), Err(PhysicsError::ZeroExponent));
        assert_eq!(basquin_life(&fit, 0.0), Err(PhysicsError::NonPositiveStress(0.0)));
    }

    #[test]
    fn walker_special_cases() {
        let p = |gamma, sigma_max, sigma_a, r_ratio| WalkerParams { gamma, sigma_max, sigma_a, r_ratio };
        for g in [0.0, 0.3, 0.5, 1.0] {
            let v = walker_equivalent_stress(&p(g, Some(300.0), None, -1.0)).unwrap();
            assert!(rel(v, 300.0) < 1e-15);
        }
        let v = walker_equivalent_stress_from_amplitude(&p(1.0, None, Some(150.0), 0.2)).unwrap();
        assert!(rel(v, 150.0) < 1e-15);
        let v = walker_equivalent_stress(&p(0.0, Some(300.0), None, 0.5)).unwrap();
        assert!(rel(v, 300.0) < 1e-15);
        assert_eq!(
            walker_equivalent_stress(&p(0.5, Some(300.0), None, 1.0)),
            Err(PhysicsError::InvalidRatio(1.0))
        );
        assert!(walker_equivalent_stress(&p(0.5, Some(300.0), Some(100.0), -1.0)).is_err());
        assert!(walker_equivalent_stress(&p(0.5, Some(300.0), Some(300.0), -1.0)).is_ok());
    }

    #[test]
    fn stromeyer_without_power_term_is_constant() {
        let m = LifeModelSpec::Stromeyer { sigma_f: 400.0, c: 0.0, m: -0.2 };
        for n in [1.0, 1e3, 1e7] {
            assert_eq!(life_model_eval(&m, n).unwrap(), 400.0);
        }
    }

    #[test]
    fn coffin_manson_elastic_branch() {
        let m = LifeModelSpec::CoffinManson { sigma_sc: 900.0, e_mod: 2e5, eps_f: 0.0, b: -0.1, c_exp: -0.6 };
        let n = 3e4;
        assert!(rel(life_model_eval(&m, n).unwrap(), 900.0 / 2e5 * (2.0 * n).powf(-0.1)) < 1e-15);
    }

    #[test]
    fn swt_matches_independent_evaluation() {
        // frozen from a separate script evaluation of the SWT right-hand side
        let expected = 0.895_432_788_457_172_8;
        let m = LifeModelSpec::Swt { sigma_sc: 900.0, e_mod: 2e5, eps_f: 0.5, b: -0.1, c_exp: -0.6, sigma_a: 300.0 };
        assert!(rel(life_model_eval(&m, 1e4).unwrap(), expected) < 1e-12);
    }

    #[test]
    fn eval_rejects_bad_inputs() {
        let m = LifeModelSpec::CoffinManson { sigma_sc: 900.0, e_mod: 0.0, eps_f: 0.5, b: -0.1, c_exp: -0.6 };
        assert!(matches!(life_model_eval(&m, 10.0), Err(PhysicsError::InvalidParameter { name: "e_mod", .. })));
        let s = LifeModelSpec::Stromeyer { sigma_f: 0.0, c: 1.0, m: -1.0 };
        assert_eq!(life_model_eval(&s, 0.0), Err(PhysicsError::NonPositiveLife(0.0)));
    }

    #[test]
    fn damage_parameters_need_their_observables() {
        let fs = LifeModelSpec::FatemiSocie { tau_f_prime: 500.0, g_mod: 8e4, gamma_f_prime: 0.4, b0: -0.1, c0: -0.5 };
        assert_eq!(
            damage_parameter(&fs, &Observables::new()),
            Err(PhysicsError::MissingParameter("k".into()))
        );
        let obs = Observables::new()
            .with("k", 0.5)
            .with("yield_strength", 400.0)
            .with("shear_strain_range", 0.004)
            .with("normal_stress_max", 200.0);
        assert!(rel(damage_parameter(&fs, &obs).unwrap(), 0.002 * 1.25) < 1e-15);

        let cp = LifeModelSpec::SwtCriticalPlane { sigma_f_prime: 900.0, e_mod: 2e5, sigma_sc: 900.0, eps_f: 0.5, b: -0.1, c_exp: -0.6 };
        let obs = Observables::new().with("sigma_max", 300.0).with("strain_range", 0.01);
        assert!(rel(damage_parameter(&cp, &obs).unwrap(), 1.5) < 1e-15);
    }

    #[test]
    fn solve_life_reduces_to_basquin_inversion() {
        let m = LifeModelSpec::Stromeyer { sigma_f: 0.0, c: 1.0, m: -1.0 };
        let n = solve_life(&m, 0.5, (1.0, 100.0)).unwrap();
        assert!(rel(n, 2.0) < 1e-9);
    }

    #[test]
    fn solve_life_round_trips_coffin_manson() {
        let m = LifeModelSpec::CoffinManson { sigma_sc: 900.0, e_mod: 2e5, eps_f: 0.5, b: -0.1, c_exp: -0.6 };
        let target = life_model_eval(&m, 5000.0).unwrap();
        let n = solve_life(&m, target, (1.0, 1e9)).unwrap();
        assert!(rel(n, 5000.0) < 1e-6);
    }

    #[test]
    fn solve_life_bracket_errors() {
        let m = LifeModelSpec::Stromeyer { sigma_f: 0.0, c: 1.0, m: -1.0 };
        assert!(matches!(solve_life(&m, 5.0, (1.0, 100.0)), Err(PhysicsError::NoRoot { .. })));
        let flat = LifeModelSpec::Stromeyer { sigma_f: 1.0, c: 0.0, m: -1.0 };
        assert!(matches!(solve_life(&flat, 1.0, (1.0, 100.0)), Err(PhysicsError::NonMonotone { .. })));
        let rising = LifeModelSpec::Stromeyer { sigma_f: 0.0, c: 1.0, m: 1.0 };
        assert!(matches!(solve_life(&rising, 5.0, (1.0, 100.0)), Err(PhysicsError::NonMonotone { .. })));
    }
}
