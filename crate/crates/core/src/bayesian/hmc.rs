//! Hamiltonian Monte Carlo with dual-averaging step-size adaptation, using
//! either a fixed number of leapfrog steps or slice-based U-turn
//! termination.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SamplerError;
use crate::rng;

pub trait LogDensity {
    fn dim(&self) -> usize;
    /// Log density (up to a constant) and its gradient.
    fn log_density_grad(&self, q: &[f64]) -> (f64, Vec<f64>);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trajectory {
    /// `steps` leapfrog steps per proposal, with the step size jittered by
    /// ±10% to avoid periodic orbits.
    Fixed { steps: usize },
    /// Tree doubling until the trajectory turns back on itself.
    UTurn { max_depth: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmcSettings {
    pub warmup: usize,
    pub draws: usize,
    pub trajectory: Trajectory,
    pub target_accept: f64,
    /// Energy error above which a transition counts as divergent.
    pub max_energy_error: f64,
}

impl Default for HmcSettings {
    fn default() -> Self {
        Self {
            warmup: 500,
            draws: 100,
            trajectory: Trajectory::Fixed { steps: 32 },
            target_accept: 0.8,
            max_energy_error: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub draws: Vec<Vec<f64>>,
    pub step_size: f64,
    /// Mean acceptance statistic over post-warmup transitions.
    pub acceptance_rate: f64,
    /// Post-warmup transitions that moved the state.
    pub accepted: usize,
    pub divergences: usize,
    pub warmup_divergences: usize,
    pub gradient_evaluations: usize,
}

#[derive(Clone)]
struct State {
    q: Vec<f64>,
    p: Vec<f64>,
    logp: f64,
    grad: Vec<f64>,
}

impl State {
    /// Log of the joint density `exp(logp − ½|p|²)`.
    fn joint(&self) -> f64 {
        self.logp - 0.5 * self.p.iter().map(|v| v * v).sum::<f64>()
    }
}

/// `steps` leapfrog steps of size `eps` from `(q, p)`. Returns the final
/// position, momentum and log density.
pub fn leapfrog<D: LogDensity + ?Sized>(target: &D, q: &[f64], p: &[f64], eps: f64, steps: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let (logp, grad) = target.log_density_grad(q);
    let mut s = State { q: q.to_vec(), p: p.to_vec(), logp, grad };
    for _ in 0..steps {
        s = step(target, &s, eps);
    }
    (s.q, s.p, s.logp)
}

fn step<D: LogDensity + ?Sized>(target: &D, s: &State, eps: f64) -> State {
    let mut p: Vec<f64> = s.p.iter().zip(&s.grad).map(|(p, g)| p + 0.5 * eps * g).collect();
    let q: Vec<f64> = s.q.iter().zip(&p).map(|(q, p)| q + eps * p).collect();
    let (logp, grad) = target.log_density_grad(&q);
    for (pi, g) in p.iter_mut().zip(&grad) {
        *pi += 0.5 * eps * g;
    }
    State { q, p, logp, grad }
}

fn momentum(dim: usize, r: &mut rng::Rng) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(r)).collect()
}

fn accept_prob(log_ratio: f64) -> f64 {
    if log_ratio.is_nan() {
        0.0
    } else {
        log_ratio.exp().min(1.0)
    }
}

/// Double or halve a unit step until the one-step acceptance probability
/// crosses one half.
fn find_reasonable_epsilon<D: LogDensity + ?Sized>(target: &D, start: &State, r: &mut rng::Rng, evals: &mut usize) -> f64 {
    let mut eps = 1.0;
    let mut s = start.clone();
    s.p = momentum(target.dim(), r);
    let h0 = s.joint();
    let ratio = |eps: f64, evals: &mut usize| {
        *evals += 1;
        let n = step(target, &s, eps);
        let v = n.joint() - h0;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let a: f64 = if ratio(eps, evals) > (0.5f64).ln() { 1.0 } else { -1.0 };
    for _ in 0..100 {
        if a * ratio(eps, evals) <= -a * 2f64.ln() {
            break;
        }
        eps *= 2f64.powf(a);
    }
    eps
}

struct DualAveraging {
    mu: f64,
    h_bar: f64,
    log_eps: f64,
    log_eps_bar: f64,
    m: f64,
    target: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps0: f64, target: f64) -> Self {
        Self { mu: (10.0 * eps0).ln(), h_bar: 0.0, log_eps: eps0.ln(), log_eps_bar: 0.0, m: 0.0, target }
    }

    fn update(&mut self, accept: f64) {
        self.m += 1.0;
        let w = 1.0 / (self.m + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept);
        self.log_eps = self.mu - self.m.sqrt() / Self::GAMMA * self.h_bar;
        let eta = self.m.powf(-Self::KAPPA);
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar;
    }
}

struct Transition {
    state: State,
    accept: f64,
    moved: bool,
    divergent: bool,
}

fn fixed_transition<D: LogDensity + ?Sized>(
    target: &D,
    current: &State,
    eps: f64,
    steps: usize,
    max_energy_error: f64,
    r: &mut rng::Rng,
    evals: &mut usize,
) -> Transition {
    let mut s = current.clone();
    s.p = momentum(target.dim(), r);
    let h0 = s.joint();
    let jittered = eps * (1.0 + 0.1 * (2.0 * r.random::<f64>() - 1.0));
    let mut prop = s.clone();
    for _ in 0..steps {
        prop = step(target, &prop, jittered);
    }
    *evals += steps;
    let log_ratio = prop.joint() - h0;
    let divergent = !(log_ratio > -max_energy_error);
    let accept = if divergent { 0.0 } else { accept_prob(log_ratio) };
    let u: f64 = r.random();
    if !divergent && u < accept {
        Transition { state: prop, accept, moved: true, divergent }
    } else {
        Transition { state: current.clone(), accept, moved: false, divergent }
    }
}

struct Tree {
    minus: State,
    plus: State,
    proposal: State,
    n: f64,
    ok: bool,
    alpha: f64,
    n_alpha: f64,
    divergent: bool,
}

fn no_u_turn(minus: &State, plus: &State) -> bool {
    let dq: Vec<f64> = plus.q.iter().zip(&minus.q).map(|(a, b)| a - b).collect();
    let dot = |p: &[f64]| dq.iter().zip(p).map(|(a, b)| a * b).sum::<f64>();
    dot(&minus.p) >= 0.0 && dot(&plus.p) >= 0.0
}

#[allow(clippy::too_many_arguments)]
fn build_tree<D: LogDensity + ?Sized>(
    target: &D,
    s: &State,
    log_u: f64,
    dir: f64,
    depth: usize,
    eps: f64,
    joint0: f64,
    max_energy_error: f64,
    r: &mut rng::Rng,
    evals: &mut usize,
) -> Tree {
    if depth == 0 {
        let next = step(target, s, dir * eps);
        *evals += 1;
        let joint = next.joint();
        let joint = if joint.is_nan() { f64::NEG_INFINITY } else { joint };
        let ok = log_u < joint + max_energy_error;
        return Tree {
            minus: next.clone(),
            plus: next.clone(),
            n: if log_u <= joint { 1.0 } else { 0.0 },
            ok,
            alpha: accept_prob(joint - joint0),
            n_alpha: 1.0,
            divergent: !ok,
            proposal: next,
        };
    }
    let mut t = build_tree(target, s, log_u, dir, depth - 1, eps, joint0, max_energy_error, r, evals);
    if !t.ok {
        return t;
    }
    let edge = if dir < 0.0 { t.minus.clone() } else { t.plus.clone() };
    let t2 = build_tree(target, &edge, log_u, dir, depth - 1, eps, joint0, max_energy_error, r, evals);
    if dir < 0.0 {
        t.minus = t2.minus.clone();
    } else {
        t.plus = t2.plus.clone();
    }
    let total = t.n + t2.n;
    if total > 0.0 && r.random::<f64>() < t2.n / total {
        t.proposal = t2.proposal.clone();
    }
    t.alpha += t2.alpha;
    t.n_alpha += t2.n_alpha;
    t.divergent |= t2.divergent;
    t.ok = t2.ok && no_u_turn(&t.minus, &t.plus);
    t.n = total;
    t
}

fn uturn_transition<D: LogDensity + ?Sized>(
    target: &D,
    current: &State,
    eps: f64,
    max_depth: usize,
    max_energy_error: f64,
    r: &mut rng::Rng,
    evals: &mut usize,
) -> Transition {
    let mut s0 = current.clone();
    s0.p = momentum(target.dim(), r);
    let joint0 = s0.joint();
    let log_u = joint0 + r.random::<f64>().ln();
    let (mut minus, mut plus) = (s0.clone(), s0.clone());
    let mut sample = current.clone();
    let mut moved = false;
    let mut n = 1.0;
    let (mut alpha, mut n_alpha) = (0.0, 0.0);
    let mut divergent = false;
    for depth in 0..max_depth {
        let dir = if r.random::<bool>() { 1.0 } else { -1.0 };
        let t = if dir < 0.0 {
            let t = build_tree(target, &minus, log_u, dir, depth, eps, joint0, max_energy_error, r, evals);
            minus = t.minus.clone();
            t
        } else {
            let t = build_tree(target, &plus, log_u, dir, depth, eps, joint0, max_energy_error, r, evals);
            plus = t.plus.clone();
            t
        };
        alpha += t.alpha;
        n_alpha += t.n_alpha;
        divergent |= t.divergent;
        if t.ok && r.random::<f64>() < (t.n / n).min(1.0) {
            sample = t.proposal.clone();
            sample.p = current.p.clone();
            moved = true;
        }
        n += t.n;
        if !(t.ok && no_u_turn(&minus, &plus)) {
            break;
        }
    }
    let accept = if n_alpha > 0.0 { alpha / n_alpha } else { 0.0 };
    Transition { state: sample, accept, moved, divergent }
}

/// Run `settings.warmup` adaptation transitions followed by
/// `settings.draws` kept draws. Deterministic given `seed`.
pub fn hmc_sample<D: LogDensity + ?Sized>(
    target: &D,
    init: &[f64],
    settings: &HmcSettings,
    seed: u64,
) -> Result<Chain, SamplerError> {
    if settings.draws == 0 {
        return Err(SamplerError::InvalidSettings("draws must be >= 1".into()));
    }
    if !(settings.target_accept > 0.0 && settings.target_accept < 1.0) {
        return Err(SamplerError::InvalidSettings(format!("target_accept must be in (0, 1), got {}", settings.target_accept)));
    }
    match settings.trajectory {
        Trajectory::Fixed { steps: 0 } => return Err(SamplerError::InvalidSettings("steps must be >= 1".into())),
        Trajectory::UTurn { max_depth: 0 } => return Err(SamplerError::InvalidSettings("max_depth must be >= 1".into())),
        _ => {}
    }
    let (logp, grad) = target.log_density_grad(init);
    if !logp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(SamplerError::NonFiniteInit);
    }
    let mut r = rng::from_seed(seed);
    let mut evals = 1;
    let mut current = State { q: init.to_vec(), p: vec![0.0; init.len()], logp, grad };
    let eps0 = find_reasonable_epsilon(target, &current, &mut r, &mut evals);
    let mut da = DualAveraging::new(eps0, settings.target_accept);
    let mut eps = eps0;

    let transition = |cur: &State, eps: f64, r: &mut rng::Rng, evals: &mut usize| match settings.trajectory {
        Trajectory::Fixed { steps } => fixed_transition(target, cur, eps, steps, settings.max_energy_error, r, evals),
        Trajectory::UTurn { max_depth } => uturn_transition(target, cur, eps, max_depth, settings.max_energy_error, r, evals),
    };

    let mut warmup_divergences = 0;
    for _ in 0..settings.warmup {
        let t = transition(&current, eps, &mut r, &mut evals);
        warmup_divergences += usize::from(t.divergent);
        current = t.state;
        da.update(t.accept);
        eps = da.log_eps.exp();
    }
    if settings.warmup > 0 {
        eps = da.log_eps_bar.exp();
    }

    let mut draws = Vec::with_capacity(settings.draws);
    let (mut accept_sum, mut accepted, mut divergences) = (0.0, 0, 0);
    for _ in 0..settings.draws {
        let t = transition(&current, eps, &mut r, &mut evals);
        accept_sum += t.accept;
        accepted += usize::from(t.moved);
        divergences += usize::from(t.divergent);
        current = t.state;
        draws.push(current.q.clone());
    }
    if accepted == 0 {
        return Err(SamplerError::AllRejected { draws: settings.draws });
    }
    Ok(Chain {
        draws,
        step_size: eps,
        acceptance_rate: accept_sum / settings.draws as f64,
        accepted,
        divergences,
        warmup_divergences,
        gradient_evaluations: evals,
    })
}
