//! Existence and uniqueness conditions.
//!
//! The constants below bound the solution operator `Z` on the space
//! `C¹[0,1]` with norm `max|x| + max|x′|`. They are reproduced exactly as
//! derived by the majorizations of the Green kernels, including their
//! looseness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fraccalc::gamma_pos;
use crate::kernels::OrderParams;

/// Growth bound `|f(t,x,y)| ≤ σ(t) + a₁|x|^{τ₁} + a₂|y|^{τ₂}`, with `σ`
/// represented by its sup-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSpec {
    pub sigma_bound: f64,
    pub a1: f64,
    pub a2: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl GrowthSpec {
    pub fn new(sigma_bound: f64, a1: f64, a2: f64, tau1: f64, tau2: f64) -> Result<Self> {
        for (name, value) in [("sigma_bound", sigma_bound), ("a1", a1), ("a2", a2)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    range: "[0, inf)",
                });
            }
        }
        for (name, value) in [("tau1", tau1), ("tau2", tau2)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    range: "(0, 1)",
                });
            }
        }
        Ok(Self {
            sigma_bound,
            a1,
            a2,
            tau1,
            tau2,
        })
    }
}

/// Lipschitz constant `w` of `f` in its two state arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzSpec {
    pub w: f64,
}

impl LipschitzSpec {
    /// `w = 0` is accepted and means `f` does not depend on `(x, x′)`.
    pub fn new(w: f64) -> Result<Self> {
        if w >= 0.0 && w.is_finite() {
            Ok(Self { w })
        } else {
            Err(Error::OutOfRange {
                name: "w",
                value: w,
                range: "[0, inf)",
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub k1: f64,
    pub k2: f64,
    pub k: f64,
    pub l1: f64,
    pub l2: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psi {
    pub psi1: f64,
    pub psi2: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub constants: Constants,
    pub psi: Option<Psi>,
    pub radius: Option<f64>,
    /// `None` when no growth data was supplied.
    pub existence_ok: Option<bool>,
    /// `None` when no Lipschitz data was supplied.
    pub uniqueness_ok: Option<bool>,
    pub notes: Vec<String>,
}

pub fn compute_constants(p: &OrderParams) -> Constants {
    let a = p.alpha();
    let b = p.beta();
    let g = p.gamma().abs();
    let gab1 = gamma_pos(a + b + 1.0);
    let gab = gamma_pos(a + b);
    let ga1 = gamma_pos(a + 1.0);
    let ga = gamma_pos(a);

    let k1 = (4.0 * (a + 1.0) + 2.0 * b) / gab1;
    let k2 = (2.0 * a + 4.0) / gab + 2.0 * (a + 1.0) * (a + 2.0) / gab1;
    let l1 = g * 4.0 * (a + 1.0) / ga1;
    let l2 = g * (2.0 * a + 4.0) / ga + 2.0 * g * (a + 1.0) * (a + 2.0) / ga1;
    Constants {
        k1,
        k2,
        k: k1 + k2,
        l1,
        l2,
        l: l1 + l2,
    }
}

pub fn compute_psi(p: &OrderParams, lip: &LipschitzSpec) -> Psi {
    let w = lip.w;
    let g = p.gamma().abs();
    let gab1 = gamma_pos(p.alpha() + p.beta() + 1.0);
    let ga1 = gamma_pos(p.alpha() + 1.0);
    let psi1 = 14.0 * w / gab1 + 8.0 * g / ga1;
    let psi2 = 36.0 * w / gab1 + 18.0 * g / ga1;
    Psi {
        psi1,
        psi2,
        psi: psi1 + psi2,
    }
}

/// Smallest radius of a ball `U_r` that `Z` maps into itself, or `None`
/// when the linear part `4rL ≤ r` cannot hold (L > 1/4).
pub fn existence_radius(k: f64, l: f64, g: &GrowthSpec) -> Option<f64> {
    if l > 0.25 {
        return None;
    }
    let sigma_term = 4.0 * k * g.sigma_bound;
    let x_term = (4.0 * g.a1 * k).powf(1.0 / (1.0 - g.tau1));
    let dx_term = (4.0 * g.a2 * k).powf(1.0 / (1.0 - g.tau2));
    Some(sigma_term.max(x_term).max(dx_term))
}

pub fn check_existence(p: &OrderParams, g: &GrowthSpec) -> ConditionReport {
    check_conditions(p, Some(g), None)
}

pub fn check_uniqueness(p: &OrderParams, lip: &LipschitzSpec) -> ConditionReport {
    check_conditions(p, None, Some(lip))
}

/// Evaluates whichever conditions the supplied metadata allows.
pub fn check_conditions(
    p: &OrderParams,
    growth: Option<&GrowthSpec>,
    lip: Option<&LipschitzSpec>,
) -> ConditionReport {
    let constants = compute_constants(p);
    let mut notes = Vec::new();
    let radius = growth.and_then(|g| existence_radius(constants.k, constants.l, g));
    let existence_ok = growth.map(|_| radius.is_some());
    if existence_ok == Some(false) {
        notes.push(format!(
            "ball condition unsatisfiable: L = {} > 1/4",
            constants.l
        ));
    }
    let psi = lip.map(|l| compute_psi(p, l));
    let uniqueness_ok = psi.map(|v| v.psi < 1.0);
    if uniqueness_ok == Some(false) {
        notes.push(format!(
            "contraction bound fails: psi = {} >= 1",
            psi.map(|v| v.psi).unwrap_or(f64::NAN)
        ));
    }
    ConditionReport {
        constants,
        psi,
        radius,
        existence_ok,
        uniqueness_ok,
        notes,
    }
}

/// Result of sampling a caller-asserted bound at random points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotCheck {
    pub samples: usize,
    /// Largest observed ratio between the sampled quantity and its bound.
    pub worst_ratio: f64,
    /// Set when `worst_ratio` exceeds 1.01.
    pub violated: bool,
}

const SPOT_SLACK: f64 = 1.01;

/// Samples `|f(t,x,y) − f(t,u,v)| / (|x−u| + |y−v|)` at `samples` random
/// pairs with states in `[-state_bound, state_bound]` and compares it to `w`.
pub fn spot_check_lipschitz<F>(
    f: F,
    lip: &LipschitzSpec,
    state_bound: f64,
    samples: usize,
    seed: u64,
) -> SpotCheck
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = rng.gen_range(0.0..=1.0);
        let (x, y, u, v) = (
            rng.gen_range(-state_bound..=state_bound),
            rng.gen_range(-state_bound..=state_bound),
            rng.gen_range(-state_bound..=state_bound),
            rng.gen_range(-state_bound..=state_bound),
        );
        let dist = (x - u).abs() + (y - v).abs();
        if dist == 0.0 {
            continue;
        }
        let q = (f(t, x, y) - f(t, u, v)).abs() / dist;
        let ratio = if lip.w > 0.0 {
            q / lip.w
        } else if q > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(ratio);
    }
    SpotCheck {
        samples,
        worst_ratio: worst,
        violated: worst > SPOT_SLACK,
    }
}

/// Samples `|f(t,x,y)| / (‖σ‖ + a₁|x|^{τ₁} + a₂|y|^{τ₂})`.
pub fn spot_check_growth<F>(
    f: F,
    g: &GrowthSpec,
    state_bound: f64,
    samples: usize,
    seed: u64,
) -> SpotCheck
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = rng.gen_range(0.0..=1.0);
        let x: f64 = rng.gen_range(-state_bound..=state_bound);
        let y: f64 = rng.gen_range(-state_bound..=state_bound);
        let bound = g.sigma_bound + g.a1 * x.abs().powf(g.tau1) + g.a2 * y.abs().powf(g.tau2);
        let value = f(t, x, y).abs();
        let ratio = if bound > 0.0 {
            value / bound
        } else if value > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(ratio);
    }
    SpotCheck {
        samples,
        worst_ratio: worst,
        violated: worst > SPOT_SLACK,
    }
}
