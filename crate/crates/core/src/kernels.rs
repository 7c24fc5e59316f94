//! Green kernels of the four-point fractional Langevin problem.
//!
//! Both kernels have the same separable shape
//!
//! ```text
//! K(t, s) = scale · ( [s ≤ t] c_v (t − s)^{e_v}  +  Σ_k T_k(t) (1 − s)^{e_k} )
//! ```
//!
//! where the `T_k` are sparse power sums in `t`. [`SeparableKernel`] stores
//! that description once; pointwise evaluation, t-derivatives and the
//! solver's quadrature are all derived from it.

use crate::error::{Error, Result};
use crate::fraccalc::{gamma_pos, PowerPoly, PowerTerm};

/// Orders and coupling of `ᶜD^β(ᶜD^α + γ) x = f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl OrderParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                range: "(0, 1]",
            });
        }
        if !(beta > 2.0 && beta <= 3.0) {
            return Err(Error::OutOfRange {
                name: "beta",
                value: beta,
                range: "(2, 3]",
            });
        }
        if !gamma.is_finite() {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: gamma,
                range: "finite reals",
            });
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, gamma)
    }
}

/// Exponent used for the Volterra part of `H`.
///
/// `Derived` is `(t − s)^{α−1}`, the form that actually reproduces the
/// boundary value problem. `AsPrinted` is `(t − s)^{α+β−1}` and exists only
/// so the manufactured-solution check can demonstrate that it is wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HVolterraForm {
    #[default]
    Derived,
    AsPrinted,
}

/// Kernel value split into its singular and boundary-correction parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub volterra: f64,
    pub fredholm: f64,
    pub total: f64,
}

/// `coefficient · (t − s)^exponent` on `s ≤ t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraPart {
    pub coefficient: f64,
    pub exponent: f64,
}

/// `t_factor(t) · (1 − s)^s_exponent` on the whole square.
#[derive(Debug, Clone, PartialEq)]
pub struct FredholmPart {
    pub t_factor: PowerPoly,
    pub s_exponent: f64,
}

impl FredholmPart {
    pub fn is_zero(&self) -> bool {
        self.t_factor.terms().iter().all(|p| p.coefficient == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableKernel {
    pub scale: f64,
    pub volterra: Option<VolterraPart>,
    pub fredholm: Vec<FredholmPart>,
}

impl SeparableKernel {
    pub fn eval(&self, t: f64, s: f64) -> Result<KernelValue> {
        if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&s) {
            return Err(Error::OutsideUnitSquare { t, s });
        }
        let mut volterra = 0.0;
        if let Some(v) = self.volterra {
            if s <= t && v.coefficient != 0.0 {
                if s == t && v.exponent < 0.0 {
                    return Err(Error::KernelSingularity { t, s });
                }
                volterra = v.coefficient * (t - s).powf(v.exponent);
            }
        }
        let mut fredholm = 0.0;
        for part in self.fredholm.iter().filter(|p| !p.is_zero()) {
            let tf = part.t_factor.eval(t);
            if tf == 0.0 {
                continue;
            }
            if s == 1.0 && part.s_exponent < 0.0 {
                return Err(Error::KernelSingularity { t, s });
            }
            fredholm += tf * (1.0 - s).powf(part.s_exponent);
        }
        let volterra = self.scale * volterra;
        let fredholm = self.scale * fredholm;
        Ok(KernelValue {
            volterra,
            fredholm,
            total: volterra + fredholm,
        })
    }

    /// Analytic ∂/∂t. The Volterra power is differentiated as written, so
    /// callers must not use the result for a Volterra exponent below one.
    pub fn dt(&self) -> SeparableKernel {
        let volterra = self.volterra.and_then(|v| {
            (v.exponent != 0.0).then_some(VolterraPart {
                coefficient: v.coefficient * v.exponent,
                exponent: v.exponent - 1.0,
            })
        });
        SeparableKernel {
            scale: self.scale,
            volterra,
            fredholm: self
                .fredholm
                .iter()
                .map(|p| FredholmPart {
                    t_factor: p.t_factor.derivative(),
                    s_exponent: p.s_exponent,
                })
                .collect(),
        }
    }

    pub fn fredholm_only(&self) -> SeparableKernel {
        SeparableKernel {
            scale: self.scale,
            volterra: None,
            fredholm: self.fredholm.clone(),
        }
    }
}

/// The kernel `G` that carries the forcing.
pub fn green_g(p: &OrderParams) -> SeparableKernel {
    let a = p.alpha;
    let ab = p.alpha + p.beta;
    SeparableKernel {
        scale: 1.0 / gamma_pos(ab),
        volterra: Some(VolterraPart {
            coefficient: 1.0,
            exponent: ab - 1.0,
        }),
        fredholm: vec![
            FredholmPart {
                t_factor: PowerPoly::new(vec![
                    PowerTerm::new(-(a + 2.0), a + 1.0),
                    PowerTerm::new(a + 1.0, a + 2.0),
                ]),
                s_exponent: ab - 1.0,
            },
            FredholmPart {
                t_factor: PowerPoly::new(vec![
                    PowerTerm::new(ab - 1.0, a + 1.0),
                    PowerTerm::new(-(ab - 1.0), a + 2.0),
                ]),
                s_exponent: ab - 2.0,
            },
        ],
    }
}

/// The kernel `H` that carries the coupling `γ x`.
///
/// The coefficient `1/Γ(α−1)` of the `(1−s)^{α−2}` term is written as
/// `(α−1)/Γ(α)`, which vanishes at α = 1 instead of hitting a pole.
pub fn green_h(p: &OrderParams, form: HVolterraForm) -> SeparableKernel {
    let a = p.alpha;
    let inv = 1.0 / gamma_pos(a);
    let volterra_exponent = match form {
        HVolterraForm::Derived => a - 1.0,
        HVolterraForm::AsPrinted => a + p.beta - 1.0,
    };
    SeparableKernel {
        scale: p.gamma,
        volterra: Some(VolterraPart {
            coefficient: -inv,
            exponent: volterra_exponent,
        }),
        fredholm: vec![
            FredholmPart {
                t_factor: PowerPoly::new(vec![
                    PowerTerm::new((a + 2.0) * inv, a + 1.0),
                    PowerTerm::new(-(a + 1.0) * inv, a + 2.0),
                ]),
                s_exponent: a - 1.0,
            },
            FredholmPart {
                t_factor: PowerPoly::new(vec![
                    PowerTerm::new(-(a - 1.0) * inv, a + 1.0),
                    PowerTerm::new((a - 1.0) * inv, a + 2.0),
                ]),
                s_exponent: a - 2.0,
            },
        ],
    }
}

pub fn eval_g(p: &OrderParams, t: f64, s: f64) -> Result<KernelValue> {
    green_g(p).eval(t, s)
}

pub fn eval_h(p: &OrderParams, t: f64, s: f64) -> Result<KernelValue> {
    green_h(p, HVolterraForm::Derived).eval(t, s)
}

pub fn eval_h_with_form(
    p: &OrderParams,
    form: HVolterraForm,
    t: f64,
    s: f64,
) -> Result<KernelValue> {
    green_h(p, form).eval(t, s)
}

pub fn eval_g_dt(p: &OrderParams, t: f64, s: f64) -> Result<KernelValue> {
    green_g(p).dt().eval(t, s)
}

/// Boundary-correction part of ∂H/∂t only. The Volterra part of `H` enters
/// the derivative as `−γ I^α x′`, which the solver applies to the `x′`
/// samples directly.
pub fn eval_h_dt(p: &OrderParams, t: f64, s: f64) -> Result<KernelValue> {
    let h = green_h(p, HVolterraForm::Derived);
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&s) {
        return Err(Error::OutsideUnitSquare { t, s });
    }
    if s == t && p.alpha < 1.0 {
        return Err(Error::KernelSingularity { t, s });
    }
    h.dt().fredholm_only().eval(t, s)
}
