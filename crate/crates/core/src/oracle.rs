//! Ground truth for the solver: a manufactured polynomial solution, the
//! closed form for constant forcing, and a fine-grid reference run.

use crate::error::{Error, Result};
use crate::fraccalc::{caputo_poly, gamma_pos, FracOrder, PowerPoly};
use crate::kernels::OrderParams;
use crate::solver::{picard_solve, Forcing, Grid, ProblemSpec, SolutionField, DEFAULT_MAX_ITER};

/// Tolerance used for reference solves.
pub const REFERENCE_TOL: f64 = 1e-10;

/// A forcing that depends on `t` only and is a finite power sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyForcing {
    poly: PowerPoly,
}

impl PolyForcing {
    pub fn new(poly: PowerPoly) -> Self {
        Self { poly }
    }

    pub fn poly(&self) -> &PowerPoly {
        &self.poly
    }
}

impl Forcing for PolyForcing {
    fn eval(&self, t: f64, _x: f64, _dx: f64) -> f64 {
        self.poly.eval(t)
    }

    fn singular_exponent(&self) -> Option<f64> {
        self.poly.min_exponent().filter(|&e| e < 0.0)
    }
}

/// `x* = t²(1 − t)²` together with the forcing that makes it a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    pub x_star: PowerPoly,
    pub f_of_t: PowerPoly,
    pub orders: OrderParams,
}

impl ManufacturedCase {
    pub fn x(&self, t: f64) -> f64 {
        self.x_star.eval(t)
    }

    pub fn dx(&self, t: f64) -> f64 {
        self.x_star.derivative().eval(t)
    }

    /// Exact `(x*, x*′)` at the grid nodes.
    pub fn exact_field(&self, grid: &Grid) -> SolutionField {
        let d = self.x_star.derivative();
        SolutionField::from_fn(grid, |t| self.x_star.eval(t), |t| d.eval(t))
    }

    /// `f` has a negative power of `t`.
    pub fn forcing_is_singular(&self) -> bool {
        self.f_of_t.min_exponent().is_some_and(|e| e < 0.0)
    }

    pub fn problem(&self) -> ProblemSpec {
        ProblemSpec::new(self.orders, PolyForcing::new(self.f_of_t.clone()))
    }
}

pub fn x_star() -> PowerPoly {
    PowerPoly::from_pairs(&[(1.0, 2.0), (-2.0, 3.0), (1.0, 4.0)])
}

/// `f = ᶜD^β (ᶜD^α x* + γ x*)`, applied as two successive Caputo
/// derivatives.
///
/// Fails with [`Error::NonIntegrablePower`] when `α < 1` and `α + β ≥ 3`:
/// the `t²` term then yields `t^{2−α−β}`, which is not integrable at the
/// origin, and `x*` is not a classical solution of the problem.
pub fn manufactured_poly(orders: OrderParams) -> Result<ManufacturedCase> {
    let x = x_star();
    let alpha = FracOrder::new(orders.alpha())?;
    let beta = FracOrder::new(orders.beta())?;
    let inner = caputo_poly(&x, alpha)?.plus(&x.scaled(orders.gamma()));
    let f_of_t = caputo_poly(&inner, beta)?;
    Ok(ManufacturedCase {
        x_star: x,
        f_of_t,
        orders,
    })
}

/// `ᶜD^{α+β} x* + γ ᶜD^β x*`, the forcing one would get by merging the two
/// orders. Kept only to show that merging is wrong.
pub fn merged_order_forcing(orders: OrderParams) -> Result<PowerPoly> {
    let x = x_star();
    let merged = FracOrder::new(orders.alpha() + orders.beta())?;
    let beta = FracOrder::new(orders.beta())?;
    Ok(caputo_poly(&x, merged)?.plus(&caputo_poly(&x, beta)?.scaled(orders.gamma())))
}

/// Exact solution for `f ≡ 1` and `γ = 0`.
pub fn closed_form_constant_forcing(orders: OrderParams) -> Result<PowerPoly> {
    if orders.gamma() != 0.0 {
        return Err(Error::CouplingNotZero {
            gamma: orders.gamma(),
        });
    }
    let a = orders.alpha();
    let ab = a + orders.beta();
    let g1 = gamma_pos(ab + 1.0);
    let g0 = gamma_pos(ab);
    Ok(PowerPoly::from_pairs(&[
        (1.0 / g1, ab),
        ((a + 1.0) / g1, a + 2.0),
        (-(a + 2.0) / g1, a + 1.0),
        (1.0 / g0, a + 1.0),
        (-1.0 / g0, a + 2.0),
    ]))
}

/// Picard solution on an `n_fine`-panel grid at [`REFERENCE_TOL`].
pub fn dense_reference(p: &ProblemSpec, n_fine: usize) -> Result<SolutionField> {
    let grid = Grid::new(n_fine)?;
    let (z, report) = picard_solve(p, &grid, REFERENCE_TOL, DEFAULT_MAX_ITER)?;
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            last_update: report.final_update,
        });
    }
    Ok(z)
}

/// [`dense_reference`] interpolated onto `coarse`, which must be at least
/// four times coarser.
pub fn dense_reference_on(p: &ProblemSpec, coarse: &Grid, n_fine: usize) -> Result<SolutionField> {
    if n_fine < 4 * coarse.n_panels() {
        return Err(Error::OutOfRange {
            name: "n_fine",
            value: n_fine as f64,
            range: "[4 n_panels, inf)",
        });
    }
    Ok(dense_reference(p, n_fine)?.interpolate_to(coarse))
}
