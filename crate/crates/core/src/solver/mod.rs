//! Grid discretization of the fixed-point equation
//! `x = ∫ G f(·, x, x′) + ∫ H x` and its Picard solver.
//!
//! The iteration state is the pair `(x, x′)`. The derivative is carried by
//! its own integral representation rather than by differencing `x`.

pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use crate::analysis::{GrowthSpec, LipschitzSpec};
use crate::error::{Error, Result};
use crate::kernels::{green_g, green_h, HVolterraForm, OrderParams, SeparableKernel};

pub use quadrature::{product_weights, Endpoint, Grid, MIN_PANELS};

use quadrature::{anchored_volterra_rows, anchored_weights, volterra_rows};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Update norm beyond which the iteration is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Right-hand side `f(t, x, x′)`.
pub trait Forcing: Send + Sync {
    fn eval(&self, t: f64, x: f64, dx: f64) -> f64;

    /// `Some(q)` with `q ∈ (−1, 0)` when `f` behaves like `t^q` times a
    /// bounded function near `t = 0`. The solver then never evaluates `f`
    /// at the origin and integrates the singular factor exactly.
    fn singular_exponent(&self) -> Option<f64> {
        None
    }
}

impl<F> Forcing for F
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    fn eval(&self, t: f64, x: f64, dx: f64) -> f64 {
        self(t, x, dx)
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub orders: OrderParams,
    pub forcing: Arc<dyn Forcing>,
    pub growth: Option<GrowthSpec>,
    pub lipschitz: Option<LipschitzSpec>,
}

impl ProblemSpec {
    pub fn new(orders: OrderParams, forcing: impl Forcing + 'static) -> Self {
        Self {
            orders,
            forcing: Arc::new(forcing),
            growth: None,
            lipschitz: None,
        }
    }

    pub fn with_growth(mut self, growth: GrowthSpec) -> Self {
        self.growth = Some(growth);
        self
    }

    pub fn with_lipschitz(mut self, lipschitz: LipschitzSpec) -> Self {
        self.lipschitz = Some(lipschitz);
        self
    }

    pub fn with_orders(mut self, orders: OrderParams) -> Self {
        self.orders = orders;
        self
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("orders", &self.orders)
            .field("singular_exponent", &self.forcing.singular_exponent())
            .field("growth", &self.growth)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// Samples of `x` and `x′` at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
}

impl SolutionField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            x: vec![0.0; grid.n_nodes()],
            dx: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn from_fn(grid: &Grid, x: impl Fn(f64) -> f64, dx: impl Fn(f64) -> f64) -> Self {
        Self {
            x: grid.nodes().map(&x).collect(),
            dx: grid.nodes().map(&dx).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `max|x| + max|x′|` over the nodes.
    pub fn c1_norm(&self) -> f64 {
        sup(&self.x) + sup(&self.dx)
    }

    pub fn c1_distance(&self, other: &SolutionField) -> f64 {
        sup_diff(&self.x, &other.x) + sup_diff(&self.dx, &other.dx)
    }

    /// Restriction to a coarser grid by linear interpolation.
    pub fn interpolate_to(&self, grid: &Grid) -> SolutionField {
        let n_self = self.len() - 1;
        let sample = |v: &[f64], t: f64| {
            let pos = t * n_self as f64;
            let i = (pos.floor() as usize).min(n_self - 1);
            let frac = pos - i as f64;
            v[i] + frac * (v[i + 1] - v[i])
        };
        SolutionField {
            x: grid.nodes().map(|t| sample(&self.x, t)).collect(),
            dx: grid.nodes().map(|t| sample(&self.dx, t)).collect(),
        }
    }

    fn enforce_boundary(&mut self) {
        let n = self.len() - 1;
        self.x[0] = 0.0;
        self.x[n] = 0.0;
        self.dx[0] = 0.0;
        self.dx[n] = 0.0;
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub update_norms: Vec<f64>,
    /// `update_k / update_{k−1}` for `k ≥ 2`.
    pub contraction_factors: Vec<f64>,
    pub final_update: f64,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub h_volterra_form: HVolterraForm,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            h_volterra_form: HVolterraForm::Derived,
        }
    }
}

/// A kernel turned into weights: lower-triangular rows for the Volterra
/// part and one weight vector over `[0, 1]` per Fredholm part.
#[derive(Debug, Clone)]
struct KernelQuadrature {
    scale: f64,
    volterra: Option<(f64, Vec<Vec<f64>>)>,
    fredholm: Vec<(Vec<f64>, Vec<f64>)>,
}

impl KernelQuadrature {
    fn build(kernel: &SeparableKernel, grid: &Grid, anchor: Option<f64>) -> Result<Self> {
        let mut out = Self {
            scale: kernel.scale,
            volterra: None,
            fredholm: Vec::new(),
        };
        if kernel.scale == 0.0 {
            return Ok(out);
        }
        if let Some(v) = kernel.volterra.filter(|v| v.coefficient != 0.0) {
            let rows = match anchor {
                Some(q) => anchored_volterra_rows(v.exponent, q, grid)?,
                None => volterra_rows(v.exponent, grid)?,
            };
            out.volterra = Some((v.coefficient, rows));
        }
        for part in kernel.fredholm.iter().filter(|p| !p.is_zero()) {
            let weights = match anchor {
                Some(q) => anchored_weights(part.s_exponent, q, grid.n_panels(), grid)?,
                None => {
                    let endpoint = if part.s_exponent <= -1.0 {
                        Endpoint::Pinned
                    } else {
                        Endpoint::Free
                    };
                    product_weights(part.s_exponent, 1.0, grid, endpoint)?
                }
            };
            let t_values = grid.nodes().map(|t| part.t_factor.eval(t)).collect();
            out.fredholm.push((t_values, weights));
        }
        Ok(out)
    }

    fn apply_volterra(&self, density: &[f64], out: &mut [f64]) {
        if let Some((coefficient, rows)) = &self.volterra {
            let c = self.scale * coefficient;
            for (o, row) in out.iter_mut().zip(rows) {
                *o += c * dot(row, density);
            }
        }
    }

    fn apply_fredholm(&self, density: &[f64], out: &mut [f64]) {
        for (t_values, weights) in &self.fredholm {
            let integral = self.scale * dot(weights, density);
            for (o, tv) in out.iter_mut().zip(t_values) {
                *o += tv * integral;
            }
        }
    }

    fn apply(&self, density: &[f64], out: &mut [f64]) {
        self.apply_volterra(density, out);
        self.apply_fredholm(density, out);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The discrete operator `Z` with all quadrature weights precomputed.
#[derive(Clone)]
pub struct Discretization {
    grid: Grid,
    forcing: Arc<dyn Forcing>,
    anchor: Option<f64>,
    g: KernelQuadrature,
    g_dt: KernelQuadrature,
    h: KernelQuadrature,
    h_dt: KernelQuadrature,
}

impl fmt::Debug for Discretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Discretization")
            .field("grid", &self.grid)
            .field("anchor", &self.anchor)
            .finish_non_exhaustive()
    }
}

impl Discretization {
    pub fn new(problem: &ProblemSpec, grid: Grid, form: HVolterraForm) -> Result<Self> {
        let anchor = problem.forcing.singular_exponent();
        if let Some(q) = anchor {
            if !(q > -1.0 && q < 0.0) {
                return Err(Error::OutOfRange {
                    name: "singular_exponent",
                    value: q,
                    range: "(-1, 0)",
                });
            }
        }
        let g = green_g(&problem.orders);
        let h = green_h(&problem.orders, form);
        Ok(Self {
            grid,
            forcing: Arc::clone(&problem.forcing),
            anchor,
            g_dt: KernelQuadrature::build(&g.dt(), &grid, anchor)?,
            g: KernelQuadrature::build(&g, &grid, anchor)?,
            h_dt: KernelQuadrature::build(&h.dt().fredholm_only(), &grid, None)?,
            h: KernelQuadrature::build(&h, &grid, None)?,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Samples of the forcing, divided by `t^q` when the forcing declares
    /// a singularity at the origin.
    fn forcing_density(&self, z: &SolutionField) -> Result<Vec<f64>> {
        let n = self.grid.n_panels();
        let mut y = vec![0.0; n + 1];
        let start = usize::from(self.anchor.is_some());
        for j in start..=n {
            let t = self.grid.node(j);
            let v = self.forcing.eval(t, z.x[j], z.dx[j]);
            if !v.is_finite() {
                return Err(Error::NonFiniteForcing { t });
            }
            y[j] = match self.anchor {
                Some(q) => v / t.powf(q),
                None => v,
            };
        }
        if self.anchor.is_some() {
            y[0] = 2.0 * y[1] - y[2];
        }
        Ok(y)
    }

    pub fn apply(&self, z: &SolutionField) -> Result<SolutionField> {
        let nodes = self.grid.n_nodes();
        for got in [z.x.len(), z.dx.len()] {
            if got != nodes {
                return Err(Error::FieldLength {
                    expected: nodes,
                    got,
                });
            }
        }
        let y = self.forcing_density(z)?;
        let mut out = SolutionField::zeros(&self.grid);
        self.g.apply(&y, &mut out.x);
        self.h.apply(&z.x, &mut out.x);
        self.g_dt.apply(&y, &mut out.dx);
        self.h_dt.apply(&z.x, &mut out.dx);
        // d/dt of the convolution part equals the same convolution of x′
        // because x(0) = 0
        self.h.apply_volterra(&z.dx, &mut out.dx);
        out.enforce_boundary();
        Ok(out)
    }

    pub fn residual(&self, z: &SolutionField) -> Result<f64> {
        Ok(self.apply(z)?.c1_distance(z))
    }

    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<(SolutionField, SolveReport)> {
        if !(tol > 0.0) {
            return Err(Error::OutOfRange {
                name: "tol",
                value: tol,
                range: "(0, inf)",
            });
        }
        if max_iter == 0 {
            return Err(Error::OutOfRange {
                name: "max_iter",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        let mut z = SolutionField::zeros(&self.grid);
        let mut update_norms: Vec<f64> = Vec::new();
        let mut contraction_factors = Vec::new();
        let mut converged = false;
        for iteration in 1..=max_iter {
            let next = self.apply(&z)?;
            let update = next.c1_distance(&z);
            if !update.is_finite() || update > DIVERGENCE_LIMIT {
                return Err(Error::Divergence { iteration, update });
            }
            if let Some(&prev) = update_norms.last() {
                contraction_factors.push(update / prev);
            }
            update_norms.push(update);
            z = next;
            if update <= tol {
                converged = true;
                break;
            }
        }
        let residual = self.residual(&z)?;
        let report = SolveReport {
            iterations: update_norms.len(),
            final_update: *update_norms.last().unwrap_or(&0.0),
            update_norms,
            contraction_factors,
            residual,
            converged,
        };
        Ok((z, report))
    }
}

/// One application of `Z` to `z`.
pub fn apply_z(p: &ProblemSpec, grid: &Grid, z: &SolutionField) -> Result<SolutionField> {
    Discretization::new(p, *grid, HVolterraForm::Derived)?.apply(z)
}

/// Picard iteration from `z₀ ≡ 0`. Running out of iterations is reported
/// through `SolveReport::converged`, not as an error.
pub fn picard_solve(
    p: &ProblemSpec,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<(SolutionField, SolveReport)> {
    Discretization::new(p, *grid, HVolterraForm::Derived)?.solve(tol, max_iter)
}

pub fn picard_solve_with(
    p: &ProblemSpec,
    grid: &Grid,
    options: &SolverOptions,
) -> Result<(SolutionField, SolveReport)> {
    Discretization::new(p, *grid, options.h_volterra_form)?.solve(options.tol, options.max_iter)
}

/// `‖Z z − z‖` in the C¹ norm.
pub fn residual_sup(p: &ProblemSpec, grid: &Grid, z: &SolutionField) -> Result<f64> {
    Discretization::new(p, *grid, HVolterraForm::Derived)?.residual(z)
}
