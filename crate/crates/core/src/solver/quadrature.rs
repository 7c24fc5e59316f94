//! Product-integration weights on a uniform grid.
//!
//! For a weight `(c − s)^μ` and a density `g` known at the nodes, the
//! weights `u_j` satisfy `Σ u_j g(s_j) = ∫₀^c (c − s)^μ g̃(s) ds` exactly,
//! where `g̃` is the piecewise-linear interpolant of `g`. The panel moments
//! only depend on the distance of the panel from `c` measured in panels,
//! so a single table serves every endpoint.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::fraccalc::beta_fn;

/// Smallest admissible panel count.
pub const MIN_PANELS: usize = 8;

const GL_POINTS: usize = 12;

fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(GL_POINTS).expect("valid Gauss-Legendre degree"))
}

/// Uniform mesh `t_i = i / n_panels` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n_panels: usize,
}

impl Grid {
    pub fn new(n_panels: usize) -> Result<Self> {
        if n_panels < MIN_PANELS {
            return Err(Error::GridTooCoarse {
                got: n_panels,
                min: MIN_PANELS,
            });
        }
        Ok(Self { n_panels })
    }

    pub fn n_panels(&self) -> usize {
        self.n_panels
    }

    pub fn n_nodes(&self) -> usize {
        self.n_panels + 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_panels as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_panels as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_panels).map(move |i| self.node(i))
    }

    /// Index of the node at `c`, if `c` is a node.
    pub fn index_of(&self, c: f64) -> Option<usize> {
        let k = (c * self.n_panels as f64).round();
        if k < 0.0 || k > self.n_panels as f64 {
            return None;
        }
        ((c - k / self.n_panels as f64).abs() < 1e-12).then_some(k as usize)
    }
}

/// What the density is known to do at the upper endpoint `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Free,
    /// The density vanishes at `c`. Required for `μ ∈ (−2, −1]`, where the
    /// final panel is integrated against the interpolant pinned to zero.
    Pinned,
}

fn validate_mu(mu: f64, endpoint: Endpoint) -> Result<()> {
    if !(mu > -2.0) {
        return Err(Error::MomentOverflow { mu });
    }
    if mu <= -1.0 && endpoint == Endpoint::Free {
        return Err(Error::UnpinnedEndpoint { mu });
    }
    Ok(())
}

/// Panel moments in units of `h^{μ+1}`: for the panel whose far end is `m`
/// panels away from `c`, `far[m]` is the weight of the far node and
/// `near[m]` that of the node closer to `c`.
#[derive(Debug, Clone)]
pub(crate) struct PanelMoments {
    mu: f64,
    far: Vec<f64>,
    near: Vec<f64>,
}

impl PanelMoments {
    pub(crate) fn new(mu: f64, max_m: usize, endpoint: Endpoint) -> Result<Self> {
        validate_mu(mu, endpoint)?;
        let mut far = vec![0.0; max_m + 1];
        let mut near = vec![0.0; max_m + 1];
        if max_m >= 1 {
            far[1] = 1.0 / (mu + 2.0);
            near[1] = if mu > -1.0 {
                1.0 / ((mu + 1.0) * (mu + 2.0))
            } else {
                // unused: the density is zero at c
                0.0
            };
        }
        let gl = gauss_legendre();
        for m in 2..=max_m {
            let base = (m - 1) as f64;
            far[m] = gl.integrate(0.0, 1.0, |v| (base + v).powf(mu) * v);
            near[m] = gl.integrate(0.0, 1.0, |v| (base + v).powf(mu) * (1.0 - v));
        }
        Ok(Self { mu, far, near })
    }

    /// Weights for `∫₀^{t_k}` on a grid with spacing `h`.
    pub(crate) fn weights(&self, k: usize, h: f64) -> Vec<f64> {
        let scale = h.powf(self.mu + 1.0);
        (0..=k)
            .map(|j| {
                let mut w = 0.0;
                if j < k {
                    w += self.far[k - j];
                }
                if j >= 1 {
                    w += self.near[k - j + 1];
                }
                scale * w
            })
            .collect()
    }
}

/// Weights `u_0..=u_k` (with `t_k = c`) for `∫₀^c (c − s)^μ g(s) ds`.
pub fn product_weights(mu: f64, c: f64, grid: &Grid, endpoint: Endpoint) -> Result<Vec<f64>> {
    let k = grid.index_of(c).ok_or(Error::EndpointOffGrid { c })?;
    let moments = PanelMoments::new(mu, k, endpoint)?;
    Ok(moments.weights(k, grid.h()))
}

/// Lower-triangular weight rows for `∫₀^{t_i} (t_i − s)^μ g(s) ds`, one row
/// per node.
pub(crate) fn volterra_rows(mu: f64, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    let n = grid.n_panels();
    let moments = PanelMoments::new(mu, n, Endpoint::Free)?;
    Ok((0..=n).map(|k| moments.weights(k, grid.h())).collect())
}

/// `Σ_i binom(a, i) (−x)^i / (p + i)`, the series behind
/// `∫₀^h s^{p−1} (c − s)^a ds` with `x = h/c ≤ 1/2`.
fn binomial_moment_series(a: f64, p: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for i in 0..400 {
        let contrib = term / (p + i as f64);
        sum += contrib;
        if i >= 2 && contrib.abs() <= 1e-17 * sum.abs() {
            break;
        }
        term *= (a - i as f64) / (i as f64 + 1.0) * (-x);
    }
    sum
}

/// Weights for `∫₀^c (c − s)^μ s^q φ(s) ds` with `φ` piecewise linear,
/// for a density that is singular like `s^q` at the origin.
pub(crate) fn anchored_weights(mu: f64, q: f64, k: usize, grid: &Grid) -> Result<Vec<f64>> {
    if !(mu > -1.0) {
        return Err(Error::UnpinnedEndpoint { mu });
    }
    if !(q > -1.0) {
        return Err(Error::MomentOverflow { mu: q });
    }
    let h = grid.h();
    let mut w = vec![0.0; k + 1];
    if k == 0 {
        return Ok(w);
    }
    if k == 1 {
        let scale = h.powf(mu + q + 1.0);
        w[0] = scale * beta_fn(q + 1.0, mu + 2.0);
        w[1] = scale * beta_fn(q + 2.0, mu + 1.0);
        return Ok(w);
    }
    let c = k as f64 * h;
    let x = h / c;

    // first panel: expand (c − s)^μ around s = 0
    let m0 = c.powf(mu) * h.powf(q + 1.0) * binomial_moment_series(mu, q + 1.0, x);
    let m1 = c.powf(mu) * h.powf(q + 2.0) * binomial_moment_series(mu, q + 2.0, x);
    w[0] += m0 - m1 / h;
    w[1] += m1 / h;

    // last panel: expand s^q around s = c, with u = c − s
    let n0 = c.powf(q) * h.powf(mu + 1.0) * binomial_moment_series(q, mu + 1.0, x);
    let n1 = c.powf(q) * h.powf(mu + 2.0) * binomial_moment_series(q, mu + 2.0, x);
    w[k] += n0 - n1 / h;
    w[k - 1] += n1 / h;

    let gl = gauss_legendre();
    for p in 1..k - 1 {
        let a = p as f64 * h;
        let b = (p + 1) as f64 * h;
        let density = |s: f64| (c - s).powf(mu) * s.powf(q);
        w[p] += gl.integrate(a, b, |s| density(s) * (b - s) / h);
        w[p + 1] += gl.integrate(a, b, |s| density(s) * (s - a) / h);
    }
    Ok(w)
}

pub(crate) fn anchored_volterra_rows(mu: f64, q: f64, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    (0..=grid.n_panels())
        .map(|k| anchored_weights(mu, q, k, grid))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn grid_basics() {
        assert!(Grid::new(7).is_err());
        let g = grid(16);
        assert_eq!(g.n_nodes(), 17);
        assert_eq!(g.node(16), 1.0);
        assert_eq!(g.index_of(0.25), Some(4));
        assert_eq!(g.index_of(0.3), None);
    }

    #[test]
    fn flat_weight_is_trapezoid() {
        let g = grid(10);
        let w = product_weights(0.0, 1.0, &g, Endpoint::Free).unwrap();
        assert_abs_diff_eq!(w[0], 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(w[10], 0.05, epsilon = 1e-15);
        for wi in &w[1..10] {
            assert_abs_diff_eq!(*wi, 0.1, epsilon = 1e-15);
        }
    }

    #[test]
    fn singular_weight_total_mass() {
        let g = grid(32);
        let w = product_weights(-0.5, 1.0, &g, Endpoint::Free).unwrap();
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn linear_density_is_exact() {
        let g = grid(32);
        let w = product_weights(0.5, 1.0, &g, Endpoint::Free).unwrap();
        let total: f64 = w.iter().zip(g.nodes()).map(|(w, s)| w * s).sum();
        assert_abs_diff_eq!(total, 4.0 / 15.0, epsilon = 1e-14);
    }

    #[test]
    fn interior_endpoint() {
        // ∫₀^{1/2} (1/2 − s)^{-0.3} ds = (1/2)^{0.7} / 0.7
        let g = grid(16);
        let w = product_weights(-0.3, 0.5, &g, Endpoint::Free).unwrap();
        assert_eq!(w.len(), 9);
        assert_abs_diff_eq!(
            w.iter().sum::<f64>(),
            0.5f64.powf(0.7) / 0.7,
            epsilon = 1e-14
        );
    }

    #[test]
    fn pinned_rule_on_vanishing_density() {
        // ∫₀¹ (1−s)^{-1.5} (1−s) ds = 2 ; the density 1 − s is linear and
        // vanishes at s = 1, so the pinned rule is exact.
        let g = grid(64);
        let w = product_weights(-1.5, 1.0, &g, Endpoint::Pinned).unwrap();
        assert_eq!(w[64], 0.0);
        let total: f64 = w.iter().zip(g.nodes()).map(|(w, s)| w * (1.0 - s)).sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn weight_exponent_errors() {
        let g = grid(8);
        assert!(matches!(
            product_weights(-2.0, 1.0, &g, Endpoint::Pinned),
            Err(Error::MomentOverflow { .. })
        ));
        assert!(matches!(
            product_weights(-1.5, 1.0, &g, Endpoint::Free),
            Err(Error::UnpinnedEndpoint { .. })
        ));
        assert!(matches!(
            product_weights(0.5, 0.3, &g, Endpoint::Free),
            Err(Error::EndpointOffGrid { .. })
        ));
    }

    #[test]
    fn volterra_rows_match_direct_weights() {
        let g = grid(12);
        let rows = volterra_rows(-0.4, &g).unwrap();
        for k in 0..=12 {
            let direct = product_weights(-0.4, g.node(k), &g, Endpoint::Free).unwrap();
            assert_eq!(rows[k], direct);
        }
    }

    #[test]
    fn anchored_weights_integrate_beta_moments() {
        // ∫₀^c (c−s)^μ s^q ds = c^{μ+q+1} B(q+1, μ+1) for φ ≡ 1, and with
        // φ(s) = s the exponent of s rises by one.
        let g = grid(16);
        let (mu, q) = (1.3, -0.6);
        for k in [1, 2, 3, 9, 16] {
            let c = g.node(k);
            let w = anchored_weights(mu, q, k, &g).unwrap();
            let m0: f64 = w.iter().sum();
            let m1: f64 = w.iter().enumerate().map(|(j, w)| w * g.node(j)).sum();
            assert_abs_diff_eq!(
                m0,
                c.powf(mu + q + 1.0) * beta_fn(q + 1.0, mu + 1.0),
                epsilon = 1e-14
            );
            assert_abs_diff_eq!(
                m1,
                c.powf(mu + q + 2.0) * beta_fn(q + 2.0, mu + 1.0),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn anchored_with_zero_singularity_matches_plain_weights() {
        let g = grid(16);
        for k in [2, 5, 16] {
            let a = anchored_weights(0.7, 0.0, k, &g).unwrap();
            let p = product_weights(0.7, g.node(k), &g, Endpoint::Free).unwrap();
            for (x, y) in a.iter().zip(&p) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-15);
            }
        }
    }
}
