//! Exact fractional calculus on power functions.
//!
//! Everything here acts on sparse sums of terms `c·t^e` with `e ≥ 0` (the
//! manufactured solutions and the boundary-correction parts of the Green
//! kernels are of this form), together with the gamma function that every
//! power rule needs.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// Tolerance for deciding that an exponent is an integer.
pub const INTEGER_TOL: f64 = 1e-12;

/// Half-width of the exclusion zone around the poles of Γ.
pub const POLE_TOL: f64 = 1e-12;

const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_7;
const LANCZOS_R: f64 = 10.900511;
// Pugh (2004), 11-term Lanczos series, ~16 significant digits for z ≥ 1/2.
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

/// `sin(πz)` with the argument reduced exactly, so that the relative error
/// stays small next to the integers.
fn sin_pi(z: f64) -> f64 {
    let k = z.round();
    let r = z - k;
    let s = (PI * r).sin();
    if (k as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn lanczos(z: f64) -> f64 {
    let s = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |acc, (k, d)| acc + d / (z + k as f64 - 1.0));
    s * TWO_SQRT_E_OVER_PI * ((z - 0.5 + LANCZOS_R) / E).powf(z - 0.5)
}

/// The gamma function Γ(z) for real `z`, including negative non-integers.
///
/// Arguments below 1/2 go through the reflection formula
/// `Γ(z) Γ(1−z) = π / sin(πz)`.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if z.is_nan() {
        return Err(Error::GammaPole { z });
    }
    if z <= 0.5 {
        let k = z.round();
        if k <= 0.0 && (z - k).abs() < POLE_TOL {
            return Err(Error::GammaPole { z });
        }
        return Ok(PI / (sin_pi(z) * lanczos(1.0 - z)));
    }
    if z == z.floor() && z <= 21.0 {
        let n = z as u32;
        return Ok((1..n).fold(1.0, |acc, k| acc * k as f64));
    }
    Ok(lanczos(z))
}

/// Γ(z) for arguments the caller knows to be positive. Panics on a pole,
/// which cannot happen for `z > 0`.
pub(crate) fn gamma_pos(z: f64) -> f64 {
    debug_assert!(z > 0.0, "gamma_pos called with {z}");
    gamma_fn(z).expect("gamma of a positive argument")
}

/// Euler beta function B(a, b) for positive arguments.
pub(crate) fn beta_fn(a: f64, b: f64) -> f64 {
    gamma_pos(a) * gamma_pos(b) / gamma_pos(a + b)
}

pub(crate) fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < INTEGER_TOL
}

/// A fractional order ρ ∈ (0, 4].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 4.0 {
            Ok(Self(value))
        } else {
            Err(Error::OutOfRange {
                name: "fractional order",
                value,
                range: "(0, 4]",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `m = ⌊ρ⌋ + 1`, the number of classical derivatives under the
    /// Caputo integral.
    pub fn m(self) -> u32 {
        self.0.floor() as u32 + 1
    }
}

/// A single term `coefficient · t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn new(coefficient: f64, exponent: f64) -> Self {
        Self {
            coefficient,
            exponent,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.coefficient == 0.0 {
            return 0.0;
        }
        self.coefficient * t.powf(self.exponent)
    }

    /// Classical first derivative. Returns `None` for constants.
    pub fn derivative(&self) -> Option<PowerTerm> {
        if self.exponent == 0.0 || self.coefficient == 0.0 {
            None
        } else {
            Some(PowerTerm::new(
                self.coefficient * self.exponent,
                self.exponent - 1.0,
            ))
        }
    }

    pub fn scaled(&self, factor: f64) -> PowerTerm {
        PowerTerm::new(self.coefficient * factor, self.exponent)
    }
}

/// Sparse sum of power terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerPoly {
    terms: Vec<PowerTerm>,
}

impl PowerPoly {
    pub fn new(terms: Vec<PowerTerm>) -> Self {
        Self { terms }
    }

    /// Builds a polynomial from `(coefficient, exponent)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::new(pairs.iter().map(|&(c, e)| PowerTerm::new(c, e)).collect())
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|p| p.eval(t)).sum()
    }

    pub fn derivative(&self) -> PowerPoly {
        PowerPoly::new(
            self.terms
                .iter()
                .filter_map(PowerTerm::derivative)
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> PowerPoly {
        PowerPoly::new(self.terms.iter().map(|p| p.scaled(factor)).collect())
    }

    /// Sum of two polynomials with like exponents merged.
    pub fn plus(&self, other: &PowerPoly) -> PowerPoly {
        let mut terms = self.terms.clone();
        for q in &other.terms {
            match terms
                .iter_mut()
                .find(|p| (p.exponent - q.exponent).abs() < INTEGER_TOL)
            {
                Some(p) => p.coefficient += q.coefficient,
                None => terms.push(*q),
            }
        }
        terms.retain(|p| p.coefficient != 0.0);
        terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        PowerPoly::new(terms)
    }

    /// Smallest exponent carrying a nonzero coefficient.
    pub fn min_exponent(&self) -> Option<f64> {
        self.terms
            .iter()
            .filter(|p| p.coefficient != 0.0)
            .map(|p| p.exponent)
            .reduce(f64::min)
    }
}

impl From<Vec<PowerTerm>> for PowerPoly {
    fn from(terms: Vec<PowerTerm>) -> Self {
        Self::new(terms)
    }
}

/// Riemann–Liouville integral of a power: `I^ρ t^e = Γ(e+1)/Γ(e+ρ+1) t^{e+ρ}`.
pub fn rl_integral_power(term: PowerTerm, rho: FracOrder) -> PowerTerm {
    let e = term.exponent;
    let r = rho.value();
    PowerTerm::new(
        term.coefficient * gamma_pos(e + 1.0) / gamma_pos(e + r + 1.0),
        e + r,
    )
}

/// Caputo derivative of a power term.
///
/// Integer exponents below ρ lie in the kernel of the Caputo operator and
/// map to `None`; all other terms follow `Γ(e+1)/Γ(e−ρ+1) t^{e−ρ}`.
pub fn caputo_power(term: PowerTerm, rho: FracOrder) -> Result<Option<PowerTerm>> {
    let e = term.exponent;
    let r = rho.value();
    if is_integer(e) && e < r - INTEGER_TOL {
        return Ok(None);
    }
    if e - r <= -1.0 + INTEGER_TOL {
        return Err(Error::NonIntegrablePower {
            exponent: e,
            order: r,
        });
    }
    let denom = gamma_fn(e - r + 1.0)?;
    Ok(Some(PowerTerm::new(
        term.coefficient * gamma_pos(e + 1.0) / denom,
        e - r,
    )))
}

/// Termwise Caputo derivative, dropping annihilated terms.
pub fn caputo_poly(poly: &PowerPoly, rho: FracOrder) -> Result<PowerPoly> {
    let mut out = Vec::with_capacity(poly.len());
    for term in poly.terms() {
        if let Some(image) = caputo_power(*term, rho)? {
            out.push(image);
        }
    }
    Ok(PowerPoly::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn order(v: f64) -> FracOrder {
        FracOrder::new(v).unwrap()
    }

    #[test]
    fn gamma_known_values() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(4.0).unwrap(), 6.0);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(
            gamma_fn(-0.5).unwrap(),
            -2.0 * PI.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn gamma_against_reference_table() {
        // 40-digit reference values (mpmath).
        let table = [
            (-1.9, 5.563_454_794_543_118_03),
            (-1.5, 2.363_271_801_207_354_7),
            (-0.99, -100.436_954_665_808_691),
            (-0.3, -4.326_851_108_825_192_62),
            (0.1, 9.513_507_698_668_731_84),
            (0.7, 1.298_055_332_647_557_79),
            (1.5, 0.886_226_925_452_758_014),
            (2.5, 1.329_340_388_179_137_02),
            (3.3, 2.683_437_381_955_768_79),
            (7.25, 1_155.381_013_919_989_69),
            (9.9, 289_867.703_840_109_407),
        ];
        for (z, want) in table {
            let got = gamma_fn(z).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn gamma_poles_rejected() {
        for z in [0.0, -1.0, -2.0, -3.0, 1e-13, -2.0 + 5e-13] {
            assert!(matches!(gamma_fn(z), Err(Error::GammaPole { .. })), "{z}");
        }
        assert!(gamma_fn(-2.0 + 1e-6).is_ok());
    }

    #[test]
    fn gamma_reflection_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let z: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
            let prod = gamma_fn(z).unwrap() * gamma_fn(1.0 - z).unwrap() * (PI * z).sin() / PI;
            assert!((prod - 1.0).abs() < 1e-10, "z={z} prod={prod}");
        }
    }

    #[test]
    fn gamma_recurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 500 {
            let z: f64 = rng.gen_range(-1.9..9.0);
            if (z - z.round()).abs() < 1e-6 || (z + 1.0 - (z + 1.0).round()).abs() < 1e-6 {
                continue;
            }
            let lhs = gamma_fn(z + 1.0).unwrap();
            let rhs = z * gamma_fn(z).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            checked += 1;
        }
    }

    #[test]
    fn rl_integral_examples() {
        let p = rl_integral_power(PowerTerm::new(1.0, 0.0), order(0.5));
        assert_relative_eq!(p.coefficient, 2.0 / PI.sqrt(), max_relative = 1e-14);
        assert_eq!(p.exponent, 0.5);
        let p = rl_integral_power(PowerTerm::new(1.0, 1.0), order(0.5));
        assert_relative_eq!(p.coefficient, 4.0 / (3.0 * PI.sqrt()), max_relative = 1e-14);
        assert_relative_eq!(p.coefficient, 0.752_252_778_063_675, max_relative = 1e-13);
        assert_eq!(p.exponent, 1.5);
    }

    #[test]
    fn caputo_examples() {
        assert_eq!(
            caputo_power(PowerTerm::new(5.0, 0.0), order(0.5)).unwrap(),
            None
        );
        let p = caputo_power(PowerTerm::new(1.0, 1.0), order(0.5))
            .unwrap()
            .unwrap();
        assert_relative_eq!(p.coefficient, 2.0 / PI.sqrt(), max_relative = 1e-14);
        assert_eq!(p.exponent, 0.5);
        assert_eq!(
            caputo_power(PowerTerm::new(1.0, 2.0), order(2.5)).unwrap(),
            None
        );
        // Integer order: D¹ t = 1 is not annihilated.
        let p = caputo_power(PowerTerm::new(1.0, 1.0), order(1.0))
            .unwrap()
            .unwrap();
        assert_relative_eq!(p.coefficient, 1.0, max_relative = 1e-15);
        assert_eq!(p.exponent, 0.0);
    }

    #[test]
    fn caputo_rejects_non_integrable_images() {
        let err = caputo_power(PowerTerm::new(1.0, 1.5), order(2.5)).unwrap_err();
        assert!(matches!(err, Error::NonIntegrablePower { .. }));
        assert!(caputo_power(PowerTerm::new(1.0, 0.3), order(1.8)).is_err());
        assert!(caputo_power(PowerTerm::new(1.0, 1.2), order(1.8)).is_ok());
    }

    #[test]
    fn caputo_poly_examples() {
        let xstar = PowerPoly::from_pairs(&[(1.0, 2.0), (-2.0, 3.0), (1.0, 4.0)]);
        let image = caputo_poly(&xstar, order(0.5)).unwrap();
        assert_eq!(image.len(), 3);
        for (term, src) in image.terms().iter().zip(xstar.terms()) {
            let single = caputo_power(*src, order(0.5)).unwrap().unwrap();
            assert_eq!(*term, single);
        }
        let lin = PowerPoly::from_pairs(&[(1.0, 0.0), (1.0, 1.0)]);
        assert!(caputo_poly(&lin, order(1.5)).unwrap().is_empty());
        assert!(caputo_poly(&PowerPoly::default(), order(0.5))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn frac_order_range() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(4.5).is_err());
        assert_eq!(order(2.5).m(), 3);
        assert_eq!(order(0.5).m(), 1);
    }

    #[test]
    fn poly_plus_merges_like_terms() {
        let a = PowerPoly::from_pairs(&[(1.0, 2.0), (3.0, 0.5)]);
        let b = PowerPoly::from_pairs(&[(-1.0, 2.0), (2.0, 3.0)]);
        let c = a.plus(&b);
        assert_eq!(
            c.terms(),
            &[PowerTerm::new(3.0, 0.5), PowerTerm::new(2.0, 3.0)]
        );
    }
}
