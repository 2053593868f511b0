//! Edge probability densities on `[−1, 1]`, their moments, and the quadratic
//! polynomials orthogonal to linears that they induce.
//!
//! Two closed-form two-parameter families are provided, both derived from a
//! generalized truncated normal profile in the bivariate function `H`:
//!
//! * family 1: `k̃(t) = μ / γ^mod((4μ−3)/(2μ), z₁) · (t²)^{2μ−2} · exp(−½ (t²/σ²)^μ)`,
//!   `z₁ = 1/(2σ^{2μ})`;
//! * family 2: `g̃(t) = (2μ−1) / γ^mod(½, z₂) · (t²)^{μ−1} · exp(−½ (t²/σ²)^{2μ−1})`,
//!   `z₂ = 1/(2σ^{4μ−2})`.
//!
//! Both tend to symmetric power densities as `σ → ∞`; those limits are
//! modelled exactly by [`LimitBetaDensity`]. Arbitrary user densities are
//! handled by [`GeneralDensity`], whose moments come from quadrature.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::geometry::{h_from_barycentric, Point2, Triangle};
use crate::quadrature::{integrate_edge, Rule1D};
use crate::special_functions::{modified_incomplete_gamma, modified_incomplete_gamma_limit};

/// Number of moments (orders `0..MOMENT_COUNT`) cached by [`GeneralDensity`].
pub const MOMENT_COUNT: usize = 9;

/// The closed-form families are treated as zero where their exponential
/// factor drops below `e^{−SUPPORT_EXPONENT}`.
const SUPPORT_EXPONENT: f64 = 40.0;

fn check_params(sigma: f64, mu: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return domain(format!(
            "scale parameter sigma must be positive, got {sigma}"
        ));
    }
    if !(mu >= 1.0) || !mu.is_finite() {
        return domain(format!("shape parameter mu must be >= 1, got {mu}"));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&t) {
        return domain(format!("edge parameter must lie in [-1, 1], got {t}"));
    }
    Ok(())
}

/// `base^exp`, with integer exponents taken through `powi` so negative bases work.
#[inline]
fn real_pow(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() < i32::MAX as f64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

/// First family of edge densities `k̃_{σ,μ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Family1Density {
    sigma: f64,
    mu: f64,
    z: f64,
    base_gamma: f64,
    normalization: f64,
    m2: f64,
    m4: f64,
}

impl Family1Density {
    pub fn new(sigma: f64, mu: f64) -> Result<Self> {
        check_params(sigma, mu)?;
        let z = 0.5 / sigma.powf(2.0 * mu);
        let base_gamma = modified_incomplete_gamma((4.0 * mu - 3.0) / (2.0 * mu), z)?;
        let moment = |k: f64| -> Result<f64> {
            Ok(modified_incomplete_gamma((2.0 * k + 4.0 * mu - 3.0) / (2.0 * mu), z)? / base_gamma)
        };
        Ok(Self {
            sigma,
            mu,
            z,
            base_gamma,
            normalization: mu / base_gamma,
            m2: moment(1.0)?,
            m4: moment(2.0)?,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// The normalization constant `a_{σ,μ}`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Density value; `t` is assumed to lie in `[−1, 1]`.
    #[inline]
    pub fn pdf(&self, t: f64) -> f64 {
        let t2 = t * t;
        self.normalization
            * real_pow(t2, 2.0 * self.mu - 2.0)
            * (-0.5 * real_pow(t2 / (self.sigma * self.sigma), self.mu)).exp()
    }

    /// Moment of order `m` from the incomplete gamma ratio; odd moments vanish.
    pub fn moment(&self, m: u32) -> Result<f64> {
        if m % 2 == 1 {
            return Ok(0.0);
        }
        let k = f64::from(m / 2);
        let s = (2.0 * k + 4.0 * self.mu - 3.0) / (2.0 * self.mu);
        Ok(modified_incomplete_gamma(s, self.z)? / self.base_gamma)
    }

    pub fn second_moment(&self) -> f64 {
        self.m2
    }

    pub fn fourth_moment(&self) -> f64 {
        self.m4
    }

    /// Half-width beyond which the density is below `e^{−40}` of its scale.
    pub fn effective_support(&self) -> f64 {
        (self.sigma * (2.0 * SUPPORT_EXPONENT).powf(1.0 / (2.0 * self.mu))).min(1.0)
    }

    /// The σ → ∞ limit of this family at the same shape parameter.
    pub fn limit(&self) -> LimitBetaDensity {
        LimitBetaDensity {
            mu: self.mu,
            family: LimitFamily::First,
        }
    }
}

/// Second family of edge densities `g̃_{σ,μ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Family2Density {
    sigma: f64,
    mu: f64,
    z: f64,
    base_gamma: f64,
    normalization: f64,
    m2: f64,
    m4: f64,
}

impl Family2Density {
    pub fn new(sigma: f64, mu: f64) -> Result<Self> {
        check_params(sigma, mu)?;
        let z = 0.5 / sigma.powf(4.0 * mu - 2.0);
        let base_gamma = modified_incomplete_gamma(0.5, z)?;
        let moment = |k: f64| -> Result<f64> {
            let s = (2.0 * k + 2.0 * mu - 1.0) / (2.0 * (2.0 * mu - 1.0));
            Ok(modified_incomplete_gamma(s, z)? / base_gamma)
        };
        Ok(Self {
            sigma,
            mu,
            z,
            base_gamma,
            normalization: (2.0 * mu - 1.0) / base_gamma,
            m2: moment(1.0)?,
            m4: moment(2.0)?,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    #[inline]
    pub fn pdf(&self, t: f64) -> f64 {
        let t2 = t * t;
        self.normalization
            * real_pow(t2, self.mu - 1.0)
            * (-0.5 * real_pow(t2 / (self.sigma * self.sigma), 2.0 * self.mu - 1.0)).exp()
    }

    pub fn moment(&self, m: u32) -> Result<f64> {
        if m % 2 == 1 {
            return Ok(0.0);
        }
        let k = f64::from(m / 2);
        let s = (2.0 * k + 2.0 * self.mu - 1.0) / (2.0 * (2.0 * self.mu - 1.0));
        Ok(modified_incomplete_gamma(s, self.z)? / self.base_gamma)
    }

    pub fn second_moment(&self) -> f64 {
        self.m2
    }

    pub fn fourth_moment(&self) -> f64 {
        self.m4
    }

    pub fn effective_support(&self) -> f64 {
        (self.sigma * (2.0 * SUPPORT_EXPONENT).powf(1.0 / (2.0 * (2.0 * self.mu - 1.0)))).min(1.0)
    }

    pub fn limit(&self) -> LimitBetaDensity {
        LimitBetaDensity {
            mu: self.mu,
            family: LimitFamily::Second,
        }
    }
}

/// Which family a [`LimitBetaDensity`] is the σ → ∞ limit of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitFamily {
    /// `((4μ−3)/2) (t²)^{2μ−2}`
    First,
    /// `((2μ−1)/2) (t²)^{μ−1}`
    Second,
}

/// Symmetric power density reached by either family as σ → ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitBetaDensity {
    mu: f64,
    family: LimitFamily,
}

impl LimitBetaDensity {
    pub fn new(mu: f64, family: LimitFamily) -> Result<Self> {
        check_params(1.0, mu)?;
        Ok(Self { mu, family })
    }

    /// The uniform density `1/2`, i.e. the family-1 limit at `μ = 1`.
    pub fn uniform() -> Self {
        Self {
            mu: 1.0,
            family: LimitFamily::First,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn family(&self) -> LimitFamily {
        self.family
    }

    /// `(p + 1)/2 · (t²)^{p/2}` where `p` is the power of `|t|`.
    fn power(&self) -> f64 {
        match self.family {
            LimitFamily::First => 4.0 * self.mu - 4.0,
            LimitFamily::Second => 2.0 * self.mu - 2.0,
        }
    }

    #[inline]
    pub fn pdf(&self, t: f64) -> f64 {
        let p = self.power();
        0.5 * (p + 1.0) * real_pow(t * t, 0.5 * p)
    }

    /// `(p+1)/(m+p+1)` for even `m`, zero for odd.
    pub fn moment(&self, m: u32) -> f64 {
        if m % 2 == 1 {
            return 0.0;
        }
        let p = self.power();
        // same value as the ratio of limiting modified gamma functions
        let s0 = (p + 1.0) / 2.0;
        let sk = (f64::from(m) + p + 1.0) / 2.0;
        modified_incomplete_gamma_limit(sk) / modified_incomplete_gamma_limit(s0)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An arbitrary probability density on `[−1, 1]`, with moments computed by
/// quadrature once at construction.
#[derive(Clone)]
pub struct GeneralDensity {
    evaluator: Evaluator,
    rule: Rule1D,
    moments: [f64; MOMENT_COUNT],
    even: bool,
}

impl fmt::Debug for GeneralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralDensity")
            .field("nodes", &self.rule.len())
            .field("moments", &self.moments)
            .field("even", &self.even)
            .finish()
    }
}

impl GeneralDensity {
    /// Wraps `f`, which must already integrate to one (within `1e−8`).
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::with_rule(f, Rule1D::edge_default())
    }

    pub fn with_rule(f: impl Fn(f64) -> f64 + Send + Sync + 'static, rule: Rule1D) -> Result<Self> {
        Self::build(Arc::new(f), rule)
    }

    /// Wraps `f` after dividing it by its mass; returns the density and the
    /// original mass.
    pub fn normalized(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        rule: Rule1D,
    ) -> Result<(Self, f64)> {
        let mass = integrate_edge(&f, &rule)?;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidDensity(format!(
                "cannot normalize a function with mass {mass}"
            )));
        }
        let density = Self::build(Arc::new(move |t| f(t) / mass), rule)?;
        Ok((density, mass))
    }

    fn build(evaluator: Evaluator, rule: Rule1D) -> Result<Self> {
        let mut peak = 0.0f64;
        for &t in rule.nodes() {
            let v = evaluator(t);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDensity(format!(
                    "density value {v} at t = {t} is negative or non-finite"
                )));
            }
            peak = peak.max(v);
        }
        let mut moments = [0.0; MOMENT_COUNT];
        for (m, slot) in moments.iter_mut().enumerate() {
            *slot = integrate_edge(|t| t.powi(m as i32) * evaluator(t), &rule)?;
        }
        if (moments[0] - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidDensity(format!(
                "density has mass {} instead of 1",
                moments[0]
            )));
        }
        let variance = moments[2] - moments[1] * moments[1];
        if !(variance > 1e-12) {
            return Err(Error::InvalidDensity(format!(
                "density has degenerate variance {variance:e}"
            )));
        }
        let asymmetry = rule
            .nodes()
            .iter()
            .map(|&t| (evaluator(t) - evaluator(-t)).abs())
            .fold(0.0, f64::max);
        let even = asymmetry <= 1e-12 * peak.max(f64::MIN_POSITIVE);
        Ok(Self {
            evaluator,
            rule,
            moments,
            even,
        })
    }

    /// Recomputes the moment cache with a different (typically finer) rule.
    pub fn recompute_moments(&self, rule: Rule1D) -> Result<Self> {
        Self::build(Arc::clone(&self.evaluator), rule)
    }

    #[inline]
    pub fn pdf(&self, t: f64) -> f64 {
        (self.evaluator)(t)
    }

    /// Cached moment `∫ tᵐ ω`, for `m < MOMENT_COUNT`.
    pub fn moment(&self, m: u32) -> Result<f64> {
        self.moments
            .get(m as usize)
            .copied()
            .ok_or_else(|| Error::Domain(format!("moment order {m} is not cached")))
    }

    pub fn moments(&self) -> &[f64; MOMENT_COUNT] {
        &self.moments
    }

    pub fn rule(&self) -> &Rule1D {
        &self.rule
    }

    /// Whether `ω(t) = ω(−t)` at every quadrature node.
    pub fn is_even(&self) -> bool {
        self.even
    }

    /// `∫ g ω` with the density's own rule.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        integrate_edge(|t| g(t) * self.pdf(t), &self.rule)
    }
}

/// Any density usable for edge functionals.
#[derive(Clone, Debug)]
pub enum EdgeDensity {
    Family1(Family1Density),
    Family2(Family2Density),
    Limit(LimitBetaDensity),
    General(GeneralDensity),
}

impl EdgeDensity {
    #[inline]
    pub fn pdf(&self, t: f64) -> f64 {
        match self {
            EdgeDensity::Family1(d) => d.pdf(t),
            EdgeDensity::Family2(d) => d.pdf(t),
            EdgeDensity::Limit(d) => d.pdf(t),
            EdgeDensity::General(d) => d.pdf(t),
        }
    }

    pub fn moment(&self, m: u32) -> Result<f64> {
        match self {
            EdgeDensity::Family1(d) => d.moment(m),
            EdgeDensity::Family2(d) => d.moment(m),
            EdgeDensity::Limit(d) => Ok(d.moment(m)),
            EdgeDensity::General(d) => d.moment(m),
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            EdgeDensity::General(d) => d.is_even(),
            _ => true,
        }
    }

    /// Half-width of the interval carrying the density's mass.
    pub fn effective_support(&self) -> f64 {
        match self {
            EdgeDensity::Family1(d) => d.effective_support(),
            EdgeDensity::Family2(d) => d.effective_support(),
            _ => 1.0,
        }
    }

    /// `m`-node Gauss–Legendre on each half of the effective support.
    pub fn edge_rule(&self, m: usize) -> Rule1D {
        Rule1D::split_at_origin_on(m, self.effective_support())
    }
}

impl From<Family1Density> for EdgeDensity {
    fn from(d: Family1Density) -> Self {
        EdgeDensity::Family1(d)
    }
}

impl From<Family2Density> for EdgeDensity {
    fn from(d: Family2Density) -> Self {
        EdgeDensity::Family2(d)
    }
}

impl From<LimitBetaDensity> for EdgeDensity {
    fn from(d: LimitBetaDensity) -> Self {
        EdgeDensity::Limit(d)
    }
}

impl From<GeneralDensity> for EdgeDensity {
    fn from(d: GeneralDensity) -> Self {
        EdgeDensity::General(d)
    }
}

/// Checked evaluation of `k̃_{σ,μ}(t)`.
pub fn family1_pdf(sigma: f64, mu: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(Family1Density::new(sigma, mu)?.pdf(t))
}

/// Moment `t_{m,σ,μ}` of the first family.
pub fn family1_moment(sigma: f64, mu: f64, m: u32) -> Result<f64> {
    Family1Density::new(sigma, mu)?.moment(m)
}

/// Checked evaluation of `g̃_{σ,μ}(t)`.
pub fn family2_pdf(sigma: f64, mu: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(Family2Density::new(sigma, mu)?.pdf(t))
}

/// Moment `s_{m,σ,μ}` of the second family.
pub fn family2_moment(sigma: f64, mu: f64, m: u32) -> Result<f64> {
    Family2Density::new(sigma, mu)?.moment(m)
}

/// Bivariate first-family weight `K_{σ,μ}` on a triangle.
///
/// Nonnegative on the whole triangle for integer `μ`; for non-integer `μ`
/// the factor `(H/σ²)^μ` is undefined where `H < 0` and NaN is returned.
pub fn family1_weight(density: &Family1Density, tri: &Triangle, p: Point2) -> f64 {
    let h = h_from_barycentric(&tri.barycentric(p));
    let mu = density.mu;
    density.normalization
        * real_pow(h * h, mu - 1.0)
        * (-0.5 * real_pow(h / (density.sigma * density.sigma), mu)).exp()
}

/// Bivariate second-family function `G_{σ,μ}` on a triangle.
///
/// Only its edge restriction is a density; inside the triangle `H` changes
/// sign (`H = −1/3` at the centroid) and `G` may be negative or undefined.
pub fn family2_weight(density: &Family2Density, tri: &Triangle, p: Point2) -> f64 {
    let h = h_from_barycentric(&tri.barycentric(p));
    let mu = density.mu;
    density.normalization
        * real_pow(h, mu - 1.0)
        * (-0.5 * real_pow(h / (density.sigma * density.sigma), 2.0 * mu - 1.0)).exp()
}

/// A quadratic `q(t) = c₂t² + c₁t + c₀` orthogonal to linear polynomials
/// under some edge density `ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthoQuadratic {
    coefficients: [f64; 3],
    norm_sq: f64,
    second_moment_value: f64,
    residuals: [f64; 2],
}

impl OrthoQuadratic {
    /// Coefficients `[c₀, c₁, c₂]`.
    pub fn coefficients(&self) -> [f64; 3] {
        self.coefficients
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let [c0, c1, c2] = self.coefficients;
        (c2 * t + c1) * t + c0
    }

    /// `‖q‖² = ∫ q² ω`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `∫ t² q ω`, the value the `L` functionals pick up from `λᵢ²`.
    /// Equals `‖q‖²` when `c₂ = 1`.
    pub fn second_moment_value(&self) -> f64 {
        self.second_moment_value
    }

    /// `[∫ q ω, ∫ t q ω]`.
    pub fn residuals(&self) -> [f64; 2] {
        self.residuals
    }

    /// `q / ν` with `ν = ∫ t² q ω`, so that the normalized polynomial has
    /// unit second-moment value.
    pub fn normalized(&self) -> OrthoQuadratic {
        let nu = self.second_moment_value;
        OrthoQuadratic {
            coefficients: self.coefficients.map(|c| c / nu),
            norm_sq: self.norm_sq / (nu * nu),
            second_moment_value: 1.0,
            residuals: self.residuals.map(|r| r / nu),
        }
    }

    /// Builds from arbitrary coefficients, measuring everything against `density`.
    pub fn from_coefficients(coefficients: [f64; 3], density: &EdgeDensity) -> Result<Self> {
        let mu = |m| density.moment(m);
        let [c0, c1, c2] = coefficients;
        let q_moment =
            |k: u32| -> Result<f64> { Ok(c0 * mu(k)? + c1 * mu(k + 1)? + c2 * mu(k + 2)?) };
        let residuals = [q_moment(0)?, q_moment(1)?];
        let second_moment_value = q_moment(2)?;
        // ∫q²ω = Σ cᵢcⱼ μ_{i+j}
        let mut norm_sq = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                norm_sq += coefficients[i] * coefficients[j] * mu((i + j) as u32)?;
            }
        }
        Ok(Self {
            coefficients,
            norm_sq,
            second_moment_value,
            residuals,
        })
    }
}

/// `q(t) = t² − m₂` for a closed-form (even) density, with `‖q‖² = m₄ − m₂²`.
pub fn ortho_quadratic_closed_form(density: &EdgeDensity) -> Result<OrthoQuadratic> {
    let (m2, m4) = match density {
        EdgeDensity::Family1(d) => (d.second_moment(), d.fourth_moment()),
        EdgeDensity::Family2(d) => (d.second_moment(), d.fourth_moment()),
        EdgeDensity::Limit(d) => (d.moment(2), d.moment(4)),
        EdgeDensity::General(_) => {
            return domain("closed-form orthogonal quadratic needs a closed-form density")
        }
    };
    let norm_sq = m4 - m2 * m2;
    Ok(OrthoQuadratic {
        coefficients: [-m2, 0.0, 1.0],
        norm_sq,
        second_moment_value: norm_sq,
        residuals: [0.0, 0.0],
    })
}

/// Canonical form `q(t) = t² − a − bt` from the first four moments.
pub fn ortho_quadratic_canonical(density: &GeneralDensity) -> Result<OrthoQuadratic> {
    let m = density.moments();
    let (m1, m2, m3) = (m[1], m[2], m[3]);
    let variance = m2 - m1 * m1;
    if !(variance > 1e-12) {
        return Err(Error::Degenerate(format!(
            "variance {variance:e} is too small"
        )));
    }
    let b = (m1 * m2 - m3) / (m1 * m1 - m2);
    let a = m2 - b * m1;
    let nu = m[4] - a * m2 - b * m3;
    if !(nu.abs() > 1e-14) {
        return Err(Error::Degenerate(format!(
            "second-moment value {nu:e} of the canonical quadratic vanishes"
        )));
    }
    let coefficients = [-a, -b, 1.0];
    let norm_sq = density.integrate(|t| {
        let q = (t - b) * t - a;
        q * q
    })?;
    let q =
        OrthoQuadratic::from_coefficients(coefficients, &EdgeDensity::General(density.clone()))?;
    Ok(OrthoQuadratic { norm_sq, ..q })
}

/// Orthonormal `π₂` from Gram–Schmidt on `{1, t, t²}` under `⟨f, g⟩ = ∫ f g ω`.
pub fn ortho_quadratic_gram_schmidt(density: &GeneralDensity) -> Result<OrthoQuadratic> {
    let m = density.moments();
    // ⟨p, r⟩ for coefficient vectors in the monomial basis
    let inner = |p: &[f64; 3], r: &[f64; 3]| -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += p[i] * r[j] * m[i + j];
            }
        }
        s
    };
    let mut basis: Vec<[f64; 3]> = Vec::with_capacity(3);
    for k in 0..3 {
        let mut v = [0.0; 3];
        v[k] = 1.0;
        // modified Gram–Schmidt
        for e in &basis {
            let proj = inner(&v, e);
            for i in 0..3 {
                v[i] -= proj * e[i];
            }
        }
        let norm_sq = inner(&v, &v);
        if !(norm_sq > 1e-14) {
            return Err(Error::Degenerate(format!(
                "Gram-Schmidt step {k} has norm {norm_sq:e}"
            )));
        }
        let norm = norm_sq.sqrt();
        basis.push(v.map(|c| c / norm));
    }
    let pi2 = basis[2];
    let norm_sq = density.integrate(|t| {
        let q = (pi2[2] * t + pi2[1]) * t + pi2[0];
        q * q
    })?;
    let q = OrthoQuadratic::from_coefficients(pi2, &EdgeDensity::General(density.clone()))?;
    Ok(OrthoQuadratic { norm_sq, ..q })
}

/// Report produced by [`validate_user_q`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QValidation {
    /// `∫ q ω`
    pub constant_residual: f64,
    /// `∫ t q ω`
    pub linear_residual: f64,
    /// `∫ t² q ω`
    pub second_moment_value: f64,
    pub accepted: bool,
}

/// Checks that a user polynomial (ascending coefficients, degree ≥ 2) is
/// orthogonal to linears under `ω` and picks up quadratic content.
pub fn validate_user_q(density: &GeneralDensity, coefficients: &[f64]) -> QValidation {
    let q = |t: f64| coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c);
    let integrate = |g: &dyn Fn(f64) -> f64| density.integrate(g).unwrap_or(f64::NAN);
    let constant_residual = integrate(&|t| q(t));
    let linear_residual = integrate(&|t| t * q(t));
    let second_moment_value = integrate(&|t| t * t * q(t));
    let degree_ok = coefficients
        .iter()
        .rposition(|&c| c != 0.0)
        .is_some_and(|d| d >= 2);
    let accepted = degree_ok
        && constant_residual.abs() <= 1e-8
        && linear_residual.abs() <= 1e-8
        && second_moment_value.abs() > 1e-10;
    QValidation {
        constant_residual,
        linear_residual,
        second_moment_value,
        accepted,
    }
}

/// A density read from a sample table.
#[derive(Clone, Debug)]
pub struct LoadedDensity {
    pub density: GeneralDensity,
    /// Mass of the interpolated table before renormalization.
    pub raw_mass: f64,
    pub samples: usize,
}

/// Parses rows of `t, ω(t)` (comma, semicolon, tab or space separated).
/// Lines starting with `#` and a non-numeric header are skipped. The samples
/// must be strictly increasing in `t` and cover `[−1, 1]`; values in between
/// are linearly interpolated and the result is renormalized to unit mass.
pub fn parse_density_table(text: &str, rule: Rule1D) -> Result<LoadedDensity> {
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() < 2 {
            return Err(Error::Parse(format!(
                "line {}: expected two columns",
                lineno + 1
            )));
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(t), Ok(w)) => {
                if !t.is_finite() || !w.is_finite() || w < 0.0 {
                    return Err(Error::Parse(format!(
                        "line {}: invalid sample ({t}, {w})",
                        lineno + 1
                    )));
                }
                if let Some(&prev) = ts.last() {
                    if t <= prev {
                        return Err(Error::Parse(format!(
                            "line {}: t values must be strictly increasing",
                            lineno + 1
                        )));
                    }
                }
                ts.push(t);
                ws.push(w);
            }
            _ if ts.is_empty() => continue, // header
            _ => {
                return Err(Error::Parse(format!(
                    "line {}: non-numeric sample",
                    lineno + 1
                )));
            }
        }
    }
    if ts.len() < 2 || ts[0] > -1.0 || *ts.last().unwrap() < 1.0 {
        return Err(Error::Parse(
            "density table must contain at least two samples covering [-1, 1]".into(),
        ));
    }
    let samples = ts.len();
    let interp = move |t: f64| -> f64 {
        let k = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
        let (t0, t1) = (ts[k - 1], ts[k]);
        let s = (t - t0) / (t1 - t0);
        (1.0 - s) * ws[k - 1] + s * ws[k]
    };
    let (density, raw_mass) = GeneralDensity::normalized(interp, rule)?;
    Ok(LoadedDensity {
        density,
        raw_mass,
        samples,
    })
}

/// Reads a density table from disk; see [`parse_density_table`].
pub fn load_density_table(path: impl AsRef<Path>, rule: Rule1D) -> Result<LoadedDensity> {
    let text = std::fs::read_to_string(path)?;
    parse_density_table(&text, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    const SIGMAS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
    const MUS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

    fn quad(f: impl Fn(f64) -> f64) -> f64 {
        integrate_edge(f, &Rule1D::edge_default()).unwrap()
    }

    fn quad_for(density: &EdgeDensity, f: impl Fn(f64) -> f64) -> f64 {
        integrate_edge(f, &density.edge_rule(50)).unwrap()
    }

    #[test]
    fn family1_examples() {
        // truncated normal at μ = 1
        let s: f64 = 1.0;
        let g = modified_incomplete_gamma(0.5, 0.5).unwrap();
        for t in [-0.8, 0.0, 0.3, 1.0] {
            let expected = (-0.5 * t * t / (s * s)).exp() / g;
            assert!((family1_pdf(s, 1.0, t).unwrap() - expected).abs() < 1e-14);
        }
        assert!((family1_pdf(1e3, 2.0, 0.5).unwrap() - 0.15625).abs() < 1e-4);
        assert_eq!(family1_pdf(0.5, 2.0, 0.0).unwrap(), 0.0);
        assert!(family1_pdf(0.5, 2.0, 1.1).is_err());
        assert!(family1_pdf(0.0, 2.0, 0.1).is_err());
        assert!(family1_pdf(1.0, 0.9, 0.1).is_err());
    }

    #[test]
    fn family1_moment_examples() {
        assert!((family1_moment(0.7, 2.0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(family1_moment(0.7, 2.5, 3).unwrap(), 0.0);
        assert!((family1_moment(1e6, 2.0, 2).unwrap() - 5.0 / 7.0).abs() < 1e-5);
    }

    #[test]
    fn family2_examples() {
        for t in [-1.0, -0.4, 0.0, 0.25, 0.9] {
            for s in [0.3, 1.0, 4.0] {
                let a = family2_pdf(s, 1.0, t).unwrap();
                let b = family1_pdf(s, 1.0, t).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!((family2_pdf(1e3, 3.0, 0.5).unwrap() - 0.15625).abs() < 1e-4);
        assert_eq!(family2_pdf(0.5, 2.0, 0.0).unwrap(), 0.0);
        assert!((family2_moment(0.7, 2.0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(family2_moment(0.7, 2.0, 5).unwrap(), 0.0);
        assert!((family2_moment(1e6, 2.0, 2).unwrap() - 0.6).abs() < 1e-5);
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        for &s in &SIGMAS {
            for &mu in &MUS {
                let d1 = Family1Density::new(s, mu).unwrap();
                let d2 = Family2Density::new(s, mu).unwrap();
                let r1 = EdgeDensity::from(d1).edge_rule(50);
                let r2 = EdgeDensity::from(d2).edge_rule(50);
                for m in 0..=6u32 {
                    let q1 = integrate_edge(|t| t.powi(m as i32) * d1.pdf(t), &r1).unwrap();
                    let q2 = integrate_edge(|t| t.powi(m as i32) * d2.pdf(t), &r2).unwrap();
                    assert!(
                        (d1.moment(m).unwrap() - q1).abs() < 1e-9,
                        "f1 s={s} mu={mu} m={m}"
                    );
                    assert!(
                        (d2.moment(m).unwrap() - q2).abs() < 1e-9,
                        "f2 s={s} mu={mu} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn moments_match_frozen_high_precision_values() {
        // 30-digit adaptive quadrature of the unnormalized profiles (mpmath)
        let cases1 = [
            (1.0, 2.0, 0.684_829_112_105_191_5, 0.517_207_986_957_948),
            (0.5, 2.0, 0.358_041_682_789_399_6, 0.155_627_163_930_725_8),
            (
                0.25,
                3.0,
                0.083_581_309_882_846_95,
                0.007_572_951_139_592_335,
            ),
            (2.0, 1.5, 0.595_308_358_699_373_7, 0.423_218_929_994_553_8),
        ];
        for (s, mu, m2, m4) in cases1 {
            let d = Family1Density::new(s, mu).unwrap();
            assert!((d.second_moment() - m2).abs() < 1e-13, "s={s} mu={mu}");
            assert!((d.fourth_moment() - m4).abs() < 1e-13, "s={s} mu={mu}");
        }
        let cases2 = [
            (0.7, 2.0, 0.390_774_374_162_243_9, 0.196_151_111_331_456_1),
            (1.0, 2.0, 0.564_764_597_351_008_1, 0.386_449_923_432_722_4),
            (0.5, 1.5, 0.199_416_856_646_818_8, 0.062_433_080_648_279_61),
        ];
        for (s, mu, m2, m4) in cases2 {
            let d = Family2Density::new(s, mu).unwrap();
            assert!((d.second_moment() - m2).abs() < 1e-13, "s={s} mu={mu}");
            assert!((d.fourth_moment() - m4).abs() < 1e-13, "s={s} mu={mu}");
        }
    }

    #[test]
    fn unit_mass_and_evenness() {
        for &s in &SIGMAS {
            for &mu in &MUS {
                let d1 = Family1Density::new(s, mu).unwrap();
                let d2 = Family2Density::new(s, mu).unwrap();
                assert!((quad_for(&d1.into(), |t| d1.pdf(t)) - 1.0).abs() < 1e-10);
                assert!((quad_for(&d2.into(), |t| d2.pdf(t)) - 1.0).abs() < 1e-10);
                for t in [0.1, 0.37, 0.9] {
                    assert_eq!(d1.pdf(t), d1.pdf(-t));
                    assert_eq!(d2.pdf(t), d2.pdf(-t));
                }
            }
        }
        // the plain 50-node rule example
        let d = Family1Density::new(1.0, 2.0).unwrap();
        let mass = integrate_edge(|t| d.pdf(t), &gauss_legendre(50)).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn beta_limit_is_approached_monotonically() {
        for &mu in &MUS {
            for family in [LimitFamily::First, LimitFamily::Second] {
                let limit = LimitBetaDensity::new(mu, family).unwrap();
                let mut prev = f64::INFINITY;
                for s in [10.0, 1e2, 1e3, 1e4] {
                    let sup = (0..=200)
                        .map(|k| -1.0 + 0.01 * k as f64)
                        .map(|t| {
                            let v = match family {
                                LimitFamily::First => Family1Density::new(s, mu).unwrap().pdf(t),
                                LimitFamily::Second => Family2Density::new(s, mu).unwrap().pdf(t),
                            };
                            (v - limit.pdf(t)).abs()
                        })
                        .fold(0.0, f64::max);
                    assert!(sup < prev || sup < 1e-14, "mu={mu} {family:?} s={s}: {sup}");
                    prev = sup;
                }
                assert!(prev < 1e-6);
            }
        }
    }

    #[test]
    fn limit_densities_have_unit_mass_and_known_moments() {
        for &mu in &MUS {
            for family in [LimitFamily::First, LimitFamily::Second] {
                let d = LimitBetaDensity::new(mu, family).unwrap();
                assert!((quad(|t| d.pdf(t)) - 1.0).abs() < 1e-12);
                for k in 0..4u32 {
                    let expected = match family {
                        LimitFamily::First => (4.0 * mu - 3.0) / (2.0 * k as f64 + 4.0 * mu - 3.0),
                        LimitFamily::Second => (2.0 * mu - 1.0) / (2.0 * k as f64 + 2.0 * mu - 1.0),
                    };
                    assert!((d.moment(2 * k) - expected).abs() < 1e-15);
                    assert!((quad(|t| t.powi(2 * k as i32) * d.pdf(t)) - expected).abs() < 1e-12);
                }
            }
        }
        assert_eq!(LimitBetaDensity::uniform().pdf(0.3), 0.5);
    }

    #[test]
    fn large_sigma_moments_reach_limits() {
        for &mu in &MUS {
            let d1 = Family1Density::new(1e6, mu).unwrap();
            let d2 = Family2Density::new(1e6, mu).unwrap();
            for k in 0..4u32 {
                let kf = f64::from(k);
                let l1 = (4.0 * mu - 3.0) / (2.0 * kf + 4.0 * mu - 3.0);
                let l2 = (2.0 * mu - 1.0) / (2.0 * kf + 2.0 * mu - 1.0);
                assert!((d1.moment(2 * k).unwrap() - l1).abs() < 1e-5);
                assert!((d2.moment(2 * k).unwrap() - l2).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn closed_form_quadratic() {
        let uniform = EdgeDensity::Limit(LimitBetaDensity::uniform());
        let q = ortho_quadratic_closed_form(&uniform).unwrap();
        let [c0, c1, c2] = q.coefficients();
        assert!((c0 + 1.0 / 3.0).abs() < 1e-15 && c1 == 0.0 && c2 == 1.0);
        assert!((q.norm_sq() - (1.0 / 5.0 - 1.0 / 9.0)).abs() < 1e-15);

        let d = Family1Density::new(1.0, 2.0).unwrap();
        let ratio = modified_incomplete_gamma(7.0 / 4.0, 0.5).unwrap()
            / modified_incomplete_gamma(5.0 / 4.0, 0.5).unwrap();
        let q = ortho_quadratic_closed_form(&d.into()).unwrap();
        assert!((q.coefficients()[0] + ratio).abs() < 1e-15);

        for &s in &SIGMAS {
            for &mu in &MUS {
                for density in [
                    EdgeDensity::from(Family1Density::new(s, mu).unwrap()),
                    EdgeDensity::from(Family2Density::new(s, mu).unwrap()),
                ] {
                    let q = ortho_quadratic_closed_form(&density).unwrap();
                    let quad = |f: &dyn Fn(f64) -> f64| quad_for(&density, f);
                    let by_quad = quad(&|t| q.eval(t).powi(2) * density.pdf(t));
                    assert!((q.norm_sq() - by_quad).abs() < 1e-10);
                    assert!(quad(&|t| q.eval(t) * density.pdf(t)).abs() < 1e-10);
                    assert!(quad(&|t| t * q.eval(t) * density.pdf(t)).abs() < 1e-10);
                    assert!(q.norm_sq() > 0.0);
                }
            }
        }
    }

    #[test]
    fn canonical_quadratic() {
        let uniform = GeneralDensity::new(|_| 0.5).unwrap();
        assert!(uniform.is_even());
        let q = ortho_quadratic_canonical(&uniform).unwrap();
        let [c0, c1, c2] = q.coefficients();
        assert!((c0 + 1.0 / 3.0).abs() < 1e-14 && c1.abs() < 1e-14 && c2 == 1.0);

        let d = Family1Density::new(1.0, 2.0).unwrap();
        let wrapped = GeneralDensity::new(move |t| d.pdf(t)).unwrap();
        let qa = ortho_quadratic_canonical(&wrapped).unwrap();
        let qc = ortho_quadratic_closed_form(&d.into()).unwrap();
        for (a, b) in qa.coefficients().iter().zip(qc.coefficients()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((qa.norm_sq() - qc.norm_sq()).abs() < 1e-10);

        let n = qa.normalized();
        assert!((n.second_moment_value() - 1.0).abs() < 1e-15);
        assert!((n.coefficients()[2] - 1.0 / qa.second_moment_value()).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_quadratic() {
        let uniform = GeneralDensity::new(|_| 0.5).unwrap();
        let q = ortho_quadratic_gram_schmidt(&uniform).unwrap();
        let [c0, c1, c2] = q.coefficients();
        assert!(c2 > 0.0 && (c0 / c2 + 1.0 / 3.0).abs() < 1e-13 && c1.abs() < 1e-13);
        assert!((q.norm_sq() - 1.0).abs() < 1e-12);

        let d = Family2Density::new(0.7, 2.0).unwrap();
        let wrapped = GeneralDensity::new(move |t| d.pdf(t)).unwrap();
        let gs = ortho_quadratic_gram_schmidt(&wrapped).unwrap();
        let cf = ortho_quadratic_closed_form(&d.into()).unwrap();
        let ratios: Vec<f64> = [-0.9, 0.1, 0.8]
            .iter()
            .map(|&t| gs.eval(t) / cf.eval(t))
            .collect();
        assert!(ratios[0] > 0.0);
        for r in &ratios {
            assert!((r - ratios[0]).abs() < 1e-9 * ratios[0].abs());
        }

        let tilted = GeneralDensity::new(|t| 0.5 * (1.0 + t)).unwrap();
        assert!(!tilted.is_even());
        for q in [
            ortho_quadratic_gram_schmidt(&tilted).unwrap(),
            ortho_quadratic_canonical(&tilted).unwrap(),
        ] {
            assert!(q.coefficients()[1].abs() > 1e-3);
            let [r0, r1] = q.residuals();
            assert!(r0.abs() < 1e-10 && r1.abs() < 1e-10);
            assert!(tilted.integrate(|t| q.eval(t)).unwrap().abs() < 1e-10);
            assert!(tilted.integrate(|t| t * q.eval(t)).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn user_q_validation() {
        let uniform = GeneralDensity::new(|_| 0.5).unwrap();
        let ok = validate_user_q(&uniform, &[-1.0 / 3.0, 0.0, 1.0]);
        assert!(ok.accepted, "{ok:?}");
        let bad = validate_user_q(&uniform, &[0.0, 0.0, 1.0]);
        assert!(!bad.accepted);
        assert!((bad.constant_residual - 1.0 / 3.0).abs() < 1e-14);
        // ∫ (t² q) ω vanishes for the odd cubic
        let odd = validate_user_q(&uniform, &[0.0, -0.6, 0.0, 1.0]);
        assert!(!odd.accepted);
        assert!(odd.second_moment_value.abs() < 1e-14);
        // an admissible quartic: P₄ is orthogonal to everything below degree 4
        let p4 = [3.0 / 8.0, 0.0, -30.0 / 8.0, 0.0, 35.0 / 8.0];
        let r = validate_user_q(&uniform, &p4);
        assert!(!r.accepted, "t²·P₄ integrates to zero");
        let quartic = [
            3.0 / 8.0 - 1.0 / 3.0,
            0.0,
            -30.0 / 8.0 + 1.0,
            0.0,
            35.0 / 8.0,
        ];
        assert!(validate_user_q(&uniform, &quartic).accepted);
    }

    #[test]
    fn general_density_rejections() {
        assert!(matches!(
            GeneralDensity::new(|_| 1.0),
            Err(Error::InvalidDensity(_))
        ));
        assert!(GeneralDensity::new(|t| if t < 0.0 { -0.1 } else { 1.1 }).is_err());
        // all mass at the ends, essentially zero variance is impossible on [−1,1]
        // but a too-narrow spike is caught
        let spike = |t: f64| if t.abs() < 1e-9 { 1e9 } else { 0.0 };
        assert!(GeneralDensity::normalized(spike, Rule1D::edge_default()).is_err());
    }

    #[test]
    fn recompute_with_finer_rule() {
        let d = GeneralDensity::new(|t: f64| 0.75 * (1.0 - t * t)).unwrap();
        let fine = d.recompute_moments(Rule1D::split_at_origin(100)).unwrap();
        assert_eq!(fine.rule().len(), 200);
        assert!((fine.moment(2).unwrap() - 0.2).abs() < 1e-14);
        assert!(d.moment(MOMENT_COUNT as u32).is_err());
    }

    #[test]
    fn table_loading() {
        let text = "t,omega\n-1,1\n0,1\n1,1\n";
        let loaded = parse_density_table(text, Rule1D::edge_default()).unwrap();
        assert!((loaded.raw_mass - 2.0).abs() < 1e-14);
        assert_eq!(loaded.samples, 3);
        assert!((loaded.density.pdf(0.3) - 0.5).abs() < 1e-15);
        assert!(loaded.density.is_even());

        let tri = "# hat\n-1 0\n0 1\n1 0\n";
        let loaded = parse_density_table(tri, Rule1D::edge_default()).unwrap();
        assert!((loaded.density.pdf(0.0) - 1.0).abs() < 1e-14);
        assert!((loaded.density.moment(2).unwrap() - 1.0 / 6.0).abs() < 1e-13);

        assert!(parse_density_table("-0.5,1\n1,1\n", Rule1D::edge_default()).is_err());
        assert!(parse_density_table("-1,1\n1,-1\n", Rule1D::edge_default()).is_err());
        assert!(parse_density_table("-1,1\n0.5,1\n0.2,1\n1,1", Rule1D::edge_default()).is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        std::fs::write(&path, text).unwrap();
        assert!(load_density_table(&path, Rule1D::edge_default()).is_ok());
    }

    #[test]
    fn bivariate_weights_restrict_to_edge_densities() {
        let tri = Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.5),
            Point2::new(0.3, 1.4),
        )
        .unwrap();
        let d1 = Family1Density::new(0.8, 2.0).unwrap();
        let d2 = Family2Density::new(0.8, 2.0).unwrap();
        for j in 0..3 {
            for t in [-0.9, -0.2, 0.4, 1.0] {
                let p = tri.edge_point(j, t).unwrap();
                assert!((family1_weight(&d1, &tri, p) - d1.pdf(t)).abs() < 1e-12);
                assert!((family2_weight(&d2, &tri, p) - d2.pdf(t)).abs() < 1e-12);
            }
        }
        // μ = 2: H^{μ−1} = H is negative at the centroid
        assert!(family2_weight(&d2, &tri, tri.centroid()) < 0.0);
        assert!(family1_weight(&d1, &tri, tri.centroid()) > 0.0);
    }
}
