//! Radial scalar fields: a value together with its first two derivatives in `r`.
//!
//! A [`ScalarField`] wraps a shared [`RadialProfile`]. Closed-form profiles
//! implement exact derivatives; sampled profiles interpolate data with cubic
//! Hermite splines. Combinators build products, powers, positive parts and
//! affine maps without losing the derivative information.

use std::fmt;
use std::sync::Arc;

use crate::domain::RadialGrid;
use crate::error::{invalid, Error, Result};

/// Value and first two radial derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet { value: 0.0, d1: 0.0, d2: 0.0 };

    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet { value, d1, d2 }
    }
}

/// A radial function with exact (or interpolated) derivatives.
///
/// The log-space accessors exist so that tail classifiers can probe profiles
/// at radii far beyond `f64` range; closed forms override them.
pub trait RadialProfile: Send + Sync {
    fn jet(&self, r: f64) -> Jet;

    /// `ln u(e^s)`: `-∞` where `u = 0`, NaN where `u < 0` or undefined.
    fn ln_value(&self, ln_r: f64) -> f64 {
        let r = ln_r.exp();
        if r == 0.0 || !r.is_finite() {
            return f64::NAN;
        }
        ln_or_nan(self.jet(r).value)
    }

    /// `ln |u'(e^s)|`: `-∞` where `u' = 0`.
    fn ln_abs_deriv(&self, ln_r: f64) -> f64 {
        let r = ln_r.exp();
        if r == 0.0 || !r.is_finite() {
            return f64::NAN;
        }
        ln_or_nan(self.jet(r).d1.abs())
    }

    /// Largest `|ln r|` at which the log-space accessors are faithful.
    fn log_reach(&self) -> f64 {
        700.0
    }

    /// Closed interval outside which the profile vanishes identically.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    /// Points where derivatives may jump; quadrature panels split there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn describe(&self) -> String;
}

fn ln_or_nan(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else if v == 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::NAN
    }
}

/// `ln(e^a + e^b)`.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Shared handle to a radial profile plus a positivity flag.
#[derive(Clone)]
pub struct ScalarField {
    profile: Arc<dyn RadialProfile>,
    positive: bool,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.profile.describe())
    }
}

impl ScalarField {
    pub fn from_profile(profile: impl RadialProfile + 'static, positive: bool) -> Self {
        ScalarField { profile: Arc::new(profile), positive }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::from_profile(Constant(c), c > 0.0)
    }

    /// `coef · r^exponent`.
    pub fn power(coef: f64, exponent: f64) -> Self {
        ScalarField::from_profile(Power { coef, exponent }, coef > 0.0)
    }

    /// `(alpha + r^q)^kappa` with `alpha ≥ 0`, `q > 0`.
    pub fn shifted_power(alpha: f64, q: f64, kappa: f64) -> Self {
        ScalarField::from_profile(ShiftedPower { alpha, q, kappa }, true)
    }

    /// Smooth bump `(1 - ((r-c)/h)^2)^3` supported on `[c-h, c+h]`.
    pub fn bump(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !center.is_finite() {
            return Err(invalid("bump needs a finite center and positive half width"));
        }
        Ok(ScalarField::from_profile(Bump { center, half_width }, false))
    }

    /// Piecewise-linear tent, zero outside `[a, b]`, peak 1 at `m`.
    pub fn tent(a: f64, m: f64, b: f64) -> Result<Self> {
        if !(a < m && m < b) {
            return Err(invalid("tent needs a < m < b"));
        }
        Ok(ScalarField::from_profile(Tent { a, m, b }, false))
    }

    /// Cubic Hermite interpolation of samples. When `dv` is `None` the
    /// slopes come from the monotone Fritsch–Carlson rule.
    pub fn sampled(r: Vec<f64>, v: Vec<f64>, dv: Option<Vec<f64>>) -> Result<Self> {
        let s = Sampled::new(r, v, dv)?;
        let positive = s.v.iter().all(|&x| x > 0.0);
        Ok(ScalarField::from_profile(s, positive))
    }

    /// Samples `self` (values and derivatives) at the grid nodes.
    pub fn sample_on(&self, grid: &RadialGrid) -> Result<ScalarField> {
        let r = grid.nodes().to_vec();
        let v = r.iter().map(|&x| self.value(x)).collect();
        let dv = r.iter().map(|&x| self.derivative(x)).collect();
        ScalarField::sampled(r, v, Some(dv))
    }

    pub fn jet(&self, r: f64) -> Jet {
        self.profile.jet(r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.profile.jet(r).value
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.profile.jet(r).d1
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        self.profile.jet(r).d2
    }

    pub fn ln_value(&self, ln_r: f64) -> f64 {
        self.profile.ln_value(ln_r)
    }

    pub fn ln_abs_derivative(&self, ln_r: f64) -> f64 {
        self.profile.ln_abs_deriv(ln_r)
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.profile.support()
    }

    pub fn log_reach(&self) -> f64 {
        self.profile.log_reach()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.profile.breakpoints()
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn describe(&self) -> String {
        self.profile.describe()
    }

    /// Verifies the positivity flag at every interior node.
    pub fn check_positive_on(&self, grid: &RadialGrid) -> Result<()> {
        if !self.positive {
            return Ok(());
        }
        for &r in grid.nodes() {
            let v = self.value(r);
            if !(v > 0.0) {
                return Err(invalid(format!(
                    "{} flagged positive but u({r}) = {v}",
                    self.describe()
                )));
            }
        }
        Ok(())
    }

    /// Largest relative discrepancy between the stored derivative and a
    /// central difference of values, over interior grid nodes.
    pub fn derivative_consistency(&self, grid: &RadialGrid) -> f64 {
        let mut worst: f64 = 0.0;
        for &r in &grid.nodes()[1..grid.len() - 1] {
            let h = 1e-5 * r.abs().max(1e-300);
            let fd = (self.value(r + h) - self.value(r - h)) / (2.0 * h);
            let d = self.derivative(r);
            let scale = d.abs().max(self.value(r).abs() / r.abs().max(1e-300)).max(1e-300);
            worst = worst.max((fd - d).abs() / scale);
        }
        worst
    }

    pub fn product(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            positive: self.positive && other.positive,
            profile: Arc::new(Product(self.clone(), other.clone())),
        }
    }

    /// `u^gamma` for a nonnegative field.
    pub fn powf(&self, gamma: f64) -> ScalarField {
        ScalarField {
            positive: self.positive,
            profile: Arc::new(PowerOf { base: self.clone(), gamma }),
        }
    }

    /// `max(u, 0)`; derivative 0 where `u < 0`, `u'` where `u ≥ 0`.
    pub fn positive_part(&self) -> ScalarField {
        ScalarField {
            positive: false,
            profile: Arc::new(PositivePart { base: self.clone(), crossings: Vec::new() }),
        }
    }

    /// Like [`ScalarField::positive_part`], with the zero crossings located on
    /// `grid` (bisection between sign changes) and used as breakpoints.
    pub fn positive_part_on(&self, grid: &RadialGrid) -> ScalarField {
        let crossings = sign_changes(self, grid.nodes());
        ScalarField {
            positive: false,
            profile: Arc::new(PositivePart { base: self.clone(), crossings }),
        }
    }

    /// `scale · u + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> ScalarField {
        let positive = shift == 0.0 && scale > 0.0 && self.positive;
        ScalarField { positive, profile: Arc::new(Affine { base: self.clone(), scale, shift }) }
    }

    pub fn with_breakpoints(&self, extra: Vec<f64>) -> ScalarField {
        ScalarField {
            positive: self.positive,
            profile: Arc::new(WithBreakpoints { base: self.clone(), extra }),
        }
    }

    /// Overrides the positivity flag.
    pub fn flagged_positive(mut self, positive: bool) -> ScalarField {
        self.positive = positive;
        self
    }
}

/// Locates sign changes of `u` between consecutive probe points.
pub fn sign_changes(u: &ScalarField, probes: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in probes.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (u.value(a), u.value(b));
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = u.value(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        out.push(0.5 * (a + b));
    }
    out.dedup();
    out
}

/// `|x|^{p-2}` with the limits at `x = 0`: 0 for `p > 2`, 1 for `p = 2`, ∞ for `p < 2`.
pub fn abs_pow_pm2(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        if p > 2.0 {
            0.0
        } else if p == 2.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        x.abs().powf(p - 2.0)
    }
}

/// `|x|^{e-1} x`, the odd power.
pub fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// Radial p-Laplacian `Δ_p u = |u'|^{p-2}[(p-1)u'' + (d-1)u'/r]`.
///
/// Where `u' = 0` and `p < 2` the weight is infinite; the result is 0 when the
/// bracket vanishes there and ±∞ otherwise.
pub fn radial_p_laplacian(jet: Jet, r: f64, p: f64, d: f64) -> f64 {
    let bracket = (p - 1.0) * jet.d2 + (d - 1.0) * jet.d1 / r;
    let weight = abs_pow_pm2(jet.d1, p);
    if bracket == 0.0 {
        0.0
    } else {
        weight * bracket
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl RadialProfile for Constant {
    fn log_reach(&self) -> f64 {
        f64::INFINITY
    }
    fn jet(&self, _r: f64) -> Jet {
        Jet::new(self.0, 0.0, 0.0)
    }
    fn ln_value(&self, _ln_r: f64) -> f64 {
        ln_or_nan(self.0)
    }
    fn ln_abs_deriv(&self, _ln_r: f64) -> f64 {
        f64::NEG_INFINITY
    }
    fn describe(&self) -> String {
        format!("constant({})", self.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Power {
    pub coef: f64,
    pub exponent: f64,
}

impl RadialProfile for Power {
    fn log_reach(&self) -> f64 {
        f64::INFINITY
    }
    fn jet(&self, r: f64) -> Jet {
        let e = self.exponent;
        let v = self.coef * r.powf(e);
        Jet::new(v, self.coef * e * r.powf(e - 1.0), self.coef * e * (e - 1.0) * r.powf(e - 2.0))
    }
    fn ln_value(&self, ln_r: f64) -> f64 {
        ln_or_nan(self.coef) + self.exponent * ln_r
    }
    fn ln_abs_deriv(&self, ln_r: f64) -> f64 {
        ln_or_nan((self.coef * self.exponent).abs()) + (self.exponent - 1.0) * ln_r
    }
    fn describe(&self) -> String {
        format!("{}*r^{}", self.coef, self.exponent)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShiftedPower {
    pub alpha: f64,
    pub q: f64,
    pub kappa: f64,
}

impl RadialProfile for ShiftedPower {
    fn log_reach(&self) -> f64 {
        f64::INFINITY
    }
    fn jet(&self, r: f64) -> Jet {
        let ShiftedPower { alpha, q, kappa } = *self;
        let rq = r.powf(q);
        let s = alpha + rq;
        let v = s.powf(kappa);
        // s' = q r^{q-1}, s'' = q(q-1) r^{q-2}
        let s1 = q * r.powf(q - 1.0);
        let s2 = q * (q - 1.0) * r.powf(q - 2.0);
        let d1 = kappa * s.powf(kappa - 1.0) * s1;
        let d2 = kappa * (kappa - 1.0) * s.powf(kappa - 2.0) * s1 * s1 + kappa * s.powf(kappa - 1.0) * s2;
        Jet::new(v, d1, d2)
    }
    fn ln_value(&self, ln_r: f64) -> f64 {
        self.kappa * log_add_exp(self.alpha.ln(), self.q * ln_r)
    }
    fn ln_abs_deriv(&self, ln_r: f64) -> f64 {
        let ln_s = log_add_exp(self.alpha.ln(), self.q * ln_r);
        ln_or_nan((self.kappa * self.q).abs()) + (self.kappa - 1.0) * ln_s + (self.q - 1.0) * ln_r
    }
    fn describe(&self) -> String {
        format!("({} + r^{})^{}", self.alpha, self.q, self.kappa)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
}

impl RadialProfile for Bump {
    fn jet(&self, r: f64) -> Jet {
        let h = self.half_width;
        let x = (r - self.center) / h;
        if x.abs() >= 1.0 {
            return Jet::ZERO;
        }
        let g = 1.0 - x * x;
        // d/dr = (1/h) d/dx
        let d1 = -6.0 * x * g * g / h;
        let d2 = (24.0 * x * x * g - 6.0 * g * g) / (h * h);
        Jet::new(g * g * g, d1, d2)
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some((self.center - self.half_width, self.center + self.half_width))
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![self.center - self.half_width, self.center, self.center + self.half_width]
    }
    fn describe(&self) -> String {
        format!("bump(c={}, h={})", self.center, self.half_width)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tent {
    pub a: f64,
    pub m: f64,
    pub b: f64,
}

impl RadialProfile for Tent {
    fn jet(&self, r: f64) -> Jet {
        let Tent { a, m, b } = *self;
        if r <= a || r >= b {
            Jet::ZERO
        } else if r < m {
            Jet::new((r - a) / (m - a), 1.0 / (m - a), 0.0)
        } else {
            Jet::new((b - r) / (b - m), -1.0 / (b - m), 0.0)
        }
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some((self.a, self.b))
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![self.a, self.m, self.b]
    }
    fn describe(&self) -> String {
        format!("tent({}, {}, {})", self.a, self.m, self.b)
    }
}

/// Cubic Hermite spline through samples with explicit slopes.
#[derive(Debug, Clone)]
pub struct Sampled {
    r: Vec<f64>,
    v: Vec<f64>,
    dv: Vec<f64>,
}

impl Sampled {
    pub fn new(r: Vec<f64>, v: Vec<f64>, dv: Option<Vec<f64>>) -> Result<Self> {
        let n = r.len();
        if n < 2 || v.len() != n || dv.as_ref().is_some_and(|d| d.len() != n) {
            return Err(invalid("sampled field needs ≥ 2 points and equal-length arrays"));
        }
        if r.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("sample radii must be strictly increasing"));
        }
        if let Some(bad) = v.iter().chain(dv.iter().flatten()).find(|x| !x.is_finite()) {
            return Err(Error::NonFinite { r: f64::NAN, value: *bad });
        }
        let dv = dv.unwrap_or_else(|| fritsch_carlson(&r, &v));
        Ok(Sampled { r, v, dv })
    }

    fn vanishes_outside(&self) -> (bool, bool) {
        (self.v[0] == 0.0, self.v[self.v.len() - 1] == 0.0)
    }
}

fn fritsch_carlson(r: &[f64], v: &[f64]) -> Vec<f64> {
    let n = r.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]) / (r[i + 1] - r[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            // weighted harmonic mean
            let h0 = r[i] - r[i - 1];
            let h1 = r[i + 1] - r[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    m
}

impl RadialProfile for Sampled {
    fn jet(&self, r: f64) -> Jet {
        let n = self.r.len();
        let (zero_lo, zero_hi) = self.vanishes_outside();
        if r < self.r[0] {
            return if zero_lo { Jet::ZERO } else { Jet::new(f64::NAN, f64::NAN, f64::NAN) };
        }
        if r > self.r[n - 1] {
            return if zero_hi { Jet::ZERO } else { Jet::new(f64::NAN, f64::NAN, f64::NAN) };
        }
        let i = self.r.partition_point(|&x| x <= r).clamp(1, n - 1);
        let (x0, x1) = (self.r[i - 1], self.r[i]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        let (y0, y1, m0, m1) = (self.v[i - 1], self.v[i], self.dv[i - 1] * h, self.dv[i] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let d1 = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        let d2 = ((12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1)
            / (h * h);
        Jet::new(value, d1, d2)
    }
    fn support(&self) -> Option<(f64, f64)> {
        match self.vanishes_outside() {
            (true, true) => Some((self.r[0], self.r[self.r.len() - 1])),
            _ => None,
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.r.clone()
    }
    fn describe(&self) -> String {
        format!("sampled({} points on [{}, {}])", self.r.len(), self.r[0], self.r[self.r.len() - 1])
    }
}

struct Product(ScalarField, ScalarField);

impl RadialProfile for Product {
    fn log_reach(&self) -> f64 {
        self.0.log_reach().min(self.1.log_reach())
    }
    fn jet(&self, r: f64) -> Jet {
        let f = self.0.jet(r);
        let g = self.1.jet(r);
        Jet::new(f.value * g.value, f.d1 * g.value + f.value * g.d1, f.d2 * g.value + 2.0 * f.d1 * g.d1 + f.value * g.d2)
    }
    fn ln_value(&self, ln_r: f64) -> f64 {
        self.0.ln_value(ln_r) + self.1.ln_value(ln_r)
    }
    fn support(&self) -> Option<(f64, f64)> {
        match (self.0.support(), self.1.support()) {
            (Some((a, b)), Some((c, d))) => Some((a.max(c), b.min(d))),
            (Some(s), None) | (None, Some(s)) => Some(s),
            (None, None) => None,
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.0.breakpoints();
        b.extend(self.1.breakpoints());
        b
    }
    fn describe(&self) -> String {
        format!("({})*({})", self.0.describe(), self.1.describe())
    }
}

struct PowerOf {
    base: ScalarField,
    gamma: f64,
}

impl RadialProfile for PowerOf {
    fn log_reach(&self) -> f64 {
        self.base.log_reach()
    }
    fn jet(&self, r: f64) -> Jet {
        let f = self.base.jet(r);
        let g = self.gamma;
        if f.value == 0.0 {
            let d1 = if g > 1.0 { 0.0 } else if g == 1.0 { f.d1 } else { f64::NAN };
            let d2 = if g > 2.0 {
                0.0
            } else if g == 2.0 {
                2.0 * f.d1 * f.d1
            } else if g == 1.0 {
                f.d2
            } else if f.d1 == 0.0 {
                0.0
            } else {
                f64::NAN
            };
            return Jet::new(0.0, d1, d2);
        }
        let v = f.value.powf(g);
        let d1 = g * f.value.powf(g - 1.0) * f.d1;
        let d2 = g * (g - 1.0) * f.value.powf(g - 2.0) * f.d1 * f.d1 + g * f.value.powf(g - 1.0) * f.d2;
        Jet::new(v, d1, d2)
    }
    fn ln_value(&self, ln_r: f64) -> f64 {
        self.gamma * self.base.ln_value(ln_r)
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.base.support()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }
    fn describe(&self) -> String {
        format!("({})^{}", self.base.describe(), self.gamma)
    }
}

struct PositivePart {
    base: ScalarField,
    crossings: Vec<f64>,
}

impl RadialProfile for PositivePart {
    fn log_reach(&self) -> f64 {
        self.base.log_reach()
    }
    fn jet(&self, r: f64) -> Jet {
        let f = self.base.jet(r);
        if f.value > 0.0 {
            f
        } else if f.value < 0.0 {
            Jet::ZERO
        } else {
            Jet::new(0.0, f.d1, f.d2)
        }
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.base.support()
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.base.breakpoints();
        b.extend(&self.crossings);
        b
    }
    fn describe(&self) -> String {
        format!("({})_+", self.base.describe())
    }
}

struct Affine {
    base: ScalarField,
    scale: f64,
    shift: f64,
}

impl RadialProfile for Affine {
    fn log_reach(&self) -> f64 {
        self.base.log_reach()
    }
    fn jet(&self, r: f64) -> Jet {
        let f = self.base.jet(r);
        Jet::new(self.scale * f.value + self.shift, self.scale * f.d1, self.scale * f.d2)
    }
    fn ln_value(&self, ln_r: f64) -> f64 {
        if self.shift == 0.0 && self.scale > 0.0 {
            self.scale.ln() + self.base.ln_value(ln_r)
        } else {
            let r = ln_r.exp();
            if !r.is_finite() || r == 0.0 {
                return f64::NAN;
            }
            ln_or_nan(self.jet(r).value)
        }
    }
    fn ln_abs_deriv(&self, ln_r: f64) -> f64 {
        ln_or_nan(self.scale.abs()) + self.base.ln_abs_derivative(ln_r)
    }
    fn support(&self) -> Option<(f64, f64)> {
        if self.shift == 0.0 {
            self.base.support()
        } else {
            None
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }
    fn describe(&self) -> String {
        format!("{}*({}) + {}", self.scale, self.base.describe(), self.shift)
    }
}

struct WithBreakpoints {
    base: ScalarField,
    extra: Vec<f64>,
}

impl RadialProfile for WithBreakpoints {
    fn log_reach(&self) -> f64 {
        self.base.log_reach()
    }
    fn jet(&self, r: f64) -> Jet {
        self.base.jet(r)
    }
    fn ln_value(&self, ln_r: f64) -> f64 {
        self.base.ln_value(ln_r)
    }
    fn ln_abs_deriv(&self, ln_r: f64) -> f64 {
        self.base.ln_abs_derivative(ln_r)
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.base.support()
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.base.breakpoints();
        b.extend(&self.extra);
        b
    }
    fn describe(&self) -> String {
        self.base.describe()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_grid, RadialDomain};

    fn fd(f: &ScalarField, r: f64) -> (f64, f64) {
        let h = 1e-5 * r;
        let d1 = (f.value(r + h) - f.value(r - h)) / (2.0 * h);
        let d2 = (f.derivative(r + h) - f.derivative(r - h)) / (2.0 * h);
        (d1, d2)
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let fields = [
            ScalarField::power(2.0, -0.5),
            ScalarField::shifted_power(1.0, 1.5, -0.3),
            ScalarField::shifted_power(0.0, 2.0, -0.25),
            ScalarField::bump(2.0, 1.0).unwrap(),
            ScalarField::power(1.0, 0.7).product(&ScalarField::bump(1.5, 0.9).unwrap()),
            ScalarField::bump(2.0, 1.0).unwrap().powf(1.5),
        ];
        for f in &fields {
            for r in [0.8, 1.3, 2.2, 2.7] {
                let j = f.jet(r);
                let (d1, d2) = fd(f, r);
                let s = 1.0 + j.d1.abs() + j.d2.abs();
                assert!((j.d1 - d1).abs() < 1e-6 * s, "{f:?} d1 at {r}");
                assert!((j.d2 - d2).abs() < 1e-5 * s, "{f:?} d2 at {r}");
            }
        }
    }

    #[test]
    fn log_space_accessors_agree_with_direct_evaluation() {
        let f = ScalarField::shifted_power(0.5, 1.5, -0.4);
        for r in [0.01f64, 1.0, 300.0] {
            assert!((f.ln_value(r.ln()) - f.value(r).ln()).abs() < 1e-12);
            assert!((f.ln_abs_derivative(r.ln()) - f.derivative(r).abs().ln()).abs() < 1e-12);
        }
        // far beyond f64 range of r itself
        let p = ScalarField::power(1.0, -2.0);
        assert_eq!(p.ln_value(1e6), -2e6);
    }

    #[test]
    fn sampled_round_trip_reproduces_closed_form() {
        let exact = ScalarField::power(1.0, -0.5);
        let grid = make_grid(&RadialDomain::punctured_space(), 40, (0.1, 10.0)).unwrap();
        let s = exact.sample_on(&grid).unwrap();
        for r in [0.1234, 0.77, 3.3, 9.1] {
            assert!((s.value(r) / exact.value(r) - 1.0).abs() < 1e-6);
            assert!((s.derivative(r) / exact.derivative(r) - 1.0).abs() < 1e-3);
        }
        assert!(s.derivative_consistency(&grid) < 1e-3);
    }

    #[test]
    fn fritsch_carlson_preserves_monotonicity() {
        let r = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let v = vec![0.0, 0.1, 0.2, 3.0, 3.1];
        let s = ScalarField::sampled(r, v, None).unwrap();
        let mut prev = -1.0;
        for i in 0..=400 {
            let x = i as f64 / 100.0;
            let y = s.value(x);
            assert!(y >= prev - 1e-14);
            prev = y;
        }
    }

    #[test]
    fn positive_part_behaviour() {
        let v = ScalarField::power(1.0, 2.0).affine(1.0, -1.0);
        let grid = make_grid(&RadialDomain::punctured_space(), 8, (0.1, 10.0)).unwrap();
        let vp = v.positive_part_on(&grid);
        assert!(vp.breakpoints().iter().any(|&c| (c - 1.0).abs() < 1e-12));
        for r in [0.2, 0.9, 1.0, 1.1, 5.0] {
            let y = vp.value(r);
            assert!(y >= 0.0);
            if v.value(r) > 0.0 {
                assert_eq!(y, v.value(r));
                assert_eq!(vp.derivative(r), v.derivative(r));
            } else if v.value(r) < 0.0 {
                assert_eq!(vp.derivative(r), 0.0);
            }
        }
        let already = ScalarField::power(1.0, -0.5);
        let same = already.positive_part();
        assert_eq!(same.jet(0.4), already.jet(0.4));
    }

    #[test]
    fn p_laplacian_of_power() {
        // Δ_p r^q = |q|^{p-2} q (q-1)(p-1) + (d-1) q ... for p = 2, q = 2: Δ r^2 = 2d
        let f = ScalarField::power(1.0, 2.0);
        let lap = radial_p_laplacian(f.jet(1.7), 1.7, 2.0, 3.0);
        assert!((lap - 6.0).abs() < 1e-12);
        let c = ScalarField::constant(1.0);
        assert_eq!(radial_p_laplacian(c.jet(1.0), 1.0, 1.5, 3.0), 0.0);
    }

    #[test]
    fn product_support_is_intersection() {
        let a = ScalarField::bump(2.0, 1.0).unwrap();
        let b = ScalarField::tent(1.5, 2.0, 5.0).unwrap();
        assert_eq!(a.product(&b).support(), Some((1.5, 3.0)));
        assert_eq!(a.product(&ScalarField::power(1.0, 1.0)).support(), Some((1.0, 3.0)));
    }
}
