//! The two exotic fields that separate the split energies: a slowly varying
//! `φ` whose first split integral diverges while the second converges, and a
//! monotone `ψ` whose slope collapses to `e^{-r}` on every other interval.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{log_add_exp, Jet, RadialProfile, ScalarField};
use crate::par::Execution;
use crate::quad::{integrate_nodes, QuadOptions, SingularityHints};

/// `φ(r) = r^{1-d/p} [t^{(p-1)/(p-2)} (ln t)^γ]^{(p-2)/p}` with `t = ln r`.
#[derive(Debug, Clone, Copy)]
pub struct EtaPhi {
    pub gamma: f64,
    pub p: f64,
    pub d: f64,
}

impl EtaPhi {
    fn coefficients(&self) -> (f64, f64, f64) {
        let p = self.p;
        (1.0 - self.d / p, (p - 1.0) / p, self.gamma * (p - 2.0) / p)
    }

    fn ln_phi(&self, t: f64) -> f64 {
        let (c0, c1, c2) = self.coefficients();
        c0 * t + c1 * t.ln() + c2 * t.ln().ln()
    }

    /// `r φ'/φ` as a function of `t`.
    fn kappa(&self, t: f64) -> f64 {
        let (c0, c1, c2) = self.coefficients();
        c0 + c1 / t + c2 / (t * t.ln())
    }

    fn kappa_prime(&self, t: f64) -> f64 {
        let (_, c1, c2) = self.coefficients();
        let lt = t.ln();
        -c1 / (t * t) - c2 * (lt + 1.0) / (t * lt).powi(2)
    }
}

impl RadialProfile for EtaPhi {
    fn jet(&self, r: f64) -> Jet {
        let t = r.ln();
        if !(t > 1.0) {
            return Jet::new(f64::NAN, f64::NAN, f64::NAN);
        }
        let phi = self.ln_phi(t).exp();
        let k = self.kappa(t);
        Jet::new(phi, phi * k / r, phi * (k * k + self.kappa_prime(t) - k) / (r * r))
    }

    fn ln_value(&self, ln_r: f64) -> f64 {
        if !(ln_r > 1.0) {
            return f64::NAN;
        }
        self.ln_phi(ln_r)
    }

    fn ln_abs_deriv(&self, ln_r: f64) -> f64 {
        if !(ln_r > 1.0) {
            return f64::NAN;
        }
        let k = self.kappa(ln_r).abs();
        if k == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_phi(ln_r) - ln_r + k.ln()
    }

    fn log_reach(&self) -> f64 {
        f64::INFINITY
    }

    fn describe(&self) -> String {
        format!("eta phi, gamma = {}, p = {}, d = {}", self.gamma, self.p, self.d)
    }
}

/// Inner radius of the η-family domain; `ln ln r` changes sign at `r = e`
/// and the field is used only beyond `e^e`.
pub const ETA_R0: f64 = 15.154_262_241_479_262;

/// The η-family field and the inner radius of its domain. Needs `2 < p < d`.
pub fn make_eta_phi(gamma: f64, p: f64, d: f64) -> Result<(ScalarField, f64)> {
    if !(p > 2.0 && p < d) {
        return Err(invalid(format!("eta_phi needs 2 < p < d, got p = {p}, d = {d}")));
    }
    if !gamma.is_finite() {
        return Err(invalid("eta_phi needs a finite γ"));
    }
    debug_assert!((ETA_R0 - E.exp()).abs() < 1e-12);
    Ok((ScalarField::from_profile(EtaPhi { gamma, p, d }, true), ETA_R0))
}

/// Transition used on the gaps between the two slope regimes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Blend {
    /// `6τ⁵ − 15τ⁴ + 10τ³`, C² at both ends.
    #[default]
    Quintic,
    /// `3τ² − 2τ³`, C¹ at both ends.
    Cubic,
}

impl Blend {
    fn value(self, tau: f64) -> f64 {
        match self {
            Blend::Quintic => tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau)),
            Blend::Cubic => tau * tau * (3.0 - 2.0 * tau),
        }
    }

    fn slope(self, tau: f64) -> f64 {
        match self {
            Blend::Quintic => 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau),
            Blend::Cubic => 6.0 * tau * (1.0 - tau),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Power,
    Exp,
    /// power slope fading into the exponential one
    ToExp,
    ToPower,
}

const GAP: f64 = 0.25;
/// Tabulated range of the oscillatory field; beyond it `ψ` uses the
/// period-averaged asymptote.
const R_TABLE: f64 = 2000.0;
/// Average of `|ψ'| / (|β| r^{β-1})` over one period.
const PERIOD_MEAN: f64 = 0.625;

fn segment_at(r: f64) -> (Segment, f64, f64) {
    let n = (r / 2.0).floor();
    let base = 2.0 * n;
    let frac = r - base;
    if n < 1.0 {
        return (Segment::Power, 1.0, 2.0);
    }
    if frac < GAP {
        (Segment::ToExp, base, base + GAP)
    } else if frac < 0.75 {
        (Segment::Exp, base + GAP, base + 0.75)
    } else if frac < 1.0 {
        (Segment::ToPower, base + 0.75, base + 1.0)
    } else {
        (Segment::Power, base + 1.0, base + 2.0)
    }
}

/// Monotone field on `[1, ∞)` with `|ψ'| = |β| r^{β-1}` on `[2n+1, 2n+2]`,
/// `|ψ'| = e^{-r}` on `[2n+1/4, 2n+3/4]` (n ≥ 1) and blended slopes on the
/// gaps, so that `ψ ≍ r^β`. For `β > 0`, `ψ(1) = 1` and `ψ` increases; for
/// `β < 0`, `ψ(r) = ∫_r^∞ |ψ'|` decreases to 0.
#[derive(Debug, Clone)]
pub struct OscillatoryPsi {
    beta: f64,
    blend: Blend,
    nodes: Vec<f64>,
    /// `∫_1^{nodes[i]} |ψ'|`
    cumulative: Vec<f64>,
    /// `∫_1^∞ |ψ'|` when `β < 0`, using the asymptote beyond the table.
    total: f64,
}

impl OscillatoryPsi {
    pub fn new(beta: f64, blend: Blend) -> Result<Self> {
        if !(beta != 0.0 && beta.is_finite()) {
            return Err(invalid("oscillatory_psi needs a finite β ≠ 0"));
        }
        let mut nodes = vec![1.0, 2.0];
        let mut n = 1.0;
        while 2.0 * n + 2.0 <= R_TABLE {
            let base = 2.0 * n;
            nodes.extend([base + GAP, base + 0.75, base + 1.0, base + 2.0]);
            n += 1.0;
        }
        let mut psi = OscillatoryPsi { beta, blend, nodes, cumulative: Vec::new(), total: 0.0 };
        let mut acc = 0.0;
        let mut cumulative = vec![0.0];
        for w in psi.nodes.windows(2) {
            acc += psi.segment_integral(w[0], w[1])?;
            cumulative.push(acc);
        }
        let r_end = *psi.nodes.last().unwrap_or(&1.0);
        psi.total = acc + PERIOD_MEAN * r_end.powf(beta);
        psi.cumulative = cumulative;
        Ok(psi)
    }

    fn power_slope(&self, r: f64) -> f64 {
        self.beta.abs() * r.powf(self.beta - 1.0)
    }

    /// `|ψ'|` and its derivative.
    fn slope(&self, r: f64) -> (f64, f64) {
        let beta = self.beta;
        let pw = || (self.power_slope(r), self.power_slope(r) * (beta - 1.0) / r);
        let ex = || ((-r).exp(), -(-r).exp());
        match segment_at(r) {
            (Segment::Power, ..) => pw(),
            (Segment::Exp, ..) => ex(),
            (kind, a, _) => {
                let tau = (r - a) / GAP;
                let (s, ds) = (self.blend.value(tau), self.blend.slope(tau) / GAP);
                let ((from, dfrom), (to, dto)) = if kind == Segment::ToExp { (pw(), ex()) } else { (ex(), pw()) };
                (
                    (1.0 - s) * from + s * to,
                    (1.0 - s) * dfrom + s * dto + ds * (to - from),
                )
            }
        }
    }

    fn ln_slope(&self, r: f64) -> f64 {
        let ln_pw = self.beta.abs().ln() + (self.beta - 1.0) * r.ln();
        match segment_at(r) {
            (Segment::Power, ..) => ln_pw,
            (Segment::Exp, ..) => -r,
            (kind, a, _) => {
                let s = self.blend.value((r - a) / GAP);
                let (w_pw, w_ex) = if kind == Segment::ToExp { (1.0 - s, s) } else { (s, 1.0 - s) };
                log_add_exp(ln_or_neg_inf(w_pw) + ln_pw, ln_or_neg_inf(w_ex) - r)
            }
        }
    }

    /// `∫_a^b |ψ'|` for `[a, b]` inside one segment.
    fn segment_integral(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let mid = 0.5 * (a + b);
        Ok(match segment_at(mid).0 {
            Segment::Power => self.beta.signum() * (b.powf(self.beta) - a.powf(self.beta)),
            Segment::Exp => (-a).exp() - (-b).exp(),
            _ => {
                let opts = QuadOptions::default().with_execution(Execution::Sequential);
                integrate_nodes(&|r: f64| self.slope(r).0, &[a, b], SingularityHints::NONE, &opts)?.value
            }
        })
    }

    /// `∫_1^r |ψ'|` for `1 ≤ r ≤ R_TABLE`.
    fn integral_to(&self, r: f64) -> f64 {
        let i = self.nodes.partition_point(|&x| x <= r).saturating_sub(1).min(self.nodes.len() - 1);
        self.cumulative[i] + self.segment_integral(self.nodes[i], r).unwrap_or(f64::NAN)
    }

    fn table_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    fn value(&self, r: f64) -> f64 {
        let end = self.table_end();
        if r <= end {
            let i = self.integral_to(r);
            return if self.beta > 0.0 { 1.0 + i } else { self.total - i };
        }
        if self.beta > 0.0 {
            let at_end = 1.0 + self.cumulative[self.cumulative.len() - 1];
            at_end + PERIOD_MEAN * (r.powf(self.beta) - end.powf(self.beta))
        } else {
            PERIOD_MEAN * r.powf(self.beta)
        }
    }
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

impl RadialProfile for OscillatoryPsi {
    fn jet(&self, r: f64) -> Jet {
        if !(r >= 1.0) {
            return Jet::new(f64::NAN, f64::NAN, f64::NAN);
        }
        let (s, ds) = self.slope(r);
        let sign = self.beta.signum();
        Jet::new(self.value(r), sign * s, sign * ds)
    }

    fn ln_value(&self, ln_r: f64) -> f64 {
        if !(ln_r >= 0.0) {
            return f64::NAN;
        }
        let end = self.table_end();
        if ln_r <= end.ln() {
            return ln_or_neg_inf(self.value(ln_r.exp()));
        }
        let asymptote = PERIOD_MEAN.ln() + self.beta * ln_r;
        if self.beta < 0.0 {
            return asymptote;
        }
        let at_end = 1.0 + self.cumulative[self.cumulative.len() - 1];
        let offset = at_end - PERIOD_MEAN * end.powf(self.beta);
        asymptote + (offset * (-asymptote).exp()).ln_1p()
    }

    fn ln_abs_deriv(&self, ln_r: f64) -> f64 {
        if !(ln_r >= 0.0) {
            return f64::NAN;
        }
        self.ln_slope(ln_r.exp())
    }

    fn log_reach(&self) -> f64 {
        // the segment index must stay exact in double precision
        50.0 * LN_2
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.nodes.clone()
    }

    fn describe(&self) -> String {
        format!("oscillatory psi, beta = {}, {:?} blend", self.beta, self.blend)
    }
}

/// The oscillatory field on `[1, ∞)`; `β > (p−d)/p` makes its first split
/// integral converge.
pub fn make_oscillatory_psi(beta: f64, p: f64, d: f64, blend: Blend) -> Result<ScalarField> {
    if !(p > 1.0 && d >= 1.0) {
        return Err(invalid("oscillatory_psi needs p > 1 and d ≥ 1"));
    }
    Ok(ScalarField::from_profile(OscillatoryPsi::new(beta, blend)?, true))
}
