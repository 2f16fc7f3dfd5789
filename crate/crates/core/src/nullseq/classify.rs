//! Ground state versus spectral gap through the tail integrals
//! `M₁ = ∫ (φ^p r^{d-1})^{-1/(p-1)} dr` and `M₂ = ∫ φ^{-2}|φ'|^{2-p} r^{1-d} dr`.

use serde::{Deserialize, Serialize};

use crate::domain::RadialDomain;
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::quad::{classify_tail, Convergence, Direction, TailOptions, TailVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundStateVerdict {
    GroundState,
    SpectralGap,
    Inconclusive,
}

/// Where the tails start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Start of the outer tail; `None` picks `max(1, 2 r_min)`.
    pub r0_outer: Option<f64>,
    /// Start of the inner tail on punctured domains.
    pub r0_inner: f64,
    pub tail: TailOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { r0_outer: None, r0_inner: 1.0, tail: TailOptions::default() }
    }
}

impl ClassifyOptions {
    pub fn refined(mut self) -> Self {
        self.tail = self.tail.refined();
        self
    }
}

/// A tail integral at the ends of the domain that are not boundary points:
/// infinity always, the origin when the domain is punctured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailIntegral {
    pub outer: TailVerdict,
    pub inner: Option<TailVerdict>,
    /// Gradient vanishes identically on the probed tail.
    #[serde(default)]
    pub degenerate_gradient: bool,
}

impl TailIntegral {
    /// Divergent when every probed end diverges, convergent when one converges.
    pub fn verdict(&self) -> Convergence {
        let ends: Vec<Convergence> = std::iter::once(self.outer.verdict).chain(self.inner.as_ref().map(|v| v.verdict)).collect();
        if ends.contains(&Convergence::Convergent) {
            Convergence::Convergent
        } else if ends.iter().all(|&v| v == Convergence::Divergent) {
            Convergence::Divergent
        } else {
            Convergence::Inconclusive
        }
    }

    fn energy_verdict(&self) -> GroundStateVerdict {
        match self.verdict() {
            Convergence::Divergent => GroundStateVerdict::GroundState,
            Convergence::Convergent => GroundStateVerdict::SpectralGap,
            Convergence::Inconclusive => GroundStateVerdict::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationVerdict {
    pub verdict: GroundStateVerdict,
    /// Null sequence for the first split energy.
    pub e1: GroundStateVerdict,
    /// Null sequence for the second split energy (`p > 2`, `d ≥ 2`).
    pub e2: Option<GroundStateVerdict>,
    pub m1: TailIntegral,
    pub m2: Option<TailIntegral>,
    pub p_vs_d: String,
}

fn outer_start(domain: &RadialDomain, opts: &ClassifyOptions) -> f64 {
    opts.r0_outer.unwrap_or_else(|| (2.0 * domain.r_min).max(1.0))
}

fn tails<F>(ln_rf: F, domain: &RadialDomain, opts: &ClassifyOptions) -> TailIntegral
where
    F: Fn(f64) -> Option<f64> + Sync,
{
    let outer = classify_tail(&ln_rf, outer_start(domain, opts), Direction::TowardInfinity, &opts.tail);
    let inner = (domain.r_min == 0.0 && domain.punctured)
        .then(|| classify_tail(&ln_rf, opts.r0_inner, Direction::TowardZero, &opts.tail));
    TailIntegral { outer, inner, degenerate_gradient: false }
}

fn within_reach(phi: &ScalarField, ln_r: f64) -> bool {
    ln_r.abs() <= phi.log_reach()
}

/// Tail behaviour of `M₁` toward infinity and, on punctured domains, toward 0.
pub fn m1_integral(phi: &ScalarField, p: f64, d: f64, domain: &RadialDomain, opts: &ClassifyOptions) -> TailIntegral {
    let ln_rf = |ln_r: f64| -> Option<f64> {
        if !within_reach(phi, ln_r) {
            return None;
        }
        let ln_phi = phi.ln_value(ln_r);
        Some(ln_r - (p * ln_phi + (d - 1.0) * ln_r) / (p - 1.0))
    };
    tails(ln_rf, domain, opts)
}

/// Tail behaviour of `M₂`. Points where `φ' = 0` make the integrand infinite
/// and are excised from the fit; a gradient vanishing on the whole probed
/// tail yields a divergent verdict by convention, flagged as degenerate.
pub fn m2_integral(phi: &ScalarField, p: f64, d: f64, domain: &RadialDomain, opts: &ClassifyOptions) -> Result<TailIntegral> {
    if !(p > 2.0) || d < 2.0 {
        return Err(invalid("M₂ is defined for p > 2 and d ≥ 2"));
    }
    let ln_rf = |ln_r: f64| -> Option<f64> {
        if !within_reach(phi, ln_r) {
            return None;
        }
        let ln_phi = phi.ln_value(ln_r);
        let ln_dphi = phi.ln_abs_derivative(ln_r);
        if ln_dphi == f64::NEG_INFINITY {
            return Some(f64::INFINITY);
        }
        Some((2.0 - d) * ln_r - 2.0 * ln_phi + (2.0 - p) * ln_dphi)
    };
    let degenerate = |r0: f64, sign: f64| {
        (0..64).all(|i| phi.ln_abs_derivative(r0.ln() + sign * 0.5 * i as f64) == f64::NEG_INFINITY)
    };
    let mut out = tails(ln_rf, domain, opts);
    let flag = |v: &mut TailVerdict| {
        v.verdict = Convergence::Divergent;
        v.reason = Some("degenerate gradient: φ' vanishes on the tail, integrand is infinite".into());
    };
    if degenerate(outer_start(domain, opts), 1.0) {
        flag(&mut out.outer);
        out.degenerate_gradient = true;
    }
    if let Some(inner) = out.inner.as_mut() {
        if degenerate(opts.r0_inner, -1.0) {
            flag(inner);
            out.degenerate_gradient = true;
        }
    }
    Ok(out)
}

/// `M̃₂ = ∫ t^{1-p} (ln t)^{γ(2-p)} dt`, comparable to `M₂` for the η-family.
pub fn m2_tilde(gamma: f64, p: f64, t0: f64, tail: &TailOptions) -> TailVerdict {
    let ln_rf = |ln_t: f64| -> Option<f64> { (ln_t > 0.0).then(|| (2.0 - p) * ln_t + gamma * (2.0 - p) * ln_t.ln()) };
    classify_tail(&ln_rf, t0.max(std::f64::consts::E), Direction::TowardInfinity, tail)
}

fn p_vs_d_note(p: f64, d: f64, domain: &RadialDomain) -> String {
    let relation = if p < d {
        "p < d"
    } else if p == d {
        "p = d"
    } else {
        "p > d"
    };
    let ends = if domain.contains_origin() {
        "the origin is interior, only the tail at infinity is tested"
    } else if domain.r_min > 0.0 {
        "the inner sphere is a boundary, only the tail at infinity is tested"
    } else {
        "both the origin and infinity are tested"
    };
    format!("{relation}; {ends}")
}

/// Classifies a positive solution `φ` by its tail integrals. For `p > 2`
/// and `d ≥ 2` both split energies need a null sequence for a ground state.
pub fn classify(phi: &ScalarField, p: f64, d: f64, domain: &RadialDomain, opts: &ClassifyOptions) -> Result<ClassificationVerdict> {
    if !phi.is_positive() {
        return Err(invalid("classification needs a positive field"));
    }
    if !(p > 1.0) {
        return Err(invalid("classification needs p > 1"));
    }
    let m1 = m1_integral(phi, p, d, domain, opts);
    let e1 = m1.energy_verdict();
    let m2 = if p > 2.0 && d >= 2.0 { Some(m2_integral(phi, p, d, domain, opts)?) } else { None };
    let e2 = m2.as_ref().map(TailIntegral::energy_verdict);
    let verdict = match e2 {
        None => e1,
        Some(e2) => {
            if e1 == GroundStateVerdict::SpectralGap || e2 == GroundStateVerdict::SpectralGap {
                GroundStateVerdict::SpectralGap
            } else if e1 == GroundStateVerdict::GroundState && e2 == GroundStateVerdict::GroundState {
                GroundStateVerdict::GroundState
            } else {
                GroundStateVerdict::Inconclusive
            }
        }
    };
    Ok(ClassificationVerdict { verdict, e1, e2, m1, m2, p_vs_d: p_vs_d_note(p, d, domain) })
}
