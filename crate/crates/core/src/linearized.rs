//! The quadratic form obtained by linearizing `Q` at a positive solution `φ`,
//!
//! `a[u] = ∫ (|∇φ|^{p−2}|∇u|² + V φ^{p−2} u²)`,
//!
//! and the passage of null sequences between `Q` and `a` in both directions.

use serde::{Deserialize, Serialize};

use crate::domain::{ProblemSpec, RadialGrid};
use crate::energy::{energy_q, energy_q_product, support_range, EnergyBreakdown};
use crate::error::{invalid, Error, Result};
use crate::field::{abs_pow_pm2, ScalarField};
use crate::nullseq::{CutoffFamily, DecayConvention, DecayFit, SequenceVerdict};
use crate::par::{self, Execution};
use crate::quad::{integrate_on, IntegralResult, QuadOptions};
use crate::solutions::TestBump;

/// Weights of the linearized form around a base solution.
#[derive(Debug, Clone)]
pub struct QuadraticFormSpec {
    pub phi: ScalarField,
    pub spec: ProblemSpec,
}

impl QuadraticFormSpec {
    pub fn new(phi: ScalarField, spec: ProblemSpec) -> Result<Self> {
        if !phi.is_positive() {
            return Err(invalid("the linearized form needs a positive base solution"));
        }
        Ok(QuadraticFormSpec { phi, spec })
    }

    pub fn p(&self) -> f64 {
        self.spec.p()
    }

    /// `|φ'(r)|^{p−2}`
    pub fn weight_grad(&self, r: f64) -> f64 {
        abs_pow_pm2(self.phi.derivative(r), self.p())
    }

    /// `V(r) φ(r)^{p−2}`
    pub fn weight_pot(&self, r: f64) -> f64 {
        let v = self.spec.potential.value(r);
        if v == 0.0 {
            0.0
        } else {
            v * self.phi.value(r).powf(self.p() - 2.0)
        }
    }

    /// Nodes where the gradient weight is not finite (`φ' = 0` with `p < 2`).
    pub fn flagged_nodes(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().copied().filter(|&r| r > 0.0 && !self.weight_grad(r).is_finite()).collect()
    }

    fn radial_weight(&self, r: f64) -> f64 {
        self.spec.sphere_constant() * r.powf(self.spec.d() - 1.0)
    }
}

fn breakpoints(fields: &[&ScalarField]) -> Vec<f64> {
    fields.iter().flat_map(|f| f.breakpoints()).collect()
}

/// `a[u]` for compactly supported `u`.
pub fn quadratic_form_a(u: &ScalarField, qspec: &QuadraticFormSpec, grid: &RadialGrid, opts: &QuadOptions) -> Result<EnergyBreakdown> {
    let Some((lo, hi)) = support_range(u, grid)? else { return Ok(EnergyBreakdown::ZERO) };
    let bp = breakpoints(&[u, &qspec.phi]);
    let grad = integrate_on(
        &|r: f64| {
            let du = u.derivative(r);
            if du == 0.0 {
                0.0
            } else {
                qspec.weight_grad(r) * du * du * qspec.radial_weight(r)
            }
        },
        grid,
        lo,
        hi,
        &bp,
        opts,
    )?;
    let pot = if qspec.spec.potential.is_zero() {
        IntegralResult::ZERO
    } else {
        integrate_on(
            &|r: f64| {
                let v = u.value(r);
                if v == 0.0 {
                    0.0
                } else {
                    qspec.weight_pot(r) * v * v * qspec.radial_weight(r)
                }
            },
            grid,
            lo,
            hi,
            &bp,
            opts,
        )?
    };
    Ok(EnergyBreakdown {
        gradient_term: grad.value,
        potential_term: pot.value,
        total: grad.value + pot.value,
        error_estimate: grad.error_estimate + pot.error_estimate,
        converged: grad.converged && pot.converged,
    })
}

/// `∫ ψ² |φ'|^{p−2} |v'|²`, the right side of the linear Picone identity.
pub fn weighted_dirichlet(psi: &ScalarField, v: &ScalarField, qspec: &QuadraticFormSpec, grid: &RadialGrid, opts: &QuadOptions) -> Result<IntegralResult> {
    let Some((lo, hi)) = support_range(v, grid)? else { return Ok(IntegralResult::ZERO) };
    let bp = breakpoints(&[psi, v, &qspec.phi]);
    integrate_on(
        &|r: f64| {
            let dv = v.derivative(r);
            if dv == 0.0 {
                return 0.0;
            }
            let s = psi.value(r).max(0.0);
            s * s * qspec.weight_grad(r) * dv * dv * qspec.radial_weight(r)
        },
        grid,
        lo,
        hi,
        &bp,
        opts,
    )
}

/// Weak residual `∫ (|φ'|^{p−2} ψ' ζ' + V φ^{p−2} ψ ζ)` of the linearized
/// equation against a bump `ζ`, relative to the integral of the absolute terms.
pub fn linear_weak_residual(psi: &ScalarField, qspec: &QuadraticFormSpec, bump: &TestBump, grid: &RadialGrid, opts: &QuadOptions) -> Result<f64> {
    let zeta = bump.field()?;
    let Some((lo, hi)) = support_range(&zeta, grid)? else { return Ok(0.0) };
    let bp = breakpoints(&[psi, &zeta, &qspec.phi]);
    let terms = |r: f64| {
        let (s, z) = (psi.jet(r), zeta.jet(r));
        let g = if z.d1 == 0.0 { 0.0 } else { qspec.weight_grad(r) * s.d1 * z.d1 };
        let v = if z.value == 0.0 { 0.0 } else { qspec.weight_pot(r) * s.value * z.value };
        (g * qspec.radial_weight(r), v * qspec.radial_weight(r))
    };
    let value = integrate_on(&|r: f64| { let (g, v) = terms(r); g + v }, grid, lo, hi, &bp, opts)?;
    let scale = integrate_on(&|r: f64| { let (g, v) = terms(r); g.abs() + v.abs() }, grid, lo, hi, &bp, opts)?;
    Ok(if value.value == 0.0 { 0.0 } else { value.value / scale.value })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiconeMode {
    /// `ψ` solves the linearized equation: both sides agree.
    Solution,
    /// `ψ` is a nonnegative subsolution: `a[ψv] ≤ ∫ψ²A|v'|²`.
    Subsolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPiconeCheck {
    pub mode: PiconeMode,
    /// `a[ψv]`
    pub lhs: f64,
    /// `∫ψ²|φ'|^{p−2}|v'|²`
    pub rhs: f64,
    pub error_estimate: f64,
    pub holds: bool,
}

/// Linear Picone identity (or inequality) for a certified `ψ`. Certification
/// runs the weak residual on `bumps` with tolerance `cert_tol`.
#[allow(clippy::too_many_arguments)]
pub fn linear_picone_check(
    psi: &ScalarField,
    v: &ScalarField,
    qspec: &QuadraticFormSpec,
    grid: &RadialGrid,
    mode: PiconeMode,
    bumps: &[TestBump],
    cert_tol: f64,
    opts: &QuadOptions,
) -> Result<LinearPiconeCheck> {
    for b in bumps {
        let res = linear_weak_residual(psi, qspec, b, grid, opts)?;
        let ok = match mode {
            PiconeMode::Solution => res.abs() <= cert_tol,
            PiconeMode::Subsolution => res <= cert_tol,
        };
        if !ok {
            return Err(Error::NotCertified(format!(
                "linearized weak residual {res:.3e} on the bump at {} exceeds {cert_tol:e}",
                b.center
            )));
        }
    }
    let psi_v = psi.positive_part().product(v);
    let lhs = quadratic_form_a(&psi_v, qspec, grid, opts)?;
    let rhs = weighted_dirichlet(psi, v, qspec, grid, opts)?;
    let err = lhs.error_estimate + rhs.error_estimate;
    let slack = 3.0 * err + 1e-9 * rhs.value.abs().max(lhs.total.abs());
    let holds = match mode {
        PiconeMode::Solution => (lhs.total - rhs.value).abs() <= slack,
        PiconeMode::Subsolution => lhs.total <= rhs.value + slack,
    };
    Ok(LinearPiconeCheck { mode, lhs: lhs.total, rhs: rhs.value, error_estimate: err, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTransferEntry {
    pub k: usize,
    /// The transferred energy (`a[φ w_k^{p/2}]` or `Q(u_k)`).
    pub value: f64,
    /// The same quantity from the alternative pathway.
    pub check: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTransferReport {
    pub p: f64,
    pub entries: Vec<LinearTransferEntry>,
    /// Largest relative mismatch between `value` and `check`.
    pub max_relative_mismatch: f64,
    pub decay: DecayFit,
    pub verdict: SequenceVerdict,
}

impl LinearTransferReport {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

fn finish(p: f64, entries: Vec<LinearTransferEntry>, convention: &DecayConvention) -> LinearTransferReport {
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let decay = convention.assess(&values);
    let max_relative_mismatch = entries
        .iter()
        .map(|e| if e.value == e.check { 0.0 } else { (e.value - e.check).abs() / e.value.abs().max(e.check.abs()) })
        .fold(0.0, f64::max);
    let verdict = if decay.decays { SequenceVerdict::NullSequence } else { SequenceVerdict::NotNull };
    LinearTransferReport { p, entries, max_relative_mismatch, decay, verdict }
}

/// From a null sequence `φ w_k` of `Q` (p > 2) to `a`: with `v_k = w_k^{p/2}`
/// records `∫φ²|φ'|^{p−2}|v_k'|²` and checks it against the chain form
/// `(p/2)² ∫φ²|φ'|^{p−2} w_k^{p−2}|w_k'|²`.
pub fn transfer_q_to_a(
    family: &CutoffFamily,
    qspec: &QuadraticFormSpec,
    grid: &RadialGrid,
    convention: &DecayConvention,
    opts: &QuadOptions,
) -> Result<LinearTransferReport> {
    let p = qspec.p();
    if !(p > 2.0) {
        return Err(invalid("transfer from Q to a needs p > 2; use transfer_a_to_q for p < 2"));
    }
    if !qspec.flagged_nodes(grid.nodes()).is_empty() {
        return Err(invalid("φ' vanishes on the grid"));
    }
    let phi = &qspec.phi;
    let inner = opts.with_execution(Execution::Sequential);
    let fields = family.fields();
    let entries = par::map_range(opts.execution, fields.len(), |i| -> Result<LinearTransferEntry> {
        let w = &fields[i];
        let v = w.powf(p / 2.0);
        let value = weighted_dirichlet(phi, &v, qspec, grid, &inner)?.value;
        let Some((lo, hi)) = support_range(w, grid)? else {
            return Ok(LinearTransferEntry { k: i + 1, value, check: 0.0 });
        };
        let chain = integrate_on(
            &|r: f64| {
                let jw = w.jet(r);
                if jw.d1 == 0.0 {
                    return 0.0;
                }
                let f = phi.value(r);
                f * f * qspec.weight_grad(r) * jw.value.powf(p - 2.0) * jw.d1 * jw.d1 * qspec.radial_weight(r)
            },
            grid,
            lo,
            hi,
            &breakpoints(&[w, phi]),
            &inner,
        )?;
        Ok(LinearTransferEntry { k: i + 1, value, check: (p / 2.0).powi(2) * chain.value })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(finish(p, entries, convention))
}

/// From a null sequence `z_k = φ·w_k` of `a` (p < 2) to `Q`: with
/// `u_k = φ (z_k/φ)^{2/p}` records `Q(u_k)`. The check column holds the
/// product form of `Q(u_k)`; the second vector holds the linear energies
/// `∫φ²|φ'|^{p−2}|(z_k/φ)'|²` that certify `z_k`.
pub fn transfer_a_to_q(
    family: &CutoffFamily,
    qspec: &QuadraticFormSpec,
    grid: &RadialGrid,
    convention: &DecayConvention,
    opts: &QuadOptions,
) -> Result<(LinearTransferReport, Vec<f64>)> {
    let p = qspec.p();
    if !(p < 2.0) {
        return Err(invalid("transfer from a to Q needs p < 2; use transfer_q_to_a for p > 2"));
    }
    let phi = &qspec.phi;
    let inv_phi = phi.powf(-1.0);
    let inner = opts.with_execution(Execution::Sequential);
    let fields = family.fields();
    let rows = par::map_range(opts.execution, fields.len(), |i| -> Result<(LinearTransferEntry, f64)> {
        let z = phi.product(&fields[i]);
        let ratio = z.product(&inv_phi);
        let w = ratio.powf(2.0 / p);
        let q = energy_q(&phi.product(&w), &qspec.spec, grid, &inner)?;
        let q_product = energy_q_product(phi, &w, &qspec.spec, grid, &inner)?;
        let a_z = weighted_dirichlet(phi, &ratio, qspec, grid, &inner)?.value;
        Ok((LinearTransferEntry { k: i + 1, value: q.total, check: q_product.value }, a_z))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (entries, a_values): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok((finish(p, entries, convention), a_values))
}
