//! The functional `Q`, its product form for `u = v·w`, and the simplified
//! energies that are two-sided equivalent to it.

use serde::{Deserialize, Serialize};

use crate::domain::{Grading, ProblemSpec, RadialGrid};
use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::par::{self, Execution};
use crate::picone::{scalar_f, EquivalenceConstants};
use crate::quad::{integrate_on, IntegralResult, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub gradient_term: f64,
    pub potential_term: f64,
    pub total: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

impl EnergyBreakdown {
    pub const ZERO: EnergyBreakdown =
        EnergyBreakdown { gradient_term: 0.0, potential_term: 0.0, total: 0.0, error_estimate: 0.0, converged: true };
}

/// Integration range for a field that must vanish near both ends of the grid.
///
/// Fields with a declared support must keep it inside the grid; otherwise the
/// field must vanish at every node of the outermost decade (or the two
/// outermost nodes of a uniform grid) on each side.
pub fn support_range(u: &ScalarField, grid: &RadialGrid) -> Result<Option<(f64, f64)>> {
    let (glo, ghi) = (grid.lo(), grid.hi());
    let leak = |lo: f64, hi: f64| Error::SupportLeak { support_lo: lo, support_hi: hi, grid_lo: glo, grid_hi: ghi };
    if let Some((lo, hi)) = u.support() {
        if lo < glo || hi > ghi {
            return Err(leak(lo, hi));
        }
        return Ok(if lo < hi { Some((lo, hi)) } else { None });
    }
    let nodes = grid.nodes();
    let outer: Vec<f64> = match grid.grading() {
        Grading::Log { .. } => nodes.iter().copied().filter(|&r| r <= glo * 10.0 || r >= ghi / 10.0).collect(),
        Grading::Uniform { .. } => {
            let n = nodes.len();
            vec![nodes[0], nodes[1.min(n - 1)], nodes[n.saturating_sub(2)], nodes[n - 1]]
        }
    };
    if let Some(&r) = outer.iter().find(|&&r| u.value(r) != 0.0) {
        return Err(leak(r.min(glo), r.max(ghi)));
    }
    Ok(Some((glo, ghi)))
}

fn weight(spec: &ProblemSpec, r: f64) -> f64 {
    spec.sphere_constant() * r.powf(spec.d() - 1.0)
}

fn integrate_term<F: Fn(f64) -> f64 + Sync>(
    f: F,
    grid: &RadialGrid,
    range: (f64, f64),
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<IntegralResult> {
    integrate_on(&f, grid, range.0, range.1, breakpoints, opts)
}

/// `Q(u) = C_d ∫ (|u'|^p + V|u|^p) r^{d-1} dr` for compactly supported `u`.
pub fn energy_q(u: &ScalarField, spec: &ProblemSpec, grid: &RadialGrid, opts: &QuadOptions) -> Result<EnergyBreakdown> {
    let Some(range) = support_range(u, grid)? else { return Ok(EnergyBreakdown::ZERO) };
    let p = spec.p();
    let bp = u.breakpoints();
    let grad = integrate_term(|r| u.derivative(r).abs().powf(p) * weight(spec, r), grid, range, &bp, opts)?;
    let pot = if spec.potential.is_zero() {
        IntegralResult::ZERO
    } else {
        integrate_term(|r| spec.potential.value(r) * u.value(r).abs().powf(p) * weight(spec, r), grid, range, &bp, opts)?
    };
    Ok(EnergyBreakdown {
        gradient_term: grad.value,
        potential_term: pot.value,
        total: grad.value + pot.value,
        error_estimate: grad.error_estimate + pot.error_estimate,
        converged: grad.converged && pot.converged,
    })
}

/// Pointwise `|v w' + w v'|^p − w^p|v'|^p − p w^{p−1} v |v'|^{p−2} v' w'`,
/// written as `|a|^p f(|b|/|a|, sign(ab))` with `a = w v'`, `b = v w'`.
pub fn product_integrand(v: f64, dv: f64, w: f64, dw: f64, p: crate::domain::Exponent) -> f64 {
    let a = w * dv;
    let b = v * dw;
    if b == 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return b.abs().powf(p.get());
    }
    let theta = if a * b > 0.0 { 1.0 } else { -1.0 };
    a.abs().powf(p.get()) * scalar_f(b.abs() / a.abs(), theta, p)
}

/// `Q(vw)` through the expanded product form, valid when `v` solves the
/// equation and `w ≥ 0` has compact support.
pub fn energy_q_product(v: &ScalarField, w: &ScalarField, spec: &ProblemSpec, grid: &RadialGrid, opts: &QuadOptions) -> Result<IntegralResult> {
    let Some(range) = support_range(w, grid)? else { return Ok(IntegralResult::ZERO) };
    let mut bp = w.breakpoints();
    bp.extend(v.breakpoints());
    let p = spec.exponent;
    integrate_term(
        |r| {
            let (jv, jw) = (v.jet(r), w.jet(r));
            product_integrand(jv.value, jv.d1, jw.value, jw.d1, p) * weight(spec, r)
        },
        grid,
        range,
        &bp,
        opts,
    )
}

/// `v²|w'|²(w|v'| + v|w'|)^{p−2}`, zero where `v|w'| = 0`.
pub fn simplified_integrand(v: f64, dv: f64, w: f64, dw: f64, p: f64) -> f64 {
    let b = (v * dw).abs();
    if b == 0.0 {
        return 0.0;
    }
    b * b * ((w * dv).abs() + b).powf(p - 2.0)
}

/// The simplified energy `S(v, w) = ∫ v²|∇w|²(w|∇v| + v|∇w|)^{p−2}`.
pub fn simplified_energy(v: &ScalarField, w: &ScalarField, spec: &ProblemSpec, grid: &RadialGrid, opts: &QuadOptions) -> Result<IntegralResult> {
    let Some(range) = support_range(w, grid)? else { return Ok(IntegralResult::ZERO) };
    let mut bp = w.breakpoints();
    bp.extend(v.breakpoints());
    let p = spec.p();
    integrate_term(
        |r| {
            let (jv, jw) = (v.jet(r), w.jet(r));
            simplified_integrand(jv.value.max(0.0), jv.d1, jw.value, jw.d1, p) * weight(spec, r)
        },
        grid,
        range,
        &bp,
        opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitEnergy {
    /// `∫ v^p |∇w|^p`
    pub e1: IntegralResult,
    /// `∫ v²|∇v|^{p−2} w^{p−2} |∇w|²`
    pub e2: IntegralResult,
}

/// The two-term split of the simplified energy for `p > 2`.
pub fn simplified_energy_split(v: &ScalarField, w: &ScalarField, spec: &ProblemSpec, grid: &RadialGrid, opts: &QuadOptions) -> Result<SplitEnergy> {
    let p = spec.p();
    if p <= 2.0 {
        return Err(invalid("the two-term split needs p > 2"));
    }
    let Some(range) = support_range(w, grid)? else {
        return Ok(SplitEnergy { e1: IntegralResult::ZERO, e2: IntegralResult::ZERO });
    };
    let mut bp = w.breakpoints();
    bp.extend(v.breakpoints());
    let e1 = integrate_term(|r| (v.value(r) * w.derivative(r).abs()).powf(p) * weight(spec, r), grid, range, &bp, opts)?;
    let e2 = integrate_term(
        |r| {
            let (jv, jw) = (v.jet(r), w.jet(r));
            let dw2 = jw.d1 * jw.d1;
            if dw2 == 0.0 {
                return 0.0;
            }
            jv.value * jv.value * jv.d1.abs().powf(p - 2.0) * jw.value.abs().powf(p - 2.0) * dw2 * weight(spec, r)
        },
        grid,
        range,
        &bp,
        opts,
    )?;
    Ok(SplitEnergy { e1, e2 })
}

/// Constants with `lo·(E1+E2) ≤ S ≤ hi·(E1+E2)` from `(a+b)^q ≍ a^q + b^q`.
pub fn split_bounds(p: f64) -> (f64, f64) {
    let q = p - 2.0;
    let c = 2f64.powf(q - 1.0);
    (c.min(1.0), c.max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquivalenceMode {
    /// `v` is a positive solution; ratios are bounded above and below.
    TwoSided,
    /// `v` is a nonnegative subsolution; ratios are bounded above only.
    OneSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceEntry {
    pub index: usize,
    /// `Q(vw)` from the functional itself.
    pub q_direct: f64,
    /// `Q(vw)` from the product form (meaningful when `v` solves).
    pub q_product: f64,
    pub simplified: f64,
    /// `q_direct / simplified`
    pub ratio: f64,
    /// `q_product / simplified`
    pub ratio_product: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub family: String,
    pub mode: EquivalenceMode,
    pub entries: Vec<EquivalenceEntry>,
    pub inf: f64,
    pub sup: f64,
    /// Indices where `S = 0` but `Q ≠ 0`.
    pub violations: Vec<usize>,
    pub constants_reference: Option<EquivalenceConstants>,
    /// Ratios fall in `[c_lower, c_upper]` (two-sided) or below `c_upper` (one-sided).
    pub within_constants: Option<bool>,
}

impl EquivalenceReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.ratio).collect()
    }
}

/// Ratios `Q(v w_k) / S(v, w_k)` along a family of test functions.
#[allow(clippy::too_many_arguments)]
pub fn equivalence_report(
    v: &ScalarField,
    family: &[ScalarField],
    family_name: &str,
    spec: &ProblemSpec,
    grid: &RadialGrid,
    mode: EquivalenceMode,
    constants: Option<&EquivalenceConstants>,
    opts: &QuadOptions,
) -> Result<EquivalenceReport> {
    // Members run in parallel; panels inside each run sequentially.
    let inner = opts.with_execution(Execution::Sequential);
    let results = par::map_range(opts.execution, family.len(), |k| -> Result<EquivalenceEntry> {
        let w = &family[k];
        let vw = v.positive_part().product(w);
        let q = energy_q(&vw, spec, grid, &inner)?;
        let qp = energy_q_product(v, w, spec, grid, &inner)?;
        let s = simplified_energy(v, w, spec, grid, &inner)?;
        Ok(EquivalenceEntry {
            index: k,
            q_direct: q.total,
            q_product: qp.value,
            simplified: s.value,
            ratio: q.total / s.value,
            ratio_product: qp.value / s.value,
            error_estimate: q.error_estimate + qp.error_estimate + s.error_estimate,
        })
    });
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let violations: Vec<usize> = entries
        .iter()
        .filter(|e| e.simplified == 0.0 && e.q_direct.abs() > e.error_estimate)
        .map(|e| e.index)
        .collect();
    let finite: Vec<f64> = entries.iter().map(|e| e.ratio).filter(|r| r.is_finite()).collect();
    let inf = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let sup = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let within_constants = constants.map(|c| match mode {
        EquivalenceMode::TwoSided => finite.iter().all(|&r| c.contains(r, 1e-6)),
        EquivalenceMode::OneSided => finite.iter().all(|&r| r <= c.c_upper * (1.0 + 1e-6)),
    });
    Ok(EquivalenceReport {
        family: family_name.to_string(),
        mode,
        entries,
        inf,
        sup,
        violations,
        constants_reference: constants.copied(),
        within_constants,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointwiseCheck {
    pub nodes_checked: usize,
    pub violations: usize,
}

/// For `1 < p < 2`, counts nodes where
/// `v²|w'|²(w|v'| + v|w'|)^{p−2} > v^p|w'|^p`.
pub fn subquadratic_pointwise_check(v: &ScalarField, w: &ScalarField, p: f64, nodes: &[f64]) -> Result<PointwiseCheck> {
    if !(p > 1.0 && p < 2.0) {
        return Err(invalid("the pointwise comparison is stated for 1 < p < 2"));
    }
    let mut violations = 0;
    for &r in nodes {
        let (jv, jw) = (v.jet(r), w.jet(r));
        let lhs = simplified_integrand(jv.value, jv.d1, jw.value, jw.d1, p);
        let rhs = (jv.value * jw.d1.abs()).powf(p);
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(PointwiseCheck { nodes_checked: nodes.len(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_grid, Dimension, Exponent, Potential, RadialDomain};

    fn spec(p: f64, d: u32, domain: RadialDomain, potential: Potential) -> ProblemSpec {
        ProblemSpec::new(Exponent::new(p).unwrap(), Dimension::new(d).unwrap(), domain, potential).unwrap()
    }

    #[test]
    fn tent_energy_in_one_dimension() {
        let dom = RadialDomain::whole_space();
        let s = spec(2.0, 1, dom, Potential::Zero);
        let grid = make_grid(&dom, 20, (0.0, 5.0)).unwrap();
        let u = ScalarField::tent(1.0, 2.0, 3.0).unwrap();
        let q = energy_q(&u, &s, &grid, &QuadOptions::default()).unwrap();
        assert!((q.total - 4.0).abs() < 1e-12, "{q:?}");
        let zero = ScalarField::constant(0.0).product(&u);
        assert_eq!(energy_q(&zero, &s, &grid, &QuadOptions::default()).unwrap().total, 0.0);
    }

    #[test]
    fn support_must_stay_inside_grid() {
        let dom = RadialDomain::punctured_space();
        let s = spec(2.0, 3, dom, Potential::Zero);
        let grid = make_grid(&dom, 10, (1.0, 10.0)).unwrap();
        let u = ScalarField::bump(9.5, 1.0).unwrap();
        assert!(matches!(energy_q(&u, &s, &grid, &QuadOptions::default()), Err(Error::SupportLeak { .. })));
        let c = ScalarField::constant(1.0);
        assert!(energy_q(&c, &s, &grid, &QuadOptions::default()).is_err());
    }

    #[test]
    fn constant_v_reduces_product_form() {
        let dom = RadialDomain::punctured_space();
        let s = spec(3.0, 2, dom, Potential::Zero);
        let grid = make_grid(&dom, 10, (0.1, 10.0)).unwrap();
        let v = ScalarField::constant(1.0);
        let w = ScalarField::bump(2.0, 1.0).unwrap();
        let o = QuadOptions::default();
        let q = energy_q(&w, &s, &grid, &o).unwrap().total;
        let qp = energy_q_product(&v, &w, &s, &grid, &o).unwrap().value;
        let se = simplified_energy(&v, &w, &s, &grid, &o).unwrap().value;
        assert!((q - qp).abs() < 1e-10 * q);
        assert!((q - se).abs() < 1e-10 * q);
        let split = simplified_energy_split(&ScalarField::constant(2.0), &w, &s, &grid, &o).unwrap();
        assert_eq!(split.e2.value, 0.0);
        assert!((split.e1.value - 8.0 * q).abs() < 1e-10 * q);
    }

    #[test]
    fn flat_region_contributes_nothing() {
        let p = Exponent::new(2.5).unwrap();
        assert_eq!(product_integrand(1.3, 0.7, 0.4, 0.0, p), 0.0);
        assert_eq!(simplified_integrand(1.3, 0.7, 0.4, 0.0, 2.5), 0.0);
    }

    #[test]
    fn product_integrand_matches_expansion() {
        let p = Exponent::new(3.0).unwrap();
        let (v, dv, w, dw) = (1.2f64, -0.7f64, 0.4f64, 0.9f64);
        let pp = p.get();
        let direct = (v * dw + w * dv).abs().powf(pp)
            - w.powf(pp) * dv.abs().powf(pp)
            - pp * w.powf(pp - 1.0) * v * dv.abs().powf(pp - 2.0) * dv * dw;
        assert!((product_integrand(v, dv, w, dw, p) - direct).abs() < 1e-12);
    }

    #[test]
    fn split_bounds_bracket_simplified_integrand() {
        for p in [2.5, 3.0, 4.5] {
            let (lo, hi) = split_bounds(p);
            for (v, dv, w, dw) in [(1.0, 0.3, 0.5, 2.0), (0.2, 3.0, 1.0, 0.1), (2.0, -1.0, 0.7, -0.4)] {
                let s = simplified_integrand(v, dv, w, dw, p);
                let e = (v * f64::abs(dw)).powf(p) + v * v * f64::abs(dv).powf(p - 2.0) * f64::powf(w, p - 2.0) * dw * dw;
                assert!(s >= lo * e * (1.0 - 1e-12) && s <= hi * e * (1.0 + 1e-12));
            }
        }
    }
}
