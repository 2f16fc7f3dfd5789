//! Logarithmic cutoff families and the finite-K null-sequence test.

use serde::{Deserialize, Serialize};

use crate::domain::{make_grid, ProblemSpec, RadialDomain, RadialGrid};
use crate::energy::{energy_q, energy_q_product};
use crate::error::{invalid, Result};
use crate::field::{Jet, RadialProfile, ScalarField};
use crate::par::{self, Execution};
use crate::quad::{integrate_on, IntegralResult, QuadOptions};
use crate::stats::line_fit;

/// `w = 1` on `[b, c]`, log-linear ramps on `[a, b]` and `[c, e]`, zero
/// outside `[a, e]`. Without an inner ramp `w = 1` on `[0, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCutoff {
    /// `(a, b)`, absent when the cutoff reaches the origin.
    pub inner: Option<(f64, f64)>,
    pub c: f64,
    pub e: f64,
}

impl LogCutoff {
    pub fn new(inner: Option<(f64, f64)>, c: f64, e: f64) -> Result<Self> {
        if let Some((a, b)) = inner {
            if !(a > 0.0 && a < b && b <= c) {
                return Err(invalid(format!("cutoff needs 0 < a < b ≤ c, got a = {a}, b = {b}, c = {c}")));
            }
        }
        if !(c > 0.0 && c < e && e.is_finite()) {
            return Err(invalid(format!("cutoff needs 0 < c < e < ∞, got c = {c}, e = {e}")));
        }
        Ok(LogCutoff { inner, c, e })
    }

    pub fn field(&self) -> ScalarField {
        ScalarField::from_profile(*self, false)
    }

    pub fn lower(&self) -> f64 {
        self.inner.map_or(0.0, |(a, _)| a)
    }
}

impl RadialProfile for LogCutoff {
    fn jet(&self, r: f64) -> Jet {
        if let Some((a, b)) = self.inner {
            if r <= a {
                return Jet::new(0.0, 0.0, 0.0);
            }
            if r < b {
                let l = (b / a).ln();
                return Jet::new((r / a).ln() / l, 1.0 / (r * l), -1.0 / (r * r * l));
            }
        }
        if r <= self.c {
            return Jet::new(1.0, 0.0, 0.0);
        }
        if r < self.e {
            let l = (self.e / self.c).ln();
            return Jet::new((self.e / r).ln() / l, -1.0 / (r * l), 1.0 / (r * r * l));
        }
        Jet::new(0.0, 0.0, 0.0)
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((self.lower(), self.e))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut bp: Vec<f64> = self.inner.map_or(Vec::new(), |(a, b)| vec![a, b]);
        bp.extend([self.c, self.e]);
        bp
    }

    fn describe(&self) -> String {
        match self.inner {
            Some((a, b)) => format!("log cutoff [{a:e}, {b:e}, {:e}, {:e}]", self.c, self.e),
            None => format!("log cutoff [0, {:e}, {:e}]", self.c, self.e),
        }
    }
}

/// Growth of the plateau radius `R_k` with the index.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `R_k = R^{k(k+1)/2}`: `ln R_k` grows quadratically, so borderline
    /// energies decaying like `1/ln R_k` fall by the factor `K(K+1)/2`.
    #[default]
    Triangular,
    /// `R_k = R^k`.
    Geometric,
}

impl Schedule {
    pub fn exponent(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            Schedule::Triangular => k * (k + 1.0) / 2.0,
            Schedule::Geometric => k,
        }
    }
}

/// Indexed cutoffs `w_1, …, w_K` with `a_k = R_k^{-2}`, `b_k = R_k^{-1}`,
/// `c_k = R_k`, `e_k = R_k^2`, plus the normalization window `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub growth: f64,
    pub schedule: Schedule,
    pub domain: RadialDomain,
    pub members: Vec<LogCutoff>,
    /// `B = [R^{-1/2}, R^{1/2}]`, inside every plateau.
    pub window: (f64, f64),
}

impl CutoffFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn fields(&self) -> Vec<ScalarField> {
        self.members.iter().map(LogCutoff::field).collect()
    }

    /// A grid that contains every member's support with a decade of margin.
    pub fn grid(&self, per_decade: u32) -> Result<RadialGrid> {
        let hi = self.members.iter().map(|m| m.e).fold(0.0, f64::max) * 10.0;
        let hi = hi.min(self.domain.r_max);
        if self.members.iter().all(|m| m.inner.is_some()) {
            let lo = self.members.iter().map(LogCutoff::lower).fold(f64::INFINITY, f64::min) / 10.0;
            return make_grid(&self.domain, per_decade, (lo.max(self.domain.r_min), hi));
        }
        // members reach the origin: 0 followed by a geometric grid
        let start = (self.window.0 * 1e-6).max(f64::MIN_POSITIVE);
        let log = make_grid(&RadialDomain::punctured_space(), per_decade, (start, hi))?;
        let mut nodes = vec![0.0];
        nodes.extend_from_slice(log.nodes());
        RadialGrid::from_nodes(&self.domain, nodes)
    }
}

/// The standard logarithmic cutoff family on `domain`.
///
/// On domains containing the origin the members have no inner ramp. On an
/// exterior domain the inner ramps must stay inside it.
pub fn log_cutoff_family(k_max: usize, growth: f64, domain: &RadialDomain, schedule: Schedule) -> Result<CutoffFamily> {
    if k_max < 3 {
        return Err(invalid("a cutoff family needs K ≥ 3"));
    }
    if !(growth > 1.0 && growth.is_finite()) {
        return Err(invalid("cutoff growth must exceed 1"));
    }
    if !(domain.punctured || domain.is_unbounded()) {
        return Err(invalid("cutoff families need a punctured or unbounded domain"));
    }
    let with_inner = !domain.contains_origin();
    let mut members = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let ln_rk = schedule.exponent(k) * growth.ln();
        let (c, e) = (ln_rk.exp(), (2.0 * ln_rk).exp());
        let inner = if with_inner {
            let (a, b) = ((-2.0 * ln_rk).exp(), (-ln_rk).exp());
            if a <= domain.r_min {
                return Err(invalid(format!(
                    "inner ramp of member {k} starts at {a:e}, inside the excluded ball of radius {}",
                    domain.r_min
                )));
            }
            Some((a, b))
        } else {
            None
        };
        if e.is_infinite() || e > domain.r_max {
            return Err(invalid(format!("member {k} reaches beyond the domain (e_k = {e:e})")));
        }
        members.push(LogCutoff::new(inner, c, e)?);
    }
    let window = (growth.powf(-0.5), growth.sqrt());
    Ok(CutoffFamily { growth, schedule, domain: *domain, members, window })
}

/// Finite-K stand-in for `→ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConvention {
    /// Last value must be at most this fraction of the first.
    pub fraction: f64,
    /// Minimum r² of the trend fitted to `ln Q_k`.
    pub min_confidence: f64,
    /// Normalizations must stay within `[1/band, band]` of the first one.
    pub norm_band: f64,
}

impl Default for DecayConvention {
    fn default() -> Self {
        DecayConvention { fraction: 0.05, min_confidence: 0.9, norm_band: 1.1 }
    }
}

/// Trend fitted to `ln Q_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `ln Q_k` linear in `ln k`
    Power,
    /// `ln Q_k` linear in `k`
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Slope of `ln Q_k` against `ln k` or `k`, whichever fits better.
    pub exponent: f64,
    pub confidence: f64,
    pub last_over_first: f64,
    pub strictly_decreasing: bool,
    pub decays: bool,
}

impl DecayConvention {
    pub fn assess(&self, values: &[f64]) -> DecayFit {
        let n = values.len();
        let strictly_decreasing = n > 1 && values.windows(2).all(|w| w[1] < w[0]);
        let (first, last) = (values.first().copied().unwrap_or(f64::NAN), values.last().copied().unwrap_or(f64::NAN));
        let last_over_first = last / first;
        let y: Vec<f64> = values.iter().map(|v| v.abs().max(f64::MIN_POSITIVE).ln()).collect();
        let fit = |x: Vec<f64>| line_fit(&x, &y).map_or((f64::NAN, 0.0), |f| (f.coef[0], f.r_squared));
        let power = fit((1..=n).map(|k| (k as f64).ln()).collect());
        let exponential = fit((1..=n).map(|k| k as f64).collect());
        let (model, (exponent, confidence)) = if exponential.1 > power.1 {
            (DecayModel::Exponential, exponential)
        } else {
            (DecayModel::Power, power)
        };
        let decays = first > 0.0
            && last_over_first <= self.fraction
            && exponent < 0.0
            && confidence >= self.min_confidence;
        DecayFit { model, exponent, confidence, last_over_first, strictly_decreasing, decays }
    }

    /// Whether every normalization stays within the band around the first.
    pub fn norms_stable(&self, norms: &[f64]) -> bool {
        let Some(&first) = norms.first() else { return false };
        first > 0.0 && norms.iter().all(|&n| n / first <= self.norm_band && n / first >= 1.0 / self.norm_band)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceVerdict {
    NullSequence,
    NotNull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSequenceEntry {
    pub k: usize,
    /// `Q(v w_k)` from the functional.
    pub q: f64,
    /// `Q(v w_k)` from the product form.
    pub q_product: f64,
    /// `∫_B (v w_k)^p r^{d-1} dr`
    pub normalization: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSequenceReport {
    pub entries: Vec<NullSequenceEntry>,
    pub decay: DecayFit,
    pub norms_stable: bool,
    pub verdict: SequenceVerdict,
    pub diagnosis: Option<String>,
}

impl NullSequenceReport {
    pub fn q_values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.q).collect()
    }

    pub fn normalizations(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.normalization).collect()
    }
}

/// `∫_B |u|^p r^{d-1} dr` over the window `B`, without the sphere constant.
pub fn window_norm(u: &ScalarField, p: f64, d: f64, window: (f64, f64), grid: &RadialGrid, opts: &QuadOptions) -> Result<IntegralResult> {
    integrate_on(&|r: f64| u.value(r).abs().powf(p) * r.powf(d - 1.0), grid, window.0, window.1, &u.breakpoints(), opts)
}

/// Energies and normalizations of `u_k = v w_k` along the family.
pub fn verify_null_sequence(
    family: &CutoffFamily,
    v: &ScalarField,
    spec: &ProblemSpec,
    grid: &RadialGrid,
    convention: &DecayConvention,
    opts: &QuadOptions,
) -> Result<NullSequenceReport> {
    if !v.is_positive() {
        return Err(crate::Error::NotCertified("the base field must be positive".into()));
    }
    let p = spec.p();
    let d = spec.d();
    let inner = opts.with_execution(Execution::Sequential);
    let fields = family.fields();
    let entries = par::map_range(opts.execution, fields.len(), |i| -> Result<NullSequenceEntry> {
        let w = &fields[i];
        let u = v.product(w);
        let q = energy_q(&u, spec, grid, &inner)?;
        let qp = energy_q_product(v, w, spec, grid, &inner)?;
        let norm = window_norm(&u, p, d, family.window, grid, &inner)?;
        Ok(NullSequenceEntry {
            k: i + 1,
            q: q.total,
            q_product: qp.value,
            normalization: norm.value,
            error_estimate: q.error_estimate + qp.error_estimate,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let q: Vec<f64> = entries.iter().map(|e| e.q).collect();
    let norms: Vec<f64> = entries.iter().map(|e| e.normalization).collect();
    let decay = convention.assess(&q);
    let norms_stable = convention.norms_stable(&norms);
    let collapsed = norms.iter().any(|&n| !(n > 1e-300));
    let (verdict, diagnosis) = if collapsed {
        (SequenceVerdict::NotNull, Some("normalization on the window collapsed to 0".to_string()))
    } else if !norms_stable {
        (SequenceVerdict::NotNull, Some("normalization drifts across the family".to_string()))
    } else if decay.decays {
        (SequenceVerdict::NullSequence, None)
    } else {
        let why = if !(q[0] > 0.0) {
            "first energy is not positive".to_string()
        } else {
            format!(
                "energies do not decay (last/first = {:.3e}, exponent {:.3}, r² {:.3})",
                decay.last_over_first, decay.exponent, decay.confidence
            )
        };
        (SequenceVerdict::NotNull, Some(why))
    };
    Ok(NullSequenceReport { entries, decay, norms_stable, verdict, diagnosis })
}
