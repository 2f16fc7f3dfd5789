//! Pointwise Picone machinery for radial states and the scalar kernel behind
//! the simplified-energy equivalence.

use serde::{Deserialize, Serialize};

use crate::domain::Exponent;
use crate::error::{invalid, Result};
use crate::field::signed_pow;
use crate::par::{self, Execution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Values and radial derivatives of `u ≥ 0` and `v > 0` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointState {
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
}

impl PointState {
    pub fn new(u: f64, du: f64, v: f64, dv: f64) -> Result<Self> {
        if !(u >= 0.0) || !(v > 0.0) || !du.is_finite() || !dv.is_finite() || !u.is_finite() || !v.is_finite() {
            return Err(invalid(format!("invalid point state u={u}, du={du}, v={v}, dv={dv}")));
        }
        Ok(PointState { u, du, v, dv })
    }

    fn ratio(&self) -> f64 {
        self.u / self.v
    }
}

/// The Picone Lagrangian `L(u, v)`, nonnegative.
pub fn lagrangian_l(s: &PointState, p: Exponent) -> f64 {
    let p = p.get();
    let w = s.ratio();
    s.du.abs().powf(p) + (p - 1.0) * w.powf(p) * s.dv.abs().powf(p) - p * w.powf(p - 1.0) * s.du * signed_pow(s.dv, p - 1.0)
}

/// The part of `L` that only sees the magnitudes of the gradients.
pub fn lagrangian_l1(s: &PointState, p: Exponent) -> f64 {
    let p = p.get();
    let w = s.ratio();
    s.du.abs().powf(p) + (p - 1.0) * w.powf(p) * s.dv.abs().powf(p)
        - p * w.powf(p - 1.0) * s.du.abs() * s.dv.abs().powf(p - 1.0)
}

/// The angular part of `L`; zero when the gradients are aligned.
pub fn lagrangian_l2(s: &PointState, p: Exponent) -> f64 {
    let p = p.get();
    let w = s.ratio();
    p * w.powf(p - 1.0) * (s.du.abs() * s.dv.abs().powf(p - 1.0) - s.du * signed_pow(s.dv, p - 1.0))
}

/// `|∇u|^p − ∇(u^p/v^{p−1})·|∇v|^{p−2}∇v`, with the gradient expanded by the product rule.
pub fn picone_r(s: &PointState, p: Exponent) -> f64 {
    let p = p.get();
    let w = s.ratio();
    let grad_quot = p * w.powf(p - 1.0) * s.du - (p - 1.0) * w.powf(p) * s.dv;
    s.du.abs().powf(p) - grad_quot * signed_pow(s.dv, p - 1.0)
}

/// `(1+x)^α − 1 − αx`, accurate for small `|x|`.
fn pow1p_remainder(x: f64, alpha: f64) -> f64 {
    if x.abs() < 0.1 {
        // binomial series from the quadratic term
        let mut coef = alpha * (alpha - 1.0) / 2.0;
        let mut xk = x * x;
        let mut sum = 0.0;
        for k in 2..40 {
            let term = coef * xk;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            coef *= (alpha - k as f64) / (k as f64 + 1.0);
            xk *= x;
        }
        sum
    } else {
        (alpha * x.ln_1p()).exp_m1() - alpha * x
    }
}

/// `|t² + 2θt + 1|^{p/2} − 1 − pθt`.
pub fn scalar_f(t: f64, theta: f64, p: Exponent) -> f64 {
    let alpha = p.get() / 2.0;
    let x = t * (t + 2.0 * theta);
    if x >= -1.0 {
        pow1p_remainder(x, alpha) + alpha * t * t
    } else {
        (1.0 + x).abs().powf(alpha) - 1.0 - p.get() * theta * t
    }
}

/// `scalar_f(t, θ) / (t²(1+t)^{p−2})`.
pub fn ratio_g(t: f64, theta: f64, p: Exponent) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("ratio_g needs t > 0, got {t}")));
    }
    let pp = p.get();
    if t <= 1.0 {
        Ok(scalar_f(t, theta, p) / (t * t * (1.0 + t).powf(pp - 2.0)))
    } else {
        // divide through by t^p
        let inv = 1.0 / t;
        let y = inv * (2.0 * theta + inv);
        let scaled = (1.0 + y).abs().powf(pp / 2.0) - inv.powf(pp) - pp * theta * inv.powf(pp - 1.0);
        Ok(scaled / (1.0 + inv).powf(pp - 2.0))
    }
}

/// Limit of [`ratio_g`] as `t → 0`.
pub fn ratio_g_small_t_limit(theta: f64, p: Exponent) -> f64 {
    let p = p.get();
    p / 2.0 * (1.0 + (p - 2.0) * theta * theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceConstants {
    pub p: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub argmin_t: f64,
    pub argmin_theta: f64,
    pub argmax_t: f64,
    pub argmax_theta: f64,
    pub samples: usize,
}

impl EquivalenceConstants {
    pub fn contains(&self, ratio: f64, slack: f64) -> bool {
        ratio >= self.c_lower * (1.0 - slack) && ratio <= self.c_upper * (1.0 + slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    pub theta_samples: usize,
}

impl SweepGrid {
    pub fn new(t_min: f64, t_max: f64, per_decade: usize, theta_samples: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(invalid("t range must satisfy 0 < t_min < t_max"));
        }
        if (t_max / t_min).log10() < 8.0 - 1e-9 {
            return Err(invalid("t range must span at least 8 decades"));
        }
        if per_decade < 2 || theta_samples < 2 {
            return Err(invalid("sweep needs ≥ 2 samples per decade and ≥ 2 θ samples"));
        }
        Ok(SweepGrid { t_min, t_max, per_decade, theta_samples })
    }

    /// `[1e−8, 1e8]`, used by the reported baselines.
    pub fn standard() -> Self {
        SweepGrid { t_min: 1e-8, t_max: 1e8, per_decade: 100, theta_samples: 81 }
    }

    fn t_values(&self) -> Vec<f64> {
        let decades = (self.t_max / self.t_min).log10();
        let n = (decades * self.per_decade as f64).ceil() as usize;
        let mut ts: Vec<f64> = (0..=n).map(|i| self.t_min * 10f64.powf(decades * i as f64 / n as f64)).collect();
        // local refinement where f comes closest to zero
        ts.extend((0..=400).map(|i| 1.8 + 0.4 * i as f64 / 400.0));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    fn theta_values(&self) -> Vec<f64> {
        let n = self.theta_samples - 1;
        let mut th: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        th.extend((0..=100).map(|i| -1.0 + 0.1 * i as f64 / 100.0));
        th.sort_by(f64::total_cmp);
        th.dedup();
        th
    }

    /// Every `(t, θ)` pair of the sweep.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let th = self.theta_values();
        self.t_values().into_iter().flat_map(|t| th.iter().map(move |&s| (t, s))).collect()
    }
}

/// Empirical extremes of [`ratio_g`] over the sweep grid.
pub fn estimate_equivalence_constants(p: Exponent, grid: &SweepGrid, exec: Execution) -> Result<EquivalenceConstants> {
    let ts = grid.t_values();
    let th = grid.theta_values();
    type Extremes = (f64, f64, f64, f64, f64, f64);
    let rows: Vec<Result<Extremes>> = par::map(exec, &ts, |&t| {
        let mut lo = (f64::INFINITY, 0.0);
        let mut hi = (f64::NEG_INFINITY, 0.0);
        for &s in &th {
            let g = ratio_g(t, s, p)?;
            if g < lo.0 {
                lo = (g, s);
            }
            if g > hi.0 {
                hi = (g, s);
            }
        }
        Ok((lo.0, t, lo.1, hi.0, t, hi.1))
    });
    let mut out = EquivalenceConstants {
        p: p.get(),
        c_lower: f64::INFINITY,
        c_upper: f64::NEG_INFINITY,
        argmin_t: f64::NAN,
        argmin_theta: f64::NAN,
        argmax_t: f64::NAN,
        argmax_theta: f64::NAN,
        samples: ts.len() * th.len(),
    };
    for row in rows {
        let (lo, lt, ls, hi, ht, hs) = row?;
        if lo < out.c_lower {
            out.c_lower = lo;
            out.argmin_t = lt;
            out.argmin_theta = ls;
        }
        if hi > out.c_upper {
            out.c_upper = hi;
            out.argmax_t = ht;
            out.argmax_theta = hs;
        }
    }
    if !(out.c_lower > 0.0 && out.c_upper.is_finite()) {
        return Err(invalid(format!("degenerate constants {out:?}")));
    }
    Ok(out)
}

/// How [`vector_inequality_check`] treats `b = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum ZeroIncrement {
    #[default]
    Reject,
    /// Return the small-`t` limit for the supplied cosine.
    Limit { theta: f64 },
}

/// `(|a+b|^p − |a|^p − p|a|^{p−2}a·b) / (|b|²(|a|+|b|)^{p−2})`, computed through
/// its scalar reduction.
pub fn vector_inequality_check(a: &[f64], b: &[f64], p: Exponent, zero: ZeroIncrement) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(invalid("vectors must have equal nonzero length"));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 {
        return Err(invalid("a must be nonzero"));
    }
    if nb == 0.0 {
        return match zero {
            ZeroIncrement::Reject => Err(invalid("b = 0 is a removable singularity; pass a limit convention")),
            ZeroIncrement::Limit { theta } => Ok(ratio_g_small_t_limit(theta.clamp(-1.0, 1.0), p)),
        };
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let theta = (dot / (na * nb)).clamp(-1.0, 1.0);
    ratio_g(nb / na, theta, p)
}

/// Direct evaluation of the vector ratio; loses accuracy when `|b| ≪ |a|`.
pub fn vector_inequality_direct(a: &[f64], b: &[f64], p: Exponent) -> f64 {
    let p = p.get();
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let na = norm(&mut a.iter().copied());
    let nb = norm(&mut b.iter().copied());
    let nab = norm(&mut a.iter().zip(b).map(|(x, y)| x + y));
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (nab.powf(p) - na.powf(p) - p * na.powf(p - 2.0) * dot) / (nb * nb * (na + nb).powf(p - 2.0))
}

/// `α²t²(βs^{1/(p−2)} + αt)^{p−2}` for `p > 2`, nondecreasing in `s` and `t`.
pub fn comparison_kernel(s: f64, t: f64, alpha: f64, beta: f64, p: Exponent) -> Result<f64> {
    let pp = p.get();
    if pp <= 2.0 {
        return Err(invalid("comparison kernel needs p > 2"));
    }
    if !(alpha > 0.0 && beta > 0.0) || s < 0.0 || t < 0.0 {
        return Err(invalid("comparison kernel needs α, β > 0 and s, t ≥ 0"));
    }
    Ok(alpha * alpha * t * t * (beta * s.powf(1.0 / (pp - 2.0)) + alpha * t).powf(pp - 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentitySweep {
    pub p: f64,
    pub samples: usize,
    /// Largest `|R − L| / (1 + |L|)`.
    pub max_defect: f64,
    /// Largest `|L₁ + L₂ − L| / (1 + |L|)`.
    pub max_split_defect: f64,
    pub min_l1: f64,
    pub min_l2: f64,
}

/// Seeded random states: the identity `R = L` and the split `L = L₁ + L₂`
/// with both parts nonnegative. States are drawn in chunks whose seeds derive
/// from `seed`, so the result does not depend on the execution mode.
pub fn identity_sweep(p: Exponent, samples: usize, seed: u64, exec: Execution) -> IdentitySweep {
    const CHUNK: usize = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let parts = par::map_range(exec, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let n = CHUNK.min(samples - c * CHUNK);
        let mut acc = [0.0f64, 0.0, f64::INFINITY, f64::INFINITY];
        for _ in 0..n {
            let s = PointState {
                u: 10f64.powf(rng.gen_range(-3.0..1.0)),
                du: rng.gen_range(-5.0..5.0),
                v: 10f64.powf(rng.gen_range(-3.0..1.0)),
                dv: rng.gen_range(-5.0..5.0),
            };
            let l = lagrangian_l(&s, p);
            let (l1, l2) = (lagrangian_l1(&s, p), lagrangian_l2(&s, p));
            let scale = 1.0 + l.abs();
            acc[0] = acc[0].max((picone_r(&s, p) - l).abs() / scale);
            acc[1] = acc[1].max((l1 + l2 - l).abs() / scale);
            acc[2] = acc[2].min(l1 / scale);
            acc[3] = acc[3].min(l2 / scale);
        }
        acc
    });
    let fold = parts.iter().fold([0.0f64, 0.0, f64::INFINITY, f64::INFINITY], |m, a| {
        [m[0].max(a[0]), m[1].max(a[1]), m[2].min(a[2]), m[3].min(a[3])]
    });
    IdentitySweep { p: p.get(), samples, max_defect: fold[0], max_split_defect: fold[1], min_l1: fold[2], min_l2: fold[3] }
}
