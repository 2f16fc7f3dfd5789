//! Core types shared by every module: exponents, dimensions, radial domains,
//! graded grids, potentials and problem specifications.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{radial_p_laplacian, ScalarField};

/// The exponent `p` of the functional, strictly greater than one.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(Exponent(p))
        } else {
            Err(invalid(format!("exponent p must be finite and > 1, got {p}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_super_quadratic(self) -> bool {
        self.0 > 2.0
    }

    pub fn is_sub_quadratic(self) -> bool {
        self.0 < 2.0
    }

    pub fn is_quadratic(self) -> bool {
        self.0 == 2.0
    }

    /// Hölder conjugate `p/(p-1)`.
    pub fn conjugate(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(p: Exponent) -> f64 {
        p.0
    }
}

/// Space dimension `d ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d >= 1 {
            Ok(Dimension(d))
        } else {
            Err(invalid("dimension must be at least 1"))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, n = 9).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Surface measure `C_d = d π^{d/2} / Γ(d/2 + 1)` of the unit sphere in `ℝ^d`.
pub fn sphere_constant(d: Dimension) -> f64 {
    let d = d.as_f64();
    d * PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0)
}

/// A radial domain `{ r_min < |x| < r_max }`; `punctured` marks that `r = 0`
/// is excluded even though `r_min = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialDomain {
    pub r_min: f64,
    #[serde(with = "infinite_as_null")]
    pub r_max: f64,
    #[serde(default)]
    pub punctured: bool,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl RadialDomain {
    pub fn new(r_min: f64, r_max: f64, punctured: bool) -> Result<Self> {
        if !(r_min >= 0.0) || !(r_min < r_max) || r_max.is_nan() {
            return Err(Error::EmptyInterval { lo: r_min, hi: r_max });
        }
        if punctured && r_min != 0.0 {
            return Err(invalid("only a domain with r_min = 0 can be punctured"));
        }
        Ok(RadialDomain { r_min, r_max, punctured })
    }

    /// `ℝ^d \ {0}`.
    pub fn punctured_space() -> Self {
        RadialDomain { r_min: 0.0, r_max: f64::INFINITY, punctured: true }
    }

    /// All of `ℝ^d`; the origin is an interior point.
    pub fn whole_space() -> Self {
        RadialDomain { r_min: 0.0, r_max: f64::INFINITY, punctured: false }
    }

    pub fn exterior(r_min: f64) -> Result<Self> {
        RadialDomain::new(r_min, f64::INFINITY, false)
    }

    pub fn is_unbounded(&self) -> bool {
        self.r_max.is_infinite()
    }

    /// True when the origin belongs to the domain, i.e. the radial problem
    /// has no inner boundary.
    pub fn contains_origin(&self) -> bool {
        self.r_min == 0.0 && !self.punctured
    }

    /// Interior membership.
    pub fn contains(&self, r: f64) -> bool {
        r > self.r_min && r < self.r_max
    }

    fn check_bounds(&self, lo: f64, hi: f64) -> Result<()> {
        if !(lo < hi) {
            return Err(Error::EmptyInterval { lo, hi });
        }
        let lo_ok = lo > self.r_min || (lo == self.r_min && !self.punctured);
        if !lo_ok || hi > self.r_max {
            return Err(Error::OutOfDomain {
                r: if lo_ok { hi } else { lo },
                r_min: self.r_min,
                r_max: self.r_max,
            });
        }
        Ok(())
    }
}

/// How a grid spaces its nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    /// Geometric spacing with the given number of nodes per decade.
    Log { per_decade: u32 },
    /// Equal spacing with the given number of intervals.
    Uniform { intervals: u32 },
}

/// A strictly increasing set of nodes inside a radial domain.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: Grading,
    domain: RadialDomain,
}

/// Build a graded grid over `bounds`: geometric when the domain is punctured
/// or unbounded, uniform otherwise.
pub fn make_grid(domain: &RadialDomain, density: u32, bounds: (f64, f64)) -> Result<RadialGrid> {
    if density < 2 {
        return Err(invalid("grid density must be at least 2"));
    }
    let (lo, hi) = bounds;
    domain.check_bounds(lo, hi)?;
    let log_spaced = (domain.punctured || domain.is_unbounded()) && lo > 0.0;
    let nodes = if log_spaced {
        let decades = (hi / lo).log10();
        let n = ((density as f64 * decades).ceil() as usize).max(1);
        let ratio_ln = (hi / lo).ln();
        let mut nodes: Vec<f64> =
            (0..=n).map(|i| lo * (ratio_ln * i as f64 / n as f64).exp()).collect();
        nodes[0] = lo;
        nodes[n] = hi;
        nodes
    } else {
        let decades = if lo > 0.0 { (hi / lo).log10() } else { 1.0 };
        let n = ((density as f64 * decades).ceil() as usize).max(density as usize);
        let mut nodes: Vec<f64> =
            (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        nodes[n] = hi;
        nodes
    };
    let grading = if log_spaced {
        Grading::Log { per_decade: density }
    } else {
        Grading::Uniform { intervals: (nodes.len() - 1) as u32 }
    };
    Ok(RadialGrid { nodes, grading, domain: *domain })
}

impl RadialGrid {
    /// Grid from explicit nodes; they must be strictly increasing and lie in the domain.
    pub fn from_nodes(domain: &RadialDomain, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("a grid needs at least two nodes"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("grid nodes must be strictly increasing"));
        }
        domain.check_bounds(nodes[0], nodes[nodes.len() - 1])?;
        let intervals = (nodes.len() - 1) as u32;
        Ok(RadialGrid { nodes, grading: Grading::Uniform { intervals }, domain: *domain })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn domain(&self) -> &RadialDomain {
        &self.domain
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same bounds, each interval split into `factor` equal pieces.
    pub fn refined(&self, factor: u32) -> RadialGrid {
        let factor = factor.max(1) as usize;
        let mut nodes = Vec::with_capacity((self.nodes.len() - 1) * factor + 1);
        for w in self.nodes.windows(2) {
            for j in 0..factor {
                let s = j as f64 / factor as f64;
                nodes.push(match self.grading {
                    Grading::Log { .. } => w[0] * (w[1] / w[0]).powf(s),
                    Grading::Uniform { .. } => w[0] + (w[1] - w[0]) * s,
                });
            }
        }
        nodes.push(self.hi());
        let grading = match self.grading {
            Grading::Log { per_decade } => Grading::Log { per_decade: per_decade * factor as u32 },
            Grading::Uniform { intervals } => Grading::Uniform { intervals: intervals * factor as u32 },
        };
        RadialGrid { nodes, grading, domain: self.domain }
    }

    /// Panel endpoints covering `[lo, hi]`: the grid nodes strictly inside,
    /// the extra breakpoints strictly inside, and both ends.
    pub fn panels_within(&self, lo: f64, hi: f64, breakpoints: &[f64]) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .nodes
            .iter()
            .chain(breakpoints)
            .copied()
            .filter(|&x| x > lo && x < hi)
            .collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
        pts
    }
}

/// Behaviour of a potential at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Singularity {
    None,
    /// `V ~ r^{-s}` as `r → 0`.
    Power(f64),
}

/// Radial potential `V(r)`.
#[derive(Debug, Clone)]
pub enum Potential {
    Zero,
    Constant(f64),
    /// `coef · r^{-s}`
    Power { coef: f64, s: f64 },
    /// Potential for which `(α + r^{p/(p-1)})^{-(d-p)(p-1)/p²}` solves the equation.
    WAlpha { p: f64, d: f64, alpha: f64 },
    /// Piecewise-linear interpolation of tabulated values.
    Sampled { r: Vec<f64>, v: Vec<f64> },
    /// `V = Δ_p ψ / ψ^{p-1}`, which makes the positive field `ψ` a solution.
    FromSolution { field: ScalarField, p: f64, d: f64 },
    Sum(Vec<Potential>),
}

impl Potential {
    /// The Hardy potential `-c*_{p,d} r^{-p}`.
    pub fn hardy(p: f64, d: f64) -> Self {
        Potential::Power { coef: -((p - d) / p).abs().powf(p), s: p }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(c) => *c,
            Potential::Power { coef, s } => coef * r.powf(-s),
            Potential::WAlpha { p, d, alpha } => {
                let q = p / (p - 1.0);
                let rq = r.powf(q);
                -((d - p) / p).powf(*p) * (alpha * d * p / (d - p) + rq) / (alpha + rq).powf(*p)
            }
            Potential::Sampled { r: rs, v } => interpolate_linear(rs, v, r),
            Potential::FromSolution { field, p, d } => {
                // the origin of a whole-space domain: take the limit from the right
                let r = if r == 0.0 { 1e-150 } else { r };
                let jet = field.jet(r);
                radial_p_laplacian(jet, r, *p, *d) / jet.value.powf(p - 1.0)
            }
            Potential::Sum(parts) => parts.iter().map(|v| v.value(r)).sum(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Zero => true,
            Potential::Constant(c) => *c == 0.0,
            Potential::Power { coef, .. } => *coef == 0.0,
            Potential::Sum(parts) => parts.iter().all(Potential::is_zero),
            _ => false,
        }
    }

    pub fn singularity(&self) -> Singularity {
        match self {
            Potential::Power { coef, s } if *coef != 0.0 && *s > 0.0 => Singularity::Power(*s),
            Potential::WAlpha { p, alpha, .. } if *alpha == 0.0 => Singularity::Power(*p),
            Potential::Sum(parts) => parts.iter().fold(Singularity::None, |acc, v| {
                match (acc, v.singularity()) {
                    (Singularity::Power(a), Singularity::Power(b)) => Singularity::Power(a.max(b)),
                    (Singularity::None, s) | (s, Singularity::None) => s,
                }
            }),
            _ => Singularity::None,
        }
    }

    /// Checks that `V` is finite at every interior node of the grid.
    pub fn check_finite_on(&self, grid: &RadialGrid) -> Result<()> {
        for &r in grid.nodes() {
            if r == 0.0 {
                continue;
            }
            let v = self.value(r);
            if !v.is_finite() {
                return Err(Error::NonFinite { r, value: v });
            }
        }
        Ok(())
    }
}

fn interpolate_linear(rs: &[f64], vs: &[f64], r: f64) -> f64 {
    if rs.is_empty() || r < rs[0] || r > rs[rs.len() - 1] {
        return f64::NAN;
    }
    let i = rs.partition_point(|&x| x <= r).clamp(1, rs.len() - 1);
    let (r0, r1) = (rs[i - 1], rs[i]);
    let s = (r - r0) / (r1 - r0);
    vs[i - 1] * (1.0 - s) + vs[i] * s
}

/// A functional `Q(u) = ∫ (|∇u|^p + V|u|^p) dx` on a radial domain.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub exponent: Exponent,
    pub dimension: Dimension,
    pub domain: RadialDomain,
    pub potential: Potential,
}

impl ProblemSpec {
    pub fn new(
        exponent: Exponent,
        dimension: Dimension,
        domain: RadialDomain,
        potential: Potential,
    ) -> Result<Self> {
        if let Singularity::Power(s) = potential.singularity() {
            if domain.contains_origin() {
                return Err(invalid(format!(
                    "potential ~ r^-{s} is singular at the origin; the domain must be punctured or have r_min > 0"
                )));
            }
        }
        Ok(ProblemSpec { exponent, dimension, domain, potential })
    }

    pub fn p(&self) -> f64 {
        self.exponent.get()
    }

    pub fn d(&self) -> f64 {
        self.dimension.as_f64()
    }

    pub fn sphere_constant(&self) -> f64 {
        sphere_constant(self.dimension)
    }

    /// Same problem with a different potential.
    pub fn with_potential(&self, potential: Potential) -> Result<Self> {
        ProblemSpec::new(self.exponent, self.dimension, self.domain, potential)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_flags_are_exclusive() {
        for p in [1.1, 1.5, 2.0, 2.5, 4.0] {
            let e = Exponent::new(p).unwrap();
            let flags = [e.is_sub_quadratic(), e.is_quadratic(), e.is_super_quadratic()];
            assert_eq!(flags.iter().filter(|f| **f).count(), 1, "p = {p}");
        }
        assert!(Exponent::new(1.0).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Dimension::new(0).is_err());
    }

    #[test]
    fn sphere_constants() {
        let c = |d| sphere_constant(Dimension::new(d).unwrap());
        assert!((c(1) - 2.0).abs() < 1e-13);
        assert!((c(2) - 2.0 * PI).abs() < 1e-12);
        assert!((c(3) - 4.0 * PI).abs() < 1e-12);
        // 2π² and 8π²/3
        assert!((c(4) / (2.0 * PI * PI) - 1.0).abs() < 1e-12);
        assert!((c(5) / (8.0 * PI * PI / 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_matches_factorials() {
        let mut fact = 1.0;
        for n in 1..15 {
            assert!((gamma(n as f64) / fact - 1.0).abs() < 1e-13, "n = {n}");
            fact *= n as f64;
        }
        assert!((gamma(0.5) / PI.sqrt() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn log_grid_density() {
        let g = make_grid(&RadialDomain::punctured_space(), 10, (1e-3, 1e3)).unwrap();
        assert!(g.len() >= 61);
        assert_eq!(g.grading(), Grading::Log { per_decade: 10 });
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.lo(), 1e-3);
        assert_eq!(g.hi(), 1e3);
    }

    #[test]
    fn bounded_grid_stays_inside_bounds() {
        let dom = RadialDomain::new(0.0, 1.0, false).unwrap();
        let g = make_grid(&dom, 4, (0.1, 0.9)).unwrap();
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes().iter().all(|&r| (0.1..=0.9).contains(&r)));
    }

    #[test]
    fn bad_grids_are_rejected() {
        let dom = RadialDomain::punctured_space();
        assert!(matches!(make_grid(&dom, 10, (2.0, 1.0)), Err(Error::EmptyInterval { .. })));
        assert!(make_grid(&dom, 1, (1.0, 2.0)).is_err());
        assert!(make_grid(&dom, 4, (0.0, 2.0)).is_err());
        let bounded = RadialDomain::new(0.0, 1.0, false).unwrap();
        assert!(matches!(make_grid(&bounded, 4, (0.5, 2.0)), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn refinement_keeps_bounds_and_order() {
        let g = make_grid(&RadialDomain::punctured_space(), 4, (1e-2, 1e2)).unwrap();
        let f = g.refined(2);
        assert_eq!(f.len(), 2 * (g.len() - 1) + 1);
        assert_eq!((f.lo(), f.hi()), (g.lo(), g.hi()));
        assert!(f.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes().iter().all(|x| f.nodes().iter().any(|y| (x - y).abs() < 1e-12 * x)));
    }

    #[test]
    fn singular_potential_needs_punctured_domain() {
        let p = Exponent::new(2.0).unwrap();
        let d = Dimension::new(3).unwrap();
        let hardy = Potential::hardy(2.0, 3.0);
        assert!(ProblemSpec::new(p, d, RadialDomain::whole_space(), hardy.clone()).is_err());
        assert!(ProblemSpec::new(p, d, RadialDomain::punctured_space(), hardy.clone()).is_ok());
        assert!(ProblemSpec::new(p, d, RadialDomain::exterior(1.0).unwrap(), hardy).is_ok());
        assert!((Potential::hardy(2.0, 3.0).value(1.0) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn w_alpha_reduces_to_hardy_at_zero_alpha() {
        let w = Potential::WAlpha { p: 2.5, d: 3.0, alpha: 0.0 };
        let h = Potential::hardy(2.5, 3.0);
        for r in [0.1, 1.0, 7.0] {
            assert!((w.value(r) / h.value(r) - 1.0).abs() < 1e-12);
        }
    }
}
