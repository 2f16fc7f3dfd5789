//! Closed-form solution and supersolution families, and residual checks that
//! certify their status numerically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Dimension, Exponent, Potential, ProblemSpec, RadialDomain, RadialGrid};
use crate::error::{invalid, Error, Result};
use crate::field::{abs_pow_pm2, radial_p_laplacian, signed_pow, ScalarField};
use crate::nullseq::{make_eta_phi, make_oscillatory_psi, Blend};
use crate::par::{self, Execution};
use crate::quad::{integrate_on, QuadOptions};

/// `|(p−d)/p|^p`.
pub fn hardy_constant(p: f64, d: f64) -> Result<f64> {
    if p == d {
        return Err(invalid("the Hardy constant degenerates for p = d"));
    }
    Ok(((p - d) / p).abs().powf(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Solution,
    Supersolution,
    Subsolution,
    GroundState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Constant,
    HardyPhi,
    MpSupersol,
    PsiAlpha,
    EtaPhi,
    OscillatoryPsi,
}

impl FamilyKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "constant" => FamilyKind::Constant,
            "hardy_phi" => FamilyKind::HardyPhi,
            "mp_supersol" => FamilyKind::MpSupersol,
            "psi_alpha" => FamilyKind::PsiAlpha,
            "eta_phi" => FamilyKind::EtaPhi,
            "oscillatory_psi" => FamilyKind::OscillatoryPsi,
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Constant => "constant",
            FamilyKind::HardyPhi => "hardy_phi",
            FamilyKind::MpSupersol => "mp_supersol",
            FamilyKind::PsiAlpha => "psi_alpha",
            FamilyKind::EtaPhi => "eta_phi",
            FamilyKind::OscillatoryPsi => "oscillatory_psi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub p: f64,
    pub d: u32,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Value of the constant family (default 1).
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub blend: Option<Blend>,
}

impl FamilyParams {
    pub fn new(p: f64, d: u32) -> Self {
        FamilyParams { p, d, alpha: None, beta: None, gamma: None, value: None, blend: None }
    }

    pub fn alpha(mut self, a: f64) -> Self {
        self.alpha = Some(a);
        self
    }

    pub fn beta(mut self, b: f64) -> Self {
        self.beta = Some(b);
        self
    }

    pub fn gamma(mut self, g: f64) -> Self {
        self.gamma = Some(g);
        self
    }
}

/// A named radial field together with the problem it is claimed to solve.
#[derive(Debug, Clone)]
pub struct NamedFamily {
    pub kind: FamilyKind,
    pub params: FamilyParams,
    pub field: ScalarField,
    pub potential: Potential,
    pub domain: RadialDomain,
    pub claimed_status: Status,
}

impl NamedFamily {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(Exponent::new(self.params.p)?, Dimension::new(self.params.d)?, self.domain, self.potential.clone())
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(msg))
    }
}

pub fn make_family(name: &str, params: &FamilyParams) -> Result<NamedFamily> {
    let kind = FamilyKind::parse(name)?;
    let p = Exponent::new(params.p)?.get();
    let d = Dimension::new(params.d)?.as_f64();
    let q = p / (p - 1.0);
    let (field, potential, domain, status) = match kind {
        FamilyKind::Constant => {
            let c = params.value.unwrap_or(1.0);
            require(c > 0.0, "constant family needs a positive value")?;
            (ScalarField::constant(c), Potential::Zero, RadialDomain::whole_space(), Status::Solution)
        }
        FamilyKind::HardyPhi => {
            require(p != d, "hardy_phi needs p ≠ d")?;
            (ScalarField::power(1.0, (p - d) / p), Potential::hardy(p, d), RadialDomain::punctured_space(), Status::Solution)
        }
        FamilyKind::MpSupersol => {
            require(d > p, "mp_supersol needs d > p")?;
            (ScalarField::shifted_power(1.0, q, (p - d) / p), Potential::Zero, RadialDomain::whole_space(), Status::Supersolution)
        }
        FamilyKind::PsiAlpha => {
            let alpha = params.alpha.unwrap_or(0.0);
            require(p < d, "psi_alpha needs 1 < p < d")?;
            require(params.d >= 2, "psi_alpha needs d ≥ 2")?;
            require(alpha >= 0.0 && alpha.is_finite(), "psi_alpha needs α ≥ 0")?;
            let kappa = -(d - p) * (p - 1.0) / (p * p);
            (
                ScalarField::shifted_power(alpha, q, kappa),
                Potential::WAlpha { p, d, alpha },
                RadialDomain::punctured_space(),
                Status::Solution,
            )
        }
        FamilyKind::EtaPhi => {
            let gamma = params.gamma.ok_or_else(|| invalid("eta_phi needs γ"))?;
            let (field, r0) = make_eta_phi(gamma, p, d)?;
            let potential = Potential::FromSolution { field: field.clone(), p, d };
            (field, potential, RadialDomain::exterior(r0)?, Status::Solution)
        }
        FamilyKind::OscillatoryPsi => {
            let beta = params.beta.ok_or_else(|| invalid("oscillatory_psi needs β"))?;
            let field = make_oscillatory_psi(beta, p, d, params.blend.unwrap_or_default())?;
            let potential = Potential::FromSolution { field: field.clone(), p, d };
            (field, potential, RadialDomain::new(1.0, f64::INFINITY, false)?, Status::Solution)
        }
    };
    Ok(NamedFamily { kind, params: *params, field, potential, domain, claimed_status: status })
}

/// Terms of the radial equation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongResidual {
    pub r: f64,
    /// `−|v'|^{p−2}[(p−1)v'' + (d−1)v'/r] + V|v|^{p−2}v`
    pub residual: f64,
    /// Largest magnitude among the individual terms.
    pub scale: f64,
}

impl StrongResidual {
    pub fn relative(&self) -> f64 {
        if self.residual == 0.0 {
            0.0
        } else {
            self.residual / self.scale
        }
    }
}

/// Pointwise residual of the radial Euler–Lagrange equation.
pub fn radial_residual_strong(v: &ScalarField, spec: &ProblemSpec, r: f64) -> Result<StrongResidual> {
    let dom = spec.domain;
    if !(dom.contains(r) || (r == dom.r_min && !dom.punctured && r > 0.0)) {
        return Err(Error::OutOfDomain { r, r_min: dom.r_min, r_max: dom.r_max });
    }
    let (p, d) = (spec.p(), spec.d());
    let jet = v.jet(r);
    let lap = radial_p_laplacian(jet, r, p, d);
    let pot = spec.potential.value(r) * signed_pow(jet.value, p - 1.0);
    let w = abs_pow_pm2(jet.d1, p);
    let t1 = if jet.d2 == 0.0 { 0.0 } else { w * (p - 1.0) * jet.d2 };
    let t2 = if jet.d1 == 0.0 { 0.0 } else { w * (d - 1.0) * jet.d1 / r };
    Ok(StrongResidual { r, residual: -lap + pot, scale: t1.abs().max(t2.abs()).max(pot.abs()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualVerdict {
    Solution,
    Supersolution,
    Subsolution,
    Neither,
}

impl ResidualVerdict {
    /// Whether this verdict supports the claimed status.
    pub fn supports(self, claim: Status) -> bool {
        match claim {
            Status::Solution | Status::GroundState => self == ResidualVerdict::Solution,
            Status::Supersolution => matches!(self, ResidualVerdict::Solution | ResidualVerdict::Supersolution),
            Status::Subsolution => matches!(self, ResidualVerdict::Solution | ResidualVerdict::Subsolution),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub mode: ResidualMode,
    /// Radii (strong) or bump centers (weak).
    pub points: Vec<f64>,
    /// Relative residuals.
    pub values: Vec<f64>,
    pub max_abs: f64,
    pub tolerance: f64,
    pub verdict: ResidualVerdict,
}

fn verdict_for(values: &[f64], tol: f64) -> ResidualVerdict {
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs <= tol {
        ResidualVerdict::Solution
    } else if values.iter().all(|&v| v >= -tol) {
        ResidualVerdict::Supersolution
    } else if values.iter().all(|&v| v <= tol) {
        ResidualVerdict::Subsolution
    } else {
        ResidualVerdict::Neither
    }
}

impl ResidualReport {
    fn new(mode: ResidualMode, points: Vec<f64>, values: Vec<f64>, tolerance: f64) -> Self {
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let verdict = verdict_for(&values, tolerance);
        ResidualReport { mode, points, values, max_abs, tolerance, verdict }
    }
}

/// Strong residuals at the given radii, relative to the local term scale.
pub fn strong_residual_report(v: &ScalarField, spec: &ProblemSpec, radii: &[f64], tol: f64, exec: Execution) -> Result<ResidualReport> {
    let res = par::map(exec, radii, |&r| radial_residual_strong(v, spec, r).map(|s| s.relative()));
    let values = res.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::new(ResidualMode::Strong, radii.to_vec(), values, tol))
}

/// A smooth test function `(1 − ((r−c)/h)²)³` on `[c−h, c+h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestBump {
    pub center: f64,
    pub half_width: f64,
}

impl TestBump {
    pub fn field(&self) -> Result<ScalarField> {
        ScalarField::bump(self.center, self.half_width)
    }
}

/// Bumps with log-uniform centers inside `[lo, hi]`, fully supported there.
pub fn random_bumps(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<TestBump>> {
    if !(lo > 0.0 && hi > lo * 1.5) {
        return Err(invalid("bump range needs 0 < lo and hi > 1.5 lo"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = ((lo * 1.2).ln(), (hi / 1.2).ln());
    Ok((0..n)
        .map(|_| {
            let c = rng.gen_range(a..b).exp();
            let room = (c - lo).min(hi - c);
            let h = room * rng.gen_range(0.2..1.0);
            TestBump { center: c, half_width: h }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub value: f64,
    /// `∫ (|v'|^{p−1}|b'| + |V||v|^{p−1}b)`, the size of the pairing's parts.
    pub scale: f64,
    pub error_estimate: f64,
}

impl WeakResidual {
    pub fn relative(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.value / self.scale
        }
    }
}

/// `∫ (|v'|^{p−2}v' b' + V|v|^{p−2}v b) dx` against a bump.
pub fn weak_residual(v: &ScalarField, spec: &ProblemSpec, bump: &TestBump, grid: &RadialGrid, opts: &QuadOptions) -> Result<WeakResidual> {
    let b = bump.field()?;
    let (lo, hi) = b.support().expect("bumps have compact support");
    if lo < grid.lo() || hi > grid.hi() {
        return Err(Error::SupportLeak { support_lo: lo, support_hi: hi, grid_lo: grid.lo(), grid_hi: grid.hi() });
    }
    let (p, d, cd) = (spec.p(), spec.d(), spec.sphere_constant());
    let mut bp = b.breakpoints();
    bp.extend(v.breakpoints());
    let pair = |r: f64| {
        let jv = v.jet(r);
        let jb = b.jet(r);
        let wr = cd * r.powf(d - 1.0);
        let flux = signed_pow(jv.d1, p - 1.0) * jb.d1;
        let pot = spec.potential.value(r) * signed_pow(jv.value, p - 1.0) * jb.value;
        (flux * wr, pot * wr)
    };
    let grad = integrate_on(&|r| pair(r).0, grid, lo, hi, &bp, opts)?;
    let pot = integrate_on(&|r| pair(r).1, grid, lo, hi, &bp, opts)?;
    let scale = integrate_on(&|r| { let (a, b) = pair(r); a.abs() + b.abs() }, grid, lo, hi, &bp, opts)?;
    Ok(WeakResidual {
        value: grad.value + pot.value,
        scale: scale.value,
        error_estimate: grad.error_estimate + pot.error_estimate,
    })
}

pub fn weak_residual_report(
    v: &ScalarField,
    spec: &ProblemSpec,
    bumps: &[TestBump],
    grid: &RadialGrid,
    tol: f64,
    opts: &QuadOptions,
) -> Result<ResidualReport> {
    let inner = opts.with_execution(Execution::Sequential);
    let res = par::map(opts.execution, bumps, |b| weak_residual(v, spec, b, grid, &inner).map(|w| w.relative()));
    let values = res.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::new(ResidualMode::Weak, bumps.iter().map(|b| b.center).collect(), values, tol))
}

/// `max(v, 0)`, with zero crossings located on `grid` when given.
pub fn positive_part(v: &ScalarField, grid: Option<&RadialGrid>) -> ScalarField {
    match grid {
        Some(g) => v.positive_part_on(g),
        None => v.positive_part(),
    }
}

/// `n` radii log-spaced over `[lo, hi]`.
pub fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n.max(2) - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_constants() {
        assert!((hardy_constant(2.0, 3.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((hardy_constant(3.0, 5.0).unwrap() - 8.0 / 27.0).abs() < 1e-15);
        assert!((hardy_constant(2.0, 4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(hardy_constant(3.0, 3.0).is_err());
    }

    #[test]
    fn hardy_family_matches_formula() {
        let f = make_family("hardy_phi", &FamilyParams::new(2.0, 3)).unwrap();
        assert!((f.field.value(4.0) - 0.5).abs() < 1e-15);
        assert!((f.potential.value(2.0) + 0.25 / 4.0).abs() < 1e-15);
        let spec = f.spec().unwrap();
        for r in [0.1, 1.0, 10.0] {
            assert!(radial_residual_strong(&f.field, &spec, r).unwrap().residual.abs() <= 1e-10);
        }
    }

    #[test]
    fn perturbed_potential_is_detected() {
        let f = make_family("hardy_phi", &FamilyParams::new(2.0, 3)).unwrap();
        let spec = f.spec().unwrap().with_potential(Potential::Power { coef: -0.25 * 1.01, s: 2.0 }).unwrap();
        assert!(radial_residual_strong(&f.field, &spec, 1.0).unwrap().residual.abs() > 1e-3);
    }

    #[test]
    fn psi_alpha_residual_and_limit() {
        let f = make_family("psi_alpha", &FamilyParams::new(2.0, 3).alpha(1.0)).unwrap();
        let spec = f.spec().unwrap();
        for r in [0.5, 2.0] {
            assert!(radial_residual_strong(&f.field, &spec, r).unwrap().residual.abs() <= 1e-8);
        }
        let h = make_family("hardy_phi", &FamilyParams::new(3.0, 5)).unwrap();
        let z = make_family("psi_alpha", &FamilyParams::new(3.0, 5).alpha(0.0)).unwrap();
        for r in [0.3, 1.0, 7.0] {
            assert!((h.field.value(r) / z.field.value(r) - 1.0).abs() < 1e-12);
            assert!((h.potential.value(r) / z.potential.value(r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn family_errors() {
        assert!(matches!(make_family("nope", &FamilyParams::new(2.0, 3)), Err(Error::UnknownFamily(_))));
        assert!(make_family("psi_alpha", &FamilyParams::new(3.0, 2)).is_err());
        assert!(make_family("psi_alpha", &FamilyParams::new(2.0, 3).alpha(-1.0)).is_err());
        assert!(make_family("mp_supersol", &FamilyParams::new(3.0, 3)).is_err());
        assert!(make_family("hardy_phi", &FamilyParams::new(3.0, 3)).is_err());
    }

    #[test]
    fn constant_family_is_flat() {
        let f = make_family("constant", &FamilyParams::new(1.7, 4)).unwrap();
        assert_eq!(f.field.derivative(3.0), 0.0);
        let spec = f.spec().unwrap();
        assert_eq!(radial_residual_strong(&f.field, &spec, 2.0).unwrap().relative(), 0.0);
    }

    #[test]
    fn strong_residual_outside_domain() {
        let f = make_family("hardy_phi", &FamilyParams::new(2.0, 3)).unwrap();
        assert!(matches!(radial_residual_strong(&f.field, &f.spec().unwrap(), 0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict_for(&[1e-12, -1e-12], 1e-8), ResidualVerdict::Solution);
        assert_eq!(verdict_for(&[1e-3, 0.0], 1e-8), ResidualVerdict::Supersolution);
        assert_eq!(verdict_for(&[-1e-3, 0.0], 1e-8), ResidualVerdict::Subsolution);
        assert_eq!(verdict_for(&[-1e-3, 1e-3], 1e-8), ResidualVerdict::Neither);
        assert!(ResidualVerdict::Solution.supports(Status::Supersolution));
        assert!(!ResidualVerdict::Subsolution.supports(Status::Solution));
    }

    #[test]
    fn bumps_are_reproducible_and_inside() {
        let a = random_bumps(10, 0.5, 50.0, 3).unwrap();
        assert_eq!(a, random_bumps(10, 0.5, 50.0, 3).unwrap());
        for b in &a {
            assert!(b.center - b.half_width >= 0.5 && b.center + b.half_width <= 50.0);
        }
    }
}
