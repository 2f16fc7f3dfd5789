//! One struct per subcommand; `run` loads inputs, calls the core and shapes
//! the report.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use gslab_core::domain::{make_grid, Exponent, ProblemSpec, RadialDomain, RadialGrid};
use gslab_core::energy::{equivalence_report, EquivalenceMode};
use gslab_core::field::ScalarField;
use gslab_core::io::{parse_field, parse_problem, LoadedField};
use gslab_core::linearized::{transfer_a_to_q, transfer_q_to_a, QuadraticFormSpec};
use gslab_core::nullseq::{
    classify, log_cutoff_family, transfer_null_sequence, verify_null_sequence, Blend, ClassifyOptions, CutoffFamily,
    DecayConvention, GroundStateVerdict, Schedule, SequenceVerdict, TransferVerdict,
};
use gslab_core::par::Execution;
use gslab_core::picone::{estimate_equivalence_constants, identity_sweep, scalar_f, SweepGrid};
use gslab_core::quad::{Convergence, QuadOptions};
use gslab_core::solutions::{
    log_radii, make_family, random_bumps, strong_residual_report, weak_residual_report, FamilyParams, ResidualMode,
};

use crate::error::{CliError, Result};
use crate::manifest::{num, RunManifest, Table};
use crate::{Body, Common, Outcome};

fn fields(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(map) => map,
        other => Map::from_iter([("result".to_string(), other)]),
    }
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input { path: path.to_path_buf(), message: e.to_string() }
}

fn load_field(m: &mut RunManifest, path: &Path) -> Result<LoadedField> {
    let text = m.read_input(path)?;
    let spec = parse_field(&text).map_err(|e| input_error(path, e))?;
    spec.build().map_err(|e| input_error(path, e))
}

fn load_problem(m: &mut RunManifest, path: &Path) -> Result<ProblemSpec> {
    let text = m.read_input(path)?;
    let file = parse_problem(&text).map_err(|e| input_error(path, e))?;
    file.build().map_err(|e| input_error(path, e))
}

fn parse_exponents(list: &str) -> Result<Vec<Exponent>> {
    list.split(',')
        .map(|s| {
            let p: f64 = s.trim().parse().map_err(|_| CliError::Usage(format!("not a number in --p: `{s}`")))?;
            Ok(Exponent::new(p)?)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleArg {
    Triangular,
    Geometric,
}

impl From<ScheduleArg> for Schedule {
    fn from(s: ScheduleArg) -> Self {
        match s {
            ScheduleArg::Triangular => Schedule::Triangular,
            ScheduleArg::Geometric => Schedule::Geometric,
        }
    }
}

/// Flags that build a logarithmic cutoff family.
#[derive(Debug, Clone, Args, Serialize)]
pub struct CutoffArgs {
    /// Number of cutoffs.
    #[arg(long = "K", visible_alias = "k", default_value_t = 8)]
    pub k: usize,
    /// Base growth factor of the plateau radii.
    #[arg(long, default_value_t = 4.0)]
    pub growth: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Triangular)]
    pub schedule: ScheduleArg,
    /// Grid nodes per decade.
    #[arg(long, default_value_t = 8)]
    pub density: u32,
}

impl CutoffArgs {
    fn build(&self, domain: &RadialDomain) -> Result<(CutoffFamily, RadialGrid)> {
        let fam = log_cutoff_family(self.k, self.growth, domain, self.schedule.into())?;
        let grid = fam.grid(self.density)?;
        Ok((fam, grid))
    }
}

/// A test family read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFamilySpec {
    LogCutoff {
        #[serde(alias = "K")]
        k: usize,
        #[serde(default = "default_growth")]
        growth: f64,
        #[serde(default)]
        schedule: Schedule,
    },
    Bumps {
        n: usize,
        lo: f64,
        hi: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_growth() -> f64 {
    4.0
}

/// Members, their grid and, for cutoffs, the family itself.
struct TestFamily {
    members: Vec<ScalarField>,
    grid: RadialGrid,
    cutoffs: Option<CutoffFamily>,
    name: String,
}

fn load_test_family(m: &mut RunManifest, path: &Path, domain: &RadialDomain, density: u32) -> Result<TestFamily> {
    let text = m.read_input(path)?;
    let spec: TestFamilySpec = serde_json::from_str(&text).map_err(|e| input_error(path, e))?;
    match spec {
        TestFamilySpec::LogCutoff { k, growth, schedule } => {
            let fam = log_cutoff_family(k, growth, domain, schedule).map_err(|e| input_error(path, e))?;
            let grid = fam.grid(density)?;
            Ok(TestFamily { members: fam.fields(), grid, name: format!("log_cutoff K={k} R={growth}"), cutoffs: Some(fam) })
        }
        TestFamilySpec::Bumps { n, lo, hi, seed } => {
            let bumps = random_bumps(n, lo, hi, seed).map_err(|e| input_error(path, e))?;
            let members = bumps.iter().map(|b| b.field()).collect::<gslab_core::Result<Vec<_>>>()?;
            let grid = make_grid(domain, density, (lo, hi)).map_err(|e| input_error(path, e))?;
            Ok(TestFamily { members, grid, cutoffs: None, name: format!("bumps n={n} seed={seed}") })
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyInequality {
    /// Comma-separated exponents.
    #[arg(long, default_value = "1.1,1.5,2,2.5,3,4")]
    pub p: String,
    /// Decades of t covered, centred on t = 1.
    #[arg(long, default_value_t = 16)]
    pub t_decades: u32,
    #[arg(long, default_value_t = 100)]
    pub per_decade: usize,
    #[arg(long, default_value_t = 81)]
    pub theta_samples: usize,
    #[command(flatten)]
    pub common: Common,
}

impl VerifyInequality {
    pub(crate) fn run(&self, _m: &mut RunManifest) -> Result<Outcome> {
        let half = 10f64.powf(self.t_decades as f64 / 2.0);
        let grid = SweepGrid::new(1.0 / half, half, self.per_decade, self.theta_samples)?;
        let mut table = Table::new(&[
            "p", "c_lower", "c_upper", "argmin_t", "argmin_theta", "argmax_t", "argmax_theta", "f(2,-1)/(2p)", "samples",
        ]);
        let mut pass = true;
        let mut rows = Vec::new();
        for p in parse_exponents(&self.p)? {
            let c = estimate_equivalence_constants(p, &grid, Execution::Parallel)?;
            let anchor = scalar_f(2.0, -1.0, p) / (2.0 * p.get());
            pass &= c.c_lower > 0.0 && c.c_lower <= c.c_upper && c.c_upper.is_finite() && (anchor - 1.0).abs() <= 1e-12;
            table.push(vec![
                num(c.p),
                num(c.c_lower),
                num(c.c_upper),
                num(c.argmin_t),
                num(c.argmin_theta),
                num(c.argmax_t),
                num(c.argmax_theta),
                num(anchor),
                c.samples.to_string(),
            ]);
            rows.push(c);
        }
        let verdict = if pass { "bounded" } else { "unbounded" };
        Ok(Outcome { pass, verdict: verdict.into(), body: Body::Csv(table, fields(json!({ "constants": rows }))) })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PiconeCheck {
    #[arg(long, default_value = "1.1,1.5,2,2.5,3,4")]
    pub p: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Tolerance on |R − L| / (1 + |L|).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

impl PiconeCheck {
    pub(crate) fn run(&self, _m: &mut RunManifest) -> Result<Outcome> {
        let mut table = Table::new(&["p", "samples", "max_identity_defect", "max_split_defect", "min_l1", "min_l2", "pass"]);
        let mut pass = true;
        let mut sweeps = Vec::new();
        for p in parse_exponents(&self.p)? {
            let s = identity_sweep(p, self.samples, self.common.seed, Execution::Parallel);
            let ok = s.max_defect <= self.tol && s.max_split_defect <= self.tol && s.min_l1 >= -1e-12 && s.min_l2 >= -1e-12;
            pass &= ok;
            table.push(vec![
                num(s.p),
                s.samples.to_string(),
                num(s.max_defect),
                num(s.max_split_defect),
                num(s.min_l1),
                num(s.min_l2),
                ok.to_string(),
            ]);
            sweeps.push(s);
        }
        let verdict = if pass { "identity_holds" } else { "identity_violated" };
        Ok(Outcome { pass, verdict: verdict.into(), body: Body::Csv(table, fields(json!({ "sweeps": sweeps }))) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    TwoSided,
    OneSided,
}

#[derive(Debug, Args, Serialize)]
pub struct EnergyCmd {
    /// Problem file (p, d, domain, potential).
    #[arg(long)]
    pub spec: PathBuf,
    /// Field file for v.
    #[arg(long)]
    pub v: PathBuf,
    /// Test family file for w.
    #[arg(long)]
    pub w: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::TwoSided)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 8)]
    pub density: u32,
    #[command(flatten)]
    pub common: Common,
}

impl EnergyCmd {
    pub(crate) fn run(&self, m: &mut RunManifest) -> Result<Outcome> {
        let spec = load_problem(m, &self.spec)?;
        let v = load_field(m, &self.v)?.field;
        let fam = load_test_family(m, &self.w, &spec.domain, self.density)?;
        let constants = estimate_equivalence_constants(spec.exponent, &SweepGrid::standard(), Execution::Parallel)?;
        let mode = match self.mode {
            ModeArg::TwoSided => EquivalenceMode::TwoSided,
            ModeArg::OneSided => EquivalenceMode::OneSided,
        };
        let rep = equivalence_report(&v, &fam.members, &fam.name, &spec, &fam.grid, mode, Some(&constants), &QuadOptions::default())?;
        let pass = rep.violations.is_empty() && rep.within_constants != Some(false);
        let verdict = if pass { "within_constants" } else { "outside_constants" };
        let mut body = fields(serde_json::to_value(&rep)?);
        body.insert("ratios".into(), serde_json::to_value(rep.ratios())?);
        Ok(Outcome { pass, verdict: verdict.into(), body: Body::Json(body) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualModeArg {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlendArg {
    Quintic,
    Cubic,
}

/// Flags that select a named family.
#[derive(Debug, Clone, Args, Serialize)]
pub struct FamilyArgs {
    /// hardy_phi, psi_alpha, mp_supersol, constant, eta_phi or oscillatory_psi.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Value of the constant family.
    #[arg(long)]
    pub value: Option<f64>,
    #[arg(long, value_enum)]
    pub blend: Option<BlendArg>,
}

impl FamilyArgs {
    fn params(&self) -> FamilyParams {
        FamilyParams {
            p: self.p,
            d: self.d,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            value: self.value,
            blend: self.blend.map(|b| match b {
                BlendArg::Quintic => Blend::Quintic,
                BlendArg::Cubic => Blend::Cubic,
            }),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ResidualCmd {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value_t = ResidualModeArg::Strong)]
    pub mode: ResidualModeArg,
    /// Relative tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Radii (strong) or bumps (weak).
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Decades covered from the inner end.
    #[arg(long, default_value_t = 8.0)]
    pub decades: f64,
    #[command(flatten)]
    pub common: Common,
}

impl ResidualCmd {
    pub(crate) fn run(&self, _m: &mut RunManifest) -> Result<Outcome> {
        let fam = make_family(&self.family.family, &self.family.params())?;
        let spec = fam.spec()?;
        let lo = if spec.domain.r_min > 0.0 { spec.domain.r_min * 1.01 } else { 10f64.powf(-self.decades / 2.0) };
        let hi = (lo * 10f64.powf(self.decades)).min(spec.domain.r_max / 1.01);
        let rep = match self.mode {
            ResidualModeArg::Strong => {
                strong_residual_report(&fam.field, &spec, &log_radii(lo, hi, self.points), self.tol, Execution::Parallel)?
            }
            ResidualModeArg::Weak => {
                let bumps = random_bumps(self.points, lo, hi, self.common.seed)?;
                let grid = make_grid(&spec.domain, 16, (lo, hi))?;
                weak_residual_report(&fam.field, &spec, &bumps, &grid, self.tol, &QuadOptions::default())?
            }
        };
        let first = match rep.mode {
            ResidualMode::Strong => "r [length]",
            ResidualMode::Weak => "bump_center [length]",
        };
        let mut table = Table::new(&[first, "relative_residual [1]"]);
        for (x, v) in rep.points.iter().zip(&rep.values) {
            table.push(vec![num(*x), num(*v)]);
        }
        let pass = rep.verdict.supports(fam.claimed_status);
        let summary = json!({
            "family": fam.name(),
            "claimed_status": fam.claimed_status,
            "max_abs": rep.max_abs,
            "tolerance": rep.tolerance,
        });
        let verdict = serde_json::to_value(rep.verdict)?.as_str().unwrap_or_default().to_string();
        Ok(Outcome { pass, verdict, body: Body::Csv(table, fields(summary)) })
    }
}

fn parse_domain(text: &str) -> Result<RadialDomain> {
    match text {
        "punctured" | "punctured_space" => Ok(RadialDomain::punctured_space()),
        "whole" | "whole_space" => Ok(RadialDomain::whole_space()),
        other => {
            let r: f64 = other
                .parse()
                .map_err(|_| CliError::Usage(format!("--domain takes punctured, whole or an exterior radius, got `{other}`")))?;
            Ok(RadialDomain::exterior(r)?)
        }
    }
}

fn convergence_name(c: Convergence) -> Value {
    serde_json::to_value(c).expect("verdict serializes")
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyCmd {
    /// Field file for the positive solution.
    #[arg(long)]
    pub phi: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub d: u32,
    /// punctured, whole or an exterior radius; defaults to the family's domain.
    #[arg(long)]
    pub domain: Option<String>,
    /// Starting radius of the outer tail.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Double the probe density.
    #[arg(long)]
    pub refined: bool,
    #[command(flatten)]
    pub common: Common,
}

impl ClassifyCmd {
    pub(crate) fn run(&self, m: &mut RunManifest) -> Result<Outcome> {
        let loaded = load_field(m, &self.phi)?;
        let p = Exponent::new(self.p)?.get();
        let domain = match (&self.domain, &loaded.family) {
            (Some(text), _) => parse_domain(text)?,
            (None, Some(fam)) => fam.domain,
            (None, None) => RadialDomain::punctured_space(),
        };
        let mut opts = ClassifyOptions { r0_outer: self.r0, ..ClassifyOptions::default() };
        if self.refined {
            opts = opts.refined();
        }
        let v = classify(&loaded.field, p, self.d as f64, &domain, &opts)?;
        let verdict = serde_json::to_value(v.verdict)?.as_str().unwrap_or_default().to_string();
        let pass = v.verdict != GroundStateVerdict::Inconclusive;
        let body = json!({
            "M1": convergence_name(v.m1.verdict()),
            "M2": v.m2.as_ref().map(|m2| convergence_name(m2.verdict())),
            "detail": v,
        });
        Ok(Outcome { pass, verdict, body: Body::Json(fields(body)) })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct NullseqCmd {
    #[arg(long)]
    pub spec: PathBuf,
    /// Field file for the positive solution v.
    #[arg(long)]
    pub v: PathBuf,
    #[command(flatten)]
    pub cutoffs: CutoffArgs,
    #[command(flatten)]
    pub common: Common,
}

impl NullseqCmd {
    pub(crate) fn run(&self, m: &mut RunManifest) -> Result<Outcome> {
        let spec = load_problem(m, &self.spec)?;
        let v = load_field(m, &self.v)?.field;
        let (fam, grid) = self.cutoffs.build(&spec.domain)?;
        let rep = verify_null_sequence(&fam, &v, &spec, &grid, &DecayConvention::default(), &QuadOptions::default())?;
        let mut table = Table::new(&["k", "R_k [length]", "Q [energy]", "normalization [energy]", "Q_product [energy]", "error_estimate [energy]"]);
        for (e, member) in rep.entries.iter().zip(&fam.members) {
            table.push(vec![e.k.to_string(), num(member.c), num(e.q), num(e.normalization), num(e.q_product), num(e.error_estimate)]);
        }
        let pass = rep.verdict == SequenceVerdict::NullSequence;
        let verdict = serde_json::to_value(rep.verdict)?.as_str().unwrap_or_default().to_string();
        let summary = json!({ "decay": rep.decay, "norms_stable": rep.norms_stable, "diagnosis": rep.diagnosis });
        Ok(Outcome { pass, verdict, body: Body::Csv(table, fields(summary)) })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TransferCmd {
    /// Field file for the positive solution of Q1.
    #[arg(long)]
    pub phi: PathBuf,
    /// Field file for the subsolution of Q0.
    #[arg(long)]
    pub psi: PathBuf,
    #[arg(long)]
    pub spec0: PathBuf,
    #[arg(long)]
    pub spec1: PathBuf,
    /// Largest admissible comparison constant.
    #[arg(long, default_value_t = 4.0)]
    pub budget: f64,
    #[command(flatten)]
    pub cutoffs: CutoffArgs,
    #[command(flatten)]
    pub common: Common,
}

impl TransferCmd {
    pub(crate) fn run(&self, m: &mut RunManifest) -> Result<Outcome> {
        let phi = load_field(m, &self.phi)?.field;
        let psi = load_field(m, &self.psi)?.field;
        let spec0 = load_problem(m, &self.spec0)?;
        let spec1 = load_problem(m, &self.spec1)?;
        let (fam, grid) = self.cutoffs.build(&spec1.domain)?;
        let rep = transfer_null_sequence(&phi, &psi, &spec0, &spec1, &fam, &grid, self.budget, &DecayConvention::default(), &QuadOptions::default())?;
        let pass = rep.verdict == TransferVerdict::Transferred;
        let verdict = serde_json::to_value(rep.verdict)?.as_str().unwrap_or_default().to_string();
        let mut body = fields(serde_json::to_value(&rep)?);
        body.remove("verdict");
        Ok(Outcome { pass, verdict, body: Body::Json(body) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionArg {
    /// From Q to the linearized form (p > 2).
    Q2a,
    /// From the linearized form to Q (p < 2).
    A2q,
}

#[derive(Debug, Args, Serialize)]
pub struct LinearizeCmd {
    /// Field file for the base solution.
    #[arg(long)]
    pub phi: PathBuf,
    #[arg(long)]
    pub p: f64,
    /// Problem file; defaults to the problem of a named family.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Test family file (log cutoffs).
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long, value_enum)]
    pub direction: DirectionArg,
    #[arg(long, default_value_t = 8)]
    pub density: u32,
    #[command(flatten)]
    pub common: Common,
}

impl LinearizeCmd {
    pub(crate) fn run(&self, m: &mut RunManifest) -> Result<Outcome> {
        let loaded = load_field(m, &self.phi)?;
        let spec = match (&self.spec, &loaded.family) {
            (Some(path), _) => load_problem(m, path)?,
            (None, Some(fam)) => fam.spec()?,
            (None, None) => return Err(CliError::Usage("--spec is required unless --phi names a family".into())),
        };
        if spec.p() != self.p {
            return Err(CliError::Usage(format!("--p {} disagrees with the problem's p = {}", self.p, spec.p())));
        }
        let fam = load_test_family(m, &self.family, &spec.domain, self.density)?;
        let cutoffs = fam
            .cutoffs
            .ok_or_else(|| input_error(&self.family, "linearize needs a log_cutoff family"))?;
        let qspec = QuadraticFormSpec::new(loaded.field, spec)?;
        let conv = DecayConvention::default();
        let opts = QuadOptions::default();
        let (rep, extra) = match self.direction {
            DirectionArg::Q2a => (transfer_q_to_a(&cutoffs, &qspec, &fam.grid, &conv, &opts)?, None),
            DirectionArg::A2q => {
                let (rep, a) = transfer_a_to_q(&cutoffs, &qspec, &fam.grid, &conv, &opts)?;
                (rep, Some(a))
            }
        };
        let mut table = match extra {
            None => Table::new(&["k", "value [energy]", "check [energy]"]),
            Some(_) => Table::new(&["k", "value [energy]", "check [energy]", "linear_energy [energy]"]),
        };
        for (i, e) in rep.entries.iter().enumerate() {
            let mut row = vec![e.k.to_string(), num(e.value), num(e.check)];
            if let Some(a) = &extra {
                row.push(num(a[i]));
            }
            table.push(row);
        }
        let pass = rep.verdict == SequenceVerdict::NullSequence;
        let verdict = serde_json::to_value(rep.verdict)?.as_str().unwrap_or_default().to_string();
        let summary = json!({ "decay": rep.decay, "max_relative_mismatch": rep.max_relative_mismatch });
        Ok(Outcome { pass, verdict, body: Body::Csv(table, fields(summary)) })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ReportCmd {
    /// JSON reports of earlier runs (CSV runs write theirs next to the CSV).
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct ReportItem {
    file: String,
    subcommand: String,
    status: String,
    verdict: String,
    manifest_sha256: String,
}

impl ReportCmd {
    pub(crate) fn run(&self, m: &mut RunManifest) -> Result<Outcome> {
        if self.inputs.is_empty() {
            return Err(CliError::Usage("report needs at least one input".into()));
        }
        let mut items = Vec::new();
        for path in &self.inputs {
            let text = m.read_input(path)?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| input_error(path, e))?;
            let get = |key: &str| doc.get(key).and_then(Value::as_str).map(str::to_string);
            let status = get("status").ok_or_else(|| input_error(path, "missing `status`"))?;
            if status != "pass" && status != "fail" {
                return Err(input_error(path, format!("unknown status `{status}`")));
            }
            let subcommand = doc
                .pointer("/manifest/subcommand")
                .and_then(Value::as_str)
                .or_else(|| doc.get("criterion").and_then(Value::as_str))
                .unwrap_or("unknown")
                .to_string();
            items.push(ReportItem {
                file: path.display().to_string(),
                subcommand,
                status,
                verdict: get("verdict").unwrap_or_default(),
                manifest_sha256: get("manifest_sha256").unwrap_or_default(),
            });
        }
        let failed = items.iter().filter(|i| i.status == "fail").count();
        let pass = failed == 0;
        let body = json!({
            "total": items.len(),
            "passed": items.len() - failed,
            "failed": failed,
            "items": items,
        });
        let verdict = if pass { "all_pass" } else { "some_fail" };
        Ok(Outcome { pass, verdict: verdict.into(), body: Body::Json(fields(body)) })
    }
}
