//! Verification suites behind the `grauert` binary and their JSON/CSV reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adapted_structure::{self, BlockModel, ProbeOptions, TubeRadius};
use crate::cohomology::{self, CohomologyTable};
use crate::complex_checks::{self, DegreeOptions};
use crate::geodesic_jacobi;
use crate::involutions::{self, AntiholMap, InvolutionType};
use crate::model_embedding::{self, Inverse, LeafCoordinate, ProductPoint, INVERSE_LENGTH_FACTOR};
use crate::numerics::{seeded_rng, CMat, C64};
use crate::projective_geometry::{GeodesicFrame, TangentVector};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_GRID: usize = 20;
/// Trials of the fixed-point sampler in `involution classify`.
pub const FIXED_POINT_TRIALS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub n: Option<usize>,
    pub grid: Option<String>,
    pub tolerance: Option<f64>,
    pub max_residual: Option<f64>,
    pub verdict: Verdict,
    pub metrics: BTreeMap<String, Value>,
}

impl CheckResult {
    fn new(check: &str, n: Option<usize>) -> Self {
        Self { check: check.into(), n, grid: None, tolerance: None, max_residual: None, verdict: Verdict::Pass, metrics: BTreeMap::new() }
    }

    fn grid(mut self, grid: impl Into<String>) -> Self {
        self.grid = Some(grid.into());
        self
    }

    /// Sets the verdict from `residual < tolerance`; non-finite residuals fail.
    fn bounded(mut self, residual: f64, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self.max_residual = Some(residual);
        self.verdict = if residual.is_finite() && residual < tolerance { Verdict::Pass } else { Verdict::Fail };
        self
    }

    fn metric(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metrics.insert(key.into(), value.into());
        self
    }

    fn require(mut self, ok: bool) -> Self {
        if !ok {
            self.verdict = Verdict::Fail;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub n: Option<usize>,
    pub seed: u64,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub tau_max: Option<f64>,
    pub model: Option<String>,
}

impl Parameters {
    pub fn new(seed: u64) -> Self {
        Self { n: None, seed, grid: None, tol: None, tau_max: None, model: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub parameters: Parameters,
    pub checks: Vec<CheckResult>,
}

impl ReportEnvelope {
    fn new(command: &str, parameters: Parameters, checks: Vec<CheckResult>) -> Self {
        Self { schema_version: SCHEMA_VERSION, tool_version: TOOL_VERSION.into(), command: command.into(), parameters, checks }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    /// `0` iff every verdict passes.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per check; metrics are packed as `key=value` pairs separated by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,n,verdict,max_residual,tolerance,metrics\n");
        for c in &self.checks {
            let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            let n = c.n.map(|n| n.to_string()).unwrap_or_default();
            let verdict = serde_json::to_value(c.verdict).expect("verdict");
            let metrics: Vec<String> = c
                .metrics
                .iter()
                .map(|(k, v)| match v {
                    Value::String(s) => format!("{k}={s}"),
                    other => format!("{k}={other}"),
                })
                .collect();
            let _ = writeln!(
                out,
                "{},{n},{},{},{},{}",
                c.check,
                verdict.as_str().unwrap_or(""),
                opt(c.max_residual),
                opt(c.tolerance),
                csv_field(&metrics.join(";"))
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn tube_point<R: Rng + ?Sized>(rng: &mut R, n: usize, tau_lo: f64, tau_hi: f64) -> (GeodesicFrame, f64, f64, ProductPoint) {
    let frame = GeodesicFrame::random(rng, n);
    let sigma = rng.random_range(0.0..2.0 * PI);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let tau = sign * rng.random_range(tau_lo..tau_hi);
    let p = model_embedding::leaf_map(&frame, LeafCoordinate::new(sigma, tau));
    (frame, sigma, tau, p)
}

fn check_n(n: usize, range: std::ops::RangeInclusive<usize>) -> Result<()> {
    if range.contains(&n) {
        Ok(())
    } else {
        Err(Error::OutOfRange { value: n as f64, lo: *range.start() as f64, hi: *range.end() as f64 })
    }
}

/// Exhaustion, potential, leaf, HCMA, harmonicity and inverse round-trip suites for `T CP^n`.
///
/// `grid` sets the sample counts; `tol` replaces every per-check tolerance.
pub fn cmd_verify_model(n: usize, grid: usize, tol: Option<f64>, seed: u64) -> Result<ReportEnvelope> {
    check_n(n, 1..=3)?;
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let tolerance = |default: f64| tol.unwrap_or(default);
    let mut checks = Vec::new();

    // u0(φ(σ + iτ)) = |τ| and 𝒩(φ(iτ)) = cosh²τ
    let samples = 50 * grid;
    let mut u0_err: f64 = 0.0;
    let mut n_err: f64 = 0.0;
    let mut potential_err: f64 = 0.0;
    for _ in 0..samples {
        let (frame, _, tau, p) = tube_point(&mut rng, n, 0.0, 5.0);
        u0_err = u0_err.max((model_embedding::u0(&p).to_f64() - tau.abs()).abs());
        let q = model_embedding::leaf_map(&frame, LeafCoordinate::new(0.0, tau));
        let cosh2 = tau.cosh().powi(2);
        n_err = n_err.max((model_embedding::exhaustion_n(&q).to_f64() - cosh2).abs() / cosh2);
        potential_err = potential_err.max((model_embedding::kahler_potential(&p).to_f64() - (2.0 * cosh2).ln()).abs());
    }
    checks.push(
        CheckResult::new("exhaustion", Some(n))
            .grid(format!("{samples} samples, |tau| <= 5"))
            .bounded(u0_err.max(n_err), tolerance(1e-9))
            .metric("u0_max_error", u0_err)
            .metric("n_relative_error", n_err),
    );
    checks.push(
        CheckResult::new("kahler_potential", Some(n))
            .grid(format!("{samples} samples"))
            .bounded(potential_err, tolerance(1e-9)),
    );

    // leaves are holomorphic curves ending on D
    let mut leaf_err: f64 = 0.0;
    let mut end_pairing: f64 = 0.0;
    for _ in 0..grid {
        let (frame, sigma, tau, p) = tube_point(&mut rng, n, 0.0, 5.0);
        let (z, w) = model_embedding::leaf_reps_holomorphic(&frame, C64::new(sigma, tau));
        leaf_err = leaf_err.max(p.distance_proxy(&ProductPoint::from_reps(z, w)?));
        for end in [model_embedding::leaf_end_infinity(&frame), model_embedding::leaf_end_zero(&frame)] {
            end_pairing = end_pairing.max(end.pairing().norm());
        }
    }
    checks.push(
        CheckResult::new("leaf", Some(n))
            .grid(format!("{grid} leaves"))
            .bounded(leaf_err.max(end_pairing), tolerance(1e-9))
            .metric("holomorphic_rep_error", leaf_err)
            .metric("endpoint_pairing", end_pairing),
    );

    // HCMA: Levi form of u0 has rank 2n - 1
    let hcma_default = if n == 1 { 1e-4 } else { 1e-3 };
    let mut hcma_res: f64 = 0.0;
    let mut ranks = BTreeMap::<usize, usize>::new();
    for _ in 0..grid {
        let (_, _, _, p) = tube_point(&mut rng, n, 0.2, 3.0);
        let report = complex_checks::hcma_check(&p, complex_checks::DEFAULT_FD_STEP)?;
        hcma_res = hcma_res.max(report.residual);
        *ranks.entry(report.rank).or_default() += 1;
    }
    let expected_rank = 2 * n - 1;
    let rank_ok = ranks.keys().all(|&r| r == expected_rank);
    checks.push(
        CheckResult::new("hcma", Some(n))
            .grid(format!("{grid} points, |tau| in [0.2, 3]"))
            .bounded(hcma_res, tolerance(hcma_default))
            .metric("rank", expected_rank)
            .metric("rank_counts", json!(ranks))
            .require(rank_ok),
    );

    // harmonicity of u0 along leaves
    let frame = GeodesicFrame::random(&mut rng, n);
    let harmonic = complex_checks::leaf_harmonicity(&frame, 2 * grid, (0.2, 3.0), grid, 1e-3);
    checks.push(
        CheckResult::new("harmonicity", Some(n))
            .grid(format!("{}x{grid}", 2 * grid))
            .bounded(harmonic, tolerance(1e-5)),
    );

    // forward then inverse
    let mut inv_err: f64 = 0.0;
    let mut length_err: f64 = 0.0;
    for _ in 0..5 * grid {
        let length = rng.random_range(0.05..5.0);
        let v = TangentVector::random(&mut rng, n, length);
        match model_embedding::invert_embedding(&model_embedding::embed_tangent(&v)) {
            Inverse::Tangent(back) => {
                inv_err = inv_err.max(back.distance(&v));
                length_err = length_err.max((back.norm() - length).abs());
            }
            Inverse::Divisor(_) => inv_err = f64::INFINITY,
        }
    }
    checks.push(
        CheckResult::new("inverse_round_trip", Some(n))
            .grid(format!("{} tangent vectors", 5 * grid))
            .bounded(inv_err.max(length_err), tolerance(1e-9))
            .metric("inverse_length_constant", INVERSE_LENGTH_FACTOR)
            .metric("length_error", length_err),
    );

    let mut params = Parameters::new(seed);
    params.n = Some(n);
    params.grid = Some(grid);
    params.tol = tol;
    Ok(ReportEnvelope::new("verify-model", params, checks))
}

/// One row of the cohomology CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohomologyRow {
    pub space: String,
    pub degree: usize,
    pub rank: usize,
    pub torsion: String,
    pub group: String,
    pub closed_form: String,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub n: usize,
    pub rows: Vec<CohomologyRow>,
    pub mismatches: usize,
}

impl CohomologyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("space,degree,rank,torsion,group,closed_form,match\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{},{}", r.space, r.degree, r.rank, r.torsion, r.group, r.closed_form, r.matches);
        }
        out
    }

    pub fn envelope(&self) -> ReportEnvelope {
        let mut params = Parameters::new(DEFAULT_SEED);
        params.n = Some(self.n);
        let check = CheckResult::new("cohomology_closed_form", Some(self.n))
            .metric("mismatches", self.mismatches)
            .metric("rows", json!(self.rows))
            .require(self.mismatches == 0);
        ReportEnvelope::new("cohomology", params, vec![check])
    }
}

/// `H^*(UM)`, `H^*(D)`, `H^*(X)` with a closed-form comparison column.
pub fn cmd_cohomology(n: usize) -> Result<CohomologyReport> {
    if n == 0 {
        return Err(Error::OutOfRange { value: 0.0, lo: 1.0, hi: f64::INFINITY });
    }
    let model = cohomology::model_cohomology(n)?;
    let pairs: [(&str, &CohomologyTable, CohomologyTable); 3] = [
        ("UM", &model.um, cohomology::um_closed_form(n)),
        ("D", &model.d, cohomology::d_closed_form(n)),
        ("X", &model.x, cohomology::x_closed_form(n)),
    ];
    let mut rows = Vec::new();
    for (space, computed, closed) in pairs {
        for (degree, g) in computed.groups.iter().enumerate() {
            let expected = closed.groups.get(degree).cloned().unwrap_or_else(cohomology::FGAbelianGroup::zero);
            rows.push(CohomologyRow {
                space: space.into(),
                degree,
                rank: g.rank(),
                torsion: g.torsion_string(),
                group: g.to_string(),
                closed_form: expected.to_string(),
                matches: *g == expected,
            });
        }
        if computed.groups.len() != closed.groups.len() {
            rows.push(CohomologyRow {
                space: space.into(),
                degree: computed.groups.len(),
                rank: 0,
                torsion: String::new(),
                group: "length".into(),
                closed_form: closed.groups.len().to_string(),
                matches: false,
            });
        }
    }
    let mismatches = rows.iter().filter(|r| !r.matches).count();
    Ok(CohomologyReport { n, rows, mismatches })
}

/// Restricted degrees on a compactified leaf and the Morse-index counts.
pub fn cmd_degrees(n: usize, seed: u64) -> Result<ReportEnvelope> {
    check_n(n, 1..=2)?;
    let mut rng = seeded_rng(seed);
    let frame = GeodesicFrame::random(&mut rng, n);
    let options = DegreeOptions::default();
    let reports = complex_checks::leaf_degrees(&frame, options)?;
    let expected = [2, 2 * n as i64 + 2, 2, 2 * n as i64];
    let names = ["degree_divisor", "degree_anticanonical", "degree_leaf_tangent", "degree_normal_determinant"];
    let mut checks: Vec<CheckResult> = reports
        .iter()
        .zip(expected)
        .zip(names)
        .map(|((r, e), name)| {
            CheckResult::new(name, Some(n))
                .bounded(r.rounding_error.max(r.error_estimate), complex_checks::DEGREE_TOLERANCE)
                .metric("value", r.value)
                .metric("degree", r.degree)
                .metric("expected", e)
                .metric("error_estimate", r.error_estimate)
                .require(r.degree == e)
        })
        .collect();
    let (chart, path) = geodesic_jacobi::cpn_closed_geodesic(&frame, 2.0 * PI * 5e-4)?;
    let morse = geodesic_jacobi::morse_summary(&chart, &path, 2.0 * PI)?;
    let (index, vanishing) = (morse.index, morse.vanishing_order);
    checks.push(
        CheckResult::new("morse_index", Some(n))
            .metric("index", index)
            .metric("vanishing_order_total", vanishing)
            .metric("expected_vanishing_order_total", 2 * n)
            .require(index == 1 && vanishing == 2 * n),
    );
    let mut params = Parameters::new(seed);
    params.n = Some(n);
    Ok(ReportEnvelope::new("degrees", params, checks))
}

/// Model for [`cmd_tube_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeModel {
    Cpn(usize),
    Sphere(usize),
    Block(f64),
}

impl ProbeModel {
    fn build(self) -> Result<BlockModel> {
        match self {
            ProbeModel::Cpn(n) => BlockModel::cpn(n),
            ProbeModel::Sphere(m) => BlockModel::sphere(m),
            ProbeModel::Block(k) => BlockModel::block(k),
        }
    }

    fn label(self) -> String {
        match self {
            ProbeModel::Cpn(n) => format!("cpn:{n}"),
            ProbeModel::Sphere(m) => format!("sphere:{m}"),
            ProbeModel::Block(k) => format!("block:{k}"),
        }
    }
}

/// Largest height on which `Im Ψ` stays positive definite.
pub fn cmd_tube_probe(model: ProbeModel, tau_max: f64) -> Result<ReportEnvelope> {
    let block = model.build()?;
    let options = ProbeOptions { tau_max, ..ProbeOptions::default() };
    let radius = adapted_structure::tube_radius_probe(&block, options)?;
    let check = CheckResult::new("tube_probe", None)
        .grid(format!("{} sigma x step {}", options.sigma_samples, options.tau_step))
        .metric("model", block.name())
        .metric("curvatures", json!(block.curvatures()));
    let check = match radius {
        TubeRadius::Entire => check.metric("radius", "entire"),
        TubeRadius::Finite(r) => check.metric("radius", r),
    };
    let mut params = Parameters::new(DEFAULT_SEED);
    params.tau_max = Some(tau_max);
    params.model = Some(model.label());
    Ok(ReportEnvelope::new("tube-probe", params, vec![check]))
}

/// Entry of a matrix file: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

/// Parses rows of `[re, im]` pairs (or plain reals) into a square complex matrix.
pub fn parse_matrix_json(text: &str) -> Result<CMat> {
    let rows: Vec<Vec<Entry>> = serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("matrix file: {e}")))?;
    let size = rows.len();
    if size == 0 || rows.iter().any(|r| r.len() != size) {
        return Err(Error::InvalidParameter("matrix must be square and nonempty".into()));
    }
    Ok(CMat::from_fn(size, size, |i, j| match rows[i][j] {
        Entry::Real(x) => C64::new(x, 0.0),
        Entry::Complex([re, im]) => C64::new(re, im),
    }))
}

/// Involution test, normal-form type and fixed-point sampling for `σ_A`.
pub fn cmd_involution_classify(a: CMat, trials: usize, seed: u64) -> Result<ReportEnvelope> {
    let map = AntiholMap::new(a)?;
    let n = map.n();
    let check = involutions::is_involution(&map);
    let mut checks = vec![CheckResult::new("involution", Some(n))
        .bounded(check.residual, involutions::INVOLUTION_TOLERANCE)
        .metric("c_re", check.c.re)
        .metric("c_im", check.c.im)
        .metric("condition_number", map.condition_number())];
    if check.is_involution {
        let kind = involutions::involution_type(&map)?;
        let mut rng = seeded_rng(seed);
        let sample = involutions::fixed_points_sample(&map, trials, &mut rng)?;
        let name = match kind {
            InvolutionType::Real => "real",
            InvolutionType::Quaternionic => "quaternionic",
        };
        let consistent = match kind {
            InvolutionType::Real => sample.points.len() == trials && sample.family_dimension == Some(n),
            InvolutionType::Quaternionic => sample.points.is_empty() && sample.min_residual > involutions::EMPTINESS_THRESHOLD,
        };
        let mut fixed = CheckResult::new("fixed_points", Some(n))
            .grid(format!("{trials} trials"))
            .metric("type", name)
            .metric("found", sample.points.len())
            .metric("min_residual", sample.min_residual)
            .require(consistent);
        if let Some(d) = sample.family_dimension {
            fixed = fixed.metric("family_dimension", d);
        }
        checks.push(fixed);
    }
    let mut params = Parameters::new(seed);
    params.n = Some(n);
    Ok(ReportEnvelope::new("involution classify", params, checks))
}
