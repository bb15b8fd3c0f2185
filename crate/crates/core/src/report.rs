//! Run configurations, JSON reports, per-table CSV output and the batch
//! pipeline shared by the command-line front end and the tests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focal::{self, Side};
use crate::isofun::{self, Domain, IsoFunContext};
use crate::loci::{self, FamilySpec, LocusRow};
use crate::octonion::{self, CayleyDickson, Octonion, OctonionProduct};
use crate::{curvature, linalg, rng};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Exact header of `table1.csv` and `table2.csv`.
pub const CSV_HEADER: [&str; 7] = ["family", "side", "locus", "claim", "verdict", "max_residual", "n_samples"];
pub const DEFAULT_SAMPLES: usize = 12;
pub const DEFAULT_PAIRS: usize = 1000;
pub const DEFAULT_LEVELS: [f64; 5] = [-0.7, -0.3, 0.0, 0.3, 0.7];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub membership: f64,
    pub predicate: f64,
    pub fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership: focal::MEMBERSHIP_TOL,
            predicate: curvature::PREDICATE_TOL,
            fd: focal::FD_AGREEMENT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub family: Option<FamilySpec>,
    pub variant: Option<Domain>,
    pub samples: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub tolerances: Tolerances,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.into(),
            family: None,
            variant: None,
            samples: DEFAULT_SAMPLES,
            seed: rng::DEFAULT_SEED,
            levels: DEFAULT_LEVELS.to_vec(),
            tolerances: Tolerances::default(),
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// 1 or 2 for classification table rows, absent otherwise.
    pub table: Option<u8>,
    pub family: String,
    pub side: String,
    pub locus: String,
    pub claim: String,
    pub verdict: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub values: BTreeMap<String, f64>,
}

impl ReportRow {
    fn check(
        family: &str,
        side: &str,
        locus: &str,
        claim: &str,
        residual: f64,
        tolerance: f64,
        samples: usize,
    ) -> Self {
        ReportRow {
            table: None,
            family: family.into(),
            side: side.into(),
            locus: locus.into(),
            claim: claim.into(),
            verdict: verdict(residual.is_finite() && residual < tolerance).into(),
            max_residual: residual,
            tolerance,
            samples,
            values: BTreeMap::new(),
        }
    }

    fn with_value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    fn failed(&self) -> bool {
        self.verdict == "fail"
    }
}

impl From<&LocusRow> for ReportRow {
    fn from(r: &LocusRow) -> Self {
        let mut values = BTreeMap::new();
        for (k, v) in [("min_margin", r.min_margin), ("rho_min", r.rho_min), ("rho_max", r.rho_max)] {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        ReportRow {
            table: Some(r.table),
            family: r.family.clone(),
            side: r.side.as_str().into(),
            locus: r.locus.as_str().into(),
            claim: r.claim.clone(),
            verdict: r.verdict.clone(),
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            samples: r.n_samples,
            values,
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: RunConfig,
    pub rows: Vec<ReportRow>,
    /// Per-sample records, when the command produces them.
    #[serde(default)]
    pub records: serde_json::Value,
    #[serde(default)]
    pub errors: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl Report {
    fn new(
        config: RunConfig,
        rows: Vec<ReportRow>,
        records: serde_json::Value,
        errors: Vec<String>,
        start: Instant,
    ) -> Self {
        Report {
            version: VERSION.into(),
            config,
            rows,
            records,
            errors,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        }
    }

    pub fn passed(&self) -> bool {
        self.errors.is_empty() && !self.rows.iter().any(ReportRow::failed)
    }

    pub fn first_failure(&self) -> Option<String> {
        self.errors.first().cloned().or_else(|| {
            self.rows.iter().find(|r| r.failed()).map(|r| {
                format!(
                    "{} {} {}: residual {:e} (tolerance {:e})",
                    r.family, r.side, r.locus, r.max_residual, r.tolerance
                )
            })
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

// ---------------------------------------------------------------------------
// Algebra suite
// ---------------------------------------------------------------------------

fn random_unit_octonion<R: Rng + ?Sized>(rng: &mut R) -> Octonion {
    Octonion::from_slice(linalg::random_unit(rng, 8).as_slice())
}

/// Octonion property suite against `mul`: Condition X holds exactly for
/// `tau = +-sigma` (every fourth pair is forced to `sigma` or `-sigma`), the
/// implied Condition Y and norm equalities, the seven-fold product, the
/// left-multiplication Clifford relations and norm multiplicativity.
/// Residuals for one `(sigma, tau)` pair, with a counterexample on failure.
struct PairResult {
    equivalence: f64,
    condition_y: f64,
    half_norms: f64,
    norm: f64,
    failure: Option<String>,
}

pub fn algebra_rows<M: OctonionProduct + Sync + ?Sized>(
    mul: &M,
    pairs: usize,
    seed: u64,
) -> (Vec<ReportRow>, Vec<String>) {
    const FAMILY: &str = "octonion";
    let results: Vec<PairResult> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, "algebra:pairs", i as u64);
            let s = random_unit_octonion(&mut r);
            let t = match i % 4 {
                0 => s,
                1 => -s,
                _ => random_unit_octonion(&mut r),
            };
            let close = (s - t).norm().min((s + t).norm()) < 1e-8;
            let x = match octonion::condition_x_with(mul, s, t, 1e-10) {
                Ok(x) => x,
                Err(e) => {
                    return PairResult {
                        equivalence: f64::INFINITY,
                        condition_y: 0.0,
                        half_norms: 0.0,
                        norm: 0.0,
                        failure: Some(format!("pair {i}: {e}")),
                    }
                }
            };
            let mut fail = None;
            let equivalence = if x.holds == close { 0.0 } else { 1.0 };
            if equivalence > 0.0 {
                fail = Some(format!(
                    "pair {i}: Condition X {} but min |s -+ t| = {:e}; s = {:?}, t = {:?}",
                    if x.holds { "holds" } else { "fails" },
                    (s - t).norm().min((s + t).norm()),
                    s.0,
                    t.0
                ));
            }
            let (mut y_res, mut half_res) = (0.0, 0.0);
            if x.holds {
                y_res =
                    octonion::condition_y_with(mul, s.conj(), t, 1e-10).map(|c| c.residual).unwrap_or(f64::INFINITY);
                let (s1, s2) = s.halves();
                let (t1, t2) = t.halves();
                half_res = (s1.norm() - t1.norm()).abs().max((s2.norm() - t2.norm()).abs());
            }
            let u = random_unit_octonion(&mut r);
            let norm_res = (mul.product(s, u).norm() - 1.0).abs();
            PairResult { equivalence, condition_y: y_res, half_norms: half_res, norm: norm_res, failure: fail }
        })
        .collect();
    let mut errors: Vec<String> = results.iter().filter_map(|r| r.failure.clone()).collect();
    errors.truncate(1);
    let fold = |f: fn(&PairResult) -> f64| results.iter().map(f).fold(0.0, f64::max);

    let mut seven = 0.0_f64;
    let mut r = rng::stream(seed, "algebra:seven", 0);
    let inputs: Vec<Octonion> =
        (0..8).map(Octonion::basis).chain((0..100).map(|_| random_unit_octonion(&mut r))).collect();
    for x in &inputs {
        let res = (octonion::seven_fold_product_with(mul, *x) + *x).norm();
        if res >= 1e-14 && errors.is_empty() {
            errors.push(format!("seven-fold product fails at x = {:?}: residual {res:e}", x.0));
        }
        seven = seven.max(res);
    }
    let clifford = octonion::left_mult_clifford_residual(mul);

    let rows = vec![
        ReportRow::check(
            FAMILY,
            "-",
            "condition-x-iff-sign",
            "holds iff tau = +-sigma",
            fold(|r| r.equivalence),
            0.5,
            pairs,
        ),
        ReportRow::check(
            FAMILY,
            "-",
            "condition-y-from-x",
            "X(s,t) implies Y(conj s,t)",
            fold(|r| r.condition_y),
            1e-10,
            pairs,
        ),
        ReportRow::check(
            FAMILY,
            "-",
            "half-norms-from-x",
            "X(s,t) implies equal half norms",
            fold(|r| r.half_norms),
            1e-10,
            pairs,
        ),
        ReportRow::check(FAMILY, "-", "norm-multiplicative", "|s u| = |s||u|", fold(|r| r.norm), 1e-12, pairs),
        ReportRow::check(FAMILY, "-", "seven-fold-product", "e1(e2(...(e7 x))) = -x", seven, 1e-14, inputs.len()),
        ReportRow::check(FAMILY, "-", "left-mult-clifford", "L_a L_b + L_b L_a = -2 delta I", clifford, 1e-14, 49),
    ];
    (rows, errors)
}

pub fn verify_algebra(pairs: usize, seed: u64, corrupt: bool) -> Report {
    let start = Instant::now();
    let mut config = RunConfig::new("verify-algebra");
    config.samples = pairs;
    config.seed = seed;
    let (rows, errors) =
        if corrupt { algebra_rows(&corrupted_table(), pairs, seed) } else { algebra_rows(&CayleyDickson, pairs, seed) };
    Report::new(config, rows, serde_json::Value::Null, errors, start)
}

/// The Cayley-Dickson table with the sign of `e1 e2` flipped.
pub fn corrupted_table() -> octonion::StructureTable {
    octonion::StructureTable::from_cayley_dickson().with_flipped_sign(1, 2)
}

// ---------------------------------------------------------------------------
// Table audits
// ---------------------------------------------------------------------------

pub fn audit(spec: &FamilySpec, samples: usize, seed: u64) -> Result<Report> {
    let start = Instant::now();
    let rep = loci::table_audit(spec, samples, seed)?;
    let mut config = RunConfig::new("audit");
    config.family = Some(*spec);
    config.samples = samples;
    config.seed = seed;
    let rows = rep.rows.iter().map(ReportRow::from).collect();
    Ok(Report::new(config, rows, serde_json::to_value(&rep.samples)?, rep.errors.clone(), start))
}

/// Every audited family on both sides, in a fixed order.
pub fn audited_specs() -> Vec<FamilySpec> {
    let mut out = Vec::new();
    for side in [Side::Plus, Side::Minus] {
        for (m, k, v) in loci::audited_families() {
            out.push(FamilySpec::new(m, k, v, side).expect("audited families are valid"));
        }
    }
    out
}

/// Rows for the homogeneous families that have no OT-FKM construction.
pub fn not_audited() -> Vec<ReportRow> {
    loci::not_audited_rows().iter().map(ReportRow::from).collect()
}

// ---------------------------------------------------------------------------
// Isoparametric function suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct LevelStats {
    points: usize,
    pattern: f64,
    curvature: f64,
    spread: f64,
    coupling: f64,
    level: f64,
}

fn family_label(domain: Domain) -> &'static str {
    match domain {
        Domain::Indefinite => "(8,7)I",
        Domain::Definite => "(8,7)D",
    }
}

/// Identities of `h` on the chosen domain: gradient and Laplacian on generic
/// samples, Hessian pattern and level-set curvatures at each level,
/// austerity at level 0, a finite-difference Laplacian check, the inclusion
/// of the partner `M+` as the zero level, and the focal link with the
/// extension `P_9`.
pub fn isofun_rows(domain: Domain, samples: usize, levels: &[f64], seed: u64) -> Result<(Vec<ReportRow>, Vec<String>)> {
    let ctx = IsoFunContext::new(domain)?;
    let fam = family_label(domain);
    let side = "minus";
    let mut errors = Vec::new();

    let generic: Vec<Result<(f64, f64, f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, &format!("{fam}:isofun:generic"), i as u64);
            let fp = ctx.sample(&mut r)?;
            let h = isofun::h_value(&ctx, &fp.x);
            let g = isofun::h_gradient(&ctx, &fp)?;
            let grad = (g.norm_squared() - 4.0 * (1.0 - h * h)).abs();
            let lap = (isofun::h_laplacian(&ctx, &fp)? + 32.0 * h).abs();
            let normal = isofun::gradient_normal_residual(&ctx, &fp)?;
            let ntrace = (isofun::normal_trace(&ctx, &fp) + 8.0 * h).abs();
            Ok((grad, lap, normal, ntrace))
        })
        .collect();
    let mut g = [0.0_f64; 4];
    for r in generic {
        match r {
            Ok(v) => {
                for (acc, x) in g.iter_mut().zip([v.0, v.1, v.2, v.3]) {
                    *acc = acc.max(x);
                }
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    let mut rows = vec![
        ReportRow::check(fam, side, "gradient-norm", "|grad h|^2 = 4(1 - h^2)", g[0], 1e-9, samples),
        ReportRow::check(fam, side, "laplacian", "Delta h = -32 h", g[1], 1e-9, samples),
        ReportRow::check(fam, side, "gradient-tangent", "grad h is tangent", g[2], 1e-10, samples),
        ReportRow::check(fam, side, "normal-trace", "sum <P N_a, N_a> = -8 h", g[3], 1e-9, samples),
    ];

    let fd_count = samples.min(5);
    let fd: Vec<Result<f64>> = (0..fd_count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, &format!("{fam}:isofun:fd"), i as u64);
            let fp = ctx.sample(&mut r)?;
            Ok((isofun::fd_laplacian(&ctx, &fp)? - isofun::h_laplacian(&ctx, &fp)?).abs())
        })
        .collect();
    let mut fd_res = 0.0_f64;
    for r in fd {
        match r {
            Ok(v) => fd_res = fd_res.max(v),
            Err(e) => errors.push(e.to_string()),
        }
    }
    rows.push(ReportRow::check(
        fam,
        side,
        "fd-laplacian",
        "finite differences match the trace formula",
        fd_res,
        1e-5,
        fd_count,
    ));

    let per_level = samples.clamp(2, 10);
    for (li, &c) in levels.iter().enumerate() {
        let pts: Vec<Result<(isofun::HessianRecord, Vec<f64>)>> = (0..per_level)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed, &format!("{fam}:isofun:level{li}"), i as u64);
                let fp = isofun::sample_level(&ctx, c, &mut r)?;
                Ok((isofun::hess_spectrum(&ctx, &fp)?, isofun::level_set_shape(&ctx, &fp)?))
            })
            .collect();
        let expected = isofun::expected_level_curvatures(c);
        let mut st = LevelStats { points: per_level, ..Default::default() };
        let mut first: Option<Vec<f64>> = None;
        let mut pair_res = 0.0_f64;
        let mut kernel_ok = true;
        for p in pts {
            match p {
                Ok((rec, k)) => {
                    st.pattern = st.pattern.max(rec.pattern_residual);
                    st.coupling = st
                        .coupling
                        .max(rec.coupling_residual)
                        .max(rec.normal_block_residual)
                        .max(rec.trace_residual)
                        .max(rec.gradient_eigen_residual);
                    st.level = st.level.max((rec.h - c).abs());
                    let dev = k.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    st.curvature = st.curvature.max(dev);
                    match &first {
                        None => first = Some(k.clone()),
                        Some(f) => {
                            st.spread = st.spread.max(k.iter().zip(f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                        }
                    }
                    let (pr, kd) = isofun::austerity(&k);
                    pair_res = pair_res.max(pr);
                    kernel_ok &= kd == 8;
                }
                Err(e) => errors.push(format!("level {c}: {e}")),
            }
        }
        let label = format!("level {c}");
        rows.push(
            ReportRow::check(
                fam,
                side,
                &format!("hessian-pattern {label}"),
                "{h x8, -h, +1 x7, -1 x7}",
                st.pattern,
                1e-6,
                per_level,
            )
            .with_value("level", c)
            .with_value("level_residual", st.level)
            .with_value("block_residual", st.coupling),
        );
        rows.push(ReportRow::check(
            fam,
            side,
            &format!("block-identities {label}"),
            "B^T B = (1 - h^2) I, N^T P N = -h I",
            st.coupling,
            1e-9,
            per_level,
        ));
        rows.push(
            ReportRow::check(
                fam,
                side,
                &format!("level-curvatures {label}"),
                "{0 x8, -sqrt((1-c)/(1+c)) x7, sqrt((1+c)/(1-c)) x7}",
                st.curvature,
                1e-6,
                per_level,
            )
            .with_value("level", c),
        );
        rows.push(ReportRow::check(
            fam,
            side,
            &format!("level-constancy {label}"),
            "spectrum constant on the level",
            st.spread,
            1e-6,
            per_level,
        ));
        if c == 0.0 {
            let res = if kernel_ok { pair_res } else { f64::INFINITY };
            rows.push(
                ReportRow::check(
                    fam,
                    side,
                    "austerity level 0",
                    "eigenvalues pair as +-1 with an 8-dim kernel",
                    res,
                    1e-6,
                    per_level,
                )
                .with_value("kernel_dim_ok", if kernel_ok { 1.0 } else { 0.0 }),
            );
        }
    }

    let mut r = rng::stream(seed, &format!("{fam}:isofun:inclusion"), 0);
    match isofun::cross_inclusion(&ctx, samples, &mut r) {
        Ok(inc) => {
            rows.push(
                ReportRow::check(
                    fam,
                    side,
                    "zero-level-inclusion",
                    "partner M+ lies in M- with h = 0",
                    inc.membership_residual.max(inc.max_abs_h),
                    1e-10,
                    samples,
                )
                .with_value("membership_residual", inc.membership_residual)
                .with_value("max_abs_h", inc.max_abs_h),
            );
            let res = if inc.focal_condition_a { inc.focal_h_residual } else { f64::INFINITY };
            let claim = match domain {
                Domain::Indefinite => "E+-(P) points have |h| = 1 and lie in C_A",
                Domain::Definite => "E+-(P) points have |h| = 1",
            };
            rows.push(ReportRow::check(fam, side, "focal-variety", claim, res, 1e-10, samples.clamp(1, 8)));
        }
        Err(e) => errors.push(format!("inclusion: {e}")),
    }

    if domain == Domain::Definite {
        let mut worst = 0.0_f64;
        let n = samples.min(10);
        for i in 0..n {
            let mut r = rng::stream(seed, "(8,7)D:isofun:ca", i as u64);
            match loci::sample_ca_d(&ctx.sys, &ctx.dual, &ctx.p9, &mut r) {
                Ok(fp) => worst = worst.max(loci::ca_definite_residual(&ctx.p, &ctx.p9, &fp.x)),
                Err(e) => errors.push(format!("C_A sampler: {e}")),
            }
        }
        rows.push(ReportRow::check(fam, side, "extension-link", "<x,Px>^2 + <x,P9 x>^2 = 1 on C_A", worst, 1e-10, n));
    }
    Ok((rows, errors))
}

pub fn isofun_report(domain: Domain, samples: usize, levels: &[f64], seed: u64) -> Result<Report> {
    let start = Instant::now();
    let (rows, errors) = isofun_rows(domain, samples, levels, seed)?;
    let mut config = RunConfig::new("isofun");
    config.variant = Some(domain);
    config.samples = samples;
    config.seed = seed;
    config.levels = levels.to_vec();
    Ok(Report::new(config, rows, serde_json::Value::Null, errors, start))
}

// ---------------------------------------------------------------------------
// CSV tables and the pipeline
// ---------------------------------------------------------------------------

fn format_residual(v: f64) -> String {
    format!("{v:.6e}")
}

/// Write `table1.csv` (rows with table 1) and `table2.csv` (table 2) into `dir`.
pub fn write_tables(rows: &[ReportRow], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for table in [1u8, 2] {
        let path = dir.join(format!("table{table}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(CSV_HEADER)?;
        for r in rows.iter().filter(|r| r.table == Some(table)) {
            w.write_record([
                r.family.as_str(),
                r.side.as_str(),
                r.locus.as_str(),
                r.claim.as_str(),
                r.verdict.as_str(),
                &format_residual(r.max_residual),
                &r.samples.to_string(),
            ])?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok((paths[0].clone(), paths[1].clone()))
}

fn row_order(r: &ReportRow) -> (u8, usize, String, usize) {
    let family_rank =
        audited_specs().iter().position(|s| s.label() == r.family && s.side.as_str() == r.side).unwrap_or(usize::MAX);
    let locus_rank = loci::Locus::ALL.iter().position(|l| l.as_str() == r.locus).unwrap_or(usize::MAX);
    (r.table.unwrap_or(u8::MAX), family_rank, r.family.clone(), locus_rank)
}

/// Merge every audit report (`*.json`) found in `input` into the two tables
/// in `out`. Homogeneous families without a construction are appended as
/// "not audited" rows.
pub fn merge_reports(input: &Path, out: &Path) -> Result<(PathBuf, PathBuf)> {
    if !input.is_dir() {
        return Err(Error::MissingInput(format!("{} is not a directory", input.display())));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for f in &files {
        let rep = Report::read_json(f)?;
        rows.extend(rep.rows.into_iter().filter(|r| r.table.is_some()));
    }
    if rows.is_empty() {
        return Err(Error::MissingInput(format!("no audit reports in {}", input.display())));
    }
    rows.extend(not_audited());
    rows.sort_by_key(row_order);
    write_tables(&rows, out)
}

fn audit_file_name(spec: &FamilySpec) -> String {
    let label: String = spec.label().chars().filter(|c| c.is_ascii_alphanumeric() || *c == ',').collect();
    format!("audit_{}_{}.json", label.replace(',', "-"), spec.side.as_str())
}

/// Audit every family on both sides, write one JSON report per audit under
/// `out/reports`, merge them into `out/table1.csv` and `out/table2.csv`, and
/// return a summary report.
pub fn pipeline(samples: usize, seed: u64, out: &Path) -> Result<Report> {
    let start = Instant::now();
    let reports_dir = out.join("reports");
    fs::create_dir_all(&reports_dir)?;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for spec in audited_specs() {
        let rep = audit(&spec, samples, seed)?;
        rep.write_json(&reports_dir.join(audit_file_name(&spec)))?;
        errors.extend(rep.errors.iter().map(|e| format!("{}: {e}", spec.id())));
        rows.extend(rep.rows);
    }
    merge_reports(&reports_dir, out)?;
    let mut config = RunConfig::new("pipeline");
    config.samples = samples;
    config.seed = seed;
    config.out_dir = Some(out.to_path_buf());
    let report = Report::new(config, rows, serde_json::Value::Null, errors, start);
    report.write_json(&out.join("report.json"))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_are_distinct() {
        let names: std::collections::BTreeSet<String> = audited_specs().iter().map(audit_file_name).collect();
        assert_eq!(names.len(), audited_specs().len());
    }

    #[test]
    fn algebra_passes_and_corruption_is_caught() {
        assert!(verify_algebra(64, 1, false).passed());
        let bad = verify_algebra(64, 1, true);
        assert!(!bad.passed());
        assert!(bad.first_failure().is_some());
    }
}
