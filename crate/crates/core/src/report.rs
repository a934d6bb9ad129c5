//! Suite runner and report encoders.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::briot_bouquet::{correspondence_entry, theorem_instance, Theorem};
use crate::error::{Error, Result};
use crate::fuchs::{fuchs_report, BalanceAnalysis};
use crate::sampling::sample_family;
use crate::schwarzian::{CanonicalRow, RowParams};
use crate::{c64, Complex};

/// Serializes a complex number as `[re, im]`.
pub mod complex_pair {
    use crate::Complex;
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }
}

pub(crate) fn optional_complex_pair<S: serde::Serializer>(
    c: &Option<crate::Complex>,
    s: S,
) -> Result<S::Ok, S::Error> {
    c.map(|c| [c.re, c.im]).serialize(s)
}

pub(crate) fn complex_pairs<S: serde::Serializer>(
    cs: &[crate::Complex],
    s: S,
) -> Result<S::Ok, S::Error> {
    cs.iter()
        .map(|c| [c.re, c.im])
        .collect::<Vec<_>>()
        .serialize(s)
}

/// Bound on `|P(−1)|` and on the indicial pattern error.
pub const FUCHS_TOL: f64 = 1e-8;
/// Non-(−1) indices closer than this to an integer count as integral.
pub const MIN_INTEGER_DISTANCE: f64 = 0.2;
/// Bound on the disagreement between the two invariant derivations.
pub const ROUTE_TOL: f64 = 1e-6;
/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "ELLCORR_THREADS";
const RNG_NAME: &str = "ChaCha8 (rand_chacha), seed_from_u64(seed), one stream per row";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            _ => Err(Error::Config(format!(
                "unknown format `{s}` (json, csv, text)"
            ))),
        }
    }
}

/// Per-row parameter overrides. Unset fields keep the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RowOverride {
    pub g2: Option<Complex>,
    pub g3: Option<Complex>,
    pub a: Option<Complex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    /// Rows to run; empty means all six (and the theorem instances).
    pub rows: Vec<usize>,
    pub overrides: BTreeMap<usize, RowOverride>,
    /// Values of `L` for the two theorem instances.
    pub l_values: Vec<Complex>,
    pub format: Format,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            samples: 32,
            seed: 42,
            rows: Vec::new(),
            overrides: BTreeMap::new(),
            l_values: vec![c64(1.0, 0.0), c64(0.0, 2.0), c64(1.5, 0.0)],
            format: Format::Json,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!(
                "tol must be positive and finite, got {}",
                self.tol
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if let Some(r) = self
            .rows
            .iter()
            .chain(self.overrides.keys())
            .find(|r| !(1..=6).contains(*r))
        {
            return Err(Error::Config(format!("row index {r} outside 1..=6")));
        }
        if self.l_values.contains(&Complex::ZERO) {
            return Err(Error::ZeroL);
        }
        Ok(())
    }

    fn selected_rows(&self) -> Vec<usize> {
        if self.rows.is_empty() {
            (1..=6).collect()
        } else {
            let mut r = self.rows.clone();
            r.sort_unstable();
            r.dedup();
            r
        }
    }

    /// Default parameters of `index` with any overrides applied.
    pub fn row_params(&self, index: usize) -> RowParams {
        let mut p = RowParams::defaults(index, self.seed);
        if let Some(o) = self.overrides.get(&index) {
            p.g2 = o.g2.unwrap_or(p.g2);
            p.g3 = o.g3.unwrap_or(p.g3);
            p.a = o.a.unwrap_or(p.a);
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamsRecord {
    #[serde(with = "complex_pair")]
    pub g2: Complex,
    #[serde(with = "complex_pair")]
    pub g3: Complex,
    #[serde(with = "complex_pair")]
    pub a: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowRecord {
    pub row: usize,
    pub family: String,
    pub p: u32,
    pub rhs: String,
    pub params: ParamsRecord,
    pub degenerate: bool,
    pub max_residual: f64,
    pub samples: usize,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuchsRecord {
    pub row: usize,
    pub q: Option<i32>,
    #[serde(serialize_with = "optional_complex_pair")]
    pub u0: Option<Complex>,
    /// Pole of `R` used as the chart centre, if any.
    #[serde(serialize_with = "optional_complex_pair")]
    pub tau: Option<Complex>,
    /// Monic cubic coefficients, constant term first.
    #[serde(serialize_with = "complex_pairs")]
    pub indicial: Vec<Complex>,
    #[serde(serialize_with = "complex_pairs")]
    pub indices: Vec<Complex>,
    #[serde(rename = "K", serialize_with = "optional_complex_pair")]
    pub k: Option<Complex>,
    pub pattern_error: Option<f64>,
    pub minus_one_residual: Option<f64>,
    pub series_residual: Option<f64>,
    /// Distance of the nearest non-(−1) index to an integer.
    pub min_integer_distance: Option<f64>,
    pub free_constants: usize,
    pub note: Option<String>,
    pub pass: bool,
    pub error: Option<String>,
}

impl FuchsRecord {
    fn empty(row: usize) -> Self {
        Self {
            row,
            q: None,
            u0: None,
            tau: None,
            indicial: Vec::new(),
            indices: Vec::new(),
            k: None,
            pattern_error: None,
            minus_one_residual: None,
            series_residual: None,
            min_integer_distance: None,
            free_constants: 0,
            note: None,
            pass: false,
            error: None,
        }
    }

    fn from_analysis(row: usize, a: &BalanceAnalysis) -> Self {
        let pass = a.pattern_error < FUCHS_TOL
            && a.minus_one_residual < FUCHS_TOL
            && a.series_residual < FUCHS_TOL
            && a.min_integer_distance > MIN_INTEGER_DISTANCE;
        Self {
            q: Some(a.balance.q),
            u0: Some(a.balance.u0),
            tau: a.balance.tau,
            indicial: a.indicial.coeffs.to_vec(),
            indices: a.indicial.roots.to_vec(),
            k: Some(a.k),
            pattern_error: Some(a.pattern_error),
            minus_one_residual: Some(a.minus_one_residual),
            series_residual: Some(a.series_residual),
            min_integer_distance: Some(a.min_integer_distance),
            free_constants: a.free_constants,
            pass,
            ..Self::empty(row)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceRecord {
    pub row: usize,
    pub k: Option<u32>,
    pub family: String,
    pub fitted_rhs: Option<String>,
    pub fit_residual: Option<f64>,
    pub schwarzian_residual: Option<f64>,
    pub binomial_residual: Option<f64>,
    pub samples: usize,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremRecord {
    pub theorem: String,
    pub k: u32,
    #[serde(with = "complex_pair")]
    pub l: Complex,
    pub invariant_name: String,
    #[serde(serialize_with = "optional_complex_pair")]
    pub invariant: Option<Complex>,
    #[serde(serialize_with = "optional_complex_pair")]
    pub scan_invariant: Option<Complex>,
    pub route_disagreement: Option<f64>,
    pub max_residual: Option<f64>,
    pub samples: usize,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    pub rng: String,
    pub pass: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schwarzian_rows: Vec<RowRecord>,
    pub fuchs: Vec<FuchsRecord>,
    pub correspondence: Vec<CorrespondenceRecord>,
    pub binomial_theorems: Vec<TheoremRecord>,
    pub meta: Meta,
}

impl VerificationReport {
    pub fn empty() -> Self {
        Self {
            schwarzian_rows: Vec::new(),
            fuchs: Vec::new(),
            correspondence: Vec::new(),
            binomial_theorems: Vec::new(),
            meta: Meta {
                seed: 0,
                tol: 0.0,
                samples: 0,
                rng: String::new(),
                pass: true,
                wall_time_s: 0.0,
            },
        }
    }

    /// True iff every record passes.
    pub fn all_pass(&self) -> bool {
        self.schwarzian_rows.iter().all(|r| r.pass)
            && self.fuchs.iter().all(|r| r.pass)
            && self.correspondence.iter().all(|r| r.pass)
            && self.binomial_theorems.iter().all(|r| r.pass)
    }

    /// Process exit code: 0 iff every record passes.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    /// Copy with the wall time zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.meta.wall_time_s = 0.0;
        r
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Schwarzian residual record of one row.
pub fn row_record(cfg: &SuiteConfig, index: usize) -> RowRecord {
    let params = cfg.row_params(index);
    let mut rec = RowRecord {
        row: index,
        family: crate::schwarzian::ROW_FAMILIES[index - 1].name().into(),
        p: crate::schwarzian::ROW_EXPONENTS[index - 1],
        rhs: String::new(),
        params: ParamsRecord {
            g2: params.g2,
            g3: params.g3,
            a: params.a,
        },
        degenerate: false,
        max_residual: f64::INFINITY,
        samples: 0,
        pass: false,
        error: None,
    };
    let run = || -> Result<(CanonicalRow, f64, usize)> {
        let row = CanonicalRow::new(index, params)?;
        let pts = sample_family(&row.family, cfg.samples, cfg.seed, index as u64)?;
        let mut worst = 0.0f64;
        for p in &pts {
            worst = worst.max(row.eq.residual(&p.jet)?.norm());
        }
        Ok((row, worst, pts.len()))
    };
    match run() {
        Ok((row, worst, n)) => {
            rec.rhs = row.eq.rhs().to_string();
            rec.degenerate = row.is_degenerate();
            rec.max_residual = worst;
            rec.samples = n;
            rec.pass = worst < cfg.tol;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// One record per dominant balance of the row, or a single note record.
pub fn fuchs_records(cfg: &SuiteConfig, index: usize) -> Vec<FuchsRecord> {
    let report =
        CanonicalRow::new(index, cfg.row_params(index)).and_then(|row| fuchs_report(&row.eq));
    match report {
        Ok(rep) if rep.balances.is_empty() => vec![FuchsRecord {
            free_constants: rep.free_constants,
            note: rep.note,
            pass: true,
            ..FuchsRecord::empty(index)
        }],
        Ok(rep) => rep
            .balances
            .iter()
            .map(|a| FuchsRecord::from_analysis(index, a))
            .collect(),
        Err(e) => vec![FuchsRecord {
            error: Some(e.to_string()),
            ..FuchsRecord::empty(index)
        }],
    }
}

fn correspondence_record(cfg: &SuiteConfig, index: usize) -> CorrespondenceRecord {
    let mut rec = CorrespondenceRecord {
        row: index,
        k: None,
        family: crate::schwarzian::ROW_FAMILIES[index - 1].name().into(),
        fitted_rhs: None,
        fit_residual: None,
        schwarzian_residual: None,
        binomial_residual: None,
        samples: 0,
        pass: false,
        error: None,
    };
    match CanonicalRow::new(index, cfg.row_params(index))
        .and_then(|row| correspondence_entry(&row, cfg.samples, cfg.seed))
    {
        Ok(e) => {
            rec.pass = e.passes(cfg.tol);
            rec.k = Some(e.binomial.k);
            rec.fitted_rhs = Some(e.binomial.rhs.to_string());
            rec.fit_residual = Some(e.fit_residual);
            rec.schwarzian_residual = Some(e.schwarzian_residual);
            rec.binomial_residual = Some(e.binomial_residual);
            rec.samples = e.samples;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

fn theorem_record(cfg: &SuiteConfig, thm: Theorem, l: Complex, stream: u64) -> TheoremRecord {
    let (name, inv) = match thm {
        Theorem::Five => ("thm5", "g3"),
        Theorem::Six => ("thm6", "g2"),
    };
    let mut rec = TheoremRecord {
        theorem: name.into(),
        k: thm.k(),
        l,
        invariant_name: inv.into(),
        invariant: None,
        scan_invariant: None,
        route_disagreement: None,
        max_residual: None,
        samples: 0,
        pass: false,
        error: None,
    };
    let mut run = || -> Result<()> {
        let t = theorem_instance(thm, l)?;
        rec.invariant = Some(t.invariant);
        rec.scan_invariant = Some(t.scan_invariant);
        rec.route_disagreement = Some(t.route_disagreement());
        let pts = sample_family(&t.family, cfg.samples, cfg.seed, stream)?;
        let mut worst = 0.0f64;
        for p in &pts {
            worst = worst.max(crate::briot_bouquet::residual_binomial(&t.eq, &p.jet)?.norm());
        }
        rec.max_residual = Some(worst);
        rec.samples = pts.len();
        rec.pass = worst < cfg.tol && t.route_disagreement() < ROUTE_TOL;
        Ok(())
    };
    if let Err(e) = run() {
        rec.error = Some(e.to_string());
    }
    rec
}

/// Runs every certification selected by `cfg`. Row failures are recorded in
/// the report; only configuration errors are returned.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let rows = cfg.selected_rows();
    let pool = thread_pool()?;
    let mut report = pool.install(|| {
        let schwarzian_rows: Vec<_> = rows.par_iter().map(|&i| row_record(cfg, i)).collect();
        let fuchs: Vec<_> = rows
            .par_iter()
            .flat_map_iter(|&i| fuchs_records(cfg, i))
            .collect();
        let correspondence: Vec<_> = rows
            .par_iter()
            .filter(|&&i| i <= 4)
            .map(|&i| correspondence_record(cfg, i))
            .collect();
        let binomial_theorems: Vec<_> = if cfg.rows.is_empty() {
            let jobs: Vec<_> = [Theorem::Five, Theorem::Six]
                .into_iter()
                .flat_map(|t| cfg.l_values.iter().map(move |&l| (t, l)))
                .enumerate()
                .collect();
            jobs.par_iter()
                .map(|&(n, (t, l))| theorem_record(cfg, t, l, 2_000 + n as u64))
                .collect()
        } else {
            Vec::new()
        };
        VerificationReport {
            schwarzian_rows,
            fuchs,
            correspondence,
            binomial_theorems,
            meta: Meta {
                seed: cfg.seed,
                tol: cfg.tol,
                samples: cfg.samples,
                rng: RNG_NAME.into(),
                pass: false,
                wall_time_s: 0.0,
            },
        }
    });
    report.meta.pass = report.all_pass();
    report.meta.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Only the Fuchs section for the selected rows.
pub fn run_fuchs(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let rows = cfg.selected_rows();
    let fuchs = thread_pool()?.install(|| {
        rows.par_iter()
            .flat_map_iter(|&i| fuchs_records(cfg, i))
            .collect()
    });
    let mut report = VerificationReport {
        fuchs,
        ..VerificationReport::empty()
    };
    report.meta = Meta {
        seed: cfg.seed,
        tol: cfg.tol,
        samples: cfg.samples,
        rng: RNG_NAME.into(),
        pass: report.all_pass(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(report)
}

/// Encodes the report in the requested format.
pub fn emit(report: &VerificationReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut out = String::new();
            for (name, body) in csv_sections(report) {
                let _ = writeln!(out, "# {name}");
                out.push_str(&body);
                out.push('\n');
            }
            out.into_bytes()
        }
        Format::Text => text(report).into_bytes(),
    }
}

/// Shortest round-trip form, scientific where that is shorter.
fn fnum(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float")
    } else {
        x.to_string()
    }
}

fn fmt_c(c: Complex) -> String {
    if c.im.abs() <= 1e-12 * c.re.abs().max(1.0) {
        fnum(c.re)
    } else if c.im < 0.0 {
        format!("{}-{}i", fnum(c.re), fnum(-c.im))
    } else {
        format!("{}+{}i", fnum(c.re), fnum(c.im))
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn optf(x: Option<f64>) -> String {
    x.map(fnum).unwrap_or_default()
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// One CSV document per section, keyed by section name.
pub fn csv_sections(report: &VerificationReport) -> Vec<(&'static str, String)> {
    let rows = csv_table(
        &["row", "family", "p", "max_residual", "samples", "pass"],
        report.schwarzian_rows.iter().map(|r| {
            vec![
                r.row.to_string(),
                r.family.clone(),
                r.p.to_string(),
                fnum(r.max_residual),
                r.samples.to_string(),
                r.pass.to_string(),
            ]
        }),
    );
    let fuchs = csv_table(
        &["row", "q", "u0_re", "u0_im", "K", "idx1", "idx2", "idx3"],
        report.fuchs.iter().map(|r| {
            let idx = |i: usize| r.indices.get(i).map(|c| fmt_c(*c)).unwrap_or_default();
            vec![
                r.row.to_string(),
                opt(r.q),
                optf(r.u0.map(|c| c.re)),
                optf(r.u0.map(|c| c.im)),
                opt(r.k.map(fmt_c)),
                idx(0),
                idx(1),
                idx(2),
            ]
        }),
    );
    let corr = csv_table(
        &[
            "row",
            "k",
            "family",
            "fitted_rhs",
            "fit_residual",
            "schwarzian_residual",
            "binomial_residual",
            "pass",
        ],
        report.correspondence.iter().map(|r| {
            vec![
                r.row.to_string(),
                opt(r.k),
                r.family.clone(),
                r.fitted_rhs.clone().unwrap_or_default(),
                optf(r.fit_residual),
                optf(r.schwarzian_residual),
                optf(r.binomial_residual),
                r.pass.to_string(),
            ]
        }),
    );
    let thms = csv_table(
        &[
            "theorem",
            "k",
            "L",
            "invariant_name",
            "invariant",
            "scan_invariant",
            "max_residual",
            "pass",
        ],
        report.binomial_theorems.iter().map(|r| {
            vec![
                r.theorem.clone(),
                r.k.to_string(),
                fmt_c(r.l),
                r.invariant_name.clone(),
                opt(r.invariant.map(fmt_c)),
                opt(r.scan_invariant.map(fmt_c)),
                optf(r.max_residual),
                r.pass.to_string(),
            ]
        }),
    );
    let m = &report.meta;
    let meta = csv_table(
        &["seed", "tol", "samples", "pass", "wall_time_s"],
        [vec![
            m.seed.to_string(),
            fnum(m.tol),
            m.samples.to_string(),
            m.pass.to_string(),
            fnum(m.wall_time_s),
        ]],
    );
    vec![
        ("schwarzian_rows", rows),
        ("fuchs", fuchs),
        ("correspondence", corr),
        ("binomial_theorems", thms),
        ("meta", meta),
    ]
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "ok"
    } else {
        "FAIL"
    }
}

fn text(report: &VerificationReport) -> String {
    let mut s = String::new();
    if !report.schwarzian_rows.is_empty() {
        let _ = writeln!(s, "Schwarzian rows  {{u;z}}^p = R(u)");
        let _ = writeln!(
            s,
            "{:>3}  {:<12} {:>2}  {:>12}  {:>7}  status",
            "row", "family", "p", "max resid", "samples"
        );
        for r in &report.schwarzian_rows {
            let _ = writeln!(
                s,
                "{:>3}  {:<12} {:>2}  {:>12.3e}  {:>7}  {}{}",
                r.row,
                r.family,
                r.p,
                r.max_residual,
                r.samples,
                mark(r.pass),
                r.error
                    .as_deref()
                    .map(|e| format!(" ({e})"))
                    .unwrap_or_default()
            );
        }
        s.push('\n');
    }
    if !report.fuchs.is_empty() {
        let _ = writeln!(s, "Fuchs indices  (j+1)(j^2-j-K)");
        let _ = writeln!(
            s,
            "{:>3}  {:>3}  {:<22} {:>8}  {:<32} status",
            "row", "q", "u0", "K", "indices"
        );
        for r in &report.fuchs {
            if r.q.is_none() {
                let _ = writeln!(
                    s,
                    "{:>3}  no pole balance, {} free constants{}",
                    r.row,
                    r.free_constants,
                    r.error
                        .as_deref()
                        .map(|e| format!(" ({e})"))
                        .unwrap_or_default()
                );
                continue;
            }
            let idx: Vec<String> = r.indices.iter().map(|c| short_c(*c)).collect();
            let _ = writeln!(
                s,
                "{:>3}  {:>3}  {:<22} {:>8}  {:<32} {}",
                r.row,
                opt(r.q),
                r.u0.map(short_c).unwrap_or_default(),
                r.k.map(short_c).unwrap_or_default(),
                idx.join(", "),
                mark(r.pass)
            );
        }
        s.push('\n');
    }
    if !report.correspondence.is_empty() {
        let _ = writeln!(s, "Correspondence  (u')^k = R(u)");
        for r in &report.correspondence {
            let _ = writeln!(
                s,
                "{:>3}  k={}  {:<8} R = {}  [fit {:.1e}, schwarzian {:.1e}, binomial {:.1e}]  {}",
                r.row,
                opt(r.k),
                r.family,
                r.fitted_rhs.as_deref().unwrap_or("-"),
                r.fit_residual.unwrap_or(f64::NAN),
                r.schwarzian_residual.unwrap_or(f64::NAN),
                r.binomial_residual.unwrap_or(f64::NAN),
                mark(r.pass)
            );
        }
        s.push('\n');
    }
    if !report.binomial_theorems.is_empty() {
        let _ = writeln!(s, "Binomial theorem instances");
        for r in &report.binomial_theorems {
            let _ = writeln!(
                s,
                "{}  L={:<8} {}={:<28} scan agrees to {:.1e}  max resid {:.1e}  {}",
                r.theorem,
                short_c(r.l),
                r.invariant_name,
                r.invariant.map(short_c).unwrap_or_default(),
                r.route_disagreement.unwrap_or(f64::NAN),
                r.max_residual.unwrap_or(f64::NAN),
                mark(r.pass)
            );
        }
        s.push('\n');
    }
    let m = &report.meta;
    let _ = writeln!(
        s,
        "seed {}  tol {:e}  samples {}  {:.3}s  overall {}",
        m.seed,
        m.tol,
        m.samples,
        m.wall_time_s,
        if m.pass { "PASS" } else { "FAIL" }
    );
    s
}

fn short_c(c: Complex) -> String {
    let r = |x: f64| {
        let t = format!("{x:.6}");
        let t = t.trim_end_matches('0').trim_end_matches('.').to_string();
        if t == "-0" {
            "0".into()
        } else {
            t
        }
    };
    if c.im.abs() < 5e-7 {
        r(c.re)
    } else if c.re.abs() < 5e-7 {
        format!("{}i", r(c.im))
    } else if c.im < 0.0 {
        format!("{}-{}i", r(c.re), r(-c.im))
    } else {
        format!("{}+{}i", r(c.re), r(c.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(rows: &[usize]) -> SuiteConfig {
        SuiteConfig {
            rows: rows.to_vec(),
            samples: 8,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn empty_report_is_valid_json() {
        let bytes = emit(&VerificationReport::empty(), Format::Json);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        for key in ["schwarzian_rows", "fuchs", "correspondence"] {
            assert_eq!(v[key], serde_json::json!([]));
        }
        assert!(v["meta"].is_object());
    }

    #[test]
    fn json_round_trips() {
        let rep = run_suite(&quick(&[2, 5])).unwrap();
        let bytes = emit(&rep, Format::Json);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let again: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(again, v);
        assert_eq!(v["fuchs"][0]["u0"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn fuchs_csv_header() {
        let rep = run_suite(&quick(&[1])).unwrap();
        let (_, fuchs) = csv_sections(&rep)
            .into_iter()
            .find(|(n, _)| *n == "fuchs")
            .unwrap();
        assert_eq!(
            fuchs.lines().next().unwrap(),
            "row,q,u0_re,u0_im,K,idx1,idx2,idx3"
        );
        let rec: Vec<&str> = fuchs.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(rec[..2], ["1", "-2"]);
        let num = |i: usize| rec[i].parse::<f64>().unwrap();
        assert!(
            (num(2) - 1.0).abs() < 1e-10 && num(3).abs() < 1e-10 && (num(4) - 3.0).abs() < 1e-8
        );
    }

    #[test]
    fn config_errors_abort() {
        for cfg in [
            SuiteConfig {
                tol: 0.0,
                ..quick(&[])
            },
            SuiteConfig {
                samples: 0,
                ..quick(&[])
            },
            quick(&[7]),
        ] {
            assert!(matches!(run_suite(&cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn tight_tolerance_fails_with_floors() {
        let rep = run_suite(&SuiteConfig {
            tol: 1e-20,
            ..quick(&[1, 2])
        })
        .unwrap();
        assert_eq!(rep.exit_code(), 1);
        for r in &rep.schwarzian_rows {
            assert!(!r.pass && r.max_residual.is_finite() && r.max_residual > 0.0);
        }
    }

    #[test]
    fn overrides_apply() {
        let mut cfg = quick(&[2]);
        cfg.overrides.insert(
            2,
            RowOverride {
                g3: Some(c64(3.0, 0.0)),
                ..Default::default()
            },
        );
        let rep = run_suite(&cfg).unwrap();
        assert_eq!(rep.schwarzian_rows[0].params.g3, c64(3.0, 0.0));
        assert!(rep.schwarzian_rows[0].pass);
    }

    #[test]
    fn text_mentions_every_row() {
        let rep = run_suite(&quick(&[3, 6])).unwrap();
        let t = text(&rep);
        assert!(t.contains("wp2") && t.contains("mobius_exp") && t.contains("3 free constants"));
    }
}
