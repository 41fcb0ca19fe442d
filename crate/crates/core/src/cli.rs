//! Command-line front end. Parsing is done by clap; [`run`] executes a parsed
//! command and returns the text to print together with the exit code, so the
//! whole surface can be driven in-process.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arrangement::build_akl;
use crate::error::Error;
use crate::fibration::{
    coordinate_section_count, enumerate_infinity_points, euler_identity_check, level_set_points,
    preimage_union_check, sample_base_point, sample_fiber_points, transversality_ratio,
    FibrationParams, PreimageReport, RANK_RATIO_TOL, RESIDUAL_TOL,
};
use crate::lattice::{characteristic_polynomial, Flat, Lattice};
use crate::numeric::derive_seed;
use crate::restriction::{restrict_and_identify, restriction_closure_scan, restriction_rows, MonomialType};
use crate::topology::{report, TopologyReport};

pub const DEFAULT_SEED: u64 = 20240607;
pub const BASE_POINTS_PER_TRIPLE: usize = 3;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mirrorcell", version, about = "Monomial arrangements A^k_l(r) and their fibrations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the hyperplanes of A^k_l(r).
    Build(Triple),
    /// Print the intersection lattice with Möbius values.
    Lattice(Triple),
    /// Print the characteristic polynomial.
    Charpoly(Triple),
    /// Restrict A^k_l(r) to a flat (or every flat) and identify the result.
    Restrict(RestrictArgs),
    /// Restrict the reflection arrangement of G(r,p,l) to all its flats.
    Scan(ScanArgs),
    /// Numerical checks of the fibration over the braid arrangement.
    Verify(VerifyArgs),
    /// Genus, punctures and free rank of the fiber, with cross-checks.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct Triple {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub r: usize,
    /// Output format (text by default).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct RestrictArgs {
    #[command(flatten)]
    pub triple: Triple,
    /// Hyperplane indices whose intersection is the flat, e.g. `0,3`.
    #[arg(long, value_delimiter = ',')]
    pub flat: Option<Vec<usize>>,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub l: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Either a single triple or a grid `l ≤ lmax, r ≤ rmax, 0 ≤ k ≤ l`.
#[derive(Args, Debug, Clone)]
pub struct Selection {
    #[arg(long, required_unless_present = "grid")]
    pub k: Option<usize>,
    #[arg(long, required_unless_present = "grid")]
    pub l: Option<usize>,
    #[arg(long, required_unless_present = "grid")]
    pub r: Option<usize>,
    #[arg(long, num_args = 2, value_names = ["LMAX", "RMAX"], conflicts_with_all = ["k", "l", "r"])]
    pub grid: Option<Vec<usize>>,
    #[arg(long, env = "MIRRORCELL_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output format (json by default).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub selection: Selection,
    /// Fiber samples per base point.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// On-wall and off-wall samples for the preimage check.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = RESIDUAL_TOL)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = RANK_RATIO_TOL)]
    pub rank_tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    #[command(flatten)]
    pub selection: Selection,
}

/// What a command prints and the status it exits with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self::with_code(EXIT_OK, stdout)
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Self { code, stdout, stderr: String::new() }
    }

    fn error(e: &Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::Parse { .. } => EXIT_USAGE,
            _ => EXIT_VERIFICATION,
        };
        Self { code, stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome::with_code(code, text)
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Build(t) => cmd_build(t),
        Command::Lattice(t) => cmd_lattice(t),
        Command::Charpoly(t) => cmd_charpoly(t),
        Command::Restrict(a) => cmd_restrict(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    };
    result.unwrap_or_else(|e| Outcome::error(&e))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

#[derive(Serialize)]
struct BuildOutput {
    k: usize,
    l: usize,
    r: usize,
    count: usize,
    canonical: String,
}

fn cmd_build(t: &Triple) -> crate::Result<Outcome> {
    let a = build_akl(t.k, t.l, t.r)?;
    let text = a.to_canonical_text();
    Ok(Outcome::ok(match t.format.unwrap_or(Format::Text) {
        Format::Text => text,
        Format::Json => json(&BuildOutput { k: t.k, l: t.l, r: t.r, count: a.len(), canonical: text }),
    }))
}

#[derive(Serialize)]
struct FlatOutput<'a> {
    rank: usize,
    mobius: Option<i64>,
    hyperplanes: &'a [usize],
}

#[derive(Serialize)]
struct LatticeOutput<'a> {
    k: usize,
    l: usize,
    r: usize,
    rank_sizes: Vec<usize>,
    flats: Vec<FlatOutput<'a>>,
}

fn cmd_lattice(t: &Triple) -> crate::Result<Outcome> {
    let a = build_akl(t.k, t.l, t.r)?;
    let lattice = Lattice::of(&a);
    Ok(Outcome::ok(match t.format.unwrap_or(Format::Text) {
        Format::Text => lattice.to_text(),
        Format::Json => {
            let mut flats: Vec<FlatOutput> = lattice
                .flats()
                .map(|f| FlatOutput { rank: f.rank(), mobius: f.mobius(), hyperplanes: f.containing() })
                .collect();
            flats.sort_by(|a, b| (a.rank, a.hyperplanes).cmp(&(b.rank, b.hyperplanes)));
            json(&LatticeOutput { k: t.k, l: t.l, r: t.r, rank_sizes: lattice.rank_sizes(), flats })
        }
    }))
}

#[derive(Serialize)]
struct CharpolyOutput {
    k: usize,
    l: usize,
    r: usize,
    charpoly: String,
    /// Ascending coefficients.
    coefficients: Vec<i64>,
}

fn cmd_charpoly(t: &Triple) -> crate::Result<Outcome> {
    let a = build_akl(t.k, t.l, t.r)?;
    let chi = characteristic_polynomial(&a);
    let text = chi.display_in("t");
    Ok(Outcome::ok(match t.format.unwrap_or(Format::Text) {
        Format::Text => text + "\n",
        Format::Json => json(&CharpolyOutput {
            k: t.k,
            l: t.l,
            r: t.r,
            charpoly: text,
            coefficients: chi.coeffs().to_vec(),
        }),
    }))
}

#[derive(Serialize)]
struct RestrictOutput {
    flat: Vec<usize>,
    dim: usize,
    induced: String,
    candidates: Vec<MonomialType>,
}

fn cmd_restrict(a: &RestrictArgs) -> crate::Result<Outcome> {
    let t = &a.triple;
    let arr = build_akl(t.k, t.l, t.r)?;
    let format = t.format.unwrap_or(Format::Text);
    match &a.flat {
        Some(idx) => {
            let y = Flat::from_hyperplanes(&arr, idx)?;
            let res = restrict_and_identify(&arr, &y, t.r)?;
            let out = RestrictOutput {
                flat: y.containing().to_vec(),
                dim: y.dim(),
                induced: res.induced.to_canonical_text(),
                candidates: res.candidates,
            };
            Ok(Outcome::ok(match format {
                Format::Json => json(&out),
                Format::Text => {
                    let c: Vec<String> = out.candidates.iter().map(ToString::to_string).collect();
                    format!("{}candidates=[{}]\n", out.induced, c.join(","))
                }
            }))
        }
        None => {
            let rows = restriction_rows(&arr, 1, t.r)?;
            Ok(Outcome::ok(match format {
                Format::Json => json(&rows),
                Format::Text => rows.iter().map(|row| row.to_line() + "\n").collect(),
            }))
        }
    }
}

fn cmd_scan(a: &ScanArgs) -> crate::Result<Outcome> {
    let table = restriction_closure_scan(a.r, a.p, a.l)?;
    let code = if table.unidentified().is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(Outcome::with_code(
        code,
        match a.format.unwrap_or(Format::Text) {
            Format::Json => json(&table),
            Format::Text => table.to_text(),
        },
    ))
}

fn selected_triples(s: &Selection) -> crate::Result<Vec<FibrationParams>> {
    let mut out = Vec::new();
    match &s.grid {
        Some(g) => {
            let (lmax, rmax) = (g[0], g[1]);
            if lmax < 2 || rmax < 1 {
                return Err(crate::error::invalid("grid needs LMAX >= 2 and RMAX >= 1"));
            }
            for l in 2..=lmax {
                for r in 1..=rmax {
                    for k in 0..=l {
                        out.push(FibrationParams::new(k, l, r)?);
                    }
                }
            }
        }
        None => {
            let (k, l, r) = (s.k.unwrap_or(0), s.l.unwrap_or(0), s.r.unwrap_or(0));
            out.push(FibrationParams::new(k, l, r)?);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Checked<T> {
    pub value: T,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TripleVerification {
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub base_points: usize,
    pub samples: Checked<usize>,
    pub max_residual: Checked<f64>,
    pub min_jacobian_ratio: Checked<f64>,
    pub min_hyperplane_distance: Checked<f64>,
    pub infinity_count: Checked<usize>,
    pub bezout: Checked<u64>,
    pub min_transversality_ratio: Checked<f64>,
    pub section_counts: Checked<Vec<usize>>,
    pub euler_identity: Checked<usize>,
    pub preimage_check: Checked<PreimageReport>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
    pub trials: usize,
    pub residual_tol: f64,
    pub rank_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: 100,
            trials: 200,
            residual_tol: RESIDUAL_TOL,
            rank_tol: RANK_RATIO_TOL,
        }
    }
}

fn checked<T>(value: T, pass: bool) -> Checked<T> {
    Checked { value, pass }
}

/// Every fibration check for one triple over [`BASE_POINTS_PER_TRIPLE`]
/// base points. Sampling or enumeration errors end the run for the triple
/// and are kept in `error`.
pub fn verify_triple(p: &FibrationParams, cfg: &VerifyConfig) -> TripleVerification {
    let mut v = TripleVerification {
        k: p.k,
        l: p.l,
        r: p.r,
        base_points: 0,
        samples: checked(0, false),
        max_residual: checked(0.0, true),
        min_jacobian_ratio: checked(f64::INFINITY, true),
        min_hyperplane_distance: checked(f64::INFINITY, true),
        infinity_count: checked(0, true),
        bezout: checked(p.bezout(), p.bezout() == p.infinity_count_formula()),
        min_transversality_ratio: checked(f64::INFINITY, true),
        section_counts: checked(Vec::new(), true),
        euler_identity: checked(0, true),
        preimage_check: checked(
            PreimageReport {
                on_wall_samples: 0,
                max_on_wall_residual: 0.0,
                off_wall_samples: 0,
                min_off_wall_margin: f64::INFINITY,
                pass: false,
            },
            false,
        ),
        error: None,
        pass: false,
    };
    if let Err(e) = fill_verification(&mut v, p, cfg) {
        v.error = Some(e.to_string());
    }
    v.pass = v.error.is_none()
        && v.samples.pass
        && v.max_residual.pass
        && v.min_jacobian_ratio.pass
        && v.min_hyperplane_distance.pass
        && v.infinity_count.pass
        && v.bezout.pass
        && v.min_transversality_ratio.pass
        && v.section_counts.pass
        && v.euler_identity.pass
        && v.preimage_check.pass;
    v
}

fn fill_verification(v: &mut TripleVerification, p: &FibrationParams, cfg: &VerifyConfig) -> crate::Result<()> {
    let tag = [p.k as u64, p.l as u64, p.r as u64];
    let seed_for = |purpose: u64, b: u64| derive_seed(cfg.seed, &[tag[0], tag[1], tag[2], purpose, b]);
    let expected = p.bezout() as usize;
    let mut total = 0;
    for b in 0..BASE_POINTS_PER_TRIPLE as u64 {
        let z = sample_base_point(p.l, seed_for(0, b))?;
        v.base_points += 1;

        let samples = sample_fiber_points(&z, p, cfg.samples, seed_for(1, b))?;
        total += samples.len();
        for s in &samples {
            v.max_residual.value = v.max_residual.value.max(s.residual);
            v.min_jacobian_ratio.value = v.min_jacobian_ratio.value.min(s.jacobian_ratio);
            v.min_hyperplane_distance.value = v.min_hyperplane_distance.value.min(s.min_hyperplane_distance);
        }

        let pts = enumerate_infinity_points(&z, p)?;
        v.infinity_count.value = pts.len();
        v.infinity_count.pass &= pts.len() == expected;
        for q in &pts {
            let ratio = transversality_ratio(q, &z, p);
            v.min_transversality_ratio.value = v.min_transversality_ratio.value.min(ratio);
        }

        let mut counts = Vec::new();
        for i in p.k + 1..=p.l {
            counts.push(coordinate_section_count(&z, p, i)?);
        }
        v.section_counts.pass &= counts.iter().all(|&n| n == expected);
        v.section_counts.value = counts;

        let level = level_set_points(&z, p, cfg.samples.min(50), seed_for(2, b))?;
        if euler_identity_check(p, &z, &level) {
            v.euler_identity.value += level.len();
        } else {
            v.euler_identity.pass = false;
        }
    }
    v.samples = checked(total, total == BASE_POINTS_PER_TRIPLE * cfg.samples);
    v.max_residual.pass = v.max_residual.value <= cfg.residual_tol;
    v.min_jacobian_ratio.pass = v.min_jacobian_ratio.value > cfg.rank_tol;
    v.min_hyperplane_distance.pass = v.min_hyperplane_distance.value > 0.0;
    v.min_transversality_ratio.pass = v.min_transversality_ratio.value > cfg.rank_tol;
    let pre = preimage_union_check(p, cfg.trials, seed_for(3, 0))?;
    v.preimage_check = checked(pre.clone(), pre.pass);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples_per_base_point: usize,
    pub base_points_per_triple: usize,
    pub triples: Vec<TripleVerification>,
    pub pass: bool,
}

pub fn verify_selection(triples: &[FibrationParams], cfg: &VerifyConfig) -> VerifyReport {
    let triples: Vec<TripleVerification> = triples.iter().map(|p| verify_triple(p, cfg)).collect();
    VerifyReport {
        seed: cfg.seed,
        samples_per_base_point: cfg.samples,
        base_points_per_triple: BASE_POINTS_PER_TRIPLE,
        pass: triples.iter().all(|t| t.pass),
        triples,
    }
}

fn verification_line(t: &TripleVerification) -> String {
    let mark = |b: bool| if b { "ok" } else { "FAIL" };
    let mut s = format!(
        "({},{},{}) {} samples={} max_residual={:.3e} min_jacobian={:.3e} infinity={}/{} transversality={:.3e} sections={:?} euler={} preimage={}",
        t.k, t.l, t.r, mark(t.pass), t.samples.value, t.max_residual.value, t.min_jacobian_ratio.value,
        t.infinity_count.value, t.bezout.value, t.min_transversality_ratio.value, t.section_counts.value,
        mark(t.euler_identity.pass), mark(t.preimage_check.pass)
    );
    if let Some(e) = &t.error {
        s += &format!(" error={e}");
    }
    s + "\n"
}

fn cmd_verify(a: &VerifyArgs) -> crate::Result<Outcome> {
    if a.samples == 0 || a.trials == 0 {
        return Err(crate::error::invalid("--samples and --trials must be positive"));
    }
    let cfg = VerifyConfig {
        seed: a.selection.seed,
        samples: a.samples,
        trials: a.trials,
        residual_tol: a.residual_tol,
        rank_tol: a.rank_tol,
    };
    let rep = verify_selection(&selected_triples(&a.selection)?, &cfg);
    let code = if rep.triples.iter().any(|t| t.error.is_some()) {
        EXIT_VERIFICATION
    } else if rep.pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    Ok(Outcome::with_code(
        code,
        match a.selection.format.unwrap_or(Format::Json) {
            Format::Json => json(&rep),
            Format::Text => rep.triples.iter().map(verification_line).collect(),
        },
    ))
}

fn cmd_report(a: &ReportArgs) -> crate::Result<Outcome> {
    let triples = selected_triples(&a.selection)?;
    let reports: Vec<TopologyReport> = triples
        .iter()
        .map(|p| report(p, a.selection.seed))
        .collect::<crate::Result<_>>()?;
    let code = if reports.iter().all(TopologyReport::all_pass) { EXIT_OK } else { EXIT_CHECK_FAILED };
    let out = match a.selection.format.unwrap_or(Format::Json) {
        Format::Json if a.selection.grid.is_none() => json(&reports[0]),
        Format::Json => json(&reports),
        Format::Text => reports.iter().map(|r| r.to_text() + "\n").collect(),
    };
    Ok(Outcome::with_code(code, out))
}
