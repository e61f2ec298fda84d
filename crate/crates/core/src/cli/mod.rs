//! The `ekrf` command line.
//!
//! Every command prints text by default and JSON with `--json`; the numbers
//! are the same either way. Files written with `-o` get a sibling
//! `<file>.manifest.json` recording how they were produced.

pub mod manifest;
mod report;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

pub use manifest::{verify_manifest, RunManifest};
pub use report::{
    parse_grid, render_csv, render_text, report, GridPoint, ReportOptions, ReportRow, CSV_COLUMNS,
};

use crate::conditions::{check_condition, CheckOutcome, ConditionSpec, Variant};
use crate::constructions::{
    construct_star, construct_sunflower, construct_thm6, construct_thm8, f_profile, g_profile,
    rhs_bound, BoundKind, BoundParams,
};
use crate::search::{
    export_cnf, export_ilp, max_family, SearchOptions, Symmetry, DEFAULT_EXHAUSTIVE_THRESHOLD,
};
use crate::setcore::{
    read_family, render_for_path, Family, GroundParams, KSet, DEFAULT_ENUMERATION_CAP,
};
use crate::structure::{find_sunflower, kernel_decompose, lemma_audit, matching_number};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_UNPROVEN: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ekrf",
    version,
    about = "Weakened pair-sum intersection conditions for uniform set families"
)]
pub struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Accepted for compatibility; every algorithm is deterministic.
    #[arg(long, global = true)]
    pub seedless_deterministic: bool,

    /// Worker threads for the checker.
    #[arg(long, global = true, env = "EKRF_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Build a named family.
    Construct(ConstructArgs),
    /// Check a family against a condition (exit 1 on violation).
    Verify(VerifyArgs),
    /// Pair-sum profile of the two-group construction.
    Profile(ProfileArgs),
    /// Evaluate a closed-form size bound.
    Bound(BoundArgs),
    /// Find a maximum family (exit 3 if optimality is unproven).
    Search(SearchArgs),
    /// Structural analysis of a family.
    #[command(subcommand)]
    Structure(StructureCommand),
    /// Write the maximum-family problem for an external solver.
    #[command(subcommand)]
    Export(ExportCommand),
    /// Tabulate bounds, construction sizes and solver optima over a grid.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConditionArgs {
    #[arg(long, default_value_t = 1)]
    pub t: u32,
    /// Tuple size; ignored by `pairwise`.
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub variant: Variant,
    /// Slack of `eq10`.
    #[arg(long, default_value_t = 0)]
    pub s: u32,
}

impl ConditionArgs {
    fn spec(&self) -> anyhow::Result<ConditionSpec> {
        let ell = match (self.variant, self.ell) {
            (Variant::Pairwise, ell) => ell.unwrap_or(2),
            (_, Some(ell)) => ell,
            (v, None) => bail!("--ell is required for variant {v}"),
        };
        Ok(ConditionSpec::new(self.t, ell, self.variant, self.s)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConstructVariant {
    Thm6,
    Thm8,
    Star,
    Sunflower,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub variant: ConstructVariant,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub u: Option<u32>,
    /// Output file (`.json` for JSON, anything else for the text format).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[command(flatten)]
    pub condition: ConditionArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct ProfileArgs {
    #[arg(long, default_value_t = 1)]
    pub t: u32,
    #[arg(long)]
    pub ell: u32,
    /// Profile the slackened `t = 1` construction instead.
    #[arg(long)]
    pub s: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub kind: BoundKind,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[command(flatten)]
    pub condition: ConditionArgs,
    /// Seconds; 0 means no limit.
    #[arg(long, default_value_t = 0.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub node_cap: Option<u64>,
    #[arg(long)]
    pub incumbent: Option<PathBuf>,
    #[arg(long, default_value = "none")]
    pub symmetry: Symmetry,
    /// Enumerate all subfamilies (small instances only).
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_THRESHOLD)]
    pub exhaustive_threshold: u64,
    /// Write the full result as JSON.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "analysis")]
pub enum StructureCommand {
    /// Find a sunflower with a t-element kernel and u petals.
    Sunflower {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        u: usize,
    },
    /// Maximum number of pairwise disjoint members.
    Matching {
        #[arg(long)]
        family: PathBuf,
    },
    /// Split the family around a kernel, e.g. `--kernel 1,2`.
    Decompose {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        kernel: Vec<u32>,
    },
    /// Sunflower-based structural checks.
    Audit {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        ell: u32,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct ExportArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[command(flatten)]
    pub condition: ConditionArgs,
    /// Refuse when more bad tuples than this would be written.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "format")]
pub enum ExportCommand {
    /// LP text format.
    Ilp(ExportArgs),
    /// DIMACS CNF for "a feasible family of at least --target sets exists".
    Cnf {
        #[command(flatten)]
        args: ExportArgs,
        #[arg(long)]
        target: u64,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// Tuples `n,k,t,ell[,s]` separated by `;` or whitespace.
    #[arg(long, default_value = "")]
    pub grid: String,
    /// Read further tuples from a file, one or more per line.
    #[arg(long)]
    pub grid_file: Option<PathBuf>,
    /// Solver budget per row in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub time_limit: f64,
    /// Skip the solver on rows with more candidate sets than this.
    #[arg(long, default_value_t = 400)]
    pub max_candidates: u64,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Where and how a command writes.
struct Ctx {
    json: bool,
    start: Instant,
    params: serde_json::Value,
}

impl Ctx {
    fn print(&self, value: &impl Serialize, text: &str) -> anyhow::Result<()> {
        use std::io::Write;
        let body = if self.json {
            serde_json::to_string_pretty(value)? + "\n"
        } else {
            text.to_string()
        };
        match std::io::stdout().lock().write_all(body.as_bytes()) {
            // a closed pipe (`| head`) is not an error
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        }
    }

    fn write(&self, path: &std::path::Path, bytes: &[u8]) -> anyhow::Result<()> {
        std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        RunManifest::new(
            self.params.clone(),
            self.start.elapsed().as_secs_f64(),
            path,
            bytes,
        )
        .write_beside(path)?;
        Ok(())
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    if let Some(threads) = cli.threads {
        // fails only if a pool already exists, which is harmless here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let ctx = Ctx {
        json: cli.json,
        start: Instant::now(),
        params: serde_json::to_value(&cli.command)?,
    };
    match cli.command {
        Command::Construct(a) => construct(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
        Command::Profile(a) => profile(&ctx, a),
        Command::Bound(a) => bound(&ctx, a),
        Command::Search(a) => search(&ctx, a),
        Command::Structure(a) => structure(&ctx, a),
        Command::Export(a) => export(&ctx, a),
        Command::Report(a) => run_report(&ctx, a),
    }
}

fn need(v: Option<u32>, flag: &str) -> anyhow::Result<u32> {
    v.with_context(|| format!("--{flag} is required here"))
}

fn sets_of(family: &Family, indices: &[usize]) -> Vec<Vec<u32>> {
    indices
        .iter()
        .map(|&i| family.members()[i].to_vec())
        .collect()
}

fn construct(ctx: &Ctx, a: ConstructArgs) -> anyhow::Result<i32> {
    let family = match a.variant {
        ConstructVariant::Thm6 => {
            let (t, ell) = (need(a.t, "t")?, need(a.ell, "ell")?);
            if a.n < ell * a.k {
                eprintln!(
                    "warning: n = {} is below ell*k = {}; the family may not be tight for its condition",
                    a.n,
                    ell * a.k
                );
            }
            construct_thm6(a.n, a.k, t, ell)?
        }
        ConstructVariant::Thm8 => construct_thm8(a.n, a.k, need(a.ell, "ell")?, need(a.s, "s")?)?,
        ConstructVariant::Star => construct_star(a.n, a.k, need(a.t, "t")?)?,
        ConstructVariant::Sunflower => {
            construct_sunflower(a.n, a.k, need(a.t, "t")?, need(a.u, "u")?)?
        }
    };
    match &a.out {
        Some(path) => {
            ctx.write(path, render_for_path(&family, path).as_bytes())?;
            let summary = json!({ "n": a.n, "k": a.k, "size": family.len(), "out": path });
            ctx.print(
                &summary,
                &format!("wrote {} sets to {}\n", family.len(), path.display()),
            )?;
        }
        None => ctx.print(&family, &crate::setcore::serialize_family(&family))?,
    }
    Ok(EXIT_OK)
}

fn verify(ctx: &Ctx, a: VerifyArgs) -> anyhow::Result<i32> {
    let family =
        read_family(&a.family).with_context(|| format!("reading {}", a.family.display()))?;
    let spec = a.condition.spec()?;
    match check_condition(&family, &spec)? {
        CheckOutcome::Satisfied {
            min_pairsum,
            threshold,
        } => {
            let value =
                json!({ "status": "ok", "min_pairsum": min_pairsum, "threshold": threshold });
            let shown = min_pairsum.map_or("none (vacuous)".to_string(), |v| v.to_string());
            ctx.print(
                &value,
                &format!("ok: min pair-sum {shown}, threshold {threshold}\n"),
            )?;
            Ok(EXIT_OK)
        }
        CheckOutcome::Violated(v) => {
            let sets = sets_of(&family, &v.indices);
            let value = json!({
                "status": "violation",
                "indices": v.indices,
                "sets": sets,
                "pair_sum": v.pair_sum,
                "threshold": v.threshold,
            });
            let mut text = format!(
                "violation: pair-sum {} < threshold {}\n",
                v.pair_sum, v.threshold
            );
            for (i, s) in v.indices.iter().zip(&family_sets(&family, &v.indices)) {
                let _ = writeln!(text, "  [{i}] {s}");
            }
            ctx.print(&value, &text)?;
            Ok(EXIT_VIOLATION)
        }
    }
}

fn family_sets(family: &Family, indices: &[usize]) -> Vec<KSet> {
    indices.iter().map(|&i| family.members()[i]).collect()
}

fn profile_text(
    points: &[(u32, i64)],
    min_value: i64,
    argmin: &[u32],
    real: Option<f64>,
) -> String {
    let mut text = format!("{:>4}  {:>8}\n", "x", "value");
    for (x, v) in points {
        let _ = writeln!(text, "{x:>4}  {v:>8}");
    }
    let argmin: Vec<String> = argmin.iter().map(u32::to_string).collect();
    let _ = write!(text, "min {min_value} at x = {}", argmin.join(","));
    if let Some(r) = real {
        let _ = write!(text, " (real argmin {r:.4})");
    }
    text.push('\n');
    text
}

fn profile(ctx: &Ctx, a: ProfileArgs) -> anyhow::Result<i32> {
    match a.s {
        None => {
            let p = f_profile(a.t, a.ell)?;
            let points: Vec<(u32, i64)> = p.points.iter().map(|q| (q.x, q.value)).collect();
            ctx.print(
                &p,
                &profile_text(&points, p.min_value, &p.argmin, p.real_argmin),
            )?;
        }
        Some(s) => {
            if a.t != 1 {
                bail!("--s profiles the t = 1 construction; got --t {}", a.t);
            }
            let g = g_profile(a.ell, s)?;
            let points: Vec<(u32, i64)> = g.profile.points.iter().map(|q| (q.x, q.value)).collect();
            let mut text = profile_text(
                &points,
                g.profile.min_value,
                &g.profile.argmin,
                g.profile.real_argmin,
            );
            let _ = writeln!(
                text,
                "threshold {}; minimum at ell-2: {}; meets threshold: {}; 2s+1 <= ell: {}",
                g.threshold, g.min_at_ell_minus_2, g.meets_threshold, g.within_hypothesis
            );
            ctx.print(&g, &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn bound(ctx: &Ctx, a: BoundArgs) -> anyhow::Result<i32> {
    let params = BoundParams {
        n: Some(a.n),
        k: Some(a.k),
        t: a.t,
        ell: a.ell,
        s: a.s,
    };
    let value = rhs_bound(a.kind, &params)?;
    // as a string: the value may not fit a JSON number
    ctx.print(
        &json!({ "kind": a.kind, "value": value.to_string() }),
        &format!("{value}\n"),
    )?;
    Ok(EXIT_OK)
}

fn search(ctx: &Ctx, a: SearchArgs) -> anyhow::Result<i32> {
    let params = GroundParams::new(a.n, a.k)?;
    let spec = a.condition.spec()?;
    let incumbent = match &a.incumbent {
        Some(path) => {
            Some(read_family(path).with_context(|| format!("reading {}", path.display()))?)
        }
        None => None,
    };
    let opts = SearchOptions {
        time_limit: a.time_limit,
        incumbent,
        node_cap: a.node_cap,
        symmetry: a.symmetry,
        exhaustive: a.exhaustive,
        exhaustive_threshold: a.exhaustive_threshold,
    };
    let result = max_family(params, &spec, &opts)?;
    if let Some(path) = &a.out {
        ctx.write(path, render_for_path(&result.best, path).as_bytes())?;
    }
    let text = format!(
        "size {} ({}), bound {}, nodes {}, {:.3}s\n",
        result.size,
        if result.optimal {
            "optimal"
        } else {
            "unproven"
        },
        result.bound,
        result.nodes,
        result.elapsed
    );
    ctx.print(&result, &text)?;
    Ok(if result.optimal {
        EXIT_OK
    } else {
        EXIT_UNPROVEN
    })
}

fn structure(ctx: &Ctx, cmd: StructureCommand) -> anyhow::Result<i32> {
    let load = |p: &PathBuf| read_family(p).with_context(|| format!("reading {}", p.display()));
    match cmd {
        StructureCommand::Sunflower { family, t, u } => {
            let family = load(&family)?;
            match find_sunflower(&family, t, u)? {
                Some(s) => {
                    let value = json!({
                        "found": true,
                        "kernel": s.kernel,
                        "member_indices": s.member_indices,
                        "members": sets_of(&family, &s.member_indices),
                        "petal_count": s.petal_count,
                    });
                    ctx.print(
                        &value,
                        &format!(
                            "kernel {} with {} petals: members {:?}\n",
                            s.kernel, s.petal_count, s.member_indices
                        ),
                    )?;
                }
                None => ctx.print(&json!({ "found": false }), "no sunflower\n")?,
            }
        }
        StructureCommand::Matching { family } => {
            let family = load(&family)?;
            let m = matching_number(&family);
            let value = json!({
                "nu": m.nu,
                "witness": m.witness,
                "members": sets_of(&family, &m.witness),
            });
            ctx.print(
                &value,
                &format!("matching number {}: members {:?}\n", m.nu, m.witness),
            )?;
        }
        StructureCommand::Decompose { family, kernel } => {
            let family = load(&family)?;
            if let Some(&bad) = kernel.iter().find(|&&e| e == 0 || e > family.params().n()) {
                bail!(
                    "kernel element {bad} is outside [1, {}]",
                    family.params().n()
                );
            }
            let d = kernel_decompose(&family, KSet::from_elements(&kernel))?;
            let minus: serde_json::Map<String, serde_json::Value> = d
                .f_minus
                .iter()
                .map(|(a, part)| {
                    (
                        a.to_string(),
                        serde_json::to_value(part).expect("family serializes"),
                    )
                })
                .collect();
            let value = json!({
                "kernel": d.kernel,
                "f_t": d.f_t,
                "f_minus": minus,
                "leftover": d.leftover,
                "sizes": {
                    "f_t": d.f_t.len(),
                    "f_minus": d.f_minus.iter().map(|(a, p)| (a.to_string(), p.len())).collect::<std::collections::BTreeMap<_, _>>(),
                    "leftover": d.leftover.len(),
                },
            });
            let mut text = format!("kernel {}\n  F(T): {}\n", d.kernel, d.f_t.len());
            for (a, part) in &d.f_minus {
                let _ = writeln!(text, "  F(T-{{{a}}}, not {a}): {}", part.len());
            }
            let _ = writeln!(text, "  leftover: {}", d.leftover.len());
            ctx.print(&value, &text)?;
        }
        StructureCommand::Audit { family, t, ell } => {
            let family = load(&family)?;
            let r = lemma_audit(&family, t, ell)?;
            let mut text = match &r.case {
                crate::structure::AuditCase::Sunflower { kernel, .. } => {
                    format!(
                        "sunflower with {} petals, kernel {:?}\n",
                        r.petals_required, kernel
                    )
                }
                crate::structure::AuditCase::NoSunflower => {
                    format!(
                        "no sunflower with {} petals; checks not applicable\n",
                        r.petals_required
                    )
                }
            };
            for c in &r.checks {
                let _ = writeln!(
                    text,
                    "  {:<28} {} {}",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.witness
                        .as_ref()
                        .map(|w| format!("{w:?}"))
                        .unwrap_or_default()
                );
            }
            ctx.print(&r, &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn export(ctx: &Ctx, cmd: ExportCommand) -> anyhow::Result<i32> {
    let (args, body) = match &cmd {
        ExportCommand::Ilp(args) => {
            let params = GroundParams::new(args.n, args.k)?;
            (args, export_ilp(params, &args.condition.spec()?, args.cap)?)
        }
        ExportCommand::Cnf { args, target } => {
            let params = GroundParams::new(args.n, args.k)?;
            (
                args,
                export_cnf(params, &args.condition.spec()?, *target, args.cap)?,
            )
        }
    };
    ctx.write(&args.out, body.as_bytes())?;
    ctx.print(
        &json!({ "out": args.out, "bytes": body.len() }),
        &format!("wrote {} ({} bytes)\n", args.out.display(), body.len()),
    )?;
    Ok(EXIT_OK)
}

fn run_report(ctx: &Ctx, a: ReportArgs) -> anyhow::Result<i32> {
    let mut text = a.grid.clone();
    if let Some(path) = &a.grid_file {
        text.push('\n');
        text.push_str(
            &std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?,
        );
    }
    let grid = parse_grid(&text)?;
    let rows = report(
        &grid,
        &ReportOptions {
            time_limit: a.time_limit,
            max_candidates: a.max_candidates,
        },
    );
    if let Some(path) = &a.csv {
        ctx.write(path, render_csv(&rows).as_bytes())?;
    }
    ctx.print(&rows, &render_text(&rows))?;
    Ok(EXIT_OK)
}
