//! Bound versus construction versus solver, one row per parameter tuple.
//!
//! Rows without `s` use the `t`-intersecting two-group construction, its
//! closed-form bound and the `eq4` condition; rows with `s` use the
//! slackened `t = 1` construction and `eq10`.

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::conditions::{ConditionSpec, Variant};
use crate::constructions::{construct_thm6, construct_thm8, rhs_bound, BoundKind, BoundParams};
use crate::error::{Error, Result};
use crate::search::{max_family, SearchOptions};
use crate::setcore::{Family, GroundParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridPoint {
    pub n: u32,
    pub k: u32,
    pub t: u32,
    pub ell: u32,
    pub s: Option<u32>,
}

/// Tuples `n,k,t,ell` or `n,k,t,ell,s`, separated by `;`, whitespace or
/// newlines. `#` starts a comment.
pub fn parse_grid(text: &str) -> Result<Vec<GridPoint>> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for item in line
            .split(|c: char| c == ';' || c.is_whitespace())
            .filter(|s| !s.is_empty())
        {
            let nums: Vec<u32> = item
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(line_no + 1, format!("bad grid tuple `{item}`")))?;
            let point = match nums[..] {
                [n, k, t, ell] => GridPoint {
                    n,
                    k,
                    t,
                    ell,
                    s: None,
                },
                [n, k, t, ell, s] => GridPoint {
                    n,
                    k,
                    t,
                    ell,
                    s: Some(s),
                },
                _ => {
                    return Err(Error::parse(
                        line_no + 1,
                        format!("grid tuple `{item}` needs 4 or 5 numbers"),
                    ))
                }
            };
            out.push(point);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    /// Solver seconds per row.
    pub time_limit: f64,
    /// Rows with more candidate sets skip the solver.
    pub max_candidates: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            time_limit: 10.0,
            max_candidates: 400,
        }
    }
}

/// `agreement` is one of
/// `tight` (bound = construction = proven optimum),
/// `match` (bound = construction, optimum not shown equal),
/// `exceeded` (the solver beat the bound; n is too small for it),
/// `mismatch` (construction size differs from the bound),
/// `error`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    #[serde(flatten)]
    pub point: GridPoint,
    pub bound: Option<u64>,
    pub construction: Option<usize>,
    pub solver_best: Option<usize>,
    pub optimal: Option<bool>,
    pub agreement: String,
    pub error: Option<String>,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "n",
    "k",
    "t",
    "ell",
    "s",
    "bound",
    "construction",
    "solver_best",
    "optimal",
    "agreement",
    "error",
];

pub fn report(grid: &[GridPoint], opts: &ReportOptions) -> Vec<ReportRow> {
    grid.iter().map(|p| report_row(*p, opts)).collect()
}

fn report_row(p: GridPoint, opts: &ReportOptions) -> ReportRow {
    let mut errors = Vec::new();
    let bound = match p.s {
        None => rhs_bound(BoundKind::T6, &BoundParams::new(p.n, p.k).t(p.t).ell(p.ell)),
        Some(s) => rhs_bound(BoundKind::T8, &BoundParams::new(p.n, p.k).ell(p.ell).s(s)),
    }
    .and_then(|b| {
        b.to_u64()
            .ok_or_else(|| Error::Parameter(format!("bound {b} does not fit in 64 bits")))
    });
    let bound = bound.map_err(|e| errors.push(e.to_string())).ok();

    let construction: Option<Family> = match p.s {
        None => construct_thm6(p.n, p.k, p.t, p.ell),
        Some(s) => {
            if p.t != 1 {
                Err(Error::Parameter(format!(
                    "rows with s need t = 1, got t = {}",
                    p.t
                )))
            } else {
                construct_thm8(p.n, p.k, p.ell, s)
            }
        }
    }
    .map_err(|e| errors.push(e.to_string()))
    .ok();

    let mut solved = None;
    if let Some(family) = &construction {
        let spec = match p.s {
            None => ConditionSpec::new(p.t, p.ell, Variant::Eq4, 0),
            Some(s) => ConditionSpec::new(1, p.ell, Variant::Eq10, s),
        };
        let fits = GroundParams::new(p.n, p.k)
            .map(|g| g.universe_size() <= opts.max_candidates.into())
            .unwrap_or(false);
        match spec {
            Err(e) => errors.push(e.to_string()),
            Ok(spec) if fits => {
                let search = SearchOptions {
                    time_limit: opts.time_limit,
                    incumbent: Some(family.clone()),
                    ..Default::default()
                };
                match max_family(family.params(), &spec, &search) {
                    Ok(r) => solved = Some((r.size, r.optimal)),
                    Err(e) => errors.push(e.to_string()),
                }
            }
            Ok(_) => {}
        }
    }

    let construction = construction.map(|f| f.len());
    let agreement = if !errors.is_empty() {
        "error"
    } else {
        match (bound, construction, solved) {
            (Some(b), Some(c), _) if b != c as u64 => "mismatch",
            (Some(b), _, Some((best, _))) if best as u64 > b => "exceeded",
            (Some(b), _, Some((best, true))) if best as u64 == b => "tight",
            _ => "match",
        }
    };
    ReportRow {
        point: p,
        bound,
        construction,
        solver_best: solved.map(|s| s.0),
        optimal: solved.map(|s| s.1),
        agreement: agreement.to_string(),
        error: (!errors.is_empty()).then(|| errors.join("; ")),
    }
}

fn cells(row: &ReportRow) -> [String; 11] {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".to_string());
    [
        row.point.n.to_string(),
        row.point.k.to_string(),
        row.point.t.to_string(),
        row.point.ell.to_string(),
        opt(row.point.s.map(|s| s.to_string())),
        opt(row.bound.map(|b| b.to_string())),
        opt(row.construction.map(|c| c.to_string())),
        opt(row.solver_best.map(|b| b.to_string())),
        opt(row.optimal.map(|o| o.to_string())),
        row.agreement.clone(),
        row.error.clone().unwrap_or_default(),
    ]
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV with a header row; missing values are `-`.
pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = cells(row).iter().map(|c| csv_field(c)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

const WIDTHS: [usize; 10] = [4, 3, 3, 4, 3, 12, 12, 11, 7, 9];

/// Fixed-width table; the error column is left unpadded.
pub fn render_text(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    let line = |out: &mut String, cols: &[String]| {
        for (c, w) in cols.iter().zip(WIDTHS) {
            let _ = write!(out, "{c:>w$} ");
        }
        let _ = writeln!(out, "{}", cols[10]);
    };
    let header: Vec<String> = CSV_COLUMNS.iter().map(|c| c.to_string()).collect();
    line(&mut out, &header);
    for row in rows {
        line(&mut out, &cells(row));
    }
    out
}
