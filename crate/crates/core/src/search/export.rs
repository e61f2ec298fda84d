//! LP and DIMACS CNF encodings of the maximum-family problem.
//!
//! Variable `x_i` (1-based) stands for the i-th k-set in lexicographic order;
//! both formats start with a comment block listing that mapping.

use std::fmt::Write as _;

use crate::conditions::ConditionSpec;
use crate::error::{Error, Result};
use crate::setcore::{choose2, enumerate_ksets, GroundParams, KSet, DEFAULT_ENUMERATION_CAP};
use crate::tuples::TupleSearch;

/// Counting stops here once the cap is exceeded, so the reported count is
/// then a lower bound.
const COUNT_CEILING_FACTOR: u64 = 100;

/// The k-sets of `params` and every ℓ-tuple of them (ascending indices)
/// whose pair-sum is below the threshold.
pub fn bad_tuples(
    params: GroundParams,
    spec: &ConditionSpec,
    cap: u64,
) -> Result<(Vec<KSet>, Vec<Vec<usize>>)> {
    let candidates = enumerate_ksets(params, DEFAULT_ENUMERATION_CAP)?;
    let threshold = spec.threshold();
    let mut tuples = Vec::new();
    if threshold <= 0 {
        return Ok((candidates, tuples));
    }
    let masks: Vec<u128> = candidates.iter().map(|c| c.bits()).collect();
    let ell = spec.ell() as usize;
    let search = TupleSearch::new(&masks).with_pair_bound(choose2(ell as i64) as usize);
    let ceiling = cap.saturating_mul(COUNT_CEILING_FACTOR);
    let mut count = 0u64;
    search.for_each_below(&[], ell, threshold, &mut |_, tuple| {
        count += 1;
        if count <= cap {
            tuples.push(tuple.to_vec());
        }
        count < ceiling
    });
    if count > cap {
        return Err(Error::CapExceeded {
            what: "bad tuple enumeration",
            required: count.into(),
            cap,
        });
    }
    Ok((candidates, tuples))
}

fn header(
    out: &mut String,
    prefix: &str,
    params: GroundParams,
    spec: &ConditionSpec,
    candidates: &[KSet],
) {
    let _ = writeln!(
        out,
        "{prefix} n={} k={} variant={} t={} ell={} s={} threshold={}",
        params.n(),
        params.k(),
        spec.variant(),
        spec.t(),
        spec.ell(),
        spec.slack(),
        spec.threshold()
    );
    for (i, c) in candidates.iter().enumerate() {
        let _ = writeln!(out, "{prefix} x{} = {c}", i + 1);
    }
}

/// Binary program: maximize the number of chosen sets subject to at most
/// `ℓ - 1` members of each bad tuple. CPLEX LP text.
pub fn export_ilp(params: GroundParams, spec: &ConditionSpec, cap: u64) -> Result<String> {
    let (candidates, tuples) = bad_tuples(params, spec, cap)?;
    let mut out = String::new();
    header(&mut out, "\\", params, spec, &candidates);
    out.push_str("Maximize\n obj:");
    for i in 1..=candidates.len() {
        let _ = write!(out, " {}x{i}", if i == 1 { "" } else { "+ " });
    }
    out.push_str("\nSubject To\n");
    let rhs = spec.ell() - 1;
    for (c, tuple) in tuples.iter().enumerate() {
        let _ = write!(out, " c{}:", c + 1);
        for (j, &i) in tuple.iter().enumerate() {
            let _ = write!(out, " {}x{}", if j == 0 { "" } else { "+ " }, i + 1);
        }
        let _ = writeln!(out, " <= {rhs}");
    }
    out.push_str("Binary\n");
    for i in 1..=candidates.len() {
        let _ = writeln!(out, " x{i}");
    }
    out.push_str("End\n");
    Ok(out)
}

/// Decision version: is there a feasible family with at least
/// `target_size` members? One clause per bad tuple plus a totalizer over
/// all set variables, truncated at `target_size`, whose top output is
/// asserted.
pub fn export_cnf(
    params: GroundParams,
    spec: &ConditionSpec,
    target_size: u64,
    cap: u64,
) -> Result<String> {
    let (candidates, tuples) = bad_tuples(params, spec, cap)?;
    let n_vars = candidates.len();
    let mut clauses: Vec<Vec<i64>> = tuples
        .iter()
        .map(|t| t.iter().map(|&i| -(i as i64 + 1)).collect())
        .collect();
    let mut next_var = n_vars as i64;
    if target_size > n_vars as u64 {
        clauses.push(vec![1]);
        clauses.push(vec![-1]);
    } else if target_size > 0 {
        let target = target_size as usize;
        let leaves: Vec<Vec<i64>> = (1..=n_vars as i64).map(|v| vec![v]).collect();
        let root = totalizer(&leaves, target, &mut next_var, &mut clauses);
        clauses.push(vec![root[target - 1]]);
    }

    let mut out = String::new();
    header(&mut out, "c", params, spec, &candidates);
    let _ = writeln!(
        out,
        "c at least {target_size} sets; variables above {n_vars} are counter outputs"
    );
    let _ = writeln!(out, "p cnf {next_var} {}", clauses.len());
    for clause in &clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    Ok(out)
}

/// Unary counter over `inputs` (each a unary counter itself). Output `r_j`
/// (1-based, `j <= cap`) is only true if at least `j` leaves are true.
fn totalizer(
    inputs: &[Vec<i64>],
    cap: usize,
    next_var: &mut i64,
    clauses: &mut Vec<Vec<i64>>,
) -> Vec<i64> {
    if inputs.len() == 1 {
        return inputs[0].clone();
    }
    let mid = inputs.len() / 2;
    let a = totalizer(&inputs[..mid], cap, next_var, clauses);
    let b = totalizer(&inputs[mid..], cap, next_var, clauses);
    let size = (a.len() + b.len()).min(cap);
    let r: Vec<i64> = (0..size)
        .map(|_| {
            *next_var += 1;
            *next_var
        })
        .collect();
    // fewer than i+1 in a and fewer than j+1 in b: fewer than i+j+1 overall
    for i in 0..=a.len() {
        for j in 0..=b.len() {
            let out = i + j + 1;
            if out > size {
                continue;
            }
            let mut clause = vec![-r[out - 1]];
            if i < a.len() {
                clause.push(a[i]);
            }
            if j < b.len() {
                clause.push(b[j]);
            }
            clauses.push(clause);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::Variant;

    #[test]
    fn pairwise_lp_has_one_row_per_disjoint_pair() {
        let p = GroundParams::new(5, 2).unwrap();
        let lp = export_ilp(p, &ConditionSpec::pairwise(1).unwrap(), 1000).unwrap();
        assert_eq!(lp.lines().filter(|l| l.starts_with(" c")).count(), 15);
        assert!(lp.contains("\\ x1 = {1,2}"));
        assert!(lp.contains("\\ x10 = {4,5}"));
        // {1,2} and {3,4} are x1 and x8
        assert!(lp.contains(": x1 + x8 <= 1"));
        assert!(lp.ends_with("End\n"));
    }

    #[test]
    fn vacuous_threshold_has_no_constraints() {
        let p = GroundParams::new(5, 2).unwrap();
        let s = ConditionSpec::new(1, 3, Variant::Eq10, 1).unwrap();
        let lp = export_ilp(p, &s, 10).unwrap();
        assert!(lp.contains("Subject To\nBinary"));
    }

    #[test]
    fn cap_reports_count() {
        let p = GroundParams::new(8, 2).unwrap();
        let err = export_ilp(p, &ConditionSpec::pairwise(1).unwrap(), 10).unwrap_err();
        // disjoint pairs of 2-sets in [8]: 28 * 15 / 2
        match err {
            Error::CapExceeded { required, cap, .. } => {
                assert_eq!(required, 210u32.into());
                assert_eq!(cap, 10);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn cnf_header_counts_match() {
        let p = GroundParams::new(5, 2).unwrap();
        let cnf = export_cnf(p, &ConditionSpec::pairwise(1).unwrap(), 4, 1000).unwrap();
        let problem = cnf.lines().find(|l| l.starts_with("p cnf")).unwrap();
        let fields: Vec<usize> = problem
            .split_whitespace()
            .skip(2)
            .map(|x| x.parse().unwrap())
            .collect();
        let body: Vec<&str> = cnf
            .lines()
            .filter(|l| !l.starts_with('c') && !l.starts_with('p'))
            .collect();
        assert_eq!(body.len(), fields[1]);
        assert!(body.iter().all(|l| l.ends_with(" 0")));
        let max_var = body
            .iter()
            .flat_map(|l| l.split_whitespace())
            .map(|x| x.parse::<i64>().unwrap().unsigned_abs())
            .max()
            .unwrap();
        assert_eq!(max_var as usize, fields[0]);
    }
}
