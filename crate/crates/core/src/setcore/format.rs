//! Family files.
//!
//! Text (`.fam`): a header `# n=<int> k=<int> count=<int>` followed by one
//! member per line as comma-separated, strictly increasing elements.
//! JSON (`.json`): `{"n": .., "k": .., "members": [[..], ..]}`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Family, GroundParams, KSet};
use crate::error::{Error, Result};

pub fn serialize_family(family: &Family) -> String {
    let p = family.params();
    let mut out = format!("# n={} k={} count={}\n", p.n(), p.k(), family.len());
    for m in family.members() {
        let mut first = true;
        for e in m.elements() {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{e}");
        }
        out.push('\n');
    }
    out
}

fn parse_header(line: &str) -> Result<(u32, u32, Option<usize>)> {
    let body = line.trim().trim_start_matches('#');
    let (mut n, mut k, mut count) = (None, None, None);
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("malformed header token `{token}`")))?;
        let value: u64 = value
            .parse()
            .map_err(|_| Error::parse(1, format!("header value `{value}` is not an integer")))?;
        match key {
            "n" => n = Some(value as u32),
            "k" => k = Some(value as u32),
            "count" => count = Some(value as usize),
            other => return Err(Error::parse(1, format!("unknown header key `{other}`"))),
        }
    }
    match (n, k) {
        (Some(n), Some(k)) => Ok((n, k, count)),
        _ => Err(Error::parse(1, "header must declare n=<int> and k=<int>")),
    }
}

pub fn parse_family(text: &str) -> Result<Family> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(1, "empty input"))?;
    let (n, k, count) = parse_header(header)?;
    let params = GroundParams::new(n, k).map_err(|e| Error::parse(1, e.to_string()))?;

    let mut members = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut elements = Vec::with_capacity(k as usize);
        for tok in line.split(',') {
            let tok = tok.trim();
            let e: u32 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("`{tok}` is not a positive integer")))?;
            if e == 0 || e > n {
                return Err(Error::parse(
                    lineno,
                    format!("element {e} out of range [1, {n}]"),
                ));
            }
            if elements.last().is_some_and(|&prev| prev >= e) {
                return Err(Error::parse(lineno, "elements must be strictly increasing"));
            }
            elements.push(e);
        }
        if elements.len() != k as usize {
            return Err(Error::parse(
                lineno,
                format!("set has {} elements, expected k = {k}", elements.len()),
            ));
        }
        let set = KSet::from_elements(&elements);
        if !seen.insert(set) {
            return Err(Error::parse(lineno, format!("duplicate member {set}")));
        }
        members.push(set);
    }
    if let Some(c) = count {
        if c != members.len() {
            return Err(Error::parse(
                1,
                format!(
                    "header declares count={c} but {} members follow",
                    members.len()
                ),
            ));
        }
    }
    Ok(Family::from_valid(params, members))
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    n: u32,
    k: u32,
    members: Vec<Vec<u32>>,
}

impl From<&Family> for FamilyJson {
    fn from(f: &Family) -> Self {
        FamilyJson {
            n: f.params().n(),
            k: f.params().k(),
            members: f.members().iter().map(|m| m.to_vec()).collect(),
        }
    }
}

impl TryFrom<FamilyJson> for Family {
    type Error = Error;

    fn try_from(j: FamilyJson) -> Result<Family> {
        let params = GroundParams::new(j.n, j.k)?;
        let mut members = Vec::with_capacity(j.members.len());
        for (i, elems) in j.members.iter().enumerate() {
            if let Some(&bad) = elems.iter().find(|&&e| e == 0 || e > j.n) {
                return Err(Error::param(format!(
                    "member {i}: element {bad} out of range [1, {}]",
                    j.n
                )));
            }
            let set = KSet::from_elements(elems);
            if set.len() as usize != elems.len() {
                return Err(Error::param(format!("member {i}: repeated element")));
            }
            members.push(set);
        }
        Family::new(params, members)
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Family {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FamilyJson::deserialize(d)?;
        Family::try_from(j).map_err(serde::de::Error::custom)
    }
}

pub fn parse_family_json(text: &str) -> Result<Family> {
    let j: FamilyJson = serde_json::from_str(text)?;
    Family::try_from(j)
}

pub fn serialize_family_json(family: &Family) -> String {
    serde_json::to_string(&FamilyJson::from(family)).expect("family serializes")
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Reads a family, choosing the format by extension (`.json` or text).
pub fn read_family(path: &Path) -> Result<Family> {
    let text = std::fs::read_to_string(path)?;
    if is_json(path) {
        parse_family_json(&text)
    } else {
        parse_family(&text)
    }
}

/// Renders a family in the format implied by `path`'s extension.
pub fn render_for_path(family: &Family, path: &Path) -> String {
    if is_json(path) {
        let mut s = serialize_family_json(family);
        s.push('\n');
        s
    } else {
        serialize_family(family)
    }
}

pub fn write_family(family: &Family, path: &Path) -> Result<()> {
    std::fs::write(path, render_for_path(family, path))?;
    Ok(())
}
