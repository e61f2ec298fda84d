//! Candidate-extremal families, their pair-sum profiles and the closed-form
//! size bounds they are compared against.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setcore::{
    binomial, binomial_signed, choose2, Family, GroundParams, KSet, DEFAULT_ENUMERATION_CAP,
};

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}

/// All k-sets containing `required` and avoiding `forbidden`, in
/// lexicographic order.
fn extensions(params: GroundParams, required: KSet, forbidden: KSet) -> Result<Vec<KSet>> {
    let free: Vec<u32> = (1..=params.n())
        .filter(|&e| !required.contains(e) && !forbidden.contains(e))
        .collect();
    let extra = params.k() as i64 - required.len() as i64;
    if extra < 0 || extra as usize > free.len() {
        return Ok(Vec::new());
    }
    let count = binomial(free.len() as u64, extra);
    if count > BigUint::from(DEFAULT_ENUMERATION_CAP) {
        return Err(Error::CapExceeded {
            what: "construction",
            required: count,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let extra = extra as usize;
    let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
    let mut idx: Vec<usize> = (0..extra).collect();
    loop {
        let set = idx.iter().fold(required, |acc, &i| acc.with(free[i]));
        out.push(set);
        let Some(r) = (0..extra)
            .rev()
            .find(|&r| idx[r] < free.len() - (extra - r))
        else {
            break;
        };
        idx[r] += 1;
        for q in r + 1..extra {
            idx[q] = idx[q - 1] + 1;
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Sets containing `[t]`, plus sets containing `[2, t+ℓ-2]` but not 1.
pub fn construct_thm6(n: u32, k: u32, t: u32, ell: u32) -> Result<Family> {
    require(t >= 1, || format!("t = {t} must be at least 1"))?;
    require(ell >= 3, || format!("ell = {ell} must be at least 3"))?;
    require(t + ell - 2 <= k, || {
        format!("t + ell - 2 <= k fails: {t} + {ell} - 2 > {k}")
    })?;
    require(k <= n, || format!("k <= n fails: {k} > {n}"))?;
    require(n >= k + t + ell - 3, || {
        format!("n >= k + t + ell - 3 fails: {n} < {}", k + t + ell - 3)
    })?;
    let params = GroundParams::new(n, k)?;
    let mut members = extensions(params, KSet::interval(1, t), KSet::EMPTY)?;
    members.extend(extensions(
        params,
        KSet::interval(2, t + ell - 2),
        KSet::from_elements(&[1]),
    )?);
    Ok(Family::from_valid(params, members))
}

/// The `t = 1` construction with `[2, ℓ-1]` shrunk to `[2, ℓ-s-1]`.
pub fn construct_thm8(n: u32, k: u32, ell: u32, s: u32) -> Result<Family> {
    require(ell >= 3, || format!("ell = {ell} must be at least 3"))?;
    require(2 * s < ell, || {
        format!("2s + 1 <= ell fails: s = {s}, ell = {ell}")
    })?;
    require(ell - s - 1 <= k, || {
        format!("ell - s - 1 <= k fails: {} > {k}", ell - s - 1)
    })?;
    require(k <= n, || format!("k <= n fails: {k} > {n}"))?;
    let min_n = (k + ell).saturating_sub(s + 2);
    require(n >= min_n, || {
        format!("n >= k + ell - s - 2 fails: {n} < {min_n}")
    })?;
    let params = GroundParams::new(n, k)?;
    let mut members = extensions(params, KSet::from_elements(&[1]), KSet::EMPTY)?;
    members.extend(extensions(
        params,
        KSet::interval(2, ell - s - 1),
        KSet::from_elements(&[1]),
    )?);
    Ok(Family::from_valid(params, members))
}

/// All k-sets containing `[t]`.
pub fn construct_star(n: u32, k: u32, t: u32) -> Result<Family> {
    require(t <= k, || format!("t <= k fails: {t} > {k}"))?;
    let params = GroundParams::new(n, k)?;
    let members = extensions(params, KSet::interval(1, t), KSet::EMPTY)?;
    Ok(Family::from_valid(params, members))
}

/// Kernel `[t]` with `u` petals on consecutive blocks of `k - t` elements.
pub fn construct_sunflower(n: u32, k: u32, t: u32, u: u32) -> Result<Family> {
    require(t < k, || format!("t < k fails: {t} >= {k}"))?;
    require(u >= 1, || "u must be at least 1".to_string())?;
    let need = t as u64 + u as u64 * (k - t) as u64;
    require(n as u64 >= need, || {
        format!("ground set too small: n = {n} < t + u(k - t) = {need}")
    })?;
    let params = GroundParams::new(n, k)?;
    let kernel = KSet::interval(1, t);
    let petal = k - t;
    let members = (0..u)
        .map(|i| kernel.union(KSet::interval(t + i * petal + 1, t + (i + 1) * petal)))
        .collect();
    Ok(Family::from_valid(params, members))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProfilePoint {
    /// Members drawn from the group containing the anchor set.
    pub x: u32,
    pub value: i64,
}

/// A profile over `x = 0..=ℓ` with its integer minimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub points: Vec<ProfilePoint>,
    pub min_value: i64,
    pub argmin: Vec<u32>,
    /// Vertex of the interpolating quadratic; metadata only.
    pub real_argmin: Option<f64>,
}

impl Profile {
    fn from_values(values: Vec<i64>) -> Self {
        let min_value = *values.iter().min().expect("non-empty profile");
        let argmin = (0..values.len() as u32)
            .filter(|&x| values[x as usize] == min_value)
            .collect();
        let real_argmin = if values.len() >= 3 {
            let a = (values[0] - 2 * values[1] + values[2]) as f64 / 2.0;
            let b = (values[1] - values[0]) as f64 - a;
            (a > 0.0).then(|| -b / (2.0 * a))
        } else {
            None
        };
        Profile {
            points: values
                .into_iter()
                .enumerate()
                .map(|(x, value)| ProfilePoint { x: x as u32, value })
                .collect(),
            min_value,
            argmin,
            real_argmin,
        }
    }

    pub fn values(&self) -> Vec<i64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn value_at(&self, x: u32) -> Option<i64> {
        self.points.get(x as usize).map(|p| p.value)
    }
}

/// `f(x) = C(x,2)t + x(ℓ-x)(t-1) + C(ℓ-x,2)(t+ℓ-3)`: the least pair-sum of
/// `x` members from the `[t]` group and `ℓ - x` from the other group.
pub fn f_value(t: u32, ell: u32, x: u32) -> i64 {
    let (t, ell, x) = (t as i64, ell as i64, x as i64);
    choose2(x) * t + x * (ell - x) * (t - 1) + choose2(ell - x) * (t + ell - 3)
}

pub fn f_profile(t: u32, ell: u32) -> Result<Profile> {
    require(t >= 1, || format!("t = {t} must be at least 1"))?;
    require(ell >= 3, || format!("ell = {ell} must be at least 3"))?;
    Ok(Profile::from_values(
        (0..=ell).map(|x| f_value(t, ell, x)).collect(),
    ))
}

/// `g(x) = C(x,2) + C(ℓ-x,2)(ℓ-s-2)` for the slackened `t = 1` construction.
pub fn g_value(ell: u32, s: u32, x: u32) -> i64 {
    let (ell, s, x) = (ell as i64, s as i64, x as i64);
    choose2(x) + choose2(ell - x) * (ell - s - 2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GProfile {
    #[serde(flatten)]
    pub profile: Profile,
    /// `C(ℓ-1, 2) - s`.
    pub threshold: i64,
    /// `ℓ - 2` is among the integer minimizers.
    pub min_at_ell_minus_2: bool,
    pub meets_threshold: bool,
    /// `2s + 1 <= ℓ`; outside it the profile is reported but nothing is
    /// claimed about it.
    pub within_hypothesis: bool,
}

pub fn g_profile(ell: u32, s: u32) -> Result<GProfile> {
    require(ell >= 3, || format!("ell = {ell} must be at least 3"))?;
    let profile = Profile::from_values((0..=ell).map(|x| g_value(ell, s, x)).collect());
    let threshold = choose2(ell as i64 - 1) - s as i64;
    Ok(GProfile {
        min_at_ell_minus_2: profile.argmin.contains(&(ell - 2)),
        meets_threshold: profile.min_value >= threshold,
        within_hypothesis: 2 * s < ell,
        threshold,
        profile,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// `C(n-1, k-1)`
    Ekr,
    /// `C(n-t, k-t)`
    T3,
    /// `C(n-1, k-1) + C(n-ℓ+1, k-ℓ+2)`
    T5,
    /// `C(n-t, k-t) + C(n-t-ℓ+2, k-t-ℓ+3)`
    T6,
    /// `C(n, k) - C(n-ℓ+1, k)`
    T7,
    /// `C(n-1, k-1) + C(n-ℓ+s+1, k-ℓ+s+2)`
    T8,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Ekr => "ekr",
            BoundKind::T3 => "t3",
            BoundKind::T5 => "t5",
            BoundKind::T6 => "t6",
            BoundKind::T7 => "t7",
            BoundKind::T8 => "t8",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ekr" => Ok(BoundKind::Ekr),
            "t3" => Ok(BoundKind::T3),
            "t5" => Ok(BoundKind::T5),
            "t6" => Ok(BoundKind::T6),
            "t7" => Ok(BoundKind::T7),
            "t8" => Ok(BoundKind::T8),
            other => Err(Error::param(format!("unknown bound kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub t: Option<u32>,
    pub ell: Option<u32>,
    pub s: Option<u32>,
}

impl BoundParams {
    pub fn new(n: u32, k: u32) -> Self {
        BoundParams {
            n: Some(n),
            k: Some(k),
            ..Default::default()
        }
    }

    pub fn t(mut self, t: u32) -> Self {
        self.t = Some(t);
        self
    }

    pub fn ell(mut self, ell: u32) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn s(mut self, s: u32) -> Self {
        self.s = Some(s);
        self
    }
}

/// Exact value of the closed form named by `kind`.
pub fn rhs_bound(kind: BoundKind, params: &BoundParams) -> Result<BigUint> {
    let get = |v: Option<u32>, name: &str| {
        v.map(|x| x as i64)
            .ok_or_else(|| Error::param(format!("bound {kind} requires parameter {name}")))
    };
    let n = get(params.n, "n")?;
    let k = get(params.k, "k")?;
    let c = binomial_signed;
    Ok(match kind {
        BoundKind::Ekr => c(n - 1, k - 1),
        BoundKind::T3 => {
            let t = get(params.t, "t")?;
            c(n - t, k - t)
        }
        BoundKind::T5 => {
            let ell = get(params.ell, "ell")?;
            c(n - 1, k - 1) + c(n - ell + 1, k - ell + 2)
        }
        BoundKind::T6 => {
            let t = get(params.t, "t")?;
            let ell = get(params.ell, "ell")?;
            c(n - t, k - t) + c(n - t - ell + 2, k - t - ell + 3)
        }
        BoundKind::T7 => {
            let ell = get(params.ell, "ell")?;
            require(ell >= 1, || "bound t7 requires ell >= 1".to_string())?;
            c(n, k) - c(n - ell + 1, k)
        }
        BoundKind::T8 => {
            let ell = get(params.ell, "ell")?;
            let s = get(params.s, "s")?;
            c(n - 1, k - 1) + c(n - ell + s + 1, k - ell + s + 2)
        }
    })
}
