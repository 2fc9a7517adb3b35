//! Threshold n0 and the counting chain bounding the number of dense flats.
//!
//! With d = ⌈log log n⌉ and k = (1+δ)·p·q^n/((q-1)·n), the chain is
//!
//! ```text
//! l·C(ck,2)·C(q^n,d-2) < l·(ck)²/2·q^(n(d-2)) = (l/n)·c²(1+δ)²p²/(2(q-1)²n)·q^(nd)
//!                      ≤ ½·q^(nd-d²) ≤ ½·[n,d]_q
//! ```
//!
//! evaluated for two bounds on the number of classes l: l ≤ n and l ≤ b·n.
//! Every term is an exact rational (the float parameters convert exactly).

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::prime_power;
use crate::projgeom::qbinom;

/// Largest n accepted by [`counting_bound_report`].
pub const MAX_CHAIN_N: u64 = 50_000;

/// Base of both logarithms in d = ⌈log log n⌉.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
    Ten,
    /// The field order q.
    Field,
}

impl LogBase {
    fn ln_base(self, q: u32) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::Ten => std::f64::consts::LN_10,
            LogBase::Field => (q as f64).ln(),
        }
    }

    /// ⌈log log n⌉, or `None` when log n ≤ 1 makes it undefined or negative infinite.
    pub fn d_of(self, n: u128, q: u32) -> Option<i64> {
        let lb = self.ln_base(q);
        let l1 = (n as f64).ln() / lb;
        if l1 <= 0.0 {
            return None;
        }
        Some((l1.ln() / lb).ceil() as i64)
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "natural" | "ln" => Ok(LogBase::Natural),
            "2" | "two" => Ok(LogBase::Two),
            "10" | "ten" => Ok(LogBase::Ten),
            "q" | "field" => Ok(LogBase::Field),
            other => Err(Error::InvalidParameter(format!(
                "unknown log base `{other}` (use e, 2, 10 or q)"
            ))),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Natural => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
            LogBase::Field => "q",
        })
    }
}

#[derive(Clone, Debug)]
struct Params {
    q: u32,
    p: BigRational,
    b: BigRational,
    c: BigRational,
    one_plus_delta: BigRational,
}

fn exact(x: f64, name: &str) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidParameter(format!("{name} = {x} is not finite")))
}

impl Params {
    fn new(q: u32, p: f64, b: usize, c: f64, delta: f64) -> Result<Self> {
        if prime_power(q).is_none() {
            return Err(Error::NotPrimePower(q));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p = {p} must lie in (0, 1]"
            )));
        }
        if b < 1 || !(c >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "b = {b} and c = {c} must be at least 1"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {delta} must be positive"
            )));
        }
        Ok(Params {
            q,
            p: exact(p, "p")?,
            b: BigRational::from_integer(BigInt::from(b)),
            c: exact(c, "c")?,
            one_plus_delta: BigRational::one() + exact(delta, "delta")?,
        })
    }

    fn qr(&self) -> BigRational {
        int(self.q)
    }

    /// c²(1+δ)²p²
    fn scale_sq(&self) -> BigRational {
        let s = &self.c * &self.one_plus_delta * &self.p;
        &s * &s
    }

    /// Smallest n with n·(q-1)² > c²(1+δ)²p²·q^(d²).
    fn size_threshold(&self, d: i64) -> BigInt {
        let qm1 = int(self.q - 1);
        let bound = self.scale_sq() * pow(&self.qr(), (d * d) as u64) / (&qm1 * &qm1);
        bound.floor().to_integer() + 1
    }

    /// ½·p·(q^d-1)/((q-1)·d) > b
    fn density_holds(&self, d: i64) -> bool {
        if d < 1 {
            return false;
        }
        let lhs = &self.p * (pow(&self.qr(), d as u64) - BigRational::one());
        let rhs = int(2) * &self.b * int(self.q - 1) * int(d);
        lhs > rhs
    }
}

fn int<T: Into<BigInt>>(x: T) -> BigRational {
    BigRational::from_integer(x.into())
}

fn pow(x: &BigRational, e: u64) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

fn ln_bigint(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let x = x.abs();
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = &x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// The three requirements on n in the choice of n0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct N0Conditions {
    pub n: String,
    pub d: Option<i64>,
    /// d ≥ 3
    pub depth: bool,
    /// n·q^(-d²) > c²(1+δ)²p²/(q-1)²
    pub size: bool,
    /// ½·p·(q^d-1)/((q-1)·d) > b
    pub density: bool,
    pub all: bool,
}

fn conditions_exact(n: u128, params: &Params, base: LogBase) -> N0Conditions {
    let d = base.d_of(n, params.q);
    let (depth, size, density) = match d {
        Some(d) if d >= 1 => (
            d >= 3,
            BigInt::from(n) >= params.size_threshold(d),
            params.density_holds(d),
        ),
        _ => (false, false, false),
    };
    N0Conditions {
        n: n.to_string(),
        d,
        depth,
        size,
        density,
        all: depth && size && density,
    }
}

/// Evaluates the three n0 requirements at a given n.
pub fn conditions_at(
    n: u128,
    q: u32,
    p: f64,
    b: usize,
    c: f64,
    delta: f64,
    base: LogBase,
) -> Result<N0Conditions> {
    let params = Params::new(q, p, b, c, delta)?;
    Ok(conditions_exact(n, &params, base))
}

/// Smallest n whose ⌈log log n⌉ is at least `d`, if it fits in 128 bits.
fn band_start(d: i64, q: u32, base: LogBase) -> Option<u128> {
    let lb = base.ln_base(q);
    // n > B^(B^(d-1))
    let ln_x = (lb * (d - 1) as f64).exp() * lb;
    if !ln_x.is_finite() || ln_x > 127.0 * std::f64::consts::LN_2 {
        return None;
    }
    let x = ln_x.exp();
    let mut n = (x.floor() as u128).saturating_add(1).max(2);
    if x > 2f64.powi(52) {
        // Neighbouring integers are indistinguishable in f64 here.
        return Some(n);
    }
    let reaches = |m: u128| base.d_of(m, q).is_some_and(|v| v >= d);
    while n > 2 && reaches(n - 1) {
        n -= 1;
    }
    while !reaches(n) {
        n += 1;
    }
    Some(n)
}

/// Smallest n0 such that d ≥ 3, n·q^(-d²) > c²(1+δ)²p²/(q-1)² and
/// ½·p·(q^d-1)/((q-1)·d) > b hold for every n ≥ n0, with d = ⌈log log n⌉.
///
/// Within a band of constant d the first and last conditions are fixed and the
/// second is monotone in n, so only band starts and per-band suffixes matter.
/// Band boundaries beyond 2^53 are located in floating point.
pub fn threshold_n0(q: u32, p: f64, b: usize, c: f64, delta: f64, base: LogBase) -> Result<u128> {
    let params = Params::new(q, p, b, c, delta)?;
    const MAX_BAND: i64 = 200;

    // A band is "bad" unless every n in it satisfies all three conditions.
    let mut last_bad = 2i64;
    let mut last_bad_suffix: Option<u128> = None;
    for d in 3..=MAX_BAND {
        let density = params.density_holds(d);
        match band_start(d, q, base) {
            Some(start) => {
                let size_from = params.size_threshold(d);
                let fully_good = density && BigInt::from(start) >= size_from;
                if !fully_good {
                    last_bad = d;
                    // Good suffix of this band, if any.
                    last_bad_suffix =
                        match (density, band_start(d + 1, q, base), size_from.to_u128()) {
                            (true, Some(next), Some(from)) if from < next => Some(from.max(start)),
                            _ => None,
                        };
                }
            }
            None => {
                // Beyond 128 bits: compare logarithms of the band start and
                // of the size threshold.
                let lb = base.ln_base(q);
                let ln_start = (lb * (d - 1) as f64).exp() * lb;
                let ln_size = ln_bigint(&params.size_threshold(d));
                if !density || !(ln_start > ln_size + 1.0) {
                    return Err(Error::ThresholdOverflow);
                }
            }
        }
    }
    match last_bad_suffix {
        Some(n0) => Ok(n0),
        None => band_start(last_bad + 1, q, base).ok_or(Error::ThresholdOverflow),
    }
}

/// q^(d(n-d)) ≤ [n,d]_q, checked in exact integers.
pub fn lemma5_final_step(n: u64, d: u64, q: u32) -> Result<bool> {
    if d > n {
        return Err(Error::InvalidRank {
            d: d as i64,
            n: n as i64,
        });
    }
    let lhs = BigUint::from(q).pow((d * (n - d)) as u32);
    Ok(lhs <= qbinom(n as i64, d as i64, q)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub lhs: String,
    pub relation: String,
    pub rhs: String,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRegime {
    /// Bound on the number of classes used for l.
    pub classes_bound: String,
    pub steps: Vec<ChainStep>,
    pub chain_holds: bool,
    /// l·C(ck,2)·C(q^n,d-2) < ½·[n,d]_q: too few dense flats can be covered.
    pub count_below_half_flats: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundChainReport {
    pub n: u64,
    pub q: u32,
    pub p: f64,
    pub b: usize,
    pub c: f64,
    pub delta: f64,
    pub log_base: LogBase,
    pub d: Option<i64>,
    pub ln_k: f64,
    pub conditions: N0Conditions,
    /// q^(nd-d²) ≤ [n,d]_q in exact integers.
    pub lemma5_final_step: bool,
    pub ln_half_flats: f64,
    pub regimes: Vec<ChainRegime>,
    pub notes: Vec<String>,
}

fn binom_rational(x: &BigRational, m: i64) -> BigRational {
    if m < 0 {
        return BigRational::zero();
    }
    let mut acc = BigRational::one();
    for i in 0..m {
        acc = acc * (x - int(i)) / int(i + 1);
    }
    acc
}

fn step(lhs: &str, relation: &str, rhs: &str, l: &BigRational, r: &BigRational) -> ChainStep {
    let holds = match relation {
        "<" => l < r,
        _ => l <= r,
    };
    ChainStep {
        lhs: lhs.into(),
        relation: relation.into(),
        rhs: rhs.into(),
        ln_lhs: ln_rational(l),
        ln_rhs: ln_rational(r),
        holds,
    }
}

/// Evaluates every inequality of the dense-flat counting chain at n.
pub fn counting_bound_report(
    n: u64,
    q: u32,
    p: f64,
    b: usize,
    c: f64,
    delta: f64,
    base: LogBase,
) -> Result<BoundChainReport> {
    let params = Params::new(q, p, b, c, delta)?;
    if !(2..=MAX_CHAIN_N).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must lie in 2..={MAX_CHAIN_N}"
        )));
    }
    let conditions = conditions_exact(n as u128, &params, base);
    let d = conditions.d;
    let dd = d.unwrap_or(0).max(0);
    let mut notes = Vec::new();
    if dd < 3 {
        notes.push(format!(
            "d = {dd} < 3: the chain is evaluated but its premises fail"
        ));
    }

    let qr = params.qr();
    let nr = int(n);
    let qm1 = int(q - 1);
    let q_n = pow(&qr, n);
    let k = &params.one_plus_delta * &params.p * &q_n / (&qm1 * &nr);
    let ck = &params.c * &k;
    let flats = if (dd as u64) <= n {
        int(qbinom(n as i64, dd, q)?)
    } else {
        BigRational::zero()
    };
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let half_flats = &half * &flats;

    let lemma5 = if (dd as u64) <= n {
        lemma5_final_step(n, dd as u64, q)?
    } else {
        false
    };
    let ln_q = (q as f64).ln();
    let exp_nd = n as i64 * dd - dd * dd;
    let t4 = if exp_nd >= 0 {
        &half * pow(&qr, exp_nd as u64)
    } else {
        &half / pow(&qr, (-exp_nd) as u64)
    };
    let q_nd = pow(&qr, n * dd as u64);
    let q_nd2 = if dd >= 2 {
        pow(&qr, n * (dd as u64 - 2))
    } else {
        BigRational::one() / pow(&qr, n * (2 - dd as u64))
    };
    let binom_qn = binom_rational(&q_n, dd - 2);
    let binom_ck = binom_rational(&ck, 2);

    let regimes = [
        ("l <= n", BigRational::one()),
        ("l <= b*n", params.b.clone()),
    ]
    .into_iter()
    .map(|(label, factor)| {
        let ell = &factor * &nr;
        let t1 = &ell * &binom_ck * &binom_qn;
        let t2 = &ell * &ck * &ck * &half * &q_nd2;
        let t3 = &factor * params.scale_sq() * &half / (&qm1 * &qm1 * &nr) * &q_nd;
        let f = if factor.is_one() {
            String::new()
        } else {
            "b*".into()
        };
        let steps = vec![
            step(
                &format!("{f}n*C(ck,2)*C(q^n,d-2)"),
                "<",
                &format!("{f}n*(ck)^2/2*q^(n(d-2))"),
                &t1,
                &t2,
            ),
            step(
                &format!("{f}n*(ck)^2/2*q^(n(d-2))"),
                "<=",
                &format!("{f}c^2(1+delta)^2p^2/(2(q-1)^2 n)*q^(nd)"),
                &t2,
                &t3,
            ),
            step(
                &format!("{f}c^2(1+delta)^2p^2/(2(q-1)^2 n)*q^(nd)"),
                "<=",
                "1/2*q^(nd-d^2)",
                &t3,
                &t4,
            ),
            step("1/2*q^(nd-d^2)", "<=", "1/2*[n,d]_q", &t4, &half_flats),
        ];
        let chain_holds = steps.iter().all(|s| s.holds);
        ChainRegime {
            classes_bound: label.into(),
            steps,
            chain_holds,
            count_below_half_flats: t1 < half_flats,
        }
    })
    .collect::<Vec<_>>();

    notes.push(
        "the first step needs l <= n; b-colourable transversals in a rank-n matroid only give l <= b*n".into(),
    );
    if params.b.is_one() {
        notes.push("b = 1: the two regimes coincide".into());
    }
    if regimes[0].chain_holds != regimes[1].chain_holds {
        notes.push("the chain holds under l <= n but not under l <= b*n (or vice versa)".into());
    }
    notes.push(format!("ln q^(nd) = {:.6}", n as f64 * dd as f64 * ln_q));

    Ok(BoundChainReport {
        n,
        q,
        p,
        b,
        c,
        delta,
        log_base: base,
        d,
        ln_k: ln_rational(&k),
        conditions,
        lemma5_final_step: lemma5,
        ln_half_flats: ln_rational(&half_flats),
        regimes,
        notes,
    })
}
