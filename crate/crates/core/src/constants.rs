//! Theorem-constant schedules over [`Magnitude`], a number that is an exact
//! rational while it stays small and a power-tower descriptor once it does
//! not.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ratio::{self, Rational};

/// Exact values whose numerator and denominator together need more bits
/// than this are converted to tower form.
pub const EXACT_BITS: u64 = 4096;

const FLAT_MAX: f64 = 1_152_921_504_606_846_976.0; // 2^60
const TOP_MIN: f64 = 60.0;

/// A nonnegative real `hyper(height, top)`: `top` with `height` powers of
/// two stacked under it. `Flat(y)` is `y` itself. Heights may be towers too.
///
/// Normal form: `Flat(y)` has `y < 2^60`; `Tower` has `60 ≤ top < 2^60` and
/// height at least 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Hyper {
    Flat(f64),
    Tower { height: Box<Hyper>, top: f64 },
}

impl Hyper {
    pub fn flat(y: f64) -> Hyper {
        assert!(y.is_finite() && y >= 0.0, "hyper value must be finite and nonnegative, got {y}");
        if y >= FLAT_MAX {
            Hyper::tower(Hyper::Flat(1.0), y.log2())
        } else {
            Hyper::Flat(y)
        }
    }

    pub fn tower(mut height: Hyper, mut top: f64) -> Hyper {
        loop {
            if let Hyper::Flat(h) = height {
                if h < 1.0 {
                    return Hyper::flat(top);
                }
            }
            if top >= FLAT_MAX {
                top = top.log2();
                height = height.succ();
            } else if top < TOP_MIN {
                top = top.exp2();
                height = height.pred();
            } else {
                return Hyper::Tower {
                    height: Box::new(height),
                    top,
                };
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Hyper::Flat(y) if *y == 0.0)
    }

    fn succ(self) -> Hyper {
        match self {
            Hyper::Flat(y) => Hyper::flat(y + 1.0),
            t => t,
        }
    }

    fn pred(self) -> Hyper {
        match self {
            Hyper::Flat(y) => Hyper::Flat((y - 1.0).max(0.0)),
            t => t,
        }
    }

    pub fn exp2(&self) -> Hyper {
        match self {
            Hyper::Flat(y) if *y < 1000.0 => Hyper::flat(y.exp2()),
            Hyper::Flat(y) => Hyper::tower(Hyper::Flat(1.0), *y),
            Hyper::Tower { height, top } => Hyper::tower((**height).clone().succ(), *top),
        }
    }

    /// `log2` of a top-level tower, as a plain number. `None` for taller
    /// towers and for flat values.
    fn single_log(&self) -> Option<f64> {
        match self {
            Hyper::Tower { height, top } if **height == Hyper::Flat(1.0) => Some(*top),
            _ => None,
        }
    }

    fn log2_of(&self) -> Option<f64> {
        match self {
            Hyper::Flat(y) if *y > 0.0 => Some(y.log2()),
            Hyper::Flat(_) => None,
            t => t.single_log(),
        }
    }

    /// `self + other`; exact to f64 precision up to one tower level, the
    /// larger term beyond that.
    fn add(&self, other: &Hyper) -> Hyper {
        if let (Hyper::Flat(a), Hyper::Flat(b)) = (self, other) {
            return Hyper::flat(a + b);
        }
        let (big, small) = if self.cmp(other) == Ordering::Less {
            (other, self)
        } else {
            (self, other)
        };
        match (big.single_log(), small.log2_of()) {
            (Some(a), Some(b)) => {
                let top = a + (b - a).exp2().ln_1p() / std::f64::consts::LN_2;
                Hyper::tower(Hyper::Flat(1.0), top)
            }
            _ => big.clone(),
        }
    }

    /// `self − other` for `self ≥ other`.
    fn sub(&self, other: &Hyper) -> Hyper {
        if let (Hyper::Flat(a), Hyper::Flat(b)) = (self, other) {
            return Hyper::flat((a - b).max(0.0));
        }
        match (self.single_log(), other.log2_of()) {
            (Some(a), Some(b)) => {
                let frac = -((b - a) * std::f64::consts::LN_2).exp_m1();
                if frac <= 0.0 {
                    Hyper::Flat(0.0)
                } else {
                    Hyper::tower(Hyper::Flat(1.0), a + frac.log2())
                }
            }
            _ => self.clone(),
        }
    }

    /// `self · k` for `k ≥ 1`.
    fn scale(&self, k: f64) -> Hyper {
        match self {
            Hyper::Flat(y) => Hyper::flat(y * k),
            t => match t.single_log() {
                Some(a) => Hyper::tower(Hyper::Flat(1.0), a + k.log2()),
                None => t.clone(),
            },
        }
    }

    pub fn cmp(&self, other: &Hyper) -> Ordering {
        match (self, other) {
            (Hyper::Flat(a), Hyper::Flat(b)) => a.total_cmp(b),
            (Hyper::Flat(_), Hyper::Tower { .. }) => Ordering::Less,
            (Hyper::Tower { .. }, Hyper::Flat(_)) => Ordering::Greater,
            (Hyper::Tower { height: h1, top: t1 }, Hyper::Tower { height: h2, top: t2 }) => {
                h1.cmp(h2).then(t1.total_cmp(t2))
            }
        }
    }
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyper::Flat(y) => write!(f, "{y:.6e}"),
            Hyper::Tower { height, top } => write!(f, "tower(height={height}, top={top:.4})"),
        }
    }
}

/// Signed `log2` of a positive number.
#[derive(Clone, Debug)]
struct Log {
    neg: bool,
    mag: Hyper,
}

impl Log {
    fn add(&self, o: &Log) -> Log {
        if self.neg == o.neg {
            return Log {
                neg: self.neg,
                mag: self.mag.add(&o.mag),
            };
        }
        match self.mag.cmp(&o.mag) {
            Ordering::Equal => Log {
                neg: false,
                mag: Hyper::Flat(0.0),
            },
            Ordering::Greater => Log {
                neg: self.neg,
                mag: self.mag.sub(&o.mag),
            },
            Ordering::Less => Log {
                neg: o.neg,
                mag: o.mag.sub(&self.mag),
            },
        }
    }

    fn negate(&self) -> Log {
        Log {
            neg: !self.neg && !self.mag.is_zero(),
            mag: self.mag.clone(),
        }
    }

    fn cmp(&self, o: &Log) -> Ordering {
        let a = self.neg && !self.mag.is_zero();
        let b = o.neg && !o.mag.is_zero();
        match (a, b) {
            (false, false) => self.mag.cmp(&o.mag),
            (true, true) => o.mag.cmp(&self.mag),
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
        }
    }
}

fn big_log2(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("small integers convert").log2()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("64-bit prefix converts").log2() + shift as f64
    }
}

/// An exact rational, or a positive number `2^±E` with `E` a [`Hyper`].
#[derive(Clone, Debug)]
pub enum Magnitude {
    Exact(BigRational),
    Tower { reciprocal: bool, exponent: Hyper },
}

impl Magnitude {
    pub fn exact(x: BigRational) -> Magnitude {
        if x.numer().bits() + x.denom().bits() > EXACT_BITS && x.is_positive() {
            let log = exact_log(&x);
            Magnitude::from_log(log)
        } else {
            Magnitude::Exact(x)
        }
    }

    pub fn from_int(n: u128) -> Magnitude {
        Magnitude::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(x: &Rational) -> Magnitude {
        Magnitude::Exact(ratio::to_big(x))
    }

    pub fn one() -> Magnitude {
        Magnitude::from_int(1)
    }

    fn from_log(log: Log) -> Magnitude {
        Magnitude::Tower {
            reciprocal: log.neg,
            exponent: log.mag,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Magnitude::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Magnitude::Exact(x) => Some(x),
            Magnitude::Tower { .. } => None,
        }
    }

    fn signum(&self) -> i8 {
        match self {
            Magnitude::Exact(x) if x.is_zero() => 0,
            Magnitude::Exact(x) if x.is_negative() => -1,
            _ => 1,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    fn log(&self) -> Log {
        match self {
            Magnitude::Exact(x) => exact_log(x),
            Magnitude::Tower { reciprocal, exponent } => Log {
                neg: *reciprocal,
                mag: exponent.clone(),
            },
        }
    }

    pub fn mul(&self, o: &Magnitude) -> Magnitude {
        match (self, o) {
            (Magnitude::Exact(a), Magnitude::Exact(b)) => Magnitude::exact(a * b),
            _ if self.signum() == 0 || o.signum() == 0 => Magnitude::Exact(BigRational::zero()),
            _ => {
                assert!(self.is_positive() && o.is_positive(), "tower arithmetic needs positive operands");
                Magnitude::from_log(self.log().add(&o.log()))
            }
        }
    }

    pub fn recip(&self) -> Magnitude {
        match self {
            Magnitude::Exact(x) => {
                assert!(!x.is_zero(), "reciprocal of zero");
                Magnitude::Exact(x.recip())
            }
            Magnitude::Tower { .. } => Magnitude::from_log(self.log().negate()),
        }
    }

    pub fn div(&self, o: &Magnitude) -> Magnitude {
        self.mul(&o.recip())
    }

    pub fn pow(&self, k: u32) -> Magnitude {
        match self {
            Magnitude::Exact(x) => {
                let bits = x.numer().bits() + x.denom().bits();
                if bits.saturating_mul(k as u64) <= 2 * EXACT_BITS || !x.is_positive() {
                    Magnitude::exact(ratio::big_pow(x, k))
                } else {
                    let log = exact_log(x);
                    Magnitude::from_log(Log {
                        neg: log.neg,
                        mag: log.mag.scale(k as f64),
                    })
                }
            }
            Magnitude::Tower { reciprocal, exponent } => {
                if k == 0 {
                    return Magnitude::one();
                }
                Magnitude::Tower {
                    reciprocal: *reciprocal,
                    exponent: exponent.scale(k as f64),
                }
            }
        }
    }

    pub fn min(self, o: Magnitude) -> Magnitude {
        if o < self {
            o
        } else {
            self
        }
    }

    pub fn max(self, o: Magnitude) -> Magnitude {
        if o > self {
            o
        } else {
            self
        }
    }

    pub fn ceil(&self) -> Magnitude {
        match self {
            Magnitude::Exact(x) => Magnitude::Exact(x.ceil()),
            Magnitude::Tower { reciprocal: true, .. } => Magnitude::one(),
            t => t.clone(),
        }
    }

    /// `⌊x⌋` when it fits.
    pub fn floor_u128(&self) -> Option<u128> {
        match self {
            Magnitude::Exact(x) if x.is_negative() => Some(0),
            Magnitude::Exact(x) => x.floor().to_integer().to_u128(),
            Magnitude::Tower { reciprocal: true, .. } => Some(0),
            Magnitude::Tower { .. } => None,
        }
    }

    /// Nearest f64, saturating to `0` or `inf`.
    pub fn to_f64(&self) -> f64 {
        match self {
            Magnitude::Exact(x) => ratio::big_to_f64(x),
            Magnitude::Tower { reciprocal, exponent } => match exponent {
                Hyper::Flat(y) if *y < 1100.0 => {
                    if *reciprocal {
                        (-y).exp2()
                    } else {
                        y.exp2()
                    }
                }
                _ if *reciprocal => 0.0,
                _ => f64::INFINITY,
            },
        }
    }

    /// This value (assumed `≥ 1`) as a [`Hyper`].
    fn as_hyper(&self) -> Hyper {
        match self {
            Magnitude::Exact(x) => {
                let f = ratio::big_to_f64(x);
                if f.is_finite() {
                    Hyper::flat(f.max(0.0))
                } else {
                    exact_log(x).mag.exp2()
                }
            }
            Magnitude::Tower { reciprocal: true, .. } => Hyper::Flat(0.0),
            Magnitude::Tower { exponent, .. } => exponent.exp2(),
        }
    }

    /// Tower of twos of height `⌊h⌋`: `2↑↑0 = 1`, `2↑↑1 = 2`, `2↑↑4 = 65536`.
    pub fn two_tower(h: &Magnitude) -> Magnitude {
        if let Some(k) = h.floor_u128() {
            if k <= 4 {
                let mut t = 1u128;
                for _ in 0..k {
                    t = 1u128 << t;
                }
                return Magnitude::from_int(t);
            }
        }
        // log2(2↑↑h) = 2↑↑(h−1) = hyper(h−1, 1)
        let height = h.as_hyper().pred();
        Magnitude::Tower {
            reciprocal: false,
            exponent: Hyper::tower(height, 1.0),
        }
    }
}

fn exact_log(x: &BigRational) -> Log {
    assert!(x.is_positive(), "log of a nonpositive value");
    let v = big_log2(x.numer()) - big_log2(x.denom());
    Log {
        neg: v < 0.0,
        mag: Hyper::flat(v.abs()),
    }
}

impl PartialEq for Magnitude {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Magnitude {}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Magnitude::Exact(a), Magnitude::Exact(b)) => a.cmp(b),
            _ => {
                let (sa, sb) = (self.signum(), other.signum());
                if sa != sb || sa <= 0 {
                    return sa.cmp(&sb);
                }
                self.log().cmp(&other.log())
            }
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Exact(x) => write!(f, "{x}"),
            Magnitude::Tower {
                reciprocal: false,
                exponent,
            } => write!(f, "2^({exponent})"),
            Magnitude::Tower {
                reciprocal: true,
                exponent,
            } => write!(f, "2^-({exponent})"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Repr {
    Exact(String),
    Tower { base: u32, reciprocal: bool, exponent: Hyper },
}

impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Magnitude::Exact(x) => Repr::Exact(x.to_string()),
            Magnitude::Tower { reciprocal, exponent } => Repr::Tower {
                base: 2,
                reciprocal: *reciprocal,
                exponent: exponent.clone(),
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Magnitude {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match Repr::deserialize(d)? {
            Repr::Exact(s) => s
                .parse::<BigRational>()
                .map(Magnitude::Exact)
                .map_err(|e| D::Error::custom(format!("bad rational `{s}`: {e}"))),
            Repr::Tower {
                base: 2,
                reciprocal,
                exponent,
            } => Ok(Magnitude::Tower { reciprocal, exponent }),
            Repr::Tower { base, .. } => Err(D::Error::custom(format!("unsupported tower base {base}"))),
        }
    }
}

/// One entry of a user-supplied `M(ε,l)` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SulEntry {
    #[serde(with = "ratio::serde_rational")]
    pub epsilon: Rational,
    pub l: u64,
    pub m: u64,
}

/// Source of the cluster-count bound `M(ε,l)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum SulBound {
    /// `max{l, 2↑↑⌈ε^−5⌉}`.
    #[default]
    Tower,
    /// `max{l, m}` for every `ε`.
    Fixed { m: u64 },
    /// Smallest `m` over entries with `entry.ε ≤ ε` and `entry.l ≥ l`,
    /// floored at `l`; the tower bound when no entry applies.
    Table { entries: Vec<SulEntry> },
}

impl SulBound {
    pub fn bound(&self, epsilon: &Magnitude, l: &Magnitude) -> Magnitude {
        let l = l.ceil();
        match self {
            SulBound::Tower => tower_bound(epsilon, l),
            SulBound::Fixed { m } => l.max(Magnitude::from_int(*m as u128)),
            SulBound::Table { entries } => {
                let best = entries
                    .iter()
                    .filter(|e| Magnitude::from_rational(&e.epsilon) <= *epsilon)
                    .filter(|e| Magnitude::from_int(e.l as u128) >= l)
                    .map(|e| e.m)
                    .min();
                match best {
                    Some(m) => l.max(Magnitude::from_int(m as u128)),
                    None => tower_bound(epsilon, l),
                }
            }
        }
    }
}

fn tower_bound(epsilon: &Magnitude, l: Magnitude) -> Magnitude {
    let height = epsilon.pow(5).recip().ceil();
    l.max(Magnitude::two_tower(&height))
}

/// Default `M(ε,l)`: a tower of twos of height `⌈ε^−5⌉`, floored at `l`.
pub fn sul_bound(epsilon: &Rational, l: u64) -> Magnitude {
    SulBound::Tower.bound(&Magnitude::from_rational(epsilon), &Magnitude::from_int(l as u128))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    Maint,
    Maint3,
    Rams,
    Maintx,
    Ers2,
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maint" => Ok(Theorem::Maint),
            "maint3" => Ok(Theorem::Maint3),
            "rams" => Ok(Theorem::Rams),
            "maintx" => Ok(Theorem::Maintx),
            "ers2" => Ok(Theorem::Ers2),
            _ => Err(Error::param("theorem", format!("unknown theorem `{s}`"))),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Theorem::Maint => "maint",
            Theorem::Maint3 => "maint3",
            Theorem::Rams => "rams",
            Theorem::Maintx => "maintx",
            Theorem::Ers2 => "ers2",
        };
        f.write_str(s)
    }
}

/// Named constants of one schedule evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub theorem: Theorem,
    #[serde(with = "ratio::serde_rational")]
    pub epsilon: Rational,
    pub r: u32,
    pub values: BTreeMap<String, Magnitude>,
}

impl Schedule {
    pub fn get(&self, name: &str) -> Option<&Magnitude> {
        self.values.get(name)
    }

    /// Panics when `name` is missing; for code that knows the schedule shape.
    pub fn value(&self, name: &str) -> &Magnitude {
        self.values
            .get(name)
            .unwrap_or_else(|| panic!("schedule for {} has no constant `{name}`", self.theorem))
    }
}

fn int(n: u128) -> Magnitude {
    Magnitude::from_int(n)
}

/// Constants of the induction step from `r` to `r+1` in the clique
/// recursion, and the resulting `ξ(ε,r+1)`, `L(ε,r+1)`.
struct MaintStep {
    xi_in: Magnitude,
    l_in: Magnitude,
    l: Magnitude,
    delta: Magnitude,
    m: Magnitude,
    l_next: Magnitude,
    xi_next: Magnitude,
}

/// `(ξ(ε,r), L(ε,r))` of the clique-sparse partition under the default
/// tower bound.
pub fn maint_coefficients(epsilon: &Magnitude, r: u32) -> (Magnitude, Magnitude) {
    maint_xi_l(epsilon, r, &SulBound::default())
}

/// `(ξ(ε,r), L(ε,r))`, with `ξ(ε,2) = ε` and `L(ε,2) = 1`.
fn maint_xi_l(eps: &Magnitude, r: u32, sul: &SulBound) -> (Magnitude, Magnitude) {
    if r <= 2 {
        return (eps.clone(), Magnitude::one());
    }
    let step = maint_step(eps, r - 1, sul);
    (step.xi_next, step.l_next)
}

fn maint_step(eps: &Magnitude, r: u32, sul: &SulBound) -> MaintStep {
    let (xi_in, l_in) = maint_xi_l(&eps.pow(3), r, sul);
    let l = eps
        .pow(5)
        .recip()
        .ceil()
        .max(int(4).mul(eps).mul(&l_in).recip())
        .ceil();
    let delta = xi_in
        .div(&int(r as u128 + 1))
        .min(eps.pow(5 * r).div(&int(16).pow(r)));
    let m = sul.bound(&delta, &l);
    let l_next = int(8).mul(&m).mul(&l_in).div(eps);
    let xi_next = delta.pow(2).div(&int(2).mul(&m).pow(r + 1));
    MaintStep {
        xi_in,
        l_in,
        l,
        delta,
        m,
        l_next,
        xi_next,
    }
}

/// Upper bound `C(2b−2, b−1)` on the two-colour Ramsey number `r(b)`.
pub fn ramsey_bound(b: u64) -> Magnitude {
    let mut acc = BigInt::one();
    let (n, k) = (2 * b.saturating_sub(1), b.saturating_sub(1));
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Magnitude::exact(BigRational::from_integer(acc))
}

struct MaintxStep {
    b: Magnitude,
    ramsey: Magnitude,
    gamma: Magnitude,
    l: Magnitude,
    delta: Magnitude,
    m: Magnitude,
    xi_in: Magnitude,
    l_in: Magnitude,
    l_next: Magnitude,
    xi_next: Magnitude,
}

fn maintx_xi_l(eps: &Magnitude, r: u32, sul: &SulBound) -> Result<(Magnitude, Magnitude)> {
    if r <= 2 {
        return Ok((eps.clone(), Magnitude::one()));
    }
    let step = maintx_step(eps, r - 1, sul)?;
    Ok((step.xi_next, step.l_next))
}

fn maintx_step(eps: &Magnitude, r: u32, sul: &SulBound) -> Result<MaintxStep> {
    let b = eps.pow(3).recip().ceil();
    let b_int = b.floor_u128().filter(|&b| b <= 1 << 20).ok_or_else(|| Error::Domain {
        name: "b",
        reason: format!("group size {b} too large to evaluate its Ramsey bound"),
    })?;
    let ramsey = ramsey_bound(b_int as u64);
    let gamma = eps.pow(2).div(&int(4).mul(&ramsey));
    let l = int(2).mul(&ramsey).div(&eps.pow(2)).ceil();
    // inner constants come from the clique recursion
    let (xi_in, l_in) = maint_xi_l(&eps.pow(3), r, sul);
    let delta = gamma
        .mul(&eps.pow(2))
        .min(xi_in.div(&int((1u128 << r) + 1)))
        .min(eps.pow(3 * r).div(&int(4).pow(r)));
    let m = sul.bound(&delta, &l);
    let l_next = int(8).mul(&m).mul(&l_in).div(eps);
    let xi_next = delta.pow(2).div(&int(2).mul(&m).pow(r + 1));
    Ok(MaintxStep {
        b,
        ramsey,
        gamma,
        l,
        delta,
        m,
        xi_in,
        l_in,
        l_next,
        xi_next,
    })
}

/// Evaluates the constants of `theorem` at `(ε, r)`. `extra` is `k` for
/// Maint3 and Rams and the density `c` for Ers2.
///
/// Maint and Maintx report `ξ(ε,r)`, `L(ε,r)` together with the step
/// constants (`l`, `δ`, `M`) that produce `ξ(ε,r+1)`, `L(ε,r+1)`.
pub fn schedule(
    theorem: Theorem,
    epsilon: &Rational,
    r: u32,
    extra: Option<Rational>,
    sul: &SulBound,
) -> Result<Schedule> {
    ratio::check_epsilon("epsilon", epsilon)?;
    let min_r = if theorem == Theorem::Ers2 { 3 } else { 2 };
    if r < min_r {
        return Err(Error::OrderOutOfRange {
            r: r as usize,
            min: min_r as usize,
            max: 64,
        });
    }
    if r > 64 {
        return Err(Error::OrderOutOfRange {
            r: r as usize,
            min: min_r as usize,
            max: 64,
        });
    }
    let eps = Magnitude::from_rational(epsilon);
    let mut values = BTreeMap::new();
    let mut put = |name: &str, v: Magnitude| {
        values.insert(name.to_string(), v);
    };
    let need_k = |extra: Option<Rational>| -> Result<Magnitude> {
        match extra {
            Some(k) if k.is_integer() && k >= Rational::one() => Ok(Magnitude::from_rational(&k)),
            Some(k) => Err(Error::Domain {
                name: "k",
                reason: format!("must be a positive integer, got {}", ratio::format_rational(&k)),
            }),
            None => Err(Error::Domain {
                name: "k",
                reason: "required for this theorem".into(),
            }),
        }
    };
    match theorem {
        Theorem::Maint => {
            let (xi, big_l) = maint_xi_l(&eps, r, sul);
            put("xi", xi);
            put("L", big_l);
            let step = maint_step(&eps, r, sul);
            put("xi_inner", step.xi_in);
            put("L_inner", step.l_in);
            put("l", step.l);
            put("delta", step.delta);
            put("M", step.m);
            put("L_next", step.l_next);
            put("xi_next", step.xi_next);
        }
        Theorem::Maint3 => {
            let k = need_k(extra)?;
            let (xi_in, l_in) = maint_xi_l(&eps.pow(3), r, sul);
            let delta = eps.pow(2).div(&int(8).mul(&l_in)).min(eps.div(&int(4)));
            let l = k.clone().max(int(2).div(&eps)).ceil();
            let m = sul.bound(&delta, &l);
            let big_k = int(8).mul(&m).mul(&l_in).div(&eps);
            let rho = xi_in.div(&int(2).mul(&m).pow(r));
            put("k", k);
            put("xi_inner", xi_in);
            put("L_inner", l_in);
            put("delta", delta);
            put("l", l);
            put("M", m);
            put("K", big_k);
            put("rho", rho);
        }
        Theorem::Rams => {
            let k = need_k(extra)?;
            let (xi_in, l_in) = maint_xi_l(&eps.pow(3), r, sul);
            let delta = eps.pow(2).div(&int(8).mul(&l_in)).min(eps.div(&int(8)));
            let big_k = int(8).mul(&k).mul(&l_in).div(&eps);
            put("k", k);
            put("xi_inner", xi_in.clone());
            put("L_inner", l_in);
            put("delta", delta);
            put("rho", xi_in);
            put("K", big_k);
        }
        Theorem::Maintx => {
            let (xi, big_l) = maintx_xi_l(&eps, r, sul)?;
            put("xi", xi);
            put("L", big_l);
            let step = maintx_step(&eps, r, sul)?;
            put("b", step.b);
            put("ramsey", step.ramsey);
            put("gamma", step.gamma);
            put("l", step.l);
            put("delta", step.delta);
            put("M", step.m);
            put("xi_inner", step.xi_in);
            put("L_inner", step.l_in);
            put("L_next", step.l_next);
            put("xi_next", step.xi_next);
        }
        Theorem::Ers2 => {
            let c = extra.ok_or_else(|| Error::Domain {
                name: "c",
                reason: "required for this theorem".into(),
            })?;
            if c <= Rational::zero() {
                return Err(Error::Domain {
                    name: "c",
                    reason: format!("must be positive, got {}", ratio::format_rational(&c)),
                });
            }
            let c = Magnitude::from_rational(&c);
            let sigma = c.div(&int(4)).min(eps.clone());
            let (xi, big_l) = maint_xi_l(&sigma, r, sul);
            let gap = match (&c, &sigma) {
                (Magnitude::Exact(c), Magnitude::Exact(s)) => c - s * BigRational::from_integer(2.into()),
                _ => unreachable!("c and sigma are exact rationals"),
            };
            if !gap.is_positive() {
                return Err(Error::Domain {
                    name: "beta",
                    reason: format!("c − 2σ = {gap} is not positive"),
                });
            }
            let beta = Magnitude::exact(gap).div(&big_l.pow(2));
            put("c", c);
            put("sigma", sigma);
            put("xi", xi);
            put("L", big_l);
            put("beta", beta);
        }
    }
    Ok(Schedule {
        theorem,
        epsilon: *epsilon,
        r,
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub theorem: Theorem,
    pub n: u64,
    pub r: u32,
    /// The clique/copy threshold coefficient of the theorem.
    pub xi: Magnitude,
    /// `ξ·n^r`.
    pub threshold: Magnitude,
    /// The class-size formula evaluated at `n` with the largest allowed
    /// cluster count.
    pub s: Magnitude,
    pub threshold_ok: bool,
    pub s_ok: bool,
    pub feasible: bool,
}

/// Whether the theorem's thresholds are non-vacuous at order `n`:
/// `ξ·n^r ≥ 1` and the class size `s ≥ 1`.
pub fn feasibility_report(
    theorem: Theorem,
    epsilon: &Rational,
    r: u32,
    n: u64,
    extra: Option<Rational>,
    sul: &SulBound,
) -> Result<FeasibilityReport> {
    let eps = Magnitude::from_rational(epsilon);
    let nm = int(n as u128);
    let quarter_eps_n = eps.mul(&nm).div(&int(4));
    let (xi, s) = match theorem {
        Theorem::Maint | Theorem::Maintx => {
            let sched = schedule(theorem, epsilon, r, None, sul)?;
            let s = if r == 2 {
                eps.mul(&nm)
            } else if theorem == Theorem::Maint {
                let step = maint_step(&eps, r - 1, sul);
                quarter_eps_n.div(&step.m.mul(&step.l_in))
            } else {
                let step = maintx_step(&eps, r - 1, sul)?;
                quarter_eps_n.div(&step.m.mul(&step.l_in))
            };
            (sched.value("xi").clone(), s)
        }
        Theorem::Maint3 => {
            let sched = schedule(theorem, epsilon, r, Some(extra.unwrap_or(Rational::one())), sul)?;
            let s = quarter_eps_n.div(&sched.value("M").mul(sched.value("L_inner")));
            (sched.value("rho").clone(), s)
        }
        Theorem::Rams => {
            let sched = schedule(theorem, epsilon, r, Some(extra.unwrap_or(Rational::one())), sul)?;
            let k = sched.value("k").clone();
            let s = quarter_eps_n.div(&k.mul(sched.value("L_inner")));
            (sched.value("rho").div(&k.pow(r)), s)
        }
        Theorem::Ers2 => {
            let sched = schedule(theorem, epsilon, r, extra, sul)?;
            let sigma = sched.value("sigma").clone();
            let (_, l_in) = maint_xi_l(&sigma.pow(3), r, sul);
            let delta = sigma.pow(2).div(&int(8).mul(&l_in)).min(sigma.div(&int(4)));
            let l = int(1).max(int(2).div(&sigma)).ceil();
            let m = sul.bound(&delta, &l);
            let s = sigma.mul(&nm).div(&int(4)).div(&m.mul(&l_in));
            (sched.value("xi").clone(), s)
        }
    };
    let threshold = xi.mul(&nm.pow(r));
    let threshold_ok = threshold >= Magnitude::one();
    let s = s.floor_u128().map(int).unwrap_or(s);
    let s_ok = s >= Magnitude::one();
    Ok(FeasibilityReport {
        theorem,
        n,
        r,
        xi,
        threshold,
        s,
        threshold_ok,
        s_ok,
        feasible: threshold_ok && s_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn big(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn hyper_normal_form() {
        assert_eq!(Hyper::tower(Hyper::Flat(3.0), 1.0), Hyper::Flat(16.0));
        assert_eq!(Hyper::tower(Hyper::Flat(4.0), 1.0), Hyper::Flat(65536.0));
        let t = Hyper::tower(Hyper::Flat(5.0), 1.0);
        assert_eq!(t, Hyper::tower(Hyper::Flat(1.0), 65536.0));
        assert!(Hyper::flat(1e30).cmp(&Hyper::Flat(1e17)) == Ordering::Greater);
        let a = Hyper::tower(Hyper::Flat(9.0), 1.0);
        let b = Hyper::tower(Hyper::Flat(10.0), 1.0);
        assert_eq!(a.cmp(&b), Ordering::Less);
    }

    #[test]
    fn two_tower_values() {
        assert_eq!(Magnitude::two_tower(&int(0)), int(1));
        assert_eq!(Magnitude::two_tower(&int(3)), int(16));
        assert_eq!(Magnitude::two_tower(&int(4)), int(65536));
        let t5 = Magnitude::two_tower(&int(5));
        assert!(!t5.is_exact());
        assert!(t5 > int(1u128 << 100));
        assert!(Magnitude::two_tower(&int(6)) > t5);
    }

    #[test]
    fn mixed_comparisons_and_arithmetic() {
        let huge = Magnitude::two_tower(&int(6));
        let tiny = huge.recip();
        assert!(tiny.is_positive());
        assert!(tiny < Magnitude::exact(big(1, 1_000_000_000)));
        assert!(tiny > Magnitude::Exact(BigRational::zero()));
        assert_eq!(huge.mul(&tiny), Magnitude::one());
        assert!(huge.pow(3) > huge);
        assert!(tiny.pow(3) < tiny);
        assert_eq!(tiny.clone().min(int(5)), tiny);
        assert_eq!(huge.clone().max(int(5)), huge);
        assert_eq!(tiny.ceil(), int(1));
        assert_eq!(tiny.floor_u128(), Some(0));
        assert_eq!(huge.floor_u128(), None);
        // big exact values switch representation but keep their order
        let two = int(2);
        let p = two.pow(5000);
        assert!(!p.is_exact());
        assert!(p > two.pow(4000));
        assert!(p.recip() < two.pow(4000).recip());
    }

    #[test]
    fn exact_round_trip_json() {
        let x = Magnitude::exact(big(3, 40));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"exact":"3/40"}"#);
        let back: Magnitude = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        let t = Magnitude::two_tower(&int(7)).recip();
        let back: Magnitude = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn sul_bound_floor_and_monotone() {
        assert!(sul_bound(&q(1, 2), 4) >= int(4));
        assert!(sul_bound(&q(1, 2), 1 << 40) >= int(1 << 40));
        for l in [1u64, 2, 7, 100, 1 << 30] {
            assert!(sul_bound(&q(1, 10), l) >= sul_bound(&q(1, 5), l));
            assert!(sul_bound(&q(1, 10), l + 1) >= sul_bound(&q(1, 10), l));
        }
        let big = Magnitude::exact(BigRational::from_integer(BigInt::from(10).pow(100)));
        assert!(sul_bound(&q(1, 100), 2) > big);
        let fixed = SulBound::Fixed { m: 10 };
        assert_eq!(fixed.bound(&Magnitude::from_rational(&q(1, 10)), &int(3)), int(10));
        let table = SulBound::Table {
            entries: vec![SulEntry {
                epsilon: q(1, 10),
                l: 8,
                m: 50,
            }],
        };
        assert_eq!(table.bound(&Magnitude::from_rational(&q(1, 5)), &int(4)), int(50));
        assert!(table.bound(&Magnitude::from_rational(&q(1, 20)), &int(4)) > int(1 << 100));
    }

    #[test]
    fn maint_base_case() {
        let s = schedule(Theorem::Maint, &q(1, 10), 2, None, &SulBound::Tower).unwrap();
        assert_eq!(s.value("xi"), &Magnitude::from_rational(&q(1, 10)));
        assert_eq!(s.value("L"), &int(1));
        assert!(s.value("xi").is_exact() && s.value("L").is_exact());
    }

    // Hand evaluation of the step recurrences with a fixed M = 10.
    #[test]
    fn maint_step_with_fixed_bound() {
        let sul = SulBound::Fixed { m: 10 };
        let eps = big(1, 2);
        let s = schedule(Theorem::Maint, &q(1, 2), 2, None, &sul).unwrap();
        // r = 2: ξ(ε³,2) = 1/8, L(ε³,2) = 1
        let xi_in = big(1, 8);
        let l = ratio::big_pow(&eps, 5).recip().ceil().max((big(4, 1) * &eps).recip()).ceil();
        assert_eq!(s.value("l"), &Magnitude::Exact(l.clone()));
        let delta = (xi_in / big(3, 1)).min(ratio::big_pow(&eps, 10) / big(256, 1));
        assert_eq!(s.value("delta"), &Magnitude::Exact(delta.clone()));
        let m = l.max(big(10, 1));
        assert_eq!(s.value("M"), &Magnitude::Exact(m.clone()));
        let l_next = big(8, 1) * &m / &eps;
        assert_eq!(s.value("L_next"), &Magnitude::Exact(l_next.clone()));
        let xi_next = &delta * &delta / ratio::big_pow(&(big(2, 1) * &m), 3);
        assert_eq!(s.value("xi_next"), &Magnitude::Exact(xi_next.clone()));
        let s3 = schedule(Theorem::Maint, &q(1, 2), 3, None, &sul).unwrap();
        assert_eq!(s3.value("xi"), &Magnitude::Exact(xi_next));
        assert_eq!(s3.value("L"), &Magnitude::Exact(l_next));
    }

    #[test]
    fn maint_r3_default_tower() {
        let s = schedule(Theorem::Maint, &q(1, 10), 3, None, &SulBound::Tower).unwrap();
        let eps = Magnitude::from_rational(&q(1, 10));
        let branch = eps.pow(15).div(&int(4096));
        for v in s.values.values() {
            assert!(v.is_positive());
        }
        assert!(*s.value("delta") <= branch);
        assert!(*s.value("delta") < eps);
        assert!(*s.value("xi") < eps);
        assert!(*s.value("L") >= int(1));
    }

    #[test]
    fn theorem_specific_schedules() {
        let sul = SulBound::Tower;
        let e = schedule(Theorem::Ers2, &q(1, 10), 3, Some(q(3, 10)), &sul).unwrap();
        assert_eq!(e.value("sigma"), &Magnitude::from_rational(&q(3, 40)));
        assert!(e.value("beta").is_positive());
        assert!(schedule(Theorem::Ers2, &q(1, 10), 3, Some(q(0, 1)), &sul).is_err());
        assert!(schedule(Theorem::Ers2, &q(1, 10), 2, Some(q(1, 4)), &sul).is_err());
        let r = schedule(Theorem::Rams, &q(1, 10), 2, Some(q(5, 1)), &sul).unwrap();
        // L(ε³,2) = 1 so K = 8k/ε = 400 and ρ = ε³
        assert_eq!(r.value("K"), &int(400));
        assert_eq!(r.value("rho"), &Magnitude::from_rational(&q(1, 1000)));
        assert_eq!(r.value("delta"), &Magnitude::from_rational(&q(1, 800)));
        let m3 = schedule(Theorem::Maint3, &q(1, 10), 2, Some(q(4, 1)), &sul).unwrap();
        assert_eq!(m3.value("l"), &int(20));
        assert!(m3.value("rho").is_positive());
        assert!(schedule(Theorem::Maint3, &q(1, 10), 2, None, &sul).is_err());
        let x = schedule(Theorem::Maintx, &q(1, 2), 2, None, &sul).unwrap();
        assert_eq!(x.value("b"), &int(8));
        assert_eq!(x.value("ramsey"), &int(3432));
        assert!(x.value("xi_next") < x.value("xi"));
    }

    #[test]
    fn xi_non_increasing_in_r() {
        for eps in [q(1, 2), q(1, 5), q(1, 10)] {
            let mut prev: Option<Magnitude> = None;
            for r in 2..=5 {
                let s = schedule(Theorem::Maint, &eps, r, None, &SulBound::Tower).unwrap();
                let xi = s.value("xi").clone();
                if let Some(p) = prev {
                    assert!(xi <= p, "r={r}");
                }
                prev = Some(xi);
            }
        }
    }

    #[test]
    fn feasibility() {
        let sul = SulBound::Tower;
        let f = feasibility_report(Theorem::Maint, &q(1, 2), 2, 100, None, &sul).unwrap();
        assert!(f.feasible);
        let f = feasibility_report(Theorem::Maint, &q(1, 10), 3, 1_000_000, None, &sul).unwrap();
        assert!(!f.threshold_ok && !f.feasible);
        for t in [Theorem::Maint, Theorem::Maint3, Theorem::Rams, Theorem::Maintx] {
            assert!(!feasibility_report(t, &q(1, 2), 2, 0, None, &sul).unwrap().feasible);
        }
        assert!(!feasibility_report(Theorem::Ers2, &q(1, 2), 3, 0, Some(q(1, 4)), &sul).unwrap().feasible);
    }
}
