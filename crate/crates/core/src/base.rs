//! Base dynamics: finite orbit sets, circle rotations and the binary shift
//! on eventually periodic words.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An eventually periodic binary sequence `t_0 t_1 ... t_{m-1} (b_0 ... b_{p-1})^inf`.
///
/// Always stored in canonical form (shortest transient, primitive block), so
/// structural equality is equality of the represented sequences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    transient: Vec<u8>,
    block: Vec<u8>,
}

impl Word {
    pub fn new(transient: Vec<u8>, block: Vec<u8>) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::Representation("repeating block must be nonempty".into()));
        }
        if transient.iter().chain(&block).any(|&s| s > 1) {
            return Err(Error::Representation("symbols must be 0 or 1".into()));
        }
        Ok(Self { transient, block }.canonical())
    }

    pub fn constant(symbol: u8) -> Self {
        Self { transient: Vec::new(), block: vec![symbol & 1] }
    }

    fn canonical(mut self) -> Self {
        let p = self.block.len();
        if let Some(d) = (1..=p).find(|&d| p % d == 0 && (d..p).all(|i| self.block[i] == self.block[i - d])) {
            self.block.truncate(d);
        }
        while let Some(&last) = self.transient.last() {
            if last != *self.block.last().unwrap() {
                break;
            }
            self.transient.pop();
            self.block.rotate_right(1);
        }
        self
    }

    pub fn transient(&self) -> &[u8] {
        &self.transient
    }

    pub fn block(&self) -> &[u8] {
        &self.block
    }

    pub fn symbol(&self, i: usize) -> u8 {
        match self.transient.get(i) {
            Some(&s) => s,
            None => self.block[(i - self.transient.len()) % self.block.len()],
        }
    }

    pub fn head(&self) -> u8 {
        self.symbol(0)
    }

    /// The shifted sequence `s_1 s_2 ...`.
    pub fn tail(&self) -> Self {
        let mut w = self.clone();
        if w.transient.is_empty() {
            w.block.rotate_left(1);
        } else {
            w.transient.remove(0);
        }
        w
    }

    /// The sequence `s x_0 x_1 ...`.
    pub fn prepend(&self, s: u8) -> Self {
        let mut transient = Vec::with_capacity(self.transient.len() + 1);
        transient.push(s & 1);
        transient.extend_from_slice(&self.transient);
        Self { transient, block: self.block.clone() }.canonical()
    }

    /// True when the sequence is purely periodic.
    pub fn is_periodic(&self) -> bool {
        self.transient.is_empty()
    }

    /// Binary expansion `sum s_i 2^-(i+1)` over the first 53 symbols.
    pub fn binary_value(&self) -> f64 {
        (0..53).fold(0.0, |acc, i| acc + self.symbol(i) as f64 * 0.5f64.powi(i as i32 + 1))
    }

    fn write_symbols(f: &mut fmt::Formatter<'_>, s: &[u8]) -> fmt::Result {
        s.iter().try_for_each(|c| write!(f, "{c}"))
    }

    fn parse_symbols(s: &str) -> Result<Vec<u8>> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Representation(format!("bad symbol {c:?}"))),
            })
            .collect()
    }
}

/// Forward words print as `transient(block)`.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Self::write_symbols(f, &self.transient)?;
        write!(f, "(")?;
        Self::write_symbols(f, &self.block)?;
        write!(f, ")")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (t, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::Representation(format!("expected transient(block), got {s:?}")))?;
        let b = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Representation(format!("missing ')' in {s:?}")))?;
        Word::new(Word::parse_symbols(t)?, Word::parse_symbols(b)?)
    }
}

/// A point of the one- or two-sided shift.
///
/// `past` holds `x_{-1}, x_{-2}, ...` (read leftwards) and is present only on
/// the two-sided shift.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftPoint {
    pub past: Option<Word>,
    pub future: Word,
}

impl ShiftPoint {
    pub fn one_sided(future: Word) -> Self {
        Self { past: None, future }
    }

    pub fn two_sided(past: Word, future: Word) -> Self {
        Self { past: Some(past), future }
    }

    /// `x_i` for `i >= 0`, or `x_{-1-j}` via `past_symbol(j)`.
    pub fn symbol(&self, i: usize) -> u8 {
        self.future.symbol(i)
    }

    pub fn past_symbol(&self, j: usize) -> Option<u8> {
        self.past.as_ref().map(|p| p.symbol(j))
    }

    pub fn shift(&self) -> Self {
        Self {
            past: self.past.as_ref().map(|p| p.prepend(self.future.head())),
            future: self.future.tail(),
        }
    }

    pub fn unshift(&self) -> Option<Self> {
        let past = self.past.as_ref()?;
        Some(Self {
            past: Some(past.tail()),
            future: self.future.prepend(past.head()),
        })
    }
}

/// One-sided points print like [`Word`]; two-sided points print as
/// `(block)transient.transient(block)` with the past in natural left-to-right
/// order.
impl fmt::Display for ShiftPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(past) = &self.past {
            write!(f, "(")?;
            past.block.iter().rev().try_for_each(|c| write!(f, "{c}"))?;
            write!(f, ")")?;
            past.transient.iter().rev().try_for_each(|c| write!(f, "{c}"))?;
            write!(f, ".")?;
        }
        write!(f, "{}", self.future)
    }
}

impl FromStr for ShiftPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('.') {
            None => Ok(Self::one_sided(s.parse()?)),
            Some((left, right)) => {
                let rest = left
                    .strip_prefix('(')
                    .ok_or_else(|| Error::Representation(format!("past must start with '(' in {s:?}")))?;
                let (b, t) = rest
                    .split_once(')')
                    .ok_or_else(|| Error::Representation(format!("missing ')' in past of {s:?}")))?;
                let mut block = Word::parse_symbols(b)?;
                let mut transient = Word::parse_symbols(t)?;
                block.reverse();
                transient.reverse();
                Ok(Self::two_sided(Word::new(transient, block)?, right.parse()?))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasePoint {
    /// Index into a [`FiniteOrbitBase`].
    Finite(usize),
    /// Circle coordinate in `[0, 1)`.
    Circle(f64),
    Shift(ShiftPoint),
}

/// A finite point set with successor (and optional predecessor) tables.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteOrbitBase {
    labels: Vec<f64>,
    successor: Vec<usize>,
    predecessor: Option<Vec<usize>>,
    window: Option<usize>,
}

impl FiniteOrbitBase {
    pub fn new(labels: Vec<f64>, successor: Vec<usize>, predecessor: Option<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Representation("finite base needs at least one point".into()));
        }
        if successor.len() != n || successor.iter().any(|&s| s >= n) {
            return Err(Error::Representation("successor table must map into the point set".into()));
        }
        if let Some(p) = &predecessor {
            if p.len() != n || p.iter().any(|&s| s >= n) {
                return Err(Error::Representation("predecessor table must map into the point set".into()));
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if !l.is_finite() || labels[..i].contains(l) {
                return Err(Error::Representation(format!("labels must be finite and distinct ({l})")));
            }
        }
        Ok(Self { labels, successor, predecessor, window: None })
    }

    /// Fixed points `-1` and `+1` plus the orbit `theta_n`, `-N <= n <= N`,
    /// with `theta_n = 1 - 1/(n+1)` for `n >= 0` and `theta_n = -1 + 1/n` for
    /// `n < 0`. The window edges are closed up by `theta_N -> +1` and
    /// `R^{-1}(theta_{-N}) = -1`.
    pub fn noinvattr(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::domain("window must be >= 1"));
        }
        let n = window as i64;
        let mut labels = vec![-1.0, 1.0];
        labels.extend((-n..=n).map(noinvattr_label));
        let idx = |k: i64| (2 + k + n) as usize;
        let mut successor = vec![0, 1];
        let mut predecessor = vec![0, 1];
        for k in -n..=n {
            successor.push(if k == n { 1 } else { idx(k + 1) });
            predecessor.push(if k == -n { 0 } else { idx(k - 1) });
        }
        Ok(Self {
            labels,
            successor,
            predecessor: Some(predecessor),
            window: Some(window),
        })
    }

    /// Index of `theta_k` in a base built by [`FiniteOrbitBase::noinvattr`].
    pub fn noinvattr_index(&self, k: i64) -> Option<usize> {
        let n = self.window? as i64;
        (-n..=n).contains(&k).then(|| (2 + k + n) as usize)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn successor_table(&self) -> &[usize] {
        &self.successor
    }

    pub fn predecessor_table(&self) -> Option<&[usize]> {
        self.predecessor.as_deref()
    }

    pub fn window(&self) -> Option<usize> {
        self.window
    }

    pub fn index_of(&self, label: f64) -> Option<usize> {
        self.labels.iter().position(|&l| l == label).or_else(|| {
            self.labels.iter().position(|&l| (l - label).abs() < 1e-12)
        })
    }
}

pub fn noinvattr_label(k: i64) -> f64 {
    if k >= 0 {
        1.0 - 1.0 / (k as f64 + 1.0)
    } else {
        -1.0 + 1.0 / k as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sided {
    One,
    Two,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaseSystem {
    FiniteOrbit(FiniteOrbitBase),
    /// `theta -> theta + omega (mod 1)`.
    Circle { omega: f64 },
    Shift { sided: Sided },
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl BaseSystem {
    pub fn circle(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(Error::domain(format!("rotation number must lie in (0, 1), got {omega}")));
        }
        Ok(BaseSystem::Circle { omega })
    }

    pub fn is_invertible(&self) -> bool {
        match self {
            BaseSystem::FiniteOrbit(b) => b.predecessor.is_some(),
            BaseSystem::Circle { .. } => true,
            BaseSystem::Shift { sided } => *sided == Sided::Two,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            BaseSystem::FiniteOrbit(_) => "finite-orbit",
            BaseSystem::Circle { .. } => "circle-rotation",
            BaseSystem::Shift { sided: Sided::One } => "one-sided-shift",
            BaseSystem::Shift { sided: Sided::Two } => "two-sided-shift",
        }
    }

    /// Rejects points that belong to a different variant.
    pub fn check_point(&self, p: &BasePoint) -> Result<()> {
        let ok = match (self, p) {
            (BaseSystem::FiniteOrbit(b), BasePoint::Finite(i)) => *i < b.len(),
            (BaseSystem::Circle { .. }, BasePoint::Circle(t)) => (0.0..1.0).contains(t),
            (BaseSystem::Shift { sided }, BasePoint::Shift(s)) => (*sided == Sided::Two) == s.past.is_some(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Representation(format!("{p:?} is not a point of the {} base", self.variant_name())))
        }
    }

    pub fn successor(&self, p: &BasePoint) -> Result<BasePoint> {
        self.check_point(p)?;
        Ok(match (self, p) {
            (BaseSystem::FiniteOrbit(b), BasePoint::Finite(i)) => BasePoint::Finite(b.successor[*i]),
            (BaseSystem::Circle { omega }, BasePoint::Circle(t)) => BasePoint::Circle(wrap_unit(t + omega)),
            (BaseSystem::Shift { .. }, BasePoint::Shift(s)) => BasePoint::Shift(s.shift()),
            _ => unreachable!("checked above"),
        })
    }

    pub fn predecessor(&self, p: &BasePoint) -> Result<BasePoint> {
        self.check_point(p)?;
        if !self.is_invertible() {
            return Err(Error::Capability(format!("{} base is not invertible", self.variant_name())));
        }
        Ok(match (self, p) {
            (BaseSystem::FiniteOrbit(b), BasePoint::Finite(i)) => {
                BasePoint::Finite(b.predecessor.as_ref().expect("invertible")[*i])
            }
            (BaseSystem::Circle { omega }, BasePoint::Circle(t)) => BasePoint::Circle(wrap_unit(t - omega)),
            (BaseSystem::Shift { .. }, BasePoint::Shift(s)) => {
                BasePoint::Shift(s.unshift().expect("two-sided point"))
            }
            _ => unreachable!("checked above"),
        })
    }

    /// `R^n(p)`.
    pub fn advance(&self, p: &BasePoint, n: usize) -> Result<BasePoint> {
        let mut q = p.clone();
        for _ in 0..n {
            q = self.successor(&q)?;
        }
        Ok(q)
    }

    /// Scalar coordinate fed to base modulation functions: the label of a
    /// finite point, the circle angle, or the binary value of a shift word.
    pub fn coordinate(&self, p: &BasePoint) -> f64 {
        match (self, p) {
            (BaseSystem::FiniteOrbit(b), BasePoint::Finite(i)) => b.labels[*i],
            (_, BasePoint::Circle(t)) => *t,
            (_, BasePoint::Shift(s)) => s.future.binary_value(),
            (_, BasePoint::Finite(i)) => *i as f64,
        }
    }

    /// Textual key used by orbit-keyed graphs and the CLI.
    pub fn key(&self, p: &BasePoint) -> String {
        match (self, p) {
            (BaseSystem::FiniteOrbit(b), BasePoint::Finite(i)) => format!("{}", b.labels[*i]),
            (_, BasePoint::Finite(i)) => format!("#{i}"),
            (_, BasePoint::Circle(t)) => format!("{t}"),
            (_, BasePoint::Shift(s)) => s.to_string(),
        }
    }

    pub fn parse_point(&self, s: &str) -> Result<BasePoint> {
        let s = s.trim();
        let p = match self {
            BaseSystem::FiniteOrbit(b) => {
                let label: f64 = s
                    .parse()
                    .map_err(|_| Error::Representation(format!("expected a point label, got {s:?}")))?;
                BasePoint::Finite(
                    b.index_of(label)
                        .ok_or_else(|| Error::Representation(format!("no base point labelled {s}")))?,
                )
            }
            BaseSystem::Circle { .. } => {
                let t: f64 = s
                    .parse()
                    .map_err(|_| Error::Representation(format!("expected a circle coordinate, got {s:?}")))?;
                BasePoint::Circle(wrap_unit(t))
            }
            BaseSystem::Shift { .. } => BasePoint::Shift(s.parse()?),
        };
        self.check_point(&p)?;
        Ok(p)
    }

    /// Deterministic sample of base points: every point (or an even stride)
    /// of a finite base, an even grid on the circle, seeded random words on
    /// the shift.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<BasePoint> {
        match self {
            BaseSystem::FiniteOrbit(b) => {
                if count >= b.len() {
                    (0..b.len()).map(BasePoint::Finite).collect()
                } else {
                    (0..count).map(|i| BasePoint::Finite(i * b.len() / count)).collect()
                }
            }
            BaseSystem::Circle { .. } => (0..count).map(|i| BasePoint::Circle(i as f64 / count as f64)).collect(),
            BaseSystem::Shift { sided } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let word = |rng: &mut ChaCha8Rng| {
                    let t: Vec<u8> = (0..rng.random_range(0..8)).map(|_| rng.random_range(0..2)).collect();
                    let b: Vec<u8> = (0..rng.random_range(1..5)).map(|_| rng.random_range(0..2)).collect();
                    Word::new(t, b).expect("valid symbols")
                };
                (0..count)
                    .map(|_| {
                        let future = word(&mut rng);
                        let sp = match sided {
                            Sided::One => ShiftPoint::one_sided(future),
                            Sided::Two => ShiftPoint::two_sided(word(&mut rng), future),
                        };
                        BasePoint::Shift(sp)
                    })
                    .collect()
            }
        }
    }
}
