//! Predicate representations: `ℓ`-letter wildcards and `d`-field multi-ranges.
//!
//! Both kinds support the three elementary operations the atom engine relies
//! on (intersection, cardinality, inclusion) without ever materialising a
//! complement. Empty sets are never represented: an empty intersection is
//! reported as `None`.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

/// Arbitrary-precision set size.
pub type Cardinal = BigUint;

/// Widest supported multi-range field.
pub const MAX_FIELD_WIDTH: u32 = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("operands do not share the same geometry")]
    Mismatch,
}

fn parse_err(pos: usize, msg: impl Into<String>) -> SetError {
    SetError::Parse {
        pos,
        msg: msg.into(),
    }
}

/// One wildcard letter. The derived order `Zero < One < Star` is the canonical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Zero,
    One,
    Star,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Star => '*',
        }
    }
}

/// Representation kind of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Wildcard,
    MultiRange,
}

/// Header geometry shared by every predicate of one instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Geometry {
    Wildcard { bits: usize },
    MultiRange { widths: Arc<[u32]> },
}

impl Geometry {
    pub fn wildcard(bits: usize) -> Result<Self, SetError> {
        if bits == 0 {
            return Err(SetError::Geometry(
                "header bit-length must be at least 1".into(),
            ));
        }
        Ok(Geometry::Wildcard { bits })
    }

    pub fn multirange(widths: &[u32]) -> Result<Self, SetError> {
        if widths.is_empty() {
            return Err(SetError::Geometry("at least one field is required".into()));
        }
        if let Some(w) = widths.iter().find(|&&w| w == 0 || w > MAX_FIELD_WIDTH) {
            return Err(SetError::Geometry(format!(
                "field width {w} outside 1..={MAX_FIELD_WIDTH}"
            )));
        }
        Ok(Geometry::MultiRange {
            widths: widths.into(),
        })
    }

    pub fn kind(&self) -> Kind {
        match self {
            Geometry::Wildcard { .. } => Kind::Wildcard,
            Geometry::MultiRange { .. } => Kind::MultiRange,
        }
    }

    /// Total header length `ℓ` in bits.
    pub fn header_bits(&self) -> usize {
        match self {
            Geometry::Wildcard { bits } => *bits,
            Geometry::MultiRange { widths } => widths.iter().map(|&w| w as usize).sum(),
        }
    }

    /// The whole header space `H`.
    pub fn full(&self) -> RuleSet {
        match self {
            Geometry::Wildcard { bits } => RuleSet::Wildcard(Wildcard::full(*bits)),
            Geometry::MultiRange { widths } => {
                RuleSet::MultiRange(MultiRange::full(widths.clone()))
            }
        }
    }

    /// `|H| = 2^ℓ`.
    pub fn space_size(&self) -> Cardinal {
        Cardinal::one() << self.header_bits()
    }

    /// True when `s` has this geometry.
    pub fn admits(&self, s: &RuleSet) -> bool {
        match (self, s) {
            (Geometry::Wildcard { bits }, RuleSet::Wildcard(w)) => w.len() == *bits,
            (Geometry::MultiRange { widths }, RuleSet::MultiRange(m)) => m.widths[..] == widths[..],
            _ => false,
        }
    }

    pub fn parse(&self, text: &str) -> Result<RuleSet, SetError> {
        parse_ruleset(text, self)
    }
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

/// `ℓ`-letter string over `{0, 1, *}`, stored as a care mask and a value mask.
///
/// Letter `i` lives in word `i / 64` at bit `63 - i % 64`, so the first letter
/// is the most significant bit of the first word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Wildcard {
    len: usize,
    care: Box<[u64]>,
    value: Box<[u64]>,
}

impl Wildcard {
    pub fn full(len: usize) -> Self {
        let n = words_for(len);
        Wildcard {
            len,
            care: vec![0; n].into(),
            value: vec![0; n].into(),
        }
    }

    pub fn from_symbols(symbols: &[Symbol]) -> Self {
        let mut w = Wildcard::full(symbols.len());
        for (i, &s) in symbols.iter().enumerate() {
            w.set(i, s);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn set(&mut self, i: usize, s: Symbol) {
        let (word, bit) = (i / 64, 63 - (i % 64));
        let m = 1u64 << bit;
        match s {
            Symbol::Star => {
                self.care[word] &= !m;
                self.value[word] &= !m;
            }
            Symbol::Zero => {
                self.care[word] |= m;
                self.value[word] &= !m;
            }
            Symbol::One => {
                self.care[word] |= m;
                self.value[word] |= m;
            }
        }
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        assert!(i < self.len, "letter index {i} out of range");
        let (word, bit) = (i / 64, 63 - (i % 64));
        if self.care[word] >> bit & 1 == 0 {
            Symbol::Star
        } else if self.value[word] >> bit & 1 == 1 {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.len).map(|i| self.symbol(i))
    }

    pub fn stars(&self) -> usize {
        self.len
            - self
                .care
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum::<usize>()
    }

    fn intersect(&self, other: &Self) -> Option<Self> {
        let mut care = Vec::with_capacity(self.care.len());
        let mut value = Vec::with_capacity(self.care.len());
        for i in 0..self.care.len() {
            let both = self.care[i] & other.care[i];
            if both & (self.value[i] ^ other.value[i]) != 0 {
                return None;
            }
            care.push(self.care[i] | other.care[i]);
            value.push(self.value[i] | other.value[i]);
        }
        Some(Wildcard {
            len: self.len,
            care: care.into(),
            value: value.into(),
        })
    }

    fn is_subset(&self, other: &Self) -> bool {
        (0..self.care.len()).all(|i| {
            other.care[i] & !self.care[i] == 0
                && (self.value[i] ^ other.value[i]) & other.care[i] == 0
        })
    }
}

impl Ord for Wildcard {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for i in 0..self.care.len() {
                let diff = (self.care[i] ^ other.care[i]) | (self.value[i] ^ other.value[i]);
                if diff != 0 {
                    let letter = i * 64 + diff.leading_zeros() as usize;
                    return self.symbol(letter).cmp(&other.symbol(letter));
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Wildcard {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cartesian product of inclusive integer intervals, one per header field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiRange {
    widths: Arc<[u32]>,
    ranges: Box<[(u128, u128)]>,
}

fn field_max(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

impl MultiRange {
    pub fn full(widths: Arc<[u32]>) -> Self {
        let ranges = widths.iter().map(|&w| (0, field_max(w))).collect();
        MultiRange { widths, ranges }
    }

    /// Builds a multi-range, checking `a_i ≤ b_i < 2^{ℓ_i}` for every field.
    pub fn new(widths: Arc<[u32]>, ranges: Vec<(u128, u128)>) -> Result<Self, SetError> {
        if ranges.len() != widths.len() {
            return Err(SetError::Geometry(format!(
                "expected {} fields, got {}",
                widths.len(),
                ranges.len()
            )));
        }
        for (i, (&(a, b), &w)) in ranges.iter().zip(widths.iter()).enumerate() {
            if a > b {
                return Err(SetError::Geometry(format!(
                    "field {i}: empty interval [{a},{b}]"
                )));
            }
            if b > field_max(w) {
                return Err(SetError::Geometry(format!(
                    "field {i}: upper bound {b} exceeds {w}-bit field"
                )));
            }
        }
        Ok(MultiRange {
            widths,
            ranges: ranges.into(),
        })
    }

    pub fn widths(&self) -> &[u32] {
        &self.widths
    }

    pub fn ranges(&self) -> &[(u128, u128)] {
        &self.ranges
    }

    fn intersect(&self, other: &Self) -> Option<Self> {
        let ranges = self
            .ranges
            .iter()
            .zip(other.ranges.iter())
            .map(|(&(a, b), &(c, d))| {
                let (lo, hi) = (a.max(c), b.min(d));
                (lo <= hi).then_some((lo, hi))
            })
            .collect::<Option<Vec<_>>>()?;
        Some(MultiRange {
            widths: self.widths.clone(),
            ranges: ranges.into(),
        })
    }

    fn is_subset(&self, other: &Self) -> bool {
        self.ranges
            .iter()
            .zip(other.ranges.iter())
            .all(|(&(a, b), &(c, d))| c <= a && b <= d)
    }

    fn cardinality(&self) -> Cardinal {
        self.ranges
            .iter()
            .map(|&(a, b)| Cardinal::from(b - a) + 1u32)
            .product()
    }
}

impl Ord for MultiRange {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ranges
            .cmp(&other.ranges)
            .then_with(|| self.widths.cmp(&other.widths))
    }
}

impl PartialOrd for MultiRange {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A nonempty predicate value in one of the two supported representations.
///
/// The `Ord` implementation is the canonical order: lexicographic over
/// letters (`0 < 1 < *`) for wildcards, over `(a_1, b_1, …, a_d, b_d)` for
/// multi-ranges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleSet {
    Wildcard(Wildcard),
    MultiRange(MultiRange),
}

impl RuleSet {
    pub fn kind(&self) -> Kind {
        match self {
            RuleSet::Wildcard(_) => Kind::Wildcard,
            RuleSet::MultiRange(_) => Kind::MultiRange,
        }
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        match (self, other) {
            (RuleSet::Wildcard(a), RuleSet::Wildcard(b)) => a.len == b.len,
            (RuleSet::MultiRange(a), RuleSet::MultiRange(b)) => a.widths[..] == b.widths[..],
            _ => false,
        }
    }

    /// `self ∩ other`, or `None` when empty.
    pub fn try_intersect(&self, other: &Self) -> Result<Option<RuleSet>, SetError> {
        match (self, other) {
            (RuleSet::Wildcard(a), RuleSet::Wildcard(b)) if a.len == b.len => {
                Ok(a.intersect(b).map(RuleSet::Wildcard))
            }
            (RuleSet::MultiRange(a), RuleSet::MultiRange(b)) if a.widths[..] == b.widths[..] => {
                Ok(a.intersect(b).map(RuleSet::MultiRange))
            }
            _ => Err(SetError::Mismatch),
        }
    }

    /// Panics on mismatched geometry, which is a caller bug.
    pub fn intersect(&self, other: &Self) -> Option<RuleSet> {
        self.try_intersect(other)
            .expect("intersecting predicates of different geometry")
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.intersect(other).is_some()
    }

    pub fn cardinality(&self) -> Cardinal {
        match self {
            RuleSet::Wildcard(w) => Cardinal::one() << w.stars(),
            RuleSet::MultiRange(m) => m.cardinality(),
        }
    }

    /// `self ⊆ other`, via a representation-specific containment test.
    pub fn is_subset(&self, other: &Self) -> bool {
        match (self, other) {
            (RuleSet::Wildcard(a), RuleSet::Wildcard(b)) if a.len == b.len => a.is_subset(b),
            (RuleSet::MultiRange(a), RuleSet::MultiRange(b)) if a.widths[..] == b.widths[..] => {
                a.is_subset(b)
            }
            _ => panic!("inclusion test between predicates of different geometry"),
        }
    }

    /// `self ⊆ other` through the identity `|s ∩ t| = |s|`.
    pub fn is_subset_by_cardinality(&self, other: &Self) -> bool {
        match self.intersect(other) {
            Some(meet) => meet.cardinality() == self.cardinality(),
            None => false,
        }
    }

    pub fn is_singleton(&self) -> bool {
        match self {
            RuleSet::Wildcard(w) => w.stars() == 0,
            RuleSet::MultiRange(m) => m.ranges.iter().all(|&(a, b)| a == b),
        }
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        CanonicalKey(self.clone())
    }

    /// Elements of the set as singletons, in canonical order.
    pub fn elements(&self) -> Elements<'_> {
        Elements::new(self)
    }

    /// Header text for a singleton: the bit string for wildcards, the
    /// per-field values `[v1,…,vd]` for multi-ranges.
    pub fn format_header(&self) -> String {
        match self {
            RuleSet::Wildcard(_) => self.to_string(),
            RuleSet::MultiRange(m) => {
                let vals: Vec<String> = m.ranges.iter().map(|(a, _)| a.to_string()).collect();
                format!("[{}]", vals.join(","))
            }
        }
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSet::Wildcard(w) => {
                for s in w.symbols() {
                    write!(f, "{}", s.as_char())?;
                }
                Ok(())
            }
            RuleSet::MultiRange(m) => {
                write!(f, "[")?;
                for (i, (a, b)) in m.ranges.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "[{a},{b}]")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Total-order key of a [`RuleSet`]; equal keys denote equal sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(RuleSet);

impl CanonicalKey {
    pub fn set(&self) -> &RuleSet {
        &self.0
    }
}

impl Borrow<RuleSet> for CanonicalKey {
    fn borrow(&self) -> &RuleSet {
        &self.0
    }
}

impl From<RuleSet> for CanonicalKey {
    fn from(s: RuleSet) -> Self {
        CanonicalKey(s)
    }
}

/// Lazy enumeration of a set's elements in canonical order.
pub struct Elements<'a> {
    base: &'a RuleSet,
    // Wildcard: positions of the stars; counter over them.
    stars: Vec<usize>,
    counter: u128,
    // Multi-range odometer.
    odometer: Vec<u128>,
    done: bool,
}

impl<'a> Elements<'a> {
    fn new(base: &'a RuleSet) -> Self {
        match base {
            RuleSet::Wildcard(w) => Elements {
                base,
                stars: (0..w.len)
                    .filter(|&i| w.symbol(i) == Symbol::Star)
                    .collect(),
                counter: 0,
                odometer: Vec::new(),
                done: false,
            },
            RuleSet::MultiRange(m) => Elements {
                base,
                stars: Vec::new(),
                counter: 0,
                odometer: m.ranges.iter().map(|&(a, _)| a).collect(),
                done: false,
            },
        }
    }
}

impl Iterator for Elements<'_> {
    type Item = RuleSet;

    fn next(&mut self) -> Option<RuleSet> {
        if self.done {
            return None;
        }
        match self.base {
            RuleSet::Wildcard(w) => {
                let f = self.stars.len();
                let mut out = w.clone();
                for (j, &pos) in self.stars.iter().enumerate() {
                    let shift = f - 1 - j;
                    let bit = shift < 128 && (self.counter >> shift) & 1 == 1;
                    out.set(pos, if bit { Symbol::One } else { Symbol::Zero });
                }
                if f < 128 && self.counter + 1 >= 1u128 << f {
                    self.done = true;
                } else {
                    self.counter += 1;
                }
                Some(RuleSet::Wildcard(out))
            }
            RuleSet::MultiRange(m) => {
                let out = MultiRange {
                    widths: m.widths.clone(),
                    ranges: self.odometer.iter().map(|&v| (v, v)).collect(),
                };
                // advance, last field fastest
                let mut i = m.ranges.len();
                loop {
                    if i == 0 {
                        self.done = true;
                        break;
                    }
                    i -= 1;
                    let (lo, hi) = m.ranges[i];
                    if self.odometer[i] < hi {
                        self.odometer[i] += 1;
                        break;
                    }
                    self.odometer[i] = lo;
                }
                Some(RuleSet::MultiRange(out))
            }
        }
    }
}

/// Parses a predicate in the instance text form: a `{0,1,*}` string for
/// wildcards, a JSON-style array `[[a1,b1],…]` for multi-ranges.
pub fn parse_ruleset(text: &str, geometry: &Geometry) -> Result<RuleSet, SetError> {
    match geometry {
        Geometry::Wildcard { bits } => {
            let mut symbols = Vec::with_capacity(*bits);
            for (pos, ch) in text.chars().enumerate() {
                symbols.push(match ch {
                    '0' => Symbol::Zero,
                    '1' => Symbol::One,
                    '*' => Symbol::Star,
                    other => return Err(parse_err(pos, format!("bad wildcard symbol {other:?}"))),
                });
            }
            if symbols.len() != *bits {
                return Err(parse_err(
                    symbols.len().min(*bits),
                    format!("expected {bits} letters, got {}", symbols.len()),
                ));
            }
            Ok(RuleSet::Wildcard(Wildcard::from_symbols(&symbols)))
        }
        Geometry::MultiRange { widths } => {
            let ranges = RangeParser::new(text).parse()?;
            MultiRange::new(widths.clone(), ranges)
                .map(RuleSet::MultiRange)
                .map_err(|e| parse_err(0, e.to_string()))
        }
    }
}

pub fn format_ruleset(s: &RuleSet) -> String {
    s.to_string()
}

struct RangeParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> RangeParser<'a> {
    fn new(text: &'a str) -> Self {
        RangeParser {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, ch: u8) -> Result<(), SetError> {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(parse_err(self.pos, format!("expected '{}'", ch as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u128, SetError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, "expected a nonnegative integer"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(start, "integer out of range"))
    }

    fn parse(mut self) -> Result<Vec<(u128, u128)>, SetError> {
        let mut out = Vec::new();
        self.expect(b'[')?;
        if self.peek() == Some(b']') {
            self.pos += 1;
        } else {
            loop {
                self.expect(b'[')?;
                let a = self.number()?;
                self.expect(b',')?;
                let b = self.number()?;
                self.expect(b']')?;
                out.push((a, b));
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b']') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(parse_err(self.pos, "expected ',' or ']'")),
                }
            }
        }
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(parse_err(self.pos, "trailing characters"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wc(text: &str) -> RuleSet {
        parse_ruleset(text, &Geometry::wildcard(text.len()).unwrap()).unwrap()
    }

    fn mr(widths: &[u32], ranges: &[(u128, u128)]) -> RuleSet {
        RuleSet::MultiRange(MultiRange::new(widths.into(), ranges.to_vec()).unwrap())
    }

    #[test]
    fn wildcard_meet() {
        assert_eq!(wc("10**").intersect(&wc("*0*1")), Some(wc("10*1")));
        assert_eq!(wc("110*").intersect(&wc("0***")), None);
    }

    #[test]
    fn multirange_meet() {
        let a = mr(&[3, 3], &[(0, 4), (1, 5)]);
        let b = mr(&[3, 3], &[(2, 6), (0, 3)]);
        assert_eq!(a.intersect(&b), Some(mr(&[3, 3], &[(2, 4), (1, 3)])));
        assert_eq!(mr(&[3], &[(0, 1)]).intersect(&mr(&[3], &[(2, 7)])), None);
    }

    #[test]
    fn cardinalities() {
        assert_eq!(wc("10*1").cardinality(), 2u32.into());
        assert_eq!(wc("****").cardinality(), 16u32.into());
        assert_eq!(mr(&[3, 3], &[(2, 4), (1, 3)]).cardinality(), 9u32.into());
        let wide = Geometry::multirange(&[128, 128]).unwrap().full();
        assert_eq!(wide.cardinality(), Cardinal::one() << 256);
        assert_eq!(
            Geometry::wildcard(300).unwrap().full().cardinality(),
            Cardinal::one() << 300
        );
    }

    #[test]
    fn subsets() {
        assert!(wc("110*").is_subset(&wc("1***")));
        assert!(!wc("1***").is_subset(&wc("110*")));
        assert!(mr(&[3], &[(2, 4)]).is_subset(&mr(&[3], &[(0, 4)])));
        assert!(wc("110*").is_subset_by_cardinality(&wc("1***")));
    }

    #[test]
    fn canonical_order() {
        assert!(wc("0***").canonical_key() < wc("10**").canonical_key());
        assert_eq!(wc("110*").canonical_key(), wc("110*").canonical_key());
        assert!(wc("1***") < wc("****"));
        assert!(
            mr(&[3, 3], &[(0, 4), (1, 5)]).canonical_key()
                < mr(&[3, 3], &[(0, 4), (2, 2)]).canonical_key()
        );
        // letters past the first word
        let mut a = "*".repeat(70);
        let mut b = a.clone();
        a.replace_range(66..67, "0");
        b.replace_range(66..67, "1");
        assert!(wc(&a) < wc(&b));
    }

    #[test]
    fn parse_and_format() {
        let g4 = Geometry::wildcard(4).unwrap();
        let s = parse_ruleset("110*", &g4).unwrap();
        let RuleSet::Wildcard(w) = &s else { panic!() };
        assert_eq!(
            w.symbols().collect::<Vec<_>>(),
            vec![Symbol::One, Symbol::One, Symbol::Zero, Symbol::Star]
        );
        assert_eq!(s.to_string(), "110*");

        let g33 = Geometry::multirange(&[3, 3]).unwrap();
        let m = parse_ruleset("[[0,4],[1,5]]", &g33).unwrap();
        assert_eq!(m, mr(&[3, 3], &[(0, 4), (1, 5)]));
        assert_eq!(m.to_string(), "[[0,4],[1,5]]");
        assert_eq!(parse_ruleset(" [ [0, 4] ,[1,5]] ", &g33).unwrap(), m);

        let g3 = Geometry::wildcard(3).unwrap();
        assert_eq!(
            parse_ruleset("12*", &g3),
            Err(SetError::Parse {
                pos: 1,
                msg: "bad wildcard symbol '2'".into()
            })
        );
        assert!(parse_ruleset("10", &g3).is_err());
        assert!(parse_ruleset("[[4,1],[0,0]]", &g33).is_err());
        assert!(parse_ruleset("[[0,8],[0,0]]", &g33).is_err());
        assert!(parse_ruleset("[[0,1]]", &g33).is_err());
        assert!(parse_ruleset("[[0,1],[0,0]]x", &g33).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::wildcard(0).is_err());
        assert!(Geometry::multirange(&[]).is_err());
        assert!(Geometry::multirange(&[0]).is_err());
        assert!(Geometry::multirange(&[129]).is_err());
    }

    #[test]
    fn mismatch_is_reported() {
        assert_eq!(wc("10").try_intersect(&wc("101")), Err(SetError::Mismatch));
        assert_eq!(
            wc("10").try_intersect(&mr(&[2], &[(0, 1)])),
            Err(SetError::Mismatch)
        );
    }

    #[test]
    fn enumerate_elements() {
        let got: Vec<String> = wc("1*0*").elements().map(|e| e.to_string()).collect();
        assert_eq!(got, ["1000", "1001", "1100", "1101"]);
        let got: Vec<String> = mr(&[3, 3], &[(1, 2), (5, 6)])
            .elements()
            .map(|e| e.format_header())
            .collect();
        assert_eq!(got, ["[1,5]", "[1,6]", "[2,5]", "[2,6]"]);
        assert_eq!(wc("101").elements().count(), 1);
        assert_eq!(
            Geometry::wildcard(200)
                .unwrap()
                .full()
                .elements()
                .take(3)
                .count(),
            3
        );
    }
}
