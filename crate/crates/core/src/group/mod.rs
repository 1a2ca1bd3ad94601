//! Finitely generated groups with decidable equality.
//!
//! A [`Group`] is a small value describing one of the concrete families used
//! in the experiments; its elements are [`Element`]s in canonical normal form,
//! so structural equality is group equality and elements can key maps.

pub mod ball;
pub mod grigorchuk;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
pub use ball::{ball, word_length, BallCache, Limits, WordMetric, WordMetricBall};
pub use grigorchuk::{Nucleus, Portrait, RecursiveOrder};

/// Group descriptor, also the JSON form `{"kind": ..., "rank"/"order": n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Group {
    /// `Z^rank`.
    Lattice { rank: usize },
    /// Free group on `rank` letters.
    Free { rank: usize },
    /// Infinite dihedral group `<s, t | s², t²>`.
    DihedralInf,
    /// `Z/order`.
    Cyclic { order: u64 },
    /// Dihedral group of the regular `order`-gon (`2·order` elements).
    Dihedral { order: u64 },
    /// The first Grigorchuk group.
    Grigorchuk,
}

/// Canonical normal form of a group element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Lattice(Vec<i64>),
    /// Freely reduced word; letter `i+1` is generator `i`, `-(i+1)` its inverse.
    Free(Vec<i32>),
    /// `x ↦ ±x + shift` on `Z`, with `s: x ↦ -x`, `t: x ↦ 1 - x`.
    Affine { flip: bool, shift: i64 },
    Cyclic(u64),
    /// `x ↦ ±x + rot (mod n)` on the vertices of the `n`-gon.
    Dihedral { flip: bool, rot: u64 },
    Grigorchuk(Portrait),
}

/// A letter of a word over the primitive generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Letter {
    pub generator: usize,
    pub exponent: i64,
}

/// Result of [`Group::element_order`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Finite(u64),
    ExceedsCap,
}

impl Order {
    pub fn finite(self) -> Option<u64> {
        match self {
            Order::Finite(n) => Some(n),
            Order::ExceedsCap => None,
        }
    }
}

/// A finite generating set; `symmetric` records that it is closed under inverses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratingSet {
    elements: Vec<Element>,
    symmetric: bool,
}

impl GeneratingSet {
    /// Validates membership, rejects the identity and checks the symmetry flag.
    pub fn new(group: &Group, elements: Vec<Element>, symmetric: bool) -> Result<Self> {
        if elements.is_empty() {
            return domain("generating set must be nonempty");
        }
        let mut uniq: Vec<Element> = Vec::with_capacity(elements.len());
        for g in elements {
            group.check(&g)?;
            if group.is_identity(&g) {
                return domain("generating set must not contain the identity");
            }
            if !uniq.contains(&g) {
                uniq.push(g);
            }
        }
        if symmetric {
            for g in &uniq {
                let inv = group.inverse(g)?;
                if !uniq.contains(&inv) {
                    return domain(format!(
                        "generating set flagged symmetric but {} is missing",
                        group.display(&inv)
                    ));
                }
            }
        }
        Ok(Self {
            elements: uniq,
            symmetric,
        })
    }

    /// Adds missing inverses.
    pub fn symmetric_closure(group: &Group, elements: Vec<Element>) -> Result<Self> {
        let mut all = elements.clone();
        for g in &elements {
            all.push(group.inverse(g)?);
        }
        Self::new(group, all, true)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn free_letter_char(l: i32) -> char {
    let idx = (l.unsigned_abs() - 1) as u8;
    let ch = (b'a' + idx) as char;
    if l < 0 {
        ch.to_ascii_uppercase()
    } else {
        ch
    }
}

impl Group {
    pub fn name(&self) -> String {
        match self {
            Group::Lattice { rank } => format!("Z^{rank}"),
            Group::Free { rank } => format!("F_{rank}"),
            Group::DihedralInf => "D_inf".into(),
            Group::Cyclic { order } => format!("Z/{order}"),
            Group::Dihedral { order } => format!("D_{order}"),
            Group::Grigorchuk => "Grigorchuk".into(),
        }
    }

    /// Rejects degenerate descriptors (rank 0, order < 2, more than 26 letters).
    pub fn validate(&self) -> Result<()> {
        match self {
            Group::Lattice { rank } | Group::Free { rank } if *rank == 0 || *rank > 26 => {
                Err(Error::Schema(format!("rank must be in 1..=26, got {rank}")))
            }
            Group::Cyclic { order } | Group::Dihedral { order } if *order < 2 => {
                Err(Error::Schema(format!("order must be at least 2, got {order}")))
            }
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            Group::Lattice { rank } => Element::Lattice(vec![0; *rank]),
            Group::Free { .. } => Element::Free(Vec::new()),
            Group::DihedralInf => Element::Affine {
                flip: false,
                shift: 0,
            },
            Group::Cyclic { .. } => Element::Cyclic(0),
            Group::Dihedral { .. } => Element::Dihedral {
                flip: false,
                rot: 0,
            },
            Group::Grigorchuk => Element::Grigorchuk(Portrait::identity()),
        }
    }

    pub fn is_identity(&self, g: &Element) -> bool {
        *g == self.identity()
    }

    /// Checks that `g` is a well-formed element of this group.
    pub fn check(&self, g: &Element) -> Result<()> {
        let ok = match (self, g) {
            (Group::Lattice { rank }, Element::Lattice(v)) => v.len() == *rank,
            (Group::Free { rank }, Element::Free(w)) => {
                w.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= *rank)
                    && w.windows(2).all(|p| p[0] != -p[1])
            }
            (Group::DihedralInf, Element::Affine { .. }) => true,
            (Group::Cyclic { order }, Element::Cyclic(k)) => k < order,
            (Group::Dihedral { order }, Element::Dihedral { rot, .. }) => rot < order,
            (Group::Grigorchuk, Element::Grigorchuk(_)) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            domain(format!("element {g:?} does not belong to {}", self.name()))
        }
    }

    /// Primitive generators: `e_i` for lattices, `a_i` for free groups,
    /// `s, t` for `D_∞`, `r` for cyclic, `r, s` for dihedral, `a, b, c, d`
    /// for Grigorchuk.
    pub fn primitive_generators(&self) -> Vec<Element> {
        match self {
            Group::Lattice { rank } => (0..*rank)
                .map(|i| {
                    let mut v = vec![0; *rank];
                    v[i] = 1;
                    Element::Lattice(v)
                })
                .collect(),
            Group::Free { rank } => (1..=*rank as i32).map(|l| Element::Free(vec![l])).collect(),
            Group::DihedralInf => vec![
                Element::Affine {
                    flip: true,
                    shift: 0,
                },
                Element::Affine {
                    flip: true,
                    shift: 1,
                },
            ],
            Group::Cyclic { .. } => vec![Element::Cyclic(1)],
            Group::Dihedral { .. } => vec![
                Element::Dihedral {
                    flip: false,
                    rot: 1,
                },
                Element::Dihedral {
                    flip: true,
                    rot: 0,
                },
            ],
            Group::Grigorchuk => [Nucleus::A, Nucleus::B, Nucleus::C, Nucleus::D]
                .into_iter()
                .map(|n| Element::Grigorchuk(Portrait::generator(n)))
                .collect(),
        }
    }

    /// Standard symmetric generating set: primitive generators and their inverses.
    pub fn generators(&self) -> GeneratingSet {
        GeneratingSet::symmetric_closure(self, self.primitive_generators())
            .expect("primitive generators are valid")
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    /// Multiplication without membership checks; operands must belong to `self`.
    pub(crate) fn mul_unchecked(&self, a: &Element, b: &Element) -> Element {
        match (self, a, b) {
            (_, Element::Lattice(x), Element::Lattice(y)) => {
                Element::Lattice(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (_, Element::Free(x), Element::Free(y)) => {
                let mut w = x.clone();
                for &l in y {
                    if w.last() == Some(&-l) {
                        w.pop();
                    } else {
                        w.push(l);
                    }
                }
                Element::Free(w)
            }
            (
                _,
                Element::Affine { flip: fa, shift: ka },
                Element::Affine { flip: fb, shift: kb },
            ) => {
                // (a∘b)(x) = ε_a(ε_b x + k_b) + k_a
                let kb = if *fa { -kb } else { *kb };
                Element::Affine {
                    flip: fa ^ fb,
                    shift: kb + ka,
                }
            }
            (Group::Cyclic { order }, Element::Cyclic(x), Element::Cyclic(y)) => {
                Element::Cyclic((x + y) % order)
            }
            (
                Group::Dihedral { order },
                Element::Dihedral { flip: fa, rot: ka },
                Element::Dihedral { flip: fb, rot: kb },
            ) => {
                let kb = if *fa { (order - kb) % order } else { *kb };
                Element::Dihedral {
                    flip: fa ^ fb,
                    rot: (kb + ka) % order,
                }
            }
            (_, Element::Grigorchuk(x), Element::Grigorchuk(y)) => Element::Grigorchuk(x.mul(y)),
            _ => unreachable!("mixed operands passed to mul_unchecked"),
        }
    }

    pub fn inverse(&self, g: &Element) -> Result<Element> {
        self.check(g)?;
        Ok(match (self, g) {
            (_, Element::Lattice(v)) => Element::Lattice(v.iter().map(|x| -x).collect()),
            (_, Element::Free(w)) => Element::Free(w.iter().rev().map(|l| -l).collect()),
            (_, Element::Affine { flip, shift }) => {
                if *flip {
                    g.clone()
                } else {
                    Element::Affine {
                        flip: false,
                        shift: -shift,
                    }
                }
            }
            (Group::Cyclic { order }, Element::Cyclic(k)) => Element::Cyclic((order - k) % order),
            (Group::Dihedral { order }, Element::Dihedral { flip, rot }) => {
                if *flip {
                    g.clone()
                } else {
                    Element::Dihedral {
                        flip: false,
                        rot: (order - rot) % order,
                    }
                }
            }
            (_, Element::Grigorchuk(p)) => Element::Grigorchuk(p.inverse()),
            _ => unreachable!(),
        })
    }

    pub fn pow(&self, g: &Element, k: u64) -> Result<Element> {
        self.check(g)?;
        let mut acc = self.identity();
        let mut base = g.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_unchecked(&acc, &base);
            }
            base = self.mul_unchecked(&base, &base);
            k >>= 1;
        }
        Ok(acc)
    }

    /// Least `n ≤ cap` with `gⁿ = e` by iterated multiplication.
    ///
    /// For the Grigorchuk group the recursive order computation through the
    /// wreath decomposition is run as well and the two must agree; a
    /// disagreement is reported as a domain error.
    pub fn element_order(&self, g: &Element, cap: u64) -> Result<Order> {
        if cap == 0 {
            return domain("order cap must be at least 1");
        }
        self.check(g)?;
        let iterated = self.iterated_order(g, cap);
        if let Element::Grigorchuk(p) = g {
            let recursive = match grigorchuk::recursive_order(p, cap) {
                RecursiveOrder::Finite(n) => Some(Order::Finite(n)),
                RecursiveOrder::ExceedsCap => Some(Order::ExceedsCap),
                RecursiveOrder::Undetermined => None,
            };
            if let Some(rec) = recursive {
                if rec != iterated {
                    return domain(format!(
                        "order strategies disagree for {p:?}: iterated {iterated:?}, recursive {rec:?}"
                    ));
                }
            }
        }
        Ok(iterated)
    }

    pub(crate) fn iterated_order(&self, g: &Element, cap: u64) -> Order {
        let mut acc = g.clone();
        for n in 1..=cap {
            if self.is_identity(&acc) {
                return Order::Finite(n);
            }
            acc = self.mul_unchecked(&acc, g);
        }
        Order::ExceedsCap
    }

    /// First-level sections and root swap of a Grigorchuk element.
    pub fn wreath_decompose(&self, g: &Element) -> Result<(Element, Element, bool)> {
        match (self, g) {
            (Group::Grigorchuk, Element::Grigorchuk(p)) => {
                let (swap, l, r) = p.decompose();
                Ok((Element::Grigorchuk(l), Element::Grigorchuk(r), swap))
            }
            _ => domain(format!(
                "wreath decomposition needs an automaton group, got {}",
                self.name()
            )),
        }
    }

    /// A word over the primitive generators representing `g`, as runs of
    /// `(generator, exponent)`. Not available for the Grigorchuk group.
    pub fn word_of(&self, g: &Element) -> Result<Vec<Letter>> {
        self.check(g)?;
        let letter = |generator, exponent| Letter {
            generator,
            exponent,
        };
        Ok(match g {
            Element::Lattice(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| letter(i, k))
                .collect(),
            Element::Free(w) => {
                let mut out: Vec<Letter> = Vec::new();
                for &l in w {
                    let gen = l.unsigned_abs() as usize - 1;
                    let e = if l > 0 { 1 } else { -1 };
                    match out.last_mut() {
                        Some(last) if last.generator == gen && last.exponent.signum() == e => {
                            last.exponent += e
                        }
                        _ => out.push(letter(gen, e)),
                    }
                }
                out
            }
            Element::Affine { flip, shift } => {
                // ts: x ↦ x+1, st: x ↦ x-1; reflections are t(st)^(k-1) or s(ts)^(-k)
                let mut out = Vec::new();
                let alternate = |out: &mut Vec<Letter>, first: usize, second: usize, m: i64| {
                    for _ in 0..m {
                        out.push(letter(first, 1));
                        out.push(letter(second, 1));
                    }
                };
                match (flip, *shift) {
                    (false, k) if k >= 0 => alternate(&mut out, 1, 0, k),
                    (false, k) => alternate(&mut out, 0, 1, -k),
                    (true, k) if k >= 1 => {
                        out.push(letter(1, 1));
                        alternate(&mut out, 0, 1, k - 1);
                    }
                    (true, k) => {
                        out.push(letter(0, 1));
                        alternate(&mut out, 1, 0, -k);
                    }
                }
                out
            }
            Element::Cyclic(k) => {
                if *k == 0 {
                    vec![]
                } else {
                    vec![letter(0, *k as i64)]
                }
            }
            Element::Dihedral { flip, rot } => {
                let mut out = Vec::new();
                if *rot != 0 {
                    out.push(letter(0, *rot as i64));
                }
                if *flip {
                    out.push(letter(1, 1));
                }
                out
            }
            Element::Grigorchuk(_) => {
                return Err(Error::Unsupported(
                    "word extraction for Grigorchuk elements".into(),
                ))
            }
        })
    }

    /// Parses a word over the group's letters. Lowercase letters are generators,
    /// uppercase their inverses; `e` or the empty string is the identity.
    /// Letters: `a..` (lattice, free), `s t` (`D_∞`), `r` (cyclic),
    /// `r s` (dihedral), `a b c d` (Grigorchuk).
    pub fn parse_word(&self, word: &str) -> Result<Element> {
        let word = word.trim();
        let gens = self.primitive_generators();
        let mut acc = self.identity();
        if word == "e" || word.is_empty() {
            return Ok(acc);
        }
        for ch in word.chars().filter(|c| !c.is_whitespace()) {
            let idx = self.letter_index(ch.to_ascii_lowercase()).ok_or_else(|| {
                Error::Schema(format!("letter '{ch}' is not a generator of {}", self.name()))
            })?;
            let mut gen = gens[idx].clone();
            if ch.is_ascii_uppercase() {
                gen = self.inverse(&gen)?;
            }
            acc = self.mul_unchecked(&acc, &gen);
        }
        Ok(acc)
    }

    fn letter_index(&self, ch: char) -> Option<usize> {
        match self {
            Group::Lattice { rank } | Group::Free { rank } => {
                let i = (ch as u32).checked_sub('a' as u32)? as usize;
                (i < *rank).then_some(i)
            }
            Group::DihedralInf => "st".find(ch),
            Group::Cyclic { .. } => (ch == 'r').then_some(0),
            Group::Dihedral { .. } => "rs".find(ch),
            Group::Grigorchuk => "abcd".find(ch),
        }
    }

    /// Human-readable form of an element.
    pub fn display(&self, g: &Element) -> String {
        match g {
            Element::Lattice(v) => format!("{v:?}"),
            Element::Free(w) if w.is_empty() => "e".into(),
            Element::Free(w) => w.iter().map(|&l| free_letter_char(l)).collect(),
            Element::Grigorchuk(p) => format!("{p:?}"),
            _ => match self.word_of(g) {
                Ok(word) if word.is_empty() => "e".into(),
                Ok(word) => {
                    let letters: Vec<char> = match self {
                        Group::DihedralInf => vec!['s', 't'],
                        _ => vec!['r', 's'],
                    };
                    word.iter()
                        .map(|l| {
                            let c = letters[l.generator];
                            if l.exponent == 1 {
                                c.to_string()
                            } else {
                                format!("{c}^{}", l.exponent)
                            }
                        })
                        .collect()
                }
                Err(_) => format!("{g:?}"),
            },
        }
    }

    /// Word length when the generating set is the standard one and a geodesic
    /// normal form is known.
    pub(crate) fn closed_form_length(&self, g: &Element) -> Option<usize> {
        Some(match (self, g) {
            (Group::Lattice { .. }, Element::Lattice(v)) => {
                v.iter().map(|x| x.unsigned_abs() as usize).sum()
            }
            (Group::Free { .. }, Element::Free(w)) => w.len(),
            (Group::DihedralInf, Element::Affine { flip, shift }) => {
                let k = *shift;
                if !flip {
                    2 * k.unsigned_abs() as usize
                } else if k >= 1 {
                    2 * k as usize - 1
                } else {
                    2 * k.unsigned_abs() as usize + 1
                }
            }
            (Group::Cyclic { order }, Element::Cyclic(k)) => (*k).min(order - k) as usize,
            _ => return None,
        })
    }

    /// Element from JSON: a word string, an integer (cyclic, rank-one lattice)
    /// or an integer array (lattice vector).
    pub fn element_from_json(&self, value: &serde_json::Value) -> Result<Element> {
        use serde_json::Value;
        match (self, value) {
            (_, Value::String(s)) => self.parse_word(s),
            (Group::Lattice { rank }, Value::Array(items)) => {
                let v = items
                    .iter()
                    .map(|x| {
                        x.as_i64()
                            .ok_or_else(|| Error::Schema(format!("expected integer, got {x}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if v.len() != *rank {
                    return Err(Error::Schema(format!(
                        "lattice vector has length {}, expected {rank}",
                        v.len()
                    )));
                }
                Ok(Element::Lattice(v))
            }
            (Group::Lattice { rank: 1 }, Value::Number(n)) => Ok(Element::Lattice(vec![n
                .as_i64()
                .ok_or_else(|| Error::Schema(format!("expected integer, got {n}")))?])),
            (Group::Cyclic { order }, Value::Number(n)) => {
                let k = n
                    .as_i64()
                    .ok_or_else(|| Error::Schema(format!("expected integer, got {n}")))?;
                Ok(Element::Cyclic(k.rem_euclid(*order as i64) as u64))
            }
            _ => Err(Error::Schema(format!(
                "cannot read an element of {} from {value}",
                self.name()
            ))),
        }
    }

    /// JSON form of an element, readable by [`Group::element_from_json`].
    pub fn element_to_json(&self, g: &Element) -> serde_json::Value {
        match g {
            Element::Lattice(v) => serde_json::json!(v),
            Element::Cyclic(k) => serde_json::json!(k),
            Element::Grigorchuk(p) => serde_json::json!(format!("{p:?}")),
            _ => {
                let s = self.display(g);
                if matches!(self, Group::Free { .. }) || s == "e" {
                    serde_json::json!(s)
                } else {
                    // expand powers so the string parses back
                    let word = self.word_of(g).unwrap_or_default();
                    let letters: &[char] = match self {
                        Group::DihedralInf => &['s', 't'],
                        _ => &['r', 's'],
                    };
                    let mut out = String::new();
                    for l in word {
                        let c = letters[l.generator];
                        let c = if l.exponent < 0 { c.to_ascii_uppercase() } else { c };
                        for _ in 0..l.exponent.unsigned_abs() {
                            out.push(c);
                        }
                    }
                    serde_json::json!(out)
                }
            }
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Lattice(v) => write!(f, "{v:?}"),
            Element::Free(w) if w.is_empty() => write!(f, "e"),
            Element::Free(w) => {
                write!(f, "{}", w.iter().map(|&l| free_letter_char(l)).collect::<String>())
            }
            Element::Affine { flip, shift } => {
                write!(f, "x↦{}x{:+}", if *flip { "-" } else { "" }, shift)
            }
            Element::Cyclic(k) => write!(f, "{k}"),
            Element::Dihedral { flip, rot } => {
                write!(f, "x↦{}x+{}", if *flip { "-" } else { "" }, rot)
            }
            Element::Grigorchuk(p) => write!(f, "{p:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_multiply() {
        let z2 = Group::Lattice { rank: 2 };
        let a = Element::Lattice(vec![1, 2]);
        let b = Element::Lattice(vec![3, -2]);
        assert_eq!(z2.multiply(&a, &b).unwrap(), Element::Lattice(vec![4, 0]));
    }

    #[test]
    fn free_reduction() {
        let f2 = Group::Free { rank: 2 };
        let x = f2.parse_word("ab").unwrap();
        let y = f2.parse_word("Ba").unwrap();
        assert_eq!(f2.multiply(&x, &y).unwrap(), f2.parse_word("aa").unwrap());
    }

    #[test]
    fn grigorchuk_bc_is_d() {
        let g = Group::Grigorchuk;
        let b = g.parse_word("b").unwrap();
        let c = g.parse_word("c").unwrap();
        assert_eq!(g.multiply(&b, &c).unwrap(), g.parse_word("d").unwrap());
    }

    #[test]
    fn mixed_operands_rejected() {
        let z2 = Group::Lattice { rank: 2 };
        let f2 = Group::Free { rank: 2 };
        let a = z2.identity();
        let b = f2.parse_word("a").unwrap();
        assert!(matches!(z2.multiply(&a, &b), Err(Error::Domain(_))));
        assert!(matches!(
            Group::Lattice { rank: 3 }.multiply(&a, &a),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            Group::Cyclic { order: 3 }.check(&Element::Cyclic(5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn orders() {
        let g = Group::Grigorchuk;
        let e = g.identity();
        assert_eq!(g.element_order(&e, 10).unwrap(), Order::Finite(1));
        for (w, n) in [("a", 2), ("b", 2), ("ab", 16)] {
            let x = g.parse_word(w).unwrap();
            assert_eq!(g.element_order(&x, 1024).unwrap(), Order::Finite(n), "{w}");
        }
        let ab = g.parse_word("ab").unwrap();
        assert_eq!(g.element_order(&ab, 15).unwrap(), Order::ExceedsCap);
        let z = Group::Lattice { rank: 1 };
        assert_eq!(
            z.element_order(&Element::Lattice(vec![1]), 100).unwrap(),
            Order::ExceedsCap
        );
        let c6 = Group::Cyclic { order: 6 };
        assert_eq!(c6.element_order(&Element::Cyclic(4), 100).unwrap(), Order::Finite(3));
    }

    #[test]
    fn wreath() {
        let g = Group::Grigorchuk;
        let p = |w: &str| g.parse_word(w).unwrap();
        assert_eq!(g.wreath_decompose(&p("b")).unwrap(), (p("a"), p("c"), false));
        assert_eq!(g.wreath_decompose(&p("a")).unwrap(), (p("e"), p("e"), true));
        assert_eq!(g.wreath_decompose(&p("e")).unwrap(), (p("e"), p("e"), false));
        assert!(matches!(
            Group::Free { rank: 2 }.wreath_decompose(&Element::Free(vec![1])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn words_round_trip() {
        for group in [
            Group::DihedralInf,
            Group::Dihedral { order: 5 },
            Group::Cyclic { order: 7 },
            Group::Lattice { rank: 3 },
            Group::Free { rank: 3 },
        ] {
            let gens = group.primitive_generators();
            // all words of length ≤ 4 in the primitive generators and inverses
            let mut letters = gens.clone();
            letters.extend(gens.iter().map(|g| group.inverse(g).unwrap()));
            let mut frontier = vec![group.identity()];
            for _ in 0..4 {
                let mut next = Vec::new();
                for g in &frontier {
                    for s in &letters {
                        next.push(group.multiply(g, s).unwrap());
                    }
                }
                frontier = next;
            }
            for g in frontier {
                let word = group.word_of(&g).unwrap();
                let mut acc = group.identity();
                for l in word {
                    let base = &gens[l.generator];
                    let p = if l.exponent >= 0 {
                        group.pow(base, l.exponent as u64).unwrap()
                    } else {
                        group.inverse(&group.pow(base, (-l.exponent) as u64).unwrap()).unwrap()
                    };
                    acc = group.multiply(&acc, &p).unwrap();
                }
                assert_eq!(acc, g);
                let json = group.element_to_json(&g);
                assert_eq!(group.element_from_json(&json).unwrap(), g, "{json}");
            }
        }
    }

    #[test]
    fn generating_set_validation() {
        let f2 = Group::Free { rank: 2 };
        let a = f2.parse_word("a").unwrap();
        assert!(GeneratingSet::new(&f2, vec![a.clone()], true).is_err());
        assert!(GeneratingSet::new(&f2, vec![f2.identity()], false).is_err());
        assert!(GeneratingSet::new(&f2, vec![], false).is_err());
        let s = GeneratingSet::symmetric_closure(&f2, vec![a]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(f2.generators().len(), 4);
        assert_eq!(Group::Grigorchuk.generators().len(), 4);
        assert_eq!(Group::Cyclic { order: 2 }.generators().len(), 1);
    }
}
