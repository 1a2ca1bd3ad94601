//! The first Grigorchuk group as an automaton group on the binary rooted tree.
//!
//! Elements are stored as canonical *portraits*: an element equal to one of
//! the nucleus elements `e, a, b, c, d` is a leaf, anything else is a node
//! holding its root permutation and its two first-level sections, each again
//! canonical. The group is contracting with nucleus `{e, a, b, c, d}`, so the
//! recursion is finite, and because the decomposition of an element is
//! unique, two elements are equal exactly when their portraits are equal.
//!
//! Conventions: the group acts on the left on binary strings,
//! `g(x w) = σ_g(x) g_x(w)`, and `a = σ`, `b = (a, c)`, `c = (a, d)`,
//! `d = (e, b)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// The five nucleus elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Nucleus {
    E,
    A,
    B,
    C,
    D,
}

impl Nucleus {
    pub fn letter(self) -> char {
        match self {
            Nucleus::E => 'e',
            Nucleus::A => 'a',
            Nucleus::B => 'b',
            Nucleus::C => 'c',
            Nucleus::D => 'd',
        }
    }

    pub fn from_letter(ch: char) -> Option<Self> {
        match ch.to_ascii_lowercase() {
            'e' => Some(Nucleus::E),
            'a' => Some(Nucleus::A),
            'b' => Some(Nucleus::B),
            'c' => Some(Nucleus::C),
            'd' => Some(Nucleus::D),
            _ => None,
        }
    }

    /// `(swap, left, right)` from the defining recursion.
    fn decompose(self) -> (bool, Nucleus, Nucleus) {
        match self {
            Nucleus::E => (false, Nucleus::E, Nucleus::E),
            Nucleus::A => (true, Nucleus::E, Nucleus::E),
            Nucleus::B => (false, Nucleus::A, Nucleus::C),
            Nucleus::C => (false, Nucleus::A, Nucleus::D),
            Nucleus::D => (false, Nucleus::E, Nucleus::B),
        }
    }

    /// Product inside the nucleus when it stays there.
    fn product(self, other: Nucleus) -> Option<Nucleus> {
        use Nucleus::*;
        match (self, other) {
            (E, x) | (x, E) => Some(x),
            (A, A) => Some(E),
            (A, _) | (_, A) => None,
            // {e, b, c, d} is a Klein four-group
            (x, y) if x == y => Some(E),
            (B, C) | (C, B) => Some(D),
            (B, D) | (D, B) => Some(C),
            (C, D) | (D, C) => Some(B),
            _ => unreachable!(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortraitNode {
    pub swap: bool,
    pub left: Portrait,
    pub right: Portrait,
}

/// Canonical portrait of an element of the Grigorchuk group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Portrait {
    Leaf(Nucleus),
    Node(Arc<PortraitNode>),
}

impl fmt::Debug for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Portrait::Leaf(n) => write!(f, "{}", n.letter()),
            Portrait::Node(node) => write!(
                f,
                "{}({:?},{:?})",
                if node.swap { "σ" } else { "" },
                node.left,
                node.right
            ),
        }
    }
}

impl Portrait {
    pub fn identity() -> Self {
        Portrait::Leaf(Nucleus::E)
    }

    pub fn generator(n: Nucleus) -> Self {
        Portrait::Leaf(n)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Portrait::Leaf(Nucleus::E))
    }

    /// Builds a node, collapsing it to a leaf when it equals a nucleus element.
    pub fn node(swap: bool, left: Portrait, right: Portrait) -> Self {
        use Nucleus::*;
        let collapsed = match (swap, &left, &right) {
            (false, Portrait::Leaf(E), Portrait::Leaf(E)) => Some(E),
            (true, Portrait::Leaf(E), Portrait::Leaf(E)) => Some(A),
            (false, Portrait::Leaf(A), Portrait::Leaf(C)) => Some(B),
            (false, Portrait::Leaf(A), Portrait::Leaf(D)) => Some(C),
            (false, Portrait::Leaf(E), Portrait::Leaf(B)) => Some(D),
            _ => None,
        };
        match collapsed {
            Some(n) => Portrait::Leaf(n),
            None => Portrait::Node(Arc::new(PortraitNode { swap, left, right })),
        }
    }

    /// Root permutation and first-level sections.
    pub fn decompose(&self) -> (bool, Portrait, Portrait) {
        match self {
            Portrait::Leaf(n) => {
                let (s, l, r) = n.decompose();
                (s, Portrait::Leaf(l), Portrait::Leaf(r))
            }
            Portrait::Node(node) => (node.swap, node.left.clone(), node.right.clone()),
        }
    }

    fn section(&self, bit: u8) -> Portrait {
        let (_, l, r) = self.decompose();
        if bit == 0 {
            l
        } else {
            r
        }
    }

    pub fn swaps(&self) -> bool {
        self.decompose().0
    }

    /// `self · other`, i.e. apply `other` first.
    pub fn mul(&self, other: &Portrait) -> Portrait {
        if let (Portrait::Leaf(x), Portrait::Leaf(y)) = (self, other) {
            if let Some(z) = x.product(*y) {
                return Portrait::Leaf(z);
            }
        }
        if self.is_identity() {
            return other.clone();
        }
        if other.is_identity() {
            return self.clone();
        }
        let (sg, g0, g1) = self.decompose();
        let (sh, h0, h1) = other.decompose();
        // (gh)_x = g_{σ_h(x)} h_x
        let (ga, gb) = if sh { (g1, g0) } else { (g0, g1) };
        Portrait::node(sg ^ sh, ga.mul(&h0), gb.mul(&h1))
    }

    pub fn inverse(&self) -> Portrait {
        match self {
            Portrait::Leaf(_) => self.clone(),
            Portrait::Node(node) => {
                // (g⁻¹)_{σ(x)} = (g_x)⁻¹
                let (l, r) = if node.swap {
                    (node.right.inverse(), node.left.inverse())
                } else {
                    (node.left.inverse(), node.right.inverse())
                };
                Portrait::node(node.swap, l, r)
            }
        }
    }

    pub fn pow(&self, k: u64) -> Portrait {
        let mut acc = Portrait::identity();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Image of a vertex given as a string of bits (root first).
    pub fn act(&self, vertex: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(vertex.len());
        let mut g = self.clone();
        for &bit in vertex {
            if g.is_identity() {
                out.push(bit);
                continue;
            }
            let swap = g.swaps();
            out.push(if swap { bit ^ 1 } else { bit });
            g = g.section(bit);
        }
        out
    }

    /// Depth of the portrait tree (leaves have depth 0).
    pub fn depth(&self) -> usize {
        match self {
            Portrait::Leaf(_) => 0,
            Portrait::Node(node) => 1 + node.left.depth().max(node.right.depth()),
        }
    }

    pub fn from_word(word: &str) -> Option<Portrait> {
        let mut acc = Portrait::identity();
        for ch in word.chars().filter(|c| !c.is_whitespace()) {
            acc = acc.mul(&Portrait::Leaf(Nucleus::from_letter(ch)?));
        }
        Some(acc)
    }
}

/// Outcome of the recursive order computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecursiveOrder {
    Finite(u64),
    /// The order exceeds the cap.
    ExceedsCap,
    /// The recursion revisited an element on its own stack.
    Undetermined,
}

/// Order via the wreath recursion: without a root swap the order is the lcm of
/// the section orders, with a swap it is twice the order of `g_1 g_0`.
pub fn recursive_order(g: &Portrait, cap: u64) -> RecursiveOrder {
    let mut memo = HashMap::new();
    let mut stack = Vec::new();
    match order_rec(g, cap, &mut memo, &mut stack) {
        Ok(n) if n <= cap => RecursiveOrder::Finite(n),
        Ok(_) => RecursiveOrder::ExceedsCap,
        Err(OrderFail::Cap) => RecursiveOrder::ExceedsCap,
        Err(OrderFail::Cycle) => RecursiveOrder::Undetermined,
    }
}

enum OrderFail {
    Cap,
    Cycle,
}

fn order_rec(
    g: &Portrait,
    cap: u64,
    memo: &mut HashMap<Portrait, u64>,
    stack: &mut Vec<Portrait>,
) -> Result<u64, OrderFail> {
    if let Portrait::Leaf(n) = g {
        return Ok(if *n == Nucleus::E { 1 } else { 2 });
    }
    if let Some(&n) = memo.get(g) {
        return Ok(n);
    }
    if stack.contains(g) {
        return Err(OrderFail::Cycle);
    }
    stack.push(g.clone());
    let (swap, l, r) = g.decompose();
    let result = if swap {
        order_rec(&r.mul(&l), cap, memo, stack).map(|n| n.saturating_mul(2))
    } else {
        let ol = order_rec(&l, cap, memo, stack);
        let or = ol.and_then(|ol| order_rec(&r, cap, memo, stack).map(|or| (ol, or)));
        or.map(|(a, b)| num_integer::lcm(a, b))
    };
    stack.pop();
    let n = result?;
    if n > cap {
        return Err(OrderFail::Cap);
    }
    memo.insert(g.clone(), n);
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(w: &str) -> Portrait {
        Portrait::from_word(w).unwrap()
    }

    #[test]
    fn defining_relations() {
        for w in ["aa", "bb", "cc", "dd", "bcd"] {
            assert!(p(w).is_identity(), "{w}");
        }
        assert_eq!(p("bc"), p("d"));
        assert_eq!(p("cb"), p("d"));
    }

    #[test]
    fn decompositions() {
        assert_eq!(p("b").decompose(), (false, p("a"), p("c")));
        assert_eq!(p("a").decompose(), (true, p(""), p("")));
        assert_eq!(p("").decompose(), (false, p(""), p("")));
    }

    #[test]
    fn inverse_and_mul_agree() {
        for w in ["ab", "abac", "dabcabda", "acabadacab"] {
            let g = p(w);
            assert!(g.mul(&g.inverse()).is_identity());
            assert!(g.inverse().mul(&g).is_identity());
            let rev: String = w.chars().rev().collect();
            assert_eq!(g.inverse(), p(&rev));
        }
    }

    #[test]
    fn orders() {
        assert_eq!(recursive_order(&p("ab"), 1024), RecursiveOrder::Finite(16));
        assert_eq!(recursive_order(&p("ad"), 1024), RecursiveOrder::Finite(4));
        assert_eq!(recursive_order(&p("ac"), 1024), RecursiveOrder::Finite(8));
        assert_eq!(recursive_order(&p("ab"), 8), RecursiveOrder::ExceedsCap);
        assert!(p("ab").pow(16).is_identity());
        assert!(!p("ab").pow(8).is_identity());
    }

    #[test]
    fn action_is_faithful_on_generators() {
        // a flips the first bit only
        assert_eq!(p("a").act(&[0, 1, 1]), vec![1, 1, 1]);
        // b = (a, c): 0w -> 0 a(w)
        assert_eq!(p("b").act(&[0, 0, 1]), vec![0, 1, 1]);
        // d = (e, b): 0w fixed
        assert_eq!(p("d").act(&[0, 1, 0]), vec![0, 1, 0]);
    }
}
