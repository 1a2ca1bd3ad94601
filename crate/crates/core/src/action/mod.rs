//! Isometric actions of the finitely generated groups on the model spaces.
//!
//! An action is given by the images of the primitive generators; the image of
//! an arbitrary element is composed from its word, with powers taken by
//! repeated squaring. The Grigorchuk group, which has no cheap words, acts on
//! rooted binary trees directly through its portraits.

pub mod energy;
pub mod examples;
pub mod fixed_point;
pub mod harmonic;
pub mod shalom;

use std::collections::HashMap;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::group::{Element, GeneratingSet, Group};
use crate::measure::walk::walk_rng;
use crate::space::{hyperbolic, MetricTree, Point, Space};

pub use energy::{energy, minimize_energy, EnergyOptions, EnergyReport, EnergyRun, EnergyStatus, EscapeDiagnosis};
pub use examples::{bundled_examples, Example};
pub use fixed_point::{fixed_point_search, FixedPointFailure, FixedPointMethod, FixedPointOptions, FixedPointResult};
pub use harmonic::{
    check_mu_harmonic, check_mu_subharmonic, mu_laplacian, pullback, pullback_horofunction, ConvexFunction,
    ConvexFunctionDescriptor, LaplacianReport,
};
pub use shalom::{shalom_search, ShalomCertificate, ShalomOptions, ShalomOutcome};

/// Orthogonality and determinant checks on supplied isometries.
const ISOMETRY_TOL: f64 = 1e-9;

/// An isometry of one of the model spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Isometry {
    Identity,
    /// `x ↦ A x + b` with `A` orthogonal.
    Affine {
        matrix: Vec<Vec<f64>>,
        translation: Vec<f64>,
    },
    /// `z ↦ (az + b)/(cz + d)`, real entries, `ad − bc = 1`.
    Mobius([[f64; 2]; 2]),
    /// Tree automorphism: vertex `v` goes to `vertices[v]`, edge `e` to
    /// `edges[e].0`, traversed backwards when `edges[e].1` is set.
    Tree {
        vertices: Vec<usize>,
        edges: Vec<(usize, bool)>,
    },
    Product(Vec<Isometry>),
}

impl Isometry {
    /// `self ∘ other`. Both sides must act on the same space.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        match (self, other) {
            (Isometry::Identity, x) | (x, Isometry::Identity) => x.clone(),
            (
                Isometry::Affine {
                    matrix: a,
                    translation: s,
                },
                Isometry::Affine {
                    matrix: b,
                    translation: t,
                },
            ) => {
                let n = a.len();
                let matrix = (0..n)
                    .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
                    .collect();
                let mut translation = mat_vec(a, t);
                for (x, y) in translation.iter_mut().zip(s) {
                    *x += y;
                }
                Isometry::Affine { matrix, translation }
            }
            (Isometry::Mobius(a), Isometry::Mobius(b)) => Isometry::Mobius(hyperbolic::mat_mul(a, b)),
            (
                Isometry::Tree {
                    vertices: va,
                    edges: ea,
                },
                Isometry::Tree {
                    vertices: vb,
                    edges: eb,
                },
            ) => Isometry::Tree {
                vertices: vb.iter().map(|&v| va[v]).collect(),
                edges: eb
                    .iter()
                    .map(|&(e, rev)| {
                        let (f, rev2) = ea[e];
                        (f, rev ^ rev2)
                    })
                    .collect(),
            },
            (Isometry::Product(a), Isometry::Product(b)) => {
                Isometry::Product(a.iter().zip(b).map(|(x, y)| x.compose(y)).collect())
            }
            _ => unreachable!("isometries are validated against a single space"),
        }
    }

    pub fn inverse(&self) -> Isometry {
        match self {
            Isometry::Identity => Isometry::Identity,
            Isometry::Affine { matrix, translation } => {
                let n = matrix.len();
                let t: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| matrix[j][i]).collect()).collect();
                let translation = mat_vec(&t, translation).into_iter().map(|x| -x).collect();
                Isometry::Affine { matrix: t, translation }
            }
            Isometry::Mobius(m) => Isometry::Mobius(hyperbolic::mat_inverse(m)),
            Isometry::Tree { vertices, edges } => {
                let mut inv_v = vec![0; vertices.len()];
                for (v, &w) in vertices.iter().enumerate() {
                    inv_v[w] = v;
                }
                let mut inv_e = vec![(0, false); edges.len()];
                for (e, &(f, rev)) in edges.iter().enumerate() {
                    inv_e[f] = (e, rev);
                }
                Isometry::Tree {
                    vertices: inv_v,
                    edges: inv_e,
                }
            }
            Isometry::Product(fs) => Isometry::Product(fs.iter().map(Isometry::inverse).collect()),
        }
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, k: i64) -> Isometry {
        let mut base = if k < 0 { self.inverse() } else { self.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = Isometry::Identity;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }

    /// Image of a point; rescaled spaces share their base's isometries.
    pub fn apply(&self, space: &Space, p: &Point) -> Point {
        match (self, space, p) {
            (Isometry::Identity, _, _) => p.clone(),
            (_, Space::Rescaled { base, .. }, _) => self.apply(base, p),
            (Isometry::Affine { matrix, translation }, _, Point::Euclidean(x)) => {
                let mut y = mat_vec(matrix, x);
                for (a, b) in y.iter_mut().zip(translation) {
                    *a += b;
                }
                Point::Euclidean(y)
            }
            (Isometry::Mobius(m), _, Point::Hyperbolic(z)) => {
                let w = hyperbolic::mobius(m, *z);
                Point::hyperbolic(w.re, w.im.max(f64::MIN_POSITIVE))
            }
            (Isometry::Tree { edges, .. }, Space::Tree(t), Point::Tree(q)) => {
                let (e, rev) = edges[q.edge];
                let len = t.edges()[e].length;
                let offset = if rev { len - q.offset } else { q.offset };
                Point::Tree(t.canonical(e, offset))
            }
            (Isometry::Product(fs), Space::Product(spaces), Point::Product(ps)) => Point::Product(
                fs.iter()
                    .zip(spaces)
                    .zip(ps)
                    .map(|((f, s), x)| f.apply(s, x))
                    .collect(),
            ),
            _ => unreachable!("isometries and points are validated against the space"),
        }
    }

    /// Checks that the isometry fits the space and is one.
    pub fn check(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (Isometry::Identity, _) => Ok(()),
            (_, Space::Rescaled { base, .. }) => self.check(base),
            (Isometry::Affine { matrix, translation }, Space::Euclidean { dim }) => {
                if matrix.len() != *dim || matrix.iter().any(|r| r.len() != *dim) || translation.len() != *dim {
                    return domain(format!("affine map must be {dim}-dimensional"));
                }
                if matrix.iter().flatten().chain(translation).any(|x| !x.is_finite()) {
                    return domain("affine map entries must be finite");
                }
                for i in 0..*dim {
                    for j in 0..*dim {
                        let dot: f64 = (0..*dim).map(|k| matrix[k][i] * matrix[k][j]).sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        if (dot - want).abs() > ISOMETRY_TOL {
                            return domain("affine map matrix is not orthogonal");
                        }
                    }
                }
                Ok(())
            }
            (Isometry::Mobius(m), Space::HyperbolicPlane) => {
                if m.iter().flatten().any(|x| !x.is_finite()) {
                    return domain("Möbius coefficients must be finite");
                }
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if (det - 1.0).abs() > ISOMETRY_TOL {
                    return domain(format!("Möbius determinant is {det}, not 1"));
                }
                Ok(())
            }
            (Isometry::Tree { vertices, edges }, Space::Tree(t)) => {
                if vertices.len() != t.vertex_count() || edges.len() != t.edges().len() {
                    return domain("tree automorphism does not match the tree size");
                }
                Ok(())
            }
            (Isometry::Product(fs), Space::Product(spaces)) => {
                if fs.len() != spaces.len() {
                    return domain("product isometry needs one factor per factor space");
                }
                fs.iter().zip(spaces).try_for_each(|(f, s)| f.check(s))
            }
            _ => domain(format!("isometry {self:?} does not act on {}", space.name())),
        }
    }

    /// Tree automorphism from a vertex permutation. Finite edges follow their
    /// endpoints; the `k`-th ray at `v` goes to the `k`-th ray at the image of
    /// `v` unless `rays` lists the images of the ray edges in index order.
    pub fn tree_automorphism(tree: &MetricTree, vertices: Vec<usize>, rays: Option<Vec<usize>>) -> Result<Isometry> {
        let n = tree.vertex_count();
        if vertices.len() != n {
            return domain(format!("permutation has {} entries for {n} vertices", vertices.len()));
        }
        let mut seen = vec![false; n];
        for &v in &vertices {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return domain("vertex map is not a permutation");
            }
        }
        let edges = tree.edges();
        let mut by_ends: HashMap<(usize, usize), usize> = HashMap::new();
        let mut rays_at: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            match e.to {
                Some(t) => {
                    by_ends.insert((e.from.min(t), e.from.max(t)), i);
                }
                None => rays_at.entry(e.from).or_default().push(i),
            }
        }
        let ray_list: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].is_ray()).collect();
        if let Some(r) = &rays {
            if r.len() != ray_list.len() {
                return domain(format!("{} ray images for {} rays", r.len(), ray_list.len()));
            }
        }
        let mut out = Vec::with_capacity(edges.len());
        let mut hit = vec![false; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            let (u, len) = (vertices[e.from], e.length);
            let image = match e.to {
                Some(t) => {
                    let v = vertices[t];
                    let j = *by_ends
                        .get(&(u.min(v), u.max(v)))
                        .ok_or_else(|| Error::Domain(format!("edge {i} has no image edge")))?;
                    if (edges[j].length - len).abs() > ISOMETRY_TOL * len.max(1.0) {
                        return domain(format!("edge {i} maps to edge {j} of a different length"));
                    }
                    (j, edges[j].from != u)
                }
                None => {
                    let k = ray_list.iter().position(|&r| r == i).expect("ray listed");
                    let j = match &rays {
                        Some(r) => r[k],
                        None => {
                            let pos = rays_at[&e.from].iter().position(|&r| r == i).expect("ray listed");
                            *rays_at
                                .get(&u)
                                .and_then(|rs| rs.get(pos))
                                .ok_or_else(|| Error::Domain(format!("ray {i} has no image ray")))?
                        }
                    };
                    if j >= edges.len() || !edges[j].is_ray() || edges[j].from != u {
                        return domain(format!("ray {i} cannot map to edge {j}"));
                    }
                    (j, false)
                }
            };
            if std::mem::replace(&mut hit[image.0], true) {
                return domain("edge map is not a bijection");
            }
            out.push(image);
        }
        Ok(Isometry::Tree { vertices, edges: out })
    }
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// How group elements become isometries.
#[derive(Clone, Debug, PartialEq)]
pub enum ActionRule {
    /// Images of the primitive generators, in order.
    Generators(Vec<Isometry>),
    /// The Grigorchuk group on a rooted binary tree, through its portraits.
    GrigorchukTree,
}

/// A homomorphism from a group into the isometries of a space.
#[derive(Clone, Debug)]
pub struct IsometricAction {
    group: Group,
    space: Space,
    rule: ActionRule,
}

impl IsometricAction {
    /// Validates the generator images and checks the defining relations of
    /// the group on a few sample points.
    pub fn new(group: Group, space: Space, rule: ActionRule) -> Result<Self> {
        group.validate()?;
        match &rule {
            ActionRule::Generators(images) => {
                let want = group.primitive_generators().len();
                if images.len() != want {
                    return domain(format!("{} needs {want} generator images, got {}", group.name(), images.len()));
                }
                if group == Group::Grigorchuk {
                    return Err(Error::Unsupported(
                        "generator images for the Grigorchuk group; use the grigorchuk_tree rule".into(),
                    ));
                }
                for img in images {
                    img.check(&space)?;
                }
            }
            ActionRule::GrigorchukTree => {
                if group != Group::Grigorchuk {
                    return domain("the grigorchuk_tree rule needs the Grigorchuk group");
                }
                match space.unscaled().0 {
                    Space::Tree(t) => binary_depth(t)?,
                    _ => return domain("the grigorchuk_tree rule needs a rooted binary tree"),
                };
            }
        }
        let action = Self { group, space, rule };
        action.check_relations()?;
        Ok(action)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn rule(&self) -> &ActionRule {
        &self.rule
    }

    /// The same action on `rescale(space, λ)`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        Ok(Self {
            space: self.space.rescale(lambda)?,
            ..self.clone()
        })
    }

    /// `ρ(g)`.
    pub fn isometry(&self, g: &Element) -> Result<Isometry> {
        self.group.check(g)?;
        match &self.rule {
            ActionRule::Generators(images) => {
                let mut acc = Isometry::Identity;
                for l in self.group.word_of(g)? {
                    acc = acc.compose(&images[l.generator].pow(l.exponent));
                }
                Ok(acc)
            }
            ActionRule::GrigorchukTree => {
                let Element::Grigorchuk(p) = g else {
                    unreachable!("checked membership")
                };
                let Space::Tree(t) = self.space.unscaled().0 else {
                    unreachable!("validated space")
                };
                let depth = binary_depth(t)?;
                let n = t.vertex_count();
                let vertices: Vec<usize> = (0..n)
                    .map(|v| {
                        let level = (usize::BITS - 1 - (v + 1).leading_zeros()) as usize;
                        let value = v + 1 - (1 << level);
                        let bits: Vec<u8> = (0..level).map(|j| ((value >> (level - 1 - j)) & 1) as u8).collect();
                        let image = p.act(&bits);
                        let iv = image.iter().fold(0usize, |acc, &b| 2 * acc + b as usize);
                        (1 << level) - 1 + iv
                    })
                    .collect();
                debug_assert!(depth >= 1);
                let edges = (0..n - 1).map(|i| (vertices[i + 1] - 1, false)).collect();
                Ok(Isometry::Tree { vertices, edges })
            }
        }
    }

    /// `ρ(g) x`.
    pub fn apply(&self, g: &Element, x: &Point) -> Result<Point> {
        self.space.check(x)?;
        Ok(self.isometry(g)?.apply(&self.space, x))
    }

    /// `δ(x) = max_{s ∈ S} d(x, s x)`.
    pub fn displacement(&self, x: &Point, gens: &GeneratingSet) -> Result<f64> {
        self.space.check(x)?;
        let mut best: f64 = 0.0;
        for s in gens.elements() {
            let y = self.isometry(s)?.apply(&self.space, x);
            best = best.max(self.space.dist(x, &y));
        }
        Ok(best)
    }

    /// Defining relators as generator runs; the relations are checked on
    /// sample points rather than symbolically.
    fn relators(&self) -> Vec<Vec<(usize, i64)>> {
        match &self.group {
            Group::Lattice { rank } => {
                let mut out = Vec::new();
                for i in 0..*rank {
                    for j in i + 1..*rank {
                        out.push(vec![(i, 1), (j, 1), (i, -1), (j, -1)]);
                    }
                }
                out
            }
            Group::Cyclic { order } => vec![vec![(0, *order as i64)]],
            Group::Dihedral { order } => vec![vec![(0, *order as i64)], vec![(1, 2)], vec![(1, 1), (0, 1), (1, 1), (0, 1)]],
            Group::DihedralInf => vec![vec![(0, 2)], vec![(1, 2)]],
            Group::Free { .. } | Group::Grigorchuk => Vec::new(),
        }
    }

    fn check_relations(&self) -> Result<()> {
        let ActionRule::Generators(images) = &self.rule else {
            return Ok(());
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let samples: Vec<Point> = (0..8).map(|_| self.space.sample_point(&mut rng, 2.0)).collect();
        for rel in self.relators() {
            let iso = rel
                .iter()
                .fold(Isometry::Identity, |acc, &(g, k)| acc.compose(&images[g].pow(k)));
            for x in &samples {
                let d = self.space.dist(x, &iso.apply(&self.space, x));
                if !(d <= 1e-7) {
                    return domain(format!(
                        "generator images violate a defining relation of {} (moved a point by {d})",
                        self.group.name()
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn from_descriptor(group: Group, space: Space, desc: &ActionDescriptor) -> Result<Self> {
        let rule = match desc {
            ActionDescriptor::Generators { images } => ActionRule::Generators(
                images
                    .iter()
                    .map(|d| d.build(&space))
                    .collect::<Result<_>>()
                    .map_err(schema)?,
            ),
            ActionDescriptor::GrigorchukTree => ActionRule::GrigorchukTree,
        };
        Self::new(group, space, rule).map_err(schema)
    }
}

fn schema(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Schema(format!("action: {m}")),
        other => other,
    }
}

/// Depth of a rooted binary tree in the heap layout of [`MetricTree::rooted_binary`].
fn binary_depth(t: &MetricTree) -> Result<usize> {
    let n = t.vertex_count();
    let depth = (usize::BITS - 2 - (n + 1).leading_zeros()) as usize;
    if depth == 0 || (1 << (depth + 1)) - 1 != n {
        return domain("tree is not a full rooted binary tree");
    }
    for (i, e) in t.edges().iter().enumerate() {
        if e.from != i / 2 || e.to != Some(i + 1) {
            return domain("tree is not in rooted binary heap layout");
        }
        let sibling = &t.edges()[i ^ 1];
        if (sibling.length - e.length).abs() > ISOMETRY_TOL * e.length.max(1.0) {
            return domain("sibling edges of a rooted binary tree must have equal length");
        }
    }
    Ok(depth)
}

/// JSON form of an isometry, `{"kind": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IsometryDescriptor {
    Identity,
    Affine {
        matrix: Vec<Vec<f64>>,
        translation: Vec<f64>,
    },
    Translation {
        vector: Vec<f64>,
    },
    /// Rotation of the plane about the origin by `turns` full turns; quarter
    /// turns are exact.
    Rotation {
        turns: f64,
    },
    /// Reflection in the hyperplane through the origin orthogonal to `normal`.
    Reflection {
        normal: Vec<f64>,
    },
    Mobius {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    TreePermutation {
        vertices: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rays: Option<Vec<usize>>,
    },
    Product {
        factors: Vec<IsometryDescriptor>,
    },
}

impl IsometryDescriptor {
    pub fn build(&self, space: &Space) -> Result<Isometry> {
        if let Space::Rescaled { base, .. } = space {
            return self.build(base);
        }
        let iso = match (self, space) {
            (IsometryDescriptor::Identity, _) => Isometry::Identity,
            (IsometryDescriptor::Affine { matrix, translation }, _) => Isometry::Affine {
                matrix: matrix.clone(),
                translation: translation.clone(),
            },
            (IsometryDescriptor::Translation { vector }, _) => Isometry::Affine {
                matrix: identity_matrix(vector.len()),
                translation: vector.clone(),
            },
            (IsometryDescriptor::Rotation { turns }, _) => {
                if !turns.is_finite() {
                    return domain("rotation turns must be finite");
                }
                let (c, s) = exact_cos_sin(*turns);
                Isometry::Affine {
                    matrix: vec![vec![c, -s], vec![s, c]],
                    translation: vec![0.0, 0.0],
                }
            }
            (IsometryDescriptor::Reflection { normal }, _) => {
                let nn: f64 = normal.iter().map(|x| x * x).sum();
                if !(nn.is_finite() && nn > 0.0) {
                    return domain("reflection normal must be a nonzero finite vector");
                }
                let k = normal.len();
                let matrix = (0..k)
                    .map(|i| {
                        (0..k)
                            .map(|j| {
                                let delta = if i == j { 1.0 } else { 0.0 };
                                delta - 2.0 * normal[i] * normal[j] / nn
                            })
                            .collect()
                    })
                    .collect();
                Isometry::Affine {
                    matrix,
                    translation: vec![0.0; k],
                }
            }
            (IsometryDescriptor::Mobius { a, b, c, d }, _) => Isometry::Mobius([[*a, *b], [*c, *d]]),
            (IsometryDescriptor::TreePermutation { vertices, rays }, Space::Tree(t)) => {
                Isometry::tree_automorphism(t, vertices.clone(), rays.clone())?
            }
            (IsometryDescriptor::TreePermutation { .. }, _) => {
                return domain("tree permutations need a tree space")
            }
            (IsometryDescriptor::Product { factors }, Space::Product(fs)) => {
                if factors.len() != fs.len() {
                    return domain("product isometry needs one factor per factor space");
                }
                Isometry::Product(factors.iter().zip(fs).map(|(d, f)| d.build(f)).collect::<Result<_>>()?)
            }
            (IsometryDescriptor::Product { .. }, _) => return domain("product isometries need a product space"),
        };
        iso.check(space)?;
        Ok(iso)
    }
}

fn identity_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// `(cos, sin)` of `2π·turns`, exact at multiples of a quarter turn.
fn exact_cos_sin(turns: f64) -> (f64, f64) {
    let q = 4.0 * turns;
    if q == q.round() {
        match (q as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let a = 2.0 * std::f64::consts::PI * turns;
        (a.cos(), a.sin())
    }
}

/// JSON form of an action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionDescriptor {
    /// Images of the primitive generators, in order.
    Generators { images: Vec<IsometryDescriptor> },
    GrigorchukTree,
}

/// `f(g) = ρ(g) f(e)`, determined by its basepoint.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantMap {
    pub basepoint: Point,
}

impl EquivariantMap {
    pub fn new(basepoint: Point) -> Self {
        Self { basepoint }
    }

    pub fn at(&self, action: &IsometricAction, g: &Element) -> Result<Point> {
        action.apply(g, &self.basepoint)
    }
}

/// Independent random generator for the sampling helpers of this module.
pub(crate) fn sampling_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    walk_rng(seed, stream)
}

/// Sampled check of the homomorphism and isometry properties:
/// `ρ(gh)x = ρ(g)ρ(h)x` and `d(ρ(g)x, ρ(g)y) = d(x, y)`. Returns the largest
/// deviation of each.
pub fn check_action(action: &IsometricAction, elements: &[Element], samples: usize, seed: u64) -> Result<(f64, f64)> {
    use rand::Rng;
    if elements.is_empty() {
        return domain("need at least one element to sample");
    }
    let mut rng = sampling_rng(seed, 0);
    let space = action.space();
    let (mut hom, mut iso) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let g = &elements[rng.gen_range(0..elements.len())];
        let h = &elements[rng.gen_range(0..elements.len())];
        let x = space.sample_point(&mut rng, 2.0);
        let y = space.sample_point(&mut rng, 2.0);
        let gh = action.group().multiply(g, h)?;
        let lhs = action.apply(&gh, &x)?;
        let rhs = action.apply(g, &action.apply(h, &x)?)?;
        hom = hom.max(space.dist(&lhs, &rhs));
        let gx = action.apply(g, &x)?;
        let gy = action.apply(g, &y)?;
        iso = iso.max((space.dist(&gx, &gy) - space.dist(&x, &y)).abs());
    }
    Ok((hom, iso))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(exact_cos_sin(0.25), (0.0, 1.0));
        assert_eq!(exact_cos_sin(-0.25), (0.0, -1.0));
        assert_eq!(exact_cos_sin(1.0), (1.0, 0.0));
    }

    #[test]
    fn affine_pow_and_inverse() {
        let r = IsometryDescriptor::Rotation { turns: 0.25 }.build(&Space::euclidean(2)).unwrap();
        assert_eq!(r.pow(4).apply(&Space::euclidean(2), &Point::Euclidean(vec![1.0, 2.0])), Point::Euclidean(vec![1.0, 2.0]));
        let t = Isometry::Affine {
            matrix: vec![vec![1.0]],
            translation: vec![0.5],
        };
        let p = t.pow(-6).apply(&Space::euclidean(1), &Point::Euclidean(vec![0.0]));
        assert_eq!(p, Point::Euclidean(vec![-3.0]));
    }

    #[test]
    fn rejects_broken_relations_and_non_isometries() {
        let e2 = Space::euclidean(2);
        let bad = IsometryDescriptor::Rotation { turns: 0.2 }.build(&e2).unwrap();
        let err = IsometricAction::new(Group::Cyclic { order: 4 }, e2.clone(), ActionRule::Generators(vec![bad]));
        assert!(err.is_err());
        let shear = IsometryDescriptor::Affine {
            matrix: vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            translation: vec![0.0, 0.0],
        };
        assert!(shear.build(&e2).is_err());
        let m = IsometryDescriptor::Mobius { a: 2.0, b: 0.0, c: 0.0, d: 1.0 };
        assert!(m.build(&Space::HyperbolicPlane).is_err());
    }

    #[test]
    fn tree_automorphism_validation() {
        let t = MetricTree::star(3, 1.0).unwrap();
        assert!(Isometry::tree_automorphism(&t, vec![0, 2, 3, 1], None).is_ok());
        assert!(Isometry::tree_automorphism(&t, vec![1, 0, 2, 3], None).is_err());
        assert!(Isometry::tree_automorphism(&t, vec![0, 1, 1, 2], None).is_err());
        let uneven = MetricTree::path(&[1.0, 2.0]).unwrap();
        assert!(Isometry::tree_automorphism(&uneven, vec![2, 1, 0], None).is_err());
        let even = MetricTree::path(&[1.0, 1.0]).unwrap();
        let flip = Isometry::tree_automorphism(&even, vec![2, 1, 0], None).unwrap();
        let s = Space::tree(even.clone());
        let p = Point::Tree(even.canonical(0, 0.25));
        assert_eq!(flip.apply(&s, &p), Point::Tree(even.canonical(1, 0.75)));
    }

    #[test]
    fn grigorchuk_tree_action() {
        let t = Space::tree(MetricTree::rooted_binary(4, 1.0).unwrap());
        let action = IsometricAction::new(Group::Grigorchuk, t.clone(), ActionRule::GrigorchukTree).unwrap();
        let g = Group::Grigorchuk;
        let els: Vec<Element> = ["a", "b", "ab", "cad", "dabac"].iter().map(|w| g.parse_word(w).unwrap()).collect();
        let (hom, iso) = check_action(&action, &els, 200, 3).unwrap();
        assert_eq!(hom, 0.0);
        assert!(iso < 1e-12);
        // a swaps the two subtrees of the root
        let tr = t.tree_ref().unwrap();
        let a = g.parse_word("a").unwrap();
        assert_eq!(action.apply(&a, &Point::Tree(tr.vertex(1).unwrap())).unwrap(), Point::Tree(tr.vertex(2).unwrap()));
        assert_eq!(action.apply(&a, &Point::Tree(tr.vertex(0).unwrap())).unwrap(), Point::Tree(tr.vertex(0).unwrap()));
    }
}
