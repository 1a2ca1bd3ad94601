//! Small concrete actions with a default measure, generating set and start.

use super::{ActionRule, IsometricAction, IsometryDescriptor};
use crate::group::{GeneratingSet, Group};
use crate::measure::Measure;
use crate::space::{MetricTree, Point, Space};

#[derive(Clone, Debug)]
pub struct Example {
    pub name: &'static str,
    pub action: IsometricAction,
    /// Uniform on the standard symmetric generating set.
    pub measure: Measure,
    pub generators: GeneratingSet,
    pub start: Point,
}

fn build(name: &'static str, group: Group, space: Space, images: Vec<IsometryDescriptor>, start: Point) -> Example {
    let isos = images
        .iter()
        .map(|d| d.build(&space).expect("bundled isometry"))
        .collect();
    let action = IsometricAction::new(group.clone(), space, ActionRule::Generators(isos)).expect("bundled action");
    finish(name, action, start)
}

fn finish(name: &'static str, action: IsometricAction, start: Point) -> Example {
    let generators = action.group().generators();
    let measure = Measure::uniform(action.group(), generators.elements(), true).expect("bundled measure");
    Example {
        name,
        action,
        measure,
        generators,
        start,
    }
}

/// `Z` acting on `R` by `x ↦ x + t`.
pub fn translation_line(t: f64) -> Example {
    build(
        "translation_line",
        Group::Lattice { rank: 1 },
        Space::euclidean(1),
        vec![IsometryDescriptor::Translation { vector: vec![t] }],
        Point::Euclidean(vec![0.0]),
    )
}

/// `Z/order` rotating the plane about the origin.
pub fn rotation_plane(order: u64) -> Example {
    build(
        "rotation_plane",
        Group::Cyclic { order },
        Space::euclidean(2),
        vec![IsometryDescriptor::Rotation {
            turns: 1.0 / order as f64,
        }],
        Point::Euclidean(vec![1.0, 0.0]),
    )
}

/// Symmetries of the regular `order`-gon acting on the plane.
pub fn dihedral_plane(order: u64) -> Example {
    build(
        "dihedral_plane",
        Group::Dihedral { order },
        Space::euclidean(2),
        vec![
            IsometryDescriptor::Rotation {
                turns: 1.0 / order as f64,
            },
            IsometryDescriptor::Reflection {
                normal: vec![0.0, 1.0],
            },
        ],
        Point::Euclidean(vec![1.0, 0.5]),
    )
}

/// `D_∞` acting on `R` by `s: x ↦ -x`, `t: x ↦ 1 - x`.
pub fn dihedral_line() -> Example {
    build(
        "dihedral_line",
        Group::DihedralInf,
        Space::euclidean(1),
        vec![
            IsometryDescriptor::Affine {
                matrix: vec![vec![-1.0]],
                translation: vec![0.0],
            },
            IsometryDescriptor::Affine {
                matrix: vec![vec![-1.0]],
                translation: vec![1.0],
            },
        ],
        Point::Euclidean(vec![0.0]),
    )
}

/// `Z` acting on the hyperbolic plane by the parabolic `z ↦ z + 1`.
pub fn parabolic() -> Example {
    build(
        "parabolic",
        Group::Lattice { rank: 1 },
        Space::HyperbolicPlane,
        vec![IsometryDescriptor::Mobius {
            a: 1.0,
            b: 1.0,
            c: 0.0,
            d: 1.0,
        }],
        Point::hyperbolic(0.0, 1.0),
    )
}

/// `Z/legs` rotating the legs of a star with unit legs; starts at a leaf.
pub fn star_rotation(legs: usize) -> Example {
    let tree = MetricTree::star(legs, 1.0).expect("valid star");
    let vertices = (0..=legs).map(|v| if v == 0 { 0 } else { v % legs + 1 }).collect();
    let start = Point::Tree(tree.vertex(1).expect("leaf"));
    build(
        "star_rotation",
        Group::Cyclic { order: legs as u64 },
        Space::tree(tree),
        vec![IsometryDescriptor::TreePermutation { vertices, rays: None }],
        start,
    )
}

/// The Grigorchuk group on the rooted binary tree of the given depth.
pub fn grigorchuk_tree(depth: usize) -> Example {
    let tree = MetricTree::rooted_binary(depth, 1.0).expect("valid depth");
    let leaf = (1usize << depth) - 1;
    let start = Point::Tree(tree.vertex(leaf).expect("leaf"));
    let action =
        IsometricAction::new(Group::Grigorchuk, Space::tree(tree), ActionRule::GrigorchukTree).expect("bundled action");
    finish("grigorchuk_tree", action, start)
}

/// `Z²` on `R × H²`: the first generator translates `R`, the second
/// dilates `H²` by 2 about the origin.
pub fn lattice_product() -> Example {
    let r = std::f64::consts::SQRT_2;
    build(
        "lattice_product",
        Group::Lattice { rank: 2 },
        Space::Product(vec![Space::euclidean(1), Space::HyperbolicPlane]),
        vec![
            IsometryDescriptor::Product {
                factors: vec![
                    IsometryDescriptor::Translation { vector: vec![1.0] },
                    IsometryDescriptor::Identity,
                ],
            },
            IsometryDescriptor::Product {
                factors: vec![
                    IsometryDescriptor::Identity,
                    IsometryDescriptor::Mobius {
                        a: r,
                        b: 0.0,
                        c: 0.0,
                        d: 1.0 / r,
                    },
                ],
            },
        ],
        Point::Product(vec![Point::Euclidean(vec![0.0]), Point::hyperbolic(0.0, 1.0)]),
    )
}

/// Every bundled example with default parameters.
pub fn bundled_examples() -> Vec<Example> {
    vec![
        translation_line(0.75),
        rotation_plane(4),
        dihedral_plane(3),
        dihedral_line(),
        parabolic(),
        star_rotation(4),
        grigorchuk_tree(4),
        lattice_product(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::check_action;
    use crate::group::Element;

    #[test]
    fn bundled_actions_are_isometric_homomorphisms() {
        for ex in bundled_examples() {
            let g = ex.action.group().clone();
            let mut els: Vec<Element> = ex.generators.elements().to_vec();
            let words: &[&str] = match g {
                Group::Grigorchuk => &["ab", "adcb", "bada"],
                Group::Lattice { rank: 1 } => &["aaa", "AA"],
                Group::Lattice { .. } => &["aB", "bba"],
                Group::DihedralInf => &["st", "tst"],
                Group::Cyclic { .. } => &["rr", "R"],
                _ => &["rs", "rrs"],
            };
            els.extend(words.iter().map(|w| g.parse_word(w).unwrap()));
            let (hom, iso) = check_action(&ex.action, &els, 300, 11).unwrap();
            assert!(hom < 1e-9 && iso < 1e-9, "{}: {hom} {iso}", ex.name);
        }
    }
}
