//! Union-find persistence for 2D cubical complexes.
//!
//! H0 is the elder-rule merge tree of vertices and edges in filtration order.
//! H1 uses planar duality: walking the filtration backwards, pixels and a
//! single exterior node are the vertices of the dual graph and each edge
//! joins the two regions on either side of it. A dual merge at edge `e`
//! between regions born (in reverse) at faces `f_old` and `f_young` is the
//! forward H1 class born at `e` that dies when `f_young` fills it in.

use super::filtration::CubicalGrid;
use super::{PersistenceDiagram, PersistencePair};
use crate::sedt::ScalarField;

/// Union-find whose roots carry the filtration rank of their birth cell.
struct MergeForest {
    parent: Vec<u32>,
    birth_rank: Vec<u32>,
}

impl MergeForest {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            birth_rank: vec![0; n],
        }
    }

    fn find(&mut self, mut node: u32) -> u32 {
        let mut root = node;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[node as usize] != root {
            let next = self.parent[node as usize];
            self.parent[node as usize] = root;
            node = next;
        }
        root
    }
}

pub(super) fn fast_pairs(field: &ScalarField) -> Vec<PersistencePair> {
    let grid = CubicalGrid::new(field);
    let rank = grid.ranks();
    let (w, h) = (field.width(), field.height());
    let cols = grid.cols;
    let value_of_rank = |r: u32| grid.values[grid.order[r as usize] as usize];
    let mut pairs = Vec::new();

    // H0: nodes are vertices, numbered (y/2) * (w + 1) + x/2.
    let vertex = |x: usize, y: usize| ((y / 2) * (w + 1) + x / 2) as u32;
    let mut forest = MergeForest::new((w + 1) * (h + 1));
    for (r, &idx) in grid.order.iter().enumerate() {
        let (x, y) = grid.coords(idx);
        match (x & 1, y & 1) {
            (0, 0) => forest.birth_rank[vertex(x, y) as usize] = r as u32,
            (1, 1) => {}
            _ => {
                let (a, b) = if x & 1 == 1 {
                    (vertex(x - 1, y), vertex(x + 1, y))
                } else {
                    (vertex(x, y - 1), vertex(x, y + 1))
                };
                let (ra, rb) = (forest.find(a), forest.find(b));
                if ra == rb {
                    continue;
                }
                let (elder, younger) = if forest.birth_rank[ra as usize] < forest.birth_rank[rb as usize] {
                    (ra, rb)
                } else {
                    (rb, ra)
                };
                forest.parent[younger as usize] = elder;
                let birth = value_of_rank(forest.birth_rank[younger as usize]);
                let death = grid.values[idx as usize];
                if birth != death {
                    pairs.push(PersistencePair::finite(0, birth, death));
                }
            }
        }
    }
    pairs.push(PersistencePair::essential(0, value_of_rank(0)));

    // H1 via the dual graph: nodes are pixels (py * w + px) plus the exterior.
    let exterior = (w * h) as u32;
    let mut dual = MergeForest::new(w * h + 1);
    dual.birth_rank[exterior as usize] = u32::MAX;
    let pixel = |x: usize, y: usize| ((y / 2) * w + x / 2) as u32;
    let side = |x: isize, y: isize| -> u32 {
        if x < 0 || y < 0 || x as usize >= cols || y as usize >= grid.rows {
            exterior
        } else {
            pixel(x as usize, y as usize)
        }
    };
    for &idx in grid.order.iter().rev() {
        let (x, y) = grid.coords(idx);
        match (x & 1, y & 1) {
            (1, 1) => dual.birth_rank[pixel(x, y) as usize] = rank[idx as usize],
            (0, 0) => {}
            _ => {
                let (xi, yi) = (x as isize, y as isize);
                let (a, b) = if x & 1 == 1 {
                    (side(xi, yi - 1), side(xi, yi + 1))
                } else {
                    (side(xi - 1, yi), side(xi + 1, yi))
                };
                let (ra, rb) = (dual.find(a), dual.find(b));
                if ra == rb {
                    continue;
                }
                // in the reversed sweep the elder region is the one with the larger rank
                let (elder, younger) = if dual.birth_rank[ra as usize] > dual.birth_rank[rb as usize] {
                    (ra, rb)
                } else {
                    (rb, ra)
                };
                dual.parent[younger as usize] = elder;
                let birth = grid.values[idx as usize];
                let death = value_of_rank(dual.birth_rank[younger as usize]);
                if birth != death {
                    pairs.push(PersistencePair::finite(1, birth, death));
                }
            }
        }
    }
    pairs
}

/// Production diagram via union-find and duality.
pub fn persistence_fast(image_id: &str, field: &ScalarField) -> PersistenceDiagram {
    PersistenceDiagram::new(image_id, fast_pairs(field))
}

#[cfg(test)]
mod tests {
    use super::super::{persistence_reduce, Death, PersistencePair as P};
    use super::*;
    use crate::raster::{betti_labels, euler_characteristic, BinaryImage};
    use crate::sedt::sedt;
    use rand::Rng;

    fn ring_field() -> ScalarField {
        ScalarField::new(3, 3, vec![-2, -1, -2, -1, 1, -1, -2, -1, -2]).unwrap()
    }

    fn both(field: &ScalarField) -> (PersistenceDiagram, PersistenceDiagram) {
        (persistence_fast("f", field), persistence_reduce("f", field))
    }

    #[test]
    fn constant_field_has_single_essential_class() {
        let f = ScalarField::from_fn(5, 4, |_, _| 3);
        let (fast, reduce) = both(&f);
        assert_eq!(fast.pairs(), &[P::essential(0, 3)]);
        assert_eq!(reduce, fast);
    }

    #[test]
    fn ring_diagram() {
        let expected = PersistenceDiagram::new(
            "ring",
            vec![
                P::essential(0, -2),
                P::finite(0, -2, -1),
                P::finite(0, -2, -1),
                P::finite(0, -2, -1),
                P::finite(1, -1, 1),
            ],
        );
        let (fast, reduce) = both(&ring_field());
        assert_eq!(reduce, expected);
        assert_eq!(fast, expected);
    }

    #[test]
    fn monotone_raster_is_contractible_at_every_level() {
        let f = ScalarField::from_fn(6, 5, |x, y| (y * 6 + x) as i64);
        let (fast, reduce) = both(&f);
        assert_eq!(fast.pairs(), &[P::essential(0, 0)]);
        assert_eq!(reduce, fast);
    }

    #[test]
    fn agrees_with_reduction_on_random_integer_fields() {
        let mut rng = crate::seed::rng(11);
        for _ in 0..100 {
            let (w, h) = (rng.random_range(1..=16), rng.random_range(1..=16));
            let spread = rng.random_range(1..=20);
            let f = ScalarField::from_fn(w, h, |_, _| rng.random_range(-spread..=spread));
            let (fast, reduce) = both(&f);
            assert_eq!(fast, reduce, "{w}x{h}");
        }
    }

    #[test]
    fn agrees_with_reduction_on_sedt_fields() {
        let mut rng = crate::seed::rng(12);
        for _ in 0..40 {
            let density = rng.random_range(0.2..0.8);
            let img = BinaryImage::from_fn(24, 24, |_, _| rng.random_bool(density));
            let (fast, reduce) = both(&sedt(&img));
            assert_eq!(fast, reduce);
        }
    }

    #[test]
    fn foreground_level_set_matches_labels() {
        let mut rng = crate::seed::rng(13);
        for _ in 0..200 {
            let (w, h) = (rng.random_range(1..=32), rng.random_range(1..=32));
            let density = rng.random_range(0.1..0.9);
            let img = BinaryImage::from_fn(w, h, |_, _| rng.random_bool(density));
            let d = persistence_fast("x", &sedt(&img));
            let labels = betti_labels(&img);
            assert_eq!(d.alive_at(0, -1), labels.beta0 as usize);
            assert_eq!(d.alive_at(1, -1), labels.beta1 as usize);
            assert_eq!(labels.beta0 as i64 - labels.beta1 as i64, euler_characteristic(&img));
        }
    }

    #[test]
    fn pairs_are_well_formed() {
        let mut rng = crate::seed::rng(14);
        for _ in 0..50 {
            let f = ScalarField::from_fn(12, 9, |_, _| rng.random_range(-6..=6));
            let d = persistence_fast("x", &f);
            let essential: Vec<_> = d.pairs().iter().filter(|p| p.death.is_infinite()).collect();
            assert_eq!(essential.len(), 1);
            assert_eq!(essential[0].dim, 0);
            assert_eq!(essential[0].birth, f.min_value());
            for p in d.pairs() {
                if let Death::Finite(death) = p.death {
                    assert!(death > p.birth);
                }
            }
        }
    }

    #[test]
    fn constant_shift_moves_every_pair() {
        let mut rng = crate::seed::rng(15);
        for _ in 0..30 {
            let f = ScalarField::from_fn(10, 10, |_, _| rng.random_range(-9..=9));
            let c = rng.random_range(-50..=50);
            assert_eq!(
                persistence_fast("x", &f.map(|v| v + c)),
                persistence_fast("x", &f).shifted(c)
            );
        }
    }
}
