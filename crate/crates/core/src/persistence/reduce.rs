//! Standard column reduction of the filtered boundary matrix over GF(2),
//! with clearing: dimensions are reduced top-down and every column that
//! becomes the pivot of a higher-dimensional column is zeroed unreduced.

use super::filtration::CubicalGrid;
use super::{PersistenceDiagram, PersistencePair};
use crate::sedt::ScalarField;

const NONE: u32 = u32::MAX;

/// Symmetric difference of two ascending index lists.
fn add_columns(target: &mut Vec<u32>, source: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(source[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&source[j..]);
    std::mem::swap(target, scratch);
}

pub(super) fn reduce_pairs(field: &ScalarField) -> Vec<PersistencePair> {
    let grid = CubicalGrid::new(field);
    let rank = grid.ranks();
    let n = grid.order.len();
    let dims: Vec<u8> = grid.order.iter().map(|&i| grid.dim(i)).collect();
    let value_at = |r: usize| grid.values[grid.order[r] as usize];

    let mut columns: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut faces = Vec::new();
    for (r, &idx) in grid.order.iter().enumerate() {
        grid.boundary(idx, &mut faces);
        let mut col: Vec<u32> = faces.iter().map(|&b| rank[b as usize]).collect();
        col.sort_unstable();
        columns[r] = col;
    }

    let mut pivot_owner = vec![NONE; n];
    let mut cleared = vec![false; n];
    let mut scratch = Vec::new();
    for dim in [2u8, 1] {
        for j in 0..n {
            if dims[j] != dim || cleared[j] {
                continue;
            }
            let mut col = std::mem::take(&mut columns[j]);
            while let Some(&low) = col.last() {
                let owner = pivot_owner[low as usize];
                if owner == NONE {
                    break;
                }
                add_columns(&mut col, &columns[owner as usize], &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_owner[low as usize] = j as u32;
                cleared[low as usize] = true;
                columns[low as usize].clear();
            }
            columns[j] = col;
        }
    }

    let mut pairs = Vec::new();
    for (low, &owner) in pivot_owner.iter().enumerate() {
        if owner == NONE {
            continue;
        }
        let (birth, death) = (value_at(low), value_at(owner as usize));
        if birth != death {
            pairs.push(PersistencePair::finite(dims[low], birth, death));
        }
    }
    for j in 0..n {
        let is_cycle = columns[j].is_empty() && !cleared[j];
        if is_cycle && pivot_owner[j] == NONE {
            assert!(dims[j] < 2, "a rectangle has no 2-dimensional homology");
            pairs.push(PersistencePair::essential(dims[j], value_at(j)));
        }
    }
    pairs
}

/// Reference diagram by boundary-matrix reduction.
pub fn persistence_reduce(image_id: &str, field: &ScalarField) -> PersistenceDiagram {
    PersistenceDiagram::new(image_id, reduce_pairs(field))
}
