//! Finite-depth disk approximation of the limit set: the complete tree of
//! certified cylinder enclosures down to a chosen depth, with a pruned
//! nearest-leaf query that the walkers hammer on every step.

use num_complex::Complex64;

use crate::conformal::{compose_word, word_from_index, Disk, SystemSpec, Word};
use crate::Result;

/// The depth-`m` stand-in for the limit set of the system shifted to
/// `offset`: one enclosure disk per length-`m` word, plus every ancestor
/// level for search pruning.
///
/// Nesting (child disk inside parent disk) makes the signed distance to a
/// node disk a valid lower bound for the signed distance to every leaf disk
/// below it: for `leaf ⊆ node`, `|z−c_leaf| − r_leaf ≥ |z−c_node| − r_node`
/// at every `z`.
#[derive(Debug, Clone)]
pub struct DiskApproximation {
    offset: usize,
    depth: usize,
    degrees: Vec<usize>,
    /// `levels[l]` holds the enclosures of all length-`l` words in
    /// mixed-radix order (first letter most significant).
    levels: Vec<Vec<Disk>>,
}

/// Outcome of a nearest-leaf query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestLeaf {
    /// Mixed-radix index of the leaf word.
    pub index: usize,
    /// Signed distance from the query point to the leaf disk surface.
    pub distance: f64,
    /// The leaf disk's radius (absorption tolerances are relative to it).
    pub radius: f64,
}

impl DiskApproximation {
    /// Composes every word of every length `0..=depth` of the system
    /// shifted to `offset`.
    pub fn new(system: &SystemSpec, offset: usize, depth: usize) -> Result<Self> {
        let degrees = system.degrees(offset, depth)?;
        let mut levels: Vec<Vec<Disk>> = Vec::with_capacity(depth + 1);
        for l in 0..=depth {
            let level_degrees = &degrees[..l];
            let count: usize = level_degrees.iter().product();
            let mut level = Vec::with_capacity(count);
            for idx in 0..count {
                let word = Word::new(offset, word_from_index(idx, level_degrees));
                level.push(compose_word(system, &word)?.enclosure());
            }
            levels.push(level);
        }
        Ok(DiskApproximation {
            offset,
            depth,
            degrees,
            levels,
        })
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[self.depth].len()
    }

    pub fn leaf_disk(&self, index: usize) -> Disk {
        self.levels[self.depth][index]
    }

    /// The word addressed by a leaf index.
    pub fn leaf_word(&self, index: usize) -> Word {
        Word::new(self.offset, word_from_index(index, &self.degrees))
    }

    /// Index of the length-`n` ancestor of a leaf.  Prefixes own contiguous
    /// leaf ranges in mixed-radix order, so this is a block division.
    pub fn ancestor_index(&self, leaf_index: usize, n: usize) -> usize {
        let block: usize = self.degrees[n..].iter().product();
        leaf_index / block
    }

    /// Strictly nearest leaf disk to `z`; exact ties resolve to the lowest
    /// leaf index.
    pub fn nearest(&self, z: Complex64) -> NearestLeaf {
        let mut scratch = Vec::new();
        self.nearest_with(z, &mut scratch)
    }

    /// [`nearest`](DiskApproximation::nearest) with a caller-owned scratch
    /// stack, so hot loops avoid reallocating per query.
    ///
    /// Best-bound depth-first search: children are pushed in descending
    /// `(bound, index)` order so the cheapest pops first, and a node whose
    /// lower bound already exceeds the best leaf found is dropped on pop.
    pub fn nearest_with(
        &self,
        z: Complex64,
        stack: &mut Vec<(f64, usize, usize)>,
    ) -> NearestLeaf {
        let mut best_dist = f64::INFINITY;
        let mut best_index = usize::MAX;
        stack.clear();
        stack.push((self.levels[0][0].signed_distance(z), 0, 0));
        while let Some((bound, level, index)) = stack.pop() {
            if bound > best_dist {
                continue;
            }
            if level == self.depth {
                if bound < best_dist || (bound == best_dist && index < best_index) {
                    best_dist = bound;
                    best_index = index;
                }
                continue;
            }
            let d = self.degrees[level];
            let start = stack.len();
            for b in 0..d {
                let child = index * d + b;
                let child_bound = self.levels[level + 1][child].signed_distance(z);
                if child_bound <= best_dist {
                    stack.push((child_bound, level + 1, child));
                }
            }
            stack[start..].sort_by(|a, b| b.partial_cmp(a).unwrap());
        }
        NearestLeaf {
            index: best_index,
            distance: best_dist,
            radius: self.levels[self.depth][best_index].radius,
        }
    }

    /// Verifies strict child-in-parent nesting and pairwise disjointness on
    /// every level.  Quadratic in level size — test/diagnostic use.
    pub fn check_separation(&self) -> Result<()> {
        for l in 0..self.depth {
            let d = self.degrees[l];
            for (parent_idx, parent) in self.levels[l].iter().enumerate() {
                for b in 0..d {
                    let child = &self.levels[l + 1][parent_idx * d + b];
                    if !parent.contains(child) {
                        return Err(crate::Error::ValidationFailed {
                            generation: self.offset + l,
                            detail: format!(
                                "child {b} of node {parent_idx} at level {l} escapes its parent"
                            ),
                        });
                    }
                }
            }
        }
        for l in 1..=self.depth {
            let level = &self.levels[l];
            for i in 0..level.len() {
                for j in i + 1..level.len() {
                    if level[i].gap(&level[j]) <= 0.0 {
                        return Err(crate::Error::ValidationFailed {
                            generation: self.offset + l,
                            detail: format!("disks {i} and {j} at level {l} are not disjoint"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}
