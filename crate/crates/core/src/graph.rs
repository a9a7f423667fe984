//! Bounded-degree bipartite graphs.
//!
//! Left vertices are the indices `0..left_count()`, standing for binary
//! strings of length less than `n`; there are at most `2^n` of them. Each left
//! vertex owns an ordered neighbor list. Order matters (fingerprints refer to
//! positions in it) and repeated entries are kept, since the random
//! constructions draw neighbors with replacement.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BipartiteGraph {
    n: u32,
    right_size: usize,
    max_degree: usize,
    neighbors: Vec<Vec<usize>>,
}

/// First broken invariant found by [`BipartiteGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TooManyLeft {
        count: usize,
        limit: u128,
    },
    NeighborOutOfRange {
        left: usize,
        position: usize,
        right: usize,
        right_size: usize,
    },
    DegreeExceeded {
        left: usize,
        degree: usize,
        max_degree: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooManyLeft { count, limit } => {
                write!(f, "{count} left vertices but n allows at most {limit}")
            }
            Violation::NeighborOutOfRange {
                left,
                position,
                right,
                right_size,
            } => write!(
                f,
                "left vertex {left}: neighbor #{position} is {right}, outside 0..{right_size}"
            ),
            Violation::DegreeExceeded {
                left,
                degree,
                max_degree,
            } => {
                write!(f, "left vertex {left} has degree {degree} > max_degree {max_degree}")
            }
        }
    }
}

impl BipartiteGraph {
    /// Builds a graph and validates it.
    pub fn new(n: u32, right_size: usize, max_degree: usize, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let g = Self::new_unchecked(n, right_size, max_degree, neighbors);
        match g.validate() {
            Ok(()) => Ok(g),
            Err(v) => Err(Error::InvalidGraph(v)),
        }
    }

    pub fn new_unchecked(n: u32, right_size: usize, max_degree: usize, neighbors: Vec<Vec<usize>>) -> Self {
        BipartiteGraph {
            n,
            right_size,
            max_degree,
            neighbors,
        }
    }

    /// Complete bipartite graph on `2^n` left and `right_size` right vertices.
    pub fn complete(n: u32, right_size: usize) -> Self {
        let row: Vec<usize> = (0..right_size).collect();
        BipartiteGraph {
            n,
            right_size,
            max_degree: right_size,
            neighbors: vec![row; 1 << n],
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let limit = 1u128.checked_shl(self.n).unwrap_or(u128::MAX);
        if self.neighbors.len() as u128 > limit {
            return Err(Violation::TooManyLeft {
                count: self.neighbors.len(),
                limit,
            });
        }
        for (left, list) in self.neighbors.iter().enumerate() {
            if let Some((position, &right)) = list.iter().enumerate().find(|(_, &r)| r >= self.right_size) {
                return Err(Violation::NeighborOutOfRange {
                    left,
                    position,
                    right,
                    right_size: self.right_size,
                });
            }
            if list.len() > self.max_degree {
                return Err(Violation::DegreeExceeded {
                    left,
                    degree: list.len(),
                    max_degree: self.max_degree,
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn left_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn right_size(&self) -> usize {
        self.right_size
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn neighbors_of(&self, left: usize) -> Result<&[usize]> {
        self.neighbors.get(left).map(Vec::as_slice).ok_or(Error::OutOfRange {
            index: left,
            size: self.neighbors.len(),
        })
    }

    /// Left vertices adjacent to `right`, in left-index order, one entry per
    /// parallel edge.
    pub fn left_neighbors_of(&self, right: usize) -> Result<Vec<usize>> {
        if right >= self.right_size {
            return Err(Error::OutOfRange {
                index: right,
                size: self.right_size,
            });
        }
        Ok(self
            .neighbors
            .iter()
            .enumerate()
            .flat_map(|(left, list)| list.iter().filter(move |&&r| r == right).map(move |_| left))
            .collect())
    }

    /// Reverse adjacency for every right vertex at once.
    pub fn reverse_adjacency(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.right_size];
        for (left, list) in self.neighbors.iter().enumerate() {
            for &r in list {
                rev[r].push(left);
            }
        }
        rev
    }

    /// Distinct neighbors of `left`, sorted.
    pub fn distinct_neighbors(&self, left: usize) -> Vec<usize> {
        let mut v = self.neighbors[left].clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Canonical text form: fixed field order, one neighbor list per line.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"n\": {},\n", self.n));
        out.push_str(&format!("  \"right_size\": {},\n", self.right_size));
        out.push_str(&format!("  \"max_degree\": {},\n", self.max_degree));
        out.push_str("  \"neighbors\": [");
        for (i, list) in self.neighbors.iter().enumerate() {
            out.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
            let items: Vec<String> = list.iter().map(usize::to_string).collect();
            out.push_str(&items.join(", "));
            out.push(']');
        }
        if !self.neighbors.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("]\n}\n");
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let g: BipartiteGraph = serde_json::from_str(text).map_err(Error::from_json)?;
        g.validate().map_err(Error::InvalidGraph)?;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_canonical_string()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// The 3x2 graph on which Hall's condition holds up to size 2 but no on-line
/// strategy exists: `x -> {r1, r2}`, `y -> {r1}`, `z -> {r2}`, with
/// `x, y, z = 0, 1, 2` and `r1, r2 = 0, 1`.
pub fn hall_counterexample() -> BipartiteGraph {
    BipartiteGraph::new_unchecked(2, 2, 2, vec![vec![0, 1], vec![0], vec![1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_valid() {
        let g = BipartiteGraph::new(0, 1, 0, vec![vec![]]).unwrap();
        assert_eq!(g.left_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn neighbor_at_right_size_is_a_violation() {
        let g = BipartiteGraph::new_unchecked(1, 4, 2, vec![vec![0, 1], vec![2, 4]]);
        assert_eq!(
            g.validate(),
            Err(Violation::NeighborOutOfRange {
                left: 1,
                position: 1,
                right: 4,
                right_size: 4
            })
        );
    }

    #[test]
    fn complete_graph_is_valid() {
        let g = BipartiteGraph::complete(2, 4);
        assert_eq!(g.validate(), Ok(()));
        assert!(g.adjacency().iter().all(|l| l.len() == 4));
    }

    #[test]
    fn degree_bound_enforced() {
        let g = BipartiteGraph::new_unchecked(1, 4, 2, vec![vec![0, 1, 2]]);
        assert!(matches!(
            g.validate(),
            Err(Violation::DegreeExceeded { left: 0, degree: 3, .. })
        ));
    }

    #[test]
    fn too_many_left_vertices() {
        let g = BipartiteGraph::new_unchecked(1, 1, 1, vec![vec![0]; 3]);
        assert!(matches!(g.validate(), Err(Violation::TooManyLeft { count: 3, .. })));
    }

    #[test]
    fn neighbors_of_complete() {
        let g = BipartiteGraph::complete(1, 2);
        assert_eq!(g.neighbors_of(0).unwrap(), &[0, 1]);
        assert!(g.neighbors_of(2).is_err());
    }

    #[test]
    fn multi_edges_kept() {
        let g = BipartiteGraph::new(1, 4, 2, vec![vec![0, 1], vec![3, 3]]).unwrap();
        assert_eq!(g.neighbors_of(1).unwrap(), &[3, 3]);
        assert_eq!(g.left_neighbors_of(3).unwrap(), vec![1, 1]);
        assert!(g.left_neighbors_of(4).is_err());
        assert_eq!(g.distinct_neighbors(1), vec![3]);
    }

    #[test]
    fn missing_field_is_parse_error() {
        let err = BipartiteGraph::from_json_str(r#"{"n": 1, "right_size": 2, "max_degree": 1}"#).unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("neighbors"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overfull_vertex_refused_on_load() {
        let text = r#"{"n": 1, "right_size": 4, "max_degree": 2, "neighbors": [[0, 1, 2]]}"#;
        assert!(matches!(
            BipartiteGraph::from_json_str(text),
            Err(Error::InvalidGraph(Violation::DegreeExceeded { .. }))
        ));
    }

    #[test]
    fn canonical_form_shape() {
        let g = hall_counterexample();
        let text = g.to_canonical_string();
        assert_eq!(
            text,
            "{\n  \"n\": 2,\n  \"right_size\": 2,\n  \"max_degree\": 2,\n  \"neighbors\": [\n    [0, 1],\n    [0],\n    [1]\n  ]\n}\n"
        );
        assert_eq!(BipartiteGraph::from_json_str(&text).unwrap(), g);
    }

    #[test]
    fn save_load_roundtrip_on_disk() {
        let dir = std::env::temp_dir().join(format!("omex-graph-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g.json");
        let g = BipartiteGraph::new(2, 5, 3, vec![vec![4, 4, 0], vec![], vec![1], vec![2, 3]]).unwrap();
        g.save(&path).unwrap();
        let first = fs::read(&path).unwrap();
        assert_eq!(BipartiteGraph::load(&path).unwrap(), g);
        g.save(&path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
        fs::remove_dir_all(&dir).unwrap();
    }
}
