//! Geometry of the Sierpinski gasket and its left half.
//!
//! The gasket SG is generated by the three midpoint contractions
//! F_j x = (x + q_j)/2 of an equilateral triangle with corners q_0 (apex),
//! q_1 (left), q_2 (right).  A *cell* is an image F_w(SG) for a word
//! w over {0,1,2}; the level-m vertex set V_m consists of all F_w q_j with
//! |w| = m, and the graph Γ_m joins two vertices when they lie in a common
//! level-m cell.
//!
//! Reflection across the vertical symmetry axis swaps q_1 ↔ q_2, i.e. the
//! digits 1 ↔ 2 of every address.  The closed *left half* is the closure of
//! the set of points whose first non-0 address digit is 1; its boundary
//! consists of q_0, q_1 and the axis points.  Named points, with `m ≥ 1`:
//!
//! * `x_m = F_0^{m-1} F_2 q_1` — the m-th vertex on the symmetry axis,
//! * `y_m = F_0^m q_1` — the m-th junction on the left outer edge,
//! * `z_m = reflect(y_m)` — its mirror image,
//!
//! and `y_0 = q_1` by convention.  The left-half cell of generation m is
//! the cell with word `0^{m-1} 1`, whose three corners are
//! {x_m, y_{m-1}, y_m}; its mirror has word `0^{m-1} 2`.

use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Address of a cell: a finite digit string over {0,1,2}. The empty word
/// addresses SG itself; the level of a cell is the word length.
pub type Word = Vec<u8>;

/// Render a word as a digit string (empty word renders as "").
pub fn word_to_string(w: &[u8]) -> String {
    w.iter().map(|d| char::from(b'0' + d)).collect()
}

/// Parse a digit string over {0,1,2} into a [`Word`].
pub fn word_from_str(s: &str) -> Result<Word> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            '2' => Ok(2),
            _ => Err(Error::Parse(format!("bad cell digit `{c}` in `{s}`"))),
        })
        .collect()
}

/// Which side of the symmetry axis a vertex lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Strictly inside the left half (first non-0 address digit is 1).
    Left,
    /// On the symmetry axis: the apex q_0 or one of the x_m.
    Axis,
    /// Strictly inside the mirror half.
    Right,
}

/// A vertex of some V_m in canonical form.
///
/// A vertex is an equivalence class of addresses (w, j) ↦ F_w q_j: a
/// junction point F_{w'a} q_b = F_{w'b} q_a has two aliases of equal
/// length, and appending the corner digit to the word gives aliases of
/// every greater length.  The canonical representative is the
/// lexicographically smallest alias (shortest word, then smallest
/// word-corner pair), which makes equality, ordering and hashing
/// structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    word: Word,
    corner: u8,
}

impl Vertex {
    /// Canonicalize an arbitrary address.
    pub fn new(mut word: Word, mut corner: u8) -> Self {
        assert!(corner < 3, "corner index out of range");
        debug_assert!(word.iter().all(|&d| d < 3), "word digit out of range");
        // Strip trailing repeats: F_{w j} q_j = F_w q_j.
        while word.last() == Some(&corner) {
            word.pop();
        }
        // Pick the smaller of the two aliases F_{w'a} q_b = F_{w'b} q_a.
        if let Some(last) = word.last_mut() {
            if *last > corner {
                std::mem::swap(last, &mut corner);
            }
        }
        Vertex { word, corner }
    }

    /// The boundary corner q_j.
    pub fn corner_point(j: u8) -> Self {
        assert!(j < 3, "corner index out of range");
        Vertex {
            word: Word::new(),
            corner: j,
        }
    }

    /// The canonical word component.
    pub fn word(&self) -> &[u8] {
        &self.word
    }

    /// The canonical corner component.
    pub fn corner(&self) -> u8 {
        self.corner
    }

    /// The least m with `self ∈ V_m` (= canonical word length).
    pub fn level(&self) -> usize {
        self.word.len()
    }

    /// True exactly for q_0, q_1, q_2.
    pub fn is_boundary(&self) -> bool {
        self.word.is_empty()
    }

    /// Mirror image across the symmetry axis (digit swap 1 ↔ 2).
    pub fn reflect(&self) -> Self {
        let swap = |d: u8| match d {
            1 => 2,
            2 => 1,
            d => d,
        };
        Vertex::new(self.word.iter().map(|&d| swap(d)).collect(), swap(self.corner))
    }

    /// Side of the symmetry axis. Axis vertices are exactly the
    /// reflection-fixed ones (q_0 and the x_m); every other vertex lies
    /// strictly inside the half named by the first non-0 digit of its
    /// canonical address.
    pub fn side(&self) -> Side {
        if self.reflect() == *self {
            return Side::Axis;
        }
        for &d in self.word.iter().chain(std::iter::once(&self.corner)) {
            match d {
                1 => return Side::Left,
                2 => return Side::Right,
                _ => {}
            }
        }
        unreachable!("a non-axis vertex has a non-0 digit")
    }

    /// An address of this vertex at exactly `level ≥ self.level()`:
    /// the canonical word padded by repeating the corner digit.
    pub fn address_at(&self, level: usize) -> Result<(Word, u8)> {
        if level < self.level() {
            return Err(Error::Domain(format!(
                "vertex {self} first appears at level {}, below requested level {level}",
                self.level()
            )));
        }
        let mut w = self.word.clone();
        w.resize(level, self.corner);
        Ok((w, self.corner))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", word_to_string(&self.word), self.corner)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex({self})")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Accepts the raw form `word:corner` (e.g. `01:2`, `:0`) and the
    /// special-point forms `x:m`, `y:m`, `z:m`, `q:j`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, idx) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("bad point `{s}` (expected `word:corner` or `x|y|z|q:index`)")))?;
        match head {
            "x" | "y" | "z" | "q" => {
                let m: usize = idx
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index in point `{s}`")))?;
                let kind = match head {
                    "x" => SpecialPoint::X(m),
                    "y" => SpecialPoint::Y(m),
                    "z" => SpecialPoint::Z(m),
                    _ => {
                        let j = u8::try_from(m)
                            .ok()
                            .filter(|&j| j < 3)
                            .ok_or_else(|| Error::Parse(format!("corner index must be 0..=2 in `{s}`")))?;
                        SpecialPoint::Q(j)
                    }
                };
                kind.vertex()
            }
            raw => {
                let corner: u8 = idx
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad corner in point `{s}`")))?;
                if corner > 2 {
                    return Err(Error::Parse(format!("corner index must be 0..=2 in `{s}`")));
                }
                Ok(Vertex::new(word_from_str(raw)?, corner))
            }
        }
    }
}

/// The named points: `x:m` on the axis, `y:m` on the left outer edge,
/// `z:m` its mirror, `q:j` the outer corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialPoint {
    X(usize),
    Y(usize),
    Z(usize),
    Q(u8),
}

impl SpecialPoint {
    /// Canonical vertex for the point. `y:0` is q_1 by convention;
    /// `x:0` and `z:0` do not exist.
    pub fn vertex(self) -> Result<Vertex> {
        match self {
            SpecialPoint::Q(j) if j < 3 => Ok(Vertex::corner_point(j)),
            SpecialPoint::Q(j) => Err(Error::Domain(format!("no corner q_{j}"))),
            SpecialPoint::Y(0) => Ok(Vertex::corner_point(1)),
            SpecialPoint::Y(m) => {
                let mut w = vec![0u8; m];
                w[m - 1] = 0; // F_0^m q_1
                Ok(Vertex::new(w, 1))
            }
            SpecialPoint::Z(0) | SpecialPoint::X(0) => Err(Error::Domain(
                "x:0 and z:0 are undefined (indices start at 1)".into(),
            )),
            SpecialPoint::Z(m) => Ok(SpecialPoint::Y(m).vertex()?.reflect()),
            SpecialPoint::X(m) => {
                // F_0^{m-1} F_2 q_1
                let mut w = vec![0u8; m];
                w[m - 1] = 2;
                Ok(Vertex::new(w, 1))
            }
        }
    }
}

/// Convenience constructors for the named points (panic on index 0 where
/// undefined; the fallible route is [`SpecialPoint::vertex`]).
pub fn x_point(m: usize) -> Vertex {
    SpecialPoint::X(m).vertex().expect("x_m needs m ≥ 1")
}
pub fn y_point(m: usize) -> Vertex {
    SpecialPoint::Y(m).vertex().expect("y_m is defined for m ≥ 0")
}
pub fn z_point(m: usize) -> Vertex {
    SpecialPoint::Z(m).vertex().expect("z_m needs m ≥ 1")
}
pub fn q_point(j: u8) -> Vertex {
    Vertex::corner_point(j)
}

/// Which vertex set a graph covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphDomain {
    /// All of V_m.
    Full,
    /// V_m restricted to the closed left half (left side + axis).
    LeftHalf,
}

/// The level-m graph Γ_m (or its left-half restriction): vertices,
/// adjacency, and the list of constituent cells.
#[derive(Debug, Clone)]
pub struct LevelGraph {
    level: usize,
    domain: GraphDomain,
    verts: Vec<Vertex>,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    /// Cells fully contained in the domain, as (word, corner indices).
    cells: Vec<(Word, [usize; 3])>,
}

impl LevelGraph {
    /// Build Γ_m for the whole gasket.
    pub fn build(level: usize) -> Result<Self> {
        Self::build_in(level, GraphDomain::Full)
    }

    /// Build Γ_m restricted to the closed left half. Edges crossing the
    /// axis (the two apex-cell edges touching the mirror side) are dropped
    /// with the mirror vertices.
    pub fn build_left_half(level: usize) -> Result<Self> {
        Self::build_in(level, GraphDomain::LeftHalf)
    }

    fn build_in(level: usize, domain: GraphDomain) -> Result<Self> {
        // 3^level cells; keep well inside addressable range.
        if level > 16 {
            return Err(Error::LevelCap {
                requested: level,
                max: 16,
            });
        }
        let ncells = 3usize.pow(level as u32);
        let keep = |v: &Vertex| domain == GraphDomain::Full || v.side() != Side::Right;

        let mut vert_set: BTreeSet<Vertex> = BTreeSet::new();
        let mut word = vec![0u8; level];
        for i in 0..ncells {
            let mut n = i;
            for d in word.iter_mut() {
                *d = (n % 3) as u8;
                n /= 3;
            }
            for j in 0..3u8 {
                let v = Vertex::new(word.clone(), j);
                if keep(&v) {
                    vert_set.insert(v);
                }
            }
        }
        let verts: Vec<Vertex> = vert_set.into_iter().collect();
        let index = |v: &Vertex| verts.binary_search(v).ok();

        let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut cells: Vec<(Word, [usize; 3])> = Vec::new();
        let mut word = vec![0u8; level];
        for i in 0..ncells {
            let mut n = i;
            for d in word.iter_mut() {
                *d = (n % 3) as u8;
                n /= 3;
            }
            let ids: Vec<Option<usize>> = (0..3u8)
                .map(|j| index(&Vertex::new(word.clone(), j)))
                .collect();
            for a in 0..3 {
                for b in (a + 1)..3 {
                    if let (Some(u), Some(v)) = (ids[a], ids[b]) {
                        edge_set.insert((u.min(v), u.max(v)));
                    }
                }
            }
            if let (Some(c0), Some(c1), Some(c2)) = (ids[0], ids[1], ids[2]) {
                cells.push((word.clone(), [c0, c1, c2]));
            }
        }
        cells.sort_by(|a, b| a.0.cmp(&b.0));
        let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
        let mut adj = vec![Vec::new(); verts.len()];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        Ok(LevelGraph {
            level,
            domain,
            verts,
            adj,
            edges,
            cells,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn domain(&self) -> GraphDomain {
        self.domain
    }

    /// Vertices in canonical (sorted) order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.verts
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.verts[i]
    }

    /// Index of a vertex in this graph, if present.
    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.verts.binary_search(v).ok()
    }

    /// Edge list with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Cells fully contained in the domain: (word, the 3 corner indices).
    /// For the left half this excludes the all-0 apex cell, which
    /// straddles the axis.
    pub fn cells(&self) -> &[(Word, [usize; 3])] {
        &self.cells
    }

    /// Vertex count formula check helper: (3^{m+1} + 3)/2 for the full
    /// graph.
    pub fn expected_vertex_count(level: usize) -> usize {
        (3usize.pow(level as u32 + 1) + 3) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization_is_idempotent_and_merges_aliases() {
        // Junction aliases F_{w'a} q_b = F_{w'b} q_a.
        let a = Vertex::new(vec![0, 1], 2);
        let b = Vertex::new(vec![0, 2], 1);
        assert_eq!(a, b);
        // Trailing repeats collapse: F_{w j} q_j = F_w q_j.
        let c = Vertex::new(vec![0, 1, 1, 1], 1);
        let d = Vertex::new(vec![0], 1);
        assert_eq!(c, d);
        // Mixed: strip then swap.
        let e = Vertex::new(vec![1, 0], 0);
        assert_eq!(e, y_point(1));
    }

    #[test]
    fn special_points_have_expected_addresses() {
        assert_eq!(y_point(0), q_point(1));
        assert_eq!(y_point(2).word(), &[0, 0]);
        assert_eq!(y_point(2).corner(), 1);
        assert_eq!(x_point(1), Vertex::new(vec![2], 1));
        assert_eq!(x_point(3).word(), &[0, 0, 1]);
        assert_eq!(x_point(3).corner(), 2);
        assert_eq!(z_point(2).word(), &[0, 0]);
        assert_eq!(z_point(2).corner(), 2);
        assert!(SpecialPoint::X(0).vertex().is_err());
        assert!(SpecialPoint::Z(0).vertex().is_err());
        assert_eq!(SpecialPoint::Y(0).vertex().unwrap(), q_point(1));
    }

    #[test]
    fn reflection_is_involutive_and_fixes_the_axis() {
        for m in 1..=4 {
            assert_eq!(y_point(m).reflect(), z_point(m));
            assert_eq!(z_point(m).reflect(), y_point(m));
            assert_eq!(x_point(m).reflect(), x_point(m));
            assert_eq!(x_point(m).side(), Side::Axis);
            assert_eq!(y_point(m).side(), Side::Left);
            assert_eq!(z_point(m).side(), Side::Right);
        }
        assert_eq!(q_point(0).side(), Side::Axis);
        assert_eq!(q_point(1).side(), Side::Left);
        assert_eq!(q_point(2).side(), Side::Right);
        let g = LevelGraph::build(3).unwrap();
        for v in g.vertices() {
            assert_eq!(v.reflect().reflect(), *v);
        }
    }

    #[test]
    fn reflection_fixed_set_is_apex_plus_axis_points() {
        for m in 0..=4 {
            let g = LevelGraph::build(m).unwrap();
            let fixed: Vec<&Vertex> = g
                .vertices()
                .iter()
                .filter(|v| v.reflect() == **v)
                .collect();
            assert_eq!(fixed.len(), m + 1, "level {m}");
            assert!(fixed.contains(&&q_point(0)));
            for k in 1..=m {
                assert!(fixed.contains(&&x_point(k)));
            }
        }
    }

    #[test]
    fn graph_counts_and_degrees() {
        for m in 0..=5 {
            let g = LevelGraph::build(m).unwrap();
            assert_eq!(g.vertices().len(), LevelGraph::expected_vertex_count(m));
            assert_eq!(g.edges().len(), 3usize.pow(m as u32 + 1));
            assert_eq!(g.cells().len(), 3usize.pow(m as u32));
            for (i, v) in g.vertices().iter().enumerate() {
                let want = if v.is_boundary() { 2 } else { 4 };
                assert_eq!(g.degree(i), want, "vertex {v} at level {m}");
            }
        }
    }

    #[test]
    fn left_half_graph_structure() {
        let m = 4;
        let g = LevelGraph::build_left_half(m).unwrap();
        // Mirror count: (|V_m| - (m+1)) / 2 strictly-left plus m+1 axis.
        let full = LevelGraph::expected_vertex_count(m);
        assert_eq!(g.vertices().len(), (full - (m + 1)) / 2 + (m + 1));
        // q_0 keeps only its left edge.
        let q0 = g.index_of(&q_point(0)).unwrap();
        assert_eq!(g.degree(q0), 1);
        assert_eq!(g.vertex(g.neighbors(q0)[0]), &y_point(m));
        // Every non-pinned interior vertex keeps full degree 4.
        for (i, v) in g.vertices().iter().enumerate() {
            if v.side() == Side::Left && *v != q_point(1) && *v != y_point(m) {
                assert_eq!(g.degree(i), 4, "vertex {v}");
            }
        }
        // Cells: exactly those with first non-0 digit 1 (no apex cell).
        for (w, _) in g.cells() {
            let first = w.iter().find(|&&d| d != 0);
            assert_eq!(first, Some(&1), "cell {}", word_to_string(w));
        }
    }

    #[test]
    fn cell_corners_of_left_generation_cells() {
        // Cell 0^{m-1} 1 has corners {y_m, y_{m-1}, x_m} (as corner 0,1,2).
        let g = LevelGraph::build(3).unwrap();
        for m in 1..=3usize {
            let mut w = vec![0u8; m - 1];
            w.push(1);
            w.resize(3, 1); // descend to level 3 along corner 1: same corner point set at the top cell…
            let _ = w;
        }
        // Check directly at the cell's own level via Vertex::new.
        for m in 1..=4usize {
            let mut w = vec![0u8; m - 1];
            w.push(1);
            assert_eq!(Vertex::new(w.clone(), 0), y_point(m));
            assert_eq!(Vertex::new(w.clone(), 1), y_point(m - 1));
            assert_eq!(Vertex::new(w.clone(), 2), x_point(m));
        }
        let _ = g;
    }

    #[test]
    fn vertex_parsing_round_trips() {
        for s in ["x:3", "y:0", "z:2", "q:0", "01:2", ":1"] {
            let v: Vertex = s.parse().unwrap();
            let canon = v.to_string();
            let w: Vertex = canon.parse().unwrap();
            assert_eq!(v, w);
        }
        assert_eq!("x:1".parse::<Vertex>().unwrap(), x_point(1));
        assert_eq!("y:0".parse::<Vertex>().unwrap(), q_point(1));
        assert!("x:0".parse::<Vertex>().is_err());
        assert!("03:1".parse::<Vertex>().is_err());
        assert!("01:7".parse::<Vertex>().is_err());
        assert!("bogus".parse::<Vertex>().is_err());
    }
}
