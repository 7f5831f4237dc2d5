//! Piecewise-harmonic machinery on the gasket: the 1/5–2/5 extension
//! rule, harmonic patches, graph energy and Laplacian forms, normal
//! derivatives, splines, cell-wise data, and self-similar quadrature.

use crate::error::{Error, Result};
use crate::gasket::{GraphDomain, LevelGraph, Side, Vertex, Word};
use crate::scalar::Scalar;

/// Anything evaluable at gasket vertices.
pub trait Eval<S: Scalar> {
    fn eval(&self, v: &Vertex) -> Result<S>;
}

/// One step of the harmonic extension rule. Given the corner values of a
/// cell, returns the corner values of its sub-cell with digit `d`: the
/// corner at `d` is kept, and the midpoint opposite corner `k` takes
/// `(c_k + 2 c_i + 2 c_j) / 5`.
pub fn descend<S: Scalar>(c: &[S; 3], d: u8) -> [S; 3] {
    let d = d as usize;
    let two = S::from_i64(2);
    let fifth = S::from_i64(5).recip();
    let mid = |j: usize| -> S {
        let k = 3 - d - j;
        (c[k].clone() + two.clone() * (c[d].clone() + c[j].clone())) * fifth.clone()
    };
    let pick = |j: usize| if j == d { c[d].clone() } else { mid(j) };
    [pick(0), pick(1), pick(2)]
}

/// Evaluate the harmonic function with corner values `c` on the unit cell
/// at the relative address `(word, corner)`.
pub fn eval_local<S: Scalar>(c: &[S; 3], word: &[u8], corner: u8) -> S {
    let mut cur = c.clone();
    for &d in word {
        cur = descend(&cur, d);
    }
    cur[corner as usize].clone()
}

/// A harmonic function on one cell (the whole gasket when `word` is
/// empty), determined by its three corner values.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicFn<S> {
    word: Word,
    corners: [S; 3],
}

impl<S: Scalar> HarmonicFn<S> {
    /// Globally harmonic function with the given values at the three
    /// outer corners.
    pub fn global(corners: [S; 3]) -> Self {
        HarmonicFn { word: Vec::new(), corners }
    }

    /// Harmonic on the cell addressed by `word`.
    pub fn on_cell(word: Word, corners: [S; 3]) -> Self {
        HarmonicFn { word, corners }
    }

    pub fn corners(&self) -> &[S; 3] {
        &self.corners
    }

    pub fn cell_word(&self) -> &[u8] {
        &self.word
    }

    /// Energy of the patch: `(5/3)^ℓ Σ_{i<j} (c_i − c_j)²` for a cell of
    /// level ℓ. For harmonic functions the renormalized level-m graph
    /// energy is independent of m, so this is the exact Dirichlet energy.
    pub fn energy(&self) -> S {
        let c = &self.corners;
        let mut e = S::zero();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let d = c[i].clone() - c[j].clone();
                e += d.clone() * d;
            }
        }
        S::ratio(5, 3).pow_i(self.word.len() as i32) * e
    }

    /// Exact normal derivative at one of the patch corners,
    /// `(5/3)^ℓ (2 c_j − c_i − c_k)`; for harmonic functions the defining
    /// limit stabilizes at the cell's own level.
    pub fn normal_derivative(&self, corner: u8) -> S {
        let c = &self.corners;
        let j = corner as usize;
        let (i, k) = ((j + 1) % 3, (j + 2) % 3);
        let two = S::from_i64(2);
        S::ratio(5, 3).pow_i(self.word.len() as i32)
            * (two * c[j].clone() - c[i].clone() - c[k].clone())
    }
}

impl<S: Scalar> Eval<S> for HarmonicFn<S> {
    /// Evaluate at an absolute vertex address; the vertex must lie in the
    /// patch's cell.
    fn eval(&self, v: &Vertex) -> Result<S> {
        let level = v.level().max(self.word.len());
        let (addr, corner) = v.address_at(level)?;
        if addr[..self.word.len()] != self.word[..] {
            return Err(Error::Domain(format!(
                "vertex {v} lies outside the cell of this harmonic patch"
            )));
        }
        Ok(eval_local(&self.corners, &addr[self.word.len()..], corner))
    }
}

/// Values attached to every vertex of a level graph, in the graph's
/// vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFn<S> {
    level: usize,
    domain: GraphDomain,
    values: Vec<S>,
}

impl<S: Scalar> VertexFn<S> {
    pub fn from_values(graph: &LevelGraph, values: Vec<S>) -> Result<Self> {
        if values.len() != graph.vertices().len() {
            return Err(Error::Domain(format!(
                "expected {} vertex values, got {}",
                graph.vertices().len(),
                values.len()
            )));
        }
        Ok(VertexFn { level: graph.level(), domain: graph.domain(), values })
    }

    pub fn from_fn(graph: &LevelGraph, mut f: impl FnMut(&Vertex) -> Result<S>) -> Result<Self> {
        let values = graph.vertices().iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::from_values(graph, values)
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, graph: &LevelGraph, v: &Vertex) -> Result<S> {
        let i = graph
            .index_of(v)
            .ok_or_else(|| Error::Domain(format!("vertex {v} is not in the level-{} graph", self.level)))?;
        Ok(self.values[i].clone())
    }
}

/// Renormalized graph energy `(5/3)^m Σ_{edges} (u(x) − u(y))²`.
pub fn energy<S: Scalar>(graph: &LevelGraph, u: &[S]) -> S {
    energy_bilinear(graph, u, u)
}

/// Renormalized graph energy pairing
/// `(5/3)^m Σ_{edges} (u(x) − u(y)) (v(x) − v(y))`.
pub fn energy_bilinear<S: Scalar>(graph: &LevelGraph, u: &[S], v: &[S]) -> S {
    let mut acc = S::zero();
    for &(a, b) in graph.edges() {
        let du = u[a].clone() - u[b].clone();
        let dv = v[a].clone() - v[b].clone();
        acc += du * dv;
    }
    S::ratio(5, 3).pow_i(graph.level() as i32) * acc
}

/// Raw graph Laplacian `(Δ_m u)(x) = Σ_{y ~ x} (u(y) − u(x))` at every
/// vertex (boundary rows included). The analyst's Laplacian is the limit
/// of `(3/2)·5^m · Δ_m u` at interior vertices.
pub fn graph_laplacian_apply<S: Scalar>(graph: &LevelGraph, u: &[S]) -> Vec<S> {
    let n = graph.vertices().len();
    let mut out = vec![S::zero(); n];
    for (i, slot) in out.iter_mut().enumerate() {
        let deg = S::from_i64(graph.neighbors(i).len() as i64);
        let mut acc = S::zero();
        for &j in graph.neighbors(i) {
            acc += u[j].clone();
        }
        *slot = acc - deg * u[i].clone();
    }
    out
}

/// Level-m normal derivative of vertex data at one corner of one cell:
/// `(5/3)^m (2 u(p) − u(p₁) − u(p₂))` where p₁, p₂ are the cell's other
/// two corners. For harmonic data this equals the exact normal
/// derivative; in general it is the level-m term of the defining limit.
pub fn normal_derivative_cell<S: Scalar>(
    graph: &LevelGraph,
    u: &[S],
    cell: usize,
    corner: u8,
) -> Result<S> {
    let cells = graph.cells();
    let (_, corners) = cells
        .get(cell)
        .ok_or_else(|| Error::Domain(format!("cell index {cell} out of range")))?;
    let j = corner as usize;
    if j > 2 {
        return Err(Error::Domain("corner must be 0, 1, or 2".into()));
    }
    let p = corners[j];
    let (a, b) = (corners[(j + 1) % 3], corners[(j + 2) % 3]);
    let two = S::from_i64(2);
    Ok(S::ratio(5, 3).pow_i(graph.level() as i32)
        * (two * u[p].clone() - u[a].clone() - u[b].clone()))
}

/// Piecewise-harmonic spline: vertex data at level m, harmonic inside
/// each level-m cell. Evaluation below level m is a lookup; deeper
/// evaluation descends within the containing cell (full domain only,
/// since half-domain graphs omit the apex cell's right corner).
#[derive(Debug, Clone)]
pub struct Spline<S> {
    level: usize,
    domain: GraphDomain,
    values: Vec<S>,
}

impl<S: Scalar> Spline<S> {
    pub fn new(graph: &LevelGraph, values: Vec<S>) -> Result<Self> {
        let f = VertexFn::from_values(graph, values)?;
        Ok(Spline { level: f.level, domain: f.domain, values: f.values })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    fn graph(&self) -> Result<LevelGraph> {
        match self.domain {
            GraphDomain::Full => LevelGraph::build(self.level),
            GraphDomain::LeftHalf => LevelGraph::build_left_half(self.level),
        }
    }
}

impl<S: Scalar> Eval<S> for Spline<S> {
    fn eval(&self, v: &Vertex) -> Result<S> {
        let graph = self.graph()?;
        if let Some(i) = graph.index_of(v) {
            return Ok(self.values[i].clone());
        }
        if self.domain == GraphDomain::LeftHalf {
            if v.side() == Side::Right {
                return Err(Error::Domain(format!("vertex {v} lies in the right half")));
            }
            return Err(Error::Domain(format!(
                "half-domain spline evaluation below level {} requires a full-domain spline",
                self.level
            )));
        }
        let (addr, corner) = v.address_at(v.level().max(self.level))?;
        let (cell_word, rest) = addr.split_at(self.level);
        let mut corners = [S::zero(), S::zero(), S::zero()];
        for (j, slot) in corners.iter_mut().enumerate() {
            let cv = Vertex::new(cell_word.to_vec(), j as u8);
            *slot = self.values[graph.index_of(&cv).expect("cell corner in graph")].clone();
        }
        Ok(eval_local(&corners, rest, corner))
    }
}

/// One value per cell of a level graph (piecewise-constant data, e.g. a
/// Laplacian density sampled cell by cell).
#[derive(Debug, Clone, PartialEq)]
pub struct CellFn<S> {
    level: usize,
    domain: GraphDomain,
    values: Vec<S>,
}

impl<S: Scalar> CellFn<S> {
    pub fn from_values(graph: &LevelGraph, values: Vec<S>) -> Result<Self> {
        if values.len() != graph.cells().len() {
            return Err(Error::Domain(format!(
                "expected {} cell values, got {}",
                graph.cells().len(),
                values.len()
            )));
        }
        Ok(CellFn { level: graph.level(), domain: graph.domain(), values })
    }

    pub fn constant(graph: &LevelGraph, value: S) -> Self {
        CellFn {
            level: graph.level(),
            domain: graph.domain(),
            values: vec![value; graph.cells().len()],
        }
    }

    pub fn from_fn(graph: &LevelGraph, mut f: impl FnMut(&[u8]) -> S) -> Self {
        let values = graph.cells().iter().map(|(w, _)| f(w)).collect();
        CellFn { level: graph.level(), domain: graph.domain(), values }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn domain(&self) -> GraphDomain {
        self.domain
    }

    /// Value on the cell whose address starts with `word` (which must be
    /// at least `level` digits long — deeper words select the containing
    /// cell). Full-domain data only: full-graph cells are stored in
    /// lexicographic word order, so the index is the base-3 rank.
    pub fn value_at_word(&self, word: &[u8]) -> Result<&S> {
        if self.domain != GraphDomain::Full {
            return Err(Error::Domain(
                "word-addressed cell lookup requires full-domain data".into(),
            ));
        }
        if word.len() < self.level {
            return Err(Error::Domain(format!(
                "address has {} digits, data lives on level-{} cells",
                word.len(),
                self.level
            )));
        }
        let mut idx = 0usize;
        for &d in &word[..self.level] {
            idx = idx * 3 + d as usize;
        }
        Ok(&self.values[idx])
    }
}

/// Quadrature of vertex data against the self-similar measure: each
/// level-m cell carries measure 3^{−m} and contributes the mean of its
/// corner values. Exact for piecewise-harmonic splines of level ≤ m.
pub fn integrate<S: Scalar>(graph: &LevelGraph, u: &[S]) -> S {
    let mut acc = S::zero();
    for (_, corners) in graph.cells() {
        for &c in corners {
            acc += u[c].clone();
        }
    }
    S::ratio(1, 3).pow_i(graph.level() as i32 + 1) * acc
}

/// Quadrature of a product: vertex data `u` times cell-wise data `f`,
/// `Σ_cells 3^{−m} f_cell · mean(u at corners)`.
pub fn integrate_against<S: Scalar>(graph: &LevelGraph, u: &[S], f: &CellFn<S>) -> Result<S> {
    if f.level != graph.level() || f.domain != graph.domain() {
        return Err(Error::Domain("cell data does not match the graph".into()));
    }
    let mut acc = S::zero();
    for ((_, corners), fv) in graph.cells().iter().zip(&f.values) {
        let mut s = S::zero();
        for &c in corners {
            s += u[c].clone();
        }
        acc += fv.clone() * s;
    }
    Ok(S::ratio(1, 3).pow_i(graph.level() as i32 + 1) * acc)
}
