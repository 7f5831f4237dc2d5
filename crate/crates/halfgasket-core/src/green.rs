//! Green's functions on the gasket and its left half, the Poisson solver,
//! and the flux-from-source formula on the bisection line.
//!
//! The Dirichlet Green's function is the terminating spline series
//!
//! ```text
//! G(x, y) = Σ_{k≥1} Σ_{s,s'∈V_k∖V_{k−1}} g(s,s') ψ_s^k(x) ψ_{s'}^k(y),
//! g(s,s') = (3/10)(3/5)^k  (s = s'),   (1/10)(3/5)^k  (s ≠ s' sharing a
//!                                       level-(k−1) parent cell),
//! ```
//!
//! where `ψ_s^k` is the level-`k` spline equal to `δ_s` on `V_k`. Terms of
//! level `k > level(x)` vanish at `x`, so at lattice points the series is
//! a finite, exact sum. The half-domain kernel is the odd reflection
//! `G_Ω(x,y) = G(x,y) − G(x, Ry)`.
//!
//! Along the axis the kernel collapses to combinations of the splines at
//! the apex-cell midpoints `x_m`, `y_m`, `z_m`; those combinations
//! (`Ψ_m(a,b,c) = a·ψ_{x_m} + b·ψ_{y_m} + c·ψ_{z_m}`) drive the closed
//! forms and the flux formula, so they get a dedicated type.

use crate::error::{Error, Result};
use crate::gasket::{x_point, z_point, GraphDomain, LevelGraph, Side, Vertex, Word};
use crate::harmonic::{eval_local, CellFn, VertexFn};
use crate::scalar::Scalar;

/// The level-`level` cells whose closure contains the point `v` — one
/// word if `v` lies strictly inside a cell, two if it is a lattice point
/// on the seam between siblings, one again at the three outer corners.
fn cells_meeting(v: &Vertex, level: usize) -> Vec<Word> {
    let j = v.level();
    if j > level {
        return vec![v.word()[..level].to_vec()];
    }
    let mut first = v.word().to_vec();
    first.resize(level, v.corner());
    if j == 0 {
        return vec![first];
    }
    let mut second = v.word()[..j - 1].to_vec();
    second.push(v.corner());
    second.resize(level, v.word()[j - 1]);
    vec![first, second]
}

/// The midpoint of the edge opposite corner `i` in the cell `parent`
/// (one of the three points of `V_{|parent|+1} ∖ V_{|parent|}` born
/// inside that cell).
fn midpoint_vertex(parent: &[u8], i: u8) -> Vertex {
    let mut others = [0u8, 1, 2].into_iter().filter(|&j| j != i);
    let a = others.next().unwrap();
    let b = others.next().unwrap();
    let mut word = parent.to_vec();
    word.push(a);
    Vertex::new(word, b)
}

/// Value at `v` of the level-`|parent|+1` spline that is 1 at the
/// midpoint opposite corner `i` of `parent` and 0 at every other point
/// of its level's lattice. Supported inside `parent`.
fn midpoint_spline_value<S: Scalar>(parent: &[u8], i: u8, v: &Vertex) -> S {
    let k = parent.len() + 1;
    let j = v.level();
    if j < k {
        // v lies on a coarser lattice, where the spline vanishes.
        return S::zero();
    }
    if j == k {
        return if *v == midpoint_vertex(parent, i) {
            S::one()
        } else {
            S::zero()
        };
    }
    // v sits strictly inside a unique level-k cell: its word prefix.
    let w = v.word();
    if w[..k - 1] != *parent {
        return S::zero();
    }
    let d = w[k - 1];
    if d == i {
        // The sub-cell opposite the midpoint has all-zero corner data.
        return S::zero();
    }
    let mut data = [S::zero(), S::zero(), S::zero()];
    data[(3 - d - i) as usize] = S::one();
    eval_local(&data, &w[k..], v.corner())
}

/// Exact integral over the cell `cell` of (harmonic function with the
/// given corner `data` on that cell) × (piecewise-constant `f`). Uses the
/// corner-mean rule on the refinement to `level = max(|cell|, f.level())`,
/// where both factors are resolved.
fn harmonic_patch_integral<S: Scalar>(cell: &[u8], data: &[S; 3], f: &CellFn<S>) -> Result<S> {
    let depth = f.level().saturating_sub(cell.len());
    let mut acc = S::zero();
    let mut suffix = vec![0u8; depth];
    let mut word = cell.to_vec();
    word.extend_from_slice(&suffix);
    for n in 0..3usize.pow(depth as u32) {
        let mut rem = n;
        for (pos, digit) in suffix.iter_mut().enumerate().rev() {
            *digit = (rem % 3) as u8;
            word[cell.len() + pos] = *digit;
            rem /= 3;
        }
        let mut corner_sum = S::zero();
        for corner in 0..3u8 {
            corner_sum += eval_local(data, &suffix, corner);
        }
        acc += f.value_at_word(&word)?.clone() * corner_sum;
    }
    let level = cell.len() + depth;
    Ok(acc * S::ratio(1, 3).pow_i((level + 1) as i32))
}

/// `Ψ_m(a, b, c) = a·ψ_{x_m} + b·ψ_{y_m} + c·ψ_{z_m}`: the span of the
/// three midpoint splines of the apex cell `[0^{m−1}]`, which is also the
/// combination's support.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiCombo<S> {
    m: usize,
    coeffs: [S; 3],
}

impl<S: Scalar> PsiCombo<S> {
    pub fn new(m: usize, a: S, b: S, c: S) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain(
                "the axis midpoint combination needs m ≥ 1".into(),
            ));
        }
        Ok(PsiCombo { m, coeffs: [a, b, c] })
    }

    pub fn level(&self) -> usize {
        self.m
    }

    /// Corner data of the combination on sub-cell `d` of the apex cell:
    /// the parent corner carries 0, each other corner carries the weight
    /// of the midpoint sitting there. (`x_m`, `y_m`, `z_m` are the
    /// midpoints opposite corners 0, 2, 1 respectively.)
    fn subcell_data(&self, d: u8) -> [S; 3] {
        let [a, b, c] = self.coeffs.clone();
        match d {
            0 => [S::zero(), b, c],
            1 => [b, S::zero(), a],
            _ => [c, a, S::zero()],
        }
    }

    pub fn eval(&self, v: &Vertex) -> S {
        let parent = vec![0u8; self.m - 1];
        let [a, b, c] = self.coeffs.clone();
        a * midpoint_spline_value(&parent, 0, v)
            + b * midpoint_spline_value(&parent, 2, v)
            + c * midpoint_spline_value(&parent, 1, v)
    }

    /// Exact `∫ Ψ_m(a,b,c) · f dμ` for piecewise-constant full-domain `f`.
    pub fn integrate_against(&self, f: &CellFn<S>) -> Result<S> {
        let mut acc = S::zero();
        let mut cell = vec![0u8; self.m];
        for d in 0..3u8 {
            cell[self.m - 1] = d;
            acc += harmonic_patch_integral(&cell, &self.subcell_data(d), f)?;
        }
        Ok(acc)
    }

    /// `(|a|+|b|+|c|)·2/3^{m+1}`, an upper bound for `∫ |Ψ_m| dμ` (each
    /// spline is nonnegative with integral `2/3^{m+1}`).
    pub fn abs_integral_bound(&self) -> S {
        let [a, b, c] = self.coeffs.clone();
        (a.abs() + b.abs() + c.abs()) * S::from_i64(2) * S::ratio(1, 3).pow_i((self.m + 1) as i32)
    }
}

/// How to evaluate the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenMode {
    /// Partial sum `G_M`: exact once `M ≥ level(x)` (or `level(y)`).
    Series(usize),
    /// Closed form at `x = x_m` (first argument must be an axis midpoint).
    ClosedX,
    /// Closed form at `x = z_m` (first argument must be a right outer
    /// boundary point).
    ClosedZ,
}

/// Partial series `G_M(x, y)`, grouped by the (at most two) parent cells
/// shared by `x` and `y` at each level — the only cells whose midpoint
/// splines are nonzero at both arguments.
pub fn green_series<S: Scalar>(x: &Vertex, y: &Vertex, terms: usize) -> S {
    let mut total = S::zero();
    for k in 1..=terms {
        let wx = cells_meeting(x, k - 1);
        let wy = cells_meeting(y, k - 1);
        for w in &wx {
            if !wy.contains(w) {
                continue;
            }
            let sx: Vec<S> = (0..3u8).map(|i| midpoint_spline_value(w, i, x)).collect();
            let sy: Vec<S> = (0..3u8).map(|i| midpoint_spline_value(w, i, y)).collect();
            let dot = sx
                .iter()
                .zip(&sy)
                .map(|(p, q)| p.clone() * q.clone())
                .fold(S::zero(), |s, v| s + v);
            let sum_x = sx.iter().fold(S::zero(), |s, v| s + v.clone());
            let sum_y = sy.iter().fold(S::zero(), |s, v| s + v.clone());
            total += S::ratio(3, 5).pow_i(k as i32)
                * S::ratio(1, 10)
                * (S::from_i64(2) * dot + sum_x * sum_y);
        }
    }
    total
}

/// Closed form for `G(x_m, y)`:
/// `(2/15)(3/5)^m Σ_{k=1}^m Ψ_k(1,2,2)(y) + (1/6)(3/5)^m Ψ_m(1,−1,−1)(y)`.
pub fn green_closed_x<S: Scalar>(m: usize, y: &Vertex) -> Result<S> {
    if m == 0 {
        return Err(Error::Domain("axis midpoints start at m = 1".into()));
    }
    let mut sum = S::zero();
    for k in 1..=m {
        sum += PsiCombo::new(k, S::one(), S::from_i64(2), S::from_i64(2))?.eval(y);
    }
    let tip = PsiCombo::new(m, S::one(), S::from_i64(-1), S::from_i64(-1))?.eval(y);
    Ok(S::ratio(3, 5).pow_i(m as i32) * (S::ratio(2, 15) * sum + S::ratio(1, 6) * tip))
}

/// Closed form for `G(z_m, y)`:
/// `(1/10)(3/5)^m Σ_{k=1}^m Ψ_k(1,2,2)(y) + (1/10)5^{−m} Σ_{k=1}^m 3^k Ψ_k(0,−1,1)(y)`.
pub fn green_closed_z<S: Scalar>(m: usize, y: &Vertex) -> Result<S> {
    if m == 0 {
        return Err(Error::Domain("outer midpoints start at m = 1".into()));
    }
    let mut even = S::zero();
    let mut odd = S::zero();
    for k in 1..=m {
        even += PsiCombo::new(k, S::one(), S::from_i64(2), S::from_i64(2))?.eval(y);
        odd += S::from_i64(3).pow_i(k as i32)
            * PsiCombo::new(k, S::zero(), S::from_i64(-1), S::one())?.eval(y);
    }
    Ok(S::ratio(1, 10) * S::ratio(3, 5).pow_i(m as i32) * even
        + S::ratio(1, 10) * S::ratio(1, 5).pow_i(m as i32) * odd)
}

/// Kernel evaluation in the requested mode. Closed modes demand that `x`
/// actually is the corresponding special point.
pub fn green_eval<S: Scalar>(x: &Vertex, y: &Vertex, mode: GreenMode) -> Result<S> {
    match mode {
        GreenMode::Series(terms) => Ok(green_series(x, y, terms)),
        GreenMode::ClosedX => {
            let m = x.level();
            if m == 0 || *x != x_point(m) {
                return Err(Error::Domain(format!(
                    "closed axis form needs an axis midpoint, got {x}"
                )));
            }
            green_closed_x(m, y)
        }
        GreenMode::ClosedZ => {
            let m = x.level();
            if m == 0 || *x != z_point(m) {
                return Err(Error::Domain(format!(
                    "closed outer form needs a right outer midpoint, got {x}"
                )));
            }
            green_closed_z(m, y)
        }
    }
}

/// Half-domain kernel `G_Ω(x, y) = G(x, y) − G(x, Ry)` for arguments in
/// the closed left half. Vanishes whenever either argument lies on the
/// line of symmetry or at a pinned corner.
pub fn green_omega<S: Scalar>(x: &Vertex, y: &Vertex, terms: usize) -> Result<S> {
    if x.side() == Side::Right || y.side() == Side::Right {
        return Err(Error::Domain(format!(
            "half-domain kernel needs both arguments in the closed left half, got ({x}, {y})"
        )));
    }
    Ok(green_series::<S>(x, y, terms) - green_series::<S>(x, &y.reflect(), terms))
}

fn reflect_word(w: &[u8]) -> Word {
    w.iter()
        .map(|&d| match d {
            1 => 2,
            2 => 1,
            _ => 0,
        })
        .collect()
}

/// Solve `−Δu = f`, `u = 0` on the Dirichlet boundary, returning `u` on
/// the vertices of `graph`. The source is piecewise constant per cell of
/// its own (coarser or equal) level.
///
/// Full domain: `u(x) = ∫ G(x,·) f dμ`, evaluated through the spline
/// series — exact at lattice points because the series terminates there.
/// Left half: the source (given on the lateral cells of a left-half
/// graph) is extended oddly across the axis and the full-domain kernel
/// is used; `G_Ω = G − G∘R` makes this the half-domain solution. Note
/// the left-half cell list stops at the graph's level, so the apex
/// neighborhood `∪_{m>level} Y_m` lies outside the source's support.
pub fn solve_poisson<S: Scalar>(f: &CellFn<S>, graph: &LevelGraph) -> Result<VertexFn<S>> {
    if f.level() > graph.level() {
        return Err(Error::Domain(format!(
            "source lives on level-{} cells, finer than the level-{} graph",
            f.level(),
            graph.level()
        )));
    }
    if f.domain() != graph.domain() {
        return Err(Error::Domain(
            "source and graph must cover the same domain".into(),
        ));
    }
    let source = match graph.domain() {
        GraphDomain::Full => f.clone(),
        GraphDomain::LeftHalf => {
            // Odd extension: f on its own cells, −f∘R on their mirrors,
            // zero on the straddling apex cell.
            let half = LevelGraph::build_left_half(f.level())?;
            let full = LevelGraph::build(f.level())?;
            let mut values = vec![S::zero(); full.cells().len()];
            for ((w, _), v) in half.cells().iter().zip(f.values()) {
                let mut idx = 0usize;
                let mut ridx = 0usize;
                for (&d, &r) in w.iter().zip(&reflect_word(w)) {
                    idx = idx * 3 + d as usize;
                    ridx = ridx * 3 + r as usize;
                }
                values[idx] = v.clone();
                values[ridx] = -v.clone();
            }
            CellFn::from_values(&full, values)?
        }
    };

    // Per level k and parent cell w: the integrals I_i = ∫ ψ_{m_i} f dμ of
    // the three midpoint splines, combined with the g-weights into
    // J_i = (3/5)^k (1/10)(2 I_i + I_0 + I_1 + I_2).
    let m = graph.level();
    let mut weights: Vec<Vec<[S; 3]>> = Vec::with_capacity(m);
    let mut parent = Vec::new();
    for k in 1..=m {
        let nparents = 3usize.pow((k - 1) as u32);
        let mut level_weights = Vec::with_capacity(nparents);
        for p in 0..nparents {
            parent.clear();
            parent.resize(k - 1, 0);
            let mut rem = p;
            for digit in parent.iter_mut().rev() {
                *digit = (rem % 3) as u8;
                rem /= 3;
            }
            let mut ints = [S::zero(), S::zero(), S::zero()];
            let mut cell = parent.clone();
            cell.push(0);
            for (i, slot) in ints.iter_mut().enumerate() {
                // ψ_{m_i} is 1 at one corner of each adjacent sub-cell.
                let mut total = S::zero();
                for d in 0..3u8 {
                    if d == i as u8 {
                        continue;
                    }
                    cell[k - 1] = d;
                    let mut data = [S::zero(), S::zero(), S::zero()];
                    data[(3 - d - i as u8) as usize] = S::one();
                    total += harmonic_patch_integral(&cell, &data, &source)?;
                }
                *slot = total;
            }
            let sum = ints[0].clone() + ints[1].clone() + ints[2].clone();
            let scale = S::ratio(3, 5).pow_i(k as i32) * S::ratio(1, 10);
            level_weights.push([
                scale.clone() * (S::from_i64(2) * ints[0].clone() + sum.clone()),
                scale.clone() * (S::from_i64(2) * ints[1].clone() + sum.clone()),
                scale * (S::from_i64(2) * ints[2].clone() + sum),
            ]);
        }
        weights.push(level_weights);
    }

    let values = graph
        .vertices()
        .iter()
        .map(|x| {
            let mut u = S::zero();
            for k in 1..=m {
                for w in cells_meeting(x, k - 1) {
                    let mut rank = 0usize;
                    for &d in &w {
                        rank = rank * 3 + d as usize;
                    }
                    let jw = &weights[k - 1][rank];
                    for i in 0..3u8 {
                        let s = midpoint_spline_value::<S>(&w, i, x);
                        if !s.is_zero() {
                            u += s * jw[i as usize].clone();
                        }
                    }
                }
            }
            u
        })
        .collect();
    VertexFn::from_values(graph, values)
}

/// Outward normal derivative of the lateral cell `Y_m` at the axis point
/// `x_m`, computed from the cell-wise Laplacian of a function vanishing
/// on the three outer corners:
///
/// ```text
/// η_m = −(3/5) 3^{−m} Σ_{k=1}^m 3^k ∫ Ψ_k(0,−1,1) Δu dμ
///     + (1/2) ∫ Ψ_m(1,−1,1) Δu dμ − φ_m,
/// φ_m = ∫_{Z_m} ψ_{x_m} Δu dμ,
/// ```
///
/// all three integrals exact for piecewise-constant `Δu`, with
/// `|φ_m| ≤ ‖Δu‖_∞ · 2/3^{m+1}`.
pub fn flux_via_green<S: Scalar>(
    laplacian: &CellFn<S>,
    boundary: &[S; 3],
    m: usize,
) -> Result<S> {
    if boundary.iter().any(|v| !v.is_zero()) {
        return Err(Error::Domain(
            "flux-from-source needs a function vanishing at the three outer corners".into(),
        ));
    }
    if m == 0 {
        return Err(Error::Domain("axis points start at m = 1".into()));
    }
    let mut sum = S::zero();
    for k in 1..=m {
        sum += S::from_i64(3).pow_i(k as i32)
            * PsiCombo::new(k, S::zero(), S::from_i64(-1), S::one())?
                .integrate_against(laplacian)?;
    }
    let mid = PsiCombo::new(m, S::one(), S::from_i64(-1), S::one())?
        .integrate_against(laplacian)?;
    let phi = phi_correction(laplacian, m)?;
    Ok(S::ratio(-3, 5) * S::ratio(1, 3).pow_i(m as i32) * sum + S::ratio(1, 2) * mid - phi)
}

/// The mirror-cell correction `φ_m = ∫_{Z_m} ψ_{x_m} Δu dμ` (the only
/// part of the flux formula seeing `Δu` on the right half).
pub fn phi_correction<S: Scalar>(laplacian: &CellFn<S>, m: usize) -> Result<S> {
    if m == 0 {
        return Err(Error::Domain("axis points start at m = 1".into()));
    }
    // Z_m is the sub-cell [0^{m−1} 2]; ψ_{x_m} restricted there is the
    // harmonic function with value 1 at corner 1 (= x_m).
    let mut cell = vec![0u8; m];
    cell[m - 1] = 2;
    harmonic_patch_integral(&cell, &[S::zero(), S::one(), S::zero()], laplacian)
}
