//! Rational wavevector frames and the two positive matrix decompositions:
//! symmetric matrices near the identity over rank-one directions k1 (x) k1,
//! and skew matrices near zero over k2 (x) k1 - k1 (x) k2.
//!
//! Everything here is exact rational arithmetic; floating point appears only
//! in the certified-radius and derivative-bound summaries.

use crate::error::{Error, Result};
use crate::rat::*;
use num_traits::{One, Signed, Zero};

pub type RVec = [Rat; 3];

pub fn rvec(v: [(i64, i64); 3]) -> RVec {
    [rat(v[0].0, v[0].1), rat(v[1].0, v[1].1), rat(v[2].0, v[2].1)]
}

pub fn dot(a: &RVec, b: &RVec) -> Rat {
    a[0].clone() * &b[0] + a[1].clone() * &b[1] + a[2].clone() * &b[2]
}

pub fn cross(a: &RVec, b: &RVec) -> RVec {
    [
        a[1].clone() * &b[2] - a[2].clone() * &b[1],
        a[2].clone() * &b[0] - a[0].clone() * &b[2],
        a[0].clone() * &b[1] - a[1].clone() * &b[0],
    ]
}

pub fn neg(a: &RVec) -> RVec {
    [-a[0].clone(), -a[1].clone(), -a[2].clone()]
}

pub fn to_f64_vec(a: &RVec) -> [f64; 3] {
    [rat_to_f64(&a[0]), rat_to_f64(&a[1]), rat_to_f64(&a[2])]
}

/// Orthonormal rational triad (k, k1, k2) with k2 = k x k1, integral at `scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFrame {
    pub k: RVec,
    pub k1: RVec,
    pub k2: RVec,
    pub scale: u32,
}

impl WaveFrame {
    pub fn new(k: RVec, k1: RVec, scale: u32) -> Result<Self> {
        let one = Rat::one();
        if dot(&k, &k) != one || dot(&k1, &k1) != one {
            return Err(Error::Invalid("frame vectors must be rational unit vectors".into()));
        }
        if !dot(&k, &k1).is_zero() {
            return Err(Error::Invalid("k and k1 must be orthogonal".into()));
        }
        let k2 = cross(&k, &k1);
        let f = WaveFrame { k, k1, k2, scale };
        f.check_integrality()?;
        Ok(f)
    }

    fn check_integrality(&self) -> Result<()> {
        let s = rat_int(self.scale as i64);
        for v in [&self.k, &self.k1, &self.k2] {
            for c in v {
                if !(c.clone() * &s).denom().is_one() {
                    return Err(Error::Invalid(format!(
                        "frame not integral at scale {}: component {}",
                        self.scale,
                        format_rat(c)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Deterministic completion: k1 is the unit rejection of the coordinate
    /// axis least aligned with k (exact only when that axis is orthogonal or
    /// the rejection length is a perfect rational square).
    pub fn complete(k: RVec, scale: u32) -> Result<Self> {
        let mut best = 0usize;
        let mut best_abs = k[0].abs();
        for j in 1..3 {
            let a = k[j].abs();
            if a < best_abs {
                best_abs = a;
                best = j;
            }
        }
        let mut e = [Rat::zero(), Rat::zero(), Rat::zero()];
        e[best] = Rat::one();
        let kd = dot(&k, &e);
        let mut r = [
            e[0].clone() - kd.clone() * &k[0],
            e[1].clone() - kd.clone() * &k[1],
            e[2].clone() - kd.clone() * &k[2],
        ];
        let len2 = dot(&r, &r);
        if !len2.is_one() {
            let inv_len = rat_pow_exact(&len2, &rat(-1, 2)).ok_or_else(|| {
                Error::Invalid(format!(
                    "no rational completion: rejection length^2 = {}",
                    format_rat(&len2)
                ))
            })?;
            for c in r.iter_mut() {
                *c *= &inv_len;
            }
        }
        WaveFrame::new(k, r, scale)
    }

    /// The sibling frame (k, k2, -k1) (right-handed swap of the transverse pair).
    pub fn swapped(&self) -> Self {
        WaveFrame {
            k: self.k.clone(),
            k1: self.k2.clone(),
            k2: neg(&self.k1),
            scale: self.scale,
        }
    }

    /// The frame of the opposite direction with the same transverse seed.
    pub fn direction_flipped(&self) -> Self {
        WaveFrame {
            k: neg(&self.k),
            k1: self.k1.clone(),
            k2: neg(&self.k2),
            scale: self.scale,
        }
    }
}

// ---------------------------------------------------------------------------
// exact linear algebra
// ---------------------------------------------------------------------------

/// Row-reduces [m | rhs...]; returns (rref matrix, rref rhs, pivot columns).
fn row_reduce(mut m: Vec<Vec<Rat>>, mut rhs: Vec<Vec<Rat>>) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>, Vec<usize>) {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        rhs.swap(r, p);
        let inv = m[r][c].clone().recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for v in rhs[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = m[r][j].clone() * &f;
                    m[i][j] -= t;
                }
                for j in 0..rhs[i].len() {
                    let t = rhs[r][j].clone() * &f;
                    rhs[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    (m, rhs, pivots)
}

/// Solves M x = b exactly (free variables set to zero); None when inconsistent.
pub fn solve_exact(m: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let rhs: Vec<Vec<Rat>> = b.iter().map(|v| vec![v.clone()]).collect();
    let cols = m[0].len();
    let (rm, rb, pivots) = row_reduce(m.to_vec(), rhs);
    // inconsistency: zero row with nonzero rhs
    for i in 0..rm.len() {
        if rm[i].iter().all(|v| v.is_zero()) && !rb[i][0].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rat::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = rb[row][0].clone();
    }
    Some(x)
}

/// Nullspace basis of M (exact).
pub fn nullspace(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let cols = m[0].len();
    let (rm, _, pivots) = row_reduce(m.to_vec(), vec![vec![]; m.len()]);
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -rm[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

fn rank(m: &[Vec<Rat>]) -> usize {
    let (_, _, pivots) = row_reduce(m.to_vec(), vec![vec![]; m.len()]);
    pivots.len()
}

// ---------------------------------------------------------------------------
// positive decompositions
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionKind {
    /// S = sum gamma_k^2(S) k1 (x) k1 for symmetric S near the identity.
    SymmetricNearId,
    /// A = sum gamma_k^2(A) (k2 (x) k1 - k1 (x) k2) for skew A near zero.
    SkewNearZero,
}

/// Positive coefficient functions gamma_k^2 = c_k + L_k(X), affine in the
/// deviation X from the center point, with an exactly certified positivity ball.
#[derive(Clone, Debug)]
pub struct GammaSolver {
    pub kind: DecompositionKind,
    pub frames: Vec<WaveFrame>,
    /// Center coefficients, strictly positive.
    pub c: Vec<Rat>,
    /// Linear corrections in ambient coordinates (6 for symmetric, 3 for skew).
    pub linear: Vec<Vec<Rat>>,
    /// True when the directions span the whole ambient matrix space.
    pub complete: bool,
    /// Certified Frobenius radius (10% safety margin already applied).
    pub radius: f64,
}

/// Symmetric vec coordinates [S00, S11, S22, S01, S02, S12].
fn sym_vec(m: &[[f64; 3]; 3]) -> [f64; 6] {
    [m[0][0], m[1][1], m[2][2], m[0][1], m[0][2], m[1][2]]
}

fn sym_vec_rat(k1: &RVec) -> Vec<Rat> {
    vec![
        k1[0].clone() * &k1[0],
        k1[1].clone() * &k1[1],
        k1[2].clone() * &k1[2],
        k1[0].clone() * &k1[1],
        k1[0].clone() * &k1[2],
        k1[1].clone() * &k1[2],
    ]
}

/// Axis coordinates of a skew matrix A = axis_x [e1]x + ...: a = (A21? ...)
/// with convention A = [[0,-a3,a2],[a3,0,-a1],[-a2,a1,0]].
fn skew_axis(m: &[[f64; 3]; 3]) -> [f64; 3] {
    [m[2][1], m[0][2], m[1][0]]
}

fn frobenius_linear_bound_sq(kind: DecompositionKind, row: &[Rat]) -> Rat {
    // |L(X)| <= sqrt(bound_sq) * ||X||_F with the class-aware pairing weights.
    match kind {
        DecompositionKind::SymmetricNearId => {
            let mut s = Rat::zero();
            for d in 0..3 {
                s += row[d].clone() * &row[d];
            }
            for o in 3..6 {
                s += row[o].clone() * &row[o] / rat_int(2);
            }
            s
        }
        DecompositionKind::SkewNearZero => {
            let mut s = Rat::zero();
            for d in 0..3 {
                s += row[d].clone() * &row[d] / rat_int(2);
            }
            s
        }
    }
}

fn positive_combination(
    mat: &[Vec<Rat>],
    center: &[Rat],
    particular: &[Rat],
    kernel: &[Vec<Rat>],
) -> Option<Vec<Rat>> {
    let m = particular.len();
    let all_pos = |v: &[Rat]| v.iter().all(|x| x.is_positive());
    if all_pos(particular) {
        return Some(particular.to_vec());
    }
    // uniform candidate c = t * (1,...,1): works for the symmetric shipped sets
    {
        let col_sum: Vec<Rat> = (0..mat.len())
            .map(|r| mat[r].iter().fold(Rat::zero(), |a, b| a + b))
            .collect();
        let mut t: Option<Rat> = None;
        let mut consistent = true;
        for r in 0..center.len() {
            if col_sum[r].is_zero() {
                if !center[r].is_zero() {
                    consistent = false;
                }
                continue;
            }
            let cand = center[r].clone() / &col_sum[r];
            match &t {
                None => t = Some(cand),
                Some(prev) if *prev == cand => {}
                _ => {
                    consistent = false;
                }
            }
        }
        if consistent {
            let t = t.unwrap_or_else(Rat::one);
            if t.is_positive() {
                return Some(vec![t; m]);
            }
        }
    }
    // search small rational multiples of up to three kernel directions
    let add = |base: &[Rat], coef: &Rat, dir: &[Rat]| -> Vec<Rat> {
        (0..m).map(|i| base[i].clone() + coef.clone() * &dir[i]).collect()
    };
    match kernel.len() {
        0 => None,
        1 => {
            for n in -96..=96 {
                let cand = add(particular, &rat(n, 4), &kernel[0]);
                if all_pos(&cand) {
                    return Some(cand);
                }
            }
            None
        }
        2 => {
            for na in -24..=24 {
                let base = add(particular, &rat(na, 4), &kernel[0]);
                for nb in -24..=24 {
                    let cand = add(&base, &rat(nb, 4), &kernel[1]);
                    if all_pos(&cand) {
                        return Some(cand);
                    }
                }
            }
            None
        }
        _ => {
            for na in -12..=12 {
                let base_a = add(particular, &rat(na, 2), &kernel[0]);
                for nb in -12..=12 {
                    let base_b = add(&base_a, &rat(nb, 2), &kernel[1]);
                    for nc in -12..=12 {
                        let cand = add(&base_b, &rat(nc, 2), &kernel[2]);
                        if all_pos(&cand) {
                            return Some(cand);
                        }
                    }
                }
            }
            None
        }
    }
}

fn build_solver(kind: DecompositionKind, frames: Vec<WaveFrame>) -> Result<GammaSolver> {
    let ambient = match kind {
        DecompositionKind::SymmetricNearId => 6,
        DecompositionKind::SkewNearZero => 3,
    };
    let m = frames.len();
    // columns of the direction matrix
    let cols: Vec<Vec<Rat>> = frames
        .iter()
        .map(|f| match kind {
            DecompositionKind::SymmetricNearId => sym_vec_rat(&f.k1),
            // k2 (x) k1 - k1 (x) k2 has axis k (right-handed frames)
            DecompositionKind::SkewNearZero => f.k.to_vec(),
        })
        .collect();
    let mat: Vec<Vec<Rat>> = (0..ambient)
        .map(|r| (0..m).map(|c| cols[c][r].clone()).collect())
        .collect();
    let complete = rank(&mat) == ambient;
    let center: Vec<Rat> = match kind {
        DecompositionKind::SymmetricNearId => {
            let mut v = vec![Rat::zero(); 6];
            v[0] = Rat::one();
            v[1] = Rat::one();
            v[2] = Rat::one();
            v
        }
        DecompositionKind::SkewNearZero => vec![Rat::zero(); 3],
    };
    let particular = solve_exact(&mat, &center).ok_or_else(|| {
        Error::DegenerateSpan("center matrix is not in the span of the directions".into())
    })?;
    let kernel = nullspace(&mat);
    let c = positive_combination(&mat, &center, &particular, &kernel).ok_or_else(|| {
        Error::NoPositiveKernel(
            "no strictly positive coefficient vector reproduces the center matrix".into(),
        )
    })?;
    // linear corrections: solve M L_x = e_r for each ambient coordinate r,
    // restricted to the column space (directions outside it are rejected at
    // evaluation time by the consistency check).
    let mut linear = vec![vec![Rat::zero(); ambient]; m];
    for r in 0..ambient {
        let mut e = vec![Rat::zero(); ambient];
        e[r] = Rat::one();
        if let Some(sol) = solve_exact(&mat, &e) {
            for (ki, row) in linear.iter_mut().enumerate() {
                row[r] = sol[ki].clone();
            }
        }
        // unsolvable coordinates stay zero; they are outside the reachable
        // subspace and the evaluator refuses inputs with mass there.
    }
    // certified radius: 0.9 * min_k c_k / ||L_k||  (Frobenius operator bound)
    let mut radius = f64::INFINITY;
    for k in 0..m {
        let g2 = frobenius_linear_bound_sq(kind, &linear[k]);
        if g2.is_zero() {
            continue;
        }
        let r = rat_to_f64(&c[k]) / rat_to_f64(&g2).sqrt();
        radius = radius.min(r);
    }
    if !radius.is_finite() {
        radius = 1.0;
    }
    radius *= 0.9;
    Ok(GammaSolver { kind, frames, c, linear, complete, radius })
}

fn search_frames(
    kind: DecompositionKind,
    base_frames: &[WaveFrame],
    variant: impl Fn(&WaveFrame) -> WaveFrame,
) -> Result<GammaSolver> {
    let m = base_frames.len();
    let mut best_incomplete: Option<GammaSolver> = None;
    let mut last_err = None;
    for mask in 0u32..(1 << m) {
        let frames: Vec<WaveFrame> = base_frames
            .iter()
            .enumerate()
            .map(|(i, f)| if mask & (1 << i) != 0 { variant(f) } else { f.clone() })
            .collect();
        match build_solver(kind, frames) {
            Ok(s) if s.complete => return Ok(s),
            Ok(s) => {
                if best_incomplete.is_none() {
                    best_incomplete = Some(s);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best_incomplete
        .ok_or_else(|| last_err.unwrap_or_else(|| Error::DegenerateSpan("empty frame set".into())))
}

/// Builds the symmetric decomposition, searching transverse swaps per frame
/// until the span and positivity certificates pass. A complete span is
/// preferred; an incomplete (subspace-restricted) solver is returned when no
/// swap combination spans all of Sym(3).
pub fn build_gamma_u(base_frames: &[WaveFrame]) -> Result<GammaSolver> {
    search_frames(DecompositionKind::SymmetricNearId, base_frames, WaveFrame::swapped)
}

/// Builds the skew decomposition, searching direction flips per frame until a
/// strictly positive kernel vector exists.
pub fn build_gamma_b(base_frames: &[WaveFrame]) -> Result<GammaSolver> {
    search_frames(DecompositionKind::SkewNearZero, base_frames, WaveFrame::direction_flipped)
}

impl GammaSolver {
    fn deviation(&self, m: &[[f64; 3]; 3]) -> Result<Vec<f64>> {
        match self.kind {
            DecompositionKind::SymmetricNearId => {
                let mut x = sym_vec(m);
                x[0] -= 1.0;
                x[1] -= 1.0;
                x[2] -= 1.0;
                // symmetry sanity
                let asym = (m[0][1] - m[1][0]).abs().max((m[0][2] - m[2][0]).abs())
                    .max((m[1][2] - m[2][1]).abs());
                if asym > 1e-9 {
                    return Err(Error::Invalid(format!("matrix not symmetric: {asym:.3e}")));
                }
                Ok(x.to_vec())
            }
            DecompositionKind::SkewNearZero => {
                let sym = (m[0][1] + m[1][0]).abs().max((m[0][2] + m[2][0]).abs())
                    .max((m[1][2] + m[2][1]).abs())
                    .max(m[0][0].abs().max(m[1][1].abs()).max(m[2][2].abs()));
                if sym > 1e-9 {
                    return Err(Error::Invalid(format!("matrix not skew: {sym:.3e}")));
                }
                Ok(skew_axis(m).to_vec())
            }
        }
    }

    fn frobenius_of_deviation(&self, x: &[f64]) -> f64 {
        match self.kind {
            DecompositionKind::SymmetricNearId => {
                (x[..3].iter().map(|v| v * v).sum::<f64>()
                    + 2.0 * x[3..].iter().map(|v| v * v).sum::<f64>())
                .sqrt()
            }
            DecompositionKind::SkewNearZero => {
                (2.0 * x.iter().map(|v| v * v).sum::<f64>()).sqrt()
            }
        }
    }

    /// Deviation-subspace consistency: the input must be reachable by the
    /// directions (relevant for deliberately incomplete toy sets).
    fn check_reachable(&self, x: &[f64], scale: f64) -> Result<()> {
        if self.complete {
            return Ok(());
        }
        // reconstruct from the would-be coefficients and compare
        let gam: Vec<f64> = (0..self.frames.len())
            .map(|k| {
                self.linear[k]
                    .iter()
                    .zip(x)
                    .map(|(w, v)| rat_to_f64(w) * v)
                    .sum::<f64>()
            })
            .collect();
        let rec = self.linear_combination(&gam);
        let dev = self.deviation_of_raw(&rec);
        let err = dev
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err > 1e-9 * scale.max(1.0) {
            return Err(Error::BallViolation(format!(
                "matrix leaves the reconstructible subspace of an incomplete direction set \
                 (residual {err:.3e})"
            )));
        }
        Ok(())
    }

    fn deviation_of_raw(&self, m: &[[f64; 3]; 3]) -> Vec<f64> {
        match self.kind {
            DecompositionKind::SymmetricNearId => sym_vec(m).to_vec(),
            DecompositionKind::SkewNearZero => skew_axis(m).to_vec(),
        }
    }

    /// gamma_k^2 at a matrix inside the certified ball.
    pub fn gamma_sq(&self, m: &[[f64; 3]; 3]) -> Result<Vec<f64>> {
        let x = self.deviation(m)?;
        let r = self.frobenius_of_deviation(&x);
        if r > self.radius {
            return Err(Error::BallViolation(format!(
                "Frobenius deviation {r:.6e} exceeds certified radius {:.6e}",
                self.radius
            )));
        }
        self.check_reachable(&x, r)?;
        let mut out = Vec::with_capacity(self.frames.len());
        for k in 0..self.frames.len() {
            let v = rat_to_f64(&self.c[k])
                + self.linear[k]
                    .iter()
                    .zip(&x)
                    .map(|(w, xv)| rat_to_f64(w) * xv)
                    .sum::<f64>();
            if v <= 0.0 {
                return Err(Error::BallViolation(format!(
                    "gamma^2 = {v:.3e} not positive inside the ball (certificate violated)"
                )));
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Exact-rational gamma_k^2 for a rational matrix deviation.
    pub fn gamma_sq_exact(&self, dev: &[Rat]) -> Vec<Rat> {
        (0..self.frames.len())
            .map(|k| {
                self.c[k].clone()
                    + self.linear[k]
                        .iter()
                        .zip(dev)
                        .map(|(w, x)| w.clone() * x)
                        .fold(Rat::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// sum_k w_k M_k with the solver's direction matrices.
    pub fn linear_combination(&self, w: &[f64]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (k, f) in self.frames.iter().enumerate() {
            match self.kind {
                DecompositionKind::SymmetricNearId => {
                    let k1 = to_f64_vec(&f.k1);
                    for a in 0..3 {
                        for b in 0..3 {
                            out[a][b] += w[k] * k1[a] * k1[b];
                        }
                    }
                }
                DecompositionKind::SkewNearZero => {
                    let k1 = to_f64_vec(&f.k1);
                    let k2 = to_f64_vec(&f.k2);
                    for a in 0..3 {
                        for b in 0..3 {
                            out[a][b] += w[k] * (k2[a] * k1[b] - k1[a] * k2[b]);
                        }
                    }
                }
            }
        }
        out
    }

    /// Reconstruction sum_k gamma_k^2(M) M_k; equals M on the certified ball.
    pub fn reconstruct(&self, m: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
        let g = self.gamma_sq(m)?;
        Ok(self.linear_combination(&g))
    }

    /// Upper bound for the sum of C^4 norms of gamma_k = sqrt(c_k + L_k(.))
    /// over the certified ball, from the affine structure and the positivity
    /// margin.
    pub fn derivative_bound(&self) -> f64 {
        let mut total = 0.0;
        for k in 0..self.frames.len() {
            let g = rat_to_f64(&frobenius_linear_bound_sq(self.kind, &self.linear[k])).sqrt();
            let c = rat_to_f64(&self.c[k]);
            let lo = (c - g * self.radius).max(1e-12);
            let hi = c + g * self.radius;
            let mut s = hi.sqrt(); // C^0 part
            s += g / (2.0 * lo.sqrt());
            s += g * g / (4.0 * lo.powf(1.5));
            s += 3.0 * g.powi(3) / (8.0 * lo.powf(2.5));
            s += 15.0 * g.powi(4) / (16.0 * lo.powf(3.5));
            total += s;
        }
        total
    }

    /// The C^0 part alone: sum_k max over the ball of |gamma_k|.
    pub fn c0_bound(&self) -> f64 {
        (0..self.frames.len())
            .map(|k| {
                let g =
                    rat_to_f64(&frobenius_linear_bound_sq(self.kind, &self.linear[k])).sqrt();
                (rat_to_f64(&self.c[k]) + g * self.radius).sqrt()
            })
            .sum()
    }
}

// ---------------------------------------------------------------------------
// shipped direction sets
// ---------------------------------------------------------------------------

/// Frame sets plus their decomposition solvers and outcome report.
pub struct FrameSets {
    pub label: &'static str,
    pub n_lambda: u32,
    pub velocity_directions: Vec<RVec>,
    pub magnetic_directions: Vec<RVec>,
    pub gamma_u: Result<GammaSolver>,
    pub gamma_b: Result<GammaSolver>,
}

/// The production direction sets: six velocity directions with denominator 13,
/// five magnetic directions with denominator at most 5, integral at scale 65.
/// Some magnetic directions are internally negated to obtain the positive
/// kernel; the even spatial profile makes the flows identical either way.
pub fn paper_lambda_sets() -> FrameSets {
    let velocity = vec![
        rvec([(5, 13), (12, 13), (0, 1)]),
        rvec([(5, 13), (-12, 13), (0, 1)]),
        rvec([(12, 13), (0, 1), (5, 13)]),
        rvec([(12, 13), (0, 1), (-5, 13)]),
        rvec([(0, 1), (5, 13), (12, 13)]),
        rvec([(0, 1), (5, 13), (-12, 13)]),
    ];
    let magnetic = vec![
        rvec([(1, 1), (0, 1), (0, 1)]),
        rvec([(0, 1), (1, 1), (0, 1)]),
        rvec([(0, 1), (0, 1), (1, 1)]),
        rvec([(3, 5), (4, 5), (0, 1)]),
        rvec([(0, 1), (-4, 5), (-3, 5)]),
    ];
    let n_lambda = 65;
    let vu: Result<Vec<WaveFrame>> = velocity
        .iter()
        .map(|k| WaveFrame::complete(k.clone(), n_lambda))
        .collect();
    let vb: Result<Vec<WaveFrame>> = magnetic
        .iter()
        .map(|k| WaveFrame::complete(k.clone(), n_lambda))
        .collect();
    let gamma_u = vu.and_then(|f| build_gamma_u(&f));
    let gamma_b = vb.and_then(|f| build_gamma_b(&f));
    FrameSets {
        label: "paper",
        n_lambda,
        velocity_directions: velocity,
        magnetic_directions: magnetic,
        gamma_u,
        gamma_b,
    }
}

fn axis(i: usize) -> RVec {
    let mut v = [Rat::zero(), Rat::zero(), Rat::zero()];
    v[i] = Rat::one();
    v
}

/// Minimal axis-aligned surrogate at scale 1: three cyclic frames per role.
/// Deliberately degenerate: the velocity set spans only diagonal matrices and
/// the magnetic set has no positive kernel; both failures are reported.
pub fn toy_lambda_sets() -> FrameSets {
    let dirs: Vec<RVec> = (0..3).map(axis).collect();
    let frames: Vec<WaveFrame> = (0..3)
        .map(|i| WaveFrame::new(axis(i), axis((i + 1) % 3), 1).unwrap())
        .collect();
    FrameSets {
        label: "toy-minimal",
        n_lambda: 1,
        velocity_directions: dirs.clone(),
        magnetic_directions: dirs,
        gamma_u: build_gamma_u(&frames),
        gamma_b: build_gamma_b(&frames.clone()),
    }
}

fn cyc(v: &RVec, by: usize) -> RVec {
    match by % 3 {
        0 => v.clone(),
        1 => [v[2].clone(), v[0].clone(), v[1].clone()],
        _ => [v[1].clone(), v[2].clone(), v[0].clone()],
    }
}

/// Runnable toy frames for the shear-flow construction: axis oscillation
/// directions (grid-periodic at scale 1) with transverse 3-4-5 pairs giving a
/// complete symmetric span, plus signed axes for the skew span.
pub fn toy_run_frames_shear() -> FrameSets {
    let seed1 = rvec([(0, 1), (3, 5), (4, 5)]);
    let seed2 = rvec([(0, 1), (3, 5), (-4, 5)]);
    let mut vel_frames = Vec::new();
    let mut vel_dirs = Vec::new();
    for i in 0..3 {
        for s in [&seed1, &seed2] {
            vel_frames.push(WaveFrame::new(axis(i), cyc(s, i), 5).unwrap());
            vel_dirs.push(axis(i));
        }
    }
    let (mag_frames, mag_dirs) = signed_axis_frames();
    FrameSets {
        label: "toy-shear",
        n_lambda: 1,
        velocity_directions: vel_dirs,
        magnetic_directions: mag_dirs,
        gamma_u: build_gamma_u(&vel_frames),
        gamma_b: build_gamma_b(&mag_frames),
    }
}

/// Runnable toy frames for the traveling-box construction: both the
/// oscillation direction k and the concentration direction k1 must be
/// grid-periodic axes, so the symmetric span is diagonal-only (reported).
pub fn toy_run_frames_box() -> FrameSets {
    let mut vel_frames = Vec::new();
    let mut vel_dirs = Vec::new();
    for i in 0..3 {
        vel_frames.push(WaveFrame::new(axis(i), axis((i + 1) % 3), 1).unwrap());
        vel_frames.push(WaveFrame::new(axis(i), axis((i + 2) % 3), 1).unwrap());
        vel_dirs.push(axis(i));
        vel_dirs.push(axis(i));
    }
    let (mag_frames, mag_dirs) = signed_axis_frames();
    FrameSets {
        label: "toy-box",
        n_lambda: 1,
        velocity_directions: vel_dirs,
        magnetic_directions: mag_dirs,
        gamma_u: build_gamma_u(&vel_frames),
        gamma_b: build_gamma_b(&mag_frames),
    }
}

fn signed_axis_frames() -> (Vec<WaveFrame>, Vec<RVec>) {
    let mut frames = Vec::new();
    let mut dirs = Vec::new();
    for i in 0..3 {
        frames.push(WaveFrame::new(axis(i), axis((i + 1) % 3), 1).unwrap());
        dirs.push(axis(i));
    }
    for i in 0..3 {
        let k = neg(&axis(i));
        frames.push(WaveFrame::new(k.clone(), axis((i + 2) % 3), 1).unwrap());
        dirs.push(k);
    }
    (frames, dirs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn paper_frames_integral_and_disjoint() {
        let sets = paper_lambda_sets();
        assert_eq!(sets.velocity_directions.len(), 6);
        assert_eq!(sets.magnetic_directions.len(), 5);
        for k in sets.velocity_directions.iter().chain(&sets.magnetic_directions) {
            for c in k {
                assert!((c.clone() * rat_int(65)).denom().is_one());
            }
            assert!(!sets.magnetic_directions.contains(k) || !sets.velocity_directions.contains(k));
        }
        // 65*(5/13, 12/13, 0) = (25, 60, 0)
        let v = &sets.velocity_directions[0];
        assert_eq!(v[0].clone() * rat_int(65), rat_int(25));
        assert_eq!(v[1].clone() * rat_int(65), rat_int(60));
    }

    #[test]
    fn frame_cross_product_example() {
        let f = WaveFrame::new(rvec([(3, 5), (4, 5), (0, 1)]), rvec([(-4, 5), (3, 5), (0, 1)]), 5)
            .unwrap();
        assert_eq!(f.k2, rvec([(0, 1), (0, 1), (1, 1)]));
    }

    #[test]
    fn paper_solvers_certify() {
        let sets = paper_lambda_sets();
        let gu = sets.gamma_u.as_ref().expect("velocity decomposition");
        let gb = sets.gamma_b.as_ref().expect("magnetic decomposition");
        assert!(gu.complete && gb.complete);
        assert!(gu.c.iter().all(|c| c.is_positive()));
        assert!(gb.c.iter().all(|c| c.is_positive()));
        assert!(gu.radius > 0.0 && gb.radius > 0.0);

        // identity reconstructs exactly at the center
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let rec = gu.reconstruct(&id).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert!((rec[a][b] - id[a][b]).abs() < 1e-13);
            }
        }
        let zero = [[0.0; 3]; 3];
        let rec0 = gb.reconstruct(&zero).unwrap();
        for row in rec0 {
            for v in row {
                assert!(v.abs() < 1e-13);
            }
        }
    }

    /// Dense f64 linear solve, independent of the rational path, used as the
    /// oracle for the center coefficients of the complete velocity set.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for i in 0..n {
            let p = (i..n).max_by(|&x, &y| a[x][i].abs().total_cmp(&a[y][i].abs())).unwrap();
            a.swap(i, p);
            b.swap(i, p);
            for r in 0..n {
                if r != i {
                    let f = a[r][i] / a[i][i];
                    for c in i..n {
                        let t = f * a[i][c];
                        a[r][c] -= t;
                    }
                    b[r] -= f * b[i];
                }
            }
        }
        (0..n).map(|i| b[i] / a[i][i]).collect()
    }

    #[test]
    fn center_coefficients_match_dense_oracle() {
        let sets = paper_lambda_sets();
        let gu = sets.gamma_u.as_ref().unwrap();
        // oracle: solve the 6x6 system in f64
        let cols: Vec<[f64; 6]> = gu
            .frames
            .iter()
            .map(|f| {
                let k1 = to_f64_vec(&f.k1);
                [
                    k1[0] * k1[0],
                    k1[1] * k1[1],
                    k1[2] * k1[2],
                    k1[0] * k1[1],
                    k1[0] * k1[2],
                    k1[1] * k1[2],
                ]
            })
            .collect();
        let a: Vec<Vec<f64>> = (0..6).map(|r| (0..6).map(|c| cols[c][r]).collect()).collect();
        let rhs = vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let oracle = dense_solve(a, rhs);
        for (k, c) in gu.c.iter().enumerate() {
            assert!((rat_to_f64(c) - oracle[k]).abs() < 1e-10, "k={k}");
            assert!(oracle[k] > 0.0);
        }
    }

    fn random_symmetric_in_ball(rng: &mut impl Rng, radius: f64) -> [[f64; 3]; 3] {
        let mut x = [0.0f64; 6];
        for v in x.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let norm = (x[..3].iter().map(|v| v * v).sum::<f64>()
            + 2.0 * x[3..].iter().map(|v| v * v).sum::<f64>())
        .sqrt();
        let scale = rng.gen_range(0.0..0.999) * radius / norm.max(1e-12);
        let mut m = [[0.0; 3]; 3];
        for d in 0..3 {
            m[d][d] = 1.0 + x[d] * scale;
        }
        m[0][1] = x[3] * scale;
        m[1][0] = x[3] * scale;
        m[0][2] = x[4] * scale;
        m[2][0] = x[4] * scale;
        m[1][2] = x[5] * scale;
        m[2][1] = x[5] * scale;
        m
    }

    fn random_skew_in_ball(rng: &mut impl Rng, radius: f64) -> [[f64; 3]; 3] {
        let a: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let norm = (2.0 * a.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let s = rng.gen_range(0.0..0.999) * radius / norm.max(1e-12);
        [
            [0.0, -a[2] * s, a[1] * s],
            [a[2] * s, 0.0, -a[0] * s],
            [-a[1] * s, a[0] * s, 0.0],
        ]
    }

    #[test]
    fn random_ball_reconstruction() {
        let sets = paper_lambda_sets();
        let gu = sets.gamma_u.as_ref().unwrap();
        let gb = sets.gamma_b.as_ref().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = random_symmetric_in_ball(&mut rng, gu.radius);
            let rec = gu.reconstruct(&s).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    assert!((rec[a][b] - s[a][b]).abs() < 1e-12);
                }
            }
            let sk = random_skew_in_ball(&mut rng, gb.radius);
            let rec = gb.reconstruct(&sk).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    assert!((rec[a][b] - sk[a][b]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn skew_affine_scaling() {
        let sets = paper_lambda_sets();
        let gb = sets.gamma_b.as_ref().unwrap();
        let r = gb.radius;
        let a1 = [[0.0, -0.1 * r, 0.0], [0.1 * r, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let a2 = [[0.0, -0.2 * r, 0.0], [0.2 * r, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let g1 = gb.gamma_sq(&a1).unwrap();
        let g2 = gb.gamma_sq(&a2).unwrap();
        for k in 0..g1.len() {
            let c = rat_to_f64(&gb.c[k]);
            let d1 = g1[k] - c;
            let d2 = g2[k] - c;
            if d1.abs() > 1e-14 {
                assert!((d2 / d1 - 2.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn toy_minimal_reports_failures() {
        let sets = toy_lambda_sets();
        // velocity solver builds but is incomplete (diagonal span only)
        let gu = sets.gamma_u.as_ref().unwrap();
        assert!(!gu.complete);
        // diagonal input fine, off-diagonal rejected
        let diag = [[1.05, 0.0, 0.0], [0.0, 0.98, 0.0], [0.0, 0.0, 1.01]];
        assert!(gu.reconstruct(&diag).is_ok());
        let off = [[1.0, 0.05, 0.0], [0.05, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(gu.gamma_sq(&off).is_err());
        // magnetic solver has no positive kernel
        assert!(matches!(sets.gamma_b, Err(Error::NoPositiveKernel(_))));
    }

    #[test]
    fn toy_run_frames_certify() {
        for sets in [toy_run_frames_shear(), toy_run_frames_box()] {
            let gb = sets.gamma_b.as_ref().unwrap();
            assert!(gb.complete, "{}", sets.label);
            let gu = sets.gamma_u.as_ref().unwrap();
            assert!(gu.radius > 0.0);
            if sets.label == "toy-shear" {
                assert!(gu.complete);
            }
        }
    }

    #[test]
    fn m_star_bounds() {
        let sets = paper_lambda_sets();
        let gu = sets.gamma_u.as_ref().unwrap();
        let sum_sqrt_c: f64 = gu.c.iter().map(|c| rat_to_f64(c).sqrt()).sum();
        assert!(gu.derivative_bound() >= sum_sqrt_c);
        assert!(gu.c0_bound() >= sum_sqrt_c);
        // doubling all c scales the C0 part by sqrt(2) (radius & L fixed):
        let mut doubled = gu.clone();
        for c in doubled.c.iter_mut() {
            *c *= rat_int(2);
        }
        // the linear parts scale with the same factor in the amplitude usage;
        // here we check the pure center contribution
        let base: f64 = gu.c.iter().map(|c| rat_to_f64(c).sqrt()).sum();
        let twice: f64 = doubled.c.iter().map(|c| rat_to_f64(c).sqrt()).sum();
        assert!((twice / base - 2.0f64.sqrt()).abs() < 1e-12);
    }
}
