//! Numerical checks of the map f: X(A^k_l(r)) → X(A_{l-1}),
//! z_i = y_1···y_k (y_i^r - y_l^r), and of its fibers.
//!
//! Fiber F_z is cut out in C^l by P(y)(y_i^r - y_l^r) = z_i (1 ≤ i < l) with
//! P(y) = y_1···y_k. Its closure in P^l uses the homogeneous system
//!
//! ```text
//! G_1 = P(y)(y_1^r - y_l^r) - z_1 y_0^{k+r}
//! G_i = z_i (y_1^r - y_l^r) - z_1 (y_i^r - y_l^r)      (2 ≤ i < l)
//! ```
//!
//! with y_0 = 0 the hyperplane at infinity. Coordinates are 1-based in the
//! public API (index 0 is y_0 in homogeneous vectors).

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::arrangement::build_akl;
use crate::error::{invalid, Error, Result};
use crate::numeric::{
    c, max_modulus, poly_from_roots, poly_roots, projective_distance, random_in_annulus,
    random_in_disk, rng_from_seed, root_of_unity, singular_value_ratio, C64,
};

pub const RESIDUAL_TOL: f64 = 1e-9;
pub const RANK_RATIO_TOL: f64 = 1e-6;
pub const SEPARATION_TOL: f64 = 1e-6;
pub const BASE_POINT_MARGIN: f64 = 0.1;
/// Draws with some |Y_i| below this are discarded (r-th root branch ambiguity).
pub const BRANCH_GUARD: f64 = 1e-6;
pub const OFF_WALL_MARGIN: f64 = 1e-3;
pub const IMAGE_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FibrationParams {
    pub k: usize,
    pub l: usize,
    pub r: usize,
}

impl FibrationParams {
    pub fn new(k: usize, l: usize, r: usize) -> Result<Self> {
        if l < 2 || k > l || r == 0 {
            return Err(invalid(format!(
                "need l >= 2, 0 <= k <= l, r >= 1 (got k={k}, l={l}, r={r})"
            )));
        }
        Ok(Self { k, l, r })
    }

    /// (k + r)·r^{l-2}, the number of points of the closed fiber at infinity
    /// counted by Bezout.
    pub fn bezout(&self) -> u64 {
        (self.k + self.r) as u64 * (self.r as u64).pow(self.l as u32 - 2)
    }

    /// k·r^{l-2} + r^{l-1}, the explicit count of points at infinity.
    pub fn infinity_count_formula(&self) -> u64 {
        let r = self.r as u64;
        self.k as u64 * r.pow(self.l as u32 - 2) + r.pow(self.l as u32 - 1)
    }

    fn failure(&self, detail: impl Into<String>) -> Error {
        Error::SamplingFailure {
            k: self.k,
            l: self.l,
            r: self.r,
            detail: detail.into(),
        }
    }
}

/// A point z of X(A_{l-1}), stored as z_1..z_{l-1}; z_l = 0 is implicit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasePoint {
    z: Vec<C64>,
}

impl BasePoint {
    /// Fails unless every |z_i| and |z_i - z_j| is at least `margin`.
    pub fn new(z: Vec<C64>, margin: f64) -> Result<Self> {
        if z.is_empty() {
            return Err(invalid("a base point needs at least one coordinate"));
        }
        let bp = Self { z };
        let m = bp.margin();
        if !(m >= margin) || m == 0.0 {
            return Err(invalid(format!(
                "base point lies within {m:.3e} of the braid arrangement (margin {margin})"
            )));
        }
        Ok(bp)
    }

    pub fn coords(&self) -> &[C64] {
        &self.z
    }

    /// z_1..z_l including the trailing z_l = 0.
    pub fn extended(&self) -> Vec<C64> {
        let mut v = self.z.clone();
        v.push(c(0.0, 0.0));
        v
    }

    /// Distance to the walls z_i = 0 and z_i = z_j.
    pub fn margin(&self) -> f64 {
        let e = self.extended();
        let mut m = f64::INFINITY;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                m = m.min((e[i] - e[j]).norm());
            }
        }
        m
    }

    pub fn l(&self) -> usize {
        self.z.len() + 1
    }
}

fn check_base(z: &BasePoint, p: &FibrationParams) -> Result<()> {
    if z.l() != p.l {
        return Err(invalid(format!(
            "base point has {} coordinates, expected {}",
            z.z.len(),
            p.l - 1
        )));
    }
    Ok(())
}

/// y_1···y_k, one when k = 0.
fn prefix_product(y: &[C64], k: usize) -> C64 {
    y[..k].iter().product()
}

/// z_i = y_1···y_k (y_i^r - y_l^r) for 1 ≤ i ≤ l-1.
pub fn map_f(y: &[C64], p: &FibrationParams) -> Vec<C64> {
    let r = p.r as i32;
    let prod = prefix_product(y, p.k);
    let last = y[p.l - 1].powi(r);
    y[..p.l - 1].iter().map(|yi| prod * (yi.powi(r) - last)).collect()
}

/// Deterministic point of X(A_{l-1}) with all margins at least
/// [`BASE_POINT_MARGIN`].
pub fn sample_base_point(l: usize, seed: u64) -> Result<BasePoint> {
    if l < 2 {
        return Err(invalid("l must be at least 2"));
    }
    let mut rng = rng_from_seed(seed);
    loop {
        let z: Vec<C64> = (0..l - 1).map(|_| random_in_disk(&mut rng, 1.5)).collect();
        if let Ok(bp) = BasePoint::new(z, BASE_POINT_MARGIN) {
            return Ok(bp);
        }
    }
}

/// A point on the fiber F_z with its diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct FiberSample {
    pub y: Vec<C64>,
    /// max_i |P(y)(y_i^r - y_l^r) - z_i|
    pub residual: f64,
    /// min over hyperplanes H of A^k_l(r) of |H(y)| / |y|
    pub min_hyperplane_distance: f64,
    /// σ_{l-1} / σ_1 of the Jacobian of the fiber equations
    pub jacobian_ratio: f64,
}

pub fn fiber_residual(y: &[C64], z: &BasePoint, p: &FibrationParams) -> f64 {
    map_f(y, p)
        .iter()
        .zip(z.coords())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Jacobian of y ↦ (P(y)(y_i^r - y_l^r))_{i<l}, an (l-1)×l matrix.
pub fn fiber_jacobian(y: &[C64], p: &FibrationParams) -> DMatrix<C64> {
    let (k, l, r) = (p.k, p.l, p.r as i32);
    let prod = prefix_product(y, k);
    let dprod: Vec<C64> = (0..l)
        .map(|j| {
            if j < k {
                y[..k]
                    .iter()
                    .enumerate()
                    .filter(|(m, _)| *m != j)
                    .map(|(_, v)| *v)
                    .product()
            } else {
                c(0.0, 0.0)
            }
        })
        .collect();
    let last = y[l - 1].powi(r);
    DMatrix::from_fn(l - 1, l, |i, j| {
        let mut v = dprod[j] * (y[i].powi(r) - last);
        if j == i {
            v += prod * y[i].powi(r - 1) * r as f64;
        }
        if j == l - 1 {
            v -= prod * y[l - 1].powi(r - 1) * r as f64;
        }
        v
    })
}

/// σ_{l-1}/σ_1 of the fiber Jacobian at `y`; above [`RANK_RATIO_TOL`] the
/// fiber is numerically smooth at `y`. A single nonzero row gives one.
pub fn jacobian_report(y: &[C64], p: &FibrationParams) -> f64 {
    singular_value_ratio(&fiber_jacobian(y, p))
}

fn numeric_arrangement(p: &FibrationParams) -> Result<Vec<Vec<C64>>> {
    Ok(build_akl(p.k, p.l, p.r)?
        .hyperplanes()
        .iter()
        .map(|h| h.to_complex())
        .collect())
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn min_wall_distance(hyperplanes: &[Vec<C64>], y: &[C64]) -> f64 {
    let ny = norm(y);
    hyperplanes
        .iter()
        .map(|h| dot(h, y).norm() / ny)
        .fold(f64::INFINITY, f64::min)
}

/// Random solution (a, b) of a^r ∏_{i≤k}(a z_i + b) = 1. For k = 0 the
/// product constraint on the r-th roots forces a = 1 and b is free.
fn draw_level_point<R: Rng>(rng: &mut R, z_ext: &[C64], p: &FibrationParams) -> (C64, C64) {
    if p.k == 0 {
        return (c(1.0, 0.0), random_in_disk(rng, 1.5));
    }
    let a = random_in_annulus(rng, 0.5, 1.5);
    // ∏ (b + a z_i) - a^{-r}, as a polynomial in b
    let shifts: Vec<C64> = z_ext[..p.k].iter().map(|zi| -a * zi).collect();
    let mut poly = poly_from_roots(&shifts);
    poly[0] -= a.powi(-(p.r as i32));
    let roots = poly_roots(&poly);
    let b = roots[rng.random_range(0..roots.len())];
    (a, b)
}

/// Samples `count` points on F_z through the parametrization
/// Y_i = y_i^r = a z_i + b of the fiber, with a^r ∏_{i≤k}(a z_i + b) = 1.
pub fn sample_fiber_points(
    z: &BasePoint,
    p: &FibrationParams,
    count: usize,
    seed: u64,
) -> Result<Vec<FiberSample>> {
    check_base(z, p)?;
    let mut rng = rng_from_seed(seed);
    let z_ext = z.extended();
    let walls = numeric_arrangement(p)?;
    let (k, l, r) = (p.k, p.l, p.r);
    let mut out = Vec::with_capacity(count);
    let max_attempts = 100 * count.max(1);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == max_attempts {
            return Err(p.failure(format!(
                "only {} of {count} fiber samples after {max_attempts} attempts",
                out.len()
            )));
        }
        attempts += 1;
        let (a, b) = draw_level_point(&mut rng, &z_ext, p);
        let big_y: Vec<C64> = z_ext.iter().map(|zi| a * zi + b).collect();
        if big_y.iter().any(|v| v.norm() < BRANCH_GUARD) {
            continue;
        }
        let mut y: Vec<C64> = big_y
            .iter()
            .map(|v| v.powf(1.0 / r as f64) * root_of_unity(r, rng.random_range(0..r)))
            .collect();
        if k >= 1 {
            // pin y_k so that y_1···y_k = 1/a
            let others: C64 = y[..k - 1].iter().product();
            let yk = c(1.0, 0.0) / (a * others);
            let power_err = (yk.powi(r as i32) - big_y[k - 1]).norm();
            if power_err > RESIDUAL_TOL * big_y[k - 1].norm().max(1.0) {
                continue;
            }
            y[k - 1] = yk;
        }
        let residual = fiber_residual(&y, z, p);
        if residual > RESIDUAL_TOL {
            continue;
        }
        out.push(FiberSample {
            min_hyperplane_distance: min_wall_distance(&walls, &y),
            jacobian_ratio: jacobian_report(&y, p),
            residual,
            y,
        });
    }
    debug_assert!(out.iter().all(|s| s.residual <= RESIDUAL_TOL) && l >= 2);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InfinityFamily {
    /// The points with y_i = 0 (1-based i ≤ k).
    Coordinate(usize),
    /// The points all of whose coordinates are r-th roots of unity.
    Diagonal,
}

/// A point of the closed fiber on y_0 = 0.
#[derive(Clone, Debug, Serialize)]
pub struct InfinityPoint {
    /// Homogeneous coordinates (y_0, y_1, ..., y_l) with y_0 = 0.
    pub coords: Vec<C64>,
    pub family: InfinityFamily,
}

/// Values of G_1, ..., G_{l-1} at a homogeneous point (y_0, ..., y_l).
pub fn compactified_equations(h: &[C64], z: &BasePoint, p: &FibrationParams) -> Vec<C64> {
    let (k, l, r) = (p.k, p.l, p.r as i32);
    let y = &h[1..];
    let zs = z.coords();
    let last = y[l - 1].powi(r);
    let first_diff = y[0].powi(r) - last;
    let mut g = Vec::with_capacity(l - 1);
    g.push(prefix_product(y, k) * first_diff - zs[0] * h[0].powi((k + p.r) as i32));
    for i in 1..l - 1 {
        g.push(zs[i] * first_diff - zs[0] * (y[i].powi(r) - last));
    }
    g
}

/// Largest |G_i| after scaling the point to unit max-modulus.
pub fn compactified_residual(h: &[C64], z: &BasePoint, p: &FibrationParams) -> f64 {
    let s = max_modulus(h);
    let scaled: Vec<C64> = h.iter().map(|x| x / s).collect();
    max_modulus(&compactified_equations(&scaled, z, p))
}

/// Gradients of G_1..G_{l-1} in all homogeneous coordinates, one row each.
fn compactified_gradients(h: &[C64], z: &BasePoint, p: &FibrationParams) -> DMatrix<C64> {
    let (k, l) = (p.k, p.l);
    let r = p.r as i32;
    let rf = p.r as f64;
    let y = &h[1..];
    let zs = z.coords();
    let d = |m: usize| y[m].powi(r - 1) * rf; // d(y_m^r)/dy_m, 0-based m
    let first_diff = y[0].powi(r) - y[l - 1].powi(r);
    let prod = prefix_product(y, k);
    DMatrix::from_fn(l - 1, l + 1, |row, col| {
        if row == 0 {
            if col == 0 {
                let e = (k + p.r) as i32;
                return -zs[0] * h[0].powi(e - 1) * e as f64;
            }
            let m = col - 1;
            let mut v = c(0.0, 0.0);
            if m < k {
                let others: C64 = (0..k).filter(|&q| q != m).map(|q| y[q]).product();
                v += others * first_diff;
            }
            if m == 0 {
                v += prod * d(0);
            }
            if m == l - 1 {
                v -= prod * d(l - 1);
            }
            v
        } else {
            if col == 0 {
                return c(0.0, 0.0);
            }
            let m = col - 1;
            let i = row;
            let mut v = c(0.0, 0.0);
            if m == 0 {
                v += zs[i] * d(0);
            }
            if m == i {
                v -= zs[0] * d(i);
            }
            if m == l - 1 {
                v += (zs[0] - zs[i]) * d(l - 1);
            }
            v
        }
    })
}

/// σ_min/σ_max of the l×l matrix stacking the gradients of the closed-fiber
/// equations with dy_0, in the affine chart of the largest coordinate.
pub fn transversality_ratio(point: &InfinityPoint, z: &BasePoint, p: &FibrationParams) -> f64 {
    let h = &point.coords;
    let j = (1..h.len())
        .max_by(|&a, &b| h[a].norm().total_cmp(&h[b].norm()))
        .expect("l >= 2");
    let scaled: Vec<C64> = h.iter().map(|x| x / h[j]).collect();
    let grads = compactified_gradients(&scaled, z, p);
    let l = p.l;
    let mut m = DMatrix::<C64>::zeros(l, l);
    for row in 0..l - 1 {
        let mut out_col = 0;
        for col in 0..=l {
            if col == j {
                continue;
            }
            m[(row, out_col)] = grads[(row, col)];
            out_col += 1;
        }
    }
    m[(l - 1, 0)] = c(1.0, 0.0);
    singular_value_ratio(&m)
}

/// The closed fiber is smooth at `point` and not tangent to y_0 = 0.
pub fn transversality_at_infinity(point: &InfinityPoint, z: &BasePoint, p: &FibrationParams) -> bool {
    transversality_ratio(point, z, p) > RANK_RATIO_TOL
}

/// Every branch combination of r-th roots for the `free` coordinates.
fn branch_combinations(r: usize, free: usize) -> Vec<Vec<usize>> {
    let total = r.pow(free as u32);
    (0..total)
        .map(|mut n| {
            (0..free)
                .map(|_| {
                    let t = n % r;
                    n /= r;
                    t
                })
                .collect()
        })
        .collect()
}

fn verify_points(points: &[Vec<C64>], z: &BasePoint, p: &FibrationParams, what: &str) -> Result<()> {
    for (n, h) in points.iter().enumerate() {
        let res = compactified_residual(h, z, p);
        if !(res <= RESIDUAL_TOL) {
            return Err(Error::VerificationFailure(format!(
                "{what} point {n} has residual {res:.3e}"
            )));
        }
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = projective_distance(&points[i], &points[j]);
            if !(d > SEPARATION_TOL) {
                return Err(Error::VerificationFailure(format!(
                    "{what} points {i} and {j} are only {d:.3e} apart"
                )));
            }
        }
    }
    Ok(())
}

/// The points of the closed fiber on the hyperplane at infinity, in two
/// families: y_i = 0 for some i ≤ k, and all y_j r-th roots of unity.
/// Representatives fix the branch of one coordinate (y_l, or y_{l-1} when
/// y_l itself vanishes).
pub fn enumerate_infinity_points(z: &BasePoint, p: &FibrationParams) -> Result<Vec<InfinityPoint>> {
    check_base(z, p)?;
    let (k, l, r) = (p.k, p.l, p.r);
    let z_ext = z.extended();
    let rf = r as f64;
    let mut points = Vec::new();
    for i in 0..k {
        let fixed = if i == l - 1 { l - 2 } else { l - 1 };
        let free: Vec<usize> = (0..l).filter(|&j| j != i && j != fixed).collect();
        for branches in branch_combinations(r, free.len()) {
            let mut h = vec![c(0.0, 0.0); l + 1];
            h[1 + fixed] = (z_ext[fixed] - z_ext[i]).powf(1.0 / rf);
            for (&j, &t) in free.iter().zip(&branches) {
                h[1 + j] = (z_ext[j] - z_ext[i]).powf(1.0 / rf) * root_of_unity(r, t);
            }
            points.push(InfinityPoint {
                coords: h,
                family: InfinityFamily::Coordinate(i + 1),
            });
        }
    }
    for branches in branch_combinations(r, l - 1) {
        let mut h = vec![c(0.0, 0.0); l + 1];
        h[l] = c(1.0, 0.0);
        for (j, &t) in branches.iter().enumerate() {
            h[1 + j] = root_of_unity(r, t);
        }
        points.push(InfinityPoint {
            coords: h,
            family: InfinityFamily::Diagonal,
        });
    }
    let raw: Vec<Vec<C64>> = points.iter().map(|q| q.coords.clone()).collect();
    verify_points(&raw, z, p, "infinity")?;
    Ok(points)
}

/// Points of the closed fiber on y_i = 0 (1-based, k < i ≤ l), as
/// homogeneous vectors. For i < l the coordinates y_i and y_l are swapped
/// first, which moves the base point to z'_j = z_j - z_i, z'_i = -z_i; the
/// points are mapped back and checked against the original system.
pub fn coordinate_section_points(z: &BasePoint, p: &FibrationParams, i: usize) -> Result<Vec<Vec<C64>>> {
    check_base(z, p)?;
    let (k, l, r) = (p.k, p.l, p.r);
    if i <= k || i > l {
        return Err(invalid(format!("coordinate index {i} outside {}..={l}", k + 1)));
    }
    let (zb, swap) = if i == l {
        (z.clone(), None)
    } else {
        let zi = z.coords()[i - 1];
        let moved: Vec<C64> = z
            .coords()
            .iter()
            .enumerate()
            .map(|(j, zj)| if j == i - 1 { -zi } else { zj - zi })
            .collect();
        (BasePoint::new(moved, 0.0)?, Some(i))
    };
    let zs = zb.coords();
    let rf = r as f64;
    let d = k + r;
    let mut points = Vec::new();
    for branches in branch_combinations(r, l - 2) {
        let mut h = vec![c(0.0, 0.0); l + 1];
        h[l - 1] = zs[l - 2].powf(1.0 / rf);
        for (j, &t) in branches.iter().enumerate() {
            h[1 + j] = zs[j].powf(1.0 / rf) * root_of_unity(r, t);
        }
        let y = &h[1..];
        let target = prefix_product(y, k) * (y[0].powi(r as i32) - y[l - 1].powi(r as i32)) / zs[0];
        let base = target.powf(1.0 / d as f64);
        for t in 0..d {
            let mut q = h.clone();
            q[0] = base * root_of_unity(d, t);
            if let Some(i) = swap {
                q.swap(i, l);
            }
            points.push(q);
        }
    }
    verify_points(&points, z, p, "section")?;
    let expected = p.bezout() as usize;
    if points.len() != expected {
        return Err(Error::VerificationFailure(format!(
            "section y_{i} = 0 has {} points, expected {expected}",
            points.len()
        )));
    }
    Ok(points)
}

/// Verified number of points of the closed fiber on y_i = 0.
pub fn coordinate_section_count(z: &BasePoint, p: &FibrationParams, i: usize) -> Result<usize> {
    coordinate_section_points(z, p, i).map(|pts| pts.len())
}

/// F(a, b) = a^r ∏_{i≤k}(a z_i + b) together with its partial derivatives.
pub fn level_polynomial(a: C64, b: C64, z_ext: &[C64], p: &FibrationParams) -> (C64, C64, C64) {
    let r = p.r as i32;
    let lin: Vec<C64> = z_ext[..p.k].iter().map(|zi| a * zi + b).collect();
    let prod: C64 = lin.iter().product();
    let mut sum_b = c(0.0, 0.0);
    let mut sum_a = c(0.0, 0.0);
    for i in 0..p.k {
        let others: C64 = lin.iter().enumerate().filter(|(m, _)| *m != i).map(|(_, v)| v).product();
        sum_b += others;
        sum_a += z_ext[i] * others;
    }
    let ar = a.powi(r);
    let f = ar * prod;
    let fa = a.powi(r - 1) * p.r as f64 * prod + ar * sum_a;
    let fb = ar * sum_b;
    (f, fa, fb)
}

/// Random points of the level set F(a, b) = 1.
pub fn level_set_points(z: &BasePoint, p: &FibrationParams, count: usize, seed: u64) -> Result<Vec<(C64, C64)>> {
    check_base(z, p)?;
    let mut rng = rng_from_seed(seed);
    let z_ext = z.extended();
    Ok((0..count)
        .map(|_| {
            if p.k == 0 {
                // F = a^r: any r-th root of unity, b free
                (root_of_unity(p.r, rng.random_range(0..p.r)), random_in_disk(&mut rng, 1.5))
            } else {
                draw_level_point(&mut rng, &z_ext, p)
            }
        })
        .collect())
}

/// At each point with F = 1, checks a F_a + b F_b = d with d = k + r, and the
/// resulting lower bound |∇F| ≥ d / (|a| + |b|).
pub fn euler_identity_check(p: &FibrationParams, z: &BasePoint, points: &[(C64, C64)]) -> bool {
    let z_ext = z.extended();
    let d = (p.k + p.r) as f64;
    points.iter().all(|&(a, b)| {
        let (f, fa, fb) = level_polynomial(a, b, &z_ext, p);
        let euler = a * fa + b * fb;
        let grad = (fa.norm_sqr() + fb.norm_sqr()).sqrt();
        (f - 1.0).norm() <= RESIDUAL_TOL
            && (euler - d).norm() <= RESIDUAL_TOL
            && grad * (a.norm() + b.norm()) >= d * (1.0 - RESIDUAL_TOL)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PreimageReport {
    pub on_wall_samples: usize,
    /// Largest distance of f(y) to the braid arrangement over on-wall y.
    pub max_on_wall_residual: f64,
    pub off_wall_samples: usize,
    /// Smallest relative distance of f(y) to the braid arrangement over
    /// off-wall y.
    pub min_off_wall_margin: f64,
    pub pass: bool,
}

/// Braid hyperplanes in z-coordinates: z_i = 0 and z_i = z_j.
fn braid_distance(z: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..z.len() {
        m = m.min(z[i].norm());
        for j in i + 1..z.len() {
            m = m.min((z[i] - z[j]).norm());
        }
    }
    m
}

/// Sampling check that f^{-1}(braid walls) is the union of the hyperplanes of
/// A^k_l(r): on-wall points map onto the walls and off-wall points map off
/// them.
pub fn preimage_union_check(p: &FibrationParams, trials: usize, seed: u64) -> Result<PreimageReport> {
    let walls = numeric_arrangement(p)?;
    let mut rng = rng_from_seed(seed);
    let l = p.l;
    let mut max_on = 0.0f64;
    for t in 0..trials {
        let h = &walls[t % walls.len()];
        let mut y: Vec<C64> = (0..l).map(|_| random_in_disk(&mut rng, 1.0)).collect();
        let lead = h.iter().position(|x| x.norm() > 0.0).expect("nonzero covector");
        let v = dot(h, &y) / h[lead];
        y[lead] -= v;
        max_on = max_on.max(braid_distance(&map_f(&y, p)));
    }
    let mut min_off = f64::INFINITY;
    let mut off = 0;
    while off < trials {
        let y: Vec<C64> = (0..l).map(|_| random_in_disk(&mut rng, 1.0)).collect();
        let rel = walls
            .iter()
            .map(|h| dot(h, &y).norm() / (norm(h) * norm(&y)))
            .fold(f64::INFINITY, f64::min);
        if rel < OFF_WALL_MARGIN {
            continue;
        }
        off += 1;
        let z = map_f(&y, p);
        min_off = min_off.min(braid_distance(&z) / norm(&z));
    }
    Ok(PreimageReport {
        on_wall_samples: trials,
        max_on_wall_residual: max_on,
        off_wall_samples: trials,
        min_off_wall_margin: min_off,
        pass: max_on <= RESIDUAL_TOL && min_off >= IMAGE_MARGIN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, l: usize, r: usize) -> FibrationParams {
        FibrationParams::new(k, l, r).unwrap()
    }

    fn base(z: &[C64]) -> BasePoint {
        BasePoint::new(z.to_vec(), BASE_POINT_MARGIN).unwrap()
    }

    #[test]
    fn map_examples() {
        let y = [c(3.0, 1.0), c(-1.0, 2.0), c(0.5, 0.0)];
        let z = map_f(&y, &params(0, 3, 1));
        assert_eq!(z, vec![y[0] - y[2], y[1] - y[2]]);
        assert_eq!(map_f(&[c(1.0, 0.0), c(-1.0, 0.0)], &params(0, 2, 2)), vec![c(0.0, 0.0)]);
        assert_eq!(map_f(&[c(2.0, 0.0), c(1.0, 0.0)], &params(1, 2, 1)), vec![c(2.0, 0.0)]);
    }

    #[test]
    fn invalid_params_and_base_points() {
        assert!(FibrationParams::new(3, 2, 1).is_err());
        assert!(FibrationParams::new(0, 1, 1).is_err());
        assert!(FibrationParams::new(0, 2, 0).is_err());
        assert!(BasePoint::new(vec![c(0.05, 0.0)], BASE_POINT_MARGIN).is_err());
        assert!(BasePoint::new(vec![c(1.0, 0.0), c(1.0, 0.01)], BASE_POINT_MARGIN).is_err());
        let z = base(&[c(1.0, 0.0)]);
        assert!(sample_fiber_points(&z, &params(0, 3, 1), 1, 0).is_err());
    }

    #[test]
    fn base_points_are_deterministic_with_margin() {
        for l in 2..=5 {
            let a = sample_base_point(l, 11).unwrap();
            assert_eq!(a, sample_base_point(l, 11).unwrap());
            assert_eq!(a.coords().len(), l - 1);
            assert!(a.margin() >= BASE_POINT_MARGIN);
        }
        assert_ne!(sample_base_point(3, 1).unwrap(), sample_base_point(3, 2).unwrap());
    }

    #[test]
    fn linear_fiber() {
        let z = base(&[c(1.0, 0.0)]);
        let p = params(0, 2, 1);
        for s in sample_fiber_points(&z, &p, 20, 3).unwrap() {
            assert!(((s.y[0] - s.y[1]) - 1.0).norm() <= 1e-12);
        }
    }

    #[test]
    fn conic_fiber_avoids_the_arrangement() {
        let z = base(&[c(1.0, 0.0)]);
        let p = params(0, 2, 2);
        for s in sample_fiber_points(&z, &p, 50, 5).unwrap() {
            let (y1, y2) = (s.y[0], s.y[1]);
            assert!((y1 * y1 - y2 * y2 - 1.0).norm() <= 1e-9);
            assert!((y1 - y2).norm() > 1e-6 && (y1 + y2).norm() > 1e-6);
            assert!(s.min_hyperplane_distance > 0.0);
        }
    }

    #[test]
    fn k1_fiber() {
        let z = base(&[c(1.0, 0.0)]);
        let p = params(1, 2, 1);
        for s in sample_fiber_points(&z, &p, 50, 9).unwrap() {
            assert!((s.y[0] * (s.y[0] - s.y[1]) - 1.0).norm() <= 1e-9);
            assert!(s.y[0].norm() > 0.0);
        }
    }

    #[test]
    fn jacobian_of_linear_map() {
        // J = (I | -1): J J^* = I + 11^T has eigenvalues 1 and l, ratio 1/sqrt(l)
        for l in 2..=5 {
            let p = params(0, l, 1);
            let y: Vec<C64> = (0..l).map(|i| c(i as f64, 1.0)).collect();
            let ratio = jacobian_report(&y, &p);
            let expected = if l == 2 { 1.0 } else { 1.0 / (l as f64).sqrt() };
            assert!((ratio - expected).abs() < 1e-12, "l={l}: {ratio}");
            assert!(ratio > 0.3);
        }
    }

    #[test]
    fn single_row_jacobian() {
        let p = params(0, 2, 2);
        let y = [c(2f64.sqrt(), 0.0), c(1.0, 0.0)];
        let j = fiber_jacobian(&y, &p);
        assert!((j[(0, 0)] - c(2.0 * 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((j[(0, 1)] - c(-2.0, 0.0)).norm() < 1e-15);
        assert_eq!(jacobian_report(&y, &p), 1.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = params(2, 4, 3);
        let y = [c(0.7, 0.2), c(-0.4, 0.9), c(1.1, -0.3), c(0.2, 0.5)];
        let j = fiber_jacobian(&y, &p);
        let h = 1e-6;
        for col in 0..4 {
            let mut yp = y;
            let mut ym = y;
            yp[col] += h;
            ym[col] -= h;
            let (fp, fm) = (map_f(&yp, &p), map_f(&ym, &p));
            for row in 0..3 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                assert!((fd - j[(row, col)]).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn infinity_points_small_cases() {
        let z = base(&[c(0.8, 0.3)]);
        let pts = enumerate_infinity_points(&z, &params(0, 2, 2)).unwrap();
        assert_eq!(pts.len(), 2);
        let coords: Vec<Vec<C64>> = pts.iter().map(|q| q.coords.clone()).collect();
        assert!(coords.iter().any(|h| projective_distance(h, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]) < 1e-12));
        assert!(coords.iter().any(|h| projective_distance(h, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]) < 1e-12));

        let z = sample_base_point(3, 4).unwrap();
        let p = params(1, 3, 2);
        let pts = enumerate_infinity_points(&z, &p).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts.iter().filter(|q| q.family == InfinityFamily::Diagonal).count(), 4);
    }

    #[test]
    fn transversality_of_conic_at_infinity() {
        let z = base(&[c(1.0, 0.0)]);
        let p = params(0, 2, 2);
        let pt = InfinityPoint {
            coords: vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            family: InfinityFamily::Diagonal,
        };
        // rows (0, 2) and (1, 0): singular values 2 and 1
        assert!((transversality_ratio(&pt, &z, &p) - 0.5).abs() < 1e-12);
        assert!(transversality_at_infinity(&pt, &z, &p));
    }

    #[test]
    fn corrupted_point_fails_residual() {
        let z = sample_base_point(3, 2).unwrap();
        let p = params(1, 3, 2);
        let mut pt = enumerate_infinity_points(&z, &p).unwrap()[0].coords.clone();
        pt[2] += 0.1;
        assert!(compactified_residual(&pt, &z, &p) > RESIDUAL_TOL);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = params(2, 4, 2);
        let z = sample_base_point(4, 8).unwrap();
        let h0 = [c(0.3, 0.1), c(0.7, 0.2), c(-0.4, 0.9), c(1.1, -0.3), c(0.2, 0.5)];
        let g = compactified_gradients(&h0, &z, &p);
        let eps = 1e-6;
        for col in 0..5 {
            let mut hp = h0;
            let mut hm = h0;
            hp[col] += eps;
            hm[col] -= eps;
            let (fp, fm) = (compactified_equations(&hp, &z, &p), compactified_equations(&hm, &z, &p));
            for row in 0..3 {
                let fd = (fp[row] - fm[row]) / (2.0 * eps);
                assert!((fd - g[(row, col)]).norm() < 1e-7, "row {row} col {col}");
            }
        }
    }

    #[test]
    fn section_counts() {
        let z2 = base(&[c(0.9, -0.4)]);
        assert_eq!(coordinate_section_count(&z2, &params(1, 2, 1), 2).unwrap(), 2);
        let z3 = sample_base_point(3, 21).unwrap();
        assert_eq!(coordinate_section_count(&z3, &params(0, 3, 2), 3).unwrap(), 4);
        assert_eq!(coordinate_section_count(&z3, &params(0, 3, 2), 2).unwrap(), 4);
        assert_eq!(coordinate_section_count(&z3, &params(0, 3, 2), 1).unwrap(), 4);
        assert_eq!(coordinate_section_count(&z3, &params(2, 3, 1), 3).unwrap(), 3);
        assert!(coordinate_section_count(&z3, &params(2, 3, 1), 2).is_err());
    }

    #[test]
    fn euler_identity_examples() {
        let z = base(&[c(1.0, 0.0)]);
        let p = params(0, 2, 3);
        let pts: Vec<(C64, C64)> = (0..3).map(|t| (root_of_unity(3, t), c(0.3, 0.1))).collect();
        assert!(euler_identity_check(&p, &z, &pts));
        let p = params(1, 2, 1);
        assert!(euler_identity_check(&p, &z, &[(c(1.0, 0.0), c(0.0, 0.0))]));
        // off the level set
        assert!(!euler_identity_check(&p, &z, &[(c(2.0, 0.0), c(0.0, 0.0))]));
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(map_f(&[c(0.0, 0.0), c(5.0, 0.0)], &params(1, 2, 1)), vec![c(0.0, 0.0)]);
        let rep = preimage_union_check(&params(1, 3, 2), 50, 1).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
