//! Double-precision helpers shared by the verifiers: polynomial roots via
//! companion matrices, singular-value ratios, projective distances and seeded
//! random draws.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Generator for a seed. ChaCha is counter based, so a seed plus a stream
/// number names a reproducible sequence on every platform.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent sub-seed from `seed` and a list of tags.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut rng = rng_from_seed(seed);
    let mut stream = 0u64;
    for &t in tags {
        stream = stream.wrapping_mul(0x100_0000_01b3).wrapping_add(t.wrapping_add(1));
    }
    rng.set_stream(stream);
    rng.next_u64()
}

/// Uniform draw from the disk of the given radius.
pub fn random_in_disk<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        if x * x + y * y <= 1.0 {
            return c(radius * x, radius * y);
        }
    }
}

/// Uniform draw from the annulus `lo <= |w| <= hi` (uniform in radius and
/// angle).
pub fn random_in_annulus<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> C64 {
    let rho = rng.random_range(lo..=hi);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    C64::from_polar(rho, theta)
}

pub fn root_of_unity(n: usize, t: usize) -> C64 {
    C64::from_polar(1.0, std::f64::consts::TAU * (t % n) as f64 / n as f64)
}

/// Horner evaluation; coefficients in ascending degree order.
pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * x + a)
}

fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| a * i as f64)
        .collect()
}

/// Product of the linear factors `(x - roots[i])`, ascending coefficients.
pub fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![c(1.0, 0.0)];
    for &rt in roots {
        let mut next = vec![c(0.0, 0.0); p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * rt;
        }
        p = next;
    }
    p
}

/// Roots of a polynomial (ascending coefficients) as eigenvalues of its
/// companion matrix, each followed by a few guarded Newton steps. Exactly-zero
/// leading coefficients are dropped first.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut p = coeffs.to_vec();
    while p.last().is_some_and(|a| *a == c(0.0, 0.0)) {
        p.pop();
    }
    if p.len() <= 1 {
        return vec![];
    }
    let n = p.len() - 1;
    let lead = p[n];
    let monic: Vec<C64> = p.iter().map(|&a| a / lead).collect();
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -monic[i]
        } else if i == j + 1 {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let eig = companion
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular");
    let dp = poly_derivative(&p);
    eig.iter().map(|&x| polish(&p, &dp, x)).collect()
}

fn polish(p: &[C64], dp: &[C64], mut x: C64) -> C64 {
    let mut fx = poly_eval(p, x).norm();
    for _ in 0..4 {
        let d = poly_eval(dp, x);
        if d.norm() == 0.0 {
            break;
        }
        let cand = x - poly_eval(p, x) / d;
        let fc = poly_eval(p, cand).norm();
        if !(fc < fx) {
            break;
        }
        x = cand;
        fx = fc;
    }
    x
}

/// σ_min / σ_max over the min(rows, cols) singular values; zero for the zero
/// matrix. A single nonzero row therefore has ratio one.
pub fn singular_value_ratio(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    min / max
}

/// Sine of the angle between two nonzero vectors, a distance on projective
/// space that needs no chart.
pub fn projective_distance(u: &[C64], v: &[C64]) -> f64 {
    let nu: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    let nv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let ip: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let cos2 = (ip.norm_sqr() / (nu * nv)).min(1.0);
    (1.0 - cos2).sqrt()
}

pub fn max_modulus(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Groups points lying within `radius` of each other (single linkage) and
/// returns the cluster centroids with their sizes.
pub fn cluster(points: &[C64], radius: f64) -> Vec<(C64, usize)> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                label[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<C64>> = Default::default();
    for i in 0..n {
        let r = root(&mut label, i);
        groups.entry(r).or_default().push(points[i]);
    }
    groups
        .into_values()
        .map(|g| {
            let s: C64 = g.iter().sum();
            (s / g.len() as f64, g.len())
        })
        .collect()
}
