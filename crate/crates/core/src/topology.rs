//! Closed-form invariants of the fiber F_z: genus of its closure, number of
//! punctures, rank N of its free fundamental group, and an independent
//! branched-cover count of the Euler characteristic for l = 2.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fibration::{
    enumerate_infinity_points, sample_base_point, transversality_at_infinity, BasePoint,
    FibrationParams,
};
use crate::numeric::{c, cluster, derive_seed, poly_eval, poly_roots, C64};

/// Roots of the discriminant closer than this are one special value.
pub const ORACLE_MERGE_RADIUS: f64 = 1e-4;
/// Distinct special values closer than this make the count untrustworthy.
pub const ORACLE_AMBIGUITY: f64 = 1e-2;
/// Coefficients below this fraction of the largest are treated as zero.
pub const ORACLE_TRIM: f64 = 1e-9;
pub const ORACLE_MAX_K: usize = 3;
pub const ORACLE_MAX_R: usize = 4;

/// 2g - 2 for the closure of the fiber.
pub fn euler_defect(p: &FibrationParams) -> i128 {
    let (k, l, r) = (p.k as i128, p.l as i128, p.r as i128);
    (k + (r - 1) * (l - 1) - 2) * p.bezout() as i128
}

pub fn genus(p: &FibrationParams) -> Result<u64> {
    let twice = euler_defect(p) + 2;
    if twice < 0 || twice % 2 != 0 {
        return Err(Error::InternalConsistency(format!(
            "2g = {twice} is not a non-negative even number for {p:?}"
        )));
    }
    Ok((twice / 2) as u64)
}

pub fn puncture_count(p: &FibrationParams) -> u64 {
    p.bezout()
}

/// N = 2g + P - 1.
pub fn free_rank(p: &FibrationParams) -> Result<u64> {
    Ok(2 * genus(p)? + puncture_count(p) - 1)
}

/// (k + (r-1)(l-1) - 1)·(k+r)·r^{l-2} + trailing. With trailing = 1 this
/// equals [`free_rank`]; the value for trailing = -1 is reported as a note.
pub fn product_form_free_rank(p: &FibrationParams, trailing: i64) -> i128 {
    let (k, l, r) = (p.k as i128, p.l as i128, p.r as i128);
    (k + (r - 1) * (l - 1) - 1) * p.bezout() as i128 + trailing as i128
}

/// Degrees (k+r, r, ..., r) of the l-1 equations cutting out the closure.
pub fn multidegree(p: &FibrationParams) -> Vec<u64> {
    let mut d = vec![p.r as u64; p.l - 1];
    d[0] += p.k as u64;
    d
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pi1Structure {
    pub descriptor: String,
    /// Rank of the free fiber group.
    pub fiber_rank: u64,
    /// Number of strands of the braid group of the base.
    pub braid_strands: usize,
    pub extension: &'static str,
}

pub fn pi1_structure(p: &FibrationParams) -> Result<Pi1Structure> {
    let n = free_rank(p)?;
    Ok(Pi1Structure {
        descriptor: format!("F_{n} ⋊ B_{}", p.l),
        fiber_rank: n,
        braid_strands: p.l,
        extension: "split",
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub genus: u64,
    pub punctures: u64,
    pub free_rank: u64,
    pub euler_characteristic: i64,
    pub degree: usize,
    pub special_values: usize,
}

/// Bivariate polynomial, `coef[i][j]` multiplying y1^i y2^j.
type Bivariate = Vec<Vec<C64>>;

fn curve_polynomial(p: &FibrationParams, z1: C64) -> Bivariate {
    let r = p.r;
    // y1^r - y2^r
    let mut g: Bivariate = vec![vec![c(0.0, 0.0); r + 1]; r + 1];
    g[r][0] = c(1.0, 0.0);
    g[0][r] = c(-1.0, 0.0);
    for a in 0..p.k {
        // multiply by y1 (a = 0) or y2 (a = 1); k ≤ l = 2 here
        let (di, dj) = if a == 0 { (1, 0) } else { (0, 1) };
        let mut next = vec![vec![c(0.0, 0.0); g[0].len() + dj]; g.len() + di];
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                next[i + di][j + dj] = *v;
            }
        }
        g = next;
    }
    g[0][0] -= z1;
    g
}

fn degree_in_y1(g: &Bivariate) -> usize {
    g.iter()
        .rposition(|row| row.iter().any(|v| *v != c(0.0, 0.0)))
        .unwrap_or(0)
}

fn eval_in_y2(g: &[Vec<C64>], y2: C64) -> Vec<C64> {
    g.iter()
        .map(|row| row.iter().rev().fold(c(0.0, 0.0), |acc, v| acc * y2 + v))
        .collect()
}

fn sylvester_resultant(f: &[C64], g: &[C64]) -> C64 {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    let mut s = DMatrix::<C64>::zeros(size, size);
    for row in 0..n {
        for (i, v) in f.iter().rev().enumerate() {
            s[(row, row + i)] = *v;
        }
    }
    for row in 0..m {
        for (i, v) in g.iter().rev().enumerate() {
            s[(n + row, row + i)] = *v;
        }
    }
    s.determinant()
}

/// Res_{y1}(G, ∂G/∂y1) as a polynomial in y2, recovered from its values at
/// roots of unity.
fn discriminant_in_y2(g: &Bivariate, d: usize) -> Vec<C64> {
    let deg_y2 = g.iter().map(|row| row.len() - 1).max().unwrap_or(0);
    let m = (2 * d - 1) * deg_y2 + 1;
    let values: Vec<C64> = (0..m)
        .map(|j| {
            let w = C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / m as f64);
            let f = eval_in_y2(&g[..=d], w);
            let df: Vec<C64> = f.iter().enumerate().skip(1).map(|(i, v)| v * i as f64).collect();
            sylvester_resultant(&f, &df)
        })
        .collect();
    (0..m)
        .map(|n| {
            let s: C64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, -std::f64::consts::TAU * (j * n % m) as f64 / m as f64))
                .sum();
            s / m as f64
        })
        .collect()
}

/// `coeffs` with entries below the trim threshold set to exactly zero and
/// trailing zeros removed.
fn trimmed(coeffs: &[C64]) -> Vec<C64> {
    let max = coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut p: Vec<C64> = coeffs
        .iter()
        .map(|v| if v.norm() < ORACLE_TRIM * max { c(0.0, 0.0) } else { *v })
        .collect();
    while p.last().is_some_and(|v| *v == c(0.0, 0.0)) {
        p.pop();
    }
    p
}

/// Roots of a trimmed polynomial; a vanishing constant term contributes the
/// root 0 exactly once.
fn roots_of_trimmed(p: &[C64]) -> Vec<C64> {
    if p.is_empty() {
        return vec![];
    }
    let low = p.iter().position(|v| *v != c(0.0, 0.0)).unwrap_or(0);
    let mut roots = poly_roots(&p[low..]);
    if low > 0 {
        roots.push(c(0.0, 0.0));
    }
    roots
}

fn derivative(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().skip(1).map(|(i, v)| v * i as f64).collect()
}

/// Newton on the (m-1)-th derivative, where a root of multiplicity m is
/// simple. Steps are kept only while they reduce the residual.
fn refine_multiple_root(p: &[C64], x: C64, m: usize) -> C64 {
    let mut q = p.to_vec();
    for _ in 1..m {
        q = derivative(&q);
    }
    let dq = derivative(&q);
    let mut x = x;
    let mut fx = poly_eval(&q, x).norm();
    for _ in 0..8 {
        let d = poly_eval(&dq, x);
        if fx == 0.0 || d.norm() == 0.0 {
            break;
        }
        let cand = x - poly_eval(&q, x) / d;
        let fc = poly_eval(&q, cand).norm();
        if !(fc < fx) {
            break;
        }
        x = cand;
        fx = fc;
    }
    x
}

/// Number of distinct roots of G(·, y2) in y1.
fn distinct_preimages(g: &Bivariate, d: usize, y2: C64) -> usize {
    let f = trimmed(&eval_in_y2(&g[..=d], y2));
    cluster(&roots_of_trimmed(&f), ORACLE_MERGE_RADIUS * 10.0).len()
}

/// Euler characteristic of the affine curve (∏_{a≤k} y_a)(y1^r - y2^r) = z1
/// from its projection to the y2-line: χ = d(1 - s) + Σ_s n_s, where s runs
/// over the roots of the y1-discriminant and of the leading coefficient and
/// n_s counts distinct y1 over s. Then N = 1 - χ and g = (N + 1 - P)/2 with P
/// the verified number of points at infinity.
pub fn riemann_hurwitz_oracle(p: &FibrationParams, z: &BasePoint) -> Result<OracleResult> {
    if p.l != 2 || p.k > ORACLE_MAX_K || p.r > ORACLE_MAX_R {
        return Err(crate::error::invalid(format!(
            "the branched-cover oracle needs l = 2, k <= {ORACLE_MAX_K}, r <= {ORACLE_MAX_R}"
        )));
    }
    let z1 = z.coords()[0];
    let g = curve_polynomial(p, z1);
    let d = degree_in_y1(&g);
    // Res(G, ∂G/∂y1) = ±lead·disc, so its roots include the zeros of the
    // leading coefficient; a graph (d = 1) only has the latter.
    let special = trimmed(&if d <= 1 { g[d].clone() } else { discriminant_in_y2(&g, d) });
    let clusters: Vec<C64> = cluster(&roots_of_trimmed(&special), ORACLE_MERGE_RADIUS)
        .into_iter()
        .map(|(x, m)| refine_multiple_root(&special, x, m))
        .collect();
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let gap = (clusters[i] - clusters[j]).norm();
            if gap < ORACLE_AMBIGUITY {
                return Err(Error::OracleInconclusive(format!(
                    "special values {} and {} are only {gap:.3e} apart",
                    clusters[i], clusters[j]
                )));
            }
        }
    }
    let s = clusters.len() as i64;
    let fibers: i64 = clusters.iter().map(|&y2| distinct_preimages(&g, d, y2) as i64).sum();
    let chi = d as i64 * (1 - s) + fibers;
    let n = 1 - chi;
    let punctures = enumerate_infinity_points(z, p)?.len() as i64;
    let twice_g = n + 1 - punctures;
    if n < 0 || twice_g < 0 || twice_g % 2 != 0 {
        return Err(Error::InternalConsistency(format!(
            "oracle produced N = {n} with P = {punctures}"
        )));
    }
    Ok(OracleResult {
        genus: (twice_g / 2) as u64,
        punctures: punctures as u64,
        free_rank: n as u64,
        euler_characteristic: chi,
        degree: d,
        special_values: clusters.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopologyReport {
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub genus: u64,
    pub punctures: u64,
    pub free_rank: u64,
    pub bezout: u64,
    pub multidegree: Vec<u64>,
    pub pi1: Pi1Structure,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl TopologyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "(k,l,r) = ({},{},{})\ngenus {}\npunctures {}\nfree rank {}\nbezout {}\nmultidegree {:?}\npi1 {}\n",
            self.k, self.l, self.r, self.genus, self.punctures, self.free_rank, self.bezout,
            self.multidegree, self.pi1.descriptor
        );
        for c in &self.checks {
            s += &format!("[{}] {}: {}\n", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
        }
        for n in &self.notes {
            s += &format!("note: {n}\n");
        }
        s
    }
}

const ORACLE_ATTEMPTS: u64 = 5;

/// Formula values for `p` plus every cross-check that applies; failed checks
/// are flagged rather than returned as errors. `seed` picks the base points
/// for the runtime checks.
pub fn report(p: &FibrationParams, seed: u64) -> Result<TopologyReport> {
    let g = genus(p)?;
    let pc = puncture_count(p);
    let n = free_rank(p)?;
    let md = multidegree(p);
    let mut checks = Vec::new();

    let defect = euler_defect(p);
    checks.push(Check::new("genus_parity", defect % 2 == 0, format!("2g-2 = {defect}")));
    let product = product_form_free_rank(p, 1);
    checks.push(Check::new(
        "free_rank_product_form",
        product == n as i128,
        format!("2g+P-1 = {n}, product form = {product}"),
    ));
    let sum: i128 = md.iter().map(|&d| d as i128).sum();
    let prod: i128 = md.iter().map(|&d| d as i128).product();
    let md_value = (sum - p.l as i128 - 1) * prod;
    checks.push(Check::new(
        "multidegree_canonical_degree",
        md_value == defect && prod == p.bezout() as i128,
        format!("(Σd - l - 1)·Πd = {md_value}, Πd = {prod}"),
    ));
    let explicit = p.infinity_count_formula();
    checks.push(Check::new(
        "bezout_count",
        explicit == pc,
        format!("k·r^(l-2) + r^(l-1) = {explicit}, (k+r)·r^(l-2) = {pc}"),
    ));

    let z = sample_base_point(p.l, derive_seed(seed, &[p.k as u64, p.l as u64, p.r as u64]))?;
    match enumerate_infinity_points(&z, p) {
        Ok(pts) => {
            checks.push(Check::new(
                "infinity_points",
                pts.len() as u64 == pc,
                format!("{} verified points at infinity", pts.len()),
            ));
            let transverse = pts.iter().filter(|q| transversality_at_infinity(q, &z, p)).count();
            checks.push(Check::new(
                "infinity_transversality",
                transverse == pts.len(),
                format!("{transverse} of {} points transverse", pts.len()),
            ));
        }
        Err(e) => checks.push(Check::new("infinity_points", false, e.to_string())),
    }

    if p.l == 2 && p.k <= ORACLE_MAX_K && p.r <= ORACLE_MAX_R {
        let mut outcome = Err(Error::OracleInconclusive("no attempt".into()));
        for attempt in 0..ORACLE_ATTEMPTS {
            let zs = if attempt == 0 {
                z.clone()
            } else {
                sample_base_point(2, derive_seed(seed, &[p.k as u64, p.r as u64, attempt]))?
            };
            outcome = riemann_hurwitz_oracle(p, &zs);
            if !matches!(outcome, Err(Error::OracleInconclusive(_))) {
                break;
            }
        }
        checks.push(match outcome {
            Ok(o) => Check::new(
                "riemann_hurwitz",
                (o.genus, o.punctures, o.free_rank) == (g, pc, n),
                format!(
                    "oracle (g,P,N) = ({},{},{}), chi = {}",
                    o.genus, o.punctures, o.free_rank, o.euler_characteristic
                ),
            ),
            Err(e) => Check::new("riemann_hurwitz", false, e.to_string()),
        });
    }

    let minus = product_form_free_rank(p, -1);
    let notes = vec![format!(
        "free rank uses N = 2g+P-1; the expanded form with trailing -1 would give {minus}"
    )];
    Ok(TopologyReport {
        k: p.k,
        l: p.l,
        r: p.r,
        genus: g,
        punctures: pc,
        free_rank: n,
        bezout: p.bezout(),
        multidegree: md,
        pi1: pi1_structure(p)?,
        checks,
        notes,
    })
}
