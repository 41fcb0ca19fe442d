//! Induced arrangements A^Y on flats, and identification of arrangements as
//! members of the A^k_m(r) family.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::arrangement::{build_akl, build_monomial_reflection, Arrangement};
use crate::cyclotomic::{CycloField, CycloMatrix, CycloNum, FieldExt, IntPoly};
use crate::error::{invalid, Error, Result};
use crate::lattice::{characteristic_polynomial, index_list, Flat, Lattice};

/// Exact isomorphism search only runs up to this dimension...
pub const ISOMORPHISM_MAX_DIM: usize = 3;
/// ...and this many hyperplanes.
pub const ISOMORPHISM_MAX_HYPERPLANES: usize = 12;

/// Parameters (k, m, r) of A^k_m(r).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MonomialType {
    pub k: usize,
    pub m: usize,
    pub r: usize,
}

impl fmt::Display for MonomialType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.k, self.m, self.r)
    }
}

#[derive(Clone, Debug)]
pub struct RestrictionResult {
    /// A^Y written in the coordinates of `chart`.
    pub induced: Arrangement,
    /// Rows form a basis of Y.
    pub chart: CycloMatrix,
    /// Filled by [`restrict_and_identify`]; empty after a plain [`restrict`].
    pub candidates: Vec<MonomialType>,
}

/// Checks that `y` is a flat of `a`: its containing set is what `a` says it
/// is and those hyperplanes cut out exactly `y`.
fn check_flat(a: &Arrangement, y: &Flat) -> Result<()> {
    if y.basis().cols() != a.dim() || y.basis().field().order() != a.field().order() {
        return Err(invalid("flat does not live in the arrangement's ambient space"));
    }
    let from_arrangement = Flat::from_hyperplanes(a, y.containing())
        .map_err(|_| invalid("flat refers to hyperplanes outside the arrangement"))?;
    if from_arrangement.basis() != y.basis() || from_arrangement.containing() != y.containing() {
        return Err(invalid("not a flat of this arrangement"));
    }
    Ok(())
}

/// Basis of Y parametrized by the free (non-pivot) coordinates of the echelon
/// form of its defining equations.
pub fn default_chart(y: &Flat) -> CycloMatrix {
    let basis = y.basis();
    let field = basis.field().clone();
    let n = basis.cols();
    let pivots = basis.pivots();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let rows = free
        .iter()
        .map(|&f| {
            let mut v = vec![field.zero(); n];
            v[f] = field.one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -basis.get(i, f);
            }
            v
        })
        .collect();
    CycloMatrix::from_rows(field, n, rows).expect("rows have ambient length")
}

/// The induced arrangement A^Y, in the default chart on Y.
pub fn restrict(a: &Arrangement, y: &Flat) -> Result<RestrictionResult> {
    check_flat(a, y)?;
    if y.rank() == 0 {
        return Err(invalid("restriction needs a flat of rank at least 1"));
    }
    if y.dim() == 0 {
        return Err(invalid("cannot restrict to the origin"));
    }
    let chart = default_chart(y);
    let induced = restrict_with_chart(a, y, &chart)?;
    Ok(RestrictionResult {
        induced,
        chart,
        candidates: vec![],
    })
}

/// A^Y in the coordinates given by the rows of `chart`, which must be a basis
/// of Y.
pub fn restrict_with_chart(a: &Arrangement, y: &Flat, chart: &CycloMatrix) -> Result<Arrangement> {
    let dim_y = y.dim();
    if chart.rows() != dim_y || chart.cols() != a.dim() || chart.rank() != dim_y {
        return Err(invalid("chart rows must form a basis of the flat"));
    }
    for v in chart.row_iter() {
        for form in y.basis().row_iter() {
            if !dot(form, v).is_zero() {
                return Err(invalid("chart row does not lie on the flat"));
            }
        }
    }
    let field = a.field().clone();
    let covectors = a
        .hyperplanes()
        .iter()
        .enumerate()
        .filter(|(i, _)| y.containing().binary_search(i).is_err())
        .map(|(_, h)| chart.row_iter().map(|v| dot(h.covector(), v)).collect())
        .collect();
    Arrangement::new(dim_y, field, covectors, format!("{} restricted", a.label()))
}

fn dot(a: &[CycloNum], b: &[CycloNum]) -> CycloNum {
    let field = a[0].field().clone();
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(field.zero(), |acc, (x, y)| &acc + &(x * y))
}

/// Restriction followed by identification with `r_max` as the largest
/// candidate order.
pub fn restrict_and_identify(a: &Arrangement, y: &Flat, r_max: usize) -> Result<RestrictionResult> {
    let mut res = restrict(a, y)?;
    res.candidates = identify_monomial_type(&res.induced, r_max)?;
    Ok(res)
}

/// All (k, m, r) with r ≤ `r_max` such that `b` matches A^k_m(r): equal
/// hyperplane counts and characteristic polynomials, plus an exact linear
/// isomorphism when the size allows the search.
pub fn identify_monomial_type(b: &Arrangement, r_max: usize) -> Result<Vec<MonomialType>> {
    let m = b.dim();
    if m < 2 {
        return Ok(vec![]);
    }
    let mut chi_b: Option<IntPoly> = None;
    let mut out = Vec::new();
    for r in 1..=r_max {
        for k in 0..=m {
            if k + r * m * (m - 1) / 2 != b.len() {
                continue;
            }
            let candidate = build_akl(k, m, r)?;
            let chi_b = chi_b.get_or_insert_with(|| characteristic_polynomial(b));
            if characteristic_polynomial(&candidate) != *chi_b {
                continue;
            }
            if m <= ISOMORPHISM_MAX_DIM
                && b.len() <= ISOMORPHISM_MAX_HYPERPLANES
                && !linearly_isomorphic(b, &candidate)?
            {
                continue;
            }
            out.push(MonomialType { k, m, r });
        }
    }
    Ok(out)
}

/// Coordinates of vectors with respect to a fixed list of independent rows.
struct Coordinates {
    echelon: CycloMatrix,
    pivots: Vec<usize>,
    transform: Vec<Vec<CycloNum>>,
}

impl Coordinates {
    /// `None` when the rows are dependent.
    fn new(rows: &[&[CycloNum]]) -> Option<Self> {
        let rho = rows.len();
        let n = rows.first()?.len();
        let field = rows[0][0].field().clone();
        let augmented = rows
            .iter()
            .enumerate()
            .map(|(s, row)| {
                let mut v = row.to_vec();
                v.extend((0..rho).map(|t| if s == t { field.one() } else { field.zero() }));
                v
            })
            .collect();
        let (rref, _) = CycloMatrix::from_rows(field.clone(), n + rho, augmented)
            .expect("uniform width")
            .echelon();
        let pivots = rref.pivots();
        if pivots.len() < rho || pivots.iter().any(|&p| p >= n) {
            return None;
        }
        let mut e_rows = Vec::with_capacity(rho);
        let mut transform = Vec::with_capacity(rho);
        for row in rref.row_iter() {
            e_rows.push(row[..n].to_vec());
            transform.push(row[n..].to_vec());
        }
        let echelon = CycloMatrix::from_rows(field, n, e_rows).expect("uniform width");
        Some(Self {
            echelon,
            pivots,
            transform,
        })
    }

    fn of(&self, v: &[CycloNum]) -> Option<Vec<CycloNum>> {
        if !self.echelon.contains_row(v) {
            return None;
        }
        let field = v[0].field().clone();
        let mut c = vec![field.zero(); self.transform.len()];
        for (i, &p) in self.pivots.iter().enumerate() {
            if v[p].is_zero() {
                continue;
            }
            for (cs, t) in c.iter_mut().zip(&self.transform[i]) {
                *cs = &*cs + &(&v[p] * t);
            }
        }
        Some(c)
    }
}

fn support(c: &[CycloNum]) -> Vec<usize> {
    c.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// Union-find over basis indices tracking the ratios λ_s / λ_parent.
#[derive(Clone)]
struct Ratios {
    parent: Vec<usize>,
    weight: Vec<CycloNum>,
}

impl Ratios {
    fn new(n: usize, field: &Arc<CycloField>) -> Self {
        Self {
            parent: (0..n).collect(),
            weight: vec![field.one(); n],
        }
    }

    fn find(&self, mut s: usize) -> (usize, CycloNum) {
        let mut w = self.weight[s].clone();
        while self.parent[s] != s {
            s = self.parent[s];
            w = &w * &self.weight[s];
        }
        (s, w)
    }

    /// Imposes λ_s = q·λ_t; false on contradiction.
    fn relate(&mut self, s: usize, t: usize, q: &CycloNum) -> bool {
        let (rs, ws) = self.find(s);
        let (rt, wt) = self.find(t);
        if rs == rt {
            return ws == q * &wt;
        }
        self.parent[rs] = rt;
        self.weight[rs] = &(q * &wt) / &ws;
        true
    }
}

/// Exact search for g ∈ GL with {β∘g} = {α} up to scalars, where β and α
/// range over the covectors of `b` and `a`.
pub fn linearly_isomorphic(b: &Arrangement, a: &Arrangement) -> Result<bool> {
    if b.dim() != a.dim() || b.len() != a.len() {
        return Ok(false);
    }
    if b.is_empty() {
        return Ok(true);
    }
    let (ob, oa) = (b.field().order(), a.field().order());
    let field = CycloField::new(ob.lcm(&oa))?;
    let beta: Vec<Vec<CycloNum>> = b.lift(&field)?.hyperplanes().iter().map(|h| h.covector().to_vec()).collect();
    let alpha: Vec<Vec<CycloNum>> = a.lift(&field)?.hyperplanes().iter().map(|h| h.covector().to_vec()).collect();
    if beta.len() != alpha.len() {
        // lifting never merges hyperplanes, but stay safe
        return Err(Error::InternalConsistency("lift changed hyperplane count".into()));
    }

    // Greedy basis of the β span.
    let mut basis_idx: Vec<usize> = Vec::new();
    let mut acc = CycloMatrix::zeros(field.clone(), 0, b.dim());
    for (j, v) in beta.iter().enumerate() {
        let (e, _) = acc.echelon();
        if !e.contains_row(v) {
            acc = acc.with_row(v)?;
            basis_idx.push(j);
        }
    }
    let rho = basis_idx.len();
    if a.rank() != rho {
        return Ok(false);
    }
    let rows: Vec<&[CycloNum]> = basis_idx.iter().map(|&j| beta[j].as_slice()).collect();
    let beta_coords: Vec<Vec<CycloNum>> = {
        let coords = Coordinates::new(&rows).expect("greedy basis is independent");
        beta.iter().map(|v| coords.of(v).expect("in span")).collect()
    };
    let others: Vec<usize> = (0..beta.len()).filter(|j| !basis_idx.contains(j)).collect();
    let mut beta_profile: Vec<usize> = others.iter().map(|&j| support(&beta_coords[j]).len()).collect();
    beta_profile.sort_unstable();

    let mut found = false;
    for_each_ordered_tuple(alpha.len(), rho, &mut |sigma| {
        let rows: Vec<&[CycloNum]> = sigma.iter().map(|&t| alpha[t].as_slice()).collect();
        let Some(coords) = Coordinates::new(&rows) else {
            return false;
        };
        let alpha_coords: Vec<Vec<CycloNum>> = alpha.iter().map(|v| coords.of(v).expect("same rank")).collect();
        let free: Vec<usize> = (0..alpha.len()).filter(|t| !sigma.contains(t)).collect();
        let mut profile: Vec<usize> = free.iter().map(|&t| support(&alpha_coords[t]).len()).collect();
        profile.sort_unstable();
        if profile != beta_profile {
            return false;
        }
        let mut used = vec![false; alpha.len()];
        for &t in sigma {
            used[t] = true;
        }
        let ratios = Ratios::new(rho, &field);
        if assign(&others, &beta_coords, &alpha_coords, &mut used, ratios) {
            found = true;
            return true;
        }
        false
    });
    Ok(found)
}

/// Backtracking over images of the non-basis β's.
fn assign(
    pending: &[usize],
    beta_coords: &[Vec<CycloNum>],
    alpha_coords: &[Vec<CycloNum>],
    used: &mut [bool],
    ratios: Ratios,
) -> bool {
    let Some((&j, rest)) = pending.split_first() else {
        return true;
    };
    let c = &beta_coords[j];
    let supp = support(c);
    for t in 0..alpha_coords.len() {
        if used[t] {
            continue;
        }
        let d = &alpha_coords[t];
        if support(d) != supp {
            continue;
        }
        let s0 = supp[0];
        let mut next = ratios.clone();
        // c_s λ_s ∝ d_s  ⇒  λ_s / λ_s0 = (d_s c_s0) / (d_s0 c_s)
        let ok = supp[1..].iter().all(|&s| {
            let q = &(&d[s] * &c[s0]) / &(&d[s0] * &c[s]);
            next.relate(s, s0, &q)
        });
        if !ok {
            continue;
        }
        used[t] = true;
        if assign(rest, beta_coords, alpha_coords, used, next) {
            return true;
        }
        used[t] = false;
    }
    false
}

/// Calls `f` on every ordered k-tuple of distinct indices below `n` until it
/// returns true.
fn for_each_ordered_tuple(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in 0..n {
            if cur.contains(&i) {
                continue;
            }
            cur.push(i);
            if go(n, k, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    go(n, k, &mut Vec::with_capacity(k), f);
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    /// Hyperplanes of the reflection arrangement containing the flat.
    pub flat: Vec<usize>,
    pub dim: usize,
    pub induced_count: usize,
    pub candidates: Vec<MonomialType>,
}

impl ScanRow {
    pub fn to_line(&self) -> String {
        let cands: Vec<String> = self.candidates.iter().map(ToString::to_string).collect();
        format!(
            "flat={} dim={} induced_count={} candidates=[{}]",
            index_list(&self.flat),
            self.dim,
            self.induced_count,
            cands.join(",")
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanTable {
    pub r: usize,
    pub p: usize,
    pub l: usize,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn unidentified(&self) -> Vec<&ScanRow> {
        self.rows.iter().filter(|row| row.candidates.is_empty()).collect()
    }

    /// Named failure listing every flat whose restriction was not identified.
    pub fn ensure_identified(&self) -> Result<()> {
        let bad = self.unidentified();
        if bad.is_empty() {
            return Ok(());
        }
        let flats: Vec<String> = bad.iter().map(|row| index_list(&row.flat)).collect();
        Err(Error::VerificationFailure(format!(
            "unidentified restrictions of A(G({},{},{})) on flats {}",
            self.r,
            self.p,
            self.l,
            flats.join(" ")
        )))
    }

    pub fn to_text(&self) -> String {
        self.rows.iter().map(|row| row.to_line() + "\n").collect()
    }
}

/// Rows for every flat of `a` of dimension at least `min_dim` (the ambient
/// space included), each with its induced arrangement identified.
pub fn restriction_rows(a: &Arrangement, min_dim: usize, r_max: usize) -> Result<Vec<ScanRow>> {
    let lattice = Lattice::of(a);
    let mut rows = BTreeMap::new();
    for y in lattice.flats().filter(|y| y.dim() >= min_dim.max(1)) {
        let induced = if y.rank() == 0 {
            a.clone()
        } else {
            restrict(a, y)?.induced
        };
        let candidates = identify_monomial_type(&induced, r_max)?;
        rows.insert(
            (y.rank(), y.containing().to_vec()),
            ScanRow {
                flat: y.containing().to_vec(),
                dim: y.dim(),
                induced_count: induced.len(),
                candidates,
            },
        );
    }
    Ok(rows.into_values().collect())
}

/// Restricts A(G(r,p,l)) to each of its flats of dimension at least two and
/// identifies every induced arrangement.
pub fn restriction_closure_scan(r: usize, p: usize, l: usize) -> Result<ScanTable> {
    let a = build_monomial_reflection(r, p, l)?;
    Ok(ScanTable {
        r,
        p,
        l,
        rows: restriction_rows(&a, 2, r)?,
    })
}
