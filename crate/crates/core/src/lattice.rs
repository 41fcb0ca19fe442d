//! Intersection lattice, Möbius function and characteristic polynomial.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::arrangement::Arrangement;
use crate::cyclotomic::{CycloMatrix, IntPoly};
use crate::error::{invalid, Result};
use crate::restriction::restrict;

/// Largest arrangement accepted by the subset-expansion route.
pub const SUBSET_EXPANSION_LIMIT: usize = 10;

/// An intersection of hyperplanes, identified by the reduced echelon basis of
/// the linear forms vanishing on it.
#[derive(Clone, Debug)]
pub struct Flat {
    basis: CycloMatrix,
    containing: Vec<usize>,
    mobius: Option<i64>,
}

impl Flat {
    /// The flat cut out by the hyperplanes at `indices`.
    pub fn from_hyperplanes(a: &Arrangement, indices: &[usize]) -> Result<Flat> {
        let mut forms = CycloMatrix::zeros(a.field().clone(), 0, a.dim());
        for &i in indices {
            let h = a
                .hyperplanes()
                .get(i)
                .ok_or_else(|| invalid(format!("no hyperplane with index {i}")))?;
            forms = forms.with_row(h.covector())?;
        }
        Ok(Self::from_forms(a, forms))
    }

    fn from_forms(a: &Arrangement, forms: CycloMatrix) -> Flat {
        let (basis, _) = forms.echelon();
        let containing = containing_set(a, &basis);
        Flat {
            basis,
            containing,
            mobius: None,
        }
    }

    pub fn basis(&self) -> &CycloMatrix {
        &self.basis
    }

    /// Codimension of the flat.
    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols() - self.basis.rows()
    }

    /// Sorted indices of the hyperplanes containing the flat.
    pub fn containing(&self) -> &[usize] {
        &self.containing
    }

    /// μ(ambient, self); `None` until the Möbius values are filled in.
    pub fn mobius(&self) -> Option<i64> {
        self.mobius
    }

    /// `self ⊇ other` as subspaces, i.e. `self` lies below `other` in L(A).
    pub fn lies_below(&self, other: &Flat) -> bool {
        other.basis.contains_row_space(&self.basis)
    }
}

fn containing_set(a: &Arrangement, basis: &CycloMatrix) -> Vec<usize> {
    a.hyperplanes()
        .iter()
        .enumerate()
        .filter(|(_, h)| basis.contains_row(h.covector()))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Debug)]
pub struct Lattice {
    arrangement: Arrangement,
    ranks: Vec<Vec<Flat>>,
}

impl Lattice {
    /// Builds the lattice and fills in the Möbius values.
    pub fn of(a: &Arrangement) -> Lattice {
        mobius(intersection_lattice(a))
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    /// Flats grouped by rank, starting with the ambient space.
    pub fn ranks(&self) -> &[Vec<Flat>] {
        &self.ranks
    }

    pub fn flats(&self) -> impl Iterator<Item = &Flat> {
        self.ranks.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.ranks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rank_sizes(&self) -> Vec<usize> {
        self.ranks.iter().map(Vec::len).collect()
    }

    /// The flat with the given echelon basis, if any.
    pub fn find(&self, basis: &CycloMatrix) -> Option<&Flat> {
        self.ranks
            .get(basis.rows())?
            .iter()
            .find(|f| &f.basis == basis)
    }

    /// Sorted multiset of (rank, μ) pairs, a cheap isomorphism invariant.
    pub fn mobius_profile(&self) -> Vec<(usize, i64)> {
        let mut v: Vec<(usize, i64)> = self
            .flats()
            .map(|f| (f.rank(), f.mobius.unwrap_or(0)))
            .collect();
        v.sort_unstable();
        v
    }

    /// One line per flat, `rank=<c> mobius=<m> hyperplanes=[i,j,...]`, sorted
    /// by rank and then by index list.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(usize, &[usize], Option<i64>)> = self
            .flats()
            .map(|f| (f.rank(), f.containing(), f.mobius))
            .collect();
        rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out = String::new();
        for (rank, idx, mu) in rows {
            let mu = mu.map_or_else(|| "?".to_string(), |m| m.to_string());
            let _ = writeln!(out, "rank={rank} mobius={mu} hyperplanes={}", index_list(idx));
        }
        out
    }
}

pub(crate) fn index_list(idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// All flats of `a`, built rank by rank by intersecting each flat with the
/// hyperplanes not containing it. Möbius values are left unset.
pub fn intersection_lattice(a: &Arrangement) -> Lattice {
    let ambient = Flat::from_forms(a, CycloMatrix::zeros(a.field().clone(), 0, a.dim()));
    let mut ranks = vec![vec![ambient]];
    loop {
        let current = ranks.last().expect("rank 0 is always present");
        let mut seen: HashMap<CycloMatrix, ()> = HashMap::new();
        let mut next = Vec::new();
        for flat in current {
            for (i, h) in a.hyperplanes().iter().enumerate() {
                if flat.containing.binary_search(&i).is_ok() {
                    continue;
                }
                let forms = flat.basis.with_row(h.covector()).expect("same width");
                let (basis, _) = forms.echelon();
                if seen.contains_key(&basis) {
                    continue;
                }
                let containing = containing_set(a, &basis);
                seen.insert(basis.clone(), ());
                next.push(Flat {
                    basis,
                    containing,
                    mobius: None,
                });
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(|x, y| x.containing.cmp(&y.containing));
        ranks.push(next);
    }
    Lattice {
        arrangement: a.clone(),
        ranks,
    }
}

/// Fills μ(ambient, Y) for every flat by the recursion
/// μ(Y) = -Σ_{X strictly below Y} μ(X).
pub fn mobius(mut lattice: Lattice) -> Lattice {
    lattice.ranks[0][0].mobius = Some(1);
    for c in 1..lattice.ranks.len() {
        let (lower, upper) = lattice.ranks.split_at_mut(c);
        for y in upper[0].iter_mut() {
            let s: i64 = lower
                .iter()
                .flatten()
                .filter(|x| x.lies_below(y))
                .map(|x| x.mobius.expect("lower ranks are filled first"))
                .sum();
            y.mobius = Some(-s);
        }
    }
    lattice
}

/// χ(A, t) = Σ_X μ(X) t^{dim X}.
pub fn characteristic_polynomial(a: &Arrangement) -> IntPoly {
    lattice_characteristic_polynomial(&Lattice::of(a))
}

pub fn lattice_characteristic_polynomial(lattice: &Lattice) -> IntPoly {
    let dim = lattice.arrangement.dim();
    let mut coeffs = vec![0i64; dim + 1];
    for f in lattice.flats() {
        coeffs[f.dim()] += f.mobius.expect("Möbius values must be filled");
    }
    IntPoly::new(coeffs)
}

/// χ(A, t) by Whitney's subset expansion Σ_S (-1)^{|S|} t^{dim - rank S}.
/// Exponential in |A|; refuses arrangements above [`SUBSET_EXPANSION_LIMIT`].
pub fn characteristic_polynomial_by_subsets(a: &Arrangement) -> Result<IntPoly> {
    let n = a.len();
    if n > SUBSET_EXPANSION_LIMIT {
        return Err(invalid(format!(
            "subset expansion is capped at {SUBSET_EXPANSION_LIMIT} hyperplanes (got {n})"
        )));
    }
    let mut coeffs = vec![0i64; a.dim() + 1];
    for mask in 0u32..(1 << n) {
        let rows = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| a.hyperplanes()[i].covector().to_vec())
            .collect();
        let m = CycloMatrix::from_rows(a.field().clone(), a.dim(), rows)?;
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        coeffs[a.dim() - m.rank()] += sign;
    }
    Ok(IntPoly::new(coeffs))
}

/// Deletion–restriction: χ(A) = χ(A \ H) - χ(A^H) for the hyperplane at
/// `index`.
pub fn triple_check(a: &Arrangement, index: usize) -> Result<bool> {
    let deleted = a.deletion(index)?;
    let chi_restricted = if a.dim() == 1 {
        // H is the origin; the induced arrangement lives on a point.
        IntPoly::new(vec![1])
    } else {
        let flat = Flat::from_hyperplanes(a, &[index])?;
        let induced = restrict(a, &flat)?.induced;
        characteristic_polynomial(&induced)
    };
    let rhs = &characteristic_polynomial(&deleted) - &chi_restricted;
    Ok(characteristic_polynomial(a) == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::build_akl;
    use crate::cyclotomic::{CycloField, FieldExt};

    #[test]
    fn three_lines_in_the_plane() {
        let l = Lattice::of(&build_akl(2, 2, 1).unwrap());
        assert_eq!(l.rank_sizes(), vec![1, 3, 1]);
        assert!(l.ranks()[1].iter().all(|f| f.mobius() == Some(-1)));
        assert_eq!(l.ranks()[2][0].mobius(), Some(2));
        assert_eq!(l.ranks()[2][0].containing(), &[0, 1, 2]);
    }

    #[test]
    fn braid_in_three_space() {
        let l = Lattice::of(&build_akl(0, 3, 1).unwrap());
        assert_eq!(l.rank_sizes(), vec![1, 3, 1]);
        assert_eq!(l.ranks()[2][0].dim(), 1);
    }

    #[test]
    fn two_lines() {
        let a = build_akl(0, 2, 2).unwrap();
        let l = Lattice::of(&a);
        assert_eq!(l.rank_sizes(), vec![1, 2, 1]);
        assert_eq!(l.ranks()[2][0].mobius(), Some(1));
        assert_eq!(characteristic_polynomial(&a).coeffs(), &[1, -2, 1]);
    }

    #[test]
    fn characteristic_polynomials() {
        let chi = characteristic_polynomial(&build_akl(2, 2, 1).unwrap());
        assert_eq!(chi.display_in("t"), "t^2 - 3t + 2");
        let f = CycloField::new(1).unwrap();
        let empty = Arrangement::empty(2, f, "empty");
        assert_eq!(characteristic_polynomial(&empty).coeffs(), &[0, 0, 1]);
    }

    #[test]
    fn unfilled_lattice_has_no_mobius_values() {
        let l = intersection_lattice(&build_akl(1, 2, 1).unwrap());
        assert!(l.flats().all(|f| f.mobius().is_none()));
        let text = l.to_text();
        assert!(text.starts_with("rank=0 mobius=? hyperplanes=[]"));
    }

    #[test]
    fn text_form() {
        let l = Lattice::of(&build_akl(2, 2, 1).unwrap());
        assert_eq!(
            l.to_text(),
            "rank=0 mobius=1 hyperplanes=[]\n\
             rank=1 mobius=-1 hyperplanes=[0]\n\
             rank=1 mobius=-1 hyperplanes=[1]\n\
             rank=1 mobius=-1 hyperplanes=[2]\n\
             rank=2 mobius=2 hyperplanes=[0,1,2]\n"
        );
    }

    #[test]
    fn deletion_restriction_examples() {
        let a = build_akl(2, 2, 1).unwrap();
        assert!(triple_check(&a, 0).unwrap());
        let b = build_akl(0, 3, 2).unwrap();
        for i in 0..b.len() {
            assert!(triple_check(&b, i).unwrap());
        }
        assert!(triple_check(&a, 7).is_err());

        let f = CycloField::new(1).unwrap();
        let single = Arrangement::new(3, f.clone(), vec![vec![f.one(), f.zero(), f.zero()]], "h").unwrap();
        assert!(triple_check(&single, 0).unwrap());
        let line = Arrangement::new(1, f.clone(), vec![vec![f.one()]], "pt").unwrap();
        assert!(triple_check(&line, 0).unwrap());
    }

    #[test]
    fn subset_expansion_cap() {
        assert!(characteristic_polynomial_by_subsets(&build_akl(2, 3, 3).unwrap()).is_err());
    }

    #[test]
    fn flats_from_hyperplanes_are_closed() {
        let a = build_akl(0, 3, 2).unwrap();
        // y1 = y2 and y1 = -y2 force y1 = y2 = 0, which also lies on nothing else
        let f = Flat::from_hyperplanes(&a, &[0, 1]).unwrap();
        assert_eq!(f.rank(), 2);
        assert_eq!(f.containing(), &[0, 1]);
        let l = Lattice::of(&a);
        assert!(l.find(f.basis()).is_some());
    }
}
