//! Exact central hyperplane arrangements over Q(ζ_r).
//!
//! Every hyperplane is stored as a covector whose first nonzero coefficient is
//! one, so two hyperplanes coincide exactly when their covectors are equal.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cyclotomic::{CycloField, CycloMatrix, CycloNum, FieldExt, Rational};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    covector: Vec<CycloNum>,
}

impl Hyperplane {
    /// Normalizes `covector` so that its first nonzero entry is one.
    pub fn new(covector: Vec<CycloNum>) -> Result<Self> {
        let lead = covector
            .iter()
            .find(|c| !c.is_zero())
            .ok_or_else(|| invalid("the zero covector does not define a hyperplane"))?;
        if lead.is_one() {
            return Ok(Self { covector });
        }
        let inv = lead.inv()?;
        Ok(Self {
            covector: covector.iter().map(|c| c * &inv).collect(),
        })
    }

    pub fn covector(&self) -> &[CycloNum] {
        &self.covector
    }

    pub fn dim(&self) -> usize {
        self.covector.len()
    }

    /// Covector under the embedding ζ_r ↦ exp(2πi/r).
    pub fn to_complex(&self) -> Vec<Complex64> {
        self.covector
            .iter()
            .map(|c| c.embed_complex(1).expect("1 is coprime to every order"))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Arrangement {
    dim: usize,
    field: Arc<CycloField>,
    hyperplanes: Vec<Hyperplane>,
    label: String,
}

impl Arrangement {
    /// Builds an arrangement from raw covectors, normalizing each and dropping
    /// repeats while keeping first-occurrence order.
    pub fn new(
        dim: usize,
        field: Arc<CycloField>,
        covectors: Vec<Vec<CycloNum>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut hyperplanes = Vec::with_capacity(covectors.len());
        for c in covectors {
            if c.len() != dim {
                return Err(invalid(format!(
                    "covector of length {} in dimension {dim}",
                    c.len()
                )));
            }
            if c.iter().any(|x| x.field().order() != field.order()) {
                return Err(invalid("covector entries must lie in the arrangement field"));
            }
            let h = Hyperplane::new(c)?;
            if seen.insert(h.clone()) {
                hyperplanes.push(h);
            }
        }
        Ok(Self {
            dim,
            field,
            hyperplanes,
            label: label.into(),
        })
    }

    pub fn empty(dim: usize, field: Arc<CycloField>, label: impl Into<String>) -> Self {
        Self {
            dim,
            field,
            hyperplanes: vec![],
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn index_of(&self, h: &Hyperplane) -> Option<usize> {
        self.hyperplanes.iter().position(|x| x == h)
    }

    /// Matrix whose rows are the covectors.
    pub fn covector_matrix(&self) -> CycloMatrix {
        let rows = self.hyperplanes.iter().map(|h| h.covector.clone()).collect();
        CycloMatrix::from_rows(self.field.clone(), self.dim, rows).expect("covector lengths agree")
    }

    /// Rank of the arrangement, i.e. the codimension of the common intersection.
    pub fn rank(&self) -> usize {
        self.covector_matrix().rank()
    }

    /// True iff the hyperplanes meet only in the origin.
    pub fn is_essential(&self) -> bool {
        self.dim >= 1 && self.rank() == self.dim
    }

    /// The arrangement with the hyperplane at `index` removed.
    pub fn deletion(&self, index: usize) -> Result<Arrangement> {
        if index >= self.len() {
            return Err(invalid(format!("no hyperplane with index {index}")));
        }
        let mut out = self.clone();
        out.hyperplanes.remove(index);
        out.label = format!("{} minus H{index}", self.label);
        Ok(out)
    }

    /// Relabels coordinates: coordinate `i` moves to position `perm[i]`.
    pub fn permute_coordinates(&self, perm: &[usize]) -> Result<Arrangement> {
        check_permutation(perm, self.dim)?;
        let covectors = self
            .hyperplanes
            .iter()
            .map(|h| {
                let mut c = vec![self.field.zero(); self.dim];
                for (i, x) in h.covector.iter().enumerate() {
                    c[perm[i]] = x.clone();
                }
                c
            })
            .collect();
        Arrangement::new(self.dim, self.field.clone(), covectors, self.label.clone())
    }

    /// Equality of hyperplane sets, ignoring order and label.
    pub fn same_hyperplanes(&self, other: &Arrangement) -> bool {
        if self.dim != other.dim || self.field.order() != other.field.order() || self.len() != other.len() {
            return false;
        }
        let ours: HashSet<&Hyperplane> = self.hyperplanes.iter().collect();
        other.hyperplanes.iter().all(|h| ours.contains(h))
    }

    /// The same hyperplanes over a larger cyclotomic field.
    pub fn lift(&self, target: &Arc<CycloField>) -> Result<Arrangement> {
        let covectors = self
            .hyperplanes
            .iter()
            .map(|h| h.covector.iter().map(|c| c.lift(target)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Arrangement::new(self.dim, target.clone(), covectors, self.label.clone())
    }

    /// Canonical text form: a header line followed by one line per hyperplane,
    /// each coordinate written as its bracketed rational coefficient vector in
    /// the power basis of ζ_r.
    pub fn to_canonical_text(&self) -> String {
        let mut out = format!(
            "arrangement dim={} r={} count={}\n",
            self.dim,
            self.field.order(),
            self.len()
        );
        for h in &self.hyperplanes {
            let cells: Vec<String> = h
                .covector
                .iter()
                .map(|c| {
                    let parts: Vec<String> = c.coeffs().iter().map(ToString::to_string).collect();
                    format!("[{}]", parts.join(","))
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    /// Parses the canonical text form. Only canonical input is accepted, so
    /// `parse(s).to_canonical_text() == s` whenever parsing succeeds.
    pub fn from_canonical_text(text: &str) -> Result<Arrangement> {
        let perr = |line: usize, detail: &str| Error::Parse {
            line,
            detail: detail.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| perr(1, "empty input"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let value = |i: usize, key: &str| -> Result<usize> {
            fields
                .get(i)
                .and_then(|s| s.strip_prefix(key))
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| perr(1, &format!("expected {key}<n>")))
        };
        if fields.len() != 4 || fields[0] != "arrangement" {
            return Err(perr(1, "malformed header"));
        }
        let dim = value(1, "dim=")?;
        let r = value(2, "r=")?;
        let count = value(3, "count=")?;
        let field = CycloField::new(u32::try_from(r).map_err(|_| perr(1, "order too large"))?)
            .map_err(|e| perr(1, &e.to_string()))?;
        let mut covectors = Vec::with_capacity(count);
        for (n, line) in lines.enumerate() {
            let lineno = n + 2;
            let cells: Vec<&str> = line.split(' ').collect();
            if cells.len() != dim {
                return Err(perr(lineno, "wrong number of coordinates"));
            }
            let mut cov = Vec::with_capacity(dim);
            for cell in cells {
                let inner = cell
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| perr(lineno, "coordinate must be bracketed"))?;
                let coeffs = inner
                    .split(',')
                    .map(Rational::from_str)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| perr(lineno, "bad rational"))?;
                if coeffs.len() != field.degree() {
                    return Err(perr(lineno, "coefficient vector has the wrong length"));
                }
                cov.push(field.from_coeffs(coeffs));
            }
            covectors.push(cov);
        }
        if covectors.len() != count {
            return Err(perr(1, "hyperplane count does not match header"));
        }
        let arr = Arrangement::new(dim, field, covectors, "parsed")
            .map_err(|e| perr(0, &e.to_string()))?;
        if arr.to_canonical_text() != text {
            return Err(perr(0, "input is not in canonical form"));
        }
        Ok(arr)
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(invalid("permutation has the wrong length"));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(invalid("not a permutation"));
        }
    }
    Ok(())
}

fn unit_covector(field: &Arc<CycloField>, dim: usize, i: usize) -> Vec<CycloNum> {
    let mut c = vec![field.zero(); dim];
    c[i] = field.one();
    c
}

/// A^k_l(r): the coordinate hyperplanes y_a = 0 for a ≤ k together with
/// y_i = ζ y_j for i < j and every r-th root of unity ζ.
///
/// Ordering is coordinate hyperplanes first, then pairs (i, j) in
/// lexicographic order, then ζ = ζ_r^t with t ascending.
pub fn build_akl(k: usize, l: usize, r: usize) -> Result<Arrangement> {
    if l < 2 || k > l || r == 0 {
        return Err(invalid(format!(
            "A^k_l(r) needs l >= 2, 0 <= k <= l, r >= 1 (got k={k}, l={l}, r={r})"
        )));
    }
    let field = CycloField::new(u32::try_from(r).map_err(|_| invalid("r too large"))?)?;
    let mut covectors: Vec<Vec<CycloNum>> = (0..k).map(|a| unit_covector(&field, l, a)).collect();
    for i in 0..l {
        for j in i + 1..l {
            for t in 0..r {
                let mut c = vec![field.zero(); l];
                c[i] = field.one();
                c[j] = -field.zeta_pow(t as i64);
                covectors.push(c);
            }
        }
    }
    Arrangement::new(l, field, covectors, format!("A^{k}_{l}({r})"))
}

/// The braid arrangement A_{l-1} in the coordinates z_i = x_i - x_l, which
/// is A^{l-1}_{l-1}(1). For l = 2 this is the single hyperplane z_1 = 0.
pub fn build_braid(l: usize) -> Result<Arrangement> {
    if l < 2 {
        return Err(invalid(format!("braid arrangement needs l >= 2 (got {l})")));
    }
    if l == 2 {
        let field = CycloField::new(1)?;
        return Arrangement::new(1, field.clone(), vec![vec![field.one()]], "A_1");
    }
    let mut a = build_akl(l - 1, l - 1, 1)?;
    a.label = format!("A_{}", l - 1);
    Ok(a)
}

/// Reflection arrangement of the monomial group G(r, p, l).
pub fn build_monomial_reflection(r: usize, p: usize, l: usize) -> Result<Arrangement> {
    if r == 0 || p == 0 || r % p != 0 {
        return Err(invalid(format!("G(r,p,l) needs p | r (got r={r}, p={p})")));
    }
    let k = if p < r { l } else { 0 };
    let mut a = build_akl(k, l, r)?;
    a.label = format!("A(G({r},{p},{l}))");
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a222_one() {
        let a = build_akl(2, 2, 1).unwrap();
        assert_eq!(a.len(), 3);
        let f = a.field().clone();
        let expected = vec![
            vec![f.one(), f.zero()],
            vec![f.zero(), f.one()],
            vec![f.one(), f.from_int(-1)],
        ];
        let covs: Vec<Vec<CycloNum>> = a.hyperplanes().iter().map(|h| h.covector().to_vec()).collect();
        assert_eq!(covs, expected);
    }

    #[test]
    fn counts() {
        assert_eq!(build_akl(0, 3, 1).unwrap().len(), 3);
        assert_eq!(build_akl(1, 3, 2).unwrap().len(), 7);
        for l in 2..=5 {
            for k in 0..=l {
                for r in 1..=4 {
                    let a = build_akl(k, l, r).unwrap();
                    assert_eq!(a.len(), k + r * l * (l - 1) / 2);
                    let distinct: HashSet<_> = a.hyperplanes().iter().collect();
                    assert_eq!(distinct.len(), a.len());
                }
            }
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(build_akl(3, 2, 1).is_err());
        assert!(build_akl(0, 1, 1).is_err());
        assert!(build_akl(0, 2, 0).is_err());
        assert!(build_braid(1).is_err());
        assert!(build_monomial_reflection(4, 3, 2).is_err());
    }

    #[test]
    fn braid_arrangements() {
        let b2 = build_braid(2).unwrap();
        assert_eq!((b2.dim(), b2.len()), (1, 1));
        let b3 = build_braid(3).unwrap();
        assert_eq!((b3.dim(), b3.len()), (2, 3));
        assert!(b3.same_hyperplanes(&build_akl(2, 2, 1).unwrap()));
        assert_eq!(build_braid(4).unwrap().len(), 6);
    }

    #[test]
    fn monomial_reflection_arrangements() {
        assert_eq!(build_monomial_reflection(2, 1, 2).unwrap().len(), 4);
        assert_eq!(build_monomial_reflection(2, 2, 2).unwrap().len(), 2);
        assert_eq!(build_monomial_reflection(3, 3, 3).unwrap().len(), 9);
        for r in 1..=4 {
            for l in 2..=4 {
                // G(1,1,l) is the symmetric group, whose arrangement has no
                // coordinate hyperplanes
                let full = build_monomial_reflection(r, 1, l).unwrap();
                let k = if r == 1 { 0 } else { l };
                assert!(full.same_hyperplanes(&build_akl(k, l, r).unwrap()));
                let reduced = build_monomial_reflection(r, r, l).unwrap();
                assert!(reduced.same_hyperplanes(&build_akl(0, l, r).unwrap()));
            }
        }
    }

    #[test]
    fn essentiality() {
        assert!(!build_akl(0, 3, 1).unwrap().is_essential());
        assert!(build_akl(0, 2, 2).unwrap().is_essential());
        assert!(build_akl(2, 2, 1).unwrap().is_essential());
        let f = CycloField::new(1).unwrap();
        assert!(!Arrangement::empty(2, f, "empty").is_essential());
    }

    #[test]
    fn normalization_deduplicates() {
        let f = CycloField::new(3).unwrap();
        let z = f.zeta_pow(1);
        let a = Arrangement::new(
            2,
            f.clone(),
            vec![vec![z.clone(), f.one()], vec![f.one(), f.zeta_pow(2)]],
            "t",
        )
        .unwrap();
        assert_eq!(a.len(), 1);
        assert!(a.hyperplanes()[0].covector()[0].is_one());
        assert!(Arrangement::new(2, f.clone(), vec![vec![f.zero(), f.zero()]], "z").is_err());
    }

    #[test]
    fn coordinate_symmetries_preserve_akl() {
        for (k, l, r) in [(2, 4, 2), (1, 3, 3), (3, 4, 1), (0, 4, 3)] {
            let a = build_akl(k, l, r).unwrap();
            let mut perm: Vec<usize> = (0..l).collect();
            if k >= 2 {
                perm.swap(0, k - 1);
                assert!(a.permute_coordinates(&perm).unwrap().same_hyperplanes(&a));
            }
            let mut perm: Vec<usize> = (0..l).collect();
            if l - k >= 2 {
                perm[k..].rotate_left(1);
                assert!(a.permute_coordinates(&perm).unwrap().same_hyperplanes(&a));
            }
        }
        // mixing the two blocks is not a symmetry when 0 < k < l
        let a = build_akl(1, 3, 2).unwrap();
        assert!(!a.permute_coordinates(&[2, 1, 0]).unwrap().same_hyperplanes(&a));
    }

    #[test]
    fn canonical_text_round_trip() {
        let a = build_akl(1, 3, 3).unwrap();
        let text = a.to_canonical_text();
        assert!(text.starts_with("arrangement dim=3 r=3 count=10\n"));
        let b = Arrangement::from_canonical_text(&text).unwrap();
        assert!(a.same_hyperplanes(&b));
        assert_eq!(b.to_canonical_text(), text);

        let small = build_akl(2, 2, 1).unwrap().to_canonical_text();
        assert_eq!(small, "arrangement dim=2 r=1 count=3\n[1] [0]\n[0] [1]\n[1] [-1]\n");
    }

    #[test]
    fn non_canonical_text_rejected() {
        assert!(Arrangement::from_canonical_text("arrangement dim=2 r=1 count=1\n[2] [0]\n").is_err());
        assert!(Arrangement::from_canonical_text("arrangement dim=2 r=1 count=2\n[1] [0]\n").is_err());
        assert!(Arrangement::from_canonical_text("arrangement dim=2 r=3 count=1\n[1] [0]\n").is_err());
        assert!(Arrangement::from_canonical_text("").is_err());
    }
}
