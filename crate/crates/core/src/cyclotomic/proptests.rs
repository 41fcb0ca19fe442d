use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;

use super::*;

fn element(field: &Arc<CycloField>, raw: &[(i64, i64)]) -> CycloNum {
    let coeffs = raw
        .iter()
        .take(field.degree())
        .map(|&(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
        .collect();
    field.from_coeffs(coeffs)
}

fn raw_coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-20i64..=20, 1i64..=6), 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(r in 1u32..=12, a in raw_coeffs(), b in raw_coeffs(), c in raw_coeffs()) {
        let f = CycloField::new(r).unwrap();
        let (a, b, c) = (element(&f, &a), element(&f, &b), element(&f, &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
            prop_assert_eq!(&(&b / &a) * &a, b.clone());
        }
    }

    #[test]
    fn embedding_is_multiplicative(
        r in 1u32..=12,
        factors in prop::collection::vec(prop::collection::vec((-1i64..=1, 1i64..=2), 12), 1..=10),
        root in 1i64..12,
    ) {
        let f = CycloField::new(r).unwrap();
        let root = (1..=root).rev().find(|t| num_integer::Integer::gcd(t, &(r as i64)) == 1).unwrap_or(1);
        let elems: Vec<CycloNum> = factors.iter().map(|raw| element(&f, raw)).collect();
        let exact = elems.iter().fold(f.one(), |acc, x| &acc * x);
        let numeric = elems
            .iter()
            .map(|x| x.embed_complex(root).unwrap())
            .fold(Complex64::new(1.0, 0.0), |acc, x| acc * x);
        let scale = elems
            .iter()
            .map(|x| x.embed_complex(root).unwrap().norm().max(1.0))
            .product::<f64>();
        let diff = (exact.embed_complex(root).unwrap() - numeric).norm();
        prop_assert!(diff <= 1e-12 * scale, "diff {} scale {}", diff, scale);
    }

    #[test]
    fn echelon_is_idempotent(
        r in 1u32..=6,
        rows in 1usize..=6,
        cols in 1usize..=6,
        raw in prop::collection::vec(prop::collection::vec((-3i64..=3, 1i64..=2), 12), 36),
    ) {
        let f = CycloField::new(r).unwrap();
        let entries: Vec<CycloNum> = raw.iter().take(rows * cols).map(|x| element(&f, x)).collect();
        let m = CycloMatrix::new(f, rows, cols, entries).unwrap();
        let (e, rank) = m.echelon();
        let (e2, rank2) = e.echelon();
        prop_assert_eq!(&e, &e2);
        prop_assert_eq!(rank, rank2);
        prop_assert!(rank <= rows.min(cols));
        // same row space
        for row in m.row_iter() {
            prop_assert!(e.contains_row(row));
        }
    }
}
