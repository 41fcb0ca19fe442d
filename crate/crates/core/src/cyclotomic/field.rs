use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{cyclotomic_polynomial, IntPoly};
use super::Rational;
use crate::error::{invalid, Error, Result};

/// The cyclotomic field Q(ζ_r), presented as Q[x] / Φ_r(x).
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct CycloField {
    order: u32,
    phi: IntPoly,
    degree: usize,
}

impl CycloField {
    pub fn new(order: u32) -> Result<Arc<Self>> {
        let phi = cyclotomic_polynomial(order)?;
        let degree = phi.degree().expect("cyclotomic polynomials are nonzero");
        Ok(Arc::new(Self { order, phi, degree }))
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn phi(&self) -> &IntPoly {
        &self.phi
    }

    /// Euler phi of the order.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Reduces an arbitrary-length coefficient vector modulo Φ_r.
    fn reduce(&self, mut v: Vec<Rational>) -> Vec<Rational> {
        let deg = self.degree;
        for i in (deg..v.len()).rev() {
            let c = std::mem::replace(&mut v[i], Rational::zero());
            if c.is_zero() {
                continue;
            }
            for j in 0..deg {
                let pj = self.phi.coeff(j);
                if pj != 0 {
                    v[i - deg + j] -= &c * Rational::from_integer(BigInt::from(pj));
                }
            }
        }
        v.resize(deg, Rational::zero());
        v
    }
}

pub trait FieldExt {
    fn zero(&self) -> CycloNum;
    fn one(&self) -> CycloNum;
    fn from_rational(&self, q: Rational) -> CycloNum;
    fn from_int(&self, n: i64) -> CycloNum;
    /// ζ_r^t for any integer `t`.
    fn zeta_pow(&self, t: i64) -> CycloNum;
    fn from_coeffs(&self, coeffs: Vec<Rational>) -> CycloNum;
}

impl FieldExt for Arc<CycloField> {
    fn zero(&self) -> CycloNum {
        CycloNum {
            field: self.clone(),
            coeffs: vec![Rational::zero(); self.degree],
        }
    }

    fn one(&self) -> CycloNum {
        self.from_int(1)
    }

    fn from_rational(&self, q: Rational) -> CycloNum {
        let mut z = self.zero();
        z.coeffs[0] = q;
        z
    }

    fn from_int(&self, n: i64) -> CycloNum {
        self.from_rational(Rational::from_integer(BigInt::from(n)))
    }

    fn zeta_pow(&self, t: i64) -> CycloNum {
        let e = t.rem_euclid(self.order as i64) as usize;
        let mut v = vec![Rational::zero(); e + 1];
        v[e] = Rational::one();
        self.from_coeffs(v)
    }

    /// Builds the element represented by the polynomial `Σ c_i x^i`, reducing
    /// it modulo Φ_r.
    fn from_coeffs(&self, coeffs: Vec<Rational>) -> CycloNum {
        CycloNum {
            field: self.clone(),
            coeffs: self.reduce(coeffs),
        }
    }
}

/// An exact element of Q(ζ_r), stored as its canonical representative of
/// degree below φ(r).
#[derive(Clone, Debug)]
pub struct CycloNum {
    field: Arc<CycloField>,
    coeffs: Vec<Rational>,
}

impl CycloNum {
    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    fn check_field(&self, other: &CycloNum) -> Result<()> {
        if self.field.order != other.field.order {
            return Err(invalid(format!(
                "field mismatch: Q(ζ_{}) vs Q(ζ_{})",
                self.field.order, other.field.order
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &CycloNum) -> Result<CycloNum> {
        self.check_field(other)?;
        Ok(CycloNum {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &CycloNum) -> Result<CycloNum> {
        self.check_field(other)?;
        Ok(CycloNum {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &CycloNum) -> Result<CycloNum> {
        self.check_field(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(self.field.zero());
        }
        let n = self.coeffs.len();
        let mut prod = vec![Rational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(self.field.from_coeffs(prod))
    }

    pub fn try_div(&self, other: &CycloNum) -> Result<CycloNum> {
        self.check_field(other)?;
        self.try_mul(&other.inv()?)
    }

    pub fn scale(&self, q: &Rational) -> CycloNum {
        CycloNum {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against Φ_r.
    pub fn inv(&self) -> Result<CycloNum> {
        if self.is_zero() {
            return Err(Error::Arithmetic("division by zero".into()));
        }
        let phi: Vec<Rational> = self
            .field
            .phi
            .coeffs()
            .iter()
            .map(|&c| Rational::from_integer(BigInt::from(c)))
            .collect();
        let (g, s) = ext_gcd_left(trimmed(self.coeffs.clone()), phi);
        // Φ_r is irreducible, so the gcd with a nonzero residue is a unit.
        debug_assert_eq!(g.len(), 1);
        let g0 = g[0].clone();
        Ok(self.field.from_coeffs(s).scale(&g0.recip()))
    }

    pub fn pow(&self, mut e: u32) -> CycloNum {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Evaluates the representative at exp(2πi·root_index/r).
    pub fn embed_complex(&self, root_index: i64) -> Result<Complex64> {
        let r = self.field.order as i64;
        if root_index.gcd(&r) != 1 {
            return Err(invalid(format!(
                "root index {root_index} is not coprime to {r}"
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (root_index * j as i64).rem_euclid(r);
            let angle = 2.0 * std::f64::consts::PI * e as f64 / r as f64;
            acc += Complex64::from_polar(rational_to_f64(c), angle);
        }
        Ok(acc)
    }

    /// Image under the inclusion Q(ζ_a) → Q(ζ_n) sending ζ_a to ζ_n^{n/a}.
    pub fn lift(&self, target: &Arc<CycloField>) -> Result<CycloNum> {
        let (a, n) = (self.field.order, target.order);
        if n % a != 0 {
            return Err(invalid(format!(
                "Q(ζ_{a}) does not embed in Q(ζ_{n})"
            )));
        }
        let step = (n / a) as usize;
        let mut v = vec![Rational::zero(); step * self.coeffs.len().max(1)];
        for (j, c) in self.coeffs.iter().enumerate() {
            v[j * step] = c.clone();
        }
        Ok(target.from_coeffs(v))
    }
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 can fail on huge operands; fall back to a scaled quotient.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn trimmed(mut v: Vec<Rational>) -> Vec<Rational> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

fn poly_divrem(num: &[Rational], den: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return (vec![], trimmed(rem));
    }
    let lead = den[dd].clone();
    let mut quot = vec![Rational::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + dd] / &lead;
        if !c.is_zero() {
            for (j, dj) in den.iter().enumerate() {
                rem[i + j] -= &c * dj;
            }
        }
        quot[i] = c;
    }
    (trimmed(quot), trimmed(rem))
}

fn poly_sub_mul(a: &[Rational], q: &[Rational], b: &[Rational]) -> Vec<Rational> {
    // a - q*b
    let n = a.len().max(if q.is_empty() || b.is_empty() { 0 } else { q.len() + b.len() - 1 });
    let mut out = vec![Rational::zero(); n];
    for (i, c) in a.iter().enumerate() {
        out[i] = c.clone();
    }
    for (i, qi) in q.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] -= qi * bj;
        }
    }
    trimmed(out)
}

/// Returns `(g, s)` with `s·a ≡ g (mod m)` and `g = gcd(a, m)`.
fn ext_gcd_left(a: Vec<Rational>, m: Vec<Rational>) -> (Vec<Rational>, Vec<Rational>) {
    let (mut r0, mut r1) = (a, trimmed(m));
    let (mut s0, mut s1) = (vec![Rational::one()], Vec::<Rational>::new());
    while !r1.is_empty() {
        let (q, r) = poly_divrem(&r0, &r1);
        let s = poly_sub_mul(&s0, &q, &s1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    (r0, s0)
}

impl PartialEq for CycloNum {
    fn eq(&self, other: &Self) -> bool {
        self.field.order == other.field.order && self.coeffs == other.coeffs
    }
}

impl Eq for CycloNum {}

impl Hash for CycloNum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.order.hash(state);
        self.coeffs.hash(state);
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait for &CycloNum {
            type Output = CycloNum;
            /// Panics when the operands live in different fields.
            fn $method(self, rhs: &CycloNum) -> CycloNum {
                self.$try(rhs).expect("cyclotomic operands must share a field")
            }
        }
        impl $trait for CycloNum {
            type Output = CycloNum;
            fn $method(self, rhs: CycloNum) -> CycloNum {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl Neg for &CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        CycloNum {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        -&self
    }
}

impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let show_mag = j == 0 || !mag.is_one();
            if show_mag {
                write!(f, "{mag}")?;
            }
            match j {
                0 => {}
                1 => f.write_str("ζ")?,
                _ => write!(f, "ζ^{j}")?,
            }
        }
        Ok(())
    }
}
