use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{invalid, Error, Result};

/// Dense univariate polynomial with `i64` coefficients, stored in ascending
/// degree order with no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    /// `c * x^degree`
    pub fn monomial(c: i64, degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero past the end.
    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn eval(&self, x: i64) -> i128 {
        self.coeffs
            .iter()
            .rev()
            .fold(0i128, |acc, &c| acc * x as i128 + c as i128)
    }

    /// Exact division by a monic divisor. Fails when the remainder is nonzero.
    pub fn div_exact(&self, divisor: &IntPoly) -> Result<IntPoly> {
        if !divisor.is_monic() {
            return Err(invalid("exact division requires a monic divisor"));
        }
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return if self.is_zero() {
                Ok(IntPoly::zero())
            } else {
                Err(Error::Arithmetic("division leaves a remainder".into()))
            };
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0i64; rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd];
            quot[i] = c;
            if c != 0 {
                for (j, &dj) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= c * dj;
                }
            }
        }
        if rem.iter().any(|&c| c != 0) {
            return Err(Error::Arithmetic("division leaves a remainder".into()));
        }
        Ok(IntPoly::new(quot))
    }

    /// Renders the polynomial in descending degree with the given variable
    /// name, e.g. `t^2 - 3t + 2`.
    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (deg, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(if c < 0 { " - " } else { " + " });
            }
            if mag != 1 || deg == 0 {
                out.push_str(&mag.to_string());
            }
            match deg {
                0 => {}
                1 => out.push_str(var),
                _ => {
                    out.push_str(var);
                    out.push('^');
                    out.push_str(&deg.to_string());
                }
            }
        }
        out
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("x"))
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![0i64; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

pub(crate) fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// The `r`-th cyclotomic polynomial, obtained by dividing `x^r - 1` by the
/// cyclotomic polynomials of the proper divisors of `r`.
pub fn cyclotomic_polynomial(r: u32) -> Result<IntPoly> {
    if r == 0 {
        return Err(invalid("cyclotomic order must be at least 1"));
    }
    let mut table: BTreeMap<u32, IntPoly> = BTreeMap::new();
    for d in divisors(r) {
        let mut x_d_minus_one = IntPoly::monomial(1, d as usize);
        x_d_minus_one.coeffs[0] = -1;
        let mut phi = x_d_minus_one;
        for e in divisors(d).into_iter().filter(|&e| e < d) {
            phi = phi.div_exact(&table[&e])?;
        }
        table.insert(d, phi);
    }
    Ok(table.remove(&r).expect("r divides itself"))
}
