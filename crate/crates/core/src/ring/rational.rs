use super::modular::inv_mod;
use super::poly::PolyFp;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Dense square matrix over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    n: usize,
    data: Vec<Q>,
}

impl QMatrix {
    pub fn zero(n: usize) -> Self {
        QMatrix {
            n,
            data: vec![Q::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.data[i * n + i] = Q::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Q) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        QMatrix { n, data }
    }

    pub fn from_int<const N: usize>(m: &[[i64; N]; N]) -> Self {
        Self::from_fn(N, |i, j| q_int(m[i][j]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, o: &QMatrix) -> QMatrix {
        let n = self.n;
        Self::from_fn(n, |i, j| {
            (0..n).fold(Q::zero(), |acc, k| acc + self.get(i, k) * o.get(k, j))
        })
    }

    pub fn add(&self, o: &QMatrix) -> QMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn sub(&self, o: &QMatrix) -> QMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn scale(&self, s: &Q) -> QMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j) * s)
    }

    pub fn transpose(&self) -> QMatrix {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> Q {
        (0..self.n).fold(Q::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn det(&self) -> Q {
        let n = self.n;
        let mut m = self.data.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| !m[r * n + c].is_zero()) else {
                return Q::zero();
            };
            if piv != c {
                for j in 0..n {
                    m.swap(piv * n + j, c * n + j);
                }
                det = -det;
            }
            let pv = m[c * n + c].clone();
            det *= &pv;
            for r in c + 1..n {
                if m[r * n + c].is_zero() {
                    continue;
                }
                let f = &m[r * n + c] / &pv;
                for j in c..n {
                    let t = &f * &m[c * n + j];
                    m[r * n + j] -= t;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        let n = self.n;
        let w = 2 * n;
        let mut m = vec![Q::zero(); n * w];
        for i in 0..n {
            for j in 0..n {
                m[i * w + j] = self.get(i, j).clone();
            }
            m[i * w + n + i] = Q::one();
        }
        for c in 0..n {
            let piv = (c..n).find(|&r| !m[r * w + c].is_zero())?;
            if piv != c {
                for j in 0..w {
                    m.swap(piv * w + j, c * w + j);
                }
            }
            let inv = Q::one() / &m[c * w + c];
            for j in 0..w {
                m[c * w + j] = &m[c * w + j] * &inv;
            }
            for r in 0..n {
                if r != c && !m[r * w + c].is_zero() {
                    let f = m[r * w + c].clone();
                    for j in 0..w {
                        let t = &f * &m[c * w + j];
                        m[r * w + j] -= t;
                    }
                }
            }
        }
        Some(Self::from_fn(n, |i, j| m[i * w + n + j].clone()))
    }

    /// Coefficients (low degree first) of det(lambda I - M), by
    /// Faddeev-LeVerrier.
    pub fn char_poly(&self) -> Vec<Q> {
        let n = self.n;
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut mk = QMatrix::zero(n);
        for k in 1..=n {
            mk = self.mul(&mk).add(&QMatrix::identity(n).scale(&coeffs[n - k + 1]));
            let am = self.mul(&mk);
            coeffs[n - k] = -am.trace() / q_int(k as i64);
        }
        coeffs
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Entry-wise reduction mod p; fails if p divides a denominator.
    pub fn reduce_mod(&self, p: u64) -> Result<super::matrix::ModMatrix> {
        let mut vals = Vec::with_capacity(self.data.len());
        for x in &self.data {
            vals.push(reduce_rational(x, p)?);
        }
        Ok(super::matrix::ModMatrix::from_raw(self.n, p, vals))
    }
}

/// Reduce a rational number modulo p (p must not divide the denominator).
pub fn reduce_rational(x: &Q, p: u64) -> Result<u64> {
    let pb = BigInt::from(p);
    let num = x.numer().mod_floor(&pb).to_u64().unwrap();
    let den = x.denom().mod_floor(&pb).to_u64().unwrap();
    let inv = inv_mod(den, p).ok_or(Error::NotUnit(den, p))?;
    Ok(super::modular::mul_mod(num, inv, p))
}

pub fn poly_eval(coeffs: &[Q], x: &Q) -> Q {
    coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

pub fn poly_derivative(coeffs: &[Q]) -> Vec<Q> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * q_int(i as i64))
        .collect()
}

/// Resultant via the Sylvester determinant (coefficients low degree first).
pub fn resultant(f: &[Q], g: &[Q]) -> Q {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    let s = QMatrix::from_fn(size, |i, j| {
        if i < n {
            // row i holds f shifted by i, highest degree first
            j.checked_sub(i)
                .filter(|&k| k <= m)
                .map(|k| f[m - k].clone())
                .unwrap_or_else(Q::zero)
        } else {
            let r = i - n;
            j.checked_sub(r)
                .filter(|&k| k <= n)
                .map(|k| g[n - k].clone())
                .unwrap_or_else(Q::zero)
        }
    });
    s.det()
}

pub fn reduce_poly(coeffs: &[Q], p: u64) -> Result<PolyFp> {
    let mut c = Vec::with_capacity(coeffs.len());
    for x in coeffs {
        c.push(reduce_rational(x, p)?);
    }
    Ok(PolyFp::from_residues(p, c))
}
