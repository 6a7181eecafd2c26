use super::modular::{add_mod, crt_pair, factorize, inv_mod, mul_mod, reduce, sub_mod};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Square matrix over Z/qZ, row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModMatrix {
    q: u64,
    n: usize,
    data: Vec<u64>,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ModMatrix(mod {}) [", self.q)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", &self.data[i * self.n..(i + 1) * self.n])?;
        }
        write!(f, "]")
    }
}

impl ModMatrix {
    pub fn zero(n: usize, q: u64) -> Self {
        ModMatrix {
            q,
            n,
            data: vec![0; n * n],
        }
    }

    pub fn identity(n: usize, q: u64) -> Self {
        Self::scalar(n, q, 1)
    }

    pub fn scalar(n: usize, q: u64, s: u64) -> Self {
        let mut m = Self::zero(n, q);
        for i in 0..n {
            m.data[i * n + i] = s % q;
        }
        m
    }

    pub fn from_fn(n: usize, q: u64, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut m = Self::zero(n, q);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = reduce(f(i, j), q);
            }
        }
        m
    }

    pub fn from_rows<const N: usize>(rows: &[[i64; N]; N], q: u64) -> Self {
        Self::from_fn(N, q, |i, j| rows[i][j])
    }

    pub fn from_raw(n: usize, q: u64, data: Vec<u64>) -> Self {
        assert_eq!(data.len(), n * n);
        debug_assert!(data.iter().all(|&x| x < q));
        ModMatrix { q, n, data }
    }

    pub fn diag(q: u64, entries: &[i64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, q, |i, j| if i == j { entries[i] } else { 0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.n + j] = v % self.q;
    }

    /// Centered representative of entry (i, j) in (-q/2, q/2].
    pub fn get_signed(&self, i: usize, j: usize) -> i64 {
        let v = self.get(i, j) as i64;
        if 2 * v > self.q as i64 {
            v - self.q as i64
        } else {
            v
        }
    }

    fn check(&self, o: &ModMatrix) {
        assert_eq!(self.n, o.n, "dimension mismatch");
        assert_eq!(self.q, o.q, "modulus mismatch");
    }

    pub fn mul(&self, o: &ModMatrix) -> ModMatrix {
        self.check(o);
        let n = self.n;
        let q = self.q;
        let mut out = vec![0u64; n * n];
        if q < (1 << 28) {
            // n <= 8 products of two residues below 2^28 fit in u64
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0u64;
                    for k in 0..n {
                        acc += self.data[i * n + k] * o.data[k * n + j];
                        if k % 8 == 7 {
                            acc %= q;
                        }
                    }
                    out[i * n + j] = acc % q;
                }
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0u64;
                    for k in 0..n {
                        acc = add_mod(acc, mul_mod(self.data[i * n + k], o.data[k * n + j], q), q);
                    }
                    out[i * n + j] = acc;
                }
            }
        }
        ModMatrix { q, n, data: out }
    }

    pub fn add(&self, o: &ModMatrix) -> ModMatrix {
        self.check(o);
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(&a, &b)| add_mod(a, b, self.q))
            .collect();
        ModMatrix {
            q: self.q,
            n: self.n,
            data,
        }
    }

    pub fn sub(&self, o: &ModMatrix) -> ModMatrix {
        self.check(o);
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(&a, &b)| sub_mod(a, b, self.q))
            .collect();
        ModMatrix {
            q: self.q,
            n: self.n,
            data,
        }
    }

    pub fn neg(&self) -> ModMatrix {
        self.scale_signed(-1)
    }

    pub fn scale(&self, s: u64) -> ModMatrix {
        let s = s % self.q;
        let data = self.data.iter().map(|&a| mul_mod(a, s, self.q)).collect();
        ModMatrix {
            q: self.q,
            n: self.n,
            data,
        }
    }

    pub fn scale_signed(&self, s: i64) -> ModMatrix {
        self.scale(reduce(s, self.q))
    }

    pub fn transpose(&self) -> ModMatrix {
        let n = self.n;
        let mut out = Self::zero(n, self.q);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n, self.q)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn reduce_mod(&self, p: u64) -> ModMatrix {
        ModMatrix {
            q: p,
            n: self.n,
            data: self.data.iter().map(|&x| x % p).collect(),
        }
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n).fold(0u64, |acc, k| {
                    add_mod(acc, mul_mod(self.data[i * n + k], v[k], self.q), self.q)
                })
            })
            .collect()
    }

    /// Value of the quadratic form v^T M v.
    pub fn quad(&self, v: &[u64]) -> u64 {
        let mv = self.apply(v);
        v.iter()
            .zip(&mv)
            .fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b, self.q), self.q))
    }

    pub fn block(&self, r0: usize, c0: usize, size: usize) -> ModMatrix {
        let mut out = Self::zero(size, self.q);
        for i in 0..size {
            for j in 0..size {
                out.data[i * size + j] = self.get(r0 + i, c0 + j);
            }
        }
        out
    }

    pub fn from_blocks(a: &ModMatrix, b: &ModMatrix, c: &ModMatrix, d: &ModMatrix) -> ModMatrix {
        let k = a.n;
        let n = 2 * k;
        let mut out = Self::zero(n, a.q);
        for i in 0..k {
            for j in 0..k {
                out.data[i * n + j] = a.get(i, j);
                out.data[i * n + j + k] = b.get(i, j);
                out.data[(i + k) * n + j] = c.get(i, j);
                out.data[(i + k) * n + j + k] = d.get(i, j);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> ModMatrix {
        let mut acc = Self::identity(self.n, self.q);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Exact determinant via fraction-free elimination over the integers.
    pub fn det(&self) -> u64 {
        let rows: Vec<Vec<BigInt>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| BigInt::from(self.get(i, j))).collect())
            .collect();
        let d = bareiss_det(rows);
        let q = BigInt::from(self.q);
        d.mod_floor(&q).to_u64().unwrap()
    }

    /// Inverse over Z/qZ; fails with the smallest prime divisor of q at which
    /// the matrix degenerates.
    pub fn inverse(&self) -> Result<ModMatrix> {
        let mut acc: Option<(Vec<u128>, u128)> = None;
        for (p, e) in factorize(self.q) {
            let pk = p.pow(e);
            let inv = self.inverse_prime_power(p, pk)?;
            acc = Some(match acc {
                None => (inv.iter().map(|&x| x as u128).collect(), pk as u128),
                Some((vals, m)) => {
                    let mut out = Vec::with_capacity(vals.len());
                    for (v, &w) in vals.iter().zip(&inv) {
                        out.push(crt_pair(*v, m, w as u128, pk as u128)?.0);
                    }
                    (out, m * pk as u128)
                }
            });
        }
        let (vals, _) = acc.expect("modulus has at least one prime factor");
        Ok(ModMatrix {
            q: self.q,
            n: self.n,
            data: vals.into_iter().map(|x| x as u64).collect(),
        })
    }

    fn inverse_prime_power(&self, p: u64, pk: u64) -> Result<Vec<u64>> {
        let n = self.n;
        let w = 2 * n;
        let mut m = vec![0u64; n * w];
        for i in 0..n {
            for j in 0..n {
                m[i * w + j] = self.get(i, j) % pk;
            }
            m[i * w + n + i] = 1 % pk;
        }
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| m[r * w + col] % p != 0)
                .ok_or(Error::NotInvertible(p))?;
            if piv != col {
                for j in 0..w {
                    m.swap(piv * w + j, col * w + j);
                }
            }
            let inv = inv_mod(m[col * w + col], pk).unwrap();
            for j in 0..w {
                m[col * w + j] = mul_mod(m[col * w + j], inv, pk);
            }
            for r in 0..n {
                if r != col {
                    let f = m[r * w + col];
                    if f != 0 {
                        for j in 0..w {
                            let t = mul_mod(f, m[col * w + j], pk);
                            m[r * w + j] = sub_mod(m[r * w + j], t, pk);
                        }
                    }
                }
            }
        }
        let mut out = vec![0u64; n * n];
        for i in 0..n {
            out[i * n..(i + 1) * n].copy_from_slice(&m[i * w + n..i * w + w]);
        }
        Ok(out)
    }

    pub fn is_invertible(&self) -> bool {
        super::modular::gcd(self.det(), self.q) == 1
    }

    /// Canonical byte encoding: row-major residues, one byte each when q < 256,
    /// otherwise four little-endian bytes each.
    pub fn encode(&self) -> Vec<u8> {
        if self.q <= 256 {
            self.data.iter().map(|&x| x as u8).collect()
        } else {
            self.data.iter().flat_map(|&x| (x as u32).to_le_bytes()).collect()
        }
    }

    pub fn decode(bytes: &[u8], n: usize, q: u64) -> Result<ModMatrix> {
        let data: Vec<u64> = if q <= 256 {
            bytes.iter().map(|&b| b as u64).collect()
        } else {
            bytes
                .chunks(4)
                .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as u64)
                .collect()
        };
        if data.len() != n * n || data.iter().any(|&x| x >= q) {
            return Err(Error::Dimension("bad matrix encoding".into()));
        }
        Ok(ModMatrix { q, n, data })
    }
}

/// Determinant of an integer matrix by Bareiss elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign.is_negative() {
        -d
    } else {
        d
    }
}

/// Row-reduce a linear system over F_p. Returns one solution of `a x = b`
/// (a is rows x cols) or None when inconsistent.
pub fn solve_mod_p(a: &[Vec<u64>], b: &[u64], p: u64) -> Option<Vec<u64>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .zip(b)
        .map(|(r, &v)| {
            let mut row: Vec<u64> = r.iter().map(|&x| x % p).collect();
            row.push(v % p);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = inv_mod(m[r][c], p).unwrap();
        for x in m[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..=cols {
                    let t = mul_mod(f, m[r][j], p);
                    m[i][j] = sub_mod(m[i][j], t, p);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| row[cols] != 0) {
        return None;
    }
    let mut x = vec![0u64; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols];
    }
    Some(x)
}

/// Basis of the right kernel of an n x n matrix over F_p.
pub fn kernel_mod_p(m: &ModMatrix) -> Vec<Vec<u64>> {
    let p = m.modulus();
    let n = m.n();
    let mut a: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(piv) = (r..n).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, piv);
        let inv = inv_mod(a[r][c], p).unwrap();
        for x in a[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for i in 0..n {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..n {
                    let t = mul_mod(f, a[r][j], p);
                    a[i][j] = sub_mod(a[i][j], t, p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; n];
            v[f] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = sub_mod(0, a[i][f], p);
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_examples() {
        let i = ModMatrix::identity(4, 7);
        assert_eq!(i.inverse().unwrap(), i);
        let d = ModMatrix::diag(7, &[1, 2, 3, 5]);
        let inv = d.inverse().unwrap();
        assert_eq!(inv, ModMatrix::diag(7, &[1, 4, 5, 3]));
        assert!(d.mul(&inv).is_identity());
        let d5 = ModMatrix::diag(5, &[1, 2, 3, 5]);
        assert_eq!(d5.inverse(), Err(Error::NotInvertible(5)));
    }

    #[test]
    fn inverse_composite_and_prime_power() {
        for q in [15u64, 45, 9, 27, 105] {
            let m = ModMatrix::from_rows(&[[2, 1, 0, 3], [1, 1, 4, 0], [0, 2, 1, 1], [1, 0, 0, 1]], q);
            match m.inverse() {
                Ok(inv) => assert!(m.mul(&inv).is_identity() && inv.mul(&m).is_identity()),
                Err(Error::NotInvertible(p)) => assert_eq!(m.det() % p, 0),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn det_matches_small_cases() {
        let m = ModMatrix::from_rows(&[[1, 2], [3, 4]], 1_000_003);
        assert_eq!(m.det(), 1_000_003 - 2);
        let d = ModMatrix::diag(13, &[1, 2, 3, 5]);
        assert_eq!(d.det(), 30 % 13);
    }

    #[test]
    fn encode_roundtrip() {
        let m = ModMatrix::from_fn(8, 13, |i, j| (i * 3 + j) as i64);
        assert_eq!(ModMatrix::decode(&m.encode(), 8, 13).unwrap(), m);
        let big = ModMatrix::from_fn(4, 1_000_003, |i, j| (i * 1000 + j * 77) as i64);
        assert_eq!(ModMatrix::decode(&big.encode(), 4, 1_000_003).unwrap(), big);
    }

    #[test]
    fn kernel_and_solve() {
        let m = ModMatrix::from_rows(&[[1, 2, 3], [2, 4, 6], [0, 1, 1]], 7);
        let ker = kernel_mod_p(&m);
        assert_eq!(ker.len(), 1);
        assert!(m.apply(&ker[0]).iter().all(|&x| x == 0));
        let a = vec![vec![1, 1], vec![1, 6]];
        let x = solve_mod_p(&a, &[3, 1], 7).unwrap();
        assert_eq!((x[0] + x[1]) % 7, 3);
        assert!(solve_mod_p(&[vec![1, 1], vec![1, 1]], &[1, 2], 7).is_none());
    }
}
