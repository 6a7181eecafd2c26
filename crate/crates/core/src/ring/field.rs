use super::modular::{add_mod, inv_mod, mul_mod, sub_mod};
use super::poly::PolyFp;
use crate::error::{Error, Result};

/// Element of F_{p^d}, encoded as the integer whose base-p digits are the
/// coefficients (constant term least significant).
pub type Fq = u32;

const TABLE_LIMIT: u64 = 1024;

/// The field F_p[X]/(f) with f the least irreducible monic of degree d, where
/// monics are ordered by the integer code of their lower coefficients.
#[derive(Debug, Clone)]
pub struct FieldExt {
    p: u64,
    d: usize,
    modulus: PolyFp,
    size: u64,
    mul_table: Option<Vec<Fq>>,
    inv_table: Option<Vec<Fq>>,
}

impl PartialEq for FieldExt {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.d == o.d && self.modulus == o.modulus
    }
}

impl FieldExt {
    pub fn new(p: u64, d: usize) -> Result<Self> {
        if p % 2 == 0 {
            return Err(Error::EvenPrime);
        }
        if !(1..=4).contains(&d) {
            return Err(Error::Precondition("extension degree must be 1..=4".into()));
        }
        let modulus = (0..p.pow(d as u32))
            .map(|code| PolyFp::monic_from_code(p, d, code))
            .find(|f| f.is_irreducible())
            .expect("irreducible polynomials exist in every degree");
        Self::with_modulus(modulus)
    }

    pub fn with_modulus(modulus: PolyFp) -> Result<Self> {
        let p = modulus.p();
        let d = modulus.degree().unwrap_or(0);
        if !modulus.is_monic() || !modulus.is_irreducible() {
            return Err(Error::Precondition(format!("{modulus:?} is not monic irreducible")));
        }
        let size = p.pow(d as u32);
        let mut f = FieldExt {
            p,
            d,
            modulus,
            size,
            mul_table: None,
            inv_table: None,
        };
        if size <= TABLE_LIMIT {
            let s = size as usize;
            let mut mt = vec![0; s * s];
            for a in 0..s {
                for b in a..s {
                    let v = f.mul_slow(a as Fq, b as Fq);
                    mt[a * s + b] = v;
                    mt[b * s + a] = v;
                }
            }
            let mut it = vec![0; s];
            for a in 1..s {
                it[a] = (1..s).find(|&b| mt[a * s + b] == 1).unwrap() as Fq;
            }
            f.mul_table = Some(mt);
            f.inv_table = Some(it);
        }
        Ok(f)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn modulus(&self) -> &PolyFp {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        0..self.size as Fq
    }

    pub fn from_base(&self, a: i64) -> Fq {
        a.rem_euclid(self.p as i64) as Fq
    }

    /// The class of X.
    pub fn generator(&self) -> Fq {
        if self.d == 1 {
            // X reduces to minus the constant term of the linear modulus
            sub_mod(0, self.modulus.coeff(0), self.p) as Fq
        } else {
            self.p as Fq
        }
    }

    pub fn digits(&self, a: Fq) -> Vec<u64> {
        let mut a = a as u64;
        (0..self.d)
            .map(|_| {
                let c = a % self.p;
                a /= self.p;
                c
            })
            .collect()
    }

    pub fn from_digits(&self, c: &[u64]) -> Fq {
        c.iter().rev().fold(0u64, |acc, &x| acc * self.p + x % self.p) as Fq
    }

    pub fn is_in_base_field(&self, a: Fq) -> bool {
        (a as u64) < self.p
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.d == 1 {
            return add_mod(a as u64, b as u64, self.p) as Fq;
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(&u, &v)| add_mod(u, v, self.p)).collect();
        self.from_digits(&s)
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn neg(&self, a: Fq) -> Fq {
        let s: Vec<u64> = self.digits(a).iter().map(|&u| sub_mod(0, u, self.p)).collect();
        self.from_digits(&s)
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        match &self.mul_table {
            Some(t) => t[a as usize * self.size as usize + b as usize],
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: Fq, b: Fq) -> Fq {
        if self.d == 1 {
            return mul_mod(a as u64, b as u64, self.p) as Fq;
        }
        let pa = PolyFp::from_residues(self.p, self.digits(a));
        let pb = PolyFp::from_residues(self.p, self.digits(b));
        let r = pa.mul(&pb).rem(&self.modulus);
        let mut c = r.coeffs().to_vec();
        c.resize(self.d, 0);
        self.from_digits(&c)
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a == 0 {
            return None;
        }
        if let Some(t) = &self.inv_table {
            return Some(t[a as usize]);
        }
        if self.d == 1 {
            return inv_mod(a as u64, self.p).map(|x| x as Fq);
        }
        Some(self.pow(a, self.size - 2))
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut acc: Fq = 1;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Degree over F_p of the subfield generated by `a`.
    pub fn element_degree(&self, a: Fq) -> usize {
        (1..=self.d)
            .find(|&k| self.d % k == 0 && self.pow(a, self.p.pow(k as u32)) == a)
            .unwrap()
    }
}

/// 2x2 matrix over a FieldExt, row-major [a, b, c, d].
pub type Mat2 = [Fq; 4];

impl FieldExt {
    pub fn mat_mul(&self, x: &Mat2, y: &Mat2) -> Mat2 {
        [
            self.add(self.mul(x[0], y[0]), self.mul(x[1], y[2])),
            self.add(self.mul(x[0], y[1]), self.mul(x[1], y[3])),
            self.add(self.mul(x[2], y[0]), self.mul(x[3], y[2])),
            self.add(self.mul(x[2], y[1]), self.mul(x[3], y[3])),
        ]
    }

    pub fn mat_det(&self, x: &Mat2) -> Fq {
        self.sub(self.mul(x[0], x[3]), self.mul(x[1], x[2]))
    }

    /// Inverse of a determinant-one matrix.
    pub fn sl2_inv(&self, x: &Mat2) -> Mat2 {
        [x[3], self.neg(x[1]), self.neg(x[2]), x[0]]
    }

    pub fn mat_identity(&self) -> Mat2 {
        [1, 0, 0, 1]
    }

    /// |SL_2(F_{p^d})| = s(s^2 - 1).
    pub fn sl2_order(&self) -> u64 {
        self.size * (self.size * self.size - 1)
    }
}
