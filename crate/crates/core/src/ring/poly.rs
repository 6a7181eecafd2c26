use super::modular::{add_mod, inv_mod, mul_mod, sub_mod};
use crate::error::{Error, Result};
use std::fmt;

/// Polynomial over F_p, coefficients low degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyFp {
    p: u64,
    coeffs: Vec<u64>,
}

impl fmt::Debug for PolyFp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0 (mod {})", self.p);
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}X"),
                _ => format!("{c}X^{i}"),
            })
            .collect();
        write!(f, "{} (mod {})", terms.join(" + "), self.p)
    }
}

impl PolyFp {
    pub fn new(p: u64, coeffs: Vec<i64>) -> Self {
        let c = coeffs.into_iter().map(|x| x.rem_euclid(p as i64) as u64).collect();
        Self::from_residues(p, c)
    }

    pub fn from_residues(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyFp { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        PolyFp { p, coeffs: vec![] }
    }

    pub fn one(p: u64) -> Self {
        Self::from_residues(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        Self::from_residues(p, vec![0, 1])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as None.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn monic(&self) -> PolyFp {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.lead(), self.p).unwrap();
        self.scale(inv)
    }

    pub fn scale(&self, s: u64) -> PolyFp {
        Self::from_residues(self.p, self.coeffs.iter().map(|&c| mul_mod(c, s, self.p)).collect())
    }

    pub fn add(&self, o: &PolyFp) -> PolyFp {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_residues(
            self.p,
            (0..n).map(|i| add_mod(self.coeff(i), o.coeff(i), self.p)).collect(),
        )
    }

    pub fn sub(&self, o: &PolyFp) -> PolyFp {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_residues(
            self.p,
            (0..n).map(|i| sub_mod(self.coeff(i), o.coeff(i), self.p)).collect(),
        )
    }

    pub fn mul(&self, o: &PolyFp) -> PolyFp {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let mut out = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = add_mod(out[i + j], mul_mod(a, b, self.p), self.p);
            }
        }
        Self::from_residues(self.p, out)
    }

    /// Division with remainder; the divisor must be nonzero.
    pub fn div_rem(&self, d: &PolyFp) -> (PolyFp, PolyFp) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let p = self.p;
        let dd = d.coeffs.len() - 1;
        let inv = inv_mod(d.lead(), p).unwrap();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(p), self.clone());
        }
        let mut quot = vec![0u64; r.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = mul_mod(r[k + dd], inv, p);
            quot[k] = c;
            if c != 0 {
                for (j, &dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = sub_mod(r[k + j], mul_mod(c, dc, p), p);
                }
            }
        }
        r.truncate(dd);
        (Self::from_residues(p, quot), Self::from_residues(p, r))
    }

    pub fn rem(&self, d: &PolyFp) -> PolyFp {
        self.div_rem(d).1
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| add_mod(mul_mod(acc, x, self.p), c, self.p))
    }

    pub fn derivative(&self) -> PolyFp {
        Self::from_residues(
            self.p,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mul_mod(c, i as u64 % self.p, self.p))
                .collect(),
        )
    }

    pub fn gcd(&self, o: &PolyFp) -> PolyFp {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// The monic polynomial of degree `d` whose lower coefficients are the
    /// base-p digits of `code`.
    pub fn monic_from_code(p: u64, d: usize, mut code: u64) -> PolyFp {
        let mut c = Vec::with_capacity(d + 1);
        for _ in 0..d {
            c.push(code % p);
            code /= p;
        }
        c.push(1);
        PolyFp { p, coeffs: c }
    }

    /// Irreducibility by trial division over all monic polynomials of degree
    /// at most deg/2.
    pub fn is_irreducible(&self) -> bool {
        match self.degree() {
            None | Some(0) => false,
            Some(1) => true,
            Some(d) => smallest_factor(self, d / 2).is_none(),
        }
    }
}

fn smallest_factor(f: &PolyFp, max_deg: usize) -> Option<PolyFp> {
    let p = f.p;
    for d in 1..=max_deg {
        for code in 0..p.pow(d as u32) {
            let h = PolyFp::monic_from_code(p, d, code);
            if f.rem(&h).is_zero() {
                return Some(h);
            }
        }
    }
    None
}

/// Unit times a product of monic irreducibles with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub unit: u64,
    pub factors: Vec<(PolyFp, u32)>,
}

impl Factorization {
    pub fn product(&self, p: u64) -> PolyFp {
        let mut acc = PolyFp::from_residues(p, vec![self.unit]);
        for (f, m) in &self.factors {
            for _ in 0..*m {
                acc = acc.mul(f);
            }
        }
        acc
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|f| f.1 == 1)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.factors
            .iter()
            .flat_map(|(f, m)| std::iter::repeat(f.degree().unwrap()).take(*m as usize))
            .collect()
    }
}

/// Factor a nonzero polynomial over F_p (p odd) into monic irreducibles by
/// exhaustive trial division, smallest degree first.
pub fn factor_poly(f: &PolyFp) -> Result<Factorization> {
    if f.p % 2 == 0 {
        return Err(Error::EvenPrime);
    }
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let p = f.p;
    let unit = f.lead();
    let mut g = f.monic();
    let mut factors: Vec<(PolyFp, u32)> = Vec::new();
    let mut d = 1;
    while g.degree().unwrap() >= 2 * d {
        for code in 0..p.pow(d as u32) {
            let h = PolyFp::monic_from_code(p, d, code);
            let mut mult = 0;
            loop {
                let (quot, r) = g.div_rem(&h);
                if !r.is_zero() {
                    break;
                }
                g = quot;
                mult += 1;
            }
            if mult > 0 {
                factors.push((h, mult));
            }
            if g.degree().unwrap() < 2 * d {
                break;
            }
        }
        d += 1;
    }
    if g.degree().unwrap() >= 1 {
        match factors.iter_mut().find(|(h, _)| *h == g) {
            Some(entry) => entry.1 += 1,
            None => factors.push((g, 1)),
        }
    }
    factors.sort_by(|a, b| {
        (a.0.degree(), a.0.coeffs.iter().rev().collect::<Vec<_>>())
            .cmp(&(b.0.degree(), b.0.coeffs.iter().rev().collect::<Vec<_>>()))
    });
    Ok(Factorization { unit, factors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spec_examples() {
        let f = PolyFp::new(3, vec![1, 0, 1]);
        let fac = factor_poly(&f).unwrap();
        assert_eq!(fac.factors, vec![(f.clone(), 1)]);
        assert!(f.is_irreducible());

        let g = PolyFp::new(5, vec![-1, 0, 1]);
        let fac = factor_poly(&g).unwrap();
        assert_eq!(
            fac.factors,
            vec![(PolyFp::new(5, vec![1, 1]), 1), (PolyFp::new(5, vec![-1, 1]), 1)]
        );

        assert_eq!(factor_poly(&PolyFp::new(2, vec![1, 1, 0, 0, 1])), Err(Error::EvenPrime));
        assert_eq!(factor_poly(&PolyFp::zero(7)), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn repeated_and_nonmonic() {
        // 3 (X-1)^2 (X^2+1) over F_7; X^2+1 is irreducible since -1 is a non-square mod 7
        let f = PolyFp::new(7, vec![3])
            .mul(&PolyFp::new(7, vec![-1, 1]))
            .mul(&PolyFp::new(7, vec![-1, 1]))
            .mul(&PolyFp::new(7, vec![1, 0, 1]));
        let fac = factor_poly(&f).unwrap();
        assert_eq!(fac.unit, 3);
        assert_eq!(fac.degrees(), vec![1, 1, 2]);
        assert!(!fac.is_squarefree());
        assert_eq!(fac.product(7), f);
    }

    #[test]
    fn random_factorizations_remultiply() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [3u64, 5, 7, 13] {
            for _ in 0..250 {
                let deg = rng.gen_range(1..=8);
                let mut c: Vec<u64> = (0..deg).map(|_| rng.gen_range(0..p)).collect();
                c.push(rng.gen_range(1..p));
                let f = PolyFp::from_residues(p, c);
                let fac = factor_poly(&f).unwrap();
                assert_eq!(fac.product(p), f);
                for (h, _) in &fac.factors {
                    assert!(h.is_monic() && h.is_irreducible(), "{h:?}");
                }
            }
        }
    }

    #[test]
    fn div_rem_identity() {
        let a = PolyFp::new(11, vec![3, 0, 5, 7, 1, 2]);
        let b = PolyFp::new(11, vec![1, 4, 3]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }
}
