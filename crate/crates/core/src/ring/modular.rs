use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_MODULUS: u64 = 1 << 31;

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

/// Reduce a signed integer into `[0, q)`.
#[inline]
pub fn reduce(a: i64, q: u64) -> u64 {
    a.rem_euclid(q as i64) as u64
}

#[inline]
pub fn reduce_i128(a: i128, q: u64) -> u64 {
    a.rem_euclid(q as i128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid on signed integers: returns (g, x, y) with ax + by = g.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

pub fn inv_mod(a: u64, q: u64) -> Option<u64> {
    if q == 1 {
        return Some(0);
    }
    let (g, x, _) = ext_gcd((a % q) as i128, q as i128);
    if g != 1 {
        None
    } else {
        Some(x.rem_euclid(q as i128) as u64)
    }
}

/// Trial-division factorization, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&n| is_prime(n)).collect()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn units(q: u64) -> Vec<u64> {
    if q == 1 {
        return vec![0];
    }
    (1..q).filter(|&r| gcd(r, q) == 1).collect()
}

/// An odd modulus `3 <= q < 2^31` together with its factorization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modulus {
    q: u64,
    factors: Vec<(u64, u32)>,
    inv2: u64,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 || q >= MAX_MODULUS {
            return Err(Error::InvalidModulus(q, "must satisfy 3 <= q < 2^31"));
        }
        if q % 2 == 0 {
            return Err(Error::InvalidModulus(q, "must be odd"));
        }
        Ok(Modulus {
            q,
            factors: factorize(q),
            inv2: (q + 1) / 2,
        })
    }

    pub fn prime(p: u64) -> Result<Self> {
        let m = Self::new(p)?;
        if !m.is_prime() {
            return Err(Error::InvalidModulus(p, "must be prime"));
        }
        Ok(m)
    }

    pub fn value(&self) -> u64 {
        self.q
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.0).collect()
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|f| f.1 == 1)
    }

    pub fn phi(&self) -> u64 {
        euler_phi(self.q)
    }

    pub fn inv2(&self) -> u64 {
        self.inv2
    }

    pub fn units(&self) -> Vec<u64> {
        units(self.q)
    }

    pub fn is_unit(&self, a: u64) -> bool {
        gcd(a % self.q, self.q) == 1
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        inv_mod(a, self.q).ok_or(Error::NotUnit(a % self.q, self.q))
    }
}

/// A residue together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModInt {
    value: u64,
    modulus: u64,
}

impl ModInt {
    pub fn new(value: i64, modulus: u64) -> Self {
        ModInt {
            value: reduce(value, modulus),
            modulus,
        }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_unit(self) -> bool {
        gcd(self.value, self.modulus) == 1
    }

    pub fn inv(self) -> Option<Self> {
        inv_mod(self.value, self.modulus).map(|v| ModInt {
            value: v,
            modulus: self.modulus,
        })
    }

    pub fn pow(self, e: u64) -> Self {
        ModInt {
            value: pow_mod(self.value, e, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl std::ops::Add for ModInt {
    type Output = ModInt;
    fn add(self, o: ModInt) -> ModInt {
        debug_assert_eq!(self.modulus, o.modulus);
        ModInt {
            value: add_mod(self.value, o.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl std::ops::Sub for ModInt {
    type Output = ModInt;
    fn sub(self, o: ModInt) -> ModInt {
        debug_assert_eq!(self.modulus, o.modulus);
        ModInt {
            value: sub_mod(self.value, o.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl std::ops::Mul for ModInt {
    type Output = ModInt;
    fn mul(self, o: ModInt) -> ModInt {
        debug_assert_eq!(self.modulus, o.modulus);
        ModInt {
            value: mul_mod(self.value, o.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl std::ops::Neg for ModInt {
    type Output = ModInt;
    fn neg(self) -> ModInt {
        ModInt {
            value: sub_mod(0, self.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

/// Combine residues modulo pairwise distinct primes.
pub fn crt_lift(residues: &[(ModInt, u64)]) -> Result<ModInt> {
    let mut seen: Vec<u64> = Vec::new();
    let mut value: u128 = 0;
    let mut modulus: u128 = 1;
    for &(r, p) in residues {
        if seen.contains(&p) {
            return Err(Error::DuplicatePrime(p));
        }
        seen.push(p);
        let (x, m) = crt_pair(value, modulus, (r.value() % p) as u128, p as u128)?;
        value = x;
        modulus = m;
    }
    if modulus > u64::MAX as u128 {
        return Err(Error::Precondition("CRT modulus overflows u64".into()));
    }
    Ok(ModInt {
        value: value as u64,
        modulus: modulus as u64,
    })
}

/// Solve x = a1 (m1), x = a2 (m2) for coprime m1, m2.
pub fn crt_pair(a1: u128, m1: u128, a2: u128, m2: u128) -> Result<(u128, u128)> {
    let (g, inv, _) = ext_gcd((m1 % m2) as i128, m2 as i128);
    if g != 1 {
        return Err(Error::Precondition("CRT moduli not coprime".into()));
    }
    let inv = inv.rem_euclid(m2 as i128) as u128;
    let diff = (a2 + m2 - a1 % m2) % m2;
    let t = diff * inv % m2;
    Ok((a1 + m1 * t, m1 * m2))
}

/// Legendre symbol of `a` modulo an odd prime `p`.
pub fn legendre(a: i64, p: u64) -> Result<i32> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    let a = reduce(a, p);
    if a == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(a, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: i64, n: u64) -> i32 {
    assert!(n % 2 == 1, "jacobi symbol needs odd n");
    let mut a = reduce(a, n);
    let mut n = n;
    let mut sign = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}
