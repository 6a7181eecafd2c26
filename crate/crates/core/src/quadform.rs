//! The form Q(x,y) = x^T a x + x^T b y + y^T c y and its invariants.

use crate::error::{Error, Result};
use crate::ring::matrix::ModMatrix;
use crate::ring::modular::{gcd, is_prime, reduce};
use crate::ring::rational::{poly_derivative, poly_eval, q_int, reduce_poly, resultant, QMatrix, Q};
use crate::ring::PolyFp;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub type Mat4 = [[i64; 4]; 4];

const ENTRY_BOUND: i64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadForm {
    pub a: Mat4,
    pub b: Mat4,
    pub c: Mat4,
}

fn is_sym(m: &Mat4) -> bool {
    (0..4).all(|i| (0..4).all(|j| m[i][j] == m[j][i]))
}

pub fn identity4() -> Mat4 {
    diag4([1, 1, 1, 1])
}

pub fn diag4(d: [i64; 4]) -> Mat4 {
    let mut m = [[0; 4]; 4];
    for i in 0..4 {
        m[i][i] = d[i];
    }
    m
}

impl QuadForm {
    pub fn new(a: Mat4, b: Mat4, c: Mat4) -> Result<Self> {
        let f = QuadForm { a, b, c };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_sym(&self.a) {
            return Err(Error::NotSymmetric("a"));
        }
        if !is_sym(&self.c) {
            return Err(Error::NotSymmetric("c"));
        }
        let all = self.a.iter().chain(&self.b).chain(&self.c).flatten();
        if all.clone().any(|&x| x.abs() >= ENTRY_BOUND) {
            return Err(Error::Precondition(
                "entries must be below 2^31 in absolute value".into(),
            ));
        }
        Ok(())
    }

    /// The reference form with a = diag(1,2,3,5), b = c = I.
    pub fn e1() -> Self {
        QuadForm {
            a: diag4([1, 2, 3, 5]),
            b: identity4(),
            c: identity4(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: QuadForm = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("form serializes")
    }

    /// SHA-256 of the compact JSON encoding, hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        format!("{digest:x}")
    }

    /// Random form with entries in [-bound, bound]; b is not forced invertible.
    pub fn random<R: Rng>(rng: &mut R, bound: i64) -> Self {
        let mut sym = || {
            let mut m = [[0; 4]; 4];
            for i in 0..4 {
                for j in i..4 {
                    m[i][j] = rng.gen_range(-bound..=bound);
                    m[j][i] = m[i][j];
                }
            }
            m
        };
        let a = sym();
        let c = sym();
        let mut b = [[0; 4]; 4];
        for row in b.iter_mut() {
            for x in row.iter_mut() {
                *x = rng.gen_range(-bound..=bound);
            }
        }
        QuadForm { a, b, c }
    }

    pub fn eval(&self, x: &[i64; 4], y: &[i64; 4]) -> i128 {
        let mut s: i128 = 0;
        for i in 0..4 {
            for j in 0..4 {
                s += self.a[i][j] as i128 * x[i] as i128 * x[j] as i128;
                s += self.b[i][j] as i128 * x[i] as i128 * y[j] as i128;
                s += self.c[i][j] as i128 * y[i] as i128 * y[j] as i128;
            }
        }
        s
    }

    pub fn a_mod(&self, q: u64) -> ModMatrix {
        ModMatrix::from_rows(&self.a, q)
    }

    pub fn b_mod(&self, q: u64) -> ModMatrix {
        ModMatrix::from_rows(&self.b, q)
    }

    pub fn c_mod(&self, q: u64) -> ModMatrix {
        ModMatrix::from_rows(&self.c, q)
    }

    /// Integer Hessian [[2a, b], [b^T, 2c]] of Q in the variables (x, y).
    pub fn hessian(&self) -> [[i64; 8]; 8] {
        let mut h = [[0; 8]; 8];
        for i in 0..4 {
            for j in 0..4 {
                h[i][j] = 2 * self.a[i][j];
                h[i][j + 4] = self.b[i][j];
                h[j + 4][i] = self.b[i][j];
                h[i + 4][j + 4] = 2 * self.c[i][j];
            }
        }
        h
    }

    /// Symmetric 8x8 Gram matrix M over Z/qZ with Q(z) = z^T M z (q odd).
    pub fn gram_mod(&self, q: u64) -> ModMatrix {
        let inv2 = (q + 1) / 2;
        let h = self.hessian();
        ModMatrix::from_fn(8, q, |i, j| {
            (reduce(h[i][j], q) as u128 * inv2 as u128 % q as u128) as i64
        })
    }

    /// K = 8 max |b_ij|.
    pub fn k_const(&self) -> u64 {
        8 * self.b.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn det_a(&self) -> BigInt {
        int_det(&self.a)
    }

    pub fn det_b(&self) -> BigInt {
        int_det(&self.b)
    }

    /// a, b, c all diagonal, so Q splits into four binary forms.
    pub fn is_separable(&self) -> bool {
        [&self.a, &self.b, &self.c]
            .iter()
            .all(|m| (0..4).all(|i| (0..4).all(|j| i == j || m[i][j] == 0)))
    }

    /// gcd(q, det b).
    pub fn det_b_gcd(&self, q: u64) -> u64 {
        let d = self.det_b().abs() % BigInt::from(q);
        gcd(d.to_u64().unwrap(), q)
    }

    pub fn all_coefficients_nonnegative(&self) -> bool {
        self.a.iter().chain(&self.b).chain(&self.c).flatten().all(|&x| x >= 0)
    }
}

fn int_det(m: &Mat4) -> BigInt {
    let rows = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    crate::ring::matrix::bareiss_det(rows)
}

/// Delta = 4 b^{-1} a b^{-T} c - I, exactly.
pub fn matrix_discriminant(f: &QuadForm) -> Result<QMatrix> {
    let b = QMatrix::from_int(&f.b);
    let binv = b.inverse().ok_or(Error::SingularB)?;
    let a = QMatrix::from_int(&f.a);
    let c = QMatrix::from_int(&f.c);
    Ok(binv
        .mul(&a)
        .mul(&binv.transpose())
        .mul(&c)
        .scale(&q_int(4))
        .sub(&QMatrix::identity(4)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetIdentity {
    pub lhs: Q,
    pub rhs: Q,
    pub equal: bool,
}

/// det [[a, b/2], [b^T/2, c]] against 2^{-8} (det b)^2 det Delta.
pub fn det_identity_check(f: &QuadForm) -> Result<DetIdentity> {
    let delta = matrix_discriminant(f)?;
    let half = Q::new(BigInt::from(1), BigInt::from(2));
    let h = f.hessian();
    let gram = QMatrix::from_fn(8, |i, j| q_int(h[i][j]) * &half);
    let lhs = gram.det();
    let db = Q::from_integer(f.det_b());
    let rhs = &db * &db * delta.det() / q_int(1 << 8);
    Ok(DetIdentity {
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericityVerdict {
    pub det_b_nonzero: bool,
    pub delta: Option<QMatrix>,
    /// det(Delta - lambda I), low degree first.
    pub char_poly: Option<Vec<Q>>,
    pub distinct_eigenvalues: bool,
    pub zero_is_eigenvalue: bool,
    pub minus_one_is_eigenvalue: bool,
    pub generic: bool,
}

impl GenericityVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        let fmt_q = |x: &Q| x.to_string();
        serde_json::json!({
            "det_b_nonzero": self.det_b_nonzero,
            "delta": self.delta.as_ref().map(|d| (0..4).map(|i| (0..4).map(|j| fmt_q(d.get(i, j))).collect::<Vec<_>>()).collect::<Vec<_>>()),
            "char_poly": self.char_poly.as_ref().map(|c| c.iter().map(fmt_q).collect::<Vec<_>>()),
            "distinct_eigenvalues": self.distinct_eigenvalues,
            "zero_is_eigenvalue": self.zero_is_eigenvalue,
            "minus_one_is_eigenvalue": self.minus_one_is_eigenvalue,
            "generic": self.generic,
        })
    }
}

pub fn is_generic(f: &QuadForm) -> GenericityVerdict {
    let Ok(delta) = matrix_discriminant(f) else {
        return GenericityVerdict {
            det_b_nonzero: false,
            delta: None,
            char_poly: None,
            distinct_eigenvalues: false,
            zero_is_eigenvalue: false,
            minus_one_is_eigenvalue: false,
            generic: false,
        };
    };
    // det(Delta - lambda I) = det(lambda I - Delta) in dimension 4
    let cp = delta.char_poly();
    let distinct = !resultant(&cp, &poly_derivative(&cp)).is_zero();
    let zero = poly_eval(&cp, &q_int(0)).is_zero();
    let minus_one = poly_eval(&cp, &q_int(-1)).is_zero();
    GenericityVerdict {
        det_b_nonzero: true,
        delta: Some(delta),
        char_poly: Some(cp),
        distinct_eigenvalues: distinct,
        zero_is_eigenvalue: zero,
        minus_one_is_eigenvalue: minus_one,
        generic: distinct && !zero && !minus_one,
    }
}

/// Characteristic polynomial of Delta reduced mod p.
pub fn char_poly_mod(f: &QuadForm, p: u64) -> Result<PolyFp> {
    if f.det_b_gcd(p) != 1 {
        return Err(Error::NotInvertible(p));
    }
    let delta = matrix_discriminant(f)?;
    reduce_poly(&delta.char_poly(), p)
}

/// Delta reduced mod p.
pub fn delta_mod(f: &QuadForm, p: u64) -> Result<ModMatrix> {
    matrix_discriminant(f)?.reduce_mod(p)
}

pub fn admissible_prime(f: &QuadForm, p: u64) -> Result<bool> {
    if !is_generic(f).generic {
        return Err(Error::NotGeneric);
    }
    Ok(admissible_unchecked(f, p))
}

fn admissible_unchecked(f: &QuadForm, p: u64) -> bool {
    if p % 2 == 0 || !is_prime(p) {
        return false;
    }
    let pb = BigInt::from(p);
    if (f.det_a() % &pb).is_zero() || (f.det_b() % &pb).is_zero() {
        return false;
    }
    let Ok(rho) = char_poly_mod(f, p) else {
        return false;
    };
    let disc = poly_resultant_mod(&rho, &rho.derivative());
    disc != 0 && rho.eval(0) != 0 && rho.eval(p - 1) != 0
}

/// Admissible primes up to `bound` (empty for non-generic forms).
pub fn admissible_primes(f: &QuadForm, bound: u64) -> Vec<u64> {
    if !is_generic(f).generic {
        return Vec::new();
    }
    crate::ring::modular::primes_in(3, bound)
        .into_iter()
        .filter(|&p| admissible_unchecked(f, p))
        .collect()
}

/// Resultant of two polynomials over F_p via the Sylvester determinant.
pub fn poly_resultant_mod(f: &PolyFp, g: &PolyFp) -> u64 {
    let p = f.p();
    let (Some(m), Some(n)) = (f.degree(), g.degree()) else {
        return 0;
    };
    let size = m + n;
    if size == 0 {
        return 1;
    }
    let s = ModMatrix::from_fn(size, p, |i, j| {
        let (poly, shift, deg) = if i < n { (f, i, m) } else { (g, i - n, n) };
        match j.checked_sub(shift) {
            Some(k) if k <= deg => poly.coeff(deg - k) as i64,
            _ => 0,
        }
    });
    s.det()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qi(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn discriminant_examples() {
        let d = matrix_discriminant(&QuadForm::e1()).unwrap();
        assert_eq!(d, QMatrix::from_int(&diag4([3, 7, 11, 19])));
        let zero_a = QuadForm::new([[0; 4]; 4], identity4(), identity4()).unwrap();
        assert_eq!(
            matrix_discriminant(&zero_a).unwrap(),
            QMatrix::from_int(&diag4([-1, -1, -1, -1]))
        );
        let f = QuadForm::new(identity4(), diag4([2, 2, 2, 2]), identity4()).unwrap();
        assert_eq!(matrix_discriminant(&f).unwrap(), QMatrix::zero(4));
        let sing = QuadForm::new(identity4(), diag4([1, 1, 1, 0]), identity4()).unwrap();
        assert_eq!(matrix_discriminant(&sing), Err(Error::SingularB));
    }

    #[test]
    fn det_identity_examples() {
        let r = det_identity_check(&QuadForm::e1()).unwrap();
        assert!(r.equal);
        assert_eq!(r.lhs, qi(4389, 256));
        let zero_a = QuadForm::new([[0; 4]; 4], identity4(), identity4()).unwrap();
        let r = det_identity_check(&zero_a).unwrap();
        assert_eq!((r.lhs.clone(), r.equal), (qi(1, 256), true));
    }

    #[test]
    fn genericity_examples() {
        assert!(is_generic(&QuadForm::e1()).generic);
        let zero_a = QuadForm::new([[0; 4]; 4], identity4(), identity4()).unwrap();
        let v = is_generic(&zero_a);
        assert!(!v.generic && v.minus_one_is_eigenvalue);
        let ones = QuadForm::new(identity4(), identity4(), identity4()).unwrap();
        let v = is_generic(&ones);
        assert!(!v.generic && !v.distinct_eigenvalues);
        let sing = QuadForm::new(identity4(), [[0; 4]; 4], identity4()).unwrap();
        assert!(!is_generic(&sing).generic);
    }

    #[test]
    fn admissibility_examples() {
        let e1 = QuadForm::e1();
        assert!(admissible_prime(&e1, 13).unwrap());
        assert!(!admissible_prime(&e1, 5).unwrap());
        assert!(!admissible_prime(&e1, 7).unwrap());
        assert!(!admissible_prime(&e1, 19).unwrap());
        let ones = QuadForm::new(identity4(), identity4(), identity4()).unwrap();
        assert_eq!(admissible_prime(&ones, 13), Err(Error::NotGeneric));
        let adm = admissible_primes(&e1, 60);
        assert_eq!(adm, vec![13, 17, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
    }

    #[test]
    fn json_validation() {
        let e1 = QuadForm::e1();
        assert_eq!(QuadForm::from_json(&e1.to_json()).unwrap(), e1);
        let bad = r#"{"a":[[1,2,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],"b":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],"c":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#;
        assert_eq!(QuadForm::from_json(bad), Err(Error::NotSymmetric("a")));
        let missing = r#"{"a":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
            "b":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#;
        match QuadForm::from_json(missing) {
            Err(Error::Parse(msg)) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn det_identity_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut tested = 0;
        while tested < 500 {
            let f = QuadForm::random(&mut rng, 6);
            if f.det_b().is_zero() {
                continue;
            }
            assert!(det_identity_check(&f).unwrap().equal);
            tested += 1;
        }
    }

    #[test]
    fn admissibility_excludes_det_b_divisors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut tested = 0;
        while tested < 100 {
            let f = QuadForm::random(&mut rng, 4);
            if !is_generic(&f).generic {
                continue;
            }
            tested += 1;
            let db = f.det_b();
            for p in crate::ring::modular::primes_in(2, 100) {
                if (&db % BigInt::from(p)).is_zero() {
                    assert!(!admissible_prime(&f, p).unwrap());
                }
            }
        }
    }

    #[test]
    fn genericity_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = QuadForm::random(&mut rng, 3);
            assert_eq!(is_generic(&f), is_generic(&f));
        }
    }
}
