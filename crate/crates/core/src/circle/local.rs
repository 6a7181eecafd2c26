//! Complete sums C(q, r), the normalized sums B(q), and the p-adic densities.

use crate::error::{Error, Result};
use crate::expsums::{congruence_diagonalize, gauss_sum_quadratic, t_value};
use crate::measures::kahan_sum;
use crate::quadform::QuadForm;
use crate::ring::matrix::{kernel_mod_p, ModMatrix};
use crate::ring::modular::{euler_phi, factorize, gcd, inv_mod, jacobi, primes_in, units, Modulus};
use crate::weil::{e_q, StateVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// Lambda(n) for n <= X: log p on prime powers p^k, 0 elsewhere.
#[derive(Debug, Clone)]
pub struct MangoldtTable {
    x: u64,
    values: Vec<f64>,
    support: Vec<u64>,
}

impl MangoldtTable {
    pub fn new(x: u64) -> Self {
        let n = x as usize;
        let mut spf = vec![0u64; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u64;
                    }
                    j += i;
                }
            }
        }
        let mut values = vec![0.0; n + 1];
        let mut support = Vec::new();
        for m in 2..=n {
            let p = spf[m];
            let mut k = m as u64;
            while k % p == 0 {
                k /= p;
            }
            if k == 1 {
                values[m] = (p as f64).ln();
                support.push(m as u64);
            }
        }
        MangoldtTable { x, values, support }
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn get(&self, n: u64) -> f64 {
        self.values.get(n as usize).copied().unwrap_or(0.0)
    }

    /// Prime powers up to X.
    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn chebyshev_psi(&self) -> f64 {
        kahan_sum(self.values.iter().copied())
    }
}

/// q / phi(q) on units of Z/qZ, 0 elsewhere.
pub fn lambda_mod(q: u64, x: i64) -> BigRational {
    if gcd(x.rem_euclid(q as i64) as u64, q) == 1 {
        BigRational::new(BigInt::from(q), BigInt::from(euler_phi(q)))
    } else {
        BigRational::zero()
    }
}

fn q_mod(form: &QuadForm, x: &[i64; 4], y: &[i64; 4], q: u64) -> u64 {
    form.eval(x, y).rem_euclid(q as i128) as u64
}

fn unit_vectors(q: u64) -> Vec<[i64; 4]> {
    let us: Vec<i64> = units(q).into_iter().map(|u| u as i64).collect();
    let mut out = Vec::with_capacity(us.len().pow(4));
    for &a in &us {
        for &b in &us {
            for &c in &us {
                for &d in &us {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

pub const HISTOGRAM_BUDGET: u64 = 20_000_000;

/// Counts of Q(x, y) mod q over unit-coordinate x, y.
pub fn unit_value_histogram(form: &QuadForm, q: u64) -> Result<Vec<u64>> {
    let phi = euler_phi(q);
    if phi.pow(8) > HISTOGRAM_BUDGET {
        return Err(Error::Budget(format!(
            "phi({q})^8 = {} exceeds {HISTOGRAM_BUDGET}",
            phi.pow(8)
        )));
    }
    let vs = unit_vectors(q);
    let qi = q as i128;
    let cy: Vec<i128> = vs.iter().map(|y| form.eval(&[0; 4], y)).collect();
    let parts: Vec<Vec<u64>> = vs
        .par_iter()
        .map(|x| {
            let ax = form.eval(x, &[0; 4]);
            let mut bt = [0i128; 4];
            for (j, slot) in bt.iter_mut().enumerate() {
                *slot = (0..4).map(|i| x[i] as i128 * form.b[i][j] as i128).sum();
            }
            let mut h = vec![0u64; q as usize];
            for (y, c) in vs.iter().zip(&cy) {
                let lin: i128 = (0..4).map(|j| bt[j] * y[j] as i128).sum();
                h[(ax + lin + c).rem_euclid(qi) as usize] += 1;
            }
            h
        })
        .collect();
    let mut out = vec![0u64; q as usize];
    for h in parts {
        for (o, v) in out.iter_mut().zip(h) {
            *o += v;
        }
    }
    Ok(out)
}

/// C(q, r) by direct enumeration of unit-coordinate pairs.
pub fn c_sum_brute(form: &QuadForm, q: u64, r: u64) -> Result<Complex64> {
    let h = unit_value_histogram(form, q)?;
    Ok(h.iter()
        .enumerate()
        .map(|(t, &n)| e_q((r % q) * t as u64 % q, q) * n as f64)
        .sum())
}

/// C(q, r) = q^6 T_{u,u}(r) with u the indicator of unit coordinates (q odd).
pub fn c_sum_t_path(form: &QuadForm, q: u64, r: u64) -> Result<Complex64> {
    Modulus::new(q)?;
    let u = StateVector::from_fn(q, |x| {
        if x.iter().all(|&c| gcd(c, q) == 1) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(t_value(&u, &u, r, form)? * (q as f64).powi(6))
}

/// Per coordinate subset S (bitmask of coordinates forced to 0): the Gauss
/// sum of Q restricted to the complement at r = 1, and its rank.
fn restricted_gauss_sums(form: &QuadForm, p: u64) -> Vec<(u32, Complex64, usize)> {
    let m = form.gram_mod(p);
    (0u32..256)
        .map(|mask| {
            let keep: Vec<usize> = (0..8).filter(|i| mask & (1 << i) == 0).collect();
            if keep.is_empty() {
                return (mask, Complex64::new(1.0, 0.0), 0);
            }
            let sub = ModMatrix::from_fn(keep.len(), p, |i, j| m.get(keep[i], keep[j]) as i64);
            let g = gauss_sum_quadratic(&sub, &vec![0; keep.len()]);
            let rank = congruence_diagonalize(&sub).0.iter().filter(|&&d| d != 0).count();
            (mask, g, rank)
        })
        .collect()
}

/// C(p, r) for every unit r of an odd prime p, by inclusion-exclusion over
/// the 2^8 coordinate-vanishing patterns. Scaling by r multiplies each
/// restricted Gauss sum by (r/p)^rank.
pub fn c_sums_gauss(form: &QuadForm, p: u64) -> Result<Vec<(u64, Complex64)>> {
    if p % 2 == 0 || !crate::ring::modular::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not an odd prime")));
    }
    let terms = restricted_gauss_sums(form, p);
    Ok((1..p)
        .map(|r| {
            let chi = jacobi(r as i64, p) as f64;
            let s: Complex64 = terms
                .iter()
                .map(|&(mask, g, rank)| {
                    let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    g * sign * chi.powi(rank as i32)
                })
                .sum();
            (r, s)
        })
        .collect())
}

pub fn c_sum_gauss(form: &QuadForm, p: u64, r: u64) -> Result<Complex64> {
    let r = r % p;
    if r == 0 {
        return Err(Error::NotUnit(r, p));
    }
    Ok(c_sums_gauss(form, p)?[(r - 1) as usize].1)
}

pub const LIFT_BUDGET: u64 = 50_000_000;

/// C(p^k, r) for k >= 2. Writing z = z0 + p^{k-1} w, the sum over w vanishes
/// unless H z0 = 0 mod p, leaving
/// p^8 sum_{z0 mod p^{k-1}, units, H z0 = 0 (p)} e_{p^k}(r Q(z0)).
pub fn c_sum_lift(form: &QuadForm, p: u64, k: u32, r: u64) -> Result<Complex64> {
    if k < 2 {
        return Err(Error::Precondition("lifting needs k >= 2".into()));
    }
    let q = p.pow(k);
    let h = form.hessian();
    let hm = ModMatrix::from_fn(8, p, |i, j| h[i][j]);
    let basis = kernel_mod_p(&hm);
    let dim = basis.len() as u32;
    let tail = p.pow(k - 2);
    let work = p.pow(dim).saturating_mul(tail.saturating_pow(8));
    if work > LIFT_BUDGET {
        return Err(Error::Budget(format!("lifting at {p}^{k} needs {work} terms")));
    }
    // kernel vectors mod p with every coordinate nonzero
    let mut roots = Vec::new();
    for code in 0..p.pow(dim) {
        let mut z = [0u64; 8];
        let mut c = code;
        for b in &basis {
            let coef = c % p;
            c /= p;
            for i in 0..8 {
                z[i] = (z[i] + coef * b[i]) % p;
            }
        }
        if z.iter().all(|&v| v != 0) {
            roots.push(z);
        }
    }
    let r = r % q;
    let mut terms = Vec::new();
    for z1 in &roots {
        for code in 0..tail.pow(8) {
            let mut z = [0i64; 8];
            let mut c = code;
            for i in 0..8 {
                z[i] = (z1[i] + p * (c % tail)) as i64;
                c /= tail;
            }
            let x = [z[0], z[1], z[2], z[3]];
            let y = [z[4], z[5], z[6], z[7]];
            let v = q_mod(form, &x, &y, q);
            terms.push(e_q((r as u128 * v as u128 % q as u128) as u64, q));
        }
    }
    let s: Complex64 = terms.into_iter().sum();
    Ok(s * (p as f64).powi(8))
}

/// C(q, r): q = 1 gives 1; odd q <= 31 uses the T-path; odd primes use Gauss
/// sums; prime powers use lifting (or enumeration for small powers of 2);
/// composites split by CRT, C(q1 q2, r) = C(q1, r u1) C(q2, r u2) with
/// u1 = q2^{-1} mod q1 and u2 = q1^{-1} mod q2.
pub fn c_sum(form: &QuadForm, q: u64, r: u64) -> Result<Complex64> {
    if q == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if gcd(r % q, q) != 1 {
        return Err(Error::NotUnit(r % q, q));
    }
    if q % 2 == 1 && q <= 31 {
        return c_sum_t_path(form, q, r);
    }
    let fac = factorize(q);
    if fac.len() == 1 {
        let (p, k) = fac[0];
        if p == 2 && euler_phi(q).pow(8) <= HISTOGRAM_BUDGET {
            return c_sum_brute(form, q, r);
        }
        return if k == 1 {
            c_sum_gauss(form, p, r)
        } else {
            c_sum_lift(form, p, k, r)
        };
    }
    let (p, k) = fac[0];
    let q1 = p.pow(k);
    let q2 = q / q1;
    let u1 = inv_mod(q2 % q1, q1).unwrap();
    let u2 = inv_mod(q1 % q2, q2).unwrap();
    Ok(c_sum(form, q1, r % q1 * u1 % q1)? * c_sum(form, q2, r % q2 * u2 % q2)?)
}

/// (r, C(q, r)) over all units r. Prime powers take the cheapest exact path
/// (Gauss sums, lifting, or one histogram for every r); composites combine the
/// prime-power tables by CRT.
pub fn c_table(form: &QuadForm, q: u64) -> Result<Vec<(u64, Complex64)>> {
    let fac = factorize(q);
    if fac.len() == 1 {
        let (p, k) = fac[0];
        if p != 2 && k == 1 {
            return c_sums_gauss(form, p);
        }
        if p != 2 && c_sum_lift(form, p, k, 1).is_ok() {
            return units(q)
                .into_par_iter()
                .map(|r| c_sum_lift(form, p, k, r).map(|c| (r, c)))
                .collect();
        }
        if let Ok(h) = unit_value_histogram(form, q) {
            return Ok(units(q)
                .into_iter()
                .map(|r| {
                    let c = h
                        .iter()
                        .enumerate()
                        .map(|(t, &n)| e_q(r * t as u64 % q, q) * n as f64)
                        .sum();
                    (r, c)
                })
                .collect());
        }
        return units(q)
            .into_par_iter()
            .map(|r| c_sum(form, q, r).map(|c| (r, c)))
            .collect();
    }
    let (p, k) = fac[0];
    let q1 = p.pow(k);
    let q2 = q / q1;
    let t1: std::collections::HashMap<u64, Complex64> = c_table(form, q1)?.into_iter().collect();
    let t2: std::collections::HashMap<u64, Complex64> = c_table(form, q2)?.into_iter().collect();
    let u1 = inv_mod(q2 % q1, q1).unwrap();
    let u2 = inv_mod(q1 % q2, q2).unwrap();
    Ok(units(q)
        .into_iter()
        .map(|r| (r, t1[&(r % q1 * u1 % q1)] * t2[&(r % q2 * u2 % q2)]))
        .collect())
}

/// B_{Q,N}(q) = phi(q)^{-8} sum_r C(q, r) e_q(-rN), with its imaginary part.
pub fn b_sum_complex(form: &QuadForm, q: u64, n: i64) -> Result<Complex64> {
    if q == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let nq = n.rem_euclid(q as i64) as u64;
    let cs = c_table(form, q)?;
    let terms: Vec<Complex64> = cs
        .iter()
        .map(|&(r, c)| c * e_q((q - (r as u128 * nq as u128 % q as u128) as u64) % q, q))
        .collect();
    let re = kahan_sum(terms.iter().map(|t| t.re));
    let im = kahan_sum(terms.iter().map(|t| t.im));
    Ok(Complex64::new(re, im) / (euler_phi(q) as f64).powi(8))
}

pub fn b_sum(form: &QuadForm, q: u64, n: i64) -> Result<f64> {
    Ok(b_sum_complex(form, q, n)?.re)
}

/// Ramanujan's sum c_q(n) = sum_{d | gcd(q, n)} mu(q/d) d.
pub fn ramanujan_sum(q: u64, n: u64) -> i64 {
    let g = gcd(n % q, q);
    let g = if n % q == 0 { q } else { g };
    let mut s = 0i64;
    for d in 1..=g {
        if g % d == 0 {
            s += mobius(q / d) * d as i64;
        }
    }
    s
}

fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// B(q) exactly: phi(q)^{-8} sum over unit pairs of c_q(Q(x,y) - N).
pub fn b_sum_exact(form: &QuadForm, q: u64, n: i64) -> Result<BigRational> {
    if q == 1 {
        return Ok(BigRational::one());
    }
    let h = unit_value_histogram(form, q)?;
    let mut total = BigInt::zero();
    for (t, &count) in h.iter().enumerate() {
        if count > 0 {
            let arg = (t as i64 - n).rem_euclid(q as i64) as u64;
            total += BigInt::from(count) * BigInt::from(ramanujan_sum(q, arg));
        }
    }
    Ok(BigRational::new(total, BigInt::from(euler_phi(q)).pow(8)))
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalDensityReport {
    pub p: u64,
    pub n: u32,
    /// p^{-7n} sum over Q = N mod p^n with weights (p/(p-1))^8, when enumerable
    pub beta_pn: Option<String>,
    /// sum_{j <= n} B(p^j) exactly, when every term is enumerable
    pub via_b_sums: Option<String>,
    pub beta_pn_f64: Option<f64>,
    /// sum_{j <= n} B(p^j) from the complete-sum routes
    pub via_b_sums_f64: f64,
    pub exact_agree: Option<bool>,
    /// |B(p^n)| < 1e-12
    pub stabilized: bool,
    pub enumeration_skipped: bool,
}

fn to_f64(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

pub fn beta_pn(form: &QuadForm, p: u64, n: u32, big_n: i64) -> Result<LocalDensityReport> {
    let q = p.pow(n);
    let enumerated = unit_value_histogram(form, q).ok().map(|h| {
        let count = h[big_n.rem_euclid(q as i64) as usize];
        BigRational::new(
            BigInt::from(count) * BigInt::from(p).pow(8),
            BigInt::from(p - 1).pow(8) * BigInt::from(p).pow(7 * n),
        )
    });
    let mut exact = Some(BigRational::zero());
    let mut float = Vec::new();
    let mut last = 0.0;
    for j in 0..=n {
        let qj = p.pow(j);
        if let Some(acc) = exact.as_mut() {
            match b_sum_exact(form, qj, big_n) {
                Ok(b) => *acc += b,
                Err(_) => exact = None,
            }
        }
        last = b_sum(form, qj, big_n)?;
        float.push(last);
    }
    let exact_agree = match (&enumerated, &exact) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };
    Ok(LocalDensityReport {
        p,
        n,
        beta_pn_f64: enumerated.as_ref().map(to_f64),
        beta_pn: enumerated.as_ref().map(|x| x.to_string()),
        via_b_sums: exact.as_ref().map(|x| x.to_string()),
        via_b_sums_f64: kahan_sum(float.into_iter()),
        exact_agree,
        stabilized: n >= 1 && last.abs() < 1e-12,
        enumeration_skipped: enumerated.is_none(),
    })
}

/// Primes dividing det H, where B(p^j) can survive for j >= 2.
pub fn degenerate_primes(form: &QuadForm) -> Vec<u64> {
    let h = form.hessian();
    let rows: Vec<Vec<BigInt>> = h.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let det = crate::ring::matrix::bareiss_det(rows).abs();
    if det.is_zero() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut d = det;
    let mut p = 2u64;
    while BigInt::from(p * p) <= d {
        if (&d % p).is_zero() {
            out.push(p);
            while (&d % p).is_zero() {
                d /= p;
            }
        }
        p += 1;
    }
    if d > BigInt::one() {
        out.push(d.to_u64().unwrap_or(0));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalFactor {
    pub p: u64,
    pub n: u32,
    pub beta_p: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonArchimedean {
    pub n: i64,
    pub p_max: u64,
    pub local_factors: Vec<LocalFactor>,
    pub product: f64,
    /// estimated sum_{p > p_max} |B(p)| from a power-law fit of |B(p)|
    pub tail_estimate: f64,
}

/// prod_{p <= p_max} beta_p(N). beta_p is truncated at n_small for p <= 13
/// and for primes dividing det H; at every other odd prime B(p^j) = 0 for
/// j >= 2, so 1 + B(p) is exact there.
pub fn local_product(form: &QuadForm, n: i64, p_max: u64, n_small: u32) -> Result<NonArchimedean> {
    if p_max > 200 {
        return Err(Error::Precondition("p_max must be at most 200".into()));
    }
    let degenerate = degenerate_primes(form);
    let primes = primes_in(2, p_max);
    let factors: Vec<LocalFactor> = primes
        .iter()
        .map(|&p| {
            let depth = if p <= 13 || degenerate.contains(&p) { n_small } else { 1 };
            let mut beta = 0.0;
            for j in 0..=depth {
                beta += b_sum(form, p.pow(j), n)?;
            }
            Ok(LocalFactor {
                p,
                n: depth,
                beta_p: beta,
            })
        })
        .collect::<Result<_>>()?;
    let product = factors.iter().map(|f| f.beta_p).product();
    // fit log|B(p)| ~ c - alpha log p over the upper half of the range
    let pts: Vec<(f64, f64)> = factors
        .iter()
        .filter(|f| f.p > p_max / 2 && f.n == 1)
        .map(|f| ((f.p as f64).ln(), (f.beta_p - 1.0).abs().max(1e-300).ln()))
        .collect();
    let tail_estimate = if pts.len() >= 3 {
        let fit = crate::expsums::linear_fit(
            &pts.iter().map(|p| p.0).collect::<Vec<_>>(),
            &pts.iter().map(|p| p.1).collect::<Vec<_>>(),
        );
        let alpha = -fit.slope;
        if alpha > 1.0 {
            let pm = p_max as f64;
            fit.intercept.exp() * pm.powf(1.0 - alpha) / ((alpha - 1.0) * pm.ln())
        } else {
            f64::INFINITY
        }
    } else {
        f64::NAN
    };
    Ok(NonArchimedean {
        n,
        p_max,
        local_factors: factors,
        product,
        tail_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::modular::is_prime;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mangoldt_values() {
        let t = MangoldtTable::new(100);
        assert_eq!(t.get(1), 0.0);
        assert!((t.get(8) - 2f64.ln()).abs() < 1e-15);
        assert!((t.get(49) - 7f64.ln()).abs() < 1e-15);
        assert_eq!(t.get(12), 0.0);
        assert_eq!(t.support().len(), 25 + 10);
        for x in [100u64, 1000, 10000] {
            let t = MangoldtTable::new(x);
            let l = (x as f64).ln();
            assert!((t.chebyshev_psi() - x as f64).abs() <= 3.0 * (x as f64).sqrt() * l * l);
        }
    }

    #[test]
    fn lambda_mod_values() {
        assert_eq!(lambda_mod(15, 2), BigRational::new(15.into(), 8.into()));
        assert!(lambda_mod(9, 3).is_zero());
        for q in 1..=200u64 {
            let total: BigRational = (0..q as i64).map(|x| lambda_mod(q, x)).sum();
            assert_eq!(total, BigRational::from_integer(BigInt::from(q)), "q = {q}");
        }
    }

    #[test]
    fn c_sum_paths_agree() {
        let f = QuadForm::e1();
        let brute = c_sum_brute(&f, 3, 1).unwrap();
        // full 3^8 loop restricted to unit coordinates
        let mut direct = Complex64::new(0.0, 0.0);
        for code in 0..3u64.pow(8) {
            let z: Vec<i64> = (0..8).map(|i| (code / 3u64.pow(i) % 3) as i64).collect();
            if z.iter().all(|&v| v != 0) {
                let v = f.eval(&[z[0], z[1], z[2], z[3]], &[z[4], z[5], z[6], z[7]]);
                direct += e_q(v.rem_euclid(3) as u64, 3);
            }
        }
        assert!((brute - direct).norm() < 1e-9);
        assert!((c_sum(&f, 3, 1).unwrap() - direct).norm() < 1e-9);
        for r in 1..5 {
            assert!((c_sum_t_path(&f, 5, r).unwrap() - c_sum_brute(&f, 5, r).unwrap()).norm() < 1e-6);
            assert!((c_sum_gauss(&f, 5, r).unwrap() - c_sum_brute(&f, 5, r).unwrap()).norm() < 1e-6);
        }
        for r in [1, 3, 6] {
            assert!((c_sum_gauss(&f, 7, r).unwrap() - c_sum_brute(&f, 7, r).unwrap()).norm() < 1e-6);
        }
        // C(5, -r) = conj C(5, r) for integral coefficients
        for r in 1..5 {
            let a = c_sum(&f, 5, r).unwrap();
            let b = c_sum(&f, 5, 5 - r).unwrap();
            assert!((a - b.conj()).norm() < 1e-6);
        }
        assert_eq!(c_sum(&f, 1, 0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn lifting_matches_t_path() {
        let f = QuadForm::e1();
        // 3 divides det H for E1; 5 does not
        for (p, k) in [(3u64, 2u32), (5, 2), (3, 3)] {
            let q = p.pow(k);
            for r in [1u64, 2] {
                let lift = c_sum_lift(&f, p, k, r).unwrap();
                let t = c_sum_t_path(&f, q, r).unwrap();
                assert!(
                    (lift - t).norm() < 1e-6 * (q as f64).powi(8).sqrt(),
                    "{q} {r}: {lift} vs {t}"
                );
            }
        }
        assert_eq!(c_sum_lift(&f, 5, 2, 1).unwrap().norm(), 0.0);
    }

    #[test]
    fn crt_splitting() {
        let f = QuadForm::e1();
        for r in [1u64, 2, 7] {
            let t = c_sum_t_path(&f, 15, r).unwrap();
            let u1 = inv_mod(5, 3).unwrap();
            let u2 = inv_mod(3, 5).unwrap();
            let crt = c_sum_brute(&f, 3, r * u1 % 3).unwrap() * c_sum_brute(&f, 5, r * u2 % 5).unwrap();
            assert!((t - crt).norm() < 1e-5);
        }
    }

    #[test]
    fn b_sums() {
        let f = QuadForm::e1();
        assert_eq!(b_sum(&f, 1, 8).unwrap(), 1.0);
        let b15 = b_sum(&f, 15, 8).unwrap();
        let b3 = b_sum(&f, 3, 8).unwrap();
        let b5 = b_sum(&f, 5, 8).unwrap();
        assert!((b15 - b3 * b5).abs() < 1e-9);
        for q in [3u64, 5, 7, 9, 15] {
            assert!(b_sum_complex(&f, q, 8).unwrap().im.abs() < 1e-10);
            let exact = to_f64(&b_sum_exact(&f, q, 8).unwrap());
            assert!((exact - b_sum(&f, q, 8).unwrap()).abs() < 1e-9, "q = {q}");
        }
        assert_eq!(ramanujan_sum(12, 0), 4);
        assert_eq!(ramanujan_sum(12, 1), 0);
        assert_eq!(ramanujan_sum(5, 1), -1);
    }

    #[test]
    fn multiplicativity_random_pairs() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = QuadForm::e1();
        let moduli = [3u64, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27];
        let mut done = 0;
        while done < 50 {
            let a = moduli[rng.gen_range(0..moduli.len())];
            let b = moduli[rng.gen_range(0..moduli.len())];
            if gcd(a, b) != 1 {
                continue;
            }
            let n = rng.gen_range(-50..500);
            let lhs = b_sum(&f, a * b, n).unwrap();
            let rhs = b_sum(&f, a, n).unwrap() * b_sum(&f, b, n).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "{a} {b} {n}: {lhs} vs {rhs}");
            done += 1;
        }
    }

    #[test]
    fn beta_cross_methods() {
        let f = QuadForm::e1();
        for (p, n) in [(3u64, 1u32), (3, 2), (5, 1), (7, 1)] {
            let r = beta_pn(&f, p, n, 8).unwrap();
            assert_eq!(r.exact_agree, Some(true), "{r:?}");
            assert!((r.beta_pn_f64.unwrap() - r.via_b_sums_f64).abs() < 1e-9);
        }
        // periodic in N mod 3
        let a = beta_pn(&f, 3, 1, 4).unwrap();
        let b = beta_pn(&f, 3, 1, 7).unwrap();
        assert_eq!(a.beta_pn, b.beta_pn);
    }

    #[test]
    fn degenerate_primes_e1() {
        let d = degenerate_primes(&QuadForm::e1());
        assert!(d.iter().all(|&p| is_prime(p)));
        assert!(d.contains(&3) && d.contains(&19));
    }
}
