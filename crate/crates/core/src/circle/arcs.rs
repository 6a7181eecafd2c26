//! Major and minor arcs of the circle.

use crate::quadform::QuadForm;
use crate::ring::modular::gcd;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcParams {
    pub a: f64,
    /// M = (log X)^c1
    pub c1: f64,
    /// M' = (log X)^c2
    pub c2: f64,
    /// K = 8 max |b_ij|
    pub k: f64,
}

impl ArcParams {
    /// c1 = 10A and c2 = 10^5 A / delta, with the ineffective delta replaced by 1.
    pub fn standard(form: &QuadForm, a: f64) -> Self {
        ArcParams {
            a,
            c1: 10.0 * a,
            c2: 1e5 * a,
            k: form.k_const() as f64,
        }
    }

    pub fn with_exponents(form: &QuadForm, c1: f64, c2: f64) -> Self {
        ArcParams {
            a: f64::NAN,
            c1,
            c2,
            k: form.k_const() as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Arc {
    Major,
    M1,
    M2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcWitness {
    pub class: Arc,
    pub r: u64,
    pub q: u64,
    /// |theta - r/q| on the circle
    pub eta: f64,
}

/// Circle distance between num/den and r/q.
fn circle_dist(num: u64, den: u64, r: u64, q: u64) -> f64 {
    let d = ((num as i128 * q as i128 - r as i128 * den as i128).abs() as f64) / (den as f64 * q as f64);
    d.min(1.0 - d).abs()
}

/// The fraction with least denominator in [lo, hi] (0 <= lo <= hi).
fn simplest_in(lo: f64, hi: f64, depth: usize) -> Option<(u64, u64)> {
    let c = lo.ceil();
    if c <= hi {
        return Some((c as u64, 1));
    }
    if depth > 60 {
        return None;
    }
    let f = lo.floor();
    let (p, q) = simplest_in(1.0 / (hi - f), 1.0 / (lo - f), depth + 1)?;
    Some((f as u64 * p + q, p))
}

/// Continued-fraction convergents of num/den.
fn convergents(num: u64, den: u64) -> Vec<(u64, u64)> {
    let (mut a, mut b) = (num as u128, den as u128);
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut out = Vec::new();
    while b != 0 {
        let t = a / b;
        let (p2, q2) = (t * p1 + p0, t * q1 + q0);
        out.push((p2 as u64, q2 as u64));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        (a, b) = (b, a - t * b);
    }
    out
}

/// Classifies theta = num/den in [0, 1). MAJOR if some r/q with q <= M' lies
/// within M/X^2; M2 if the nearest-denominator fraction within M/X^2 has
/// M' < q <= KX; otherwise M1 with the Dirichlet witness q <= KX satisfying
/// |theta - r/q| <= 1/(KqX).
pub fn arc_partition(num: u64, den: u64, x: f64, params: &ArcParams) -> ArcWitness {
    let g = gcd(num, den).max(1);
    let (num, den) = (num / g % (den / g), den / g);
    let lx = x.ln();
    let m = lx.powf(params.c1);
    let m_prime = lx.powf(params.c2);
    let width = m / (x * x);
    let kx = params.k * x;
    let theta = num as f64 / den as f64;
    if width >= 0.5 {
        return ArcWitness {
            class: Arc::Major,
            r: 0,
            q: 1,
            eta: theta.min(1.0 - theta),
        };
    }
    // least denominator within the major-arc width; search both lifts of the
    // interval around theta so that wrap-around at 0 is covered
    let mut best: Option<(u64, u64)> = None;
    for shift in [0.0, 1.0] {
        let lo = theta + shift - width;
        let hi = theta + shift + width;
        let lo = lo.max(0.0);
        if lo > hi {
            continue;
        }
        if let Some((p, q)) = simplest_in(lo, hi, 0) {
            if best.map_or(true, |b| q < b.1) {
                best = Some((p % q, q));
            }
        }
    }
    if let Some((r, q)) = best {
        let eta = circle_dist(num, den, r, q);
        if (q as f64) <= m_prime {
            return ArcWitness {
                class: Arc::Major,
                r,
                q,
                eta,
            };
        }
        if (q as f64) <= kx {
            return ArcWitness {
                class: Arc::M2,
                r,
                q,
                eta,
            };
        }
    }
    // Dirichlet: the last convergent with q <= KX
    let (r, q) = convergents(num, den)
        .into_iter()
        .take_while(|&(_, q)| (q as f64) <= kx)
        .last()
        .unwrap_or((0, 1));
    ArcWitness {
        class: Arc::M1,
        r: r % q,
        q,
        eta: circle_dist(num, den, r % q, q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_is_major() {
        let f = QuadForm::e1();
        let w = arc_partition(0, 1, 1000.0, &ArcParams::standard(&f, 10.0));
        assert_eq!((w.class, w.q), (Arc::Major, 1));
        let w = arc_partition(0, 1, 1000.0, &ArcParams::with_exponents(&f, 0.5, 1.0));
        assert_eq!((w.class, w.q), (Arc::Major, 1));
    }

    #[test]
    fn half_x_denominator_is_m2() {
        let f = QuadForm::e1();
        let x: f64 = 1000.0;
        let p = ArcParams::with_exponents(&f, 0.5, 1.0);
        let q = 500;
        let w = arc_partition(7, q, x, &p);
        assert_eq!(w.class, Arc::M2);
        assert_eq!((w.r, w.q), (7, 500));
    }

    #[test]
    fn classification_is_total_and_witnessed() {
        let f = QuadForm::e1();
        let x: f64 = 1000.0;
        let p = ArcParams::with_exponents(&f, 0.5, 1.0);
        let lx = x.ln();
        let (m, mp, kx) = (lx.powf(p.c1), lx.powf(p.c2), p.k * x);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = [0usize; 3];
        for _ in 0..10_000 {
            let den = rng.gen_range(1..1_000_000u64);
            let num = rng.gen_range(0..den);
            let w = arc_partition(num, den, x, &p);
            assert!(gcd(w.r, w.q) == 1 || w.q == 1);
            match w.class {
                Arc::Major => {
                    seen[0] += 1;
                    assert!(w.q as f64 <= mp && w.eta <= m / (x * x) + 1e-15);
                }
                Arc::M2 => {
                    seen[1] += 1;
                    assert!(w.q as f64 > mp && w.q as f64 <= kx && w.eta <= m / (x * x) + 1e-15);
                }
                Arc::M1 => {
                    seen[2] += 1;
                    assert!(w.q as f64 <= kx);
                    assert!(w.eta <= 1.0 / (p.k * w.q as f64 * x) + 1e-15);
                    assert!(w.eta > m / (x * x));
                }
            }
        }
        assert!(seen.iter().all(|&s| s > 0), "{seen:?}");
    }
}
