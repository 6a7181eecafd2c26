//! The archimedean density beta_infinity of Q(x, y) = nu on [0, 1]^8.

use crate::error::{Error, Result};
use crate::expsums::{linear_fit, separable_pieces};
use crate::quadform::QuadForm;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Bounds for Q on [0,1]^8 from the signs of its monomial coefficients.
pub fn value_range(form: &QuadForm) -> (f64, f64) {
    let h = form.hessian();
    let (mut lo, mut hi) = (0.0, 0.0);
    for i in 0..8 {
        for j in i..8 {
            // coefficient of z_i z_j in Q = z^T H z / 2
            let c = if i == j { h[i][i] as f64 / 2.0 } else { h[i][j] as f64 };
            if c < 0.0 {
                lo += c;
            } else {
                hi += c;
            }
        }
    }
    (lo, hi)
}

pub const SLAB_WIDTHS: [f64; 3] = [0.04, 0.02, 0.01];
const BATCHES: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct ArchimedeanReport {
    pub nu: f64,
    pub value: f64,
    pub stderr: f64,
    /// (delta, slab estimate) before extrapolation
    pub per_delta: Vec<(f64, f64)>,
    pub samples: usize,
    pub warning: Option<String>,
}

fn hessian_f64(form: &QuadForm) -> [[f64; 8]; 8] {
    form.hessian().map(|r| r.map(|v| v as f64))
}

fn eval_unit(h: &[[f64; 8]; 8], z: &[f64; 8]) -> f64 {
    let mut s = 0.0;
    for i in 0..8 {
        let mut row = 0.0;
        for j in 0..8 {
            row += h[i][j] * z[j];
        }
        s += z[i] * row;
    }
    s / 2.0
}

/// Slab Monte Carlo: (1/2 delta) vol{|Q - nu| <= delta} at each width in
/// SLAB_WIDTHS, extrapolated linearly to delta = 0. The standard error is
/// the spread of the extrapolated value over independent batches.
pub fn beta_infty(form: &QuadForm, nu: f64, samples: usize, seed: u64) -> ArchimedeanReport {
    let (lo, hi) = value_range(form);
    if nu < lo || nu > hi {
        return ArchimedeanReport {
            nu,
            value: 0.0,
            stderr: 0.0,
            per_delta: Vec::new(),
            samples: 0,
            warning: Some(format!("nu = {nu} lies outside the value range [{lo}, {hi}]")),
        };
    }
    let h = hessian_f64(form);
    let per_batch = (samples / BATCHES).max(1);
    let counts: Vec<[u64; 3]> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut c = [0u64; 3];
            let mut z = [0.0; 8];
            for _ in 0..per_batch {
                z.iter_mut().for_each(|v| *v = rng.gen::<f64>());
                let d = (eval_unit(&h, &z) - nu).abs();
                for (k, w) in SLAB_WIDTHS.iter().enumerate() {
                    if d <= *w {
                        c[k] += 1;
                    }
                }
            }
            c
        })
        .collect();
    let xs = SLAB_WIDTHS.to_vec();
    let extrapolated: Vec<f64> = counts
        .iter()
        .map(|c| {
            let ys: Vec<f64> = (0..3).map(|k| c[k] as f64 / per_batch as f64 / (2.0 * xs[k])).collect();
            linear_fit(&xs, &ys).intercept
        })
        .collect();
    let b = BATCHES as f64;
    let mean = extrapolated.iter().sum::<f64>() / b;
    let var = extrapolated.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
    let total = per_batch * BATCHES;
    let per_delta = (0..3)
        .map(|k| {
            let hits: u64 = counts.iter().map(|c| c[k]).sum();
            (xs[k], hits as f64 / total as f64 / (2.0 * xs[k]))
        })
        .collect();
    ArchimedeanReport {
        nu,
        value: mean,
        stderr: (var / b).sqrt(),
        per_delta,
        samples: total,
        warning: None,
    }
}

/// int_{[0,1]^2} e(t (a x^2 + b x y + c y^2)) dx dy by composite
/// Gauss-Legendre with panels resolving the oscillation.
pub fn binary_piece_integral(piece: (i64, i64, i64), t: f64, rule: &GaussLegendre) -> Complex64 {
    let (a, b, c) = (piece.0 as f64, piece.1 as f64, piece.2 as f64);
    let k = a.abs() + b.abs() + c.abs();
    let panels = (2.0 * t.abs() * k).ceil() as usize + 1;
    let w = 1.0 / panels as f64;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|i| {
            let left = i as f64 * w;
            rule.as_node_weight_pairs()
                .iter()
                .map(move |&(x, wt)| (left + (x + 1.0) * w / 2.0, wt * w / 2.0))
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, wx) in &nodes {
        let mut inner = Complex64::new(0.0, 0.0);
        for &(y, wy) in &nodes {
            let ph = TAU * t * (a * x * x + b * x * y + c * y * y);
            inner += Complex64::new(ph.cos(), ph.sin()) * wy;
        }
        acc += inner * wx;
    }
    acc
}

/// I(t) = int_{[0,1]^8} e(t Q) for a separable form.
pub fn i_of_t(form: &QuadForm, t: f64) -> Result<Complex64> {
    let rule = GaussLegendre::new(8.try_into().unwrap());
    let pieces = separable_pieces(form)?;
    Ok(pieces.iter().map(|&p| binary_piece_integral(p, t, &rule)).product())
}

#[derive(Debug, Clone, Serialize)]
pub struct FourierDensity {
    pub nu: f64,
    pub value: f64,
    pub t_max: f64,
    pub step: f64,
}

/// beta_infty = int I(t) e(-t nu) dt over |t| <= t_max, separable forms only.
/// The trapezoid rule with step h sums the density over nu + Z/h (Poisson
/// summation), so h below 1/(range width) leaves no aliasing.
pub fn beta_infty_fourier(form: &QuadForm, nu: f64, t_max: f64) -> Result<FourierDensity> {
    separable_pieces(form)?;
    let (lo, hi) = value_range(form);
    if nu < lo || nu > hi {
        return Ok(FourierDensity {
            nu,
            value: 0.0,
            t_max,
            step: 0.0,
        });
    }
    let h = 1.0 / (hi - lo + 1.0);
    let n = (t_max / h).ceil() as usize;
    let terms: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * h;
            let i = i_of_t(form, t).map_err(|e| Error::Precondition(e.to_string()))?;
            let ph = -TAU * t * nu;
            let v = (i * Complex64::new(ph.cos(), ph.sin())).re;
            Ok(if k == 0 { v } else { 2.0 * v })
        })
        .collect::<Result<_>>()?;
    Ok(FourierDensity {
        nu,
        value: h * crate::measures::kahan_sum(terms.into_iter()),
        t_max,
        step: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::identity4;

    fn aci() -> QuadForm {
        QuadForm::new(identity4(), identity4(), identity4()).unwrap()
    }

    #[test]
    fn range_and_outside() {
        let f = aci();
        assert_eq!(value_range(&f), (0.0, 12.0));
        let r = beta_infty(&f, -1.0, 1000, 1);
        assert_eq!(r.value, 0.0);
        assert!(r.warning.is_some());
    }

    #[test]
    fn piece_integral_small_t() {
        let rule = GaussLegendre::new(8.try_into().unwrap());
        let v = binary_piece_integral((1, 1, 1), 0.0, &rule);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // int_0^1 int_0^1 e(t x^2) dx dy for t = 0.5 against a fine midpoint rule
        let t = 0.5;
        let n = 20000;
        let mid: Complex64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                let ph = TAU * t * x * x;
                Complex64::new(ph.cos(), ph.sin())
            })
            .sum::<Complex64>()
            / n as f64;
        assert!((binary_piece_integral((1, 0, 0), t, &rule) - mid).norm() < 1e-6);
    }

    #[test]
    fn two_paths_agree() {
        let f = aci();
        let nu = 6.0;
        let mc = beta_infty(&f, nu, 4_000_000, 7);
        let four = beta_infty_fourier(&f, nu, 10.0).unwrap();
        let rel = (mc.value - four.value).abs() / four.value;
        assert!(rel < 0.05, "mc {mc:?} fourier {four:?}");
    }

    #[test]
    fn stderr_scaling() {
        let f = QuadForm::e1();
        let small = beta_infty(&f, 9.5, 400_000, 7);
        let big = beta_infty(&f, 9.5, 1_600_000, 4);
        let ratio = small.stderr / big.stderr;
        assert!((ratio - 2.0).abs() <= 0.3 * 2.0, "ratio {ratio}");
    }
}
