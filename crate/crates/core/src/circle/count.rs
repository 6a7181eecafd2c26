//! Lambda-weighted counts of Q(x, y) = N over [X]^8.

use super::local::MangoldtTable;
use crate::error::{Error, Result};
use crate::quadform::QuadForm;
use rayon::prelude::*;
use serde::Serialize;

pub const COUNT_BUDGET: f64 = 1e10;

/// Which coordinate the quadratic is solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveSide {
    /// y_4, looping over x and y_1..y_3
    Y,
    /// x_4, looping over y and x_1..x_3
    X,
}

fn isqrt_exact(d: i64) -> Option<i64> {
    if d < 0 {
        return None;
    }
    // squares are 0, 1, 4 or 9 mod 16
    if (0x0213u32 >> (d & 15)) & 1 == 0 {
        return None;
    }
    let mut s = (d as f64).sqrt() as i64;
    while s * s > d {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= d {
        s += 1;
    }
    (s * s == d).then_some(s)
}

/// Swap the roles of x and y: Q'(x, y) = Q(y, x).
fn swapped(form: &QuadForm) -> QuadForm {
    let mut bt = [[0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            bt[i][j] = form.b[j][i];
        }
    }
    QuadForm {
        a: form.c,
        b: bt,
        c: form.a,
    }
}

/// sum over x, y in [X]^4 with Q(x, y) = N of Lambda^{(x)4}(x) Lambda^{(x)4}(y),
/// for each N in `targets`. Seven coordinates run over prime powers and the
/// last is found from an integer quadratic.
pub fn brute_force_weighted_counts(form: &QuadForm, targets: &[i64], x: u64, side: SolveSide) -> Result<Vec<f64>> {
    let table = MangoldtTable::new(x);
    let supp: Vec<i64> = table.support().iter().map(|&v| v as i64).collect();
    let work = (supp.len() as f64).powi(7);
    if work > COUNT_BUDGET {
        let mut suggest = x;
        while suggest > 2 && (MangoldtTable::new(suggest).support().len() as f64).powi(7) > COUNT_BUDGET {
            suggest -= 1;
        }
        return Err(Error::Budget(format!("{work:.2e} loop iterations; try X <= {suggest}")));
    }
    let f = match side {
        SolveSide::Y => form.clone(),
        SolveSide::X => swapped(form),
    };
    let lam: Vec<f64> = (0..=x).map(|n| table.get(n)).collect();
    let (a, b, c) = (f.a, f.b, f.c);
    // |Q| on [X]^8 stays far below 2^62 under this bound, so i64 is exact
    let coeff = a
        .iter()
        .chain(&b)
        .chain(&c)
        .flatten()
        .map(|v| v.unsigned_abs())
        .max()
        .unwrap_or(0) as f64;
    if coeff * 64.0 * (x as f64).powi(2) * (1.0 + coeff) * 16.0 > 2f64.powi(60) {
        return Err(Error::Budget("coefficients too large for 64-bit accumulation".into()));
    }
    let c44 = c[3][3];
    let xmax = x as i64;
    // per (y1, y2, y3): y, y^T c y over the first three, the y-part of the
    // y4 coefficient, and the weight
    struct Triple {
        y: [i64; 3],
        quad: i64,
        lin4: i64,
        w: f64,
    }
    let mut triples = Vec::with_capacity(supp.len().pow(3));
    for &y1 in &supp {
        for &y2 in &supp {
            for &y3 in &supp {
                let y = [y1, y2, y3];
                let mut quad = 0;
                let mut lin4 = 0;
                for i in 0..3 {
                    lin4 += 2 * c[i][3] * y[i];
                    for j in 0..3 {
                        quad += c[i][j] * y[i] * y[j];
                    }
                }
                let w = lam[y1 as usize] * lam[y2 as usize] * lam[y3 as usize];
                triples.push(Triple { y, quad, lin4, w });
            }
        }
    }
    // partition by the first coordinate; each chunk keeps its own sums
    let chunks: Vec<Vec<(f64, f64)>> = supp
        .par_iter()
        .map(|&x1| {
            let mut acc = vec![(0.0f64, 0.0f64); targets.len()];
            let mut xv = [x1, 0, 0, 0];
            for &x2 in &supp {
                xv[1] = x2;
                for &x3 in &supp {
                    xv[2] = x3;
                    for &x4 in &supp {
                        xv[3] = x4;
                        let wx = lam[x1 as usize] * lam[x2 as usize] * lam[x3 as usize] * lam[x4 as usize];
                        let mut ax = 0;
                        for i in 0..4 {
                            for j in 0..4 {
                                ax += a[i][j] * xv[i] * xv[j];
                            }
                        }
                        let mut lin = [0i64; 4];
                        for (j, l) in lin.iter_mut().enumerate() {
                            *l = (0..4).map(|i| xv[i] * b[i][j]).sum();
                        }
                        for t3 in &triples {
                            let rest = ax + t3.quad + lin[0] * t3.y[0] + lin[1] * t3.y[1] + lin[2] * t3.y[2];
                            let lin4 = lin[3] + t3.lin4;
                            let wy = wx * t3.w;
                            for (t, &n) in targets.iter().enumerate() {
                                let k = rest - n;
                                let mut add = |y4: i64| {
                                    if (1..=xmax).contains(&y4) {
                                        let l = lam[y4 as usize];
                                        if l > 0.0 {
                                            // compensated accumulation
                                            let (s, comp) = &mut acc[t];
                                            let v = wy * l - *comp;
                                            let nt = *s + v;
                                            *comp = (nt - *s) - v;
                                            *s = nt;
                                        }
                                    }
                                };
                                if c44 == 0 {
                                    if lin4 != 0 && k % lin4 == 0 {
                                        add(-k / lin4);
                                    }
                                } else if let Some(s) = isqrt_exact(lin4 * lin4 - 4 * c44 * k) {
                                    for (i, num) in [-lin4 + s, -lin4 - s].into_iter().enumerate() {
                                        if i == 1 && s == 0 {
                                            break;
                                        }
                                        if num % (2 * c44) == 0 {
                                            add(num / (2 * c44));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; targets.len()];
    for chunk in chunks {
        for (o, (s, _)) in out.iter_mut().zip(chunk) {
            *o += s;
        }
    }
    Ok(out)
}

pub fn brute_force_weighted_count(form: &QuadForm, n: i64, x: u64) -> Result<f64> {
    Ok(brute_force_weighted_counts(form, &[n], x, SolveSide::Y)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// The total 8-coordinate loop over prime powers.
    fn total_loop(form: &QuadForm, x: u64) -> HashMap<i128, f64> {
        let t = MangoldtTable::new(x);
        let s: Vec<i64> = t.support().iter().map(|&v| v as i64).collect();
        let n = s.len();
        let mut out = HashMap::new();
        for code in 0..n.pow(8) {
            let mut z = [0i64; 8];
            let mut c = code;
            let mut w = 1.0;
            for zi in z.iter_mut() {
                *zi = s[c % n];
                c /= n;
                w *= t.get(*zi as u64);
            }
            let v = form.eval(&[z[0], z[1], z[2], z[3]], &[z[4], z[5], z[6], z[7]]);
            *out.entry(v).or_insert(0.0) += w;
        }
        out
    }

    #[test]
    fn matches_total_loop_at_10() {
        let f = QuadForm::e1();
        let oracle = total_loop(&f, 10);
        let targets: Vec<i64> = (1..=600).collect();
        let got = brute_force_weighted_counts(&f, &targets, 10, SolveSide::Y).unwrap();
        for (n, g) in targets.iter().zip(&got) {
            let want = oracle.get(&(*n as i128)).copied().unwrap_or(0.0);
            assert!((g - want).abs() <= 1e-9 * want.max(1.0), "N = {n}: {g} vs {want}");
        }
    }

    #[test]
    fn beyond_max_is_zero() {
        let f = QuadForm::e1();
        let max = f.eval(&[10; 4], &[10; 4]) as i64;
        assert_eq!(brute_force_weighted_count(&f, max + 1, 10).unwrap(), 0.0);
    }

    #[test]
    fn orientation_invariance() {
        let f = QuadForm::new(
            crate::quadform::diag4([1, 2, 1, 3]),
            crate::quadform::identity4(),
            crate::quadform::diag4([1, 2, 1, 3]),
        )
        .unwrap();
        let targets = [150i64, 301, 420];
        let y = brute_force_weighted_counts(&f, &targets, 10, SolveSide::Y).unwrap();
        let x = brute_force_weighted_counts(&f, &targets, 10, SolveSide::X).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn budget_error_suggests_x() {
        let f = QuadForm::e1();
        match brute_force_weighted_counts(&f, &[1000], 500, SolveSide::Y) {
            Err(Error::Budget(m)) => assert!(m.contains("try X")),
            other => panic!("{other:?}"),
        }
    }
}
