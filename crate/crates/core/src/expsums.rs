//! Complete sums T_{f1,f2}(r), the operator Phi_r, Gauss sums and the
//! dilate-average experiments.

use crate::error::{Error, Result};
use crate::quadform::{admissible_prime, QuadForm};
use crate::ring::matrix::ModMatrix;
use crate::ring::modular::{gcd, inv_mod, jacobi, mul_mod, Modulus};
use crate::weil::{coords, dilate_word, e_q, form_word, index, rho_of_word, rho_squarefree, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

fn phase_table(q: u64) -> Vec<Complex64> {
    (0..q).map(|t| e_q(t, q)).collect()
}

/// x^T M x mod q for every x, in StateVector index order.
fn quad_values(m: &ModMatrix, q: u64) -> Vec<u32> {
    (0..q.pow(4) as usize).map(|i| m.quad(&coords(i, q)) as u32).collect()
}

fn check_unit(r: u64, q: u64) -> Result<u64> {
    let r = r % q;
    if gcd(r, q) != 1 {
        return Err(Error::NotUnit(r, q));
    }
    Ok(r)
}

/// Phi_r f(x) = q^2 E_y f(y) e_q(r Q(x, y)), via modulation, Fourier
/// transform and the reindexing x -> r b^T x.
pub fn phi_r(f: &StateVector, r: u64, form: &QuadForm) -> Result<StateVector> {
    let q = f.modulus();
    let r = check_unit(r, q)?;
    let table = phase_table(q);
    let cq = quad_values(&form.c_mod(q), q);
    let mut h = f.clone();
    for (v, &t) in h.data_mut().iter_mut().zip(&cq) {
        *v *= table[mul_mod(r, t as u64, q) as usize];
    }
    let hat = crate::weil::apply_fourier(&h);
    let aq = quad_values(&form.a_mod(q), q);
    let rbt = form.b_mod(q).transpose().scale(r);
    let m = rbt.data();
    let mut out = StateVector::zeros(q);
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        let x = coords(i, q);
        let mut z = [0u64; 4];
        for row in 0..4 {
            z[row] = (0..4).map(|k| m[row * 4 + k] * x[k]).sum::<u64>() % q;
        }
        *v = table[mul_mod(r, aq[i] as u64, q) as usize] * hat.get(&z);
    }
    Ok(out)
}

/// T_{f1,f2}(r) = E_x f1(x) Phi_r f2(x).
pub fn t_value(f1: &StateVector, f2: &StateVector, r: u64, form: &QuadForm) -> Result<Complex64> {
    if f1.modulus() != f2.modulus() {
        return Err(Error::ContextMismatch);
    }
    let phi = phi_r(f2, r, form)?;
    let s: Complex64 = f1.data().iter().zip(phi.data()).map(|(a, b)| a * b).sum();
    Ok(s / f1.data().len() as f64)
}

/// The O(q^8) double sum q^2 E_{x,y} f1(x) f2(y) e_q(r Q(x,y)).
pub fn t_sum_direct(f1: &StateVector, f2: &StateVector, r: u64, form: &QuadForm) -> Result<Complex64> {
    let q = f1.modulus();
    let r = check_unit(r, q)?;
    let table = phase_table(q);
    let aq = quad_values(&form.a_mod(q), q);
    let cq = quad_values(&form.c_mod(q), q);
    let bt = form.b_mod(q).transpose();
    let n = q.pow(4) as usize;
    let ys: Vec<[u64; 4]> = (0..n).map(|j| coords(j, q)).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let x = coords(i, q);
        let v = bt.apply(&x);
        let mut inner = Complex64::new(0.0, 0.0);
        for (j, y) in ys.iter().enumerate() {
            let t = aq[i] as u64 + cq[j] as u64 + v[0] * y[0] + v[1] * y[1] + v[2] * y[2] + v[3] * y[3];
            inner += f2.data()[j] * table[mul_mod(r, t % q, q) as usize];
        }
        total += f1.data()[i] * inner;
    }
    Ok(total * (q * q) as f64 / (n * n) as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpSumReport {
    pub q: u64,
    pub r: u64,
    pub value: [f64; 2],
    pub abs: f64,
    pub trivial_bound: f64,
}

pub fn t_sum(f1: &StateVector, f2: &StateVector, r: u64, form: &QuadForm) -> Result<ExpSumReport> {
    let q = f1.modulus();
    let v = t_value(f1, f2, r, form)?;
    let g = form.det_b_gcd(q) as f64;
    Ok(ExpSumReport {
        q,
        r: r % q,
        value: [v.re, v.im],
        abs: v.norm(),
        trivial_bound: g * g * f1.norm() * f2.norm(),
    })
}

/// f1 = conj(Phi_r psi), f2 = psi; then |T(r)| = ||psi||^2.
pub fn sharpness_pair(psi: &StateVector, r: u64, form: &QuadForm) -> Result<(StateVector, StateVector)> {
    Ok((phi_r(psi, r, form)?.conj(), psi.clone()))
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixCoeffRow {
    pub r: u64,
    pub abs_t: f64,
    pub abs_coeff: f64,
    pub diff: f64,
}

/// |T(r)| against |<conj f1, rho(g^{(r)}) f2>| for every unit r.
pub fn matrix_coeff_identity_check(
    f1: &StateVector,
    f2: &StateVector,
    form: &QuadForm,
    q: &Modulus,
) -> Result<Vec<MatrixCoeffRow>> {
    let qv = q.value();
    let word = form_word(form, qv)?;
    let f1c = f1.conj();
    let mut rows = Vec::new();
    for r in q.units() {
        let abs_t = t_value(f1, f2, r, form)?.norm();
        let w = dilate_word(&word, r, qv)?;
        let op = if q.is_prime() {
            rho_of_word(&w, qv)?
        } else {
            rho_squarefree(&w, q)?
        };
        let abs_coeff = f1c.inner(&op.apply(f2)?).norm();
        rows.push(MatrixCoeffRow {
            r,
            abs_t,
            abs_coeff,
            diff: (abs_t - abs_coeff).abs(),
        });
    }
    Ok(rows)
}

/// Congruence diagonalization over F_p: returns (d, P) with P^T M P = diag(d).
pub fn congruence_diagonalize(m: &ModMatrix) -> (Vec<u64>, ModMatrix) {
    let p = m.modulus();
    let n = m.n();
    let mut a: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    let mut pm = ModMatrix::identity(n, p);
    // simultaneous column op col_i += f col_k and row op row_i += f row_k
    let add = |a: &mut Vec<Vec<u64>>, pm: &mut ModMatrix, i: usize, k: usize, f: u64| {
        for r in 0..n {
            a[r][i] = (a[r][i] + mul_mod(f, a[r][k], p)) % p;
        }
        for c in 0..n {
            a[i][c] = (a[i][c] + mul_mod(f, a[k][c], p)) % p;
        }
        for r in 0..n {
            let v = (pm.get(r, i) + mul_mod(f, pm.get(r, k), p)) % p;
            pm.set(r, i, v);
        }
    };
    for k in 0..n {
        if a[k][k] == 0 {
            if let Some(j) = (k + 1..n).find(|&j| a[j][j] != 0) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
                for r in 0..n {
                    let (x, y) = (pm.get(r, k), pm.get(r, j));
                    pm.set(r, k, y);
                    pm.set(r, j, x);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| a[k][j] != 0) {
                add(&mut a, &mut pm, k, j, 1);
            } else {
                continue;
            }
        }
        let inv = inv_mod(a[k][k], p).unwrap();
        for i in k + 1..n {
            if a[i][k] != 0 {
                let f = p - mul_mod(a[i][k], inv, p);
                add(&mut a, &mut pm, i, k, f);
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), pm)
}

/// sum_{x in F_p^n} e_p(x^T M x + h.x) for symmetric M, by diagonalization.
pub fn gauss_sum_quadratic(m: &ModMatrix, shift: &[u64]) -> Complex64 {
    let p = m.modulus();
    let (d, pm) = congruence_diagonalize(m);
    let k = pm.transpose().apply(shift);
    let root = (p as f64).sqrt();
    let g = if p % 4 == 1 {
        Complex64::new(root, 0.0)
    } else {
        Complex64::new(0.0, root)
    };
    let mut acc = Complex64::new(1.0, 0.0);
    for (&di, &ki) in d.iter().zip(&k) {
        if di == 0 {
            if ki % p != 0 {
                return Complex64::new(0.0, 0.0);
            }
            acc *= p as f64;
        } else {
            // d z^2 + k z = d (z + k/2d)^2 - k^2/(4d)
            let inv4d = inv_mod(mul_mod(4, di, p), p).unwrap();
            let c = p - mul_mod(mul_mod(ki, ki, p), inv4d, p);
            acc *= g * jacobi(di as i64, p) as f64 * e_q(c % p, p);
        }
    }
    acc
}

/// Unit-norm product vectors for separable forms: f(x) = prod_i f_i(x_i).
#[derive(Debug, Clone)]
pub struct TensorState {
    pub q: u64,
    pub factors: [Vec<Complex64>; 4],
}

fn norm1(v: &[Complex64]) -> f64 {
    (v.iter().map(|a| a.norm_sqr()).sum::<f64>() / v.len() as f64).sqrt()
}

impl TensorState {
    pub fn random_unit(q: u64, rng: &mut impl Rng) -> Self {
        let factors = std::array::from_fn(|_| {
            let mut v: Vec<Complex64> = (0..q)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let n = norm1(&v);
            v.iter_mut().for_each(|a| *a /= n);
            v
        });
        TensorState { q, factors }
    }

    pub fn norm(&self) -> f64 {
        self.factors.iter().map(|f| norm1(f)).product()
    }

    pub fn to_dense(&self) -> StateVector {
        StateVector::from_fn(self.q, |x| (0..4).map(|i| self.factors[i][x[i] as usize]).product())
    }

    pub fn conj(&self) -> Self {
        TensorState {
            q: self.q,
            factors: self.factors.clone().map(|f| f.iter().map(|a| a.conj()).collect()),
        }
    }
}

/// Diagonal coefficients (a_i, b_i, c_i) of a separable form.
pub fn separable_pieces(form: &QuadForm) -> Result<[(i64, i64, i64); 4]> {
    if !form.is_separable() {
        return Err(Error::Precondition("form is not separable".into()));
    }
    Ok(std::array::from_fn(|i| (form.a[i][i], form.b[i][i], form.c[i][i])))
}

/// One binary piece: q^{1/2} E_y f(y) e_q(r (a x^2 + b x y + c y^2)).
fn phi_piece(f: &[Complex64], r: u64, piece: (i64, i64, i64), table: &[Complex64]) -> Vec<Complex64> {
    let q = f.len() as u64;
    let red = |v: i64| v.rem_euclid(q as i64) as u64;
    let (a, b, c) = (red(piece.0), red(piece.1), red(piece.2));
    let h: Vec<Complex64> = (0..q)
        .map(|y| f[y as usize] * table[mul_mod(r, mul_mod(c, y * y % q, q), q) as usize])
        .collect();
    let scale = 1.0 / (q as f64).sqrt();
    (0..q)
        .map(|x| {
            let rb = mul_mod(mul_mod(r, b, q), x, q);
            let mut s = Complex64::new(0.0, 0.0);
            let mut t = 0u64;
            for hy in &h {
                s += hy * table[t as usize];
                t += rb;
                if t >= q {
                    t -= q;
                }
            }
            s * scale * table[mul_mod(r, mul_mod(a, x * x % q, q), q) as usize]
        })
        .collect()
}

pub fn phi_r_separable(f: &TensorState, r: u64, form: &QuadForm) -> Result<TensorState> {
    let q = f.q;
    let r = check_unit(r, q)?;
    let pieces = separable_pieces(form)?;
    let table = phase_table(q);
    Ok(TensorState {
        q,
        factors: std::array::from_fn(|i| phi_piece(&f.factors[i], r, pieces[i], &table)),
    })
}

/// T(r) for product vectors as the product of four one-dimensional sums.
pub fn t_value_separable(f1: &TensorState, f2: &TensorState, r: u64, form: &QuadForm) -> Result<Complex64> {
    let phi = phi_r_separable(f2, r, form)?;
    let q = f1.q as f64;
    Ok((0..4)
        .map(|i| {
            f1.factors[i]
                .iter()
                .zip(&phi.factors[i])
                .map(|(a, b)| a * b)
                .sum::<Complex64>()
                / q
        })
        .product())
}

#[derive(Debug, Clone, Serialize)]
pub struct PerR {
    pub q: u64,
    pub r: u64,
    pub abs_t: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageDecayReport {
    pub q: u64,
    pub path: &'static str,
    pub trials: usize,
    /// max over all pairs of (1/phi(q)) sum_r |T(r)|
    pub avg: f64,
    pub sharp_avg: f64,
    pub random_avg_mean: f64,
    pub max_abs: f64,
    /// table for the pair attaining `avg`
    pub per_r: Vec<PerR>,
    pub empirical_exponent: Option<f64>,
}

pub const DENSE_LIMIT: u64 = 31;

/// Which evaluation route average_over_dilates takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SumPath {
    /// dense up to DENSE_LIMIT, product vectors above
    Auto,
    Dense,
    /// product vectors on a separable form
    Tensor,
}

fn pair_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn check_admissible(form: &QuadForm, q: &Modulus) -> Result<()> {
    let mut bad = Vec::new();
    for p in q.primes() {
        if !admissible_prime(form, p)? {
            bad.push(p);
        }
    }
    if !bad.is_empty() {
        return Err(Error::Precondition(format!("inadmissible primes {bad:?}")));
    }
    Ok(())
}

/// (1/phi(q)) sum_r |T(r)| for `trials` random unit pairs plus the sharpness
/// pair built at r = 1. Dense vectors up to q = 31; above that the form must be
/// separable and product vectors are used.
pub fn average_over_dilates(
    form: &QuadForm,
    q: &Modulus,
    trials: usize,
    seed: u64,
    path: SumPath,
) -> Result<AverageDecayReport> {
    check_admissible(form, q)?;
    if !q.is_squarefree() {
        return Err(Error::InvalidModulus(q.value(), "dilate averages need squarefree q"));
    }
    let qv = q.value();
    let units = q.units();
    let phi = units.len() as f64;
    let dense = match path {
        SumPath::Auto => qv <= DENSE_LIMIT,
        SumPath::Dense => true,
        SumPath::Tensor => false,
    };
    if !dense && !form.is_separable() {
        return Err(Error::Budget(format!(
            "q = {qv} needs q^4 amplitudes; only separable forms are supported above {DENSE_LIMIT}"
        )));
    }
    // pair 0 is the sharpness pair
    let per_pair: Vec<Vec<f64>> = (0..=trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let mut rng = pair_rng(seed, t as u64);
            if dense {
                let (f1, f2) = if t == 0 {
                    sharpness_pair(&StateVector::random_unit(qv, &mut rng), 1, form)?
                } else {
                    (
                        StateVector::random_unit(qv, &mut rng),
                        StateVector::random_unit(qv, &mut rng),
                    )
                };
                units.iter().map(|&r| Ok(t_value(&f1, &f2, r, form)?.norm())).collect()
            } else {
                let (f1, f2) = if t == 0 {
                    let psi = TensorState::random_unit(qv, &mut rng);
                    (phi_r_separable(&psi, 1, form)?.conj(), psi)
                } else {
                    (
                        TensorState::random_unit(qv, &mut rng),
                        TensorState::random_unit(qv, &mut rng),
                    )
                };
                units
                    .iter()
                    .map(|&r| Ok(t_value_separable(&f1, &f2, r, form)?.norm()))
                    .collect()
            }
        })
        .collect::<Result<_>>()?;
    let avgs: Vec<f64> = per_pair.iter().map(|v| v.iter().sum::<f64>() / phi).collect();
    let (best, &avg) = avgs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let g = form.det_b_gcd(qv) as f64;
    Ok(AverageDecayReport {
        q: qv,
        path: if dense { "dense" } else { "tensor" },
        trials,
        avg,
        sharp_avg: avgs[0],
        random_avg_mean: if trials > 0 {
            avgs[1..].iter().sum::<f64>() / trials as f64
        } else {
            0.0
        },
        max_abs: per_pair.iter().flatten().cloned().fold(0.0, f64::max),
        per_r: units
            .iter()
            .zip(&per_pair[best])
            .map(|(&r, &abs_t)| PerR {
                q: qv,
                r,
                abs_t,
                bound: g * g,
            })
            .collect(),
        empirical_exponent: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares y = intercept + slope x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = if n > 2.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LinearFit {
        slope,
        intercept,
        slope_stderr,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecaySweep {
    pub reports: Vec<AverageDecayReport>,
    pub fit: LinearFit,
}

/// average_over_dilates over each q, fitting log avg against log q.
pub fn decay_sweep(form: &QuadForm, qs: &[u64], trials: usize, seed: u64, path: SumPath) -> Result<DecaySweep> {
    let mut reports = Vec::new();
    for &q in qs {
        reports.push(average_over_dilates(form, &Modulus::new(q)?, trials, seed ^ q, path)?);
    }
    let xs: Vec<f64> = reports.iter().map(|r| (r.q as f64).ln()).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.avg.ln()).collect();
    let fit = linear_fit(&xs, &ys);
    for r in reports.iter_mut() {
        r.empirical_exponent = Some(fit.slope);
    }
    Ok(DecaySweep { reports, fit })
}

/// Real weights on [X]^4 = {1..X}^4, indexed like StateVector with x_i - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    x: usize,
    data: Vec<f64>,
}

impl WeightTable {
    pub fn from_fn(x: usize, mut f: impl FnMut([i64; 4]) -> f64) -> Self {
        let data = (0..x.pow(4))
            .map(|i| {
                let c = coords(i, x as u64);
                f(c.map(|v| v as i64 + 1))
            })
            .collect();
        WeightTable { x, data }
    }

    pub fn ones(x: usize) -> Self {
        Self::from_fn(x, |_| 1.0)
    }

    pub fn x(&self) -> usize {
        self.x
    }

    pub fn get(&self, v: &[i64; 4]) -> f64 {
        let x = self.x as u64;
        self.data[index(&v.map(|c| c as u64 - 1), x)]
    }

    pub fn support(&self) -> Vec<([i64; 4], f64)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, &w)| (coords(i, self.x as u64).map(|v| v as i64 + 1), w))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theta {
    Rational(i64, u64),
    Real(f64),
}

impl Theta {
    fn phase(&self, t: i128) -> Complex64 {
        match *self {
            Theta::Rational(r, q) => e_q((r as i128 * t).rem_euclid(q as i128) as u64, q),
            Theta::Real(th) => {
                let frac = (th * t as f64).rem_euclid(1.0);
                Complex64::from_polar(1.0, TAU * frac)
            }
        }
    }
}

pub const S_THETA_MAX_X: usize = 30;

/// S(theta) = sum_{x,y in [X]^4} F1(x) F2(y) e(theta Q(x,y)) over the supports.
pub fn s_theta(f1: &WeightTable, f2: &WeightTable, theta: Theta, form: &QuadForm) -> Result<Complex64> {
    if f1.x != f2.x {
        return Err(Error::ContextMismatch);
    }
    if f1.x > S_THETA_MAX_X {
        return Err(Error::Budget(format!(
            "X = {} exceeds {S_THETA_MAX_X}; restrict the supports",
            f1.x
        )));
    }
    if let Theta::Rational(_, 0) = theta {
        return Err(Error::InvalidModulus(0, "theta denominator"));
    }
    let s1 = f1.support();
    let s2 = f2.support();
    let zero = [0i64; 4];
    let ys: Vec<([i64; 4], Complex64)> = s2
        .iter()
        .map(|(y, w)| (*y, theta.phase(form.eval(&zero, y)) * *w))
        .collect();
    let xm = f1.x as i64;
    let total: Complex64 = s1
        .par_iter()
        .map(|(x, w)| {
            let mut v = [0i64; 4];
            for j in 0..4 {
                v[j] = (0..4).map(|i| x[i] * form.b[i][j]).sum();
            }
            // e(theta v_j y_j) tables for y_j in 1..=X
            let tabs: Vec<Vec<Complex64>> = (0..4)
                .map(|j| (1..=xm).map(|yj| theta.phase(v[j] as i128 * yj as i128)).collect())
                .collect();
            let mut inner = Complex64::new(0.0, 0.0);
            for (y, g) in &ys {
                inner += g
                    * tabs[0][y[0] as usize - 1]
                    * tabs[1][y[1] as usize - 1]
                    * tabs[2][y[2] as usize - 1]
                    * tabs[3][y[3] as usize - 1];
            }
            inner * theta.phase(form.eval(x, &zero)) * *w
        })
        .sum();
    Ok(total)
}

/// S(r/q) as sum over box pairs (x0 + [q]^4) x (y0 + [q]^4), x0, y0 in qZ^4, of
/// q^6 T_{f1,f2}(r) with f_i the box restrictions.
pub fn s_box_decomposition(f1: &WeightTable, f2: &WeightTable, r: u64, q: u64, form: &QuadForm) -> Result<Complex64> {
    let x = f1.x;
    let nb = x / q as usize + 1;
    let boxes = |f: &WeightTable| -> Vec<StateVector> {
        (0..nb.pow(4))
            .map(|bi| {
                let b0 = coords(bi, nb as u64);
                StateVector::from_fn(q, |xp| {
                    // x' in [q] is represented by its residue; q itself maps to 0
                    let mut pt = [0i64; 4];
                    for k in 0..4 {
                        let off = if xp[k] == 0 { q } else { xp[k] };
                        pt[k] = (b0[k] * q + off) as i64;
                    }
                    if pt.iter().all(|&c| c >= 1 && c <= x as i64) {
                        Complex64::new(f.get(&pt), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .filter(|s| s.norm() > 0.0)
            .collect()
    };
    let b1 = boxes(f1);
    let b2 = boxes(f2);
    let q6 = (q as f64).powi(6);
    let mut total = Complex64::new(0.0, 0.0);
    for g2 in &b2 {
        let phi = phi_r(g2, r, form)?;
        for g1 in &b1 {
            let s: Complex64 = g1.data().iter().zip(phi.data()).map(|(a, b)| a * b).sum();
            total += s / g1.data().len() as f64 * q6;
        }
    }
    Ok(total)
}
