//! The Weil representation of Sp_8(Z/qZ) on functions (Z/qZ)^4 -> C, as
//! matrix-free operators.

use crate::error::{Error, Result};
use crate::ring::matrix::ModMatrix;
use crate::ring::modular::{inv_mod, jacobi, mul_mod, Modulus};
use crate::symplectic::SpElement;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

/// A function on (Z/qZ)^4. Index of x is ((x0 q + x1) q + x2) q + x3.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    q: u64,
    data: Vec<Complex64>,
}

/// e_q(t) = exp(2 pi i t / q).
pub fn e_q(t: u64, q: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * ((t % q) as f64) / q as f64)
}

pub fn coords(idx: usize, q: u64) -> [u64; 4] {
    let q = q as usize;
    [
        (idx / (q * q * q)) as u64,
        (idx / (q * q) % q) as u64,
        (idx / q % q) as u64,
        (idx % q) as u64,
    ]
}

pub fn index(x: &[u64; 4], q: u64) -> usize {
    (((x[0] * q + x[1]) * q + x[2]) * q + x[3]) as usize
}

impl StateVector {
    pub fn new(q: u64, data: Vec<Complex64>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidModulus(q, "state modulus must be at least 2"));
        }
        if data.len() as u64 != q.pow(4) {
            return Err(Error::Dimension(format!(
                "expected {} amplitudes, got {}",
                q.pow(4),
                data.len()
            )));
        }
        Ok(StateVector { q, data })
    }

    pub fn zeros(q: u64) -> Self {
        StateVector {
            q,
            data: vec![Complex64::new(0.0, 0.0); q.pow(4) as usize],
        }
    }

    pub fn from_fn(q: u64, mut f: impl FnMut([u64; 4]) -> Complex64) -> Self {
        let data = (0..q.pow(4) as usize).map(|i| f(coords(i, q))).collect();
        StateVector { q, data }
    }

    pub fn constant(q: u64, v: f64) -> Self {
        StateVector {
            q,
            data: vec![Complex64::new(v, 0.0); q.pow(4) as usize],
        }
    }

    /// Value 1 at the origin, 0 elsewhere.
    pub fn delta0(q: u64) -> Self {
        let mut s = Self::zeros(q);
        s.data[0] = Complex64::new(1.0, 0.0);
        s
    }

    /// Independent standard complex Gaussians, normalized to ||f||_2 = 1.
    pub fn random_unit(q: u64, rng: &mut impl Rng) -> Self {
        let data = (0..q.pow(4))
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut s = StateVector { q, data };
        let n = s.norm();
        s.scale_mut(Complex64::new(1.0 / n, 0.0));
        s
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, x: &[u64; 4]) -> Complex64 {
        self.data[index(x, self.q)]
    }

    /// <f, g> = E_x f(x) conj(g(x)).
    pub fn inner(&self, o: &StateVector) -> Complex64 {
        let s: Complex64 = self.data.iter().zip(&o.data).map(|(a, b)| a * b.conj()).sum();
        s / self.data.len() as f64
    }

    pub fn norm(&self) -> f64 {
        (self.data.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    pub fn conj(&self) -> StateVector {
        StateVector {
            q: self.q,
            data: self.data.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn scale_mut(&mut self, s: Complex64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    pub fn sub(&self, o: &StateVector) -> StateVector {
        StateVector {
            q: self.q,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn pointwise_mul(&self, o: &StateVector) -> StateVector {
        StateVector {
            q: self.q,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a * b).collect(),
        }
    }
}

/// A generator of Sp_8 as it appears in a word. Words are read as matrix
/// products, so they act right to left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    /// s(E) = diag(E, E^{-T})
    S(ModMatrix),
    /// J
    Fourier,
    /// J^{-1}
    FourierInv,
    /// l(W) = [[I, 0], [W, I]]
    L(ModMatrix),
}

impl Token {
    pub fn element(&self, q: u64) -> Result<SpElement> {
        match self {
            Token::S(e) => SpElement::s(e),
            Token::L(w) => SpElement::l(w),
            Token::Fourier => Ok(SpElement::j(q)),
            Token::FourierInv => Ok(SpElement::j(q).inverse()),
        }
    }

    fn validate(&self, q: u64) -> Result<()> {
        match self {
            Token::S(e) => {
                check_dims(e, q)?;
                if !e.is_invertible() {
                    return Err(Error::NotInvertible(q));
                }
            }
            Token::L(w) => {
                check_dims(w, q)?;
                if !w.is_symmetric() {
                    return Err(Error::NotSymmetric("l(W)"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn reduce_mod(&self, p: u64) -> Token {
        match self {
            Token::S(e) => Token::S(e.reduce_mod(p)),
            Token::L(w) => Token::L(w.reduce_mod(p)),
            t => t.clone(),
        }
    }
}

fn check_dims(m: &ModMatrix, q: u64) -> Result<()> {
    if m.n() != 4 || m.modulus() != q {
        return Err(Error::Dimension(format!(
            "token matrix is {}x{} mod {}, expected 4x4 mod {q}",
            m.n(),
            m.n(),
            m.modulus()
        )));
    }
    Ok(())
}

/// The matrix product of a word.
pub fn word_element(word: &[Token], q: u64) -> Result<SpElement> {
    let mut g = SpElement::identity(q);
    for t in word {
        g = g.mul(&t.element(q)?);
    }
    Ok(g)
}

/// Multiplier of s(E): the Jacobi symbol of det E (Legendre for prime q).
pub fn s_multiplier(e: &ModMatrix) -> f64 {
    jacobi(e.det() as i64, e.modulus()) as f64
}

/// f(x) -> xi f(E^{-1} x), i.e. out(E y) = xi f(y).
pub fn apply_s(f: &StateVector, e: &ModMatrix) -> Result<StateVector> {
    Token::S(e.clone()).validate(f.q)?;
    let mut out = permute_s(f, e);
    out.scale_mut(Complex64::new(s_multiplier(e), 0.0));
    Ok(out)
}

fn permute_s(f: &StateVector, e: &ModMatrix) -> StateVector {
    let q = f.q;
    let m = e.data();
    let mut out = StateVector::zeros(q);
    for (i, &v) in f.data.iter().enumerate() {
        let y = coords(i, q);
        let mut x = [0u64; 4];
        for r in 0..4 {
            let mut acc = 0u64;
            for c in 0..4 {
                acc += m[r * 4 + c] * y[c];
            }
            x[r] = acc % q;
        }
        out.data[index(&x, q)] = v;
    }
    out
}

/// q^2 E_y f(y) e_q(+-x^T y) via axis-wise DFTs.
fn fourier(f: &StateVector, inverse: bool) -> StateVector {
    let q = f.q as usize;
    let mut planner = FftPlanner::new();
    // rustfft's inverse transform carries the + sign
    let fft = if inverse {
        planner.plan_fft_forward(q)
    } else {
        planner.plan_fft_inverse(q)
    };
    let mut data = f.data.clone();
    let mut line = vec![Complex64::new(0.0, 0.0); q];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let n = data.len();
    for axis in 0..4 {
        let stride = q.pow(3 - axis as u32);
        let block = stride * q;
        for base in (0..n).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for k in 0..q {
                    line[k] = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for k in 0..q {
                    data[start + k * stride] = line[k];
                }
            }
        }
    }
    let scale = 1.0 / (q * q) as f64;
    for a in data.iter_mut() {
        *a *= scale;
    }
    StateVector { q: f.q, data }
}

pub fn apply_fourier(f: &StateVector) -> StateVector {
    fourier(f, false)
}

pub fn apply_fourier_inv(f: &StateVector) -> StateVector {
    fourier(f, true)
}

/// f(x) -> e_q(-x^T W x / 2) f(x).
pub fn apply_l(f: &StateVector, w: &ModMatrix) -> Result<StateVector> {
    Token::L(w.clone()).validate(f.q)?;
    let q = f.q;
    let minus_half = q - inv_mod(2, q).ok_or(Error::NotUnit(2, q))?;
    let table: Vec<Complex64> = (0..q).map(|t| e_q(t, q)).collect();
    let mut out = f.clone();
    for (i, a) in out.data.iter_mut().enumerate() {
        let x = coords(i, q);
        let t = mul_mod(w.quad(&x), minus_half, q);
        *a *= table[t as usize];
    }
    Ok(out)
}

/// A composed operator rho(word). For a squarefree modulus it may instead be
/// realised as a tensor product of twisted per-prime operators.
#[derive(Debug, Clone)]
pub struct WeilOperator {
    q: u64,
    word: Vec<Token>,
    multiplier: Complex64,
    factors: Option<Vec<WeilOperator>>,
}

impl WeilOperator {
    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn word(&self) -> &[Token] {
        &self.word
    }

    pub fn multiplier(&self) -> Complex64 {
        self.multiplier
    }

    pub fn set_multiplier(&mut self, c: Complex64) {
        self.multiplier = c;
    }

    pub fn is_tensor(&self) -> bool {
        self.factors.is_some()
    }

    pub fn apply(&self, f: &StateVector) -> Result<StateVector> {
        if f.q != self.q {
            return Err(Error::ContextMismatch);
        }
        match &self.factors {
            Some(ops) => apply_tensor(ops, f),
            None => {
                let mut v = f.clone();
                for t in self.word.iter().rev() {
                    v = match t {
                        Token::S(e) => permute_s(&v, e),
                        Token::L(w) => apply_l(&v, w)?,
                        Token::Fourier => apply_fourier(&v),
                        Token::FourierInv => apply_fourier_inv(&v),
                    };
                }
                v.scale_mut(self.multiplier);
                Ok(v)
            }
        }
    }
}

pub fn rho_of_word(word: &[Token], q: u64) -> Result<WeilOperator> {
    let mut mult = 1.0;
    for t in word {
        t.validate(q)?;
        if let Token::S(e) = t {
            mult *= s_multiplier(e);
        }
    }
    Ok(WeilOperator {
        q,
        word: word.to_vec(),
        multiplier: Complex64::new(mult, 0.0),
        factors: None,
    })
}

/// The twist g -> [[M1, lam M2], [lam^{-1} M3, M4]] applied to a word mod p.
pub fn twist_word(word: &[Token], p: u64, lambda: u64) -> Result<Vec<Token>> {
    let lam = lambda % p;
    let lam_inv = inv_mod(lam, p).ok_or(Error::NotUnit(lam, p))?;
    let mut out = Vec::with_capacity(word.len() + 2);
    for t in word {
        match t.reduce_mod(p) {
            Token::L(w) => out.push(Token::L(w.scale(lam_inv))),
            Token::Fourier => {
                out.push(Token::S(ModMatrix::scalar(4, p, lam)));
                out.push(Token::Fourier);
            }
            Token::FourierInv => {
                out.push(Token::FourierInv);
                out.push(Token::S(ModMatrix::scalar(4, p, lam_inv)));
            }
            s => out.push(s),
        }
    }
    Ok(out)
}

/// rho(word) over squarefree q as the tensor product of the twisted mod-p
/// Weil representations, lambda_i being the product of the other primes.
pub fn rho_squarefree(word: &[Token], q: &Modulus) -> Result<WeilOperator> {
    if !q.is_squarefree() {
        return Err(Error::InvalidModulus(
            q.value(),
            "tensor construction needs squarefree q",
        ));
    }
    for t in word {
        t.validate(q.value())?;
    }
    let primes = q.primes();
    let mut ops = Vec::with_capacity(primes.len());
    let mut mult = Complex64::new(1.0, 0.0);
    for &p in &primes {
        let lambda = q.value() / p;
        let op = rho_of_word(&twist_word(word, p, lambda)?, p)?;
        mult *= op.multiplier;
        ops.push(op);
    }
    Ok(WeilOperator {
        q: q.value(),
        word: word.to_vec(),
        multiplier: mult,
        factors: Some(ops),
    })
}

fn apply_tensor(ops: &[WeilOperator], f: &StateVector) -> Result<StateVector> {
    let q = f.q;
    let primes: Vec<u64> = ops.iter().map(|o| o.q).collect();
    let dims: Vec<usize> = primes.iter().map(|&p| p.pow(4) as usize).collect();
    let n = f.data.len();
    // position of x in the tensor layout with axes (Z/p_1)^4 x ... x (Z/p_k)^4
    let perm: Vec<usize> = (0..n)
        .map(|i| {
            let x = coords(i, q);
            primes.iter().fold(0usize, |acc, &p| {
                let xi = [x[0] % p, x[1] % p, x[2] % p, x[3] % p];
                acc * p.pow(4) as usize + index(&xi, p)
            })
        })
        .collect();
    let mut t = vec![Complex64::new(0.0, 0.0); n];
    for (i, &j) in perm.iter().enumerate() {
        t[j] = f.data[i];
    }
    for (axis, op) in ops.iter().enumerate() {
        let d = dims[axis];
        let stride: usize = dims[axis + 1..].iter().product();
        let block = d * stride;
        let mut fiber = vec![Complex64::new(0.0, 0.0); d];
        for base in (0..n).step_by(block) {
            for off in 0..stride {
                for k in 0..d {
                    fiber[k] = t[base + off + k * stride];
                }
                let v = op.apply(&StateVector::new(op.q, std::mem::take(&mut fiber))?)?;
                fiber = v.into_data();
                for k in 0..d {
                    t[base + off + k * stride] = fiber[k];
                }
            }
        }
    }
    let data = perm.iter().map(|&j| t[j]).collect();
    StateVector::new(q, data)
}

/// The word of g^{(r)} from a word of g: L(W) -> L(rW), J -> s(r^{-1}) J,
/// J^{-1} -> J^{-1} s(r).
pub fn dilate_word(word: &[Token], r: u64, q: u64) -> Result<Vec<Token>> {
    let r = r % q;
    let rinv = inv_mod(r, q).ok_or(Error::NotUnit(r, q))?;
    let mut out = Vec::with_capacity(word.len() + 2);
    for t in word {
        match t {
            Token::L(w) => out.push(Token::L(w.scale(r))),
            Token::Fourier => {
                out.push(Token::S(ModMatrix::scalar(4, q, rinv)));
                out.push(Token::Fourier);
            }
            Token::FourierInv => {
                out.push(Token::FourierInv);
                out.push(Token::S(ModMatrix::scalar(4, q, r)));
            }
            s => out.push(s.clone()),
        }
    }
    Ok(out)
}

/// Word [L(-2a), S(b^{-T}), J, L(-2c)] for the symplectic element of a form.
pub fn form_word(f: &crate::quadform::QuadForm, q: u64) -> Result<Vec<Token>> {
    let bit = f.b_mod(q).inverse()?.transpose();
    Ok(vec![
        Token::L(f.a_mod(q).scale_signed(-2)),
        Token::S(bit),
        Token::Fourier,
        Token::L(f.c_mod(q).scale_signed(-2)),
    ])
}

/// A generator word for an arbitrary element. With S = D-block invertible,
/// g = s(S^{-T}) J^{-1} l(-B) J l(C); otherwise g is first moved by some l(W).
pub fn word_for_element(g: &SpElement, rng: &mut impl Rng) -> Result<Vec<Token>> {
    let q = g.modulus();
    let mut shift = ModMatrix::zero(4, q);
    let mut h = g.clone();
    for attempt in 0.. {
        if h.d().is_invertible() {
            break;
        }
        if attempt > 200 {
            return Err(Error::NotFactorizable);
        }
        shift = ModMatrix::zero(4, q);
        for i in 0..4 {
            for j in i..4 {
                let v = rng.gen_range(0..q);
                shift.set(i, j, v);
                shift.set(j, i, v);
            }
        }
        h = SpElement::l(&shift)?.mul(g);
    }
    let dul = crate::symplectic::dul_factorize(&h)?;
    let mut word = Vec::with_capacity(6);
    if !shift.is_zero() {
        word.push(Token::L(shift.neg()));
    }
    word.extend([
        Token::S(dul.a),
        Token::FourierInv,
        Token::L(dul.b.neg()),
        Token::Fourier,
        Token::L(dul.c),
    ]);
    Ok(word)
}

/// |<w1 f, w2 f>| / ||f||^2 and the phase <w1 f, w2 f> / ||f||^2.
pub fn relation_phase(w1: &WeilOperator, w2: &WeilOperator, f: &StateVector) -> Result<Complex64> {
    let a = w1.apply(f)?;
    let b = w2.apply(f)?;
    Ok(a.inner(&b) / f.norm().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::QuadForm;
    use crate::symplectic::symplectic_element;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-9;

    fn rand_sym(rng: &mut impl Rng, q: u64) -> ModMatrix {
        let mut m = ModMatrix::zero(4, q);
        for i in 0..4 {
            for j in i..4 {
                let v = rng.gen_range(0..q);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    fn rand_inv(rng: &mut impl Rng, q: u64) -> ModMatrix {
        loop {
            let m = ModMatrix::from_fn(4, q, |_, _| rng.gen_range(0..q as i64));
            if m.is_invertible() {
                return m;
            }
        }
    }

    fn rand_token(rng: &mut impl Rng, q: u64) -> Token {
        match rng.gen_range(0..4) {
            0 => Token::S(rand_inv(rng, q)),
            1 => Token::L(rand_sym(rng, q)),
            2 => Token::Fourier,
            _ => Token::FourierInv,
        }
    }

    fn direct_fourier(f: &StateVector) -> StateVector {
        let q = f.q;
        StateVector::from_fn(q, |x| {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, v) in f.data.iter().enumerate() {
                let y = coords(j, q);
                let t: u64 = (0..4).map(|k| x[k] * y[k]).sum();
                s += v * e_q(t, q);
            }
            s / (q * q) as f64
        })
    }

    #[test]
    fn s_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = StateVector::random_unit(5, &mut rng);
        assert_eq!(apply_s(&f, &ModMatrix::identity(4, 5)).unwrap(), f);
        let g = apply_s(&f, &ModMatrix::identity(4, 5).neg()).unwrap();
        for i in 0..625 {
            let x = coords(i, 5);
            let mx = x.map(|c| (5 - c) % 5);
            assert_eq!(g.get(&x), f.get(&mx));
        }
        assert!(apply_s(&f, &ModMatrix::diag(5, &[1, 1, 1, 5])).is_err());
        for _ in 0..100 {
            let f = StateVector::random_unit(7, &mut rng);
            let e = rand_inv(&mut rng, 7);
            assert!((apply_s(&f, &e).unwrap().norm() - f.norm()).abs() < TOL);
        }
    }

    #[test]
    fn s_multiplier_is_legendre_of_det() {
        let e = ModMatrix::diag(7, &[3, 1, 1, 1]);
        assert_eq!(s_multiplier(&e), -1.0);
        assert_eq!(s_multiplier(&ModMatrix::diag(7, &[2, 1, 1, 1])), 1.0);
    }

    #[test]
    fn fourier_examples() {
        for q in [3u64, 5] {
            let out = apply_fourier(&StateVector::constant(q, 1.0));
            for (i, v) in out.data().iter().enumerate() {
                let want = if i == 0 { (q * q) as f64 } else { 0.0 };
                assert!((v - want).norm() < TOL);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = StateVector::random_unit(3, &mut rng);
        let fast = apply_fourier(&f);
        let slow = direct_fourier(&f);
        assert!(fast.sub(&slow).norm() < TOL);
        let inv = apply_fourier_inv(&fast);
        assert!(inv.sub(&f).norm() < TOL);
    }

    #[test]
    fn double_fourier_is_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in [5u64, 7] {
            let f = StateVector::random_unit(q, &mut rng);
            let g = apply_s(&apply_fourier(&apply_fourier(&f)), &ModMatrix::identity(4, q).neg()).unwrap();
            assert!((g.inner(&f).norm() - f.norm().powi(2)).abs() < TOL);
        }
    }

    #[test]
    fn l_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = StateVector::random_unit(7, &mut rng);
        assert_eq!(apply_l(&f, &ModMatrix::zero(4, 7)).unwrap(), f);
        for _ in 0..20 {
            let (w1, w2) = (rand_sym(&mut rng, 7), rand_sym(&mut rng, 7));
            let a = apply_l(&apply_l(&f, &w1).unwrap(), &w2).unwrap();
            let b = apply_l(&f, &w1.add(&w2)).unwrap();
            assert!(a.sub(&b).norm() < TOL);
            for (u, v) in a.data().iter().zip(f.data()) {
                assert!((u.norm() - v.norm()).abs() < TOL);
            }
        }
        let mut asym = ModMatrix::zero(4, 7);
        asym.set(0, 1, 1);
        assert_eq!(apply_l(&f, &asym), Err(Error::NotSymmetric("l(W)")));
    }

    #[test]
    fn unitarity_all_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for q in [3u64, 5, 7, 15] {
            let trials = if q == 15 { 10 } else { 100 };
            for _ in 0..trials {
                let f = StateVector::random_unit(q, &mut rng);
                let t = rand_token(&mut rng, q);
                let op = rho_of_word(&[t], q).unwrap();
                assert!((op.apply(&f).unwrap().norm() - 1.0).abs() < TOL);
            }
        }
    }

    #[test]
    fn form_word_unitary_and_matches_element() {
        let q = 13;
        let f = QuadForm::e1();
        let word = form_word(&f, q).unwrap();
        let g = symplectic_element(&f, &Modulus::new(q).unwrap()).unwrap();
        assert_eq!(word_element(&word, q).unwrap(), g);
        let op = rho_of_word(&word, q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let v = StateVector::random_unit(q, &mut rng);
            assert!((op.apply(&v).unwrap().norm() - 1.0).abs() < TOL);
        }
        assert_eq!(
            rho_of_word(&[], q).unwrap().apply(&StateVector::delta0(q)).unwrap(),
            StateVector::delta0(q)
        );
    }

    #[test]
    fn relations_hold_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [5u64, 7] {
            let f = StateVector::random_unit(q, &mut rng);
            // J J = s(-I)
            let a = rho_of_word(&[Token::Fourier, Token::Fourier], q).unwrap();
            let b = rho_of_word(&[Token::S(ModMatrix::identity(4, q).neg())], q).unwrap();
            let ph = relation_phase(&a, &b, &f).unwrap();
            assert!((ph - 1.0).norm() < TOL, "{ph}");
            for _ in 0..10 {
                // u(W) = J^{-1} l(-W) J = l(W^{-1}) s(W) J l(W^{-1})
                let w = loop {
                    let w = rand_sym(&mut rng, q);
                    if w.is_invertible() {
                        break w;
                    }
                };
                let wi = w.inverse().unwrap();
                let w1 = vec![Token::FourierInv, Token::L(w.neg()), Token::Fourier];
                let w2 = vec![Token::L(wi.clone()), Token::S(w.clone()), Token::Fourier, Token::L(wi)];
                assert_eq!(word_element(&w1, q).unwrap(), word_element(&w2, q).unwrap());
                let ph = relation_phase(&rho_of_word(&w1, q).unwrap(), &rho_of_word(&w2, q).unwrap(), &f).unwrap();
                assert!((ph - 1.0).norm() < TOL, "q={q} phase {ph}");
                // s(E) J = J s(E^{-T})
                let e = rand_inv(&mut rng, q);
                let w1 = vec![Token::S(e.clone()), Token::Fourier];
                let w2 = vec![Token::Fourier, Token::S(e.inverse().unwrap().transpose())];
                assert_eq!(word_element(&w1, q).unwrap(), word_element(&w2, q).unwrap());
                let ph = relation_phase(&rho_of_word(&w1, q).unwrap(), &rho_of_word(&w2, q).unwrap(), &f).unwrap();
                assert!((ph - 1.0).norm() < TOL);
            }
        }
    }

    #[test]
    fn homomorphism_up_to_phase_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for q in [5u64, 7] {
            for _ in 0..25 {
                let w: Vec<Token> = (0..4).map(|_| rand_token(&mut rng, q)).collect();
                let g = word_element(&w, q).unwrap();
                let w2 = word_for_element(&g, &mut rng).unwrap();
                assert_eq!(word_element(&w2, q).unwrap(), g);
                let f = StateVector::random_unit(q, &mut rng);
                let ph = relation_phase(&rho_of_word(&w, q).unwrap(), &rho_of_word(&w2, q).unwrap(), &f).unwrap();
                assert!((ph - 1.0).norm() < TOL, "{ph}");
            }
        }
    }

    #[test]
    fn dilated_word_matches_dilated_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for q in [7u64, 15] {
            for _ in 0..20 {
                let w: Vec<Token> = (0..5).map(|_| rand_token(&mut rng, q)).collect();
                let r = loop {
                    let r = rng.gen_range(1..q);
                    if crate::ring::modular::gcd(r, q) == 1 {
                        break r;
                    }
                };
                let dw = dilate_word(&w, r, q).unwrap();
                assert_eq!(
                    word_element(&dw, q).unwrap(),
                    word_element(&w, q).unwrap().dilate(r).unwrap()
                );
            }
        }
    }

    #[test]
    fn squarefree_generators_match_formulas() {
        let q = Modulus::new(15).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f = StateVector::random_unit(15, &mut rng);
        let w = rand_sym(&mut rng, 15);
        let tens = rho_squarefree(&[Token::L(w.clone())], &q).unwrap().apply(&f).unwrap();
        let direct = apply_l(&f, &w).unwrap();
        let ph = tens.inner(&direct);
        assert!((ph.norm() - 1.0).abs() < TOL);
        assert!(
            tens.sub(&{
                let mut d = direct.clone();
                d.scale_mut(ph);
                d
            })
            .norm()
                < 1e-8
        );

        let tens = rho_squarefree(&[Token::Fourier], &q).unwrap().apply(&f).unwrap();
        let direct = apply_fourier(&f);
        let ph = tens.inner(&direct);
        assert!((ph.norm() - 1.0).abs() < TOL);
        let mut d = direct;
        d.scale_mut(ph);
        assert!(tens.sub(&d).norm() < 1e-8);

        let e = rand_inv(&mut rng, 15);
        let tens = rho_squarefree(&[Token::S(e.clone())], &q).unwrap().apply(&f).unwrap();
        let perm = apply_s(&f, &e).unwrap();
        for (a, b) in tens.data().iter().zip(perm.data()) {
            assert!((a.norm() - b.norm()).abs() < TOL);
        }
        assert!(rho_squarefree(&[], &Modulus::new(9).unwrap()).is_err());
    }

    #[test]
    fn squarefree_agrees_with_direct_word_up_to_phase() {
        let q = Modulus::new(15).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let w: Vec<Token> = (0..4).map(|_| rand_token(&mut rng, 15)).collect();
            let f = StateVector::random_unit(15, &mut rng);
            let ph = relation_phase(&rho_squarefree(&w, &q).unwrap(), &rho_of_word(&w, 15).unwrap(), &f).unwrap();
            assert!((ph.norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn twisted_word_is_twisted_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w: Vec<Token> = (0..6).map(|_| rand_token(&mut rng, 15)).collect();
        for (p, lam) in [(3u64, 5u64), (5, 3)] {
            let tw = twist_word(&w, p, lam).unwrap();
            let g = word_element(&w, 15).unwrap().reduce_mod(p);
            let lam_inv = inv_mod(lam % p, p).unwrap();
            assert_eq!(word_element(&tw, p).unwrap(), g.dilate(lam_inv).unwrap());
        }
    }
}
