//! The subgroup Gamma_p generated by g^{-(r)} g^{(s)}, its predicted
//! structure as a conjugate of SL_2 over F_p[Delta], and quasirandomness of
//! the Weil representation restricted to it.

use crate::error::{Error, Result};
use crate::measures::{closure, GroupContext, PackedSp, Sl2Context, SpContext};
use crate::quadform::{admissible_prime, char_poly_mod, delta_mod, is_generic, QuadForm};
use crate::ring::field::{FieldExt, Fq};
use crate::ring::matrix::{solve_mod_p, ModMatrix};
use crate::ring::modular::{crt_pair, is_prime, units, Modulus};
use crate::ring::poly::factor_poly;
use crate::symplectic::{dul_factorize, m_theta, symplectic_element, tau, SpElement};
use crate::weil::{rho_of_word, StateVector, Token, WeilOperator};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlgebraDecomposition {
    pub p: u64,
    pub factor_degrees: Vec<usize>,
    pub expected_order: u128,
}

/// prod p^{d}(p^{2d} - 1) over the factor degrees.
pub fn sl2_product_order(p: u64, degrees: &[usize]) -> u128 {
    degrees
        .iter()
        .map(|&d| {
            let pd = (p as u128).pow(d as u32);
            pd * (pd * pd - 1)
        })
        .product()
}

fn require_admissible(form: &QuadForm, p: u64) -> Result<()> {
    if !admissible_prime(form, p)? {
        return Err(Error::Precondition(format!(
            "{p} is not an admissible prime for this form"
        )));
    }
    Ok(())
}

pub fn algebra_decomposition(form: &QuadForm, p: u64) -> Result<AlgebraDecomposition> {
    require_admissible(form, p)?;
    let fac = factor_poly(&char_poly_mod(form, p)?)?;
    if !fac.is_squarefree() {
        return Err(Error::Precondition(format!(
            "characteristic polynomial has repeated factors mod {p}"
        )));
    }
    let mut degrees = fac.degrees();
    degrees.sort_unstable();
    Ok(AlgebraDecomposition {
        p,
        expected_order: sl2_product_order(p, &degrees),
        factor_degrees: degrees,
    })
}

/// g^{-(r)} g^{(s)} for all ordered pairs of units (r, s).
pub fn gamma_generators(form: &QuadForm, q: u64) -> Result<Vec<((u64, u64), SpElement)>> {
    let g = symplectic_element(form, &Modulus::new(q)?)?;
    let us = units(q);
    let dil: Vec<SpElement> = us.iter().map(|&r| g.dilate(r)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(us.len() * us.len());
    for (i, &r) in us.iter().enumerate() {
        let ri = dil[i].inverse();
        for (j, &s) in us.iter().enumerate() {
            out.push(((r, s), ri.mul(&dil[j])));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GammaMode {
    FullBfs,
    InclusionOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaResult {
    pub p: u64,
    pub mode: GammaMode,
    pub order: Option<u64>,
    pub expected_order: u128,
    pub structure_match: bool,
    /// every generator (INCLUSION_ONLY) or every element (FULL_BFS) passed membership
    pub membership_ok: bool,
    #[serde(skip)]
    pub generators: Vec<SpElement>,
    #[serde(skip)]
    pub elements: Option<Vec<PackedSp>>,
}

pub const DEFAULT_BFS_BUDGET: usize = 2_000_000;

/// Breadth-first closure with the frontier expanded in parallel. Returns the
/// sorted elements, or None past `budget`.
pub fn parallel_closure(ctx: &SpContext, gens: &[PackedSp], budget: usize) -> Option<Vec<PackedSp>> {
    let mut seen: std::collections::HashSet<PackedSp> = std::collections::HashSet::new();
    let id = ctx.identity();
    seen.insert(id);
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let products: Vec<Vec<PackedSp>> = frontier
            .par_chunks(1024)
            .map(|chunk| {
                chunk
                    .iter()
                    .flat_map(|x| gens.iter().map(move |g| ctx.mul(x, g)))
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for y in products.into_iter().flatten() {
            if seen.insert(y) {
                next.push(y);
                if seen.len() > budget {
                    return None;
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<PackedSp> = seen.into_iter().collect();
    out.sort();
    Some(out)
}

pub fn generate_gamma(form: &QuadForm, p: u64, budget: usize) -> Result<GammaResult> {
    let dec = algebra_decomposition(form, p)?;
    let ctx = SpContext::new(p)?;
    let gens: Vec<SpElement> = gamma_generators(form, p)?.into_iter().map(|x| x.1).collect();
    let mut packed: Vec<PackedSp> = gens.iter().map(|g| ctx.pack(g)).collect();
    packed.sort();
    packed.dedup();
    let checker = MembershipChecker::new(form, p)?;
    match parallel_closure(&ctx, &packed, budget) {
        Some(elems) => {
            let membership_ok = elems.par_iter().all(|e| checker.check(&ctx.unpack(e)));
            let order = elems.len() as u64;
            Ok(GammaResult {
                p,
                mode: GammaMode::FullBfs,
                order: Some(order),
                expected_order: dec.expected_order,
                structure_match: order as u128 == dec.expected_order,
                membership_ok,
                generators: gens,
                elements: Some(elems),
            })
        }
        None => Ok(GammaResult {
            p,
            mode: GammaMode::InclusionOnly,
            order: None,
            expected_order: dec.expected_order,
            structure_match: false,
            membership_ok: gens.iter().all(|g| checker.check(g)),
            generators: gens,
            elements: None,
        }),
    }
}

/// Membership in tau^{-1} SL_2(F_p[Delta]) tau.
pub struct MembershipChecker {
    p: u64,
    tau: ModMatrix,
    tau_inv: ModMatrix,
    /// columns: vec(I), vec(Delta), vec(Delta^2), vec(Delta^3)
    basis: Vec<Vec<u64>>,
}

impl MembershipChecker {
    pub fn new(form: &QuadForm, p: u64) -> Result<Self> {
        let g = symplectic_element(form, &Modulus::prime(p)?)?;
        let dul = dul_factorize(&g)?;
        let t = tau(&dul.b);
        let tau_inv = t.inverse()?;
        let delta = delta_mod(form, p)?;
        Ok(Self::with_parts(p, t, tau_inv, &delta))
    }

    fn with_parts(p: u64, tau: ModMatrix, tau_inv: ModMatrix, delta: &ModMatrix) -> Self {
        let mut powers = vec![ModMatrix::identity(4, p)];
        for k in 1..4 {
            powers.push(powers[k - 1].mul(delta));
        }
        let basis = (0..16)
            .map(|e| powers.iter().map(|m| m.get(e / 4, e % 4)).collect())
            .collect();
        MembershipChecker { p, tau, tau_inv, basis }
    }

    /// Coordinates of a 4x4 block in {I, Delta, Delta^2, Delta^3}.
    fn coords(&self, m: &ModMatrix) -> Option<Vec<u64>> {
        let rhs: Vec<u64> = (0..16).map(|e| m.get(e / 4, e % 4)).collect();
        solve_mod_p(&self.basis, &rhs, self.p)
    }

    pub fn check(&self, x: &SpElement) -> bool {
        let y = self.tau.mul(x.matrix()).mul(&self.tau_inv);
        let blocks = [y.block(0, 0, 4), y.block(0, 4, 4), y.block(4, 0, 4), y.block(4, 4, 4)];
        if blocks.iter().any(|b| self.coords(b).is_none()) {
            return false;
        }
        let [a, b, c, d] = blocks;
        a.mul(&d).sub(&b.mul(&c)).is_identity()
    }
}

pub fn algebra_membership(x: &SpElement, form: &QuadForm, p: u64) -> Result<bool> {
    if x.modulus() != p {
        return Err(Error::ContextMismatch);
    }
    Ok(MembershipChecker::new(form, p)?.check(x))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarGeneration {
    pub p: u64,
    pub degree: usize,
    pub order: u64,
    pub expected: u64,
    pub generated: bool,
}

pub const SCALAR_BFS_CAP: u64 = 10_000_000;

/// Closure of {M_theta(r, s)} against |SL_2(F_{p^d})|.
pub fn scalar_generation_check(field: &FieldExt, theta: Fq) -> Result<ScalarGeneration> {
    let expected = field.sl2_order();
    if expected > SCALAR_BFS_CAP {
        return Err(Error::Budget(format!("|SL_2| = {expected} exceeds {SCALAR_BFS_CAP}")));
    }
    let p = field.p();
    let mut gens = Vec::new();
    for r in 1..p {
        for s in 1..p {
            gens.push(m_theta(field, theta, r, s)?);
        }
    }
    gens.sort();
    gens.dedup();
    let ctx = Sl2Context::new(field.clone());
    let elems =
        closure(&ctx, &gens, expected as usize).ok_or_else(|| Error::Budget("closure exceeded |SL_2|".into()))?;
    Ok(ScalarGeneration {
        p,
        degree: field.degree(),
        order: elems.len() as u64,
        expected,
        generated: elems.len() as u64 == expected,
    })
}

/// Lower-triangular-first word for g^{-(r)} g^{(s)} =
/// l(-rC) u(-B/r) u(B/s) l(sC), with u(W) = J^{-1} l(-W) J.
pub fn generator_word(b: &ModMatrix, c: &ModMatrix, r: u64, s: u64) -> Result<Vec<Token>> {
    let q = b.modulus();
    let m = Modulus::new(q)?;
    let (rinv, sinv) = (m.inv(r)?, m.inv(s)?);
    let u = |w: ModMatrix| [Token::FourierInv, Token::L(w.neg()), Token::Fourier];
    let mut word = vec![Token::L(c.scale(r).neg())];
    word.extend(u(b.scale(rinv).neg()));
    word.extend(u(b.scale(sinv)));
    word.push(Token::L(c.scale(s)));
    Ok(word)
}

/// The word of g^{-1}: reversed, each generator inverted.
pub fn inverse_word(word: &[Token]) -> Result<Vec<Token>> {
    word.iter()
        .rev()
        .map(|t| {
            Ok(match t {
                Token::S(e) => Token::S(e.inverse()?),
                Token::Fourier => Token::FourierInv,
                Token::FourierInv => Token::Fourier,
                Token::L(w) => Token::L(w.neg()),
            })
        })
        .collect()
}

/// A unitary operator given with its adjoint.
pub struct UnitaryPair {
    pub op: WeilOperator,
    pub adj: WeilOperator,
}

impl UnitaryPair {
    pub fn from_word(word: &[Token], q: u64) -> Result<Self> {
        let op = rho_of_word(word, q)?;
        let mut adj = rho_of_word(&inverse_word(word)?, q)?;
        // the adjoint of c U is conj(c) U^{-1}
        adj.set_multiplier(op.multiplier().conj());
        Ok(UnitaryPair { op, adj })
    }
}

/// An abstract operator family for the detector: apply and apply-adjoint of
/// each member on C^dim.
pub trait OperatorFamily: Sync {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn apply(&self, i: usize, v: &[Complex64]) -> Vec<Complex64>;
    fn apply_adj(&self, i: usize, v: &[Complex64]) -> Vec<Complex64>;
}

pub struct WeilFamily {
    q: u64,
    ops: Vec<UnitaryPair>,
}

impl WeilFamily {
    pub fn new(q: u64, ops: Vec<UnitaryPair>) -> Self {
        WeilFamily { q, ops }
    }

    fn run(&self, op: &WeilOperator, v: &[Complex64]) -> Vec<Complex64> {
        let sv = StateVector::new(self.q, v.to_vec()).expect("dimension q^4");
        op.apply(&sv).expect("operator applies").into_data()
    }
}

impl OperatorFamily for WeilFamily {
    fn dim(&self) -> usize {
        (self.q as usize).pow(4)
    }
    fn len(&self) -> usize {
        self.ops.len()
    }
    fn apply(&self, i: usize, v: &[Complex64]) -> Vec<Complex64> {
        self.run(&self.ops[i].op, v)
    }
    fn apply_adj(&self, i: usize, v: &[Complex64]) -> Vec<Complex64> {
        self.run(&self.ops[i].adj, v)
    }
}

/// Group commutators U_i U_j U_i^* U_j^* of a family; invariant under
/// rescaling each U_i by a phase.
pub struct CommutatorFamily<'a, F: OperatorFamily> {
    base: &'a F,
    pairs: Vec<(usize, usize)>,
}

impl<'a, F: OperatorFamily> CommutatorFamily<'a, F> {
    pub fn new(base: &'a F) -> Self {
        let n = base.len();
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        CommutatorFamily { base, pairs }
    }
}

impl<F: OperatorFamily> OperatorFamily for CommutatorFamily<'_, F> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn len(&self) -> usize {
        self.pairs.len()
    }
    fn apply(&self, k: usize, v: &[Complex64]) -> Vec<Complex64> {
        let (i, j) = self.pairs[k];
        let b = self.base;
        b.apply(i, &b.apply(j, &b.apply_adj(i, &b.apply_adj(j, v))))
    }
    fn apply_adj(&self, k: usize, v: &[Complex64]) -> Vec<Complex64> {
        let (i, j) = self.pairs[k];
        let b = self.base;
        b.apply(j, &b.apply(i, &b.apply_adj(j, &b.apply_adj(i, v))))
    }
}

/// Diagonal unitaries, for detector controls.
pub struct DiagonalFamily {
    pub diags: Vec<Vec<Complex64>>,
}

impl OperatorFamily for DiagonalFamily {
    fn dim(&self) -> usize {
        self.diags[0].len()
    }
    fn len(&self) -> usize {
        self.diags.len()
    }
    fn apply(&self, i: usize, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().zip(&self.diags[i]).map(|(a, b)| a * b).collect()
    }
    fn apply_adj(&self, i: usize, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().zip(&self.diags[i]).map(|(a, b)| a * b.conj()).collect()
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// M v = sum_i (U_i - I)^* (U_i - I) v.
fn stacked_gram<F: OperatorFamily>(fam: &F, v: &[Complex64]) -> Vec<Complex64> {
    let parts: Vec<Vec<Complex64>> = (0..fam.len())
        .into_par_iter()
        .map(|i| {
            let d: Vec<Complex64> = fam.apply(i, v).iter().zip(v).map(|(a, b)| a - b).collect();
            fam.apply_adj(i, &d).iter().zip(&d).map(|(a, b)| a - b).collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for p in parts {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaMin {
    pub sigma_min: f64,
    pub iterations: usize,
    /// residual norm of the smallest Ritz pair of M
    pub residual: f64,
}

/// Smallest singular value of the stacked map v -> (U_i v - v)_i, via
/// Lanczos with full reorthogonalization on M = sum (U_i - I)^*(U_i - I).
pub fn stacked_sigma_min<F: OperatorFamily>(fam: &F, max_iter: usize, seed: u64) -> SigmaMin {
    let n = fam.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nv = vnorm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let (mut alphas, mut betas) = (Vec::<f64>::new(), Vec::<f64>::new());
    let steps = max_iter.min(n);
    let mut last = f64::INFINITY;
    let mut stable = 0;
    let mut result = SigmaMin {
        sigma_min: f64::NAN,
        iterations: 0,
        residual: f64::NAN,
    };
    for k in 0..steps {
        let mut w = stacked_gram(fam, &basis[k]);
        let a = dot(&basis[k], &w).re;
        alphas.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = vnorm(&w);
        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (idx, lam) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &l)| if l < acc.1 { (i, l) } else { acc });
        let residual = (beta * eig.eigenvectors[(m - 1, idx)]).abs();
        result = SigmaMin {
            sigma_min: lam.max(0.0).sqrt(),
            iterations: m,
            residual,
        };
        if beta < 1e-10 || residual < 1e-9 {
            break;
        }
        stable = if (lam - last).abs() < 1e-12 { stable + 1 } else { 0 };
        last = lam;
        if stable >= 10 {
            break;
        }
        betas.push(beta);
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(w);
    }
    result
}

pub const SIGMA_THRESHOLD: f64 = 0.05;
pub const INVARIANT_DIM_CAP: usize = 20_000;

#[derive(Debug, Clone, Serialize)]
pub struct InvariantVectorReport {
    pub p: u64,
    pub generators: Vec<(u64, u64)>,
    pub exact: SigmaMin,
    /// phase-robust mode on the group commutators of the generators
    pub phase_robust: SigmaMin,
    pub pass: bool,
    pub modes_agree: bool,
}

fn weil_family(form: &QuadForm, p: u64, pairs: &[(u64, u64)]) -> Result<WeilFamily> {
    let g = symplectic_element(form, &Modulus::prime(p)?)?;
    let dul = dul_factorize(&g)?;
    let ops = pairs
        .iter()
        .map(|&(r, s)| UnitaryPair::from_word(&generator_word(&dul.b, &dul.c, r, s)?, p))
        .collect::<Result<_>>()?;
    Ok(WeilFamily::new(p, ops))
}

/// No nonzero vector is fixed by rho(Gamma_p): sigma_min of the stacked
/// (rho(gamma_i) - I) over `num_generators` random generators.
pub fn invariant_vector_check(
    form: &QuadForm,
    p: u64,
    num_generators: usize,
    seed: u64,
) -> Result<InvariantVectorReport> {
    require_admissible(form, p)?;
    if (p as usize).pow(4) > INVARIANT_DIM_CAP {
        return Err(Error::Budget(format!("dimension {}^4 exceeds {INVARIANT_DIM_CAP}", p)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<(u64, u64)> = (1..p)
        .flat_map(|r| (1..p).map(move |s| (r, s)))
        .filter(|(r, s)| r != s)
        .collect();
    let mut pairs = Vec::new();
    while pairs.len() < num_generators.max(1) && !all.is_empty() {
        pairs.push(all.swap_remove(rng.gen_range(0..all.len())));
    }
    let fam = weil_family(form, p, &pairs)?;
    let iters = 400;
    let exact = stacked_sigma_min(&fam, iters, seed);
    let phase_robust = stacked_sigma_min(&CommutatorFamily::new(&fam), iters, seed ^ 1);
    let (a, b) = (
        exact.sigma_min > SIGMA_THRESHOLD,
        phase_robust.sigma_min > SIGMA_THRESHOLD,
    );
    Ok(InvariantVectorReport {
        p,
        generators: pairs,
        exact,
        phase_robust,
        pass: a && b,
        modes_agree: a == b,
    })
}

/// x^T C Delta^j x = 0 for j = 0..3 forces x = 0, and likewise
/// x^T Delta^{j+1} B x = 0 for j = 0..3.
pub fn support_condition_check(form: &QuadForm, p: u64) -> Result<bool> {
    require_admissible(form, p)?;
    let g = symplectic_element(form, &Modulus::prime(p)?)?;
    let dul = dul_factorize(&g)?;
    Ok(support_condition_matrices(&dul.b, &dul.c, &delta_mod(form, p)?))
}

/// The support condition for explicit B, C, Delta (no admissibility needed).
pub fn support_condition_matrices(b: &ModMatrix, c: &ModMatrix, delta: &ModMatrix) -> bool {
    let p = b.modulus();
    if p.pow(4) > 10_000_000 {
        return false;
    }
    let mut pow = vec![ModMatrix::identity(4, p)];
    for k in 1..5 {
        pow.push(pow[k - 1].mul(delta));
    }
    let first: Vec<ModMatrix> = (0..4).map(|j| c.mul(&pow[j])).collect();
    let second: Vec<ModMatrix> = (0..4).map(|j| pow[j + 1].mul(b)).collect();
    let n = p.pow(4);
    (1..n).into_par_iter().all(|idx| {
        let x = [idx % p, (idx / p) % p, (idx / (p * p)) % p, idx / (p * p * p)];
        first.iter().any(|m| m.quad(&x) != 0) && second.iter().any(|m| m.quad(&x) != 0)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaProductReport {
    pub q: u64,
    pub primes: [u64; 2],
    /// "bfs" when targets are drawn from full per-prime closures, else "words"
    pub targets: &'static str,
    pub trials: usize,
    pub hits: usize,
    pub all_hit: bool,
}

/// A word in generator labels (r, s) mod p, with its value.
fn random_word(gens: &[((u64, u64), SpElement)], len: usize, rng: &mut impl Rng) -> (Vec<(u64, u64)>, SpElement) {
    let q = gens[0].1.modulus();
    let mut acc = SpElement::identity(q);
    let mut labels = Vec::with_capacity(len);
    for _ in 0..len {
        let (lab, g) = &gens[rng.gen_range(0..gens.len())];
        acc = acc.mul(g);
        labels.push(*lab);
    }
    (labels, acc)
}

/// BFS tree words: element -> generator labels from the identity.
fn bfs_words(
    gens: &[((u64, u64), SpElement)],
    ctx: &SpContext,
    budget: usize,
) -> Option<Vec<(PackedSp, Vec<(u64, u64)>)>> {
    let packed: Vec<((u64, u64), PackedSp)> = gens.iter().map(|(l, g)| (*l, ctx.pack(g))).collect();
    let id = ctx.identity();
    let mut parent: HashMap<PackedSp, Option<(PackedSp, (u64, u64))>> = HashMap::new();
    parent.insert(id, None);
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for (lab, g) in &packed {
                let y = ctx.mul(x, g);
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(y) {
                    e.insert(Some((*x, *lab)));
                    next.push(y);
                    if parent.len() > budget {
                        return None;
                    }
                }
            }
        }
        frontier = next;
    }
    let mut out = Vec::with_capacity(parent.len());
    for &e in parent.keys() {
        let mut labels = Vec::new();
        let mut cur = e;
        while let Some(Some((prev, lab))) = parent.get(&cur) {
            labels.push(*lab);
            cur = *prev;
        }
        labels.reverse();
        out.push((e, labels));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Some(out)
}

/// Surjectivity of Gamma_{p1 p2} onto Gamma_{p1} x Gamma_{p2}: target pairs
/// are written as words, padded with identity generators (r = s) to equal
/// length, and CRT-combined label by label into one word mod p1 p2.
pub fn gamma_product_check(
    form: &QuadForm,
    p1: u64,
    p2: u64,
    trials: usize,
    budget: usize,
    seed: u64,
) -> Result<GammaProductReport> {
    if p1 == p2 || !is_prime(p1) || !is_prime(p2) {
        return Err(Error::Precondition(format!(
            "need two distinct primes, got {p1} and {p2}"
        )));
    }
    require_admissible(form, p1)?;
    require_admissible(form, p2)?;
    let q = p1 * p2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = [gamma_generators(form, p1)?, gamma_generators(form, p2)?];
    let trees: Vec<Option<Vec<(PackedSp, Vec<(u64, u64)>)>>> = [p1, p2]
        .iter()
        .zip(&gens)
        .map(|(&p, g)| Ok(bfs_words(g, &SpContext::new(p)?, budget)))
        .collect::<Result<_>>()?;
    let from_bfs = trees.iter().all(|t| t.is_some());
    let g_q = symplectic_element(form, &Modulus::new(q)?)?;
    let mut hits = 0;
    for trial in 0..trials {
        let mut targets = Vec::new();
        let mut words = Vec::new();
        for k in 0..2 {
            let p = [p1, p2][k];
            let (w, t) = if trial == 0 {
                (Vec::new(), SpElement::identity(p))
            } else if from_bfs {
                let tree = trees[k].as_ref().unwrap();
                let (e, w) = &tree[rng.gen_range(0..tree.len())];
                (w.clone(), SpContext::new(p)?.unpack(e))
            } else {
                let len = rng.gen_range(1..=12);
                let (w, t) = random_word(&gens[k], len, &mut rng);
                (w, t)
            };
            words.push(w);
            targets.push(t);
        }
        let len = words[0].len().max(words[1].len());
        for w in words.iter_mut() {
            w.resize(len, (1, 1));
        }
        let mut acc = SpElement::identity(q);
        for i in 0..len {
            let ((r1, s1), (r2, s2)) = (words[0][i], words[1][i]);
            let r = crt_pair(r1 as u128, p1 as u128, r2 as u128, p2 as u128)?.0 as u64;
            let s = crt_pair(s1 as u128, p1 as u128, s2 as u128, p2 as u128)?.0 as u64;
            acc = acc.mul(&g_q.dilate(r)?.inverse().mul(&g_q.dilate(s)?));
        }
        if acc.reduce_mod(p1) == targets[0] && acc.reduce_mod(p2) == targets[1] {
            hits += 1;
        }
    }
    Ok(GammaProductReport {
        q,
        primes: [p1, p2],
        targets: if from_bfs { "bfs" } else { "words" },
        trials,
        hits,
        all_hit: hits == trials,
    })
}

/// Random generic forms with entries in [-bound, bound] that are admissible
/// at p and satisfy `accept`.
pub fn search_form(
    p: u64,
    bound: i64,
    seed: u64,
    max_tries: usize,
    accept: impl Fn(&QuadForm) -> bool,
) -> Option<QuadForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_tries {
        let f = QuadForm::random(&mut rng, bound);
        if f.validate().is_err() || !is_generic(&f).generic {
            continue;
        }
        if admissible_prime(&f, p).unwrap_or(false) && accept(&f) {
            return Some(f);
        }
    }
    None
}

/// An admissible form at p whose characteristic polynomial of Delta is
/// irreducible mod p.
pub fn search_irreducible_form(p: u64, seed: u64) -> Option<QuadForm> {
    search_form(p, 2, seed, 100_000, |f| {
        algebra_decomposition(f, p).map_or(false, |d| d.factor_degrees == vec![4])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::diag4;

    #[test]
    fn e1_decomposition_mod_13() {
        let d = algebra_decomposition(&QuadForm::e1(), 13).unwrap();
        assert_eq!(d.factor_degrees, vec![1, 1, 1, 1]);
        assert_eq!(d.expected_order, 2184u128.pow(4));
        assert!(algebra_decomposition(&QuadForm::e1(), 7).is_err());
    }

    #[test]
    fn irreducible_form_at_3() {
        let f = search_irreducible_form(3, 1).expect("search finds a form");
        let d = algebra_decomposition(&f, 3).unwrap();
        assert_eq!(d.expected_order, 531_360);
        assert_eq!(d.factor_degrees.iter().sum::<usize>(), 4);
    }

    #[test]
    fn e1_generators_pass_membership() {
        let f = QuadForm::e1();
        let checker = MembershipChecker::new(&f, 13).unwrap();
        let gens = gamma_generators(&f, 13).unwrap();
        assert_eq!(gens.len(), 144);
        assert!(gens.iter().all(|(_, g)| checker.check(g)));
        assert!(checker.check(&SpElement::identity(13)));
    }

    #[test]
    fn j_fails_membership_for_nondiagonal_form() {
        let f = search_form(13, 2, 3, 10_000, |f| {
            f.b.iter().flatten().filter(|&&x| x != 0).count() > 8
        })
        .unwrap();
        let checker = MembershipChecker::new(&f, 13).unwrap();
        assert!(!checker.check(&SpElement::j(13)));
        let gens = gamma_generators(&f, 13).unwrap();
        assert!(gens.iter().all(|(_, g)| checker.check(g)));
    }

    #[test]
    fn generator_word_matches_product() {
        let f = QuadForm::e1();
        let p = 13;
        let g = symplectic_element(&f, &Modulus::prime(p).unwrap()).unwrap();
        let dul = dul_factorize(&g).unwrap();
        for (r, s) in [(1, 2), (5, 7), (12, 3)] {
            let w = generator_word(&dul.b, &dul.c, r, s).unwrap();
            let want = g.dilate(r).unwrap().inverse().mul(&g.dilate(s).unwrap());
            assert_eq!(crate::weil::word_element(&w, p).unwrap(), want);
            let wi = inverse_word(&w).unwrap();
            assert!(crate::weil::word_element(&wi, p).unwrap().mul(&want).is_identity());
        }
    }

    #[test]
    fn scalar_generation() {
        let f7 = FieldExt::new(7, 1).unwrap();
        for theta in 1..6 {
            let r = scalar_generation_check(&f7, theta).unwrap();
            assert_eq!(r.order, 336, "theta {theta}");
        }
        assert!(scalar_generation_check(&f7, 6).is_err());
        let f25 = FieldExt::new(5, 2).unwrap();
        let theta = f25.from_digits(&[0, 1]);
        let r = scalar_generation_check(&f25, theta).unwrap();
        assert_eq!(r.order, 15600);
        assert!(r.generated);
    }

    #[test]
    fn gamma_small_prime_bfs() {
        let f = search_irreducible_form(3, 1).unwrap();
        let r = generate_gamma(&f, 3, DEFAULT_BFS_BUDGET).unwrap();
        assert_eq!(r.mode, GammaMode::FullBfs);
        assert!(r.membership_ok);
        let elems = r.elements.unwrap();
        let ctx = SpContext::new(3).unwrap();
        assert!(elems.contains(&ctx.identity()));
        // only r, s in {1, 2}: Gamma_3 is cyclic, generated by one element
        let gens = gamma_generators(&f, 3).unwrap();
        let h = closure(&ctx, &[ctx.pack(&gens[1].1)], 1000).unwrap();
        assert_eq!(h.len(), elems.len());
    }

    #[test]
    fn e1_inclusion_only() {
        let r = generate_gamma(&QuadForm::e1(), 13, 20_000).unwrap();
        assert_eq!(r.mode, GammaMode::InclusionOnly);
        assert!(r.membership_ok);
        assert_eq!(r.generators.len(), 144);
    }

    #[test]
    fn support_conditions() {
        assert!(support_condition_check(&QuadForm::e1(), 13).unwrap());
        let p = 13;
        let g = symplectic_element(&QuadForm::e1(), &Modulus::prime(p).unwrap()).unwrap();
        let dul = dul_factorize(&g).unwrap();
        assert!(!support_condition_matrices(&dul.b, &dul.c, &ModMatrix::zero(4, p)));
    }

    #[test]
    fn detector_controls() {
        let n = 50;
        let one = Complex64::new(1.0, 0.0);
        let ident = DiagonalFamily {
            diags: vec![vec![one; n]; 3],
        };
        assert!(stacked_sigma_min(&ident, 100, 1).sigma_min < 1e-9);
        // common fixed vector e_0, otherwise generic phases
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let diags: Vec<Vec<Complex64>> = (0..3)
            .map(|_| {
                (0..n)
                    .map(|k| {
                        if k == 0 {
                            one
                        } else {
                            Complex64::from_polar(1.0, rng.gen_range(0.5..5.5))
                        }
                    })
                    .collect()
            })
            .collect();
        let fam = DiagonalFamily { diags: diags.clone() };
        assert!(stacked_sigma_min(&fam, 100, 3).sigma_min < 1e-6);
        let mut moved = diags;
        moved[0][0] = Complex64::from_polar(1.0, 1.0);
        let s = stacked_sigma_min(&DiagonalFamily { diags: moved }, 100, 4).sigma_min;
        assert!(s > 0.05, "{s}");
    }

    #[test]
    fn no_invariant_vectors_p5() {
        let f = search_form(5, 2, 11, 100_000, |_| true).unwrap();
        let r = invariant_vector_check(&f, 5, 6, 1).unwrap();
        assert!(r.pass && r.modes_agree, "{r:?}");
        assert!(support_condition_check(&f, 5).unwrap());
    }

    #[test]
    fn product_check_small() {
        let f = search_form(3, 2, 5, 100_000, |f| admissible_prime(f, 5).unwrap_or(false)).unwrap();
        let r = gamma_product_check(&f, 3, 5, 20, 200_000, 1).unwrap();
        assert!(r.all_hit, "{r:?}");
        assert!(gamma_product_check(&f, 3, 3, 1, 10, 1).is_err());
        let _ = diag4([1, 1, 1, 1]);
    }
}
