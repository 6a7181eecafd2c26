//! Sparse probability measures on finite matrix groups.

use crate::error::{Error, Result};
use crate::quadform::QuadForm;
use crate::ring::field::{FieldExt, Mat2};
use crate::ring::matrix::ModMatrix;
use crate::ring::modular::Modulus;
use crate::symplectic::{symplectic_element, SpElement};
use crate::weil::StateVector;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Debug;
use std::hash::{BuildHasherDefault, Hash};

type DetMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;
type DetSet<K> = HashSet<K, BuildHasherDefault<DefaultHasher>>;

pub trait GroupContext: Sync {
    type Elem: Clone + Eq + Hash + Ord + Send + Sync + Debug;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
}

/// An element of Sp_8(Z/qZ), q < 256, as 64 row-major residues.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PackedSp(pub [u8; 64]);

impl Debug for PackedSp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PackedSp({:?})", &self.0[..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpContext {
    q: u64,
}

impl SpContext {
    pub fn new(q: u64) -> Result<Self> {
        if !(3..256).contains(&q) {
            return Err(Error::InvalidModulus(q, "packed group elements need 3 <= q < 256"));
        }
        Ok(SpContext { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn pack(&self, g: &SpElement) -> PackedSp {
        debug_assert_eq!(g.modulus(), self.q);
        let mut out = [0u8; 64];
        for (o, &v) in out.iter_mut().zip(g.matrix().data()) {
            *o = v as u8;
        }
        PackedSp(out)
    }

    pub fn unpack(&self, e: &PackedSp) -> SpElement {
        SpElement::new(ModMatrix::from_raw(8, self.q, e.0.iter().map(|&v| v as u64).collect()))
            .expect("packed elements are symplectic")
    }
}

impl GroupContext for SpContext {
    type Elem = PackedSp;

    fn identity(&self) -> PackedSp {
        let mut out = [0u8; 64];
        for i in 0..8 {
            out[i * 9] = 1;
        }
        PackedSp(out)
    }

    fn mul(&self, a: &PackedSp, b: &PackedSp) -> PackedSp {
        let q = self.q as u32;
        let mut out = [0u8; 64];
        for i in 0..8 {
            for j in 0..8 {
                let mut s = 0u32;
                for k in 0..8 {
                    s += a.0[i * 8 + k] as u32 * b.0[k * 8 + j] as u32;
                }
                out[i * 8 + j] = (s % q) as u8;
            }
        }
        PackedSp(out)
    }

    /// [[D^T, -B^T], [-C^T, A^T]]
    fn inv(&self, a: &PackedSp) -> PackedSp {
        let q = self.q as u8;
        let neg = |v: u8| if v == 0 { 0 } else { q - v };
        let mut out = [0u8; 64];
        for i in 0..4 {
            for j in 0..4 {
                out[i * 8 + j] = a.0[(j + 4) * 8 + i + 4];
                out[i * 8 + j + 4] = neg(a.0[j * 8 + i + 4]);
                out[(i + 4) * 8 + j] = neg(a.0[(j + 4) * 8 + i]);
                out[(i + 4) * 8 + j + 4] = a.0[j * 8 + i];
            }
        }
        PackedSp(out)
    }
}

/// SL_2 over a finite field.
#[derive(Debug, Clone)]
pub struct Sl2Context {
    pub field: FieldExt,
}

impl GroupContext for Sl2Context {
    type Elem = Mat2;

    fn identity(&self) -> Mat2 {
        self.field.mat_identity()
    }

    fn mul(&self, a: &Mat2, b: &Mat2) -> Mat2 {
        self.field.mat_mul(a, b)
    }

    fn inv(&self, a: &Mat2) -> Mat2 {
        self.field.sl2_inv(a)
    }
}

impl Sl2Context {
    pub fn new(field: FieldExt) -> Self {
        Sl2Context { field }
    }

    pub fn elements(&self) -> Vec<Mat2> {
        let f = &self.field;
        let s = f.size() as u32;
        let mut out = Vec::with_capacity(f.sl2_order() as usize);
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    for d in 0..s {
                        let m = [a, b, c, d];
                        if f.mat_det(&m) == 1 {
                            out.push(m);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Closure of `gens` under multiplication, or None once it exceeds `cap`.
pub fn closure<C: GroupContext>(ctx: &C, gens: &[C::Elem], cap: usize) -> Option<Vec<C::Elem>> {
    let mut seen: DetSet<C::Elem> = DetSet::default();
    let id = ctx.identity();
    seen.insert(id.clone());
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                let y = ctx.mul(x, g);
                if seen.insert(y.clone()) {
                    if seen.len() > cap {
                        return None;
                    }
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<C::Elem> = seen.into_iter().collect();
    out.sort();
    Some(out)
}

/// A probability measure stored as a key-sorted support list.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeasure<E> {
    support: Vec<(E, f64)>,
}

pub const EXACT_BUDGET: u64 = 100_000_000;

impl<E: Clone + Eq + Hash + Ord + Send + Sync + Debug> GroupMeasure<E> {
    /// Merges duplicate keys; weights must be nonnegative with total 1.
    pub fn from_weights(weights: Vec<(E, f64)>) -> Result<Self> {
        let mut m: DetMap<E, f64> = DetMap::default();
        for (e, w) in weights {
            if !(w >= 0.0) {
                return Err(Error::Precondition(format!("negative weight {w}")));
            }
            *m.entry(e).or_insert(0.0) += w;
        }
        let out = Self::from_map(m);
        if (out.mass() - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("total mass {} is not 1", out.mass())));
        }
        Ok(out)
    }

    fn from_map(m: DetMap<E, f64>) -> Self {
        let mut support: Vec<(E, f64)> = m.into_iter().filter(|(_, w)| *w > 0.0).collect();
        support.sort_by(|a, b| a.0.cmp(&b.0));
        GroupMeasure { support }
    }

    pub fn delta(e: E) -> Self {
        GroupMeasure {
            support: vec![(e, 1.0)],
        }
    }

    pub fn uniform(set: &[E]) -> Self {
        let w = 1.0 / set.len() as f64;
        let mut support: Vec<(E, f64)> = set.iter().map(|e| (e.clone(), w)).collect();
        support.sort_by(|a, b| a.0.cmp(&b.0));
        support.dedup_by(|a, b| a.0 == b.0);
        GroupMeasure { support }
    }

    pub fn support(&self) -> &[(E, f64)] {
        &self.support
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn elements(&self) -> Vec<E> {
        self.support.iter().map(|(e, _)| e.clone()).collect()
    }

    pub fn get(&self, e: &E) -> f64 {
        self.support
            .binary_search_by(|p| p.0.cmp(e))
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        kahan_sum(self.support.iter().map(|p| p.1))
    }

    pub fn norm_sq(&self) -> f64 {
        kahan_sum(self.support.iter().map(|p| p.1 * p.1))
    }

    /// ||mu|| with respect to counting measure.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// mu(A) for a set A.
    pub fn measure_of(&self, set: &DetSet<E>) -> f64 {
        kahan_sum(self.support.iter().filter(|p| set.contains(&p.0)).map(|p| p.1))
    }

    /// ||mu - nu||.
    pub fn dist(&self, o: &GroupMeasure<E>) -> f64 {
        let mut m: DetMap<&E, f64> = DetMap::default();
        for (e, w) in &self.support {
            *m.entry(e).or_insert(0.0) += w;
        }
        for (e, w) in &o.support {
            *m.entry(e).or_insert(0.0) -= w;
        }
        kahan_sum(m.values().map(|v| v * v)).sqrt()
    }

    pub fn linf_dist(&self, o: &GroupMeasure<E>) -> f64 {
        let mut m: DetMap<&E, f64> = DetMap::default();
        for (e, w) in &self.support {
            *m.entry(e).or_insert(0.0) += w;
        }
        for (e, w) in &o.support {
            *m.entry(e).or_insert(0.0) -= w;
        }
        m.values().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max_weight(&self) -> f64 {
        self.support.iter().fold(0.0, |a, p| a.max(p.1))
    }
}

/// Compensated summation.
pub fn kahan_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for x in it {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// mu°(x) = mu(x^{-1}).
pub fn reflect<C: GroupContext>(ctx: &C, mu: &GroupMeasure<C::Elem>) -> GroupMeasure<C::Elem> {
    let mut support: Vec<(C::Elem, f64)> = mu.support.iter().map(|(e, w)| (ctx.inv(e), *w)).collect();
    support.sort_by(|a, b| a.0.cmp(&b.0));
    GroupMeasure { support }
}

pub fn is_symmetric<C: GroupContext>(ctx: &C, mu: &GroupMeasure<C::Elem>, tol: f64) -> bool {
    mu.support.iter().all(|(e, w)| (mu.get(&ctx.inv(e)) - w).abs() <= tol)
}

/// mu * nu (x) = sum_{g1 g2 = x} mu(g1) nu(g2).
pub fn convolve<C: GroupContext>(
    ctx: &C,
    mu: &GroupMeasure<C::Elem>,
    nu: &GroupMeasure<C::Elem>,
) -> Result<GroupMeasure<C::Elem>> {
    let work = mu.support.len() as u64 * nu.support.len() as u64;
    if work > EXACT_BUDGET {
        return Err(Error::Budget(format!(
            "{work} products exceed the exact budget {EXACT_BUDGET}; use Monte Carlo mode"
        )));
    }
    let mut m: DetMap<C::Elem, f64> = DetMap::default();
    for (a, wa) in &mu.support {
        for (b, wb) in &nu.support {
            *m.entry(ctx.mul(a, b)).or_insert(0.0) += wa * wb;
        }
    }
    Ok(GroupMeasure::from_map(m))
}

/// mu^{(m)} = mu° * mu * ... * mu with m factors, m even.
pub fn symmetrized_power<C: GroupContext>(
    ctx: &C,
    mu: &GroupMeasure<C::Elem>,
    m: usize,
) -> Result<GroupMeasure<C::Elem>> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::Precondition(format!(
            "symmetrized power needs a positive even count, got {m}"
        )));
    }
    let pair = convolve(ctx, &reflect(ctx, mu), mu)?;
    let mut k = m / 2;
    let mut acc: Option<GroupMeasure<C::Elem>> = None;
    let mut base = pair;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => convolve(ctx, &a, &base)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = convolve(ctx, &base, &base)?;
    }
    Ok(acc.unwrap())
}

/// The odd power mu° * mu * ... * mu° with m factors.
pub fn odd_power<C: GroupContext>(ctx: &C, mu: &GroupMeasure<C::Elem>, m: usize) -> Result<GroupMeasure<C::Elem>> {
    if m % 2 == 0 {
        return Err(Error::Precondition(format!("odd power needs an odd count, got {m}")));
    }
    let refl = reflect(ctx, mu);
    if m == 1 {
        return Ok(refl);
    }
    convolve(ctx, &symmetrized_power(ctx, mu, m - 1)?, &refl)
}

/// Empirical measure of `samples` independent walks drawn from mu^{(m)}.
pub fn sample_power<C: GroupContext>(
    ctx: &C,
    mu: &GroupMeasure<C::Elem>,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<GroupMeasure<C::Elem>> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::Precondition(format!(
            "symmetrized power needs a positive even count, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cum: Vec<f64> = mu
        .support
        .iter()
        .scan(0.0, |s, p| {
            *s += p.1;
            Some(*s)
        })
        .collect();
    let total = *cum.last().unwrap();
    let draw = |rng: &mut ChaCha8Rng| {
        let u = rng.gen::<f64>() * total;
        let i = cum.partition_point(|&c| c < u).min(cum.len() - 1);
        mu.support[i].0.clone()
    };
    let mut m_out: DetMap<C::Elem, f64> = DetMap::default();
    let w = 1.0 / samples as f64;
    for _ in 0..samples {
        let mut x = ctx.identity();
        for step in 0..m {
            let g = draw(&mut rng);
            let g = if step % 2 == 0 { ctx.inv(&g) } else { g };
            x = ctx.mul(&x, &g);
        }
        *m_out.entry(x).or_insert(0.0) += w;
    }
    Ok(GroupMeasure::from_map(m_out))
}

/// Unbiased collision estimate of ||mu^{(m)}||^2 with its standard error,
/// from `samples` independent pairs of walks.
pub fn collision_norm_sq<C: GroupContext>(
    ctx: &C,
    mu: &GroupMeasure<C::Elem>,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let a = sample_power(ctx, mu, m, samples, seed)?;
    let b = sample_power(ctx, mu, m, samples, seed.wrapping_add(0x9e37_79b9))?;
    let n = samples as f64;
    // P(X = Y) for independent X ~ a, Y ~ b
    let p: f64 = kahan_sum(a.support.iter().map(|(e, w)| w * b.get(e)));
    Ok((p, (p * (1.0 - p) / n).sqrt()))
}

/// mu_q: weight 1/phi(q) on every dilate g^{(r)} of the symplectic element.
pub fn mu_q(form: &QuadForm, ctx: &SpContext) -> Result<GroupMeasure<PackedSp>> {
    let q = Modulus::new(ctx.modulus())?;
    let g = symplectic_element(form, &q)?;
    let units = q.units();
    let w = 1.0 / units.len() as f64;
    let mut weights = Vec::with_capacity(units.len());
    for r in units {
        weights.push((ctx.pack(&g.dilate(r)?), w));
    }
    GroupMeasure::from_weights(weights)
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatteningLevel {
    pub j: usize,
    pub norm_sq: f64,
    pub support: usize,
    pub alpha: f64,
    pub beta: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatteningProfile {
    pub p: u64,
    pub levels: Vec<FlatteningLevel>,
    pub truncated: bool,
    /// first j with ||mu^{(2^{j+1})}|| >= (1 - tol) ||mu^{(2^j)}||
    pub stabilized_at: Option<usize>,
}

/// beta = round(-log_p norm_sq), ties toward the larger integer, clamped to
/// [0, 36]; alpha = norm_sq p^beta.
pub fn fit_alpha_beta(norm_sq: f64, p: u64) -> (f64, i32) {
    let x = -norm_sq.ln() / (p as f64).ln();
    let beta = ((x + 0.5).floor() as i32).clamp(0, 36);
    (norm_sq * (p as f64).powi(beta), beta)
}

pub const STABILIZATION_TOL: f64 = 0.01;

/// Norms of mu_p^{(2^j)} for j = 1..=j_max.
pub fn flattening_profile(form: &QuadForm, p: u64, j_max: usize, tol: f64) -> Result<FlatteningProfile> {
    let ctx = SpContext::new(p)?;
    let mu = mu_q(form, &ctx)?;
    let mut levels = Vec::new();
    let mut truncated = false;
    let mut cur = convolve(&ctx, &reflect(&ctx, &mu), &mu)?;
    for j in 1..=j_max {
        if j > 1 {
            match convolve(&ctx, &cur, &cur) {
                Ok(next) => cur = next,
                Err(Error::Budget(_)) => {
                    truncated = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let norm_sq = cur.norm_sq();
        let (alpha, beta) = fit_alpha_beta(norm_sq, p);
        levels.push(FlatteningLevel {
            j,
            norm_sq,
            support: cur.support_len(),
            alpha,
            beta,
        });
    }
    let stabilized_at = levels
        .windows(2)
        .find(|w| (w[1].norm_sq / w[0].norm_sq).sqrt() >= 1.0 - tol)
        .map(|w| w[0].j);
    Ok(FlatteningProfile {
        p,
        levels,
        truncated,
        stabilized_at,
    })
}

/// mu_p^{(2^j)} itself.
pub fn mu_power_level(form: &QuadForm, p: u64, j: usize) -> Result<GroupMeasure<PackedSp>> {
    let ctx = SpContext::new(p)?;
    let mu = mu_q(form, &ctx)?;
    symmetrized_power(&ctx, &mu, 1 << j)
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityCertificate {
    /// sup_x mu(x) |Gamma|
    pub k: f64,
    /// max over Gamma of mu divided by min over Gamma of mu
    pub sup_ratio: f64,
    pub linf_dist: f64,
    pub support_in_gamma: bool,
}

pub fn uniformity_certificate<E: Clone + Eq + Hash + Ord + Send + Sync + Debug>(
    mu: &GroupMeasure<E>,
    gamma: &[E],
) -> Result<UniformityCertificate> {
    let set: DetSet<&E> = gamma.iter().collect();
    let escaped = mu.support.iter().filter(|(e, _)| !set.contains(e)).count();
    if escaped > 0 {
        return Err(Error::Precondition(format!(
            "{escaped} support points lie outside the group"
        )));
    }
    let n = gamma.len() as f64;
    let min = gamma.iter().map(|e| mu.get(e)).fold(f64::INFINITY, f64::min);
    let max = mu.max_weight();
    let linf = gamma.iter().map(|e| (mu.get(e) - 1.0 / n).abs()).fold(0.0, f64::max);
    Ok(UniformityCertificate {
        k: max * n,
        sup_ratio: if min > 0.0 { max / min } else { f64::INFINITY },
        linf_dist: linf,
        support_in_gamma: true,
    })
}

#[derive(Debug, Clone)]
pub struct SubgroupRecovery<E> {
    pub elements: Vec<E>,
    pub residual: f64,
}

/// Almost-flat symmetric mu -> subgroup H with ||mu - mu_H|| / ||mu_H||.
pub fn recover_subgroup<C: GroupContext>(
    ctx: &C,
    mu: &GroupMeasure<C::Elem>,
    eps: f64,
) -> Result<SubgroupRecovery<C::Elem>> {
    if !is_symmetric(ctx, mu, 1e-9) {
        return Err(Error::Precondition("measure is not symmetric".into()));
    }
    let nsq = mu.norm_sq();
    let mm = convolve(ctx, mu, mu)?;
    let thresh = (1.0 - eps.sqrt()) * nsq;
    let a: Vec<C::Elem> = mm
        .support
        .iter()
        .filter(|p| p.1 >= thresh)
        .map(|p| p.0.clone())
        .collect();
    if a.is_empty() {
        return Err(Error::NoSubgroupFound);
    }
    // best right translate A y^{-1}, y in A
    let mut best: Option<(f64, DetSet<C::Elem>)> = None;
    for y in &a {
        let yi = ctx.inv(y);
        let b: DetSet<C::Elem> = a.iter().map(|x| ctx.mul(x, &yi)).collect();
        let m = mu.measure_of(&b);
        if best.as_ref().map_or(true, |(bm, _)| m > *bm + 1e-15) {
            best = Some((m, b));
        }
    }
    let b = best.unwrap().1;
    let s: Vec<C::Elem> = b.iter().filter(|x| b.contains(&ctx.inv(x))).cloned().collect();
    let cap = 4 * s.len().max(1);
    let h = closure(ctx, &s, cap).ok_or(Error::NoSubgroupFound)?;
    let mu_h = GroupMeasure::uniform(&h);
    let residual = mu.dist(&mu_h) / mu_h.norm();
    Ok(SubgroupRecovery { elements: h, residual })
}

/// Every subgroup of a small group, as sorted element lists, obtained as
/// closures of pairs (enough for groups whose subgroups are 2-generated).
pub fn two_generated_subgroups<C: GroupContext>(ctx: &C, elements: &[C::Elem]) -> Vec<Vec<C::Elem>> {
    let mut found: BTreeSet<Vec<C::Elem>> = BTreeSet::new();
    for (i, a) in elements.iter().enumerate() {
        for b in &elements[i..] {
            if let Some(h) = closure(ctx, &[a.clone(), b.clone()], elements.len()) {
                found.insert(h);
            }
        }
    }
    found.into_iter().collect()
}

fn check_unit_vec(v: &StateVector) -> Result<()> {
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("vector norm {} is not 1", v.norm())));
    }
    Ok(())
}

/// int |<v, rho(x) w>| dmu(x).
pub fn matrix_coeff_average<E: Clone + Eq + Hash + Ord + Send + Sync + Debug>(
    mu: &GroupMeasure<E>,
    rho: &dyn Fn(&E, &StateVector) -> Result<StateVector>,
    v: &StateVector,
    w: &StateVector,
) -> Result<f64> {
    check_unit_vec(v)?;
    check_unit_vec(w)?;
    let mut terms = Vec::with_capacity(mu.support.len());
    for (x, m) in &mu.support {
        terms.push(m * v.inner(&rho(x, w)?).norm());
    }
    Ok(kahan_sum(terms.into_iter()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProofChain {
    /// eta_1, then eta_2, eta_4, ... for mu^{(2)}, mu^{(4)}, ...
    pub etas: Vec<f64>,
    /// eta_{2k} >= eta_k^2 - tol at every step
    pub holds: bool,
    pub bound: Option<f64>,
}

/// eta_1 = int |<v, rho w>| dmu and eta_m = int |<w, rho w>| dmu^{(m)} for
/// m = 2, 4, .., 2^levels; checks eta_{2k} >= eta_k^2.
pub fn proof_chain<C: GroupContext>(
    ctx: &C,
    mu: &GroupMeasure<C::Elem>,
    rho: &dyn Fn(&C::Elem, &StateVector) -> Result<StateVector>,
    v: &StateVector,
    w: &StateVector,
    levels: usize,
) -> Result<ProofChain> {
    let mut etas = vec![matrix_coeff_average(mu, rho, v, w)?];
    let mut cur = convolve(ctx, &reflect(ctx, mu), mu)?;
    for l in 1..=levels {
        if l > 1 {
            cur = convolve(ctx, &cur, &cur)?;
        }
        etas.push(matrix_coeff_average(&cur, rho, w, w)?);
    }
    let holds = etas.windows(2).all(|e| e[1] >= e[0] * e[0] - 1e-9);
    Ok(ProofChain {
        etas,
        holds,
        bound: None,
    })
}

/// K^{1/m} D^{-1/(2m)}.
pub fn matrix_avg_bound(k: f64, d: f64, m: usize) -> f64 {
    k.powf(1.0 / m as f64) * d.powf(-1.0 / (2.0 * m as f64))
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// E_{x in G} |<v, psi(x) w>|^2 against ||v||^2 ||w||^2 / dim psi.
pub fn schur_average_check(rep: &[DMatrix<Complex64>], v: &DVector<Complex64>, w: &DVector<Complex64>) -> SchurCheck {
    let dim = v.len() as f64;
    let lhs = kahan_sum(rep.iter().map(|m| v.dotc(&(m * w)).norm_sqr())) / rep.len() as f64;
    let rhs = v.norm_squared() * w.norm_squared() / dim;
    SchurCheck {
        lhs,
        rhs,
        pass: (lhs - rhs).abs() <= 1e-8,
    }
}

/// The 2-dimensional irreducible of S_3 on the sum-zero plane.
pub fn s3_standard_rep() -> Vec<DMatrix<Complex64>> {
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    // orthonormal basis of {x : x1 + x2 + x3 = 0}
    let basis = DMatrix::from_row_slice(3, 2, &[1.0 / s2, 1.0 / s6, -1.0 / s2, 1.0 / s6, 0.0, -2.0 / s6]);
    perms
        .iter()
        .map(|p| {
            let mut pm = DMatrix::<f64>::zeros(3, 3);
            for (i, &j) in p.iter().enumerate() {
                pm[(j, i)] = 1.0;
            }
            let r = basis.transpose() * pm * &basis;
            r.map(|x| Complex64::new(x, 0.0))
        })
        .collect()
}

/// The regular representation of the group of order 2 (reducible).
pub fn c2_regular_rep() -> Vec<DMatrix<Complex64>> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    vec![
        DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
        DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::field::Fq;

    fn sl2(p: u64, d: usize) -> Sl2Context {
        Sl2Context::new(FieldExt::new(p, d).unwrap())
    }

    fn random_measure<C: GroupContext>(
        ctx: &C,
        elems: &[C::Elem],
        k: usize,
        rng: &mut impl Rng,
    ) -> GroupMeasure<C::Elem> {
        let _ = ctx;
        let mut w: Vec<(C::Elem, f64)> = (0..k)
            .map(|_| (elems[rng.gen_range(0..elems.len())].clone(), rng.gen::<f64>()))
            .collect();
        let total: f64 = w.iter().map(|p| p.1).sum();
        w.iter_mut().for_each(|p| p.1 /= total);
        GroupMeasure::from_weights(w).unwrap()
    }

    #[test]
    fn sp_context_matches_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ctx = SpContext::new(13).unwrap();
        let g = symplectic_element(&QuadForm::e1(), &Modulus::new(13).unwrap()).unwrap();
        let h = g.dilate(5).unwrap();
        let (pg, ph) = (ctx.pack(&g), ctx.pack(&h));
        assert_eq!(ctx.unpack(&ctx.mul(&pg, &ph)), g.mul(&h));
        assert_eq!(ctx.mul(&ctx.inv(&pg), &pg), ctx.identity());
        let _ = rng.gen::<u8>();
        assert!(SpContext::new(257).is_err());
    }

    #[test]
    fn convolution_basics() {
        let ctx = sl2(5, 1);
        let elems = ctx.elements();
        assert_eq!(elems.len(), 120);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let nu = random_measure(&ctx, &elems, 10, &mut rng);
        let d = GroupMeasure::delta(ctx.identity());
        assert_eq!(convolve(&ctx, &d, &nu).unwrap(), nu);
        for _ in 0..100 {
            let mu = random_measure(&ctx, &elems, 8, &mut rng);
            let mm = convolve(&ctx, &mu, &mu).unwrap();
            assert!(mm.norm() <= mu.norm() + 1e-12);
            assert!((mm.mass() - 1.0).abs() < 1e-12);
        }
        // uniform on a cyclic subgroup is idempotent
        let g: Mat2 = [1, 1, 0, 1];
        let h = closure(&ctx, &[g], 1000).unwrap();
        assert_eq!(h.len(), 5);
        let uh = GroupMeasure::uniform(&h);
        let uu = convolve(&ctx, &uh, &uh).unwrap();
        assert!(uu.dist(&uh) < 1e-12);
    }

    #[test]
    fn symmetrized_powers() {
        let ctx = sl2(7, 1);
        let elems = ctx.elements();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let mu = random_measure(&ctx, &elems, 5, &mut rng);
            let p4 = symmetrized_power(&ctx, &mu, 4).unwrap();
            assert!(is_symmetric(&ctx, &p4, 1e-12));
            let p2 = symmetrized_power(&ctx, &mu, 2).unwrap();
            let mut want: DetSet<Mat2> = DetSet::default();
            for (a, _) in mu.support() {
                for (b, _) in mu.support() {
                    want.insert(ctx.mul(&ctx.inv(a), b));
                }
            }
            assert_eq!(p2.support_len(), want.len());
            // mu^{(4)} = mu^{(3)} * mu
            let p3 = odd_power(&ctx, &mu, 3).unwrap();
            assert!(convolve(&ctx, &p3, &mu).unwrap().dist(&p4) < 1e-12);
            let mut chain = GroupMeasure::delta(ctx.identity());
            for _ in 0..32 {
                chain = convolve(&ctx, &chain, &mu).unwrap();
            }
            assert!((chain.mass() - 1.0).abs() < 1e-12);
        }
        let mu = GroupMeasure::delta(ctx.identity());
        assert!(symmetrized_power(&ctx, &mu, 3).is_err());
    }

    #[test]
    fn mu_q_support_bound() {
        let ctx = SpContext::new(13).unwrap();
        let mu = mu_q(&QuadForm::e1(), &ctx).unwrap();
        assert_eq!(mu.support_len(), 12);
        let p2 = symmetrized_power(&ctx, &mu, 2).unwrap();
        assert!(p2.support_len() <= 144);
        assert!(p2.norm_sq() >= 1.0 / 144.0 - 1e-15);
    }

    #[test]
    fn fit_rule() {
        assert_eq!(fit_alpha_beta(1.0, 3), (1.0, 0));
        let (a, b) = fit_alpha_beta(2.0 / 81.0, 3);
        assert_eq!(b, 3);
        assert!((a - 2.0 / 3.0).abs() < 1e-12);
        // exactly halfway between p^-1 and p^-2 in log scale rounds up
        let (_, b) = fit_alpha_beta(3f64.powf(-1.5), 3);
        assert_eq!(b, 2);
        assert_eq!(fit_alpha_beta(1e-300, 3).1, 36);
    }

    #[test]
    fn certificate_on_uniform() {
        let ctx = sl2(3, 1);
        let elems = ctx.elements();
        let u = GroupMeasure::uniform(&elems);
        let c = uniformity_certificate(&u, &elems).unwrap();
        assert!((c.k - 1.0).abs() < 1e-12);
        assert!(c.linf_dist < 1e-15);
        let h = closure(&ctx, &[[1, 1, 0, 1]], 100).unwrap();
        assert!(uniformity_certificate(&u, &h).is_err());
    }

    #[test]
    fn recover_exact_subgroups_sl2_f5() {
        let ctx = sl2(5, 1);
        let elems = ctx.elements();
        let subs = two_generated_subgroups(&ctx, &elems);
        // orders of subgroups of SL(2,5): 1,2,3,4,5,6,8,10,12,20,24,120
        let orders: BTreeSet<usize> = subs.iter().map(|h| h.len()).collect();
        assert_eq!(
            orders.into_iter().collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5, 6, 8, 10, 12, 20, 24, 120]
        );
        for h in &subs {
            let rec = recover_subgroup(&ctx, &GroupMeasure::uniform(h), 0.01).unwrap();
            assert_eq!(&rec.elements, h);
            assert!(rec.residual < 1e-12);
        }
    }

    #[test]
    fn recover_subfield_sl2() {
        let ctx = sl2(3, 2);
        // SL_2(F_3) sits inside SL_2(F_9) as matrices with base-field entries
        let sub: Vec<Mat2> = ctx
            .elements()
            .into_iter()
            .filter(|m| m.iter().all(|&x| (x as u64) < 3))
            .collect();
        assert_eq!(sub.len(), 24);
        let rec = recover_subgroup(&ctx, &GroupMeasure::uniform(&sub), 0.01).unwrap();
        assert_eq!(rec.elements, sub);
        assert!(rec.residual < 1e-12);
    }

    #[test]
    fn recover_noisy_cyclic() {
        let ctx = sl2(7, 1);
        let elems = ctx.elements();
        let gen = elems
            .iter()
            .find(|g| closure(&ctx, &[**g], 100).map_or(false, |h| h.len() == 8))
            .unwrap();
        let h = closure(&ctx, &[*gen], 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = loop {
            let x = elems[rng.gen_range(0..elems.len())];
            if !h.contains(&x) {
                break x;
            }
        };
        let coset: Vec<Mat2> = h.iter().map(|y| ctx.mul(&x, y)).collect();
        let coset_inv: Vec<Mat2> = coset.iter().map(|y| ctx.inv(y)).collect();
        let mut w: Vec<(Mat2, f64)> = h.iter().map(|e| (*e, 0.95 / 8.0)).collect();
        w.extend(coset.iter().map(|e| (*e, 0.025 / 8.0)));
        w.extend(coset_inv.iter().map(|e| (*e, 0.025 / 8.0)));
        let mu = GroupMeasure::from_weights(w).unwrap();
        let rec = recover_subgroup(&ctx, &mu, 0.1).unwrap();
        assert_eq!(rec.elements, h);
        assert!(rec.residual <= 0.3, "{}", rec.residual);
    }

    #[test]
    fn non_closed_set_rejected() {
        let ctx = sl2(7, 1);
        let elems = ctx.elements();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let minus_one: Fq = 6;
        let mut set: Vec<Mat2> = Vec::new();
        while set.len() < 10 {
            let x = elems[rng.gen_range(0..elems.len())];
            if x == [1, 0, 0, 1] || x == [minus_one, 0, 0, minus_one] || set.contains(&x) {
                continue;
            }
            let xi = ctx.inv(&x);
            if xi == x {
                continue;
            }
            set.push(x);
            set.push(xi);
        }
        let mu = GroupMeasure::uniform(&set);
        // small eps keeps only the identity in A, which is trivially closed
        let trivial = recover_subgroup(&ctx, &mu, 0.01).unwrap();
        assert_eq!(trivial.elements.len(), 1);
        assert!(trivial.residual > 1.0);
        assert!(matches!(recover_subgroup(&ctx, &mu, 0.9), Err(Error::NoSubgroupFound)));
        let asym = GroupMeasure::uniform(&set[..1]);
        assert!(matches!(
            recover_subgroup(&ctx, &asym, 0.01),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn schur_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rand_vec = |rng: &mut ChaCha8Rng, n: usize| {
            DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        };
        let s3 = s3_standard_rep();
        for m in &s3 {
            assert!((m * m.adjoint() - DMatrix::identity(2, 2)).norm() < 1e-12);
        }
        let (v, w) = (rand_vec(&mut rng, 2), rand_vec(&mut rng, 2));
        assert!(schur_average_check(&s3, &v, &w).pass);
        // characters of the cyclic group of order 5
        let chi: Vec<DMatrix<Complex64>> = (0..5)
            .map(|k| DMatrix::from_element(1, 1, crate::weil::e_q(2 * k, 5)))
            .collect();
        let (v, w) = (rand_vec(&mut rng, 1), rand_vec(&mut rng, 1));
        let c = schur_average_check(&chi, &v, &w);
        assert!(c.pass && (c.lhs - v.norm_squared() * w.norm_squared()).abs() < 1e-12);
        let h = Complex64::new(0.5f64.sqrt(), 0.0);
        let v = DVector::from_vec(vec![h, h]);
        assert!(!schur_average_check(&c2_regular_rep(), &v, &v).pass);
    }

    #[test]
    fn monte_carlo_tracks_exact() {
        let ctx = sl2(5, 1);
        let elems = ctx.elements();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mu = random_measure(&ctx, &elems, 3, &mut rng);
        let exact = symmetrized_power(&ctx, &mu, 4).unwrap().norm_sq();
        let (est, se) = collision_norm_sq(&ctx, &mu, 4, 20000, 1).unwrap();
        assert!((est - exact).abs() < 5.0 * se + 1e-3, "{est} {exact} {se}");
    }
}
