//! Sp_8(Z/qZ), the symplectic element of a form, dilations and the DUL
//! factorization.

use crate::error::{Error, Result};
use crate::quadform::QuadForm;
use crate::ring::field::{FieldExt, Fq, Mat2};
use crate::ring::matrix::ModMatrix;
use crate::ring::modular::{inv_mod, Modulus};
use num_bigint::BigUint;

/// An 8x8 matrix over Z/qZ satisfying g^T J g = J.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpElement {
    m: ModMatrix,
}

pub fn j_matrix(q: u64) -> ModMatrix {
    let i = ModMatrix::identity(4, q);
    let z = ModMatrix::zero(4, q);
    ModMatrix::from_blocks(&z, &i, &i.neg(), &z)
}

impl SpElement {
    pub fn new(m: ModMatrix) -> Result<Self> {
        if m.n() != 8 {
            return Err(Error::Dimension(format!("expected 8x8, got {0}x{0}", m.n())));
        }
        let j = j_matrix(m.modulus());
        if m.transpose().mul(&j).mul(&m) != j {
            return Err(Error::NotSymplectic(format!("{m:?}")));
        }
        Ok(SpElement { m })
    }

    /// Skips verification; callers guarantee symplecticity (products and
    /// inverses of certified elements).
    fn trusted(m: ModMatrix) -> Self {
        debug_assert!(m.transpose().mul(&j_matrix(m.modulus())).mul(&m) == j_matrix(m.modulus()));
        SpElement { m }
    }

    pub fn from_blocks(a: &ModMatrix, b: &ModMatrix, c: &ModMatrix, d: &ModMatrix) -> Result<Self> {
        Self::new(ModMatrix::from_blocks(a, b, c, d))
    }

    pub fn identity(q: u64) -> Self {
        SpElement {
            m: ModMatrix::identity(8, q),
        }
    }

    pub fn j(q: u64) -> Self {
        SpElement { m: j_matrix(q) }
    }

    /// s(E) = diag(E, E^{-T}).
    pub fn s(e: &ModMatrix) -> Result<Self> {
        let einv_t = e.inverse()?.transpose();
        let z = ModMatrix::zero(4, e.modulus());
        Self::from_blocks(e, &z, &z, &einv_t)
    }

    /// u(B) = [[I, B], [0, I]] for symmetric B.
    pub fn u(b: &ModMatrix) -> Result<Self> {
        if !b.is_symmetric() {
            return Err(Error::NotSymmetric("u(B)"));
        }
        let i = ModMatrix::identity(4, b.modulus());
        Self::from_blocks(&i, b, &ModMatrix::zero(4, b.modulus()), &i)
    }

    /// l(C) = [[I, 0], [C, I]] for symmetric C.
    pub fn l(c: &ModMatrix) -> Result<Self> {
        if !c.is_symmetric() {
            return Err(Error::NotSymmetric("l(C)"));
        }
        let i = ModMatrix::identity(4, c.modulus());
        Self::from_blocks(&i, &ModMatrix::zero(4, c.modulus()), c, &i)
    }

    pub fn matrix(&self) -> &ModMatrix {
        &self.m
    }

    pub fn modulus(&self) -> u64 {
        self.m.modulus()
    }

    pub fn a(&self) -> ModMatrix {
        self.m.block(0, 0, 4)
    }

    pub fn b(&self) -> ModMatrix {
        self.m.block(0, 4, 4)
    }

    pub fn c(&self) -> ModMatrix {
        self.m.block(4, 0, 4)
    }

    pub fn d(&self) -> ModMatrix {
        self.m.block(4, 4, 4)
    }

    pub fn mul(&self, o: &SpElement) -> SpElement {
        SpElement::trusted(self.m.mul(&o.m))
    }

    /// Inverse via the left-inverse [[D^T, -B^T], [-C^T, A^T]].
    pub fn inverse(&self) -> SpElement {
        let m = ModMatrix::from_blocks(
            &self.d().transpose(),
            &self.b().transpose().neg(),
            &self.c().transpose().neg(),
            &self.a().transpose(),
        );
        SpElement::trusted(m)
    }

    /// g^{(r)} = [[A, r^{-1} B], [r C, D]].
    pub fn dilate(&self, r: u64) -> Result<SpElement> {
        let q = self.modulus();
        let rinv = inv_mod(r, q).ok_or(Error::NotUnit(r % q, q))?;
        Ok(SpElement::trusted(ModMatrix::from_blocks(
            &self.a(),
            &self.b().scale(rinv),
            &self.c().scale(r),
            &self.d(),
        )))
    }

    pub fn reduce_mod(&self, p: u64) -> SpElement {
        SpElement::trusted(self.m.reduce_mod(p))
    }

    pub fn is_identity(&self) -> bool {
        self.m.is_identity()
    }

    /// 64 residues row-major packed into bytes.
    pub fn encode(&self) -> Vec<u8> {
        self.m.encode()
    }

    pub fn decode(bytes: &[u8], q: u64) -> Result<SpElement> {
        SpElement::new(ModMatrix::decode(bytes, 8, q)?)
    }
}

/// g(Q) = [[-2 b^{-T} c, b^{-T}], [4 a b^{-T} c - b, -2 a b^{-T}]].
pub fn symplectic_element(f: &QuadForm, q: &Modulus) -> Result<SpElement> {
    let qv = q.value();
    let (a, b, c) = (f.a_mod(qv), f.b_mod(qv), f.c_mod(qv));
    let bit = b.inverse()?.transpose();
    let top_left = bit.mul(&c).scale_signed(-2);
    let bottom_left = a.mul(&bit).mul(&c).scale(4).sub(&b);
    let bottom_right = a.mul(&bit).scale_signed(-2);
    SpElement::from_blocks(&top_left, &bit, &bottom_left, &bottom_right)
}

/// g = s(A) u(B) l(C).
#[derive(Debug, Clone, PartialEq)]
pub struct DulFactorization {
    pub a: ModMatrix,
    pub b: ModMatrix,
    pub c: ModMatrix,
}

impl DulFactorization {
    pub fn reassemble(&self) -> Result<SpElement> {
        Ok(SpElement::s(&self.a)?
            .mul(&SpElement::u(&self.b)?)
            .mul(&SpElement::l(&self.c)?))
    }
}

/// With g = [[P, Q], [R, S]]: A = S^{-T}, B = S^T Q, C = S^{-1} R.
pub fn dul_factorize(g: &SpElement) -> Result<DulFactorization> {
    let s = g.d();
    let sinv = s.inverse().map_err(|_| Error::NotFactorizable)?;
    let f = DulFactorization {
        a: sinv.transpose(),
        b: s.transpose().mul(&g.b()),
        c: sinv.mul(&g.c()),
    };
    if !f.b.is_symmetric() || !f.c.is_symmetric() {
        return Err(Error::NotSymplectic("DUL blocks not symmetric".into()));
    }
    Ok(f)
}

/// tau = diag(I, B) for the DUL block B of g(Q).
pub fn tau(b: &ModMatrix) -> ModMatrix {
    let q = b.modulus();
    let z = ModMatrix::zero(4, q);
    ModMatrix::from_blocks(&ModMatrix::identity(4, q), &z, &z, b)
}

/// The closed forms B = -2 b^{-1} a b^{-T} and C = -2c + (1/2) b^T a^{-1} b.
pub fn closed_form_bc(f: &QuadForm, q: &Modulus) -> Result<(ModMatrix, ModMatrix)> {
    let qv = q.value();
    let (a, b, c) = (f.a_mod(qv), f.b_mod(qv), f.c_mod(qv));
    let binv = b.inverse()?;
    let big_b = binv.mul(&a).mul(&binv.transpose()).scale_signed(-2);
    let big_c = c
        .scale_signed(-2)
        .add(&b.transpose().mul(&a.inverse()?).mul(&b).scale(q.inv2()));
    Ok((big_b, big_c))
}

/// M_theta(r, s) = [[1,0],[-r theta,1]] [[1,-1/r],[0,1]] [[1,1/s],[0,1]] [[1,0],[s theta,1]].
pub fn m_theta(field: &FieldExt, theta: Fq, r: u64, s: u64) -> Result<Mat2> {
    let p = field.p();
    let minus_one = field.from_base(-1);
    if theta == 0 || theta == minus_one {
        return Err(Error::BadTheta);
    }
    let rinv = inv_mod(r, p).ok_or(Error::NotUnit(r % p, p))?;
    let sinv = inv_mod(s, p).ok_or(Error::NotUnit(s % p, p))?;
    let (r, s) = (r as i64, s as i64);
    let f = field;
    let lower = |x: Fq| -> Mat2 { [1, 0, x, 1] };
    let upper = |x: Fq| -> Mat2 { [1, x, 0, 1] };
    let m1 = lower(f.neg(f.mul(f.from_base(r), theta)));
    let m2 = upper(f.neg(rinv as Fq));
    let m3 = upper(sinv as Fq);
    let m4 = lower(f.mul(f.from_base(s), theta));
    Ok(f.mat_mul(&f.mat_mul(&m1, &m2), &f.mat_mul(&m3, &m4)))
}

/// |Sp_8(F_p)| = p^16 (p^8 - 1)(p^6 - 1)(p^4 - 1)(p^2 - 1).
pub fn sp8_order(p: u64) -> BigUint {
    let pb = BigUint::from(p);
    let one = BigUint::from(1u32);
    let mut acc = pb.pow(16);
    for k in [8u32, 6, 4, 2] {
        acc *= pb.pow(k) - &one;
    }
    acc
}
