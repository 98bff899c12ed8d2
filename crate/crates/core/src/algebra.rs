//! Exact Lie-algebra kernels for so(3), so(4) and se(3).
//!
//! Elements of so(3) are stored as [`Vec3`] through the hat map. Elements of
//! so(4) and se(3) are stored as an [`AlgPair`] of two `Vec3` legs
//! `(rotation, second)`; the tag selects which bracket applies. The 4x4
//! matrix images ([`hat4_so4`], [`hat4_se3`]) exist to cross-check the
//! vector formulas and are never used on the hot path.
//!
//! Nothing in this module uses a tolerance: every operation is a closed-form
//! polynomial in its inputs.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{GStrandError, Result};

/// Real 3-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const E1: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const E2: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const E3: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn splat(v: f64) -> Self {
        Vec3::new(v, v, v)
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self * v.x, self * v.y, self * v.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        s * self
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// 3x3 skew-symmetric matrix, stored by its three independent entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Skew3 {
    // entries (2,1), (0,2), (1,0); the rest follows from skewness
    a21: f64,
    a02: f64,
    a10: f64,
}

impl Skew3 {
    /// Build from a full matrix, reading the lower/upper pattern that `hat3`
    /// writes. Returns `None` if the input is not exactly skew.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Option<Skew3> {
        let skew = (0..3).all(|i| (0..3).all(|j| m[i][j] == -m[j][i]));
        skew.then_some(Skew3 {
            a21: m[2][1],
            a02: m[0][2],
            a10: m[1][0],
        })
    }

    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        [
            [0.0, -self.a10, self.a02],
            [self.a10, 0.0, -self.a21],
            [-self.a02, self.a21, 0.0],
        ]
    }

    pub fn apply(self, v: Vec3) -> Vec3 {
        let m = self.to_matrix();
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

/// Hat map: `hat3(u) v = u × v`.
pub fn hat3(u: Vec3) -> Skew3 {
    Skew3 {
        a21: u.x,
        a02: u.y,
        a10: u.z,
    }
}

pub fn unhat3(m: Skew3) -> Vec3 {
    Vec3::new(m.a21, m.a02, m.a10)
}

/// so(3) bracket in vector form.
#[inline]
pub fn ad_so3(a: Vec3, b: Vec3) -> Vec3 {
    a.cross(b)
}

/// Which pair algebra an [`AlgPair`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgTag {
    So4,
    Se3,
}

impl fmt::Display for AlgTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgTag::So4 => f.write_str("so4"),
            AlgTag::Se3 => f.write_str("se3"),
        }
    }
}

/// Element of so(4) or se(3) as two 3-vectors.
///
/// For so(4) the legs are the `Ĵ` and `K̂` coefficients. For se(3) the first
/// leg is the rotation and the second the translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgPair {
    pub first: Vec3,
    pub second: Vec3,
    pub tag: AlgTag,
}

impl AlgPair {
    #[inline]
    pub const fn new(first: Vec3, second: Vec3, tag: AlgTag) -> Self {
        AlgPair { first, second, tag }
    }

    #[inline]
    pub const fn so4(first: Vec3, second: Vec3) -> Self {
        AlgPair::new(first, second, AlgTag::So4)
    }

    #[inline]
    pub const fn se3(first: Vec3, second: Vec3) -> Self {
        AlgPair::new(first, second, AlgTag::Se3)
    }

    pub const fn zero(tag: AlgTag) -> Self {
        AlgPair::new(Vec3::ZERO, Vec3::ZERO, tag)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        AlgPair::new(s * self.first, s * self.second, self.tag)
    }

    /// Euclidean norm over all six components.
    #[inline]
    pub fn norm(self) -> f64 {
        (self.first.norm_sq() + self.second.norm_sq()).sqrt()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.first.is_finite() && self.second.is_finite()
    }

    fn expect_tag(self, tag: AlgTag) -> Result<Self> {
        if self.tag == tag {
            Ok(self)
        } else {
            Err(GStrandError::TagMismatch {
                expected: tag,
                found: self.tag,
            })
        }
    }
}

impl Add for AlgPair {
    type Output = AlgPair;
    /// Panics on tag mismatch; mixing algebras is a programming error.
    fn add(self, o: AlgPair) -> AlgPair {
        assert_eq!(self.tag, o.tag, "adding {} to {}", o.tag, self.tag);
        AlgPair::new(self.first + o.first, self.second + o.second, self.tag)
    }
}

impl Sub for AlgPair {
    type Output = AlgPair;
    fn sub(self, o: AlgPair) -> AlgPair {
        assert_eq!(self.tag, o.tag, "subtracting {} from {}", o.tag, self.tag);
        AlgPair::new(self.first - o.first, self.second - o.second, self.tag)
    }
}

impl Neg for AlgPair {
    type Output = AlgPair;
    fn neg(self) -> AlgPair {
        AlgPair::new(-self.first, -self.second, self.tag)
    }
}

/// so(4) bracket as an intertwined vector product:
/// `ad_(Ω,Γ)(ω,γ) = (Ω×ω + Γ×γ, Ω×γ + Γ×ω)`.
pub fn ad_so4(p: AlgPair, q: AlgPair) -> Result<AlgPair> {
    let p = p.expect_tag(AlgTag::So4)?;
    let q = q.expect_tag(AlgTag::So4)?;
    Ok(so4_bracket(p.first, p.second, q.first, q.second))
}

#[inline]
pub(crate) fn so4_bracket(o: Vec3, g: Vec3, w: Vec3, c: Vec3) -> AlgPair {
    AlgPair::so4(o.cross(w) + g.cross(c), o.cross(c) + g.cross(w))
}

/// se(3) bracket: `ad_(W,V)(Ω,Γ) = (W×Ω, W×Γ − Ω×V)`.
pub fn ad_se3(p: AlgPair, q: AlgPair) -> Result<AlgPair> {
    let p = p.expect_tag(AlgTag::Se3)?;
    let q = q.expect_tag(AlgTag::Se3)?;
    Ok(se3_bracket(p.first, p.second, q.first, q.second))
}

#[inline]
pub(crate) fn se3_bracket(w: Vec3, v: Vec3, o: Vec3, g: Vec3) -> AlgPair {
    AlgPair::se3(w.cross(o), w.cross(g) - o.cross(v))
}

/// Bracket dispatched on the (shared) tag.
pub fn ad_pair(p: AlgPair, q: AlgPair) -> Result<AlgPair> {
    match p.tag {
        AlgTag::So4 => ad_so4(p, q),
        AlgTag::Se3 => ad_se3(p, q),
    }
}

/// Coadjoint action on se(3) under the cross pairing, which coincides with
/// `-ad`. `m` holds the momentum already mapped into algebra coordinates.
pub fn adstar_se3(p: AlgPair, m: AlgPair) -> Result<AlgPair> {
    ad_se3(p, m).map(|r| -r)
}

/// Cross pairing `⟨⟨(Π, M), (Ω, Γ)⟩⟩ = Π·Γ + M·Ω`.
pub fn cross_pair_se3(m: AlgPair, x: AlgPair) -> f64 {
    m.first.dot(x.second) + m.second.dot(x.first)
}

/// Dot-product pairing on so(4): `Ω·ω + Γ·γ`.
pub fn pair_so4(p: AlgPair, q: AlgPair) -> f64 {
    p.first.dot(q.first) + p.second.dot(q.second)
}

/// Dense 4x4 real matrix used as the matrix image of pair elements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const ZERO: Mat4 = Mat4([[0.0; 4]; 4]);

    pub fn identity() -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Mat4(m)
    }

    pub fn mul(&self, o: &Mat4) -> Mat4 {
        let mut r = [[0.0; 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat4(r)
    }

    pub fn add(&self, o: &Mat4) -> Mat4 {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Mat4) -> Mat4 {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Mat4 {
        let mut r = self.0;
        r.iter_mut().flatten().for_each(|x| *x *= s);
        Mat4(r)
    }

    pub fn commutator(&self, o: &Mat4) -> Mat4 {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn transpose(&self) -> Mat4 {
        let mut r = [[0.0; 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[j][i];
            }
        }
        Mat4(r)
    }

    /// Upper-left 3x3 block.
    pub fn rotation(&self) -> [[f64; 3]; 3] {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            row.copy_from_slice(&self.0[i][..3]);
        }
        r
    }

    /// First three entries of the last column.
    pub fn translation(&self) -> Vec3 {
        Vec3::new(self.0[0][3], self.0[1][3], self.0[2][3])
    }

    fn zip(&self, o: &Mat4, f: impl Fn(f64, f64) -> f64) -> Mat4 {
        let mut r = [[0.0; 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = f(self.0[i][j], o.0[i][j]);
            }
        }
        Mat4(r)
    }
}

fn embed_hat(m: &mut [[f64; 4]; 4], u: Vec3) {
    let h = hat3(u).to_matrix();
    for i in 0..3 {
        m[i][..3].copy_from_slice(&h[i]);
    }
}

/// `Ω·Ĵ + Γ·K̂` as a skew 4x4 matrix.
pub fn hat4_so4(p: AlgPair) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    embed_hat(&mut m, p.first);
    for i in 0..3 {
        m[i][3] = p.second[i];
        m[3][i] = -p.second[i];
    }
    Mat4(m)
}

/// se(3) image with zero bottom row.
pub fn hat4_se3(p: AlgPair) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    embed_hat(&mut m, p.first);
    for i in 0..3 {
        m[i][3] = p.second[i];
    }
    Mat4(m)
}

/// Matrix image by tag.
pub fn hat4(p: AlgPair) -> Mat4 {
    match p.tag {
        AlgTag::So4 => hat4_so4(p),
        AlgTag::Se3 => hat4_se3(p),
    }
}

/// Element of any of the three algebras. Used where code is generic over
/// the group, e.g. the Lax fields and constraint hierarchy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LieElem {
    So3(Vec3),
    Pair(AlgPair),
}

impl LieElem {
    pub fn zero_like(&self) -> LieElem {
        match self {
            LieElem::So3(_) => LieElem::So3(Vec3::ZERO),
            LieElem::Pair(p) => LieElem::Pair(AlgPair::zero(p.tag)),
        }
    }

    /// Bracket `[self, o]`. Panics if the two elements live in different
    /// algebras; callers construct both sides from one group.
    pub fn bracket(&self, o: &LieElem) -> LieElem {
        match (self, o) {
            (LieElem::So3(a), LieElem::So3(b)) => LieElem::So3(ad_so3(*a, *b)),
            (LieElem::Pair(p), LieElem::Pair(q)) => {
                LieElem::Pair(ad_pair(*p, *q).expect("bracket of mismatched pair tags"))
            }
            _ => panic!("bracket between so(3) and pair elements"),
        }
    }

    pub fn add(&self, o: &LieElem) -> LieElem {
        match (self, o) {
            (LieElem::So3(a), LieElem::So3(b)) => LieElem::So3(*a + *b),
            (LieElem::Pair(p), LieElem::Pair(q)) => LieElem::Pair(*p + *q),
            _ => panic!("adding so(3) and pair elements"),
        }
    }

    pub fn sub(&self, o: &LieElem) -> LieElem {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> LieElem {
        match self {
            LieElem::So3(a) => LieElem::So3(s * *a),
            LieElem::Pair(p) => LieElem::Pair(p.scale(s)),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            LieElem::So3(a) => a.norm(),
            LieElem::Pair(p) => p.norm(),
        }
    }

    /// Flat components: 3 for so(3), 6 for pairs.
    pub fn components(&self) -> Vec<f64> {
        match self {
            LieElem::So3(a) => a.to_array().to_vec(),
            LieElem::Pair(p) => {
                let mut v = p.first.to_array().to_vec();
                v.extend_from_slice(&p.second.to_array());
                v
            }
        }
    }
}
