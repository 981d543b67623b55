//! Dense multivectors in Cl_n with e_i² = −1.
//!
//! Blades are bitmasks: bit `i-1` set means e_i is a factor, factors kept in
//! increasing index order.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::scalar::{Complex64, Scalar};

pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordError {
    DimensionMismatch { left: usize, right: usize },
    BadDimension(usize),
    ZeroDivisor,
    NotInHalfSpace,
    NonFinite,
}

impl fmt::Display for CliffordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliffordError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: Cl_{left} vs Cl_{right}")
            }
            CliffordError::BadDimension(n) => write!(f, "dimension {n} outside 1..={MAX_DIM}"),
            CliffordError::ZeroDivisor => write!(f, "element is not invertible"),
            CliffordError::NotInHalfSpace => write!(f, "last coordinate must be positive"),
            CliffordError::NonFinite => write!(f, "non-finite coefficient"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CliffordError {}

#[inline]
pub fn grade(mask: usize) -> u32 {
    mask.count_ones()
}

/// Sign of e_A e_B = ± e_{A xor B}.
#[inline]
pub fn blade_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    swaps += (a & b).count_ones();
    if swaps & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn reversion_sign(mask: usize) -> f64 {
    let r = grade(mask);
    if (r * r.saturating_sub(1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn conjugation_sign(mask: usize) -> f64 {
    let r = grade(mask);
    if (r * (r + 1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn main_sign(mask: usize) -> f64 {
    if grade(mask).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, PartialEq)]
pub struct Multivector<S: Scalar = f64> {
    dim: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Multivector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cl{}[", self.dim)?;
        let mut first = true;
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.abs_sqr() != 0.0 {
                if !first {
                    write!(f, ", ")?;
                }
                first = false;
                write!(f, "{m}:{c:?}")?;
            }
        }
        write!(f, "]")
    }
}

impl<S: Scalar> Multivector<S> {
    pub fn try_zero(dim: usize) -> Result<Self, CliffordError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(CliffordError::BadDimension(dim));
        }
        Ok(Self { dim, coeffs: vec![S::zero(); 1 << dim] })
    }

    /// Panics on a dimension outside 1..=8.
    pub fn zero(dim: usize) -> Self {
        Self::try_zero(dim).expect("valid dimension")
    }

    pub fn scalar(dim: usize, s: S) -> Self {
        let mut m = Self::zero(dim);
        m.coeffs[0] = s;
        m
    }

    pub fn one(dim: usize) -> Self {
        Self::scalar(dim, S::one())
    }

    pub fn blade(dim: usize, mask: usize, s: S) -> Self {
        let mut m = Self::zero(dim);
        m.coeffs[mask] = s;
        m
    }

    /// e_i for 1 ≤ i ≤ dim; e_0 is the unit.
    pub fn e(dim: usize, i: usize) -> Self {
        assert!(i <= dim, "generator index out of range");
        if i == 0 {
            Self::one(dim)
        } else {
            Self::blade(dim, 1 << (i - 1), S::one())
        }
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<S>) -> Result<Self, CliffordError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(CliffordError::BadDimension(dim));
        }
        if coeffs.len() != 1 << dim {
            return Err(CliffordError::DimensionMismatch { left: dim, right: coeffs.len() });
        }
        if !coeffs.iter().all(|c| c.is_finite()) {
            return Err(CliffordError::NonFinite);
        }
        Ok(Self { dim, coeffs })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [S] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    #[inline]
    pub fn get(&self, mask: usize) -> S {
        self.coeffs[mask]
    }

    pub fn scalar_part(&self) -> S {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.abs_sqr() == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn map_signs(&self, sign: impl Fn(usize) -> f64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(m, &c)| c * sign(m)).collect();
        Self { dim: self.dim, coeffs }
    }

    /// Anti-automorphism with e_i ↦ e_i.
    pub fn reversion(&self) -> Self {
        self.map_signs(reversion_sign)
    }

    /// Anti-automorphism with e_i ↦ −e_i.
    pub fn conjugation(&self) -> Self {
        self.map_signs(conjugation_sign)
    }

    /// Grade involution e_i ↦ −e_i.
    pub fn main_involution(&self) -> Self {
        self.map_signs(main_sign)
    }

    /// Automorphism negating e_n only.
    pub fn star(&self) -> Self {
        let top = 1usize << (self.dim - 1);
        self.map_signs(|m| if m & top != 0 { -1.0 } else { 1.0 })
    }

    pub fn scale(&self, s: S) -> Self {
        Self { dim: self.dim, coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs_sqr()).sum()
    }

    /// ‖a‖ = (Σ |a_A|²)^{1/2}.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, CliffordError> {
        if self.dim != rhs.dim {
            return Err(CliffordError::DimensionMismatch { left: self.dim, right: rhs.dim });
        }
        let mut out = Self::zero(self.dim);
        mul_acc(&self.coeffs, &rhs.coeffs, &mut out.coeffs);
        Ok(out)
    }

    /// a = P + Q·e_n with P, Q free of e_n.
    pub fn pq_split(&self) -> (Self, Self) {
        let top = 1usize << (self.dim - 1);
        let mut p = Self::zero(self.dim);
        let mut q = Self::zero(self.dim);
        for (m, &c) in self.coeffs.iter().enumerate() {
            if m & top == 0 {
                p.coeffs[m] += c;
            } else {
                // e_B e_n = e_{B ∪ n} since n is the largest index
                q.coeffs[m ^ top] += c;
            }
        }
        (p, q)
    }

    /// Inverse of `pq_split`.
    pub fn from_pq(p: &Self, q: &Self) -> Self {
        let en = Self::e(p.dim, p.dim);
        p + &(q * &en)
    }

    /// True if every blade has grade ≤ 1.
    pub fn is_paravector(&self, tol: f64) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(m, c)| grade(m) <= 1 || c.abs_sqr() <= tol * tol)
    }

    /// Largest coefficient outside grades 0 and 1.
    pub fn non_paravector_residual(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(m, _)| grade(*m) > 1)
            .map(|(_, c)| libm::sqrt(c.abs_sqr()))
            .fold(0.0, f64::max)
    }

    /// Whether the blade e_n appears with nonzero coefficient (beyond `tol`).
    pub fn has_en(&self, tol: f64) -> bool {
        let top = 1usize << (self.dim - 1);
        self.coeffs
            .iter()
            .enumerate()
            .any(|(m, c)| m & top != 0 && c.abs_sqr() > tol * tol)
    }

    /// Embed into a higher-dimensional algebra (blades keep their masks).
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let mut out = Self::zero(dim);
        out.coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| libm::sqrt((a - b).abs_sqr()))
            .fold(0.0, f64::max)
    }

    /// Complex conjugate of every coefficient.
    pub fn cconj(&self) -> Self {
        Self { dim: self.dim, coeffs: self.coeffs.iter().map(|c| c.cconj()).collect() }
    }

    pub fn to_complex(&self) -> Multivector<Complex64> {
        Multivector { dim: self.dim, coeffs: self.coeffs.iter().map(|c| c.to_complex()).collect() }
    }

    pub fn re(&self) -> Multivector<f64> {
        Multivector { dim: self.dim, coeffs: self.coeffs.iter().map(|c| c.re()).collect() }
    }

    pub fn im(&self) -> Multivector<f64> {
        Multivector { dim: self.dim, coeffs: self.coeffs.iter().map(|c| c.im()).collect() }
    }
}

impl Multivector<Complex64> {
    pub fn from_re_im(re: &Multivector<f64>, im: &Multivector<f64>) -> Self {
        assert_eq!(re.dim, im.dim);
        Self {
            dim: re.dim,
            coeffs: re.coeffs.iter().zip(&im.coeffs).map(|(&a, &b)| Complex64::new(a, b)).collect(),
        }
    }
}

/// out += a·b on raw coefficient slices of equal length 2^n.
#[inline]
pub fn mul_acc<S: Scalar>(a: &[S], b: &[S], out: &mut [S]) {
    for (i, &ai) in a.iter().enumerate() {
        if ai.abs_sqr() == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj.abs_sqr() == 0.0 {
                continue;
            }
            out[i ^ j] += ai * bj * blade_sign(i, j);
        }
    }
}

impl<S: Scalar> Index<usize> for Multivector<S> {
    type Output = S;
    fn index(&self, m: usize) -> &S {
        &self.coeffs[m]
    }
}

impl<S: Scalar> IndexMut<usize> for Multivector<S> {
    fn index_mut(&mut self, m: usize) -> &mut S {
        &mut self.coeffs[m]
    }
}

impl<'a, S: Scalar> Mul<&'a Multivector<S>> for &'a Multivector<S> {
    type Output = Multivector<S>;
    fn mul(self, rhs: &'a Multivector<S>) -> Multivector<S> {
        self.try_mul(rhs).expect("dimension mismatch in geometric product")
    }
}

impl<S: Scalar> Mul for Multivector<S> {
    type Output = Multivector<S>;
    fn mul(self, rhs: Multivector<S>) -> Multivector<S> {
        &self * &rhs
    }
}

impl<'a, S: Scalar> Add<&'a Multivector<S>> for &'a Multivector<S> {
    type Output = Multivector<S>;
    fn add(self, rhs: &'a Multivector<S>) -> Multivector<S> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<S: Scalar> Add for Multivector<S> {
    type Output = Multivector<S>;
    fn add(self, rhs: Multivector<S>) -> Multivector<S> {
        &self + &rhs
    }
}

impl<'a, S: Scalar> Sub<&'a Multivector<S>> for &'a Multivector<S> {
    type Output = Multivector<S>;
    fn sub(self, rhs: &'a Multivector<S>) -> Multivector<S> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<S: Scalar> Sub for Multivector<S> {
    type Output = Multivector<S>;
    fn sub(self, rhs: Multivector<S>) -> Multivector<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Neg for &Multivector<S> {
    type Output = Multivector<S>;
    fn neg(self) -> Multivector<S> {
        Multivector { dim: self.dim, coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }
}

impl<S: Scalar> Neg for Multivector<S> {
    type Output = Multivector<S>;
    fn neg(self) -> Multivector<S> {
        -&self
    }
}

impl<S: Scalar> AddAssign<&Multivector<S>> for Multivector<S> {
    fn add_assign(&mut self, rhs: &Multivector<S>) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, &b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl<S: Scalar> SubAssign<&Multivector<S>> for Multivector<S> {
    fn sub_assign(&mut self, rhs: &Multivector<S>) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, &b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

/// x_0 + x_1e_1 + … + x_ne_n.
#[derive(Clone, Copy, PartialEq)]
pub struct Paravector {
    n: usize,
    x: [f64; MAX_DIM + 1],
}

impl fmt::Debug for Paravector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Para{:?}", &self.x[..=self.n])
    }
}

impl Paravector {
    pub fn zero(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension out of range");
        Self { n, x: [0.0; MAX_DIM + 1] }
    }

    /// From coordinates x_0..x_n (length n+1).
    pub fn new(coords: &[f64]) -> Self {
        let mut p = Self::zero(coords.len() - 1);
        p.x[..coords.len()].copy_from_slice(coords);
        p
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        let mut p = Self::zero(n);
        p.x[0] = s;
        p
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.x[i] = 1.0;
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.x[..=self.n]
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.x[..=self.n]
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.x[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        assert!(i <= self.n);
        self.x[i] = v;
    }

    /// Last coordinate x_n.
    #[inline]
    pub fn xn(&self) -> f64 {
        self.x[self.n]
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.x[..=self.n].iter().map(|v| v * v).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    #[inline]
    pub fn conj(&self) -> Self {
        let mut p = *self;
        for v in &mut p.x[1..=self.n] {
            *v = -*v;
        }
        p
    }

    /// x^{-1} = conj(x)/|x|².
    pub fn inverse(&self) -> Result<Self, CliffordError> {
        let r2 = self.norm_sqr();
        if r2 == 0.0 || !r2.is_finite() {
            return Err(CliffordError::ZeroDivisor);
        }
        Ok(self.conj().scale(1.0 / r2))
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Self {
        let mut p = *self;
        for v in &mut p.x[..=self.n] {
            *v *= s;
        }
        p
    }

    #[inline]
    pub fn add(&self, o: &Self) -> Self {
        let mut p = *self;
        for i in 0..=self.n {
            p.x[i] += o.x[i];
        }
        p
    }

    #[inline]
    pub fn sub(&self, o: &Self) -> Self {
        let mut p = *self;
        for i in 0..=self.n {
            p.x[i] -= o.x[i];
        }
        p
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> f64 {
        (0..=self.n).map(|i| self.x[i] * o.x[i]).sum()
    }

    #[inline]
    pub fn mask(i: usize) -> usize {
        if i == 0 {
            0
        } else {
            1 << (i - 1)
        }
    }

    pub fn to_mv<S: Scalar>(&self) -> Multivector<S> {
        let mut m = Multivector::zero(self.n);
        for i in 0..=self.n {
            m.coeffs[Self::mask(i)] = S::from_f64(self.x[i]);
        }
        m
    }

    /// Reads grades 0 and 1; other blades are dropped.
    pub fn from_mv(m: &Multivector<f64>) -> Self {
        let mut p = Self::zero(m.dim);
        for i in 0..=m.dim {
            p.x[i] = m.coeffs[Self::mask(i)];
        }
        p
    }

    pub fn is_finite(&self) -> bool {
        self.x[..=self.n].iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        (0..=self.n).map(|i| (self.x[i] - o.x[i]).abs()).fold(0.0, f64::max)
    }
}

/// Point of H⁺: a paravector with x_n > 0.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct HalfSpacePoint(Paravector);

impl HalfSpacePoint {
    pub fn new(p: Paravector) -> Result<Self, CliffordError> {
        if !p.is_finite() {
            return Err(CliffordError::NonFinite);
        }
        if p.xn() > 0.0 {
            Ok(Self(p))
        } else {
            Err(CliffordError::NotInHalfSpace)
        }
    }

    pub fn from_coords(coords: &[f64]) -> Result<Self, CliffordError> {
        Self::new(Paravector::new(coords))
    }

    /// Height x_n·e_n.
    pub fn at_height(n: usize, h: f64) -> Result<Self, CliffordError> {
        let mut p = Paravector::zero(n);
        p.set(n, h);
        Self::new(p)
    }

    pub fn point(&self) -> &Paravector {
        &self.0
    }

    pub fn xn(&self) -> f64 {
        self.0.xn()
    }
}

impl From<HalfSpacePoint> for Paravector {
    fn from(h: HalfSpacePoint) -> Paravector {
        h.0
    }
}

/// m·x for a paravector x, without materialising x as a multivector.
pub fn mul_mv_para<S: Scalar>(m: &Multivector<S>, x: &Paravector) -> Multivector<S> {
    let mut out = Multivector::zero(m.dim);
    for (a, &c) in m.coeffs.iter().enumerate() {
        if c.abs_sqr() == 0.0 {
            continue;
        }
        for i in 0..=x.n {
            let xi = x.x[i];
            if xi == 0.0 {
                continue;
            }
            let b = Paravector::mask(i);
            out.coeffs[a ^ b] += c * (xi * blade_sign(a, b));
        }
    }
    out
}

/// x·m for a paravector x.
pub fn mul_para_mv<S: Scalar>(x: &Paravector, m: &Multivector<S>) -> Multivector<S> {
    let mut out = Multivector::zero(m.dim);
    for i in 0..=x.n {
        let xi = x.x[i];
        if xi == 0.0 {
            continue;
        }
        let a = Paravector::mask(i);
        for (b, &c) in m.coeffs.iter().enumerate() {
            if c.abs_sqr() == 0.0 {
                continue;
            }
            out.coeffs[a ^ b] += c * (xi * blade_sign(a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Multivector {
        Multivector::e(n, i)
    }

    #[test]
    fn generators_square_to_minus_one() {
        for n in 1..=5 {
            for i in 1..=n {
                assert_eq!(&e(n, i) * &e(n, i), Multivector::scalar(n, -1.0));
            }
        }
    }

    #[test]
    fn bivector_squares_to_minus_one() {
        let e12 = &e(3, 1) * &e(3, 2);
        assert_eq!(&e12 * &e12, Multivector::scalar(3, -1.0));
    }

    #[test]
    fn involution_examples() {
        let e12 = &e(3, 1) * &e(3, 2);
        assert_eq!(e12.reversion(), -&e12);
        assert_eq!(e(3, 1).conjugation(), -&e(3, 1));
        let e1n = &e(3, 1) * &e(3, 3);
        assert_eq!(e1n.star(), -&e1n);
        assert_eq!(e(3, 1).star(), e(3, 1));
    }

    #[test]
    fn pq_examples() {
        let (p, q) = e(3, 3).pq_split();
        assert!(p.is_zero());
        assert_eq!(q, Multivector::one(3));
        let e1n = &e(3, 1) * &e(3, 3);
        let (p, q) = e1n.pq_split();
        assert!(p.is_zero());
        assert_eq!(q, e(3, 1));
        let a = &Multivector::scalar(3, 3.0) + &e(3, 1).scale(2.0);
        let (p, q) = a.pq_split();
        assert_eq!(p, a);
        assert!(q.is_zero());
    }

    #[test]
    fn paravector_inverse_examples() {
        let x = Paravector::new(&[1.0, 0.0, 0.0, 1.0]);
        let inv = x.inverse().unwrap();
        assert_eq!(inv.coords(), &[0.5, 0.0, 0.0, -0.5]);
        let e1 = Paravector::unit(3, 1);
        assert_eq!(e1.inverse().unwrap().coords(), &[0.0, -1.0, 0.0, 0.0]);
        assert!(Paravector::zero(3).inverse().is_err());
    }

    #[test]
    fn norms() {
        let a = &Multivector::one(3) + &(&e(3, 1) * &e(3, 2));
        assert!((a.norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(Multivector::<f64>::zero(3).norm(), 0.0);
        assert_eq!(Paravector::new(&[3.0, 0.0, 0.0, 4.0]).norm(), 5.0);
    }

    #[test]
    fn fast_paravector_products_match() {
        let x = Paravector::new(&[0.3, -1.0, 2.0, 0.5]);
        let mut m = Multivector::zero(3);
        for (i, c) in m.coeffs_mut().iter_mut().enumerate() {
            *c = i as f64 - 2.5;
        }
        assert_eq!(mul_mv_para(&m, &x), &m * &x.to_mv());
        assert_eq!(mul_para_mv(&x, &m), &x.to_mv() * &m);
    }

    #[test]
    fn half_space_rejects_boundary() {
        assert!(HalfSpacePoint::from_coords(&[0.0, 0.0, 0.0]).is_err());
        assert!(HalfSpacePoint::from_coords(&[0.0, 0.0, 1e-9]).is_ok());
    }
}
