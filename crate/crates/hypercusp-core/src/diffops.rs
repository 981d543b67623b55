//! Finite-difference Dirac, Laplace, Weinstein and Laplace–Beltrami operators
//! on Clifford-valued functions over H⁺, and kernel-membership reports.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::clifford::{blade_sign, Multivector, Paravector};
use crate::scalar::Scalar;
use crate::tolerances::{DEFECT_NOISE_FLOOR, MIN_ORDER};
use crate::vahlen::VahlenError;

#[derive(Debug, Clone, PartialEq)]
pub enum DiffError {
    /// A stencil point left the declared domain of the function.
    Margin { needed: f64, available: f64 },
    /// Stencil reached x_n ≤ 0.
    LeftHalfSpace,
    Eval(VahlenError),
    BadSpec(&'static str),
    /// Negative k is reached through the scaling map.
    NegativeK(i32),
}

impl fmt::Display for DiffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffError::Margin { needed, available } => {
                write!(f, "stencil reach {needed} exceeds function margin {available}")
            }
            DiffError::LeftHalfSpace => write!(f, "stencil leaves the upper half-space"),
            DiffError::Eval(e) => write!(f, "evaluation failed: {e}"),
            DiffError::BadSpec(s) => write!(f, "invalid stencil: {s}"),
            DiffError::NegativeK(k) => {
                write!(f, "k = {k} < 0: apply the scaling map and test at -k+2")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DiffError {}

impl From<VahlenError> for DiffError {
    fn from(e: VahlenError) -> Self {
        DiffError::Eval(e)
    }
}

type Eval<S> = dyn Fn(&Paravector) -> Result<Multivector<S>, VahlenError> + Send + Sync;

/// Clifford-valued function on (a subset of) H⁺.
#[derive(Clone)]
pub struct FieldFn<S: Scalar = f64> {
    dim: usize,
    margin: f64,
    f: Arc<Eval<S>>,
}

impl<S: Scalar> fmt::Debug for FieldFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldFn(Cl_{}, margin {})", self.dim, self.margin)
    }
}

impl<S: Scalar> FieldFn<S> {
    /// `margin`: largest stencil reach around an evaluation point over which
    /// f is smooth.
    pub fn new<F>(dim: usize, margin: f64, f: F) -> Self
    where
        F: Fn(&Paravector) -> Result<Multivector<S>, VahlenError> + Send + Sync + 'static,
    {
        Self { dim, margin, f: Arc::new(f) }
    }

    /// Total function; margin is relative to x_n.
    pub fn total<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&Paravector) -> Multivector<S> + Send + Sync + 'static,
    {
        Self::new(dim, f64::INFINITY, move |x| Ok(f(x)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    #[inline]
    pub fn eval(&self, x: &Paravector) -> Result<Multivector<S>, VahlenError> {
        (self.f)(x)
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    /// Pointwise x ↦ g(x)·f(x) for a real weight g.
    pub fn weighted<G>(&self, g: G) -> Self
    where
        G: Fn(&Paravector) -> f64 + Send + Sync + 'static,
    {
        let f = self.clone();
        Self::new(self.dim, self.margin, move |x| Ok(f.eval(x)?.scale_real(g(x))))
    }

    /// x ↦ f(x)·c.
    pub fn right_mul(&self, c: Multivector<S>) -> Self {
        let f = self.clone();
        Self::new(self.dim, self.margin, move |x| Ok(&f.eval(x)? * &c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (f, g) = (self.clone(), other.clone());
        Self::new(self.dim, self.margin.min(other.margin), move |x| Ok(&f.eval(x)? + &g.eval(x)?))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (f, g) = (self.clone(), other.clone());
        Self::new(self.dim, self.margin.min(other.margin), move |x| Ok(&f.eval(x)? - &g.eval(x)?))
    }
}

impl FieldFn<f64> {
    pub fn to_complex(&self) -> FieldFn<crate::scalar::Complex64> {
        let f = self.clone();
        FieldFn::new(self.dim, self.margin, move |x| Ok(f.eval(x)?.to_complex()))
    }
}

/// Step h, accuracy order (2 or 4).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilSpec {
    pub h: f64,
    pub order: u8,
}

impl StencilSpec {
    pub fn new(h: f64, order: u8) -> Result<Self, DiffError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(DiffError::BadSpec("step must be positive"));
        }
        if order != 2 && order != 4 {
            return Err(DiffError::BadSpec("order must be 2 or 4"));
        }
        Ok(Self { h, order })
    }

    /// h = 1e-2·x_n, order 4.
    pub fn default_at(x: &Paravector) -> Self {
        Self { h: 1e-2 * x.xn(), order: 4 }
    }

    /// Order-4 step for operators containing ∆^j at unit scale. Nested
    /// stencils amplify rounding by h^{−2j−1}, so the step grows with j.
    pub fn for_laplacian_power(j: u32) -> Self {
        let h = match j {
            0 => 0.01,
            1 => 0.02,
            2 => 0.1,
            _ => 0.15,
        };
        Self { h, order: 4 }
    }

    pub fn halved(&self) -> Self {
        Self { h: self.h / 2.0, order: self.order }
    }
}

type Offset = Vec<i8>;

/// Weighted integer offsets in the n+1 coordinates; values divided by h^scale.
#[derive(Clone, Debug, Default)]
struct Stencil {
    w: BTreeMap<Offset, f64>,
    scale: i32,
}

fn d1(order: u8) -> &'static [(i8, f64)] {
    if order == 2 {
        &[(-1, -0.5), (1, 0.5)]
    } else {
        &[(-2, 1.0 / 12.0), (-1, -2.0 / 3.0), (1, 2.0 / 3.0), (2, -1.0 / 12.0)]
    }
}

fn d2(order: u8) -> &'static [(i8, f64)] {
    if order == 2 {
        &[(-1, 1.0), (0, -2.0), (1, 1.0)]
    } else {
        &[(-2, -1.0 / 12.0), (-1, 4.0 / 3.0), (0, -2.5), (1, 4.0 / 3.0), (2, -1.0 / 12.0)]
    }
}

impl Stencil {
    fn identity(dims: usize) -> Self {
        let mut w = BTreeMap::new();
        w.insert(vec![0i8; dims], 1.0);
        Self { w, scale: 0 }
    }

    fn axis(dims: usize, axis: usize, taps: &[(i8, f64)], scale: i32) -> Self {
        let mut w = BTreeMap::new();
        for &(o, c) in taps {
            let mut off = vec![0i8; dims];
            off[axis] = o;
            w.insert(off, c);
        }
        Self { w, scale }
    }

    fn laplacian(dims: usize, order: u8) -> Self {
        let mut s = Stencil { w: BTreeMap::new(), scale: 2 };
        for a in 0..dims {
            for (k, v) in Self::axis(dims, a, d2(order), 2).w {
                *s.w.entry(k).or_insert(0.0) += v;
            }
        }
        s
    }

    fn compose(&self, o: &Stencil) -> Stencil {
        let mut w: BTreeMap<Offset, f64> = BTreeMap::new();
        for (a, &wa) in &self.w {
            for (b, &wb) in &o.w {
                let off: Offset = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *w.entry(off).or_insert(0.0) += wa * wb;
            }
        }
        w.retain(|_, v| *v != 0.0);
        Stencil { w, scale: self.scale + o.scale }
    }

    fn reach(&self) -> i32 {
        self.w.keys().map(|k| k.iter().map(|x| (*x as i32).abs()).max().unwrap_or(0)).max().unwrap_or(0)
    }

    fn lowest_last(&self) -> i32 {
        self.w.keys().map(|k| *k.last().unwrap() as i32).min().unwrap_or(0)
    }
}

fn laplacian_power(dims: usize, order: u8, j: u32) -> Stencil {
    let lap = Stencil::laplacian(dims, order);
    let mut s = Stencil::identity(dims);
    for _ in 0..j {
        s = s.compose(&lap);
    }
    s
}

/// Evaluates f on the union of offsets once.
struct Samples<S: Scalar> {
    vals: BTreeMap<Offset, Multivector<S>>,
}

impl<S: Scalar> Samples<S> {
    fn collect(f: &FieldFn<S>, x: &Paravector, h: f64, stencils: &[&Stencil]) -> Result<Self, DiffError> {
        let reach = stencils.iter().map(|s| s.reach()).max().unwrap_or(0) as f64 * h;
        let low = stencils.iter().map(|s| s.lowest_last()).min().unwrap_or(0) as f64 * h;
        if x.xn() + low <= 0.0 {
            return Err(DiffError::LeftHalfSpace);
        }
        if reach > f.margin() {
            return Err(DiffError::Margin { needed: reach, available: f.margin() });
        }
        let mut vals = BTreeMap::new();
        for s in stencils {
            for off in s.w.keys() {
                if vals.contains_key(off) {
                    continue;
                }
                let mut y = *x;
                for (i, &o) in off.iter().enumerate() {
                    y.set(i, x.get(i) + o as f64 * h);
                }
                vals.insert(off.clone(), f.eval(&y)?);
            }
        }
        Ok(Self { vals })
    }

    fn apply(&self, s: &Stencil, h: f64) -> Multivector<S> {
        self.apply_noisy(s, h).0
    }

    /// Result with a rounding estimate ε·Σ|w|·‖f‖/h^scale.
    fn apply_noisy(&self, s: &Stencil, h: f64) -> (Multivector<S>, f64) {
        let dim = self.vals.values().next().map(|m| m.dim()).unwrap_or(1);
        let mut out = Multivector::zero(dim);
        let mut mag = 0.0;
        // accumulate in offset order for reproducibility
        for (off, &w) in &s.w {
            let v = &self.vals[off];
            mag += w.abs() * v.norm();
            for (o, &c) in out.coeffs_mut().iter_mut().zip(v.coeffs()) {
                *o += c * w;
            }
        }
        let inv = libm::pow(h, -s.scale as f64);
        (out.scale_real(inv), f64::EPSILON * mag * inv)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn e_mul<S: Scalar>(i: usize, v: &Multivector<S>, side: Side) -> Multivector<S> {
    let dim = v.dim();
    if i == 0 {
        return v.clone();
    }
    let a = 1usize << (i - 1);
    let mut out = Multivector::zero(dim);
    for (b, &c) in v.coeffs().iter().enumerate() {
        match side {
            Side::Left => out[a ^ b] += c * blade_sign(a, b),
            Side::Right => out[a ^ b] += c * blade_sign(b, a),
        }
    }
    out
}

/// All partial derivatives ∂_i ∆^j f, i = 0..n, with summed rounding estimate.
fn grad_lap_noisy<S: Scalar>(
    f: &FieldFn<S>,
    x: &Paravector,
    j: u32,
    spec: &StencilSpec,
) -> Result<(Vec<Multivector<S>>, f64), DiffError> {
    let dims = x.dim() + 1;
    let lapj = laplacian_power(dims, spec.order, j);
    let parts: Vec<Stencil> =
        (0..dims).map(|i| lapj.compose(&Stencil::axis(dims, i, d1(spec.order), 1))).collect();
    let refs: Vec<&Stencil> = parts.iter().collect();
    let s = Samples::collect(f, x, spec.h, &refs)?;
    let mut noise = 0.0;
    let g = parts
        .iter()
        .map(|p| {
            let (v, e) = s.apply_noisy(p, spec.h);
            noise += e;
            v
        })
        .collect();
    Ok((g, noise))
}

fn grad_lap<S: Scalar>(f: &FieldFn<S>, x: &Paravector, j: u32, spec: &StencilSpec) -> Result<Vec<Multivector<S>>, DiffError> {
    Ok(grad_lap_noisy(f, x, j, spec)?.0)
}

fn dirac_lap_noisy<S: Scalar>(
    f: &FieldFn<S>,
    x: &Paravector,
    j: u32,
    spec: &StencilSpec,
    side: Side,
) -> Result<(Multivector<S>, f64), DiffError> {
    let (g, noise) = grad_lap_noisy(f, x, j, spec)?;
    let mut out = Multivector::zero(f.dim());
    for (i, gi) in g.iter().enumerate() {
        out += &e_mul(i, gi, side);
    }
    Ok((out, noise))
}

/// D∆^j f = Σ e_i ∂_i ∆^j f (left) or Σ ∂_i ∆^j f e_i (right).
pub fn dirac_lap<S: Scalar>(f: &FieldFn<S>, x: &Paravector, j: u32, spec: &StencilSpec, side: Side) -> Result<Multivector<S>, DiffError> {
    Ok(dirac_lap_noisy(f, x, j, spec, side)?.0)
}

/// Df = Σ_{i=0}^n e_i ∂_i f with e_0 = 1.
pub fn dirac<S: Scalar>(f: &FieldFn<S>, x: &Paravector, spec: &StencilSpec) -> Result<Multivector<S>, DiffError> {
    dirac_lap(f, x, 0, spec, Side::Left)
}

pub fn dirac_right<S: Scalar>(f: &FieldFn<S>, x: &Paravector, spec: &StencilSpec) -> Result<Multivector<S>, DiffError> {
    dirac_lap(f, x, 0, spec, Side::Right)
}

/// D̄f = Σ conj(e_i) ∂_i f.
pub fn dirac_conj<S: Scalar>(f: &FieldFn<S>, x: &Paravector, spec: &StencilSpec) -> Result<Multivector<S>, DiffError> {
    let g = grad_lap(f, x, 0, spec)?;
    let mut out = g[0].clone();
    for (i, gi) in g.iter().enumerate().skip(1) {
        out -= &e_mul(i, gi, Side::Left);
    }
    Ok(out)
}

/// ∂_i f for every coordinate.
pub fn gradient<S: Scalar>(f: &FieldFn<S>, x: &Paravector, spec: &StencilSpec) -> Result<Vec<Multivector<S>>, DiffError> {
    grad_lap(f, x, 0, spec)
}

/// ∆^j f.
pub fn laplacian_iter<S: Scalar>(f: &FieldFn<S>, x: &Paravector, j: u32, spec: &StencilSpec) -> Result<Multivector<S>, DiffError> {
    let dims = x.dim() + 1;
    let st = laplacian_power(dims, spec.order, j);
    let s = Samples::collect(f, x, spec.h, &[&st])?;
    Ok(s.apply(&st, spec.h))
}

/// ‖∆^j f‖ with step-halving estimate.
pub fn laplacian_defect<S: Scalar>(f: &FieldFn<S>, x: &Paravector, j: u32, spec: &StencilSpec) -> Result<Defect, DiffError> {
    let dims = x.dim() + 1;
    let st = laplacian_power(dims, spec.order, j);
    halving(spec, |sp| {
        let s = Samples::collect(f, x, sp.h, &[&st])?;
        Ok(s.apply_noisy(&st, sp.h))
    })
}

/// ‖D∆^{k/2} f(x)‖ at one step size.
pub fn kholo_raw<S: Scalar>(f: &FieldFn<S>, x: &Paravector, k: i32, spec: &StencilSpec) -> Result<f64, DiffError> {
    if k < 0 {
        return Err(DiffError::NegativeK(k));
    }
    if k % 2 != 0 {
        return Err(DiffError::BadSpec("k must be even"));
    }
    Ok(dirac_lap(f, x, (k / 2) as u32, spec, Side::Left)?.norm())
}

/// A defect at step h/2 with its step-halving diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Defect {
    /// Operator norm at h/2.
    pub defect: f64,
    /// Operator norm at h.
    pub coarse: f64,
    /// |coarse − defect| / (2^order − 1).
    pub est_error: f64,
    /// log₂(coarse/defect); infinite when both sit below the noise floor.
    pub order: f64,
    /// Rounding estimate of the fine evaluation.
    pub noise: f64,
}

impl Defect {
    fn from_pair(coarse: f64, fine: f64, order: u8, noise: f64) -> Self {
        let est_error = (coarse - fine).abs() / (libm::pow(2.0, order as f64) - 1.0);
        let floor = DEFECT_NOISE_FLOOR.max(ROUNDING_MARGIN * noise);
        let ord = if coarse < floor && fine < floor { f64::INFINITY } else { libm::log2(coarse / fine) };
        Self { defect: fine, coarse, est_error, order: ord, noise }
    }

    /// Below max(1e-10, 10 × rounding estimate).
    pub fn at_noise_floor(&self) -> bool {
        self.defect < DEFECT_NOISE_FLOOR.max(ROUNDING_MARGIN * self.noise)
    }

    /// Below `tol` and converging at the stencil order (or at the noise floor).
    pub fn passes(&self, tol: f64) -> bool {
        self.defect < tol && (self.order >= MIN_ORDER || self.at_noise_floor())
    }
}

const ROUNDING_MARGIN: f64 = 10.0;

fn halving<S: Scalar>(
    spec: &StencilSpec,
    op: impl Fn(&StencilSpec) -> Result<(Multivector<S>, f64), DiffError>,
) -> Result<Defect, DiffError> {
    let coarse = op(spec)?.0.norm();
    let (fine, noise) = op(&spec.halved())?;
    Ok(Defect::from_pair(coarse, fine.norm(), spec.order, noise))
}

/// ‖D∆^{k/2} f‖ with step-halving estimate; k ≥ 0 even.
pub fn kholo_defect<S: Scalar>(f: &FieldFn<S>, x: &Paravector, k: i32, spec: &StencilSpec) -> Result<Defect, DiffError> {
    if k < 0 {
        return Err(DiffError::NegativeK(k));
    }
    if k % 2 != 0 {
        return Err(DiffError::BadSpec("k must be even"));
    }
    halving(spec, |s| dirac_lap_noisy(f, x, (k / 2) as u32, s, Side::Left))
}

/// Df + k·(Qf)'/x_n with f = Pf + Qf·e_n and ' the main involution.
pub fn hypermonogenic_operator<S: Scalar>(f: &FieldFn<S>, x: &Paravector, k: i32, spec: &StencilSpec) -> Result<Multivector<S>, DiffError> {
    Ok(hypermonogenic_noisy(f, x, k, spec)?.0)
}

fn hypermonogenic_noisy<S: Scalar>(
    f: &FieldFn<S>,
    x: &Paravector,
    k: i32,
    spec: &StencilSpec,
) -> Result<(Multivector<S>, f64), DiffError> {
    let (mut df, mut noise) = dirac_lap_noisy(f, x, 0, spec, Side::Left)?;
    if k != 0 {
        let (_, q) = f.eval(x)?.pq_split();
        let t = q.main_involution().scale_real(k as f64 / x.xn());
        noise += f64::EPSILON * t.norm();
        df += &t;
    }
    Ok((df, noise))
}

pub fn hypermonogenic_defect<S: Scalar>(f: &FieldFn<S>, x: &Paravector, k: i32, spec: &StencilSpec) -> Result<Defect, DiffError> {
    halving(spec, |s| hypermonogenic_noisy(f, x, k, s))
}

/// Right-hand side of the Q-part Weinstein equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeinsteinVariant {
    Homogeneous,
    /// (∆ − (k/x_n)∂_n)u + (k/x_n²)u.
    InhomogeneousSquare,
    /// (∆ − (k/x_n)∂_n)u + (k/x_n)u.
    InhomogeneousLinear,
}

pub fn weinstein_operator<S: Scalar>(
    u: &FieldFn<S>,
    x: &Paravector,
    k: i32,
    spec: &StencilSpec,
    variant: WeinsteinVariant,
) -> Result<Multivector<S>, DiffError> {
    Ok(weinstein_noisy(u, x, k, spec, variant)?.0)
}

fn weinstein_noisy<S: Scalar>(
    u: &FieldFn<S>,
    x: &Paravector,
    k: i32,
    spec: &StencilSpec,
    variant: WeinsteinVariant,
) -> Result<(Multivector<S>, f64), DiffError> {
    let n = x.dim();
    let dims = n + 1;
    let lap = Stencil::laplacian(dims, spec.order);
    let dn = Stencil::axis(dims, n, d1(spec.order), 1);
    let s = Samples::collect(u, x, spec.h, &[&lap, &dn])?;
    let xn = x.xn();
    let kf = k as f64;
    let (mut out, e1) = s.apply_noisy(&lap, spec.h);
    let (d, e2) = s.apply_noisy(&dn, spec.h);
    out -= &d.scale_real(kf / xn);
    let u0 = &s.vals[&vec![0i8; dims]];
    let c = match variant {
        WeinsteinVariant::Homogeneous => 0.0,
        WeinsteinVariant::InhomogeneousSquare => kf / (xn * xn),
        WeinsteinVariant::InhomogeneousLinear => kf / xn,
    };
    let t = u0.scale_real(c);
    let e3 = f64::EPSILON * t.norm();
    out += &t;
    Ok((out, e1 + e2 * (kf / xn).abs() + e3))
}

pub fn weinstein_defect<S: Scalar>(
    u: &FieldFn<S>,
    x: &Paravector,
    k: i32,
    spec: &StencilSpec,
    variant: WeinsteinVariant,
) -> Result<Defect, DiffError> {
    halving(spec, |s| weinstein_noisy(u, x, k, s, variant))
}

/// Weinstein pair for g: homogeneous on Pg, inhomogeneous on Qg.
pub fn weinstein_pair_defect<S: Scalar>(
    g: &FieldFn<S>,
    x: &Paravector,
    k: i32,
    spec: &StencilSpec,
    variant: WeinsteinVariant,
) -> Result<(Defect, Defect), DiffError> {
    let gp = g.clone();
    let p = FieldFn::new(g.dim(), g.margin(), move |y| Ok(gp.eval(y)?.pq_split().0));
    let gq = g.clone();
    let q = FieldFn::new(g.dim(), g.margin(), move |y| Ok(gq.eval(y)?.pq_split().1));
    Ok((
        weinstein_defect(&p, x, k, spec, WeinsteinVariant::Homogeneous)?,
        weinstein_defect(&q, x, k, spec, variant)?,
    ))
}

/// ∆g − ((n−1)/x_n)∂_n g + λg/x_n².
pub fn lb_operator<S: Scalar>(g: &FieldFn<S>, x: &Paravector, lambda: f64, spec: &StencilSpec) -> Result<Multivector<S>, DiffError> {
    Ok(lb_noisy(g, x, lambda, spec)?.0)
}

fn lb_noisy<S: Scalar>(
    g: &FieldFn<S>,
    x: &Paravector,
    lambda: f64,
    spec: &StencilSpec,
) -> Result<(Multivector<S>, f64), DiffError> {
    let n = x.dim();
    let dims = n + 1;
    let lap = Stencil::laplacian(dims, spec.order);
    let dn = Stencil::axis(dims, n, d1(spec.order), 1);
    let s = Samples::collect(g, x, spec.h, &[&lap, &dn])?;
    let xn = x.xn();
    let (mut out, e1) = s.apply_noisy(&lap, spec.h);
    let (d, e2) = s.apply_noisy(&dn, spec.h);
    let c = (n as f64 - 1.0) / xn;
    out -= &d.scale_real(c);
    let t = s.vals[&vec![0i8; dims]].scale_real(lambda / (xn * xn));
    let e3 = f64::EPSILON * t.norm();
    out += &t;
    Ok((out, e1 + e2 * c.abs() + e3))
}

pub fn lb_defect<S: Scalar>(g: &FieldFn<S>, x: &Paravector, lambda: f64, spec: &StencilSpec) -> Result<Defect, DiffError> {
    halving(spec, |s| lb_noisy(g, x, lambda, s))
}

/// Aggregate of `kholo_defect` over a sample set.
#[derive(Clone, Debug)]
pub struct KernelReport {
    pub k: i32,
    pub tol: f64,
    pub points: Vec<Paravector>,
    pub defects: Vec<Defect>,
    pub max_defect: f64,
    /// Smallest observed order over points above the noise floor.
    pub min_order: f64,
    pub pass: bool,
}

pub fn kernel_membership<S: Scalar>(
    f: &FieldFn<S>,
    k: i32,
    points: &[Paravector],
    spec: &StencilSpec,
    tol: f64,
) -> Result<KernelReport, DiffError> {
    let defects: Vec<Defect> = crate::par::map(points.len(), |i| kholo_defect(f, &points[i], k, spec))
        .into_iter()
        .collect::<Result<_, _>>()?;
    Ok(report(k, tol, points, defects))
}

/// Builds a report from precomputed defects.
pub fn report(k: i32, tol: f64, points: &[Paravector], defects: Vec<Defect>) -> KernelReport {
    let max_defect = defects.iter().map(|d| d.defect).fold(0.0, f64::max);
    let min_order = defects
        .iter()
        .filter(|d| d.defect >= DEFECT_NOISE_FLOOR)
        .map(|d| d.order)
        .fold(f64::INFINITY, f64::min);
    let pass = defects.iter().all(|d| d.passes(tol));
    KernelReport { k, tol, points: points.to_vec(), defects, max_defect, min_order, pass }
}

/// Deterministic sample points with ‖x‖ ∈ [r0, r1] and x_n ∈ [h0, h1].
pub fn sample_points(n: usize, count: usize, r: (f64, f64), h: (f64, f64), seed: u64) -> Vec<Paravector> {
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut unif = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut x = Paravector::zero(n);
        for i in 0..n {
            x.set(i, 2.0 * r.1 * unif() - r.1);
        }
        x.set(n, h.0 + (h.1 - h.0) * unif());
        let nr = x.norm();
        if nr >= r.0 && nr <= r.1 {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> StencilSpec {
        StencilSpec::new(1e-2, 4).unwrap()
    }

    #[test]
    fn dirac_of_identity() {
        for n in 1..=4 {
            let f = FieldFn::total(n, |x: &Paravector| x.to_mv::<f64>());
            let x = Paravector::new(&vec![0.4; n + 1]);
            let d = dirac(&f, &x, &spec()).unwrap();
            assert!((d[0] - (1.0 - n as f64)).abs() < 1e-10);
            assert!(d.coeffs()[1..].iter().all(|c| c.abs() < 1e-10));
        }
    }

    #[test]
    fn laplacian_of_xn_squared() {
        let f = FieldFn::total(3, |x: &Paravector| Multivector::scalar(3, x.xn() * x.xn()));
        let x = Paravector::new(&[0.1, 0.2, 0.3, 1.0]);
        let l = laplacian_iter(&f, &x, 1, &spec()).unwrap();
        assert!((l[0] - 2.0).abs() < 1e-9);
        assert_eq!(laplacian_iter(&f, &x, 0, &spec()).unwrap(), f.eval(&x).unwrap());
    }

    #[test]
    fn harmonic_fundamental_solution() {
        let f = FieldFn::total(3, |x: &Paravector| Multivector::scalar(3, 1.0 / x.norm_sqr()));
        let x = Paravector::new(&[0.5, -0.3, 0.2, 1.1]);
        let l = laplacian_iter(&f, &x, 1, &spec()).unwrap();
        assert!(l.norm() < 1e-6, "{l:?}");
    }

    #[test]
    fn negative_k_refused() {
        let f = FieldFn::total(3, |_x: &Paravector| Multivector::<f64>::one(3));
        let x = Paravector::new(&[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(kholo_defect(&f, &x, -2, &spec()), Err(DiffError::NegativeK(-2)));
    }

    #[test]
    fn stencil_leaving_half_space_is_an_error() {
        let f = FieldFn::total(3, |_x: &Paravector| Multivector::<f64>::one(3));
        let x = Paravector::new(&[0.0, 0.0, 0.0, 0.01]);
        let s = StencilSpec::new(0.01, 4).unwrap();
        assert_eq!(dirac(&f, &x, &s), Err(DiffError::LeftHalfSpace));
    }
}
