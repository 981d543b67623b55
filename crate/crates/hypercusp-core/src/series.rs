//! Kernels, slash transforms and truncated Eisenstein / Poincaré series.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::clifford::{blade_sign, grade, mul_para_mv, HalfSpacePoint, Multivector, Paravector};
use crate::diffops::FieldFn;
use crate::lattice_sum::{EwaldParams, LatticeSum, LatticeSumError};
use crate::vahlen::{enumerate_coset_orbits, enumerate_cosets, Coset, Enumeration, Lattice, VahlenError, VahlenMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesError {
    Guard(&'static str),
    Vahlen(VahlenError),
    LatticeSum(LatticeSumError),
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::Guard(s) => write!(f, "series guard violated: {s}"),
            SeriesError::Vahlen(e) => write!(f, "{e}"),
            SeriesError::LatticeSum(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SeriesError {}

impl From<VahlenError> for SeriesError {
    fn from(e: VahlenError) -> Self {
        SeriesError::Vahlen(e)
    }
}

impl From<LatticeSumError> for SeriesError {
    fn from(e: LatticeSumError) -> Self {
        SeriesError::LatticeSum(e)
    }
}

/// G_k(x) = conj(x)/‖x‖^{n+1−k}.
pub fn kernel_gk(x: &Paravector, k: i32) -> Result<Multivector, VahlenError> {
    let r2 = x.norm_sqr();
    if r2 == 0.0 {
        return Err(VahlenError::Pole);
    }
    let n = x.dim() as f64;
    Ok(x.conj().scale(libm::pow(r2, -(n + 1.0 - k as f64) / 2.0)).to_mv())
}

/// G_k as a field.
pub fn gk(n: usize, k: i32) -> FieldFn {
    FieldFn::new(n, f64::INFINITY, move |x| kernel_gk(x, k))
}

/// x ↦ conj(cx+d)/‖cx+d‖^{n+1−k}·f(M<x>).
pub fn slash_transform(f: &FieldFn, m: &VahlenMatrix, k: i32) -> FieldFn {
    let f = f.clone();
    let m = m.clone();
    FieldFn::new(f.dim(), f64::INFINITY, move |x| {
        let y = m.mobius_apply(x)?;
        Ok(&m.automorphy_factor(x, k)? * &f.eval(&y)?)
    })
}

/// f/x_n^k.
pub fn scale_map(f: &FieldFn, k: i32) -> FieldFn {
    if k == 0 {
        return f.clone();
    }
    f.weighted(move |x| libm::pow(x.xn(), -(k as f64)))
}

/// f·x_n^k, inverse of `scale_map`.
pub fn scale_map_inverse(f: &FieldFn, k: i32) -> FieldFn {
    if k == 0 {
        return f.clone();
    }
    f.weighted(move |x| libm::pow(x.xn(), k as f64))
}

/// x_n^{−(1−n+k)/2}·f.
pub fn maass_lift(f: &FieldFn, k: i32) -> FieldFn {
    let e = -(1.0 - f.dim() as f64 + k as f64) / 2.0;
    if e == 0.0 {
        return f.clone();
    }
    f.weighted(move |x| libm::pow(x.xn(), e))
}

/// Eigenvalue (n² − (k+1)²)/4 of the lifted equation.
pub fn maass_eigenvalue(n: usize, k: i32) -> f64 {
    let n = n as f64;
    let k1 = k as f64 + 1.0;
    (n * n - k1 * k1) / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Eisenstein,
    /// E_j: x_n^j·Σ conj(cx+d)[e_n]/‖cx+d‖^{n+1+j}; `k` holds j.
    EisensteinPositive,
    /// k = 0 via the Hecke factor (x_n/‖cx+d‖²)^s.
    EisensteinHecke,
    Poincare,
    /// x_n^k·Σ over the group with exponents n+1+k.
    PoincarePositive,
}

/// Order of summation over the coset space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Summation {
    /// Cosets with ‖c‖² + ‖d‖² ≤ R².
    Ball,
    /// Right translates c(x+λ)+d summed exactly by lattice sums; cosets cut at ‖c‖ ≤ R.
    Periodized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSpec {
    pub n: usize,
    pub k: i32,
    pub p: usize,
    pub level: i64,
    pub radius: f64,
    pub kind: SeriesKind,
    pub hecke_s: Option<f64>,
    pub w: Option<HalfSpacePoint>,
    /// Right factor e_n on the positive Eisenstein series.
    pub en_factor: bool,
    pub summation: Summation,
    pub ewald: EwaldParams,
}

impl SeriesSpec {
    pub fn eisenstein(n: usize, k: i32, p: usize, level: i64, radius: f64) -> Self {
        Self {
            n,
            k,
            p,
            level,
            radius,
            kind: SeriesKind::Eisenstein,
            hecke_s: None,
            w: None,
            en_factor: false,
            summation: Summation::Ball,
            ewald: EwaldParams::ACCURATE,
        }
    }

    pub fn poincare(n: usize, k: i32, level: i64, radius: f64, w: HalfSpacePoint) -> Self {
        Self { kind: SeriesKind::Poincare, w: Some(w), ..Self::eisenstein(n, k, n - 1, level, radius) }
    }

    pub fn with_kind(mut self, kind: SeriesKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_summation(mut self, s: Summation) -> Self {
        self.summation = s;
        self
    }

    pub fn with_ewald(mut self, e: EwaldParams) -> Self {
        self.ewald = e;
        self
    }

    pub fn with_hecke_s(mut self, s: f64) -> Self {
        self.hecke_s = Some(s);
        self
    }

    /// Convergence and shape guards.
    pub fn validate(&self) -> Result<(), SeriesError> {
        let g = |ok: bool, msg| if ok { Ok(()) } else { Err(SeriesError::Guard(msg)) };
        g(self.n >= 1 && self.n <= crate::clifford::MAX_DIM, "n out of range")?;
        g(self.k % 2 == 0, "k must be even")?;
        g(self.p < self.n, "p must be at most n-1")?;
        g(self.level >= 3, "level must be at least 3")?;
        g(self.radius > 0.0 && self.radius.is_finite(), "radius must be positive")?;
        let n = self.n as i32;
        let p = self.p as i32;
        match self.kind {
            SeriesKind::Eisenstein => g(self.k < n - p - 1, "eisenstein requires k < n-p-1"),
            SeriesKind::EisensteinPositive => g(self.k > 1, "positive eisenstein requires j > 1"),
            SeriesKind::EisensteinHecke => {
                g(self.k == 0, "hecke series has k = 0")?;
                g(self.p + 1 == self.n, "hecke series requires p = n-1")?;
                let s = self.hecke_s.ok_or(SeriesError::Guard("hecke series needs s"))?;
                g(s > 0.0 && s <= 0.5, "hecke s must lie in (0, 0.5]")
            }
            SeriesKind::Poincare | SeriesKind::PoincarePositive => {
                if self.kind == SeriesKind::Poincare {
                    g(self.k < -1, "poincare requires k < -1")?;
                } else {
                    g(self.k > 1, "positive poincare requires k > 1")?;
                }
                g(self.p + 1 == self.n, "poincare series run over p = n-1")?;
                let w = self.w.ok_or(SeriesError::Guard("poincare series needs w"))?;
                g(w.point().dim() == self.n, "w has the wrong dimension")
            }
        }
    }

    /// Exponent e in f(x) = conj(cx+d)/‖cx+d‖^e·f(M<x>).
    pub fn slash_weight(&self) -> i32 {
        match self.kind {
            SeriesKind::EisensteinHecke => 0,
            _ => self.k,
        }
    }

    /// Summand exponent e and height power a: term = x_n^a·conj(·)/‖·‖^e.
    pub(crate) fn exponents(&self) -> (f64, f64) {
        let n1 = self.n as f64 + 1.0;
        let k = self.k as f64;
        match self.kind {
            SeriesKind::Eisenstein | SeriesKind::Poincare => (n1 - k, 0.0),
            SeriesKind::EisensteinPositive | SeriesKind::PoincarePositive => (n1 + k, k),
            SeriesKind::EisensteinHecke => {
                let s = self.hecke_s.unwrap_or(0.0);
                (n1 + 2.0 * s, s)
            }
        }
    }

    /// Decay exponent α of ‖term‖ ~ ‖cx+d‖^{−α} for the tail estimate.
    fn decay(&self) -> f64 {
        self.exponents().0 - 1.0
    }
}

/// Orbit data for periodized summation: the summand x ↦ Φ(x + r)·cfac.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub c: Multivector,
    pub r: Paravector,
    /// conj(c)/‖c‖^e.
    pub cfac: Multivector,
}

#[derive(Clone)]
enum Terms {
    Ball(Arc<Vec<Coset>>),
    Periodized { orbits: Arc<Vec<Orbit>>, phi: Arc<LatticeSum> },
    Poincare { cosets: Arc<Vec<Coset>>, phi: Arc<LatticeSum> },
}

/// A finite truncation of one of the series.
#[derive(Clone)]
pub struct TruncatedForm {
    pub spec: SeriesSpec,
    terms: Terms,
    evaluator: FieldFn,
    /// Estimated remainder per unit of summand size; infinite when the
    /// remainder series does not converge absolutely.
    pub tail_bound: f64,
}

impl fmt::Debug for TruncatedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedForm")
            .field("spec", &self.spec)
            .field("terms", &self.term_count())
            .field("tail_bound", &self.tail_bound)
            .finish()
    }
}

impl TruncatedForm {
    pub fn eval(&self, x: &Paravector) -> Result<Multivector, VahlenError> {
        self.evaluator.eval(x)
    }

    pub fn evaluator(&self) -> &FieldFn {
        &self.evaluator
    }

    pub fn term_count(&self) -> usize {
        match &self.terms {
            Terms::Ball(c) => c.len(),
            Terms::Periodized { orbits, .. } => orbits.len(),
            Terms::Poincare { cosets, .. } => cosets.len(),
        }
    }

    /// Cosets of a ball or Poincaré truncation.
    pub fn cosets(&self) -> &[Coset] {
        match &self.terms {
            Terms::Ball(c) | Terms::Poincare { cosets: c, .. } => c,
            Terms::Periodized { .. } => &[],
        }
    }

    /// Orbits of a periodized truncation (identity excluded).
    pub fn orbits(&self) -> &[Orbit] {
        match &self.terms {
            Terms::Periodized { orbits, .. } => orbits,
            _ => &[],
        }
    }

    pub fn is_periodized(&self) -> bool {
        matches!(self.terms, Terms::Periodized { .. })
    }

    /// Lattice sum Φ used by periodized and Poincaré truncations.
    pub fn lattice_sum(&self) -> Option<&LatticeSum> {
        match &self.terms {
            Terms::Periodized { phi, .. } | Terms::Poincare { phi, .. } => Some(phi),
            Terms::Ball(_) => None,
        }
    }

    /// Relative quasi-invariance defect ‖f(x) − j(M,x)f(M<x>)‖/‖f(x)‖.
    pub fn invariance_defect(&self, m: &VahlenMatrix, x: &Paravector) -> Result<f64, VahlenError> {
        invariance_defect(&self.evaluator, m, self.spec.slash_weight(), x)
    }
}

pub fn invariance_defect(f: &FieldFn, m: &VahlenMatrix, k: i32, x: &Paravector) -> Result<f64, VahlenError> {
    let fx = f.eval(x)?;
    let y = m.mobius_apply(x)?;
    let g = &m.automorphy_factor(x, k)? * &f.eval(&y)?;
    Ok((&fx - &g).norm() / fx.norm().max(f64::MIN_POSITIVE))
}

/// conj sign of each blade in Cl_n.
fn conj_signs(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|m| {
            let r = grade(m);
            if (r * (r + 1) / 2).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// Σ x_n^a conj(cx+d)/‖cx+d‖^e over the cosets.
fn ball_sum(cosets: &[Coset], signs: &[f64], x: &Paravector, e: f64, a: f64, p: usize) -> Multivector {
    let n = x.dim();
    let len = 1usize << n;
    let lp = 1usize << p;
    let xa = if a == 0.0 { 1.0 } else { libm::pow(x.xn(), a) };
    crate::par::sum_mv(n, cosets.len(), |i, acc| {
        let key = &cosets[i].key;
        let mut den = [0.0f64; 1 << crate::clifford::MAX_DIM];
        for b in 0..lp {
            let cb = key.c.coeffs()[b];
            den[b] += key.d.coeffs()[b];
            if cb == 0.0 {
                continue;
            }
            for j in 0..=n {
                let xj = x.get(j);
                if xj == 0.0 {
                    continue;
                }
                let m = Paravector::mask(j);
                den[b ^ m] += cb * xj * blade_sign(b, m);
            }
        }
        let r2: f64 = den[..len].iter().map(|v| v * v).sum();
        let w = xa * libm::pow(r2, -e / 2.0);
        let out = acc.coeffs_mut();
        for b in 0..len {
            out[b] += signs[b] * den[b] * w;
        }
    })
}

fn ball_tail(count: usize, radius: f64, beta: f64, alpha: f64) -> f64 {
    if alpha <= beta {
        return f64::INFINITY;
    }
    let amp = count as f64 / libm::pow(radius, beta);
    amp * beta * libm::pow(radius, beta - alpha) / (alpha - beta)
}

/// Builds the truncation described by `spec`.
pub fn build(spec: &SeriesSpec) -> Result<TruncatedForm, SeriesError> {
    spec.validate()?;
    match spec.kind {
        SeriesKind::Poincare | SeriesKind::PoincarePositive => build_poincare(spec),
        _ => match spec.summation {
            Summation::Ball => build_ball(spec),
            Summation::Periodized => build_periodized(spec),
        },
    }
}

fn right_en(n: usize, v: Multivector, on: bool) -> Multivector {
    if on {
        &v * &Multivector::e(n, n)
    } else {
        v
    }
}

fn build_ball(spec: &SeriesSpec) -> Result<TruncatedForm, SeriesError> {
    let (n, p) = (spec.n, spec.p);
    let cosets = Arc::new(enumerate_cosets(n, p, spec.level, spec.radius, Enumeration::Arithmetic)?);
    let (e, a) = spec.exponents();
    let signs = Arc::new(conj_signs(n));
    let en = spec.en_factor && spec.kind == SeriesKind::EisensteinPositive;
    let cs = cosets.clone();
    let evaluator = FieldFn::new(n, f64::INFINITY, move |x| {
        if x.xn() <= 0.0 {
            return Err(VahlenError::Clifford(crate::clifford::CliffordError::NotInHalfSpace));
        }
        Ok(right_en(n, ball_sum(&cs, &signs, x, e, a, p), en))
    });
    let tail_bound = ball_tail(cosets.len(), spec.radius, 2.0 * (p as f64 + 1.0), spec.decay());
    Ok(TruncatedForm { spec: spec.clone(), terms: Terms::Ball(cosets), evaluator, tail_bound })
}

fn build_periodized(spec: &SeriesSpec) -> Result<TruncatedForm, SeriesError> {
    let (n, p) = (spec.n, spec.p);
    let (e, a) = spec.exponents();
    let reps = enumerate_coset_orbits(n, p, spec.level, spec.radius)?;
    let mut orbits = Vec::with_capacity(reps.len());
    for cs in reps.iter().filter(|c| !c.key.c.is_zero()) {
        let ci = crate::vahlen::clifford_group_inverse(&cs.key.c)?;
        let r = Paravector::from_mv(&(&ci * &cs.key.d));
        let c2 = cs.key.c.norm_sqr();
        let cfac = cs.key.c.conjugation().scale_real(libm::pow(c2, -e / 2.0));
        orbits.push(Orbit { c: cs.key.c.clone(), r, cfac });
    }
    let lattice = Lattice::for_level(n, p, spec.level as f64)?;
    let phi = Arc::new(LatticeSum::new(lattice, e, spec.ewald)?);
    let orbits = Arc::new(orbits);
    let en = spec.en_factor && spec.kind == SeriesKind::EisensteinPositive;
    let (os, ph) = (orbits.clone(), phi.clone());
    let evaluator = FieldFn::new(n, f64::INFINITY, move |x| {
        if x.xn() <= 0.0 {
            return Err(VahlenError::Clifford(crate::clifford::CliffordError::NotInHalfSpace));
        }
        let mut s = crate::par::sum_mv(n, os.len(), |i, acc| {
            let o = &os[i];
            *acc += &mul_para_mv(&ph.eval(&x.add(&o.r)), &o.cfac);
        });
        s += &Multivector::one(n);
        if a != 0.0 {
            s = s.scale_real(libm::pow(x.xn(), a));
        }
        Ok(right_en(n, s, en))
    });
    // orbits with ‖c‖ ≤ r grow like r^γ, γ fitted on the enumerated set
    let count = |r: f64| orbits.iter().filter(|o| o.c.norm() <= r + 1e-9).count() as f64;
    let (full, half) = (count(spec.radius), count(spec.radius / 2.0));
    let gamma = if half > 0.0 { libm::log2(full / half) } else { 2.0 * (p as f64 + 1.0) };
    let tail_bound = ball_tail(orbits.len().max(1), spec.radius, gamma, e);
    Ok(TruncatedForm { spec: spec.clone(), terms: Terms::Periodized { orbits, phi }, evaluator, tail_bound })
}

fn build_poincare(spec: &SeriesSpec) -> Result<TruncatedForm, SeriesError> {
    let (n, p) = (spec.n, spec.p);
    let (e, a) = spec.exponents();
    let w = *spec.w.as_ref().expect("validated").point();
    let cosets = Arc::new(enumerate_cosets(n, p, spec.level, spec.radius, Enumeration::Arithmetic)?);
    let lattice = Lattice::for_level(n, p, spec.level as f64)?;
    let phi = Arc::new(LatticeSum::new(lattice, e, spec.ewald)?);
    let (cs, ph) = (cosets.clone(), phi.clone());
    let ei = (n as f64 + 1.0 - e) as i32;
    let evaluator = FieldFn::new(n, f64::INFINITY, move |x| {
        if x.xn() <= 0.0 {
            return Err(VahlenError::Clifford(crate::clifford::CliffordError::NotInHalfSpace));
        }
        let parts = crate::par::map(cs.len(), |i| -> Result<Multivector, VahlenError> {
            let m = &cs[i].rep;
            let y = m.mobius_apply(x)?.add(&w);
            let j = m.automorphy_factor(x, ei)?;
            Ok(crate::clifford::mul_mv_para(&j, &ph.eval(&y)))
        });
        let parts: Vec<Multivector> = parts.into_iter().collect::<Result<_, _>>()?;
        let mut s = crate::sum::pairwise_mv(n, &parts);
        if a != 0.0 {
            s = s.scale_real(libm::pow(x.xn(), a));
        }
        Ok(s)
    });
    let tail_bound = ball_tail(cosets.len(), spec.radius, 2.0 * (p as f64 + 1.0), spec.decay());
    Ok(TruncatedForm { spec: spec.clone(), terms: Terms::Poincare { cosets, phi }, evaluator, tail_bound })
}

pub fn eisenstein(spec: &SeriesSpec) -> Result<TruncatedForm, SeriesError> {
    if spec.kind != SeriesKind::Eisenstein {
        return Err(SeriesError::Guard("spec kind is not eisenstein"));
    }
    build(spec)
}

pub fn eisenstein_positive(spec: &SeriesSpec) -> Result<TruncatedForm, SeriesError> {
    if spec.kind != SeriesKind::EisensteinPositive {
        return Err(SeriesError::Guard("spec kind is not eisenstein-positive"));
    }
    build(spec)
}

pub fn poincare(spec: &SeriesSpec) -> Result<TruncatedForm, SeriesError> {
    if spec.kind != SeriesKind::Poincare {
        return Err(SeriesError::Guard("spec kind is not poincare"));
    }
    build(spec)
}

pub fn poincare_positive(spec: &SeriesSpec) -> Result<TruncatedForm, SeriesError> {
    if spec.kind != SeriesKind::PoincarePositive {
        return Err(SeriesError::Guard("spec kind is not poincare-positive"));
    }
    build(spec)
}

pub const HECKE_LADDER: [f64; 3] = [0.1, 0.05, 0.025];

/// s → 0⁺ limit of the Hecke series from the ladder s, s/2, s/4.
#[derive(Clone, Debug)]
pub struct HeckeForm {
    pub forms: Vec<TruncatedForm>,
    evaluator: FieldFn,
}

impl HeckeForm {
    pub fn eval(&self, x: &Paravector) -> Result<Multivector, VahlenError> {
        self.evaluator.eval(x)
    }

    pub fn evaluator(&self) -> &FieldFn {
        &self.evaluator
    }

    /// Values at each rung, before extrapolation.
    pub fn ladder(&self, x: &Paravector) -> Result<Vec<Multivector>, VahlenError> {
        self.forms.iter().map(|f| f.eval(x)).collect()
    }
}

/// Two-level Richardson extrapolation for a ladder s, s/2, s/4.
pub fn richardson3(v: &[Multivector]) -> Multivector {
    let mut out = v[2].scale_real(8.0);
    out -= &v[1].scale_real(6.0);
    out += &v[0];
    out.scale_real(1.0 / 3.0)
}

pub fn eisenstein_hecke(spec: &SeriesSpec, ladder: [f64; 3]) -> Result<HeckeForm, SeriesError> {
    if spec.kind != SeriesKind::EisensteinHecke {
        return Err(SeriesError::Guard("spec kind is not eisenstein-hecke"));
    }
    if !(ladder[1] == ladder[0] / 2.0 && ladder[2] == ladder[1] / 2.0) {
        return Err(SeriesError::Guard("hecke ladder must halve"));
    }
    let forms: Vec<TruncatedForm> =
        ladder.iter().map(|&s| build(&spec.clone().with_hecke_s(s))).collect::<Result<_, _>>()?;
    let fs = forms.clone();
    let evaluator = FieldFn::new(spec.n, f64::INFINITY, move |x| {
        let v: Vec<Multivector> = fs.iter().map(|f| f.eval(x)).collect::<Result<_, _>>()?;
        Ok(richardson3(&v))
    });
    Ok(HeckeForm { forms, evaluator })
}

/// Evaluations of x_n^{−k}·j(R, x)·f(R<x>) at x = x_n e_n (factor x_n^{−k}
/// dropped for k > 0).
#[derive(Clone, Debug)]
pub struct CuspReport {
    pub ladder: Vec<f64>,
    /// values[r][i]: representative r, ladder point i.
    pub values: Vec<Vec<f64>>,
    pub tol: f64,
    pub pass: bool,
}

/// Cusp values along the ladder for each representative; passes if every
/// sequence decreases and ends below `tol`.
pub fn cusp_test(
    f: &FieldFn,
    k: i32,
    representatives: &[VahlenMatrix],
    ladder: &[f64],
    tol: f64,
) -> Result<CuspReport, SeriesError> {
    if ladder.windows(2).any(|w| w[1] <= w[0]) || ladder.is_empty() {
        return Err(SeriesError::Guard("ladder must increase"));
    }
    let n = f.dim();
    let mut values = Vec::with_capacity(representatives.len());
    let mut pass = true;
    for r in representatives {
        let mut row = Vec::with_capacity(ladder.len());
        for &h in ladder {
            let x = Paravector::unit(n, n).scale(h);
            let y = r.mobius_apply(&x)?;
            let v = &r.automorphy_factor(&x, k)? * &f.eval(&y)?;
            let pre = if k < 0 { libm::pow(h, -(k as f64)) } else { 1.0 };
            row.push(pre * v.norm());
        }
        let ok = row.windows(2).all(|w| w[1] <= w[0]) && *row.last().unwrap() < tol;
        pass &= ok;
        values.push(row);
    }
    Ok(CuspReport { ladder: ladder.to_vec(), values, tol, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{hypermonogenic_defect, kholo_defect, StencilSpec};

    fn pt(c: &[f64]) -> Paravector {
        Paravector::new(c)
    }

    #[test]
    fn kernel_examples() {
        let en = Paravector::unit(3, 3);
        for k in [-4, 0, 2] {
            assert!(kernel_gk(&en, k).unwrap().max_abs_diff(&-Multivector::e(3, 3)) < 1e-15);
        }
        let v = kernel_gk(&Paravector::scalar(3, 2.0), 0).unwrap();
        assert!((v.scalar_part() - 0.125).abs() < 1e-15);
        let x = pt(&[0.3, 0.2, -0.5, 0.9]);
        assert!(kernel_gk(&x, 4).unwrap().max_abs_diff(&x.conj().to_mv()) < 1e-15);
        assert!(kernel_gk(&Paravector::zero(3), 0).is_err());
    }

    #[test]
    fn slash_identity_and_cocycle() {
        let f = gk(3, 2);
        let x = pt(&[0.3, 0.2, -0.5, 0.9]);
        let id = slash_transform(&f, &VahlenMatrix::identity(3), 2);
        assert!(id.eval(&x).unwrap().max_abs_diff(&f.eval(&x).unwrap()) < 1e-15);
        let m1 = VahlenMatrix::translation(&pt(&[0.0, 1.0, 0.0, 0.0])).mul(&VahlenMatrix::j(3));
        let m2 = VahlenMatrix::j(3).mul(&VahlenMatrix::translation(&pt(&[1.0, 0.0, 1.0, 0.0])));
        for k in [-2, 0, 2] {
            let a = slash_transform(&slash_transform(&f, &m2, k), &m1, k).eval(&x).unwrap();
            // right action: the inner matrix comes first
            let b = slash_transform(&f, &m2.mul(&m1), k).eval(&x).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12 * (1.0 + a.norm()), "k={k}");
            let wrong = slash_transform(&f, &m1.mul(&m2), k).eval(&x).unwrap();
            assert!(a.max_abs_diff(&wrong) > 1e-3);
        }
    }

    #[test]
    fn slash_of_gk_by_j_stays_in_kernel() {
        let g = slash_transform(&gk(3, 2), &VahlenMatrix::j(3), 2);
        let x = pt(&[0.4, -0.3, 0.6, 1.2]);
        let d = kholo_defect(&g, &x, 2, &StencilSpec::new(0.04, 4).unwrap()).unwrap();
        assert!(d.passes(1e-6), "{d:?}");
    }

    #[test]
    fn scale_map_round_trip() {
        let f = gk(3, 2);
        let g = scale_map_inverse(&scale_map(&f, 2), 2);
        let x = pt(&[0.3, 0.2, -0.5, 0.9]);
        assert!(g.eval(&x).unwrap().max_abs_diff(&f.eval(&x).unwrap()) < 1e-14);
        assert!(scale_map(&f, 0).eval(&x).unwrap() == f.eval(&x).unwrap());
    }

    #[test]
    fn maass_lift_trivial_at_k_n_minus_1() {
        let f = gk(3, 2);
        let x = pt(&[0.3, 0.2, -0.5, 0.9]);
        assert_eq!(maass_lift(&f, 2).eval(&x).unwrap(), f.eval(&x).unwrap());
        assert!((maass_eigenvalue(3, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn guards() {
        let s = SeriesSpec::eisenstein(3, 0, 2, 3, 5.0);
        assert!(s.validate().is_err());
        assert!(SeriesSpec::eisenstein(3, -2, 2, 3, 5.0).validate().is_ok());
        assert!(SeriesSpec::eisenstein(3, -2, 2, 2, 5.0).validate().is_err());
        assert!(SeriesSpec::eisenstein(3, -3, 2, 3, 5.0).validate().is_err());
        let w = HalfSpacePoint::at_height(3, 1.0).unwrap();
        assert!(SeriesSpec::poincare(3, -2, 3, 5.0, w).validate().is_ok());
        assert!(SeriesSpec::poincare(3, 0, 3, 5.0, w).validate().is_err());
        let h = SeriesSpec::eisenstein(3, 0, 2, 3, 5.0).with_kind(SeriesKind::EisensteinHecke);
        assert!(h.validate().is_err());
        assert!(h.clone().with_hecke_s(0.1).validate().is_ok());
        assert!(h.with_hecke_s(0.6).validate().is_err());
    }

    #[test]
    fn ball_eisenstein_identity_dominates_high_up() {
        let f = eisenstein(&SeriesSpec::eisenstein(3, -2, 2, 3, 5.0)).unwrap();
        let v = f.eval(&Paravector::unit(3, 3).scale(10.0)).unwrap();
        assert!(v.max_abs_diff(&Multivector::one(3)) < 1e-3, "{v:?}");
    }

    #[test]
    fn ball_and_periodized_agree_on_identity_orbit_structure() {
        // periodized form is Λ[N]-periodic
        let s = SeriesSpec::eisenstein(3, -4, 2, 3, 4.0).with_summation(Summation::Periodized);
        let f = eisenstein(&s).unwrap();
        let x = pt(&[0.2, 0.4, -0.3, 0.8]);
        let y = x.add(&pt(&[3.0, 0.0, -3.0, 0.0]));
        let (a, b) = (f.eval(&x).unwrap(), f.eval(&y).unwrap());
        assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn eisenstein_is_hypermonogenic() {
        let f = eisenstein(&SeriesSpec::eisenstein(3, -2, 2, 3, 5.0)).unwrap();
        let x = pt(&[0.3, -0.2, 0.4, 0.9]);
        let d = hypermonogenic_defect(f.evaluator(), &x, -2, &StencilSpec::new(0.02, 4).unwrap()).unwrap();
        assert!(d.defect < 1e-6, "{d:?}");
    }

    #[test]
    fn richardson_kills_linear_and_quadratic_terms() {
        let v: Vec<Multivector> = HECKE_LADDER
            .iter()
            .map(|&s| Multivector::scalar(2, 1.5 + 0.7 * s - 2.0 * s * s))
            .collect();
        assert!((richardson3(&v).scalar_part() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn zero_function_is_cuspidal() {
        let z = FieldFn::total(3, |_| Multivector::zero(3));
        let r = cusp_test(&z, -2, &[VahlenMatrix::identity(3)], &[2.0, 4.0, 8.0], 1e-3).unwrap();
        assert!(r.pass);
    }
}
