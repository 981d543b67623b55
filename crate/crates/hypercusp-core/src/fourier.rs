//! Fourier coefficients of Λ[N]-periodic functions on H⁺ and their
//! Bessel-K and zero-frequency profiles.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::clifford::{Multivector, Paravector};
use crate::diffops::FieldFn;
use crate::linalg::lstsq;
use crate::scalar::{Complex64, Scalar};
use crate::series::{slash_transform, HeckeForm, TruncatedForm};
use crate::tolerances::{MAX_CONDITION, PERIODICITY};
use crate::vahlen::{Lattice, VahlenError, VahlenMatrix};

type Cmv = Multivector<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub enum FourierError {
    NotHalfInteger(f64),
    NonPositive(f64),
    GridTooCoarse { m: usize, needed: usize },
    NonPeriodic(f64),
    IllConditioned(f64),
    /// A Bessel profile underflows at every height.
    DegenerateProfile,
    TooFewHeights(usize),
    DuplicateHeights,
    /// Structured coefficients need a periodized truncation.
    NotPeriodized,
    Eval(VahlenError),
}

impl fmt::Display for FourierError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FourierError::NotHalfInteger(v) => write!(f, "order {v} is not a half-integer"),
            FourierError::NonPositive(z) => write!(f, "Bessel K needs z > 0, got {z}"),
            FourierError::GridTooCoarse { m, needed } => write!(f, "grid {m} too coarse, need at least {needed}"),
            FourierError::NonPeriodic(d) => write!(f, "input is not periodic (mismatch {d:.3e})"),
            FourierError::IllConditioned(c) => write!(f, "height set is ill-conditioned (condition {c:.3e})"),
            FourierError::DegenerateProfile => write!(f, "Bessel profile vanishes at these heights"),
            FourierError::TooFewHeights(h) => write!(f, "{h} heights are too few"),
            FourierError::DuplicateHeights => write!(f, "heights must be distinct"),
            FourierError::NotPeriodized => write!(f, "form does not use periodized summation"),
            FourierError::Eval(e) => write!(f, "evaluation failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FourierError {}

impl From<VahlenError> for FourierError {
    fn from(e: VahlenError) -> Self {
        FourierError::Eval(e)
    }
}

/// Default fitting heights.
pub const DEFAULT_HEIGHTS: [f64; 6] = [0.5, 0.75, 1.0, 1.5, 2.0, 3.0];

/// K_ν(z) for ν ∈ Z + 1/2 from K_{1/2}(z) = √(π/2z)e^{−z} and the upward
/// recurrence K_{ν+1} = K_{ν−1} + (2ν/z)K_ν.
pub fn bessel_k_half(nu: f64, z: f64) -> Result<f64, FourierError> {
    let twice = 2.0 * nu;
    if twice != libm::round(twice) || (twice as i64) % 2 == 0 {
        return Err(FourierError::NotHalfInteger(nu));
    }
    if z.is_nan() || z <= 0.0 {
        return Err(FourierError::NonPositive(z));
    }
    let target = libm::fabs(nu);
    let k_half = libm::sqrt(PI / (2.0 * z)) * libm::exp(-z);
    // (K_{ν−1}, K_ν) starting at ν = 1/2 with K_{−1/2} = K_{1/2}
    let (mut prev, mut cur, mut v) = (k_half, k_half, 0.5);
    while v < target - 0.25 {
        let next = prev + 2.0 * v / z * cur;
        prev = cur;
        cur = next;
        v += 1.0;
    }
    Ok(cur)
}

/// Dual-lattice vector with integer coordinates ℓ: ω = Σ ℓ_i e_i / N.
pub fn frequency(lattice: &Lattice, ell: &[i64]) -> Paravector {
    let mut w = Paravector::zero(lattice.n);
    for (i, &l) in ell.iter().enumerate() {
        w.set(i, l as f64 / lattice.level);
    }
    w
}

/// One representative of each of the `count` smallest nonzero norm shells of
/// the dual lattice, taken from non-negative coordinates in lexicographic order.
pub fn lowest_shells(lattice: &Lattice, count: usize) -> Vec<Paravector> {
    let rank = lattice.rank();
    let span = count as i64 + 1;
    let mut cands: Vec<(i64, Vec<i64>)> = Vec::new();
    let total = (span as usize).pow(rank as u32);
    for mut idx in 0..total {
        let mut ell = vec![0i64; rank];
        for e in ell.iter_mut() {
            *e = (idx % span as usize) as i64;
            idx /= span as usize;
        }
        ell.reverse();
        let n2: i64 = ell.iter().map(|x| x * x).sum();
        if n2 > 0 {
            cands.push((n2, ell));
        }
    }
    cands.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
    let mut out = Vec::new();
    let mut last = 0;
    for (n2, ell) in cands {
        if n2 != last {
            out.push(frequency(lattice, &ell));
            last = n2;
            if out.len() == count {
                break;
            }
        }
    }
    out
}

fn cis(t: f64) -> Complex64 {
    Complex64::new(libm::cos(t), libm::sin(t))
}

fn horizontal_dot(w: &Paravector, x: &Paravector, rank: usize) -> f64 {
    (0..rank).map(|i| w.get(i) * x.get(i)).sum()
}

fn grid_point(lattice: &Lattice, m: usize, mut idx: usize, xn: f64) -> Paravector {
    let mut x = Paravector::zero(lattice.n);
    for i in 0..lattice.rank() {
        x.set(i, (idx % m) as f64 * lattice.level / m as f64);
        idx /= m;
    }
    x.set(lattice.n, xn);
    x
}

fn check_grid(lattice: &Lattice, omegas: &[Paravector], m: usize) -> Result<(), FourierError> {
    let maxl = omegas
        .iter()
        .flat_map(|w| (0..lattice.rank()).map(move |i| libm::fabs(w.get(i) * lattice.level)))
        .fold(0.0, f64::max);
    let needed = 4 * libm::round(maxl) as usize + 2;
    if m < needed {
        return Err(FourierError::GridTooCoarse { m, needed });
    }
    Ok(())
}

/// Spot check of F(x + N e_i) = F(x).
pub fn check_periodic<S: Scalar>(f: &FieldFn<S>, lattice: &Lattice, xn: f64, tol: f64) -> Result<f64, FourierError> {
    let mut x = Paravector::zero(lattice.n);
    for i in 0..lattice.rank() {
        x.set(i, (0.37 + 0.11 * i as f64) * lattice.level);
    }
    x.set(lattice.n, xn);
    let base = f.eval(&x)?;
    let scale = base.norm().max(1e-300);
    let mut worst: f64 = 0.0;
    for i in 0..lattice.rank() {
        let mut y = x;
        y.set(i, x.get(i) + lattice.level);
        worst = worst.max((&f.eval(&y)? - &base).norm() / scale);
    }
    if worst > tol {
        return Err(FourierError::NonPeriodic(worst));
    }
    Ok(worst)
}

/// (1/vol)∫_cell F(x̲ + x_n e_n)e^{−2πi⟨ω,x̲⟩}dx̲ for each ω, by the
/// trapezoid rule on an m^{rank} grid.
pub fn fourier_coefficients<S: Scalar>(
    f: &FieldFn<S>,
    omegas: &[Paravector],
    xn: f64,
    lattice: &Lattice,
    m: usize,
) -> Result<Vec<Cmv>, FourierError> {
    check_grid(lattice, omegas, m)?;
    check_periodic(f, lattice, xn, PERIODICITY)?;
    let total = m.pow(lattice.rank() as u32);
    let vals: Vec<Multivector<S>> = crate::par::map(total, |j| f.eval(&grid_point(lattice, m, j, xn)))
        .into_iter()
        .collect::<Result<_, _>>()?;
    Ok(project(&vals, omegas, lattice, m, xn))
}

fn project<S: Scalar>(vals: &[Multivector<S>], omegas: &[Paravector], lattice: &Lattice, m: usize, xn: f64) -> Vec<Cmv> {
    let total = vals.len() as f64;
    let n = lattice.n;
    crate::par::map(omegas.len(), |k| {
        let w = &omegas[k];
        let mut acc = Cmv::zero(n);
        for (j, v) in vals.iter().enumerate() {
            let x = grid_point(lattice, m, j, xn);
            let ph = cis(-2.0 * PI * horizontal_dot(w, &x, lattice.rank()));
            for (a, c) in acc.coeffs_mut().iter_mut().zip(v.coeffs()) {
                *a += c.to_complex() * ph;
            }
        }
        acc.scale_real(1.0 / total)
    })
}

pub fn fourier_coefficient<S: Scalar>(
    f: &FieldFn<S>,
    omega: &Paravector,
    xn: f64,
    lattice: &Lattice,
    m: usize,
) -> Result<Cmv, FourierError> {
    Ok(fourier_coefficients(f, core::slice::from_ref(omega), xn, lattice, m)?.remove(0))
}

/// Coefficients of a periodized truncation from the lattice-sum transform:
/// F̂(ω) = x_n^a[δ_{ω,0} + Σ_b e^{2πi⟨ω,r_b⟩}Φ̂(ω)C_b]. Indexed [height][ω].
pub fn structured_coefficients(
    form: &TruncatedForm,
    omegas: &[Paravector],
    heights: &[f64],
    m: usize,
) -> Result<Vec<Vec<Cmv>>, FourierError> {
    let phi = match form.lattice_sum() {
        Some(p) if form.is_periodized() => p,
        _ => return Err(FourierError::NotPeriodized),
    };
    let lattice = phi.lattice().clone();
    check_grid(&lattice, omegas, m)?;
    let n = lattice.n;
    let rank = lattice.rank();
    let (_, a) = form.spec.exponents();
    let en = form.spec.en_factor && form.spec.kind == crate::series::SeriesKind::EisensteinPositive;
    let total = m.pow(rank as u32);
    let mut out = Vec::with_capacity(heights.len());
    for &h in heights {
        let vals: Vec<Multivector> = crate::par::map(total, |j| phi.eval(&grid_point(&lattice, m, j, h)).to_mv());
        let phat = project(&vals, omegas, &lattice, m, h);
        let xa = if a == 0.0 { 1.0 } else { libm::pow(h, a) };
        let mut row = Vec::with_capacity(omegas.len());
        for (w, ph) in omegas.iter().zip(&phat) {
            let mut acc = Cmv::zero(n);
            if (0..rank).all(|i| w.get(i) == 0.0) {
                acc += &Cmv::one(n);
            }
            for o in form.orbits() {
                let e = cis(2.0 * PI * horizontal_dot(w, &o.r, rank));
                acc += &(ph * &o.cfac.to_complex()).scale(e);
            }
            let mut v = acc.scale_real(xa);
            if en {
                v = &v * &Multivector::<f64>::e(n, n).to_complex();
            }
            row.push(v);
        }
        out.push(row);
    }
    Ok(out)
}

/// Richardson-extrapolated structured coefficients of the Hecke limit.
pub fn hecke_coefficients(
    form: &HeckeForm,
    omegas: &[Paravector],
    heights: &[f64],
    m: usize,
) -> Result<Vec<Vec<Cmv>>, FourierError> {
    let rungs: Vec<Vec<Vec<Cmv>>> =
        form.forms.iter().map(|f| structured_coefficients(f, omegas, heights, m)).collect::<Result<_, _>>()?;
    Ok((0..heights.len())
        .map(|i| {
            (0..omegas.len())
                .map(|j| {
                    let v: Vec<Cmv> = rungs.iter().map(|r| r[i][j].clone()).collect();
                    let mut out = v[2].scale_real(8.0);
                    out -= &v[1].scale_real(6.0);
                    out += &v[0];
                    out.scale_real(1.0 / 3.0)
                })
                .collect()
        })
        .collect())
}

/// Basis for the zero-frequency term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroModeBasis {
    /// Solutions of the zero-frequency ODEs: P ∈ {1, x_n^{k+1}}, Q ∈ {x_n, x_n^k}.
    Weinstein,
    /// a + α x_n^k + (b x_n + β x_n^{k+1}) e_n as printed.
    Stated,
}

impl ZeroModeBasis {
    /// (φ_a, φ_α, ψ_b, ψ_β) at height h.
    pub fn functions(self, k: i32, h: f64) -> [f64; 4] {
        let kf = k as f64;
        match self {
            ZeroModeBasis::Weinstein => [1.0, libm::pow(h, kf + 1.0), h, libm::pow(h, kf)],
            ZeroModeBasis::Stated => [1.0, libm::pow(h, kf), h, libm::pow(h, kf + 1.0)],
        }
    }
}

/// P(x_n) = a φ_a + α φ_α and Q(x_n) = b ψ_b + β ψ_β, F = P + Q e_n.
#[derive(Clone, Debug)]
pub struct ZeroFreqProfile {
    pub basis: ZeroModeBasis,
    pub k: i32,
    pub a: Cmv,
    pub alpha: Cmv,
    pub b: Cmv,
    pub beta: Cmv,
    /// The P or Q pair was rank one; the merged coefficient sits in a or b.
    pub merged: bool,
    pub residual: f64,
}

impl ZeroFreqProfile {
    pub fn reconstruct(&self, h: f64) -> Cmv {
        let [pa, pal, qb, qbe] = self.basis.functions(self.k, h);
        let p = &self.a.scale_real(pa) + &self.alpha.scale_real(pal);
        let q = &self.b.scale_real(qb) + &self.beta.scale_real(qbe);
        Cmv::from_pq(&p, &q)
    }

    pub fn max_norm(&self) -> f64 {
        [&self.a, &self.alpha, &self.b, &self.beta].iter().map(|m| m.norm()).fold(0.0, f64::max)
    }
}

fn check_heights(heights: &[f64], min: usize) -> Result<(), FourierError> {
    if heights.len() < min {
        return Err(FourierError::TooFewHeights(heights.len()));
    }
    for (i, a) in heights.iter().enumerate() {
        if heights[i + 1..].iter().any(|b| b == a) {
            return Err(FourierError::DuplicateHeights);
        }
    }
    Ok(())
}

/// Fits the two-function basis to the P- (or Q-) parts; returns the two
/// coefficient multivectors and whether the basis was rank one.
fn fit_pair(rows: &[Vec<f64>], parts: &[Cmv], n: usize) -> Result<(Cmv, Cmv, bool), FourierError> {
    let blades = 1usize << (n - 1);
    let mut rhs = Vec::with_capacity(2 * blades);
    for b in 0..blades {
        rhs.push(parts.iter().map(|p| p.get(b).re).collect::<Vec<_>>());
        rhs.push(parts.iter().map(|p| p.get(b).im).collect::<Vec<_>>());
    }
    let ls = lstsq(rows, &rhs, 1e-12);
    let merged = ls.rank < 2;
    if !merged && ls.condition > MAX_CONDITION {
        return Err(FourierError::IllConditioned(ls.condition));
    }
    let mut x = Cmv::zero(n);
    let mut y = Cmv::zero(n);
    for b in 0..blades {
        let (re, im) = (&ls.solutions[2 * b], &ls.solutions[2 * b + 1]);
        if merged {
            // minimum-norm solution splits the merged coefficient; recombine
            x[b] = Complex64::new(re[0] + re[1], im[0] + im[1]);
        } else {
            x[b] = Complex64::new(re[0], im[0]);
            y[b] = Complex64::new(re[1], im[1]);
        }
    }
    Ok((x, y, merged))
}

fn relative_residual(coeffs: &[Cmv], model: impl Fn(usize) -> Cmv) -> f64 {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    (0..coeffs.len()).map(|i| (&coeffs[i] - &model(i)).norm()).fold(0.0, f64::max) / scale
}

/// Least-squares fit of the zero-frequency coefficients at ≥ 6 heights.
pub fn fit_zero_frequency(
    heights: &[f64],
    coeffs: &[Cmv],
    k: i32,
    basis: ZeroModeBasis,
) -> Result<ZeroFreqProfile, FourierError> {
    check_heights(heights, 6)?;
    if k % 2 != 0 {
        return Err(FourierError::NotHalfInteger(k as f64));
    }
    let n = coeffs[0].dim();
    let fns: Vec<[f64; 4]> = heights.iter().map(|&h| basis.functions(k, h)).collect();
    let (ps, qs): (Vec<Cmv>, Vec<Cmv>) = coeffs.iter().map(|c| c.pq_split()).unzip();
    let rows_p: Vec<Vec<f64>> = fns.iter().map(|f| vec![f[0], f[1]]).collect();
    let rows_q: Vec<Vec<f64>> = fns.iter().map(|f| vec![f[2], f[3]]).collect();
    let (a, alpha, mp) = fit_pair(&rows_p, &ps, n)?;
    let (b, beta, mq) = fit_pair(&rows_q, &qs, n)?;
    let mut prof = ZeroFreqProfile { basis, k, a, alpha, b, beta, merged: mp || mq, residual: 0.0 };
    prof.residual = relative_residual(coeffs, |i| prof.reconstruct(heights[i]));
    Ok(prof)
}

/// Fitted Bessel profile at one frequency.
#[derive(Clone, Debug)]
pub struct FourierRecord {
    pub omega: Paravector,
    pub k: i32,
    pub heights: Vec<f64>,
    pub coeffs: Vec<Cmv>,
    pub alpha: Cmv,
    pub beta: Cmv,
    pub residual: f64,
    /// ‖β + i·conj(ω̂)·α'‖/max(‖α‖, ‖β‖): zero for hypermonogenic input.
    pub coupling: f64,
}

/// (h^{(k+1)/2}K_{(k+1)/2}(2π‖ω‖h), h^{(k+1)/2}K_{(k−1)/2}(2π‖ω‖h)).
pub fn bessel_profiles(omega: &Paravector, k: i32, h: f64) -> Result<(f64, f64), FourierError> {
    let w = 2.0 * PI * omega.norm();
    let kf = k as f64;
    let pre = libm::pow(h, (kf + 1.0) / 2.0);
    Ok((pre * bessel_k_half((kf + 1.0) / 2.0, w * h)?, pre * bessel_k_half((kf - 1.0) / 2.0, w * h)?))
}

fn coupling_defect(omega: &Paravector, alpha: &Cmv, beta: &Cmv) -> f64 {
    let n = alpha.dim();
    let what = omega.scale(1.0 / omega.norm()).conj().to_mv::<Complex64>();
    let i = Complex64::new(0.0, 1.0);
    let pred = (&what * &alpha.main_involution()).scale(-i);
    let scale = alpha.norm().max(beta.norm());
    if scale == 0.0 {
        return 0.0;
    }
    let _ = n;
    (beta - &pred).norm() / scale
}

/// Componentwise fit of P to the first and Q to the second K-profile.
pub fn fit_bessel_profile(
    heights: &[f64],
    coeffs: &[Cmv],
    omega: &Paravector,
    k: i32,
) -> Result<FourierRecord, FourierError> {
    check_heights(heights, 3)?;
    let prof: Vec<(f64, f64)> = heights.iter().map(|&h| bessel_profiles(omega, k, h)).collect::<Result<_, _>>()?;
    // P and Q are fitted separately, so only a vanishing profile is degenerate
    let (aa, bb) = prof.iter().fold((0.0, 0.0), |(x, y), &(a, b)| (x + a * a, y + b * b));
    if !(aa > f64::MIN_POSITIVE && bb > f64::MIN_POSITIVE) {
        return Err(FourierError::DegenerateProfile);
    }
    let n = coeffs[0].dim();
    let (ps, qs): (Vec<Cmv>, Vec<Cmv>) = coeffs.iter().map(|c| c.pq_split()).unzip();
    let mut alpha = Cmv::zero(n);
    let mut beta = Cmv::zero(n);
    for (i, &(a, b)) in prof.iter().enumerate() {
        alpha += &ps[i].scale_real(a / aa);
        beta += &qs[i].scale_real(b / bb);
    }
    let residual = relative_residual(coeffs, |i| {
        Cmv::from_pq(&alpha.scale_real(prof[i].0), &beta.scale_real(prof[i].1))
    });
    let coupling = coupling_defect(omega, &alpha, &beta);
    Ok(FourierRecord { omega: *omega, k, heights: heights.to_vec(), coeffs: coeffs.to_vec(), alpha, beta, residual, coupling })
}

/// Fit to (1 − i e_n ω̂)α e^{−2π‖ω‖x_n}; returns α and the relative residual.
pub fn fit_monogenic_profile(heights: &[f64], coeffs: &[Cmv], omega: &Paravector) -> Result<(Cmv, f64), FourierError> {
    check_heights(heights, 2)?;
    let n = coeffs[0].dim();
    let w = 2.0 * PI * omega.norm();
    let idem = monogenic_factor(omega);
    let prof: Vec<f64> = heights.iter().map(|&h| libm::exp(-w * h)).collect();
    let ss: f64 = prof.iter().map(|e| e * e).sum();
    let mut alpha = Cmv::zero(n);
    for (c, &e) in coeffs.iter().zip(&prof) {
        alpha += &c.pq_split().0.scale_real(e / ss);
    }
    let model = &idem * &alpha;
    let residual = relative_residual(coeffs, |i| model.scale_real(prof[i]));
    Ok((alpha, residual))
}

/// 1 − i e_n ω̂.
pub fn monogenic_factor(omega: &Paravector) -> Cmv {
    let n = omega.dim();
    let what = omega.scale(1.0 / omega.norm()).to_mv::<Complex64>();
    let en = Multivector::<f64>::e(n, n).to_complex();
    &Cmv::one(n) - &(&en * &what).scale(Complex64::new(0.0, 1.0))
}

/// ‖P² − P‖ for P = (1 − i e_n ω̂)/2.
pub fn idempotent_defect(omega: &Paravector) -> f64 {
    let p = monogenic_factor(omega).scale_real(0.5);
    (&(&p * &p) - &p).norm()
}

/// Monogenic plane wave (1 − i e_n ω̂)e^{2πi⟨ω,x̲⟩ − 2π‖ω‖x_n}.
pub fn plane_wave(omega: &Paravector) -> FieldFn<Complex64> {
    let w = *omega;
    let fac = monogenic_factor(omega);
    let n = omega.dim();
    FieldFn::total(n, move |x| {
        let t = 2.0 * PI * horizontal_dot(&w, x, n);
        let e = cis(t).scale(libm::exp(-2.0 * PI * w.norm() * x.xn()));
        fac.scale(e)
    })
}

/// Result of the zero-frequency cusp criterion over representatives.
#[derive(Clone, Debug)]
pub struct CuspCoefficientReport {
    pub pass: bool,
    /// Representatives examined before stopping.
    pub checked: usize,
    pub total: usize,
    /// Index of the first failing representative.
    pub failing: Option<usize>,
    pub profiles: Vec<ZeroFreqProfile>,
}

/// True iff every representative's zero-frequency profile (a, α, b, β)
/// vanishes below `tol`; stops at the first failure.
#[allow(clippy::too_many_arguments)]
pub fn cusp_coefficient_test(
    f: &FieldFn,
    k: i32,
    representatives: &[VahlenMatrix],
    lattice: &Lattice,
    heights: &[f64],
    m: usize,
    basis: ZeroModeBasis,
    tol: f64,
) -> Result<CuspCoefficientReport, FourierError> {
    let zero = [Paravector::zero(lattice.n)];
    let mut profiles = Vec::new();
    for (i, r) in representatives.iter().enumerate() {
        let g = slash_transform(f, r, k);
        let coeffs: Vec<Cmv> = heights
            .iter()
            .map(|&h| Ok(fourier_coefficients(&g, &zero, h, lattice, m)?.remove(0)))
            .collect::<Result<_, FourierError>>()?;
        let prof = fit_zero_frequency(heights, &coeffs, k, basis)?;
        let ok = prof.max_norm() < tol;
        profiles.push(prof);
        if !ok {
            return Ok(CuspCoefficientReport {
                pass: false,
                checked: i + 1,
                total: representatives.len(),
                failing: Some(i),
                profiles,
            });
        }
    }
    Ok(CuspCoefficientReport {
        pass: true,
        checked: representatives.len(),
        total: representatives.len(),
        failing: None,
        profiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> Lattice {
        Lattice::for_level(3, 2, 3.0).unwrap()
    }

    #[test]
    fn bessel_closed_forms() {
        let k = bessel_k_half(0.5, 1.0).unwrap();
        assert!((k - libm::sqrt(PI / 2.0) * libm::exp(-1.0)).abs() < 1e-15);
        for &z in &[0.1, 1.0, 7.5] {
            assert_eq!(bessel_k_half(-0.5, z).unwrap(), bessel_k_half(0.5, z).unwrap());
        }
        let z = 2.0;
        let k32 = libm::sqrt(PI / (2.0 * z)) * libm::exp(-z) * (1.0 + 1.0 / z);
        assert!((bessel_k_half(1.5, z).unwrap() - k32).abs() < 1e-15);
        assert!(bessel_k_half(1.0, 1.0).is_err());
        assert!(bessel_k_half(0.5, 0.0).is_err());
    }

    #[test]
    fn bessel_recurrence_holds() {
        let mut z: f64 = 0.1;
        while z <= 50.0 {
            for nu in [0.5, 1.5, 2.5, 3.5] {
                let lhs = bessel_k_half(nu + 1.0, z).unwrap();
                let rhs = bessel_k_half(nu - 1.0, z).unwrap() + 2.0 * nu / z * bessel_k_half(nu, z).unwrap();
                assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs(), "nu={nu} z={z}");
            }
            z *= 1.7;
        }
    }

    #[test]
    fn constants_and_orthogonality() {
        let c = Multivector::<f64>::e(3, 1).scale_real(2.5);
        let cc = c.clone();
        let f = FieldFn::total(3, move |_| cc.clone());
        let l = lat();
        let w = lowest_shells(&l, 3);
        assert_eq!(w.len(), 3);
        let mut all = vec![Paravector::zero(3)];
        all.extend(w);
        let co = fourier_coefficients(&f, &all, 1.0, &l, 8).unwrap();
        assert!(co[0].max_abs_diff(&c.to_complex()) < 1e-14);
        for v in &co[1..] {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn plane_wave_coefficients() {
        let l = lat();
        let w0 = frequency(&l, &[1, 1, 0]);
        let f = plane_wave(&w0);
        let others = [frequency(&l, &[1, 0, 0]), frequency(&l, &[0, 1, 1])];
        let h = 0.7;
        let c = fourier_coefficient(&f, &w0, h, &l, 8).unwrap();
        let expect = monogenic_factor(&w0).scale_real(libm::exp(-2.0 * PI * w0.norm() * h));
        assert!(c.max_abs_diff(&expect) < 1e-13);
        for o in &others {
            assert!(fourier_coefficient(&f, o, h, &l, 8).unwrap().norm() < 1e-13);
        }
    }

    #[test]
    fn idempotent_exact() {
        for ell in [[1, 0, 0], [1, 2, -1], [3, -1, 2]] {
            assert!(idempotent_defect(&frequency(&lat(), &ell)) < 1e-15);
        }
    }

    fn synth(basis: ZeroModeBasis, k: i32) -> (Vec<Cmv>, [Cmv; 4]) {
        let n = 3;
        let mk = |v: [f64; 4]| {
            let mut m = Cmv::zero(n);
            m[0] = Complex64::new(v[0], v[1]);
            m[1] = Complex64::new(v[2], 0.0);
            m[3] = Complex64::new(0.0, v[3]);
            m
        };
        let c = [mk([1.0, 0.2, -0.5, 0.3]), mk([0.4, -1.0, 0.1, 0.0]), mk([-0.3, 0.0, 0.7, 0.2]), mk([0.0, 0.5, 0.0, -0.9])];
        let coeffs = DEFAULT_HEIGHTS
            .iter()
            .map(|&h| {
                let f = basis.functions(k, h);
                let p = &c[0].scale_real(f[0]) + &c[1].scale_real(f[1]);
                let q = &c[2].scale_real(f[2]) + &c[3].scale_real(f[3]);
                Cmv::from_pq(&p, &q)
            })
            .collect();
        (coeffs, c)
    }

    #[test]
    fn zero_frequency_round_trip() {
        for basis in [ZeroModeBasis::Weinstein, ZeroModeBasis::Stated] {
            let (coeffs, c) = synth(basis, -2);
            let p = fit_zero_frequency(&DEFAULT_HEIGHTS, &coeffs, -2, basis).unwrap();
            assert!(!p.merged);
            for (x, y) in [&p.a, &p.alpha, &p.b, &p.beta].iter().zip(&c) {
                assert!(x.max_abs_diff(y) < 1e-10);
            }
            assert!(p.residual < 1e-12);
        }
    }

    #[test]
    fn stated_basis_merges_at_k0() {
        let (coeffs, c) = synth(ZeroModeBasis::Stated, 0);
        let p = fit_zero_frequency(&DEFAULT_HEIGHTS, &coeffs, 0, ZeroModeBasis::Stated).unwrap();
        assert!(p.merged);
        assert!(p.a.max_abs_diff(&(&c[0] + &c[1])) < 1e-10);
        assert!(p.residual < 1e-12);
        let p = fit_zero_frequency(&DEFAULT_HEIGHTS, &coeffs, 0, ZeroModeBasis::Weinstein).unwrap();
        assert!(!p.merged);
    }

    #[test]
    fn ill_conditioned_heights_rejected() {
        let hs = [1.0, 1.0 + 1e-9, 1.0 + 2e-9, 1.0 + 3e-9, 1.0 + 4e-9, 1.0 + 5e-9];
        let (coeffs, _) = synth(ZeroModeBasis::Weinstein, -2);
        let r = fit_zero_frequency(&hs, &coeffs, -2, ZeroModeBasis::Weinstein);
        assert!(matches!(r, Err(FourierError::IllConditioned(_))), "{r:?}");
    }

    #[test]
    fn bessel_round_trip() {
        let w = frequency(&lat(), &[1, 1, 0]);
        let n = 3;
        let mut alpha = Cmv::zero(n);
        alpha[0] = Complex64::new(0.3, -0.1);
        alpha[2] = Complex64::new(0.0, 0.8);
        let mut beta = Cmv::zero(n);
        beta[1] = Complex64::new(-0.4, 0.2);
        let coeffs: Vec<Cmv> = DEFAULT_HEIGHTS
            .iter()
            .map(|&h| {
                let (a, b) = bessel_profiles(&w, -2, h).unwrap();
                Cmv::from_pq(&alpha.scale_real(a), &beta.scale_real(b))
            })
            .collect();
        let r = fit_bessel_profile(&DEFAULT_HEIGHTS, &coeffs, &w, -2).unwrap();
        assert!(r.alpha.max_abs_diff(&alpha) < 1e-10);
        assert!(r.beta.max_abs_diff(&beta) < 1e-10);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn plane_wave_satisfies_coupling_at_k0() {
        let l = lat();
        let w = frequency(&l, &[1, 0, 1]);
        let f = plane_wave(&w);
        let coeffs: Vec<Cmv> =
            DEFAULT_HEIGHTS.iter().map(|&h| fourier_coefficient(&f, &w, h, &l, 8).unwrap()).collect();
        let r = fit_bessel_profile(&DEFAULT_HEIGHTS, &coeffs, &w, 0).unwrap();
        assert!(r.residual < 1e-12, "{}", r.residual);
        assert!(r.coupling < 1e-12, "{}", r.coupling);
        let (_, res) = fit_monogenic_profile(&DEFAULT_HEIGHTS, &coeffs, &w).unwrap();
        assert!(res < 1e-12);
    }

    #[test]
    fn structured_matches_grid_quadrature() {
        use crate::series::{eisenstein, SeriesSpec, Summation};
        let spec = SeriesSpec::eisenstein(3, -4, 2, 3, 3.0)
            .with_summation(Summation::Periodized)
            .with_ewald(crate::lattice_sum::EwaldParams::FAST);
        let form = eisenstein(&spec).unwrap();
        assert!(form.term_count() > 0);
        let l = lat();
        let mut om = vec![Paravector::zero(3)];
        om.extend(lowest_shells(&l, 2));
        let hs = [0.8];
        let s = structured_coefficients(&form, &om, &hs, 8).unwrap();
        let d = fourier_coefficients(form.evaluator(), &om, hs[0], &l, 8).unwrap();
        for (a, b) in s[0].iter().zip(&d) {
            assert!(a.max_abs_diff(b) < 1e-9, "{a:?} {b:?}");
        }
    }

    #[test]
    fn non_periodic_input_rejected() {
        let f = FieldFn::total(3, |x: &Paravector| Multivector::scalar(3, x.get(0)));
        let r = fourier_coefficient(&f, &Paravector::zero(3), 1.0, &lat(), 8);
        assert!(matches!(r, Err(FourierError::NonPeriodic(_))));
    }

    #[test]
    fn grid_must_resolve_frequencies() {
        let f = FieldFn::total(3, |_: &Paravector| Multivector::<f64>::one(3));
        let w = frequency(&lat(), &[2, 0, 0]);
        assert!(matches!(fourier_coefficient(&f, &w, 1.0, &lat(), 8), Err(FourierError::GridTooCoarse { .. })));
    }
}
