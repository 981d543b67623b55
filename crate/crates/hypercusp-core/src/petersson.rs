//! Monte-Carlo Petersson inner product over an approximate fundamental domain.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{Multivector, Paravector};
use crate::diffops::FieldFn;
use crate::vahlen::{clifford_group_inverse, level_words, VahlenError, VahlenMatrix};

/// Height window used when none is given.
pub const DEFAULT_HEIGHTS: (f64, f64) = (0.3, 30.0);
pub const DEFAULT_STRATA: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum PeterssonError {
    BadDomain(&'static str),
    /// Neither argument was verified to be a cusp form.
    NotCuspidal,
    NoSamplesAccepted,
    DimensionMismatch,
    Eval(VahlenError),
}

impl fmt::Display for PeterssonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeterssonError::BadDomain(s) => write!(f, "invalid domain: {s}"),
            PeterssonError::NotCuspidal => {
                write!(f, "at least one argument must be a verified cusp form (or override the check)")
            }
            PeterssonError::NoSamplesAccepted => write!(f, "no sample fell inside the domain"),
            PeterssonError::DimensionMismatch => write!(f, "functions and domain have different dimensions"),
            PeterssonError::Eval(e) => write!(f, "evaluation failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PeterssonError {}

impl From<VahlenError> for PeterssonError {
    fn from(e: VahlenError) -> Self {
        PeterssonError::Eval(e)
    }
}

/// Bottom row (c, d) of a test matrix with the isometric sphere
/// ‖x − centre‖ = radius on which ‖cx + d‖ = 1, when c is invertible.
#[derive(Clone, Debug)]
struct Test {
    c: Multivector,
    d: Multivector,
    sphere: Option<(Paravector, f64)>,
}

impl Test {
    fn new(m: &VahlenMatrix) -> Self {
        let sphere = clifford_group_inverse(&m.c).ok().and_then(|ci| {
            let z = (&ci * &m.d).scale_real(-1.0);
            z.is_paravector(1e-12).then(|| (Paravector::from_mv(&z), 1.0 / m.c.norm()))
        });
        Test { c: m.c.clone(), d: m.d.clone(), sphere }
    }

    /// (M<x>)_n ≤ x_n, i.e. ‖cx + d‖ ≥ 1.
    fn keeps(&self, x: &Paravector) -> bool {
        let mut v = crate::clifford::mul_mv_para(&self.c, x);
        v += &self.d;
        v.norm_sqr() >= 1.0
    }
}

/// Highest-point approximation of a fundamental domain of Γ_{n−1}[N]:
/// x̲ in the centred box of side N, y₀ ≤ x_n ≤ Y, and no test matrix raises x.
#[derive(Clone, Debug)]
pub struct FundamentalDomainApprox {
    pub n: usize,
    pub level: i64,
    /// BFS word length of the test set (0 for an explicit set).
    pub word_length: usize,
    pub y0: f64,
    pub ymax: f64,
    /// Size of the test set before pruning.
    pub test_count: usize,
    tests: Vec<Test>,
}

impl FundamentalDomainApprox {
    /// Test set: words of length ≤ `word_length` in the generators of Γ_{n−1}[N].
    pub fn new(n: usize, level: i64, word_length: usize) -> Result<Self, PeterssonError> {
        if n < 1 || level < 1 {
            return Err(PeterssonError::BadDomain("need n ≥ 1 and N ≥ 1"));
        }
        let words = level_words(n, n - 1, level, word_length);
        let mut d = Self::from_matrices(n, level, &words, DEFAULT_HEIGHTS.0, DEFAULT_HEIGHTS.1)?;
        d.word_length = word_length;
        Ok(d)
    }

    /// Explicit test set. Matrices whose isometric sphere misses the
    /// sampling region are dropped, which leaves the predicate unchanged.
    pub fn from_matrices(
        n: usize,
        level: i64,
        mats: &[VahlenMatrix],
        y0: f64,
        ymax: f64,
    ) -> Result<Self, PeterssonError> {
        if !(y0 > 0.0 && ymax > y0 && ymax.is_finite()) {
            return Err(PeterssonError::BadDomain("need 0 < y0 < Y < ∞"));
        }
        if mats.iter().any(|m| m.dim() != n) {
            return Err(PeterssonError::DimensionMismatch);
        }
        let half = level as f64 / 2.0;
        let mut tests: Vec<Test> = Vec::new();
        let mut seen = alloc::collections::BTreeSet::new();
        for m in mats {
            if m.c.is_zero() {
                continue;
            }
            let t = Test::new(m);
            if let Some((z, r)) = &t.sphere {
                if *r <= y0 || (0..n).any(|i| libm::fabs(z.get(i)) > half + r) {
                    continue;
                }
            }
            // bottom rows up to sign define the same test
            let key: Vec<i64> = t.c.coeffs().iter().chain(t.d.coeffs()).map(|v| libm::round(v * 1e6) as i64).collect();
            let neg: Vec<i64> = key.iter().map(|v| -v).collect();
            if seen.insert(if neg < key { neg } else { key }) {
                tests.push(t);
            }
        }
        Ok(Self { n, level, word_length: 0, y0, ymax, test_count: mats.len(), tests })
    }

    pub fn with_heights(mut self, y0: f64, ymax: f64) -> Result<Self, PeterssonError> {
        if !(y0 > 0.0 && ymax > y0 && ymax.is_finite()) {
            return Err(PeterssonError::BadDomain("need 0 < y0 < Y < ∞"));
        }
        self.y0 = y0;
        self.ymax = ymax;
        Ok(self)
    }

    /// Number of test matrices that can affect membership.
    pub fn active_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn in_box(&self, x: &Paravector) -> bool {
        let half = self.level as f64 / 2.0;
        (0..self.n).all(|i| {
            let v = x.get(i);
            (-half..half).contains(&v)
        }) && x.xn() >= self.y0
            && x.xn() <= self.ymax
    }

    pub fn in_domain(&self, x: &Paravector) -> bool {
        self.in_box(x) && self.tests.iter().all(|t| t.keeps(x))
    }

    /// Hyperbolic volume of the sampling box.
    pub fn box_volume(&self) -> f64 {
        let nf = self.n as f64;
        libm::pow(self.level as f64, nf) * (libm::pow(self.y0, -nf) - libm::pow(self.ymax, -nf)) / nf
    }
}

/// One argument of the inner product.
#[derive(Clone)]
pub struct Integrand {
    pub f: FieldFn,
    /// Set when the function passed the cusp coefficient test.
    pub cusp_verified: bool,
}

impl Integrand {
    pub fn new(f: FieldFn, cusp_verified: bool) -> Self {
        Self { f, cusp_verified }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplingOptions {
    pub samples: usize,
    pub seed: u64,
    pub strata: usize,
    /// Skip the cusp-form requirement.
    pub allow_noncuspidal: bool,
}

impl SamplingOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, strata: DEFAULT_STRATA, allow_noncuspidal: false }
    }
}

#[derive(Clone, Debug)]
pub struct PeterssonResult {
    pub value: Multivector,
    /// Standard error per blade.
    pub stderr: Vec<f64>,
    pub samples: usize,
    pub accepted: usize,
    pub word_length: usize,
    pub y0: f64,
    pub ymax: f64,
}

impl PeterssonResult {
    pub fn max_stderr(&self) -> f64 {
        self.stderr.iter().copied().fold(0.0, f64::max)
    }

    /// max_b |value_b|/stderr_b over blades with nonzero stderr.
    pub fn max_zscore(&self) -> f64 {
        self.value
            .coeffs()
            .iter()
            .zip(&self.stderr)
            .map(|(v, s)| if *s > 0.0 { libm::fabs(*v) / s } else if *v == 0.0 { 0.0 } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    accepted: usize,
}

/// ⟨f_i, f_j⟩ = ∫ f_i·conj(f_j)·x_n^{−k−1} dx₀…dx_n for every requested pair
/// (i, j) and every domain, from one shared sample stream. Heights are
/// stratified in equal hyperbolic-volume bands, x_n drawn with density
/// ∝ x_n^{−n−1}, stream (seed, band) per band. Result is indexed [pair][domain].
pub fn petersson_gram(
    fns: &[Integrand],
    pairs: &[(usize, usize)],
    k: i32,
    domains: &[FundamentalDomainApprox],
    opts: &SamplingOptions,
) -> Result<Vec<Vec<PeterssonResult>>, PeterssonError> {
    let first = domains.first().ok_or(PeterssonError::BadDomain("no domain given"))?;
    let n = first.n;
    for &(i, j) in pairs {
        let (f, g) = match (fns.get(i), fns.get(j)) {
            (Some(f), Some(g)) => (f, g),
            _ => return Err(PeterssonError::BadDomain("pair index out of range")),
        };
        if !(f.cusp_verified || g.cusp_verified || opts.allow_noncuspidal) {
            return Err(PeterssonError::NotCuspidal);
        }
    }
    if fns.iter().any(|f| f.f.dim() != n) {
        return Err(PeterssonError::DimensionMismatch);
    }
    if domains.iter().any(|d| d.n != n || d.level != first.level || d.y0 != first.y0 || d.ymax != first.ymax) {
        return Err(PeterssonError::BadDomain("domains must share the sampling box"));
    }
    if opts.strata == 0 || opts.samples < 2 * opts.strata {
        return Err(PeterssonError::BadDomain("need at least two samples per stratum"));
    }
    let nf = n as f64;
    let blades = 1usize << n;
    let half = first.level as f64 / 2.0;
    let (u_lo, u_hi) = (libm::pow(first.ymax, -nf), libm::pow(first.y0, -nf));
    let per = opts.samples / opts.strata;
    let band_vol = first.box_volume() / opts.strata as f64;
    let weight_exp = nf - k as f64;
    let used: Vec<bool> = (0..fns.len()).map(|i| pairs.iter().any(|&(a, b)| a == i || b == i)).collect();

    // moments indexed [pair * domains + domain]
    let bands = crate::par::map(opts.strata, |b| -> Result<Vec<Moments>, PeterssonError> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(b as u64);
        let mut mom: Vec<Moments> = (0..pairs.len() * domains.len())
            .map(|_| Moments { sum: vec![0.0; blades], sum_sq: vec![0.0; blades], accepted: 0 })
            .collect();
        let width = (u_hi - u_lo) / opts.strata as f64;
        let mut flags = vec![false; domains.len()];
        let mut vals: Vec<Multivector> = vec![Multivector::zero(n); fns.len()];
        for _ in 0..per {
            let mut x = Paravector::zero(n);
            for i in 0..n {
                x.set(i, (2.0 * uniform(&mut rng) - 1.0) * half);
            }
            let u = u_lo + width * (b as f64 + uniform(&mut rng));
            x.set(n, libm::pow(u, -1.0 / nf));
            let mut any = false;
            for (fl, d) in flags.iter_mut().zip(domains) {
                *fl = d.in_domain(&x);
                any |= *fl;
            }
            if !any {
                continue;
            }
            for (i, f) in fns.iter().enumerate() {
                if used[i] {
                    vals[i] = f.f.eval(&x)?;
                }
            }
            let w = libm::pow(x.xn(), weight_exp);
            for (pi, &(i, j)) in pairs.iter().enumerate() {
                let v = (&vals[i] * &vals[j].conjugation()).scale_real(w);
                for (di, &fl) in flags.iter().enumerate() {
                    if fl {
                        let m = &mut mom[pi * domains.len() + di];
                        m.accepted += 1;
                        for (i, c) in v.coeffs().iter().enumerate() {
                            m.sum[i] += c;
                            m.sum_sq[i] += c * c;
                        }
                    }
                }
            }
        }
        Ok(mom)
    });
    let bands: Vec<Vec<Moments>> = bands.into_iter().collect::<Result<_, _>>()?;

    let pf = per as f64;
    (0..pairs.len())
        .map(|pi| {
            domains
                .iter()
                .enumerate()
                .map(|(di, d)| {
                    let mut value = vec![0.0; blades];
                    let mut var = vec![0.0; blades];
                    let mut accepted = 0;
                    for band in &bands {
                        let m = &band[pi * domains.len() + di];
                        accepted += m.accepted;
                        for i in 0..blades {
                            let mean = m.sum[i] / pf;
                            let s2 = ((m.sum_sq[i] - pf * mean * mean) / (pf - 1.0)).max(0.0);
                            value[i] += band_vol * mean;
                            var[i] += band_vol * band_vol * s2 / pf;
                        }
                    }
                    if accepted == 0 {
                        return Err(PeterssonError::NoSamplesAccepted);
                    }
                    Ok(PeterssonResult {
                        value: Multivector::from_coeffs(n, value).expect("blade count"),
                        stderr: var.into_iter().map(libm::sqrt).collect(),
                        samples: per * opts.strata,
                        accepted,
                        word_length: d.word_length,
                        y0: d.y0,
                        ymax: d.ymax,
                    })
                })
                .collect()
        })
        .collect()
}

/// ⟨f, g⟩ over several domains sharing one sample stream.
pub fn petersson_products(
    f: &Integrand,
    g: &Integrand,
    k: i32,
    domains: &[FundamentalDomainApprox],
    opts: &SamplingOptions,
) -> Result<Vec<PeterssonResult>, PeterssonError> {
    let fns = [f.clone(), g.clone()];
    Ok(petersson_gram(&fns, &[(0, 1)], k, domains, opts)?.remove(0))
}

pub fn petersson_product(
    f: &Integrand,
    g: &Integrand,
    k: i32,
    dom: &FundamentalDomainApprox,
    opts: &SamplingOptions,
) -> Result<PeterssonResult, PeterssonError> {
    Ok(petersson_products(f, g, k, core::slice::from_ref(dom), opts)?.remove(0))
}

/// Defects of f(M<x>)·conj(g(M<x>))·(M<x>)_n^{n−k} = x_n^{n−k}·f(x)·conj(g(x)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceDefect {
    /// Full multivector, relative to the right-hand side.
    pub full: f64,
    /// Scalar part only, relative to the norm of the right-hand side.
    pub scalar: f64,
}

pub fn invariance_probe(
    f: &FieldFn,
    g: &FieldFn,
    k: i32,
    m: &VahlenMatrix,
    points: &[Paravector],
) -> Result<InvarianceDefect, VahlenError> {
    let alpha = (f.dim() as i32 - k) as f64;
    let mut out = InvarianceDefect { full: 0.0, scalar: 0.0 };
    for x in points {
        let y = m.mobius_apply(x)?;
        let lhs = (&f.eval(&y)? * &g.eval(&y)?.conjugation()).scale_real(libm::pow(y.xn(), alpha));
        let rhs = (&f.eval(x)? * &g.eval(x)?.conjugation()).scale_real(libm::pow(x.xn(), alpha));
        let scale = rhs.norm();
        if scale == 0.0 {
            if lhs.norm() > 0.0 {
                out.full = f64::INFINITY;
                out.scalar = f64::INFINITY;
            }
            continue;
        }
        out.full = out.full.max((&lhs - &rhs).norm() / scale);
        out.scalar = out.scalar.max(libm::fabs(lhs.scalar_part() - rhs.scalar_part()) / scale);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn para(c: &[f64]) -> Paravector {
        Paravector::new(c)
    }

    #[test]
    fn high_points_are_inside() {
        let d = FundamentalDomainApprox::new(3, 3, 3).unwrap();
        assert!(d.in_domain(&para(&[0.1, -0.4, 1.2, 10.0])));
        assert!(!d.in_domain(&para(&[1.6, 0.0, 0.0, 10.0])));
        assert!(!d.in_domain(&para(&[0.0, 0.0, 0.0, 40.0])));
    }

    #[test]
    fn inversion_excludes_the_unit_ball() {
        let d = FundamentalDomainApprox::from_matrices(2, 3, &[VahlenMatrix::j(2)], 0.1, 30.0).unwrap();
        let x = para(&[0.2, 0.1, 0.5]);
        assert!(!d.in_domain(&x));
        assert_eq!(d.in_domain(&x), d.in_domain(&x));
        assert!(d.in_domain(&para(&[0.2, 0.1, 1.5])));
    }

    #[test]
    fn larger_test_set_shrinks_region() {
        let small = FundamentalDomainApprox::new(2, 3, 2).unwrap().with_heights(0.05, 30.0).unwrap();
        let big = FundamentalDomainApprox::new(2, 3, 4).unwrap().with_heights(0.05, 30.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let x = para(&[3.0 * uniform(&mut rng) - 1.5, 3.0 * uniform(&mut rng) - 1.5, 0.05 + 0.5 * uniform(&mut rng)]);
            if big.in_domain(&x) {
                assert!(small.in_domain(&x));
            }
        }
    }

    #[test]
    fn zero_functions_give_zero() {
        let z = Integrand::new(FieldFn::total(2, |_| Multivector::zero(2)), true);
        let d = FundamentalDomainApprox::new(2, 3, 2).unwrap();
        let r = petersson_product(&z, &z, -2, &d, &SamplingOptions::new(640, 1)).unwrap();
        assert!(r.value.is_zero());
        assert!(r.stderr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn cusp_flag_enforced() {
        let one = Integrand::new(FieldFn::total(2, |_| Multivector::one(2)), false);
        let d = FundamentalDomainApprox::new(2, 3, 2).unwrap();
        let mut o = SamplingOptions::new(640, 1);
        assert_eq!(petersson_product(&one, &one, -2, &d, &o).unwrap_err(), PeterssonError::NotCuspidal);
        o.allow_noncuspidal = true;
        assert!(petersson_product(&one, &one, -2, &d, &o).is_ok());
    }

    #[test]
    fn constant_integrand_matches_volume() {
        // f = g = 1 and k = n: integrand is x_n^0 dν, so the box gives its volume
        let one = Integrand::new(FieldFn::total(2, |_| Multivector::one(2)), true);
        let d = FundamentalDomainApprox::from_matrices(2, 3, &[], 0.3, 30.0).unwrap();
        let r = petersson_product(&one, &one, 2, &d, &SamplingOptions::new(3200, 9)).unwrap();
        assert!((r.value.scalar_part() - d.box_volume()).abs() < 1e-10 * d.box_volume());
    }

    #[test]
    fn k0_weight_matches_monogenic_form() {
        // at k = 0 the weight is x_n^{-1} dx; compare with direct x_n^{n} dν weighting
        let f = FieldFn::total(2, |x: &Paravector| Multivector::scalar(2, 1.0 / (1.0 + x.xn() * x.xn())));
        let a = Integrand::new(f.clone(), true);
        let d = FundamentalDomainApprox::new(2, 3, 2).unwrap();
        let o = SamplingOptions::new(3200, 4);
        let r0 = petersson_product(&a, &a, 0, &d, &o).unwrap();
        let g = f.weighted(|x: &Paravector| libm::pow(x.xn(), 2.0));
        let b = Integrand::new(g, true);
        let r1 = petersson_product(&b, &a, 2, &d, &o).unwrap();
        assert!((r0.value.scalar_part() - r1.value.scalar_part()).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let f = Integrand::new(FieldFn::total(2, |x: &Paravector| Multivector::scalar(2, x.get(0))), true);
        let d = FundamentalDomainApprox::new(2, 3, 2).unwrap();
        let o = SamplingOptions::new(640, 77);
        let a = petersson_product(&f, &f, -2, &d, &o).unwrap();
        let b = petersson_product(&f, &f, -2, &d, &o).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.stderr, b.stderr);
    }

    #[test]
    fn slash_orbit_pair_satisfies_law_exactly() {
        // f = j(M0, ·) is invariant under M0⁻¹ T M0
        let n = 2;
        let m0 = VahlenMatrix::j(n).mul(&VahlenMatrix::translation(&para(&[1.0, 0.0, 0.0])));
        let t = VahlenMatrix::translation(&para(&[3.0, 0.0, 0.0]));
        let m = m0.inverse_sav().mul(&t).mul(&m0);
        let k = -2;
        let mm = m0.clone();
        let f = FieldFn::total(n, move |x| mm.automorphy_factor(x, k).unwrap());
        let pts = [para(&[0.3, 0.2, 0.7]), para(&[-1.1, 0.4, 1.3])];
        let d = invariance_probe(&f, &f, k, &m, &pts).unwrap();
        assert!(d.full < 1e-10, "{d:?}");
        let id = invariance_probe(&f, &f, k, &VahlenMatrix::identity(n), &pts).unwrap();
        assert_eq!(id.full, 0.0);
    }
}
