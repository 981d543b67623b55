//! The fifteen acceptance checks, each reported as one pass/fail line.

use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use hypercusp_core::clifford::mul_para_mv;
use hypercusp_core::diffops::{
    hypermonogenic_defect, kernel_membership, kholo_defect, laplacian_defect, lb_defect, sample_points, weinstein_defect,
    weinstein_pair_defect, FieldFn, StencilSpec, WeinsteinVariant,
};
use hypercusp_core::fourier::{
    cusp_coefficient_test, fit_bessel_profile, fit_monogenic_profile, hecke_coefficients, idempotent_defect,
    lowest_shells, plane_wave, structured_coefficients, ZeroModeBasis, DEFAULT_HEIGHTS,
};
use hypercusp_core::lattice_sum::EwaldParams;
use hypercusp_core::petersson::{petersson_gram, FundamentalDomainApprox, Integrand, SamplingOptions};
use hypercusp_core::series::{
    cusp_test, eisenstein, eisenstein_hecke, gk, maass_eigenvalue, maass_lift, poincare, scale_map, slash_transform,
    SeriesKind, SeriesSpec, Summation, TruncatedForm, HECKE_LADDER,
};
use hypercusp_core::tolerances::*;
use hypercusp_core::vahlen::{
    clifford_group_inverse, congruence_representatives, level_generators, symmetric_generators, Lattice, VahlenMatrix,
};
use hypercusp_core::{HalfSpacePoint, Multivector, Paravector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub const NAMES: [&str; 15] = [
    "clifford axioms",
    "kernel of G_k",
    "separation example",
    "weinstein equivalence",
    "scaling map",
    "transformation law",
    "eisenstein cusp value",
    "quasi-invariance decay",
    "poincare cusp decay",
    "poincare non-hypermonogenicity",
    "fourier profile",
    "idempotent identity",
    "cusp criterion consistency",
    "orthogonality",
    "maass lift",
];

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} [{:.1} s]",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

type Outcome = Result<(bool, String), String>;

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn run_criterion(id: u8, quick: bool) -> CriterionResult {
    let t = Instant::now();
    let out = match id {
        1 => c01_axioms(quick),
        2 => c02_kernel(quick),
        3 => c03_separation(),
        4 => c04_weinstein(),
        5 => c05_scaling(),
        6 => c06_transformation(),
        7 => c07_cusp_value(),
        8 => c08_decay(),
        9 => c09_poincare_decay(),
        10 => c10_non_hypermonogenic(),
        11 => c11_fourier(),
        12 => c12_idempotent(),
        13 => c13_cusp_criterion(),
        14 => c14_orthogonality(quick),
        15 => c15_maass(),
        _ => Err(format!("no criterion {id}")),
    };
    let seconds = t.elapsed().as_secs_f64();
    let (pass, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    let name = NAMES.get(id.wrapping_sub(1) as usize).copied().unwrap_or("unknown");
    CriterionResult { id, name, pass, detail, seconds }
}

pub fn run_all(quick: bool) -> Vec<CriterionResult> {
    (1..=15).map(|i| run_criterion(i, quick)).collect()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
}

fn random_mv(rng: &mut ChaCha8Rng, n: usize) -> Multivector {
    Multivector::from_coeffs(n, (0..1 << n).map(|_| uniform(rng, -1.0, 1.0)).collect()).expect("dim")
}

fn random_para(rng: &mut ChaCha8Rng, n: usize) -> Paravector {
    let c: Vec<f64> = (0..=n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    Paravector::new(&c)
}

fn c01_axioms(quick: bool) -> Outcome {
    let t = Instant::now();
    let triples = if quick { 1000 } else { 10_000 };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 4];
    for i in 0..triples {
        let n = 3 + i % 3;
        let (a, b, c) = (random_mv(&mut rng, n), random_mv(&mut rng, n), random_mv(&mut rng, n));
        let (na, nb, nc) = (a.norm(), b.norm(), c.norm());
        let rel = |x: &Multivector, y: &Multivector, scale: f64| (x - y).norm() / scale.max(f64::MIN_POSITIVE);
        let ab = &a * &b;
        worst[0] = worst[0].max(rel(&(&ab * &c), &(&a * &(&b * &c)), na * nb * nc));
        let s = na * nb;
        let anti = [
            rel(&ab.reversion(), &(&b.reversion() * &a.reversion()), s),
            rel(&ab.conjugation(), &(&b.conjugation() * &a.conjugation()), s),
            rel(&ab.main_involution(), &(&a.main_involution() * &b.main_involution()), s),
            rel(&ab.star(), &(&a.star() * &b.star()), s),
        ];
        worst[1] = anti.iter().fold(worst[1], |m, v| m.max(*v));
        let inv = [
            rel(&a.reversion().reversion(), &a, na),
            rel(&a.conjugation().conjugation(), &a, na),
            rel(&a.main_involution().main_involution(), &a, na),
            rel(&a.star().star(), &a, na),
        ];
        worst[2] = inv.iter().fold(worst[2], |m, v| m.max(*v));
        let (x, y) = (random_para(&mut rng, n), random_para(&mut rng, n));
        let one = Multivector::one(n);
        let xi = x.inverse().map_err(err)?;
        worst[3] = worst[3].max(rel(&(&x.to_mv::<f64>() * &xi.to_mv()), &one, 1.0));
        let v = &x.to_mv::<f64>() * &y.to_mv();
        let vi = clifford_group_inverse(&v).map_err(err)?;
        worst[3] = worst[3].max(rel(&(&vi * &v), &one, 1.0));
    }
    let secs = t.elapsed().as_secs_f64();
    let max = worst.iter().copied().fold(0.0, f64::max);
    Ok((
        max < ALGEBRA_REL && secs < 10.0,
        format!(
            "{triples} triples, max rel error assoc {:.1e} anti {:.1e} invol {:.1e} inverse {:.1e}; {secs:.2} s",
            worst[0], worst[1], worst[2], worst[3]
        ),
    ))
}

fn kernel_points(n: usize, count: usize) -> Vec<Paravector> {
    sample_points(n, count, (1.0, 2.5), (1.0, 2.0), 11)
}

fn c02_kernel(quick: bool) -> Outcome {
    let t = Instant::now();
    let count = if quick { 5 } else { 20 };
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, k) in [(3usize, 0i32), (3, 2), (5, 2), (3, 4)] {
        let spec = StencilSpec::for_laplacian_power((k / 2) as u32);
        let r = kernel_membership(&gk(n, k), k, &kernel_points(n, count), &spec, KERNEL_DEFECT).map_err(err)?;
        let ok = r.pass && r.min_order >= MIN_ORDER;
        pass &= ok;
        let ord = if r.min_order.is_finite() { format!("{:.2}", r.min_order) } else { "noise floor".into() };
        parts.push(format!("({n},{k}) h={} max {:.1e} order {ord}", spec.h, r.max_defect));
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((pass && secs < 60.0, format!("{} points each; {}; {secs:.1} s", count, parts.join("; "))))
}

fn x_en(n: usize) -> FieldFn {
    let en = Multivector::e(n, n);
    FieldFn::total(n, move |x: &Paravector| mul_para_mv(x, &en))
}

fn c03_separation() -> Outcome {
    let pts = kernel_points(3, 20);
    let f = x_en(3);
    let r = kernel_membership(&f, 2, &pts, &StencilSpec::for_laplacian_power(1), KERNEL_DEFECT).map_err(err)?;
    let spec = StencilSpec::for_laplacian_power(1);
    let mut hmin = f64::INFINITY;
    for x in &pts {
        hmin = hmin.min(hypermonogenic_defect(&f, x, 2, &spec).map_err(err)?.defect);
    }
    Ok((
        r.pass && hmin > 1e-2,
        format!("f = x e_3, k = 2: kholo max {:.1e} (< 1e-6), hypermonogenic min {:.3} (> 1e-2)", r.max_defect, hmin),
    ))
}

fn c04_weinstein() -> Outcome {
    let n = 3;
    let pts = sample_points(n, 5, (1.0, 2.5), (1.2, 2.0), 4);
    let scalar = |g: fn(&Paravector) -> f64| FieldFn::total(n, move |x: &Paravector| Multivector::scalar(n, g(x)));
    let en = Multivector::e(n, n);
    let en2 = en.clone();
    let corpus: Vec<(&str, FieldFn, i32)> = vec![
        ("G_2", gk(n, 2), 2),
        ("G_0", gk(n, 0), 0),
        ("x_n^3", scalar(|x| x.xn().powi(3)), 2),
        ("x_n^2 e_n", FieldFn::total(n, move |x: &Paravector| en.scale_real(x.xn() * x.xn())), 2),
        ("x_0^2", scalar(|x| x.get(0) * x.get(0)), 0),
        ("x_n^4", scalar(|x| x.xn().powi(4)), 2),
    ];
    let spec1 = StencilSpec::for_laplacian_power(1);
    let mut agree = true;
    let mut parts = Vec::new();
    for (name, g, k) in &corpus {
        let j = (*k as u32 + 2) / 2;
        // G_2 is singular at the origin; the default bilaplacian step is
        // tuned for smooth inputs and leaves too much truncation error here
        let specj = if j == 2 { StencilSpec::new(0.04, 4).map_err(err)? } else { StencilSpec::for_laplacian_power(j) };
        let (mut lap, mut wp, mut wq) = (0.0f64, 0.0f64, 0.0f64);
        for x in &pts {
            lap = lap.max(laplacian_defect(g, x, j, &specj).map_err(err)?.defect);
            let (p, q) = weinstein_pair_defect(g, x, *k, &spec1, WeinsteinVariant::InhomogeneousSquare).map_err(err)?;
            wp = wp.max(p.defect);
            wq = wq.max(q.defect);
        }
        let a = lap < WEINSTEIN;
        let b = wp < WEINSTEIN && wq < WEINSTEIN;
        agree &= a == b;
        parts.push(format!("{name} (k={k}): lap {} weinstein {}", a, b));
    }
    let u = FieldFn::total(n, move |x: &Paravector| en2.scale_real(x.xn() * x.xn()));
    let (mut sq, mut lin) = (0.0f64, f64::INFINITY);
    for x in &pts {
        sq = sq.max(weinstein_defect(&u, x, 2, &spec1, WeinsteinVariant::InhomogeneousSquare).map_err(err)?.defect);
        lin = lin.min(weinstein_defect(&u, x, 2, &spec1, WeinsteinVariant::InhomogeneousLinear).map_err(err)?.defect);
    }
    let disc = sq < WEINSTEIN && lin > WEINSTEIN;
    Ok((
        agree && disc,
        format!(
            "{}; monomial x_n^2 e_n: x_n^-2 variant {:.1e}, x_n^-1 variant {:.2}",
            parts.join(", "),
            sq,
            lin
        ),
    ))
}

fn c05_scaling() -> Outcome {
    let pts = kernel_points(3, 5);
    let g = scale_map(&gk(3, 2), 2);
    let r1 = kernel_membership(&g, 0, &pts, &StencilSpec::for_laplacian_power(0), TRANSFORM_DEFECT).map_err(err)?;
    let e = eisenstein(&SeriesSpec::eisenstein(3, -2, 2, 3, 5.0)).map_err(err)?;
    let h = scale_map(e.evaluator(), -2);
    let r2 = kernel_membership(&h, 4, &pts, &StencilSpec::for_laplacian_power(2), TRANSFORM_DEFECT).map_err(err)?;
    Ok((
        r1.pass && r2.pass,
        format!(
            "G_2/x_n^2 at parameter 0: max {:.2e}; eisenstein k=-2 R=5 times x_n^2 at parameter 4: max {:.2e} (tol 1e-5)",
            r1.max_defect, r2.max_defect
        ),
    ))
}

fn c06_transformation() -> Outcome {
    let gens = symmetric_generators(3, 2).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pts = kernel_points(3, 5);
    let spec = StencilSpec::for_laplacian_power(1);
    let mut worst = 0.0f64;
    let mut pass = true;
    for _ in 0..10 {
        let len = 3 + (rng.next_u64() % 6) as usize;
        let m = (0..len).fold(VahlenMatrix::identity(3), |m, _| m.mul(&gens[(rng.next_u64() % gens.len() as u64) as usize]));
        let r = kernel_membership(&slash_transform(&gk(3, 2), &m, 2), 2, &pts, &spec, TRANSFORM_DEFECT).map_err(err)?;
        worst = worst.max(r.max_defect);
        pass &= r.pass;
    }
    Ok((pass, format!("10 words of length 3-8, 5 points each: max kholo defect {worst:.2e} (tol 1e-5)")))
}

fn eisenstein_r20() -> Result<&'static TruncatedForm, String> {
    static FORM: OnceLock<Result<TruncatedForm, String>> = OnceLock::new();
    FORM.get_or_init(|| eisenstein(&SeriesSpec::eisenstein(3, -2, 2, 3, 20.0)).map_err(err)).as_ref().map_err(Clone::clone)
}

fn c07_cusp_value() -> Outcome {
    let t = Instant::now();
    let e = eisenstein_r20()?;
    let v = e.eval(&Paravector::unit(3, 3).scale(10.0)).map_err(err)?;
    let d = (&v - &Multivector::one(3)).norm();
    let secs = t.elapsed().as_secs_f64();
    Ok((
        d < CUSP_VALUE && secs < 120.0,
        format!("{} cosets, |e(10 e_3) - 1| = {d:.2e}, tail bound {:.1e}; {secs:.1} s", e.term_count(), e.tail_bound),
    ))
}

fn c08_decay() -> Outcome {
    let gens = level_generators(3, 2, 3);
    let pts = sample_points(3, 6, (0.5, 1.5), (0.6, 1.2), 8);
    let mut table: Vec<Vec<f64>> = Vec::new();
    for r in [5.0, 10.0, 20.0] {
        let owned;
        let e = if r == 20.0 {
            eisenstein_r20()?
        } else {
            owned = eisenstein(&SeriesSpec::eisenstein(3, -2, 2, 3, r)).map_err(err)?;
            &owned
        };
        let mut row = Vec::new();
        for g in &gens {
            let mut d = 0.0f64;
            for x in &pts {
                d = d.max(e.invariance_defect(g, x).map_err(err)?);
            }
            row.push(d);
        }
        table.push(row);
    }
    let decreasing = (0..gens.len()).filter(|&g| table[0][g] > table[1][g] && table[1][g] > table[2][g]).count();
    let fmt_row = |r: &Vec<f64>| r.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join(" ");
    Ok((
        decreasing == gens.len(),
        format!(
            "{decreasing}/{} generators strictly decreasing; max over 6 points R=5 [{}] R=10 [{}] R=20 [{}]",
            gens.len(),
            fmt_row(&table[0]),
            fmt_row(&table[1]),
            fmt_row(&table[2])
        ),
    ))
}

fn en_point(n: usize) -> Result<HalfSpacePoint, String> {
    HalfSpacePoint::at_height(n, 1.0).map_err(err)
}

fn c09_poincare_decay() -> Outcome {
    let p = poincare(&SeriesSpec::poincare(3, -4, 3, 6.0, en_point(3)?)).map_err(err)?;
    let rep = cusp_test(p.evaluator(), -4, &[VahlenMatrix::identity(3)], &[2.0, 4.0, 8.0], f64::INFINITY).map_err(err)?;
    let v = &rep.values[0];
    let ratios = [v[0] / v[1], v[1] / v[2]];
    Ok((
        ratios.iter().all(|r| *r >= 4.0),
        format!(
            "x_n^4 |P(x_n e_3)| at 2, 4, 8: {:.3e} {:.3e} {:.3e}; ratios {:.2} {:.2} (need >= 4)",
            v[0], v[1], v[2], ratios[0], ratios[1]
        ),
    ))
}

fn c10_non_hypermonogenic() -> Outcome {
    let p = poincare(&SeriesSpec::poincare(3, -2, 3, 4.0, en_point(3)?)).map_err(err)?;
    let pts = sample_points(3, 4, (1.0, 2.0), (1.0, 1.8), 21);
    let scaled = scale_map(p.evaluator(), -2);
    let (s1, s2) = (StencilSpec::for_laplacian_power(1), StencilSpec::for_laplacian_power(2));
    let (mut hmin, mut kmax) = (f64::INFINITY, 0.0f64);
    let mut kpass = true;
    for x in &pts {
        hmin = hmin.min(hypermonogenic_defect(p.evaluator(), x, -2, &s1).map_err(err)?.defect);
        let d = kholo_defect(&scaled, x, 4, &s2).map_err(err)?;
        kmax = kmax.max(d.defect);
        kpass &= d.passes(KERNEL_DEFECT);
    }
    Ok((
        hmin > 10.0 * KERNEL_DEFECT && kpass,
        format!(
            "poincare k=-2 R=4 ({} cosets): hypermonogenic min {hmin:.2e} (> 1e-5); kholo of P x_n^2 at parameter 4 max {kmax:.2e} (< 1e-6)",
            p.term_count()
        ),
    ))
}

fn c11_fourier() -> Outcome {
    // the level-N Eisenstein series is invariant under all integral translations
    let omegas = lowest_shells(&Lattice::for_level(3, 2, 1.0).map_err(err)?, 3);
    let spec = SeriesSpec::eisenstein(3, -2, 2, 3, 4.0).with_summation(Summation::Periodized);
    let e = eisenstein(&spec).map_err(err)?;
    let coeffs = structured_coefficients(&e, &omegas, &DEFAULT_HEIGHTS, 24).map_err(err)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (j, w) in omegas.iter().enumerate() {
        let col: Vec<_> = coeffs.iter().map(|row| row[j].clone()).collect();
        let rec = fit_bessel_profile(&DEFAULT_HEIGHTS, &col, w, -2).map_err(err)?;
        pass &= rec.residual < PROFILE_RESIDUAL && rec.coupling < PROFILE_RESIDUAL;
        parts.push(format!("|w|^2={:.0} residual {:.1e} coupling {:.1e}", w.norm_sqr(), rec.residual, rec.coupling));
    }
    let hs = SeriesSpec::eisenstein(3, 0, 2, 3, 4.0).with_kind(SeriesKind::EisensteinHecke).with_summation(Summation::Periodized);
    let h = eisenstein_hecke(&hs, HECKE_LADDER).map_err(err)?;
    let hc = hecke_coefficients(&h, &omegas, &DEFAULT_HEIGHTS, 16).map_err(err)?;
    let mut hres = Vec::new();
    for (j, w) in omegas.iter().enumerate() {
        let col: Vec<_> = hc.iter().map(|row| row[j].clone()).collect();
        let (_, res) = fit_monogenic_profile(&DEFAULT_HEIGHTS, &col, w).map_err(err)?;
        pass &= res < HECKE_PROFILE;
        hres.push(format!("{res:.1e}"));
    }
    Ok((pass, format!("k=-2: {}; hecke k=0 exponential residuals {}", parts.join(", "), hres.join(" "))))
}

fn c12_idempotent() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let w = Paravector::new(&[uniform(&mut rng, -3.0, 3.0), uniform(&mut rng, -3.0, 3.0), uniform(&mut rng, -3.0, 3.0), 0.0]);
        worst = worst.max(idempotent_defect(&w));
    }
    Ok((worst <= IDEMPOTENT, format!("100 frequencies, max |P^2 - P| = {worst:.1e}")))
}

fn c13_cusp_criterion() -> Outcome {
    let reps = congruence_representatives(3, 2, 3).map_err(err)?;
    let lat = Lattice::for_level(3, 2, 3.0).map_err(err)?;
    let e = eisenstein(
        &SeriesSpec::eisenstein(3, -2, 2, 3, 4.0).with_summation(Summation::Periodized).with_ewald(EwaldParams::FAST),
    )
    .map_err(err)?;
    let p = poincare(&SeriesSpec::poincare(3, -2, 3, 4.0, en_point(3)?).with_ewald(EwaldParams::FAST)).map_err(err)?;
    let test = |f: &FieldFn| {
        cusp_coefficient_test(f, -2, &reps, &lat, &DEFAULT_HEIGHTS, 8, ZeroModeBasis::Weinstein, ZERO_MODE).map_err(err)
    };
    let re = test(e.evaluator())?;
    let rp = test(p.evaluator())?;
    let describe = |r: &hypercusp_core::fourier::CuspCoefficientReport| match r.failing {
        Some(i) => format!(
            "false (representative {i} of {}, zero-mode size {:.2e})",
            r.total,
            r.profiles.last().map(|p| p.max_norm()).unwrap_or(0.0)
        ),
        None => format!("true ({} representatives)", r.total),
    };
    Ok((!re.pass && rp.pass, format!("eisenstein {}; poincare {}", describe(&re), describe(&rp))))
}

fn c14_orthogonality(quick: bool) -> Outcome {
    let t = Instant::now();
    let samples = if quick { 20_000 } else { 1_000_000 };
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2usize, 3] {
        let e = eisenstein(&SeriesSpec::eisenstein(n, -2, n - 1, 3, 5.0)).map_err(err)?;
        let p = poincare(&SeriesSpec::poincare(n, -2, 3, 4.0, en_point(n)?).with_ewald(EwaldParams::FAST)).map_err(err)?;
        let doms = [FundamentalDomainApprox::new(n, 3, 4).map_err(err)?, FundamentalDomainApprox::new(n, 3, 6).map_err(err)?];
        let fns = [Integrand::new(e.evaluator().clone(), false), Integrand::new(p.evaluator().clone(), false)];
        // P fails the cusp coefficient test, so the override is required
        let mut opts = SamplingOptions::new(samples, 14);
        opts.allow_noncuspidal = true;
        let g = petersson_gram(&fns, &[(0, 1), (1, 1)], -2, &doms, &opts).map_err(err)?;
        for (ep, pp) in g[0].iter().zip(&g[1]) {
            let z = ep.max_zscore();
            let zpp = pp.value.scalar_part() / pp.stderr[0];
            pass &= z < 3.0 && zpp > 5.0;
            parts.push(format!("n={n} L={}: max |<E,P>|/stderr {z:.2}, <P,P> {:.3e} ({zpp:.0} stderr)", ep.word_length, pp.value.scalar_part()));
        }
        let (a, b) = (&g[0][0], &g[0][1]);
        let shift = a
            .value
            .coeffs()
            .iter()
            .zip(b.value.coeffs())
            .zip(a.stderr.iter().zip(&b.stderr))
            .map(|((x, y), (s, t))| if s.max(*t) > 0.0 { (x - y).abs() / s.max(*t) } else { 0.0 })
            .fold(0.0, f64::max);
        pass &= shift <= 1.0;
        parts.push(format!("n={n} L-shift {shift:.2} stderr"));
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((
        pass && secs < 600.0,
        format!("{samples} samples, non-cuspidal override on; {}; {secs:.0} s", parts.join("; ")),
    ))
}

fn c15_maass() -> Outcome {
    let w = Paravector::new(&[1.0 / 3.0, 0.0, 0.0, 0.0]);
    let pw = plane_wave(&w);
    let re = FieldFn::new(3, f64::INFINITY, move |x: &Paravector| Ok(pw.eval(x)?.re()));
    let lifted = maass_lift(&re, 0);
    let lambda = maass_eigenvalue(3, 0);
    let spec = StencilSpec::for_laplacian_power(1);
    let mut worst = 0.0f64;
    let mut pass = true;
    for x in kernel_points(3, 5) {
        let d = lb_defect(&lifted, &x, lambda, &spec).map_err(err)?;
        worst = worst.max(d.defect);
        pass &= d.passes(MAASS_DEFECT);
    }
    Ok((pass, format!("plane wave w = e_0/3, lambda = {lambda}: max defect {worst:.1e} (tol 1e-6)")))
}
