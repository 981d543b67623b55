use hypercusp_core::clifford::{HalfSpacePoint, Multivector, Paravector};
use hypercusp_core::diffops::FieldFn;
use hypercusp_core::fourier::{bessel_k_half, fit_zero_frequency, idempotent_defect, ZeroModeBasis, DEFAULT_HEIGHTS};
use hypercusp_core::lattice_sum::{EwaldParams, LatticeSum};
use hypercusp_core::petersson::{petersson_product, FundamentalDomainApprox, Integrand, SamplingOptions};
use hypercusp_core::scalar::Complex64;
use hypercusp_core::series::{scale_map, scale_map_inverse};
use hypercusp_core::special::{gamma_p, gamma_q};
use hypercusp_core::vahlen::{symmetric_generators, Lattice, VahlenMatrix, level_generators};
use proptest::prelude::*;

fn mv(n: usize) -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-2.0f64..2.0, 1 << n).prop_map(move |c| Multivector::from_coeffs(n, c).unwrap())
}

fn int_mv(n: usize) -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-9i32..10, 1 << n)
        .prop_map(move |c| Multivector::from_coeffs(n, c.into_iter().map(f64::from).collect()).unwrap())
}

fn para(n: usize) -> impl Strategy<Value = Paravector> {
    prop::collection::vec(-2.0f64..2.0, n + 1).prop_map(|c| Paravector::new(&c))
}

fn upper(n: usize) -> impl Strategy<Value = Paravector> {
    (prop::collection::vec(-1.5f64..1.5, n), 0.3f64..3.0).prop_map(|(mut c, h)| {
        c.push(h);
        Paravector::new(&c)
    })
}

fn word(n: usize, p: usize, max: usize) -> impl Strategy<Value = VahlenMatrix> {
    let gens = symmetric_generators(n, p).unwrap();
    let len = gens.len();
    prop::collection::vec(0..len, 1..=max).prop_map(move |idx| {
        idx.iter().fold(VahlenMatrix::identity(n), |m, &i| m.mul(&gens[i]))
    })
}

fn rel(a: &Multivector, b: &Multivector) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn associativity((a, b, c) in (3usize..=5).prop_flat_map(|n| (mv(n), mv(n), mv(n)))) {
        prop_assert!(rel(&(&(&a * &b) * &c), &(&a * &(&b * &c))) < 1e-12);
    }

    #[test]
    fn integer_associativity_is_exact(a in int_mv(4), b in int_mv(4), c in int_mv(4)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn anti_automorphisms(a in mv(4), b in mv(4)) {
        let ab = &a * &b;
        prop_assert!(rel(&ab.reversion(), &(&b.reversion() * &a.reversion())) < 1e-12);
        prop_assert!(rel(&ab.conjugation(), &(&b.conjugation() * &a.conjugation())) < 1e-12);
        prop_assert!(rel(&ab.main_involution(), &(&a.main_involution() * &b.main_involution())) < 1e-12);
        prop_assert!(rel(&ab.star(), &(&a.star() * &b.star())) < 1e-12);
    }

    #[test]
    fn involutions_square_to_identity(a in mv(5)) {
        prop_assert_eq!(a.reversion().reversion(), a.clone());
        prop_assert_eq!(a.conjugation().conjugation(), a.clone());
        prop_assert_eq!(a.main_involution().main_involution(), a.clone());
        prop_assert_eq!(a.star().star(), a);
    }

    #[test]
    fn paravector_inverse(x in para(4)) {
        prop_assume!(x.norm() > 1e-3);
        let prod = &x.to_mv::<f64>() * &x.inverse().unwrap().to_mv();
        prop_assert!(prod.max_abs_diff(&Multivector::one(4)) < 1e-14);
        let sq = &x.conj().to_mv::<f64>() * &x.to_mv();
        prop_assert!(sq.max_abs_diff(&Multivector::scalar(4, x.norm_sqr())) < 1e-14 * x.norm_sqr().max(1.0));
    }

    #[test]
    fn pq_round_trip(a in mv(4)) {
        let (p, q) = a.pq_split();
        prop_assert_eq!(Multivector::from_pq(&p, &q), a);
    }

    #[test]
    fn words_are_sav_and_act_homomorphically(m1 in word(3, 2, 5), m2 in word(3, 2, 5), x in upper(3)) {
        prop_assert!(m1.is_sav());
        prop_assert!(m1.mul(&m2).is_sav());
        prop_assert!(m1.inverse_sav().is_sav());
        let lhs = m1.mul(&m2).mobius_apply(&x).unwrap();
        let rhs = m1.mobius_apply(&m2.mobius_apply(&x).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn height_identity(m in word(3, 2, 6), x in upper(3)) {
        let y = m.mobius_apply(&x).unwrap();
        prop_assert!(y.xn() > 0.0);
        let r2 = m.denominator(&x).norm_sqr();
        prop_assert!((y.xn() * r2 - x.xn()).abs() < 1e-12 * x.xn().max(1.0));
    }

    #[test]
    fn level_words_map_into_upper_half_space(i in 0usize..64, x in upper(3)) {
        let gens = level_generators(3, 2, 3);
        let m = gens[i % gens.len()].mul(&gens[(i / gens.len()) % gens.len()]);
        prop_assert!(m.in_congruence_subgroup(3).unwrap());
        prop_assert!(m.mobius_apply(&x).unwrap().xn() > 0.0);
    }

    #[test]
    fn translations_fix_bottom_row(m in word(3, 2, 5), i in 0usize..3, s in prop::bool::ANY) {
        let mut t = Paravector::zero(3);
        t.set(i, if s { 3.0 } else { -3.0 });
        let tm = VahlenMatrix::translation(&t).mul(&m);
        prop_assert_eq!(&tm.c, &m.c);
        prop_assert_eq!(&tm.d, &m.d);
    }

    #[test]
    fn incomplete_gamma_complements(twice_a in 1u32..40, x in 0.01f64..60.0) {
        let a = twice_a as f64 / 2.0;
        prop_assert!((gamma_p(a, x) + gamma_q(a, x) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bessel_recurrence(j in 0u32..6, z in 0.1f64..50.0) {
        let nu = j as f64 + 0.5;
        let lhs = bessel_k_half(nu + 1.0, z).unwrap();
        let rhs = bessel_k_half(nu - 1.0, z).unwrap() + 2.0 * nu / z * bessel_k_half(nu, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs);
    }

    #[test]
    fn idempotents(w in prop::collection::vec(-3.0f64..3.0, 4)) {
        let w = Paravector::new(&[w[0], w[1], w[2], 0.0]);
        prop_assume!(w.norm() > 1e-3);
        prop_assert!(idempotent_defect(&w) < 1e-14);
    }

    #[test]
    fn scale_map_round_trip(x in upper(3), k in prop::sample::select(vec![-4, -2, 0, 2, 4])) {
        let f = FieldFn::total(3, |y: &Paravector| Multivector::scalar(3, 1.0 + y.get(0)) + Multivector::e(3, 2).scale_real(y.xn()));
        let g = scale_map_inverse(&scale_map(&f, k), k);
        prop_assert!(g.eval(&x).unwrap().max_abs_diff(&f.eval(&x).unwrap()) < 1e-14 * (1.0 + x.norm()));
    }

    #[test]
    fn zero_mode_fit_recovers_coefficients(c in prop::collection::vec(-1.0f64..1.0, 4), k in prop::sample::select(vec![-4, -2, 2])) {
        let n = 3;
        let en = Multivector::<f64>::e(n, 1);
        let coeffs: Vec<Multivector<Complex64>> = DEFAULT_HEIGHTS.iter().map(|&h| {
            let f = ZeroModeBasis::Weinstein.functions(k, h);
            let p = Multivector::scalar(n, c[0] * f[0] + c[1] * f[1]);
            let q = en.scale_real(c[2] * f[2] + c[3] * f[3]);
            Multivector::from_pq(&p, &q).to_complex()
        }).collect();
        let prof = fit_zero_frequency(&DEFAULT_HEIGHTS, &coeffs, k, ZeroModeBasis::Weinstein).unwrap();
        prop_assert!((prof.a.get(0).re - c[0]).abs() < 1e-9);
        prop_assert!((prof.alpha.get(0).re - c[1]).abs() < 1e-9);
        let mask = en.coeffs().iter().position(|&v| v != 0.0).unwrap();
        prop_assert!((prof.b.get(mask).re - c[2]).abs() < 1e-9);
        prop_assert!((prof.beta.get(mask).re - c[3]).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lattice_sum_is_periodic(y in upper(3), a in -2i64..3, b in -2i64..3) {
        let s = LatticeSum::new(Lattice::for_level(3, 2, 3.0).unwrap(), 6.0, EwaldParams::FAST).unwrap();
        let z = y.add(&Paravector::new(&[3.0 * a as f64, 0.0, 3.0 * b as f64, 0.0]));
        prop_assert!(s.eval(&y).max_abs_diff(&s.eval(&z)) < 1e-12);
    }

    #[test]
    fn petersson_positivity_and_seed_consistency(seed in 0u64..1000) {
        let f = FieldFn::total(2, |x: &Paravector| {
            Multivector::scalar(2, (x.get(0) * 2.0).sin()) + Multivector::e(2, 1).scale_real(x.xn().recip())
        });
        let a = Integrand::new(f, true);
        let dom = FundamentalDomainApprox::new(2, 3, 2).unwrap();
        let r1 = petersson_product(&a, &a, -2, &dom, &SamplingOptions::new(3200, seed)).unwrap();
        let r2 = petersson_product(&a, &a, -2, &dom, &SamplingOptions::new(3200, seed + 1000)).unwrap();
        prop_assert!(r1.value.scalar_part() >= -3.0 * r1.stderr[0]);
        let combined = (r1.stderr[0].powi(2) + r2.stderr[0].powi(2)).sqrt();
        prop_assert!((r1.value.scalar_part() - r2.value.scalar_part()).abs() < 5.0 * combined);
    }
}

#[test]
fn half_space_points_reject_boundary() {
    assert!(HalfSpacePoint::from_coords(&[0.0, 0.0, 0.0, 0.0]).is_err());
}
