use nilfocus::bounds::{exp_lower, sqrt_bounds};
use nilfocus::gtrig::{self, GenTrig};
use nilfocus::lyapunov::{classify, MValue, Params};
use nilfocus::moments::{antiderivative_odd_i, moment_exact, moment_quad};
use nilfocus::rational::{int, rat, to_f64};
use nilfocus::TrigPolynomial;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn conservation_at_random_angles(l in 1u32..=6, frac in 0.0f64..1.0) {
        let omega = gtrig::period(1, l).unwrap();
        let s = gtrig::eval(l, frac * omega, 1e-12).unwrap();
        prop_assert!(gtrig::residual(l, s.cs, s.sn).abs() <= 1e-9);
    }

    #[test]
    fn periodicity(l in 1u32..=6, frac in 0.0f64..1.0) {
        let omega = gtrig::period(1, l).unwrap();
        let a = gtrig::eval(l, frac * omega, 1e-12).unwrap();
        let b = gtrig::eval(l, frac * omega + omega, 1e-12).unwrap();
        prop_assert!((a.cs - b.cs).hypot(a.sn - b.sn) <= 1e-8);
    }

    #[test]
    fn recurrence_in_sn(l in 2u32..=6, i in 1u32..=8, j in 0u32..=10) {
        let (i, j) = (2 * i, 2 * j);
        let hi = moment_exact(l, i, j).unwrap();
        let lo = moment_exact(l, i - 2, j).unwrap();
        let factor = int(i as i64 - 1) / int(((i - 1) * l + j + 1) as i64);
        prop_assert_eq!(hi.ratio(&lo).unwrap(), factor);
    }

    #[test]
    fn recurrence_in_cs(l in 2u32..=6, i in 0u32..=8, extra in 0u32..=6) {
        let (i, j) = (2 * i, 2 * l + 2 * extra);
        let hi = moment_exact(l, i, j).unwrap();
        let lo = moment_exact(l, i, j - 2 * l).unwrap();
        let factor = int((j - 2 * l + 1) as i64) / int((i as i64 - 1) * l as i64 + j as i64 + 1);
        prop_assert_eq!(hi.ratio(&lo).unwrap(), factor);
    }

    #[test]
    fn antiderivative_differentiates_back(l in 2u32..=6, i in 0u32..=6, j in 0u32..=14) {
        let i = 2 * i + 1;
        let a = antiderivative_odd_i(l, i, j).unwrap();
        let target = TrigPolynomial::monomial(int(1), i, j).reduce(l);
        prop_assert_eq!(a.poly.derivative(l).reduce(l), target);
    }

    #[test]
    fn moment_sign_is_coefficient_sign(l in 2u32..=6, i in 0u32..=10, j in 0u32..=10) {
        let m = moment_exact(l, 2 * i, 2 * j).unwrap();
        prop_assert_eq!(m.signum(), 1);
        prop_assert!(m.to_f64() > 0.0);
    }

    #[test]
    fn exp_lower_brackets(num in 1i64..=1000, m in 1u32..=8) {
        let x = rat(num, 1000);
        let lo = to_f64(&exp_lower(&x, m));
        let xf = num as f64 / 1000.0;
        let k = 2 * m + 2;
        let rem = xf.powi(k as i32) / (1..=k).map(f64::from).product::<f64>();
        let e = (-xf).exp();
        prop_assert!(lo < e + 1e-15);
        prop_assert!(e <= lo + rem + 1e-15);
    }

    #[test]
    fn sqrt_brackets_are_exact(num in 1i64..=100_000, den in 1i64..=1000) {
        let x = rat(num, den);
        let (lo, hi) = sqrt_bounds(&x, 3);
        prop_assert!(&lo * &lo <= x);
        prop_assert!(&hi * &hi >= x);
        prop_assert!(lo <= hi);
    }

    #[test]
    fn classify_ignores_fraction_scaling(
        l in 2u32..=3, k in 1u32..=2, s_extra in 0u32..=4,
        p in -20i64..=20, q in 1i64..=20, c in 2i64..=9,
    ) {
        let s = (l + 1) / 2 + s_extra;
        let a = Params::new(l, k, s, MValue::parse(&format!("{p}/{q}")).unwrap()).unwrap();
        let b = Params::new(l, k, s, MValue::parse(&format!("{}/{}", c * p, c * q)).unwrap()).unwrap();
        let ra = classify(&a).unwrap();
        let rb = classify(&b).unwrap();
        prop_assert_eq!(ra.stability, rb.stability);
        prop_assert_eq!(ra.first_index, rb.first_index);
        prop_assert_eq!(ra.value, rb.value);
    }
}

#[test]
fn first_trig_pair_is_cos_sin() {
    let trig = GenTrig::new(1, 1e-13).unwrap();
    for s in trig.sample(200) {
        assert!((s.cs - s.theta.cos()).abs() < 1e-10);
        assert!((s.sn - s.theta.sin()).abs() < 1e-10);
    }
}

#[test]
fn odd_sn_moment_vanishes_numerically() {
    for l in 2..=4 {
        let trig = GenTrig::new(l, 1e-12).unwrap();
        assert!(moment_quad(&trig, 1, 0, 1e-12).unwrap().abs() < 1e-10);
    }
}

#[test]
fn period_matches_first_return() {
    // Direct integration until the orbit crosses back through (1, 0).
    let omega = gtrig::period(1, 3).unwrap();
    let trig = GenTrig::new(3, 1e-13).unwrap();
    let (cs, sn) = trig.at(omega * (1.0 - 1e-12));
    assert!((cs - 1.0).abs() < 1e-9 && sn.abs() < 1e-9);
}
