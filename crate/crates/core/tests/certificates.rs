use nilfocus::certificate::{Certificate, Status};
use nilfocus::certify::{self, CertifyOptions, TailLemma};
use nilfocus::lyapunov::u_3k1;
use nilfocus::rational::{rat, to_f64};

#[test]
fn term_table_matches_direct_third_constant() {
    for l in 2..=4 {
        for k in 1..=3 {
            let t = certify::build_term_table(l, k).unwrap();
            let direct = u_3k1(l, k).unwrap();
            assert_eq!(t.v().unwrap(), direct.v, "V at ({l},{k})");
            assert_eq!(t.w_total().unwrap(), direct.w, "W at ({l},{k})");
        }
    }
}

#[test]
fn nu_is_increasing() {
    let c = certify::check_nu_increasing(20);
    assert!(c.verdict, "{:?}", c.failed_checks());
    c.recheck().unwrap();
}

#[test]
fn product_identity_holds() {
    for k in 1..=6 {
        for u in [rat(1, 4), rat(1, 6)] {
            let c = certify::check_product_identity(k, &u);
            assert!(c.verdict, "k={k}: {:?}", c.failed_checks());
            assert!(c.float_hint.unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn full_bundle_round_trips_through_json() {
    let certs = certify::certify_all(2, 1, &CertifyOptions::default()).unwrap();
    assert_eq!(certify::overall_status(&certs), Status::Verified);
    let json = serde_json::to_string(&certs).unwrap();
    let back: Vec<Certificate> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, certs);
    for c in &back {
        c.recheck().unwrap();
    }
    let main = back.iter().find_map(|c| c.get("main/b2[0]")).unwrap();
    assert_eq!(main, rat(1531, 23205));
}

#[test]
fn forged_witness_is_rejected() {
    let mut c = certify::certify_instance(3, 2).unwrap();
    let w = c.witness.iter_mut().find(|w| w.name == "V").unwrap();
    w.num = format!("-{}", w.num);
    assert!(c.recheck().is_err());
}

#[test]
fn approx2_needs_a_larger_index_than_originally_used() {
    // With the exponential factor kept, the bound is still negative at N = 3
    // and only turns positive a few steps later.
    assert!(certify::approx2_float(3).unwrap() < 0.0);
    let c = certify::check_general_tail(TailLemma::Approx2, 3, 8).unwrap();
    assert_eq!(c.status, Status::Inconclusive);
    let c = certify::check_general_tail(TailLemma::Approx2, 5, 8).unwrap();
    assert!(c.verdict, "{:?}", c.failed_checks());
}

#[test]
fn nu_two_value() {
    let v = to_f64(&certify::nu(2));
    assert!((1.0 + v - 333.0 / 16720.0).abs() < 1e-15);
}
