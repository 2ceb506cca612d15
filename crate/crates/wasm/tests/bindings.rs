// Success paths only: constructing a JsError needs a JavaScript host.

use nilfocus_wasm::{classify_json, gtrig_curve, m_star, return_map_curve, rho_limit};

#[test]
fn trig_curve_is_flattened_triples() {
    let d = gtrig_curve(2, 100).unwrap();
    assert_eq!(d.len(), 3 * 101);
    assert_eq!(&d[..3], &[0.0, 1.0, 0.0]);
    for t in d.chunks(3) {
        assert!((t[1].powi(4) + 2.0 * t[2] * t[2] - 1.0).abs() < 1e-8);
    }
}

#[test]
fn return_curve_is_positive_in_the_critical_case() {
    let d = return_map_curve(2, 1, 2, "3/5", 0.4, 4, 1e-10).unwrap();
    assert_eq!(d.len(), 8);
    assert!(d.chunks(2).all(|p| p[1] > 0.0));
    assert!(rho_limit(2, 1, 2, "3/5").unwrap() > 0.0);
}

#[test]
fn classify_report() {
    let v: serde_json::Value = serde_json::from_str(&classify_json(2, 1, 2, "3/5").unwrap()).unwrap();
    assert_eq!(v["stability"], "repeller");
    assert_eq!(m_star(2, 1), "3/5");
}
