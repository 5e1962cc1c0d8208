use cascade_wasm::{entropy_profile, kerr_curve, pair_curve};

#[test]
fn pair_curve_layout_and_ideal_values() {
    let v = pair_curve(2.0, 5, 0.0, 0.0, 0.0, 0.0).unwrap();
    assert_eq!(v.len(), 20);
    for p in v.chunks(4) {
        let a2 = 8.0 * p[0] * p[0];
        assert!((p[1] - a2 / (1.0 + a2)).abs() < 1e-10);
        assert!(p[3] < 1e-10);
    }
    let lossy = pair_curve(2.0, 5, 0.05, 0.0, 0.0, 0.0).unwrap();
    assert!(lossy[4 * 2 + 1] < v[4 * 2 + 1]);
    assert!(pair_curve(2.0, 1, 0.0, 0.0, 0.0, 0.0).is_err());
    assert!(pair_curve(2.0, 5, 0.0, -1.0, 0.0, 0.0).is_err());
}

#[test]
fn kerr_curve_starts_linear() {
    let v = kerr_curve(0.01, 0.0, 0.1, 3).unwrap();
    assert_eq!(v.len(), 9);
    assert!((v[1] - 1.0).abs() < 1e-12 && v[2] == 0.0);
    assert!((v[7] - 1.0).abs() < 0.05);
}

#[test]
fn entropy_profile_of_dimers() {
    let s = entropy_profile(vec![0.5, -0.5, 0.5, -0.5], 1.0).unwrap();
    assert_eq!(s.len(), 5);
    assert!(s[2].abs() < 1e-12 && s[1] > 0.1);
    assert!(entropy_profile(vec![0.5, 0.5], 1.0).is_err());
}
