use risync::pulse::{build_window_matrix, rrc_sample};
use risync::PulseModel;

#[test]
fn peak_value_regression() {
    // 64-node trapezoid energy, pinned
    let v = rrc_sample(0.0, 0.3, 4).unwrap();
    assert!((v - 1.082_155_426_039_249).abs() < 1e-12, "{v}");
    // adaptive high-precision energy integral gives 1.0821554046132689
    assert!((v - 1.082_155_404_613_269).abs() < 1e-7);
}

#[test]
fn continuous_through_singular_points() {
    let p = PulseModel::new(0.3, 4, 2).unwrap();
    let edge = 1.0 / (4.0 * 0.3);
    for t in [0.0, edge, -edge] {
        let at = p.sample(t);
        for d in [1e-6, -1e-6] {
            assert!((p.sample(t + d) - at).abs() < 1e-5, "jump near {t}");
        }
    }
}

#[test]
fn truncated_beyond_lag() {
    let p = PulseModel::new(0.3, 4, 2).unwrap();
    assert_eq!(p.sample(4.01), 0.0);
    assert_eq!(p.sample(-7.0), 0.0);
    assert_eq!(p.autocorrelation(9), 0.0);
}

#[test]
fn autocorrelation_shape() {
    let p = PulseModel::new(0.3, 4, 2).unwrap();
    assert_eq!(p.autocorrelation(0), 1.0);
    for tau in 1..=8 {
        assert_eq!(p.autocorrelation(tau), p.autocorrelation(-tau));
        assert!(p.autocorrelation(tau).abs() < 0.05);
    }
}

#[test]
fn window_rows_shift_right() {
    let eta = [1.0, 2.0, 3.0, 4.0];
    let t = build_window_matrix(&eta, 2).unwrap();
    assert_eq!(
        t.row(0).iter().copied().collect::<Vec<_>>(),
        vec![1.0, 2.0, 3.0, 4.0]
    );
    assert_eq!(
        t.row(1).iter().copied().collect::<Vec<_>>(),
        vec![4.0, 1.0, 2.0, 3.0]
    );
    assert!(build_window_matrix(&eta, 5).is_err());
}

#[test]
fn eta_layout() {
    let p = PulseModel::new(0.3, 4, 2).unwrap();
    let eta = p.eta(12);
    assert_eq!(eta.len(), 20);
    assert_eq!(eta[4], 1.0);
    assert!(eta[9..].iter().all(|&v| v == 0.0));
}
