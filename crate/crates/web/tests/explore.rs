use relay_bf_web::{alpha_table, haar_check, sweep_csv};

#[test]
fn haar_check_agrees_with_closed_form() {
    let h = haar_check(&[3.0, 1.0, 1.0, 2.0], 20_000, 3).unwrap();
    assert!((h.mc_diag - h.mu).abs() < 4.0 * h.se_diag);
    assert!((h.mc_off - h.nu).abs() < 4.0 * h.se_off);
    assert!(haar_check(&[1.0], 10, 0).is_err());
}

#[test]
fn alpha_table_shape_and_trend() {
    let rows = alpha_table(4, 10, 20.0, 20.0, 0.3, 7, 1).unwrap();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[6][0] - 0.3).abs() < 1e-15);
    for w in rows.windows(2) {
        assert!(w[1][1] >= w[0][1] && w[1][2] >= w[0][2] && w[1][3] >= w[0][3]);
    }
    assert!(rows.iter().all(|r| r[4] == 0.04));
    assert!(alpha_table(4, 1, 20.0, 20.0, 0.3, 5, 1).is_ok());
}

#[test]
fn sweep_csv_lists_applicable_schemes() {
    let csv = sweep_csv("snr_bc_db", &[0.0, 10.0], 4, 1, 20.0, 20.0, 0.1, 20, 5).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 7);
    let multi = sweep_csv("R", &[1.0, 2.0], 4, 1, 20.0, 20.0, 0.1, 20, 5).unwrap();
    assert!(!multi.contains("svd-"));
    assert!(sweep_csv("bogus", &[1.0], 4, 1, 20.0, 20.0, 0.1, 20, 5).is_err());
}
