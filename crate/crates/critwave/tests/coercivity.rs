use critwave::coercivity::*;
use critwave::groundstate::{w, w_hat};
use critwave::numerics::RadialGrid;
use critwave::spectral::{solve_eigenpair, EigenPair, Normalization, ShootingConfig};

fn eigenpair() -> EigenPair<f64> {
    solve_eigenpair(&ShootingConfig::default()).unwrap()
}

fn index_grid() -> RadialGrid<f64> {
    RadialGrid::geometric(1e-3, 1000.0, 6000).unwrap()
}

fn phi_inversion() -> Inversion<f64> {
    let cfg = InversionConfig::phi();
    let grid = RadialGrid::geometric(1e-3, cfg.r_match, cfg.nodes).unwrap();
    invert_b(&phi_source(grid), Decay::PHI, &cfg).unwrap()
}

#[test]
fn potential_closed_form_values() {
    assert!((w(0.0f64) - 6.0).abs() < 1e-14);
    assert!((w(8f64.sqrt()) + 0.75).abs() < 1e-14);
    // Leading tail: 6·64 r⁻⁴ - (9/4)·512 r⁻⁴ = -768 r⁻⁴.
    let r = 1e3f64;
    let lead = 6.0 * 64.0 - 2.25 * 512.0;
    assert!((r.powi(4) * w(r) / lead - 1.0).abs() < 1e-2);
    // Ŵ = W - 6 (1 + r²/8)^{-3}
    for r in [0.3f64, 2.0, 7.0] {
        let q = 1.0 + r * r / 8.0;
        assert!((w_hat(r) - (w(r) - 6.0 / (q * q * q))).abs() < 1e-13);
        assert!((w_hat(r) + 1.5 * r * r / (q * q * q)).abs() < 1e-13);
    }
}

#[test]
fn direct_index_counts() {
    let g = index_grid();
    let full = count_index_direct(&g, Potential::W).unwrap();
    assert!(full.zero_count <= 2);
    let hat = count_index_direct(&g, Potential::WHat).unwrap();
    assert_eq!(hat.zero_count, 2);
    let free = count_index_direct(&g, Potential::Zero).unwrap();
    assert_eq!(free.zero_count, 0);
    assert!((free.far_value.unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn bessel_route_matches_direct_route() {
    let b = count_index_bessel::<f64>().unwrap();
    assert_eq!(b.zero_count, 2);
    let (u1, du1) = b.boundary.unwrap();
    assert!(u1.abs() < 1e-10);
    assert!((du1 + 8.0).abs() < 1e-8);
    assert!(b.k_nonzero);
    let (k1, k2) = (b.k_origin.unwrap(), b.k_origin_half.unwrap());
    assert!(((k1 - k2) / k2).abs() < 1e-2);

    let d = count_index_direct(&index_grid(), Potential::WHat).unwrap();
    assert_eq!(d.zero_count, b.zero_count);
    for (x, y) in d.zeros.iter().zip(&b.zeros) {
        assert!((x - y).abs() < 1e-6 * y, "{x} vs {y}");
    }
    // Û(r) → K/4 far out, with O(r⁻²) corrections.
    let far = d.far_value.unwrap();
    let k = b.k_exact.unwrap();
    assert!((far / (k / 4.0) - 1.0).abs() < 1e-2, "{far} vs {}", k / 4.0);
}

#[test]
fn tau_map_inverts() {
    for r in [0.5f64, 3.0, 40.0] {
        let tau = 1.0 / (1.0 + r * r / 8.0).sqrt();
        assert!((tau_to_r(tau) - r).abs() < 1e-10 * r);
    }
}

#[test]
fn psi_inversion_residual_and_decay() {
    let ep = eigenpair();
    let inv = invert_b(&ep.psi, Decay::InverseSquare, &InversionConfig::psi()).unwrap();
    assert!(inv.residual_rel <= 1e-5, "{}", inv.residual_rel);
    assert!(inv.flatness <= 2e-2, "{}", inv.flatness);
    assert!(inv.far_constant.abs() < 1e-10);
}

#[test]
fn phi_inversion_log_tail() {
    let inv = phi_inversion();
    assert!(inv.residual_rel <= 1e-5);
    // A source -384 r⁻⁴ forces r²U ≈ -192 log r + const.
    let alpha = Decay::PHI.log_coefficient();
    assert_eq!(alpha, -192.0);
    assert!((inv.log_fit.0 / alpha - 1.0).abs() < 1e-2, "{:?}", inv.log_fit);
}

#[test]
fn inversion_is_linear() {
    let ep = eigenpair();
    let cfg = InversionConfig::psi();
    let a = invert_b(&ep.psi, Decay::InverseSquare, &cfg).unwrap();
    let b = invert_b(&ep.psi.scaled(-2.5), Decay::InverseSquare, &cfg).unwrap();
    for (x, y) in a.u.values().iter().zip(b.u.values()) {
        assert!((y + 2.5 * x).abs() <= 1e-9 * (1.0 + x.abs()));
    }
}

#[test]
fn gram_matrix_signs_and_invariants() {
    let ep = eigenpair();
    let ip = invert_b(&ep.psi, Decay::InverseSquare, &InversionConfig::psi()).unwrap();
    let iph = phi_inversion();
    let g = gram_matrix(&ep, &ip, &iph, &GramConfig::default()).unwrap();
    assert!(g.b11 < 0.0 && g.b22 < 0.0 && g.det > 0.0);
    assert_eq!(g.det, g.b11 * g.b22 - g.b12 * g.b12);
    assert!(g.symmetry_rel < 1e-3, "{}", g.symmetry_rel);
    // Ratio built from the reference entries -4.63, 32.65, -574.25.
    let reference = 32.65f64.powi(2) / (4.63 * 574.25);
    assert!((g.ratio - reference).abs() < 2e-2, "{} vs {reference}", g.ratio);
    // Tail coefficient of the three-point fit against α·σ/2 = (-192)(-384)/2 with opposite sign convention.
    let k = -(-192.0 * -384.0) / 2.0;
    assert!((g.k_richardson / k - 1.0).abs() < 1e-2, "{}", g.k_richardson);
    assert!((g.b22 - g.b22_richardson).abs() < 0.1);

    for c in [0.5, 2.0] {
        let scaled = ep.rescaled(c, Normalization::Origin);
        let ips = invert_b(&scaled.psi, Decay::InverseSquare, &InversionConfig::psi()).unwrap();
        let gs = gram_matrix(&scaled, &ips, &iph, &GramConfig::default()).unwrap();
        assert!((gs.b11 / (c * c * g.b11) - 1.0).abs() < 1e-9);
        assert!((gs.b12 / (c * g.b12) - 1.0).abs() < 1e-9);
        assert!((gs.b22 - g.b22).abs() < 1e-12 * g.b22.abs());
        assert!(gs.b11 < 0.0 && gs.det > 0.0);
        assert!((gs.ratio - g.ratio).abs() < 1e-9);
    }
}

#[test]
fn gram_rejects_short_phi_table() {
    let ep = eigenpair();
    let ip = invert_b(&ep.psi, Decay::InverseSquare, &InversionConfig::psi()).unwrap();
    let mut cfg = InversionConfig::phi();
    cfg.r_match = 1500.0;
    cfg.nodes = 4000;
    let grid = RadialGrid::geometric(1e-3, cfg.r_match, cfg.nodes).unwrap();
    let iph = invert_b(&phi_source(grid), Decay::PHI, &cfg).unwrap();
    let err = gram_matrix(&ep, &ip, &iph, &GramConfig::default()).unwrap_err();
    assert!(err.is_validation());
}

#[test]
fn hardy_constants() {
    let fam = test_family();
    assert_eq!(fam.len(), 20);
    let rep = hardy_spot_check(&fam, &[0.5, 1.0, 2.0], 10.0);
    assert!(rep.identity_max_error < 1e-3);
    assert!(rep.subcoercivity_max_defect < 1e-8);
    // Scale-free ratios.
    for k in 0..3 {
        assert!(rep.scale_variation[k] <= 1e-6, "{k}: {}", rep.scale_variation[k]);
    }
    assert!(rep.worst_c1_hardy.is_finite() && rep.worst_c2 <= 1.0 / 3.0 + 1e-9);

    let g = hardy_spot_check(&[TestFunction::Gaussian { s: 1.0 }], &[1.0], 10.0);
    assert!(g.rows[0].c1_hardy.is_finite() && g.rows[0].c1_hardy > 0.0);
    // Supported in [1, 2].
    let b = hardy_spot_check(&[TestFunction::Bump { c: 1.5, w: 0.5 }], &[1.0], 10.0);
    assert!(b.rows[0].c2 <= 1.0 / 3.0 + 1e-9);
}

#[test]
fn hardy_test_functions_have_consistent_derivatives() {
    for f in test_family() {
        for y in [0.37, 1.3, 2.9, 6.1] {
            let h = 1e-5;
            let (a, b, c) = (f.eval(y - h), f.eval(y), f.eval(y + h));
            assert!((b[1] - (c[0] - a[0]) / (2.0 * h)).abs() < 1e-6 * (1.0 + b[1].abs()), "{f:?}");
            assert!((b[2] - (c[1] - a[1]) / (2.0 * h)).abs() < 1e-5 * (1.0 + b[2].abs()), "{f:?}");
        }
    }
}
