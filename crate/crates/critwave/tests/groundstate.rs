use critwave::groundstate::*;
use critwave::numerics::quad::{integrate_panels, radial_edges};
use critwave::numerics::RadialGrid;

fn gamma_grid() -> RadialGrid<f64> {
    RadialGrid::geometric(LAUNCH_Y0, 1e3, 4000).unwrap()
}

#[test]
fn gamma_wronskian_and_origin() {
    let g = compute_gamma(&gamma_grid()).unwrap();
    assert!(g.wronskian_max_rel < 1e-7, "{}", g.wronskian_max_rel);
    let y = 1.0;
    let lq = LAMBDA_Q.eval(y);
    let wr = g.gamma.eval_deriv(y) * lq[0] - g.gamma.eval(y) * lq[1];
    assert!((wr + 1.0).abs() < 1e-8, "{wr}");
    let y = 1e-2;
    assert!((y * y * g.gamma.eval(y) - 0.5).abs() < 1e-3);
    assert!(g.gamma.eval(1.0).abs() < 1e-10);
}

#[test]
fn gamma_tail_flattens() {
    let g = compute_gamma(&gamma_grid()).unwrap();
    let d = g.gamma.eval(1e3) - g.gamma.eval(1e2);
    assert!(d.abs() < 5e-2 && d.abs() > 1e-4, "{d}");
}

#[test]
fn gamma_smooth_through_zero_of_lambda_q() {
    let g = compute_gamma(&gamma_grid()).unwrap();
    let z = 8f64.sqrt();
    for h in [1e-3, 1e-4] {
        let jump = (g.gamma.eval(z + h) - g.gamma.eval(z - h)).abs();
        let djump = (g.gamma.eval_deriv(z + h) - g.gamma.eval_deriv(z - h)).abs();
        assert!(jump < 10.0 * h && djump < 10.0 * h, "{jump} {djump}");
    }
}

#[test]
fn pohozaev_value() {
    let p = pohozaev_constant::<f64>();
    assert!((p.value - 32.0).abs() < 1e-3, "{p:?}");
    assert!(p.error_bar < 1e-3);
    assert!(p.finite);
}

#[test]
fn pohozaev_truncation_at_100() {
    let (raw, corrected) = pohozaev_truncated(100.0f64);
    assert!((corrected - 32.0).abs() <= 1e-2, "{corrected}");
    // Raw truncation misses the 1536/R² surface term.
    assert!(((32.0 - raw) * 1e4 / 1536.0 - 1.0).abs() < 0.05, "{raw}");
}

#[test]
fn lambda_q_norm_log_growth() {
    let f = |y: f64| lambda_q(y).powi(2) * y.powi(3);
    // (ΛQ)² y³ = 64/y - 3072/y³ + O(y⁻⁵), so I(R) = 64 log R + C + 1536/R² + ...
    let c = |r: f64| integrate_panels(&f, &radial_edges(r, 60)) - 64.0 * r.ln() - 1536.0 / (r * r);
    let (c3, c4) = (c(1e3), c(1e4));
    assert!((c3 - c4).abs() < 1e-3, "{c3} {c4}");
}

#[test]
fn resonance_residual() {
    let g = RadialGrid::geometric(0.1f64, 50.0, 4000).unwrap();
    let (lq, ph) = check_resonance(&g);
    assert!(lq.max <= 1e-6, "{lq:?}");
    assert!(ph.max <= 1e-6, "{ph:?}");
    let coarse = check_resonance(&RadialGrid::geometric(0.1f64, 50.0, 500).unwrap()).0;
    let fine = check_resonance(&RadialGrid::geometric(0.1f64, 50.0, 1000).unwrap()).0;
    println!("{coarse:?} {fine:?} {lq:?}");
    assert!(coarse.max / fine.max >= 3.0);
    assert!(coarse.l2 / fine.l2 >= 3.0);
}

#[test]
fn tail_laws() {
    for &y in &[1e2f64, 1e3, 1e4] {
        assert!((y * y * lambda_q(y) + 8.0).abs() < 200.0 / (y * y) + 1e-9);
    }
    let mut prev = f64::NEG_INFINITY;
    for k in 0..50 {
        let y = 50.0 + 20.0 * k as f64;
        let t = y.powi(4) * phi(y);
        assert!(t.abs() < 400.0);
        if k > 0 {
            assert!(t < prev);
        }
        prev = t;
    }
}
