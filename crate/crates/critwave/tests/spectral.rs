use critwave::groundstate::{self, LAMBDA_Q, PHI, Q, TWO_V_PLUS_YV};
use critwave::numerics::{RadialFunction, RadialGrid};
use critwave::spectral::*;

fn tab(f: impl Fn(f64) -> [f64; 3], grid: RadialGrid<f64>) -> RadialFunction<f64> {
    RadialFunction::from_fn(grid, |y| {
        let v = f(y);
        (v[0], v[1])
    })
}

#[test]
fn h_annihilates_resonance() {
    let g = RadialGrid::geometric(0.1, 50.0, 4000).unwrap();
    let h = apply_h(&tab(|y| LAMBDA_Q.eval(y), g)).unwrap();
    let n = h.values().len();
    let worst = h.values()[2..n - 2].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn h_on_q_at_origin() {
    let g = RadialGrid::uniform(0.0, 10.0, 2001).unwrap();
    let h = apply_h(&tab(|y| Q.eval(y), g)).unwrap();
    assert!((h.values()[0] + 2.0).abs() < 1e-6, "{}", h.values()[0]);
    let y = 1.0;
    let qv = groundstate::q(y);
    assert!((h.eval(y) + 2.0 * qv.powi(3)).abs() < 1e-6);
}

#[test]
fn h_on_phi() {
    let g = RadialGrid::geometric(0.01, 60.0, 4000).unwrap();
    let h = apply_h(&tab(|y| PHI.eval(y), g)).unwrap();
    for y in [1.0, 3.0, 10.0] {
        let want = TWO_V_PLUS_YV.eval(y)[0] * groundstate::lambda_q(y);
        assert!((h.eval(y) - want).abs() < 1e-6, "{y}: {} vs {want}", h.eval(y));
    }
}

#[test]
fn eigenpair() {
    let e = solve_eigenpair::<f64>(&ShootingConfig::default()).unwrap();
    println!(
        "zeta={:.13} raw={:.13} jump={:e} slope={:e} plain={:e} res={:e} norm={}",
        e.zeta, e.zeta_raw_sign, e.match_jump, e.decay_slope, e.decay_slope_plain, e.residual_rel, e.l2_norm
    );
    assert!((e.zeta - 0.5860808922).abs() < 1e-6);
    assert!((e.psi.eval(0.0) - 1.0).abs() < 1e-6);
    assert!(e.psi.eval_deriv(0.0).abs() < 1e-9);
    assert!(e.decay_slope <= 1e-2);
    assert!(e.residual_rel <= 1e-5);
    assert_eq!(e.interior_zeros(), 0);
    let (ov, bound) = e.resonance_overlap();
    assert!(ov.abs() <= 1e-4 * bound, "{ov} {bound}");
    assert!((e.zeta_raw_sign - e.zeta).abs() < 1e-6);
}

#[test]
fn eigenvalue_stable_in_shooting_radius() {
    let a: f64 = solve_eigenvalue(&ShootingConfig::default()).unwrap();
    let b: f64 = solve_eigenvalue(&ShootingConfig { r_shoot: 30.0, ..Default::default() }).unwrap();
    assert!((a - b).abs() < 1e-7, "{a} {b}");
}

#[test]
fn wrong_bracket() {
    let r = solve_eigenvalue::<f64>(&ShootingConfig { bracket: (0.7, 0.9), ..Default::default() });
    assert!(matches!(r, Err(critwave::Error::NoSignChange { .. })));
}

#[test]
fn deterministic() {
    let a: f64 = solve_eigenvalue(&ShootingConfig::default()).unwrap();
    let b: f64 = solve_eigenvalue(&ShootingConfig::default()).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}
