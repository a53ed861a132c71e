use critwave::blowup_law::*;
use critwave::profile::Smoothstep;
use critwave::Error;
use proptest::prelude::*;

const ZETA: f64 = 0.586_080_892_248_1;

#[test]
fn g_leading_term_has_constant_offset() {
    // b‖ΛP̃‖² - 64 b log(B₀/4) should be b times a b-independent constant.
    let offs: Vec<f64> = [1e-3, 1e-4]
        .iter()
        .map(|&b| {
            let g = g_functional(b, Smoothstep::Septic).unwrap();
            g.leading / b - 64.0 * (0.5 / b).ln()
        })
        .collect();
    assert!((offs[0] - offs[1]).abs() < 0.05, "{offs:?}");
    let g = g_functional(1e-3, Smoothstep::Septic).unwrap();
    assert!(g.integral > 0.0 && g.g > g.leading);
}

#[test]
fn g_ratio_decreases_towards_one() {
    let r: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&b| g_functional(b, Smoothstep::Septic).unwrap().ratio).collect();
    assert!(r[0] > r[1] && r[1] > r[2] && r[2] > 1.0, "{r:?}");
    assert!(matches!(g_functional(0.5, Smoothstep::Septic), Err(Error::InvalidInput(_))));
}

#[test]
fn j_inverts_the_b_map() {
    for b in [1e-2, 1e-4, 1e-8] {
        let j = j_from_b(b).unwrap();
        assert!(j > 0.0 && j < 1.0);
        assert!((j / (64.0 * j.ln().abs()) / b - 1.0).abs() < 1e-12);
    }
}

#[test]
fn reduced_b_law_is_consistent() {
    let tr = integrate_reduced_system(&ReducedConfig::default()).unwrap();
    assert!(tr.b.windows(2).all(|w| w[1] <= w[0]));
    assert!(tr.lambda.windows(2).all(|w| w[1] <= w[0]));
    assert!(tr.remaining.iter().all(|&r| r > 0.0));
    assert!(tr.lambda_over_remaining < 1.0, "{}", tr.lambda_over_remaining);
    assert!(tr.reparam_error < 1e-4, "{}", tr.reparam_error);
    // Implicit closed form of b_s = -b²/(2L), L = log(1/b): G(b) = 2(L - 1)/b has
    // G' = -2L/b², so G(b(s)) = G(b0) + s.
    let gfun = |b: f64| 2.0 * ((1.0 / b).ln() - 1.0) / b;
    for (&s, &b) in tr.s.iter().zip(&tr.b).step_by(97) {
        let lhs = gfun(b);
        let rhs = gfun(0.01) + s;
        assert!((lhs / rhs - 1.0).abs() < 1e-8, "s = {s}");
    }
    // Laws are approached from below, monotonically over the last decades.
    assert!(tr.b_law_ratio > 0.5 && tr.b_law_ratio < 1.0);
    assert!(tr.lambda_law_ratio > 0.3 && tr.lambda_law_ratio < 1.0);
}

#[test]
fn reduced_laws_disagree_and_flag_it() {
    let b = integrate_reduced_system(&ReducedConfig::default()).unwrap();
    let j = integrate_reduced_system(&ReducedConfig { mode: ReducedMode::J, ..ReducedConfig::default() }).unwrap();
    assert_eq!(b.s.len(), j.s.len());
    let agree = compare_modes(&b, &j);
    assert_eq!(agree.tension, agree.max_rel > 0.05);
    assert!(agree.max_rel > 0.0 && agree.max_rel < 1.0);
    assert!(j.reparam_error < 1e-4);
}

#[test]
fn reduced_system_validates_input() {
    for cfg in [
        ReducedConfig { b0: 0.5, ..ReducedConfig::default() },
        ReducedConfig { s_max: 0.5, ..ReducedConfig::default() },
        ReducedConfig { stations: 3, ..ReducedConfig::default() },
    ] {
        assert!(matches!(integrate_reduced_system(&cfg), Err(Error::InvalidInput(_))));
    }
}

#[test]
fn free_modes_grow_and_decay_exactly() {
    let k = ZETA.sqrt();
    let mut up = ModeState { kappa_plus: 1.0, kappa_minus: 0.0 };
    let mut down = ModeState { kappa_plus: 0.0, kappa_minus: 1.0 };
    for _ in 0..1000 {
        up = linear_mode_step(up, ZETA, 1e-2, (0.0, 0.0)).unwrap();
        down = linear_mode_step(down, ZETA, 1e-2, (0.0, 0.0)).unwrap();
    }
    assert!((up.kappa_plus / (10.0 * k).exp() - 1.0).abs() < 1e-12);
    assert!((down.kappa_minus / (-10.0 * k).exp() - 1.0).abs() < 1e-12);
    assert_eq!(up.kappa_minus, 0.0);
    assert!(linear_mode_step(up, ZETA, 0.0, (0.0, 0.0)).is_err());
}

#[test]
fn stable_mode_obeys_duhamel_bound() {
    // Constant forcing E: κ₋ → -E/(2ζ) from below in magnitude.
    let e = 3e-4;
    let mut st = ModeState { kappa_plus: 0.0, kappa_minus: 0.0 };
    let mut peak: f64 = 0.0;
    for _ in 0..5000 {
        st = linear_mode_step(st, ZETA, 1e-2, (0.0, e)).unwrap();
        peak = peak.max(st.kappa_minus.abs());
    }
    let limit = e / (2.0 * ZETA);
    assert!(peak <= limit * (1.0 + 1e-12));
    assert!((st.kappa_minus + limit).abs() < 1e-10 * limit.max(1.0));
}

#[test]
fn modes_match_the_raw_system() {
    // Raw RK4 on y₁' = y₂, y₂' = ζ y₁ against the exact mode step.
    let (mut y1, mut y2) = (0.3, -0.7);
    let st0 = ModeState::from_raw(y1, y2, ZETA);
    let h = 1e-3;
    for _ in 0..2000 {
        let f = |a: f64, b: f64| (b, ZETA * a);
        let k1 = f(y1, y2);
        let k2 = f(y1 + 0.5 * h * k1.0, y2 + 0.5 * h * k1.1);
        let k3 = f(y1 + 0.5 * h * k2.0, y2 + 0.5 * h * k2.1);
        let k4 = f(y1 + h * k3.0, y2 + h * k3.1);
        y1 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y2 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    let st = linear_mode_step(st0, ZETA, 2.0, (0.0, 0.0)).unwrap();
    let (r1, r2) = st.to_raw(ZETA);
    assert!((r1 - y1).abs() < 1e-10 && (r2 - y2).abs() < 1e-10);
}

#[test]
fn dichotomy_bisection_and_scaling() {
    let cfg = DichotomyConfig::default();
    let a = dichotomy_demo(1e-2, &cfg).unwrap();
    let c = dichotomy_demo(3e-3, &cfg).unwrap();
    assert!(a.bracket_width < 1e-12 * 1e-4);
    // The bisected trajectory stays trapped longer than either perturbed one.
    let last = a.perturbed.iter().map(|p| p.1.s).fold(0.0, f64::max);
    assert!(!a.critical.exited || a.critical.s > last);
    let ratio = a.a_star_scaled / c.a_star_scaled;
    assert!(ratio.abs() > 0.5 && ratio.abs() < 2.0, "ratio {ratio}");
    let signs: Vec<i32> = a.perturbed.iter().map(|p| p.1.sign).collect();
    assert_eq!(signs, vec![1, -1]);
    for (_, ev, predicted) in &a.perturbed {
        assert!(ev.exited);
        assert!((ev.s / predicted - 1.0).abs() < 0.1, "{} vs {predicted}", ev.s);
    }
    assert!(a.critical.kminus_envelope.is_finite());
}

#[test]
fn dichotomy_rejects_out_of_range() {
    assert!(matches!(dichotomy_demo(0.2, &DichotomyConfig::default()), Err(Error::InvalidInput(_))));
    assert!(matches!(dichotomy_demo(1e-7, &DichotomyConfig::default()), Err(Error::InvalidInput(_))));
}

proptest! {
    #[test]
    fn mode_step_is_linear(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -2.0f64..2.0, ds in 1e-3f64..1.0) {
        let x = ModeState { kappa_plus: a, kappa_minus: b };
        let y = ModeState { kappa_plus: b, kappa_minus: a };
        let sum = ModeState { kappa_plus: a + c * b, kappa_minus: b + c * a };
        let f = (0.1, -0.2);
        let sx = linear_mode_step(x, ZETA, ds, f).unwrap();
        let sy = linear_mode_step(y, ZETA, ds, (0.0, 0.0)).unwrap();
        let ss = linear_mode_step(sum, ZETA, ds, f).unwrap();
        prop_assert!((ss.kappa_plus - sx.kappa_plus - c * sy.kappa_plus).abs() < 1e-12);
        prop_assert!((ss.kappa_minus - sx.kappa_minus - c * sy.kappa_minus).abs() < 1e-12);
    }

    #[test]
    fn mode_directions_are_eigenvectors(zeta in 0.01f64..4.0) {
        let [vp, vm] = mode_directions(zeta);
        let k = zeta.sqrt();
        // A = [[0,1],[ζ,0]], A V± = ±√ζ V±.
        for (v, l) in [(vp, k), (vm, -k)] {
            prop_assert!((v[1] - l * v[0]).abs() < 1e-14);
            prop_assert!((zeta * v[0] - l * v[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn raw_roundtrip(y1 in -5.0f64..5.0, y2 in -5.0f64..5.0) {
        let (a, b) = ModeState::from_raw(y1, y2, ZETA).to_raw(ZETA);
        prop_assert!((a - y1).abs() < 1e-13 && (b - y2).abs() < 1e-13);
    }
}
