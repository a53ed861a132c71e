use critwave::profile::{assemble_pb1, b1, ProfileConfig};
use critwave::wave_sim::*;
use critwave::Error;
use proptest::prelude::*;

fn q(r: f64) -> f64 {
    1.0 / (1.0 + r * r / 8.0)
}

/// Smooth bump supported in `[c - w, c + w]`.
fn compact(r: f64, a: f64, c: f64, w: f64) -> f64 {
    let x = (r - c) / w;
    if x.abs() >= 1.0 {
        0.0
    } else {
        a * (1.0 - x * x).powi(6)
    }
}

fn state(
    r_max: f64,
    n: usize,
    stencil: Stencil,
    integrator: Integrator,
    f: impl Fn(f64) -> (f64, f64),
) -> WaveState<f64> {
    let grid = WaveGrid::with_stencil(r_max, n, stencil).unwrap();
    WaveState::sample(grid, f, 0.5, integrator).unwrap()
}

fn run(st: &mut WaveState<f64>, steps: usize) {
    let dt = st.dt_max();
    for _ in 0..steps {
        st.advance(dt).unwrap();
    }
}

#[test]
fn zero_data_stays_zero() {
    for stencil in [Stencil::Central4, Stencil::Conservative] {
        let mut st = state(20.0, 200, stencil, Integrator::Rk4, |_| (0.0, 0.0));
        run(&mut st, 100);
        assert!(st.u.iter().chain(&st.ut).all(|&x| x == 0.0));
        assert_eq!(st.energy().total, 0.0);
    }
}

fn pulse(r: f64) -> (f64, f64) {
    (compact(r, 1e-3, 10.0, 6.0), 0.0)
}

#[test]
fn small_amplitude_energy_is_conserved() {
    // h = 0.05, 10⁴ steps: the pulse travels 250 and stays inside r ≤ 300.
    for stencil in [Stencil::Central4, Stencil::Conservative] {
        let mut st = state(300.0, 6000, stencil, Integrator::Rk4, pulse);
        let e0 = st.energy().total;
        run(&mut st, 10_000);
        let e1 = st.energy().total;
        assert!(((e1 - e0) / e0).abs() < 1e-6, "{stencil:?}: {e0:e} -> {e1:e}");
    }
}

fn leapfrog_energy_error(stencil: Stencil, cfl: f64) -> f64 {
    let grid = WaveGrid::with_stencil(150.0, 3000, stencil).unwrap();
    let mut st = WaveState::sample(grid, pulse, cfl, Integrator::Leapfrog).unwrap();
    let e0 = st.energy().total;
    let steps = (100.0 / st.dt_max()).round() as usize;
    run(&mut st, steps);
    ((st.energy().total - e0) / e0).abs()
}

#[test]
fn leapfrog_energy_error_is_second_order_in_dt() {
    for stencil in [Stencil::Central4, Stencil::Conservative] {
        let coarse = leapfrog_energy_error(stencil, 0.5);
        let fine = leapfrog_energy_error(stencil, 0.25);
        assert!(coarse < 1e-3, "{coarse:e}");
        let order = (coarse / fine).log2();
        assert!(order > 1.8 && order < 2.2, "{stencil:?}: order {order}");
    }
}

#[test]
fn finite_speed_of_propagation() {
    let (r0, t_end) = (8.0, 6.0);
    for stencil in [Stencil::Central4, Stencil::Conservative] {
        let mut st = state(30.0, 2400, stencil, Integrator::Rk4, |r| (compact(r, 0.1, 4.0, r0 - 4.0), 0.0));
        let steps = (t_end / st.dt_max()).round() as usize;
        run(&mut st, steps);
        let leak =
            st.grid.r.iter().zip(&st.u).filter(|(&r, _)| r > r0 + st.t).map(|(_, u)| u.abs()).fold(0.0, f64::max);
        assert!(leak <= 1e-10, "{stencil:?}: leak {leak:e}");
    }
}

fn static_drift(n: usize) -> f64 {
    let mut st = state(40.0, n, Stencil::Central4, Integrator::Rk4, |r| (q(r), 0.0));
    let dt = 1.0 / (st.dt_max().recip().ceil());
    let mut worst: f64 = 0.0;
    while st.t < 1.0 - 1e-12 {
        st.advance(dt).unwrap();
        let d = st.grid.r.iter().zip(&st.u).map(|(&r, &u)| (u - q(r)).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    worst
}

#[test]
fn ground_state_drift_is_fourth_order() {
    let coarse = static_drift(200);
    let fine = static_drift(400);
    assert!(coarse < 1e-3, "{coarse:e}");
    let order = (coarse / fine).log2();
    assert!(order > 3.5 && order < 4.6, "observed order {order}");
}

#[test]
fn cfl_is_enforced() {
    let mut st = state(10.0, 100, Stencil::Central4, Integrator::Rk4, |r| (q(r), 0.0));
    let dt = st.dt_max();
    assert!(matches!(st.advance(1.01 * dt), Err(Error::CflViolation { .. })));
    assert!(matches!(st.advance(0.0), Err(Error::CflViolation { .. })));
    let grid = WaveGrid::new(10.0, 100).unwrap();
    let z = vec![0.0; grid.len()];
    assert!(WaveState::new(grid.clone(), z.clone(), z.clone(), CFL_MAX + 0.01, Integrator::Rk4).is_err());
    assert!(WaveState::new(grid, z.clone(), z[1..].to_vec(), 0.5, Integrator::Rk4).is_err());
}

#[test]
fn blow_up_surfaces_as_non_finite_state() {
    let mut st = state(20.0, 200, Stencil::Central4, Integrator::Rk4, |r| (3.0 * q(r), 0.0));
    let dt = st.dt_max();
    let err = (0..100_000).find_map(|_| st.advance(dt).err()).unwrap();
    assert!(matches!(err, Error::NonFiniteState { .. }));
}

#[test]
fn scaling_symmetry() {
    // u_λ(t, r) = λ⁻¹ u(t/λ, r/λ): the scheme is exactly covariant when the
    // grid is rescaled with it, and covariant to discretization error otherwise.
    let f = |r: f64| (0.2 * compact(r, 1.0, 3.0, 3.0), 0.05 * compact(r, 1.0, 2.0, 2.0));
    let lam = 2.0;
    let fl = |r: f64| {
        let (u, v) = f(r / lam);
        (u / lam, v / (lam * lam))
    };
    let mut a = state(30.0, 600, Stencil::Central4, Integrator::Rk4, f);
    let mut b = state(60.0, 600, Stencil::Central4, Integrator::Rk4, fl);
    run(&mut a, 200);
    run(&mut b, 200);
    assert!((b.t - lam * a.t).abs() < 1e-12);
    let exact = a.u.iter().zip(&b.u).map(|(x, y)| (x / lam - y).abs()).fold(0.0, f64::max);
    assert!(exact < 1e-13, "{exact:e}");

    let mut c = state(60.0, 1200, Stencil::Central4, Integrator::Rk4, fl);
    run(&mut c, 400);
    let loose = a.u.iter().enumerate().map(|(i, x)| (x / lam - c.u[2 * i]).abs()).fold(0.0, f64::max);
    assert!(loose < 1e-4, "{loose:e}");
}

fn small_ctx() -> SimContext {
    let cfg = SimConfig { nodes: 4000, ..SimConfig::default() };
    SimContext::new(cfg).unwrap()
}

fn profile_state(ctx: &SimContext, lam: f64, b: f64, r_max: f64, n: usize) -> WaveState<f64> {
    let grid = WaveGrid::new(r_max, n).unwrap();
    let ys: Vec<f64> = grid.r.iter().map(|r| r / lam).collect();
    let p = ctx.family.p(b, &ys).unwrap();
    let lp = ctx.family.lambda_p(b, &ys).unwrap();
    let u = p.iter().map(|p| p / lam).collect();
    let ut = lp.iter().map(|l| b * l / (lam * lam)).collect();
    WaveState::new(grid, u, ut, 0.5, Integrator::Rk4).unwrap()
}

#[test]
fn extraction_recovers_exact_profiles() {
    let ctx = small_ctx();
    let (lam, b) = (0.83, 0.0137);
    let st = profile_state(&ctx, lam, b, 120.0, 6000);
    let (m, eps) = extract_modulation(&st, &ctx.family, &ctx.psi, &ctx.modulation, 1.0).unwrap();
    assert!((m.lambda - lam).abs() < 1e-8, "{}", m.lambda);
    assert!((m.b - b).abs() < 1e-8, "{}", m.b);
    assert!(eps.iter().all(|e| e.abs() < 1e-8));
}

#[test]
fn extraction_is_scale_covariant() {
    let ctx = small_ctx();
    // A perturbed profile and its copy rescaled by 2: u ↦ u(·/2)/2 on a grid twice as long.
    let mut base = profile_state(&ctx, 1.1, 0.02, 100.0, 4000);
    for (u, &r) in base.u.iter_mut().zip(&base.grid.r) {
        *u += compact(r, 1e-4, 3.0, 2.0);
    }
    let mut wide = profile_state(&ctx, 1.1, 0.02, 200.0, 4000);
    for i in 0..base.u.len() {
        wide.u[i] = 0.5 * base.u[i];
        wide.ut[i] = 0.25 * base.ut[i];
    }
    let (m1, e1) = extract_modulation(&base, &ctx.family, &ctx.psi, &ctx.modulation, 1.0).unwrap();
    let (m2, e2) = extract_modulation(&wide, &ctx.family, &ctx.psi, &ctx.modulation, 2.0).unwrap();
    assert!((m2.lambda / m1.lambda - 2.0).abs() < 1e-9);
    assert!((m2.b - m1.b).abs() < 1e-10);
    let d = e1.iter().zip(&e2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-10, "{d:e}");
}

#[test]
fn initial_data_and_constraint_after_100_steps() {
    let ctx = small_ctx();
    let init = init_data(&ctx, 0.02, 0.0, &Perturbation::from_config(&ctx.cfg)).unwrap();
    let bundle =
        assemble_pb1(0.02, &ProfileConfig { m: ctx.cfg.m, nodes: ctx.cfg.profile_nodes, ..ProfileConfig::default() })
            .unwrap();
    let t1_0 = bundle.t1_at(0.0)[0];
    assert!((init.state.u[0] - (1.0 + 4e-4 * t1_0)).abs() < 1e-9);
    assert_eq!(init.intended_kappa_plus, 0.0);

    let (m0, _) = extract_modulation(&init.state, &ctx.family, &ctx.psi, &ctx.modulation, 1.0).unwrap();
    assert!((m0.b - 0.02).abs() < 0.02 * 0.02 / 0.02f64.ln().abs());
    assert!((m0.lambda - 1.0).abs() < 1e-6);

    let mut st = init.state;
    run(&mut st, 100);
    let (m, eps) = extract_modulation(&st, &ctx.family, &ctx.psi, &ctx.modulation, 1.0).unwrap();
    assert!(m.constraint_rel <= 1e-6, "{:e}", m.constraint_rel);
    assert!(eps.iter().all(|e| e.is_finite()));
}

#[test]
fn initial_data_validation() {
    let ctx = small_ctx();
    let eta = Perturbation::from_config(&ctx.cfg);
    assert!(matches!(init_data(&ctx, 0.5, 0.0, &eta), Err(Error::InvalidInput(_))));
    let loud = Perturbation { eta0: Bump { amplitude: 1e-2, center: 5.0, width: 1.0 }, ..eta };
    assert!(matches!(init_data(&ctx, 0.02, 0.0, &loud), Err(Error::InvalidInput(_))));
    let short = SimContext::new(SimConfig { r_max_factor: 1.0, ..ctx.cfg }).unwrap();
    let err = init_data(&short, 0.02, 0.0, &eta).unwrap_err();
    assert!(matches!(err, Error::GridTooShort { .. }));
    assert!(err.is_validation());
    let needed = 2.0 * b1(0.02) + short.s_horizon();
    assert!(matches!(err, Error::GridTooShort { needed: n, .. } if (n - needed).abs() < 1e-9));
}

#[test]
fn mode_projection_trivial_cases() {
    let zeta: f64 = 0.586;
    let k = zeta.sqrt();
    let n2 = 2.4;
    let plus = project_modes(n2, k * n2, zeta);
    assert!((plus.kappa_plus - n2).abs() < 1e-14 && plus.kappa_minus.abs() < 1e-14);
    let minus = project_modes(n2, -k * n2, zeta);
    assert!(minus.kappa_plus.abs() < 1e-14 && (minus.kappa_minus - n2).abs() < 1e-14);
}

#[test]
fn mode_correction_restores_the_profile_velocity() {
    // With the correction, κ± use ∂_s v in place of ∂_s ε.
    let m = Modulation {
        lambda: 1.0,
        b: 0.02,
        iterations: 0,
        constraint_rel: 0.0,
        eps_norm: 0.0,
        eps_psi: 3e-4,
        vs_psi: -2e-4,
        dbp_psi: 0.7,
    };
    let zeta: f64 = 0.586;
    let b_s = -1e-4;
    let on = modes_from(&m, b_s, zeta, true);
    let expect = project_modes(m.eps_psi, m.vs_psi, zeta);
    assert!((on.kappa_plus - expect.kappa_plus).abs() < 1e-18);
    assert!((on.kappa_minus - expect.kappa_minus).abs() < 1e-18);
    let off = modes_from(&m, b_s, zeta, false);
    let raw = project_modes(m.eps_psi, m.vs_psi - b_s * m.dbp_psi, zeta);
    assert_eq!(off.kappa_plus, raw.kappa_plus);
}

#[test]
fn config_text_and_precedence() {
    let mut cfg = SimConfig::default();
    cfg.merge_text(
        "# grid\nnodes = 5000\ncfl=0.4 # tighter\nintegrator = leapfrog\nstencil = conservative\n\ndplus = auto\n",
    )
    .unwrap();
    assert_eq!(cfg.nodes, 5000);
    assert_eq!(cfg.cfl, 0.4);
    assert_eq!(cfg.integrator, Integrator::Leapfrog);
    assert_eq!(cfg.stencil, Stencil::Conservative);
    assert_eq!(cfg.dplus, DPlus::Auto);
    cfg.set("nodes", "6000").unwrap();
    cfg.set("dplus", "-1.5e-5").unwrap();
    assert_eq!(cfg.nodes, 6000);
    assert_eq!(cfg.dplus, DPlus::Value(-1.5e-5));
    assert_eq!(SimConfig::default().b0, 0.02);

    assert!(cfg.set("bogus", "1").is_err());
    assert!(cfg.set("nodes", "many").is_err());
    assert!(cfg.merge_text("nodes 5").is_err());
    assert!(SimConfig { b0: 0.5, ..SimConfig::default() }.validate().is_err());
    assert!(SimConfig { cfl: 0.9, ..SimConfig::default() }.validate().is_err());
    assert!(SimConfig::default().validate().is_ok());
}

#[test]
fn trajectory_rows_are_consistent() {
    let ctx = small_ctx();
    let tr = run_trajectory(&ctx, 5e-4).unwrap();
    assert!(tr.exit.exited());
    assert_eq!(tr.exit.sign, 1);
    assert!(tr.rows.windows(2).all(|w| w[1].t > w[0].t && w[1].s > w[0].s));
    assert!(tr.rows.iter().all(|r| r.lambda > 0.0 && r.constraint_rel < 1e-6 && r.cal_e >= 0.0));
    let last = tr.rows.last().unwrap();
    assert!(last.kappa_plus >= 2.0 * last.b * last.b / last.b.ln().abs());
    assert!((tr.intended_kappa_plus - 0.5 * 5e-4 * ctx.psi_norm2).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, .. ProptestConfig::default() })]

    #[test]
    fn exit_sign_is_monotone_in_dplus(a in -4e-4f64..4e-4, gap in 5e-5f64..4e-4) {
        let ctx = small_ctx();
        let lo = run_trajectory(&ctx, a).unwrap();
        let hi = run_trajectory(&ctx, a + gap).unwrap();
        prop_assert!(lo.exit.sign <= hi.exit.sign);
    }
}
