//! Empirical constants of the radial Hardy-type inequalities and of the
//! subcoercivity identity for `H`, over a fixed family of smooth test functions.

use crate::groundstate::{LAMBDA_Q, V};
use crate::numerics::quad::{gauss_legendre, radial_edges};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum TestFunction {
    /// `exp(-y²/s²)`
    Gaussian { s: f64 },
    /// `y² exp(-y²/s²)`
    SquareGaussian { s: f64 },
    /// `(1 + y²/a)^{-2}`
    Algebraic { a: f64 },
    /// `(1 - ((y-c)/w)²)⁴` on `|y - c| < w`
    Bump { c: f64, w: f64 },
    /// `cos(ky) exp(-y²/s²)`
    CosGaussian { k: f64, s: f64 },
    /// `(1 + y/a) exp(-y/a)`
    Exponential { a: f64 },
    /// `ΛQ exp(-y²/100)`
    ResonanceGaussian,
}

/// The 20-member sample used by [`hardy_spot_check`].
pub fn test_family() -> Vec<TestFunction> {
    use TestFunction::*;
    let mut f = Vec::with_capacity(20);
    f.extend([0.5, 1.0, 2.0, 4.0, 8.0].map(|s| Gaussian { s }));
    f.extend([1.0, 3.0].map(|s| SquareGaussian { s }));
    f.extend([1.0, 8.0, 30.0].map(|a| Algebraic { a }));
    f.extend([(1.5, 0.5), (3.0, 1.0), (6.0, 2.0), (10.0, 5.0)].map(|(c, w)| Bump { c, w }));
    f.extend([(2.0, 2.0), (5.0, 3.0), (1.0, 6.0)].map(|(k, s)| CosGaussian { k, s }));
    f.extend([1.0, 3.0].map(|a| Exponential { a }));
    f.push(ResonanceGaussian);
    f
}

fn gauss(y: f64, s: f64) -> [f64; 3] {
    let g = (-(y * y) / (s * s)).exp();
    let s2 = s * s;
    [g, -2.0 * y / s2 * g, (-2.0 / s2 + 4.0 * y * y / (s2 * s2)) * g]
}

fn times(p: [f64; 3], g: [f64; 3]) -> [f64; 3] {
    [p[0] * g[0], p[1] * g[0] + p[0] * g[1], p[2] * g[0] + 2.0 * p[1] * g[1] + p[0] * g[2]]
}

impl TestFunction {
    /// `[v, v', v'']` at `y`.
    pub fn eval(&self, y: f64) -> [f64; 3] {
        match *self {
            TestFunction::Gaussian { s } => gauss(y, s),
            TestFunction::SquareGaussian { s } => times([y * y, 2.0 * y, 2.0], gauss(y, s)),
            TestFunction::Algebraic { a } => {
                let u = 1.0 + y * y / a;
                [u.powi(-2), -4.0 * y / a * u.powi(-3), -4.0 / a * u.powi(-3) + 24.0 * y * y / (a * a) * u.powi(-4)]
            }
            TestFunction::Bump { c, w } => {
                let z = (y - c) / w;
                if z.abs() >= 1.0 {
                    return [0.0; 3];
                }
                let m = 1.0 - z * z;
                [m.powi(4), -8.0 * z * m.powi(3) / w, (-8.0 * m.powi(3) + 48.0 * z * z * m * m) / (w * w)]
            }
            TestFunction::CosGaussian { k, s } => {
                let (sn, cs) = (k * y).sin_cos();
                times([cs, -k * sn, -k * k * cs], gauss(y, s))
            }
            TestFunction::Exponential { a } => {
                let t = y / a;
                let e = (-t).exp();
                [(1.0 + t) * e, -t * e / a, (t - 1.0) * e / (a * a)]
            }
            TestFunction::ResonanceGaussian => times(LAMBDA_Q.eval(y), gauss(y, 10.0)),
        }
    }

    /// `[v, v', v'']` of `v(y/λ)`.
    pub fn eval_scaled(&self, y: f64, lambda: f64) -> [f64; 3] {
        let e = self.eval(y / lambda);
        [e[0], e[1] / lambda, e[2] / (lambda * lambda)]
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            TestFunction::Bump { c, w } => vec![c - w, c, c + w],
            _ => Vec::new(),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            TestFunction::Gaussian { s } => format!("gaussian(s={s})"),
            TestFunction::SquareGaussian { s } => format!("y2-gaussian(s={s})"),
            TestFunction::Algebraic { a } => format!("algebraic(a={a})"),
            TestFunction::Bump { c, w } => format!("bump(c={c},w={w})"),
            TestFunction::CosGaussian { k, s } => format!("cos-gaussian(k={k},s={s})"),
            TestFunction::Exponential { a } => format!("exponential(a={a})"),
            TestFunction::ResonanceGaussian => "resonance-gaussian".into(),
        }
    }
}

/// One function at one scale.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HardyRow {
    pub name: String,
    pub lambda: f64,
    /// `∫v²/y² / ∫|∇v|²`
    pub c1_hardy: f64,
    /// `sup y²v² / ∫|∇v|²`
    pub c1_sup: f64,
    /// `∫|∂_y v|²/y² / ∫(Δv)²`
    pub c2: f64,
    /// `(∫(Δv)² - ∫(∂_yy v)²) / ∫|∂_y v|²/y²`, exactly 3 in four dimensions.
    pub identity: f64,
    /// Log-weighted Hardy ratio on `y ≤ R`.
    pub c3: f64,
    /// Annulus ratio on `R ≤ y ≤ 2R` with the `log R` weight.
    pub c4: f64,
    /// Relative defect of `∫(Hu)² = ∫(Δu)² - 2∫V u'² + ∫(ΔV + V²)u²`.
    pub subcoercivity_defect: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HardyReport {
    pub radius: f64,
    pub rows: Vec<HardyRow>,
    pub worst_c1_hardy: f64,
    pub worst_c1_sup: f64,
    pub worst_c2: f64,
    pub worst_c3: f64,
    pub worst_c4: f64,
    pub identity_max_error: f64,
    pub subcoercivity_max_defect: f64,
    /// Largest relative spread across the scales of each ratio, in the order c1_hardy, c1_sup, c2, c3, c4.
    pub scale_variation: [f64; 5],
    pub all_finite: bool,
}

struct Quad {
    edges: Vec<f64>,
}

impl Quad {
    fn new(f: &TestFunction, lambda: f64, radius: f64) -> Self {
        let mut edges: Vec<f64> = radial_edges(1000.0, 48).into_iter().map(|e| e * lambda).collect();
        edges.extend(f.breakpoints().into_iter().map(|b| b * lambda).filter(|&b| b > 0.0));
        edges.extend([1.0, 2.0, radius, 2.0 * radius]);
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
        Self { edges }
    }

    /// `∫_a^b g(y) dy` over panels clipped to `[a, b]`.
    fn int(&self, g: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        self.edges
            .windows(2)
            .filter_map(|w| {
                let (lo, hi) = (w[0].max(a), w[1].min(b));
                (hi > lo).then(|| gauss_legendre(&g, lo, hi))
            })
            .sum()
    }
}

fn row(f: &TestFunction, lambda: f64, radius: f64) -> HardyRow {
    let q = Quad::new(f, lambda, radius);
    let ev = |y: f64| f.eval_scaled(y, lambda);
    let inf = f64::INFINITY;
    let lap = |y: f64| {
        let e = ev(y);
        e[2] + 3.0 * e[1] / y
    };
    let grad = q.int(|y| ev(y)[1].powi(2) * y.powi(3), 0.0, inf);
    let hardy = q.int(|y| ev(y)[0].powi(2) * y, 0.0, inf);
    let grad_y2 = q.int(|y| ev(y)[1].powi(2) * y, 0.0, inf);
    let lap2 = q.int(|y| lap(y).powi(2) * y.powi(3), 0.0, inf);
    let vpp2 = q.int(|y| ev(y)[2].powi(2) * y.powi(3), 0.0, inf);

    let sup = (0..=40_000)
        .map(|i| {
            let y = lambda * 1e-4 * 10f64.powf(7.0 * i as f64 / 40_000.0);
            y * y * ev(y)[0].powi(2)
        })
        .chain(f.breakpoints().into_iter().map(|b| (b * lambda).powi(2) * ev(b * lambda)[0].powi(2)))
        .fold(0.0, f64::max);

    // ∫_0^1 v²/(y⁴(1+|log y|)²) y³dy with y = e^{-t}; the t > 60 remainder uses v(0).
    let head = {
        let g = |t: f64| ev((-t).exp())[0].powi(2) / (1.0 + t).powi(2);
        let panels: f64 = (0..120).map(|i| gauss_legendre(&g, 0.5 * i as f64, 0.5 * (i + 1) as f64)).sum();
        panels + ev(0.0)[0].powi(2) / 61.0
    };
    let c3_lhs = head + q.int(|y| ev(y)[0].powi(2) / (y * (1.0 + y.ln()).powi(2)), 1.0, radius);
    let inner_grad = q.int(|y| ev(y)[1].powi(2) * y, 0.0, radius);
    let local = q.int(|y| ev(y)[0].powi(2) * y.powi(3), 0.0, 2.0);
    let c4_lhs = q.int(|y| ev(y)[0].powi(2) / y, radius, 2.0 * radius);

    let hu2 = q.int(|y| (lap(y) + V.eval(y)[0] * ev(y)[0]).powi(2) * y.powi(3), 0.0, inf);
    let split = lap2 - 2.0 * q.int(|y| V.eval(y)[0] * ev(y)[1].powi(2) * y.powi(3), 0.0, inf)
        + q.int(
            |y| {
                let v = V.eval(y);
                (v[2] + 3.0 * v[1] / y + v[0] * v[0]) * ev(y)[0].powi(2) * y.powi(3)
            },
            0.0,
            inf,
        );

    HardyRow {
        name: f.name(),
        lambda,
        c1_hardy: hardy / grad,
        c1_sup: sup / grad,
        c2: grad_y2 / lap2,
        identity: (lap2 - vpp2) / grad_y2,
        c3: c3_lhs / (inner_grad + local),
        c4: c4_lhs / (radius.ln() * inner_grad + local),
        subcoercivity_defect: (hu2 - split).abs() / hu2,
    }
}

/// Evaluate every ratio for each function of `family` at each scale in `lambdas`.
pub fn hardy_spot_check(family: &[TestFunction], lambdas: &[f64], radius: f64) -> HardyReport {
    let rows: Vec<HardyRow> = family.iter().flat_map(|f| lambdas.iter().map(move |&l| row(f, l, radius))).collect();
    let worst = |g: fn(&HardyRow) -> f64| rows.iter().map(g).fold(0.0, f64::max);
    let keys: [fn(&HardyRow) -> f64; 5] = [|r| r.c1_hardy, |r| r.c1_sup, |r| r.c2, |r| r.c3, |r| r.c4];
    let mut scale_variation = [0.0; 5];
    for (k, key) in keys.iter().enumerate() {
        for chunk in rows.chunks(lambdas.len().max(1)) {
            let (mn, mx) =
                chunk.iter().map(key).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if mx > 0.0 {
                scale_variation[k] = f64::max(scale_variation[k], (mx - mn) / mx);
            }
        }
    }
    let all_finite = rows.iter().all(|r| {
        [r.c1_hardy, r.c1_sup, r.c2, r.identity, r.c3, r.c4, r.subcoercivity_defect].iter().all(|v| v.is_finite())
    });
    HardyReport {
        radius,
        worst_c1_hardy: worst(|r| r.c1_hardy),
        worst_c1_sup: worst(|r| r.c1_sup),
        worst_c2: worst(|r| r.c2),
        worst_c3: worst(|r| r.c3),
        worst_c4: worst(|r| r.c4),
        identity_max_error: rows.iter().map(|r| (r.identity - 3.0).abs()).fold(0.0, f64::max),
        subcoercivity_max_defect: worst(|r| r.subcoercivity_defect),
        scale_variation,
        all_finite,
        rows,
    }
}
