use crate::scalar::Real;

/// Polynomial smoothstep used for the transition of `χ` on `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Smoothstep {
    /// `35t⁴ - 84t⁵ + 70t⁶ - 20t⁷`, C³ at the seams.
    #[default]
    Septic,
    /// `10t³ - 15t⁴ + 6t⁵`, C².
    Quintic,
}

impl Smoothstep {
    /// `S(t), S'(t), S''(t)` for `t ∈ [0, 1]`.
    fn eval<T: Real>(self, t: T) -> [T; 3] {
        let one = T::one();
        let s = one - t;
        match self {
            Smoothstep::Septic => {
                let t2 = t * t;
                let t3 = t2 * t;
                let v = t2 * t2 * (T::lit(35.0) - T::lit(84.0) * t + T::lit(70.0) * t2 - T::lit(20.0) * t3);
                let d = T::lit(140.0) * t3 * s * s * s;
                let dd = T::lit(420.0) * t2 * s * s * (one - T::lit(2.0) * t);
                [v, d, dd]
            }
            Smoothstep::Quintic => {
                let t2 = t * t;
                let v = t2 * t * (T::lit(10.0) - T::lit(15.0) * t + T::lit(6.0) * t2);
                let d = T::lit(30.0) * t2 * s * s;
                let dd = T::lit(60.0) * t * s * (one - T::lit(2.0) * t);
                [v, d, dd]
            }
        }
    }
}

/// `χ_B(y) = χ(y/B)`, equal to 1 on `[0, B]` and 0 beyond `2B`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Cutoff<T> {
    pub scale: T,
    pub step: Smoothstep,
}

impl<T: Real> Cutoff<T> {
    pub fn new(scale: T, step: Smoothstep) -> Self {
        Self { scale, step }
    }

    /// `χ(z), χ'(z), χ''(z)` of the unit cutoff.
    pub fn unit(step: Smoothstep, z: T) -> [T; 3] {
        let one = T::one();
        if z <= one {
            [one, T::zero(), T::zero()]
        } else if z >= T::lit(2.0) {
            [T::zero(); 3]
        } else {
            let s = step.eval(z - one);
            [one - s[0], -s[1], -s[2]]
        }
    }

    /// `χ_B, χ_B', χ_B''` at `y`.
    pub fn eval(&self, y: T) -> [T; 3] {
        let b = self.scale;
        let c = Self::unit(self.step, y / b);
        [c[0], c[1] / b, c[2] / (b * b)]
    }

    pub fn value(&self, y: T) -> T {
        Self::unit(self.step, y / self.scale)[0]
    }

    /// `ρ(y/B)` with `ρ(z) = z χ'(z)`; equals `-B ∂_B χ_B(y)`.
    pub fn rho(&self, y: T) -> T {
        let z = y / self.scale;
        z * Self::unit(self.step, z)[1]
    }

    /// `Δχ_B = χ_B'' + 3χ_B'/y`.
    pub fn laplacian(&self, y: T) -> T {
        let c = self.eval(y);
        if y == T::zero() {
            return T::zero();
        }
        c[2] + T::lit(3.0) * c[1] / y
    }
}
