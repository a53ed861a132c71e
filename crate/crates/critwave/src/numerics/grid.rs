use crate::error::{Error, Result};
use crate::scalar::Real;

/// How the nodes of a [`RadialGrid`] are spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    Geometric { ratio: f64 },
    Custom,
}

/// Strictly increasing radial nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    nodes: Vec<T>,
    grading: Grading,
}

pub const MIN_NODES: usize = 16;

impl<T: Real> RadialGrid<T> {
    pub fn uniform(r_min: T, r_max: T, n: usize) -> Result<Self> {
        check_span(r_min, r_max, n)?;
        let h = (r_max - r_min) / T::from_usize_(n - 1);
        let mut nodes: Vec<T> = (0..n).map(|i| r_min + h * T::from_usize_(i)).collect();
        nodes[n - 1] = r_max;
        Self::build(nodes, Grading::Uniform)
    }

    /// Geometric grading between `r_min > 0` and `r_max`.
    pub fn geometric(r_min: T, r_max: T, n: usize) -> Result<Self> {
        check_span(r_min, r_max, n)?;
        if r_min <= T::zero() {
            return Err(Error::InvalidInput("geometric grid needs r_min > 0".into()));
        }
        let ratio = (r_max / r_min).ln() / T::from_usize_(n - 1);
        let mut nodes: Vec<T> = (0..n).map(|i| r_min * (ratio * T::from_usize_(i)).exp()).collect();
        nodes[0] = r_min;
        nodes[n - 1] = r_max;
        Self::build(nodes, Grading::Geometric { ratio: ratio.exp().f64() })
    }

    /// Any strictly increasing node list.
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        Self::build(nodes, Grading::Custom)
    }

    fn build(nodes: Vec<T>, grading: Grading) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::InvalidInput(format!("grid needs at least {MIN_NODES} nodes, got {}", nodes.len())));
        }
        if nodes[0] < T::zero() || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("grid nodes must be finite and >= 0".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes, grading })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn r_min(&self) -> T {
        self.nodes[0]
    }
    pub fn r_max(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }
    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Index `i` with `nodes[i] <= r < nodes[i+1]`, clamped to valid intervals.
    pub fn locate(&self, r: T) -> usize {
        let n = self.nodes.len();
        match self.nodes.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }
}

fn check_span<T: Real>(r_min: T, r_max: T, n: usize) -> Result<()> {
    if !(r_max > r_min) || r_min < T::zero() || !r_max.is_finite() {
        return Err(Error::InvalidInput(format!("need r_max > r_min >= 0, got [{}, {}]", r_min, r_max)));
    }
    if n < MIN_NODES {
        return Err(Error::InvalidInput(format!("grid needs at least {MIN_NODES} nodes")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_endpoints_exact() {
        let g = RadialGrid::<f64>::geometric(1e-3, 1e3, 4000).unwrap();
        assert_eq!(g.r_min(), 1e-3);
        assert_eq!(g.r_max(), 1e3);
        assert!(matches!(g.grading(), Grading::Geometric { .. }));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::<f64>::uniform(0.0, 1.0, 8).is_err());
        assert!(RadialGrid::<f64>::uniform(1.0, 1.0, 32).is_err());
        assert!(RadialGrid::<f64>::geometric(0.0, 1.0, 32).is_err());
        let mut v: Vec<f64> = (0..20).map(|i| i as f64).collect();
        v[5] = v[4];
        assert!(RadialGrid::from_nodes(v).is_err());
    }

    #[test]
    fn locate_brackets() {
        let g = RadialGrid::<f64>::uniform(0.0, 1.0, 101).unwrap();
        assert_eq!(g.locate(0.0), 0);
        assert_eq!(g.locate(0.505), 50);
        assert_eq!(g.locate(1.0), 99);
        assert_eq!(g.locate(2.0), 99);
    }
}
