//! Time grids that stop short of the horizon.
//!
//! A grid is a uniform segment on `[0, T - δ_tail]` followed by a geometric
//! tail whose steps shrink toward `T - ε_T`. `δ_tail` is chosen so the first
//! tail step matches the uniform step size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_UNIFORM: usize = 2000;
pub const DEFAULT_TAIL: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub horizon: f64,
    pub n_uniform: usize,
    pub n_tail: usize,
    pub eps_t: f64,
}

impl GridSpec {
    pub fn default_for(horizon: f64) -> Self {
        Self {
            horizon,
            n_uniform: DEFAULT_UNIFORM,
            n_tail: DEFAULT_TAIL,
            eps_t: crate::coefficients::DEFAULT_EPS_FRAC * horizon,
        }
    }

    /// Same layout with every step halved.
    pub fn refined(&self) -> Self {
        Self {
            n_uniform: 2 * self.n_uniform,
            n_tail: 2 * self.n_tail,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    spec: GridSpec,
    /// Start of the geometric tail (equal to the last node when there is none).
    tail_start: f64,
}

pub fn make_grid(horizon: f64, n_uniform: usize, n_tail: usize, eps_t: f64) -> Result<TimeGrid> {
    TimeGrid::new(GridSpec {
        horizon,
        n_uniform,
        n_tail,
        eps_t,
    })
}

impl TimeGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let GridSpec {
            horizon,
            n_uniform,
            n_tail,
            eps_t,
        } = spec;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if n_uniform < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 uniform intervals, got {n_uniform}"
            )));
        }
        if !(eps_t > 0.0 && eps_t < horizon / 2.0) {
            return Err(Error::InvalidGrid(format!(
                "eps_T must lie in (0, T/2), got {eps_t}"
            )));
        }

        let delta_tail = if n_tail == 0 {
            eps_t
        } else {
            tail_length(horizon, n_uniform, n_tail, eps_t)
        };
        let uniform_end = horizon - delta_tail;
        let mut nodes = Vec::with_capacity(n_uniform + n_tail + 1);
        let h = uniform_end / n_uniform as f64;
        nodes.extend((0..n_uniform).map(|i| i as f64 * h));
        nodes.push(uniform_end);
        if n_tail > 0 {
            let ratio = (eps_t / delta_tail).powf(1.0 / n_tail as f64);
            let mut tau = delta_tail;
            for _ in 1..n_tail {
                tau *= ratio;
                nodes.push(horizon - tau);
            }
            nodes.push(horizon - eps_t);
        }
        let grid = Self {
            nodes,
            spec,
            tail_start: uniform_end,
        };
        grid.check_monotone()?;
        Ok(grid)
    }

    pub fn from_spec_with_nodes(spec: GridSpec, required: &[f64]) -> Result<Self> {
        let mut grid = Self::new(spec)?;
        grid.pin_nodes(required)?;
        Ok(grid)
    }

    /// Moves the nearest interior node onto each required time so that
    /// breakpoints and evaluation times land exactly on the grid. Node count is
    /// unchanged.
    pub fn pin_nodes(&mut self, required: &[f64]) -> Result<()> {
        for &r in required {
            let last = *self.nodes.last().unwrap();
            if r <= 0.0 || r >= last {
                continue;
            }
            let idx = self.nearest(r);
            if self.nodes[idx] == r {
                continue;
            }
            if idx == 0 || idx == self.nodes.len() - 1 {
                return Err(Error::InvalidGrid(format!("cannot pin node {r}")));
            }
            if !(self.nodes[idx - 1] < r && r < self.nodes[idx + 1]) {
                return Err(Error::InvalidGrid(format!(
                    "pinning {r} would break monotonicity"
                )));
            }
            self.nodes[idx] = r;
        }
        self.check_monotone()
    }

    fn check_monotone(&self) -> Result<()> {
        if self.nodes.windows(2).all(|w| w[0] < w[1]) {
            Ok(())
        } else {
            Err(Error::InvalidGrid("nodes are not strictly increasing".into()))
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn horizon(&self) -> f64 {
        self.spec.horizon
    }

    pub fn last(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn tail_start(&self) -> f64 {
        self.tail_start
    }

    /// Index of the node closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x < t);
        if idx == 0 {
            return 0;
        }
        if idx == self.nodes.len() {
            return idx - 1;
        }
        if (self.nodes[idx] - t) < (t - self.nodes[idx - 1]) {
            idx
        } else {
            idx - 1
        }
    }

    /// Index of a node equal to `t`, if any.
    pub fn position(&self, t: f64) -> Option<usize> {
        let idx = self.nearest(t);
        (self.nodes[idx] == t).then_some(idx)
    }

    /// Iterator over `(left, right)` cell endpoints.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn same_nodes(&self, other: &TimeGrid) -> bool {
        self.nodes == other.nodes
    }
}

/// Solves `δ (1 - (ε/δ)^{1/n_tail}) = (T - δ)/n_uniform` for `δ` by bisection.
fn tail_length(horizon: f64, n_uniform: usize, n_tail: usize, eps_t: f64) -> f64 {
    let mismatch = |delta: f64| {
        let ratio = (eps_t / delta).powf(1.0 / n_tail as f64);
        delta * (1.0 - ratio) - (horizon - delta) / n_uniform as f64
    };
    let (mut lo, mut hi) = (eps_t, horizon / 2.0);
    if mismatch(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
