//! Fixed-step RK4 integration of the consensus dynamics `x' = -L x`.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DenseMatrix;
use crate::report;
use crate::spectral::{eigenvalues, inf_norm, zero_threshold};

/// States with a component beyond this magnitude count as diverged.
const DIVERGENCE_LIMIT: f64 = 1e150;
/// Default tolerance for [`consensus_reached`].
pub const DEFAULT_REL_TOL: f64 = 1e-6;
/// Upper bound on stored samples; longer runs keep every `stride`-th step.
const MAX_STORED_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    /// Sample times, uniformly spaced by `dt * stride`.
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Integration step.
    pub dt: f64,
    /// Integration steps between stored samples.
    pub stride: usize,
    /// The state overflowed and the trace stops at the last finite sample.
    pub diverged: bool,
}

impl SimulationTrace {
    /// CSV with header `t,x1,...,xn`; a trailing `# diverged` line marks
    /// truncated traces.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |x| x.len());
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{:e}", report::round_sig(*t));
            for xi in x.iter() {
                let _ = write!(out, ",{:e}", report::round_sig(*xi));
            }
            out.push('\n');
        }
        if self.diverged {
            out.push_str("# diverged\n");
        }
        out
    }
}

/// `0.01 / max(1, ‖L‖∞)`.
pub fn default_dt(l: &DenseMatrix) -> f64 {
    0.01 / inf_norm(l).max(1.0)
}

/// `50 / (smallest positive real part of an eigenvalue)`, or 100 when no
/// eigenvalue lies right of the zero threshold.
pub fn default_horizon(l: &DenseMatrix) -> Result<f64> {
    let spec = eigenvalues(l)?;
    Ok(spec
        .min_positive_real(zero_threshold(inf_norm(l)))
        .map_or(100.0, |re| 50.0 / re))
}

/// Deterministic initial state, uniform in `[-1, 1]`.
pub fn seeded_initial_state(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
}

/// Integrates with step `dt` up to `horizon`, storing at most
/// `MAX_STORED_SAMPLES` evenly spaced samples.
pub fn simulate(l: &DenseMatrix, x0: &DVector<f64>, dt: f64, horizon: f64) -> Result<SimulationTrace> {
    let steps = step_count(dt, horizon)?;
    let stride = steps.div_ceil(MAX_STORED_SAMPLES).max(1);
    simulate_with_stride(l, x0, dt, horizon, stride)
}

fn step_count(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(horizon >= dt && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be finite and at least dt, got {horizon}"
        )));
    }
    Ok((horizon / dt - 1e-9).ceil() as usize)
}

/// Like [`simulate`], storing every `stride`-th step.
pub fn simulate_with_stride(
    l: &DenseMatrix,
    x0: &DVector<f64>,
    dt: f64,
    horizon: f64,
    stride: usize,
) -> Result<SimulationTrace> {
    let n = l.nrows();
    if l.ncols() != n || x0.len() != n {
        return Err(Error::Dimension(format!(
            "{}x{} Laplacian with a state of length {}",
            n,
            l.ncols(),
            x0.len()
        )));
    }
    let steps = step_count(dt, horizon)?;
    let norm = inf_norm(l);
    if dt * norm > 0.1 {
        return Err(Error::InvalidArgument(format!(
            "step {dt} exceeds the stability guard 0.1 / ‖L‖ = {}",
            0.1 / norm
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let f = |x: &DVector<f64>| -(l * x);
    let mut x = x0.clone();
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let mut diverged = false;
    for step in 1..=steps {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * (0.5 * dt)));
        let k3 = f(&(&x + &k2 * (0.5 * dt)));
        let k4 = f(&(&x + &k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            diverged = true;
            break;
        }
        if step % stride == 0 || step == steps {
            times.push(step as f64 * dt);
            states.push(x.clone());
        }
    }
    Ok(SimulationTrace {
        times,
        states,
        dt,
        stride,
        diverged,
    })
}

fn spread(x: &DVector<f64>) -> f64 {
    x.max() - x.min()
}

/// True iff the trace did not diverge and the largest spread over the
/// last 5% of samples is at most `rel_tol` times the initial spread.
pub fn consensus_reached(trace: &SimulationTrace, rel_tol: f64) -> Result<bool> {
    let Some(first) = trace.states.first() else {
        return Err(Error::InvalidArgument("empty trace".into()));
    };
    if trace.diverged {
        return Ok(false);
    }
    let len = trace.states.len();
    let window = (len / 20).max(1);
    let tail = trace.states[len - window..]
        .iter()
        .map(spread)
        .fold(0.0, f64::max);
    Ok(tail <= rel_tol * spread(first))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_laplacian_is_equilibrium() {
        let l = DenseMatrix::zeros(3, 3);
        let x0 = DVector::from_vec(vec![0.5, -0.2, 0.9]);
        let tr = simulate(&l, &x0, 0.01, 1.0).unwrap();
        assert_eq!(tr.times.len(), 101);
        assert!(tr.states.iter().all(|x| x == &x0));
    }

    #[test]
    fn two_node_disagreement_decays() {
        let l = DenseMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let x0 = DVector::from_vec(vec![1.0, -1.0]);
        let tr = simulate(&l, &x0, 0.001, 1.0).unwrap();
        let last = tr.states.last().unwrap();
        assert!((tr.times.last().unwrap() - 1.0).abs() < 1e-12);
        assert!((last[0] - last[1] - 2.0 * (-2.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn guards() {
        let l = DenseMatrix::from_row_slice(2, 2, &[10.0, -10.0, 0.0, 0.0]);
        let x0 = DVector::zeros(2);
        assert!(simulate(&l, &x0, 0.1, 1.0).is_err());
        assert!(simulate(&l, &x0, 0.0, 1.0).is_err());
        assert!(simulate(&l, &x0, 0.001, 0.0001).is_err());
        assert!(simulate(&l, &DVector::zeros(3), 0.001, 1.0).is_err());
    }

    #[test]
    fn constant_state_counts_as_consensus() {
        let l = DenseMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let tr = simulate(&l, &DVector::from_element(2, 0.3), 0.01, 1.0).unwrap();
        assert!(consensus_reached(&tr, 1e-6).unwrap());
    }

    #[test]
    fn seeded_state_is_reproducible() {
        let a = seeded_initial_state(5, 42);
        assert_eq!(a, seeded_initial_state(5, 42));
        assert!(a.iter().all(|x| (-1.0..=1.0).contains(x)));
        assert_ne!(a, seeded_initial_state(5, 43));
    }
}
