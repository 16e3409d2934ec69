//! Bounded derivative-free gain tuning.
//!
//! The optimizer is a Nelder-Mead simplex with box projection. The tracking
//! objective is non-smooth (switching terms), so a simplex method is used
//! instead of a gradient-based one; diverged rollouts return a large finite
//! penalty to keep the simplex ordering total.

use crate::control::GainSet;
use crate::model::QuadParams;
use crate::rng::SplitMix64;
use crate::sim::{self, SimConfig};
use crate::trajectory::TrajectorySpec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Objective value charged to rollouts that leave the finite domain.
pub const DIVERGENCE_PENALTY: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuneError {
    #[error("gain component {component} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        component: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid tune problem: {0}")]
    Invalid(&'static str),
}

/// Which gain family a tuned coordinate drives; the value is broadcast
/// uniformly to all six loops of that family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainComponent {
    Alpha,
    K,
    Q,
}

/// The tuning setup: scenario, free gain components and the search box.
#[derive(Debug, Clone)]
pub struct TuneProblem {
    pub params: QuadParams,
    pub base_gains: GainSet,
    pub sim: SimConfig,
    pub trajectory: TrajectorySpec,
    pub free: Vec<GainComponent>,
    pub bounds: (f64, f64),
}

impl TuneProblem {
    pub fn validate(&self) -> Result<(), TuneError> {
        if self.free.is_empty() {
            return Err(TuneError::Invalid("at least one free gain component"));
        }
        if self.bounds.0 >= self.bounds.1
            || !self.bounds.0.is_finite()
            || !self.bounds.1.is_finite()
        {
            return Err(TuneError::Invalid("bounds must satisfy low < high"));
        }
        Ok(())
    }

    /// The free coordinates of the base gain set (loop 0 of each family).
    pub fn initial_point(&self) -> Vec<f64> {
        self.free
            .iter()
            .map(|c| match c {
                GainComponent::Alpha => self.base_gains.alpha[0],
                GainComponent::K => self.base_gains.k[0],
                GainComponent::Q => self.base_gains.q[0],
            })
            .collect()
    }

    /// Base gains with the free coordinates substituted in.
    pub fn apply(&self, point: &[f64]) -> GainSet {
        let mut g = self.base_gains;
        for (component, &v) in self.free.iter().zip(point) {
            match component {
                GainComponent::Alpha => g.alpha = [v; 6],
                GainComponent::K => g.k = [v; 6],
                GainComponent::Q => g.q = [v; 6],
            }
        }
        g
    }
}

/// Total tracking ISE of one rollout. Rejects gains outside the box;
/// rollouts that fail (divergence, invalid gains after projection to a bound)
/// are charged [`DIVERGENCE_PENALTY`] so the optimizer can recover.
pub fn objective(gains: &GainSet, problem: &TuneProblem) -> Result<f64, TuneError> {
    let (lo, hi) = problem.bounds;
    let families: [(&str, &[f64; 6]); 3] =
        [("alpha", &gains.alpha), ("k", &gains.k), ("q", &gains.q)];
    for (name, values) in families {
        for &v in values {
            if !(lo..=hi).contains(&v) {
                return Err(TuneError::OutOfBounds {
                    component: name,
                    value: v,
                    lo,
                    hi,
                });
            }
        }
    }
    Ok(
        match sim::run(&problem.sim, &problem.params, gains, &problem.trajectory) {
            Ok(log) => sim::metrics(&log).total_ise(),
            Err(_) => DIVERGENCE_PENALTY,
        },
    )
}

/// One objective evaluation in the trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

/// Parallelism cap for batched objective evaluations.
fn tuner_threads() -> usize {
    std::env::var("QUADSMC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Evaluates a batch of points, fanning out across threads; results come back
/// in input order so the trace is independent of scheduling.
fn eval_batch<F>(f: &F, points: &[Vec<f64>], threads: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if threads <= 1 || points.len() <= 1 {
        return points.iter().map(|p| f(p)).collect();
    }
    let workers = threads.min(points.len());
    let mut values = vec![0.0; points.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut out = Vec::new();
                    let mut i = w;
                    while i < points.len() {
                        out.push((i, f(&points[i])));
                        i += workers;
                    }
                    out
                })
            })
            .collect();
        for handle in handles {
            for (i, v) in handle.join().expect("objective worker panicked") {
                values[i] = v;
            }
        }
    });
    values
}

struct Recorder {
    trace: Vec<TraceEntry>,
    best_point: Vec<f64>,
    best_value: f64,
    budget: usize,
}

impl Recorder {
    fn record(&mut self, point: &[f64], value: f64) {
        if value < self.best_value {
            self.best_value = value;
            self.best_point = point.to_vec();
        }
        self.trace.push(TraceEntry {
            index: self.trace.len(),
            point: point.to_vec(),
            value,
            best_so_far: self.best_value,
        });
    }

    fn remaining(&self) -> usize {
        self.budget - self.trace.len()
    }
}

/// Nelder-Mead with box projection (reflection 1, expansion 2, contraction
/// 0.5, shrink 0.5). Runs until the evaluation budget is spent; every
/// evaluated point lies inside the box and the whole trace is returned.
pub fn minimize<F>(
    f: &F,
    x0: &[f64],
    bounds: (f64, f64),
    budget: usize,
    seed: u64,
) -> MinimizeResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = x0.len();
    assert!(n >= 1, "minimize needs at least one coordinate");
    assert!(budget > n, "budget must cover the initial simplex");
    let (lo, hi) = bounds;
    let project = |p: &mut Vec<f64>| {
        for v in p.iter_mut() {
            *v = v.clamp(lo, hi);
        }
    };
    let threads = tuner_threads();

    // Initial simplex: the start point plus one vertex per coordinate at a
    // seeded ~10% spread, flipped inward when projection would collapse it.
    let mut rng = SplitMix64::new(seed);
    let mut x0 = x0.to_vec();
    project(&mut x0);
    let mut vertices = vec![x0.clone()];
    for i in 0..n {
        let mut v = x0.clone();
        let spread = 0.10 * v[i].abs().max(0.2) * (1.0 + 0.5 * rng.uniform(-1.0, 1.0));
        v[i] += spread;
        if v[i] > hi {
            v[i] = x0[i] - spread;
        }
        project(&mut v);
        vertices.push(v);
    }

    let mut rec = Recorder {
        trace: Vec::with_capacity(budget),
        best_point: x0.clone(),
        best_value: f64::INFINITY,
        budget,
    };

    let initial_values = eval_batch(f, &vertices, threads);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    for (v, val) in vertices.into_iter().zip(initial_values) {
        rec.record(&v, val);
        simplex.push((v, val));
    }

    while rec.remaining() > 0 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let worst = simplex[n].clone();
        let second_worst = simplex[n - 1].1;
        let best = simplex[0].1;

        let mut centroid = vec![0.0; n];
        for (v, _) in simplex.iter().take(n) {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }
        let blend = |a: f64| {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(worst.0.iter())
                .map(|(c, w)| c + a * (c - w))
                .collect();
            project(&mut p);
            p
        };

        let reflected = blend(1.0);
        let fr = f(&reflected);
        rec.record(&reflected, fr);
        if rec.remaining() == 0 {
            break;
        }

        if fr < best {
            let expanded = blend(2.0);
            let fe = f(&expanded);
            rec.record(&expanded, fe);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < second_worst {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 {
                blend(0.5)
            } else {
                blend(-0.5)
            };
            let fc = f(&contracted);
            rec.record(&contracted, fc);
            if fc < fr.min(worst.1) {
                simplex[n] = (contracted, fc);
            } else {
                // Shrink everything toward the current best vertex.
                let anchor = simplex[0].0.clone();
                let shrunk: Vec<Vec<f64>> = simplex
                    .iter()
                    .skip(1)
                    .map(|(v, _)| {
                        let mut p: Vec<f64> = anchor
                            .iter()
                            .zip(v.iter())
                            .map(|(a, b)| a + 0.5 * (b - a))
                            .collect();
                        project(&mut p);
                        p
                    })
                    .collect();
                let count = shrunk.len().min(rec.remaining());
                let values = eval_batch(f, &shrunk[..count], threads);
                for (i, (v, val)) in shrunk.into_iter().zip(values).enumerate() {
                    rec.record(&v, val);
                    simplex[i + 1] = (v, val);
                }
            }
        }
    }

    MinimizeResult {
        best_point: rec.best_point,
        best_value: rec.best_value,
        evaluations: rec.trace.len(),
        trace: rec.trace,
    }
}

/// Tunes the free gain components of `problem`. Deterministic in
/// (problem, budget, seed); the best objective along the trace is
/// non-increasing by construction.
pub fn optimize(
    problem: &TuneProblem,
    budget: usize,
    seed: u64,
) -> Result<(GainSet, MinimizeResult), TuneError> {
    problem.validate()?;
    let n = problem.free.len();
    if budget < n + 1 {
        return Err(TuneError::Invalid("budget must be at least dimension + 1"));
    }
    let f = |x: &[f64]| {
        let gains = problem.apply(x);
        objective(&gains, problem).unwrap_or(DIVERGENCE_PENALTY)
    };
    let result = minimize(&f, &problem.initial_point(), problem.bounds, budget, seed);
    Ok((problem.apply(&result.best_point), result))
}
