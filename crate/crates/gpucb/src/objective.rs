//! Black-box objective sources and the observation noise model.
//!
//! Every objective is materialized as a finite candidate set with noiseless
//! values, in maximization orientation. Analytic benchmarks are negated at
//! the source, so every policy maximizes.

use std::collections::HashMap;
use std::path::Path;

use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::gp::fit_posterior;
use crate::kernel::KernelSpec;
use crate::rng::{self, Stream};

/// Analytic benchmark functions (standard minimization forms, negated here).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkName {
    HolderTable,
    CrossInTray,
    Ackley,
}

impl BenchmarkName {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "holder_table" => Ok(BenchmarkName::HolderTable),
            "cross_in_tray" => Ok(BenchmarkName::CrossInTray),
            "ackley" => Ok(BenchmarkName::Ackley),
            other => Err(Error::input(format!("unknown benchmark '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BenchmarkName::HolderTable | BenchmarkName::CrossInTray => 2,
            BenchmarkName::Ackley => 4,
        }
    }

    /// Standard domain box.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            BenchmarkName::HolderTable | BenchmarkName::CrossInTray => vec![(-10.0, 10.0); 2],
            BenchmarkName::Ackley => vec![(-32.768, 32.768); 4],
        }
    }
}

/// Evaluates the negated standard form of a benchmark at `x`.
pub fn eval_benchmark(name: BenchmarkName, x: &[f64]) -> Result<f64> {
    let bounds = name.bounds();
    if x.len() != bounds.len() {
        return Err(Error::input(format!(
            "benchmark {:?} expects dimension {}, got {}",
            name,
            bounds.len(),
            x.len()
        )));
    }
    for (i, (&xi, (lo, hi))) in x.iter().zip(&bounds).enumerate() {
        if !(xi >= *lo && xi <= *hi) {
            return Err(Error::input(format!(
                "coordinate {i} = {xi} outside [{lo}, {hi}]"
            )));
        }
    }
    let pi = std::f64::consts::PI;
    let value = match name {
        BenchmarkName::HolderTable => {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            -(x[0].sin() * x[1].cos() * (1.0 - r / pi).abs().exp()).abs()
        }
        BenchmarkName::CrossInTray => {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let inner = (x[0].sin() * x[1].sin() * (100.0 - r / pi).abs().exp()).abs();
            -0.0001 * (inner + 1.0).powf(0.1)
        }
        BenchmarkName::Ackley => {
            let d = x.len() as f64;
            let (a, b, c) = (20.0, 0.2, 2.0 * pi);
            let s1 = x.iter().map(|v| v * v).sum::<f64>() / d;
            let s2 = x.iter().map(|v| (c * v).cos()).sum::<f64>() / d;
            -a * (-b * s1.sqrt()).exp() - s2.exp() + a + std::f64::consts::E
        }
    };
    Ok(-value)
}

/// Objective provenance.
#[derive(Debug, Clone)]
pub enum ObjectiveKind {
    /// One exact draw from a zero-mean GP prior over a grid.
    GpSamplePath { kernel: KernelSpec, seed: u64 },
    AnalyticBenchmark { name: BenchmarkName },
    Tabular,
}

/// A query against an objective.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    /// A candidate index; valid for every objective kind.
    Index(usize),
    /// An arbitrary point; valid for analytic benchmarks only.
    Point(&'a [f64]),
}

/// A black-box function source over a finite candidate set, plus the
/// i.i.d. Gaussian observation noise model.
#[derive(Debug, Clone)]
pub struct Objective {
    kind: ObjectiveKind,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    noise_variance: f64,
}

/// One exact multivariate-normal prior draw over the grid.
pub fn sample_gp_function(kernel: &KernelSpec, grid: Vec<Vec<f64>>, seed: u64) -> Result<Objective> {
    if grid.is_empty() {
        return Err(Error::input("sample-path grid must be non-empty"));
    }
    let prior = fit_posterior(kernel, &[], &[], 0.0)?;
    let mut stream = rng::stream(seed, &[rng::tag::FUNCTION]);
    let draw = prior.sample_joint(&grid, 1, &mut stream)?;
    let values: Vec<f64> = (0..grid.len()).map(|j| draw[(0, j)]).collect();
    Ok(Objective {
        kind: ObjectiveKind::GpSamplePath {
            kernel: kernel.clone(),
            seed,
        },
        points: grid,
        values,
        noise_variance: 0.0,
    })
}

/// Axis-aligned regular grid: `points_per_dim` equally spaced values in
/// `[lower, upper]` per dimension, in row-major order.
pub fn regular_grid(lower: f64, upper: f64, points_per_dim: usize, dim: usize) -> Vec<Vec<f64>> {
    assert!(points_per_dim >= 1 && dim >= 1);
    let axis: Vec<f64> = if points_per_dim == 1 {
        vec![lower]
    } else {
        (0..points_per_dim)
            .map(|i| lower + (upper - lower) * i as f64 / (points_per_dim - 1) as f64)
            .collect()
    };
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for &v in &axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

impl Objective {
    /// A benchmark objective restricted to a finite candidate pool.
    pub fn from_benchmark(name: BenchmarkName, pool: Vec<Vec<f64>>) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::input("benchmark pool must be non-empty"));
        }
        let values = pool
            .iter()
            .map(|p| eval_benchmark(name, p))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Objective {
            kind: ObjectiveKind::AnalyticBenchmark { name },
            points: pool,
            values,
            noise_variance: 0.0,
        })
    }

    /// Loads a tabular objective from CSV: a header row, then `d` feature
    /// columns followed by one target column.
    pub fn load_tabular(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::input("tabular file is empty"))?;
        let n_cols = header.split(',').count();
        if n_cols < 2 {
            return Err(Error::input(
                "tabular file needs at least one feature column and one target column",
            ));
        }
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut seen: HashMap<Vec<u64>, (usize, f64)> = HashMap::new();
        for (line_idx, line) in lines {
            let row = line_idx + 1; // 1-based, header is row 1
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != n_cols {
                return Err(Error::input(format!(
                    "row {row}: expected {n_cols} columns, found {}",
                    cells.len()
                )));
            }
            let mut feats = Vec::with_capacity(n_cols - 1);
            for (c, cell) in cells[..n_cols - 1].iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::input(format!("row {row}, column {}: cannot parse '{cell}'", c + 1))
                })?;
                if v.is_nan() {
                    return Err(Error::input(format!("row {row}, column {}: NaN", c + 1)));
                }
                feats.push(v);
            }
            let target_cell = cells[n_cols - 1].trim();
            let target: f64 = target_cell.parse().map_err(|_| {
                Error::input(format!("row {row}: cannot parse target '{target_cell}'"))
            })?;
            if target.is_nan() {
                return Err(Error::input(format!("row {row}: target is NaN")));
            }
            let key: Vec<u64> = feats.iter().map(|v| v.to_bits()).collect();
            if let Some(&(prev_row, prev_target)) = seen.get(&key) {
                if prev_target != target {
                    return Err(Error::input(format!(
                        "rows {prev_row} and {row} have identical features but conflicting targets \
                         ({prev_target} vs {target})"
                    )));
                }
            } else {
                seen.insert(key, (row, target));
            }
            points.push(feats);
            values.push(target);
        }
        if points.len() < 2 {
            return Err(Error::input("tabular file needs at least two data rows"));
        }
        Ok(Objective {
            kind: ObjectiveKind::Tabular,
            points,
            values,
            noise_variance: 0.0,
        })
    }

    /// Writes the candidate set back out in the tabular CSV schema.
    pub fn export_tabular(&self, path: impl AsRef<Path>) -> Result<()> {
        let dim = self.dim();
        let mut out = String::new();
        for j in 0..dim {
            out.push_str(&format!("x{j},"));
        }
        out.push_str("y\n");
        for (p, v) in self.points.iter().zip(&self.values) {
            for c in p {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!("{v}\n"));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn with_noise_variance(mut self, noise_variance: f64) -> Result<Self> {
        if !(noise_variance >= 0.0) {
            return Err(Error::input("noise variance must be nonnegative"));
        }
        self.noise_variance = noise_variance;
        Ok(self)
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Maximum noiseless value over the candidate set.
    pub fn true_max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Candidate coordinates as seen by the GP model.
    ///
    /// With `normalize` set, benchmark pools are mapped through their domain
    /// box and tabular features through their empirical ranges onto
    /// `[0, 1]^d`. Sample-path grids are already model coordinates and are
    /// returned unchanged.
    pub fn model_points(&self, normalize: bool) -> Vec<Vec<f64>> {
        if !normalize || matches!(self.kind, ObjectiveKind::GpSamplePath { .. }) {
            return self.points.clone();
        }
        let dim = self.dim();
        let ranges: Vec<(f64, f64)> = match &self.kind {
            ObjectiveKind::AnalyticBenchmark { name } => name.bounds(),
            _ => (0..dim)
                .map(|j| {
                    let lo = self.points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
                    let hi = self
                        .points
                        .iter()
                        .map(|p| p[j])
                        .fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi)
                })
                .collect(),
        };
        self.points
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&ranges)
                    .map(|(v, (lo, hi))| {
                        if hi > lo {
                            (v - lo) / (hi - lo)
                        } else {
                            0.5
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Noiseless objective value for a query.
    pub fn noiseless(&self, query: Query) -> Result<f64> {
        match query {
            Query::Index(i) => self.values.get(i).copied().ok_or_else(|| {
                Error::input(format!(
                    "candidate id {i} out of range (have {})",
                    self.len()
                ))
            }),
            Query::Point(x) => match &self.kind {
                ObjectiveKind::AnalyticBenchmark { name } => eval_benchmark(*name, x),
                _ => Err(Error::input(
                    "point queries are only supported for analytic benchmarks; use a candidate id",
                )),
            },
        }
    }

    /// Noisy observation `f(x) + eps`, `eps ~ N(0, noise_variance)`.
    /// Noise is fresh on every call.
    pub fn observe(&self, query: Query, rng: &mut Stream) -> Result<f64> {
        let f = self.noiseless(query)?;
        if self.noise_variance == 0.0 {
            return Ok(f);
        }
        let noise = rand_distr::Normal::new(0.0, self.noise_variance.sqrt())
            .expect("valid std dev")
            .sample(rng);
        Ok(f + noise)
    }
}
