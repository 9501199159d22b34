//! Exact Gaussian-process posterior inference, marginal-likelihood
//! hyperparameter fitting, and exact joint posterior sampling on finite
//! candidate sets.
//!
//! Fitting factorizes `K + noise * I` once (O(t^3)); predictions then cost
//! O(t) for the mean and O(t^2) for the variance per query point.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, GRAM_JITTER};
use crate::rng::Stream;

/// Jitter escalation ladder for posterior system matrices. The first rung is
/// no jitter; escalation stops at 1e-6.
const POSTERIOR_JITTER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Jitter escalation ladder for prior/posterior covariance factorization,
/// always starting from the fixed Gram jitter.
const COVARIANCE_JITTER: [f64; 5] = [GRAM_JITTER, 1e-9, 1e-8, 1e-7, 1e-6];

/// Factorizes `a + jitter * I`, escalating jitter along `ladder`.
/// Returns the factor together with the jitter that succeeded.
fn cholesky_with_jitter(a: &DMatrix<f64>, ladder: &[f64]) -> Result<(Cholesky<f64, Dyn>, f64)> {
    for &jitter in ladder {
        let mut m = a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(m) {
            return Ok((chol, jitter));
        }
    }
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Err(Error::numerical(format!(
        "Cholesky failed after jitter escalation to {:.0e}; eigenvalue range [{min:.3e}, {max:.3e}], \
         condition estimate {:.3e}",
        ladder.last().copied().unwrap_or(0.0),
        max / min.abs().max(f64::MIN_POSITIVE),
    )))
}

/// Immutable fitted GP state.
#[derive(Debug, Clone)]
pub struct Posterior {
    kernel: KernelSpec,
    x_train: Vec<Vec<f64>>,
    y_train: DVector<f64>,
    noise_variance: f64,
    /// `None` when there are no training points (prior).
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
    jitter_used: f64,
}

/// Fits the exact GP posterior for `(x, y)` with the given observation noise.
///
/// A zero noise variance is permitted; the jitter ladder guards the
/// factorization in that case.
pub fn fit_posterior(
    kernel: &KernelSpec,
    x: &[Vec<f64>],
    y: &[f64],
    noise_variance: f64,
) -> Result<Posterior> {
    if x.len() != y.len() {
        return Err(Error::input(format!(
            "got {} training points but {} observations",
            x.len(),
            y.len()
        )));
    }
    if !(noise_variance >= 0.0) {
        return Err(Error::input("noise variance must be nonnegative"));
    }
    if x.is_empty() {
        return Ok(Posterior {
            kernel: kernel.clone(),
            x_train: Vec::new(),
            y_train: DVector::zeros(0),
            noise_variance,
            chol: None,
            alpha: DVector::zeros(0),
            jitter_used: 0.0,
        });
    }
    let n = x.len();
    let mut a = kernel.gram(x)?;
    for i in 0..n {
        a[(i, i)] += noise_variance;
    }
    let (chol, jitter_used) = cholesky_with_jitter(&a, &POSTERIOR_JITTER)?;
    let y_train = DVector::from_column_slice(y);
    let alpha = chol.solve(&y_train);
    Ok(Posterior {
        kernel: kernel.clone(),
        x_train: x.to_vec(),
        y_train,
        noise_variance,
        chol: Some(chol),
        alpha,
        jitter_used,
    })
}

impl Posterior {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn train_len(&self) -> usize {
        self.x_train.len()
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Largest observed training value, if any.
    pub fn max_observed(&self) -> Option<f64> {
        self.y_train.iter().cloned().reduce(f64::max)
    }

    /// Posterior mean and variance at one point. With no training data this
    /// is the prior `(0, k(x, x))`. The variance is clamped at zero.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        let kxx = self.kernel.eval(x, x)?;
        let chol = match &self.chol {
            None => return Ok((0.0, kxx)),
            Some(c) => c,
        };
        let kvec = DVector::from_iterator(
            self.x_train.len(),
            self.x_train
                .iter()
                .map(|p| self.kernel.eval(x, p).expect("dims checked above")),
        );
        let mean = kvec.dot(&self.alpha);
        let var = kxx - kvec.dot(&chol.solve(&kvec));
        Ok((mean, var.max(0.0)))
    }

    /// Batch version of [`predict`](Self::predict); one `(mean, variance)`
    /// per query point.
    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
        let chol = match &self.chol {
            None => {
                return xs
                    .iter()
                    .map(|x| Ok((0.0, self.kernel.eval(x, x)?)))
                    .collect();
            }
            Some(c) => c,
        };
        let ktc = self.kernel.cross_gram(&self.x_train, xs)?;
        let solved = chol.solve(&ktc);
        let mut out = Vec::with_capacity(xs.len());
        for (j, x) in xs.iter().enumerate() {
            let kxx = self.kernel.eval(x, x)?;
            let kcol = ktc.column(j);
            let mean = kcol.dot(&self.alpha);
            let var = kxx - kcol.dot(&solved.column(j));
            out.push((mean, var.max(0.0)));
        }
        Ok(out)
    }

    /// Posterior mean vector and covariance matrix over a candidate set.
    pub fn joint_moments(&self, candidates: &[Vec<f64>]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let kcc = self.kernel.gram(candidates)?;
        match &self.chol {
            None => Ok((DVector::zeros(candidates.len()), kcc)),
            Some(chol) => {
                let ktc = self.kernel.cross_gram(&self.x_train, candidates)?;
                let solved = chol.solve(&ktc);
                let mean = ktc.transpose() * &self.alpha;
                let cov = kcc - ktc.transpose() * solved;
                Ok((mean, cov))
            }
        }
    }

    /// Draws `n_draws` i.i.d. samples of `f` over the candidates from the
    /// exact joint posterior. Rows are draws, columns candidates.
    pub fn sample_joint(
        &self,
        candidates: &[Vec<f64>],
        n_draws: usize,
        rng: &mut Stream,
    ) -> Result<DMatrix<f64>> {
        if candidates.is_empty() {
            return Err(Error::input("sample_joint needs at least one candidate"));
        }
        let m = candidates.len();
        if n_draws == 0 {
            return Ok(DMatrix::zeros(0, m));
        }
        let (mean, cov) = self.joint_moments(candidates)?;
        let (chol, _) = cholesky_with_jitter(&cov, &COVARIANCE_JITTER)?;
        let l = chol.l();
        let mut out = DMatrix::zeros(n_draws, m);
        for i in 0..n_draws {
            let z = DVector::from_iterator(m, (0..m).map(|_| standard_normal(rng)));
            let row = &mean + &l * z;
            out.row_mut(i).copy_from(&row.transpose());
        }
        Ok(out)
    }
}

fn standard_normal(rng: &mut Stream) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    StandardNormal.sample(rng)
}

/// Log marginal likelihood (evidence) of the data under the kernel:
/// `-1/2 y' (K + noise I)^-1 y - 1/2 logdet(K + noise I) - t/2 log(2 pi)`.
/// Empty data gives zero.
pub fn log_marginal_likelihood(
    kernel: &KernelSpec,
    x: &[Vec<f64>],
    y: &[f64],
    noise_variance: f64,
) -> Result<f64> {
    let post = fit_posterior(kernel, x, y, noise_variance)?;
    let chol = match &post.chol {
        None => return Ok(0.0),
        Some(c) => c,
    };
    let n = x.len();
    let quad = post.y_train.dot(&post.alpha);
    let l = chol.l_dirty();
    let log_det_half: f64 = (0..n).map(|i| l[(i, i)].ln()).sum();
    Ok(-0.5 * quad - log_det_half - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln())
}

/// Result of a hyperparameter search.
#[derive(Debug, Clone)]
pub struct HyperFit {
    pub spec: KernelSpec,
    /// Evidence of the returned spec, when it could be evaluated.
    pub evidence: Option<f64>,
    /// True when every attempted evidence evaluation failed numerically;
    /// the returned spec is then the unchanged initial one.
    pub all_failed: bool,
}

const LOG_LS_MIN: f64 = -6.907755278982137; // ln 1e-3
const LOG_LS_MAX: f64 = 6.907755278982137; // ln 1e3
const LINE_SEARCH_EVALS: usize = 8;
const N_STARTS: usize = 5;

struct EvidenceSearch<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    noise_variance: f64,
    init: &'a KernelSpec,
    remaining: usize,
    successes: usize,
}

impl EvidenceSearch<'_> {
    /// Evidence at the given log length scales, or `None` when the budget is
    /// exhausted or the factorization fails.
    fn eval(&mut self, log_ls: &[f64]) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let ls: Vec<f64> = log_ls
            .iter()
            .map(|z| z.exp().clamp(1e-3, 1e3))
            .collect();
        let spec = self.init.with_length_scales(ls).ok()?;
        match log_marginal_likelihood(&spec, self.x, self.y, self.noise_variance) {
            Ok(v) if v.is_finite() => {
                self.successes += 1;
                Some(v)
            }
            _ => None,
        }
    }

    /// Golden-section maximization of the evidence along coordinate `j`.
    fn line_search(&mut self, z: &[f64], j: usize, lo: f64, hi: f64) -> Option<(f64, f64)> {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut probe = |t: f64| -> f64 {
            let mut zt = z.to_vec();
            zt[j] = t;
            self.eval(&zt).unwrap_or(f64::NEG_INFINITY)
        };
        let (mut lo, mut hi) = (lo, hi);
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = probe(x1);
        let mut f2 = probe(x2);
        let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        for _ in 2..LINE_SEARCH_EVALS {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = probe(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = probe(x2);
            }
            let cand = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if cand.1 > best.1 {
                best = cand;
            }
        }
        best.1.is_finite().then_some(best)
    }
}

/// Maximizes the evidence over length scales by multi-start coordinate
/// descent in log space with golden-section line searches.
///
/// `budget` bounds the number of candidate evidence evaluations; the initial
/// spec's own evidence is free. Length scales are confined to `[1e-3, 1e3]`.
/// The returned spec never has lower evidence than `init` (it is `init`
/// itself if no candidate improved on it).
pub fn optimize_hyperparameters(
    x: &[Vec<f64>],
    y: &[f64],
    noise_variance: f64,
    init: &KernelSpec,
    budget: usize,
) -> Result<HyperFit> {
    if x.len() < 2 {
        return Err(Error::input(
            "hyperparameter optimization needs at least two observations",
        ));
    }
    if x.len() != y.len() {
        return Err(Error::input("x/y length mismatch"));
    }
    let d = init.dim();
    let init_log: Vec<f64> = init.length_scales().iter().map(|l| l.ln()).collect();
    let base = log_marginal_likelihood(init, x, y, noise_variance)
        .ok()
        .filter(|v| v.is_finite());

    let mut search = EvidenceSearch {
        x,
        y,
        noise_variance,
        init,
        remaining: 0,
        successes: 0,
    };
    let mut best: Option<(Vec<f64>, f64)> = base.map(|f| (init_log.clone(), f));

    let offsets = [0.0, 1.0, -1.0, 2.0, -2.0];
    let slice = budget / N_STARTS;
    for (s, off) in offsets.iter().enumerate() {
        search.remaining = if s == 0 { slice + budget % N_STARTS } else { slice };
        let mut cur: Vec<f64> = init_log
            .iter()
            .map(|z| (z + off).clamp(LOG_LS_MIN, LOG_LS_MAX))
            .collect();
        let mut cur_f = match search.eval(&cur) {
            Some(f) => f,
            None => continue,
        };
        loop {
            let mut improved = false;
            for j in 0..d {
                if search.remaining < 2 {
                    break;
                }
                let lo = (cur[j] - 2.0).max(LOG_LS_MIN);
                let hi = (cur[j] + 2.0).min(LOG_LS_MAX);
                if let Some((t, f)) = search.line_search(&cur, j, lo, hi) {
                    if f > cur_f + 1e-12 {
                        cur[j] = t;
                        cur_f = f;
                        improved = true;
                    }
                }
            }
            if !improved || search.remaining < 2 {
                break;
            }
        }
        if best.as_ref().map(|(_, f)| cur_f > *f).unwrap_or(true) && cur_f.is_finite() {
            best = Some((cur.clone(), cur_f));
        }
    }

    let all_failed = search.successes == 0 && base.is_none();
    match best {
        Some((z, f)) => {
            let ls: Vec<f64> = z.iter().map(|v| v.exp().clamp(1e-3, 1e3)).collect();
            Ok(HyperFit {
                spec: init.with_length_scales(ls)?,
                evidence: Some(f),
                all_failed,
            })
        }
        None => Ok(HyperFit {
            spec: init.clone(),
            evidence: None,
            all_failed,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn random_instance(
        n: usize,
        d: usize,
        ls: f64,
        noise: f64,
        seed: u64,
    ) -> (KernelSpec, Vec<Vec<f64>>, Vec<f64>) {
        let kernel = KernelSpec::squared_exponential_iso(ls, d).unwrap();
        let mut rng = crate::rng::stream(seed, &[17]);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let _ = noise;
        (kernel, x, y)
    }

    /// Dense direct-solve oracle for the posterior, independent of the
    /// Cholesky path.
    fn dense_predict(
        kernel: &KernelSpec,
        x: &[Vec<f64>],
        y: &[f64],
        noise: f64,
        q: &[f64],
    ) -> (f64, f64) {
        let n = x.len();
        let mut a = kernel.gram(x).unwrap();
        for i in 0..n {
            a[(i, i)] += noise;
        }
        let inv = a.try_inverse().unwrap();
        let kvec = DVector::from_iterator(n, x.iter().map(|p| kernel.eval(q, p).unwrap()));
        let yv = DVector::from_column_slice(y);
        let mean = kvec.dot(&(&inv * &yv));
        let var = kernel.eval(q, q).unwrap() - kvec.dot(&(&inv * &kvec));
        (mean, var)
    }

    #[test]
    fn empty_training_recovers_prior() {
        let kernel = KernelSpec::squared_exponential_iso(0.1, 2).unwrap();
        let post = fit_posterior(&kernel, &[], &[], 1e-4).unwrap();
        let (m, v) = post.predict(&[0.3, 0.4]).unwrap();
        assert_eq!(m, 0.0);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn single_observation_scalar_formulas() {
        let kernel = KernelSpec::squared_exponential_iso(0.1, 1).unwrap();
        let y1 = 0.7;
        let post = fit_posterior(&kernel, &[vec![0.5]], &[y1], 1e-4).unwrap();
        let (m, v) = post.predict(&[0.5]).unwrap();
        assert_abs_diff_eq!(m, y1 / 1.0001, epsilon = 1e-12);
        assert_abs_diff_eq!(m, 0.99990001 * y1, epsilon = 1e-8);
        assert_abs_diff_eq!(v, 1.0 - 1.0 / 1.0001, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 9.999e-5, epsilon = 1e-8);
    }

    #[test]
    fn matches_dense_inverse_oracle() {
        let (kernel, x, y) = random_instance(20, 2, 0.3, 1e-4, 5);
        let post = fit_posterior(&kernel, &x, &y, 1e-4).unwrap();
        let mut rng = crate::rng::stream(5, &[18]);
        for _ in 0..50 {
            let q: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
            let (m, v) = post.predict(&q).unwrap();
            let (om, ov) = dense_predict(&kernel, &x, &y, 1e-4, &q);
            assert_abs_diff_eq!(m, om, epsilon = 1e-8);
            assert_abs_diff_eq!(v, ov.max(0.0), epsilon = 1e-8);
        }
    }

    #[test]
    fn cholesky_factor_reconstructs_system_matrix() {
        let (kernel, x, y) = random_instance(15, 2, 0.3, 1e-4, 9);
        let post = fit_posterior(&kernel, &x, &y, 1e-4).unwrap();
        let chol = post.chol.as_ref().unwrap();
        let rec = chol.l() * chol.l().transpose();
        let mut expect = kernel.gram(&x).unwrap();
        for i in 0..x.len() {
            expect[(i, i)] += 1e-4 + post.jitter_used();
        }
        assert!((rec - expect).abs().max() <= 1e-8);
    }

    #[test]
    fn far_query_returns_prior_moments() {
        let kernel = KernelSpec::squared_exponential_iso(0.1, 1).unwrap();
        let post = fit_posterior(&kernel, &[vec![0.0], vec![0.2]], &[1.0, -1.0], 1e-4).unwrap();
        // Minimum distance to data > 1, so k <= exp(-50).
        let (m, v) = post.predict(&[1.5]).unwrap();
        assert!(m.abs() < 1e-8, "mean {m}");
        assert!(v > 1.0 - 1e-8, "variance {v}");
    }

    #[test]
    fn training_point_query_is_interpolation() {
        let kernel = KernelSpec::squared_exponential_iso(0.05, 1).unwrap();
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![0.1 * i as f64]).collect();
        let y: Vec<f64> = vec![0.3, -0.5, 0.9, 0.1, -0.2, 0.7, -0.9, 0.4];
        let post = fit_posterior(&kernel, &x, &y, 1e-4).unwrap();
        let (m, _) = post.predict(&[0.2]).unwrap();
        let (lo, hi) = (-0.9, 0.9);
        assert!(m >= lo && m <= hi);
        assert!((m - 0.9).abs() < 0.05, "mean {m} should be pulled to y=0.9");
    }

    #[test]
    fn batch_predict_equals_pointwise() {
        let (kernel, x, y) = random_instance(12, 3, 0.4, 1e-4, 13);
        let post = fit_posterior(&kernel, &x, &y, 1e-4).unwrap();
        let grid: Vec<Vec<f64>> = (0..25)
            .map(|i| vec![0.04 * i as f64, 0.5, 0.3])
            .collect();
        let batch = post.predict_batch(&grid).unwrap();
        for (q, &(bm, bv)) in grid.iter().zip(&batch) {
            let (m, v) = post.predict(q).unwrap();
            assert_abs_diff_eq!(m, bm, epsilon = 1e-12);
            assert_abs_diff_eq!(v, bv, epsilon = 1e-12);
        }
    }

    #[test]
    fn log_marginal_likelihood_cases() {
        let kernel = KernelSpec::squared_exponential_iso(0.2, 1).unwrap();
        assert_eq!(log_marginal_likelihood(&kernel, &[], &[], 1e-4).unwrap(), 0.0);

        let y1 = 1.3;
        let got = log_marginal_likelihood(&kernel, &[vec![0.5]], &[y1], 1e-4).unwrap();
        let want = -0.5 * y1 * y1 / 1.0001
            - 0.5 * 1.0001f64.ln()
            - 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);

        // Dense oracle on 15 random points.
        let (kernel, x, y) = random_instance(15, 2, 0.3, 1e-4, 21);
        let got = log_marginal_likelihood(&kernel, &x, &y, 1e-4).unwrap();
        let n = x.len();
        let mut a = kernel.gram(&x).unwrap();
        for i in 0..n {
            a[(i, i)] += 1e-4;
        }
        let yv = DVector::from_column_slice(&y);
        let inv = a.clone().try_inverse().unwrap();
        let det = a.determinant();
        let want =
            -0.5 * yv.dot(&(&inv * &yv)) - 0.5 * det.ln() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        assert_abs_diff_eq!(got, want, epsilon = 1e-8);
    }

    #[test]
    fn variance_never_increases_with_data() {
        for seed in 0..10u64 {
            let (kernel, x, y) = random_instance(12, 2, 0.3, 1e-4, 100 + seed);
            let smaller = fit_posterior(&kernel, &x[..11], &y[..11], 1e-4).unwrap();
            let larger = fit_posterior(&kernel, &x, &y, 1e-4).unwrap();
            let mut rng = crate::rng::stream(seed, &[31]);
            for _ in 0..20 {
                let q: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
                let (_, v_small) = smaller.predict(&q).unwrap();
                let (_, v_large) = larger.predict(&q).unwrap();
                assert!(v_large <= v_small + 1e-10, "{v_large} > {v_small}");
            }
        }
    }

    #[test]
    fn posterior_mean_interpolates_as_noise_vanishes() {
        let kernel = KernelSpec::squared_exponential_iso(0.05, 1).unwrap();
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![0.12 * i as f64]).collect();
        let y: Vec<f64> = vec![0.3, -0.5, 0.9, 0.1, -0.2, 0.7, -0.9, 0.4];
        let post = fit_posterior(&kernel, &x, &y, 1e-10).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            let (m, _) = post.predict(xi).unwrap();
            assert!((m - yi).abs() < 1e-4, "mean {m} vs y {yi}");
        }
    }

    #[test]
    fn sample_joint_empty_and_prior_statistics() {
        let kernel = KernelSpec::squared_exponential_iso(0.1, 1).unwrap();
        let post = fit_posterior(&kernel, &[], &[], 1e-4).unwrap();
        let cands: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64]).collect();

        let mut rng = crate::rng::stream(77, &[1]);
        let empty = post.sample_joint(&cands, 0, &mut rng).unwrap();
        assert_eq!(empty.nrows(), 0);
        assert_eq!(empty.ncols(), 50);

        // Candidates are far apart, so the prior is 50 independent N(0, 1).
        let n_draws = 20_000;
        let draws = post.sample_joint(&cands, n_draws, &mut rng).unwrap();
        for j in 0..50 {
            let col: Vec<f64> = draws.column(j).iter().cloned().collect();
            let m = crate::stats::mean(&col);
            let v = crate::stats::sample_variance(&col);
            assert!(m.abs() < 0.03, "col {j} mean {m}");
            assert!((v - 1.0).abs() < 0.05, "col {j} var {v}");
        }
    }

    #[test]
    fn sample_joint_matches_analytic_posterior_covariance() {
        let (kernel, x, y) = random_instance(6, 1, 0.3, 1e-4, 55);
        let post = fit_posterior(&kernel, &x, &y, 1e-4).unwrap();
        let cands: Vec<Vec<f64>> = (0..20).map(|i| vec![0.05 * i as f64]).collect();
        let (mean, cov) = post.joint_moments(&cands).unwrap();

        let mut rng = crate::rng::stream(56, &[2]);
        let n_draws = 20_000;
        let draws = post.sample_joint(&cands, n_draws, &mut rng).unwrap();
        let mut max_err: f64 = 0.0;
        for a in 0..20 {
            let ca: Vec<f64> = draws.column(a).iter().cloned().collect();
            let ma = crate::stats::mean(&ca);
            assert!((ma - mean[a]).abs() < 0.05);
            for b in 0..20 {
                let cb: Vec<f64> = draws.column(b).iter().cloned().collect();
                let mb = crate::stats::mean(&cb);
                let emp: f64 = ca
                    .iter()
                    .zip(&cb)
                    .map(|(u, v)| (u - ma) * (v - mb))
                    .sum::<f64>()
                    / (n_draws - 1) as f64;
                max_err = max_err.max((emp - cov[(a, b)]).abs());
            }
        }
        assert!(max_err < 0.05, "max covariance error {max_err}");
    }

    #[test]
    fn hyperparameter_budget_zero_returns_init() {
        let (_, x, y) = random_instance(10, 1, 0.3, 1e-4, 61);
        let init = KernelSpec::squared_exponential_iso(0.7, 1).unwrap();
        let fit = optimize_hyperparameters(&x, &y, 1e-4, &init, 0).unwrap();
        assert_eq!(fit.spec, init);
        assert!(!fit.all_failed);
    }

    #[test]
    fn hyperparameter_search_never_degrades_evidence() {
        for seed in 0..20u64 {
            let (_, x, y) = random_instance(12, 1, 0.25, 1e-4, 200 + seed);
            let init = KernelSpec::squared_exponential_iso(1.0, 1).unwrap();
            let init_ev = log_marginal_likelihood(&init, &x, &y, 1e-4).unwrap();
            let fit = optimize_hyperparameters(&x, &y, 1e-4, &init, 40).unwrap();
            let got_ev = log_marginal_likelihood(&fit.spec, &x, &y, 1e-4).unwrap();
            assert!(
                got_ev >= init_ev - 1e-9,
                "seed {seed}: {got_ev} < {init_ev}"
            );
        }
    }

    #[test]
    fn hyperparameter_search_recovers_generating_length_scale() {
        // 200 points in [0, 1] from a GP with l = 0.1.
        let kernel = KernelSpec::squared_exponential_iso(0.1, 1).unwrap();
        let mut rng = crate::rng::stream(303, &[1]);
        let x: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random::<f64>()]).collect();
        let prior = fit_posterior(&kernel, &[], &[], 1e-4).unwrap();
        let f = prior.sample_joint(&x, 1, &mut rng).unwrap();
        let y: Vec<f64> = (0..200).map(|j| f[(0, j)]).collect();

        let init = KernelSpec::squared_exponential_iso(1.0, 1).unwrap();
        let fit = optimize_hyperparameters(&x, &y, 1e-4, &init, 60).unwrap();
        let got = fit.spec.length_scales()[0];
        assert!((0.05..=0.2).contains(&got), "recovered length scale {got}");
    }
}
