//! Hybrid learning for Takagi-Sugeno systems.
//!
//! Each training epoch alternates two half-steps: an exact
//! ridge-regularized least-squares solve for all consequent
//! coefficients (they enter the output linearly), then one full-batch
//! gradient-descent step on the Gaussian premise parameters. Training
//! is deterministic: the only inputs are the dataset and the config.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{grid_partition, normalize, GaussianMf, InputSpec, TsFis};

/// One supervised observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

/// A named batch of samples with uniform input dimension. `seed` records
/// the provenance of whatever process generated the batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub seed: u64,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, seed: u64, samples: Vec<Sample>) -> Result<Self> {
        let name = name.into();
        let Some(first) = samples.first() else {
            return Err(Error::InvalidArgument(format!(
                "dataset '{name}' must contain at least one sample"
            )));
        };
        let dim = first.x.len();
        if dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "dataset '{name}' samples need at least one input"
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.x.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "dataset '{name}' sample {i}: dimension {} != {dim}",
                    s.x.len()
                )));
            }
            if s.x.iter().any(|v| !v.is_finite()) || !s.y.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "dataset '{name}' sample {i} contains non-finite values"
                )));
            }
        }
        Ok(Self { name, seed, samples })
    }

    pub fn n_inputs(&self) -> usize {
        self.samples[0].x.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// How many MFs each input gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MfCountRule {
    /// 3 per input for controllers with up to 3 inputs, 2 for wider ones;
    /// keeps the consequent unknown count near the largest dataset sizes
    /// this crate trains on.
    Auto,
    Fixed(usize),
}

impl MfCountRule {
    pub fn resolve(&self, n_inputs: usize) -> Result<usize> {
        match *self {
            MfCountRule::Auto => Ok(if n_inputs <= 3 { 3 } else { 2 }),
            MfCountRule::Fixed(m) if m >= 2 => Ok(m),
            MfCountRule::Fixed(m) => {
                Err(Error::InvalidArgument(format!("MF count must be >= 2, got {m}")))
            }
        }
    }
}

/// Hyperparameters for [`train_hybrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learn_rate: f64,
    pub ridge_lambda: f64,
    pub mf_count: MfCountRule,
    /// Provenance tag carried into reports and saved models. The training
    /// loop itself is deterministic and draws no random numbers.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            learn_rate: 0.01,
            ridge_lambda: 1e-6,
            mf_count: MfCountRule::Auto,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if !(self.learn_rate > 0.0 && self.learn_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learn_rate must be positive and finite, got {}",
                self.learn_rate
            )));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ridge_lambda must be non-negative and finite, got {}",
                self.ridge_lambda
            )));
        }
        Ok(())
    }
}

/// What [`train_hybrid`] did: training RMSE per epoch (recorded right
/// after the least-squares half-step, i.e. with the best consequents for
/// that epoch's premises) and the cumulative squared error of the final
/// returned model on its own training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_rmse: Vec<f64>,
    pub final_train_se: f64,
    pub epochs_run: usize,
}

/// Fit quality of a model on a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    /// Sum of squared residuals over the dataset.
    pub cumulative_se: f64,
    /// `sqrt(cumulative_se / n_samples)`.
    pub rmse: f64,
}

/// Build the initial premise layer from the data: per input, the observed
/// range widened by 10% of its span on each side (by 1.0 if the span is
/// zero), `mfs_per_input` centers equally spaced across the widened range,
/// and every sigma set to half the center spacing.
pub fn init_premises(dataset: &Dataset, mfs_per_input: usize) -> Result<Vec<InputSpec>> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot initialize from an empty dataset".into()));
    }
    if mfs_per_input < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 MFs per input, got {mfs_per_input}"
        )));
    }
    let n = dataset.n_inputs();
    let mut specs = Vec::with_capacity(n);
    for k in 0..n {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &dataset.samples {
            lo = lo.min(s.x[k]);
            hi = hi.max(s.x[k]);
        }
        let span = hi - lo;
        let pad = if span == 0.0 { 1.0 } else { 0.1 * span };
        let (lo, hi) = (lo - pad, hi + pad);
        let spacing = (hi - lo) / ((mfs_per_input - 1) as f64);
        let sigma = spacing / 2.0;
        let mfs = (0..mfs_per_input)
            .map(|m| GaussianMf::new(lo + spacing * (m as f64), sigma))
            .collect::<Result<Vec<_>>>()?;
        specs.push(InputSpec::new(format!("x{k}"), lo, hi, mfs)?);
    }
    Ok(specs)
}

/// Solve for the globally optimal consequent coefficients and return a
/// copy of the FIS carrying them.
///
/// Minimizes `sum_s (eval(x_s) - y_s)^2 + lambda * ||coeffs||^2` over all
/// rule coefficients jointly. The design matrix row for sample `s` holds,
/// for each rule `i`, the block `wbar_i(x_s) * [1, x_s]`; coefficients are
/// ordered rule-major to match. With `lambda > 0` the problem is strictly
/// convex and always solvable; with `lambda = 0` a rank-deficient design
/// (e.g. fewer samples than unknowns) is an error telling the caller to
/// regularize.
pub fn lse_consequents(fis: &TsFis, dataset: &Dataset, ridge_lambda: f64) -> Result<TsFis> {
    let n = fis.n_inputs();
    if dataset.n_inputs() != n {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} inputs but FIS expects {n}",
            dataset.n_inputs()
        )));
    }
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ridge_lambda must be non-negative and finite, got {ridge_lambda}"
        )));
    }
    let r = fis.n_rules();
    let p = r * (n + 1);
    let rows = dataset.len();

    let mut a = DMatrix::zeros(rows, p);
    let mut b = DVector::zeros(rows);
    for (s, sample) in dataset.samples.iter().enumerate() {
        let wbar = normalize(&fis.firing_strengths(&sample.x)?)?;
        for (i, &w) in wbar.iter().enumerate() {
            let base = i * (n + 1);
            a[(s, base)] = w;
            for k in 0..n {
                a[(s, base + 1 + k)] = w * sample.x[k];
            }
        }
        b[s] = sample.y;
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "least-squares design matrix contains non-finite entries".into(),
        ));
    }

    let theta = if ridge_lambda > 0.0 {
        let gram = a.transpose() * &a + DMatrix::identity(p, p) * ridge_lambda;
        let rhs = a.transpose() * &b;
        gram.cholesky()
            .ok_or_else(|| {
                Error::Numerical("regularized normal equations are not positive definite".into())
            })?
            .solve(&rhs)
    } else {
        let svd = a.svd(true, true);
        let sigma_max = svd.singular_values.max();
        let eps = (rows.max(p) as f64) * f64::EPSILON * sigma_max;
        let rank = svd.rank(eps);
        if rank < p {
            return Err(Error::RankDeficient(format!(
                "design matrix rank {rank} < {p} unknowns; set ridge_lambda > 0 to regularize"
            )));
        }
        svd.solve(&b, eps).map_err(|e| Error::Numerical(format!("SVD solve failed: {e}")))?
    };
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "least-squares solution contains non-finite coefficients".into(),
        ));
    }

    let mut out = fis.clone();
    for (i, rule) in out.rules.iter_mut().enumerate() {
        let base = i * (n + 1);
        for k in 0..=n {
            rule.consequent[k] = theta[base + k];
        }
    }
    Ok(out)
}

/// Gradient of the squared prediction error at one sample with respect to
/// every premise parameter, indexed `[input][mf] -> (d_center, d_sigma)`.
///
/// Derived by differentiating the fuzzify-fire-normalize-average chain:
/// with `e = yhat - y`, `S = sum_j w_j`, and `f_i` the rule consequent
/// values, `d(e^2)/dw_i = 2e (f_i - yhat) / S`, and the Gaussian factors
/// give `dw_i/dc = w_i (x_k - c) / sigma^2` and
/// `dw_i/dsigma = w_i (x_k - c)^2 / sigma^3` for each MF the rule uses.
pub fn premise_gradients(fis: &TsFis, sample: &Sample) -> Result<Vec<Vec<(f64, f64)>>> {
    let w = fis.firing_strengths(&sample.x)?;
    let total: f64 = w.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::DegenerateFiring(
            "cannot differentiate with all-zero firing strengths".into(),
        ));
    }
    let f: Vec<f64> = fis.rules.iter().map(|r| r.consequent_value(&sample.x)).collect();
    // normalize before averaging, in the same order eval() uses, so the
    // prediction differentiated here is bit-identical to the evaluated one
    let yhat: f64 = w.iter().zip(&f).map(|(&wi, &fi)| (wi / total) * fi).sum();
    let e = yhat - sample.y;

    let mut grads: Vec<Vec<(f64, f64)>> =
        fis.inputs.iter().map(|spec| vec![(0.0, 0.0); spec.mfs.len()]).collect();
    for (i, rule) in fis.rules.iter().enumerate() {
        let dloss_dw = 2.0 * e * (f[i] - yhat) / total;
        for (k, &mi) in rule.antecedent.iter().enumerate() {
            let mf = &fis.inputs[k].mfs[mi];
            let diff = sample.x[k] - mf.center;
            let dw_dc = w[i] * diff / (mf.sigma * mf.sigma);
            let dw_ds = w[i] * diff * diff / (mf.sigma * mf.sigma * mf.sigma);
            let g = &mut grads[k][mi];
            g.0 += dloss_dw * dw_dc;
            g.1 += dloss_dw * dw_ds;
        }
    }
    Ok(grads)
}

/// Train a grid-partitioned first-order system on `dataset`.
///
/// Per epoch: solve consequents exactly with [`lse_consequents`], record
/// the training RMSE of that intermediate model, then take one full-batch
/// gradient step (mean gradient over samples, step `learn_rate`) on all
/// centers and sigmas. Sigmas are clamped to at least `1e-6` of their
/// input's initialized span so a step can never collapse an MF.
pub fn train_hybrid(dataset: &Dataset, config: &TrainConfig) -> Result<(TsFis, TrainReport)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot train on an empty dataset".into()));
    }
    let m = config.mf_count.resolve(dataset.n_inputs())?;
    let mut fis = grid_partition(init_premises(dataset, m)?, "y")?;
    let sigma_floors: Vec<f64> = fis.inputs.iter().map(|s| 1e-6 * (s.hi - s.lo)).collect();

    let mut epoch_rmse = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        fis = lse_consequents(&fis, dataset, config.ridge_lambda)?;
        let metrics = evaluate(&fis, dataset)?;
        if !metrics.rmse.is_finite() {
            return Err(Error::Divergence(format!(
                "training loss became non-finite at epoch {epoch}"
            )));
        }
        epoch_rmse.push(metrics.rmse);

        gradient_step(&mut fis, dataset, config.learn_rate, &sigma_floors)?;
        if fis
            .inputs
            .iter()
            .flat_map(|s| &s.mfs)
            .any(|mf| !mf.center.is_finite() || !mf.sigma.is_finite())
        {
            return Err(Error::Divergence(format!(
                "premise parameters became non-finite at epoch {epoch}"
            )));
        }
    }

    let final_metrics = evaluate(&fis, dataset)?;
    if !final_metrics.cumulative_se.is_finite() {
        return Err(Error::Divergence(format!(
            "training loss became non-finite at epoch {}",
            config.epochs - 1
        )));
    }
    let report = TrainReport {
        epochs_run: epoch_rmse.len(),
        epoch_rmse,
        final_train_se: final_metrics.cumulative_se,
    };
    Ok((fis, report))
}

/// One full-batch descent step on every center and sigma.
fn gradient_step(
    fis: &mut TsFis,
    dataset: &Dataset,
    learn_rate: f64,
    sigma_floors: &[f64],
) -> Result<()> {
    let mut acc: Vec<Vec<(f64, f64)>> =
        fis.inputs.iter().map(|spec| vec![(0.0, 0.0); spec.mfs.len()]).collect();
    for sample in &dataset.samples {
        let g = premise_gradients(fis, sample)?;
        for (ak, gk) in acc.iter_mut().zip(g) {
            for (am, gm) in ak.iter_mut().zip(gk) {
                am.0 += gm.0;
                am.1 += gm.1;
            }
        }
    }
    let scale = learn_rate / dataset.len() as f64;
    for (k, spec) in fis.inputs.iter_mut().enumerate() {
        for (m, mf) in spec.mfs.iter_mut().enumerate() {
            mf.center -= scale * acc[k][m].0;
            mf.sigma = (mf.sigma - scale * acc[k][m].1).max(sigma_floors[k]);
        }
    }
    Ok(())
}

/// Sum of squared residuals and RMSE of `fis` on `dataset`.
pub fn evaluate(fis: &TsFis, dataset: &Dataset) -> Result<EvalMetrics> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate on an empty dataset".into()));
    }
    let mut cumulative_se = 0.0;
    for sample in &dataset.samples {
        let r = fis.eval(&sample.x)? - sample.y;
        cumulative_se += r * r;
    }
    Ok(EvalMetrics { cumulative_se, rmse: (cumulative_se / dataset.len() as f64).sqrt() })
}
