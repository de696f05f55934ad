//! Gaussian naive Bayes over prediction-error vectors.
//!
//! The class prior is Bernoulli in the abnormal fraction; each attribute is
//! modelled by a per-class Gaussian fitted by maximum likelihood. All
//! likelihood arithmetic is done in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstm::ErrorVector;
use crate::metrics::ConfusionCounts;
use crate::series::Label;

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-9;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorSplit {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDataset {
    pub vectors: Vec<ErrorVector>,
    pub split: ErrorSplit,
}

impl ErrorDataset {
    pub fn new(vectors: Vec<ErrorVector>, split: ErrorSplit) -> Result<Self> {
        if let Some(first) = vectors.first() {
            if let Some(bad) = vectors.iter().find(|v| v.dim() != first.dim()) {
                return Err(Error::Shape(format!(
                    "error vectors of dimension {} and {}",
                    first.dim(),
                    bad.dim()
                )));
            }
        }
        Ok(Self { vectors, split })
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, ErrorVector::dim)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Bernoulli prior plus per-class, per-attribute Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussNBModel {
    pub prior_abnormal: f64,
    /// `mean[c][j]`, indexed by class (0 normal, 1 abnormal) then attribute.
    pub mean: [Vec<f64>; 2],
    pub variance: [Vec<f64>; 2],
    pub variance_floor: f64,
}

impl GaussNBModel {
    pub fn dim(&self) -> usize {
        self.mean[0].len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::EmptyFeatures);
        }
        if [&self.mean[1], &self.variance[0], &self.variance[1]]
            .iter()
            .any(|v| v.len() != d)
        {
            return Err(Error::Shape("naive Bayes parameter lengths differ".into()));
        }
        if !(self.prior_abnormal > 0.0 && self.prior_abnormal < 1.0) {
            return Err(Error::Shape(format!("prior {} outside (0,1)", self.prior_abnormal)));
        }
        if self.variance.iter().flatten().any(|&v| !(v >= self.variance_floor)) {
            return Err(Error::Shape("variance below floor".into()));
        }
        Ok(())
    }

    fn log_prior(&self, class: Label) -> f64 {
        match class {
            Label::Abnormal => self.prior_abnormal.ln(),
            Label::Normal => (1.0 - self.prior_abnormal).ln(),
        }
    }
}

/// Maximum-likelihood fit: class-conditional means and variances with
/// denominator `n_c`, each variance floored at `variance_floor`.
pub fn fit_nb(train: &ErrorDataset, variance_floor: f64) -> Result<GaussNBModel> {
    let d = train.dim();
    if train.is_empty() {
        return Err(Error::MissingClass(0));
    }
    if d == 0 {
        return Err(Error::EmptyFeatures);
    }
    if !(variance_floor > 0.0) {
        return Err(Error::Config(format!("variance floor must be positive, got {variance_floor}")));
    }
    let mut count = [0usize; 2];
    let mut sum = [vec![0.0; d], vec![0.0; d]];
    for v in &train.vectors {
        let c = v
            .label
            .ok_or_else(|| Error::Config(format!("error vector {} has no label", v.window_id)))?
            as usize;
        count[c] += 1;
        for (s, e) in sum[c].iter_mut().zip(&v.errors) {
            *s += e;
        }
    }
    for c in [0u8, 1] {
        if count[c as usize] == 0 {
            return Err(Error::MissingClass(c));
        }
    }
    let mean = [0, 1].map(|c| sum[c].iter().map(|s| s / count[c] as f64).collect::<Vec<_>>());
    let mut sq = [vec![0.0; d], vec![0.0; d]];
    for v in &train.vectors {
        let c = v.label.expect("checked above") as usize;
        for ((s, e), m) in sq[c].iter_mut().zip(&v.errors).zip(&mean[c]) {
            *s += (e - m) * (e - m);
        }
    }
    let variance =
        [0, 1].map(|c| sq[c].iter().map(|s| (s / count[c] as f64).max(variance_floor)).collect());
    Ok(GaussNBModel {
        prior_abnormal: count[1] as f64 / train.len() as f64,
        mean,
        variance,
        variance_floor,
    })
}

/// `ln P(y=c) + sum_j ln N(x_j; mu[c][j], var[c][j])`
pub fn joint_log_likelihood(model: &GaussNBModel, x: &[f64], class: Label) -> Result<f64> {
    Ok(model.log_prior(class) + log_likelihood(model, x, class)?)
}

/// Class-conditional log density without the prior.
pub fn log_likelihood(model: &GaussNBModel, x: &[f64], class: Label) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(Error::Shape(format!(
            "vector of dimension {} for a model of dimension {}",
            x.len(),
            model.dim()
        )));
    }
    let c = class as usize;
    Ok(x.iter()
        .zip(&model.mean[c])
        .zip(&model.variance[c])
        .map(|((xj, m), v)| -0.5 * (LN_2PI + v.ln()) - (xj - m) * (xj - m) / (2.0 * v))
        .sum())
}

/// Posterior classification. Returns the label (argmax, exact ties to
/// abnormal) and the posterior probability of abnormal.
pub fn classify(model: &GaussNBModel, x: &[f64]) -> Result<(Label, f64)> {
    let l0 = joint_log_likelihood(model, x, Label::Normal)?;
    let l1 = joint_log_likelihood(model, x, Label::Abnormal)?;
    Ok(posterior_from_joint(l0, l1))
}

pub(crate) fn posterior_from_joint(l0: f64, l1: f64) -> (Label, f64) {
    // exp(l1 - logsumexp(l0, l1)) rewritten as a logistic of the log-odds
    let label = if l1 >= l0 { Label::Abnormal } else { Label::Normal };
    (label, crate::nn::sigmoid(l1 - l0))
}

/// Classifies every vector of `test` and tallies it against its label.
pub fn evaluate_nb(model: &GaussNBModel, test: &ErrorDataset) -> Result<ConfusionCounts> {
    if test.is_empty() {
        return Err(Error::EmptyDataset("no error vectors to evaluate".into()));
    }
    let mut truth = Vec::with_capacity(test.len());
    let mut pred = Vec::with_capacity(test.len());
    for v in &test.vectors {
        let t = v
            .label
            .ok_or_else(|| Error::Config(format!("error vector {} has no label", v.window_id)))?;
        truth.push(t);
        pred.push(classify(model, &v.errors)?.0);
    }
    crate::metrics::confusion(&truth, &pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(errors: &[f64], label: Label) -> ErrorVector {
        ErrorVector {
            errors: errors.to_vec(),
            label: Some(label),
            window_id: 0,
        }
    }

    fn dataset(rows: &[(&[f64], Label)]) -> ErrorDataset {
        ErrorDataset::new(rows.iter().map(|(e, l)| ev(e, *l)).collect(), ErrorSplit::Train)
            .unwrap()
    }

    #[test]
    fn hand_fit() {
        let ds = dataset(&[
            (&[1.0, 3.0], Label::Abnormal),
            (&[3.0, 5.0], Label::Abnormal),
            (&[0.0, 0.0], Label::Normal),
            (&[0.0, 2.0], Label::Normal),
        ]);
        let m = fit_nb(&ds, DEFAULT_VARIANCE_FLOOR).unwrap();
        assert_eq!(m.mean[1], vec![2.0, 4.0]);
        assert_eq!(m.variance[1], vec![1.0, 1.0]);
        assert_eq!(m.mean[0], vec![0.0, 1.0]);
        assert_eq!(m.variance[0], vec![1e-9, 1.0]);
        assert_eq!(m.prior_abnormal, 0.5);
        m.validate().unwrap();
    }

    #[test]
    fn constant_class_hits_floor() {
        let ds = dataset(&[
            (&[0.5, 0.5], Label::Abnormal),
            (&[0.5, 0.5], Label::Abnormal),
            (&[0.0, 1.0], Label::Normal),
        ]);
        let m = fit_nb(&ds, 1e-6).unwrap();
        assert_eq!(m.variance[1], vec![1e-6, 1e-6]);
    }

    #[test]
    fn fit_errors() {
        let only_normal = dataset(&[(&[1.0], Label::Normal)]);
        assert!(matches!(fit_nb(&only_normal, 1e-9), Err(Error::MissingClass(1))));
        let empty_features = dataset(&[(&[], Label::Normal), (&[], Label::Abnormal)]);
        assert!(matches!(fit_nb(&empty_features, 1e-9), Err(Error::EmptyFeatures)));
        assert!(ErrorDataset::new(
            vec![ev(&[1.0], Label::Normal), ev(&[1.0, 2.0], Label::Normal)],
            ErrorSplit::Train
        )
        .is_err());
    }

    fn unit_model(mu0: Vec<f64>, mu1: Vec<f64>) -> GaussNBModel {
        let d = mu0.len();
        GaussNBModel {
            prior_abnormal: 0.5,
            mean: [mu0, mu1],
            variance: [vec![1.0; d], vec![1.0; d]],
            variance_floor: 1e-9,
        }
    }

    #[test]
    fn gaussian_peak_value() {
        let m = unit_model(vec![0.3, -0.2, 1.0], vec![0.0; 3]);
        let ll = log_likelihood(&m, &[0.3, -0.2, 1.0], Label::Normal).unwrap();
        assert!((ll - 3.0 * -0.918_938_533_204_672_7).abs() < 1e-12);
        assert!(matches!(
            log_likelihood(&m, &[0.0], Label::Normal),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn squared_deficit_is_linear() {
        let m = unit_model(vec![0.0, 0.0], vec![0.0; 2]);
        let a = log_likelihood(&m, &[1.0, 0.0], Label::Normal).unwrap();
        let b = log_likelihood(&m, &[2f64.sqrt(), 0.0], Label::Normal).unwrap();
        // (x - mu)^2 doubled from 1 to 2: contribution drops by 1/(2 var)
        assert!((a - b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_tie_goes_abnormal() {
        let m = unit_model(vec![-1.0, 2.0], vec![1.0, -2.0]);
        let (label, post) = classify(&m, &[0.0, 0.0]).unwrap();
        assert_eq!(post, 0.5);
        assert_eq!(label, Label::Abnormal);
    }

    #[test]
    fn dominant_likelihood() {
        let m = unit_model(vec![0.0; 4], vec![5.0; 4]);
        let (label, post) = classify(&m, &[5.0; 4]).unwrap();
        assert_eq!(label, Label::Abnormal);
        assert!(post > 0.99);
    }

    #[test]
    fn swapped_means_invert_labels() {
        let good = unit_model(vec![-1.0], vec![1.0]);
        let bad = unit_model(vec![1.0], vec![-1.0]);
        let test = ErrorDataset::new(
            (0..20)
                .map(|i| {
                    let x = -1.9 + 0.2 * i as f64;
                    ev(&[x], if x > 0.0 { Label::Abnormal } else { Label::Normal })
                })
                .collect(),
            ErrorSplit::Test,
        )
        .unwrap();
        for v in &test.vectors {
            assert_ne!(
                classify(&good, &v.errors).unwrap().0,
                classify(&bad, &v.errors).unwrap().0
            );
        }
        let c = evaluate_nb(&good, &test).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let c = evaluate_nb(&bad, &test).unwrap();
        assert_eq!((c.tp, c.tn), (0, 0));
    }

    #[test]
    fn posterior_is_shift_invariant() {
        for (l0, l1) in [(-3.0, -4.5), (-1000.0, -1001.0), (2.0, 2.0), (-7.25, 1.5)] {
            let (la, pa) = posterior_from_joint(l0, l1);
            let (lb, pb) = posterior_from_joint(l0 + 123.0, l1 + 123.0);
            assert_eq!(la, lb);
            assert!((pa - pb).abs() < 1e-12);
            let (_, pn) = posterior_from_joint(l1, l0);
            assert!((pa + pn - 1.0).abs() < 1e-12);
        }
    }
}
