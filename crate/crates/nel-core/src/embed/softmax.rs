//! Max-shifted log-sum-exp and the surface correspondence softmax.

use super::surface::SurfaceModel;

/// Streaming log-sum-exp accumulator with a running maximum. Terms are pushed
/// in a fixed order, so the result is reproducible.
#[derive(Debug, Clone)]
pub struct StreamingLse {
    max: f64,
    sum: f64,
}

impl Default for StreamingLse {
    fn default() -> Self {
        Self::new()
    }
}

impl StreamingLse {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, term: f64) {
        if term == f64::NEG_INFINITY {
            return;
        }
        if term <= self.max {
            self.sum += (term - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - term).exp() + 1.0;
            self.max = term;
        }
    }

    /// ln(sum of exp(term)) over everything pushed.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Max-shifted log-sum-exp of a slice.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let mut lse = StreamingLse::new();
    for &t in terms {
        lse.push(t);
    }
    lse.value()
}

/// Log-probabilities of the surface correspondence distribution: softmax of
/// `q . g(x)` over the model's surface samples.
pub fn correspondence_log_probs(query: &[f64], model: &SurfaceModel) -> Vec<f64> {
    assert_eq!(query.len(), model.embed_dim());
    let dots: Vec<f64> = (0..model.len())
        .map(|s| dot(query, model.key_row(s)))
        .collect();
    let logz = log_sum_exp(&dots);
    dots.into_iter().map(|d| d - logz).collect()
}

/// Probability vector over the model's surface samples; sums to one.
pub fn correspondence_prob(query: &[f64], model: &SurfaceModel) -> Vec<f64> {
    correspondence_log_probs(query, model)
        .into_iter()
        .map(f64::exp)
        .collect()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for k in 0..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    fn model_with_keys(keys: Vec<Vec<f64>>) -> SurfaceModel {
        let dim = keys[0].len();
        let coords = vec![Vec3::zeros(); keys.len()];
        let flat: Vec<f64> = keys.into_iter().flatten().collect();
        SurfaceModel::from_parts(1, coords, flat, vec![Vec3::zeros()], dim)
    }

    #[test]
    fn equal_dots_split_evenly() {
        let model = model_with_keys(vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        let p = correspondence_prob(&[2.5, 0.0], &model);
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!((p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singleton_is_certain() {
        let model = model_with_keys(vec![vec![0.3, 0.7]]);
        let p = correspondence_prob(&[1.0, -1.0], &model);
        assert_eq!(p.len(), 1);
        assert!((p[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_softmax_ln3() {
        // dots (ln 3, 0) -> probabilities (0.75, 0.25)
        let model = model_with_keys(vec![vec![3.0f64.ln()], vec![0.0]]);
        let p = correspondence_prob(&[1.0], &model);
        assert!((p[0] - 0.75).abs() < 1e-12);
        assert!((p[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sums_to_one_large_model() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let dim = 4;
        let keys: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>() * 40.0 - 20.0).collect())
            .collect();
        let model = model_with_keys(keys);
        let q: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let total: f64 = correspondence_prob(&q, &model).iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "sum {total}");
    }

    #[test]
    fn shift_invariance() {
        // Adding a constant to all dot products leaves the softmax unchanged.
        // Constructed directly: keys k and k' = k + c * q_unit give shifted dots.
        let q = vec![2.0, 0.0];
        let keys = vec![vec![0.5, 1.0], vec![-0.25, 3.0], vec![1.5, -2.0]];
        let shifted: Vec<Vec<f64>> = keys
            .iter()
            .map(|k| vec![k[0] + 7.0 / 2.0, k[1]])
            .collect();
        let p0 = correspondence_prob(&q, &model_with_keys(keys));
        let p1 = correspondence_prob(&q, &model_with_keys(shifted));
        for (a, b) in p0.iter().zip(&p1) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn streaming_matches_two_pass() {
        let terms = [-700.0, -1.0, 3.5, 2.0, -650.0];
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let two_pass = m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&terms) - two_pass).abs() < 1e-12);
    }
}
