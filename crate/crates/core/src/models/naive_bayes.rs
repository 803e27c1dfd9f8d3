use serde::{Deserialize, Serialize};

/// Per-class variances never drop below this.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes. Index 0 is NonConfused, 1 is Confused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl GaussianNb {
    pub fn fit(xs: &[Vec<f64>], ys: &[bool]) -> Self {
        let d = xs[0].len();
        let mut n = [0usize; 2];
        let mut sum = [vec![0.0; d], vec![0.0; d]];
        for (x, &y) in xs.iter().zip(ys) {
            n[y as usize] += 1;
            for (s, v) in sum[y as usize].iter_mut().zip(x) {
                *s += v;
            }
        }
        let means = [0, 1].map(|c| sum[c].iter().map(|s| s / n[c] as f64).collect::<Vec<_>>());
        let mut ss = [vec![0.0; d], vec![0.0; d]];
        for (x, &y) in xs.iter().zip(ys) {
            let c = y as usize;
            for ((s, v), m) in ss[c].iter_mut().zip(x).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        let variances = [0, 1].map(|c| ss[c].iter().map(|s| (s / n[c] as f64).max(VARIANCE_FLOOR)).collect());
        let total = (n[0] + n[1]) as f64;
        GaussianNb {
            log_prior: [0, 1].map(|c| (n[c] as f64 / total).ln()),
            means,
            variances,
        }
    }

    fn log_joint(&self, c: usize, x: &[f64]) -> f64 {
        let mut acc = self.log_prior[c];
        for ((v, m), var) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
            acc -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (v - m) * (v - m) / var);
        }
        acc
    }

    pub fn p_confused(&self, x: &[f64]) -> f64 {
        let (l0, l1) = (self.log_joint(0, x), self.log_joint(1, x));
        // Logistic of the log-odds, stable in both tails.
        let z = l1 - l0;
        if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn symmetric_gaussians_split_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (neg, pos) = (Normal::new(-1.0, 1.0).unwrap(), Normal::new(1.0, 1.0).unwrap());
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..500 {
            let y = i % 2 == 0;
            xs.push(vec![if y { pos.sample(&mut rng) } else { neg.sample(&mut rng) }]);
            ys.push(y);
        }
        let m = GaussianNb::fit(&xs, &ys);
        // Bisect for the point where the posterior crosses 1/2.
        let (mut lo, mut hi) = (-3.0, 3.0);
        for _ in 0..100 {
            let mid = (lo + hi) / 2.0;
            if m.p_confused(&[mid]) >= 0.5 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!(lo.abs() <= 0.2, "boundary at {lo}");
    }

    #[test]
    fn constant_feature_hits_floor() {
        let xs = vec![vec![1.0], vec![1.0], vec![2.0], vec![2.0]];
        let ys = vec![true, true, false, false];
        let m = GaussianNb::fit(&xs, &ys);
        assert_eq!(m.variances[1][0], VARIANCE_FLOOR);
        assert!(m.p_confused(&[1.0]) > 0.999);
        assert!(m.p_confused(&[2.0]) < 0.001);
        assert!(m.p_confused(&[1e6]).is_finite());
    }

    #[test]
    fn scaling_a_feature_keeps_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = Normal::new(0.0, 1.0).unwrap();
        let xs: Vec<Vec<f64>> = (0..200).map(|i| vec![n.sample(&mut rng) + (i % 2) as f64, n.sample(&mut rng)]).collect();
        let ys: Vec<bool> = (0..200).map(|i| i % 2 == 1).collect();
        let scaled: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0] * 37.5, x[1]]).collect();
        let a = GaussianNb::fit(&xs, &ys);
        let b = GaussianNb::fit(&scaled, &ys);
        for (x, s) in xs.iter().zip(&scaled) {
            assert_eq!(a.p_confused(x) >= 0.5, b.p_confused(s) >= 0.5);
        }
    }
}
