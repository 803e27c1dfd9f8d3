//! Two-group ANOVA, F tail probabilities, Shapiro–Wilk, Brown–Forsythe
//! Levene and Pearson correlation.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::special::{beta_inc, normal_quantile, normal_sf};
use super::{mean, mean_and_sd};
use crate::error::{Error, Result};

/// Largest sample the Shapiro–Wilk approximation is valid for; larger
/// samples are subsampled.
pub const SHAPIRO_MAX_N: usize = 5000;

/// P(X > f) for X ~ F(df1, df2).
pub fn f_survival(f: f64, df1: f64, df2: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::NonFinite(f));
    }
    if f < 0.0 || df1 < 1.0 || df2 < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "F survival needs F >= 0 and dfs >= 1 (F={f}, df=({df1}, {df2}))"
        )));
    }
    if f == 0.0 {
        return Ok(1.0);
    }
    let x = df2 / (df2 + df1 * f);
    Ok(beta_inc(df2 / 2.0, df1 / 2.0, x).clamp(0.0, 1.0))
}

/// Two-sided Student-t tail P(|T| > |t|) with `df` degrees of freedom.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    beta_inc(df / 2.0, 0.5, df / (df + t * t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub eta_squared: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub mean_a: f64,
    pub sd_a: f64,
    pub n_a: usize,
    pub mean_b: f64,
    pub sd_b: f64,
    pub n_b: usize,
}

/// One-way ANOVA over two groups.
pub fn anova_two_group(a: &[f64], b: &[f64]) -> Result<AnovaResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "ANOVA needs at least 2 values per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mean_a, sd_a) = mean_and_sd(a);
    let (mean_b, sd_b) = mean_and_sd(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let grand = (mean_a * na + mean_b * nb) / (na + nb);
    let ss_between = na * (mean_a - grand).powi(2) + nb * (mean_b - grand).powi(2);
    let ss_within: f64 = a.iter().map(|x| (x - mean_a).powi(2)).sum::<f64>()
        + b.iter().map(|x| (x - mean_b).powi(2)).sum::<f64>();
    let ss_total = ss_between + ss_within;
    // Rounding leaves residue on the order of ulp(x)^2 for constant data.
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let floor = (na + nb) * (scale * 1e-15).powi(2);
    if ss_total <= floor {
        return Err(Error::ZeroVariance("all values identical across both groups".into()));
    }
    if ss_within <= floor {
        return Err(Error::ZeroVariance("both groups are internally constant".into()));
    }
    let df_between = 1.0;
    let df_within = na + nb - 2.0;
    let f = (ss_between / df_between) / (ss_within / df_within);
    let p = f_survival(f, df_between, df_within)?;
    Ok(AnovaResult {
        f,
        p,
        eta_squared: (ss_between / ss_total).clamp(0.0, 1.0),
        df_between,
        df_within,
        mean_a,
        sd_a,
        n_a: a.len(),
        mean_b,
        sd_b,
        n_b: b.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p: f64,
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * x + k)
}

/// Shapiro–Wilk W with Royston's (1995) normalizing approximation for the
/// p-value. Samples above [`SHAPIRO_MAX_N`] are uniformly subsampled with
/// `seed`.
pub fn shapiro_wilk(sample_values: &[f64], seed: u64) -> Result<ShapiroWilk> {
    let mut x: Vec<f64> = if sample_values.len() > SHAPIRO_MAX_N {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, sample_values.len(), SHAPIRO_MAX_N).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| sample_values[i]).collect()
    } else {
        sample_values.to_vec()
    };
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "Shapiro-Wilk needs n >= 3, got {n}"
        )));
    }
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range <= 0.0 || !range.is_finite() {
        return Err(Error::ZeroVariance("Shapiro-Wilk sample is constant".into()));
    }
    let nf = n as f64;
    let half = n / 2;

    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
        const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
        let m: Vec<f64> = (0..half)
            .map(|i| normal_quantile((i as f64 + 1.0 - 0.375) / (nf + 0.25)))
            .collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / nf.sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let first;
        let fac;
        if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            a[1] = a2;
            first = 2;
        } else {
            fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
            first = 1;
        }
        a[0] = a1;
        for i in first..half {
            a[i] = -m[i] / fac;
        }
    }

    let mu = mean(&x);
    let ssq: f64 = x.iter().map(|v| (v - mu).powi(2)).sum();
    let numer: f64 = (0..half).map(|i| a[i] * (x[n - 1 - i] - x[i])).sum();
    let w = (numer * numer / ssq).min(1.0);

    let p = if n == 3 {
        const PI6: f64 = 6.0 / std::f64::consts::PI;
        const STQR: f64 = std::f64::consts::FRAC_PI_3;
        (PI6 * (w.sqrt().asin() - STQR)).clamp(0.0, 1.0)
    } else {
        let w1 = (1.0 - w).ln();
        if n <= 11 {
            let gamma = poly(&[-2.273, 0.459], nf);
            if w1 >= gamma {
                0.0
            } else {
                let y = -(gamma - w1).ln();
                let m = poly(&[0.5440, -0.39978, 0.025054, -6.714e-4], nf);
                let s = poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf).exp();
                normal_sf((y - m) / s)
            }
        } else {
            let ln_n = nf.ln();
            let m = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], ln_n);
            let s = poly(&[-0.4803, -0.082676, 0.0030302], ln_n).exp();
            normal_sf((w1 - m) / s)
        }
    };
    Ok(ShapiroWilk { w, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeveneResult {
    pub statistic: f64,
    pub p: f64,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Brown–Forsythe form of Levene's test: ANOVA on absolute deviations from
/// each group's median. Exactly two groups.
pub fn levene(groups: &[&[f64]]) -> Result<LeveneResult> {
    let [a, b] = groups else {
        return Err(Error::InsufficientData(format!(
            "Levene's test takes exactly two groups, got {}",
            groups.len()
        )));
    };
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("Levene's test needs >= 2 values per group".into()));
    }
    let dev = |g: &[f64]| {
        let m = median(g);
        g.iter().map(|x| (x - m).abs()).collect::<Vec<_>>()
    };
    let (da, db) = (dev(a), dev(b));
    let r = anova_two_group(&da, &db)?;
    Ok(LeveneResult {
        statistic: r.f,
        p: r.p,
    })
}

/// Sample Pearson correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Pearson r needs two equal-length series of >= 2 values ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("correlation of a constant series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two-sided t tail by quadrature of the unnormalized density on
    /// u = t / (1 + t), independent of the incomplete beta route.
    fn t_tail_oracle(t: f64, df: f64) -> f64 {
        let dens = |x: f64| (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
        let integrand = |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let x = u / (1.0 - u);
            dens(x) / (1.0 - u).powi(2)
        };
        let simpson = |lo: f64, hi: f64, n: usize| {
            let h = (hi - lo) / n as f64;
            let mut s = integrand(lo) + integrand(hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * integrand(lo + i as f64 * h);
            }
            s * h / 3.0
        };
        let ut = t.abs() / (1.0 + t.abs());
        let n = 200_000;
        simpson(ut, 1.0, n) / simpson(0.0, 1.0, n)
    }

    #[test]
    fn anova_worked_example() {
        let r = anova_two_group(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((r.f - 13.5).abs() < 1e-9);
        assert!((r.eta_squared - 27.0 / 35.0).abs() < 1e-12);
        assert!((r.p - 0.0213).abs() < 0.001);
        // Reference value from an established statistics package.
        assert!((r.p - 0.021_311_641_128_756_72).abs() < 1e-10);
        assert!((r.p - t_tail_oracle(13.5f64.sqrt(), 4.0)).abs() < 1e-8);
    }

    #[test]
    fn anova_degenerate_and_equal_means() {
        assert!(matches!(
            anova_two_group(&[5.0, 5.0, 5.0], &[5.0, 5.0, 5.0]),
            Err(Error::ZeroVariance(_))
        ));
        assert!(anova_two_group(&[1.0], &[2.0, 3.0]).is_err());
        let r = anova_two_group(&[1.0, 2.0], &[2.0, 1.0]).unwrap();
        assert_eq!(r.f, 0.0);
        assert_eq!(r.eta_squared, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn f_survival_values() {
        assert_eq!(f_survival(0.0, 3.0, 7.0).unwrap(), 1.0);
        assert!(f_survival(1e12, 2.0, 50.0).unwrap() < 1e-20);
        assert!(matches!(f_survival(f64::INFINITY, 1.0, 1.0), Err(Error::NonFinite(_))));
        assert!(f_survival(f64::NAN, 1.0, 1.0).is_err());
        // Reference values from an established statistics package.
        let cases = [
            (13.5, 1.0, 4.0, 0.021_311_641_128_756_72),
            (3.0, 1.0, 6.0, 0.133_974_596_215_561_36),
            (2.5, 3.0, 7.0, 0.143_509_456_278_939_27),
            (100.0, 2.0, 50.0, 3.355_443_200_000_004_4e-18),
            (0.5, 10.0, 20.0, 0.870_160_374_169_6),
        ];
        for (f, d1, d2, want) in cases {
            let got = f_survival(f, d1, d2).unwrap();
            assert!((got - want).abs() <= 1e-10, "F={f}: {got} vs {want}");
        }
    }

    #[test]
    fn f_matches_t_tail_oracle() {
        for (f, df) in [(0.3, 3.0), (4.2, 10.0), (13.5, 4.0), (25.0, 30.0)] {
            let p = f_survival(f, 1.0, df).unwrap();
            assert!((p - t_tail_oracle(f64::sqrt(f), df)).abs() < 1e-8, "F={f}");
            assert!((p - t_two_sided(f64::sqrt(f), df)).abs() < 1e-12);
        }
    }

    #[test]
    fn shapiro_reference_values() {
        // (sample, W, p) from an established statistics package.
        let seq30: Vec<f64> = (1..=30).map(|i| (i as f64).sin() * (i as f64).sqrt()).collect();
        let seq60: Vec<f64> = (1..=60).map(|i| (((i as f64) * 1.7).cos() * 1.5).exp()).collect();
        let seq7: Vec<f64> = (1..=7).map(|i| (i as f64).powf(1.5)).collect();
        let cases: Vec<(Vec<f64>, f64, f64)> = vec![
            (vec![1.0, 1.0, 1.0, 2.0], 0.629_776_264_554_299, 0.001_240_725_915_103_626_4),
            (
                vec![2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 3.9, 4.1, 3.0],
                0.971_390_603_104_502_2,
                0.903_430_501_334_991_5,
            ),
            ((1..=20).map(|i| (i * i) as f64).collect(), 0.906_130_628_605_387_4, 0.053_809_589_128_654_696),
            (seq30, 0.967_883_778_541_080_1, 0.483_015_059_724_770_77),
            (seq60, 0.835_037_040_496_669_3, 1.133_089_194_956_371_1e-6),
            (seq7, 0.962_536_265_041_813_6, 0.840_177_123_994_568_9),
            (vec![1.0, 2.0, 4.0], 0.964_285_714_285_714_2, 0.636_886_845_028_968_9),
        ];
        for (x, w, p) in cases {
            let r = shapiro_wilk(&x, 0).unwrap();
            assert!((r.w - w).abs() < 1e-6, "n={} W {} vs {w}", x.len(), r.w);
            assert!((r.p - p).abs() < 1e-4 * p.max(0.01), "n={} p {} vs {p}", x.len(), r.p);
        }
        let r = shapiro_wilk(&[1.0, 1.0, 1.0, 2.0], 0).unwrap();
        assert!(r.w < 0.8 && r.p < 0.05);
    }

    #[test]
    fn shapiro_errors() {
        assert!(shapiro_wilk(&[1.0, 2.0], 0).is_err());
        assert!(matches!(shapiro_wilk(&[3.0; 10], 0), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn shapiro_subsamples_large_input() {
        let big: Vec<f64> = (0..12_000).map(|i| ((i * 7919) % 10_007) as f64).collect();
        let a = shapiro_wilk(&big, 3).unwrap();
        let b = shapiro_wilk(&big, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.w > 0.9);
    }

    #[test]
    fn shapiro_null_calibration() {
        use rand_distr::{Distribution, StandardNormal};
        let mut passes = 0;
        for rep in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + rep);
            let x: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
            if shapiro_wilk(&x, 0).unwrap().p > 0.05 {
                passes += 1;
            }
        }
        assert!(passes >= 95, "only {passes}/100 normal samples passed");
    }

    #[test]
    fn levene_examples() {
        let r = levene(&[&[1.0, 2.0, 3.0], &[11.0, 12.0, 13.0]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        let r = levene(&[&[0.0, 0.0, 0.0, 0.0], &[-10.0, 0.0, 0.0, 10.0]]).unwrap();
        // Deviations {0,0,0,0} vs {10,0,0,10}: F = 50 / (100 / 6) = 3.
        assert!((r.statistic - 3.0).abs() < 1e-12);
        assert!((r.p - 0.133_974_596_215_561_36).abs() < 1e-10);
        assert!(levene(&[&[1.0, 2.0]]).is_err());
        assert!(levene(&[&[1.0, 1.0], &[2.0, 2.0]]).is_err());
    }

    #[test]
    fn levene_detects_unequal_spread() {
        let a: Vec<f64> = (0..30).map(|i| (i % 3) as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| ((i % 3) as f64 - 1.0) * 25.0).collect();
        assert!(levene(&[&a, &b]).unwrap().p < 0.05);
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson_r(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson_r(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson_r(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(pearson_r(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ZeroVariance(_))));
        assert!(pearson_r(&[1.0], &[1.0]).is_err());
    }

    fn pooled_t(a: &[f64], b: &[f64]) -> f64 {
        let (ma, sa) = mean_and_sd(a);
        let (mb, sb) = mean_and_sd(b);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let sp2 = ((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0);
        (ma - mb) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt()
    }

    fn group() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-100.0f64..100.0, 2..30)
    }

    proptest! {
        #[test]
        fn affine_invariance(a in group(), b in group(), scale in 0.1f64..10.0, neg in any::<bool>(), shift in -50.0f64..50.0) {
            let Ok(r) = anova_two_group(&a, &b) else { return Ok(()); };
            let s = if neg { -scale } else { scale };
            let t = |v: &Vec<f64>| v.iter().map(|x| s * x + shift).collect::<Vec<_>>();
            let r2 = anova_two_group(&t(&a), &t(&b)).unwrap();
            prop_assert!((r.f - r2.f).abs() <= 1e-9 * r.f.max(1.0));
            prop_assert!((r.p - r2.p).abs() <= 1e-9);
            prop_assert!((r.eta_squared - r2.eta_squared).abs() <= 1e-9);
        }

        #[test]
        fn f_is_pooled_t_squared(a in group(), b in group()) {
            let Ok(r) = anova_two_group(&a, &b) else { return Ok(()); };
            let t = pooled_t(&a, &b);
            prop_assert!((r.f - t * t).abs() <= 1e-9 * r.f.max(1.0));
        }

        #[test]
        fn eta_squared_bounds(a in group(), b in group()) {
            let Ok(r) = anova_two_group(&a, &b) else { return Ok(()); };
            prop_assert!((0.0..=1.0).contains(&r.eta_squared));
            prop_assert!((0.0..=1.0).contains(&r.p));
        }

        #[test]
        fn p_decreases_in_f(f1 in 0.0f64..50.0, df in 1.0f64..200.0, delta in 0.01f64..10.0) {
            prop_assert!(f_survival(f1 + delta, 1.0, df).unwrap() <= f_survival(f1, 1.0, df).unwrap());
        }
    }
}
