//! Small numeric helpers shared across the crate: least squares lines,
//! summary statistics, and normal tail probabilities.

/// Ordinary least squares line fit y = intercept + slope * x.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (NaN when fewer than 3 points).
    pub slope_stderr: f64,
    pub n: usize,
}

pub fn ols_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    weighted_line(xs, ys, None)
}

/// Weighted least squares line fit; `weights` of None means equal weights.
pub fn weighted_line(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let w_of = |i: usize| weights.map_or(1.0, |w| w[i]);
    let (mut sw, mut swx, mut swy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let w = w_of(i);
        sw += w;
        swx += w * xs[i];
        swy += w * ys[i];
    }
    let xbar = swx / sw;
    let ybar = swy / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..n {
        let w = w_of(i);
        sxx += w * (xs[i] - xbar) * (xs[i] - xbar);
        sxy += w * (xs[i] - xbar) * (ys[i] - ybar);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_stderr = if n > 2 {
        let mut sse = 0.0;
        for i in 0..n {
            let r = ys[i] - intercept - slope * xs[i];
            sse += w_of(i) * r * r;
        }
        // Effective residual variance; for unit weights this is the classic
        // s^2/Sxx formula.
        (sse / (n as f64 - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        n,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pearson correlation of two equal-length samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..xs.len() {
        let (dx, dy) = (xs[i] - mx, ys[i] - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Mean after dropping floor(frac * n) smallest and largest values.
/// Used to aggregate per-replica estimates without letting a single wild
/// replica dominate.
pub fn trimmed_mean(xs: &[f64], frac: f64) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let drop = ((v.len() as f64) * frac).floor() as usize;
    let kept = &v[drop..v.len() - drop];
    mean(kept)
}

/// Standard error of the mean of the trimmed sample.
pub fn trimmed_stderr(xs: &[f64], frac: f64) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let drop = ((v.len() as f64) * frac).floor() as usize;
    let kept = &v[drop..v.len() - drop];
    if kept.len() < 2 {
        return f64::NAN;
    }
    (variance(kept) / kept.len() as f64).sqrt()
}

/// Complementary error function, fractional error below 1.3e-7 everywhere.
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Standard normal upper tail P{N(0,1) > x}.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = ols_line(&xs, &ys).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-9);
    }

    #[test]
    fn trimmed_mean_drops_outliers() {
        let xs = [0.9, 1.0, 1.1, 1.0, 50.0, -40.0, 1.0, 1.0, 1.0, 1.0];
        let m = trimmed_mean(&xs, 0.1);
        assert!((m - 1.0).abs() < 0.05, "m = {m}");
    }

    #[test]
    fn normal_tail_reference_values() {
        // P{N>1.9599...} = 0.025; P{N>3} = 1.3499e-3.
        assert!((normal_tail(1.959964) - 0.025).abs() < 1e-6);
        assert!((normal_tail(3.0) - 1.3499e-3).abs() < 2e-7);
        assert!((normal_tail(0.0) - 0.5).abs() < 1e-7);
    }
}
