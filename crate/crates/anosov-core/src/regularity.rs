//! Directional regularity estimation by multiscale increment regression.
//!
//! First differences across dyadic scales give a Hölder exponent; second
//! differences separate "differentiable once" from "differentiable twice"
//! with an exponent between 1 and 2.

use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityError {
    /// Fewer than 6 usable scales or fewer than 32 base points.
    InsufficientData,
}

impl core::fmt::Display for RegularityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RegularityError::InsufficientData => {
                write!(f, "need at least 6 scales and 32 base points")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    LipschitzOrBetter,
    Holder(f64),
    Inconclusive,
}

/// Scales t_j = 2^{-j} for j in [j_min, j_max], strictly decreasing.
pub fn dyadic_scales(j_min: u32, j_max: u32) -> Vec<f64> {
    (j_min..=j_max).map(|j| math::powf(0.5, j as f64)).collect()
}

pub const DEFAULT_J_MIN: u32 = 4;
pub const DEFAULT_J_MAX: u32 = 14;

/// Absolute increments |F(y + t d) - F(y)| per scale and base point.
#[derive(Debug, Clone)]
pub struct IncrementTable {
    pub direction: Vec<f64>,
    pub scales: Vec<f64>,
    /// increments[scale index][base point index]
    pub increments: Vec<Vec<f64>>,
}

impl IncrementTable {
    /// Median increment per scale; suppresses base points where the
    /// leading coefficient accidentally vanishes.
    pub fn medians(&self) -> Vec<f64> {
        self.increments.iter().map(|row| median(row)).collect()
    }
}

fn median(vals: &[f64]) -> f64 {
    let mut v: Vec<f64> = vals.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn directional_increments<F>(
    f: F,
    basepoints: &[Vec<f64>],
    direction: &[f64],
    scales: &[f64],
) -> IncrementTable
where
    F: Fn(&[f64]) -> f64,
{
    let mut increments = Vec::with_capacity(scales.len());
    for &t in scales {
        let mut row = Vec::with_capacity(basepoints.len());
        for y in basepoints {
            let shifted: Vec<f64> =
                y.iter().zip(direction).map(|(&a, &d)| a + t * d).collect();
            row.push(math::abs(f(&shifted) - f(y)));
        }
        increments.push(row);
    }
    IncrementTable {
        direction: direction.to_vec(),
        scales: scales.to_vec(),
        increments,
    }
}

/// Second differences |F(y + t d) - 2 F(y) + F(y - t d)| per scale/point.
pub fn second_differences<F>(
    f: F,
    basepoints: &[Vec<f64>],
    direction: &[f64],
    scales: &[f64],
) -> IncrementTable
where
    F: Fn(&[f64]) -> f64,
{
    let mut increments = Vec::with_capacity(scales.len());
    for &t in scales {
        let mut row = Vec::with_capacity(basepoints.len());
        for y in basepoints {
            let plus: Vec<f64> = y.iter().zip(direction).map(|(&a, &d)| a + t * d).collect();
            let minus: Vec<f64> = y.iter().zip(direction).map(|(&a, &d)| a - t * d).collect();
            row.push(math::abs(f(&plus) - 2.0 * f(y) + f(&minus)));
        }
        increments.push(row);
    }
    IncrementTable {
        direction: direction.to_vec(),
        scales: scales.to_vec(),
        increments,
    }
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub direction: Vec<f64>,
    pub scales: Vec<f64>,
    pub medians: Vec<f64>,
    /// Present only when the log-log fit explains the data (r^2 >= 0.95).
    pub exponent: Option<f64>,
    pub fit_r2: f64,
    pub classification: Classification,
}

/// Median-aggregated log-log regression over the table's scales.
pub fn holder_exponent(table: &IncrementTable) -> Result<RegularityReport, RegularityError> {
    if table.scales.len() < 6 || table.increments.iter().any(|r| r.len() < 32) {
        return Err(RegularityError::InsufficientData);
    }
    let medians = table.medians();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &m) in table.scales.iter().zip(&medians) {
        if m > 0.0 {
            xs.push(math::log2(t));
            ys.push(math::log2(m));
        }
    }
    if xs.len() < 6 {
        return Err(RegularityError::InsufficientData);
    }
    let (slope, r2) = linear_fit(&xs, &ys);
    let (exponent, classification) = if r2 >= 0.95 {
        let class = if slope >= 0.97 {
            Classification::LipschitzOrBetter
        } else if slope <= 0.95 {
            Classification::Holder(slope)
        } else {
            Classification::Inconclusive
        };
        (Some(slope), class)
    } else {
        (None, Classification::Inconclusive)
    };
    Ok(RegularityReport {
        direction: table.direction.clone(),
        scales: table.scales.clone(),
        medians,
        exponent,
        fit_r2: r2,
        classification,
    })
}

/// Second-difference scaling exponent: ~2 for twice-differentiable F,
/// strictly between 1 and 2 for once-but-not-twice differentiable F.
pub fn second_order_probe<F>(
    f: F,
    basepoints: &[Vec<f64>],
    direction: &[f64],
    scales: &[f64],
) -> Result<RegularityReport, RegularityError>
where
    F: Fn(&[f64]) -> f64,
{
    holder_exponent(&second_differences(f, basepoints, direction, scales))
}

/// Least-squares slope and r^2 of y against x.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::SplitMix64;
    use alloc::vec;

    fn base_points_1d(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = SplitMix64::new(seed);
        (0..n).map(|_| vec![lo + (hi - lo) * rng.next_f64()]).collect()
    }

    #[test]
    fn linear_function_exponent_one() {
        let pts = base_points_1d(40, 0.1, 0.9, 7);
        let scales = dyadic_scales(DEFAULT_J_MIN, DEFAULT_J_MAX);
        let table = directional_increments(|y: &[f64]| 3.0 * y[0] + 1.0, &pts, &[1.0], &scales);
        let rep = holder_exponent(&table).unwrap();
        let a = rep.exponent.unwrap();
        assert!(math::abs(a - 1.0) < 0.005, "{a}");
        assert_eq!(rep.classification, Classification::LipschitzOrBetter);
    }

    #[test]
    fn power_function_controls() {
        // base points tucked below every probe scale so the singularity
        // at 0 dominates each increment
        let pts = base_points_1d(64, 0.0, 1.0 / 16777216.0, 11);
        let scales = dyadic_scales(DEFAULT_J_MIN, DEFAULT_J_MAX);
        for &beta in &[0.25, 0.5, 0.75, 1.0] {
            let table = directional_increments(
                |y: &[f64]| math::powf(math::abs(y[0]), beta),
                &pts,
                &[1.0],
                &scales,
            );
            let rep = holder_exponent(&table).unwrap();
            let a = rep.exponent.unwrap();
            assert!(math::abs(a - beta) < 0.02, "beta={beta} a={a}");
            if beta < 0.95 {
                assert_eq!(rep.classification, Classification::Holder(a));
            }
        }
    }

    #[test]
    fn scale_covariance_of_exponent() {
        let pts = base_points_1d(64, 0.0, 1.0 / 16777216.0, 3);
        let scales = dyadic_scales(DEFAULT_J_MIN, DEFAULT_J_MAX);
        let f = |y: &[f64]| math::powf(math::abs(y[0]), 0.5);
        let a1 = holder_exponent(&directional_increments(f, &pts, &[1.0], &scales))
            .unwrap()
            .exponent
            .unwrap();
        let a2 = holder_exponent(&directional_increments(f, &pts, &[0.37], &scales))
            .unwrap()
            .exponent
            .unwrap();
        assert!(math::abs(a1 - a2) < 0.01, "{a1} vs {a2}");
    }

    #[test]
    fn insufficient_data_rejected() {
        let pts = base_points_1d(10, 0.1, 0.9, 5);
        let scales = dyadic_scales(4, 14);
        let table = directional_increments(|y: &[f64]| y[0], &pts, &[1.0], &scales);
        assert_eq!(holder_exponent(&table).unwrap_err(), RegularityError::InsufficientData);
        let few_scales = dyadic_scales(4, 7);
        let pts = base_points_1d(40, 0.1, 0.9, 5);
        let table = directional_increments(|y: &[f64]| y[0], &pts, &[1.0], &few_scales);
        assert_eq!(holder_exponent(&table).unwrap_err(), RegularityError::InsufficientData);
    }

    #[test]
    fn quadratic_second_difference_exponent_two() {
        let pts = base_points_1d(40, 0.1, 0.9, 9);
        let scales = dyadic_scales(4, 12);
        let rep =
            second_order_probe(|y: &[f64]| y[0] * y[0] + 2.0 * y[0], &pts, &[1.0], &scales)
                .unwrap();
        let a = rep.exponent.unwrap();
        assert!(math::abs(a - 2.0) < 0.01, "{a}");
    }

    #[test]
    fn rough_function_second_difference_tracks_first() {
        // |y|^0.7 near 0: both first and second differences scale as t^0.7
        let pts = base_points_1d(64, 0.0, 1.0 / 16777216.0, 13);
        let scales = dyadic_scales(DEFAULT_J_MIN, DEFAULT_J_MAX);
        let f = |y: &[f64]| math::powf(math::abs(y[0]), 0.7);
        let first = holder_exponent(&directional_increments(f, &pts, &[1.0], &scales))
            .unwrap()
            .exponent
            .unwrap();
        let second = second_order_probe(f, &pts, &[1.0], &scales).unwrap().exponent.unwrap();
        assert!(math::abs(first - second) < 0.05, "{first} vs {second}");
        assert!(second < 1.0);
    }

    #[test]
    fn noisy_data_is_inconclusive() {
        // increments independent of scale: slope near 0, r^2 tiny
        let mut rng = SplitMix64::new(21);
        let pts = base_points_1d(40, 0.1, 0.9, 17);
        let scales = dyadic_scales(4, 11);
        let mut table = directional_increments(|y: &[f64]| y[0], &pts, &[1.0], &scales);
        for row in table.increments.iter_mut() {
            for v in row.iter_mut() {
                *v = 0.5 + 0.5 * rng.next_f64();
            }
        }
        let rep = holder_exponent(&table).unwrap();
        assert!(rep.exponent.is_none());
        assert_eq!(rep.classification, Classification::Inconclusive);
    }

    #[test]
    fn medians_ignore_outlier_points() {
        let pts = base_points_1d(33, 0.1, 0.9, 19);
        let scales = dyadic_scales(4, 10);
        let mut table = directional_increments(|y: &[f64]| y[0], &pts, &[1.0], &scales);
        // corrupt a single base point at every scale
        for row in table.increments.iter_mut() {
            row[0] = 1e6;
        }
        let rep = holder_exponent(&table).unwrap();
        assert!(math::abs(rep.exponent.unwrap() - 1.0) < 0.01);
    }
}
