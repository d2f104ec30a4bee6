//! Log-log least-squares power-law fits `y = c x^k`.

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// 95% confidence interval of the exponent.
    pub exponent_ci: (f64, f64),
    /// Prefactor with the exponent fixed at -1.
    pub unit_slope_prefactor: f64,
    /// 95% confidence interval of `unit_slope_prefactor`.
    pub unit_slope_prefactor_ci: (f64, f64),
    pub points: usize,
}

fn t_quantile(df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Fits `ln y = ln c + k ln x` over points with positive coordinates.
/// Returns `None` with fewer than three usable points.
pub fn fit_power_law(points: &[(f64, f64)]) -> Option<PowerLawFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let t = t_quantile(nf - 2.0);
    let slope_se = (ssr / (nf - 2.0) / sxx).sqrt();

    // slope fixed at -1: ln c is the mean of ln y + ln x
    let offsets: Vec<f64> = logs.iter().map(|p| p.1 + p.0).collect();
    let mean_offset = offsets.iter().sum::<f64>() / nf;
    let sd = (offsets.iter().map(|o| (o - mean_offset).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let half = t_quantile(nf - 1.0) * sd / nf.sqrt();

    Some(PowerLawFit {
        prefactor: intercept.exp(),
        exponent: slope,
        exponent_ci: (slope - t * slope_se, slope + t * slope_se),
        unit_slope_prefactor: mean_offset.exp(),
        unit_slope_prefactor_ci: ((mean_offset - half).exp(), (mean_offset + half).exp()),
        points: n,
    })
}
