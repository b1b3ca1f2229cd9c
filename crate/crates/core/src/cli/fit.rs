use crate::error::{Error, Result};

/// Least-squares fit of `ln(norm) = slope·x + intercept` over samples with x inside the window.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// Root-mean-square deviation of ln(norm) from the fitted line.
    pub residual: f64,
    pub n_samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Abscissa {
    /// Samples are (r, norm): fit against ln r.
    LogRadius,
    /// Samples are (t, norm): fit against t.
    Linear,
}

/// Fits over samples whose first coordinate lies in `window` (inclusive).
/// Nonpositive norms are skipped.
pub fn fit_rate(samples: &[(f64, f64)], window: (f64, f64), abscissa: Abscissa) -> Result<RateFit> {
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(x, y)| *x >= lo && *x <= hi && *y > 0.0 && y.is_finite())
        .map(|&(x, y)| {
            let xx = match abscissa {
                Abscissa::LogRadius => x.ln(),
                Abscissa::Linear => x,
            };
            (xx, y.ln())
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(format!("fewer than two usable samples in window [{lo}, {hi}]")));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("degenerate abscissae in fit window".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit { slope, intercept, window: (lo, hi), residual, n_samples: pts.len() })
}
