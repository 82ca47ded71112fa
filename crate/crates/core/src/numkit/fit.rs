use crate::error::{Error, Result};

/// Decay rate `κ` of `magnitude ≈ C e^{-κ n}` by least squares on `ln(magnitude)`.
pub fn fit_decay(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::domain("need at least three samples"));
    }
    if let Some(&(n, m)) = samples.iter().find(|(_, m)| !(*m > 0.0) || !m.is_finite()) {
        return Err(Error::domain(format!("magnitude {m} at n = {n} is not positive")));
    }
    let count = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / count;
    let mean_y = samples.iter().map(|s| s.1.ln()).sum::<f64>() / count;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, m) in samples {
        let dx = x - mean_x;
        sxy += dx * (m.ln() - mean_y);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(Error::domain("sample positions are all equal"));
    }
    Ok(-sxy / sxx)
}
