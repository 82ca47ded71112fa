use num_complex::Complex64 as C64;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Largest `||H t||_1` accepted before the exponential is treated as an overflow.
pub const MAX_NORM_TIME: f64 = 1e4;

/// Norm below which the Taylor series is summed directly.
const TAYLOR_NORM: f64 = 0.25;

/// `exp(-i H t)` by scaling and squaring around a truncated Taylor series.
///
/// Works for any square `H`, defective or not.
pub fn propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    h.check_finite()?;
    if !t.is_finite() {
        return Err(Error::domain("evolution time must be finite"));
    }
    let a = h.scale(C64::new(0.0, -t));
    let norm = a.norm_one();
    if norm > MAX_NORM_TIME {
        return Err(Error::numerical(format!(
            "||H t|| = {norm:e} exceeds the supported range {MAX_NORM_TIME:e}"
        )));
    }
    let squarings = if norm > TAYLOR_NORM {
        (norm / TAYLOR_NORM).log2().ceil() as u32
    } else {
        0
    };
    let a = a.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    let n = h.dim();
    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&a).scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
        if term.norm_one() <= f64::EPSILON * 1e-3 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    if !sum.is_finite() {
        return Err(Error::numerical("propagator overflowed"));
    }
    Ok(sum)
}

/// `exp(-i H t) psi0`.
pub fn evolve(h: &CMatrix, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
    if psi0.len() != h.dim() {
        return Err(Error::domain(format!(
            "state has {} components, operator has dimension {}",
            psi0.len(),
            h.dim()
        )));
    }
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    let out = propagator(h, t)?.mul_vec(psi0);
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numerical("evolved state is not finite"));
    }
    Ok(out)
}
