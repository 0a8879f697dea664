use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Scott's rule: per-coordinate `σ̂ n^{-1/(d+4)}`, averaged over the `D`
/// coordinates into one isotropic bandwidth.
pub fn scott_bandwidth<T: Scalar, const D: usize>(points: &[[T; D]]) -> Result<T> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Scott's rule needs at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let factor = nf.powf(-1.0 / (D as f64 + 4.0));
    let mut total = 0.0;
    for k in 0..D {
        let mean = points.iter().map(|p| p[k].f64()).sum::<f64>() / nf;
        let var = points.iter().map(|p| (p[k].f64() - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        total += var.sqrt() * factor;
    }
    let h = total / D as f64;
    if !(h > 0.0) {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    Ok(T::of(h))
}
