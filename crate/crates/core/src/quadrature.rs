use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Composite Simpson rule over equally spaced samples (odd count >= 3).
pub fn simpson<T: Real>(values: &[T], h: T) -> Result<T> {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::InsufficientSamples(format!(
            "composite Simpson needs an odd number >= 3 of samples, got {n}"
        )));
    }
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc = acc + *v * if i % 2 == 1 { c(4.0) } else { c(2.0) };
    }
    Ok(acc * h / c(3.0))
}

/// Checks that `times` are uniformly spaced and returns the spacing.
pub fn uniform_step<T: Real>(times: &[T]) -> Result<T> {
    if times.len() < 2 {
        return Err(Error::InsufficientSamples("need at least two samples".into()));
    }
    let h = (times[times.len() - 1] - times[0]) / c((times.len() - 1) as f64);
    for (i, t) in times.iter().enumerate() {
        let expected = times[0] + h * c(i as f64);
        if (*t - expected).abs() > h * c(1e-6) {
            return Err(Error::InvalidParameter("samples are not uniformly spaced".into()));
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_cubics() {
        let h = 0.25;
        let v: Vec<f64> = (0..9).map(|i| (i as f64 * h).powi(3) - 2.0 * (i as f64 * h)).collect();
        let exact = 2f64.powi(4) / 4.0 - 4.0;
        assert!((simpson(&v, h).unwrap() - exact).abs() < 1e-13);
        assert!(simpson(&v[..8], h).is_err());
        assert!(simpson(&v[..1], h).is_err());
    }

    #[test]
    fn step_detection() {
        assert!((uniform_step(&[0.0f64, 0.5, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(uniform_step(&[0.0f64, 0.4, 1.0]).is_err());
    }
}
