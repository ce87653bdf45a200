use crate::grid_kernels::{factorial, GridFunction, RankOnePower};
use crate::{Error, Result};

use super::ChaosVector;

/// `b_{2k+1} = 2 (-1)^k / (sqrt(2 pi) (2k+1) k! 2^k)`, the coefficient of
/// `I_{2k+1}(h^{⊗(2k+1)})` in `sign(W(h))` for unit `h`.
pub fn sign_coefficient(k: usize) -> f64 {
    let sgn = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    2.0 * sgn / ((2.0 * std::f64::consts::PI).sqrt() * (2 * k + 1) as f64 * factorial(k) * 2f64.powi(k as i32))
}

/// `S_K = sum_{k<=K} b_{2k+1}^2 (2k+1)!`, the second moment of the truncated
/// expansion.
pub fn sign_partial_norm(k_max: usize) -> f64 {
    (0..=k_max).map(|k| sign_coefficient(k).powi(2) * factorial(2 * k + 1)).sum()
}

/// `sum_{k<=K} b_{2k+1} I_{2k+1}(h^{⊗(2k+1)})`.
pub fn sign_chaos(h: &GridFunction, k_max: usize) -> Result<ChaosVector> {
    let norm = h.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::pre(format!("sign expansion needs a unit vector, got norm {norm}")));
    }
    let mut v = ChaosVector::zero(h.resolution())?;
    for k in 0..=k_max {
        v.add_factored(RankOnePower::new(h.clone(), 2 * k + 1, sign_coefficient(k)).into())?;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_coefficients() {
        let s2pi = (2.0 * std::f64::consts::PI).sqrt();
        assert!((sign_coefficient(0) - 2.0 / s2pi).abs() < 1e-15);
        assert!((sign_coefficient(1) + 1.0 / (3.0 * s2pi)).abs() < 1e-15);
        assert!((sign_coefficient(1) + 0.13298).abs() < 1e-5);
        assert!((sign_coefficient(2) - 1.0 / (20.0 * s2pi)).abs() < 1e-15);
    }

    #[test]
    fn partial_norms_increase_to_one() {
        assert!((sign_partial_norm(0) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 0..=60 {
            let s = sign_partial_norm(k);
            assert!(s > prev && s < 1.0, "S_{k} = {s}");
            prev = s;
        }
        // tail decays like k^{-1/2}
        assert!(1.0 - sign_partial_norm(60) < 0.07);
    }

    #[test]
    fn rejects_non_unit_base() {
        let h = GridFunction::constant(4, 2.0).unwrap();
        assert!(matches!(sign_chaos(&h, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn second_moment_matches_partial_norm() {
        let h = GridFunction::indicator(2, 0.5, 1.0, std::f64::consts::SQRT_2).unwrap();
        let v = sign_chaos(&h, 7).unwrap();
        assert!((v.second_moment() - sign_partial_norm(7)).abs() < 1e-12);
    }
}
