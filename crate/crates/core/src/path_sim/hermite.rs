/// Fills `out[k] = var^{k/2} He_k(x / sqrt(var))` for `k = 0..=n`, the
/// probabilists' Hermite polynomials rescaled to variance `var`.
///
/// With `x = W(h)` and `var = |h|^2` this is `I_k(h^{⊗k})`. The recurrence
/// never divides by `var`, so `var = 0` is allowed.
pub fn scaled_hermite(x: f64, var: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(x);
    for k in 2..=n {
        let next = x * out[k - 1] - (k - 1) as f64 * var * out[k - 2];
        out.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        let mut h = Vec::new();
        scaled_hermite(2.0, 1.0, 4, &mut h);
        assert_eq!(h, vec![1.0, 2.0, 3.0, 2.0, -5.0]);
        scaled_hermite(1.5, 0.0, 3, &mut h);
        assert_eq!(h, vec![1.0, 1.5, 2.25, 3.375]);
    }

    #[test]
    fn scaling_relation() {
        let (x, var) = (0.7f64, 2.5f64);
        let mut a = Vec::new();
        let mut b = Vec::new();
        scaled_hermite(x, var, 8, &mut a);
        scaled_hermite(x / var.sqrt(), 1.0, 8, &mut b);
        for k in 0..=8 {
            assert!((a[k] - var.powf(k as f64 / 2.0) * b[k]).abs() < 1e-10);
        }
    }
}
