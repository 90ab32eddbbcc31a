//! Code rates and closed-form reference curves.

/// `log_4(size) / n`.
pub fn code_rate(size: u64, n: usize) -> f64 {
    (size as f64).log2() / (2.0 * n as f64)
}

/// Redundancy in bits of a length-`n` code: `2n - log2(size)`.
pub fn redundancy_bits(size: u64, n: usize) -> f64 {
    2.0 * n as f64 - (size as f64).log2()
}

/// 4-ary rate of a code with `log2 n + log2 log2 n + c` bits of redundancy.
pub fn reference_rate(n: usize, c: f64) -> f64 {
    let n_f = n as f64;
    1.0 - (n_f.log2() + n_f.log2().log2() + c) / (2.0 * n_f)
}

/// The constants `c` of the closed-form reference curves, with labels.
pub fn reference_constants() -> [(&'static str, f64); 4] {
    [("c1", 1.0), ("clog3", 3f64.log2()), ("c2", 2.0), ("c7", 7.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates() {
        assert!((code_rate(36368, 11) - 0.689).abs() < 1e-3);
        assert_eq!(code_rate(1 << 14, 7), 1.0);
        assert_eq!(code_rate(1, 9), 0.0);
        assert!((redundancy_bits(1 << 14, 7)).abs() < 1e-12);
    }

    #[test]
    fn reference_curves_ordered_in_c() {
        for n in 7..=11 {
            let r: Vec<f64> = reference_constants().iter().map(|&(_, c)| reference_rate(n, c)).collect();
            assert!(r.windows(2).all(|w| w[0] > w[1]), "n={n}: {r:?}");
        }
        // log2 7 + log2 log2 7 + 1 = 5.29657..., over 14 bits
        assert!((reference_rate(7, 1.0) - (1.0 - 5.296_566 / 14.0)).abs() < 1e-6);
    }
}
