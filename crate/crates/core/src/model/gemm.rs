/// Bounds-checked `C = alpha * A * B + beta * C` over strided row/column views.
///
/// `A` is `m x k`, `B` is `k x n`, `C` is `m x n`. Views of `A` and `B` may
/// overlap themselves (convolution windows share rows).
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    (rsc, csc): (usize, usize),
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(c.len() > (m - 1) * rsc + (n - 1) * csc, "C view out of bounds");
    if k == 0 {
        for i in 0..m {
            for j in 0..n {
                c[i * rsc + j * csc] *= beta;
            }
        }
        return;
    }
    assert!(a.len() > (m - 1) * rsa + (k - 1) * csa, "A view out of bounds");
    assert!(b.len() > (k - 1) * rsb + (n - 1) * csb, "B view out of bounds");
    // SAFETY: every index touched is bounded by the asserts above; C does not
    // alias A or B because it is borrowed mutably.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_product() {
        // [1 2; 3 4] * [5 6; 7 8]
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [5.0, 6.0, 7.0, 8.0];
        let mut c = [1.0; 4];
        gemm(2, 2, 2, 1.0, &a, (2, 1), &b, (2, 1), 1.0, &mut c, (2, 1));
        assert_eq!(c, [20.0, 23.0, 44.0, 51.0]);
        // transpose of B through strides
        let mut c = [0.0; 4];
        gemm(2, 2, 2, 1.0, &a, (2, 1), &b, (1, 2), 0.0, &mut c, (2, 1));
        assert_eq!(c, [17.0, 23.0, 39.0, 53.0]);
    }

    #[test]
    fn overlapping_windows() {
        // rows of width 2 read with stride 1 over [1,2,3,4]
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.0, 1.0];
        let mut c = [0.0; 3];
        gemm(3, 2, 1, 1.0, &a, (1, 1), &b, (1, 1), 0.0, &mut c, (1, 1));
        assert_eq!(c, [3.0, 5.0, 7.0]);
    }
}
