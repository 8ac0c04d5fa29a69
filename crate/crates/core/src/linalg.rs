use crate::{CMatrix, CVector, Complex64};

/// Sum of absolute values of all entries.
///
/// This is the matrix norm used for the multipoint assumptions; the same
/// convention serves as the vector norm on `C^m` inside every integral norm.
pub fn entrywise_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).sum()
}

/// Entrywise absolute-value sum of a vector.
pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Cubic Lagrange weights for evaluating at local coordinate `u`
/// on the four equispaced nodes 0, 1, 2, 3.
pub(crate) fn cubic_weights(u: f64) -> [f64; 4] {
    [
        -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
        u * (u - 2.0) * (u - 3.0) / 2.0,
        -u * (u - 1.0) * (u - 3.0) / 2.0,
        u * (u - 1.0) * (u - 2.0) / 6.0,
    ]
}

/// Stencil of the fourth-order finite-difference first derivative at node `i`
/// of `n` equispaced samples: centered in the interior, one-sided on the two
/// nodes at each end. Weights already include the `1/(12h)` factor.
///
/// Requires `n >= 5`.
pub(crate) fn fd4_stencil(i: usize, n: usize, h: f64) -> Vec<(usize, f64)> {
    assert!(n >= 5, "fourth-order differences need five samples");
    let raw: Vec<(usize, f64)> = if i == 0 {
        vec![(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)]
    } else if i == 1 {
        vec![(0, -3.0), (1, -10.0), (2, 18.0), (3, -6.0), (4, 1.0)]
    } else if i + 2 < n {
        vec![(i - 2, 1.0), (i - 1, -8.0), (i + 1, 8.0), (i + 2, -1.0)]
    } else {
        let e = n - 1;
        if i == e - 1 {
            vec![(e, 3.0), (e - 1, 10.0), (e - 2, -18.0), (e - 3, 6.0), (e - 4, -1.0)]
        } else {
            vec![(e, 25.0), (e - 1, -48.0), (e - 2, 36.0), (e - 3, -16.0), (e - 4, 3.0)]
        }
    };
    raw.into_iter().map(|(j, w)| (j, w / (12.0 * h))).collect()
}

/// Applies [`fd4_stencil`] to complex matrix samples.
pub(crate) fn fd4_derivative(samples: &[CMatrix], h: f64) -> Vec<CMatrix> {
    let n = samples.len();
    (0..n)
        .map(|i| {
            let mut acc = CMatrix::zeros(samples[0].nrows(), samples[0].ncols());
            for (j, w) in fd4_stencil(i, n, h) {
                acc += &samples[j] * Complex64::from(w);
            }
            acc
        })
        .collect()
}
