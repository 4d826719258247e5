//! Finite-difference stencils on uniform grids.

/// Fornberg's recursion: weights at nodes `xs` for derivatives `0..=max_order` at `z`.
pub fn fornberg(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Half-width of the centered fourth-order stencil for derivative order `k`.
pub fn half_width(k: usize) -> usize {
    if k == 0 {
        0
    } else {
        k.div_ceil(2) + 1
    }
}

/// Centered fourth-order weights for `d^k/dx^k`, offsets `-hw..=hw`, already divided by `h^k`.
pub fn central_weights(k: usize, h: f64) -> Vec<f64> {
    if k == 0 {
        return vec![1.0];
    }
    let hw = half_width(k) as i64;
    let xs: Vec<f64> = (-hw..=hw).map(|j| j as f64).collect();
    let w = fornberg(0.0, &xs, k);
    let s = h.powi(k as i32);
    w[k].iter().map(|v| v / s).collect()
}

/// Combined stencil `Σ_k coeffs[k] d^k` (coeffs[0] multiplies identity), centered, order 4.
/// Returns `(half_width, weights)`.
pub fn operator_stencil(coeffs: &[f64], h: f64) -> (usize, Vec<f64>) {
    let hw = (0..coeffs.len()).filter(|&k| coeffs[k] != 0.0).map(half_width).max().unwrap_or(0);
    let mut w = vec![0.0; 2 * hw + 1];
    for (k, &ck) in coeffs.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let wk = central_weights(k, h);
        let off = hw - half_width(k);
        for (j, v) in wk.iter().enumerate() {
            w[off + j] += ck * v;
        }
    }
    (hw, w)
}
