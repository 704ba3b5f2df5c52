/// Evaluate the natural cubic spline through `(xs, ys)` at `0, 1, .., n-1`.
///
/// `xs` must be strictly increasing. Two points give a straight line; one
/// point a constant.
pub fn natural_cubic_on_grid(xs: &[f64], ys: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let m = xs.len();
    match m {
        0 => return vec![0.0; n],
        1 => return vec![ys[0]; n],
        _ => {}
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    // second derivatives, zero at both ends
    let mut m2 = vec![0.0; m];
    if m > 2 {
        let k = m - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
        }
        // Thomas algorithm; off-diagonals are h[i+1]
        for i in 1..k {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        m2[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m2[i + 1] = (rhs[i] - h[i + 1] * m2[i + 2]) / diag[i];
        }
    }

    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for t in 0..n {
        let t = t as f64;
        while seg + 2 < m && t > xs[seg + 1] {
            seg += 1;
        }
        let (x0, x1) = (xs[seg], xs[seg + 1]);
        let hi = x1 - x0;
        let a = (x1 - t) / hi;
        let b = (t - x0) / hi;
        let v = a * ys[seg]
            + b * ys[seg + 1]
            + ((a * a * a - a) * m2[seg] + (b * b * b - b) * m2[seg + 1]) * hi * hi / 6.0;
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_and_reproduces_lines() {
        let xs = [-2.0, 0.0, 3.0, 4.0, 9.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let v = natural_cubic_on_grid(&xs, &ys, 10);
        for (t, &y) in v.iter().enumerate() {
            assert!((y - (2.0 * t as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn passes_through_knots() {
        let xs = [-1.0, 1.0, 2.0, 5.0, 7.0, 8.0];
        let ys = [0.3, -1.0, 2.0, 0.5, 0.0, 1.5];
        let v = natural_cubic_on_grid(&xs, &ys, 8);
        for (x, y) in xs.iter().zip(&ys) {
            if *x >= 0.0 && *x < 8.0 {
                assert!((v[*x as usize] - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn approximates_smooth_function() {
        let xs: Vec<f64> = (-2..=42).map(|i| i as f64 * 2.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x / 15.0).sin()).collect();
        let v = natural_cubic_on_grid(&xs, &ys, 100);
        for (t, y) in v.iter().enumerate().skip(5).take(90) {
            assert!((y - (t as f64 / 15.0).sin()).abs() < 1e-4);
        }
    }
}
