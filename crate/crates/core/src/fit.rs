//! Least-squares slope fits and finite-difference order estimation.

/// Least-squares line through (x_i, y_i); returns (slope, intercept).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

/// Slope of log(y) against log(x).
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly).0
}

/// Observed convergence order from residuals at steps h, h/2, h/4, ...:
/// order_i = log2(r_i / r_{i+1}); returns the per-halving ratios and orders.
pub fn convergence_orders(residuals: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut ratios = Vec::new();
    let mut orders = Vec::new();
    for w in residuals.windows(2) {
        let r = w[0] / w[1];
        ratios.push(r);
        orders.push(r.log2());
    }
    (ratios, orders)
}

/// Richardson extrapolation of a second-order sequence r(h), r(h/2):
/// the extrapolated limit (4*r2 - r1)/3 ... for residual NORMS the limit of the
/// quantity itself; for pure O(h^2) residuals this estimates the h->0 value.
pub fn richardson2(r_h: f64, r_h2: f64) -> f64 {
    (4.0 * r_h2 - r_h) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (m, b) = fit_line(&xs, &ys);
        assert!((m - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loglog_powerlaw() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|&x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((fit_loglog(&xs, &ys) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn orders() {
        let (_, ords) = convergence_orders(&[1.0, 0.25, 0.0625]);
        assert!(ords.iter().all(|o| (o - 2.0).abs() < 1e-12));
    }
}
