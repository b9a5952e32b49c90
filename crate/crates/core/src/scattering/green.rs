//! Outgoing free-space Green function of `−Δ − κ²` in the plane,
//! `G(x, y) = (i/4) H⁽¹⁾₀(κ|x − y|)`.

use num_complex::Complex64;

use super::bessel::hankel1_orders;
use crate::error::{Error, Result};
use crate::microstructure::Point;

const COINCIDENT: f64 = 1e-12;

fn separation(x: Point, y: Point) -> Result<(f64, [f64; 2])> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    if r <= COINCIDENT {
        return Err(Error::SingularPoint);
    }
    Ok((r, d))
}

pub fn green_2d(kappa: f64, x: Point, y: Point) -> Result<Complex64> {
    let (r, _) = separation(x, y)?;
    let h = hankel1_orders(0, kappa * r)?;
    Ok(Complex64::new(0.0, 0.25) * h[0])
}

/// Gradient of `G(·, y)` with respect to its first argument, evaluated at `x`:
/// `−(i/4) κ H⁽¹⁾₁(κr) (x − y)/r`.
pub fn grad_green_2d(kappa: f64, x: Point, y: Point) -> Result<[Complex64; 2]> {
    let (r, d) = separation(x, y)?;
    let h = hankel1_orders(1, kappa * r)?;
    let c = Complex64::new(0.0, -0.25) * kappa * h[1] / r;
    Ok([c * d[0], c * d[1]])
}

/// Value and first-argument gradient together (one Hankel evaluation).
pub fn green_with_gradient(kappa: f64, x: Point, y: Point) -> Result<(Complex64, [Complex64; 2])> {
    let (r, d) = separation(x, y)?;
    let h = hankel1_orders(1, kappa * r)?;
    let i4 = Complex64::new(0.0, 0.25);
    let c = -i4 * kappa * h[1] / r;
    Ok((i4 * h[0], [c * d[0], c * d[1]]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_singular() {
        let (x, y) = ([0.3, -1.2], [2.0, 0.7]);
        assert_eq!(green_2d(5.0, x, y).unwrap(), green_2d(5.0, y, x).unwrap());
        assert!(matches!(green_2d(5.0, x, x), Err(Error::SingularPoint)));
        assert!(matches!(
            grad_green_2d(5.0, x, x),
            Err(Error::SingularPoint)
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y, k) = ([0.4, 0.1], [-0.8, 0.9], 5.0);
        let g = grad_green_2d(k, x, y).unwrap();
        let h = 1e-6;
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            let fd = (green_2d(k, xp, y).unwrap() - green_2d(k, xm, y).unwrap()) / (2.0 * h);
            assert!((fd - g[d]).norm() < 1e-7, "{fd} vs {}", g[d]);
        }
        let (v, gg) = green_with_gradient(k, x, y).unwrap();
        assert_eq!(v, green_2d(k, x, y).unwrap());
        assert_eq!(gg, g);
    }

    #[test]
    fn far_field_decays_like_inverse_square_root() {
        let k = 5.0;
        for r in [20.0, 40.0, 80.0] {
            let a = green_2d(k, [r, 0.0], [0.0, 0.0]).unwrap().norm();
            let b = green_2d(k, [2.0 * r, 0.0], [0.0, 0.0]).unwrap().norm();
            let ratio = a / b;
            assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.05, "{ratio}");
        }
    }
}
