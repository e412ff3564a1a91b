//! Classical fourth-order Runge–Kutta for scalar initial value problems,
//! refined by step doubling.

use crate::error::{Error, Result};
use crate::math::fabs;

pub fn rk4_step<F: FnMut(f64, f64) -> f64>(f: &mut F, x: f64, y: f64, h: f64) -> f64 {
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(x + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn rk4_fixed<F: FnMut(f64, f64) -> f64>(f: &mut F, x0: f64, y0: f64, x1: f64, steps: usize) -> f64 {
    let h = (x1 - x0) / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        y = rk4_step(f, x0 + i as f64 * h, y, h);
    }
    y
}

/// Advances `y' = f(x, y)` from `(x0, y0)` to `x1` (either direction). The
/// step count doubles until two successive solutions differ by less than
/// `tol * max(1, |y|)`.
pub fn integrate_to<F: FnMut(f64, f64) -> f64>(f: &mut F, x0: f64, y0: f64, x1: f64, tol: f64) -> Result<f64> {
    if x0 == x1 {
        return Ok(y0);
    }
    let mut steps = 1usize;
    let mut coarse = rk4_fixed(f, x0, y0, x1, steps);
    loop {
        steps *= 2;
        if steps > 1 << 22 {
            return Err(Error::StepUnderflow { at: x1 });
        }
        let fine = rk4_fixed(f, x0, y0, x1, steps);
        if !fine.is_finite() {
            return Err(Error::StepUnderflow { at: x1 });
        }
        if fabs(fine - coarse) < tol * fabs(fine).max(1.0) {
            return Ok(fine);
        }
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = integrate_to(&mut |_, y| -y, 0.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((y - libm::exp(-2.0)).abs() < 1e-11);
    }

    #[test]
    fn backward_integration() {
        // y' = 2x, y(1) = 1  =>  y(0) = 0
        let y = integrate_to(&mut |x, _| 2.0 * x, 1.0, 1.0, 0.0, 1e-12).unwrap();
        assert!(y.abs() < 1e-12);
    }
}
