//! Classical fourth-order Runge–Kutta with a fixed step.
//!
//! Both the mean-field propagation model and the replicator dynamics are
//! autonomous, so systems only expose `dy/dt = f(y)`.

use crate::scalar::Real;

pub trait Autonomous<T: Real, const D: usize> {
    fn derivative(&self, y: &[T; D]) -> [T; D];
}

impl<T: Real, const D: usize, F> Autonomous<T, D> for F
where
    F: Fn(&[T; D]) -> [T; D],
{
    fn derivative(&self, y: &[T; D]) -> [T; D] {
        self(y)
    }
}

#[inline]
fn axpy<T: Real, const D: usize>(y: &[T; D], h: T, k: &[T; D]) -> [T; D] {
    std::array::from_fn(|j| y[j] + h * k[j])
}

/// One RK4 step of size `h` from `y`.
pub fn rk4_step<T, S, const D: usize>(system: &S, y: &[T; D], h: T) -> [T; D]
where
    T: Real,
    S: Autonomous<T, D> + ?Sized,
{
    let half = h * T::lit(0.5);
    let k1 = system.derivative(y);
    let k2 = system.derivative(&axpy(y, half, &k1));
    let k3 = system.derivative(&axpy(y, half, &k2));
    let k4 = system.derivative(&axpy(y, h, &k3));
    let two = T::lit(2.0);
    let sixth = h / T::lit(6.0);
    std::array::from_fn(|j| y[j] + sixth * (k1[j] + two * k2[j] + two * k3[j] + k4[j]))
}

/// Advances `steps` RK4 steps in place.
pub fn rk4_advance<T, S, const D: usize>(system: &S, y: &mut [T; D], h: T, steps: usize)
where
    T: Real,
    S: Autonomous<T, D> + ?Sized,
{
    for _ in 0..steps {
        *y = rk4_step(system, y, h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        let decay = |y: &[f64; 1]| [-y[0]];
        let err = |h: f64| {
            let mut y = [1.0];
            rk4_advance(&decay, &mut y, h, (1.0 / h).round() as usize);
            (y[0] - (-1.0_f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn harmonic_oscillator_f32() {
        let osc = |y: &[f32; 2]| [y[1], -y[0]];
        let mut y = [1.0_f32, 0.0];
        rk4_advance(&osc, &mut y, 0.01, 628);
        assert!((y[0] - 6.28_f32.cos()).abs() < 1e-4, "{}", y[0]);
    }
}
