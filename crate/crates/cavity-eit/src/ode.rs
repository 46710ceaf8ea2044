//! Embedded Dormand-Prince 5(4) step with adaptive step-size control.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// 5th-order solution weights (also the a7j row: FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error weights: b − b̂ against the embedded 4th-order solution.
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

pub struct Dopri5<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]> {
    f: F,
    pub rtol: f64,
    pub atol: f64,
    t: f64,
    y: [f64; N],
    h: f64,
    k1: [f64; N],
}

impl<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]> Dopri5<N, F> {
    pub fn new(mut f: F, t0: f64, y0: [f64; N], rtol: f64, atol: f64, h0: f64) -> Self {
        let k1 = f(t0, &y0);
        Self {
            f,
            rtol,
            atol,
            t: t0,
            y: y0,
            h: h0,
            k1,
        }
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    /// Advance exactly to `t_target`, adapting the internal step.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        let span = (t_target - self.t).abs();
        if span == 0.0 {
            return Ok(());
        }
        let h_min = span.max(self.t.abs()).max(1.0) * 1e-14;
        while self.t < t_target {
            let mut h = self.h.min(t_target - self.t);
            loop {
                if h < h_min {
                    return Err(Error::StepSizeUnderflow { t: self.t });
                }
                let (y_new, k7, err) = self.try_step(h);
                if err <= 1.0 {
                    self.t += h;
                    self.y = y_new;
                    self.k1 = k7;
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    self.h = h * factor;
                    break;
                }
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        Ok(())
    }

    fn try_step(&mut self, h: f64) -> ([f64; N], [f64; N], f64) {
        let t = self.t;
        let y = &self.y;
        let k1 = &self.k1;

        let y2 = arr(|i| y[i] + h * A21 * k1[i]);
        let k2 = (self.f)(t + C2 * h, &y2);
        let y3 = arr(|i| y[i] + h * (A31 * k1[i] + A32 * k2[i]));
        let k3 = (self.f)(t + C3 * h, &y3);
        let y4 = arr(|i| y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]));
        let k4 = (self.f)(t + C4 * h, &y4);
        let y5 = arr(|i| y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]));
        let k5 = (self.f)(t + C5 * h, &y5);
        let y6 = arr(|i| {
            y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        });
        let k6 = (self.f)(t + h, &y6);
        let y_new =
            arr(|i| y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]));
        let k7 = (self.f)(t + h, &y_new);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        (y_new, k7, (err_sq / N as f64).sqrt())
    }
}

fn arr<const N: usize>(f: impl Fn(usize) -> f64) -> [f64; N] {
    std::array::from_fn(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_to_tolerance() {
        let lambda = 1.7;
        let mut solver = Dopri5::new(
            |_, y: &[f64; 1]| [-lambda * y[0]],
            0.0,
            [1.0],
            1e-10,
            1e-13,
            1e-3,
        );
        solver.advance_to(3.0).unwrap();
        let expect = (-lambda * 3.0_f64).exp();
        assert!((solver.state()[0] - expect).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let mut solver = Dopri5::new(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            1e-11,
            1e-13,
            1e-3,
        );
        solver.advance_to(20.0 * std::f64::consts::PI).unwrap();
        let [x, v] = *solver.state();
        assert!((x - 1.0).abs() < 1e-7);
        assert!(v.abs() < 1e-7);
        assert!((x * x + v * v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos(t), y(0) = 0 → y = sin(t).
        let mut solver = Dopri5::new(
            |t: f64, _: &[f64; 1]| [t.cos()],
            0.0,
            [0.0],
            1e-11,
            1e-13,
            1e-3,
        );
        solver.advance_to(2.5).unwrap();
        assert!((solver.state()[0] - 2.5_f64.sin()).abs() < 1e-9);
    }
}
