//! Adaptive Dormand-Prince 5(4) integration for autonomous complex systems.

use crate::error::{Error, Result};
use crate::operator::{c64, ZERO};

/// Error-control tolerances for adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10 }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Single-step Dormand-Prince kernel with first-same-as-last reuse.
pub(crate) struct Dopri5<F> {
    f: F,
    tol: Tolerances,
    k: [Vec<c64>; 7],
    stage: Vec<c64>,
    k1_valid: bool,
}

impl<F: FnMut(&[c64], &mut [c64])> Dopri5<F> {
    pub(crate) fn new(f: F, n: usize, tol: Tolerances) -> Self {
        Self {
            f,
            tol,
            k: std::array::from_fn(|_| vec![ZERO; n]),
            stage: vec![ZERO; n],
            k1_valid: false,
        }
    }

    /// Forgets the cached derivative; required whenever `y` changes outside `attempt`.
    pub(crate) fn invalidate(&mut self) {
        self.k1_valid = false;
    }

    /// Writes a fifth-order step of size `h` from `y` into `out` and returns the scaled error norm.
    pub(crate) fn attempt(&mut self, y: &[c64], h: f64, out: &mut [c64]) -> f64 {
        if !self.k1_valid {
            (self.f)(y, &mut self.k[0]);
            self.k1_valid = true;
        }
        for s in 1..7 {
            for i in 0..y.len() {
                let mut acc = ZERO;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                self.stage[i] = y[i] + acc * h;
            }
            let (_, rest) = self.k.split_at_mut(s);
            (self.f)(&self.stage, &mut rest[0]);
        }
        // stage 7 is evaluated at the fifth-order solution
        out.copy_from_slice(&self.stage);

        let mut sum = 0.0;
        for i in 0..y.len() {
            let mut err = ZERO;
            for (j, e) in E.iter().enumerate() {
                if *e != 0.0 {
                    err += self.k[j][i] * *e;
                }
            }
            let sc = self.tol.atol + self.tol.rtol * y[i].norm().max(out[i].norm());
            sum += (err * h).norm_sqr() / (sc * sc);
        }
        (sum / y.len().max(1) as f64).sqrt()
    }

    /// Marks the last attempt as taken, so its final stage seeds the next step.
    pub(crate) fn accept(&mut self) {
        self.k.swap(0, 6);
    }

    pub(crate) fn derivative(&mut self, y: &[c64], out: &mut [c64]) {
        (self.f)(y, out);
    }

    pub(crate) fn tolerances(&self) -> Tolerances {
        self.tol
    }
}

/// Step-size update factor from a scaled error norm.
pub(crate) fn step_factor(err: f64) -> f64 {
    if !err.is_finite() {
        0.2
    } else if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

pub(crate) fn check_underflow(h: f64, t: f64) -> Result<()> {
    if h < 1e-14 * t.abs().max(1.0) {
        Err(Error::StepSizeUnderflow { t })
    } else {
        Ok(())
    }
}

pub(crate) fn initial_step<F: FnMut(&[c64], &mut [c64])>(stepper: &mut Dopri5<F>, y: &[c64], span: f64) -> f64 {
    let tol = stepper.tolerances();
    let mut dy = vec![ZERO; y.len()];
    stepper.derivative(y, &mut dy);
    let scaled = |v: &[c64]| {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let sc = tol.atol + tol.rtol * b.norm();
                a.norm_sqr() / (sc * sc)
            })
            .sum();
        (s / v.len().max(1) as f64).sqrt()
    };
    let (d0, d1) = (scaled(y), scaled(&dy));
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12 * span)
}

/// Integrates `dy/dt = f(y)` and keeps the step size between calls.
pub(crate) struct Integrator<F> {
    stepper: Dopri5<F>,
    t: f64,
    h: Option<f64>,
    scratch: Vec<c64>,
}

impl<F: FnMut(&[c64], &mut [c64])> Integrator<F> {
    pub(crate) fn new(f: F, n: usize, t0: f64, tol: Tolerances) -> Self {
        Self { stepper: Dopri5::new(f, n, tol), t: t0, h: None, scratch: vec![ZERO; n] }
    }

    pub(crate) fn advance_to(&mut self, y: &mut [c64], t_target: f64) -> Result<()> {
        if t_target <= self.t {
            return Ok(());
        }
        let mut h = match self.h {
            Some(h) => h,
            None => initial_step(&mut self.stepper, y, t_target - self.t),
        };
        while self.t < t_target {
            let remaining = t_target - self.t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let err = self.stepper.attempt(y, step, &mut self.scratch);
            if err <= 1.0 {
                self.stepper.accept();
                y.copy_from_slice(&self.scratch);
                self.t = if last { t_target } else { self.t + step };
                // keep the controller's proposal rather than the clipped final step
                h = if last { h.max(step * step_factor(err)) } else { step * step_factor(err) };
            } else {
                h = step * step_factor(err);
                check_underflow(h, self.t)?;
            }
        }
        self.h = Some(h);
        Ok(())
    }
}
