//! Dormand–Prince 5(4) for autonomous systems, with the standard 4th-order
//! continuous extension for dense output.

use crate::error::{Error, Result};
use crate::geometry::Vector;

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Smallest admissible step.
pub const MIN_STEP: f64 = 1e-14;

/// One accepted step on [t0, t0 + h] with its interpolant.
#[derive(Clone, Debug)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    r: [Vector; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn y0(&self) -> &Vector {
        &self.r[0]
    }

    pub fn y1(&self) -> Vector {
        &self.r[0] + &self.r[1]
    }

    pub fn eval(&self, t: f64) -> Vector {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let a = &self.r[3] + &self.r[4] * th1;
        let b = &self.r[2] + a * th;
        let c = &self.r[1] + b * th1;
        &self.r[0] + c * th
    }

    /// d/dt of the interpolant.
    pub fn deriv(&self, t: f64) -> Vector {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let a = &self.r[3] + &self.r[4] * th1;
        let da = -&self.r[4];
        let b = &self.r[2] + &a * th;
        let db = &a + da * th;
        let c = &self.r[1] + &b * th1;
        let dc = -&b + db * th1;
        (c + dc * th) / self.h
    }
}

/// Right-hand side y ↦ f(y) of an autonomous system.
pub type Rhs<'a> = dyn Fn(&Vector) -> Result<Vector> + 'a;

pub struct Dopri5<'a> {
    rhs: &'a Rhs<'a>,
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
}

pub struct Attempt {
    pub y1: Vector,
    pub k7: Vector,
    pub err: f64,
    pub dense: DenseStep,
}

impl<'a> Dopri5<'a> {
    pub fn new(rhs: &'a Rhs<'a>, rtol: f64, atol: f64, h_max: f64) -> Self {
        Self { rhs, rtol, atol, h_max }
    }

    pub fn eval(&self, y: &Vector) -> Result<Vector> {
        (self.rhs)(y)
    }

    /// One step of size h from y with k1 = f(y); no acceptance decision.
    pub fn attempt(&self, t0: f64, y: &Vector, k1: &Vector, h: f64) -> Result<Attempt> {
        let f = self.rhs;
        let k2 = f(&(y + k1 * (h * A21)))?;
        let k3 = f(&(y + (k1 * A31 + &k2 * A32) * h))?;
        let k4 = f(&(y + (k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
        let k5 = f(&(y + (k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h))?;
        let k6 = f(&(y + (k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h))?;
        let y1 = y + (k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
        let k7 = f(&y1)?;
        let e = (k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
        let mut acc = 0.0;
        for i in 0..y.len() {
            let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
            acc += (e[i] / sc).powi(2);
        }
        let err = (acc / y.len() as f64).sqrt();
        let r1 = y.clone();
        let r2 = &y1 - y;
        let r3 = k1 * h - &r2;
        let r4 = &r2 - &k7 * h - &r3;
        let r5 = (k1 * D1 + &k3 * D3 + &k4 * D4 + &k5 * D5 + &k6 * D6 + &k7 * D7) * h;
        Ok(Attempt { y1, k7, err, dense: DenseStep { t0, h, r: [r1, r2, r3, r4, r5] } })
    }

    /// Retries from (t0, y) until a step is accepted. Returns the step, f at its
    /// end, and the suggested next step size.
    pub fn advance(&self, t0: f64, y: &Vector, k1: &Vector, mut h: f64) -> Result<(DenseStep, Vector, f64)> {
        h = h.min(self.h_max);
        loop {
            if h < MIN_STEP {
                return Err(Error::StepFailure { t: t0, h });
            }
            let at = self.attempt(t0, y, k1, h)?;
            if !at.err.is_finite() {
                h *= 0.2;
                continue;
            }
            let factor = if at.err == 0.0 { 5.0 } else { (0.9 * at.err.powf(-0.2)).clamp(0.2, 5.0) };
            if at.err <= 1.0 {
                let next = (h * factor).min(self.h_max);
                return Ok((at.dense, at.k7, next));
            }
            h *= factor.min(1.0);
        }
    }

    /// A single uncontrolled step, used to land on event times inside an
    /// already accepted step. Negative h integrates backward.
    pub fn jump(&self, y: &Vector, h: f64) -> Result<Vector> {
        if h == 0.0 {
            return Ok(y.clone());
        }
        let k1 = self.eval(y)?;
        Ok(self.attempt(0.0, y, &k1, h)?.y1)
    }

    /// Like [`jump`](Self::jump) but returns the dense step.
    pub fn partial(&self, t0: f64, y: &Vector, h: f64) -> Result<DenseStep> {
        let k1 = self.eval(y)?;
        Ok(self.attempt(t0, y, &k1, h)?.dense)
    }

    /// Initial step guess (Hairer–Wanner).
    pub fn initial_step(&self, y: &Vector, k1: &Vector) -> f64 {
        let d0 = y.norm() / (y.len() as f64).sqrt();
        let d1 = k1.norm() / (y.len() as f64).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * (self.atol + self.rtol * d0) / (self.atol + self.rtol * d1) * d0 / d1 };
        h.max(1e-6).min(self.h_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_quarter_period() {
        let rhs = |y: &Vector| -> Result<Vector> { Ok(Vector::from_vec(vec![y[1], -y[0]])) };
        let solver = Dopri5::new(&rhs, 1e-12, 1e-12, 0.1);
        let mut y = Vector::from_vec(vec![1.0, 0.0]);
        let mut k1 = solver.eval(&y).unwrap();
        let mut t = 0.0;
        let mut h = solver.initial_step(&y, &k1);
        let target = std::f64::consts::FRAC_PI_2;
        let mut steps = Vec::new();
        while t < target {
            let (step, k7, next) = solver.advance(t, &y, &k1, h.min(target - t)).unwrap();
            t = step.t1();
            y = step.y1();
            k1 = k7;
            h = next;
            steps.push(step);
        }
        assert!((y[0] - 0.0).abs() < 1e-10, "{}", y[0]);
        assert!((y[1] + 1.0).abs() < 1e-10);
        // dense output and its derivative inside a step
        let s = &steps[steps.len() / 2];
        let tm = s.t0 + 0.37 * s.h;
        let ym = s.eval(tm);
        assert!((ym[0] - tm.cos()).abs() < 1e-9);
        let dy = s.deriv(tm);
        assert!((dy[0] + tm.sin()).abs() < 1e-8);
    }
}
