//! Explicit Runge-Kutta integration of `dX/dt = f(X)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::field::{norm, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical fourth order with a fixed step.
    Rk4,
    /// Runge-Kutta-Fehlberg 4(5) with error control.
    Rkf45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RKF45.
    pub step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub min_step: f64,
    pub max_steps: usize,
    /// State norm treated as escape to infinity.
    pub blowup_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rkf45,
            step: 1e-2,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            min_step: 1e-15,
            max_steps: 2_000_000,
            blowup_threshold: 1e12,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig { method: Method::Rk4, step, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("step", self.step),
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("min_step", self.min_step),
            ("blowup_threshold", self.blowup_threshold),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// States sampled at increasing (or decreasing) times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    fn push(&mut self, t: f64, x: &[f64]) {
        self.times.push(t);
        self.states.push(x.to_vec());
    }
}

fn axpy(x: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
        .collect()
}

fn rk4_step(f: &VectorField, x: &[f64], h: f64) -> std::result::Result<Vec<f64>, EvalError> {
    let k1 = f.velocity(x)?;
    let k2 = f.velocity(&axpy(x, h, &[(0.5, &k1)]))?;
    let k3 = f.velocity(&axpy(x, h, &[(0.5, &k2)]))?;
    let k4 = f.velocity(&axpy(x, h, &[(1.0, &k3)]))?;
    Ok(axpy(x, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

/// Fifth-order solution and the scaled 4(5) error estimate.
fn rkf45_step(
    f: &VectorField,
    x: &[f64],
    h: f64,
    cfg: &IntegratorConfig,
) -> std::result::Result<(Vec<f64>, f64), EvalError> {
    let k1 = f.velocity(x)?;
    let k2 = f.velocity(&axpy(x, h, &[(0.25, &k1)]))?;
    let k3 = f.velocity(&axpy(x, h, &[(3.0 / 32.0, &k1), (9.0 / 32.0, &k2)]))?;
    let k4 = f.velocity(&axpy(
        x,
        h,
        &[(1932.0 / 2197.0, &k1), (-7200.0 / 2197.0, &k2), (7296.0 / 2197.0, &k3)],
    ))?;
    let k5 = f.velocity(&axpy(
        x,
        h,
        &[(439.0 / 216.0, &k1), (-8.0, &k2), (3680.0 / 513.0, &k3), (-845.0 / 4104.0, &k4)],
    ))?;
    let k6 = f.velocity(&axpy(
        x,
        h,
        &[
            (-8.0 / 27.0, &k1),
            (2.0, &k2),
            (-3544.0 / 2565.0, &k3),
            (1859.0 / 4104.0, &k4),
            (-11.0 / 40.0, &k5),
        ],
    ))?;
    let y5 = axpy(
        x,
        h,
        &[
            (16.0 / 135.0, &k1),
            (6656.0 / 12825.0, &k3),
            (28561.0 / 56430.0, &k4),
            (-9.0 / 50.0, &k5),
            (2.0 / 55.0, &k6),
        ],
    );
    let y4 = axpy(
        x,
        h,
        &[(25.0 / 216.0, &k1), (1408.0 / 2565.0, &k3), (2197.0 / 4104.0, &k4), (-0.2, &k5)],
    );
    let err = y5
        .iter()
        .zip(&y4)
        .zip(x)
        .map(|((a, b), x0)| (a - b).abs() / (cfg.abs_tol + cfg.rel_tol * a.abs().max(x0.abs())))
        .fold(0.0, f64::max);
    Ok((y5, err))
}

struct Stepper<'a> {
    f: &'a VectorField,
    cfg: &'a IntegratorConfig,
    t: f64,
    x: Vec<f64>,
    h: f64,
    steps: usize,
}

impl Stepper<'_> {
    fn escaped(&self, x: &[f64]) -> bool {
        !x.iter().all(|v| v.is_finite()) || norm(x) > self.cfg.blowup_threshold
    }

    fn blow_up(&self, mut partial: Trajectory) -> Error {
        partial.push(self.t, &self.x);
        Error::BlowUp { time: self.t, threshold: self.cfg.blowup_threshold, partial: Box::new(partial) }
    }

    fn count_step(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.cfg.max_steps {
            return Err(Error::StepLimit { time: self.t, steps: self.cfg.max_steps });
        }
        Ok(())
    }

    /// Advance exactly to `target`; `partial` is attached to a blow-up.
    fn advance_to(&mut self, target: f64, partial: &Trajectory) -> Result<()> {
        match self.cfg.method {
            Method::Rk4 => self.advance_rk4(target, partial),
            Method::Rkf45 => self.advance_rkf45(target, partial),
        }
    }

    fn advance_rk4(&mut self, target: f64, partial: &Trajectory) -> Result<()> {
        let span = target - self.t;
        let count = (span.abs() / self.cfg.step).ceil().max(1.0) as usize;
        let h = span / count as f64;
        let start = self.t;
        for i in 1..=count {
            self.count_step()?;
            let next = match rk4_step(self.f, &self.x, h) {
                Ok(next) => next,
                Err(_) if norm(&self.x) > self.cfg.blowup_threshold.sqrt() => {
                    return Err(self.blow_up(partial.clone()));
                }
                Err(e) => return Err(e.into()),
            };
            if self.escaped(&next) {
                return Err(self.blow_up(partial.clone()));
            }
            self.x = next;
            self.t = if i == count { target } else { start + h * i as f64 };
        }
        Ok(())
    }

    fn advance_rkf45(&mut self, target: f64, partial: &Trajectory) -> Result<()> {
        let direction = (target - self.t).signum();
        while (target - self.t) * direction > 0.0 {
            self.count_step()?;
            let remaining = target - self.t;
            let last = self.h.abs() >= remaining.abs();
            let h = if last { remaining } else { self.h.abs() * direction };
            let (next, err) = match rkf45_step(self.f, &self.x, h, self.cfg) {
                Ok(r) => r,
                // a stage left the domain or overflowed: retry smaller
                Err(_) => (Vec::new(), f64::INFINITY),
            };
            if err <= 1.0 && !next.is_empty() {
                if self.escaped(&next) {
                    self.t += h;
                    self.x = next;
                    return Err(self.blow_up(partial.clone()));
                }
                self.t = if last { target } else { self.t + h };
                self.x = next;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    self.h = h.abs() * factor;
                }
            } else {
                let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.25 };
                self.h = h.abs() * factor;
                if self.h < self.cfg.min_step {
                    if norm(&self.x) > self.cfg.blowup_threshold.sqrt() {
                        return Err(self.blow_up(partial.clone()));
                    }
                    return Err(Error::StepUnderflow { time: self.t, step: self.h });
                }
            }
        }
        Ok(())
    }
}

/// Integrate from `x0` at `t = 0` and record `samples` evenly spaced states
/// on `[0, t_end]`, both ends included. A negative `t_end` runs backwards.
pub fn integrate(
    f: &VectorField,
    x0: &[f64],
    t_end: f64,
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    match integrate_prefix(f, x0, t_end, samples, cfg)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// As [`integrate`], but a failure part way returns the samples reached
/// before it together with the error.
pub fn integrate_prefix(
    f: &VectorField,
    x0: &[f64],
    t_end: f64,
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, Option<Error>)> {
    cfg.validate()?;
    if x0.len() != f.dim() {
        return Err(EvalError::Dimension { expected: f.dim(), got: x0.len() }.into());
    }
    if !t_end.is_finite() || samples < 2 {
        return Err(Error::Config("need a finite end time and at least two samples".into()));
    }
    let mut traj = Trajectory { times: Vec::with_capacity(samples), states: Vec::with_capacity(samples) };
    let mut stepper = Stepper { f, cfg, t: 0.0, x: x0.to_vec(), h: cfg.step, steps: 0 };
    if stepper.escaped(x0) {
        let e = stepper.blow_up(Trajectory { times: Vec::new(), states: Vec::new() });
        return Ok((traj, Some(e)));
    }
    traj.push(0.0, x0);
    for k in 1..samples {
        let target = t_end * k as f64 / (samples - 1) as f64;
        if let Err(e) = stepper.advance_to(target, &traj) {
            return Ok((traj, Some(e)));
        }
        traj.push(target, &stepper.x);
    }
    Ok((traj, None))
}

/// The time-`t` flow map `phi_t(x0)`.
pub fn flow_map(f: &VectorField, x0: &[f64], t: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    if t == 0.0 {
        return Ok(x0.to_vec());
    }
    let traj = integrate(f, x0, t, 2, cfg)?;
    Ok(traj.states[1].clone())
}
