//! Fractional first-order plants with transport delay, `K e^{-Ls} / (T s^alpha + 1)`.
//!
//! The lag is realized as a unity-feedback loop around the strictly proper
//! forward path `s^{-alpha} / T`, where `s^{-alpha}` is an exact integrator
//! power times an Oustaloup approximation of the fractional remainder. The
//! resulting state-space model is discretized with the trapezoidal rule and
//! driven through a sample-delay line.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{FilterRealization, FilterSettings, FracOrder};

/// Parameters of the non-integer order plus time delay plant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantModel {
    /// DC gain `K`.
    pub gain: f64,
    /// Pseudo time constant `T`.
    pub time_constant: f64,
    /// Fractional order `alpha` of the lag.
    pub alpha: f64,
    /// Dead time `L`, seconds.
    pub dead_time: f64,
}

impl PlantModel {
    pub fn new(gain: f64, time_constant: f64, alpha: f64, dead_time: f64) -> Result<Self> {
        let m = Self { gain, time_constant, alpha, dead_time };
        m.validate()?;
        Ok(m)
    }

    /// Lag-dominant plant: `1 / (1.11 s^1.5 + 1) e^{-0.105 s}`.
    pub fn gp1() -> Self {
        Self { gain: 1.0, time_constant: 1.11, alpha: 1.5, dead_time: 0.105 }
    }

    /// Balanced lag and delay: `5 / (1.5 s^1.5 + 1) e^{-s}`.
    pub fn gp2() -> Self {
        Self { gain: 5.0, time_constant: 1.5, alpha: 1.5, dead_time: 1.0 }
    }

    /// Delay-dominant plant: `1 / (0.05 s^1.5 + 1) e^{-s}`.
    pub fn gp3() -> Self {
        Self { gain: 1.0, time_constant: 0.05, alpha: 1.5, dead_time: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidPlant(msg.to_string()));
        if !self.gain.is_finite() || self.gain == 0.0 {
            return bad("gain must be finite and nonzero");
        }
        if !(self.time_constant.is_finite() && self.time_constant > 0.0) {
            return bad("time constant must be positive");
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.alpha < 2.0) {
            return bad("alpha must lie in (0, 2)");
        }
        if !(self.dead_time.is_finite() && self.dead_time >= 0.0) {
            return bad("dead time must be non-negative");
        }
        Ok(())
    }

    /// `L / (L + T)`.
    pub fn relative_dead_time(&self) -> f64 {
        self.dead_time / (self.dead_time + self.time_constant)
    }

    pub fn realize(&self, dt: f64, filters: &FilterSettings) -> Result<PlantRealization> {
        PlantRealization::new(self, dt, filters)
    }
}

/// Single-input single-output continuous state-space model.
#[derive(Clone, Debug)]
struct StateSpace {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    d: f64,
}

impl StateSpace {
    fn gain(k: f64) -> Self {
        Self { a: DMatrix::zeros(0, 0), b: DVector::zeros(0), c: DVector::zeros(0), d: k }
    }

    fn integrator() -> Self {
        Self { a: DMatrix::zeros(1, 1), b: DVector::from_element(1, 1.0), c: DVector::from_element(1, 1.0), d: 0.0 }
    }

    /// `(s + zero) / (s + pole) = 1 + (zero - pole) / (s + pole)`.
    fn lead_lag(zero: f64, pole: f64) -> Self {
        Self {
            a: DMatrix::from_element(1, 1, -pole),
            b: DVector::from_element(1, 1.0),
            c: DVector::from_element(1, zero - pole),
            d: 1.0,
        }
    }

    fn order(&self) -> usize {
        self.b.len()
    }

    /// `next` driven by the output of `self`.
    fn then(self, next: StateSpace) -> StateSpace {
        let (n1, n2) = (self.order(), next.order());
        let n = n1 + n2;
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&next.b * self.c.transpose()));
        let mut b = DVector::zeros(n);
        b.rows_mut(0, n1).copy_from(&self.b);
        b.rows_mut(n1, n2).copy_from(&(&next.b * self.d));
        let mut c = DVector::zeros(n);
        c.rows_mut(0, n1).copy_from(&(&self.c * next.d));
        c.rows_mut(n1, n2).copy_from(&next.c);
        StateSpace { a, b, c, d: self.d * next.d }
    }

    /// Unity negative feedback around `self`.
    fn unity_feedback(self) -> StateSpace {
        let s = 1.0 / (1.0 + self.d);
        let a = &self.a - (&self.b * self.c.transpose()) * s;
        StateSpace { a, b: &self.b * s, c: &self.c * s, d: self.d * s }
    }

    fn scaled(mut self, k: f64) -> StateSpace {
        self.c *= k;
        self.d *= k;
        self
    }
}

/// Sample-stepping form of a [`PlantModel`].
#[derive(Clone, Debug)]
pub struct PlantRealization {
    model: PlantModel,
    dt: f64,
    n: usize,
    // row-major discrete transition matrix
    ad: Vec<f64>,
    bd: Vec<f64>,
    c: Vec<f64>,
    d: f64,
    x: Vec<f64>,
    scratch: Vec<f64>,
    delay: VecDeque<f64>,
    delay_len: usize,
    y: f64,
}

impl PlantRealization {
    pub fn new(model: &PlantModel, dt: f64, filters: &FilterSettings) -> Result<Self> {
        model.validate()?;
        filters.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidStep(dt));
        }
        if model.dead_time > 0.0 && dt > model.dead_time {
            return Err(Error::InvalidPlant(format!("dt = {dt} cannot resolve dead time {}", model.dead_time)));
        }

        let (int_power, frac) = FracOrder::new(-model.alpha)?.split();
        let mut forward = StateSpace::gain(1.0 / model.time_constant);
        for _ in 0..int_power.unsigned_abs() {
            forward = forward.then(StateSpace::integrator());
        }
        if frac != 0.0 {
            let approx = FilterRealization::synthesize(&filters.spec(frac)?)?;
            forward = forward.then(StateSpace::gain(approx.gain));
            for (&z, &p) in approx.zeros.iter().zip(&approx.poles) {
                forward = forward.then(StateSpace::lead_lag(z, p));
            }
        }
        let ss = forward.unity_feedback().scaled(model.gain);

        let n = ss.order();
        let eye = DMatrix::<f64>::identity(n, n);
        let half = &ss.a * (0.5 * dt);
        let lhs = (&eye - &half)
            .try_inverse()
            .ok_or_else(|| Error::InvalidPlant("singular trapezoidal discretization".into()))?;
        let ad = &lhs * (&eye + &half);
        let bd = &lhs * &ss.b * dt;

        let delay_len = (model.dead_time / dt).round() as usize;
        Ok(Self {
            model: *model,
            dt,
            n,
            ad: ad.transpose().as_slice().to_vec(),
            bd: bd.as_slice().to_vec(),
            c: ss.c.as_slice().to_vec(),
            d: ss.d,
            x: vec![0.0; n],
            scratch: vec![0.0; n],
            delay: VecDeque::from(vec![0.0; delay_len]),
            delay_len,
            y: 0.0,
        })
    }

    pub fn model(&self) -> &PlantModel {
        &self.model
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn delay_samples(&self) -> usize {
        self.delay_len
    }

    pub fn state_order(&self) -> usize {
        self.n
    }

    /// Current output.
    pub fn output(&self) -> f64 {
        self.y
    }

    /// Applies `u` for one sample period and returns the output at the end of it.
    pub fn step(&mut self, u: f64) -> f64 {
        let ud = if self.delay_len == 0 {
            u
        } else {
            self.delay.push_back(u);
            self.delay.pop_front().unwrap_or(0.0)
        };
        let n = self.n;
        for i in 0..n {
            let row = &self.ad[i * n..(i + 1) * n];
            let mut acc = self.bd[i] * ud;
            for (a, x) in row.iter().zip(&self.x) {
                acc += a * x;
            }
            self.scratch[i] = acc;
        }
        std::mem::swap(&mut self.x, &mut self.scratch);
        let mut y = self.d * ud;
        for (c, x) in self.c.iter().zip(&self.x) {
            y += c * x;
        }
        self.y = y;
        y
    }

    pub fn reset(&mut self) {
        self.x.iter_mut().for_each(|v| *v = 0.0);
        self.delay.iter_mut().for_each(|v| *v = 0.0);
        self.y = 0.0;
    }
}
