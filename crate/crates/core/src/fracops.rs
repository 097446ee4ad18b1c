//! Fractional-order differ-integrators.
//!
//! `s^beta` is approximated over a frequency band with Oustaloup's recursive
//! zero/pole distribution. Orders with `|beta| >= 1` are split into an exact
//! integer power of `s` and a fractional remainder in `(-1, 1)`; only the
//! remainder goes through the rational approximation.
//!
//! The continuous realization is executed sample-by-sample as a cascade of
//! independently discretized first-order sections. A Grünwald–Letnikov
//! sum with full memory is provided as an independent reference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest differ-integration order magnitude accepted anywhere in the crate.
pub const MAX_ORDER: f64 = 2.0;

/// A differ-integration order. Negative values integrate.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta.abs() > MAX_ORDER {
            return Err(Error::InvalidOrder(beta));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Splits the order into `(integer_power, remainder)` with the integer part
    /// truncated toward zero, so the remainder lies in `(-1, 1)` and shares the
    /// sign of the order.
    pub fn split(self) -> (i32, f64) {
        let int = self.0.trunc();
        (int as i32, self.0 - int)
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FracOrder> for f64 {
    fn from(o: FracOrder) -> f64 {
        o.0
    }
}

/// Fitting band of the rational approximation, in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

impl Band {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        let b = Self { low, high };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.low.is_finite() && self.high.is_finite() && self.low > 0.0 && self.low < self.high) {
            return Err(Error::InvalidBand { low: self.low, high: self.high });
        }
        Ok(())
    }
}

impl Default for Band {
    fn default() -> Self {
        Self { low: 1e-2, high: 1e2 }
    }
}

/// Parameters of one Oustaloup approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OustaloupSpec {
    pub order: FracOrder,
    /// `N`; the filter has `2N + 1` zero/pole pairs.
    pub half_order: usize,
    pub band: Band,
}

/// How each first-order section `(s + z) / (s + p)` is mapped to discrete time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    /// Bilinear (trapezoidal) map `s = (2/dt)(1 - q^-1)/(1 + q^-1)`.
    #[default]
    Tustin,
    /// Implicit Euler map `s = (1 - q^-1)/dt`.
    BackwardEuler,
}

/// Everything needed to turn an order into an executable operator at a given step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSettings {
    pub band: Band,
    pub half_order: usize,
    pub method: Discretization,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self { band: Band::default(), half_order: 2, method: Discretization::Tustin }
    }
}

impl FilterSettings {
    pub fn validate(&self) -> Result<()> {
        self.band.validate()?;
        if self.half_order == 0 {
            return Err(Error::InvalidFilterOrder);
        }
        Ok(())
    }

    pub fn spec(&self, order: f64) -> Result<OustaloupSpec> {
        Ok(OustaloupSpec { order: FracOrder::new(order)?, half_order: self.half_order, band: self.band })
    }

    /// Synthesizes and discretizes `s^order` at step `dt`.
    pub fn operator(&self, order: f64, dt: f64) -> Result<DiscreteFilter> {
        FilterRealization::synthesize(&self.spec(order)?)?.discretize(dt, self.method)
    }
}

/// Zero/pole/gain approximation of `s^beta`, times an exact `s^integer_power`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterRealization {
    /// Zero corner frequencies `w'_k` for `k = -N..=N`, rad/s.
    pub zeros: Vec<f64>,
    /// Pole corner frequencies `w_k` for `k = -N..=N`, rad/s.
    pub poles: Vec<f64>,
    pub gain: f64,
    pub integer_power: i32,
    /// The approximated remainder, in `(-1, 1)`.
    pub fractional: f64,
}

impl FilterRealization {
    pub fn synthesize(spec: &OustaloupSpec) -> Result<Self> {
        spec.band.validate()?;
        if spec.half_order == 0 {
            return Err(Error::InvalidFilterOrder);
        }
        let (integer_power, frac) = spec.order.split();
        let n = spec.half_order as i64;
        let ratio = spec.band.high / spec.band.low;
        let denom = (2 * n + 1) as f64;
        let mut zeros = Vec::with_capacity(2 * spec.half_order + 1);
        let mut poles = Vec::with_capacity(2 * spec.half_order + 1);
        for k in -n..=n {
            let base = (k + n) as f64;
            zeros.push(spec.band.low * ratio.powf((base + 0.5 * (1.0 - frac)) / denom));
            poles.push(spec.band.low * ratio.powf((base + 0.5 * (1.0 + frac)) / denom));
        }
        Ok(Self { zeros, poles, gain: spec.band.high.powf(frac), integer_power, fractional: frac })
    }

    /// Continuous-time frequency response at `omega` rad/s.
    pub fn freq_response(&self, omega: f64) -> Complex64 {
        let jw = Complex64::new(0.0, omega);
        let mut h = Complex64::new(self.gain, 0.0) * jw.powi(self.integer_power);
        for (z, p) in self.zeros.iter().zip(&self.poles) {
            h *= (jw + z) / (jw + p);
        }
        h
    }

    /// True when the rational part is exactly unity (remainder zero).
    fn is_unity(&self) -> bool {
        self.fractional == 0.0
    }

    pub fn discretize(&self, dt: f64, method: Discretization) -> Result<DiscreteFilter> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidStep(dt));
        }
        let sections = if self.is_unity() {
            Vec::new()
        } else {
            self.zeros
                .iter()
                .zip(&self.poles)
                .map(|(&z, &p)| Section::new(z, p, dt, method))
                .collect()
        };
        let gain = if self.is_unity() { 1.0 } else { self.gain };
        let stages = self.integer_power.unsigned_abs() as usize;
        Ok(DiscreteFilter {
            gain,
            sections,
            integer_power: self.integer_power,
            prev: vec![0.0; stages],
            acc: vec![0.0; stages],
            dt,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Section {
    b0: f64,
    b1: f64,
    a1: f64,
    state: f64,
}

impl Section {
    fn new(zero: f64, pole: f64, dt: f64, method: Discretization) -> Self {
        let (b0, b1, a1) = match method {
            Discretization::Tustin => {
                let c = 2.0 / dt;
                let d = c + pole;
                ((c + zero) / d, (zero - c) / d, (pole - c) / d)
            }
            Discretization::BackwardEuler => {
                let c = 1.0 / dt;
                let d = c + pole;
                ((c + zero) / d, -c / d, -c / d)
            }
        };
        Self { b0, b1, a1, state: 0.0 }
    }

    #[inline]
    fn step(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.state;
        self.state = self.b1 * x - self.a1 * y;
        y
    }
}

/// Causal, stateful execution of a [`FilterRealization`] at a fixed step.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFilter {
    gain: f64,
    sections: Vec<Section>,
    integer_power: i32,
    // per integer stage: previous input (differentiation) or previous input
    // plus running sum (integration)
    prev: Vec<f64>,
    acc: Vec<f64>,
    dt: f64,
}

impl DiscreteFilter {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn integer_power(&self) -> i32 {
        self.integer_power
    }

    /// Advances the filter by one sample.
    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        let mut y = self.gain * x;
        for s in &mut self.sections {
            y = s.step(y);
        }
        if self.integer_power > 0 {
            for prev in &mut self.prev {
                let d = (y - *prev) / self.dt;
                *prev = y;
                y = d;
            }
        } else if self.integer_power < 0 {
            let half = 0.5 * self.dt;
            for (prev, acc) in self.prev.iter_mut().zip(&mut self.acc) {
                *acc += half * (y + *prev);
                *prev = y;
                y = *acc;
            }
        }
        y
    }

    pub fn run(&mut self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.step(x)).collect()
    }

    pub fn reset(&mut self) {
        for s in &mut self.sections {
            s.state = 0.0;
        }
        self.prev.iter_mut().for_each(|v| *v = 0.0);
        self.acc.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Grünwald–Letnikov weights `w_j = w_{j-1} (1 - (beta + 1)/j)`, `w_0 = 1`.
pub fn gl_weights(beta: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    if len == 0 {
        return w;
    }
    w.push(1.0);
    for j in 1..len {
        let prev = w[j - 1];
        w.push(prev * (1.0 - (beta + 1.0) / j as f64));
    }
    w
}

/// Full-memory Grünwald–Letnikov differ-integral of a uniformly sampled
/// signal with zero history before the first sample.
pub fn gl_differintegral(signal: &[f64], beta: f64, dt: f64) -> Vec<f64> {
    let w = gl_weights(beta, signal.len());
    let scale = dt.powf(-beta);
    (0..signal.len())
        .map(|n| {
            let acc: f64 = w[..=n].iter().zip(signal[..=n].iter().rev()).map(|(wj, x)| wj * x).sum();
            scale * acc
        })
        .collect()
}
