//! Input signals u(t): sinusoidal drives for the signal-processing task and
//! piecewise-constant drives for the memory-capacity task.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// u(t) = amplitude * sin(frequency * t + phase) + bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidalDrive {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub bias: f64,
}

impl SinusoidalDrive {
    pub fn new(amplitude: f64, frequency: f64, phase: f64, bias: f64) -> Result<Self> {
        if ![amplitude, frequency, phase, bias].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(
                "sinusoidal drive parameters must be finite".into(),
            ));
        }
        Ok(Self {
            amplitude,
            frequency,
            phase,
            bias,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).sin() + self.bias
    }
}

/// Piecewise-constant drive holding amplitude `amplitudes[j]` over
/// `[j*hold_time, (j+1)*hold_time)`, left-closed so u(j dt) = amplitudes[j].
///
/// Carries the interval the amplitudes were drawn from and the seed used, so
/// results stay reproducible from their own provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDrive {
    pub amplitudes: Vec<f64>,
    pub hold_time: f64,
    pub interval: [f64; 2],
    pub seed: u64,
}

impl PiecewiseDrive {
    pub fn new(amplitudes: Vec<f64>, hold_time: f64, interval: [f64; 2], seed: u64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter(
                "piecewise drive needs at least one amplitude".into(),
            ));
        }
        if !(hold_time > 0.0 && hold_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hold time must be positive and finite, got {hold_time}"
            )));
        }
        if interval[0] > interval[1] {
            return Err(Error::InvalidParameter(format!(
                "amplitude interval [{}, {}] is not ordered",
                interval[0], interval[1]
            )));
        }
        if let Some(bad) = amplitudes
            .iter()
            .find(|&&a| !(a.is_finite() && a >= interval[0] && a <= interval[1]))
        {
            return Err(Error::InvalidParameter(format!(
                "amplitude {bad} outside interval [{}, {}]",
                interval[0], interval[1]
            )));
        }
        Ok(Self {
            amplitudes,
            hold_time,
            interval,
            seed,
        })
    }

    /// Number of hold intervals J.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Total signal duration J * hold_time.
    pub fn total_time(&self) -> f64 {
        self.amplitudes.len() as f64 * self.hold_time
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let span = self.total_time();
        if t < 0.0 || t >= span {
            return Err(Error::DriveOutOfRange { t, span });
        }
        let j = (t / self.hold_time).floor() as usize;
        // Guard the pathological rounding case t/dt == J.
        let j = j.min(self.amplitudes.len() - 1);
        Ok(self.amplitudes[j])
    }
}

/// Any input signal the reservoirs accept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    Sinusoidal(SinusoidalDrive),
    Piecewise(PiecewiseDrive),
}

impl Drive {
    /// Constant drive u(t) = value, as a degenerate sinusoid.
    pub fn constant(value: f64) -> Self {
        Drive::Sinusoidal(SinusoidalDrive {
            amplitude: 0.0,
            frequency: 0.0,
            phase: 0.0,
            bias: value,
        })
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        match self {
            Drive::Sinusoidal(s) => Ok(s.value(t)),
            Drive::Piecewise(p) => p.value(t),
        }
    }
}

impl From<SinusoidalDrive> for Drive {
    fn from(d: SinusoidalDrive) -> Self {
        Drive::Sinusoidal(d)
    }
}

impl From<PiecewiseDrive> for Drive {
    fn from(d: PiecewiseDrive) -> Self {
        Drive::Piecewise(d)
    }
}
