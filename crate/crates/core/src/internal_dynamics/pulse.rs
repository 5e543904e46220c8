use std::f64::consts::PI;

use crate::{Error, Result};

/// Time dependence of one control within a segment. `s` is the time since the
/// segment start and `T` the segment duration.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    Constant(f64),
    /// `edge + (center − edge)·sin²(πs/T)`: starts and ends at `edge`, reaches
    /// `center` at mid-segment.
    SinSquaredBump {
        edge: f64,
        center: f64,
    },
    /// `from + (to − from)·sin²(πs/2T)`: monotone ramp over the segment.
    SinSquaredRamp {
        from: f64,
        to: f64,
    },
    /// Linear interpolation through `(s, value)` knots, held constant outside.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl Envelope {
    pub fn value(&self, s: f64, duration: f64) -> f64 {
        match self {
            Envelope::Constant(v) => *v,
            Envelope::SinSquaredBump { edge, center } => {
                let x = (PI * s / duration).sin();
                edge + (center - edge) * x * x
            }
            Envelope::SinSquaredRamp { from, to } => {
                let x = (0.5 * PI * s / duration).sin();
                from + (to - from) * x * x
            }
            Envelope::PiecewiseLinear(knots) => {
                let (first, last) = (knots[0], knots[knots.len() - 1]);
                if s <= first.0 {
                    return first.1;
                }
                if s >= last.0 {
                    return last.1;
                }
                let k = knots.partition_point(|(t, _)| *t <= s);
                let (t0, v0) = knots[k - 1];
                let (t1, v1) = knots[k];
                v0 + (v1 - v0) * (s - t0) / (t1 - t0)
            }
        }
    }

    /// Largest |value| over the segment (exact for the analytic shapes).
    pub fn max_abs(&self) -> f64 {
        match self {
            Envelope::Constant(v) => v.abs(),
            Envelope::SinSquaredBump { edge, center } => edge.abs().max(center.abs()),
            Envelope::SinSquaredRamp { from, to } => from.abs().max(to.abs()),
            Envelope::PiecewiseLinear(knots) => knots.iter().map(|k| k.1.abs()).fold(0.0, f64::max),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let finite = match self {
            Envelope::Constant(v) => v.is_finite(),
            Envelope::SinSquaredBump { edge, center } => edge.is_finite() && center.is_finite(),
            Envelope::SinSquaredRamp { from, to } => from.is_finite() && to.is_finite(),
            Envelope::PiecewiseLinear(knots) => {
                if knots.is_empty() {
                    return Err(Error::domain(format!(
                        "{name}: piecewise-linear envelope needs knots"
                    )));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::domain(format!(
                        "{name}: knot times must increase strictly"
                    )));
                }
                knots.iter().all(|(t, v)| t.is_finite() && v.is_finite())
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::domain(format!("{name}: envelope is not finite")))
        }
    }
}

/// Instantaneous control values (Ω₁, Ω₂, δ₁, δ₂) in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Controls {
    pub omega: [f64; 2],
    pub delta: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSegment {
    duration: f64,
    omega: [Envelope; 2],
    delta: [Envelope; 2],
}

impl PulseSegment {
    pub fn new(duration: f64, omega: [Envelope; 2], delta: [Envelope; 2]) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::domain(format!(
                "segment duration must be > 0, got {duration}"
            )));
        }
        omega[0].validate("Omega_1")?;
        omega[1].validate("Omega_2")?;
        delta[0].validate("delta_1")?;
        delta[1].validate("delta_2")?;
        Ok(Self {
            duration,
            omega,
            delta,
        })
    }

    /// Constant Rabi frequencies with zero detuning.
    pub fn rectangular(duration: f64, omega1: f64, omega2: f64) -> Result<Self> {
        Self::new(
            duration,
            [Envelope::Constant(omega1), Envelope::Constant(omega2)],
            [Envelope::Constant(0.0), Envelope::Constant(0.0)],
        )
    }

    /// Both atoms driven by the same envelopes.
    pub fn symmetric(duration: f64, omega: Envelope, delta: Envelope) -> Result<Self> {
        Self::new(duration, [omega.clone(), omega], [delta.clone(), delta])
    }

    pub fn idle(duration: f64) -> Result<Self> {
        Self::rectangular(duration, 0.0, 0.0)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn omega(&self) -> &[Envelope; 2] {
        &self.omega
    }

    pub fn delta(&self) -> &[Envelope; 2] {
        &self.delta
    }

    pub fn is_symmetric(&self) -> bool {
        self.omega[0] == self.omega[1] && self.delta[0] == self.delta[1]
    }

    /// Controls at time `s` after the segment start.
    pub fn controls(&self, s: f64) -> Controls {
        let d = self.duration;
        Controls {
            omega: [self.omega[0].value(s, d), self.omega[1].value(s, d)],
            delta: [self.delta[0].value(s, d), self.delta[1].value(s, d)],
        }
    }
}

/// Ordered sequence of segments. The total duration is the sum of the segment
/// durations, accumulated in order.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    segments: Vec<PulseSegment>,
    starts: Vec<f64>,
    total: f64,
}

impl PulseSchedule {
    pub fn new(segments: Vec<PulseSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::domain("a pulse schedule needs at least one segment"));
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut total = 0.0;
        for seg in &segments {
            starts.push(total);
            total += seg.duration;
        }
        Ok(Self {
            segments,
            starts,
            total,
        })
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    /// Start time of each segment.
    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn total_duration(&self) -> f64 {
        self.total
    }

    /// Segment boundaries including 0 and the total duration.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b = self.starts.clone();
        b.push(self.total);
        b
    }

    /// Controls at absolute time `t`; segment boundaries belong to the later segment.
    pub fn controls_at(&self, t: f64) -> Controls {
        let k = self.starts.partition_point(|s| *s <= t).saturating_sub(1);
        self.segments[k].controls(t - self.starts[k])
    }
}
