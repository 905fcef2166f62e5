//! Time-domain runs of plants, inverses and their series connection.

use std::f64::consts::TAU;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::system::{InverseSystem, LptvSystem};

/// States with a norm beyond this abort the run.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Scalar waveform shapes. `Sine` frequency is in cycles per step and its
/// phase in radians, so `sin(0.1πk)` is `Sine { amplitude: 1, frequency: 0.05, phase: 0 }`.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    Step {
        level: f64,
        onset: usize,
    },
    Impulse {
        level: f64,
        time: usize,
    },
    Constant(f64),
}

impl Waveform {
    pub fn eval(&self, k: usize) -> f64 {
        match *self {
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (TAU * frequency * k as f64 + phase).sin(),
            Waveform::Step { level, onset } => {
                if k >= onset {
                    level
                } else {
                    0.0
                }
            }
            Waveform::Impulse { level, time } => {
                if k == time {
                    level
                } else {
                    0.0
                }
            }
            Waveform::Constant(level) => level,
        }
    }
}

impl FromStr for Waveform {
    type Err = Error;

    /// `sine:amp,freq,phase`, `step:level[,onset]`, `impulse:level[,time]`,
    /// `constant:level`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |message: String| Error::Parse {
            location: "--signal".into(),
            message,
        };
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|e| bad(format!("invalid number {a:?}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        let arg = |i: usize, default: Option<f64>| -> Result<f64> {
            nums.get(i)
                .copied()
                .or(default)
                .ok_or_else(|| bad(format!("{kind} expects more arguments")))
        };
        let index = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(bad(format!("expected a nonnegative integer time, got {v}")))
            }
        };
        let max_args = match kind {
            "sine" => 3,
            "step" | "impulse" => 2,
            "constant" => 1,
            other => return Err(bad(format!("unknown signal kind {other:?}"))),
        };
        if nums.len() > max_args {
            return Err(bad(format!("{kind} takes at most {max_args} arguments")));
        }
        Ok(match kind {
            "sine" => Waveform::Sine {
                amplitude: arg(0, None)?,
                frequency: arg(1, None)?,
                phase: arg(2, Some(0.0))?,
            },
            "step" => Waveform::Step {
                level: arg(0, None)?,
                onset: index(arg(1, Some(0.0))?)?,
            },
            "impulse" => Waveform::Impulse {
                level: arg(0, None)?,
                time: index(arg(1, Some(0.0))?)?,
            },
            _ => Waveform::Constant(arg(0, None)?),
        })
    }
}

/// An `m`-dimensional input signal.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    /// The same waveform on every component.
    Uniform {
        waveform: Waveform,
        dimension: usize,
    },
    /// Explicit samples; zero after the last sample.
    Sequence(Vec<DVector<f64>>),
}

impl SignalSpec {
    pub fn uniform(waveform: Waveform, dimension: usize) -> Self {
        SignalSpec::Uniform {
            waveform,
            dimension,
        }
    }

    pub fn zero(dimension: usize) -> Self {
        Self::uniform(Waveform::Constant(0.0), dimension)
    }

    pub fn dimension(&self) -> usize {
        match self {
            SignalSpec::Uniform { dimension, .. } => *dimension,
            SignalSpec::Sequence(v) => v.first().map_or(0, |x| x.len()),
        }
    }

    pub fn eval(&self, k: usize) -> DVector<f64> {
        match self {
            SignalSpec::Uniform {
                waveform,
                dimension,
            } => DVector::from_element(*dimension, waveform.eval(k)),
            SignalSpec::Sequence(v) => v
                .get(k)
                .cloned()
                .unwrap_or_else(|| DVector::zeros(self.dimension())),
        }
    }
}

/// Time-indexed record of a plant run and, optionally, an inverse run.
///
/// Plant sequences (`u`, `x`, `y`) cover `horizon + delay` steps so that the
/// inverse has its preview; inverse sequences cover `horizon` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub horizon: usize,
    pub period: usize,
    pub delay: usize,
    pub u: Vec<DVector<f64>>,
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub zeta: Option<Vec<DVector<f64>>>,
    pub uhat: Option<Vec<DVector<f64>>>,
    /// `ε(k) = x(k) − ζ(k)`.
    pub eps: Option<Vec<DVector<f64>>>,
}

impl SimulationTrace {
    pub fn phase(&self, k: usize) -> usize {
        k % self.period
    }

    /// `û(k) − u(k)` over the horizon, when an inverse was run.
    pub fn reconstruction_error(&self) -> Option<Vec<DVector<f64>>> {
        let uhat = self.uhat.as_ref()?;
        Some(uhat.iter().zip(&self.u).map(|(a, b)| a - b).collect())
    }

    /// Largest `|û(k) − u(k)|` entry for `k >= from`.
    pub fn max_error_from(&self, from: usize) -> Option<f64> {
        let err = self.reconstruction_error()?;
        Some(
            err.iter()
                .skip(from)
                .flat_map(|e| e.iter())
                .fold(0.0_f64, |acc, v| acc.max(v.abs())),
        )
    }
}

fn guard(step: usize, v: &DVector<f64>) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { step });
    }
    let norm = v.norm();
    if norm > DIVERGENCE_GUARD {
        return Err(Error::Divergence { step, norm });
    }
    Ok(())
}

fn check_len(what: &str, v: &DVector<f64>, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension(format!(
            "{what} has length {}, expected {expected}",
            v.len()
        )));
    }
    Ok(())
}

/// Runs the plant for `horizon` steps from `x0`.
pub fn simulate_plant(
    sys: &LptvSystem,
    u: &SignalSpec,
    x0: &DVector<f64>,
    horizon: usize,
) -> Result<SimulationTrace> {
    if horizon == 0 {
        return Err(Error::InsufficientHorizon { horizon, delay: 0 });
    }
    check_len("x0", x0, sys.states())?;
    if u.dimension() != sys.inputs() {
        return Err(Error::Dimension(format!(
            "signal dimension {} does not match {} plant inputs",
            u.dimension(),
            sys.inputs()
        )));
    }
    guard(0, x0)?;
    let mut us = Vec::with_capacity(horizon);
    let mut xs = Vec::with_capacity(horizon);
    let mut ys = Vec::with_capacity(horizon);
    let mut x = x0.clone();
    for k in 0..horizon {
        let uk = u.eval(k);
        let yk = sys.c().at(k) * &x + sys.d().at(k) * &uk;
        guard(k, &yk)?;
        let next = sys.a().at(k) * &x + sys.b().at(k) * &uk;
        guard(k + 1, &next)?;
        us.push(uk);
        ys.push(yk);
        xs.push(std::mem::replace(&mut x, next));
    }
    Ok(SimulationTrace {
        horizon,
        period: sys.period(),
        delay: 0,
        u: us,
        x: xs,
        y: ys,
        zeta: None,
        uhat: None,
        eps: None,
    })
}

/// Output of an inverse run.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseRun {
    pub zeta: Vec<DVector<f64>>,
    pub uhat: Vec<DVector<f64>>,
}

/// Runs the inverse for `horizon` steps. Step `k` consumes `y[k + delay]`, so
/// `y` must hold at least `horizon + delay` samples.
pub fn simulate_inverse(
    inv: &InverseSystem,
    y: &[DVector<f64>],
    zeta0: &DVector<f64>,
    horizon: usize,
) -> Result<InverseRun> {
    let needed = horizon + inv.delay;
    if y.len() < needed {
        return Err(Error::InsufficientPreview {
            needed,
            available: y.len(),
        });
    }
    check_len("zeta0", zeta0, inv.states())?;
    guard(0, zeta0)?;
    let mut zeta = Vec::with_capacity(horizon);
    let mut uhat = Vec::with_capacity(horizon);
    let mut z = zeta0.clone();
    for k in 0..horizon {
        let yk = &y[k + inv.delay];
        check_len("y", yk, inv.outputs())?;
        let uk = inv.omega.at(k) * &z + inv.pi.at(k) * yk;
        guard(k, &uk)?;
        let next = inv.gamma.at(k) * &z + inv.lambda.at(k) * yk;
        guard(k + 1, &next)?;
        uhat.push(uk);
        zeta.push(std::mem::replace(&mut z, next));
    }
    Ok(InverseRun { zeta, uhat })
}

/// Drives the plant with `u_ref`, feeds its output through the inverse with
/// the required preview and records the state error `ε = x − ζ`.
pub fn reconstruct(
    sys: &LptvSystem,
    inv: &InverseSystem,
    u_ref: &SignalSpec,
    x0: &DVector<f64>,
    zeta0: &DVector<f64>,
    horizon: usize,
) -> Result<SimulationTrace> {
    if horizon == 0 {
        return Err(Error::InsufficientHorizon {
            horizon,
            delay: inv.delay,
        });
    }
    if inv.period() != sys.period() || inv.states() != sys.states() {
        return Err(Error::Dimension(
            "inverse does not match the plant period or state dimension".into(),
        ));
    }
    let mut trace = simulate_plant(sys, u_ref, x0, horizon + inv.delay)?;
    let run = simulate_inverse(inv, &trace.y, zeta0, horizon)?;
    let eps = trace.x.iter().zip(&run.zeta).map(|(x, z)| x - z).collect();
    trace.horizon = horizon;
    trace.delay = inv.delay;
    trace.zeta = Some(run.zeta);
    trace.uhat = Some(run.uhat);
    trace.eps = Some(eps);
    Ok(trace)
}
