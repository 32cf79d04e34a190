//! Fixed-step time integration of the chain forward dynamics, with total
//! mechanical energy emitted per sample. Fixed steps only: the validation
//! suite leans on the integrator's known convergence order, which adaptive
//! stepping would hide.

use std::error::Error;
use std::fmt;

use crate::error::DynamicsError;
use crate::real::{real, Real};
use crate::solver::{forward_dynamics, mechanism_energy, ActuatorState, ManipulatorModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorKind {
    /// Classical fourth-order Runge-Kutta.
    Rk4,
    /// Symplectic (semi-implicit) Euler: rate update first, then position.
    SemiImplicitEuler,
}

#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig<T: Real> {
    pub integrator: IntegratorKind,
    /// Step size [s], > 0.
    pub step: T,
    /// Total simulated time [s], >= step.
    pub duration: T,
    /// Keep every k-th sample in the output (>= 1).
    pub decimation: usize,
}

#[derive(Debug, Clone)]
pub struct SimSample<T: Real> {
    pub t: T,
    pub x: Vec<T>,
    pub xdot: Vec<T>,
    pub xddot: Vec<T>,
    pub energy: T,
}

#[derive(Debug, Clone)]
pub enum SimError<T: Real> {
    Config(String),
    /// Dynamics failure mid-trajectory, with the step it occurred at.
    Dynamics {
        step_index: usize,
        time: T,
        source: DynamicsError,
    },
}

impl<T: Real> fmt::Display for SimError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "invalid simulation config: {msg}"),
            Self::Dynamics {
                step_index,
                time,
                source,
            } => write!(f, "aborted at sample {step_index} (t = {time:?}): {source}"),
        }
    }
}

impl<T: Real> Error for SimError<T> {}

/// Integrate `xddot = FD(x, xdot, f(t))` and record (decimated) samples.
///
/// `forces` supplies the actuator force vector at any queried time.
pub fn simulate<T: Real, F>(
    model: &ManipulatorModel<T>,
    x0: &[T],
    xdot0: &[T],
    forces: F,
    config: &SimulationConfig<T>,
) -> Result<Vec<SimSample<T>>, SimError<T>>
where
    F: Fn(T) -> Vec<T>,
{
    if config.step <= T::zero() {
        return Err(SimError::Config("step must be positive".into()));
    }
    if config.duration < config.step {
        return Err(SimError::Config("duration must be at least one step".into()));
    }
    if config.decimation == 0 {
        return Err(SimError::Config("decimation must be >= 1".into()));
    }
    let n = model.dof();
    if x0.len() != n || xdot0.len() != n {
        return Err(SimError::Config(format!(
            "initial state dimension does not match the {n}-DoF model"
        )));
    }

    let steps = to_steps(config.duration, config.step);
    let mut x = x0.to_vec();
    let mut xdot = xdot0.to_vec();
    let mut out = Vec::with_capacity(steps / config.decimation + 2);

    let eval = |x: &[T], xdot: &[T], t: T, step_index: usize| -> Result<Vec<T>, SimError<T>> {
        let state = ActuatorState::new(x.to_vec(), xdot.to_vec(), forces(t));
        forward_dynamics(model, &state)
            .map(|r| r.xddot)
            .map_err(|source| SimError::Dynamics {
                step_index,
                time: t,
                source,
            })
    };

    for step_index in 0..=steps {
        let t = config.step * real(step_index as f64);
        let xddot = eval(&x, &xdot, t, step_index)?;
        if step_index % config.decimation == 0 || step_index == steps {
            let energy = mechanism_energy(model, &x, &xdot)
                .map_err(|source| SimError::Dynamics {
                    step_index,
                    time: t,
                    source,
                })?
                .total();
            out.push(SimSample {
                t,
                x: x.clone(),
                xdot: xdot.clone(),
                xddot: xddot.clone(),
                energy,
            });
        }
        if step_index == steps {
            break;
        }

        let h = config.step;
        match config.integrator {
            IntegratorKind::SemiImplicitEuler => {
                for i in 0..n {
                    xdot[i] += xddot[i] * h;
                    x[i] += xdot[i] * h;
                }
            }
            IntegratorKind::Rk4 => {
                let half: T = real(0.5);
                let sixth: T = real(1.0 / 6.0);
                let two: T = real(2.0);

                // k1 = f(y); reuses the acceleration already computed
                let (k1x, k1v) = (xdot.clone(), xddot);

                let y2x: Vec<T> = zip_add(&x, &k1x, h * half);
                let y2v: Vec<T> = zip_add(&xdot, &k1v, h * half);
                let k2v = eval(&y2x, &y2v, t + h * half, step_index)?;
                let k2x = y2v.clone();

                let y3x: Vec<T> = zip_add(&x, &k2x, h * half);
                let y3v: Vec<T> = zip_add(&xdot, &k2v, h * half);
                let k3v = eval(&y3x, &y3v, t + h * half, step_index)?;
                let k3x = y3v.clone();

                let y4x: Vec<T> = zip_add(&x, &k3x, h);
                let y4v: Vec<T> = zip_add(&xdot, &k3v, h);
                let k4v = eval(&y4x, &y4v, t + h, step_index)?;
                let k4x = y4v;

                for i in 0..n {
                    x[i] += (k1x[i] + k2x[i] * two + k3x[i] * two + k4x[i]) * h * sixth;
                    xdot[i] += (k1v[i] + k2v[i] * two + k3v[i] * two + k4v[i]) * h * sixth;
                }
            }
        }
    }

    Ok(out)
}

fn to_steps<T: Real>(duration: T, step: T) -> usize {
    let ratio = duration / step;
    num_traits::ToPrimitive::to_f64(&ratio)
        .map(|r| r.round() as usize)
        .unwrap_or(0)
}

fn zip_add<T: Real>(base: &[T], delta: &[T], scale: T) -> Vec<T> {
    base.iter()
        .zip(delta)
        .map(|(&b, &d)| b + d * scale)
        .collect()
}

/// Max-min spread of the recorded energies relative to the peak kinetic
/// energy scale; the conservation figure used by the validation suite.
pub fn relative_energy_drift<T: Real>(
    samples: &[SimSample<T>],
    model: &ManipulatorModel<T>,
) -> T {
    let mut e_min = T::max_value().unwrap();
    let mut e_max = -T::max_value().unwrap();
    let mut ke_peak = T::zero();
    for s in samples {
        e_min = e_min.min(s.energy);
        e_max = e_max.max(s.energy);
        if let Ok(e) = mechanism_energy(model, &s.x, &s.xdot) {
            ke_peak = ke_peak.max(e.kinetic);
        }
    }
    (e_max - e_min) / ke_peak.max(real(1e-12))
}
