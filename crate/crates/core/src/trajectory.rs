//! Trajectory documents: uniformly sampled actuator channels with either an
//! acceleration or a force column per actuator, read and written as CSV with
//! a `# channels:` directive line, plus analytic sinusoid generation.

use std::error::Error;
use std::fmt;

use crate::closed_loop::ParallelModuleParams;
use crate::solver::{ManipulatorModel, ModuleKind};

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryError {
    Parse { line: usize, message: String },
    Range { actuator: usize, message: String },
    Dimension { message: String },
}

impl fmt::Display for TrajectoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parse { line, message } => write!(f, "trajectory line {line}: {message}"),
            Self::Range { actuator, message } => {
                write!(f, "actuator {actuator}: {message}")
            }
            Self::Dimension { message } => write!(f, "{message}"),
        }
    }
}

impl Error for TrajectoryError {}

/// Meaning of the third per-actuator channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Accel,
    Force,
}

impl ChannelKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Accel => "xddot",
            Self::Force => "f",
        }
    }
}

/// Uniformly sampled trajectory for `n` actuators. Channel layout per
/// actuator: position `x`, rate `xdot` and either acceleration or force.
#[derive(Debug, Clone)]
pub struct TrajectoryDocument {
    pub sample_rate: f64,
    pub kind: ChannelKind,
    pub time: Vec<f64>,
    /// `x[actuator][sample]`
    pub x: Vec<Vec<f64>>,
    pub xdot: Vec<Vec<f64>>,
    pub extra: Vec<Vec<f64>>,
}

impl TrajectoryDocument {
    pub fn actuators(&self) -> usize {
        self.x.len()
    }

    pub fn samples(&self) -> usize {
        self.time.len()
    }

    pub fn duration(&self) -> f64 {
        self.time.last().copied().unwrap_or(0.0)
    }

    /// Column vectors (x, xdot, extra) at one sample.
    pub fn at(&self, s: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let pick = |c: &Vec<Vec<f64>>| c.iter().map(|ch| ch[s]).collect();
        (pick(&self.x), pick(&self.xdot), pick(&self.extra))
    }

    /// Same sampling with a replaced third channel (e.g. computed forces).
    pub fn with_extra(&self, kind: ChannelKind, extra: Vec<Vec<f64>>) -> Self {
        Self {
            sample_rate: self.sample_rate,
            kind,
            time: self.time.clone(),
            x: self.x.clone(),
            xdot: self.xdot.clone(),
            extra,
        }
    }

    fn validate(&self) -> Result<(), TrajectoryError> {
        let n = self.actuators();
        let s = self.samples();
        if s < 2 {
            return Err(TrajectoryError::Dimension {
                message: "trajectory needs at least two samples".into(),
            });
        }
        if self.xdot.len() != n || self.extra.len() != n {
            return Err(TrajectoryError::Dimension {
                message: "channel group counts differ".into(),
            });
        }
        for ch in self.x.iter().chain(&self.xdot).chain(&self.extra) {
            if ch.len() != s {
                return Err(TrajectoryError::Dimension {
                    message: "channel lengths differ".into(),
                });
            }
        }
        let dt = 1.0 / self.sample_rate;
        for (i, w) in self.time.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 {
                return Err(TrajectoryError::Parse {
                    line: i + 3,
                    message: "non-uniform sampling".into(),
                });
            }
        }
        Ok(())
    }
}

/// Serialize as CSV: directive line, header row, then one row per sample.
pub fn write_trajectory(doc: &TrajectoryDocument) -> String {
    let n = doc.actuators();
    let label = doc.kind.label();
    let mut out = String::new();
    out.push_str(&format!("# channels: t, x, xdot, {label}\n"));
    out.push('t');
    for a in 1..=n {
        out.push_str(&format!(",x{a},xdot{a},{label}{a}"));
    }
    out.push('\n');
    for s in 0..doc.samples() {
        out.push_str(&format!("{}", doc.time[s]));
        for a in 0..n {
            out.push_str(&format!(
                ",{},{},{}",
                doc.x[a][s], doc.xdot[a][s], doc.extra[a][s]
            ));
        }
        out.push('\n');
    }
    out
}

/// Parse the CSV trajectory format.
pub fn read_trajectory(text: &str) -> Result<TrajectoryDocument, TrajectoryError> {
    let mut kind = None;
    let mut header: Option<usize> = None; // actuator count
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(spec) = rest.strip_prefix("channels:") {
                let names: Vec<&str> = spec.split(',').map(str::trim).collect();
                match names.as_slice() {
                    ["t", "x", "xdot", "xddot"] => kind = Some(ChannelKind::Accel),
                    ["t", "x", "xdot", "f"] => kind = Some(ChannelKind::Force),
                    _ => {
                        return Err(TrajectoryError::Parse {
                            line: lineno,
                            message: format!(
                                "unsupported channel layout '{spec}' \
                                 (expected 't, x, xdot, xddot' or 't, x, xdot, f')"
                            ),
                        })
                    }
                }
            }
            continue;
        }
        if header.is_none() {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.first() != Some(&"t") {
                return Err(TrajectoryError::Parse {
                    line: lineno,
                    message: "header row must start with column 't'".into(),
                });
            }
            if (cols.len() - 1) % 3 != 0 || cols.len() == 1 {
                return Err(TrajectoryError::Parse {
                    line: lineno,
                    message: "header must carry three columns per actuator".into(),
                });
            }
            header = Some((cols.len() - 1) / 3);
            continue;
        }
        let values: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse()).collect();
        match values {
            Ok(v) => rows.push((lineno, v)),
            Err(e) => {
                return Err(TrajectoryError::Parse {
                    line: lineno,
                    message: format!("bad number: {e}"),
                })
            }
        }
    }

    let kind = kind.ok_or(TrajectoryError::Parse {
        line: 1,
        message: "missing '# channels:' directive".into(),
    })?;
    let n = header.ok_or(TrajectoryError::Parse {
        line: 1,
        message: "missing header row".into(),
    })?;
    if rows.len() < 2 {
        return Err(TrajectoryError::Dimension {
            message: "trajectory needs at least two samples".into(),
        });
    }

    let mut time = Vec::with_capacity(rows.len());
    let mut x = vec![Vec::with_capacity(rows.len()); n];
    let mut xdot = vec![Vec::with_capacity(rows.len()); n];
    let mut extra = vec![Vec::with_capacity(rows.len()); n];
    for (lineno, row) in rows {
        if row.len() != 1 + 3 * n {
            return Err(TrajectoryError::Parse {
                line: lineno,
                message: format!("expected {} columns, found {}", 1 + 3 * n, row.len()),
            });
        }
        time.push(row[0]);
        for a in 0..n {
            x[a].push(row[1 + 3 * a]);
            xdot[a].push(row[2 + 3 * a]);
            extra[a].push(row[3 + 3 * a]);
        }
    }

    let dt = time[1] - time[0];
    if dt <= 0.0 {
        return Err(TrajectoryError::Dimension {
            message: "time column must be strictly increasing".into(),
        });
    }
    let doc = TrajectoryDocument {
        sample_rate: 1.0 / dt,
        kind,
        time,
        x,
        xdot,
        extra,
    };
    doc.validate()?;
    Ok(doc)
}

/// Per-actuator sinusoid parameters (angular frequency in rad/s).
#[derive(Debug, Clone, Copy)]
pub struct SinusoidChannel {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

/// Sinusoid generation settings. By default the amplitude of every actuator
/// is 60% of its usable half-range and the angular frequencies cycle through
/// an incommensurate set so no two actuators move in lockstep.
#[derive(Debug, Clone)]
pub struct SinusoidSpec {
    pub duration: f64,
    pub sample_rate: f64,
    pub amplitude_fraction: f64,
    /// Explicit per-actuator overrides; defaults are derived from the model.
    pub channels: Option<Vec<SinusoidChannel>>,
}

impl SinusoidSpec {
    pub fn new(duration: f64, sample_rate: f64) -> Self {
        Self {
            duration,
            sample_rate,
            amplitude_fraction: 0.6,
            channels: None,
        }
    }
}

/// Base angular frequencies [rad/s], cycled (with a growth factor past four
/// actuators) so channels stay incommensurate.
pub const BASE_FREQUENCIES: [f64; 4] = [1.0, 1.3, 1.7, 2.3];

/// Fraction of the closure range kept clear at each end.
const RANGE_MARGIN: f64 = 0.02;

/// Usable actuator interval of one parallel module: the closure range shrunk
/// by the singularity margin (already intersected with `x >= 0`).
pub fn usable_range(params: &ParallelModuleParams<f64>) -> (f64, f64) {
    let (lo, hi) = params.actuator_range();
    let width = hi - lo;
    (lo + RANGE_MARGIN * width, hi - RANGE_MARGIN * width)
}

/// Analytically consistent sinusoidal trajectory for every actuator of a
/// model: `xdot` and `xddot` are the exact derivatives of `x`.
pub fn generate_sinusoid(
    model: &ManipulatorModel<f64>,
    spec: &SinusoidSpec,
) -> Result<TrajectoryDocument, TrajectoryError> {
    let n = model.dof();
    let channels: Vec<SinusoidChannel> = match &spec.channels {
        Some(c) => {
            if c.len() != n {
                return Err(TrajectoryError::Dimension {
                    message: format!("{} channels for a {n}-DoF model", c.len()),
                });
            }
            c.clone()
        }
        None => model
            .modules
            .iter()
            .enumerate()
            .map(|(i, module)| {
                let frequency = BASE_FREQUENCIES[i % 4] * (1.0 + 0.5 * (i / 4) as f64);
                let (offset, half) = match &module.kind {
                    ModuleKind::Parallel(p) => {
                        let (lo, hi) = usable_range(p);
                        (0.5 * (lo + hi), 0.5 * (hi - lo))
                    }
                    // serial joints are unbounded; nominal exercise ranges
                    ModuleKind::Serial(p) => {
                        if p.screw.angular.norm() > 0.5 {
                            (0.0, 1.0) // revolute [rad]
                        } else {
                            (0.3, 0.3) // prismatic [m], stays non-negative
                        }
                    }
                };
                SinusoidChannel {
                    offset,
                    amplitude: spec.amplitude_fraction * half,
                    frequency,
                    phase: 0.0,
                }
            })
            .collect(),
    };

    for (i, (module, ch)) in model.modules.iter().zip(&channels).enumerate() {
        if let ModuleKind::Parallel(p) = &module.kind {
            let (lo, hi) = usable_range(p);
            let reach_lo = ch.offset - ch.amplitude.abs();
            let reach_hi = ch.offset + ch.amplitude.abs();
            if reach_lo < lo || reach_hi > hi {
                return Err(TrajectoryError::Range {
                    actuator: i,
                    message: format!(
                        "sinusoid reaches [{reach_lo:.4}, {reach_hi:.4}] m but the usable \
                         closure range is [{lo:.4}, {hi:.4}] m"
                    ),
                });
            }
        }
    }

    let steps = (spec.duration * spec.sample_rate).round() as usize;
    let dt = 1.0 / spec.sample_rate;
    let mut time = Vec::with_capacity(steps + 1);
    let mut x = vec![Vec::with_capacity(steps + 1); n];
    let mut xdot = vec![Vec::with_capacity(steps + 1); n];
    let mut extra = vec![Vec::with_capacity(steps + 1); n];
    for s in 0..=steps {
        let t = s as f64 * dt;
        time.push(t);
        for (a, ch) in channels.iter().enumerate() {
            let arg = ch.frequency * t + ch.phase;
            x[a].push(ch.offset + ch.amplitude * arg.sin());
            xdot[a].push(ch.amplitude * ch.frequency * arg.cos());
            extra[a].push(-ch.amplitude * ch.frequency * ch.frequency * arg.sin());
        }
    }

    Ok(TrajectoryDocument {
        sample_rate: spec.sample_rate,
        kind: ChannelKind::Accel,
        time,
        x,
        xdot,
        extra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> TrajectoryDocument {
        TrajectoryDocument {
            sample_rate: 10.0,
            kind: ChannelKind::Force,
            time: vec![0.0, 0.1, 0.2],
            x: vec![vec![1.0, 1.1, 1.2]],
            xdot: vec![vec![0.5, 0.5, 0.5]],
            extra: vec![vec![3.0, 2.0, 1.0]],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let text = write_trajectory(&doc());
        let parsed = read_trajectory(&text).unwrap();
        assert_eq!(parsed.kind, ChannelKind::Force);
        assert_eq!(parsed.time, doc().time);
        assert_eq!(parsed.x, doc().x);
        assert_eq!(parsed.extra, doc().extra);
    }

    #[test]
    fn missing_directive_is_rejected() {
        let text = "t,x1,xdot1,f1\n0,1,2,3\n0.1,1,2,3\n";
        assert!(matches!(
            read_trajectory(text),
            Err(TrajectoryError::Parse { .. })
        ));
    }

    #[test]
    fn bad_number_reports_line() {
        let text = "# channels: t, x, xdot, f\nt,x1,xdot1,f1\n0,1,2,3\n0.1,oops,2,3\n";
        match read_trajectory(text) {
            Err(TrajectoryError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
