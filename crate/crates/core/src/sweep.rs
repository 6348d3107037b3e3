//! Parameter sweeps: station capacity or service rate, one solve per value.
//!
//! Points run on a bounded pool of scoped threads. Each worker builds its
//! own scenario and solver state; results come back in value order.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Mode, Status};
use crate::solver::{brute_force, greedy_place, solve_exact, Scenario, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    /// Charger count of every station.
    StationCapacity,
    /// Service rate of every node-charge.
    ServiceRate,
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "capacity" | "station-capacity" => Ok(SweepKind::StationCapacity),
            "mu" | "service-rate" => Ok(SweepKind::ServiceRate),
            other => Err(Error::InvalidOption(format!(
                "unknown sweep kind `{other}` (expected capacity or mu)"
            ))),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepKind::StationCapacity => "capacity",
            SweepKind::ServiceRate => "mu",
        })
    }
}

#[derive(Clone, Debug)]
pub enum SweepMethod {
    Exact(SolverOptions),
    Greedy,
    Brute,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub values: Vec<f64>,
    pub base: Instance,
    pub mode: Mode,
}

impl SweepSpec {
    pub fn new(kind: SweepKind, values: Vec<f64>, base: Instance, mode: Mode) -> Result<Self> {
        let spec = SweepSpec {
            kind,
            values,
            base,
            mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Values must be non-empty and strictly increasing or strictly
    /// decreasing; capacities must be whole and service rates positive.
    pub fn validate(&self) -> Result<()> {
        let v = &self.values;
        if v.is_empty() {
            return Err(Error::Sweep("no values to sweep".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Sweep("values must be finite".into()));
        }
        let up = v.windows(2).all(|w| w[1] > w[0]);
        let down = v.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Sweep("values must be strictly monotone".into()));
        }
        match self.kind {
            SweepKind::StationCapacity => {
                if let Some(x) = v.iter().find(|x| **x < 0.0 || x.fract() != 0.0) {
                    return Err(Error::Sweep(format!("station capacity {x} is not a whole number")));
                }
            }
            SweepKind::ServiceRate => {
                if let Some(x) = v.iter().find(|x| **x <= 0.0) {
                    return Err(Error::Sweep(format!("service rate {x} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// The base instance with the swept parameter set to `value`.
    pub fn instance_at(&self, value: f64) -> Instance {
        let mut inst = self.base.clone();
        match self.kind {
            SweepKind::StationCapacity => {
                for s in inst.stations.iter_mut() {
                    s.capacity = value as u32;
                }
            }
            SweepKind::ServiceRate => {
                inst.service_rate.iter_mut().flatten().for_each(|m| *m = value);
            }
        }
        inst
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub param_value: f64,
    pub mode: Mode,
    pub status: Status,
    pub objective: Option<f64>,
    pub wall_seconds: f64,
    pub gap: Option<f64>,
    pub warnings: Vec<String>,
}

/// Solves every point of `spec` with at most `workers` threads.
pub fn run_sweep(spec: &SweepSpec, method: &SweepMethod, workers: usize) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    if let SweepMethod::Exact(options) = method {
        options.validate()?;
    }
    let count = spec.values.len();
    let workers = workers.clamp(1, count);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SweepPoint>>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= count {
                    break;
                }
                let point = solve_point(spec, method, spec.values[k]);
                results.lock().expect("no worker panicked")[k] = Some(point);
            });
        }
    });
    results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|p| p.expect("every point solved"))
        .collect()
}

fn solve_point(spec: &SweepSpec, method: &SweepMethod, value: f64) -> Result<SweepPoint> {
    let start = Instant::now();
    let scenario = Scenario::new(spec.instance_at(value))?;
    let solution = match method {
        SweepMethod::Exact(options) => solve_exact(&scenario, spec.mode, options)?,
        SweepMethod::Greedy => greedy_place(&scenario, spec.mode, false)?.solution,
        SweepMethod::Brute => brute_force(&scenario, spec.mode)?,
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    log::info!(
        "{} = {value}: {} {:?} in {wall_seconds:.1}s",
        spec.kind,
        solution.status,
        solution.objective
    );
    Ok(SweepPoint {
        param_value: value,
        mode: spec.mode,
        status: solution.status,
        objective: solution.objective,
        wall_seconds,
        gap: solution.gap(),
        warnings: solution.warnings,
    })
}

/// Writes `param_value,mode,status,Z,wall_seconds,gap`. Points without a
/// feasible solution show `NF` in the status and objective columns.
pub fn write_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["param_value", "mode", "status", "Z", "wall_seconds", "gap"])?;
    for p in points {
        let (status, z) = match p.objective {
            Some(z) => (p.status.to_string(), z.to_string()),
            None if matches!(p.status, Status::Infeasible) => ("NF".to_string(), "NF".to_string()),
            None => (p.status.to_string(), String::new()),
        };
        let gap = p.gap.map(|g| g.to_string()).unwrap_or_default();
        w.write_record([
            p.param_value.to_string(),
            p.mode.to_string(),
            status,
            z,
            format!("{:.3}", p.wall_seconds),
            gap,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Whether the objective never rises across the feasible points, taken in
/// the order given.
pub fn non_increasing(points: &[SweepPoint], tolerance: f64) -> bool {
    let z: Vec<f64> = points.iter().filter_map(|p| p.objective).collect();
    z.windows(2).all(|w| w[1] <= w[0] + tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{illustrative_instance, tiny_instance};

    #[test]
    fn values_must_be_monotone() {
        let base = tiny_instance(0);
        let kind = SweepKind::ServiceRate;
        assert!(SweepSpec::new(kind, vec![], base.clone(), Mode::Myopic).is_err());
        assert!(SweepSpec::new(kind, vec![1.0, 2.0, 2.0], base.clone(), Mode::Myopic).is_err());
        assert!(SweepSpec::new(kind, vec![1.0, 3.0, 2.0], base.clone(), Mode::Myopic).is_err());
        assert!(SweepSpec::new(kind, vec![0.0, 1.0], base.clone(), Mode::Myopic).is_err());
        assert!(SweepSpec::new(kind, vec![3.0, 2.0, 1.0], base.clone(), Mode::Myopic).is_ok());
        let cap = SweepKind::StationCapacity;
        assert!(SweepSpec::new(cap, vec![1.0, 1.5], base, Mode::Myopic).is_err());
    }

    #[test]
    fn kind_names_parse() {
        assert_eq!("mu".parse::<SweepKind>().unwrap(), SweepKind::ServiceRate);
        assert_eq!("station-capacity".parse::<SweepKind>().unwrap(), SweepKind::StationCapacity);
        assert!("speed".parse::<SweepKind>().is_err());
    }

    #[test]
    fn results_follow_value_order() {
        let spec = SweepSpec::new(
            SweepKind::StationCapacity,
            vec![3.0, 2.0, 1.0],
            illustrative_instance(0, 1),
            Mode::Myopic,
        )
        .unwrap();
        let one = run_sweep(&spec, &SweepMethod::Brute, 1).unwrap();
        let many = run_sweep(&spec, &SweepMethod::Brute, 3).unwrap();
        let values: Vec<f64> = many.iter().map(|p| p.param_value).collect();
        assert_eq!(values, vec![3.0, 2.0, 1.0]);
        for (a, b) in one.iter().zip(&many) {
            assert_eq!(a.status, b.status);
            assert_eq!(a.objective, b.objective);
        }
    }

    #[test]
    fn csv_marks_infeasible_points() {
        let points = vec![
            SweepPoint {
                param_value: 5.0,
                mode: Mode::NonMyopic,
                status: Status::Infeasible,
                objective: None,
                wall_seconds: 0.25,
                gap: None,
                warnings: vec![],
            },
            SweepPoint {
                param_value: 50.0,
                mode: Mode::NonMyopic,
                status: Status::Optimal,
                objective: Some(12.5),
                wall_seconds: 1.0,
                gap: Some(0.0),
                warnings: vec![],
            },
        ];
        let mut out = Vec::new();
        write_csv(&points, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "param_value,mode,status,Z,wall_seconds,gap");
        assert_eq!(lines[1], "5,non-myopic,NF,NF,0.250,");
        assert_eq!(lines[2], "50,non-myopic,optimal,12.5,1.000,0");
    }
}
