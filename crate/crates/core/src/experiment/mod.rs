//! Config-driven experiment drivers.
//!
//! Each [`Experiment`] reads a [`RawConfig`], runs one or more solves or
//! studies, and returns the CSV files it produced together with a short
//! text table. Writing to disk is left to [`ExperimentOutput::write_to`].

mod case;
pub mod config;
mod study;

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

pub use case::{CaseResult, CaseSpec, Problem, SolveMode, Surface};
pub use config::{RawConfig, KEYS};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    DiskMpml,
    ShMpml,
    ShTensor,
    PerturbationStudy,
    ModalSensitivity,
    Riccati1d,
    OneSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::DiskMpml,
        Experiment::ShMpml,
        Experiment::ShTensor,
        Experiment::PerturbationStudy,
        Experiment::ModalSensitivity,
        Experiment::Riccati1d,
        Experiment::OneSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DiskMpml => "disk-mpml",
            Experiment::ShMpml => "sh-mpml",
            Experiment::ShTensor => "sh-tensor",
            Experiment::PerturbationStudy => "perturbation-study",
            Experiment::ModalSensitivity => "modal-sensitivity",
            Experiment::Riccati1d => "riccati-1d",
            Experiment::OneSweep => "one-sweep",
        }
    }

    /// Defaults filled in before the user config is read.
    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::DiskMpml => &[
                ("problem", "disk"),
                ("dtn", "moving-pml"),
                ("surface", "pml"),
                ("omega", "8,16"),
                ("alpha", "0,0.5,1"),
                ("source", "random"),
            ],
            Experiment::ShMpml => &[
                ("problem", "sh"),
                ("dtn", "moving-pml"),
                ("surface", "pml,free"),
                ("omega", "32,64"),
                ("source", "dirac"),
            ],
            Experiment::ShTensor => &[
                ("problem", "sh"),
                ("dtn", "tensor"),
                ("surface", "pml,free"),
                ("omega", "32,64"),
                ("source", "dirac"),
            ],
            Experiment::PerturbationStudy => &[
                ("problem", "sh"),
                ("dtn", "tensor"),
                ("surface", "free,pml"),
                ("omega", "64"),
                ("perturbation", "trig"),
                ("epsilon", "0,0.000625,0.00125,0.0025,0.005"),
                ("source", "random"),
                ("zero_source_in_pml", "false"),
            ],
            Experiment::ModalSensitivity => &[
                ("problem", "sh"),
                ("omega", "128"),
                ("perturbation", "constant"),
                ("epsilon", "3.9e-5"),
            ],
            Experiment::Riccati1d => &[
                ("a", "1"),
                ("epsilon", "1e-3"),
                ("omega_min", "10"),
                ("omega_max", "200"),
                ("n_omega", "2000"),
            ],
            Experiment::OneSweep => &[
                ("problem", "sh"),
                ("dtn", "tensor"),
                ("surface", "free"),
                ("omega", "64"),
                ("layers", "3"),
                ("mode", "one-sweep"),
                ("source", "dirac"),
            ],
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// Files produced by one experiment, in write order.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub files: Vec<(String, String)>,
    /// Human-readable summary for standard output.
    pub table: String,
    pub cases: Vec<CaseResult>,
}

impl ExperimentOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn all_converged(&self) -> bool {
        self.cases.iter().all(|c| c.converged)
    }

    /// 0 on success, 2 when some solve did not converge.
    pub fn exit_code(&self) -> i32 {
        if self.all_converged() {
            0
        } else {
            2
        }
    }

    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

/// Runs `exp` with `cfg` on top of the experiment defaults.
pub fn run_experiment(exp: Experiment, cfg: &RawConfig) -> Result<ExperimentOutput> {
    let mut cfg = cfg.clone();
    for (k, v) in exp.defaults() {
        cfg.set_default(k, v);
    }
    match exp {
        Experiment::ModalSensitivity => study::modal_sensitivity(&cfg),
        Experiment::Riccati1d => study::riccati_1d(&cfg),
        _ => run_solves(&cfg),
    }
}

fn run_solves(cfg: &RawConfig) -> Result<ExperimentOutput> {
    let specs = CaseSpec::all_from_config(cfg)?;
    let mut out = ExperimentOutput::default();
    for spec in &specs {
        out.cases.push(spec.run()?);
    }

    let mut summary = String::from(
        "omega,J,dtn,bc,epsilon,iterations,converged,final_relres,setup_seconds,solve_seconds,alpha\n",
    );
    for c in &out.cases {
        let s = &c.spec;
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{:.6e},{:.3},{:.3},{}",
            s.omega,
            s.layers,
            s.dtn.name(),
            s.surface.name(),
            s.epsilon(),
            c.iterations,
            c.converged,
            c.final_relres,
            c.setup_seconds,
            c.solve_seconds,
            s.alpha
        );
    }
    out.files.push(("summary.csv".into(), summary));

    if out.cases.len() == 1 {
        out.files.push(("residuals.csv".into(), out.cases[0].residual_csv()));
    } else {
        for (k, c) in out.cases.iter().enumerate() {
            out.files.push((format!("residuals_run{}.csv", k + 1), c.residual_csv()));
        }
    }

    if specs.iter().any(|s| s.mode == SolveMode::OneSweep) {
        let mut s = String::from("omega,J,dtn,bc,epsilon,alpha,rel_l2_error\n");
        for c in &out.cases {
            let p = &c.spec;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:.6e}",
                p.omega,
                p.layers,
                p.dtn.name(),
                p.surface.name(),
                p.epsilon(),
                p.alpha,
                c.one_sweep_error.unwrap_or(f64::NAN)
            );
        }
        out.files.push(("one_sweep.csv".into(), s));
    }

    let mut t = format!(
        "{:>8} {:>4} {:>12} {:>5} {:>10} {:>6} {:>6} {:>12} {:>8} {:>8}\n",
        "omega", "J", "dtn", "bc", "epsilon", "alpha", "iters", "relres", "setup", "solve"
    );
    for c in &out.cases {
        let s = &c.spec;
        let iters = if c.converged {
            c.iterations.to_string()
        } else {
            format!("{}!", c.iterations)
        };
        let _ = writeln!(
            t,
            "{:>8} {:>4} {:>12} {:>5} {:>10} {:>6} {:>6} {:>12.3e} {:>8.2} {:>8.2}",
            s.omega,
            s.layers,
            s.dtn.name(),
            s.surface.name(),
            s.epsilon(),
            s.alpha,
            iters,
            c.final_relres,
            c.setup_seconds,
            c.solve_seconds
        );
        if let Some(e) = c.one_sweep_error {
            let _ = writeln!(t, "{:>8} relative L2 error vs direct solve: {e:.3e}", "");
        }
    }
    out.table = t;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("disk".parse::<Experiment>().is_err());
    }

    #[test]
    fn small_disk_run_writes_summary() {
        let cfg = RawConfig::parse("omega = 6\nlayers = 2\nalpha = 0\nn_theta = 8").unwrap();
        let out = run_experiment(Experiment::DiskMpml, &cfg).unwrap();
        let summary = out.file("summary.csv").unwrap();
        assert_eq!(summary.lines().count(), 2);
        assert!(out.file("residuals.csv").unwrap().starts_with("iter,relres\n0,1.0"));
        assert_eq!(out.exit_code(), 0);
    }
}
