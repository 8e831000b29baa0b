use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use super::config::RawConfig;
use crate::coeffmodel::{
    make_disk_coefficients, make_sh_coefficients, pml_scale, Perturbation, PerturbationKind, PmlSpec, RadialProfile,
    SeparableCoefficients,
};
use crate::dtn::{exact_schur_dtns, moving_pml_dtns, tensor_dtn_operators, TransmissionKind};
use crate::fem::{
    assemble_load, assemble_perturbed_system, assemble_tensor_system, radial_space, relative_l2_error, theta_space,
    SourceKind, SourceSpec, TensorSystem,
};
use crate::krylov::{gmres, GmresOptions, LinearOperator};
use crate::linalg::norm2;
use crate::sweep::{build_preconditioner, decompose};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Sh,
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Pml,
    Free,
}

impl Surface {
    pub fn name(self) -> &'static str {
        match self {
            Surface::Pml => "pml",
            Surface::Free => "free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Gmres,
    /// A single preconditioner application, compared with a direct solve.
    OneSweep,
}

/// One fully resolved solve.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub problem: Problem,
    pub profile: RadialProfile,
    pub velocity_scale: f64,
    pub omega: f64,
    pub layers: usize,
    pub order: usize,
    pub n_theta: usize,
    pub surface: Surface,
    pub dtn: TransmissionKind,
    pub source: SourceSpec,
    pub perturbation: Perturbation,
    pub alpha: f64,
    pub gamma: f64,
    pub pml_sigma0: Option<f64>,
    pub pml_exponent: u32,
    pub pml_attenuation: f64,
    pub mpml_sigma0: Option<f64>,
    pub tolerance: f64,
    pub maxit: usize,
    pub mode: SolveMode,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub spec: CaseSpec,
    pub iterations: usize,
    pub converged: bool,
    pub final_relres: f64,
    pub history: Vec<f64>,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub one_sweep_error: Option<f64>,
}

impl CaseResult {
    pub fn residual_csv(&self) -> String {
        let mut s = String::from("iter,relres\n");
        for (k, r) in self.history.iter().enumerate() {
            let _ = writeln!(s, "{k},{r:.16e}");
        }
        s
    }
}

/// Layer count used when `layers` is not given: proportional to `omega`.
pub fn default_layers(problem: Problem, omega: f64) -> usize {
    match problem {
        Problem::Sh => ((3.0 * omega / 64.0).ceil() as usize).max(2),
        Problem::Disk => ((3.0 * omega / 8.0).ceil() as usize).max(1),
    }
}

fn transmission_kind(key: &str, v: &str) -> Result<TransmissionKind> {
    match v {
        "moving-pml" => Ok(TransmissionKind::MovingPml),
        "tensor" => Ok(TransmissionKind::Tensor),
        "exact-schur" => Ok(TransmissionKind::ExactSchur),
        _ => Err(Error::config(key, format!("`{v}` is not one of moving-pml, tensor, exact-schur"))),
    }
}

fn surface_kind(v: &str) -> Result<Surface> {
    match v {
        "pml" => Ok(Surface::Pml),
        "free" => Ok(Surface::Free),
        _ => Err(Error::config("surface", format!("`{v}` is not one of pml, free"))),
    }
}

impl CaseSpec {
    /// Expands list-valued keys into the cartesian product of cases, in the
    /// order omega, surface, dtn, alpha, epsilon.
    pub fn all_from_config(cfg: &RawConfig) -> Result<Vec<CaseSpec>> {
        let problem = match cfg.choice("problem", "sh", &["sh", "disk"])? {
            "sh" => Problem::Sh,
            _ => Problem::Disk,
        };
        let omegas = cfg.f64_list_or("omega", &[])?;
        if omegas.is_empty() {
            return Err(Error::config("omega", "missing"));
        }
        if let Some(&w) = omegas.iter().find(|&&w| !(w > 0.0)) {
            return Err(Error::config("omega", format!("{w} is not positive")));
        }
        let layers: Vec<usize> = match cfg.list("layers") {
            None => omegas.iter().map(|&w| default_layers(problem, w)).collect(),
            Some(items) => {
                let parsed = items
                    .iter()
                    .map(|v| v.parse::<usize>().ok().filter(|&j| j > 0))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::config("layers", "expected positive integers"))?;
                match parsed.len() {
                    1 => vec![parsed[0]; omegas.len()],
                    n if n == omegas.len() => parsed,
                    _ => return Err(Error::config("layers", "give one value or one per omega")),
                }
            }
        };
        let order = cfg.usize_or("order", 4)?;
        if order == 0 {
            return Err(Error::config("order", "must be at least 1"));
        }
        let n_theta = match cfg.get("n_theta") {
            None => None,
            Some(_) => match cfg.usize_or("n_theta", 0)? {
                0 => return Err(Error::config("n_theta", "must be positive")),
                n => Some(n),
            },
        };
        let surfaces = cfg
            .list("surface")
            .unwrap_or_else(|| vec!["pml"])
            .into_iter()
            .map(surface_kind)
            .collect::<Result<Vec<_>>>()?;
        if problem == Problem::Disk && surfaces.contains(&Surface::Free) {
            return Err(Error::config("surface", "the disk problem always carries an outer PML"));
        }
        let dtns = cfg
            .list("dtn")
            .unwrap_or_else(|| vec!["moving-pml"])
            .into_iter()
            .map(|v| transmission_kind("dtn", v))
            .collect::<Result<Vec<_>>>()?;
        let alphas = cfg.f64_list_or("alpha", &[0.0])?;
        if problem == Problem::Disk {
            if let Some(a) = alphas.iter().find(|a| !(0.0..2.0).contains(*a)) {
                return Err(Error::config("alpha", format!("{a} must lie in [0, 2)")));
            }
        }
        let kind = match cfg.choice("perturbation", "none", &["none", "trig", "constant"])? {
            "trig" => PerturbationKind::Trig,
            "constant" => PerturbationKind::Constant,
            _ => PerturbationKind::None,
        };
        let epsilons = cfg.f64_list_or("epsilon", &[0.0])?;
        if kind == PerturbationKind::None && epsilons.iter().any(|&e| e != 0.0) {
            return Err(Error::config("epsilon", "nonzero epsilon needs a perturbation kind"));
        }
        if problem == Problem::Disk && kind != PerturbationKind::None {
            return Err(Error::config("perturbation", "perturbations apply to the sh problem only"));
        }
        if let Some(e) = epsilons.iter().find(|e| e.abs() >= 1.0) {
            return Err(Error::config("epsilon", format!("|{e}| must be below 1")));
        }

        let profile = match cfg.get("profile") {
            None => RadialProfile::prem_like(),
            Some(path) => RadialProfile::from_file(path).map_err(|e| Error::config("profile", e.to_string()))?,
        };
        let velocity_scale = cfg.f64_or("velocity_scale", 1.0)?;
        if !(velocity_scale > 0.0) {
            return Err(Error::config("velocity_scale", "must be positive"));
        }
        let (r_lo, r_hi) = match problem {
            Problem::Sh => (profile.inner_radius(), profile.outer_radius()),
            Problem::Disk => (0.0, 1.0),
        };
        let source = match cfg.choice("source", "dirac", &["dirac", "random"])? {
            "dirac" => {
                let (r0, t0) = match problem {
                    Problem::Sh => (r_lo + 0.4 * (r_hi - r_lo), PI / 3.0),
                    Problem::Disk => (0.4, 1.0),
                };
                let r = cfg.f64_or("source_r", r0)?;
                let theta = cfg.f64_or("source_theta", t0)?;
                if !(r > r_lo && r < r_hi) {
                    return Err(Error::config("source_r", format!("{r} is outside ({r_lo}, {r_hi})")));
                }
                SourceSpec {
                    kind: SourceKind::Dirac { r, theta },
                    zero_in_pml: cfg.bool_or("zero_source_in_pml", false)?,
                }
            }
            _ => SourceSpec {
                kind: SourceKind::Random { seed: cfg.u64_or("seed", 1)? },
                zero_in_pml: cfg.bool_or("zero_source_in_pml", true)?,
            },
        };
        let gamma = cfg.f64_or("gamma", 0.0)?;
        let pml_exponent = cfg.usize_or("pml_exponent", 2)? as u32;
        let pml_attenuation = cfg.f64_or("pml_attenuation", 4.0)?;
        if !(pml_attenuation > 0.0) {
            return Err(Error::config("pml_attenuation", "must be positive"));
        }
        let pml_sigma0 = cfg.f64_opt("pml_sigma0")?;
        let mpml_sigma0 = cfg.f64_opt("mpml_sigma0")?;
        for (k, v) in [("pml_sigma0", pml_sigma0), ("mpml_sigma0", mpml_sigma0)] {
            if matches!(v, Some(s) if s < 0.0) {
                return Err(Error::config(k, "must be non-negative"));
            }
        }
        let tolerance = cfg.f64_or("tolerance", crate::DEFAULT_TOLERANCE)?;
        if !(tolerance > 0.0) {
            return Err(Error::config("tolerance", "must be positive"));
        }
        let maxit = cfg.usize_or("maxit", 1000)?;
        let mode = match cfg.choice("mode", "gmres", &["gmres", "one-sweep"])? {
            "gmres" => SolveMode::Gmres,
            _ => SolveMode::OneSweep,
        };

        let mut specs = Vec::new();
        for (&omega, &j) in omegas.iter().zip(&layers) {
            for &surface in &surfaces {
                for &dtn in &dtns {
                    for &alpha in &alphas {
                        for &epsilon in &epsilons {
                            specs.push(CaseSpec {
                                problem,
                                profile: profile.clone(),
                                velocity_scale,
                                omega,
                                layers: j,
                                order,
                                n_theta: n_theta.unwrap_or(2 * j),
                                surface,
                                dtn,
                                source,
                                perturbation: Perturbation::new(kind, epsilon),
                                alpha,
                                gamma,
                                pml_sigma0,
                                pml_exponent,
                                pml_attenuation,
                                mpml_sigma0,
                                tolerance,
                                maxit,
                                mode,
                            });
                        }
                    }
                }
            }
        }
        Ok(specs)
    }

    pub fn epsilon(&self) -> f64 {
        self.perturbation.epsilon
    }

    /// Background coefficients, with the surface PML attached when asked.
    pub fn coefficients(&self) -> Result<SeparableCoefficients> {
        let base = match self.problem {
            Problem::Sh => make_sh_coefficients(&self.profile.with_velocity_scale(self.velocity_scale)?, self.omega)?,
            Problem::Disk => make_disk_coefficients(self.alpha, self.omega, self.layers)?,
        };
        match self.surface {
            Surface::Free => Ok(base),
            Surface::Pml => {
                let (lo, hi) = base.r_interval;
                let width = (hi - lo) / self.layers as f64;
                let sigma0 = self.pml_sigma0.unwrap_or_else(|| self.auto_sigma0(&base, width));
                pml_scale(
                    PmlSpec::new(hi - width, width, sigma0).with_exponent(self.pml_exponent),
                    &base,
                )
            }
        }
    }

    /// `sigma0` giving a one-way amplitude decay of `exp(-pml_attenuation)`
    /// across `width` at the fastest background velocity.
    fn auto_sigma0(&self, coeffs: &SeparableCoefficients, width: f64) -> f64 {
        let (lo, hi) = coeffs.r_interval;
        let vmax = (0..=200)
            .map(|k| coeffs.medium.background_velocity(lo + (hi - lo) * k as f64 / 200.0))
            .fold(0.0, f64::max);
        (self.pml_exponent as f64 + 1.0) * self.pml_attenuation * vmax / width
    }

    /// Template for the moving PML; position and width are set per interface.
    pub fn moving_pml(&self, coeffs: &SeparableCoefficients) -> PmlSpec {
        let (lo, hi) = coeffs.r_interval;
        let width = (hi - lo) / self.layers as f64;
        let sigma0 = self.mpml_sigma0.unwrap_or_else(|| self.auto_sigma0(coeffs, width));
        PmlSpec::new(lo, width, sigma0)
            .with_exponent(self.pml_exponent)
            .with_gamma(self.gamma)
    }

    pub fn build_system(&self) -> Result<TensorSystem> {
        let coeffs = self.coefficients()?;
        let sr = radial_space(&coeffs, 2 * self.layers, self.order)?;
        let st = theta_space(&coeffs, self.n_theta, self.order)?;
        let system = if self.perturbation.kind == PerturbationKind::None || self.perturbation.epsilon == 0.0 {
            assemble_tensor_system(&coeffs, &sr, &st)?
        } else {
            assemble_perturbed_system(&coeffs, self.perturbation, &sr, &st)?
        };
        let f = assemble_load(&self.source, &sr, &st, coeffs.pml.as_ref())?;
        system.with_rhs(f)
    }

    pub fn run(&self) -> Result<CaseResult> {
        let t0 = Instant::now();
        let system = self.build_system()?;
        let decomp = decompose(&system.space_r, self.layers)?;
        let ops = match self.dtn {
            TransmissionKind::Tensor => {
                tensor_dtn_operators(system.coeffs(), &system.space_r, &system.space_theta, &decomp)?
            }
            TransmissionKind::ExactSchur => exact_schur_dtns(&system, &decomp)?,
            TransmissionKind::MovingPml => moving_pml_dtns(&system, &self.moving_pml(system.coeffs()), &decomp)?,
        };
        let pre = build_preconditioner(&system, &decomp, &ops)?;
        let setup_seconds = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let mut result = CaseResult {
            spec: self.clone(),
            iterations: 0,
            converged: false,
            final_relres: f64::NAN,
            history: Vec::new(),
            setup_seconds,
            solve_seconds: 0.0,
            one_sweep_error: None,
        };
        match self.mode {
            SolveMode::Gmres => {
                let opts = GmresOptions {
                    tol: self.tolerance,
                    max_iter: self.maxit,
                };
                let (_, report) = gmres(&system.matrix, &pre, &system.rhs, opts)?;
                result.iterations = report.iterations;
                result.converged = report.converged;
                result.final_relres = report.final_relres;
                result.history = report.history;
            }
            SolveMode::OneSweep => {
                let u = pre.apply_vec(&system.rhs);
                let mut au = vec![C64::new(0.0, 0.0); u.len()];
                system.matrix.apply(&u, &mut au);
                let r: Vec<C64> = au.iter().zip(&system.rhs).map(|(a, b)| b - a).collect();
                let bn = norm2(&system.rhs);
                let relres = if bn == 0.0 { 0.0 } else { norm2(&r) / bn };
                let u_ref = system.solve_direct()?;
                result.iterations = 1;
                result.final_relres = relres;
                result.converged = relres <= self.tolerance;
                result.history = vec![1.0, relres];
                result.one_sweep_error = Some(relative_l2_error(&u, &u_ref, &system)?);
            }
        }
        result.solve_seconds = t1.elapsed().as_secs_f64();
        Ok(result)
    }
}
