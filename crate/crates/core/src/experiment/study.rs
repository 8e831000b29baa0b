//! Studies that do not run GMRES: modal DtN sensitivity and the 1D
//! half-line analysis.

use std::fmt::Write as _;

use super::case::{CaseSpec, Surface};
use super::config::RawConfig;
use super::ExperimentOutput;
use crate::dtn::{exterior_radial_space, modal_dtn, modal_relative_error, ModalDtN, TransverseEigenbasis};
use crate::fem::{radial_space, theta_space};
use crate::sensitivity::{delta_csv, delta_r_envelope, delta_table};
use crate::sweep::decompose;
use crate::{Error, Result};

/// Median of the finite entries; NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct ModalSide {
    background: ModalDtN,
    perturbed: Vec<Vec<f64>>,
}

fn modal_side(spec: &CaseSpec, interface: usize, basis: &TransverseEigenbasis, epsilons: &[f64]) -> Result<ModalSide> {
    let coeffs = spec.coefficients()?;
    let sr = radial_space(&coeffs, 2 * spec.layers, spec.order)?;
    let decomp = decompose(&sr, spec.layers)?;
    let ext = exterior_radial_space(&sr, &decomp, interface)?;
    let background = modal_dtn(&coeffs, &ext, basis, 1.0)?;
    let perturbed = epsilons
        .iter()
        .map(|&e| modal_relative_error(&background, &modal_dtn(&coeffs, &ext, basis, 1.0 + e)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModalSide { background, perturbed })
}

pub(super) fn modal_sensitivity(cfg: &RawConfig) -> Result<ExperimentOutput> {
    if cfg.str_or("problem", "sh") != "sh" {
        return Err(Error::config("problem", "the modal study uses the sh problem"));
    }
    if cfg.str_or("perturbation", "constant") != "constant" {
        return Err(Error::config("perturbation", "the modal study needs a constant perturbation"));
    }
    let mut cfg = cfg.clone();
    cfg.set("surface", "pml")?;
    let specs = CaseSpec::all_from_config(&cfg)?;
    let epsilons = cfg.f64_list_or("epsilon", &[])?;
    let interface_key = cfg.get("interface").is_some();

    let mut out = ExperimentOutput::default();
    let mut errors = String::from("omega,epsilon,ell,lambda,guided,err_free,err_pml\n");
    let mut summary = String::from("omega,epsilon,n_guided,median_err_free,median_err_pml,ratio\n");
    let mut table = format!(
        "{:>8} {:>10} {:>8} {:>14} {:>14} {:>10}\n",
        "omega", "epsilon", "guided", "median free", "median pml", "ratio"
    );
    let mut seen = Vec::new();
    for spec in specs {
        if seen.contains(&spec.omega.to_bits()) {
            continue;
        }
        seen.push(spec.omega.to_bits());
        let j = if interface_key {
            cfg.usize_or("interface", 0)?
        } else {
            spec.layers
        };
        if j < 2 || j > spec.layers {
            return Err(Error::config("interface", format!("{j} is not in 2..={}", spec.layers)));
        }
        let pml_spec = CaseSpec {
            surface: Surface::Pml,
            ..spec.clone()
        };
        let free_spec = CaseSpec {
            surface: Surface::Free,
            ..spec.clone()
        };
        let free_coeffs = free_spec.coefficients()?;
        let st = theta_space(&free_coeffs, spec.n_theta, spec.order)?;
        let basis = TransverseEigenbasis::for_coefficients(&free_coeffs, &st)?;
        let free = modal_side(&free_spec, j, &basis, &epsilons)?;
        let pml = modal_side(&pml_spec, j, &basis, &epsilons)?;
        let threshold = free_coeffs.guided_threshold();

        let suffix = if cfg.list("omega").map_or(1, |l| l.len()) > 1 {
            format!("_omega{}", spec.omega)
        } else {
            String::new()
        };
        out.files.push((format!("modal_free{suffix}.csv"), free.background.to_csv()));
        out.files.push((format!("modal_pml{suffix}.csv"), pml.background.to_csv()));

        for (k, &eps) in epsilons.iter().enumerate() {
            let mut g_free = Vec::new();
            let mut g_pml = Vec::new();
            for (ell, &lambda) in basis.eigenvalues.iter().enumerate() {
                let guided = lambda <= threshold;
                let (ef, ep) = (free.perturbed[k][ell], pml.perturbed[k][ell]);
                if guided {
                    g_free.push(ef);
                    g_pml.push(ep);
                }
                let _ = writeln!(
                    errors,
                    "{},{},{},{:.12e},{},{:.6e},{:.6e}",
                    spec.omega,
                    eps,
                    ell + 1,
                    lambda,
                    guided,
                    ef,
                    ep
                );
            }
            let (mf, mp) = (median(&g_free), median(&g_pml));
            let _ = writeln!(
                summary,
                "{},{},{},{:.6e},{:.6e},{:.6e}",
                spec.omega,
                eps,
                g_free.len(),
                mf,
                mp,
                mf / mp
            );
            let _ = writeln!(
                table,
                "{:>8} {:>10} {:>8} {:>14.4e} {:>14.4e} {:>10.2}",
                spec.omega,
                eps,
                g_free.len(),
                mf,
                mp,
                mf / mp
            );
        }
    }
    out.files.push(("modal_error.csv".into(), errors));
    out.files.push(("modal_summary.csv".into(), summary));
    out.table = table;
    Ok(out)
}

pub(super) fn riccati_1d(cfg: &RawConfig) -> Result<ExperimentOutput> {
    let a = cfg.f64_or("a", 1.0)?;
    if !(a > 0.0) {
        return Err(Error::config("a", "must be positive"));
    }
    let epsilons = cfg.f64_list_or("epsilon", &[1e-3])?;
    if epsilons.len() != 1 {
        return Err(Error::config("epsilon", "the 1D study takes a single value"));
    }
    let eps = epsilons[0];
    if !(eps > -1.0) {
        return Err(Error::config("epsilon", "must exceed -1"));
    }
    let w0 = cfg.f64_or("omega_min", 10.0)?;
    let w1 = cfg.f64_or("omega_max", 200.0)?;
    if !(w0 > 0.0 && w1 > w0) {
        return Err(Error::config("omega_max", "need 0 < omega_min < omega_max"));
    }
    let n = cfg.usize_or("n_omega", 2000)?;
    if n < 2 {
        return Err(Error::config("n_omega", "need at least two frequencies"));
    }
    let rows = delta_table(eps, a, w0, w1, n)?;
    let max_t = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_r = rows.iter().map(|r| r.2).filter(|x| x.is_finite()).fold(0.0, f64::max);
    let mut out = ExperimentOutput::default();
    out.files.push(("analytic.csv".into(), delta_csv(&rows)));
    let mut t = String::new();
    let _ = writeln!(t, "epsilon = {eps}, a = {a}, omega in [{w0}, {w1}] ({n} points)");
    let _ = writeln!(t, "max delta_T = {max_t:.4e}");
    let _ = writeln!(t, "max delta_R = {max_r:.4e} (finite values)");
    let _ = writeln!(
        t,
        "delta_R envelope: {:.4e} at omega_min, {:.4e} at omega_max",
        delta_r_envelope(eps, a, w0, 201),
        delta_r_envelope(eps, a, w1, 201)
    );
    out.table = t;
    Ok(out)
}
