//! Material models and the separable coefficient representation
//!
//! ```text
//! a(u, v) = ∫∫ ( -c0(r) w0(θ) u v + c1(r) w0(θ) u_r v_r + c2(r) w1(θ) u_θ v_θ ) dθ dr
//! ```
//!
//! shared by the SH-wave problem and the academic disk.

mod perturbation;
mod pml;
mod profile;

use std::f64::consts::PI;

pub use perturbation::{apply_perturbation, Perturbation, PerturbationKind, PerturbedVelocity};
pub use pml::PmlSpec;
pub use profile::{ProfilePiece, RadialProfile, R_CMB};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaBc {
    Dirichlet,
    Periodic,
}

/// Radial boundary condition at one end of the interval. `Pml` closes the
/// absorbing layer with a homogeneous Dirichlet condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialBc {
    Neumann,
    Dirichlet,
    Pml,
}

impl RadialBc {
    pub fn is_dirichlet(self) -> bool {
        !matches!(self, RadialBc::Neumann)
    }
}

/// Layered academic disk: `J` equal layers on `(0, 1)`, speeds alternating
/// between `1/(1 + alpha/2)` (outermost layer) and `1/(1 - alpha/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskLayers {
    pub alpha: f64,
    pub layers: usize,
}

impl DiskLayers {
    /// Layer index counted from the outer boundary, starting at 1.
    pub fn layer_of(&self, r: f64) -> usize {
        let j = self.layers as f64;
        let from_inner = ((r * j).floor().max(0.0) as usize).min(self.layers - 1);
        self.layers - from_inner
    }

    pub fn speed_of_layer(&self, layer: usize) -> f64 {
        if layer % 2 == 1 {
            1.0 / (1.0 + self.alpha / 2.0)
        } else {
            1.0 / (1.0 - self.alpha / 2.0)
        }
    }

    pub fn speed(&self, r: f64) -> f64 {
        self.speed_of_layer(self.layer_of(r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Medium {
    /// Axisymmetric SH waves: `c0 = ρω²r⁴`, `c1 = μr⁴`, `c2 = μr²`,
    /// `w0 = w1 = sin³θ`.
    Sh(RadialProfile),
    /// Polar Helmholtz: `c0 = rω²/(ρc²)`, `c1 = r/ρ`, `c2 = 1/(rρ)`, `w = 1`.
    Disk(DiskLayers),
    /// Cartesian strip with constant velocity: `c0 = ω²/v²`, `c1 = c2 = 1`,
    /// `w = 1`.
    Strip { velocity: f64 },
}

impl Medium {
    /// Density and velocity continued to the complex point `rc`, using the
    /// piece that contains the real radius `r`.
    fn density_velocity(&self, r: f64, rc: C64) -> (C64, C64) {
        match self {
            Medium::Sh(p) => p.eval_complex(r, rc),
            Medium::Disk(d) => (C64::new(1.0, 0.0), C64::new(d.speed(r), 0.0)),
            Medium::Strip { velocity } => (C64::new(1.0, 0.0), C64::new(*velocity, 0.0)),
        }
    }

    pub fn background_velocity(&self, r: f64) -> f64 {
        self.density_velocity(r, C64::new(r, 0.0)).1.re
    }

    /// Unscaled `[c0, c1, c2]` at a complex radius for given density,
    /// velocity and frequency.
    fn form(&self, rc: C64, rho: C64, v: C64, omega: C64) -> [C64; 3] {
        match self {
            Medium::Sh(_) => {
                let mu = rho * v * v;
                let r2 = rc * rc;
                let r4 = r2 * r2;
                [rho * omega * omega * r4, mu * r4, mu * r2]
            }
            Medium::Disk(_) => [
                rc * omega * omega / (rho * v * v),
                rc / rho,
                1.0 / (rc * rho),
            ],
            Medium::Strip { .. } => [omega * omega / (v * v), C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        }
    }

    /// Angular weight; identical for the mass and stiffness terms in both
    /// models.
    pub fn angular_weight(&self, theta: f64) -> f64 {
        match self {
            Medium::Sh(_) => theta.sin().powi(3),
            Medium::Disk(_) | Medium::Strip { .. } => 1.0,
        }
    }

    /// Weight of the volume element used for L² norms.
    pub fn volume_weight(&self, r: f64, theta: f64) -> f64 {
        match self {
            Medium::Sh(_) => r.powi(4) * theta.sin().powi(3),
            Medium::Disk(_) => r,
            Medium::Strip { .. } => 1.0,
        }
    }

    /// Upper bound of `λ` for radially propagating (guided) modes:
    /// `ω² · max_r c0/(ω² c2)`.
    pub fn guided_scale(&self, r_lo: f64, r_hi: f64) -> f64 {
        let n = 400;
        (0..=n)
            .map(|k| {
                let r = r_lo + (r_hi - r_lo) * k as f64 / n as f64;
                let rc = C64::new(r, 0.0);
                let (rho, v) = self.density_velocity(r, rc);
                let [c0, _, c2] = self.form(rc, rho, v, C64::new(1.0, 0.0));
                (c0 / c2).re
            })
            .fold(0.0, f64::max)
    }
}

/// Separable coefficient model of the bilinear form, optionally with a
/// radial PML and a complex frequency shift.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableCoefficients {
    pub medium: Medium,
    pub omega: f64,
    /// Damping shift, `omega -> omega + i*gamma`.
    pub gamma: f64,
    pub r_interval: (f64, f64),
    pub theta_interval: (f64, f64),
    pub theta_bc: ThetaBc,
    pub r_bc_inner: RadialBc,
    pub r_bc_outer: RadialBc,
    pub pml: Option<PmlSpec>,
}

impl SeparableCoefficients {
    pub fn omega_complex(&self) -> C64 {
        C64::new(self.omega, self.gamma)
    }

    /// `[c0, c1, c2]` at radius `r`, including complex stretching.
    pub fn radial(&self, r: f64) -> [C64; 3] {
        self.radial_with_velocity_factor(r, 1.0)
    }

    /// `[c0, c1, c2]` with the background velocity multiplied by `factor`.
    pub fn radial_with_velocity_factor(&self, r: f64, factor: f64) -> [C64; 3] {
        let omega = self.omega_complex();
        let (rc, d) = match &self.pml {
            Some(p) => p.stretch(r, omega),
            None => (C64::new(r, 0.0), C64::new(1.0, 0.0)),
        };
        let (rho, v) = self.medium.density_velocity(r, rc);
        let [c0, c1, c2] = self.medium.form(rc, rho, v * factor, omega);
        [c0 * d, c1 / d, c2 * d]
    }

    pub fn w0(&self, theta: f64) -> f64 {
        self.medium.angular_weight(theta)
    }

    pub fn w1(&self, theta: f64) -> f64 {
        self.medium.angular_weight(theta)
    }

    pub fn guided_threshold(&self) -> f64 {
        self.omega * self.omega * self.medium.guided_scale(self.r_interval.0, self.r_interval.1)
    }

    /// Copy with the outer boundary switched to a free surface (PML removed).
    pub fn with_free_surface(&self) -> Self {
        Self {
            r_bc_outer: RadialBc::Neumann,
            pml: None,
            ..self.clone()
        }
    }
}

/// SH-wave coefficients for the axisymmetric mantle problem with free
/// surface conditions at both radial ends.
pub fn make_sh_coefficients(profile: &RadialProfile, omega: f64) -> Result<SeparableCoefficients> {
    if !(omega > 0.0) {
        return Err(Error::validation("omega must be positive"));
    }
    Ok(SeparableCoefficients {
        medium: Medium::Sh(profile.clone()),
        omega,
        gamma: 0.0,
        r_interval: (profile.inner_radius(), profile.outer_radius()),
        theta_interval: (0.0, PI),
        theta_bc: ThetaBc::Dirichlet,
        r_bc_inner: RadialBc::Neumann,
        r_bc_outer: RadialBc::Neumann,
        pml: None,
    })
}

/// Academic layered disk. The outer boundary is marked for a PML, which is
/// attached with [`pml_scale`].
pub fn make_disk_coefficients(alpha: f64, omega: f64, layers: usize) -> Result<SeparableCoefficients> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(Error::validation(format!("alpha = {alpha} must lie in [0, 2)")));
    }
    if layers == 0 {
        return Err(Error::validation("disk needs at least one layer"));
    }
    if !(omega > 0.0) {
        return Err(Error::validation("omega must be positive"));
    }
    Ok(SeparableCoefficients {
        medium: Medium::Disk(DiskLayers { alpha, layers }),
        omega,
        gamma: 0.0,
        r_interval: (0.0, 1.0),
        theta_interval: (0.0, 2.0 * PI),
        theta_bc: ThetaBc::Periodic,
        r_bc_inner: RadialBc::Neumann,
        r_bc_outer: RadialBc::Pml,
        pml: None,
    })
}

/// Constant-velocity strip `(r0, r1) × (0, width)` with Dirichlet sides in
/// the transverse direction and natural radial ends.
pub fn make_strip_coefficients(velocity: f64, omega: f64, r_interval: (f64, f64), width: f64) -> Result<SeparableCoefficients> {
    if !(velocity > 0.0 && omega > 0.0 && width > 0.0 && r_interval.1 > r_interval.0) {
        return Err(Error::validation("strip needs positive velocity, frequency and extent"));
    }
    Ok(SeparableCoefficients {
        medium: Medium::Strip { velocity },
        omega,
        gamma: 0.0,
        r_interval,
        theta_interval: (0.0, width),
        theta_bc: ThetaBc::Dirichlet,
        r_bc_inner: RadialBc::Neumann,
        r_bc_outer: RadialBc::Neumann,
        pml: None,
    })
}

/// Attach a radial PML (and its frequency shift) to the coefficients. The
/// outer boundary becomes a Dirichlet-closed absorbing layer.
pub fn pml_scale(spec: PmlSpec, coeffs: &SeparableCoefficients) -> Result<SeparableCoefficients> {
    let (lo, hi) = coeffs.r_interval;
    spec.validate(lo, hi)?;
    Ok(SeparableCoefficients {
        gamma: spec.gamma,
        r_bc_outer: RadialBc::Pml,
        pml: Some(spec),
        ..coeffs.clone()
    })
}
