use super::profile::RadialProfile;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    None,
    /// `1 + eps * cos(r*theta) * sin(r*theta)`
    Trig,
    /// `1 + eps`
    Constant,
}

/// Relative velocity perturbation of strength `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub epsilon: f64,
}

impl Perturbation {
    pub const NONE: Perturbation = Perturbation {
        kind: PerturbationKind::None,
        epsilon: 0.0,
    };

    pub fn new(kind: PerturbationKind, epsilon: f64) -> Self {
        Self { kind, epsilon }
    }

    /// `v(r, theta) / v_background(r)`.
    pub fn factor(&self, r: f64, theta: f64) -> f64 {
        match self.kind {
            PerturbationKind::None => 1.0,
            PerturbationKind::Constant => 1.0 + self.epsilon,
            PerturbationKind::Trig => {
                let x = r * theta;
                1.0 + self.epsilon * x.cos() * x.sin()
            }
        }
    }

    /// Whether the perturbed medium is still a function of `r` alone.
    pub fn is_separable(&self) -> bool {
        self.epsilon == 0.0 || self.kind != PerturbationKind::Trig
    }
}

/// Background velocity with a relative perturbation applied.
#[derive(Debug, Clone)]
pub struct PerturbedVelocity {
    pub background: RadialProfile,
    pub perturbation: Perturbation,
}

impl PerturbedVelocity {
    pub fn velocity(&self, r: f64, theta: f64) -> Result<f64> {
        let (_, v) = self.background.eval(r)?;
        Ok(v * self.perturbation.factor(r, theta))
    }
}

pub fn apply_perturbation(profile: &RadialProfile, p: Perturbation) -> PerturbedVelocity {
    PerturbedVelocity {
        background: profile.clone(),
        perturbation: p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trig_at_quarter_pi() {
        let p = Perturbation::new(PerturbationKind::Trig, 0.3);
        let r = 0.5;
        let theta = std::f64::consts::FRAC_PI_4 / r;
        assert!((p.factor(r, theta) - 1.15).abs() < 1e-15);
    }

    #[test]
    fn constant_factor() {
        let profile = RadialProfile::prem_like();
        let pv = apply_perturbation(&profile, Perturbation::new(PerturbationKind::Constant, 0.01));
        for &r in &[0.6, 0.8, 0.95] {
            let v0 = profile.eval(r).unwrap().1;
            assert!((pv.velocity(r, 1.0).unwrap() / v0 - 1.01).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn zero_epsilon_is_background(r in 0.55f64..1.0, theta in 0.0f64..3.0, k in 0usize..3) {
            let kind = [PerturbationKind::None, PerturbationKind::Trig, PerturbationKind::Constant][k];
            let profile = RadialProfile::prem_like();
            let pv = apply_perturbation(&profile, Perturbation::new(kind, 0.0));
            prop_assert_eq!(pv.velocity(r, theta).unwrap(), profile.eval(r).unwrap().1);
        }
    }
}
