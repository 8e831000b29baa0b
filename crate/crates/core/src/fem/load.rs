use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::space::{Space1D, SpaceBc};
use crate::coeffmodel::PmlSpec;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    /// Point source `δ(r - r0) δ(θ - θ0)`.
    Dirac { r: f64, theta: f64 },
    /// Entries uniform in `[-1, 1] + i[-1, 1]`, reproducible from the seed.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Drop load entries whose basis function touches the PML.
    pub zero_in_pml: bool,
}

impl SourceSpec {
    pub fn dirac(r: f64, theta: f64) -> Self {
        Self {
            kind: SourceKind::Dirac { r, theta },
            zero_in_pml: false,
        }
    }

    pub fn random(seed: u64) -> Self {
        Self {
            kind: SourceKind::Random { seed },
            zero_in_pml: true,
        }
    }
}

fn strictly_inside(space: &Space1D, x: f64, what: &str) -> Result<()> {
    let (lo, hi) = (space.mesh().start(), space.mesh().end());
    let ok = match space.bc() {
        SpaceBc::Periodic => x >= lo && x < hi,
        _ => x > lo && x < hi,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "{what} source location {x} is not strictly inside ({lo}, {hi})"
        )))
    }
}

fn touches_pml(space_r: &Space1D, r_dof: usize, pml: &PmlSpec) -> bool {
    space_r
        .node_support(space_r.dof_node(r_dof))
        .into_iter()
        .any(|e| space_r.mesh().element(e).1 > pml.start)
}

/// Load vector in the global ordering `r_dof * n_theta + theta_dof`.
pub fn assemble_load(
    source: &SourceSpec,
    space_r: &Space1D,
    space_theta: &Space1D,
    pml: Option<&PmlSpec>,
) -> Result<Vec<C64>> {
    let nt = space_theta.dof_count();
    let mut f = vec![C64::new(0.0, 0.0); space_r.dof_count() * nt];
    match source.kind {
        SourceKind::Dirac { r, theta } => {
            strictly_inside(space_r, r, "radial")?;
            strictly_inside(space_theta, theta, "angular")?;
            let pr = space_r.eval_at(r)?;
            let pt = space_theta.eval_at(theta)?;
            for &(i, vr, _) in &pr {
                for &(k, vt, _) in &pt {
                    f[i * nt + k] += C64::new(vr * vt, 0.0);
                }
            }
        }
        SourceKind::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for z in f.iter_mut() {
                *z = C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            }
        }
    }
    if let (true, Some(p)) = (source.zero_in_pml, pml) {
        for i in 0..space_r.dof_count() {
            if touches_pml(space_r, i, p) {
                f[i * nt..(i + 1) * nt].fill(C64::new(0.0, 0.0));
            }
        }
    }
    Ok(f)
}
