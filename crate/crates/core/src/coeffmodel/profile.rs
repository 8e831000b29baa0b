//! Piecewise-polynomial radial material profiles.
//!
//! # File format
//!
//! ```text
//! # comment lines start with '#', blank lines are ignored
//! breakpoints: r0 r1 ... rn
//! rho: a0 a1 ...        # piece 1, density coefficients
//! v: a0 a1 ...          # piece 1, shear velocity coefficients
//! rho: ...              # piece 2
//! v: ...
//! ```
//!
//! The header line comes first. Each of the `n` pieces is given by a `rho:`
//! line immediately followed by a `v:` line. Coefficients are in ascending
//! powers of the local coordinate `t = (r - r_left) / (r_right - r_left)`,
//! so `rho: 2 -1` means `rho = 2 - t` on that piece. Numbers are parsed
//! with Rust's `f64` grammar and separated by whitespace.

use std::fmt::Write as _;
use std::path::Path;

use crate::fem::quadrature::gauss_legendre;
use crate::{Error, Result, C64};

/// Core-mantle boundary radius when the Earth radius is normalized to one
/// (3480 km / 6371 km).
pub const R_CMB: f64 = 3480.0 / 6371.0;

/// Polynomial coefficients of one profile piece.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePiece {
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
}

/// Density and shear velocity as piecewise polynomials in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    breakpoints: Vec<f64>,
    pieces: Vec<ProfilePiece>,
}

fn horner<T>(coeffs: &[f64], t: T) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Add<f64, Output = T> + From<f64>,
{
    let mut acc = T::from(0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

impl RadialProfile {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<ProfilePiece>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::validation("profile needs at least two breakpoints"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("profile breakpoints must be strictly increasing"));
        }
        if pieces.len() != breakpoints.len() - 1 {
            return Err(Error::validation(format!(
                "profile has {} intervals but {} pieces",
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        let profile = Self { breakpoints, pieces };
        profile.check_positive()?;
        Ok(profile)
    }

    /// Constant density and velocity on `[r0, r1]`.
    pub fn constant(r0: f64, r1: f64, rho: f64, v: f64) -> Result<Self> {
        Self::new(
            vec![r0, r1],
            vec![ProfilePiece {
                rho: vec![rho],
                v: vec![v],
            }],
        )
    }

    /// Synthetic three-piece mantle profile between the normalized CMB and
    /// surface radii, with one velocity/density discontinuity at
    /// r = 5701/6371 and a continuous kink at r = 6171/6371.
    pub fn prem_like() -> Self {
        let r_660 = 5701.0 / 6371.0;
        let r_200 = 6171.0 / 6371.0;
        Self::new(
            vec![R_CMB, r_660, r_200, 1.0],
            vec![
                ProfilePiece {
                    rho: vec![1.65, -0.35],
                    v: vec![1.13, -0.17],
                },
                ProfilePiece {
                    rho: vec![1.20, -0.15],
                    v: vec![0.86, -0.13],
                },
                ProfilePiece {
                    rho: vec![1.05, -0.05],
                    v: vec![0.73, -0.03],
                },
            ],
        )
        .expect("bundled profile is valid")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[ProfilePiece] {
        &self.pieces
    }

    pub fn inner_radius(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn outer_radius(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Index of the piece containing `r`; interior breakpoints belong to the
    /// piece on their right. Values outside the domain are clamped.
    pub fn piece_index(&self, r: f64) -> usize {
        let n = self.pieces.len();
        let k = self.breakpoints.partition_point(|&b| b <= r);
        k.saturating_sub(1).min(n - 1)
    }

    fn local(&self, k: usize, r: C64) -> C64 {
        let (a, b) = (self.breakpoints[k], self.breakpoints[k + 1]);
        (r - a) / (b - a)
    }

    /// Density and velocity at `r`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let (lo, hi) = (self.inner_radius(), self.outer_radius());
        if !(r >= lo && r <= hi) {
            return Err(Error::Domain { value: r, lo, hi });
        }
        let k = self.piece_index(r);
        let t = self.local(k, C64::new(r, 0.0)).re;
        let p = &self.pieces[k];
        Ok((horner(&p.rho, t), horner(&p.v, t)))
    }

    /// Analytic continuation of the piece selected by the real radius
    /// `r_real` to the complex point `r_complex`.
    pub fn eval_complex(&self, r_real: f64, r_complex: C64) -> (C64, C64) {
        let k = self.piece_index(r_real);
        let t = self.local(k, r_complex);
        let p = &self.pieces[k];
        (horner(&p.rho, t), horner(&p.v, t))
    }

    /// Same profile with all velocities multiplied by `factor`.
    pub fn with_velocity_scale(&self, factor: f64) -> Result<Self> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| ProfilePiece {
                rho: p.rho.clone(),
                v: p.v.iter().map(|c| c * factor).collect(),
            })
            .collect();
        Self::new(self.breakpoints.clone(), pieces)
    }

    fn check_positive(&self) -> Result<()> {
        let rule = gauss_legendre(12);
        for (k, piece) in self.pieces.iter().enumerate() {
            let ts = rule.nodes.iter().map(|&x| 0.5 * (x + 1.0)).chain([0.0, 1.0]);
            for t in ts {
                let rho: f64 = horner(&piece.rho, t);
                let v: f64 = horner(&piece.v, t);
                if !(rho > 0.0 && v > 0.0) {
                    return Err(Error::validation(format!(
                        "profile piece {} is not positive (rho = {rho}, v = {v} at t = {t})",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let numbers = |line: usize, rest: &str| -> Result<Vec<f64>> {
            rest.split_whitespace()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("not a number: `{s}`"),
                    })
                })
                .collect()
        };
        let field = |line: usize, text: &str, key: &str| -> Result<Vec<f64>> {
            let rest = text
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(':'))
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("expected `{key}:`"),
                })?;
            let v = numbers(line, rest)?;
            if v.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: format!("`{key}:` needs at least one value"),
                });
            }
            Ok(v)
        };

        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "empty profile".into(),
        })?;
        let breakpoints = field(line, header, "breakpoints")?;
        let mut pieces = Vec::new();
        while let Some((line, text)) = lines.next() {
            let rho = field(line, text, "rho")?;
            let (line, text) = lines.next().ok_or(Error::Parse {
                line,
                msg: "`rho:` line without following `v:` line".into(),
            })?;
            let v = field(line, text, "v")?;
            pieces.push(ProfilePiece { rho, v });
        }
        Self::new(breakpoints, pieces)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = format!("breakpoints: {}\n", join(&self.breakpoints));
        for p in &self.pieces {
            let _ = writeln!(out, "rho: {}", join(&p.rho));
            let _ = writeln!(out, "v: {}", join(&p.v));
        }
        out
    }
}
