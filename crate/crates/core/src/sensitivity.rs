//! One-dimensional sensitivity laboratory for
//!
//! ```text
//! u'' + ω²(1 + ε) u = 0 on (0, a),   u(0) = 1,
//! transparent:  u'(a) = iω u(a),      reflecting:  u(a) = 0.
//! ```
//!
//! DtN numbers are `-u'(0)`. The logarithmic derivative `v = u'/u` solves
//! the Riccati equation `v' = -ω² - E(x) - v²` with `E = ω² ε`.

use std::fmt::Write as _;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLineBc {
    Transparent,
    Reflecting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineProblem {
    pub a: f64,
    pub omega: C64,
    pub epsilon: f64,
    pub bc: HalfLineBc,
}

/// Relative size of `sin` below which a reflecting problem is resonant.
const RESONANCE_TOL: f64 = 1e-13;

impl HalfLineProblem {
    pub fn new(a: f64, omega: f64, epsilon: f64, bc: HalfLineBc) -> Result<Self> {
        Self::with_complex_omega(a, C64::new(omega, 0.0), epsilon, bc)
    }

    pub fn with_complex_omega(a: f64, omega: C64, epsilon: f64, bc: HalfLineBc) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::validation(format!("interval length a = {a} must be positive")));
        }
        if !(omega.re > 0.0 && omega.im >= 0.0) {
            return Err(Error::validation(format!("omega = {omega} needs Re > 0 and Im >= 0")));
        }
        if !(epsilon > -1.0) {
            return Err(Error::validation(format!("epsilon = {epsilon} must exceed -1")));
        }
        Ok(Self { a, omega, epsilon, bc })
    }

    pub fn omega_eps(&self) -> C64 {
        self.omega * (1.0 + self.epsilon).sqrt()
    }

    fn check_resonance(&self) -> Result<()> {
        if self.bc == HalfLineBc::Reflecting && (self.omega_eps() * self.a).sin().norm() < RESONANCE_TOL {
            return Err(Error::Resonance(format!(
                "sin(omega_eps * a) vanishes for omega = {}, a = {}",
                self.omega, self.a
            )));
        }
        Ok(())
    }

    /// `u = cos(ω_ε x) + C sin(ω_ε x)`: the coefficient `C`.
    fn sine_coefficient(&self) -> C64 {
        let we = self.omega_eps();
        let (s, c) = ((we * self.a).sin(), (we * self.a).cos());
        match self.bc {
            HalfLineBc::Reflecting => -c / s,
            HalfLineBc::Transparent => {
                let i = C64::i();
                (i * self.omega * c + we * s) / (we * c - i * self.omega * s)
            }
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(0.0..=self.a).contains(&x) {
            return Err(Error::Domain {
                value: x,
                lo: 0.0,
                hi: self.a,
            });
        }
        Ok(())
    }
}

/// `u_T^ε(x)` or `u_R^ε(x)`.
pub fn closed_form_solution(p: &HalfLineProblem, x: f64) -> Result<C64> {
    p.check_x(x)?;
    p.check_resonance()?;
    let we = p.omega_eps();
    if p.bc == HalfLineBc::Reflecting {
        return Ok((we * (p.a - x)).sin() / (we * p.a).sin());
    }
    Ok((we * x).cos() + p.sine_coefficient() * (we * x).sin())
}

/// `u'(x)` of [`closed_form_solution`].
pub fn closed_form_derivative(p: &HalfLineProblem, x: f64) -> Result<C64> {
    p.check_x(x)?;
    p.check_resonance()?;
    let we = p.omega_eps();
    if p.bc == HalfLineBc::Reflecting {
        return Ok(-we * (we * (p.a - x)).cos() / (we * p.a).sin());
    }
    Ok(we * (p.sine_coefficient() * (we * x).cos() - (we * x).sin()))
}

/// `DtN_T(ε) = -iω - ωε sin(ω_ε a) / (√(1+ε) cos(ω_ε a) - i sin(ω_ε a))`
/// or `dtn_R(ε) = ω_ε cot(ω_ε a)`.
pub fn dtn_number(p: &HalfLineProblem) -> Result<C64> {
    p.check_resonance()?;
    let we = p.omega_eps();
    let (s, c) = ((we * p.a).sin(), (we * p.a).cos());
    Ok(match p.bc {
        HalfLineBc::Reflecting => we * c / s,
        HalfLineBc::Transparent => {
            let k = (1.0 + p.epsilon).sqrt();
            let i = C64::i();
            -i * p.omega - p.omega * p.epsilon * s / (k * c - i * s)
        }
    })
}

/// `(Δ_T, Δ_R)`: relative DtN changes under a constant perturbation `ε`.
/// `Δ_R` is infinite where `cot(ωa) = 0` or at a perturbed resonance.
pub fn relative_errors(epsilon: f64, omega: f64, a: f64) -> (f64, f64) {
    let we = omega * (1.0 + epsilon).sqrt();
    let (s, c) = ((we * a).sin(), (we * a).cos());
    let delta_t = epsilon * s.abs() / (1.0 + epsilon * c * c).sqrt();
    let (s0, c0) = ((omega * a).sin(), (omega * a).cos());
    let d0 = omega * c0 / s0;
    let de = we * c / s;
    let delta_r = if c0.abs() < RESONANCE_TOL || !d0.is_finite() || !de.is_finite() {
        f64::INFINITY
    } else {
        (d0 - de).abs() / d0.abs()
    };
    (delta_t, delta_r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    pub atol: f64,
    pub rtol: f64,
    pub min_step: f64,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-12,
            min_step: 1e-14,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of a scalar complex ODE from `x0` to
/// `x1` (either direction).
pub fn integrate_complex<F>(f: F, x0: f64, x1: f64, y0: C64, opts: RiccatiOptions) -> Result<C64>
where
    F: Fn(f64, C64) -> C64,
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = span.abs() / 100.0;
    let mut k = [C64::new(0.0, 0.0); 7];
    let mut steps = 0usize;
    while (x1 - x) * dir > 0.0 {
        if steps > 10_000_000 {
            return Err(Error::Integration("too many steps".into()));
        }
        steps += 1;
        h = h.min((x1 - x).abs());
        let hs = h * dir;
        for s in 0..7 {
            let mut yi = y;
            for (j, aj) in DP_A[s].iter().enumerate().take(s) {
                yi += k[j] * (hs * aj);
            }
            k[s] = f(x + DP_C[s] * hs, yi);
        }
        let mut y5 = y;
        let mut err = C64::new(0.0, 0.0);
        for s in 0..7 {
            y5 += k[s] * (hs * DP_B5[s]);
            err += k[s] * (hs * (DP_B5[s] - DP_B4[s]));
        }
        if !y5.re.is_finite() || !y5.im.is_finite() {
            h *= 0.25;
        } else {
            let scale = opts.atol + opts.rtol * y.norm().max(y5.norm());
            let ratio = err.norm() / scale;
            if ratio <= 1.0 {
                x += hs;
                y = y5;
                let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                h *= grow;
            } else {
                h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        if h < opts.min_step * (1.0 + x.abs()) {
            return Err(Error::Integration(format!("step size underflow at x = {x}")));
        }
    }
    Ok(y)
}

/// `v_T(0)` for `v' = -ω² - E(x) - v²`, `v(a) = iω`, integrated backward.
pub fn riccati_integrate<E>(omega: f64, a: f64, e: E, bc: HalfLineBc) -> Result<C64>
where
    E: Fn(f64) -> f64,
{
    if bc == HalfLineBc::Reflecting {
        return Err(Error::validation(
            "the Riccati integrator supports the transparent condition only",
        ));
    }
    if !(a > 0.0) || omega == 0.0 {
        return Err(Error::validation("Riccati integration needs a > 0 and omega != 0"));
    }
    let w2 = omega * omega;
    integrate_complex(
        |x, v| -(w2 + e(x)) - v * v,
        a,
        0.0,
        C64::new(0.0, omega),
        RiccatiOptions::default(),
    )
}

/// Unperturbed kernel `k_B^y(x) = exp(∫_x^y 2 v_B)` for `0 ≤ x ≤ y ≤ a`.
pub fn perturbation_kernel(omega: f64, a: f64, bc: HalfLineBc, x: f64, y: f64) -> Result<C64> {
    if !(0.0 <= x && x <= y && y <= a) {
        return Err(Error::validation(format!("kernel needs 0 <= x <= y <= a, got x = {x}, y = {y}, a = {a}")));
    }
    Ok(match bc {
        HalfLineBc::Transparent => C64::from_polar(1.0, 2.0 * omega * (y - x)),
        HalfLineBc::Reflecting => {
            if x == y {
                return Ok(C64::new(1.0, 0.0));
            }
            let den = (omega * (a - x)).sin();
            if den.abs() < RESONANCE_TOL {
                return Err(Error::KernelPole(x));
            }
            let num = (omega * (a - y)).sin();
            C64::new(num * num / (den * den), 0.0)
        }
    })
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature of a complex integrand.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, tol: f64) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    let rule = |lo: f64, hi: f64| {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let fc = f(c);
        let mut k = fc * WK[7];
        let mut g = fc * WG[3];
        for i in 0..7 {
            let s = f(c - h * XK[i]) + f(c + h * XK[i]);
            k += s * WK[i];
            if i % 2 == 1 {
                g += s * WG[i / 2];
            }
        }
        (k * h, (k - g).norm() * h)
    };
    let mut stack = vec![(a, b, 0u32)];
    let mut total = C64::new(0.0, 0.0);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = rule(lo, hi);
        let share = tol * (hi - lo) / (b - a).abs().max(f64::MIN_POSITIVE);
        if err <= share.max(1e-15 * val.norm()) || depth >= 40 {
            if depth >= 40 && err > share {
                return Err(Error::Integration(format!("quadrature did not converge on [{lo}, {hi}]")));
            }
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

/// `k_B(0) = ∫_0^a k_B^y(0) Ẽ(y) dy`.
pub fn first_order_sensitivity<E>(omega: f64, a: f64, bc: HalfLineBc, e_tilde: E) -> Result<C64>
where
    E: Fn(f64) -> f64,
{
    if bc == HalfLineBc::Reflecting && (omega * a).sin().abs() < RESONANCE_TOL {
        return Err(Error::KernelPole(0.0));
    }
    integrate_adaptive(
        |y| {
            let k = perturbation_kernel(omega, a, bc, 0.0, y).unwrap_or(C64::new(0.0, 0.0));
            k * e_tilde(y)
        },
        0.0,
        a,
        1e-11,
    )
}

/// Rows `(ω, Δ_T, Δ_R)` on a uniform frequency grid.
pub fn delta_table(epsilon: f64, a: f64, omega_min: f64, omega_max: f64, n: usize) -> Result<Vec<(f64, f64, f64)>> {
    if n < 2 || !(omega_max > omega_min) || !(omega_min > 0.0) {
        return Err(Error::validation("frequency grid needs n >= 2 and 0 < omega_min < omega_max"));
    }
    Ok((0..n)
        .map(|k| {
            let w = omega_min + (omega_max - omega_min) * k as f64 / (n - 1) as f64;
            let (t, r) = relative_errors(epsilon, w, a);
            (w, t, r)
        })
        .collect())
}

pub fn delta_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("omega,delta_T,delta_R\n");
    for (w, t, r) in rows {
        let _ = writeln!(s, "{w:.16e},{t:.16e},{r:.16e}");
    }
    s
}

/// Envelope of `Δ_R` near `ω`: the median over one oscillation period
/// `[ω - π/(2a), ω + π/(2a)]` sampled at `samples` points.
pub fn delta_r_envelope(epsilon: f64, a: f64, omega: f64, samples: usize) -> f64 {
    let half = std::f64::consts::PI / (2.0 * a);
    let mut v: Vec<f64> = (0..samples)
        .map(|k| {
            let w = omega - half + 2.0 * half * k as f64 / (samples - 1).max(1) as f64;
            relative_errors(epsilon, w, a).1
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn problem(eps: f64, bc: HalfLineBc) -> HalfLineProblem {
        HalfLineProblem::new(1.3, 2.1, eps, bc).unwrap()
    }

    #[test]
    fn boundary_values() {
        for bc in [HalfLineBc::Transparent, HalfLineBc::Reflecting] {
            let p = problem(1e-2, bc);
            assert!((closed_form_solution(&p, 0.0).unwrap() - 1.0).norm() < 1e-15);
        }
        let r = problem(1e-2, HalfLineBc::Reflecting);
        assert!(closed_form_solution(&r, r.a).unwrap().norm() < 1e-14);
        let t = problem(0.0, HalfLineBc::Transparent);
        let u = closed_form_solution(&t, t.a).unwrap();
        let du = closed_form_derivative(&t, t.a).unwrap();
        assert!((du - C64::i() * t.omega * u).norm() < 1e-12);
    }

    #[test]
    fn dtn_matches_derivative() {
        for bc in [HalfLineBc::Transparent, HalfLineBc::Reflecting] {
            let p = problem(3e-2, bc);
            let d = dtn_number(&p).unwrap();
            assert!((d + closed_form_derivative(&p, 0.0).unwrap()).norm() < 1e-12);
        }
        let t0 = problem(0.0, HalfLineBc::Transparent);
        assert!((dtn_number(&t0).unwrap() - C64::new(0.0, -2.1)).norm() < 1e-15);
        let r = HalfLineProblem::new(PI / 4.0, 1.0, 0.0, HalfLineBc::Reflecting).unwrap();
        assert!((dtn_number(&r).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn transparent_solution_satisfies_ode() {
        let p = problem(5e-2, HalfLineBc::Transparent);
        let h = 1e-4;
        let x = 0.7;
        let u = |x| closed_form_solution(&p, x).unwrap();
        let upp = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
        let we = p.omega_eps();
        assert!((upp + we * we * u(x)).norm() < 1e-5);
    }

    #[test]
    fn resonance_rejected() {
        let p = HalfLineProblem::new(PI, 1.0, 0.0, HalfLineBc::Reflecting).unwrap();
        assert!(matches!(dtn_number(&p), Err(Error::Resonance(_))));
        assert!(HalfLineProblem::new(1.0, 1.0, -1.0, HalfLineBc::Reflecting).is_err());
    }

    #[test]
    fn relative_error_limits() {
        assert_eq!(relative_errors(0.0, 3.0, 1.0), (0.0, 0.0));
        let eps = 1e-6;
        let (w, a) = (0.7, 1.0);
        let (_, dr) = relative_errors(eps, w, a);
        let first = (-0.5 + w * a / (2.0 * w * a).sin()).abs();
        assert!((dr / eps / first - 1.0).abs() < 1e-2);
        assert!(relative_errors(1e-3, PI / 2.0, 1.0).1.is_infinite());
    }

    #[test]
    fn riccati_unperturbed_and_conjugate() {
        let v = riccati_integrate(5.0, 1.0, |_| 0.0, HalfLineBc::Transparent).unwrap();
        assert!((v - C64::new(0.0, 5.0)).norm() < 1e-9);
        let e = |x: f64| 3.0 * x.sin();
        let p = riccati_integrate(4.0, 1.5, e, HalfLineBc::Transparent).unwrap();
        let m = riccati_integrate(-4.0, 1.5, e, HalfLineBc::Transparent).unwrap();
        assert!((p - m.conj()).norm() < 1e-9);
        assert!(riccati_integrate(4.0, 1.0, e, HalfLineBc::Reflecting).is_err());
    }

    #[test]
    fn riccati_matches_closed_form() {
        for eps in [0.0, 1e-3, 1e-2] {
            let (w, a) = (6.0, 1.0);
            let p = HalfLineProblem::new(a, w, eps, HalfLineBc::Transparent).unwrap();
            let exact = closed_form_derivative(&p, 0.0).unwrap() / closed_form_solution(&p, 0.0).unwrap();
            let v = riccati_integrate(w, a, |_| w * w * eps, HalfLineBc::Transparent).unwrap();
            assert!((v - exact).norm() < 1e-8, "eps {eps}: {v} vs {exact}");
        }
    }

    #[test]
    fn kernels() {
        for (x, y) in [(0.0, 0.3), (0.2, 0.9), (0.5, 0.5)] {
            let k = perturbation_kernel(7.0, 1.0, HalfLineBc::Transparent, x, y).unwrap();
            assert!((k.norm() - 1.0).abs() < 1e-15);
            assert_eq!(perturbation_kernel(7.0, 1.0, HalfLineBc::Reflecting, y, y).unwrap(), C64::new(1.0, 0.0));
        }
        assert!(perturbation_kernel(1.0, 1.0, HalfLineBc::Reflecting, 0.5, 0.2).is_err());
        let pole = 1.0 - PI / 4.0;
        assert!(matches!(
            perturbation_kernel(4.0, 1.0, HalfLineBc::Reflecting, pole, 0.9),
            Err(Error::KernelPole(_))
        ));
    }

    #[test]
    fn reflecting_kernel_matches_linear_ode() {
        // dk/dx = -2 v_R(x) k, v_R = -ω cot(ω(a - x)), k(y) = 1, by RK4 from y to 0
        let (w, a, y) = (1.0, 2.0, 1.0);
        let rhs = |x: f64, k: f64| 2.0 * w / (w * (a - x)).tan() * k;
        let n = 10000;
        let h = -y / n as f64;
        let (mut x, mut k) = (y, 1.0);
        for _ in 0..n {
            let k1 = rhs(x, k);
            let k2 = rhs(x + h / 2.0, k + h / 2.0 * k1);
            let k3 = rhs(x + h / 2.0, k + h / 2.0 * k2);
            let k4 = rhs(x + h, k + h * k3);
            k += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += h;
        }
        let kr = perturbation_kernel(w, a, HalfLineBc::Reflecting, 0.0, y).unwrap();
        assert!((kr.re - k).abs() < 1e-10 * k.abs(), "{kr} vs {k}");
        let expect = (w * (a - y)).sin().powi(2) / (w * a).sin().powi(2);
        assert!((kr.re - expect).abs() < 1e-15);
    }

    #[test]
    fn transparent_sensitivity_bounded_by_mass() {
        let e = |y: f64| (3.0 * y).cos() + 0.2;
        let k = first_order_sensitivity(9.0, 1.0, HalfLineBc::Transparent, e).unwrap();
        let mass = integrate_adaptive(|y| C64::new(e(y).abs(), 0.0), 0.0, 1.0, 1e-12).unwrap().re;
        assert!(k.norm() <= mass);
        // closed form for constant Ẽ = 1: ∫ e^{2iωy} dy
        let one = first_order_sensitivity(9.0, 1.0, HalfLineBc::Transparent, |_| 1.0).unwrap();
        let exact = (C64::new(0.0, 18.0).exp() - 1.0) / C64::new(0.0, 18.0);
        assert!((one - exact).norm() < 1e-12);
    }

    #[test]
    fn envelope_and_table() {
        let rows = delta_table(1e-3, 1.0, 10.0, 20.0, 11).unwrap();
        assert_eq!(rows.len(), 11);
        assert!(delta_csv(&rows).starts_with("omega,delta_T,delta_R\n"));
        let e40 = delta_r_envelope(1e-3, 1.0, 40.0, 401);
        let e80 = delta_r_envelope(1e-3, 1.0, 80.0, 401);
        assert!(e80 > 1.5 * e40);
        assert!(delta_table(1e-3, 1.0, 5.0, 5.0, 10).is_err());
    }
}
