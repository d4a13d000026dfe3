//! Closed-form model functions: diabatic potentials, adiabatic surfaces,
//! the mixing angle with its gradient (the geometric-phase vector potential),
//! and the characteristic points of the lower surface.
//!
//! The model is two identical 2D parabolas separated by `a` along x and
//! biased by `delta` in energy, coupled linearly in y:
//!
//! ```text
//! V11 = ω₁²/2 (x + a/2)² + ω₂²/2 y² + Δ/2
//! V22 = ω₁²/2 (x − a/2)² + ω₂²/2 y² − Δ/2
//! V12 = c y
//! ```
//!
//! The donor well (higher) sits at x = −a/2, the acceptor at +a/2. The two
//! adiabatic surfaces touch at the conical intersection on the y = 0 line,
//! at the x where V11 = V22.

use crate::error::CisimError;
use crate::Result;

/// Physical parameters of the two-state model (ħ = 1, mass-weighted units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Frequency of the inter-well (tuning) coordinate x.
    pub omega1: f64,
    /// Frequency of the coupling coordinate y.
    pub omega2: f64,
    /// Separation of the two well minima along x.
    pub a: f64,
    /// Energy bias Δ between donor (+Δ/2) and acceptor (−Δ/2).
    pub delta: f64,
    /// Linear diabatic coupling strength, V12 = c·y.
    pub c: f64,
}

impl ModelParams {
    pub fn new(omega1: f64, omega2: f64, a: f64, delta: f64, c: f64) -> Result<Self> {
        let p = Self {
            omega1,
            omega2,
            a,
            delta,
            c,
        };
        p.validate()?;
        Ok(p)
    }

    /// Construct from the dimensionless coupling γ = 2c/(ω₁²a).
    pub fn from_gamma(omega1: f64, omega2: f64, a: f64, delta: f64, gamma: f64) -> Result<Self> {
        let c = gamma * omega1 * omega1 * a / 2.0;
        Self::new(omega1, omega2, a, delta, c)
    }

    /// Isotropic default geometry (ω₁ = ω₂ = 1, a = 4) at given bias and γ.
    pub fn default_iso(delta: f64, gamma: f64) -> Self {
        Self::from_gamma(1.0, 1.0, 4.0, delta, gamma).expect("default geometry is valid")
    }

    fn validate(&self) -> Result<()> {
        let ok = self.omega1 > 0.0
            && self.omega2 > 0.0
            && self.a > 0.0
            && self.omega1.is_finite()
            && self.omega2.is_finite()
            && self.a.is_finite()
            && self.delta.is_finite()
            && self.c.is_finite();
        if !ok {
            return Err(CisimError::InvalidGrid(format!(
                "model parameters must be finite with omega1, omega2, a > 0: {self:?}"
            )));
        }
        Ok(())
    }

    /// Dimensionless coupling strength γ = 2c/(ω₁²a).
    pub fn gamma(&self) -> f64 {
        2.0 * self.c / (self.omega1 * self.omega1 * self.a)
    }

    /// x-coordinate of the conical intersection: where V11 = V22 on y = 0,
    /// i.e. x = −Δ/(ω₁²a). Negative bias moves the CI toward the acceptor.
    pub fn ci_x(&self) -> f64 {
        -self.delta / (self.omega1 * self.omega1 * self.a)
    }

    /// Energy at the conical intersection, W±(ci_x, 0).
    pub fn ci_energy(&self) -> f64 {
        let (lo, hi) = w_adiabatic(self, self.ci_x(), 0.0);
        0.5 * (lo + hi)
    }
}

/// Donor diabatic potential V11.
pub fn v11(p: &ModelParams, x: f64, y: f64) -> f64 {
    let dx = x + 0.5 * p.a;
    0.5 * p.omega1 * p.omega1 * dx * dx + 0.5 * p.omega2 * p.omega2 * y * y + 0.5 * p.delta
}

/// Acceptor diabatic potential V22.
pub fn v22(p: &ModelParams, x: f64, y: f64) -> f64 {
    let dx = x - 0.5 * p.a;
    0.5 * p.omega1 * p.omega1 * dx * dx + 0.5 * p.omega2 * p.omega2 * y * y - 0.5 * p.delta
}

/// Diabatic coupling V12 = c·y (odd in y).
pub fn v12(p: &ModelParams, _x: f64, y: f64) -> f64 {
    p.c * y
}

/// Both adiabatic surfaces, returned as (W₋, W₊).
pub fn w_adiabatic(p: &ModelParams, x: f64, y: f64) -> (f64, f64) {
    let s = 0.5 * (v11(p, x, y) + v22(p, x, y));
    let d = 0.5 * (v11(p, x, y) - v22(p, x, y));
    let coup = v12(p, x, y);
    let root = (d * d + coup * coup).sqrt();
    (s - root, s + root)
}

fn ci_distance_sq(p: &ModelParams, x: f64, y: f64) -> f64 {
    let dx = x - p.ci_x();
    dx * dx + y * y
}

fn ci_tol_sq(p: &ModelParams) -> f64 {
    let scale = p.a.max(1.0);
    let tol = 64.0 * f64::EPSILON * scale;
    tol * tol
}

/// Mixing angle θ = ½ atan2(γy, x − x_CI) ∈ (−π/2, π/2].
///
/// The two-argument arctangent places the branch cut on the ray
/// {x < x_CI, y = 0}: θ jumps from π/2 to −π/2 across it, so e^{2iθ} is
/// continuous everywhere except the CI itself.
pub fn theta(p: &ModelParams, x: f64, y: f64) -> Result<f64> {
    if ci_distance_sq(p, x, y) <= ci_tol_sq(p) {
        return Err(CisimError::CiPoint { x, y });
    }
    Ok(0.5 * (p.gamma() * y).atan2(x - p.ci_x()))
}

/// Gradient of the mixing angle, A = ∇θ — the GP vector potential.
///
/// With ρ² = (x − x_CI)² + γ²y²:
///   Ax = −γy / (2ρ²),  Ay = γ(x − x_CI) / (2ρ²).
/// Smooth everywhere except the CI; the branch cut of θ does not appear.
pub fn grad_theta(p: &ModelParams, x: f64, y: f64) -> Result<(f64, f64)> {
    if ci_distance_sq(p, x, y) <= ci_tol_sq(p) {
        return Err(CisimError::CiPoint { x, y });
    }
    let g = p.gamma();
    let dx = x - p.ci_x();
    let rho2 = dx * dx + g * g * y * y;
    Ok((-g * y / (2.0 * rho2), g * dx / (2.0 * rho2)))
}

/// Analytic gradient of the lower adiabatic surface W₋.
pub fn grad_w_minus(p: &ModelParams, x: f64, y: f64) -> (f64, f64) {
    let w1sq = p.omega1 * p.omega1;
    let w2sq = p.omega2 * p.omega2;
    let d = w1sq * p.a * x + p.delta; // V11 − V22
    let coup = p.c * y;
    let s = (d * d + 4.0 * coup * coup).sqrt();
    if s == 0.0 {
        // At the CI the surface is conical; report the smooth part only.
        return (w1sq * x, w2sq * y);
    }
    let gx = w1sq * x - d * w1sq * p.a / (2.0 * s);
    let gy = w2sq * y - 2.0 * p.c * p.c * y / s;
    (gx, gy)
}

/// Kind tag for a characteristic point of W₋.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    DonorMin,
    AcceptorMin,
    Ts1,
    Ts2,
    Ci,
}

/// A located characteristic point of the lower surface.
#[derive(Debug, Clone, Copy)]
pub struct StationaryPoint {
    pub position: (f64, f64),
    pub energy: f64,
    pub kind: StationaryKind,
}

/// Result of the stationary-point search. `ts_converged` is false when the
/// Newton iterations for the transition states failed (the TS entries are
/// then omitted).
#[derive(Debug, Clone)]
pub struct StationaryPoints {
    pub points: Vec<StationaryPoint>,
    pub ts_converged: bool,
}

impl StationaryPoints {
    pub fn get(&self, kind: StationaryKind) -> Option<&StationaryPoint> {
        self.points.iter().find(|sp| sp.kind == kind)
    }
}

/// Damped Newton iteration on ∇W₋ from `seed`. The Jacobian is a central
/// difference of the analytic gradient. Gradient-norm tolerance 1e-10.
fn newton_stationary(p: &ModelParams, seed: (f64, f64)) -> Option<(f64, f64)> {
    let (mut x, mut y) = seed;
    let tol = 1e-10;
    let fd = 1e-6 * p.a.max(1.0);
    for _ in 0..200 {
        let (gx, gy) = grad_w_minus(p, x, y);
        let gnorm = gx.hypot(gy);
        if gnorm < tol {
            return Some((x, y));
        }
        let (gxp, gyp) = grad_w_minus(p, x + fd, y);
        let (gxm, gym) = grad_w_minus(p, x - fd, y);
        let jxx = (gxp - gxm) / (2.0 * fd);
        let jyx = (gyp - gym) / (2.0 * fd);
        let (gxp, gyp) = grad_w_minus(p, x, y + fd);
        let (gxm, gym) = grad_w_minus(p, x, y - fd);
        let jxy = (gxp - gxm) / (2.0 * fd);
        let jyy = (gyp - gym) / (2.0 * fd);
        let det = jxx * jyy - jxy * jyx;
        if det.abs() < 1e-14 || !det.is_finite() {
            return None;
        }
        let dx = -(gx * jyy - gy * jxy) / det;
        let dy = -(jxx * gy - jyx * gx) / det;
        // Backtrack until the gradient norm decreases.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (nx, ny) = (x + step * dx, y + step * dy);
            let (ngx, ngy) = grad_w_minus(p, nx, ny);
            if ngx.hypot(ngy) < gnorm {
                x = nx;
                y = ny;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Locate the donor/acceptor minima, the CI, and the two symmetric
/// transition states of W₋.
///
/// The TS seeds sit on the CI column at y ≈ ±c/ω₂², where the linear
/// coupling balances the harmonic restoring force. For strong coupling the
/// Newton search may fail; the result then carries `ts_converged = false`.
pub fn stationary_points(p: &ModelParams) -> StationaryPoints {
    let mut points = Vec::new();
    let energy = |x: f64, y: f64| w_adiabatic(p, x, y).0;

    for (seed, kind) in [
        ((-0.5 * p.a, 0.0), StationaryKind::DonorMin),
        ((0.5 * p.a, 0.0), StationaryKind::AcceptorMin),
    ] {
        if let Some((x, y)) = newton_stationary(p, seed) {
            points.push(StationaryPoint {
                position: (x, y),
                energy: energy(x, y),
                kind,
            });
        }
    }

    let ci = (p.ci_x(), 0.0);
    points.push(StationaryPoint {
        position: ci,
        energy: energy(ci.0, ci.1),
        kind: StationaryKind::Ci,
    });

    let mut ts_converged = true;
    if p.gamma() > 0.0 {
        let y_seed = p.c / (p.omega2 * p.omega2);
        let mut found = Vec::new();
        for (sign, kind) in [(1.0, StationaryKind::Ts1), (-1.0, StationaryKind::Ts2)] {
            match newton_stationary(p, (p.ci_x(), sign * y_seed)) {
                Some((x, y)) if y.abs() > 1e-12 => found.push(StationaryPoint {
                    position: (x, y),
                    energy: energy(x, y),
                    kind,
                }),
                _ => ts_converged = false,
            }
        }
        if ts_converged {
            points.extend(found);
        }
    } else {
        ts_converged = false;
    }

    StationaryPoints {
        points,
        ts_converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn demo_params() -> ModelParams {
        ModelParams::new(1.0, 1.0, 4.0, 1.0, 0.2).unwrap()
    }

    #[test]
    fn potentials_pointwise() {
        let p = demo_params();
        assert_relative_eq!(v11(&p, 0.0, 0.0), 2.5);
        assert_relative_eq!(v22(&p, 0.0, 0.0), 1.5);
        assert_relative_eq!(v11(&p, -2.0, 0.0), 0.5); // donor minimum, Δ/2
        assert_relative_eq!(v22(&p, 2.0, 0.0), -0.5); // acceptor minimum, −Δ/2
        let p0 = ModelParams::new(1.0, 1.0, 4.0, 0.0, 0.2).unwrap();
        assert_relative_eq!(v11(&p0, 1.0, 2.0), 0.5 * 9.0 + 2.0); // 6.5
        assert_relative_eq!(v12(&p, 3.0, 0.0), 0.0);
        assert_relative_eq!(v12(&p, 3.0, 1.5), 0.3);
    }

    #[test]
    fn v12_odd_and_reflection_symmetry() {
        let p0 = ModelParams::new(1.0, 1.0, 4.0, 0.0, 0.2).unwrap();
        for &(x, y) in &[(0.3, 1.2), (-1.0, 0.4), (2.0, -2.2)] {
            assert_relative_eq!(v12(&p0, x, -y), -v12(&p0, x, y));
            assert_relative_eq!(v22(&p0, x, y), v11(&p0, -x, y), epsilon = 1e-14);
        }
    }

    #[test]
    fn adiabatic_surfaces() {
        let p = demo_params();
        let (lo, hi) = w_adiabatic(&p, 0.0, 0.0);
        assert_relative_eq!(lo, 1.5);
        assert_relative_eq!(hi, 2.5);
        // Degenerate exactly at the CI.
        let (lo, hi) = w_adiabatic(&p, p.ci_x(), 0.0);
        assert_relative_eq!(lo, hi, epsilon = 1e-14);
        assert_relative_eq!(lo, v11(&p, p.ci_x(), 0.0), epsilon = 1e-12);
        // c = 0 collapses W₋ to the diabatic envelope.
        let pc0 = ModelParams::new(1.0, 1.0, 4.0, 1.0, 0.0).unwrap();
        for &(x, y) in &[(0.0, 0.0), (1.0, 1.0), (-2.5, 0.3)] {
            let (lo, _) = w_adiabatic(&pc0, x, y);
            assert_relative_eq!(lo, v11(&pc0, x, y).min(v22(&pc0, x, y)));
        }
    }

    proptest! {
        #[test]
        fn surface_ordering(x in -8.0f64..8.0, y in -8.0f64..8.0,
                            delta in -2.0f64..2.0, gamma in 0.0f64..1.5) {
            let p = ModelParams::from_gamma(1.0, 1.0, 4.0, delta, gamma).unwrap();
            let (lo, hi) = w_adiabatic(&p, x, y);
            let (d1, d2) = (v11(&p, x, y), v22(&p, x, y));
            prop_assert!(lo <= d1.min(d2) + 1e-12);
            prop_assert!(hi >= d1.max(d2) - 1e-12);
            prop_assert!(lo <= hi);
        }

        #[test]
        fn delta_zero_mirror_symmetries(x in -6.0f64..6.0, y in -6.0f64..6.0,
                                        gamma in 0.01f64..1.5) {
            let p = ModelParams::from_gamma(1.0, 1.0, 4.0, 0.0, gamma).unwrap();
            let (lo, hi) = w_adiabatic(&p, x, y);
            let (lox, hix) = w_adiabatic(&p, -x, y);
            let (loy, hiy) = w_adiabatic(&p, x, -y);
            prop_assert!((lo - lox).abs() < 1e-12 && (hi - hix).abs() < 1e-12);
            prop_assert!((lo - loy).abs() < 1e-12 && (hi - hiy).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_values_and_branch() {
        let p = demo_params();
        let b = p.ci_x();
        assert_relative_eq!(theta(&p, b + 1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(theta(&p, b, 1.0).unwrap(), PI / 4.0);
        // On the cut itself atan2 gives π, so θ = π/2.
        assert_relative_eq!(theta(&p, b - 1.0, 0.0).unwrap(), PI / 2.0);
        assert!(theta(&p, b, 0.0).is_err());
    }

    #[test]
    fn theta_winds_half_turn_around_ci() {
        let p = demo_params();
        let b = p.ci_x();
        let n = 4000;
        let r = 0.7;
        let mut total = 0.0;
        let mut prev = theta(&p, b + r, 0.0).unwrap();
        for k in 1..=n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            let th = theta(&p, b + r * phi.cos(), r * phi.sin()).unwrap();
            let mut d = th - prev;
            // Unwrap the ±π jumps of the half-angle.
            while d > PI / 2.0 {
                d -= PI;
            }
            while d < -PI / 2.0 {
                d += PI;
            }
            total += d;
            prev = th;
        }
        assert_relative_eq!(total.abs(), PI, epsilon = 1e-10);
    }

    #[test]
    fn grad_theta_matches_finite_differences() {
        // The independent oracle mandated for the vector potential: central
        // differences of theta() away from the branch cut.
        let p = ModelParams::new(1.0, 1.0, 4.0, 0.7, 0.33).unwrap();
        let h = 1e-4;
        for &(x, y) in &[
            (1.3, 0.4),
            (0.2, 1.9),
            (-1.1, 2.0),
            (2.5, -0.6),
            (0.9, -2.2),
            (p.ci_x() + 0.25, 0.2),
        ] {
            let (ax, ay) = grad_theta(&p, x, y).unwrap();
            let fdx =
                (theta(&p, x + h, y).unwrap() - theta(&p, x - h, y).unwrap()) / (2.0 * h);
            let fdy =
                (theta(&p, x, y + h).unwrap() - theta(&p, x, y - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(ax, fdx, max_relative = 1e-6, epsilon = 1e-10);
            assert_relative_eq!(ay, fdy, max_relative = 1e-6, epsilon = 1e-10);
        }
    }

    #[test]
    fn grad_theta_on_axis_and_asymptotics() {
        let p = demo_params();
        let b = p.ci_x();
        let g = p.gamma();
        for &x in &[b + 0.5, b + 1.0, b + 3.0] {
            let (ax, ay) = grad_theta(&p, x, 0.0).unwrap();
            assert_relative_eq!(ax, 0.0);
            assert_relative_eq!(ay, 0.5 * g / (x - b), epsilon = 1e-14);
        }
        // |A| ~ 1/(2r) for γ = 1.
        let p1 = ModelParams::from_gamma(1.0, 1.0, 4.0, 0.0, 1.0).unwrap();
        for &r in &[0.3, 1.0, 2.5] {
            for &phi in &[0.3, 1.2, 2.9, 4.4] {
                let (x, y) = (p1.ci_x() + r * f64::cos(phi), r * f64::sin(phi));
                let (ax, ay) = grad_theta(&p1, x, y).unwrap();
                assert_relative_eq!(ax.hypot(ay), 0.5 / r, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn vector_potential_circulation_is_pi() {
        // Line integral of A around a loop enclosing the CI equals the θ
        // winding. Trapezoid quadrature on a circle converges spectrally.
        let p = ModelParams::new(1.0, 1.0, 4.0, 0.4, 0.31).unwrap();
        let b = p.ci_x();
        let (n, r) = (2000, 1.1);
        let mut circ = 0.0;
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            let (x, y) = (b + r * phi.cos(), r * phi.sin());
            let (ax, ay) = grad_theta(&p, x, y).unwrap();
            // dl = (−r sinφ, r cosφ) dφ
            circ += (-ax * r * phi.sin() + ay * r * phi.cos()) * 2.0 * PI / n as f64;
        }
        assert_relative_eq!(circ, PI, epsilon = 1e-8);
    }

    #[test]
    fn gamma_and_ci_location() {
        let p = demo_params();
        assert_relative_eq!(p.gamma(), 0.1);
        assert_relative_eq!(p.ci_x(), -0.25);
        let q = ModelParams::from_gamma(1.0, 1.0, 4.0, 0.0, 0.1).unwrap();
        assert_relative_eq!(q.c, 0.2);
    }

    #[test]
    fn stationary_points_structure() {
        let p = demo_params();
        let sp = stationary_points(&p);
        let donor = sp.get(StationaryKind::DonorMin).unwrap();
        let acceptor = sp.get(StationaryKind::AcceptorMin).unwrap();
        assert_relative_eq!(donor.position.0, -2.0, epsilon = 1e-7);
        assert_relative_eq!(donor.position.1, 0.0, epsilon = 1e-9);
        assert_relative_eq!(donor.energy, 0.5, epsilon = 1e-9);
        assert_relative_eq!(acceptor.energy, -0.5, epsilon = 1e-9);
        let ci = sp.get(StationaryKind::Ci).unwrap();
        assert_relative_eq!(ci.position.0, p.ci_x());

        assert!(sp.ts_converged);
        let ts1 = sp.get(StationaryKind::Ts1).unwrap();
        let ts2 = sp.get(StationaryKind::Ts2).unwrap();
        // Mirror images under y → −y.
        assert_relative_eq!(ts1.position.0, ts2.position.0, epsilon = 1e-8);
        assert_relative_eq!(ts1.position.1, -ts2.position.1, epsilon = 1e-8);
        assert_relative_eq!(ts1.energy, ts2.energy, epsilon = 1e-10);
        // TS gradient is actually stationary.
        let (gx, gy) = grad_w_minus(&p, ts1.position.0, ts1.position.1);
        assert!(gx.hypot(gy) < 1e-9);
        // The TS sits below the crossing seam energy (the coupling lowers it).
        assert!(ts1.energy < w_adiabatic(&p, p.ci_x(), 0.0).0);
    }

    #[test]
    fn donor_min_against_dense_grid_scan() {
        // Coarse dense-grid minimum as oracle for the Newton result.
        let p = ModelParams::from_gamma(1.0, 1.0, 4.0, 0.0, 0.05).unwrap();
        let sp = stationary_points(&p);
        let donor = sp.get(StationaryKind::DonorMin).unwrap();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let x = -4.0 + 4.0 * i as f64 / n as f64; // [-4, 0]
                let y = -2.0 + 4.0 * j as f64 / n as f64;
                let w = w_adiabatic(&p, x, y).0;
                if w < best.0 {
                    best = (w, x, y);
                }
            }
        }
        assert!((best.1 - donor.position.0).abs() < 2.0 * 4.0 / n as f64);
        assert!((best.2 - donor.position.1).abs() < 2.0 * 4.0 / n as f64);
        assert!(donor.energy <= best.0 + 1e-12);
    }
}
