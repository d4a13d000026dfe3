//! Uniform 2D real-space grid, complex fields on it, and the shared
//! finite-difference stencils.
//!
//! Layout is node-major with x fastest: `values[iy * nx + ix]`. Spinor fields
//! store the two diabatic components back to back (component-major). All
//! stencils assume Dirichlet walls: the field is treated as zero outside the
//! box, which keeps every stencil matrix exactly (anti)symmetric.

use crate::error::CisimError;
use crate::linalg::KahanSumC;
use crate::model::ModelParams;
use crate::Result;
use num_complex::Complex64 as C64;
use rand::Rng;
use std::io::Write;

/// Finite-difference stencil order for both ∇² and ∇.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    Second,
    #[default]
    Fourth,
}

/// Uniform grid specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub hx: f64,
    pub hy: f64,
    /// True when the y grid was shifted by hy/2 to keep the conical
    /// intersection off the nodes.
    pub ci_offset_applied: bool,
}

impl GridSpec {
    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.hx
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.hy
    }

    /// Integration weight of one node.
    pub fn weight(&self) -> f64 {
        self.hx * self.hy
    }

    /// Index of the y-row mirroring row `iy` under y → −y, if that mirrored
    /// coordinate is a grid node. With the CI offset active the topmost or
    /// bottommost row has no partner.
    pub fn mirror_row(&self, iy: usize) -> Option<usize> {
        let target = -self.y(iy);
        let j = (target - self.y_min) / self.hy;
        let jr = j.round();
        if (j - jr).abs() < 1e-9 && jr >= 0.0 && (jr as usize) < self.ny {
            Some(jr as usize)
        } else {
            None
        }
    }
}

/// Default padding for which the x wall potential reaches `energy_cap`
/// above the well bottom: ω₁² padding² / 2 = cap.
pub fn padding_for_cap(p: &ModelParams, energy_cap: f64) -> f64 {
    (2.0 * energy_cap).sqrt() / p.omega1
}

/// Build a grid covering [−a/2 − padding, a/2 + padding] in x. The y
/// half-width is chosen so the wall potential at least matches the x walls
/// and exceeds `energy_cap`. If a node would land on the conical
/// intersection, the whole y grid is shifted by `offset_sign`·hy/2.
pub fn make_grid_with(
    p: &ModelParams,
    nx: usize,
    ny: usize,
    padding: f64,
    energy_cap: f64,
    offset_sign: f64,
) -> Result<GridSpec> {
    if nx < 32 || ny < 32 {
        return Err(CisimError::InvalidGrid(format!(
            "grid must be at least 32x32, got {nx}x{ny}"
        )));
    }
    if !(padding > 0.0) || !padding.is_finite() {
        return Err(CisimError::InvalidGrid(format!(
            "padding must be positive, got {padding}"
        )));
    }
    let lx = 0.5 * p.a + padding;
    let ly = (lx * p.omega1 / p.omega2).max((2.0 * energy_cap).sqrt() / p.omega2);
    let hx = 2.0 * lx / (nx - 1) as f64;
    let hy = 2.0 * ly / (ny - 1) as f64;
    let mut grid = GridSpec {
        nx,
        ny,
        x_min: -lx,
        x_max: lx,
        y_min: -ly,
        y_max: ly,
        hx,
        hy,
        ci_offset_applied: false,
    };
    let b = p.ci_x();
    let x_hit = (0..nx).any(|i| (grid.x(i) - b).abs() < 1e-8 * hx);
    let y_hit = (0..ny).any(|j| grid.y(j).abs() < 1e-8 * hy);
    if x_hit && y_hit {
        let shift = offset_sign.signum() * 0.5 * hy;
        grid.y_min += shift;
        grid.y_max += shift;
        grid.ci_offset_applied = true;
    }
    Ok(grid)
}

/// [`make_grid_with`] using the default energy cap (20 ħω₁) and +hy/2 offset.
pub fn make_grid(p: &ModelParams, nx: usize, ny: usize, padding: f64) -> Result<GridSpec> {
    make_grid_with(p, nx, ny, padding, DEFAULT_ENERGY_CAP, 1.0)
}

/// Wall energy cap used for default grids, in units of ħω₁.
pub const DEFAULT_ENERGY_CAP: f64 = 20.0;

/// Single-component complex field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    values: Vec<C64>,
}

/// Two-component (diabatic spinor) complex field; components stored
/// back to back.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: GridSpec,
    values: Vec<C64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); grid.n_nodes()],
            grid,
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(CisimError::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    /// Fill from a function of (x, y).
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> C64) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for iy in 0..grid.ny {
            let y = grid.y(iy);
            for ix in 0..grid.nx {
                values.push(f(grid.x(ix), y));
            }
        }
        Self { grid, values }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> C64 {
        self.values[iy * self.grid.nx + ix]
    }
}

impl SpinorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); 2 * grid.n_nodes()],
            grid,
        }
    }

    /// Spinor (f, 0) from a scalar field on the same grid.
    pub fn from_upper(f: &ScalarField) -> Self {
        let n = f.grid.n_nodes();
        let mut values = vec![C64::new(0.0, 0.0); 2 * n];
        values[..n].copy_from_slice(f.values());
        Self {
            grid: f.grid,
            values,
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn component(&self, k: usize) -> &[C64] {
        let n = self.grid.n_nodes();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn component_field(&self, k: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.component(k).to_vec(),
        }
    }
}

/// A field of either kind; what a [`crate::operators::Hamiltonian`] acts on.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(ScalarField),
    Spinor(SpinorField),
}

impl Field {
    pub fn grid(&self) -> &GridSpec {
        match self {
            Field::Scalar(f) => &f.grid,
            Field::Spinor(f) => &f.grid,
        }
    }

    pub fn n_components(&self) -> usize {
        match self {
            Field::Scalar(_) => 1,
            Field::Spinor(_) => 2,
        }
    }

    pub fn values(&self) -> &[C64] {
        match self {
            Field::Scalar(f) => f.values(),
            Field::Spinor(f) => f.values(),
        }
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        match self {
            Field::Scalar(f) => f.values_mut(),
            Field::Spinor(f) => f.values_mut(),
        }
    }

    pub fn zeros_like(&self) -> Field {
        match self {
            Field::Scalar(f) => Field::Scalar(ScalarField::zeros(f.grid)),
            Field::Spinor(f) => Field::Spinor(SpinorField::zeros(f.grid)),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        inner(self, self).expect("same field").re
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            let inv = 1.0 / n;
            for v in self.values_mut() {
                *v *= inv;
            }
        }
    }

    /// self += alpha · other
    pub fn axpy(&mut self, alpha: C64, other: &Field) {
        debug_assert_eq!(self.values().len(), other.values().len());
        for (a, b) in self.values_mut().iter_mut().zip(other.values()) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: C64) {
        for v in self.values_mut() {
            *v *= alpha;
        }
    }
}

/// Grid inner product ⟨f|g⟩ = Σ conj(f)·g·hx·hy.
///
/// Compensated summation in a fixed traversal order: results are
/// reproducible and accurate to a few ULP of the true sum.
pub fn inner(f: &Field, g: &Field) -> Result<C64> {
    if f.grid() != g.grid() || f.n_components() != g.n_components() {
        return Err(CisimError::GridMismatch);
    }
    Ok(inner_slices(f.values(), g.values(), f.grid().weight()))
}

pub(crate) fn inner_slices(f: &[C64], g: &[C64], weight: f64) -> C64 {
    debug_assert_eq!(f.len(), g.len());
    let mut acc = KahanSumC::default();
    for (a, b) in f.iter().zip(g) {
        acc.add(a.conj() * b);
    }
    acc.value() * weight
}

pub(crate) fn norm_sq_slice(f: &[C64], weight: f64) -> f64 {
    let mut acc = crate::linalg::KahanSum::default();
    for a in f {
        acc.add(a.norm_sqr());
    }
    acc.value() * weight
}

/// dst += coeff · ∇² src on one component (Dirichlet walls).
pub(crate) fn add_laplacian(
    g: &GridSpec,
    order: StencilOrder,
    src: &[C64],
    dst: &mut [C64],
    coeff: f64,
) {
    let (nx, ny) = (g.nx, g.ny);
    match order {
        StencilOrder::Second => {
            let cx = coeff / (g.hx * g.hx);
            let cy = coeff / (g.hy * g.hy);
            for iy in 0..ny {
                let r = iy * nx;
                for ix in 0..nx {
                    let c = r + ix;
                    let mut s = -2.0 * (cx + cy) * src[c];
                    if ix >= 1 {
                        s += cx * src[c - 1];
                    }
                    if ix + 1 < nx {
                        s += cx * src[c + 1];
                    }
                    if iy >= 1 {
                        s += cy * src[c - nx];
                    }
                    if iy + 1 < ny {
                        s += cy * src[c + nx];
                    }
                    dst[c] += s;
                }
            }
        }
        StencilOrder::Fourth => {
            let cx = coeff / (12.0 * g.hx * g.hx);
            let cy = coeff / (12.0 * g.hy * g.hy);
            for iy in 0..ny {
                let r = iy * nx;
                for ix in 0..nx {
                    let c = r + ix;
                    let mut s = -30.0 * (cx + cy) * src[c];
                    if ix >= 1 {
                        s += 16.0 * cx * src[c - 1];
                    }
                    if ix >= 2 {
                        s -= cx * src[c - 2];
                    }
                    if ix + 1 < nx {
                        s += 16.0 * cx * src[c + 1];
                    }
                    if ix + 2 < nx {
                        s -= cx * src[c + 2];
                    }
                    if iy >= 1 {
                        s += 16.0 * cy * src[c - nx];
                    }
                    if iy >= 2 {
                        s -= cy * src[c - 2 * nx];
                    }
                    if iy + 1 < ny {
                        s += 16.0 * cy * src[c + nx];
                    }
                    if iy + 2 < ny {
                        s -= cy * src[c + 2 * nx];
                    }
                    dst[c] += s;
                }
            }
        }
    }
}

/// dst += factor · ∂src/∂x (central antisymmetric stencil, Dirichlet).
pub(crate) fn add_dx(
    g: &GridSpec,
    order: StencilOrder,
    src: &[C64],
    dst: &mut [C64],
    factor: C64,
) {
    let (nx, ny) = (g.nx, g.ny);
    match order {
        StencilOrder::Second => {
            let c1 = factor / (2.0 * g.hx);
            for iy in 0..ny {
                let r = iy * nx;
                for ix in 0..nx {
                    let c = r + ix;
                    let mut s = C64::new(0.0, 0.0);
                    if ix + 1 < nx {
                        s += src[c + 1];
                    }
                    if ix >= 1 {
                        s -= src[c - 1];
                    }
                    dst[c] += c1 * s;
                }
            }
        }
        StencilOrder::Fourth => {
            let cf = factor / (12.0 * g.hx);
            for iy in 0..ny {
                let r = iy * nx;
                for ix in 0..nx {
                    let c = r + ix;
                    let mut s = C64::new(0.0, 0.0);
                    if ix + 1 < nx {
                        s += 8.0 * src[c + 1];
                    }
                    if ix + 2 < nx {
                        s -= src[c + 2];
                    }
                    if ix >= 1 {
                        s -= 8.0 * src[c - 1];
                    }
                    if ix >= 2 {
                        s += src[c - 2];
                    }
                    dst[c] += cf * s;
                }
            }
        }
    }
}

/// dst += factor · ∂src/∂y (central antisymmetric stencil, Dirichlet).
pub(crate) fn add_dy(
    g: &GridSpec,
    order: StencilOrder,
    src: &[C64],
    dst: &mut [C64],
    factor: C64,
) {
    let (nx, ny) = (g.nx, g.ny);
    match order {
        StencilOrder::Second => {
            let c1 = factor / (2.0 * g.hy);
            for iy in 0..ny {
                let r = iy * nx;
                for ix in 0..nx {
                    let c = r + ix;
                    let mut s = C64::new(0.0, 0.0);
                    if iy + 1 < ny {
                        s += src[c + nx];
                    }
                    if iy >= 1 {
                        s -= src[c - nx];
                    }
                    dst[c] += c1 * s;
                }
            }
        }
        StencilOrder::Fourth => {
            let cf = factor / (12.0 * g.hy);
            for iy in 0..ny {
                let r = iy * nx;
                for ix in 0..nx {
                    let c = r + ix;
                    let mut s = C64::new(0.0, 0.0);
                    if iy + 1 < ny {
                        s += 8.0 * src[c + nx];
                    }
                    if iy + 2 < ny {
                        s -= src[c + 2 * nx];
                    }
                    if iy >= 1 {
                        s -= 8.0 * src[c - nx];
                    }
                    if iy >= 2 {
                        s += src[c - 2 * nx];
                    }
                    dst[c] += cf * s;
                }
            }
        }
    }
}

/// Laplacian of a scalar field as a fresh field.
pub fn laplacian_apply(f: &ScalarField, order: StencilOrder) -> ScalarField {
    let mut out = ScalarField::zeros(f.grid);
    add_laplacian(&f.grid, order, f.values(), out.values_mut(), 1.0);
    out
}

/// Reflect one component under y → −y. Rows whose mirror falls off the grid
/// (possible when the CI offset is active) are set to zero, matching the
/// Dirichlet convention.
pub(crate) fn reflect_y_component(g: &GridSpec, src: &[C64], dst: &mut [C64]) {
    let nx = g.nx;
    for iy in 0..g.ny {
        match g.mirror_row(iy) {
            Some(jm) => {
                dst[iy * nx..(iy + 1) * nx].copy_from_slice(&src[jm * nx..(jm + 1) * nx]);
            }
            None => {
                dst[iy * nx..(iy + 1) * nx].fill(C64::new(0.0, 0.0));
            }
        }
    }
}

/// Normalized field with seeded uniform random entries; used for solver
/// starts and Hermiticity probes.
pub fn random_field(grid: GridSpec, components: usize, rng: &mut impl Rng) -> Field {
    let n = grid.n_nodes() * components;
    let values: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let mut f = match components {
        1 => Field::Scalar(ScalarField { grid, values }),
        2 => Field::Spinor(SpinorField { grid, values }),
        _ => panic!("fields have 1 or 2 components"),
    };
    f.normalize();
    f
}

/// Dump a field as CSV for debugging: a commented header documents the grid,
/// then one row per node (x fastest), real and imaginary parts per component.
pub fn write_field_csv<W: Write>(w: &mut W, f: &Field) -> std::io::Result<()> {
    let g = f.grid();
    writeln!(w, "# nx={} ny={}", g.nx, g.ny)?;
    writeln!(
        w,
        "# x_min={:.17e} x_max={:.17e} y_min={:.17e} y_max={:.17e}",
        g.x_min, g.x_max, g.y_min, g.y_max
    )?;
    writeln!(
        w,
        "# hx={:.17e} hy={:.17e} ci_offset_applied={}",
        g.hx, g.hy, g.ci_offset_applied
    )?;
    writeln!(w, "# layout=node-major, x fastest; components={}", f.n_components())?;
    match f.n_components() {
        1 => writeln!(w, "ix,iy,x,y,re,im")?,
        _ => writeln!(w, "ix,iy,x,y,re1,im1,re2,im2")?,
    }
    let n = g.n_nodes();
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let c = iy * g.nx + ix;
            let v = f.values();
            match f.n_components() {
                1 => writeln!(
                    w,
                    "{},{},{:.17e},{:.17e},{:.17e},{:.17e}",
                    ix,
                    iy,
                    g.x(ix),
                    g.y(iy),
                    v[c].re,
                    v[c].im
                )?,
                _ => writeln!(
                    w,
                    "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    ix,
                    iy,
                    g.x(ix),
                    g.y(iy),
                    v[c].re,
                    v[c].im,
                    v[n + c].re,
                    v[n + c].im
                )?,
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{v11, v22};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn iso(delta: f64, gamma: f64) -> ModelParams {
        ModelParams::from_gamma(1.0, 1.0, 4.0, delta, gamma).unwrap()
    }

    #[test]
    fn default_box_matches_energy_cap() {
        let p = iso(0.0, 0.1);
        let pad = padding_for_cap(&p, DEFAULT_ENERGY_CAP);
        let g = make_grid(&p, 129, 129, pad).unwrap();
        assert_relative_eq!(g.x_max, 2.0 + (40.0f64).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(g.x_max, 8.3246, epsilon = 1e-3);
        assert_relative_eq!(g.y_max - g.y_min, g.x_max - g.x_min, epsilon = 1e-9);
        // Wall potential exceeds the cap on the diabatic envelope.
        let vwall = v11(&p, g.x_min, 0.0).min(v22(&p, g.x_max, 0.0));
        assert!(vwall >= DEFAULT_ENERGY_CAP);
    }

    #[test]
    fn ci_offset_rules() {
        let p = iso(0.0, 0.1);
        // Odd counts with a symmetric box put a node at (0, 0) = CI.
        let g = make_grid(&p, 65, 65, 2.0).unwrap();
        assert!(g.ci_offset_applied);
        assert!((0..g.ny).all(|j| g.y(j).abs() > 0.4 * g.hy));
        // Even ny: no node on the y = 0 line, no offset needed.
        let g = make_grid(&p, 65, 64, 2.0).unwrap();
        assert!(!g.ci_offset_applied);
        // CI abscissa off the x grid: no offset.
        let p2 = iso(0.3337, 0.1);
        let g = make_grid(&p2, 65, 65, 2.0).unwrap();
        assert!(!g.ci_offset_applied);
    }

    #[test]
    fn refinement_halves_spacing() {
        let p = iso(0.0, 0.1);
        let g1 = make_grid(&p, 129, 129, 3.0).unwrap();
        let g2 = make_grid(&p, 257, 257, 3.0).unwrap();
        assert_relative_eq!(g2.hx, 0.5 * g1.hx, epsilon = 1e-14);
        assert_relative_eq!(g2.hy, 0.5 * g1.hy, epsilon = 1e-14);
    }

    #[test]
    fn grid_too_small_rejected() {
        let p = iso(0.0, 0.1);
        assert!(make_grid(&p, 16, 129, 3.0).is_err());
        assert!(make_grid(&p, 129, 129, -1.0).is_err());
    }

    #[test]
    fn inner_product_basics() {
        let p = iso(0.0, 0.1);
        let g = make_grid(&p, 48, 48, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_field(g, 1, &mut rng);
        let h = random_field(g, 1, &mut rng);
        let ff = inner(&f, &f).unwrap();
        assert!(ff.re > 0.0);
        assert_relative_eq!(ff.im, 0.0, epsilon = 1e-15);
        let fg = inner(&f, &h).unwrap();
        let gf = inner(&h, &f).unwrap();
        assert_relative_eq!(fg.re, gf.re, epsilon = 1e-13);
        assert_relative_eq!(fg.im, -gf.im, epsilon = 1e-13);
    }

    #[test]
    fn gaussian_ground_state_normalized() {
        // Analytic 2D oscillator ground state integrates to 1 on an adequate box.
        let p = iso(0.0, 0.1);
        let g = make_grid(&p, 97, 97, padding_for_cap(&p, 20.0)).unwrap();
        let f = ScalarField::from_fn(g, |x, y| {
            C64::new(
                (1.0 / std::f64::consts::PI).sqrt()
                    * (-0.5 * ((x + 2.0) * (x + 2.0) + y * y)).exp(),
                0.0,
            )
        });
        let f = Field::Scalar(f);
        assert_relative_eq!(f.norm_sq(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn laplacian_of_gaussian_matches_analytic() {
        let p = iso(0.0, 0.1);
        for (order, expected_rate) in [(StencilOrder::Second, 4.0), (StencilOrder::Fourth, 16.0)] {
            let mut errs = Vec::new();
            for n in [65usize, 129] {
                let g = make_grid(&p, n, n, padding_for_cap(&p, 20.0)).unwrap();
                let f = ScalarField::from_fn(g, |x, y| {
                    C64::new((-0.5 * (x * x + y * y)).exp(), 0.0)
                });
                let lap = laplacian_apply(&f, order);
                // ∇² e^{−r²/2} = (r² − 2) e^{−r²/2}
                let mut max_err: f64 = 0.0;
                for iy in 0..g.ny {
                    for ix in 0..g.nx {
                        let (x, y) = (g.x(ix), g.y(iy));
                        let r2 = x * x + y * y;
                        if r2 > 16.0 {
                            continue; // skip wall region where Dirichlet bites
                        }
                        let want = (r2 - 2.0) * (-0.5 * r2).exp();
                        max_err = max_err.max((lap.at(ix, iy).re - want).abs());
                    }
                }
                errs.push(max_err);
            }
            let rate = errs[0] / errs[1];
            assert!(
                rate > 0.5 * expected_rate,
                "order {order:?}: error ratio {rate} below expected {expected_rate}"
            );
        }
    }

    #[test]
    fn laplacian_zero_field() {
        let p = iso(0.0, 0.1);
        let g = make_grid(&p, 48, 48, 3.0).unwrap();
        let f = ScalarField::zeros(g);
        let lap = laplacian_apply(&f, StencilOrder::Fourth);
        assert!(lap.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn stencils_are_exactly_symmetric() {
        let p = iso(0.0, 0.1);
        let g = make_grid(&p, 40, 44, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_field(g, 1, &mut rng);
        let h = random_field(g, 1, &mut rng);
        // Laplacian: symmetric.
        let lf = Field::Scalar(laplacian_apply(
            match &f {
                Field::Scalar(s) => s,
                _ => unreachable!(),
            },
            StencilOrder::Fourth,
        ));
        let lh = Field::Scalar(laplacian_apply(
            match &h {
                Field::Scalar(s) => s,
                _ => unreachable!(),
            },
            StencilOrder::Fourth,
        ));
        let a = inner(&h, &lf).unwrap();
        let b = inner(&lh, &f).unwrap();
        assert!((a - b).norm() < 1e-12);
        // First derivatives: antisymmetric.
        let mut df = f.zeros_like();
        add_dx(&g, StencilOrder::Fourth, f.values(), df.values_mut(), C64::new(1.0, 0.0));
        let mut dh = h.zeros_like();
        add_dx(&g, StencilOrder::Fourth, h.values(), dh.values_mut(), C64::new(1.0, 0.0));
        let a = inner(&h, &df).unwrap();
        let b = inner(&dh, &f).unwrap();
        assert!((a + b).norm() < 1e-12);
        let mut df = f.zeros_like();
        add_dy(&g, StencilOrder::Fourth, f.values(), df.values_mut(), C64::new(1.0, 0.0));
        let mut dh = h.zeros_like();
        add_dy(&g, StencilOrder::Fourth, h.values(), dh.values_mut(), C64::new(1.0, 0.0));
        let a = inner(&h, &df).unwrap();
        let b = inner(&dh, &f).unwrap();
        assert!((a + b).norm() < 1e-12);
    }

    #[test]
    fn reflection_is_involution_without_offset() {
        let p = iso(0.5, 0.1); // CI off-grid: symmetric y nodes
        let g = make_grid(&p, 48, 49, 3.0).unwrap();
        assert!(!g.ci_offset_applied);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_field(g, 1, &mut rng);
        let mut once = vec![C64::new(0.0, 0.0); g.n_nodes()];
        reflect_y_component(&g, f.values(), &mut once);
        let mut twice = vec![C64::new(0.0, 0.0); g.n_nodes()];
        reflect_y_component(&g, &once, &mut twice);
        assert_eq!(f.values(), &twice[..]);
    }

    #[test]
    fn csv_dump_roundtrips_header() {
        let p = iso(0.0, 0.1);
        let g = make_grid(&p, 33, 33, 2.0).unwrap();
        let f = Field::Scalar(ScalarField::from_fn(g, |x, y| C64::new(x, y)));
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# nx=33 ny=33"));
        assert!(text.contains("ix,iy,x,y,re,im"));
        assert_eq!(text.lines().count(), 5 + 33 * 33);
    }
}
