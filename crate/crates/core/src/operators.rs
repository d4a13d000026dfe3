//! The five model Hamiltonians as matrix-free Hermitian operators.
//!
//! All share the finite-difference kinetic energy −½∇² with Dirichlet walls.
//!
//! - `Bo`:   −½∇² + W₋ on one component.
//! - `Gp`:   ½(−i∇ + A)² + W₋ with A = ∇θ, expanded as
//!           −½∇² − (i/2)(A·∇ + ∇·A·) + ½|A|² + W₋.
//!           The symmetrized cross term keeps the discrete operator exactly
//!           Hermitian even though ∇·A = 0 only holds in the continuum.
//! - `Full`: componentwise kinetic energy plus the 2×2 diabatic potential
//!           matrix (V11, V22 on the diagonal, V12 coupling).
//! - `Donor`/`Acceptor`: single diabatic surface V11 / V22.
//!
//! Potential and vector-potential tables are evaluated once at build time at
//! the true node positions; the CI-avoiding grid offset bounds |A| on nodes.

use crate::error::CisimError;
use crate::grid::{
    add_dx, add_dy, add_laplacian, inner, inner_slices, Field, GridSpec, StencilOrder,
};
use crate::model::{grad_theta, theta, v11, v12, v22, w_adiabatic, ModelParams};
use crate::Result;
use num_complex::Complex64 as C64;

/// Which model Hamiltonian an operator realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    Bo,
    Gp,
    Full,
    Donor,
    Acceptor,
}

impl HamiltonianKind {
    pub fn n_components(&self) -> usize {
        match self {
            HamiltonianKind::Full => 2,
            _ => 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            HamiltonianKind::Bo => "bo",
            HamiltonianKind::Gp => "gp",
            HamiltonianKind::Full => "full",
            HamiltonianKind::Donor => "donor",
            HamiltonianKind::Acceptor => "acceptor",
        }
    }
}

#[derive(Debug, Clone)]
enum Tables {
    /// Single-surface potential (BO: W₋; DONOR: V11; ACCEPTOR: V22).
    Scalar { pot: Vec<f64> },
    /// W₋ + ½|A|² plus the vector-potential components.
    Gp {
        pot: Vec<f64>,
        ax: Vec<f64>,
        ay: Vec<f64>,
    },
    /// Diabatic potential matrix.
    Full {
        pot1: Vec<f64>,
        pot2: Vec<f64>,
        coup: Vec<f64>,
    },
}

/// A matrix-free Hermitian Hamiltonian on a grid. Immutable after build;
/// `apply` is reentrant.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub kind: HamiltonianKind,
    pub params: ModelParams,
    pub grid: GridSpec,
    pub order: StencilOrder,
    /// Constant gauge offset added to the mixing angle wherever θ itself is
    /// used (initial-state dressing). The vector potential A = ∇θ does not
    /// depend on it.
    pub theta_offset: f64,
    tables: Tables,
}

impl Hamiltonian {
    pub fn build(
        kind: HamiltonianKind,
        params: ModelParams,
        grid: GridSpec,
        order: StencilOrder,
    ) -> Result<Self> {
        Self::build_with_gauge(kind, params, grid, order, 0.0)
    }

    pub fn build_with_gauge(
        kind: HamiltonianKind,
        params: ModelParams,
        grid: GridSpec,
        order: StencilOrder,
        theta_offset: f64,
    ) -> Result<Self> {
        let n = grid.n_nodes();
        let per_node = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
            let mut t = Vec::with_capacity(n);
            for iy in 0..grid.ny {
                let y = grid.y(iy);
                for ix in 0..grid.nx {
                    t.push(f(grid.x(ix), y));
                }
            }
            t
        };
        let tables = match kind {
            HamiltonianKind::Bo => Tables::Scalar {
                pot: per_node(&|x, y| w_adiabatic(&params, x, y).0),
            },
            HamiltonianKind::Donor => Tables::Scalar {
                pot: per_node(&|x, y| v11(&params, x, y)),
            },
            HamiltonianKind::Acceptor => Tables::Scalar {
                pot: per_node(&|x, y| v22(&params, x, y)),
            },
            HamiltonianKind::Full => Tables::Full {
                pot1: per_node(&|x, y| v11(&params, x, y)),
                pot2: per_node(&|x, y| v22(&params, x, y)),
                coup: per_node(&|x, y| v12(&params, x, y)),
            },
            HamiltonianKind::Gp => {
                let b = params.ci_x();
                for iy in 0..grid.ny {
                    for ix in 0..grid.nx {
                        if (grid.x(ix) - b).abs() < 1e-8 * grid.hx
                            && grid.y(iy).abs() < 1e-8 * grid.hy
                        {
                            return Err(CisimError::CiOnGrid {
                                x: grid.x(ix),
                                y: grid.y(iy),
                            });
                        }
                    }
                }
                let mut pot = Vec::with_capacity(n);
                let mut ax = Vec::with_capacity(n);
                let mut ay = Vec::with_capacity(n);
                for iy in 0..grid.ny {
                    let y = grid.y(iy);
                    for ix in 0..grid.nx {
                        let x = grid.x(ix);
                        let (gx, gy) = grad_theta(&params, x, y)?;
                        ax.push(gx);
                        ay.push(gy);
                        pot.push(w_adiabatic(&params, x, y).0 + 0.5 * (gx * gx + gy * gy));
                    }
                }
                Tables::Gp { pot, ax, ay }
            }
        };
        Ok(Self {
            kind,
            params,
            grid,
            order,
            theta_offset,
            tables,
        })
    }

    /// Flat dimension of the fields this operator acts on.
    pub fn dim(&self) -> usize {
        self.kind.n_components() * self.grid.n_nodes()
    }

    /// Crude upper bound on ‖H‖ from Gershgorin row sums; used to scale
    /// solver tolerances.
    pub fn norm_upper_bound(&self) -> f64 {
        let g = &self.grid;
        let ck = match self.order {
            StencilOrder::Second => 4.0,
            StencilOrder::Fourth => 16.0 / 3.0,
        };
        let kinetic = 0.5 * ck * (1.0 / (g.hx * g.hx) + 1.0 / (g.hy * g.hy));
        let cd = match self.order {
            StencilOrder::Second => 1.0,
            StencilOrder::Fourth => 1.5,
        };
        let pot_bound = match &self.tables {
            Tables::Scalar { pot } => pot.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Tables::Gp { pot, ax, ay } => {
                let p = pot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let axm = ax.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let aym = ay.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                p + cd * (axm / g.hx + aym / g.hy)
            }
            Tables::Full { pot1, pot2, coup } => {
                let p1 = pot1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let p2 = pot2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let c = coup.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                p1.max(p2) + c
            }
        };
        kinetic + pot_bound
    }

    /// Apply to a flat state vector (length [`Self::dim`]); `dst` is
    /// overwritten.
    pub fn apply_slice(&self, src: &[C64], dst: &mut [C64]) {
        assert_eq!(src.len(), self.dim());
        assert_eq!(dst.len(), self.dim());
        let g = &self.grid;
        let n = g.n_nodes();
        dst.fill(C64::new(0.0, 0.0));
        match &self.tables {
            Tables::Scalar { pot } => {
                add_laplacian(g, self.order, src, dst, -0.5);
                for i in 0..n {
                    dst[i] += pot[i] * src[i];
                }
            }
            Tables::Gp { pot, ax, ay } => {
                add_laplacian(g, self.order, src, dst, -0.5);
                let mihalf = C64::new(0.0, -0.5);
                // −(i/2) A·∇f
                let mut tmp = vec![C64::new(0.0, 0.0); n];
                add_dx(g, self.order, src, &mut tmp, C64::new(1.0, 0.0));
                for i in 0..n {
                    dst[i] += mihalf * ax[i] * tmp[i];
                }
                tmp.fill(C64::new(0.0, 0.0));
                add_dy(g, self.order, src, &mut tmp, C64::new(1.0, 0.0));
                for i in 0..n {
                    dst[i] += mihalf * ay[i] * tmp[i];
                }
                // −(i/2) ∇·(A f)
                for i in 0..n {
                    tmp[i] = ax[i] * src[i];
                }
                add_dx(g, self.order, &tmp, dst, mihalf);
                for i in 0..n {
                    tmp[i] = ay[i] * src[i];
                }
                add_dy(g, self.order, &tmp, dst, mihalf);
                // W₋ + ½|A|²
                for i in 0..n {
                    dst[i] += pot[i] * src[i];
                }
            }
            Tables::Full { pot1, pot2, coup } => {
                let (s1, s2) = src.split_at(n);
                let (d1, d2) = dst.split_at_mut(n);
                add_laplacian(g, self.order, s1, d1, -0.5);
                add_laplacian(g, self.order, s2, d2, -0.5);
                for i in 0..n {
                    d1[i] += pot1[i] * s1[i] + coup[i] * s2[i];
                    d2[i] += pot2[i] * s2[i] + coup[i] * s1[i];
                }
            }
        }
    }

    /// Apply to a [`Field`], checking grid and component compatibility.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        if f.grid() != &self.grid || f.n_components() != self.kind.n_components() {
            return Err(CisimError::GridMismatch);
        }
        let mut out = f.zeros_like();
        self.apply_slice(f.values(), out.values_mut());
        Ok(out)
    }

    /// Energy expectation Re⟨f|H|f⟩/⟨f|f⟩. The imaginary part is a
    /// Hermiticity diagnostic and must vanish to 1e-10 of the norm scale.
    pub fn expectation(&self, f: &Field) -> Result<f64> {
        let hf = self.apply(f)?;
        let num = inner(f, &hf)?;
        let den = f.norm_sq();
        let scale = (num.norm() + den * self.norm_upper_bound()).max(f64::MIN_POSITIVE);
        assert!(
            num.im.abs() <= 1e-10 * scale,
            "non-Hermitian expectation: Im = {:e} at scale {:e}",
            num.im,
            scale
        );
        Ok(num.re / den)
    }

    /// Mixing-angle table e^{i(θ + offset)} for initial-state dressing.
    /// Errors at the CI only if a node sits on it (excluded at build).
    pub fn phase_table(&self) -> Result<Vec<C64>> {
        let g = &self.grid;
        let mut t = Vec::with_capacity(g.n_nodes());
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let th = theta(&self.params, g.x(ix), g.y(iy))? + self.theta_offset;
                t.push(C64::new(0.0, th).exp());
            }
        }
        Ok(t)
    }

    /// ⟨f|H|g⟩ on flat slices (no normalization).
    pub(crate) fn matrix_element(&self, f: &[C64], hg: &[C64]) -> C64 {
        inner_slices(f, hg, self.grid.weight())
    }
}
