//! Lowest eigenpairs of the grid Hamiltonians, degeneracy grouping, parity
//! character, and eigenvalue correlation across the bias Δ.
//!
//! The workhorse is a thick-restart band Lanczos iteration with full
//! reorthogonalization on complex vectors. A band of `block` starting vectors
//! (default 2) keeps exactly degenerate pairs converging together instead of
//! waiting for rounding noise to repopulate the second copy. The projected
//! matrix is kept dense and Hermitian; after each restart the kept Ritz
//! vectors couple to new Lanczos vectors only through the orthogonalization
//! coefficients, which reproduces the thick-restart structure exactly.
//!
//! The uncoupled donor/acceptor oscillators separate on the product grid, so
//! [`separable_eigenpairs`] solves the two 1D problems densely and assembles
//! exact product eigenpairs; that path resolves the high multiplicities of
//! oscillator levels that a narrow band iteration cannot see.

use crate::error::CisimError;
use crate::grid::{reflect_y_component, Field, GridSpec, ScalarField, SpinorField, StencilOrder};
use crate::linalg::{hermitian_eigen, symmetric_eigen, tqli, KahanSumC};
use crate::model::{theta, ModelParams};
use crate::operators::{Hamiltonian, HamiltonianKind};
use crate::Result;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Options for [`lowest_eigenpairs`].
#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Number of lowest eigenpairs to converge.
    pub n_pairs: usize,
    /// Residual tolerance relative to the operator norm estimate.
    pub tol: f64,
    /// Seed for the starting vectors.
    pub seed: u64,
    /// Eigenvalue gap below which states belong to one degenerate group,
    /// in units of ω₁.
    pub degeneracy_tol: f64,
    /// Band width of the Lanczos iteration. Must reach the largest
    /// eigenvalue multiplicity that has to be resolved.
    pub block: usize,
    /// Maximum basis size between restarts (0 = automatic).
    pub max_basis: usize,
    /// Restart cycles before giving up.
    pub max_cycles: usize,
}

impl EigenOptions {
    pub fn new(n_pairs: usize) -> Self {
        Self {
            n_pairs,
            tol: 1e-9,
            seed: 42,
            degeneracy_tol: 1e-6,
            block: 2,
            max_basis: 0,
            max_cycles: 600,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_block(mut self, block: usize) -> Self {
        self.block = block;
        self
    }
}

/// Converged eigenpairs in ascending order.
#[derive(Debug, Clone)]
pub struct EigenSolveResult {
    pub eigenvalues: Vec<f64>,
    pub eigenfields: Vec<Field>,
    /// Explicit ‖Hψ − Eψ‖ per pair.
    pub residual_norms: Vec<f64>,
    /// Partition of 0..n into groups of consecutive states separated by
    /// less than the degeneracy tolerance.
    pub degeneracy_groups: Vec<Vec<usize>>,
    /// Operator applications spent (diagnostic).
    pub applies: usize,
    /// Restart cycles spent (diagnostic).
    pub cycles: usize,
}

fn degeneracy_groups(vals: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..vals.len() {
        match groups.last_mut() {
            Some(g) if vals[i] - vals[*g.last().unwrap()] < tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

fn dot(a: &[C64], b: &[C64], weight: f64) -> C64 {
    let mut acc = KahanSumC::default();
    for (x, y) in a.iter().zip(b) {
        acc.add(x.conj() * y);
    }
    acc.value() * weight
}

fn norm(a: &[C64], weight: f64) -> f64 {
    crate::grid::norm_sq_slice(a, weight).sqrt()
}

fn wrap_field(h: &Hamiltonian, values: Vec<C64>) -> Field {
    match h.kind.n_components() {
        1 => Field::Scalar(ScalarField::from_values(h.grid, values).expect("dim")),
        _ => Field::Spinor({
            let mut s = SpinorField::zeros(h.grid);
            s.values_mut().copy_from_slice(&values);
            s
        }),
    }
}

struct BandLanczos<'a> {
    h: &'a Hamiltonian,
    weight: f64,
    basis: Vec<Vec<C64>>,
    /// Projected-matrix columns: t[j][i] = ⟨q_i|H|q_j⟩ for i ≤ basis length
    /// at the time column j was produced.
    t: Vec<Vec<C64>>,
    /// Candidate continuation vectors (the Lanczos band).
    pending: std::collections::VecDeque<Vec<C64>>,
    rng: ChaCha8Rng,
    applies: usize,
}

impl<'a> BandLanczos<'a> {
    fn new(h: &'a Hamiltonian, block: usize, seed: u64) -> Self {
        let mut s = Self {
            h,
            weight: h.grid.weight(),
            basis: Vec::new(),
            t: Vec::new(),
            pending: std::collections::VecDeque::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            applies: 0,
        };
        for _ in 0..block {
            let v = s.fresh_random();
            s.pending.push_back(v);
        }
        s
    }

    fn fresh_random(&mut self) -> Vec<C64> {
        let dim = self.h.dim();
        (0..dim)
            .map(|_| C64::new(self.rng.gen::<f64>() - 0.5, self.rng.gen::<f64>() - 0.5))
            .collect()
    }

    /// Remove basis components from v (two passes), optionally recording the
    /// coefficients; returns the remaining norm.
    fn orthogonalize(&self, v: &mut [C64], coeffs: Option<&mut Vec<C64>>) -> f64 {
        let mut cs = vec![C64::new(0.0, 0.0); self.basis.len()];
        for _pass in 0..2 {
            for (i, q) in self.basis.iter().enumerate() {
                let c = dot(q, v, self.weight);
                for (vk, qk) in v.iter_mut().zip(q) {
                    *vk -= c * qk;
                }
                cs[i] += c;
            }
        }
        if let Some(out) = coeffs {
            *out = cs;
        }
        norm(v, self.weight)
    }

    /// Next orthonormal direction from the band queue, or a fresh random one
    /// if the band has degenerated into the span of the basis.
    fn next_direction(&mut self) -> Option<Vec<C64>> {
        for _attempt in 0..8 {
            let mut v = self.pending.pop_front().unwrap_or_default();
            if v.is_empty() {
                v = self.fresh_random();
            }
            let n = self.orthogonalize(&mut v, None);
            if n > 1e-8 {
                let inv = 1.0 / n;
                for x in v.iter_mut() {
                    *x *= inv;
                }
                return Some(v);
            }
            let r = self.fresh_random();
            self.pending.push_back(r);
        }
        None
    }

    /// Extend the basis by one vector, record the new projected column, and
    /// push the residual to the back of the band queue.
    fn step(&mut self) -> bool {
        let Some(q) = self.next_direction() else {
            return false;
        };
        self.basis.push(q);
        let j = self.basis.len() - 1;
        let mut w = vec![C64::new(0.0, 0.0); self.h.dim()];
        self.h.apply_slice(&self.basis[j], &mut w);
        self.applies += 1;
        let mut col = Vec::new();
        let beta = self.orthogonalize(&mut w, Some(&mut col));
        self.t.push(col);
        if beta > 1e-12 {
            let inv = 1.0 / beta;
            for x in w.iter_mut() {
                *x *= inv;
            }
            self.pending.push_back(w);
        }
        true
    }

    /// Dense Hermitian projected matrix over the current basis.
    fn projected(&self) -> Vec<C64> {
        let m = self.basis.len();
        let mut a = vec![C64::new(0.0, 0.0); m * m];
        for (j, col) in self.t.iter().enumerate() {
            for (i, &z) in col.iter().enumerate().take(m) {
                a[i * m + j] = z;
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let z = if a[i * m + j].norm() >= a[j * m + i].norm() {
                    a[i * m + j]
                } else {
                    a[j * m + i].conj()
                };
                a[i * m + j] = z;
                a[j * m + i] = z.conj();
            }
            a[i * m + i] = C64::new(a[i * m + i].re, 0.0);
        }
        a
    }
}

/// Lowest `opts.n_pairs` eigenpairs of `h` by thick-restart band Lanczos.
/// Deterministic for a fixed seed.
pub fn lowest_eigenpairs(h: &Hamiltonian, opts: &EigenOptions) -> Result<EigenSolveResult> {
    let dim = h.dim();
    let m_want = opts.n_pairs.max(1);
    if m_want * 4 > dim {
        return Err(CisimError::InvalidGrid(format!(
            "{m_want} pairs requested on a dimension-{dim} grid"
        )));
    }
    let block = opts.block.max(1);
    let keep_lo = m_want + (m_want / 2).max(8);
    let keep_hi = 3usize;
    let max_basis = if opts.max_basis > 0 {
        opts.max_basis
    } else {
        (4 * m_want + 28).max(keep_lo + keep_hi + 6 * block)
    }
    .min(dim);
    let tol_abs = opts.tol * h.norm_upper_bound();
    let deg_tol = opts.degeneracy_tol * h.params.omega1;

    let mut lz = BandLanczos::new(h, block, opts.seed);
    let mut best_residuals: Vec<f64> = Vec::new();

    for cycle in 1..=opts.max_cycles {
        while lz.basis.len() < max_basis {
            if !lz.step() {
                break;
            }
        }
        let m = lz.basis.len();
        let (theta_all, u) = hermitian_eigen(lz.projected(), m);

        // Ritz vectors for the kept window: the low end we are after plus a
        // few top states so the extreme outliers do not re-converge from
        // scratch every cycle.
        let n_lo = keep_lo.min(m);
        let n_hi = keep_hi.min(m.saturating_sub(n_lo));
        let mut sel: Vec<usize> = (0..n_lo).collect();
        sel.extend(m - n_hi..m);
        let mut ritz: Vec<Vec<C64>> = Vec::with_capacity(sel.len());
        for &s in &sel {
            let mut y = vec![C64::new(0.0, 0.0); dim];
            for (i, q) in lz.basis.iter().enumerate() {
                let c = u[i * m + s];
                if c.norm_sqr() > 1e-32 {
                    for (yk, qk) in y.iter_mut().zip(q) {
                        *yk += c * qk;
                    }
                }
            }
            ritz.push(y);
        }

        // Explicit residuals for the wanted pairs.
        let mut residuals = Vec::with_capacity(m_want);
        let mut w = vec![C64::new(0.0, 0.0); dim];
        for (k, y) in ritz.iter().enumerate().take(m_want) {
            h.apply_slice(y, &mut w);
            lz.applies += 1;
            for (wi, yi) in w.iter_mut().zip(y) {
                *wi -= C64::new(theta_all[k], 0.0) * yi;
            }
            residuals.push(norm(&w, lz.weight));
        }
        best_residuals = residuals.clone();

        if residuals.len() == m_want && residuals.iter().all(|&r| r < tol_abs) {
            let eigenvalues: Vec<f64> = theta_all[..m_want].to_vec();
            let mut eigenfields = Vec::with_capacity(m_want);
            for y in ritz.into_iter().take(m_want) {
                let mut f = wrap_field(h, y);
                f.normalize();
                eigenfields.push(f);
            }
            return Ok(EigenSolveResult {
                degeneracy_groups: degeneracy_groups(&eigenvalues, deg_tol),
                eigenvalues,
                eigenfields,
                residual_norms: residuals,
                applies: lz.applies,
                cycles: cycle,
            });
        }

        // Thick restart: kept Ritz vectors become the new basis and the
        // projected matrix restarts diagonal; couplings to new vectors are
        // picked up by the orthogonalization coefficients. The band queue
        // is orthogonal to the kept span already; clean it up and reuse it.
        let thetas_sel: Vec<f64> = sel.iter().map(|&s| theta_all[s]).collect();
        lz.basis = ritz;
        lz.t = thetas_sel
            .iter()
            .enumerate()
            .map(|(i, &th)| {
                let mut col = vec![C64::new(0.0, 0.0); i + 1];
                col[i] = C64::new(th, 0.0);
                col
            })
            .collect();
        let mut carried: Vec<Vec<C64>> = lz.pending.drain(..).collect();
        for v in carried.iter_mut() {
            let n = lz.orthogonalize(v, None);
            if n > 1e-8 {
                let inv = 1.0 / n;
                for x in v.iter_mut() {
                    *x *= inv;
                }
            } else {
                v.clear();
            }
        }
        for v in carried {
            if !v.is_empty() {
                lz.pending.push_back(v);
            }
        }
        while lz.pending.len() < block {
            let v = lz.fresh_random();
            lz.pending.push_back(v);
        }
        let _ = cycle;
    }

    Err(CisimError::NotConverged {
        residuals: best_residuals,
        iterations: lz.applies,
    })
}

/// Exact product eigenpairs for the separable DONOR/ACCEPTOR operators: the
/// two 1D factor problems are solved densely with the same stencil the 2D
/// operator uses, and combined. Resolves all oscillator multiplicities.
pub fn separable_eigenpairs(h: &Hamiltonian, m_want: usize) -> Result<EigenSolveResult> {
    if !matches!(h.kind, HamiltonianKind::Donor | HamiltonianKind::Acceptor) {
        return Err(CisimError::InvalidGrid(
            "separable solver only applies to the uncoupled oscillators".into(),
        ));
    }
    let g = h.grid;
    let p = h.params;
    let (x0, e_shift) = match h.kind {
        HamiltonianKind::Donor => (-0.5 * p.a, 0.5 * p.delta),
        _ => (0.5 * p.a, -0.5 * p.delta),
    };
    let pot_x = move |x: f64| 0.5 * p.omega1 * p.omega1 * (x - x0) * (x - x0);
    let pot_y = move |y: f64| 0.5 * p.omega2 * p.omega2 * y * y;

    let solve_1d = |n: usize, hstep: f64, pos: &dyn Fn(usize) -> f64, pot: &dyn Fn(f64) -> f64| {
        let (c0, c1, c2) = match h.order {
            StencilOrder::Second => (-2.0, 1.0, 0.0),
            StencilOrder::Fourth => (-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0),
        };
        let k = -0.5 / (hstep * hstep);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = k * c0 + pot(pos(i));
            if i + 1 < n {
                a[i * n + i + 1] = k * c1;
                a[(i + 1) * n + i] = k * c1;
            }
            if i + 2 < n && c2 != 0.0 {
                a[i * n + i + 2] = k * c2;
                a[(i + 2) * n + i] = k * c2;
            }
        }
        symmetric_eigen(a, n)
    };

    let (ex, vx) = solve_1d(g.nx, g.hx, &|i| g.x(i), &pot_x);
    let (ey, vy) = solve_1d(g.ny, g.hy, &|j| g.y(j), &pot_y);

    let take = m_want.min(g.n_nodes());
    let nkeep = take.min(g.nx);
    let mkeep = take.min(g.ny);
    let mut combos: Vec<(f64, usize, usize)> = Vec::with_capacity(nkeep * mkeep);
    for n in 0..nkeep {
        for m in 0..mkeep {
            combos.push((ex[n] + ey[m], n, m));
        }
    }
    combos.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    combos.truncate(take);

    let mut eigenvalues = Vec::with_capacity(take);
    let mut eigenfields = Vec::with_capacity(take);
    let mut residual_norms = Vec::with_capacity(take);
    let mut w = vec![C64::new(0.0, 0.0); h.dim()];
    for &(e, n, m) in &combos {
        let mut vals = Vec::with_capacity(g.n_nodes());
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                vals.push(C64::new(vx[ix * g.nx + n] * vy[iy * g.ny + m], 0.0));
            }
        }
        let mut f = wrap_field(h, vals);
        f.normalize();
        h.apply_slice(f.values(), &mut w);
        for (wi, yi) in w.iter_mut().zip(f.values()) {
            *wi -= C64::new(e + e_shift, 0.0) * yi;
        }
        residual_norms.push(norm(&w, g.weight()));
        eigenvalues.push(e + e_shift);
        eigenfields.push(f);
    }
    Ok(EigenSolveResult {
        degeneracy_groups: degeneracy_groups(&eigenvalues, 1e-6 * p.omega1),
        eigenvalues,
        eigenfields,
        residual_norms,
        applies: take,
        cycles: 0,
    })
}

/// Estimate the spectral interval of `h` with a plain (no
/// reorthogonalization) Lanczos probe; Ritz extremes are padded by `pad` of
/// the measured span.
pub fn spectral_range(h: &Hamiltonian, seed: u64, steps: usize, pad: f64) -> Result<(f64, f64)> {
    let dim = h.dim();
    let steps = steps.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = h.grid.weight();
    let mut q: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let n0 = norm(&q, weight);
    for x in q.iter_mut() {
        *x *= 1.0 / n0;
    }
    let mut q_prev: Vec<C64> = vec![C64::new(0.0, 0.0); dim];
    let mut alpha: Vec<f64> = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); dim];
    for j in 0..steps {
        h.apply_slice(&q, &mut w);
        let a = dot(&q, &w, weight).re;
        alpha.push(a);
        for i in 0..dim {
            w[i] -= C64::new(a, 0.0) * q[i];
            if j > 0 {
                w[i] -= C64::new(beta[j - 1], 0.0) * q_prev[i];
            }
        }
        let b = norm(&w, weight);
        if b < 1e-12 {
            break;
        }
        beta.push(b);
        std::mem::swap(&mut q_prev, &mut q);
        for i in 0..dim {
            q[i] = w[i] * (1.0 / b);
        }
    }
    if alpha.is_empty() {
        return Err(CisimError::SpectralRangeFail("empty probe".into()));
    }
    let mut d = alpha.clone();
    let mut e = beta[..d.len().saturating_sub(1)].to_vec();
    tqli(&mut d, &mut e, None);
    let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(CisimError::SpectralRangeFail("probe diverged".into()));
    }
    let span = (hi - lo).max(1e-12);
    Ok((lo - pad * span, hi + pad * span))
}

/// Reflection character ⟨f|Σ_y|f⟩ ∈ [−1, 1] labelling the B₁/B₂ pair.
///
/// The reflection is composed with the structure each kind requires:
/// - BO, DONOR, ACCEPTOR: plain y → −y;
/// - FULL: (y → −y) ⊗ σ_z, a symmetry of the diabatic matrix since V12 is
///   odd in y;
/// - GP: e^{−2iθ}·(y → −y), the single-valued image of the reflection in
///   the vector-potential gauge.
pub fn parity_character(h: &Hamiltonian, f: &Field) -> Result<f64> {
    if f.grid() != &h.grid || f.n_components() != h.kind.n_components() {
        return Err(CisimError::GridMismatch);
    }
    let g = &h.grid;
    let n = g.n_nodes();
    let mut out = f.zeros_like();
    match h.kind {
        HamiltonianKind::Full => {
            reflect_y_component(g, &f.values()[..n], &mut out.values_mut()[..n]);
            let (src2, dst2) = (&f.values()[n..].to_vec(), &mut out.values_mut()[n..]);
            reflect_y_component(g, src2, dst2);
            for v in dst2.iter_mut() {
                *v = -*v;
            }
        }
        HamiltonianKind::Gp => {
            reflect_y_component(g, f.values(), out.values_mut());
            for iy in 0..g.ny {
                let y = g.y(iy);
                for ix in 0..g.nx {
                    let th = theta(&h.params, g.x(ix), y)?;
                    out.values_mut()[iy * g.nx + ix] *= C64::new(0.0, -2.0 * th).exp();
                }
            }
        }
        _ => {
            reflect_y_component(g, f.values(), out.values_mut());
        }
    }
    let num = crate::grid::inner(f, &out)?;
    Ok(num.re / f.norm_sq())
}

/// One point of a Δ sweep: the solve plus its parity characters and the
/// assignment of overlap-continued track labels to state indices.
pub struct SweepPoint {
    pub delta: f64,
    pub result: EigenSolveResult,
    pub parities: Vec<f64>,
    /// `tracks[t]` = state index currently carrying track t. Tracks start
    /// at the energy-ordered indices of the first Δ.
    pub tracks: Vec<usize>,
}

/// Sequential solver over a sorted Δ list on one shared grid, matching
/// states across neighbouring Δ by eigenfield overlap (energy order swaps at
/// avoided crossings; overlaps do not).
pub struct DeltaSweep {
    kind: HamiltonianKind,
    base: ModelParams,
    grid: GridSpec,
    order: StencilOrder,
    opts: EigenOptions,
    deltas: std::vec::IntoIter<f64>,
    prev_fields: Vec<Field>,
    prev_tracks: Vec<usize>,
}

impl DeltaSweep {
    pub fn new(
        kind: HamiltonianKind,
        base: ModelParams,
        grid: GridSpec,
        order: StencilOrder,
        opts: EigenOptions,
        deltas: Vec<f64>,
    ) -> Self {
        Self {
            kind,
            base,
            grid,
            order,
            opts,
            deltas: deltas.into_iter(),
            prev_fields: Vec::new(),
            prev_tracks: Vec::new(),
        }
    }

    pub fn next_point(&mut self) -> Result<Option<SweepPoint>> {
        let Some(delta) = self.deltas.next() else {
            return Ok(None);
        };
        let mut p = self.base;
        p.delta = delta;
        let h = Hamiltonian::build(self.kind, p, self.grid, self.order)?;
        let result = lowest_eigenpairs(&h, &self.opts)?;
        let parities: Vec<f64> = result
            .eigenfields
            .iter()
            .map(|f| parity_character(&h, f))
            .collect::<Result<_>>()?;

        let m = result.eigenvalues.len();
        let tracks = if self.prev_fields.is_empty() {
            (0..m).collect::<Vec<_>>()
        } else {
            let mut taken = vec![false; m];
            let mut assign = Vec::with_capacity(self.prev_tracks.len());
            for &prev_idx in &self.prev_tracks {
                let pf = &self.prev_fields[prev_idx];
                let mut best = (usize::MAX, -1.0f64);
                for (j, nf) in result.eigenfields.iter().enumerate() {
                    if taken[j] {
                        continue;
                    }
                    let ov = crate::grid::inner(pf, nf)?.norm();
                    if ov > best.1 {
                        best = (j, ov);
                    }
                }
                taken[best.0] = true;
                assign.push(best.0);
            }
            assign
        };
        self.prev_fields = result.eigenfields.clone();
        self.prev_tracks = tracks.clone();
        Ok(Some(SweepPoint {
            delta,
            result,
            parities,
            tracks,
        }))
    }
}

/// Eigenvalue correlation table over Δ: energies and parities per state,
/// plus overlap-continued track assignments.
pub struct CorrelationDiagram {
    pub deltas: Vec<f64>,
    /// energies[i][k]: k-th lowest energy at deltas[i].
    pub energies: Vec<Vec<f64>>,
    pub parities: Vec<Vec<f64>>,
    /// tracks[i][t]: state index carrying track t at deltas[i].
    pub tracks: Vec<Vec<usize>>,
}

impl CorrelationDiagram {
    /// Energy of track `t` at sweep point `i`.
    pub fn tracked_energy(&self, i: usize, t: usize) -> f64 {
        self.energies[i][self.tracks[i][t]]
    }

    /// Location and size of the minimum gap between the tracked state and
    /// its nearest same-parity-sign neighbour, parabolically refined in Δ.
    pub fn min_same_parity_gap(&self, track: usize) -> Option<(f64, f64)> {
        let gaps: Vec<f64> = (0..self.deltas.len())
            .map(|i| {
                let s = self.tracks[i][track];
                let ps = self.parities[i][s];
                let mut best = f64::INFINITY;
                for k in 0..self.energies[i].len() {
                    if k != s && self.parities[i][k] * ps > 0.0 {
                        best = best.min((self.energies[i][k] - self.energies[i][s]).abs());
                    }
                }
                best
            })
            .collect();
        let imin = gaps
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?
            .0;
        if !gaps[imin].is_finite() {
            return None;
        }
        if imin == 0 || imin + 1 == gaps.len() {
            return Some((self.deltas[imin], gaps[imin]));
        }
        let (x0, x1, x2) = (
            self.deltas[imin - 1],
            self.deltas[imin],
            self.deltas[imin + 1],
        );
        let (y0, y1, y2) = (gaps[imin - 1], gaps[imin], gaps[imin + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        let dx = if denom.abs() > 1e-300 {
            (0.5 * (y0 - y2) / denom * (x1 - x0)).clamp(x0 - x1, x2 - x1)
        } else {
            0.0
        };
        Some((x1 + dx, gaps[imin]))
    }
}

/// Solve over a Δ list and collect the correlation diagram.
pub fn correlation_diagram(
    kind: HamiltonianKind,
    base: ModelParams,
    grid: GridSpec,
    order: StencilOrder,
    opts: &EigenOptions,
    deltas: &[f64],
) -> Result<CorrelationDiagram> {
    let mut sweep = DeltaSweep::new(kind, base, grid, order, opts.clone(), deltas.to_vec());
    let mut out = CorrelationDiagram {
        deltas: Vec::new(),
        energies: Vec::new(),
        parities: Vec::new(),
        tracks: Vec::new(),
    };
    while let Some(pt) = sweep.next_point()? {
        out.deltas.push(pt.delta);
        out.energies.push(pt.result.eigenvalues.clone());
        out.parities.push(pt.parities.clone());
        out.tracks.push(pt.tracks.clone());
    }
    Ok(out)
}
