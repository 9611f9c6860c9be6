//! The magnetic Dirac operator on `L^2(R^2) (x) C^4`, its phase, gradings,
//! regularized inverse powers and the represented algebra.
//!
//! Every operator built here commutes with the label `L = m + s_c`, where
//! `c` is the spinor component and `s = (0, 1, 1, 0)`: the dual momenta move
//! `m` by one while switching between components of the two classes. An
//! operator is therefore stored as one block per `L`-sector. Within a
//! sector the state `(c, n)` has degeneracy index `m = L - s_c`, so the
//! sector truncation is exact in `m` and only the level index `n` is cut.

use nalgebra::{DMatrix, Matrix4};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{level_momentum, CMatrix, MagneticElement, UnitalElement};
use crate::error::{Error, Result};
use crate::laguerre::{MagneticLength, Momentum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `m = L - SECTOR_OFFSET[c]` for spinor component `c`.
pub const SECTOR_OFFSET: [usize; 4] = [0, 1, 1, 0];
/// `D^2 = Q (x) 1 + diag(SQUARE_SHIFT)`.
pub const SQUARE_SHIFT: [f64; 4] = [-1.0, 0.0, 1.0, 0.0];

/// Tolerance for operator identities checked on the interior.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

pub type Spinor = Matrix4<Complex64>;

/// The Hermitian generators of the Clifford algebra used throughout.
pub fn gamma_matrices() -> [Spinor; 4] {
    let (o, z, i) = (ONE, ZERO, I);
    [
        Spinor::new(z, z, z, o, z, z, o, z, z, o, z, z, o, z, z, z),
        Spinor::new(z, z, z, i, z, z, i, z, z, -i, z, z, -i, z, z, z),
        Spinor::new(z, -o, z, z, -o, z, z, z, z, z, z, o, z, z, o, z),
        Spinor::new(z, -i, z, z, i, z, z, z, z, z, z, -i, z, z, i, z),
    ]
}

/// `Gamma = i gamma_1 gamma_2 = diag(1, 1, -1, -1)`.
pub fn grading_gamma() -> Spinor {
    let g = gamma_matrices();
    g[0] * g[1] * I
}

/// `chi = gamma_1 gamma_2 gamma_3 gamma_4 = diag(-1, 1, -1, 1)`.
pub fn grading_chi() -> Spinor {
    let g = gamma_matrices();
    g[0] * g[1] * g[2] * g[3]
}

/// Physical and truncation parameters shared by the spectral computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracContext {
    pub lb: MagneticLength,
    pub eps: f64,
    pub n_max: usize,
    pub m_max: usize,
    pub buffer: usize,
}

impl DiracContext {
    pub fn new(lb: MagneticLength, eps: f64, n_max: usize, m_max: usize, buffer: usize) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("regularization must be positive, got {eps}")));
        }
        if buffer < 2 {
            return Err(Error::InvalidArgument(format!("buffer must be at least 2, got {buffer}")));
        }
        if n_max < 2 || m_max < 1 {
            return Err(Error::InvalidArgument(format!("truncation too small: n_max={n_max}, m_max={m_max}")));
        }
        Ok(Self { lb, eps, n_max, m_max, buffer })
    }

    pub fn space(&self) -> SectorSpace {
        SectorSpace { n_dim: self.n_max + self.buffer, sectors: self.m_max + self.buffer }
    }

    /// States at distance at least `buffer` from the truncation edge.
    pub fn is_interior(&self, c: usize, n: usize, sector: usize) -> bool {
        match self.space().degeneracy(c, sector) {
            Some(m) => n < self.n_max && m < self.m_max,
            None => false,
        }
    }

    /// Shift `e_c` in `|D_eps|^2 = Q + e_c` for component `c`.
    pub fn component_shift(&self, c: usize) -> f64 {
        self.eps + SQUARE_SHIFT[c]
    }
}

/// Index bookkeeping for the sector blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorSpace {
    pub n_dim: usize,
    pub sectors: usize,
}

impl SectorSpace {
    pub fn sector_dim(&self) -> usize {
        4 * self.n_dim
    }

    pub fn index(&self, c: usize, n: usize) -> usize {
        c * self.n_dim + n
    }

    /// `(c, n)` for a sector-local index.
    pub fn state(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_dim, idx % self.n_dim)
    }

    /// Degeneracy index of component `c` in `sector`, if the state exists.
    pub fn degeneracy(&self, c: usize, sector: usize) -> Option<usize> {
        sector.checked_sub(SECTOR_OFFSET[c])
    }

    pub fn is_valid(&self, c: usize, sector: usize) -> bool {
        self.degeneracy(c, sector).is_some()
    }
}

/// Operator stored as one sparse block per `L`-sector.
#[derive(Clone, Debug)]
pub struct QuartetOperator {
    space: SectorSpace,
    blocks: Vec<CsrMatrix<Complex64>>,
    diagonal_in_m: bool,
}

fn csr_scale(a: &CsrMatrix<Complex64>, c: Complex64) -> CsrMatrix<Complex64> {
    let mut out = a.clone();
    out.values_mut().iter_mut().for_each(|v| *v *= c);
    out
}

fn csr_adjoint(a: &CsrMatrix<Complex64>) -> CsrMatrix<Complex64> {
    let mut t = a.transpose();
    t.values_mut().iter_mut().for_each(|v| *v = v.conj());
    t
}

impl QuartetOperator {
    pub fn from_blocks(space: SectorSpace, blocks: Vec<CsrMatrix<Complex64>>) -> Self {
        assert_eq!(blocks.len(), space.sectors);
        let d = space.sector_dim();
        assert!(blocks.iter().all(|b| b.nrows() == d && b.ncols() == d));
        let diagonal_in_m = blocks.par_iter().all(|b| {
            b.triplet_iter().all(|(r, c, v)| {
                *v == ZERO || SECTOR_OFFSET[space.state(r).0] == SECTOR_OFFSET[space.state(c).0]
            })
        });
        Self { space, blocks, diagonal_in_m }
    }

    /// Builds every sector from `(row, col, value)` triples.
    pub fn from_sector_fn<F>(space: SectorSpace, f: F) -> Self
    where
        F: Fn(usize) -> Vec<(usize, usize, Complex64)> + Sync,
    {
        let d = space.sector_dim();
        let blocks = (0..space.sectors)
            .into_par_iter()
            .map(|l| {
                let mut coo = CooMatrix::new(d, d);
                for (r, c, v) in f(l) {
                    if v != ZERO {
                        coo.push(r, c, v);
                    }
                }
                CsrMatrix::from(&coo)
            })
            .collect();
        Self::from_blocks(space, blocks)
    }

    /// Diagonal operator with the value `f(c, n, m)` on every existing state.
    pub fn diagonal<F>(space: SectorSpace, f: F) -> Self
    where
        F: Fn(usize, usize, usize) -> Complex64 + Sync,
    {
        Self::from_sector_fn(space, |l| {
            let mut out = Vec::new();
            for c in 0..4 {
                if let Some(m) = space.degeneracy(c, l) {
                    for n in 0..space.n_dim {
                        let i = space.index(c, n);
                        out.push((i, i, f(c, n, m)));
                    }
                }
            }
            out
        })
    }

    pub fn identity(space: SectorSpace) -> Self {
        Self::diagonal(space, |_, _, _| ONE)
    }

    pub fn zeros(space: SectorSpace) -> Self {
        Self::from_sector_fn(space, |_| Vec::new())
    }

    /// `1 (x) M` on the spinor factor.
    pub fn spinor(space: SectorSpace, m: &Spinor) -> Self {
        Self::from_sector_fn(space, |l| {
            let mut out = Vec::new();
            for r in 0..4 {
                for c in 0..4 {
                    if m[(r, c)] == ZERO {
                        continue;
                    }
                    assert_eq!(SECTOR_OFFSET[r], SECTOR_OFFSET[c], "spinor matrix must preserve the sector label");
                    if !space.is_valid(c, l) {
                        continue;
                    }
                    for n in 0..space.n_dim {
                        out.push((space.index(r, n), space.index(c, n), m[(r, c)]));
                    }
                }
            }
            out
        })
    }

    pub fn space(&self) -> SectorSpace {
        self.space
    }

    pub fn blocks(&self) -> &[CsrMatrix<Complex64>] {
        &self.blocks
    }

    pub fn sector(&self, l: usize) -> &CsrMatrix<Complex64> {
        &self.blocks[l]
    }

    /// True when no entry connects different degeneracy indices.
    pub fn diagonal_in_m(&self) -> bool {
        self.diagonal_in_m
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(|b| b.nnz()).sum()
    }

    /// Matrix element `<(c_row, n_row, m_row)| T |(c_col, n_col, m_col)>`.
    pub fn entry(&self, row: (usize, usize, usize), col: (usize, usize, usize)) -> Complex64 {
        let l = col.2 + SECTOR_OFFSET[col.0];
        if row.2 + SECTOR_OFFSET[row.0] != l || l >= self.space.sectors || row.1 >= self.space.n_dim || col.1 >= self.space.n_dim {
            return ZERO;
        }
        self.blocks[l]
            .get_entry(self.space.index(row.0, row.1), self.space.index(col.0, col.1))
            .map(|e| e.into_value())
            .unwrap_or(ZERO)
    }

    /// Nonzero entries of the `(c_row, c_col)` spinor block as
    /// `((n_row, m_row), (n_col, m_col), value)`.
    pub fn spinor_block(&self, c_row: usize, c_col: usize) -> Vec<((usize, usize), (usize, usize), Complex64)> {
        let s = self.space;
        let mut out = Vec::new();
        for (l, b) in self.blocks.iter().enumerate() {
            for (r, c, v) in b.triplet_iter() {
                let ((cr, nr), (cc, nc)) = (s.state(r), s.state(c));
                if cr == c_row && cc == c_col {
                    out.push(((nr, l - SECTOR_OFFSET[cr]), (nc, l - SECTOR_OFFSET[cc]), *v));
                }
            }
        }
        out
    }

    fn zip(&self, other: &Self, f: impl Fn(&CsrMatrix<Complex64>, &CsrMatrix<Complex64>) -> CsrMatrix<Complex64> + Sync) -> Self {
        assert_eq!(self.space, other.space, "operators live on different truncations");
        let blocks = self.blocks.par_iter().zip(other.blocks.par_iter()).map(|(a, b)| f(a, b)).collect();
        Self::from_blocks(self.space, blocks)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let blocks = self.blocks.par_iter().map(|a| csr_scale(a, c)).collect();
        Self::from_blocks(self.space, blocks)
    }

    pub fn adjoint(&self) -> Self {
        let blocks = self.blocks.par_iter().map(csr_adjoint).collect();
        Self::from_blocks(self.space, blocks)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.zip(other, |a, b| &(a * b) - &(b * a))
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.zip(other, |a, b| &(a * b) + &(b * a))
    }

    /// Largest entry modulus over rows and columns satisfying `keep`.
    pub fn max_abs_where(&self, keep: impl Fn(usize, usize, usize) -> bool + Sync) -> f64 {
        let s = self.space;
        self.blocks
            .par_iter()
            .enumerate()
            .map(|(l, b)| {
                b.triplet_iter()
                    .filter(|(r, c, _)| {
                        let ((cr, nr), (cc, nc)) = (s.state(*r), s.state(*c));
                        keep(cr, nr, l) && keep(cc, nc, l)
                    })
                    .map(|(_, _, v)| v.norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Largest entry modulus between interior states of `ctx`.
    pub fn max_abs_interior(&self, ctx: &DiracContext) -> f64 {
        self.max_abs_where(|c, n, l| ctx.is_interior(c, n, l))
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_where(|_, _, _| true)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn sector_dense(&self, l: usize) -> CMatrix {
        let d = self.space.sector_dim();
        let mut out = CMatrix::zeros(d, d);
        for (r, c, v) in self.blocks[l].triplet_iter() {
            out[(r, c)] = *v;
        }
        out
    }

    /// Trace of one sector block.
    pub fn sector_trace(&self, l: usize) -> Complex64 {
        crate::sum::sum_c64(self.blocks[l].triplet_iter().filter(|(r, c, _)| r == c).map(|(_, _, v)| *v))
    }
}

fn check_interior(what: &str, op: &QuartetOperator, ctx: &DiracContext, scale: f64) -> Result<()> {
    let dev = op.max_abs_interior(ctx);
    let tol = IDENTITY_TOLERANCE * scale.max(1.0);
    if dev > tol {
        return Err(Error::IdentityViolation { what: what.to_string(), deviation: dev, tolerance: tol });
    }
    Ok(())
}

/// `(1/sqrt 2) sum op_i (x) gamma_i` over the selected momenta, with
/// `op = (K1, K2, G1, G2)` paired with `(gamma_1, .., gamma_4)`.
fn clifford_sum(space: SectorSpace, which: &[Momentum]) -> QuartetOperator {
    assert_eq!(
        which.contains(&Momentum::G1),
        which.contains(&Momentum::G2),
        "dual momenta only preserve the sector label together"
    );
    let gammas = gamma_matrices();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    QuartetOperator::from_sector_fn(space, |l| {
        let mut out = Vec::new();
        for &w in which {
            let g = match w {
                Momentum::K1 => &gammas[0],
                Momentum::K2 => &gammas[1],
                Momentum::G1 => &gammas[2],
                Momentum::G2 => &gammas[3],
            };
            for c in 0..4 {
                let Some(m) = space.degeneracy(c, l) else { continue };
                for n in 0..space.n_dim {
                    let col = space.index(c, n);
                    let (up, down) = w.ladder(if w.moves_level() { n } else { m });
                    for r in 0..4 {
                        let gv = g[(r, c)];
                        if gv == ZERO {
                            continue;
                        }
                        for (step, amp) in [(1i64, up), (-1i64, down)] {
                            let (tn, tm) = if w.moves_level() {
                                (n as i64 + step, m as i64)
                            } else {
                                (n as i64, m as i64 + step)
                            };
                            if tn < 0 || tm < 0 || tn as usize >= space.n_dim {
                                continue;
                            }
                            // pieces leaving the sector cancel between G1 and G2
                            if tm as usize + SECTOR_OFFSET[r] != l {
                                continue;
                            }
                            out.push((space.index(r, tn as usize), col, amp * gv * s));
                        }
                    }
                }
            }
        }
        out
    })
}

/// `D = (K1 g1 + K2 g2 + G1 g3 + G2 g4)/sqrt 2`, checked against
/// `D^2 = Q (x) 1 + diag(-1, 0, 1, 0)` on the interior.
pub fn build_dirac(ctx: &DiracContext) -> Result<QuartetOperator> {
    let d = clifford_sum(ctx.space(), &Momentum::ALL);
    let expected = square_of_dirac(ctx);
    check_interior("D^2 = Q + shift", &d.mul(&d).sub(&expected), ctx, 1.0)?;
    Ok(d)
}

/// The harmonic oscillator `Q (x) 1`, eigenvalue `n + m + 1`.
pub fn oscillator(ctx: &DiracContext) -> QuartetOperator {
    QuartetOperator::diagonal(ctx.space(), |_, n, m| Complex64::new((n + m + 1) as f64, 0.0))
}

fn square_of_dirac(ctx: &DiracContext) -> QuartetOperator {
    QuartetOperator::diagonal(ctx.space(), |c, n, m| Complex64::new((n + m + 1) as f64 + SQUARE_SHIFT[c], 0.0))
}

/// `(D_minus, D_plus)`: the parts built from the magnetic and from the dual momenta.
pub fn split_dirac(ctx: &DiracContext) -> Result<(QuartetOperator, QuartetOperator)> {
    let space = ctx.space();
    let dm = clifford_sum(space, &[Momentum::K1, Momentum::K2]);
    let dp = clifford_sum(space, &[Momentum::G1, Momentum::G2]);
    check_interior("{D+, D-} = 0", &dp.anticommutator(&dm), ctx, 1.0)?;
    let g = QuartetOperator::spinor(space, &grading_gamma());
    check_interior("Gamma D- Gamma = -D-", &g.mul(&dm).mul(&g).add(&dm), ctx, 1.0)?;
    check_interior("Gamma D+ Gamma = D+", &g.mul(&dp).mul(&g).sub(&dp), ctx, 1.0)?;
    Ok((dm, dp))
}

/// `|D_eps|^{-s} = (D^2 + eps)^{-s/2}`, diagonal with eigenvalue
/// `(n + m + 1 + e_c)^{-s/2}`, `e_c = eps + (-1, 0, 1, 0)_c`.
pub fn reg_inverse(ctx: &DiracContext, s: f64) -> Result<QuartetOperator> {
    if !(s >= 1.0) {
        return Err(Error::InvalidArgument(format!("inverse power must be at least 1, got {s}")));
    }
    // the lowest eigenvalue of D^2 + eps is eps on the component shifted by -1
    if (1.0 + ctx.component_shift(0)) <= 0.0 {
        return Err(Error::InvalidArgument("regularized square is not positive".into()));
    }
    Ok(QuartetOperator::diagonal(ctx.space(), |c, n, m| {
        Complex64::new(((n + m + 1) as f64 + ctx.component_shift(c)).powf(-s / 2.0), 0.0)
    }))
}

/// `F = D |D_eps|^{-1}`, checked against `F^2 - 1 + eps |D_eps|^{-2} = 0`.
pub fn dirac_phase(ctx: &DiracContext) -> Result<QuartetOperator> {
    let d = build_dirac(ctx)?;
    let f = d.mul(&reg_inverse(ctx, 1.0)?);
    let defect = f
        .mul(&f)
        .sub(&QuartetOperator::identity(ctx.space()))
        .add(&reg_inverse(ctx, 2.0)?.scale(Complex64::new(ctx.eps, 0.0)));
    check_interior("F^2 - 1 + eps |D|^-2 = 0", &defect, ctx, 1.0)?;
    Ok(f)
}

pub fn grading(ctx: &DiracContext) -> QuartetOperator {
    QuartetOperator::spinor(ctx.space(), &grading_gamma())
}

pub fn grading_even(ctx: &DiracContext) -> QuartetOperator {
    QuartetOperator::spinor(ctx.space(), &grading_chi())
}

/// Dual Landau projection onto degeneracy index `m`.
pub fn dual_projection(ctx: &DiracContext, m: usize) -> QuartetOperator {
    QuartetOperator::diagonal(ctx.space(), |_, _, mm| if mm == m { ONE } else { ZERO })
}

fn check_support(a: &MagneticElement, limit: usize, what: &str) -> Result<()> {
    if a.support_bound() > limit {
        return Err(Error::InvalidArgument(format!(
            "{what}: element support {} exceeds the usable truncation {limit}",
            a.support_bound()
        )));
    }
    Ok(())
}

/// `c 1 + pi(A)` with `pi(A) = A (x) 1_4`.
pub fn represent(a: &UnitalElement, ctx: &DiracContext) -> Result<QuartetOperator> {
    check_support(&a.element, ctx.n_max, "represent")?;
    Ok(lift(&fiber_represent(&a.element, ctx.space().n_dim), ctx.space())
        .add(&QuartetOperator::identity(ctx.space()).scale(a.scalar)))
}

/// `[D, pi(A)]`, checked against
/// `nabla_1 A (x) i g2/(sqrt2 lb) - nabla_2 A (x) i g1/(sqrt2 lb)`.
pub fn commutator_with_d(a: &MagneticElement, ctx: &DiracContext) -> Result<QuartetOperator> {
    check_support(a, ctx.n_max.saturating_sub(1), "commutator with D")?;
    let space = ctx.space();
    let comm = build_dirac(ctx)?.commutator(&lift(&fiber_represent(a, space.n_dim), space));
    let expected = lift(&fiber_nabla_form(a, space.n_dim)?, space);
    check_interior("[D, pi(A)] = nabla form", &comm.sub(&expected), ctx, a.norms().l1_norm)?;
    Ok(comm)
}

/// Defect operators of the quasi-even Fredholm module.
#[derive(Clone, Debug)]
pub struct DefectOperators {
    /// `Gamma [F, pi(A)] Gamma + [F, pi(A)]`.
    pub r: QuartetOperator,
    /// `[F^2, pi(A)]`.
    pub fsq_comm: QuartetOperator,
    /// `[{Gamma, F}, pi(A)]`.
    pub gamma_f_anticomm: QuartetOperator,
}

pub fn defect_operators(a: &MagneticElement, ctx: &DiracContext) -> Result<DefectOperators> {
    check_support(a, ctx.n_max.saturating_sub(ctx.buffer).max(1), "defect operators")?;
    let space = ctx.space();
    let f = dirac_phase(ctx)?;
    let pa = lift(&fiber_represent(a, space.n_dim), space);
    let g = grading(ctx);
    let cf = f.commutator(&pa);
    Ok(DefectOperators {
        r: g.mul(&cf).mul(&g).add(&cf),
        fsq_comm: f.mul(&f).commutator(&pa),
        gamma_f_anticomm: g.anticommutator(&f).commutator(&pa),
    })
}

/// Operator independent of the degeneracy index, stored on `C^4 (x) C^d`
/// with index `c * d + n`.
pub type FiberOperator = DMatrix<Complex64>;

fn kron_spinor(m: &Spinor, a: &CMatrix) -> FiberOperator {
    let d = a.nrows();
    let mut out = FiberOperator::zeros(4 * d, 4 * d);
    for r in 0..4 {
        for c in 0..4 {
            if m[(r, c)] != ZERO {
                out.view_mut((r * d, c * d), (d, d)).copy_from(&(a * m[(r, c)]));
            }
        }
    }
    out
}

pub fn fiber_represent(a: &MagneticElement, d: usize) -> FiberOperator {
    kron_spinor(&Spinor::identity(), &a.padded(d))
}

pub fn fiber_spinor(m: &Spinor, d: usize) -> FiberOperator {
    kron_spinor(m, &CMatrix::identity(d, d))
}

/// `[D_minus, pi(A)] = (1/sqrt 2) sum_i [K_i, A] (x) gamma_i`, the part of
/// `[D, pi(A)]` that survives (the dual momenta commute with `pi(A)`).
/// Exact on `d > support(A)` levels.
pub fn fiber_commutator_d(a: &MagneticElement, d: usize) -> FiberOperator {
    let g = gamma_matrices();
    let ad = a.padded(d);
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut out = FiberOperator::zeros(4 * d, 4 * d);
    for (i, w) in [Momentum::K1, Momentum::K2].into_iter().enumerate() {
        let k = level_momentum(w, d);
        out += kron_spinor(&g[i], &((&k * &ad - &ad * &k) * s));
    }
    out
}

/// `nabla_1 A (x) i g2/(sqrt2 lb) - nabla_2 A (x) i g1/(sqrt2 lb)`.
pub fn fiber_nabla_form(a: &MagneticElement, d: usize) -> Result<FiberOperator> {
    let g = gamma_matrices();
    let c = I / (2f64.sqrt() * a.lb().value());
    let n1 = a.spatial_derivative(1)?.padded(d);
    let n2 = a.spatial_derivative(2)?.padded(d);
    Ok(kron_spinor(&(g[1] * c), &n1) - kron_spinor(&(g[0] * c), &n2))
}

/// Places a fiber operator in every sector. Only couplings between
/// components of equal sector offset are allowed.
pub fn lift(op: &FiberOperator, space: SectorSpace) -> QuartetOperator {
    let d = op.nrows() / 4;
    let keep = d.min(space.n_dim);
    QuartetOperator::from_sector_fn(space, |l| {
        let mut out = Vec::new();
        for rc in 0..4 {
            for cc in 0..4 {
                if !(space.is_valid(rc, l) && space.is_valid(cc, l)) {
                    continue;
                }
                for nr in 0..keep {
                    for nc in 0..keep {
                        let v = op[(rc * d + nr, cc * d + nc)];
                        if v != ZERO {
                            assert_eq!(SECTOR_OFFSET[rc], SECTOR_OFFSET[cc], "fiber operator mixes degeneracy indices");
                            out.push((space.index(rc, nr), space.index(cc, nc), v));
                        }
                    }
                }
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_element;

    fn ctx() -> DiracContext {
        DiracContext::new(MagneticLength::new(1.0).unwrap(), 0.5, 6, 12, 3).unwrap()
    }

    #[test]
    fn clifford_relations_and_gradings() {
        let g = gamma_matrices();
        for a in 0..4 {
            assert!((g[a] - g[a].adjoint()).norm() < 1e-15);
            for b in 0..4 {
                let ac = g[a] * g[b] + g[b] * g[a];
                let e = if a == b { Spinor::identity() * Complex64::new(2.0, 0.0) } else { Spinor::zeros() };
                assert!((ac - e).norm() < 1e-15);
            }
        }
        let gam = grading_gamma();
        let chi = grading_chi();
        for c in 0..4 {
            assert_eq!(gam[(c, c)].re, [1.0, 1.0, -1.0, -1.0][c]);
            assert_eq!(chi[(c, c)].re, [-1.0, 1.0, -1.0, 1.0][c]);
        }
        assert!((gam * gam - Spinor::identity()).norm() < 1e-15);
        assert!((chi * chi - Spinor::identity()).norm() < 1e-15);
    }

    #[test]
    fn context_validation() {
        let lb = MagneticLength::new(1.0).unwrap();
        assert!(DiracContext::new(lb, 0.0, 4, 4, 2).is_err());
        assert!(DiracContext::new(lb, 0.5, 4, 4, 1).is_err());
        assert!(DiracContext::new(lb, 0.5, 1, 4, 2).is_err());
    }

    #[test]
    fn dirac_square_and_spectrum() {
        let c = ctx();
        let d = build_dirac(&c).unwrap();
        assert!(d.hermiticity_defect() < 1e-12);
        assert!(d.mul(&d).sub(&square_of_dirac(&c)).max_abs_interior(&c) < 1e-12);
        // exactly one interior zero of D^2, at component 0, n = m = 0
        let mut zeros = 0;
        for l in 0..c.space().sectors {
            for cc in 0..4 {
                for n in 0..c.n_max {
                    if let Some(m) = c.space().degeneracy(cc, l) {
                        if c.is_interior(cc, n, l) && (n + m + 1) as f64 + SQUARE_SHIFT[cc] == 0.0 {
                            zeros += 1;
                            assert_eq!((cc, n, m), (0, 0, 0));
                        }
                    }
                }
            }
        }
        assert_eq!(zeros, 1);
        let q = oscillator(&c);
        assert_eq!(q.entry((2, 3, 4), (2, 3, 4)), Complex64::new(8.0, 0.0));
        assert!(!d.diagonal_in_m());
        assert!(q.diagonal_in_m());
    }

    #[test]
    fn split_parts() {
        let c = ctx();
        let (dm, dp) = split_dirac(&c).unwrap();
        assert!(dm.add(&dp).sub(&build_dirac(&c).unwrap()).max_abs() < 1e-15);
        let chi = grading_even(&c);
        let d = build_dirac(&c).unwrap();
        assert!(chi.anticommutator(&d).max_abs_interior(&c) < 1e-12);
        assert!(dm.diagonal_in_m());
        assert!(!dp.diagonal_in_m());
    }

    #[test]
    fn regularized_inverse_values() {
        let c = ctx();
        let r = reg_inverse(&c, 2.0).unwrap();
        // component shifted by -1 at n = m = 0 gives 1/eps
        assert!((r.entry((0, 0, 0), (0, 0, 0)).re - 1.0 / c.eps).abs() < 1e-14);
        assert!((r.entry((2, 1, 3), (2, 1, 3)).re - 1.0 / (5.0 + c.eps + 1.0)).abs() < 1e-14);
        assert!(r.diagonal_in_m());
        assert!(reg_inverse(&c, 0.5).is_err());
    }

    #[test]
    fn phase_properties() {
        let c = ctx();
        let f = dirac_phase(&c).unwrap();
        assert!(f.hermiticity_defect() < 1e-12);
        for l in [0, 3, c.space().sectors - 1] {
            let ev = f.sector_dense(l).symmetric_eigenvalues();
            assert!(ev.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn represented_elements() {
        let c = ctx();
        let a = random_element(5, 3, 1.0, c.lb).unwrap();
        let pa = represent(&a.clone().into(), &c).unwrap();
        let g = grading(&c);
        assert_eq!(g.commutator(&pa).max_abs(), 0.0);
        let (dm, _) = split_dirac(&c).unwrap();
        let d = build_dirac(&c).unwrap();
        let cd = d.commutator(&pa);
        assert!(cd.sub(&dm.commutator(&pa)).max_abs_interior(&c) < 1e-12);
        assert!(g.mul(&cd).mul(&g).add(&cd).max_abs_interior(&c) < 1e-12);
        assert!(cd.sub(&lift(&fiber_commutator_d(&a, c.space().n_dim), c.space())).max_abs_interior(&c) < 1e-12);
        let big = random_element(5, 7, 1.0, c.lb).unwrap();
        assert!(represent(&big.into(), &c).is_err());
    }

    #[test]
    fn commutator_matches_derivations() {
        let c = DiracContext::new(MagneticLength::new(1.7).unwrap(), 0.5, 6, 8, 2).unwrap();
        for seed in 0..5 {
            let a = random_element(seed, 4, 1.0, c.lb).unwrap();
            commutator_with_d(&a, &c).unwrap();
        }
        let unit = UnitalElement::unit(c.lb);
        let pu = represent(&unit, &c).unwrap();
        assert_eq!(build_dirac(&c).unwrap().commutator(&pu).max_abs_interior(&c), 0.0);
    }

    #[test]
    fn anticommutator_with_grading() {
        // {Gamma, F} = 2 Gamma D+ |D|^-1
        let c = ctx();
        let f = dirac_phase(&c).unwrap();
        let g = grading(&c);
        let (_, dp) = split_dirac(&c).unwrap();
        let rhs = g.mul(&dp).mul(&reg_inverse(&c, 1.0).unwrap()).scale(Complex64::new(2.0, 0.0));
        assert!(g.anticommutator(&f).sub(&rhs).max_abs_interior(&c) < 1e-12);
    }

    #[test]
    fn defects_of_unit_vanish() {
        let c = ctx();
        let z = defect_operators(&MagneticElement::zero(c.lb), &c).unwrap();
        assert_eq!(z.r.max_abs(), 0.0);
        assert_eq!(z.fsq_comm.max_abs(), 0.0);
    }

    #[test]
    fn entries_respect_flag() {
        let c = ctx();
        let q = dual_projection(&c, 2);
        assert!(q.diagonal_in_m());
        assert_eq!(q.entry((1, 0, 2), (1, 0, 2)), ONE);
        assert_eq!(q.entry((1, 0, 3), (1, 0, 3)), ZERO);
        let blk = build_dirac(&c).unwrap().spinor_block(0, 1);
        assert!(blk.iter().all(|((nr, mr), (nc, mc), _)| nr == nc && (*mr as i64 - *mc as i64).abs() == 1));
    }
}
