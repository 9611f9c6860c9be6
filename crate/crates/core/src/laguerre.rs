//! Generalized Laguerre polynomials, the Landau basis functions and a
//! quadrature oracle for matrix elements of the magnetic momenta.
//!
//! Working convention: `BasisIndex { n, m }` labels the state with Landau
//! level `n` (raised by the magnetic momenta `K1`, `K2`) and degeneracy
//! index `m` (raised by the dual momenta `G1`, `G2`). With the literal
//! Laguerre formula `laguerre_formula(p, q, ..)` the Landau level is the
//! *second* label, so `eval_basis_function({n, m}) = laguerre_formula(m, n)`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use gauss_quad::GaussLegendre;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::NeumaierComplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex {
    pub n: usize,
    pub m: usize,
}

impl BasisIndex {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagneticLength(f64);

impl MagneticLength {
    pub fn new(lb: f64) -> Result<Self> {
        if lb.is_finite() && lb > 0.0 {
            Ok(Self(lb))
        } else {
            Err(Error::InvalidArgument(format!("magnetic length must be positive, got {lb}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for MagneticLength {
    fn default() -> Self {
        Self(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    GaussLegendre,
}

/// Tensor-product rule on the square `|x_i| <= radius * lb`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    pub radius: f64,
    pub nodes_per_axis: usize,
    pub rule: QuadratureRule,
}

impl QuadratureScheme {
    pub fn new(radius: f64, nodes_per_axis: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || nodes_per_axis < 8 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs radius > 0 and at least 8 nodes (got {radius}, {nodes_per_axis})"
            )));
        }
        Ok(Self { radius, nodes_per_axis, rule: QuadratureRule::GaussLegendre })
    }

    /// Cutoff radius `sqrt(4 (n_max + m_max) + 25)` in units of the magnetic length.
    pub fn for_truncation(n_max: usize, m_max: usize, nodes_per_axis: usize) -> Result<Self> {
        Self::new((4.0 * (n_max + m_max) as f64 + 25.0).sqrt(), nodes_per_axis)
    }

    pub fn doubled(&self) -> Self {
        Self { nodes_per_axis: 2 * self.nodes_per_axis, ..*self }
    }

    /// Nodes and weights in physical coordinates.
    pub fn grid(&self, lb: MagneticLength) -> Result<Vec<([f64; 2], f64)>> {
        let half = self.radius * lb.value();
        self.grid_on([-half, half], [-half, half])
    }

    /// Nodes and weights on an arbitrary rectangle.
    pub fn grid_on(&self, xr: [f64; 2], yr: [f64; 2]) -> Result<Vec<([f64; 2], f64)>> {
        let rule = match self.rule {
            QuadratureRule::GaussLegendre => GaussLegendre::new(self.nodes_per_axis)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?,
        };
        let pairs = rule.as_node_weight_pairs();
        let (cx, hx) = ((xr[0] + xr[1]) / 2.0, (xr[1] - xr[0]) / 2.0);
        let (cy, hy) = ((yr[0] + yr[1]) / 2.0, (yr[1] - yr[0]) / 2.0);
        let mut out = Vec::with_capacity(pairs.len() * pairs.len());
        for &(u, wu) in pairs {
            for &(v, wv) in pairs {
                out.push(([cx + hx * u, cy + hy * v], wu * wv * hx * hy));
            }
        }
        Ok(out)
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `L_n^(alpha)(zeta)` by the forward three-term recurrence, which avoids
/// the cancellation of the alternating explicit sum at large `zeta`.
fn laguerre_forward(n: usize, alpha: i64, zeta: f64) -> f64 {
    let a = alpha as f64;
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - zeta) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_p^(-k)(zeta) / zeta^k` for `p >= k`, through
/// `L_p^(-k)(z) = (-z)^k (p-k)!/p! L_(p-k)^(k)(z)`.
fn laguerre_reduced(p: usize, k: usize, zeta: f64) -> f64 {
    let ratio: f64 = ((p - k + 1)..=p).map(|i| 1.0 / i as f64).product();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * ratio * laguerre_forward(p - k, k as i64, zeta)
}

/// The generalized Laguerre polynomial `L_n^(alpha)(zeta)`; `alpha` may be
/// negative.
pub fn eval_generalized_laguerre(n: usize, alpha: i64, zeta: f64) -> Result<f64> {
    if !zeta.is_finite() {
        return Err(Error::NonFinite("laguerre argument"));
    }
    let k = alpha.unsigned_abs() as usize;
    let v = if alpha < 0 && k <= n {
        // the power is folded in stepwise so large k neither overflows nor underflows
        let ratio: f64 = ((n - k + 1)..=n).map(|i| -zeta / i as f64).product();
        ratio * laguerre_forward(n - k, k as i64, zeta)
    } else {
        laguerre_forward(n, alpha, zeta)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("laguerre polynomial"))
    }
}

/// The literal formula `psi00(x) sqrt(p!/q!) w^(q-p) L_p^(q-p)(|w|^2)` with
/// `w = (x1 + i x2)/(sqrt 2 lb)`. For `q < p` the negative power of `w` is
/// absorbed by the vanishing low coefficients of the sum, giving a finite
/// value everywhere.
pub fn laguerre_formula(p: usize, q: usize, x: [f64; 2], lb: MagneticLength) -> Result<Complex64> {
    if !(x[0].is_finite() && x[1].is_finite()) {
        return Err(Error::NonFinite("basis function argument"));
    }
    let l = lb.value();
    let w = Complex64::new(x[0], x[1]) / (2f64.sqrt() * l);
    let zeta = w.norm_sqr();
    let alpha = q as i64 - p as i64;
    let k = alpha.unsigned_abs() as usize;
    // log of |psi00| * sqrt(p!/q!) * |w|^k
    if k > 0 && zeta == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut log_mod = -zeta / 2.0 + 0.5 * (ln_factorial(p) - ln_factorial(q));
    if k > 0 {
        log_mod += k as f64 * w.norm().ln();
    }
    let (sum, phase) = if alpha >= 0 {
        (laguerre_forward(p, alpha, zeta), Complex64::from_polar(1.0, k as f64 * w.arg()))
    } else {
        // w^(-k) zeta^k = conj(w)^k
        (laguerre_reduced(p, k, zeta), Complex64::from_polar(1.0, -(k as f64) * w.arg()))
    };
    let v = phase * (sum * log_mod.exp() / ((2.0 * PI).sqrt() * l));
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("basis function"))
    }
}

/// Basis function with Landau level `idx.n` and degeneracy index `idx.m`,
/// evaluated at the physical point `x`.
pub fn eval_basis_function(idx: BasisIndex, x: [f64; 2], lb: MagneticLength) -> Result<Complex64> {
    laguerre_formula(idx.m, idx.n, x, lb)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Momentum {
    K1,
    K2,
    G1,
    G2,
}

impl Momentum {
    pub const ALL: [Momentum; 4] = [Momentum::K1, Momentum::K2, Momentum::G1, Momentum::G2];

    /// True for the magnetic momenta, which move the Landau level.
    pub fn moves_level(self) -> bool {
        matches!(self, Momentum::K1 | Momentum::K2)
    }

    /// `(<l+1|op|l>, <l-1|op|l>)` where `l` is the index the operator moves.
    pub fn ladder(self, l: usize) -> (Complex64, Complex64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let up = ((l + 1) as f64).sqrt() * s;
        let down = (l as f64).sqrt() * s;
        match self {
            Momentum::K1 => (Complex64::new(0.0, up), Complex64::new(0.0, -down)),
            Momentum::K2 => (Complex64::new(up, 0.0), Complex64::new(down, 0.0)),
            Momentum::G1 => (Complex64::new(up, 0.0), Complex64::new(down, 0.0)),
            Momentum::G2 => (Complex64::new(0.0, -up), Complex64::new(0.0, down)),
        }
    }

    /// Apply the differential operator to `f` at `x` (physical units), using a
    /// fourth-order central difference for the derivative.
    pub fn apply<F>(self, f: &F, x: [f64; 2], lb: MagneticLength) -> Result<Complex64>
    where
        F: Fn([f64; 2]) -> Result<Complex64>,
    {
        let l = lb.value();
        let h = 1e-3 * l;
        let d = |axis: usize| -> Result<Complex64> {
            let mut e = [0.0; 2];
            e[axis] = h;
            let at = |s: f64| f([x[0] + s * e[0], x[1] + s * e[1]]);
            Ok((at(-2.0)? - at(2.0)? + 8.0 * (at(1.0)? - at(-1.0)?)) / (12.0 * h))
        };
        let i = Complex64::new(0.0, 1.0);
        let v = f(x)?;
        Ok(match self {
            Momentum::K1 => -i * l * d(0)? - v * (x[1] / (2.0 * l)),
            Momentum::K2 => -i * l * d(1)? + v * (x[0] / (2.0 * l)),
            Momentum::G1 => -i * l * d(1)? - v * (x[0] / (2.0 * l)),
            Momentum::G2 => -i * l * d(0)? + v * (x[1] / (2.0 * l)),
        })
    }
}

/// Sparse matrix on the truncated lattice `n < n_max`, `m < m_max`, with
/// row/column index `n * m_max + m`.
#[derive(Clone, Debug)]
pub struct LatticeMatrix {
    pub n_max: usize,
    pub m_max: usize,
    pub csr: CsrMatrix<Complex64>,
}

impl LatticeMatrix {
    pub fn index(&self, idx: BasisIndex) -> usize {
        idx.n * self.m_max + idx.m
    }

    pub fn get(&self, row: BasisIndex, col: BasisIndex) -> Complex64 {
        if row.n >= self.n_max || row.m >= self.m_max || col.n >= self.n_max || col.m >= self.m_max {
            return Complex64::new(0.0, 0.0);
        }
        self.csr
            .get_entry(self.index(row), self.index(col))
            .map(|e| e.into_value())
            .unwrap_or_default()
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn entries(&self) -> Vec<(BasisIndex, BasisIndex, Complex64)> {
        let m = self.m_max;
        self.csr
            .triplet_iter()
            .map(|(r, c, v)| (BasisIndex::new(r / m, r % m), BasisIndex::new(c / m, c % m), *v))
            .collect()
    }
}

/// Closed-form ladder matrix of a momentum on the truncated lattice.
pub fn ladder_matrix(which: Momentum, n_max: usize, m_max: usize) -> LatticeMatrix {
    let dim = n_max * m_max;
    let mut coo = CooMatrix::new(dim, dim);
    for n in 0..n_max {
        for m in 0..m_max {
            let col = n * m_max + m;
            let l = if which.moves_level() { n } else { m };
            let (up, down) = which.ladder(l);
            let target = |dl: i64| -> Option<usize> {
                let (tn, tm) = if which.moves_level() {
                    (n as i64 + dl, m as i64)
                } else {
                    (n as i64, m as i64 + dl)
                };
                (tn >= 0 && tm >= 0 && (tn as usize) < n_max && (tm as usize) < m_max)
                    .then(|| tn as usize * m_max + tm as usize)
            };
            if let Some(r) = target(1) {
                coo.push(r, col, up);
            }
            if l > 0 {
                if let Some(r) = target(-1) {
                    coo.push(r, col, down);
                }
            }
        }
    }
    LatticeMatrix { n_max, m_max, csr: CsrMatrix::from(&coo) }
}

/// Quadrature inner product `<f, g>` over the scheme's square.
pub fn inner_product<F, G>(f: F, g: G, scheme: &QuadratureScheme, lb: MagneticLength) -> Result<Complex64>
where
    F: Fn([f64; 2]) -> Result<Complex64> + Sync,
    G: Fn([f64; 2]) -> Result<Complex64> + Sync,
{
    let grid = scheme.grid(lb)?;
    let terms: Result<Vec<Complex64>> = grid
        .par_iter()
        .map(|&(x, w)| Ok(f(x)?.conj() * g(x)? * w))
        .collect();
    let mut acc = NeumaierComplex::new();
    for t in terms? {
        acc.add(t);
    }
    Ok(acc.value())
}

/// One record of the oracle cache.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub which: Momentum,
    pub col: BasisIndex,
    pub row: BasisIndex,
    pub value: Complex64,
}

/// Quadrature values of `<psi_row, op psi_col>` for all pairs of `states`.
pub fn momentum_oracle(
    which: Momentum,
    states: &[BasisIndex],
    scheme: &QuadratureScheme,
    lb: MagneticLength,
) -> Result<Vec<OracleRecord>> {
    let grid = scheme.grid(lb)?;
    // sample psi and op(psi) once per state
    let sample = |idx: BasisIndex, apply: bool| -> Result<Vec<Complex64>> {
        grid.par_iter()
            .map(|&(x, _)| {
                if apply {
                    which.apply(&|y| eval_basis_function(idx, y, lb), x, lb)
                } else {
                    eval_basis_function(idx, x, lb)
                }
            })
            .collect()
    };
    let plain: Vec<Vec<Complex64>> = states.iter().map(|&s| sample(s, false)).collect::<Result<_>>()?;
    let applied: Vec<Vec<Complex64>> = states.iter().map(|&s| sample(s, true)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (ci, &col) in states.iter().enumerate() {
        for (ri, &row) in states.iter().enumerate() {
            let mut acc = NeumaierComplex::new();
            for ((_, w), (a, b)) in grid.iter().zip(plain[ri].iter().zip(&applied[ci])) {
                acc.add(a.conj() * b * *w);
            }
            out.push(OracleRecord { which, col, row, value: acc.value() });
        }
    }
    Ok(out)
}

/// Writes oracle records as whitespace-separated text, one entry per line:
/// `which n m n' m' re im`.
pub fn write_oracle_cache<W: Write>(mut w: W, records: &[OracleRecord]) -> Result<()> {
    for r in records {
        writeln!(
            w,
            "{:?} {} {} {} {} {:.17e} {:.17e}",
            r.which, r.col.n, r.col.m, r.row.n, r.row.m, r.value.re, r.value.im
        )?;
    }
    Ok(())
}

pub fn read_oracle_cache<R: BufRead>(r: R) -> Result<Vec<OracleRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != 7 {
            return Err(Error::Parse(format!("bad oracle record: {line}")));
        }
        let which = match f[0] {
            "K1" => Momentum::K1,
            "K2" => Momentum::K2,
            "G1" => Momentum::G1,
            "G2" => Momentum::G2,
            o => return Err(Error::Parse(format!("unknown momentum {o}"))),
        };
        let u = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
        let fl = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        out.push(OracleRecord {
            which,
            col: BasisIndex::new(u(f[1])?, u(f[2])?),
            row: BasisIndex::new(u(f[3])?, u(f[4])?),
            value: Complex64::new(fl(f[5])?, fl(f[6])?),
        });
    }
    Ok(out)
}

/// Largest deviation between the ladder matrix and oracle records.
pub fn oracle_deviation(ladder: &LatticeMatrix, records: &[OracleRecord]) -> f64 {
    records
        .iter()
        .map(|r| (ladder.get(r.row, r.col) - r.value).norm())
        .fold(0.0, f64::max)
}

const ORACLE_BLOCK: usize = 3;
const ORACLE_TOLERANCE: f64 = 1e-6;

/// Matrix of a momentum on the truncated lattice from the ladder rules,
/// cross-checked against quadrature on the block `n, m < 3`.
pub fn momentum_matrix(which: Momentum, n_max: usize, m_max: usize, lb: MagneticLength) -> Result<LatticeMatrix> {
    if n_max < 2 || m_max < 2 {
        return Err(Error::InvalidArgument("momentum truncation sizes must be at least 2".into()));
    }
    let ladder = ladder_matrix(which, n_max, m_max);
    let (bn, bm) = (n_max.min(ORACLE_BLOCK), m_max.min(ORACLE_BLOCK));
    let states: Vec<BasisIndex> = (0..bn).flat_map(|n| (0..bm).map(move |m| BasisIndex::new(n, m))).collect();
    let scheme = QuadratureScheme::for_truncation(bn + 1, bm + 1, 64)?;
    let records = momentum_oracle(which, &states, &scheme, lb)?;
    let dev = oracle_deviation(&ladder, &records);
    if dev > ORACLE_TOLERANCE {
        return Err(Error::IdentityViolation {
            what: format!("{which:?} ladder rules vs quadrature"),
            deviation: dev,
            tolerance: ORACLE_TOLERANCE,
        });
    }
    Ok(ladder)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_examples() {
        assert_eq!(eval_generalized_laguerre(0, 3, 7.5).unwrap(), 1.0);
        assert_eq!(eval_generalized_laguerre(1, 0, 2.0).unwrap(), -1.0);
        assert_eq!(eval_generalized_laguerre(2, -1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        for alpha in -4..5i64 {
            for &z in &[0.1f64, 1.0, 3.7, 12.0] {
                for n in 0..30usize {
                    // sum_j C(n+alpha, n-j) (-z)^j / j!, generalized binomial
                    let mut want = 0.0;
                    let mut scale = 0.0;
                    for j in 0..=n {
                        let binom: f64 = (0..n - j).map(|i| (n as i64 + alpha - i as i64) as f64 / (i + 1) as f64).product();
                        let t = binom * (-z).powi(j as i32) / (1..=j).map(|i| i as f64).product::<f64>();
                        want += t;
                        scale += t.abs();
                    }
                    let v = eval_generalized_laguerre(n, alpha, z).unwrap();
                    assert!((v - want).abs() <= 1e-13 * (n as f64 + 1.0) * scale.max(1.0), "n={n} a={alpha} z={z} {v} {want}");
                }
            }
        }
    }

    #[test]
    fn large_degree_is_finite() {
        let v = eval_generalized_laguerre(150, -40, 30.0).unwrap();
        assert!(v.is_finite());
        assert!(eval_generalized_laguerre(10, 2, f64::NAN).is_err());
    }

    #[test]
    fn basis_examples() {
        let lb = MagneticLength::new(1.3).unwrap();
        let v = eval_basis_function(BasisIndex::new(0, 0), [0.0, 0.0], lb).unwrap();
        assert!((v.re - 1.0 / ((2.0 * PI).sqrt() * 1.3)).abs() < 1e-15 && v.im == 0.0);
        assert_eq!(eval_basis_function(BasisIndex::new(1, 3), [0.0, 0.0], lb).unwrap().norm(), 0.0);
        assert_eq!(eval_basis_function(BasisIndex::new(3, 1), [0.0, 0.0], lb).unwrap().norm(), 0.0);
        let near = eval_basis_function(BasisIndex::new(1, 3), [1e-6, 1e-6], lb).unwrap();
        assert!(near.norm() < 1e-12);
    }

    #[test]
    fn negative_alpha_agrees_with_reflection_identity() {
        // psi_{p,q} for q < p equals psi00 sqrt(q!/p!) (-1)^(p-q) conj(w)^(p-q) L_q^(p-q)
        let lb = MagneticLength::new(0.8).unwrap();
        for p in 1..7usize {
            for q in 0..p {
                for &x in &[[0.3, -0.7], [1.1, 0.4], [-2.0, 1.5]] {
                    let lhs = laguerre_formula(p, q, x, lb).unwrap();
                    let l = lb.value();
                    let w = Complex64::new(x[0], x[1]) / (2f64.sqrt() * l);
                    let z = w.norm_sqr();
                    let k = (p - q) as i32;
                    let psi00 = (-z / 2.0).exp() / ((2.0 * PI).sqrt() * l);
                    let ratio = (ln_factorial(q) - ln_factorial(p)).exp().sqrt();
                    let rhs = w.conj().powi(k)
                        * (psi00 * ratio * if k % 2 == 0 { 1.0 } else { -1.0 })
                        * eval_generalized_laguerre(q, k as i64, z).unwrap();
                    assert!((lhs - rhs).norm() < 1e-13, "{p} {q} {lhs} {rhs}");
                }
            }
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let lb = MagneticLength::new(1.0).unwrap();
        let scheme = QuadratureScheme::for_truncation(8, 8, 96).unwrap();
        let states: Vec<BasisIndex> = (0..=8)
            .flat_map(|n| (0..=(8 - n)).map(move |m| BasisIndex::new(n, m)))
            .collect();
        let grid = scheme.grid(lb).unwrap();
        let samples: Vec<Vec<Complex64>> = states
            .iter()
            .map(|&s| grid.iter().map(|&(x, _)| eval_basis_function(s, x, lb).unwrap()).collect())
            .collect();
        let mut worst = 0.0f64;
        for (a, sa) in samples.iter().enumerate() {
            for (b, sb) in samples.iter().enumerate().skip(a) {
                let ip: Complex64 = crate::sum::sum_c64(
                    grid.iter().zip(sa.iter().zip(sb)).map(|((_, w), (u, v))| u.conj() * v * *w),
                );
                let expect = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((ip - expect).norm());
            }
        }
        assert!(worst < 1e-7, "worst deviation {worst}");
    }

    #[test]
    fn ladder_rules_match_quadrature_at_other_length() {
        let lb = MagneticLength::new(1.7).unwrap();
        for which in Momentum::ALL {
            momentum_matrix(which, 4, 4, lb).unwrap();
        }
    }

    #[test]
    fn wrong_phase_is_detected() {
        let lb = MagneticLength::new(1.0).unwrap();
        let states: Vec<BasisIndex> = (0..2).flat_map(|n| (0..2).map(move |m| BasisIndex::new(n, m))).collect();
        let scheme = QuadratureScheme::for_truncation(3, 3, 64).unwrap();
        let recs = momentum_oracle(Momentum::K1, &states, &scheme, lb).unwrap();
        let wrong = ladder_matrix(Momentum::K2, 3, 3);
        assert!(oracle_deviation(&wrong, &recs) > 0.1);
    }

    #[test]
    fn oracle_cache_round_trip() {
        let lb = MagneticLength::new(1.0).unwrap();
        let states = [BasisIndex::new(0, 0), BasisIndex::new(1, 0)];
        let scheme = QuadratureScheme::for_truncation(2, 1, 48).unwrap();
        let recs = momentum_oracle(Momentum::G2, &states, &scheme, lb).unwrap();
        let mut buf = Vec::new();
        write_oracle_cache(&mut buf, &recs).unwrap();
        let back = read_oracle_cache(&buf[..]).unwrap();
        assert_eq!(back, recs);
    }

    fn dense(m: &LatticeMatrix) -> nalgebra::DMatrix<Complex64> {
        let d = m.n_max * m.m_max;
        let mut out = nalgebra::DMatrix::zeros(d, d);
        for (r, c, v) in m.csr.triplet_iter() {
            out[(r, c)] = *v;
        }
        out
    }

    #[test]
    fn ladder_algebra_on_interior() {
        let (nm, mm) = (6, 6);
        let [k1, k2, g1, g2] = Momentum::ALL.map(|w| dense(&ladder_matrix(w, nm, mm)));
        let i = Complex64::new(0.0, 1.0);
        let interior = |idx: usize| idx / mm < nm - 1 && idx % mm < mm - 1;
        let q = (&k1 * &k1 + &k2 * &k2 + &g1 * &g1 + &g2 * &g2) * Complex64::new(0.5, 0.0);
        let c_kk = &k1 * &k2 - &k2 * &k1;
        let c_gg = &g1 * &g2 - &g2 * &g1;
        let c_kg = &k1 * &g1 - &g1 * &k1;
        // b^- = -(G1 - i G2)/sqrt2, b^+ = -(G1 + i G2)/sqrt2
        let s = Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bp = (&g1 + &g2 * i) * s;
        let bm = (&g1 - &g2 * i) * s;
        let nb = &bp * &bm;
        for r in 0..nm * mm {
            for c in 0..nm * mm {
                if !(interior(r) && interior(c)) {
                    continue;
                }
                let d = if r == c { 1.0 } else { 0.0 };
                let (n, m) = (c / mm, c % mm);
                assert!((q[(r, c)] - d * (n + m + 1) as f64).norm() < 1e-12);
                assert!((c_kk[(r, c)] + i * d).norm() < 1e-12);
                assert!((c_gg[(r, c)] + i * d).norm() < 1e-12);
                assert!(c_kg[(r, c)].norm() < 1e-12);
                assert!((nb[(r, c)] - d * m as f64).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ladder_entries_move_one_index() {
        for which in Momentum::ALL {
            for (r, c, _) in ladder_matrix(which, 5, 7).entries() {
                let dn = r.n as i64 - c.n as i64;
                let dm = r.m as i64 - c.m as i64;
                if which.moves_level() {
                    assert!(dn.abs() == 1 && dm == 0);
                } else {
                    assert!(dm.abs() == 1 && dn == 0);
                }
            }
        }
    }
}
