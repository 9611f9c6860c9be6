//! Integral kernels of algebra elements and the magnetic 2-cocycle.
//!
//! `(A phi)(x) = 1/(2 pi lb^2) int f_A(y - x) Phi(x, y) phi(y) dy` with
//! `f_A = sqrt(2 pi) lb sum (-1)^(j-k) a_{j,k} psi_{k,j}` and
//! `Phi(x, y) = exp(i (x1 y2 - x2 y1) / (2 lb^2))`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::MagneticElement;
use crate::error::{Error, Result};
use crate::laguerre::{eval_basis_function, BasisIndex, MagneticLength, QuadratureScheme};
use crate::sum::{sum_c64, NeumaierComplex};

/// Doubling estimate above which a kernel quadrature is reported as unconverged.
pub const KERNEL_QUADRATURE_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelFunction {
    /// `f = sum c psi_idx`, already including the prefactor and sign.
    pub terms: Vec<(BasisIndex, Complex64)>,
    pub lb: MagneticLength,
}

impl KernelFunction {
    pub fn eval(&self, y: [f64; 2]) -> Result<Complex64> {
        let mut acc = NeumaierComplex::new();
        for &(idx, c) in &self.terms {
            acc.add(c * eval_basis_function(idx, y, self.lb)?);
        }
        Ok(acc.value())
    }

    /// `||f||^2` from the expansion (the basis is orthonormal).
    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// Writes `x1,x2,re,im` rows for the given sample points.
    pub fn write_csv<W: Write>(&self, mut w: W, points: &[[f64; 2]]) -> Result<()> {
        writeln!(w, "x1,x2,re,im")?;
        for &p in points {
            let v = self.eval(p)?;
            writeln!(w, "{},{},{},{}", p[0], p[1], v.re, v.im)?;
        }
        Ok(())
    }
}

pub fn kernel_of(a: &MagneticElement) -> KernelFunction {
    let l = a.lb().value();
    let pref = (2.0 * PI).sqrt() * l;
    let terms = a
        .coeffs()
        .into_iter()
        .map(|(j, k, c)| {
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            (BasisIndex::new(k, j), c * (sign * pref))
        })
        .collect();
    KernelFunction { terms, lb: a.lb() }
}

pub fn magnetic_cocycle(x: [f64; 2], y: [f64; 2], lb: MagneticLength) -> Complex64 {
    let l = lb.value();
    Complex64::from_polar(1.0, (x[0] * y[1] - x[1] * y[0]) / (2.0 * l * l))
}

/// Quadrature value with its node-doubling error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureValue {
    pub value: Complex64,
    pub error_estimate: f64,
}

fn apply_on_grid<P>(f: &KernelFunction, phi: &P, x: [f64; 2], grid: &[([f64; 2], f64)]) -> Result<Complex64>
where
    P: Fn([f64; 2]) -> Result<Complex64> + Sync,
{
    let l = f.lb.value();
    let terms: Result<Vec<Complex64>> = grid
        .par_iter()
        .map(|&(y, w)| {
            let p = phi(y)?;
            if p == Complex64::new(0.0, 0.0) {
                return Ok(p);
            }
            Ok(f.eval([y[0] - x[0], y[1] - x[1]])? * magnetic_cocycle(x, y, f.lb) * p * w)
        })
        .collect();
    Ok(sum_c64(terms?) / (2.0 * PI * l * l))
}

/// Integration square covering both the support of `phi` (around the origin)
/// and of `f(. - x)` (around `x`).
fn covering_box(scheme: &QuadratureScheme, x: [f64; 2], lb: MagneticLength) -> ([f64; 2], [f64; 2]) {
    let r = scheme.radius * lb.value();
    ([x[0].min(0.0) - r, x[0].max(0.0) + r], [x[1].min(0.0) - r, x[1].max(0.0) + r])
}

/// `(A phi)(x)` by tensor quadrature; the error estimate compares against
/// the rule with twice the nodes.
pub fn apply_via_kernel<P>(f: &KernelFunction, phi: P, x: [f64; 2], scheme: &QuadratureScheme) -> Result<QuadratureValue>
where
    P: Fn([f64; 2]) -> Result<Complex64> + Sync,
{
    if f.terms.is_empty() {
        return Ok(QuadratureValue { value: Complex64::new(0.0, 0.0), error_estimate: 0.0 });
    }
    let (xr, yr) = covering_box(scheme, x, f.lb);
    let coarse = apply_on_grid(f, &phi, x, &scheme.grid_on(xr, yr)?)?;
    let fine = apply_on_grid(f, &phi, x, &scheme.doubled().grid_on(xr, yr)?)?;
    let err = (fine - coarse).norm();
    if err > KERNEL_QUADRATURE_TOLERANCE {
        return Err(Error::QuadratureNotConverged(err));
    }
    Ok(QuadratureValue { value: fine, error_estimate: err })
}

/// `<psi_row, A psi_col>` as the four-dimensional kernel integral.
pub fn kernel_matrix_element(
    a: &MagneticElement,
    row: BasisIndex,
    col: BasisIndex,
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    let lb = a.lb();
    let l = lb.value();
    let f = kernel_of(a);
    let grid = scheme.grid(lb)?;
    let left: Vec<Complex64> = grid.iter().map(|&(x, _)| eval_basis_function(row, x, lb)).collect::<Result<_>>()?;
    let right: Vec<Complex64> = grid.iter().map(|&(y, _)| eval_basis_function(col, y, lb)).collect::<Result<_>>()?;
    let outer: Result<Vec<Complex64>> = grid
        .par_iter()
        .zip(left.par_iter())
        .map(|(&(x, wx), lx)| {
            if lx.norm() < 1e-300 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut acc = NeumaierComplex::new();
            for (&(y, wy), ry) in grid.iter().zip(&right) {
                acc.add(f.eval([y[0] - x[0], y[1] - x[1]])? * magnetic_cocycle(x, y, lb) * ry * wy);
            }
            Ok(lx.conj() * acc.value() * wx)
        })
        .collect();
    Ok(sum_c64(outer?) / (2.0 * PI * l * l))
}

/// `<f_A, f_B>` by quadrature.
pub fn kernel_inner_product(fa: &KernelFunction, fb: &KernelFunction, scheme: &QuadratureScheme) -> Result<Complex64> {
    crate::laguerre::inner_product(|y| fa.eval(y), |y| fb.eval(y), scheme, fa.lb)
}

/// Diagonal of the integral kernel of `A` at `x`, from the expansion
/// `K_A(x, x) = sum_m sum_{j,k} a_{j,k} psi_{k,m}(x) conj(psi_{j,m}(x))` cut
/// at `m < m_count`.
pub fn kernel_diagonal(a: &MagneticElement, x: [f64; 2], m_count: usize) -> Result<Complex64> {
    let lb = a.lb();
    let coeffs = a.coeffs();
    let levels = a.support_bound();
    let mut acc = NeumaierComplex::new();
    for m in 0..m_count {
        let psi: Vec<Complex64> = (0..levels)
            .map(|n| eval_basis_function(BasisIndex::new(n, m), x, lb))
            .collect::<Result<_>>()?;
        for &(j, k, c) in &coeffs {
            acc.add(c * psi[k] * psi[j].conj());
        }
    }
    Ok(acc.value())
}

/// `2 pi lb^2 Tr(chi A chi) / |box|` over centered squares of side
/// `box_side * (i + 1)` for `i < n_boxes`, integrating the kernel diagonal.
pub fn trace_per_unit_volume(a: &MagneticElement, box_side: f64, n_boxes: usize) -> Result<Vec<Complex64>> {
    if !(box_side > 0.0) {
        return Err(Error::InvalidArgument("box side must be positive".into()));
    }
    let lb = a.lb();
    let l = lb.value();
    let scheme = QuadratureScheme::new(1.0, 32)?;
    (0..n_boxes)
        .map(|i| {
            let side = box_side * (i + 1) as f64;
            let h = side / 2.0;
            // sectors m concentrate on radius ~ sqrt(2m) lb; cover the box corners
            let z2 = h * h / (l * l);
            let m_count = (z2 + 10.0 * z2.sqrt() + 40.0).ceil() as usize;
            let grid = scheme.grid_on([-h, h], [-h, h])?;
            let vals: Result<Vec<Complex64>> = grid
                .par_iter()
                .map(|&(x, w)| Ok(kernel_diagonal(a, x, m_count)? * w))
                .collect();
            Ok(sum_c64(vals?) * (2.0 * PI * l * l) / (side * side))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_element;

    fn lb() -> MagneticLength {
        MagneticLength::new(1.0).unwrap()
    }

    #[test]
    fn kernel_of_projection_is_gaussian() {
        let l = MagneticLength::new(1.4).unwrap();
        let f = kernel_of(&MagneticElement::landau_projection(0, l));
        for &y in &[[0.0, 0.0], [0.5, -1.0], [2.0, 1.0]] {
            let expect = (2.0 * PI).sqrt() * 1.4 * eval_basis_function(BasisIndex::new(0, 0), y, l).unwrap();
            assert!((f.eval(y).unwrap() - expect).norm() < 1e-15);
        }
        let z = kernel_of(&MagneticElement::zero(l));
        assert_eq!(z.eval([0.3, 0.2]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn kernel_at_origin_is_trace() {
        let l = MagneticLength::new(0.9).unwrap();
        for seed in 0..10 {
            let a = random_element(seed, 5, 1.0, l).unwrap();
            assert!((kernel_of(&a).eval([0.0, 0.0]).unwrap() - a.trace_int()).norm() < 1e-13);
        }
    }

    #[test]
    fn kernel_norm_matches_coefficients() {
        let a = random_element(4, 4, 1.0, lb()).unwrap();
        let n = a.norms().hs_norm;
        assert!((kernel_of(&a).norm_sqr() - 2.0 * PI * n * n).abs() < 1e-12);
    }

    #[test]
    fn cocycle_antisymmetry() {
        let l = MagneticLength::new(0.6).unwrap();
        let (x, y) = ([0.3, -1.2], [2.5, 0.7]);
        let p = magnetic_cocycle(x, y, l) * magnetic_cocycle(y, x, l);
        assert!((p - 1.0).norm() < 1e-15);
    }

    #[test]
    fn projection_acts_by_kernel() {
        let l = lb();
        let f = kernel_of(&MagneticElement::landau_projection(0, l));
        let scheme = QuadratureScheme::for_truncation(2, 2, 40).unwrap();
        let x = [0.4, -0.3];
        let psi00 = |y| eval_basis_function(BasisIndex::new(0, 0), y, l);
        let v = apply_via_kernel(&f, psi00, x, &scheme).unwrap();
        assert!((v.value - psi00(x).unwrap()).norm() < 1e-6);
        let psi10 = |y| eval_basis_function(BasisIndex::new(1, 0), y, l);
        let v = apply_via_kernel(&f, psi10, x, &scheme).unwrap();
        assert!(v.value.norm() < 1e-6);
        let zero = kernel_of(&MagneticElement::zero(l));
        assert_eq!(apply_via_kernel(&zero, psi00, x, &scheme).unwrap().value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn too_coarse_rule_is_reported() {
        let l = lb();
        let f = kernel_of(&MagneticElement::landau_projection(3, l));
        let scheme = QuadratureScheme::new(12.0, 8).unwrap();
        let phi = |y| eval_basis_function(BasisIndex::new(3, 2), y, l);
        assert!(matches!(apply_via_kernel(&f, phi, [1.0, 0.0], &scheme), Err(Error::QuadratureNotConverged(_))));
    }

    #[test]
    fn trace_per_volume_examples() {
        let l = lb();
        for v in trace_per_unit_volume(&MagneticElement::landau_projection(0, l), 1.0, 3).unwrap() {
            assert!((v - 1.0).norm() < 1e-4, "{v}");
        }
        for v in trace_per_unit_volume(&MagneticElement::transition(0, 1, l), 1.0, 2).unwrap() {
            assert!(v.norm() < 1e-4);
        }
        for v in trace_per_unit_volume(&MagneticElement::zero(l), 1.0, 2).unwrap() {
            assert_eq!(v, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn kernel_matrix_elements_match_coefficients() {
        let l = MagneticLength::new(1.2).unwrap();
        let a = random_element(11, 2, 1.0, l).unwrap();
        let scheme = QuadratureScheme::for_truncation(3, 3, 36).unwrap();
        for (kr, kc, m) in [(0, 1, 0), (1, 1, 1), (1, 0, 2)] {
            let v = kernel_matrix_element(&a, BasisIndex::new(kr, m), BasisIndex::new(kc, m), &scheme).unwrap();
            assert!((v - a.coeff(kc, kr)).norm() < 1e-6, "{kr} {kc} {m}: {v} vs {}", a.coeff(kc, kr));
        }
    }
}
