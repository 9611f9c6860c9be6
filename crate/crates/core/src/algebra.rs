//! Finitely supported elements of the smooth magnetic algebra.
//!
//! `A = sum a_{j,k} T_{j->k}` where the transition operator `T_{j->k}` maps
//! Landau level `j` to level `k` in every degeneracy sector. An element is
//! stored as the matrix `M[(k, j)] = a_{j,k}` acting on the level index, so
//! composition, adjoint and trace are the matrix operations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laguerre::{MagneticLength, Momentum};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct MagneticElement {
    op: CMatrix,
    lb: MagneticLength,
}

/// One coefficient `a_{j,k}` in the exchange format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub j: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementNorms {
    pub operator_norm: f64,
    pub hs_norm: f64,
    pub l1_norm: f64,
}

/// Matrix of `K1` or `K2` on the first `dim` Landau levels.
pub fn level_momentum(which: Momentum, dim: usize) -> CMatrix {
    assert!(which.moves_level(), "only K1 and K2 act on the level index");
    let mut k = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        let (up, down) = which.ladder(n);
        if n + 1 < dim {
            k[(n + 1, n)] = up;
        }
        if n > 0 {
            k[(n - 1, n)] = down;
        }
    }
    k
}

fn pad(m: &CMatrix, dim: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim, dim);
    let d = m.nrows().min(dim);
    out.view_mut((0, 0), (d, d)).copy_from(&m.view((0, 0), (d, d)));
    out
}

impl MagneticElement {
    pub fn zero(lb: MagneticLength) -> Self {
        Self { op: CMatrix::zeros(0, 0), lb }
    }

    /// Element from its level matrix (`M[(k, j)] = a_{j,k}`).
    pub fn from_matrix(op: CMatrix, lb: MagneticLength) -> Result<Self> {
        if op.nrows() != op.ncols() {
            return Err(Error::InvalidArgument("coefficient block must be square".into()));
        }
        if op.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("element coefficients"));
        }
        Ok(Self { op, lb })
    }

    /// Element from `(j, k, a_{j,k})` triples; repeated pairs add up.
    pub fn from_coeffs<I>(coeffs: I, lb: MagneticLength) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let list: Vec<_> = coeffs.into_iter().collect();
        let dim = list.iter().map(|&(j, k, _)| j.max(k) + 1).max().unwrap_or(0);
        let mut op = CMatrix::zeros(dim, dim);
        for (j, k, a) in list {
            op[(k, j)] += a;
        }
        Self::from_matrix(op, lb)
    }

    pub fn transition(j: usize, k: usize, lb: MagneticLength) -> Self {
        Self::from_coeffs([(j, k, Complex64::new(1.0, 0.0))], lb).expect("finite")
    }

    pub fn landau_projection(j: usize, lb: MagneticLength) -> Self {
        Self::transition(j, j, lb)
    }

    /// `Pi_j + ... + Pi_k` for `j <= k`.
    pub fn landau_projection_sum(j: usize, k: usize, lb: MagneticLength) -> Self {
        Self::from_coeffs((j..=k).map(|l| (l, l, Complex64::new(1.0, 0.0))), lb).expect("finite")
    }

    pub fn lb(&self) -> MagneticLength {
        self.lb
    }

    /// Level matrix, `M[(k, j)] = a_{j,k}`.
    pub fn matrix(&self) -> &CMatrix {
        &self.op
    }

    /// Level matrix zero-padded (or cut) to `dim`.
    pub fn padded(&self, dim: usize) -> CMatrix {
        pad(&self.op, dim)
    }

    pub fn coeff(&self, j: usize, k: usize) -> Complex64 {
        if j < self.op.ncols() && k < self.op.nrows() {
            self.op[(k, j)]
        } else {
            ZERO
        }
    }

    /// `1 + max` index carrying a nonzero coefficient (0 for the zero element).
    pub fn support_bound(&self) -> usize {
        let d = self.op.nrows();
        let mut bound = 0;
        for r in 0..d {
            for c in 0..d {
                if self.op[(r, c)] != ZERO {
                    bound = bound.max(r.max(c) + 1);
                }
            }
        }
        bound
    }

    pub fn is_zero(&self) -> bool {
        self.support_bound() == 0
    }

    /// Nonzero coefficients as `(j, k, a_{j,k})`, ordered by `(j, k)`.
    pub fn coeffs(&self) -> Vec<(usize, usize, Complex64)> {
        let d = self.op.nrows();
        let mut out = Vec::new();
        for j in 0..d {
            for k in 0..d {
                let a = self.op[(k, j)];
                if a != ZERO {
                    out.push((j, k, a));
                }
            }
        }
        out
    }

    /// Same element stored on exactly `support_bound()` levels.
    pub fn trimmed(&self) -> Self {
        Self { op: pad(&self.op, self.support_bound()), lb: self.lb }
    }

    fn check_lb(&self, other: &Self) -> Result<()> {
        if self.lb != other.lb {
            return Err(Error::LengthMismatch(self.lb.value(), other.lb.value()));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        self.check_lb(other)?;
        let d = self.op.nrows().max(other.op.nrows());
        Ok(Self { op: f(&pad(&self.op, d), &pad(&other.op, d)), lb: self.lb })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { op: &self.op * c, lb: self.lb }
    }

    /// The product `AB`, with `(AB)_{m,k} = sum_j a_{j,k} b_{m,j}`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b - b * a)
    }

    pub fn adjoint(&self) -> Self {
        Self { op: self.op.adjoint(), lb: self.lb }
    }

    /// Real part `(A + A*)/2`.
    pub fn hermitize(&self) -> Self {
        Self { op: (&self.op + self.op.adjoint()) * Complex64::new(0.5, 0.0), lb: self.lb }
    }

    /// The trace per unit volume, `sum_n a_{n,n}`.
    pub fn trace_int(&self) -> Complex64 {
        crate::sum::sum_c64(self.op.diagonal().iter().copied())
    }

    /// `nabla_1 A = -i lb [K2, A]` and `nabla_2 A = i lb [K1, A]`, the
    /// derivations `-i[x_j, A]`. The result lives on one more level.
    pub fn spatial_derivative(&self, axis: usize) -> Result<Self> {
        let (which, c) = match axis {
            1 => (Momentum::K2, -I),
            2 => (Momentum::K1, I),
            _ => return Err(Error::InvalidArgument(format!("axis must be 1 or 2, got {axis}"))),
        };
        let d = self.support_bound() + 1;
        let k = level_momentum(which, d);
        let a = pad(&self.op, d);
        Ok(Self { op: (&k * &a - &a * &k) * (c * self.lb.value()), lb: self.lb })
    }

    pub fn norms(&self) -> ElementNorms {
        let hs = self.op.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let l1 = self.op.iter().map(|z| z.norm()).sum::<f64>();
        let op = if self.op.nrows() == 0 {
            0.0
        } else {
            self.op.clone().singular_values().iter().copied().fold(0.0, f64::max)
        };
        ElementNorms { operator_norm: op, hs_norm: hs, l1_norm: l1 }
    }

    /// Largest of `|P* - P|` and `|P^2 - P|` entrywise.
    pub fn projection_defect(&self) -> f64 {
        let herm = (&self.op - self.op.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let idem = (&self.op * &self.op - &self.op).iter().map(|z| z.norm()).fold(0.0, f64::max);
        herm.max(idem)
    }

    pub fn to_records(&self) -> Vec<CoefficientRecord> {
        self.coeffs()
            .into_iter()
            .map(|(j, k, a)| CoefficientRecord { j, k, re: a.re, im: a.im })
            .collect()
    }

    pub fn from_records(records: &[CoefficientRecord], lb: MagneticLength) -> Result<Self> {
        Self::from_coeffs(records.iter().map(|r| (r.j, r.k, Complex64::new(r.re, r.im))), lb)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_records())?)
    }

    pub fn from_json(s: &str, lb: MagneticLength) -> Result<Self> {
        let records: Vec<CoefficientRecord> = serde_json::from_str(s)?;
        Self::from_records(&records, lb)
    }
}

/// Seeded element with every coefficient below `support_bound` drawn from
/// the square `[-magnitude, magnitude]^2`.
pub fn random_element(seed: u64, support_bound: usize, magnitude: f64, lb: MagneticLength) -> Result<MagneticElement> {
    if support_bound == 0 {
        return Err(Error::InvalidArgument("support bound must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op = CMatrix::from_fn(support_bound, support_bound, |_, _| {
        Complex64::new(rng.gen_range(-magnitude..=magnitude), rng.gen_range(-magnitude..=magnitude))
    });
    MagneticElement::from_matrix(op, lb)
}

/// Element `V` with `exp(iH) = 1 + V` for Hermitian `H`, via the
/// eigendecomposition of the coefficient block.
pub fn exp_i_minus_one(h: &MagneticElement) -> Result<MagneticElement> {
    let m = h.matrix();
    let dev = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-12 * (1.0 + h.norms().l1_norm) {
        return Err(Error::InvalidArgument(format!("exponent is not Hermitian (defect {dev:.2e})")));
    }
    let d = m.nrows();
    if d == 0 {
        return Ok(MagneticElement::zero(h.lb()));
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(h.hermitize().matrix().clone());
    let w = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l) - 1.0));
    MagneticElement::from_matrix(w * phases * w.adjoint(), h.lb())
}

/// `U P U*` with `U = exp(iH)`; a projection whenever `P` is one.
pub fn conjugate_by_exponential(p: &MagneticElement, h: &MagneticElement) -> Result<MagneticElement> {
    let u = UnitalElement::new(Complex64::new(1.0, 0.0), exp_i_minus_one(h)?);
    let out = u.mul(&UnitalElement::from(p.clone()))?.mul(&u.adjoint())?;
    Ok(out.element)
}

/// `c 1 + A` in the unitization.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitalElement {
    pub scalar: Complex64,
    pub element: MagneticElement,
}

impl From<MagneticElement> for UnitalElement {
    fn from(element: MagneticElement) -> Self {
        Self { scalar: ZERO, element }
    }
}

impl UnitalElement {
    pub fn new(scalar: Complex64, element: MagneticElement) -> Self {
        Self { scalar, element }
    }

    pub fn unit(lb: MagneticLength) -> Self {
        Self { scalar: Complex64::new(1.0, 0.0), element: MagneticElement::zero(lb) }
    }

    pub fn lb(&self) -> MagneticLength {
        self.element.lb()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self { scalar: self.scalar + other.scalar, element: self.element.add(&other.element)? })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let ab = self.element.compose(&other.element)?;
        let element = ab
            .add(&other.element.scale(self.scalar))?
            .add(&self.element.scale(other.scalar))?;
        Ok(Self { scalar: self.scalar * other.scalar, element })
    }

    pub fn adjoint(&self) -> Self {
        Self { scalar: self.scalar.conj(), element: self.element.adjoint() }
    }

    /// The unit is annihilated by the derivations.
    pub fn spatial_derivative(&self, axis: usize) -> Result<MagneticElement> {
        self.element.spatial_derivative(axis)
    }

    /// Trace of the algebra part; the unit has infinite trace.
    pub fn trace_int(&self) -> Result<Complex64> {
        if self.scalar != ZERO {
            return Err(Error::InvalidArgument("the unit is not trace class".into()));
        }
        Ok(self.element.trace_int())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lb() -> MagneticLength {
        MagneticLength::new(1.0).unwrap()
    }

    fn close(a: &MagneticElement, b: &MagneticElement, tol: f64) -> bool {
        let d = a.sub(b).unwrap();
        d.matrix().iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn product_rule_examples() {
        let l = lb();
        let p = MagneticElement::transition(0, 1, l).compose(&MagneticElement::transition(2, 0, l)).unwrap();
        assert_eq!(p.trimmed(), MagneticElement::transition(2, 1, l));
        let z = MagneticElement::landau_projection(0, l).compose(&MagneticElement::landau_projection(1, l)).unwrap();
        assert!(z.is_zero());
        let a = random_element(3, 4, 1.0, l).unwrap();
        assert!(a.compose(&MagneticElement::zero(l)).unwrap().is_zero());
    }

    #[test]
    fn adjoint_examples() {
        let l = lb();
        assert_eq!(MagneticElement::transition(0, 1, l).adjoint().trimmed(), MagneticElement::transition(1, 0, l));
        let p = MagneticElement::landau_projection(0, l);
        assert_eq!(p.adjoint(), p);
        let a = MagneticElement::transition(2, 3, l).scale(I).adjoint();
        assert_eq!(a.coeff(3, 2), -I);
    }

    #[test]
    fn trace_examples() {
        let l = lb();
        assert_eq!(MagneticElement::landau_projection(0, l).trace_int(), Complex64::new(1.0, 0.0));
        assert_eq!(MagneticElement::transition(0, 1, l).trace_int(), ZERO);
    }

    #[test]
    fn norms_examples() {
        let l = lb();
        let n = MagneticElement::landau_projection(0, l).norms();
        assert!((n.operator_norm - 1.0).abs() < 1e-14 && (n.hs_norm - 1.0).abs() < 1e-14);
        let s = MagneticElement::transition(0, 1, l).add(&MagneticElement::transition(1, 0, l)).unwrap();
        assert!((s.norms().operator_norm - 1.0).abs() < 1e-14);
        assert_eq!(MagneticElement::zero(l).norms().operator_norm, 0.0);
    }

    #[test]
    fn random_elements_are_deterministic() {
        let l = lb();
        let a = random_element(1, 4, 1.0, l).unwrap();
        assert_eq!(a, random_element(1, 4, 1.0, l).unwrap());
        assert_ne!(a, random_element(2, 4, 1.0, l).unwrap());
        assert!(a.coeffs().iter().all(|&(j, k, _)| j < 4 && k < 4));
        let h = a.hermitize();
        assert_eq!(h.adjoint(), h);
        assert!(random_element(1, 0, 1.0, l).is_err());
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let a = MagneticElement::landau_projection(0, lb());
        let b = MagneticElement::landau_projection(0, MagneticLength::new(2.0).unwrap());
        assert!(matches!(a.compose(&b), Err(Error::LengthMismatch(..))));
    }

    #[test]
    fn derivative_of_projection_by_hand() {
        // [K2, Pi_0] has entries <1|K2|0> at (1,0) and -<0|K2|1> at (0,1)
        let l = MagneticLength::new(2.0).unwrap();
        let d1 = MagneticElement::landau_projection(0, l).spatial_derivative(1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d1.coeff(0, 1) - (-I * 2.0 * s)).norm() < 1e-15);
        assert!((d1.coeff(1, 0) - (I * 2.0 * s)).norm() < 1e-15);
        assert!(MagneticElement::zero(l).spatial_derivative(2).unwrap().is_zero());
        assert!(UnitalElement::unit(l).spatial_derivative(1).unwrap().is_zero());
    }

    #[test]
    fn derivations_commute_and_kill_trace() {
        let l = MagneticLength::new(0.7).unwrap();
        for seed in 0..20 {
            let a = random_element(seed, 5, 1.0, l).unwrap();
            let d12 = a.spatial_derivative(2).unwrap().spatial_derivative(1).unwrap();
            let d21 = a.spatial_derivative(1).unwrap().spatial_derivative(2).unwrap();
            assert!(close(&d12, &d21, 1e-12));
            for axis in [1, 2] {
                assert!(a.spatial_derivative(axis).unwrap().trace_int().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conjugated_projection_is_projection() {
        let l = lb();
        for seed in 0..10 {
            let h = random_element(100 + seed, 4, 0.8, l).unwrap().hermitize();
            let p = conjugate_by_exponential(&MagneticElement::landau_projection(0, l), &h).unwrap();
            assert!(p.projection_defect() < 1e-12);
            assert!((p.trace_int() - 1.0).norm() < 1e-12);
            assert!(p.coeff(0, 1).norm() > 1e-6, "off-diagonal part expected");
        }
        let not_h = random_element(5, 3, 1.0, l).unwrap();
        assert!(exp_i_minus_one(&not_h).is_err());
    }

    #[test]
    fn unital_arithmetic() {
        let l = lb();
        let a = random_element(7, 3, 1.0, l).unwrap();
        let u = UnitalElement::new(Complex64::new(2.0, -1.0), a.clone());
        let one = UnitalElement::unit(l);
        assert_eq!(u.mul(&one).unwrap().scalar, u.scalar);
        assert!(close(&u.mul(&one).unwrap().element, &a, 1e-15));
        assert!(u.trace_int().is_err());
        assert_eq!(UnitalElement::from(a.clone()).trace_int().unwrap(), a.trace_int());
    }

    #[test]
    fn json_round_trip() {
        let l = lb();
        let a = random_element(9, 3, 1.0, l).unwrap();
        let back = MagneticElement::from_json(&a.to_json().unwrap(), l).unwrap();
        assert_eq!(back, a);
        let p = MagneticElement::from_json(r#"[{"j":0,"k":0,"re":1.0,"im":0.0}]"#, l).unwrap();
        assert_eq!(p, MagneticElement::landau_projection(0, l));
    }
}
