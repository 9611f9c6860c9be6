//! Cyclic cocycles on the magnetic algebra and their pairings with
//! projections: the derivation cocycle, its Dirac-operator and Fredholm
//! module forms, the noncommutative integral, the graded trace and the
//! Hochschild coboundary.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{conjugate_by_exponential, random_element, MagneticElement, UnitalElement};
use crate::dirac::{
    dirac_phase, fiber_commutator_d, fiber_represent, fiber_spinor, grading, grading_chi, grading_gamma, lift,
    DiracContext, FiberOperator, QuartetOperator, SQUARE_SHIFT,
};
use crate::error::{Error, Result};
use crate::laguerre::MagneticLength;
use crate::schatten::{decade_ladder, diagonal_sector_sums, dixmier_from_partial_sums, DixmierEstimate};
use crate::sum::{sum_c64, NeumaierComplex};

/// Distance from a projection allowed for pairing inputs.
pub const PROJECTION_TOLERANCE: f64 = 1e-10;
/// Distance from an integer allowed for the trace pairing.
pub const GAP_LABEL_INTEGRALITY: f64 = 1e-9;
/// Distance from an integer allowed for the Chern pairing.
pub const CHERN_INTEGRALITY: f64 = 1e-8;
/// Relative disagreement at which the two Fredholm routes are flagged.
pub const ROUTE_AGREEMENT: f64 = 0.10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactAlgebraic,
    DixmierExtrapolated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleValue {
    pub value: Complex64,
    pub method: Method,
    pub error: f64,
    pub measurable: bool,
}

impl CocycleValue {
    fn exact(value: Complex64) -> Self {
        Self { value, method: Method::ExactAlgebraic, error: 0.0, measurable: true }
    }

    fn from_estimate(e: &DixmierEstimate, factor: f64) -> Self {
        Self {
            value: e.value * factor,
            method: Method::DixmierExtrapolated,
            error: e.stderr * factor.abs(),
            measurable: e.measurable,
        }
    }
}

/// `delta_0(A1, A2) = nabla_1 A1 nabla_1 A2 + nabla_2 A1 nabla_2 A2`.
pub fn delta0(a1: &MagneticElement, a2: &MagneticElement) -> Result<MagneticElement> {
    let (x1, x2) = (a1.spatial_derivative(1)?, a1.spatial_derivative(2)?);
    let (y1, y2) = (a2.spatial_derivative(1)?, a2.spatial_derivative(2)?);
    x1.compose(&y1)?.add(&x2.compose(&y2)?)
}

/// `delta_1(A1, A2) = nabla_1 A1 nabla_2 A2 - nabla_2 A1 nabla_1 A2`.
pub fn delta1(a1: &MagneticElement, a2: &MagneticElement) -> Result<MagneticElement> {
    let (x1, x2) = (a1.spatial_derivative(1)?, a1.spatial_derivative(2)?);
    let (y1, y2) = (a2.spatial_derivative(1)?, a2.spatial_derivative(2)?);
    x1.compose(&y2)?.sub(&x2.compose(&y1)?)
}

/// `Psi(A0, A1, A2) = int A0 delta_1(A1, A2)`.
pub fn psi(a0: &MagneticElement, a1: &MagneticElement, a2: &MagneticElement) -> Result<CocycleValue> {
    Ok(CocycleValue::exact(a0.compose(&delta1(a1, a2)?)?.trace_int()))
}

/// `Psi` extended to the unitization; the unit only contributes in slot 0.
pub fn psi_unital(a0: &UnitalElement, a1: &UnitalElement, a2: &UnitalElement) -> Result<Complex64> {
    let d = delta1(&a1.element, &a2.element)?;
    Ok(a0.scalar * d.trace_int() + a0.element.compose(&d)?.trace_int())
}

fn require_projection(p: &MagneticElement) -> Result<()> {
    let defect = p.projection_defect();
    if defect > PROJECTION_TOLERANCE {
        return Err(Error::NotAProjection(defect));
    }
    Ok(())
}

fn require_integer(v: f64, tol: f64) -> Result<f64> {
    if (v - v.round()).abs() > tol {
        return Err(Error::NotIntegral(v));
    }
    Ok(v)
}

/// `gl(P) = int P`.
pub fn gap_label(p: &MagneticElement) -> Result<f64> {
    require_projection(p)?;
    let t = p.trace_int();
    if t.im.abs() > GAP_LABEL_INTEGRALITY {
        return Err(Error::NotIntegral(t.im));
    }
    require_integer(t.re, GAP_LABEL_INTEGRALITY)
}

/// `c(P) = (i / lb^2) Psi(P, P, P)`.
pub fn chern_number(p: &MagneticElement) -> Result<f64> {
    require_projection(p)?;
    let l2 = p.lb().value().powi(2);
    let c = psi(p, p, p)?.value * I / l2;
    if c.im.abs() > 1e-9 {
        return Err(Error::NotIntegral(c.im));
    }
    require_integer(c.re, CHERN_INTEGRALITY)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalObservables {
    /// Integrated density of states, per unit area.
    pub idos: f64,
    /// Hall conductance in units of `e^2 / h`.
    pub hall_in_conductance_quanta: f64,
}

pub fn physical_observables(p: &MagneticElement) -> Result<PhysicalObservables> {
    let l2 = p.lb().value().powi(2);
    Ok(PhysicalObservables {
        idos: gap_label(p)? / (2.0 * std::f64::consts::PI * l2),
        hall_in_conductance_quanta: chern_number(p)?,
    })
}

/// Level window that holds every product of the inputs exactly.
fn fiber_dim(elements: &[&MagneticElement]) -> usize {
    elements.iter().map(|a| a.support_bound()).max().unwrap_or(0) + 2
}

/// Dixmier estimate of `|D_eps|^{-2} (W (x) 1)` for an operator `W` on the
/// fiber `C^4 (x) C^d` that does not depend on the degeneracy index.
/// Sector `m` contributes `sum_{c,n} W_{cn,cn} / (n + m + 1 + e_c)`.
pub fn weighted_fiber_dixmier(w: &FiberOperator, ctx: &DiracContext, ladder: &[usize]) -> Result<DixmierEstimate> {
    let d = w.nrows() / 4;
    let mut terms = Vec::new();
    for c in 0..4 {
        for n in 0..d {
            let v = w[(c * d + n, c * d + n)];
            if v != ZERO {
                let o = (n as f64 + 1.0 + SQUARE_SHIFT[c]) as usize;
                terms.push((o, v));
            }
        }
    }
    let sums = diagonal_sector_sums(&terms, ctx.eps, ladder)?;
    dixmier_from_partial_sums(ladder, &sums)
}

/// Default sector ladder for the fiber reductions.
pub fn default_ladder() -> Vec<usize> {
    decade_ladder(3, 7)
}

/// `Int(A) = (1/4) Tr_Dix(|D_eps|^{-2} pi(A))`.
pub fn nc_integral(a: &MagneticElement, ctx: &DiracContext, ladder: &[usize]) -> Result<CocycleValue> {
    if a.support_bound() > ctx.n_max {
        return Err(Error::InvalidArgument("element support exceeds the truncation".into()));
    }
    let w = fiber_represent(a, fiber_dim(&[a]));
    Ok(CocycleValue::from_estimate(&weighted_fiber_dixmier(&w, ctx, ladder)?, 0.25))
}

fn check_triple(ctx: &DiracContext, a: [&MagneticElement; 3]) -> Result<usize> {
    let limit = ctx.n_max.saturating_sub(ctx.buffer).max(1);
    if a.iter().any(|x| x.support_bound() > limit) {
        return Err(Error::InvalidArgument(format!("element support exceeds the usable truncation {limit}")));
    }
    Ok(fiber_dim(&a))
}

/// `[D, pi(A1)][D, pi(A2)]` on the fiber.
fn fiber_dd(a1: &MagneticElement, a2: &MagneticElement, d: usize) -> FiberOperator {
    fiber_commutator_d(a1, d) * fiber_commutator_d(a2, d)
}

/// `Ch(A0, A1, A2) = 2 Int(Gamma pi(A0) [D, pi(A1)][D, pi(A2)])`.
pub fn ch_dix(
    a0: &MagneticElement,
    a1: &MagneticElement,
    a2: &MagneticElement,
    ctx: &DiracContext,
    ladder: &[usize],
) -> Result<CocycleValue> {
    let d = check_triple(ctx, [a0, a1, a2])?;
    let w = fiber_spinor(&grading_gamma(), d) * fiber_represent(a0, d) * fiber_dd(a1, a2, d);
    Ok(CocycleValue::from_estimate(&weighted_fiber_dixmier(&w, ctx, ladder)?, 0.5))
}

/// `Ch` with `chi` in place of `Gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiTrivialValue {
    pub value: CocycleValue,
    /// Largest modulus of a single `(n, m)` term of the sector sums.
    pub max_term: f64,
}

/// The `chi`-graded character. A common weight `(n + m + 1 + eps)^{-1}` on
/// all spinor components (which differs from `|D_eps|^{-2}` by a trace class
/// operator) makes each `(n, m)` term a spinor trace of
/// `chi gamma_a gamma_b`, and these vanish.
pub fn ch_hat(
    a0: &MagneticElement,
    a1: &MagneticElement,
    a2: &MagneticElement,
    ctx: &DiracContext,
    ladder: &[usize],
) -> Result<ChiTrivialValue> {
    let d = check_triple(ctx, [a0, a1, a2])?;
    let w = fiber_spinor(&grading_chi(), d) * fiber_represent(a0, d) * fiber_dd(a1, a2, d);
    let mut terms = Vec::new();
    let mut max_term: f64 = 0.0;
    for n in 0..d {
        let t = sum_c64((0..4).map(|c| w[(c * d + n, c * d + n)]));
        // the largest weight on the sector-n term is 1/(n+1+eps)
        max_term = max_term.max(t.norm() / (n as f64 + 1.0 + ctx.eps));
        terms.push((n + 1, t));
    }
    let sums = diagonal_sector_sums(&terms, ctx.eps, ladder)?;
    let e = dixmier_from_partial_sums(ladder, &sums)?;
    Ok(ChiTrivialValue { value: CocycleValue::from_estimate(&e, 0.5), max_term })
}

/// Powers of two from 64 up to `top`.
pub fn sector_ladder(top: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 64;
    while n <= top {
        out.push(n);
        n *= 2;
    }
    out
}

/// `tr_Gamma(omega) = Tr_Dix(Gamma omega)` from `L`-sector partial traces.
pub fn graded_trace(omega: &QuartetOperator, ctx: &DiracContext, ladder: &[usize]) -> Result<CocycleValue> {
    let top = *ladder.last().ok_or_else(|| Error::BadLadder("empty ladder".into()))?;
    if top > omega.space().sectors {
        return Err(Error::BadLadder(format!("ladder top {top} exceeds {} sectors", omega.space().sectors)));
    }
    let g = grading(ctx);
    let go = g.mul(omega);
    let traces: Vec<Complex64> = (0..top).into_par_iter().map(|l| go.sector_trace(l)).collect();
    let mut acc = NeumaierComplex::new();
    let mut partial = Vec::new();
    let mut next = 0;
    for (l, t) in traces.iter().enumerate() {
        acc.add(*t);
        if next < ladder.len() && ladder[next] == l + 1 {
            partial.push(acc.value());
            next += 1;
        }
    }
    if partial.len() != ladder.len() {
        return Err(Error::BadLadder("ladder must be strictly increasing".into()));
    }
    Ok(CocycleValue::from_estimate(&dixmier_from_partial_sums(ladder, &partial)?, 1.0))
}

/// Quantized differential `d pi(A) = [F, pi(A)]`.
pub struct QuantizedCalculus {
    ctx: DiracContext,
    f: QuartetOperator,
}

impl QuantizedCalculus {
    pub fn new(ctx: &DiracContext) -> Result<Self> {
        Ok(Self { ctx: *ctx, f: dirac_phase(ctx)? })
    }

    pub fn context(&self) -> &DiracContext {
        &self.ctx
    }

    pub fn represent(&self, a: &MagneticElement) -> Result<QuartetOperator> {
        if a.support_bound() + 1 >= self.ctx.space().n_dim {
            return Err(Error::InvalidArgument("element support exceeds the level window".into()));
        }
        Ok(lift(&fiber_represent(a, self.ctx.space().n_dim), self.ctx.space()))
    }

    pub fn differential(&self, a: &MagneticElement) -> Result<QuartetOperator> {
        Ok(self.f.commutator(&self.represent(a)?))
    }

    /// `pi(A0) d pi(A1)`.
    pub fn one_form(&self, a0: &MagneticElement, a1: &MagneticElement) -> Result<QuartetOperator> {
        Ok(self.represent(a0)?.mul(&self.differential(a1)?))
    }

    /// `pi(A0) d pi(A1) d pi(A2)`.
    pub fn two_form(&self, a0: &MagneticElement, a1: &MagneticElement, a2: &MagneticElement) -> Result<QuartetOperator> {
        Ok(self.one_form(a0, a1)?.mul(&self.differential(a2)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tau2Value {
    /// `|D_eps|^{-2} [D, .][D, .]` reduction.
    pub route_i: CocycleValue,
    /// Direct sector traces of `Gamma pi(A0) [F, pi(A1)][F, pi(A2)]`.
    pub route_ii: CocycleValue,
    pub routes_agree: bool,
}

/// Route (i): `(1/2) Tr_Dix(Gamma pi(A0) |D_eps|^{-2} [D, pi(A1)][D, pi(A2)])`.
/// By cyclicity within a sector the weight acts on `[D,A1][D,A2] Gamma pi(A0)`.
pub fn tau2_reduced(
    a0: &MagneticElement,
    a1: &MagneticElement,
    a2: &MagneticElement,
    ctx: &DiracContext,
    ladder: &[usize],
) -> Result<CocycleValue> {
    let d = check_triple(ctx, [a0, a1, a2])?;
    let w = fiber_dd(a1, a2, d) * fiber_spinor(&grading_gamma(), d) * fiber_represent(a0, d);
    Ok(CocycleValue::from_estimate(&weighted_fiber_dixmier(&w, ctx, ladder)?, 0.5))
}

/// Route (ii): `(1/2) tr_Gamma(pi(A0) d pi(A1) d pi(A2))`.
pub fn tau2_direct(
    calc: &QuantizedCalculus,
    a0: &MagneticElement,
    a1: &MagneticElement,
    a2: &MagneticElement,
    ladder: &[usize],
) -> Result<CocycleValue> {
    check_triple(calc.context(), [a0, a1, a2])?;
    let t = graded_trace(&calc.two_form(a0, a1, a2)?, calc.context(), ladder)?;
    Ok(CocycleValue { value: t.value * 0.5, error: t.error * 0.5, ..t })
}

/// `tau_2` by both routes.
pub fn tau2(
    calc: &QuantizedCalculus,
    a0: &MagneticElement,
    a1: &MagneticElement,
    a2: &MagneticElement,
    fiber_ladder: &[usize],
    sector_ladder: &[usize],
) -> Result<Tau2Value> {
    let route_i = tau2_reduced(a0, a1, a2, calc.context(), fiber_ladder)?;
    let route_ii = tau2_direct(calc, a0, a1, a2, sector_ladder)?;
    let scale = route_i.value.norm().max(route_ii.value.norm());
    let routes_agree = (route_i.value - route_ii.value).norm() <= ROUTE_AGREEMENT * scale || scale < 1e-12;
    Ok(Tau2Value { route_i, route_ii, routes_agree })
}

/// Multilinear functional of `degree + 1` arguments.
#[derive(Clone)]
pub struct Cochain {
    pub degree: usize,
    evaluator: Arc<dyn Fn(&[UnitalElement]) -> Result<Complex64> + Send + Sync>,
}

impl Cochain {
    pub fn new<F>(degree: usize, f: F) -> Self
    where
        F: Fn(&[UnitalElement]) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self { degree, evaluator: Arc::new(f) }
    }

    pub fn eval(&self, args: &[UnitalElement]) -> Result<Complex64> {
        if args.len() != self.degree + 1 {
            return Err(Error::Arity { expected: self.degree + 1, got: args.len() });
        }
        (self.evaluator)(args)
    }

    /// `A0 |-> int A0` on the unitization's ideal part.
    pub fn trace() -> Self {
        Self::new(0, |a| Ok(a[0].element.trace_int()))
    }

    pub fn psi() -> Self {
        Self::new(2, |a| psi_unital(&a[0], &a[1], &a[2]))
    }

    pub fn coboundary(&self) -> Self {
        let phi = self.clone();
        Self::new(self.degree + 1, move |a| hochschild_b(&phi, a))
    }
}

/// `(b phi)(A0, .., A_{n+1}) = sum_{j<=n} (-1)^j phi(.., A_j A_{j+1}, ..)
///  + (-1)^{n+1} phi(A_{n+1} A0, A1, .., A_n)`.
pub fn hochschild_b(phi: &Cochain, args: &[UnitalElement]) -> Result<Complex64> {
    let n = phi.degree;
    if args.len() != n + 2 {
        return Err(Error::Arity { expected: n + 2, got: args.len() });
    }
    let mut acc = NeumaierComplex::new();
    for j in 0..=n {
        let mut merged: Vec<UnitalElement> = Vec::with_capacity(n + 1);
        merged.extend_from_slice(&args[..j]);
        merged.push(args[j].mul(&args[j + 1])?);
        merged.extend_from_slice(&args[j + 2..]);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(phi.eval(&merged)? * sign);
    }
    let mut wrap: Vec<UnitalElement> = Vec::with_capacity(n + 1);
    wrap.push(args[n + 1].mul(&args[0])?);
    wrap.extend_from_slice(&args[1..=n]);
    let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
    acc.add(phi.eval(&wrap)? * sign);
    Ok(acc.value())
}

/// Test projections: Landau projections, their consecutive sums and
/// conjugations `U Pi_0 U*` by `U = exp(iH)` with seeded Hermitian `H`.
pub fn projection_corpus(lb: MagneticLength, seed: u64, conjugated: usize) -> Result<Vec<(String, MagneticElement)>> {
    let mut out = Vec::new();
    for j in 0..6 {
        out.push((format!("pi:{j}"), MagneticElement::landau_projection(j, lb)));
    }
    for (j, k) in [(0, 1), (0, 2), (2, 4)] {
        out.push((format!("pi-sum:{j}..{k}"), MagneticElement::landau_projection_sum(j, k, lb)));
    }
    out.push(("zero".into(), MagneticElement::zero(lb)));
    for i in 0..conjugated as u64 {
        let h = random_element(seed.wrapping_add(i), 3, 0.7, lb)?.hermitize();
        out.push((format!("conj:{i}"), conjugate_by_exponential(&MagneticElement::landau_projection(0, lb), &h)?));
    }
    Ok(out)
}

/// Seeded triples of finitely supported elements.
pub fn triple_corpus(lb: MagneticLength, seed: u64, count: usize, support: usize) -> Result<Vec<[MagneticElement; 3]>> {
    (0..count as u64)
        .map(|i| {
            let s = seed.wrapping_mul(1000).wrapping_add(3 * i);
            Ok([random_element(s, support, 1.0, lb)?, random_element(s + 1, support, 1.0, lb)?, random_element(s + 2, support, 1.0, lb)?])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_element;

    fn lb() -> MagneticLength {
        MagneticLength::new(1.3).unwrap()
    }

    fn ctx() -> DiracContext {
        DiracContext::new(lb(), 0.5, 10, 64, 4).unwrap()
    }

    #[test]
    fn psi_of_lowest_projection() {
        let p = MagneticElement::landau_projection(0, lb());
        let v = psi(&p, &p, &p).unwrap().value;
        let l2 = lb().value().powi(2);
        assert!((v - Complex64::new(0.0, -l2)).norm() < 1e-12);
        let u = UnitalElement::unit(lb());
        let a = random_element(3, 3, 1.0, lb()).unwrap();
        assert_eq!(psi_unital(&a.clone().into(), &u, &a.clone().into()).unwrap(), ZERO);
        assert_eq!(psi_unital(&a.clone().into(), &a.clone().into(), &u).unwrap(), ZERO);
    }

    #[test]
    fn psi_is_cyclic() {
        for seed in 0..10 {
            let a: Vec<_> = (0..3).map(|i| random_element(seed * 3 + i, 4, 1.0, lb()).unwrap()).collect();
            let v = psi(&a[0], &a[1], &a[2]).unwrap().value;
            let w = psi(&a[2], &a[0], &a[1]).unwrap().value;
            assert!((v - w).norm() < 1e-10 * v.norm().max(1.0));
        }
    }

    #[test]
    fn delta_decomposition_of_commutator_product() {
        let c = ctx();
        let d = 7;
        let (a1, a2) = (random_element(1, 4, 1.0, lb()).unwrap(), random_element(2, 4, 1.0, lb()).unwrap());
        let l2 = lb().value().powi(2);
        let lhs = fiber_dd(&a1, &a2, d);
        let rhs = fiber_represent(&delta0(&a1, &a2).unwrap(), d) * Complex64::new(-0.5 / l2, 0.0)
            + fiber_represent(&delta1(&a1, &a2).unwrap(), d) * fiber_spinor(&grading_gamma(), d) * (I * 0.5 / l2);
        assert!((lhs - rhs).camax() < 1e-12);
        // int delta_0(A*, A) is a sum of squares of derivatives
        let t = delta0(&a1.adjoint(), &a1).unwrap().trace_int();
        let direct: f64 = (1..=2)
            .map(|ax| {
                let g = a1.spatial_derivative(ax).unwrap();
                g.adjoint().compose(&g).unwrap().trace_int().re
            })
            .sum();
        assert!(t.im.abs() < 1e-12 && t.re >= 0.0);
        assert!((t.re - direct).abs() < 1e-10 * direct.max(1.0));
        let _ = c;
    }

    #[test]
    fn gap_labels_and_chern_numbers() {
        for j in 0..6 {
            let p = MagneticElement::landau_projection(j, lb());
            assert!((gap_label(&p).unwrap() - 1.0).abs() < 1e-12);
            assert!((chern_number(&p).unwrap() - 1.0).abs() < 1e-10);
        }
        let p = MagneticElement::landau_projection_sum(0, 1, lb());
        assert_eq!(gap_label(&p).unwrap().round(), 2.0);
        assert_eq!(chern_number(&p).unwrap().round(), 2.0);
        let z = MagneticElement::zero(lb());
        assert_eq!(gap_label(&z).unwrap(), 0.0);
        assert_eq!(chern_number(&z).unwrap(), 0.0);
        let a = random_element(9, 3, 1.0, lb()).unwrap();
        assert!(matches!(gap_label(&a), Err(Error::NotAProjection(_))));
        assert!(matches!(chern_number(&a), Err(Error::NotAProjection(_))));
    }

    #[test]
    fn chern_number_is_scale_free() {
        let h = random_element(4, 3, 0.7, lb()).unwrap().hermitize();
        let p = conjugate_by_exponential(&MagneticElement::landau_projection(0, lb()), &h).unwrap();
        let c1 = chern_number(&p).unwrap();
        let q = MagneticElement::from_matrix(p.matrix().clone(), MagneticLength::new(0.4).unwrap()).unwrap();
        let c2 = chern_number(&q).unwrap();
        assert!((c1 - c2).abs() < 1e-10);
        let ratio = psi(&p, &p, &p).unwrap().value / psi(&q, &q, &q).unwrap().value;
        assert!((ratio.re - (1.3f64 / 0.4).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn observables() {
        let o = physical_observables(&MagneticElement::landau_projection(0, lb())).unwrap();
        assert!((o.idos - 1.0 / (2.0 * std::f64::consts::PI * 1.69)).abs() < 1e-12);
        assert!((o.hall_in_conductance_quanta - 1.0).abs() < 1e-10);
        let o = physical_observables(&MagneticElement::zero(lb())).unwrap();
        assert_eq!((o.idos, o.hall_in_conductance_quanta), (0.0, 0.0));
    }

    #[test]
    fn noncommutative_integral() {
        let c = ctx();
        let ladder = default_ladder();
        let v = nc_integral(&MagneticElement::landau_projection(0, lb()), &c, &ladder).unwrap();
        assert!((v.value.re - 1.0).abs() < 0.02);
        let v = nc_integral(&MagneticElement::transition(0, 1, lb()), &c, &ladder).unwrap();
        assert!(v.value.norm() < 1e-3);
        let a = random_element(6, 4, 1.0, lb()).unwrap();
        let v = nc_integral(&a, &c, &ladder).unwrap();
        assert!((v.value - a.trace_int()).norm() < 1e-3 * a.norms().l1_norm);
    }

    #[test]
    fn dirac_character_matches_derivation_cocycle() {
        let c = ctx();
        let ladder = default_ladder();
        let p = MagneticElement::landau_projection(0, lb());
        let v = ch_dix(&p, &p, &p, &c, &ladder).unwrap();
        assert!((v.value - 1.0).norm() < 0.05);
        let l2 = lb().value().powi(2);
        for seed in 0..5 {
            let a: Vec<_> = (0..3).map(|i| random_element(10 * seed + i, 3, 1.0, lb()).unwrap()).collect();
            let want = psi(&a[0], &a[1], &a[2]).unwrap().value * I / l2;
            let got = ch_dix(&a[0], &a[1], &a[2], &c, &ladder).unwrap().value;
            assert!((got - want).norm() < 0.05 * want.norm());
            let hat = ch_hat(&a[0], &a[1], &a[2], &c, &ladder).unwrap();
            assert!(hat.max_term < 1e-10 && hat.value.value.norm() < 1e-10);
        }
        let z = MagneticElement::zero(lb());
        assert_eq!(ch_dix(&p, &z, &p, &c, &ladder).unwrap().value, ZERO);
    }

    #[test]
    fn fredholm_character_routes() {
        let c = DiracContext::new(lb(), 0.5, 6, 1024, 4).unwrap();
        let calc = QuantizedCalculus::new(&c).unwrap();
        let p = MagneticElement::landau_projection(0, lb());
        let t = tau2(&calc, &p, &p, &p, &default_ladder(), &sector_ladder(1024)).unwrap();
        assert!((t.route_i.value - 1.0).norm() < 0.05, "{:?}", t.route_i);
        assert!((t.route_ii.value - 1.0).norm() < 0.10, "{:?}", t.route_ii);
    }

    #[test]
    fn hochschild_coboundary() {
        let args: Vec<UnitalElement> = (0..4).map(|i| random_element(40 + i, 3, 1.0, lb()).unwrap().into()).collect();
        let tr = Cochain::trace();
        assert!(hochschild_b(&tr, &args[..2]).unwrap().norm() < 1e-12);
        let bpsi = hochschild_b(&Cochain::psi(), &args).unwrap();
        assert!(bpsi.norm() < 1e-9);
        let phi = Cochain::new(1, |a| {
            let x = a[0].mul(&a[1])?.mul(&a[1])?;
            Ok(x.element.trace_int() + x.scalar * 0.3 + a[0].element.coeff(0, 1) * a[1].element.coeff(1, 1))
        });
        let bb = phi.coboundary().coboundary();
        let args5: Vec<UnitalElement> = (0..4).map(|i| random_element(60 + i, 3, 1.0, lb()).unwrap().into()).collect();
        assert!(bb.eval(&args5).unwrap().norm() < 1e-10);
        assert!(matches!(hochschild_b(&tr, &args[..3]), Err(Error::Arity { .. })));
        let u = UnitalElement::unit(lb());
        let mixed = [u.clone(), args[1].clone(), args[2].clone(), u];
        assert!(hochschild_b(&Cochain::psi(), &mixed).unwrap().norm() < 1e-9);
    }

    #[test]
    fn corpus_is_made_of_projections() {
        for (name, p) in projection_corpus(lb(), 7, 5).unwrap() {
            assert!(p.projection_defect() < 1e-12, "{name}");
            assert!((gap_label(&p).unwrap() - chern_number(&p).unwrap()).abs() < 1e-8, "{name}");
        }
    }
}
