//! Singular values, operator ideal norms, Dixmier trace extrapolation,
//! closed-form singular value laws of the resolvent defects, and decay
//! classification of operators against the weak Schatten scale.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, MagneticElement};
use crate::dirac::{defect_operators, dirac_phase, DiracContext, QuartetOperator, SectorSpace};
use crate::error::{Error, Result};
use crate::laguerre::MagneticLength;
use crate::sum::{Neumaier, NeumaierComplex};

/// Relative residual above which a ladder is reported as not measurable.
pub const LADDER_FIT_TOLERANCE: f64 = 0.05;
/// Below this coefficient of determination a decay fit is not trusted.
pub const MIN_R_SQUARED: f64 = 0.95;

/// Singular values in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    pub mu: Vec<f64>,
    pub source: String,
}

impl SingularSpectrum {
    pub fn new(mut mu: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if mu.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite("singular value"));
        }
        mu.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { mu, source: source.into() })
    }

    pub fn count(&self) -> usize {
        self.mu.len()
    }

    /// Merges two spectra, keeping multiplicities.
    pub fn merged(&self, other: &Self) -> Self {
        let mut mu = self.mu.clone();
        mu.extend_from_slice(&other.mu);
        mu.sort_by(|a, b| b.total_cmp(a));
        Self { mu, source: format!("{} + {}", self.source, other.source) }
    }
}

fn dense_singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

/// Singular values of one sector, restricted to the rows and columns that
/// carry nonzero entries.
pub fn sector_singular_values(op: &QuartetOperator, l: usize) -> Vec<f64> {
    let b = op.sector(l);
    let mut rows: Vec<usize> = b.triplet_iter().map(|(r, _, _)| r).collect();
    let mut cols: Vec<usize> = b.triplet_iter().map(|(_, c, _)| c).collect();
    rows.sort_unstable();
    rows.dedup();
    cols.sort_unstable();
    cols.dedup();
    let mut m = CMatrix::zeros(rows.len(), cols.len());
    for (r, c, v) in b.triplet_iter() {
        let i = rows.binary_search(&r).unwrap();
        let j = cols.binary_search(&c).unwrap();
        m[(i, j)] = *v;
    }
    dense_singular_values(&m)
}

/// The `k` largest singular values of `op` (all of them for `None`),
/// computed sector by sector.
pub fn singular_values(op: &QuartetOperator, k: Option<usize>) -> Result<SingularSpectrum> {
    let space = op.space();
    let dim = space.sectors * space.sector_dim();
    if let Some(k) = k {
        if k > dim {
            return Err(Error::InvalidArgument(format!("requested {k} singular values of a {dim}-dimensional operator")));
        }
    }
    let all: Vec<f64> = (0..space.sectors).into_par_iter().flat_map_iter(|l| sector_singular_values(op, l)).collect();
    let mut s = SingularSpectrum::new(all, "sector SVD")?;
    if let Some(k) = k {
        s.mu.resize(k, 0.0);
    }
    Ok(s)
}

/// Singular values over sectors `L < sectors` that are known to be complete:
/// every value above the largest one of the last sector, so no omitted
/// sector can contribute a larger value when sector values decrease in `L`.
pub fn complete_singular_values(op: &QuartetOperator, sectors: usize, source: &str) -> Result<SingularSpectrum> {
    let sectors = sectors.min(op.space().sectors);
    if sectors < 2 {
        return Err(Error::InvalidArgument("need at least two sectors".into()));
    }
    let per: Vec<Vec<f64>> = (0..sectors).into_par_iter().map(|l| sector_singular_values(op, l)).collect();
    let edge = per[sectors - 1].iter().copied().fold(0.0, f64::max);
    let mu = per.into_iter().flatten().filter(|v| *v > edge).collect();
    SingularSpectrum::new(mu, source)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IdealKind {
    /// `(sum mu^p)^{1/p}`.
    Schatten(f64),
    /// `sup (m+1)^{1/p} mu_m`.
    WeakStar(f64),
    /// `sup_N N^{1/p - 1} sum_{m<N} mu_m`, `p > 1`.
    Calderon(f64),
    /// `sup_{N>=2} (1/log N) sum_{m<N} mu_m`.
    CalderonOnePlus,
    /// `sum mu_m / (m+1)^{1 - 1/q}`, `q >= 1`.
    Macaev(f64),
}

/// Count-limited evaluation of an ideal norm. Also reports whether a
/// supremum is attained at the last available index (saturated).
pub fn ideal_norm_detail(spec: &SingularSpectrum, kind: IdealKind) -> Result<(f64, bool)> {
    let mu = &spec.mu;
    let sup = |vals: Vec<f64>| {
        let (mut best, mut at) = (0.0, 0);
        for (i, v) in vals.iter().enumerate() {
            if *v > best {
                best = *v;
                at = i;
            }
        }
        (best, !vals.is_empty() && at + 1 == vals.len())
    };
    let mut prefix = Vec::with_capacity(mu.len());
    let mut acc = Neumaier::new();
    for v in mu {
        acc.add(*v);
        prefix.push(acc.value());
    }
    match kind {
        IdealKind::Schatten(p) if p > 0.0 => {
            Ok((crate::sum::sum_f64(mu.iter().map(|v| v.powf(p))).powf(1.0 / p), false))
        }
        IdealKind::WeakStar(p) if p > 0.0 => {
            Ok(sup(mu.iter().enumerate().map(|(m, v)| ((m + 1) as f64).powf(1.0 / p) * v).collect()))
        }
        IdealKind::Calderon(p) if p > 1.0 => Ok(sup(
            prefix.iter().enumerate().map(|(i, s)| s / ((i + 1) as f64).powf(1.0 - 1.0 / p)).collect(),
        )),
        IdealKind::CalderonOnePlus => {
            Ok(sup(prefix.iter().enumerate().skip(1).map(|(i, s)| s / ((i + 1) as f64).ln()).collect()))
        }
        IdealKind::Macaev(q) if q >= 1.0 => Ok((
            crate::sum::sum_f64(mu.iter().enumerate().map(|(m, v)| v / ((m + 1) as f64).powf(1.0 - 1.0 / q))),
            false,
        )),
        other => Err(Error::InvalidArgument(format!("ideal parameter out of range: {other:?}"))),
    }
}

pub fn ideal_norm(spec: &SingularSpectrum, kind: IdealKind) -> Result<f64> {
    ideal_norm_detail(spec, kind).map(|v| v.0)
}

/// Result of the affine extrapolation `sigma_N = value + slope / log N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DixmierEstimate {
    pub value: Complex64,
    pub slope: Complex64,
    pub stderr: f64,
    pub ladder: Vec<(usize, Complex64)>,
    /// Per-point fit values.
    pub fitted: Vec<Complex64>,
    pub measurable: bool,
}

fn affine_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let ss: f64 = res.iter().map(|r| r * r).sum();
    // standard error of the intercept
    let s2 = ss / (n - 2.0).max(1.0);
    let se = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    (intercept, slope, se, res)
}

/// Fits logarithmic means `sigma_N` given as `(N, sigma_N)`.
pub fn fit_ladder(points: Vec<(usize, Complex64)>) -> Result<DixmierEstimate> {
    if points.len() < 3 {
        return Err(Error::BadLadder(format!("need at least 3 ladder points, got {}", points.len())));
    }
    if points[0].0 < 2 || points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::BadLadder("ladder must be strictly increasing with N >= 2".into()));
    }
    if points.iter().any(|(_, s)| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(Error::NonFinite("logarithmic mean"));
    }
    let x: Vec<f64> = points.iter().map(|(n, _)| 1.0 / (*n as f64).ln()).collect();
    let re: Vec<f64> = points.iter().map(|(_, s)| s.re).collect();
    let im: Vec<f64> = points.iter().map(|(_, s)| s.im).collect();
    let (vr, sr, er, rr) = affine_fit(&x, &re);
    let (vi, si, ei, ri) = affine_fit(&x, &im);
    let value = Complex64::new(vr, vi);
    let slope = Complex64::new(sr, si);
    let fitted = x.iter().map(|a| value + slope * a).collect();
    let worst = rr.iter().zip(&ri).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    let scale = points.iter().map(|(_, s)| s.norm()).fold(value.norm(), f64::max);
    let measurable = worst <= LADDER_FIT_TOLERANCE * scale.max(1e-300) || scale == 0.0;
    Ok(DixmierEstimate { value, slope, stderr: er.hypot(ei), ladder: points, fitted, measurable })
}

/// Dixmier estimate from partial sums `S(N)` over the ladder.
pub fn dixmier_from_partial_sums(ladder: &[usize], partial: &[Complex64]) -> Result<DixmierEstimate> {
    if ladder.len() != partial.len() {
        return Err(Error::InvalidArgument("ladder and partial sums differ in length".into()));
    }
    fit_ladder(ladder.iter().zip(partial).map(|(n, s)| (*n, s / (*n as f64).ln())).collect())
}

/// Dixmier estimate of a positive operator from its singular values.
pub fn dixmier_estimate(spec: &SingularSpectrum, ladder: &[usize]) -> Result<DixmierEstimate> {
    if let Some(&top) = ladder.last() {
        if top > spec.count() {
            return Err(Error::BadLadder(format!("ladder top {top} exceeds the {} available values", spec.count())));
        }
    }
    let mut acc = Neumaier::new();
    let mut partial = Vec::new();
    let mut next = 0;
    for (i, v) in spec.mu.iter().enumerate() {
        if next == ladder.len() {
            break;
        }
        acc.add(*v);
        while next < ladder.len() && ladder[next] == i + 1 {
            partial.push(Complex64::new(acc.value(), 0.0));
            next += 1;
        }
    }
    if partial.len() != ladder.len() {
        return Err(Error::BadLadder("ladder entries must be positive and increasing".into()));
    }
    dixmier_from_partial_sums(ladder, &partial)
}

/// Geometric ladder `10^lo, .., 10^hi`.
pub fn decade_ladder(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 10usize.pow(e)).collect()
}

/// `S(t) = sum_{i<t} 1/(i+eps)` at each requested `t`, in one compensated pass.
pub fn shifted_harmonic(eps: f64, points: &[usize]) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("harmonic shift must be positive, got {eps}")));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i]);
    let mut out = vec![0.0; points.len()];
    let mut acc = Neumaier::new();
    let mut t = 0usize;
    for i in order {
        while t < points[i] {
            acc.add(1.0 / (t as f64 + eps));
            t += 1;
        }
        out[i] = acc.value();
    }
    Ok(out)
}

/// `sum_{m<N} sum_i c_i / (m + o_i + eps)` for every `N` of the ladder.
/// This is the sector sum of an operator that is diagonal in the
/// degeneracy index with fiber weights `c_i` at integer offsets `o_i`.
pub fn diagonal_sector_sums(terms: &[(usize, Complex64)], eps: f64, ladder: &[usize]) -> Result<Vec<Complex64>> {
    let mut pts = Vec::new();
    for &(o, _) in terms {
        pts.push(o);
        for &n in ladder {
            pts.push(n + o);
        }
    }
    let s = shifted_harmonic(eps, &pts)?;
    let stride = ladder.len() + 1;
    Ok((0..ladder.len())
        .map(|li| {
            let mut acc = NeumaierComplex::new();
            for (ti, &(_, c)) in terms.iter().enumerate() {
                let base = s[ti * stride];
                acc.add(c * (s[ti * stride + 1 + li] - base));
            }
            acc.value()
        })
        .collect())
}

/// Eigenvalues of `|D_eps|^{-4}`: for every component shift `e_c`, the value
/// `(j+1+e_c)^{-2}` with multiplicity `j+1`. Returns the sum of the largest `N`.
pub fn d4_partial_sums(shifts: &[f64; 4], ladder: &[usize]) -> Result<Vec<f64>> {
    let top = *ladder.last().ok_or_else(|| Error::BadLadder("empty ladder".into()))?;
    if shifts.iter().any(|e| 1.0 + e <= 0.0) {
        return Err(Error::InvalidArgument("shifted spectrum must stay positive".into()));
    }
    // levels per component needed to hold `top` eigenvalues in the worst case
    let levels = ((2.0 * top as f64).sqrt() as usize) + 2;
    let mut groups: Vec<(f64, usize)> =
        shifts.iter().flat_map(|e| (0..levels).map(move |j| ((j + 1) as f64 + e, j + 1))).collect();
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut acc = Neumaier::new();
    let mut taken = 0usize;
    let mut next = 0;
    for (lam, mult) in groups {
        let w = lam.powi(-2);
        let mut left = mult;
        while left > 0 && next < ladder.len() {
            let room = ladder[next] - taken;
            let step = left.min(room);
            acc.add(w * step as f64);
            taken += step;
            left -= step;
            if taken == ladder[next] {
                out.push(acc.value());
                next += 1;
            }
        }
        if next == ladder.len() {
            break;
        }
    }
    if out.len() != ladder.len() {
        return Err(Error::BadLadder("ladder must be strictly increasing".into()));
    }
    Ok(out)
}

/// Extrapolated Dixmier trace of `|D_eps|^{-4}`.
pub fn d4_estimate(ctx: &DiracContext, ladder: &[usize]) -> Result<DixmierEstimate> {
    let shifts = [0, 1, 2, 3].map(|c| ctx.component_shift(c));
    let sums = d4_partial_sums(&shifts, ladder)?;
    dixmier_from_partial_sums(ladder, &sums.iter().map(|v| Complex64::new(*v, 0.0)).collect::<Vec<_>>())
}

/// The three resolvent defects of a transition operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefectKind {
    /// `Q_eps^{-1/2} A - A Q_eps'^{-1/2}`.
    C,
    /// `Q_eps^{-1} A - A Q_eps'^{-1}`.
    D,
    /// `Q_eps^{-1/2} A Q_eps'^{-1/2} - Q_eps''^{-1} A`.
    J,
}

fn check_shifts(shifts: &[f64]) -> Result<()> {
    if shifts.iter().any(|e| !(*e > -1.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("shifts must exceed -1, got {shifts:?}")));
    }
    Ok(())
}

/// `alpha_m` in `mu_m[C] = alpha_m / (m+1)^{3/2}`.
pub fn c_alpha(j: usize, k: usize, eps: f64, eps2: f64, m: usize) -> Result<f64> {
    check_shifts(&[eps, eps2])?;
    let (zj, zk, m1) = (j as f64 + eps2, k as f64 + eps, (m + 1) as f64);
    let (a, b) = ((1.0 + zj / m1).sqrt(), (1.0 + zk / m1).sqrt());
    Ok((zj - zk).abs() / (a * b * (a + b)))
}

/// Singular value of the defect of `Upsilon_{j->k}` on the `m`-th dual
/// Landau sector, with `zeta_j = j + eps2`, `zeta_k = k + eps`, `xi_k = k + eps3`.
pub fn closed_form_mu(kind: DefectKind, j: usize, k: usize, eps: f64, eps2: f64, eps3: f64, m: usize) -> Result<f64> {
    check_shifts(&[eps, eps2, eps3])?;
    let (zj, zk, xk, m1) = (j as f64 + eps2, k as f64 + eps, k as f64 + eps3, (m + 1) as f64);
    Ok(match kind {
        DefectKind::C => c_alpha(j, k, eps, eps2, m)? / m1.powf(1.5),
        DefectKind::D => (zj - zk).abs() / ((m1 + zj) * (m1 + zk)),
        DefectKind::J => {
            let g = ((m1 + zj) * (m1 + zk)).sqrt();
            (m1 + xk - g).abs() / ((m1 + xk) * g)
        }
    })
}

fn resolvent_power(shift: f64, power: f64, d: usize, m: usize) -> CMatrix {
    DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex64::new(((r + m + 1) as f64 + shift).powf(-power), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// The defect operator of `a` built explicitly on the `m`-th dual Landau
/// sector as a matrix over the level index `n < d`.
pub fn explicit_defect_block(
    kind: DefectKind,
    a: &MagneticElement,
    eps: f64,
    eps2: f64,
    eps3: f64,
    d: usize,
    m: usize,
) -> Result<CMatrix> {
    check_shifts(&[eps, eps2, eps3])?;
    if a.support_bound() > d {
        return Err(Error::InvalidArgument("element support exceeds the level window".into()));
    }
    let am = a.padded(d);
    Ok(match kind {
        DefectKind::C => resolvent_power(eps, 0.5, d, m) * &am - &am * resolvent_power(eps2, 0.5, d, m),
        DefectKind::D => resolvent_power(eps, 1.0, d, m) * &am - &am * resolvent_power(eps2, 1.0, d, m),
        DefectKind::J => {
            resolvent_power(eps, 0.5, d, m) * &am * resolvent_power(eps2, 0.5, d, m) - resolvent_power(eps3, 1.0, d, m) * &am
        }
    })
}

/// Largest deviation between explicit and closed-form singular values of
/// the defect of `Upsilon_{j->k}` over sectors `m < m_count`.
pub fn closed_form_deviation(
    kind: DefectKind,
    j: usize,
    k: usize,
    shifts: (f64, f64, f64),
    m_count: usize,
) -> Result<f64> {
    let lb = MagneticLength::default();
    let a = MagneticElement::transition(j, k, lb);
    let d = j.max(k) + 2;
    let (e1, e2, e3) = shifts;
    let devs: Result<Vec<f64>> = (0..m_count)
        .into_par_iter()
        .map(|m| {
            let sv = dense_singular_values(&explicit_defect_block(kind, &a, e1, e2, e3, d, m)?);
            let top = sv.iter().copied().fold(0.0, f64::max);
            let rest = sv.iter().copied().filter(|v| *v != top).fold(0.0, f64::max);
            let expect = closed_form_mu(kind, j, k, e1, e2, e3, m)?;
            // a transition operator has rank one per sector
            Ok((top - expect).abs().max(rest))
        })
        .collect();
    Ok(devs?.into_iter().fold(0.0, f64::max))
}

/// Spectrum `{mu_m, m < m_count}` of the explicitly built defect.
pub fn explicit_defect_spectrum(
    kind: DefectKind,
    a: &MagneticElement,
    shifts: (f64, f64, f64),
    m_count: usize,
) -> Result<SingularSpectrum> {
    let d = a.support_bound() + 1;
    let per: Result<Vec<Vec<f64>>> = (0..m_count)
        .into_par_iter()
        .map(|m| Ok(dense_singular_values(&explicit_defect_block(kind, a, shifts.0, shifts.1, shifts.2, d, m)?)))
        .collect();
    SingularSpectrum::new(per?.into_iter().flatten().filter(|v| *v > 1e-300).collect(), format!("{kind:?} defect"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    TraceClass,
    /// Weak Schatten of the given order.
    WeakSchatten(f64),
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealVerdict {
    pub exponent: f64,
    pub r_squared: f64,
    /// Ratio of consecutive dyadic tail sums; below one for summable tails.
    pub tail_ratio: f64,
    pub norms: Vec<(String, f64, bool)>,
    pub verdict: Verdict,
}

/// Least-squares fit of `log mu_m` against `log(m+1)` on the tail half.
pub fn classify_decay(spec: &SingularSpectrum) -> Result<IdealVerdict> {
    let n = spec.count();
    if n < 64 {
        return Err(Error::InvalidArgument(format!("decay classification needs at least 64 values, got {n}")));
    }
    let tail: Vec<(f64, f64)> =
        (n / 2..n).filter(|&m| spec.mu[m] > 0.0).map(|m| (((m + 1) as f64).ln(), spec.mu[m].ln())).collect();
    if tail.len() < 16 {
        return Err(Error::InvalidArgument("tail is numerically zero".into()));
    }
    let x: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let (_, slope, _, res) = affine_fit(&x, &y);
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let ssr: f64 = res.iter().map(|r| r * r).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 0.0 };
    let half = crate::sum::sum_f64(spec.mu[n / 2..].iter().copied());
    let quarter = crate::sum::sum_f64(spec.mu[n / 4..n / 2].iter().copied());
    let tail_ratio = if quarter > 0.0 { half / quarter } else { 0.0 };
    let mut norms = Vec::new();
    for (name, kind) in [
        ("schatten 1", IdealKind::Schatten(1.0)),
        ("schatten 2", IdealKind::Schatten(2.0)),
        ("weak 1", IdealKind::WeakStar(1.0)),
        ("weak 2", IdealKind::WeakStar(2.0)),
        ("calderon 2+", IdealKind::Calderon(2.0)),
        ("calderon 1+", IdealKind::CalderonOnePlus),
        ("macaev 2-", IdealKind::Macaev(2.0)),
    ] {
        let (v, sat) = ideal_norm_detail(spec, kind)?;
        norms.push((name.to_string(), v, sat));
    }
    let verdict = if r_squared < MIN_R_SQUARED {
        Verdict::Unclassified
    } else if slope < -1.0 && tail_ratio < 1.0 {
        Verdict::TraceClass
    } else {
        Verdict::WeakSchatten(-1.0 / slope)
    };
    Ok(IdealVerdict { exponent: slope, r_squared, tail_ratio, norms, verdict })
}

/// Decay verdicts for the defects of the Fredholm module.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuasiEvenItem {
    pub label: String,
    pub verdict: Option<IdealVerdict>,
    /// Largest entry; zero operators are trivially in every ideal.
    pub max_abs: f64,
    pub expected: String,
    pub pass: bool,
}

fn quasi_even_item(label: String, op: &QuartetOperator, sectors: usize, want: &str) -> Result<QuasiEvenItem> {
    let max_abs = op.max_abs();
    if max_abs < 1e-14 {
        return Ok(QuasiEvenItem { label, verdict: None, max_abs, expected: want.into(), pass: true });
    }
    let v = classify_decay(&complete_singular_values(op, sectors, &label)?)?;
    let pass = match want {
        "weak-S2" => matches!(v.verdict, Verdict::WeakSchatten(p) if (p - 2.0).abs() < 0.2),
        _ => v.verdict == Verdict::TraceClass,
    };
    Ok(QuasiEvenItem { label, verdict: Some(v), max_abs, expected: want.into(), pass })
}

/// Checks the quasi-even conditions on a set of elements. Pairs and
/// triples are formed cyclically from the set.
pub fn verify_quasi_even(ctx: &DiracContext, test_set: &[MagneticElement]) -> Result<Vec<QuasiEvenItem>> {
    let space: SectorSpace = ctx.space();
    let f = dirac_phase(ctx)?;
    let sectors = ctx.m_max;
    let reps: Vec<QuartetOperator> = test_set
        .iter()
        .map(|a| crate::dirac::lift(&crate::dirac::fiber_represent(a, space.n_dim), space))
        .collect();
    let comms: Vec<QuartetOperator> = reps.iter().map(|p| f.commutator(p)).collect();
    let mut out = Vec::new();
    let n = test_set.len();
    for i in 0..n {
        let d = defect_operators(&test_set[i], ctx)?;
        let (i1, i2) = ((i + 1) % n, (i + 2) % n);
        out.push(quasi_even_item(format!("[F,pi(A{i})]"), &comms[i], sectors, "weak-S2")?);
        out.push(quasi_even_item(format!("[F^2,pi(A{i})]"), &d.fsq_comm, sectors, "trace-class")?);
        out.push(quasi_even_item(format!("R(A{i})[F,pi(A{i1})]"), &d.r.mul(&comms[i1]), sectors, "trace-class")?);
        out.push(quasi_even_item(format!("[F,pi(A{i1})]R(A{i})"), &comms[i1].mul(&d.r), sectors, "trace-class")?);
        out.push(quasi_even_item(
            format!("[F,pi(A{i})][F,pi(A{i1})][F,pi(A{i2})]"),
            &comms[i].mul(&comms[i1]).mul(&comms[i2]),
            sectors,
            "trace-class",
        )?);
    }
    Ok(out)
}
