//! Einstein two-jets: the definitional test, the two trace-free criteria,
//! the Jacobi-relation fit and the extension of Einstein one-jets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{d_ric, decompose, jacobi_form, kn_pair, ricci, star_action};
use crate::error::{invalid, Error, Result};
use crate::linalg::{columns_to_matrix, lstsq, rank, RANK_CUTOFF};
use crate::metric::{curvature_two_jet, seed_metric};
use crate::report::Report;
use crate::tensor::{Space, Tensor};
use crate::young::{basis_ck, ck_residual, random_ck, young_apply};

use super::{jet_traces, sym_jacobi, OneJet, TwoJet};

/// Default relative tolerance of the Einstein conditions.
pub const EINSTEIN_TOL: f64 = 1e-8;

fn rel(num: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        num / scale
    } else {
        num
    }
}

/// Scale for second-order quantities: `max(|∇²R|, |R|²)`.
fn second_order_scale(j: &TwoJet) -> f64 {
    j.d2r.norm().max(j.r.norm().powi(2))
}

fn ric_defect(r: &Tensor) -> Result<f64> {
    let n = r.dim() as f64;
    let rd = ricci(r)?;
    let ric0 = &rd.ric - &(Tensor::metric(r.space()) * (rd.scalar / n));
    Ok(rel(ric0.norm(), r.norm()))
}

fn dric_defect(dr: &Tensor) -> Result<f64> {
    Ok(rel(d_ric(dr)?.norm(), dr.norm()))
}

/// `∇²R − g ⊗ R*R / (n+4)`, the tensor whose symmetrization must be
/// totally trace-free.
fn einstein_defect_tensor(j: &TwoJet) -> Result<Tensor> {
    let n = j.r.dim() as f64;
    let rr = star_action(&j.r, &j.r)?;
    let grr = Tensor::metric(j.space()).outer(&rr);
    Ok(&j.d2r - &(grr * (1.0 / (n + 4.0))))
}

/// `tr_{1,3}` (storage `(2, 4)`) of the symmetrized defect.
fn trace_defect(j: &TwoJet) -> Result<Tensor> {
    Ok(young_apply(&einstein_defect_tensor(j)?, 2)?.tr(2, 4))
}

/// Outcome of [`einstein_check`].
#[derive(Clone, Debug)]
pub struct EinsteinCheck {
    /// `ric ∈ ℝ·g`, `∇ric = 0`, `∇²ric = 0`.
    pub definition: bool,
    /// `ric ∈ ℝ·g`, `∇ric = 0`, and every trace of `Y(∇²R − g⊗R*R/(n+4))` vanishes.
    pub symmetrizer_form: bool,
    /// `ric ∈ ℝ·g`, `∇ric = 0`, and `R^(2) − (R*R)^(0)⊙g/(n+4)` is totally trace-free.
    pub odot_form: bool,
    pub report: Report,
}

impl EinsteinCheck {
    pub fn agree(&self) -> bool {
        self.definition == self.symmetrizer_form && self.definition == self.odot_form
    }
}

pub fn einstein_check(j: &TwoJet, tol: f64) -> Result<EinsteinCheck> {
    let n = j.r.dim() as f64;
    let s2 = second_order_scale(j);
    let mut rep = Report::new();
    let ric_ok = rep.check("ric_proportional_to_metric", ric_defect(&j.r)?, tol);
    let dric_ok = rep.check("ric_parallel", dric_defect(&j.dr)?, tol);
    let hess = jet_traces(&j.d2r).hess_ric;
    let hess_ok = rep.check("hess_ric_vanishes", rel(hess.norm(), s2), tol);

    let y = young_apply(&einstein_defect_tensor(j)?, 2)?;
    let mut worst: f64 = 0.0;
    for a in 0..6 {
        for b in a + 1..6 {
            worst = worst.max(y.tr(a, b).norm());
        }
    }
    let sym_ok = rep.check("symmetrizer_traces_vanish", rel(worst, 80.0 * s2), tol);

    let r2 = sym_jacobi(j, 2)?;
    let rr0 = jacobi_form(&star_action(&j.r, &j.r)?, 0)?;
    let g = Tensor::metric(j.space());
    let corr = rr0.odot(&g)?.into_tensor() * (1.0 / (n + 4.0));
    let e = r2.tensor() - &corr;
    // traces within the symmetric factor, across, and within the bilinear factor
    let odot_worst = [e.tr(0, 1).norm(), e.tr(0, 4).norm(), e.tr(4, 5).norm()]
        .into_iter()
        .fold(0.0, f64::max);
    let odot_ok = rep.check("odot_traces_vanish", rel(odot_worst, s2), tol);

    let base = ric_ok && dric_ok;
    Ok(EinsteinCheck {
        definition: base && hess_ok,
        symmetrizer_form: base && sym_ok,
        odot_form: base && odot_ok,
        report: rep,
    })
}

/// Least-squares fit of `R^(2) = c · R^(0)⊙g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobiFit {
    pub c: f64,
    /// `|R^(2) − c R^(0)⊙g| / |R^(2)|`, zero when `R^(2)` vanishes.
    pub residual: f64,
    /// `|∇*∇R + (n+4)c/2 R| / |R|`, computed for Einstein jets whose fit
    /// residual is below the fit tolerance.
    pub rough_residual: Option<f64>,
}

/// Fit residuals below this count as an exact relation.
pub const FIT_TOL: f64 = 1e-9;

pub fn fit_jacobi_relation(j: &TwoJet) -> Result<JacobiFit> {
    if j.r.norm() == 0.0 {
        return Err(Error::UndefinedFit("curvature tensor vanishes".into()));
    }
    let n = j.r.dim() as f64;
    let r2 = sym_jacobi(j, 2)?.into_tensor();
    let gform = sym_jacobi(j, 0)?.odot(&Tensor::metric(j.space()))?.into_tensor();
    let c = r2.dot(&gform) / gform.dot(&gform);
    let misfit = (&r2 - &(&gform * c)).norm();
    let residual = rel(misfit, r2.norm());
    let einstein = einstein_check(j, EINSTEIN_TOL)?.definition;
    let rough_residual = (einstein && residual < FIT_TOL).then(|| {
        let rough = jet_traces(&j.d2r).rough;
        (&rough + &(&j.r * ((n + 4.0) * c / 2.0))).norm() / j.r.norm()
    });
    Ok(JacobiFit { c, residual, rough_residual })
}

/// Result of [`einstein_extend`].
#[derive(Clone, Debug)]
pub struct ExtendOutcome {
    pub jet: TwoJet,
    /// Relative residual of the trace-cancelling solve.
    pub residual: f64,
    /// Dimension of the affine space of corrections in `C_2` that solve it.
    pub solution_dim: usize,
}

/// Extends an Einstein one-jet `(R, ∇R)` to an Einstein two-jet.
///
/// The provisional `∇²R` is read off the metric
/// `g − ⅓ R(·, ξ, ξ, ·) − ⅙ ∇_ξ R(·, ξ, ξ, ·)`. A correction `X/80` with
/// `X ∈ C_2` of minimum norm then cancels the trace of
/// `Y(∇²R − g ⊗ R*R/(n+4))`.
pub fn einstein_extend(one: &OneJet, tol: f64) -> Result<ExtendOutcome> {
    let sp = one.space().clone();
    if ck_residual(&one.r, 0)? > 1e-8 {
        return invalid("R is not an algebraic curvature tensor");
    }
    if ck_residual(&one.dr, 1)? > 1e-8 {
        return invalid("∇R violates the second Bianchi identity");
    }
    let rd = ric_defect(&one.r)?;
    if rd > tol {
        return invalid(format!("ric ∉ ℝ·g (relative defect {rd:.3e})"));
    }
    let dd = dric_defect(&one.dr)?;
    if dd > tol {
        return invalid(format!("∇ric ≠ 0 (relative defect {dd:.3e})"));
    }
    let provisional = curvature_two_jet(&seed_metric(&one.r, &one.dr)?)?;
    let jet = TwoJet::new(one.r.clone(), one.dr.clone(), provisional.d2r)?;
    let d = trace_defect(&jet)?;
    if d.norm() == 0.0 {
        return Ok(ExtendOutcome { jet, residual: 0.0, solution_dim: 0 });
    }
    let basis = basis_ck(&sp, 2)?;
    let cols: Vec<Vec<f64>> = basis.iter().map(|b| b.tr(2, 4).into_data()).collect();
    let m = columns_to_matrix(d.data().len(), &cols);
    let rhs = nalgebra::DVector::from_iterator(d.data().len(), d.data().iter().map(|x| -x));
    let sol = lstsq(&m, &rhs, RANK_CUTOFF);
    if sol.rel_residual > 1e-8 {
        return Err(Error::ExtensionFailed { residual: sol.rel_residual });
    }
    let mut d2 = jet.d2r.clone();
    for (b, c) in basis.iter().zip(sol.x.iter()) {
        d2.axpy(c / 80.0, b);
    }
    let jet = TwoJet::new(one.r.clone(), one.dr.clone(), d2)?;
    Ok(ExtendOutcome { jet, residual: sol.rel_residual, solution_dim: basis.len() - sol.rank })
}

/// Random Einstein one-jet: `λ g⊼g + W` with a random Weyl tensor `W`
/// (zero for `n = 3`) and a random `∇R ∈ C_1` with `∇ric = 0`.
pub fn random_einstein_one_jet(space: &Space, seed: u64) -> Result<OneJet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6569_6e73_7465_696e);
    let g = Tensor::metric(space);
    let lambda: f64 = rng.random_range(-1.0..1.0);
    let w = decompose(&random_ck(space, 0, rng.random()))?.weyl;
    let r = &kn_pair(&g, &g) * lambda + w;
    let dr0 = random_ck(space, 1, rng.random());
    let basis = basis_ck(space, 1)?;
    let cols: Vec<Vec<f64>> = basis.iter().map(|b| d_ric(b).map(Tensor::into_data)).collect::<Result<_>>()?;
    let target = d_ric(&dr0)?;
    let m = columns_to_matrix(target.data().len(), &cols);
    let rhs = nalgebra::DVector::from_iterator(target.data().len(), target.data().iter().map(|x| -x));
    let sol = lstsq(&m, &rhs, RANK_CUTOFF);
    if sol.rel_residual > 1e-8 {
        return Err(Error::ConstructionFailed { residual: sol.rel_residual });
    }
    let scale = dr0.norm();
    let mut dr = dr0;
    for (b, c) in basis.iter().zip(sol.x.iter()) {
        dr.axpy(*c, b);
    }
    // for n = 3 the constraint forces ∇R = 0; keep it exactly zero
    if dr.norm() <= 1e-10 * scale {
        dr = Tensor::zeros(space, 5);
    }
    OneJet::new(r, dr)
}

/// `j` with `∇²R` shifted by `ε · max(|∇²R|, |R|², 1) · b/|b|`, where
/// `b ∈ C_2` is a random element with `∇²ric(b) ≠ 0`.
pub fn perturb_jet(j: &TwoJet, eps: f64, seed: u64) -> Result<TwoJet> {
    let sp = j.space();
    for attempt in 0..16u64 {
        let b = random_ck(sp, 2, seed.wrapping_mul(31).wrapping_add(attempt));
        let bn = b.norm();
        if jet_traces(&b).hess_ric.norm() > 1e-3 * bn {
            let amp = eps * second_order_scale(j).max(1.0) / bn;
            let mut d2 = j.d2r.clone();
            d2.axpy(amp, &b);
            return TwoJet::new(j.r.clone(), j.dr.clone(), d2);
        }
    }
    Err(Error::ConstructionFailed { residual: 1.0 })
}

/// Rank of the trace map on `C_2`; exposed for reporting.
pub fn trace_map_rank(space: &Space) -> Result<(usize, usize)> {
    let basis = basis_ck(space, 2)?;
    let cols: Vec<Vec<f64>> = basis.iter().map(|b| b.tr(2, 4).into_data()).collect();
    let m = columns_to_matrix(cols[0].len(), &cols);
    Ok((basis.len(), rank(&m, RANK_CUTOFF)))
}
