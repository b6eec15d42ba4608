//! The Laplacian `d∇δ∇ + δ∇d∇` on curvature-tensor-valued jets and its
//! Weitzenböck decompositions.

use crate::curvature::{curvature_action, ricci, star_action, star_contraction};
use crate::error::Result;
use crate::report::{rel_residual, scaled_residual, Report};
use crate::tensor::Tensor;
use crate::young::young_apply;

use super::tilde::rough_from_hessian;
use super::{jet_traces, SectionTwoJet, TwoJet};

/// `d∇δ∇R′ + δ∇d∇R′` from a second derivative `d2` of `R′`.
///
/// `d∇δ∇R′(x, a, b, c) = −A[x, a, b, c] + A[a, x, b, c]` with
/// `A[x, a, b, c] = Σ ε_i ∇²_{x,e_i}R′(e_i, a, b, c)`, and
/// `δ∇d∇R′(a, b, c, d) = −Σ ε_i (∇²_{e_i,e_i}R′ + ∇²_{e_i,a}R′(b, e_i, c, d) + ∇²_{e_i,b}R′(e_i, a, c, d))`.
pub fn laplacian_lhs(d2: &Tensor) -> Tensor {
    let a = d2.tr(1, 2);
    let dd = &a.perm(&[1, 0, 2, 3]) - &a;
    let b1 = d2.tr(0, 1);
    let b2 = d2.tr(0, 3);
    // ∇²_{e_i,b}R′(e_i, a, c, d): trace slots 0 and 2, remaining [b, a, c, d]
    let b3 = d2.tr(0, 2).perm(&[1, 0, 2, 3]);
    &dd - &(&(&b1 + &b2) + &b3)
}

/// `∇*∇R′ + ½ R*R′ + ½ {R′·ric terms}` as printed, with the four terms
/// `R′_{x2,x4}·ric(x1,x3) − R′_{x2,x3}·ric(x1,x4) + R′_{x1,x3}·ric(x2,x4) − R′_{x1,x4}·ric(x2,x3)`.
pub fn weitzenbock_printed_rhs(sj: &SectionTwoJet) -> Result<Tensor> {
    let rough = jet_traces(&sj.d2rp).rough;
    let q = curvature_action(&sj.rp, &ricci(&sj.background)?.ric)?;
    let mut ricterms = q.reindex(4, &[1, 3, 0, 2]);
    ricterms -= &q.reindex(4, &[1, 2, 0, 3]);
    ricterms += &q.reindex(4, &[0, 2, 1, 3]);
    ricterms -= &q.reindex(4, &[0, 3, 1, 2]);
    let star = star_action(&sj.background, &sj.rp)?;
    Ok(&rough + &(&(&star + &ricterms) * 0.5))
}

/// `∇*∇R′ − (S − S(x2, x1, x3, x4))` with `S = Σ ε_i (R_{x,e_i}·R′)(e_i, …)`.
pub fn weitzenbock_exact_rhs(sj: &SectionTwoJet) -> Result<Tensor> {
    let rough = jet_traces(&sj.d2rp).rough;
    let s = star_contraction(&sj.background, &sj.rp)?;
    Ok(&rough - &(&s - &s.perm(&[1, 0, 2, 3])))
}

pub fn weitzenbock_check(sj: &SectionTwoJet, tol: f64) -> Result<Report> {
    let lhs = laplacian_lhs(&sj.d2rp);
    let mut rep = Report::new();
    rep.check("printed", rel_residual(&lhs, &weitzenbock_printed_rhs(sj)?), tol);
    rep.check("exact", rel_residual(&lhs, &weitzenbock_exact_rhs(sj)?), tol);
    let rough = jet_traces(&sj.d2rp).rough;
    let strict_rhs = &rough + &(star_action(&sj.background, &sj.rp)? * 0.5);
    let strict_lhs = young_apply(&lhs, 0)? * (1.0 / 12.0);
    rep.check("strict", rel_residual(&strict_lhs, &strict_rhs), tol);
    Ok(rep)
}

/// `¼ Y(∇²ric) − ½ R*R`.
pub fn weitzenbock_special_rhs(j: &TwoJet) -> Result<Tensor> {
    let hess = jet_traces(&j.d2r).hess_ric;
    let rr = star_action(&j.r, &j.r)?;
    Ok(&rough_from_hessian(&hess)? - &(&rr * 0.5))
}

/// `∇*∇R = ¼ Y(∇²ric) − ½ R*R`, plus `∇*∇R = −½ R*R` when `∇²ric` vanishes
/// to `tol` relative to `|∇²R|`.
pub fn weitzenbock_special(j: &TwoJet, tol: f64) -> Result<Report> {
    let t = jet_traces(&j.d2r);
    let mut rep = Report::new();
    rep.check("special", rel_residual(&t.rough, &weitzenbock_special_rhs(j)?), tol);
    let scale = j.d2r.norm().max(j.r.norm().powi(2));
    let hess_small = t.hess_ric.norm() <= tol * scale;
    rep.note("hess_ric_relative", if scale > 0.0 { t.hess_ric.norm() / scale } else { 0.0 });
    if hess_small {
        let rr = star_action(&j.r, &j.r)?;
        rep.check("einstein", scaled_residual(&t.rough, &(&rr * -0.5), scale), tol);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::CurvTensor;
    use crate::jet::{random_section_jet, random_section_jet_with, random_two_jet};
    use crate::tensor::Space;

    #[test]
    fn exact_and_strict_forms_hold() {
        let sp = Space::new(4, vec![1, 1, -1, 1]).unwrap();
        let r = CurvTensor::random(&sp, 1).into_tensor();
        let sj = random_section_jet(&r, 2).unwrap();
        let rep = weitzenbock_check(&sj, 1e-12).unwrap();
        assert!(rep.get("exact").unwrap().pass);
        assert!(rep.get("strict").unwrap().pass);
        let diag = random_section_jet_with(&r, r.clone(), 3).unwrap();
        assert!(weitzenbock_check(&diag, 1e-12).unwrap().pass());
    }

    #[test]
    fn special_form_and_constant_curvature() {
        let j = random_two_jet(&Space::euclidean(3), 4).unwrap();
        assert!(weitzenbock_special(&j, 1e-12).unwrap().get("special").unwrap().pass);
        let gg = CurvTensor::constant_curvature(&Space::euclidean(4)).into_tensor();
        let rep = weitzenbock_special(&TwoJet::symmetric(gg).unwrap(), 1e-12).unwrap();
        assert!(rep.get("einstein").unwrap().pass);
    }
}
