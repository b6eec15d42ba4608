//! Identities as stated next to their corrected forms, on generic inputs.
//!
//! Each test pins both sides: the literal statement is expected to miss by
//! an O(1) relative amount and the corrected statement to hold to rounding.

use curvjet::curvature::{
    decompose, jacobi_diagonal, kn_pair, ricci, rr_jacobi_rhs, rr_six_term, sphere_star_factors,
    star_action,
};
use curvjet::jet::{
    einstein_check, einstein_extend, fit_jacobi_relation, hat_embed, hat_rough_rhs, hat_trace_rhs,
    jet_traces, perturb_jet, random_einstein_one_jet, random_section_jet, random_section_jet_with,
    random_two_jet, tilde_hessian_corrected, tilde_hessian_einstein, tilde_hessian_printed, tilde_ops,
    validate_two_jet, verify_identity, weitzenbock_check, OneJet, TwoJet, EINSTEIN_TOL,
};
use curvjet::metric::{curvature_two_jet, random_poly_metric, seed_metric};
use curvjet::report::rel_residual;
use curvjet::young::{ck_residual, random_ck};
use curvjet::{Space, Tensor};

const WRONG: f64 = 1e-2;

fn spaces() -> Vec<Space> {
    vec![Space::euclidean(3), Space::euclidean(4), Space::new(4, vec![1, -1, 1, 1]).unwrap()]
}

#[test]
fn six_term_form_holds_only_on_the_diagonal() {
    for sp in spaces() {
        for seed in 0..5 {
            let r = random_ck(&sp, 0, seed);
            let rp = random_ck(&sp, 0, seed + 100);
            let rrp = star_action(&r, &rp).unwrap();
            assert!(rel_residual(&rrp, &rr_six_term(&r, &rp).unwrap()) > WRONG);
            assert!(
                rel_residual(&jacobi_diagonal(&rrp), &jacobi_diagonal(&rr_jacobi_rhs(&r, &rp).unwrap())) > WRONG
            );
            let rr = star_action(&r, &r).unwrap();
            assert!(rel_residual(&rr, &rr_six_term(&r, &r).unwrap()) < 1e-12);
            let sum = &rrp + &star_action(&rp, &r).unwrap();
            let six = &rr_six_term(&r, &rp).unwrap() + &rr_six_term(&rp, &r).unwrap();
            assert!(rel_residual(&sum, &six) < 1e-12);
        }
    }
}

#[test]
fn full_weitzenbock_needs_the_section_to_be_the_background() {
    for sp in spaces() {
        let r = random_ck(&sp, 0, 3);
        let generic = weitzenbock_check(&random_section_jet(&r, 3).unwrap(), 1e-9).unwrap();
        assert!(generic.residual("printed").unwrap() > WRONG);
        assert!(generic.residual("exact").unwrap() < 1e-12);
        assert!(generic.residual("strict").unwrap() < 1e-12);
        let diag = weitzenbock_check(&random_section_jet_with(&r, r.clone(), 3).unwrap(), 1e-9).unwrap();
        assert!(diag.pass(), "{diag:?}");
    }
}

#[test]
fn tilde_hessian_printed_vs_corrected() {
    for sp in spaces() {
        let j = random_two_jet(&sp, 11).unwrap();
        let t = tilde_ops(&j.d2r).unwrap().tilde_hess_ric;
        assert!(rel_residual(&t, &tilde_hessian_printed(&j).unwrap()) > WRONG);
        assert!(rel_residual(&t, &tilde_hessian_corrected(&j).unwrap()) < 1e-12);
        assert!(!verify_identity("tilde_hessian_difference", &sp, 11, 1e-9).unwrap().pass());
        assert!(verify_identity("tilde_hessian_difference_corrected", &sp, 11, 1e-9).unwrap().pass());
    }
}

#[test]
fn tilde_hessian_einstein_form_on_einstein_jets() {
    let sp = Space::euclidean(4);
    for seed in 0..3 {
        let one = random_einstein_one_jet(&sp, seed).unwrap();
        let e = einstein_extend(&one, EINSTEIN_TOL).unwrap().jet;
        let t = tilde_ops(&e.d2r).unwrap().tilde_hess_ric;
        assert!(rel_residual(&t, &tilde_hessian_einstein(&e).unwrap()) < 1e-10);
    }
}

#[test]
fn decomposition_signs() {
    for sp in [Space::euclidean(4), Space::euclidean(5)] {
        let n = sp.dim() as f64;
        let g = Tensor::metric(&sp);
        let r = random_ck(&sp, 0, 1);
        let rd = ricci(&r).unwrap();
        let ric0 = &rd.ric - &(&g * (rd.scalar / n));
        // positive coefficients leave Ricci curvature in the remainder
        let mut w = r.clone();
        w -= &(kn_pair(&g, &g) * (rd.scalar / (2.0 * n * (n - 1.0))));
        w -= &(kn_pair(&g, &ric0) * (1.0 / (n - 2.0)));
        assert!(ricci(&w).unwrap().ric.norm() > WRONG * rd.ric.norm());
        let d = decompose(&r).unwrap();
        assert!(ricci(&d.weyl).unwrap().ric.norm() < 1e-12 * rd.ric.norm());
    }
}

#[test]
fn sphere_star_factor_is_not_n() {
    for n in 3..=6 {
        let f = sphere_star_factors(n);
        assert!((f.half_normalization - (n - 1) as f64).abs() < 1e-12);
        assert!((f.full_normalization - 2.0 * (n - 1) as f64).abs() < 1e-12);
        assert!((f.half_normalization - n as f64).abs() > 0.5);
    }
}

#[test]
fn hat_constants_use_the_direct_traces() {
    let sp = Space::euclidean(4);
    for seed in 0..3 {
        let w = decompose(&random_ck(&sp, 0, seed)).unwrap().weyl;
        let iota = hat_embed(&w).unwrap();
        assert!(ck_residual(&iota, 2).unwrap() < 1e-12);
        let pair_trace = -iota.metric_trace(2, 4).unwrap();
        assert!(rel_residual(&pair_trace, &hat_trace_rhs(&w)) < 1e-12);
        assert!(rel_residual(&jet_traces(&iota).rough, &hat_rough_rhs(&w)) < 1e-12);
        // through the tableau the traces pick up the C_2 eigenvalue
        let tt = tilde_ops(&iota).unwrap();
        assert!(rel_residual(&tt.tilde_rough, &(hat_rough_rhs(&w) * 80.0)) < 1e-12);
    }
}

#[test]
fn einstein_pipeline_round_trip() {
    let sp = Space::euclidean(4);
    for seed in 0..3 {
        let one = random_einstein_one_jet(&sp, seed).unwrap();
        let out = einstein_extend(&one, EINSTEIN_TOL).unwrap();
        assert_eq!(out.solution_dim, 42);
        assert_eq!((&out.jet.r, &out.jet.dr), (&one.r, &one.dr));
        let check = einstein_check(&out.jet, EINSTEIN_TOL).unwrap();
        assert!(check.definition && check.agree() && check.report.pass(), "{check:?}");
        assert!(validate_two_jet(&out.jet, 1e-9).unwrap().pass());
        let back = curvature_two_jet(&seed_metric(&one.r, &one.dr).unwrap()).unwrap();
        assert!(rel_residual(&back.r, &one.r) < 1e-12 && rel_residual(&back.dr, &one.dr) < 1e-12);
        let p = perturb_jet(&out.jet, 1e-3, seed).unwrap();
        let cp = einstein_check(&p, EINSTEIN_TOL).unwrap();
        assert!(!cp.definition && cp.agree());
    }
}

#[test]
fn extension_rejects_non_einstein_one_jets() {
    let sp = Space::euclidean(4);
    let one = OneJet::new(random_ck(&sp, 0, 2), Tensor::zeros(&sp, 5)).unwrap();
    let err = einstein_extend(&one, EINSTEIN_TOL).unwrap_err().to_string();
    assert!(err.contains("ric ∉ ℝ·g"), "{err}");
}

#[test]
fn fit_on_the_symmetric_family_and_scaling() {
    let sp = Space::euclidean(4);
    let g = Tensor::metric(&sp);
    let f = fit_jacobi_relation(&TwoJet::symmetric(kn_pair(&g, &g)).unwrap()).unwrap();
    assert_eq!(f.c, 0.0);
    assert!(f.rough_residual.unwrap() < 1e-12);
    let j = random_two_jet(&sp, 5).unwrap();
    let c1 = fit_jacobi_relation(&j).unwrap().c;
    let doubled = TwoJet::new(j.r.clone(), j.dr.clone(), &j.d2r * 2.0).unwrap();
    let c2 = fit_jacobi_relation(&doubled).unwrap().c;
    assert!((c2 - 2.0 * c1).abs() < 1e-12 * c1.abs());
    assert!(fit_jacobi_relation(&TwoJet::zeros(&sp)).is_err());
}

#[test]
fn metric_pipeline_produces_valid_jets() {
    for sp in spaces() {
        for seed in 0..3 {
            let j = curvature_two_jet(&random_poly_metric(&sp, 4, 0.3, seed).unwrap()).unwrap();
            let rep = validate_two_jet(&j, 1e-9).unwrap();
            assert!(rep.pass(), "{rep:?}");
        }
    }
}

#[test]
fn two_jets_construct_in_dimension_five() {
    // the constraint matrix here is wide and exactly rank deficient
    let sp = Space::euclidean(5);
    for seed in 0..2 {
        let j = random_two_jet(&sp, seed).unwrap();
        assert!(validate_two_jet(&j, 1e-9).unwrap().pass());
    }
}
