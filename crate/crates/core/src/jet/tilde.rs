//! The symmetrized second derivative `Y(∇²R)`, its traces, the embedding
//! `ι: C_0 → C_2` and the trace hierarchy.
//!
//! Traces of `Y(∇²R)` over storage slots `(2, 4)` are indexed
//! `[x5, x6, x2, x4]` in tableau labels.

use crate::curvature::{curvature_action, ricci, star_action};
use crate::error::Result;
use crate::report::{rel_residual, Report};
use crate::tensor::Tensor;
use crate::young::young_apply;

use super::{jet_traces, TwoJet};

#[derive(Clone, Debug)]
pub struct TildeOps {
    /// `−tr_{1,3} Y(∇²R)`, indexed `[x5, x6, x2, x4]`.
    pub tilde_hess_ric: Tensor,
    /// `−tr_{5,6} Y(∇²R)`, indexed `[x1, x2, x3, x4]`.
    pub tilde_rough: Tensor,
}

pub fn tilde_ops(d2: &Tensor) -> Result<TildeOps> {
    let y = young_apply(d2, 2)?;
    Ok(TildeOps { tilde_hess_ric: -y.tr(2, 4), tilde_rough: -y.tr(0, 1) })
}

/// `ι(S) = Y(g(x5, x6) S(x1, x2, x3, x4))`.
pub fn hat_embed(s: &Tensor) -> Result<Tensor> {
    young_apply(&Tensor::metric(s.space()).outer(s), 2)
}

/// `F(x5, x2, x6, x4)` for `F` stored `[a, b, c, d]`, laid out `[x5, x6, x2, x4]`.
fn as_5624(f: &Tensor) -> Tensor {
    f.reindex(4, &[0, 2, 1, 3])
}

/// `Σ_{σ,τ} F(τ5, σ2, τ6, σ4)` laid out `[x5, x6, x2, x4]`, summed over the
/// swaps `σ` of `(x2, x4)` and `τ` of `(x5, x6)`.
pub fn sumst(f: &Tensor) -> Tensor {
    let a = as_5624(f);
    let mut out = a.clone();
    out += &a.perm(&[1, 0, 2, 3]);
    out += &a.perm(&[0, 1, 3, 2]);
    out += &a.perm(&[1, 0, 3, 2]);
    out
}

/// `S(x5, x2, x6, x4) + S(x5, x4, x6, x2)` laid out `[x5, x6, x2, x4]`.
fn pair_sym(s: &Tensor) -> Tensor {
    &s.reindex(4, &[0, 2, 1, 3]) + &s.reindex(4, &[0, 3, 1, 2])
}

/// `−4(n+4) (S(x5,x2,x6,x4) + S(x5,x4,x6,x2))`.
pub fn hat_trace_rhs(s: &Tensor) -> Tensor {
    let n = s.dim() as f64;
    pair_sym(s) * (-4.0 * (n + 4.0))
}

/// `−24(n+4) S`.
pub fn hat_rough_rhs(s: &Tensor) -> Tensor {
    let n = s.dim() as f64;
    s * (-24.0 * (n + 4.0))
}

/// Ingredients of the trace formulas for `Y(∇²R)`.
struct Terms {
    hess: Tensor,
    rr: Tensor,
    q: Tensor,
}

fn terms(j: &TwoJet) -> Result<Terms> {
    let hess = jet_traces(&j.d2r).hess_ric;
    let rr = star_action(&j.r, &j.r)?;
    let q = curvature_action(&j.r, &ricci(&j.r)?.ric)?;
    Ok(Terms { hess, rr, q })
}

/// Right-hand side as printed: `2 Σ_{σ,τ} {−R*R + 2 R·ric + 10 ∇²ric}` with
/// the slot pattern `(τ5, σ2, τ6, σ4)` for the first two terms and
/// `(τ5, τ6; σ2, σ4)` for the Hessian.
pub fn tilde_hessian_printed(j: &TwoJet) -> Result<Tensor> {
    let t = terms(j)?;
    let mut out = sumst(&t.rr) * -2.0;
    out += &(sumst(&t.q) * 4.0);
    out += &(sumst(&t.hess.reindex(4, &[0, 2, 1, 3])) * 20.0);
    Ok(out)
}

/// `80 ∇²ric − 40 R_{x5,x6}·ric(x2,x4) − 2 Σ R*R − 12 Σ R·ric`, which is what
/// the trace of `Y(∇²R)` evaluates to.
pub fn tilde_hessian_corrected(j: &TwoJet) -> Result<Tensor> {
    let t = terms(j)?;
    let mut out = &t.hess * 80.0;
    out -= &(&t.q * 40.0);
    out -= &(sumst(&t.rr) * 2.0);
    out -= &(sumst(&t.q) * 12.0);
    Ok(out)
}

/// `−4 (R*R(x5,x2,x6,x4) + R*R(x5,x4,x6,x2))`, the Einstein case.
pub fn tilde_hessian_einstein(j: &TwoJet) -> Result<Tensor> {
    Ok(pair_sym(&star_action(&j.r, &j.r)?) * -4.0)
}

/// `80 ∇*∇R + 16 R*R`.
pub fn tilde_rough_rhs(j: &TwoJet) -> Result<Tensor> {
    let rough = jet_traces(&j.d2r).rough;
    Ok(&(&rough * 80.0) + &(star_action(&j.r, &j.r)? * 16.0))
}

/// `¼ Y(T)` with `T(x1, x2, x3, x4) = ∇²_{x1,x3} ric(x2, x4)`.
pub fn rough_from_hessian(hess: &Tensor) -> Result<Tensor> {
    Ok(young_apply(&hess.reindex(4, &[0, 2, 1, 3]), 0)? * 0.25)
}

/// The three hierarchy identities for a second derivative `d2 ∈ C_2`.
pub fn hierarchy_report(d2: &Tensor, tol: f64) -> Result<Report> {
    let t = jet_traces(d2);
    let mut rep = Report::new();
    let h = &t.hess_ric;
    let from_h = &h.reindex(4, &[0, 2, 1, 3]) - &h.reindex(4, &[0, 3, 1, 2]);
    rep.check("divergence_from_hessian", rel_residual(&t.div_der, &from_h), tol);
    rep.check("rough_from_hessian", rel_residual(&t.rough, &rough_from_hessian(h)?), tol);
    let from_d = &t.div_der - &t.div_der.perm(&[1, 0, 2, 3]);
    rep.check("rough_from_divergence", rel_residual(&t.rough, &from_d), tol);
    Ok(rep)
}
