//! Named trace identities for Young symmetrizers applied to products of
//! curvature tensors, Ricci actions and metric factors.
//!
//! Tensors of valence six are labelled `x1..x6` by storage slot. Unless
//! stated otherwise, the symmetrizer runs over rows `{x1, x3}, {x2, x4}` and
//! the trace over `(x1, x3)` leaves `[x2, x4, x5, x6]`.

use crate::curvature::{curvature_action, decompose, jacobi_form, kulkarni, ricci, star_action};
use crate::error::{invalid, Result};
use crate::report::{rel_residual, Report};
use crate::tensor::{Space, Tensor};
use crate::young::{random_ck, young_apply, Tableau};

use super::tilde::{sumst, tilde_ops};
use super::{jet_traces, random_two_jet};

pub const IDENTITY_NAMES: &[&str] = &[
    "tableau_kills_ricci_action",
    "trace_tableau_weyl_metric_16",
    "trace_tableau_weyl_metric_56",
    "trace_tableau_weyl_metric_13",
    "trace_tableau_derivation",
    "trace_tableau_derivation_mixed",
    "trace_tableau_hessian",
    "tableau_of_metric_power",
    "tilde_hessian_difference",
    "tilde_hessian_difference_corrected",
];

/// Relabels `t` by letter patterns: `ein(t, "fbea", "abef")[a, b, e, f] = t[f, b, e, a]`.
fn ein(t: &Tensor, from: &str, to: &str) -> Tensor {
    let map: Vec<usize> = from
        .chars()
        .map(|c| to.find(c).expect("letter present in output pattern"))
        .collect();
    t.reindex(to.len(), &map)
}

/// `Σ_{σ,τ} F(pattern)` over the swaps `σ` of `(b, d)` and `τ` of `(e, f)`,
/// laid out `bdef`.
fn swap_sum(f: &Tensor, pattern: &str) -> Tensor {
    let swap = |p: &str, x: char, y: char| -> String {
        p.chars().map(|c| if c == x { y } else if c == y { x } else { c }).collect()
    };
    let mut out = Tensor::zeros(f.space(), 4);
    for s in [false, true] {
        for t in [false, true] {
            let mut p = pattern.to_string();
            if s {
                p = swap(&p, 'b', 'd');
            }
            if t {
                p = swap(&p, 'e', 'f');
            }
            out += &ein(f, &p, "bdef");
        }
    }
    out
}

fn y22_trace(t: &Tensor, rows: Vec<Vec<usize>>) -> Result<Tensor> {
    Ok(Tableau::new(t.valence(), rows)?.apply(t)?.tr(0, 2))
}

const ROWS: [[usize; 2]; 2] = [[0, 2], [1, 3]];

fn rows22() -> Vec<Vec<usize>> {
    ROWS.iter().map(|r| r.to_vec()).collect()
}

/// Evaluates one named identity on random data of the given space and
/// reports its relative residual against `tol`.
pub fn verify_identity(name: &str, space: &Space, seed: u64, tol: f64) -> Result<Report> {
    let n = space.dim();
    let g = Tensor::metric(space);
    let r = random_ck(space, 0, seed);
    let mut rep = Report::new();
    match name {
        "tableau_kills_ricci_action" => {
            // Y(R_{x1,x2}·ric(x3, x4)) = 0
            let q = curvature_action(&r, &ricci(&r)?.ric)?;
            let y = young_apply(&q, 0)?;
            rep.check(name, y.norm() / q.norm().max(f64::MIN_POSITIVE), tol);
        }
        "trace_tableau_weyl_metric_16" | "trace_tableau_weyl_metric_56" | "trace_tableau_weyl_metric_13" => {
            if n < 4 {
                return invalid("Weyl tensors vanish below dimension 4");
            }
            let w = decompose(&r)?.weyl;
            let gw = g.outer(&w);
            let (lhs, rhs) = match name {
                // tr Y[g(x1, x6) W(x3, x2, x5, x4)] = 3 (W(x6,x2,x5,x4) + W(x6,x4,x5,x2))
                "trace_tableau_weyl_metric_16" => (
                    y22_trace(&ein(&gw, "afcbed", "abcdef"), rows22())?,
                    (&ein(&w, "fbea", "abef") + &ein(&w, "faeb", "abef")) * 3.0,
                ),
                // same trace with rows {x1, x3, x5}, {x2, x4} of g(x5, x6) W(x1..x4)
                "trace_tableau_weyl_metric_56" => (
                    y22_trace(&ein(&gw, "efabcd", "abcdef"), vec![vec![0, 2, 4], vec![1, 3]])?,
                    (&ein(&w, "fbea", "abef") + &ein(&w, "faeb", "abef")) * 6.0,
                ),
                // tr Y[g(x1, x3) W(x5, x2, x6, x4)] = (2n − 4)(W(x5,x2,x6,x4) + W(x5,x4,x6,x2))
                _ => (
                    y22_trace(&ein(&gw, "acebfd", "abcdef"), rows22())?,
                    (&ein(&w, "eafb", "abef") + &ein(&w, "ebfa", "abef")) * (2.0 * n as f64 - 4.0),
                ),
            };
            rep.check(name, rel_residual(&lhs, &rhs), tol);
        }
        "trace_tableau_derivation" | "trace_tableau_derivation_mixed" => {
            let p = curvature_action(&r, &r)?;
            let s = p.tr(1, 2);
            let q = curvature_action(&r, &ricci(&r)?.ric)?;
            let (lhs, rhs) = if name == "trace_tableau_derivation" {
                // tr Y[(R_{x5,x3}·R)(x1, x2, x4, x6)]
                let lhs = y22_trace(&ein(&p, "ecabdf", "abcdef"), rows22())?;
                let mut rhs = ein(&s, "ebdf", "bdef");
                rhs += &ein(&s, "edbf", "bdef");
                rhs += &ein(&q, "ebdf", "bdef");
                rhs += &ein(&q, "edbf", "bdef");
                (lhs, rhs * 3.0)
            } else {
                // tr Y_{x1,x3,x6; x2,x4}[(R_{x5,x6}·R)(x1..x4)]
                let lhs = y22_trace(&ein(&p, "efabcd", "abcdef"), vec![vec![0, 2, 5], vec![1, 3]])?;
                let mut rhs = ein(&q, "efbd", "bdef") * -2.0;
                rhs += &ein(&s, "ebfd", "bdef");
                rhs += &ein(&s, "edfb", "bdef");
                rhs -= &ein(&q, "ebdf", "bdef");
                rhs -= &ein(&q, "edbf", "bdef");
                (lhs, rhs * 6.0)
            };
            rep.check(name, rel_residual(&lhs, &rhs), tol);
        }
        "trace_tableau_hessian" => {
            // −tr Y[∇²_{x1,x3}R(x5, x2, x6, x4)] in terms of the trace hierarchy
            let j = random_two_jet(space, seed)?;
            let t = jet_traces(&j.d2r);
            let s = curvature_action(&j.r, &j.r)?.tr(1, 2);
            let lhs = -y22_trace(&ein(&j.d2r, "acebfd", "abcdef"), rows22())?;
            let mut rhs = swap_sum(&t.rough, "ebfd");
            rhs += &swap_sum(&t.hess_ric, "bdef");
            rhs -= &(swap_sum(&t.div_der, "bedf") * 2.0);
            rhs -= &swap_sum(&s, "bedf");
            rep.check(name, rel_residual(&lhs, &rhs), tol);
        }
        "tableau_of_metric_power" => {
            // Y(∇^{k−2ℓ}R ⊗ g^ℓ) = −2 (k+2)! · (R^(k−2ℓ) ⊙ g^ℓ)⊼ for k ≤ 2
            for k in 0..=2usize {
                for l in 0..=k / 2 {
                    let m = k - 2 * l;
                    let d = random_ck(space, m, seed.wrapping_add((10 * k + l) as u64));
                    // g factors go into the last 2ℓ derivative slots
                    let mut t = d.clone();
                    for _ in 0..l {
                        t = t.outer(&g);
                    }
                    let mut map: Vec<usize> = (0..m).collect();
                    map.extend(m + 4..m + 4 + 2 * l);
                    map.extend(m..m + 4);
                    let mut inv = vec![0; map.len()];
                    for (i, &s) in map.iter().enumerate() {
                        inv[s] = i;
                    }
                    let t = t.reindex(k + 4, &inv);
                    let lhs = young_apply(&t, k)?;
                    let mut h = jacobi_form(&d, m)?;
                    for _ in 0..l {
                        h = h.odot(&g)?;
                    }
                    let fact: f64 = (1..=k + 2).map(|i| i as f64).product();
                    let rhs = kulkarni(&h)? * (-2.0 * fact);
                    rep.check(format!("{name}_k{k}_l{l}"), rel_residual(&lhs, &rhs), tol);
                }
            }
        }
        "tilde_hessian_difference" | "tilde_hessian_difference_corrected" => {
            // tilde∇²ric − 80 ∇²ric as a function of R alone
            let j = random_two_jet(space, seed)?;
            let hess = jet_traces(&j.d2r).hess_ric;
            let lhs = &tilde_ops(&j.d2r)?.tilde_hess_ric - &(&hess * 80.0);
            let rr = star_action(&j.r, &j.r)?;
            let q = curvature_action(&j.r, &ricci(&j.r)?.ric)?;
            let (cq, csq) = if name == "tilde_hessian_difference" { (-80.0, 4.0) } else { (-40.0, -12.0) };
            let mut rhs = &q * cq;
            rhs -= &(sumst(&rr) * 2.0);
            rhs += &(sumst(&q) * csq);
            rep.check(name, rel_residual(&lhs, &rhs), tol);
        }
        _ => return invalid(format!("unknown identity {name:?}")),
    }
    Ok(rep)
}
