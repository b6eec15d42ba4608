//! Algebraic two-jets `(R, ∇R, ∇²R)` of curvature tensors and the trace
//! identities relating them.
//!
//! `∇²R` is stored as `[x, y, a, b, c, d]` with `∇²_{x,y}R(a, b, c, d)`, the
//! outer derivative `x` first.

mod einstein;
mod registry;
mod tilde;
mod weitzenbock;

pub use einstein::{
    einstein_check, einstein_extend, fit_jacobi_relation, perturb_jet, random_einstein_one_jet,
    trace_map_rank, EinsteinCheck, ExtendOutcome, JacobiFit, EINSTEIN_TOL, FIT_TOL,
};
pub use registry::{verify_identity, IDENTITY_NAMES};
pub use tilde::{
    hat_embed, hat_rough_rhs, hat_trace_rhs, hierarchy_report, rough_from_hessian, sumst,
    tilde_hessian_corrected, tilde_hessian_einstein, tilde_hessian_printed, tilde_ops,
    tilde_rough_rhs, TildeOps,
};
pub use weitzenbock::{
    laplacian_lhs, weitzenbock_check, weitzenbock_exact_rhs, weitzenbock_printed_rhs,
    weitzenbock_special, weitzenbock_special_rhs,
};

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_action, jacobi_form, CurvTensor};
use crate::error::{invalid, Error, Result};
use crate::linalg::{PseudoInverse, RANK_CUTOFF};
use crate::report::Report;
use crate::symbiform::SymBiform;
use crate::tensor::{Space, Tensor};
use crate::young::{basis_ck, c0_residual_at, ck_residual, random_ck};

/// Largest least-squares residual accepted by [`random_two_jet`].
pub const CONSTRUCTION_TOL: f64 = 1e-8;

/// `(R, ∇R, ∇²R)` at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TwoJetDoc", into = "TwoJetDoc")]
pub struct TwoJet {
    pub r: Tensor,
    pub dr: Tensor,
    pub d2r: Tensor,
}

#[derive(Serialize, Deserialize)]
struct TwoJetDoc {
    dim: usize,
    signature: Vec<i8>,
    #[serde(rename = "R")]
    r: Vec<f64>,
    #[serde(rename = "dR")]
    dr: Vec<f64>,
    #[serde(rename = "d2R")]
    d2r: Vec<f64>,
}

impl TryFrom<TwoJetDoc> for TwoJet {
    type Error = Error;
    fn try_from(d: TwoJetDoc) -> Result<Self> {
        let sp = Space::new(d.dim, d.signature)?;
        TwoJet::new(
            Tensor::from_data(&sp, 4, d.r)?,
            Tensor::from_data(&sp, 5, d.dr)?,
            Tensor::from_data(&sp, 6, d.d2r)?,
        )
    }
}

impl From<TwoJet> for TwoJetDoc {
    fn from(j: TwoJet) -> Self {
        TwoJetDoc {
            dim: j.r.dim(),
            signature: j.r.space().signature().to_vec(),
            r: j.r.into_data(),
            dr: j.dr.into_data(),
            d2r: j.d2r.into_data(),
        }
    }
}

fn check_shapes(ts: &[(&Tensor, usize)]) -> Result<()> {
    let sp = ts[0].0.space();
    for (t, v) in ts {
        if t.valence() != *v {
            return invalid(format!("expected valence {v}, got {}", t.valence()));
        }
        if t.space() != sp {
            return invalid("jet components live over different spaces");
        }
    }
    Ok(())
}

impl TwoJet {
    /// Checks shapes only; see [`validate_two_jet`] for the identities.
    pub fn new(r: Tensor, dr: Tensor, d2r: Tensor) -> Result<Self> {
        check_shapes(&[(&r, 4), (&dr, 5), (&d2r, 6)])?;
        Ok(TwoJet { r, dr, d2r })
    }

    pub fn zeros(space: &Space) -> Self {
        TwoJet {
            r: Tensor::zeros(space, 4),
            dr: Tensor::zeros(space, 5),
            d2r: Tensor::zeros(space, 6),
        }
    }

    /// `(R, 0, 0)`.
    pub fn symmetric(r: Tensor) -> Result<Self> {
        let sp = r.space().clone();
        TwoJet::new(r, Tensor::zeros(&sp, 5), Tensor::zeros(&sp, 6))
    }

    pub fn space(&self) -> &Space {
        self.r.space()
    }

    pub fn traces(&self) -> JetTraces {
        jet_traces(&self.d2r)
    }

    pub fn one_jet(&self) -> OneJet {
        OneJet { r: self.r.clone(), dr: self.dr.clone() }
    }
}

/// `(R, ∇R)` at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OneJetDoc", into = "OneJetDoc")]
pub struct OneJet {
    pub r: Tensor,
    pub dr: Tensor,
}

#[derive(Serialize, Deserialize)]
struct OneJetDoc {
    dim: usize,
    signature: Vec<i8>,
    #[serde(rename = "R")]
    r: Vec<f64>,
    #[serde(rename = "dR")]
    dr: Vec<f64>,
}

impl TryFrom<OneJetDoc> for OneJet {
    type Error = Error;
    fn try_from(d: OneJetDoc) -> Result<Self> {
        let sp = Space::new(d.dim, d.signature)?;
        OneJet::new(Tensor::from_data(&sp, 4, d.r)?, Tensor::from_data(&sp, 5, d.dr)?)
    }
}

impl From<OneJet> for OneJetDoc {
    fn from(j: OneJet) -> Self {
        OneJetDoc {
            dim: j.r.dim(),
            signature: j.r.space().signature().to_vec(),
            r: j.r.into_data(),
            dr: j.dr.into_data(),
        }
    }
}

impl OneJet {
    pub fn new(r: Tensor, dr: Tensor) -> Result<Self> {
        check_shapes(&[(&r, 4), (&dr, 5)])?;
        Ok(OneJet { r, dr })
    }

    pub fn space(&self) -> &Space {
        self.r.space()
    }
}

/// Two-jet of a section `R′` of curvature tensors over a background `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionTwoJet {
    pub background: Tensor,
    pub rp: Tensor,
    pub drp: Tensor,
    pub d2rp: Tensor,
}

impl SectionTwoJet {
    pub fn new(background: Tensor, rp: Tensor, drp: Tensor, d2rp: Tensor) -> Result<Self> {
        check_shapes(&[(&background, 4), (&rp, 4), (&drp, 5), (&d2rp, 6)])?;
        Ok(SectionTwoJet { background, rp, drp, d2rp })
    }

    pub fn space(&self) -> &Space {
        self.rp.space()
    }
}

/// Residual of `d2 ∈ V*⊗V*⊗C_0` with the second Bianchi identity in the
/// trailing five slots, relative to `max(|d2|, floor)`. The floor is the
/// size of the curvature-squared terms, so that a second derivative that
/// cancels to rounding level is not judged against its own noise.
fn second_slices_residual(d2: &Tensor, bianchi: bool, floor: f64) -> f64 {
    let norm = d2.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let scale = norm.max(floor);
    let c0 = c0_residual_at(d2, 2) * norm / scale;
    if bianchi {
        c0.max(d2.cyclic_sum([1, 2, 3]).norm() / scale)
    } else {
        c0
    }
}

/// `|d2 − d2ᵀ − R_{·,·}·A| / max(|d2|, |R|·|A|)`.
fn ricci_identity_residual(d2: &Tensor, r: &Tensor, a: &Tensor) -> Result<f64> {
    let lhs = d2 - &d2.perm(&[1, 0, 2, 3, 4, 5]);
    let rhs = curvature_action(r, a)?;
    let scale = d2.norm().max(r.norm() * a.norm());
    Ok(crate::report::scaled_residual(&lhs, &rhs, scale))
}

pub fn validate_two_jet(j: &TwoJet, tol: f64) -> Result<Report> {
    let mut rep = Report::new();
    rep.check("curvature_symmetries", ck_residual(&j.r, 0)?, tol);
    rep.check("second_bianchi", ck_residual(&j.dr, 1)?, tol);
    rep.check("second_derivative_slices", second_slices_residual(&j.d2r, true, j.r.norm().powi(2)), tol);
    rep.check("ricci_identity", ricci_identity_residual(&j.d2r, &j.r, &j.r)?, tol);
    Ok(rep)
}

pub fn validate_section_jet(sj: &SectionTwoJet, tol: f64) -> Result<Report> {
    let mut rep = Report::new();
    rep.check("background_symmetries", ck_residual(&sj.background, 0)?, tol);
    rep.check("section_symmetries", ck_residual(&sj.rp, 0)?, tol);
    let drp_scale = sj.drp.norm();
    let drp_res = if drp_scale == 0.0 { 0.0 } else { c0_residual_at(&sj.drp, 1) };
    rep.check("first_derivative_slices", drp_res, tol);
    rep.check("second_derivative_slices", second_slices_residual(&sj.d2rp, false, sj.background.norm() * sj.rp.norm()), tol);
    rep.check("ricci_identity", ricci_identity_residual(&sj.d2rp, &sj.background, &sj.rp)?, tol);
    Ok(rep)
}

fn sub_seeds(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x6a65_745f_6c61_6221)
}

fn check_dim(space: &Space) -> Result<()> {
    if !(2..=5).contains(&space.dim()) {
        return invalid(format!("random jets are supported for 2 ≤ n ≤ 5, got {}", space.dim()));
    }
    Ok(())
}

/// Symmetric part of `∇²R` solving the second Bianchi identity for the
/// forced antisymmetric part `a`: minimum-norm `S ∈ Sym²V*⊗C_0` with
/// `b(S) = −b(a)` on the independent rows `x × Λ³ × Λ²`.
fn solve_symmetric_part(space: &Space, a: &Tensor) -> Result<Tensor> {
    let n = space.dim();
    let basis = basis_ck(space, 0)?;
    let system = bianchi_system(space)?;
    let (pairs, rows) = (&system.pairs, &system.rows);
    let rhs = nalgebra::DVector::from_iterator(
        rows.len(),
        rows.iter().map(|r| -cyclic_sum(&|i: &[usize; 6]| a.get(i), r)),
    );
    let sol = system.pinv.solve(&rhs);
    if sol.rel_residual > CONSTRUCTION_TOL {
        return Err(Error::ConstructionFailed { residual: sol.rel_residual });
    }
    let mut s = Tensor::zeros(space, 6);
    let block = n.pow(4);
    for (pi, &(p, q)) in pairs.iter().enumerate() {
        let mut slice = Tensor::zeros(space, 4);
        for (bi, b) in basis.iter().enumerate() {
            slice.axpy(sol.x[pi * basis.len() + bi], b);
        }
        for (x, y) in [(p, q), (q, p)] {
            let off = (x * n + y) * block;
            s.data_mut()[off..off + block].copy_from_slice(slice.data());
            if p == q {
                break;
            }
        }
    }
    Ok(s)
}

/// Constraint rows, index pairs and factorized matrix of the symmetric-part
/// solve; these depend only on the signature.
struct BianchiSystem {
    pairs: Vec<(usize, usize)>,
    rows: Vec<[usize; 6]>,
    pinv: PseudoInverse,
}

/// Cyclic sum over slots 1, 2, 3 at a row index.
fn cyclic_sum(f: &dyn Fn(&[usize; 6]) -> f64, r: &[usize; 6]) -> f64 {
    let [x, y, u, w, c, d] = *r;
    f(&[x, y, u, w, c, d]) + f(&[x, u, w, y, c, d]) + f(&[x, w, y, u, c, d])
}

fn bianchi_system(space: &Space) -> Result<Arc<BianchiSystem>> {
    type Cache = Mutex<HashMap<Vec<i8>, Arc<BianchiSystem>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = space.signature().to_vec();
    if let Some(s) = cache.lock().expect("constraint cache poisoned").get(&key) {
        return Ok(s.clone());
    }
    let n = space.dim();
    let basis = basis_ck(space, 0)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (p..n).map(move |q| (p, q))).collect();
    let mut rows = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for u in y + 1..n {
                for w in u + 1..n {
                    for c in 0..n {
                        for d in c + 1..n {
                            rows.push([x, y, u, w, c, d]);
                        }
                    }
                }
            }
        }
    }
    let ncols = pairs.len() * basis.len();
    let mut m = nalgebra::DMatrix::<f64>::zeros(rows.len(), ncols);
    for (ri, r) in rows.iter().enumerate() {
        for (pi, &(p, q)) in pairs.iter().enumerate() {
            for (bi, b) in basis.iter().enumerate() {
                let f = |i: &[usize; 6]| {
                    if (i[0], i[1]) == (p, q) || (i[0], i[1]) == (q, p) {
                        b.get(&i[2..])
                    } else {
                        0.0
                    }
                };
                m[(ri, pi * basis.len() + bi)] = cyclic_sum(&f, r);
            }
        }
    }
    let system = Arc::new(BianchiSystem { pairs, rows, pinv: PseudoInverse::new(&m, RANK_CUTOFF) });
    cache.lock().expect("constraint cache poisoned").insert(key, system.clone());
    Ok(system)
}

/// Completes `(R, ∇R)` to a two-jet: `∇²R = ½ R_{x,y}·R + S + X/80` with
/// `S` from the constraint solve and `X` a random element of `C_2`.
pub fn complete_two_jet(r: Tensor, dr: Tensor, x: Option<&Tensor>) -> Result<TwoJet> {
    let a = curvature_action(&r, &r)? * 0.5;
    let s = solve_symmetric_part(r.space(), &a)?;
    let mut d2 = &a + &s;
    if let Some(x) = x {
        d2.axpy(1.0 / 80.0, x);
    }
    TwoJet::new(r, dr, d2)
}

/// Random two-jet with generic `R ∈ C_0`, `∇R ∈ C_1` and `∇²R`.
pub fn random_two_jet(space: &Space, seed: u64) -> Result<TwoJet> {
    check_dim(space)?;
    let mut rng = sub_seeds(seed);
    let r = random_ck(space, 0, rng.random());
    let dr = random_ck(space, 1, rng.random());
    let x = Tensor::random_with(space, 6, &mut rng);
    let x = crate::young::young_apply(&x, 2)?;
    complete_two_jet(r, dr, Some(&x))
}

/// Random section two-jet over `background` with a random section value.
pub fn random_section_jet(background: &Tensor, seed: u64) -> Result<SectionTwoJet> {
    let mut rng = sub_seeds(seed.wrapping_add(1));
    let rp = random_ck(background.space(), 0, rng.random());
    random_section_jet_with(background, rp, seed)
}

/// Random section two-jet with prescribed value `R′`: the first derivative
/// has random `C_0` slices, the second derivative is `½ R_{x,y}·R′` plus a
/// random element of `Sym²V*⊗C_0`.
pub fn random_section_jet_with(background: &Tensor, rp: Tensor, seed: u64) -> Result<SectionTwoJet> {
    let sp = background.space().clone();
    check_dim(&sp)?;
    let n = sp.dim();
    let mut rng = sub_seeds(seed.wrapping_add(2));
    let block = n.pow(4);
    let mut drp = Tensor::zeros(&sp, 5);
    for x in 0..n {
        let c = random_ck(&sp, 0, rng.random());
        drp.data_mut()[x * block..(x + 1) * block].copy_from_slice(c.data());
    }
    let mut d2 = curvature_action(background, &rp)? * 0.5;
    for p in 0..n {
        for q in p..n {
            let c = random_ck(&sp, 0, rng.random());
            for (x, y) in [(p, q), (q, p)] {
                let off = (x * n + y) * block;
                for (o, v) in d2.data_mut()[off..off + block].iter_mut().zip(c.data()) {
                    *o += v;
                }
                if p == q {
                    break;
                }
            }
        }
    }
    SectionTwoJet::new(background.clone(), rp, drp, d2)
}

/// The three traces of a second derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct JetTraces {
    /// `∇²_{x,y} ric(a, b) = −Σ ε_i ∇²_{x,y}R(a, e_i, b, e_i)`, stored `[x, y, a, b]`.
    pub hess_ric: Tensor,
    /// `∇_x δR(a, b, c) = −Σ ε_i ∇²_{x,e_i}R(e_i, a, b, c)`, stored `[x, a, b, c]`.
    pub div_der: Tensor,
    /// `∇*∇R = −Σ ε_i ∇²_{e_i,e_i}R`.
    pub rough: Tensor,
}

pub fn jet_traces(d2: &Tensor) -> JetTraces {
    JetTraces { hess_ric: -d2.tr(3, 5), div_der: -d2.tr(1, 2), rough: -d2.tr(0, 1) }
}

/// Symmetrized `k`-th derivative of the Jacobi operator, `k ∈ {0, 1, 2}`.
pub fn sym_jacobi(j: &TwoJet, k: usize) -> Result<SymBiform> {
    match k {
        0 => jacobi_form(&j.r, 0),
        1 => jacobi_form(&j.dr, 1),
        2 => jacobi_form(&j.d2r, 2),
        _ => Err(Error::Unsupported(format!("symmetrized derivative of order {k}"))),
    }
}

/// Convenience: the curvature tensor of a jet as a checked [`CurvTensor`].
pub fn curvature_of(j: &TwoJet) -> Result<CurvTensor> {
    CurvTensor::with_tol(j.r.clone(), 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::is_member_nk;

    #[test]
    fn random_jets_validate() {
        for sp in [Space::euclidean(3), Space::new(4, vec![1, -1, 1, 1]).unwrap()] {
            let j = random_two_jet(&sp, 11).unwrap();
            let rep = validate_two_jet(&j, 1e-8).unwrap();
            assert!(rep.pass(), "{rep:?}");
            assert_eq!(j, random_two_jet(&sp, 11).unwrap());
        }
    }

    #[test]
    fn constant_curvature_jet_is_valid_and_generic_r_is_not() {
        let sp = Space::euclidean(4);
        let gg = CurvTensor::constant_curvature(&sp).into_tensor();
        assert!(validate_two_jet(&TwoJet::symmetric(gg).unwrap(), 1e-12).unwrap().pass());
        assert!(validate_two_jet(&TwoJet::zeros(&sp), 1e-12).unwrap().pass());
        let r = random_ck(&sp, 0, 3);
        let rep = validate_two_jet(&TwoJet::symmetric(r).unwrap(), 1e-8).unwrap();
        assert!(!rep.get("ricci_identity").unwrap().pass);
    }

    #[test]
    fn section_jet_validates() {
        let sp = Space::euclidean(4);
        let r = random_ck(&sp, 0, 1);
        let sj = random_section_jet(&r, 4).unwrap();
        assert!(validate_section_jet(&sj, 1e-10).unwrap().pass());
    }

    #[test]
    fn sym_jacobi_lies_in_n_after_completion() {
        let sp = Space::euclidean(3);
        let j = random_two_jet(&sp, 5).unwrap();
        for k in 0..=2 {
            let h = sym_jacobi(&j, k).unwrap();
            assert_eq!(h.degree(), k + 2);
            assert!(is_member_nk(&h, 1e-10), "k = {k}");
        }
        let z = TwoJet::symmetric(random_ck(&sp, 0, 1)).unwrap();
        assert_eq!(sym_jacobi(&z, 1).unwrap().tensor().norm(), 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let j = random_two_jet(&Space::euclidean(3), 2).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.contains("\"d2R\""));
        let back: TwoJet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
    }
}
