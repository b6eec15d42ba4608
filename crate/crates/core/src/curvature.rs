//! Algebraic curvature tensors and the operators acting on them.
//!
//! Conventions:
//! - `ric(x, y) = −Σ ε_i R(x, e_i, y, e_i)`, so `ric(g⊼g) = −2(n−1) g`.
//! - `R_{x,y}` is the endomorphism with `g(R_{x,y} z, w) = R(x, y, z, w)`.
//! - A skew endomorphism acts on tensors by `(B·A)(z_1, …) = −Σ_i A(…, B z_i, …)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::symbiform::SymBiform;
use crate::tensor::{for_each_index, Space, Tensor};
use crate::linalg::{columns_to_matrix, orthonormal_basis, rank, RANK_CUTOFF};
use crate::young::{c0_residual_at, ck_residual, multisets, random_ck};

/// Relative tolerance for structural membership checks on inputs.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// A valence-4 tensor with the symmetries of a Riemann tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Tensor", into = "Tensor")]
pub struct CurvTensor(Tensor);

impl TryFrom<Tensor> for CurvTensor {
    type Error = Error;
    fn try_from(t: Tensor) -> Result<Self> {
        CurvTensor::new(t)
    }
}

impl From<CurvTensor> for Tensor {
    fn from(r: CurvTensor) -> Tensor {
        r.0
    }
}

impl AsRef<Tensor> for CurvTensor {
    fn as_ref(&self) -> &Tensor {
        &self.0
    }
}

impl CurvTensor {
    /// Checks the curvature symmetries to [`MEMBERSHIP_TOL`].
    pub fn new(t: Tensor) -> Result<Self> {
        CurvTensor::with_tol(t, MEMBERSHIP_TOL)
    }

    pub fn with_tol(t: Tensor, tol: f64) -> Result<Self> {
        if t.valence() != 4 {
            return invalid(format!("curvature tensor needs valence 4, got {}", t.valence()));
        }
        let res = c0_residual_at(&t, 0);
        if res > tol {
            return invalid(format!("not an algebraic curvature tensor (residual {res:.3e})"));
        }
        Ok(CurvTensor(t))
    }

    pub fn zeros(space: &Space) -> Self {
        CurvTensor(Tensor::zeros(space, 4))
    }

    pub fn random(space: &Space, seed: u64) -> Self {
        CurvTensor(random_ck(space, 0, seed))
    }

    /// `g⊼g = 2(g_ac g_bd − g_ad g_bc)`.
    pub fn constant_curvature(space: &Space) -> Self {
        let g = Tensor::metric(space);
        CurvTensor(kn_pair(&g, &g))
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }

    pub fn space(&self) -> &Space {
        self.0.space()
    }
}

/// Ricci tensor together with its trace.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciData {
    pub ric: Tensor,
    pub scalar: f64,
}

fn need_valence(t: &Tensor, v: usize, what: &str) -> Result<()> {
    if t.valence() != v {
        return invalid(format!("{what} needs valence {v}, got {}", t.valence()));
    }
    Ok(())
}

fn same_space(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.space() != b.space() {
        return invalid("operands live over different spaces");
    }
    Ok(())
}

pub fn ricci(r: &Tensor) -> Result<RicciData> {
    need_valence(r, 4, "ricci")?;
    let ric = -r.tr(1, 3);
    let scalar = ric.tr(0, 1).data()[0];
    Ok(RicciData { ric, scalar })
}

/// Four-term alternating sum over the trailing slots of an arbitrary
/// valence-`k+4` tensor `h[x.., u, v, w, z]`:
/// `h(x..,a,c;b,d) − h(x..,b,c;a,d) − h(x..,a,d;b,c) + h(x..,b,d;a,c)`.
pub(crate) fn kn_raw(h: &Tensor) -> Tensor {
    let v = h.valence();
    let k = v - 4;
    let term = |tail: [usize; 4]| {
        let mut map: Vec<usize> = (0..k).collect();
        map.extend(tail.iter().map(|t| k + t));
        h.reindex(v, &map)
    };
    let mut out = term([0, 2, 1, 3]);
    out -= &term([1, 2, 0, 3]);
    out -= &term([0, 3, 1, 2]);
    out += &term([1, 3, 0, 2]);
    out
}

/// Kulkarni–Nomizu product of a biform of degree `k + 2`, with output in
/// `C_k` (derivative slots first).
pub fn kulkarni(h: &SymBiform) -> Result<Tensor> {
    if h.degree() < 2 {
        return invalid("Kulkarni–Nomizu product needs a biform of degree at least 2");
    }
    Ok(kn_raw(h.tensor()))
}

/// `h1 ⊼ h2` for two symmetric bilinear forms.
pub fn kn_pair(h1: &Tensor, h2: &Tensor) -> Tensor {
    kn_raw(&h1.outer(h2))
}

/// Scalar, traceless-Ricci and Weyl parts of a curvature tensor.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub scalar_part: Tensor,
    pub ricci_part: Tensor,
    pub weyl: Tensor,
}

/// `R = −s/(2n(n−1)) g⊼g − 1/(n−2) g⊼ric₀ + W` with `ricci(W) = 0`.
pub fn decompose(r: &Tensor) -> Result<Decomposition> {
    need_valence(r, 4, "decompose")?;
    let n = r.dim();
    if n < 3 {
        return Err(Error::Unsupported("curvature decomposition needs n ≥ 3".into()));
    }
    let nf = n as f64;
    let g = Tensor::metric(r.space());
    let RicciData { ric, scalar } = ricci(r)?;
    let ric0 = &ric - &(&g * (scalar / nf));
    let scalar_part = kn_pair(&g, &g) * (-scalar / (2.0 * nf * (nf - 1.0)));
    let ricci_part = kn_pair(&g, &ric0) * (-1.0 / (nf - 2.0));
    let weyl = &(r - &scalar_part) - &ricci_part;
    Ok(Decomposition { scalar_part, ricci_part, weyl })
}

/// Curvature endomorphism `R_{x,y}` as a matrix `B[m][c]`, the `m`-th
/// component of `R_{x,y} e_c`.
pub fn endomorphism(r: &Tensor, x: usize, y: usize) -> Tensor {
    let sp = r.space();
    Tensor::from_fn(sp, 2, |mc| sp.eps(mc[0]) * r.get(&[x, y, mc[1], mc[0]]))
}

/// `B·A` without the skewness check.
pub(crate) fn derive(b: &Tensor, a: &Tensor) -> Tensor {
    let n = a.dim();
    let v = a.valence();
    let strides = a.strides();
    let (bd, ad) = (b.data(), a.data());
    let mut out = Tensor::zeros(a.space(), v);
    let od = out.data_mut();
    for_each_index(n, v, |j, lin| {
        let mut acc = 0.0;
        for i in 0..v {
            let base = lin - j[i] * strides[i];
            for m in 0..n {
                acc += bd[m * n + j[i]] * ad[base + m * strides[i]];
            }
        }
        od[lin] = -acc;
    });
    out
}

/// Derivation action of a skew-adjoint endomorphism `B` (given as `B[m][c]`)
/// on a tensor.
pub fn skew_action(b: &Tensor, a: &Tensor) -> Result<Tensor> {
    need_valence(b, 2, "endomorphism")?;
    same_space(a, b)?;
    let sp = b.space();
    // lowered form ε_m B[m][c] must be antisymmetric
    let low = Tensor::from_fn(sp, 2, |cm| sp.eps(cm[1]) * b.get(&[cm[1], cm[0]]));
    let defect = (&low + &low.perm(&[1, 0])).norm();
    if defect > 1e-10 * low.norm().max(1e-300) {
        return invalid("endomorphism is not skew-adjoint");
    }
    Ok(derive(b, a))
}

/// `RA[x, y, …] = (R_{x,y}·A)(…)`.
pub fn curvature_action(r: &Tensor, a: &Tensor) -> Result<Tensor> {
    need_valence(r, 4, "curvature action")?;
    same_space(r, a)?;
    let sp = r.space();
    let n = sp.dim();
    let v = a.valence();
    let strides = a.strides();
    let block = n.pow(v as u32);
    let eps: Vec<f64> = (0..n).map(|i| sp.eps(i)).collect();
    let (rd, ad) = (r.data(), a.data());
    let mut out = Tensor::zeros(sp, v + 2);
    let od = out.data_mut();
    for_each_index(n, v, |j, lin| {
        for xy in 0..n * n {
            let mut acc = 0.0;
            for i in 0..v {
                let base = lin - j[i] * strides[i];
                let roff = (xy * n + j[i]) * n;
                for m in 0..n {
                    acc += eps[m] * rd[roff + m] * ad[base + m * strides[i]];
                }
            }
            od[xy * block + lin] = -acc;
        }
    });
    Ok(out)
}

/// `R*A(x_1, …) = −Σ_i Σ_j (R_{x_i, e_j}·A)(…, e_j, …)` with `e_j` in slot `i`.
pub fn star_action(r: &Tensor, a: &Tensor) -> Result<Tensor> {
    let p = curvature_action(r, a)?;
    let sp = a.space();
    let n = sp.dim();
    let v = a.valence();
    let strides = a.strides();
    let block = n.pow(v as u32);
    let pd = p.data();
    let mut out = Tensor::zeros(sp, v);
    let od = out.data_mut();
    for_each_index(n, v, |j, lin| {
        let mut acc = 0.0;
        for i in 0..v {
            let base = lin - j[i] * strides[i];
            for e in 0..n {
                acc += sp.eps(e) * pd[(j[i] * n + e) * block + base + e * strides[i]];
            }
        }
        od[lin] = -acc;
    });
    Ok(out)
}

/// Both sides of `Σ_i ε_i (R*R′)(x, e_i, y, e_i) = −(R*ric′)(x, y)`.
pub fn ricci_of_star(r: &Tensor, rp: &Tensor) -> Result<(Tensor, Tensor)> {
    let lhs = star_action(r, rp)?.tr(1, 3);
    let rhs = -star_action(r, &ricci(rp)?.ric)?;
    Ok((lhs, rhs))
}

/// `δ_x R(y, z) = −Σ_i ε_i ∇_{e_i} R(e_i, x, y, z)`, output `[x, y, z]`.
pub fn divergence(dr: &Tensor) -> Result<Tensor> {
    let res = ck_residual(dr, 1)?;
    if res > 1e-8 {
        return invalid(format!("derivative is not in C_1 (residual {res:.3e})"));
    }
    Ok(-dr.tr(0, 1))
}

/// `∇_x ric(a, b)` from `∇R`, output `[x, a, b]`.
pub fn d_ric(dr: &Tensor) -> Result<Tensor> {
    need_valence(dr, 5, "derivative of Ricci")?;
    Ok(-dr.tr(2, 4))
}

/// `d∇ric(x, y, z) = ∇_x ric(y, z) − ∇_y ric(x, z)`.
pub fn exterior_d_ric(dr: &Tensor) -> Result<Tensor> {
    let dric = d_ric(dr)?;
    Ok(&dric - &dric.perm(&[1, 0, 2]))
}

/// Membership in `N_k`: the symmetrization over the `k` symmetric slots and
/// the first bilinear slot vanishes, relative to `|h|`.
pub fn is_member_nk(h: &SymBiform, tol: f64) -> bool {
    let t = h.tensor();
    let scale = t.norm();
    if scale == 0.0 {
        return true;
    }
    let slots: Vec<usize> = (0..=h.degree()).collect();
    let s = t.symmetrize(&slots).expect("slots in range");
    s.norm() <= tol * scale
}

/// Basis of `N_m`: biforms of degree `m` whose symmetrization over the
/// `m` symmetric slots and the first bilinear slot vanishes.
pub fn basis_nk(space: &Space, m: usize) -> Result<Vec<SymBiform>> {
    let n = space.dim();
    let size = n.pow(m as u32 + 2);
    if size > crate::young::BASIS_BUDGET {
        return Err(Error::ResourceLimit(format!("N_{m} over dimension {n} has ambient size {size}")));
    }
    let heads = multisets(n, m);
    let tails = multisets(n, 2);
    let candidates = heads.iter().flat_map(|a| {
        tails.iter().map(move |b| {
            let mut e = Tensor::zeros(space, m + 2);
            let idx: Vec<usize> = a.iter().chain(b).copied().collect();
            e.set(&idx, 1.0);
            SymBiform::new(e, m).expect("valence matches").into_tensor().into_data()
        })
    });
    let sym_basis = orthonormal_basis(candidates, RANK_CUTOFF);
    let slots: Vec<usize> = (0..=m).collect();
    let images: Vec<Vec<f64>> = sym_basis
        .iter()
        .map(|v| {
            let t = Tensor::from_data(space, m + 2, v.clone()).expect("length matches");
            t.symmetrize(&slots).expect("slots in range").into_data()
        })
        .collect();
    let a = columns_to_matrix(size, &images);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= RANK_CUTOFF * smax {
            let mut t = vec![0.0; size];
            for (c, b) in v_t.row(i).iter().zip(&sym_basis) {
                t.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
            }
            out.push(SymBiform::new(Tensor::from_data(space, m + 2, t)?, m)?);
        }
    }
    Ok(out)
}

/// `(dim N_m, rank of ⊼ on N_m)`; equal values mean a trivial kernel.
pub fn kulkarni_rank_on_nk(space: &Space, m: usize) -> Result<(usize, usize)> {
    if m < 2 {
        return invalid("Kulkarni–Nomizu product needs degree at least 2");
    }
    let basis = basis_nk(space, m)?;
    let cols: Vec<Vec<f64>> = basis.iter().map(|h| kn_raw(h.tensor()).into_data()).collect();
    if cols.is_empty() {
        return Ok((0, 0));
    }
    let a = columns_to_matrix(cols[0].len(), &cols);
    Ok((basis.len(), rank(&a, RANK_CUTOFF)))
}

/// Symmetrized Jacobi form of a tensor `D[ξ_1..ξ_k, a, b, c, d]`: the
/// symmetrization over `ξ_1..ξ_{k+2}` of `D(ξ_1..ξ_k, x, ξ_{k+1}, ξ_{k+2}, y)`.
pub fn jacobi_form(d: &Tensor, k: usize) -> Result<SymBiform> {
    need_valence(d, k + 4, "Jacobi form")?;
    let mut map: Vec<usize> = (0..k).collect();
    map.extend([k + 2, k, k + 1, k + 3]);
    SymBiform::new(d.reindex(k + 4, &map), k + 2)
}

/// Symmetrization of a valence-4 tensor over slots `(0, 2)` and `(1, 3)`;
/// two tensors agree on all diagonals `T(x, y, x, y)` iff these agree.
pub fn jacobi_diagonal(t: &Tensor) -> Tensor {
    let u = (t + &t.perm(&[2, 1, 0, 3])) * 0.5;
    (&u + &u.perm(&[0, 3, 2, 1])) * 0.5
}

/// `S[x, a, b, c] = Σ_i ε_i (R_{x, e_i}·R′)(e_i, a, b, c)`.
pub fn star_contraction(r: &Tensor, rp: &Tensor) -> Result<Tensor> {
    Ok(curvature_action(r, rp)?.tr(1, 2))
}

/// Six-term expression for `R*R′`:
/// `−{2S − 2S(x2,x1,x3,x4) + Q′(x2,x4,x1,x3) − Q′(x2,x3,x1,x4) + Q′(x1,x3,x2,x4) − Q′(x1,x4,x2,x3)}`,
/// with `S = star_contraction(R, R′)` and `Q′ = R′_{·,·}·ric(R)`.
pub fn rr_six_term(r: &Tensor, rp: &Tensor) -> Result<Tensor> {
    let s = star_contraction(r, rp)?;
    let q = curvature_action(rp, &ricci(r)?.ric)?;
    let mut acc = &s * 2.0 - &s.perm(&[1, 0, 2, 3]) * 2.0;
    acc += &q.reindex(4, &[1, 3, 0, 2]);
    acc -= &q.reindex(4, &[1, 2, 0, 3]);
    acc += &q.reindex(4, &[0, 2, 1, 3]);
    acc -= &q.reindex(4, &[0, 3, 1, 2]);
    Ok(-acc)
}

/// Jacobi-operator expression `−2 R′_{x,y}·ric(x, y) − 4 S(x, y, x, y)`
/// as a full tensor (compare through [`jacobi_diagonal`]).
pub fn rr_jacobi_rhs(r: &Tensor, rp: &Tensor) -> Result<Tensor> {
    let s = star_contraction(r, rp)?;
    let q = curvature_action(rp, &ricci(r)?.ric)?;
    Ok(&q * -2.0 - &s * 4.0)
}

/// Factor by which `R*` acts on 1-forms for the two candidate round-sphere
/// normalizations `−½ g⊼g` and `−g⊼g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphereFactors {
    pub half_normalization: f64,
    pub full_normalization: f64,
}

pub fn sphere_star_factors(n: usize) -> SphereFactors {
    let sp = Space::euclidean(n);
    let gg = CurvTensor::constant_curvature(&sp).into_tensor();
    let alpha = Tensor::random(&sp, 1, 0);
    let factor = |c: f64| {
        let out = star_action(&(&gg * c), &alpha).expect("valence 4");
        out.dot(&alpha) / alpha.dot(&alpha)
    };
    SphereFactors { half_normalization: factor(-0.5), full_normalization: factor(-1.0) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz4() -> Space {
        Space::new(4, vec![1, -1, 1, 1]).unwrap()
    }

    #[test]
    fn constant_curvature_values() {
        let sp = Space::euclidean(3);
        let gg = CurvTensor::constant_curvature(&sp);
        let t = gg.tensor();
        assert_eq!(t.get(&[0, 1, 0, 1]), 2.0);
        assert_eq!(t.get(&[0, 1, 1, 0]), -2.0);
        assert_eq!(t.get(&[0, 0, 1, 1]), 0.0);
        let RicciData { ric, scalar } = ricci(t).unwrap();
        assert!(ric.rel_diff(&(Tensor::metric(&sp) * -4.0)) < 1e-15);
        assert_eq!(scalar, -12.0);
        assert!(CurvTensor::new(Tensor::random(&sp, 4, 0)).is_err());
    }

    #[test]
    fn decomposition_round_trip() {
        for sp in [Space::euclidean(4), lorentz4(), Space::euclidean(5)] {
            let r = CurvTensor::random(&sp, 3).into_tensor();
            let d = decompose(&r).unwrap();
            let sum = &(&d.scalar_part + &d.ricci_part) + &d.weyl;
            assert!(sum.rel_diff(&r) < 1e-13);
            assert!(ricci(&d.weyl).unwrap().ric.norm() < 1e-12 * r.norm());
            assert!(ricci(&d.ricci_part).unwrap().scalar.abs() < 1e-12 * r.norm());
        }
        let gg = CurvTensor::constant_curvature(&Space::euclidean(3)).into_tensor();
        let d = decompose(&gg).unwrap();
        assert!(d.weyl.norm() < 1e-13 && d.ricci_part.norm() < 1e-13);
        assert!(matches!(decompose(&Tensor::zeros(&Space::euclidean(2), 4)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn skew_action_rules() {
        let sp = lorentz4();
        let r = CurvTensor::random(&sp, 1).into_tensor();
        let b = endomorphism(&r, 0, 2);
        let g = Tensor::metric(&sp);
        assert!(skew_action(&b, &g).unwrap().norm() < 1e-13);
        let gg = CurvTensor::constant_curvature(&sp).into_tensor();
        assert!(skew_action(&b, &gg).unwrap().norm() < 1e-12);
        let (x, y) = (Tensor::random(&sp, 1, 2), Tensor::random(&sp, 2, 3));
        let lhs = skew_action(&b, &x.outer(&y)).unwrap();
        let rhs = &skew_action(&b, &x).unwrap().outer(&y) + &x.outer(&skew_action(&b, &y).unwrap());
        assert!(lhs.rel_diff(&rhs) < 1e-13);
        assert!(skew_action(&Tensor::random(&sp, 2, 4), &g).is_err());
    }

    #[test]
    fn star_on_one_forms_is_ricci() {
        let sp = lorentz4();
        let r = CurvTensor::random(&sp, 5).into_tensor();
        let alpha = Tensor::random(&sp, 1, 6);
        let ric = ricci(&r).unwrap().ric;
        // α(Ric x) with Ric x = Σ_m ε_m ric(x, e_m) e_m
        let expect = Tensor::from_fn(&sp, 1, |x| {
            (0..4).map(|m| sp.eps(m) * ric.get(&[x[0], m]) * alpha.get(&[m])).sum()
        });
        assert!(star_action(&r, &alpha).unwrap().rel_diff(&expect) < 1e-13);
    }

    #[test]
    fn star_preserves_curvature_symmetries() {
        let sp = Space::euclidean(4);
        let r = CurvTensor::random(&sp, 7).into_tensor();
        let rp = CurvTensor::random(&sp, 8).into_tensor();
        let s = star_action(&r, &rp).unwrap();
        assert!(CurvTensor::with_tol(s, 1e-12).is_ok());
        let (lhs, rhs) = ricci_of_star(&r, &rp).unwrap();
        assert!(lhs.rel_diff(&rhs) < 1e-12);
    }

    #[test]
    fn divergence_and_contracted_bianchi() {
        let sp = Space::euclidean(4);
        let dr = random_ck(&sp, 1, 9);
        // δ_z R(x, y) = d∇ric(x, y, z)
        let div = divergence(&dr).unwrap().perm(&[2, 0, 1]);
        let d = exterior_d_ric(&dr).unwrap();
        assert!(div.rel_diff(&d) < 1e-12, "{}", div.rel_diff(&d));
        assert!(divergence(&Tensor::random(&sp, 5, 1)).is_err());
    }

    #[test]
    fn jacobi_form_of_constant_curvature() {
        let sp = Space::euclidean(3);
        let gg = CurvTensor::constant_curvature(&sp).into_tensor();
        let j = jacobi_form(&gg, 0).unwrap();
        let xi = [0.3, -1.0, 0.7];
        let x = [1.2, 0.1, -0.4];
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        // R(x, ξ, ξ, x) for g⊼g = 2(g_ac g_bd − g_ad g_bc)
        let expect = 2.0 * (dot(&x, &xi).powi(2) - dot(&x, &x) * dot(&xi, &xi));
        assert!((j.diagonal(&xi, &x, &x) - expect).abs() < 1e-12);
        assert!(is_member_nk(&j, 1e-12));
        let g = SymBiform::new(Tensor::metric(&sp), 0).unwrap();
        assert!(!is_member_nk(&g, 1e-6));
    }

    #[test]
    fn kulkarni_injective_on_nk() {
        let sp = Space::euclidean(3);
        for (k, dim) in [(0, 6), (1, 15)] {
            let (d, r) = kulkarni_rank_on_nk(&sp, k + 2).unwrap();
            assert_eq!((d, r), (dim, dim));
        }
    }

    #[test]
    fn sphere_factors_reported() {
        let f = sphere_star_factors(4);
        assert!((f.half_normalization - 3.0).abs() < 1e-12);
        assert!((f.full_normalization - 6.0).abs() < 1e-12);
    }
}
