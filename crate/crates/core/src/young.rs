//! Young symmetrizers, in particular the one of shape `(k+2, 2)` whose image
//! is the space `C_k` of linear `k`-jets of curvature tensors.
//!
//! Storage layout of a `C_k` element: the `k` derivative slots come first,
//! followed by the four curvature slots. Tableau labels `1..4` sit in
//! storage slots `k..k+3`, labels `5..k+4` in storage slots `0..k-1`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{orthonormal_basis, RANK_CUTOFF};
use crate::tensor::{perm_sign, permutations, Space, Tensor};

/// Composition order of the symmetrizer.
///
/// `ColumnsLast` symmetrizes the rows first and antisymmetrizes the columns
/// afterwards: `Y = Σ_q sgn(q) q · Σ_p p`. It is the order for which `Y` acts
/// on `C_0` by the factor 12.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum YoungOrder {
    #[default]
    ColumnsLast,
    RowsLast,
}

/// Largest ambient size `n^(k+4)` accepted by [`basis_ck`].
pub const BASIS_BUDGET: usize = 100_000;

/// A Young tableau whose boxes are storage slots of a tensor. Slots that
/// appear in no row are passive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    valence: usize,
    rows: Vec<Vec<usize>>,
}

impl Tableau {
    pub fn new(valence: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; valence];
        for row in &rows {
            for &s in row {
                if s >= valence || seen[s] {
                    return invalid(format!("tableau slot {s} repeated or out of range"));
                }
                seen[s] = true;
            }
        }
        if rows.windows(2).any(|w| w[0].len() < w[1].len()) {
            return invalid("tableau rows must have non-increasing lengths");
        }
        Ok(Tableau { valence, rows })
    }

    /// The `(k+2, 2)` tableau on valence `k + 4`.
    pub fn curvature(k: usize) -> Self {
        let mut first = vec![k, k + 2];
        first.extend(0..k);
        Tableau { valence: k + 4, rows: vec![first, vec![k + 1, k + 3]] }
    }

    pub fn valence(&self) -> usize {
        self.valence
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn columns(&self) -> Vec<Vec<usize>> {
        let width = self.rows.first().map_or(0, Vec::len);
        (0..width)
            .map(|c| self.rows.iter().filter_map(|r| r.get(c).copied()).collect())
            .collect()
    }

    pub fn apply(&self, t: &Tensor) -> Result<Tensor> {
        self.apply_with(t, YoungOrder::default())
    }

    /// Unnormalized signed sum over row and column groups.
    pub fn apply_with(&self, t: &Tensor, order: YoungOrder) -> Result<Tensor> {
        if t.valence() != self.valence {
            return invalid(format!(
                "tableau on valence {} applied to valence {}",
                self.valence,
                t.valence()
            ));
        }
        let cols = self.columns();
        let rows_then = |x: Tensor| self.rows.iter().fold(x, |acc, r| group_sum(&acc, r, false));
        let cols_then = |x: Tensor| cols.iter().fold(x, |acc, c| group_sum(&acc, c, true));
        Ok(match order {
            YoungOrder::ColumnsLast => cols_then(rows_then(t.clone())),
            YoungOrder::RowsLast => rows_then(cols_then(t.clone())),
        })
    }
}

/// `Σ_{p ∈ S_slots} (sgn p)? p · t`, unnormalized.
fn group_sum(t: &Tensor, slots: &[usize], signed: bool) -> Tensor {
    if slots.len() < 2 {
        return t.clone();
    }
    let mut out = Tensor::zeros(t.space(), t.valence());
    let mut full: Vec<usize> = (0..t.valence()).collect();
    for p in permutations(slots.len()) {
        for (a, &b) in p.iter().enumerate() {
            full[slots[a]] = slots[b];
        }
        let w = if signed { perm_sign(&p) } else { 1.0 };
        out.axpy(w, &t.reindex(t.valence(), &full));
    }
    out
}

/// The factor `2(k+3)(k+2)k!` by which the `(k+2,2)` symmetrizer acts on `C_k`.
pub fn eigenvalue(k: usize) -> f64 {
    let kf: f64 = (1..=k).map(|i| i as f64).product();
    2.0 * (k as f64 + 3.0) * (k as f64 + 2.0) * kf
}

pub fn young_apply(t: &Tensor, k: usize) -> Result<Tensor> {
    Tableau::curvature(k).apply(t)
}

pub fn young_apply_with(t: &Tensor, k: usize, order: YoungOrder) -> Result<Tensor> {
    Tableau::curvature(k).apply_with(t, order)
}

/// A random element of `C_k`: the normalized symmetrizer applied to a random tensor.
pub fn random_ck(space: &Space, k: usize, seed: u64) -> Tensor {
    let t = Tensor::random(space, k + 4, seed);
    young_apply(&t, k).expect("valence matches") * (1.0 / eigenvalue(k))
}

/// Residual of the algebraic curvature tensor conditions on slots
/// `off..off+4`, relative to `|t|`.
pub(crate) fn c0_residual_at(t: &Tensor, off: usize) -> f64 {
    let v = t.valence();
    let scale = t.norm();
    if scale == 0.0 {
        return 0.0;
    }
    let swap = |pairs: &[(usize, usize)]| {
        let mut p: Vec<usize> = (0..v).collect();
        for &(a, b) in pairs {
            p.swap(off + a, off + b);
        }
        t.reindex(v, &p)
    };
    let anti12 = t + &swap(&[(0, 1)]);
    let anti34 = t + &swap(&[(2, 3)]);
    let pair = t - &swap(&[(0, 2), (1, 3)]);
    let bianchi = t.cyclic_sum([off + 1, off + 2, off + 3]);
    [anti12, anti34, pair, bianchi].iter().map(Tensor::norm).fold(0.0, f64::max) / scale
}

/// Largest relative violation of the linear conditions defining `C_k`.
pub fn ck_residual(t: &Tensor, k: usize) -> Result<f64> {
    if k > 2 {
        return Err(Error::Unsupported(format!("membership test for k = {k}")));
    }
    if t.valence() != k + 4 {
        return invalid(format!("C_{k} lives in valence {}, got {}", k + 4, t.valence()));
    }
    let scale = t.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(match k {
        0 => c0_residual_at(t, 0),
        1 => c0_residual_at(t, 1).max(t.cyclic_sum([0, 1, 2]).norm() / scale),
        _ => {
            let sym = (t - &t.perm(&[1, 0, 2, 3, 4, 5])).norm() / scale;
            let bianchi = t.cyclic_sum([1, 2, 3]).norm() / scale;
            c0_residual_at(t, 2).max(sym).max(bianchi)
        }
    })
}

pub fn is_member_ck(t: &Tensor, k: usize, tol: f64) -> Result<bool> {
    Ok(ck_residual(t, k)? <= tol)
}

/// Hook-content dimension of the `GL(n)` irreducible of shape `(k+2, 2)`.
pub fn dim_ck(n: usize, k: usize) -> usize {
    let n = n as f64;
    let len1 = k + 2;
    let mut num = 1.0;
    let mut den = 1.0;
    for j in 0..len1 {
        let leg = if j < 2 { 1.0 } else { 0.0 };
        num *= n + j as f64;
        den *= (len1 - j - 1) as f64 + leg + 1.0;
    }
    for j in 0..2 {
        num *= n + j as f64 - 1.0;
        den *= (2 - j) as f64;
    }
    (num / den).round() as usize
}

/// Non-decreasing index tuples of length `len` over `0..n`.
pub(crate) fn multisets(n: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, len, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, len, 0, &mut Vec::new(), &mut out);
    out
}

type BasisCache = Mutex<HashMap<(Vec<i8>, usize), Arc<Vec<Tensor>>>>;

/// Orthonormal basis of `C_k` (Euclidean coefficient inner product).
///
/// Generated by applying the symmetrizer to coordinate unit tensors, one per
/// orbit of the row group, and orthonormalizing with a relative cutoff.
/// Results are memoized per signature and `k`.
pub fn basis_ck(space: &Space, k: usize) -> Result<Vec<Tensor>> {
    static CACHE: OnceLock<BasisCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (space.signature().to_vec(), k);
    if let Some(b) = cache.lock().expect("basis cache poisoned").get(&key) {
        return Ok(b.as_ref().clone());
    }
    let basis = Arc::new(compute_basis_ck(space, k)?);
    cache.lock().expect("basis cache poisoned").insert(key, basis.clone());
    Ok(basis.as_ref().clone())
}

fn compute_basis_ck(space: &Space, k: usize) -> Result<Vec<Tensor>> {
    if k > 2 {
        return Err(Error::Unsupported(format!("basis for k = {k}")));
    }
    let n = space.dim();
    let size = n.pow(k as u32 + 4);
    if size > BASIS_BUDGET {
        return Err(Error::ResourceLimit(format!(
            "C_{k} over dimension {n} has ambient size {size} > {BASIS_BUDGET}"
        )));
    }
    let tab = Tableau::curvature(k);
    let (r1, r2) = (&tab.rows()[0], &tab.rows()[1]);
    let firsts = multisets(n, r1.len());
    let seconds = multisets(n, r2.len());
    let candidates = firsts.iter().flat_map(|a| {
        let tab = &tab;
        seconds.iter().map(move |b| {
            let mut idx = vec![0usize; k + 4];
            for (s, &i) in r1.iter().zip(a) {
                idx[*s] = i;
            }
            for (s, &i) in r2.iter().zip(b) {
                idx[*s] = i;
            }
            let mut e = Tensor::zeros(space, k + 4);
            e.set(&idx, 1.0);
            tab.apply(&e).expect("valence matches").into_data()
        })
    });
    let basis = orthonormal_basis(candidates, RANK_CUTOFF);
    basis
        .into_iter()
        .map(|v| Tensor::from_data(space, k + 4, v))
        .collect()
}
