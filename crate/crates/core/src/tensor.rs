//! Dense covariant tensors over a pseudo-Euclidean space.
//!
//! Storage is row-major with slot 0 varying slowest. The metric is diagonal,
//! `g(e_i, e_j) = ε_i δ_ij`, and every metric trace carries the signs `ε_i`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Pseudo-Euclidean vector space `(ℝⁿ, diag(ε))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpaceDoc", into = "SpaceDoc")]
pub struct Space {
    dim: usize,
    signature: Vec<i8>,
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    dim: usize,
    signature: Vec<i8>,
}

impl TryFrom<SpaceDoc> for Space {
    type Error = Error;
    fn try_from(doc: SpaceDoc) -> Result<Self> {
        Space::new(doc.dim, doc.signature)
    }
}

impl From<Space> for SpaceDoc {
    fn from(s: Space) -> Self {
        SpaceDoc { dim: s.dim, signature: s.signature }
    }
}

impl Space {
    pub fn new(dim: usize, signature: Vec<i8>) -> Result<Self> {
        if dim < 2 {
            return invalid(format!("dimension must be at least 2, got {dim}"));
        }
        if signature.len() != dim {
            return invalid(format!(
                "signature has {} entries but dimension is {dim}",
                signature.len()
            ));
        }
        if signature.iter().any(|&s| s != 1 && s != -1) {
            return invalid("signature entries must be +1 or -1");
        }
        Ok(Space { dim, signature })
    }

    /// All-plus signature.
    pub fn euclidean(dim: usize) -> Self {
        Space::new(dim, vec![1; dim]).expect("valid euclidean space")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    /// `ε_i = g(e_i, e_i)`.
    #[inline]
    pub fn eps(&self, i: usize) -> f64 {
        f64::from(self.signature[i])
    }

    pub fn is_riemannian(&self) -> bool {
        self.signature.iter().all(|&s| s == 1)
    }
}

/// Dense real covariant tensor of valence `v` over a [`Space`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorDoc", into = "TensorDoc")]
pub struct Tensor {
    space: Space,
    valence: usize,
    data: Vec<f64>,
}

/// Wire format of a tensor.
#[derive(Serialize, Deserialize)]
struct TensorDoc {
    dim: usize,
    signature: Vec<i8>,
    valence: usize,
    data: Vec<f64>,
}

impl TryFrom<TensorDoc> for Tensor {
    type Error = Error;
    fn try_from(doc: TensorDoc) -> Result<Self> {
        let space = Space::new(doc.dim, doc.signature)?;
        Tensor::from_data(&space, doc.valence, doc.data)
    }
}

impl From<Tensor> for TensorDoc {
    fn from(t: Tensor) -> Self {
        TensorDoc {
            dim: t.space.dim,
            signature: t.space.signature,
            valence: t.valence,
            data: t.data,
        }
    }
}

/// Calls `f(index, linear_offset)` for every multi-index in row-major order.
pub(crate) fn for_each_index(n: usize, valence: usize, mut f: impl FnMut(&[usize], usize)) {
    let total = n.pow(valence as u32);
    let mut idx = vec![0usize; valence];
    for lin in 0..total {
        f(&idx, lin);
        for s in (0..valence).rev() {
            idx[s] += 1;
            if idx[s] < n {
                break;
            }
            idx[s] = 0;
        }
    }
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Sign of a permutation given in one-line notation.
pub(crate) fn perm_sign(p: &[usize]) -> f64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1.0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn check_perm(perm: &[usize], valence: usize) -> Result<()> {
    if perm.len() != valence {
        return invalid(format!(
            "permutation of length {} applied to valence {valence}",
            perm.len()
        ));
    }
    let mut seen = vec![false; valence];
    for &p in perm {
        if p >= valence || seen[p] {
            return invalid("permutation is not a bijection on slots");
        }
        seen[p] = true;
    }
    Ok(())
}

impl Tensor {
    pub fn zeros(space: &Space, valence: usize) -> Self {
        let len = space.dim.pow(valence as u32);
        Tensor { space: space.clone(), valence, data: vec![0.0; len] }
    }

    pub fn scalar(space: &Space, value: f64) -> Self {
        Tensor { space: space.clone(), valence: 0, data: vec![value] }
    }

    pub fn from_data(space: &Space, valence: usize, data: Vec<f64>) -> Result<Self> {
        let len = space.dim.pow(valence as u32);
        if data.len() != len {
            return invalid(format!(
                "valence {valence} over dimension {} needs {len} entries, got {}",
                space.dim,
                data.len()
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return invalid("tensor entries must be finite");
        }
        Ok(Tensor { space: space.clone(), valence, data })
    }

    pub fn from_fn(space: &Space, valence: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Tensor::zeros(space, valence);
        let data = &mut t.data;
        for_each_index(space.dim, valence, |idx, lin| data[lin] = f(idx));
        t
    }

    /// The metric `g = diag(ε)`.
    pub fn metric(space: &Space) -> Self {
        Tensor::from_fn(space, 2, |i| if i[0] == i[1] { space.eps(i[0]) } else { 0.0 })
    }

    /// Deterministic tensor with i.i.d. standard normal entries.
    pub fn random(space: &Space, valence: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor::random_with(space, valence, &mut rng)
    }

    pub fn random_with(space: &Space, valence: usize, rng: &mut impl rand::Rng) -> Self {
        let mut t = Tensor::zeros(space, valence);
        for x in &mut t.data {
            *x = StandardNormal.sample(rng);
        }
        t
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn valence(&self) -> usize {
        self.valence
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.valence);
        idx.iter().fold(0, |acc, &i| acc * self.space.dim + i)
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    #[inline]
    pub fn add_at(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] += value;
    }

    /// Stride of each slot in the flat storage.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.space.dim;
        (0..self.valence).map(|s| n.pow((self.valence - 1 - s) as u32)).collect()
    }

    fn assert_same_shape(&self, other: &Tensor) {
        assert_eq!(self.space, other.space, "tensors live over different spaces");
        assert_eq!(self.valence, other.valence, "tensor valences differ");
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.space == other.space && self.valence == other.valence
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Tensor) -> f64 {
        self.assert_same_shape(other);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, c: f64) -> Tensor {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|x| *x *= c);
        t
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Tensor) {
        self.assert_same_shape(other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    /// Relative distance `|a − b| / max(|a|, |b|)`; zero when both vanish.
    pub fn rel_diff(&self, other: &Tensor) -> f64 {
        self.assert_same_shape(other);
        let scale = self.norm().max(other.norm());
        if scale == 0.0 {
            return 0.0;
        }
        let diff: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).powi(2)).sum();
        diff.sqrt() / scale
    }

    /// Output `out[J] = self[J[map[0]], J[map[1]], …]` of valence `out_valence`.
    ///
    /// Repeated entries of `map` read diagonals; output slots absent from `map`
    /// broadcast.
    pub fn reindex(&self, out_valence: usize, map: &[usize]) -> Tensor {
        assert_eq!(map.len(), self.valence, "map length must equal valence");
        assert!(map.iter().all(|&m| m < out_valence), "map entry out of range");
        let strides = self.strides();
        let mut coeff = vec![0usize; out_valence];
        for (s, &m) in map.iter().enumerate() {
            coeff[m] += strides[s];
        }
        let mut out = Tensor::zeros(&self.space, out_valence);
        let data = &self.data;
        let odata = &mut out.data;
        for_each_index(self.space.dim, out_valence, |idx, lin| {
            let src: usize = idx.iter().zip(&coeff).map(|(i, c)| i * c).sum();
            odata[lin] = data[src];
        });
        out
    }

    /// Slot permutation: `out(x_{perm(0)}, x_{perm(1)}, …) = self(x_0, x_1, …)`.
    ///
    /// Equivalently `out[i_0, …] = self[i_{perm(0)}, …]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tensor> {
        check_perm(perm, self.valence)?;
        Ok(self.reindex(self.valence, perm))
    }

    /// Infallible permutation for internal call sites with fixed, valid permutations.
    pub(crate) fn perm(&self, perm: &[usize]) -> Tensor {
        self.permute(perm).expect("valid permutation")
    }

    /// Average over all permutations of the listed slots.
    pub fn symmetrize(&self, slots: &[usize]) -> Result<Tensor> {
        if slots.is_empty() {
            return invalid("symmetrize needs at least one slot");
        }
        if slots.iter().any(|&s| s >= self.valence) {
            return invalid("slot index out of range");
        }
        let mut uniq = slots.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != slots.len() {
            return invalid("repeated slot in symmetrize");
        }
        let perms = permutations(slots.len());
        let mut out = Tensor::zeros(&self.space, self.valence);
        let mut full: Vec<usize> = (0..self.valence).collect();
        for p in &perms {
            for (a, &b) in p.iter().enumerate() {
                full[slots[a]] = slots[b];
            }
            out.axpy(1.0, &self.reindex(self.valence, &full));
        }
        Ok(out.scaled(1.0 / perms.len() as f64))
    }

    /// Signed average over all permutations of the listed slots.
    pub fn antisymmetrize(&self, slots: &[usize]) -> Result<Tensor> {
        if slots.is_empty() || slots.iter().any(|&s| s >= self.valence) {
            return invalid("antisymmetrize needs valid slots");
        }
        let perms = permutations(slots.len());
        let mut out = Tensor::zeros(&self.space, self.valence);
        let mut full: Vec<usize> = (0..self.valence).collect();
        for p in &perms {
            for (a, &b) in p.iter().enumerate() {
                full[slots[a]] = slots[b];
            }
            out.axpy(perm_sign(p), &self.reindex(self.valence, &full));
        }
        Ok(out.scaled(1.0 / perms.len() as f64))
    }

    /// Signed contraction `Σ_a ε_a t(…, e_a, …, e_a, …)` over slots `i` and `j`.
    pub fn metric_trace(&self, i: usize, j: usize) -> Result<Tensor> {
        if self.valence < 2 {
            return invalid("metric trace needs valence at least 2");
        }
        if i == j || i >= self.valence || j >= self.valence {
            return invalid(format!("cannot trace slots {i} and {j} of valence {}", self.valence));
        }
        let n = self.space.dim;
        let v = self.valence;
        let strides = self.strides();
        let rest: Vec<usize> = (0..v).filter(|&s| s != i && s != j).collect();
        let diag = strides[i] + strides[j];
        let mut out = Tensor::zeros(&self.space, v - 2);
        let data = &self.data;
        let odata = &mut out.data;
        for_each_index(n, v - 2, |idx, lin| {
            let base: usize = idx.iter().zip(&rest).map(|(x, &s)| x * strides[s]).sum();
            odata[lin] = (0..n).map(|a| self.space.eps(a) * data[base + a * diag]).sum();
        });
        Ok(out)
    }

    /// Trace for internal call sites with fixed, valid slots.
    pub(crate) fn tr(&self, i: usize, j: usize) -> Tensor {
        self.metric_trace(i, j).expect("valid trace slots")
    }

    pub fn outer(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.space, other.space, "tensors live over different spaces");
        let mut out = Tensor::zeros(&self.space, self.valence + other.valence);
        let m = other.data.len();
        for (a, x) in self.data.iter().enumerate() {
            let row = &mut out.data[a * m..(a + 1) * m];
            for (r, y) in row.iter_mut().zip(&other.data) {
                *r = x * y;
            }
        }
        out
    }

    /// `t + t∘σ + t∘σ²` for the cyclic shift `σ` of the three given slots,
    /// i.e. the sum of `t(…, x_i, …, x_j, …, x_k, …)` over cyclic
    /// rotations of `(x_i, x_j, x_k)`.
    pub fn cyclic_sum(&self, slots: [usize; 3]) -> Tensor {
        let [i, j, k] = slots;
        let mut map: Vec<usize> = (0..self.valence).collect();
        let mut out = self.clone();
        (map[i], map[j], map[k]) = (j, k, i);
        out.axpy(1.0, &self.reindex(self.valence, &map));
        (map[i], map[j], map[k]) = (k, i, j);
        out.axpy(1.0, &self.reindex(self.valence, &map));
        out
    }

    /// Multilinear evaluation on one vector per slot.
    pub fn evaluate(&self, vectors: &[&[f64]]) -> f64 {
        assert_eq!(vectors.len(), self.valence);
        let mut acc = 0.0;
        for_each_index(self.space.dim, self.valence, |idx, lin| {
            let w: f64 = idx.iter().zip(vectors).map(|(&i, v)| v[i]).product();
            acc += w * self.data[lin];
        });
        acc
    }

    /// Whether the tensor is invariant under all permutations of `slots`, to
    /// relative tolerance `tol`.
    pub fn is_symmetric_in(&self, slots: &[usize], tol: f64) -> bool {
        match self.symmetrize(slots) {
            Ok(s) => s.rel_diff(self) <= tol,
            Err(_) => false,
        }
    }

    pub fn is_fully_symmetric(&self, tol: f64) -> bool {
        self.valence < 2 || self.is_symmetric_in(&(0..self.valence).collect::<Vec<_>>(), tol)
    }
}

/// Symmetric product `α ⊙ β`: the full average of `α ⊗ β`.
pub fn sym_product(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.space != b.space {
        return invalid("symmetric product of tensors over different spaces");
    }
    if !a.is_fully_symmetric(1e-12) || !b.is_fully_symmetric(1e-12) {
        return invalid("symmetric product needs fully symmetric factors");
    }
    let t = a.outer(b);
    if t.valence < 2 {
        return Ok(t);
    }
    t.symmetrize(&(0..t.valence).collect::<Vec<_>>())
}

impl Add for &Tensor {
    type Output = Tensor;
    fn add(self, rhs: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Add for Tensor {
    type Output = Tensor;
    fn add(mut self, rhs: Tensor) -> Tensor {
        self.axpy(1.0, &rhs);
        self
    }
}

impl Sub for &Tensor {
    type Output = Tensor;
    fn sub(self, rhs: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Sub for Tensor {
    type Output = Tensor;
    fn sub(mut self, rhs: Tensor) -> Tensor {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl Neg for &Tensor {
    type Output = Tensor;
    fn neg(self) -> Tensor {
        self.scaled(-1.0)
    }
}

impl Neg for Tensor {
    type Output = Tensor;
    fn neg(self) -> Tensor {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &Tensor {
    type Output = Tensor;
    fn mul(self, c: f64) -> Tensor {
        self.scaled(c)
    }
}

impl Mul<f64> for Tensor {
    type Output = Tensor;
    fn mul(mut self, c: f64) -> Tensor {
        self.data.iter_mut().for_each(|x| *x *= c);
        self
    }
}

impl Mul<&Tensor> for f64 {
    type Output = Tensor;
    fn mul(self, t: &Tensor) -> Tensor {
        t.scaled(self)
    }
}

impl Mul<Tensor> for f64 {
    type Output = Tensor;
    fn mul(self, t: Tensor) -> Tensor {
        t * self
    }
}

impl AddAssign<&Tensor> for Tensor {
    fn add_assign(&mut self, rhs: &Tensor) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&Tensor> for Tensor {
    fn sub_assign(&mut self, rhs: &Tensor) {
        self.axpy(-1.0, rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2() -> Space {
        Space::euclidean(2)
    }

    #[test]
    fn space_validation() {
        assert!(Space::new(1, vec![1]).is_err());
        assert!(Space::new(3, vec![1, 1]).is_err());
        assert!(Space::new(2, vec![1, 2]).is_err());
        assert!(Space::new(2, vec![1, -1]).is_ok());
    }

    #[test]
    fn permute_swap_transposes() {
        let t = Tensor::from_data(&e2(), 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = t.permute(&[1, 0]).unwrap();
        assert_eq!(s.data(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(s.permute(&[1, 0]).unwrap(), t);
        assert_eq!(t.permute(&[0, 1]).unwrap(), t);
        assert!(t.permute(&[0]).is_err());
        assert!(t.permute(&[0, 0]).is_err());
    }

    #[test]
    fn permute_matches_index_relabeling() {
        let sp = Space::euclidean(3);
        let t = Tensor::random(&sp, 3, 1);
        let p = [2, 0, 1];
        let s = t.permute(&p).unwrap();
        for_each_index(3, 3, |i, _| {
            let src = [i[p[0]], i[p[1]], i[p[2]]];
            assert_eq!(s.get(i), t.get(&src));
        });
    }

    #[test]
    fn symmetrize_examples() {
        let t = Tensor::from_data(&e2(), 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(t.symmetrize(&[0, 1]).unwrap().data(), &[0.0, 0.5, 0.5, 0.0]);
        let a = Tensor::from_data(&e2(), 2, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_eq!(a.symmetrize(&[0, 1]).unwrap().norm(), 0.0);
        assert!(t.symmetrize(&[]).is_err());
        assert!(t.symmetrize(&[2]).is_err());
    }

    #[test]
    fn trace_examples() {
        let sp = Space::euclidean(4);
        let g = Tensor::metric(&sp);
        assert_eq!(g.metric_trace(0, 1).unwrap().data(), &[4.0]);
        let gg = g.outer(&g);
        let t = gg.metric_trace(0, 2).unwrap();
        assert!(t.rel_diff(&g.scaled(1.0)) < 1e-15);
        let lor = Space::new(4, vec![-1, 1, 1, 1]).unwrap();
        let gl = Tensor::metric(&lor);
        assert_eq!(gl.metric_trace(0, 1).unwrap().data(), &[4.0]);
        assert!(Tensor::random(&sp, 1, 0).metric_trace(0, 1).is_err());
        assert!(g.metric_trace(0, 0).is_err());
    }

    #[test]
    fn trace_of_antisymmetric_vanishes() {
        let sp = Space::new(3, vec![1, -1, 1]).unwrap();
        let t = Tensor::random(&sp, 2, 3);
        let a = &t - &t.perm(&[1, 0]);
        assert!(a.metric_trace(0, 1).unwrap().norm() < 1e-14);
    }

    #[test]
    fn sym_product_unit_and_diagonal() {
        let sp = Space::euclidean(3);
        let one = Tensor::scalar(&sp, 1.0);
        let b = Tensor::random(&sp, 2, 4).symmetrize(&[0, 1]).unwrap();
        assert!(sym_product(&one, &b).unwrap().rel_diff(&b) < 1e-15);
        let g = Tensor::metric(&sp);
        let gg = sym_product(&g, &g).unwrap();
        let xi = [0.3, -1.2, 0.7];
        let q: f64 = xi.iter().map(|x| x * x).sum();
        let v = gg.evaluate(&[&xi, &xi, &xi, &xi]);
        assert!((v - q * q).abs() < 1e-12);
        assert!(sym_product(&Tensor::random(&sp, 2, 9), &g).is_err());
    }

    #[test]
    fn random_is_deterministic() {
        let sp = Space::euclidean(3);
        assert_eq!(Tensor::random(&sp, 3, 5), Tensor::random(&sp, 3, 5));
        assert_ne!(Tensor::random(&sp, 3, 5), Tensor::random(&sp, 3, 6));
        let s = Tensor::random(&sp, 0, 5);
        assert_eq!(s.data().len(), 1);
        assert!(s.data()[0].is_finite());
    }

    #[test]
    fn permutation_helpers() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(perm_sign(&[1, 0, 2]), -1.0);
        assert_eq!(perm_sign(&[1, 2, 0]), 1.0);
    }

    #[test]
    fn serde_round_trip() {
        let sp = Space::new(2, vec![1, -1]).unwrap();
        let t = Tensor::random(&sp, 2, 1);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"valence\":2"));
        let back: Tensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let bad = r#"{"dim":2,"signature":[1,1],"valence":2,"data":[1.0]}"#;
        assert!(serde_json::from_str::<Tensor>(bad).is_err());
    }
}
