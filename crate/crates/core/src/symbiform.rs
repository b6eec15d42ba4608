//! Elements of `Sym^m V* ⊗ Sym² V*`.

use crate::error::{invalid, Result};
use crate::tensor::{for_each_index, Space, Tensor};

/// A tensor of valence `m + 2`, symmetric in its first `m` slots and in its
/// last two slots.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBiform {
    m: usize,
    tensor: Tensor,
}

impl SymBiform {
    /// Builds a biform by averaging `tensor` over both slot groups.
    pub fn new(tensor: Tensor, m: usize) -> Result<Self> {
        if tensor.valence() != m + 2 {
            return invalid(format!(
                "biform of degree {m} needs valence {}, got {}",
                m + 2,
                tensor.valence()
            ));
        }
        let mut t = tensor;
        if m >= 2 {
            t = t.symmetrize(&(0..m).collect::<Vec<_>>())?;
        }
        t = t.symmetrize(&[m, m + 1])?;
        Ok(SymBiform { m, tensor: t })
    }

    pub fn zeros(space: &Space, m: usize) -> Self {
        SymBiform { m, tensor: Tensor::zeros(space, m + 2) }
    }

    /// Degree of the symmetric factor.
    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor {
        self.tensor
    }

    pub fn space(&self) -> &Space {
        self.tensor.space()
    }

    /// `h(ξ, …, ξ; x, y)`.
    pub fn diagonal(&self, xi: &[f64], x: &[f64], y: &[f64]) -> f64 {
        let mut vs: Vec<&[f64]> = vec![xi; self.m];
        vs.push(x);
        vs.push(y);
        self.tensor.evaluate(&vs)
    }

    /// `h ⊙ β` for a fully symmetric `β ∈ Sym^l V*`: the product of the
    /// polynomial parts, symmetrized over all `m + l` leading slots.
    pub fn odot(&self, beta: &Tensor) -> Result<SymBiform> {
        if beta.space() != self.space() {
            return invalid("symmetric product of tensors over different spaces");
        }
        if !beta.is_fully_symmetric(1e-12) {
            return invalid("symmetric product needs a fully symmetric factor");
        }
        let l = beta.valence();
        let m = self.m;
        // h[u.., x, y] β[w..] laid out as [u.., w.., x, y]
        let prod = self.tensor.outer(beta);
        let mut map: Vec<usize> = (0..m).collect();
        map.extend([m + l, m + l + 1]);
        map.extend(m..m + l);
        let t = prod.reindex(m + l + 2, &map);
        SymBiform::new(t, m + l)
    }

    /// Recovers a biform of degree `m` from its diagonal restriction
    /// `ξ ↦ h(ξ, …, ξ; ·, ·)` by the polarization formula.
    pub fn from_diagonal(space: &Space, m: usize, f: impl Fn(&[f64]) -> Tensor) -> Result<Self> {
        let n = space.dim();
        if m == 0 {
            return SymBiform::new(f(&vec![0.0; n]), 0);
        }
        let mut out = Tensor::zeros(space, m + 2);
        let fact: f64 = (1..=m).map(|i| i as f64).product();
        for_each_index(n, m, |idx, lin| {
            // polarization: m! h(v_1..v_m) = Σ_{S} (−1)^{m−|S|} p(Σ_{i∈S} v_i)
            let mut acc = Tensor::zeros(space, 2);
            for mask in 1u32..(1 << m) {
                let mut xi = vec![0.0; n];
                for (b, &i) in idx.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        xi[i] += 1.0;
                    }
                }
                let sign = if (m as u32 - mask.count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
                acc.axpy(sign, &f(&xi));
            }
            let base = lin * n * n;
            for (k, v) in acc.data().iter().enumerate() {
                out.data_mut()[base + k] = v / fact;
            }
        });
        SymBiform::new(out, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_enforces_symmetry() {
        let sp = Space::euclidean(3);
        let h = SymBiform::new(Tensor::random(&sp, 4, 1), 2).unwrap();
        let t = h.tensor();
        assert!(t.rel_diff(&t.perm(&[1, 0, 2, 3])) < 1e-15);
        assert!(t.rel_diff(&t.perm(&[0, 1, 3, 2])) < 1e-15);
        assert!(SymBiform::new(Tensor::random(&sp, 3, 1), 2).is_err());
    }

    #[test]
    fn polarization_recovers_biform() {
        let sp = Space::new(3, vec![1, -1, 1]).unwrap();
        for m in 0..4 {
            let h = SymBiform::new(Tensor::random(&sp, m + 2, 10 + m as u64), m).unwrap();
            let rec = SymBiform::from_diagonal(&sp, m, |xi| {
                Tensor::from_fn(&sp, 2, |ab| {
                    let mut x = vec![0.0; 3];
                    let mut y = vec![0.0; 3];
                    x[ab[0]] = 1.0;
                    y[ab[1]] = 1.0;
                    h.diagonal(xi, &x, &y)
                })
            })
            .unwrap();
            assert!(rec.tensor().rel_diff(h.tensor()) < 1e-9, "degree {m}");
        }
    }

    #[test]
    fn odot_evaluates_as_product() {
        let sp = Space::euclidean(3);
        let h = SymBiform::new(Tensor::random(&sp, 4, 2), 2).unwrap();
        let g = Tensor::metric(&sp);
        let p = h.odot(&g).unwrap();
        assert_eq!(p.degree(), 4);
        let xi = [0.4, -0.3, 1.1];
        let x = [1.0, 0.5, -0.2];
        let y = [0.1, 0.0, 0.9];
        let q: f64 = xi.iter().map(|a| a * a).sum();
        assert!((p.diagonal(&xi, &x, &y) - q * h.diagonal(&xi, &x, &y)).abs() < 1e-12);
    }
}
