//! Dense multivariate polynomials truncated at a total degree.

use std::collections::HashMap;
use std::sync::Arc;

/// Monomial table shared by all polynomials over the same ring.
#[derive(Debug)]
pub struct PolyRing {
    nvars: usize,
    degree: usize,
    monomials: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` with `m_i m_j = m_k`, sorted by total degree of `m_k`.
    products: Vec<(u32, u32, u32)>,
    /// `products[..cut[d]]` have total degree `≤ d`.
    cut: Vec<usize>,
    /// `deriv[v][i] = (k, e)` with `∂_v m_i = e m_k`.
    deriv: Vec<Vec<Option<(usize, f64)>>>,
}

impl PolyRing {
    pub fn new(nvars: usize, degree: usize) -> Arc<Self> {
        let mut monomials = Vec::new();
        for d in 0..=degree {
            let mut cur = vec![0u8; nvars];
            gen(nvars, d, 0, &mut cur, &mut monomials);
        }
        let degrees: Vec<usize> = monomials.iter().map(|m| m.iter().map(|&e| e as usize).sum()).collect();
        let index: HashMap<Vec<u8>, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degrees[i] + degrees[j] <= degree {
                    let m: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    products.push((i as u32, j as u32, index[&m] as u32));
                }
            }
        }
        products.sort_by_key(|&(_, _, k)| degrees[k as usize]);
        let cut = (0..=degree)
            .map(|d| products.partition_point(|&(_, _, k)| degrees[k as usize] <= d))
            .collect();
        let deriv = (0..nvars)
            .map(|v| {
                monomials
                    .iter()
                    .map(|m| {
                        (m[v] > 0).then(|| {
                            let mut q = m.clone();
                            q[v] -= 1;
                            (index[&q], f64::from(m[v]))
                        })
                    })
                    .collect()
            })
            .collect();
        Arc::new(PolyRing { nvars, degree, monomials, degrees, index, products, cut, deriv })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn gen(nvars: usize, left: usize, v: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if v == nvars - 1 {
        cur[v] = left as u8;
        out.push(cur.clone());
        cur[v] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[v] = e as u8;
        gen(nvars, left - e, v + 1, cur, out);
    }
    cur[v] = 0;
}

/// A polynomial with coefficients indexed by the monomials of its ring.
#[derive(Clone, Debug)]
pub struct TruncPoly {
    ring: Arc<PolyRing>,
    coef: Vec<f64>,
}

impl PartialEq for TruncPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ring.nvars == other.ring.nvars && self.ring.degree == other.ring.degree && self.coef == other.coef
    }
}

impl TruncPoly {
    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        TruncPoly { ring: ring.clone(), coef: vec![0.0; ring.len()] }
    }

    pub fn constant(ring: &Arc<PolyRing>, c: f64) -> Self {
        let mut p = TruncPoly::zero(ring);
        p.coef[0] = c;
        p
    }

    /// The coordinate function `x_v`.
    pub fn var(ring: &Arc<PolyRing>, v: usize) -> Self {
        let mut e = vec![0u8; ring.nvars];
        e[v] = 1;
        let mut p = TruncPoly::zero(ring);
        p.add_term(&e, 1.0);
        p
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// Adds `c · x^e`; terms above the truncation degree are dropped.
    pub fn add_term(&mut self, exps: &[u8], c: f64) {
        if let Some(i) = self.ring.index_of(exps) {
            self.coef[i] += c;
        }
    }

    pub fn value_at_origin(&self) -> f64 {
        self.coef[0]
    }

    /// Largest total degree with a nonzero coefficient.
    pub fn actual_degree(&self) -> Option<usize> {
        self.coef.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, _)| self.ring.degrees[i]).max()
    }

    pub fn scale(&mut self, c: f64) {
        self.coef.iter_mut().for_each(|x| *x *= c);
    }

    pub fn axpy(&mut self, c: f64, other: &TruncPoly) {
        for (x, y) in self.coef.iter_mut().zip(&other.coef) {
            *x += c * y;
        }
    }

    /// Adds `c · a · b`, keeping only terms of degree `≤ cap`.
    pub fn add_product(&mut self, c: f64, a: &TruncPoly, b: &TruncPoly, cap: usize) {
        let ring = &self.ring;
        let end = ring.cut[cap.min(ring.degree)];
        for &(i, j, k) in &ring.products[..end] {
            let (ai, bj) = (a.coef[i as usize], b.coef[j as usize]);
            if ai != 0.0 && bj != 0.0 {
                self.coef[k as usize] += c * ai * bj;
            }
        }
    }

    pub fn mul(&self, other: &TruncPoly, cap: usize) -> TruncPoly {
        let mut out = TruncPoly::zero(&self.ring);
        out.add_product(1.0, self, other, cap);
        out
    }

    pub fn derivative(&self, v: usize) -> TruncPoly {
        let mut out = TruncPoly::zero(&self.ring);
        for (i, d) in self.ring.deriv[v].iter().enumerate() {
            if let Some((k, e)) = d {
                out.coef[*k] += e * self.coef[i];
            }
        }
        out
    }

    pub fn truncate(&mut self, cap: usize) {
        for (c, &d) in self.coef.iter_mut().zip(&self.ring.degrees) {
            if d > cap {
                *c = 0.0;
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coef
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| {
                c * self.ring.monomials[i].iter().zip(x).map(|(&e, xi)| xi.powi(e as i32)).product::<f64>()
            })
            .sum()
    }

    /// `p(A y)`: substitutes `x_i = Σ_j a[i][j] y_j`.
    pub fn substitute_linear(&self, a: &[Vec<f64>]) -> TruncPoly {
        let ring = &self.ring;
        let n = ring.nvars;
        let deg = ring.degree;
        let lin: Vec<TruncPoly> = (0..n)
            .map(|i| {
                let mut p = TruncPoly::zero(ring);
                for (j, &aij) in a[i].iter().enumerate() {
                    p.axpy(aij, &TruncPoly::var(ring, j));
                }
                p
            })
            .collect();
        let mut out = TruncPoly::zero(ring);
        for (idx, &c) in self.coef.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut term = TruncPoly::constant(ring, c);
            for (v, &e) in ring.monomials[idx].iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&lin[v], deg);
                }
            }
            out.axpy(1.0, &term);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_count() {
        // C(n + D, D)
        assert_eq!(PolyRing::new(3, 4).len(), 35);
        assert_eq!(PolyRing::new(4, 4).len(), 70);
    }

    #[test]
    fn product_and_derivative() {
        let ring = PolyRing::new(2, 3);
        let x = TruncPoly::var(&ring, 0);
        let y = TruncPoly::var(&ring, 1);
        let mut p = TruncPoly::constant(&ring, 1.0);
        p.axpy(1.0, &x);
        // (1 + x)^4 truncated at degree 3
        let p2 = p.mul(&p, 3);
        let p4 = p2.mul(&p2, 3);
        assert_eq!(p4.coefficients()[ring.index_of(&[3, 0]).unwrap()], 4.0);
        assert_eq!(p4.actual_degree(), Some(3));
        let q = x.mul(&y, 3).mul(&y, 3);
        let dq = q.derivative(1);
        assert_eq!(dq.coefficients()[ring.index_of(&[1, 1]).unwrap()], 2.0);
        assert!((q.eval(&[2.0, 3.0]) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn linear_substitution() {
        let ring = PolyRing::new(2, 4);
        let x = TruncPoly::var(&ring, 0);
        let p = x.mul(&x, 4);
        let a = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
        let q = p.substitute_linear(&a);
        // (y0 + 2 y1)^2
        assert!((q.eval(&[0.5, 0.25]) - 1.0).abs() < 1e-12);
    }
}
