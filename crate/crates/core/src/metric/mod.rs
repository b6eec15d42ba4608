//! Curvature jets of metrics with polynomial coefficients, evaluated at the
//! origin.
//!
//! Conventions: `Γ^m_ij = ½ g^ml (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`,
//! `R^m_ijk = ∂_i Γ^m_jk − ∂_j Γ^m_ik + Γ^m_ip Γ^p_jk − Γ^m_jp Γ^p_ik` and
//! `R_ijkl = g_lm R^m_ijk`. Covariant derivatives put the new slot first.

mod poly;

pub use poly::{PolyRing, TruncPoly};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::jet::TwoJet;
use crate::tensor::{for_each_index, Space, Tensor};

/// Default truncation degree: `∇²R` at the origin uses fourth derivatives.
pub const DEFAULT_DEGREE: usize = 4;

/// Symmetric metric with polynomial entries and `g(0) = diag(ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyMetricDoc", into = "PolyMetricDoc")]
pub struct PolyMetric {
    space: Space,
    entries: Vec<TruncPoly>,
}

/// One term `coefficient · x^exponents` of the entry `(i, j)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRecord {
    pub i: usize,
    pub j: usize,
    pub exponents: Vec<u8>,
    pub coefficient: f64,
}

/// Wire format: terms of the upper triangle. A record with `i > j` is read
/// as the entry `(j, i)`.
#[derive(Serialize, Deserialize)]
struct PolyMetricDoc {
    dim: usize,
    signature: Vec<i8>,
    degree: usize,
    entries: Vec<TermRecord>,
}

impl TryFrom<PolyMetricDoc> for PolyMetric {
    type Error = Error;
    fn try_from(d: PolyMetricDoc) -> Result<Self> {
        let sp = Space::new(d.dim, d.signature)?;
        PolyMetric::from_terms(&sp, d.degree, &d.entries)
    }
}

impl From<PolyMetric> for PolyMetricDoc {
    fn from(g: PolyMetric) -> Self {
        let degree = g.degree();
        let entries = g.terms();
        PolyMetricDoc {
            dim: g.space.dim(),
            signature: g.space.signature().to_vec(),
            degree,
            entries,
        }
    }
}

impl PolyMetric {
    /// Checks symmetry and the normalization at the origin.
    pub fn new(space: &Space, entries: Vec<TruncPoly>) -> Result<Self> {
        let n = space.dim();
        if entries.len() != n * n {
            return invalid(format!("metric over dimension {n} needs {} entries", n * n));
        }
        let ring = entries[0].ring().clone();
        if ring.nvars() != n || entries.iter().any(|e| !Arc::ptr_eq(e.ring(), &ring)) {
            return invalid("metric entries must share one polynomial ring in n variables");
        }
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (&entries[i * n + j], &entries[j * n + i]);
                if a.coefficients().iter().zip(b.coefficients()).any(|(x, y)| (x - y).abs() > 1e-12) {
                    return invalid(format!("metric entry ({i}, {j}) is not symmetric"));
                }
                let target = if i == j { space.eps(i) } else { 0.0 };
                if (a.value_at_origin() - target).abs() > 1e-12 {
                    return invalid("metric at the origin must equal the signature matrix");
                }
            }
        }
        Ok(PolyMetric { space: space.clone(), entries })
    }

    pub fn flat(space: &Space, degree: usize) -> Self {
        let n = space.dim();
        let ring = PolyRing::new(n, degree);
        let entries = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                TruncPoly::constant(&ring, if i == j { space.eps(i) } else { 0.0 })
            })
            .collect();
        PolyMetric { space: space.clone(), entries }
    }

    pub fn from_terms(space: &Space, degree: usize, terms: &[TermRecord]) -> Result<Self> {
        let n = space.dim();
        let ring = PolyRing::new(n, degree);
        let mut entries = vec![TruncPoly::zero(&ring); n * n];
        for t in terms {
            if t.i >= n || t.j >= n || t.exponents.len() != n || !t.coefficient.is_finite() {
                return invalid("malformed metric term record");
            }
            let deg: usize = t.exponents.iter().map(|&e| e as usize).sum();
            if deg > degree {
                return invalid(format!("term of degree {deg} exceeds truncation degree {degree}"));
            }
            let (i, j) = (t.i.min(t.j), t.i.max(t.j));
            entries[i * n + j].add_term(&t.exponents, t.coefficient);
            if i != j {
                entries[j * n + i].add_term(&t.exponents, t.coefficient);
            }
        }
        PolyMetric::new(space, entries)
    }

    pub fn terms(&self) -> Vec<TermRecord> {
        let n = self.space.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                let p = &self.entries[i * n + j];
                for (k, &c) in p.coefficients().iter().enumerate() {
                    if c != 0.0 {
                        out.push(TermRecord { i, j, exponents: p.ring().monomial(k).to_vec(), coefficient: c });
                    }
                }
            }
        }
        out
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Truncation degree.
    pub fn degree(&self) -> usize {
        self.entries[0].ring().degree()
    }

    pub fn entry(&self, i: usize, j: usize) -> &TruncPoly {
        &self.entries[i * self.space.dim() + j]
    }

    fn ring(&self) -> &Arc<PolyRing> {
        self.entries[0].ring()
    }

    /// `g′_ij(y) = Σ a_ki a_lj g_kl(a y)` for a constant matrix `a`.
    pub fn linear_pullback(&self, a: &[Vec<f64>]) -> Result<PolyMetric> {
        let n = self.space.dim();
        let subst: Vec<TruncPoly> = self.entries.iter().map(|p| p.substitute_linear(a)).collect();
        let mut entries = vec![TruncPoly::zero(self.ring()); n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        entries[i * n + j].axpy(a[k][i] * a[l][j], &subst[k * n + l]);
                    }
                }
            }
        }
        PolyMetric::new(&self.space, entries)
    }
}

/// `g^{-1}` as a Neumann series around `diag(ε)`, truncated at `cap`.
fn inverse(g: &PolyMetric, cap: usize) -> Vec<TruncPoly> {
    let sp = &g.space;
    let n = sp.dim();
    let ring = g.ring();
    let e = |i: usize| sp.eps(i);
    // −E h
    let meh: Vec<TruncPoly> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let mut p = g.entries[k].clone();
            if i == j {
                p.axpy(-1.0, &TruncPoly::constant(ring, e(i)));
            }
            p.scale(-e(i));
            p.truncate(cap);
            p
        })
        .collect();
    let mut term: Vec<TruncPoly> = (0..n * n)
        .map(|k| TruncPoly::constant(ring, if k / n == k % n { e(k / n) } else { 0.0 }))
        .collect();
    let mut inv = term.clone();
    for _ in 0..cap {
        let mut next = vec![TruncPoly::zero(ring); n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    next[i * n + j].add_product(1.0, &meh[i * n + k], &term[k * n + j], cap);
                }
            }
        }
        for (a, b) in inv.iter_mut().zip(&next) {
            a.axpy(1.0, b);
        }
        term = next;
    }
    inv
}

fn christoffel_capped(g: &PolyMetric, cap: usize) -> Vec<TruncPoly> {
    let n = g.space.dim();
    let ring = g.ring();
    let inv = inverse(g, cap);
    let dg: Vec<TruncPoly> = (0..n * n * n).map(|k| g.entries[k / n].derivative(k % n)).collect();
    let dgi = |i: usize, j: usize, k: usize| &dg[(i * n + j) * n + k];
    let mut out = vec![TruncPoly::zero(ring); n * n * n];
    for i in 0..n {
        for j in i..n {
            // lowered Γ_{ijl} = ½ (∂_i g_jl + ∂_j g_il − ∂_l g_ij)
            let low: Vec<TruncPoly> = (0..n)
                .map(|l| {
                    let mut p = dgi(j, l, i).clone();
                    p.axpy(1.0, dgi(i, l, j));
                    p.axpy(-1.0, dgi(i, j, l));
                    p.scale(0.5);
                    p
                })
                .collect();
            for m in 0..n {
                let mut p = TruncPoly::zero(ring);
                for (l, lw) in low.iter().enumerate() {
                    p.add_product(1.0, &inv[m * n + l], lw, cap);
                }
                out[(m * n + j) * n + i] = p.clone();
                out[(m * n + i) * n + j] = p;
            }
        }
    }
    out
}

/// Christoffel symbols, flattened as `Γ[(m n + i) n + j] = Γ^m_ij`.
pub fn christoffel(g: &PolyMetric) -> Result<Vec<TruncPoly>> {
    if g.degree() < 1 {
        return invalid("Christoffel symbols need truncation degree at least 1");
    }
    Ok(christoffel_capped(g, g.degree() - 1))
}

/// Covariant derivative of a covariant polynomial tensor field of valence
/// `v` (flattened row-major), new slot first, truncated at `cap`.
fn covariant(t: &[TruncPoly], v: usize, gamma: &[TruncPoly], n: usize, cap: usize) -> Vec<TruncPoly> {
    let ring = t[0].ring().clone();
    let block = n.pow(v as u32);
    let strides: Vec<usize> = (0..v).map(|s| n.pow((v - 1 - s) as u32)).collect();
    let mut out = vec![TruncPoly::zero(&ring); n * block];
    for a in 0..n {
        for_each_index(n, v, |rest, lin| {
            let mut p = t[lin].derivative(a);
            p.truncate(cap);
            for s in 0..v {
                let base = lin - rest[s] * strides[s];
                for q in 0..n {
                    p.add_product(-1.0, &gamma[(q * n + a) * n + rest[s]], &t[base + q * strides[s]], cap);
                }
            }
            out[a * block + lin] = p;
        });
    }
    out
}

/// `(R, ∇R, ∇²R)` at the origin.
pub fn curvature_two_jet(g: &PolyMetric) -> Result<TwoJet> {
    if g.degree() < 4 {
        return invalid(format!("curvature two-jet needs truncation degree ≥ 4, got {}", g.degree()));
    }
    let sp = &g.space;
    let n = sp.dim();
    let ring = g.ring().clone();
    let gamma = christoffel_capped(g, 3);
    let gm = |m: usize, i: usize, j: usize| &gamma[(m * n + i) * n + j];
    // R^m_ijk, truncated at degree 2
    let mut rup = vec![TruncPoly::zero(&ring); n.pow(4)];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut p = gm(m, j, k).derivative(i);
                    p.axpy(-1.0, &gm(m, i, k).derivative(j));
                    p.truncate(2);
                    for q in 0..n {
                        p.add_product(1.0, gm(m, i, q), gm(q, j, k), 2);
                        p.add_product(-1.0, gm(m, j, q), gm(q, i, k), 2);
                    }
                    rup[((m * n + i) * n + j) * n + k] = p;
                }
            }
        }
    }
    let mut rlow = vec![TruncPoly::zero(&ring); n.pow(4)];
    for_each_index(n, 4, |idx, lin| {
        let [i, j, k, l] = [idx[0], idx[1], idx[2], idx[3]];
        let mut p = TruncPoly::zero(&ring);
        for m in 0..n {
            p.add_product(1.0, g.entry(l, m), &rup[((m * n + i) * n + j) * n + k], 2);
        }
        rlow[lin] = p;
    });
    let dr = covariant(&rlow, 4, &gamma, n, 1);
    let d2r = covariant(&dr, 5, &gamma, n, 0);
    let at0 = |ps: &[TruncPoly], v: usize| {
        Tensor::from_data(sp, v, ps.iter().map(TruncPoly::value_at_origin).collect())
    };
    TwoJet::new(at0(&rlow, 4)?, at0(&dr, 5)?, at0(&d2r, 6)?)
}

/// `g_ξ(x, y) = g(x, y) − ⅓ R(x, ξ, ξ, y) − ⅙ ∇_ξ R(x, ξ, ξ, y)`.
pub fn seed_metric(r: &Tensor, dr: &Tensor) -> Result<PolyMetric> {
    if r.valence() != 4 || dr.valence() != 5 || r.space() != dr.space() {
        return invalid("seed metric needs R of valence 4 and ∇R of valence 5 over one space");
    }
    let sp = r.space();
    let n = sp.dim();
    let ring = PolyRing::new(n, DEFAULT_DEGREE);
    let mut entries = vec![TruncPoly::zero(&ring); n * n];
    for i in 0..n {
        for j in 0..n {
            let p = &mut entries[i * n + j];
            if i == j {
                p.add_term(&vec![0; n], sp.eps(i));
            }
            for k in 0..n {
                for l in 0..n {
                    let mut e = vec![0u8; n];
                    e[k] += 1;
                    e[l] += 1;
                    p.add_term(&e, -r.get(&[i, k, l, j]) / 3.0);
                    for m in 0..n {
                        let mut e3 = e.clone();
                        e3[m] += 1;
                        p.add_term(&e3, -dr.get(&[m, i, k, l, j]) / 6.0);
                    }
                }
            }
        }
    }
    symmetrized(sp, entries)
}

fn symmetrized(sp: &Space, mut entries: Vec<TruncPoly>) -> Result<PolyMetric> {
    let n = sp.dim();
    for i in 0..n {
        for j in i + 1..n {
            let mut avg = entries[i * n + j].clone();
            avg.axpy(1.0, &entries[j * n + i]);
            avg.scale(0.5);
            entries[j * n + i] = avg.clone();
            entries[i * n + j] = avg;
        }
    }
    PolyMetric::new(sp, entries)
}

/// Random metric `diag(ε) + scale · P(x)` with `P` a symmetric matrix of
/// polynomials without constant term, all terms up to `degree`.
pub fn random_poly_metric(space: &Space, degree: usize, scale: f64, seed: u64) -> Result<PolyMetric> {
    let n = space.dim();
    let ring = PolyRing::new(n, degree.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = vec![TruncPoly::zero(&ring); n * n];
    for i in 0..n {
        for j in i..n {
            let mut p = TruncPoly::constant(&ring, if i == j { space.eps(i) } else { 0.0 });
            for k in 1..ring.len() {
                let c: f64 = StandardNormal.sample(&mut rng);
                let e = ring.monomial(k).to_vec();
                p.add_term(&e, scale * c);
            }
            entries[i * n + j] = p.clone();
            entries[j * n + i] = p;
        }
    }
    PolyMetric::new(space, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::CurvTensor;
    use crate::jet::validate_two_jet;
    use crate::young::random_ck;

    #[test]
    fn flat_metric_has_trivial_jet() {
        let sp = Space::euclidean(3);
        let g = PolyMetric::flat(&sp, 4);
        assert!(christoffel(&g).unwrap().iter().all(|p| p.coefficients().iter().all(|&c| c == 0.0)));
        let j = curvature_two_jet(&g).unwrap();
        assert_eq!(j.r.norm() + j.dr.norm() + j.d2r.norm(), 0.0);
        assert!(curvature_two_jet(&PolyMetric::flat(&sp, 3)).is_err());
    }

    #[test]
    fn christoffel_closed_form() {
        // g = diag(1 + x_1, 1): Γ^0_00 = ½ g^00 ∂_0 g_00 = 0, Γ^0_01 = ½ /(1 + x_1), Γ^1_00 = −½
        let sp = Space::euclidean(2);
        let terms = vec![TermRecord { i: 0, j: 0, exponents: vec![0, 1], coefficient: 1.0 }];
        let mut all = terms;
        all.push(TermRecord { i: 0, j: 0, exponents: vec![0, 0], coefficient: 1.0 });
        all.push(TermRecord { i: 1, j: 1, exponents: vec![0, 0], coefficient: 1.0 });
        let g = PolyMetric::from_terms(&sp, 4, &all).unwrap();
        let gam = christoffel(&g).unwrap();
        let at = |m: usize, i: usize, j: usize, y: f64| gam[(m * 2 + i) * 2 + j].eval(&[0.0, y]);
        let y = 0.1;
        assert!(at(0, 0, 0, y).abs() < 1e-14);
        // truncated geometric series of ½/(1 + y) to degree 3
        let expect = 0.5 * (1.0 - y + y * y - y * y * y);
        assert!((at(0, 0, 1, y) - expect).abs() < 1e-14);
        assert!((at(0, 1, 0, y) - expect).abs() < 1e-14);
        assert!((at(1, 0, 0, y) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn seed_metric_round_trip() {
        for sp in [Space::euclidean(3), Space::new(3, vec![1, -1, 1]).unwrap()] {
            let r = random_ck(&sp, 0, 1);
            let dr = random_ck(&sp, 1, 2);
            let j = curvature_two_jet(&seed_metric(&r, &dr).unwrap()).unwrap();
            assert!(j.r.rel_diff(&r) < 1e-12);
            assert!(j.dr.rel_diff(&dr) < 1e-12);
            assert!(validate_two_jet(&j, 1e-10).unwrap().pass());
        }
        let gg = CurvTensor::constant_curvature(&Space::euclidean(3)).into_tensor();
        let dr = Tensor::zeros(gg.space(), 5);
        let j = curvature_two_jet(&seed_metric(&gg, &dr).unwrap()).unwrap();
        assert!(j.r.rel_diff(&gg) < 1e-13);
    }

    #[test]
    fn random_metric_jet_is_valid() {
        let g = random_poly_metric(&Space::euclidean(3), 4, 0.3, 5).unwrap();
        let j = curvature_two_jet(&g).unwrap();
        assert!(validate_two_jet(&j, 1e-10).unwrap().pass());
    }

    #[test]
    fn serde_round_trip() {
        let g = random_poly_metric(&Space::euclidean(2), 3, 0.5, 1).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: PolyMetric = serde_json::from_str(&s).unwrap();
        assert_eq!(back.terms().len(), g.terms().len());
        assert!(back
            .terms()
            .iter()
            .zip(g.terms())
            .all(|(a, b)| a.exponents == b.exponents && a.coefficient == b.coefficient));
    }
}
