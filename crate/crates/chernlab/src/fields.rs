//! Pointwise 2-jets of metrics, scalars and perturbations, plus the
//! jet-valued matrix algebra that turns metric jets into jets of derived
//! quantities (inverse metric, determinant, complex trace of a
//! perturbation).
//!
//! Jets are taken with respect to the real chart coordinates in the fixed
//! ordering `(x^1, y^1, ..., x^m, y^m)`; holomorphic and antiholomorphic
//! derivatives are linear combinations extracted on demand:
//! `∂_i = (∂x_i - i ∂y_i)/2`, `∂_ī = (∂x_i + i ∂y_i)/2`.

use crate::algebra::{CMat, MetricValue, RMat};
use crate::error::{ChernError, Result};
use crate::jets::{CJet1, CJet2, Jet1, Jet2, RJet2, Ring};
use num_complex::Complex64;
use std::sync::Arc;

/// 2-jet of a real scalar field.
pub type ScalarJet = RJet2;

/// Pointwise 2-jet of a Hermitian metric: an `m×m` matrix of complex 2-jets
/// in `2m` real variables, entry `(j, i)` holding `g_{j̄i}`.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub m: usize,
    g: Vec<CJet2>,
}

/// Pointwise 2-jet of a `Sym^{1,1}` perturbation, stored through its lowered
/// Hermitian form `η`.
#[derive(Clone, Debug)]
pub struct Sym11Jet {
    pub m: usize,
    eta: Vec<CJet2>,
}

/// 2-jets of the real coordinate Gram matrix (`2m × 2m`).
#[derive(Clone, Debug)]
pub struct RealMetricJet {
    pub n: usize,
    g: Vec<RJet2>,
}

impl MetricJet {
    pub fn from_entries(m: usize, entries: Vec<CJet2>) -> Self {
        assert_eq!(entries.len(), m * m);
        for e in &entries {
            assert_eq!(e.nvars(), 2 * m, "metric jets must have 2m variables");
        }
        MetricJet { m, g: entries }
    }

    #[inline]
    pub fn at(&self, j: usize, i: usize) -> &CJet2 {
        &self.g[j * self.m + i]
    }

    pub fn value(&self) -> CMat {
        let mut out = CMat::zeros(self.m);
        for j in 0..self.m {
            for i in 0..self.m {
                out.set(j, i, self.at(j, i).val());
            }
        }
        out
    }

    pub fn metric_value(&self) -> Result<MetricValue> {
        MetricValue::new(self.value())
    }

    /// Entrywise-jet inverse `g^{ij̄}`, row `i`, column `j`.
    pub fn inverse_jets(&self) -> Result<Vec<CJet2>> {
        jet2_mat_inverse(self.m, &self.g)
    }

    /// Jet of `det G` (complex; real-valued for Hermitian jets).
    pub fn det_jet(&self) -> CJet2 {
        jet2_mat_det(self.m, &self.g)
    }

    /// Maximum deviation from Hermitian symmetry across all jet
    /// coefficients (value, first and second partials).
    pub fn hermitian_deviation(&self) -> f64 {
        let mut d: f64 = 0.0;
        let n = 2 * self.m;
        for j in 0..self.m {
            for i in 0..self.m {
                let a = self.at(j, i);
                let b = self.at(i, j).conj();
                d = d.max((a.val() - b.val()).norm());
                for p in 0..n {
                    d = d.max((a.d1(p) - b.d1(p)).norm());
                    for q in p..n {
                        d = d.max((a.d2(p, q) - b.d2(p, q)).norm());
                    }
                }
            }
        }
        d
    }

    /// Jets of the real Gram matrix.
    pub fn to_real_jets(&self) -> RealMetricJet {
        let m = self.m;
        let n = 2 * m;
        let zero = RJet2::constant(n, 0.0);
        let mut g = vec![zero; n * n];
        for i in 0..m {
            for j in 0..m {
                let e = self.at(j, i);
                let re2 = e.re().scale(2.0);
                let im2 = e.im().scale(2.0);
                g[(2 * i) * n + 2 * j] = re2.clone();
                g[(2 * i) * n + 2 * j + 1] = im2.clone();
                g[(2 * i + 1) * n + 2 * j] = im2.scale(-1.0);
                g[(2 * i + 1) * n + 2 * j + 1] = re2;
            }
        }
        RealMetricJet { n, g }
    }

    /// The curve `g + t η` at the jet level: the exact perturbation path.
    pub fn shifted(&self, h: &Sym11Jet, t: f64) -> MetricJet {
        assert_eq!(self.m, h.m);
        let s = Complex64::new(t, 0.0);
        let g = self
            .g
            .iter()
            .zip(h.eta.iter())
            .map(|(a, b)| &*a + &b.scale(s))
            .collect();
        MetricJet { m: self.m, g }
    }
}

impl Sym11Jet {
    pub fn from_entries(m: usize, entries: Vec<CJet2>) -> Self {
        assert_eq!(entries.len(), m * m);
        Sym11Jet { m, eta: entries }
    }

    pub fn zero(m: usize) -> Self {
        let zero = CJet2::constant(2 * m, Complex64::new(0.0, 0.0));
        Sym11Jet {
            m,
            eta: vec![zero; m * m],
        }
    }

    #[inline]
    pub fn at(&self, j: usize, i: usize) -> &CJet2 {
        &self.eta[j * self.m + i]
    }

    pub fn eta_value(&self) -> CMat {
        let mut out = CMat::zeros(self.m);
        for j in 0..self.m {
            for i in 0..self.m {
                out.set(j, i, self.at(j, i).val());
            }
        }
        out
    }

    pub fn hermitian_deviation(&self) -> f64 {
        MetricJet {
            m: self.m,
            g: self.eta.clone(),
        }
        .hermitian_deviation()
    }

    /// Jets of the endomorphism `H = G^{-1} η`.
    pub fn endo_jets(&self, gjet: &MetricJet) -> Result<Vec<CJet2>> {
        let ginv = gjet.inverse_jets()?;
        Ok(jet2_mat_mul(self.m, &ginv, &self.eta))
    }

    /// Same, with the metric's inverse jets supplied by the caller.
    pub fn endo_jets_with(&self, ginv: &[CJet2]) -> Vec<CJet2> {
        jet2_mat_mul(self.m, ginv, &self.eta)
    }

    pub fn scale(&self, s: f64) -> Sym11Jet {
        let sc = Complex64::new(s, 0.0);
        Sym11Jet {
            m: self.m,
            eta: self.eta.iter().map(|e| e.scale(sc)).collect(),
        }
    }

    pub fn add(&self, other: &Sym11Jet) -> Sym11Jet {
        assert_eq!(self.m, other.m);
        Sym11Jet {
            m: self.m,
            eta: self
                .eta
                .iter()
                .zip(other.eta.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl RealMetricJet {
    #[inline]
    pub fn at(&self, a: usize, b: usize) -> &RJet2 {
        &self.g[a * self.n + b]
    }

    pub fn value(&self) -> RMat {
        let mut out = RMat::zeros(self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                out.set(a, b, self.at(a, b).val());
            }
        }
        out
    }

    pub fn inverse_jets(&self) -> Result<Vec<RJet2>> {
        jet2_mat_inverse(self.n, &self.g)
    }

    pub fn det_jet(&self) -> RJet2 {
        jet2_mat_det(self.n, &self.g)
    }
}

// ---------------------------------------------------------------------------
// Holomorphic / antiholomorphic derivative extraction
// ---------------------------------------------------------------------------

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `∂_i f` of a complex 2-jet.
pub fn hol(f: &CJet2, i: usize) -> Complex64 {
    0.5 * (f.d1(2 * i) - I * f.d1(2 * i + 1))
}

/// `∂_ī f` of a complex 2-jet.
pub fn antihol(f: &CJet2, i: usize) -> Complex64 {
    0.5 * (f.d1(2 * i) + I * f.d1(2 * i + 1))
}

/// `∂_i ∂_j f`.
pub fn hol_hol(f: &CJet2, i: usize, j: usize) -> Complex64 {
    0.25 * (f.d2(2 * i, 2 * j) - I * f.d2(2 * i, 2 * j + 1) - I * f.d2(2 * i + 1, 2 * j)
        - f.d2(2 * i + 1, 2 * j + 1))
}

/// `∂_i ∂_j̄ f`.
pub fn hol_antihol(f: &CJet2, i: usize, j: usize) -> Complex64 {
    0.25 * (f.d2(2 * i, 2 * j) + I * f.d2(2 * i, 2 * j + 1) - I * f.d2(2 * i + 1, 2 * j)
        + f.d2(2 * i + 1, 2 * j + 1))
}

/// `∂_i f` as an order-1 jet (consumes one derivative order).
pub fn hol_jet(f: &CJet2, i: usize) -> CJet1 {
    let n = f.nvars();
    let mut r = CJet1::constant(n, hol(f, i));
    for a in 0..n {
        r.set_d1(a, 0.5 * (f.d2(a, 2 * i) - I * f.d2(a, 2 * i + 1)));
    }
    r
}

/// `∂_ī f` as an order-1 jet.
pub fn antihol_jet(f: &CJet2, i: usize) -> CJet1 {
    let n = f.nvars();
    let mut r = CJet1::constant(n, antihol(f, i));
    for a in 0..n {
        r.set_d1(a, 0.5 * (f.d2(a, 2 * i) + I * f.d2(a, 2 * i + 1)));
    }
    r
}

/// Real-jet variants for scalar fields.
pub fn hol_scalar(u: &RJet2, i: usize) -> Complex64 {
    0.5 * Complex64::new(u.d1(2 * i), -u.d1(2 * i + 1))
}

pub fn hol_antihol_scalar(u: &RJet2, i: usize, j: usize) -> Complex64 {
    0.25 * (Complex64::new(u.d2(2 * i, 2 * j), 0.0)
        + I * u.d2(2 * i, 2 * j + 1)
        - I * u.d2(2 * i + 1, 2 * j)
        + u.d2(2 * i + 1, 2 * j + 1))
}

// ---------------------------------------------------------------------------
// Jet-valued dense matrix algebra (Gauss-Jordan with value pivoting)
// ---------------------------------------------------------------------------

pub fn jet2_mat_mul<T: Ring>(m: usize, a: &[Jet2<T>], b: &[Jet2<T>]) -> Vec<Jet2<T>> {
    let n = a[0].nvars();
    let mut out = vec![Jet2::constant(n, T::zero()); m * m];
    for j in 0..m {
        for i in 0..m {
            let mut s = Jet2::constant(n, T::zero());
            for k in 0..m {
                s = &s + &(&a[j * m + k] * &b[k * m + i]);
            }
            out[j * m + i] = s;
        }
    }
    out
}

pub fn jet1_mat_mul<T: Ring>(m: usize, a: &[Jet1<T>], b: &[Jet1<T>]) -> Vec<Jet1<T>> {
    let n = a[0].nvars();
    let mut out = vec![Jet1::constant(n, T::zero()); m * m];
    for j in 0..m {
        for i in 0..m {
            let mut s = Jet1::constant(n, T::zero());
            for k in 0..m {
                s = &s + &(&a[j * m + k] * &b[k * m + i]);
            }
            out[j * m + i] = s;
        }
    }
    out
}

macro_rules! jet_mat_inverse_impl {
    ($name:ident, $jet:ident) => {
        pub fn $name<T: Ring>(m: usize, a: &[$jet<T>]) -> Result<Vec<$jet<T>>> {
            assert_eq!(a.len(), m * m);
            let n = a[0].nvars();
            let mut w: Vec<$jet<T>> = a.to_vec();
            let mut inv: Vec<$jet<T>> = vec![$jet::constant(n, T::zero()); m * m];
            for d in 0..m {
                inv[d * m + d] = $jet::constant(n, T::one());
            }
            for col in 0..m {
                let mut piv = col;
                let mut best = w[col * m + col].val().modulus();
                for r in col + 1..m {
                    let v = w[r * m + col].val().modulus();
                    if v > best {
                        best = v;
                        piv = r;
                    }
                }
                if best < 1e-300 {
                    return Err(ChernError::SingularMetric);
                }
                if piv != col {
                    for i in 0..m {
                        w.swap(col * m + i, piv * m + i);
                        inv.swap(col * m + i, piv * m + i);
                    }
                }
                let d = w[col * m + col].recip();
                for i in 0..m {
                    w[col * m + i] = &w[col * m + i] * &d;
                    inv[col * m + i] = &inv[col * m + i] * &d;
                }
                for r in 0..m {
                    if r == col {
                        continue;
                    }
                    let f = w[r * m + col].clone();
                    for i in 0..m {
                        let t = &f * &w[col * m + i];
                        w[r * m + i] = &w[r * m + i] - &t;
                        let t = &f * &inv[col * m + i];
                        inv[r * m + i] = &inv[r * m + i] - &t;
                    }
                }
            }
            Ok(inv)
        }
    };
}

jet_mat_inverse_impl!(jet2_mat_inverse, Jet2);
jet_mat_inverse_impl!(jet1_mat_inverse, Jet1);

pub fn jet2_mat_det<T: Ring>(m: usize, a: &[Jet2<T>]) -> Jet2<T> {
    // LU by value pivoting, determinant as the product of pivots.
    let n = a[0].nvars();
    let mut w: Vec<Jet2<T>> = a.to_vec();
    let mut det = Jet2::constant(n, T::one());
    let mut sign = T::one();
    for col in 0..m {
        let mut piv = col;
        let mut best = w[col * m + col].val().modulus();
        for r in col + 1..m {
            let v = w[r * m + col].val().modulus();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Jet2::constant(n, T::zero());
        }
        if piv != col {
            sign = -sign;
            for i in 0..m {
                w.swap(col * m + i, piv * m + i);
            }
        }
        det = &det * &w[col * m + col];
        let dinv = w[col * m + col].recip();
        for r in col + 1..m {
            let f = &w[r * m + col] * &dinv;
            for i in col..m {
                let t = &f * &w[col * m + i];
                w[r * m + i] = &w[r * m + i] - &t;
            }
        }
    }
    det.scale(sign)
}

// ---------------------------------------------------------------------------
// Field closures and jet evaluation
// ---------------------------------------------------------------------------

pub type MetricField = Arc<dyn Fn(&[f64]) -> Result<MetricJet> + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(&[f64]) -> Result<ScalarJet> + Send + Sync>;

/// A named `Sym^{1,1}` perturbation field with pointwise 2-jets of `η`.
#[derive(Clone)]
pub struct PerturbationSpec {
    pub m: usize,
    pub name: String,
    pub field: Arc<dyn Fn(&[f64]) -> Result<Sym11Jet> + Send + Sync>,
}

impl PerturbationSpec {
    pub fn new(
        m: usize,
        name: impl Into<String>,
        field: Arc<dyn Fn(&[f64]) -> Result<Sym11Jet> + Send + Sync>,
    ) -> Self {
        PerturbationSpec {
            m,
            name: name.into(),
            field,
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<Sym11Jet> {
        (self.field)(point)
    }
}

impl std::fmt::Debug for PerturbationSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PerturbationSpec({}, m={})", self.name, self.m)
    }
}

/// Truncate a metric jet to the requested order (order > 2 is unsupported;
/// closed-form zoo fields always provide order 2).
pub fn jet_eval_metric(field: &MetricField, point: &[f64], order: u8) -> Result<MetricJet> {
    if order > 2 {
        return Err(ChernError::UnsupportedJetOrder(order));
    }
    let full = field(point)?;
    Ok(truncate_metric_jet(&full, order))
}

pub fn jet_eval_scalar(field: &ScalarField, point: &[f64], order: u8) -> Result<ScalarJet> {
    if order > 2 {
        return Err(ChernError::UnsupportedJetOrder(order));
    }
    let full = field(point)?;
    Ok(truncate_rjet(&full, order))
}

fn truncate_rjet(j: &RJet2, order: u8) -> RJet2 {
    let n = j.nvars();
    let mut out = RJet2::constant(n, j.val());
    if order >= 1 {
        for a in 0..n {
            out.set_d1(a, j.d1(a));
        }
    }
    if order >= 2 {
        for a in 0..n {
            for b in a..n {
                out.set_d2(a, b, j.d2(a, b));
            }
        }
    }
    out
}

fn truncate_cjet(j: &CJet2, order: u8) -> CJet2 {
    CJet2::from_re_im(&truncate_rjet(&j.re(), order), &truncate_rjet(&j.im(), order))
}

fn truncate_metric_jet(g: &MetricJet, order: u8) -> MetricJet {
    MetricJet {
        m: g.m,
        g: g.g.iter().map(|e| truncate_cjet(e, order)).collect(),
    }
}

/// 2-jet of `tr^C h = Re tr(G^{-1} η)` assembled from the jets of `g` and
/// `h`; this is where metric jets enter trace derivatives.
pub fn trace_c_jet(gjet: &MetricJet, hjet: &Sym11Jet) -> Result<ScalarJet> {
    let hj = hjet.endo_jets(gjet)?;
    Ok(trace_of_endo_jets(gjet.m, &hj))
}

/// Complex trace of precomputed endomorphism jets `H = G^{-1}η`.
pub fn trace_of_endo_jets(m: usize, hj: &[CJet2]) -> ScalarJet {
    let n = 2 * m;
    let mut tr = CJet2::constant(n, Complex64::new(0.0, 0.0));
    for d in 0..m {
        tr = &tr + &hj[d * m + d];
    }
    tr.re()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Hopf-type metric jets: g_{j̄i} = δ_ij / |z|² built by jet arithmetic.
    fn hopf_jet(point: &[f64]) -> MetricJet {
        let n = 4;
        let mut norm = RJet2::constant(n, 0.0);
        for a in 0..n {
            let xa = RJet2::coordinate(n, a, point[a]);
            norm = &norm + &(&xa * &xa);
        }
        let inv = norm.recip();
        let zero = CJet2::constant(n, c(0.0, 0.0));
        let diag = CJet2::from_real(&inv);
        MetricJet::from_entries(
            2,
            vec![diag.clone(), zero.clone(), zero, diag],
        )
    }

    #[test]
    fn hopf_first_partials_match_hand_derivative() {
        // ∂_1 g_{1̄1} = -z̄_1/|z|⁴ = -1 at z = (1, 0)
        let p = [1.0, 0.0, 0.0, 0.0];
        let g = hopf_jet(&p);
        let d = hol(g.at(0, 0), 0);
        assert_relative_eq!(d.re, -1.0, max_relative = 1e-14);
        assert!(d.im.abs() < 1e-14);

        // generic point: compare against -z̄_i z_j-free closed form
        let p = [0.3, -0.7, 1.1, 0.4];
        let g = hopf_jet(&p);
        let z1 = c(p[0], p[1]);
        let nz: f64 = p.iter().map(|x| x * x).sum();
        let expect = -z1.conj() / (nz * nz);
        let d = hol(g.at(0, 0), 0);
        assert!((d - expect).norm() < 1e-13);
    }

    #[test]
    fn metric_jet_inverse_is_exact() {
        let p = [0.4, -0.2, 0.9, 1.3];
        let g = hopf_jet(&p);
        let inv = g.inverse_jets().unwrap();
        let prod = jet2_mat_mul(2, &inv, &g.g);
        for j in 0..2 {
            for i in 0..2 {
                let e = &prod[j * 2 + i];
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((e.val() - c(expect, 0.0)).norm() < 1e-13);
                for a in 0..4 {
                    assert!(e.d1(a).norm() < 1e-12);
                    for b in 0..4 {
                        assert!(e.d2(a, b).norm() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn det_jet_matches_product_of_diagonal() {
        let p = [0.5, 0.1, -0.3, 0.8];
        let g = hopf_jet(&p);
        // det = 1/|z|⁴; ∂_a det = -4 x_a / |z|⁶
        let det = g.det_jet();
        let nz: f64 = p.iter().map(|x| x * x).sum();
        assert_relative_eq!(det.val().re, 1.0 / (nz * nz), max_relative = 1e-13);
        for a in 0..4 {
            assert_relative_eq!(
                det.d1(a).re,
                -4.0 * p[a] / nz.powi(3),
                max_relative = 1e-12
            );
            assert!(det.d1(a).im.abs() < 1e-14);
        }
    }

    #[test]
    fn hermitian_deviation_zero_for_hopf() {
        let g = hopf_jet(&[0.2, 0.5, -0.6, 0.9]);
        assert!(g.hermitian_deviation() < 1e-15);
    }

    #[test]
    fn real_jets_match_complex_to_real_conversion() {
        let p = [0.7, -0.1, 0.2, 0.4];
        let g = hopf_jet(&p);
        let gr = g.to_real_jets();
        let expect = crate::algebra::complex_metric_to_real(&g.value());
        for a in 0..4 {
            for b in 0..4 {
                assert_relative_eq!(gr.at(a, b).val(), expect.at(a, b), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn trace_c_jet_of_identity_is_m() {
        // h = Id: η = G, so tr^C h ≡ m with vanishing derivatives.
        let p = [0.3, 0.2, -0.5, 1.0];
        let g = hopf_jet(&p);
        let h = Sym11Jet::from_entries(2, (0..4).map(|k| g.g[k].clone()).collect());
        let t = trace_c_jet(&g, &h).unwrap();
        assert_relative_eq!(t.val(), 2.0, max_relative = 1e-13);
        for a in 0..4 {
            assert!(t.d1(a).abs() < 1e-12);
            for b in 0..4 {
                assert!(t.d2(a, b).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn jet_eval_order_truncation() {
        let field: MetricField = Arc::new(|p: &[f64]| Ok(hopf_jet(p)));
        let p = [1.0, 0.0, 0.0, 0.0];
        let j0 = jet_eval_metric(&field, &p, 0).unwrap();
        assert!(j0.at(0, 0).d1(0).norm() == 0.0);
        let j1 = jet_eval_metric(&field, &p, 1).unwrap();
        assert!(j1.at(0, 0).d1(0).norm() > 0.0);
        assert!(j1.at(0, 0).d2(0, 0).norm() == 0.0);
        assert!(jet_eval_metric(&field, &p, 3).is_err());
    }

    #[test]
    fn hol_antihol_consistency_on_scalar() {
        // u = x² y (m = 1): ∂u = (u_x - i u_y)/2
        let n = 2;
        let (x, y) = (0.8, -0.5);
        let jx = RJet2::coordinate(n, 0, x);
        let jy = RJet2::coordinate(n, 1, y);
        let u = &(&jx * &jx) * &jy;
        let d = hol_scalar(&u, 0);
        assert_relative_eq!(d.re, 0.5 * 2.0 * x * y, max_relative = 1e-14);
        assert_relative_eq!(d.im, -0.5 * x * x, max_relative = 1e-14);
        // ∂∂̄ u = (u_xx + u_yy)/4
        let dd = hol_antihol_scalar(&u, 0, 0);
        assert_relative_eq!(dd.re, 0.25 * 2.0 * y, max_relative = 1e-13);
        assert!(dd.im.abs() < 1e-14);
    }
}
