//! Levi-Civita calculus in real coordinates.
//!
//! The Chern side works in complex indices; everything tied to `D^g`
//! (Laplacian, Hessian, divergence, Riemann curvature) is computed here on
//! the real coordinate Gram matrix produced by `to_real`. The Laplacian is
//! the geometer's positive-spectrum operator: `Δ u = -g^{ab}(∂_a∂_b u -
//! Γ^c_ab ∂_c u)`, so `Δ cos x = cos x` on the flat torus.

use crate::algebra::{complex_endo_to_real, RealEndoValue, RealOneFormValue, RMat};
use crate::error::Result;
use crate::fields::{jet1_mat_inverse, MetricJet, ScalarJet, Sym11Jet};
use crate::jets::RJet1;
use num_complex::Complex64;

/// Levi-Civita Christoffel symbols `Γ^c_ab` in real coordinates.
#[derive(Clone, Debug)]
pub struct LCChristoffelValue {
    pub n: usize,
    gamma: Vec<f64>,
}

impl LCChristoffelValue {
    #[inline]
    pub fn at(&self, c: usize, a: usize, b: usize) -> f64 {
        self.gamma[(c * self.n + a) * self.n + b]
    }
}

/// Shared real-coordinate geometry at one point: the real metric jets, the
/// value-level inverse and the Levi-Civita Christoffels. Hot loops build
/// this once per node and feed it to the operators below.
#[derive(Clone, Debug)]
pub struct RealGeometry {
    pub n: usize,
    pub gr: crate::fields::RealMetricJet,
    pub ginv: RMat,
    pub gamma: LCChristoffelValue,
}

impl RealGeometry {
    pub fn new(gjet: &MetricJet) -> Result<Self> {
        let n = 2 * gjet.m;
        let gr = gjet.to_real_jets();
        let ginv = gr.value().inverse()?;
        let mut gamma = vec![0.0; n * n * n];
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += ginv.at(c, d)
                            * (gr.at(d, b).d1(a) + gr.at(d, a).d1(b) - gr.at(a, b).d1(d));
                    }
                    gamma[(c * n + a) * n + b] = 0.5 * s;
                }
            }
        }
        Ok(RealGeometry {
            n,
            gr,
            ginv,
            gamma: LCChristoffelValue { n, gamma },
        })
    }

    /// Laplacian (positive spectrum) and Hessian endomorphism of `u`.
    pub fn laplacian_hessian(&self, ujet: &ScalarJet) -> (f64, RealEndoValue) {
        let n = self.n;
        let mut hess_form = RMat::zeros(n);
        for a in 0..n {
            for b in 0..n {
                let mut v = ujet.d2(a, b);
                for c in 0..n {
                    v -= self.gamma.at(c, a, b) * ujet.d1(c);
                }
                hess_form.set(a, b, v);
            }
        }
        let mut lap = 0.0;
        for a in 0..n {
            for b in 0..n {
                lap -= self.ginv.at(a, b) * hess_form.at(a, b);
            }
        }
        let hess_endo = RealEndoValue {
            mat: self.ginv.mul(&hess_form),
        };
        (lap, hess_endo)
    }
}

pub fn lc_christoffel(gjet: &MetricJet) -> Result<LCChristoffelValue> {
    Ok(RealGeometry::new(gjet)?.gamma)
}

/// Christoffels as order-1 jets (their partials consume the metric 2-jets).
pub fn lc_christoffel_jets(gjet: &MetricJet) -> Result<Vec<RJet1>> {
    let n = 2 * gjet.m;
    let gr = gjet.to_real_jets();
    let g1: Vec<RJet1> = (0..n * n).map(|e| gr.at(e / n, e % n).truncate()).collect();
    let ginv1 = jet1_mat_inverse(n, &g1)?;
    let mut out = vec![RJet1::constant(n, 0.0); n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut s = RJet1::constant(n, 0.0);
                for d in 0..n {
                    let term = &(&gr.at(d, b).deriv(a) + &gr.at(d, a).deriv(b))
                        - &gr.at(a, b).deriv(d);
                    s = &s + &(&ginv1[c * n + d] * &term);
                }
                out[(c * n + a) * n + b] = s.scale(0.5);
            }
        }
    }
    Ok(out)
}

/// Laplacian, Hessian endomorphism and Christoffels of `u` at a point.
pub fn levi_civita(
    gjet: &MetricJet,
    ujet: &ScalarJet,
) -> Result<(f64, RealEndoValue, LCChristoffelValue)> {
    let geo = RealGeometry::new(gjet)?;
    let (lap, hess_endo) = geo.laplacian_hessian(ujet);
    Ok((lap, hess_endo, geo.gamma))
}

pub fn laplacian(gjet: &MetricJet, ujet: &ScalarJet) -> Result<f64> {
    Ok(levi_civita(gjet, ujet)?.0)
}

/// Real-coordinate order-1 jets of the endomorphism blocks `H = G^{-1}η`.
fn real_endo_jets_from(m: usize, h2: &[crate::jets::CJet2]) -> Vec<RJet1> {
    let n = 2 * m;
    let zero = RJet1::constant(n, 0.0);
    let mut out = vec![zero; n * n];
    for k in 0..m {
        for i in 0..m {
            let e = h2[k * m + i].truncate();
            let re = e.re();
            let im = e.im();
            out[(2 * k) * n + 2 * i] = re.clone();
            out[(2 * k + 1) * n + 2 * i] = im.clone();
            out[(2 * k) * n + 2 * i + 1] = im.scale(-1.0);
            out[(2 * k + 1) * n + 2 * i + 1] = re;
        }
    }
    out
}

/// As [`divergences`] but with the shared geometry, Chern Christoffels and
/// the endomorphism jets `H = G^{-1}η` supplied by the caller.
pub fn divergences_with(
    geo: &RealGeometry,
    cgamma: &crate::chern::ChernChristoffelValue,
    h2: &[crate::jets::CJet2],
) -> (RealOneFormValue, RealOneFormValue) {
    let n = geo.n;
    let m = n / 2;

    // δ_g h: (δ_g h)_a = Σ_b [ ∂_b E^b_a + Γ^b_bd E^d_a - Γ^d_ba E^b_d ]
    let e = real_endo_jets_from(m, h2);
    let gamma = &geo.gamma;
    let mut delta_g = vec![0.0; n];
    for a in 0..n {
        let mut s = 0.0;
        for b in 0..n {
            s += e[b * n + a].d1(b);
            for d in 0..n {
                s += gamma.at(b, b, d) * e[d * n + a].val() - gamma.at(d, b, a) * e[b * n + d].val();
            }
        }
        delta_g[a] = s;
    }
    let delta_g = RealOneFormValue::from_real_components(&delta_g);

    // δ^∇ h: (δ^∇ h)_k = Σ_i [ ∂_i H^i_k + Γ^i_ir H^r_k - Γ^r_ik H^i_r ]
    let mut comps = Vec::with_capacity(m);
    for k in 0..m {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..m {
            s += crate::fields::hol(&h2[i * m + k], i);
            for r in 0..m {
                s += cgamma.at(i, i, r) * h2[r * m + k].val()
                    - cgamma.at(r, i, k) * h2[i * m + r].val();
            }
        }
        comps.push(s);
    }
    let delta_nabla = RealOneFormValue { comps };

    (delta_g, delta_nabla)
}

/// The two divergences of a `Sym^{1,1}` field: `δ_g h` through the
/// Levi-Civita connection (real coordinates) and `δ^∇ h` through the Chern
/// connection (complex coordinates). Both are returned as real 1-forms via
/// their `dz^i` components.
pub fn divergences(
    gjet: &MetricJet,
    hjet: &Sym11Jet,
) -> Result<(RealOneFormValue, RealOneFormValue)> {
    let geo = RealGeometry::new(gjet)?;
    let cgamma = crate::chern::chern_christoffel(gjet)?;
    let h2 = hjet.endo_jets(gjet)?;
    Ok(divergences_with(&geo, &cgamma, &h2))
}

/// Riemannian scalar curvature from the full Levi-Civita curvature tensor;
/// the independent oracle for `scal^Ch = scal` on Kähler metrics.
pub fn lc_scalar_curvature(gjet: &MetricJet) -> Result<f64> {
    let n = 2 * gjet.m;
    let gamma1 = lc_christoffel_jets(gjet)?;
    let at = |c: usize, a: usize, b: usize| &gamma1[(c * n + a) * n + b];
    let gr = gjet.to_real_jets().value();
    let ginv = gr.inverse()?;

    // Ric_bc = ∂_a Γ^a_bc - ∂_b Γ^a_ac + Γ^a_ae Γ^e_bc - Γ^a_be Γ^e_ac
    let mut scal = 0.0;
    for b in 0..n {
        for c in 0..n {
            let mut ric = 0.0;
            for a in 0..n {
                ric += at(a, b, c).d1(a) - at(a, a, c).d1(b);
                for e in 0..n {
                    ric += at(a, a, e).val() * at(e, b, c).val()
                        - at(a, b, e).val() * at(e, a, c).val();
                }
            }
            scal += ginv.at(b, c) * ric;
        }
    }
    Ok(scal)
}

/// `h` as a real endomorphism value (convenience for pairings).
pub fn real_endo_value(gjet: &MetricJet, hjet: &Sym11Jet) -> Result<RealEndoValue> {
    let g = gjet.metric_value()?;
    let eta = hjet.eta_value();
    let h = g.inv().mul(&eta);
    Ok(RealEndoValue {
        mat: complex_endo_to_real(&h),
    })
}
