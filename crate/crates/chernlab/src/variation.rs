//! First and second variations of the Chern calculus along metric paths
//! `g_t = g((Id + t h)·,··)`, i.e. `η_t = G + t η` on stored matrices.
//!
//! Analytic formulas implemented here (all derivatives at `t = 0`, `h` a
//! `Sym^{1,1}` field):
//!
//! * connection: `2 ∇'_X Y = (∇_X h)(Y) - (J ∘ ∇_{JX} h)(Y)`;
//! * complex trace: `(Tr^C)'(α) = -½ g(h, ρ_g^{-1}(α))`;
//! * curvature: `2 Ω'(X,Y) = [Ω(X,Y), h] + J∘(∇_X∇_{JY}h - ∇_Y∇_{JX}h -
//!   ∇_{J[X,Y]}h)` (operator compositions, expanded tensorially below);
//! * Chern-Ricci form: `S̃' = ½ dd^c(tr^C h)`;
//! * Lee form: `θ' = d(tr^C h) - δ^∇ h`;
//! * Laplacian: `Δ'u = g(Hess u, h) + g(du, δ_g h) - g(du, d tr^C h)`;
//! * Ricci endomorphism: `g(S'(X), Y) = -g((h∘S)(X), Y) + ½ dd^c(tr^C h)(X, JY)`;
//! * scalar: `(scal^Ch)' = Δ(tr^C h) + g(d tr^C h, θ) - g(h, S)`, equal to
//!   the half-real-trace form `½(Δ tr^R h + g(d tr^R h, θ)) - g(h, S)`;
//! * adjoint: `γ*(u) = ½(Δu - g(du, θ) + (d*θ) u) Id - u S`;
//! * second variation `(scal^Ch)''(h₁,h₂)` with its Kähler reduction.

use crate::algebra::{
    inner_endo_blocks, inner_oneform, inner_real_endo, inner_sym, rho_inv, CMat, Form11Value,
    MetricValue, RealOneFormValue, Sym11Value,
};
use crate::chern::{
    chern_christoffel, chern_christoffel_jets, chern_curvature_with, chern_ricci,
    chern_ricci_with, chern_scalar_with, connection_apply, ddc_scalar, du_oneform,
    nabla2_h, nabla_h, torsion_and_lee_with, ChernChristoffelValue, TorsionLeeValue,
};
use crate::error::{ChernError, Result};
use crate::fields::{trace_c_jet, trace_of_endo_jets, MetricJet, ScalarJet, Sym11Jet};
use crate::jets::{CJet1, CJet2};
use crate::riemannian::{divergences, divergences_with, RealGeometry};
use num_complex::Complex64;

const GAMMA_FORMS_TOL: f64 = 1e-12;
const KAHLER_POINTWISE_TOL: f64 = 1e-10;
const SLIN2_KAHLER_TOL: f64 = 1e-10;

/// Shared geometry of one point: everything the variation formulas consume
/// that depends only on the metric jet. Hot loops (quadrature over millions
/// of nodes) construct this once per node and evaluate `γ`, `γ*` and the
/// second variation against it.
pub struct PointContext {
    pub gjet: MetricJet,
    pub g: MetricValue,
    ginv2: Vec<CJet2>,
    pub real: RealGeometry,
    gamma_c: ChernChristoffelValue,
    gamma1: Vec<CJet1>,
    pub tl: TorsionLeeValue,
    pub s_form: Form11Value,
    pub s_endo: Sym11Value,
    pub scal: f64,
    pub d_omega_max: f64,
}

impl PointContext {
    pub fn new(gjet: MetricJet) -> Result<Self> {
        let g = gjet.metric_value()?;
        let ginv2 = gjet.inverse_jets()?;
        let real = RealGeometry::new(&gjet)?;
        let gamma_c = chern_christoffel(&gjet)?;
        let gamma1 = chern_christoffel_jets(&gjet)?;
        let tl = torsion_and_lee_with(&gjet, &gamma1)?;
        let curv = chern_curvature_with(&gjet, &g)?;
        let (s_form, s_endo) = chern_ricci_with(&gjet, &g, &curv)?;
        let scal = chern_scalar_with(&g, &curv, &s_form)?;
        let d_omega_max = crate::chern::d_omega_from(&real.gr).max_abs();
        Ok(PointContext {
            gjet,
            g,
            ginv2,
            real,
            gamma_c,
            gamma1,
            tl,
            s_form,
            s_endo,
            scal,
            d_omega_max,
        })
    }

    pub fn endo_jets(&self, h: &Sym11Jet) -> Vec<CJet2> {
        h.endo_jets_with(&self.ginv2)
    }

    pub fn trace_c_jet(&self, h: &Sym11Jet) -> ScalarJet {
        trace_of_endo_jets(self.gjet.m, &self.endo_jets(h))
    }

    fn sym11(&self, h: &Sym11Jet) -> Result<Sym11Value> {
        Sym11Value::new(h.eta_value(), self.g.clone())
    }

    fn h_real_endo(&self, h2jets: &[CJet2]) -> crate::algebra::RealEndoValue {
        let m = self.gjet.m;
        let mut block = CMat::zeros(m);
        for k in 0..m {
            for i in 0..m {
                block.set(k, i, h2jets[k * m + i].val());
            }
        }
        crate::algebra::RealEndoValue {
            mat: crate::algebra::complex_endo_to_real(&block),
        }
    }

    /// `γ_g(h) = Δ(tr^C h) + g(d tr^C h, θ) - g(h, S)` with the
    /// half-real-trace restatement asserted against it.
    pub fn gamma_of(&self, h: &Sym11Jet) -> Result<f64> {
        let hj = self.endo_jets(h);
        let tr = trace_of_endo_jets(self.gjet.m, &hj);
        let (lap_tr, _) = self.real.laplacian_hessian(&tr);
        let dtr = du_oneform(&tr);
        let hval = self.sym11(h)?;
        let pair_hs = inner_sym(&hval, &self.s_endo);

        let form_c = lap_tr + inner_oneform(&self.g, &dtr, &self.tl.theta) - pair_hs;

        let tr_r = tr.scale(2.0);
        let (lap_tr_r, _) = self.real.laplacian_hessian(&tr_r);
        let dtr_r = du_oneform(&tr_r);
        let form_r =
            0.5 * (lap_tr_r + inner_oneform(&self.g, &dtr_r, &self.tl.theta)) - pair_hs;

        let scale = 1.0 + form_c.abs().max(form_r.abs());
        if (form_c - form_r).abs() > GAMMA_FORMS_TOL * scale {
            return Err(ChernError::CrossCheckFailed {
                what: "gamma complex-trace vs real-trace form".into(),
                defect: (form_c - form_r).abs() / scale,
                tol: GAMMA_FORMS_TOL,
            });
        }
        Ok(form_c)
    }

    /// `γ*(u) = ½(Δu - g(du, θ) + (d*θ) u) Id - u S`.
    pub fn gamma_star_of(&self, ujet: &ScalarJet) -> Result<Sym11Value> {
        let (lap_u, _) = self.real.laplacian_hessian(ujet);
        let du = du_oneform(ujet);
        let u = ujet.val();
        let coeff =
            0.5 * (lap_u - inner_oneform(&self.g, &du, &self.tl.theta) + self.tl.dstar_theta * u);
        let eta = self
            .g
            .mat()
            .scale(Complex64::new(coeff, 0.0))
            .sub(&self.s_form.mat().scale(Complex64::new(u, 0.0)));
        Sym11Value::new(eta, self.g.clone())
    }

    pub fn gamma_star_residual_of(&self, ujet: &ScalarJet) -> Result<f64> {
        let gs = self.gamma_star_of(ujet)?;
        Ok(inner_sym(&gs, &gs).max(0.0).sqrt())
    }

    /// `(scal^Ch)''(h₁, h₂)` per the general formula; on pointwise-Kähler
    /// input the Kähler reduction is evaluated and asserted to agree.
    pub fn second_var_of(&self, h1: &Sym11Jet, h2: Option<&Sym11Jet>) -> Result<f64> {
        let h2 = h2.unwrap_or(h1);
        let h1jets = self.endo_jets(h1);
        let h2jets = self.endo_jets(h2);
        let m = self.gjet.m;

        let tr1 = trace_of_endo_jets(m, &h1jets);
        let tr2 = trace_of_endo_jets(m, &h2jets);
        let dtr1 = du_oneform(&tr1);
        let (_, hess_tr1) = self.real.laplacian_hessian(&tr1);
        let h2_real = self.h_real_endo(&h2jets);
        let (dg2, dn2) = divergences_with(&self.real, &self.gamma_c, &h2jets);

        let mut h1_block = CMat::zeros(m);
        let mut h2_block = CMat::zeros(m);
        for k in 0..m {
            for i in 0..m {
                h1_block.set(k, i, h1jets[k * m + i].val());
                h2_block.set(k, i, h2jets[k * m + i].val());
            }
        }

        let div_diff = RealOneFormValue {
            comps: dg2
                .comps
                .iter()
                .zip(dn2.comps.iter())
                .map(|(a, b)| a - b)
                .collect(),
        };
        let theta_h2 = oneform_compose(&self.tl.theta, &h2_block);
        let h2s = h2_block.mul(&self.s_endo.endo_matrix());
        let ddc2 = ddc_scalar(&tr2)?;
        let h1_val = self.sym11(h1)?;
        let rho_inv_ddc2 = rho_inv(&self.g, &ddc2)?;

        let term_hess = inner_real_endo(&self.g, &hess_tr1, &h2_real)?;
        let term_div = inner_oneform(&self.g, &dtr1, &div_diff);
        let term_theta = -inner_oneform(&self.g, &dtr1, &theta_h2);
        let term_s = inner_endo_blocks(&self.g, &h1_block, &h2s);
        let term_ddc = -0.5 * inner_sym(&h1_val, &rho_inv_ddc2);
        let slin2 = term_hess + term_div + term_theta + term_s + term_ddc;

        if self.d_omega_max <= KAHLER_POINTWISE_TOL {
            let k = self.second_var_kahler_of(h1, Some(h2))?;
            let scale = 1.0 + slin2.abs().max(k.abs());
            if (slin2 - k).abs() > SLIN2_KAHLER_TOL * scale {
                return Err(ChernError::CrossCheckFailed {
                    what: "second variation vs Kähler reduction".into(),
                    defect: (slin2 - k).abs() / scale,
                    tol: SLIN2_KAHLER_TOL,
                });
            }
        }
        Ok(slin2)
    }

    /// Kähler form of the second variation.
    pub fn second_var_kahler_of(&self, h1: &Sym11Jet, h2: Option<&Sym11Jet>) -> Result<f64> {
        let h2 = h2.unwrap_or(h1);
        let m = self.gjet.m;
        let h1jets = self.endo_jets(h1);
        let h2jets = self.endo_jets(h2);
        let tr1 = trace_of_endo_jets(m, &h1jets);
        let tr2 = trace_of_endo_jets(m, &h2jets);
        let (_, hess1) = self.real.laplacian_hessian(&tr1);
        let (_, hess2) = self.real.laplacian_hessian(&tr2);
        let h1_real = self.h_real_endo(&h1jets);
        let h2_real = self.h_real_endo(&h2jets);
        let mut h1_block = CMat::zeros(m);
        let mut h2_block = CMat::zeros(m);
        for k in 0..m {
            for i in 0..m {
                h1_block.set(k, i, h1jets[k * m + i].val());
                h2_block.set(k, i, h2jets[k * m + i].val());
            }
        }
        let h2s = h2_block.mul(&self.s_endo.endo_matrix());
        Ok(inner_real_endo(&self.g, &hess1, &h2_real)?
            + inner_real_endo(&self.g, &h1_real, &hess2)?
            + inner_endo_blocks(&self.g, &h1_block, &h2s))
    }

    /// `Δ'u = g(Hess u, h) + g(du, δ_g h) - g(du, d tr^C h)`.
    pub fn var_laplacian_of(&self, h: &Sym11Jet, ujet: &ScalarJet) -> Result<f64> {
        let hjets = self.endo_jets(h);
        let (_, hess_endo) = self.real.laplacian_hessian(ujet);
        let h_real = self.h_real_endo(&hjets);
        let du = du_oneform(ujet);
        let (dg, _) = divergences_with(&self.real, &self.gamma_c, &hjets);
        let tr = trace_of_endo_jets(self.gjet.m, &hjets);
        let dtr = du_oneform(&tr);
        Ok(inner_real_endo(&self.g, &hess_endo, &h_real)?
            + inner_oneform(&self.g, &du, &dg)
            - inner_oneform(&self.g, &du, &dtr))
    }
}

/// Everything the variation formulas need at one point.
#[derive(Clone, Debug)]
pub struct VariationInput {
    pub point: Vec<f64>,
    pub gjet: MetricJet,
    pub h1: Sym11Jet,
    pub h2: Option<Sym11Jet>,
    pub ujet: Option<ScalarJet>,
}

impl VariationInput {
    pub fn new(point: &[f64], gjet: MetricJet, h1: Sym11Jet) -> Self {
        VariationInput {
            point: point.to_vec(),
            gjet,
            h1,
            h2: None,
            ujet: None,
        }
    }

    pub fn with_second(mut self, h2: Sym11Jet) -> Self {
        self.h2 = Some(h2);
        self
    }

    pub fn with_scalar(mut self, ujet: ScalarJet) -> Self {
        self.ujet = Some(ujet);
        self
    }

    fn ujet(&self) -> Result<&ScalarJet> {
        self.ujet.as_ref().ok_or(ChernError::InsufficientJetOrder {
            need: 2,
            have: 0,
        })
    }
}

/// Real components of `J X` for a real vector in `(x¹, y¹, ...)` ordering.
fn j_apply(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 0..x.len() / 2 {
        out[2 * i] = -x[2 * i + 1];
        out[2 * i + 1] = x[2 * i];
    }
    out
}

/// Real vector from a holomorphic component vector.
fn complex_to_real_vec(v: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.len());
    for c in v {
        out.push(c.re);
        out.push(c.im);
    }
    out
}

/// `g(E X, Y)` for a `J`-commuting endomorphism given by its holomorphic
/// block, with `X`, `Y` real.
fn endo_pair(gjet: &MetricJet, block: &CMat, x: &[f64], y: &[f64]) -> Result<f64> {
    let gr = crate::algebra::complex_metric_to_real(&gjet.value());
    let e = crate::algebra::complex_endo_to_real(block);
    let n = gr.n;
    let mut ex = vec![0.0; n];
    for r in 0..n {
        for c in 0..n {
            ex[r] += e.at(r, c) * x[c];
        }
    }
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            s += ex[r] * gr.at(r, c) * y[c];
        }
    }
    Ok(s)
}

/// One-form composed with an endomorphism: `(α∘h)(X) = α(h X)`, components
/// `(α∘h)_k = α_s H^s_k`.
fn oneform_compose(alpha: &RealOneFormValue, h_block: &CMat) -> RealOneFormValue {
    let m = alpha.m();
    let mut comps = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        for s in 0..m {
            comps[k] += alpha.comps[s] * h_block.at(s, k);
        }
    }
    RealOneFormValue { comps }
}

/// `∇'_X Y = ½[(∇_X h)(Y) - (J ∘ ∇_{JX} h)(Y)]` as a real tangent vector.
pub fn var_connection(vin: &VariationInput, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let m = vin.gjet.m;
    let nh = nabla_h(&vin.gjet, &vin.h1)?;
    let mx = nh.along_real(x);
    let mjx = nh.along_real(&j_apply(x));
    let i = Complex64::new(0.0, 1.0);
    let mut v = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        for j in 0..m {
            let yj = Complex64::new(y[2 * j], y[2 * j + 1]);
            v[k] += 0.5 * (mx.at(k, j) - i * mjx.at(k, j)) * yj;
        }
    }
    Ok(complex_to_real_vec(&v))
}

/// `(Tr^C)'(α) = -½ g(h, ρ_g^{-1}(α))`.
pub fn var_trace(vin: &VariationInput, alpha: &Form11Value) -> Result<f64> {
    let g = vin.gjet.metric_value()?;
    let h = Sym11Value::new(vin.h1.eta_value(), g.clone())?;
    Ok(-0.5 * inner_sym(&h, &rho_inv(&g, alpha)?))
}

/// Holomorphic block of `Ω'(X, Y)` for constant-coefficient chart vectors.
///
/// Operator compositions are expanded through the tensorial second
/// derivative: `∇_X(∇_W h) = (∇²h)(X, W) + (∇h)(∇_X W)` and `∇_X W = A(X)W`
/// for a coordinate field `W`; the `∇_{J[X,Y]}h` term drops since chart
/// coordinate fields commute.
pub fn var_curvature(vin: &VariationInput, x: &[f64], y: &[f64]) -> Result<CMat> {
    let g = vin.gjet.metric_value()?;
    let gamma = chern_christoffel(&vin.gjet)?;
    let curv = crate::chern::chern_curvature(&vin.gjet)?;
    let (nh, n2h) = nabla2_h(&vin.gjet, &vin.h1)?;
    let h_block = Sym11Value::new(vin.h1.eta_value(), g.clone())?.endo_matrix();

    let jy = j_apply(y);
    let jx = j_apply(x);

    // B(X, W) = (∇²h)(X, W) + (∇h)(A(X) W)
    let b = |xx: &[f64], ww: &[f64]| -> CMat {
        let tens = n2h.along_real(xx, ww);
        let corr = nh.along_real(&connection_apply(&gamma, xx, ww));
        tens.add(&corr)
    };

    let omega_xy = curv.endo_block(&g, x, y);
    let comm = omega_xy.mul(&h_block).sub(&h_block.mul(&omega_xy));
    let cov = b(x, &jy).sub(&b(y, &jx));
    let i = Complex64::new(0.0, 1.0);
    Ok(comm.add(&cov.scale(i)).scale(Complex64::new(0.5, 0.0)))
}

/// `S̃' = ½ dd^c(tr^C h)`.
pub fn var_ricci_form(vin: &VariationInput) -> Result<Form11Value> {
    let tr = trace_c_jet(&vin.gjet, &vin.h1)?;
    let ddc = ddc_scalar(&tr)?;
    Form11Value::new(ddc.mat().scale(Complex64::new(0.5, 0.0)))
}

/// `θ' = d(tr^C h) - δ^∇ h`.
pub fn var_lee(vin: &VariationInput) -> Result<RealOneFormValue> {
    let tr = trace_c_jet(&vin.gjet, &vin.h1)?;
    let dtr = du_oneform(&tr);
    let (_, dn) = divergences(&vin.gjet, &vin.h1)?;
    Ok(RealOneFormValue {
        comps: dtr
            .comps
            .iter()
            .zip(dn.comps.iter())
            .map(|(a, b)| a - b)
            .collect(),
    })
}

/// `Δ'u = g(Hess u, h) + g(du, δ_g h) - g(du, d tr^C h)`.
pub fn var_laplacian(vin: &VariationInput) -> Result<f64> {
    PointContext::new(vin.gjet.clone())?.var_laplacian_of(&vin.h1, vin.ujet()?)
}

/// `g(S'(X), Y) = -g((h∘S)(X), Y) + ½ dd^c(tr^C h)(X, JY)`.
pub fn var_ricci_endo(vin: &VariationInput, x: &[f64], y: &[f64]) -> Result<f64> {
    let g = vin.gjet.metric_value()?;
    let (_, s_endo) = chern_ricci(&vin.gjet)?;
    let h_block = Sym11Value::new(vin.h1.eta_value(), g)?.endo_matrix();
    let hs = h_block.mul(&s_endo.endo_matrix());
    let tr = trace_c_jet(&vin.gjet, &vin.h1)?;
    let ddc = ddc_scalar(&tr)?;
    Ok(-endo_pair(&vin.gjet, &hs, x, y)? + 0.5 * ddc.eval_real(x, &j_apply(y)))
}

/// The matrix form of `S'`: `-H_h H_S + G^{-1} · (½ dd^c tr^C h)`, the same
/// object the finite-difference oracle sees as `d/dt [G_t^{-1} S̃_t]`.
pub fn var_ricci_endo_matrix(vin: &VariationInput) -> Result<CMat> {
    let g = vin.gjet.metric_value()?;
    let (_, s_endo) = chern_ricci(&vin.gjet)?;
    let h_block = Sym11Value::new(vin.h1.eta_value(), g.clone())?.endo_matrix();
    let tr = trace_c_jet(&vin.gjet, &vin.h1)?;
    let ddc_half = ddc_scalar(&tr)?.mat().scale(Complex64::new(0.5, 0.0));
    Ok(g.inv()
        .mul(&ddc_half)
        .sub(&h_block.mul(&s_endo.endo_matrix())))
}

/// The linearized Chern-scalar curvature
/// `γ_g(h) = Δ(tr^C h) + g(d tr^C h, θ) - g(h, S)`, asserted against its
/// half-real-trace restatement.
pub fn gamma(vin: &VariationInput) -> Result<f64> {
    PointContext::new(vin.gjet.clone())?.gamma_of(&vin.h1)
}

/// The formal adjoint `γ*(u) = ½(Δu - g(du, θ) + (d*θ) u) Id - u S`.
pub fn gamma_star(vin: &VariationInput) -> Result<Sym11Value> {
    PointContext::new(vin.gjet.clone())?.gamma_star_of(vin.ujet()?)
}

/// Pointwise residual norm of `γ*(u)` in the tensor metric.
pub fn gamma_star_residual(vin: &VariationInput) -> Result<f64> {
    PointContext::new(vin.gjet.clone())?.gamma_star_residual_of(vin.ujet()?)
}

/// `g(α, β)' = -g(α∘h, β)` for real 1-forms.
pub fn var_pairing(vin: &VariationInput, alpha: &RealOneFormValue, beta: &RealOneFormValue) -> Result<f64> {
    let g = vin.gjet.metric_value()?;
    let h_block = Sym11Value::new(vin.h1.eta_value(), g.clone())?.endo_matrix();
    Ok(-inner_oneform(&g, &oneform_compose(alpha, &h_block), beta))
}

/// `g(A, B)' = 0` for endomorphism pairings: the metric factors cancel.
pub fn var_pairing_endo() -> f64 {
    0.0
}

/// The second variation `(scal^Ch)''(h₁, h₂)`:
///
/// `g(Hess(tr^C h₁), h₂) + g(d tr^C h₁, δ_g h₂ - δ^∇ h₂)
///  - g(d tr^C h₁, θ∘h₂) + g(h₁, h₂∘S) - ½ g(h₁, ρ_g^{-1}(dd^c tr^C h₂))`.
///
/// On pointwise-Kähler input (measured through `dω`) the Kähler reduction
/// is evaluated too and both values are asserted to agree.
pub fn second_var(vin: &VariationInput) -> Result<f64> {
    PointContext::new(vin.gjet.clone())?.second_var_of(&vin.h1, vin.h2.as_ref())
}

/// Kähler form of the second variation:
/// `g(Hess(tr^C h₁), h₂) + g(h₁, Hess(tr^C h₂)) + g(h₁, h₂∘Ric)`.
pub fn second_var_kahler(vin: &VariationInput) -> Result<f64> {
    PointContext::new(vin.gjet.clone())?.second_var_kahler_of(&vin.h1, vin.h2.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::by_name;
    use crate::jets::{CJet2, RJet2};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// h = φ·Id as a perturbation jet: η = φ·G entrywise.
    fn conformal_h(gjet: &MetricJet, phi: &RJet2) -> Sym11Jet {
        let m = gjet.m;
        let cphi = CJet2::from_real(phi);
        let mut e = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                e.push(&cphi * gjet.at(j, i));
            }
        }
        Sym11Jet::from_entries(m, e)
    }

    fn identity_h(gjet: &MetricJet) -> Sym11Jet {
        let m = gjet.m;
        let mut e = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                e.push(gjet.at(j, i).clone());
            }
        }
        Sym11Jet::from_entries(m, e)
    }

    #[test]
    fn var_trace_on_omega_gives_minus_trace() {
        // α = ω: (Tr^C)'(ω) = -tr^C h; with h = Id this is -m.
        let spec = by_name("hopf").unwrap();
        let mut rng = crate::rng::CounterRng::new(4);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let vin = VariationInput::new(&p, g.clone(), identity_h(&g));
        let omega = Form11Value::new(g.value()).unwrap();
        assert_relative_eq!(
            var_trace(&vin, &omega).unwrap(),
            -2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn var_connection_of_identity_vanishes() {
        let spec = by_name("cp1xcp1").unwrap();
        let mut rng = crate::rng::CounterRng::new(8);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let vin = VariationInput::new(&p, g.clone(), identity_h(&g));
        let v = var_connection(&vin, &[1.0, 0.2, -0.3, 0.5], &[0.0, 1.0, 0.7, -0.1]).unwrap();
        for x in v {
            assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn var_ricci_form_vanishes_for_constant_trace() {
        // Hopf, h = Id: tr^C h = 2 constant so S̃' = 0.
        let spec = by_name("hopf").unwrap();
        let mut rng = crate::rng::CounterRng::new(12);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let vin = VariationInput::new(&p, g.clone(), identity_h(&g));
        let s1 = var_ricci_form(&vin).unwrap();
        assert!(s1.mat().frobenius() < 1e-11);
    }

    #[test]
    fn var_lee_of_constant_multiple_vanishes() {
        let spec = by_name("hopf").unwrap();
        let mut rng = crate::rng::CounterRng::new(21);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let h = identity_h(&g).scale(0.7);
        let vin = VariationInput::new(&p, g, h);
        let lee = var_lee(&vin).unwrap();
        for comp in lee.comps {
            assert!(comp.norm() < 1e-12);
        }
    }

    #[test]
    fn var_laplacian_conformal_path_flat() {
        // flat m=1, h = Id, u = cos x: Δ_{g_t} = (1+t)^{-1} Δ so Δ'u = -cos x.
        let spec = by_name("flat_torus_1").unwrap();
        let p = [0.6, 1.1];
        let g = spec.metric_at(&p).unwrap();
        let u = RJet2::coordinate(2, 0, p[0]).cos();
        let vin = VariationInput::new(&p, g.clone(), identity_h(&g)).with_scalar(u);
        assert_relative_eq!(
            var_laplacian(&vin).unwrap(),
            -p[0].cos(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn gamma_closed_forms() {
        // flat m=1, h = cos x · Id: γ(h) = Δ cos x = cos x
        let spec = by_name("flat_torus_1").unwrap();
        let p = [0.8, 0.3];
        let g = spec.metric_at(&p).unwrap();
        let phi = RJet2::coordinate(2, 0, p[0]).cos();
        let vin = VariationInput::new(&p, g.clone(), conformal_h(&g, &phi));
        assert_relative_eq!(gamma(&vin).unwrap(), p[0].cos(), max_relative = 1e-12);

        // Hopf, h = Id: γ = -g(Id, S) = -scal^Ch = -4
        let spec = by_name("hopf").unwrap();
        let mut rng = crate::rng::CounterRng::new(30);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let vin = VariationInput::new(&p, g.clone(), identity_h(&g));
        assert_relative_eq!(gamma(&vin).unwrap(), -4.0, max_relative = 1e-11);
    }

    #[test]
    fn gamma_traceless_on_product_vanishes() {
        // cp1xcp1 with h = diag(f, -f)-type (traceless): γ(h) = -g(h, S) =
        // -(λ/2m) tr^R h = 0.
        let spec = by_name("cp1xcp1").unwrap();
        let mut rng = crate::rng::CounterRng::new(14);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let n = 4;
        let f = RJet2::coordinate(n, 0, p[0]).sin();
        let cf = CJet2::from_real(&f);
        let zero = CJet2::constant(n, c(0.0, 0.0));
        let h = Sym11Jet::from_entries(
            2,
            vec![
                &cf * g.at(0, 0),
                zero.clone(),
                zero,
                &cf.scale(c(-1.0, 0.0)) * g.at(1, 1),
            ],
        );
        let vin = VariationInput::new(&p, g, h);
        assert!(gamma(&vin).unwrap().abs() < 1e-11);
    }

    #[test]
    fn gamma_star_flat_and_kahler_einstein() {
        // flat torus: γ*(u) = ½(Δu)·Id
        let spec = by_name("flat_torus_1").unwrap();
        let p = [0.2, 0.9];
        let g = spec.metric_at(&p).unwrap();
        let u = RJet2::coordinate(2, 0, p[0]).cos();
        let lap = p[0].cos();
        let vin = VariationInput::new(&p, g.clone(), identity_h(&g)).with_scalar(u);
        let gs = gamma_star(&vin).unwrap();
        let hm = gs.endo_matrix();
        assert!((hm.at(0, 0) - c(0.5 * lap, 0.0)).norm() < 1e-12);

        // cp1xcp1, u = first-factor height: γ*(u) = 0 (kernel element)
        let spec = by_name("cp1xcp1").unwrap();
        let mut rng = crate::rng::CounterRng::new(77);
        for _ in 0..5 {
            let p = spec.sample_point(&mut rng);
            let g = spec.metric_at(&p).unwrap();
            let n = 4;
            let x = RJet2::coordinate(n, 0, p[0]);
            let y = RJet2::coordinate(n, 1, p[1]);
            let r2 = &(&x * &x) + &(&y * &y);
            let one = RJet2::constant(n, 1.0);
            let u = &(&r2 - &one) * &(&r2 + &one).recip();
            let vin = VariationInput::new(&p, g.clone(), identity_h(&g)).with_scalar(u);
            assert!(gamma_star_residual(&vin).unwrap() < 1e-9);
        }
    }

    #[test]
    fn second_var_flat_closed_form() {
        // flat m=1, h = cos x·Id: (scal)''(h,h) = -2 cos²x
        let spec = by_name("flat_torus_1").unwrap();
        for x0 in [0.0, 0.4, 1.3, 2.9] {
            let p = [x0, 0.5];
            let g = spec.metric_at(&p).unwrap();
            let phi = RJet2::coordinate(2, 0, p[0]).cos();
            let vin = VariationInput::new(&p, g.clone(), conformal_h(&g, &phi));
            assert_relative_eq!(
                second_var(&vin).unwrap(),
                -2.0 * x0.cos() * x0.cos(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn second_var_traceless_on_einstein_is_norm() {
        // cp1xcp1, traceless h: (scal)'' = (λ/2m)|h|² = |h|²
        let spec = by_name("cp1xcp1").unwrap();
        let mut rng = crate::rng::CounterRng::new(19);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let n = 4;
        let f = RJet2::coordinate(n, 2, p[2]).sin();
        let cf = CJet2::from_real(&f);
        let zero = CJet2::constant(n, c(0.0, 0.0));
        let h = Sym11Jet::from_entries(
            2,
            vec![
                &cf * g.at(0, 0),
                zero.clone(),
                zero,
                &cf.scale(c(-1.0, 0.0)) * g.at(1, 1),
            ],
        );
        let gv = g.metric_value().unwrap();
        let hv = Sym11Value::new(h.eta_value(), gv).unwrap();
        let norm2 = inner_sym(&hv, &hv);
        let vin = VariationInput::new(&p, g, h);
        assert_relative_eq!(second_var(&vin).unwrap(), norm2, max_relative = 1e-10);
    }

    #[test]
    fn second_var_zero_perturbation() {
        let spec = by_name("hopf").unwrap();
        let mut rng = crate::rng::CounterRng::new(2);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let vin = VariationInput::new(&p, g, Sym11Jet::zero(2));
        assert_eq!(second_var(&vin).unwrap(), 0.0);
    }

    #[test]
    fn var_pairing_flat_conformal() {
        // flat m=1, α = β = dx, h = φ·Id -> -φ
        let spec = by_name("flat_torus_1").unwrap();
        let p = [1.2, 0.1];
        let g = spec.metric_at(&p).unwrap();
        let phi0 = 0.37;
        let phi = RJet2::constant(2, phi0);
        let vin = VariationInput::new(&p, g.clone(), conformal_h(&g, &phi));
        let dx = RealOneFormValue {
            comps: vec![c(0.5, 0.0)],
        };
        assert_relative_eq!(
            var_pairing(&vin, &dx, &dx).unwrap(),
            -phi0,
            max_relative = 1e-13
        );
        assert_eq!(var_pairing_endo(), 0.0);

        // h = 0 -> 0
        let vin = VariationInput::new(&p, g, Sym11Jet::zero(1));
        assert_eq!(var_pairing(&vin, &dx, &dx).unwrap(), 0.0);
    }

    #[test]
    fn var_ricci_endo_identity_direction() {
        // h = Id: tr^C h constant, so g(S'X, Y) = -g(S X, Y).
        let spec = by_name("cp1").unwrap();
        let mut rng = crate::rng::CounterRng::new(99);
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p).unwrap();
        let vin = VariationInput::new(&p, g.clone(), identity_h(&g));
        let x = [0.7, -0.2];
        let y = [0.1, 0.9];
        let gv = g.metric_value().unwrap();
        let (_, s_endo) = chern_ricci(&g).unwrap();
        let expect = -endo_pair(&g, &s_endo.endo_matrix(), &x, &y).unwrap();
        let _ = gv;
        assert_relative_eq!(
            var_ricci_endo(&vin, &x, &y).unwrap(),
            expect,
            max_relative = 1e-11
        );
    }
}
