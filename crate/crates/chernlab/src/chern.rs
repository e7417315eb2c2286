//! The Chern connection and its curvature in holomorphic coordinates.
//!
//! Everything here is pointwise: operators consume a [`MetricJet`] (order 2)
//! and contract stored derivatives. Local formulas:
//!
//! * Christoffels: `Γ^k_ij = g^{kr̄} ∂_i g_{r̄j}` (only pure holomorphic
//!   indices are nonzero; conjugates are implicit);
//! * curvature: `Ω_{j̄il̄k} = -∂_i∂_j̄ g_{l̄k} + g^{sr̄} (∂_i g_{r̄k})(∂_j̄ g_{l̄s})`;
//! * first Chern-Ricci form: `S̃_{j̄i} = g^{kl̄} Ω_{j̄il̄k}`, cross-checked in
//!   the same call against `-∂_i∂_j̄ log det g`;
//! * Chern-scalar curvature: `scal = 2 g^{kl̄} g^{ij̄} Ω_{j̄il̄k}`, asserted
//!   against `2 Tr^C_g(S̃)`;
//! * Lee form: `θ_i = Σ_k (Γ^k_ik - Γ^k_ki)`, cross-checkable against the
//!   frame definition through `dω`.
//!
//! Sign conventions (fixed crate-wide): `dd^c u` is the two-form whose
//! complex trace satisfies `Tr^C_g(dd^c u) = Δ_g u + g(du, θ)` with the
//! positive-spectrum Laplacian; in coordinates its coefficient matrix is
//! `-2 u_{,ij̄}`.

use crate::algebra::{CMat, Form11Value, MetricValue, RealOneFormValue, Sym11Value};
use crate::error::{ChernError, Result};
use crate::fields::{
    antihol, antihol_jet, hol, hol_antihol, hol_antihol_scalar, hol_jet, jet1_mat_inverse,
    MetricJet, ScalarJet, Sym11Jet,
};
use crate::jets::{CJet1, RJet1};
use num_complex::Complex64;

const RICCI_CROSSCHECK_TOL: f64 = 1e-10;
const SCALAR_CROSSCHECK_TOL: f64 = 1e-11;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Chern Christoffel symbols `Γ^k_ij`, holomorphic indices only.
#[derive(Clone, Debug)]
pub struct ChernChristoffelValue {
    pub m: usize,
    gamma: Vec<Complex64>,
}

impl ChernChristoffelValue {
    #[inline]
    pub fn at(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.gamma[(k * self.m + i) * self.m + j]
    }

    /// Deviation from symmetry in the lower indices (zero iff Kähler).
    pub fn symmetry_deviation(&self) -> f64 {
        let mut d: f64 = 0.0;
        for k in 0..self.m {
            for i in 0..self.m {
                for j in 0..self.m {
                    d = d.max((self.at(k, i, j) - self.at(k, j, i)).norm());
                }
            }
        }
        d
    }
}

/// Totally covariant Chern curvature `Ω_{j̄il̄k}`.
#[derive(Clone, Debug)]
pub struct ChernCurvatureValue {
    pub m: usize,
    omega: Vec<Complex64>,
}

impl ChernCurvatureValue {
    #[inline]
    pub fn at(&self, j: usize, i: usize, l: usize, k: usize) -> Complex64 {
        self.omega[((j * self.m + i) * self.m + l) * self.m + k]
    }

    /// `conj(Ω_{j̄il̄k}) = Ω_{īj k̄l}` deviation, relative to the tensor scale.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut d: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..self.m {
            for i in 0..self.m {
                for l in 0..self.m {
                    for k in 0..self.m {
                        scale = scale.max(self.at(j, i, l, k).norm());
                        d = d.max((self.at(j, i, l, k).conj() - self.at(i, j, k, l)).norm());
                    }
                }
            }
        }
        d / (1.0 + scale)
    }

    /// The endomorphism `Ω(X, Y)` (holomorphic block) for real tangent
    /// vectors, using `g(Ω(∂_i, ∂_j̄)∂_k, ∂_l̄) = -Ω_{j̄il̄k}` and the fact
    /// that the Chern curvature is a (1,1)-form in `(X, Y)`.
    pub fn endo_block(&self, g: &MetricValue, x: &[f64], y: &[f64]) -> CMat {
        let m = self.m;
        let mut out = CMat::zeros(m);
        for s in 0..m {
            for k in 0..m {
                let mut acc = czero();
                for i in 0..m {
                    let xi = Complex64::new(x[2 * i], x[2 * i + 1]);
                    let yi = Complex64::new(y[2 * i], y[2 * i + 1]);
                    for j in 0..m {
                        let xj = Complex64::new(x[2 * j], x[2 * j + 1]).conj();
                        let yj = Complex64::new(y[2 * j], y[2 * j + 1]).conj();
                        let form_factor = xi * yj - yi * xj;
                        let mut endo = czero();
                        for l in 0..m {
                            endo -= g.inv().at(s, l) * self.at(j, i, l, k);
                        }
                        acc += endo * form_factor;
                    }
                }
                out.set(s, k, acc);
            }
        }
        out
    }
}

/// Torsion components, the Lee form and its codifferential.
#[derive(Clone, Debug)]
pub struct TorsionLeeValue {
    pub m: usize,
    /// `T^k_ij = Γ^k_ij - Γ^k_ji`, antisymmetric in `(i, j)`.
    torsion: Vec<Complex64>,
    pub theta: RealOneFormValue,
    pub dstar_theta: f64,
}

impl TorsionLeeValue {
    #[inline]
    pub fn torsion_at(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.torsion[(k * self.m + i) * self.m + j]
    }
}

pub fn chern_christoffel(gjet: &MetricJet) -> Result<ChernChristoffelValue> {
    let m = gjet.m;
    let g = gjet.metric_value()?;
    let mut gamma = vec![czero(); m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut s = czero();
                for r in 0..m {
                    s += g.inv().at(k, r) * hol(gjet.at(r, j), i);
                }
                gamma[(k * m + i) * m + j] = s;
            }
        }
    }
    Ok(ChernChristoffelValue { m, gamma })
}

/// Christoffels as order-1 jets (their first real-coordinate partials are
/// exact, consuming the metric's second jets).
pub fn chern_christoffel_jets(gjet: &MetricJet) -> Result<Vec<CJet1>> {
    let m = gjet.m;
    let n = 2 * m;
    let g1: Vec<CJet1> = (0..m * m)
        .map(|e| gjet.at(e / m, e % m).truncate())
        .collect();
    let ginv1 = jet1_mat_inverse(m, &g1)?;
    let mut out = vec![CJet1::constant(n, czero()); m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut s = CJet1::constant(n, czero());
                for r in 0..m {
                    s = &s + &(&ginv1[k * m + r] * &hol_jet(gjet.at(r, j), i));
                }
                out[(k * m + i) * m + j] = s;
            }
        }
    }
    Ok(out)
}

pub fn chern_curvature(gjet: &MetricJet) -> Result<ChernCurvatureValue> {
    let g = gjet.metric_value()?;
    chern_curvature_with(gjet, &g)
}

pub fn chern_curvature_with(gjet: &MetricJet, g: &MetricValue) -> Result<ChernCurvatureValue> {
    let m = gjet.m;
    let mut omega = vec![czero(); m * m * m * m];
    for j in 0..m {
        for i in 0..m {
            for l in 0..m {
                for k in 0..m {
                    let mut v = -hol_antihol(gjet.at(l, k), i, j);
                    for s in 0..m {
                        for r in 0..m {
                            v += g.inv().at(s, r)
                                * hol(gjet.at(r, k), i)
                                * antihol(gjet.at(l, s), j);
                        }
                    }
                    omega[((j * m + i) * m + l) * m + k] = v;
                }
            }
        }
    }
    Ok(ChernCurvatureValue { m, omega })
}

/// First Chern-Ricci form and symmetric endomorphism. The contraction
/// `S̃_{j̄i} = g^{kl̄} Ω_{j̄il̄k}` is cross-checked against the closed form
/// `-∂_i ∂_j̄ log det g` in the same call.
pub fn chern_ricci(gjet: &MetricJet) -> Result<(Form11Value, Sym11Value)> {
    let g = gjet.metric_value()?;
    let curv = chern_curvature_with(gjet, &g)?;
    chern_ricci_with(gjet, &g, &curv)
}

pub fn chern_ricci_with(
    gjet: &MetricJet,
    g: &MetricValue,
    curv: &ChernCurvatureValue,
) -> Result<(Form11Value, Sym11Value)> {
    let m = gjet.m;
    let mut s_mat = CMat::zeros(m);
    for j in 0..m {
        for i in 0..m {
            let mut v = czero();
            for k in 0..m {
                for l in 0..m {
                    v += g.inv().at(k, l) * curv.at(j, i, l, k);
                }
            }
            s_mat.set(j, i, v);
        }
    }

    // Cross-check against -∂∂̄ log det g (exact identity for the first
    // Chern-Ricci form of any Hermitian metric).
    let log_det = gjet.det_jet().re().ln();
    let mut defect: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for j in 0..m {
        for i in 0..m {
            let check = -hol_antihol_scalar(&log_det, i, j);
            scale = scale.max(s_mat.at(j, i).norm());
            defect = defect.max((s_mat.at(j, i) - check).norm());
        }
    }
    if defect > RICCI_CROSSCHECK_TOL * scale {
        return Err(ChernError::CrossCheckFailed {
            what: "first Chern-Ricci vs -ddbar log det g".into(),
            defect: defect / scale,
            tol: RICCI_CROSSCHECK_TOL,
        });
    }

    let form = Form11Value::new(s_mat)?;
    let endo = crate::algebra::rho_inv(g, &form)?;
    Ok((form, endo))
}

/// Chern-scalar curvature by the double contraction of the curvature,
/// asserted equal to `2 Tr^C_g(S̃)`.
pub fn chern_scalar(gjet: &MetricJet) -> Result<f64> {
    let g = gjet.metric_value()?;
    let curv = chern_curvature_with(gjet, &g)?;
    let (s_form, _) = chern_ricci_with(gjet, &g, &curv)?;
    chern_scalar_with(&g, &curv, &s_form)
}

pub fn chern_scalar_with(
    g: &MetricValue,
    curv: &ChernCurvatureValue,
    s_form: &Form11Value,
) -> Result<f64> {
    let m = curv.m;
    let mut loc = czero();
    for j in 0..m {
        for i in 0..m {
            for l in 0..m {
                for k in 0..m {
                    loc += g.inv().at(k, l) * g.inv().at(i, j) * curv.at(j, i, l, k);
                }
            }
        }
    }
    let loc = 2.0 * loc.re;
    let via_trace = 2.0 * crate::algebra::trace_form(g, s_form)?;
    let defect = (loc - via_trace).abs() / (1.0 + loc.abs().max(via_trace.abs()));
    if defect > SCALAR_CROSSCHECK_TOL {
        return Err(ChernError::CrossCheckFailed {
            what: "scalar contraction vs 2 Tr^C(S̃)".into(),
            defect,
            tol: SCALAR_CROSSCHECK_TOL,
        });
    }
    Ok(loc)
}

/// Torsion, Lee form `θ_i = Σ_k (Γ^k_ik - Γ^k_ki)` and `d*θ` via the
/// density-divergence formula in real coordinates.
pub fn torsion_and_lee(gjet: &MetricJet) -> Result<TorsionLeeValue> {
    let gamma1 = chern_christoffel_jets(gjet)?;
    torsion_and_lee_with(gjet, &gamma1)
}

pub fn torsion_and_lee_with(gjet: &MetricJet, gamma1: &[CJet1]) -> Result<TorsionLeeValue> {
    let m = gjet.m;
    let n = 2 * m;
    let at = |k: usize, i: usize, j: usize| &gamma1[(k * m + i) * m + j];

    let mut torsion = vec![czero(); m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                torsion[(k * m + i) * m + j] = at(k, i, j).val() - at(k, j, i).val();
            }
        }
    }

    // θ as order-1 jets per holomorphic component.
    let mut theta_jets: Vec<CJet1> = Vec::with_capacity(m);
    for i in 0..m {
        let mut t = CJet1::constant(n, czero());
        for k in 0..m {
            t = &(&t + at(k, i, k)) - at(k, k, i);
        }
        theta_jets.push(t);
    }
    let theta = RealOneFormValue {
        comps: theta_jets.iter().map(|t| t.val()).collect(),
    };

    // d*θ = -(1/√det ĝ) ∂_a(√det ĝ · ĝ^{ab} θ_b) on real components.
    let gr = gjet.to_real_jets();
    let g1: Vec<RJet1> = (0..n * n).map(|e| gr.at(e / n, e % n).truncate()).collect();
    let ginv1 = jet1_mat_inverse(n, &g1)?;
    let sqrt_det = gr.det_jet().truncate().sqrt();

    // real components of θ as order-1 jets: θ(∂x_i) = 2 Re θ_i,
    // θ(∂y_i) = -2 Im θ_i
    let mut theta_real: Vec<RJet1> = Vec::with_capacity(n);
    for t in &theta_jets {
        theta_real.push(t.re().scale(2.0));
        theta_real.push(t.im().scale(-2.0));
    }

    let mut div = 0.0;
    for a in 0..n {
        let mut p = RJet1::constant(n, 0.0);
        for b in 0..n {
            p = &p + &(&ginv1[a * n + b] * &theta_real[b]);
        }
        p = &p * &sqrt_det;
        div += p.d1(a);
    }
    let dstar_theta = -div / sqrt_det.val();

    Ok(TorsionLeeValue {
        m,
        torsion,
        theta,
        dstar_theta,
    })
}

/// `dd^c u` as a (1,1)-form; coefficient matrix `-2 u_{,ij̄}`, the sign that
/// makes `Tr^C_g(dd^c u) = Δ_g u + g(du, θ)` hold with the positive
/// Laplacian.
pub fn ddc_scalar(ujet: &ScalarJet) -> Result<Form11Value> {
    let n = ujet.nvars();
    let m = n / 2;
    let mut b = CMat::zeros(m);
    for j in 0..m {
        for i in 0..m {
            b.set(j, i, -2.0 * hol_antihol_scalar(ujet, i, j));
        }
    }
    Form11Value::new(b)
}

/// Complex `dz^i` components of `du` for a real scalar jet.
pub fn du_oneform(ujet: &ScalarJet) -> RealOneFormValue {
    let m = ujet.nvars() / 2;
    RealOneFormValue {
        comps: (0..m).map(|i| crate::fields::hol_scalar(ujet, i)).collect(),
    }
}

/// First-Chern-Einstein residual `‖S - (scal/2m) Id‖` in the tensor norm.
pub fn fce_residual(gjet: &MetricJet) -> Result<f64> {
    let m = gjet.m;
    let g = gjet.metric_value()?;
    let curv = chern_curvature_with(gjet, &g)?;
    let (s_form, s_endo) = chern_ricci_with(gjet, &g, &curv)?;
    let scal = chern_scalar_with(&g, &curv, &s_form)?;
    let lam = scal / (2.0 * m as f64);
    let d_eta = s_endo
        .eta
        .mat()
        .sub(&g.mat().scale(Complex64::new(lam, 0.0)));
    let d = Sym11Value::new(d_eta, g)?;
    // roundoff can leave the squared norm a hair below zero
    Ok(crate::algebra::inner_sym(&d, &d).max(0.0).sqrt())
}

// ---------------------------------------------------------------------------
// Fundamental form and dω (Kähler detection, frame Lee cross-check)
// ---------------------------------------------------------------------------

/// `ω_ab = g(J ∂_a, ∂_b)` as order-1 jets in real coordinates.
pub fn omega_real_jets(gjet: &MetricJet) -> Vec<RJet1> {
    omega_real_jets_from(&gjet.to_real_jets())
}

pub fn omega_real_jets_from(gr: &crate::fields::RealMetricJet) -> Vec<RJet1> {
    let n = gr.n;
    let mut out = vec![RJet1::constant(n, 0.0); n * n];
    for i in 0..n / 2 {
        for b in 0..n {
            //  J ∂x_i = ∂y_i  =>  ω_{x_i, b} =  ĝ_{y_i, b}
            out[(2 * i) * n + b] = gr.at(2 * i + 1, b).truncate();
            //  J ∂y_i = -∂x_i =>  ω_{y_i, b} = -ĝ_{x_i, b}
            out[(2 * i + 1) * n + b] = gr.at(2 * i, b).truncate().scale(-1.0);
        }
    }
    out
}

/// Coordinate components `dω_abc = ∂_a ω_bc - ∂_b ω_ac + ∂_c ω_ab`.
pub struct DOmega {
    pub n: usize,
    comps: Vec<f64>,
}

impl DOmega {
    #[inline]
    pub fn at(&self, a: usize, b: usize, c: usize) -> f64 {
        self.comps[(a * self.n + b) * self.n + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Evaluate on three complex-component tangent vectors (the complex
    /// multilinear extension).
    pub fn eval_complex(&self, x: &[Complex64], y: &[Complex64], z: &[Complex64]) -> Complex64 {
        let mut s = czero();
        for a in 0..self.n {
            if x[a] == czero() {
                continue;
            }
            for b in 0..self.n {
                if y[b] == czero() {
                    continue;
                }
                for c in 0..self.n {
                    s += self.at(a, b, c) * x[a] * y[b] * z[c];
                }
            }
        }
        s
    }
}

pub fn d_omega(gjet: &MetricJet) -> DOmega {
    d_omega_from(&gjet.to_real_jets())
}

pub fn d_omega_from(gr: &crate::fields::RealMetricJet) -> DOmega {
    let n = gr.n;
    let w = omega_real_jets_from(gr);
    let mut comps = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                comps[(a * n + b) * n + c] =
                    w[b * n + c].d1(a) - w[a * n + c].d1(b) + w[a * n + b].d1(c);
            }
        }
    }
    DOmega { n, comps }
}

/// Frame-definition Lee form `θ(X) = Tr^C_g(X ⌟ dω) = -i g^{kl̄} dω(X, ∂_k, ∂_l̄)`
/// evaluated on a real tangent vector. Used as an independent cross-check of
/// the Christoffel-trace formula.
pub fn lee_via_frame(gjet: &MetricJet, x_real: &[f64]) -> Result<f64> {
    let m = gjet.m;
    let n = 2 * m;
    let g = gjet.metric_value()?;
    let dw = d_omega(gjet);
    let mut x = vec![czero(); n];
    for (a, v) in x_real.iter().enumerate() {
        x[a] = Complex64::new(*v, 0.0);
    }
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let mut s = czero();
    for k in 0..m {
        let mut dk = vec![czero(); n];
        dk[2 * k] = half;
        dk[2 * k + 1] = -half_i;
        for l in 0..m {
            let mut dlbar = vec![czero(); n];
            dlbar[2 * l] = half;
            dlbar[2 * l + 1] = half_i;
            s += g.inv().at(k, l) * dw.eval_complex(&x, &dk, &dlbar);
        }
    }
    let v = -Complex64::new(0.0, 1.0) * s;
    Ok(v.re)
}

// ---------------------------------------------------------------------------
// Covariant derivatives of perturbations
// ---------------------------------------------------------------------------

/// First Chern-covariant derivative of `h`: holomorphic blocks
/// `(∇_i H)^k_j` and `(∇_ī H)^k_j = ∂_ī H^k_j`.
#[derive(Clone, Debug)]
pub struct CovDeriv1 {
    pub m: usize,
    del: Vec<Complex64>,
    delbar: Vec<Complex64>,
}

impl CovDeriv1 {
    #[inline]
    pub fn del_at(&self, i: usize, k: usize, j: usize) -> Complex64 {
        self.del[(i * self.m + k) * self.m + j]
    }

    #[inline]
    pub fn delbar_at(&self, i: usize, k: usize, j: usize) -> Complex64 {
        self.delbar[(i * self.m + k) * self.m + j]
    }

    /// Holomorphic block of `(∇_X h)` for a real tangent vector `X`.
    pub fn along_real(&self, x: &[f64]) -> CMat {
        let m = self.m;
        let mut out = CMat::zeros(m);
        for k in 0..m {
            for j in 0..m {
                let mut v = czero();
                for i in 0..m {
                    let xi = Complex64::new(x[2 * i], x[2 * i + 1]);
                    v += xi * self.del_at(i, k, j) + xi.conj() * self.delbar_at(i, k, j);
                }
                out.set(k, j, v);
            }
        }
        out
    }

    /// `tr^C(∇_X h)` for a real tangent vector.
    pub fn trace_along_real(&self, x: &[f64]) -> Complex64 {
        let mut t = czero();
        for i in 0..self.m {
            let xi = Complex64::new(x[2 * i], x[2 * i + 1]);
            for k in 0..self.m {
                t += xi * self.del_at(i, k, k) + xi.conj() * self.delbar_at(i, k, k);
            }
        }
        t
    }
}

pub fn nabla_h(gjet: &MetricJet, hjet: &Sym11Jet) -> Result<CovDeriv1> {
    let h2 = hjet.endo_jets(gjet)?;
    let gamma = chern_christoffel(gjet)?;
    Ok(nabla_h_with(gjet.m, &h2, &gamma))
}

pub fn nabla_h_with(m: usize, h2: &[crate::jets::CJet2], gamma: &ChernChristoffelValue) -> CovDeriv1 {
    let mut del = vec![czero(); m * m * m];
    let mut delbar = vec![czero(); m * m * m];
    for i in 0..m {
        for k in 0..m {
            for j in 0..m {
                // (∇_i H)^k_j = ∂_i H^k_j + Γ^k_is H^s_j - Γ^s_ij H^k_s
                let mut v = hol(&h2[k * m + j], i);
                for s in 0..m {
                    v += gamma.at(k, i, s) * h2[s * m + j].val()
                        - gamma.at(s, i, j) * h2[k * m + s].val();
                }
                del[(i * m + k) * m + j] = v;
                delbar[(i * m + k) * m + j] = antihol(&h2[k * m + j], i);
            }
        }
    }
    CovDeriv1 { m, del, delbar }
}

/// Second covariant derivative: the four type blocks of the tensorial
/// `(∇²h)(·, ··)` with holomorphic endomorphism output `[k][j]`.
#[derive(Clone, Debug)]
pub struct CovDeriv2 {
    pub m: usize,
    /// `(∇²h)(∂_a, ∂_b)` blocks indexed by (type_a, type_b) with 0 = hol,
    /// 1 = antihol on each direction slot.
    blocks: [Vec<Complex64>; 4],
}

impl CovDeriv2 {
    #[inline]
    fn block_at(&self, ta: usize, tb: usize, a: usize, b: usize, k: usize, j: usize) -> Complex64 {
        self.blocks[2 * ta + tb][((a * self.m + b) * self.m + k) * self.m + j]
    }

    /// Holomorphic block of the tensorial `(∇²h)(X, W)` for real `X`, `W`.
    pub fn along_real(&self, x: &[f64], w: &[f64]) -> CMat {
        let m = self.m;
        let mut out = CMat::zeros(m);
        for k in 0..m {
            for j in 0..m {
                let mut v = czero();
                for a in 0..m {
                    let xa = Complex64::new(x[2 * a], x[2 * a + 1]);
                    for b in 0..m {
                        let wb = Complex64::new(w[2 * b], w[2 * b + 1]);
                        v += xa * wb * self.block_at(0, 0, a, b, k, j)
                            + xa * wb.conj() * self.block_at(0, 1, a, b, k, j)
                            + xa.conj() * wb * self.block_at(1, 0, a, b, k, j)
                            + xa.conj() * wb.conj() * self.block_at(1, 1, a, b, k, j);
                    }
                }
                out.set(k, j, v);
            }
        }
        out
    }
}

pub fn nabla2_h(gjet: &MetricJet, hjet: &Sym11Jet) -> Result<(CovDeriv1, CovDeriv2)> {
    let h2 = hjet.endo_jets(gjet)?;
    let gamma1 = chern_christoffel_jets(gjet)?;
    Ok(nabla2_h_with(gjet.m, &h2, &gamma1))
}

pub fn nabla2_h_with(
    m: usize,
    h2: &[crate::jets::CJet2],
    gamma1: &[CJet1],
) -> (CovDeriv1, CovDeriv2) {
    let n = 2 * m;
    let gamma_at = |k: usize, i: usize, j: usize| &gamma1[(k * m + i) * m + j];

    // ∇H and ∂̄H as order-1 jets.
    let mut del_jets = vec![CJet1::constant(n, czero()); m * m * m];
    let mut delbar_jets = vec![CJet1::constant(n, czero()); m * m * m];
    for i in 0..m {
        for k in 0..m {
            for j in 0..m {
                let mut v = hol_jet(&h2[k * m + j], i);
                for s in 0..m {
                    v = &v + &(gamma_at(k, i, s) * &h2[s * m + j].truncate());
                    v = &v - &(gamma_at(s, i, j) * &h2[k * m + s].truncate());
                }
                del_jets[(i * m + k) * m + j] = v;
                delbar_jets[(i * m + k) * m + j] = antihol_jet(&h2[k * m + j], i);
            }
        }
    }

    let d1 = CovDeriv1 {
        m,
        del: del_jets.iter().map(|j| j.val()).collect(),
        delbar: delbar_jets.iter().map(|j| j.val()).collect(),
    };

    // hol of an order-1 complex jet.
    let hol1 = |f: &CJet1, i: usize| 0.5 * (f.d1(2 * i) - Complex64::new(0.0, 1.0) * f.d1(2 * i + 1));
    let antihol1 =
        |f: &CJet1, i: usize| 0.5 * (f.d1(2 * i) + Complex64::new(0.0, 1.0) * f.d1(2 * i + 1));

    let sz = m * m * m * m;
    let mut blocks = [
        vec![czero(); sz],
        vec![czero(); sz],
        vec![czero(); sz],
        vec![czero(); sz],
    ];
    let idx = |a: usize, b: usize, k: usize, j: usize| ((a * m + b) * m + k) * m + j;

    for a in 0..m {
        for b in 0..m {
            for k in 0..m {
                for j in 0..m {
                    let nb = |kk: usize, jj: usize| &del_jets[(b * m + kk) * m + jj];
                    let nbb = |kk: usize, jj: usize| &delbar_jets[(b * m + kk) * m + jj];

                    // (∇²h)(∂_a, ∂_b): ∂_a(∇_b H) + Γ(a)-corrections on the
                    // output, direction and argument indices.
                    let mut v = hol1(nb(k, j), a);
                    for s in 0..m {
                        v += gamma_at(k, a, s).val() * nb(s, j).val()
                            - gamma_at(s, a, b).val() * del_jets[(s * m + k) * m + j].val()
                            - gamma_at(s, a, j).val() * nb(k, s).val();
                    }
                    blocks[0][idx(a, b, k, j)] = v;

                    // (∇²h)(∂_a, ∂_b̄): direction index is antiholomorphic,
                    // no connection term on it.
                    let mut v = hol1(nbb(k, j), a);
                    for s in 0..m {
                        v += gamma_at(k, a, s).val() * nbb(s, j).val()
                            - gamma_at(s, a, j).val() * nbb(k, s).val();
                    }
                    blocks[1][idx(a, b, k, j)] = v;

                    // (∇²h)(∂_ā, ∂_b): plain ∂̄ of the covariant derivative.
                    blocks[2][idx(a, b, k, j)] = antihol1(nb(k, j), a);

                    // (∇²h)(∂_ā, ∂_b̄)
                    blocks[3][idx(a, b, k, j)] = antihol1(nbb(k, j), a);
                }
            }
        }
    }

    (d1, CovDeriv2 { m, blocks })
}

/// Connection endomorphism `A(X) Y = ∇_X Y` for real constant-coefficient
/// chart vectors; returns the real vector's components.
pub fn connection_apply(
    gamma: &ChernChristoffelValue,
    x: &[f64],
    y: &[f64],
) -> Vec<f64> {
    let m = gamma.m;
    let mut out = vec![0.0; 2 * m];
    for k in 0..m {
        let mut v = czero();
        for i in 0..m {
            let xi = Complex64::new(x[2 * i], x[2 * i + 1]);
            for j in 0..m {
                let yj = Complex64::new(y[2 * j], y[2 * j + 1]);
                v += gamma.at(k, i, j) * xi * yj;
            }
        }
        out[2 * k] = v.re;
        out[2 * k + 1] = v.im;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::MetricField;
    use crate::jets::{CJet2, RJet2};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flat_field(m: usize) -> MetricField {
        Arc::new(move |_p: &[f64]| {
            let n = 2 * m;
            let half = CJet2::constant(n, c(0.5, 0.0));
            let zero = CJet2::constant(n, c(0.0, 0.0));
            let mut e = Vec::new();
            for j in 0..m {
                for i in 0..m {
                    e.push(if i == j { half.clone() } else { zero.clone() });
                }
            }
            Ok(MetricJet::from_entries(m, e))
        })
    }

    fn hopf_field() -> MetricField {
        Arc::new(|p: &[f64]| {
            let n = 4;
            let mut norm = RJet2::constant(n, 0.0);
            for a in 0..n {
                let xa = RJet2::coordinate(n, a, p[a]);
                norm = &norm + &(&xa * &xa);
            }
            let inv = norm.recip();
            let diag = CJet2::from_real(&inv);
            let zero = CJet2::constant(n, c(0.0, 0.0));
            Ok(MetricJet::from_entries(
                2,
                vec![diag.clone(), zero.clone(), zero, diag],
            ))
        })
    }

    fn cp1_field() -> MetricField {
        Arc::new(|p: &[f64]| {
            let n = 2;
            let x = RJet2::coordinate(n, 0, p[0]);
            let y = RJet2::coordinate(n, 1, p[1]);
            let r2 = &(&x * &x) + &(&y * &y);
            let one = RJet2::constant(n, 1.0);
            let denom = &one + &r2;
            let entry = (&denom * &denom).recip().scale(2.0);
            Ok(MetricJet::from_entries(1, vec![CJet2::from_real(&entry)]))
        })
    }

    #[test]
    fn flat_torus_is_totally_flat() {
        let f = flat_field(2);
        let g = f(&[0.3, 1.0, -0.5, 2.0]).unwrap();
        let gamma = chern_christoffel(&g).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(gamma.at(k, i, j), c(0.0, 0.0));
                }
            }
        }
        let curv = chern_curvature(&g).unwrap();
        for j in 0..2 {
            for i in 0..2 {
                for l in 0..2 {
                    for k in 0..2 {
                        assert_eq!(curv.at(j, i, l, k), c(0.0, 0.0));
                    }
                }
            }
        }
        assert_eq!(chern_scalar(&g).unwrap(), 0.0);
        let (s_form, _) = chern_ricci(&g).unwrap();
        assert_eq!(s_form.mat().frobenius(), 0.0);
        assert_relative_eq!(fce_residual(&g).unwrap(), 0.0);
    }

    #[test]
    fn hopf_christoffel_closed_form() {
        // Γ^k_ij = -δ_kj z̄_i / |z|²; at z = (1,0): Γ¹_11 = -1
        let f = hopf_field();
        let g = f(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let gamma = chern_christoffel(&g).unwrap();
        assert_relative_eq!(gamma.at(0, 0, 0).re, -1.0, max_relative = 1e-13);
        assert!(gamma.at(0, 0, 0).im.abs() < 1e-14);

        let p = [0.4, -0.8, 1.2, 0.3];
        let g = f(&p).unwrap();
        let gamma = chern_christoffel(&g).unwrap();
        let nz: f64 = p.iter().map(|x| x * x).sum();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let zi = c(p[2 * i], p[2 * i + 1]);
                    let expect = if k == j { -zi.conj() / nz } else { c(0.0, 0.0) };
                    assert!((gamma.at(k, i, j) - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn conformal_torus_christoffel() {
        // m = 1, g = e^{2u}/2 with u = eps cos x: Γ¹_11 = 2 ∂_z u
        let eps = 0.1;
        let f: MetricField = Arc::new(move |p: &[f64]| {
            let n = 2;
            let x = RJet2::coordinate(n, 0, p[0]);
            let u = x.cos().scale(eps);
            let entry = u.scale(2.0).exp().scale(0.5);
            Ok(MetricJet::from_entries(1, vec![CJet2::from_real(&entry)]))
        });
        let p = [0.7, 0.2];
        let g = f(&p).unwrap();
        let gamma = chern_christoffel(&g).unwrap();
        // ∂_z u = (u_x - i u_y)/2 = -eps sin(x)/2
        let expect = c(-eps * p[0].sin(), 0.0);
        assert!((gamma.at(0, 0, 0) - expect).norm() < 1e-13);
    }

    #[test]
    fn cp1_curvature_and_scalar() {
        let f = cp1_field();
        // At z = 0: Ω_{1̄11̄1} = 4
        let g = f(&[0.0, 0.0]).unwrap();
        let curv = chern_curvature(&g).unwrap();
        assert_relative_eq!(curv.at(0, 0, 0, 0).re, 4.0, max_relative = 1e-13);
        // scal = 2 everywhere; S = Id (Einstein with λ = 2, m = 1)
        for p in [[0.0, 0.0], [0.7, -0.3], [2.0, 1.5], [-0.2, 0.9]] {
            let g = f(&p).unwrap();
            assert_relative_eq!(chern_scalar(&g).unwrap(), 2.0, max_relative = 1e-11);
            let (_, s) = chern_ricci(&g).unwrap();
            let h = s.endo_matrix();
            assert!((h.at(0, 0) - c(1.0, 0.0)).norm() < 1e-11);
            assert!(fce_residual(&g).unwrap() < 1e-11);
        }
    }

    #[test]
    fn hopf_ricci_scalar_and_lee() {
        let f = hopf_field();
        // S̃ at z = (1,0): diag(0, 2)
        let g = f(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let (s_form, _) = chern_ricci(&g).unwrap();
        assert!(s_form.mat().at(0, 0).norm() < 1e-12);
        assert_relative_eq!(s_form.mat().at(1, 1).re, 2.0, max_relative = 1e-12);

        let mut rng = crate::rng::CounterRng::new(5);
        for _ in 0..20 {
            let p: Vec<f64> = (0..4).map(|_| rng.range(-1.5, 1.5)).collect();
            if p.iter().map(|x| x * x).sum::<f64>() < 0.1 {
                continue;
            }
            let g = f(&p).unwrap();
            // scal ≡ 4
            assert_relative_eq!(chern_scalar(&g).unwrap(), 4.0, max_relative = 1e-11);
            // θ_i = -z̄_i/|z|²
            let tl = torsion_and_lee(&g).unwrap();
            let nz: f64 = p.iter().map(|x| x * x).sum();
            for i in 0..2 {
                let zi = c(p[2 * i], p[2 * i + 1]);
                assert!((tl.theta.comps[i] + zi.conj() / nz).norm() < 1e-12);
            }
            // d*θ = 0 for this metric (parallel Lee form)
            assert!(tl.dstar_theta.abs() < 1e-10);
            // fce residual is of order 2/|scale|… strictly positive
            assert!(fce_residual(&g).unwrap() > 0.5);
        }
    }

    #[test]
    fn hopf_lee_matches_frame_definition() {
        let f = hopf_field();
        let mut rng = crate::rng::CounterRng::new(17);
        for _ in 0..5 {
            let p: Vec<f64> = (0..4).map(|_| rng.range(-1.2, 1.2)).collect();
            if p.iter().map(|x| x * x).sum::<f64>() < 0.2 {
                continue;
            }
            let g = f(&p).unwrap();
            let tl = torsion_and_lee(&g).unwrap();
            for _ in 0..5 {
                let x: Vec<f64> = (0..4).map(|_| rng.range(-1.0, 1.0)).collect();
                let via_frame = lee_via_frame(&g, &x).unwrap();
                let via_trace = tl.theta.eval_real(&x);
                assert!((via_frame - via_trace).abs() < 1e-10 * (1.0 + via_trace.abs()));
            }
        }
    }

    #[test]
    fn kahler_metrics_have_zero_lee_and_symmetric_christoffel() {
        let f = cp1_field();
        let g = f(&[0.6, -0.4]).unwrap();
        let tl = torsion_and_lee(&g).unwrap();
        assert!(tl.theta.comps[0].norm() < 1e-12);
        assert!(tl.dstar_theta.abs() < 1e-10);
        let dw = d_omega(&g);
        assert!(dw.max_abs() < 1e-12);
    }

    #[test]
    fn hopf_curvature_hermitian_symmetry() {
        let f = hopf_field();
        let g = f(&[0.3, 0.9, -1.1, 0.2]).unwrap();
        let curv = chern_curvature(&g).unwrap();
        assert!(curv.hermitian_deviation() < 1e-12);
    }

    #[test]
    fn ddc_constant_vanishes_and_flat_trace_is_laplacian() {
        // u constant -> 0
        let u = RJet2::constant(2, 3.7);
        let b = ddc_scalar(&u).unwrap();
        assert_eq!(b.mat().frobenius(), 0.0);

        // flat m=1, u = cos x: Tr^C_g(ddc u) = cos x
        let x0 = 0.8;
        let x = RJet2::coordinate(2, 0, x0);
        let u = x.cos();
        let b = ddc_scalar(&u).unwrap();
        let g = crate::algebra::MetricValue::new(
            crate::algebra::CMat::identity(1).scale(c(0.5, 0.0)),
        )
        .unwrap();
        let tr = crate::algebra::trace_form(&g, &b).unwrap();
        assert_relative_eq!(tr, x0.cos(), max_relative = 1e-13);
    }

    #[test]
    fn nabla_of_identity_vanishes() {
        let f = hopf_field();
        let p = [0.5, -0.2, 0.8, 0.4];
        let g = f(&p).unwrap();
        // h = Id: η-jets equal the metric jets
        let h = Sym11Jet::from_entries(
            2,
            (0..2)
                .flat_map(|j| (0..2).map(move |i| (j, i)))
                .map(|(j, i)| g.at(j, i).clone())
                .collect(),
        );
        let nh = nabla_h(&g, &h).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                for j in 0..2 {
                    assert!(nh.del_at(i, k, j).norm() < 1e-12);
                    assert!(nh.delbar_at(i, k, j).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn flat_nabla_is_plain_derivative() {
        // flat torus: Γ = 0 so ∇h = ∂h
        let fm = flat_field(1);
        let g = fm(&[0.3, 0.4]).unwrap();
        let x = RJet2::coordinate(2, 0, 0.3);
        let phi = x.sin();
        // η = φ/2 so that H = φ Id
        let h = Sym11Jet::from_entries(1, vec![CJet2::from_real(&phi.scale(0.5))]);
        let nh = nabla_h(&g, &h).unwrap();
        // (∇_1 H)^1_1 = ∂_1 φ = cos(x)/2 (holomorphic derivative)
        assert!((nh.del_at(0, 0, 0) - c(0.5 * 0.3_f64.cos(), 0.0)).norm() < 1e-13);
    }
}
