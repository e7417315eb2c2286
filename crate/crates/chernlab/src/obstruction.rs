//! The linearization-instability obstruction.
//!
//! If the Chern-scalar curvature were linearization stable at `g₀`, the
//! pairing `∫ u (scal^Ch)''(h, h) ν` would vanish for every `h ∈ ker γ` and
//! `u ∈ ker γ*`. At a positive Kähler–Einstein metric with a nontrivial
//! Laplace eigenfunction `Δu = (λ₀/m) u` the pairing can be forced nonzero:
//! on the product of two unit spheres (`λ₀ = 4`, `m = 2`), take `u` the
//! first-factor height function and `h = (1 + u)(Id₁ ⊕ -Id₂)`. Then
//! `tr^C h = 0`, so `γ(h) = 0` and `(scal^Ch)''(h,h) = |h|² = 4(1+u)²`,
//! giving `∫ u |h|² ν = 8 ∫ u² ν = 128π²/3 ≈ 421.1006` — the numerical
//! witness that the scalar curvature map is linearization unstable there.
//!
//! `obstruction` refuses to quote a value unless the kernel residuals of
//! both inputs stay below `1e-8` across the whole grid.

use crate::error::{ChernError, Result};
use crate::fields::{MetricField, PerturbationSpec, ScalarField, Sym11Jet};
use crate::jets::{CJet2, RJet2};
use crate::manifolds::{by_name, ManifoldSpec};
use crate::quadrature::{integrate_and_max, integrate_many, QuadratureRule};
use crate::rng::CounterRng;
use crate::variation::PointContext;
use std::f64::consts::PI;
use std::sync::Arc;

pub const KERNEL_TOL: f64 = 1e-8;
const QUAD_ERROR_GATE: f64 = 1e-4;

/// One obstruction evaluation: inputs, kernel residuals, value, and the
/// quadrature-error estimate that gates it.
#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub manifold: String,
    pub u_desc: String,
    pub h_desc: String,
    pub integral: f64,
    pub grid: usize,
    pub est_quad_error: f64,
    pub gamma_residual: f64,
    pub gamma_star_residual: f64,
}

/// Everything `instability_witness` validates and computes.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub report: ObstructionReport,
    pub expected: f64,
    pub lambda: f64,
    pub fce_max: f64,
    pub eigen_max: f64,
    pub doubled_integral: f64,
    pub control_integral: f64,
}

/// `∫ u · (scal^Ch)''(h, h) ν` over the rule, gated by kernel validation:
/// `max |γ(h)| ≤ 1e-8` and `max ‖γ*(u)‖ ≤ 1e-8` over the nodes.
pub fn obstruction(
    spec: &ManifoldSpec,
    rule: &QuadratureRule,
    u_field: &ScalarField,
    u_desc: &str,
    h_field: &PerturbationSpec,
) -> Result<ObstructionReport> {
    let (sums, maxes) = integrate_and_max(rule, 1, 2, |p| {
        let ctx = PointContext::new((spec.metric)(p)?)?;
        let u = u_field(p)?;
        let h = h_field.eval(p)?;
        let integrand = u.val() * ctx.second_var_of(&h, None)?;
        let g_res = ctx.gamma_of(&h)?.abs();
        let gs_res = ctx.gamma_star_residual_of(&u)?;
        Ok((vec![integrand], vec![g_res, gs_res]))
    })?;
    let (gamma_residual, gamma_star_residual) = (maxes[0], maxes[1]);
    if gamma_residual > KERNEL_TOL {
        return Err(ChernError::KernelValidation {
            what: format!("gamma({}) on {}", h_field.name, spec.name),
            residual: gamma_residual,
            tol: KERNEL_TOL,
        });
    }
    if gamma_star_residual > KERNEL_TOL {
        return Err(ChernError::KernelValidation {
            what: format!("gamma*({u_desc}) on {}", spec.name),
            residual: gamma_star_residual,
            tol: KERNEL_TOL,
        });
    }
    let integral = sums[0];

    // Error estimate from a half-resolution rule of the same family.
    let half = QuadratureRule::for_manifold_anisotropic(
        spec,
        (rule.grid / 2).max(2),
        (rule.grid / 2).max(2),
    )?;
    let coarse = integrate_many(&half, 1, |p| {
        let ctx = PointContext::new((spec.metric)(p)?)?;
        let u = u_field(p)?;
        let h = h_field.eval(p)?;
        Ok(vec![u.val() * ctx.second_var_of(&h, None)?])
    })?[0];
    let est_quad_error = (integral - coarse).abs();
    if est_quad_error >= QUAD_ERROR_GATE * integral.abs().max(1.0) {
        return Err(ChernError::CrossCheckFailed {
            what: format!("obstruction quadrature estimate on {}", spec.name),
            defect: est_quad_error,
            tol: QUAD_ERROR_GATE * integral.abs().max(1.0),
        });
    }

    Ok(ObstructionReport {
        manifold: spec.name.clone(),
        u_desc: u_desc.to_string(),
        h_desc: h_field.name.clone(),
        integral,
        grid: rule.grid,
        est_quad_error,
        gamma_residual,
        gamma_star_residual,
    })
}

/// Height function of one sphere factor: `Z = (|z_k|² - 1)/(|z_k|² + 1)`.
pub fn height_field(m: usize, factor: usize) -> ScalarField {
    Arc::new(move |p: &[f64]| {
        let n = 2 * m;
        let x = RJet2::coordinate(n, 2 * factor, p[2 * factor]);
        let y = RJet2::coordinate(n, 2 * factor + 1, p[2 * factor + 1]);
        let r2 = &(&x * &x) + &(&y * &y);
        let one = RJet2::constant(n, 1.0);
        Ok(&(&r2 - &one) * &(&r2 + &one).recip())
    })
}

/// The witness perturbation on a two-factor manifold:
/// `h = f · (Id₁ ⊕ -Id₂)` with `f = 1 + u`, i.e.
/// `η = diag(f·g_{1̄1}, -f·g_{2̄2})`. Traceless, hence in `ker γ` on any
/// first-Chern-Einstein background.
pub fn witness_perturbation(metric: MetricField, scale_field: ScalarField, name: &str) -> PerturbationSpec {
    let field = Arc::new(move |p: &[f64]| -> Result<Sym11Jet> {
        let g = metric(p)?;
        let m = g.m;
        let f = CJet2::from_real(&scale_field(p)?);
        let nf = f.scale(num_complex::Complex64::new(-1.0, 0.0));
        let mut entries = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                let factor_of = |k: usize| if k == 0 { &f } else { &nf };
                if i == j {
                    entries.push(factor_of(i) * g.at(j, i));
                } else {
                    entries.push(CJet2::constant(2 * m, num_complex::Complex64::new(0.0, 0.0)));
                }
            }
        }
        Ok(Sym11Jet::from_entries(m, entries))
    });
    PerturbationSpec::new(2, name, field)
}

fn one_plus_height(m: usize, factor: usize) -> ScalarField {
    let h = height_field(m, factor);
    Arc::new(move |p: &[f64]| {
        let u = h(p)?;
        Ok(&u + &RJet2::constant(u.nvars(), 1.0))
    })
}

fn constant_field(m: usize, c: f64) -> ScalarField {
    Arc::new(move |_p: &[f64]| Ok(RJet2::constant(2 * m, c)))
}

/// The full Theorem-style witness pipeline on the product of unit spheres.
///
/// Validates (at seeded sample points and across the grid):
/// Kähler–Einstein with `λ₀ = 4`, the eigenfunction property `Δu = 2u`,
/// `h ∈ ker γ` and `u ∈ ker γ*`; then computes the obstruction at the given
/// grid, at the doubled grid, and the vanishing control with constant
/// traceless `h`. `expected = 128π²/3`.
pub fn instability_witness(grid: usize) -> Result<WitnessReport> {
    let spec = by_name("cp1xcp1")?;
    let m = spec.m();
    let u_field = height_field(m, 0);

    // Pointwise validation at seeded random points.
    let mut rng = CounterRng::new(0x77).substream("witness");
    let mut fce_max: f64 = 0.0;
    let mut lambda_max: f64 = 0.0;
    let mut eigen_max: f64 = 0.0;
    for _ in 0..50 {
        let p = spec.sample_point(&mut rng);
        let g = spec.metric_at(&p)?;
        fce_max = fce_max.max(crate::chern::fce_residual(&g)?);
        let scal = crate::chern::chern_scalar(&g)?;
        lambda_max = lambda_max.max((scal - 4.0).abs());
        let u = u_field(&p)?;
        let lap = crate::riemannian::laplacian(&g, &u)?;
        eigen_max = eigen_max.max((lap - 2.0 * u.val()).abs());
    }
    if fce_max > 1e-9 {
        return Err(ChernError::KernelValidation {
            what: "first-Chern-Einstein residual of the witness background".into(),
            residual: fce_max,
            tol: 1e-9,
        });
    }
    if lambda_max > 1e-9 {
        return Err(ChernError::KernelValidation {
            what: "Einstein constant (expected 4)".into(),
            residual: lambda_max,
            tol: 1e-9,
        });
    }
    if eigen_max > KERNEL_TOL {
        return Err(ChernError::KernelValidation {
            what: "eigenfunction property Δu = 2u".into(),
            residual: eigen_max,
            tol: KERNEL_TOL,
        });
    }

    let h_field = witness_perturbation(
        spec.metric.clone(),
        one_plus_height(m, 0),
        "(1+u)·(Id₁ ⊕ -Id₂)",
    );

    // The witness integrands carry no azimuthal harmonics at all, so a
    // minimal azimuth count keeps the rule exact while the polar order
    // carries the grid parameter.
    let rule = QuadratureRule::for_manifold_anisotropic(&spec, grid, (grid / 4).max(4))?;
    let report = obstruction(&spec, &rule, &u_field, "first-factor height", &h_field)?;

    let doubled_rule =
        QuadratureRule::for_manifold_anisotropic(&spec, 2 * grid, (grid / 2).max(4))?;
    let doubled_integral = integrate_many(&doubled_rule, 1, |p| {
        let ctx = PointContext::new((spec.metric)(p)?)?;
        let u = u_field(p)?;
        let h = h_field.eval(p)?;
        Ok(vec![u.val() * ctx.second_var_of(&h, None)?])
    })?[0];

    // Constant traceless control: the eigenfunction integrates to zero.
    let control_field = witness_perturbation(
        spec.metric.clone(),
        constant_field(m, 1.0),
        "Id₁ ⊕ -Id₂",
    );
    let control = obstruction(&spec, &rule, &u_field, "first-factor height", &control_field)?;

    Ok(WitnessReport {
        report,
        expected: 128.0 * PI * PI / 3.0,
        lambda: 4.0,
        fce_max,
        eigen_max,
        doubled_integral,
        control_integral: control.integral,
    })
}
