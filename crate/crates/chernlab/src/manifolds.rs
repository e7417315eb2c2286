//! The manifold zoo: closed-form Hermitian metrics on one-chart models.
//!
//! Every zoo member provides its metric as a closure returning exact 2-jets.
//! The Kähler flag is not asserted, it is measured: `make_manifold` samples
//! `dω` at seeded points and sets the flag by `max ‖dω‖ ≤ 1e-10`.
//!
//! Members:
//!
//! * `flat_torus_m`: `g = δ/2` on `[0, 2π)^{2m}`; Kähler, `scal ≡ 0`.
//! * `conformal_torus_m`: `g = e^{2u} δ/2` with `u = 0.1 cos x¹`; Kähler for
//!   `m = 1` (every metric on a complex curve), non-Kähler for `m ≥ 2`.
//! * `kahler_torus`: `m = 2` potential deformation of the flat torus,
//!   `g_{j̄i} = δ_{ij}/2 + ∂_i ∂_j̄ φ` with `φ = 0.2 cos x¹ cos y²`; Kähler
//!   with non-constant curvature and complex off-diagonal entries.
//! * `hopf`: `g_{j̄i} = δ_{ij}/|z|²` on the fundamental annulus
//!   `1 ≤ |z| < 2` of `C²\{0}`; non-Kähler, `scal^Ch ≡ 4`, Lee form
//!   `θ_i = -z̄_i/|z|²`.
//! * `cp1`: Fubini-Study on the sphere of radius `r` in one stereographic
//!   chart, `g_{1̄1} = 2r²/(1+|z|²)²`; Kähler-Einstein, `scal = 2/r²`.
//! * `cp1xcp1`: product of two unit `cp1` factors; Kähler-Einstein with
//!   `scal = 4`, the instability-witness background.

use crate::algebra::{ChartKind, ChartSpec};
use crate::error::{ChernError, Result};
use crate::fields::{MetricField, MetricJet};
use crate::jets::{CJet2, RJet2};
use crate::rng::CounterRng;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

const KAHLER_FLAG_TOL: f64 = 1e-10;
const KAHLER_FLAG_SAMPLES: usize = 20;

/// A zoo manifold: chart, metric closure and measured flags.
#[derive(Clone)]
pub struct ManifoldSpec {
    pub name: String,
    pub chart: ChartSpec,
    pub metric: MetricField,
    pub is_kahler: bool,
    /// Analytic Chern-scalar value when it is constant on the manifold.
    pub known_scalar: Option<f64>,
}

impl std::fmt::Debug for ManifoldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManifoldSpec")
            .field("name", &self.name)
            .field("m", &self.chart.m)
            .field("is_kahler", &self.is_kahler)
            .finish()
    }
}

impl ManifoldSpec {
    pub fn m(&self) -> usize {
        self.chart.m
    }

    /// Evaluate the metric jet, checking the chart domain first.
    pub fn metric_at(&self, point: &[f64]) -> Result<MetricJet> {
        self.check_domain(point)?;
        (self.metric)(point)
    }

    pub fn check_domain(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.chart.real_dim() {
            return Err(ChernError::DimensionMismatch {
                expected: self.chart.real_dim(),
                got: point.len(),
            });
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(ChernError::OutsideDomain("non-finite coordinate".into()));
        }
        match &self.chart.kind {
            ChartKind::PeriodicTorus { .. } => Ok(()),
            ChartKind::Stereographic { .. } => Ok(()),
            ChartKind::LogAnnulus { .. } => {
                let nz: f64 = point.iter().map(|x| x * x).sum();
                if nz <= 0.0 {
                    return Err(ChernError::OutsideDomain(
                        "the origin is excluded from the annulus chart".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Seeded random chart point, bounded away from chart degeneracies.
    pub fn sample_point(&self, rng: &mut CounterRng) -> Vec<f64> {
        match &self.chart.kind {
            ChartKind::PeriodicTorus { periods } => {
                periods.iter().map(|&p| rng.range(0.0, p)).collect()
            }
            ChartKind::Stereographic { radii } => {
                let mut p = Vec::with_capacity(2 * radii.len());
                for _ in 0..radii.len() {
                    let t = rng.range(-0.9, 0.9);
                    let phi = rng.range(0.0, 2.0 * PI);
                    let r = ((1.0 + t) / (1.0 - t)).sqrt();
                    p.push(r * phi.cos());
                    p.push(r * phi.sin());
                }
                p
            }
            ChartKind::LogAnnulus { r_min, r_max } => {
                let m = self.chart.m;
                let r = r_min * (rng.range(0.0, (r_max / r_min).ln())).exp();
                // uniform direction on S^{2m-1} via normalized angles
                loop {
                    let mut v: Vec<f64> = (0..2 * m).map(|_| rng.range(-1.0, 1.0)).collect();
                    let nz: f64 = v.iter().map(|x| x * x).sum();
                    if nz > 0.05 && nz <= 1.0 {
                        let s = r / nz.sqrt();
                        for x in v.iter_mut() {
                            *x *= s;
                        }
                        return v;
                    }
                }
            }
        }
    }
}

/// Zoo constructors.
#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldKind {
    FlatTorus { m: usize },
    ConformalTorus { m: usize, eps: f64 },
    KahlerPotentialTorus { eps: f64 },
    HopfSurface,
    FubiniStudyCp1 { radius: f64 },
    FsProduct,
}

fn coord_jets(n: usize, p: &[f64]) -> Vec<RJet2> {
    (0..n).map(|a| RJet2::coordinate(n, a, p[a])).collect()
}

fn czero(n: usize) -> CJet2 {
    CJet2::constant(n, Complex64::new(0.0, 0.0))
}

fn flat_metric_field(m: usize) -> MetricField {
    Arc::new(move |_p: &[f64]| {
        let n = 2 * m;
        let half = CJet2::constant(n, Complex64::new(0.5, 0.0));
        let mut e = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                e.push(if i == j { half.clone() } else { czero(n) });
            }
        }
        Ok(MetricJet::from_entries(m, e))
    })
}

fn conformal_metric_field(m: usize, eps: f64) -> MetricField {
    Arc::new(move |p: &[f64]| {
        let n = 2 * m;
        let x1 = RJet2::coordinate(n, 0, p[0]);
        let factor = x1.cos().scale(2.0 * eps).exp().scale(0.5);
        let diag = CJet2::from_real(&factor);
        let mut e = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                e.push(if i == j { diag.clone() } else { czero(n) });
            }
        }
        Ok(MetricJet::from_entries(m, e))
    })
}

/// Entries of `g = δ/2 + ∂∂̄ φ` for `φ = ε cos x¹ cos y²`, written out in
/// closed form so the closure stays an exact 2-jet:
/// `∂_1∂_1̄ φ = ∂_2∂_2̄ φ = -(ε/4) cos x¹ cos y²`,
/// `∂_2∂_1̄ φ = -(iε/4) sin x¹ sin y²`, `∂_1∂_2̄ φ = +(iε/4) sin x¹ sin y²`.
fn kahler_potential_field(eps: f64) -> MetricField {
    Arc::new(move |p: &[f64]| {
        let n = 4;
        let x1 = RJet2::coordinate(n, 0, p[0]);
        let y2 = RJet2::coordinate(n, 3, p[3]);
        let cc = (&x1.cos() * &y2.cos()).scale(eps / 4.0);
        let ss = (&x1.sin() * &y2.sin()).scale(eps / 4.0);
        let half = RJet2::constant(n, 0.5);
        let diag = CJet2::from_real(&(&half - &cc));
        let zero_r = RJet2::constant(n, 0.0);
        // g_{1̄2} = -(i ε/4) s s, g_{2̄1} = +(i ε/4) s s
        let off_12 = CJet2::from_re_im(&zero_r, &ss.scale(-1.0));
        let off_21 = CJet2::from_re_im(&zero_r, &ss);
        Ok(MetricJet::from_entries(
            2,
            vec![diag.clone(), off_12, off_21, diag],
        ))
    })
}

fn hopf_metric_field() -> MetricField {
    Arc::new(|p: &[f64]| {
        let n = 4;
        let xs = coord_jets(n, p);
        let mut norm = RJet2::constant(n, 0.0);
        for x in &xs {
            norm = &norm + &(x * x);
        }
        if norm.val() <= 0.0 {
            return Err(ChernError::OutsideDomain("hopf chart needs z != 0".into()));
        }
        let inv = norm.recip();
        let diag = CJet2::from_real(&inv);
        Ok(MetricJet::from_entries(
            2,
            vec![diag.clone(), czero(n), czero(n), diag],
        ))
    })
}

fn fs_factor_entry(n: usize, x: &RJet2, y: &RJet2, radius: f64) -> CJet2 {
    let r2 = &(x * x) + &(y * y);
    let denom = &RJet2::constant(n, 1.0) + &r2;
    let entry = (&denom * &denom).recip().scale(2.0 * radius * radius);
    CJet2::from_real(&entry)
}

fn cp1_metric_field(radius: f64) -> MetricField {
    Arc::new(move |p: &[f64]| {
        let n = 2;
        let x = RJet2::coordinate(n, 0, p[0]);
        let y = RJet2::coordinate(n, 1, p[1]);
        Ok(MetricJet::from_entries(
            1,
            vec![fs_factor_entry(n, &x, &y, radius)],
        ))
    })
}

fn fs_product_metric_field() -> MetricField {
    Arc::new(|p: &[f64]| {
        let n = 4;
        let x1 = RJet2::coordinate(n, 0, p[0]);
        let y1 = RJet2::coordinate(n, 1, p[1]);
        let x2 = RJet2::coordinate(n, 2, p[2]);
        let y2 = RJet2::coordinate(n, 3, p[3]);
        let g1 = fs_factor_entry(n, &x1, &y1, 1.0);
        let g2 = fs_factor_entry(n, &x2, &y2, 1.0);
        Ok(MetricJet::from_entries(
            2,
            vec![g1, czero(n), czero(n), g2],
        ))
    })
}

pub fn make_manifold(kind: ManifoldKind) -> Result<ManifoldSpec> {
    let (name, chart, metric, known_scalar) = match kind {
        ManifoldKind::FlatTorus { m } => {
            let chart = ChartSpec::new(
                m,
                ChartKind::PeriodicTorus {
                    periods: vec![2.0 * PI; 2 * m],
                },
            )?;
            (
                format!("flat_torus_{m}"),
                chart,
                flat_metric_field(m),
                Some(0.0),
            )
        }
        ManifoldKind::ConformalTorus { m, eps } => {
            if !eps.is_finite() {
                return Err(ChernError::InvalidParam("eps must be finite".into()));
            }
            let chart = ChartSpec::new(
                m,
                ChartKind::PeriodicTorus {
                    periods: vec![2.0 * PI; 2 * m],
                },
            )?;
            (
                format!("conformal_torus_{m}"),
                chart,
                conformal_metric_field(m, eps),
                None,
            )
        }
        ManifoldKind::KahlerPotentialTorus { eps } => {
            if !(0.0..2.0).contains(&eps) {
                return Err(ChernError::InvalidParam(
                    "potential amplitude must lie in [0, 2) for positivity".into(),
                ));
            }
            let chart = ChartSpec::new(
                2,
                ChartKind::PeriodicTorus {
                    periods: vec![2.0 * PI; 4],
                },
            )?;
            (
                "kahler_torus".to_string(),
                chart,
                kahler_potential_field(eps),
                None,
            )
        }
        ManifoldKind::HopfSurface => {
            let chart = ChartSpec::new(
                2,
                ChartKind::LogAnnulus {
                    r_min: 1.0,
                    r_max: 2.0,
                },
            )?;
            ("hopf".to_string(), chart, hopf_metric_field(), Some(4.0))
        }
        ManifoldKind::FubiniStudyCp1 { radius } => {
            if radius <= 0.0 {
                return Err(ChernError::InvalidParam("radius must be positive".into()));
            }
            let chart = ChartSpec::new(1, ChartKind::Stereographic { radii: vec![radius] })?;
            (
                "cp1".to_string(),
                chart,
                cp1_metric_field(radius),
                Some(2.0 / (radius * radius)),
            )
        }
        ManifoldKind::FsProduct => {
            let chart = ChartSpec::new(
                2,
                ChartKind::Stereographic {
                    radii: vec![1.0, 1.0],
                },
            )?;
            (
                "cp1xcp1".to_string(),
                chart,
                fs_product_metric_field(),
                Some(4.0),
            )
        }
    };

    let mut spec = ManifoldSpec {
        name,
        chart,
        metric,
        is_kahler: false,
        known_scalar,
    };

    // Measure the Kähler flag on a seeded sample set and verify positive
    // definiteness at every sampled point while we are at it.
    let mut rng = CounterRng::new(0x9a0b).substream(&spec.name);
    let mut max_domega: f64 = 0.0;
    for _ in 0..KAHLER_FLAG_SAMPLES {
        let p = spec.sample_point(&mut rng);
        let gj = spec.metric_at(&p)?;
        if !gj.value().is_positive_definite() {
            return Err(ChernError::SingularMetric);
        }
        max_domega = max_domega.max(crate::chern::d_omega(&gj).max_abs());
    }
    spec.is_kahler = max_domega <= KAHLER_FLAG_TOL;
    Ok(spec)
}

/// The canonical zoo used by the verification suites.
pub fn zoo() -> Vec<ManifoldSpec> {
    vec![
        make_manifold(ManifoldKind::FlatTorus { m: 1 }).expect("flat torus m=1"),
        make_manifold(ManifoldKind::FlatTorus { m: 2 }).expect("flat torus m=2"),
        make_manifold(ManifoldKind::ConformalTorus { m: 1, eps: 0.1 }).expect("conformal m=1"),
        make_manifold(ManifoldKind::ConformalTorus { m: 2, eps: 0.1 }).expect("conformal m=2"),
        make_manifold(ManifoldKind::KahlerPotentialTorus { eps: 0.2 }).expect("kahler torus"),
        make_manifold(ManifoldKind::HopfSurface).expect("hopf"),
        make_manifold(ManifoldKind::FubiniStudyCp1 { radius: 1.0 }).expect("cp1"),
        make_manifold(ManifoldKind::FsProduct).expect("cp1xcp1"),
    ]
}

pub fn zoo_names() -> Vec<String> {
    zoo().into_iter().map(|s| s.name).collect()
}

pub fn by_name(name: &str) -> Result<ManifoldSpec> {
    for spec in zoo() {
        if spec.name == name {
            return Ok(spec);
        }
    }
    Err(ChernError::UnknownName {
        kind: "manifold".into(),
        given: name.into(),
        valid: zoo_names().join(", "),
    })
}
