//! Quadrature rules for the zoo manifolds and deterministic integration.
//!
//! Rules are tensor products of 1D rules; nodes and weights are generated
//! from the stored axes on demand, so large grids (the doubled witness grid
//! has ~17M nodes) never materialize. Weights always include the Riemannian
//! volume density, so `integrate(rule, f) = Σ w_i f(x_i) ≈ ∫ f ν_g`.
//!
//! * periodic tori: the rectangle rule per coordinate (spectrally accurate
//!   for band-limited integrands) times `√det ĝ` at the node;
//! * sphere factors: Gauss-Legendre in `t = cos θ` times the rectangle rule
//!   in azimuth, mapped through the stereographic chart; the pole points
//!   are never sampled since Gauss-Legendre nodes are interior;
//! * the Hopf annulus: rectangle rule in `log r` (the quotient identifies
//!   `r ~ 2r`) times a product rule on the unit 3-sphere; for the Hopf
//!   metric the density is the closed form `4 ds · dS³`.
//!
//! Summation uses a fixed-shape pairwise tree, split purely by index range,
//! so results are bit-identical regardless of thread count.

use crate::algebra::ChartKind;
use crate::error::{ChernError, Result};
use crate::manifolds::ManifoldSpec;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let dpn = if n == 1 {
                1.0
            } else {
                n as f64 * (x * p1 - p0) / (x * x - 1.0)
            };
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // recompute derivative at the converged node for the weight
        let (mut p0, mut p1) = (1.0, x);
        for j in 2..=n {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        let dpn = if n == 1 {
            1.0
        } else {
            n as f64 * (x * p1 - p0) / (x * x - 1.0)
        };
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dpn * dpn);
    }
    // ascending order for reproducible layouts
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| nodes[a].partial_cmp(&nodes[b]).unwrap());
    (
        idx.iter().map(|&i| nodes[i]).collect(),
        idx.iter().map(|&i| weights[i]).collect(),
    )
}

#[derive(Clone, Debug)]
struct Axis {
    params: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Clone, Debug)]
enum RuleKind {
    /// Axes are the chart coordinates; weight extra = √det ĝ(x).
    Torus,
    /// Axes per factor: (t, φ); extra = Π 1/(1-t_k)² × √det ĝ(x).
    SphereProduct { factors: usize },
    /// Axes (log r, cos 2α, β, γ); closed-form Hopf density baked in.
    HopfAnnulus,
}

/// A quadrature rule over one zoo manifold's chart. `node(i)` yields the
/// chart point and the full weight (volume density included).
#[derive(Clone)]
pub struct QuadratureRule {
    pub name: String,
    pub grid: usize,
    dim: usize,
    kind: RuleKind,
    axes: Vec<Axis>,
    metric: Option<crate::fields::MetricField>,
}

impl std::fmt::Debug for QuadratureRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadratureRule")
            .field("name", &self.name)
            .field("grid", &self.grid)
            .field("len", &self.len())
            .finish()
    }
}

impl QuadratureRule {
    /// Build the rule for a zoo manifold at grid parameter `n`.
    ///
    /// Tori get `n` points per real coordinate; each sphere factor gets
    /// `n`-point Gauss-Legendre in `cos θ` and `n` azimuth points; the Hopf
    /// annulus gets `n` points per parameter.
    pub fn for_manifold(spec: &ManifoldSpec, n: usize) -> Result<QuadratureRule> {
        Self::build(spec, n, n)
    }

    /// Sphere rule with a reduced azimuth count: exact whenever the
    /// integrand's azimuthal band is below `n_phi`, at a fraction of the
    /// node count. Non-sphere charts ignore `n_phi`.
    pub fn for_manifold_anisotropic(
        spec: &ManifoldSpec,
        n: usize,
        n_phi: usize,
    ) -> Result<QuadratureRule> {
        Self::build(spec, n, n_phi)
    }

    fn build(spec: &ManifoldSpec, n: usize, n_phi: usize) -> Result<QuadratureRule> {
        if n < 2 || n_phi < 2 {
            return Err(ChernError::InvalidParam("grid must be >= 2".into()));
        }
        match &spec.chart.kind {
            ChartKind::PeriodicTorus { periods } => {
                let axes = periods
                    .iter()
                    .map(|&p| {
                        let step = p / n as f64;
                        Axis {
                            params: (0..n).map(|i| i as f64 * step).collect(),
                            weights: vec![step; n],
                        }
                    })
                    .collect();
                Ok(QuadratureRule {
                    name: spec.name.clone(),
                    grid: n,
                    dim: spec.chart.real_dim(),
                    kind: RuleKind::Torus,
                    axes,
                    metric: Some(spec.metric.clone()),
                })
            }
            ChartKind::Stereographic { radii } => {
                let (t, wt) = gauss_legendre(n);
                let mut axes = Vec::new();
                for _ in 0..radii.len() {
                    axes.push(Axis {
                        params: t.clone(),
                        weights: wt.clone(),
                    });
                    let step = 2.0 * PI / n_phi as f64;
                    axes.push(Axis {
                        params: (0..n_phi).map(|i| i as f64 * step).collect(),
                        weights: vec![step; n_phi],
                    });
                }
                Ok(QuadratureRule {
                    name: spec.name.clone(),
                    grid: n,
                    dim: spec.chart.real_dim(),
                    kind: RuleKind::SphereProduct {
                        factors: radii.len(),
                    },
                    axes,
                    metric: Some(spec.metric.clone()),
                })
            }
            ChartKind::LogAnnulus { r_min, r_max } => {
                let span = (r_max / r_min).ln();
                let s_step = span / n as f64;
                let (t, wt) = gauss_legendre(n);
                let ang_step = 2.0 * PI / n as f64;
                let log_rmin = r_min.ln();
                let axes = vec![
                    Axis {
                        params: (0..n).map(|i| log_rmin + i as f64 * s_step).collect(),
                        weights: vec![s_step; n],
                    },
                    Axis {
                        params: t,
                        weights: wt,
                    },
                    Axis {
                        params: (0..n).map(|i| i as f64 * ang_step).collect(),
                        weights: vec![ang_step; n],
                    },
                    Axis {
                        params: (0..n).map(|i| i as f64 * ang_step).collect(),
                        weights: vec![ang_step; n],
                    },
                ];
                Ok(QuadratureRule {
                    name: spec.name.clone(),
                    grid: n,
                    dim: spec.chart.real_dim(),
                    kind: RuleKind::HopfAnnulus,
                    axes,
                    metric: None,
                })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.params.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Chart point and weight (volume density included) of node `i`.
    pub fn node(&self, mut i: usize) -> Result<(Vec<f64>, f64)> {
        let mut params = vec![0.0; self.axes.len()];
        let mut w = 1.0;
        for (a, axis) in self.axes.iter().enumerate().rev() {
            let k = i % axis.params.len();
            i /= axis.params.len();
            params[a] = axis.params[k];
            w *= axis.weights[k];
        }
        match &self.kind {
            RuleKind::Torus => {
                let metric = self.metric.as_ref().expect("torus rules carry a metric");
                let g = metric(&params)?;
                let det = crate::algebra::complex_metric_to_real(&g.value()).det();
                Ok((params, w * det.max(0.0).sqrt()))
            }
            RuleKind::SphereProduct { factors } => {
                let mut point = vec![0.0; self.dim];
                let mut jac = 1.0;
                for f in 0..*factors {
                    let t = params[2 * f];
                    let phi = params[2 * f + 1];
                    let r = ((1.0 + t) / (1.0 - t)).sqrt();
                    point[2 * f] = r * phi.cos();
                    point[2 * f + 1] = r * phi.sin();
                    jac *= 1.0 / ((1.0 - t) * (1.0 - t));
                }
                let metric = self.metric.as_ref().expect("sphere rules carry a metric");
                let g = metric(&point)?;
                let det = crate::algebra::complex_metric_to_real(&g.value()).det();
                Ok((point, w * jac * det.max(0.0).sqrt()))
            }
            RuleKind::HopfAnnulus => {
                let (s, t, beta, gamma) = (params[0], params[1], params[2], params[3]);
                let alpha = 0.5 * t.clamp(-1.0, 1.0).acos();
                let r = s.exp();
                let (ca, sa) = (alpha.cos(), alpha.sin());
                let point = vec![
                    r * ca * beta.cos(),
                    r * ca * beta.sin(),
                    r * sa * gamma.cos(),
                    r * sa * gamma.sin(),
                ];
                // ν_g = 4 ds dS³ and dS³ = (1/4) dt dβ dγ
                Ok((point, w))
            }
        }
    }
}

const SEQ_CHUNK: usize = 2048;

fn pairwise_sum_vec<F>(rule: &QuadratureRule, lo: usize, hi: usize, k: usize, f: &F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], f64) -> Result<Vec<f64>> + Sync,
{
    if hi - lo <= SEQ_CHUNK {
        let mut acc = vec![0.0; k];
        for i in lo..hi {
            let (p, w) = rule.node(i)?;
            let v = f(&p, w)?;
            debug_assert_eq!(v.len(), k);
            for (a, x) in acc.iter_mut().zip(v.iter()) {
                *a += x;
            }
        }
        return Ok(acc);
    }
    let mid = lo + (hi - lo) / 2;
    let (left, right) = rayon::join(
        || pairwise_sum_vec(rule, lo, mid, k, f),
        || pairwise_sum_vec(rule, mid, hi, k, f),
    );
    let (mut l, r) = (left?, right?);
    for (a, b) in l.iter_mut().zip(r.iter()) {
        *a += b;
    }
    Ok(l)
}

/// Integrate a scalar integrand: `Σ w_i f(x_i)` over the rule's nodes with
/// the fixed pairwise reduction tree.
pub fn integrate<F>(rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let v = pairwise_sum_vec(rule, 0, rule.len(), 1, &|p: &[f64], w: f64| {
        Ok(vec![w * f(p)?])
    })?;
    Ok(v[0])
}

/// Integrate `k` integrands in a single pass over the nodes. The closure
/// receives the chart point and returns the `k` integrand values; weights
/// are applied internally.
pub fn integrate_many<F>(rule: &QuadratureRule, k: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    pairwise_sum_vec(rule, 0, rule.len(), k, &|p: &[f64], w: f64| {
        let mut v = f(p)?;
        for x in v.iter_mut() {
            *x *= w;
        }
        Ok(v)
    })
}

/// Weighted sums and pointwise maxima in one pass: the closure returns
/// `k_sum` integrand values (weights applied internally) and `k_max`
/// residuals to maximize over nodes.
pub fn integrate_and_max<F>(
    rule: &QuadratureRule,
    k_sum: usize,
    k_max: usize,
    f: F,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    fn rec<F>(
        rule: &QuadratureRule,
        lo: usize,
        hi: usize,
        k_sum: usize,
        k_max: usize,
        f: &F,
    ) -> Result<(Vec<f64>, Vec<f64>)>
    where
        F: Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>)> + Sync,
    {
        if hi - lo <= SEQ_CHUNK {
            let mut sums = vec![0.0; k_sum];
            let mut maxes = vec![f64::NEG_INFINITY; k_max];
            for i in lo..hi {
                let (p, w) = rule.node(i)?;
                let (s, mx) = f(&p)?;
                debug_assert_eq!(s.len(), k_sum);
                debug_assert_eq!(mx.len(), k_max);
                for (a, x) in sums.iter_mut().zip(s.iter()) {
                    *a += w * x;
                }
                for (a, x) in maxes.iter_mut().zip(mx.iter()) {
                    *a = a.max(*x);
                }
            }
            return Ok((sums, maxes));
        }
        let mid = lo + (hi - lo) / 2;
        let (left, right) = rayon::join(
            || rec(rule, lo, mid, k_sum, k_max, f),
            || rec(rule, mid, hi, k_sum, k_max, f),
        );
        let ((mut ls, mut lm), (rs, rm)) = (left?, right?);
        for (a, b) in ls.iter_mut().zip(rs.iter()) {
            *a += b;
        }
        for (a, b) in lm.iter_mut().zip(rm.iter()) {
            *a = a.max(*b);
        }
        Ok((ls, lm))
    }
    rec(rule, 0, rule.len(), k_sum, k_max, &f)
}

/// Maximum of a pointwise residual over the rule's nodes.
pub fn node_max<F>(rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn rec<F>(rule: &QuadratureRule, lo: usize, hi: usize, f: &F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        if hi - lo <= SEQ_CHUNK {
            let mut acc = f64::NEG_INFINITY;
            for i in lo..hi {
                let (p, _) = rule.node(i)?;
                acc = acc.max(f(&p)?);
            }
            return Ok(acc);
        }
        let mid = lo + (hi - lo) / 2;
        let (l, r) = rayon::join(|| rec(rule, lo, mid, f), || rec(rule, mid, hi, f));
        Ok(l?.max(r?))
    }
    rec(rule, 0, rule.len(), &f)
}

/// Total measure of the rule (the manifold volume it represents).
pub fn volume(rule: &QuadratureRule) -> Result<f64> {
    integrate(rule, |_| Ok(1.0))
}
