//! Pointwise complex linear algebra on a Hermitian vector space.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * complex coordinates `z^i = x^i + i y^i` with `J ∂x_i = ∂y_i`;
//!   real coordinates are ordered `(x^1, y^1, ..., x^m, y^m)`;
//! * the metric matrix stores `g_{j̄i} = g(∂_{z^i}, ∂_{z̄^j})` at row `j`,
//!   column `i`; the Euclidean metric `dx² + dy²` has `g_{1̄1} = 1/2`;
//! * a real (1,1)-form is stored through its Hermitian coefficient matrix
//!   `α_{j̄i}` in `α = α_{j̄i} i dz^i ∧ dz̄^j`;
//! * a `g`-symmetric `J`-commuting endomorphism `h` is stored lowered, as
//!   `η = G·H` (Hermitian); with these choices the musical map `ρ_g` is the
//!   identity on stored matrices and `ρ_g(Id)` is the matrix of the
//!   fundamental form `ω`, i.e. `G` itself.

use crate::error::{ChernError, Result};
use num_complex::Complex64;

pub const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_IMAG_TOL: f64 = 1e-12;

/// Dense complex matrix, row-major; `at(j, i)` is row `j`, column `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub m: usize,
    a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(m: usize) -> Self {
        CMat {
            m,
            a: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut r = CMat::zeros(m);
        for i in 0..m {
            r.set(i, i, Complex64::new(1.0, 0.0));
        }
        r
    }

    pub fn from_rows(m: usize, rows: &[Complex64]) -> Self {
        assert_eq!(rows.len(), m * m);
        CMat {
            m,
            a: rows.to_vec(),
        }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut r = CMat::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            r.set(i, i, e);
        }
        r
    }

    #[inline]
    pub fn at(&self, j: usize, i: usize) -> Complex64 {
        self.a[j * self.m + i]
    }

    #[inline]
    pub fn set(&mut self, j: usize, i: usize, v: Complex64) {
        self.a[j * self.m + i] = v;
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.m, rhs.m);
        let m = self.m;
        let mut r = CMat::zeros(m);
        for j in 0..m {
            for i in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    s += self.at(j, k) * rhs.at(k, i);
                }
                r.set(j, i, s);
            }
        }
        r
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.m, rhs.m);
        CMat {
            m: self.m,
            a: self
                .a
                .iter()
                .zip(rhs.a.iter())
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.m, rhs.m);
        CMat {
            m: self.m,
            a: self
                .a
                .iter()
                .zip(rhs.a.iter())
                .map(|(x, y)| x - y)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat {
            m: self.m,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn adjoint(&self) -> CMat {
        let m = self.m;
        let mut r = CMat::zeros(m);
        for j in 0..m {
            for i in 0..m {
                r.set(j, i, self.at(i, j).conj());
            }
        }
        r
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.m).map(|i| self.at(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut d: f64 = 0.0;
        for j in 0..self.m {
            for i in 0..self.m {
                d = d.max((self.at(j, i) - self.at(i, j).conj()).norm());
            }
        }
        d
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<CMat> {
        let m = self.m;
        let mut a = self.clone();
        let mut inv = CMat::identity(m);
        for col in 0..m {
            let mut piv = col;
            let mut best = a.at(col, col).norm();
            for r in col + 1..m {
                let v = a.at(r, col).norm();
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
                    let (x, y) = (a.at(col, i), a.at(piv, i));
                    a.set(col, i, y);
                    a.set(piv, i, x);
                    let (x, y) = (inv.at(col, i), inv.at(piv, i));
                    inv.set(col, i, y);
                    inv.set(piv, i, x);
                }
            }
            let d = a.at(col, col).finv();
            for i in 0..m {
                a.set(col, i, a.at(col, i) * d);
                inv.set(col, i, inv.at(col, i) * d);
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a.at(r, col);
                if f.norm() == 0.0 {
                    continue;
                }
                for i in 0..m {
                    let v = a.at(r, i) - f * a.at(col, i);
                    a.set(r, i, v);
                    let v = inv.at(r, i) - f * inv.at(col, i);
                    inv.set(r, i, v);
                }
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> Complex64 {
        // LU with partial pivoting; sign tracked through swaps.
        let m = self.m;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..m {
            let mut piv = col;
            let mut best = a.at(col, col).norm();
            for r in col + 1..m {
                let v = a.at(r, col).norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if piv != col {
                det = -det;
                for i in 0..m {
                    let (x, y) = (a.at(col, i), a.at(piv, i));
                    a.set(col, i, y);
                    a.set(piv, i, x);
                }
            }
            det *= a.at(col, col);
            let d = a.at(col, col).finv();
            for r in col + 1..m {
                let f = a.at(r, col) * d;
                for i in col..m {
                    let v = a.at(r, i) - f * a.at(col, i);
                    a.set(r, i, v);
                }
            }
        }
        det
    }

    /// Positive definiteness of a Hermitian matrix via Cholesky.
    pub fn is_positive_definite(&self) -> bool {
        let m = self.m;
        let mut l = CMat::zeros(m);
        for k in 0..m {
            let mut s = self.at(k, k).re;
            for j in 0..k {
                s -= l.at(k, j).norm_sqr();
            }
            if s <= 0.0 || !s.is_finite() {
                return false;
            }
            let d = s.sqrt();
            l.set(k, k, Complex64::new(d, 0.0));
            for r in k + 1..m {
                let mut v = self.at(r, k);
                for j in 0..k {
                    v -= l.at(r, j) * l.at(k, j).conj();
                }
                l.set(r, k, v / d);
            }
        }
        true
    }
}

/// Dense real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RMat {
    pub n: usize,
    a: Vec<f64>,
}

impl RMat {
    pub fn zeros(n: usize) -> Self {
        RMat {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = RMat::zeros(n);
        for i in 0..n {
            r.set(i, i, 1.0);
        }
        r
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.a[r * self.n + c] = v;
    }

    pub fn mul(&self, rhs: &RMat) -> RMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = RMat::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.at(r, k) * rhs.at(k, c);
                }
                out.set(r, c, s);
            }
        }
        out
    }

    pub fn transpose(&self) -> RMat {
        let n = self.n;
        let mut out = RMat::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, self.at(c, r));
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }

    pub fn inverse(&self) -> Result<RMat> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = RMat::identity(n);
        for col in 0..n {
            let mut piv = col;
            let mut best = a.at(col, col).abs();
            for r in col + 1..n {
                let v = a.at(r, col).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-300 {
                return Err(ChernError::SingularMetric);
            }
            if piv != col {
                for i in 0..n {
                    let (x, y) = (a.at(col, i), a.at(piv, i));
                    a.set(col, i, y);
                    a.set(piv, i, x);
                    let (x, y) = (inv.at(col, i), inv.at(piv, i));
                    inv.set(col, i, y);
                    inv.set(piv, i, x);
                }
            }
            let d = 1.0 / a.at(col, col);
            for i in 0..n {
                a.set(col, i, a.at(col, i) * d);
                inv.set(col, i, inv.at(col, i) * d);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.at(r, col);
                if f == 0.0 {
                    continue;
                }
                for i in 0..n {
                    let v = a.at(r, i) - f * a.at(col, i);
                    a.set(r, i, v);
                    let v = inv.at(r, i) - f * inv.at(col, i);
                    inv.set(r, i, v);
                }
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            let mut best = a.at(col, col).abs();
            for r in col + 1..n {
                let v = a.at(r, col).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if piv != col {
                det = -det;
                for i in 0..n {
                    let (x, y) = (a.at(col, i), a.at(piv, i));
                    a.set(col, i, y);
                    a.set(piv, i, x);
                }
            }
            det *= a.at(col, col);
            let d = 1.0 / a.at(col, col);
            for r in col + 1..n {
                let f = a.at(r, col) * d;
                for i in col..n {
                    let v = a.at(r, i) - f * a.at(col, i);
                    a.set(r, i, v);
                }
            }
        }
        det
    }
}

/// Chart kinds used by the manifold zoo.
#[derive(Clone, Debug, PartialEq)]
pub enum ChartKind {
    /// All real coordinates periodic with the given periods.
    PeriodicTorus { periods: Vec<f64> },
    /// One stereographic chart per sphere factor, with the given radii.
    Stereographic { radii: Vec<f64> },
    /// Ambient coordinates of `C^m \ {0}` restricted to the annulus
    /// `r_min <= |z| < r_max`.
    LogAnnulus { r_min: f64, r_max: f64 },
}

/// Chart data: complex dimension plus the coordinate model.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    pub m: usize,
    pub kind: ChartKind,
}

impl ChartSpec {
    pub fn new(m: usize, kind: ChartKind) -> Result<Self> {
        if m < 1 {
            return Err(ChernError::InvalidParam(
                "complex dimension must be >= 1".into(),
            ));
        }
        match &kind {
            ChartKind::PeriodicTorus { periods } => {
                if periods.len() != 2 * m {
                    return Err(ChernError::DimensionMismatch {
                        expected: 2 * m,
                        got: periods.len(),
                    });
                }
                if periods.iter().any(|&p| p <= 0.0) {
                    return Err(ChernError::InvalidParam("periods must be positive".into()));
                }
            }
            ChartKind::Stereographic { radii } => {
                if radii.len() != m {
                    return Err(ChernError::DimensionMismatch {
                        expected: m,
                        got: radii.len(),
                    });
                }
                if radii.iter().any(|&r| r <= 0.0) {
                    return Err(ChernError::InvalidParam("radii must be positive".into()));
                }
            }
            ChartKind::LogAnnulus { r_min, r_max } => {
                if !(0.0 < *r_min && r_min < r_max) {
                    return Err(ChernError::InvalidParam(
                        "annulus needs 0 < r_min < r_max".into(),
                    ));
                }
            }
        }
        Ok(ChartSpec { m, kind })
    }

    pub fn real_dim(&self) -> usize {
        2 * self.m
    }
}

/// Hermitian coefficient matrix; validated at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrixValue(CMat);

impl HermitianMatrixValue {
    pub fn new(mat: CMat) -> Result<Self> {
        let dev = mat.hermitian_deviation();
        let scale = 1.0 + mat.frobenius();
        if dev > HERMITIAN_TOL * scale {
            return Err(ChernError::NonHermitian {
                deviation: dev,
                tol: HERMITIAN_TOL * scale,
            });
        }
        Ok(HermitianMatrixValue(mat))
    }

    /// Symmetrize away roundoff-level deviation, then wrap.
    pub fn symmetrized(mat: CMat) -> Result<Self> {
        let h = mat.add(&mat.adjoint()).scale(Complex64::new(0.5, 0.0));
        let dev = mat.hermitian_deviation();
        let scale = 1.0 + mat.frobenius();
        if dev > HERMITIAN_TOL * scale {
            return Err(ChernError::NonHermitian {
                deviation: dev,
                tol: HERMITIAN_TOL * scale,
            });
        }
        Ok(HermitianMatrixValue(h))
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.m
    }
}

/// A positive definite Hermitian metric value `g_{j̄i}`.
#[derive(Clone, Debug)]
pub struct MetricValue {
    g: HermitianMatrixValue,
    ginv: CMat,
}

impl MetricValue {
    pub fn new(mat: CMat) -> Result<Self> {
        let g = HermitianMatrixValue::new(mat)?;
        if !g.mat().is_positive_definite() {
            return Err(ChernError::SingularMetric);
        }
        let ginv = g.mat().inverse()?;
        Ok(MetricValue { g, ginv })
    }

    pub fn m(&self) -> usize {
        self.g.m()
    }

    pub fn mat(&self) -> &CMat {
        self.g.mat()
    }

    pub fn hermitian(&self) -> &HermitianMatrixValue {
        &self.g
    }

    /// Inverse metric `g^{ij̄}` at row `i`, column `j`.
    pub fn inv(&self) -> &CMat {
        &self.ginv
    }

    /// Real coordinate Gram matrix in the ordering `(x^1, y^1, ...)`.
    pub fn to_real(&self) -> RMat {
        complex_metric_to_real(self.mat())
    }
}

/// A real (1,1)-form through its Hermitian coefficient matrix `α_{j̄i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form11Value {
    pub coeffs: HermitianMatrixValue,
}

impl Form11Value {
    pub fn new(mat: CMat) -> Result<Self> {
        Ok(Form11Value {
            coeffs: HermitianMatrixValue::new(mat)?,
        })
    }

    pub fn m(&self) -> usize {
        self.coeffs.m()
    }

    pub fn mat(&self) -> &CMat {
        self.coeffs.mat()
    }

    /// Evaluate the form on two real tangent vectors given by their real
    /// components `(x^1, y^1, ...)`:
    /// `α(X, Y) = Σ i α_{l̄k} (X^k conj(Y^l) - Y^k conj(X^l))`.
    pub fn eval_real(&self, x: &[f64], y: &[f64]) -> f64 {
        let m = self.m();
        let i_unit = Complex64::new(0.0, 1.0);
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..m {
            let xk = Complex64::new(x[2 * k], x[2 * k + 1]);
            let yk = Complex64::new(y[2 * k], y[2 * k + 1]);
            for l in 0..m {
                let xl = Complex64::new(x[2 * l], x[2 * l + 1]);
                let yl = Complex64::new(y[2 * l], y[2 * l + 1]);
                s += i_unit * self.mat().at(l, k) * (xk * yl.conj() - yk * xl.conj());
            }
        }
        s.re
    }
}

/// A `g`-symmetric, `J`-commuting endomorphism stored through its lowered
/// Hermitian form `η = G·H`, together with the reference metric.
#[derive(Clone, Debug)]
pub struct Sym11Value {
    pub eta: HermitianMatrixValue,
    pub metric: MetricValue,
}

impl Sym11Value {
    pub fn new(eta: CMat, metric: MetricValue) -> Result<Self> {
        if eta.m != metric.m() {
            return Err(ChernError::DimensionMismatch {
                expected: metric.m(),
                got: eta.m,
            });
        }
        Ok(Sym11Value {
            eta: HermitianMatrixValue::new(eta)?,
            metric,
        })
    }

    pub fn identity(metric: MetricValue) -> Self {
        let eta = metric.mat().clone();
        Sym11Value {
            eta: HermitianMatrixValue::new(eta).expect("metric is Hermitian"),
            metric,
        }
    }

    pub fn m(&self) -> usize {
        self.eta.m()
    }

    /// The endomorphism matrix `H = G^{-1} η` acting on `(1,0)` vectors.
    pub fn endo_matrix(&self) -> CMat {
        self.metric.inv().mul(self.eta.mat())
    }

    /// The action on the real tangent space in `(x^1, y^1, ...)` ordering.
    pub fn to_real_endo(&self) -> RealEndoValue {
        RealEndoValue {
            mat: complex_endo_to_real(&self.endo_matrix()),
        }
    }
}

/// A real 1-form through its `dz^i` components (`dz̄` components are the
/// conjugates).
#[derive(Clone, Debug, PartialEq)]
pub struct RealOneFormValue {
    pub comps: Vec<Complex64>,
}

impl RealOneFormValue {
    pub fn zero(m: usize) -> Self {
        RealOneFormValue {
            comps: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    pub fn m(&self) -> usize {
        self.comps.len()
    }

    /// Evaluate on a real tangent vector given by real components.
    pub fn eval_real(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.comps.len() {
            let xi = Complex64::new(x[2 * i], x[2 * i + 1]);
            s += 2.0 * (self.comps[i] * xi).re;
        }
        s
    }

    /// Components `(α(∂x_1), α(∂y_1), ...)` in real coordinates.
    pub fn to_real_components(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.comps.len());
        for c in &self.comps {
            out.push(2.0 * c.re);
            out.push(-2.0 * c.im);
        }
        out
    }

    /// Build from real components `(α_a)` in `(x^1, y^1, ...)` ordering.
    pub fn from_real_components(a: &[f64]) -> Self {
        let m = a.len() / 2;
        let comps = (0..m)
            .map(|i| Complex64::new(a[2 * i] / 2.0, -a[2 * i + 1] / 2.0))
            .collect();
        RealOneFormValue { comps }
    }
}

/// A real endomorphism of the tangent space in real coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RealEndoValue {
    pub mat: RMat,
}

/// `g(∂x_i, ∂x_j) = 2 Re g_{j̄i}` and friends.
pub fn complex_metric_to_real(g: &CMat) -> RMat {
    let m = g.m;
    let mut out = RMat::zeros(2 * m);
    for i in 0..m {
        for j in 0..m {
            let e = g.at(j, i);
            out.set(2 * i, 2 * j, 2.0 * e.re);
            out.set(2 * i, 2 * j + 1, 2.0 * e.im);
            out.set(2 * i + 1, 2 * j, -2.0 * e.im);
            out.set(2 * i + 1, 2 * j + 1, 2.0 * e.re);
        }
    }
    out
}

/// Inverse of [`complex_metric_to_real`].
pub fn real_metric_to_complex(gr: &RMat) -> CMat {
    let m = gr.n / 2;
    let mut out = CMat::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let re = 0.5 * gr.at(2 * i, 2 * j);
            let im = 0.5 * gr.at(2 * i, 2 * j + 1);
            out.set(j, i, Complex64::new(re, im));
        }
    }
    out
}

/// Real-coordinate action of a `J`-commuting endomorphism with holomorphic
/// block `H`: `h(∂x_i) = Re(H^k_i) ∂x_k + Im(H^k_i) ∂y_k`, and the `J`-image
/// column for `∂y_i`.
pub fn complex_endo_to_real(h: &CMat) -> RMat {
    let m = h.m;
    let mut out = RMat::zeros(2 * m);
    for i in 0..m {
        for k in 0..m {
            let e = h.at(k, i);
            out.set(2 * k, 2 * i, e.re);
            out.set(2 * k + 1, 2 * i, e.im);
            out.set(2 * k, 2 * i + 1, -e.im);
            out.set(2 * k + 1, 2 * i + 1, e.re);
        }
    }
    out
}

/// The complex structure in real coordinates: `J ∂x_i = ∂y_i`,
/// `J ∂y_i = -∂x_i`; satisfies `J² = -1` exactly.
pub fn j_matrix_real(m: usize) -> RMat {
    let mut out = RMat::zeros(2 * m);
    for i in 0..m {
        out.set(2 * i + 1, 2 * i, 1.0);
        out.set(2 * i, 2 * i + 1, -1.0);
    }
    out
}

/// `ρ_g(h) = g((J∘h)·,··)`: in the stored representation this is the
/// identity on matrices, and `ρ_g(Id)` is the matrix of `ω`.
pub fn rho(g: &MetricValue, h: &Sym11Value) -> Result<Form11Value> {
    if g.m() != h.m() {
        return Err(ChernError::DimensionMismatch {
            expected: g.m(),
            got: h.m(),
        });
    }
    Form11Value::new(h.eta.mat().clone())
}

/// Inverse of `ρ_g`; the endomorphism matrix is `H = G^{-1} α`.
pub fn rho_inv(g: &MetricValue, a: &Form11Value) -> Result<Sym11Value> {
    if g.m() != a.m() {
        return Err(ChernError::DimensionMismatch {
            expected: g.m(),
            got: a.m(),
        });
    }
    Sym11Value::new(a.mat().clone(), g.clone())
}

/// Real and complex traces of `h`; `tr^R = 2 tr^C` by construction.
pub fn traces(h: &Sym11Value) -> Result<(f64, f64)> {
    let t = h.endo_matrix().trace();
    let scale = 1.0 + t.norm();
    if t.im.abs() > TRACE_IMAG_TOL * scale {
        return Err(ChernError::NonRealTrace { imag: t.im });
    }
    Ok((2.0 * t.re, t.re))
}

/// `Tr^C_g(α) = g^{ij̄} α_{j̄i}`.
pub fn trace_form(g: &MetricValue, a: &Form11Value) -> Result<f64> {
    if g.m() != a.m() {
        return Err(ChernError::DimensionMismatch {
            expected: g.m(),
            got: a.m(),
        });
    }
    let t = g.inv().mul(a.mat()).trace();
    let scale = 1.0 + t.norm();
    if t.im.abs() > TRACE_IMAG_TOL * scale {
        return Err(ChernError::NonRealTrace { imag: t.im });
    }
    Ok(t.re)
}

/// Tensor inner product of two `Sym^{1,1}` values: `2 Re tr(H_A H_B)`.
pub fn inner_sym(a: &Sym11Value, b: &Sym11Value) -> f64 {
    2.0 * a.endo_matrix().mul(&b.endo_matrix()).trace().re
}

/// Inner product of real 1-forms: `2 Re( g^{ij̄} α_i conj(β_j) )`.
pub fn inner_oneform(g: &MetricValue, a: &RealOneFormValue, b: &RealOneFormValue) -> f64 {
    let m = g.m();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            s += g.inv().at(i, j) * a.comps[i] * b.comps[j].conj();
        }
    }
    2.0 * s.re
}

/// Inner product of real endomorphisms: `tr(Ĝ^{-1} Aᵀ Ĝ B)` with `Ĝ` the real
/// Gram matrix, i.e. the frame sum `Σ_a g(A ẽ_a, B ẽ_a)`.
pub fn inner_real_endo(g: &MetricValue, a: &RealEndoValue, b: &RealEndoValue) -> Result<f64> {
    let gr = g.to_real();
    let ginv = gr.inverse()?;
    Ok(ginv
        .mul(&a.mat.transpose())
        .mul(&gr)
        .mul(&b.mat)
        .trace())
}

/// Mixed pairing of a `Sym^{1,1}` value against a general real endomorphism.
pub fn inner_sym_real(a: &Sym11Value, b: &RealEndoValue) -> Result<f64> {
    inner_real_endo(&a.metric, &a.to_real_endo(), b)
}

/// Frame pairing `Σ_a g(A ẽ_a, B ẽ_a)` of two `J`-commuting endomorphisms
/// given by their holomorphic blocks (neither needs to be `g`-symmetric).
pub fn inner_endo_blocks(g: &MetricValue, a: &CMat, b: &CMat) -> f64 {
    let m = g.m();
    // 2 Re( g^{ij̄} A^s_i conj(B^r_j) g_{r̄s} )
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let gij = g.inv().at(i, j);
            for r in 0..m {
                for t in 0..m {
                    s += gij * a.at(t, i) * b.at(r, j).conj() * g.mat().at(r, t);
                }
            }
        }
    }
    2.0 * s.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat_metric(m: usize) -> MetricValue {
        MetricValue::new(CMat::identity(m).scale(Complex64::new(0.5, 0.0))).unwrap()
    }

    fn hopf_metric_at(z: &[Complex64]) -> MetricValue {
        let norm: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        MetricValue::new(CMat::identity(z.len()).scale(Complex64::new(1.0 / norm, 0.0))).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(m: usize, rng: &mut crate::rng::CounterRng) -> CMat {
        let mut a = CMat::zeros(m);
        for j in 0..m {
            a.set(j, j, c(rng.range(-1.0, 1.0), 0.0));
            for i in j + 1..m {
                let v = c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
                a.set(j, i, v);
                a.set(i, j, v.conj());
            }
        }
        a
    }

    fn random_metric(m: usize, rng: &mut crate::rng::CounterRng) -> MetricValue {
        // pd by diagonal dominance
        let mut a = random_hermitian(m, rng);
        for i in 0..m {
            a.set(i, i, a.at(i, i) + c(2.0 + m as f64, 0.0));
        }
        MetricValue::new(a).unwrap()
    }

    #[test]
    fn rho_of_identity_is_omega() {
        // flat, m = 1: ρ_g(Id) = matrix of ω = G = (1/2) I
        let g = flat_metric(1);
        let id = Sym11Value::identity(g.clone());
        let w = rho(&g, &id).unwrap();
        assert_relative_eq!(w.mat().at(0, 0).re, 0.5, max_relative = 1e-15);

        // Hopf at z = (1, 0): metric matrix is I, so ω-matrix = I.
        let g = hopf_metric_at(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let id = Sym11Value::identity(g.clone());
        let w = rho(&g, &id).unwrap();
        assert_relative_eq!(w.mat().at(0, 0).re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(w.mat().at(1, 1).re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn rho_matches_frame_definition() {
        // ρ_g(h)(∂_i, ∂_j̄) = i (G H)_{j̄i}: the stored matrix must equal the
        // coefficient matrix obtained from the bilinear-form definition.
        let mut rng = crate::rng::CounterRng::new(7);
        for m in 1..=3usize {
            let g = random_metric(m, &mut rng);
            let eta = random_hermitian(m, &mut rng);
            let h = Sym11Value::new(eta.clone(), g.clone()).unwrap();
            let hmat = h.endo_matrix();
            // g((J h) ∂_i, ∂_j̄) = i Σ_k H^k_i g_{j̄k}; coefficient α_{j̄i}
            // satisfies form(∂_i, ∂_j̄) = i α_{j̄i}, so α = G·H = η.
            let gh = g.mat().mul(&hmat);
            let r = rho(&g, &h).unwrap();
            for j in 0..m {
                for i in 0..m {
                    assert!((gh.at(j, i) - r.mat().at(j, i)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rho_roundtrips() {
        let mut rng = crate::rng::CounterRng::new(11);
        for m in 1..=3usize {
            let g = random_metric(m, &mut rng);
            let a = Form11Value::new(random_hermitian(m, &mut rng)).unwrap();
            let h = rho_inv(&g, &a).unwrap();
            let back = rho(&g, &h).unwrap();
            for j in 0..m {
                for i in 0..m {
                    let d = (back.mat().at(j, i) - a.mat().at(j, i)).norm();
                    assert!(d <= 1e-13 * (1.0 + a.mat().frobenius()));
                }
            }
        }
    }

    #[test]
    fn rho_inv_of_omega_is_identity() {
        let mut rng = crate::rng::CounterRng::new(3);
        let g = random_metric(2, &mut rng);
        let omega = Form11Value::new(g.mat().clone()).unwrap();
        let h = rho_inv(&g, &omega).unwrap();
        let hm = h.endo_matrix();
        for j in 0..2 {
            for i in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((hm.at(j, i) - c(expect, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn rho_inv_rejects_singular_metric() {
        assert!(MetricValue::new(CMat::zeros(2)).is_err());
    }

    #[test]
    fn traces_examples() {
        // h = Id, m = 2 -> (4, 2)
        let g = flat_metric(2);
        let id = Sym11Value::identity(g.clone());
        let (tr_r, tr_c) = traces(&id).unwrap();
        assert_relative_eq!(tr_r, 4.0);
        assert_relative_eq!(tr_c, 2.0);

        // h = 0 -> (0, 0)
        let z = Sym11Value::new(CMat::zeros(2), g.clone()).unwrap();
        assert_eq!(traces(&z).unwrap(), (0.0, 0.0));

        // eta = diag(1, -1)/2 with g = I/2: H = diag(1, -1), traces (0, 0)
        let eta = CMat::diag(&[c(0.5, 0.0), c(-0.5, 0.0)]);
        let h = Sym11Value::new(eta, g).unwrap();
        let (tr_r, tr_c) = traces(&h).unwrap();
        assert!(tr_r.abs() < 1e-15 && tr_c.abs() < 1e-15);
    }

    #[test]
    fn trace_form_examples() {
        // Tr^C_g(ω) = m
        let mut rng = crate::rng::CounterRng::new(23);
        for m in 1..=3usize {
            let g = random_metric(m, &mut rng);
            let omega = Form11Value::new(g.mat().clone()).unwrap();
            assert_relative_eq!(trace_form(&g, &omega).unwrap(), m as f64, epsilon = 1e-13);
        }
        // flat m=1 (g = 1/2), a = I -> g^{11̄} a = 2
        let g = flat_metric(1);
        let a = Form11Value::new(CMat::identity(1)).unwrap();
        assert_relative_eq!(trace_form(&g, &a).unwrap(), 2.0);
    }

    #[test]
    fn trace_form_agrees_with_traces_of_rho_inv() {
        let mut rng = crate::rng::CounterRng::new(5);
        let g = random_metric(3, &mut rng);
        let a = Form11Value::new(random_hermitian(3, &mut rng)).unwrap();
        let via_form = trace_form(&g, &a).unwrap();
        let via_endo = traces(&rho_inv(&g, &a).unwrap()).unwrap().1;
        assert_relative_eq!(via_form, via_endo, epsilon = 1e-13);
    }

    #[test]
    fn inner_identity_endomorphism() {
        // inner(g, Id, Id) = tr^R Id = 2m
        let mut rng = crate::rng::CounterRng::new(9);
        for m in 1..=3usize {
            let g = random_metric(m, &mut rng);
            let id = Sym11Value::identity(g.clone());
            assert_relative_eq!(inner_sym(&id, &id), 2.0 * m as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn inner_oneform_flat_dx() {
        // flat m=1: |dx|^2 = 1 with dx components (1/2)
        let g = flat_metric(1);
        let dx = RealOneFormValue {
            comps: vec![c(0.5, 0.0)],
        };
        assert_relative_eq!(inner_oneform(&g, &dx, &dx), 1.0);
        // dy = (dz - dz̄)/(2i) has dz-component 1/(2i) = -i/2
        let dy = RealOneFormValue {
            comps: vec![c(0.0, -0.5)],
        };
        assert_relative_eq!(inner_oneform(&g, &dy, &dy), 1.0);
        assert!(inner_oneform(&g, &dx, &dy).abs() < 1e-15);
    }

    #[test]
    fn inner_is_positive_definite_on_sym11() {
        let mut rng = crate::rng::CounterRng::new(31);
        for _ in 0..20 {
            let g = random_metric(2, &mut rng);
            let eta = random_hermitian(2, &mut rng);
            if eta.frobenius() < 1e-6 {
                continue;
            }
            let h = Sym11Value::new(eta, g).unwrap();
            assert!(inner_sym(&h, &h) > 0.0);
        }
    }

    #[test]
    fn inner_pairing_identity_with_forms() {
        // g(h, ρ^{-1}(α)) = 2 Re( H^{is̄}... ) computed independently as
        // 2 Re Σ H^i_s g^{sj̄} α_{j̄i}  (raising η with g).
        let mut rng = crate::rng::CounterRng::new(57);
        for m in 1..=3usize {
            let g = random_metric(m, &mut rng);
            let h = Sym11Value::new(random_hermitian(m, &mut rng), g.clone()).unwrap();
            let a = Form11Value::new(random_hermitian(m, &mut rng)).unwrap();
            let lhs = inner_sym(&h, &rho_inv(&g, &a).unwrap());
            let hm = h.endo_matrix();
            let mut rhs = Complex64::new(0.0, 0.0);
            for i in 0..m {
                for s in 0..m {
                    for j in 0..m {
                        rhs += hm.at(i, s) * g.inv().at(s, j) * a.mat().at(j, i);
                    }
                }
            }
            assert_relative_eq!(lhs, 2.0 * rhs.re, epsilon = 1e-12);
            assert!(rhs.im.abs() < 1e-12);
        }
    }

    #[test]
    fn inner_endo_blocks_matches_sym_pairing() {
        let mut rng = crate::rng::CounterRng::new(71);
        let g = random_metric(2, &mut rng);
        let ha = Sym11Value::new(random_hermitian(2, &mut rng), g.clone()).unwrap();
        let hb = Sym11Value::new(random_hermitian(2, &mut rng), g.clone()).unwrap();
        let lhs = inner_sym(&ha, &hb);
        let rhs = inner_endo_blocks(&g, &ha.endo_matrix(), &hb.endo_matrix());
        assert_relative_eq!(lhs, rhs, epsilon = 1e-11);
        // and against the real-coordinate route
        let rr = inner_real_endo(&g, &ha.to_real_endo(), &hb.to_real_endo()).unwrap();
        assert_relative_eq!(lhs, rr, epsilon = 1e-11);
    }

    #[test]
    fn to_real_examples() {
        // g = (1/2) I (m=1) -> Euclidean dx² + dy²
        let g = flat_metric(1);
        let gr = g.to_real();
        assert_relative_eq!(gr.at(0, 0), 1.0);
        assert_relative_eq!(gr.at(1, 1), 1.0);
        assert!(gr.at(0, 1).abs() < 1e-15);

        // conformal factor: g = e^{2u} (1/2) I -> e^{2u} I
        let u = 0.37_f64;
        let gc = MetricValue::new(CMat::identity(1).scale(c(0.5 * (2.0 * u).exp(), 0.0))).unwrap();
        assert_relative_eq!(gc.to_real().at(0, 0), (2.0 * u).exp(), max_relative = 1e-15);

        // J in real coordinates squares to -1 exactly
        let j = j_matrix_real(2);
        let j2 = j.mul(&j);
        for r in 0..4 {
            for c_ in 0..4 {
                let expect = if r == c_ { -1.0 } else { 0.0 };
                assert_eq!(j2.at(r, c_), expect);
            }
        }
    }

    #[test]
    fn to_real_roundtrip() {
        let mut rng = crate::rng::CounterRng::new(13);
        for m in 1..=3usize {
            let g = random_metric(m, &mut rng);
            let back = real_metric_to_complex(&g.to_real());
            for j in 0..m {
                for i in 0..m {
                    assert!((back.at(j, i) - g.mat().at(j, i)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn real_metric_is_j_invariant() {
        let mut rng = crate::rng::CounterRng::new(41);
        let g = random_metric(2, &mut rng);
        let gr = g.to_real();
        let j = j_matrix_real(2);
        // Jᵀ Ĝ J = Ĝ
        let jt_g_j = j.transpose().mul(&gr).mul(&j);
        for r in 0..4 {
            for c_ in 0..4 {
                assert!((jt_g_j.at(r, c_) - gr.at(r, c_)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g1 = flat_metric(1);
        let g2 = flat_metric(2);
        let h2 = Sym11Value::identity(g2);
        assert!(matches!(
            rho(&g1, &h2),
            Err(ChernError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut a = CMat::zeros(2);
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(0.5, 0.0));
        assert!(HermitianMatrixValue::new(a).is_err());
    }

    #[test]
    fn chart_spec_validation() {
        assert!(ChartSpec::new(0, ChartKind::LogAnnulus { r_min: 1.0, r_max: 2.0 }).is_err());
        assert!(ChartSpec::new(
            1,
            ChartKind::PeriodicTorus {
                periods: vec![-1.0, 1.0]
            }
        )
        .is_err());
        assert!(ChartSpec::new(
            2,
            ChartKind::PeriodicTorus {
                periods: vec![6.28; 4]
            }
        )
        .is_ok());
    }
}
