//! Chebyshev–Gauss–Lobatto collocation on `[-1, 1]`.
//!
//! Nodes are stored in ascending order (`y[0] = -1`, `y[n-1] = +1`).
//! Differentiation matrices use the barycentric formulas with the
//! negative-sum trick; quadrature is Clenshaw–Curtis. Dirichlet solves of
//! `(∂_y² - α²)ψ = w` are factored once per `α` and cached, and the same
//! discrete inverse backs every downstream operator.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use crate::linalg;
use crate::{Error, Result};

/// Grid function over the workspace nodes, tagged with the Fourier mode it
/// belongs to (`alpha = 0` allowed for the zero mode).
#[derive(Debug, Clone)]
pub struct Field {
    pub values: Array1<C64>,
    pub alpha: u32,
}

impl Field {
    pub fn new(values: Array1<C64>, alpha: u32) -> Self {
        Field { values, alpha }
    }

    pub fn zeros(n: usize, alpha: u32) -> Self {
        Field {
            values: Array1::zeros(n),
            alpha,
        }
    }

    pub fn from_fn(ws: &SpectralWorkspace, alpha: u32, f: impl Fn(f64) -> C64) -> Self {
        Field {
            values: ws.nodes().mapv(f),
            alpha,
        }
    }

    pub fn from_real_fn(ws: &SpectralWorkspace, alpha: u32, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(ws, alpha, |y| C64::new(f(y), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: C64) -> Field {
        Field {
            values: self.values.mapv(|v| v * s),
            alpha: self.alpha,
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        Field {
            values: &self.values + &other.values,
            alpha: self.alpha,
        }
    }

    /// Reflection `y -> -y` (a symmetry of the fixed-α problems over
    /// symmetric profiles).
    pub fn reflected(&self) -> Field {
        let n = self.values.len();
        let mut v = Array1::zeros(n);
        for i in 0..n {
            v[i] = self.values[n - 1 - i];
        }
        Field {
            values: v,
            alpha: self.alpha,
        }
    }

    /// Reflection `y -> -y` composed with complex conjugation (maps the `α`
    /// problem onto the `-α` one; real quadratic functionals are invariant).
    pub fn reflected_conj(&self) -> Field {
        let n = self.values.len();
        let mut v = Array1::zeros(n);
        for i in 0..n {
            v[i] = self.values[n - 1 - i].conj();
        }
        Field {
            values: v,
            alpha: self.alpha,
        }
    }

    /// CSV dump `y,re,im` for plotting.
    pub fn to_csv(&self, ws: &SpectralWorkspace) -> String {
        let mut out = String::from("y,re,im\n");
        for (y, v) in ws.nodes().iter().zip(self.values.iter()) {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", y, v.re, v.im));
        }
        out
    }
}

/// Norm functionals used by the estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    /// `H^k_α` with `‖ω‖² = Σ_{i≤k} ‖(∂_y,|α|)^i ω‖²`, `k ≤ 4`.
    HkAlpha(u8),
    /// Dual of `H¹₀` under the `(∂_y,|α|)` inner product.
    H1Dual,
    Linf,
    /// `‖√(1-y²) ω‖_{L²}`.
    WeightedSqrt1My2,
    L1,
}

/// Dirichlet is the only boundary condition the Helmholtz solver needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HelmholtzBc {
    Dirichlet,
}

/// Per-`α` factored operators, built once and shared.
pub struct AlphaCache {
    pub alpha: u32,
    /// Explicit inverse of `(∂_y² - α²)` with Dirichlet rows, boundary
    /// columns zeroed: `ψ = K w` for any grid `w`.
    pub k_real: Array2<f64>,
    pub k_complex: Array2<C64>,
    /// Cholesky factor `L` of the interior `H¹₀` Gram matrix
    /// `G = D₁ᵀ W D₁ + α² W` (interior columns/rows).
    pub gram_chol: Array2<f64>,
    pub gram_chol_inv: Array2<f64>,
}

/// Chebyshev collocation workspace.
pub struct SpectralWorkspace {
    n: usize,
    nodes: Array1<f64>,
    bary: Array1<f64>,
    d1: Array2<f64>,
    d2: Array2<f64>,
    d1c: Array2<C64>,
    d2c: Array2<C64>,
    quad: Array1<f64>,
    caches: RwLock<BTreeMap<u32, Arc<AlphaCache>>>,
}

/// Nodes, barycentric weights, D1, D2 and Clenshaw–Curtis weights for the
/// ascending CGL grid with `n` points.
type CglMachinery = (Array1<f64>, Array1<f64>, Array2<f64>, Array2<f64>, Array1<f64>);

fn cgl_machinery(n: usize) -> CglMachinery {
    assert!(n >= 4, "need at least 4 collocation points");
    let nn = n - 1; // polynomial degree
    let mut nodes = Array1::<f64>::zeros(n);
    for j in 0..n {
        // ascending: y_j = -cos(j π / N)
        nodes[j] = -(std::f64::consts::PI * j as f64 / nn as f64).cos();
    }
    nodes[0] = -1.0;
    nodes[nn] = 1.0;
    if n % 2 == 1 {
        nodes[nn / 2] = 0.0;
    }

    let mut bary = Array1::<f64>::zeros(n);
    for j in 0..n {
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == nn {
            w *= 0.5;
        }
        bary[j] = w;
    }

    let mut d1 = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d1[[i, j]] = v;
                row_sum += v;
            }
        }
        d1[[i, i]] = -row_sum;
    }

    let mut d2 = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = 2.0 * d1[[i, j]] * (d1[[i, i]] - 1.0 / (nodes[i] - nodes[j]));
                d2[[i, j]] = v;
                row_sum += v;
            }
        }
        d2[[i, i]] = -row_sum;
    }

    // Clenshaw–Curtis weights (Trefethen's clencurt), reordered for the
    // ascending grid; symmetric, so the order flip is a no-op.
    let mut quad = Array1::<f64>::zeros(n);
    let nf = nn as f64;
    if nn.is_multiple_of(2) {
        quad[0] = 1.0 / (nf * nf - 1.0);
        quad[nn] = quad[0];
        for j in 1..nn {
            let theta = std::f64::consts::PI * j as f64 / nf;
            let mut v = 1.0;
            for k in 1..nn / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            v -= (nf * theta).cos() / (nf * nf - 1.0);
            quad[j] = 2.0 * v / nf;
        }
    } else {
        quad[0] = 1.0 / (nf * nf);
        quad[nn] = quad[0];
        for j in 1..nn {
            let theta = std::f64::consts::PI * j as f64 / nf;
            let mut v = 1.0;
            for k in 1..=(nn - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            quad[j] = 2.0 * v / nf;
        }
    }

    (nodes, bary, d1, d2, quad)
}

impl SpectralWorkspace {
    pub fn new(n: usize) -> Self {
        let (nodes, bary, d1, d2, quad) = cgl_machinery(n);
        let d1c = linalg::to_complex(&d1);
        let d2c = linalg::to_complex(&d2);
        SpectralWorkspace {
            n,
            nodes,
            bary,
            d1,
            d2,
            d1c,
            d2c,
            quad,
            caches: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &Array1<f64> {
        &self.nodes
    }

    pub fn d1(&self) -> &Array2<f64> {
        &self.d1
    }

    pub fn d2(&self) -> &Array2<f64> {
        &self.d2
    }

    pub fn d1c(&self) -> &Array2<C64> {
        &self.d1c
    }

    pub fn d2c(&self) -> &Array2<C64> {
        &self.d2c
    }

    pub fn quad(&self) -> &Array1<f64> {
        &self.quad
    }

    /// Factored per-`α` operators (write-once cache, parallel readers).
    pub fn alpha_cache(&self, alpha: u32) -> Result<Arc<AlphaCache>> {
        if let Some(c) = self.caches.read().unwrap().get(&alpha) {
            return Ok(c.clone());
        }
        let cache = Arc::new(self.build_alpha_cache(alpha)?);
        let mut w = self.caches.write().unwrap();
        Ok(w.entry(alpha).or_insert(cache).clone())
    }

    fn build_alpha_cache(&self, alpha: u32) -> Result<AlphaCache> {
        let n = self.n;
        let a2 = (alpha as f64) * (alpha as f64);
        let mut h = self.d2.clone();
        for i in 0..n {
            h[[i, i]] -= a2;
        }
        // Dirichlet rows
        for j in 0..n {
            h[[0, j]] = 0.0;
            h[[n - 1, j]] = 0.0;
        }
        h[[0, 0]] = 1.0;
        h[[n - 1, n - 1]] = 1.0;
        let mut k_real = linalg::inv_real(&h)?;
        // boundary data is always zero: drop those columns
        for i in 0..n {
            k_real[[i, 0]] = 0.0;
            k_real[[i, n - 1]] = 0.0;
        }
        let k_complex = linalg::to_complex(&k_real);

        // Interior H¹₀ Gram: G = D1ᵀ W D1 + α² W restricted to interior.
        let ni = n - 2;
        let mut g = Array2::<f64>::zeros((ni, ni));
        for a in 0..ni {
            for b in a..ni {
                let mut s = 0.0;
                for r in 0..n {
                    s += self.quad[r] * self.d1[[r, a + 1]] * self.d1[[r, b + 1]];
                }
                if a == b {
                    s += a2 * self.quad[a + 1];
                }
                g[[a, b]] = s;
                g[[b, a]] = s;
            }
        }
        let gram_chol = linalg::cholesky_lower(&g)?;
        let gram_chol_inv = linalg::inv_lower_triangular(&gram_chol);
        Ok(AlphaCache {
            alpha,
            k_real,
            k_complex,
            gram_chol,
            gram_chol_inv,
        })
    }

    /// Solve `(∂_y² - α²)ψ = w`, `ψ(±1) = 0`.
    pub fn helmholtz_solve(&self, alpha: u32, w: &Field, _bc: HelmholtzBc) -> Result<Field> {
        if alpha < 1 {
            return Err(Error::Precondition(
                "helmholtz_solve requires alpha >= 1".into(),
            ));
        }
        let cache = self.alpha_cache(alpha)?;
        Ok(Field::new(cache.k_complex.dot(&w.values), w.alpha))
    }

    pub fn deriv(&self, f: &Field) -> Field {
        Field::new(self.d1c.dot(&f.values), f.alpha)
    }

    /// Quadrature of a complex grid function.
    pub fn integrate(&self, values: &Array1<C64>) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (w, v) in self.quad.iter().zip(values.iter()) {
            s += *w * *v;
        }
        s
    }

    /// `⟨a, b⟩ = ∫ a conj(b)` under Clenshaw–Curtis quadrature.
    pub fn inner(&self, a: &Array1<C64>, b: &Array1<C64>) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.n {
            s += self.quad[i] * a[i] * b[i].conj();
        }
        s
    }

    pub fn norm(&self, f: &Field, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::L2 => Ok(self.l2_norm(&f.values)),
            NormKind::L1 => {
                let mut s = 0.0;
                for i in 0..self.n {
                    s += self.quad[i] * f.values[i].norm();
                }
                Ok(s)
            }
            NormKind::Linf => Ok(f
                .values
                .iter()
                .map(|v| v.norm())
                .fold(0.0f64, |m, v| m.max(v))),
            NormKind::WeightedSqrt1My2 => {
                let mut s = 0.0;
                for i in 0..self.n {
                    let w = 1.0 - self.nodes[i] * self.nodes[i];
                    s += self.quad[i] * w * f.values[i].norm_sqr();
                }
                Ok(s.sqrt())
            }
            NormKind::HkAlpha(k) => {
                if k > 4 {
                    return Err(Error::OutOfRange(format!(
                        "H^k_alpha supports k <= 4, got {k}"
                    )));
                }
                let k = k as usize;
                let a2 = (f.alpha as f64) * (f.alpha as f64);
                let mut derivs: Vec<Array1<C64>> = Vec::with_capacity(k + 1);
                derivs.push(f.values.clone());
                for j in 1..=k {
                    derivs.push(self.d1c.dot(&derivs[j - 1]));
                }
                let sq: Vec<f64> = derivs.iter().map(|d| self.l2_norm_sq(d)).collect();
                let mut total = 0.0;
                for i in 0..=k {
                    // ‖(∂_y,|α|)^i ω‖² = Σ_j C(i,j) α^{2(i-j)} ‖∂^j ω‖²
                    for (j, &sq_j) in sq.iter().enumerate().take(i + 1) {
                        total += binom(i, j) * a2.powi((i - j) as i32) * sq_j;
                    }
                }
                Ok(total.sqrt())
            }
            NormKind::H1Dual => {
                let cache = self.alpha_cache(f.alpha.max(1))?;
                let ni = self.n - 2;
                let mut q = Array1::<C64>::zeros(ni);
                for i in 0..ni {
                    q[i] = self.quad[i + 1] * f.values[i + 1];
                }
                let z = linalg::forward_subst(&cache.gram_chol, &q);
                Ok(z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            }
        }
    }

    pub fn l2_norm_sq(&self, values: &Array1<C64>) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.quad[i] * values[i].norm_sqr();
        }
        s
    }

    pub fn l2_norm(&self, values: &Array1<C64>) -> f64 {
        self.l2_norm_sq(values).sqrt()
    }

    /// Barycentric interpolation of a grid function at `x`.
    pub fn interp(&self, values: &Array1<C64>, x: f64) -> C64 {
        bary_eval(&self.nodes, &self.bary, values, x)
    }

    /// Chebyshev coefficients of a grid function (direct cosine transform).
    pub fn cheb_coeffs(&self, values: &Array1<C64>) -> Array1<C64> {
        let nn = self.n - 1;
        let nf = nn as f64;
        let mut coeffs = Array1::<C64>::zeros(self.n);
        for k in 0..=nn {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..=nn {
                // ascending grid: y_j = -cos(jπ/N) = cos((N-j)π/N)
                let theta = std::f64::consts::PI * (nn - j) as f64 / nf;
                let w = if j == 0 || j == nn { 0.5 } else { 1.0 };
                s += w * values[j] * (k as f64 * theta).cos();
            }
            let ck = if k == 0 || k == nn { 1.0 } else { 2.0 };
            coeffs[k] = s * (ck / nf);
        }
        coeffs
    }

    /// Fraction of Chebyshev energy carried by the top `tail_frac` of modes.
    pub fn tail_energy_fraction(&self, values: &Array1<C64>, tail_frac: f64) -> f64 {
        let coeffs = self.cheb_coeffs(values);
        let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let start = ((self.n as f64) * (1.0 - tail_frac)) as usize;
        let tail: f64 = coeffs.iter().skip(start).map(|c| c.norm_sqr()).sum();
        tail / total
    }
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r *= (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Barycentric evaluation on arbitrary nodes.
pub fn bary_eval(nodes: &Array1<f64>, weights: &Array1<f64>, values: &Array1<C64>, x: f64) -> C64 {
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for j in 0..nodes.len() {
        let dx = x - nodes[j];
        if dx == 0.0 {
            return values[j];
        }
        let t = weights[j] / dx;
        num += t * values[j];
        den += t;
    }
    num / den
}

/// Chebyshev grid on a subinterval `[a, b]`, used for piecewise solves and
/// singular-layer quadrature.
pub struct IntervalGrid {
    pub a: f64,
    pub b: f64,
    pub nodes: Array1<f64>,
    pub bary: Array1<f64>,
    pub d1: Array2<f64>,
    pub d2: Array2<f64>,
    pub quad: Array1<f64>,
}

impl IntervalGrid {
    pub fn new(a: f64, b: f64, m: usize) -> Self {
        assert!(b > a, "empty interval [{a}, {b}]");
        let (nodes01, bary, mut d1, mut d2, mut quad) = cgl_machinery(m);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let nodes = nodes01.mapv(|t| mid + half * t);
        d1.mapv_inplace(|v| v / half);
        d2.mapv_inplace(|v| v / (half * half));
        quad.mapv_inplace(|v| v * half);
        IntervalGrid {
            a,
            b,
            nodes,
            bary,
            d1,
            d2,
            quad,
        }
    }

    /// Interpolate a global-grid function onto this grid.
    pub fn interp_from(&self, ws: &SpectralWorkspace, values: &Array1<C64>) -> Array1<C64> {
        self.nodes.mapv(|x| ws.interp(values, x))
    }

    pub fn interp(&self, values: &Array1<C64>, x: f64) -> C64 {
        bary_eval(&self.nodes, &self.bary, values, x)
    }

    pub fn integrate(&self, values: &Array1<C64>) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (w, v) in self.quad.iter().zip(values.iter()) {
            s += *w * *v;
        }
        s
    }

    pub fn integrate_real(&self, values: &Array1<f64>) -> f64 {
        let mut s = 0.0;
        for (w, v) in self.quad.iter().zip(values.iter()) {
            s += *w * *v;
        }
        s
    }

    /// Dirichlet solve of `(∂_y² - α²)u = f` on the subinterval with zero
    /// boundary values.
    pub fn dirichlet_solve(&self, alpha: u32, f: &Array1<C64>) -> Result<Array1<C64>> {
        let m = self.nodes.len();
        let a2 = (alpha as f64) * (alpha as f64);
        let mut h = self.d2.clone();
        for i in 0..m {
            h[[i, i]] -= a2;
        }
        for j in 0..m {
            h[[0, j]] = 0.0;
            h[[m - 1, j]] = 0.0;
        }
        h[[0, 0]] = 1.0;
        h[[m - 1, m - 1]] = 1.0;
        let lu = linalg::LuFactorReal::new(h)?;
        let mut re = Array1::<f64>::zeros(m);
        let mut im = Array1::<f64>::zeros(m);
        for i in 1..m - 1 {
            re[i] = f[i].re;
            im[i] = f[i].im;
        }
        let xr = lu.solve(&re)?;
        let xi = lu.solve(&im)?;
        let mut out = Array1::<C64>::zeros(m);
        for i in 0..m {
            out[i] = C64::new(xr[i], xi[i]);
        }
        Ok(out)
    }
}

/// `sinh(s a) / sinh(s b)` for `a, b ≥ 0` in exponentially shifted form, safe
/// for large `s b`.
pub fn sinh_ratio(s: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a >= -1e-12 && b > 0.0);
    let a = a.max(0.0);
    if s * b < 30.0 {
        return (s * a).sinh() / (s * b).sinh();
    }
    ((s * (a - b)).exp()) * (1.0 - (-2.0 * s * a).exp()) / (1.0 - (-2.0 * s * b).exp())
}

/// Result of the `ψ = ψ₁ + ψ₂` stream-function split across the critical
/// layer: `ψ₁` solves piecewise Dirichlet problems vanishing at
/// `±1, y₁, y₂`; `ψ₂` is the explicit sinh interpolant.
pub struct StreamSplit {
    pub psi: Field,
    pub psi1: Field,
    pub psi2: Field,
    /// Subinterval solve on `(y₁, y₂)` (kept for interior integrals).
    pub middle: IntervalGrid,
    pub psi1_middle: Array1<C64>,
    pub w_middle: Array1<C64>,
    /// Relative L² defect of `ψ₁ + ψ₂ - ψ`.
    pub split_defect: f64,
}

/// Piecewise Dirichlet solves of `(∂_y²-α²)ψ₁ = w` on
/// `[-1,y₁] ∪ [y₁,y₂] ∪ [y₂,1]` plus the explicit `ψ₂`.
pub fn split_stream(
    ws: &SpectralWorkspace,
    alpha: u32,
    w: &Field,
    layer: &crate::profiles::CriticalLayer,
) -> Result<StreamSplit> {
    let (y1, y2) = (layer.y1, layer.y2);
    if layer.degenerate || y2 - y1 <= 0.0 {
        return Err(Error::Unresolved(
            "degenerate critical layer: use the lambda <= U(0) estimate path".into(),
        ));
    }
    let inside = ws
        .nodes()
        .iter()
        .filter(|&&y| y > y1 && y < y2)
        .count();
    if inside < 2 {
        return Err(Error::Unresolved(format!(
            "critical layer ({y1:.3e}, {y2:.3e}) resolved by {inside} grid nodes; increase n"
        )));
    }

    let psi = ws.helmholtz_solve(alpha, w, HelmholtzBc::Dirichlet)?;
    let psi_y1 = ws.interp(&psi.values, y1);
    let psi_y2 = ws.interp(&psi.values, y2);

    let m = (ws.n() / 2).clamp(48, 192);
    let left = IntervalGrid::new(-1.0, y1, m);
    let middle = IntervalGrid::new(y1, y2, m);
    let right = IntervalGrid::new(y2, 1.0, m);

    let wl = left.interp_from(ws, &w.values);
    let wm = middle.interp_from(ws, &w.values);
    let wr = right.interp_from(ws, &w.values);
    let pl = left.dirichlet_solve(alpha, &wl)?;
    let pm = middle.dirichlet_solve(alpha, &wm)?;
    let pr = right.dirichlet_solve(alpha, &wr)?;

    let n = ws.n();
    let af = alpha as f64;
    let mut psi1 = Array1::<C64>::zeros(n);
    let mut psi2 = Array1::<C64>::zeros(n);
    for (i, &y) in ws.nodes().iter().enumerate() {
        if y <= y1 {
            psi1[i] = left.interp(&pl, y);
            psi2[i] = psi_y1 * sinh_ratio(af, 1.0 + y, 1.0 + y1);
        } else if y < y2 {
            psi1[i] = middle.interp(&pm, y);
            psi2[i] = (psi_y2 * sinh_ratio(af, y - y1, y2 - y1)
                + psi_y1 * sinh_ratio(af, y2 - y, y2 - y1))
                * C64::new(1.0, 0.0);
        } else {
            psi1[i] = right.interp(&pr, y);
            psi2[i] = psi_y2 * sinh_ratio(af, 1.0 - y, 1.0 - y2);
        }
    }

    let psi_norm = ws.l2_norm(&psi.values);
    let mut defect = Array1::<C64>::zeros(n);
    for i in 0..n {
        defect[i] = psi1[i] + psi2[i] - psi.values[i];
    }
    let split_defect = if psi_norm > 0.0 {
        ws.l2_norm(&defect) / psi_norm
    } else {
        0.0
    };

    Ok(StreamSplit {
        psi,
        psi1: Field::new(psi1, w.alpha),
        psi2: Field::new(psi2, w.alpha),
        middle,
        psi1_middle: pm,
        w_middle: wm,
        split_defect,
    })
}

/// Smooth random field with decaying Chebyshev spectrum, deterministic in
/// `(seed, tag)` and independent of the grid size.
pub fn seeded_field(ws: &SpectralWorkspace, alpha: u32, seed: u64, tag: u64) -> Field {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9e3779b97f4a7c15));
    let m = 24usize;
    let coeffs: Vec<C64> = (0..=m)
        .map(|k| {
            let decay = 1.0 / ((1 + k * k) as f64);
            C64::new(
                rng.gen_range(-1.0..1.0) * decay,
                rng.gen_range(-1.0..1.0) * decay,
            )
        })
        .collect();
    let n = ws.n();
    let mut values = Array1::<C64>::zeros(n);
    for (i, &y) in ws.nodes().iter().enumerate() {
        // Chebyshev recurrence
        let mut tkm1 = 1.0;
        let mut tk = y;
        let mut acc = coeffs[0] * tkm1 + coeffs[1] * tk;
        for item in coeffs.iter().take(m + 1).skip(2) {
            let tk1 = 2.0 * y * tk - tkm1;
            acc += *item * tk1;
            tkm1 = tk;
            tk = tk1;
        }
        values[i] = acc;
    }
    Field::new(values, alpha)
}
