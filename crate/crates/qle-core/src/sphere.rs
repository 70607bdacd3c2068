//! Fields on the unit sphere: Gauss–Legendre × equispaced quadrature, real
//! spherical harmonics, and covariant calculus for the round metric.
//!
//! Covector and tensor fields are stored through their ambient Cartesian
//! components (tangent to the sphere), so nothing is singular at the poles.

use crate::error::{QleError, Result};
use crate::linalg::{self, M3, T3, V3};
use crate::scalar::Real;
use gauss_quad::legendre::GaussLegendre;
use std::ops::{Add, Mul, Neg, Sub};

/// Quadrature grid together with the precomputed harmonic basis.
#[derive(Debug, Clone)]
pub struct SphereGrid<T> {
    l_max: usize,
    n_theta: usize,
    n_phi: usize,
    weights: Vec<T>,
    normals: Vec<V3<T>>,
    e_theta: Vec<V3<T>>,
    e_phi: Vec<V3<T>>,
    /// `basis[k * n + i]` is harmonic `k` at node `i`.
    basis: Vec<T>,
    d_theta: Vec<T>,
    d_phi_over_sin: Vec<T>,
    degree: Vec<usize>,
}

/// Real orthonormal spherical-harmonic coefficients, indexed by `l² + l + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs<T> {
    pub l_max: usize,
    pub coeffs: Vec<T>,
}

impl<T: Real> SpectralCoeffs<T> {
    /// Coefficient of the harmonic of degree `l` and order `m`.
    pub fn get(&self, l: usize, m: i64) -> T {
        let k = (l * l + l) as i64 + m;
        self.coeffs[k as usize]
    }

    /// Euclidean norm of the degree-`l` band.
    pub fn band_norm(&self, l: usize) -> T {
        if l > self.l_max {
            return T::zero();
        }
        self.coeffs[l * l..(l + 1) * (l + 1)]
            .iter()
            .map(|c| *c * *c)
            .sum::<T>()
            .sqrt()
    }

    /// Largest band norm over degrees other than `keep`.
    pub fn off_band_norm(&self, keep: &[usize]) -> T {
        (0..=self.l_max)
            .filter(|l| !keep.contains(l))
            .map(|l| self.band_norm(l))
            .fold(T::zero(), T::max)
    }
}

macro_rules! field_type {
    ($name:ident, $elem:ty, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name<T>(pub Vec<$elem>);

        impl<T: Real> Add for &$name<T> {
            type Output = $name<T>;
            fn add(self, rhs: Self) -> $name<T> {
                let mut out = self.clone();
                out.axpy(T::one(), rhs);
                out
            }
        }

        impl<T: Real> Sub for &$name<T> {
            type Output = $name<T>;
            fn sub(self, rhs: Self) -> $name<T> {
                let mut out = self.clone();
                out.axpy(-T::one(), rhs);
                out
            }
        }

        impl<T: Real> Neg for &$name<T> {
            type Output = $name<T>;
            fn neg(self) -> $name<T> {
                self.scaled(-T::one())
            }
        }

        impl<T: Real> Mul<T> for &$name<T> {
            type Output = $name<T>;
            fn mul(self, rhs: T) -> $name<T> {
                self.scaled(rhs)
            }
        }
    };
}

field_type!(ScalarField, T, "Scalar function sampled at the grid nodes.");
field_type!(CovectorField, V3<T>, "Tangent covector field in Cartesian components.");
field_type!(TensorField, M3<T>, "Tangent rank-2 tensor field in Cartesian components.");
field_type!(Rank3Field, T3<T>, "Tangent rank-3 tensor field in Cartesian components.");

/// Common linear structure of all sphere fields.
pub trait Field<T: Real>: Clone {
    fn zeros(n: usize) -> Self;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// `self += a · x`
    fn axpy(&mut self, a: T, x: &Self);
    /// Pointwise multiplication by a scalar field.
    fn mul_pointwise(&self, f: &ScalarField<T>) -> Self;
    fn max_abs(&self) -> T;
    fn scaled(&self, a: T) -> Self {
        let mut out = Self::zeros(self.len());
        out.axpy(a, self);
        out
    }
}

impl<T: Real> Field<T> for ScalarField<T> {
    fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += a * *v;
        }
    }
    fn mul_pointwise(&self, f: &ScalarField<T>) -> Self {
        Self(self.0.iter().zip(&f.0).map(|(a, b)| *a * *b).collect())
    }
    fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

impl<T: Real> Field<T> for CovectorField<T> {
    fn zeros(n: usize) -> Self {
        Self(vec![linalg::zero3(); n])
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            for k in 0..3 {
                s[k] += a * v[k];
            }
        }
    }
    fn mul_pointwise(&self, f: &ScalarField<T>) -> Self {
        Self(self.0.iter().zip(&f.0).map(|(v, s)| linalg::scale(*s, v)).collect())
    }
    fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(linalg::max_abs_v(v)))
    }
}

impl<T: Real> Field<T> for TensorField<T> {
    fn zeros(n: usize) -> Self {
        Self(vec![linalg::zero33(); n])
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            for i in 0..3 {
                for j in 0..3 {
                    s[i][j] += a * v[i][j];
                }
            }
        }
    }
    fn mul_pointwise(&self, f: &ScalarField<T>) -> Self {
        Self(self.0.iter().zip(&f.0).map(|(m, s)| linalg::mscale(*s, m)).collect())
    }
    fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(linalg::max_abs_m(v)))
    }
}

impl<T: Real> Field<T> for Rank3Field<T> {
    fn zeros(n: usize) -> Self {
        Self(vec![linalg::zero333(); n])
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        s[i][j][k] += a * v[i][j][k];
                    }
                }
            }
        }
    }
    fn mul_pointwise(&self, f: &ScalarField<T>) -> Self {
        let mut out = self.clone();
        for (t, s) in out.0.iter_mut().zip(&f.0) {
            for x in t.iter_mut().flatten().flatten() {
                *x *= *s;
            }
        }
        out
    }
    fn max_abs(&self) -> T {
        self.0
            .iter()
            .flat_map(|t| t.iter().flatten().flatten())
            .fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

impl<T: Real> ScalarField<T> {
    pub fn constant(n: usize, v: T) -> Self {
        Self(vec![v; n])
    }
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self(self.0.iter().map(|x| f(*x)).collect())
    }
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| f(*a, *b)).collect())
    }
}

impl<T: Real> CovectorField<T> {
    /// Cartesian component `i` as a scalar field.
    pub fn component(&self, i: usize) -> ScalarField<T> {
        ScalarField(self.0.iter().map(|v| v[i]).collect())
    }
    /// Pointwise inner product.
    pub fn dot(&self, other: &Self) -> ScalarField<T> {
        ScalarField(self.0.iter().zip(&other.0).map(|(a, b)| linalg::dot(a, b)).collect())
    }
    pub fn from_components(c: [&ScalarField<T>; 3]) -> Self {
        Self((0..c[0].len()).map(|i| [c[0].0[i], c[1].0[i], c[2].0[i]]).collect())
    }
}

impl<T: Real> TensorField<T> {
    /// Pointwise `t · v` (contraction on the second index).
    pub fn apply(&self, v: &CovectorField<T>) -> CovectorField<T> {
        CovectorField(self.0.iter().zip(&v.0).map(|(m, x)| linalg::matvec(m, x)).collect())
    }
    /// Pointwise matrix product.
    pub fn matmul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| linalg::matmul(a, b)).collect())
    }
    pub fn transpose(&self) -> Self {
        Self(self.0.iter().map(linalg::transpose).collect())
    }
    pub fn symmetrized(&self) -> Self {
        Self(self.0.iter().map(linalg::sym).collect())
    }
    pub fn trace(&self) -> ScalarField<T> {
        ScalarField(self.0.iter().map(linalg::trace).collect())
    }
    /// Pointwise Frobenius contraction `t_ab s_ab`.
    pub fn contract(&self, other: &Self) -> ScalarField<T> {
        ScalarField(self.0.iter().zip(&other.0).map(|(a, b)| linalg::frob(a, b)).collect())
    }
    /// Largest antisymmetric part, used to certify symmetric storage.
    pub fn asymmetry(&self) -> T {
        self.0.iter().fold(T::zero(), |m, t| {
            m.max(linalg::max_abs_m(&linalg::msub(t, &linalg::transpose(t))))
        })
    }
}

impl<T: Real> SphereGrid<T> {
    /// Grid with band limit `l_max`, `l_max + 1` colatitudes and `2 l_max + 3` longitudes.
    pub fn new(l_max: usize) -> Result<Self> {
        Self::with_resolution(l_max, l_max + 1, 2 * l_max + 3)
    }

    /// Grid with explicit node counts; quadrature must resolve degree `2 l_max`.
    pub fn with_resolution(l_max: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        if l_max < 2 {
            return Err(QleError::MalformedInput(format!("l_max must be >= 2, got {l_max}")));
        }
        if n_theta < l_max + 1 || n_phi < 2 * l_max + 1 {
            return Err(QleError::MalformedInput(format!(
                "grid {n_theta}x{n_phi} cannot resolve band limit {l_max}"
            )));
        }
        let gl = GaussLegendre::new(n_theta)
            .map_err(|e| QleError::MalformedInput(format!("quadrature rule: {e}")))?;
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

        let n = n_theta * n_phi;
        let two_pi = T::PI() + T::PI();
        let dphi = two_pi / T::count(n_phi);
        let mut weights = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut e_theta = Vec::with_capacity(n);
        let mut e_phi = Vec::with_capacity(n);
        let mut cos_t = Vec::with_capacity(n);
        let mut sin_t = Vec::with_capacity(n);
        let mut phis = Vec::with_capacity(n);
        for &(x, w) in &pairs {
            let ct = T::lit(x);
            let st = (T::one() - ct * ct).sqrt();
            for j in 0..n_phi {
                let ph = dphi * T::count(j);
                let (sp, cp) = ph.sin_cos();
                weights.push(T::lit(w) * dphi);
                normals.push([st * cp, st * sp, ct]);
                e_theta.push([ct * cp, ct * sp, -st]);
                e_phi.push([-sp, cp, T::zero()]);
                cos_t.push(ct);
                sin_t.push(st);
                phis.push(ph);
            }
        }

        let n_modes = (l_max + 1) * (l_max + 1);
        let mut basis = vec![T::zero(); n_modes * n];
        let mut d_theta = vec![T::zero(); n_modes * n];
        let mut d_phi_over_sin = vec![T::zero(); n_modes * n];
        let mut degree = vec![0usize; n_modes];
        for l in 0..=l_max {
            for k in l * l..(l + 1) * (l + 1) {
                degree[k] = l;
            }
        }
        let sqrt2 = T::lit(2.0).sqrt();
        for i in 0..n {
            let (p, dp) = legendre_table(l_max, cos_t[i], sin_t[i]);
            for l in 0..=l_max {
                for m in 0..=l {
                    let pv = p[l][m];
                    let dv = dp[l][m];
                    let mf = T::count(m);
                    if m == 0 {
                        let k = l * l + l;
                        basis[k * n + i] = pv;
                        d_theta[k * n + i] = dv;
                    } else {
                        let (s, c) = (mf * phis[i]).sin_cos();
                        let kp = l * l + l + m;
                        let km = l * l + l - m;
                        basis[kp * n + i] = sqrt2 * pv * c;
                        basis[km * n + i] = sqrt2 * pv * s;
                        d_theta[kp * n + i] = sqrt2 * dv * c;
                        d_theta[km * n + i] = sqrt2 * dv * s;
                        d_phi_over_sin[kp * n + i] = -sqrt2 * mf * pv * s / sin_t[i];
                        d_phi_over_sin[km * n + i] = sqrt2 * mf * pv * c / sin_t[i];
                    }
                }
            }
        }
        Ok(Self {
            l_max,
            n_theta,
            n_phi,
            weights,
            normals,
            e_theta,
            e_phi,
            basis,
            d_theta,
            d_phi_over_sin,
            degree,
        })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn n_phi(&self) -> usize {
        self.n_phi
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    /// Unit normals `X̃` at the nodes.
    pub fn normals(&self) -> &[V3<T>] {
        &self.normals
    }
    pub fn e_theta(&self) -> &[V3<T>] {
        &self.e_theta
    }
    pub fn e_phi(&self) -> &[V3<T>] {
        &self.e_phi
    }
    fn n_modes(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    /// Evaluates a function of the unit normal at every node.
    pub fn scalar(&self, f: impl Fn(&V3<T>) -> T) -> ScalarField<T> {
        ScalarField(self.normals.iter().map(f).collect())
    }
    pub fn covector(&self, f: impl Fn(&V3<T>) -> V3<T>) -> CovectorField<T> {
        CovectorField(self.normals.iter().map(f).collect())
    }
    pub fn tensor(&self, f: impl Fn(&V3<T>) -> M3<T>) -> TensorField<T> {
        TensorField(self.normals.iter().map(f).collect())
    }
    /// Coordinate function `X̃^i`.
    pub fn coordinate(&self, i: usize) -> ScalarField<T> {
        self.scalar(|n| n[i])
    }
    /// Round metric `σ̃` as the tangential projector.
    pub fn metric(&self) -> TensorField<T> {
        self.tensor(linalg::projector)
    }
    /// Area form `ε` with `ε(∂_θ, ∂_φ) = sin θ`.
    pub fn area_form(&self) -> TensorField<T> {
        self.tensor(linalg::area_form)
    }
    pub fn constant(&self, v: T) -> ScalarField<T> {
        ScalarField::constant(self.len(), v)
    }

    /// Weighted sum over the nodes.
    pub fn integrate(&self, f: &ScalarField<T>) -> T {
        self.weights.iter().zip(&f.0).map(|(w, v)| *w * *v).sum()
    }

    pub fn sh_analyze(&self, f: &ScalarField<T>) -> SpectralCoeffs<T> {
        let n = self.len();
        let wf: Vec<T> = self.weights.iter().zip(&f.0).map(|(w, v)| *w * *v).collect();
        let coeffs = (0..self.n_modes())
            .map(|k| {
                let row = &self.basis[k * n..(k + 1) * n];
                row.iter().zip(&wf).map(|(a, b)| *a * *b).sum()
            })
            .collect();
        SpectralCoeffs { l_max: self.l_max, coeffs }
    }

    fn synthesize_with(&self, table: &[T], c: &[T]) -> ScalarField<T> {
        let n = self.len();
        let mut out = vec![T::zero(); n];
        for (k, ck) in c.iter().enumerate() {
            if *ck == T::zero() {
                continue;
            }
            let row = &table[k * n..(k + 1) * n];
            for (o, b) in out.iter_mut().zip(row) {
                *o += *ck * *b;
            }
        }
        ScalarField(out)
    }

    pub fn sh_synthesize(&self, c: &SpectralCoeffs<T>) -> ScalarField<T> {
        self.synthesize_with(&self.basis, &c.coeffs)
    }

    /// Largest nodal deviation of the band-limited projection from the input.
    pub fn band_tail(&self, f: &ScalarField<T>) -> T {
        let back = self.sh_synthesize(&self.sh_analyze(f));
        (&back - f).max_abs()
    }

    /// Fails with [`QleError::BandLimitOverflow`] when `f` is not resolved by the basis.
    pub fn check_band_limited(&self, f: &ScalarField<T>, tol: T) -> Result<()> {
        let tail = self.band_tail(f);
        if tail > tol * T::one().max(f.max_abs()) {
            return Err(QleError::BandLimitOverflow { tail: tail.to_f64_lossy() });
        }
        Ok(())
    }

    fn spectral_map(&self, f: &ScalarField<T>, g: impl Fn(usize) -> T) -> ScalarField<T> {
        let mut c = self.sh_analyze(f);
        for (k, ck) in c.coeffs.iter_mut().enumerate() {
            *ck *= g(self.degree[k]);
        }
        self.sh_synthesize(&c)
    }

    /// Round Laplacian `Δ̃`.
    pub fn laplacian(&self, f: &ScalarField<T>) -> ScalarField<T> {
        self.spectral_map(f, |l| -T::count(l * (l + 1)))
    }

    /// The operator `½Δ̃(Δ̃+2)`.
    pub fn bilaplacian(&self, f: &ScalarField<T>) -> ScalarField<T> {
        self.spectral_map(f, bilaplacian_eigenvalue)
    }

    /// Degree-0 and degree-1 content of `f` (norms of the two kernel bands).
    pub fn kernel_content(&self, f: &ScalarField<T>) -> (T, T) {
        let c = self.sh_analyze(f);
        (c.band_norm(0), c.band_norm(1))
    }

    /// Removes degrees 0 and 1, returning the projected field and the removed coefficients.
    pub fn remove_kernel(&self, f: &ScalarField<T>) -> (ScalarField<T>, [T; 4]) {
        let mut c = self.sh_analyze(f);
        let removed = [c.coeffs[0], c.coeffs[1], c.coeffs[2], c.coeffs[3]];
        for ck in c.coeffs.iter_mut().take(4) {
            *ck = T::zero();
        }
        let kernel = self.synthesize_with(&self.basis, &removed);
        (f - &kernel, removed)
    }

    /// Minimal-norm solution of `½Δ̃(Δ̃+2)u = rhs`.
    pub fn solve_bilaplacian(&self, rhs: &ScalarField<T>, tol: T) -> Result<ScalarField<T>> {
        let c = self.sh_analyze(rhs);
        let (l0, l1) = (c.band_norm(0), c.band_norm(1));
        let bound = tol * T::one().max(rhs.max_abs());
        if l0 > bound || l1 > bound {
            return Err(QleError::KernelObstruction {
                l0: l0.to_f64_lossy(),
                l1: l1.to_f64_lossy(),
                tolerance: bound.to_f64_lossy(),
            });
        }
        let mut out = c;
        for (k, ck) in out.coeffs.iter_mut().enumerate() {
            let l = self.degree[k];
            *ck = if l < 2 { T::zero() } else { *ck / bilaplacian_eigenvalue::<T>(l) };
        }
        Ok(self.sh_synthesize(&out))
    }

    /// Tangential gradient in Cartesian components.
    pub fn gradient(&self, f: &ScalarField<T>) -> CovectorField<T> {
        let c = self.sh_analyze(f);
        let dt = self.synthesize_with(&self.d_theta, &c.coeffs);
        let dp = self.synthesize_with(&self.d_phi_over_sin, &c.coeffs);
        CovectorField(
            (0..self.len())
                .map(|i| {
                    linalg::add(
                        &linalg::scale(dt.0[i], &self.e_theta[i]),
                        &linalg::scale(dp.0[i], &self.e_phi[i]),
                    )
                })
                .collect(),
        )
    }

    /// Divergence of a tangent vector field.
    pub fn divergence(&self, v: &CovectorField<T>) -> ScalarField<T> {
        let mut out = ScalarField::zeros(self.len());
        for k in 0..3 {
            let g = self.gradient(&v.component(k));
            for (o, gi) in out.0.iter_mut().zip(&g.0) {
                *o += gi[k];
            }
        }
        out
    }

    /// `∇̃_a v_b`, returned as `out[a][b]`.
    pub fn covector_derivative(&self, v: &CovectorField<T>) -> TensorField<T> {
        let grads: Vec<CovectorField<T>> = (0..3).map(|b| self.gradient(&v.component(b))).collect();
        TensorField(
            (0..self.len())
                .map(|i| {
                    let mut g = linalg::zero33();
                    for a in 0..3 {
                        for b in 0..3 {
                            g[a][b] = grads[b].0[i][a];
                        }
                    }
                    linalg::matmul(&g, &linalg::projector(&self.normals[i]))
                })
                .collect(),
        )
    }

    /// `∇̃_c t_ab`, returned as `out[c][a][b]`.
    pub fn tensor_derivative(&self, t: &TensorField<T>) -> Rank3Field<T> {
        let mut grads = Vec::with_capacity(9);
        for a in 0..3 {
            for b in 0..3 {
                grads.push(self.gradient(&ScalarField(t.0.iter().map(|m| m[a][b]).collect())));
            }
        }
        Rank3Field(
            (0..self.len())
                .map(|i| {
                    let p = linalg::projector(&self.normals[i]);
                    let mut out = linalg::zero333();
                    for c in 0..3 {
                        let mut raw = linalg::zero33();
                        for a in 0..3 {
                            for b in 0..3 {
                                raw[a][b] = grads[3 * a + b].0[i][c];
                            }
                        }
                        out[c] = linalg::matmul(&p, &linalg::matmul(&raw, &p));
                    }
                    out
                })
                .collect(),
        )
    }

    /// `∇̃^a t_ab`.
    pub fn tensor_divergence(&self, t: &TensorField<T>) -> CovectorField<T> {
        let d = self.tensor_derivative(t);
        CovectorField(
            d.0.iter()
                .map(|g| {
                    let mut v = linalg::zero3();
                    for (b, vb) in v.iter_mut().enumerate() {
                        *vb = g[0][0][b] + g[1][1][b] + g[2][2][b];
                    }
                    v
                })
                .collect(),
        )
    }

    /// `ε^{ab} ∇̃_a v_b`.
    pub fn curl(&self, v: &CovectorField<T>) -> ScalarField<T> {
        let d = self.covector_derivative(v);
        ScalarField(
            d.0.iter()
                .zip(&self.normals)
                .map(|(g, n)| linalg::frob(&linalg::area_form(n), g))
                .collect(),
        )
    }

    /// Largest normal component of a covector field (tangency defect).
    pub fn normal_defect(&self, v: &CovectorField<T>) -> T {
        v.0.iter()
            .zip(&self.normals)
            .fold(T::zero(), |m, (x, n)| m.max(linalg::dot(x, n).abs()))
    }

    /// Largest normal component of a tensor field in either slot.
    pub fn tensor_normal_defect(&self, t: &TensorField<T>) -> T {
        t.0.iter().zip(&self.normals).fold(T::zero(), |m, (x, n)| {
            let a = linalg::matvec(x, n);
            let b = linalg::matvec(&linalg::transpose(x), n);
            m.max(linalg::max_abs_v(&a)).max(linalg::max_abs_v(&b))
        })
    }
}

/// Eigenvalue of `½Δ̃(Δ̃+2)` on degree `l`: `(l−1)l(l+1)(l+2)/2`.
pub fn bilaplacian_eigenvalue<T: Real>(l: usize) -> T {
    if l == 0 {
        return T::zero();
    }
    T::count((l - 1) * l * (l + 1) * (l + 2)) / T::lit(2.0)
}

/// Orthonormal associated Legendre values and θ-derivatives up to `l_max`.
fn legendre_table<T: Real>(l_max: usize, x: T, s: T) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let mut p = vec![vec![T::zero(); l_max + 1]; l_max + 1];
    let mut dp = vec![vec![T::zero(); l_max + 1]; l_max + 1];
    let four_pi = T::lit(4.0) * T::PI();
    p[0][0] = T::one() / four_pi.sqrt();
    for m in 1..=l_max {
        let mf = T::count(m);
        p[m][m] = ((T::lit(2.0) * mf + T::one()) / (T::lit(2.0) * mf)).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..l_max {
        let mf = T::count(m);
        p[m + 1][m] = (T::lit(2.0) * mf + T::lit(3.0)).sqrt() * x * p[m][m];
    }
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let lf = T::count(l);
            let mf = T::count(m);
            let a = ((T::lit(4.0) * lf * lf - T::one()) / (lf * lf - mf * mf)).sqrt();
            let lm1 = lf - T::one();
            let b = ((lm1 * lm1 - mf * mf) / (T::lit(4.0) * lm1 * lm1 - T::one())).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    for l in 0..=l_max {
        for m in 0..=l {
            let lf = T::count(l);
            let mf = T::count(m);
            let lower = if l > m {
                ((T::lit(2.0) * lf + T::one()) * (lf - mf) * (lf + mf) / (T::lit(2.0) * lf - T::one())).sqrt()
                    * p[l - 1][m]
            } else {
                T::zero()
            };
            dp[l][m] = (lf * x * p[l][m] - lower) / s;
        }
    }
    (p, dp)
}

impl<T: Real> SphereGrid<T> {
    /// Basis values at an arbitrary unit vector (used by oracles).
    pub fn point_basis(l_max: usize, n: &V3<T>) -> Vec<T> {
        let ct = n[2].max(-T::one()).min(T::one());
        let st = (n[0] * n[0] + n[1] * n[1]).sqrt();
        let ph = n[1].atan2(n[0]);
        let (p, _) = legendre_table(l_max, ct, st.max(T::min_positive_value()));
        let sqrt2 = T::lit(2.0).sqrt();
        let mut out = vec![T::zero(); (l_max + 1) * (l_max + 1)];
        for l in 0..=l_max {
            out[l * l + l] = p[l][0];
            for m in 1..=l {
                let (s, c) = (T::count(m) * ph).sin_cos();
                out[l * l + l + m] = sqrt2 * p[l][m] * c;
                out[l * l + l - m] = sqrt2 * p[l][m] * s;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, matvec};
    use proptest::prelude::*;

    fn grid() -> SphereGrid<f64> {
        SphereGrid::new(15).unwrap()
    }

    fn poly(g: &SphereGrid<f64>, coeffs: &[f64], deg: usize) -> ScalarField<f64> {
        g.scalar(|n| eval_poly(coeffs, deg, n))
    }

    fn eval_poly(coeffs: &[f64], deg: usize, n: &[f64; 3]) -> f64 {
        let mut k = 0;
        let mut s = 0.0;
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                let c = deg - a - b;
                s += coeffs[k % coeffs.len()] * n[0].powi(a as i32) * n[1].powi(b as i32) * n[2].powi(c as i32);
                k += 1;
            }
        }
        s
    }

    #[test]
    fn weights_sum_to_sphere_area() {
        let g = grid();
        let area = g.integrate(&g.constant(1.0));
        assert!((area / (4.0 * std::f64::consts::PI) - 1.0).abs() < 1e-14);
        assert!(g.integrate(&g.scalar(|n| n[0] * n[1])).abs() < 1e-15);
    }

    #[test]
    fn exact_moments() {
        let g = grid();
        let pi = std::f64::consts::PI;
        assert!((g.integrate(&g.scalar(|n| n[0] * n[0])) - 4.0 * pi / 3.0).abs() < 1e-13);
        assert!((g.integrate(&g.scalar(|n| n[2].powi(4))) - 4.0 * pi / 5.0).abs() < 1e-13);
    }

    #[test]
    fn quadrature_matches_refined_oracle_for_degree_ten() {
        let g = grid();
        let fine = SphereGrid::<f64>::with_resolution(15, 64, 129).unwrap();
        let coeffs = [0.3, -1.2, 0.7, 2.1, -0.4, 0.9, 1.3, -0.8, 0.2, 0.55, -1.7];
        let f = |n: &[f64; 3]| eval_poly(&coeffs, 10, n) + eval_poly(&coeffs[3..], 7, n);
        let a = g.integrate(&g.scalar(f));
        let b = fine.integrate(&fine.scalar(f));
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn basis_is_orthonormal() {
        let g = grid();
        let n = g.len();
        let m = g.n_modes();
        for k in (0..m).step_by(7) {
            for j in (0..m).step_by(5) {
                let ip: f64 = (0..n).map(|i| g.weights[i] * g.basis[k * n + i] * g.basis[j * n + i]).sum();
                let want = if k == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12, "({k},{j}) -> {ip}");
            }
        }
    }

    #[test]
    fn coordinate_is_single_degree_one_mode() {
        let g = grid();
        let c = g.sh_analyze(&g.coordinate(2));
        assert!((c.band_norm(1) - (4.0 * std::f64::consts::PI / 3.0).sqrt()).abs() < 1e-13);
        assert!(c.off_band_norm(&[1]) < 1e-13);
        assert!(c.get(1, 0).abs() > 1.0);
    }

    #[test]
    fn laplacian_of_coordinates() {
        let g = grid();
        for i in 0..3 {
            let x = g.coordinate(i);
            let lap = g.laplacian(&x);
            assert!((&lap + &(&x * 2.0)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn bilaplacian_solver_examples() {
        let g = grid();
        assert_eq!(g.solve_bilaplacian(&g.constant(0.0), 1e-9).unwrap().max_abs(), 0.0);
        let rho = g.scalar(|n| 2.0 * n[0] * n[0] - n[1] * n[1] - n[2] * n[2]);
        let u = g.solve_bilaplacian(&(&rho * 12.0), 1e-9).unwrap();
        assert!((&u - &rho).max_abs() < 1e-12);
        let err = g.solve_bilaplacian(&g.coordinate(2), 1e-9).unwrap_err();
        assert!(matches!(err, QleError::KernelObstruction { .. }));
        assert_eq!(bilaplacian_eigenvalue::<f64>(3), 60.0);
    }

    #[test]
    fn gradient_matches_finite_differences_on_rotated_patch() {
        let g = grid();
        let coeffs = [0.4, -0.3, 1.1, 0.6, -0.9, 0.2];
        let f = |n: &[f64; 3]| eval_poly(&coeffs, 5, n) + (n[0] - 0.5 * n[2]).powi(2);
        let grad = g.gradient(&g.scalar(f));
        let h = 1e-5;
        for i in (0..g.len()).step_by(37) {
            let n = g.normals[i];
            // rotated patch: orthonormal tangent pair not aligned with θ, φ
            let t1 = linalg::add(&linalg::scale(0.6, &g.e_theta[i]), &linalg::scale(0.8, &g.e_phi[i]));
            let t2 = linalg::cross(&n, &t1);
            for t in [t1, t2] {
                let plus = normalize(&linalg::add(&n, &linalg::scale(h, &t)));
                let minus = normalize(&linalg::sub(&n, &linalg::scale(h, &t)));
                let fd = (f(&plus) - f(&minus)) / (2.0 * h);
                assert!((fd - dot(&grad.0[i], &t)).abs() < 1e-6);
            }
        }
    }

    fn normalize(v: &[f64; 3]) -> [f64; 3] {
        linalg::scale(1.0 / linalg::norm(v), v)
    }

    #[test]
    fn calculus_commutes_with_rotations() {
        let g = grid();
        let (a, b) = (0.7f64, -0.4f64);
        let rz = [[a.cos(), -a.sin(), 0.0], [a.sin(), a.cos(), 0.0], [0.0, 0.0, 1.0]];
        let rx = [[1.0, 0.0, 0.0], [0.0, b.cos(), -b.sin()], [0.0, b.sin(), b.cos()]];
        let r = linalg::matmul(&rz, &rx);
        let rt = linalg::transpose(&r);
        let coeffs = [0.5, -1.0, 0.25, 0.8, 0.1, -0.6, 0.9];
        let f = |n: &[f64; 3]| eval_poly(&coeffs, 6, n);
        let rotated = g.scalar(|n| f(&matvec(&rt, n)));
        let lap_rot = g.laplacian(&rotated);
        let grad_rot = g.gradient(&rotated);
        // evaluate the unrotated quantities through the fine grid oracle
        let fine = SphereGrid::<f64>::with_resolution(15, 16, 33).unwrap();
        let base = fine.scalar(f);
        let c = fine.sh_analyze(&base);
        for i in (0..g.len()).step_by(23) {
            let m = matvec(&rt, &g.normals[i]);
            let want_lap = eval_spectral_lap(&c, &m);
            assert!((lap_rot.0[i] - want_lap).abs() < 1e-10);
            let gm = numeric_grad(&f, &m);
            let want_grad = matvec(&r, &gm);
            for k in 0..3 {
                assert!((grad_rot.0[i][k] - want_grad[k]).abs() < 1e-6);
            }
        }
    }

    fn eval_spectral_lap(c: &SpectralCoeffs<f64>, n: &[f64; 3]) -> f64 {
        let point = SphereGrid::<f64>::point_basis(c.l_max, n);
        c.coeffs
            .iter()
            .zip(point.iter())
            .enumerate()
            .map(|(k, (ck, y))| {
                let l = (k as f64).sqrt().floor();
                -l * (l + 1.0) * ck * y
            })
            .sum()
    }

    fn numeric_grad(f: &dyn Fn(&[f64; 3]) -> f64, n: &[f64; 3]) -> [f64; 3] {
        let h = 1e-6;
        let mut g = [0.0; 3];
        for (k, gk) in g.iter_mut().enumerate() {
            let mut p = *n;
            let mut q = *n;
            p[k] += h;
            q[k] -= h;
            *gk = (f(&p) - f(&q)) / (2.0 * h);
        }
        let p = linalg::projector(n);
        matvec(&p, &g)
    }

    #[test]
    fn tensor_calculus_of_metric_vanishes() {
        let g = grid();
        let d = g.tensor_derivative(&g.metric());
        assert!(d.max_abs() < 1e-12);
        let x = g.coordinate(0);
        let grad = g.gradient(&x);
        assert!((&g.divergence(&grad) - &g.laplacian(&x)).max_abs() < 1e-12);
        assert!(g.curl(&grad).max_abs() < 1e-12);
    }

    #[test]
    fn overflow_is_detected() {
        let g = SphereGrid::<f64>::new(8).unwrap();
        let f = g.scalar(|n| n[0].powi(12));
        assert!(matches!(
            g.check_band_limited(&f, 1e-10),
            Err(QleError::BandLimitOverflow { .. })
        ));
        assert!(g.check_band_limited(&g.scalar(|n| n[0].powi(8)), 1e-10).is_ok());
    }

    #[test]
    fn single_precision_grid_is_usable() {
        let g = SphereGrid::<f32>::new(8).unwrap();
        let area = g.integrate(&g.constant(1.0));
        assert!((area - 4.0 * std::f32::consts::PI).abs() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn roundtrip_and_divergence_theorem(coeffs in proptest::collection::vec(-2.0f64..2.0, 12..40)) {
            let g = grid();
            let f = poly(&g, &coeffs, 7);
            let back = g.sh_synthesize(&g.sh_analyze(&f));
            prop_assert!((&back - &f).max_abs() < 1e-12 * f.max_abs().max(1.0));
            prop_assert!(g.integrate(&g.laplacian(&f)).abs() < 1e-12 * f.max_abs().max(1.0));
            let (u, _) = g.remove_kernel(&f);
            let again = g.solve_bilaplacian(&g.bilaplacian(&u), 1e-9).unwrap();
            prop_assert!((&again - &u).max_abs() < 1e-10 * u.max_abs().max(1.0));
        }
    }
}
