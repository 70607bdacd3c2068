//! Null decomposition of the curvature at `p` into fields on the unit sphere.
//!
//! At a node with unit direction `n` the null frame is `L = e₀ + nⁱeᵢ`,
//! `L̲ = ½(e₀ − nⁱeᵢ)`, and tangent directions are the Cartesian `eᵢ`
//! projected with `P = I − n nᵀ`.

use super::jet::{CurvatureJet, Mode};
use super::tensor::{eta, Tensor4, V4};
use crate::error::{QleError, Result};
use crate::linalg::{self, M3, V3};
use crate::scalar::Real;
use crate::sphere::{CovectorField, Field, ScalarField, SphereGrid, TensorField};

/// `L` at direction `n`.
pub fn outgoing<T: Real>(n: &V3<T>) -> V4<T> {
    [T::one(), n[0], n[1], n[2]]
}

/// `L̲` at direction `n`.
pub fn incoming<T: Real>(n: &V3<T>) -> V4<T> {
    let h = T::lit(0.5);
    [h, -h * n[0], -h * n[1], -h * n[2]]
}

/// Lorentzian inner product.
pub fn minkowski<T: Real>(a: &V4<T>, b: &V4<T>) -> T {
    (0..4).map(|m| eta::<T>(m) * a[m] * b[m]).sum()
}

fn spatial_block<T: Real>(m: &[[T; 4]; 4]) -> M3<T> {
    let mut out = linalg::zero33();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[i + 1][j + 1];
        }
    }
    out
}

fn project_m<T: Real>(p: &M3<T>, m: &M3<T>) -> M3<T> {
    linalg::matmul(p, &linalg::matmul(m, p))
}

/// The six Christodoulou–Klainerman components of one Weyl-type tensor.
///
/// `α_ab = W(e_a, L, e_b, L)`; note that this is `−W_{LabL}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullComponents<T> {
    pub alpha: TensorField<T>,
    pub beta: CovectorField<T>,
    pub rho: ScalarField<T>,
    pub sigma: ScalarField<T>,
    pub beta_bar: CovectorField<T>,
    pub alpha_bar: TensorField<T>,
}

impl<T: Real> NullComponents<T> {
    fn with_capacity(n: usize) -> Self {
        Self {
            alpha: TensorField(Vec::with_capacity(n)),
            beta: CovectorField(Vec::with_capacity(n)),
            rho: ScalarField(Vec::with_capacity(n)),
            sigma: ScalarField(Vec::with_capacity(n)),
            beta_bar: CovectorField(Vec::with_capacity(n)),
            alpha_bar: TensorField(Vec::with_capacity(n)),
        }
    }

    fn push(&mut self, w: &Tensor4<T>, n: &V3<T>) {
        let l = outgoing(n);
        let lb = incoming(n);
        let p = linalg::projector(n);
        let eps = linalg::area_form(n);
        let a = spatial_block(&w.slots_13(&l, &l));
        let ab = spatial_block(&w.slots_13(&lb, &lb));
        let b4 = w.slot_1(&l, &lb, &l);
        let bb4 = w.slot_1(&lb, &lb, &l);
        let s = spatial_block(&w.slots_12(&lb, &l));
        self.alpha.0.push(project_m(&p, &a));
        self.alpha_bar.0.push(project_m(&p, &ab));
        self.beta.0.push(linalg::matvec(&p, &[b4[1], b4[2], b4[3]]));
        self.beta_bar.0.push(linalg::matvec(&p, &[bb4[1], bb4[2], bb4[3]]));
        self.rho.0.push(w.contract(&lb, &l, &lb, &l));
        self.sigma.0.push(linalg::frob(&eps, &s));
    }

    /// Components of a constant tensor over the grid.
    pub fn of_tensor(w: &Tensor4<T>, grid: &SphereGrid<T>) -> Self {
        let mut out = Self::with_capacity(grid.len());
        for n in grid.normals() {
            out.push(w, n);
        }
        out
    }

    /// Components of `Σ_μ L^μ t_μ` (first directional derivative).
    pub fn of_first_derivative(d: &[Tensor4<T>], grid: &SphereGrid<T>) -> Self {
        let mut out = Self::with_capacity(grid.len());
        for n in grid.normals() {
            let l = outgoing(n);
            let mut acc = Tensor4::zero();
            for (mu, dm) in d.iter().enumerate() {
                acc.axpy(l[mu], dm);
            }
            out.push(&acc, n);
        }
        out
    }

    /// Components of `Σ_{μν} L^μ L^ν t_{μν}` (second directional derivative).
    pub fn of_second_derivative(d2: &[Tensor4<T>], grid: &SphereGrid<T>) -> Self {
        let mut out = Self::with_capacity(grid.len());
        for n in grid.normals() {
            let l = outgoing(n);
            let mut acc = Tensor4::zero();
            for mu in 0..4 {
                for nu in 0..4 {
                    acc.axpy(l[mu] * l[nu], &d2[mu * 4 + nu]);
                }
            }
            out.push(&acc, n);
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.alpha
            .max_abs()
            .max(self.beta.max_abs())
            .max(self.rho.max_abs())
            .max(self.sigma.max_abs())
            .max(self.beta_bar.max_abs())
            .max(self.alpha_bar.max_abs())
    }
}

/// Null components of the full curvature tensor and the Ricci tensor, used in
/// the matter expansions. In vacuum they reduce to Weyl data plus `κ²` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFields<T> {
    /// `Ric(L, L)`
    pub ric_ll: ScalarField<T>,
    /// `Ric(L, L̲)`
    pub ric_llb: ScalarField<T>,
    /// Tangential part of `Ric(·, L)`.
    pub ric_la: CovectorField<T>,
    /// `R(L, L̲, L, L̲)`
    pub r_llbllb: ScalarField<T>,
    /// `R(L, a, b, L)`
    pub r_labl: TensorField<T>,
    /// `R(L, a, L, L̲)`
    pub r_lallb: CovectorField<T>,
    /// `R(L, a, b, L̲)` (not symmetric).
    pub r_lablb: TensorField<T>,
}

impl<T: Real> CurvatureFields<T> {
    pub fn new(jet: &CurvatureJet<T>, grid: &SphereGrid<T>) -> Self {
        let r = jet.riemann();
        let ric = jet.ricci_tensor();
        let n_nodes = grid.len();
        let mut out = Self {
            ric_ll: ScalarField(Vec::with_capacity(n_nodes)),
            ric_llb: ScalarField(Vec::with_capacity(n_nodes)),
            ric_la: CovectorField(Vec::with_capacity(n_nodes)),
            r_llbllb: ScalarField(Vec::with_capacity(n_nodes)),
            r_labl: TensorField(Vec::with_capacity(n_nodes)),
            r_lallb: CovectorField(Vec::with_capacity(n_nodes)),
            r_lablb: TensorField(Vec::with_capacity(n_nodes)),
        };
        let bil = |x: &V4<T>, y: &V4<T>| {
            let mut s = T::zero();
            for a in 0..4 {
                for b in 0..4 {
                    s += x[a] * y[b] * ric[a][b];
                }
            }
            s
        };
        for n in grid.normals() {
            let l = outgoing(n);
            let lb = incoming(n);
            let p = linalg::projector(n);
            out.ric_ll.0.push(bil(&l, &l));
            out.ric_llb.0.push(bil(&l, &lb));
            let mut rl = [T::zero(); 3];
            for (i, v) in rl.iter_mut().enumerate() {
                *v = (0..4).map(|b| ric[i + 1][b] * l[b]).sum();
            }
            out.ric_la.0.push(linalg::matvec(&p, &rl));
            out.r_llbllb.0.push(r.contract(&l, &lb, &l, &lb));
            out.r_labl.0.push(project_m(&p, &spatial_block(&r.slots_23(&l, &l))));
            let v = r.slot_2(&l, &l, &lb);
            out.r_lallb.0.push(linalg::matvec(&p, &[v[1], v[2], v[3]]));
            out.r_lablb.0.push(project_m(&p, &spatial_block(&r.slots_23(&l, &lb))));
        }
        out
    }
}

/// `W₀`, `Wᵢ`, `P_k`, `R_ij`, `S_j`. The index-`i` triples are stored as
/// Cartesian triples per node (`Wᵢ` and `P_k` are not tangent in general).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields<T> {
    pub w0: ScalarField<T>,
    pub w: CovectorField<T>,
    pub p: CovectorField<T>,
    pub r: TensorField<T>,
    pub s: CovectorField<T>,
}

impl<T: Real> DerivedFields<T> {
    /// Direct contractions of the Weyl tensor with the position vector.
    pub fn by_contraction(w: &Tensor4<T>, grid: &SphereGrid<T>) -> Self {
        let e = super::tensor::electric_part(w);
        let w0ijk = |i: usize, j: usize, k: usize| w.at(0, i + 1, j + 1, k + 1);
        let third = T::one() / T::lit(3.0);
        let mut out = Self::empty(grid.len());
        for n in grid.normals() {
            let en = linalg::matvec(&e, n);
            let w0 = linalg::dot(n, &en);
            let mut wi = [T::zero(); 3];
            for (i, v) in wi.iter_mut().enumerate() {
                for j in 0..3 {
                    for k in 0..3 {
                        *v += n[j] * n[k] * w0ijk(k, i, j);
                    }
                }
            }
            let mut pk = [T::zero(); 3];
            for k in 0..3 {
                pk[k] = en[k] / T::lit(15.0) - w0 * n[k] / T::lit(6.0);
            }
            let mut r = linalg::zero33();
            for i in 0..3 {
                for j in 0..3 {
                    let mut cubic = T::zero();
                    let mut mij = T::zero();
                    for q in 0..3 {
                        mij += n[q] * (w0ijk(i, q, j) + w0ijk(j, q, i));
                        for k in 0..3 {
                            cubic += n[k] * n[q] * (n[i] * w0ijk(k, q, j) + n[j] * w0ijk(k, q, i));
                        }
                    }
                    let delta = if i == j { T::one() } else { T::zero() };
                    r[i][j] = third
                        * (T::lit(2.0) * n[i] * en[j] + T::lit(2.0) * n[j] * en[i] + cubic
                            - T::lit(2.0) * e[i][j]
                            - w0 * delta
                            - w0 * n[i] * n[j]
                            - mij);
                }
            }
            let mut s = [T::zero(); 3];
            for j in 0..3 {
                s[j] = third * T::lit(4.0) * (-en[j] + n[j] * w0 + wi[j]);
            }
            out.w0.0.push(w0);
            out.w.0.push(wi);
            out.p.0.push(pk);
            out.r.0.push(r);
            out.s.0.push(s);
        }
        out
    }

    /// The same quantities from the null components `β, β̲, ρ, α`.
    pub fn from_components(c: &NullComponents<T>, grid: &SphereGrid<T>) -> Self {
        let mut out = Self::empty(grid.len());
        let half = T::lit(0.5);
        for (k, n) in grid.normals().iter().enumerate() {
            let b = c.beta.0[k];
            let bb = c.beta_bar.0[k];
            let rho = c.rho.0[k];
            let mut wi = [T::zero(); 3];
            let mut pk = [T::zero(); 3];
            let mut s = [T::zero(); 3];
            for i in 0..3 {
                wi[i] = half * (b[i] - T::lit(2.0) * bb[i]);
                pk[i] = -(b[i] + T::lit(2.0) * bb[i]) / T::lit(30.0) - rho * n[i] / T::lit(10.0);
                s[i] = T::lit(4.0) / T::lit(3.0) * b[i];
            }
            out.w0.0.push(rho);
            out.w.0.push(wi);
            out.p.0.push(pk);
            out.r.0.push(linalg::mscale(-T::one() / T::lit(3.0), &c.alpha.0[k]));
            out.s.0.push(s);
        }
        out
    }

    fn empty(n: usize) -> Self {
        Self {
            w0: ScalarField(Vec::with_capacity(n)),
            w: CovectorField(Vec::with_capacity(n)),
            p: CovectorField(Vec::with_capacity(n)),
            r: TensorField(Vec::with_capacity(n)),
            s: CovectorField(Vec::with_capacity(n)),
        }
    }

    /// Largest pointwise difference between two evaluations.
    pub fn max_difference(&self, other: &Self) -> T {
        (&self.w0 - &other.w0)
            .max_abs()
            .max((&self.w - &other.w).max_abs())
            .max((&self.p - &other.p).max_abs())
            .max((&self.r - &other.r).max_abs())
            .max((&self.s - &other.s).max_abs())
    }

    pub fn w_component(&self, i: usize) -> ScalarField<T> {
        self.w.component(i)
    }
    pub fn p_component(&self, k: usize) -> ScalarField<T> {
        self.p.component(k)
    }
    pub fn s_component(&self, j: usize) -> ScalarField<T> {
        self.s.component(j)
    }
    pub fn r_component(&self, i: usize, j: usize) -> ScalarField<T> {
        ScalarField(self.r.0.iter().map(|m| m[i][j]).collect())
    }
}

/// Every sphere field derived from a curvature jet.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylSphereFields<T> {
    pub mode: Mode,
    pub kappa: T,
    pub base: NullComponents<T>,
    pub first: Option<NullComponents<T>>,
    pub second: Option<NullComponents<T>>,
    pub curvature: CurvatureFields<T>,
    /// Closed forms in terms of null components.
    pub derived: DerivedFields<T>,
    /// Direct contractions, kept for the dual-route check.
    pub derived_contraction: DerivedFields<T>,
}

impl<T: Real> WeylSphereFields<T> {
    /// `D` components, or `MissingJetOrder`.
    pub fn d(&self) -> Result<&NullComponents<T>> {
        self.first
            .as_ref()
            .ok_or_else(|| QleError::MissingJetOrder("first derivative of the Weyl tensor (d_weyl)".into()))
    }

    /// `D²` components, or `MissingJetOrder`.
    pub fn d2(&self) -> Result<&NullComponents<T>> {
        self.second
            .as_ref()
            .ok_or_else(|| QleError::MissingJetOrder("second derivative of the Weyl tensor (d2_weyl)".into()))
    }

    pub fn w0(&self) -> &ScalarField<T> {
        &self.derived.w0
    }

    /// `|α|²`, `|β|²` pointwise.
    pub fn alpha_sq(&self) -> ScalarField<T> {
        self.base.alpha.contract(&self.base.alpha)
    }
    pub fn beta_sq(&self) -> ScalarField<T> {
        self.base.beta.dot(&self.base.beta)
    }

    /// Dual-route discrepancy of the derived fields.
    pub fn derived_route_gap(&self) -> T {
        self.derived.max_difference(&self.derived_contraction)
    }
}

/// Builds every sphere field for a jet.
pub fn decompose<T: Real>(jet: &CurvatureJet<T>, grid: &SphereGrid<T>) -> Result<WeylSphereFields<T>> {
    jet.check_shapes()?;
    let base = NullComponents::of_tensor(&jet.weyl, grid);
    let first = jet.d_weyl.as_ref().map(|d| NullComponents::of_first_derivative(d, grid));
    let second = jet.d2_weyl.as_ref().map(|d| NullComponents::of_second_derivative(d, grid));
    let derived = DerivedFields::from_components(&base, grid);
    let derived_contraction = DerivedFields::by_contraction(&jet.weyl, grid);
    Ok(WeylSphereFields {
        mode: jet.mode,
        kappa: jet.kappa,
        base,
        first,
        second,
        curvature: CurvatureFields::new(jet, grid),
        derived,
        derived_contraction,
    })
}

/// Residuals of the four algebraic null relations of a vacuum Weyl tensor:
/// `W_{LabL̲} = ½σ̃ρ + ¼εσ`, `W_{abcL} = −ε_ab ε_cd β^d`,
/// `W_{abcL̲} = ε_ab ε_cd β̲^d`, `W_{abL̲L} = ½εσ`.
pub fn null_relation_residuals<T: Real>(w: &Tensor4<T>, c: &NullComponents<T>, grid: &SphereGrid<T>) -> [T; 4] {
    let mut res = [T::zero(); 4];
    for (k, n) in grid.normals().iter().enumerate() {
        let l = outgoing(n);
        let lb = incoming(n);
        let p = linalg::projector(n);
        let eps = linalg::area_form(n);
        let rho = c.rho.0[k];
        let sigma = c.sigma.0[k];
        let lablb = project_m(&p, &spatial_block(&w.slots_23(&l, &lb)));
        let ablbl = project_m(&p, &spatial_block(&w.slots_12(&lb, &l)));
        let eb = linalg::matvec(&eps, &c.beta.0[k]);
        let ebb = linalg::matvec(&eps, &c.beta_bar.0[k]);
        for a in 0..3 {
            for b in 0..3 {
                let want = T::lit(0.5) * p[a][b] * rho + T::lit(0.25) * eps[a][b] * sigma;
                res[0] = res[0].max((lablb[a][b] - want).abs());
                res[3] = res[3].max((ablbl[a][b] - T::lit(0.5) * eps[a][b] * sigma).abs());
            }
        }
        // rank-3 relations, projected in every slot
        let mut abcl = [[[T::zero(); 3]; 3]; 3];
        let mut abclb = [[[T::zero(); 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for m in 0..3 {
                    for q in 0..4 {
                        abcl[i][j][m] += w.at(i + 1, j + 1, m + 1, q) * l[q];
                        abclb[i][j][m] += w.at(i + 1, j + 1, m + 1, q) * lb[q];
                    }
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    let mut x = T::zero();
                    let mut y = T::zero();
                    for i in 0..3 {
                        for j in 0..3 {
                            for m in 0..3 {
                                let pp = p[a][i] * p[b][j] * p[cc][m];
                                x += pp * abcl[i][j][m];
                                y += pp * abclb[i][j][m];
                            }
                        }
                    }
                    // ε_cd β^d with ε_cd = ε_cdk n_k, so ε_cd β^d = (ε β)_c
                    res[1] = res[1].max((x + eps[a][b] * eb[cc]).abs());
                    res[2] = res[2].max((y - eps[a][b] * ebb[cc]).abs());
                }
            }
        }
    }
    res
}

/// Tangency and symmetric trace-free defects of `α` and `α̲`.
pub fn alpha_defects<T: Real>(c: &NullComponents<T>, grid: &SphereGrid<T>) -> T {
    let mut m = grid.tensor_normal_defect(&c.alpha).max(grid.tensor_normal_defect(&c.alpha_bar));
    m = m.max(c.alpha.asymmetry()).max(c.alpha_bar.asymmetry());
    m = m.max(c.alpha.trace().max_abs()).max(c.alpha_bar.trace().max_abs());
    m
}
