//! Leading-order isometric embedding of `Σ_r` into anti-de Sitter space and
//! the leading-order optimal embedding equation.
//!
//! The embedding is `Y_i = rX̃ⁱ + r³Y_i⁽³⁾ + …`, `Y_0 = r³Y_0⁽³⁾ + …`.

use serde::Serialize;

use crate::curvature::{Mode, WeylSphereFields};
use crate::error::{QleError, Result};
use crate::expansion::ExpansionTable;
use crate::linalg;
use crate::observer::Observer;
use crate::scalar::Real;
use crate::sphere::{Field, ScalarField, SphereGrid, TensorField};

/// Tolerance on the kernel content of the optimal embedding right-hand side.
pub const KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Y0Path {
    ClosedForm,
    Spectral,
}

/// What was removed from `Y_0⁽³⁾` in degrees 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPolicy {
    pub path: Y0Path,
    /// Spectral coefficients `(l,m) = (0,0), (1,−1), (1,0), (1,1)` set to zero.
    pub removed: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingJet<T> {
    pub yi3: [ScalarField<T>; 3],
    pub y03: ScalarField<T>,
    pub kernel_policy: KernelPolicy,
}

/// `Y_i⁽³⁾ = −⅓β^c∇̃_cX̃ⁱ + ½ρX̃ⁱ − (1/12)Ric(L,L)X̃ⁱ`.
///
/// In Cartesian components `β^c∇̃_cX̃ⁱ` is simply the `i`-th component of `β`.
pub fn solve_yi3<T: Real>(fields: &WeylSphereFields<T>, grid: &SphereGrid<T>) -> [ScalarField<T>; 3] {
    let b = &fields.base;
    let ric_ll = &fields.curvature.ric_ll;
    let third = T::one() / T::lit(3.0);
    std::array::from_fn(|i| {
        let x = grid.coordinate(i);
        let mut y = b.beta.component(i).scaled(-third);
        y.axpy(T::lit(0.5), &b.rho.mul_pointwise(&x));
        y.axpy(-T::one() / T::lit(12.0), &ric_ll.mul_pointwise(&x));
        y
    })
}

/// Sup-norm residual of the linearized isometric embedding equation
/// `∂_aX̃ⁱ∂_bY_i⁽³⁾ + ∂_bX̃ⁱ∂_aY_i⁽³⁾ = σ⁽⁴⁾_ab` with `σ⁽⁴⁾ = −⅓R̄_{LabL}`.
pub fn isometric_residual<T: Real>(
    fields: &WeylSphereFields<T>,
    grid: &SphereGrid<T>,
    yi3: &[ScalarField<T>; 3],
) -> T {
    let grads: Vec<_> = yi3.iter().map(|y| grid.gradient(y)).collect();
    let p = grid.metric();
    let mut lhs = TensorField::zeros(grid.len());
    for (node, out) in lhs.0.iter_mut().enumerate() {
        let mut m = linalg::zero33();
        for (i, g) in grads.iter().enumerate() {
            let dx = p.0[node][i];
            m = linalg::madd(&m, &linalg::outer(&dx, &g.0[node]));
        }
        *out = linalg::madd(&m, &linalg::transpose(&m));
    }
    let target = fields.curvature.r_labl.scaled(-T::one() / T::lit(3.0));
    (&lhs - &target).max_abs()
}

/// Right side of the leading optimal embedding equation:
/// `∇̃^a(α_H⁽²⁾)_a + ∇̃^a(f⁽¹⁾∇̃_a(CᵢX̃ⁱ)) + ½Δ̃(f⁽¹⁾CᵢX̃ⁱ)` with `f⁽¹⁾ = (h₀⁽¹⁾ − h⁽¹⁾)/A`.
pub fn optimal_rhs<T: Real>(table: &ExpansionTable<T>, grid: &SphereGrid<T>, obs: &Observer<T>) -> ScalarField<T> {
    let f = table.f1(obs.a());
    let cx = obs.c_dot_x(grid);
    let mut rhs = grid.divergence(&table.alpha_h[0]);
    let grad = grid.gradient(&cx);
    rhs.axpy(T::one(), &grid.divergence(&grad.mul_pointwise(&f)));
    rhs.axpy(T::lit(0.5), &grid.laplacian(&f.mul_pointwise(&cx)));
    rhs
}

/// `Y_0⁽³⁾ = −⅓W₀ + CᵢPᵢ/A` (vacuum) before kernel projection.
pub fn closed_form_y03<T: Real>(fields: &WeylSphereFields<T>, obs: &Observer<T>) -> Result<ScalarField<T>> {
    if fields.mode != Mode::Vacuum {
        return Err(QleError::ModeMismatch("closed-form Y_0 coefficient needs a vacuum jet".into()));
    }
    let c = obs.c();
    let a = obs.a();
    let cp = ScalarField(fields.derived.p.0.iter().map(|p| linalg::dot(&c, p) / a).collect());
    let mut y = fields.w0().scaled(-T::one() / T::lit(3.0));
    y.axpy(T::one(), &cp);
    Ok(y)
}

/// `Y_0⁽³⁾` with degree 0 and 1 content removed.
pub fn solve_y03<T: Real>(
    fields: &WeylSphereFields<T>,
    table: &ExpansionTable<T>,
    grid: &SphereGrid<T>,
    obs: &Observer<T>,
    path: Y0Path,
) -> Result<(ScalarField<T>, KernelPolicy)> {
    let raw = match path {
        Y0Path::ClosedForm => closed_form_y03(fields, obs)?,
        Y0Path::Spectral => {
            let rhs = optimal_rhs(table, grid, obs);
            grid.solve_bilaplacian(&rhs, T::tolerance(KERNEL_TOL))?
        }
    };
    let (y, removed) = grid.remove_kernel(&raw);
    Ok((
        y,
        KernelPolicy {
            path,
            removed: removed.map(|x| x.to_f64_lossy()),
        },
    ))
}

/// Sup-norm residual of `½Δ̃(Δ̃+2)Y_0⁽³⁾ = rhs`.
pub fn optimal_embedding_residual<T: Real>(
    emb: &EmbeddingJet<T>,
    table: &ExpansionTable<T>,
    grid: &SphereGrid<T>,
    obs: &Observer<T>,
) -> T {
    let rhs = optimal_rhs(table, grid, obs);
    (&grid.bilaplacian(&emb.y03) - &rhs).max_abs()
}

impl<T: Real> EmbeddingJet<T> {
    pub fn build(
        fields: &WeylSphereFields<T>,
        table: &ExpansionTable<T>,
        grid: &SphereGrid<T>,
        obs: &Observer<T>,
        path: Y0Path,
    ) -> Result<Self> {
        let yi3 = solve_yi3(fields, grid);
        let (y03, kernel_policy) = solve_y03(fields, table, grid, obs, path)?;
        Ok(Self { yi3, y03, kernel_policy })
    }
}
