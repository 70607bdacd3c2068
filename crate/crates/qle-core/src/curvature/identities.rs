//! Differential identities satisfied by the null components on the round sphere.

use super::fields::{alpha_defects, null_relation_residuals, WeylSphereFields};
use super::jet::{ConstraintRow, CurvatureJet, Mode};
use crate::error::Result;
use crate::linalg::{self, M3};
use crate::scalar::Real;
use crate::sphere::{CovectorField, Field, ScalarField, SphereGrid, TensorField};

/// Default pass threshold for identity residuals (relative to the data scale).
pub const IDENTITY_TOL: f64 = 1e-10;
/// Threshold for identities that involve derivative jets.
pub const D_IDENTITY_TOL: f64 = 1e-8;

struct Suite<T> {
    rows: Vec<ConstraintRow>,
    scale: T,
}

impl<T: Real> Suite<T> {
    fn push(&mut self, name: &str, anchor: &str, residual: T, tol: f64) {
        let rel = (residual / self.scale).to_f64_lossy();
        let tol = T::tolerance(tol).to_f64_lossy();
        self.rows.push(ConstraintRow {
            name: name.into(),
            anchor: anchor.into(),
            residual: rel,
            tolerance: tol,
            pass: rel <= tol,
        });
    }
}

fn eps_apply<T: Real>(grid: &SphereGrid<T>, v: &CovectorField<T>) -> CovectorField<T> {
    CovectorField(
        v.0.iter()
            .zip(grid.normals())
            .map(|(x, n)| linalg::matvec(&linalg::area_form(n), x))
            .collect(),
    )
}

/// `(σ̃_ca σ̃_bd + σ̃_cb σ̃_ad + ε_ca ε_bd + ε_cb ε_ad) v^d` as `out[c][a][b]`.
fn alpha_gradient_model<T: Real>(grid: &SphereGrid<T>, v: &CovectorField<T>, scale: T) -> Vec<[M3<T>; 3]> {
    v.0.iter()
        .zip(grid.normals())
        .map(|(x, n)| {
            let p = linalg::projector(n);
            let e = linalg::area_form(n);
            let px = linalg::matvec(&p, x);
            let ex = linalg::matvec(&e, x);
            let mut out = [linalg::zero33(); 3];
            for (c, oc) in out.iter_mut().enumerate() {
                for a in 0..3 {
                    for b in 0..3 {
                        oc[a][b] = scale * (p[c][a] * px[b] + p[c][b] * px[a] + e[c][a] * ex[b] + e[c][b] * ex[a]);
                    }
                }
            }
            out
        })
        .collect()
}

fn rank3_gap<T: Real>(a: &crate::sphere::Rank3Field<T>, b: &[[M3<T>; 3]]) -> T {
    let mut m = T::zero();
    for (x, y) in a.0.iter().zip(b) {
        for c in 0..3 {
            m = m.max(linalg::max_abs_m(&linalg::msub(&x[c], &y[c])));
        }
    }
    m
}

/// `ε^{ca} ∇̃_c t_ab`.
fn eps_divergence<T: Real>(grid: &SphereGrid<T>, t: &TensorField<T>) -> CovectorField<T> {
    let d = grid.tensor_derivative(t);
    CovectorField(
        d.0.iter()
            .zip(grid.normals())
            .map(|(g, n)| {
                let e = linalg::area_form(n);
                let mut v = linalg::zero3();
                for (b, vb) in v.iter_mut().enumerate() {
                    for c in 0..3 {
                        for a in 0..3 {
                            *vb += e[c][a] * g[c][a][b];
                        }
                    }
                }
                v
            })
            .collect(),
    )
}

fn tensor_model<T: Real>(grid: &SphereGrid<T>, sigma: &ScalarField<T>, rho: &ScalarField<T>, cs: T, cr: T) -> TensorField<T> {
    TensorField(
        grid.normals()
            .iter()
            .enumerate()
            .map(|(k, n)| {
                linalg::madd(
                    &linalg::mscale(cs * sigma.0[k], &linalg::area_form(n)),
                    &linalg::mscale(cr * rho.0[k], &linalg::projector(n)),
                )
            })
            .collect(),
    )
}

/// Runs every identity that the available jet depth supports.
///
/// Residuals are reported relative to `max(1, ‖W‖)` (and its derivatives).
pub fn identity_suite<T: Real>(jet: &CurvatureJet<T>, f: &WeylSphereFields<T>, grid: &SphereGrid<T>) -> Result<Vec<ConstraintRow>> {
    let c = &f.base;
    let mut s = Suite { rows: Vec::new(), scale: T::one().max(c.max_abs()) };
    let two = T::lit(2.0);
    let half = T::lit(0.5);

    // first-order derivative formulas
    let grad_rho = grid.gradient(&c.rho);
    let want = &(-&c.beta) - &(&c.beta_bar * two);
    s.push("grad-rho", "grad rho = -beta - 2 beta_bar", (&grad_rho - &want).max_abs(), IDENTITY_TOL);

    let grad_sigma = grid.gradient(&c.sigma);
    let want = &eps_apply(grid, &(&c.beta - &(&c.beta_bar * two))) * two;
    s.push("grad-sigma", "grad sigma = 2 eps (beta - 2 beta_bar)", (&grad_sigma - &want).max_abs(), IDENTITY_TOL);

    let da = grid.tensor_derivative(&c.alpha);
    s.push(
        "grad-alpha",
        "nabla_c alpha_ab = (s_ca s_bd + s_cb s_ad + e_ca e_bd + e_cb e_ad) beta^d",
        rank3_gap(&da, &alpha_gradient_model(grid, &c.beta, T::one())),
        IDENTITY_TOL,
    );
    let dab = grid.tensor_derivative(&c.alpha_bar);
    s.push(
        "grad-alpha-bar",
        "nabla_c alpha_bar_ab = 1/2 (s_ca s_bd + s_cb s_ad + e_ca e_bd + e_cb e_ad) beta_bar^d",
        rank3_gap(&dab, &alpha_gradient_model(grid, &c.beta_bar, half)),
        IDENTITY_TOL,
    );

    let db = grid.covector_derivative(&c.beta);
    let want = &tensor_model(grid, &c.sigma, &c.rho, T::lit(-0.75), T::lit(1.5)) - &(&c.alpha * half);
    s.push("grad-beta", "nabla_a beta_b = -3/4 sigma eps + 3/2 rho s - 1/2 alpha", (&db - &want).max_abs(), IDENTITY_TOL);
    let dbb = grid.covector_derivative(&c.beta_bar);
    let want = &tensor_model(grid, &c.sigma, &c.rho, T::lit(0.375), T::lit(0.75)) - &c.alpha_bar;
    s.push(
        "grad-beta-bar",
        "nabla_a beta_bar_b = 3/8 sigma eps + 3/4 rho s - alpha_bar",
        (&dbb - &want).max_abs(),
        IDENTITY_TOL,
    );

    // contracted forms
    let div_a = grid.tensor_divergence(&c.alpha);
    s.push("div-alpha", "div alpha = 4 beta", (&div_a - &(&c.beta * T::lit(4.0))).max_abs(), IDENTITY_TOL);
    let curl_a = eps_divergence(grid, &c.alpha);
    s.push(
        "curl-alpha",
        "eps^ca nabla_c alpha_ab = 4 eps_bd beta^d",
        (&curl_a - &(&eps_apply(grid, &c.beta) * T::lit(4.0))).max_abs(),
        IDENTITY_TOL,
    );
    let div_ab = grid.tensor_divergence(&c.alpha_bar);
    s.push("div-alpha-bar", "div alpha_bar = 2 beta_bar", (&div_ab - &(&c.beta_bar * two)).max_abs(), IDENTITY_TOL);
    let curl_ab = eps_divergence(grid, &c.alpha_bar);
    s.push(
        "curl-alpha-bar",
        "eps^ca nabla_c alpha_bar_ab = 2 eps_bd beta_bar^d",
        (&curl_ab - &(&eps_apply(grid, &c.beta_bar) * two)).max_abs(),
        IDENTITY_TOL,
    );
    let div_b = grid.divergence(&c.beta);
    s.push("div-beta", "div beta = 3 rho", (&div_b - &(&c.rho * T::lit(3.0))).max_abs(), IDENTITY_TOL);
    let curl_b = grid.curl(&c.beta);
    s.push("curl-beta", "eps^ab nabla_a beta_b = -3/2 sigma", (&curl_b + &(&c.sigma * T::lit(1.5))).max_abs(), IDENTITY_TOL);
    let div_bb = grid.divergence(&c.beta_bar);
    s.push("div-beta-bar", "div beta_bar = 3/2 rho", (&div_bb - &(&c.rho * T::lit(1.5))).max_abs(), IDENTITY_TOL);
    let curl_bb = grid.curl(&c.beta_bar);
    s.push(
        "curl-beta-bar",
        "eps^ab nabla_a beta_bar_b = 3/4 sigma",
        (&curl_bb - &(&c.sigma * T::lit(0.75))).max_abs(),
        IDENTITY_TOL,
    );

    // eigenfunction statements
    let eig = |x: &ScalarField<T>, lam: f64| (&grid.laplacian(x) - &(x * T::lit(lam))).max_abs();
    s.push("laplace-rho", "Laplacian rho = -6 rho", eig(&c.rho, -6.0), IDENTITY_TOL);
    s.push("laplace-sigma", "Laplacian sigma = -6 sigma", eig(&c.sigma, -6.0), IDENTITY_TOL);
    let wmax = (0..3).map(|i| eig(&f.derived.w_component(i), -6.0)).fold(T::zero(), T::max);
    s.push("laplace-w", "Laplacian W_i = -6 W_i", wmax, IDENTITY_TOL);
    let pmax = (0..3).map(|k| eig(&f.derived.p_component(k), -12.0)).fold(T::zero(), T::max);
    s.push("laplace-p", "Laplacian P_k = -12 P_k", pmax, IDENTITY_TOL);

    // algebraic statements
    s.push("w0-equals-rho", "W_0 = n^i n^j W_0i0j = rho", (&f.derived_contraction.w0 - &c.rho).max_abs(), IDENTITY_TOL);
    s.push(
        "derived-dual-route",
        "W_i, P_k, R_ij, S_j: contraction = null-component form",
        f.derived_route_gap(),
        IDENTITY_TOL,
    );
    s.push("alpha-trace-free", "alpha, alpha_bar symmetric trace-free tangent", alpha_defects(c, grid), IDENTITY_TOL);
    if jet.mode == Mode::Vacuum {
        let rel = null_relation_residuals(&jet.weyl, c, grid);
        s.push("relation-lab-lbar", "W_{L a b Lbar} = 1/2 s rho + 1/4 eps sigma", rel[0], IDENTITY_TOL);
        s.push("relation-abcl", "W_{abcL} = -eps_ab eps_cd beta^d", rel[1], IDENTITY_TOL);
        s.push("relation-abclbar", "W_{abcLbar} = eps_ab eps_cd beta_bar^d", rel[2], IDENTITY_TOL);
        s.push("relation-ab-lbar-l", "W_{ab Lbar L} = 1/2 eps sigma", rel[3], IDENTITY_TOL);
    }

    // derivative-jet divergences
    if let Some(d) = &f.first {
        let mut sd = Suite { rows: Vec::new(), scale: s.scale.max(d.max_abs()) };
        let x = (&grid.divergence(&d.beta) - &(&d.rho * T::lit(4.0))).max_abs();
        sd.push("div-d-beta", "div D beta = 4 D rho", x, D_IDENTITY_TOL);
        let x = (&grid.tensor_divergence(&d.alpha) - &(&d.beta * T::lit(5.0))).max_abs();
        sd.push("div-d-alpha", "div D alpha = 5 D beta", x, D_IDENTITY_TOL);
        s.rows.extend(sd.rows);
    }
    if let Some(d2) = &f.second {
        let mut sd = Suite { rows: Vec::new(), scale: s.scale.max(d2.max_abs()) };
        let x = (&grid.divergence(&d2.beta) - &(&d2.rho * T::lit(5.0))).max_abs();
        sd.push("div-d2-beta", "div D^2 beta = 5 D^2 rho", x, D_IDENTITY_TOL);
        let x = (&grid.tensor_divergence(&d2.alpha) - &(&d2.beta * T::lit(6.0))).max_abs();
        sd.push("div-d2-alpha", "div D^2 alpha = 6 D^2 beta", x, D_IDENTITY_TOL);
        s.rows.extend(sd.rows);
    }
    Ok(s.rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::fields::decompose;
    use crate::curvature::generator::{pure_electric, Depth, JetGenerator};

    #[test]
    fn identities_hold_on_generated_jets() {
        let grid = SphereGrid::<f64>::new(15).unwrap();
        let mut g = JetGenerator::new(2024);
        for _ in 0..3 {
            let jet = g.vacuum(1.0, Depth::Second).unwrap();
            let f = decompose(&jet, &grid).unwrap();
            let rows = identity_suite(&jet, &f, &grid).unwrap();
            assert_eq!(rows.len(), 29);
            for r in rows {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn pure_electric_passes() {
        let grid = SphereGrid::<f64>::new(15).unwrap();
        let jet = pure_electric(1.0, 1.0).unwrap();
        let f = decompose(&jet, &grid).unwrap();
        assert!(identity_suite(&jet, &f, &grid).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn corrupted_first_derivative_fails_divergence_rows() {
        let grid = SphereGrid::<f64>::new(15).unwrap();
        let mut jet = JetGenerator::new(5).vacuum(1.0, Depth::First).unwrap();
        let d = jet.d_weyl.as_mut().unwrap();
        // make ∇_0 W an arbitrary Weyl tensor that breaks the divergence condition
        d[0] = JetGenerator::new(6).weyl();
        let f = decompose(&jet, &grid).unwrap();
        let rows = identity_suite(&jet, &f, &grid).unwrap();
        let bad: Vec<_> = rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        assert!(bad.contains(&"div-d-beta") || bad.contains(&"div-d-alpha"), "{bad:?}");
    }
}
