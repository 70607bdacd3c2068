//! Independent re-derivation of the null expansions by solving the transport
//! equations along the light cone order by order in `r`.
//!
//! Rescaled unknowns: `σ = r² s`, `l = r Λ`, `σ⁻¹ = r⁻² q`, `n = r N`,
//! `η = r² e`, all with tangent-tensor coefficients stored in Cartesian
//! components. The recursions are
//!
//! * `∂ᵣσ = −2l`: `s_k = −2λ_k/(k+2)`;
//! * `∂ᵣl = R_{LabL} − l σ⁻¹ l`: `c_k λ_k = R_k − (ΛqΛ)'_k`, `c_k = k(k+1)/(k+2)`;
//! * `r⁻¹∂ᵣ(rη) = R_{LaLL̲} + (l_a^b + r⁻¹δ_a^b)η_b`: `(k+3)e_k = w_k + Σ_{i≥1} M_i e_{k−i}`;
//! * `r∂ᵣ(r⁻¹n) = R_{LabL̲} − (l_b^c + r⁻¹δ_b^c)n_ac + ∇_aη_b − η_aη_b`;
//! * Raychaudhuri for `tr l` and the `tr n` equation in the decomposed form.

use serde::Serialize;

use crate::curvature::{Mode, WeylSphereFields};
use crate::error::{QleError, Result};
use crate::expansion::NullExpansion;
use crate::linalg::{self, T3};
use crate::scalar::Real;
use crate::series::{invert_tensor_series, FieldSeries};
use crate::sphere::{CovectorField, Field, Rank3Field, ScalarField, SphereGrid, TensorField};

/// Curvature sources along the cone, each listed from `k = 0` up to the last
/// order the jet determines.
#[derive(Debug, Clone)]
struct Sources<T> {
    /// `R_{LabL} = Σ R_k r^k`.
    r_labl: Vec<TensorField<T>>,
    /// `R_{LaLL̲} = Σ w_k r^{k+1}`.
    r_lallb: Vec<CovectorField<T>>,
    /// `Ric(L,L̲) + R_{LL̲LL̲} = Σ u_k r^k`.
    trace_source: Vec<ScalarField<T>>,
    /// `Ric(L,L) = Σ v_k r^k`.
    ric_ll: Vec<ScalarField<T>>,
    /// `R_{LabL̲} = Σ m_k r^k`.
    r_lablb: Vec<TensorField<T>>,
}

impl<T: Real> Sources<T> {
    fn new(fields: &WeylSphereFields<T>, grid: &SphereGrid<T>) -> Self {
        let nodes = grid.len();
        let c = &fields.curvature;
        let zt = TensorField::zeros(nodes);
        let zs = ScalarField::zeros(nodes);
        let mut out = Self {
            r_labl: vec![zt.clone(), zt.clone(), c.r_labl.clone()],
            r_lallb: vec![c.r_lallb.clone()],
            trace_source: vec![&c.ric_llb + &c.r_llbllb],
            ric_ll: vec![c.ric_ll.clone()],
            r_lablb: vec![zt.clone(), zt, c.r_lablb.clone()],
        };
        if fields.mode == Mode::Vacuum {
            if let Some(d) = fields.first.as_ref() {
                out.r_labl.push(d.alpha.scaled(-T::one()));
                out.r_lallb.push(d.beta.clone());
                out.trace_source.push(d.rho.clone());
                out.ric_ll.push(zs.clone());
                if let Some(d2) = fields.second.as_ref() {
                    out.r_lallb.push(d2.beta.scaled(T::lit(0.5)));
                    let mut u2 = d2.rho.scaled(T::lit(0.5));
                    u2.axpy(-T::one() / T::lit(3.0), &fields.beta_sq());
                    out.trace_source.push(u2);
                    out.ric_ll.push(zs);
                }
            }
        }
        out
    }

    /// Highest power `K` of `r` in `tr l`, `tr n` the sources determine.
    fn max_order(&self) -> usize {
        (self.r_labl.len() - 1)
            .min(self.r_lallb.len())
            .min(self.trace_source.len())
            .min(self.ric_ll.len() + 1)
            .min(self.r_lablb.len())
    }
}

/// Everything the recursion produces.
#[derive(Debug, Clone)]
pub struct TransportSolution<T> {
    pub order: usize,
    /// `σ = r² Σ s_k r^k`.
    pub sigma: FieldSeries<TensorField<T>>,
    /// `σ⁻¹ = r⁻² Σ q_k r^k`.
    pub inverse_metric: FieldSeries<TensorField<T>>,
    /// `l = r Σ λ_k r^k`.
    pub l: FieldSeries<TensorField<T>>,
    /// `n = r Σ ν_k r^k`.
    pub n: FieldSeries<TensorField<T>>,
    /// `γ − γ̃` stored as `[c][a][b]`.
    pub christoffel: FieldSeries<Rank3Field<T>>,
    pub null: NullExpansion<T>,
}

/// `Γ^c_ab = ½ q^{cd}(∇̃_a s_db + ∇̃_b s_ad − ∇̃_d s_ab)`, the difference between
/// the Christoffel symbols of `σ(r)` and those of `σ̃`.
pub fn christoffel_series<T: Real>(
    sigma: &FieldSeries<TensorField<T>>,
    inverse: &FieldSeries<TensorField<T>>,
    grid: &SphereGrid<T>,
) -> FieldSeries<Rank3Field<T>> {
    let half = T::lit(0.5);
    let lowered: Vec<Rank3Field<T>> = sigma
        .coeffs
        .iter()
        .map(|s| {
            let d = grid.tensor_derivative(s);
            Rank3Field(
                d.0.iter()
                    .map(|dd| {
                        let mut g: T3<T> = linalg::zero333();
                        for (di, gd) in g.iter_mut().enumerate() {
                            for (a, ga) in gd.iter_mut().enumerate() {
                                for (b, v) in ga.iter_mut().enumerate() {
                                    *v = half * (dd[a][di][b] + dd[b][a][di] - dd[di][a][b]);
                                }
                            }
                        }
                        g
                    })
                    .collect(),
            )
        })
        .collect();
    let lowered = FieldSeries::new(0, lowered);
    let mut out = inverse.product(&lowered, grid.len(), |q: &TensorField<T>, g: &Rank3Field<T>| raise_first(q, g));
    out.leading = 0;
    out
}

fn raise_first<T: Real>(q: &TensorField<T>, g: &Rank3Field<T>) -> Rank3Field<T> {
    Rank3Field(
        q.0.iter()
            .zip(&g.0)
            .map(|(qm, gm)| {
                let mut out: T3<T> = linalg::zero333();
                for (c, oc) in out.iter_mut().enumerate() {
                    for (d, gd) in gm.iter().enumerate() {
                        let w = qm[c][d];
                        for a in 0..3 {
                            for b in 0..3 {
                                oc[a][b] += w * gd[a][b];
                            }
                        }
                    }
                }
                out
            })
            .collect(),
    )
}

/// `σ⁻¹` as a series from `σ`.
pub fn inverse_metric_series<T: Real>(
    sigma: &FieldSeries<TensorField<T>>,
    grid: &SphereGrid<T>,
) -> Result<FieldSeries<TensorField<T>>> {
    invert_tensor_series(sigma, grid.normals())
}

/// `Γ^c_ab v_c` as a tensor `[a][b]`.
fn contract_christoffel<T: Real>(g: &Rank3Field<T>, v: &CovectorField<T>) -> TensorField<T> {
    TensorField(
        g.0.iter()
            .zip(&v.0)
            .map(|(gm, vv)| {
                let mut out = linalg::zero33();
                for (c, gc) in gm.iter().enumerate() {
                    out = linalg::madd(&out, &linalg::mscale(vv[c], gc));
                }
                out
            })
            .collect(),
    )
}

fn outer_field<T: Real>(a: &CovectorField<T>, b: &CovectorField<T>) -> TensorField<T> {
    TensorField(a.0.iter().zip(&b.0).map(|(x, y)| linalg::outer(x, y)).collect())
}

fn triple<T: Real>(a: &TensorField<T>, b: &TensorField<T>, c: &TensorField<T>) -> TensorField<T> {
    a.matmul(b).matmul(c)
}

/// Default: the highest order the jet supports.
pub fn available_order<T: Real>(fields: &WeylSphereFields<T>, grid: &SphereGrid<T>) -> usize {
    Sources::new(fields, grid).max_order()
}

/// Solves the transport system through `r^order` in `tr l` and `tr n`,
/// `r^{order+1}` in `η` and `r^{order−1}` in `div_σ η`.
pub fn run_transport<T: Real>(
    fields: &WeylSphereFields<T>,
    grid: &SphereGrid<T>,
    order: usize,
) -> Result<TransportSolution<T>> {
    let src = Sources::new(fields, grid);
    let avail = src.max_order();
    if order > avail {
        return Err(QleError::MissingJetOrder(format!(
            "transport to order {order} needs curvature derivatives the jet does not carry (available order {avail})"
        )));
    }
    if order == 0 {
        return Err(QleError::Unsupported("transport order must be at least 1".into()));
    }
    let nodes = grid.len();
    let p = grid.metric();
    let big_k = order;

    // Metric, inverse metric and second fundamental form l.
    let mut lam: Vec<TensorField<T>> = vec![-&p];
    let mut s: Vec<TensorField<T>> = vec![p.clone()];
    let mut q: Vec<TensorField<T>> = vec![p.clone()];
    for k in 1..=big_k {
        let mut q_tent = TensorField::zeros(nodes);
        for i in 1..k {
            q_tent.axpy(T::one(), &s[i].matmul(&q[k - i]));
        }
        let q_tent = -&q[0].matmul(&q_tent);
        let mut rest = TensorField::zeros(nodes);
        for i in 0..k {
            for j in 0..=k - i {
                let m = k - i - j;
                if m >= k {
                    continue;
                }
                let qj = if j == k { &q_tent } else { &q[j] };
                rest.axpy(T::one(), &triple(&lam[i], qj, &lam[m]));
            }
        }
        let ck = T::count(k * (k + 1)) / T::count(k + 2);
        let lk = (&src.r_labl[k] - &rest).scaled(T::one() / ck);
        let sk = lk.scaled(-T::lit(2.0) / T::count(k + 2));
        let qk = &q_tent - &q[0].matmul(&sk.matmul(&q[0]));
        lam.push(lk);
        s.push(sk);
        q.push(qk);
    }
    // A residual check of the l-equation guards against a wrong root.
    let sigma = FieldSeries::new(2, s.clone());
    let inverse = FieldSeries::new(-2, q.clone());
    let l_series = FieldSeries::new(1, lam.clone());
    let christoffel = christoffel_series(&sigma, &inverse, grid);
    let gam = &christoffel.coeffs;

    // Mixed l_a^b = (Λq)_ab.
    let mixed: Vec<TensorField<T>> = (0..=big_k)
        .map(|k| {
            let mut acc = TensorField::zeros(nodes);
            for i in 0..=k {
                acc.axpy(T::one(), &lam[i].matmul(&q[k - i]));
            }
            acc
        })
        .collect();

    // η.
    let mut e: Vec<CovectorField<T>> = Vec::new();
    for k in 0..big_k {
        let mut acc = src.r_lallb[k].clone();
        for i in 1..=k {
            acc.axpy(T::one(), &mixed[i].apply(&e[k - i]));
        }
        e.push(acc.scaled(T::one() / T::count(k + 3)));
    }

    // ∇_a η_b = r² Σ (∇̃e − Γe)_k r^k and div_σ η.
    let grad_e: Vec<TensorField<T>> = e.iter().map(|ek| grid.covector_derivative(ek)).collect();
    let cov_e: Vec<TensorField<T>> = (0..big_k)
        .map(|k| {
            let mut acc = grad_e[k].clone();
            for i in 0..=k {
                acc.axpy(-T::one(), &contract_christoffel(&gam[i], &e[k - i]));
            }
            acc
        })
        .collect();
    let div_eta: Vec<ScalarField<T>> = (0..big_k)
        .map(|k| {
            let mut acc = ScalarField::zeros(nodes);
            for i in 0..=k {
                acc.axpy(T::one(), &q[i].contract(&cov_e[k - i].transpose()));
            }
            acc
        })
        .collect();

    // tr l from the Raychaudhuri equation.
    let hat: Vec<TensorField<T>> = mixed
        .iter()
        .map(|m| {
            let tr = m.trace();
            let mut h = m.clone();
            h.axpy(-T::lit(0.5), &p.mul_pointwise(&tr));
            h
        })
        .collect();
    let mut tau: Vec<ScalarField<T>> = vec![grid.constant(-T::lit(2.0))];
    for k in 1..=big_k + 1 {
        let mut acc = ScalarField::zeros(nodes);
        for i in 1..k {
            acc.axpy(T::lit(0.5), &tau[i].mul_pointwise(&tau[k - i]));
        }
        for i in 0..=k {
            if i <= big_k && k - i <= big_k {
                acc.axpy(T::one(), &hat[i].contract(&hat[k - i].transpose()));
            }
        }
        if k >= 2 {
            acc.axpy(T::one(), &src.ric_ll[k - 2]);
        }
        tau.push(acc.scaled(T::one() / T::count(k + 1)));
    }

    // n.
    let mut nu: Vec<TensorField<T>> = vec![p.scaled(T::lit(0.5))];
    for k in 1..big_k {
        let mut acc = src.r_lablb[k].clone();
        if k >= 2 {
            acc.axpy(T::one(), &cov_e[k - 2]);
        }
        if k >= 4 {
            for i in 0..=k - 4 {
                acc.axpy(-T::one(), &outer_field(&e[i], &e[k - 4 - i]));
            }
        }
        for i in 1..=k {
            let mut ql = TensorField::zeros(nodes);
            for j in 0..=i {
                ql.axpy(T::one(), &q[j].matmul(&lam[i - j]));
            }
            acc.axpy(-T::one(), &nu[k - i].matmul(&ql));
        }
        nu.push(acc.scaled(T::one() / T::count(k)));
    }

    // tr n.
    let lam_plus_s: Vec<TensorField<T>> = (0..=big_k).map(|k| &lam[k] + &s[k]).collect();
    let nu_minus: Vec<TensorField<T>> = (0..big_k).map(|k| &nu[k] - &s[k].scaled(T::lit(0.5))).collect();
    let x_coeff = |k: usize| -> ScalarField<T> {
        let mut acc = ScalarField::zeros(nodes);
        for a in 0..=k {
            for b in 0..=k - a {
                for c in 0..=k - a - b {
                    let d = k - a - b - c;
                    if a > big_k || b > big_k || c > big_k || d >= big_k {
                        continue;
                    }
                    let m = q[a].matmul(&lam_plus_s[b]).matmul(&q[c]).matmul(&nu_minus[d]);
                    acc.axpy(T::one(), &m.trace());
                }
            }
        }
        acc
    };
    let mut trn: Vec<ScalarField<T>> = vec![grid.constant(T::one())];
    for k in 1..=big_k + 1 {
        if k < 2 {
            trn.push(ScalarField::zeros(nodes));
            continue;
        }
        let j = k - 2;
        let mut rhs = tau[k].scaled(T::lit(0.5));
        rhs.axpy(T::one(), &x_coeff(k));
        if j >= 2 {
            for i in 0..=j - 2 {
                for m in 0..=j - 2 - i {
                    let qq = &q[j - 2 - i - m];
                    rhs.axpy(-T::one(), &e[i].dot(&qq.apply(&e[m])));
                }
            }
        }
        rhs.axpy(T::one(), &src.trace_source[j]);
        rhs.axpy(T::one(), &div_eta[j]);
        trn.push(rhs.scaled(T::one() / T::count(k)));
    }

    Ok(TransportSolution {
        order,
        sigma,
        inverse_metric: inverse,
        l: l_series,
        n: FieldSeries::new(1, nu),
        christoffel,
        null: NullExpansion { trl: tau, trn, eta: e, div_eta },
    })
}

/// One coefficient compared between the closed forms and the oracle.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub name: String,
    pub anchor: String,
    pub max_abs_difference: f64,
    pub scale: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Relative tolerance of the oracle comparison.
pub const ORACLE_TOL: f64 = 1e-8;

fn compare_fields<T: Real, F: Field<T>>(name: String, anchor: String, closed: &F, oracle: &F, tol: f64) -> CoefficientRow
where
    for<'a> &'a F: std::ops::Sub<&'a F, Output = F>,
{
    let diff = (closed - oracle).max_abs().to_f64_lossy();
    let scale = closed.max_abs().to_f64_lossy().max(1.0);
    let relative = diff / scale;
    CoefficientRow {
        name,
        anchor,
        max_abs_difference: diff,
        scale,
        relative,
        tolerance: tol,
        pass: relative < tol,
    }
}

fn power_label(p: i32) -> String {
    match p {
        0 => "r^0".into(),
        1 => "r".into(),
        _ => format!("r^{p}"),
    }
}

/// Coefficient-by-coefficient comparison of closed forms and oracle through
/// the orders both carry.
pub fn compare(closed: &NullExpansion<f64>, oracle: &NullExpansion<f64>, tol: f64) -> Vec<CoefficientRow> {
    compare_generic(closed, oracle, tol)
}

pub fn compare_generic<T: Real>(closed: &NullExpansion<T>, oracle: &NullExpansion<T>, tol: f64) -> Vec<CoefficientRow> {
    let mut rows = Vec::new();
    for (k, (c, o)) in closed.trl.iter().zip(&oracle.trl).enumerate() {
        let pw = power_label(k as i32 - 1);
        rows.push(compare_fields(format!("trl-{k}"), format!("tr l expansion: {pw} coefficient"), c, o, tol));
    }
    for (k, (c, o)) in closed.trn.iter().zip(&oracle.trn).enumerate() {
        let pw = power_label(k as i32 - 1);
        rows.push(compare_fields(format!("trn-{k}"), format!("tr n expansion: {pw} coefficient"), c, o, tol));
    }
    for (k, (c, o)) in closed.eta.iter().zip(&oracle.eta).enumerate() {
        let pw = power_label(k as i32 + 2);
        rows.push(compare_fields(format!("eta-{}", k + 2), format!("torsion eta: {pw} coefficient"), c, o, tol));
    }
    for (k, (c, o)) in closed.div_eta.iter().zip(&oracle.div_eta).enumerate() {
        let pw = power_label(k as i32);
        rows.push(compare_fields(format!("div-eta-{k}"), format!("divergence of eta: {pw} coefficient"), c, o, tol));
    }
    rows
}
