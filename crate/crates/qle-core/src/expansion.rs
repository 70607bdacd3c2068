//! Closed-form `r`-expansions of the data of the small spheres `Σ_r`:
//! induced metric, null expansions, torsion `η`, mean curvature, Gauss
//! curvature, the traceless second fundamental form and `α_H`.
//!
//! Series conventions used throughout:
//! `tr l = r⁻¹ Σ τ_k r^k`, `tr n = r⁻¹ Σ t_k r^k`, `η = r² Σ e_k r^k`,
//! `div_σ η = Σ d_k r^k`, `|H| = 2/r + h⁽¹⁾r + h⁽²⁾r² + h⁽³⁾r³`.

use serde::Serialize;

use crate::curvature::{ConstraintRow, Mode, WeylSphereFields};
use crate::error::{QleError, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::series::{FieldSeries, ScalarSeries};
use crate::sphere::{CovectorField, Field, ScalarField, SphereGrid, TensorField};

/// Series coefficients shared by the closed forms and the transport oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct NullExpansion<T> {
    /// `τ_k`, coefficient of `r^{k−1}` in `σ^{ab}l_ab`.
    pub trl: Vec<ScalarField<T>>,
    /// `t_k`, coefficient of `r^{k−1}` in `σ^{ab}n_ab`.
    pub trn: Vec<ScalarField<T>>,
    /// `e_k`, coefficient of `r^{k+2}` in `η`.
    pub eta: Vec<CovectorField<T>>,
    /// `d_k`, coefficient of `r^k` in `div_σ η`.
    pub div_eta: Vec<ScalarField<T>>,
}

impl<T: Real> NullExpansion<T> {
    pub fn trl_series(&self) -> ScalarSeries<T> {
        FieldSeries::new(-1, self.trl.clone())
    }
    pub fn trn_series(&self) -> ScalarSeries<T> {
        FieldSeries::new(-1, self.trn.clone())
    }
}

/// Global sign relating `α_H` to `η + ½∇log|tr l / tr n|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConnectionSign {
    Plus,
    Minus,
}

impl ConnectionSign {
    pub fn value<T: Real>(self) -> T {
        match self {
            Self::Plus => T::one(),
            Self::Minus => -T::one(),
        }
    }
}

/// The closed-form expansion coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTable<T> {
    pub mode: Mode,
    pub kappa: T,
    /// Coefficient of `r⁴` in `σ_ab`: `−⅓R̄_{LabL}`.
    pub sigma4: TensorField<T>,
    /// Coefficient of `r⁵` in `σ_ab` (vacuum): `⅙Dα`.
    pub sigma5: Option<TensorField<T>>,
    pub null: NullExpansion<T>,
    /// `h⁽¹⁾`, `h⁽²⁾` of `|H|`.
    pub h1: ScalarField<T>,
    pub h2: Option<ScalarField<T>>,
    /// `h₀⁽¹⁾ = k⁽¹⁾ + κ²` and `h₀⁽²⁾ = k⁽²⁾` of the reference mean curvature.
    pub h01: ScalarField<T>,
    pub h02: Option<ScalarField<T>>,
    /// Coefficients of `2√K = 2/r + k⁽¹⁾r + k⁽²⁾r² + ...`.
    pub k1: ScalarField<T>,
    pub k2: Option<ScalarField<T>>,
    /// `Å⁽³⁾` (vacuum).
    pub a_ring3: Option<TensorField<T>>,
    /// `α_H⁽²⁾, α_H⁽³⁾, α_H⁽⁴⁾` as far as the jet allows.
    pub alpha_h: Vec<CovectorField<T>>,
    pub connection_sign: ConnectionSign,
    /// Residual of the sign calibration against the divergence formula.
    pub calibration_residual: T,
}

impl<T: Real> ExpansionTable<T> {
    /// `f⁽¹⁾ = (h₀⁽¹⁾ − h⁽¹⁾)/A`.
    pub fn f1(&self, a: T) -> ScalarField<T> {
        (&self.h01 - &self.h1).map(|v| v / a)
    }

    pub fn eta(&self, k: usize) -> Option<&CovectorField<T>> {
        self.null.eta.get(k)
    }
}

/// `½(∇̃^a∇̃^b h_ab − Δ̃ tr h − tr h)`: first variation of the Gauss curvature
/// of the unit sphere under `σ̃ → σ̃ + εh`.
pub fn linearized_gauss_curvature<T: Real>(grid: &SphereGrid<T>, h: &TensorField<T>) -> ScalarField<T> {
    let ddh = grid.divergence(&grid.tensor_divergence(h));
    let tr = h.trace();
    let lap = grid.laplacian(&tr);
    (&(&ddh - &lap) - &tr).scaled(T::lit(0.5))
}

fn alpha_dot_beta<T: Real>(alpha: &TensorField<T>, beta: &CovectorField<T>) -> CovectorField<T> {
    alpha.apply(beta)
}

/// The closed-form null expansions of the data Lemma (vacuum) or the leading
/// non-vacuum expansions (matter).
pub fn closed_null_expansion<T: Real>(fields: &WeylSphereFields<T>, grid: &SphereGrid<T>) -> Result<NullExpansion<T>> {
    let nodes = grid.len();
    let k2 = fields.kappa * fields.kappa;
    let zero = ScalarField::zeros(nodes);
    let c = &fields.curvature;
    match fields.mode {
        Mode::Vacuum => {
            let d = fields.d()?;
            let d2 = fields.d2()?;
            let b = &fields.base;
            let a2 = fields.alpha_sq();
            let b2 = fields.beta_sq();
            let third = T::one() / T::lit(3.0);
            let trl = vec![
                grid.constant(-T::lit(2.0)),
                zero.clone(),
                zero.clone(),
                zero.clone(),
                a2.scaled(T::one() / T::lit(45.0)),
            ];
            let mut t4 = d2.rho.scaled(T::lit(0.25));
            t4.axpy(T::one() / T::lit(30.0), &a2);
            t4.axpy(-T::lit(11.0) / T::lit(45.0), &b2);
            let trn = vec![
                grid.constant(T::one()),
                zero.clone(),
                b.rho.map(|r| r + k2),
                d.rho.scaled(T::lit(2.0) * third),
                t4,
            ];
            let mut e2 = d2.beta.scaled(T::lit(0.1));
            e2.axpy(-T::one() / T::lit(45.0), &alpha_dot_beta(&b.alpha, &b.beta));
            let eta = vec![b.beta.scaled(third), d.beta.scaled(T::lit(0.25)), e2];
            let mut dv2 = d2.rho.scaled(T::lit(0.5));
            dv2.axpy(T::one() / T::lit(15.0), &a2);
            dv2.axpy(-T::lit(8.0) / T::lit(15.0), &b2);
            let div_eta = vec![b.rho.clone(), d.rho.clone(), dv2];
            Ok(NullExpansion { trl, trn, eta, div_eta })
        }
        Mode::Matter => {
            let third = T::one() / T::lit(3.0);
            let trl = vec![grid.constant(-T::lit(2.0)), zero.clone(), c.ric_ll.scaled(third)];
            let mut t2 = c.r_llbllb.clone();
            t2.axpy(T::lit(2.0) * third, &c.ric_llb);
            t2.axpy(T::one() / T::lit(6.0), &c.ric_ll);
            let trn = vec![grid.constant(T::one()), zero, t2];
            let eta = vec![c.r_lallb.scaled(third)];
            let mut d0 = c.r_llbllb.clone();
            d0.axpy(third, &c.ric_llb);
            d0.axpy(T::one() / T::lit(6.0), &c.ric_ll);
            Ok(NullExpansion { trl, trn, eta, div_eta: vec![d0] })
        }
    }
}

/// `|H| = √(−2 tr l · tr n)` as a series `Σ S_k r^{k−1}`.
pub fn mean_curvature_series<T: Real>(null: &NullExpansion<T>) -> Result<ScalarSeries<T>> {
    null.trl_series().times(&null.trn_series()).scaled(-T::lit(2.0)).sqrt()
}

/// `log(−tr l / tr n)` as a series starting at `r⁰`.
pub fn log_ratio_series<T: Real>(null: &NullExpansion<T>) -> Result<ScalarSeries<T>> {
    null.trl_series().scaled(-T::one()).divided_by(&null.trn_series())?.log()
}

/// `α_H⁽ᵐ⁾ = s(e_{m−2} + ½∇̃ℓ_m)` with `ℓ_m` the `r^m` coefficient of
/// `log(−tr l / tr n)`.
fn connection_candidates<T: Real>(
    null: &NullExpansion<T>,
    grid: &SphereGrid<T>,
) -> Result<Vec<CovectorField<T>>> {
    let log = log_ratio_series(null)?;
    let mut out = Vec::new();
    for (k, e) in null.eta.iter().enumerate() {
        let Some(lm) = log.coeffs.get(k + 2) else { break };
        let mut a = e.clone();
        a.axpy(T::lit(0.5), &grid.gradient(lm));
        out.push(a);
    }
    Ok(out)
}

/// `Δ̃[½R̄_{LL̲LL̲} + ⅙Ric(L,L) + ⅓Ric(L,L̲)] − R̄_{LL̲LL̲} − ⅓Ric(L,L̲) − ⅙Ric(L,L)`.
pub fn divergence_alpha_h_leading<T: Real>(fields: &WeylSphereFields<T>, grid: &SphereGrid<T>) -> ScalarField<T> {
    let c = &fields.curvature;
    let third = T::one() / T::lit(3.0);
    let sixth = T::one() / T::lit(6.0);
    let mut inner = c.r_llbllb.scaled(T::lit(0.5));
    inner.axpy(sixth, &c.ric_ll);
    inner.axpy(third, &c.ric_llb);
    let mut out = grid.laplacian(&inner);
    out.axpy(-T::one(), &c.r_llbllb);
    out.axpy(-third, &c.ric_llb);
    out.axpy(-sixth, &c.ric_ll);
    out
}

/// Tolerance of the sign calibration.
pub const CALIBRATION_TOL: f64 = 1e-9;

/// `α_H` series from the null data, with the global sign fixed by matching
/// the leading divergence formula.
pub fn connection_one_form<T: Real>(
    null: &NullExpansion<T>,
    fields: &WeylSphereFields<T>,
    grid: &SphereGrid<T>,
) -> Result<(Vec<CovectorField<T>>, ConnectionSign, T)> {
    let raw = connection_candidates(null, grid)?;
    let target = divergence_alpha_h_leading(fields, grid);
    let div = grid.divergence(&raw[0]);
    let scale = T::one().max(target.max_abs());
    let plus = (&div - &target).max_abs() / scale;
    let minus = (&(-&div) - &target).max_abs() / scale;
    let tol = T::tolerance(CALIBRATION_TOL);
    let (sign, res) = if minus <= plus { (ConnectionSign::Minus, minus) } else { (ConnectionSign::Plus, plus) };
    if res > tol {
        return Err(QleError::SignCalibrationFailure {
            plus: plus.to_f64_lossy(),
            minus: minus.to_f64_lossy(),
        });
    }
    let s = sign.value::<T>();
    Ok((raw.into_iter().map(|a| a.scaled(s)).collect(), sign, res))
}

/// `Å⁽³⁾ = (X̃ⁱ_aX̃ʲ_b + X̃ⁱ_bX̃ʲ_a)(−¼W₀δ_ij − ½W̄_{0i0j})`, i.e.
/// `−½W₀P − PEP`, with the tangential electric part written in null data as
/// `PEP = ¼α + α̲ − ½ρP`.
pub fn traceless_second_ff<T: Real>(fields: &WeylSphereFields<T>, grid: &SphereGrid<T>) -> TensorField<T> {
    let b = &fields.base;
    let p = grid.metric();
    let mut pep = b.alpha.scaled(T::lit(0.25));
    pep.axpy(T::one(), &b.alpha_bar);
    pep.axpy(-T::lit(0.5), &p.mul_pointwise(&b.rho));
    let mut out = p.mul_pointwise(&fields.derived.w0).scaled(-T::lit(0.5));
    out.axpy(-T::one(), &pep);
    out
}

/// Builds the full table of closed-form coefficients.
pub fn physical_expansion<T: Real>(fields: &WeylSphereFields<T>, grid: &SphereGrid<T>) -> Result<ExpansionTable<T>> {
    let null = closed_null_expansion(fields, grid)?;
    let k2 = fields.kappa * fields.kappa;
    let sigma4 = fields.curvature.r_labl.scaled(-T::one() / T::lit(3.0));
    let sigma5 = match fields.mode {
        Mode::Vacuum => Some(fields.d()?.alpha.scaled(T::one() / T::lit(6.0))),
        Mode::Matter => None,
    };
    let h = mean_curvature_series(&null)?;
    let h1 = h.coeffs[2].clone();
    let h2 = (fields.mode == Mode::Vacuum).then(|| h.coeffs[3].clone());
    let k1 = linearized_gauss_curvature(grid, &sigma4);
    let k2c = sigma5.as_ref().map(|s| linearized_gauss_curvature(grid, s));
    let h01 = k1.map(|v| v + k2);
    let a_ring3 = (fields.mode == Mode::Vacuum).then(|| traceless_second_ff(fields, grid));
    let (alpha_h, connection_sign, calibration_residual) = connection_one_form(&null, fields, grid)?;
    Ok(ExpansionTable {
        mode: fields.mode,
        kappa: fields.kappa,
        sigma4,
        sigma5,
        h1,
        h2,
        h02: k2c.clone(),
        h01,
        k1,
        k2: k2c,
        a_ring3,
        alpha_h,
        connection_sign,
        calibration_residual,
        null,
    })
}

/// Integral bookkeeping around the Gauss curvature (vacuum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussBookkeeping {
    /// `∫k⁽³⁾` from Gauss–Bonnet: `(1/180)∫|α|² − ¼∫(k⁽¹⁾)²`.
    pub int_k3: f64,
    /// `∫h⁽³⁾` with `h⁽³⁾ = (tr n)⁽³⁾ − ½(tr l)⁽³⁾ − ¼(h⁽¹⁾)²`.
    pub int_h3: f64,
    /// `∫(k⁽³⁾ − ¼κ⁴ − h⁽³⁾)` assembled from the two lines above.
    pub assembled: f64,
    /// `−¾∫W₀² − (1/60)∫|α|² + (11/45)∫|β|²`.
    pub closed_form: f64,
    /// `∫W₀²`, `∫|α|²`, `∫|β|²`.
    pub int_w0_sq: f64,
    pub int_alpha_sq: f64,
    pub int_beta_sq: f64,
}

pub fn gauss_curvature<T: Real>(
    fields: &WeylSphereFields<T>,
    table: &ExpansionTable<T>,
    grid: &SphereGrid<T>,
) -> Result<GaussBookkeeping> {
    if fields.mode != Mode::Vacuum {
        return Err(QleError::ModeMismatch("Gauss curvature bookkeeping requires a vacuum jet".into()));
    }
    let ia = grid.integrate(&fields.alpha_sq());
    let ib = grid.integrate(&fields.beta_sq());
    let iw = grid.integrate(&fields.w0().mul_pointwise(fields.w0()));
    let int_k3 = ia / T::lit(180.0) - T::lit(0.25) * grid.integrate(&table.k1.mul_pointwise(&table.k1));
    let mut h3 = table.null.trn[4].clone();
    h3.axpy(-T::lit(0.5), &table.null.trl[4]);
    h3.axpy(-T::lit(0.25), &table.h1.mul_pointwise(&table.h1));
    let int_h3 = grid.integrate(&h3);
    let quarter = T::PI() * table.kappa.powi(4);
    let assembled = int_k3 - quarter - int_h3;
    let closed = -T::lit(0.75) * iw - ia / T::lit(60.0) + T::lit(11.0) / T::lit(45.0) * ib;
    Ok(GaussBookkeeping {
        int_k3: int_k3.to_f64_lossy(),
        int_h3: int_h3.to_f64_lossy(),
        assembled: assembled.to_f64_lossy(),
        closed_form: closed.to_f64_lossy(),
        int_w0_sq: iw.to_f64_lossy(),
        int_alpha_sq: ia.to_f64_lossy(),
        int_beta_sq: ib.to_f64_lossy(),
    })
}

/// `ε_{pqi}X̃^q∇̃X̃^i`: the rotation Killing fields of the unit sphere.
pub fn rotation_field<T: Real>(grid: &SphereGrid<T>, p: usize) -> CovectorField<T> {
    let mut e = [T::zero(); 3];
    e[p] = T::one();
    grid.covector(|n| linalg::cross(&e, n))
}

/// `∫ α(ε_{pqi}X̃^q∇̃X̃^i)` for `p = 1,2,3`.
pub fn rotation_moments<T: Real>(grid: &SphereGrid<T>, a: &CovectorField<T>) -> [T; 3] {
    std::array::from_fn(|p| grid.integrate(&a.dot(&rotation_field(grid, p))))
}

/// `∫ α(∇̃X̃^i)` for `i = 1,2,3`.
pub fn translation_moments<T: Real>(grid: &SphereGrid<T>, a: &CovectorField<T>) -> [T; 3] {
    std::array::from_fn(|i| grid.integrate(&a.dot(&grid.gradient(&grid.coordinate(i)))))
}

/// `∫ f X̃^i` for `i = 1,2,3`.
pub fn dipole_moments<T: Real>(grid: &SphereGrid<T>, f: &ScalarField<T>) -> [T; 3] {
    std::array::from_fn(|i| grid.integrate(&f.mul_pointwise(&grid.coordinate(i))))
}

/// Tolerance of the integral lemmas.
pub const LEMMA_TOL: f64 = 1e-9;

/// The integral identities satisfied by the vacuum expansion, one row each.
pub fn integral_lemmas<T: Real>(
    fields: &WeylSphereFields<T>,
    table: &ExpansionTable<T>,
    grid: &SphereGrid<T>,
    tol: f64,
) -> Result<Vec<ConstraintRow>> {
    let bk = gauss_curvature(fields, table, grid)?;
    let a = table
        .a_ring3
        .as_ref()
        .ok_or_else(|| QleError::ModeMismatch("integral lemmas need a vacuum jet".into()))?;
    let mut rows = Vec::new();
    let mut push = |name: &str, anchor: &str, residual: f64, scale: f64| {
        let residual = residual / scale.max(1.0);
        rows.push(ConstraintRow {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance: tol,
            pass: residual <= tol,
        });
    };
    let a_sq = grid.integrate(&a.contract(a)).to_f64_lossy();
    push(
        "traceless-ff-square",
        "int |A_ring^(3)|^2 = 3 int W_0^2",
        (a_sq - 3.0 * bk.int_w0_sq).abs(),
        a_sq.abs(),
    );
    push(
        "gauss-mean-curvature",
        "int (k^(3) - 1/4 - h^(3)) = -3/4 int W_0^2 - 1/60 int |alpha|^2 + 11/45 int |beta|^2",
        (bk.assembled - bk.closed_form).abs(),
        bk.closed_form.abs(),
    );
    let sup = |v: [T; 3]| v.into_iter().map(|x| x.abs().to_f64_lossy()).fold(0.0, f64::max);
    push("w0-dipole", "int W_0 X^i = 0", sup(dipole_moments(grid, fields.w0())), 1.0);
    let mut rot = 0.0f64;
    for alpha in table.alpha_h.iter().take(2) {
        rot = rot.max(sup(rotation_moments(grid, alpha)));
    }
    push("connection-rotation", "int alpha_H(eps_pqi X^q grad X^i) = 0", rot, 1.0);
    push(
        "connection-translation",
        "int alpha_H^(2)(grad X^i) = 0",
        sup(translation_moments(grid, &table.alpha_h[0])),
        1.0,
    );
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{decompose, dust, pure_electric, Depth, JetGenerator};

    fn grid() -> SphereGrid<f64> {
        SphereGrid::new(15).unwrap()
    }

    #[test]
    fn integral_lemma_rows_pass_on_random_jets() {
        let g = grid();
        let mut gen = JetGenerator::new(77);
        for _ in 0..2 {
            let f = decompose(&gen.vacuum(1.0, Depth::Second).unwrap(), &g).unwrap();
            let t = physical_expansion(&f, &g).unwrap();
            let rows = integral_lemmas(&f, &t, &g, LEMMA_TOL).unwrap();
            assert_eq!(rows.len(), 5);
            assert!(rows.iter().all(|r| r.pass), "{rows:?}");
        }
        let f = decompose(&dust(1.0, 1.0), &g).unwrap();
        let t = physical_expansion(&f, &g).unwrap();
        assert!(matches!(integral_lemmas(&f, &t, &g, LEMMA_TOL), Err(QleError::ModeMismatch(_))));
    }

    #[test]
    fn flat_cone_limit() {
        let g = grid();
        let jet = crate::curvature::CurvatureJet::<f64>::zero(1.0);
        let mut jet = jet;
        jet.d_weyl = Some(vec![crate::curvature::Tensor4::zero(); 4]);
        jet.d2_weyl = Some(vec![crate::curvature::Tensor4::zero(); 16]);
        let f = decompose(&jet, &g).unwrap();
        let t = physical_expansion(&f, &g).unwrap();
        assert!((t.null.trl[0].0[0] + 2.0).abs() < 1e-15);
        for c in &t.null.trl[1..] {
            assert!(c.max_abs() < 1e-15);
        }
        assert!((t.null.trn[2].0[7] - 1.0).abs() < 1e-15);
        assert!(t.a_ring3.as_ref().unwrap().max_abs() < 1e-15);
        for a in &t.alpha_h {
            assert!(a.max_abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_table_invariants() {
        let g = grid();
        let mut gen = JetGenerator::new(11);
        for _ in 0..3 {
            let jet = gen.vacuum(1.0, Depth::Second).unwrap();
            let f = decompose(&jet, &g).unwrap();
            let t = physical_expansion(&f, &g).unwrap();
            let rho = &f.base.rho;
            assert!((&(&t.h01 - &t.h1) - rho).max_abs() < 1e-10);
            let dr = &f.d().unwrap().rho;
            assert!((&(t.h02.as_ref().unwrap() - t.h2.as_ref().unwrap()) - dr).max_abs() < 1e-10);
            assert!((&t.k1 - &rho.scaled(2.0)).max_abs() < 1e-10);
            let a = t.a_ring3.as_ref().unwrap();
            assert!(a.trace().max_abs() < 1e-12);
            assert!(a.asymmetry() < 1e-12);
            let lhs = g.integrate(&a.contract(a));
            let rhs = 3.0 * g.integrate(&rho.mul_pointwise(rho));
            assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0));
            assert_eq!(t.connection_sign, ConnectionSign::Minus);
            assert_eq!(t.alpha_h.len(), 3);
            let bk = gauss_curvature(&f, &t, &g).unwrap();
            assert!((bk.assembled - bk.closed_form).abs() < 1e-9 * bk.closed_form.abs().max(1.0));
            for m in translation_moments(&g, &t.alpha_h[0]) {
                assert!(m.abs() < 1e-10);
            }
            for m in rotation_moments(&g, &t.alpha_h[0]).into_iter().chain(rotation_moments(&g, &t.alpha_h[1])) {
                assert!(m.abs() < 1e-10);
            }
            for m in dipole_moments(&g, rho).into_iter().chain(dipole_moments(&g, dr)) {
                assert!(m.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pure_electric_moments() {
        let g = grid();
        let jet = pure_electric(1.0, 1.0).unwrap();
        let f = decompose(&jet, &g).unwrap();
        let t = physical_expansion(&f, &g).unwrap();
        let w = f.w0();
        let iw = g.integrate(&w.mul_pointwise(w));
        assert!((iw - 16.0 * std::f64::consts::PI / 5.0).abs() < 1e-12);
        let a = t.a_ring3.as_ref().unwrap();
        assert!((g.integrate(&a.contract(a)) - 48.0 * std::f64::consts::PI / 5.0).abs() < 1e-11);
    }

    #[test]
    fn matter_connection_matches_divergence_formula() {
        let g = grid();
        let mut gen = JetGenerator::new(5);
        for _ in 0..3 {
            let jet = gen.matter(1.0);
            let f = decompose(&jet, &g).unwrap();
            let t = physical_expansion(&f, &g).unwrap();
            assert_eq!(t.alpha_h.len(), 1);
            assert!(t.calibration_residual < 1e-9);
            assert!(t.h2.is_none());
        }
        let f = decompose(&dust(1.0, 1.0), &g).unwrap();
        assert!(physical_expansion(&f, &g).is_ok());
    }

    #[test]
    fn vacuum_without_derivatives_is_missing_order() {
        let g = grid();
        let jet = crate::curvature::CurvatureJet::<f64>::zero(1.0);
        let f = decompose(&jet, &g).unwrap();
        assert!(matches!(physical_expansion(&f, &g), Err(QleError::MissingJetOrder(_))));
    }
}
