//! Curvature data at the vertex of the light cone and its validation.

use super::tensor::{eta, idx4, metric_square, metric_wedge, weyl_from_electric_magnetic, M4, Tensor4};
use crate::error::{QleError, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Vacuum,
    Matter,
}

/// Weyl tensor at `p`, optional Ricci/stress-energy, and optional derivative jets.
///
/// `d_weyl[μ]` holds `∇_μ W` and `d2_weyl[4μ + ν]` holds `∇_μ∇_ν W`
/// (symmetrized in `μν`), all in the orthonormal frame at `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureJet<T> {
    pub kappa: T,
    pub lambda: T,
    pub mode: Mode,
    pub weyl: Tensor4<T>,
    pub ricci: Option<M4<T>>,
    pub stress_energy: Option<M4<T>>,
    pub d_weyl: Option<Vec<Tensor4<T>>>,
    pub d2_weyl: Option<Vec<Tensor4<T>>>,
}

impl<T: Real> CurvatureJet<T> {
    /// Vacuum jet with `Λ = −3κ²` and no derivative data.
    pub fn vacuum(kappa: T, weyl: Tensor4<T>) -> Self {
        Self {
            kappa,
            lambda: -T::lit(3.0) * kappa * kappa,
            mode: Mode::Vacuum,
            weyl,
            ricci: None,
            stress_energy: None,
            d_weyl: None,
            d2_weyl: None,
        }
    }

    pub fn zero(kappa: T) -> Self {
        Self::vacuum(kappa, Tensor4::zero())
    }

    pub fn from_electric_magnetic(kappa: T, e: &[[T; 3]; 3], b: &[[T; 3]; 3]) -> Self {
        Self::vacuum(kappa, weyl_from_electric_magnetic(e, b))
    }

    /// Matter jet whose Ricci tensor is solved from the Einstein equation.
    pub fn matter(kappa: T, weyl: Tensor4<T>, stress_energy: M4<T>) -> Self {
        let lambda = -T::lit(3.0) * kappa * kappa;
        let ricci = einstein_ricci(&stress_energy, lambda);
        Self {
            kappa,
            lambda,
            mode: Mode::Matter,
            weyl,
            ricci: Some(ricci),
            stress_energy: Some(stress_energy),
            d_weyl: None,
            d2_weyl: None,
        }
    }

    /// Ricci tensor, defaulting to `−3κ² g` in vacuum.
    pub fn ricci_tensor(&self) -> M4<T> {
        match (&self.ricci, self.mode) {
            (Some(r), _) => *r,
            (None, _) => {
                let mut r = [[T::zero(); 4]; 4];
                for (a, row) in r.iter_mut().enumerate() {
                    row[a] = -T::lit(3.0) * self.kappa * self.kappa * eta::<T>(a);
                }
                r
            }
        }
    }

    pub fn scalar_curvature(&self) -> T {
        let r = self.ricci_tensor();
        (0..4).map(|a| eta::<T>(a) * r[a][a]).sum()
    }

    /// Full curvature tensor in the sign convention where the constant-curvature
    /// part reads `+κ²(g_ac g_bd − g_ad g_bc)` and `Ric_bc = g^{ad} R_abcd`.
    pub fn riemann(&self) -> Tensor4<T> {
        let ric = self.ricci_tensor();
        let scal = self.scalar_curvature();
        let mut traceless = ric;
        for (a, row) in traceless.iter_mut().enumerate() {
            row[a] -= scal / T::lit(4.0) * eta::<T>(a);
        }
        let mut r = self.weyl.clone();
        r.axpy(-T::lit(0.5), &metric_wedge(&traceless));
        r.axpy(-scal / T::lit(12.0), &metric_square());
        r
    }

    pub fn stress_energy_or_zero(&self) -> M4<T> {
        self.stress_energy.unwrap_or([[T::zero(); 4]; 4])
    }

    /// Contraction `½ g^{νa}[∇_ν,∇_μ]W_{abcd}` indexed `[μ][b][c][d]`, the trace
    /// that a symmetrized second derivative must reproduce.
    pub fn commutator_trace(&self) -> Vec<T> {
        let r = self.riemann();
        let w = &self.weyl;
        // raised curvature R^λ_{a ν μ}
        let ru = |l: usize, a: usize, n: usize, m: usize| eta::<T>(l) * r.at(l, a, n, m);
        let mut out = vec![T::zero(); 256];
        for mu in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut s = T::zero();
                        for nu in 0..4 {
                            let a = nu;
                            let mut cm = T::zero();
                            for l in 0..4 {
                                cm += ru(l, a, nu, mu) * w.at(l, b, c, d)
                                    + ru(l, b, nu, mu) * w.at(a, l, c, d)
                                    + ru(l, c, nu, mu) * w.at(a, b, l, d)
                                    + ru(l, d, nu, mu) * w.at(a, b, c, l);
                            }
                            s += eta::<T>(nu) * cm;
                        }
                        out[(mu * 4 + b) * 16 + c * 4 + d] = T::lit(0.5) * s;
                    }
                }
            }
        }
        out
    }

    pub fn has_first_derivatives(&self) -> bool {
        self.d_weyl.is_some()
    }
    pub fn has_second_derivatives(&self) -> bool {
        self.d2_weyl.is_some()
    }

    /// Shape checks for externally assembled jets.
    pub fn check_shapes(&self) -> Result<()> {
        if self.weyl.0.len() != 256 {
            return Err(QleError::MalformedInput(format!("weyl has {} entries, expected 256", self.weyl.0.len())));
        }
        if let Some(d) = &self.d_weyl {
            if d.len() != 4 || d.iter().any(|t| t.0.len() != 256) {
                return Err(QleError::MalformedInput("d_weyl must have shape [4][4][4][4][4]".into()));
            }
        }
        if let Some(d) = &self.d2_weyl {
            if d.len() != 16 || d.iter().any(|t| t.0.len() != 256) {
                return Err(QleError::MalformedInput("d2_weyl must have shape [4][4][4][4][4][4]".into()));
            }
        }
        if self.mode == Mode::Matter && (self.ricci.is_none() || self.stress_energy.is_none()) {
            return Err(QleError::ModeMismatch("matter mode requires ricci and stress_energy".into()));
        }
        Ok(())
    }

    /// Same jet expressed in a rotated/boosted orthonormal frame.
    pub fn transformed(&self, lam: &M4<T>) -> Self {
        let tr2 = |m: &M4<T>| {
            let mut out = [[T::zero(); 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            out[a][b] += lam[a][c] * lam[b][d] * m[c][d];
                        }
                    }
                }
            }
            out
        };
        let d1 = self.d_weyl.as_ref().map(|d| {
            (0..4)
                .map(|mu| {
                    let mut acc = Tensor4::zero();
                    for (k, dk) in d.iter().enumerate() {
                        acc.axpy(lam[mu][k], dk);
                    }
                    acc.transformed(lam)
                })
                .collect()
        });
        let d2 = self.d2_weyl.as_ref().map(|d| {
            let mut out = Vec::with_capacity(16);
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut acc = Tensor4::zero();
                    for k in 0..4 {
                        for l in 0..4 {
                            acc.axpy(lam[mu][k] * lam[nu][l], &d[k * 4 + l]);
                        }
                    }
                    out.push(acc.transformed(lam));
                }
            }
            out
        });
        Self {
            kappa: self.kappa,
            lambda: self.lambda,
            mode: self.mode,
            weyl: self.weyl.transformed(lam),
            ricci: self.ricci.as_ref().map(tr2),
            stress_energy: self.stress_energy.as_ref().map(tr2),
            d_weyl: d1,
            d2_weyl: d2,
        }
    }
}

/// `Ric = 8πT + (R/2 − Λ) g` with `R = 4Λ − 8π tr T`.
pub fn einstein_ricci<T: Real>(t: &M4<T>, lambda: T) -> M4<T> {
    let eight_pi = T::lit(8.0) * T::PI();
    let tr: T = (0..4).map(|a| eta::<T>(a) * t[a][a]).sum();
    let scal = T::lit(4.0) * lambda - eight_pi * tr;
    let mut r = [[T::zero(); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            r[a][b] = eight_pi * t[a][b];
        }
        r[a][a] += (scal / T::lit(2.0) - lambda) * eta::<T>(a);
    }
    r
}

/// One named constraint and its residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintRow {
    pub name: String,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ConstraintRow>,
    pub pass: bool,
}

impl ValidationReport {
    /// First failing row as an error.
    pub fn into_result(self) -> Result<Self> {
        if let Some(r) = self.rows.iter().find(|r| !r.pass) {
            return Err(QleError::ConstraintViolation {
                name: r.name.clone(),
                residual: r.residual,
                tolerance: r.tolerance,
            });
        }
        Ok(self)
    }

    pub fn row(&self, name: &str) -> Option<&ConstraintRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Relative tolerance for algebraic constraints.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Relative tolerance for differential and field-equation constraints.
pub const DIFFERENTIAL_TOL: f64 = 1e-10;

fn push_row<T: Real>(rows: &mut Vec<ConstraintRow>, name: &str, anchor: &str, residual: T, tol: T) {
    let residual = residual.to_f64_lossy();
    let tolerance = tol.to_f64_lossy();
    rows.push(ConstraintRow {
        name: name.into(),
        anchor: anchor.into(),
        residual,
        tolerance,
        pass: residual <= tolerance,
    });
}

fn push_weyl_rows<T: Real>(rows: &mut Vec<ConstraintRow>, prefix: &str, t: &[&Tensor4<T>], tol: T) {
    let mut acc = super::tensor::WeylResiduals::<T>::default();
    for w in t {
        let r = w.weyl_residuals();
        acc.antisymmetry = acc.antisymmetry.max(r.antisymmetry);
        acc.pair_symmetry = acc.pair_symmetry.max(r.pair_symmetry);
        acc.bianchi = acc.bianchi.max(r.bianchi);
        acc.trace = acc.trace.max(r.trace);
    }
    push_row(rows, &format!("{prefix}antisymmetry"), "W_abcd = -W_bacd = -W_abdc", acc.antisymmetry, tol);
    push_row(rows, &format!("{prefix}pair-symmetry"), "W_abcd = W_cdab", acc.pair_symmetry, tol);
    push_row(rows, &format!("{prefix}bianchi"), "W_a[bcd] = 0", acc.bianchi, tol);
    push_row(rows, &format!("{prefix}traceless"), "g^ac W_abcd = 0", acc.trace, tol);
}

/// Checks every algebraic and differential constraint the declared mode implies.
pub fn validate<T: Real>(jet: &CurvatureJet<T>) -> Result<ValidationReport> {
    jet.check_shapes()?;
    let mut rows = Vec::new();
    let one = T::one();
    let scale = one.max(jet.weyl.max_abs());
    let alg = T::tolerance(ALGEBRAIC_TOL) * scale;

    push_row(
        &mut rows,
        "kappa-positive",
        "kappa > 0",
        if jet.kappa > T::zero() { T::zero() } else { one },
        T::zero(),
    );
    push_row(
        &mut rows,
        "lambda-consistency",
        "Lambda = -3 kappa^2",
        (jet.lambda + T::lit(3.0) * jet.kappa * jet.kappa).abs(),
        T::tolerance(ALGEBRAIC_TOL) * one.max(jet.lambda.abs()),
    );
    push_weyl_rows(&mut rows, "weyl-", &[&jet.weyl], alg);

    match jet.mode {
        Mode::Vacuum => {
            if let Some(r) = &jet.ricci {
                let mut res = T::zero();
                for a in 0..4 {
                    for b in 0..4 {
                        let want = if a == b { -T::lit(3.0) * jet.kappa * jet.kappa * eta::<T>(a) } else { T::zero() };
                        res = res.max((r[a][b] - want).abs());
                    }
                }
                push_row(&mut rows, "ricci-vacuum", "Ric = -3 kappa^2 g", res, alg);
            }
            if let Some(t) = &jet.stress_energy {
                let res = t.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
                push_row(&mut rows, "stress-energy-vacuum", "T = 0", res, alg);
            }
        }
        Mode::Matter => {
            let ric = jet.ricci_tensor();
            let t = jet.stress_energy_or_zero();
            let scal = jet.scalar_curvature();
            let eight_pi = T::lit(8.0) * T::PI();
            let mut res = T::zero();
            let mut sym = T::zero();
            let mut mag = one;
            for a in 0..4 {
                for b in 0..4 {
                    let g = if a == b { eta::<T>(a) } else { T::zero() };
                    let e = ric[a][b] - scal / T::lit(2.0) * g + jet.lambda * g - eight_pi * t[a][b];
                    res = res.max(e.abs());
                    sym = sym.max((ric[a][b] - ric[b][a]).abs()).max((t[a][b] - t[b][a]).abs());
                    mag = mag.max(ric[a][b].abs()).max(eight_pi * t[a][b].abs());
                }
            }
            push_row(&mut rows, "ricci-symmetry", "Ric_ab = Ric_ba, T_ab = T_ba", sym, T::tolerance(ALGEBRAIC_TOL) * mag);
            push_row(
                &mut rows,
                "einstein-equation",
                "Ric - (R/2) g + Lambda g = 8 pi T",
                res,
                T::tolerance(DIFFERENTIAL_TOL) * mag,
            );
        }
    }

    if let Some(d) = &jet.d_weyl {
        let dscale = d.iter().fold(scale, |m, t| m.max(t.max_abs()));
        let refs: Vec<&Tensor4<T>> = d.iter().collect();
        push_weyl_rows(&mut rows, "d-weyl-", &refs, T::tolerance(ALGEBRAIC_TOL) * dscale);
        if jet.mode == Mode::Vacuum {
            let mut res = T::zero();
            for b in 0..4 {
                for c in 0..4 {
                    for e in 0..4 {
                        let s: T = (0..4).map(|mu| eta::<T>(mu) * d[mu].at(mu, b, c, e)).sum();
                        res = res.max(s.abs());
                    }
                }
            }
            push_row(&mut rows, "d-weyl-divergence", "nabla^a W_abcd = 0", res, T::tolerance(DIFFERENTIAL_TOL) * dscale);
        }
    }

    if let Some(d2) = &jet.d2_weyl {
        let dscale = d2.iter().fold(scale * scale, |m, t| m.max(t.max_abs()));
        let mut sym = T::zero();
        for mu in 0..4 {
            for nu in 0..4 {
                for k in 0..256 {
                    sym = sym.max((d2[mu * 4 + nu].0[k] - d2[nu * 4 + mu].0[k]).abs());
                }
            }
        }
        push_row(
            &mut rows,
            "d2-weyl-derivative-symmetry",
            "second derivative slots symmetric",
            sym,
            T::tolerance(ALGEBRAIC_TOL) * dscale,
        );
        let refs: Vec<&Tensor4<T>> = d2.iter().collect();
        push_weyl_rows(&mut rows, "d2-weyl-", &refs, T::tolerance(ALGEBRAIC_TOL) * dscale);
        if jet.mode == Mode::Vacuum {
            let target = jet.commutator_trace();
            let mut res = T::zero();
            for mu in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for e in 0..4 {
                            let mut s = T::zero();
                            for nu in 0..4 {
                                s += eta::<T>(nu) * d2[mu * 4 + nu].0[idx4(nu, b, c, e)];
                            }
                            res = res.max((s - target[(mu * 4 + b) * 16 + c * 4 + e]).abs());
                        }
                    }
                }
            }
            push_row(
                &mut rows,
                "d2-weyl-divergence",
                "g^na nabla_m nabla_n W_abcd = commutator trace",
                res,
                T::tolerance(DIFFERENTIAL_TOL) * dscale,
            );
        }
    }

    let pass = rows.iter().all(|r| r.pass);
    Ok(ValidationReport { rows, pass })
}
