//! Limits of the quasi-local energy: the `r³` coefficient with matter, the
//! `r⁵` coefficient in vacuum, and the Bel–Robinson closed form.

use serde::Serialize;

use crate::curvature::{decompose, electric_part, u_from_components, CurvatureJet, Mode, WeylSphereFields};
use crate::embedding::{EmbeddingJet, Y0Path};
use crate::error::{QleError, Result};
use crate::expansion::{gauss_curvature, physical_expansion, ExpansionTable, GaussBookkeeping};
use crate::linalg;
use crate::observer::{check_unit_radius, is_timelike, Observer};
use crate::scalar::Real;
use crate::sphere::{Field, ScalarField, SphereGrid};

/// Relative tolerance of the grand assembly.
pub const ASSEMBLY_TOL: f64 = 1e-8;

/// Signs with which the three vacuum terms enter `8π E⁽⁵⁾`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignResolution {
    pub energy: i8,
    pub reference: i8,
    pub physical: i8,
}

/// The energy and reference terms enter with `+`, the physical connection
/// term with `−`: the only combination reproducing the Bel–Robinson closed
/// form both for static and for boosted observers.
pub const SIGN_RESOLUTION: SignResolution = SignResolution {
    energy: 1,
    reference: 1,
    physical: -1,
};

impl SignResolution {
    pub fn combine(&self, energy: f64, reference: f64, physical: f64) -> f64 {
        (f64::from(self.energy) * energy + f64::from(self.reference) * reference + f64::from(self.physical) * physical)
            / (8.0 * std::f64::consts::PI)
    }

    /// All sign patterns with a positive energy term.
    pub fn candidates() -> Vec<SignResolution> {
        let mut out = Vec::new();
        for reference in [1, -1] {
            for physical in [1, -1] {
                out.push(SignResolution {
                    energy: 1,
                    reference,
                    physical,
                });
            }
        }
        out
    }
}

/// `U = (½ΣW̄²_{0kmn} + ΣW̄²_{0m0n}, 2ΣW̄_{0m0n}W̄_{0min})` and whether it is timelike.
pub fn u_vector<T: Real>(jet: &CurvatureJet<T>) -> ([T; 4], bool) {
    let u = u_from_components(&jet.weyl);
    let t = is_timelike(&u);
    (u, t)
}

/// `(1/90)[U⁰A + U⃗·C + ΣW̄²_{0m0n}/(2A)]`.
pub fn closed_form_e5<T: Real>(jet: &CurvatureJet<T>, obs: &Observer<T>) -> T {
    let (u, _) = u_vector(jet);
    let e = electric_part(&jet.weyl);
    let q: T = e.iter().flatten().map(|x| *x * *x).sum();
    let a = obs.a();
    let c = obs.c();
    (u[0] * a + u[1] * c[0] + u[2] * c[1] + u[3] * c[2] + q / (T::lit(2.0) * a)) / T::lit(90.0)
}

/// Sub-integrals entering the vacuum terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Breakdown {
    pub int_w0_sq: f64,
    pub int_alpha_sq: f64,
    pub int_beta_sq: f64,
    pub int_a_ring_sq: f64,
    pub gauss: GaussBookkeeping,
    /// `∫PᵢPⱼ`.
    pub int_p_p: [[f64; 3]; 3],
    /// `∫X̃ⁱW₀Pⱼ`.
    pub int_x_w0_p: [[f64; 3]; 3],
    /// `∫W₀²X̃ⁱX̃ʲ`.
    pub int_w0_sq_x_x: [[f64; 3]; 3],
    /// `∫W₀[Rᵢⱼ + 2∇̃X̃ⁱ·∇̃(Yⱼ⁽³⁾ + Pⱼ) + X̃ⁱ(Sⱼ − Δ̃Yⱼ⁽³⁾ + 12Pⱼ)]`.
    pub int_boost: [[f64; 3]; 3],
    /// `∫W₀WᵢCᵢ`.
    pub int_w0_w_c: f64,
    /// `∫(CᵢX̃ⁱ)|β|²`.
    pub int_cx_beta_sq: f64,
}

fn matrix_integrals<T: Real>(f: impl Fn(usize, usize) -> T) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j).to_f64_lossy()))
}

fn contract_cc<T: Real>(m: &[[f64; 3]; 3], c: &[T; 3]) -> f64 {
    let c = c.map(|x| x.to_f64_lossy());
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += c[i] * c[j] * m[i][j];
        }
    }
    s
}

/// All sub-integrals for one observer.
pub fn breakdown<T: Real>(
    fields: &WeylSphereFields<T>,
    table: &ExpansionTable<T>,
    emb: &EmbeddingJet<T>,
    grid: &SphereGrid<T>,
    obs: &Observer<T>,
) -> Result<Breakdown> {
    let gauss = gauss_curvature(fields, table, grid)?;
    let w0 = fields.w0();
    let der = &fields.derived;
    let a_ring = table
        .a_ring3
        .as_ref()
        .ok_or_else(|| QleError::ModeMismatch("traceless second fundamental form needs a vacuum jet".into()))?;
    let x: Vec<ScalarField<T>> = (0..3).map(|i| grid.coordinate(i)).collect();
    let p: Vec<ScalarField<T>> = (0..3).map(|j| der.p_component(j)).collect();
    let s: Vec<ScalarField<T>> = (0..3).map(|j| der.s_component(j)).collect();
    let w0_sq = w0.mul_pointwise(w0);
    let twelve = T::lit(12.0);
    let boost_j: Vec<(crate::sphere::CovectorField<T>, ScalarField<T>)> = (0..3)
        .map(|j| {
            let grad = grid.gradient(&(&emb.yi3[j] + &p[j]));
            let mut tail = s[j].clone();
            tail.axpy(-T::one(), &grid.laplacian(&emb.yi3[j]));
            tail.axpy(twelve, &p[j]);
            (grad, tail)
        })
        .collect();
    let int_boost = matrix_integrals(|i, j| {
        let mut inner = der.r_component(i, j);
        inner.axpy(T::lit(2.0), &boost_j[j].0.component(i));
        inner.axpy(T::one(), &x[i].mul_pointwise(&boost_j[j].1));
        grid.integrate(&w0.mul_pointwise(&inner))
    });
    let c = obs.c();
    let cx = obs.c_dot_x(grid);
    let wc = ScalarField(der.w.0.iter().map(|wi| linalg::dot(wi, &c)).collect());
    Ok(Breakdown {
        int_w0_sq: grid.integrate(&w0_sq).to_f64_lossy(),
        int_alpha_sq: gauss.int_alpha_sq,
        int_beta_sq: gauss.int_beta_sq,
        int_a_ring_sq: grid.integrate(&a_ring.contract(a_ring)).to_f64_lossy(),
        int_p_p: matrix_integrals(|i, j| grid.integrate(&p[i].mul_pointwise(&p[j]))),
        int_x_w0_p: matrix_integrals(|i, j| grid.integrate(&x[i].mul_pointwise(w0).mul_pointwise(&p[j]))),
        int_w0_sq_x_x: matrix_integrals(|i, j| grid.integrate(&w0_sq.mul_pointwise(&x[i]).mul_pointwise(&x[j]))),
        int_boost,
        int_w0_w_c: grid.integrate(&w0.mul_pointwise(&wc)).to_f64_lossy(),
        int_cx_beta_sq: grid.integrate(&cx.mul_pointwise(&fields.beta_sq())).to_f64_lossy(),
        gauss,
    })
}

/// `A∫(h₀⁽³⁾ − h⁽³⁾)` plus the boost corrections:
/// `A[½∫|Å⁽³⁾|² + ∫(k⁽³⁾ − ¼ − h⁽³⁾) − ⅔∫W₀²] − 30(CᵢCⱼ/A)∫PᵢPⱼ
///  − (3CᵢCⱼ/4A)∫W₀²X̃ⁱX̃ʲ + (CᵢCⱼ/2A)∫W₀[…]ᵢⱼ`.
pub fn vacuum_energy_component<T: Real>(b: &Breakdown, obs: &Observer<T>) -> f64 {
    let a = obs.a().to_f64_lossy();
    let c = obs.c();
    a * (0.5 * b.int_a_ring_sq + b.gauss.assembled - 2.0 / 3.0 * b.int_w0_sq) - 30.0 * contract_cc(&b.int_p_p, &c) / a
        - 0.75 * contract_cc(&b.int_w0_sq_x_x, &c) / a
        + contract_cc(&b.int_boost, &c) / (2.0 * a)
}

/// `(4/3)A∫W₀² − 10(CᵢCⱼ/A)∫X̃ⁱW₀Pⱼ`.
pub fn vacuum_reference_term<T: Real>(b: &Breakdown, obs: &Observer<T>) -> f64 {
    let a = obs.a().to_f64_lossy();
    4.0 / 3.0 * a * b.int_w0_sq - 10.0 * contract_cc(&b.int_x_w0_p, &obs.c()) / a
}

/// `∫[(4A/3)W₀² + ⅔CᵢWᵢW₀ − (CᵢX̃ⁱ)|β|²]`.
pub fn vacuum_physical_term<T: Real>(b: &Breakdown, obs: &Observer<T>) -> f64 {
    let a = obs.a().to_f64_lossy();
    4.0 * a / 3.0 * b.int_w0_sq + 2.0 / 3.0 * b.int_w0_w_c - b.int_cx_beta_sq
}

/// The three vacuum terms for one observer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VacuumTerms {
    pub term_energy: f64,
    pub term_reference: f64,
    pub term_physical: f64,
    pub breakdown: Breakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatterLimit {
    /// `(1/8π)∫(h₀⁽¹⁾ − h⁽¹⁾)`.
    pub e_integral: f64,
    /// `(4π/3)T(e₀,e₀)`.
    pub e_stress: f64,
    /// `(1/8π)(4π/3)(Ric(e₀,e₀) + R/2 + 3κ²)`.
    pub e_einstein: f64,
    /// `−(1/8π)∫X̃ⁱ ∇̃·α_H⁽²⁾`.
    pub p_integral: [f64; 3],
    /// `−(1/8π)∫[−2R̄_{LL̲LL̲} − Ric(L,L̲) − ½Ric(L,L)]X̃ⁱ`.
    pub p_curvature: [f64; 3],
    /// `(4π/3)T(e₀,eᵢ)`.
    pub p_stress: [f64; 3],
    /// `Ae + Cᵢpⁱ`.
    pub e3: f64,
    /// `(4π/3)T(e₀, Ae₀ + Cᵢeᵢ)`.
    pub e3_stress: f64,
}

/// The `r³` coefficient of the energy in the presence of matter.
pub fn matter_limit<T: Real>(
    jet: &CurvatureJet<T>,
    fields: &WeylSphereFields<T>,
    table: &ExpansionTable<T>,
    grid: &SphereGrid<T>,
    obs: &Observer<T>,
) -> Result<MatterLimit> {
    if jet.mode != Mode::Matter || jet.stress_energy.is_none() {
        return Err(QleError::ModeMismatch("matter limit needs a stress-energy tensor".into()));
    }
    let eight_pi = T::lit(8.0) * T::PI();
    let vol = T::lit(4.0) * T::PI() / T::lit(3.0);
    let t = jet.stress_energy_or_zero();
    let ric = jet.ricci_tensor();
    let k2 = jet.kappa * jet.kappa;
    let e_integral = grid.integrate(&(&table.h01 - &table.h1)) / eight_pi;
    let e_einstein = vol * (ric[0][0] + jet.scalar_curvature() / T::lit(2.0) + T::lit(3.0) * k2) / eight_pi;
    let div_a = grid.divergence(&table.alpha_h[0]);
    let c = &fields.curvature;
    let mut density = c.r_llbllb.scaled(-T::lit(2.0));
    density.axpy(-T::one(), &c.ric_llb);
    density.axpy(-T::lit(0.5), &c.ric_ll);
    let p_integral: [T; 3] =
        std::array::from_fn(|i| -grid.integrate(&grid.coordinate(i).mul_pointwise(&div_a)) / eight_pi);
    let p_curvature: [T; 3] =
        std::array::from_fn(|i| -grid.integrate(&grid.coordinate(i).mul_pointwise(&density)) / eight_pi);
    let p_stress: [T; 3] = std::array::from_fn(|i| vol * t[0][i + 1]);
    let a = obs.a();
    let cv = obs.c();
    let e3 = a * e_integral + linalg::dot(&cv, &p_integral);
    let e3_stress = vol * (a * t[0][0] + cv[0] * t[0][1] + cv[1] * t[0][2] + cv[2] * t[0][3]);
    let f = |x: T| x.to_f64_lossy();
    Ok(MatterLimit {
        e_integral: f(e_integral),
        e_stress: f(vol * t[0][0]),
        e_einstein: f(e_einstein),
        p_integral: p_integral.map(f),
        p_curvature: p_curvature.map(f),
        p_stress: p_stress.map(f),
        e3: f(e3),
        e3_stress: f(e3_stress),
    })
}

/// Full report of an energy evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub mode: Mode,
    pub observer: Observer<f64>,
    pub matter: Option<MatterLimit>,
    pub vacuum: Option<VacuumTerms>,
    pub sign_resolution: Option<SignResolution>,
    pub assembled_e5: Option<f64>,
    pub closed_form_e5: Option<f64>,
    pub discrepancy: Option<f64>,
    pub relative_discrepancy: Option<f64>,
    pub u_vector: [f64; 4],
    pub u_timelike: bool,
}

/// Grid, decomposition, closed-form table and embedding for one jet and observer.
pub struct Pipeline<T> {
    pub fields: WeylSphereFields<T>,
    pub table: ExpansionTable<T>,
    /// Built for vacuum jets only; with matter the leading optimal embedding
    /// equation is solvable only for the observer aligned with `T(e₀,·)`.
    pub embedding: Option<EmbeddingJet<T>>,
}

impl<T: Real> Pipeline<T> {
    pub fn new(jet: &CurvatureJet<T>, grid: &SphereGrid<T>, obs: &Observer<T>) -> Result<Self> {
        let fields = decompose(jet, grid)?;
        let table = physical_expansion(&fields, grid)?;
        let embedding = match fields.mode {
            Mode::Vacuum => Some(EmbeddingJet::build(&fields, &table, grid, obs, Y0Path::ClosedForm)?),
            Mode::Matter => None,
        };
        Ok(Self { fields, table, embedding })
    }
}

/// The three vacuum terms for a prepared pipeline.
pub fn vacuum_terms<T: Real>(pipe: &Pipeline<T>, grid: &SphereGrid<T>, obs: &Observer<T>) -> Result<VacuumTerms> {
    let emb = pipe
        .embedding
        .as_ref()
        .ok_or_else(|| QleError::ModeMismatch("vacuum terms need a vacuum jet".into()))?;
    let b = breakdown(&pipe.fields, &pipe.table, emb, grid, obs)?;
    Ok(VacuumTerms {
        term_energy: vacuum_energy_component(&b, obs),
        term_reference: vacuum_reference_term(&b, obs),
        term_physical: vacuum_physical_term(&b, obs),
        breakdown: b,
    })
}

/// Evaluates the energy limit for the jet's mode and compares the vacuum
/// assembly with the Bel–Robinson closed form.
pub fn assemble_e5<T: Real>(jet: &CurvatureJet<T>, grid: &SphereGrid<T>, obs: &Observer<T>) -> Result<EnergyReport> {
    let (u, timelike) = u_vector(jet);
    let k = obs.killing;
    let observer = Observer {
        killing: crate::observer::KillingField {
            a: k.a.to_f64_lossy(),
            b: k.b.map(|x| x.to_f64_lossy()),
            c: k.c.map(|x| x.to_f64_lossy()),
            d: k.d.map(|x| x.to_f64_lossy()),
            kappa: k.kappa.to_f64_lossy(),
        },
    };
    let mut report = EnergyReport {
        mode: jet.mode,
        observer,
        matter: None,
        vacuum: None,
        sign_resolution: None,
        assembled_e5: None,
        closed_form_e5: None,
        discrepancy: None,
        relative_discrepancy: None,
        u_vector: u.map(|x| x.to_f64_lossy()),
        u_timelike: timelike,
    };
    match jet.mode {
        Mode::Matter => {
            let pipe = Pipeline::new(jet, grid, obs)?;
            report.matter = Some(matter_limit(jet, &pipe.fields, &pipe.table, grid, obs)?);
        }
        Mode::Vacuum => {
            check_unit_radius(jet.kappa)?;
            let pipe = Pipeline::new(jet, grid, obs)?;
            let terms = vacuum_terms(&pipe, grid, obs)?;
            let assembled = SIGN_RESOLUTION.combine(terms.term_energy, terms.term_reference, terms.term_physical);
            let closed = closed_form_e5(jet, obs).to_f64_lossy();
            let disc = (assembled - closed).abs();
            report.assembled_e5 = Some(assembled);
            report.closed_form_e5 = Some(closed);
            report.discrepancy = Some(disc);
            report.relative_discrepancy = Some(disc / closed.abs().max(1.0));
            report.sign_resolution = Some(SIGN_RESOLUTION);
            report.vacuum = Some(terms);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{dust, pure_electric, Depth, JetGenerator};
    use crate::expansion::physical_expansion;
    use std::f64::consts::PI;

    fn grid() -> SphereGrid<f64> {
        SphereGrid::new(15).unwrap()
    }

    #[test]
    fn pure_electric_static_is_one_tenth() {
        let g = grid();
        let jet = pure_electric(1.0, 1.0).unwrap();
        let obs = Observer::static_observer(1.0);
        let r = assemble_e5(&jet, &g, &obs).unwrap();
        assert!((r.closed_form_e5.unwrap() - 0.1).abs() < 1e-12);
        assert!(r.relative_discrepancy.unwrap() < 1e-12);
        assert_eq!(r.u_vector, [6.0, 0.0, 0.0, 0.0]);
        let v = r.vacuum.unwrap();
        let w0 = 16.0 * PI / 5.0;
        assert!((v.breakdown.int_w0_sq - w0).abs() < 1e-12);
        assert!((v.term_reference - 4.0 / 3.0 * w0).abs() < 1e-12);
        assert!((v.term_physical - 4.0 / 3.0 * w0).abs() < 1e-12);
    }

    #[test]
    fn zero_weyl_has_zero_energy() {
        let g = grid();
        let jet = pure_electric(1.0, 0.0).unwrap();
        let r = assemble_e5(&jet, &g, &Observer::from_c(1.0, [0.4, 0.0, -1.0])).unwrap();
        assert!(r.assembled_e5.unwrap().abs() < 1e-14);
        assert_eq!(r.closed_form_e5.unwrap(), 0.0);
        assert!(!r.u_timelike);
    }

    #[test]
    fn random_vacuum_assembly_matches_closed_form() {
        let g = grid();
        let mut gen = JetGenerator::new(31);
        for _ in 0..3 {
            let jet = gen.vacuum(1.0, Depth::Second).unwrap();
            for cmax in [0.0, 1.0, 3.0] {
                let obs = Observer::from_c(1.0, gen.observer_c(cmax));
                let r = assemble_e5(&jet, &g, &obs).unwrap();
                assert!(r.relative_discrepancy.unwrap() < ASSEMBLY_TOL, "{r:?}");
                assert!(r.closed_form_e5.unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn sign_resolution_is_unique() {
        let g = grid();
        let mut gen = JetGenerator::new(9);
        let jet = gen.vacuum(1.0, Depth::Second).unwrap();
        let observers = [Observer::static_observer(1.0), Observer::from_c(1.0, [1.0, -0.5, 0.25])];
        let mut survivors = SignResolution::candidates();
        for obs in &observers {
            let pipe = Pipeline::new(&jet, &g, obs).unwrap();
            let t = vacuum_terms(&pipe, &g, obs).unwrap();
            let closed = closed_form_e5(&jet, obs);
            survivors.retain(|s| (s.combine(t.term_energy, t.term_reference, t.term_physical) - closed).abs() < 1e-8);
        }
        assert_eq!(survivors, vec![SIGN_RESOLUTION]);
    }

    #[test]
    fn matter_paths_agree() {
        let g = grid();
        let r = assemble_e5(&dust(1.0, 1.0), &g, &Observer::static_observer(1.0)).unwrap();
        let m = r.matter.unwrap();
        assert!((m.e3 - 4.0 * PI / 3.0).abs() < 1e-12);
        let mut gen = JetGenerator::new(17);
        for _ in 0..3 {
            let jet = gen.matter(1.0);
            let obs = Observer::from_c(1.0, gen.observer_c(2.0));
            let m = assemble_e5(&jet, &g, &obs).unwrap().matter.unwrap();
            assert!((m.e_integral - m.e_stress).abs() < 1e-9, "{m:?}");
            assert!((m.e_einstein - m.e_stress).abs() < 1e-9);
            for i in 0..3 {
                assert!((m.p_integral[i] - m.p_stress[i]).abs() < 1e-9, "{m:?}");
                assert!((m.p_curvature[i] - m.p_stress[i]).abs() < 1e-9);
            }
            assert!((m.e3 - m.e3_stress).abs() < 1e-9);

            let t = jet.stress_energy_or_zero();
            let v: [f64; 3] = std::array::from_fn(|i| t[0][i + 1] / t[0][0]);
            let gamma = 1.0 / (1.0 - linalg::dot(&v, &v)).sqrt();
            let f = decompose(&jet, &g).unwrap();
            let tab = physical_expansion(&f, &g).unwrap();
            let optimal = crate::observer::minimize_matter(&jet).unwrap().observer;
            let c = optimal.c();
            for i in 0..3 {
                assert!((c[i] + gamma * v[i]).abs() < 1e-8);
            }
            assert!(EmbeddingJet::build(&f, &tab, &g, &optimal, Y0Path::Spectral).is_ok());
            let wrong = Observer::from_c(1.0, v.map(|x| gamma * x));
            assert!(matches!(
                EmbeddingJet::build(&f, &tab, &g, &wrong, Y0Path::Spectral),
                Err(QleError::KernelObstruction { .. })
            ));
        }
    }

    #[test]
    fn vacuum_requires_unit_radius() {
        let g = grid();
        let jet = pure_electric(2.0, 1.0).unwrap();
        assert!(matches!(
            assemble_e5(&jet, &g, &Observer::static_observer(2.0)),
            Err(QleError::ModeMismatch(_))
        ));
    }
}
