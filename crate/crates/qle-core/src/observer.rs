//! Killing fields of anti-de Sitter space, observer validation, the boost
//! field expansions and minimization of the limiting energies over observers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{electric_part, u_from_components, CurvatureJet, WeylSphereFields};
use crate::embedding::EmbeddingJet;
use crate::error::{QleError, Result};
use crate::linalg::{self, M3, V3};
use crate::scalar::Real;
use crate::sphere::{Field, ScalarField, SphereGrid};

/// Tolerance of the three observer conditions.
pub const OBSERVER_TOL: f64 = 1e-12;

/// `𝔎 = (A, B, C, D)`: `A` generates time translation, `B` and `C` boosts,
/// `D` rotations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KillingField<T> {
    pub a: T,
    pub b: [T; 3],
    pub c: [T; 3],
    pub d: [T; 3],
    pub kappa: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObserverResiduals {
    /// `|A D + B × C|`.
    pub cross: f64,
    /// `max(|B|, |C|, |D|) − A`; must be negative.
    pub dominance: f64,
    /// `|A² + |D|² − |B|² − |C|² − κ²|`.
    pub hyperboloid: f64,
}

/// Checks the three conditions characterizing observer Killing fields.
pub fn is_observer<T: Real>(k: &KillingField<T>) -> (bool, ObserverResiduals) {
    let ad = linalg::scale(k.a, &k.d);
    let cross = linalg::norm(&linalg::add(&ad, &linalg::cross(&k.b, &k.c)));
    let largest = linalg::norm(&k.b).max(linalg::norm(&k.c)).max(linalg::norm(&k.d));
    let hyper = k.a * k.a + linalg::dot(&k.d, &k.d) - linalg::dot(&k.b, &k.b) - linalg::dot(&k.c, &k.c) - k.kappa * k.kappa;
    let res = ObserverResiduals {
        cross: cross.to_f64_lossy(),
        dominance: (largest - k.a).to_f64_lossy(),
        hyperboloid: hyper.abs().to_f64_lossy(),
    };
    let ok = res.cross <= OBSERVER_TOL && res.dominance < 0.0 && res.hyperboloid <= OBSERVER_TOL;
    (ok, res)
}

/// A Killing field that passed [`is_observer`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observer<T> {
    pub killing: KillingField<T>,
}

impl<T: Real> Observer<T> {
    pub fn new(killing: KillingField<T>) -> Result<Self> {
        let (ok, res) = is_observer(&killing);
        if !ok {
            return Err(QleError::NotObserver(format!(
                "cross {:e}, dominance {:e}, hyperboloid {:e}",
                res.cross, res.dominance, res.hyperboloid
            )));
        }
        Ok(Self { killing })
    }

    /// `∂/∂t`.
    pub fn static_observer(kappa: T) -> Self {
        Self::from_c(kappa, [T::zero(); 3])
    }

    /// `A = √(κ² + |C|²)`, `B = D = 0`.
    pub fn from_c(kappa: T, c: V3<T>) -> Self {
        let a = (kappa * kappa + linalg::dot(&c, &c)).sqrt();
        Self {
            killing: KillingField {
                a,
                b: [T::zero(); 3],
                c,
                d: [T::zero(); 3],
                kappa,
            },
        }
    }

    pub fn a(&self) -> T {
        self.killing.a
    }

    pub fn c(&self) -> V3<T> {
        self.killing.c
    }

    /// `Cᵢ X̃ⁱ` on the grid.
    pub fn c_dot_x(&self, grid: &SphereGrid<T>) -> ScalarField<T> {
        let c = self.c();
        grid.scalar(|n| linalg::dot(&c, n))
    }
}

/// Expansion coefficients of the boost quantities on `Σ_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostFields<T> {
    /// `V²` at orders `r⁰, r¹, r²`.
    pub v_sq: [ScalarField<T>; 3],
    /// `V⁴|∇τ|²` at orders `r⁰, r¹, r²`.
    pub v4_grad_tau_sq: [ScalarField<T>; 3],
    /// `(div V²∇τ)²` at orders `r⁻²` and `r⁰`.
    pub div_sq: [ScalarField<T>; 2],
    pub g1: ScalarField<T>,
    pub g2: ScalarField<T>,
}

/// The boost field expansions, including the curvature corrections `g₁`, `g₂`.
pub fn boost_fields<T: Real>(
    obs: &Observer<T>,
    emb: &EmbeddingJet<T>,
    fields: &WeylSphereFields<T>,
    grid: &SphereGrid<T>,
) -> BoostFields<T> {
    let k = &obs.killing;
    let (a, b, c, d) = (k.a, k.b, k.c, k.d);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let a2c2 = a * a - linalg::dot(&c, &c);
    let bx = grid.scalar(|n| linalg::dot(&b, n));
    let cx = grid.scalar(|n| linalg::dot(&c, n));
    // (D × X)ᵢ = D_p ε_{pqi} X^q.
    let dxc = grid.scalar(|n| linalg::dot(&c, &linalg::cross(&d, n)));
    let dx_sq = grid.scalar(|n| {
        let v = linalg::cross(&d, n);
        linalg::dot(&v, &v)
    });
    let c_perp = grid.scalar(|n| linalg::dot(&c, &c) - linalg::dot(&c, n).powi(2));

    let grad_y: Vec<_> = emb.yi3.iter().map(|y| grid.gradient(y)).collect();
    let grad_y0 = grid.gradient(&emb.y03);
    let lap_y: Vec<_> = emb.yi3.iter().map(|y| grid.laplacian(y)).collect();
    let lap_y0 = grid.laplacian(&emb.y03);
    let der = &fields.derived;
    let nodes = grid.len();
    let mut g1 = ScalarField::zeros(nodes);
    let mut g2 = ScalarField::zeros(nodes);
    for p in 0..nodes {
        let n = grid.normals()[p];
        let mut s1 = T::zero();
        let mut s2 = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let cc = c[i] * c[j];
                s1 += cc * (der.r.0[p][i][j] + two * grad_y[j].0[p][i]);
                s2 += four * cc * n[i] * (der.s.0[p][j] - lap_y[j].0[p]);
            }
            s1 += two * a * c[i] * grad_y0.0[p][i];
            s2 -= four * a * c[i] * n[i] * lap_y0.0[p];
        }
        g1.0[p] = s1;
        g2.0[p] = s2;
    }

    let v_sq = [
        grid.constant(a2c2),
        (&bx.scaled(a) - &dxc).scaled(two),
        (&(&bx.mul_pointwise(&bx) + &cx.mul_pointwise(&cx)) - &dx_sq).map(|v| v + a2c2),
    ];
    let v4 = [c_perp.clone(), dxc.scaled(two), &(&c_perp + &dx_sq) + &g1];
    let cx_sq = cx.mul_pointwise(&cx).scaled(four);
    let div_sq = [cx_sq.clone(), &cx_sq + &g2];
    BoostFields {
        v_sq,
        v4_grad_tau_sq: v4,
        div_sq,
        g1,
        g2,
    }
}

/// `(div V²∇τ)²` at order `r⁻²` by differentiating the leading tangential
/// part `Cᵢ∇̃X̃ⁱ` of `−T₀^⊤` on the grid.
pub fn leading_divergence_direct<T: Real>(obs: &Observer<T>, grid: &SphereGrid<T>) -> ScalarField<T> {
    let div = grid.divergence(&grid.gradient(&obs.c_dot_x(grid)));
    div.mul_pointwise(&div)
}

/// `F(C) = a·A + b·C + q/(2A)` on the hyperboloid `A = √(κ² + |C|²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperboloidObjective<T> {
    pub a: T,
    pub b: V3<T>,
    pub q: T,
    pub kappa: T,
}

impl<T: Real> HyperboloidObjective<T> {
    pub fn height(&self, c: &V3<T>) -> T {
        (self.kappa * self.kappa + linalg::dot(c, c)).sqrt()
    }

    pub fn value(&self, c: &V3<T>) -> T {
        let a = self.height(c);
        self.a * a + linalg::dot(&self.b, c) + self.q / (T::lit(2.0) * a)
    }

    /// Value at an explicit `A` (off the hyperboloid), for monotonicity checks.
    pub fn value_at(&self, a: T, c: &V3<T>) -> T {
        self.a * a + linalg::dot(&self.b, c) + self.q / (T::lit(2.0) * a)
    }

    pub fn gradient(&self, c: &V3<T>) -> V3<T> {
        let a = self.height(c);
        let s = self.a / a - self.q / (T::lit(2.0) * a * a * a);
        linalg::add(&self.b, &linalg::scale(s, c))
    }

    pub fn hessian(&self, c: &V3<T>) -> M3<T> {
        let a = self.height(c);
        let a3 = a * a * a;
        let a5 = a3 * a * a;
        let half_q = self.q / T::lit(2.0);
        let cc = linalg::outer(c, c);
        let mut h = linalg::mscale(self.a / a - half_q / a3, &linalg::identity());
        h = linalg::madd(&h, &linalg::mscale(-self.a / a3 + T::lit(3.0) * half_q / a5, &cc));
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome<T> {
    pub c: V3<T>,
    pub value: T,
    pub gradient_norm: T,
    pub iterations: usize,
}

/// Damped Newton iteration with Armijo backtracking; falls back to steepest
/// descent whenever the Newton direction is unavailable or not a descent direction.
pub fn newton_minimize<T: Real>(obj: &HyperboloidObjective<T>, start: V3<T>) -> NewtonOutcome<T> {
    let mut c = start;
    let mut f = obj.value(&c);
    let mut iterations = 0;
    let floor = T::epsilon() * T::lit(16.0);
    for it in 0..500 {
        iterations = it;
        let g = obj.gradient(&c);
        let gn = linalg::norm(&g);
        if gn <= floor * (T::one() + obj.a.abs() + linalg::norm(&obj.b)) {
            break;
        }
        let h = obj.hessian(&c);
        let mut dir = linalg::solve3(&h, &linalg::scale(-T::one(), &g)).unwrap_or([T::zero(); 3]);
        if linalg::dot(&dir, &g) >= T::zero() {
            dir = linalg::scale(-T::one(), &g);
        }
        let slope = linalg::dot(&dir, &g);
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let trial = linalg::add(&c, &linalg::scale(step, &dir));
            let ft = obj.value(&trial);
            if ft < f && ft <= f + T::lit(1e-4) * step * slope {
                c = trial;
                f = ft;
                accepted = true;
                break;
            }
            step *= T::lit(0.5);
        }
        if !accepted {
            // Below the resolution of F the gradient norm is the only usable merit.
            let trial = linalg::add(&c, &dir);
            if linalg::norm(&obj.gradient(&trial)) < gn {
                c = trial;
                f = obj.value(&c);
            } else {
                break;
            }
        }
    }
    NewtonOutcome {
        c,
        value: obj.value(&c),
        gradient_norm: linalg::norm(&obj.gradient(&c)),
        iterations,
    }
}

/// Grid search over `[−10, 10]³` (21 points per axis) followed by nine
/// refinement levels, each a 21³ grid spanning one spacing of the previous level.
pub fn brute_force_minimize<T: Real>(obj: &HyperboloidObjective<T>) -> V3<T> {
    let mut centre = [T::zero(); 3];
    let mut half = T::lit(10.0);
    for _ in 0..10 {
        let h = half / T::lit(10.0);
        let mut best = (obj.value(&centre), centre);
        for i in -10i32..=10 {
            for j in -10i32..=10 {
                for k in -10i32..=10 {
                    let p = [
                        centre[0] + T::lit(f64::from(i)) * h,
                        centre[1] + T::lit(f64::from(j)) * h,
                        centre[2] + T::lit(f64::from(k)) * h,
                    ];
                    let v = obj.value(&p);
                    if v < best.0 {
                        best = (v, p);
                    }
                }
            }
        }
        centre = best.1;
        half = h;
    }
    centre
}

/// Evidence that the reported observer is the unique minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub gradient_norm: f64,
    pub hessian_min_eigenvalue: f64,
    pub brute_force_c: [f64; 3],
    pub brute_force_distance: f64,
    pub multistart_spread: f64,
    pub value_at_static: f64,
    pub monotone_in_a: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VacuumMinimum<T> {
    pub observer: Observer<T>,
    pub min_value: T,
    pub u: [T; 4],
    pub certificate: Certificate,
}

/// `(U, ΣW̄²_{0m0n})` from the Weyl tensor.
pub fn bel_robinson_data<T: Real>(jet: &CurvatureJet<T>) -> ([T; 4], T) {
    let u = u_from_components(&jet.weyl);
    let e = electric_part(&jet.weyl);
    let q = e.iter().flatten().map(|x| *x * *x).sum();
    (u, q)
}

/// `U⁰ > |U⃗|` with a relative margin.
pub fn is_timelike<T: Real>(u: &[T; 4]) -> bool {
    let spatial = (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]).sqrt();
    u[0] - spatial > T::lit(1e-12) * T::one().max(u[0])
}

/// The vacuum objective `(1/90)[U⁰A + U⃗·C + ΣW̄²_{0m0n}/(2A)]`.
pub fn vacuum_objective<T: Real>(jet: &CurvatureJet<T>) -> HyperboloidObjective<T> {
    let (u, q) = bel_robinson_data(jet);
    let s = T::one() / T::lit(90.0);
    HyperboloidObjective {
        a: u[0] * s,
        b: [u[1] * s, u[2] * s, u[3] * s],
        q: q * s,
        kappa: jet.kappa,
    }
}

pub(crate) fn check_unit_radius<T: Real>(kappa: T) -> Result<()> {
    if (kappa - T::one()).abs() > T::lit(1e-12) {
        return Err(QleError::ModeMismatch(format!(
            "the vacuum energy is defined for unit AdS radius (kappa = 1), got {kappa}"
        )));
    }
    Ok(())
}

fn monotone_in_a<T: Real>(obj: &HyperboloidObjective<T>, c: &V3<T>) -> bool {
    let a0 = obj.height(c);
    let mut prev = obj.value_at(a0, c);
    (1..=20).all(|k| {
        let v = obj.value_at(a0 + T::lit(0.25) * T::count(k), c);
        let ok = v > prev;
        prev = v;
        ok
    })
}

/// Unique minimizer of the vacuum energy over observers, with certificate.
pub fn minimize_vacuum<T: Real>(jet: &CurvatureJet<T>, seed: u64) -> Result<VacuumMinimum<T>> {
    check_unit_radius(jet.kappa)?;
    let (u, _) = bel_robinson_data(jet);
    if !is_timelike(&u) {
        return Err(QleError::InfimumNotAttained {
            u: u.map(|x| x.to_f64_lossy()),
        });
    }
    let obj = vacuum_objective(jet);
    let best = newton_minimize(&obj, [T::zero(); 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spread = T::zero();
    for _ in 0..8 {
        let start = [0; 3].map(|_| T::lit(rng.gen_range(-5.0..5.0)));
        let other = newton_minimize(&obj, start);
        spread = spread.max(linalg::norm(&linalg::sub(&other.c, &best.c)));
    }
    let bf = brute_force_minimize(&obj);
    let hess_min = linalg::sym_eigenvalues(&obj.hessian(&best.c))[0];
    let certificate = Certificate {
        gradient_norm: best.gradient_norm.to_f64_lossy(),
        hessian_min_eigenvalue: hess_min.to_f64_lossy(),
        brute_force_c: bf.map(|x| x.to_f64_lossy()),
        brute_force_distance: linalg::norm(&linalg::sub(&bf, &best.c)).to_f64_lossy(),
        multistart_spread: spread.to_f64_lossy(),
        value_at_static: obj.value(&[T::zero(); 3]).to_f64_lossy(),
        monotone_in_a: monotone_in_a(&obj, &best.c),
    };
    Ok(VacuumMinimum {
        observer: Observer::from_c(jet.kappa, best.c),
        min_value: best.value,
        u,
        certificate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatterMinimum<T> {
    pub observer: Observer<T>,
    pub min_value: T,
    /// `κ(4π/3)√(T₀₀² − Σ T₀ᵢ²)`.
    pub closed_form: T,
    pub gradient_norm: T,
}

/// Minimizes `(4π/3)T(e₀, Ae₀ + Cᵢeᵢ)` over observers.
pub fn minimize_matter<T: Real>(jet: &CurvatureJet<T>) -> Result<MatterMinimum<T>> {
    let t = jet.stress_energy_or_zero();
    let t00 = t[0][0];
    let t0 = [t[0][1], t[0][2], t[0][3]];
    let spatial = linalg::norm(&t0);
    if t00 - spatial <= T::lit(1e-12) * T::one().max(t00.abs()) {
        return Err(QleError::NotTimelike {
            t00: t00.to_f64_lossy(),
            spatial: spatial.to_f64_lossy(),
        });
    }
    let s = T::lit(4.0) * T::PI() / T::lit(3.0);
    let obj = HyperboloidObjective {
        a: s * t00,
        b: linalg::scale(s, &t0),
        q: T::zero(),
        kappa: jet.kappa,
    };
    let out = newton_minimize(&obj, [T::zero(); 3]);
    Ok(MatterMinimum {
        observer: Observer::from_c(jet.kappa, out.c),
        min_value: out.value,
        closed_form: jet.kappa * s * (t00 * t00 - spatial * spatial).sqrt(),
        gradient_norm: out.gradient_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{dust, pure_electric, JetGenerator};

    #[test]
    fn boost_fields_of_static_and_boosted_observers() {
        use crate::curvature::{decompose, Depth};
        use crate::embedding::{EmbeddingJet, Y0Path};
        use crate::expansion::physical_expansion;
        let g = SphereGrid::new(15).unwrap();
        let jet = JetGenerator::new(8).vacuum(1.0, Depth::Second).unwrap();
        let f = decompose(&jet, &g).unwrap();
        let t = physical_expansion(&f, &g).unwrap();

        let obs = Observer::static_observer(1.0);
        let emb = EmbeddingJet::build(&f, &t, &g, &obs, Y0Path::ClosedForm).unwrap();
        let bf = boost_fields(&obs, &emb, &f, &g);
        assert!(bf.v_sq[0].map(|v| v - 1.0).max_abs() < 1e-15);
        assert!(bf.v_sq[1].max_abs() < 1e-15);
        assert!(bf.v_sq[2].map(|v| v - 1.0).max_abs() < 1e-15);
        for h in bf.v4_grad_tau_sq.iter().chain(&bf.div_sq) {
            assert!(h.max_abs() < 1e-15);
        }

        let obs = Observer::from_c(1.0, [0.7, -1.2, 0.4]);
        let emb = EmbeddingJet::build(&f, &t, &g, &obs, Y0Path::ClosedForm).unwrap();
        let bf = boost_fields(&obs, &emb, &f, &g);
        assert!(bf.v_sq[0].map(|v| v - 1.0).max_abs() < 1e-13);
        assert!((&bf.div_sq[0] - &leading_divergence_direct(&obs, &g)).max_abs() < 1e-10);
        assert!((&bf.div_sq[1] - &bf.div_sq[0]).max_abs() > 1e-6);
    }

    #[test]
    fn observer_conditions() {
        assert!(is_observer(&Observer::static_observer(1.0f64).killing).0);
        assert!(is_observer(&Observer::from_c(1.0f64, [0.3, -2.0, 1.1]).killing).0);
        let bad = KillingField {
            a: 1.0,
            b: [2.0, 0.0, 0.0],
            c: [0.0; 3],
            d: [0.0; 3],
            kappa: 1.0,
        };
        assert!(!is_observer(&bad).0);
        assert!(Observer::new(bad).is_err());
        // A rotating observer: A D = −B × C with the hyperboloid condition.
        let b = [0.3, 0.0, 0.0];
        let c = [0.0, 0.4, 0.0];
        let d_dir = linalg::scale(-1.0, &linalg::cross(&b, &c));
        let mut a = 1.0f64;
        for _ in 0..50 {
            let d = linalg::scale(1.0 / a, &d_dir);
            a = (1.0 + 0.09 + 0.16 - linalg::dot(&d, &d)).sqrt();
        }
        let k = KillingField {
            a,
            b,
            c,
            d: linalg::scale(1.0 / a, &d_dir),
            kappa: 1.0,
        };
        let (ok, res) = is_observer(&k);
        assert!(ok, "{res:?}");
        assert!(a >= (1.0 + 0.16f64).sqrt() - 1e-15);
    }

    #[test]
    fn objective_derivatives_match_finite_differences() {
        let obj = HyperboloidObjective {
            a: 1.3f64,
            b: [0.2, -0.4, 0.1],
            q: 0.7,
            kappa: 1.0,
        };
        let c = [0.3, 0.5, -0.2];
        let h = 1e-6;
        let g = obj.gradient(&c);
        let hs = obj.hessian(&c);
        for i in 0..3 {
            let mut cp = c;
            let mut cm = c;
            cp[i] += h;
            cm[i] -= h;
            let fd = (obj.value(&cp) - obj.value(&cm)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
            let gp = obj.gradient(&cp);
            let gm = obj.gradient(&cm);
            for j in 0..3 {
                assert!(((gp[j] - gm[j]) / (2.0 * h) - hs[j][i]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn pure_electric_minimum_is_static() {
        let jet = pure_electric(1.0, 1.0).unwrap();
        let m = minimize_vacuum(&jet, 3).unwrap();
        assert!((m.min_value - 0.1).abs() < 1e-14);
        assert!(linalg::norm(&m.observer.c()) < 1e-12);
        assert!(m.certificate.brute_force_distance < 1e-6);
    }

    #[test]
    fn random_vacuum_minimum_is_certified() {
        let mut gen = JetGenerator::new(77);
        for _ in 0..5 {
            let jet = gen.vacuum(1.0, crate::curvature::Depth::Point).unwrap();
            let m = minimize_vacuum(&jet, 1).unwrap();
            let cert = m.certificate;
            assert!(cert.gradient_norm < 1e-10);
            assert!(cert.hessian_min_eigenvalue > 0.0);
            assert!(cert.multistart_spread < 1e-8, "{cert:?} {:?}", m.observer);
            assert!(cert.brute_force_distance < 1e-6);
            assert!(cert.monotone_in_a);
            assert!(m.min_value.to_f64_lossy() <= cert.value_at_static + 1e-15);
        }
    }

    #[test]
    fn zero_weyl_has_no_minimizer() {
        let jet = CurvatureJet::<f64>::zero(1.0);
        assert!(matches!(minimize_vacuum(&jet, 0), Err(QleError::InfimumNotAttained { .. })));
    }

    #[test]
    fn matter_minimum_matches_closed_form() {
        let m = minimize_matter(&dust(1.0, 1.0)).unwrap();
        assert!((m.min_value - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        let mut gen = JetGenerator::new(5);
        for _ in 0..5 {
            let jet = gen.matter(1.0);
            let m = minimize_matter(&jet).unwrap();
            assert!((m.min_value - m.closed_form).abs() < 1e-8 * m.closed_form.max(1.0));
        }
        let mut null = dust(1.0, 1.0);
        let mut t = null.stress_energy.unwrap();
        t[0][1] = 1.0;
        t[1][0] = 1.0;
        null.stress_energy = Some(t);
        assert!(matches!(minimize_matter(&null), Err(QleError::NotTimelike { .. })));
    }
}
