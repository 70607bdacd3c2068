//! Random curvature jets that satisfy the pointwise constraints exactly up to
//! roundoff, obtained by projecting random parameters onto the solution set of
//! the assembled linear constraints.

use super::jet::{CurvatureJet, Mode};
use super::tensor::{eta, weyl_from_electric_magnetic, M4, Tensor4};
use crate::error::{QleError, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// How many derivative orders a generated jet carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    Point,
    First,
    Second,
}

/// Orthonormal basis of symmetric trace-free 3×3 matrices.
fn stf_basis() -> [[[f64; 3]; 3]; 5] {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s6 = 1.0 / 6f64.sqrt();
    let mut b = [[[0.0; 3]; 3]; 5];
    b[0][0][0] = s2;
    b[0][1][1] = -s2;
    b[1][0][0] = s6;
    b[1][1][1] = s6;
    b[1][2][2] = -2.0 * s6;
    for (k, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        b[2 + k][i][j] = s2;
        b[2 + k][j][i] = s2;
    }
    b
}

/// Ten Weyl tensors spanning the Weyl space (five electric, five magnetic).
pub fn weyl_basis() -> Vec<Tensor4<f64>> {
    let b = stf_basis();
    let z = [[0.0; 3]; 3];
    let mut out = Vec::with_capacity(10);
    for m in &b {
        out.push(weyl_from_electric_magnetic(m, &z));
    }
    for m in &b {
        out.push(weyl_from_electric_magnetic(&z, m));
    }
    out
}

fn combine(basis: &[Tensor4<f64>], coeffs: &[f64]) -> Tensor4<f64> {
    let mut t = Tensor4::zero();
    for (b, c) in basis.iter().zip(coeffs) {
        t.axpy(*c, b);
    }
    t
}

/// Null-space basis (columns) and the SVD pseudo-inverse solution of `A x = b`.
fn null_space_and_particular(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = 1e-10 * smax.max(1.0);
    let vt = svd.v_t.as_ref().expect("requested V");
    let cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= tol)
        .map(|k| vt.row(k).transpose())
        .collect();
    // columns of V beyond the number of singular values are also in the null space
    let mut all = cols;
    if vt.nrows() > svd.singular_values.len() {
        for k in svd.singular_values.len()..vt.nrows() {
            all.push(vt.row(k).transpose());
        }
    }
    let ns = if all.is_empty() { DMatrix::zeros(a.ncols(), 0) } else { DMatrix::from_columns(&all) };
    let x = svd
        .solve(b, tol)
        .map_err(|e| QleError::Unsupported(format!("least-squares solve failed: {e}")))?;
    let res = (a * &x - b).amax();
    Ok((ns, x, res))
}

/// Linear map from 40 parameters (ten per direction) to the first-derivative
/// divergence `Σ_μ η^μ ∇_μ W_{μbcd}` as a 64-vector.
fn divergence_matrix(basis: &[Tensor4<f64>]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(64, 40);
    for mu in 0..4 {
        for (k, bk) in basis.iter().enumerate() {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        a[(b * 16 + c * 4 + d, mu * 10 + k)] += eta::<f64>(mu) * bk.at(mu, b, c, d);
                    }
                }
            }
        }
    }
    a
}

fn pairs() -> Vec<(usize, usize)> {
    let mut p = Vec::with_capacity(10);
    for mu in 0..4 {
        for nu in mu..4 {
            p.push((mu, nu));
        }
    }
    p
}

/// Linear map from 100 parameters (ten per symmetric derivative pair) to
/// `Σ_ν η^ν ∇_μ∇_ν W_{νbcd}` indexed `(μ, b, c, d)`.
fn second_divergence_matrix(basis: &[Tensor4<f64>]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(256, 100);
    for (p, (m1, m2)) in pairs().into_iter().enumerate() {
        let mut add = |mu: usize, nu: usize| {
            for (k, bk) in basis.iter().enumerate() {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            a[(mu * 64 + b * 16 + c * 4 + d, p * 10 + k)] += eta::<f64>(nu) * bk.at(nu, b, c, d);
                        }
                    }
                }
            }
        };
        add(m1, m2);
        if m1 != m2 {
            add(m2, m1);
        }
    }
    a
}

fn expand_second(basis: &[Tensor4<f64>], x: &DVector<f64>) -> Vec<Tensor4<f64>> {
    let mut out = vec![Tensor4::zero(); 16];
    for (p, (mu, nu)) in pairs().into_iter().enumerate() {
        let t = combine(basis, &x.as_slice()[p * 10..p * 10 + 10]);
        out[mu * 4 + nu] = t.clone();
        out[nu * 4 + mu] = t;
    }
    out
}

/// Minimal-norm second-derivative jet compatible with the commutator trace of
/// `jet`, plus `extra` times a random element of the homogeneous solutions.
fn second_derivatives(jet: &CurvatureJet<f64>, rng: Option<&mut ChaCha8Rng>, extra: f64) -> Result<Vec<Tensor4<f64>>> {
    let basis = weyl_basis();
    let a = second_divergence_matrix(&basis);
    let target = DVector::from_vec(jet.commutator_trace());
    let (ns, mut x, res) = null_space_and_particular(&a, &target)?;
    if res > 1e-10 * target.amax().max(1.0) {
        return Err(QleError::Unsupported(format!("second-derivative constraint has no solution (residual {res:e})")));
    }
    if let Some(rng) = rng {
        let c = DVector::from_fn(ns.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal) * extra);
        x += &ns * c;
    }
    Ok(expand_second(&basis, &x))
}

/// Seeded generator of constraint-satisfying jets.
#[derive(Debug, Clone)]
pub struct JetGenerator {
    rng: ChaCha8Rng,
    /// Standard deviation of the Weyl parameters.
    pub scale: f64,
}

impl JetGenerator {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), scale: 1.0 }
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample::<f64, _>(StandardNormal)
    }

    /// Random symmetric trace-free matrix.
    pub fn stf(&mut self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for b in stf_basis().iter() {
            let c = self.normal() * self.scale;
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += c * b[i][j];
                }
            }
        }
        m
    }

    pub fn weyl(&mut self) -> Tensor4<f64> {
        let e = self.stf();
        let b = self.stf();
        weyl_from_electric_magnetic(&e, &b)
    }

    /// Vacuum jet with the requested derivative depth.
    pub fn vacuum(&mut self, kappa: f64, depth: Depth) -> Result<CurvatureJet<f64>> {
        let mut jet = CurvatureJet::vacuum(kappa, self.weyl());
        if depth == Depth::Point {
            return Ok(jet);
        }
        let basis = weyl_basis();
        let a = divergence_matrix(&basis);
        let (ns, _, _) = null_space_and_particular(&a, &DVector::zeros(64))?;
        let c = DVector::from_fn(ns.ncols(), |_, _| self.normal() * self.scale);
        let x = &ns * c;
        jet.d_weyl = Some((0..4).map(|mu| combine(&basis, &x.as_slice()[mu * 10..mu * 10 + 10])).collect());
        if depth == Depth::Second {
            let scale = self.scale;
            jet.d2_weyl = Some(second_derivatives(&jet, Some(&mut self.rng), scale)?);
        }
        Ok(jet)
    }

    /// Matter jet whose stress-energy has a timelike, future-directed `T(e₀, ·)`.
    pub fn matter(&mut self, kappa: f64) -> CurvatureJet<f64> {
        let w = self.weyl();
        let mut t: M4<f64> = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in a..4 {
                let v = 0.3 * self.normal();
                t[a][b] = v;
                t[b][a] = v;
            }
        }
        let spatial = (t[0][1].powi(2) + t[0][2].powi(2) + t[0][3].powi(2)).sqrt();
        t[0][0] = spatial + 0.2 + self.rng.gen::<f64>();
        CurvatureJet::matter(kappa, w, t)
    }

    /// Random point on the observer hyperboloid `A = √(κ² + |C|²)` with `|C| ≤ c_max`.
    pub fn observer_c(&mut self, c_max: f64) -> [f64; 3] {
        let v = [self.normal(), self.normal(), self.normal()];
        let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-300);
        let r = c_max * self.rng.gen::<f64>();
        [r * v[0] / nv, r * v[1] / nv, r * v[2] / nv]
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

/// Built-in exact family: `E = diag(2μ, −μ, −μ)`, `B = 0`, `∇W = 0` and the
/// minimal-norm second derivative compatible with the commutator constraint.
pub fn pure_electric(kappa: f64, mu: f64) -> Result<CurvatureJet<f64>> {
    let e = [[2.0 * mu, 0.0, 0.0], [0.0, -mu, 0.0], [0.0, 0.0, -mu]];
    let mut jet = CurvatureJet::from_electric_magnetic(kappa, &e, &[[0.0; 3]; 3]);
    jet.d_weyl = Some(vec![Tensor4::zero(); 4]);
    jet.d2_weyl = Some(second_derivatives(&jet, None, 0.0)?);
    Ok(jet)
}

/// Built-in family with arbitrary electric/magnetic parts, `∇W = 0` and the
/// minimal-norm second derivative.
pub fn parallel_family(kappa: f64, e: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> Result<CurvatureJet<f64>> {
    let mut jet = CurvatureJet::from_electric_magnetic(kappa, e, b);
    jet.d_weyl = Some(vec![Tensor4::zero(); 4]);
    jet.d2_weyl = Some(second_derivatives(&jet, None, 0.0)?);
    Ok(jet)
}

/// Dust at rest: `T = diag(density, 0, 0, 0)` with vanishing Weyl tensor.
pub fn dust(kappa: f64, density: f64) -> CurvatureJet<f64> {
    let mut t = [[0.0; 4]; 4];
    t[0][0] = density;
    CurvatureJet::matter(kappa, Tensor4::zero(), t)
}

impl CurvatureJet<f64> {
    /// Converts the jet to another scalar type.
    pub fn cast<T: crate::scalar::Real>(&self) -> CurvatureJet<T> {
        let t4 = |t: &Tensor4<f64>| Tensor4(t.0.iter().map(|x| T::lit(*x)).collect());
        let m4 = |m: &M4<f64>| {
            let mut out = [[T::zero(); 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    out[a][b] = T::lit(m[a][b]);
                }
            }
            out
        };
        CurvatureJet {
            kappa: T::lit(self.kappa),
            lambda: T::lit(self.lambda),
            mode: self.mode,
            weyl: t4(&self.weyl),
            ricci: self.ricci.as_ref().map(m4),
            stress_energy: self.stress_energy.as_ref().map(m4),
            d_weyl: self.d_weyl.as_ref().map(|d| d.iter().map(t4).collect()),
            d2_weyl: self.d2_weyl.as_ref().map(|d| d.iter().map(t4).collect()),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        self.mode == Mode::Vacuum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::jet::validate;

    #[test]
    fn generated_vacuum_jets_validate() {
        let mut g = JetGenerator::new(7);
        for _ in 0..3 {
            let jet = g.vacuum(1.0, Depth::Second).unwrap();
            let rep = validate(&jet).unwrap();
            for r in &rep.rows {
                assert!(r.pass, "{r:?}");
                assert!(r.residual < 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn divergence_free_space_dimension() {
        let basis = weyl_basis();
        let (ns, _, _) = null_space_and_particular(&divergence_matrix(&basis), &DVector::zeros(64)).unwrap();
        // 40 parameters, 16 independent divergence conditions
        assert_eq!(ns.ncols(), 24, "{}", ns.ncols());
    }

    #[test]
    fn pure_electric_needs_nonzero_second_derivative() {
        let jet = pure_electric(1.0, 1.0).unwrap();
        assert!(validate(&jet).unwrap().pass);
        let norm: f64 = jet.d2_weyl.as_ref().unwrap().iter().map(|t| t.max_abs()).fold(0.0, f64::max);
        assert!(norm > 1e-3);
    }

    #[test]
    fn matter_jets_validate() {
        let mut g = JetGenerator::new(3);
        for _ in 0..5 {
            let jet = g.matter(1.0);
            assert!(validate(&jet).unwrap().pass);
            let t = jet.stress_energy.unwrap();
            assert!(t[0][0] > (t[0][1].powi(2) + t[0][2].powi(2) + t[0][3].powi(2)).sqrt());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = JetGenerator::new(11).vacuum(1.0, Depth::Second).unwrap();
        let b = JetGenerator::new(11).vacuum(1.0, Depth::Second).unwrap();
        assert_eq!(a, b);
    }
}
