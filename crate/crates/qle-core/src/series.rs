//! Formal power series in `r` whose coefficients are fields on the sphere.

use crate::error::{QleError, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::sphere::{Field, ScalarField, TensorField};

/// `Σ_k c_k r^{leading + k}`, known for `k < coeffs.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries<F> {
    pub leading: i32,
    pub coeffs: Vec<F>,
}

impl<F> FieldSeries<F> {
    pub fn new(leading: i32, coeffs: Vec<F>) -> Self {
        Self { leading, coeffs }
    }

    /// First power of `r` that is not represented.
    pub fn truncation(&self) -> i32 {
        self.leading + self.coeffs.len() as i32
    }

    /// Coefficient of `r^power`, if it lies inside the known window.
    pub fn at_power(&self, power: i32) -> Option<&F> {
        let k = power - self.leading;
        if k < 0 {
            None
        } else {
            self.coeffs.get(k as usize)
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// `Σ_{i+j=k} op(a_i, b_j)` restricted to available indices.
pub fn cauchy_term<T: Real, A, B, C: Field<T>>(
    nodes: usize,
    a: &[A],
    b: &[B],
    k: usize,
    op: impl Fn(&A, &B) -> C,
) -> C {
    let mut out = C::zeros(nodes);
    for i in 0..=k {
        if i < a.len() && k - i < b.len() {
            out.axpy(T::one(), &op(&a[i], &b[k - i]));
        }
    }
    out
}

impl<F> FieldSeries<F> {
    /// Series product under a pointwise bilinear operation. The result keeps
    /// as many coefficients as the shorter factor.
    pub fn product<T: Real, G, H: Field<T>>(
        &self,
        other: &FieldSeries<G>,
        nodes: usize,
        op: impl Fn(&F, &G) -> H,
    ) -> FieldSeries<H> {
        let n = self.len().min(other.len());
        let coeffs = (0..n).map(|k| cauchy_term(nodes, &self.coeffs, &other.coeffs, k, &op)).collect();
        FieldSeries::new(self.leading + other.leading, coeffs)
    }
}

impl<F> FieldSeries<F> {
    /// Coefficient-wise sum of two series with the same leading power.
    pub fn plus<T: Real>(&self, other: &Self) -> Result<Self>
    where
        F: Field<T>,
    {
        if self.leading != other.leading {
            return Err(QleError::Unsupported("adding series with different leading powers".into()));
        }
        let n = self.len().min(other.len());
        let coeffs = (0..n)
            .map(|k| {
                let mut c = self.coeffs[k].clone();
                c.axpy(T::one(), &other.coeffs[k]);
                c
            })
            .collect();
        Ok(Self::new(self.leading, coeffs))
    }

    pub fn scaled<T: Real>(&self, a: T) -> Self
    where
        F: Field<T>,
    {
        Self::new(self.leading, self.coeffs.iter().map(|c| c.scaled(a)).collect())
    }

    /// Largest coefficient magnitude in the known window.
    pub fn max_abs<T: Real>(&self) -> T
    where
        F: Field<T>,
    {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.max_abs()))
    }
}

/// Tangent-plane inverse of a symmetric tensor with the normal direction
/// removed: returns `M⁻¹` on `TS²` and `0` along `n`.
pub fn tangent_inverse<T: Real>(m: &linalg::M3<T>, n: &linalg::V3<T>) -> Option<linalg::M3<T>> {
    let nn = linalg::outer(n, n);
    let full = linalg::madd(m, &nn);
    let det = linalg::det3(&full);
    if !det.is_finite() || det.abs() < T::lit(1e-12) {
        return None;
    }
    Some(linalg::msub(&linalg::cofactor_inverse(&full, det), &nn))
}

/// Inverse of a tangent tensor series on the tangent plane:
/// `q · s = P` order by order, with `q₀ = s₀⁻¹` and
/// `q_k = −q₀ Σ_{i≥1} s_i q_{k−i}`.
pub fn invert_tensor_series<T: Real>(
    s: &FieldSeries<TensorField<T>>,
    normals: &[linalg::V3<T>],
) -> Result<FieldSeries<TensorField<T>>> {
    let Some(s0) = s.coeffs.first() else {
        return Ok(FieldSeries::new(-s.leading, Vec::new()));
    };
    let mut q0 = Vec::with_capacity(s0.len());
    for (m, n) in s0.0.iter().zip(normals) {
        q0.push(tangent_inverse(m, n).ok_or_else(|| QleError::RecursionBreakdown {
            order: s.leading,
            reason: "leading metric coefficient is singular on the tangent plane".into(),
        })?);
    }
    let q0 = TensorField(q0);
    let mut q = vec![q0.clone()];
    for k in 1..s.len() {
        let mut acc = TensorField::zeros(q0.len());
        for i in 1..=k {
            acc.axpy(T::one(), &s.coeffs[i].matmul(&q[k - i]));
        }
        q.push(-&q0.matmul(&acc));
    }
    Ok(FieldSeries::new(-s.leading, q))
}

/// Pointwise operations on series of scalar fields.
pub type ScalarSeries<T> = FieldSeries<ScalarField<T>>;

impl<T: Real> FieldSeries<ScalarField<T>> {
    pub fn times(&self, other: &Self) -> Self {
        let nodes = self.coeffs.first().map_or(0, |c| c.len());
        self.product(other, nodes, |a: &ScalarField<T>, b: &ScalarField<T>| a.mul_pointwise(b))
    }

    /// `self / other`, requiring a nowhere-vanishing leading coefficient.
    pub fn divided_by(&self, other: &Self) -> Result<Self> {
        let d0 = nonvanishing_leading(other)?;
        let n = self.len().min(other.len());
        let mut out: Vec<ScalarField<T>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc.axpy(-T::one(), &other.coeffs[j].mul_pointwise(&out[k - j]));
            }
            out.push(acc.zip_with(d0, |a, b| a / b));
        }
        Ok(Self::new(self.leading - other.leading, out))
    }

    /// Square root of a series with even leading power and positive leading coefficient.
    pub fn sqrt(&self) -> Result<Self> {
        if self.leading % 2 != 0 {
            return Err(QleError::Unsupported("square root of a series with odd leading power".into()));
        }
        let f0 = nonvanishing_leading(self)?;
        if f0.0.iter().any(|&v| v <= T::zero()) {
            return Err(QleError::RecursionBreakdown {
                order: self.leading,
                reason: "negative leading coefficient under a square root".into(),
            });
        }
        let s0 = f0.map(|v| v.sqrt());
        let mut out = vec![s0.clone()];
        for k in 1..self.len() {
            let mut acc = self.coeffs[k].clone();
            for j in 1..k {
                acc.axpy(-T::one(), &out[j].mul_pointwise(&out[k - j]));
            }
            out.push(acc.zip_with(&s0, |a, b| a / (T::lit(2.0) * b)));
        }
        Ok(Self::new(self.leading / 2, out))
    }

    /// `log(f / r^leading)` as a series starting at `r⁰`.
    pub fn log(&self) -> Result<Self> {
        let f0 = nonvanishing_leading(self)?;
        if f0.0.iter().any(|&v| v <= T::zero()) {
            return Err(QleError::RecursionBreakdown {
                order: self.leading,
                reason: "non-positive leading coefficient under a logarithm".into(),
            });
        }
        let mut out = vec![f0.map(|v| v.ln())];
        for k in 1..self.len() {
            let mut acc = self.coeffs[k].scaled(T::count(k));
            for j in 1..k {
                acc.axpy(-T::count(j), &out[j].mul_pointwise(&self.coeffs[k - j]));
            }
            out.push(acc.zip_with(f0, |a, b| a / (T::count(k) * b)));
        }
        Ok(Self::new(0, out))
    }
}

fn nonvanishing_leading<T: Real>(s: &ScalarSeries<T>) -> Result<&ScalarField<T>> {
    let f0 = s.coeffs.first().ok_or_else(|| QleError::RecursionBreakdown {
        order: s.leading,
        reason: "empty series".into(),
    })?;
    if f0.0.iter().any(|v| v.abs() < T::lit(1e-14)) {
        return Err(QleError::RecursionBreakdown {
            order: s.leading,
            reason: "leading coefficient vanishes somewhere on the sphere".into(),
        });
    }
    Ok(f0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{ScalarField, SphereGrid};
    use rand::{Rng, SeedableRng};

    #[test]
    fn scalar_product_truncates_to_shorter_factor() {
        let a = FieldSeries::new(-1, vec![ScalarField(vec![1.0]), ScalarField(vec![2.0]), ScalarField(vec![3.0])]);
        let b = FieldSeries::new(2, vec![ScalarField(vec![1.0]), ScalarField(vec![-1.0])]);
        let c = a.product(&b, 1, |x: &ScalarField<f64>, y: &ScalarField<f64>| x.mul_pointwise(y));
        assert_eq!(c.leading, 1);
        assert_eq!(c.len(), 2);
        assert_eq!(c.coeffs[1].0[0], 1.0);
        assert_eq!(c.truncation(), 3);
        assert_eq!(c.at_power(2).unwrap().0[0], 1.0);
        assert!(c.at_power(0).is_none());
    }

    #[test]
    fn random_invertible_series_round_trips() {
        let grid = SphereGrid::<f64>::new(8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut coeffs = vec![grid.metric()];
        for _ in 0..5 {
            let m: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-0.5..0.5)));
            coeffs.push(grid.tensor(|n| {
                let p = linalg::projector(n);
                let s = linalg::sym(&linalg::matmul(&p, &linalg::matmul(&m, &p)));
                linalg::mscale(1.0 + n[0] * n[1], &s)
            }));
        }
        let s = FieldSeries::new(2, coeffs);
        let q = invert_tensor_series(&s, grid.normals()).unwrap();
        assert_eq!(q.leading, -2);
        let id = s.product(&q, grid.len(), |a: &TensorField<f64>, b: &TensorField<f64>| a.matmul(b));
        assert_eq!(id.leading, 0);
        assert!((&id.coeffs[0] - &grid.metric()).max_abs() < 1e-12);
        for c in &id.coeffs[1..] {
            assert!(c.max_abs() < 1e-12);
        }
    }

    fn constant_series(v: &[f64]) -> ScalarSeries<f64> {
        FieldSeries::new(0, v.iter().map(|&x| ScalarField(vec![x, x])).collect())
    }

    #[test]
    fn scalar_series_algebra_matches_taylor_coefficients() {
        // 1/(1-r) = 1 + r + r² + ..., sqrt(1+r) = 1 + r/2 - r²/8 + r³/16, log(1+r) = r - r²/2 + r³/3
        let one = constant_series(&[1.0, 0.0, 0.0, 0.0]);
        let q = one.divided_by(&constant_series(&[1.0, -1.0, 0.0, 0.0])).unwrap();
        for c in &q.coeffs {
            assert!((c.0[0] - 1.0).abs() < 1e-15);
        }
        let s = constant_series(&[1.0, 1.0, 0.0, 0.0]).sqrt().unwrap();
        let want = [1.0, 0.5, -0.125, 0.0625];
        for (c, w) in s.coeffs.iter().zip(want) {
            assert!((c.0[1] - w).abs() < 1e-15);
        }
        let l = constant_series(&[1.0, 1.0, 0.0, 0.0]).log().unwrap();
        let want = [0.0, 1.0, -0.5, 1.0 / 3.0];
        for (c, w) in l.coeffs.iter().zip(want) {
            assert!((c.0[0] - w).abs() < 1e-15);
        }
        let sq = s.times(&s);
        assert!((sq.coeffs[1].0[0] - 1.0).abs() < 1e-15 && sq.coeffs[3].0[0].abs() < 1e-15);
    }

    #[test]
    fn singular_leading_coefficient_is_reported() {
        let grid = SphereGrid::<f64>::new(4).unwrap();
        let s = FieldSeries::new(2, vec![TensorField::zeros(grid.len())]);
        assert!(matches!(
            invert_tensor_series(&s, grid.normals()),
            Err(QleError::RecursionBreakdown { .. })
        ));
    }
}
