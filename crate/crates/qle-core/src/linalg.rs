//! Fixed-size vector and matrix helpers for ambient Cartesian components.

use crate::scalar::Real;

pub type V3<T> = [T; 3];
pub type M3<T> = [[T; 3]; 3];
pub type T3<T> = [[[T; 3]; 3]; 3];

#[inline]
pub fn zero3<T: Real>() -> V3<T> {
    [T::zero(); 3]
}

#[inline]
pub fn zero33<T: Real>() -> M3<T> {
    [[T::zero(); 3]; 3]
}

#[inline]
pub fn zero333<T: Real>() -> T3<T> {
    [[[T::zero(); 3]; 3]; 3]
}

#[inline]
pub fn identity<T: Real>() -> M3<T> {
    let mut m = zero33();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

#[inline]
pub fn dot<T: Real>(a: &V3<T>, b: &V3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm<T: Real>(a: &V3<T>) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn add<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<T: Real>(s: T, a: &V3<T>) -> V3<T> {
    [s * a[0], s * a[1], s * a[2]]
}

#[inline]
pub fn matvec<T: Real>(m: &M3<T>, v: &V3<T>) -> V3<T> {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub fn matmul<T: Real>(a: &M3<T>, b: &M3<T>) -> M3<T> {
    let mut m = zero33();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    m
}

pub fn transpose<T: Real>(a: &M3<T>) -> M3<T> {
    let mut m = zero33();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[j][i];
        }
    }
    m
}

pub fn madd<T: Real>(a: &M3<T>, b: &M3<T>) -> M3<T> {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] += b[i][j];
        }
    }
    m
}

pub fn msub<T: Real>(a: &M3<T>, b: &M3<T>) -> M3<T> {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] -= b[i][j];
        }
    }
    m
}

pub fn mscale<T: Real>(s: T, a: &M3<T>) -> M3<T> {
    let mut m = *a;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    m
}

pub fn outer<T: Real>(a: &V3<T>, b: &V3<T>) -> M3<T> {
    let mut m = zero33();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

pub fn trace<T: Real>(a: &M3<T>) -> T {
    a[0][0] + a[1][1] + a[2][2]
}

/// Frobenius inner product `Σ a_ij b_ij`.
pub fn frob<T: Real>(a: &M3<T>, b: &M3<T>) -> T {
    let mut s = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

pub fn sym<T: Real>(a: &M3<T>) -> M3<T> {
    let h = T::lit(0.5);
    let mut m = zero33();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = h * (a[i][j] + a[j][i]);
        }
    }
    m
}

/// Tangential projector `I − n nᵀ`.
pub fn projector<T: Real>(n: &V3<T>) -> M3<T> {
    msub(&identity(), &outer(n, n))
}

/// Area form on the tangent plane: `ε_ij = ε_ijk n_k`.
pub fn area_form<T: Real>(n: &V3<T>) -> M3<T> {
    [
        [T::zero(), n[2], -n[1]],
        [-n[2], T::zero(), n[0]],
        [n[1], -n[0], T::zero()],
    ]
}

/// Levi-Civita symbol in three dimensions.
#[inline]
pub fn levi<T: Real>(i: usize, j: usize, k: usize) -> T {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => T::one(),
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -T::one(),
        _ => T::zero(),
    }
}

pub fn max_abs_v<T: Real>(a: &V3<T>) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn max_abs_m<T: Real>(a: &M3<T>) -> T {
    a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Eigenvalues of a symmetric 3×3 matrix, ascending, by cyclic Jacobi sweeps.
pub fn sym_eigenvalues<T: Real>(a: &M3<T>) -> V3<T> {
    let mut m = sym(a);
    for _ in 0..64 {
        let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
        if off <= T::epsilon() * T::lit(1e-3) * (max_abs_m(&m) + T::min_positive_value()) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if m[p][q] == T::zero() {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (T::lit(2.0) * m[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let cs = T::one() / (t * t + T::one()).sqrt();
            let sn = t * cs;
            let mut rot = identity();
            rot[p][p] = cs;
            rot[q][q] = cs;
            rot[p][q] = sn;
            rot[q][p] = -sn;
            m = matmul(&transpose(&rot), &matmul(&m, &rot));
        }
    }
    let mut ev = [m[0][0], m[1][1], m[2][2]];
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn det3<T: Real>(m: &M3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Adjugate divided by the supplied determinant.
pub fn cofactor_inverse<T: Real>(m: &M3<T>, det: T) -> M3<T> {
    let mut out = zero33();
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            out[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    out
}

/// Solves `m x = b`, or `None` when `m` is numerically singular.
pub fn solve3<T: Real>(m: &M3<T>, b: &V3<T>) -> Option<V3<T>> {
    let det = det3(m);
    let scale = max_abs_m(m).powi(3);
    if !det.is_finite() || det.abs() <= T::epsilon() * scale {
        return None;
    }
    Some(matvec(&cofactor_inverse(m, det), b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_diagonal_and_rotated_spectra() {
        let d: M3<f64> = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]];
        assert_eq!(sym_eigenvalues(&d), [-1.0, 2.0, 3.0]);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let r = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let m = matmul(&r, &matmul(&d, &transpose(&r)));
        let ev = sym_eigenvalues(&m);
        for (x, y) in ev.iter().zip([-1.0, 2.0, 3.0]) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn area_form_orients_tangent_pairs() {
        let n = [0.0f64, 0.0, 1.0];
        let e = area_form(&n);
        let u = [1.0, 0.0, 0.0];
        let v = [0.0, 1.0, 0.0];
        assert_eq!(dot(&u, &matvec(&e, &v)), 1.0);
        assert_eq!(dot(&n, &cross(&u, &v)), 1.0);
    }
}
