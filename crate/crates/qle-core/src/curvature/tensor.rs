//! Rank-4 tensors in a four-dimensional orthonormal frame with signature (−,+,+,+).

use crate::scalar::Real;
use serde::{Deserialize, Serialize};

pub type V4<T> = [T; 4];
pub type M4<T> = [[T; 4]; 4];

/// Metric signature entries `g_μμ`.
#[inline]
pub fn eta<T: Real>(mu: usize) -> T {
    if mu == 0 {
        -T::one()
    } else {
        T::one()
    }
}

#[inline]
pub fn idx4(a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * 4 + b) * 4 + c) * 4 + d
}

/// All-lower-index rank-4 tensor stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor4<T>(pub Vec<T>);

impl<T: Real> Tensor4<T> {
    pub fn zero() -> Self {
        Self(vec![T::zero(); 256])
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize, c: usize, d: usize) -> T {
        self.0[idx4(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: T) {
        self.0[idx4(a, b, c, d)] = v;
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn axpy(&mut self, s: T, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * *b;
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self(self.0.iter().map(|x| *x * s).collect())
    }

    /// `T(a, b, c, d)` for four vectors.
    pub fn contract(&self, a: &V4<T>, b: &V4<T>, c: &V4<T>, d: &V4<T>) -> T {
        let mut s = T::zero();
        for i in 0..4 {
            if a[i] == T::zero() {
                continue;
            }
            for j in 0..4 {
                if b[j] == T::zero() {
                    continue;
                }
                let ab = a[i] * b[j];
                for k in 0..4 {
                    if c[k] == T::zero() {
                        continue;
                    }
                    let abc = ab * c[k];
                    for l in 0..4 {
                        s += abc * d[l] * self.at(i, j, k, l);
                    }
                }
            }
        }
        s
    }

    /// Matrix `M[a][c] = T(e_a, b, e_c, d)`.
    pub fn slots_13(&self, b: &V4<T>, d: &V4<T>) -> M4<T> {
        let mut m = [[T::zero(); 4]; 4];
        for a in 0..4 {
            for c in 0..4 {
                let mut s = T::zero();
                for j in 0..4 {
                    for l in 0..4 {
                        s += b[j] * d[l] * self.at(a, j, c, l);
                    }
                }
                m[a][c] = s;
            }
        }
        m
    }

    /// Matrix `M[a][b] = T(e_a, e_b, c, d)`.
    pub fn slots_12(&self, c: &V4<T>, d: &V4<T>) -> M4<T> {
        let mut m = [[T::zero(); 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let mut s = T::zero();
                for k in 0..4 {
                    for l in 0..4 {
                        s += c[k] * d[l] * self.at(a, b, k, l);
                    }
                }
                m[a][b] = s;
            }
        }
        m
    }

    /// Matrix `M[a][b] = T(x, e_a, e_b, y)`.
    pub fn slots_23(&self, x: &V4<T>, y: &V4<T>) -> M4<T> {
        let mut m = [[T::zero(); 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let mut s = T::zero();
                for i in 0..4 {
                    for l in 0..4 {
                        s += x[i] * y[l] * self.at(i, a, b, l);
                    }
                }
                m[a][b] = s;
            }
        }
        m
    }

    /// Vector `v[a] = T(e_a, b, c, d)`.
    pub fn slot_1(&self, b: &V4<T>, c: &V4<T>, d: &V4<T>) -> V4<T> {
        let mut v = [T::zero(); 4];
        for (a, va) in v.iter_mut().enumerate() {
            let mut s = T::zero();
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        s += b[j] * c[k] * d[l] * self.at(a, j, k, l);
                    }
                }
            }
            *va = s;
        }
        v
    }

    /// Vector `v[a] = T(x, e_a, y, z)`.
    pub fn slot_2(&self, x: &V4<T>, y: &V4<T>, z: &V4<T>) -> V4<T> {
        let mut v = [T::zero(); 4];
        for (a, va) in v.iter_mut().enumerate() {
            let mut s = T::zero();
            for i in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        s += x[i] * y[k] * z[l] * self.at(i, a, k, l);
                    }
                }
            }
            *va = s;
        }
        v
    }

    /// Residuals of the algebraic Weyl symmetries:
    /// (antisymmetry, pair symmetry, cyclic identity, trace).
    pub fn weyl_residuals(&self) -> WeylResiduals<T> {
        let mut r = WeylResiduals::<T>::default();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let w = self.at(a, b, c, d);
                        r.antisymmetry = r
                            .antisymmetry
                            .max((w + self.at(b, a, c, d)).abs())
                            .max((w + self.at(a, b, d, c)).abs());
                        r.pair_symmetry = r.pair_symmetry.max((w - self.at(c, d, a, b)).abs());
                        r.bianchi = r
                            .bianchi
                            .max((w + self.at(a, c, d, b) + self.at(a, d, b, c)).abs());
                    }
                }
            }
        }
        for b in 0..4 {
            for d in 0..4 {
                let mut tr = T::zero();
                for a in 0..4 {
                    tr += eta::<T>(a) * self.at(a, b, a, d);
                }
                r.trace = r.trace.max(tr.abs());
            }
        }
        r
    }

    /// Applies a frame change `Λ` (orthonormal to orthonormal) to every slot.
    pub fn transformed(&self, lam: &M4<T>) -> Self {
        let mut step = self.clone();
        for slot in 0..4 {
            let mut next = Self::zero();
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            let idx = [a, b, c, d];
                            let mut s = T::zero();
                            for k in 0..4 {
                                let mut src = idx;
                                src[slot] = k;
                                s += lam[idx[slot]][k] * step.at(src[0], src[1], src[2], src[3]);
                            }
                            next.set(a, b, c, d, s);
                        }
                    }
                }
            }
            step = next;
        }
        step
    }
}

/// Symmetry defects of a Weyl candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylResiduals<T> {
    pub antisymmetry: T,
    pub pair_symmetry: T,
    pub bianchi: T,
    pub trace: T,
}

impl<T: Real> Default for WeylResiduals<T> {
    fn default() -> Self {
        Self {
            antisymmetry: T::zero(),
            pair_symmetry: T::zero(),
            bianchi: T::zero(),
            trace: T::zero(),
        }
    }
}

impl<T: Real> WeylResiduals<T> {
    pub fn max(&self) -> T {
        self.antisymmetry.max(self.pair_symmetry).max(self.bianchi).max(self.trace)
    }
}

/// Kulkarni–Nomizu-type product `g_ac h_bd − g_ad h_bc + g_bd h_ac − g_bc h_ad`.
pub fn metric_wedge<T: Real>(h: &M4<T>) -> Tensor4<T> {
    let mut t = Tensor4::zero();
    let g = |a: usize, b: usize| if a == b { eta::<T>(a) } else { T::zero() };
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let v = g(a, c) * h[b][d] - g(a, d) * h[b][c] + g(b, d) * h[a][c] - g(b, c) * h[a][d];
                    t.set(a, b, c, d, v);
                }
            }
        }
    }
    t
}

/// `g_ac g_bd − g_ad g_bc`.
pub fn metric_square<T: Real>() -> Tensor4<T> {
    let mut t = Tensor4::zero();
    let g = |a: usize, b: usize| if a == b { eta::<T>(a) } else { T::zero() };
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    t.set(a, b, c, d, g(a, c) * g(b, d) - g(a, d) * g(b, c));
                }
            }
        }
    }
    t
}

/// Weyl tensor from electric and magnetic parts in the frame of `e₀`:
/// `W_{0i0j} = E_ij`, `W_{0ijk} = ε_jkl B_li`, `W_ijkl = −ε_ijm ε_kln E_mn`.
pub fn weyl_from_electric_magnetic<T: Real>(e: &[[T; 3]; 3], b: &[[T; 3]; 3]) -> Tensor4<T> {
    use crate::linalg::levi;
    let mut w = Tensor4::zero();
    for i in 0..3 {
        for j in 0..3 {
            w.set(0, i + 1, 0, j + 1, e[i][j]);
            w.set(i + 1, 0, j + 1, 0, e[i][j]);
            w.set(0, i + 1, j + 1, 0, -e[i][j]);
            w.set(i + 1, 0, 0, j + 1, -e[i][j]);
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut v = T::zero();
                for l in 0..3 {
                    v += levi::<T>(j, k, l) * b[l][i];
                }
                w.set(0, i + 1, j + 1, k + 1, v);
                w.set(i + 1, 0, j + 1, k + 1, -v);
                w.set(j + 1, k + 1, 0, i + 1, v);
                w.set(j + 1, k + 1, i + 1, 0, -v);
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut v = T::zero();
                    for m in 0..3 {
                        for n in 0..3 {
                            v += levi::<T>(i, j, m) * levi::<T>(k, l, n) * e[m][n];
                        }
                    }
                    w.set(i + 1, j + 1, k + 1, l + 1, -v);
                }
            }
        }
    }
    w
}

/// Electric part `E_ij = W_{0i0j}`.
pub fn electric_part<T: Real>(w: &Tensor4<T>) -> [[T; 3]; 3] {
    let mut e = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            e[i][j] = w.at(0, i + 1, 0, j + 1);
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn electric_magnetic_construction_is_weyl() {
        let e = [[1.0, 0.3, -0.2], [0.3, -0.4, 0.5], [-0.2, 0.5, -0.6]];
        let b = [[0.2, -0.7, 0.1], [-0.7, 0.9, 0.4], [0.1, 0.4, -1.1]];
        let w = weyl_from_electric_magnetic(&e, &b);
        assert!(w.weyl_residuals().max() < 1e-15);
        assert_eq!(electric_part(&w), e);
    }

    #[test]
    fn metric_square_is_constant_curvature_form() {
        let g = metric_square::<f64>();
        let r = g.weyl_residuals();
        assert!(r.antisymmetry == 0.0 && r.pair_symmetry == 0.0 && r.bianchi == 0.0);
        assert_eq!(g.at(0, 1, 0, 1), -1.0);
        assert_eq!(g.at(1, 2, 1, 2), 1.0);
    }
}
