//! The Bel–Robinson tensor of a Weyl tensor.

use super::tensor::{eta, Tensor4};
use crate::scalar::Real;

/// `Q_{μναβ} = W_{ρμσα}W^ρ_ν^σ_β + W_{ρμσβ}W^ρ_ν^σ_α − ½ g_{μν} W_α^{ρστ} W_{βρστ}`.
pub fn bel_robinson<T: Real>(w: &Tensor4<T>) -> Tensor4<T> {
    // M[μ][α][ν][β] = Σ_{ρσ} η^ρ η^σ W_{ρμσα} W_{ρνσβ}
    let mut m = [T::zero(); 256];
    for mu in 0..4 {
        for al in 0..4 {
            for nu in 0..4 {
                for be in 0..4 {
                    let mut s = T::zero();
                    for r in 0..4 {
                        for q in 0..4 {
                            s += eta::<T>(r) * eta::<T>(q) * w.at(r, mu, q, al) * w.at(r, nu, q, be);
                        }
                    }
                    m[((mu * 4 + al) * 4 + nu) * 4 + be] = s;
                }
            }
        }
    }
    // N[α][β] = W_α^{ρστ} W_{βρστ}
    let mut nn = [[T::zero(); 4]; 4];
    for (al, row) in nn.iter_mut().enumerate() {
        for (be, v) in row.iter_mut().enumerate() {
            let mut s = T::zero();
            for r in 0..4 {
                for q in 0..4 {
                    for t in 0..4 {
                        s += eta::<T>(r) * eta::<T>(q) * eta::<T>(t) * w.at(al, r, q, t) * w.at(be, r, q, t);
                    }
                }
            }
            *v = s;
        }
    }
    let mut out = Tensor4::zero();
    for mu in 0..4 {
        for nu in 0..4 {
            for al in 0..4 {
                for be in 0..4 {
                    let mut v = m[((mu * 4 + al) * 4 + nu) * 4 + be] + m[((mu * 4 + be) * 4 + nu) * 4 + al];
                    if mu == nu {
                        v -= T::lit(0.5) * eta::<T>(mu) * nn[al][be];
                    }
                    out.set(mu, nu, al, be, v);
                }
            }
        }
    }
    out
}

/// `U = (Q(e₀,e₀,e₀,e₀), Q(e₀,e₀,e₀,eᵢ))`.
pub fn bel_robinson_u<T: Real>(q: &Tensor4<T>) -> [T; 4] {
    [q.at(0, 0, 0, 0), q.at(0, 0, 0, 1), q.at(0, 0, 0, 2), q.at(0, 0, 0, 3)]
}

/// The same vector from electric/magnetic contractions:
/// `(½ΣW²_{0kmn} + ΣW²_{0m0n}, 2ΣW_{0m0n}W_{0min})`.
pub fn u_from_components<T: Real>(w: &Tensor4<T>) -> [T; 4] {
    let mut u0 = T::zero();
    for k in 1..4 {
        for m in 1..4 {
            for n in 1..4 {
                u0 += T::lit(0.5) * w.at(0, k, m, n).powi(2);
            }
            u0 += w.at(0, k, 0, m).powi(2);
        }
    }
    let mut u = [u0, T::zero(), T::zero(), T::zero()];
    for (i, ui) in u.iter_mut().enumerate().skip(1) {
        let mut s = T::zero();
        for m in 1..4 {
            for n in 1..4 {
                s += w.at(0, m, 0, n) * w.at(0, m, i, n);
            }
        }
        *ui = T::lit(2.0) * s;
    }
    u
}

/// Largest violation of full symmetry and of the `g^{μν}` trace.
pub fn symmetry_defect<T: Real>(q: &Tensor4<T>) -> T {
    let mut d = T::zero();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for e in 0..4 {
                    let v = q.at(a, b, c, e);
                    d = d
                        .max((v - q.at(b, a, c, e)).abs())
                        .max((v - q.at(a, b, e, c)).abs())
                        .max((v - q.at(c, b, a, e)).abs());
                }
            }
        }
    }
    for c in 0..4 {
        for e in 0..4 {
            let tr: T = (0..4).map(|a| eta::<T>(a) * q.at(a, a, c, e)).sum();
            d = d.max(tr.abs());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::tensor::weyl_from_electric_magnetic;

    #[test]
    fn pure_electric_values() {
        let e: [[f64; 3]; 3] = [[2.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        let w = weyl_from_electric_magnetic(&e, &[[0.0; 3]; 3]);
        let q: Tensor4<f64> = bel_robinson(&w);
        let u = bel_robinson_u(&q);
        assert!((u[0] - 6.0).abs() < 1e-12);
        assert!(u[1].abs() + u[2].abs() + u[3].abs() < 1e-12);
        assert!(symmetry_defect(&q) < 1e-12);
    }

    #[test]
    fn general_weyl_matches_component_formula() {
        let e: [[f64; 3]; 3] = [[0.7, 0.2, -0.4], [0.2, -0.1, 0.3], [-0.4, 0.3, -0.6]];
        let b = [[-0.3, 0.5, 0.1], [0.5, 0.8, -0.2], [0.1, -0.2, -0.5]];
        let w = weyl_from_electric_magnetic(&e, &b);
        let q: Tensor4<f64> = bel_robinson(&w);
        let u = bel_robinson_u(&q);
        let v = u_from_components(&w);
        for k in 0..4 {
            assert!((u[k] - v[k]).abs() < 1e-12, "{u:?} {v:?}");
        }
        assert!(symmetry_defect(&q) < 1e-12);
        assert!(u[0] >= (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]).sqrt());
    }

    #[test]
    fn zero_weyl_gives_zero() {
        assert_eq!(bel_robinson(&Tensor4::<f64>::zero()).max_abs(), 0.0);
    }
}
