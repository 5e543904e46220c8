use num_complex::Complex64 as C64;

use super::{index, levels, Controls, Level, DIM};
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// Interaction energy u and Rydberg loss rate γ (both rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalModel {
    u: f64,
    gamma: f64,
}

impl InternalModel {
    pub fn new(u: f64, gamma: f64) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::domain("interaction energy u must be finite"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!(
                "loss rate gamma must be >= 0, got {gamma}"
            )));
        }
        Ok(Self { u, gamma })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_u(self, u: f64) -> Result<Self> {
        Self::new(u, self.gamma)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.u, gamma)
    }
}

fn diagonal(model: &InternalModel, c: &Controls, idx: usize) -> C64 {
    let (a, b) = levels(idx);
    let mut d = C64::default();
    if a == Level::R {
        d += C64::new(c.delta[0], -model.gamma);
    }
    if b == Level::R {
        d += C64::new(c.delta[1], -model.gamma);
    }
    if a == Level::R && b == Level::R {
        d += model.u;
    }
    d
}

/// Dense 9×9 matrix of the internal Hamiltonian for the given controls:
/// u on |rr⟩, (δⱼ − iγ) for every atom in |r⟩, and −Ωⱼ/2 coupling |g⟩ⱼ ↔ |r⟩ⱼ.
pub fn build_hamiltonian(model: &InternalModel, c: &Controls) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(DIM);
    for i in 0..DIM {
        h[(i, i)] = diagonal(model, c, i);
    }
    let (g, r) = (Level::G, Level::R);
    let half1 = C64::new(-0.5 * c.omega[0], 0.0);
    let half2 = C64::new(-0.5 * c.omega[1], 0.0);
    for other in Level::ALL {
        h[(index(g, other), index(r, other))] = half1;
        h[(index(r, other), index(g, other))] = half1;
        h[(index(other, g), index(other, r))] = half2;
        h[(index(other, r), index(other, g))] = half2;
    }
    h
}

/// out = −i·H·ψ for every internal block of a vector laid out as
/// `psi[internal * stride + k]`, `k < stride`. With `stride = 1` this is the
/// bare nine-level problem; larger strides carry a motional index.
pub fn apply_hamiltonian(
    model: &InternalModel,
    c: &Controls,
    psi: &[C64],
    out: &mut [C64],
    stride: usize,
) {
    let diag: [C64; DIM] = std::array::from_fn(|i| diagonal(model, c, i));
    let h1 = -0.5 * c.omega[0];
    let h2 = -0.5 * c.omega[1];
    let minus_i = C64::new(0.0, -1.0);
    for i in 0..DIM {
        let (a, b) = levels(i);
        let partner1 = match a {
            Level::G => Some(index(Level::R, b)),
            Level::R => Some(index(Level::G, b)),
            Level::E => None,
        };
        let partner2 = match b {
            Level::G => Some(index(a, Level::R)),
            Level::R => Some(index(a, Level::G)),
            Level::E => None,
        };
        for k in 0..stride {
            let mut acc = diag[i] * psi[i * stride + k];
            if let Some(p) = partner1 {
                acc += psi[p * stride + k] * h1;
            }
            if let Some(p) = partner2 {
                acc += psi[p * stride + k] * h2;
            }
            out[i * stride + k] = minus_i * acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::internal_dynamics::is_qubit_state;

    fn controls() -> Controls {
        Controls {
            omega: [1.3, -0.4],
            delta: [0.7, 2.1],
        }
    }

    #[test]
    fn zero_controls_give_zero_matrix() {
        let h = build_hamiltonian(&InternalModel::new(0.0, 0.0).unwrap(), &Controls::default());
        assert_eq!(h, DenseMatrix::zeros(DIM));
    }

    #[test]
    fn interaction_only() {
        let h = build_hamiltonian(&InternalModel::new(2.5, 0.0).unwrap(), &Controls::default());
        for i in 0..DIM {
            for j in 0..DIM {
                let expected = if i == 8 && j == 8 { 2.5 } else { 0.0 };
                assert_eq!(h[(i, j)], C64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn anti_hermitian_part_is_loss_projector() {
        let gamma = 0.3;
        let h = build_hamiltonian(&InternalModel::new(5.0, gamma).unwrap(), &controls());
        let hd = h.adjoint();
        for i in 0..DIM {
            for j in 0..DIM {
                let anti = (h[(i, j)] - hd[(i, j)]) * 0.5;
                let (a, b) = levels(i);
                let n_r = (a == Level::R) as u8 + (b == Level::R) as u8;
                let expected = if i == j {
                    C64::new(0.0, -gamma * n_r as f64)
                } else {
                    C64::default()
                };
                assert!((anti - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn e_level_is_dark() {
        let h = build_hamiltonian(&InternalModel::new(5.0, 0.1).unwrap(), &controls());
        let ee = index(Level::E, Level::E);
        for j in 0..DIM {
            assert_eq!(h[(ee, j)], C64::default());
            assert_eq!(h[(j, ee)], C64::default());
        }
        // atom 2 sits in e, so |ge⟩ only couples through atom 1
        let ge = index(Level::G, Level::E);
        let re = index(Level::R, Level::E);
        for j in 0..DIM {
            if j != ge && j != re {
                assert_eq!(h[(ge, j)], C64::default());
            }
        }
        assert!(is_qubit_state(ge));
    }

    #[test]
    fn structured_apply_matches_dense() {
        let model = InternalModel::new(5.0, 0.2).unwrap();
        let c = controls();
        let h = build_hamiltonian(&model, &c);
        let psi: Vec<C64> = (0..DIM)
            .map(|i| C64::new(i as f64 * 0.3 - 1.0, 0.1 * i as f64))
            .collect();
        let dense: Vec<C64> = h
            .matvec(&psi)
            .into_iter()
            .map(|v| v * C64::new(0.0, -1.0))
            .collect();
        let mut out = vec![C64::default(); DIM];
        apply_hamiltonian(&model, &c, &psi, &mut out, 1);
        for i in 0..DIM {
            assert!((out[i] - dense[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_negative_gamma() {
        assert!(InternalModel::new(1.0, -1e-3).is_err());
    }
}
