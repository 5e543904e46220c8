//! Two-atom internal dynamics: states, pulse schedules, the model Hamiltonian and
//! its propagation.
//!
//! Each atom has a ground qubit pair |g⟩, |e⟩ and a Rydberg level |r⟩. The
//! two-atom basis is ordered `gg, ge, gr, eg, ee, er, rg, re, rr`, i.e. the index
//! of |a b⟩ is `3 * a + b` with `g = 0, e = 1, r = 2`.

mod hamiltonian;
mod propagate;
mod pulse;

use std::fmt;

use num_complex::Complex64 as C64;

pub use hamiltonian::{apply_hamiltonian, build_hamiltonian, InternalModel};
pub use propagate::{propagate, write_trajectory_csv, PropagateOptions, Sample, Trajectory};
pub use pulse::{Controls, Envelope, PulseSchedule, PulseSegment};

pub const DIM: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    G = 0,
    E = 1,
    R = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::R];

    fn symbol(self) -> char {
        match self {
            Level::G => 'g',
            Level::E => 'e',
            Level::R => 'r',
        }
    }
}

/// Index of |a b⟩ in the two-atom basis.
pub const fn index(a: Level, b: Level) -> usize {
    3 * a as usize + b as usize
}

/// Levels of atom 1 and atom 2 for a basis index.
pub fn levels(idx: usize) -> (Level, Level) {
    (Level::ALL[idx / 3], Level::ALL[idx % 3])
}

/// Basis label such as `"gr"`.
pub fn label(idx: usize) -> String {
    let (a, b) = levels(idx);
    format!("{}{}", a.symbol(), b.symbol())
}

/// The four computational basis states in truth-table order gg, ge, eg, ee.
pub const QUBIT_BASIS: [usize; 4] = [
    index(Level::G, Level::G),
    index(Level::G, Level::E),
    index(Level::E, Level::G),
    index(Level::E, Level::E),
];

pub fn is_qubit_state(idx: usize) -> bool {
    let (a, b) = levels(idx);
    a != Level::R && b != Level::R
}

/// Amplitudes over the nine two-atom basis states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomState(pub [C64; DIM]);

impl TwoAtomState {
    pub fn basis(a: Level, b: Level) -> Self {
        let mut amps = [C64::default(); DIM];
        amps[index(a, b)] = C64::new(1.0, 0.0);
        Self(amps)
    }

    /// (|g⟩ + |e⟩)(|g⟩ + |e⟩)/2.
    pub fn uniform_qubit_superposition() -> Self {
        let mut amps = [C64::default(); DIM];
        for idx in QUBIT_BASIS {
            amps[idx] = C64::new(0.5, 0.0);
        }
        Self(amps)
    }

    pub fn amplitude(&self, a: Level, b: Level) -> C64 {
        self.0[index(a, b)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population left in the span of gg, ge, eg, ee.
    pub fn qubit_population(&self) -> f64 {
        QUBIT_BASIS.iter().map(|&i| self.0[i].norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for TwoAtomState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}:{:+.6}{:+.6}i", label(i), c.re, c.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_order() {
        let names: Vec<String> = (0..DIM).map(label).collect();
        assert_eq!(
            names,
            ["gg", "ge", "gr", "eg", "ee", "er", "rg", "re", "rr"]
        );
        for i in 0..DIM {
            let (a, b) = levels(i);
            assert_eq!(index(a, b), i);
        }
        assert_eq!(QUBIT_BASIS, [0, 1, 3, 4]);
    }

    #[test]
    fn superposition_is_normalised() {
        let s = TwoAtomState::uniform_qubit_superposition();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((s.qubit_population() - 1.0).abs() < 1e-15);
    }
}
