//! Equilibrium and information functionals on diagonal states.
//!
//! Units: `k_B = 1`, so temperatures and chemical potentials are energies and
//! entropies are dimensionless.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerances};

#[inline]
pub(crate) fn as_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Population vector over the energy levels of the working medium.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState<T> {
    populations: Vec<T>,
}

impl<T: Scalar> DiagonalState<T> {
    pub fn new(populations: Vec<T>) -> Result<Self> {
        let tol = Tolerances::<T>::default().normalization;
        if populations.len() < 2 {
            return Err(Error::TooFewLevels(populations.len()));
        }
        for (index, &p) in populations.iter().enumerate() {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::InvalidPopulation { index, value: as_f64(p) });
            }
        }
        let sum = populations.iter().fold(T::zero(), |acc, &p| acc + p);
        if (sum - T::one()).abs() > tol {
            return Err(Error::NotNormalized { sum: as_f64(sum) });
        }
        Ok(Self { populations })
    }

    /// Two-level state of a single fermionic level: `(1 − p, p)`.
    pub fn from_occupation(p: T) -> Result<Self> {
        Self::new(vec![T::one() - p, p])
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        let w = T::one() / T::from_usize(dim.max(1)).unwrap_or_else(T::one);
        Self::new(vec![w; dim])
    }

    pub fn populations(&self) -> &[T] {
        &self.populations
    }

    pub fn dim(&self) -> usize {
        self.populations.len()
    }

    /// Occupation of the highest level; for the dot this is the filled state.
    pub fn occupation(&self) -> T {
        self.populations[self.populations.len() - 1]
    }
}

/// Energy eigenvalues of the working-medium Hamiltonian.
///
/// Each level also carries a particle number, so that grand-canonical
/// quantities use `ε_i − μ·n_i`. Plain spectra have `n_i = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSpectrum<T> {
    energies: Vec<T>,
    particle_numbers: Vec<T>,
}

impl<T: Scalar> LevelSpectrum<T> {
    pub fn new(energies: Vec<T>) -> Result<Self> {
        let n = energies.len();
        Self::with_particle_numbers(energies, vec![T::zero(); n])
    }

    pub fn with_particle_numbers(energies: Vec<T>, particle_numbers: Vec<T>) -> Result<Self> {
        if energies.len() != particle_numbers.len() {
            return Err(Error::DimensionMismatch { expected: energies.len(), found: particle_numbers.len() });
        }
        for (index, &e) in energies.iter().chain(particle_numbers.iter()).enumerate() {
            if !e.is_finite() {
                return Err(Error::NonFiniteEnergy { index: index % energies.len().max(1), value: as_f64(e) });
            }
        }
        Ok(Self { energies, particle_numbers })
    }

    /// Single fermionic level at `level`: empty `(E=0, N=0)`, filled `(E=ε, N=1)`.
    pub fn single_level(level: T) -> Result<Self> {
        Self::with_particle_numbers(vec![T::zero(), level], vec![T::zero(), T::one()])
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn particle_numbers(&self) -> &[T] {
        &self.particle_numbers
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Level-averaged energy `ε̄ = (1/d) Σ ε_i`.
    pub fn mean_level(&self) -> T {
        let d = T::from_usize(self.dim()).unwrap_or_else(T::one);
        self.energies.iter().fold(T::zero(), |acc, &e| acc + e) / d
    }

    fn grand_energies(&self, mu: T) -> impl Iterator<Item = T> + '_ {
        self.energies.iter().zip(&self.particle_numbers).map(move |(&e, &n)| e - mu * n)
    }
}

/// A fermionic reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct Bath<T> {
    pub label: String,
    pub temperature: T,
    pub chemical_potential: T,
    pub coupling: T,
}

impl<T: Scalar> Bath<T> {
    pub fn new(label: impl Into<String>, temperature: T, chemical_potential: T, coupling: T) -> Result<Self> {
        let label = label.into();
        let bad = |reason: &str| Error::InvalidBath { label: label.clone(), reason: reason.to_owned() };
        if !(temperature.is_finite() && temperature > T::zero()) {
            return Err(bad("temperature must be finite and > 0"));
        }
        if !chemical_potential.is_finite() {
            return Err(bad("chemical potential must be finite"));
        }
        if !(coupling.is_finite() && coupling > T::zero()) {
            return Err(bad("coupling must be finite and > 0"));
        }
        Ok(Self { label, temperature, chemical_potential, coupling })
    }
}

/// Gibbs (grand-canonical) populations for a spectrum at `(T, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState<T> {
    state: DiagonalState<T>,
}

impl<T: Scalar> ThermalState<T> {
    pub fn new(spectrum: &LevelSpectrum<T>, temperature: T, chemical_potential: T) -> Result<Self> {
        if !(temperature > T::zero()) {
            return Err(Error::InvalidBath { label: "thermal".into(), reason: "temperature must be > 0".into() });
        }
        let shifted: Vec<T> = spectrum.grand_energies(chemical_potential).collect();
        let ground = shifted.iter().copied().fold(T::infinity(), T::min);
        let weights: Vec<T> = shifted.iter().map(|&e| (-(e - ground) / temperature).exp()).collect();
        let z = weights.iter().fold(T::zero(), |acc, &w| acc + w);
        let mut populations: Vec<T> = weights.into_iter().map(|w| w / z).collect();
        // Renormalise once more so the sum is exact to rounding.
        let sum = populations.iter().fold(T::zero(), |acc, &p| acc + p);
        populations.iter_mut().for_each(|p| *p = *p / sum);
        Ok(Self { state: DiagonalState::new(populations)? })
    }

    pub fn of_bath(spectrum: &LevelSpectrum<T>, bath: &Bath<T>) -> Result<Self> {
        Self::new(spectrum, bath.temperature, bath.chemical_potential)
    }

    pub fn state(&self) -> &DiagonalState<T> {
        &self.state
    }

    pub fn into_state(self) -> DiagonalState<T> {
        self.state
    }
}

/// Logistic occupation `1 / (e^x + 1)`, evaluated on the branch that cannot overflow.
#[inline]
pub fn logistic_occupation<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        let e = (-x).exp();
        e / (T::one() + e)
    } else {
        T::one() / (T::one() + x.exp())
    }
}

/// Fermi–Dirac occupation of a level at energy `level` in contact with `bath`.
#[inline]
pub fn fermi_occupation<T: Scalar>(level: T, bath: &Bath<T>) -> T {
    fermi(level, bath.temperature, bath.chemical_potential)
}

#[inline]
pub(crate) fn fermi<T: Scalar>(level: T, temperature: T, mu: T) -> T {
    logistic_occupation((level - mu) / temperature)
}

/// `−x ln x` with the continuity convention `0 ln 0 = 0`.
#[inline]
pub(crate) fn entropy_term<T: Scalar>(p: T) -> T {
    if p > T::zero() {
        -p * p.ln()
    } else {
        T::zero()
    }
}

/// Binary entropy of a single fermionic level with occupation `p`.
#[inline]
pub fn occupation_entropy<T: Scalar>(p: T) -> T {
    entropy_term(p) + entropy_term(T::one() - p)
}

pub fn shannon_entropy<T: Scalar>(state: &DiagonalState<T>) -> T {
    state.populations().iter().fold(T::zero(), |acc, &p| acc + entropy_term(p))
}

fn check_dims<T: Scalar>(state: &DiagonalState<T>, spectrum: &LevelSpectrum<T>) -> Result<()> {
    if state.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: spectrum.dim() });
    }
    Ok(())
}

/// `U = Σ p_i ε_i`.
pub fn mean_energy<T: Scalar>(state: &DiagonalState<T>, spectrum: &LevelSpectrum<T>) -> Result<T> {
    check_dims(state, spectrum)?;
    Ok(state.populations().iter().zip(spectrum.energies()).fold(T::zero(), |acc, (&p, &e)| acc + p * e))
}

/// Covariance between the state and the Hamiltonian over the level index,
/// `Σ_i (p_i − 1/d)(ε_i − ε̄)`. Equals `U − ε̄`.
pub fn state_hamiltonian_covariance<T: Scalar>(state: &DiagonalState<T>, spectrum: &LevelSpectrum<T>) -> Result<T> {
    check_dims(state, spectrum)?;
    let d = T::from_usize(state.dim()).unwrap_or_else(T::one);
    let mean = spectrum.mean_level();
    Ok(state
        .populations()
        .iter()
        .zip(spectrum.energies())
        .fold(T::zero(), |acc, (&p, &e)| acc + (p - T::one() / d) * (e - mean)))
}

/// `Var = Σ p_i (ε_i − U)²`, accumulated in centred form.
pub fn energy_variance<T: Scalar>(state: &DiagonalState<T>, spectrum: &LevelSpectrum<T>) -> Result<T> {
    let u = mean_energy(state, spectrum)?;
    Ok(state.populations().iter().zip(spectrum.energies()).fold(T::zero(), |acc, (&p, &e)| acc + p * (e - u) * (e - u)))
}

/// Kullback–Leibler divergence `D(p‖q) = Σ p_i ln(p_i / q_i)`.
pub fn relative_entropy<T: Scalar>(state: &DiagonalState<T>, reference: &DiagonalState<T>) -> Result<T> {
    if state.dim() != reference.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: reference.dim() });
    }
    let mut d = T::zero();
    for (index, (&p, &q)) in state.populations().iter().zip(reference.populations()).enumerate() {
        if p > T::zero() {
            if q <= T::zero() {
                return Err(Error::SupportViolation { index });
            }
            d = d + p * (p / q).ln();
        }
    }
    // Rounding can leave a tiny negative value for p ≈ q.
    Ok(d.max(T::zero()))
}

/// Nonequilibrium (grand) free energy `F = Σ p_i (ε_i − μ n_i) − T·S`.
pub fn nonequilibrium_free_energy<T: Scalar>(
    state: &DiagonalState<T>,
    spectrum: &LevelSpectrum<T>,
    bath: &Bath<T>,
) -> Result<T> {
    check_dims(state, spectrum)?;
    let u = state
        .populations()
        .iter()
        .zip(spectrum.grand_energies(bath.chemical_potential))
        .fold(T::zero(), |acc, (&p, e)| acc + p * e);
    Ok(u - bath.temperature * shannon_entropy(state))
}
