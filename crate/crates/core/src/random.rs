//! Seeded synthetic inputs.
//!
//! All randomness flows through [`Xoshiro256PlusPlus`] seeded with
//! `seed_from_u64`, so a seed fully determines every generated object.

use rand::{Rng, SeedableRng};
use rand_distr::{StandardNormal, Uniform};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::spectral::ElectronicSystem;

pub type SeededRng = Xoshiro256PlusPlus;

pub fn seeded_rng(seed: u64) -> SeededRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / C64::new(norm, 0.0);
        }
    }
}

/// Random `n`-level system.
///
/// Energies start at `E_0 = 0` and grow by independent `U(0.5, 1.5)·gap_scale`
/// steps. The coupling is the Hermitian part `(G + G†)/2` of a complex
/// Gaussian matrix, scaled by `coupling_scale`.
pub fn generate_system(n: usize, seed: u64, gap_scale: f64, coupling_scale: f64) -> Result<ElectronicSystem> {
    if n < 2 {
        return Err(Error::Config(format!("generator needs N >= 2, got {n}")));
    }
    if !(gap_scale > 0.0 && gap_scale.is_finite()) || !coupling_scale.is_finite() {
        return Err(Error::Config("gap_scale must be positive and coupling_scale finite".into()));
    }
    let mut rng = seeded_rng(seed);
    let steps = Uniform::new(0.5, 1.5).expect("valid range");
    let mut energies = Vec::with_capacity(n);
    let mut e = 0.0;
    energies.push(e);
    for _ in 1..n {
        e += rng.sample(steps) * gap_scale;
        energies.push(e);
    }
    let g = CMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng));
    let mu = (&g + g.adjoint()) * C64::new(0.5 * coupling_scale, 0.0);
    ElectronicSystem::new(energies, mu)
}
