//! Seeded random states, Hermitian matrices and channels.
//!
//! Every sampler takes an explicit seed and draws from a ChaCha20 stream, so
//! results are reproducible bit-for-bit. Independent sub-streams are obtained
//! with [`derive_seed`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::channel::KrausChannel;
use super::matrix::ComplexMatrix;
use super::state::{partial_trace, vector_norm, DensityMatrix, Keep, PureState};

pub type SeededRng = ChaCha20Rng;

/// Generator for `(seed, stream)`; distinct streams never overlap.
pub fn rng(seed: u64, stream: u64) -> SeededRng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Child seed for the `index`-th independent task under `seed` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    (0..dim).map(|_| complex_gaussian(rng)).collect()
}

/// Haar-random unit vector drawn with `rng`.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    loop {
        let v = gaussian_vector(rng, dim);
        if vector_norm(&v) > 0.0 {
            return PureState::normalized(v).expect("nonzero gaussian vector");
        }
    }
}

/// Haar-random pure state, deterministic in `seed`.
pub fn random_pure_state(dim: usize, seed: u64) -> PureState {
    assert!(dim >= 1, "dimension must be positive");
    haar_state(&mut rng(seed, 0), dim)
}

/// Hilbert-Schmidt random mixed state (partial trace of a Haar state on `dim x dim`).
/// Full rank with probability one.
pub fn random_density_matrix(dim: usize, seed: u64) -> DensityMatrix {
    let psi = haar_state(&mut rng(seed, 1), dim * dim);
    partial_trace(&psi.density(), dim, dim, Keep::A).expect("consistent dimensions")
}

/// Hermitian matrix with complex Gaussian entries.
pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed, 2);
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut r));
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Orthonormalizes the columns of `m` (modified Gram-Schmidt, two passes).
fn orthonormalize_columns(m: &mut ComplexMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    for c in 0..cols {
        for _ in 0..2 {
            for prev in 0..c {
                let overlap: Complex64 = (0..rows).map(|r| m[(r, prev)].conj() * m[(r, c)]).sum();
                for r in 0..rows {
                    let v = m[(r, prev)];
                    m[(r, c)] -= overlap * v;
                }
            }
        }
        let norm = (0..rows).map(|r| m[(r, c)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..rows {
            m[(r, c)] /= norm;
        }
    }
}

/// Random CPTP map on `C^dim` with `kraus_count` Kraus operators, cut from
/// an isometry obtained by orthonormalizing a Gaussian `(kraus_count*dim) x dim`
/// matrix.
pub fn random_channel(dim: usize, kraus_count: usize, seed: u64) -> KrausChannel {
    assert!(kraus_count >= 1, "at least one Kraus operator is required");
    let mut r = rng(seed, 3);
    let mut iso = ComplexMatrix::from_fn(kraus_count * dim, dim, |_, _| complex_gaussian(&mut r));
    orthonormalize_columns(&mut iso);
    let ops = (0..kraus_count)
        .map(|i| ComplexMatrix::from_fn(dim, dim, |a, b| iso[(i * dim + a, b)]))
        .collect();
    KrausChannel::new(dim, dim, ops).expect("isometry blocks are trace preserving")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_is_normalized_and_deterministic() {
        for seed in 0..20 {
            let s = random_pure_state(5, seed);
            assert!((vector_norm(s.amplitudes()) - 1.0).abs() < 1e-12);
            assert_eq!(s, random_pure_state(5, seed));
        }
        assert_ne!(random_pure_state(5, 1), random_pure_state(5, 2));
    }

    #[test]
    fn haar_marginal_mean() {
        // E|<0|psi>|^2 = 1/dim for Haar psi
        let mut r = rng(42, 0);
        let samples = 10_000;
        let mean: f64 = (0..samples)
            .map(|_| haar_state(&mut r, 4).amplitudes()[0].norm_sqr())
            .sum::<f64>()
            / samples as f64;
        assert!((mean - 0.25).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn random_channel_is_complete() {
        for seed in 0..100 {
            let ch = random_channel(3, 4, seed);
            assert!(ch.completeness_deviation() <= 1e-10);
        }
    }

    #[test]
    fn single_kraus_channel_is_unitary() {
        let ch = random_channel(4, 1, 9);
        let k = &ch.kraus_ops()[0];
        let kk = k.matmul(&k.adjoint()).unwrap();
        assert!(kk.approx_eq(&ComplexMatrix::identity(4), 1e-12));
    }

    #[test]
    fn random_channel_output_is_a_state() {
        let ch = random_channel(3, 9, 5);
        let rho = random_density_matrix(3, 6);
        let out = ch.apply(&rho).unwrap();
        assert!(DensityMatrix::new(out.into_matrix()).is_ok());
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
