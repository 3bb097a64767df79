use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// One powder orientation of the field in the NV frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

/// Midpoint grid over θ ∈ [0, π/2] (the θ → π − θ mirror is implied) and
/// φ ∈ [0, 2π), weights ∝ sin θ summing to one.
pub fn orientation_grid(n_theta: usize, n_phi: usize) -> Vec<Orientation> {
    let n_theta = n_theta.max(1);
    let n_phi = n_phi.max(1);
    let dt = FRAC_PI_2 / n_theta as f64;
    let thetas: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * dt).collect();
    let norm: f64 = thetas.iter().map(|t| t.sin()).sum::<f64>() * n_phi as f64;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for &theta in &thetas {
        for j in 0..n_phi {
            out.push(Orientation {
                theta,
                phi: 2.0 * PI * j as f64 / n_phi as f64,
                weight: theta.sin() / norm,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrainSampling {
    /// Gauss-Hermite nodes.
    #[default]
    Quadrature,
    /// Seeded Gaussian draws.
    MonteCarlo,
}

/// (e_x, weight) samples of a zero-mean Gaussian with the given FWHM (MHz).
pub fn strain_nodes(fwhm: f64, n: usize, sampling: StrainSampling, seed: u64) -> Vec<(f64, f64)> {
    if fwhm <= 0.0 || n <= 1 {
        return vec![(0.0, 1.0)];
    }
    let sigma = fwhm / (8.0 * 2f64.ln()).sqrt();
    match sampling {
        StrainSampling::Quadrature => gauss_hermite(n)
            .into_iter()
            .map(|(x, w)| (std::f64::consts::SQRT_2 * sigma * x, w / PI.sqrt()))
            .collect(),
        StrainSampling::MonteCarlo => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, sigma).expect("sigma is positive");
            let w = 1.0 / n as f64;
            (0..n).map(|_| (normal.sample(&mut rng), w)).collect()
        }
    }
}

/// Golub-Welsch nodes and weights for ∫ exp(−x²) f(x) dx.
fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut nodes: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], PI.sqrt() * v0 * v0)
        })
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let nodes = strain_nodes(2.354820045, 9, StrainSampling::Quadrature, 0);
        let m0: f64 = nodes.iter().map(|n| n.1).sum();
        let m2: f64 = nodes.iter().map(|n| n.1 * n.0 * n.0).sum();
        let m4: f64 = nodes.iter().map(|n| n.1 * n.0.powi(4)).sum();
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m2 - 1.0).abs() < 1e-9);
        assert!((m4 - 3.0).abs() < 1e-8);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let a = strain_nodes(21.0, 64, StrainSampling::MonteCarlo, 5);
        let b = strain_nodes(21.0, 64, StrainSampling::MonteCarlo, 5);
        let c = strain_nodes(21.0, 64, StrainSampling::MonteCarlo, 6);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
