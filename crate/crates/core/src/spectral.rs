//! Eigendecomposition of H and the associated Fourier analysis.
//!
//! Modes ξ index eigenpairs (λ_ξ, u_ξ) sorted by ascending eigenvalue, with
//! each eigenvector's first significant component made positive so CSV
//! output is reproducible. The forward transform projects onto the
//! eigenbasis, the inverse expands, Plancherel holds by orthonormality, and
//! Sobolev norms are spectral sums
//!
//! ```text
//! ‖f‖_{H^s} = (Σ_ξ (1+λ_ξ)^s |f̂(ξ)|²)^{1/2},
//! ```
//!
//! computed in mode space only — never through operator powers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{HamiltonianMatrix, LatticeSpec};

/// Dense eigensolves are refused above this size.
pub const MAX_DENSE_EIGEN: usize = 4000;

/// Orthonormal eigenbasis of an assembled Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// site × mode, columns are eigenvectors.
    eigenvectors: DMatrix<f64>,
    lambda_min: f64,
}

/// Coefficients of a site function in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector(pub Vec<Complex64>);

impl ModeVector {
    pub fn zeros(modes: usize) -> Self {
        ModeVector(vec![Complex64::new(0.0, 0.0); modes])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Full symmetric eigendecomposition; requires dense storage of size
/// ≤ [`MAX_DENSE_EIGEN`] (reduce R otherwise).
pub fn eigendecompose(h: &HamiltonianMatrix) -> Result<SpectralDecomposition> {
    let n = h.size();
    if n > MAX_DENSE_EIGEN {
        return Err(Error::Resource(format!(
            "eigendecompose: {n} sites exceed the dense limit {MAX_DENSE_EIGEN}; reduce the lattice radius"
        )));
    }
    let dense = h.dense().ok_or_else(|| {
        Error::Resource(format!(
            "eigendecompose: matrix with {n} sites is stored sparse; reduce the lattice radius below the dense threshold"
        ))
    })?;

    let max_iter = 30 * n.max(16);
    let eig = nalgebra::SymmetricEigen::try_new(dense.clone(), f64::EPSILON, max_iter)
        .ok_or_else(|| {
            Error::Numeric(format!(
                "eigendecompose: symmetric eigensolver did not converge within {max_iter} iterations on a {n}x{n} matrix"
            ))
        })?;

    // Ascending eigenvalue order, deterministic sign convention.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::<f64>::zeros(n, n);
    for (mode, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let max_abs = col.amax();
        let sign = col
            .iter()
            .find(|v| v.abs() > 1e-12 * max_abs)
            .map(|v| v.signum())
            .unwrap_or(1.0);
        for k in 0..n {
            eigenvectors[(k, mode)] = sign * col[k];
        }
    }

    let dec = SpectralDecomposition {
        lambda_min: eigenvalues[0],
        eigenvalues,
        eigenvectors,
    };
    dec.verify(h)?;
    Ok(dec)
}

impl SpectralDecomposition {
    /// Orthonormality and residual tolerances; failure means the eigensolve
    /// cannot be trusted and is reported as a numeric error.
    fn verify(&self, h: &HamiltonianMatrix) -> Result<()> {
        let n = self.mode_count();
        if self.lambda_min < h.potential_floor {
            return Err(Error::Numeric(format!(
                "eigendecompose: smallest eigenvalue {} below the potential floor {}",
                self.lambda_min, h.potential_floor
            )));
        }
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        if worst > 1e-10 {
            return Err(Error::Numeric(format!(
                "eigendecompose: orthonormality defect {worst:.3e} exceeds 1e-10"
            )));
        }
        for mode in 0..n {
            let u: Vec<f64> = self.eigenvectors.column(mode).iter().cloned().collect();
            let hu = h.apply(&u)?;
            let lambda = self.eigenvalues[mode];
            let mut res = 0.0;
            for k in 0..n {
                let r = hu[k] - lambda * u[k];
                res += r * r;
            }
            let res = res.sqrt();
            if res > 1e-9 * (1.0 + lambda) {
                return Err(Error::Numeric(format!(
                    "eigendecompose: residual {res:.3e} for mode {mode} (lambda = {lambda}) exceeds 1e-9·(1+lambda)"
                )));
            }
        }
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, mode: usize) -> f64 {
        self.eigenvalues[mode]
    }

    /// Smallest eigenvalue of this decomposition (the witnessed part of the
    /// paper-level infimum over all spacings).
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn eigenvector(&self, mode: usize) -> DVector<f64> {
        self.eigenvectors.column(mode).into()
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// f̂(ξ) = Σ_k f(k) u_ξ(k) for a complex site function.
    pub fn forward(&self, f: &[Complex64]) -> Result<ModeVector> {
        let n = self.mode_count();
        if f.len() != n {
            return Err(Error::InvalidArgument(format!(
                "forward transform: expected {n} site values, got {}",
                f.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(n);
        for mode in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += f[k] * self.eigenvectors[(k, mode)];
            }
            coeffs.push(acc);
        }
        Ok(ModeVector(coeffs))
    }

    pub fn forward_real(&self, f: &[f64]) -> Result<ModeVector> {
        let n = self.mode_count();
        if f.len() != n {
            return Err(Error::InvalidArgument(format!(
                "forward transform: expected {n} site values, got {}",
                f.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(n);
        for mode in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += f[k] * self.eigenvectors[(k, mode)];
            }
            coeffs.push(Complex64::new(acc, 0.0));
        }
        Ok(ModeVector(coeffs))
    }

    /// f(k) = Σ_ξ f̂(ξ) u_ξ(k).
    pub fn inverse(&self, fhat: &ModeVector) -> Result<Vec<Complex64>> {
        let n = self.mode_count();
        if fhat.len() != n {
            return Err(Error::InvalidArgument(format!(
                "inverse transform: expected {n} coefficients, got {}",
                fhat.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for mode in 0..n {
            let c = fhat.0[mode];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            for k in 0..n {
                out[k] += c * self.eigenvectors[(k, mode)];
            }
        }
        Ok(out)
    }

    /// (1+λ_ξ)^s weight of one mode.
    pub fn sobolev_weight(&self, mode: usize, s: f64) -> f64 {
        (1.0 + self.eigenvalues[mode]).powf(s)
    }

    /// ‖f‖_{H^s} = (Σ_ξ (1+λ_ξ)^s |f̂(ξ)|²)^{1/2}.
    pub fn sobolev_norm(&self, fhat: &ModeVector, s: f64) -> f64 {
        fhat.0
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &l)| (1.0 + l).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Sample a continuum function at the lattice sites x = h·m.
pub fn sample_continuum<F>(spec: &LatticeSpec, phi: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut out = Vec::with_capacity(spec.site_count());
    for idx in 0..spec.site_count() {
        let x = spec.coordinate(idx);
        let v = phi(&x);
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sample_continuum: non-finite value at x = {x:?}"
            )));
        }
        out.push(v);
    }
    Ok(out)
}
