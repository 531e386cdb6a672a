//! Truncated lattice geometry and the discrete Schrödinger operator.
//!
//! Sites are x = h·m with multi-index m ∈ Zⁿ, ‖m‖_∞ ≤ R, enumerated
//! lexicographically. The operator
//!
//! ```text
//! H = -h⁻² L + V,    (L u)(k) = Σ_j [u(k+h v_j) + u(k−h v_j)] − 2n u(k)
//! ```
//!
//! is assembled as a symmetric matrix with Dirichlet (zero-extension)
//! boundary: stencil reads outside the box contribute nothing, which keeps
//! H symmetric positive definite with smallest eigenvalue ≥ V0.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sites beyond this cap refuse to enumerate (configurable per spec).
pub const DEFAULT_SITE_CAP: usize = 1_000_000;
/// Dense storage below, CSR at or above this site count.
pub const SPARSE_THRESHOLD: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Values outside the box are treated as zero.
    Dirichlet,
}

/// Geometry of the truncated lattice hZⁿ ∩ [−hR, hR]ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    dimension: usize,
    spacing: f64,
    radius: i64,
    boundary: Boundary,
    site_count: usize,
    /// Lexicographic strides: index = Σ_d (m_d + R) · strides[d].
    strides: Vec<usize>,
}

impl LatticeSpec {
    pub fn new(dimension: usize, spacing: f64, radius: i64) -> Result<Self> {
        Self::with_site_cap(dimension, spacing, radius, DEFAULT_SITE_CAP)
    }

    pub fn with_site_cap(dimension: usize, spacing: f64, radius: i64, cap: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("lattice: dimension must be >= 1".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lattice: spacing must be positive, got {spacing}"
            )));
        }
        if radius < 0 {
            return Err(Error::InvalidArgument(format!(
                "lattice: radius must be >= 0, got {radius}"
            )));
        }
        let width = 2 * radius as u128 + 1;
        let mut count: u128 = 1;
        for _ in 0..dimension {
            count = count.saturating_mul(width);
            if count > cap as u128 {
                return Err(Error::Resource(format!(
                    "lattice: site count (2*{radius}+1)^{dimension} exceeds cap {cap}"
                )));
            }
        }
        let site_count = count as usize;
        let width = width as usize;
        let mut strides = vec![0usize; dimension];
        let mut s = 1usize;
        for d in (0..dimension).rev() {
            strides[d] = s;
            s *= width;
        }
        Ok(LatticeSpec {
            dimension,
            spacing,
            radius,
            boundary: Boundary::Dirichlet,
            site_count,
            strides,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    fn width(&self) -> usize {
        2 * self.radius as usize + 1
    }

    /// Lexicographic index of a multi-index, or None if outside the box.
    pub fn index_of(&self, m: &[i64]) -> Option<usize> {
        if m.len() != self.dimension {
            return None;
        }
        let mut idx = 0usize;
        for (d, &md) in m.iter().enumerate() {
            if md.abs() > self.radius {
                return None;
            }
            idx += (md + self.radius) as usize * self.strides[d];
        }
        Some(idx)
    }

    /// Multi-index of a lexicographic site index.
    pub fn multi_index(&self, idx: usize) -> Vec<i64> {
        debug_assert!(idx < self.site_count);
        let w = self.width();
        (0..self.dimension)
            .map(|d| ((idx / self.strides[d]) % w) as i64 - self.radius)
            .collect()
    }

    /// Physical coordinate x = h·m of a site.
    pub fn coordinate(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .into_iter()
            .map(|m| self.spacing * m as f64)
            .collect()
    }

    /// ‖m‖_∞ of a site.
    pub fn sup_norm(&self, idx: usize) -> i64 {
        let w = self.width();
        (0..self.dimension)
            .map(|d| (((idx / self.strides[d]) % w) as i64 - self.radius).abs())
            .max()
            .unwrap()
    }

    /// All multi-indices in lexicographic order.
    pub fn enumerate_sites(&self) -> Vec<Vec<i64>> {
        (0..self.site_count).map(|i| self.multi_index(i)).collect()
    }

    /// Neighbor index along ±e_d, or None across the Dirichlet boundary.
    fn neighbor(&self, idx: usize, d: usize, step: i64) -> Option<usize> {
        let w = self.width();
        let md = ((idx / self.strides[d]) % w) as i64 - self.radius;
        let nd = md + step;
        if nd.abs() > self.radius {
            None
        } else {
            Some((idx as i64 + step * self.strides[d] as i64) as usize)
        }
    }
}

/// Scalars the stencil can act on (real and complex site functions).
pub trait StencilScalar:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
}

impl StencilScalar for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl StencilScalar for num_complex::Complex64 {
    fn zero() -> Self {
        num_complex::Complex64::new(0.0, 0.0)
    }
}

/// Apply the plain (h-free) nearest-neighbor Laplacian L to a site function.
pub fn apply_discrete_laplacian<T: StencilScalar>(spec: &LatticeSpec, u: &[T]) -> Result<Vec<T>> {
    if u.len() != spec.site_count() {
        return Err(Error::InvalidArgument(format!(
            "laplacian: expected {} site values, got {}",
            spec.site_count(),
            u.len()
        )));
    }
    let stencil = |idx: usize| {
        let mut acc = u[idx] * (-2.0 * spec.dimension() as f64);
        for d in 0..spec.dimension() {
            if let Some(j) = spec.neighbor(idx, d, 1) {
                acc = acc + u[j];
            }
            if let Some(j) = spec.neighbor(idx, d, -1) {
                acc = acc + u[j];
            }
        }
        acc
    };
    let out = if spec.site_count() >= 1 << 14 {
        (0..spec.site_count()).into_par_iter().map(stencil).collect()
    } else {
        (0..spec.site_count()).map(stencil).collect()
    };
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Monomial {
    pub coefficient: f64,
    /// One exponent per dimension.
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone)]
pub enum PotentialKind {
    Constant(f64),
    Polynomial(Vec<Monomial>),
    Tabulated(Vec<f64>),
}

/// Multiplication operator V with positivity floor V0.
#[derive(Debug, Clone)]
pub struct Potential {
    pub kind: PotentialKind,
    /// V0: every site value must satisfy V(k) ≥ V0 > 0.
    pub floor: f64,
}

impl Potential {
    pub fn constant(v0: f64) -> Result<Self> {
        if !(v0 > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "constant potential must be positive, got {v0}"
            )));
        }
        Ok(Potential {
            kind: PotentialKind::Constant(v0),
            floor: v0,
        })
    }

    pub fn polynomial(monomials: Vec<Monomial>, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "potential floor must be positive, got {floor}"
            )));
        }
        Ok(Potential {
            kind: PotentialKind::Polynomial(monomials),
            floor,
        })
    }

    pub fn tabulated(values: Vec<f64>, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "potential floor must be positive, got {floor}"
            )));
        }
        Ok(Potential {
            kind: PotentialKind::Tabulated(values),
            floor,
        })
    }

    /// V at a site of `spec`.
    pub fn evaluate(&self, spec: &LatticeSpec, idx: usize) -> Result<f64> {
        match &self.kind {
            PotentialKind::Constant(v0) => Ok(*v0),
            PotentialKind::Polynomial(monomials) => {
                let x = spec.coordinate(idx);
                let mut v = 0.0;
                for mono in monomials {
                    if mono.powers.len() != spec.dimension() {
                        return Err(Error::InvalidPotential(format!(
                            "monomial has {} exponents for dimension {}",
                            mono.powers.len(),
                            spec.dimension()
                        )));
                    }
                    let mut term = mono.coefficient;
                    for (xd, &p) in x.iter().zip(&mono.powers) {
                        term *= xd.powi(p as i32);
                    }
                    v += term;
                }
                Ok(v)
            }
            PotentialKind::Tabulated(values) => {
                if values.len() != spec.site_count() {
                    return Err(Error::InvalidPotential(format!(
                        "tabulated potential has {} values for {} sites",
                        values.len(),
                        spec.site_count()
                    )));
                }
                Ok(values[idx])
            }
        }
    }
}

/// Compressed sparse rows, assembled once, immutable afterwards.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum HamiltonianStorage {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

/// The assembled operator H = −h⁻²L + V.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub spec: LatticeSpec,
    /// V(k) per site, kept for diagnostics and residual checks.
    pub potential_values: Vec<f64>,
    /// V0 of the potential used at assembly.
    pub potential_floor: f64,
    storage: HamiltonianStorage,
    /// Non-fatal diagnostics (e.g. confinement not visible on the box).
    pub warnings: Vec<String>,
}

impl HamiltonianMatrix {
    pub fn storage(&self) -> &HamiltonianStorage {
        &self.storage
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, HamiltonianStorage::Dense(_))
    }

    pub fn dense(&self) -> Option<&DMatrix<f64>> {
        match &self.storage {
            HamiltonianStorage::Dense(m) => Some(m),
            HamiltonianStorage::Sparse(_) => None,
        }
    }

    pub fn size(&self) -> usize {
        self.spec.site_count()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            HamiltonianStorage::Dense(m) => m[(i, j)],
            HamiltonianStorage::Sparse(csr) => {
                let lo = csr.row_ptr[i];
                let hi = csr.row_ptr[i + 1];
                match csr.col_idx[lo..hi].binary_search(&j) {
                    Ok(k) => csr.values[lo + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Matrix–vector product H u.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.size() {
            return Err(Error::InvalidArgument(format!(
                "hamiltonian: expected {} values, got {}",
                self.size(),
                u.len()
            )));
        }
        match &self.storage {
            HamiltonianStorage::Dense(m) => {
                let v = nalgebra::DVector::from_column_slice(u);
                Ok((m * v).data.into())
            }
            HamiltonianStorage::Sparse(csr) => {
                let out: Vec<f64> = (0..self.size())
                    .into_par_iter()
                    .map(|i| {
                        let lo = csr.row_ptr[i];
                        let hi = csr.row_ptr[i + 1];
                        let mut acc = 0.0;
                        for k in lo..hi {
                            acc += csr.values[k] * u[csr.col_idx[k]];
                        }
                        acc
                    })
                    .collect();
                Ok(out)
            }
        }
    }
}

/// Assemble H = −h⁻²L + V symmetrically: the diagonal is 2n/h² + V(k), the
/// off-diagonal is −1/h² exactly for nearest neighbors.
pub fn assemble_hamiltonian(spec: &LatticeSpec, potential: &Potential) -> Result<HamiltonianMatrix> {
    let n = spec.site_count();
    let mut v_values = Vec::with_capacity(n);
    for idx in 0..n {
        let v = potential.evaluate(spec, idx)?;
        if !(v > 0.0) || v < potential.floor {
            return Err(Error::InvalidPotential(format!(
                "V = {v} at site {:?} violates the floor {}",
                spec.multi_index(idx),
                potential.floor
            )));
        }
        v_values.push(v);
    }

    let mut warnings = Vec::new();
    if matches!(potential.kind, PotentialKind::Polynomial(_)) && spec.radius() >= 1 {
        let mut max_shell = f64::NEG_INFINITY;
        let mut max_interior = f64::NEG_INFINITY;
        for idx in 0..n {
            if spec.sup_norm(idx) == spec.radius() {
                max_shell = max_shell.max(v_values[idx]);
            } else {
                max_interior = max_interior.max(v_values[idx]);
            }
        }
        if max_shell <= max_interior {
            warnings.push(format!(
                "potential does not grow towards the boundary shell (max shell V = {max_shell}, max interior V = {max_interior}); confinement is not visible on this box"
            ));
        }
    }

    let h2inv = 1.0 / (spec.spacing() * spec.spacing());
    let diag_kinetic = 2.0 * spec.dimension() as f64 * h2inv;
    let storage = if n < SPARSE_THRESHOLD {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for idx in 0..n {
            m[(idx, idx)] = diag_kinetic + v_values[idx];
            for d in 0..spec.dimension() {
                if let Some(j) = spec.neighbor(idx, d, 1) {
                    m[(idx, j)] = -h2inv;
                    m[(j, idx)] = -h2inv;
                }
            }
        }
        HamiltonianStorage::Dense(m)
    } else {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for idx in 0..n {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * spec.dimension() + 1);
            row.push((idx, diag_kinetic + v_values[idx]));
            for d in 0..spec.dimension() {
                for step in [-1i64, 1] {
                    if let Some(j) = spec.neighbor(idx, d, step) {
                        row.push((j, -h2inv));
                    }
                }
            }
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        HamiltonianStorage::Sparse(CsrMatrix {
            row_ptr,
            col_idx,
            values,
        })
    };

    Ok(HamiltonianMatrix {
        spec: spec.clone(),
        potential_values: v_values,
        potential_floor: potential.floor,
        storage,
        warnings,
    })
}

/// Fraction of squared mass sitting outside radius `fraction`·R; a quick
/// truncation-pollution diagnostic for initial data.
pub fn outer_mass_fraction(spec: &LatticeSpec, u: &[f64], fraction: f64) -> f64 {
    let cut = (fraction * spec.radius() as f64).floor() as i64;
    let mut outer = 0.0;
    let mut total = 0.0;
    for (idx, &v) in u.iter().enumerate() {
        let w = v * v;
        total += w;
        if spec.sup_norm(idx) > cut {
            outer += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}
