//! Tensor-product operator algebra.
//!
//! Matrices are dense `faer` matrices over `c64`. Multi-site spaces are
//! ordered left to right in waveguide order: site 0 is the most upstream node
//! and the most significant digit of a basis index. For every local space the
//! basis index 0 is the ground state (`|g>` for a spin, `|0>` for a mode).

use faer::{Mat, Side};

use crate::error::{Error, Result};

pub use faer::c64;

/// Dense complex matrix.
pub type CMat = Mat<c64>;

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub(crate) const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_TOL: f64 = 1e-9;
/// Relative threshold below which two eigenvalues count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Ordered list of local Hilbert-space dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemDims(Vec<usize>);

impl SubsystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter("empty dimension list".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter(format!("zero local dimension in {dims:?}")));
        }
        Ok(Self(dims))
    }

    /// `n` sites of local dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Self {
        assert!(n > 0 && d > 0, "uniform dims need n > 0 and d > 0");
        Self(vec![d; n])
    }

    pub fn single(d: usize) -> Self {
        assert!(d > 0, "local dimension must be positive");
        Self(vec![d])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Product of all local dimensions.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn concat(&self, other: &SubsystemDims) -> SubsystemDims {
        let mut dims = self.0.clone();
        dims.extend_from_slice(&other.0);
        SubsystemDims(dims)
    }

    /// Dimensions of the listed sites, in the given order.
    pub fn select(&self, sites: &[usize]) -> SubsystemDims {
        SubsystemDims(sites.iter().map(|&s| self.0[s]).collect())
    }

    /// Dimension of the sites `start..end` taken together.
    pub fn block(&self, start: usize, end: usize) -> usize {
        self.0[start..end].iter().product()
    }
}

/// A square operator on a tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMat,
    dims: SubsystemDims,
}

impl Operator {
    pub fn new(matrix: CMat, dims: SubsystemDims) -> Result<Self> {
        let d = dims.total();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims {:?} (total {d})",
                matrix.nrows(),
                matrix.ncols(),
                dims.as_slice()
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Operator on a single subsystem whose dimension is the matrix size.
    pub fn local(matrix: CMat) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operator must be square");
        let d = matrix.nrows();
        Self { matrix, dims: SubsystemDims::single(d) }
    }

    pub fn identity(dims: SubsystemDims) -> Self {
        let d = dims.total();
        Self { matrix: CMat::identity(d, d), dims }
    }

    pub fn zeros(dims: SubsystemDims) -> Self {
        let d = dims.total();
        Self { matrix: CMat::zeros(d, d), dims }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Operator {
        Operator { matrix: adjoint(&self.matrix), dims: self.dims.clone() }
    }

    /// `self ⊗ other`, with `other`'s sites appended after `self`'s.
    pub fn kron(&self, other: &Operator) -> Operator {
        Operator { matrix: kron(&self.matrix, &other.matrix), dims: self.dims.concat(&other.dims) }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm_l2()
    }

    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        matvec(&self.matrix, v)
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        self * other - other * self
    }

    pub fn scaled(&self, s: c64) -> Operator {
        Operator { matrix: scale(&self.matrix, s), dims: self.dims.clone() }
    }
}

fn assert_same_dims(a: &SubsystemDims, b: &SubsystemDims) {
    assert_eq!(a, b, "operator dimension mismatch");
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_same_dims(&self.dims, &rhs.dims);
        Operator { matrix: &self.matrix * &rhs.matrix, dims: self.dims.clone() }
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_same_dims(&self.dims, &rhs.dims);
        Operator { matrix: &self.matrix + &rhs.matrix, dims: self.dims.clone() }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_same_dims(&self.dims, &rhs.dims);
        Operator { matrix: &self.matrix - &rhs.matrix, dims: self.dims.clone() }
    }
}

impl std::ops::Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl std::ops::Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

/// Pure state over a tensor-product space.
#[derive(Clone, Debug)]
pub struct Ket {
    amplitudes: Vec<c64>,
    dims: SubsystemDims,
}

impl Ket {
    /// Wraps the amplitudes as given; call [`Ket::normalize`] if needed.
    pub fn new(amplitudes: Vec<c64>, dims: SubsystemDims) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {:?}",
                amplitudes.len(),
                dims.as_slice()
            )));
        }
        Ok(Self { amplitudes, dims })
    }

    pub fn basis(dims: SubsystemDims, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dims.total()];
        amplitudes[index] = ONE;
        Self { amplitudes, dims }
    }

    /// Tensor product of the given kets in order.
    pub fn product(kets: &[Ket]) -> Ket {
        let mut iter = kets.iter();
        let first = iter.next().expect("product of zero kets").clone();
        iter.fold(first, |acc, k| acc.kron(k))
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for &a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|&b| a * b));
        }
        Ket { amplitudes, dims: self.dims.concat(&other.dims) }
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amplitudes)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        let inv = 1.0 / n;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> c64 {
        assert_eq!(self.dim(), other.dim(), "ket dimension mismatch");
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &Ket) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `<self|op|self>`.
    pub fn expectation(&self, op: &Operator) -> c64 {
        let v = op.apply(&self.amplitudes);
        self.amplitudes.iter().zip(&v).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn density(&self) -> DensityMatrix {
        let d = self.dim();
        let matrix = CMat::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix { matrix, dims: self.dims.clone() }
    }

    /// Reduced density matrix of the sites in `keep`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let split = SiteSplit::new(&self.dims, keep)?;
        let psi = CMat::from_fn(split.keep_dim, split.rest_dim, |a, r| {
            self.amplitudes[split.full_index(a, r)]
        });
        let matrix = &psi * psi.adjoint();
        Ok(DensityMatrix { matrix, dims: split.keep_dims })
    }
}

/// Density matrix over a tensor-product space.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMat,
    dims: SubsystemDims,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMat, dims: SubsystemDims) -> Result<Self> {
        let op = Operator::new(matrix, dims)?;
        let dev = op.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = trace(op.matrix());
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotNormalized((tr - ONE).norm()));
        }
        let eig = eig_hermitian_matrix(op.matrix())?;
        if let Some(&min) = eig.values.last() {
            if min < -PSD_TOL {
                return Err(Error::InvalidParameter(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self { matrix: op.matrix, dims: op.dims })
    }

    /// Symmetrizes and rescales to unit trace; used for numerically produced states.
    pub(crate) fn from_matrix_normalized(matrix: CMat, dims: SubsystemDims) -> Self {
        let d = matrix.nrows();
        let h = CMat::from_fn(d, d, |i, j| (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5);
        let tr = trace(&h).re;
        Self { matrix: scale(&h, c64::new(1.0 / tr, 0.0)), dims }
    }

    pub fn maximally_mixed(dims: SubsystemDims) -> Self {
        let d = dims.total();
        let matrix = CMat::from_fn(d, d, |i, j| if i == j { c64::new(1.0 / d as f64, 0.0) } else { ZERO });
        Self { matrix, dims }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> c64 {
        trace(&self.matrix)
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { matrix: kron(&self.matrix, &other.matrix), dims: self.dims.concat(&other.dims) }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// `tr(op rho)`.
    pub fn expectation(&self, op: &Operator) -> c64 {
        trace_product(op.matrix(), &self.matrix)
    }
}

impl From<&Ket> for DensityMatrix {
    fn from(ket: &Ket) -> Self {
        ket.density()
    }
}

/// Places `local_op` at `site`, identity elsewhere.
pub fn embed(local_op: &CMat, site: usize, dims: &SubsystemDims) -> Result<Operator> {
    if site >= dims.len() {
        return Err(Error::SiteOutOfRange { site, n_sites: dims.len() });
    }
    let d_site = dims.as_slice()[site];
    if local_op.nrows() != d_site || local_op.ncols() != d_site {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator at site {site} of dimension {d_site}",
            local_op.nrows(),
            local_op.ncols()
        )));
    }
    let left = dims.block(0, site);
    let right = dims.block(site + 1, dims.len());
    Ok(Operator { matrix: embed_block(local_op, left, right), dims: dims.clone() })
}

/// `I_left ⊗ op ⊗ I_right` without forming the identities.
pub(crate) fn embed_block(op: &CMat, left: usize, right: usize) -> CMat {
    let d = op.nrows();
    let total = left * d * right;
    let mut out = CMat::zeros(total, total);
    for l in 0..left {
        for j in 0..d {
            for i in 0..d {
                let v = op[(i, j)];
                if v == ZERO {
                    continue;
                }
                let row0 = (l * d + i) * right;
                let col0 = (l * d + j) * right;
                for r in 0..right {
                    out[(row0 + r, col0 + r)] = v;
                }
            }
        }
    }
    out
}

/// Bookkeeping for splitting a multi-site index into kept and traced digits.
struct SiteSplit {
    keep_dims: SubsystemDims,
    keep_dim: usize,
    rest_dim: usize,
    // full index for (kept index, rest index), stored row-major in kept index
    full: Vec<usize>,
}

impl SiteSplit {
    fn new(dims: &SubsystemDims, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let n = dims.len();
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&s| s >= n) {
            return Err(Error::SiteOutOfRange { site: bad, n_sites: n });
        }
        let rest: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
        let keep_dims = dims.select(&keep);
        let keep_dim = keep_dims.total();
        let rest_dim: usize = rest.iter().map(|&s| dims.as_slice()[s]).product();

        let d = dims.as_slice();
        let mut full = vec![0usize; keep_dim * rest_dim];
        let mut digits = vec![0usize; n];
        for f in 0..dims.total() {
            let mut rem = f;
            for s in (0..n).rev() {
                digits[s] = rem % d[s];
                rem /= d[s];
            }
            let a = keep.iter().fold(0, |acc, &s| acc * d[s] + digits[s]);
            let r = rest.iter().fold(0, |acc, &s| acc * d[s] + digits[s]);
            full[a * rest_dim + r] = f;
        }
        Ok(Self { keep_dims, keep_dim, rest_dim, full })
    }

    fn full_index(&self, a: usize, r: usize) -> usize {
        self.full[a * self.rest_dim + r]
    }
}

/// Reduced density matrix on the sites in `keep` (kept in ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let split = SiteSplit::new(&rho.dims, keep)?;
    let m = &rho.matrix;
    let matrix = CMat::from_fn(split.keep_dim, split.keep_dim, |a, b| {
        (0..split.rest_dim).map(|r| m[(split.full_index(a, r), split.full_index(b, r))]).sum()
    });
    Ok(DensityMatrix { matrix, dims: split.keep_dims })
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMat,
    /// Index pairs of (adjacent) eigenvalues closer than the degeneracy threshold.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

impl HermitianEigen {
    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_pairs.is_empty()
    }
}

pub fn eig_hermitian(m: &Operator) -> Result<HermitianEigen> {
    eig_hermitian_matrix(m.matrix())
}

pub fn eig_hermitian_matrix(m: &CMat) -> Result<HermitianEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch("eigendecomposition of a non-square matrix".into()));
    }
    let scale_ref = m.norm_l2().max(1.0);
    let dev = hermiticity_deviation(m);
    if dev > 1e-10 * scale_ref {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: CMat::zeros(0, 0), degenerate_pairs: vec![] });
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("self-adjoint eigendecomposition: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer sorts ascending
    let values: Vec<f64> = (0..n).rev().map(|k| s[k].re).collect();
    let vectors = CMat::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    let spectral = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = DEGENERACY_TOL * spectral.max(1.0);
    let degenerate_pairs = (1..n).filter(|&k| (values[k - 1] - values[k]).abs() < tol).map(|k| (k - 1, k)).collect();
    Ok(HermitianEigen { values, vectors, degenerate_pairs })
}

/// Standard single-site operators.
pub mod ops {
    use super::*;

    pub fn identity(d: usize) -> CMat {
        CMat::identity(d, d)
    }

    /// `|g><e|`.
    pub fn sigma_minus() -> CMat {
        CMat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { ONE } else { ZERO })
    }

    pub fn sigma_plus() -> CMat {
        CMat::from_fn(2, 2, |i, j| if i == 1 && j == 0 { ONE } else { ZERO })
    }

    pub fn sigma_x() -> CMat {
        CMat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
    }

    pub fn sigma_y() -> CMat {
        // sigma_y = i(sigma_- - sigma_+) in the (g, e) ordering
        CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => I,
            (1, 0) => -I,
            _ => ZERO,
        })
    }

    /// `|e><e| - |g><g|`.
    pub fn sigma_z() -> CMat {
        CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => -ONE,
            (1, 1) => ONE,
            _ => ZERO,
        })
    }

    /// Bosonic annihilation operator on Fock states `0..=cutoff`.
    pub fn annihilation(cutoff: usize) -> CMat {
        let d = cutoff + 1;
        CMat::from_fn(d, d, |i, j| if j == i + 1 { c64::new((j as f64).sqrt(), 0.0) } else { ZERO })
    }

    pub fn number(cutoff: usize) -> CMat {
        let d = cutoff + 1;
        CMat::from_fn(d, d, |i, j| if i == j { c64::new(i as f64, 0.0) } else { ZERO })
    }

    /// `(-1)^{a†a}`.
    pub fn parity(cutoff: usize) -> CMat {
        let d = cutoff + 1;
        CMat::from_fn(d, d, |i, j| match (i == j, i % 2) {
            (true, 0) => ONE,
            (true, _) => -ONE,
            _ => ZERO,
        })
    }

    /// Exchange of two sites of equal dimension `d`.
    pub fn swap(d: usize) -> CMat {
        CMat::from_fn(d * d, d * d, |r, c| {
            let (a, b) = (r / d, r % d);
            if c == b * d + a {
                ONE
            } else {
                ZERO
            }
        })
    }
}

pub(crate) fn adjoint(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

pub(crate) fn scale(m: &CMat, s: c64) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub(crate) fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub(crate) fn trace(m: &CMat) -> c64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `tr(a b)` without forming the product.
pub(crate) fn trace_product(a: &CMat, b: &CMat) -> c64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub(crate) fn hermiticity_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn matvec(m: &CMat, v: &[c64]) -> Vec<c64> {
    assert_eq!(m.ncols(), v.len(), "matrix-vector dimension mismatch");
    let mut out = vec![ZERO; m.nrows()];
    for (j, &x) in v.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * x;
        }
    }
    out
}

pub(crate) fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}
