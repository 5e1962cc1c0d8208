//! Coherent absorbers: a downstream system B that re-absorbs everything an
//! upstream system A emits, so that the cascade A -> B settles into a pure state.
//!
//! With `rho_A = sum_k p_k |k><k|` the joint dark state is
//! `|psi0> = sum_k sqrt(p_k) |k>_A |k~>_B`, `|k~> = V |k>`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::master::{steady_state, Superoperator};
use crate::operator::{c64, eig_hermitian_matrix, kron, ops, CMat, DensityMatrix, Ket, Operator, ZERO};

/// Eigenvalues of `rho_A` below this are discarded.
pub const SPECTRUM_FLOOR: f64 = 1e-10;
/// Relative gap below which two retained eigenvalues count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Residual below which a state counts as dark.
pub const DARK_TOL: f64 = 1e-8;
/// Tolerance of the negative-counterpart symmetry conditions.
pub const SYMMETRY_TOL: f64 = 1e-8;
const UNITARY_TOL: f64 = 1e-10;

/// Residuals of the two pure-steady-state conditions and the A-B correlation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DarkStateReport {
    /// `||(c_A + c_B)|psi>||`.
    pub residual_i: f64,
    /// `||(H_casc - lambda)|psi>||`.
    pub residual_ii: f64,
    /// `<psi|H_casc|psi>`.
    pub lambda: c64,
    /// `<c_A^† c_B + c_A c_B^†> - 2 Re(<c_A^†><c_B>)`.
    pub correlation_c: f64,
    pub is_dark: bool,
}

impl DarkStateReport {
    pub fn is_dark_within(&self, tol: f64) -> bool {
        self.residual_i < tol && self.residual_ii < tol
    }
}

fn check_square(op: &Operator, what: &str) -> Result<usize> {
    let m = op.matrix();
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{what} is {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

fn check_pair(h: &Operator, c: &Operator, what: &str) -> Result<usize> {
    let d = check_square(h, what)?;
    if check_square(c, what)? != d {
        return Err(Error::DimensionMismatch(format!("{what}: Hamiltonian and jump dimensions differ")));
    }
    Ok(d)
}

/// Joint-space operators `c_A ⊗ 1`, `1 ⊗ c_B` and `H_casc`.
fn joint_operators(h_a: &Operator, c_a: &Operator, h_b: &Operator, c_b: &Operator, gamma: f64) -> Result<(CMat, CMat, CMat)> {
    let da = check_pair(h_a, c_a, "system A")?;
    let db = check_pair(h_b, c_b, "system B")?;
    let (ia, ib) = (ops::identity(da), ops::identity(db));
    let ca = kron(c_a.matrix(), &ib);
    let cb = kron(&ia, c_b.matrix());
    let mut h = kron(h_a.matrix(), &ib) + kron(&ia, h_b.matrix());
    let coupling = &ca * cb.adjoint() - ca.adjoint() * &cb;
    h += &coupling * faer::Scale(c64::new(0.0, -0.5 * gamma));
    Ok((ca, cb, h))
}

fn expect(m: &CMat, v: &[c64]) -> c64 {
    let mv = crate::operator::matvec(m, v);
    v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
}

/// Conditions for `psi` to be a pure steady state of the cascade A -> B.
pub fn check_dark_state(h_a: &Operator, c_a: &Operator, h_b: &Operator, c_b: &Operator, gamma: f64, psi: &Ket) -> Result<DarkStateReport> {
    let (ca, cb, h) = joint_operators(h_a, c_a, h_b, c_b, gamma)?;
    if psi.dim() != h.nrows() {
        return Err(Error::DimensionMismatch(format!("state of dimension {} on a joint space of dimension {}", psi.dim(), h.nrows())));
    }
    let psi = psi.clone().normalized()?;
    let v = psi.amplitudes();

    let jump = crate::operator::matvec(&(&ca + &cb), v);
    let residual_i = crate::operator::vec_norm(&jump);

    let hv = crate::operator::matvec(&h, v);
    let lambda: c64 = v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
    let diff: Vec<c64> = hv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
    let residual_ii = crate::operator::vec_norm(&diff);

    let correlation_c = correlation(&ca, &cb, |m| expect(m, v));
    Ok(DarkStateReport {
        residual_i,
        residual_ii,
        lambda,
        correlation_c,
        is_dark: residual_i < DARK_TOL && residual_ii < DARK_TOL,
    })
}

fn correlation(ca: &CMat, cb: &CMat, mean: impl Fn(&CMat) -> c64) -> f64 {
    let cross = mean(&(ca.adjoint() * cb));
    let a = mean(ca);
    let b = mean(cb);
    2.0 * cross.re - 2.0 * (a.conj() * b).re
}

/// `(C, -2(<c_A^† c_A> - |<c_A>|^2))`; the two agree on every dark state.
pub fn correlation_identity_check(rho: &DensityMatrix, c_a: &Operator, c_b: &Operator) -> Result<(f64, f64)> {
    let da = check_square(c_a, "c_A")?;
    let db = check_square(c_b, "c_B")?;
    if rho.dim() != da * db {
        return Err(Error::DimensionMismatch(format!("state of dimension {} for systems {da} x {db}", rho.dim())));
    }
    let ca = kron(c_a.matrix(), &ops::identity(db));
    let cb = kron(&ops::identity(da), c_b.matrix());
    let mean = |m: &CMat| crate::operator::trace_product(m, rho.matrix());
    let lhs = correlation(&ca, &cb, mean);
    let n_a = mean(&(ca.adjoint() * &ca)).re;
    let rhs = -2.0 * (n_a - mean(&ca).norm_sqr());
    Ok((lhs, rhs))
}

/// A constructed absorber and the joint dark state.
#[derive(Clone, Debug)]
pub struct AbsorberResult {
    pub h_b: Operator,
    pub c_b: Operator,
    /// Dark state on `A ⊗ B`.
    pub psi0: Ket,
    /// Eigenvalues of `rho_A`, descending, summing to one.
    pub spectrum: Vec<f64>,
    /// Unitary mapping the eigenbasis labels of A onto B.
    pub v: CMat,
    /// Eigenvectors of `rho_A` as columns, in the order of `spectrum`.
    pub eigenvectors: CMat,
    /// Number of eigenvalues kept above [`SPECTRUM_FLOOR`].
    pub retained: usize,
    /// Total weight of the discarded eigenvalues.
    pub discarded_weight: f64,
    pub report: DarkStateReport,
}

impl AbsorberResult {
    /// Truncation note, present when part of the spectrum fell below the floor.
    pub fn warning(&self) -> Option<String> {
        (self.retained < self.spectrum.len()).then(|| {
            format!(
                "{} of {} eigenvalues below {:e} discarded (weight {:e})",
                self.spectrum.len() - self.retained,
                self.spectrum.len(),
                SPECTRUM_FLOOR,
                self.discarded_weight
            )
        })
    }
}

fn check_unitary(v: &CMat, d: usize) -> Result<()> {
    if v.nrows() != d || v.ncols() != d {
        return Err(Error::DimensionMismatch(format!("{}x{} unitary for dimension {d}", v.nrows(), v.ncols())));
    }
    let dev = (v.adjoint() * v - ops::identity(d)).norm_max();
    if dev > UNITARY_TOL {
        return Err(Error::InvalidParameter(format!("V deviates from unitarity by {dev:e}")));
    }
    Ok(())
}

/// Stationary state of `-i[H_A, .] + gamma D[c_A]`.
pub fn steady_state_a(h_a: &Operator, c_a: &Operator, gamma: f64) -> Result<DensityMatrix> {
    check_pair(h_a, c_a, "system A")?;
    let l = Superoperator::lindblad(h_a, &[(gamma, c_a.matrix().clone())])?;
    Ok(steady_state(&l)?.rho)
}

/// Eigen-decomposition with each eigenvector's largest component made real and positive.
fn spectrum(rho: &DensityMatrix) -> Result<(Vec<f64>, CMat)> {
    let eig = eig_hermitian_matrix(rho.matrix())?;
    let mut w = eig.vectors;
    let d = w.nrows();
    for k in 0..d {
        let pivot = (0..d).max_by(|&i, &j| w[(i, k)].norm().total_cmp(&w[(j, k)].norm())).unwrap_or(0);
        let z = w[(pivot, k)];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            for i in 0..d {
                w[(i, k)] *= phase;
            }
        }
    }
    let total: f64 = eig.values.iter().map(|p| p.max(0.0)).sum();
    let p = eig.values.iter().map(|p| p.max(0.0) / total).collect();
    Ok((p, w))
}

/// Builds B from the steady state of A.
///
/// `c_B` and `H_B` act on the span of the retained `|k~>` and vanish on its
/// complement. `v` defaults to the identity.
pub fn build_absorber(h_a: &Operator, c_a: &Operator, gamma: f64, v: Option<&CMat>) -> Result<AbsorberResult> {
    let d = check_pair(h_a, c_a, "system A")?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    let v = v.cloned().unwrap_or_else(|| ops::identity(d));
    check_unitary(&v, d)?;
    let rho = steady_state_a(h_a, c_a, gamma)?;
    let (p, w) = spectrum(&rho)?;

    let retained = p.iter().take_while(|&&x| x >= SPECTRUM_FLOOR).count();
    if retained < 2 {
        return Err(Error::ZeroSpectrum { rank: retained, indices: (retained..d).collect() });
    }
    for i in 0..retained {
        for j in i + 1..retained {
            if (p[i] - p[j]).abs() < DEGENERACY_TOL * p[i].max(p[j]) {
                return Err(Error::DegenerateSpectrum { i, j, p_i: p[i], p_j: p[j] });
            }
        }
    }
    let discarded_weight: f64 = p[retained..].iter().sum();

    let h_eff = h_a.matrix() - &(c_a.matrix().adjoint() * c_a.matrix()) * faer::Scale(c64::new(0.0, 0.5 * gamma));
    let c_eig = w.adjoint() * c_a.matrix() * &w;
    let a_eig = w.adjoint() * &h_eff * &w;
    let sq: Vec<f64> = p.iter().map(|x| x.sqrt()).collect();

    let mut c_tilde = CMat::zeros(d, d);
    let mut h_tilde = CMat::zeros(d, d);
    for n in 0..retained {
        for m in 0..retained {
            let r = sq[n] / sq[m];
            c_tilde[(n, m)] = -c_eig[(m, n)] * r;
            h_tilde[(n, m)] = -(a_eig[(m, n)] * r + a_eig[(n, m)].conj() / r) * 0.5;
        }
    }
    let vt = &v * &w;
    let c_b = &vt * &c_tilde * vt.adjoint();
    let mut h_b = &vt * &h_tilde * vt.adjoint();
    h_b = CMat::from_fn(d, d, |i, j| (h_b[(i, j)] + h_b[(j, i)].conj()) * 0.5);

    let dims = h_a.dims().clone();
    let mut amps = vec![ZERO; d * d];
    let kept: f64 = p[..retained].iter().sum();
    for k in 0..retained {
        let s = (p[k] / kept).sqrt();
        for i in 0..d {
            for j in 0..d {
                amps[i * d + j] += w[(i, k)] * vt[(j, k)] * s;
            }
        }
    }
    let psi0 = Ket::new(amps, dims.concat(&dims))?.normalized()?;
    let h_b = Operator::new(h_b, dims.clone())?;
    let c_b = Operator::new(c_b, dims)?;
    let report = check_dark_state(h_a, c_a, &h_b, &c_b, gamma, &psi0)?;
    Ok(AbsorberResult { h_b, c_b, psi0, spectrum: p, v, eigenvectors: w, retained, discarded_weight, report })
}

/// `(-V H_A V^†, -V c_A V^†)`, valid when the steady state of A satisfies
/// `sqrt(p_n) <k|X|n> = sqrt(p_k) <n|X|k>` for `X = c_A` and `X = H_A,eff`
/// in a suitably phased eigenbasis.
pub fn negative_counterpart(h_a: &Operator, c_a: &Operator, gamma: f64, v: &CMat) -> Result<(Operator, Operator)> {
    let d = check_pair(h_a, c_a, "system A")?;
    check_unitary(v, d)?;
    let violation = symmetry_violation(h_a, c_a, gamma)?;
    if violation > SYMMETRY_TOL {
        return Err(Error::SymmetryViolation { violation, tolerance: SYMMETRY_TOL });
    }
    let neg = c64::new(-1.0, 0.0);
    let h_b = &(v * h_a.matrix() * v.adjoint()) * faer::Scale(neg);
    let c_b = &(v * c_a.matrix() * v.adjoint()) * faer::Scale(neg);
    Ok((Operator::new(h_b, h_a.dims().clone())?, Operator::new(c_b, h_a.dims().clone())?))
}

/// Largest relative violation of the negative-counterpart conditions after the
/// eigenvector phases are chosen to satisfy them where possible.
///
/// The conditions fix `theta_n - theta_k = (arg X_nk - arg X_kn)/2` along every
/// nonzero element; phases are propagated over a spanning tree and then every
/// element is checked.
pub fn symmetry_violation(h_a: &Operator, c_a: &Operator, gamma: f64) -> Result<f64> {
    let d = check_pair(h_a, c_a, "system A")?;
    let rho = steady_state_a(h_a, c_a, gamma)?;
    let (p, w) = spectrum(&rho)?;
    let h_eff = h_a.matrix() - &(c_a.matrix().adjoint() * c_a.matrix()) * faer::Scale(c64::new(0.0, 0.5 * gamma));
    let xs = [w.adjoint() * c_a.matrix() * &w, w.adjoint() * &h_eff * &w];
    let scale = xs.iter().map(|x| x.norm_max()).fold(1.0f64, f64::max);
    let edge_tol = 1e-12 * scale;

    let mut theta: Vec<Option<f64>> = vec![None; d];
    for root in 0..d {
        if theta[root].is_some() {
            continue;
        }
        theta[root] = Some(0.0);
        let mut queue = VecDeque::from([root]);
        while let Some(k) = queue.pop_front() {
            let tk = theta[k].unwrap_or(0.0);
            for n in 0..d {
                if theta[n].is_some() {
                    continue;
                }
                let edge = xs.iter().find(|x| x[(n, k)].norm() > edge_tol && x[(k, n)].norm() > edge_tol);
                if let Some(x) = edge {
                    theta[n] = Some(tk + 0.5 * (x[(n, k)].arg() - x[(k, n)].arg()));
                    queue.push_back(n);
                }
            }
        }
    }
    let phase: Vec<c64> = theta.iter().map(|t| c64::from_polar(1.0, t.unwrap_or(0.0))).collect();
    let sq: Vec<f64> = p.iter().map(|x| x.sqrt()).collect();
    let mut worst = 0.0f64;
    for x in &xs {
        for k in 0..d {
            for n in 0..d {
                // elements in the rephased basis |n'> = e^{i theta_n} |n>
                let kn = x[(k, n)] * phase[k].conj() * phase[n];
                let nk = x[(n, k)] * phase[n].conj() * phase[k];
                worst = worst.max((kn * sq[n] - nk * sq[k]).norm() / scale);
            }
        }
    }
    Ok(worst)
}

/// `sum_k sqrt(p_k) |k> ⊗ V|k>`; `v` defaults to the identity.
pub fn purification(rho: &DensityMatrix, v: Option<&CMat>) -> Result<Ket> {
    let d = rho.dim();
    let v = v.cloned().unwrap_or_else(|| ops::identity(d));
    check_unitary(&v, d)?;
    let (p, w) = spectrum(rho)?;
    let vw = &v * &w;
    let mut amps = vec![ZERO; d * d];
    for k in 0..d {
        if p[k] == 0.0 {
            continue;
        }
        let s = p[k].sqrt();
        for i in 0..d {
            for j in 0..d {
                amps[i * d + j] += w[(i, k)] * vw[(j, k)] * s;
            }
        }
    }
    Ket::new(amps, rho.dims().concat(rho.dims()))
}
