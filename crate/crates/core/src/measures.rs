//! Entanglement and mixedness functionals. Entropies are in bits.

use crate::error::{Error, Result};
use crate::operator::{c64, eig_hermitian_matrix, kron, ops, CMat, DensityMatrix, Ket};

/// Allowed deviation of a ket norm from one.
pub const NORM_TOL: f64 = 1e-10;

/// Von Neumann entropy in bits.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EntropyValue {
    pub bits: f64,
}

/// `tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let n = m.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += (m[(i, j)] * m[(j, i)]).re;
        }
    }
    acc
}

/// `1 - tr(rho^2)`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// `-sum p log2 p` over a probability spectrum, with round-off negatives clamped.
pub fn shannon_bits(p: &[f64]) -> f64 {
    p.iter().map(|&v| if v > 0.0 { -v * v.log2() } else { 0.0 }).sum::<f64>().max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<EntropyValue> {
    let eig = eig_hermitian_matrix(rho.matrix())?;
    Ok(EntropyValue { bits: shannon_bits(&eig.values) })
}

/// Entropy of the first `first_n` sites of a pure state.
pub fn block_entropy(psi: &Ket, first_n: usize) -> Result<EntropyValue> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized((norm - 1.0).abs()));
    }
    let n = psi.dims().len();
    if first_n > n {
        return Err(Error::SiteOutOfRange { site: first_n, n_sites: n });
    }
    if first_n == 0 || first_n == n {
        return Ok(EntropyValue { bits: 0.0 });
    }
    let left = psi.dims().block(0, first_n);
    let right = psi.dims().block(first_n, n);
    let a = psi.amplitudes();
    let m = CMat::from_fn(left, right, |i, j| a[i * right + j]);
    // the smaller Gram matrix carries the whole nonzero spectrum
    let gram = if left <= right { &m * m.adjoint() } else { m.adjoint() * &m };
    let gram = CMat::from_fn(gram.nrows(), gram.ncols(), |i, j| (gram[(i, j)] + gram[(j, i)].conj()) * 0.5);
    let eig = eig_hermitian_matrix(&gram)?;
    Ok(EntropyValue { bits: shannon_bits(&eig.values) })
}

/// `S(n)` for every cut `n = 0..=N`.
pub fn entropy_profile(psi: &Ket) -> Result<Vec<f64>> {
    (0..=psi.dims().len()).map(|n| block_entropy(psi, n).map(|e| e.bits)).collect()
}

fn check_two_qubit(dims: &[usize]) -> Result<()> {
    if dims != [2, 2] {
        return Err(Error::DimensionMismatch(format!("concurrence needs dims [2, 2], got {dims:?}")));
    }
    Ok(())
}

/// Factor `X = W diag(sqrt p)` with `rho = X X^†`; negative round-off is clamped.
fn psd_factor(m: &CMat) -> Result<CMat> {
    let eig = eig_hermitian_matrix(m)?;
    let n = m.nrows();
    let roots: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok(CMat::from_fn(n, n, |i, k| eig.vectors[(i, k)] * roots[k]))
}

fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    m.singular_values().map_err(|e| Error::LinearAlgebra(format!("singular values: {e:?}")))
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`.
///
/// The `l_i` are taken as singular values of `X^T (sigma_y ⊗ sigma_y) X` for a
/// factor `rho = X X^†`, which stays accurate to round-off for nearly pure
/// states where square roots of tiny eigenvalues would not.
pub fn concurrence_2qubit(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho.dims().as_slice())?;
    let yy = kron(&ops::sigma_y(), &ops::sigma_y());
    let x = psd_factor(rho.matrix())?;
    let tau = &(x.transpose() * &yy) * &x;
    let mut l = singular_values(&tau)?;
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// `2 |c_gg c_ee - c_eg c_ge|` for a pure two-qubit state.
pub fn concurrence_pure(psi: &Ket) -> Result<f64> {
    check_two_qubit(psi.dims().as_slice())?;
    let a = psi.amplitudes();
    Ok(2.0 * (a[0] * a[3] - a[1] * a[2]).norm() / psi.norm().powi(2))
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, evaluated as the
/// squared nuclear norm of `X_rho^† X_sigma`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch("fidelity of states with different dims".into()));
    }
    let x = psd_factor(rho.matrix())?;
    let y = psd_factor(sigma.matrix())?;
    let t: f64 = singular_values(&(x.adjoint() * &y))?.iter().sum();
    Ok((t * t).clamp(0.0, 1.0))
}

/// `(1/2) ||rho - sigma||_1`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch("trace distance of states with different dims".into()));
    }
    let diff = rho.matrix() - sigma.matrix();
    let eig = eig_hermitian_matrix(&diff)?;
    Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
}

/// `<psi| rho |psi>`, the fidelity of a mixed state with a pure one.
pub fn pure_fidelity(psi: &Ket, rho: &DensityMatrix) -> Result<f64> {
    if psi.dims() != rho.dims() {
        return Err(Error::DimensionMismatch("fidelity of states with different dims".into()));
    }
    let m = rho.matrix();
    let a = psi.amplitudes();
    let n = a.len();
    let mut acc = c64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            acc += a[i].conj() * m[(i, j)] * a[j];
        }
    }
    Ok(acc.re / psi.norm().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{SubsystemDims, ZERO};
    use crate::spin::pair_dark_state;

    fn singlet() -> Ket {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket::new(vec![ZERO, c64::new(-h, 0.0), c64::new(h, 0.0), ZERO], SubsystemDims::uniform(2, 2)).unwrap()
    }

    #[test]
    fn purity_of_pure_and_mixed() {
        assert!((purity(&singlet().density()) - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::maximally_mixed(SubsystemDims::single(2))) - 0.5).abs() < 1e-15);
        assert!(linear_entropy(&singlet().density()).abs() < 1e-15);
    }

    #[test]
    fn singlet_block_entropy_is_one_bit() {
        assert!((block_entropy(&singlet(), 1).unwrap().bits - 1.0).abs() < 1e-14);
        let prod = Ket::basis(SubsystemDims::uniform(3, 2), 5);
        for n in 0..=3 {
            assert!(block_entropy(&prod, n).unwrap().bits.abs() < 1e-14);
        }
    }

    #[test]
    fn block_entropy_rejects_unnormalized() {
        let k = Ket::new(vec![c64::new(2.0, 0.0), ZERO], SubsystemDims::single(2)).unwrap();
        assert!(matches!(block_entropy(&k, 1), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn concurrence_reference_states() {
        let gg = Ket::basis(SubsystemDims::uniform(2, 2), 0);
        assert!(concurrence_2qubit(&gg.density()).unwrap().abs() < 1e-12);
        assert!((concurrence_2qubit(&singlet().density()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pair_dark_state_concurrence() {
        let psi = pair_dark_state(1.0, 0.0, 1.0);
        let mixed = concurrence_2qubit(&psi.density()).unwrap();
        let pure = concurrence_pure(&psi).unwrap();
        assert!((pure - 8.0 / 9.0).abs() < 1e-14);
        assert!((mixed - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_and_distance_basics() {
        let s = singlet().density();
        assert!((fidelity(&s, &s).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&s, &s).unwrap() < 1e-14);
        let gg = Ket::basis(SubsystemDims::uniform(2, 2), 0).density();
        assert!((trace_distance(&s, &gg).unwrap() - 1.0).abs() < 1e-14);
    }
}
