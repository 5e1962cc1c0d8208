//! Two cascaded Kerr cavities with opposite detuning and nonlinearity.
//!
//! The dark state has no quanta in the symmetric mode `c+ = (a + b)/sqrt(2)`
//! and amplitudes `alpha_n` in the antisymmetric mode `c- = (a - b)/sqrt(2)`.
//! Amplitudes are normalized over the untruncated series; truncation to a
//! finite Fock cutoff is certified separately.

use crate::error::{Error, Result};
use crate::master::{steady_state, CascadeSpec, NodeSpec, Superoperator};
use crate::measures::trace_distance;
use crate::operator::{c64, ops, CMat, DensityMatrix, Ket, Operator, SubsystemDims, ONE, ZERO};
use crate::par_map;
use crate::special::{hyp0f2_scaled, ln_factorial, ln_pochhammer};

/// Total population allowed outside the truncated two-mode space.
pub const TRUNCATION_TOL: f64 = 1e-10;
/// Marginal weight allowed in the top two shells by the automatic cutoff.
pub const AUTO_CUTOFF_TOL: f64 = 1e-12;
pub const MAX_CUTOFF: usize = 200;
/// Largest photon-number block used by the c+/c- leakage check.
const LEAKAGE_MAX_SHELL: usize = 30;
const SERIES_TOL: f64 = 1e-20;
const RESCALE_AT: f64 = 1e150;
const POLE_TOL: f64 = 1e-12;
const MAX_SERIES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrSpec {
    pub delta: f64,
    pub k: f64,
    pub omega: f64,
    pub gamma: f64,
    /// Highest Fock state kept per mode.
    pub cutoff: usize,
}

impl KerrSpec {
    pub fn new(delta: f64, k: f64, omega: f64, gamma: f64, cutoff: usize) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
        }
        if ![delta, k, omega].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("Kerr parameters must be finite".into()));
        }
        if cutoff < 2 {
            return Err(Error::InvalidParameter(format!("cutoff {cutoff} must be at least 2")));
        }
        Ok(Self { delta, k, omega, gamma, cutoff })
    }

    /// Same physics with the smallest certified cutoff, see [`auto_cutoff`].
    pub fn with_auto_cutoff(self) -> Result<Self> {
        Ok(Self { cutoff: auto_cutoff(&self)?, ..self })
    }

    /// `eps = Omega / (i K)`.
    pub fn epsilon(&self) -> c64 {
        c64::new(0.0, -self.omega / self.k)
    }

    /// `x = (i Delta + gamma/2) / (i K)`.
    pub fn x(&self) -> c64 {
        c64::new(self.delta / self.k, -0.5 * self.gamma / self.k)
    }

    /// Coherent amplitude of the linear cavity, `Omega / (i Delta + gamma/2)`.
    pub fn beta(&self) -> c64 {
        c64::new(self.omega, 0.0) / c64::new(0.5 * self.gamma, self.delta)
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

/// Antisymmetric-mode amplitudes `alpha_0..=alpha_cutoff`.
#[derive(Clone, Debug)]
pub struct DarkStateCoefficients {
    pub alpha: Vec<c64>,
    /// `N`, the norm of the series started at `alpha_0 = 1`.
    pub norm: f64,
    /// Bound on `sum_{n > cutoff} |alpha_n|^2`.
    pub tail_weight: f64,
}

/// Normalized amplitudes up to at least `n_min`, and a bound on the weight beyond the last one.
struct Series {
    alpha: Vec<c64>,
    ln_norm: f64,
    tail: f64,
}

impl Series {
    fn weight_beyond(&self, n: usize) -> f64 {
        self.alpha.iter().skip(n + 1).map(|a| a.norm_sqr()).sum::<f64>() + self.tail
    }
}

fn series(spec: &KerrSpec, n_min: usize) -> Result<Series> {
    if spec.k == 0.0 {
        return Ok(coherent_series(spec, n_min));
    }
    let eps = spec.epsilon();
    let x = spec.x();
    let mut a = vec![ONE];
    let mut sum = 1.0;
    let mut ln_shift = 0.0;
    let mut n = 0usize;
    loop {
        if n >= n_min && (n as f64) >= -x.re {
            let nf = n as f64;
            let r = 2.0 * eps.norm_sqr() / ((nf + 1.0) * (x + nf).norm_sqr());
            let last = a[n].norm_sqr();
            if r < 0.5 && last * r / (1.0 - r) <= SERIES_TOL * sum {
                let tail = last * r / (1.0 - r) / sum;
                let s = sum.sqrt();
                let alpha = a.iter().map(|v| v / s).collect();
                return Ok(Series { alpha, ln_norm: 0.5 * sum.ln() + ln_shift, tail });
            }
        }
        if n >= MAX_SERIES {
            return Err(Error::InvalidParameter(format!("dark-state series did not converge in {MAX_SERIES} terms")));
        }
        n += 1;
        let f = x + (n - 1) as f64;
        if f.norm() < POLE_TOL {
            return Err(Error::Pole(n));
        }
        let next = a[n - 1] * eps * (2.0 / n as f64).sqrt() / f;
        a.push(next);
        sum += next.norm_sqr();
        if next.norm() > RESCALE_AT {
            for v in a.iter_mut() {
                *v /= RESCALE_AT;
            }
            sum /= RESCALE_AT * RESCALE_AT;
            ln_shift += RESCALE_AT.ln();
        }
    }
}

/// `alpha_n = exp(-|beta|^2) (sqrt(2) beta)^n / sqrt(n!)`, the antisymmetric mode of `|beta>|-beta>`.
fn coherent_series(spec: &KerrSpec, n_min: usize) -> Series {
    let b = spec.beta() * std::f64::consts::SQRT_2;
    let mean = b.norm_sqr();
    let mut alpha = vec![c64::new((-0.5 * mean).exp(), 0.0)];
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let r = mean / (nf + 1.0);
        let last = alpha[n].norm_sqr();
        if n >= n_min && r < 0.5 && last * r / (1.0 - r) <= SERIES_TOL {
            return Series { alpha, ln_norm: 0.5 * mean, tail: last * r / (1.0 - r) };
        }
        n += 1;
        let next = alpha[n - 1] * b / (n as f64).sqrt();
        alpha.push(next);
    }
}

/// Amplitudes from the two-term recursion `alpha_n = sqrt(2/n) eps/(x+n-1) alpha_{n-1}`.
pub fn alpha_recursion(spec: &KerrSpec) -> Result<DarkStateCoefficients> {
    if spec.k == 0.0 {
        return Err(Error::InvalidParameter("the recursion needs K != 0".into()));
    }
    let s = series(spec, spec.cutoff)?;
    Ok(DarkStateCoefficients {
        alpha: s.alpha[..=spec.cutoff].to_vec(),
        norm: s.ln_norm.exp(),
        tail_weight: s.weight_beyond(spec.cutoff),
    })
}

/// Closed-form amplitudes `(sqrt(2) eps)^n / sqrt(n!) / (x)_n / N`, `n = 0..=n_max`,
/// with `N^2 = 0F2(x, x*; 2|eps|^2)`; evaluated in the log domain.
pub fn alpha_closed_form(spec: &KerrSpec, n_max: usize) -> Result<Vec<c64>> {
    if spec.k == 0.0 {
        return Err(Error::InvalidParameter("the closed form needs K != 0".into()));
    }
    let eps = spec.epsilon();
    let x = spec.x();
    let (m, s) = hyp0f2_scaled(x, x.conj(), 2.0 * eps.norm_sqr())?;
    let ln_norm = 0.5 * (m.re.ln() + s);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(c64::new((-ln_norm).exp(), 0.0));
    if eps.norm() == 0.0 {
        out.resize(n_max + 1, ZERO);
        return Ok(out);
    }
    let ln_step = (eps * std::f64::consts::SQRT_2).ln();
    for n in 1..=n_max {
        let ln_a = ln_step * n as f64 - 0.5 * ln_factorial(n) - ln_pochhammer(x, n)? - ln_norm;
        out.push(ln_a.exp());
    }
    Ok(out)
}

/// Smallest cutoff whose top two marginal shells, together with everything above, weigh less than [`AUTO_CUTOFF_TOL`].
pub fn auto_cutoff(spec: &KerrSpec) -> Result<usize> {
    let s = series(spec, 2)?;
    let marginal = marginal_distribution(&s.alpha);
    // tail[n] = sum_{j >= n} p_A(j)
    let mut tail = vec![0.0; marginal.len() + 1];
    for n in (0..marginal.len()).rev() {
        tail[n] = tail[n + 1] + marginal[n];
    }
    for c in 2..=MAX_CUTOFF {
        let w = tail.get(c - 1).copied().unwrap_or(0.0) + s.tail;
        if w < AUTO_CUTOFF_TOL {
            return Ok(c);
        }
    }
    Err(Error::InsufficientCutoff { cutoff: MAX_CUTOFF, weight: tail.get(MAX_CUTOFF - 1).copied().unwrap_or(0.0) + s.tail })
}

/// Photon-number distribution of one cavity: each antisymmetric quantum lands in A with probability 1/2.
fn marginal_distribution(alpha: &[c64]) -> Vec<f64> {
    let mut p = vec![0.0; alpha.len()];
    for (big_n, a) in alpha.iter().enumerate() {
        let w = a.norm_sqr();
        if w == 0.0 {
            continue;
        }
        for (n, pn) in p.iter_mut().enumerate().take(big_n + 1) {
            let ln_binom = ln_factorial(big_n) - ln_factorial(n) - ln_factorial(big_n - n);
            *pn += w * (ln_binom - big_n as f64 * std::f64::consts::LN_2).exp();
        }
    }
    p
}

/// Coefficient matrix `B` of `|psi0> = sum B_nm |n>_A |m>_B`, renormalized on the truncated space.
pub fn schmidt_matrix(spec: &KerrSpec) -> Result<CMat> {
    let c = spec.cutoff;
    let s = series(spec, 2 * c)?;
    let mut b = CMat::from_fn(c + 1, c + 1, |n, m| {
        let big_n = n + m;
        let ln_mag = 0.5 * (ln_factorial(big_n) - ln_factorial(n) - ln_factorial(m)) - 0.5 * big_n as f64 * std::f64::consts::LN_2;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        s.alpha[big_n] * (sign * ln_mag.exp())
    });
    let kept = b.norm_l2().powi(2);
    let missing = (1.0 - kept).max(0.0) + s.tail;
    if missing > TRUNCATION_TOL {
        return Err(Error::InsufficientCutoff { cutoff: c, weight: missing });
    }
    b *= faer::Scale(c64::new(1.0 / kept.sqrt(), 0.0));
    Ok(b)
}

/// Dark state on dims `[cutoff + 1, cutoff + 1]`, cavity A first.
pub fn dark_state_fock(spec: &KerrSpec) -> Result<Ket> {
    let b = schmidt_matrix(spec)?;
    ket_from_schmidt(&b)
}

fn ket_from_schmidt(b: &CMat) -> Result<Ket> {
    let (r, c) = (b.nrows(), b.ncols());
    let amps = (0..r * c).map(|i| b[(i / c, i % c)]).collect();
    Ket::new(amps, SubsystemDims::new(vec![r, c])?)
}

/// `|beta>_A |-beta>_B` on the truncated space, renormalized.
pub fn coherent_product(spec: &KerrSpec) -> Result<Ket> {
    let d = spec.dim();
    let beta = spec.beta();
    let mut v = vec![ZERO; d];
    v[0] = c64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 1..d {
        v[n] = v[n - 1] * beta / (n as f64).sqrt();
    }
    let a = Ket::new(v.clone(), SubsystemDims::single(d))?;
    let minus: Vec<c64> = v.iter().enumerate().map(|(n, z)| if n % 2 == 0 { *z } else { -*z }).collect();
    let b = Ket::new(minus, SubsystemDims::single(d))?;
    a.kron(&b).normalized()
}

/// `<(c-^†)^n (c-)^m>` of the untruncated dark state.
pub fn moments_cminus(n: usize, m: usize, spec: &KerrSpec) -> Result<c64> {
    if spec.k == 0.0 {
        let b = spec.beta() * std::f64::consts::SQRT_2;
        return Ok(b.conj().powi(n as i32) * b.powi(m as i32));
    }
    let eps = spec.epsilon();
    if eps.norm() == 0.0 {
        return Ok(if n == 0 && m == 0 { ONE } else { ZERO });
    }
    let x = spec.x();
    let z = 2.0 * eps.norm_sqr();
    let (f_nm, s_nm) = hyp0f2_scaled(x.conj() + n as f64, x + m as f64, z)?;
    let (f_00, s_00) = hyp0f2_scaled(x.conj(), x, z)?;
    let ln_pref = c64::new(0.5 * (n + m) as f64 * std::f64::consts::LN_2, 0.0) + eps.conj().ln() * n as f64 + eps.ln() * m as f64
        - ln_pochhammer(x.conj(), n)?
        - ln_pochhammer(x, m)?
        + (s_nm - s_00);
    Ok(ln_pref.exp() * f_nm / f_00)
}

/// `<(a^†)^n (b^†)^k b^l a^m>` of the untruncated dark state.
pub fn moments_ab(n: usize, k: usize, l: usize, m: usize, spec: &KerrSpec) -> Result<c64> {
    let sign = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
    let order = (n + k + l + m) as f64;
    Ok(moments_cminus(n + k, l + m, spec)? * (sign * 2f64.powf(-0.5 * order)))
}

/// `Delta a^†a + K a^†a^†aa + i Omega (a^† - a)`.
pub fn hamiltonian_a(spec: &KerrSpec) -> CMat {
    cavity_hamiltonian(spec.delta, spec.k, spec.omega, spec.cutoff)
}

/// `-Delta b^†b - K b^†b^†bb + i Omega (b^† - b)`.
pub fn hamiltonian_b(spec: &KerrSpec) -> CMat {
    cavity_hamiltonian(-spec.delta, -spec.k, spec.omega, spec.cutoff)
}

fn cavity_hamiltonian(delta: f64, k: f64, omega: f64, cutoff: usize) -> CMat {
    let a = ops::annihilation(cutoff);
    let drive = (a.adjoint() - &a) * faer::Scale(c64::new(0.0, omega));
    let d = cutoff + 1;
    let diag = CMat::from_fn(d, d, |i, j| {
        if i == j {
            let n = i as f64;
            c64::new(delta * n + k * n * (n - 1.0), 0.0)
        } else {
            ZERO
        }
    });
    diag + drive
}

/// The two-cavity cascade with jumps `a` and `b`.
pub fn cascade(spec: &KerrSpec) -> Result<CascadeSpec> {
    let a = ops::annihilation(spec.cutoff);
    let node_a = NodeSpec::new(hamiltonian_a(spec), a.clone())?;
    let node_b = NodeSpec::new(hamiltonian_b(spec), a)?;
    CascadeSpec::new(vec![node_a, node_b], spec.gamma)
}

/// `H_A + H_B - (i gamma/2)(b^† a - a^† b)`.
pub fn cascade_hamiltonian(spec: &KerrSpec) -> Result<Operator> {
    let form = cascade(spec)?.lindblad_form();
    Operator::new(form.hamiltonian, form.dims)
}

/// Steady state of one driven Kerr cavity decaying at rate `gamma`.
pub fn single_cavity_steady_state(spec: &KerrSpec) -> Result<DensityMatrix> {
    let h = Operator::local(hamiltonian_a(spec));
    let l = Superoperator::lindblad(&h, &[(spec.gamma, ops::annihilation(spec.cutoff))])?;
    let rho = steady_state(&l)?.rho;
    let top = rho.matrix()[(spec.cutoff, spec.cutoff)].re;
    if top > TRUNCATION_TOL {
        return Err(Error::InsufficientCutoff { cutoff: spec.cutoff, weight: top });
    }
    Ok(rho)
}

/// Reduced state of cavity A, `B B^†`.
pub fn reduced_state_a(spec: &KerrSpec) -> Result<DensityMatrix> {
    let b = schmidt_matrix(spec)?;
    Ok(DensityMatrix::from_matrix_normalized(&b * b.adjoint(), SubsystemDims::single(spec.dim())))
}

/// One point of a photon-number and entropy map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPoint {
    pub delta: f64,
    pub omega: f64,
    /// `<a^†a>` divided by the resonant linear response `(2 Omega / gamma)^2`.
    pub photon_number: f64,
    pub s_lin: f64,
    pub cutoff: usize,
}

pub fn entropy_point(delta: f64, omega: f64, k: f64, gamma: f64) -> Result<EntropyPoint> {
    let spec = KerrSpec::new(delta, k, omega, gamma, 2)?.with_auto_cutoff()?;
    let b = schmidt_matrix(&spec)?;
    let rho = &b * b.adjoint();
    let n_a: f64 = (0..spec.dim()).map(|n| n as f64 * rho[(n, n)].re).sum();
    let linear = 2.0 * omega / gamma;
    let photon_number = if omega == 0.0 {
        // Omega -> 0 limit of the linear response
        0.25 * gamma * gamma / (delta * delta + 0.25 * gamma * gamma)
    } else {
        n_a / (linear * linear)
    };
    let s_lin = (1.0 - rho.norm_l2().powi(2)).max(0.0);
    Ok(EntropyPoint { delta, omega, photon_number, s_lin, cutoff: spec.cutoff })
}

/// Points in row-major order: `deltas` index the rows, `omegas` the columns.
pub fn entropy_map(deltas: &[f64], omegas: &[f64], k: f64, gamma: f64) -> Result<Vec<EntropyPoint>> {
    let cols = omegas.len();
    par_map(deltas.len() * cols, |i| entropy_point(deltas[i / cols], omegas[i % cols], k, gamma))
        .into_iter()
        .collect()
}

/// `<psi| X ⊗ Y |psi>` for `psi` given by its coefficient matrix.
fn bipartite_expectation(b: &CMat, x: &CMat, y: &CMat) -> c64 {
    let xby = &(x * b) * y.transpose();
    let mut acc = ZERO;
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            acc += b[(i, j)].conj() * xby[(i, j)];
        }
    }
    acc
}

/// Population outside the `|0>_+` sector, over complete photon-number shells up to a fixed bound.
pub fn plus_mode_population(b: &CMat) -> f64 {
    let c = b.nrows().min(b.ncols()) - 1;
    let mut leak = 0.0;
    for big_n in 0..=c.min(LEAKAGE_MAX_SHELL) {
        for p in 1..=big_n {
            let q = big_n - p;
            let mut amp = ZERO;
            for n in 0..=big_n {
                let m = big_n - n;
                let mut u = 0.0;
                for i in 0..=n.min(p) {
                    let j = p - i;
                    if j > m {
                        continue;
                    }
                    let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                    u += sign * binomial(n, i) * binomial(m, j);
                }
                let ln_norm = 0.5 * (ln_factorial(p) + ln_factorial(q) - ln_factorial(n) - ln_factorial(m)) - 0.5 * big_n as f64 * std::f64::consts::LN_2;
                amp += b[(n, m)] * (u * ln_norm.exp());
            }
            leak += amp.norm_sqr();
        }
    }
    leak
}

fn binomial(n: usize, k: usize) -> f64 {
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp().round()
}

/// Numerical certificate of the analytic dark state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrVerification {
    pub cutoff: usize,
    /// `||(a + b)|psi0>||`.
    pub jump_residual: f64,
    /// `||H_casc |psi0>||` restricted to Fock states below the top two shells of each mode.
    pub hamiltonian_residual: f64,
    pub plus_mode_population: f64,
    /// Trace distance between `tr_B |psi0><psi0|` and the single-cavity steady state.
    pub purification_distance: f64,
    /// Largest deviation of the closed-form moments from direct expectations, orders up to 4.
    pub moment_error: f64,
}

pub fn verify(spec: &KerrSpec) -> Result<KerrVerification> {
    let b = schmidt_matrix(spec)?;
    let c = spec.cutoff;
    let a = ops::annihilation(c);
    let ad = a.adjoint().to_owned();

    let jump = &(&a * &b) + &(&b * a.transpose());
    let jump_residual = jump.norm_l2();

    let g = c64::new(0.0, -0.5 * spec.gamma);
    // (X ⊗ Y) psi corresponds to X B Y^T
    let mut hb = &hamiltonian_a(spec) * &b + &b * hamiltonian_b(spec).transpose();
    hb += &(&(&a * &b) * &ad.transpose() - &(&ad * &b) * a.transpose()) * faer::Scale(g);
    let inner = c.saturating_sub(1);
    let hamiltonian_residual = (0..inner)
        .flat_map(|n| (0..inner).map(move |m| (n, m)))
        .map(|(n, m)| hb[(n, m)].norm_sqr())
        .sum::<f64>()
        .sqrt();

    let rho_a = DensityMatrix::from_matrix_normalized(&b * b.adjoint(), SubsystemDims::single(c + 1));
    let single = single_cavity_steady_state(spec)?;
    let purification_distance = trace_distance(&rho_a, &single)?;

    let mut moment_error = 0.0f64;
    let pow = |m: &CMat, k: usize| (0..k).fold(ops::identity(c + 1), |acc, _| &acc * m);
    for n in 0..=4 {
        for k in 0..=4 - n {
            for l in 0..=4 - n - k {
                for m in 0..=4 - n - k - l {
                    let x = &pow(&ad, n) * &pow(&a, m);
                    let y = &pow(&ad, k) * &pow(&a, l);
                    let direct = bipartite_expectation(&b, &x, &y);
                    let closed = moments_ab(n, k, l, m, spec)?;
                    moment_error = moment_error.max((direct - closed).norm());
                }
            }
        }
    }

    Ok(KerrVerification {
        cutoff: c,
        jump_residual,
        hamiltonian_residual,
        plus_mode_population: plus_mode_population(&b),
        purification_distance,
        moment_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(delta: f64, omega: f64, cutoff: usize) -> KerrSpec {
        KerrSpec::new(delta, 0.5, omega, 1.0, cutoff).unwrap()
    }

    #[test]
    fn vacuum_without_drive() {
        let s = spec(0.3, 0.0, 5);
        let co = alpha_recursion(&s).unwrap();
        assert_eq!(co.alpha[0], ONE);
        assert!(co.alpha[1..].iter().all(|a| a.norm() == 0.0));
        let psi = dark_state_fock(&s).unwrap();
        assert!((psi.amplitudes()[0] - ONE).norm() < 1e-15);
    }

    #[test]
    fn first_ratio_by_substitution() {
        // Delta = 0, K = 1/2, Omega = 1: eps = -2i, x = -i, alpha_1/alpha_0 = sqrt(2) eps/x = 2 sqrt(2)
        let s = spec(0.0, 1.0, 10);
        assert!((s.epsilon() - c64::new(0.0, -2.0)).norm() < 1e-15);
        assert!((s.x() - c64::new(0.0, -1.0)).norm() < 1e-15);
        let co = alpha_recursion(&s).unwrap();
        let r = co.alpha[1] / co.alpha[0];
        assert!((r - c64::new(2.0 * 2f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn recursion_norm_matches_hypergeometric() {
        for (delta, omega) in [(0.0, 1.0), (1.0, 2.0), (-1.0, 0.5)] {
            let s = spec(delta, omega, 30);
            let co = alpha_recursion(&s).unwrap();
            let x = s.x();
            let (m, sc) = hyp0f2_scaled(x, x.conj(), 2.0 * s.epsilon().norm_sqr()).unwrap();
            let f = m.re * sc.exp();
            assert!((co.norm * co.norm - f).abs() < 1e-12 * f);
        }
    }

    #[test]
    fn recursion_matches_closed_form() {
        for (delta, omega) in [(0.0, 1.0), (1.0, 2.0), (-1.0, 0.3)] {
            let s = spec(delta, omega, 30);
            let r = alpha_recursion(&s).unwrap();
            let c = alpha_closed_form(&s, 30).unwrap();
            for (a, b) in r.alpha.iter().zip(&c) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn schmidt_matrix_is_annihilated_by_total_jump() {
        let v = verify(&spec(0.0, 1.0, 30)).unwrap();
        assert!(v.jump_residual < 1e-10, "{v:?}");
        assert!(v.hamiltonian_residual < 1e-8, "{v:?}");
        assert!(v.plus_mode_population < 1e-20, "{v:?}");
        assert!(v.purification_distance < 1e-8, "{v:?}");
        assert!(v.moment_error < 1e-9, "{v:?}");
    }

    #[test]
    fn cminus_number_matches_direct() {
        let s = spec(0.0, 1.0, 30);
        let b = schmidt_matrix(&s).unwrap();
        let a = ops::annihilation(30);
        let id = ops::identity(31);
        // c- = (a ⊗ 1 - 1 ⊗ b)/sqrt(2)
        let n_aa = bipartite_expectation(&b, &(a.adjoint() * &a), &id);
        let n_bb = bipartite_expectation(&b, &id, &(a.adjoint() * &a));
        let n_ab = bipartite_expectation(&b, &a.adjoint().to_owned(), &a);
        let direct = 0.5 * (n_aa + n_bb - n_ab - n_ab.conj());
        assert!((direct - moments_cminus(1, 1, &s).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn auto_cutoff_certifies_truncation() {
        let s = spec(1.0, 2.0, 2).with_auto_cutoff().unwrap();
        assert!(s.cutoff > 2 && s.cutoff < MAX_CUTOFF);
        let larger = KerrSpec { cutoff: 2 * s.cutoff, ..s };
        let p1 = entropy_point(s.delta, s.omega, s.k, s.gamma).unwrap();
        let rho = reduced_state_a(&larger).unwrap();
        let s_lin = 1.0 - rho.matrix().norm_l2().powi(2);
        assert!((p1.s_lin - s_lin).abs() < 1e-8);
    }

    #[test]
    fn weak_nonlinearity_is_nearly_coherent() {
        let s = KerrSpec::new(0.0, 1e-4, 0.5, 1.0, 20).unwrap();
        let psi = dark_state_fock(&s).unwrap();
        let coh = coherent_product(&s).unwrap();
        assert!(psi.overlap(&coh) > 0.999);
        let n = moments_ab(1, 0, 0, 1, &s).unwrap().re;
        assert!((n - s.beta().norm_sqr()).abs() < 1e-3 * s.beta().norm_sqr());
    }

    #[test]
    fn zero_nonlinearity_uses_coherent_product() {
        let s = KerrSpec::new(0.5, 0.0, 0.7, 1.0, 20).unwrap();
        let psi = dark_state_fock(&s).unwrap();
        assert!((psi.overlap(&coherent_product(&s).unwrap()) - 1.0).abs() < 1e-12);
        let p = entropy_point(0.5, 0.7, 0.0, 1.0).unwrap();
        assert!(p.s_lin < 1e-12);
        assert!((p.photon_number - 0.25 / (0.25 + 0.25)).abs() < 1e-10);
    }

    #[test]
    fn undriven_entropy_limits() {
        let p = entropy_point(1.0, 0.0, 0.5, 1.0).unwrap();
        assert_eq!(p.s_lin, 0.0);
        assert!((p.photon_number - 0.25 / 1.25).abs() < 1e-15);
    }
}
