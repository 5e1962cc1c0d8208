//! Cascaded networks of driven two-level systems.
//!
//! Node `i` has Hamiltonian `(delta_i / 2) sigma_z + Omega_i sigma_x` and emits
//! through `sigma_-`. Pairs of neighbours with opposite detunings form dark
//! dimers; nearest-neighbour unitaries that commute with the collective jump
//! permute the detuning profile and carry dark states along.

use crate::error::{Error, Result};
use crate::master::{CascadeSpec, NodeSpec};
use crate::operator::{c64, embed_block, ops, CMat, Ket, SubsystemDims, I, ONE, ZERO};

/// Tolerance used when matching detuning values.
pub const PROFILE_TOL: f64 = 1e-12;

/// Parameters of a spin cascade, all rates in the same units as `gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinNetworkSpec {
    pub omega: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: f64,
    pub kappa0: f64,
    /// Rate `1/(2 T2)` of the `sigma_z` Lindblad term.
    pub dephasing_rate: f64,
    /// Photon loss fraction of each of the `N - 1` links.
    pub eta: Vec<f64>,
}

impl SpinNetworkSpec {
    /// Ideal network with uniform Rabi frequency.
    pub fn ideal(delta: Vec<f64>, omega: f64, gamma: f64) -> Self {
        let n = delta.len();
        Self {
            omega: vec![omega; n],
            delta,
            gamma,
            kappa0: 0.0,
            dephasing_rate: 0.0,
            eta: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn n_sites(&self) -> usize {
        self.delta.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.delta.len();
        if n == 0 {
            return Err(Error::InvalidParameter("spin network needs at least one site".into()));
        }
        if self.omega.len() != n || self.eta.len() != n - 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} detunings, {} Rabi frequencies, {} link losses",
                n,
                self.omega.len(),
                self.eta.len()
            )));
        }
        if self.delta.iter().chain(&self.omega).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite detuning or Rabi frequency".into()));
        }
        for (name, v) in [("kappa0", self.kappa0), ("dephasing rate", self.dephasing_rate)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be non-negative")));
            }
        }
        if let Some(e) = self.eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::InvalidParameter(format!("link loss {e} outside [0, 1]")));
        }
        Ok(())
    }
}

/// Single-spin Hamiltonian `(delta/2) sigma_z + omega sigma_x`.
pub fn spin_hamiltonian(delta: f64, omega: f64) -> CMat {
    &ops::sigma_z() * faer::Scale(c64::new(delta / 2.0, 0.0)) + &ops::sigma_x() * faer::Scale(c64::new(omega, 0.0))
}

pub fn build_spin_cascade(spec: &SpinNetworkSpec) -> Result<CascadeSpec> {
    spec.validate()?;
    let nodes = spec
        .delta
        .iter()
        .zip(&spec.omega)
        .map(|(&d, &o)| {
            NodeSpec::new(spin_hamiltonian(d, o), ops::sigma_minus())?
                .with_channel(spec.kappa0, ops::sigma_minus())?
                .with_channel(spec.dephasing_rate, ops::sigma_z())
        })
        .collect::<Result<Vec<_>>>()?;
    CascadeSpec::new(nodes, spec.gamma)?.with_link_amplitudes(spec.eta.iter().map(|e| (1.0 - e).sqrt()).collect())
}

/// Hermitian part of the lossless cascade generator with uniform drive.
pub fn cascade_hamiltonian(profile: &DetuningProfile, omega: f64, gamma: f64) -> Result<CMat> {
    let spec = SpinNetworkSpec::ideal(profile.0.clone(), omega, gamma);
    Ok(build_spin_cascade(&spec)?.lindblad_form().hamiltonian)
}

/// Ordered detunings `(delta_1, delta_2, ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DetuningProfile(pub Vec<f64>);

impl DetuningProfile {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter("non-finite detuning".into()));
        }
        Ok(Self(delta))
    }

    /// `(delta, -delta, delta, -delta, ...)` on `n` sites.
    pub fn alternating(n: usize, delta: f64) -> Self {
        Self((0..n).map(|i| if i % 2 == 0 { delta } else { -delta }).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Profile with sites `i` and `i + 1` exchanged.
    pub fn transposed(&self, i: usize) -> Self {
        let mut d = self.0.clone();
        d.swap(i, i + 1);
        Self(d)
    }

    /// Whether consecutive sites `(2k, 2k+1)` carry opposite detunings.
    pub fn check_pairing(&self) -> Result<()> {
        if self.0.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!("odd number of sites {}", self.0.len())));
        }
        for k in 0..self.0.len() / 2 {
            let (a, b) = (self.0[2 * k], self.0[2 * k + 1]);
            if (a + b).abs() > PROFILE_TOL {
                return Err(Error::PairingViolated(2 * k, 2 * k + 1));
            }
        }
        Ok(())
    }

    /// Dimer-aligned profile with the same multiset of values.
    ///
    /// Values are paired with their negatives in order of first appearance, so
    /// that `(0, 1, -1, 1, -1, 0)` maps to `(0, 0, 1, -1, 1, -1)`.
    pub fn dimer_reference(&self) -> Result<Self> {
        let n = self.0.len();
        let mut used = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            if used[i] {
                continue;
            }
            used[i] = true;
            let v = self.0[i];
            let j = (i + 1..n).find(|&j| !used[j] && (self.0[j] + v).abs() <= PROFILE_TOL).ok_or_else(|| {
                Error::InvalidParameter(format!("detuning {v} at site {i} has no partner -{v}; the profile is not a permutation of dimers"))
            })?;
            used[j] = true;
            out.push(v);
            out.push(-v);
        }
        Ok(Self(out))
    }
}

/// `2 sqrt(2) Omega / (i gamma - 2 delta)`.
pub fn pair_alpha(omega: f64, delta: f64, gamma: f64) -> c64 {
    c64::new(2.0 * 2f64.sqrt() * omega, 0.0) / c64::new(-2.0 * delta, gamma)
}

/// Dark state `(|gg> + alpha |S>) / sqrt(1 + |alpha|^2)` of a pair with detunings `(delta, -delta)`.
///
/// `|S> = (|eg> - |ge>)/sqrt(2)`; basis index `2 s_0 + s_1` with `g = 0`.
pub fn pair_dark_state(omega: f64, delta: f64, gamma: f64) -> Ket {
    let alpha = pair_alpha(omega, delta, gamma);
    let norm = (1.0 + alpha.norm_sqr()).sqrt();
    let s = alpha * std::f64::consts::FRAC_1_SQRT_2 / norm;
    let amps = vec![c64::new(1.0 / norm, 0.0), -s, s, ZERO];
    Ket::new(amps, SubsystemDims::uniform(2, 2)).expect("4 amplitudes")
}

/// Product of pair dark states for a profile with `delta_{2k+1} = -delta_{2k}`.
pub fn dimer_chain_state(profile: &DetuningProfile, omega: f64, gamma: f64) -> Result<Ket> {
    if profile.is_empty() {
        return Err(Error::InvalidParameter("empty profile".into()));
    }
    profile.check_pairing()?;
    let pairs: Vec<Ket> = profile.0.chunks(2).map(|p| pair_dark_state(omega, p[0], gamma)).collect();
    Ok(Ket::product(&pairs))
}

/// Ordered list of nearest-neighbour unitaries `(site, theta)` acting on `(site, site + 1)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TranspositionCircuit {
    pub steps: Vec<(usize, f64)>,
}

impl TranspositionCircuit {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// `atan((delta_next - delta_here) / gamma)` on the principal branch.
pub fn transposition_angle(delta_here: f64, delta_next: f64, gamma: f64) -> f64 {
    ((delta_next - delta_here) / gamma).atan()
}

/// Adjacent transpositions turning `from` into `to`, with angles taken on the evolving profile.
pub fn transposition_circuit(from: &DetuningProfile, to: &DetuningProfile, gamma: f64) -> Result<TranspositionCircuit> {
    if from.len() != to.len() {
        return Err(Error::NotAPermutation);
    }
    let mut cur = from.0.clone();
    let mut steps = Vec::new();
    for p in 0..cur.len() {
        let j = (p..cur.len()).find(|&j| (cur[j] - to.0[p]).abs() <= PROFILE_TOL).ok_or(Error::NotAPermutation)?;
        for k in (p..j).rev() {
            steps.push((k, transposition_angle(cur[k], cur[k + 1], gamma)));
            cur.swap(k, k + 1);
        }
    }
    Ok(TranspositionCircuit { steps })
}

/// `exp[i (theta/2) sigma_i . sigma_{i+1}] = e^{-i theta/2} (cos theta + i sin theta SWAP)`.
pub fn nn_unitary(theta: f64) -> CMat {
    let phase = c64::new(0.0, -theta / 2.0).exp();
    let swap = ops::swap(2);
    CMat::from_fn(4, 4, |r, c| {
        let id = if r == c { ONE } else { ZERO };
        (id * theta.cos() + swap[(r, c)] * I * theta.sin()) * phase
    })
}

/// Applies a two-site gate on sites `(site, site + 1)` of a ket.
pub fn apply_two_site(gate: &CMat, site: usize, psi: &Ket) -> Result<Ket> {
    let dims = psi.dims().as_slice();
    if site + 1 >= dims.len() {
        return Err(Error::SiteOutOfRange { site: site + 1, n_sites: dims.len() });
    }
    let pair = dims[site] * dims[site + 1];
    if gate.nrows() != pair || gate.ncols() != pair {
        return Err(Error::DimensionMismatch(format!("{}x{} gate on a pair of dimension {pair}", gate.nrows(), gate.ncols())));
    }
    let left = psi.dims().block(0, site);
    let right = psi.dims().block(site + 2, dims.len());
    let amps = psi.amplitudes();
    let mut out = vec![ZERO; amps.len()];
    for l in 0..left {
        for r in 0..right {
            for a in 0..pair {
                let mut acc = ZERO;
                for b in 0..pair {
                    acc += gate[(a, b)] * amps[(l * pair + b) * right + r];
                }
                out[(l * pair + a) * right + r] = acc;
            }
        }
    }
    Ket::new(out, psi.dims().clone())
}

pub fn apply_circuit(circuit: &TranspositionCircuit, psi: &Ket) -> Result<Ket> {
    circuit.steps.iter().try_fold(psi.clone(), |acc, &(site, theta)| apply_two_site(&nn_unitary(theta), site, &acc))
}

/// Pure dark state of the network with detuning `profile`, built from dimers by a transposition circuit.
pub fn circuit_dark_state(profile: &DetuningProfile, omega: f64, gamma: f64) -> Result<Ket> {
    let reference = profile.dimer_reference()?;
    let circuit = transposition_circuit(&reference, profile, gamma)?;
    apply_circuit(&circuit, &dimer_chain_state(&reference, omega, gamma)?)
}

/// `||U_i H(Delta) U_i^† - H(P_{i,i+1} Delta)||_F` with the angle from `transposition_angle`.
pub fn verify_form_invariance(profile: &DetuningProfile, i: usize, omega: f64, gamma: f64) -> Result<f64> {
    if i + 1 >= profile.len() {
        return Err(Error::SiteOutOfRange { site: i + 1, n_sites: profile.len() });
    }
    let theta = transposition_angle(profile.0[i], profile.0[i + 1], gamma);
    form_invariance_residual(profile, i, omega, gamma, theta)
}

/// Same residual for an arbitrary angle.
pub fn form_invariance_residual(profile: &DetuningProfile, i: usize, omega: f64, gamma: f64, theta: f64) -> Result<f64> {
    let n = profile.len();
    if i + 1 >= n {
        return Err(Error::SiteOutOfRange { site: i + 1, n_sites: n });
    }
    let h = cascade_hamiltonian(profile, omega, gamma)?;
    let h_swapped = cascade_hamiltonian(&profile.transposed(i), omega, gamma)?;
    let u = embed_block(&nn_unitary(theta), 1 << i, 1 << (n - i - 2));
    let lhs = &(&u * &h) * u.adjoint();
    Ok((&lhs - &h_swapped).norm_l2())
}

/// `(1 - s) a + s b`.
pub fn interpolate_profiles(a: &DetuningProfile, b: &DetuningProfile, s: f64) -> Result<DetuningProfile> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("profiles of length {} and {}", a.len(), b.len())));
    }
    Ok(DetuningProfile(a.0.iter().zip(&b.0).map(|(x, y)| (1.0 - s) * x + s * y).collect()))
}
