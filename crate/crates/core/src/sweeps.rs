//! Parameter sweeps over spin networks: two-node imperfection scans, detuning
//! paths through bright and dark profiles, and block-entropy profiles.

use crate::error::{Error, Result};
use crate::master::{build_liouvillian, output_intensity, steady_state};
use crate::measures::{concurrence_2qubit, entropy_profile, purity};
use crate::par_map;
use crate::spin::{build_spin_cascade, circuit_dark_state, interpolate_profiles, DetuningProfile, SpinNetworkSpec};

/// Two-node network with imperfections. Detunings are `(delta + offset, -delta + offset)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairParams {
    pub omega: f64,
    pub delta: f64,
    pub gamma: f64,
    pub kappa0: f64,
    /// Dephasing time; `f64::INFINITY` turns dephasing off.
    pub t2: f64,
    /// Photon loss fraction of the link.
    pub eta: f64,
    pub offset: f64,
}

impl PairParams {
    pub fn ideal(omega: f64, delta: f64, gamma: f64) -> Self {
        Self { omega, delta, gamma, kappa0: 0.0, t2: f64::INFINITY, eta: 0.0, offset: 0.0 }
    }

    pub fn network(&self) -> Result<SpinNetworkSpec> {
        if !(self.t2 > 0.0) {
            return Err(Error::InvalidParameter(format!("T2 = {} must be positive", self.t2)));
        }
        Ok(SpinNetworkSpec {
            omega: vec![self.omega; 2],
            delta: vec![self.delta + self.offset, -self.delta + self.offset],
            gamma: self.gamma,
            kappa0: self.kappa0,
            dephasing_rate: 0.5 / self.t2,
            eta: vec![self.eta],
        })
    }
}

/// Steady-state figures of merit of one network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyMetrics {
    pub concurrence: Option<f64>,
    pub purity: f64,
    /// `<c^† c>` of the transmitted output field.
    pub output: f64,
}

pub fn network_metrics(spec: &SpinNetworkSpec) -> Result<SteadyMetrics> {
    let cascade = build_spin_cascade(spec)?;
    let ss = steady_state(&build_liouvillian(&cascade))?;
    let concurrence = if spec.n_sites() == 2 { Some(concurrence_2qubit(&ss.rho)?) } else { None };
    Ok(SteadyMetrics { concurrence, purity: purity(&ss.rho), output: output_intensity(&cascade, &ss.rho)? })
}

pub fn pair_metrics(p: &PairParams) -> Result<SteadyMetrics> {
    network_metrics(&p.network()?)
}

/// Metrics for every parameter set, in input order.
pub fn pair_sweep(points: &[PairParams]) -> Result<Vec<SteadyMetrics>> {
    par_map(points.len(), |i| pair_metrics(&points[i])).into_iter().collect()
}

/// Four dark profiles of a six-node network built from detunings `d = (d0, d1, d2, d3)`:
/// uniform dimers, two interleaved pairs plus a dimer, two long-range pairs around
/// a central dimer, and fully nested pairs.
///
/// Consecutive profiles admit no common `±` pairing of sites, so the interior of
/// every segment is bright.
pub fn six_node_waypoints(d: [f64; 4]) -> Vec<DetuningProfile> {
    let [d0, d1, d2, d3] = d;
    vec![
        DetuningProfile(vec![d0, -d0, d0, -d0, d0, -d0]),
        DetuningProfile(vec![d1, d2, -d1, -d2, d3, -d3]),
        DetuningProfile(vec![d1, d2, d3, -d3, -d1, -d2]),
        DetuningProfile(vec![d3, d1, d2, -d2, -d1, -d3]),
    ]
}

/// One point on a piecewise-linear detuning path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPoint {
    /// Path coordinate; waypoint `k` sits at `s = k`.
    pub s: f64,
    pub profile: DetuningProfile,
    pub purity: f64,
    pub output: f64,
}

/// Profiles along straight segments between consecutive waypoints, `per_segment` steps each, endpoints included once.
pub fn profile_path(waypoints: &[DetuningProfile], per_segment: usize) -> Result<Vec<(f64, DetuningProfile)>> {
    if waypoints.len() < 2 || per_segment == 0 {
        return Err(Error::InvalidParameter("a path needs two waypoints and at least one step per segment".into()));
    }
    let mut out = vec![(0.0, waypoints[0].clone())];
    for (k, pair) in waypoints.windows(2).enumerate() {
        for j in 1..=per_segment {
            let t = j as f64 / per_segment as f64;
            out.push((k as f64 + t, interpolate_profiles(&pair[0], &pair[1], t)?));
        }
    }
    Ok(out)
}

/// Steady-state purity and output intensity along a detuning path.
pub fn path_sweep(waypoints: &[DetuningProfile], per_segment: usize, omega: f64, gamma: f64, kappa0: f64) -> Result<Vec<PathPoint>> {
    let path = profile_path(waypoints, per_segment)?;
    par_map(path.len(), |i| {
        let (s, profile) = &path[i];
        let mut spec = SpinNetworkSpec::ideal(profile.0.clone(), omega, gamma);
        spec.kappa0 = kappa0;
        let f = network_metrics(&spec)?;
        Ok(PathPoint { s: *s, profile: profile.clone(), purity: f.purity, output: f.output })
    })
    .into_iter()
    .collect()
}

/// `S(n)` in bits for `n = 0..=N` of the analytic dark state of `profile`.
pub fn dark_state_entropy(profile: &DetuningProfile, omega: f64, gamma: f64) -> Result<Vec<f64>> {
    entropy_profile(&circuit_dark_state(profile, omega, gamma)?)
}
