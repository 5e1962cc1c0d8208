//! Browser bindings for three quick computations. Results are flat `f64`
//! arrays with a fixed number of values per point so the page can read them
//! without any serialization layer. All rates are in units of gamma.

use cascade_core::kerr::entropy_point;
use cascade_core::sweeps::{dark_state_entropy, pair_sweep, PairParams};
use cascade_core::spin::DetuningProfile;
use wasm_bindgen::prelude::*;

fn linspace(max: f64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 || !(max > 0.0) {
        return Err("need at least two points and a positive range".into());
    }
    Ok((0..points).map(|i| max * i as f64 / (points - 1) as f64).collect())
}

/// `[omega, concurrence, purity, output]` per point for omega in `[0, omega_max]`.
///
/// `dephasing` is `1/T2`; zero turns it off.
#[wasm_bindgen]
pub fn pair_curve(omega_max: f64, points: usize, kappa0: f64, dephasing: f64, eta: f64, offset: f64) -> Result<Vec<f64>, String> {
    if dephasing < 0.0 {
        return Err("dephasing rate must be non-negative".into());
    }
    let omegas = linspace(omega_max, points)?;
    let t2 = if dephasing == 0.0 { f64::INFINITY } else { 1.0 / dephasing };
    let params: Vec<PairParams> =
        omegas.iter().map(|&omega| PairParams { omega, delta: 0.0, gamma: 1.0, kappa0, t2, eta, offset }).collect();
    let figures = pair_sweep(&params).map_err(|e| e.to_string())?;
    Ok(omegas
        .iter()
        .zip(&figures)
        .flat_map(|(o, f)| [*o, f.concurrence.unwrap_or(f64::NAN), f.purity, f.output])
        .collect())
}

/// `[omega, photon_number, s_lin]` per point of the Kerr dark state at fixed detuning.
#[wasm_bindgen]
pub fn kerr_curve(k: f64, delta: f64, omega_max: f64, points: usize) -> Result<Vec<f64>, String> {
    let mut out = Vec::with_capacity(3 * points);
    for omega in linspace(omega_max, points)? {
        let p = entropy_point(delta, omega, k, 1.0).map_err(|e| e.to_string())?;
        out.extend([omega, p.photon_number, p.s_lin]);
    }
    Ok(out)
}

/// `S(n)` in bits for `n = 0..=N` of the dark state of a paired detuning profile.
#[wasm_bindgen]
pub fn entropy_profile(profile: Vec<f64>, omega: f64) -> Result<Vec<f64>, String> {
    if profile.len() > 16 {
        return Err("at most 16 nodes".into());
    }
    let profile = DetuningProfile::new(profile).map_err(|e| e.to_string())?;
    dark_state_entropy(&profile, omega, 1.0).map_err(|e| e.to_string())
}
