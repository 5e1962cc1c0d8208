//! Monte-Carlo wavefunction unraveling of a Lindblad-form generator.
//!
//! Each trajectory draws a waiting-time threshold `r`, evolves under the
//! non-Hermitian `H_eff = H - (i/2) sum J^† J` until `||psi||^2 = r`, and then
//! applies jump `J_k` with probability proportional to `||J_k psi||^2`.
//! Trajectory `k` is seeded with `seed + k`, so an ensemble does not depend on
//! how trajectories are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::master::{CascadeSpec, LindbladForm};
use crate::ode::{check_underflow, initial_step, step_factor, Dopri5, Tolerances};
use crate::operator::{c64, matvec, vec_norm, CMat, Ket, Operator, I, ZERO};
use crate::par_map;

/// What to simulate and record.
#[derive(Clone, Debug)]
pub struct TrajectoryRequest {
    pub t_final: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Ascending times in `[0, t_final]` at which observables are sampled.
    pub sample_times: Vec<f64>,
    pub observables: Vec<Operator>,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub jump_times: Vec<f64>,
    /// Index into the jump list of the Lindblad form for each jump.
    pub jump_channels: Vec<usize>,
    pub final_state: Ket,
    pub sample_times: Vec<f64>,
    /// `samples[s][k]` is `<O_k>` at `sample_times[s]`.
    pub samples: Vec<Vec<f64>>,
}

/// Trajectories of a cascade, unraveled through [`CascadeSpec::lindblad_form`].
pub fn mcwf_trajectories(spec: &CascadeSpec, psi0: &Ket, request: &TrajectoryRequest) -> Result<Vec<TrajectoryRecord>> {
    mcwf_lindblad(&spec.lindblad_form(), psi0, request)
}

pub fn mcwf_lindblad(form: &LindbladForm, psi0: &Ket, request: &TrajectoryRequest) -> Result<Vec<TrajectoryRecord>> {
    if psi0.dims() != &form.dims {
        return Err(Error::DimensionMismatch("initial state and generator dims differ".into()));
    }
    if !(request.t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_final = {}", request.t_final)));
    }
    if request.sample_times.windows(2).any(|w| w[1] < w[0])
        || request.sample_times.iter().any(|&t| !(0.0..=request.t_final).contains(&t))
    {
        return Err(Error::InvalidParameter("sample times must be ascending within [0, t_final]".into()));
    }
    if let Some(o) = request.observables.iter().find(|o| o.dims() != &form.dims) {
        return Err(Error::DimensionMismatch(format!("observable dims {:?}", o.dims().as_slice())));
    }
    let psi0 = psi0.clone().normalized()?;
    let minus_i_heff = &form.effective_hamiltonian() * faer::Scale(-I);
    let results = par_map(request.n_traj, |k| {
        run_trajectory(form, &minus_i_heff, &psi0, request, request.seed.wrapping_add(k as u64))
    });
    results.into_iter().collect()
}

fn observe(observables: &[Operator], psi: &[c64]) -> Vec<f64> {
    let n2: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    observables
        .iter()
        .map(|o| {
            let v = o.apply(psi);
            psi.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / n2
        })
        .collect()
}

fn run_trajectory(
    form: &LindbladForm,
    minus_i_heff: &CMat,
    psi0: &Ket,
    request: &TrajectoryRequest,
    seed: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = psi0.dim();
    let rhs = |y: &[c64], dy: &mut [c64]| {
        for (i, d) in dy.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (j, &x) in y.iter().enumerate() {
                acc += minus_i_heff[(i, j)] * x;
            }
            *d = acc;
        }
    };
    let mut stepper = Dopri5::new(rhs, n, request.tolerances);
    let mut psi = psi0.amplitudes().to_vec();
    let mut trial = vec![ZERO; n];
    let mut t = 0.0;
    let t_final = request.t_final;
    let mut threshold = 1.0 - rng.random::<f64>();
    let mut jump_times = Vec::new();
    let mut jump_channels = Vec::new();
    let mut samples = Vec::with_capacity(request.sample_times.len());
    let mut next_sample = 0;
    let mut h = initial_step(&mut stepper, &psi, t_final.max(1e-12));

    loop {
        while next_sample < request.sample_times.len() && request.sample_times[next_sample] <= t {
            samples.push(observe(&request.observables, &psi));
            next_sample += 1;
        }
        if t >= t_final {
            break;
        }
        let stop = request.sample_times.get(next_sample).copied().unwrap_or(t_final).min(t_final);
        let step = h.min(stop - t);
        let err = stepper.attempt(&psi, step, &mut trial);
        if !(err <= 1.0) {
            h = step * step_factor(err);
            check_underflow(h, t)?;
            continue;
        }
        let norm2 = vec_norm(&trial).powi(2);
        if norm2 > threshold {
            stepper.accept();
            psi.copy_from_slice(&trial);
            t = if step >= stop - t { stop } else { t + step };
            // a step clipped to a stop says little about the attainable step size
            if step >= h {
                h = step * step_factor(err);
            }
            continue;
        }

        // the threshold is crossed inside this step: bisect on the step length
        let (mut lo, mut hi) = (0.0, step);
        while hi - lo > 1e-13 * t.abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            stepper.attempt(&psi, mid, &mut trial);
            if vec_norm(&trial).powi(2) > threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        stepper.attempt(&psi, hi, &mut trial);
        psi.copy_from_slice(&trial);
        t += hi;

        let candidates: Vec<Vec<c64>> = form.jumps.iter().map(|j| matvec(j, &psi)).collect();
        let weights: Vec<f64> = candidates.iter().map(|v| vec_norm(v).powi(2)).collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            let mut pick = rng.random::<f64>() * total;
            let mut channel = weights.len() - 1;
            for (k, w) in weights.iter().enumerate() {
                if pick < *w {
                    channel = k;
                    break;
                }
                pick -= w;
            }
            let norm = weights[channel].sqrt();
            psi = candidates[channel].iter().map(|a| a / norm).collect();
            jump_times.push(t);
            jump_channels.push(channel);
        }
        threshold = 1.0 - rng.random::<f64>();
        stepper.invalidate();
    }

    let final_state = Ket::new(psi, psi0.dims().clone())?.normalized()?;
    Ok(TrajectoryRecord {
        seed,
        jump_times,
        jump_channels,
        final_state,
        sample_times: request.sample_times.clone(),
        samples,
    })
}

/// Ensemble mean and standard error of the mean for every sample and observable.
#[derive(Clone, Debug)]
pub struct EnsembleStats {
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
}

pub fn ensemble_statistics(records: &[TrajectoryRecord]) -> EnsembleStats {
    let Some(first) = records.first() else {
        return EnsembleStats { mean: vec![], std_error: vec![] };
    };
    let n = records.len() as f64;
    let (ns, no) = (first.samples.len(), first.samples.first().map_or(0, Vec::len));
    let mut mean = vec![vec![0.0; no]; ns];
    let mut std_error = vec![vec![0.0; no]; ns];
    for s in 0..ns {
        for k in 0..no {
            let m = records.iter().map(|r| r.samples[s][k]).sum::<f64>() / n;
            let var = if records.len() > 1 {
                records.iter().map(|r| (r.samples[s][k] - m).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            mean[s][k] = m;
            std_error[s][k] = (var / n).sqrt();
        }
    }
    EnsembleStats { mean, std_error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::NodeSpec;
    use crate::operator::{ops, SubsystemDims};

    fn two_decaying_spins() -> CascadeSpec {
        let node = || NodeSpec::new(CMat::zeros(2, 2), ops::sigma_minus()).unwrap();
        CascadeSpec::new(vec![node(), node()], 1.0).unwrap()
    }

    fn request(n_traj: usize, seed: u64) -> TrajectoryRequest {
        TrajectoryRequest {
            t_final: 30.0,
            n_traj,
            seed,
            sample_times: vec![],
            observables: vec![],
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn doubly_excited_spins_emit_two_photons() {
        let ee = Ket::basis(SubsystemDims::uniform(2, 2), 3);
        let recs = mcwf_trajectories(&two_decaying_spins(), &ee, &request(200, 7)).unwrap();
        // after 30 lifetimes the probability of a missing photon is ~1e-13
        assert!(recs.iter().all(|r| r.jump_times.len() == 2));
        for r in &recs {
            assert!(r.jump_times.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let ee = Ket::basis(SubsystemDims::uniform(2, 2), 3);
        let a = mcwf_trajectories(&two_decaying_spins(), &ee, &request(5, 11)).unwrap();
        let b = mcwf_trajectories(&two_decaying_spins(), &ee, &request(5, 11)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.jump_times, y.jump_times);
        }
        let c = mcwf_trajectories(&two_decaying_spins(), &ee, &request(1, 15)).unwrap();
        assert_eq!(c[0].jump_times, a[4].jump_times);
    }
}
