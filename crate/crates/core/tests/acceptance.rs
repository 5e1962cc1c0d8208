//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit status if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cascade_core::absorber::{build_absorber, check_dark_state, negative_counterpart, steady_state_a};
use cascade_core::kerr::{
    alpha_closed_form, alpha_recursion, coherent_product, dark_state_fock, hamiltonian_a, hamiltonian_b, reduced_state_a,
    single_cavity_steady_state, verify, KerrSpec,
};
use cascade_core::master::{build_liouvillian, evolve_sampled, expectation, output_intensity, steady_state};
use cascade_core::mcwf::{ensemble_statistics, mcwf_trajectories, TrajectoryRequest};
use cascade_core::measures::{entropy_profile, pure_fidelity, purity, trace_distance};
use cascade_core::operator::ops;
use cascade_core::spin::{
    build_spin_cascade, circuit_dark_state, dimer_chain_state, pair_alpha, pair_dark_state, spin_hamiltonian,
    verify_form_invariance, cascade_hamiltonian, DetuningProfile, SpinNetworkSpec,
};
use cascade_core::sweeps::{pair_metrics, path_sweep, six_node_waypoints, PairParams};
use cascade_core::{c64, CMat, DensityMatrix, Error, Ket, Operator, Result, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn steady(spec: &SpinNetworkSpec) -> Result<(DensityMatrix, f64)> {
    let cascade = build_spin_cascade(spec)?;
    let ss = steady_state(&build_liouvillian(&cascade))?;
    let out = output_intensity(&cascade, &ss.rho)?;
    Ok((ss.rho, out))
}

fn two_node_dark_state() -> Result<Outcome> {
    let mut worst_infidelity = 0.0f64;
    let mut worst_output = 0.0f64;
    for omega in [0.2, 1.0, 5.0] {
        for delta in [0.0, 1.0 / 3.0] {
            let (rho, out) = steady(&SpinNetworkSpec::ideal(vec![delta, -delta], omega, 1.0))?;
            let f = pure_fidelity(&pair_dark_state(omega, delta, 1.0), &rho)?;
            worst_infidelity = worst_infidelity.max(1.0 - f);
            worst_output = worst_output.max(out);
        }
    }
    outcome(
        worst_infidelity < 1e-10 && worst_output < 1e-10,
        format!("max 1-F = {worst_infidelity:.2e} (< 1e-10), max <c^†c> = {worst_output:.2e} (< 1e-10)"),
    )
}

fn dimer_chain() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [4, 6] {
        let profile = DetuningProfile::alternating(n, 1.0 / 3.0);
        let start = Instant::now();
        let (rho, _) = steady(&SpinNetworkSpec::ideal(profile.0.clone(), 1.0, 1.0))?;
        let elapsed = start.elapsed();
        let f = pure_fidelity(&dimer_chain_state(&profile, 1.0, 1.0)?, &rho)?;
        pass &= f > 1.0 - 1e-8;
        if n == 6 {
            pass &= elapsed < Duration::from_secs(30);
        }
        parts.push(format!("N={n}: 1-F = {:.2e} in {:.2} s", 1.0 - f, elapsed.as_secs_f64()));
    }
    outcome(pass, format!("{} (1-F < 1e-8, N=6 < 30 s)", parts.join(", ")))
}

fn form_invariance() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let profile = DetuningProfile((0..4).map(|_| rng.random_range(-1.5..1.5)).collect());
        let omega = rng.random_range(0.1..3.0);
        let h_norm = cascade_hamiltonian(&profile, omega, 1.0)?.norm_l2();
        for i in 0..3 {
            worst = worst.max(verify_form_invariance(&profile, i, omega, 1.0)? / h_norm);
        }
    }
    outcome(worst < 1e-12, format!("max ||U H U^† - H(P D)|| / ||H|| = {worst:.2e} (< 1e-12) over 100 profiles"))
}

fn circuit_dark_states() -> Result<Outcome> {
    let d = 1.0 / 3.0;
    let mut profiles: Vec<Vec<f64>> = Vec::new();
    for mask in 0u8..16 {
        if mask.count_ones() == 2 {
            profiles.push((0..4).map(|k| if mask >> (3 - k) & 1 == 1 { d } else { -d }).collect());
        }
    }
    let mut worst = 0.0f64;
    for p in &profiles {
        let profile = DetuningProfile(p.clone());
        let psi = circuit_dark_state(&profile, 1.0, 1.0)?;
        let (rho, _) = steady(&SpinNetworkSpec::ideal(p.clone(), 1.0, 1.0))?;
        worst = worst.max(1.0 - pure_fidelity(&psi, &rho)?);
    }
    outcome(worst < 1e-8, format!("max 1-F = {worst:.2e} (< 1e-8) over {} permutations", profiles.len()))
}

fn six_node_path() -> Result<Outcome> {
    let waypoints = six_node_waypoints([0.2, 1.0, 0.5, 0.0]);
    let mut dark_impurity = 0.0f64;
    let mut dark_output = 0.0f64;
    for w in &waypoints {
        let (rho, out) = steady(&SpinNetworkSpec::ideal(w.0.clone(), 1.0, 1.0))?;
        dark_impurity = dark_impurity.max((1.0 - purity(&rho)).abs());
        dark_output = dark_output.max(out);
    }
    let mut min_bright = f64::INFINITY;
    for pair in waypoints.windows(2) {
        let mid: Vec<f64> = pair[0].0.iter().zip(&pair[1].0).map(|(a, b)| 0.5 * (a + b)).collect();
        min_bright = min_bright.min(steady(&SpinNetworkSpec::ideal(mid, 1.0, 1.0))?.1);
    }
    let start = Instant::now();
    let lossy = path_sweep(&waypoints, 50, 1.0, 1.0, 0.0025)?;
    let elapsed = start.elapsed();
    let max_purity = lossy.iter().map(|p| p.purity).fold(0.0, f64::max);
    let min_output = lossy.iter().map(|p| p.output).fold(f64::INFINITY, f64::min);
    let pass = dark_impurity < 1e-8
        && dark_output < 1e-8
        && min_bright > dark_output
        && max_purity < 1.0
        && min_output > 0.0
        && elapsed < Duration::from_secs(600);
    outcome(
        pass,
        format!(
            "dark: |1-P| = {dark_impurity:.2e}, <c^†c> = {dark_output:.2e} (< 1e-8); bright midpoints >= {min_bright:.2e}; \
             kappa0 path ({} pts, {:.0} s): max P = {max_purity:.6}, min <c^†c> = {min_output:.2e}",
            lossy.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn block_entropy_profiles() -> Result<Outcome> {
    let dimer = DetuningProfile::alternating(12, 1.0 / 3.0);
    let mut nested = vec![0.0; 12];
    for (k, v) in nested.iter_mut().enumerate().take(11).skip(1) {
        *v = if k % 2 == 1 { 1.0 / 3.0 } else { -1.0 / 3.0 };
    }
    let s_dimer = entropy_profile(&circuit_dark_state(&dimer, 2.0, 1.0)?)?;
    let s_nested = entropy_profile(&circuit_dark_state(&DetuningProfile(nested), 2.0, 1.0)?)?;
    let sym = [&s_dimer, &s_nested]
        .iter()
        .flat_map(|s| (0..=12).map(move |k| (s[k] - s[12 - k]).abs()))
        .fold(0.0f64, f64::max);
    let ends = [s_dimer[0], s_dimer[12], s_nested[0], s_nested[12]].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let even = (0..=12).step_by(2).map(|k| s_dimer[k].abs()).fold(0.0f64, f64::max);
    let dimer_max = s_dimer.iter().cloned().fold(0.0, f64::max);
    let nested_max = s_nested.iter().cloned().fold(0.0, f64::max);
    outcome(
        sym < 1e-10 && ends < 1e-10 && even < 1e-10 && nested_max > dimer_max,
        format!(
            "max |S(n) - S(12-n)| = {sym:.2e}, |S(0)|,|S(12)| <= {ends:.2e}, dimer even cuts <= {even:.2e}, \
             max S: (0,1,-1,..,-1,0)/3 {nested_max:.4} > dimer {dimer_max:.4} bits"
        ),
    )
}

fn random_system(rng: &mut ChaCha8Rng, d: usize) -> (Operator, Operator) {
    let mut u = || c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let m = CMat::from_fn(d, d, |_, _| u());
    let h = CMat::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let c = CMat::from_fn(d, d, |_, _| u());
    (Operator::local(h), Operator::local(c))
}

fn absorber_construction() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut built, mut skipped) = (0, 0);
    let (mut residual, mut purif) = (0.0f64, 0.0f64);
    while built < 20 {
        let d = if built % 2 == 0 { 2 } else { 3 };
        let (h, c) = random_system(&mut rng, d);
        let res = match build_absorber(&h, &c, 1.0, None) {
            Err(Error::DegenerateSpectrum { .. }) => {
                skipped += 1;
                continue;
            }
            other => other?,
        };
        built += 1;
        residual = residual.max(res.report.residual_i).max(res.report.residual_ii);
        let rho_a = steady_state_a(&h, &c, 1.0)?;
        purif = purif.max(trace_distance(&res.psi0.reduced_density(&[0])?, &rho_a)?);
    }

    let (delta, omega) = (1.0 / 3.0, 1.0);
    let h = Operator::local(spin_hamiltonian(delta, omega));
    let sm = Operator::local(ops::sigma_minus());
    let (hb, cb) = negative_counterpart(&h, &sm, 1.0, &ops::sigma_z())?;
    let spin_form = (hb.matrix() - spin_hamiltonian(-delta, omega)).norm_max() + (cb.matrix() - ops::sigma_minus()).norm_max();
    let spin_dark = check_dark_state(&h, &sm, &hb, &cb, 1.0, &pair_dark_state(omega, delta, 1.0))?;

    let kerr = KerrSpec::new(0.0, 0.5, 0.5, 1.0, 12)?;
    let ha = Operator::local(hamiltonian_a(&kerr));
    let a = Operator::local(ops::annihilation(12));
    let (hb, cb) = negative_counterpart(&ha, &a, 1.0, &ops::parity(12))?;
    let kerr_form = (hb.matrix() - hamiltonian_b(&kerr)).norm_max() + (cb.matrix() - ops::annihilation(12)).norm_max();
    let kerr_res = build_absorber(&ha, &a, 1.0, None)?.report;
    let kerr_residual = kerr_res.residual_i.max(kerr_res.residual_ii);

    let spin_residual = spin_dark.residual_i.max(spin_dark.residual_ii);
    outcome(
        residual < 1e-8 && purif < 1e-10 && spin_form < 1e-12 && spin_residual < 1e-8 && kerr_form < 1e-12 && kerr_residual < 1e-6,
        format!(
            "20 random ({skipped} degenerate skipped): residual {residual:.2e} (< 1e-8), purification {purif:.2e} (< 1e-10); \
             spin -sz H sz form {spin_form:.1e}, residual {spin_residual:.1e}; Kerr parity form {kerr_form:.1e}, \
             truncated absorber residual {kerr_residual:.1e} (< 1e-6)"
        ),
    )
}

fn kerr_dark_state() -> Result<Outcome> {
    let mut rec = 0.0f64;
    let (mut jump, mut ham, mut mom) = (0.0f64, 0.0f64, 0.0f64);
    for delta in [0.0, 1.0, -1.0] {
        for omega in [0.5, 1.0, 2.0] {
            let spec = KerrSpec::new(delta, 0.5, omega, 1.0, 30)?;
            let r = alpha_recursion(&spec)?;
            let c = alpha_closed_form(&spec, 30)?;
            rec = rec.max(r.alpha.iter().zip(&c).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
            let v = verify(&spec)?;
            jump = jump.max(v.jump_residual);
            ham = ham.max(v.hamiltonian_residual);
            mom = mom.max(v.moment_error);
        }
    }
    let mut purif = 0.0f64;
    for delta in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        for omega in [0.4, 0.8, 1.2, 1.6, 2.0] {
            let spec = KerrSpec::new(delta, 0.5, omega, 1.0, 2)?.with_auto_cutoff()?;
            purif = purif.max(trace_distance(&reduced_state_a(&spec)?, &single_cavity_steady_state(&spec)?)?);
        }
    }
    let mut coherent = 1.0f64;
    for (delta, omega) in [(0.0, 0.5), (0.5, 0.5), (-1.0, 1.0)] {
        let spec = KerrSpec::new(delta, 1e-4, omega, 1.0, 25)?;
        coherent = coherent.min(dark_state_fock(&spec)?.overlap(&coherent_product(&spec)?));
    }
    outcome(
        rec < 1e-12 && jump < 1e-10 && ham < 1e-8 && purif < 1e-8 && mom < 1e-9 && coherent > 0.999,
        format!(
            "(i) {rec:.1e} (< 1e-12) (ii) jump {jump:.1e} (< 1e-10), H {ham:.1e} (< 1e-8) \
             (iii) trace distance {purif:.1e} (< 1e-8) (iv) moments {mom:.1e} (< 1e-9) (v) min F = {coherent:.6} (> 0.999)"
        ),
    )
}

fn mcwf_consistency() -> Result<Outcome> {
    let dark_spec = build_spin_cascade(&SpinNetworkSpec::ideal(vec![1.0 / 3.0, -1.0 / 3.0], 1.0, 1.0))?;
    let request = TrajectoryRequest {
        t_final: 100.0,
        n_traj: 500,
        seed: 1,
        sample_times: vec![],
        observables: vec![],
        tolerances: Tolerances::default(),
    };
    let recs = mcwf_trajectories(&dark_spec, &pair_dark_state(1.0, 1.0 / 3.0, 1.0), &request)?;
    let jumps: usize = recs.iter().map(|r| r.jump_times.len()).sum();

    let bright = build_spin_cascade(&SpinNetworkSpec::ideal(vec![1.0 / 3.0, 1.0 / 3.0], 1.0, 1.0))?;
    let c = bright.output_operator();
    let n_out = &c.adjoint() * &c;
    let times = vec![0.5, 1.0, 2.0, 4.0, 8.0];
    let ground = Ket::basis(bright.dims().clone(), 0);
    let me = evolve_sampled(&build_liouvillian(&bright), &ground.density(), &times, Tolerances { rtol: 1e-10, atol: 1e-12 })?;
    let request = TrajectoryRequest {
        t_final: 8.0,
        n_traj: 2000,
        seed: 2,
        sample_times: times.clone(),
        observables: vec![n_out.clone()],
        tolerances: Tolerances::default(),
    };
    let stats = ensemble_statistics(&mcwf_trajectories(&bright, &ground, &request)?);
    let mut worst = 0.0f64;
    for (s, rho) in me.iter().enumerate() {
        let exact = expectation(&n_out, rho)?.re;
        worst = worst.max((stats.mean[s][0] - exact).abs() / stats.std_error[s][0]);
    }
    outcome(jumps == 0 && worst < 3.0, format!("dark: {jumps} jumps in 500 x 100/gamma; bright: max deviation {worst:.2} SE (< 3)"))
}

fn imperfection_trends() -> Result<Outcome> {
    let base = PairParams::ideal(1.0, 0.0, 1.0);
    let conc = |p: PairParams| pair_metrics(&p).map(|f| f.concurrence.unwrap_or(f64::NAN));
    let ideal = conc(base)?;
    let alpha2 = pair_alpha(1.0, 0.0, 1.0).norm_sqr();
    let ideal_err = (ideal - alpha2 / (1.0 + alpha2)).abs();
    let series: [(&str, Vec<PairParams>); 5] = [
        ("kappa0", [0.0, 0.01, 0.1].map(|v| PairParams { kappa0: v, ..base }).to_vec()),
        ("1/T2", [f64::INFINITY, 100.0, 10.0].map(|v| PairParams { t2: v, ..base }).to_vec()),
        ("eta", [0.0, 0.05, 0.2].map(|v| PairParams { eta: v, ..base }).to_vec()),
        ("+eps", [0.0, 0.05, 0.2].map(|v| PairParams { offset: v, ..base }).to_vec()),
        ("-eps", [0.0, -0.05, -0.2].map(|v| PairParams { offset: v, ..base }).to_vec()),
    ];
    let mut pass = ideal_err < 1e-10;
    let mut parts = vec![format!("ideal C = {ideal:.12} (|C - 8/9| = {ideal_err:.1e})")];
    for (name, points) in series {
        let c: Vec<f64> = points.into_iter().map(conc).collect::<Result<_>>()?;
        let decreasing = c.windows(2).all(|w| w[1] < w[0]);
        pass &= decreasing;
        parts.push(format!("{name}: {:.4}>{:.4}>{:.4}{}", c[0], c[1], c[2], if decreasing { "" } else { " NOT DECREASING" }));
    }
    outcome(pass, parts.join("; "))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Result<Outcome>,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "two-node dark state", limit: Some(Duration::from_secs(1)), run: two_node_dark_state },
        Criterion { id: 2, name: "dimer chain", limit: None, run: dimer_chain },
        Criterion { id: 3, name: "form invariance", limit: Some(Duration::from_secs(5)), run: form_invariance },
        Criterion { id: 4, name: "circuit dark states", limit: None, run: circuit_dark_states },
        Criterion { id: 5, name: "six-node detuning path", limit: None, run: six_node_path },
        Criterion { id: 6, name: "block entropy profiles", limit: Some(Duration::from_secs(10)), run: block_entropy_profiles },
        Criterion { id: 7, name: "absorber construction", limit: None, run: absorber_construction },
        Criterion { id: 8, name: "Kerr dark state", limit: Some(Duration::from_secs(120)), run: kerr_dark_state },
        Criterion { id: 9, name: "trajectory consistency", limit: Some(Duration::from_secs(60)), run: mcwf_consistency },
        Criterion { id: 10, name: "imperfection trends", limit: None, run: imperfection_trends },
    ];
    let mut failures = 0;
    for c in criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed < l);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let limit = c.limit.map_or(String::new(), |l| format!(", limit {} s", l.as_secs()));
        println!(
            "[{}] {:>2} {}: {} ({:.2} s{limit})",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64()
        );
        failures += usize::from(!pass);
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
