//! Cascaded master equations: construction, steady states, spectra and time evolution.
//!
//! A network of nodes `0..N` sits on one unidirectional waveguide. Node `i`
//! emits through `c_i` at rate `gamma` and drives every node `j > i` with the
//! cumulative transmission `t_ij = a_i a_{i+1} ... a_{j-1}` of the links
//! between them. The generator is
//!
//! ```text
//! L(rho) = sum_i ( -i[H_i, rho] + gamma D[c_i] rho )
//!        - gamma sum_{i<j} t_ij ( [c_j^†, c_i rho] + [rho c_i^†, c_j] )
//!        + sum of local channels kappa D[L] rho
//! ```
//!
//! Internally every generator is stored as `L(rho) = G rho + rho G^† + sum w A rho B^†`.
//! Dense solves use the real coordinates of `rho` in an orthonormal Hermitian
//! basis, which keeps the LU real and halves its cost compared with the
//! complex column-stacked form.

use faer::prelude::*;
use faer::Mat;

use crate::error::{Error, Result};
use crate::ode::{Integrator, Tolerances};
use crate::operator::{
    c64, embed_block, hermiticity_deviation, trace_product, CMat, DensityMatrix, Operator, SubsystemDims, I,
    ONE, ZERO,
};

/// Largest total dimension handled by the dense steady-state solver.
pub const DENSE_LIMIT: usize = 100;
/// Relative singular-value threshold separating a unique steady state from a degenerate one.
pub const UNIQUENESS_TOL: f64 = 1e-9;
/// Relative residual accepted from the dense steady-state solver.
pub const DENSE_RESIDUAL_TOL: f64 = 1e-10;
/// Residual at which time integration counts as stationary.
pub const STATIONARY_TOL: f64 = 1e-8;

/// One node of a cascade: local Hamiltonian, waveguide coupling and imperfection channels.
#[derive(Clone, Debug)]
pub struct NodeSpec {
    pub h: CMat,
    pub c: CMat,
    pub local_channels: Vec<(f64, CMat)>,
}

impl NodeSpec {
    pub fn new(h: CMat, c: CMat) -> Result<Self> {
        let d = h.nrows();
        if h.ncols() != d || c.nrows() != d || c.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "node Hamiltonian {}x{} and jump {}x{}",
                h.nrows(),
                h.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        let dev = hermiticity_deviation(&h);
        if dev > 1e-10 * h.norm_l2().max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { h, c, local_channels: Vec::new() })
    }

    /// Adds a local Lindblad term `rate D[op]`.
    pub fn with_channel(mut self, rate: f64, op: CMat) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("channel rate {rate} must be finite and non-negative")));
        }
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!("{}x{} channel on a node of dimension {}", op.nrows(), op.ncols(), self.dim())));
        }
        if rate > 0.0 {
            self.local_channels.push((rate, op));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }
}

/// An ordered cascade of nodes on one waveguide.
#[derive(Clone, Debug)]
pub struct CascadeSpec {
    nodes: Vec<NodeSpec>,
    gamma: f64,
    link_amplitudes: Vec<f64>,
    dims: SubsystemDims,
}

impl CascadeSpec {
    /// Lossless cascade.
    pub fn new(nodes: Vec<NodeSpec>, gamma: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("cascade needs at least one node".into()));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
        }
        let dims = SubsystemDims::new(nodes.iter().map(NodeSpec::dim).collect())?;
        let link_amplitudes = vec![1.0; nodes.len() - 1];
        Ok(Self { nodes, gamma, link_amplitudes, dims })
    }

    /// Sets the amplitude transmission `sqrt(1 - eta)` of each of the `N - 1` links.
    pub fn with_link_amplitudes(mut self, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != self.nodes.len() - 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} link amplitudes for {} nodes",
                amplitudes.len(),
                self.nodes.len()
            )));
        }
        if let Some(a) = amplitudes.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidParameter(format!("link amplitude {a} outside [0, 1]")));
        }
        self.link_amplitudes = amplitudes;
        Ok(self)
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn link_amplitudes(&self) -> &[f64] {
        &self.link_amplitudes
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Cumulative amplitude from node `i` to node `j >= i`.
    pub fn transmission(&self, i: usize, j: usize) -> f64 {
        self.link_amplitudes[i..j].iter().product()
    }

    /// Amplitude with which node `i` reaches the waveguide output.
    pub fn output_transmission(&self, i: usize) -> f64 {
        self.link_amplitudes[i..].iter().product()
    }

    /// The first `k` nodes as a cascade of their own.
    pub fn upstream(&self, k: usize) -> Result<CascadeSpec> {
        if k == 0 || k > self.nodes.len() {
            return Err(Error::InvalidParameter(format!("upstream part of size {k} of {} nodes", self.nodes.len())));
        }
        CascadeSpec::new(self.nodes[..k].to_vec(), self.gamma)?.with_link_amplitudes(self.link_amplitudes[..k - 1].to_vec())
    }

    fn embedded(&self, i: usize, m: &CMat) -> CMat {
        let n = self.dims.len();
        embed_block(m, self.dims.block(0, i), self.dims.block(i + 1, n))
    }

    /// Node jump operators placed in the full space.
    pub fn embedded_jumps(&self) -> Vec<CMat> {
        (0..self.nodes.len()).map(|i| self.embedded(i, &self.nodes[i].c)).collect()
    }

    /// Transmitted collective jump `sum_i t_{i,out} c_i` (without the `sqrt(gamma)` factor).
    pub fn output_operator(&self) -> Operator {
        let d = self.dims.total();
        let mut c = CMat::zeros(d, d);
        for (i, ci) in self.embedded_jumps().iter().enumerate() {
            c += ci * faer::Scale(c64::new(self.output_transmission(i), 0.0));
        }
        Operator::new(c, self.dims.clone()).expect("dims are consistent")
    }

    /// Equivalent Lindblad form: one Hamiltonian and a list of jump operators with rates absorbed.
    ///
    /// Jump 0 is the waveguide output. Each lossy link contributes one loss jump
    /// collecting everything emitted upstream of it; local channels follow.
    pub fn lindblad_form(&self) -> LindbladForm {
        let n = self.nodes.len();
        let d = self.dims.total();
        let cs = self.embedded_jumps();
        let g = self.gamma;

        let mut h = CMat::zeros(d, d);
        for i in 0..n {
            h += self.embedded(i, &self.nodes[i].h);
        }
        for i in 0..n {
            for j in i + 1..n {
                let t = self.transmission(i, j);
                if t == 0.0 {
                    continue;
                }
                // -(i gamma t / 2)(c_j^† c_i - c_i^† c_j)
                let x = &cs[j].adjoint() * &cs[i] - &cs[i].adjoint() * &cs[j];
                h += &x * faer::Scale(c64::new(0.0, -0.5 * g * t));
            }
        }

        let mut jumps = Vec::new();
        let mut labels = Vec::new();
        let mut out = CMat::zeros(d, d);
        for (i, ci) in cs.iter().enumerate() {
            out += ci * faer::Scale(c64::new(g.sqrt() * self.output_transmission(i), 0.0));
        }
        jumps.push(out);
        labels.push("output".to_string());
        for k in 0..n.saturating_sub(1) {
            let a = self.link_amplitudes[k];
            if a >= 1.0 {
                continue;
            }
            let w = (g * (1.0 - a * a)).sqrt();
            let mut l = CMat::zeros(d, d);
            for (i, ci) in cs.iter().enumerate().take(k + 1) {
                l += ci * faer::Scale(c64::new(w * self.transmission(i, k), 0.0));
            }
            jumps.push(l);
            labels.push(format!("loss link {k}"));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for (ch, (rate, op)) in node.local_channels.iter().enumerate() {
                jumps.push(&self.embedded(i, op) * faer::Scale(c64::new(rate.sqrt(), 0.0)));
                labels.push(format!("node {i} channel {ch}"));
            }
        }
        LindbladForm { hamiltonian: h, jumps, labels, dims: self.dims.clone() }
    }
}

/// `-i[H, rho] + sum_k D[J_k] rho` with rates folded into the jumps.
#[derive(Clone, Debug)]
pub struct LindbladForm {
    pub hamiltonian: CMat,
    pub jumps: Vec<CMat>,
    pub labels: Vec<String>,
    pub dims: SubsystemDims,
}

impl LindbladForm {
    /// `H - (i/2) sum_k J_k^† J_k`.
    pub fn effective_hamiltonian(&self) -> CMat {
        let mut h = self.hamiltonian.clone();
        for j in &self.jumps {
            h += &(j.adjoint() * j) * faer::Scale(c64::new(0.0, -0.5));
        }
        h
    }
}

#[derive(Clone, Debug)]
struct Sandwich {
    weight: f64,
    a: CMat,
    b: CMat,
}

/// A Liouvillian `L(rho) = G rho + rho G^† + sum w A rho B^†`.
#[derive(Clone, Debug)]
pub struct Superoperator {
    dims: SubsystemDims,
    drift: CMat,
    sandwiches: Vec<Sandwich>,
}

/// Builds the cascaded Liouvillian in its sum form.
pub fn build_liouvillian(spec: &CascadeSpec) -> Superoperator {
    let n = spec.n_nodes();
    let d = spec.dims.total();
    let g = spec.gamma;
    let cs = spec.embedded_jumps();

    let mut drift = CMat::zeros(d, d);
    let mut sandwiches = Vec::new();
    for (i, node) in spec.nodes.iter().enumerate() {
        drift += &spec.embedded(i, &node.h) * faer::Scale(-I);
        drift += &(cs[i].adjoint() * &cs[i]) * faer::Scale(c64::new(-0.5 * g, 0.0));
        sandwiches.push(Sandwich { weight: g, a: cs[i].clone(), b: cs[i].clone() });
        for (rate, op) in &node.local_channels {
            let l = spec.embedded(i, op);
            drift += &(l.adjoint() * &l) * faer::Scale(c64::new(-0.5 * rate, 0.0));
            sandwiches.push(Sandwich { weight: *rate, a: l.clone(), b: l });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let t = spec.transmission(i, j);
            if t == 0.0 {
                continue;
            }
            drift += &(cs[j].adjoint() * &cs[i]) * faer::Scale(c64::new(-g * t, 0.0));
            sandwiches.push(Sandwich { weight: g * t, a: cs[i].clone(), b: cs[j].clone() });
            sandwiches.push(Sandwich { weight: g * t, a: cs[j].clone(), b: cs[i].clone() });
        }
    }
    Superoperator { dims: spec.dims.clone(), drift, sandwiches }
}

/// Uniqueness verdict of a steady-state computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Uniqueness {
    Unique,
    /// The solver did not inspect the null space (matrix-free path).
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    pub uniqueness: Uniqueness,
    /// Frobenius norm of `L(rho)`.
    pub residual: f64,
    /// Upper estimate of the smallest singular value of the trace-bordered generator, when computed.
    pub sigma_min: Option<f64>,
}

impl SteadyState {
    pub fn is_unique(&self) -> bool {
        self.uniqueness == Uniqueness::Unique
    }
}

impl Superoperator {
    /// Lindblad-form generator.
    pub fn from_lindblad(form: &LindbladForm) -> Superoperator {
        let drift = &form.effective_hamiltonian() * faer::Scale(-I);
        let sandwiches = form.jumps.iter().map(|j| Sandwich { weight: 1.0, a: j.clone(), b: j.clone() }).collect();
        Superoperator { dims: form.dims.clone(), drift, sandwiches }
    }

    /// Generator of a single system with Hamiltonian `h` and channels `rate D[op]`.
    pub fn lindblad(h: &Operator, channels: &[(f64, CMat)]) -> Result<Superoperator> {
        let d = h.dim();
        let mut drift = h.matrix() * faer::Scale(-I);
        let mut sandwiches = Vec::new();
        for (rate, op) in channels {
            if op.nrows() != d || op.ncols() != d {
                return Err(Error::DimensionMismatch(format!("{}x{} channel for dimension {d}", op.nrows(), op.ncols())));
            }
            if *rate < 0.0 {
                return Err(Error::InvalidParameter(format!("negative rate {rate}")));
            }
            drift += &(op.adjoint() * op) * faer::Scale(c64::new(-0.5 * rate, 0.0));
            sandwiches.push(Sandwich { weight: *rate, a: op.clone(), b: op.clone() });
        }
        Ok(Superoperator { dims: h.dims().clone(), drift, sandwiches })
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    /// Hilbert-space dimension `d`; the superoperator acts on `d^2` entries.
    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    /// `L(rho)` for an arbitrary square matrix.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = &self.drift * rho;
        out += rho * self.drift.adjoint();
        for s in &self.sandwiches {
            let ar = &s.a * rho;
            out += &(&ar * s.b.adjoint()) * faer::Scale(c64::new(s.weight, 0.0));
        }
        out
    }

    /// Largest deviation from trace preservation: `G + G^† + sum w B^† A` must vanish.
    pub fn trace_defect(&self) -> f64 {
        let mut k = &self.drift + self.drift.adjoint();
        for s in &self.sandwiches {
            k += &(s.b.adjoint() * &s.a) * faer::Scale(c64::new(s.weight, 0.0));
        }
        k.norm_max()
    }

    /// Column-stacked complex matrix of size `d^2 x d^2`; intended for small systems.
    pub fn to_dense_complex(&self) -> CMat {
        let d = self.dim();
        let n = d * d;
        let mut out = CMat::zeros(n, n);
        for q in 0..d {
            for p in 0..d {
                let e = CMat::from_fn(d, d, |r, s| if r == p && s == q { ONE } else { ZERO });
                let l = self.apply(&e);
                let col = q * d + p;
                for s in 0..d {
                    for r in 0..d {
                        out[(s * d + r, col)] = l[(r, s)];
                    }
                }
            }
        }
        out
    }

    /// Real matrix of `L` in the orthonormal Hermitian basis (see [`hermitian_coords`]).
    pub fn to_dense_real(&self) -> Mat<f64> {
        let d = self.dim();
        let n = d * d;
        let mut out = Mat::<f64>::zeros(n, n);
        let g_cols = sparse_columns(&self.drift);
        let sw: Vec<(f64, Vec<Vec<(usize, c64)>>, Vec<Vec<(usize, c64)>>)> =
            self.sandwiches.iter().map(|s| (s.weight, sparse_columns(&s.a), sparse_columns(&s.b))).collect();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut entries: Vec<(usize, usize, c64)> = Vec::new();
        for p in 0..d {
            for q in 0..d {
                entries.clear();
                // G E_pq puts column p of G into column q
                for &(r, v) in &g_cols[p] {
                    entries.push((r, q, v));
                }
                // E_pq G^† puts conj(column q of G) into row p
                for &(s, v) in &g_cols[q] {
                    entries.push((p, s, v.conj()));
                }
                for (w, a, b) in &sw {
                    for &(r, av) in &a[p] {
                        for &(s, bv) in &b[q] {
                            entries.push((r, s, av * bv.conj() * *w));
                        }
                    }
                }
                let targets: [(usize, c64); 2] = if p == q {
                    [(p, ONE), (usize::MAX, ZERO)]
                } else if p < q {
                    let k = pair_index(d, p, q);
                    [(d + 2 * k, c64::new(h, 0.0)), (d + 2 * k + 1, c64::new(0.0, -h))]
                } else {
                    let k = pair_index(d, q, p);
                    [(d + 2 * k, c64::new(h, 0.0)), (d + 2 * k + 1, c64::new(0.0, h))]
                };
                for &(col, coef) in &targets {
                    if col == usize::MAX {
                        continue;
                    }
                    for &(r, s, z) in &entries {
                        let w = coef * z;
                        if r == s {
                            out[(r, col)] += w.re;
                        } else if r < s {
                            let k = pair_index(d, r, s);
                            out[(d + 2 * k, col)] += w.re * h;
                            out[(d + 2 * k + 1, col)] -= w.im * h;
                        } else {
                            let k = pair_index(d, s, r);
                            out[(d + 2 * k, col)] += w.re * h;
                            out[(d + 2 * k + 1, col)] += w.im * h;
                        }
                    }
                }
            }
        }
        out
    }
}

fn sparse_columns(m: &CMat) -> Vec<Vec<(usize, c64)>> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).filter_map(|i| (m[(i, j)] != ZERO).then(|| (i, m[(i, j)]))).collect())
        .collect()
}

/// Position of the pair `p < q` among the off-diagonal coordinates.
fn pair_index(d: usize, p: usize, q: usize) -> usize {
    p * d - p * (p + 1) / 2 + (q - p - 1)
}

/// Coordinates of a Hermitian matrix in the orthonormal basis
/// `{E_rr} ∪ {(E_pq + E_qp)/√2, (-iE_pq + iE_qp)/√2 : p < q}`.
///
/// Diagonal coordinates come first; the pair `(p, q)` occupies two consecutive slots after them.
pub fn hermitian_coords(m: &CMat) -> Vec<f64> {
    let d = m.nrows();
    let mut x = vec![0.0; d * d];
    let s2 = std::f64::consts::SQRT_2;
    for r in 0..d {
        x[r] = m[(r, r)].re;
        for s in r + 1..d {
            let k = pair_index(d, r, s);
            x[d + 2 * k] = s2 * m[(r, s)].re;
            x[d + 2 * k + 1] = -s2 * m[(r, s)].im;
        }
    }
    x
}

/// Inverse of [`hermitian_coords`].
pub fn from_hermitian_coords(x: &[f64], d: usize) -> CMat {
    assert_eq!(x.len(), d * d, "coordinate vector length");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMat::zeros(d, d);
    for r in 0..d {
        m[(r, r)] = c64::new(x[r], 0.0);
        for s in r + 1..d {
            let k = pair_index(d, r, s);
            let z = c64::new(x[d + 2 * k] * h, -x[d + 2 * k + 1] * h);
            m[(r, s)] = z;
            m[(s, r)] = z.conj();
        }
    }
    m
}

/// Stationary state of `l`.
///
/// Up to [`DENSE_LIMIT`] the generator is bordered with the trace functional,
/// `M = L + t t^T / d`, which is invertible exactly when the null space of `L`
/// is one-dimensional; `M x = t` then yields the steady state directly. Larger
/// systems are integrated from the maximally mixed state until stationary.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    if l.dim() <= DENSE_LIMIT {
        steady_state_dense(l)
    } else {
        steady_state_by_evolution(l, Tolerances::default())
    }
}

fn steady_state_dense(l: &Superoperator) -> Result<SteadyState> {
    let d = l.dim();
    let n = d * d;
    let mut m = l.to_dense_real();
    let scale = m.norm_l2().max(1.0);
    let inv_d = 1.0 / d as f64;
    for a in 0..d {
        for b in 0..d {
            m[(a, b)] += inv_d;
        }
    }
    let lu = m.partial_piv_lu();
    let t = Mat::<f64>::from_fn(n, 1, |i, _| if i < d { 1.0 } else { 0.0 });
    let mut x = lu.solve(&t);
    // one round of iterative refinement
    let r = &t - &m * &x;
    x += lu.solve(&r);

    let sigma = smallest_singular_estimate(&lu, n);
    let threshold = UNIQUENESS_TOL * scale;
    if !(sigma > threshold) {
        return Err(Error::NonUniqueSteadyState { sigma, threshold });
    }

    let coords: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    let tr: f64 = coords[..d].iter().sum();
    if !(tr.abs() > 0.0) || !tr.is_finite() {
        return Err(Error::SteadyState(format!("null vector has trace {tr}")));
    }
    let rho = from_hermitian_coords(&coords.iter().map(|v| v / tr).collect::<Vec<_>>(), d);
    let residual = l.apply(&rho).norm_l2();
    if residual > DENSE_RESIDUAL_TOL * scale {
        return Err(Error::SteadyState(format!("residual {residual:e} exceeds {:e}", DENSE_RESIDUAL_TOL * scale)));
    }
    Ok(SteadyState {
        rho: DensityMatrix::from_matrix_normalized(rho, l.dims.clone()),
        uniqueness: Uniqueness::Unique,
        residual,
        sigma_min: Some(sigma),
    })
}

/// Inverse iteration on `M^T M`; the result is an upper bound on the smallest singular value of `M`.
fn smallest_singular_estimate(lu: &faer::linalg::solvers::PartialPivLu<f64>, n: usize) -> f64 {
    let mut v = Mat::<f64>::from_fn(n, 1, |i, _| 1.0 + ((i * 7919) % 13) as f64 / 13.0);
    let norm = v.norm_l2();
    v = &v * faer::Scale(1.0 / norm);
    let mut sigma = f64::INFINITY;
    for _ in 0..8 {
        let y = lu.solve(&v);
        let ny = y.norm_l2();
        if !ny.is_finite() || ny == 0.0 {
            return 0.0;
        }
        sigma = sigma.min(1.0 / ny);
        let z = lu.solve_transpose(&y);
        let nz = z.norm_l2();
        if !nz.is_finite() || nz == 0.0 {
            return 0.0;
        }
        v = &z * faer::Scale(1.0 / nz);
    }
    sigma
}

fn steady_state_by_evolution(l: &Superoperator, tol: Tolerances) -> Result<SteadyState> {
    let mut rho = DensityMatrix::maximally_mixed(l.dims.clone());
    let chunk = 10.0;
    let max_chunks = 10_000;
    for _ in 0..max_chunks {
        rho = evolve(l, &rho, chunk, tol)?;
        let residual = l.apply(rho.matrix()).norm_l2();
        if residual < STATIONARY_TOL {
            return Ok(SteadyState { rho, uniqueness: Uniqueness::Unknown, residual, sigma_min: None });
        }
    }
    Err(Error::SteadyState(format!("not stationary after t = {}", chunk * max_chunks as f64)))
}

/// Slowest nonzero relaxation rate: the minimum of `-Re λ` over all eigenvalues but the one closest to zero.
pub fn spectral_gap(l: &Superoperator) -> Result<f64> {
    let r = l.to_dense_real();
    let eig = r.eigenvalues().map_err(|e| Error::LinearAlgebra(format!("eigenvalues: {e:?}")))?;
    let mut lambdas: Vec<c64> = eig.into_iter().map(|z| c64::new(z.re, z.im)).collect();
    if lambdas.len() < 2 {
        return Err(Error::LinearAlgebra("generator has fewer than two eigenvalues".into()));
    }
    let (idx, _) = lambdas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("non-empty");
    lambdas.swap_remove(idx);
    Ok(lambdas.iter().map(|z| -z.re).fold(f64::INFINITY, f64::min))
}

/// `rho(t_final)` under `d rho / dt = L(rho)`; Hermiticity and unit trace are restored afterwards.
pub fn evolve(l: &Superoperator, rho0: &DensityMatrix, t_final: f64, tol: Tolerances) -> Result<DensityMatrix> {
    Ok(evolve_sampled(l, rho0, &[t_final], tol)?.pop().expect("one sample"))
}

/// States at each of the ascending `times`.
pub fn evolve_sampled(l: &Superoperator, rho0: &DensityMatrix, times: &[f64], tol: Tolerances) -> Result<Vec<DensityMatrix>> {
    if rho0.dims() != l.dims() {
        return Err(Error::DimensionMismatch("initial state and generator dims differ".into()));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidParameter(format!("negative or invalid time {t}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("sample times must be ascending".into()));
    }
    let d = l.dim();
    let m0 = rho0.matrix();
    let mut y: Vec<c64> = (0..d * d).map(|k| m0[(k % d, k / d)]).collect();
    let rhs = |y: &[c64], dy: &mut [c64]| {
        let rho = CMat::from_fn(d, d, |r, s| y[s * d + r]);
        let out = l.apply(&rho);
        for s in 0..d {
            for r in 0..d {
                dy[s * d + r] = out[(r, s)];
            }
        }
    };
    let mut integ = Integrator::new(rhs, d * d, 0.0, tol);
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        if t == 0.0 {
            states.push(rho0.clone());
            continue;
        }
        integ.advance_to(&mut y, t)?;
        let m = CMat::from_fn(d, d, |r, s| y[s * d + r]);
        states.push(DensityMatrix::from_matrix_normalized(m, l.dims.clone()));
    }
    Ok(states)
}

/// `tr(A rho)`.
pub fn expectation(a: &Operator, rho: &DensityMatrix) -> Result<c64> {
    if a.dims() != rho.dims() {
        return Err(Error::DimensionMismatch("operator and state dims differ".into()));
    }
    Ok(trace_product(a.matrix(), rho.matrix()))
}

/// `<c^† c>` for the transmitted collective jump `c = sum_i t_{i,out} c_i`.
pub fn output_intensity(spec: &CascadeSpec, rho: &DensityMatrix) -> Result<f64> {
    let c = spec.output_operator();
    let n = c.adjoint().matrix() * c.matrix();
    Ok(expectation(&Operator::new(n, spec.dims.clone())?, rho)?.re)
}
