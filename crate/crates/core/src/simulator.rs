//! Adversarial Monte Carlo games: the two-party guessing game and the
//! multiparty test game, with honest, fixed-state, extremal-product, and
//! mixture adversaries; verdicts against thresholds; and concurrence
//! sweeps.
//!
//! Reproducibility: trial t uses `ChaCha8Rng::seed_from_u64(seed)` on
//! stream t, so results are independent of execution order and thread
//! count, and the transcript writer replays exactly what the parallel
//! runner played.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ghz::{
    evaluate_test, generate_test, honest_aggregate_direction, GhzStrategy, GhzTest, PartyLayout,
};
use crate::guessing::{g_star, gamma_hat, gme_threshold, helstrom};
use crate::qcore::{
    partial_trace_matrix, qubit_projector, ComplexMatrix, DensityOperator, PureState,
};
use crate::special::normal_cdf;
use crate::strategy::{BlochVector, Strategy};

/// Probabilities this close to 0 or 1 are treated as deterministic, so
/// states built to pass with certainty pass every trial.
const SNAP_TOL: f64 = 1e-12;
/// Eigenvalue tie rule for optimal effects (matches the discrimination
/// routine): the zero eigenspace is assigned to the + effect.
const TIE_EIGENVALUE: f64 = -1e-12;
/// Statevector games are capped at this many qubits.
const MAX_QUBITS: usize = 10;
/// Density-matrix games solve a fresh eigenproblem per trial; the guessing
/// side is capped to keep that tractable.
const MAX_DENSITY_GUESS_DIM: usize = 64;

// ---------------------------------------------------------------------------
// Public types.
// ---------------------------------------------------------------------------

/// Who prepared the shared state, and how they respond.
#[derive(Clone, Debug)]
pub enum AdversaryModel {
    /// The target state itself (Bell pair / GHZ state) with the optimal
    /// response; passes every test.
    HonestTarget,
    /// An arbitrary prepared state with the optimal response.
    ///
    /// Two-party game: `rho` lives on measured ⊗ guessing factors of
    /// dimensions `d_a` × `d_b` (`d_a` > 2 is projected onto its first two
    /// levels, leaked mass failing). Multiparty game: `d_a` must be 2^h for
    /// h honest parties, with the honest qubits (ascending party index)
    /// forming the first factor and everything the dishonest coalition
    /// holds — dishonest qubits in ascending order, ancillas last — forming
    /// the second.
    FixedState {
        rho: DensityOperator,
        d_a: usize,
        d_b: usize,
    },
    /// The best state with no entanglement across the honest/dishonest cut:
    /// aligned with an intelligent direction at C = 0, answered
    /// deterministically. Its pass rate is the threshold γ*.
    OptimalProductAtThreshold,
    /// The extremal mixture of the product state (weight 1 − C) and the
    /// target state (weight C), tagged by a flag the coalition can read.
    /// Its pass rate is the linear bound γ̂(C).
    MixtureAtConcurrence { c: f64 },
}

/// Aggregate result of a simulated game.
#[derive(Clone, Debug, Serialize)]
pub struct GameRecord {
    pub trials: u64,
    pub passes: u64,
    pub pass_rate: f64,
    /// Binomial standard error √(p̂(1 − p̂)/n).
    pub std_err: f64,
    pub seed: u64,
    /// Digest of the verifier's (effective) strategy.
    pub strategy_digest: String,
}

impl GameRecord {
    fn new(trials: u64, passes: u64, seed: u64, strategy_digest: String) -> GameRecord {
        let p = passes as f64 / trials as f64;
        GameRecord {
            trials,
            passes,
            pass_rate: p,
            std_err: (p * (1.0 - p) / trials as f64).sqrt(),
            seed,
            strategy_digest,
        }
    }
}

/// Decision of the certification test.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub threshold: f64,
    pub pass_rate: f64,
    pub std_err: f64,
    pub k_sigma: f64,
    /// pass_rate − k·σ > threshold.
    pub certified: bool,
    /// Φ((pass_rate − threshold)/σ), the one-sided confidence that the true
    /// rate exceeds the threshold.
    pub confidence: f64,
}

/// One row of a concurrence sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub c: f64,
    pub simulated: f64,
    pub analytic: f64,
    pub std_err: f64,
}

/// One transcript line (JSON object per trial).
#[derive(Serialize)]
struct TranscriptLine<'a> {
    trial: u64,
    test: &'a serde_json::Value,
    honest_outcomes: &'a [i8],
    adversary_response: &'a [i8],
    pass: bool,
}

/// Everything a single trial produced.
struct TrialDetail {
    test: serde_json::Value,
    honest: Vec<i8>,
    response: Vec<i8>,
    pass: bool,
}

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Bernoulli draw that consumes no randomness when the probability is
/// numerically 0 or 1.
fn snapped_bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    if p >= 1.0 - SNAP_TOL {
        true
    } else if p <= SNAP_TOL {
        false
    } else {
        rng.gen::<f64>() < p
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trial count must be at least 1"));
    }
    Ok(())
}

/// Spinor of the ±1 eigenstate of r·σ.
fn eigenspinor(r: &BlochVector, s: f64) -> [Complex64; 2] {
    let theta = r.z().clamp(-1.0, 1.0).acos();
    let phi = r.y().atan2(r.x());
    let (ht_sin, ht_cos) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let e_iphi = Complex64::from_polar(1.0, phi);
    if s >= 0.0 {
        [Complex64::new(ht_cos, 0.0), e_iphi * ht_sin]
    } else {
        [Complex64::new(ht_sin, 0.0), -e_iphi * ht_cos]
    }
}

/// Bloch vector → qubit amplitudes (the +1 eigenstate of u·σ).
fn spinor_of(u: &BlochVector) -> [Complex64; 2] {
    eigenspinor(u, 1.0)
}

fn run_game<W>(trials: u64, seed: u64, digest: String, worker: &W) -> Result<GameRecord>
where
    W: Fn(u64) -> Result<TrialDetail> + Sync,
{
    let passes = (0..trials)
        .into_par_iter()
        .map(|t| worker(t).map(|d| d.pass as u64))
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(GameRecord::new(trials, passes, seed, digest))
}

fn run_game_transcript<W>(
    trials: u64,
    seed: u64,
    digest: String,
    worker: &W,
    out: &mut dyn Write,
) -> Result<GameRecord>
where
    W: Fn(u64) -> Result<TrialDetail>,
{
    let mut passes = 0u64;
    for t in 0..trials {
        let d = worker(t)?;
        passes += d.pass as u64;
        let line = TranscriptLine {
            trial: t,
            test: &d.test,
            honest_outcomes: &d.honest,
            adversary_response: &d.response,
            pass: d.pass,
        };
        serde_json::to_writer(&mut *out, &line)
            .map_err(|e| Error::numeric(format!("transcript serialization failed: {e}")))?;
        out.write_all(b"\n").map_err(|e| Error::Io {
            path: "<transcript>".into(),
            source: e,
        })?;
    }
    Ok(GameRecord::new(trials, passes, seed, digest))
}

// ---------------------------------------------------------------------------
// Two-party game.
// ---------------------------------------------------------------------------

enum BellWorker {
    Quantum {
        rho: DensityOperator,
        d_a: usize,
        d_b: usize,
        /// Optimal effect per discrete atom of μ.
        atom_effects: Vec<ComplexMatrix>,
    },
    Product {
        u: BlochVector,
    },
}

fn embed_qubit_projector(r: &BlochVector, s: f64, d_a: usize) -> ComplexMatrix {
    let q = qubit_projector(r.as_array(), s);
    let mut m = ComplexMatrix::zeros(d_a, d_a);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = q[(i, j)];
        }
    }
    m
}

impl BellWorker {
    fn build(mu: &Strategy, adversary: &AdversaryModel) -> Result<BellWorker> {
        let quantum = |rho: DensityOperator, d_a: usize, d_b: usize| -> Result<BellWorker> {
            if d_a * d_b != rho.dim() || d_a < 2 {
                return Err(Error::invalid(format!(
                    "state dimension {} does not match bipartition {d_a}x{d_b}",
                    rho.dim()
                )));
            }
            let atom_effects = mu
                .atoms()
                .iter()
                .map(|a| Ok(helstrom(&rho, d_a, d_b, &a.r)?.optimal_effect))
                .collect::<Result<Vec<_>>>()?;
            Ok(BellWorker::Quantum {
                rho,
                d_a,
                d_b,
                atom_effects,
            })
        };
        match adversary {
            AdversaryModel::HonestTarget => quantum(PureState::bell().to_density(), 2, 2),
            AdversaryModel::FixedState { rho, d_a, d_b } => quantum(rho.clone(), *d_a, *d_b),
            AdversaryModel::OptimalProductAtThreshold => Ok(BellWorker::Product {
                u: first_intelligent_direction(mu)?,
            }),
            AdversaryModel::MixtureAtConcurrence { c } => {
                if !(0.0..=1.0).contains(c) || !c.is_finite() {
                    return Err(Error::invalid(format!(
                        "concurrence C = {c} must lie in [0, 1]"
                    )));
                }
                let u = first_intelligent_direction(mu)?;
                quantum(bell_mixture_state(&u, *c)?, 2, 4)
            }
        }
    }

    fn trial(&self, mu: &Strategy, seed: u64, t: u64) -> Result<TrialDetail> {
        let mut rng = trial_rng(seed, t);
        let (r, atom_index) = mu.sample_direction_indexed(&mut rng);
        match self {
            BellWorker::Quantum {
                rho,
                d_a,
                d_b,
                atom_effects,
            } => {
                let owned;
                let effect = match atom_index {
                    Some(i) => &atom_effects[i],
                    None => {
                        owned = helstrom(rho, *d_a, *d_b, &r)?.optimal_effect;
                        &owned
                    }
                };
                // The measured side: outcome ±1 on the qubit support, or a
                // leak event outside it (d_a > 2 only), which always fails.
                let p_plus = partial_trace_matrix(
                    &rho.matrix().mul(
                        &embed_qubit_projector(&r, 1.0, *d_a).kron(&ComplexMatrix::identity(*d_b)),
                    ),
                    &[*d_a, *d_b],
                    &[1],
                )?;
                let p_minus = partial_trace_matrix(
                    &rho.matrix().mul(
                        &embed_qubit_projector(&r, -1.0, *d_a).kron(&ComplexMatrix::identity(*d_b)),
                    ),
                    &[*d_a, *d_b],
                    &[1],
                )?;
                let q_plus = p_plus.trace().re.clamp(0.0, 1.0);
                let q_minus = p_minus.trace().re.clamp(0.0, 1.0);
                let u: f64 = rng.gen();
                // On a true qubit the two outcomes exhaust the probability;
                // leak events exist only for d_a > 2.
                let (outcome, sigma) = if u < q_plus {
                    (1i8, p_plus)
                } else if *d_a == 2 || u < q_plus + q_minus {
                    (-1i8, p_minus)
                } else {
                    (0i8, p_plus) // leaked outside the qubit support; fails below
                };
                let guess = if outcome == 0 {
                    1i8
                } else {
                    let tr = sigma.trace().re;
                    let p_guess_plus = if tr > 1e-300 {
                        (sigma.mul(effect).trace().re / tr).clamp(0.0, 1.0)
                    } else {
                        0.5
                    };
                    if snapped_bernoulli(p_guess_plus, &mut rng) {
                        1
                    } else {
                        -1
                    }
                };
                let pass = outcome != 0 && guess == outcome;
                Ok(TrialDetail {
                    test: serde_json::json!({ "r": r.as_array() }),
                    honest: vec![outcome],
                    response: vec![guess],
                    pass,
                })
            }
            BellWorker::Product { u } => {
                let bias = u.dot(&r);
                let outcome = if snapped_bernoulli((1.0 + bias) / 2.0, &mut rng) {
                    1i8
                } else {
                    -1
                };
                let guess = if bias >= 0.0 { 1i8 } else { -1 };
                Ok(TrialDetail {
                    test: serde_json::json!({ "r": r.as_array() }),
                    honest: vec![outcome],
                    response: vec![guess],
                    pass: guess == outcome,
                })
            }
        }
    }
}

/// First intelligent direction of μ at C = 0 (the product adversary's
/// alignment).
fn first_intelligent_direction(mu: &Strategy) -> Result<BlochVector> {
    let report = g_star(mu)?;
    report
        .intelligent_directions
        .first()
        .copied()
        .ok_or_else(|| Error::numeric("no intelligent direction reported"))
}

/// (1−C)·|u⟩⟨u| ⊗ |00⟩⟨00| + C·|Φ⟩⟨Φ| ⊗ |1⟩⟨1| on qubit ⊗ (qubit × flag):
/// the extremal state at concurrence C, with the flag readable by the
/// guessing side.
fn bell_mixture_state(u: &BlochVector, c: f64) -> Result<DensityOperator> {
    let su = spinor_of(u);
    // Basis ordering: measured qubit ⊗ (partner qubit ⊗ flag), dim 2·4.
    let mut product = [Complex64::new(0.0, 0.0); 8];
    product[0] = su[0]; // |0⟩(|0⟩|0⟩)
    product[4] = su[1]; // |1⟩(|0⟩|0⟩)
    let inv = 1.0 / 2f64.sqrt();
    let mut target = [Complex64::new(0.0, 0.0); 8];
    target[1] = Complex64::new(inv, 0.0); // |0⟩(|0⟩|1⟩)
    target[7] = Complex64::new(inv, 0.0); // |1⟩(|1⟩|1⟩)
    let mut m = ComplexMatrix::zeros(8, 8);
    for i in 0..8 {
        for j in 0..8 {
            m[(i, j)] =
                (1.0 - c) * product[i] * product[j].conj() + c * target[i] * target[j].conj();
        }
    }
    DensityOperator::new(m)
}

/// Runs the two-party guessing game: per trial the verifier draws r ~ μ and
/// measures r·σ on its side; the adversary (who learns r but never the
/// outcome) measures its optimal effect and announces a guess. Pass =
/// correct guess.
pub fn play_bell(
    mu: &Strategy,
    adversary: &AdversaryModel,
    trials: u64,
    seed: u64,
) -> Result<GameRecord> {
    check_trials(trials)?;
    let worker = BellWorker::build(mu, adversary)?;
    run_game(trials, seed, mu.digest(), &|t| worker.trial(mu, seed, t))
}

/// [`play_bell`] with a JSON-lines transcript (one object per trial);
/// sequential, identical trial results.
pub fn play_bell_transcript(
    mu: &Strategy,
    adversary: &AdversaryModel,
    trials: u64,
    seed: u64,
    out: &mut dyn Write,
) -> Result<GameRecord> {
    check_trials(trials)?;
    let worker = BellWorker::build(mu, adversary)?;
    run_game_transcript(
        trials,
        seed,
        mu.digest(),
        &|t| worker.trial(mu, seed, t),
        out,
    )
}

// ---------------------------------------------------------------------------
// Multiparty game.
// ---------------------------------------------------------------------------

/// Packs the dishonest-qubit bits of full index `i` (ascending party order,
/// big-endian).
fn dishonest_index(i: usize, n: usize, dishonest0: &[usize]) -> usize {
    let m = dishonest0.len();
    let mut k = 0usize;
    for (t, &q) in dishonest0.iter().enumerate() {
        let bit = (i >> (n - 1 - q)) & 1;
        k |= bit << (m - 1 - t);
    }
    k
}

/// Full index with the given honest-uniform bit and dishonest pattern.
fn full_index(
    honest_bit: usize,
    k: usize,
    n: usize,
    honest0: &[usize],
    dishonest0: &[usize],
) -> usize {
    let m = dishonest0.len();
    let mut i = 0usize;
    for &q in honest0 {
        i |= honest_bit << (n - 1 - q);
    }
    for (t, &q) in dishonest0.iter().enumerate() {
        let bit = (k >> (m - 1 - t)) & 1;
        i |= bit << (n - 1 - q);
    }
    i
}

fn apply_single_qubit(psi: &mut [Complex64], n: usize, q: usize, m: &ComplexMatrix) {
    let stride = 1usize << (n - 1 - q);
    for i in 0..psi.len() {
        if (i / stride).is_multiple_of(2) {
            let a = psi[i];
            let b = psi[i + stride];
            psi[i] = m[(0, 0)] * a + m[(0, 1)] * b;
            psi[i + stride] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
    }
}

fn norm2(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

/// Measures qubit `q` of ψ along r·σ with snapped probabilities, collapsing
/// ψ in place; returns the ±1 outcome.
fn measure_qubit<R: Rng + ?Sized>(
    psi: &mut Vec<Complex64>,
    n: usize,
    q: usize,
    r: &BlochVector,
    rng: &mut R,
) -> i8 {
    let proj_plus = qubit_projector(r.as_array(), 1.0);
    let mut plus = psi.clone();
    apply_single_qubit(&mut plus, n, q, &proj_plus);
    let p_plus = norm2(&plus).clamp(0.0, 1.0);
    if snapped_bernoulli(p_plus, rng) {
        let scale = 1.0 / p_plus.sqrt();
        for a in plus.iter_mut() {
            *a *= scale;
        }
        *psi = plus;
        1
    } else {
        let proj_minus = qubit_projector(r.as_array(), -1.0);
        apply_single_qubit(psi, n, q, &proj_minus);
        let nn = norm2(psi).max(1e-300).sqrt();
        for a in psi.iter_mut() {
            *a /= nn;
        }
        -1
    }
}

/// E₊ = 𝕀 − (strictly negative eigenspace of Δ), for Δ of rank ≤ 2 inside
/// span{w, u}: Δ = e^{−iφ}·u w† + e^{iφ}·w u† (phase tests) or
/// Δ = w w† − u u† (Z tests, signalled by `phi = None`).
fn rank_two_effect(u: &[Complex64], w: &[Complex64], phi: Option<f64>) -> ComplexMatrix {
    let d = u.len();
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    // Orthonormal basis of span{w, u}.
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in [w, u] {
        let mut x = v.to_vec();
        for b in &basis {
            let c = dot(b, &x);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= c * bi;
            }
        }
        let nn = norm2(&x).sqrt();
        if nn > 1e-12 {
            for xi in x.iter_mut() {
                *xi /= nn;
            }
            basis.push(x);
        }
    }
    let mut effect = ComplexMatrix::identity(d);
    if basis.is_empty() {
        return effect;
    }
    // Δ applied to a vector.
    let apply_delta = |x: &[Complex64]| -> Vec<Complex64> {
        let (wx, ux) = (dot(w, x), dot(u, x));
        let mut y = vec![Complex64::new(0.0, 0.0); d];
        match phi {
            Some(phi) => {
                let e_m = Complex64::from_polar(1.0, -phi);
                let e_p = Complex64::from_polar(1.0, phi);
                for i in 0..d {
                    y[i] = e_m * u[i] * wx + e_p * w[i] * ux;
                }
            }
            None => {
                for i in 0..d {
                    y[i] = w[i] * wx - u[i] * ux;
                }
            }
        }
        y
    };
    let m = basis.len();
    let mut small = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (j, bj) in basis.iter().enumerate() {
        let dbj = apply_delta(bj);
        for (i, bi) in basis.iter().enumerate() {
            small[i][j] = dot(bi, &dbj);
        }
    }
    // Eigenpairs of the (≤ 2)-dim representation.
    let mut negatives: Vec<Vec<Complex64>> = Vec::new(); // coefficients in `basis`
    if m == 1 {
        if small[0][0].re < TIE_EIGENVALUE {
            negatives.push(vec![Complex64::new(1.0, 0.0)]);
        }
    } else {
        let tr = small[0][0].re + small[1][1].re;
        let det = small[0][0].re * small[1][1].re - small[0][1].norm_sqr();
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        for lam in [tr / 2.0 - disc, tr / 2.0 + disc] {
            if lam < TIE_EIGENVALUE {
                // Eigenvector of [[a, b], [b*, c]] for eigenvalue λ.
                let b01 = small[0][1];
                let coeffs = if b01.norm() > 1e-14 {
                    vec![b01, Complex64::new(lam - small[0][0].re, 0.0)]
                } else if (small[0][0].re - lam).abs() < (small[1][1].re - lam).abs() {
                    vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
                } else {
                    vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
                };
                let nn: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                negatives.push(coeffs.iter().map(|c| c / nn).collect());
            }
        }
    }
    for coeffs in negatives {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        for (c, b) in coeffs.iter().zip(&basis) {
            for i in 0..d {
                v[i] += c * b[i];
            }
        }
        for i in 0..d {
            for j in 0..d {
                effect[(i, j)] -= v[i] * v[j].conj();
            }
        }
    }
    effect
}

/// Full-matrix variant of the optimal effect: 𝕀 minus the strictly negative
/// eigenspace of Δ.
fn effect_from_delta(delta: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = delta.rows();
    let (vals, vecs) = crate::qcore::eigh(delta)?;
    let mut effect = ComplexMatrix::identity(d);
    for (k, &lam) in vals.iter().enumerate() {
        if lam < TIE_EIGENVALUE {
            for i in 0..d {
                for j in 0..d {
                    effect[(i, j)] -= vecs[(i, k)] * vecs[(j, k)].conj();
                }
            }
        }
    }
    Ok(effect)
}

enum GhzWorker {
    /// Statevector game on the target state.
    Pure {
        amps: Vec<Complex64>,
        /// ψ components on the dishonest factor against honest all-zeros /
        /// all-ones.
        w: Vec<Complex64>,
        u: Vec<Complex64>,
        z_effect: ComplexMatrix,
    },
    /// Density-matrix game on an arbitrary prepared state (honest factor
    /// first).
    Density {
        rho: DensityOperator,
        d_h: usize,
        d_d: usize,
        z_effect: ComplexMatrix,
        /// B_{kl} = ⟨1…1, k|ρ|0…0, l⟩ — the honest-coherence block driving
        /// phase-test effects Δ = e^{−iφ}B + e^{iφ}B†.
        b_block: ComplexMatrix,
    },
    /// Shortcut for the extremal product state: effective-qubit statistics,
    /// deterministic response.
    Product { u: BlochVector },
}

impl GhzWorker {
    fn build(
        layout: &PartyLayout,
        strategy: &GhzStrategy,
        adversary: &AdversaryModel,
        effective: &Strategy,
    ) -> Result<GhzWorker> {
        let n = layout.n();
        if n > MAX_QUBITS {
            return Err(Error::unsupported(format!(
                "multiparty games are capped at {MAX_QUBITS} qubits, got {n}"
            )));
        }
        GhzStrategy::new(strategy.p_z, strategy.phase_law)?;
        let h = layout.honest().len();
        match adversary {
            AdversaryModel::HonestTarget => {
                let amps = PureState::ghz(n).amplitudes().to_vec();
                let honest0: Vec<usize> = layout.honest().iter().map(|j| j - 1).collect();
                let dishonest0: Vec<usize> = layout.dishonest().iter().map(|j| j - 1).collect();
                let d_d = 1usize << dishonest0.len();
                let mut w = vec![Complex64::new(0.0, 0.0); d_d];
                let mut u = vec![Complex64::new(0.0, 0.0); d_d];
                for k in 0..d_d {
                    w[k] = amps[full_index(0, k, n, &honest0, &dishonest0)];
                    u[k] = amps[full_index(1, k, n, &honest0, &dishonest0)];
                }
                let z_effect = rank_two_effect(&u, &w, None);
                Ok(GhzWorker::Pure {
                    amps,
                    w,
                    u,
                    z_effect,
                })
            }
            AdversaryModel::FixedState { rho, d_a, d_b } => {
                if *d_a != 1usize << h {
                    return Err(Error::invalid(format!(
                        "honest factor dimension {d_a} must be 2^{h} for {h} honest parties"
                    )));
                }
                if d_a * d_b != rho.dim() {
                    return Err(Error::invalid(format!(
                        "state dimension {} does not match bipartition {d_a}x{d_b}",
                        rho.dim()
                    )));
                }
                if *d_b > MAX_DENSITY_GUESS_DIM {
                    return Err(Error::unsupported(format!(
                        "guessing-side dimension {d_b} exceeds the per-trial eigensolver cap {MAX_DENSITY_GUESS_DIM}"
                    )));
                }
                Self::density(rho.clone(), *d_a, *d_b)
            }
            AdversaryModel::OptimalProductAtThreshold => Ok(GhzWorker::Product {
                u: first_intelligent_direction(effective)?,
            }),
            AdversaryModel::MixtureAtConcurrence { c } => {
                if !(0.0..=1.0).contains(c) || !c.is_finite() {
                    return Err(Error::invalid(format!(
                        "concurrence C = {c} must lie in [0, 1]"
                    )));
                }
                let u = first_intelligent_direction(effective)?;
                let rho = ghz_mixture_state(&u, *c, h, layout.dishonest().len())?;
                let d_h = 1usize << h;
                let d_d = rho.dim() / d_h;
                if d_d > MAX_DENSITY_GUESS_DIM {
                    return Err(Error::unsupported(format!(
                        "guessing-side dimension {d_d} exceeds the per-trial eigensolver cap {MAX_DENSITY_GUESS_DIM}"
                    )));
                }
                Self::density(rho, d_h, d_d)
            }
        }
    }

    fn density(rho: DensityOperator, d_h: usize, d_d: usize) -> Result<GhzWorker> {
        // Extremal honest blocks: row/column blocks 0 and d_h − 1.
        let m = rho.matrix();
        let sub = |a: usize, b: usize| {
            ComplexMatrix::from_fn(d_d, d_d, |k, l| m[(a * d_d + k, b * d_d + l)])
        };
        let rho_plus = sub(0, 0);
        let rho_minus = sub(d_h - 1, d_h - 1);
        let b_block = sub(d_h - 1, 0);
        let z_effect = effect_from_delta(&rho_plus.sub(&rho_minus).symmetrized())?;
        Ok(GhzWorker::Density {
            rho,
            d_h,
            d_d,
            z_effect,
            b_block,
        })
    }

    fn trial(
        &self,
        layout: &PartyLayout,
        strategy: &GhzStrategy,
        seed: u64,
        t: u64,
    ) -> Result<TrialDetail> {
        let n = layout.n();
        let mut rng = trial_rng(seed, t);
        let test = generate_test(strategy, n, &mut rng)?;
        let honest0: Vec<usize> = layout.honest().iter().map(|j| j - 1).collect();
        let dishonest0: Vec<usize> = layout.dishonest().iter().map(|j| j - 1).collect();
        let honest_dirs: Vec<BlochVector> = match &test {
            GhzTest::Z => honest0.iter().map(|_| BlochVector::z_axis()).collect(),
            GhzTest::Phase { phases } => layout
                .honest()
                .iter()
                .map(|&j| BlochVector::equatorial(phases[j - 1]))
                .collect(),
        };
        let phi_h = match &test {
            GhzTest::Z => None,
            GhzTest::Phase { .. } => Some(honest_aggregate_direction(&test, layout)?.azimuth()),
        };

        let (honest, guess) = match self {
            GhzWorker::Pure {
                amps,
                w,
                u,
                z_effect,
            } => {
                let mut psi = amps.clone();
                let mut honest = Vec::with_capacity(honest0.len());
                for (q, r) in honest0.iter().zip(&honest_dirs) {
                    honest.push(measure_qubit(&mut psi, n, *q, r, &mut rng));
                }
                // Collapsed dishonest state: contract the honest qubits with
                // their post-measurement eigenspinors.
                let spinors: Vec<[Complex64; 2]> = honest_dirs
                    .iter()
                    .zip(&honest)
                    .map(|(r, &s)| eigenspinor(r, s as f64))
                    .collect();
                let m = dishonest0.len();
                let mut chi = vec![Complex64::new(0.0, 0.0); 1usize << m];
                for (i, amp) in psi.iter().enumerate() {
                    if amp.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut coeff = Complex64::new(1.0, 0.0);
                    for (t_h, &q) in honest0.iter().enumerate() {
                        let bit = (i >> (n - 1 - q)) & 1;
                        coeff *= spinors[t_h][bit].conj();
                    }
                    chi[dishonest_index(i, n, &dishonest0)] += coeff * amp;
                }
                let nn = norm2(&chi).max(1e-300);
                let owned;
                let effect = match phi_h {
                    None => z_effect,
                    Some(phi) => {
                        owned = rank_two_effect(u, w, Some(phi));
                        &owned
                    }
                };
                let p_plus = (effect.expectation(&chi).re / nn).clamp(0.0, 1.0);
                let g = if snapped_bernoulli(p_plus, &mut rng) {
                    1i8
                } else {
                    -1
                };
                (honest, g)
            }
            GhzWorker::Density {
                rho,
                d_h,
                d_d,
                z_effect,
                b_block,
            } => {
                let h = honest0.len();
                let mut cur = rho.matrix().clone();
                let mut honest = Vec::with_capacity(h);
                let id_d = ComplexMatrix::identity(*d_d);
                for (pos, r) in honest_dirs.iter().enumerate() {
                    // Projector on honest qubit `pos` of the 2^h factor.
                    let embed = |s: f64| {
                        let q = qubit_projector(r.as_array(), s);
                        let left = ComplexMatrix::identity(1usize << pos);
                        let right = ComplexMatrix::identity(1usize << (h - 1 - pos));
                        left.kron(&q).kron(&right).kron(&id_d)
                    };
                    let proj = embed(1.0);
                    let p_plus =
                        (proj.mul(&cur).trace().re / cur.trace().re.max(1e-300)).clamp(0.0, 1.0);
                    let s = if snapped_bernoulli(p_plus, &mut rng) {
                        1.0
                    } else {
                        -1.0
                    };
                    let proj = if s > 0.0 { proj } else { embed(-1.0) };
                    cur = proj.mul(&cur).mul(&proj).symmetrized();
                    honest.push(s as i8);
                }
                let sigma = partial_trace_matrix(&cur, &[*d_h, *d_d], &[1])?;
                let owned;
                let effect = match phi_h {
                    None => z_effect,
                    Some(phi) => {
                        let e_m = Complex64::from_polar(1.0, -phi);
                        let delta = b_block
                            .scale(e_m)
                            .add(&b_block.adjoint().scale(e_m.conj()))
                            .symmetrized();
                        owned = effect_from_delta(&delta)?;
                        &owned
                    }
                };
                let tr = sigma.trace().re;
                let p_plus = if tr > 1e-300 {
                    (sigma.mul(effect).trace().re / tr).clamp(0.0, 1.0)
                } else {
                    0.5
                };
                let g = if snapped_bernoulli(p_plus, &mut rng) {
                    1i8
                } else {
                    -1
                };
                (honest, g)
            }
            GhzWorker::Product { u } => {
                let r_eff = match phi_h {
                    None => BlochVector::z_axis(),
                    Some(phi) => BlochVector::equatorial(phi),
                };
                let bias = u.dot(&r_eff);
                let s_eff = if snapped_bernoulli((1.0 + bias) / 2.0, &mut rng) {
                    1i8
                } else {
                    -1
                };
                let h = honest0.len();
                // Individual honest outcomes are uniform given their product
                // (Z tests: all equal to the effective outcome).
                let honest = match phi_h {
                    None => vec![s_eff; h],
                    Some(_) => {
                        let mut v = Vec::with_capacity(h);
                        let mut prod = 1i8;
                        for _ in 0..h - 1 {
                            let s = if rng.gen::<f64>() < 0.5 { 1i8 } else { -1 };
                            prod *= s;
                            v.push(s);
                        }
                        v.push(s_eff * prod);
                        v
                    }
                };
                let g = if bias >= 0.0 { 1i8 } else { -1 };
                (honest, g)
            }
        };

        // Materialize dishonest outcomes: Z tests echo the guessed common
        // value; phase tests put the guessed parity on the first dishonest
        // party.
        let m = dishonest0.len();
        let response: Vec<i8> = match &test {
            GhzTest::Z => vec![guess; m],
            GhzTest::Phase { .. } => {
                let mut v = vec![1i8; m];
                v[0] = guess;
                v
            }
        };
        let mut all = vec![0i8; n];
        for (idx, &j) in layout.honest().iter().enumerate() {
            all[j - 1] = honest[idx];
        }
        for (idx, &j) in layout.dishonest().iter().enumerate() {
            all[j - 1] = response[idx];
        }
        let pass = evaluate_test(&test, &all)?;
        Ok(TrialDetail {
            test: serde_json::to_value(&test)
                .map_err(|e| Error::numeric(format!("test serialization failed: {e}")))?,
            honest,
            response,
            pass,
        })
    }
}

/// The extremal multiparty state at concurrence C, honest factor first:
/// (1−C)·(α|0…0⟩ + β|1…1⟩)_H ⊗ |0…0, 0⟩_D + C·|G⟩ ⊗ |1⟩_anc, with the flag
/// ancilla the last factor on the dishonest side.
fn ghz_mixture_state(
    u: &BlochVector,
    c: f64,
    h: usize,
    d_parties: usize,
) -> Result<DensityOperator> {
    let d_h = 1usize << h;
    let d_d = 1usize << (d_parties + 1); // dishonest qubits ⊗ flag
    let dim = d_h * d_d;
    let su = spinor_of(u);
    let mut product = vec![Complex64::new(0.0, 0.0); dim];
    product[0] = su[0]; // |0…0⟩_H |0…0,0⟩_D
    product[(d_h - 1) * d_d] = su[1]; // |1…1⟩_H |0…0,0⟩_D
    let inv = 1.0 / 2f64.sqrt();
    let mut target = vec![Complex64::new(0.0, 0.0); dim];
    target[1] = Complex64::new(inv, 0.0); // |0…0⟩_H |0…0,1⟩_D
    target[dim - 1] = Complex64::new(inv, 0.0); // |1…1⟩_H |1…1,1⟩_D
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] =
                (1.0 - c) * product[i] * product[j].conj() + c * target[i] * target[j].conj();
        }
    }
    DensityOperator::new(m)
}

/// Runs the multiparty test game: per trial the verifier draws a test, the
/// honest parties measure their assigned observables, and the dishonest
/// coalition (which learns the test but never the honest outcomes) measures
/// its optimal effect and reports outcomes. Pass = test satisfied by all
/// reported outcomes.
pub fn play_ghz(
    layout: &PartyLayout,
    strategy: &GhzStrategy,
    adversary: &AdversaryModel,
    trials: u64,
    seed: u64,
) -> Result<GameRecord> {
    check_trials(trials)?;
    let effective = crate::ghz::effective_strategy(strategy)?;
    let worker = GhzWorker::build(layout, strategy, adversary, &effective)?;
    run_game(trials, seed, effective.digest(), &|t| {
        worker.trial(layout, strategy, seed, t)
    })
}

/// [`play_ghz`] with a JSON-lines transcript; sequential, identical trial
/// results.
pub fn play_ghz_transcript(
    layout: &PartyLayout,
    strategy: &GhzStrategy,
    adversary: &AdversaryModel,
    trials: u64,
    seed: u64,
    out: &mut dyn Write,
) -> Result<GameRecord> {
    check_trials(trials)?;
    let effective = crate::ghz::effective_strategy(strategy)?;
    let worker = GhzWorker::build(layout, strategy, adversary, &effective)?;
    run_game_transcript(
        trials,
        seed,
        effective.digest(),
        &|t| worker.trial(layout, strategy, seed, t),
        out,
    )
}

// ---------------------------------------------------------------------------
// Verdicts and sweeps.
// ---------------------------------------------------------------------------

/// Compares a game record against the certification threshold γ*(μ):
/// certified when pass_rate − k·σ > γ*.
pub fn verdict(record: &GameRecord, mu: &Strategy, k_sigma: f64) -> Result<VerdictReport> {
    if k_sigma < 0.0 || !k_sigma.is_finite() {
        return Err(Error::invalid(format!(
            "k_sigma = {k_sigma} must be nonnegative"
        )));
    }
    let threshold = gme_threshold(mu)?;
    let margin = record.pass_rate - threshold;
    let confidence = if record.std_err > 0.0 {
        normal_cdf(margin / record.std_err)
    } else if margin > 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(VerdictReport {
        threshold,
        pass_rate: record.pass_rate,
        std_err: record.std_err,
        k_sigma,
        certified: margin - k_sigma * record.std_err > 0.0,
        confidence,
    })
}

/// Plays the mixture adversary across a concurrence grid and tabulates
/// simulated rates against the analytic bound γ̂(C). Rows use decorrelated
/// seeds derived from `seed`.
pub fn sweep_concurrence(
    mu: &Strategy,
    concurrences: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(concurrences.len());
    for (idx, &c) in concurrences.iter().enumerate() {
        let row_seed = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(idx as u64 + 1));
        let record = play_bell(
            mu,
            &AdversaryModel::MixtureAtConcurrence { c },
            trials,
            row_seed,
        )?;
        rows.push(SweepRow {
            c,
            simulated: record.pass_rate,
            analytic: gamma_hat(mu, c)?,
            std_err: record.std_err,
        });
    }
    Ok(rows)
}
