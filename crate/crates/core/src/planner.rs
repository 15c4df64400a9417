//! Sample-size planning: how many rounds a verification experiment needs to
//! certify its target at a given error ε and failure probability δ, for the
//! semi-device-independent test, the standard (tomographic) fidelity test,
//! and device-independent comparisons.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest planned sample size reported before the request is considered
/// degenerate.
const MAX_SAMPLES: f64 = 1e18;

/// Which certification protocol a plan is for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Semi-device-independent test with threshold γ*.
    SdiThreshold,
    /// Standard fidelity estimation with detection probability ν.
    StandardFidelity,
    /// Device-independent test from a tilted correlation inequality
    /// (linear ε dependence).
    DiMermin,
    /// Device-independent self-testing with quadratic robustness
    /// (order-of-magnitude 1/(c²ε²) scaling).
    DiQuadratic { c: f64 },
}

/// A sample-size request: certify infidelity below `epsilon` except with
/// probability `delta`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlanRequest {
    pub epsilon: f64,
    pub delta: f64,
}

impl PlanRequest {
    pub fn new(epsilon: f64, delta: f64) -> Result<PlanRequest> {
        if !(epsilon > 0.0 && epsilon < 1.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon = {epsilon} must lie in (0, 1)"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) || !delta.is_finite() {
            return Err(Error::invalid(format!(
                "delta = {delta} must lie in (0, 1)"
            )));
        }
        Ok(PlanRequest { epsilon, delta })
    }
}

/// A planned sample size with its provenance.
#[derive(Clone, Debug, Serialize)]
pub struct PlanResult {
    pub scenario: Scenario,
    pub epsilon: f64,
    pub delta: f64,
    /// Number of rounds (≥ 1).
    pub n: u64,
    /// Which formula produced `n`.
    pub formula: &'static str,
    /// True when `n` is an order-of-magnitude estimate rather than an exact
    /// bound.
    pub approximate: bool,
}

fn ceil_log_ratio(delta: f64, per_round_rejection: f64) -> Result<u64> {
    // N = ⌈ln δ / ln(1 − q)⌉ with q the per-round rejection probability of
    // a state at the error boundary.
    if !per_round_rejection.is_finite() || per_round_rejection <= 0.0 {
        return Err(Error::invalid(
            "per-round rejection probability must be positive; the requested \
             error is not detectable by this test",
        ));
    }
    if per_round_rejection >= 1.0 {
        return Ok(1);
    }
    let n = (delta.ln() / (1.0 - per_round_rejection).ln()).ceil();
    if !n.is_finite() || n > MAX_SAMPLES {
        return Err(Error::numeric(format!(
            "planned sample size {n} is out of range"
        )));
    }
    Ok((n as u64).max(1))
}

/// Rounds for the semi-device-independent test with threshold γ*: a state
/// at infidelity ε fails each round with probability at least
/// 2(1 − γ*)ε, so N = ⌈ln δ / ln(1 − 2(1 − γ*)ε)⌉.
pub fn samples_sdi(gamma_star: f64, req: &PlanRequest) -> Result<PlanResult> {
    if !(0.5..1.0).contains(&gamma_star) {
        return Err(Error::invalid(format!(
            "gamma_star = {gamma_star} must lie in [1/2, 1)"
        )));
    }
    let q = 2.0 * (1.0 - gamma_star) * req.epsilon;
    if q >= 1.0 {
        return Err(Error::invalid(format!(
            "2(1 - gamma_star)·epsilon = {q} must be below 1"
        )));
    }
    Ok(PlanResult {
        scenario: Scenario::SdiThreshold,
        epsilon: req.epsilon,
        delta: req.delta,
        n: ceil_log_ratio(req.delta, q)?,
        formula: "ceil(ln(delta) / ln(1 - 2(1 - gamma_star) * epsilon))",
        approximate: false,
    })
}

/// Rounds for the standard fidelity test where each round detects an
/// ε-far state with probability νε: N = ⌈ln δ / ln(1 − νε)⌉.
pub fn samples_standard(nu: f64, req: &PlanRequest) -> Result<PlanResult> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::invalid(format!(
            "detection probability nu = {nu} must lie in (0, 1]"
        )));
    }
    Ok(PlanResult {
        scenario: Scenario::StandardFidelity,
        epsilon: req.epsilon,
        delta: req.delta,
        n: ceil_log_ratio(req.delta, nu * req.epsilon)?,
        formula: "ceil(ln(delta) / ln(1 - nu * epsilon))",
        approximate: false,
    })
}

/// Rounds for the device-independent test built on the three-party parity
/// inequality, whose per-round rejection at infidelity ε is (2 − √2)ε/2:
/// N = ⌈ln δ / ln(1 − (2 − √2)ε/2)⌉.
pub fn samples_di_mermin(req: &PlanRequest) -> Result<PlanResult> {
    let q = (2.0 - 2f64.sqrt()) * req.epsilon / 2.0;
    Ok(PlanResult {
        scenario: Scenario::DiMermin,
        epsilon: req.epsilon,
        delta: req.delta,
        n: ceil_log_ratio(req.delta, q)?,
        formula: "ceil(ln(delta) / ln(1 - (2 - sqrt(2)) * epsilon / 2))",
        approximate: false,
    })
}

/// Order-of-magnitude rounds for device-independent self-testing with a
/// quadratic robustness bound: N ≈ ln(1/δ)/(c²ε²).
pub fn samples_di_quadratic(c: f64, req: &PlanRequest) -> Result<PlanResult> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::invalid(format!(
            "robustness constant c = {c} must be positive"
        )));
    }
    let n = ((1.0 / req.delta).ln() / (c * c * req.epsilon * req.epsilon)).ceil();
    if !n.is_finite() || n > MAX_SAMPLES {
        return Err(Error::numeric(format!(
            "planned sample size {n} is out of range"
        )));
    }
    Ok(PlanResult {
        scenario: Scenario::DiQuadratic { c },
        epsilon: req.epsilon,
        delta: req.delta,
        n: (n as u64).max(1),
        formula: "ceil(ln(1/delta) / (c^2 * epsilon^2))",
        approximate: true,
    })
}

/// Trace-distance radius certified by fidelity error ε under the
/// three-party parity test: √ε / √(2(2 − √2)).
pub fn robustness_trace_distance(epsilon: f64) -> Result<f64> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} must be nonnegative"
        )));
    }
    Ok(epsilon.sqrt() / (2.0 * (2.0 - 2f64.sqrt())).sqrt())
}

/// One row of the protocol-comparison table.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub epsilon: f64,
    pub n_standard: u64,
    pub n_sdi_bell: u64,
    pub n_sdi_ghz: u64,
    pub n_di_mermin: u64,
}

/// Threshold of the two-axis Bell verification strategy, γ* = 3/4.
pub fn comparison_gamma_bell() -> f64 {
    0.75
}

/// Threshold of the optimized three-party strategy,
/// γ* = 1/2 + 1/√(4 + π²).
pub fn comparison_gamma_ghz() -> f64 {
    0.5 + 1.0 / (4.0 + std::f64::consts::PI.powi(2)).sqrt()
}

/// Detection probability of the standard fidelity test used in the
/// comparison, ν = 2/3.
pub fn comparison_nu() -> f64 {
    2.0 / 3.0
}

/// Builds the sample-size comparison across protocols for the given ε grid
/// at fixed δ.
pub fn comparison_table(epsilons: &[f64], delta: f64) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let req = PlanRequest::new(eps, delta)?;
        rows.push(ComparisonRow {
            epsilon: eps,
            n_standard: samples_standard(comparison_nu(), &req)?.n,
            n_sdi_bell: samples_sdi(comparison_gamma_bell(), &req)?.n,
            n_sdi_ghz: samples_sdi(comparison_gamma_ghz(), &req)?.n,
            n_di_mermin: samples_di_mermin(&req)?.n,
        });
    }
    Ok(rows)
}

/// CSV header matching [`comparison_csv`] rows.
pub const COMPARISON_CSV_HEADER: &str = "epsilon,N_standard,N_sdi_bell,N_sdi_ghz,N_di_mermin";

/// Renders a comparison table as CSV (header + one line per ε).
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(COMPARISON_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{:.11e},{},{},{},{}\n",
            r.epsilon, r.n_standard, r.n_sdi_bell, r.n_sdi_ghz, r.n_di_mermin
        ));
    }
    out
}
