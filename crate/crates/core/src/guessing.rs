//! Guessing probabilities: the Helstrom bound for concrete states, exact
//! closed forms for the named protocols, an independent numeric maximizer
//! (the oracle), exact center-symmetric subset enumeration, thresholds,
//! and the concurrence/fidelity bound functions.
//!
//! Conventions: for a strategy μ and concurrence C, the *bias integral*
//!   g(C, μ) = max over unit v of ∫ dμ(r) √(C² + (1 − C²)(r·v)²)
//! lies in [1/2, 1]; the pure-state guessing probability is
//! γ(C, μ) = (1 + g(C, μ))/2, and the entanglement threshold is
//! γ* = γ(0, μ). All `value` fields below are on the g scale.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    eigh, partial_trace_matrix, qubit_projector, ComplexMatrix, DensityOperator, PureState,
};
use crate::quad::gauss_legendre;
use crate::special::ellip_e;
use crate::strategy::{BlochVector, Protocol, ProtocolName, Strategy, StrategyKind};

/// Default value tolerance of the numeric oracle.
pub const ORACLE_TOL: f64 = 1e-8;

/// Tolerances for the structural-invariant suite on g(C, μ) (monotonicity,
/// convexity, the second-moment sandwich, the linear and slope bounds, and
/// the fidelity bound). Checks against numerically maximized values allow
/// ten times the oracle tolerance so two independent oracle errors can
/// never produce a spurious violation; exact-arithmetic comparisons use
/// [`invariant_tol::EXACT`].
pub mod invariant_tol {
    /// Slack for comparisons between closed-form quantities.
    pub const EXACT: f64 = 1e-9;
    /// Slack for any comparison involving at least one oracle value
    /// (10 × [`super::ORACLE_TOL`] ≫ two stacked oracle errors).
    pub const ORACLE: f64 = 1e-7;
}

/// Number of points in the oracle's global sphere scan.
const LATTICE_POINTS: usize = 20_000;
/// How many scan candidates get full local refinement.
const REFINE_TOP_K: usize = 8;
/// Minimum angular separation between refinement candidates.
const CANDIDATE_SEPARATION: f64 = 0.15;
/// Local refinement: iterations for the best candidates / for the
/// maximizer-collection pass.
const REFINE_ITERS_FULL: usize = 40;
const REFINE_ITERS_BRIEF: usize = 30;
/// Initial half-width of the line searches (radians) and its decay.
const REFINE_HALFWIDTH: f64 = 0.06;
const REFINE_SHRINK: f64 = 0.75;
/// Function evaluations per golden-section line search.
const LINE_EVALS: usize = 12;
/// Lattice points within this value window of the maximum are candidate
/// maximizers and get refined.
const PHASE2_WINDOW: f64 = 5e-3;
const PHASE2_MAX_POINTS: usize = 2000;
/// Refined maximizers within this angular distance are one direction.
const CLUSTER_ANGLE: f64 = 1e-3;
/// Cap on reported intelligent directions.
const MAX_DIRECTIONS: usize = 128;
/// Eigenvalues of ρ₊ − ρ₋ above this are assigned to the + effect (the
/// degenerate subspace goes to + as the deterministic tie rule).
const TIE_EIGENVALUE: f64 = -1e-12;

// ---------------------------------------------------------------------------
// Report types.
// ---------------------------------------------------------------------------

/// How a guessing value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Proven closed form or exact finite enumeration.
    ClosedForm,
    /// Numeric sphere maximization.
    Oracle,
    /// Closed-form expression whose optimality is conjectured, not proven.
    Conjectured,
}

/// Shape of the maximizer set on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaximizerDegeneracy {
    /// Finitely many intelligent directions, all listed.
    Isolated,
    /// A full circle of maximizers (axially symmetric strategies); one
    /// canonical representative is listed.
    Circle,
    /// Every direction is a maximizer (isotropic strategy, or C = 1); the
    /// north pole is listed as representative.
    Sphere,
}

/// A guessing-bias value g ∈ [1/2, 1] with its maximizing directions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuessReport {
    /// g(C, μ), the maximal average bias.
    pub value: f64,
    /// Maximizers ("intelligent directions"), or canonical representatives
    /// when `degeneracy` says the set is continuous.
    pub intelligent_directions: Vec<BlochVector>,
    pub degeneracy: MaximizerDegeneracy,
    pub method: Method,
}

impl GuessReport {
    /// The guessing probability γ = (1 + g)/2.
    pub fn gamma(&self) -> f64 {
        (1.0 + self.value) / 2.0
    }
}

/// Outcome of optimal two-hypothesis discrimination.
#[derive(Clone, Debug)]
pub struct HelstromResult {
    /// Maximal success probability, in [1/2, 1] for normalized inputs.
    pub guess_prob: f64,
    /// An optimal effect E₊ on the guessing side (projector; E₋ = 𝕀 − E₊).
    pub optimal_effect: ComplexMatrix,
}

/// Quadrature resolution for averaging over continuous strategies.
#[derive(Clone, Copy, Debug)]
pub struct QuadSpec {
    /// Trapezoid nodes for the uniform-equator average.
    pub equator_nodes: usize,
    /// Gauss–Legendre nodes in cos θ for the uniform-sphere average.
    pub sphere_polar_nodes: usize,
    /// Trapezoid nodes in azimuth for the uniform-sphere average.
    pub sphere_azimuth_nodes: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            equator_nodes: 256,
            sphere_polar_nodes: 128,
            sphere_azimuth_nodes: 256,
        }
    }
}

// ---------------------------------------------------------------------------
// Helstrom discrimination.
// ---------------------------------------------------------------------------

/// Optimal probability that the guessing side (second factor) predicts the
/// outcome of the measurement r·σ on the first factor.
///
/// With P± = (𝕀 ± r·σ)/2 and ρ± = tr_A(ρ (P± ⊗ 𝕀)), the optimum is
/// (tr ρ₊ + tr ρ₋ + ‖ρ₊ − ρ₋‖₁)/2, achieved by measuring the sign of
/// ρ₊ − ρ₋. When the first factor has dimension > 2, it is first projected
/// onto its leading two levels (the qubit support); any leaked mass counts
/// as a failed guess, so the returned probability is q·γ(ρ′, r) with
/// q the retained mass.
pub fn helstrom(
    rho: &DensityOperator,
    d_a: usize,
    d_b: usize,
    r: &BlochVector,
) -> Result<HelstromResult> {
    if d_a < 2 || d_b < 1 || d_a * d_b != rho.dim() {
        return Err(Error::invalid(format!(
            "state dimension {} does not match bipartition {}x{}",
            rho.dim(),
            d_a,
            d_b
        )));
    }
    // Qubit projectors embedded in the first two levels of the d_a-level
    // first factor.
    let embed = |q: &ComplexMatrix| {
        let mut m = ComplexMatrix::zeros(d_a, d_a);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = q[(i, j)];
            }
        }
        m
    };
    let id_b = ComplexMatrix::identity(d_b);
    let p_plus = embed(&qubit_projector(r.as_array(), 1.0)).kron(&id_b);
    let p_minus = embed(&qubit_projector(r.as_array(), -1.0)).kron(&id_b);

    let rho_plus = partial_trace_matrix(&rho.matrix().mul(&p_plus), &[d_a, d_b], &[1])?;
    let rho_minus = partial_trace_matrix(&rho.matrix().mul(&p_minus), &[d_a, d_b], &[1])?;
    let delta = rho_plus.sub(&rho_minus).symmetrized();
    let q = (rho_plus.trace() + rho_minus.trace()).re;

    let (vals, vecs) = eigh(&delta)?;
    let tn: f64 = vals.iter().map(|l| l.abs()).sum();
    let mut effect = ComplexMatrix::zeros(d_b, d_b);
    for (k, &lam) in vals.iter().enumerate() {
        if lam >= TIE_EIGENVALUE {
            for i in 0..d_b {
                for j in 0..d_b {
                    effect[(i, j)] += vecs[(i, k)] * vecs[(j, k)].conj();
                }
            }
        }
    }
    Ok(HelstromResult {
        guess_prob: ((q + tn) / 2.0).min(1.0),
        optimal_effect: effect,
    })
}

/// Average guessing probability γ(ρ, μ) = ∫ dμ(r) γ(ρ, r).
///
/// Discrete mass is summed exactly; the uniform-equator and uniform-sphere
/// parts are averaged with the quadrature in `quad` (both integrands are
/// smooth except for |·| kinks, which the dense rules absorb below 1e-6).
pub fn gamma_of_state(
    rho: &DensityOperator,
    d_a: usize,
    d_b: usize,
    mu: &Strategy,
    quad: &QuadSpec,
) -> Result<f64> {
    let mut acc = 0.0;
    for atom in mu.atoms() {
        acc += atom.w * helstrom(rho, d_a, d_b, &atom.r)?.guess_prob;
    }
    let weq = mu.equator_weight();
    if weq > 0.0 {
        let n = quad.equator_nodes.max(8);
        let mut mean = 0.0;
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            mean += helstrom(rho, d_a, d_b, &BlochVector::equatorial(phi))?.guess_prob;
        }
        acc += weq * mean / n as f64;
    }
    let wsp = mu.sphere_weight();
    if wsp > 0.0 {
        let (nodes, weights) = gauss_legendre(quad.sphere_polar_nodes.max(8));
        let na = quad.sphere_azimuth_nodes.max(8);
        let mut mean = 0.0;
        for (t, w) in nodes.iter().zip(&weights) {
            let s = (1.0 - t * t).max(0.0).sqrt();
            let mut ring = 0.0;
            for k in 0..na {
                let phi = 2.0 * PI * k as f64 / na as f64;
                let r = BlochVector::normalized(s * phi.cos(), s * phi.sin(), *t)?;
                ring += helstrom(rho, d_a, d_b, &r)?.guess_prob;
            }
            mean += w / 2.0 * ring / na as f64;
        }
        acc += wsp * mean;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Closed forms.
// ---------------------------------------------------------------------------

/// Pole probability minimizing the equator+pole threshold at C = 0:
/// 4/(4 + π²).
pub fn optimal_pz_equator_plus_z() -> f64 {
    4.0 / (4.0 + PI * PI)
}

/// Exact C = 0 bias of the polygon strategy: 2/(M sin(π/M)) for even M,
/// 1/(M sin(π/(2M))) for odd M.
pub fn polygon_g_star(m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::invalid(format!("polygon order M = {m} must be ≥ 3")));
    }
    let mf = m as f64;
    Ok(if m.is_multiple_of(2) {
        2.0 / (mf * (PI / mf).sin())
    } else {
        1.0 / (mf * (PI / (2.0 * mf)).sin())
    })
}

/// Pole probability minimizing the polygon+pole threshold at C = 0:
/// g*²/(1 + g*²) for the polygon's C = 0 bias g*.
pub fn optimal_pz_polygon_plus_z(m: usize) -> Result<f64> {
    let g = polygon_g_star(m)?;
    Ok(g * g / (1.0 + g * g))
}

/// Exact bias of the uniform-sphere strategy:
/// g(C) = 1/2 + C² asinh(√(1−C²)/C) / (2√(1−C²)).
fn isotropic_g(c: f64) -> f64 {
    if c == 0.0 {
        return 0.5;
    }
    if c == 1.0 {
        return 1.0;
    }
    let s2 = 1.0 - c * c;
    let s = s2.sqrt();
    if c > 1.0 - 1e-6 {
        // Series in s around the removable singularity at s = 0.
        return 0.5 + c / 2.0 - s2 / (12.0 * c) + 3.0 * s2 * s2 / (80.0 * c * c * c);
    }
    0.5 + c * c * (s / c).asinh() / (2.0 * s)
}

/// Exact bias of the uniform-equator strategy: (2/π)·E(1 − C²) with E the
/// complete elliptic integral of the second kind (parameter convention).
fn equator_g(c: f64) -> f64 {
    if c == 1.0 {
        return 1.0;
    }
    2.0 / PI * ellip_e(1.0 - c * c)
}

/// Conjectured bias of the polygon strategy at concurrence C: the vertex
/// average of √(C² + (1−C²) cos²θ̃_j), with the maximizer sitting on an edge
/// bisector when 4 | M and on a vertex otherwise. Exact for M ∈ {3, 4} and
/// at C = 0 for every M.
pub fn polygon_conjectured_g(m: usize, c: f64) -> Result<f64> {
    if m < 3 {
        return Err(Error::invalid(format!("polygon order M = {m} must be ≥ 3")));
    }
    let s2 = 1.0 - c * c;
    let mf = m as f64;
    let sum: f64 = (0..m)
        .map(|j| {
            let theta = if m.is_multiple_of(4) {
                (2.0 * j as f64 - 1.0) * PI / mf
            } else {
                2.0 * PI * j as f64 / mf
            };
            (c * c + s2 * theta.cos().powi(2)).sqrt()
        })
        .sum();
    Ok(sum / mf)
}

/// Maximizer azimuths of the polygon strategy (edge bisectors when 4 | M,
/// vertices otherwise; odd polygons get both signs).
fn polygon_directions(m: usize) -> Vec<BlochVector> {
    if m % 2 == 1 {
        (0..2 * m)
            .map(|k| BlochVector::equatorial(k as f64 * PI / m as f64))
            .collect()
    } else if m.is_multiple_of(4) {
        (0..m)
            .map(|j| BlochVector::equatorial((2 * j + 1) as f64 * PI / m as f64))
            .collect()
    } else {
        (0..m)
            .map(|j| BlochVector::equatorial(2.0 * PI * j as f64 / m as f64))
            .collect()
    }
}

/// Tilts planar maximizers out of the equator toward ±z, the maximizer
/// geometry of pole-mixture strategies: v ∝ (sin θ*·u, ±cos θ*).
fn tilted_directions(planar: &[BlochVector], sin_t: f64, cos_t: f64) -> Vec<BlochVector> {
    let mut dirs: Vec<BlochVector> = Vec::new();
    for u in planar {
        for sz in [1.0, -1.0] {
            if cos_t == 0.0 && sz < 0.0 {
                continue;
            }
            let v = BlochVector::normalized(sin_t * u.x(), sin_t * u.y(), sz * cos_t)
                .expect("tilt preserves nonzero norm");
            if !dirs.iter().any(|d| d.angle_to(&v) < 1e-9) {
                dirs.push(v);
            }
        }
    }
    dirs
}

fn check_concurrence(c: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c) || !c.is_finite() {
        return Err(Error::invalid(format!(
            "concurrence C = {c} must lie in [0, 1]"
        )));
    }
    Ok(())
}

/// Closed-form bias g(C) of a named protocol, with its maximizing
/// directions.
///
/// Returns method `ClosedForm` for proven formulas, `Conjectured` for the
/// polygon (M ≥ 5, C > 0), icosahedron, and dodecahedron conjectures at
/// C > 0, and `Unsupported` where no formula exists (pole mixtures at
/// C > 0, two-setting with unequal weights at C > 0) — callers fall back
/// to [`g_oracle`].
pub fn g_closed(protocol: &Protocol, c: f64) -> Result<GuessReport> {
    check_concurrence(c)?;
    if c == 1.0 {
        // Every direction achieves bias 1 at C = 1.
        return Ok(GuessReport {
            value: 1.0,
            intelligent_directions: vec![BlochVector::z_axis()],
            degeneracy: MaximizerDegeneracy::Sphere,
            method: Method::ClosedForm,
        });
    }
    let params = protocol.resolved_params()?;
    let c2 = c * c;
    let s2 = 1.0 - c2;
    let report = |value: f64, dirs: Vec<BlochVector>, method: Method| GuessReport {
        value,
        intelligent_directions: dirs,
        degeneracy: MaximizerDegeneracy::Isolated,
        method,
    };

    match protocol.name {
        ProtocolName::Xy => {
            let dirs = (0..4)
                .map(|k| BlochVector::equatorial(PI / 4.0 + k as f64 * PI / 2.0))
                .collect();
            Ok(report(((1.0 + c2) / 2.0).sqrt(), dirs, Method::ClosedForm))
        }
        ProtocolName::Xyz | ProtocolName::Octahedron => Ok(report(
            ((1.0 + 2.0 * c2) / 3.0).sqrt(),
            cube_corner_directions(),
            Method::ClosedForm,
        )),
        ProtocolName::Tetrahedron | ProtocolName::Cube => {
            // Every vertex has |r·v| = 1/√3 against the coordinate axes, so
            // the bias matches the three-axis protocol with the maximizers
            // moved to the six axes.
            let mut dirs = Vec::new();
            for axis in [
                BlochVector::x_axis(),
                BlochVector::y_axis(),
                BlochVector::z_axis(),
            ] {
                dirs.push(axis);
                dirs.push(axis.neg());
            }
            Ok(report(
                ((1.0 + 2.0 * c2) / 3.0).sqrt(),
                dirs,
                Method::ClosedForm,
            ))
        }
        ProtocolName::Isotropic => Ok(GuessReport {
            value: isotropic_g(c),
            intelligent_directions: vec![BlochVector::z_axis()],
            degeneracy: MaximizerDegeneracy::Sphere,
            method: Method::ClosedForm,
        }),
        ProtocolName::Equator => Ok(GuessReport {
            value: equator_g(c),
            intelligent_directions: vec![BlochVector::x_axis()],
            degeneracy: MaximizerDegeneracy::Circle,
            method: Method::ClosedForm,
        }),
        ProtocolName::Polygon => {
            let m = params.m.expect("validated");
            let dirs = polygon_directions(m);
            match (m, c == 0.0) {
                (_, true) => Ok(report(polygon_g_star(m)?, dirs, Method::ClosedForm)),
                (3, false) => Ok(report(
                    (1.0 + (1.0 + 3.0 * c2).sqrt()) / 3.0,
                    dirs,
                    Method::ClosedForm,
                )),
                (4, false) => Ok(report(((1.0 + c2) / 2.0).sqrt(), dirs, Method::ClosedForm)),
                (_, false) => Ok(report(
                    polygon_conjectured_g(m, c)?,
                    dirs,
                    Method::Conjectured,
                )),
            }
        }
        ProtocolName::EquatorPlusZ | ProtocolName::EquatorPlusZTwo => {
            let p_z = params.p_z.expect("validated");
            if c > 0.0 {
                return Err(Error::unsupported(
                    "equator-plus-z has a closed form only at C = 0; use the numeric maximizer",
                ));
            }
            let planar = 2.0 * (1.0 - p_z) / PI;
            let value = (p_z * p_z + planar * planar).sqrt();
            if p_z == 1.0 {
                return Ok(report(
                    1.0,
                    vec![BlochVector::z_axis(), BlochVector::z_axis().neg()],
                    Method::ClosedForm,
                ));
            }
            let rep = BlochVector::normalized(planar, 0.0, p_z).expect("nonzero");
            Ok(GuessReport {
                value,
                intelligent_directions: vec![rep],
                degeneracy: MaximizerDegeneracy::Circle,
                method: Method::ClosedForm,
            })
        }
        ProtocolName::PolygonPlusZ => {
            let m = params.m.expect("validated");
            let p_z = params.p_z.expect("validated");
            if c > 0.0 {
                return Err(Error::unsupported(
                    "polygon-plus-z has a closed form only at C = 0; use the numeric maximizer",
                ));
            }
            let g_planar = (1.0 - p_z) * polygon_g_star(m)?;
            let value = (p_z * p_z + g_planar * g_planar).sqrt();
            let dirs = tilted_directions(&polygon_directions(m), g_planar, p_z);
            Ok(report(value, dirs, Method::ClosedForm))
        }
        ProtocolName::Icosahedron => {
            let value = (1.0 + (5.0 * (1.0 + 4.0 * c2)).sqrt()) / 6.0;
            let method = if c == 0.0 {
                Method::ClosedForm
            } else {
                Method::Conjectured
            };
            let dirs = protocol.strategy()?.atoms().iter().map(|a| a.r).collect();
            Ok(report(value, dirs, method))
        }
        ProtocolName::Dodecahedron => {
            let value = (1.0 + (5.0 + 4.0 * c2).sqrt() + 2.0 * (1.0 + 8.0 * c2).sqrt()) / 10.0;
            let method = if c == 0.0 {
                Method::ClosedForm
            } else {
                Method::Conjectured
            };
            let dirs = protocol.strategy()?.atoms().iter().map(|a| a.r).collect();
            Ok(report(value, dirs, method))
        }
        ProtocolName::TwoSetting => {
            let alpha = params.alpha.expect("validated");
            let p1 = params.p1.expect("validated");
            let r1 = BlochVector::x_axis();
            let r2 = BlochVector::equatorial(alpha);
            let cos_a = r1.dot(&r2);
            let balanced = (p1 - 0.5).abs() < 1e-12;
            if !balanced && c > 0.0 {
                return Err(Error::unsupported(
                    "two-setting with unequal weights has a closed form only at C = 0",
                ));
            }
            let bisectors = |sigma: f64| -> Vec<BlochVector> {
                let b = BlochVector::normalized(
                    p1 * r1.x() + sigma * (1.0 - p1) * r2.x(),
                    p1 * r1.y() + sigma * (1.0 - p1) * r2.y(),
                    0.0,
                );
                match b {
                    Ok(b) => vec![b, b.neg()],
                    Err(_) => Vec::new(), // antipodal settings with equal weights
                }
            };
            let value = if balanced {
                ((1.0 + c2 + s2 * cos_a.abs()) / 2.0).sqrt()
            } else {
                let p2 = 1.0 - p1;
                (p1 * p1 + p2 * p2 + 2.0 * p1 * p2 * cos_a.abs()).sqrt()
            };
            let mut dirs = if cos_a.abs() < 1e-12 {
                let mut d = bisectors(1.0);
                d.extend(bisectors(-1.0));
                d
            } else {
                bisectors(cos_a.signum())
            };
            if dirs.is_empty() {
                // Settings collapsed onto one axis: the axis itself is the
                // maximizer.
                dirs = vec![r1, r1.neg()];
            }
            Ok(report(value, dirs, Method::ClosedForm))
        }
    }
}

fn cube_corner_directions() -> Vec<BlochVector> {
    let s = 1.0 / 3f64.sqrt();
    let mut dirs = Vec::with_capacity(8);
    for &sx in &[1.0, -1.0] {
        for &sy in &[1.0, -1.0] {
            for &sz in &[1.0, -1.0] {
                dirs.push(BlochVector::normalized(sx * s, sy * s, sz * s).unwrap());
            }
        }
    }
    dirs
}

// ---------------------------------------------------------------------------
// The numeric oracle.
// ---------------------------------------------------------------------------

/// Evaluator of the bias objective f(v) = ∫ dμ(r) √(C² + (1−C²)(r·v)²)
/// for a fixed strategy and concurrence.
struct Objective {
    c2: f64,
    s2: f64,
    atoms: Vec<([f64; 3], f64)>,
    w_eq: f64,
    constant: f64,
}

impl Objective {
    fn new(mu: &Strategy, c: f64) -> Objective {
        let c2 = c * c;
        let s2 = 1.0 - c2;
        let atoms = mu.atoms().iter().map(|a| (a.r.as_array(), a.w)).collect();
        // The uniform-sphere average of √(C² + (1−C²)(r·v)²) does not depend
        // on v: it is ∫₀¹ √(C² + (1−C²)t²) dt, whose antiderivative gives
        //   (1/2)(1 + (C²/√(1−C²))·asinh(√(1−C²)/C)).
        // Quadrature is avoided here because the C = 0 integrand has an |t|
        // kink on [−1, 1] that costs ~1e-5; the identity is checked against
        // dense quadrature in the tests.
        let w_sph = mu.sphere_weight();
        let constant = if w_sph > 0.0 {
            let integral = if c2 == 0.0 {
                0.5
            } else if s2 <= 0.0 {
                1.0
            } else {
                let (cc, ss) = (c2.sqrt(), s2.sqrt());
                0.5 * (1.0 + (c2 / ss) * (ss / cc).asinh())
            };
            w_sph * integral
        } else {
            0.0
        };
        Objective {
            c2,
            s2,
            atoms,
            w_eq: mu.equator_weight(),
            constant,
        }
    }

    fn eval(&self, v: [f64; 3]) -> f64 {
        let mut acc = self.constant;
        for (r, w) in &self.atoms {
            let d = r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
            acc += w * (self.c2 + self.s2 * d * d).sqrt();
        }
        if self.w_eq > 0.0 {
            // Equatorial directions satisfy r(φ)·v = ρ_v cos(φ − φ_v), so
            // the uniform average over φ is the complete elliptic integral
            // (1/2π)∫√(C² + (1−C²)ρ² cos²φ) dφ = (2/π)√A·E(Kρ²/A) with
            // K = (1−C²), A = C² + Kρ².
            let rho2 = v[0] * v[0] + v[1] * v[1];
            let k_rho2 = self.s2 * rho2;
            let a = self.c2 + k_rho2;
            if a > 0.0 {
                acc += self.w_eq * a.sqrt() * (2.0 / PI) * ellip_e(k_rho2 / a);
            }
        }
        acc
    }
}

/// Direct evaluation of the bias objective at one direction; the quantity
/// every reported intelligent direction must reproduce.
pub fn strategy_objective(mu: &Strategy, c: f64, v: &BlochVector) -> Result<f64> {
    check_concurrence(c)?;
    Ok(Objective::new(mu, c).eval(v.as_array()))
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn angle3(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
        .clamp(-1.0, 1.0)
        .acos()
}

/// i-th point of the Fibonacci sphere lattice.
fn lattice_point(i: usize, n: usize) -> [f64; 3] {
    const GOLDEN_ANGLE: f64 = 2.399963229728653; // π(3 − √5)
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let th = GOLDEN_ANGLE * i as f64;
    [r * th.cos(), r * th.sin(), z]
}

/// Orthonormal frame of the tangent plane at v.
fn tangent_frame(v: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pick = if v[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let e1 = normalize3([
        pick[1] * v[2] - pick[2] * v[1],
        pick[2] * v[0] - pick[0] * v[2],
        pick[0] * v[1] - pick[1] * v[0],
    ]);
    let e2 = [
        v[1] * e1[2] - v[2] * e1[1],
        v[2] * e1[0] - v[0] * e1[2],
        v[0] * e1[1] - v[1] * e1[0],
    ];
    (e1, e2)
}

fn geodesic_step(v: [f64; 3], e: [f64; 3], t: f64) -> [f64; 3] {
    let (s, c) = t.sin_cos();
    normalize3([
        c * v[0] + s * e[0],
        c * v[1] + s * e[1],
        c * v[2] + s * e[2],
    ])
}

/// Golden-section maximization of f along the geodesic through v with
/// tangent e, over t ∈ [−h, h]; returns the best evaluated point.
fn golden_line_max(obj: &Objective, v: [f64; 3], e: [f64; 3], h: f64) -> ([f64; 3], f64) {
    const GR: f64 = 0.618_033_988_749_894_9;
    let eval = |t: f64| {
        let p = geodesic_step(v, e, t);
        (p, obj.eval(p))
    };
    let mut a = -h;
    let mut b = h;
    let mut c = b - GR * (b - a);
    let mut d = a + GR * (b - a);
    let (mut pc, mut fc) = eval(c);
    let (mut pd, mut fd) = eval(d);
    let mut best = if fc >= fd { (pc, fc) } else { (pd, fd) };
    for _ in 0..LINE_EVALS.saturating_sub(2) {
        if fc > fd {
            b = d;
            d = c;
            pd = pc;
            fd = fc;
            c = b - GR * (b - a);
            let r = eval(c);
            pc = r.0;
            fc = r.1;
        } else {
            a = c;
            c = d;
            pc = pd;
            fc = fd;
            d = a + GR * (b - a);
            let r = eval(d);
            pd = r.0;
            fd = r.1;
        }
        if fc > best.1 {
            best = (pc, fc);
        }
        if fd > best.1 {
            best = (pd, fd);
        }
    }
    best
}

/// Local maximization on the sphere: alternating golden-section line
/// searches along a tangent frame with shrinking width, keeping the best
/// evaluated point throughout.
fn refine_on_sphere(obj: &Objective, start: [f64; 3], iters: usize) -> ([f64; 3], f64) {
    let mut v = normalize3(start);
    let mut fv = obj.eval(v);
    let mut h = REFINE_HALFWIDTH;
    for _ in 0..iters {
        let (e1, e2) = tangent_frame(v);
        for e in [e1, e2] {
            let (p, fp) = golden_line_max(obj, v, e, h);
            if fp > fv {
                v = p;
                fv = fp;
            }
        }
        h *= REFINE_SHRINK;
    }
    (v, fv)
}

/// Numeric maximization of the bias objective over the sphere.
///
/// Pipeline: a 20,000-point Fibonacci-lattice scan, full local refinement of
/// the best well-separated candidates, degeneracy classification (constant
/// objective → sphere; invariance under z-rotations → circle), and — for
/// isolated maxima — refinement of every lattice point within
/// [`PHASE2_WINDOW`] of the maximum, keeping refined points within `tol` and
/// clustering them at angular scale [`CLUSTER_ANGLE`]. Deterministic for
/// fixed inputs regardless of thread count (ties break on lattice index).
pub fn g_oracle(mu: &Strategy, c: f64, tol: f64) -> Result<GuessReport> {
    check_concurrence(c)?;
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::invalid(format!("tolerance {tol} must be positive")));
    }
    let obj = Objective::new(mu, c);

    // Global scan.
    let values: Vec<f64> = (0..LATTICE_POINTS)
        .into_par_iter()
        .map(|i| obj.eval(lattice_point(i, LATTICE_POINTS)))
        .collect();
    let mut order: Vec<usize> = (0..LATTICE_POINTS).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));

    // Diverse top candidates.
    let mut candidates: Vec<[f64; 3]> = Vec::with_capacity(REFINE_TOP_K);
    for &i in &order {
        let p = lattice_point(i, LATTICE_POINTS);
        if candidates
            .iter()
            .all(|q| angle3(*q, p) > CANDIDATE_SEPARATION)
        {
            candidates.push(p);
            if candidates.len() == REFINE_TOP_K {
                break;
            }
        }
    }

    let refined: Vec<([f64; 3], f64)> = candidates
        .par_iter()
        .map(|&p| refine_on_sphere(&obj, p, REFINE_ITERS_FULL))
        .collect();
    let (mut best_v, mut best_f) = refined[0];
    for &(v, f) in &refined[1..] {
        if f > best_f {
            best_v = v;
            best_f = f;
        }
    }
    if best_f < values[order[0]] - 1e-12 {
        return Err(Error::numeric(format!(
            "sphere refinement lost the scan maximum ({} < {})",
            best_f, values[order[0]]
        )));
    }
    let value = best_f.clamp(0.5, 1.0);

    // Degeneracy classification. The probes are fixed arbitrary directions;
    // symmetric families match them only if the objective really is flat.
    let flat_tol = tol.max(1e-9) * 10.0;
    let sphere_probes: [[f64; 3]; 6] = [
        normalize3([1.0, 2.0, 3.0]),
        normalize3([-2.0, 1.0, 0.5]),
        normalize3([0.3, -1.0, 2.0]),
        normalize3([2.0, 0.5, -1.0]),
        normalize3([-1.0, -1.0, 1.0]),
        normalize3([0.7, 1.3, -2.1]),
    ];
    if sphere_probes
        .iter()
        .all(|&p| (obj.eval(p) - best_f).abs() <= flat_tol)
    {
        return Ok(GuessReport {
            value,
            intelligent_directions: vec![BlochVector::z_axis()],
            degeneracy: MaximizerDegeneracy::Sphere,
            method: Method::Oracle,
        });
    }
    let rho_best = (best_v[0] * best_v[0] + best_v[1] * best_v[1]).sqrt();
    if rho_best > 1e-6 {
        let circle = [1.0f64, 2.3, 3.7, 4.9, 5.8].iter().all(|&ang| {
            let (s, c_) = ang.sin_cos();
            let p = [
                c_ * best_v[0] - s * best_v[1],
                s * best_v[0] + c_ * best_v[1],
                best_v[2],
            ];
            (obj.eval(p) - best_f).abs() <= flat_tol
        });
        if circle {
            let rep =
                BlochVector::normalized(rho_best, 0.0, best_v[2].abs()).expect("nonzero radius");
            return Ok(GuessReport {
                value,
                intelligent_directions: vec![rep],
                degeneracy: MaximizerDegeneracy::Circle,
                method: Method::Oracle,
            });
        }
    }

    // Maximizer collection: refine every lattice point close to the top.
    let window = best_f - PHASE2_WINDOW;
    let mut pool: Vec<usize> = (0..LATTICE_POINTS)
        .filter(|&i| values[i] >= window)
        .collect();
    pool.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    pool.truncate(PHASE2_MAX_POINTS);
    let mut finals: Vec<([f64; 3], f64)> = pool
        .par_iter()
        .map(|&i| refine_on_sphere(&obj, lattice_point(i, LATTICE_POINTS), REFINE_ITERS_BRIEF))
        .collect();
    finals.extend_from_slice(&refined);
    let global_best = finals.iter().map(|&(_, f)| f).fold(best_f, f64::max);
    let keep = global_best - tol;
    let mut kept: Vec<([f64; 3], f64)> = finals.into_iter().filter(|&(_, f)| f >= keep).collect();
    kept.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());

    // Cluster into distinct directions (representative = best member).
    let mut dirs: Vec<[f64; 3]> = Vec::new();
    for (v, _) in kept {
        if dirs.iter().all(|&d| angle3(d, v) > CLUSTER_ANGLE) {
            dirs.push(v);
            if dirs.len() == MAX_DIRECTIONS {
                break;
            }
        }
    }
    let intelligent_directions = dirs
        .into_iter()
        .map(|d| BlochVector::normalized(d[0], d[1], d[2]).expect("unit"))
        .collect();
    Ok(GuessReport {
        value: global_best.clamp(0.5, 1.0),
        intelligent_directions,
        degeneracy: MaximizerDegeneracy::Isolated,
        method: Method::Oracle,
    })
}

// ---------------------------------------------------------------------------
// Exact enumeration for center-symmetric discrete strategies.
// ---------------------------------------------------------------------------

/// Exact C = 0 bias of a center-symmetric discrete strategy.
///
/// For atoms in equal-weight antipodal pairs {(rᵢ, wᵢ), (−rᵢ, wᵢ)}, the
/// maximum of Σ 2wᵢ|rᵢ·v| over v equals the maximum of ‖Σ 2wᵢsᵢrᵢ‖ over
/// sign patterns s, attained at v ∝ Σ sᵢwᵢrᵢ. All 2^(pairs−1) essentially
/// distinct patterns are enumerated (refused above 24 pairs), so the result
/// is exact and the maximizing directions are complete.
pub fn g_star_center_symmetric(mu: &Strategy) -> Result<GuessReport> {
    if !mu.is_discrete_support() {
        return Err(Error::invalid(
            "subset enumeration requires a discrete strategy",
        ));
    }
    let atoms = mu.atoms();
    let n = atoms.len();
    let mut used = vec![false; n];
    let mut pairs: Vec<([f64; 3], f64)> = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        let partner =
            (i + 1..n).find(|&j| !used[j] && atoms[i].r.angle_to(&atoms[j].r.neg()) <= 1e-9);
        let Some(j) = partner else {
            return Err(Error::invalid(format!(
                "strategy is not center-symmetric: atom {i} has no antipodal partner",
            )));
        };
        if (atoms[i].w - atoms[j].w).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "strategy is not center-symmetric: atoms {i} and {j} have unequal weights",
            )));
        }
        used[j] = true;
        pairs.push((atoms[i].r.as_array(), atoms[i].w));
    }
    let p = pairs.len();
    if p > 24 {
        return Err(Error::unsupported(format!(
            "{p} antipodal pairs exceed the enumeration limit of 24; use the numeric maximizer",
        )));
    }

    // Two passes of a Gray-code walk over sign patterns with s₀ = +1 (global
    // sign flips leave the norm unchanged): first find the maximum norm,
    // then collect every pattern that attains it.
    fn walk(pairs: &[([f64; 3], f64)], visit: &mut dyn FnMut(&[f64; 3], f64)) {
        let p = pairs.len();
        let total: u64 = 1u64 << (p - 1);
        let mut signs = vec![1.0f64; p];
        let mut eta = [0.0f64; 3];
        for (r, w) in pairs {
            for k in 0..3 {
                eta[k] += w * r[k];
            }
        }
        let norm = |e: &[f64; 3]| (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
        visit(&eta, norm(&eta));
        for step in 1..total {
            let flip = step.trailing_zeros() as usize + 1;
            signs[flip] = -signs[flip];
            let (r, w) = pairs[flip];
            for k in 0..3 {
                eta[k] += 2.0 * signs[flip] * w * r[k];
            }
            // Periodic exact recomputation keeps incremental rounding from
            // drifting over long walks.
            if step % 4096 == 0 {
                eta = [0.0; 3];
                for (idx, (r, w)) in pairs.iter().enumerate() {
                    for k in 0..3 {
                        eta[k] += signs[idx] * w * r[k];
                    }
                }
            }
            visit(&eta, norm(&eta));
        }
    }

    let mut best = 0.0f64;
    walk(&pairs, &mut |_, nrm| {
        if nrm > best {
            best = nrm;
        }
    });
    let mut maximizers: Vec<[f64; 3]> = Vec::new();
    walk(&pairs, &mut |eta, nrm| {
        if nrm >= best - 1e-12 && maximizers.len() < MAX_DIRECTIONS {
            maximizers.push(*eta);
        }
    });

    let mut dirs: Vec<BlochVector> = Vec::new();
    for eta in maximizers {
        let v = BlochVector::normalized(eta[0], eta[1], eta[2])?;
        for cand in [v, v.neg()] {
            if dirs.iter().all(|d| d.angle_to(&cand) > 1e-9) && dirs.len() < MAX_DIRECTIONS {
                dirs.push(cand);
            }
        }
    }
    Ok(GuessReport {
        value: (2.0 * best).clamp(0.5, 1.0),
        intelligent_directions: dirs,
        degeneracy: MaximizerDegeneracy::Isolated,
        method: Method::ClosedForm,
    })
}

// ---------------------------------------------------------------------------
// Resolution, thresholds, and bound functions.
// ---------------------------------------------------------------------------

/// Bias g(C, μ) by the most reliable available route: proven closed forms
/// for the exactly solved families, exact subset enumeration for
/// center-symmetric discrete strategies at C = 0, and the numeric oracle
/// otherwise. Conjectured formulas are never used here.
pub fn g_value(mu: &Strategy, c: f64) -> Result<GuessReport> {
    check_concurrence(c)?;
    match mu.kind() {
        StrategyKind::Isotropic => g_closed(&Protocol::new(ProtocolName::Isotropic), c),
        StrategyKind::Equator => g_closed(&Protocol::new(ProtocolName::Equator), c),
        StrategyKind::Polygon { m } if m <= 4 || c == 0.0 => g_closed(
            &Protocol::with_params(
                ProtocolName::Polygon,
                crate::strategy::ProtocolParams {
                    m: Some(m),
                    ..Default::default()
                },
            ),
            c,
        ),
        StrategyKind::EquatorPlusZ { p_z } if c == 0.0 => g_closed(
            &Protocol::with_params(
                ProtocolName::EquatorPlusZ,
                crate::strategy::ProtocolParams {
                    p_z: Some(p_z),
                    ..Default::default()
                },
            ),
            0.0,
        ),
        StrategyKind::PolygonPlusZ { m, p_z } if c == 0.0 => g_closed(
            &Protocol::with_params(
                ProtocolName::PolygonPlusZ,
                crate::strategy::ProtocolParams {
                    m: Some(m),
                    p_z: Some(p_z),
                    ..Default::default()
                },
            ),
            0.0,
        ),
        StrategyKind::Discrete if c == 0.0 => {
            let sym = mu.symmetrize()?;
            if sym.atoms().len() <= 48 {
                g_star_center_symmetric(&sym)
            } else {
                g_oracle(mu, c, ORACLE_TOL)
            }
        }
        _ => g_oracle(mu, c, ORACLE_TOL),
    }
}

/// The C = 0 bias g*(μ).
pub fn g_star(mu: &Strategy) -> Result<GuessReport> {
    g_value(mu, 0.0)
}

/// The entanglement threshold γ*(μ) = (1 + g*(μ))/2.
pub fn gamma_star(mu: &Strategy) -> Result<f64> {
    Ok((1.0 + g_star(mu)?.value) / 2.0)
}

/// Upper bound on the guessing probability over all states of concurrence
/// ≤ C: γ̂(C, μ) = (1 − C)γ* + C.
pub fn gamma_hat(mu: &Strategy, c: f64) -> Result<f64> {
    check_concurrence(c)?;
    let gs = gamma_star(mu)?;
    Ok((1.0 - c) * gs + c)
}

/// Guessing-probability bound as a function of the reduced fidelity F:
/// 2γ*F for F < 1/2 and γ(2F − 1, μ) for F ≥ 1/2.
pub fn gamma_fidelity(mu: &Strategy, f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) || !f.is_finite() {
        return Err(Error::invalid(format!(
            "fidelity F = {f} must lie in [0, 1]"
        )));
    }
    if f < 0.5 {
        Ok(2.0 * gamma_star(mu)? * f)
    } else {
        Ok((1.0 + g_value(mu, 2.0 * f - 1.0)?.value) / 2.0)
    }
}

/// Second-moment sandwich on the bias:
/// ‖Ξ‖ + (1 − ‖Ξ‖)C ≤ g(C, μ) ≤ √(C² + (1 − C²)‖Ξ‖).
pub fn xi_bounds(mu: &Strategy, c: f64) -> Result<(f64, f64)> {
    check_concurrence(c)?;
    let xi_norm = mu.verification_matrix().operator_norm();
    let lower = xi_norm + (1.0 - xi_norm) * c;
    let upper = (c * c + (1.0 - c * c) * xi_norm).sqrt();
    Ok((lower, upper))
}

/// Pass-rate threshold above which entanglement (Bell) or genuine
/// multipartite entanglement (GHZ, through the effective strategy) is
/// certified: γ*(μ).
pub fn gme_threshold(mu: &Strategy) -> Result<f64> {
    gamma_star(mu)
}

/// Checks the dimension-reduction inequality for a pure state whose first
/// factor has dimension > 2: the guessing value of the projected state,
/// q·γ(ρ′, μ), must not exceed γ(C(ψ), μ) computed from the I-concurrence
/// of the full state.
pub fn higher_dim_reduction_check(
    psi: &PureState,
    d_a: usize,
    d_b: usize,
    mu: &Strategy,
) -> Result<bool> {
    if d_a < 3 {
        return Err(Error::invalid(
            "the reduction check applies to first-factor dimension ≥ 3",
        ));
    }
    if d_b != 2 {
        return Err(Error::invalid(
            "the reduction check requires a qubit second factor",
        ));
    }
    let rho = psi.to_density();
    let lhs = gamma_of_state(&rho, d_a, d_b, mu, &QuadSpec::default())?;
    let c = crate::qcore::concurrence_pure(psi, d_a, d_b)?.min(1.0);
    let rhs = (1.0 + g_value(mu, c)?.value) / 2.0;
    Ok(lhs <= rhs + 1e-9)
}

#[cfg(test)]
// Reference values are frozen at full printed precision, including ones
// that happen to equal library constants; both lints fire on purpose here.
#[allow(clippy::excessive_precision, clippy::approx_constant)]
// Matrix checks compare element by element so failures name the index.
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::qcore::identity2;
    use crate::strategy::{Atom, ProtocolParams};
    use num_complex::Complex64;

    fn assert_close(a: f64, b: f64, tol: f64, msg: &str) {
        assert!(
            (a - b).abs() <= tol,
            "{msg}: {a} vs {b} (|Δ| = {:.3e})",
            (a - b).abs()
        );
    }

    fn proto(name: ProtocolName) -> Protocol {
        Protocol::new(name)
    }

    fn proto_m(name: ProtocolName, m: usize) -> Protocol {
        Protocol::with_params(
            name,
            ProtocolParams {
                m: Some(m),
                ..Default::default()
            },
        )
    }

    #[test]
    fn closed_form_thresholds() {
        // Frozen C = 0 biases of the named protocols.
        let cases: Vec<(Protocol, f64)> = vec![
            (proto(ProtocolName::Xy), 0.70710678118654752),
            (proto(ProtocolName::Xyz), 0.57735026918962576),
            (proto(ProtocolName::Isotropic), 0.5),
            (proto(ProtocolName::Equator), 0.63661977236758134),
            (proto_m(ProtocolName::Polygon, 3), 2.0 / 3.0),
            (proto(ProtocolName::EquatorPlusZ), 0.53702927214631508),
            (proto_m(ProtocolName::PolygonPlusZ, 3), 0.55470019622522912),
            (proto(ProtocolName::EquatorPlusZTwo), 0.53966439553541095),
            (proto(ProtocolName::Icosahedron), (1.0 + 5f64.sqrt()) / 6.0),
            (
                proto(ProtocolName::Dodecahedron),
                (3.0 + 5f64.sqrt()) / 10.0,
            ),
            (proto(ProtocolName::Tetrahedron), 0.57735026918962576),
            (proto(ProtocolName::Octahedron), 0.57735026918962576),
            (proto(ProtocolName::Cube), 0.57735026918962576),
        ];
        for (p, expect) in cases {
            let rep = g_closed(&p, 0.0).unwrap();
            assert_close(rep.value, expect, 1e-15, p.name.as_str());
        }
        // γ-scale spot checks from the protocol table.
        assert_close(
            g_closed(&proto(ProtocolName::Xy), 0.0).unwrap().gamma(),
            (2.0 + 2f64.sqrt()) / 4.0,
            1e-15,
            "xy gamma*",
        );
        assert_close(
            g_closed(&proto(ProtocolName::EquatorPlusZ), 0.0)
                .unwrap()
                .gamma(),
            0.5 + 1.0 / (4.0 + PI * PI).sqrt(),
            1e-15,
            "equator-plus-z gamma*",
        );
        assert_close(
            g_closed(&proto_m(ProtocolName::PolygonPlusZ, 3), 0.0)
                .unwrap()
                .gamma(),
            0.5 + 1.0 / 13f64.sqrt(),
            1e-15,
            "triangle-plus-z gamma*",
        );
    }

    #[test]
    fn closed_form_curves_match_frozen_values() {
        // γ(C) on C ∈ {0, 0.25, 0.5, 0.75, 1} — high-precision references.
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let cases: Vec<(Protocol, [f64; 5])> = vec![
            (
                proto(ProtocolName::Xy),
                [
                    0.85355339059327376,
                    0.86443449342783128,
                    0.89528470752104742,
                    0.9419417382415922,
                    1.0,
                ],
            ),
            (
                proto(ProtocolName::Xyz),
                [
                    0.78867513459481288,
                    0.80618621784789726,
                    0.85355339059327376,
                    0.92081270576508658,
                    1.0,
                ],
            ),
            (
                proto(ProtocolName::Isotropic),
                [
                    0.75,
                    0.78329857251574813,
                    0.84504324953761829,
                    0.91909868666319438,
                    1.0,
                ],
            ),
            (
                proto(ProtocolName::Equator),
                [
                    0.81830988618379067,
                    0.84132455736084043,
                    0.88549110629751001,
                    0.93973500462123449,
                    1.0,
                ],
            ),
            (
                proto_m(ProtocolName::Polygon, 3),
                [
                    0.83333333333333333,
                    0.8482874559808614,
                    0.88714594258871588,
                    0.93989327184591669,
                    1.0,
                ],
            ),
        ];
        for (p, expect) in cases {
            for (c, e) in grid.iter().zip(&expect) {
                let rep = g_closed(&p, *c).unwrap();
                assert_close(rep.gamma(), *e, 1e-12, &format!("{} at C={c}", p.name));
            }
            assert_eq!(g_closed(&p, 1.0).unwrap().value, 1.0, "exact 1 at C=1");
        }
        // The tetrahedral curve coincides with the three-axis curve.
        for c in grid {
            assert_close(
                g_closed(&proto(ProtocolName::Tetrahedron), c)
                    .unwrap()
                    .value,
                g_closed(&proto(ProtocolName::Xyz), c).unwrap().value,
                1e-15,
                "tetrahedron ≡ xyz",
            );
        }
    }

    #[test]
    fn two_setting_closed_form() {
        // α = π/3, balanced weights: frozen numeric maxima.
        let p = Protocol::with_params(
            ProtocolName::TwoSetting,
            ProtocolParams {
                alpha: Some(PI / 3.0),
                ..Default::default()
            },
        );
        let expect = [
            (0.0, 0.86602540378443868),
            (0.4, 0.88881944173155891),
            (0.8, 0.95393920141694566),
        ];
        for (c, e) in expect {
            assert_close(g_closed(&p, c).unwrap().value, e, 1e-15, "two-setting π/3");
        }
        // Orthogonal balanced two-setting is the xy protocol.
        let orth = Protocol::with_params(
            ProtocolName::TwoSetting,
            ProtocolParams {
                alpha: Some(PI / 2.0),
                ..Default::default()
            },
        );
        let rep = g_closed(&orth, 0.3).unwrap();
        assert_close(
            rep.value,
            g_closed(&proto(ProtocolName::Xy), 0.3).unwrap().value,
            1e-15,
            "orthogonal = xy",
        );
        assert_eq!(rep.intelligent_directions.len(), 4);
        // Unbalanced weights at C = 0.
        let unb = Protocol::with_params(
            ProtocolName::TwoSetting,
            ProtocolParams {
                alpha: Some(PI / 3.0),
                p1: Some(0.7),
                ..Default::default()
            },
        );
        let g = g_closed(&unb, 0.0).unwrap().value;
        assert_close(
            g,
            (0.49f64 + 0.09 + 2.0 * 0.7 * 0.3 * 0.5).sqrt(),
            1e-15,
            "unbalanced C=0",
        );
        assert!(g_closed(&unb, 0.5).is_err(), "unbalanced C>0 unsupported");
    }

    #[test]
    fn conjectured_forms_reduce_to_exact_at_c0() {
        for m in 3..=12 {
            assert_close(
                polygon_conjectured_g(m, 0.0).unwrap(),
                polygon_g_star(m).unwrap(),
                1e-12,
                &format!("polygon({m}) conjecture at C=0"),
            );
        }
        // Frozen C = 0 polygon biases.
        let expect = [
            (3, 2.0 / 3.0),
            (4, 0.70710678118654752),
            (5, 0.64721359549995794),
            (6, 2.0 / 3.0),
            (7, 0.64199417249070487),
            (8, 0.65328148243818826),
            (12, 0.64395055085937886),
        ];
        for (m, e) in expect {
            assert_close(polygon_g_star(m).unwrap(), e, 1e-15, &format!("g*({m})"));
        }
    }

    #[test]
    fn reported_directions_achieve_the_value() {
        let protocols = vec![
            proto(ProtocolName::Xy),
            proto(ProtocolName::Xyz),
            proto(ProtocolName::Tetrahedron),
            proto(ProtocolName::Octahedron),
            proto(ProtocolName::Cube),
            proto(ProtocolName::Icosahedron),
            proto(ProtocolName::Dodecahedron),
            proto_m(ProtocolName::Polygon, 3),
            proto_m(ProtocolName::Polygon, 4),
            proto_m(ProtocolName::Polygon, 5),
            proto_m(ProtocolName::Polygon, 6),
            proto_m(ProtocolName::Polygon, 8),
        ];
        for p in protocols {
            let mu = p.strategy().unwrap();
            for c in [0.0, 0.3, 0.7] {
                let rep = g_closed(&p, c).unwrap();
                for dir in &rep.intelligent_directions {
                    let f = strategy_objective(&mu, c, dir).unwrap();
                    assert_close(
                        f,
                        rep.value,
                        1e-9,
                        &format!("{} C={c} direction value", p.name),
                    );
                }
            }
        }
        // Pole mixtures at C = 0.
        for p in [
            proto(ProtocolName::EquatorPlusZ),
            proto(ProtocolName::EquatorPlusZTwo),
            proto_m(ProtocolName::PolygonPlusZ, 3),
            proto_m(ProtocolName::PolygonPlusZ, 6),
        ] {
            let mu = p.strategy().unwrap();
            let rep = g_closed(&p, 0.0).unwrap();
            for dir in &rep.intelligent_directions {
                // 256-node equator quadrature carries ~1e-7 kink error at C=0.
                let f = strategy_objective(&mu, 0.0, dir).unwrap();
                assert_close(f, rep.value, 1e-6, &format!("{} pole mixture", p.name));
            }
        }
    }

    #[test]
    fn helstrom_examples() {
        let bell = PureState::bell().to_density();
        for r in [
            BlochVector::x_axis(),
            BlochVector::z_axis(),
            BlochVector::normalized(1.0, -2.0, 0.5).unwrap(),
        ] {
            let res = helstrom(&bell, 2, 2, &r).unwrap();
            assert_close(res.guess_prob, 1.0, 1e-10, "bell state is fully guessable");
        }
        let zz = PureState::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap()
        .to_density();
        assert_close(
            helstrom(&zz, 2, 2, &BlochVector::x_axis())
                .unwrap()
                .guess_prob,
            0.5,
            1e-12,
            "|00⟩ against x",
        );
        assert_close(
            helstrom(&zz, 2, 2, &BlochVector::z_axis())
                .unwrap()
                .guess_prob,
            1.0,
            1e-12,
            "|00⟩ against z",
        );
        // The optimal effect is a projector between 0 and 𝕀, and attains
        // the reported probability.
        let r = BlochVector::normalized(0.3, -0.4, 0.5).unwrap();
        let res = helstrom(&bell, 2, 2, &r).unwrap();
        let e = &res.optimal_effect;
        assert!(e.is_hermitian(1e-10));
        assert!(e.mul(e).max_abs_diff(e) < 1e-10, "projector");
        let p_plus = crate::qcore::qubit_projector(r.as_array(), 1.0).kron(&identity2());
        let p_minus = crate::qcore::qubit_projector(r.as_array(), -1.0).kron(&identity2());
        let rho_p = partial_trace_matrix(&bell.matrix().mul(&p_plus), &[2, 2], &[1]).unwrap();
        let rho_m = partial_trace_matrix(&bell.matrix().mul(&p_minus), &[2, 2], &[1]).unwrap();
        let e_minus = ComplexMatrix::identity(2).sub(e);
        let attained = rho_p.mul(e).trace().re + rho_m.mul(&e_minus).trace().re;
        assert_close(attained, res.guess_prob, 1e-10, "effect attains the bound");
    }

    #[test]
    fn helstrom_matches_correlation_radius_on_pure_states() {
        // For a pure two-qubit state, γ(ψ, r) = (1 + ‖Tᵀr‖)/2.
        let psi = PureState::normalized(vec![
            Complex64::new(0.6, 0.1),
            Complex64::new(-0.2, 0.3),
            Complex64::new(0.1, -0.4),
            Complex64::new(0.5, 0.2),
        ])
        .unwrap();
        let rho = psi.to_density();
        let dec = crate::qcore::bloch_decompose(&rho).unwrap();
        for r in [
            BlochVector::x_axis(),
            BlochVector::z_axis(),
            BlochVector::normalized(1.0, 1.0, -0.5).unwrap(),
            BlochVector::normalized(-0.2, 0.9, 0.4).unwrap(),
        ] {
            let ra = r.as_array();
            let mut ttr = [0.0f64; 3];
            for k in 0..3 {
                for j in 0..3 {
                    ttr[k] += dec.t[j][k] * ra[j];
                }
            }
            let expect = (1.0 + (ttr[0] * ttr[0] + ttr[1] * ttr[1] + ttr[2] * ttr[2]).sqrt()) / 2.0;
            let got = helstrom(&rho, 2, 2, &r).unwrap().guess_prob;
            assert_close(got, expect, 1e-9, "pure-state radius formula");
        }
    }

    #[test]
    fn gamma_of_state_examples() {
        let quad = QuadSpec::default();
        let xyz = proto(ProtocolName::Xyz).strategy().unwrap();
        let bell = PureState::bell().to_density();
        assert_close(
            gamma_of_state(&bell, 2, 2, &xyz, &quad).unwrap(),
            1.0,
            1e-10,
            "bell against xyz",
        );
        let zz = PureState::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap()
        .to_density();
        assert_close(
            gamma_of_state(&zz, 2, 2, &xyz, &quad).unwrap(),
            2.0 / 3.0,
            1e-12,
            "|00⟩ against xyz",
        );
        assert_close(
            gamma_of_state(&bell, 2, 2, &Strategy::isotropic(), &quad).unwrap(),
            1.0,
            1e-10,
            "bell against isotropic",
        );
    }

    #[test]
    fn gamma_of_state_matches_closed_form_for_aligned_pure_state() {
        // cos θ|00⟩ + sin θ|11⟩ with Alice rotated so the long ellipsoid
        // axis points along (1,1,1)/√3; averaging against the three axes
        // must reproduce the closed-form bias at the state's concurrence.
        let c = 0.5f64;
        let theta = 0.5 * c.asin();
        let n = BlochVector::normalized(1.0, 1.0, 1.0).unwrap();
        // Rotation taking z to n: axis = z × n normalized, angle = ∠(z, n).
        let axis = BlochVector::normalized(-n.y(), n.x(), 0.0).unwrap();
        let beta = BlochVector::z_axis().angle_to(&n);
        let (sb, cb) = ((beta / 2.0).sin(), (beta / 2.0).cos());
        let mut u = ComplexMatrix::identity(2).scale(Complex64::new(cb, 0.0));
        for (j, comp) in axis.as_array().iter().enumerate() {
            u = u.add(&crate::qcore::pauli(j).scale(Complex64::new(0.0, -sb * comp)));
        }
        let psi = PureState::new(vec![
            Complex64::new(theta.cos(), 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(theta.sin(), 0.0),
        ])
        .unwrap();
        let big_u = u.kron(&ComplexMatrix::identity(2));
        let rotated = PureState::new(big_u.apply(psi.amplitudes())).unwrap();
        let rho = rotated.to_density();
        // The numeric Wootters extraction squares-then-roots tiny
        // eigenvalues, so its noise floor is ~√(eigensolver residual).
        assert_close(
            crate::qcore::concurrence(&rho).unwrap(),
            c,
            1e-7,
            "rotation preserves concurrence",
        );
        let xyz = proto(ProtocolName::Xyz).strategy().unwrap();
        let expect = 0.5 + 0.5 * ((1.0 + 2.0 * c * c) / 3.0).sqrt();
        assert_close(
            gamma_of_state(&rho, 2, 2, &xyz, &QuadSpec::default()).unwrap(),
            expect,
            1e-9,
            "aligned state attains the closed form",
        );
    }

    #[test]
    fn oracle_finds_known_maxima() {
        // Three axes at C = 0: bias 1/√3 with the eight cube corners.
        let xyz = proto(ProtocolName::Xyz).strategy().unwrap();
        let rep = g_oracle(&xyz, 0.0, 1e-8).unwrap();
        assert_close(rep.value, 1.0 / 3f64.sqrt(), 1e-6, "xyz C=0");
        assert_eq!(rep.degeneracy, MaximizerDegeneracy::Isolated);
        assert_eq!(rep.intelligent_directions.len(), 8, "eight corners");
        for d in &rep.intelligent_directions {
            for comp in d.as_array() {
                assert_close(comp.abs(), 1.0 / 3f64.sqrt(), 1e-5, "corner coords");
            }
        }

        // Uniform equator: circle degeneracy matching the elliptic closed
        // form away from C = 0.
        let eq = Strategy::equator();
        for c in [0.0, 0.5] {
            let rep = g_oracle(&eq, c, 1e-8).unwrap();
            assert_close(rep.value, equator_g(c), 1e-6, "equator vs closed form");
            assert_eq!(rep.degeneracy, MaximizerDegeneracy::Circle, "at C={c}");
        }

        // Isotropic: constant objective, sphere degeneracy.
        let iso = Strategy::isotropic();
        let rep = g_oracle(&iso, 0.3, 1e-8).unwrap();
        assert_eq!(rep.degeneracy, MaximizerDegeneracy::Sphere);
        assert_close(rep.value, isotropic_g(0.3), 1e-9, "isotropic value");

        // C = 1 is flat at 1 for every strategy.
        let rep = g_oracle(&xyz, 1.0, 1e-8).unwrap();
        assert_eq!(rep.value, 1.0);
        assert_eq!(rep.degeneracy, MaximizerDegeneracy::Sphere);
    }

    #[test]
    fn sphere_average_identity_matches_dense_quadrature() {
        // ∫₀¹ √(C² + (1−C²)t²) dt: the antiderivative used by the oracle's
        // uniform-sphere constant, against a 200k-node midpoint rule.
        for &c in &[0.05, 0.3, 0.5, 0.8, 0.99] {
            let c2: f64 = c * c;
            let s2 = 1.0 - c2;
            let n = 200_000;
            let mut quad = 0.0;
            for i in 0..n {
                let t = (i as f64 + 0.5) / n as f64;
                quad += (c2 + s2 * t * t).sqrt();
            }
            quad /= n as f64;
            let exact = 0.5 * (1.0 + (c2 / s2.sqrt()) * (s2.sqrt() / c).asinh());
            assert_close(quad, exact, 1e-9, &format!("sphere average at C={c}"));
        }
    }

    #[test]
    fn oracle_matches_frozen_irregular_strategy() {
        // Hand-picked 5-atom strategy with independently computed biases.
        let dirs = [
            [0.2672612419124244, -0.5345224838248488, 0.8017837257372732],
            [-0.4082482904638630, 0.8164965809277260, 0.4082482904638630],
            [0.7071067811865475, 0.7071067811865475, 0.0],
            [0.0, -0.6, 0.8],
            [-0.9486832980505138, 0.0, -0.3162277660168379],
        ];
        let weights = [0.15, 0.25, 0.30, 0.10, 0.20];
        let atoms = dirs
            .iter()
            .zip(&weights)
            .map(|(d, &w)| Atom {
                r: BlochVector::new(d[0], d[1], d[2]).unwrap(),
                w,
            })
            .collect();
        let mu = Strategy::discrete(atoms).unwrap();
        let expect = [
            (0.0, 0.61505670781919153),
            (0.3, 0.66566701303545739),
            (0.7, 0.83705989129231928),
        ];
        for (c, e) in expect {
            let rep = g_oracle(&mu, c, 1e-8).unwrap();
            assert_close(rep.value, e, 1e-6, &format!("irregular strategy at C={c}"));
        }
        // At C = 0 the exact enumeration agrees with the oracle.
        let exact = g_star_center_symmetric(&mu.symmetrize().unwrap()).unwrap();
        assert_close(exact.value, expect[0].1, 1e-9, "subset enumeration");
    }

    #[test]
    fn subset_enumeration_exact_values() {
        // Hexagon: 2/3 with all six vertices intelligent.
        let hex = Strategy::polygon(3).unwrap().symmetrize().unwrap();
        let rep = g_star_center_symmetric(&hex).unwrap();
        assert_close(rep.value, 2.0 / 3.0, 1e-15, "hexagon");
        assert_eq!(rep.intelligent_directions.len(), 6);

        // Doubled xy: 1/√2.
        let xy = proto(ProtocolName::Xy)
            .strategy()
            .unwrap()
            .symmetrize()
            .unwrap();
        let rep = g_star_center_symmetric(&xy).unwrap();
        assert_close(rep.value, 0.70710678118654752, 1e-15, "xy");
        assert_eq!(rep.intelligent_directions.len(), 4);

        // Platonic vertex sets: golden-ratio closed forms, exactly.
        let ico = proto(ProtocolName::Icosahedron).strategy().unwrap();
        let rep = g_star_center_symmetric(&ico.symmetrize().unwrap()).unwrap();
        assert_close(rep.value, (1.0 + 5f64.sqrt()) / 6.0, 1e-14, "icosahedron");
        assert_eq!(rep.intelligent_directions.len(), 12, "vertex maximizers");

        let dod = proto(ProtocolName::Dodecahedron).strategy().unwrap();
        let rep = g_star_center_symmetric(&dod.symmetrize().unwrap()).unwrap();
        assert_close(rep.value, (3.0 + 5f64.sqrt()) / 10.0, 1e-14, "dodecahedron");
        assert_eq!(rep.intelligent_directions.len(), 20, "vertex maximizers");

        // Non-symmetric input is rejected.
        assert!(g_star_center_symmetric(&proto(ProtocolName::Xy).strategy().unwrap()).is_err());
    }

    #[test]
    fn threshold_and_bound_functions() {
        let iso = Strategy::isotropic();
        assert_close(
            gamma_star(&iso).unwrap(),
            0.75,
            1e-12,
            "isotropic threshold",
        );
        for c in [0.0, 0.3, 1.0] {
            assert_close(
                gamma_hat(&iso, c).unwrap(),
                (3.0 + c) / 4.0,
                1e-12,
                "isotropic linear bound",
            );
        }
        assert_close(
            gamma_fidelity(&iso, 0.25).unwrap(),
            0.375,
            1e-12,
            "low-fidelity branch",
        );
        assert_close(
            gamma_fidelity(&iso, 0.5).unwrap(),
            0.75,
            1e-12,
            "γ^F(1/2) = γ*",
        );
        let xy = proto(ProtocolName::Xy).strategy().unwrap();
        assert_close(gamma_fidelity(&xy, 1.0).unwrap(), 1.0, 1e-12, "F = 1");
        assert_close(
            gme_threshold(&Strategy::equator_plus_z(optimal_pz_equator_plus_z()).unwrap()).unwrap(),
            0.5 + 1.0 / (4.0 + PI * PI).sqrt(),
            1e-9,
            "pole-mixture threshold",
        );
        assert_close(
            gme_threshold(&Strategy::polygon(3).unwrap()).unwrap(),
            5.0 / 6.0,
            1e-12,
            "triangle threshold",
        );

        let (lo, hi) = xi_bounds(&proto(ProtocolName::Xyz).strategy().unwrap(), 0.0).unwrap();
        assert_close(lo, 1.0 / 3.0, 1e-10, "xyz lower");
        assert_close(hi, 1.0 / 3f64.sqrt(), 1e-10, "xyz upper (saturated)");
        let (lo, hi) = xi_bounds(&xy, 0.0).unwrap();
        assert_close(lo, 0.5, 1e-10, "xy lower");
        assert_close(hi, 0.70710678118654752, 1e-10, "xy upper (saturated)");
        let (lo, hi) = xi_bounds(&xy, 1.0).unwrap();
        assert_close(lo, 1.0, 1e-12, "C=1 lower");
        assert_close(hi, 1.0, 1e-12, "C=1 upper");
    }

    #[test]
    fn higher_dim_reduction_examples() {
        let xyz = proto(ProtocolName::Xyz).strategy().unwrap();
        // Bell state embedded in the first two levels of a qutrit: equality
        // at C = 1, so the inequality holds.
        let mut amps = vec![Complex64::new(0.0, 0.0); 6];
        amps[0] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        amps[3] = Complex64::new(1.0 / 2f64.sqrt(), 0.0); // |1⟩⊗|1⟩ at index 1*2+1
        let psi = PureState::new(amps).unwrap();
        assert!(higher_dim_reduction_check(&psi, 3, 2, &xyz).unwrap());

        // State living entirely in the third level: projected mass 0.
        let mut amps = vec![Complex64::new(0.0, 0.0); 6];
        amps[4] = Complex64::new(1.0, 0.0); // |2⟩⊗|0⟩
        let psi = PureState::new(amps).unwrap();
        assert!(higher_dim_reduction_check(&psi, 3, 2, &xyz).unwrap());
        let rho = psi.to_density();
        assert_close(
            gamma_of_state(&rho, 3, 2, &xyz, &QuadSpec::default()).unwrap(),
            0.0,
            1e-12,
            "leaked state has guessing value 0",
        );
    }

    #[test]
    fn g_value_dispatch() {
        // Exact kinds any C; pole mixtures at C = 0; oracle elsewhere.
        assert_eq!(
            g_value(&Strategy::isotropic(), 0.7).unwrap().method,
            Method::ClosedForm
        );
        assert_eq!(
            g_value(&Strategy::polygon(3).unwrap(), 0.7).unwrap().method,
            Method::ClosedForm
        );
        assert_eq!(
            g_value(&Strategy::polygon(7).unwrap(), 0.0).unwrap().method,
            Method::ClosedForm
        );
        assert_eq!(
            g_value(&Strategy::polygon(7).unwrap(), 0.5).unwrap().method,
            Method::Oracle,
            "conjectures are not used for thresholds"
        );
        assert_eq!(
            g_value(&Strategy::equator_plus_z(0.3).unwrap(), 0.0)
                .unwrap()
                .method,
            Method::ClosedForm
        );
        let xy = proto(ProtocolName::Xy).strategy().unwrap();
        assert_eq!(g_value(&xy, 0.0).unwrap().method, Method::ClosedForm);
        assert_close(
            g_value(&xy, 0.0).unwrap().value,
            0.70710678118654752,
            1e-12,
            "discrete C=0 via enumeration",
        );
        // Rejections.
        assert!(g_value(&xy, 1.5).is_err());
        assert!(g_value(&xy, -0.1).is_err());
    }
}
