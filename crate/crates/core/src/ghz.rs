//! Multiparty (GHZ) verification: party layouts, the Z/phase test family,
//! sampling strategies over tests, compatibility of local measurement
//! directions with the test family, and the reduction of the multiparty
//! game to an effective single-pair strategy.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{qubit_projector, ComplexMatrix, PureState};
use crate::strategy::{Atom, BlochVector, Strategy};

/// Angular tolerance for compatibility decisions.
const COMPAT_TOL: f64 = 1e-9;
/// Phase tests must close: Σφ ≡ 0 (mod 2π) within this tolerance.
const PHASE_CLOSURE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Party layout.
// ---------------------------------------------------------------------------

/// Split of parties 1..=n into a nonempty honest set and a nonempty
/// dishonest (colluding) set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartyLayout {
    n: usize,
    honest: Vec<usize>,
    dishonest: Vec<usize>,
}

impl PartyLayout {
    /// Builds a layout from explicit honest/dishonest sets (1-based party
    /// indices that must partition {1, …, n}).
    pub fn new(n: usize, mut honest: Vec<usize>, mut dishonest: Vec<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("party count n = {n} must be ≥ 2")));
        }
        honest.sort_unstable();
        dishonest.sort_unstable();
        if honest.is_empty() || dishonest.is_empty() {
            return Err(Error::invalid(
                "both the honest and the dishonest set must be nonempty",
            ));
        }
        let mut seen = vec![false; n + 1];
        for &j in honest.iter().chain(dishonest.iter()) {
            if j == 0 || j > n {
                return Err(Error::invalid(format!(
                    "party index {j} is outside 1..={n}"
                )));
            }
            if seen[j] {
                return Err(Error::invalid(format!(
                    "party index {j} appears more than once"
                )));
            }
            seen[j] = true;
        }
        if honest.len() + dishonest.len() != n {
            return Err(Error::invalid(format!(
                "honest ({}) and dishonest ({}) sets must partition {n} parties",
                honest.len(),
                dishonest.len()
            )));
        }
        Ok(PartyLayout {
            n,
            honest,
            dishonest,
        })
    }

    /// Layout with the given dishonest parties; everyone else is honest.
    pub fn from_dishonest(n: usize, dishonest: Vec<usize>) -> Result<Self> {
        let mut sorted = dishonest.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != dishonest.len() {
            return Err(Error::invalid("dishonest party indices must be distinct"));
        }
        let honest: Vec<usize> = (1..=n).filter(|j| !sorted.contains(j)).collect();
        PartyLayout::new(n, honest, sorted)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted 1-based indices of honest parties.
    pub fn honest(&self) -> &[usize] {
        &self.honest
    }

    /// Sorted 1-based indices of dishonest parties.
    pub fn dishonest(&self) -> &[usize] {
        &self.dishonest
    }

    pub fn is_honest(&self, party: usize) -> bool {
        self.honest.binary_search(&party).is_ok()
    }
}

// ---------------------------------------------------------------------------
// Tests and test-sampling strategies.
// ---------------------------------------------------------------------------

/// One round of the multiparty game: either everyone measures σ_z, or party
/// j measures X(φ_j) = cos φ_j σ_x + sin φ_j σ_y with phases summing to 0
/// (mod 2π).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GhzTest {
    Z,
    #[serde(rename = "phase")]
    Phase {
        phases: Vec<f64>,
    },
}

impl GhzTest {
    /// Phase test with closure validation.
    pub fn phase(phases: Vec<f64>) -> Result<GhzTest> {
        let t = GhzTest::Phase { phases };
        t.validate(None)?;
        Ok(t)
    }

    /// Checks structural invariants; `n` (when given) pins the party count.
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        match self {
            GhzTest::Z => Ok(()),
            GhzTest::Phase { phases } => {
                if phases.len() < 2 {
                    return Err(Error::invalid("a phase test needs at least two parties"));
                }
                if let Some(n) = n {
                    if phases.len() != n {
                        return Err(Error::invalid(format!(
                            "phase test carries {} phases for {n} parties",
                            phases.len()
                        )));
                    }
                }
                if !phases.iter().all(|p| p.is_finite()) {
                    return Err(Error::invalid("phases must be finite"));
                }
                let sum: f64 = phases.iter().sum();
                let rem = sum.rem_euclid(2.0 * PI);
                let dist = rem.min(2.0 * PI - rem);
                if dist > PHASE_CLOSURE_TOL * phases.len() as f64 {
                    return Err(Error::invalid(format!(
                        "phase test does not close: Σφ ≡ {rem:.3e} (mod 2π)"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Distribution of the random phases in a phase test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PhaseLaw {
    /// Free phases uniform on [0, 2π).
    ContinuousUniform,
    /// Free phases uniform on the lattice {2πk/m : k = 0..m−1}, m ≥ 3.
    DiscreteUniform { m: usize },
}

/// Test-sampling strategy of the verifier: a Z test with probability `p_z`,
/// otherwise a phase test with free phases drawn from `phase_law` and one
/// closing phase at a uniformly random party.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzStrategy {
    pub p_z: f64,
    pub phase_law: PhaseLaw,
}

impl GhzStrategy {
    pub fn new(p_z: f64, phase_law: PhaseLaw) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_z) || !p_z.is_finite() {
            return Err(Error::invalid(format!(
                "Z-test probability {p_z} must lie in [0, 1]"
            )));
        }
        if let PhaseLaw::DiscreteUniform { m } = phase_law {
            if m < 3 {
                return Err(Error::invalid(format!(
                    "discrete phase lattice needs m ≥ 3, got {m}"
                )));
            }
        }
        Ok(GhzStrategy { p_z, phase_law })
    }
}

/// Samples one test for `n` parties.
pub fn generate_test<R: Rng + ?Sized>(
    strategy: &GhzStrategy,
    n: usize,
    rng: &mut R,
) -> Result<GhzTest> {
    if n < 2 {
        return Err(Error::invalid(format!("party count n = {n} must be ≥ 2")));
    }
    if rng.gen::<f64>() < strategy.p_z {
        return Ok(GhzTest::Z);
    }
    let closing = rng.gen_range(0..n);
    let mut phases = vec![0.0f64; n];
    match strategy.phase_law {
        PhaseLaw::ContinuousUniform => {
            let mut sum = 0.0;
            for (j, phase) in phases.iter_mut().enumerate() {
                if j != closing {
                    *phase = rng.gen::<f64>() * 2.0 * PI;
                    sum += *phase;
                }
            }
            phases[closing] = (-sum).rem_euclid(2.0 * PI);
        }
        PhaseLaw::DiscreteUniform { m } => {
            // Lattice arithmetic keeps the closure exact.
            let mut ksum: u64 = 0;
            let mut ks = vec![0u64; n];
            for (j, k) in ks.iter_mut().enumerate() {
                if j != closing {
                    *k = rng.gen_range(0..m) as u64;
                    ksum += *k;
                }
            }
            ks[closing] = (m as u64 - ksum % m as u64) % m as u64;
            for (phase, k) in phases.iter_mut().zip(&ks) {
                *phase = 2.0 * PI * *k as f64 / m as f64;
            }
        }
    }
    GhzTest::phase(phases)
}

/// Whether a tuple of ±1 outcomes passes the test: a Z test needs all
/// outcomes equal, a phase test needs their product to be +1.
pub fn evaluate_test(test: &GhzTest, outcomes: &[i8]) -> Result<bool> {
    if outcomes.is_empty() {
        return Err(Error::invalid("no outcomes to evaluate"));
    }
    if !outcomes.iter().all(|&s| s == 1 || s == -1) {
        return Err(Error::invalid("outcomes must be ±1"));
    }
    match test {
        GhzTest::Z => Ok(outcomes.iter().all(|&s| s == outcomes[0])),
        GhzTest::Phase { phases } => {
            if phases.len() != outcomes.len() {
                return Err(Error::invalid(format!(
                    "{} outcomes for {} phases",
                    outcomes.len(),
                    phases.len()
                )));
            }
            let product: i64 = outcomes.iter().map(|&s| s as i64).product();
            Ok(product == 1)
        }
    }
}

// ---------------------------------------------------------------------------
// Compatibility of measurement directions with the test family.
// ---------------------------------------------------------------------------

/// Canonical sign: flip r to −r when z < 0, or z ≈ 0 and x < 0, or
/// z ≈ x ≈ 0 and y < 0 (measurement directions are sign-free).
fn canonical_sign(r: &BlochVector) -> BlochVector {
    let flip = if r.z().abs() > COMPAT_TOL {
        r.z() < 0.0
    } else if r.x().abs() > COMPAT_TOL {
        r.x() < 0.0
    } else {
        r.y() < 0.0
    };
    if flip {
        r.neg()
    } else {
        *r
    }
}

/// Structural test: after sign normalization, a direction tuple belongs to
/// the test family iff all directions are ±z, or all are equatorial with
/// azimuths summing to 0 (mod π; the residual sign flip is absorbed by
/// relabeling one party's outcomes).
pub fn is_compatible(directions: &[BlochVector]) -> bool {
    if directions.len() < 2 {
        return false;
    }
    let canon: Vec<BlochVector> = directions.iter().map(canonical_sign).collect();
    let z = BlochVector::z_axis();
    if canon.iter().all(|r| r.angle_to(&z) <= COMPAT_TOL) {
        return true;
    }
    if canon.iter().all(|r| r.is_equatorial(COMPAT_TOL)) {
        let sum: f64 = canon.iter().map(|r| r.azimuth()).sum();
        let rem = sum.rem_euclid(PI);
        let dist = rem.min(PI - rem);
        return dist <= COMPAT_TOL * 10.0 * directions.len() as f64;
    }
    false
}

/// Applies a single-qubit operator to qubit `q` (big-endian, 0-based) of an
/// n-qubit statevector.
fn apply_single_qubit(psi: &mut [num_complex::Complex64], n: usize, q: usize, m: &ComplexMatrix) {
    let stride = 1usize << (n - 1 - q);
    let dim = 1usize << n;
    let mut i = 0;
    while i < dim {
        if (i / stride).is_multiple_of(2) {
            let a = psi[i];
            let b = psi[i + stride];
            psi[i] = m[(0, 0)] * a + m[(0, 1)] * b;
            psi[i + stride] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
        i += 1;
    }
}

/// Model-based compatibility check on the n-party GHZ state (n ≤ 5).
///
/// For every party j and every outcome pattern of the other parties with
/// nonnegligible probability, the conditional state of party j must be one
/// of the two eigenprojectors of r_j·σ, and both must occur — i.e. the
/// others' outcomes determine party j's outcome through its own
/// measurement. This is the operational property [`is_compatible`] decides
/// structurally.
pub fn compatibility_oracle(directions: &[BlochVector]) -> Result<bool> {
    let n = directions.len();
    if n < 2 {
        return Err(Error::invalid("need at least two parties"));
    }
    if n > 5 {
        return Err(Error::unsupported(format!(
            "compatibility oracle enumerates 2^(n−1) patterns per party; n = {n} > 5",
        )));
    }
    let ghz = PureState::ghz(n);
    let dim = 1usize << n;
    for j in 0..n {
        let others: Vec<usize> = (0..n).filter(|&k| k != j).collect();
        let proj_j_plus = qubit_projector(directions[j].as_array(), 1.0);
        let proj_j_minus = qubit_projector(directions[j].as_array(), -1.0);
        let mut seen_plus = false;
        let mut seen_minus = false;
        for pattern in 0..(1usize << others.len()) {
            let mut psi: Vec<num_complex::Complex64> = ghz.amplitudes().to_vec();
            for (bit, &k) in others.iter().enumerate() {
                let s = if (pattern >> bit) & 1 == 0 { 1.0 } else { -1.0 };
                let proj = qubit_projector(directions[k].as_array(), s);
                apply_single_qubit(&mut psi, n, k, &proj);
            }
            // Conditional 2×2 state of party j from the projected vector.
            let stride = 1usize << (n - 1 - j);
            let mut sigma = ComplexMatrix::zeros(2, 2);
            for i in 0..dim {
                let bit_i = (i / stride) % 2;
                let base = i - bit_i * stride;
                for a in 0..2 {
                    for b in 0..2 {
                        if bit_i == a {
                            let other = base + b * stride;
                            sigma[(a, b)] += psi[i] * psi[other].conj();
                        }
                    }
                }
            }
            let p = sigma.trace().re;
            if p < 1e-12 {
                continue;
            }
            let sigma = sigma.scale_re(1.0 / p);
            if sigma.max_abs_diff(&proj_j_plus) <= COMPAT_TOL * 10.0 {
                seen_plus = true;
            } else if sigma.max_abs_diff(&proj_j_minus) <= COMPAT_TOL * 10.0 {
                seen_minus = true;
            } else {
                return Ok(false);
            }
        }
        if !(seen_plus && seen_minus) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Reduction to an effective single-pair strategy.
// ---------------------------------------------------------------------------

/// The single-pair strategy whose guessing game is equivalent to the
/// multiparty game under `strategy`: Z tests map to the pole, phase tests
/// map to equatorial directions at the honest aggregate phase, which is
/// uniform (continuous or on the polygon lattice) by construction.
pub fn effective_strategy(strategy: &GhzStrategy) -> Result<Strategy> {
    GhzStrategy::new(strategy.p_z, strategy.phase_law)?; // re-validate
    let p_z = strategy.p_z;
    match strategy.phase_law {
        PhaseLaw::ContinuousUniform => {
            if p_z == 0.0 {
                Ok(Strategy::equator())
            } else if p_z == 1.0 {
                Strategy::discrete(vec![Atom {
                    r: BlochVector::z_axis(),
                    w: 1.0,
                }])
            } else {
                Strategy::equator_plus_z(p_z)
            }
        }
        PhaseLaw::DiscreteUniform { m } => {
            if p_z == 0.0 {
                Strategy::polygon(m)
            } else if p_z == 1.0 {
                Strategy::discrete(vec![Atom {
                    r: BlochVector::z_axis(),
                    w: 1.0,
                }])
            } else {
                Strategy::polygon_plus_z(m, p_z)
            }
        }
    }
}

/// Effective equatorial direction of a phase test for the honest set:
/// r = (cos φ_H, sin φ_H, 0) with φ_H the sum of honest phases.
pub fn honest_aggregate_direction(test: &GhzTest, layout: &PartyLayout) -> Result<BlochVector> {
    match test {
        GhzTest::Z => Ok(BlochVector::z_axis()),
        GhzTest::Phase { phases } => {
            if phases.len() != layout.n() {
                return Err(Error::invalid(format!(
                    "test carries {} phases for {} parties",
                    phases.len(),
                    layout.n()
                )));
            }
            let phi: f64 = layout.honest().iter().map(|&j| phases[j - 1]).sum();
            Ok(BlochVector::equatorial(phi))
        }
    }
}
