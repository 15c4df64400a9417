//! Measurement strategies: probability distributions over Bloch-sphere
//! directions, the named protocol catalog, second-moment (verification)
//! matrices, sampling, and center-symmetric doubling.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{eigvalsh, ComplexMatrix};

/// Unit-norm tolerance for Bloch vectors.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Tolerance on the total probability mass of a strategy.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Atoms closer than this angular distance are treated as the same
/// direction and merged.
pub const ATOM_MERGE_ANGLE: f64 = 1e-9;

/// Golden ratio, used by the icosahedral/dodecahedral vertex catalogs.
pub const GOLDEN_RATIO: f64 = 1.618033988749894848204586834365638118;

// ---------------------------------------------------------------------------
// Bloch vectors.
// ---------------------------------------------------------------------------

/// A unit vector on the Bloch sphere. Serialized as the array `[x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    /// Validates unit norm (to [`UNIT_NORM_TOL`]) and stores an exactly
    /// renormalized copy.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::invalid(format!(
                "Bloch vector ({x}, {y}, {z}) has norm {norm}, expected 1"
            )));
        }
        // Components already unit to rounding are kept bit-identical, so
        // serialization round-trips exactly.
        if (norm - 1.0).abs() <= 1e-12 {
            return Ok(BlochVector { x, y, z });
        }
        Ok(BlochVector {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Normalizes an arbitrary nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::invalid(
                "cannot normalize a zero or non-finite vector onto the Bloch sphere",
            ));
        }
        // Snap exact-zero noise (e.g. cos(π/2) ≈ 6e-17) so catalog vectors
        // come out bit-clean.
        let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
        Ok(BlochVector {
            x: snap(x / norm),
            y: snap(y / norm),
            z: snap(z / norm),
        })
    }

    /// Equatorial direction at azimuth φ: (cos φ, sin φ, 0).
    pub fn equatorial(phi: f64) -> Self {
        BlochVector::normalized(phi.cos(), phi.sin(), 0.0).unwrap()
    }

    pub fn x_axis() -> Self {
        BlochVector {
            x: 1.0,
            y: 0.0,
            z: 0.0,
        }
    }

    pub fn y_axis() -> Self {
        BlochVector {
            x: 0.0,
            y: 1.0,
            z: 0.0,
        }
    }

    pub fn z_axis() -> Self {
        BlochVector {
            x: 0.0,
            y: 0.0,
            z: 1.0,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn neg(&self) -> BlochVector {
        BlochVector {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Angle between two unit vectors, in [0, π].
    pub fn angle_to(&self, other: &BlochVector) -> f64 {
        // atan2(‖a×b‖, a·b) stays accurate near 0 and π, where acos of the
        // dot product loses half the significant digits.
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        let cross = (cx * cx + cy * cy + cz * cz).sqrt();
        cross.atan2(self.dot(other))
    }

    /// Rotation about a unit `axis` by `angle` (Rodrigues formula).
    pub fn rotated(&self, axis: &BlochVector, angle: f64) -> BlochVector {
        let (s, c) = angle.sin_cos();
        let k = axis;
        let dot = k.dot(self);
        let cross = [
            k.y * self.z - k.z * self.y,
            k.z * self.x - k.x * self.z,
            k.x * self.y - k.y * self.x,
        ];
        BlochVector::normalized(
            self.x * c + cross[0] * s + k.x * dot * (1.0 - c),
            self.y * c + cross[1] * s + k.y * dot * (1.0 - c),
            self.z * c + cross[2] * s + k.z * dot * (1.0 - c),
        )
        .expect("rotation preserves the norm")
    }

    /// True when the vector lies in the z = 0 plane (to `tol`).
    pub fn is_equatorial(&self, tol: f64) -> bool {
        self.z.abs() <= tol
    }

    /// Azimuthal angle in [0, 2π).
    pub fn azimuth(&self) -> f64 {
        let phi = self.y.atan2(self.x);
        if phi < 0.0 {
            phi + 2.0 * PI
        } else {
            phi
        }
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        BlochVector::new(v[0], v[1], v[2])
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(v: BlochVector) -> [f64; 3] {
        v.as_array()
    }
}

/// One weighted direction of a discrete strategy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub r: BlochVector,
    pub w: f64,
}

// ---------------------------------------------------------------------------
// Strategies.
// ---------------------------------------------------------------------------

/// The supported strategy families. Parametric kinds carry their defining
/// parameters; the atoms of any discrete part are materialized on the
/// [`Strategy`] itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrategyKind {
    /// Finitely many weighted directions.
    Discrete,
    /// Uniform distribution over the whole sphere.
    Isotropic,
    /// Uniform distribution over the equator z = 0.
    Equator,
    /// Mixture: the z pole with probability `p_z`, else uniform equator.
    EquatorPlusZ { p_z: f64 },
    /// M equatorial vertices at azimuths 2(j−1)π/M, uniform weights.
    Polygon { m: usize },
    /// Mixture: the z pole with probability `p_z`, else Polygon(M).
    PolygonPlusZ { m: usize, p_z: f64 },
}

/// A probability distribution over Bloch directions.
///
/// `atoms` holds the discrete part (all the mass for `Discrete`, `Polygon`,
/// and `PolygonPlusZ`; the pole atom for `EquatorPlusZ`); any remaining mass
/// is the continuous part implied by the kind, reachable through
/// [`Strategy::equator_weight`] and [`Strategy::sphere_weight`].
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    kind: StrategyKind,
    atoms: Vec<Atom>,
}

impl Strategy {
    /// Discrete strategy from weighted directions. Weights must be positive
    /// and sum to 1 (to [`WEIGHT_SUM_TOL`]); near-duplicate directions are
    /// merged.
    pub fn discrete(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("discrete strategy needs at least one atom"));
        }
        if atoms.iter().any(|a| !a.w.is_finite() || a.w <= 0.0) {
            return Err(Error::invalid("atom weights must be positive and finite"));
        }
        let total: f64 = atoms.iter().map(|a| a.w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!(
                "atom weights sum to {total}, expected 1"
            )));
        }
        Ok(Strategy {
            kind: StrategyKind::Discrete,
            atoms: merge_atoms(atoms),
        })
    }

    /// Uniform distribution over the sphere.
    pub fn isotropic() -> Self {
        Strategy {
            kind: StrategyKind::Isotropic,
            atoms: Vec::new(),
        }
    }

    /// Uniform distribution over the equator.
    pub fn equator() -> Self {
        Strategy {
            kind: StrategyKind::Equator,
            atoms: Vec::new(),
        }
    }

    /// z pole with probability `p_z`, uniform equator otherwise.
    pub fn equator_plus_z(p_z: f64) -> Result<Self> {
        check_probability(p_z, "p_z")?;
        let atoms = if p_z > 0.0 {
            vec![Atom {
                r: BlochVector::z_axis(),
                w: p_z,
            }]
        } else {
            Vec::new()
        };
        Ok(Strategy {
            kind: StrategyKind::EquatorPlusZ { p_z },
            atoms,
        })
    }

    /// Regular M-gon on the equator, vertices at azimuths 2(j−1)π/M.
    pub fn polygon(m: usize) -> Result<Self> {
        check_polygon_order(m)?;
        Ok(Strategy {
            kind: StrategyKind::Polygon { m },
            atoms: polygon_atoms(m, 1.0),
        })
    }

    /// z pole with probability `p_z`, Polygon(M) otherwise.
    pub fn polygon_plus_z(m: usize, p_z: f64) -> Result<Self> {
        check_polygon_order(m)?;
        check_probability(p_z, "p_z")?;
        let mut atoms = polygon_atoms(m, 1.0 - p_z);
        if p_z > 0.0 {
            atoms.push(Atom {
                r: BlochVector::z_axis(),
                w: p_z,
            });
        }
        Ok(Strategy {
            kind: StrategyKind::PolygonPlusZ { m, p_z },
            atoms,
        })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Probability mass on the continuous uniform-equator part.
    pub fn equator_weight(&self) -> f64 {
        match self.kind {
            StrategyKind::Equator => 1.0,
            StrategyKind::EquatorPlusZ { p_z } => 1.0 - p_z,
            _ => 0.0,
        }
    }

    /// Probability mass on the continuous uniform-sphere part.
    pub fn sphere_weight(&self) -> f64 {
        match self.kind {
            StrategyKind::Isotropic => 1.0,
            _ => 0.0,
        }
    }

    /// True when all probability mass sits on finitely many atoms.
    pub fn is_discrete_support(&self) -> bool {
        self.equator_weight() == 0.0 && self.sphere_weight() == 0.0
    }

    /// Second moment Ξ = ∫dμ(r) r rᵀ.
    ///
    /// Continuous parts enter in closed form: the uniform sphere contributes
    /// 𝕀/3 and the uniform equator diag(1/2, 1/2, 0).
    pub fn verification_matrix(&self) -> VerificationMatrix {
        let mut xi = [[0.0f64; 3]; 3];
        for atom in &self.atoms {
            let r = atom.r.as_array();
            for i in 0..3 {
                for j in 0..3 {
                    xi[i][j] += atom.w * r[i] * r[j];
                }
            }
        }
        let weq = self.equator_weight();
        if weq > 0.0 {
            xi[0][0] += weq * 0.5;
            xi[1][1] += weq * 0.5;
        }
        let wsp = self.sphere_weight();
        if wsp > 0.0 {
            for (i, row) in xi.iter_mut().enumerate() {
                row[i] += wsp / 3.0;
            }
        }
        VerificationMatrix { xi }
    }

    /// Draws one direction distributed as μ from the caller-owned stream.
    pub fn sample_direction(&self, rng: &mut impl Rng) -> BlochVector {
        self.sample_direction_indexed(rng).0
    }

    /// Like [`Self::sample_direction`], also reporting the atom index when
    /// the draw landed on discrete mass (callers cache per-atom work).
    pub fn sample_direction_indexed(&self, rng: &mut impl Rng) -> (BlochVector, Option<usize>) {
        // Atoms first (they carry all mass for discrete kinds and the pole
        // mass for EquatorPlusZ), then the continuous remainder.
        let atom_mass: f64 = self.atoms.iter().map(|a| a.w).sum();
        let u: f64 = rng.gen();
        if u < atom_mass {
            let mut acc = 0.0;
            for (i, atom) in self.atoms.iter().enumerate() {
                acc += atom.w;
                if u < acc {
                    return (atom.r, Some(i));
                }
            }
            let last = self.atoms.len() - 1;
            return (self.atoms[last].r, Some(last));
        }
        match self.kind {
            StrategyKind::Isotropic => {
                let z = 1.0 - 2.0 * rng.gen::<f64>();
                let phi = 2.0 * PI * rng.gen::<f64>();
                let s = (1.0 - z * z).max(0.0).sqrt();
                let v = BlochVector::normalized(s * phi.cos(), s * phi.sin(), z)
                    .expect("sphere sample is unit");
                (v, None)
            }
            StrategyKind::Equator | StrategyKind::EquatorPlusZ { .. } => {
                (BlochVector::equatorial(2.0 * PI * rng.gen::<f64>()), None)
            }
            _ => {
                let last = self.atoms.len() - 1;
                (self.atoms[last].r, Some(last))
            }
        }
    }

    /// Center-symmetric doubling: each atom (r, w) becomes the pair
    /// (r, w/2), (−r, w/2), and coincident directions are merged. Antipodal
    /// atoms describe the same measurement with relabeled outcomes, so the
    /// result has identical guessing probabilities.
    pub fn symmetrize(&self) -> Result<Strategy> {
        if !self.is_discrete_support() {
            return Err(Error::invalid(
                "only discrete strategies can be symmetrized (continuous parts are handled in closed form)",
            ));
        }
        let mut doubled = Vec::with_capacity(2 * self.atoms.len());
        for atom in &self.atoms {
            doubled.push(Atom {
                r: atom.r,
                w: atom.w / 2.0,
            });
            doubled.push(Atom {
                r: atom.r.neg(),
                w: atom.w / 2.0,
            });
        }
        Ok(Strategy {
            kind: StrategyKind::Discrete,
            atoms: merge_atoms(doubled),
        })
    }

    /// FNV-1a hash (hex) of the canonical JSON form; identifies the strategy
    /// in simulation records.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("strategy serialization is infallible");
        format!("{:016x}", fnv1a64(json.as_bytes()))
    }
}

/// 64-bit FNV-1a hash.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::invalid(format!("{name} = {p} must lie in [0, 1]")));
    }
    Ok(())
}

fn check_polygon_order(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::invalid(format!("polygon order M = {m} must be ≥ 3")));
    }
    Ok(())
}

fn polygon_atoms(m: usize, total_weight: f64) -> Vec<Atom> {
    if total_weight <= 0.0 {
        return Vec::new();
    }
    let w = total_weight / m as f64;
    (0..m)
        .map(|j| Atom {
            r: BlochVector::equatorial(2.0 * PI * j as f64 / m as f64),
            w,
        })
        .collect()
}

/// Merges atoms whose directions are within [`ATOM_MERGE_ANGLE`]; keeps the
/// first-seen direction and sums weights. Order is preserved, so the result
/// is deterministic.
fn merge_atoms(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for atom in atoms {
        if let Some(existing) = merged
            .iter_mut()
            .find(|e| e.r.angle_to(&atom.r) <= ATOM_MERGE_ANGLE)
        {
            existing.w += atom.w;
        } else {
            merged.push(atom);
        }
    }
    merged
}

// ---------------------------------------------------------------------------
// Serde: {"kind": "...", "params": {...}, "atoms": [...]}.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct StrategyRepr {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ParamsRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<Atom>>,
}

#[derive(Serialize, Deserialize, Default)]
struct ParamsRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_z: Option<f64>,
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self.kind {
            StrategyKind::Discrete => StrategyRepr {
                kind: "Discrete".into(),
                params: None,
                atoms: Some(self.atoms.clone()),
            },
            StrategyKind::Isotropic => StrategyRepr {
                kind: "Isotropic".into(),
                params: None,
                atoms: None,
            },
            StrategyKind::Equator => StrategyRepr {
                kind: "Equator".into(),
                params: None,
                atoms: None,
            },
            StrategyKind::EquatorPlusZ { p_z } => StrategyRepr {
                kind: "EquatorPlusZ".into(),
                params: Some(ParamsRepr {
                    m: None,
                    p_z: Some(p_z),
                }),
                atoms: None,
            },
            StrategyKind::Polygon { m } => StrategyRepr {
                kind: "Polygon".into(),
                params: Some(ParamsRepr {
                    m: Some(m),
                    p_z: None,
                }),
                atoms: None,
            },
            StrategyKind::PolygonPlusZ { m, p_z } => StrategyRepr {
                kind: "PolygonPlusZ".into(),
                params: Some(ParamsRepr {
                    m: Some(m),
                    p_z: Some(p_z),
                }),
                atoms: None,
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = StrategyRepr::deserialize(d)?;
        let params = repr.params.unwrap_or_default();
        let need_m = || {
            params
                .m
                .ok_or_else(|| D::Error::custom("polygon kinds require params.m"))
        };
        let need_pz = |kind: &str| {
            params
                .p_z
                .ok_or_else(|| D::Error::custom(format!("{kind} requires params.p_z")))
        };
        let built = match repr.kind.as_str() {
            "Discrete" => {
                let atoms = repr
                    .atoms
                    .ok_or_else(|| D::Error::custom("Discrete strategy requires atoms"))?;
                Strategy::discrete(atoms)
            }
            "Isotropic" => Ok(Strategy::isotropic()),
            "Equator" => Ok(Strategy::equator()),
            "EquatorPlusZ" => Strategy::equator_plus_z(need_pz("EquatorPlusZ")?),
            "Polygon" => Strategy::polygon(need_m()?),
            "PolygonPlusZ" => Strategy::polygon_plus_z(need_m()?, need_pz("PolygonPlusZ")?),
            other => Err(Error::invalid(format!("unknown strategy kind {other:?}"))),
        };
        built.map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Verification matrix.
// ---------------------------------------------------------------------------

/// The 3×3 second-moment matrix Ξ of a strategy: symmetric, positive
/// semidefinite, unit trace, operator norm ≥ 1/3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationMatrix {
    pub xi: [[f64; 3]; 3],
}

impl VerificationMatrix {
    pub fn trace(&self) -> f64 {
        self.xi[0][0] + self.xi[1][1] + self.xi[2][2]
    }

    /// Largest eigenvalue (= operator norm on a PSD matrix).
    pub fn operator_norm(&self) -> f64 {
        let m =
            ComplexMatrix::from_fn(3, 3, |r, c| num_complex::Complex64::new(self.xi[r][c], 0.0));
        let vals = eigvalsh(&m).expect("Ξ is symmetric by construction");
        vals[2]
    }

    pub fn max_abs_diff(&self, other: &VerificationMatrix) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.xi[i][j] - other.xi[i][j]).abs());
            }
        }
        d
    }
}

// ---------------------------------------------------------------------------
// Named protocols.
// ---------------------------------------------------------------------------

/// The named verification protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolName {
    Xy,
    Xyz,
    Isotropic,
    Equator,
    Polygon,
    EquatorPlusZ,
    PolygonPlusZ,
    Tetrahedron,
    Octahedron,
    Cube,
    Icosahedron,
    Dodecahedron,
    /// The balanced equator+pole mixture with p_z fixed to 1/3.
    EquatorPlusZTwo,
    /// Two settings separated by azimuth α with weights (p1, 1−p1).
    TwoSetting,
}

impl ProtocolName {
    pub const ALL: [ProtocolName; 14] = [
        ProtocolName::Xy,
        ProtocolName::Xyz,
        ProtocolName::Isotropic,
        ProtocolName::Equator,
        ProtocolName::Polygon,
        ProtocolName::EquatorPlusZ,
        ProtocolName::PolygonPlusZ,
        ProtocolName::Tetrahedron,
        ProtocolName::Octahedron,
        ProtocolName::Cube,
        ProtocolName::Icosahedron,
        ProtocolName::Dodecahedron,
        ProtocolName::EquatorPlusZTwo,
        ProtocolName::TwoSetting,
    ];

    /// Kebab-case identifier used by the CLI and serialization.
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolName::Xy => "xy",
            ProtocolName::Xyz => "xyz",
            ProtocolName::Isotropic => "isotropic",
            ProtocolName::Equator => "equator",
            ProtocolName::Polygon => "polygon",
            ProtocolName::EquatorPlusZ => "equator-plus-z",
            ProtocolName::PolygonPlusZ => "polygon-plus-z",
            ProtocolName::Tetrahedron => "tetrahedron",
            ProtocolName::Octahedron => "octahedron",
            ProtocolName::Cube => "cube",
            ProtocolName::Icosahedron => "icosahedron",
            ProtocolName::Dodecahedron => "dodecahedron",
            ProtocolName::EquatorPlusZTwo => "equator-plus-z-ii",
            ProtocolName::TwoSetting => "two-setting",
        }
    }
}

impl std::fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProtocolName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProtocolName::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown protocol {s:?}; expected one of {}",
                    ProtocolName::ALL.map(|p| p.as_str()).join(", ")
                ))
            })
    }
}

/// Optional parameters for the parametric protocol families.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Polygon order M (Polygon, PolygonPlusZ).
    pub m: Option<usize>,
    /// Pole probability (EquatorPlusZ, PolygonPlusZ); defaults to the
    /// optimum at C = 0 when omitted.
    pub p_z: Option<f64>,
    /// Azimuthal separation of the two settings (TwoSetting).
    pub alpha: Option<f64>,
    /// Weight of the first setting (TwoSetting); defaults to 1/2.
    pub p1: Option<f64>,
}

/// A named protocol together with its parameters; the carrier of closed-form
/// knowledge in the guessing module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub name: ProtocolName,
    pub params: ProtocolParams,
}

impl Protocol {
    pub fn new(name: ProtocolName) -> Self {
        Protocol {
            name,
            params: ProtocolParams::default(),
        }
    }

    pub fn with_params(name: ProtocolName, params: ProtocolParams) -> Self {
        Protocol { name, params }
    }

    /// Materializes the measurement distribution.
    pub fn strategy(&self) -> Result<Strategy> {
        make_named(self.name, &self.params)
    }

    /// Effective parameters after defaulting (pole probabilities to their
    /// C = 0 optimum, p1 to 1/2).
    pub fn resolved_params(&self) -> Result<ProtocolParams> {
        let mut p = self.params;
        match self.name {
            ProtocolName::EquatorPlusZ => {
                p.p_z = Some(
                    p.p_z
                        .unwrap_or_else(crate::guessing::optimal_pz_equator_plus_z),
                );
            }
            ProtocolName::EquatorPlusZTwo => {
                p.p_z = Some(1.0 / 3.0);
            }
            ProtocolName::PolygonPlusZ => {
                let m =
                    p.m.ok_or_else(|| Error::invalid("polygon-plus-z requires the order M"))?;
                check_polygon_order(m)?;
                p.p_z = Some(match p.p_z {
                    Some(v) => v,
                    None => crate::guessing::optimal_pz_polygon_plus_z(m)?,
                });
            }
            ProtocolName::Polygon => {
                check_polygon_order(
                    p.m.ok_or_else(|| Error::invalid("polygon requires the order M"))?,
                )?;
            }
            ProtocolName::TwoSetting => {
                if p.alpha.is_none() {
                    return Err(Error::invalid(
                        "two-setting requires the separation angle alpha",
                    ));
                }
                p.p1 = Some(p.p1.unwrap_or(0.5));
            }
            _ => {}
        }
        Ok(p)
    }
}

/// Builds the measurement distribution of a named protocol.
///
/// Platonic-solid protocols weight their vertex directions uniformly;
/// XY uses the two Pauli axes x, y with weights 1/2, XYZ the three axes
/// with weights 1/3. Missing pole probabilities default to the C = 0
/// optimum of the family.
pub fn make_named(name: ProtocolName, params: &ProtocolParams) -> Result<Strategy> {
    let resolved = Protocol::with_params(name, *params).resolved_params()?;
    match name {
        ProtocolName::Xy => Strategy::discrete(vec![
            Atom {
                r: BlochVector::x_axis(),
                w: 0.5,
            },
            Atom {
                r: BlochVector::y_axis(),
                w: 0.5,
            },
        ]),
        ProtocolName::Xyz => Strategy::discrete(
            [
                BlochVector::x_axis(),
                BlochVector::y_axis(),
                BlochVector::z_axis(),
            ]
            .iter()
            .map(|&r| Atom { r, w: 1.0 / 3.0 })
            .collect(),
        ),
        ProtocolName::Isotropic => Ok(Strategy::isotropic()),
        ProtocolName::Equator => Ok(Strategy::equator()),
        ProtocolName::Polygon => Strategy::polygon(resolved.m.expect("validated")),
        ProtocolName::EquatorPlusZ | ProtocolName::EquatorPlusZTwo => {
            Strategy::equator_plus_z(resolved.p_z.expect("validated"))
        }
        ProtocolName::PolygonPlusZ => Strategy::polygon_plus_z(
            resolved.m.expect("validated"),
            resolved.p_z.expect("validated"),
        ),
        ProtocolName::Tetrahedron => {
            let s = 1.0 / 3f64.sqrt();
            let dirs = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
            Strategy::discrete(
                dirs.iter()
                    .map(|d| Atom {
                        r: BlochVector::normalized(d[0], d[1], d[2]).unwrap(),
                        w: 0.25,
                    })
                    .collect(),
            )
        }
        ProtocolName::Octahedron => {
            let mut atoms = Vec::new();
            for axis in [
                BlochVector::x_axis(),
                BlochVector::y_axis(),
                BlochVector::z_axis(),
            ] {
                atoms.push(Atom {
                    r: axis,
                    w: 1.0 / 6.0,
                });
                atoms.push(Atom {
                    r: axis.neg(),
                    w: 1.0 / 6.0,
                });
            }
            Strategy::discrete(atoms)
        }
        ProtocolName::Cube => {
            let s = 1.0 / 3f64.sqrt();
            let mut atoms = Vec::new();
            for &sx in &[1.0, -1.0] {
                for &sy in &[1.0, -1.0] {
                    for &sz in &[1.0, -1.0] {
                        atoms.push(Atom {
                            r: BlochVector::normalized(sx * s, sy * s, sz * s).unwrap(),
                            w: 0.125,
                        });
                    }
                }
            }
            Strategy::discrete(atoms)
        }
        ProtocolName::Icosahedron => {
            // Vertices (0, ±1, ±τ) and cyclic permutations, normalized.
            let t = GOLDEN_RATIO;
            let mut atoms = Vec::new();
            for &s1 in &[1.0, -1.0] {
                for &s2 in &[1.0, -1.0] {
                    for perm in [[0.0, s1, s2 * t], [s1, s2 * t, 0.0], [s2 * t, 0.0, s1]] {
                        atoms.push(Atom {
                            r: BlochVector::normalized(perm[0], perm[1], perm[2]).unwrap(),
                            w: 1.0 / 12.0,
                        });
                    }
                }
            }
            Strategy::discrete(atoms)
        }
        ProtocolName::Dodecahedron => {
            // Vertices (±1, ±1, ±1) plus (0, ±1/τ, ±τ) and cyclic
            // permutations, normalized.
            let t = GOLDEN_RATIO;
            let mut atoms = Vec::new();
            for &sx in &[1.0, -1.0] {
                for &sy in &[1.0, -1.0] {
                    for &sz in &[1.0, -1.0] {
                        atoms.push(Atom {
                            r: BlochVector::normalized(sx, sy, sz).unwrap(),
                            w: 1.0 / 20.0,
                        });
                    }
                }
            }
            for &s1 in &[1.0, -1.0] {
                for &s2 in &[1.0, -1.0] {
                    for perm in [
                        [0.0, s1 / t, s2 * t],
                        [s1 / t, s2 * t, 0.0],
                        [s2 * t, 0.0, s1 / t],
                    ] {
                        atoms.push(Atom {
                            r: BlochVector::normalized(perm[0], perm[1], perm[2]).unwrap(),
                            w: 1.0 / 20.0,
                        });
                    }
                }
            }
            Strategy::discrete(atoms)
        }
        ProtocolName::TwoSetting => {
            let alpha = resolved.alpha.expect("validated");
            let p1 = resolved.p1.expect("validated");
            check_probability(p1, "p1")?;
            let mut atoms = Vec::new();
            if p1 > 0.0 {
                atoms.push(Atom {
                    r: BlochVector::x_axis(),
                    w: p1,
                });
            }
            if p1 < 1.0 {
                atoms.push(Atom {
                    r: BlochVector::equatorial(alpha),
                    w: 1.0 - p1,
                });
            }
            Strategy::discrete(atoms)
        }
    }
}
