//! Dense complex linear algebra and quantum-state primitives.
//!
//! Everything downstream (strategies, guessing probabilities, the game
//! simulator) works with small dense operators — two to a few hundred
//! dimensions — so this module favors simple row-major storage and a cyclic
//! Jacobi eigensolver over heavyweight linear-algebra dependencies.
//! All hermitian inputs are symmetrized as (M + M†)/2 before an eigensolve
//! to shed the numerical noise that accumulates in operator products.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entrywise tolerance when checking that a matrix is hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Convergence threshold for the Jacobi eigensolver (off-diagonal Frobenius
/// mass relative to the matrix scale).
pub const EIG_TOL: f64 = 1e-12;
/// Hard cap on Jacobi sweeps; convergence is cubic, so hitting this means
/// the input was not hermitian to begin with.
const MAX_JACOBI_SWEEPS: usize = 100;
/// Trace / positivity slack accepted when validating density operators.
pub const DENSITY_TOL: f64 = 1e-10;
/// Norm tolerance for state vectors.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix shape {}x{} does not match {} entries",
                rows,
                cols,
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds an n×m matrix entry by entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Convenience constructor from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let data = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> ComplexMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conjugate(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Kronecker product, `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for r in 0..self.rows {
            for c in r..self.cols {
                if (self[(r, c)] - self[(c, r)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// (M + M†)/2 — projects onto the hermitian part.
    pub fn symmetrized(&self) -> ComplexMatrix {
        assert!(self.is_square());
        ComplexMatrix::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    /// Applies `self` to a vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    /// Expectation value ⟨v|M|v⟩ of a square matrix.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Pauli matrices σ₁, σ₂, σ₃ (index 0..3).
pub fn pauli(j: usize) -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let data = match j {
        0 => vec![z, one, one, z],
        1 => vec![z, -i, i, z],
        2 => vec![one, z, z, -one],
        _ => panic!("pauli index out of range"),
    };
    ComplexMatrix::new(2, 2, data).unwrap()
}

/// 2×2 identity.
pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

/// Projector (𝕀 + s·r·σ)/2 onto the ±1 eigenspace of the qubit observable
/// r·σ, with `s = ±1` selecting the outcome.
pub fn qubit_projector(r: [f64; 3], s: f64) -> ComplexMatrix {
    let mut m = identity2();
    for (j, rj) in r.iter().enumerate() {
        m = m.add(&pauli(j).scale_re(s * rj));
    }
    m.scale_re(0.5)
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver: cyclic complex Jacobi.
// ---------------------------------------------------------------------------

/// Full eigendecomposition of a hermitian matrix.
///
/// Returns eigenvalues in ascending order and a unitary whose columns are the
/// matching eigenvectors. The input is symmetrized first; a genuinely
/// non-hermitian matrix is rejected.
///
/// The solver is a cyclic complex Jacobi iteration: each sweep annihilates
/// every off-diagonal entry once with a unitary plane rotation. Convergence
/// is quadratic-to-cubic; matrices up to a few hundred dimensions converge in
/// well under [`MAX_JACOBI_SWEEPS`] sweeps.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::invalid(
            "eigendecomposition requires a square matrix",
        ));
    }
    if !m.is_hermitian(1e-8) {
        return Err(Error::invalid(
            "eigendecomposition requires a hermitian matrix",
        ));
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = ComplexMatrix::identity(n);
    if n == 1 {
        return Ok((vec![a[(0, 0)].re], v));
    }
    let scale = a.frobenius_norm().max(1.0);

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= EIG_TOL * scale {
            let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
            pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, pairs[c].1)]);
            return Ok((values, vectors));
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let g = a[(p, q)];
                let mag = g.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                // Unitary plane rotation zeroing a_pq: with g = |g|·e^{iφ},
                // tan(2θ) = 2|g|/(a_pp − a_qq), applied as
                //   col p ← c·col p + s·e^{−iφ}·col q
                //   col q ← −s·e^{iφ}·col p + c·col q.
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = g / mag; // e^{iφ}
                let zeta = (app - aqq) / (2.0 * mag);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let sp = Complex64::new(s, 0.0) * phase.conj(); // s·e^{−iφ}
                let spc = sp.conj(); // s·e^{iφ}

                // Rows/columns p and q of A (hermitian, so update rows via
                // conjugation of the column update).
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * sp;
                    a[(k, q)] = akq * c - akp * spc;
                    a[(p, k)] = a[(k, p)].conj();
                    a[(q, k)] = a[(k, q)].conj();
                }
                let new_pp = app * c * c + aqq * s * s + 2.0 * c * s * mag;
                let new_qq = app * s * s + aqq * c * c - 2.0 * c * s * mag;
                a[(p, p)] = Complex64::new(new_pp, 0.0);
                a[(q, q)] = Complex64::new(new_qq, 0.0);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * sp;
                    v[(k, q)] = vkq * c - vkp * spc;
                }
            }
        }
    }
    Err(Error::numeric(format!(
        "Jacobi eigensolver did not converge in {MAX_JACOBI_SWEEPS} sweeps"
    )))
}

/// Eigenvalues only (ascending); same contract as [`eigh`].
pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    eigh(m).map(|(vals, _)| vals)
}

/// Sum of the absolute eigenvalues of a hermitian matrix.
///
/// For a difference of (sub-normalized) states this is the discrimination
/// bias that enters the optimal-guessing bound.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::invalid("trace norm requires a square matrix"));
    }
    if !m.is_hermitian(HERMITICITY_TOL.max(1e-8)) {
        return Err(Error::invalid("trace norm requires a hermitian matrix"));
    }
    Ok(eigvalsh(m)?.iter().map(|l| l.abs()).sum())
}

/// Hermitian square root of a positive semidefinite matrix; small negative
/// eigenvalues from rounding are clamped to zero.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = eigh(m)?;
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lam = vals[k].max(0.0).sqrt();
        if lam == 0.0 {
            continue;
        }
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += vecs[(r, k)] * vecs[(c, k)].conj() * lam;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Partial trace.
// ---------------------------------------------------------------------------

/// Traces out every subsystem not listed in `keep`.
///
/// `dims` are the factor dimensions in tensor order (first factor owns the
/// most significant index digit); `keep` is a strictly increasing list of
/// factor positions to retain. The result acts on the kept factors in their
/// original order, and the total trace is preserved.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::invalid(format!(
            "operator dimension {} does not match subsystem dims {:?}",
            m.rows(),
            dims
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::invalid(
            "kept subsystem indices must be strictly increasing and in range",
        ));
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product::<usize>().max(1);

    // Strides of each factor inside the flat index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }

    let flat = |digits_keep: usize, digits_trace: usize| -> usize {
        let mut idx = 0;
        let mut rem_k = digits_keep;
        for (pos, &k) in keep.iter().enumerate().rev() {
            let base = kept_dims[pos];
            idx += (rem_k % base) * strides[k];
            rem_k /= base;
        }
        let mut rem_t = digits_trace;
        for (pos, &t) in traced.iter().enumerate().rev() {
            let base = traced_dims[pos];
            idx += (rem_t % base) * strides[t];
            rem_t /= base;
        }
        idx
    };

    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..dt {
                acc += m[(flat(i, t), flat(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// States.
// ---------------------------------------------------------------------------

/// A validated density operator: hermitian, unit trace, positive
/// semidefinite (all to [`DENSITY_TOL`]).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("density operator must be square"));
        }
        if !matrix.is_hermitian(DENSITY_TOL) {
            return Err(Error::invalid("density operator must be hermitian"));
        }
        let matrix = matrix.symmetrized();
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::invalid(format!(
                "density operator trace {} must be 1",
                tr.re
            )));
        }
        let vals = eigvalsh(&matrix)?;
        if vals.iter().any(|&l| l < -DENSITY_TOL) {
            return Err(Error::invalid(format!(
                "density operator has negative eigenvalue {}",
                vals[0]
            )));
        }
        Ok(DensityOperator {
            dim: matrix.rows(),
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Reduced state on the kept subsystems.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<DensityOperator> {
        let m = partial_trace_matrix(&self.matrix, dims, keep)?;
        DensityOperator::new(m)
    }

    /// Uniform (maximally mixed) state.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            dim,
            matrix: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }
}

/// A unit-norm pure state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dim: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm2.sqrt() - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::invalid(format!(
                "pure state must have unit norm (got {})",
                norm2.sqrt()
            )));
        }
        Ok(PureState {
            dim: amplitudes.len(),
            amplitudes,
        })
    }

    /// Normalizes an arbitrary nonzero amplitude vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        let s = 1.0 / norm2.sqrt();
        PureState::new(amplitudes.into_iter().map(|a| a * s).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// |Φ⟩ = (|00⟩ + |11⟩)/√2 on two qubits.
    pub fn bell() -> Self {
        let r = 1.0 / 2f64.sqrt();
        PureState::new(vec![
            Complex64::new(r, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(r, 0.0),
        ])
        .unwrap()
    }

    /// (|0…0⟩ + |1…1⟩)/√2 on n qubits.
    pub fn ghz(n: usize) -> Self {
        assert!((1..=24).contains(&n), "ghz size out of range");
        let d = 1usize << n;
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        let r = 1.0 / 2f64.sqrt();
        amps[0] = Complex64::new(r, 0.0);
        amps[d - 1] = Complex64::new(r, 0.0);
        PureState::new(amps).unwrap()
    }

    /// Single-qubit state with Bloch vector `r` (+1 eigenstate of r·σ).
    pub fn from_bloch(r: [f64; 3]) -> Self {
        let theta = r[2].clamp(-1.0, 1.0).acos();
        let phi = r[1].atan2(r[0]);
        let (ht_sin, ht_cos) = (theta / 2.0).sin_cos();
        PureState::normalized(vec![
            Complex64::new(ht_cos, 0.0),
            Complex64::from_polar(ht_sin, phi),
        ])
        .unwrap()
    }

    /// Tensor product of two pure states.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim * other.dim);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        PureState {
            dim: self.dim * other.dim,
            amplitudes: amps,
        }
    }

    /// |ψ⟩⟨ψ| as a density operator.
    pub fn to_density(&self) -> DensityOperator {
        let n = self.dim;
        let m = ComplexMatrix::from_fn(n, n, |r, c| self.amplitudes[r] * self.amplitudes[c].conj());
        DensityOperator { dim: n, matrix: m }
    }
}

// ---------------------------------------------------------------------------
// Two-qubit decomposition, concurrence, reduced fidelity.
// ---------------------------------------------------------------------------

/// A two-qubit state together with its correlation data: local Bloch vectors
/// `a`, `b`, the 3×3 correlation matrix `T`, and the concurrence `C`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoQubitState {
    #[serde(skip)]
    density: Option<DensityOperator>,
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub t: [[f64; 3]; 3],
    pub c: f64,
}

impl TwoQubitState {
    pub fn density(&self) -> &DensityOperator {
        self.density
            .as_ref()
            .expect("deserialized correlation data carries no density operator")
    }

    /// Rebuilds the density matrix from (a, b, T):
    /// ρ = ¼(𝕀 + a·σ⊗𝕀 + 𝕀⊗b·σ + Σ T_jk σ_j⊗σ_k).
    pub fn reconstruct(&self) -> ComplexMatrix {
        let id = identity2();
        let mut m = id.kron(&id);
        for j in 0..3 {
            m = m.add(&pauli(j).kron(&id).scale_re(self.a[j]));
            m = m.add(&id.kron(&pauli(j)).scale_re(self.b[j]));
            for k in 0..3 {
                m = m.add(&pauli(j).kron(&pauli(k)).scale_re(self.t[j][k]));
            }
        }
        m.scale_re(0.25)
    }

    /// Singular values of T, descending (eigenvalues of √(TᵀT)).
    pub fn t_singular_values(&self) -> [f64; 3] {
        let mut tt = [[0.0; 3]; 3];
        for (i, row) in tt.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..3 {
                    *cell += self.t[k][i] * self.t[k][j];
                }
            }
        }
        let m = ComplexMatrix::from_fn(3, 3, |r, c| Complex64::new(tt[r][c], 0.0));
        let vals = eigvalsh(&m).expect("TᵀT is symmetric");
        let mut sv = [
            vals[2].max(0.0).sqrt(),
            vals[1].max(0.0).sqrt(),
            vals[0].max(0.0).sqrt(),
        ];
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        sv
    }
}

/// Expands a two-qubit density operator into Bloch form:
/// a_j = tr(ρ σ_j⊗𝕀), b_k = tr(ρ 𝕀⊗σ_k), T_jk = tr(ρ σ_j⊗σ_k),
/// plus the concurrence.
pub fn bloch_decompose(rho: &DensityOperator) -> Result<TwoQubitState> {
    if rho.dim() != 4 {
        return Err(Error::invalid(
            "Bloch decomposition needs a two-qubit state",
        ));
    }
    let id = identity2();
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    let mut t = [[0.0; 3]; 3];
    for j in 0..3 {
        a[j] = rho.matrix().mul(&pauli(j).kron(&id)).trace().re;
        b[j] = rho.matrix().mul(&id.kron(&pauli(j))).trace().re;
        for (k, cell) in t[j].iter_mut().enumerate() {
            *cell = rho.matrix().mul(&pauli(j).kron(&pauli(k))).trace().re;
        }
    }
    let c = concurrence(rho)?;
    Ok(TwoQubitState {
        density: Some(rho.clone()),
        a,
        b,
        t,
        c,
    })
}

/// Wootters concurrence of a two-qubit density operator.
///
/// Computed on an all-hermitian route: with ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y),
/// the eigenvalues of √ρ·ρ̃·√ρ are the squares of the usual λᵢ, so no
/// non-hermitian eigenproblem is ever posed. The result is clamped to [0,1]
/// because the λ-difference can land at −1e−16 for separable states.
pub fn concurrence(rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::invalid("concurrence needs a two-qubit state"));
    }
    let yy = pauli(1).kron(&pauli(1));
    let rho_tilde = yy.mul(&rho.matrix().conjugate()).mul(&yy);
    let sq = sqrt_psd(rho.matrix())?;
    let m = sq.mul(&rho_tilde).mul(&sq).symmetrized();
    let vals = eigvalsh(&m)?;
    let mut lams: Vec<f64> = vals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    lams.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok((lams[0] - lams[1] - lams[2] - lams[3]).clamp(0.0, 1.0))
}

/// Concurrence of a pure bipartite state with a qubit on the second factor,
/// √(2(1 − tr ρ_B²)); agrees with the Wootters value when both sides are
/// qubits.
pub fn concurrence_pure(psi: &PureState, d_a: usize, d_b: usize) -> Result<f64> {
    if d_a * d_b != psi.dim() || d_b != 2 {
        return Err(Error::invalid(
            "pure-state concurrence expects dims (d_a, 2) matching the state",
        ));
    }
    let rho_b = partial_trace_matrix(&psi.to_density().matrix, &[d_a, d_b], &[1])?;
    let purity = rho_b.mul(&rho_b).trace().re;
    Ok((2.0 * (1.0 - purity)).max(0.0).sqrt().clamp(0.0, 1.0))
}

/// Fidelity of a pure bipartite state with the Bell state, maximized over
/// unitaries on the second factor.
///
/// With Ψ the d_A×d_B coefficient matrix of ψ and M its first two rows,
/// the maximum is (σ₁ + σ₂)²/2 in terms of the two singular values of M.
pub fn reduced_fidelity(psi: &PureState, d_a: usize, d_b: usize) -> Result<f64> {
    if d_a * d_b != psi.dim() || d_a < 2 || d_b < 2 {
        return Err(Error::invalid(
            "reduced fidelity expects bipartition dims (≥2, ≥2) matching the state",
        ));
    }
    // Gram matrix of the first two rows of Ψ.
    let amp = psi.amplitudes();
    let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d_b {
                acc += amp[i * d_b + k] * amp[j * d_b + k].conj();
            }
            g[i][j] = acc;
        }
    }
    // Eigenvalues of the 2×2 hermitian Gram matrix, in closed form.
    let p = g[0][0].re;
    let r = g[1][1].re;
    let disc = (((p - r) / 2.0).powi(2) + g[0][1].norm_sqr()).sqrt();
    let l1 = ((p + r) / 2.0 + disc).max(0.0);
    let l2 = ((p + r) / 2.0 - disc).max(0.0);
    let nuclear = l1.sqrt() + l2.sqrt();
    Ok((nuclear * nuclear / 2.0).clamp(0.0, 1.0))
}
