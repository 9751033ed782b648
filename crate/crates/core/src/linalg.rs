//! Dense complex linear algebra for small multipartite Hilbert spaces.
//!
//! Operators are plain `nalgebra` matrices over `Complex64`. Multipartite
//! operators carry their subsystem dimensions alongside; the first entry of a
//! `dims` slice is the most significant factor of the Kronecker index, so an
//! operator on `dims = [2, 3]` has basis `|a⟩⊗|b⟩ ↦ 3a + b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute tolerance for Hermiticity, trace and positivity checks.
pub const INVARIANT_TOL: f64 = 1e-10;
/// Residual tolerance for eigendecompositions.
pub const EIG_TOL: f64 = 1e-8;

/// Tolerances used when validating states and operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub invariant: f64,
    pub eig_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { invariant: INVARIANT_TOL, eig_residual: EIG_TOL }
    }
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

/// `(σx, σy, σz)`.
pub fn paulis() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// `|i⟩⟨j|` in dimension `d`.
pub fn ket_bra(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = cr(1.0);
    m
}

/// Rectangular `|i⟩⟨j|` from a `cols`-dimensional space into a `rows`-dimensional one.
pub fn ket_bra_rect(rows: usize, cols: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    m[(i, j)] = cr(1.0);
    m
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_all<'a>(ops: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    ops.into_iter()
        .fold(CMatrix::from_element(1, 1, cr(1.0)), |acc, m| acc.kronecker(m))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

fn checked_total(dims: &[usize], n: usize, what: &str) -> Result<()> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != n {
        return Err(Error::Dimension(format!(
            "{what}: dims {dims:?} do not describe a space of dimension {n}"
        )));
    }
    Ok(())
}

/// Row-major strides of a multi-index over `dims`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Index map for reordering subsystems: entry `i` is the position of old basis
/// index `i` once subsystem `perm[k]` becomes the new subsystem `k`.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::Dimension(format!("{perm:?} is not a permutation of {n} subsystems")));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let old_strides = strides(dims);
    let new_strides = strides(&new_dims);
    let total: usize = dims.iter().product();
    let map = (0..total)
        .map(|i| {
            perm.iter()
                .enumerate()
                .map(|(k, &p)| ((i / old_strides[p]) % dims[p]) * new_strides[k])
                .sum()
        })
        .collect();
    Ok((map, new_dims))
}

/// Reorders the subsystems of a square operator. New subsystem `k` is old
/// subsystem `perm[k]`. Returns the reordered operator and its dims.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<(CMatrix, Vec<usize>)> {
    checked_total(dims, m.nrows(), "permute_subsystems")?;
    if !m.is_square() {
        return Err(Error::Dimension("permute_subsystems expects a square operator".into()));
    }
    let (map, new_dims) = permutation_map(dims, perm)?;
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok((out, new_dims))
}

pub fn permute_vector(v: &CVector, dims: &[usize], perm: &[usize]) -> Result<(CVector, Vec<usize>)> {
    checked_total(dims, v.len(), "permute_vector")?;
    let (map, new_dims) = permutation_map(dims, perm)?;
    let mut out = CVector::zeros(v.len());
    for (i, &t) in map.iter().enumerate() {
        out[t] = v[i];
    }
    Ok((out, new_dims))
}

/// Partial trace keeping the subsystems listed in `keep` (in their original order).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    checked_total(dims, m.nrows(), "partial_trace")?;
    if keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!(
            "keep set {keep:?} invalid for {} subsystems",
            dims.len()
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let s = strides(dims);
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let ks = strides(&kept_dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let ts = strides(&traced_dims);
    let n = m.nrows();
    let split: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let kept = keep_sorted
                .iter()
                .enumerate()
                .map(|(q, &k)| ((i / s[k]) % dims[k]) * ks[q])
                .sum();
            let tr = traced
                .iter()
                .enumerate()
                .map(|(q, &k)| ((i / s[k]) % dims[k]) * ts[q])
                .sum();
            (kept, tr)
        })
        .collect();
    let d: usize = kept_dims.iter().product();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..n {
        let (ki, ti) = split[i];
        for j in 0..n {
            let (kj, tj) = split[j];
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// `Tr₂[x (I ⊗ y)]` for `x` on `d1 ⊗ d2` and `y` on `d2`.
pub fn contract_second(x: &CMatrix, d1: usize, d2: usize, y: &CMatrix) -> CMatrix {
    debug_assert_eq!(x.nrows(), d1 * d2);
    debug_assert_eq!(y.nrows(), d2);
    let mut out = CMatrix::zeros(d1, d1);
    for i in 0..d1 {
        for j in 0..d1 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d2 {
                for l in 0..d2 {
                    acc += x[(i * d2 + k, j * d2 + l)] * y[(l, k)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `Tr₁[x (y ⊗ I)]` for `x` on `d1 ⊗ d2` and `y` on `d1`.
pub fn contract_first(x: &CMatrix, d1: usize, d2: usize, y: &CMatrix) -> CMatrix {
    debug_assert_eq!(x.nrows(), d1 * d2);
    debug_assert_eq!(y.nrows(), d1);
    let mut out = CMatrix::zeros(d2, d2);
    for i in 0..d2 {
        for j in 0..d2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d1 {
                for l in 0..d1 {
                    acc += x[(k * d2 + i, l * d2 + j)] * y[(l, k)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Partial transpose of the subsystem `target`.
pub fn partial_transpose(m: &CMatrix, dims: &[usize], target: usize) -> Result<CMatrix> {
    checked_total(dims, m.nrows(), "partial_transpose")?;
    if target >= dims.len() {
        return Err(Error::Dimension(format!("subsystem {target} out of range")));
    }
    let s = strides(dims)[target];
    let d = dims[target];
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let di = (i / s) % d;
        for j in 0..n {
            let dj = (j / s) % d;
            let ii = i - di * s + dj * s;
            let jj = j - dj * s + di * s;
            out[(ii, jj)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are sorted in
/// descending order; columns of `vectors` are the matching orthonormal
/// eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn top(&self) -> (f64, CVector) {
        (self.values[0], self.vectors.column(0).into_owned())
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut d = CMatrix::zeros(n, n);
        for (i, &v) in self.values.iter().enumerate() {
            d[(i, i)] = cr(v);
        }
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    hermitian_eig_tol(m, INVARIANT_TOL)
}

pub fn hermitian_eig_tol(m: &CMatrix, tol: f64) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Contract("eigendecomposition of a non-square matrix".into()));
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if !is_hermitian(m, tol * scale) {
        return Err(Error::Contract("eigendecomposition input is not Hermitian".into()));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    // stable sort keeps the solver order inside degenerate clusters
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>(),
    );
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.values)
}

/// Deterministic generator used for every stochastic routine in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-random unit vector of dimension `n`.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| random_complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-300 {
            return v.unscale(norm);
        }
    }
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| random_complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { cr(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix drawn from the Gaussian unitary ensemble.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| random_complex_gaussian(rng));
    hermitian_part(&g)
}

/// Random density matrix `G G† / tr(G G†)` (Hilbert–Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| random_complex_gaussian(rng));
    let m = &g * g.adjoint();
    let t = m.trace();
    hermitian_part(&m.unscale(t.re))
}

/// Density matrix with explicit subsystem structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at [`INVARIANT_TOL`].
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(dims, matrix, INVARIANT_TOL)
    }

    pub fn with_tolerance(dims: Vec<usize>, matrix: CMatrix, tol: f64) -> Result<Self> {
        checked_total(&dims, matrix.nrows(), "DensityMatrix")?;
        if !is_hermitian(&matrix, tol) {
            return Err(Error::Contract("density matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::Contract(format!("density matrix trace is {tr}")));
        }
        let min = hermitian_eigenvalues(&matrix)?.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::Contract(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(Self { dims, matrix })
    }

    /// Builds without validation; for outputs of operations that preserve
    /// the invariants by construction.
    pub(crate) fn from_parts(dims: Vec<usize>, matrix: CMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        Self { dims, matrix }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self { dims, matrix: identity(d).unscale(d as f64) }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        Self { dims, matrix: self.matrix.kronecker(&other.matrix) }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, &self.dims, keep)?;
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        let dims = keep_sorted.iter().map(|&k| self.dims[k]).collect();
        Ok(Self { dims, matrix: m })
    }

    pub fn permute(&self, perm: &[usize]) -> Result<DensityMatrix> {
        let (matrix, dims) = permute_subsystems(&self.matrix, &self.dims, perm)?;
        Ok(Self { dims, matrix })
    }

    /// Convex mixture `(1-w) self + w other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!("mixing {:?} with {:?}", self.dims, other.dims)));
        }
        Ok(Self {
            dims: self.dims.clone(),
            matrix: self.matrix.scale(1.0 - w) + other.matrix.scale(w),
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        // Hermitian by invariant
        hermitian_eigenvalues(&self.matrix).expect("density matrix is Hermitian")
    }

    /// Checks the three state invariants at `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let tr = self.matrix.trace();
        is_hermitian(&self.matrix, tol)
            && (tr.re - 1.0).abs() <= tol
            && tr.im.abs() <= tol
            && self.eigenvalues().last().is_some_and(|&e| e >= -tol)
    }
}

/// Normalized pure state with subsystem structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        checked_total(&dims, amplitudes.len(), "PureState")?;
        let norm = amplitudes.norm();
        if (norm * norm - 1.0).abs() > INVARIANT_TOL {
            return Err(Error::Contract(format!("state has squared norm {}", norm * norm)));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn normalized(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::Contract("cannot normalize the zero vector".into()));
        }
        Self::new(dims, amplitudes.unscale(norm))
    }

    pub(crate) fn from_parts(dims: Vec<usize>, amplitudes: CVector) -> Self {
        Self { dims, amplitudes }
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![cr(a), cr(0.0), cr(0.0), cr(a)]);
        Self { dims: vec![2, 2], amplitudes: v }
    }

    /// Maximally entangled state on `d ⊗ d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = CVector::zeros(d * d);
        let a = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            v[i * d + i] = cr(a);
        }
        Self { dims: vec![d, d], amplitudes: v }
    }

    /// Haar-random pure state, reproducible for a fixed seed.
    pub fn random(dims: Vec<usize>, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        Self::random_with(dims, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<Self> {
        let n: usize = dims.iter().product();
        checked_total(&dims, n, "random_pure_state")?;
        Ok(Self { amplitudes: random_unit_vector(n, rng), dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { dims: self.dims.clone(), matrix: projector(&self.amplitudes) }
    }

    pub fn permute(&self, perm: &[usize]) -> Result<PureState> {
        let (amplitudes, dims) = permute_vector(&self.amplitudes, &self.dims, perm)?;
        Ok(Self { dims, amplitudes })
    }
}

/// Convenience wrapper matching the free-function style of the other helpers.
pub fn random_pure_state(dims: &[usize], seed: u64) -> Result<PureState> {
    PureState::random(dims.to_vec(), seed)
}

/// Swap operator on `d ⊗ d`.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = cr(1.0);
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(v.len(), v.iter().map(|&x| cr(x))))
    }

    #[test]
    fn tensor_of_identities_and_paulis() {
        assert_eq!(tensor_product(&identity(2), &identity(2)), identity(4));
        assert_eq!(tensor_product(&pauli_z(), &pauli_z()), diag(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn xx_stabilizes_phi_plus() {
        let xx = tensor_product(&pauli_x(), &pauli_x());
        let phi = PureState::phi_plus();
        let out = &xx * phi.amplitudes();
        assert!((out - phi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = PureState::phi_plus().density();
        let a = rho.partial_trace(&[0]).unwrap();
        assert!(approx_eq(a.matrix(), &identity(2).unscale(2.0), 1e-15));

        let lam: f64 = 0.7;
        let psi = CVector::from_vec(vec![cr(lam.sqrt()), cr(0.0), cr(0.0), cr((1.0 - lam).sqrt())]);
        let rho = PureState::new(vec![2, 2], psi).unwrap().density();
        let a = rho.partial_trace(&[0]).unwrap();
        assert!(approx_eq(a.matrix(), &diag(&[0.7, 0.3]), 1e-14));
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        let rho = PureState::phi_plus().density();
        assert!(matches!(rho.partial_trace(&[2]), Err(Error::Dimension(_))));
        assert!(matches!(rho.partial_trace(&[]), Err(Error::Dimension(_))));
    }

    #[test]
    fn partial_trace_of_product_three_parties() {
        let mut rng = seeded_rng(3);
        let a = random_density(2, &mut rng);
        let b = random_density(3, &mut rng);
        let cc = random_density(2, &mut rng);
        let abc = tensor_all([&a, &b, &cc]);
        let kept = partial_trace(&abc, &[2, 3, 2], &[0, 2]).unwrap();
        assert!(approx_eq(&kept, &tensor_product(&a, &cc), 1e-12));
        let kept = partial_trace(&abc, &[2, 3, 2], &[1]).unwrap();
        assert!(approx_eq(&kept, &b, 1e-12));
    }

    #[test]
    fn eig_of_paulis() {
        let e = hermitian_eig(&pauli_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!((e.vectors[(0, 0)].norm() - 1.0).abs() < 1e-15);
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] + 1.0).abs() < 1e-15);
        let v = e.vectors.column(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].norm() - s).abs() < 1e-14 && (v[0] - v[1]).norm() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        assert!(matches!(hermitian_eig(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn eig_reconstructs_random_16() {
        let mut rng = seeded_rng(11);
        let h = random_hermitian(16, &mut rng);
        let e = hermitian_eig(&h).unwrap();
        assert!(max_abs_diff(&e.reconstruct(), &h) < 1e-8);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let vv = e.vectors.adjoint() * &e.vectors;
        assert!(max_abs_diff(&vv, &identity(16)) < 1e-8);
        let sum: f64 = e.values.iter().sum();
        assert!((sum - h.trace().re).abs() < 1e-8);
    }

    #[test]
    fn random_state_normalized_and_deterministic() {
        let a = random_pure_state(&[2], 42).unwrap();
        assert!((a.amplitudes().norm() - 1.0).abs() < 1e-12);
        let b = random_pure_state(&[2], 42).unwrap();
        assert_eq!(a, b);
        let c = random_pure_state(&[2], 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = seeded_rng(5);
        let u = random_unitary(6, &mut rng);
        assert!(max_abs_diff(&(u.adjoint() * &u), &identity(6)) < 1e-12);
    }

    #[test]
    fn permute_swaps_product() {
        let mut rng = seeded_rng(9);
        let a = random_density(2, &mut rng);
        let b = random_density(3, &mut rng);
        let (ba, dims) = permute_subsystems(&tensor_product(&a, &b), &[2, 3], &[1, 0]).unwrap();
        assert_eq!(dims, vec![3, 2]);
        assert!(approx_eq(&ba, &tensor_product(&b, &a), 1e-15));
        assert!(permute_subsystems(&ba, &[3, 2], &[0, 0]).is_err());
    }

    #[test]
    fn swap_operator_matches_permutation() {
        let mut rng = seeded_rng(10);
        let m = random_density(9, &mut rng);
        let f = swap_operator(3);
        let (p, _) = permute_subsystems(&m, &[3, 3], &[1, 0]).unwrap();
        assert!(approx_eq(&(&f * &m * &f), &p, 1e-14));
    }

    #[test]
    fn contractions_match_partial_traces() {
        let mut rng = seeded_rng(12);
        let x = random_hermitian(6, &mut rng);
        let y2 = random_hermitian(3, &mut rng);
        let y1 = random_hermitian(2, &mut rng);
        let direct2 = partial_trace(&(&x * tensor_product(&identity(2), &y2)), &[2, 3], &[0]).unwrap();
        assert!(approx_eq(&contract_second(&x, 2, 3, &y2), &direct2, 1e-12));
        let direct1 = partial_trace(&(&x * tensor_product(&y1, &identity(3))), &[2, 3], &[1]).unwrap();
        assert!(approx_eq(&contract_first(&x, 2, 3, &y1), &direct1, 1e-12));
    }

    #[test]
    fn partial_transpose_of_phi_plus_is_swap_over_two() {
        let rho = PureState::phi_plus().density();
        let pt = partial_transpose(rho.matrix(), &[2, 2], 1).unwrap();
        assert!(approx_eq(&pt, &swap_operator(2).unscale(2.0), 1e-15));
    }

    #[test]
    fn density_validation() {
        let bad = identity(2);
        assert!(DensityMatrix::new(vec![2], bad).is_err());
        let ok = DensityMatrix::new(vec![2], identity(2).unscale(2.0)).unwrap();
        assert!(ok.is_valid(1e-12));
        let neg = diag(&[1.5, -0.5]);
        assert!(DensityMatrix::new(vec![2], neg).is_err());
    }
}
