//! Bell operators, CHSH values and the analytic CHSH-breaking criteria.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use nalgebra::{Matrix3, Vector3};

use crate::channels::{AffineRep, ChannelFamily, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    cr, hermitian_part, identity, is_hermitian, max_abs_diff, paulis, tensor_product,
    trace_of_product, CMatrix, DensityMatrix, INVARIANT_TOL,
};

/// Tsirelson's bound `2√2`.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;
/// The local (CHSH) bound.
pub const LOCAL_BOUND: f64 = 2.0;
/// Imaginary part of `tr(Bρ)` above which the value is rejected.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-6;
/// Slack on `s₁² + s₂² ≤ 1` in the unital criterion.
const UNITAL_CRITERION_TOL: f64 = 1e-12;

/// Hermitian observable with spectrum in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicObservable {
    matrix: CMatrix,
}

impl DichotomicObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !is_hermitian(&matrix, INVARIANT_TOL) {
            return Err(Error::Contract("observable is not Hermitian".into()));
        }
        let d = matrix.nrows();
        if max_abs_diff(&(&matrix * &matrix), &identity(d)) > 1e-8 {
            return Err(Error::Contract("observable does not square to the identity".into()));
        }
        Ok(Self { matrix: hermitian_part(&matrix) })
    }

    pub(crate) fn from_parts(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: identity(d) }
    }

    /// `n·σ` for a unit vector `n`.
    pub fn from_bloch(n: &Vector3<f64>) -> Result<Self> {
        let len = n.norm();
        if (len - 1.0).abs() > 1e-10 {
            return Err(Error::Parameter(format!("Bloch direction has length {len}")));
        }
        let s = paulis();
        let m = s[0].scale(n[0]) + s[1].scale(n[1]) + s[2].scale(n[2]);
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Conjugation `U M U†` by a unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self { matrix: hermitian_part(&(u * &self.matrix * u.adjoint())) }
    }
}

/// `B = M₁⊗(N₁+N₂) + M₂⊗(N₁−N₂)` on `d_A ⊗ d_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellOperator {
    dims: (usize, usize),
    matrix: CMatrix,
}

impl BellOperator {
    pub fn new(
        m1: &DichotomicObservable,
        m2: &DichotomicObservable,
        n1: &DichotomicObservable,
        n2: &DichotomicObservable,
    ) -> Result<Self> {
        if m1.dim() != m2.dim() || n1.dim() != n2.dim() {
            return Err(Error::Dimension(format!(
                "observables disagree on local dimension ({}, {}; {}, {})",
                m1.dim(),
                m2.dim(),
                n1.dim(),
                n2.dim()
            )));
        }
        let sum = n1.matrix() + n2.matrix();
        let diff = n1.matrix() - n2.matrix();
        let matrix = tensor_product(m1.matrix(), &sum) + tensor_product(m2.matrix(), &diff);
        Ok(Self { dims: (m1.dim(), n1.dim()), matrix })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `tr(B ρ)` on a state ordered Alice-then-Bob.
    pub fn chsh_value(&self, rho: &DensityMatrix) -> Result<f64> {
        self.value_of(rho.matrix())
    }

    pub(crate) fn value_of(&self, rho: &CMatrix) -> Result<f64> {
        if rho.nrows() != self.matrix.nrows() {
            return Err(Error::Dimension(format!(
                "Bell operator on {}x{} cannot act on a state of dimension {}",
                self.dims.0,
                self.dims.1,
                rho.nrows()
            )));
        }
        let v = trace_of_product(&self.matrix, rho);
        if v.im.abs() > IMAG_RESIDUE_LIMIT {
            return Err(Error::NumericalIntegrity(format!(
                "CHSH value has imaginary residue {:.3e}",
                v.im
            )));
        }
        Ok(v.re)
    }
}

pub fn bell_operator(
    m1: &DichotomicObservable,
    m2: &DichotomicObservable,
    n1: &DichotomicObservable,
    n2: &DichotomicObservable,
) -> Result<BellOperator> {
    BellOperator::new(m1, m2, n1, n2)
}

pub fn chsh_value(b: &BellOperator, rho: &DensityMatrix) -> Result<f64> {
    b.chsh_value(rho)
}

/// `T_ij = tr(ρ σ_i ⊗ σ_j)` of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrix(pub Matrix3<f64>);

impl CorrelationMatrix {
    /// Eigenvalues of `TᵀT`, descending.
    pub fn gram_eigenvalues(&self) -> [f64; 3] {
        let g = self.0.transpose() * self.0;
        let ev = g.symmetric_eigenvalues();
        let mut v = [ev[0], ev[1], ev[2]];
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!(
            "expected a two-qubit state, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

pub fn correlation_matrix(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    require_two_qubit(rho)?;
    let s = paulis();
    let mut t = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            t[(i, j)] = trace_of_product(&tensor_product(&s[i], &s[j]), rho.matrix()).re;
        }
    }
    Ok(CorrelationMatrix(t))
}

/// Largest CHSH value over traceless qubit observables: `2√(t₁+t₂)` with
/// `t₁ ≥ t₂` the top eigenvalues of `TᵀT`.
pub fn horodecki_value(rho: &DensityMatrix) -> Result<f64> {
    let ev = correlation_matrix(rho)?.gram_eigenvalues();
    Ok(2.0 * (ev[0] + ev[1]).max(0.0).sqrt())
}

/// Qubit observables attaining [`horodecki_value`], as `(M₁, M₂, N₁, N₂)`.
pub fn horodecki_settings(
    rho: &DensityMatrix,
) -> Result<[DichotomicObservable; 4]> {
    let t = correlation_matrix(rho)?.0;
    let eig = (t.transpose() * t).symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let c1: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned();
    let c2: Vector3<f64> = eig.eigenvectors.column(order[1]).into_owned();
    let t1 = eig.eigenvalues[order[0]].max(0.0);
    let t2 = eig.eigenvalues[order[1]].max(0.0);
    let theta = t2.sqrt().atan2(t1.sqrt());
    let b1 = c1 * theta.cos() + c2 * theta.sin();
    let b2 = c1 * theta.cos() - c2 * theta.sin();
    let direction = |v: Vector3<f64>, fallback: &Vector3<f64>| {
        let n = v.norm();
        if n > 1e-12 { v / n } else { *fallback }
    };
    let a1 = direction(t * c1, &Vector3::z());
    let a2 = direction(t * c2, &Vector3::x());
    Ok([
        DichotomicObservable::from_bloch(&a1)?,
        DichotomicObservable::from_bloch(&a2)?,
        DichotomicObservable::from_bloch(&b1)?,
        DichotomicObservable::from_bloch(&b2)?,
    ])
}

/// `s₁² + s₂² ≤ 1` for the two largest singular values of `Λ`.
pub fn unital_is_chsh_breaking(ar: &AffineRep) -> Result<bool> {
    if ar.t.norm() > INVARIANT_TOL {
        return Err(Error::Contract(format!(
            "unital criterion applied to a channel with shift |t| = {:.3e}",
            ar.t.norm()
        )));
    }
    let s = ar.singular_values();
    Ok(s[0] * s[0] + s[1] * s[1] <= 1.0 + UNITAL_CRITERION_TOL)
}

/// Maximum CHSH value reachable through a unital qubit channel, attained on
/// a maximally entangled input.
pub fn max_chsh_unital(ch: &KrausChannel) -> Result<f64> {
    if !ch.is_unital()? {
        return Err(Error::Contract(format!("channel {} is not unital", ch.label())));
    }
    let s = ch.affine_rep()?.singular_values();
    Ok(2.0 * (s[0] * s[0] + s[1] * s[1]).sqrt())
}

pub fn depolarizing_threshold() -> f64 {
    FRAC_1_SQRT_2
}

pub fn amplitude_damping_threshold() -> f64 {
    0.5
}

pub fn loss_threshold() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

pub fn erasure_threshold() -> f64 {
    0.5
}

/// Largest `p` at which the family is CHSH-breaking.
pub fn chsh_breaking_threshold(family: ChannelFamily) -> f64 {
    match family {
        ChannelFamily::Depolarizing => depolarizing_threshold(),
        ChannelFamily::AmplitudeDamping => amplitude_damping_threshold(),
        ChannelFamily::Loss => loss_threshold(),
        ChannelFamily::Erasure => erasure_threshold(),
    }
}

/// CHSH value of `√λ|00⟩ + √(1−λ)|11⟩` sent through the erasure channel with
/// the measurement family that is optimal for the non-erased branch, while the
/// erased branch answers deterministically:
/// `2p√(1+4λ(1−λ)) + 2(1−p)(2λ−1)`.
pub fn erasure_chsh_expression(p: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("p = {p} outside [0, 1]")));
    }
    if !(0.5..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("λ = {lambda} outside [1/2, 1]")));
    }
    let alpha_sq = 4.0 * lambda * (1.0 - lambda);
    Ok(2.0 * p * (1.0 + alpha_sq).sqrt() + 2.0 * (1.0 - p) * (2.0 * lambda - 1.0))
}

/// Maximizes [`erasure_chsh_expression`] over `λ ∈ [1/2, 1]` on a `1e-4` grid
/// followed by golden-section refinement. Returns `(λ*, value)`.
pub fn erasure_max_over_lambda(p: f64) -> Result<(f64, f64)> {
    let f = |l: f64| erasure_chsh_expression(p, l.clamp(0.5, 1.0));
    let steps = 5000;
    let mut best = (0.5, f(0.5)?);
    for k in 1..=steps {
        let l = 0.5 + 0.5 * k as f64 / steps as f64;
        let v = f(l)?;
        if v > best.1 {
            best = (l, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - 1e-4).max(0.5), (best.0 + 1e-4).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1)? < f(x2)? {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let mid = 0.5 * (lo + hi);
    let v = f(mid)?;
    Ok(if v > best.1 { (mid, v) } else { best })
}

/// Correlation operator `Σ T_ij σ_i⊗σ_j`.
pub fn correlation_operator(t: &Matrix3<f64>) -> CMatrix {
    let s = paulis();
    let mut out = CMatrix::zeros(4, 4);
    for i in 0..3 {
        for j in 0..3 {
            out += tensor_product(&s[i], &s[j]) * cr(t[(i, j)]);
        }
    }
    out
}
