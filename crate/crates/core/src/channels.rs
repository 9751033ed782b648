//! Qubit channel families, Kraus-form application and the Bloch affine picture.
//!
//! The erasure channel maps a qubit into a qutrit whose basis is ordered
//! `(|0⟩, |1⟩, |e⟩)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cr, hermitian_eigenvalues, identity, is_hermitian, ket_bra, ket_bra_rect, max_abs_diff,
    partial_transpose, paulis, CMatrix, DensityMatrix,
};

/// Kraus completeness tolerance.
pub const TP_TOL: f64 = 1e-10;
/// Floor on Choi eigenvalues for complete positivity and PPT checks.
pub const CHOI_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    Depolarizing,
    AmplitudeDamping,
    Loss,
    Erasure,
}

impl ChannelFamily {
    pub const ALL: [ChannelFamily; 4] = [
        ChannelFamily::Depolarizing,
        ChannelFamily::AmplitudeDamping,
        ChannelFamily::Loss,
        ChannelFamily::Erasure,
    ];

    /// Short tag used by the `family:p` text format.
    pub fn tag(self) -> &'static str {
        match self {
            ChannelFamily::Depolarizing => "dep",
            ChannelFamily::AmplitudeDamping => "ad",
            ChannelFamily::Loss => "loss",
            ChannelFamily::Erasure => "er",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "dep" => Ok(ChannelFamily::Depolarizing),
            "ad" => Ok(ChannelFamily::AmplitudeDamping),
            "loss" => Ok(ChannelFamily::Loss),
            "er" => Ok(ChannelFamily::Erasure),
            other => Err(Error::Parse(format!(
                "unknown channel family `{other}` (expected dep, ad, loss or er)"
            ))),
        }
    }

    pub fn output_dim(self) -> usize {
        match self {
            ChannelFamily::Erasure => 3,
            _ => 2,
        }
    }
}

/// A channel family together with its transmission parameter `p ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParam {
    pub family: ChannelFamily,
    pub p: f64,
}

impl ChannelParam {
    pub fn new(family: ChannelFamily, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self { family, p })
    }

    pub fn build(&self) -> Result<KrausChannel> {
        let mut ch = match self.family {
            ChannelFamily::Depolarizing => make_depolarizing(self.p),
            ChannelFamily::AmplitudeDamping => make_amplitude_damping(self.p),
            ChannelFamily::Loss => make_loss(self.p),
            ChannelFamily::Erasure => make_erasure(self.p),
        }?;
        ch.param = Some(*self);
        Ok(ch)
    }
}

impl fmt::Display for ChannelParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family.tag(), self.p)
    }
}

impl FromStr for ChannelParam {
    type Err = Error;

    /// Parses `family:p`, e.g. `ad:0.5` or `dep:0.7071`.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, p) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("`{s}` is not of the form family:p")))?;
        let family = ChannelFamily::from_tag(tag.trim())?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("`{p}` is not a decimal number")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parse(format!("p = {p} outside [0, 1]")));
        }
        Ok(Self { family, p })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("channel parameter p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Completely positive trace-preserving map in Kraus form; every operator is
/// `out_dim × in_dim`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus_ops: Vec<CMatrix>,
    label: String,
    param: Option<ChannelParam>,
}

impl KrausChannel {
    /// Validates shapes and trace preservation.
    pub fn new(kraus_ops: Vec<CMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = kraus_ops
            .first()
            .ok_or_else(|| Error::Parameter("a channel needs at least one Kraus operator".into()))?;
        let (out_dim, in_dim) = first.shape();
        if kraus_ops.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::Dimension("Kraus operators have mixed shapes".into()));
        }
        let ch = Self { in_dim, out_dim, kraus_ops, label: label.into(), param: None };
        let dev = max_abs_diff(&ch.completeness(), &identity(in_dim));
        if dev > TP_TOL {
            return Err(Error::Contract(format!(
                "Kraus operators are not trace preserving (deviation {dev:.3e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            in_dim: d,
            out_dim: d,
            kraus_ops: vec![identity(d)],
            label: "id".into(),
            param: None,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn param(&self) -> Option<ChannelParam> {
        self.param
    }

    /// `Σ_k E_k† E_k`.
    pub fn completeness(&self) -> CMatrix {
        self.kraus_ops
            .iter()
            .fold(CMatrix::zeros(self.in_dim, self.in_dim), |acc, k| acc + k.adjoint() * k)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        max_abs_diff(&self.completeness(), &identity(self.in_dim)) <= tol
    }

    /// Unnormalized Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` on `in ⊗ out`.
    pub fn choi(&self) -> CMatrix {
        let d = self.in_dim;
        let mut out = CMatrix::zeros(d * self.out_dim, d * self.out_dim);
        for i in 0..d {
            for j in 0..d {
                let block = self.apply_matrix(&ket_bra(d, i, j));
                out.view_mut((i * self.out_dim, j * self.out_dim), (self.out_dim, self.out_dim))
                    .copy_from(&block);
            }
        }
        out
    }

    pub fn is_completely_positive(&self) -> bool {
        hermitian_eigenvalues(&self.choi())
            .map(|ev| ev.last().is_some_and(|&e| e >= CHOI_FLOOR))
            .unwrap_or(false)
    }

    /// Channels are equal when their Choi matrices agree.
    pub fn approx_eq(&self, other: &KrausChannel, tol: f64) -> bool {
        self.in_dim == other.in_dim
            && self.out_dim == other.out_dim
            && max_abs_diff(&self.choi(), &other.choi()) <= tol
    }

    /// `E(x) = Σ E_k x E_k†` on a bare operator.
    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        self.kraus_ops
            .iter()
            .fold(CMatrix::zeros(self.out_dim, self.out_dim), |acc, k| acc + k * x * k.adjoint())
    }

    /// `E†(y) = Σ E_k† y E_k` on a bare operator.
    pub fn adjoint_matrix(&self, y: &CMatrix) -> CMatrix {
        self.kraus_ops
            .iter()
            .fold(CMatrix::zeros(self.in_dim, self.in_dim), |acc, k| acc + k.adjoint() * y * k)
    }

    /// Parallel composition `self ⊗ other`.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let kraus_ops = self
            .kraus_ops
            .iter()
            .flat_map(|a| other.kraus_ops.iter().map(move |b| a.kronecker(b)))
            .collect();
        KrausChannel {
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
            kraus_ops,
            label: format!("{}⊗{}", self.label, other.label),
            param: None,
        }
    }

    /// Applies the channel to subsystem `target` of `rho`; the output replaces
    /// that subsystem's dimension with `out_dim`.
    pub fn apply(&self, rho: &DensityMatrix, target: usize) -> Result<DensityMatrix> {
        let (m, dims) = self.apply_on(rho.matrix(), rho.dims(), target)?;
        Ok(DensityMatrix::from_parts(dims, m))
    }

    pub(crate) fn apply_on(
        &self,
        m: &CMatrix,
        dims: &[usize],
        target: usize,
    ) -> Result<(CMatrix, Vec<usize>)> {
        let (left, right) = split_around(dims, target, self.in_dim, m.nrows())?;
        let lifted = self.lifted_ops(left, right);
        let n = left * self.out_dim * right;
        let out = lifted
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, k| acc + k * m * k.adjoint());
        let mut new_dims = dims.to_vec();
        new_dims[target] = self.out_dim;
        Ok((out, new_dims))
    }

    /// Heisenberg-picture action on subsystem `target` of an observable whose
    /// subsystem dims are `dims` (output side). Returns the operator on the
    /// input side.
    pub fn adjoint_apply(&self, obs: &CMatrix, dims: &[usize], target: usize) -> Result<CMatrix> {
        if !is_hermitian(obs, 1e-9 * obs.iter().map(|z| z.norm()).fold(1.0, f64::max)) {
            return Err(Error::Contract("adjoint_apply expects a Hermitian observable".into()));
        }
        Ok(self.adjoint_apply_on(obs, dims, target)?.0)
    }

    pub(crate) fn adjoint_apply_on(
        &self,
        obs: &CMatrix,
        dims: &[usize],
        target: usize,
    ) -> Result<(CMatrix, Vec<usize>)> {
        let (left, right) = split_around(dims, target, self.out_dim, obs.nrows())?;
        let lifted = self.lifted_ops(left, right);
        let n = left * self.in_dim * right;
        let out = lifted
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, k| acc + k.adjoint() * obs * k);
        let mut new_dims = dims.to_vec();
        new_dims[target] = self.in_dim;
        Ok((out, new_dims))
    }

    fn lifted_ops(&self, left: usize, right: usize) -> Vec<CMatrix> {
        if left == 1 && right == 1 {
            return self.kraus_ops.clone();
        }
        let il = identity(left);
        let ir = identity(right);
        self.kraus_ops.iter().map(|k| il.kronecker(k).kronecker(&ir)).collect()
    }

    /// Bloch-picture representation of a qubit-to-qubit channel.
    pub fn affine_rep(&self) -> Result<AffineRep> {
        if self.in_dim != 2 || self.out_dim != 2 {
            return Err(Error::Dimension(format!(
                "affine representation needs a qubit channel, got {}→{}",
                self.in_dim, self.out_dim
            )));
        }
        let s = paulis();
        let e_id = self.apply_matrix(&identity(2));
        let mut t = Vector3::zeros();
        let mut lambda = Matrix3::zeros();
        for i in 0..3 {
            t[i] = 0.5 * (&s[i] * &e_id).trace().re;
            for j in 0..3 {
                lambda[(i, j)] = 0.5 * (&s[i] * self.apply_matrix(&s[j])).trace().re;
            }
        }
        Ok(AffineRep { t, lambda })
    }

    /// `E(I/d) = I/d` at [`crate::linalg::INVARIANT_TOL`].
    pub fn is_unital(&self) -> Result<bool> {
        if self.in_dim != self.out_dim {
            return Err(Error::Dimension("unitality needs a square channel".into()));
        }
        let d = self.in_dim as f64;
        let mixed = identity(self.in_dim).unscale(d);
        Ok(max_abs_diff(&self.apply_matrix(&mixed), &mixed) <= crate::linalg::INVARIANT_TOL)
    }

    /// PPT test of the Choi matrix, which decides entanglement breaking for
    /// qubit channels.
    pub fn is_entanglement_breaking_qubit(&self) -> Result<bool> {
        if self.in_dim != 2 || self.out_dim != 2 {
            return Err(Error::Dimension("entanglement-breaking test needs a qubit channel".into()));
        }
        let pt = partial_transpose(&self.choi(), &[2, 2], 1)?;
        let min = hermitian_eigenvalues(&pt)?.last().copied().unwrap_or(0.0);
        Ok(min >= CHOI_FLOOR)
    }
}

fn split_around(dims: &[usize], target: usize, expect: usize, n: usize) -> Result<(usize, usize)> {
    if target >= dims.len() {
        return Err(Error::Dimension(format!("subsystem {target} out of range for {dims:?}")));
    }
    if dims[target] != expect {
        return Err(Error::Dimension(format!(
            "subsystem {target} has dimension {} but the channel acts on {expect}",
            dims[target]
        )));
    }
    if dims.iter().product::<usize>() != n {
        return Err(Error::Dimension(format!("dims {dims:?} do not match operator size {n}")));
    }
    let left = dims[..target].iter().product();
    let right = dims[target + 1..].iter().product();
    Ok((left, right))
}

/// Bloch-vector action `v ↦ t + Λ v` of a qubit channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineRep {
    pub t: Vector3<f64>,
    pub lambda: Matrix3<f64>,
}

impl AffineRep {
    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.t + self.lambda * v
    }

    /// Singular values of `Λ`, descending.
    pub fn singular_values(&self) -> [f64; 3] {
        let sv = self.lambda.singular_values();
        let mut s = [sv[0], sv[1], sv[2]];
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// Qubit density matrix `(I + v·σ)/2`.
pub fn bloch_to_density(v: &Vector3<f64>) -> CMatrix {
    let s = paulis();
    let mut m = identity(2);
    for i in 0..3 {
        m += s[i].scale(v[i]);
    }
    m.unscale(2.0)
}

/// Bloch vector of a qubit operator.
pub fn density_to_bloch(m: &CMatrix) -> Vector3<f64> {
    let s = paulis();
    Vector3::from_fn(|i, _| (&s[i] * m).trace().re)
}

/// Depolarizing channel `ρ ↦ pρ + (1-p) I/2`.
pub fn make_depolarizing(p: f64) -> Result<KrausChannel> {
    check_p(p)?;
    let [x, y, z] = paulis();
    let a = ((1.0 + 3.0 * p) / 4.0).sqrt();
    let b = ((1.0 - p) / 4.0).sqrt();
    let mut ch = KrausChannel::new(
        vec![identity(2).scale(a), x.scale(b), y.scale(b), z.scale(b)],
        format!("dep:{p}"),
    )?;
    ch.param = Some(ChannelParam { family: ChannelFamily::Depolarizing, p });
    Ok(ch)
}

/// Amplitude damping with transmission `p`: `|1⟩` survives with probability `p`.
pub fn make_amplitude_damping(p: f64) -> Result<KrausChannel> {
    check_p(p)?;
    let e1 = ket_bra(2, 0, 0) + ket_bra(2, 1, 1).scale(p.sqrt());
    let e2 = ket_bra(2, 0, 1).scale((1.0 - p).sqrt());
    let mut ch = KrausChannel::new(vec![e1, e2], format!("ad:{p}"))?;
    ch.param = Some(ChannelParam { family: ChannelFamily::AmplitudeDamping, p });
    Ok(ch)
}

/// Loss channel `ρ ↦ pρ + (1-p) tr(ρ) |0⟩⟨0|`.
pub fn make_loss(p: f64) -> Result<KrausChannel> {
    check_p(p)?;
    let q = (1.0 - p).sqrt();
    let mut ch = KrausChannel::new(
        vec![identity(2).scale(p.sqrt()), ket_bra(2, 0, 0).scale(q), ket_bra(2, 0, 1).scale(q)],
        format!("loss:{p}"),
    )?;
    ch.param = Some(ChannelParam { family: ChannelFamily::Loss, p });
    Ok(ch)
}

/// Erasure channel into `(|0⟩, |1⟩, |e⟩)`: `ρ ↦ pρ ⊕ (1-p) tr(ρ) |e⟩⟨e|`.
pub fn make_erasure(p: f64) -> Result<KrausChannel> {
    check_p(p)?;
    let mut embed = ket_bra_rect(3, 2, 0, 0) + ket_bra_rect(3, 2, 1, 1);
    embed *= cr(p.sqrt());
    let q = (1.0 - p).sqrt();
    let mut ch = KrausChannel::new(
        vec![embed, ket_bra_rect(3, 2, 2, 0).scale(q), ket_bra_rect(3, 2, 2, 1).scale(q)],
        format!("er:{p}"),
    )?;
    ch.param = Some(ChannelParam { family: ChannelFamily::Erasure, p });
    Ok(ch)
}
