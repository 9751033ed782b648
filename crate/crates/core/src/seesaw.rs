//! Alternating ("see-saw") maximization of the CHSH value.
//!
//! Each of the three blocks (Alice's observables, Bob's observables, the
//! input state) is optimal in closed form when the other two are held fixed:
//! observables are the sign of a reduced operator, the state is the top
//! eigenvector of the Bell operator pulled back through the channels. A round
//! updates `M → ρ → N → ρ`; when the value stalls the state is mixed with a
//! random entangled pure state and the search continues.
//!
//! All outputs are ordered Alice-then-Bob (`AA' : BB'`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::chsh::{BellOperator, DichotomicObservable, LOCAL_BOUND};
use crate::error::{Error, Result};
use crate::linalg::{
    contract_first, contract_second, cr, hermitian_eig, hermitian_eig_tol, hermitian_part,
    identity, max_abs_diff, permute_subsystems, projector, random_unitary, seeded_rng, swap_operator,
    CMatrix, CVector, DensityMatrix, PureState, SeededRng,
};

/// Eigenvalues within this distance of zero get sign `+1`.
const SIGN_ZERO_TOL: f64 = 1e-12;
/// Operator entries below this modulus are rounding residue.
pub const ENTRY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    /// Mixing weight of the perturbing state.
    pub epsilon: f64,
    /// Chance of perturbing once a stall is detected.
    pub perturb_probability: f64,
    /// Consecutive rounds with an unchanged value that count as a stall.
    pub stall_threshold: usize,
    pub value_equality_tol: f64,
    /// Round budget per restart.
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// A restart stops once its best local maximum has been reached this many times.
    pub repeat_target: usize,
    /// Stalls at most this far above the local bound 2 draw a fresh random
    /// start instead of a perturbation. Negative disables.
    pub reseed_margin: f64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            perturb_probability: 0.5,
            stall_threshold: 10,
            value_equality_tol: 1e-7,
            max_iterations: 2000,
            restarts: 20,
            seed: 0,
            repeat_target: 3,
            reseed_margin: 1e-4,
        }
    }
}

impl SeesawConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon = {} outside (0, 1)", self.epsilon)));
        }
        if !(self.perturb_probability > 0.0 && self.perturb_probability <= 1.0) {
            return Err(Error::Parameter(format!(
                "perturb_probability = {} outside (0, 1]",
                self.perturb_probability
            )));
        }
        if !self.reseed_margin.is_finite() {
            return Err(Error::Parameter("reseed_margin must be finite".into()));
        }
        if self.value_equality_tol.is_nan() || self.value_equality_tol < 0.0 {
            return Err(Error::Parameter("value_equality_tol must be nonnegative".into()));
        }
        for (name, v) in [
            ("stall_threshold", self.stall_threshold),
            ("max_iterations", self.max_iterations),
            ("restarts", self.restarts),
            ("repeat_target", self.repeat_target),
        ] {
            if v == 0 {
                return Err(Error::Parameter(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

/// What the optimizer is allowed to vary.
#[derive(Debug, Clone)]
pub enum Scenario {
    /// State held fixed on `alice ⊗ bob`; only observables move.
    FixedState { state: DensityMatrix, alice_dim: usize, bob_dim: usize },
    /// One pure input on `kept ⊗ sent`; `channel` carries the sent part to Bob.
    Joint { kept_dim: usize, channel: KrausChannel },
    /// Independent inputs `ρ₁` on `(A, X)` and `ρ₂` on `(Y, B')`; `first`
    /// maps `X → B`, `second` maps `Y → A'`.
    Product { first: KrausChannel, second: KrausChannel },
    /// As `Product` with one channel and the constraint `ρ₂ = 𝔽 ρ₁ 𝔽`.
    SymmetricProduct { channel: KrausChannel },
}

/// Inputs at the optimum.
#[derive(Debug, Clone, PartialEq)]
pub enum InputState {
    Fixed,
    Joint(DensityMatrix),
    Product(DensityMatrix, DensityMatrix),
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub best_value: f64,
    pub best_input: InputState,
    /// Output state on `AA' : BB'`, dims `[d_A, d_B]`.
    pub best_output: DensityMatrix,
    /// `(M₁, M₂, N₁, N₂)`.
    pub best_observables: [DichotomicObservable; 4],
    /// `(step, value)` for the winning restart.
    pub value_trace: Vec<(usize, f64)>,
    /// Steps of the winning restart whose value follows a perturbation.
    pub perturbation_steps: Vec<usize>,
    pub restart_index: usize,
    pub converged: bool,
    /// Best value of every restart, by index.
    pub restart_values: Vec<f64>,
}

impl SeesawResult {
    /// Recomputes `tr(B σ)` from the stored state and observables.
    pub fn recompute_value(&self) -> Result<f64> {
        let [m1, m2, n1, n2] = &self.best_observables;
        BellOperator::new(m1, m2, n1, n2)?.chsh_value(&self.best_output)
    }

    /// Checks that the trace never drops by more than `tol` between
    /// perturbation events.
    pub fn trace_is_monotone(&self, tol: f64) -> bool {
        trace_is_monotone(&self.value_trace, &self.perturbation_steps, tol)
    }
}

pub fn trace_is_monotone(trace: &[(usize, f64)], perturbations: &[usize], tol: f64) -> bool {
    trace.windows(2).all(|w| {
        let (step, v) = w[1];
        perturbations.contains(&step) || v >= w[0].1 - tol
    })
}

/// `Σ sgn(λᵢ) |eᵢ⟩⟨eᵢ|`, the dichotomic observable maximizing `tr(M F)`.
/// Returns the observable and `Σ |λᵢ|`. Entries of `f` below
/// [`ENTRY_FLOOR`] in modulus are treated as zero.
pub fn observable_from_operator(f: &CMatrix) -> Result<(DichotomicObservable, f64)> {
    let f = f.map(|z| if z.norm() < ENTRY_FLOOR { cr(0.0) } else { z });
    let eig = hermitian_eig_tol(&f, 1e-9)?;
    let n = eig.values.len();
    let mut m = CMatrix::zeros(n, n);
    let mut value = 0.0;
    for (i, &l) in eig.values.iter().enumerate() {
        let s = if l >= -SIGN_ZERO_TOL { 1.0 } else { -1.0 };
        value += l.abs();
        let v = eig.vectors.column(i);
        m += (v * v.adjoint()).scale(s);
    }
    let m = hermitian_part(&m);
    let dev = max_abs_diff(&(&m * &m), &identity(n));
    if dev > 1e-8 {
        return Err(Error::NumericalIntegrity(format!(
            "sign observable deviates from M² = I by {dev:.3e}"
        )));
    }
    Ok((DichotomicObservable::from_parts(m), value))
}

fn check_cut(sigma: &CMatrix, cut: (usize, usize)) -> Result<()> {
    if sigma.nrows() != cut.0 * cut.1 {
        return Err(Error::Dimension(format!(
            "state of dimension {} does not split as {}x{}",
            sigma.nrows(),
            cut.0,
            cut.1
        )));
    }
    Ok(())
}

/// Optimal `(M₁, M₂)` for fixed `σ` and `(N₁, N₂)`, with the resulting value.
pub fn update_observables_a(
    sigma: &DensityMatrix,
    n1: &DichotomicObservable,
    n2: &DichotomicObservable,
    cut: (usize, usize),
) -> Result<(DichotomicObservable, DichotomicObservable, f64)> {
    check_cut(sigma.matrix(), cut)?;
    if n1.dim() != cut.1 || n2.dim() != cut.1 {
        return Err(Error::Dimension("Bob's observables do not match the cut".into()));
    }
    alice_step(sigma.matrix(), cut, n1, n2)
}

/// Optimal `(N₁, N₂)` for fixed `σ` and `(M₁, M₂)`, with the resulting value.
pub fn update_observables_b(
    sigma: &DensityMatrix,
    m1: &DichotomicObservable,
    m2: &DichotomicObservable,
    cut: (usize, usize),
) -> Result<(DichotomicObservable, DichotomicObservable, f64)> {
    check_cut(sigma.matrix(), cut)?;
    if m1.dim() != cut.0 || m2.dim() != cut.0 {
        return Err(Error::Dimension("Alice's observables do not match the cut".into()));
    }
    bob_step(sigma.matrix(), cut, m1, m2)
}

fn alice_step(
    sigma: &CMatrix,
    (da, db): (usize, usize),
    n1: &DichotomicObservable,
    n2: &DichotomicObservable,
) -> Result<(DichotomicObservable, DichotomicObservable, f64)> {
    let f1 = contract_second(sigma, da, db, &(n1.matrix() + n2.matrix()));
    let f2 = contract_second(sigma, da, db, &(n1.matrix() - n2.matrix()));
    let (m1, v1) = observable_from_operator(&hermitian_part(&f1))?;
    let (m2, v2) = observable_from_operator(&hermitian_part(&f2))?;
    Ok((m1, m2, v1 + v2))
}

fn bob_step(
    sigma: &CMatrix,
    (da, db): (usize, usize),
    m1: &DichotomicObservable,
    m2: &DichotomicObservable,
) -> Result<(DichotomicObservable, DichotomicObservable, f64)> {
    let g1 = contract_first(sigma, da, db, &(m1.matrix() + m2.matrix()));
    let g2 = contract_first(sigma, da, db, &(m1.matrix() - m2.matrix()));
    let (n1, v1) = observable_from_operator(&hermitian_part(&g1))?;
    let (n2, v2) = observable_from_operator(&hermitian_part(&g2))?;
    Ok((n1, n2, v1 + v2))
}

/// Optimal input for the unidirectional protocol: top eigenvector of
/// `(id ⊗ E₁† ⊗ id ⊗ E₂†)(B)`. `bell` acts on `(A, A') : (B, B')`; the
/// returned state is laid out as `(A, Ã, A', Ã')`. Also returns the value.
pub fn update_state_unidirectional(
    bell: &BellOperator,
    ch1: &KrausChannel,
    ch2: &KrausChannel,
) -> Result<(PureState, f64)> {
    let (da, db) = bell.dims();
    if db != ch1.out_dim() * ch2.out_dim() || da != ch1.in_dim() * ch2.in_dim() {
        return Err(Error::Dimension(format!(
            "Bell operator {da}x{db} does not fit channels {}→{} and {}→{}",
            ch1.in_dim(),
            ch1.out_dim(),
            ch2.in_dim(),
            ch2.out_dim()
        )));
    }
    let joint = ch1.tensor(ch2);
    let (w, _) = joint.adjoint_apply_on(bell.matrix(), &[da, db], 1)?;
    let (value, psi) = hermitian_eig(&hermitian_part(&w))?.top();
    let (a, a2) = (ch1.in_dim(), ch2.in_dim());
    let state = PureState::from_parts(vec![a, a2, ch1.in_dim(), ch2.in_dim()], psi);
    Ok((state.permute(&[0, 2, 1, 3])?, value))
}

/// Which bidirectional factor is held fixed during a state update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedFactor {
    /// `ρ^{AA'}` (the input of the first channel) is fixed; `ρ^{BB'}` is updated.
    First,
    /// `ρ^{BB'}` is fixed; `ρ^{AA'}` is updated.
    Second,
}

/// Conditional state update for the bidirectional protocol. `fixed` is the
/// input of the held factor (`(A, X)` for [`FixedFactor::First`], `(Y, B')`
/// otherwise); returns the optimal pure input for the other factor and the
/// value it attains.
pub fn update_state_bidirectional(
    bell: &BellOperator,
    ch1: &KrausChannel,
    ch2: &KrausChannel,
    which: FixedFactor,
    fixed: &DensityMatrix,
) -> Result<(PureState, f64)> {
    let problem = Problem::product(ch1.clone(), ch2.clone(), false);
    let Kind::Product(pp) = &problem.kind else { unreachable!() };
    if bell.dims() != (problem.alice_dim, problem.bob_dim) {
        return Err(Error::Dimension("Bell operator does not fit the channels".into()));
    }
    let bp = pp.bell_by_factor(bell.matrix())?;
    let (w, dims) = match which {
        FixedFactor::First => {
            if fixed.dim() != pp.d1_in * pp.d1_in {
                return Err(Error::Dimension("fixed factor has the wrong size".into()));
            }
            let s1 = apply_lifted(&pp.lift1, fixed.matrix());
            (pp.factor2_operator(&bp, &s1), vec![pp.d2_in, pp.d2_in])
        }
        FixedFactor::Second => {
            if fixed.dim() != pp.d2_in * pp.d2_in {
                return Err(Error::Dimension("fixed factor has the wrong size".into()));
            }
            let s2 = apply_lifted(&pp.lift2, fixed.matrix());
            (pp.factor1_operator(&bp, &s2), vec![pp.d1_in, pp.d1_in])
        }
    };
    let (value, psi) = hermitian_eig(&w)?.top();
    Ok((PureState::from_parts(dims, psi), value))
}

/// `(1-ε) ρ + ε ρ*`.
pub fn perturb(rho: &DensityMatrix, rho_star: &DensityMatrix, epsilon: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Parameter(format!("epsilon = {epsilon} outside [0, 1]")));
    }
    rho.mix(rho_star, epsilon)
}

/// Random entangled pure state `U†|λ⟩` with `|λ⟩ = √λ|0,1⟩ + √(1-λ)|1,0⟩`
/// across the `(first, second)` split and `U` Haar-random on the whole space.
pub fn random_perturbation_state<R: Rng + ?Sized>(
    first: usize,
    second: usize,
    rng: &mut R,
) -> DensityMatrix {
    let n = first * second;
    let lam: f64 = rng.random_range(f64::EPSILON..1.0);
    let mut v = CVector::zeros(n);
    v[1] = cr(lam.sqrt());
    v[second] += cr((1.0 - lam).sqrt());
    let u = random_unitary(n, rng);
    let psi = u.adjoint() * v;
    DensityMatrix::from_parts(vec![first, second], projector(&psi))
}

fn random_observable<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DichotomicObservable {
    let u = random_unitary(d, rng);
    let mut diag = CMatrix::zeros(d, d);
    // balanced spectrum; ±I is a fixed point of the updates
    let plus = if d % 2 == 1 && rng.random_bool(0.5) { d / 2 + 1 } else { d / 2 };
    for i in 0..d {
        diag[(i, i)] = cr(if i < plus { 1.0 } else { -1.0 });
    }
    DichotomicObservable::from_parts(hermitian_part(&(&u * diag * u.adjoint())))
}

fn apply_lifted(lifted: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let n = lifted[0].nrows();
    hermitian_part(&lifted.iter().fold(CMatrix::zeros(n, n), |acc, k| acc + k * rho * k.adjoint()))
}

fn adjoint_lifted(lifted: &[CMatrix], obs: &CMatrix) -> CMatrix {
    let n = lifted[0].ncols();
    hermitian_part(&lifted.iter().fold(CMatrix::zeros(n, n), |acc, k| acc + k.adjoint() * obs * k))
}

#[derive(Debug, Clone)]
struct JointProblem {
    kept: usize,
    sent: usize,
    lifted: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
struct ProductProblem {
    d1_in: usize,
    d1_out: usize,
    d2_in: usize,
    d2_out: usize,
    /// `I_A ⊗ K` for the first channel.
    lift1: Vec<CMatrix>,
    /// `K ⊗ I_B'` for the second channel.
    lift2: Vec<CMatrix>,
    symmetric: bool,
    swap: CMatrix,
}

impl ProductProblem {
    /// Bell operator regrouped from `(A, A', B, B')` to `(A, B, A', B')`.
    fn bell_by_factor(&self, bell: &CMatrix) -> Result<CMatrix> {
        let dims = [self.d1_in, self.d2_out, self.d1_out, self.d2_in];
        Ok(permute_subsystems(bell, &dims, &[0, 2, 1, 3])?.0)
    }

    fn global_output(&self, s1: &CMatrix, s2: &CMatrix) -> CMatrix {
        let dims = [self.d1_in, self.d1_out, self.d2_out, self.d2_in];
        permute_subsystems(&s1.kronecker(s2), &dims, &[0, 2, 1, 3])
            .expect("factor dims are consistent")
            .0
    }

    /// Effective operator on the first input given the second output.
    fn factor1_operator(&self, bp: &CMatrix, s2: &CMatrix) -> CMatrix {
        let k1 = contract_second(bp, self.d1_in * self.d1_out, self.d2_out * self.d2_in, s2);
        adjoint_lifted(&self.lift1, &hermitian_part(&k1))
    }

    /// Effective operator on the second input given the first output.
    fn factor2_operator(&self, bp: &CMatrix, s1: &CMatrix) -> CMatrix {
        let k2 = contract_first(bp, self.d1_in * self.d1_out, self.d2_out * self.d2_in, s1);
        adjoint_lifted(&self.lift2, &hermitian_part(&k2))
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Fixed(CMatrix),
    Joint(JointProblem),
    Product(ProductProblem),
}

#[derive(Debug, Clone)]
struct Problem {
    alice_dim: usize,
    bob_dim: usize,
    kind: Kind,
}

impl Problem {
    fn new(scenario: &Scenario) -> Result<Self> {
        match scenario {
            Scenario::FixedState { state, alice_dim, bob_dim } => {
                check_cut(state.matrix(), (*alice_dim, *bob_dim))?;
                Ok(Self {
                    alice_dim: *alice_dim,
                    bob_dim: *bob_dim,
                    kind: Kind::Fixed(state.matrix().clone()),
                })
            }
            Scenario::Joint { kept_dim, channel } => {
                let il = identity(*kept_dim);
                let lifted = channel.kraus_ops().iter().map(|k| il.kronecker(k)).collect();
                Ok(Self {
                    alice_dim: *kept_dim,
                    bob_dim: channel.out_dim(),
                    kind: Kind::Joint(JointProblem {
                        kept: *kept_dim,
                        sent: channel.in_dim(),
                        lifted,
                    }),
                })
            }
            Scenario::Product { first, second } => {
                Ok(Self::product(first.clone(), second.clone(), false))
            }
            Scenario::SymmetricProduct { channel } => {
                Ok(Self::product(channel.clone(), channel.clone(), true))
            }
        }
    }

    fn product(first: KrausChannel, second: KrausChannel, symmetric: bool) -> Self {
        let (d1_in, d1_out) = (first.in_dim(), first.out_dim());
        let (d2_in, d2_out) = (second.in_dim(), second.out_dim());
        let ia = identity(d1_in);
        let ib = identity(d2_in);
        let lift1 = first.kraus_ops().iter().map(|k| ia.kronecker(k)).collect();
        let lift2 = second.kraus_ops().iter().map(|k| k.kronecker(&ib)).collect();
        Self {
            alice_dim: d1_in * d2_out,
            bob_dim: d1_out * d2_in,
            kind: Kind::Product(ProductProblem {
                d1_in,
                d1_out,
                d2_in,
                d2_out,
                lift1,
                lift2,
                symmetric,
                swap: swap_operator(d1_in),
            }),
        }
    }

    fn cut(&self) -> (usize, usize) {
        (self.alice_dim, self.bob_dim)
    }
}

/// Mutable optimizer state for one restart.
struct Walker<'a> {
    problem: &'a Problem,
    inputs: Inputs,
    sigma: CMatrix,
    obs: [DichotomicObservable; 4],
}

#[derive(Debug, Clone)]
enum Inputs {
    Fixed,
    Joint(CMatrix),
    Product(CMatrix, CMatrix),
}

impl<'a> Walker<'a> {
    fn new(problem: &'a Problem, rng: &mut SeededRng) -> Self {
        let inputs = match &problem.kind {
            Kind::Fixed(_) => Inputs::Fixed,
            Kind::Joint(j) => {
                let psi = crate::linalg::random_unit_vector(j.kept * j.sent, rng);
                Inputs::Joint(projector(&psi))
            }
            Kind::Product(p) => {
                let r1 = projector(&crate::linalg::random_unit_vector(p.d1_in * p.d1_in, rng));
                let r2 = if p.symmetric {
                    &p.swap * &r1 * &p.swap
                } else {
                    projector(&crate::linalg::random_unit_vector(p.d2_in * p.d2_in, rng))
                };
                Inputs::Product(r1, r2)
            }
        };
        let (da, db) = problem.cut();
        let obs = [
            random_observable(da, rng),
            random_observable(da, rng),
            random_observable(db, rng),
            random_observable(db, rng),
        ];
        let mut w = Self { problem, inputs, sigma: CMatrix::zeros(0, 0), obs };
        w.sigma = w.output(&w.inputs);
        w
    }

    fn output(&self, inputs: &Inputs) -> CMatrix {
        match (&self.problem.kind, inputs) {
            (Kind::Fixed(s), _) => s.clone(),
            (Kind::Joint(j), Inputs::Joint(rho)) => apply_lifted(&j.lifted, rho),
            (Kind::Product(p), Inputs::Product(r1, r2)) => {
                let s1 = apply_lifted(&p.lift1, r1);
                let s2 = apply_lifted(&p.lift2, r2);
                p.global_output(&s1, &s2)
            }
            _ => unreachable!("inputs always match the problem kind"),
        }
    }

    fn bell(&self) -> Result<BellOperator> {
        let [m1, m2, n1, n2] = &self.obs;
        BellOperator::new(m1, m2, n1, n2)
    }

    fn value(&self) -> Result<f64> {
        self.bell()?.value_of(&self.sigma)
    }

    fn step_alice(&mut self) -> Result<f64> {
        let (m1, m2, v) = alice_step(&self.sigma, self.problem.cut(), &self.obs[2], &self.obs[3])?;
        self.obs[0] = m1;
        self.obs[1] = m2;
        Ok(v)
    }

    fn step_bob(&mut self) -> Result<f64> {
        let (n1, n2, v) = bob_step(&self.sigma, self.problem.cut(), &self.obs[0], &self.obs[1])?;
        self.obs[2] = n1;
        self.obs[3] = n2;
        Ok(v)
    }

    /// State update; returns the new value. Never decreases the value.
    fn step_state(&mut self) -> Result<f64> {
        let bell = self.bell()?;
        match &self.problem.kind {
            Kind::Fixed(_) => self.value(),
            Kind::Joint(j) => {
                let w = adjoint_lifted(&j.lifted, bell.matrix());
                let (v, psi) = hermitian_eig(&w)?.top();
                self.inputs = Inputs::Joint(projector(&psi));
                self.sigma = self.output(&self.inputs);
                Ok(v)
            }
            Kind::Product(p) if !p.symmetric => {
                let Inputs::Product(_, r2) = &self.inputs else { unreachable!() };
                let bp = p.bell_by_factor(bell.matrix())?;
                let s2 = apply_lifted(&p.lift2, r2);
                let (_, psi1) = hermitian_eig(&p.factor1_operator(&bp, &s2))?.top();
                let r1 = projector(&psi1);
                let s1 = apply_lifted(&p.lift1, &r1);
                let (_, psi2) = hermitian_eig(&p.factor2_operator(&bp, &s1))?.top();
                let r2 = projector(&psi2);
                self.inputs = Inputs::Product(r1, r2);
                self.sigma = self.output(&self.inputs);
                self.value()
            }
            Kind::Product(p) => self.step_symmetric(p, &bell),
        }
    }

    /// Value of the symmetric product input `ψ ⊗ 𝔽ψ`.
    fn symmetric_value(&self, p: &ProductProblem, bell: &BellOperator, psi: &CVector) -> Result<f64> {
        let r1 = projector(psi);
        let r2 = &p.swap * &r1 * &p.swap;
        let s = p.global_output(&apply_lifted(&p.lift1, &r1), &apply_lifted(&p.lift2, &r2));
        bell.value_of(&s)
    }

    /// Quartic objective in `ψ`: take the top eigenvector of the symmetrized
    /// gradient operator, falling back to damped steps if that does not improve.
    fn step_symmetric(&mut self, p: &ProductProblem, bell: &BellOperator) -> Result<f64> {
        let Inputs::Product(r1, _) = &self.inputs else { unreachable!() };
        // current input may be mixed after a perturbation; use its top eigenvector
        let (_, psi) = hermitian_eig(r1)?.top();
        let current = self.symmetric_value(p, bell, &psi)?;
        let bp = p.bell_by_factor(bell.matrix())?;
        let r1 = projector(&psi);
        let r2 = &p.swap * &r1 * &p.swap;
        let s1 = apply_lifted(&p.lift1, &r1);
        let s2 = apply_lifted(&p.lift2, &r2);
        let w1 = p.factor1_operator(&bp, &s2);
        let w2 = p.factor2_operator(&bp, &s1);
        let g = (&w1 + &p.swap * &w2 * &p.swap).scale(0.5);
        let (_, mut cand) = hermitian_eig(&hermitian_part(&g))?.top();
        let overlap = psi.dotc(&cand);
        if overlap.norm() > 0.0 {
            cand *= overlap.conj() / overlap.norm();
        }
        let mut best = (current, psi.clone());
        let mut t = 1.0;
        for _ in 0..8 {
            let trial = &psi + (&cand - &psi) * cr(t);
            let norm = trial.norm();
            if norm > 1e-12 {
                let trial = trial.unscale(norm);
                let v = self.symmetric_value(p, bell, &trial)?;
                if v > best.0 {
                    best = (v, trial);
                    break;
                }
            }
            t *= 0.5;
        }
        let r1 = projector(&best.1);
        let r2 = &p.swap * &r1 * &p.swap;
        self.inputs = Inputs::Product(r1, r2);
        self.sigma = self.output(&self.inputs);
        self.value()
    }

    fn perturb(&mut self, epsilon: f64, rng: &mut SeededRng) {
        let mix = |rho: &CMatrix, star: DensityMatrix| {
            rho.scale(1.0 - epsilon) + star.into_matrix().scale(epsilon)
        };
        self.inputs = match (&self.problem.kind, &self.inputs) {
            (Kind::Joint(j), Inputs::Joint(rho)) => {
                Inputs::Joint(mix(rho, random_perturbation_state(j.kept, j.sent, rng)))
            }
            (Kind::Product(p), Inputs::Product(r1, r2)) => {
                let n1 = mix(r1, random_perturbation_state(p.d1_in, p.d1_in, rng));
                let n2 = if p.symmetric {
                    &p.swap * &n1 * &p.swap
                } else {
                    mix(r2, random_perturbation_state(p.d2_in, p.d2_in, rng))
                };
                Inputs::Product(n1, n2)
            }
            (_, inputs) => inputs.clone(),
        };
        self.sigma = self.output(&self.inputs);
    }

    /// Identity observables: the deterministic strategy attaining 2.
    fn trivial_snapshot(&self) -> Result<Snapshot> {
        let (da, db) = self.problem.cut();
        let ia = DichotomicObservable::identity(da);
        let ib = DichotomicObservable::identity(db);
        let obs = [ia.clone(), ia, ib.clone(), ib];
        let [m1, m2, n1, n2] = &obs;
        let value = BellOperator::new(m1, m2, n1, n2)?.value_of(&self.sigma)?;
        Ok(Snapshot { value, inputs: self.inputs.clone(), sigma: self.sigma.clone(), obs })
    }

    fn snapshot(&self, value: f64) -> Snapshot {
        Snapshot {
            value,
            inputs: self.inputs.clone(),
            sigma: self.sigma.clone(),
            obs: self.obs.clone(),
        }
    }
}

#[derive(Debug, Clone)]
struct Snapshot {
    value: f64,
    inputs: Inputs,
    sigma: CMatrix,
    obs: [DichotomicObservable; 4],
}

struct RestartOutcome {
    best: Snapshot,
    trace: Vec<(usize, f64)>,
    perturbations: Vec<usize>,
    converged: bool,
}

fn run_restart(problem: &Problem, config: &SeesawConfig, index: usize) -> Result<RestartOutcome> {
    let mut rng = seeded_rng(config.seed.wrapping_add(index as u64));
    let mut w = Walker::new(problem, &mut rng);
    let fixed = matches!(problem.kind, Kind::Fixed(_));

    let mut trace = Vec::new();
    let mut perturbations = Vec::new();
    let mut best = w.trivial_snapshot()?;
    let mut step = 0usize;
    let mut record = |w: &Walker, v: f64, best: &mut Snapshot, trace: &mut Vec<(usize, f64)>| {
        trace.push((step, v));
        step += 1;
        if v > best.value {
            *best = w.snapshot(v);
        }
    };

    let mut previous_round = f64::NEG_INFINITY;
    let mut stall = 0usize;
    let mut best_local = f64::NEG_INFINITY;
    let mut repeats = 0usize;
    let mut converged = false;
    let mut trivial_stalls = 0usize;
    let repeat_tol = (10.0 * config.value_equality_tol).max(1e-9);

    for _round in 0..config.max_iterations {
        let v = w.step_alice()?;
        record(&w, v, &mut best, &mut trace);
        if !fixed {
            let v = w.step_state()?;
            record(&w, v, &mut best, &mut trace);
        }
        let v = w.step_bob()?;
        record(&w, v, &mut best, &mut trace);
        let v = if fixed { v } else { w.step_state()? };
        if !fixed {
            record(&w, v, &mut best, &mut trace);
        }

        if (v - previous_round).abs() <= config.value_equality_tol {
            stall += 1;
        } else {
            stall = 0;
        }
        previous_round = v;
        if stall < config.stall_threshold {
            continue;
        }
        stall = 0;
        if fixed {
            converged = true;
            break;
        }
        if config.reseed_margin >= 0.0 && v <= LOCAL_BOUND + config.reseed_margin {
            trivial_stalls += 1;
            w = Walker::new(problem, &mut rng);
            perturbations.push(trace.len());
            previous_round = f64::NEG_INFINITY;
            continue;
        }
        if v > best_local + repeat_tol {
            best_local = v;
            repeats = 1;
        } else if v >= best_local - repeat_tol {
            repeats += 1;
        }
        if repeats >= config.repeat_target {
            converged = true;
            break;
        }
        if rng.random_bool(config.perturb_probability) {
            w.perturb(config.epsilon, &mut rng);
            perturbations.push(trace.len());
            previous_round = f64::NEG_INFINITY;
        }
    }
    // only ever reached the local bound
    converged |= best_local == f64::NEG_INFINITY && trivial_stalls > 0;
    Ok(RestartOutcome { best, trace, perturbations, converged })
}

/// Runs `config.restarts` independent restarts (restart `r` seeded with
/// `seed + r`) and keeps the best.
pub fn run_seesaw(scenario: &Scenario, config: &SeesawConfig) -> Result<SeesawResult> {
    config.validate()?;
    let problem = Problem::new(scenario)?;
    let outcomes = run_restarts(&problem, config)?;
    let (restart_index, winner) = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, &RestartOutcome)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.best.value >= o.best.value => acc,
            _ => Some((i, o)),
        })
        .expect("at least one restart");
    let restart_values = outcomes.iter().map(|o| o.best.value).collect();
    let snap = &winner.best;
    let (da, db) = problem.cut();
    let best_output = DensityMatrix::from_parts(vec![da, db], snap.sigma.clone());
    let best_input = match (&problem.kind, &snap.inputs) {
        (Kind::Joint(j), Inputs::Joint(r)) => {
            InputState::Joint(DensityMatrix::from_parts(vec![j.kept, j.sent], r.clone()))
        }
        (Kind::Product(p), Inputs::Product(r1, r2)) => InputState::Product(
            DensityMatrix::from_parts(vec![p.d1_in, p.d1_in], r1.clone()),
            DensityMatrix::from_parts(vec![p.d2_in, p.d2_in], r2.clone()),
        ),
        _ => InputState::Fixed,
    };
    let mut result = SeesawResult {
        best_value: snap.value,
        best_input,
        best_output,
        best_observables: snap.obs.clone(),
        value_trace: winner.trace.clone(),
        perturbation_steps: winner.perturbations.clone(),
        restart_index,
        converged: winner.converged,
        restart_values,
    };
    let recomputed = result.recompute_value()?;
    if (recomputed - result.best_value).abs() > 1e-8 {
        return Err(Error::NumericalIntegrity(format!(
            "best value {} disagrees with recomputation {recomputed}",
            result.best_value
        )));
    }
    result.best_value = recomputed;
    Ok(result)
}

#[cfg(feature = "parallel")]
fn run_restarts(problem: &Problem, config: &SeesawConfig) -> Result<Vec<RestartOutcome>> {
    use rayon::prelude::*;
    (0..config.restarts)
        .into_par_iter()
        .map(|i| run_restart(problem, config, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_restarts(problem: &Problem, config: &SeesawConfig) -> Result<Vec<RestartOutcome>> {
    (0..config.restarts).map(|i| run_restart(problem, config, i)).collect()
}
