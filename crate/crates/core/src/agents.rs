//! Online policies: the shared-subspace OFUL agent, the independent
//! per-task OFUL baseline, and their confidence-radius formulas.
//!
//! Both agents keep, per task, the regularized Gram matrix V̄ = λI + Σxxᵀ
//! and its inverse. The inverse is maintained by Sherman-Morrison rank-one
//! updates and recomputed from the accumulated Gram every
//! [`RESYNC_INTERVAL`] updates to bound drift. The shared-subspace agent
//! additionally keeps the r-dimensional projected system
//! M = λI_r + Σ(B̂ᵀx)(B̂ᵀx)ᵀ, whose Cholesky factor yields both the ridge
//! estimate ŵ and the projected log-determinant the β radius needs.
//!
//! Selection maximizes the optimistic index
//! xᵀθ̂ + radius·‖x‖_{V̄⁻¹} over the candidate set; the maximizing θ̃ of
//! the ellipsoid is never materialized because only its value matters.

use crate::env::ActionSet;
use crate::error::{Error, Result};
use crate::mat::{
    self, cholesky, dot, quad_form, sherman_morrison_update_in_place, spd_inverse, Matrix,
    OrthonormalBasis,
};

/// Updates between full recomputations of V̄⁻¹ from the raw Gram.
pub const RESYNC_INTERVAL: usize = 100;

/// Max-abs tolerance for the projected-Gram consistency check performed
/// on resync rounds: ‖B̂ᵀV̄B̂ − M‖_max must stay below this.
pub const PROJECTION_CONSISTENCY_TOL: f64 = 1e-6;

/// Which confidence-radius formula an agent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    /// Determinant-form radius over the projected r×r system.
    Beta,
    /// Determinant-free radius with the horizon-dependent middle term.
    BetaPrime,
    /// Classical d-dimensional self-normalized radius with a norm bound.
    BaselineOful,
    /// Degenerate zero radius (greedy on θ̂); used by oracle tests.
    Zero,
}

/// How δ₀ (the assumed bound on SD(B̂, B*)) is resolved each round.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Delta0Policy {
    Fixed(f64),
    /// Oracle: the measured subspace distance from the spectral step.
    MeasuredSd,
    /// δ₀ = 1/(L√(n−N₁)), the schedule used to derive the β′ set.
    ScheduleInvSqrt,
}

/// How the feature-norm bound L is resolved.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LPolicy {
    /// Running maximum of all sampled action norms.
    RunningMax,
    Fixed(f64),
}

/// The β′ middle term divides by √(N−N₁) in the theorem statement and by
/// √(n−N₁) in the proof's final display; both are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaPrimeHorizon {
    Theorem,
    Proof,
}

/// Radius formula parameters. `mu_sigma_term` is the composite
/// μ√(r/T)σ*_max supplied as one number; oracle mode passes max_t‖w*_t‖,
/// the tightest value satisfying the incoherence bound.
#[derive(Debug, Clone)]
pub struct RadiusSpec {
    pub kind: RadiusKind,
    pub lambda: f64,
    pub delta: f64,
    pub delta0_policy: Delta0Policy,
    pub mu_sigma_term: f64,
    pub sigma: f64,
    pub r: usize,
    pub l_policy: LPolicy,
    pub beta_prime_horizon: BetaPrimeHorizon,
    /// Horizon bookkeeping for the β′ middle term.
    pub n_total: usize,
    pub n1: usize,
    /// Oracle bound on max_t ‖θ*_t‖ for the baseline radius.
    pub s_bound: f64,
}

impl RadiusSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda {} must be positive",
                self.lambda
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta {} must lie in (0,1)",
                self.delta
            )));
        }
        if self.mu_sigma_term < 0.0 || self.sigma < 0.0 {
            return Err(Error::InvalidArgument(
                "mu_sigma_term and sigma must be nonnegative".into(),
            ));
        }
        if let Delta0Policy::Fixed(v) = self.delta0_policy {
            if v < 0.0 {
                return Err(Error::InvalidArgument(format!("fixed delta0 {v} < 0")));
            }
        }
        if let LPolicy::Fixed(v) = self.l_policy {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("fixed L {v} must be > 0")));
            }
        }
        if self.n1 >= self.n_total {
            return Err(Error::InvalidArgument(format!(
                "n1 {} must be below horizon {}",
                self.n1, self.n_total
            )));
        }
        Ok(())
    }

    /// Resolve the per-round quantities the formulas need. `measured_sd`
    /// is the spectral diagnostic (required by the measured policy),
    /// `running_l` the current feature-norm maximum, `samples` the
    /// number of updates absorbed so far.
    pub fn resolve(
        &self,
        measured_sd: Option<f64>,
        running_l: f64,
        samples: usize,
    ) -> Result<RadiusContext> {
        let l = match self.l_policy {
            LPolicy::RunningMax => running_l,
            LPolicy::Fixed(v) => v,
        };
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "resolved feature bound L = {l} is unusable"
            )));
        }
        let delta0 = match self.delta0_policy {
            Delta0Policy::Fixed(v) => v,
            Delta0Policy::MeasuredSd => measured_sd.ok_or_else(|| {
                Error::InvalidArgument(
                    "delta0 policy measured_sd needs the spectral diagnostic".into(),
                )
            })?,
            Delta0Policy::ScheduleInvSqrt => 1.0 / (l * (samples.max(1) as f64).sqrt()),
        };
        Ok(RadiusContext { l, delta0 })
    }
}

/// Per-round resolved inputs to the radius formulas.
#[derive(Debug, Clone, Copy)]
pub struct RadiusContext {
    pub l: f64,
    pub delta0: f64,
}

/// Per-task online state of the shared-subspace agent.
#[derive(Debug, Clone)]
pub struct TaskState {
    pub task: usize,
    /// Raw regularized Gram V̄ = λI + Σxxᵀ (resync source, containment norm).
    pub vbar: Matrix,
    /// V̄⁻¹, Sherman-Morrison maintained.
    pub vbar_inv: Matrix,
    /// log det of the projected r×r system M.
    pub vbar_logdet_proj: f64,
    /// M = λI_r + Σ zzᵀ with z = B̂ᵀx.
    pub m_proj: Matrix,
    /// Σ z·y.
    pub b_proj: Vec<f64>,
    pub w_hat: Vec<f64>,
    /// θ̂ = B̂ŵ, cached.
    pub theta_hat: Vec<f64>,
    /// Updates absorbed since the phase began (n − N₁ at round n).
    pub samples: usize,
}

impl TaskState {
    pub fn new(task: usize, d: usize, r: usize, lambda: f64) -> Self {
        TaskState {
            task,
            vbar: Matrix::scaled_identity(d, lambda),
            vbar_inv: Matrix::scaled_identity(d, 1.0 / lambda),
            vbar_logdet_proj: r as f64 * lambda.ln(),
            m_proj: Matrix::scaled_identity(r, lambda),
            b_proj: vec![0.0; r],
            w_hat: vec![0.0; r],
            theta_hat: vec![0.0; d],
            samples: 0,
        }
    }
}

/// One selection: chosen action, its optimistic value, the radius used,
/// and every per-action index for diagnostics.
#[derive(Debug, Clone)]
pub struct PolicyDecision {
    pub chosen: usize,
    pub ucb_value: f64,
    pub radius_used: f64,
    pub index_values: Vec<f64>,
    /// Quadratic forms that needed clamping below −1e-10.
    pub clamp_warnings: u64,
}

/// β radius (determinant form): three-term sum of the noise term over the
/// projected determinant, the (1+δ₀)√λ bias term, and the subspace-error
/// term growing with √(n−N₁).
pub fn radius_beta(spec: &RadiusSpec, state: &TaskState, ctx: &RadiusContext) -> Result<f64> {
    let r = spec.r as f64;
    // 2·log(det(V)^{1/2} det(λI)^{-1/2} / δ) = logdet V − r logλ − 2 logδ.
    let inner = state.vbar_logdet_proj - r * spec.lambda.ln() - 2.0 * spec.delta.ln();
    if inner < 0.0 {
        return Err(Error::NumericalFailure(format!(
            "beta radius log argument {inner:.3e} < 0; projected state corrupted"
        )));
    }
    let noise_term = spec.sigma * inner.sqrt();
    let bias_term = (1.0 + ctx.delta0) * spec.lambda.sqrt() * spec.mu_sigma_term;
    let subspace_term =
        2.0 * (state.samples as f64).sqrt() * ctx.l * ctx.delta0 * spec.mu_sigma_term;
    Ok(noise_term + bias_term + subspace_term)
}

/// β′ radius (determinant-free): σ√(r·log((1+(n−N₁)L²/λ)/δ)) plus a
/// horizon-dependent multiple of the incoherence term.
pub fn radius_beta_prime(spec: &RadiusSpec, state: &TaskState, ctx: &RadiusContext) -> Result<f64> {
    let samples = state.samples as f64;
    let log_arg = (1.0 + samples * ctx.l * ctx.l / spec.lambda) / spec.delta;
    let noise_term = spec.sigma * (spec.r as f64 * log_arg.ln()).sqrt();
    let horizon = match spec.beta_prime_horizon {
        BetaPrimeHorizon::Theorem => (spec.n_total - spec.n1) as f64,
        BetaPrimeHorizon::Proof => (state.samples.max(1)) as f64,
    };
    let sqrt_lambda = spec.lambda.sqrt();
    let coeff = sqrt_lambda + sqrt_lambda / (ctx.l * horizon.sqrt()) + 2.0;
    Ok(noise_term + coeff * spec.mu_sigma_term)
}

/// Classical d-dimensional self-normalized radius with a norm bound:
/// σ√(d·log((1+(n−N₁)L²/λ)/δ)) + √λ·s_bound.
pub fn radius_baseline(
    spec: &RadiusSpec,
    d: usize,
    samples: usize,
    ctx: &RadiusContext,
) -> Result<f64> {
    let log_arg = (1.0 + samples as f64 * ctx.l * ctx.l / spec.lambda) / spec.delta;
    let noise_term = spec.sigma * (d as f64 * log_arg.ln()).sqrt();
    Ok(noise_term + spec.lambda.sqrt() * spec.s_bound)
}

/// Clamp policy for the exploration-bonus quadratic form: slightly
/// negative values from round-off are clamped to zero; below −1e-10 the
/// clamp is counted as a warning, below −1e-6 it is a hard error.
fn index_from_parts(mean: f64, quad: f64, radius: f64) -> Result<(f64, bool)> {
    let mut q = quad;
    let mut warned = false;
    if q < 0.0 {
        if q < -1e-6 {
            return Err(Error::NumericalFailure(format!(
                "quadratic form {q:.3e} far below zero; inverse state corrupted"
            )));
        }
        warned = q < -1e-10;
        q = 0.0;
    }
    Ok((mean + radius * q.sqrt(), warned))
}

/// Optimistic index xᵀθ̂ + radius·√(xᵀV̄⁻¹x).
pub fn ucb_index(
    theta_hat: &[f64],
    vbar_inv: &Matrix,
    x: &[f64],
    radius: f64,
) -> Result<(f64, bool)> {
    if radius < 0.0 {
        return Err(Error::InvalidArgument(format!("negative radius {radius}")));
    }
    index_from_parts(dot(theta_hat, x), quad_form(vbar_inv, x), radius)
}

/// Indices for a whole candidate set against one state, sharing a
/// scratch buffer for the symmetric matvec.
fn index_all(
    theta_hat: &[f64],
    vbar_inv: &Matrix,
    actions: &ActionSet,
    radius: f64,
) -> Result<(Vec<f64>, u64)> {
    if radius < 0.0 {
        return Err(Error::InvalidArgument(format!("negative radius {radius}")));
    }
    let d = theta_hat.len();
    let mut products = vec![0.0; actions.k() * d];
    mat::sym_matvec_batch(vbar_inv, actions.features(), &mut products);
    let mut values = Vec::with_capacity(actions.k());
    let mut clamp_warnings = 0;
    for (kk, x) in actions.iter().enumerate() {
        let quad = dot(&products[kk * d..(kk + 1) * d], x);
        let (v, warned) = index_from_parts(dot(theta_hat, x), quad, radius)?;
        if warned {
            clamp_warnings += 1;
        }
        values.push(v);
    }
    Ok((values, clamp_warnings))
}

fn argmax_lowest_index(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    (best, best_value)
}

/// Shared-subspace selection: one radius per (task, round), then the
/// optimistic index for every candidate; argmax with lowest-index ties.
pub fn mtl_select(
    state: &TaskState,
    actions: &ActionSet,
    spec: &RadiusSpec,
    ctx: &RadiusContext,
) -> Result<PolicyDecision> {
    let radius = match spec.kind {
        RadiusKind::Beta => radius_beta(spec, state, ctx)?,
        RadiusKind::BetaPrime => radius_beta_prime(spec, state, ctx)?,
        RadiusKind::Zero => 0.0,
        RadiusKind::BaselineOful => {
            return Err(Error::InvalidArgument(
                "baseline radius on shared-subspace state".into(),
            ))
        }
    };
    let (index_values, clamp_warnings) =
        index_all(&state.theta_hat, &state.vbar_inv, actions, radius)?;
    let (chosen, ucb_value) = argmax_lowest_index(&index_values);
    Ok(PolicyDecision {
        chosen,
        ucb_value,
        radius_used: radius,
        index_values,
        clamp_warnings,
    })
}

/// Absorb one observation into the shared-subspace state.
///
/// Every [`RESYNC_INTERVAL`] updates V̄⁻¹ is recomputed from the raw Gram
/// and the two bookkeeping paths are cross-checked:
/// ‖B̂ᵀV̄B̂ − M‖_max ≤ [`PROJECTION_CONSISTENCY_TOL`].
pub fn mtl_update(
    state: &mut TaskState,
    x: &[f64],
    y: f64,
    b_hat: &OrthonormalBasis,
    spec: &RadiusSpec,
) -> Result<()> {
    let z = b_hat.project(x);
    state.vbar.add_outer(x, 1.0);
    sherman_morrison_update_in_place(&mut state.vbar_inv, x)?;
    state.m_proj.add_outer(&z, 1.0);
    for (b, zi) in state.b_proj.iter_mut().zip(&z) {
        *b += zi * y;
    }
    let factor = cholesky(&state.m_proj)?;
    state.w_hat = mat::cholesky_solve(&factor, &state.b_proj);
    state.vbar_logdet_proj = mat::cholesky_logdet(&factor);
    state.theta_hat = b_hat.lift(&state.w_hat);
    state.samples += 1;

    if state.samples % RESYNC_INTERVAL == 0 {
        state.vbar_inv = spd_inverse(&state.vbar)?;
        let projected = project_gram(&state.vbar, b_hat);
        let drift = projected.max_abs_diff(&state.m_proj);
        if drift > PROJECTION_CONSISTENCY_TOL {
            return Err(Error::NumericalFailure(format!(
                "projected Gram drift {drift:.3e} exceeds {PROJECTION_CONSISTENCY_TOL:.0e} on resync"
            )));
        }
        let _ = spec;
    }
    Ok(())
}

/// B̂ᵀ·V̄·B̂ computed densely (resync consistency check).
pub fn project_gram(vbar: &Matrix, b_hat: &OrthonormalBasis) -> Matrix {
    let vb = vbar
        .matmul(b_hat.matrix())
        .expect("dimension checked by construction");
    b_hat
        .matrix()
        .transpose()
        .matmul(&vb)
        .expect("dimension checked by construction")
}

/// Per-task state of the independent OFUL baseline: full d-dimensional
/// ridge with the same Sherman-Morrison/resync regime, no basis.
#[derive(Debug, Clone)]
pub struct BaselineTaskState {
    pub task: usize,
    pub vbar: Matrix,
    pub vbar_inv: Matrix,
    /// Σ x·y in ℝᵈ.
    pub b_vec: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub samples: usize,
}

impl BaselineTaskState {
    pub fn new(task: usize, d: usize, lambda: f64) -> Self {
        BaselineTaskState {
            task,
            vbar: Matrix::scaled_identity(d, lambda),
            vbar_inv: Matrix::scaled_identity(d, 1.0 / lambda),
            b_vec: vec![0.0; d],
            theta_hat: vec![0.0; d],
            samples: 0,
        }
    }
}

/// Baseline selection: identical protocol, d-dimensional radius.
pub fn baseline_select(
    state: &BaselineTaskState,
    actions: &ActionSet,
    spec: &RadiusSpec,
    ctx: &RadiusContext,
) -> Result<PolicyDecision> {
    let radius = match spec.kind {
        RadiusKind::BaselineOful => {
            radius_baseline(spec, state.vbar.rows(), state.samples, ctx)?
        }
        RadiusKind::Zero => 0.0,
        _ => {
            return Err(Error::InvalidArgument(
                "baseline agent needs the baseline radius".into(),
            ))
        }
    };
    let (index_values, clamp_warnings) =
        index_all(&state.theta_hat, &state.vbar_inv, actions, radius)?;
    let (chosen, ucb_value) = argmax_lowest_index(&index_values);
    Ok(PolicyDecision {
        chosen,
        ucb_value,
        radius_used: radius,
        index_values,
        clamp_warnings,
    })
}

/// Absorb one observation into the baseline state: θ̂ = V̄⁻¹·Σxy.
pub fn baseline_update(state: &mut BaselineTaskState, x: &[f64], y: f64) -> Result<()> {
    state.vbar.add_outer(x, 1.0);
    sherman_morrison_update_in_place(&mut state.vbar_inv, x)?;
    for (b, xi) in state.b_vec.iter_mut().zip(x) {
        *b += xi * y;
    }
    state.samples += 1;
    if state.samples % RESYNC_INTERVAL == 0 {
        state.vbar_inv = spd_inverse(&state.vbar)?;
    }
    let mut theta = std::mem::take(&mut state.theta_hat);
    mat::sym_matvec_into(&state.vbar_inv, &state.b_vec, &mut theta);
    state.theta_hat = theta;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::OrthonormalBasis;

    fn spec(kind: RadiusKind) -> RadiusSpec {
        RadiusSpec {
            kind,
            lambda: 1.0,
            delta: 0.1,
            delta0_policy: Delta0Policy::Fixed(0.05),
            mu_sigma_term: 2.0,
            sigma: 1.0,
            r: 2,
            l_policy: LPolicy::Fixed(1.0),
            beta_prime_horizon: BetaPrimeHorizon::Theorem,
            n_total: 100,
            n1: 0,
            s_bound: 1.0,
        }
    }

    #[test]
    fn beta_radius_noiseless_keeps_only_bias_term() {
        // sigma=0, delta0=0, lambda=1, mu-term=1: radius is exactly 1.
        let mut s = spec(RadiusKind::Beta);
        s.sigma = 0.0;
        s.mu_sigma_term = 1.0;
        let state = TaskState::new(0, 3, 2, 1.0);
        let ctx = RadiusContext { l: 1.0, delta0: 0.0 };
        assert_eq!(radius_beta(&s, &state, &ctx).unwrap(), 1.0);
    }

    #[test]
    fn beta_radius_fresh_state_matches_scalar_oracle() {
        // sigma=1, no samples, delta=0.1, delta0=0.05, lambda=1, mu-term=2:
        // radius = sqrt(2 ln 10) + 1.05*2 = 4.245966026289347.
        let s = spec(RadiusKind::Beta);
        let state = TaskState::new(0, 4, 2, 1.0);
        let ctx = RadiusContext { l: 1.0, delta0: 0.05 };
        let got = radius_beta(&s, &state, &ctx).unwrap();
        assert!((got - 4.245966026289347).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn beta_radius_is_linear_in_mu_term_beyond_noise() {
        let mut s = spec(RadiusKind::Beta);
        let mut state = TaskState::new(0, 3, 2, 1.0);
        state.samples = 9;
        let ctx = RadiusContext { l: 2.0, delta0: 0.3 };
        let r1 = radius_beta(&s, &state, &ctx).unwrap();
        s.mu_sigma_term *= 2.0;
        let r2 = radius_beta(&s, &state, &ctx).unwrap();
        let noise = s.sigma * (2.0 * (10.0f64).ln()).sqrt();
        assert!(((r2 - noise) - 2.0 * (r1 - noise)).abs() < 1e-10);
    }

    #[test]
    fn beta_prime_unit_scales_case() {
        // sigma=0, lambda=1, L=1, N-N1=1, mu-term=1: (1 + 1 + 2)·1 = 4.
        let mut s = spec(RadiusKind::BetaPrime);
        s.sigma = 0.0;
        s.mu_sigma_term = 1.0;
        s.n_total = 1;
        let state = TaskState::new(0, 3, 2, 1.0);
        let ctx = RadiusContext { l: 1.0, delta0: 0.0 };
        assert_eq!(radius_beta_prime(&s, &state, &ctx).unwrap(), 4.0);
    }

    #[test]
    fn beta_prime_noise_term_matches_scalar_oracle() {
        // sigma=1, r=2, n−N1=99, L=1, lambda=1, delta=0.1:
        // first term = sqrt(2·ln(1000)) = 3.7169221888498383.
        let mut s = spec(RadiusKind::BetaPrime);
        s.mu_sigma_term = 0.0;
        let mut state = TaskState::new(0, 3, 2, 1.0);
        state.samples = 99;
        let ctx = RadiusContext { l: 1.0, delta0: 0.0 };
        let got = radius_beta_prime(&s, &state, &ctx).unwrap();
        assert!((got - 3.7169221888498383).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn beta_prime_radius_is_nondecreasing_in_samples() {
        let s = spec(RadiusKind::BetaPrime);
        let ctx = RadiusContext { l: 1.5, delta0: 0.0 };
        let mut prev = f64::NEG_INFINITY;
        let mut state = TaskState::new(0, 3, 2, 1.0);
        for samples in 0..50 {
            state.samples = samples;
            let r = radius_beta_prime(&s, &state, &ctx).unwrap();
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn baseline_radius_noiseless_and_oracle_value() {
        let mut s = spec(RadiusKind::BaselineOful);
        s.sigma = 0.0;
        s.s_bound = 3.0;
        let ctx = RadiusContext { l: 1.0, delta0: 0.0 };
        assert_eq!(radius_baseline(&s, 5, 17, &ctx).unwrap(), 3.0);

        // sigma=1, d=100, n−N1=99, L=1, lambda=1, delta=0.1:
        // noise term = sqrt(100·ln(1000)) = 26.28260884878466.
        let mut s = spec(RadiusKind::BaselineOful);
        s.s_bound = 0.0;
        let got = radius_baseline(&s, 100, 99, &ctx).unwrap();
        assert!((got - 26.28260884878466).abs() < 1e-10, "got {got}");
    }

    #[test]
    fn ucb_index_unit_and_degenerate_cases() {
        // theta=0, V=I, radius=2, x=e1: index 2.
        let inv = Matrix::identity(2);
        let (v, w) = ucb_index(&[0.0, 0.0], &inv, &[1.0, 0.0], 2.0).unwrap();
        assert_eq!(v, 2.0);
        assert!(!w);
        // radius 0 degenerates to the plain inner product.
        let (v, _) = ucb_index(&[0.5, -1.0], &inv, &[2.0, 2.0], 0.0).unwrap();
        assert_eq!(v, -1.0);
    }

    #[test]
    fn ucb_index_diagonal_oracle() {
        // V = diag(5,1), x=(2,0), theta=(1,0), radius=1:
        // 2 + sqrt(4/5) = 2.8944271909999157.
        let inv = Matrix::from_rows(&[vec![0.2, 0.0], vec![0.0, 1.0]]).unwrap();
        let (v, _) = ucb_index(&[1.0, 0.0], &inv, &[2.0, 0.0], 1.0).unwrap();
        assert!((v - 2.8944271909999157).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn select_single_action_and_zero_radius_greedy() {
        let b = OrthonormalBasis::new(Matrix::identity(2)).unwrap();
        let mut s = spec(RadiusKind::Zero);
        s.r = 2;
        let mut state = TaskState::new(0, 2, 2, 1.0);
        state.theta_hat = vec![1.0, 0.0];
        let ctx = RadiusContext { l: 1.0, delta0: 0.0 };

        let single = ActionSet::from_features(1, 0, 2, vec![-3.0, 4.0]).unwrap();
        let d = mtl_select(&state, &single, &s, &ctx).unwrap();
        assert_eq!(d.chosen, 0);

        // Greedy with theta_hat = theta*: agrees with the exhaustive scan.
        let set = ActionSet::from_features(1, 0, 2, vec![0.9, 9.0, 1.0, -1.0, 0.2, 0.0]).unwrap();
        let d = mtl_select(&state, &set, &s, &ctx).unwrap();
        assert_eq!(d.chosen, 1);
        let _ = b;
    }

    #[test]
    fn first_update_matches_scalar_ridge() {
        // d=1 embedding: lambda=1, x=1, y=1, B̂=1 → m=2, b=1, ŵ=0.5.
        let b_hat = OrthonormalBasis::new(Matrix::identity(1)).unwrap();
        let s = spec(RadiusKind::Beta);
        let mut state = TaskState::new(0, 1, 1, 1.0);
        mtl_update(&mut state, &[1.0], 1.0, &b_hat, &s).unwrap();
        assert_eq!(state.m_proj.get(0, 0), 2.0);
        assert_eq!(state.b_proj[0], 1.0);
        assert!((state.w_hat[0] - 0.5).abs() < 1e-15);
        assert!((state.theta_hat[0] - 0.5).abs() < 1e-15);
        assert_eq!(state.samples, 1);
    }

    #[test]
    fn zero_reward_updates_still_grow_gram() {
        let b_hat = OrthonormalBasis::new(Matrix::identity(2)).unwrap();
        let s = spec(RadiusKind::Beta);
        let mut state = TaskState::new(0, 2, 2, 1.0);
        mtl_update(&mut state, &[1.0, 1.0], 1.0, &b_hat, &s).unwrap();
        let theta_before = state.theta_hat.clone();
        mtl_update(&mut state, &[1.0, 1.0], 0.0, &b_hat, &s).unwrap();
        assert_eq!(state.b_proj, vec![1.0, 1.0]);
        assert!(dot(&state.theta_hat, &state.theta_hat) < dot(&theta_before, &theta_before));
    }

    #[test]
    fn theta_hat_always_lies_in_the_basis_span() {
        // b_hat spanning the first coordinate only: theta_hat[1] stays 0.
        let m = Matrix::from_vec(2, 1, vec![1.0, 0.0]).unwrap();
        let b_hat = OrthonormalBasis::new(m).unwrap();
        let mut s = spec(RadiusKind::Beta);
        s.r = 1;
        let mut state = TaskState::new(0, 2, 1, 1.0);
        mtl_update(&mut state, &[0.3, -2.0], 1.7, &b_hat, &s).unwrap();
        assert_eq!(state.theta_hat[1], 0.0);
        assert_eq!(state.theta_hat[0], b_hat.lift(&state.w_hat)[0]);
    }

    #[test]
    fn baseline_with_identity_basis_matches_mtl_estimates() {
        // r = d: the projected ridge coincides with the full ridge.
        let d = 3;
        let b_hat = OrthonormalBasis::new(Matrix::identity(d)).unwrap();
        let mut sm = spec(RadiusKind::Beta);
        sm.r = d;
        let mut mtl = TaskState::new(0, d, d, 1.0);
        let mut base = BaselineTaskState::new(0, d, 1.0);
        let history = [
            (vec![1.0, -0.5, 0.2], 0.7),
            (vec![0.1, 0.9, -1.2], -0.3),
            (vec![2.0, 0.4, 0.5], 1.9),
            (vec![-0.7, 1.1, 0.8], 0.25),
        ];
        for (x, y) in &history {
            mtl_update(&mut mtl, x, *y, &b_hat, &sm).unwrap();
            baseline_update(&mut base, x, *y).unwrap();
        }
        for (a, b) in mtl.theta_hat.iter().zip(&base.theta_hat) {
            assert!((a - b).abs() < 1e-9, "mtl {a} vs baseline {b}");
        }
    }

    #[test]
    fn schedule_delta0_resolution() {
        let mut s = spec(RadiusKind::Beta);
        s.delta0_policy = Delta0Policy::ScheduleInvSqrt;
        s.l_policy = LPolicy::RunningMax;
        let ctx = s.resolve(None, 2.0, 16).unwrap();
        assert!((ctx.delta0 - 1.0 / (2.0 * 4.0)).abs() < 1e-15);
        // samples = 0 guards against division by zero.
        let ctx = s.resolve(None, 2.0, 0).unwrap();
        assert!((ctx.delta0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn measured_policy_requires_diagnostic() {
        let mut s = spec(RadiusKind::Beta);
        s.delta0_policy = Delta0Policy::MeasuredSd;
        assert!(s.resolve(None, 1.0, 3).is_err());
        let ctx = s.resolve(Some(0.42), 1.0, 3).unwrap();
        assert_eq!(ctx.delta0, 0.42);
    }
}
