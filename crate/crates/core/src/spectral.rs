//! Truncated spectral initialization of the shared subspace.
//!
//! From the exploration log the estimator builds the moment matrix
//! Θ̂₀ whose column t is (1/N₁) Φ_tᵀ ỹ_t, where ỹ_t zeroes rewards with
//! y² above the data-driven threshold α = C̃ · mean(y²). The estimated
//! shared basis B̂ is the top-r left singular subspace of Θ̂₀.
//!
//! The threshold keeps boundary samples (y² = α stays in), and with α
//! large enough to truncate nothing the estimator coincides with the
//! plain moment matrix (1/N₁) Σ x y eᵀ. Scaling Θ̂₀ does not move its
//! singular subspace, so the 1/N₁ prefactor is kept exactly as defined.

use crate::error::{Error, Result};
use crate::fixture::Fixture;
use crate::mat::{
    subspace_distance, top_r_left_singular_with_values, Matrix, OrthonormalBasis,
};

/// Eigenvalue ratio below which a direction counts as numerically null
/// when deciding whether Θ̂₀ actually carries r directions of signal.
const RANK_EPS: f64 = 1e-12;

/// Per-task exploration data: N₁ feature rows and rewards, row-aligned
/// with round order across every task.
#[derive(Debug, Clone)]
pub struct ExplorationLog {
    n1: usize,
    d: usize,
    t_count: usize,
    features: Vec<Matrix>,
    rewards: Vec<Vec<f64>>,
    filled: Vec<usize>,
}

impl ExplorationLog {
    pub fn new(n1: usize, d: usize, t_count: usize) -> Self {
        ExplorationLog {
            n1,
            d,
            t_count,
            features: (0..t_count).map(|_| Matrix::zeros(n1, d)).collect(),
            rewards: vec![vec![0.0; n1]; t_count],
            filled: vec![0; t_count],
        }
    }

    /// Record the chosen action and observed reward for `(round, task)`,
    /// rounds arriving in order 0..n1 per task.
    pub fn record(&mut self, round: usize, task: usize, x: &[f64], y: f64) -> Result<()> {
        if task >= self.t_count || round >= self.n1 || x.len() != self.d {
            return Err(Error::InvalidArgument(format!(
                "exploration record out of shape: round {round}, task {task}, x len {}",
                x.len()
            )));
        }
        if round != self.filled[task] {
            return Err(Error::InvalidArgument(format!(
                "task {task} expected round {} next, got {round}",
                self.filled[task]
            )));
        }
        for (j, &v) in x.iter().enumerate() {
            self.features[task].set(round, j, v);
        }
        self.rewards[task][round] = y;
        self.filled[task] = round + 1;
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.filled.iter().all(|&f| f == self.n1)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    /// Φ_t, the N₁×d feature matrix of task t.
    pub fn features(&self, task: usize) -> &Matrix {
        &self.features[task]
    }

    /// Y_t, the reward vector of task t.
    pub fn rewards(&self, task: usize) -> &[f64] {
        &self.rewards[task]
    }

    pub fn sample_count(&self) -> usize {
        self.n1 * self.t_count
    }
}

/// Output of the initialization step.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    /// Truncation threshold actually used (reward² units).
    pub alpha: f64,
    /// The d×T truncated moment matrix.
    pub theta0: Matrix,
    /// Estimated shared basis, always orthonormal.
    pub b_hat: OrthonormalBasis,
    /// SD(B̂, B*) when the ground truth was supplied.
    pub sd_to_truth: Option<f64>,
    /// Θ̂₀ exposed fewer than r numerically nonzero directions; the
    /// basis is still returned (padded from the Gram eigenvectors).
    pub rank_deficient: bool,
}

impl SpectralEstimate {
    /// Diagnostic dump of Θ̂₀ and B̂ in the fixture text format.
    pub fn to_fixture(&self) -> Fixture {
        let mut fx = Fixture::new("spectral_estimate");
        fx.push_scalar("alpha", self.alpha);
        fx.push_scalar("rank_deficient", if self.rank_deficient { 1.0 } else { 0.0 });
        if let Some(sd) = self.sd_to_truth {
            fx.push_scalar("sd_to_truth", sd);
        }
        fx.push_matrix("theta0", self.theta0.clone());
        fx.push_matrix("b_hat", self.b_hat.matrix().clone());
        fx
    }
}

/// α = c̃ · mean of y² over all N₁T exploration samples.
pub fn compute_alpha(log: &ExplorationLog, c_tilde: f64) -> Result<f64> {
    if !(c_tilde > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation multiplier c_tilde {c_tilde} must be positive"
        )));
    }
    if log.sample_count() == 0 {
        return Err(Error::InvalidArgument("empty exploration log".into()));
    }
    let mut total = 0.0;
    for t in 0..log.t_count() {
        for &y in log.rewards(t) {
            total += y * y;
        }
    }
    Ok(c_tilde * total / log.sample_count() as f64)
}

/// Elementwise truncation: keep yᵢ when yᵢ² ≤ α (boundary kept), else 0.
pub fn truncate_rewards(y: &[f64], alpha: f64) -> Vec<f64> {
    y.iter()
        .map(|&v| if v * v <= alpha { v } else { 0.0 })
        .collect()
}

/// Θ̂₀: column t is (1/N₁) Φ_tᵀ · truncate(Y_t, α); dimensions d×T.
pub fn assemble_theta0(log: &ExplorationLog, alpha: f64) -> Result<Matrix> {
    if alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "negative truncation threshold {alpha}"
        )));
    }
    if !log.is_complete() {
        return Err(Error::InvalidArgument(
            "exploration log is not fully populated".into(),
        ));
    }
    let (n1, d, t_count) = (log.n1(), log.d(), log.t_count());
    let mut theta0 = Matrix::zeros(d, t_count);
    for t in 0..t_count {
        let phi = log.features(t);
        let y = truncate_rewards(log.rewards(t), alpha);
        for n in 0..n1 {
            let yn = y[n];
            if yn == 0.0 {
                continue;
            }
            let row = phi.row(n);
            for j in 0..d {
                theta0.set(j, t, theta0.get(j, t) + row[j] * yn);
            }
        }
        let inv = 1.0 / n1 as f64;
        for j in 0..d {
            theta0.set(j, t, theta0.get(j, t) * inv);
        }
    }
    Ok(theta0)
}

/// Full initialization: threshold, truncate, assemble, extract the top-r
/// left singular subspace. Deterministic given the log.
pub fn spectral_init(
    log: &ExplorationLog,
    r: usize,
    c_tilde: f64,
    truth: Option<&OrthonormalBasis>,
) -> Result<SpectralEstimate> {
    if r == 0 || r > log.d().min(log.t_count()) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} violates 1 <= r <= min(d={}, T={})",
            log.d(),
            log.t_count()
        )));
    }
    let alpha = compute_alpha(log, c_tilde)?;
    let theta0 = assemble_theta0(log, alpha)?;
    let (b_hat, singular) = top_r_left_singular_with_values(&theta0, r)?;
    let nonzero = singular
        .iter()
        .filter(|&&s| s > RANK_EPS * singular[0].max(1e-300))
        .count();
    let rank_deficient = singular[0] == 0.0 || nonzero < r;
    let sd_to_truth = match truth {
        Some(b_star) => Some(subspace_distance(&b_hat, b_star)?),
        None => None,
    };
    Ok(SpectralEstimate {
        alpha,
        theta0,
        b_hat,
        sd_to_truth,
        rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_from(rows: &[(usize, Vec<f64>, f64)], n1: usize, d: usize, t_count: usize) -> ExplorationLog {
        let mut log = ExplorationLog::new(n1, d, t_count);
        let mut next = vec![0usize; t_count];
        for (task, x, y) in rows {
            log.record(next[*task], *task, x, *y).unwrap();
            next[*task] += 1;
        }
        log
    }

    #[test]
    fn alpha_constant_rewards() {
        // All rewards 1 with c_tilde 9 gives alpha 9; all-zero gives 0.
        let log = log_from(
            &[(0, vec![1.0, 0.0], 1.0), (1, vec![0.0, 1.0], 1.0)],
            1,
            2,
            2,
        );
        assert_eq!(compute_alpha(&log, 9.0).unwrap(), 9.0);

        let log = log_from(
            &[(0, vec![1.0, 0.0], 0.0), (1, vec![0.0, 1.0], 0.0)],
            1,
            2,
            2,
        );
        assert_eq!(compute_alpha(&log, 9.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_rejects_bad_multiplier() {
        let log = log_from(&[(0, vec![1.0], 1.0)], 1, 1, 1);
        assert!(compute_alpha(&log, 0.0).is_err());
        assert!(compute_alpha(&log, -3.0).is_err());
    }

    #[test]
    fn truncation_applies_indicator_with_boundary_kept() {
        // y = (1,2,3), alpha = 4: 2² = 4 is on the boundary and kept.
        assert_eq!(truncate_rewards(&[1.0, 2.0, 3.0], 4.0), vec![1.0, 2.0, 0.0]);
        // alpha = 0 zeroes everything except exact zeros.
        assert_eq!(truncate_rewards(&[0.5, 0.0, -0.1], 0.0), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn theta0_single_sample_definition() {
        // T=1, N1=1, x=(1,0), y=2, alpha >= 4: theta0 is the column (2,0).
        let log = log_from(&[(0, vec![1.0, 0.0], 2.0)], 1, 2, 1);
        let theta0 = assemble_theta0(&log, 4.0).unwrap();
        assert_eq!(theta0.get(0, 0), 2.0);
        assert_eq!(theta0.get(1, 0), 0.0);
    }

    #[test]
    fn theta0_full_truncation_gives_zero_matrix() {
        let log = log_from(
            &[(0, vec![1.0, 1.0], 2.0), (1, vec![1.0, -1.0], -1.0)],
            1,
            2,
            2,
        );
        let theta0 = assemble_theta0(&log, 0.0).unwrap();
        assert_eq!(theta0.max_abs(), 0.0);
    }

    #[test]
    fn scalar_case_recovers_sign_fixed_basis() {
        // r = d = T = 1, single sample x=1, y=3, alpha >= 9: b_hat = ±1.
        let log = log_from(&[(0, vec![1.0], 3.0)], 1, 1, 1);
        let est = spectral_init(&log, 1, 9.0, None).unwrap();
        assert!((est.b_hat.matrix().get(0, 0).abs() - 1.0).abs() < 1e-12);
        assert!(!est.rank_deficient);
    }

    #[test]
    fn huge_c_tilde_matches_moderate_when_truncation_inactive() {
        let rows = [
            (0usize, vec![0.3, -1.2, 0.5], 0.7),
            (0, vec![1.1, 0.2, -0.4], -0.2),
            (1, vec![-0.6, 0.9, 1.4], 1.1),
            (1, vec![0.8, -0.3, 0.1], 0.4),
        ];
        let log = log_from(&rows, 2, 3, 2);
        // moderate multiplier already above every y².
        let est_a = spectral_init(&log, 2, 50.0, None).unwrap();
        let est_b = spectral_init(&log, 2, 1e12, None).unwrap();
        assert_eq!(est_a.theta0.data(), est_b.theta0.data());
        assert_eq!(
            est_a.b_hat.matrix().data(),
            est_b.b_hat.matrix().data()
        );
    }

    #[test]
    fn rank_deficiency_is_flagged_not_fatal() {
        // Zero rewards: theta0 = 0, basis still returned, warning set.
        let log = log_from(
            &[(0, vec![1.0, 0.0, 0.0], 0.0), (1, vec![0.0, 1.0, 0.0], 0.0)],
            1,
            3,
            2,
        );
        let est = spectral_init(&log, 2, 9.0, None).unwrap();
        assert!(est.rank_deficient);
        assert_eq!(est.b_hat.rank(), 2);
    }

    #[test]
    fn incomplete_log_is_rejected() {
        let log = ExplorationLog::new(2, 2, 2);
        assert!(assemble_theta0(&log, 1.0).is_err());
    }

    #[test]
    fn out_of_order_record_is_rejected() {
        let mut log = ExplorationLog::new(2, 1, 1);
        assert!(log.record(1, 0, &[1.0], 0.5).is_err());
        log.record(0, 0, &[1.0], 0.5).unwrap();
        assert!(log.record(0, 0, &[1.0], 0.5).is_err());
    }
}
