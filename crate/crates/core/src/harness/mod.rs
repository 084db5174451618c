//! Experiment orchestration: seeded trials, regret accounting,
//! multi-trial aggregation, and report emission.
//!
//! One trial = one fresh ground-truth instance + one full pass of the
//! algorithm: N₁ uniform-random exploration rounds feeding the spectral
//! step, then confidence-ellipsoid selection to the horizon. Regret is
//! pseudo-regret against the best action of each sampled set and is
//! accrued in both phases, so curves begin with the linear exploration
//! segment.
//!
//! Trials are independent and run on a worker pool; every random draw
//! comes from a stream keyed by (seed, trial, phase, round, task), so
//! parallel and serial execution produce identical results and the
//! aggregation is a deterministic reduction over trial order.

pub mod config;
pub mod report;
pub mod svg;

use rayon::prelude::*;

use crate::agents::{
    baseline_select, baseline_update, mtl_select, mtl_update, radius_baseline, radius_beta,
    radius_beta_prime, BaselineTaskState, PolicyDecision, RadiusKind, RadiusSpec, TaskState,
};
use crate::env::{
    best_action_value, draw_reward, instance_stats, sample_action_set, BanditInstance,
    InstanceStats,
};
use crate::error::{Error, Result};
use crate::mat::{quad_form, OrthonormalBasis};
use crate::rng::{Phase, StreamKey};
use crate::spectral::{spectral_init, ExplorationLog, SpectralEstimate};
use config::{AgentKind, ExperimentConfig};
use rand::Rng;

/// Optional per-decision diagnostic row.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiagRecord {
    pub trial: usize,
    pub task: usize,
    pub round: usize,
    /// Radius used for the selection at this round.
    pub radius: f64,
    pub chosen: usize,
    /// Two largest optimistic indices of the candidate set.
    pub top1: f64,
    pub top2: f64,
    /// Whether ‖θ̂ − θ*‖_{V̄} stayed within the post-update radius;
    /// absent for the random policy.
    pub containment: Option<bool>,
}

/// Everything one trial produces.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial: usize,
    pub config_hash: u64,
    pub t_count: usize,
    pub n_total: usize,
    /// Instantaneous pseudo-regret summed over tasks, one entry per round.
    pub per_round_regret: Vec<f64>,
    /// SD(B̂, B*) measured after the spectral step (shared-subspace agents).
    pub sd_b_hat: Option<f64>,
    /// Truncation threshold the spectral step used.
    pub alpha: Option<f64>,
    pub rank_deficient: bool,
    /// Instance statistics with `l_bound` filled by the running maximum.
    pub stats: InstanceStats,
    pub clamp_warnings: u64,
    pub diagnostics: Vec<DiagRecord>,
    /// Carried only under `dump_spectral`.
    pub spectral: Option<SpectralEstimate>,
}

impl TrialResult {
    /// Per-task cumulative regret curve (total divided by T).
    pub fn per_task_cumulative(&self) -> Vec<f64> {
        let t = self.t_count as f64;
        let mut cum = 0.0;
        self.per_round_regret
            .iter()
            .map(|r| {
                cum += r;
                cum / t
            })
            .collect()
    }
}

enum Runner {
    Mtl {
        b_hat: OrthonormalBasis,
        measured_sd: Option<f64>,
        states: Vec<TaskState>,
    },
    Baseline {
        states: Vec<BaselineTaskState>,
    },
    Random,
}

/// Run one seeded trial of the configured experiment.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialResult> {
    cfg.validate()?;
    let instance_seed = StreamKey::new(cfg.seed, trial as u64, Phase::Instance, 0, 0).derive_u64();
    let inst = BanditInstance::sample(cfg.d, cfg.t_count, cfg.r, cfg.sigma, instance_seed)?;
    let mut stats = instance_stats(&inst)?;

    let mut per_round_regret = vec![0.0; cfg.n_total];
    let mut running_l: f64 = 0.0;
    let mut log = ExplorationLog::new(cfg.n1, cfg.d, cfg.t_count);

    // Phase 1: uniform-random exploration, rewards recorded for the
    // spectral step, regret accrued against the sampled set's optimum.
    for n in 1..=cfg.n1 {
        for t in 0..cfg.t_count {
            let mut rng = StreamKey::new(cfg.seed, trial as u64, Phase::Explore, n as u64, t as u64).rng();
            let inner = (|| -> Result<()> {
                let set = sample_action_set(&inst, n, t, cfg.k_actions, &mut rng)?;
                running_l = running_l.max(set.max_norm());
                let (_, best_value) = best_action_value(&inst, t, &set);
                let choice = rng.random_range(0..set.k());
                let x = set.action(choice);
                let draw = draw_reward(&inst, t, x, &mut rng);
                log.record(n - 1, t, x, draw.observed)?;
                per_round_regret[n - 1] += best_value - draw.mean;
                Ok(())
            })();
            inner.map_err(|e| e.in_trial(trial, n, t))?;
        }
    }

    // Spectral initialization between phases (shared-subspace agents only).
    let needs_basis = matches!(cfg.agent, AgentKind::MtlBeta | AgentKind::MtlBetaPrime);
    let spectral = if needs_basis || cfg.dump_spectral {
        let c_tilde = cfg
            .c_tilde
            .unwrap_or(9.0 * stats.kappa * stats.kappa * stats.mu * stats.mu);
        Some(spectral_init(&log, cfg.r, c_tilde, Some(inst.b_star()))?)
    } else {
        None
    };
    let sd_b_hat = spectral.as_ref().and_then(|e| e.sd_to_truth);

    let spec = RadiusSpec {
        kind: match cfg.agent {
            AgentKind::MtlBeta => RadiusKind::Beta,
            AgentKind::MtlBetaPrime => RadiusKind::BetaPrime,
            AgentKind::IndependentOful => RadiusKind::BaselineOful,
            AgentKind::Random => RadiusKind::Zero,
        },
        lambda: cfg.lambda,
        delta: cfg.delta,
        delta0_policy: cfg.delta0_policy,
        mu_sigma_term: stats.w_max,
        sigma: cfg.sigma,
        r: cfg.r,
        l_policy: cfg.l_policy,
        beta_prime_horizon: cfg.beta_prime_horizon,
        n_total: cfg.n_total,
        n1: cfg.n1,
        s_bound: inst.max_theta_norm(),
    };
    spec.validate()?;

    let mut runner = match cfg.agent {
        AgentKind::MtlBeta | AgentKind::MtlBetaPrime => Runner::Mtl {
            b_hat: spectral
                .as_ref()
                .expect("spectral step ran for shared-subspace agents")
                .b_hat
                .clone(),
            measured_sd: sd_b_hat,
            states: (0..cfg.t_count)
                .map(|t| TaskState::new(t, cfg.d, cfg.r, cfg.lambda))
                .collect(),
        },
        AgentKind::IndependentOful => Runner::Baseline {
            states: (0..cfg.t_count)
                .map(|t| BaselineTaskState::new(t, cfg.d, cfg.lambda))
                .collect(),
        },
        AgentKind::Random => Runner::Random,
    };

    let mut clamp_warnings = 0u64;
    let mut diagnostics = Vec::new();

    // Phase 2: select → observe → update, state starting from scratch.
    for n in (cfg.n1 + 1)..=cfg.n_total {
        for t in 0..cfg.t_count {
            let mut rng = StreamKey::new(cfg.seed, trial as u64, Phase::Oful, n as u64, t as u64).rng();
            let inner = (|| -> Result<()> {
                let set = sample_action_set(&inst, n, t, cfg.k_actions, &mut rng)?;
                running_l = running_l.max(set.max_norm());
                let (_, best_value) = best_action_value(&inst, t, &set);

                let decision: Option<PolicyDecision> = match &mut runner {
                    Runner::Random => None,
                    Runner::Mtl {
                        measured_sd,
                        states,
                        ..
                    } => {
                        let ctx = spec.resolve(*measured_sd, running_l, states[t].samples)?;
                        Some(mtl_select(&states[t], &set, &spec, &ctx)?)
                    }
                    Runner::Baseline { states } => {
                        let ctx = spec.resolve(None, running_l, states[t].samples)?;
                        Some(baseline_select(&states[t], &set, &spec, &ctx)?)
                    }
                };
                let choice = match &decision {
                    Some(d) => {
                        clamp_warnings += d.clamp_warnings;
                        d.chosen
                    }
                    None => rng.random_range(0..set.k()),
                };
                let x = set.action(choice);
                let draw = draw_reward(&inst, t, x, &mut rng);
                per_round_regret[n - 1] += best_value - draw.mean;

                match &mut runner {
                    Runner::Random => {}
                    Runner::Mtl { b_hat, states, .. } => {
                        mtl_update(&mut states[t], x, draw.observed, b_hat, &spec)?;
                    }
                    Runner::Baseline { states } => {
                        baseline_update(&mut states[t], x, draw.observed)?;
                    }
                }

                if cfg.diagnostics {
                    if let Some(d) = decision {
                        let containment =
                            containment_bit(&runner, &spec, t, inst.theta_task(t), running_l)?;
                        let (top1, top2) = top_two(&d.index_values);
                        diagnostics.push(DiagRecord {
                            trial,
                            task: t,
                            round: n,
                            radius: d.radius_used,
                            chosen: d.chosen,
                            top1,
                            top2,
                            containment,
                        });
                    }
                }
                Ok(())
            })();
            inner.map_err(|e| e.in_trial(trial, n, t))?;
        }
    }

    stats.l_bound = running_l;
    Ok(TrialResult {
        trial,
        config_hash: cfg.config_hash(),
        t_count: cfg.t_count,
        n_total: cfg.n_total,
        per_round_regret,
        sd_b_hat,
        alpha: spectral.as_ref().map(|e| e.alpha),
        rank_deficient: spectral.as_ref().is_some_and(|e| e.rank_deficient),
        stats,
        clamp_warnings,
        diagnostics,
        spectral: if cfg.dump_spectral { spectral } else { None },
    })
}

/// Post-update containment check ‖θ̂ₙ,ₜ − θ*_t‖_{V̄ₙ,ₜ} ≤ radiusₙ,ₜ,
/// the event the confidence-set guarantee promises.
fn containment_bit(
    runner: &Runner,
    spec: &RadiusSpec,
    task: usize,
    theta_star: &[f64],
    running_l: f64,
) -> Result<Option<bool>> {
    match runner {
        Runner::Random => Ok(None),
        Runner::Mtl {
            measured_sd,
            states,
            ..
        } => {
            let state = &states[task];
            let ctx = spec.resolve(*measured_sd, running_l, state.samples)?;
            let radius = match spec.kind {
                RadiusKind::Beta => radius_beta(spec, state, &ctx)?,
                RadiusKind::BetaPrime => radius_beta_prime(spec, state, &ctx)?,
                RadiusKind::Zero => 0.0,
                RadiusKind::BaselineOful => unreachable!("mtl runner with baseline radius"),
            };
            Ok(Some(error_vbar_norm(&state.vbar, &state.theta_hat, theta_star) <= radius))
        }
        Runner::Baseline { states } => {
            let state = &states[task];
            let ctx = spec.resolve(None, running_l, state.samples)?;
            let radius = match spec.kind {
                RadiusKind::BaselineOful => {
                    radius_baseline(spec, state.vbar.rows(), state.samples, &ctx)?
                }
                RadiusKind::Zero => 0.0,
                _ => unreachable!("baseline runner with shared-subspace radius"),
            };
            Ok(Some(error_vbar_norm(&state.vbar, &state.theta_hat, theta_star) <= radius))
        }
    }
}

fn error_vbar_norm(vbar: &crate::mat::Matrix, theta_hat: &[f64], theta_star: &[f64]) -> f64 {
    let err: Vec<f64> = theta_hat
        .iter()
        .zip(theta_star)
        .map(|(a, b)| a - b)
        .collect();
    quad_form(vbar, &err).max(0.0).sqrt()
}

fn top_two(values: &[f64]) -> (f64, f64) {
    let mut top1 = f64::NEG_INFINITY;
    let mut top2 = f64::NEG_INFINITY;
    for &v in values {
        if v > top1 {
            top2 = top1;
            top1 = v;
        } else if v > top2 {
            top2 = v;
        }
    }
    (top1, if values.len() > 1 { top2 } else { top1 })
}

/// Run all configured trials on the worker pool. Results arrive indexed
/// by trial, so the output is identical to a serial loop.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial))
        .collect()
}

/// Summary statistics of one trial, carried into reports.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TrialMeta {
    pub trial: usize,
    pub sd_b_hat: Option<f64>,
    pub alpha: Option<f64>,
    pub rank_deficient: bool,
    pub kappa: f64,
    pub mu: f64,
    pub nsr: f64,
    pub w_max: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub l_bound: f64,
    pub clamp_warnings: u64,
    pub final_per_task_regret: f64,
    pub total_regret: f64,
}

/// Aggregated regret curves over trials of a single configuration.
#[derive(Debug, Clone)]
pub struct RegretLog {
    pub config_hash: u64,
    pub t_count: usize,
    pub n_total: usize,
    pub trial_count: usize,
    /// Pointwise mean of per-task cumulative regret.
    pub mean_per_task_cum: Vec<f64>,
    /// Pointwise standard error (sample std / √trials; zero for one trial).
    pub stderr_per_task_cum: Vec<f64>,
    pub trials: Vec<TrialMeta>,
}

impl RegretLog {
    pub fn final_mean(&self) -> f64 {
        *self.mean_per_task_cum.last().expect("nonempty horizon")
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr_per_task_cum.last().expect("nonempty horizon")
    }
}

/// Pointwise mean and standard-error curves across same-config trials.
pub fn aggregate(results: &[TrialResult]) -> Result<RegretLog> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidArgument("aggregate of zero trials".into()))?;
    if results
        .iter()
        .any(|r| r.config_hash != first.config_hash || r.n_total != first.n_total)
    {
        return Err(Error::InvalidArgument(
            "aggregate over mixed configurations".into(),
        ));
    }
    let n = first.n_total;
    let trials = results.len();
    let curves: Vec<Vec<f64>> = results.iter().map(|r| r.per_task_cumulative()).collect();

    let mut mean = vec![0.0; n];
    let mut stderr = vec![0.0; n];
    for i in 0..n {
        let m = curves.iter().map(|c| c[i]).sum::<f64>() / trials as f64;
        mean[i] = m;
        if trials > 1 {
            let var = curves.iter().map(|c| (c[i] - m) * (c[i] - m)).sum::<f64>()
                / (trials - 1) as f64;
            stderr[i] = (var / trials as f64).sqrt();
        }
    }
    let metas = results
        .iter()
        .map(|r| {
            let cum = r.per_task_cumulative();
            TrialMeta {
                trial: r.trial,
                sd_b_hat: r.sd_b_hat,
                alpha: r.alpha,
                rank_deficient: r.rank_deficient,
                kappa: r.stats.kappa,
                mu: r.stats.mu,
                nsr: r.stats.nsr,
                w_max: r.stats.w_max,
                sigma_max: r.stats.sigma_max,
                sigma_min: r.stats.sigma_min,
                l_bound: r.stats.l_bound,
                clamp_warnings: r.clamp_warnings,
                final_per_task_regret: *cum.last().expect("nonempty"),
                total_regret: r.per_round_regret.iter().sum(),
            }
        })
        .collect();
    Ok(RegretLog {
        config_hash: first.config_hash,
        t_count: first.t_count,
        n_total: n,
        trial_count: trials,
        mean_per_task_cum: mean,
        stderr_per_task_cum: stderr,
        trials: metas,
    })
}

#[cfg(test)]
mod tests {
    use super::config::{ConfigDraft, Sweep, SweepField};
    use super::*;

    pub(crate) fn small_config(agent: AgentKind) -> ExperimentConfig {
        let mut cfg = ConfigDraft {
            d: Some(8),
            t_count: Some(6),
            r: Some(2),
            n1: Some(5),
            n_total: Some(40),
            k_actions: Some(5),
            sigma: Some(0.1),
            trials: Some(2),
            seed: Some(11),
            ..ConfigDraft::default()
        }
        .finish(None)
        .unwrap();
        cfg.agent = agent;
        cfg
    }

    #[test]
    fn trials_are_bit_reproducible() {
        let cfg = small_config(AgentKind::MtlBeta);
        let a = run_trial(&cfg, 0).unwrap();
        let b = run_trial(&cfg, 0).unwrap();
        assert_eq!(a.per_round_regret, b.per_round_regret);
        assert_eq!(a.sd_b_hat, b.sd_b_hat);
    }

    #[test]
    fn regret_is_nonnegative_and_cumulative_monotone() {
        for agent in [
            AgentKind::MtlBeta,
            AgentKind::MtlBetaPrime,
            AgentKind::IndependentOful,
            AgentKind::Random,
        ] {
            let cfg = small_config(agent);
            let res = run_trial(&cfg, 0).unwrap();
            assert!(res.per_round_regret.iter().all(|&x| x >= 0.0), "{agent:?}");
            let cum = res.per_task_cumulative();
            assert!(cum.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{agent:?}");
        }
    }

    #[test]
    fn parallel_and_serial_execution_agree() {
        let cfg = small_config(AgentKind::MtlBeta);
        let parallel = run_trials(&cfg).unwrap();
        let serial: Vec<_> = (0..cfg.trials).map(|i| run_trial(&cfg, i).unwrap()).collect();
        for (p, s) in parallel.iter().zip(&serial) {
            assert_eq!(p.per_round_regret, s.per_round_regret);
        }
        let agg_p = aggregate(&parallel).unwrap();
        let agg_s = aggregate(&serial).unwrap();
        assert_eq!(agg_p.mean_per_task_cum, agg_s.mean_per_task_cum);
    }

    #[test]
    fn aggregate_single_slice_has_zero_stderr() {
        let cfg = small_config(AgentKind::Random);
        let res = vec![run_trial(&cfg, 0).unwrap()];
        let log = aggregate(&res).unwrap();
        assert_eq!(log.trial_count, 1);
        assert!(log.stderr_per_task_cum.iter().all(|&s| s == 0.0));
        let cum = res[0].per_task_cumulative();
        assert_eq!(log.mean_per_task_cum, cum);
    }

    #[test]
    fn aggregate_identical_slices_has_zero_stderr() {
        let cfg = small_config(AgentKind::Random);
        let r = run_trial(&cfg, 0).unwrap();
        let log = aggregate(&[r.clone(), r]).unwrap();
        assert!(log.stderr_per_task_cum.iter().all(|&s| s.abs() < 1e-15));
    }

    #[test]
    fn aggregate_rejects_mixed_configs() {
        let a = run_trial(&small_config(AgentKind::Random), 0).unwrap();
        let b = run_trial(&small_config(AgentKind::MtlBeta), 0).unwrap();
        assert!(aggregate(&[a, b]).is_err());
    }

    #[test]
    fn diagnostics_record_containment_bits() {
        let mut cfg = small_config(AgentKind::MtlBeta);
        cfg.diagnostics = true;
        cfg.delta0_policy = crate::agents::Delta0Policy::MeasuredSd;
        let res = run_trial(&cfg, 0).unwrap();
        let expected = (cfg.n_total - cfg.n1) * cfg.t_count;
        assert_eq!(res.diagnostics.len(), expected);
        assert!(res.diagnostics.iter().all(|d| d.containment.is_some()));
        assert!(res.diagnostics.iter().all(|d| d.radius >= 0.0));
    }

    #[test]
    fn sweep_arms_run_independently() {
        let mut cfg = small_config(AgentKind::MtlBeta);
        cfg.trials = 1;
        cfg.sweep = Some(Sweep {
            field: SweepField::R,
            values: vec![1.0, 2.0],
        });
        for (_, _, arm) in cfg.arms().unwrap() {
            let res = run_trials(&arm).unwrap();
            assert_eq!(res.len(), 1);
        }
    }
}
