//! Report emission: regret.csv, summary.json, regret.svg, and optional
//! diagnostics/fixture dumps.
//!
//! Identical configurations produce byte-identical CSV and JSON. The SVG
//! differs between runs only in its generation-timestamp comment, and
//! wall-clock timing is reported on stderr by the CLI rather than inside
//! any artifact.

use std::fs;
use std::path::PathBuf;

use super::config::ExperimentConfig;
use super::{aggregate, run_trials, RegretLog, TrialMeta, TrialResult};
use crate::error::Result;
use crate::harness::svg::{line_plot, Series};

/// One aggregated sweep arm (a plain run is a single arm).
pub struct ArmReport {
    pub label: String,
    pub field_value: Option<f64>,
    pub cfg: ExperimentConfig,
    pub log: RegretLog,
    /// Kept for diagnostics emission.
    pub results: Vec<TrialResult>,
}

/// A full command execution ready for emission.
pub struct RunReport {
    pub command: String,
    pub base_cfg: ExperimentConfig,
    pub arms: Vec<ArmReport>,
}

/// Run every arm of the configured experiment and aggregate each.
pub fn execute(cfg: &ExperimentConfig, command: &str) -> Result<RunReport> {
    cfg.validate()?;
    let mut arms = Vec::new();
    for (label, field_value, arm_cfg) in cfg.arms()? {
        let results = run_trials(&arm_cfg)?;
        let log = aggregate(&results)?;
        arms.push(ArmReport {
            label,
            field_value,
            cfg: arm_cfg,
            log,
            results,
        });
    }
    Ok(RunReport {
        command: command.to_string(),
        base_cfg: cfg.clone(),
        arms,
    })
}

#[derive(serde::Serialize)]
struct ProtocolNote {
    action_sets: &'static str,
    exploration: &'static str,
    l_bound: &'static str,
    incoherence: &'static str,
    instances: &'static str,
}

const PROTOCOL: ProtocolNote = ProtocolNote {
    action_sets: "each (round, task) draws a fresh finite set of k_actions i.i.d. standard-normal feature vectors",
    exploration: "rounds 1..n1 pick uniformly at random from the sampled set; regret is counted in both phases against the set optimum",
    l_bound: "the feature-norm bound L is the running maximum of all sampled action norms",
    incoherence: "incoherence constants are not prescribed; the measured mu = max/min column norm of W* is reported per trial",
    instances: "every trial draws a fresh ground-truth instance from (seed, trial)",
};

#[derive(serde::Serialize)]
struct ArmSummary<'a> {
    label: &'a str,
    sweep_value: Option<f64>,
    d: usize,
    t_count: usize,
    r: usize,
    trial_count: usize,
    final_per_task_regret_mean: f64,
    final_per_task_regret_stderr: f64,
    mean_total_regret: f64,
    trials: &'a [TrialMeta],
}

#[derive(serde::Serialize)]
struct Summary<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    trial_count: usize,
    config: &'a ExperimentConfig,
    protocol: ProtocolNote,
    arms: Vec<ArmSummary<'a>>,
}

fn render_csv(report: &RunReport) -> String {
    let mut csv = String::from("round,mean_per_task_cum_regret,stderr,agent,d,T,r,seed\n");
    for arm in &report.arms {
        for (i, (m, se)) in arm
            .log
            .mean_per_task_cum
            .iter()
            .zip(&arm.log.stderr_per_task_cum)
            .enumerate()
        {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                i + 1,
                m,
                se,
                arm.cfg.agent,
                arm.cfg.d,
                arm.cfg.t_count,
                arm.cfg.r,
                arm.cfg.seed
            ));
        }
    }
    csv
}

fn render_summary(report: &RunReport) -> Result<String> {
    let arms: Vec<ArmSummary> = report
        .arms
        .iter()
        .map(|arm| ArmSummary {
            label: &arm.label,
            sweep_value: arm.field_value,
            d: arm.cfg.d,
            t_count: arm.cfg.t_count,
            r: arm.cfg.r,
            trial_count: arm.log.trial_count,
            final_per_task_regret_mean: arm.log.final_mean(),
            final_per_task_regret_stderr: arm.log.final_stderr(),
            mean_total_regret: arm
                .log
                .trials
                .iter()
                .map(|t| t.total_regret)
                .sum::<f64>()
                / arm.log.trial_count as f64,
            trials: &arm.log.trials,
        })
        .collect();
    let summary = Summary {
        tool: "mtlb",
        version: env!("CARGO_PKG_VERSION"),
        command: &report.command,
        trial_count: report.base_cfg.trials,
        config: &report.base_cfg,
        protocol: PROTOCOL,
        arms,
    };
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| crate::error::Error::Parse(format!("summary serialization: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn render_diagnostics(report: &RunReport) -> String {
    let mut csv = String::from("label,trial,task,round,radius,chosen,top1,top2,containment\n");
    for arm in &report.arms {
        for res in &arm.results {
            for d in &res.diagnostics {
                let containment = match d.containment {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "",
                };
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    arm.label, d.trial, d.task, d.round, d.radius, d.chosen, d.top1, d.top2,
                    containment
                ));
            }
        }
    }
    csv
}

/// Write all artifacts into the configured output directory and return
/// the paths written.
pub fn emit_reports(report: &RunReport) -> Result<Vec<PathBuf>> {
    let dir = &report.base_cfg.output_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let csv_path = dir.join("regret.csv");
    fs::write(&csv_path, render_csv(report))?;
    written.push(csv_path);

    let json_path = dir.join("summary.json");
    fs::write(&json_path, render_summary(report)?)?;
    written.push(json_path);

    let series: Vec<Series> = report
        .arms
        .iter()
        .map(|arm| Series {
            label: format!("{} (trials={})", arm.label, arm.log.trial_count),
            values: arm.log.mean_per_task_cum.clone(),
        })
        .collect();
    let svg_path = dir.join("regret.svg");
    fs::write(
        &svg_path,
        line_plot(&series, "round", "per-task cumulative regret"),
    )?;
    written.push(svg_path);

    if report.base_cfg.diagnostics {
        let diag_path = dir.join("diagnostics.csv");
        fs::write(&diag_path, render_diagnostics(report))?;
        written.push(diag_path);
    }

    if report.base_cfg.dump_spectral {
        for arm in &report.arms {
            for res in &arm.results {
                if let Some(est) = &res.spectral {
                    let path = dir.join(format!("spectral_{}_trial{}.txt", arm.label, res.trial));
                    est.to_fixture().write_file(&path)?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::super::config::{ConfigDraft, Sweep, SweepField};
    use super::super::AgentKind;
    use super::*;

    fn cfg(dir: &std::path::Path) -> ExperimentConfig {
        let mut cfg = ConfigDraft {
            d: Some(6),
            t_count: Some(4),
            r: Some(2),
            n1: Some(4),
            n_total: Some(20),
            k_actions: Some(4),
            trials: Some(2),
            seed: Some(5),
            output_dir: Some(dir.to_path_buf()),
            ..ConfigDraft::default()
        }
        .finish(None)
        .unwrap();
        cfg.agent = AgentKind::MtlBeta;
        cfg
    }

    #[test]
    fn csv_row_count_is_rounds_times_arms() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = cfg(dir.path());
        config.sweep = Some(Sweep {
            field: SweepField::R,
            values: vec![1.0, 2.0],
        });
        let report = execute(&config, "sweep").unwrap();
        let csv = render_csv(&report);
        let rows = csv.lines().count() - 1;
        assert_eq!(rows, config.n_total * 2);
        let svg = line_plot(
            &report
                .arms
                .iter()
                .map(|a| Series {
                    label: a.label.clone(),
                    values: a.log.mean_per_task_cum.clone(),
                })
                .collect::<Vec<_>>(),
            "round",
            "y",
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn emission_is_byte_stable_for_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let config = cfg(dir.path());
        let report = execute(&config, "run").unwrap();
        let csv1 = render_csv(&report);
        let json1 = render_summary(&report).unwrap();
        let report2 = execute(&config, "run").unwrap();
        assert_eq!(csv1, render_csv(&report2));
        assert_eq!(json1, render_summary(&report2).unwrap());
    }

    #[test]
    fn emit_writes_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = cfg(dir.path());
        config.diagnostics = true;
        config.dump_spectral = true;
        let report = execute(&config, "run").unwrap();
        let paths = emit_reports(&report).unwrap();
        assert!(paths.iter().any(|p| p.ends_with("regret.csv")));
        assert!(paths.iter().any(|p| p.ends_with("summary.json")));
        assert!(paths.iter().any(|p| p.ends_with("regret.svg")));
        assert!(paths.iter().any(|p| p.ends_with("diagnostics.csv")));
        assert!(paths.iter().any(|p| p
            .file_name()
            .unwrap()
            .to_string_lossy()
            .starts_with("spectral_")));
        for p in &paths {
            assert!(p.exists());
        }
        // summary.json parses and echoes the config.
        let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["config"]["d"], 6);
        assert_eq!(v["arms"][0]["trial_count"], 2);
    }

    #[test]
    fn unwritable_output_dir_is_an_io_error() {
        let mut config = cfg(std::path::Path::new("/dev/null/nope"));
        config.output_dir = PathBuf::from("/dev/null/nope");
        let report = execute(&config, "run").unwrap();
        assert!(matches!(
            emit_reports(&report),
            Err(crate::error::Error::Io(_))
        ));
    }
}
