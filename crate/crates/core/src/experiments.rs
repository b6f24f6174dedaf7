//! Monte Carlo studies: connection probability, single-gateway localization
//! error, the two-gateway line scenario and aggregate uplink rates.
//!
//! Every trial draws from its own random stream keyed by
//! `(base_seed, sweep point, trial index)`, and per-trial outcomes are
//! reduced in trial order. Results therefore do not depend on how many
//! threads run the trials. Within a trial, one channel realization is shared
//! by every threshold, hop mode and routing algorithm being compared.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{realize_channel, ChannelParams, ChannelRealization};
use crate::connectivity::{adjacency, all_connected};
use crate::error::{invalid, Result};
use crate::privacy::{FlowRatio, JointHistogram, LocalizationSample, RatioEstimator};
use crate::routing::{self, rate_matrix, Algorithm, HopMode, RoutingResult};
use crate::scenario::{self, Point2D, Scenario};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Trials are evaluated in parallel in blocks of this many, then folded in
/// order.
const TRIAL_BLOCK: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioRecipe {
    /// Devices uniform in a centered square.
    Square {
        #[serde(default = "default_side")]
        side_m: f64,
        #[serde(default = "default_one")]
        num_gateways: usize,
        /// Pin gateway 1 at the center of the square.
        #[serde(default)]
        gateway_at_center: bool,
    },
    /// Two gateways at `(0, ±gateway_offset_m)`, UEs on the same line.
    Line {
        #[serde(default = "default_offset")]
        gateway_offset_m: f64,
        #[serde(default = "default_side")]
        extent_m: f64,
        #[serde(default = "default_line_ues")]
        num_ues: usize,
    },
}

fn default_side() -> f64 {
    100.0
}
fn default_one() -> usize {
    1
}
fn default_offset() -> f64 {
    20.0
}
fn default_line_ues() -> usize {
    28
}
fn default_trials() -> usize {
    1000
}
fn default_pos_bins() -> usize {
    40
}
fn default_ratio_bins() -> usize {
    20
}
fn default_modes() -> Vec<HopMode> {
    vec![HopMode::SingleHop, HopMode::MultiHop]
}
fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Umf, Algorithm::Ppmf]
}

impl Default for ScenarioRecipe {
    fn default() -> Self {
        ScenarioRecipe::Square {
            side_m: default_side(),
            num_gateways: 1,
            gateway_at_center: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweeps {
    /// Connectivity thresholds; empty means the channel's `gamma_db`.
    #[serde(default)]
    pub gamma_db: Vec<f64>,
    /// Total device counts (connectivity).
    #[serde(default)]
    pub num_devices: Vec<usize>,
    /// UE counts (localization, rates).
    #[serde(default)]
    pub num_ues: Vec<usize>,
    /// Gateway counts (rates).
    #[serde(default)]
    pub num_gateways: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweeps: Sweeps,
    #[serde(default = "default_modes")]
    pub modes: Vec<HopMode>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_pos_bins")]
    pub pos_bins: usize,
    #[serde(default = "default_ratio_bins")]
    pub ratio_bins: usize,
    /// Also emit one routing row per UE and trial (rate experiment).
    #[serde(default)]
    pub per_ue_output: bool,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        ExperimentBlock {
            trials: default_trials(),
            seed: 0,
            sweeps: Sweeps::default(),
            modes: default_modes(),
            algorithms: default_algorithms(),
            pos_bins: default_pos_bins(),
            ratio_bins: default_ratio_bins(),
            per_ue_output: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: ScenarioRecipe,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub experiment: ExperimentBlock,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if e.modes.is_empty() || e.algorithms.is_empty() {
            return Err(invalid("modes and algorithms must be nonempty"));
        }
        match self.scenario {
            ScenarioRecipe::Square { side_m, num_gateways, .. } => {
                if !(side_m > 0.0) {
                    return Err(invalid("side_m must be positive"));
                }
                if num_gateways == 0 {
                    return Err(invalid("num_gateways must be at least 1"));
                }
            }
            ScenarioRecipe::Line {
                gateway_offset_m,
                extent_m,
                num_ues,
            } => {
                if !(gateway_offset_m > 0.0 && extent_m > 0.0) || num_ues == 0 {
                    return Err(invalid("line scenario needs positive offset, extent and UE count"));
                }
            }
        }
        Ok(())
    }

    pub fn gammas(&self) -> Vec<f64> {
        if self.experiment.sweeps.gamma_db.is_empty() {
            vec![self.channel.gamma_db]
        } else {
            self.experiment.sweeps.gamma_db.clone()
        }
    }

    fn square(&self) -> Result<(f64, usize, bool)> {
        match self.scenario {
            ScenarioRecipe::Square {
                side_m,
                num_gateways,
                gateway_at_center,
            } => Ok((side_m, num_gateways, gateway_at_center)),
            _ => Err(invalid("this experiment needs a square scenario")),
        }
    }
}

fn nonempty<'a, T>(v: &'a [T], name: &str) -> Result<&'a [T]> {
    if v.is_empty() {
        Err(invalid(format!("sweep `{name}` must be nonempty")))
    } else {
        Ok(v)
    }
}

/// Random stream for one trial at one sweep point.
pub fn trial_rng(base_seed: u64, point: u64, trial: usize) -> ChaCha8Rng {
    let key = base_seed ^ point.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial as u64);
    rng
}

/// Sample mean and `std / √n` (sample standard deviation).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn run_trials<T, F>(range: std::ops::Range<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    range.into_par_iter().map(f).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricPoint {
    pub labels: Vec<(String, String)>,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub extra: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub experiment: String,
    pub metric: String,
    pub base_seed: u64,
    pub trials: usize,
    pub version: String,
    pub points: Vec<MetricPoint>,
}

impl MetricsReport {
    fn new(experiment: &str, metric: &str, cfg: &ExperimentConfig) -> Self {
        MetricsReport {
            experiment: experiment.into(),
            metric: metric.into(),
            base_seed: cfg.experiment.seed,
            trials: cfg.experiment.trials,
            version: VERSION.into(),
            points: Vec::new(),
        }
    }

    /// Finds the point whose labels include every `(key, value)` given.
    pub fn point(&self, labels: &[(&str, &str)]) -> Option<&MetricPoint> {
        self.points.iter().find(|p| {
            labels
                .iter()
                .all(|(k, v)| p.labels.iter().any(|(pk, pv)| pk == k && pv == v))
        })
    }

    /// Header row plus one row per sweep point.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let Some(first) = self.points.first() else {
            return out;
        };
        let mut header: Vec<&str> = first.labels.iter().map(|(k, _)| k.as_str()).collect();
        header.extend([self.metric.as_str(), "stderr", "trials"]);
        header.extend(first.extra.iter().map(|(k, _)| k.as_str()));
        out.push_str(&header.join(","));
        out.push('\n');
        for p in &self.points {
            let mut fields: Vec<String> = p.labels.iter().map(|(_, v)| v.clone()).collect();
            fields.push(p.mean.to_string());
            fields.push(p.stderr.to_string());
            fields.push(p.trials.to_string());
            fields.extend(p.extra.iter().map(|(_, v)| v.to_string()));
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

fn labels(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

// ---------------------------------------------------------------------------
// connection probability

/// All-connected indicator per swept `γ` for one drop of `n` devices.
pub fn p_conn_trial(cfg: &ExperimentConfig, point: usize, n: usize, trial: usize) -> Result<Vec<bool>> {
    let (side, _, _) = cfg.square()?;
    let mut rng = trial_rng(cfg.experiment.seed, point as u64, trial);
    let s = scenario::place_uniform_square(n, 1, side, &mut rng)?;
    let ch = realize_channel(&s, &cfg.channel, &mut rng)?;
    Ok(cfg.gammas().iter().map(|&g| all_connected(&adjacency(&ch, g))).collect())
}

pub fn estimate_p_conn(cfg: &ExperimentConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let ns = nonempty(&cfg.experiment.sweeps.num_devices, "num_devices")?;
    let gammas = cfg.gammas();
    let trials = cfg.experiment.trials;
    let mut report = MetricsReport::new("connectivity", "p_conn", cfg);
    for (point, &n) in ns.iter().enumerate() {
        let outcomes = run_trials(0..trials, |t| p_conn_trial(cfg, point, n, t))?;
        for (k, g) in gammas.iter().enumerate() {
            let hits: Vec<f64> = outcomes.iter().map(|o| if o[k] { 1.0 } else { 0.0 }).collect();
            let (mean, stderr) = mean_and_stderr(&hits);
            report.points.push(MetricPoint {
                labels: labels(&[("gamma_db", g.to_string()), ("n", n.to_string())]),
                mean,
                stderr,
                trials,
                extra: vec![],
            });
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// single-gateway localization

/// UEs that belong to the VPMN of gateway 0: a direct link above `γ` in
/// single hop, the gateway's connected component in multihop.
pub fn vpmn_members(ch: &ChannelRealization, num_gateways: usize, gamma_db: f64, mode: HopMode) -> Vec<usize> {
    let n = ch.len();
    match mode {
        HopMode::SingleHop => (num_gateways..n)
            .filter(|&v| (0..num_gateways).any(|g| ch.gain_db(v, g) > gamma_db))
            .collect(),
        HopMode::MultiHop => {
            let g = adjacency(ch, gamma_db);
            let labels = g.component_labels();
            (num_gateways..n)
                .filter(|&v| (0..num_gateways).any(|gw| labels[gw] == labels[v]))
                .collect()
        }
    }
}

/// Member distances to the gateway summed per `[mode][γ]`, with the member
/// count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MemberDistances {
    pub sum: f64,
    pub count: usize,
}

impl MemberDistances {
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

pub fn localization_trial(cfg: &ExperimentConfig, point: usize, num_ues: usize, trial: usize) -> Result<Vec<Vec<MemberDistances>>> {
    let (side, num_gateways, centered) = cfg.square()?;
    if num_gateways != 1 {
        return Err(invalid("single-gateway localization needs num_gateways = 1"));
    }
    let mut rng = trial_rng(cfg.experiment.seed, point as u64, trial);
    let mut s = scenario::place_uniform_square(num_ues + 1, 1, side, &mut rng)?;
    if centered {
        s = s.with_position(0, Point2D::ORIGIN)?;
    }
    let ch = realize_channel(&s, &cfg.channel, &mut rng)?;
    let gw = s.positions[0];
    let gammas = cfg.gammas();
    Ok(cfg
        .experiment
        .modes
        .iter()
        .map(|&mode| {
            gammas
                .iter()
                .map(|&g| {
                    let members = vpmn_members(&ch, 1, g, mode);
                    MemberDistances {
                        sum: members.iter().map(|&v| s.positions[v].distance(&gw)).sum(),
                        count: members.len(),
                    }
                })
                .collect()
        })
        .collect())
}

/// Pooled mean `Σ sums / Σ counts` over trials and its delta-method standard
/// error, treating trials as the independent units.
pub fn pooled_mean_and_stderr(per_trial: &[MemberDistances]) -> (f64, f64) {
    let t = per_trial.len();
    let count: usize = per_trial.iter().map(|m| m.count).sum();
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = per_trial.iter().map(|m| m.sum).sum::<f64>() / count as f64;
    if t < 2 {
        return (mean, 0.0);
    }
    let avg_count = count as f64 / t as f64;
    let ss: f64 = per_trial
        .iter()
        .map(|m| (m.sum - mean * m.count as f64).powi(2))
        .sum();
    (mean, (ss / (t * (t - 1)) as f64).sqrt() / avg_count)
}

pub fn localization_experiment_single_gateway(cfg: &ExperimentConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let ms = nonempty(&cfg.experiment.sweeps.num_ues, "num_ues")?;
    let gammas = cfg.gammas();
    let trials = cfg.experiment.trials;
    let mut report = MetricsReport::new("localization", "u_bar_m", cfg);
    let mut by_m = Vec::with_capacity(ms.len());
    for (point, &m) in ms.iter().enumerate() {
        by_m.push(run_trials(0..trials, |t| localization_trial(cfg, point, m, t))?);
    }
    for (mi, &mode) in cfg.experiment.modes.iter().enumerate() {
        for (gi, g) in gammas.iter().enumerate() {
            for (k, &m) in ms.iter().enumerate() {
                let cells: Vec<MemberDistances> = by_m[k].iter().map(|o| o[mi][gi]).collect();
                let (mean, stderr) = pooled_mean_and_stderr(&cells);
                let with_members = cells.iter().filter(|c| c.count > 0).count();
                let members: usize = cells.iter().map(|c| c.count).sum();
                report.points.push(MetricPoint {
                    labels: labels(&[
                        ("mode", mode.to_string()),
                        ("gamma_db", g.to_string()),
                        ("num_ues", m.to_string()),
                    ]),
                    mean,
                    stderr,
                    trials,
                    extra: vec![
                        ("member_trial_fraction".into(), with_members as f64 / trials as f64),
                        ("mean_members".into(), members as f64 / trials as f64),
                    ],
                });
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// two-gateway line scenario

/// `(mode, algorithm)` combinations in configuration order.
fn combos(cfg: &ExperimentConfig) -> Vec<(HopMode, Algorithm)> {
    let mut out = Vec::new();
    for &m in &cfg.experiment.modes {
        for &a in &cfg.experiment.algorithms {
            out.push((m, a));
        }
    }
    out
}

fn line_geometry(cfg: &ExperimentConfig) -> Result<(f64, f64, usize)> {
    match cfg.scenario {
        ScenarioRecipe::Line {
            gateway_offset_m,
            extent_m,
            num_ues,
        } => Ok((gateway_offset_m, extent_m, num_ues)),
        _ => Err(invalid("line-scenario needs a line scenario")),
    }
}

/// Per-UE `(position, β)` samples for one trial, one list per
/// `(mode, algorithm)` combination.
pub fn line_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<Vec<LocalizationSample>>> {
    let (offset, extent, num_ues) = line_geometry(cfg)?;
    let mut rng = trial_rng(cfg.experiment.seed, 0, trial);
    let s = scenario::place_line(num_ues, offset, extent, &mut rng)?;
    let ch = realize_channel(&s, &cfg.channel, &mut rng)?;
    let mut out = Vec::new();
    for &mode in &cfg.experiment.modes {
        let rates = rate_matrix(&ch, &cfg.channel, 2, mode)?;
        for &alg in &cfg.experiment.algorithms {
            let samples = s
                .ue_indices()
                .map(|v| {
                    let r = routing::route(&rates, v, alg)?;
                    Ok(LocalizationSample {
                        trial,
                        position: s.positions[v].y,
                        ratio: crate::privacy::flow_ratio(&r)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(samples);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineScenarioOutcome {
    pub mode: HopMode,
    pub algorithm: Algorithm,
    /// Joint histogram over every trial.
    pub histogram: JointHistogram,
    /// Estimator fitted on even trials only.
    pub estimator: RatioEstimator,
    /// `|p - p̂|` on odd trials.
    pub mean_error: f64,
    pub stderr: f64,
    pub eval_samples: usize,
    pub visible_fraction: f64,
    /// Largest `|β - 1|` over visible samples (0 for privacy-preserving
    /// routing).
    pub max_ratio_deviation: f64,
}

#[derive(Default)]
struct LineAccumulator {
    train: Option<JointHistogram>,
    full: Option<JointHistogram>,
    train_pos_sum: f64,
    train_count: usize,
    eval: Vec<(f64, FlowRatio)>,
    total: usize,
    visible: usize,
    max_dev: f64,
}

pub fn line_scenario_experiment(cfg: &ExperimentConfig) -> Result<(Vec<LineScenarioOutcome>, MetricsReport)> {
    cfg.validate()?;
    let (_, extent, _) = line_geometry(cfg)?;
    let range = (-extent / 2.0, extent / 2.0);
    let (pb, rb) = (cfg.experiment.pos_bins, cfg.experiment.ratio_bins);
    let combos = combos(cfg);
    let mut acc: Vec<LineAccumulator> = combos
        .iter()
        .map(|_| -> Result<LineAccumulator> {
            Ok(LineAccumulator {
                train: Some(JointHistogram::new(range, pb, rb)?),
                full: Some(JointHistogram::new(range, pb, rb)?),
                ..LineAccumulator::default()
            })
        })
        .collect::<Result<_>>()?;

    let trials = cfg.experiment.trials;
    let mut start = 0;
    while start < trials {
        let end = (start + TRIAL_BLOCK).min(trials);
        let block = run_trials(start..end, |t| line_trial(cfg, t))?;
        for per_trial in block {
            for (a, samples) in acc.iter_mut().zip(per_trial) {
                for s in samples {
                    a.total += 1;
                    if s.ratio == FlowRatio::NoTraffic {
                        continue;
                    }
                    a.visible += 1;
                    let dev = match s.ratio {
                        FlowRatio::Finite(b) => (b - 1.0).abs(),
                        _ => f64::INFINITY,
                    };
                    a.max_dev = a.max_dev.max(dev);
                    a.full.as_mut().expect("initialized").add(s.position, s.ratio);
                    if s.trial % 2 == 0 {
                        a.train.as_mut().expect("initialized").add(s.position, s.ratio);
                        a.train_pos_sum += s.position;
                        a.train_count += 1;
                    } else {
                        a.eval.push((s.position, s.ratio));
                    }
                }
            }
        }
        start = end;
    }

    let mut report = MetricsReport::new("line-scenario", "u_bar_m", cfg);
    let mut outcomes = Vec::new();
    for ((mode, algorithm), a) in combos.into_iter().zip(acc) {
        if a.train_count == 0 || a.eval.is_empty() {
            return Err(crate::Error::UndefinedMetric(format!(
                "{mode}/{algorithm}: no visible samples on one side of the held-out split"
            )));
        }
        let estimator = RatioEstimator {
            histogram: a.train.expect("initialized"),
            fallback: a.train_pos_sum / a.train_count as f64,
        };
        let errors = a
            .eval
            .iter()
            .map(|&(p, r)| Ok((p - estimator.estimate(r)?).abs()))
            .collect::<Result<Vec<f64>>>()?;
        let (mean, stderr) = mean_and_stderr(&errors);
        let visible_fraction = a.visible as f64 / a.total as f64;
        report.points.push(MetricPoint {
            labels: labels(&[("mode", mode.to_string()), ("algorithm", algorithm.to_string())]),
            mean,
            stderr,
            trials,
            extra: vec![
                ("eval_samples".into(), errors.len() as f64),
                ("visible_fraction".into(), visible_fraction),
            ],
        });
        outcomes.push(LineScenarioOutcome {
            mode,
            algorithm,
            histogram: a.full.expect("initialized"),
            estimator,
            mean_error: mean,
            stderr,
            eval_samples: errors.len(),
            visible_fraction,
            max_ratio_deviation: a.max_dev,
        });
    }
    Ok((outcomes, report))
}

/// Histograms of a line-scenario run as one CSV:
/// `mode,algorithm,pos_center,ratio_center,count`.
pub fn line_histograms_csv(outcomes: &[LineScenarioOutcome]) -> String {
    let mut out = String::from("mode,algorithm,pos_center,ratio_center,count\n");
    for o in outcomes {
        o.histogram.write_csv_rows(&mut out, &format!("{},{},", o.mode, o.algorithm));
    }
    out
}

// ---------------------------------------------------------------------------
// aggregate rates

/// Routing results of one drop, one entry per `(mode, algorithm)` in
/// configuration order.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTrial {
    pub scenario: Scenario,
    pub channel: ChannelRealization,
    pub results: Vec<(HopMode, Algorithm, Vec<RoutingResult>)>,
}

impl RateTrial {
    pub fn total(&self, mode: HopMode, algorithm: Algorithm) -> Option<f64> {
        self.results
            .iter()
            .find(|(m, a, _)| *m == mode && *a == algorithm)
            .map(|(_, _, r)| r.iter().map(|x| x.rate).sum())
    }

    pub fn per_ue(&self, mode: HopMode, algorithm: Algorithm) -> Option<&[RoutingResult]> {
        self.results
            .iter()
            .find(|(m, a, _)| *m == mode && *a == algorithm)
            .map(|(_, _, r)| r.as_slice())
    }
}

pub fn rate_trial(cfg: &ExperimentConfig, point: usize, num_gateways: usize, num_ues: usize, trial: usize) -> Result<RateTrial> {
    let (side, _, _) = cfg.square()?;
    let mut rng = trial_rng(cfg.experiment.seed, point as u64, trial);
    let s = scenario::place_uniform_square(num_gateways + num_ues, num_gateways, side, &mut rng)?;
    let ch = realize_channel(&s, &cfg.channel, &mut rng)?;
    let mut results = Vec::new();
    for &mode in &cfg.experiment.modes {
        let rates = rate_matrix(&ch, &cfg.channel, num_gateways, mode)?;
        for &alg in &cfg.experiment.algorithms {
            results.push((mode, alg, routing::route_all(&rates, alg)?));
        }
    }
    Ok(RateTrial {
        scenario: s,
        channel: ch,
        results,
    })
}

/// Sweep points of the rate experiment: `(point index, S, M)`.
pub fn rate_points(cfg: &ExperimentConfig) -> Result<Vec<(usize, usize, usize)>> {
    let ss = nonempty(&cfg.experiment.sweeps.num_gateways, "num_gateways")?;
    let ms = nonempty(&cfg.experiment.sweeps.num_ues, "num_ues")?;
    let mut out = Vec::new();
    for &s in ss {
        if s == 0 {
            return Err(invalid("num_gateways entries must be at least 1"));
        }
        for &m in ms {
            out.push((out.len(), s, m));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateExperimentOutput {
    pub report: MetricsReport,
    /// Per-UE routing rows, filled when `per_ue_output` is set.
    pub per_ue_csv: Option<String>,
}

pub fn rate_experiment(cfg: &ExperimentConfig) -> Result<RateExperimentOutput> {
    cfg.validate()?;
    let points = rate_points(cfg)?;
    let combos = combos(cfg);
    let trials = cfg.experiment.trials;
    let mut report = MetricsReport::new("rates", "c_tot", cfg);
    let mut per_ue = cfg.experiment.per_ue_output.then(String::new);
    for (point, s, m) in points {
        let mut totals = vec![Vec::with_capacity(trials); combos.len()];
        let mut start = 0;
        while start < trials {
            let end = (start + TRIAL_BLOCK).min(trials);
            let block = run_trials(start..end, |t| rate_trial(cfg, point, s, m, t))?;
            for (t, outcome) in (start..end).zip(block) {
                for (k, (mode, _, results)) in outcome.results.iter().enumerate() {
                    totals[k].push(results.iter().map(|r| r.rate).sum());
                    if let Some(csv) = per_ue.as_mut() {
                        if csv.is_empty() {
                            csv.push_str("num_gateways,num_ues,");
                            csv.push_str(&RoutingResult::csv_header(s));
                            csv.push('\n');
                        }
                        for r in results {
                            let _ = writeln!(csv, "{s},{m},{}", r.csv_row(t, *mode));
                        }
                    }
                }
            }
            start = end;
        }
        for ((mode, alg), vals) in combos.iter().zip(&totals) {
            let (mean, stderr) = mean_and_stderr(vals);
            report.points.push(MetricPoint {
                labels: labels(&[
                    ("num_gateways", s.to_string()),
                    ("num_ues", m.to_string()),
                    ("mode", mode.to_string()),
                    ("algorithm", alg.to_string()),
                ]),
                mean,
                stderr,
                trials,
                extra: vec![],
            });
        }
    }
    Ok(RateExperimentOutput {
        report,
        per_ue_csv: per_ue,
    })
}
