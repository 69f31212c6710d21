//! Seeded Monte Carlo sessions checked against the analytic model.
//!
//! A session splits its trials into fixed blocks of [`BLOCK_SIZE`]. Block `k`
//! of a tally namespace `ns` draws from `derive_substream(seed, ns << 32 | k)`,
//! so the counts do not depend on how many lanes process the blocks.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::die::{hidden_measurement_probability, sample_roll, state_vector_of, DieState, RollDirection};
use crate::error::{Error, Result};
use crate::hilbert::{
    projector_for, sequential_joint_probability, total_probability_decomposition, Sign,
    TotalProbabilityDecomposition,
};
use crate::pair::{
    coincidence_distribution, discovery_variant_distribution, expectation_of, pair_label, rod_after, ChshReport,
    ExperimentChoice, JointOutcome, OutcomeDistribution, RodState, CHSH_PAIRS,
};
use crate::rng::{derive_substream, Substream};
use crate::stats::{ComparisonRow, FrequencyEstimate};

pub const BLOCK_SIZE: u64 = 4096;
pub const DEFAULT_SIGMA_LEVEL: f64 = 3.0;

const NS_SINGLE: u64 = 1;
const NS_SEQUENTIAL: u64 = 2;
const NS_DIRECT: u64 = 3;
const NS_CHSH: u64 = 16;

/// What a session runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Protocol {
    SingleRoll {
        state: DieState,
        direction: RollDirection,
    },
    SequentialRoll {
        state: DieState,
        first: RollDirection,
        then: RollDirection,
    },
    ChshSession,
    DiscoverySession {
        die_a: DieState,
        die_b: DieState,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: u64,
    pub sigma_level: f64,
    pub protocol: Protocol,
    /// Worker threads. Reports never depend on it, so it is not serialized.
    #[serde(skip, default = "one_lane")]
    pub lanes: usize,
}

fn one_lane() -> usize {
    1
}

impl RunConfig {
    pub fn new(seed: u64, trials: u64, protocol: Protocol) -> Self {
        RunConfig {
            seed,
            trials,
            sigma_level: DEFAULT_SIGMA_LEVEL,
            protocol,
            lanes: 1,
        }
    }

    pub fn single_roll(seed: u64, trials: u64, state: DieState, direction: RollDirection) -> Self {
        Self::new(seed, trials, Protocol::SingleRoll { state, direction })
    }

    pub fn sequential_roll(seed: u64, trials: u64, state: DieState, first: RollDirection, then: RollDirection) -> Self {
        Self::new(seed, trials, Protocol::SequentialRoll { state, first, then })
    }

    pub fn chsh(seed: u64, trials: u64) -> Self {
        Self::new(seed, trials, Protocol::ChshSession)
    }

    pub fn discovery(seed: u64, trials: u64, die_a: DieState, die_b: DieState) -> Self {
        Self::new(seed, trials, Protocol::DiscoverySession { die_a, die_b })
    }

    pub fn with_sigma_level(mut self, sigma_level: f64) -> Self {
        self.sigma_level = sigma_level;
        self
    }

    pub fn with_lanes(mut self, lanes: usize) -> Self {
        self.lanes = lanes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.sigma_level.is_finite() && self.sigma_level > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma level must be a positive number, got {}",
                self.sigma_level
            )));
        }
        if self.lanes == 0 {
            return Err(Error::InvalidConfig("lanes must be at least 1".into()));
        }
        Ok(())
    }

    fn estimate(&self, count: u64) -> Result<FrequencyEstimate> {
        FrequencyEstimate::new(count, self.trials, self.sigma_level)
    }
}

/// Rows of empirical-vs-analytic frequencies for one session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub config: RunConfig,
    pub rows: Vec<ComparisonRow>,
    /// Conjunction of every row's verdict.
    pub pass: bool,
}

impl ComparisonReport {
    fn new(config: RunConfig, rows: Vec<ComparisonRow>) -> Self {
        let pass = rows.iter().all(|r| r.pass);
        ComparisonReport { config, rows, pass }
    }

    pub fn total_count(&self) -> u64 {
        self.rows.iter().map(|r| r.estimate.count).sum()
    }
}

/// One target reading of a sequential session: the analytic decomposition of
/// `P(then = target)` over the first reading, next to its empirical counterpart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitRow {
    pub target: Sign,
    pub decomposition: TotalProbabilityDecomposition,
    pub closure_residual: f64,
    /// Frequency of `target` when the second roll is made on the prepared die.
    pub direct: FrequencyEstimate,
    /// Sum of the two sequential frequencies ending in `target`.
    pub empirical_classical_sum: f64,
    /// `direct − empirical_classical_sum`; estimates the interference term.
    pub empirical_deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialReport {
    #[serde(flatten)]
    pub comparison: ComparisonReport,
    pub deficits: Vec<DeficitRow>,
}

/// Per-pair statistics of a CHSH session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub label: String,
    pub choice_a: ExperimentChoice,
    pub choice_b: ExperimentChoice,
    pub n: u64,
    pub expectation: f64,
    pub half_width: f64,
    /// Samples with `o_a · o_b = −1`.
    pub anticorrelated: u64,
    /// Samples after which the rod had fallen off.
    pub detached: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshSessionReport {
    pub config: RunConfig,
    pub rows: Vec<ComparisonRow>,
    pub analytic: ChshReport,
    pub estimate: ChshReport,
    pub estimated_i: f64,
    /// Sum of the four expectation half-widths.
    pub i_ci: f64,
    pub pairs: Vec<PairSummary>,
    pub pass: bool,
}

impl ChshSessionReport {
    pub fn per_pair(&self) -> ComparisonReport {
        ComparisonReport::new(self.config.clone(), self.rows.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SessionReport {
    Single(ComparisonReport),
    Sequential(SequentialReport),
    Chsh(ChshSessionReport),
}

impl SessionReport {
    pub fn pass(&self) -> bool {
        match self {
            SessionReport::Single(r) => r.pass,
            SessionReport::Sequential(r) => r.comparison.pass,
            SessionReport::Chsh(r) => r.pass,
        }
    }
}

/// Runs whatever `cfg.protocol` describes.
pub fn run(cfg: &RunConfig) -> Result<SessionReport> {
    Ok(match cfg.protocol {
        Protocol::SingleRoll { .. } => SessionReport::Single(run_single_die_session(cfg)?),
        Protocol::SequentialRoll { .. } => SessionReport::Sequential(run_sequential_session(cfg)?),
        Protocol::ChshSession | Protocol::DiscoverySession { .. } => SessionReport::Chsh(run_chsh_session(cfg)?),
    })
}

/// Tallies `cfg.trials` outcomes of `trial` into `buckets` counters.
fn tally<F>(cfg: &RunConfig, namespace: u64, buckets: usize, trial: F) -> Vec<u64>
where
    F: Fn(&mut Substream) -> usize + Sync,
{
    let blocks = cfg.trials.div_ceil(BLOCK_SIZE);
    let run_block = |block: u64, counts: &mut [u64]| {
        let mut rng = derive_substream(cfg.seed, namespace << 32 | block);
        let start = block * BLOCK_SIZE;
        let end = (start + BLOCK_SIZE).min(cfg.trials);
        for _ in start..end {
            counts[trial(&mut rng)] += 1;
        }
    };

    let lanes = (cfg.lanes as u64).clamp(1, blocks);
    if lanes == 1 {
        let mut counts = vec![0; buckets];
        for block in 0..blocks {
            run_block(block, &mut counts);
        }
        return counts;
    }

    thread::scope(|scope| {
        let handles: Vec<_> = (0..lanes)
            .map(|lane| {
                let run_block = &run_block;
                scope.spawn(move || {
                    let mut counts = vec![0; buckets];
                    for block in (lane..blocks).step_by(lanes as usize) {
                        run_block(block, &mut counts);
                    }
                    counts
                })
            })
            .collect();
        handles.into_iter().fold(vec![0; buckets], |mut acc, h| {
            for (a, c) in acc.iter_mut().zip(h.join().expect("tally lane panicked")) {
                *a += c;
            }
            acc
        })
    })
}

fn sign_index(s: Sign) -> usize {
    match s {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

fn single_roll_params(cfg: &RunConfig) -> Result<(DieState, RollDirection)> {
    match cfg.protocol {
        Protocol::SingleRoll { state, direction } => Ok((state, direction)),
        other => Err(Error::InvalidConfig(format!("expected a single-roll protocol, got {other:?}"))),
    }
}

fn sequential_params(cfg: &RunConfig) -> Result<(DieState, RollDirection, RollDirection)> {
    match cfg.protocol {
        Protocol::SequentialRoll { state, first, then } => Ok((state, first, then)),
        other => Err(Error::InvalidConfig(format!("expected a sequential-roll protocol, got {other:?}"))),
    }
}

pub fn run_single_die_session(cfg: &RunConfig) -> Result<ComparisonReport> {
    let (state, direction) = single_roll_params(cfg)?;
    run_single_die_session_with_oracle(cfg, |reading| hidden_measurement_probability(state, direction, reading))
}

/// Like [`run_single_die_session`] but compares against `oracle(reading)`.
pub fn run_single_die_session_with_oracle<O>(cfg: &RunConfig, oracle: O) -> Result<ComparisonReport>
where
    O: Fn(Sign) -> f64,
{
    cfg.validate()?;
    let (state, direction) = single_roll_params(cfg)?;
    let counts = tally(cfg, NS_SINGLE, 2, |rng| sign_index(sample_roll(state, direction, rng).reading));
    let rows = Sign::ALL
        .into_iter()
        .map(|reading| {
            Ok(ComparisonRow::new(
                format!("{reading}"),
                oracle(reading),
                cfg.estimate(counts[sign_index(reading)])?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport::new(cfg.clone(), rows))
}

pub fn run_sequential_session(cfg: &RunConfig) -> Result<SequentialReport> {
    let (state, first, then) = sequential_params(cfg)?;
    let psi = state_vector_of(state);
    run_sequential_session_with_oracle(cfg, |r1, r2| {
        sequential_joint_probability(&psi, &projector_for(first, r1), &projector_for(then, r2))
    })
}

/// Like [`run_sequential_session`] but compares against `oracle(first, then)`.
pub fn run_sequential_session_with_oracle<O>(cfg: &RunConfig, oracle: O) -> Result<SequentialReport>
where
    O: Fn(Sign, Sign) -> f64,
{
    cfg.validate()?;
    let (state, first, then) = sequential_params(cfg)?;
    let pair_index = |r1: Sign, r2: Sign| 2 * sign_index(r1) + sign_index(r2);

    // The second roll acts on the die left by the first one.
    let counts = tally(cfg, NS_SEQUENTIAL, 4, |rng| {
        let a = sample_roll(state, first, rng);
        let b = sample_roll(a.final_state, then, rng);
        pair_index(a.reading, b.reading)
    });
    let direct = tally(cfg, NS_DIRECT, 2, |rng| sign_index(sample_roll(state, then, rng).reading));

    let mut rows = Vec::with_capacity(4);
    for r1 in Sign::ALL {
        for r2 in Sign::ALL {
            rows.push(ComparisonRow::new(
                format!("first={r1},then={r2}"),
                oracle(r1, r2),
                cfg.estimate(counts[pair_index(r1, r2)])?,
            ));
        }
    }

    let psi = state_vector_of(state);
    let alpha = projector_for(first, Sign::Plus);
    let deficits = Sign::ALL
        .into_iter()
        .map(|target| {
            let decomposition = total_probability_decomposition(&psi, &alpha, &projector_for(then, target));
            let direct = cfg.estimate(direct[sign_index(target)])?;
            let empirical_classical_sum = Sign::ALL
                .into_iter()
                .map(|r1| counts[pair_index(r1, target)] as f64 / cfg.trials as f64)
                .sum::<f64>();
            Ok(DeficitRow {
                target,
                closure_residual: decomposition.closure_residual(),
                decomposition,
                empirical_deficit: direct.p_hat - empirical_classical_sum,
                direct,
                empirical_classical_sum,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SequentialReport {
        comparison: ComparisonReport::new(cfg.clone(), rows),
        deficits,
    })
}

fn outcome_index(o: JointOutcome) -> usize {
    2 * sign_index(o.o_a) + sign_index(o.o_b)
}

/// Monte Carlo CHSH experiment: joint rolls for [`Protocol::ChshSession`],
/// face reading only for [`Protocol::DiscoverySession`].
pub fn run_chsh_session(cfg: &RunConfig) -> Result<ChshSessionReport> {
    cfg.validate()?;
    let source: Box<dyn Fn(ExperimentChoice, ExperimentChoice) -> OutcomeDistribution> = match cfg.protocol {
        Protocol::ChshSession => Box::new(coincidence_distribution),
        Protocol::DiscoverySession { die_a, die_b } => {
            Box::new(move |a, b| discovery_variant_distribution((die_a, die_b), a, b))
        }
        other => return Err(Error::InvalidConfig(format!("expected a CHSH protocol, got {other:?}"))),
    };
    let rolled = matches!(cfg.protocol, Protocol::ChshSession);

    let mut rows = Vec::with_capacity(16);
    let mut pairs = Vec::with_capacity(4);
    let mut analytic_e = [0.0; 4];
    let mut estimated_e = [0.0; 4];
    let mut half_widths = [0.0; 4];

    for (k, (a, b)) in CHSH_PAIRS.into_iter().enumerate() {
        let dist = source(a, b);
        // Buckets 0..4 hold outcomes with the rod attached, 4..8 detached.
        let counts = tally(cfg, NS_CHSH + k as u64, 8, |rng| {
            let outcome = dist.sample(rng);
            let rod = if rolled { rod_after(a, b) } else { RodState::Connected };
            outcome_index(outcome) + if rod == RodState::Detached { 4 } else { 0 }
        });
        let by_outcome: Vec<u64> = (0..4).map(|i| counts[i] + counts[i + 4]).collect();
        let label = pair_label(a, b);

        for outcome in JointOutcome::ALL {
            rows.push(ComparisonRow::new(
                format!("{label}:{outcome}"),
                dist.get(outcome),
                cfg.estimate(by_outcome[outcome_index(outcome)])?,
            ));
        }

        let positive: u64 = JointOutcome::ALL
            .into_iter()
            .filter(|o| o.product() > 0)
            .map(|o| by_outcome[outcome_index(o)])
            .sum();
        let p_positive = cfg.estimate(positive)?;
        analytic_e[k] = expectation_of(&dist);
        estimated_e[k] = 2.0 * p_positive.p_hat - 1.0;
        half_widths[k] = 2.0 * p_positive.ci_half_width;
        pairs.push(PairSummary {
            label: label.to_string(),
            choice_a: a,
            choice_b: b,
            n: cfg.trials,
            expectation: estimated_e[k],
            half_width: half_widths[k],
            anticorrelated: cfg.trials - positive,
            detached: counts[4..].iter().sum(),
        });
    }

    let analytic = ChshReport::from_expectations(analytic_e[0], analytic_e[1], analytic_e[2], analytic_e[3]);
    let estimate = ChshReport::from_expectations(estimated_e[0], estimated_e[1], estimated_e[2], estimated_e[3]);
    let pass = rows.iter().all(|r| r.pass);
    Ok(ChshSessionReport {
        config: cfg.clone(),
        rows,
        analytic,
        estimated_i: estimate.i_value,
        estimate,
        i_ci: half_widths.iter().sum(),
        pairs,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_configs_are_rejected() {
        let cfg = RunConfig::single_roll(1, 0, DieState::PlusZ, RollDirection::Z);
        assert!(matches!(run_single_die_session(&cfg), Err(Error::InvalidConfig(_))));
        let cfg = RunConfig::single_roll(1, 10, DieState::PlusZ, RollDirection::Z).with_sigma_level(-1.0);
        assert!(run_single_die_session(&cfg).is_err());
        let cfg = RunConfig::single_roll(1, 10, DieState::PlusZ, RollDirection::Z).with_lanes(0);
        assert!(run_single_die_session(&cfg).is_err());
        let cfg = RunConfig::chsh(1, 10);
        assert!(run_single_die_session(&cfg).is_err());
        assert!(run_sequential_session(&cfg).is_err());
        let cfg = RunConfig::single_roll(1, 10, DieState::PlusZ, RollDirection::Z);
        assert!(run_chsh_session(&cfg).is_err());
    }

    #[test]
    fn tally_is_lane_independent_across_partial_blocks() {
        let trials = 3 * BLOCK_SIZE + 17;
        let base = RunConfig::single_roll(11, trials, DieState::PlusX, RollDirection::Z);
        let one = tally(&base, 1, 2, |rng| sign_index(sample_roll(DieState::PlusX, RollDirection::Z, rng).reading));
        for lanes in [2, 3, 4, 16] {
            let cfg = base.clone().with_lanes(lanes);
            let many = tally(&cfg, 1, 2, |rng| {
                sign_index(sample_roll(DieState::PlusX, RollDirection::Z, rng).reading)
            });
            assert_eq!(one, many);
        }
        assert_eq!(one.iter().sum::<u64>(), trials);
    }

    #[test]
    fn eigenstate_session_counts_every_trial() {
        let cfg = RunConfig::single_roll(3, 100, DieState::PlusZ, RollDirection::Z);
        let r = run_single_die_session(&cfg).unwrap();
        assert!(r.pass);
        assert_eq!(r.rows[0].estimate.count, 100);
        assert_eq!(r.rows[1].estimate.count, 0);
    }

    #[test]
    fn repeated_measurement_is_certain() {
        let cfg = RunConfig::sequential_roll(8, 1000, DieState::PlusZ, RollDirection::Z, RollDirection::Z);
        let r = run_sequential_session(&cfg).unwrap();
        assert!(r.comparison.pass);
        assert_eq!(r.comparison.rows[0].label, "first=+1,then=+1");
        assert_eq!(r.comparison.rows[0].estimate.count, 1000);
        assert_eq!(r.comparison.total_count(), 1000);
    }

    #[test]
    fn single_trial_chsh() {
        let r = run_chsh_session(&RunConfig::chsh(4, 1)).unwrap();
        for e in r.estimate.expectations() {
            assert!(e == 1.0 || e == -1.0);
        }
        assert_eq!(r.analytic.i_value, 4.0);
    }

    #[test]
    fn rod_detaches_only_on_single_rolls() {
        let r = run_chsh_session(&RunConfig::chsh(4, 500)).unwrap();
        let detached: Vec<u64> = r.pairs.iter().map(|p| p.detached).collect();
        assert_eq!(detached, vec![0, 500, 500, 0]);
        assert_eq!(r.pairs[0].anticorrelated, 500);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig::discovery(7, 12, DieState::PlusX, DieState::MinusX).with_lanes(4);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(!json.contains("lanes"));
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg.with_lanes(1));
    }
}
