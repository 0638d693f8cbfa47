//! End-to-end key recovery: set up the experiment (hidden key, oracle,
//! plaintext tuple that pins the key down uniquely), check the all-zero key
//! with plain comparisons, otherwise recover the key as the period of the
//! hiding function, and verify the candidate against the known pairs.
//!
//! Everything downstream of setup sees only what the attack model grants:
//! the cipher family, the plaintext tuple, and the masked oracle. The hidden
//! key travels exclusively through the [`Examiner`] returned alongside each
//! trial, which exists so tests and reports can render a verdict.
//!
//! Query budget of a successful trial: `r` classical encryptions (the known
//! pairs, fetched once at mask zero and reused for both the zero-key check
//! and final verification), no decryptions ever, and one superposition query
//! per period-finding sample.

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cipher::{
    self, CipherError, CipherParams, ToyCipher, DESK_SCALE_MAX_KEY_BITS,
};
use crate::gf2::BitVec;
use crate::hiding::{self, HidingError};
use crate::oracle::{Examiner, RelatedKeyOracle};
use crate::simon::{
    recover_period, AnalyticSampler, AttackStats, RecoveryError, StatevectorSampler,
};

/// Which sampler drives period recovery. The statevector backend is the
/// honest attack; the analytic backend samples the closed-form distribution
/// from the examiner's key and exists as a statistical cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Statevector,
    Analytic,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Statevector => "statevector",
            Backend::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Cipher(#[from] CipherError),
    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub params: CipherParams,
    /// Base seed; trial `t` runs on stream `t` of this seed.
    pub seed: u64,
    pub trials: u64,
    /// Period-finding sample budget per trial.
    pub max_samples: u64,
    /// Starting pair count for the tuple search; defaults to the unicity
    /// estimate for the parameters.
    pub pairs_override: Option<usize>,
    pub backend: Backend,
    /// Tuple-search attempts per pair count.
    pub tuple_attempts: usize,
    /// Worker threads for campaigns; results are identical for any value.
    pub jobs: usize,
}

impl AttackConfig {
    pub fn new(params: CipherParams, seed: u64) -> Self {
        AttackConfig {
            params,
            seed,
            trials: 1,
            max_samples: 4 * params.key_bits as u64,
            pairs_override: None,
            backend: Backend::Statevector,
            tuple_attempts: 16,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        if self.params.key_bits > DESK_SCALE_MAX_KEY_BITS {
            return Err(CipherError::NotDeskScale {
                key_bits: self.params.key_bits,
                max: DESK_SCALE_MAX_KEY_BITS,
            }
            .into());
        }
        if self.trials == 0 {
            return Err(AttackError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.max_samples == 0 {
            return Err(AttackError::InvalidConfig(
                "max_samples must be at least 1".into(),
            ));
        }
        if self.pairs_override == Some(0) {
            return Err(AttackError::InvalidConfig("pairs must be at least 1".into()));
        }
        if self.tuple_attempts == 0 {
            return Err(AttackError::InvalidConfig(
                "tuple_attempts must be at least 1".into(),
            ));
        }
        if self.jobs == 0 {
            return Err(AttackError::InvalidConfig("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why a trial did not produce a verified key.
#[derive(Debug, Clone)]
pub enum FailureReason {
    TupleSearch(CipherError),
    HidingFunction(HidingError),
    Recovery(RecoveryError),
    VerificationFailed { candidate: BitVec },
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::TupleSearch(e) => write!(f, "unicity tuple construction failed: {e}"),
            FailureReason::HidingFunction(e) => write!(f, "hiding function evaluation failed: {e}"),
            FailureReason::Recovery(e) => write!(f, "period recovery failed: {e}"),
            FailureReason::VerificationFailed { candidate } => {
                write!(f, "candidate key {candidate} failed verification against the known pairs")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttackOutcome {
    /// The verified key, when the attack succeeded.
    pub recovered_key: Option<BitVec>,
    /// True iff the candidate reproduces the oracle's mask-zero ciphertexts.
    pub verified: bool,
    /// True when step one already identified the all-zero key.
    pub zero_key_shortcut: bool,
    /// Pair count of the tuple in use, once one was found.
    pub pairs: Option<usize>,
    pub failure: Option<FailureReason>,
    pub stats: AttackStats,
}

impl AttackOutcome {
    pub fn success(&self) -> bool {
        self.verified && self.failure.is_none() && self.recovered_key.is_some()
    }
}

/// One finished trial plus the examination capability for the verdict.
pub struct TrialRun {
    pub trial: u64,
    pub outcome: AttackOutcome,
    pub examiner: Examiner,
}

impl TrialRun {
    /// Examiner verdict: did the attack output exactly the hidden key?
    pub fn sound(&self) -> bool {
        self.outcome.recovered_key.as_ref() == Some(self.examiner.secret_key())
    }
}

/// Step one of the attack: does the target encrypt like the all-zero key?
/// Fetches the mask-zero ciphertexts (`r` classical queries, one per block)
/// and compares blockwise; unicity makes a match conclusive.
pub fn check_zero_key(
    tuple: &cipher::PlaintextTuple,
    cipher: &ToyCipher,
    oracle: &RelatedKeyOracle,
) -> Result<bool, CipherError> {
    let key_bits = cipher.params().key_bits;
    let target = oracle.related_encrypt_tuple(&BitVec::zeros(key_bits), tuple)?;
    let local = cipher.encrypt_tuple(&BitVec::zeros(key_bits), tuple)?;
    Ok(local == target)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs one trial: draws the hidden key uniformly from the trial's stream
/// and attacks it.
pub fn run_attack(config: &AttackConfig, trial: u64) -> Result<TrialRun, AttackError> {
    config.validate()?;
    let mut rng = trial_rng(config.seed, trial);
    let key = BitVec::random(config.params.key_bits, &mut rng);
    Ok(attack_instance(config, trial, key, &mut rng))
}

/// Test hook: runs one trial against a caller-chosen hidden key (for
/// example, forcing the all-zero key to exercise step one).
pub fn run_attack_with_key(
    config: &AttackConfig,
    trial: u64,
    key: BitVec,
) -> Result<TrialRun, AttackError> {
    config.validate()?;
    if key.width() != config.params.key_bits {
        return Err(CipherError::WidthMismatch {
            what: "key",
            expected: config.params.key_bits,
            got: key.width(),
        }
        .into());
    }
    let mut rng = trial_rng(config.seed, trial);
    Ok(attack_instance(config, trial, key, &mut rng))
}

fn attack_instance(
    config: &AttackConfig,
    trial: u64,
    key: BitVec,
    rng: &mut ChaCha12Rng,
) -> TrialRun {
    let started = Instant::now();
    let params = config.params;
    let (oracle, examiner) =
        RelatedKeyOracle::new(params, &key).expect("config validation checked widths");
    let cipher = ToyCipher::new(params);

    // Experiment setup: the model grants the adversary pairs that determine
    // the key uniquely, so the harness constructs such a tuple first.
    let start_pairs = config
        .pairs_override
        .unwrap_or_else(|| cipher::min_unicity_pairs(params.key_bits, params.block_bits));
    let tuple = match cipher::find_unicity_tuple_with_pairs(
        &cipher,
        &key,
        start_pairs,
        rng,
        config.tuple_attempts,
    ) {
        Ok(tuple) => tuple,
        Err(e) => {
            return finish(
                trial,
                examiner,
                &oracle,
                started,
                AttackOutcome {
                    recovered_key: None,
                    verified: false,
                    zero_key_shortcut: false,
                    pairs: None,
                    failure: Some(FailureReason::TupleSearch(e)),
                    stats: AttackStats::default(),
                },
            )
        }
    };
    let pairs = Some(tuple.len());

    // From here on the attack sees only (params, tuple, oracle). The known
    // pairs are fetched once and reused for verification.
    let zero = BitVec::zeros(params.key_bits);
    let target = oracle
        .related_encrypt_tuple(&zero, &tuple)
        .expect("widths already validated");
    let zero_image = cipher
        .encrypt_tuple(&zero, &tuple)
        .expect("widths already validated");
    if zero_image == target {
        return finish(
            trial,
            examiner,
            &oracle,
            started,
            AttackOutcome {
                recovered_key: Some(zero),
                verified: true,
                zero_key_shortcut: true,
                pairs,
                failure: None,
                stats: AttackStats::default(),
            },
        );
    }

    let recovery = match config.backend {
        Backend::Statevector => {
            let table = match hiding::evaluate_full_domain(&tuple, &cipher, &oracle) {
                Ok(table) => table,
                Err(e) => {
                    return finish(
                        trial,
                        examiner,
                        &oracle,
                        started,
                        AttackOutcome {
                            recovered_key: None,
                            verified: false,
                            zero_key_shortcut: false,
                            pairs,
                            failure: Some(FailureReason::HidingFunction(e)),
                            stats: AttackStats::default(),
                        },
                    )
                }
            };
            let mut sampler = StatevectorSampler::new(&table, &oracle);
            recover_period(&mut sampler, config.max_samples, rng)
        }
        Backend::Analytic => match AnalyticSampler::new(examiner.secret_key()) {
            Ok(mut sampler) => recover_period(&mut sampler, config.max_samples, rng),
            Err(e) => Err(RecoveryError::Sampler(e)),
        },
    };

    let outcome = match recovery {
        Ok(recovery) => {
            let candidate = recovery.period;
            let verified = cipher
                .encrypt_tuple(&candidate, &tuple)
                .expect("candidate has key width")
                == target;
            AttackOutcome {
                recovered_key: verified.then(|| candidate.clone()),
                verified,
                zero_key_shortcut: false,
                pairs,
                failure: (!verified).then_some(FailureReason::VerificationFailed { candidate }),
                stats: recovery.stats,
            }
        }
        Err(e) => {
            let stats = match &e {
                RecoveryError::SamplesExhausted { stats, .. } => stats.clone(),
                RecoveryError::Sampler(_) => AttackStats::default(),
            };
            AttackOutcome {
                recovered_key: None,
                verified: false,
                zero_key_shortcut: false,
                pairs,
                failure: Some(FailureReason::Recovery(e)),
                stats,
            }
        }
    };
    finish(trial, examiner, &oracle, started, outcome)
}

fn finish(
    trial: u64,
    examiner: Examiner,
    oracle: &RelatedKeyOracle,
    started: Instant,
    mut outcome: AttackOutcome,
) -> TrialRun {
    let counts = oracle.query_counts();
    outcome.stats.superposition_queries = counts.superposition;
    outcome.stats.classical_encrypt_queries = counts.classical_encrypt;
    outcome.stats.classical_decrypt_queries = counts.classical_decrypt;
    outcome.stats.wall_time = started.elapsed();
    debug_assert_eq!(counts.classical_decrypt, 0, "the attack never decrypts");
    TrialRun {
        trial,
        outcome,
        examiner,
    }
}

/// Campaign aggregates over per-trial outcomes. Means are over all trials;
/// wall times are measured and excluded from reproducibility guarantees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignAggregate {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub mean_samples: f64,
    pub max_samples: u64,
    pub mean_superposition_queries: f64,
    pub total_classical_queries: u64,
    pub total_decrypt_queries: u64,
    pub mean_wall_ms: f64,
}

pub struct CampaignResult {
    pub runs: Vec<TrialRun>,
    pub aggregate: CampaignAggregate,
}

impl CampaignResult {
    pub fn all_succeeded(&self) -> bool {
        self.aggregate.successes == self.aggregate.trials
    }
}

/// Runs `config.trials` independent trials on per-trial random streams.
/// Trials are embarrassingly parallel; `jobs > 1` distributes them over a
/// thread pool without changing any result.
pub fn run_campaign(config: &AttackConfig) -> Result<CampaignResult, AttackError> {
    config.validate()?;
    let runs: Result<Vec<TrialRun>, AttackError> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| AttackError::InvalidConfig(e.to_string()))?;
        pool.install(|| (0..config.trials).into_par_iter().map(|t| run_attack(config, t)).collect())
    } else {
        (0..config.trials).map(|t| run_attack(config, t)).collect()
    };
    let runs = runs?;

    let trials = runs.len() as u64;
    let successes = runs.iter().filter(|r| r.outcome.success()).count() as u64;
    let sample_counts: Vec<u64> = runs.iter().map(|r| r.outcome.stats.samples_drawn).collect();
    let aggregate = CampaignAggregate {
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        mean_samples: sample_counts.iter().sum::<u64>() as f64 / trials as f64,
        max_samples: sample_counts.iter().copied().max().unwrap_or(0),
        mean_superposition_queries: runs
            .iter()
            .map(|r| r.outcome.stats.superposition_queries)
            .sum::<u64>() as f64
            / trials as f64,
        total_classical_queries: runs
            .iter()
            .map(|r| r.outcome.stats.classical_encrypt_queries)
            .sum(),
        total_decrypt_queries: runs
            .iter()
            .map(|r| r.outcome.stats.classical_decrypt_queries)
            .sum(),
        mean_wall_ms: runs
            .iter()
            .map(|r| r.outcome.stats.wall_time.as_secs_f64() * 1e3)
            .sum::<f64>()
            / trials as f64,
    };
    Ok(CampaignResult { runs, aggregate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::DEFAULT_ROUNDS;

    fn config(k: usize, n: usize, seed: u64) -> AttackConfig {
        AttackConfig::new(CipherParams::new(k, n, DEFAULT_ROUNDS).unwrap(), seed)
    }

    #[test]
    fn forced_zero_key_succeeds_at_step_one() {
        let cfg = config(8, 8, 42);
        let run = run_attack_with_key(&cfg, 0, BitVec::zeros(8)).unwrap();
        assert!(run.outcome.success());
        assert!(run.outcome.zero_key_shortcut);
        assert!(run.sound());
        let stats = &run.outcome.stats;
        assert_eq!(stats.samples_drawn, 0);
        assert_eq!(stats.superposition_queries, 0);
        assert_eq!(stats.classical_encrypt_queries, run.outcome.pairs.unwrap() as u64);
        assert_eq!(stats.classical_decrypt_queries, 0);
    }

    #[test]
    fn zero_key_check_distinguishes_zero_from_nonzero() {
        let params = CipherParams::new(8, 8, DEFAULT_ROUNDS).unwrap();
        let cipher = ToyCipher::new(params);
        let tuple = cipher::BlockTuple::from_raw(8, vec![0x00, 0x01]).unwrap();
        let (zero_oracle, _) = RelatedKeyOracle::new(params, &BitVec::zeros(8)).unwrap();
        assert!(check_zero_key(&tuple, &cipher, &zero_oracle).unwrap());
        // Exhaustive: no nonzero key ever passes the zero-key check.
        for key in 1..256u64 {
            let (oracle, _) = RelatedKeyOracle::new(params, &BitVec::from_u64(8, key)).unwrap();
            assert!(!check_zero_key(&tuple, &cipher, &oracle).unwrap());
        }
    }

    #[test]
    fn statevector_campaign_recovers_and_accounts_queries() {
        let mut cfg = config(8, 8, 7);
        cfg.trials = 10;
        let result = run_campaign(&cfg).unwrap();
        assert!(result.all_succeeded());
        for run in &result.runs {
            assert!(run.sound(), "trial {} recovered a wrong key", run.trial);
            let stats = &run.outcome.stats;
            assert_eq!(stats.classical_decrypt_queries, 0);
            assert_eq!(stats.superposition_queries, stats.samples_drawn);
            assert_eq!(stats.classical_encrypt_queries, run.outcome.pairs.unwrap() as u64);
            assert!(stats.samples_drawn <= cfg.max_samples);
        }
    }

    #[test]
    fn analytic_backend_agrees_on_success() {
        let mut cfg = config(8, 8, 11);
        cfg.backend = Backend::Analytic;
        cfg.trials = 5;
        let result = run_campaign(&cfg).unwrap();
        assert!(result.all_succeeded());
        for run in &result.runs {
            assert!(run.sound());
            assert_eq!(run.outcome.stats.superposition_queries, 0);
        }
    }

    #[test]
    fn starved_sample_budget_reports_failure() {
        let mut cfg = config(8, 8, 13);
        cfg.max_samples = 1;
        let run = run_attack_with_key(&cfg, 0, BitVec::from_u64(8, 0xA5)).unwrap();
        assert!(!run.outcome.success());
        assert!(matches!(
            run.outcome.failure,
            Some(FailureReason::Recovery(RecoveryError::SamplesExhausted { .. }))
        ));
        assert_eq!(run.outcome.stats.samples_drawn, 1);
    }

    #[test]
    fn config_validation_errors() {
        let mut cfg = config(8, 8, 1);
        cfg.trials = 0;
        assert!(matches!(
            run_campaign(&cfg),
            Err(AttackError::InvalidConfig(_))
        ));

        let cfg = config(24, 12, 1);
        assert!(matches!(
            run_attack(&cfg, 0),
            Err(AttackError::Cipher(CipherError::NotDeskScale { .. }))
        ));
    }

    #[test]
    fn trials_are_deterministic_given_seed_and_stream() {
        let cfg = config(8, 8, 99);
        let a = run_attack(&cfg, 3).unwrap();
        let b = run_attack(&cfg, 3).unwrap();
        assert_eq!(a.outcome.recovered_key, b.outcome.recovered_key);
        assert_eq!(a.outcome.stats.samples_drawn, b.outcome.stats.samples_drawn);
        assert_eq!(a.outcome.stats.rank_trajectory, b.outcome.stats.rank_trajectory);
        assert_eq!(a.examiner.secret_key(), b.examiner.secret_key());
    }

    #[test]
    fn parallel_campaign_matches_sequential() {
        let mut sequential = config(8, 8, 5);
        sequential.trials = 8;
        let mut parallel = sequential.clone();
        parallel.jobs = 4;
        let a = run_campaign(&sequential).unwrap();
        let b = run_campaign(&parallel).unwrap();
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.trial, y.trial);
            assert_eq!(x.outcome.recovered_key, y.outcome.recovered_key);
            assert_eq!(x.outcome.stats.samples_drawn, y.outcome.stats.samples_drawn);
        }
    }

    #[test]
    fn key_width_mismatch_is_rejected() {
        let cfg = config(8, 8, 1);
        assert!(matches!(
            run_attack_with_key(&cfg, 0, BitVec::zeros(12)),
            Err(AttackError::Cipher(CipherError::WidthMismatch { .. }))
        ));
    }
}
