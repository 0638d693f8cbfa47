//! Period finding: samplers producing measurement outcomes uniform over the
//! orthogonal complement of the hidden period, and the recovery loop that
//! accumulates outcomes until the period is the unique kernel vector.
//!
//! Two sampler backends exist. [`StatevectorSampler`] simulates the quantum
//! circuit exactly without ever materializing amplitudes: after the function
//! register is measured, the input register is an equal superposition over a
//! two-element coset `{x0, x0 XOR s}`, so the post-Hadamard measurement
//! distribution is known in closed form — uniform over the vectors orthogonal
//! to `x0 XOR x1` — and can be sampled exactly. The coset partner comes from
//! an evaluation-table lookup, never from the hidden period itself, so the
//! sampler is honest to the oracle interface. [`AnalyticSampler`] samples the
//! same closed-form distribution directly from a known period; it requires
//! examiner access and exists as an independent statistical cross-check.
//!
//! Each sample stands for one fresh coherent query in the real algorithm.
//! The statevector backend memoizes the evaluation table, but accounts one
//! superposition query per sample drawn, the table's own construction query
//! covering the first.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::RngCore;
use thiserror::Error;

use crate::gf2::{dot, BitMatrix, BitVec};
use crate::hiding::HidingTable;
use crate::oracle::RelatedKeyOracle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimonError {
    #[error(
        "evaluation table is not 2-to-1: encoding at input {input:#x} has {occurrences} occupant(s)"
    )]
    PromiseViolation { input: u64, occurrences: usize },
    #[error("the analytic sampler requires a nonzero period")]
    ZeroPeriod,
}

/// One measurement outcome of the period-finding circuit: a vector orthogonal
/// to the hidden period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimonSample {
    pub outcome: BitVec,
}

/// A source of measurement outcomes uniform over the orthogonal complement of
/// some fixed nonzero period.
pub trait SimonSampler {
    fn key_bits(&self) -> usize;
    fn sample(&mut self, rng: &mut dyn RngCore) -> Result<SimonSample, SimonError>;
}

/// Exact simulation of the period-finding measurement, driven by the
/// full-domain evaluation table.
pub struct StatevectorSampler<'a> {
    table: &'a HidingTable,
    oracle: &'a RelatedKeyOracle,
    partners: Option<Vec<u32>>,
    samples_emitted: u64,
}

impl<'a> StatevectorSampler<'a> {
    pub fn new(table: &'a HidingTable, oracle: &'a RelatedKeyOracle) -> Self {
        StatevectorSampler {
            table,
            oracle,
            partners: None,
            samples_emitted: 0,
        }
    }

    /// Coset partner of every input, resolved by encoding lookup. Fails
    /// unless the table is exactly 2-to-1.
    fn partners(&mut self) -> Result<&[u32], SimonError> {
        if self.partners.is_none() {
            self.partners = Some(compute_coset_partners(self.table)?);
        }
        Ok(self.partners.as_deref().unwrap())
    }
}

fn compute_coset_partners(table: &HidingTable) -> Result<Vec<u32>, SimonError> {
    let entries = table.entries();
    let mut partners = vec![u32::MAX; entries];
    let mut first_seen: HashMap<&[u64], u32> = HashMap::with_capacity(entries);
    for x in 0..entries {
        match first_seen.entry(table.encoding(x)) {
            Entry::Vacant(slot) => {
                slot.insert(x as u32);
            }
            Entry::Occupied(slot) => {
                let x0 = *slot.get() as usize;
                if partners[x0] != u32::MAX {
                    return Err(SimonError::PromiseViolation {
                        input: x as u64,
                        occurrences: 3,
                    });
                }
                partners[x0] = x as u32;
                partners[x] = x0 as u32;
            }
        }
    }
    if let Some(lonely) = partners.iter().position(|&p| p == u32::MAX) {
        return Err(SimonError::PromiseViolation {
            input: lonely as u64,
            occurrences: 1,
        });
    }
    Ok(partners)
}

impl SimonSampler for StatevectorSampler<'_> {
    fn key_bits(&self) -> usize {
        self.table.key_bits()
    }

    fn sample(&mut self, rng: &mut dyn RngCore) -> Result<SimonSample, SimonError> {
        let key_bits = self.table.key_bits();
        let mask = if key_bits >= 64 {
            u64::MAX
        } else {
            (1u64 << key_bits) - 1
        };
        self.partners()?;
        let partners = self.partners.as_deref().unwrap();

        // One coherent query per sample; the table build paid for the first.
        if self.samples_emitted > 0 {
            self.oracle.count_superposition_query();
        }
        self.samples_emitted += 1;

        // Measuring the function register collapses the input register to an
        // equal superposition over a coset {x0, x1}; drawing x0 uniformly
        // selects the coset with the correct probability.
        let x0 = rng.next_u64() & mask;
        let x1 = partners[x0 as usize] as u64;
        let diff = x0 ^ x1;

        // The post-Hadamard measurement is uniform over the orthogonal
        // complement of the coset difference: every orthogonal outcome has
        // probability 2^-(k-1), every other outcome has amplitude zero.
        // Rejection sampling from the full cube realizes that exactly.
        loop {
            let y = rng.next_u64() & mask;
            if (y & diff).count_ones() % 2 == 0 {
                return Ok(SimonSample {
                    outcome: BitVec::from_u64(key_bits, y),
                });
            }
        }
    }
}

/// Samples the known output distribution directly from an explicit period:
/// uniform over the orthogonal complement. Used as a statistical cross-check
/// against the statevector backend; requires examiner access to the period.
pub struct AnalyticSampler {
    period: BitVec,
    adjust_bit: usize,
}

impl AnalyticSampler {
    pub fn new(period: &BitVec) -> Result<Self, SimonError> {
        let adjust_bit = period.leading_one().ok_or(SimonError::ZeroPeriod)?;
        Ok(AnalyticSampler {
            period: period.clone(),
            adjust_bit,
        })
    }
}

impl SimonSampler for AnalyticSampler {
    fn key_bits(&self) -> usize {
        self.period.width()
    }

    fn sample(&mut self, rng: &mut dyn RngCore) -> Result<SimonSample, SimonError> {
        // Draw uniformly from the whole cube and repair the parity by
        // flipping one coordinate where the period is set. Each orthogonal
        // vector has exactly two preimages under the repair map, so the
        // output is exactly uniform over the orthogonal complement.
        let mut y = BitVec::random(self.period.width(), rng);
        if dot(&y, &self.period).expect("widths match") {
            y.set(self.adjust_bit, !y.get(self.adjust_bit));
        }
        Ok(SimonSample { outcome: y })
    }
}

/// Bookkeeping for one attack run: sample and query counts, the rank growth
/// of the accumulated linear system, and wall time. The query fields are
/// snapshotted from the oracle by the orchestration layer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttackStats {
    pub samples_drawn: u64,
    pub superposition_queries: u64,
    pub classical_encrypt_queries: u64,
    pub classical_decrypt_queries: u64,
    /// (samples drawn so far, rank) at every rank increase.
    pub rank_trajectory: Vec<(u64, usize)>,
    pub wall_time: Duration,
}

/// Successful period recovery: the unique nonzero kernel vector of the
/// accumulated system.
#[derive(Debug, Clone)]
pub struct PeriodRecovery {
    pub period: BitVec,
    pub stats: AttackStats,
}

#[derive(Debug, Clone, Error)]
pub enum RecoveryError {
    #[error("period not recovered: rank reached {rank} of {needed} before the sample budget ran out")]
    SamplesExhausted {
        rank: usize,
        needed: usize,
        stats: AttackStats,
    },
    #[error(transparent)]
    Sampler(#[from] SimonError),
}

/// Draws samples and accumulates them with incremental elimination until the
/// rank reaches `k - 1`, then returns the unique kernel vector — exactly the
/// hidden period, never a guess. Rank `k - 1` is the ceiling: every sample is
/// orthogonal to the period, so the samples span at most its orthogonal
/// complement.
pub fn recover_period<S: SimonSampler + ?Sized>(
    sampler: &mut S,
    max_samples: u64,
    rng: &mut dyn RngCore,
) -> Result<PeriodRecovery, RecoveryError> {
    let started = Instant::now();
    let key_bits = sampler.key_bits();
    let needed = key_bits - 1;
    let mut matrix = BitMatrix::new(key_bits);
    let mut trajectory = Vec::with_capacity(needed);
    let mut samples = 0u64;

    while matrix.rank() < needed && samples < max_samples {
        let sample = sampler.sample(rng)?;
        samples += 1;
        if matrix
            .add_if_independent(&sample.outcome)
            .expect("sampler outcomes have the configured width")
        {
            trajectory.push((samples, matrix.rank()));
        }
    }

    let stats = AttackStats {
        samples_drawn: samples,
        rank_trajectory: trajectory,
        wall_time: started.elapsed(),
        ..AttackStats::default()
    };

    if matrix.rank() < needed {
        return Err(RecoveryError::SamplesExhausted {
            rank: matrix.rank(),
            needed,
            stats,
        });
    }

    let kernel = matrix.kernel_basis();
    assert_eq!(
        kernel.len(),
        1,
        "rank k-1 leaves a one-dimensional kernel by rank-nullity"
    );
    Ok(PeriodRecovery {
        period: kernel.into_iter().next().unwrap(),
        stats,
    })
}
