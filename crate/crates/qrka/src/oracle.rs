//! The related-key oracle: holds a hidden key `K`, answers encryptions and
//! decryptions under `K XOR mask` for caller-chosen masks, and meters every
//! query.
//!
//! A superposition query is modeled classically as one evaluation table over
//! all `2^k` masks, counted as a single query: one coherent query touches the
//! whole mask space, and the attack's query-complexity claim is about the
//! number of coherent queries, not the table size. The hidden key never
//! leaves the oracle through any public accessor; final verdicts go through
//! the [`Examiner`] capability handed out once at construction.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::cipher::{
    CipherError, CipherParams, CiphertextTuple, PlaintextTuple, ToyCipher,
    DESK_SCALE_MAX_KEY_BITS,
};
use crate::gf2::BitVec;

/// Snapshot of the oracle's query meters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QueryCounts {
    /// Classical encryption queries (one per block).
    pub classical_encrypt: u64,
    /// Classical decryption queries; the attack never issues any.
    pub classical_decrypt: u64,
    /// Coherent (superposition) queries.
    pub superposition: u64,
}

impl QueryCounts {
    pub fn classical_total(&self) -> u64 {
        self.classical_encrypt + self.classical_decrypt
    }
}

/// Test-and-verdict capability: the one sanctioned way to learn the hidden
/// key, created alongside the oracle and kept out of attack code.
pub struct Examiner {
    secret_key: BitVec,
}

impl Examiner {
    pub fn secret_key(&self) -> &BitVec {
        &self.secret_key
    }
}

pub struct RelatedKeyOracle {
    cipher: ToyCipher,
    secret_key: u64,
    encrypt_queries: AtomicU64,
    decrypt_queries: AtomicU64,
    superposition_queries: AtomicU64,
}

impl fmt::Debug for RelatedKeyOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // The hidden key is deliberately absent.
        f.debug_struct("RelatedKeyOracle")
            .field("params", self.cipher.params())
            .field("queries", &self.query_counts())
            .finish()
    }
}

impl RelatedKeyOracle {
    /// Builds an oracle around a hidden key and returns it together with the
    /// examiner capability for the final verdict.
    pub fn new(
        params: CipherParams,
        secret_key: &BitVec,
    ) -> Result<(Self, Examiner), CipherError> {
        if secret_key.width() != params.key_bits {
            return Err(CipherError::WidthMismatch {
                what: "key",
                expected: params.key_bits,
                got: secret_key.width(),
            });
        }
        let oracle = RelatedKeyOracle {
            cipher: ToyCipher::new(params),
            secret_key: secret_key.to_u64(),
            encrypt_queries: AtomicU64::new(0),
            decrypt_queries: AtomicU64::new(0),
            superposition_queries: AtomicU64::new(0),
        };
        let examiner = Examiner {
            secret_key: secret_key.clone(),
        };
        Ok((oracle, examiner))
    }

    pub fn params(&self) -> &CipherParams {
        self.cipher.params()
    }

    pub fn query_counts(&self) -> QueryCounts {
        QueryCounts {
            classical_encrypt: self.encrypt_queries.load(Ordering::Relaxed),
            classical_decrypt: self.decrypt_queries.load(Ordering::Relaxed),
            superposition: self.superposition_queries.load(Ordering::Relaxed),
        }
    }

    fn check_mask(&self, mask: &BitVec) -> Result<u64, CipherError> {
        if mask.width() != self.params().key_bits {
            return Err(CipherError::WidthMismatch {
                what: "mask",
                expected: self.params().key_bits,
                got: mask.width(),
            });
        }
        Ok(mask.to_u64())
    }

    /// Encryption of `block` under `K XOR mask`.
    pub fn related_encrypt(&self, mask: &BitVec, block: &BitVec) -> Result<BitVec, CipherError> {
        let mask = self.check_mask(mask)?;
        let key = BitVec::from_u64(self.params().key_bits, self.secret_key ^ mask);
        let out = self.cipher.encrypt(&key, block)?;
        self.encrypt_queries.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    /// Decryption of `block` under `K XOR mask`. Implemented for model
    /// completeness; the attack never calls it.
    pub fn related_decrypt(&self, mask: &BitVec, block: &BitVec) -> Result<BitVec, CipherError> {
        let mask = self.check_mask(mask)?;
        let key = BitVec::from_u64(self.params().key_bits, self.secret_key ^ mask);
        let out = self.cipher.decrypt(&key, block)?;
        self.decrypt_queries.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    /// Blockwise encryption of a tuple at one mask; costs one classical query
    /// per block.
    pub fn related_encrypt_tuple(
        &self,
        mask: &BitVec,
        tuple: &PlaintextTuple,
    ) -> Result<CiphertextTuple, CipherError> {
        let mask = self.check_mask(mask)?;
        let out = self.cipher.encrypt_tuple_raw(self.secret_key ^ mask, tuple)?;
        self.encrypt_queries
            .fetch_add(tuple.len() as u64, Ordering::Relaxed);
        Ok(out)
    }

    /// One superposition query: the full table `mask -> E_{K XOR mask}(tuple)`
    /// over all `2^k` masks, counted as a single coherent query.
    pub fn superposition_encrypt_tuple(
        &self,
        tuple: &PlaintextTuple,
    ) -> Result<MaskTable, CipherError> {
        let params = *self.params();
        if params.key_bits > DESK_SCALE_MAX_KEY_BITS {
            return Err(CipherError::NotDeskScale {
                key_bits: params.key_bits,
                max: DESK_SCALE_MAX_KEY_BITS,
            });
        }
        if tuple.block_bits() != params.block_bits {
            return Err(CipherError::WidthMismatch {
                what: "tuple block",
                expected: params.block_bits,
                got: tuple.block_bits(),
            });
        }
        let pairs = tuple.len();
        let mut blocks = Vec::with_capacity((1usize << params.key_bits) * pairs);
        for mask in 0..1u64 << params.key_bits {
            let key = self.secret_key ^ mask;
            for &m in tuple.raw() {
                blocks.push(self.cipher.encrypt_block_raw(key, m));
            }
        }
        self.superposition_queries.fetch_add(1, Ordering::Relaxed);
        Ok(MaskTable {
            key_bits: params.key_bits,
            block_bits: params.block_bits,
            pairs,
            blocks,
        })
    }

    /// Accounts one additional coherent query without recomputation. Sampling
    /// memoizes the evaluation table, but each period-finding sample stands
    /// for a fresh coherent query, and the meter must say so.
    pub(crate) fn count_superposition_query(&self) {
        self.superposition_queries.fetch_add(1, Ordering::Relaxed);
    }
}

/// Full related-key evaluation table: for every mask `L`, the ciphertext
/// tuple under `K XOR L`. Blocks are stored flat, `pairs` per mask.
pub struct MaskTable {
    key_bits: usize,
    block_bits: usize,
    pairs: usize,
    blocks: Vec<u64>,
}

impl MaskTable {
    pub fn key_bits(&self) -> usize {
        self.key_bits
    }

    pub fn block_bits(&self) -> usize {
        self.block_bits
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn mask_count(&self) -> usize {
        1 << self.key_bits
    }

    /// Raw ciphertext blocks for one mask index.
    pub fn blocks_at(&self, mask_index: usize) -> &[u64] {
        let start = mask_index * self.pairs;
        &self.blocks[start..start + self.pairs]
    }

    pub fn tuple(&self, mask_index: usize) -> CiphertextTuple {
        CiphertextTuple::from_raw(self.block_bits, self.blocks_at(mask_index).to_vec())
            .expect("table blocks are in range by construction")
    }
}
