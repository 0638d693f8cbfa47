//! A scalable toy substitution-permutation block cipher, plus the
//! known-plaintext unicity machinery that decides when `r`
//! plaintext-ciphertext pairs pin the key down uniquely.
//!
//! The cipher is a family of keyed permutations on `n`-bit blocks with
//! `k`-bit keys. Each round XORs a rotating round key, applies a fixed 4-bit
//! S-box to every nibble, and spreads the S-box outputs with a fixed bit
//! permutation; a final round-key XOR closes the last round. The point is not
//! cryptographic strength but full diffusion at desk scale, so that a small
//! number of plaintext-ciphertext pairs really does determine the key.
//!
//! The unicity estimate `r > ceil(k/n)` is treated as a heuristic; brute
//! force over the key space ([`verify_unicity`], [`key_separation`]) is the
//! ground truth, and tuple search reports when the estimate falls short.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gf2::BitVec;

/// Largest key width for which whole-key-space brute force is allowed.
pub const DESK_SCALE_MAX_KEY_BITS: usize = 20;

/// Default round count; gives full diffusion with margin at n <= 16.
pub const DEFAULT_ROUNDS: usize = 6;

/// 4-bit S-box (the PRESENT S-box: optimal differential uniformity for its
/// size) and its inverse.
pub const SBOX: [u8; 16] = [
    0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2,
];
pub const SBOX_INV: [u8; 16] = [
    0x5, 0xE, 0xF, 0x8, 0xC, 0x1, 0x2, 0xD, 0xB, 0x4, 0x6, 0x3, 0x0, 0x7, 0x9, 0xA,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CipherError {
    #[error("block width must be a positive multiple of 4, got {0}")]
    BadBlockBits(usize),
    #[error("block width {0} exceeds the 64-bit implementation limit")]
    BlockTooWide(usize),
    #[error("key width must be positive, got {0}")]
    BadKeyBits(usize),
    #[error("key width {0} exceeds the 64-bit implementation limit")]
    KeyTooWide(usize),
    #[error("key width {key_bits} must not exceed block width {block_bits} or must be a multiple of it")]
    BadKeySchedule { key_bits: usize, block_bits: usize },
    #[error("at least 2 rounds required, got {0}")]
    TooFewRounds(usize),
    #[error("width mismatch: expected {expected}-bit {what}, got {got} bits")]
    WidthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("block value {value:#x} does not fit in {block_bits} bits")]
    BlockOutOfRange { value: u64, block_bits: usize },
    #[error("key space 2^{key_bits} is not desk-scale (limit 2^{max})")]
    NotDeskScale { key_bits: usize, max: usize },
    #[error(
        "no unicity tuple found after {attempts} attempts; best candidate left {colliding_keys} keys colliding"
    )]
    UnicitySearchFailed { attempts: usize, colliding_keys: u64 },
}

fn width_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Cipher dimensions: key width `key_bits`, block width `block_bits`, and
/// round count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CipherParams {
    pub key_bits: usize,
    pub block_bits: usize,
    pub rounds: usize,
}

impl CipherParams {
    /// Validated constructor. The key schedule requires `key_bits` to be at
    /// most `block_bits` or an exact multiple of it; blocks must be a
    /// positive multiple of the 4-bit S-box width.
    pub fn new(key_bits: usize, block_bits: usize, rounds: usize) -> Result<Self, CipherError> {
        if block_bits == 0 || block_bits % 4 != 0 {
            return Err(CipherError::BadBlockBits(block_bits));
        }
        if block_bits > 64 {
            return Err(CipherError::BlockTooWide(block_bits));
        }
        if key_bits == 0 {
            return Err(CipherError::BadKeyBits(key_bits));
        }
        if key_bits > 64 {
            return Err(CipherError::KeyTooWide(key_bits));
        }
        if key_bits > block_bits && key_bits % block_bits != 0 {
            return Err(CipherError::BadKeySchedule {
                key_bits,
                block_bits,
            });
        }
        if rounds < 2 {
            return Err(CipherError::TooFewRounds(rounds));
        }
        Ok(CipherParams {
            key_bits,
            block_bits,
            rounds,
        })
    }

    pub fn key_mask(&self) -> u64 {
        width_mask(self.key_bits)
    }

    pub fn block_mask(&self) -> u64 {
        width_mask(self.block_bits)
    }
}

/// An ordered tuple of equal-width blocks. Plaintext and ciphertext tuples
/// share this representation; blocks are stored as raw integers since the
/// block width never exceeds 64 bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockTuple {
    block_bits: usize,
    blocks: Vec<u64>,
}

pub type PlaintextTuple = BlockTuple;
pub type CiphertextTuple = BlockTuple;

impl BlockTuple {
    pub fn from_raw(block_bits: usize, blocks: Vec<u64>) -> Result<Self, CipherError> {
        if block_bits == 0 || block_bits > 64 {
            return Err(CipherError::BadBlockBits(block_bits));
        }
        for &b in &blocks {
            if b & !width_mask(block_bits) != 0 {
                return Err(CipherError::BlockOutOfRange {
                    value: b,
                    block_bits,
                });
            }
        }
        Ok(BlockTuple { block_bits, blocks })
    }

    pub fn from_blocks(block_bits: usize, blocks: &[BitVec]) -> Result<Self, CipherError> {
        let raw = blocks
            .iter()
            .map(|b| {
                if b.width() != block_bits {
                    Err(CipherError::WidthMismatch {
                        what: "block",
                        expected: block_bits,
                        got: b.width(),
                    })
                } else {
                    Ok(b.to_u64())
                }
            })
            .collect::<Result<Vec<u64>, CipherError>>()?;
        BlockTuple::from_raw(block_bits, raw)
    }

    pub fn block_bits(&self) -> usize {
        self.block_bits
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, index: usize) -> BitVec {
        BitVec::from_u64(self.block_bits, self.blocks[index])
    }

    pub fn raw(&self) -> &[u64] {
        &self.blocks
    }

    pub fn blocks_distinct(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.blocks.iter().all(|b| seen.insert(b))
    }
}

/// A concrete cipher instance with precomputed per-nibble layer tables.
#[derive(Debug, Clone)]
pub struct ToyCipher {
    params: CipherParams,
    /// Fused S-box + permutation: for nibble slot `g` and nibble value `v`,
    /// `enc_layer[g][v]` holds `SBOX[v]` already scattered to its permuted
    /// bit positions.
    enc_layer: Vec<[u64; 16]>,
    /// Key bits actually used; all ones except for the pathological
    /// ignore-key-bits variant used to probe unicity failure.
    key_mask: u64,
}

impl ToyCipher {
    pub fn new(params: CipherParams) -> Self {
        Self::build(params, params.key_mask())
    }

    /// Pathological variant that ignores the key bits set in `ignored`:
    /// no plaintext tuple can then determine the key uniquely.
    #[cfg(test)]
    pub(crate) fn with_ignored_key_bits(params: CipherParams, ignored: u64) -> Self {
        Self::build(params, params.key_mask() & !ignored)
    }

    fn build(params: CipherParams, key_mask: u64) -> Self {
        let nibbles = params.block_bits / 4;
        let mut enc_layer = vec![[0u64; 16]; nibbles];
        for (g, table) in enc_layer.iter_mut().enumerate() {
            for (v, entry) in table.iter_mut().enumerate() {
                let substituted = SBOX[v] as u64;
                let mut scattered = 0u64;
                for b in 0..4 {
                    if substituted >> b & 1 == 1 {
                        scattered |= 1 << Self::permuted_position(params.block_bits, 4 * g + b);
                    }
                }
                *entry = scattered;
            }
        }
        ToyCipher {
            params,
            enc_layer,
            key_mask,
        }
    }

    /// Bit permutation: output bit `b` of nibble `g` moves to position
    /// `b * (n/4) + g`, so the four outputs of each S-box fan out to four
    /// different S-boxes in the next round.
    fn permuted_position(block_bits: usize, i: usize) -> usize {
        let nibbles = block_bits / 4;
        (i % 4) * nibbles + i / 4
    }

    pub fn params(&self) -> &CipherParams {
        &self.params
    }

    /// Round key for round `index` (0..=rounds). For keys no wider than a
    /// block the whole (zero-padded) key rotates; wider keys split into
    /// block-width words that the rounds cycle through, each rotated by the
    /// round index.
    fn round_key(&self, key: u64, index: usize) -> u64 {
        let n = self.params.block_bits;
        let k = self.params.key_bits;
        let word = if k <= n {
            key
        } else {
            (key >> ((index % (k / n)) * n)) & self.params.block_mask()
        };
        let r = index % n;
        if r == 0 {
            word
        } else {
            (word << r | word >> (n - r)) & self.params.block_mask()
        }
    }

    fn sub_perm(&self, state: u64) -> u64 {
        let mut out = 0;
        for (g, table) in self.enc_layer.iter().enumerate() {
            out ^= table[(state >> (4 * g) & 0xF) as usize];
        }
        out
    }

    fn perm_inv(&self, state: u64) -> u64 {
        let n = self.params.block_bits;
        let mut out = 0;
        for i in 0..n {
            out |= (state >> Self::permuted_position(n, i) & 1) << i;
        }
        out
    }

    fn sub_inv(&self, state: u64) -> u64 {
        let mut out = 0;
        for g in 0..self.enc_layer.len() {
            out |= (SBOX_INV[(state >> (4 * g) & 0xF) as usize] as u64) << (4 * g);
        }
        out
    }

    pub(crate) fn encrypt_block_raw(&self, key: u64, block: u64) -> u64 {
        let key = key & self.key_mask;
        let mut state = block;
        for round in 0..self.params.rounds {
            state ^= self.round_key(key, round);
            state = self.sub_perm(state);
        }
        state ^ self.round_key(key, self.params.rounds)
    }

    pub(crate) fn decrypt_block_raw(&self, key: u64, block: u64) -> u64 {
        let key = key & self.key_mask;
        let mut state = block ^ self.round_key(key, self.params.rounds);
        for round in (0..self.params.rounds).rev() {
            state = self.sub_inv(self.perm_inv(state));
            state ^= self.round_key(key, round);
        }
        state
    }

    fn check_key(&self, key: &BitVec) -> Result<u64, CipherError> {
        if key.width() != self.params.key_bits {
            return Err(CipherError::WidthMismatch {
                what: "key",
                expected: self.params.key_bits,
                got: key.width(),
            });
        }
        Ok(key.to_u64())
    }

    fn check_block(&self, block: &BitVec) -> Result<u64, CipherError> {
        if block.width() != self.params.block_bits {
            return Err(CipherError::WidthMismatch {
                what: "block",
                expected: self.params.block_bits,
                got: block.width(),
            });
        }
        Ok(block.to_u64())
    }

    pub fn encrypt(&self, key: &BitVec, block: &BitVec) -> Result<BitVec, CipherError> {
        let out = self.encrypt_block_raw(self.check_key(key)?, self.check_block(block)?);
        Ok(BitVec::from_u64(self.params.block_bits, out))
    }

    pub fn decrypt(&self, key: &BitVec, block: &BitVec) -> Result<BitVec, CipherError> {
        let out = self.decrypt_block_raw(self.check_key(key)?, self.check_block(block)?);
        Ok(BitVec::from_u64(self.params.block_bits, out))
    }

    /// Blockwise encryption of a tuple (electronic-code-book style).
    pub fn encrypt_tuple(
        &self,
        key: &BitVec,
        tuple: &PlaintextTuple,
    ) -> Result<CiphertextTuple, CipherError> {
        let key = self.check_key(key)?;
        self.encrypt_tuple_raw(key, tuple)
    }

    pub(crate) fn encrypt_tuple_raw(
        &self,
        key: u64,
        tuple: &PlaintextTuple,
    ) -> Result<CiphertextTuple, CipherError> {
        if tuple.block_bits() != self.params.block_bits {
            return Err(CipherError::WidthMismatch {
                what: "tuple block",
                expected: self.params.block_bits,
                got: tuple.block_bits(),
            });
        }
        let blocks = tuple
            .raw()
            .iter()
            .map(|&b| self.encrypt_block_raw(key, b))
            .collect();
        Ok(BlockTuple {
            block_bits: self.params.block_bits,
            blocks,
        })
    }
}

/// Smallest pair count `r` with `r > ceil(k/n)`: the heuristic known-plaintext
/// unicity estimate. For a 128-bit key and 128-bit blocks this is 2.
pub fn min_unicity_pairs(key_bits: usize, block_bits: usize) -> usize {
    assert!(key_bits >= 1 && block_bits >= 1);
    key_bits.div_ceil(block_bits) + 1
}

fn ensure_desk_scale(key_bits: usize) -> Result<(), CipherError> {
    if key_bits > DESK_SCALE_MAX_KEY_BITS {
        Err(CipherError::NotDeskScale {
            key_bits,
            max: DESK_SCALE_MAX_KEY_BITS,
        })
    } else {
        Ok(())
    }
}

/// Ground truth for the unicity precondition at one key: true iff no other
/// key maps `tuple` to the same ciphertexts, by brute force over the whole
/// key space. An empty tuple never determines the key.
pub fn verify_unicity(
    cipher: &ToyCipher,
    tuple: &PlaintextTuple,
    key: &BitVec,
) -> Result<bool, CipherError> {
    let params = cipher.params();
    ensure_desk_scale(params.key_bits)?;
    let key = cipher.check_key(key)?;
    if tuple.is_empty() {
        return Ok(false);
    }
    let target = cipher.encrypt_tuple_raw(key, tuple)?;
    for other in 0..1u64 << params.key_bits {
        if other == key {
            continue;
        }
        if tuple
            .raw()
            .iter()
            .zip(target.raw())
            .all(|(&m, &c)| cipher.encrypt_block_raw(other, m) == c)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whole-key-space separation statistics for a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparationReport {
    /// Keys whose ciphertext tuple is shared with at least one other key.
    pub colliding_keys: u64,
    /// Distinct ciphertext tuples over the key space.
    pub distinct_images: u64,
}

impl SeparationReport {
    /// True iff the tuple determines every key uniquely, which is the
    /// promise the period-finding reduction needs: it makes the hiding
    /// function exactly 2-to-1 for every nonzero hidden key.
    pub fn separates_all_keys(&self) -> bool {
        self.colliding_keys == 0
    }
}

/// Computes how well `tuple` separates the whole key space, by brute force.
pub fn key_separation(
    cipher: &ToyCipher,
    tuple: &PlaintextTuple,
) -> Result<SeparationReport, CipherError> {
    let params = cipher.params();
    ensure_desk_scale(params.key_bits)?;
    let key_count = 1u64 << params.key_bits;
    let mut images: HashMap<Vec<u64>, u64> = HashMap::with_capacity(key_count as usize);
    for key in 0..key_count {
        let image = cipher.encrypt_tuple_raw(key, tuple)?;
        *images.entry(image.blocks).or_insert(0) += 1;
    }
    let colliding_keys = images.values().filter(|&&c| c > 1).sum();
    Ok(SeparationReport {
        colliding_keys,
        distinct_images: images.len() as u64,
    })
}

/// Searches for a plaintext tuple that separates every key (and therefore
/// passes [`verify_unicity`] for `key`). Starts from `r = min_unicity_pairs`
/// with the canonical blocks `0, 1, ..., r-1`, falls back to random distinct
/// blocks, and escalates `r` up to three extra pairs before giving up. The
/// error reports how many keys the best candidate left colliding, so a
/// shortfall of the heuristic estimate is visible rather than hidden.
pub fn find_unicity_tuple<R: Rng + ?Sized>(
    cipher: &ToyCipher,
    key: &BitVec,
    rng: &mut R,
    max_attempts: usize,
) -> Result<PlaintextTuple, CipherError> {
    let start = min_unicity_pairs(cipher.params().key_bits, cipher.params().block_bits);
    find_unicity_tuple_with_pairs(cipher, key, start, rng, max_attempts)
}

/// As [`find_unicity_tuple`] but starting from an explicit pair count.
pub fn find_unicity_tuple_with_pairs<R: Rng + ?Sized>(
    cipher: &ToyCipher,
    key: &BitVec,
    start_pairs: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<PlaintextTuple, CipherError> {
    let params = *cipher.params();
    ensure_desk_scale(params.key_bits)?;
    cipher.check_key(key)?;
    assert!(start_pairs >= 1, "at least one plaintext block is required");
    assert!(max_attempts >= 1, "at least one attempt is required");

    let block_count = 1u128 << params.block_bits;
    let mut best_colliding = u64::MAX;
    let mut attempts = 0;
    for pairs in start_pairs..=start_pairs + 3 {
        if pairs as u128 > block_count {
            break; // not enough distinct blocks at this width
        }
        for attempt in 0..max_attempts {
            let tuple = if attempt == 0 {
                BlockTuple::from_raw(params.block_bits, (0..pairs as u64).collect())?
            } else {
                random_distinct_tuple(params.block_bits, pairs, rng)
            };
            attempts += 1;
            let report = key_separation(cipher, &tuple)?;
            if report.separates_all_keys() {
                debug_assert!(verify_unicity(cipher, &tuple, key)?);
                return Ok(tuple);
            }
            best_colliding = best_colliding.min(report.colliding_keys);
        }
    }
    Err(CipherError::UnicitySearchFailed {
        attempts,
        colliding_keys: best_colliding,
    })
}

fn random_distinct_tuple<R: Rng + ?Sized>(
    block_bits: usize,
    pairs: usize,
    rng: &mut R,
) -> BlockTuple {
    let mask = width_mask(block_bits);
    let mut seen = std::collections::HashSet::with_capacity(pairs);
    let mut blocks = Vec::with_capacity(pairs);
    while blocks.len() < pairs {
        let b = rng.random::<u64>() & mask;
        if seen.insert(b) {
            blocks.push(b);
        }
    }
    BlockTuple { block_bits, blocks }
}
