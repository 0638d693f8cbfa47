//! The 2-to-1 hiding function that reduces key recovery to period finding.
//!
//! Fix a plaintext tuple that determines every key uniquely. Mapping a
//! candidate mask `x` to the unordered pair of ciphertext tuples under the
//! keys `x` and `K XOR x` — one computed locally, one obtained from the
//! related-key oracle at mask `x` — yields a function whose collisions are
//! exactly the pairs `{x, K XOR x}`: it is 2-to-1 with XOR period equal to
//! the hidden key `K`.
//!
//! Unordered pairs need a canonical bit representation to be comparable, so
//! the pair is stored as `(min, max)` of the two tuples interpreted as
//! unsigned integers ([`SetEncoding`]). Equal tuples are impossible when the
//! hidden key is nonzero and the plaintext tuple really separates keys; if
//! they do coincide the precondition is broken and evaluation reports a
//! [`HidingError::UnicityViolation`] rather than encoding a degenerate set.

use std::cmp::Ordering;

use thiserror::Error;

use crate::cipher::{CipherError, CiphertextTuple, PlaintextTuple, ToyCipher};
use crate::gf2::BitVec;
use crate::oracle::RelatedKeyOracle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HidingError {
    #[error(transparent)]
    Cipher(#[from] CipherError),
    #[error("set encoding requires two distinct ciphertext tuples")]
    DegenerateSet,
    #[error(
        "hiding function collapsed to a singleton at input {input}: \
         the hidden key is zero or the plaintext tuple fails unicity"
    )]
    UnicityViolation { input: BitVec },
}

/// Big-endian concatenation of a tuple's blocks: the first block occupies the
/// most significant bits. [`BitVec`]'s ordering is unsigned-integer order, so
/// comparing the results compares the tuples as integers; `to_u128` yields
/// the numeric value at desk-scale widths.
pub fn interpret_as_integer(tuple: &CiphertextTuple) -> BitVec {
    assert!(!tuple.is_empty(), "cannot interpret an empty tuple");
    let blocks: Vec<BitVec> = (0..tuple.len()).map(|i| tuple.block(i)).collect();
    BitVec::concat(blocks.iter())
}

/// Compares two equal-shape tuples as unsigned integers. Raw blocks compare
/// lexicographically from block 0, which is exactly the big-endian integer
/// order of the concatenation.
fn compare_tuples(a: &CiphertextTuple, b: &CiphertextTuple) -> Ordering {
    debug_assert_eq!(a.block_bits(), b.block_bits());
    debug_assert_eq!(a.len(), b.len());
    a.raw().cmp(b.raw())
}

/// Canonical representation of an unordered pair of ciphertext tuples: the
/// smaller tuple first under unsigned-integer interpretation. Total width is
/// `2rn` bits, at least the key width whenever the pair count satisfies the
/// unicity bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetEncoding {
    lo: CiphertextTuple,
    hi: CiphertextTuple,
}

impl SetEncoding {
    /// Orders the two tuples; fails if they are equal, because the hiding
    /// function must never produce a singleton set.
    pub fn new(a: CiphertextTuple, b: CiphertextTuple) -> Result<Self, HidingError> {
        match compare_tuples(&a, &b) {
            Ordering::Less => Ok(SetEncoding { lo: a, hi: b }),
            Ordering::Greater => Ok(SetEncoding { lo: b, hi: a }),
            Ordering::Equal => Err(HidingError::DegenerateSet),
        }
    }

    pub fn lo(&self) -> &CiphertextTuple {
        &self.lo
    }

    pub fn hi(&self) -> &CiphertextTuple {
        &self.hi
    }

    /// Total width `2rn` of the canonical bit representation.
    pub fn total_bits(&self) -> usize {
        2 * self.lo.len() * self.lo.block_bits()
    }

    /// The canonical `2rn`-bit representation: `min` in the most significant
    /// half, `max` in the least significant half.
    pub fn bits(&self) -> BitVec {
        BitVec::concat([
            &interpret_as_integer(&self.lo),
            &interpret_as_integer(&self.hi),
        ])
    }
}

/// Evaluates the hiding function at one input: the local encryption under key
/// `x` plus one oracle tuple query at mask `x` (costing one classical query
/// per block), canonically encoded.
pub fn evaluate(
    input: &BitVec,
    tuple: &PlaintextTuple,
    cipher: &ToyCipher,
    oracle: &RelatedKeyOracle,
) -> Result<SetEncoding, HidingError> {
    let local = cipher.encrypt_tuple(input, tuple)?;
    let remote = oracle.related_encrypt_tuple(input, tuple)?;
    SetEncoding::new(local, remote).map_err(|e| match e {
        HidingError::DegenerateSet => HidingError::UnicityViolation {
            input: input.clone(),
        },
        other => other,
    })
}

/// The hiding function tabulated over the whole input domain, packed for the
/// sampler: one fixed-width bit-packed encoding per input. Produced by a
/// single superposition query plus `2^k` local cipher evaluations.
#[derive(Debug)]
pub struct HidingTable {
    key_bits: usize,
    block_bits: usize,
    pairs: usize,
    entry_words: usize,
    words: Vec<u64>,
}

/// Stand-in for evaluating the hiding function on a superposition of all
/// inputs: uses exactly one superposition oracle query, and the entry at each
/// input equals [`evaluate`] at that input.
pub fn evaluate_full_domain(
    tuple: &PlaintextTuple,
    cipher: &ToyCipher,
    oracle: &RelatedKeyOracle,
) -> Result<HidingTable, HidingError> {
    let mask_table = oracle.superposition_encrypt_tuple(tuple)?;
    let key_bits = mask_table.key_bits();
    let block_bits = mask_table.block_bits();
    let pairs = mask_table.pairs();
    let entry_bits = 2 * pairs * block_bits;
    let entry_words = entry_bits.div_ceil(64);
    let entries = mask_table.mask_count();

    let mut words = vec![0u64; entries * entry_words];
    let mut local = vec![0u64; pairs];
    for x in 0..entries as u64 {
        for (dst, &m) in local.iter_mut().zip(tuple.raw()) {
            *dst = cipher.encrypt_block_raw(x, m);
        }
        let remote = mask_table.blocks_at(x as usize);
        let (lo, hi) = match local.as_slice().cmp(remote) {
            Ordering::Less => (local.as_slice(), remote),
            Ordering::Greater => (remote, local.as_slice()),
            Ordering::Equal => {
                return Err(HidingError::UnicityViolation {
                    input: BitVec::from_u64(key_bits, x),
                })
            }
        };
        let entry = &mut words[x as usize * entry_words..(x as usize + 1) * entry_words];
        pack_blocks(entry, lo.iter().chain(hi).copied(), block_bits);
    }
    Ok(HidingTable {
        key_bits,
        block_bits,
        pairs,
        entry_words,
        words,
    })
}

fn pack_blocks(dst: &mut [u64], blocks: impl Iterator<Item = u64>, width: usize) {
    let mut bit = 0;
    for b in blocks {
        let word = bit / 64;
        let offset = bit % 64;
        dst[word] |= b << offset;
        if offset + width > 64 {
            dst[word + 1] |= b >> (64 - offset);
        }
        bit += width;
    }
}

fn unpack_block(src: &[u64], bit: usize, width: usize) -> u64 {
    let word = bit / 64;
    let offset = bit % 64;
    let mut v = src[word] >> offset;
    if offset + width > 64 {
        v |= src[word + 1] << (64 - offset);
    }
    if width < 64 {
        v &= (1u64 << width) - 1;
    }
    v
}

impl HidingTable {
    pub fn key_bits(&self) -> usize {
        self.key_bits
    }

    pub fn block_bits(&self) -> usize {
        self.block_bits
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn entries(&self) -> usize {
        1 << self.key_bits
    }

    /// Packed canonical encoding at one input; equal slices mean equal sets.
    pub fn encoding(&self, input: usize) -> &[u64] {
        &self.words[input * self.entry_words..(input + 1) * self.entry_words]
    }

    /// Reconstructs the structured encoding at one input.
    pub fn set_encoding(&self, input: usize) -> SetEncoding {
        let entry = self.encoding(input);
        let mut read = |index: usize| unpack_block(entry, index * self.block_bits, self.block_bits);
        let lo: Vec<u64> = (0..self.pairs).map(&mut read).collect();
        let hi: Vec<u64> = (self.pairs..2 * self.pairs).map(&mut read).collect();
        SetEncoding {
            lo: CiphertextTuple::from_raw(self.block_bits, lo).expect("packed blocks in range"),
            hi: CiphertextTuple::from_raw(self.block_bits, hi).expect("packed blocks in range"),
        }
    }

    /// Test hook: builds a table from raw packed encodings.
    #[cfg(test)]
    pub(crate) fn from_raw_encodings(
        key_bits: usize,
        block_bits: usize,
        pairs: usize,
        entry_words: usize,
        words: Vec<u64>,
    ) -> Self {
        assert_eq!(words.len(), (1 << key_bits) * entry_words);
        HidingTable {
            key_bits,
            block_bits,
            pairs,
            entry_words,
            words,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{BlockTuple, CipherParams, DEFAULT_ROUNDS};
    use crate::oracle::Examiner;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::collections::HashMap;

    fn setup(k: usize, n: usize, key: u64) -> (RelatedKeyOracle, Examiner, ToyCipher) {
        let params = CipherParams::new(k, n, DEFAULT_ROUNDS).unwrap();
        let key = BitVec::from_u64(k, key);
        let (oracle, examiner) = RelatedKeyOracle::new(params, &key).unwrap();
        (oracle, examiner, ToyCipher::new(params))
    }

    fn unicity_tuple(cipher: &ToyCipher, key: &BitVec) -> PlaintextTuple {
        let mut rng = ChaCha12Rng::seed_from_u64(0xDECADE);
        crate::cipher::find_unicity_tuple(cipher, key, &mut rng, 16).unwrap()
    }

    #[test]
    fn interpret_as_integer_examples() {
        let t = BlockTuple::from_raw(8, vec![0x00, 0x01]).unwrap();
        assert_eq!(interpret_as_integer(&t).to_u128(), 1);
        let t = BlockTuple::from_raw(8, vec![0x01, 0x00]).unwrap();
        assert_eq!(interpret_as_integer(&t).to_u128(), 256);
    }

    #[test]
    fn tuple_order_agrees_with_lexicographic_block_order() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..200 {
            let a = BlockTuple::from_raw(8, vec![rng.random::<u8>() as u64, rng.random::<u8>() as u64]).unwrap();
            let b = BlockTuple::from_raw(8, vec![rng.random::<u8>() as u64, rng.random::<u8>() as u64]).unwrap();
            let by_int = interpret_as_integer(&a).cmp(&interpret_as_integer(&b));
            assert_eq!(by_int, a.raw().cmp(b.raw()));
            assert_eq!(by_int, compare_tuples(&a, &b));
        }
    }

    #[test]
    fn set_encoding_orders_and_rejects_singletons() {
        let a = BlockTuple::from_raw(8, vec![0x01, 0x00]).unwrap();
        let b = BlockTuple::from_raw(8, vec![0x00, 0xFF]).unwrap();
        let enc = SetEncoding::new(a.clone(), b.clone()).unwrap();
        assert_eq!(enc.lo(), &b);
        assert_eq!(enc.hi(), &a);
        assert_eq!(enc.total_bits(), 32);
        assert!(matches!(
            SetEncoding::new(a.clone(), a.clone()),
            Err(HidingError::DegenerateSet)
        ));
        // bits(): lo in the high half
        assert_eq!(enc.bits().to_u128(), (0x00FFu128 << 16) | 0x0100);
    }

    #[test]
    fn evaluation_is_symmetric_and_bit_identical_under_the_period() {
        let (oracle, examiner, cipher) = setup(8, 8, 0x6D);
        let tuple = unicity_tuple(&cipher, examiner.secret_key());
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        for _ in 0..32 {
            let x = BitVec::random(8, &mut rng);
            let shifted = x.xor(examiner.secret_key()).unwrap();
            let a = evaluate(&x, &tuple, &cipher, &oracle).unwrap();
            let b = evaluate(&shifted, &tuple, &cipher, &oracle).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.bits(), b.bits());
        }
    }

    #[test]
    fn zero_hidden_key_is_a_unicity_violation() {
        let (oracle, _, cipher) = setup(8, 8, 0x00);
        let tuple = BlockTuple::from_raw(8, vec![0x00, 0x01]).unwrap();
        let x = BitVec::from_u64(8, 0x2A);
        assert!(matches!(
            evaluate(&x, &tuple, &cipher, &oracle),
            Err(HidingError::UnicityViolation { .. })
        ));
    }

    #[test]
    fn full_domain_matches_pointwise_evaluation() {
        let (oracle, examiner, cipher) = setup(8, 8, 0x4C);
        let tuple = unicity_tuple(&cipher, examiner.secret_key());
        let before = oracle.query_counts();
        let table = evaluate_full_domain(&tuple, &cipher, &oracle).unwrap();
        let after = oracle.query_counts();
        assert_eq!(after.superposition, before.superposition + 1);
        assert_eq!(after.classical_encrypt, before.classical_encrypt);

        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..16 {
            let x = rng.random_range(0..256usize);
            let direct =
                evaluate(&BitVec::from_u64(8, x as u64), &tuple, &cipher, &oracle).unwrap();
            assert_eq!(table.set_encoding(x), direct);
            assert_eq!(table.set_encoding(x).bits(), direct.bits());
        }
    }

    #[test]
    fn hiding_function_is_exactly_two_to_one_with_the_key_as_period() {
        let (oracle, examiner, cipher) = setup(8, 8, 0xB1);
        let secret = examiner.secret_key().to_u64();
        let tuple = unicity_tuple(&cipher, examiner.secret_key());
        let table = evaluate_full_domain(&tuple, &cipher, &oracle).unwrap();

        let mut groups: HashMap<&[u64], Vec<u64>> = HashMap::new();
        for x in 0..256usize {
            groups.entry(table.encoding(x)).or_default().push(x as u64);
        }
        assert_eq!(groups.len(), 128, "image cardinality must be 2^(k-1)");
        for (_, xs) in groups {
            assert_eq!(xs.len(), 2, "every image value must have two preimages");
            assert_eq!(xs[0] ^ xs[1], secret, "collision pairs must differ by the key");
        }
    }

    #[test]
    fn full_domain_reports_offending_input_for_zero_key() {
        let (oracle, _, cipher) = setup(8, 8, 0x00);
        let tuple = BlockTuple::from_raw(8, vec![0x00, 0x01]).unwrap();
        match evaluate_full_domain(&tuple, &cipher, &oracle) {
            Err(HidingError::UnicityViolation { input }) => {
                assert_eq!(input.to_u64(), 0);
            }
            other => panic!("expected unicity violation, got {other:?}"),
        }
    }

    #[test]
    fn packing_roundtrip_odd_widths() {
        // 20-bit blocks straddle word boundaries at r = 2: entry is 80 bits.
        let blocks = [0xABCDE, 0x12345, 0xFFFFF, 0x00001];
        let mut words = vec![0u64; 2];
        pack_blocks(&mut words, blocks.iter().copied(), 20);
        for (i, &b) in blocks.iter().enumerate() {
            assert_eq!(unpack_block(&words, i * 20, 20), b);
        }
    }
}
