//! Desk-scale simulation of a quantum related-key attack on a toy block cipher.
//!
//! The attack model grants an adversary encryptions under keys that differ
//! from a hidden target key by chosen XOR masks. When such masked queries can
//! be made in superposition, the hidden key becomes the XOR period of a
//! 2-to-1 hiding function, and period finding recovers it with O(k) quantum
//! queries plus a linear solve over GF(2).
//!
//! The crate builds the whole pipeline at sizes where every claim can be
//! checked exhaustively or statistically on a desktop:
//!
//! - [`gf2`] — bit-packed vectors and incremental Gaussian elimination;
//! - [`cipher`] — a scalable substitution-permutation toy cipher with
//!   unicity-distance machinery (when do r plaintext-ciphertext pairs pin
//!   down the key uniquely?);
//! - [`oracle`] — the related-key oracle holding the hidden key, with honest
//!   accounting of classical and superposition queries;
//! - [`hiding`] — the 2-to-1 hiding function and its canonical min/max set
//!   encoding;
//! - [`simon`] — period-finding samplers (an exact superposition-measurement
//!   simulation plus an analytic cross-check) and the recovery loop;
//! - [`revsim`] — a reversible-circuit simulator for the comparator and
//!   controlled-copy gadgets that realize the set encoding in-circuit;
//! - [`attack`] — end-to-end orchestration: zero-key check, period recovery,
//!   verification, seeded campaigns;
//! - [`cli`] — the `qrka` command-line front end with JSON/CSV reports.
//!
//! Randomized components take explicit seeds; a 64-bit seed fully determines
//! a run.

pub mod attack;
pub mod cipher;
pub mod cli;
pub mod gf2;
pub mod hiding;
pub mod oracle;
pub mod revsim;
pub mod simon;

pub use gf2::{BitMatrix, BitVec};
