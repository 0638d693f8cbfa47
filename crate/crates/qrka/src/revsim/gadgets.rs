//! The reversible gadgets of the attack's data path: an unsigned comparator,
//! a controlled register copy, and the four-copy min/max selection network
//! that writes the canonical set encoding.
//!
//! The comparator ripples the borrow chain of `i - j`: the final borrow is
//! the sign of the one's-complement difference, i.e. `i < j`. Borrows are
//! majority functions `maj(NOT i_m, j_m, b_m)`, built from Toffolis with the
//! negative control realized as NOT-control-NOT. The chain is mirrored to
//! return every borrow ancilla to zero, with the answer CNOT-ed onto the out
//! wire between the two halves.
//!
//! In the min/max network the four controlled copies run *between* the
//! forward chain and its mirror, so the adder garbage is uncomputed after the
//! copies have fired. The comparison bit itself stays set on its wire: in the
//! quantum circuit it would have to be uncomputed against a copied register
//! (or absorbed as garbage that factors out of the interference), and this
//! simulator keeps it visible rather than guessing a cleanup.

use super::{Gate, ReversibleCircuit, Role};

/// Wire bases for one borrow chain instance.
struct ComparatorWires {
    lhs: usize,
    rhs: usize,
    scratch: usize,
}

/// Forward borrow chain for an `n`-bit unsigned comparison. Scratch wire `m`
/// ends up holding borrow `m+1`; the last scratch wire is the answer.
fn borrow_chain(n: usize, wires: &ComparatorWires) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(5 * n - 2);
    for m in 0..n {
        let lhs = wires.lhs + m;
        let rhs = wires.rhs + m;
        let out = wires.scratch + m;
        // borrow_{m+1} = maj(NOT lhs_m, rhs_m, borrow_m), with borrow_0 = 0.
        gates.push(Gate::Not { target: lhs });
        gates.push(Gate::Toffoli { c0: lhs, c1: rhs, target: out });
        if m > 0 {
            let prev = wires.scratch + m - 1;
            gates.push(Gate::Toffoli { c0: lhs, c1: prev, target: out });
            gates.push(Gate::Toffoli { c0: rhs, c1: prev, target: out });
        }
        gates.push(Gate::Not { target: lhs });
    }
    gates
}

/// Unsigned comparator: after the run, `out = 1` iff `i < j`, with `i` and
/// `j` restored and every scratch wire back at zero.
///
/// Wire layout: `i` at `[0, n)`, `j` at `[n, 2n)`, `out` at `2n`, scratch at
/// `[2n+1, 3n+1)`. All non-input wires must start at zero.
pub fn build_comparator(n: usize) -> ReversibleCircuit {
    assert!(n >= 1, "comparator needs at least one bit");
    let width = 3 * n + 1;
    let wires = ComparatorWires {
        lhs: 0,
        rhs: n,
        scratch: 2 * n + 1,
    };
    let out = 2 * n;

    let mut circuit = ReversibleCircuit::new(width);
    circuit.add_register("i", (0..n).collect(), Role::Input).unwrap();
    circuit.add_register("j", (n..2 * n).collect(), Role::Input).unwrap();
    circuit.add_register("out", vec![out], Role::Output).unwrap();
    circuit
        .add_register("scratch", (2 * n + 1..3 * n + 1).collect(), Role::Ancilla)
        .unwrap();

    let forward = borrow_chain(n, &wires);
    for &g in &forward {
        circuit.push(g).unwrap();
    }
    circuit
        .push(Gate::Cnot {
            control: wires.scratch + n - 1,
            target: out,
        })
        .unwrap();
    for &g in forward.iter().rev() {
        circuit.push(g).unwrap();
    }
    circuit
}

/// Controlled register copy: when `ctrl` is set, XORs `src` into `dst` (a
/// true copy when `dst` starts zeroed); `src` and `ctrl` are never modified.
///
/// Wire layout: `src` at `[0, n)`, `ctrl` at `n` (between the registers),
/// `dst` at `[n+1, 2n+1)`.
pub fn build_controlled_copy(n: usize) -> ReversibleCircuit {
    assert!(n >= 1, "copy needs at least one bit");
    let ctrl = n;
    let mut circuit = ReversibleCircuit::new(2 * n + 1);
    circuit.add_register("src", (0..n).collect(), Role::Input).unwrap();
    circuit.add_register("ctrl", vec![ctrl], Role::Input).unwrap();
    circuit
        .add_register("dst", (n + 1..2 * n + 1).collect(), Role::Output)
        .unwrap();
    for b in 0..n {
        circuit
            .push(Gate::Toffoli {
                c0: ctrl,
                c1: b,
                target: n + 1 + b,
            })
            .unwrap();
    }
    circuit
}

fn controlled_copy_gates(ctrl: usize, src: usize, dst: usize, n: usize, negated: bool) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(n + 2);
    if negated {
        gates.push(Gate::Not { target: ctrl });
    }
    for b in 0..n {
        gates.push(Gate::Toffoli {
            c0: ctrl,
            c1: src + b,
            target: dst + b,
        });
    }
    if negated {
        gates.push(Gate::Not { target: ctrl });
    }
    gates
}

/// Min/max selection network over two `width_rn`-bit values: compares, then
/// four controlled copies (two on the comparison bit, two on its negation)
/// route the smaller value to `lo` and the larger to `hi`, and the borrow
/// chain is mirrored afterwards. Equal inputs leave `cmp = 0` and copy the
/// shared value to both targets.
///
/// Wire layout: `c` at `[0, w)`, `cprime` at `[w, 2w)`, `cmp` at `2w`, `lo`
/// at `[2w+1, 3w+1)`, `hi` at `[3w+1, 4w+1)`, scratch at `[4w+1, 5w+1)`. All
/// non-input wires must start at zero.
pub fn build_minmax_network(width_rn: usize) -> ReversibleCircuit {
    let w = width_rn;
    assert!(w >= 1, "min/max network needs at least one bit");
    let width = 5 * w + 1;
    let (c, cprime, cmp, lo, hi, scratch) = (0, w, 2 * w, 2 * w + 1, 3 * w + 1, 4 * w + 1);

    let mut circuit = ReversibleCircuit::new(width);
    circuit.add_register("c", (c..c + w).collect(), Role::Input).unwrap();
    circuit
        .add_register("cprime", (cprime..cprime + w).collect(), Role::Input)
        .unwrap();
    circuit.add_register("cmp", vec![cmp], Role::Output).unwrap();
    circuit.add_register("lo", (lo..lo + w).collect(), Role::Output).unwrap();
    circuit.add_register("hi", (hi..hi + w).collect(), Role::Output).unwrap();
    circuit
        .add_register("scratch", (scratch..scratch + w).collect(), Role::Ancilla)
        .unwrap();

    let wires = ComparatorWires {
        lhs: c,
        rhs: cprime,
        scratch,
    };
    let forward = borrow_chain(w, &wires);
    for &g in &forward {
        circuit.push(g).unwrap();
    }
    // cmp = [c < cprime]
    circuit
        .push(Gate::Cnot {
            control: scratch + w - 1,
            target: cmp,
        })
        .unwrap();

    // cmp set: c is the smaller value. lo takes c, hi takes cprime; the
    // negated copies handle c >= cprime (ties included).
    for g in controlled_copy_gates(cmp, c, lo, w, false) {
        circuit.push(g).unwrap();
    }
    for g in controlled_copy_gates(cmp, cprime, lo, w, true) {
        circuit.push(g).unwrap();
    }
    for g in controlled_copy_gates(cmp, cprime, hi, w, false) {
        circuit.push(g).unwrap();
    }
    for g in controlled_copy_gates(cmp, c, hi, w, true) {
        circuit.push(g).unwrap();
    }

    // Bennett cleanup of the borrow chain, after the copies.
    for &g in forward.iter().rev() {
        circuit.push(g).unwrap();
    }
    circuit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitVec;
    use crate::hiding::{interpret_as_integer, SetEncoding};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn write_reg(state: &mut BitVec, base: usize, width: usize, value: u64) {
        for b in 0..width {
            state.set(base + b, value >> b & 1 == 1);
        }
    }

    fn read_reg(state: &BitVec, base: usize, width: usize) -> u64 {
        (0..width).fold(0, |acc, b| acc | (u64::from(state.get(base + b))) << b)
    }

    #[test]
    fn comparator_hand_examples() {
        let c = build_comparator(3);
        // i = 2, j = 5: 2 < 5.
        let out_bit = 1u64 << 6;
        assert_eq!(c.run_bits(2 | 5 << 3) & out_bit, out_bit);
        // i = j = 0: not less.
        assert_eq!(c.run_bits(0), 0);
        // i = 5, j = 2: not less.
        assert_eq!(c.run_bits(5 | 2 << 3) & out_bit, 0);
    }

    #[test]
    fn comparator_exhaustive_n6() {
        let n = 6;
        let c = build_comparator(n);
        for i in 0..1u64 << n {
            for j in 0..1u64 << n {
                let input = i | j << n;
                let output = c.run_bits(input);
                let out = output >> (2 * n) & 1;
                assert_eq!(out == 1, i < j, "comparator wrong at {i} vs {j}");
                // Inputs restored, every scratch wire back at zero.
                assert_eq!(output & !(1 << (2 * n)), input);
            }
        }
    }

    #[test]
    fn comparator_is_reversible_at_small_widths() {
        for n in 1..=5 {
            assert!(build_comparator(n).verify_reversible().unwrap());
        }
    }

    #[test]
    fn controlled_copy_semantics() {
        let n = 4;
        let c = build_controlled_copy(n);
        let ctrl = 1u64 << n;
        for src in 0..1u64 << n {
            // ctrl = 0: nothing moves.
            assert_eq!(c.run_bits(src), src);
            // ctrl = 1, dst zeroed: dst becomes src.
            let out = c.run_bits(src | ctrl);
            assert_eq!(out, src | ctrl | src << (n + 1));
        }
    }

    #[test]
    fn controlled_copy_is_xor_on_dirty_target() {
        let n = 2;
        let c = build_controlled_copy(n);
        for input in 0..1u64 << (2 * n + 1) {
            let src = input & 0b11;
            let ctrl = input >> n & 1;
            let dst = input >> (n + 1) & 0b11;
            let expect = src | ctrl << n | (dst ^ (if ctrl == 1 { src } else { 0 })) << (n + 1);
            assert_eq!(c.run_bits(input), expect);
        }
        for n in 1..=7 {
            assert!(build_controlled_copy(n).verify_reversible().unwrap());
        }
    }

    #[test]
    fn minmax_exhaustive_w4() {
        let w = 4;
        let net = build_minmax_network(w);
        for a in 0..1u64 << w {
            for b in 0..1u64 << w {
                let input = a | b << w;
                let output = net.run_bits(input);
                let cmp = output >> (2 * w) & 1;
                let lo = output >> (2 * w + 1) & 0xF;
                let hi = output >> (3 * w + 1) & 0xF;
                let scratch = output >> (4 * w + 1);
                assert_eq!(cmp == 1, a < b);
                assert_eq!(lo, a.min(b));
                assert_eq!(hi, a.max(b));
                assert_eq!(scratch, 0, "borrow ancillas must be uncomputed");
                assert_eq!(output & ((1 << (2 * w)) - 1), input, "data inputs restored");
                if a == b {
                    assert_eq!(cmp, 0);
                    assert_eq!(lo, a);
                    assert_eq!(hi, a);
                }
            }
        }
    }

    #[test]
    fn minmax_is_reversible_at_small_widths() {
        for w in 1..=3 {
            assert!(build_minmax_network(w).verify_reversible().unwrap());
        }
    }

    #[test]
    fn minmax_is_comparator_then_copies_then_mirror() {
        let w = 3;
        let net = build_minmax_network(w);
        let comparator = build_comparator(w);

        // The comparator embeds in the network with identical wire indices
        // except its scratch block, which moves past lo and hi.
        let remap = |wire: usize| if wire > 2 * w { wire + 2 * w } else { wire };
        let remap_gate = |g: &Gate| match *g {
            Gate::Not { target } => Gate::Not { target: remap(target) },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: remap(control),
                target: remap(target),
            },
            Gate::Toffoli { c0, c1, target } => Gate::Toffoli {
                c0: remap(c0),
                c1: remap(c1),
                target: remap(target),
            },
            Gate::CSwap { control, a, b } => Gate::CSwap {
                control: remap(control),
                a: remap(a),
                b: remap(b),
            },
        };

        let mapped: Vec<Gate> = comparator.gates().iter().map(remap_gate).collect();
        let half = comparator.gates().len() / 2; // forward chain length
        let (cmp, lo, hi) = (2 * w, 2 * w + 1, 3 * w + 1);
        let mut expected: Vec<Gate> = Vec::new();
        expected.extend_from_slice(&mapped[..half + 1]); // forward + out CNOT
        expected.extend(controlled_copy_gates(cmp, 0, lo, w, false));
        expected.extend(controlled_copy_gates(cmp, w, lo, w, true));
        expected.extend(controlled_copy_gates(cmp, w, hi, w, false));
        expected.extend(controlled_copy_gates(cmp, 0, hi, w, true));
        expected.extend_from_slice(&mapped[half + 1..]); // mirrored chain
        assert_eq!(net.gates(), expected.as_slice());
    }

    #[test]
    fn gate_counts_are_exactly_linear() {
        for n in 1..=12 {
            let stats = build_comparator(n).gate_stats();
            assert_eq!(stats.total(), 10 * n - 3);
            assert_eq!(stats.cnot, 1);
            assert_eq!(stats.not, 4 * n);
            assert_eq!(stats.toffoli, 6 * n - 4);
        }
        for w in 1..=8 {
            assert_eq!(build_minmax_network(w).gate_stats().total(), 14 * w + 1);
        }
    }

    #[test]
    fn ancilla_hygiene_via_register_roles() {
        for (circuit, data_bits) in [
            (build_comparator(4), 8usize),
            (build_minmax_network(2), 4),
        ] {
            let scratch = circuit.register("scratch").unwrap().wires.clone();
            for data in 0..1u64 << data_bits {
                let out = circuit.run_bits(data);
                for &wire in &scratch {
                    assert_eq!(out >> wire & 1, 0, "scratch wire {wire} left dirty");
                }
            }
        }
    }

    #[test]
    fn minmax_agrees_with_set_encoding_at_rn16() {
        // Two-block tuples of 8-bit blocks: 16-bit integers, network width 81.
        let w = 16;
        let net = build_minmax_network(w);
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..64 {
            let a = crate::cipher::BlockTuple::from_raw(
                8,
                vec![rng.random::<u8>() as u64, rng.random::<u8>() as u64],
            )
            .unwrap();
            let b = crate::cipher::BlockTuple::from_raw(
                8,
                vec![rng.random::<u8>() as u64, rng.random::<u8>() as u64],
            )
            .unwrap();
            if a == b {
                continue;
            }
            let encoding = SetEncoding::new(a.clone(), b.clone()).unwrap();

            let mut input = BitVec::zeros(net.width());
            write_reg(&mut input, 0, w, interpret_as_integer(&a).to_u64());
            write_reg(&mut input, w, w, interpret_as_integer(&b).to_u64());
            let output = net.run(&input).unwrap();

            let lo = read_reg(&output, 2 * w + 1, w);
            let hi = read_reg(&output, 3 * w + 1, w);
            assert_eq!(lo, interpret_as_integer(encoding.lo()).to_u64());
            assert_eq!(hi, interpret_as_integer(encoding.hi()).to_u64());
        }
    }
}
