//! Bit-exact simulation of reversible circuits over the NOT / CNOT / Toffoli
//! / controlled-SWAP gate set, with named wire registers, exhaustive
//! reversibility checking, gate statistics, and a plain-text netlist format.
//!
//! Basis-state semantics suffice here: every gadget in the attack's data path
//! (comparison, controlled copies, uncomputation) is a classical reversible
//! function, so simulating single bit strings already pins down the circuit's
//! action on every superposition. All four gates are involutions, which makes
//! a circuit's inverse its reversed gate list ([`ReversibleCircuit::mirrored`]).

pub mod gadgets;

use std::fmt;

use thiserror::Error;

use crate::gf2::BitVec;

pub use gadgets::{build_comparator, build_controlled_copy, build_minmax_network};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RevsimError {
    #[error("gate `{gate}` uses wire {wire}, outside circuit width {width}")]
    WireOutOfRange {
        gate: String,
        wire: usize,
        width: usize,
    },
    #[error("gate `{gate}` uses wire {wire} more than once")]
    DuplicateWire { gate: String, wire: usize },
    #[error("register {name:?} reuses wire {wire}")]
    RegisterOverlap { name: String, wire: usize },
    #[error("input width {got} does not match circuit width {want}")]
    WidthMismatch { want: usize, got: usize },
    #[error("exhaustive verification is limited to width {max}, circuit has width {width}")]
    TooWideForExhaustion { width: usize, max: usize },
    #[error("netlist line {line}: {message}")]
    Netlist { line: usize, message: String },
}

/// Exhaustive-verification budget: 2^16 basis states.
pub const MAX_EXHAUSTIVE_WIDTH: usize = 16;

/// The reversible gate set. Every gate is its own inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Not { target: usize },
    Cnot { control: usize, target: usize },
    Toffoli { c0: usize, c1: usize, target: usize },
    CSwap { control: usize, a: usize, b: usize },
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::Not { target } => vec![target],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Toffoli { c0, c1, target } => vec![c0, c1, target],
            Gate::CSwap { control, a, b } => vec![control, a, b],
        }
    }

    fn apply_u64(&self, state: u64) -> u64 {
        match *self {
            Gate::Not { target } => state ^ 1 << target,
            Gate::Cnot { control, target } => state ^ (state >> control & 1) << target,
            Gate::Toffoli { c0, c1, target } => {
                state ^ (state >> c0 & state >> c1 & 1) << target
            }
            Gate::CSwap { control, a, b } => {
                let d = state >> control & (state >> a ^ state >> b) & 1;
                state ^ d << a ^ d << b
            }
        }
    }

    fn apply_bits(&self, state: &mut BitVec) {
        match *self {
            Gate::Not { target } => state.set(target, !state.get(target)),
            Gate::Cnot { control, target } => {
                if state.get(control) {
                    state.set(target, !state.get(target));
                }
            }
            Gate::Toffoli { c0, c1, target } => {
                if state.get(c0) && state.get(c1) {
                    state.set(target, !state.get(target));
                }
            }
            Gate::CSwap { control, a, b } => {
                if state.get(control) {
                    let (va, vb) = (state.get(a), state.get(b));
                    state.set(a, vb);
                    state.set(b, va);
                }
            }
        }
    }
}

impl fmt::Display for Gate {
    /// Netlist form: gate name followed by wire indices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Not { target } => write!(f, "NOT {target}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Toffoli { c0, c1, target } => write!(f, "TOFFOLI {c0} {c1} {target}"),
            Gate::CSwap { control, a, b } => write!(f, "CSWAP {control} {a} {b}"),
        }
    }
}

/// What a register holds at the end of a correct run: caller data that must
/// be restored, a computed output, or scratch that must return to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Input,
    Output,
    Ancilla,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub wires: Vec<usize>,
    pub role: Role,
}

/// An ordered gate list over `width` wires, with optional named registers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibleCircuit {
    width: usize,
    gates: Vec<Gate>,
    registers: Vec<Register>,
}

impl ReversibleCircuit {
    pub fn new(width: usize) -> Self {
        assert!(width > 0, "circuit width must be positive");
        ReversibleCircuit {
            width,
            gates: Vec::new(),
            registers: Vec::new(),
        }
    }

    pub fn from_gates(width: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self, RevsimError> {
        let mut c = Self::new(width);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), RevsimError> {
        let wires = gate.wires();
        for (i, &w) in wires.iter().enumerate() {
            if w >= self.width {
                return Err(RevsimError::WireOutOfRange {
                    gate: gate.to_string(),
                    wire: w,
                    width: self.width,
                });
            }
            if wires[..i].contains(&w) {
                return Err(RevsimError::DuplicateWire {
                    gate: gate.to_string(),
                    wire: w,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn add_register(
        &mut self,
        name: &str,
        wires: Vec<usize>,
        role: Role,
    ) -> Result<(), RevsimError> {
        for &w in &wires {
            if w >= self.width {
                return Err(RevsimError::WireOutOfRange {
                    gate: format!("register {name}"),
                    wire: w,
                    width: self.width,
                });
            }
            if self.registers.iter().any(|r| r.wires.contains(&w)) {
                return Err(RevsimError::RegisterOverlap {
                    name: name.to_string(),
                    wire: w,
                });
            }
        }
        self.registers.push(Register {
            name: name.to_string(),
            wires,
            role,
        });
        Ok(())
    }

    /// The inverse circuit: the reversed gate list (every gate in this set is
    /// an involution). Registers carry over unchanged.
    pub fn mirrored(&self) -> Self {
        ReversibleCircuit {
            width: self.width,
            gates: self.gates.iter().rev().copied().collect(),
            registers: self.registers.clone(),
        }
    }

    /// Applies the gates in order to a basis state of any width.
    pub fn run(&self, input: &BitVec) -> Result<BitVec, RevsimError> {
        if input.width() != self.width {
            return Err(RevsimError::WidthMismatch {
                want: self.width,
                got: input.width(),
            });
        }
        let mut state = input.clone();
        for gate in &self.gates {
            gate.apply_bits(&mut state);
        }
        Ok(state)
    }

    /// Fast path for circuits of at most 64 wires.
    pub fn run_bits(&self, input: u64) -> u64 {
        assert!(self.width <= 64, "run_bits requires width <= 64");
        assert!(
            self.width == 64 || input >> self.width == 0,
            "input exceeds circuit width"
        );
        let mut state = input;
        for gate in &self.gates {
            state = gate.apply_u64(state);
        }
        state
    }

    /// Exhaustively checks that the circuit permutes its basis states.
    /// Injectivity over the full finite domain is bijectivity.
    pub fn verify_reversible(&self) -> Result<bool, RevsimError> {
        if self.width > MAX_EXHAUSTIVE_WIDTH {
            return Err(RevsimError::TooWideForExhaustion {
                width: self.width,
                max: MAX_EXHAUSTIVE_WIDTH,
            });
        }
        let size = 1usize << self.width;
        let mut seen = vec![false; size];
        for input in 0..size as u64 {
            let out = self.run_bits(input) as usize;
            if seen[out] {
                return Ok(false);
            }
            seen[out] = true;
        }
        Ok(true)
    }

    pub fn gate_stats(&self) -> GateStats {
        let mut stats = GateStats::default();
        let mut wire_layer = vec![0usize; self.width];
        for gate in &self.gates {
            match gate {
                Gate::Not { .. } => stats.not += 1,
                Gate::Cnot { .. } => stats.cnot += 1,
                Gate::Toffoli { .. } => stats.toffoli += 1,
                Gate::CSwap { .. } => stats.cswap += 1,
            }
            let layer = 1 + gate.wires().iter().map(|&w| wire_layer[w]).max().unwrap_or(0);
            for w in gate.wires() {
                wire_layer[w] = layer;
            }
            stats.depth = stats.depth.max(layer);
        }
        stats
    }

    /// Plain-text netlist: one gate per line, in circuit order.
    pub fn to_netlist(&self) -> String {
        let mut out = String::new();
        for gate in &self.gates {
            out.push_str(&gate.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses a netlist; the width is inferred as one past the largest wire
    /// index. Blank lines and `#` comments are ignored. Registers are not
    /// part of the format.
    pub fn from_netlist(text: &str) -> Result<Self, RevsimError> {
        let gates = parse_netlist(text)?;
        let width = gates
            .iter()
            .flat_map(|g| g.wires())
            .max()
            .map_or(1, |w| w + 1);
        Self::from_gates(width, gates)
    }
}

/// Gate counts by type plus a greedy-layered depth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateStats {
    pub not: usize,
    pub cnot: usize,
    pub toffoli: usize,
    pub cswap: usize,
    pub depth: usize,
}

impl GateStats {
    pub fn total(&self) -> usize {
        self.not + self.cnot + self.toffoli + self.cswap
    }
}

pub fn parse_netlist(text: &str) -> Result<Vec<Gate>, RevsimError> {
    let mut gates = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let name = parts.next().expect("non-empty line has a first token");
        let wires = parts
            .map(|p| {
                p.parse::<usize>().map_err(|e| RevsimError::Netlist {
                    line,
                    message: format!("bad wire index {p:?}: {e}"),
                })
            })
            .collect::<Result<Vec<usize>, RevsimError>>()?;
        let arity_error = |want: usize| RevsimError::Netlist {
            line,
            message: format!("{name} expects {want} wire(s), got {}", wires.len()),
        };
        let gate = match name {
            "NOT" => {
                if wires.len() != 1 {
                    return Err(arity_error(1));
                }
                Gate::Not { target: wires[0] }
            }
            "CNOT" => {
                if wires.len() != 2 {
                    return Err(arity_error(2));
                }
                Gate::Cnot {
                    control: wires[0],
                    target: wires[1],
                }
            }
            "TOFFOLI" => {
                if wires.len() != 3 {
                    return Err(arity_error(3));
                }
                Gate::Toffoli {
                    c0: wires[0],
                    c1: wires[1],
                    target: wires[2],
                }
            }
            "CSWAP" => {
                if wires.len() != 3 {
                    return Err(arity_error(3));
                }
                Gate::CSwap {
                    control: wires[0],
                    a: wires[1],
                    b: wires[2],
                }
            }
            other => {
                return Err(RevsimError::Netlist {
                    line,
                    message: format!("unknown gate {other:?}"),
                })
            }
        };
        gates.push(gate);
    }
    Ok(gates)
}
