//! Boolean circuits over XOR and AND.

use serde::{Deserialize, Serialize};

use crate::bits;

use super::{QfheError, Result};

/// Wires `0..inputs` are the inputs; gate `i` defines wire `inputs + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Xor(usize, usize),
    And(usize, usize),
    Not(usize),
    Const(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCircuit {
    inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

impl ClassicalCircuit {
    pub fn new(inputs: usize, gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self> {
        for (i, g) in gates.iter().enumerate() {
            let defined = inputs + i;
            let refs: &[usize] = match g {
                Gate::Xor(a, b) | Gate::And(a, b) => &[*a, *b],
                Gate::Not(a) => &[*a],
                Gate::Const(_) => &[],
            };
            if let Some(&bad) = refs.iter().find(|&&w| w >= defined) {
                return Err(QfheError::BadWire(bad));
            }
        }
        let total = inputs + gates.len();
        if let Some(&bad) = outputs.iter().find(|&&w| w >= total) {
            return Err(QfheError::BadWire(bad));
        }
        Ok(Self {
            inputs,
            gates,
            outputs,
        })
    }

    /// Pass-through of `n` bits.
    pub fn identity(n: usize) -> Self {
        Self {
            inputs: n,
            gates: Vec::new(),
            outputs: (0..n).collect(),
        }
    }

    /// Circuit with no inputs producing the given constant.
    pub fn constant(value: &[bool]) -> Self {
        Self {
            inputs: 0,
            gates: value.iter().map(|&b| Gate::Const(b)).collect(),
            outputs: (0..value.len()).collect(),
        }
    }

    /// Lookup table as a sum of minterms: input `i` (read most significant
    /// bit first) maps to `table[i]` on `output_bits` bits. Inputs past the
    /// table map to 0.
    pub fn lookup(input_bits: usize, table: &[u64], output_bits: usize) -> Self {
        let mut gates = Vec::new();
        let mut next = input_bits;
        let mut push = |g: Gate, gates: &mut Vec<Gate>| {
            gates.push(g);
            next += 1;
            next - 1
        };
        let negated: Vec<usize> = (0..input_bits)
            .map(|w| push(Gate::Not(w), &mut gates))
            .collect();
        let zero = push(Gate::Const(false), &mut gates);
        let one = push(Gate::Const(true), &mut gates);
        let minterms: Vec<usize> = (0..table.len())
            .map(|index| {
                (0..input_bits).fold(one, |acc, i| {
                    let literal = if bits::bit(index as u64, input_bits, i) {
                        i
                    } else {
                        negated[i]
                    };
                    push(Gate::And(acc, literal), &mut gates)
                })
            })
            .collect();
        let outputs = (0..output_bits)
            .map(|j| {
                table
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| bits::bit(v, output_bits, j))
                    .fold(zero, |acc, (index, _)| {
                        push(Gate::Xor(acc, minterms[index]), &mut gates)
                    })
            })
            .collect();
        Self {
            inputs: input_bits,
            gates,
            outputs,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Plaintext evaluation.
    pub fn evaluate(&self, input: &[bool]) -> Result<Vec<bool>> {
        if input.len() != self.inputs {
            return Err(QfheError::InputLength {
                expected: self.inputs,
                found: input.len(),
            });
        }
        let mut wires = input.to_vec();
        for g in &self.gates {
            let v = match *g {
                Gate::Xor(a, b) => wires[a] ^ wires[b],
                Gate::And(a, b) => wires[a] & wires[b],
                Gate::Not(a) => !wires[a],
                Gate::Const(c) => c,
            };
            wires.push(v);
        }
        Ok(self.outputs.iter().map(|&w| wires[w]).collect())
    }
}
