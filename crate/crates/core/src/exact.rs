//! Exact top-event probability by Shannon decomposition over basic events.
//!
//! The decomposition is memoized as a reduced ordered decision diagram:
//! every distinct cofactor is built once and shared, and the probability of
//! a node is `p·P(high) + (1 − p)·P(low)`. Variables are ordered by how many
//! gates reference them, most shared first.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::logic::{Input, Lit, Logic};
use crate::model::GateKind;

const FALSE: u32 = 0;
const TRUE: u32 = 1;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Op {
    And,
    Or,
}

struct Diagram {
    /// (level, low, high); entries 0 and 1 are the terminals.
    nodes: Vec<(u32, u32, u32)>,
    unique: BTreeMap<(u32, u32, u32), u32>,
    memo: BTreeMap<(Op, u32, u32), u32>,
}

impl Diagram {
    fn new() -> Self {
        Self {
            nodes: vec![(u32::MAX, FALSE, FALSE), (u32::MAX, TRUE, TRUE)],
            unique: BTreeMap::new(),
            memo: BTreeMap::new(),
        }
    }

    fn mk(&mut self, level: u32, low: u32, high: u32) -> u32 {
        if low == high {
            return low;
        }
        if let Some(&n) = self.unique.get(&(level, low, high)) {
            return n;
        }
        let n = self.nodes.len() as u32;
        self.nodes.push((level, low, high));
        self.unique.insert((level, low, high), n);
        n
    }

    fn apply(&mut self, op: Op, a: u32, b: u32) -> u32 {
        match (op, a, b) {
            (Op::And, FALSE, _) | (Op::And, _, FALSE) => return FALSE,
            (Op::And, TRUE, x) | (Op::And, x, TRUE) => return x,
            (Op::Or, TRUE, _) | (Op::Or, _, TRUE) => return TRUE,
            (Op::Or, FALSE, x) | (Op::Or, x, FALSE) => return x,
            _ => {}
        }
        if a == b {
            return a;
        }
        let key = if a < b { (op, a, b) } else { (op, b, a) };
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let (la, a0, a1) = self.nodes[a as usize];
        let (lb, b0, b1) = self.nodes[b as usize];
        let level = la.min(lb);
        let (a0, a1) = if la == level { (a0, a1) } else { (a, a) };
        let (b0, b1) = if lb == level { (b0, b1) } else { (b, b) };
        let low = self.apply(op, a0, b0);
        let high = self.apply(op, a1, b1);
        let r = self.mk(level, low, high);
        self.memo.insert(key, r);
        r
    }
}

pub(crate) fn exact_probability(logic: &Logic, limit: usize) -> Result<f64> {
    let root = match logic.root {
        Lit::True => return Ok(1.0),
        Lit::False => return Ok(0.0),
        Lit::Node(n) => n,
    };
    let count = logic.events.len();
    if count > limit {
        return Err(Error::TooManyEvents { limit, count });
    }

    let mut shares = vec![0usize; count];
    for g in &logic.gates {
        for input in &g.inputs {
            if let Input::Event(e) = input {
                shares[*e as usize] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|a, b| shares[*b].cmp(&shares[*a]).then(a.cmp(b)));
    let mut level = vec![0u32; count];
    for (pos, e) in order.iter().enumerate() {
        level[*e] = pos as u32;
    }

    let mut d = Diagram::new();
    let mut built: Vec<Option<u32>> = vec![None; logic.gates.len()];
    let top = build(logic, &mut d, &level, &mut built, root);

    let mut prob = vec![0.0f64; d.nodes.len()];
    prob[TRUE as usize] = 1.0;
    for i in 2..d.nodes.len() {
        let (lv, low, high) = d.nodes[i];
        let p = logic.events[order[lv as usize]].probability;
        prob[i] = p * prob[high as usize] + (1.0 - p) * prob[low as usize];
    }
    Ok(prob[top as usize])
}

fn build(
    logic: &Logic,
    d: &mut Diagram,
    level: &[u32],
    built: &mut [Option<u32>],
    node: Input,
) -> u32 {
    match node {
        Input::Event(e) => d.mk(level[e as usize], FALSE, TRUE),
        Input::Gate(g) => {
            if let Some(b) = built[g as usize] {
                return b;
            }
            let gate = &logic.gates[g as usize];
            let inputs: Vec<u32> = gate
                .inputs
                .iter()
                .map(|i| build(logic, d, level, built, *i))
                .collect();
            let b = match gate.kind {
                GateKind::And => inputs.iter().fold(TRUE, |acc, x| d.apply(Op::And, acc, *x)),
                GateKind::Or => inputs.iter().fold(FALSE, |acc, x| d.apply(Op::Or, acc, *x)),
                GateKind::AtLeast(k) => {
                    // row[j]: at least j of the inputs seen so far (from the back)
                    let mut row = vec![FALSE; k + 1];
                    row[0] = TRUE;
                    for x in inputs.iter().rev() {
                        for j in (1..=k).rev() {
                            let with = d.apply(Op::And, *x, row[j - 1]);
                            row[j] = d.apply(Op::Or, with, row[j]);
                        }
                    }
                    row[k]
                }
            };
            built[g as usize] = Some(b);
            b
        }
    }
}
