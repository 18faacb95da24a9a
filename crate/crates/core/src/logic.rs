//! Flattened boolean structure shared by the cut-set engine and the exact
//! evaluator. House events are folded into constants, single-input gates
//! collapse, and basic events are numbered in bytewise id order so that
//! index order equals canonical id order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{EventKind, FaultTree, GateKind, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Input {
    Event(u32),
    Gate(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Lit {
    True,
    False,
    Node(Input),
}

#[derive(Debug, Clone)]
pub(crate) struct LGate {
    pub id: String,
    pub kind: GateKind,
    pub inputs: Vec<Input>,
}

#[derive(Debug, Clone)]
pub(crate) struct LEvent {
    pub id: String,
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Logic {
    pub events: Vec<LEvent>,
    pub gates: Vec<LGate>,
    pub root: Lit,
}

impl Logic {
    pub fn from_tree(ft: &FaultTree, top: &str) -> Result<Self> {
        let mut b = LogicBuilder::default();
        let root = b.add_tree(ft, top)?;
        Ok(b.finish(root))
    }
}

#[derive(Default)]
pub(crate) struct LogicBuilder {
    events: Vec<LEvent>,
    event_index: BTreeMap<String, u32>,
    gates: Vec<LGate>,
    memo: BTreeMap<(String, String), Lit>,
    synthetic: usize,
}

impl LogicBuilder {
    /// Adds `node` of `ft` and everything below it. Basic events are shared
    /// by id across trees; gates are scoped by tree.
    pub fn add_tree(&mut self, ft: &FaultTree, node: &str) -> Result<Lit> {
        let mut stack = Vec::new();
        self.visit(ft, node, &mut stack)
    }

    pub fn event(&mut self, id: &str, probability: f64) -> Lit {
        let idx = match self.event_index.get(id) {
            Some(&i) => i,
            None => {
                let i = self.events.len() as u32;
                self.events.push(LEvent {
                    id: String::from(id),
                    probability,
                });
                self.event_index.insert(String::from(id), i);
                i
            }
        };
        Lit::Node(Input::Event(idx))
    }

    /// Builds a gate over already-added literals, folding constants.
    pub fn combine(&mut self, kind: GateKind, lits: &[Lit]) -> Lit {
        self.synthetic += 1;
        let id = format!("#{}", self.synthetic);
        self.fold(id, kind, lits)
    }

    fn visit(&mut self, ft: &FaultTree, id: &str, stack: &mut Vec<String>) -> Result<Lit> {
        let key = (ft.id.clone(), String::from(id));
        if let Some(&lit) = self.memo.get(&key) {
            return Ok(lit);
        }
        if let Some(pos) = stack.iter().position(|s| s == id) {
            let mut chain: Vec<&str> = stack[pos..].iter().map(String::as_str).collect();
            chain.push(id);
            return Err(Error::Cycle(chain.join("→")));
        }
        let lit = match ft.nodes.get(id) {
            None => return Err(Error::UnknownId(String::from(id))),
            Some(Node::Event(e)) => {
                if e.kind == EventKind::House {
                    if e.house_state.unwrap_or(e.probability >= 1.0) {
                        Lit::True
                    } else {
                        Lit::False
                    }
                } else {
                    self.event(&e.id, e.probability)
                }
            }
            Some(Node::Gate(g)) => {
                stack.push(String::from(id));
                let mut lits = Vec::with_capacity(g.inputs.len());
                for input in &g.inputs {
                    lits.push(self.visit(ft, input, stack)?);
                }
                stack.pop();
                self.fold(g.id.clone(), g.kind, &lits)
            }
        };
        self.memo.insert(key, lit);
        Ok(lit)
    }

    fn fold(&mut self, id: String, kind: GateKind, lits: &[Lit]) -> Lit {
        let trues = lits.iter().filter(|l| **l == Lit::True).count();
        let falses = lits.iter().filter(|l| **l == Lit::False).count();
        let mut nodes: Vec<Input> = lits
            .iter()
            .filter_map(|l| match l {
                Lit::Node(n) => Some(*n),
                _ => None,
            })
            .collect();
        match kind {
            GateKind::And => {
                if falses > 0 {
                    return Lit::False;
                }
                dedup(&mut nodes);
                self.emit(id, GateKind::And, nodes, Lit::True)
            }
            GateKind::Or => {
                if trues > 0 {
                    return Lit::True;
                }
                dedup(&mut nodes);
                self.emit(id, GateKind::Or, nodes, Lit::False)
            }
            GateKind::AtLeast(k) => {
                let need = k.saturating_sub(trues);
                if need == 0 {
                    Lit::True
                } else if need > nodes.len() {
                    Lit::False
                } else if need == nodes.len() {
                    self.emit(id, GateKind::And, nodes, Lit::True)
                } else if need == 1 {
                    dedup(&mut nodes);
                    self.emit(id, GateKind::Or, nodes, Lit::False)
                } else {
                    self.emit(id, GateKind::AtLeast(need), nodes, Lit::True)
                }
            }
        }
    }

    fn emit(&mut self, id: String, kind: GateKind, inputs: Vec<Input>, empty: Lit) -> Lit {
        match inputs.len() {
            0 => empty,
            1 if !matches!(kind, GateKind::AtLeast(_)) => Lit::Node(inputs[0]),
            _ => {
                let idx = self.gates.len() as u32;
                self.gates.push(LGate { id, kind, inputs });
                Lit::Node(Input::Gate(idx))
            }
        }
    }

    /// Keeps only what `root` reaches and renumbers events by id.
    pub fn finish(self, root: Lit) -> Logic {
        let start = match root {
            Lit::Node(n) => n,
            constant => {
                return Logic {
                    events: Vec::new(),
                    gates: Vec::new(),
                    root: constant,
                }
            }
        };
        let mut seen_gates = BTreeSet::new();
        let mut seen_events = BTreeSet::new();
        let mut gate_order = Vec::new();
        let mut todo = alloc::vec![start];
        while let Some(n) = todo.pop() {
            match n {
                Input::Event(e) => {
                    seen_events.insert(e);
                }
                Input::Gate(g) => {
                    if seen_gates.insert(g) {
                        gate_order.push(g);
                        todo.extend(self.gates[g as usize].inputs.iter().copied());
                    }
                }
            }
        }
        let mut kept: Vec<u32> = seen_events.into_iter().collect();
        kept.sort_by(|a, b| {
            self.events[*a as usize]
                .id
                .cmp(&self.events[*b as usize].id)
        });
        let event_map: BTreeMap<u32, u32> = kept
            .iter()
            .enumerate()
            .map(|(new, old)| (*old, new as u32))
            .collect();
        gate_order.sort_unstable();
        let gate_map: BTreeMap<u32, u32> = gate_order
            .iter()
            .enumerate()
            .map(|(new, old)| (*old, new as u32))
            .collect();
        let remap = |i: Input| match i {
            Input::Event(e) => Input::Event(event_map[&e]),
            Input::Gate(g) => Input::Gate(gate_map[&g]),
        };
        let events = kept
            .iter()
            .map(|old| self.events[*old as usize].clone())
            .collect();
        let gates = gate_order
            .iter()
            .map(|old| {
                let g = &self.gates[*old as usize];
                LGate {
                    id: g.id.clone(),
                    kind: g.kind,
                    inputs: g.inputs.iter().copied().map(remap).collect(),
                }
            })
            .collect();
        Logic {
            events,
            gates,
            root: Lit::Node(remap(start)),
        }
    }
}

fn dedup(v: &mut Vec<Input>) {
    let mut seen = BTreeSet::new();
    v.retain(|x| seen.insert(*x));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BasicEvent, Gate, TopKind};

    fn tree(nodes: Vec<Node>) -> FaultTree {
        let mut ft = FaultTree::new("T", "TOP", TopKind::FailureOnDemand);
        for n in nodes {
            ft.insert(n);
        }
        ft
    }

    #[test]
    fn events_sorted_by_id() {
        let ft = tree(vec![
            Gate::or("TOP", ["Z", "A", "M"]).into(),
            BasicEvent::hardware("Z", 0.1).into(),
            BasicEvent::hardware("A", 0.2).into(),
            BasicEvent::hardware("M", 0.3).into(),
        ]);
        let l = Logic::from_tree(&ft, "TOP").unwrap();
        let ids: Vec<&str> = l.events.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["A", "M", "Z"]);
    }

    #[test]
    fn house_events_fold() {
        let ft = tree(vec![
            Gate::and("TOP", ["H1", "G"]).into(),
            Gate::or("G", ["A", "H0"]).into(),
            BasicEvent::house("H1", true).into(),
            BasicEvent::house("H0", false).into(),
            BasicEvent::hardware("A", 0.2).into(),
        ]);
        let l = Logic::from_tree(&ft, "TOP").unwrap();
        assert_eq!(l.root, Lit::Node(Input::Event(0)));
        assert!(l.gates.is_empty());

        let ft = tree(vec![
            Gate::at_least("TOP", 2, ["H1", "A", "B"]).into(),
            BasicEvent::house("H1", true).into(),
            BasicEvent::hardware("A", 0.2).into(),
            BasicEvent::hardware("B", 0.2).into(),
        ]);
        let l = Logic::from_tree(&ft, "TOP").unwrap();
        assert_eq!(l.gates.len(), 1);
        assert_eq!(l.gates[0].kind, GateKind::Or);
    }

    #[test]
    fn cycle_reports_chain() {
        let ft = tree(vec![
            Gate::or("TOP", ["A"]).into(),
            Gate::and("A", ["B"]).into(),
            Gate::and("B", ["A"]).into(),
        ]);
        assert_eq!(
            Logic::from_tree(&ft, "TOP").unwrap_err(),
            Error::Cycle(String::from("A→B→A"))
        );
    }
}
