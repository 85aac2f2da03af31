use std::fmt::Write;

use serde::Serialize;

use super::{Procedure, Terminator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Jump,
    Then,
    Else,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CfgEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// Control-flow graph of one procedure: nodes are blocks in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cfg {
    pub nodes: Vec<String>,
    pub edges: Vec<CfgEdge>,
    pub entry: usize,
}

pub(super) fn build(p: &Procedure) -> Cfg {
    let index = |label: &str| p.blocks.iter().position(|b| b.label == label).expect("checked branch target");
    let mut edges = Vec::new();
    for (from, block) in p.blocks.iter().enumerate() {
        match &block.terminator {
            Terminator::Branch(to) => edges.push(CfgEdge { from, to: index(to), kind: EdgeKind::Jump }),
            Terminator::CondBranch { then_label, else_label, .. } => {
                edges.push(CfgEdge { from, to: index(then_label), kind: EdgeKind::Then });
                edges.push(CfgEdge { from, to: index(else_label), kind: EdgeKind::Else });
            }
            Terminator::Return(_) => {}
        }
    }
    Cfg { nodes: p.blocks.iter().map(|b| b.label.clone()).collect(), edges, entry: 0 }
}

impl Cfg {
    pub fn successors(&self, node: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.from == node).map(|e| e.to).collect()
    }

    pub fn predecessors(&self, node: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.to == node).map(|e| e.from).collect()
    }

    pub fn node(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == label)
    }

    /// Retreating edges of a depth-first walk from the entry; for the
    /// reducible graphs the builders emit these are exactly the loop back-edges.
    pub fn back_edges(&self) -> Vec<(usize, usize)> {
        let mut state = vec![0u8; self.nodes.len()];
        let mut out = Vec::new();
        self.dfs(self.entry, &mut state, &mut out);
        out
    }

    fn dfs(&self, node: usize, state: &mut [u8], out: &mut Vec<(usize, usize)>) {
        state[node] = 1;
        for next in self.successors(node) {
            match state[next] {
                0 => self.dfs(next, state, out),
                1 => out.push((node, next)),
                _ => {}
            }
        }
        state[node] = 2;
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph cfg {\n  node [shape=box];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if i == self.entry { ", style=bold" } else { "" };
            let _ = writeln!(out, "  n{i} [label=\"{n}\"{shape}];");
        }
        for e in &self.edges {
            let label = match e.kind {
                EdgeKind::Jump => "",
                EdgeKind::Then => " [label=\"true\"]",
                EdgeKind::Else => " [label=\"false\"]",
            };
            let _ = writeln!(out, "  n{} -> n{}{};", e.from, e.to, label);
        }
        out.push_str("}\n");
        out
    }
}
