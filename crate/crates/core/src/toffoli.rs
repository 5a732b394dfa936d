//! Ancilla-free Toffoli decomposition into two-qudit controlled increments,
//! using levels `|d⟩` and `|d+1⟩` of each wire as temporary storage.
//!
//! Controls are arranged in a balanced in-order binary tree. Each internal
//! node's wire is raised from `d−1` to `d` once every control below it is
//! satisfied, so after `⌈log2 n⌉` stages a single wire signals the whole
//! conjunction.

use serde::Serialize;

use crate::circuit::{Circuit, Delta, GateOp};
use crate::error::{guard, Error, Result};
use crate::state::apply_to_digits;
use crate::digits;

/// Largest `d^n` accepted by [`verify_equivalence`].
pub const MAX_EQUIV_DIM: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeLevel {
    /// Wires raised to level `d` by this level's nodes.
    pub carriers: Vec<usize>,
    /// Non-empty sub-cycles of simultaneous gates, in execution order.
    pub subcycles: Vec<Vec<GateOp>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeStep {
    /// Gates on disjoint wires, applied together.
    Gates(Vec<GateOp>),
    /// Wires currently holding an elevated level.
    Exposed(Vec<usize>),
}

/// The compute half of the decomposition for controls on wires `0..controls`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlTree {
    pub d: usize,
    pub controls: usize,
    pub levels: Vec<TreeLevel>,
    /// The wire and level meaning "every control is `d−1`"; `None` without controls.
    pub top: Option<(usize, usize)>,
}

struct Built {
    wire: usize,
    good: usize,
    level: usize,
}

enum Node {
    Full { a: Built, b: Built, c: usize },
    Single { child: Built, c: usize },
}

fn build(lo: usize, hi: usize, d: usize, out: &mut Vec<(usize, Node)>) -> Option<Built> {
    if lo >= hi {
        return None;
    }
    let mid = lo + (hi - lo) / 2;
    let left = build(lo, mid, d, out);
    let right = build(mid + 1, hi, d, out);
    let (level, node) = match (left, right) {
        (None, None) => {
            return Some(Built {
                wire: mid,
                good: d - 1,
                level: 0,
            })
        }
        (Some(child), None) | (None, Some(child)) => (child.level + 1, Node::Single { child, c: mid }),
        (Some(a), Some(b)) => (a.level.max(b.level) + 1, Node::Full { a, b, c: mid }),
    };
    out.push((level, node));
    Some(Built {
        wire: mid,
        good: d,
        level,
    })
}

impl ControlTree {
    pub fn new(controls: usize, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain(format!("logical dimension must be >= 2, got {d}")));
        }
        let mut nodes = Vec::new();
        let top = build(0, controls, d, &mut nodes);
        let height = top.as_ref().map_or(0, |t| t.level);
        let mut levels = Vec::with_capacity(height);
        for j in 1..=height {
            let mut here: Vec<&Node> = nodes.iter().filter(|(l, _)| *l == j).map(|(_, n)| n).collect();
            here.sort_by_key(|n| match n {
                Node::Full { c, .. } | Node::Single { c, .. } => *c,
            });
            let mut sub = [Vec::new(), Vec::new(), Vec::new()];
            let mut carriers = Vec::new();
            for node in here {
                match node {
                    Node::Full { a, b, c } => {
                        let raise = GateOp::cinc(a.wire, a.good, b.wire, b.good + 2, Delta::Inc);
                        sub[0].push(raise.clone());
                        sub[1].push(GateOp::cinc(b.wire, b.good + 1, *c, d + 1, Delta::Inc));
                        sub[2].push(raise.inverse().expect("cinc is invertible"));
                        carriers.push(*c);
                    }
                    Node::Single { child, c } => {
                        sub[1].push(GateOp::cinc(child.wire, child.good, *c, d + 1, Delta::Inc));
                        carriers.push(*c);
                    }
                }
            }
            levels.push(TreeLevel {
                carriers,
                subcycles: sub.into_iter().filter(|s| !s.is_empty()).collect(),
            });
        }
        Ok(ControlTree {
            d,
            controls,
            levels,
            top: top.map(|t| (t.wire, t.good)),
        })
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    /// Inverse of a level's sub-cycles, in execution order.
    pub fn mirror_subcycles(&self, level: usize) -> Vec<Vec<GateOp>> {
        self.levels[level]
            .subcycles
            .iter()
            .rev()
            .map(|s| {
                s.iter()
                    .rev()
                    .map(|op| op.inverse().expect("cinc is invertible"))
                    .collect()
            })
            .collect()
    }

    /// Appends forward levels, `root`, and the mirror to `c`, closing a time
    /// cycle after every sub-cycle and after the root.
    pub fn emit(&self, c: &mut Circuit, root: GateOp) {
        c.tick();
        for level in &self.levels {
            for sub in &level.subcycles {
                c.extend(sub.iter().cloned());
                c.tick();
            }
        }
        c.push(root);
        c.tick();
        for j in (0..self.height()).rev() {
            for sub in self.mirror_subcycles(j) {
                c.extend(sub);
                c.tick();
            }
        }
    }

    /// Same gate order as [`ControlTree::emit`], interleaved with the points
    /// at which elevated wires sit idle: after each forward level, on both
    /// sides of the root, and before each mirror level. There are
    /// `2⌈log2(controls+1)⌉` such points.
    pub fn schedule(&self, root: GateOp) -> Vec<TreeStep> {
        let top: Vec<usize> = self.top.iter().map(|&(w, _)| w).collect();
        let mut steps = Vec::new();
        for level in &self.levels {
            steps.extend(level.subcycles.iter().cloned().map(TreeStep::Gates));
            steps.push(TreeStep::Exposed(level.carriers.clone()));
        }
        if !top.is_empty() {
            steps.push(TreeStep::Exposed(top.clone()));
        }
        steps.push(TreeStep::Gates(vec![root]));
        if !top.is_empty() {
            steps.push(TreeStep::Exposed(top));
        }
        for j in (0..self.height()).rev() {
            steps.push(TreeStep::Exposed(self.levels[j].carriers.clone()));
            steps.extend(self.mirror_subcycles(j).into_iter().map(TreeStep::Gates));
        }
        steps
    }

    /// Phase `phase` on the state where every control is `d−1` and `target`
    /// holds `target_value`, with the controls lowered through the tree.
    pub fn phase_root(&self, target: usize, target_value: usize, phase: f64) -> GateOp {
        GateOp::Cphase {
            controls: self.top.into_iter().collect(),
            target,
            target_value,
            phase,
        }
    }
}

fn check_nd(n: usize, d: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::domain(format!("decomposition needs n >= 3 wires, got {n}")));
    }
    if d < 2 {
        return Err(Error::domain(format!("logical dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// The three-gate Toffoli on wires 0, 1 (controls) and 2 (target).
pub fn decompose_toffoli3(d: usize) -> Result<Circuit> {
    decompose(3, d)
}

/// The `n`-qudit Toffoli (controls `0..n−1`, target `n−1`) as Cinc gates.
pub fn decompose(n: usize, d: usize) -> Result<Circuit> {
    check_nd(n, d)?;
    let tree = ControlTree::new(n - 1, d)?;
    let (top, good) = tree.top.expect("n >= 3 has controls");
    let mut c = Circuit::uniform(n, d)?;
    tree.emit(&mut c, GateOp::cinc(top, good, n - 1, d, Delta::Inc));
    Ok(c)
}

/// Deletes adjacent inverse pairs (no op in between touching their wires)
/// until none remain. Time cycles emptied by deletion disappear.
pub fn optimize_cancel(circuit: &Circuit) -> Circuit {
    let mut alive: Vec<(usize, GateOp)> = circuit.ops.iter().cloned().enumerate().collect();
    loop {
        let mut hit = None;
        'scan: for i in 0..alive.len() {
            let wires = alive[i].1.wires();
            for j in i + 1..alive.len() {
                if wires.iter().any(|&w| alive[j].1.touches(w)) {
                    if alive[i].1.inverse().as_ref() == Some(&alive[j].1) {
                        hit = Some((i, j));
                        break 'scan;
                    }
                    break;
                }
            }
        }
        let Some((i, j)) = hit else { break };
        alive.remove(j);
        alive.remove(i);
    }
    let mut out = Circuit::new(circuit.wires.clone());
    let mut next_tick = circuit.ticks.iter().peekable();
    for (orig, op) in alive {
        while next_tick.next_if(|&&t| t <= orig).is_some() {
            out.tick();
        }
        out.push(op);
    }
    if next_tick.next().is_some() {
        out.tick();
    }
    out
}

/// Greedy earliest-layer schedule; each entry lists op indices.
pub fn layerize(circuit: &Circuit) -> Vec<Vec<usize>> {
    let mut free_at = vec![0usize; circuit.num_wires()];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for (i, op) in circuit.ops.iter().enumerate() {
        let wires = op.wires();
        let layer = wires.iter().map(|&w| free_at[w]).max().unwrap_or(0);
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push(i);
        for w in wires {
            free_at[w] = layer + 1;
        }
    }
    layers
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionStats {
    pub n: usize,
    pub d: usize,
    pub two_qudit_count: usize,
    pub parallel_depth: usize,
    pub max_level: usize,
    pub wire_count: usize,
}

/// Largest `d^n` for which [`stats`] scans basis inputs instead of bounding
/// levels from the gate moduli.
const SCAN_LIMIT: usize = 1 << 16;

pub fn stats(circuit: &Circuit, d: usize) -> Result<DecompositionStats> {
    circuit.ensure_valid()?;
    let n = circuit.num_wires();
    let two_qudit_count = circuit.ops.iter().filter(|op| op.wires().len() == 2).count();
    let scan = n <= 10
        && (d as u128).checked_pow(n as u32).is_some_and(|s| s <= SCAN_LIMIT as u128)
        && circuit.ops.iter().all(GateOp::is_basis_preserving);
    let max_level = if scan {
        let logical = vec![d; n];
        let mut top = 0;
        for idx in 0..d.pow(n as u32) {
            let mut x = digits::decode(&logical, idx);
            top = top.max(*x.iter().max().unwrap_or(&0));
            for op in &circuit.ops {
                apply_to_digits(op, &mut x);
                top = top.max(*x.iter().max().unwrap_or(&0));
            }
        }
        top
    } else {
        circuit
            .ops
            .iter()
            .map(|op| match op {
                GateOp::Single { modulus, .. }
                | GateOp::Cinc { modulus, .. }
                | GateOp::MultiInc { modulus, .. } => modulus - 1,
                GateOp::Cphase { .. } => 0,
            })
            .fold(d - 1, usize::max)
    };
    Ok(DecompositionStats {
        n,
        d,
        two_qudit_count,
        parallel_depth: layerize(circuit).len(),
        max_level,
        wire_count: n,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub input: Vec<usize>,
    pub got: Vec<usize>,
    pub expected: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub d: usize,
    pub total: usize,
    pub matched: usize,
    pub mismatches: Vec<Mismatch>,
    /// Inputs whose output left the computational subspace.
    pub off_subspace: usize,
}

impl EquivalenceReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.off_subspace == 0 && self.matched == self.total
    }
}

/// Runs every computational basis input through [`decompose`]`(n, d)` and
/// compares against the multi-controlled increment.
pub fn verify_equivalence(n: usize, d: usize) -> Result<EquivalenceReport> {
    check_nd(n, d)?;
    let total = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    guard("d^n for equivalence check", total, MAX_EQUIV_DIM as u128)?;
    verify_circuit(&decompose(n, d)?, d)
}

/// Equivalence check of an arbitrary Cinc circuit against the `n`-qudit Toffoli.
pub fn verify_circuit(circuit: &Circuit, d: usize) -> Result<EquivalenceReport> {
    let n = circuit.num_wires();
    let total = d.checked_pow(n as u32).ok_or_else(|| Error::domain("d^n overflows"))?;
    guard("d^n for equivalence check", total as u128, MAX_EQUIV_DIM as u128)?;
    let reference = GateOp::MultiInc {
        controls: (0..n - 1).collect(),
        control_value: d - 1,
        target: n - 1,
        modulus: d,
    };
    let logical = vec![d; n];
    let mut report = EquivalenceReport {
        n,
        d,
        total,
        matched: 0,
        mismatches: Vec::new(),
        off_subspace: 0,
    };
    for idx in 0..total {
        let input = digits::decode(&logical, idx);
        let mut got = input.clone();
        let mut phase_ok = true;
        for op in &circuit.ops {
            match apply_to_digits(op, &mut got) {
                Some(z) => phase_ok &= (z - 1.0).norm() < 1e-12,
                None => {
                    return Err(Error::domain("equivalence check needs a permutation circuit"))
                }
            }
        }
        let mut expected = input.clone();
        apply_to_digits(&reference, &mut expected);
        if got.iter().any(|&x| x >= d) {
            report.off_subspace += 1;
        }
        if got == expected && phase_ok {
            report.matched += 1;
        } else {
            report.mismatches.push(Mismatch {
                input,
                got,
                expected,
            });
        }
    }
    Ok(report)
}
