//! Circuit intermediate representation and the line-based `.qdc` text format.
//!
//! Every wire carries `d + 2` physical levels: the `d` computational levels
//! plus the two intermediate levels `|d⟩` and `|d+1⟩` that the Toffoli
//! decomposition parks control information in. Gates declare a modulus `m`
//! and act as the identity on levels `>= m`.
//!
//! A circuit may also carry *time-cycle* boundaries (`tick` lines in the file
//! format). When present they group consecutive ops into cycles for tracing;
//! without them every op is its own cycle.
//!
//! ```text
//! wires 4 4 4
//! cinc c=0 v=1 t=1 m=3 delta=+1
//! cinc c=1 v=2 t=2 m=2 delta=+1
//! cinc c=0 v=1 t=1 m=3 delta=-1
//! ```

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::ops::Range;

use crate::error::{Error, Result};

/// One wire: `logical_dim` computational levels and two extra levels above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WireSpec {
    logical_dim: usize,
}

impl WireSpec {
    pub fn new(logical_dim: usize) -> Result<Self> {
        if logical_dim < 2 {
            return Err(Error::domain(format!(
                "logical dimension must be >= 2, got {logical_dim}"
            )));
        }
        Ok(WireSpec { logical_dim })
    }

    pub fn from_physical(physical_dim: usize) -> Result<Self> {
        if physical_dim < 4 {
            return Err(Error::domain(format!(
                "physical dimension must be >= 4 (d >= 2 plus two extra levels), got {physical_dim}"
            )));
        }
        WireSpec::new(physical_dim - 2)
    }

    pub fn logical_dim(&self) -> usize {
        self.logical_dim
    }

    pub fn physical_dim(&self) -> usize {
        self.logical_dim + 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SingleKind {
    /// Cyclic increment `|k⟩ → |k+1 mod m⟩`.
    X,
    Xinv,
    /// Clock gate `diag(ω^k)`, `ω = e^{2πi/m}`.
    Z,
    /// Generalized Hadamard, entries `ω^{jk}/√m`.
    F,
    Finv,
}

impl SingleKind {
    pub fn inverse(self) -> Option<SingleKind> {
        match self {
            SingleKind::X => Some(SingleKind::Xinv),
            SingleKind::Xinv => Some(SingleKind::X),
            SingleKind::F => Some(SingleKind::Finv),
            SingleKind::Finv => Some(SingleKind::F),
            SingleKind::Z => None,
        }
    }

    fn mnemonic(self) -> &'static str {
        match self {
            SingleKind::X => "x",
            SingleKind::Xinv => "xinv",
            SingleKind::Z => "z",
            SingleKind::F => "f",
            SingleKind::Finv => "finv",
        }
    }

    fn from_mnemonic(s: &str) -> Option<SingleKind> {
        Some(match s {
            "x" => SingleKind::X,
            "xinv" => SingleKind::Xinv,
            "z" => SingleKind::Z,
            "f" => SingleKind::F,
            "finv" => SingleKind::Finv,
            _ => return None,
        })
    }
}

/// Direction of a controlled increment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Delta {
    Inc,
    Dec,
}

impl Delta {
    pub fn inverse(self) -> Delta {
        match self {
            Delta::Inc => Delta::Dec,
            Delta::Dec => Delta::Inc,
        }
    }

    /// `(level + delta) mod modulus` for `level < modulus`.
    pub fn step(self, level: usize, modulus: usize) -> usize {
        match self {
            Delta::Inc => (level + 1) % modulus,
            Delta::Dec => (level + modulus - 1) % modulus,
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Delta::Inc => "+1",
            Delta::Dec => "-1",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateOp {
    Single {
        wire: usize,
        kind: SingleKind,
        modulus: usize,
    },
    /// Adds `delta` mod `modulus` to `target` iff `control` is exactly `|control_value⟩`.
    Cinc {
        control: usize,
        control_value: usize,
        target: usize,
        modulus: usize,
        delta: Delta,
    },
    /// Multiplies by `e^{i·phase}` iff every control and the target hold the stated values.
    Cphase {
        controls: Vec<(usize, usize)>,
        target: usize,
        target_value: usize,
        phase: f64,
    },
    /// Undecomposed multi-controlled increment.
    MultiInc {
        controls: Vec<usize>,
        control_value: usize,
        target: usize,
        modulus: usize,
    },
}

impl GateOp {
    pub fn x(wire: usize, modulus: usize) -> GateOp {
        GateOp::Single {
            wire,
            kind: SingleKind::X,
            modulus,
        }
    }

    pub fn cinc(
        control: usize,
        control_value: usize,
        target: usize,
        modulus: usize,
        delta: Delta,
    ) -> GateOp {
        GateOp::Cinc {
            control,
            control_value,
            target,
            modulus,
            delta,
        }
    }

    /// Wires touched by this op, controls first and target last.
    pub fn wires(&self) -> Vec<usize> {
        match self {
            GateOp::Single { wire, .. } => vec![*wire],
            GateOp::Cinc {
                control, target, ..
            } => vec![*control, *target],
            GateOp::Cphase {
                controls, target, ..
            } => controls
                .iter()
                .map(|&(w, _)| w)
                .chain(std::iter::once(*target))
                .collect(),
            GateOp::MultiInc {
                controls, target, ..
            } => controls
                .iter()
                .copied()
                .chain(std::iter::once(*target))
                .collect(),
        }
    }

    pub fn touches(&self, wire: usize) -> bool {
        self.wires().contains(&wire)
    }

    /// True for ops that map basis states to basis states (possibly with a phase).
    pub fn is_basis_preserving(&self) -> bool {
        match self {
            GateOp::Single { kind, .. } => !matches!(kind, SingleKind::F | SingleKind::Finv),
            _ => true,
        }
    }

    /// The exact inverse op, when it is representable in the IR.
    pub fn inverse(&self) -> Option<GateOp> {
        match self {
            GateOp::Single {
                wire,
                kind,
                modulus,
            } => kind.inverse().map(|kind| GateOp::Single {
                wire: *wire,
                kind,
                modulus: *modulus,
            }),
            GateOp::Cinc {
                control,
                control_value,
                target,
                modulus,
                delta,
            } => Some(GateOp::Cinc {
                control: *control,
                control_value: *control_value,
                target: *target,
                modulus: *modulus,
                delta: delta.inverse(),
            }),
            GateOp::Cphase {
                controls,
                target,
                target_value,
                phase,
            } => Some(GateOp::Cphase {
                controls: controls.clone(),
                target: *target,
                target_value: *target_value,
                phase: -phase,
            }),
            GateOp::MultiInc { .. } => None,
        }
    }

    /// Same `Cinc` parameters with opposite delta.
    pub fn is_inverse_cinc(&self, other: &GateOp) -> bool {
        match (self, other) {
            (
                GateOp::Cinc {
                    control: c1,
                    control_value: v1,
                    target: t1,
                    modulus: m1,
                    delta: d1,
                },
                GateOp::Cinc {
                    control: c2,
                    control_value: v2,
                    target: t2,
                    modulus: m2,
                    delta: d2,
                },
            ) => c1 == c2 && v1 == v2 && t1 == t2 && m1 == m2 && *d1 == d2.inverse(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    WireOutOfRange { wire: usize },
    WiresNotDistinct,
    ControlValueOutOfRange { value: usize },
    TargetValueOutOfRange { value: usize },
    ModulusOutOfRange { modulus: usize },
    NoControls,
    NonFinitePhase,
    BadTick { position: usize },
}

/// One broken invariant. `op` is `None` for circuit-level problems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub op: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(i) = self.op {
            write!(f, "op {i}: ")?;
        }
        match &self.kind {
            ViolationKind::WireOutOfRange { wire } => write!(f, "wire {wire} out of range"),
            ViolationKind::WiresNotDistinct => f.write_str("wires not distinct"),
            ViolationKind::ControlValueOutOfRange { value } => {
                write!(f, "control_value out of range ({value})")
            }
            ViolationKind::TargetValueOutOfRange { value } => {
                write!(f, "target_value out of range ({value})")
            }
            ViolationKind::ModulusOutOfRange { modulus } => {
                write!(f, "modulus out of range ({modulus})")
            }
            ViolationKind::NoControls => f.write_str("multi-controlled op without controls"),
            ViolationKind::NonFinitePhase => f.write_str("phase is not finite"),
            ViolationKind::BadTick { position } => {
                write!(f, "cycle boundary at {position} is empty or out of order")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub wires: Vec<WireSpec>,
    pub ops: Vec<GateOp>,
    /// Exclusive op-index ends of explicit time cycles, strictly increasing.
    pub ticks: Vec<usize>,
}

impl Circuit {
    pub fn new(wires: Vec<WireSpec>) -> Self {
        Circuit {
            wires,
            ops: Vec::new(),
            ticks: Vec::new(),
        }
    }

    /// `n` wires that all carry logical dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        let spec = WireSpec::new(d)?;
        Ok(Circuit::new(vec![spec; n]))
    }

    pub fn push(&mut self, op: GateOp) {
        self.ops.push(op);
    }

    pub fn extend<I: IntoIterator<Item = GateOp>>(&mut self, ops: I) {
        self.ops.extend(ops);
    }

    /// Closes the current time cycle. Does nothing if the cycle is empty.
    pub fn tick(&mut self) {
        let len = self.ops.len();
        if len > 0 && self.ticks.last() != Some(&len) {
            self.ticks.push(len);
        }
    }

    pub fn num_wires(&self) -> usize {
        self.wires.len()
    }

    /// Physical dimension of every wire.
    pub fn dims(&self) -> Vec<usize> {
        self.wires.iter().map(WireSpec::physical_dim).collect()
    }

    /// Op ranges of the time cycles. Ops after the last tick form a final cycle.
    pub fn cycles(&self) -> Vec<Range<usize>> {
        if self.ticks.is_empty() {
            return (0..self.ops.len()).map(|i| i..i + 1).collect();
        }
        let mut out = Vec::with_capacity(self.ticks.len() + 1);
        let mut start = 0;
        for &end in &self.ticks {
            out.push(start..end);
            start = end;
        }
        if start < self.ops.len() {
            out.push(start..self.ops.len());
        }
        out
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let dims = self.dims();
        for (i, op) in self.ops.iter().enumerate() {
            out.extend(
                op_violations(op, &dims)
                    .into_iter()
                    .map(|kind| Violation { op: Some(i), kind }),
            );
        }
        let mut prev = 0;
        for &t in &self.ticks {
            if t <= prev || t > self.ops.len() {
                out.push(Violation {
                    op: None,
                    kind: ViolationKind::BadTick { position: t },
                });
            }
            prev = t;
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// Serializes to `.qdc` text. Refuses invalid circuits.
    pub fn emit(&self) -> Result<String> {
        self.ensure_valid()?;
        let mut s = String::from("wires");
        for w in &self.wires {
            write!(s, " {}", w.physical_dim()).unwrap();
        }
        s.push('\n');
        let mut ticks = self.ticks.iter().peekable();
        for (i, op) in self.ops.iter().enumerate() {
            emit_op(&mut s, op);
            if ticks.peek() == Some(&&(i + 1)) {
                ticks.next();
                s.push_str("tick\n");
            }
        }
        Ok(s)
    }

    /// Parses `.qdc` text. The result is validated; the first violation is
    /// reported against the line of the offending op.
    pub fn parse(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        let mut op_lines = Vec::new();
        let mut tick_lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let mut tokens = line.split_whitespace();
            let Some(head) = tokens.next() else {
                continue;
            };
            let rest: Vec<&str> = tokens.collect();
            let perr = |reason: String| Error::Parse {
                line: line_no,
                reason,
            };
            let Some(c) = circuit.as_mut() else {
                if head != "wires" {
                    return Err(perr(format!("expected `wires` header, found `{head}`")));
                }
                if rest.is_empty() {
                    return Err(perr("`wires` needs at least one dimension".into()));
                }
                let wires = rest
                    .iter()
                    .map(|t| {
                        let p: usize = t
                            .parse()
                            .map_err(|_| perr(format!("bad dimension `{t}`")))?;
                        WireSpec::from_physical(p).map_err(|e| perr(e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                circuit = Some(Circuit::new(wires));
                continue;
            };
            match head {
                "wires" => return Err(perr("duplicate `wires` header".into())),
                "tick" => {
                    if !rest.is_empty() {
                        return Err(perr("`tick` takes no arguments".into()));
                    }
                    if c.ops.is_empty() || c.ticks.last() == Some(&c.ops.len()) {
                        return Err(perr("`tick` closes an empty cycle".into()));
                    }
                    c.ticks.push(c.ops.len());
                    tick_lines.push(line_no);
                }
                _ => {
                    let op = parse_op(head, &rest).map_err(perr)?;
                    c.ops.push(op);
                    op_lines.push(line_no);
                }
            }
        }
        let circuit = circuit.ok_or(Error::Parse {
            line: text.lines().count().max(1),
            reason: "missing `wires` header".into(),
        })?;
        if let Some(v) = circuit.validate().into_iter().next() {
            let line = match (&v.op, &v.kind) {
                (Some(i), _) => op_lines[*i],
                (None, ViolationKind::BadTick { position }) => circuit
                    .ticks
                    .iter()
                    .position(|t| t == position)
                    .map(|k| tick_lines[k])
                    .unwrap_or(1),
                (None, _) => 1,
            };
            return Err(Error::Parse {
                line,
                reason: v.to_string(),
            });
        }
        Ok(circuit)
    }
}

/// Invariant violations of `op` against wires of physical dimensions `dims`.
pub fn op_violations(op: &GateOp, dims: &[usize]) -> Vec<ViolationKind> {
    let mut out = Vec::new();
    let wires = op.wires();
    for &w in &wires {
        if w >= dims.len() {
            out.push(ViolationKind::WireOutOfRange { wire: w });
        }
    }
    let mut sorted = wires.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != wires.len() {
        out.push(ViolationKind::WiresNotDistinct);
    }
    let phys = |w: usize| dims.get(w).copied();
    let check_modulus = |w: usize, m: usize, out: &mut Vec<ViolationKind>| {
        if let Some(p) = phys(w) {
            if m < 2 || m > p {
                out.push(ViolationKind::ModulusOutOfRange { modulus: m });
            }
        }
    };
    let value_ok = |w: usize, v: usize| phys(w).is_none_or(|p| v < p);
    match op {
        GateOp::Single { wire, modulus, .. } => check_modulus(*wire, *modulus, &mut out),
        GateOp::Cinc {
            control,
            control_value,
            target,
            modulus,
            ..
        } => {
            if !value_ok(*control, *control_value) {
                out.push(ViolationKind::ControlValueOutOfRange {
                    value: *control_value,
                });
            }
            check_modulus(*target, *modulus, &mut out);
        }
        GateOp::Cphase {
            controls,
            target,
            target_value,
            phase,
        } => {
            for &(w, v) in controls {
                if !value_ok(w, v) {
                    out.push(ViolationKind::ControlValueOutOfRange { value: v });
                }
            }
            if !value_ok(*target, *target_value) {
                out.push(ViolationKind::TargetValueOutOfRange {
                    value: *target_value,
                });
            }
            if !phase.is_finite() {
                out.push(ViolationKind::NonFinitePhase);
            }
        }
        GateOp::MultiInc {
            controls,
            control_value,
            target,
            modulus,
        } => {
            if controls.is_empty() {
                out.push(ViolationKind::NoControls);
            }
            if controls.iter().any(|&w| !value_ok(w, *control_value)) {
                out.push(ViolationKind::ControlValueOutOfRange {
                    value: *control_value,
                });
            }
            check_modulus(*target, *modulus, &mut out);
        }
    }
    out
}

fn emit_op(s: &mut String, op: &GateOp) {
    match op {
        GateOp::Single {
            wire,
            kind,
            modulus,
        } => writeln!(s, "{} w={wire} m={modulus}", kind.mnemonic()),
        GateOp::Cinc {
            control,
            control_value,
            target,
            modulus,
            delta,
        } => writeln!(
            s,
            "cinc c={control} v={control_value} t={target} m={modulus} delta={delta}"
        ),
        GateOp::Cphase {
            controls,
            target,
            target_value,
            phase,
        } => {
            let ctrls = controls
                .iter()
                .map(|(w, v)| format!("{w}:{v}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(
                s,
                "cphase ctrls={ctrls} t={target} tv={target_value} phase={phase:.16e}"
            )
        }
        GateOp::MultiInc {
            controls,
            control_value,
            target,
            modulus,
        } => {
            let ctrls = controls
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",");
            writeln!(s, "minc ctrls={ctrls} v={control_value} t={target} m={modulus}")
        }
    }
    .unwrap();
}

fn parse_op(head: &str, tokens: &[&str]) -> std::result::Result<GateOp, String> {
    let mut kv: HashMap<&str, &str> = HashMap::new();
    for t in tokens {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found `{t}`"))?;
        if kv.insert(k, v).is_some() {
            return Err(format!("duplicate key `{k}`"));
        }
    }
    let expected: &[&str] = match head {
        "cinc" => &["c", "v", "t", "m", "delta"],
        "cphase" => &["ctrls", "t", "tv", "phase"],
        "minc" => &["ctrls", "v", "t", "m"],
        _ if SingleKind::from_mnemonic(head).is_some() => &["w", "m"],
        _ => return Err(format!("unknown directive `{head}`")),
    };
    for k in kv.keys() {
        if !expected.contains(k) {
            return Err(format!("unexpected key `{k}` for `{head}`"));
        }
    }
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| format!("missing key `{k}`"));
    let int = |k: &str| -> std::result::Result<usize, String> {
        let v = get(k)?;
        v.parse().map_err(|_| format!("bad integer `{v}` for `{k}`"))
    };
    Ok(match head {
        "cinc" => {
            let delta = match get("delta")? {
                "+1" => Delta::Inc,
                "-1" => Delta::Dec,
                other => return Err(format!("delta must be +1 or -1, found `{other}`")),
            };
            GateOp::Cinc {
                control: int("c")?,
                control_value: int("v")?,
                target: int("t")?,
                modulus: int("m")?,
                delta,
            }
        }
        "cphase" => {
            let raw = get("ctrls")?;
            let controls = if raw.is_empty() {
                Vec::new()
            } else {
                raw.split(',')
                    .map(|pair| {
                        let (w, v) = pair
                            .split_once(':')
                            .ok_or_else(|| format!("control `{pair}` is not wire:value"))?;
                        let w = w.parse().map_err(|_| format!("bad wire `{w}`"))?;
                        let v = v.parse().map_err(|_| format!("bad value `{v}`"))?;
                        Ok((w, v))
                    })
                    .collect::<std::result::Result<Vec<_>, String>>()?
            };
            let p = get("phase")?;
            let phase: f64 = p.parse().map_err(|_| format!("bad phase `{p}`"))?;
            GateOp::Cphase {
                controls,
                target: int("t")?,
                target_value: int("tv")?,
                phase,
            }
        }
        "minc" => {
            let controls = get("ctrls")?
                .split(',')
                .map(|w| w.parse().map_err(|_| format!("bad wire `{w}`")))
                .collect::<std::result::Result<Vec<usize>, String>>()?;
            GateOp::MultiInc {
                controls,
                control_value: int("v")?,
                target: int("t")?,
                modulus: int("m")?,
            }
        }
        _ => GateOp::Single {
            wire: int("w")?,
            kind: SingleKind::from_mnemonic(head).expect("checked above"),
            modulus: int("m")?,
        },
    })
}
