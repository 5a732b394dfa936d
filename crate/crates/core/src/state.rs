//! Dense mixed-radix state vectors and in-place gate application.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{op_violations, Circuit, Delta, GateOp, SingleKind, Violation};
use crate::digits::{self, format_digits};
use crate::error::{guard, Error, Result};
use crate::gates::{self, UnitaryMatrix, MAX_DENSE_DIM};

/// Largest total Hilbert dimension the engine will allocate.
pub const MAX_STATE_DIM: usize = 1 << 26;

/// Off-amplitude threshold for reporting a state as a single basis label.
pub const BASIS_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    strides: Vec<usize>,
    amps: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceState {
    Basis(Vec<usize>),
    Superposed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub cycle: usize,
    pub state: TraceState,
    /// Physical dims, kept for label formatting.
    pub dims: Vec<usize>,
}

impl TraceRecord {
    pub fn label(&self) -> String {
        match &self.state {
            TraceState::Basis(d) => format_digits(d, &self.dims),
            TraceState::Superposed => "superposed".to_string(),
        }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cycle={} state={}", self.cycle, self.label())
    }
}

fn total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::domain("a state needs at least one wire"));
    }
    let mut total: u128 = 1;
    for &d in dims {
        if d == 0 {
            return Err(Error::domain("wire dimension must be positive"));
        }
        total = total.saturating_mul(d as u128);
    }
    guard("state dimension", total, MAX_STATE_DIM as u128)?;
    Ok(total as usize)
}

impl StateVector {
    /// The basis state `|digits⟩` over wires of physical dimensions `dims`.
    pub fn prepare_basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        let total = total_dim(dims)?;
        let index = digits::encode(dims, digits)?;
        let mut amps = vec![ZERO; total];
        amps[index] = ONE;
        Ok(StateVector {
            dims: dims.to_vec(),
            strides: digits::strides(dims),
            amps,
        })
    }

    pub fn from_amplitudes(dims: &[usize], amps: Vec<Complex64>) -> Result<Self> {
        let total = total_dim(dims)?;
        if amps.len() != total {
            return Err(Error::domain(format!(
                "expected {total} amplitudes, got {}",
                amps.len()
            )));
        }
        Ok(StateVector {
            dims: dims.to_vec(),
            strides: digits::strides(dims),
            amps,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<Complex64> {
        Ok(self.amps[digits::encode(&self.dims, digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability_of(&self, digits: &[usize]) -> Result<f64> {
        Ok(self.amplitude(digits)?.norm_sqr())
    }

    /// The single basis label carrying all amplitude, if every other
    /// amplitude is below [`BASIS_TOL`].
    pub fn as_basis(&self) -> Option<Vec<usize>> {
        let (idx, _) = self
            .amps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))?;
        let clean = self
            .amps
            .iter()
            .enumerate()
            .all(|(i, a)| i == idx || a.norm() < BASIS_TOL);
        clean.then(|| digits::decode(&self.dims, idx))
    }

    /// Applies `op` in place.
    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        let kinds = op_violations(op, &self.dims);
        if !kinds.is_empty() {
            return Err(Error::Invalid(
                kinds
                    .into_iter()
                    .map(|kind| Violation { op: None, kind })
                    .collect(),
            ));
        }
        match op {
            GateOp::Single {
                wire,
                kind,
                modulus,
            } => self.apply_single(*wire, *kind, *modulus),
            GateOp::Cinc {
                control,
                control_value,
                target,
                modulus,
                delta,
            } => {
                let offset = control_value * self.strides[*control];
                self.rotate_target(&[*control, *target], offset, *target, *modulus, *delta);
            }
            GateOp::MultiInc {
                controls,
                control_value,
                target,
                modulus,
            } => {
                let offset: usize = controls.iter().map(|&w| control_value * self.strides[w]).sum();
                let mut wires = controls.clone();
                wires.push(*target);
                self.rotate_target(&wires, offset, *target, *modulus, Delta::Inc);
            }
            GateOp::Cphase {
                controls,
                target,
                target_value,
                phase,
            } => {
                let mut wires: Vec<usize> = controls.iter().map(|&(w, _)| w).collect();
                wires.push(*target);
                let offset: usize = controls
                    .iter()
                    .map(|&(w, v)| v * self.strides[w])
                    .sum::<usize>()
                    + target_value * self.strides[*target];
                let z = Complex64::from_polar(1.0, *phase);
                let amps = &mut self.amps;
                for_each_base(&self.dims, &self.strides, &wires, |b| amps[b + offset] *= z);
            }
        }
        Ok(())
    }

    /// Applies a `phys × phys` matrix to one wire.
    pub fn apply_matrix(&mut self, wire: usize, m: &UnitaryMatrix) -> Result<()> {
        let p = *self
            .dims
            .get(wire)
            .ok_or_else(|| Error::domain(format!("wire {wire} out of range")))?;
        if m.dim() != p {
            return Err(Error::domain(format!(
                "matrix dimension {} does not match wire dimension {p}",
                m.dim()
            )));
        }
        let s = self.strides[wire];
        let amps = &mut self.amps;
        let mut buf = vec![ZERO; p];
        for_each_base(&self.dims, &self.strides, &[wire], |b| {
            for (k, x) in buf.iter_mut().enumerate() {
                *x = amps[b + k * s];
            }
            for r in 0..p {
                amps[b + r * s] = (0..p).map(|c| m[(r, c)] * buf[c]).sum();
            }
        });
        Ok(())
    }

    fn apply_single(&mut self, wire: usize, kind: SingleKind, modulus: usize) {
        let s = self.strides[wire];
        let amps = &mut self.amps;
        let (dims, strides) = (&self.dims, &self.strides);
        match kind {
            SingleKind::X | SingleKind::Xinv => {
                let delta = if kind == SingleKind::X {
                    Delta::Inc
                } else {
                    Delta::Dec
                };
                for_each_base(dims, strides, &[wire], |b| rotate(amps, b, s, modulus, delta));
            }
            SingleKind::Z => {
                let w = gates::omega(modulus);
                let phases: Vec<Complex64> = (0..modulus).map(|k| w.powu(k as u32)).collect();
                for_each_base(dims, strides, &[wire], |b| {
                    for (k, z) in phases.iter().enumerate() {
                        amps[b + k * s] *= z;
                    }
                });
            }
            SingleKind::F | SingleKind::Finv => {
                let f = gates::single_matrix(kind, modulus, modulus).expect("modulus validated");
                let mut buf = vec![ZERO; modulus];
                for_each_base(dims, strides, &[wire], |b| {
                    for (k, x) in buf.iter_mut().enumerate() {
                        *x = amps[b + k * s];
                    }
                    for r in 0..modulus {
                        amps[b + r * s] = (0..modulus).map(|c| f[(r, c)] * buf[c]).sum();
                    }
                });
            }
        }
    }

    fn rotate_target(
        &mut self,
        wires: &[usize],
        offset: usize,
        target: usize,
        modulus: usize,
        delta: Delta,
    ) {
        let s = self.strides[target];
        let amps = &mut self.amps;
        for_each_base(&self.dims, &self.strides, wires, |b| {
            rotate(amps, b + offset, s, modulus, delta)
        });
    }

    /// Runs every op of `circuit`; with `trace`, records the state at the end
    /// of each time cycle.
    pub fn run(&mut self, circuit: &Circuit, trace: bool) -> Result<Vec<TraceRecord>> {
        circuit.ensure_valid()?;
        if circuit.dims() != self.dims {
            return Err(Error::domain(format!(
                "circuit dims {:?} do not match state dims {:?}",
                circuit.dims(),
                self.dims
            )));
        }
        let mut records = Vec::new();
        for (k, range) in circuit.cycles().into_iter().enumerate() {
            for op in &circuit.ops[range] {
                self.apply(op)?;
            }
            if trace {
                records.push(TraceRecord {
                    cycle: k + 1,
                    state: self
                        .as_basis()
                        .map_or(TraceState::Superposed, TraceState::Basis),
                    dims: self.dims.clone(),
                });
            }
        }
        Ok(records)
    }

    /// Samples a full basis label from `|amp|²` without collapsing.
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::Integrity(format!("state norm² is {norm}")));
        }
        let r: f64 = rng.gen::<f64>() * norm;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                last = i;
            }
            acc += p;
            if r < acc {
                return Ok(digits::decode(&self.dims, i));
            }
        }
        Ok(digits::decode(&self.dims, last))
    }

    /// Probability of each level of `wire`.
    pub fn level_probabilities(&self, wire: usize) -> Result<Vec<f64>> {
        let p = *self
            .dims
            .get(wire)
            .ok_or_else(|| Error::domain(format!("wire {wire} out of range")))?;
        let s = self.strides[wire];
        let mut out = vec![0.0; p];
        for (i, a) in self.amps.iter().enumerate() {
            out[(i / s) % p] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Probability mass with `wire` in any of `levels`.
    pub fn subspace_mass(&self, wire: usize, levels: &[usize]) -> Result<f64> {
        let probs = self.level_probabilities(wire)?;
        levels.iter().try_fold(0.0, |acc, &l| {
            probs
                .get(l)
                .map(|p| acc + p)
                .ok_or_else(|| Error::domain(format!("level {l} out of range on wire {wire}")))
        })
    }

    /// Mass outside the first `logical[w]` levels of any wire.
    pub fn off_subspace_mass(&self, logical: &[usize]) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|&(i, _)| {
                digits::decode(&self.dims, i)
                    .iter()
                    .zip(logical)
                    .any(|(x, l)| x >= l)
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n < 1e-300 {
            return Err(Error::Integrity("cannot normalize a zero state".into()));
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(())
    }
}

/// Shifts the `modulus` amplitudes at `base + k·stride` by one level.
fn rotate(amps: &mut [Complex64], base: usize, stride: usize, modulus: usize, delta: Delta) {
    let at = |k: usize| base + k * stride;
    match delta {
        Delta::Inc => {
            let last = amps[at(modulus - 1)];
            for k in (1..modulus).rev() {
                amps[at(k)] = amps[at(k - 1)];
            }
            amps[at(0)] = last;
        }
        Delta::Dec => {
            let first = amps[at(0)];
            for k in 0..modulus - 1 {
                amps[at(k)] = amps[at(k + 1)];
            }
            amps[at(modulus - 1)] = first;
        }
    }
}

/// Calls `f` with every index whose digits on `wires` are all zero.
fn for_each_base(dims: &[usize], strides: &[usize], wires: &[usize], mut f: impl FnMut(usize)) {
    let mut ws = wires.to_vec();
    ws.sort_unstable();
    let total = dims[0] * strides[0];
    visit(dims, strides, &ws, 0, total, 0, &mut f);
}

fn visit(
    dims: &[usize],
    strides: &[usize],
    ws: &[usize],
    offset: usize,
    span: usize,
    j: usize,
    f: &mut impl FnMut(usize),
) {
    let Some(&w) = ws.get(j) else {
        for lo in 0..span {
            f(offset + lo);
        }
        return;
    };
    let block = dims[w] * strides[w];
    for q in 0..span / block {
        visit(dims, strides, ws, offset + q * block, strides[w], j + 1, f);
    }
}

/// Classical action of a basis-preserving `op` on `digits` (physical
/// dimensions `dims`), returning the picked-up phase. `None` for ops that
/// create superpositions.
pub fn apply_to_digits(op: &GateOp, digits: &mut [usize]) -> Option<Complex64> {
    match op {
        GateOp::Single {
            wire,
            kind,
            modulus,
        } => {
            let x = digits[*wire];
            match kind {
                SingleKind::X if x < *modulus => digits[*wire] = Delta::Inc.step(x, *modulus),
                SingleKind::Xinv if x < *modulus => digits[*wire] = Delta::Dec.step(x, *modulus),
                SingleKind::Z if x < *modulus => return Some(gates::omega(*modulus).powu(x as u32)),
                SingleKind::F | SingleKind::Finv => return None,
                _ => {}
            }
            Some(ONE)
        }
        GateOp::Cinc {
            control,
            control_value,
            target,
            modulus,
            delta,
        } => {
            if digits[*control] == *control_value && digits[*target] < *modulus {
                digits[*target] = delta.step(digits[*target], *modulus);
            }
            Some(ONE)
        }
        GateOp::MultiInc {
            controls,
            control_value,
            target,
            modulus,
        } => {
            if controls.iter().all(|&w| digits[w] == *control_value) && digits[*target] < *modulus
            {
                digits[*target] = Delta::Inc.step(digits[*target], *modulus);
            }
            Some(ONE)
        }
        GateOp::Cphase {
            controls,
            target,
            target_value,
            phase,
        } => {
            let hit = controls.iter().all(|&(w, v)| digits[w] == v) && digits[*target] == *target_value;
            Some(if hit {
                Complex64::from_polar(1.0, *phase)
            } else {
                ONE
            })
        }
    }
}

/// The operator `circuit` induces on the computational subspace (first
/// `logical_dim` levels of every wire), together with the largest mass any
/// computational input leaves outside that subspace.
pub fn computational_unitary(circuit: &Circuit) -> Result<(UnitaryMatrix, f64)> {
    let dims = circuit.dims();
    let logical: Vec<usize> = circuit.wires.iter().map(|w| w.logical_dim()).collect();
    let size: u128 = logical.iter().map(|&d| d as u128).product();
    guard("computational dimension", size, MAX_DENSE_DIM as u128)?;
    let size = size as usize;
    let mut m = UnitaryMatrix::zeros(size);
    let mut worst_leak: f64 = 0.0;
    for col in 0..size {
        let input = digits::decode(&logical, col);
        let mut sv = StateVector::prepare_basis(&dims, &input)?;
        sv.run(circuit, false)?;
        let mut kept = 0.0;
        for row in 0..size {
            let out = digits::decode(&logical, row);
            let a = sv.amplitude(&out)?;
            kept += a.norm_sqr();
            m[(row, col)] = a;
        }
        worst_leak = worst_leak.max((1.0 - kept).max(0.0));
    }
    Ok((m, worst_leak))
}
