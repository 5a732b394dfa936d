//! d-ary Grover search with the oracle and diffusion reflections lowered
//! through the Toffoli control tree.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Circuit, GateOp, SingleKind};
use crate::error::{guard, Error, Result};
use crate::state::StateVector;
use crate::toffoli::ControlTree;

/// Largest search-space size `d^n` accepted by [`run_grover`].
pub const MAX_GROVER_N: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroverProblem {
    pub n: usize,
    pub d: usize,
    pub marked: Vec<usize>,
    pub iterations: usize,
}

impl GroverProblem {
    /// `iterations` defaults to [`iterations_for`]`(d^n)`.
    pub fn new(n: usize, d: usize, marked: Vec<usize>, iterations: Option<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Grover needs at least one qudit"));
        }
        if d < 2 {
            return Err(Error::domain(format!("logical dimension must be >= 2, got {d}")));
        }
        if marked.len() != n {
            return Err(Error::domain(format!(
                "marked element has {} digits, expected {n}",
                marked.len()
            )));
        }
        if let Some((i, &s)) = marked.iter().enumerate().find(|(_, &s)| s >= d) {
            return Err(Error::domain(format!("marked digit {s} at position {i} is not < {d}")));
        }
        let size = search_space(n, d)?;
        Ok(GroverProblem {
            n,
            d,
            marked,
            iterations: iterations.unwrap_or_else(|| iterations_for(size)),
        })
    }

    pub fn search_space(&self) -> usize {
        self.d.pow(self.n as u32)
    }
}

fn search_space(n: usize, d: usize) -> Result<usize> {
    let size = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    guard("search space d^n", size, MAX_GROVER_N as u128)?;
    Ok(size as usize)
}

/// `⌊(π/4)·√N⌋`, at least 1.
pub fn iterations_for(size: usize) -> usize {
    ((PI / 4.0 * (size as f64).sqrt()).floor() as usize).max(1)
}

/// `sin²((2k+1)·asin(1/√N))`.
pub fn analytic_success(size: usize, k: usize) -> f64 {
    let theta = (1.0 / (size as f64).sqrt()).asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// A reflection `I − 2|s⟩⟨s|` written as basis shifts around a lowered
/// multi-controlled π phase on `|d−1…d−1⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFlip {
    pub pre: Vec<GateOp>,
    pub tree: ControlTree,
    pub root: GateOp,
    pub post: Vec<GateOp>,
}

impl PhaseFlip {
    fn around(n: usize, d: usize, pre: Vec<GateOp>, post: Vec<GateOp>) -> Result<Self> {
        let tree = ControlTree::new(n - 1, d)?;
        let root = tree.phase_root(n - 1, d - 1, PI);
        Ok(PhaseFlip {
            pre,
            tree,
            root,
            post,
        })
    }

    pub fn emit(&self, c: &mut Circuit) {
        c.extend(self.pre.iter().cloned());
        self.tree.emit(c, self.root.clone());
        c.extend(self.post.iter().cloned());
        c.tick();
    }
}

fn single(wire: usize, kind: SingleKind, d: usize) -> GateOp {
    GateOp::Single {
        wire,
        kind,
        modulus: d,
    }
}

pub fn oracle_flip(problem: &GroverProblem) -> Result<PhaseFlip> {
    let (n, d) = (problem.n, problem.d);
    let shifts = |kind| {
        problem
            .marked
            .iter()
            .enumerate()
            .flat_map(|(w, &s)| std::iter::repeat_n(single(w, kind, d), (d - 1 - s) % d))
            .collect::<Vec<_>>()
    };
    PhaseFlip::around(n, d, shifts(SingleKind::X), shifts(SingleKind::Xinv))
}

pub fn diffusion_flip(n: usize, d: usize) -> Result<PhaseFlip> {
    if n == 0 || d < 2 {
        return Err(Error::domain(format!("diffusion needs n >= 1 and d >= 2, got n={n} d={d}")));
    }
    let layer = |kind| (0..n).map(|w| single(w, kind, d)).collect::<Vec<_>>();
    let mut pre = layer(SingleKind::Finv);
    pre.extend(layer(SingleKind::Xinv));
    let mut post = layer(SingleKind::X);
    post.extend(layer(SingleKind::F));
    PhaseFlip::around(n, d, pre, post)
}

/// `I − 2|s⟩⟨s|` on the computational subspace.
pub fn build_oracle(problem: &GroverProblem) -> Result<Circuit> {
    let mut c = Circuit::uniform(problem.n, problem.d)?;
    oracle_flip(problem)?.emit(&mut c);
    Ok(c)
}

/// `F·(I − 2|0⟩⟨0|)·F† = −D`.
pub fn build_diffusion_circuit(n: usize, d: usize) -> Result<Circuit> {
    let mut c = Circuit::uniform(n, d)?;
    diffusion_flip(n, d)?.emit(&mut c);
    Ok(c)
}

/// `F^{⊗n}|0…0⟩` on wires with `d+2` physical levels.
pub fn uniform_state(n: usize, d: usize) -> Result<StateVector> {
    let dims = vec![d + 2; n];
    let mut sv = StateVector::prepare_basis(&dims, &vec![0; n])?;
    for w in 0..n {
        sv.apply(&single(w, SingleKind::F, d))?;
    }
    Ok(sv)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroverResult {
    pub success_probability: f64,
    /// Marked-state probability after each round (empty without trace).
    pub trajectory: Vec<f64>,
    pub measured_sample: Option<Vec<usize>>,
}

pub fn run_grover(problem: &GroverProblem, trace: bool) -> Result<GroverResult> {
    run(problem, trace, None)
}

/// As [`run_grover`], also drawing one measurement with a seeded RNG.
pub fn run_grover_sampled(problem: &GroverProblem, trace: bool, seed: u64) -> Result<GroverResult> {
    run(problem, trace, Some(seed))
}

fn run(problem: &GroverProblem, trace: bool, seed: Option<u64>) -> Result<GroverResult> {
    search_space(problem.n, problem.d)?;
    let mut round = build_oracle(problem)?;
    diffusion_flip(problem.n, problem.d)?.emit(&mut round);
    let mut sv = uniform_state(problem.n, problem.d)?;
    let mut trajectory = Vec::new();
    for _ in 0..problem.iterations {
        for op in &round.ops {
            sv.apply(op)?;
        }
        if trace {
            trajectory.push(sv.probability_of(&problem.marked)?);
        }
    }
    let measured_sample = match seed {
        Some(s) => Some(sv.measure_all(&mut ChaCha8Rng::seed_from_u64(s))?),
        None => None,
    };
    Ok(GroverResult {
        success_probability: sv.probability_of(&problem.marked)?,
        trajectory,
        measured_sample,
    })
}
