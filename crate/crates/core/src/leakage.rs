//! Leakage noise on the elevated levels: the coherent coupling of `|d−1⟩`
//! and `|d⟩`, and the erasure channel sampled as trajectories.

use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::gates::UnitaryMatrix;
use crate::grover::{analytic_success, diffusion_flip, oracle_flip, uniform_state, GroverProblem, PhaseFlip};
use crate::state::{StateVector, MAX_STATE_DIM};
use crate::toffoli::TreeStep;

/// Largest search space `d^n` accepted by the Monte Carlo.
pub const MAX_MC_N: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LeakModel {
    Unitary,
    Erasure,
}

impl FromStr for LeakModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary" => Ok(LeakModel::Unitary),
            "erasure" => Ok(LeakModel::Erasure),
            _ => Err(Error::domain(format!("unknown leakage model `{s}`"))),
        }
    }
}

/// Which lowered multi-controlled gates are noisy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeakSites {
    /// The diffusion's gate only: one Toffoli per iteration.
    Diffusion,
    /// Oracle and diffusion.
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeakageConfig {
    pub model: LeakModel,
    pub p_l: f64,
    /// Coupling duration in radians (unitary model).
    pub t: f64,
    pub seed: u64,
    pub trials: usize,
    /// Level an erased wire ends in; `None` means `d`.
    pub leak_level: Option<usize>,
    pub sites: LeakSites,
}

impl LeakageConfig {
    pub fn erasure(p_l: f64, trials: usize, seed: u64) -> Self {
        LeakageConfig {
            model: LeakModel::Erasure,
            p_l,
            t: 0.0,
            seed,
            trials,
            leak_level: None,
            sites: LeakSites::Diffusion,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_l) {
            return Err(Error::domain(format!("p_l = {} is not a probability", self.p_l)));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials must be >= 1"));
        }
        if !self.t.is_finite() {
            return Err(Error::domain("t must be finite"));
        }
        let level = self.level(d);
        if level != d && level != d + 1 {
            return Err(Error::domain(format!(
                "leak level {level} is outside the leakage subspace {{{d}, {}}}",
                d + 1
            )));
        }
        Ok(())
    }

    pub fn level(&self, d: usize) -> usize {
        self.leak_level.unwrap_or(d)
    }
}

/// `exp(−iHt)` for `H = ½(|d⟩⟨d−1| + |d−1⟩⟨d|)` on a `d+2`-level wire.
pub fn unitary_leak_op(t: f64, d: usize) -> Result<UnitaryMatrix> {
    if d < 2 {
        return Err(Error::domain(format!("logical dimension must be >= 2, got {d}")));
    }
    let mut u = UnitaryMatrix::identity(d + 2);
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let (a, b) = (d - 1, d);
    u[(a, a)] = Complex64::new(c, 0.0);
    u[(b, b)] = Complex64::new(c, 0.0);
    u[(a, b)] = Complex64::new(0.0, -s);
    u[(b, a)] = Complex64::new(0.0, -s);
    Ok(u)
}

/// Population of `wire` in levels `{d, d+1}`.
pub fn leakage_rate(state: &StateVector, wire: usize, d: usize) -> Result<f64> {
    state.subspace_mass(wire, &[d, d + 1])
}

/// Replaces the state of `wire` by `|level⟩`: the wire is measured, the
/// state collapses accordingly, and the wire is then moved to `level`.
pub fn erase<R: Rng + ?Sized>(state: &mut StateVector, wire: usize, level: usize, rng: &mut R) -> Result<()> {
    let probs = state.level_probabilities(wire)?;
    let dims = state.dims().to_vec();
    if level >= dims[wire] {
        return Err(Error::domain(format!("level {level} out of range on wire {wire}")));
    }
    let total: f64 = probs.iter().sum();
    let r = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut outcome = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            outcome = k;
            break;
        }
    }
    let scale = 1.0 / probs[outcome].sqrt();
    let stride: usize = dims[wire + 1..].iter().product();
    let p = dims[wire];
    let amps = state.amplitudes_mut();
    for i in 0..amps.len() {
        if (i / stride).is_multiple_of(p) {
            let kept = amps[i + outcome * stride] * scale;
            for k in 0..p {
                amps[i + k * stride] = Complex64::new(0.0, 0.0);
            }
            amps[i + level * stride] = kept;
        }
    }
    Ok(())
}

/// With probability `p_l`, [`erase`]s `wire` to `level`; reports whether it did.
pub fn erasure_step<R: Rng + ?Sized>(
    state: &mut StateVector,
    wire: usize,
    p_l: f64,
    level: usize,
    rng: &mut R,
) -> Result<bool> {
    if rng.gen::<f64>() < p_l {
        erase(state, wire, level, rng)?;
        Ok(true)
    } else {
        Ok(false)
    }
}

/// `(1 − p_l)^{2⌈log2 n⌉·√(d^n)}`.
pub fn analytic_survival(n: usize, d: usize, p_l: f64) -> f64 {
    let depth = 2.0 * (n as f64).log2().ceil();
    let root_n = (d as f64).powf(n as f64 / 2.0);
    (1.0 - p_l).powf(depth * root_n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub p_l: f64,
    pub analytic_survival: f64,
    /// `analytic_survival × analytic_success(N, k)`.
    pub composed: f64,
    pub mc_success: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "n,N,p_l,analytic_survival,mc_success,mc_stderr,trials,seed";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.size,
            self.p_l,
            self.analytic_survival,
            opt(self.mc_success),
            opt(self.mc_stderr),
            self.trials,
            self.seed
        )
    }
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

fn noisy_flip(
    sv: &mut StateVector,
    flip: &PhaseFlip,
    noisy: bool,
    cfg: &LeakageConfig,
    leak_op: &UnitaryMatrix,
    level: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    for op in &flip.pre {
        sv.apply(op)?;
    }
    for step in flip.tree.schedule(flip.root.clone()) {
        match step {
            TreeStep::Gates(ops) => {
                for op in &ops {
                    sv.apply(op)?;
                }
            }
            TreeStep::Exposed(wires) if noisy && !wires.is_empty() => match cfg.model {
                LeakModel::Erasure => {
                    if rng.gen::<f64>() < cfg.p_l {
                        let w = wires[rng.gen_range(0..wires.len())];
                        erase(sv, w, level, rng)?;
                    }
                }
                LeakModel::Unitary => {
                    for w in wires {
                        sv.apply_matrix(w, leak_op)?;
                    }
                }
            },
            TreeStep::Exposed(_) => {}
        }
    }
    for op in &flip.post {
        sv.apply(op)?;
    }
    Ok(())
}

/// One noisy Grover run; returns the marked-state probability.
fn trajectory(
    problem: &GroverProblem,
    cfg: &LeakageConfig,
    oracle: &PhaseFlip,
    diffusion: &PhaseFlip,
    leak_op: &UnitaryMatrix,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let level = cfg.level(problem.d);
    let mut sv = uniform_state(problem.n, problem.d)?;
    for _ in 0..problem.iterations {
        let all = cfg.sites == LeakSites::All;
        noisy_flip(&mut sv, oracle, all, cfg, leak_op, level, rng)?;
        noisy_flip(&mut sv, diffusion, true, cfg, leak_op, level, rng)?;
    }
    sv.probability_of(&problem.marked)
}

fn check_mc(problem: &GroverProblem) -> Result<()> {
    let (n, d) = (problem.n, problem.d);
    guard("search space d^n", problem.search_space() as u128, MAX_MC_N as u128)?;
    let phys = ((d + 2) as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    guard("state dimension", phys, MAX_STATE_DIM as u128)
}

/// Trajectory-sampled Grover under `cfg`. Trajectory `i` draws from the
/// ChaCha stream `i` of `cfg.seed`, so results do not depend on scheduling.
pub fn grover_erasure_mc(problem: &GroverProblem, cfg: &LeakageConfig) -> Result<SweepRow> {
    cfg.validate(problem.d)?;
    check_mc(problem)?;
    let oracle = oracle_flip(problem)?;
    let diffusion = diffusion_flip(problem.n, problem.d)?;
    let leak_op = unitary_leak_op(cfg.t, problem.d)?;
    let samples = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            trajectory(problem, cfg, &oracle, &diffusion, &leak_op, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    let mut row = analytic_row(problem.n, problem.d, cfg, problem.iterations);
    row.mc_success = Some(mean);
    row.mc_stderr = Some((var / m).sqrt());
    Ok(row)
}

fn analytic_row(n: usize, d: usize, cfg: &LeakageConfig, k: usize) -> SweepRow {
    let size = d.saturating_pow(n as u32);
    let survival = analytic_survival(n, d, cfg.p_l);
    SweepRow {
        n,
        size,
        p_l: cfg.p_l,
        analytic_survival: survival,
        composed: survival * analytic_success(size, k),
        mc_success: None,
        mc_stderr: None,
        trials: cfg.trials,
        seed: cfg.seed,
    }
}

/// One row per `n`. Monte Carlo runs for `n ≤ mc_max_n` within the resource
/// guards; the analytic columns are always filled. The marked element is
/// all zeros (success does not depend on it).
pub fn sweep(
    d: usize,
    ns: impl IntoIterator<Item = usize>,
    cfg: &LeakageConfig,
    mc_max_n: usize,
) -> Result<Vec<SweepRow>> {
    cfg.validate(d)?;
    ns.into_iter()
        .map(|n| {
            if n < 2 {
                return Err(Error::domain(format!("sweep needs n >= 2, got {n}")));
            }
            let size = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            let k = if size <= usize::MAX as u128 {
                crate::grover::iterations_for(size as usize)
            } else {
                0
            };
            let problem = GroverProblem::new(n, d, vec![0; n], None);
            match problem {
                Ok(p) if n <= mc_max_n && check_mc(&p).is_ok() => grover_erasure_mc(&p, cfg),
                _ => Ok(analytic_row(n, d, cfg, k)),
            }
        })
        .collect()
}
