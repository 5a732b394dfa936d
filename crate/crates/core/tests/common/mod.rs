#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use quditkit::{Circuit, Delta, GateOp, SingleKind, WireSpec};

const KINDS: [SingleKind; 5] = [
    SingleKind::X,
    SingleKind::Xinv,
    SingleKind::Z,
    SingleKind::F,
    SingleKind::Finv,
];

fn distinct<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

/// A valid op over wires of physical dimensions `dims`.
pub fn random_op<R: Rng>(rng: &mut R, dims: &[usize]) -> GateOp {
    let n = dims.len();
    let pick = if n == 1 { 0 } else { rng.gen_range(0..4) };
    match pick {
        0 => {
            let wire = rng.gen_range(0..n);
            GateOp::Single {
                wire,
                kind: KINDS[rng.gen_range(0..5)],
                modulus: rng.gen_range(2..=dims[wire]),
            }
        }
        1 => {
            let w = distinct(rng, n, 2);
            GateOp::Cinc {
                control: w[0],
                control_value: rng.gen_range(0..dims[w[0]]),
                target: w[1],
                modulus: rng.gen_range(2..=dims[w[1]]),
                delta: if rng.gen() { Delta::Inc } else { Delta::Dec },
            }
        }
        2 => {
            let k = rng.gen_range(1..=n);
            let w = distinct(rng, n, k);
            let (target, controls) = w.split_last().unwrap();
            GateOp::Cphase {
                controls: controls.iter().map(|&c| (c, rng.gen_range(0..dims[c]))).collect(),
                target: *target,
                target_value: rng.gen_range(0..dims[*target]),
                phase: rng.gen_range(-10.0..10.0),
            }
        }
        _ => {
            let k = rng.gen_range(2..=n);
            let w = distinct(rng, n, k);
            let (target, controls) = w.split_last().unwrap();
            let vmax = controls.iter().map(|&c| dims[c]).min().unwrap();
            GateOp::MultiInc {
                controls: controls.to_vec(),
                control_value: rng.gen_range(0..vmax),
                target: *target,
                modulus: rng.gen_range(2..=dims[*target]),
            }
        }
    }
}

/// Random physical dims in 4..=6 (logical 2..=4).
pub fn random_dims<R: Rng>(rng: &mut R, max_wires: usize) -> Vec<usize> {
    let n = rng.gen_range(1..=max_wires);
    (0..n).map(|_| rng.gen_range(4..=6)).collect()
}

/// A valid circuit with `len` ops and random cycle boundaries.
pub fn random_circuit<R: Rng>(rng: &mut R, dims: &[usize], len: usize) -> Circuit {
    let wires = dims.iter().map(|&p| WireSpec::from_physical(p).unwrap()).collect();
    let mut c = Circuit::new(wires);
    for _ in 0..len {
        c.push(random_op(rng, dims));
        if rng.gen_bool(0.3) {
            c.tick();
        }
    }
    c
}
