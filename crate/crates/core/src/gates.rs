//! Dense unitary matrices for the qudit gate families.
//!
//! These are reference operators: they exist to check the state-vector
//! kernels and the circuit builders, and to simulate very small systems
//! directly. All constructors use `ω = e^{+2πi/d}`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::circuit::{Delta, GateOp, SingleKind};
use crate::error::{guard, Error, Result};

/// Largest dimension a dense reference operator may have.
pub const MAX_DENSE_DIM: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "UnitaryMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.3}{:+.3}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for UnitaryMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for UnitaryMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[r * self.dim + c]
    }
}

impl UnitaryMatrix {
    pub fn zeros(dim: usize) -> Self {
        UnitaryMatrix {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Permutation matrix sending basis column `j` to row `image(j)`.
    pub fn permutation(dim: usize, image: impl Fn(usize) -> usize) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            m[(image(j), j)] = ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn mul(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.entries[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex64) -> UnitaryMatrix {
        UnitaryMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// Tensor product `self ⊗ rhs`; `self` indexes the more significant digit.
    pub fn kron(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        let (a, b) = (self.dim, rhs.dim);
        Self::from_fn(a * b, |r, c| self[(r / b, c / b)] * rhs[(r % b, c % b)])
    }

    pub fn pow(&self, k: u32) -> UnitaryMatrix {
        (0..k).fold(Self::identity(self.dim), |acc, _| acc.mul(self))
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &UnitaryMatrix, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// `U·U† = I` elementwise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.adjoint())
            .approx_eq(&Self::identity(self.dim), tol)
    }

    /// Equality up to a global phase: both matrices are rotated so that their
    /// first nonzero entry (row-major) is real positive, then compared
    /// elementwise.
    pub fn eq_up_to_global_phase(&self, other: &UnitaryMatrix, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        match (self.phase_normalized(), other.phase_normalized()) {
            (Some(a), Some(b)) => a.approx_eq(&b, tol),
            (None, None) => true,
            _ => false,
        }
    }

    fn phase_normalized(&self) -> Option<UnitaryMatrix> {
        let first = self.entries.iter().find(|z| z.norm() > 1e-12)?;
        let rot = Complex64::from_polar(1.0, -first.arg());
        Some(self.scale(rot))
    }

    /// Every row and column holds exactly one entry equal to 1, the rest 0.
    pub fn is_permutation(&self) -> bool {
        let n = self.dim;
        let is_one = |z: Complex64| (z - ONE).norm() < 1e-12;
        let is_zero = |z: Complex64| z.norm() < 1e-12;
        let mut col_hits = vec![0usize; n];
        for r in 0..n {
            let mut hits = 0;
            for c in 0..n {
                let z = self[(r, c)];
                if is_one(z) {
                    hits += 1;
                    col_hits[c] += 1;
                } else if !is_zero(z) {
                    return false;
                }
            }
            if hits != 1 {
                return false;
            }
        }
        col_hits.iter().all(|&h| h == 1)
    }
}

/// `e^{2πi/d}`.
pub fn omega(d: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / d as f64)
}

fn omega_pow(d: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * ((k % d) as f64) / d as f64)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::domain(format!("dimension must be >= 2, got {d}")))
    } else {
        Ok(())
    }
}

/// Generalized NOT: `|k⟩ → |k+1 mod d⟩`.
pub fn build_x(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    Ok(UnitaryMatrix::permutation(d, |j| (j + 1) % d))
}

/// Generalized phase gate `diag(1, ω, …, ω^{d−1})`.
pub fn build_z(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let mut m = UnitaryMatrix::zeros(d);
    for k in 0..d {
        m[(k, k)] = omega_pow(d, k);
    }
    Ok(m)
}

/// Generalized Hadamard with entries `ω^{jk}/√d`.
pub fn build_f(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    Ok(UnitaryMatrix::from_fn(d, |j, k| omega_pow(d, j * k) * norm))
}

/// A single-qudit gate acting on the first `modulus` levels of a
/// `phys`-level wire, identity above.
pub fn single_matrix(kind: SingleKind, modulus: usize, phys: usize) -> Result<UnitaryMatrix> {
    if modulus > phys {
        return Err(Error::domain(format!(
            "modulus {modulus} exceeds physical dimension {phys}"
        )));
    }
    let block = match kind {
        SingleKind::X => build_x(modulus)?,
        SingleKind::Xinv => build_x(modulus)?.adjoint(),
        SingleKind::Z => build_z(modulus)?,
        SingleKind::F => build_f(modulus)?,
        SingleKind::Finv => build_f(modulus)?.adjoint(),
    };
    let mut m = UnitaryMatrix::identity(phys);
    for r in 0..modulus {
        for c in 0..modulus {
            m[(r, c)] = block[(r, c)];
        }
    }
    Ok(m)
}

/// Two-qudit controlled increment on `phys × phys` levels (control is the
/// more significant digit): `|c,t⟩ → |c,(t±1) mod m⟩` iff `c == v` and `t < m`.
pub fn build_cinc(phys: usize, v: usize, m: usize, delta: Delta) -> Result<UnitaryMatrix> {
    if v >= phys {
        return Err(Error::domain(format!(
            "control value {v} out of range for dimension {phys}"
        )));
    }
    if m < 2 || m > phys {
        return Err(Error::domain(format!(
            "modulus {m} out of range for dimension {phys}"
        )));
    }
    Ok(UnitaryMatrix::permutation(phys * phys, |j| {
        let (c, t) = (j / phys, j % phys);
        if c == v && t < m {
            c * phys + delta.step(t, m)
        } else {
            j
        }
    }))
}

/// The `n`-qudit Toffoli over `d` levels: increments the last qudit mod `d`
/// iff all `n − 1` controls are `|d−1⟩`.
pub fn build_multi_toffoli(n: usize, d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2 qudits, got {n}")));
    }
    guard("qudit count", n as u128, 12)?;
    let dim = (d as u128).pow(n as u32);
    guard("operator dimension", dim, MAX_DENSE_DIM as u128)?;
    let dim = dim as usize;
    // all controls at d−1 ⇔ index lies in the final d×d block
    let block_start = dim - d;
    Ok(UnitaryMatrix::permutation(dim, |j| {
        if j >= block_start {
            block_start + (j - block_start + 1) % d
        } else {
            j
        }
    }))
}

/// Grover diffusion `2|a⟩⟨a| − I` over `d^n` states (`|a⟩` uniform):
/// entries `2/d^n − δ_ij`.
pub fn build_diffusion(n: usize, d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let dim = (d as u128).pow(n as u32);
    guard("operator dimension", dim, MAX_DENSE_DIM as u128)?;
    let dim = dim as usize;
    let off = 2.0 / dim as f64;
    Ok(UnitaryMatrix::from_fn(dim, |r, c| {
        Complex64::new(if r == c { off - 1.0 } else { off }, 0.0)
    }))
}

/// Lifts `local`, acting on `wires` (first listed = most significant), to
/// the full mixed-radix space `dims` by explicit tensor-product embedding.
pub fn embed(local: &UnitaryMatrix, dims: &[usize], wires: &[usize]) -> Result<UnitaryMatrix> {
    let total: u128 = dims.iter().map(|&d| d as u128).product();
    guard("operator dimension", total, MAX_DENSE_DIM as u128)?;
    let local_dim: usize = wires.iter().map(|&w| dims[w]).product();
    if local_dim != local.dim() {
        return Err(Error::domain(format!(
            "local operator has dimension {}, wires span {local_dim}",
            local.dim()
        )));
    }
    let total = total as usize;
    let digits = |mut idx: usize| {
        let mut out = vec![0; dims.len()];
        for w in (0..dims.len()).rev() {
            out[w] = idx % dims[w];
            idx /= dims[w];
        }
        out
    };
    let local_index = |ds: &[usize]| wires.iter().fold(0, |acc, &w| acc * dims[w] + ds[w]);
    let mut m = UnitaryMatrix::zeros(total);
    for r in 0..total {
        let dr = digits(r);
        for c in 0..total {
            let dc = digits(c);
            let spectators_match = (0..dims.len())
                .filter(|w| !wires.contains(w))
                .all(|w| dr[w] == dc[w]);
            if spectators_match {
                m[(r, c)] = local[(local_index(&dr), local_index(&dc))];
            }
        }
    }
    Ok(m)
}

/// Local matrix of `op` on its own wires (ordered as [`GateOp::wires`]).
pub fn local_matrix(op: &GateOp, dims: &[usize]) -> Result<UnitaryMatrix> {
    match op {
        GateOp::Single {
            wire,
            kind,
            modulus,
        } => single_matrix(*kind, *modulus, dims[*wire]),
        GateOp::Cinc {
            control,
            control_value,
            target,
            modulus,
            delta,
        } => {
            if dims[*control] == dims[*target] {
                build_cinc(dims[*control], *control_value, *modulus, *delta)
            } else {
                let (pc, pt) = (dims[*control], dims[*target]);
                Ok(UnitaryMatrix::permutation(pc * pt, |j| {
                    let (c, t) = (j / pt, j % pt);
                    if c == *control_value && t < *modulus {
                        c * pt + delta.step(t, *modulus)
                    } else {
                        j
                    }
                }))
            }
        }
        GateOp::Cphase {
            controls,
            target_value,
            phase,
            ..
        } => {
            let mut values: Vec<usize> = controls.iter().map(|&(_, v)| v).collect();
            values.push(*target_value);
            let wires = op.wires();
            let dim: usize = wires.iter().map(|&w| dims[w]).product();
            let hit = wires.iter().zip(&values).fold(0, |acc, (&w, &v)| acc * dims[w] + v);
            let mut m = UnitaryMatrix::identity(dim);
            m[(hit, hit)] = Complex64::from_polar(1.0, *phase);
            Ok(m)
        }
        GateOp::MultiInc {
            controls,
            control_value,
            target,
            modulus,
        } => {
            let ctrl_dim: usize = controls.iter().map(|&w| dims[w]).product();
            let pt = dims[*target];
            let hit = controls
                .iter()
                .fold(0, |acc, &w| acc * dims[w] + control_value);
            let x = single_matrix(SingleKind::X, *modulus, pt)?;
            let mut m = UnitaryMatrix::identity(ctrl_dim * pt);
            for r in 0..pt {
                for c in 0..pt {
                    m[(hit * pt + r, hit * pt + c)] = x[(r, c)];
                }
            }
            Ok(m)
        }
    }
}

/// Full-space operator of `op` on `dims`.
pub fn op_matrix(op: &GateOp, dims: &[usize]) -> Result<UnitaryMatrix> {
    embed(&local_matrix(op, dims)?, dims, &op.wires())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(rows: &[&[f64]]) -> UnitaryMatrix {
        UnitaryMatrix::from_fn(rows.len(), |r, k| c(rows[r][k], 0.0))
    }

    #[test]
    fn x_d2_is_pauli_x() {
        assert!(build_x(2).unwrap().approx_eq(&real(&[&[0., 1.], &[1., 0.]]), TOL));
    }

    #[test]
    fn x_d3_shifts_columns() {
        let x = build_x(3).unwrap();
        // subdiagonal and top-right corner
        assert_eq!(x[(1, 0)], ONE);
        assert_eq!(x[(2, 1)], ONE);
        assert_eq!(x[(0, 2)], ONE);
        assert!(x.is_permutation());
    }

    #[test]
    fn x_power_d_is_identity() {
        for d in 2..=6 {
            let x = build_x(d).unwrap();
            assert!(x.pow(d as u32).approx_eq(&UnitaryMatrix::identity(d), TOL));
        }
    }

    #[test]
    fn small_dimensions_rejected() {
        assert!(matches!(build_x(1), Err(Error::Domain(_))));
        assert!(matches!(build_z(0), Err(Error::Domain(_))));
        assert!(matches!(build_f(1), Err(Error::Domain(_))));
    }

    #[test]
    fn z_d2_and_d3() {
        assert!(build_z(2).unwrap().approx_eq(&real(&[&[1., 0.], &[0., -1.]]), TOL));
        let z = build_z(3).unwrap();
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((z[(1, 1)] - w).norm() < TOL);
        assert!((z[(2, 2)] - w * w).norm() < TOL);
    }

    #[test]
    fn z_determinant_is_product_of_clock_phases() {
        for d in 2..=6 {
            let z = build_z(d).unwrap();
            let det: Complex64 = (0..d).map(|k| z[(k, k)]).product();
            let expect = Complex64::from_polar(1.0, 2.0 * PI / d as f64 * (d * (d - 1) / 2) as f64);
            assert!((det - expect).norm() < TOL, "d={d}");
        }
    }

    #[test]
    fn f_d2_is_hadamard() {
        let s = 1.0 / 2f64.sqrt();
        assert!(build_f(2).unwrap().approx_eq(&real(&[&[s, s], &[s, -s]]), TOL));
    }

    #[test]
    fn f_d3_entries() {
        let f = build_f(3).unwrap();
        let w = omega(3);
        for j in 0..3 {
            for k in 0..3 {
                let e = w.powu((j * k) as u32) / 3f64.sqrt();
                assert!((f[(j, k)] - e).norm() < TOL);
            }
        }
    }

    #[test]
    fn f_unitary_up_to_8() {
        for d in 2..=8 {
            assert!(build_f(d).unwrap().is_unitary(TOL), "d={d}");
        }
    }

    #[test]
    fn shift_is_fourier_conjugate_of_clock() {
        for d in 2..=4 {
            let (x, z, f) = (build_x(d).unwrap(), build_z(d).unwrap(), build_f(d).unwrap());
            let conj = f.adjoint().mul(&z).mul(&f);
            assert!(x.eq_up_to_global_phase(&conj, 1e-9), "d={d}");
        }
    }

    #[test]
    fn cinc_fig5_semantics() {
        // phys 4, control value 1, mod 3
        let m = build_cinc(4, 1, 3, Delta::Inc).unwrap();
        let col = |c: usize, t: usize| c * 4 + t;
        assert_eq!(m[(col(1, 2), col(1, 1))], ONE);
        assert_eq!(m[(col(0, 1), col(0, 1))], ONE);
        assert_eq!(m[(col(1, 0), col(1, 2))], ONE);
        // level 3 is above the modulus
        assert_eq!(m[(col(1, 3), col(1, 3))], ONE);
    }

    #[test]
    fn cinc_inverse_pair() {
        for (phys, v, m) in [(4, 1, 3), (5, 4, 5), (4, 0, 2)] {
            let up = build_cinc(phys, v, m, Delta::Inc).unwrap();
            let down = build_cinc(phys, v, m, Delta::Dec).unwrap();
            assert!(up.mul(&down).approx_eq(&UnitaryMatrix::identity(phys * phys), TOL));
        }
    }

    #[test]
    fn cinc_top_level_control_matches_block_form() {
        // identity blocks everywhere except the last, which is X_{d+2}
        for d in 2..=4 {
            let p = d + 2;
            let m = build_cinc(p, p - 1, p, Delta::Inc).unwrap();
            let x = build_x(p).unwrap();
            let mut expect = UnitaryMatrix::identity(p * p);
            for r in 0..p {
                for k in 0..p {
                    expect[((p - 1) * p + r, (p - 1) * p + k)] = x[(r, k)];
                }
            }
            assert!(m.approx_eq(&expect, 0.0));
        }
    }

    #[test]
    fn cinc_domain_errors() {
        assert!(build_cinc(4, 4, 3, Delta::Inc).is_err());
        assert!(build_cinc(4, 1, 5, Delta::Inc).is_err());
        assert!(build_cinc(4, 1, 1, Delta::Inc).is_err());
    }

    #[test]
    fn multi_toffoli_cnot_and_toffoli() {
        let cnot = build_multi_toffoli(2, 2).unwrap();
        assert!(cnot.approx_eq(
            &real(&[
                &[1., 0., 0., 0.],
                &[0., 1., 0., 0.],
                &[0., 0., 0., 1.],
                &[0., 0., 1., 0.]
            ]),
            0.0
        ));
        let toff = build_multi_toffoli(3, 2).unwrap();
        for j in 0..8 {
            let expect = match j {
                6 => 7,
                7 => 6,
                _ => j,
            };
            assert_eq!(toff[(expect, j)], ONE);
        }
    }

    #[test]
    fn multi_toffoli_n3_d3_enumerated() {
        let m = build_multi_toffoli(3, 3).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                for t in 0..3 {
                    let j = a * 9 + b * 3 + t;
                    let out_t = if a == 2 && b == 2 { (t + 1) % 3 } else { t };
                    assert_eq!(m[(a * 9 + b * 3 + out_t, j)], ONE);
                }
            }
        }
        assert!(m.is_permutation());
    }

    #[test]
    fn multi_toffoli_guards() {
        assert!(matches!(build_multi_toffoli(13, 2), Err(Error::Resource { .. })));
        assert!(matches!(build_multi_toffoli(8, 3), Err(Error::Resource { .. })));
        assert!(build_multi_toffoli(1, 2).is_err());
    }

    #[test]
    fn diffusion_examples() {
        assert!(build_diffusion(1, 2).unwrap().approx_eq(&real(&[&[0., 1.], &[1., 0.]]), TOL));
        let d = build_diffusion(2, 2).unwrap();
        for r in 0..4 {
            for k in 0..4 {
                let e = if r == k { -0.5 } else { 0.5 };
                assert!((d[(r, k)] - c(e, 0.0)).norm() < TOL);
            }
        }
        assert!(matches!(build_diffusion(13, 2), Err(Error::Resource { .. })));
    }

    #[test]
    fn diffusion_is_reflection() {
        for (n, d) in [(2, 2), (2, 3), (3, 2)] {
            let m = build_diffusion(n, d).unwrap();
            let dim = m.dim();
            assert!(m.mul(&m).approx_eq(&UnitaryMatrix::identity(dim), TOL));
        }
    }

    #[test]
    fn diffusion_matches_fourier_sandwich() {
        for (n, d) in [(1, 3), (2, 2), (2, 3), (3, 2), (2, 4)] {
            let f = build_f(d).unwrap();
            let fan = (1..n).fold(f.clone(), |acc, _| acc.kron(&f));
            let dim = fan.dim();
            let mut refl = UnitaryMatrix::identity(dim).scale(c(-1.0, 0.0));
            refl[(0, 0)] = ONE;
            let sandwich = fan.mul(&refl).mul(&fan.adjoint());
            let m = build_diffusion(n, d).unwrap();
            assert!(m.approx_eq(&sandwich, TOL), "n={n} d={d}");
            assert!(m.approx_eq(&m.adjoint(), TOL));
        }
    }

    #[test]
    fn global_phase_comparison() {
        let x = build_x(3).unwrap();
        let rotated = x.scale(Complex64::from_polar(1.0, 0.7));
        assert!(x.eq_up_to_global_phase(&rotated, 1e-9));
        assert!(!x.eq_up_to_global_phase(&build_z(3).unwrap(), 1e-9));
    }

    #[test]
    fn single_matrix_is_block_diagonal() {
        let m = single_matrix(SingleKind::F, 3, 5).unwrap();
        assert!(m.is_unitary(TOL));
        assert_eq!(m[(3, 3)], ONE);
        assert_eq!(m[(4, 4)], ONE);
        assert_eq!(m[(0, 3)], ZERO);
        assert!(single_matrix(SingleKind::X, 6, 5).is_err());
    }

    #[test]
    fn embed_respects_wire_order() {
        // CNOT with control on the less significant wire
        let cnot = build_multi_toffoli(2, 2).unwrap();
        let m = embed(&cnot, &[2, 2], &[1, 0]).unwrap();
        // |01⟩ (idx 1) has control wire 1 set → target wire 0 flips → |11⟩ (idx 3)
        assert_eq!(m[(3, 1)], ONE);
        assert_eq!(m[(2, 2)], ONE);
    }
}
