//! Random-unitary generation and synthesis into the native gate set.
//!
//! One-qubit unitaries become `RZ·RY·RZ`; two-qubit unitaries use the
//! canonical (KAK) form `(A₁⊗A₂)·exp(i(aXX+bYY+cZZ))·(C₁⊗C₂)` with each
//! interaction term realised as an `RZZ` inside local basis changes, so
//! every nonlocal piece is cuttable. Synthesis is exact up to global phase.
//!
//! Two-qubit matrices use the Kronecker order `left ⊗ right`, i.e. row index
//! `2·bit(left) + bit(right)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Circuit, GateOp};
use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random 2×2 unitary.
pub fn haar_2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<C64> {
    let g = Matrix2::from_fn(|_, _| ginibre(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    q * Matrix2::from_diagonal(&r.diagonal().map(|d| d / d.norm()))
}

/// Haar-random 4×4 unitary.
pub fn haar_4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<C64> {
    let g = Matrix4::from_fn(|_, _| ginibre(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    q * Matrix4::from_diagonal(&r.diagonal().map(|d| d / d.norm()))
}

/// Angles `(β, γ, δ)` with `u = e^{iα}·RZ(β)·RY(γ)·RZ(δ)`.
pub fn zyz_angles(u: &Matrix2<C64>) -> (f64, f64, f64) {
    let det = u.determinant();
    let v = u * C64::from_polar(1.0, -det.arg() / 2.0);
    let (a, b) = (v[(0, 0)], v[(1, 0)]);
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let sum = if a.norm() > TOL { 2.0 * v[(1, 1)].arg() } else { 0.0 };
    let diff = if b.norm() > TOL { 2.0 * b.arg() } else { 0.0 };
    ((sum + diff) / 2.0, gamma, (sum - diff) / 2.0)
}

/// Native ops realising `u` on qubit `q`, up to global phase.
pub fn synthesize_1q(u: &Matrix2<C64>, q: usize) -> Vec<GateOp> {
    let (beta, gamma, delta) = zyz_angles(u);
    vec![GateOp::rz(q, delta), GateOp::ry(q, gamma), GateOp::rz(q, beta)]
}

fn magic() -> Matrix4<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let o = c(0.0, 0.0);
    Matrix4::new(
        c(s, 0.0), o, o, c(0.0, s),
        o, c(0.0, s), c(s, 0.0), o,
        o, c(0.0, s), c(-s, 0.0), o,
        c(s, 0.0), o, o, c(0.0, -s),
    )
}

fn pauli_pair(p: char) -> Matrix4<C64> {
    let one = match p {
        'X' => Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        'Y' => Matrix2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
        _ => Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
    };
    one.kronecker(&one)
}

/// Canonical decomposition of a two-qubit unitary.
#[derive(Debug, Clone)]
pub struct Kak {
    pub before: (Matrix2<C64>, Matrix2<C64>),
    /// Coefficients of `XX`, `YY`, `ZZ` in `exp(i(aXX+bYY+cZZ))`.
    pub coefficients: [f64; 3],
    pub after: (Matrix2<C64>, Matrix2<C64>),
}

fn kron_factor(m: &Matrix4<C64>) -> (Matrix2<C64>, Matrix2<C64>) {
    let (mut r, mut col, mut best) = (0, 0, -1.0);
    for i in 0..4 {
        for j in 0..4 {
            if m[(i, j)].norm() > best {
                best = m[(i, j)].norm();
                r = i;
                col = j;
            }
        }
    }
    let (i0, k0, j0, l0) = (r / 2, r % 2, col / 2, col % 2);
    let mut left = Matrix2::from_fn(|i, j| m[(2 * i + k0, 2 * j + l0)]);
    let mut right = Matrix2::from_fn(|k, l| m[(2 * i0 + k, 2 * j0 + l)] / m[(r, col)]);
    let scale = left.determinant().norm().sqrt();
    left /= C64::from(scale);
    right *= C64::from(scale);
    (left, right)
}

/// KAK decomposition of `u` (any 4×4 unitary).
pub fn kak(u: &Matrix4<C64>) -> Result<Kak> {
    let det = u.determinant();
    let su = u * C64::from_polar(1.0, -det.arg() / 4.0);
    let b = magic();
    let bd = b.adjoint();
    let up = bd * su * b;
    let m2 = up.transpose() * up;
    let re = m2.map(|z| z.re);
    let im = m2.map(|z| z.im);

    let mut found = None;
    // Generic mixing weights; a later one is tried when a combination is degenerate.
    for t in [0.618_033_988_7, 1.37, 0.271_828_18, 3.07, 0.05] {
        let eig = SymmetricEigen::new(re + im * t);
        let mut p = eig.eigenvectors;
        if p.determinant() < 0.0 {
            p.column_mut(0).neg_mut();
        }
        let pc = p.map(C64::from);
        let d = pc.transpose() * m2 * pc;
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| d[(i, j)].norm())
            .fold(0.0, f64::max);
        if off < 1e-8 {
            found = Some((pc, d.diagonal()));
            break;
        }
    }
    let (p, d) = found.ok_or_else(|| Error::BadRange("KAK diagonalisation failed".into()))?;

    let mut phases: Vector4<f64> = d.map(|z| z.arg() / 2.0);
    let det_sqrt: f64 = phases.sum();
    // det(√D) must be +1 for the left factor to lie in SO(4).
    if C64::from_polar(1.0, det_sqrt).re < 0.0 {
        phases[0] += std::f64::consts::PI;
    }
    let dsqrt_inv = Matrix4::from_diagonal(&phases.map(|ph| C64::from_polar(1.0, -ph)));
    let k1 = up * p * dsqrt_inv;
    let k2 = p.transpose();

    let eigs: Vec<[f64; 3]> = (0..4)
        .map(|j| {
            let v = b.column(j);
            ['X', 'Y', 'Z'].map(|ax| (v.adjoint() * pauli_pair(ax) * v)[(0, 0)].re)
        })
        .collect();
    let sys = Matrix4::from_fn(|j, col| if col == 0 { 1.0 } else { eigs[j][col - 1] });
    let sol = sys
        .lu()
        .solve(&phases)
        .ok_or_else(|| Error::BadRange("singular magic-basis system".into()))?;

    Ok(Kak {
        before: kron_factor(&(b * k2 * bd)),
        coefficients: [sol[1], sol[2], sol[3]],
        after: kron_factor(&(b * k1 * bd)),
    })
}

/// Native ops realising the two-qubit unitary `u` on `(left, right)`, up to
/// global phase. The interaction is carried by three `RZZ` gates.
pub fn synthesize_2q(u: &Matrix4<C64>, left: usize, right: usize) -> Result<Vec<GateOp>> {
    let k = kak(u)?;
    let [a, b, cz] = k.coefficients;
    let mut ops = synthesize_1q(&k.before.0, left);
    ops.extend(synthesize_1q(&k.before.1, right));
    ops.push(GateOp::rzz(left, right, -2.0 * cz));
    ops.extend([GateOp::rx(left, FRAC_PI_2), GateOp::rx(right, FRAC_PI_2)]);
    ops.push(GateOp::rzz(left, right, -2.0 * b));
    ops.extend([GateOp::rx(left, -FRAC_PI_2), GateOp::rx(right, -FRAC_PI_2)]);
    ops.extend([GateOp::h(left), GateOp::h(right)]);
    ops.push(GateOp::rzz(left, right, -2.0 * a));
    ops.extend([GateOp::h(left), GateOp::h(right)]);
    ops.extend(synthesize_1q(&k.after.0, left));
    ops.extend(synthesize_1q(&k.after.1, right));
    Ok(ops)
}

/// The five Haar-random blocks of the two-qubit validation circuit:
/// `U1` on qubit 0 and `U2` on qubit 1, then `U3` on both, then `U4` on
/// qubit 0 and `U5` on qubit 1.
#[derive(Debug, Clone)]
pub struct RandomBlocks {
    pub u1: Matrix2<C64>,
    pub u2: Matrix2<C64>,
    pub u3: Matrix4<C64>,
    pub u4: Matrix2<C64>,
    pub u5: Matrix2<C64>,
}

impl RandomBlocks {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> RandomBlocks {
        RandomBlocks {
            u1: haar_2(rng),
            u2: haar_2(rng),
            u3: haar_4(rng),
            u4: haar_2(rng),
            u5: haar_2(rng),
        }
    }

    /// Circuit realising the blocks; `U3` is read with qubit 1 as the
    /// Kronecker-left factor so its matrix matches little-endian indexing.
    pub fn circuit(&self) -> Result<Circuit> {
        let mut ops = synthesize_1q(&self.u1, 0);
        ops.extend(synthesize_1q(&self.u2, 1));
        ops.extend(synthesize_2q(&self.u3, 1, 0)?);
        ops.extend(synthesize_1q(&self.u4, 0));
        ops.extend(synthesize_1q(&self.u5, 1));
        Circuit::from_ops(2, ops)
    }

    /// Dense product of the blocks in little-endian indexing.
    pub fn unitary(&self) -> Matrix4<C64> {
        self.u5.kronecker(&self.u4) * self.u3 * self.u2.kronecker(&self.u1)
    }
}
