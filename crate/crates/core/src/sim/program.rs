//! Compiled gate list and in-place statevector kernels.

use num_complex::Complex64 as C64;

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Row-major 2×2 matrix.
pub(crate) type Mat2 = [C64; 4];

pub(crate) const PAULI_X: Mat2 = [ZERO, ONE, ONE, ZERO];
pub(crate) const PAULI_Y: Mat2 = [ZERO, C64::new(0.0, -1.0), I, ZERO];
pub(crate) const PAULI_Z: Mat2 = [ONE, ZERO, ZERO, C64::new(-1.0, 0.0)];

pub(crate) fn single_qubit_matrix(kind: GateKind, theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::Rx => [C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
        GateKind::Ry => [C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
        GateKind::Rz => [C64::new(c, -s), ZERO, ZERO, C64::new(c, s)],
        GateKind::H => [C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)],
        GateKind::X => PAULI_X,
        GateKind::Y => PAULI_Y,
        GateKind::Z => PAULI_Z,
        _ => unreachable!("{kind} is not a single-qubit unitary"),
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Instr {
    One { q: usize, m: Mat2 },
    Cnot { c: usize, t: usize },
    Cz { a: usize, b: usize },
    /// Phase `even` on equal bits, `odd` on differing bits.
    Rzz { a: usize, b: usize, even: C64, odd: C64 },
    Measure { q: usize },
    Proj { plus: bool },
}

impl Instr {
    /// Qubits touched by a unitary instruction, `None` for non-unitaries.
    pub(crate) fn noise_support(&self) -> Option<(usize, Option<usize>)> {
        match *self {
            Instr::One { q, .. } => Some((q, None)),
            Instr::Cnot { c, t } => Some((c, Some(t))),
            Instr::Cz { a, b } | Instr::Rzz { a, b, .. } => Some((a, Some(b))),
            Instr::Measure { .. } | Instr::Proj { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub width: usize,
    pub instrs: Vec<Instr>,
}

impl Program {
    pub fn compile(circuit: &Circuit) -> Result<Program> {
        circuit.ensure_bound()?;
        let instrs = circuit
            .ops()
            .iter()
            .map(|op| {
                let q = &op.qubits;
                match op.kind {
                    GateKind::Cnot => Instr::Cnot { c: q[0], t: q[1] },
                    GateKind::Cz => Instr::Cz { a: q[0], b: q[1] },
                    GateKind::Rzz => {
                        let t = op.angle().expect("bound rotation");
                        Instr::Rzz {
                            a: q[0],
                            b: q[1],
                            even: C64::from_polar(1.0, -t / 2.0),
                            odd: C64::from_polar(1.0, t / 2.0),
                        }
                    }
                    GateKind::MeasureZMid => Instr::Measure { q: q[0] },
                    GateKind::ProjPlus => Instr::Proj { plus: true },
                    GateKind::ProjMinus => Instr::Proj { plus: false },
                    kind => Instr::One {
                        q: q[0],
                        m: single_qubit_matrix(kind, op.angle().unwrap_or(0.0)),
                    },
                }
            })
            .collect();
        Ok(Program {
            width: circuit.width(),
            instrs,
        })
    }

    pub fn reject_nonunitary(&self, context: &'static str) -> Result<()> {
        for ins in &self.instrs {
            match ins {
                Instr::Measure { .. } => {
                    return Err(Error::UnsupportedOp {
                        kind: "MEASURE_Z_MID",
                        context,
                    })
                }
                Instr::Proj { plus, .. } => {
                    return Err(Error::UnsupportedOp {
                        kind: if *plus { "PROJ_PLUS" } else { "PROJ_MINUS" },
                        context,
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn reject_projectors(&self, context: &'static str) -> Result<()> {
        match self.instrs.iter().find(|i| matches!(i, Instr::Proj { .. })) {
            Some(Instr::Proj { plus, .. }) => Err(Error::UnsupportedOp {
                kind: if *plus { "PROJ_PLUS" } else { "PROJ_MINUS" },
                context,
            }),
            _ => Ok(()),
        }
    }
}

pub(crate) fn apply_one(amps: &mut [C64], q: usize, m: &Mat2) {
    let stride = 1usize << q;
    let len = amps.len();
    let mut base = 0;
    while base < len {
        for i in base..base + stride {
            let (a0, a1) = (amps[i], amps[i + stride]);
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[i + stride] = m[2] * a0 + m[3] * a1;
        }
        base += 2 * stride;
    }
}

pub(crate) fn apply_unitary(amps: &mut [C64], ins: &Instr) {
    match *ins {
        Instr::One { q, ref m } => apply_one(amps, q, m),
        Instr::Cnot { c, t } => {
            let (cm, tm) = (1usize << c, 1usize << t);
            for i in 0..amps.len() {
                if i & cm != 0 && i & tm == 0 {
                    amps.swap(i, i | tm);
                }
            }
        }
        Instr::Cz { a, b } => {
            let mask = (1usize << a) | (1usize << b);
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        Instr::Rzz { a, b, even, odd } => {
            for (i, amp) in amps.iter_mut().enumerate() {
                let parity = ((i >> a) ^ (i >> b)) & 1;
                *amp *= if parity == 0 { even } else { odd };
            }
        }
        Instr::Measure { .. } | Instr::Proj { .. } => {
            unreachable!("non-unitary instruction in unitary kernel")
        }
    }
}

/// Zero the amplitudes inconsistent with `bit` on qubit `q`.
pub(crate) fn project(amps: &mut [C64], q: usize, bit: usize) {
    for (i, amp) in amps.iter_mut().enumerate() {
        if (i >> q) & 1 != bit {
            *amp = ZERO;
        }
    }
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Apply a Pauli error. `code` 1..=3 on one qubit is X, Y, Z; on two qubits
/// `code` 1..=15 encodes `(code / 4, code % 4)` for the first and second qubit.
pub(crate) fn apply_pauli_code(amps: &mut [C64], support: (usize, Option<usize>), code: u8) {
    fn one(amps: &mut [C64], q: usize, p: u8) {
        match p {
            1 => apply_one(amps, q, &PAULI_X),
            2 => apply_one(amps, q, &PAULI_Y),
            3 => apply_one(amps, q, &PAULI_Z),
            _ => {}
        }
    }
    match support {
        (q, None) => one(amps, q, code),
        (a, Some(b)) => {
            one(amps, a, code / 4);
            one(amps, b, code % 4);
        }
    }
}
