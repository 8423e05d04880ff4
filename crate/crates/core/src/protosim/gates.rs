use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::matcore::{c64, ComplexMatrix, ONE, ZERO};

/// `I X Y Z H S T` on one qubit; `CNOT CZ SWAP` on two (control first).
pub fn named_gate(name: &str) -> Result<ComplexMatrix> {
    let r = FRAC_1_SQRT_2;
    let rows: Vec<Vec<_>> = match name {
        "I" => return Ok(ComplexMatrix::identity(2)),
        "X" => vec![vec![ZERO, ONE], vec![ONE, ZERO]],
        "Y" => vec![vec![ZERO, c64(0.0, -1.0)], vec![c64(0.0, 1.0), ZERO]],
        "Z" => vec![vec![ONE, ZERO], vec![ZERO, -ONE]],
        "H" => vec![
            vec![c64(r, 0.0), c64(r, 0.0)],
            vec![c64(r, 0.0), c64(-r, 0.0)],
        ],
        "S" => vec![vec![ONE, ZERO], vec![ZERO, c64(0.0, 1.0)]],
        "T" => vec![vec![ONE, ZERO], vec![ZERO, c64(r, r)]],
        "CNOT" => {
            let mut m = ComplexMatrix::identity(4);
            m[(2, 2)] = ZERO;
            m[(3, 3)] = ZERO;
            m[(2, 3)] = ONE;
            m[(3, 2)] = ONE;
            return Ok(m);
        }
        "CZ" => return Ok(ComplexMatrix::diag(&[1.0, 1.0, 1.0, -1.0])),
        "SWAP" => {
            let mut m = ComplexMatrix::zeros(4, 4);
            m[(0, 0)] = ONE;
            m[(1, 2)] = ONE;
            m[(2, 1)] = ONE;
            m[(3, 3)] = ONE;
            return Ok(m);
        }
        other => return Err(Error::Protocol(format!("unknown gate {other:?}"))),
    };
    ComplexMatrix::from_rows(&rows)
}

/// Permutation `|a, o> -> |a, o xor f(a)>` on `inputs` input bits followed by
/// `outputs` output bits.
pub fn xor_oracle(inputs: usize, outputs: usize, f: impl Fn(usize) -> usize) -> ComplexMatrix {
    let dim_o = 1usize << outputs;
    let dim = (1usize << inputs) * dim_o;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for a in 0..1usize << inputs {
        let fa = f(a) & (dim_o - 1);
        for o in 0..dim_o {
            m[(a * dim_o + (o ^ fa), a * dim_o + o)] = ONE;
        }
    }
    m
}
