use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use super::rng::RngSpec;
use crate::error::{Error, Result};
use crate::linalg::{hadamard_all, qubit_count, ComplexMatrix};

/// Pauli basis in which a random diagonal unitary is diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Z => write!(f, "Z"),
            Basis::X => write!(f, "X"),
        }
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z" | "z" => Ok(Basis::Z),
            "X" | "x" => Ok(Basis::X),
            _ => Err(Error::Parse(format!("unknown basis `{s}`"))),
        }
    }
}

/// `diag(e^{iφ})` in the Z basis, or its Hadamard conjugate in the X basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagUnitary {
    pub basis: Basis,
    pub phases: Vec<f64>,
}

impl DiagUnitary {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let dz = ComplexMatrix::from_diag(&self.diagonal());
        match self.basis {
            Basis::Z => dz,
            Basis::X => {
                let h = hadamard_all(self.dim().trailing_zeros() as usize);
                h.matmul(&dz).matmul(&h)
            }
        }
    }

    /// Left-multiplies `m` by this unitary; `h` must be `H^{⊗n}` for X layers.
    pub(crate) fn left_apply(&self, m: &ComplexMatrix, h: &ComplexMatrix) -> ComplexMatrix {
        let diag = self.diagonal();
        let scale_rows = |m: &ComplexMatrix| {
            let mut out = m.clone();
            for (i, z) in diag.iter().enumerate() {
                for j in 0..out.cols() {
                    out[(i, j)] *= z;
                }
            }
            out
        };
        match self.basis {
            Basis::Z => scale_rows(m),
            Basis::X => h.matmul(&scale_rows(&h.matmul(m))),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = format!("basis:{}", self.basis);
        for p in &self.phases {
            s.push(' ');
            s.push_str(&format!("{p:.16e}"));
        }
        s
    }

    pub fn from_line(line: &str) -> Result<Self> {
        let mut it = line.split_whitespace();
        let head = it.next().ok_or_else(|| Error::Parse("empty layer line".into()))?;
        let basis = head
            .strip_prefix("basis:")
            .ok_or_else(|| Error::Parse(format!("layer line must start with `basis:`, got `{head}`")))?
            .parse()?;
        let phases = it
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("phase `{t}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if phases.is_empty() {
            return Err(Error::Parse("layer has no phases".into()));
        }
        Ok(Self { basis, phases })
    }
}

fn check_dim(d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("diagonal unitaries need d >= 2, got {d}")));
    }
    qubit_count(d)
}

pub(crate) fn sample_diag_with<R: Rng + ?Sized>(basis: Basis, d: usize, rng: &mut R) -> DiagUnitary {
    let phases = (0..d).map(|_| rng.random::<f64>() * TAU).collect();
    DiagUnitary { basis, phases }
}

/// A random diagonal unitary with i.i.d. uniform phases.
pub fn sample_diag(basis: Basis, d: usize, rng: RngSpec) -> Result<DiagUnitary> {
    check_dim(d)?;
    Ok(sample_diag_with(basis, d, &mut rng.rng()))
}

/// One realization of `D[ℓ]`: layers `Z, X, Z, ..., Z` applied first to last.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagCircuit {
    pub ell: usize,
    pub layers: Vec<DiagUnitary>,
}

impl DiagCircuit {
    pub fn new(ell: usize, layers: Vec<DiagUnitary>) -> Result<Self> {
        if ell == 0 || layers.len() != 2 * ell + 1 {
            return Err(Error::InvalidParameter(format!(
                "a circuit with ell={ell} needs {} layers, got {}",
                2 * ell + 1,
                layers.len()
            )));
        }
        for (k, layer) in layers.iter().enumerate() {
            let expected = if k % 2 == 0 { Basis::Z } else { Basis::X };
            if layer.basis != expected {
                return Err(Error::InvalidParameter(format!("layer {k} must be {expected}-diagonal")));
            }
            if layer.dim() != layers[0].dim() {
                return Err(Error::DimensionMismatch("layers act on different dimensions".into()));
            }
        }
        Ok(Self { ell, layers })
    }

    pub fn dim(&self) -> usize {
        self.layers[0].dim()
    }

    /// `L_{2ℓ} ⋯ L_1 L_0`.
    pub fn matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let h = hadamard_all(d.trailing_zeros() as usize);
        let mut u = ComplexMatrix::identity(d);
        for layer in &self.layers {
            u = layer.left_apply(&u, &h);
        }
        u
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for layer in &self.layers {
            s.push_str(&layer.to_line());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let layers = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(DiagUnitary::from_line)
            .collect::<Result<Vec<_>>>()?;
        if layers.len() % 2 == 0 {
            return Err(Error::Parse(format!("{} layers cannot form Z,X,...,Z", layers.len())));
        }
        Self::new(layers.len() / 2, layers)
    }
}

pub(crate) fn sample_d_ell_with<R: Rng + ?Sized>(n_qubits: usize, ell: usize, rng: &mut R) -> DiagCircuit {
    let d = 1usize << n_qubits;
    let layers =
        (0..2 * ell + 1).map(|k| sample_diag_with(if k % 2 == 0 { Basis::Z } else { Basis::X }, d, rng)).collect();
    DiagCircuit { ell, layers }
}

/// Samples `D[ℓ]` on `n_qubits` qubits.
pub fn sample_d_ell(n_qubits: usize, ell: usize, rng: RngSpec) -> Result<DiagCircuit> {
    if n_qubits == 0 || ell == 0 {
        return Err(Error::InvalidParameter("sample_d_ell needs n_qubits >= 1 and ell >= 1".into()));
    }
    Ok(sample_d_ell_with(n_qubits, ell, &mut rng.rng()))
}
