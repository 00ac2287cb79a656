use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::quantum::{partial_trace, REPAIR_TOL, STATE_TOL};
use super::spectral::eigvalsh;
use crate::error::{Error, Result};

/// A completely positive map stored through its normalized Choi matrix
/// `J(T) = (id ⊗ T)(Φ)`, ordered input ⊗ output, so `tr J = 1` for trace-preserving maps.
#[derive(Clone, Debug)]
pub struct Channel {
    choi: ComplexMatrix,
    d_in: usize,
    d_out: usize,
    tp: bool,
}

/// The ways a channel can be described before conversion to a Choi matrix.
#[derive(Clone, Debug)]
pub enum ChannelDescription {
    Kraus(Vec<ComplexMatrix>),
    /// Column-stacking superoperator `S vec(X) = vec(T(X))`.
    Superop {
        matrix: ComplexMatrix,
        d_in: usize,
        d_out: usize,
    },
}

/// Builds the Choi matrix of a CP map and validates it.
pub fn j_map(desc: &ChannelDescription) -> Result<Channel> {
    let (choi, d_in, d_out) = match desc {
        ChannelDescription::Kraus(ops) => {
            let first = ops.first().ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
            let (d_out, d_in) = first.shape();
            if ops.iter().any(|k| k.shape() != (d_out, d_in)) {
                return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
            }
            (kraus_choi(ops, d_in, d_out), d_in, d_out)
        }
        ChannelDescription::Superop { matrix, d_in, d_out } => {
            if matrix.shape() != (d_out * d_out, d_in * d_in) {
                return Err(Error::DimensionMismatch(format!(
                    "superoperator for {d_in}->{d_out} must be {}x{}",
                    d_out * d_out,
                    d_in * d_in
                )));
            }
            (superop_choi(matrix, *d_in, *d_out), *d_in, *d_out)
        }
    };
    let tp = partial_trace(&choi, &[d_in, d_out], &[1])?
        .max_abs_diff(&ComplexMatrix::identity(d_in).scale(1.0 / d_in as f64))
        <= STATE_TOL;
    Channel::from_choi(choi, d_in, d_out, tp)
}

fn kraus_choi(ops: &[ComplexMatrix], d_in: usize, d_out: usize) -> ComplexMatrix {
    let n = d_in * d_out;
    let mut j = ComplexMatrix::zeros(n, n);
    for k in ops {
        for i in 0..d_in {
            for b in 0..d_out {
                let left = k[(b, i)];
                for jj in 0..d_in {
                    for bp in 0..d_out {
                        j[(i * d_out + b, jj * d_out + bp)] += left * k[(bp, jj)].conj();
                    }
                }
            }
        }
    }
    j.scale(1.0 / d_in as f64)
}

fn superop_choi(s: &ComplexMatrix, d_in: usize, d_out: usize) -> ComplexMatrix {
    let n = d_in * d_out;
    ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, b) = (r / d_out, r % d_out);
        let (jj, bp) = (c / d_out, c % d_out);
        s[(b + bp * d_out, i + jj * d_in)] / d_in as f64
    })
}

impl Channel {
    /// Wraps a Choi matrix after checking complete positivity and, when claimed,
    /// trace preservation. Small violations up to `1e-8` are repaired.
    pub fn from_choi(choi: ComplexMatrix, d_in: usize, d_out: usize, tp: bool) -> Result<Self> {
        let n = d_in * d_out;
        if choi.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for {d_in}->{d_out} must be {n}x{n}, got {}x{}",
                choi.rows(),
                choi.cols()
            )));
        }
        let dev = choi.hermitian_deviation();
        if dev > REPAIR_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let choi = choi.hermitian_part();
        let min = eigvalsh(&choi)?[0];
        if min < -REPAIR_TOL {
            return Err(Error::NotCompletelyPositive { eigenvalue: min });
        }
        if tp {
            let marginal = partial_trace(&choi, &[d_in, d_out], &[1])?;
            let resid = marginal.max_abs_diff(&ComplexMatrix::identity(d_in).scale(1.0 / d_in as f64));
            if resid > REPAIR_TOL {
                return Err(Error::InvalidParameter(format!(
                    "channel claims trace preservation but tr_out J deviates by {resid:.3e}"
                )));
            }
        }
        Ok(Self { choi, d_in, d_out, tp })
    }

    /// Choi matrix of an arbitrary linear map without CP validation.
    pub(crate) fn from_choi_unchecked(choi: ComplexMatrix, d_in: usize, d_out: usize) -> Self {
        Self { choi, d_in, d_out, tp: false }
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.tp
    }

    pub fn identity(d: usize) -> Self {
        j_map(&ChannelDescription::Kraus(vec![ComplexMatrix::identity(d)])).expect("identity is CPTP")
    }

    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        j_map(&ChannelDescription::Kraus(vec![u.clone()]))
    }

    /// `X ↦ tr(X) I/d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let n = d * d;
        Self { choi: ComplexMatrix::identity(n).scale(1.0 / n as f64), d_in: d, d_out: d, tp: true }
    }

    /// `X ↦ (1-p) X + p tr(X) I/d`.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0 + 1.0 / (d * d - 1).max(1) as f64).contains(&p) {
            return Err(Error::InvalidParameter(format!("depolarizing parameter {p} out of range")));
        }
        let id = Self::identity(d);
        let dep = Self::completely_depolarizing(d);
        let choi = &id.choi.scale(1.0 - p) + &dep.choi.scale(p);
        Self::from_choi(choi, d, d, true)
    }

    /// `tr_{A2}` on `A1 ⊗ A2`.
    pub fn partial_trace(d_keep: usize, d_traced: usize) -> Self {
        let ops: Vec<ComplexMatrix> = (0..d_traced)
            .map(|k| {
                let bra =
                    ComplexMatrix::from_fn(1, d_traced, |_, j| Complex64::new(if j == k { 1.0 } else { 0.0 }, 0.0));
                ComplexMatrix::identity(d_keep).kron(&bra)
            })
            .collect();
        j_map(&ChannelDescription::Kraus(ops)).expect("partial trace is CPTP")
    }

    /// `X ↦ tr X` onto a one-dimensional output.
    pub fn full_trace(d: usize) -> Self {
        Self::partial_trace(1, d)
    }

    /// `T(Y) = d_in tr_A[(Y^T ⊗ I) J]`.
    pub fn apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        j_inv_apply(self, y)
    }

    /// Applies the channel to the first tensor factor of an operator on `A ⊗ Rest`.
    pub fn apply_to_first(&self, x: &ComplexMatrix, d_rest: usize) -> Result<ComplexMatrix> {
        let (di, dout) = (self.d_in, self.d_out);
        if x.shape() != (di * d_rest, di * d_rest) {
            return Err(Error::DimensionMismatch(format!(
                "operator of size {}x{} does not act on {di}x{d_rest}",
                x.rows(),
                x.cols()
            )));
        }
        let n = dout * d_rest;
        let mut y = ComplexMatrix::zeros(n, n);
        let scale = di as f64;
        let j = &self.choi;
        for a in 0..di {
            for ap in 0..di {
                for b in 0..dout {
                    for bp in 0..dout {
                        let w = j[(a * dout + b, ap * dout + bp)] * scale;
                        if w.re == 0.0 && w.im == 0.0 {
                            continue;
                        }
                        for r in 0..d_rest {
                            let xrow = x.row(a * d_rest + r);
                            let yrow = (b * d_rest + r) * n + bp * d_rest;
                            let data = y.data_mut();
                            for rp in 0..d_rest {
                                data[yrow + rp] += w * xrow[ap * d_rest + rp];
                            }
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    /// Hilbert-Schmidt adjoint `T*(Y)` computed from the Choi matrix.
    pub fn adjoint_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (di, dout) = (self.d_in, self.d_out);
        if y.shape() != (dout, dout) {
            return Err(Error::DimensionMismatch(format!("adjoint input must be {dout}x{dout}")));
        }
        let j = &self.choi;
        Ok(ComplexMatrix::from_fn(di, di, |yy, xx| {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..dout {
                for bp in 0..dout {
                    acc += j[(yy * dout + b, xx * dout + bp)].conj() * y[(b, bp)];
                }
            }
            acc * di as f64
        }))
    }

    /// `(T* ⊗ T*)(F_{BB'})`, an operator on `A ⊗ A'`.
    pub fn adjoint_square_of_swap(&self) -> ComplexMatrix {
        let (di, dout) = (self.d_in, self.d_out);
        let j = &self.choi;
        let scale = (di * di) as f64;
        let mut out = ComplexMatrix::zeros(di * di, di * di);
        for y in 0..di {
            for yp in 0..di {
                for x in 0..di {
                    for xp in 0..di {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for b in 0..dout {
                            for bp in 0..dout {
                                acc += j[(x * dout + b, y * dout + bp)] * j[(xp * dout + bp, yp * dout + b)];
                            }
                        }
                        out[(y * di + yp, x * di + xp)] = acc * scale;
                    }
                }
            }
        }
        out
    }

    /// Column-stacking superoperator matrix of the map.
    pub fn superop(&self) -> ComplexMatrix {
        let (di, dout) = (self.d_in, self.d_out);
        let mut s = ComplexMatrix::zeros(dout * dout, di * di);
        for i in 0..di {
            for jj in 0..di {
                for b in 0..dout {
                    for bp in 0..dout {
                        s[(b + bp * dout, i + jj * di)] = self.choi[(i * dout + b, jj * dout + bp)] * di as f64;
                    }
                }
            }
        }
        s
    }

    /// `τ_B = tr_A J(T)`.
    pub fn output_marginal(&self) -> ComplexMatrix {
        partial_trace(&self.choi, &[self.d_in, self.d_out], &[0]).expect("Choi dimensions are consistent")
    }
}

/// Inverse Choi map: `T(Y) = d_in tr_A[(Y^T ⊗ I_B) J]`.
pub fn j_inv_apply(c: &Channel, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (di, dout) = (c.d_in, c.d_out);
    if y.shape() != (di, di) {
        return Err(Error::DimensionMismatch(format!(
            "input of size {}x{} for a channel on dimension {di}",
            y.rows(),
            y.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(dout, dout);
    for i in 0..di {
        for jj in 0..di {
            let w = y[(i, jj)] * di as f64;
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            for b in 0..dout {
                for bp in 0..dout {
                    out[(b, bp)] += w * c.choi[(i * dout + b, jj * dout + bp)];
                }
            }
        }
    }
    Ok(out)
}

/// Applies a list of Kraus operators directly, `Σ K X K^dagger`.
pub fn apply_kraus(ops: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(ops[0].rows(), ops[0].rows());
    for k in ops {
        out += &k.matmul(x).matmul(&k.adjoint());
    }
    out
}
