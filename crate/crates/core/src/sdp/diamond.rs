//! Diamond norm of a Hermiticity-preserving map given by its normalized Choi matrix.
//!
//! The normalized Choi matrix has trace one for a channel, while the
//! semidefinite characterizations below are written for the unnormalized
//! Choi matrix `J_u = d_in · J`, so every entry point rescales by `d_in` first.

use num_complex::Complex64;

use super::ipm::{interior_point, ConicStructure, IpmOptions, SchurSolver, SdpStatus};
use super::problem::{solve_sdp, Entry, SdpProblem, Sense};
use crate::error::{Error, Result};
use crate::linalg::{eigh, partial_trace, ComplexMatrix};

/// Which semidefinite program evaluates the norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiamondMethod {
    /// Marginals for small maps, the structured dual form otherwise.
    Auto,
    /// Variables are the two input marginals and an off-diagonal block.
    Marginals,
    /// `max <J_u, P0 - P1>` over `P0 + P1 = ρ ⊗ I`, with a Schur solver that
    /// eliminates the output space analytically.
    Structured,
}

const MARGINALS_MAX_CONSTRAINTS: usize = 600;

pub fn diamond_norm(delta_choi: &ComplexMatrix, d_in: usize, d_out: usize, gap_tol: f64) -> Result<f64> {
    diamond_norm_with(delta_choi, d_in, d_out, gap_tol, DiamondMethod::Auto)
}

pub fn diamond_norm_with(
    delta_choi: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
    gap_tol: f64,
    method: DiamondMethod,
) -> Result<f64> {
    let n = d_in * d_out;
    if d_in == 0 || d_out == 0 || delta_choi.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("Choi matrix of a {d_in}->{d_out} map must be {n}x{n}")));
    }
    let dev = delta_choi.hermitian_deviation();
    if dev > 1e-10 * delta_choi.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let scale = d_in as f64 * delta_choi.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    // the programs are homogeneous in J, so solve for the unit-scale map
    let j_u = delta_choi.hermitian_part().scale(d_in as f64 / scale);
    let method = match method {
        DiamondMethod::Auto if 2 * n * n + 2 <= MARGINALS_MAX_CONSTRAINTS => DiamondMethod::Marginals,
        DiamondMethod::Auto => DiamondMethod::Structured,
        m => m,
    };
    let value = match method {
        DiamondMethod::Marginals => marginals(&j_u, d_in, d_out, gap_tol)?,
        _ => structured(&j_u, d_in, d_out, gap_tol)?,
    };
    Ok(scale * value.max(0.0))
}

/// Orthonormal Hermitian basis of `n x n` matrices as sparse entries:
/// `E_kk`, then `(E_kl + E_lk)/√2` and `i(E_kl - E_lk)/√2` for `k < l`.
fn hermitian_basis(n: usize) -> Vec<Vec<(usize, usize, Complex64)>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(vec![(k, k, Complex64::new(1.0, 0.0))]);
    }
    for k in 0..n {
        for l in k + 1..n {
            out.push(vec![(k, l, Complex64::new(h, 0.0)), (l, k, Complex64::new(h, 0.0))]);
            out.push(vec![(k, l, Complex64::new(0.0, -h)), (l, k, Complex64::new(0.0, h))]);
        }
    }
    out
}

fn marginals(j_u: &ComplexMatrix, d_in: usize, d_out: usize, gap_tol: f64) -> Result<f64> {
    let n = d_in * d_out;
    let half = j_u.scale(0.5);
    let cost = ComplexMatrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
        (true, false) => half[(r, c - n)],
        (false, true) => half[(r - n, c)],
        _ => Complex64::new(0.0, 0.0),
    });
    let mut p = SdpProblem::with_blocks(
        vec![cost, ComplexMatrix::zeros(d_in, d_in), ComplexMatrix::zeros(d_in, d_in)],
        Sense::Maximize,
    )?;
    // P_kk = ρ_k ⊗ I_out
    for (offset, rho_block) in [(0, 1), (n, 2)] {
        for basis in hermitian_basis(n) {
            let mut entries: Vec<Entry> = basis.iter().map(|&(r, c, v)| (0, r + offset, c + offset, v)).collect();
            for &(r, c, v) in &basis {
                if r % d_out == c % d_out {
                    entries.push((rho_block, r / d_out, c / d_out, -v));
                }
            }
            p.add_sparse_constraint(entries, 0.0)?;
        }
        let trace = (0..d_in).map(|i| (rho_block, i, i, Complex64::new(1.0, 0.0))).collect();
        p.add_sparse_constraint(trace, 1.0)?;
    }
    let sol = solve_sdp(&p, gap_tol)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("diamond-norm SDP ended with status {:?}", sol.status)));
    }
    Ok(sol.primal_value)
}

pub(crate) fn herm_to_vec(y: &ComplexMatrix) -> Vec<f64> {
    let n = y.rows();
    let s = std::f64::consts::SQRT_2;
    let mut v = Vec::with_capacity(n * n);
    for k in 0..n {
        v.push(y[(k, k)].re);
    }
    for k in 0..n {
        for l in k + 1..n {
            v.push(s * y[(k, l)].re);
            v.push(s * y[(k, l)].im);
        }
    }
    v
}

pub(crate) fn vec_to_herm(v: &[f64], n: usize) -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = Complex64::new(v[k], 0.0);
    }
    let mut idx = n;
    for k in 0..n {
        for l in k + 1..n {
            let z = Complex64::new(v[idx] * h, v[idx + 1] * h);
            y[(k, l)] = z;
            y[(l, k)] = z.conj();
            idx += 2;
        }
    }
    y
}

struct StructuredForm {
    d_in: usize,
    d_out: usize,
    blocks: Vec<usize>,
    cost: Vec<ComplexMatrix>,
    rhs: Vec<f64>,
}

impl StructuredForm {
    fn lift(&self, s: &ComplexMatrix) -> ComplexMatrix {
        s.kron(&ComplexMatrix::identity(self.d_out))
    }

    fn trace_out(&self, y: &ComplexMatrix) -> ComplexMatrix {
        partial_trace(y, &[self.d_in, self.d_out], &[1]).expect("dimensions fixed at construction")
    }
}

impl ConicStructure for StructuredForm {
    fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    fn cost(&self) -> &[ComplexMatrix] {
        &self.cost
    }

    fn apply(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        let y = &(&x[0] + &x[1]) - &self.lift(&x[2]);
        let mut v = herm_to_vec(&y.hermitian_part());
        v.push(x[2].trace().re);
        v
    }

    fn adjoint(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        let n = self.blocks[0];
        let ym = vec_to_herm(&y[..n * n], n);
        let t = y[n * n];
        let rho = &ComplexMatrix::identity(self.d_in).scale(t) - &self.trace_out(&ym);
        vec![ym.clone(), ym, rho]
    }

    fn schur<'a>(&'a self, w: &'a [ComplexMatrix]) -> Result<Box<dyn SchurSolver + 'a>> {
        Ok(Box::new(StructuredSchur::new(self, w)?))
    }
}

/// Solves `H0(ΔY) + L*Ω(LΔY - Δt I) = R1`, `-tr Ω(LΔY - Δt I) = r2` with
/// `H0(Y) = W0 Y W0 + W1 Y W1`, `Ω(S) = W2 S W2` and `L = tr_out`.
struct StructuredSchur<'a> {
    form: &'a StructuredForm,
    w: &'a [ComplexMatrix],
    /// `H0^{-1}(R) = Q [(Q^dagger R Q) ./ Γ] Q^dagger`.
    q: ComplexMatrix,
    gamma: Vec<f64>,
    capacitance: faer::linalg::solvers::Llt<Complex64>,
    jacobi: Vec<f64>,
    cap_inv_identity: ComplexMatrix,
    identity_pairing: f64,
}

impl<'a> StructuredSchur<'a> {
    fn new(form: &'a StructuredForm, w: &'a [ComplexMatrix]) -> Result<Self> {
        let (d_in, d_out) = (form.d_in, form.d_out);
        let n = d_in * d_out;
        // with T = (W0 + W1)^{1/2}, T^{-1} W0 T^{-1} = V Λ V^dagger and T^{-1} W1 T^{-1} = V (I - Λ) V^dagger
        let t_inv = eigh(&(&w[0] + &w[1]).hermitian_part())?.map(|x| 1.0 / x.max(1e-300).sqrt());
        let s0 = t_inv.matmul(&w[0]).matmul(&t_inv).hermitian_part();
        let es = eigh(&s0)?;
        let q = t_inv.matmul(&es.vectors);
        let lam: Vec<f64> = es.values.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        let gamma: Vec<f64> = (0..n * n)
            .map(|k| {
                let (a, b) = (lam[k / n], lam[k % n]);
                (a * b + (1.0 - a) * (1.0 - b)).max(1e-15)
            })
            .collect();

        // K_{(ab),(cd)} = Σ_ij conj(B_ab)_ij (B_cd)_ij / Γ_ij, B_cd = R_c^dagger R_d
        let rows_of = |c: usize| ComplexMatrix::from_fn(d_out, n, |b, j| q[(c * d_out + b, j)]);
        let blocks_r: Vec<ComplexMatrix> = (0..d_in).map(rows_of).collect();
        let inv_sqrt_gamma: Vec<f64> = gamma.iter().map(|g| 1.0 / g.sqrt()).collect();
        let m = d_in * d_in;
        let mut gram = faer::Mat::<Complex64>::zeros(n * n, m);
        for c in 0..d_in {
            let rc_adj = blocks_r[c].adjoint();
            for d in 0..d_in {
                let b = rc_adj.matmul(&blocks_r[d]);
                let col = c * d_in + d;
                for (k, z) in b.data().iter().enumerate() {
                    gram[(k, col)] = z * inv_sqrt_gamma[k];
                }
            }
        }
        let k_mat = gram.adjoint() * &gram;
        drop(gram);

        let w2_inv = eigh(&w[2])?.map(|x| 1.0 / x.max(1e-300));
        let cap = faer::Mat::<Complex64>::from_fn(m, m, |r, c| {
            let (a, b) = (r / d_in, r % d_in);
            let (cc, dd) = (c / d_in, c % d_in);
            k_mat[(r, c)] + w2_inv[(a, cc)] * w2_inv[(dd, b)]
        });
        // Jacobi scaling before the Cholesky factorization
        let jacobi: Vec<f64> = (0..m).map(|k| 1.0 / cap[(k, k)].re.max(1e-300).sqrt()).collect();
        let scaled = faer::Mat::<Complex64>::from_fn(m, m, |r, c| {
            let z = 0.5 * (cap[(r, c)] + cap[(c, r)].conj());
            z * jacobi[r] * jacobi[c]
        });
        let mut shift = 0.0;
        let capacitance = loop {
            let shifted = faer::Mat::<Complex64>::from_fn(m, m, |r, c| {
                scaled[(r, c)] + if r == c { Complex64::new(shift, 0.0) } else { Complex64::new(0.0, 0.0) }
            });
            match shifted.llt(faer::Side::Lower) {
                Ok(l) => break l,
                Err(_) if shift < 1e-6 => shift = if shift == 0.0 { 1e-14 } else { shift * 10.0 },
                Err(_) => return Err(Error::Solver("structured Schur complement is not positive definite".into())),
            }
        };
        let mut this = Self {
            form,
            w,
            q,
            gamma,
            capacitance,
            jacobi,
            cap_inv_identity: ComplexMatrix::zeros(d_in, d_in),
            identity_pairing: 0.0,
        };
        this.cap_inv_identity = this.cap_solve(&ComplexMatrix::identity(d_in));
        this.identity_pairing = this.cap_inv_identity.trace().re;
        if !(this.identity_pairing > 0.0) {
            return Err(Error::Solver("structured Schur complement is singular".into()));
        }
        Ok(this)
    }

    fn h0_inv(&self, r: &ComplexMatrix) -> ComplexMatrix {
        let mut inner = self.q.adjoint().matmul(r).matmul(&self.q);
        for (z, g) in inner.data_mut().iter_mut().zip(&self.gamma) {
            *z /= *g;
        }
        self.q.matmul(&inner).matmul(&self.q.adjoint()).hermitian_part()
    }

    fn cap_solve(&self, s: &ComplexMatrix) -> ComplexMatrix {
        use faer::linalg::solvers::Solve;
        let d = self.form.d_in;
        let rhs = faer::Mat::<Complex64>::from_fn(d * d, 1, |k, _| s.data()[k] * self.jacobi[k]);
        let sol = self.capacitance.solve(&rhs);
        ComplexMatrix::from_fn(d, d, |a, b| sol[(a * d + b, 0)] * self.jacobi[a * d + b]).hermitian_part()
    }
}

impl StructuredSchur<'_> {
    fn operator(&self, y: &[f64]) -> Vec<f64> {
        let wa: Vec<ComplexMatrix> =
            self.form.adjoint(y).iter().zip(self.w).map(|(a, w)| w.matmul(a).matmul(w)).collect();
        self.form.apply(&wa)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SchurSolver for StructuredSchur<'_> {
    /// Preconditioned conjugate gradients on the exact operator.
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let bnorm = dot(rhs, rhs).sqrt();
        if bnorm == 0.0 {
            return Ok(vec![0.0; rhs.len()]);
        }
        let mut x = self.precondition(rhs)?;
        let mx = self.operator(&x);
        let mut r: Vec<f64> = rhs.iter().zip(&mx).map(|(b, m)| b - m).collect();
        let mut z = self.precondition(&r)?;
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..PCG_MAX_ITERATIONS {
            if dot(&r, &r).sqrt() <= PCG_TOL * bnorm {
                break;
            }
            let mp = self.operator(&p);
            let pmp = dot(&p, &mp);
            if !(pmp > 0.0) {
                break;
            }
            let alpha = rz / pmp;
            for k in 0..x.len() {
                x[k] += alpha * p[k];
                r[k] -= alpha * mp[k];
            }
            z = self.precondition(&r)?;
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..p.len() {
                p[k] = z[k] + beta * p[k];
            }
        }
        Ok(x)
    }
}

const PCG_TOL: f64 = 1e-13;
const PCG_MAX_ITERATIONS: usize = 100;

impl StructuredSchur<'_> {
    /// Closed-form inverse, exact when the simultaneous diagonalization is.
    fn precondition(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.form.blocks[0];
        let r1 = vec_to_herm(&rhs[..n * n], n);
        let r2 = rhs[n * n];
        let g = self.form.trace_out(&self.h0_inv(&r1));
        let qg = self.cap_solve(&g);
        let dt = (r2 + qg.trace().re) / self.identity_pairing;
        let u = &qg - &self.cap_inv_identity.scale(dt);
        let dy = self.h0_inv(&(&r1 - &self.form.lift(&u)));
        let mut out = herm_to_vec(&dy);
        out.push(dt);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("structured Schur solve produced non-finite values".into()));
        }
        Ok(out)
    }
}

fn structured(j_u: &ComplexMatrix, d_in: usize, d_out: usize, gap_tol: f64) -> Result<f64> {
    let n = d_in * d_out;
    let mut rhs = vec![0.0; n * n + 1];
    rhs[n * n] = 1.0;
    let form = StructuredForm {
        d_in,
        d_out,
        blocks: vec![n, n, d_in],
        cost: vec![j_u.scale(-1.0), j_u.clone(), ComplexMatrix::zeros(d_in, d_in)],
        rhs,
    };
    let raw = interior_point(&form, IpmOptions { gap_tol, ..IpmOptions::default() })?;
    if raw.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("diamond-norm SDP ended with status {:?}", raw.status)));
    }
    Ok(-raw.primal)
}
