//! Infeasible-start primal-dual interior point method with Nesterov-Todd
//! scaling and Mehrotra predictor-corrector steps on complex Hermitian blocks.
//!
//! Primal: `min <C, X>  s.t.  A(X) = b, X ⪰ 0`.
//! Dual:   `max b'y     s.t.  Z = C - A*(y) ⪰ 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix};

pub(crate) type Blocks = Vec<ComplexMatrix>;

/// Linear structure of a conic problem in the standard form above.
pub(crate) trait ConicStructure {
    fn blocks(&self) -> &[usize];
    fn rhs(&self) -> &[f64];
    fn cost(&self) -> &[ComplexMatrix];
    /// `A(X)`.
    fn apply(&self, x: &[ComplexMatrix]) -> Vec<f64>;
    /// `A*(y) = Σ y_i A_i`.
    fn adjoint(&self, y: &[f64]) -> Blocks;
    /// Factorizes the Schur operator `y ↦ A(W A*(y) W)`.
    fn schur<'a>(&'a self, w: &'a [ComplexMatrix]) -> Result<Box<dyn SchurSolver + 'a>>;
    /// Starting multiples of the identity for `X` and `Z`.
    fn initial_scales(&self) -> (f64, f64) {
        let n: usize = self.blocks().iter().sum();
        let cnorm = norm(self.cost());
        let p = 10f64.max((n as f64).sqrt());
        (p, p.max(cnorm))
    }
}

pub(crate) trait SchurSolver {
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

/// Snapshot of one interior-point iterate.
#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `<X, Z>`, non-negative because both iterates stay positive definite.
    pub complementarity: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct RawSolution {
    pub x: Blocks,
    pub y: Vec<f64>,
    pub z: Blocks,
    pub primal: f64,
    pub dual: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct IpmOptions {
    pub gap_tol: f64,
    pub max_iterations: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-7, max_iterations: 500 }
    }
}

pub(crate) fn inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.hs_inner(y).re).sum()
}

pub(crate) fn norm(a: &[ComplexMatrix]) -> f64 {
    a.iter().map(|x| x.frobenius_norm().powi(2)).sum::<f64>().sqrt()
}

fn axpy(a: &[ComplexMatrix], s: f64, b: &[ComplexMatrix]) -> Blocks {
    a.iter().zip(b).map(|(x, y)| x + &y.scale(s)).collect()
}

fn sub(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> Blocks {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Nesterov-Todd scaling of one block: `G^dagger Z G = G^{-1} X G^{-dagger} = Λ`.
struct NtBlock {
    g: ComplexMatrix,
    g_inv: ComplexMatrix,
    lambda: Vec<f64>,
    w: ComplexMatrix,
}

fn scale_columns(m: &ComplexMatrix, s: &[f64]) -> ComplexMatrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        for (j, &f) in s.iter().enumerate() {
            out[(i, j)] *= f;
        }
    }
    out
}

fn scale_rows(m: &ComplexMatrix, s: &[f64]) -> ComplexMatrix {
    let mut out = m.clone();
    for (i, &f) in s.iter().enumerate() {
        for j in 0..m.cols() {
            out[(i, j)] *= f;
        }
    }
    out
}

fn nt_block(x: &ComplexMatrix, z: &ComplexMatrix) -> Result<NtBlock> {
    let ex = eigh(x)?;
    let sx: Vec<f64> = ex.values.iter().map(|&v| v.max(1e-300).sqrt()).collect();
    let x_half = scale_columns(&ex.vectors, &sx).matmul(&ex.vectors.adjoint());
    let s = x_half.matmul(z).matmul(&x_half).hermitian_part();
    let es = eigh(&s)?;
    let lambda: Vec<f64> = es.values.iter().map(|&v| v.max(1e-300).sqrt()).collect();
    let inv_sqrt: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let g = scale_columns(&x_half.matmul(&es.vectors), &inv_sqrt);
    let inv_l: Vec<f64> = lambda.iter().map(|l| 1.0 / l).collect();
    let g_inv = scale_rows(&g.adjoint().matmul(z), &inv_l);
    let w = g.matmul(&g.adjoint()).hermitian_part();
    Ok(NtBlock { g, g_inv, lambda, w })
}

/// Largest `α ≤ 1/0` with `Λ + α D ⪰ 0`, from the spectrum of `Λ^{-1/2} D Λ^{-1/2}`.
fn max_step(lambda: &[f64], d: &ComplexMatrix) -> Result<f64> {
    let s: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let m = scale_rows(&scale_columns(d, &s), &s).hermitian_part();
    let min = eigh(&m)?.min();
    Ok(if min < 0.0 { -1.0 / min } else { f64::INFINITY })
}

struct Direction {
    dx: Blocks,
    dy: Vec<f64>,
    dz: Blocks,
    dx_scaled: Blocks,
    dz_scaled: Blocks,
    alpha_p: f64,
    alpha_d: f64,
}

#[allow(clippy::too_many_arguments)]
fn direction(
    prob: &dyn ConicStructure,
    schur: &dyn SchurSolver,
    nt: &[NtBlock],
    rp: &[f64],
    rd: &[ComplexMatrix],
    rhs_c: &[ComplexMatrix],
) -> Result<Direction> {
    let rc: Blocks = nt
        .iter()
        .zip(rhs_c)
        .map(|(b, r)| {
            let mut s = r.clone();
            for i in 0..s.rows() {
                for j in 0..s.cols() {
                    s[(i, j)] *= 2.0 / (b.lambda[i] + b.lambda[j]);
                }
            }
            b.g.matmul(&s).matmul(&b.g.adjoint())
        })
        .collect();
    let wrw: Blocks = nt.iter().zip(rd).map(|(b, r)| b.w.matmul(r).matmul(&b.w)).collect();
    let a_rc = prob.apply(&rc);
    let a_wrw = prob.apply(&wrw);
    let rhs: Vec<f64> = (0..rp.len()).map(|i| rp[i] - a_rc[i] + a_wrw[i]).collect();
    let dy = schur.solve(&rhs)?;
    let ady = prob.adjoint(&dy);
    let dz = sub(rd, &ady);
    let dx: Blocks = nt
        .iter()
        .zip(rc.iter().zip(&dz))
        .map(|(b, (r, z))| (r - &b.w.matmul(z).matmul(&b.w)).hermitian_part())
        .collect();
    let dx_scaled: Blocks = nt.iter().zip(&dx).map(|(b, d)| b.g_inv.matmul(d).matmul(&b.g_inv.adjoint())).collect();
    let dz_scaled: Blocks = nt.iter().zip(&dz).map(|(b, d)| b.g.adjoint().matmul(d).matmul(&b.g)).collect();
    let mut alpha_p = f64::INFINITY;
    let mut alpha_d = f64::INFINITY;
    for (b, (dxs, dzs)) in nt.iter().zip(dx_scaled.iter().zip(&dz_scaled)) {
        alpha_p = alpha_p.min(max_step(&b.lambda, dxs)?);
        alpha_d = alpha_d.min(max_step(&b.lambda, dzs)?);
    }
    Ok(Direction { dx, dy, dz, dx_scaled, dz_scaled, alpha_p, alpha_d })
}

type Step = (Direction, f64, f64);

fn newton_step(
    prob: &dyn ConicStructure,
    x: &[ComplexMatrix],
    z: &[ComplexMatrix],
    rp: &[f64],
    rd: &[ComplexMatrix],
    mu: f64,
    n_total: usize,
) -> Result<Step> {
    let nt: Vec<NtBlock> = x.iter().zip(z).map(|(xb, zb)| nt_block(xb, zb)).collect::<Result<_>>()?;
    let w: Blocks = nt.iter().map(|b| b.w.clone()).collect();
    let schur = prob.schur(&w)?;
    // predictor: target Λ² → 0
    let r_aff: Blocks = nt
        .iter()
        .map(|b| ComplexMatrix::from_real_diag(&b.lambda.iter().map(|l| -l * l).collect::<Vec<_>>()))
        .collect();
    let aff = direction(prob, schur.as_ref(), &nt, rp, rd, &r_aff)?;
    let ap = aff.alpha_p.min(1.0);
    let ad = aff.alpha_d.min(1.0);
    let mu_aff = inner(&axpy(x, ap, &aff.dx), &axpy(z, ad, &aff.dz)) / n_total as f64;
    let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

    // corrector with centering
    let r_cor: Blocks = nt
        .iter()
        .zip(aff.dx_scaled.iter().zip(&aff.dz_scaled))
        .map(|(b, (dxs, dzs))| {
            let mut r = dxs.matmul(dzs).hermitian_part().scale(-1.0);
            for (i, l) in b.lambda.iter().enumerate() {
                r[(i, i)] += Complex64::new(sigma * mu - l * l, 0.0);
            }
            r
        })
        .collect();
    let dir = direction(prob, schur.as_ref(), &nt, rp, rd, &r_cor)?;
    let gamma = 0.9 + 0.09 * ap.min(ad);
    let step_p = (gamma * dir.alpha_p).min(1.0);
    let step_d = (gamma * dir.alpha_d).min(1.0);
    if dir.dy.iter().any(|v| !v.is_finite())
        || dir.dx.iter().chain(&dir.dz).any(|m| m.data().iter().any(|v| !v.is_finite()))
    {
        return Err(Error::Solver("Newton direction is not finite".into()));
    }
    Ok((dir, step_p, step_d))
}

pub(crate) fn interior_point(prob: &dyn ConicStructure, opts: IpmOptions) -> Result<RawSolution> {
    let blocks = prob.blocks().to_vec();
    let n_total: usize = blocks.iter().sum();
    let b = prob.rhs().to_vec();
    let c = prob.cost().to_vec();
    let (xi_p, xi_d) = prob.initial_scales();
    let mut x: Blocks = blocks.iter().map(|&n| ComplexMatrix::identity(n).scale(xi_p)).collect();
    let mut z: Blocks = blocks.iter().map(|&n| ComplexMatrix::identity(n).scale(xi_d)).collect();
    let mut y = vec![0.0; b.len()];
    let bnorm = vnorm(&b);
    let cnorm = norm(&c);
    let mut history = Vec::new();
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut stalled = 0;
    let (mut pinf, mut dinf);

    loop {
        let ax = prob.apply(&x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let rd = sub(&sub(&c, &prob.adjoint(&y)), &z);
        let pobj = inner(&c, &x);
        let dobj: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
        let comp = inner(&x, &z);
        pinf = vnorm(&rp) / (1.0 + bnorm);
        dinf = norm(&rd) / (1.0 + cnorm);
        history.push(IterationRecord {
            primal_objective: pobj,
            dual_objective: dobj,
            complementarity: comp,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
        });
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if relgap <= opts.gap_tol && pinf <= opts.gap_tol && dinf <= opts.gap_tol {
            status = SdpStatus::Optimal;
            break;
        }
        let near_optimal = relgap <= 10.0 * opts.gap_tol && pinf <= 10.0 * opts.gap_tol && dinf <= 10.0 * opts.gap_tol;
        if norm(&x) > 1e12 || vnorm(&y) > 1e12 || norm(&z) > 1e14 {
            status = SdpStatus::Infeasible;
            break;
        }
        if iterations >= opts.max_iterations || stalled >= 5 {
            if near_optimal {
                status = SdpStatus::Optimal;
            }
            break;
        }
        iterations += 1;

        let mu = comp / n_total as f64;
        let step = newton_step(prob, &x, &z, &rp, &rd, mu, n_total);
        let (dir, step_p, step_d) = match step {
            Ok(s) => s,
            Err(_) if near_optimal => {
                status = SdpStatus::Optimal;
                break;
            }
            Err(e) => return Err(e),
        };

        if step_p < 1e-10 && step_d < 1e-10 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        x = axpy(&x, step_p, &dir.dx).into_iter().map(|m| m.hermitian_part()).collect();
        z = axpy(&z, step_d, &dir.dz).into_iter().map(|m| m.hermitian_part()).collect();
        for (yi, dyi) in y.iter_mut().zip(&dir.dy) {
            *yi += step_d * dyi;
        }
    }

    let primal = inner(&c, &x);
    let dual: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
    if !primal.is_finite() || !dual.is_finite() {
        return Err(Error::Solver("iterates became non-finite".into()));
    }
    Ok(RawSolution {
        x,
        y,
        z,
        primal,
        dual,
        status,
        iterations,
        history,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
    })
}

/// Dense real Cholesky solve with an LU fallback for nearly singular systems.
pub(crate) struct DenseSchur {
    factor: DenseFactor,
}

enum DenseFactor {
    Llt(faer::linalg::solvers::Llt<f64>),
    Lu(faer::linalg::solvers::PartialPivLu<f64>),
}

impl DenseSchur {
    pub(crate) fn new(m: faer::Mat<f64>) -> Result<Self> {
        use faer::Side;
        let n = m.nrows();
        let sym = faer::Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        let scale = (0..n).map(|i| sym[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut shift = 0.0;
        loop {
            let shifted = faer::Mat::<f64>::from_fn(n, n, |i, j| sym[(i, j)] + if i == j { shift } else { 0.0 });
            match shifted.llt(Side::Lower) {
                Ok(l) => return Ok(Self { factor: DenseFactor::Llt(l) }),
                Err(_) if shift < 1e-8 * scale => {
                    shift = if shift == 0.0 { 1e-15 * scale } else { shift * 100.0 };
                }
                Err(_) => return Ok(Self { factor: DenseFactor::Lu(sym.partial_piv_lu()) }),
            }
        }
    }
}

impl SchurSolver for DenseSchur {
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        use faer::linalg::solvers::Solve;
        let b = faer::Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let sol = match &self.factor {
            DenseFactor::Llt(l) => l.solve(&b),
            DenseFactor::Lu(l) => l.solve(&b),
        };
        let out: Vec<f64> = (0..rhs.len()).map(|i| sol[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("Schur system is singular".into()));
        }
        Ok(out)
    }
}
