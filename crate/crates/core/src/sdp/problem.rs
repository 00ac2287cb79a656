use num_complex::Complex64;

use super::ipm::{interior_point, ConicStructure, DenseSchur, IpmOptions, IterationRecord, SchurSolver, SdpStatus};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, ComplexMatrix};

const INPUT_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// One nonzero entry `(block, row, col, value)` of a constraint matrix.
pub type Entry = (usize, usize, usize, Complex64);

#[derive(Clone, Debug)]
struct Constraint {
    entries: Vec<Entry>,
    rhs: f64,
}

/// `optimize <C, X>  s.t.  tr(A_i X) = b_i, X ⪰ 0` over block-diagonal Hermitian `X`.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    cost: Vec<ComplexMatrix>,
    constraints: Vec<Constraint>,
    sense: Sense,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub primal_value: f64,
    pub dual_value: f64,
    /// Primal variable, one matrix per block.
    pub primal: Vec<ComplexMatrix>,
    /// Multipliers of the equality constraints, in the minimization convention.
    pub y: Vec<f64>,
    pub slack: Vec<ComplexMatrix>,
    pub status: SdpStatus,
    pub gap: f64,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub history: Vec<IterationRecord>,
}

impl SdpSolution {
    /// The primal variable assembled into one block-diagonal matrix.
    pub fn primal_matrix(&self) -> ComplexMatrix {
        block_diag(&self.primal)
    }
}

fn block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                out[(off + i, off + j)] = b[(i, j)];
            }
        }
        off += b.rows();
    }
    out
}

fn check_hermitian(m: &ComplexMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{what} must be square")));
    }
    let dev = m.hermitian_deviation();
    if dev > INPUT_HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

impl SdpProblem {
    /// A single-block problem with cost `c`.
    pub fn new(cost: ComplexMatrix, sense: Sense) -> Result<Self> {
        Self::with_blocks(vec![cost], sense)
    }

    /// A block-diagonal problem; block sizes are read off the cost blocks.
    pub fn with_blocks(cost: Vec<ComplexMatrix>, sense: Sense) -> Result<Self> {
        if cost.is_empty() {
            return Err(Error::InvalidParameter("an SDP needs at least one block".into()));
        }
        for c in &cost {
            check_hermitian(c, "cost block")?;
        }
        let blocks = cost.iter().map(|c| c.rows()).collect();
        let cost = cost.iter().map(|c| c.hermitian_part()).collect();
        Ok(Self { blocks, cost, constraints: Vec::new(), sense })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Adds `tr(A X) = b` for a dense Hermitian `A` on the full space; `A` must vanish off the blocks.
    pub fn add_constraint(&mut self, a: &ComplexMatrix, b: f64) -> Result<()> {
        let n = self.dim();
        if a.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("constraint must be {n}x{n}")));
        }
        check_hermitian(a, "constraint")?;
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut off = 0;
        for &s in &self.blocks {
            offsets.push(off);
            off += s;
        }
        let block_of = |i: usize| offsets.iter().rposition(|&o| o <= i).expect("index inside the space");
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = a[(i, j)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (bi, bj) = (block_of(i), block_of(j));
                if bi != bj {
                    return Err(Error::DimensionMismatch("constraint couples different blocks".into()));
                }
                entries.push((bi, i - offsets[bi], j - offsets[bi], v));
            }
        }
        self.add_sparse_constraint(entries, b)
    }

    /// Adds `Σ_k tr(A_k X_k) = b` from per-block matrices.
    pub fn add_block_constraint(&mut self, parts: &[(usize, ComplexMatrix)], b: f64) -> Result<()> {
        let mut entries = Vec::new();
        for (blk, a) in parts {
            let size = *self.blocks.get(*blk).ok_or_else(|| Error::InvalidParameter(format!("no block {blk}")))?;
            if a.shape() != (size, size) {
                return Err(Error::DimensionMismatch(format!("block {blk} has size {size}")));
            }
            check_hermitian(a, "constraint block")?;
            for i in 0..size {
                for j in 0..size {
                    if a[(i, j)] != Complex64::new(0.0, 0.0) {
                        entries.push((*blk, i, j, a[(i, j)]));
                    }
                }
            }
        }
        self.add_sparse_constraint(entries, b)
    }

    /// Adds a constraint from its nonzero entries. The entries must describe a Hermitian matrix.
    pub fn add_sparse_constraint(&mut self, entries: Vec<Entry>, b: f64) -> Result<()> {
        for &(blk, r, c, v) in &entries {
            let size = *self.blocks.get(blk).ok_or_else(|| Error::InvalidParameter(format!("no block {blk}")))?;
            if r >= size || c >= size || !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidParameter(format!("bad constraint entry ({blk}, {r}, {c})")));
            }
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter("constraint right-hand side is not finite".into()));
        }
        self.constraints.push(Constraint { entries, rhs: b });
        Ok(())
    }
}

/// Minimization form handed to the interior-point driver.
struct Standard<'a> {
    problem: &'a SdpProblem,
    cost: Vec<ComplexMatrix>,
    rhs: Vec<f64>,
}

impl ConicStructure for Standard<'_> {
    fn blocks(&self) -> &[usize] {
        &self.problem.blocks
    }

    fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    fn cost(&self) -> &[ComplexMatrix] {
        &self.cost
    }

    fn apply(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        self.problem
            .constraints
            .iter()
            .map(|c| c.entries.iter().map(|&(b, r, col, v)| (v.conj() * x[b][(r, col)]).re).sum())
            .collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        let mut out: Vec<ComplexMatrix> = self.problem.blocks.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect();
        for (c, &yi) in self.problem.constraints.iter().zip(y) {
            for &(b, r, col, v) in &c.entries {
                out[b][(r, col)] += v * yi;
            }
        }
        out
    }

    fn schur<'a>(&'a self, w: &'a [ComplexMatrix]) -> Result<Box<dyn SchurSolver + 'a>> {
        let cons = &self.problem.constraints;
        let m = cons.len();
        let mut mat = faer::Mat::<f64>::zeros(m, m);
        for (j, cj) in cons.iter().enumerate() {
            let nnz = cj.entries.len();
            let dense_cut = cj.entries.first().map(|e| self.problem.blocks[e.0]).unwrap_or(0);
            if nnz > dense_cut {
                // V_j = W A_j W, block by block
                let mut v: Vec<Option<ComplexMatrix>> = vec![None; w.len()];
                let mut a: Vec<Option<ComplexMatrix>> = vec![None; w.len()];
                for &(b, r, c, val) in &cj.entries {
                    a[b].get_or_insert_with(|| ComplexMatrix::zeros(w[b].rows(), w[b].rows()))[(r, c)] += val;
                }
                for (b, ab) in a.iter().enumerate() {
                    if let Some(ab) = ab {
                        v[b] = Some(w[b].matmul(ab).matmul(&w[b]));
                    }
                }
                for (i, ci) in cons.iter().enumerate() {
                    let mut s = 0.0;
                    for &(b, r, c, val) in &ci.entries {
                        if let Some(vb) = &v[b] {
                            s += (val.conj() * vb[(r, c)]).re;
                        }
                    }
                    mat[(i, j)] = s;
                }
            } else {
                for (i, ci) in cons.iter().enumerate() {
                    let mut s = 0.0;
                    for &(bi, ri, cci, vi) in &ci.entries {
                        for &(bj, rj, ccj, vj) in &cj.entries {
                            if bi == bj {
                                let wb = &w[bi];
                                s += (vi.conj() * vj * wb[(ri, rj)] * wb[(ccj, cci)]).re;
                            }
                        }
                    }
                    mat[(i, j)] = s;
                }
            }
        }
        Ok(Box::new(DenseSchur::new(mat)?))
    }

    fn initial_scales(&self) -> (f64, f64) {
        let n = self.problem.dim() as f64;
        let cnorm = super::ipm::norm(&self.cost);
        let mut p = 10f64.max(n.sqrt());
        let mut d = p.max(cnorm);
        for c in &self.problem.constraints {
            let anorm = c.entries.iter().map(|e| e.3.norm_sqr()).sum::<f64>().sqrt();
            p = p.max(n.sqrt() * (1.0 + c.rhs.abs()) / (1.0 + anorm));
            d = d.max(anorm);
        }
        (p, d)
    }
}

/// Solves an SDP with the default iteration cap.
pub fn solve_sdp(p: &SdpProblem, gap_tol: f64) -> Result<SdpSolution> {
    solve_sdp_with(p, IpmOptions { gap_tol, ..IpmOptions::default() })
}

pub fn solve_sdp_with(p: &SdpProblem, opts: IpmOptions) -> Result<SdpSolution> {
    if !(opts.gap_tol > 0.0) {
        return Err(Error::InvalidParameter("gap_tol must be positive".into()));
    }
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let std = Standard {
        problem: p,
        cost: p.cost.iter().map(|c| c.scale(sign)).collect(),
        rhs: p.constraints.iter().map(|c| c.rhs).collect(),
    };
    let raw = interior_point(&std, opts)?;
    let primal_value = sign * raw.primal;
    let dual_value = sign * raw.dual;
    let min_eig =
        raw.x.iter().map(min_eigenvalue).collect::<Result<Vec<_>>>()?.into_iter().fold(f64::INFINITY, f64::min);
    if raw.status == SdpStatus::Optimal && min_eig < -1e-8 {
        return Err(Error::Solver(format!("primal iterate left the cone (eigenvalue {min_eig:e})")));
    }
    Ok(SdpSolution {
        primal_value,
        dual_value,
        primal: raw.x,
        y: raw.y,
        slack: raw.z,
        status: raw.status,
        gap: (primal_value - dual_value).abs(),
        iterations: raw.iterations,
        primal_infeasibility: raw.primal_infeasibility,
        dual_infeasibility: raw.dual_infeasibility,
        history: raw.history,
    })
}
