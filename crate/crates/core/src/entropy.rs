//! Conditional min- and collision entropies, H₀, H_max and the purified distance.
//! Logarithms are base two throughout.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, eigvalsh, partial_trace, pinv_power, sqrt_psd, support_basis, trace_norm, ComplexMatrix, QuantumState,
};
use crate::sdp::{solve_sdp, SdpProblem, SdpStatus, Sense};

/// Subsystems forming `A` and the conditioning system `B`; the rest is traced out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Cut {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidParameter("the A side of a cut cannot be empty".into()));
        }
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("a subsystem appears twice in the cut".into()));
        }
        Ok(Self { a, b })
    }

    /// `A` is the first `k` factors and `B` the remaining ones of an `n`-factor state.
    pub fn split(k: usize, n: usize) -> Result<Self> {
        Self::new((0..k).collect(), (k..n).collect())
    }

    /// Reduces a state to the ordered pair `(A, B)` and returns it with `d_A`, `d_B`.
    pub fn bipartite(&self, rho: &QuantumState) -> Result<(ComplexMatrix, usize, usize)> {
        let n = rho.dims().len();
        if let Some(&k) = self.a.iter().chain(&self.b).find(|&&k| k >= n) {
            return Err(Error::InvalidParameter(format!("cut refers to subsystem {k} of a {n}-factor state")));
        }
        let mut keep: Vec<usize> = self.a.iter().chain(&self.b).copied().collect();
        keep.sort_unstable();
        let reduced = rho.marginal(&keep)?;
        let perm: Vec<usize> =
            self.a.iter().chain(&self.b).map(|k| keep.iter().position(|x| x == k).expect("kept subsystem")).collect();
        let ordered = reduced.permuted(&perm)?;
        let d_a = self.a.iter().map(|&k| rho.dims()[k]).product();
        let d_b = self.b.iter().map(|&k| rho.dims()[k]).product();
        Ok((ordered.into_matrix(), d_a, d_b))
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{}|{}", join(&self.a), join(&self.b))
    }
}

/// Parses `0,1|2`: subsystem indices of `A`, a bar, then those of `B`.
impl FromStr for Cut {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once('|').ok_or_else(|| Error::Parse(format!("cut `{s}` must look like `0,1|2`")))?;
        let parse = |part: &str| -> Result<Vec<usize>> {
            part.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad subsystem index `{t}`"))))
                .collect()
        };
        Self::new(parse(a)?, parse(b)?)
    }
}

#[derive(Clone, Debug)]
pub struct EntropyResult {
    /// Entropy in bits.
    pub value: f64,
    /// The achieving `σ_B`, normalized.
    pub optimizer: Option<ComplexMatrix>,
    /// Duality gap of the certifying program, when there is one.
    pub certificate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H2Mode {
    /// `σ_B = ρ_B`.
    Plugin,
    /// Projected gradient descent on the collision term, started from the plugin point.
    Optimized,
}

impl FromStr for H2Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plugin" => Ok(H2Mode::Plugin),
            "optimized" => Ok(H2Mode::Optimized),
            _ => Err(Error::Parse(format!("unknown H2 mode `{s}`"))),
        }
    }
}

const SDP_GAP: f64 = 1e-8;

fn check_bipartite(rho: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<()> {
    if d_a == 0 || d_b == 0 || rho.shape() != (d_a * d_b, d_a * d_b) {
        return Err(Error::DimensionMismatch(format!("operator is not on a {d_a}x{d_b} system")));
    }
    if rho.trace().re <= 0.0 {
        return Err(Error::InvalidState("state has zero trace".into()));
    }
    Ok(())
}

/// `H_min(A|B) = -log min{tr σ : I ⊗ σ ⪰ ρ}`.
pub fn h_min_cond(rho: &QuantumState, cut: &Cut) -> Result<EntropyResult> {
    let (m, d_a, d_b) = cut.bipartite(rho)?;
    h_min_bipartite(&m, d_a, d_b)
}

/// Conditional min-entropy of an operator on `A ⊗ B`, through the program
/// `max <ρ, X>  s.t.  tr_A X = I_B`, whose dual variable is `σ_B`.
pub fn h_min_bipartite(rho: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<EntropyResult> {
    check_bipartite(rho, d_a, d_b)?;
    let n = d_a * d_b;
    let mut p = SdpProblem::new(rho.hermitian_part(), Sense::Maximize)?;
    let mut basis = Vec::new();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d_b {
        for k in j..d_b {
            if j == k {
                basis.push(vec![(j, j, Complex64::new(1.0, 0.0))]);
            } else {
                basis.push(vec![(j, k, Complex64::new(h, 0.0)), (k, j, Complex64::new(h, 0.0))]);
                basis.push(vec![(j, k, Complex64::new(0.0, -h)), (k, j, Complex64::new(0.0, h))]);
            }
        }
    }
    for b in &basis {
        let entries = (0..d_a).flat_map(|a| b.iter().map(move |&(r, c, v)| (0, a * d_b + r, a * d_b + c, v))).collect();
        let rhs: f64 = b.iter().filter(|e| e.0 == e.1).map(|e| e.2.re).sum();
        p.add_sparse_constraint(entries, rhs)?;
    }
    debug_assert_eq!(p.dim(), n);
    let sol = solve_sdp(&p, SDP_GAP)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("min-entropy program ended with status {:?}", sol.status)));
    }
    let mut sigma = ComplexMatrix::zeros(d_b, d_b);
    for (b, &y) in basis.iter().zip(&sol.y) {
        for &(r, c, v) in b {
            sigma[(r, c)] -= v * y;
        }
    }
    let tr = sigma.trace().re;
    let optimizer = (tr > 0.0).then(|| sigma.scale(1.0 / tr).hermitian_part());
    Ok(EntropyResult { value: -sol.primal_value.log2(), optimizer, certificate: Some(sol.gap) })
}

/// `H_2(A|B)` with the plugin or the optimized choice of `σ_B`.
pub fn h_2_cond(rho: &QuantumState, cut: &Cut, mode: H2Mode) -> Result<EntropyResult> {
    let (m, d_a, d_b) = cut.bipartite(rho)?;
    h_2_bipartite(&m, d_a, d_b, mode)
}

/// `tr[((I ⊗ σ^{-1/4}) ρ (I ⊗ σ^{-1/4}))²]` with the inverse taken on the support of `σ`.
pub fn collision_term(rho: &ComplexMatrix, d_a: usize, sigma: &ComplexMatrix) -> Result<f64> {
    let g = ComplexMatrix::identity(d_a).kron(&pinv_power(sigma, -0.5)?);
    let rg = rho.matmul(&g);
    Ok(rg.trace_of_product(&rg).re)
}

pub fn h_2_bipartite(rho: &ComplexMatrix, d_a: usize, d_b: usize, mode: H2Mode) -> Result<EntropyResult> {
    check_bipartite(rho, d_a, d_b)?;
    let rho = rho.hermitian_part();
    let rho_b = partial_trace(&rho, &[d_a, d_b], &[0])?;
    let plugin = rho_b.scale(1.0 / rho_b.trace().re);
    let plugin_value = collision_term(&rho, d_a, &plugin)?;
    if mode == H2Mode::Plugin {
        return Ok(EntropyResult { value: -plugin_value.log2(), optimizer: Some(plugin), certificate: None });
    }

    // ρ lives on A ⊗ supp(ρ_B), so σ can be restricted there
    let v = support_basis(&rho_b)?;
    let r = v.cols();
    let lift = ComplexMatrix::identity(d_a).kron(&v);
    let rho_r = lift.adjoint().matmul(&rho).matmul(&lift).hermitian_part();
    let start = v.adjoint().matmul(&plugin).matmul(&v).hermitian_part();
    let mut best = descend(&rho_r, d_a, r, start)?;
    if plugin_value - best.1 <= 1e-9 * plugin_value {
        let restart = descend(&rho_r, d_a, r, ComplexMatrix::identity(r).scale(1.0 / r as f64))?;
        if restart.1 < best.1 {
            best = restart;
        }
    }
    let (sigma, value) = if best.1 < plugin_value {
        (v.matmul(&best.0).matmul(&v.adjoint()).hermitian_part(), best.1)
    } else {
        (plugin, plugin_value)
    };
    Ok(EntropyResult { value: -value.log2(), optimizer: Some(sigma), certificate: None })
}

const EIGEN_FLOOR: f64 = 1e-12;
const MAX_DESCENT_STEPS: usize = 200;

/// Value and gradient of `f(σ) = tr[ρ G ρ G]`, `G = I ⊗ σ^{-1/2}`, for full-rank `σ`.
fn collision_and_gradient(rho: &ComplexMatrix, d_a: usize, sigma: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
    let r = sigma.rows();
    let e = eigh(sigma)?;
    let lam: Vec<f64> = e.values.iter().map(|x| x.max(EIGEN_FLOOR)).collect();
    let g = ComplexMatrix::identity(d_a).kron(&e.map(|x| x.max(EIGEN_FLOOR).powf(-0.5)));
    let rg = rho.matmul(&g);
    let value = rg.trace_of_product(&rg).re;
    let p = partial_trace(&rg.matmul(&rho), &[d_a, r], &[0])?;
    let mut inner = e.vectors.adjoint().matmul(&p).matmul(&e.vectors);
    for i in 0..r {
        for j in 0..r {
            let (a, b) = (lam[i], lam[j]);
            let dd = if (a - b).abs() <= 1e-12 * a.max(b) {
                -0.5 * a.powf(-1.5)
            } else {
                (a.powf(-0.5) - b.powf(-0.5)) / (a - b)
            };
            inner[(i, j)] *= 2.0 * dd;
        }
    }
    let grad = e.vectors.matmul(&inner).matmul(&e.vectors.adjoint()).hermitian_part();
    Ok((value, grad))
}

/// Euclidean projection onto `{σ : tr σ = 1, σ ⪰ floor·I}`.
fn project_to_states(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = eigh(&m.hermitian_part())?;
    let r = e.values.len();
    let floor = EIGEN_FLOOR;
    let mass = |tau: f64| e.values.iter().map(|&x| (x - tau).max(floor)).sum::<f64>();
    let (mut lo, mut hi) = (e.min() - 1.0, e.max());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    let projected = e.map(|x| (x - tau).max(floor));
    let tr = projected.trace().re;
    debug_assert!(r > 0);
    Ok(projected.scale(1.0 / tr))
}

fn descend(rho: &ComplexMatrix, d_a: usize, r: usize, start: ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let mut sigma = project_to_states(&start)?;
    let (mut value, mut grad) = collision_and_gradient(rho, d_a, &sigma)?;
    let mut step = 1.0 / grad.frobenius_norm().max(1e-300);
    for _ in 0..MAX_DESCENT_STEPS {
        let mut accepted = None;
        let mut t = step;
        for _ in 0..60 {
            let candidate = project_to_states(&(&sigma - &grad.scale(t)))?;
            let diff = &sigma - &candidate;
            let decrease = grad.hs_inner(&diff).re;
            let (v, g) = collision_and_gradient(rho, d_a, &candidate)?;
            if v <= value - 1e-4 * decrease {
                accepted = Some((candidate, v, g, decrease));
                break;
            }
            t *= 0.5;
        }
        let Some((candidate, v, g, decrease)) = accepted else { break };
        let improvement = value - v;
        sigma = candidate;
        value = v;
        grad = g;
        step = (t * 2.0).min(1e6);
        if improvement <= 1e-14 * value || decrease <= 1e-15 {
            break;
        }
    }
    debug_assert_eq!(sigma.rows(), r);
    Ok((sigma, value))
}

/// `log₂ rank ρ`, counting eigenvalues above `1e-10·d`.
pub fn h_0(rho: &QuantumState) -> f64 {
    let d = rho.dim() as f64;
    let rank = rho.eigenvalues().iter().filter(|&&x| x > 1e-10 * d).count();
    (rank.max(1) as f64).log2()
}

/// Rényi-1/2 entropy `2 log₂ tr √ρ`.
pub fn h_max(rho: &QuantumState) -> f64 {
    let s: f64 = rho.eigenvalues().iter().map(|x| x.max(0.0).sqrt()).sum();
    2.0 * s.log2()
}

/// `√(1 - F̄²)` with `F̄ = ‖√ρ √σ‖₁ + √((1 - tr ρ)(1 - tr σ))`.
pub fn purified_distance(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch("states act on different spaces".into()));
    }
    let overlap = trace_norm(&sqrt_psd(rho.matrix())?.matmul(&sqrt_psd(sigma.matrix())?));
    let defect = ((1.0 - rho.trace()).max(0.0) * (1.0 - sigma.trace()).max(0.0)).sqrt();
    let f = (overlap + defect).min(1.0);
    Ok((1.0 - f * f).max(0.0).sqrt())
}

/// `-log₂ ‖ρ‖_∞`.
pub fn min_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let top = *eigvalsh(rho)?.last().expect("non-empty spectrum");
    if top <= 0.0 {
        return Err(Error::InvalidState("operator has no positive eigenvalue".into()));
    }
    Ok(-top.log2())
}
