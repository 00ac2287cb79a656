use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::entropy::{h_2_bipartite, h_min_bipartite, H2Mode};
use crate::error::{Error, Result};
use crate::linalg::{eigh, partial_trace, qubit_count, trace_norm, Channel, ComplexMatrix, NormClass, QuantumState};
use crate::random::diag::sample_diag_with;
use crate::random::{sample_d_ell, sample_haar, sample_rqc, Basis, DiagCircuit, RngSpec};
use crate::Complex64;

/// Distribution of the encoding unitary on `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ensemble {
    Haar,
    /// `D[ℓ]`.
    DEll(usize),
    /// Random circuit of `L` Haar two-qubit gates.
    Rqc(usize),
    /// A single `D^X D^Z`.
    DiagZxOnce,
}

impl Ensemble {
    pub fn ell(&self) -> Option<usize> {
        match self {
            Ensemble::DEll(ell) => Some(*ell),
            _ => None,
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        match *self {
            Ensemble::Haar => Ok(()),
            Ensemble::DEll(0) => Err(Error::InvalidParameter("d_ell needs ell >= 1".into())),
            Ensemble::Rqc(len) => {
                let n = qubit_count(d)?;
                if len > 0 && n < 2 {
                    return Err(Error::InvalidParameter("rqc needs at least two qubits".into()));
                }
                Ok(())
            }
            Ensemble::DEll(_) | Ensemble::DiagZxOnce => qubit_count(d).map(|_| ()),
        }
    }

    /// The sampled diagonal circuit when the ensemble has that structure.
    pub fn sample_circuit(&self, d: usize, rng: RngSpec) -> Result<Option<DiagCircuit>> {
        match *self {
            Ensemble::DEll(ell) => Ok(Some(sample_d_ell(qubit_count(d)?, ell, rng)?)),
            _ => Ok(None),
        }
    }

    /// One draw of the unitary on a `d`-dimensional system.
    pub fn sample(&self, d: usize, rng: RngSpec) -> Result<ComplexMatrix> {
        self.check(d)?;
        match *self {
            Ensemble::Haar => sample_haar(d, rng),
            Ensemble::DEll(ell) => Ok(sample_d_ell(qubit_count(d)?, ell, rng)?.matrix()),
            Ensemble::Rqc(len) => sample_rqc(qubit_count(d)?, len, rng),
            Ensemble::DiagZxOnce => {
                let mut r = rng.rng();
                let z = sample_diag_with(Basis::Z, d, &mut r);
                let x = sample_diag_with(Basis::X, d, &mut r);
                let h = crate::linalg::hadamard_all(qubit_count(d)?);
                let u = z.left_apply(&ComplexMatrix::identity(d), &h);
                Ok(x.left_apply(&u, &h))
            }
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ensemble::Haar => write!(f, "haar"),
            Ensemble::DEll(ell) => write!(f, "d_ell({ell})"),
            Ensemble::Rqc(len) => write!(f, "rqc({len})"),
            Ensemble::DiagZxOnce => write!(f, "diag_zx_once"),
        }
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    /// Accepts `haar`, `diag_zx_once`, `d_ell(2)` or `d_ell:2`, `rqc(10)` or `rqc:10`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "haar" => return Ok(Ensemble::Haar),
            "diag_zx_once" => return Ok(Ensemble::DiagZxOnce),
            _ => {}
        }
        let (name, arg) = if let Some(open) = s.find('(') {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parenthesis in ensemble `{s}`")))?;
            (&s[..open], inner)
        } else if let Some((name, arg)) = s.split_once(':') {
            (name, arg)
        } else {
            return Err(Error::Parse(format!("unknown ensemble `{s}`")));
        };
        let n: usize = arg
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("ensemble parameter `{arg}` is not a non-negative integer")))?;
        match name.trim() {
            "d_ell" => Ok(Ensemble::DEll(n)),
            "rqc" => Ok(Ensemble::Rqc(n)),
            other => Err(Error::Parse(format!("unknown ensemble `{other}`"))),
        }
    }
}

/// Conditional entropies and the collision-entropy optimizers of an instance.
#[derive(Clone, Debug)]
pub struct InstanceEntropies {
    /// `H_2(A|R)_ρ`.
    pub h2_ar: f64,
    /// `H_2(A|B)_τ` with `τ_AB = J(T)`.
    pub h2_ab: f64,
    pub sigma_r: ComplexMatrix,
    pub sigma_b: ComplexMatrix,
}

#[derive(Clone, Copy, Debug)]
pub struct MinEntropies {
    pub hmin_ar: f64,
    pub hmin_ab: f64,
}

/// A state `ρ_AR`, a channel `T: A → B` and an ensemble of unitaries on `A`.
#[derive(Clone, Debug)]
pub struct DecouplingInstance {
    rho_ar: QuantumState,
    channel: Channel,
    pub ensemble: Ensemble,
    pub samples: usize,
    pub rng: RngSpec,
    d_a: usize,
    d_r: usize,
    factor: ComplexMatrix,
    tau_b: ComplexMatrix,
    rho_r: ComplexMatrix,
    target: ComplexMatrix,
    collision: OnceLock<std::result::Result<InstanceEntropies, Error>>,
    min_entropies: OnceLock<std::result::Result<MinEntropies, Error>>,
}

impl DecouplingInstance {
    /// The leading subsystems of `rho_ar` whose dimensions multiply to the channel
    /// input form `A`; the rest form `R`.
    pub fn new(
        rho_ar: QuantumState,
        channel: Channel,
        ensemble: Ensemble,
        samples: usize,
        rng: RngSpec,
    ) -> Result<Self> {
        if rho_ar.norm_class() != NormClass::Normalized {
            return Err(Error::InvalidState("rho_AR must be normalized".into()));
        }
        let d_a = channel.d_in();
        let mut acc = 1;
        let mut splits = acc == d_a;
        for &d in rho_ar.dims() {
            acc *= d;
            splits |= acc == d_a;
        }
        if !splits {
            return Err(Error::DimensionMismatch(format!(
                "no leading group of subsystems in {:?} has the channel input dimension {d_a}",
                rho_ar.dims()
            )));
        }
        let d_r = rho_ar.dim() / d_a;
        ensemble.check(d_a)?;
        let rho = rho_ar.matrix();
        let e = eigh(rho)?;
        let tol = 1e-14 * e.max().max(1.0);
        let keep: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > tol).collect();
        let factor =
            ComplexMatrix::from_fn(rho.rows(), keep.len(), |i, j| e.vectors[(i, keep[j])] * e.values[keep[j]].sqrt());
        let tau_b = channel.output_marginal();
        let rho_r = partial_trace(rho, &[d_a, d_r], &[0])?;
        let target = tau_b.kron(&rho_r);
        Ok(Self {
            rho_ar,
            channel,
            ensemble,
            samples,
            rng,
            d_a,
            d_r,
            factor,
            tau_b,
            rho_r,
            target,
            collision: OnceLock::new(),
            min_entropies: OnceLock::new(),
        })
    }

    /// The same state and channel under another ensemble, keeping cached entropies.
    pub fn with_ensemble(&self, ensemble: Ensemble) -> Result<Self> {
        ensemble.check(self.d_a)?;
        let mut out = self.clone();
        out.ensemble = ensemble;
        Ok(out)
    }

    pub fn with_samples(mut self, samples: usize, rng: RngSpec) -> Self {
        self.samples = samples;
        self.rng = rng;
        self
    }

    pub fn rho_ar(&self) -> &QuantumState {
        &self.rho_ar
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_r(&self) -> usize {
        self.d_r
    }

    pub fn d_b(&self) -> usize {
        self.channel.d_out()
    }

    pub fn tau_b(&self) -> &ComplexMatrix {
        &self.tau_b
    }

    pub fn rho_r(&self) -> &ComplexMatrix {
        &self.rho_r
    }

    /// `ρ_A`.
    pub fn rho_a(&self) -> ComplexMatrix {
        partial_trace(self.rho_ar.matrix(), &[self.d_a, self.d_r], &[1]).expect("dimensions were checked")
    }

    /// `H_2(A|R)_ρ`, `H_2(A|B)_τ` and their optimizers, computed once.
    pub fn collision_entropies(&self) -> Result<InstanceEntropies> {
        self.collision
            .get_or_init(|| {
                let ar = h_2_bipartite(self.rho_ar.matrix(), self.d_a, self.d_r, H2Mode::Optimized)?;
                let ab = h_2_bipartite(self.channel.choi(), self.d_a, self.d_b(), H2Mode::Optimized)?;
                Ok(InstanceEntropies {
                    h2_ar: ar.value,
                    h2_ab: ab.value,
                    sigma_r: ar.optimizer.expect("collision entropy returns its optimizer"),
                    sigma_b: ab.optimizer.expect("collision entropy returns its optimizer"),
                })
            })
            .clone()
    }

    /// `H_min(A|R)_ρ` and `H_min(A|B)_τ`, computed once.
    pub fn min_entropies(&self) -> Result<MinEntropies> {
        self.min_entropies
            .get_or_init(|| {
                Ok(MinEntropies {
                    hmin_ar: h_min_bipartite(self.rho_ar.matrix(), self.d_a, self.d_r)?.value,
                    hmin_ab: h_min_bipartite(self.channel.choi(), self.d_a, self.d_b())?.value,
                })
            })
            .clone()
    }

    /// `T(U ρ_AR U^dagger)` on `B ⊗ R`.
    pub fn output(&self, u: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (d_a, d_r) = (self.d_a, self.d_r);
        if u.shape() != (d_a, d_a) {
            return Err(Error::DimensionMismatch(format!(
                "unitary of size {}x{} does not act on A of dimension {d_a}",
                u.rows(),
                u.cols()
            )));
        }
        let f = &self.factor;
        let rank = f.cols();
        let mut g = ComplexMatrix::zeros(d_a * d_r, rank);
        for a in 0..d_a {
            for ap in 0..d_a {
                let w = u[(a, ap)];
                if w.re == 0.0 && w.im == 0.0 {
                    continue;
                }
                for r in 0..d_r {
                    for k in 0..rank {
                        g[(a * d_r + r, k)] += w * f[(ap * d_r + r, k)];
                    }
                }
            }
        }
        let x = g.matmul(&g.adjoint());
        self.channel.apply_to_first(&x, d_r)
    }

    /// `T(U ρ_AR U^dagger) − τ_B ⊗ ρ_R`.
    pub fn deviation(&self, u: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(&self.output(u)? - &self.target)
    }

    /// Stream used by Monte-Carlo sample `i`.
    pub fn sample_rng(&self, i: usize) -> RngSpec {
        RngSpec::new(self.rng.master_seed, (self.rng.stream_index << 32) ^ i as u64)
    }

    /// The `i`-th Monte-Carlo draw from the instance's ensemble.
    pub fn sample_unitary(&self, i: usize) -> Result<ComplexMatrix> {
        self.ensemble.sample(self.d_a, self.sample_rng(i))
    }
}

/// `‖T(U ρ_AR U^dagger) − τ_B ⊗ ρ_R‖₁`.
pub fn error_of_unitary(inst: &DecouplingInstance, u: &ComplexMatrix) -> Result<f64> {
    let dev = inst.deviation(u)?.hermitian_part();
    Ok(trace_norm(&dev).clamp(0.0, 2.0))
}

/// `|ψ⟩` on `A ⊗ R` built from a Ginibre vector, returned as a state with dims `[d_a, d_r]`.
pub fn random_pure_instance_state(d_a: usize, d_r: usize, rng: RngSpec) -> Result<QuantumState> {
    let psi = crate::random::sample_haar_vector(d_a * d_r, rng)?;
    QuantumState::pure(&psi, vec![d_a, d_r])
}

/// `Φ_{A₁R} ⊗ |0⟩⟨0|_{A₂}` with subsystem order `A₁, A₂, R`.
pub fn prop1_state(d_a1: usize, d_a2: usize) -> Result<QuantumState> {
    let d = d_a1 * d_a2 * d_a1;
    let amp = Complex64::new(1.0 / (d_a1 as f64).sqrt(), 0.0);
    let mut psi = vec![Complex64::new(0.0, 0.0); d];
    for i in 0..d_a1 {
        psi[(i * d_a2) * d_a1 + i] = amp;
    }
    QuantumState::pure(&psi, vec![d_a1, d_a2, d_a1])
}
