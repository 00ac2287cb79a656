use super::instance::DecouplingInstance;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, pinv_quarter_root, Channel, ComplexMatrix};
use crate::random::{apply_r_pow, p_ell, twirl2_haar};
use crate::Complex64;

/// Largest `d_A` for which the `d_A² x d_A²` kernels are formed.
pub const KERNEL_MAX_DIM: usize = 16;

fn guard(d_a: usize) -> Result<()> {
    if d_a > KERNEL_MAX_DIM {
        return Err(Error::SizeGuard(format!("exact kernels need d_A <= {KERNEL_MAX_DIM}, got {d_a}")));
    }
    Ok(())
}

/// `(I ⊗ σ^{-1/4}) J (I ⊗ σ^{-1/4})`.
fn weighted_choi(choi: &ComplexMatrix, d_in: usize, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    let g = ComplexMatrix::identity(d_in).kron(&pinv_quarter_root(sigma)?);
    Ok(g.matmul(choi).matmul(&g))
}

/// `T̃*^{⊗2}(F)` for the map whose Choi matrix is `J` reweighted by `σ` on the output.
fn swap_kernel(choi: &ComplexMatrix, d_in: usize, d_out: usize, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    let tilde = weighted_choi(choi, d_in, sigma)?;
    Ok(Channel::from_choi_unchecked(tilde, d_in, d_out).adjoint_square_of_swap())
}

fn bilinear_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// `tr[(ξ ⊗ ξ)(M_{AA'} ⊗ N_{ĀĀ'})]` with `ξ = Φ − I/d²`.
pub(crate) fn xi_contraction(m: &ComplexMatrix, n: &ComplexMatrix, d: usize) -> Result<f64> {
    let df = d as f64;
    let dims = [d, d];
    let (m2, n2) = (partial_trace(m, &dims, &[1])?, partial_trace(n, &dims, &[1])?);
    let (m1, n1) = (partial_trace(m, &dims, &[0])?, partial_trace(n, &dims, &[0])?);
    let v = bilinear_sum(m, n) / (df * df) - (bilinear_sum(&m2, &n2) + bilinear_sum(&m1, &n1)) / (df * df * df)
        + m.trace() * n.trace() / (df * df * df * df);
    Ok(v.re)
}

/// `tr[(X ⊗ X)(M_{AA'} ⊗ N_{EE'})]` for `X` on `A ⊗ E`, summed entry by entry.
pub(crate) fn pair_contraction(
    x: &ComplexMatrix,
    d: usize,
    e: usize,
    m: &ComplexMatrix,
    n: &ComplexMatrix,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..d {
        for ea in 0..e {
            for b in 0..d {
                for fb in 0..e {
                    let x1 = x[(a * e + ea, b * e + fb)];
                    if x1.re == 0.0 && x1.im == 0.0 {
                        continue;
                    }
                    for ap in 0..d {
                        for eap in 0..e {
                            for bp in 0..d {
                                for fbp in 0..e {
                                    let x2 = x[(ap * e + eap, bp * e + fbp)];
                                    if x2.re == 0.0 && x2.im == 0.0 {
                                        continue;
                                    }
                                    acc += x1 * x2 * m[(b * d + bp, a * d + ap)] * n[(fb * e + fbp, ea * e + eap)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    acc
}

struct Kernels {
    m: ComplexMatrix,
    n: ComplexMatrix,
}

fn kernels(
    inst: &DecouplingInstance,
    sigma_b: Option<&ComplexMatrix>,
    sigma_r: Option<&ComplexMatrix>,
) -> Result<Kernels> {
    guard(inst.d_a())?;
    let (sb, sr) = match (sigma_b, sigma_r) {
        (Some(b), Some(r)) => (b.clone(), r.clone()),
        _ => {
            let h = inst.collision_entropies()?;
            (sigma_b.cloned().unwrap_or(h.sigma_b), sigma_r.cloned().unwrap_or(h.sigma_r))
        }
    };
    if sb.shape() != (inst.d_b(), inst.d_b()) || sr.shape() != (inst.d_r(), inst.d_r()) {
        return Err(Error::DimensionMismatch("sigma_B or sigma_R has the wrong size".into()));
    }
    let m = swap_kernel(inst.channel().choi(), inst.d_a(), inst.d_b(), &sb)?;
    let n = swap_kernel(inst.rho_ar().matrix(), inst.d_a(), inst.d_r(), &sr)?;
    Ok(Kernels { m, n })
}

/// `tr[R^ℓ(ξ ⊗ ξ) T̃*^{⊗2}(F_{BB'}) ⊗ Ẽ*^{⊗2}(F_{RR'})]`, the exact average of
/// `‖(σ_B ⊗ σ_R)^{-1/4} (T(UρU^dagger) − τ_B ⊗ ρ_R) (σ_B ⊗ σ_R)^{-1/4}‖₂²` over `D[ℓ]`.
///
/// Omitted `σ`'s default to the collision-entropy optimizers of the instance.
pub fn exact_square_bound(
    inst: &DecouplingInstance,
    ell: usize,
    sigma_b: Option<&ComplexMatrix>,
    sigma_r: Option<&ComplexMatrix>,
) -> Result<f64> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    let k = kernels(inst, sigma_b, sigma_r)?;
    let m = apply_r_pow(&k.m, inst.d_a(), 1, ell)?;
    xi_contraction(&m, &k.n, inst.d_a())
}

/// The same kernel with the Haar twirl in place of `R^ℓ`.
pub fn haar_square_bound(
    inst: &DecouplingInstance,
    sigma_b: Option<&ComplexMatrix>,
    sigma_r: Option<&ComplexMatrix>,
) -> Result<f64> {
    let k = kernels(inst, sigma_b, sigma_r)?;
    xi_contraction(&twirl2_haar(&k.m)?, &k.n, inst.d_a())
}

/// `(1 + (2d_A² − 1) p_ℓ) 2^{−H_2(A|R) − H_2(A|B)}`.
pub fn collapsed_square_bound(inst: &DecouplingInstance, ell: usize) -> Result<f64> {
    let h = inst.collision_entropies()?;
    let d = inst.d_a() as f64;
    Ok((1.0 + (2.0 * d * d - 1.0) * p_ell(inst.d_a(), ell)) * (-(h.h2_ar + h.h2_ab)).exp2())
}

/// `‖(σ_B ⊗ σ_R)^{-1/4} (T(UρU^dagger) − τ_B ⊗ ρ_R) (σ_B ⊗ σ_R)^{-1/4}‖₂²` for one unitary.
pub fn weighted_square_error(
    inst: &DecouplingInstance,
    u: &ComplexMatrix,
    sigma_b: &ComplexMatrix,
    sigma_r: &ComplexMatrix,
) -> Result<f64> {
    let w = pinv_quarter_root(sigma_b)?.kron(&pinv_quarter_root(sigma_r)?);
    let x = w.matmul(&inst.deviation(u)?).matmul(&w);
    Ok(x.frobenius_norm().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_entangled;
    use crate::random::{sample_ginibre, sample_hermitian, RngSpec};

    #[test]
    fn closed_form_matches_entrywise_contraction() {
        for d in [2, 3] {
            let m = sample_ginibre(d * d, d * d, RngSpec::new(d as u64, 0));
            let n = sample_hermitian(d * d, RngSpec::new(d as u64, 1));
            let phi = max_entangled(d).into_matrix();
            let xi = &phi - &ComplexMatrix::identity(d * d).scale(1.0 / (d * d) as f64);
            let direct = pair_contraction(&xi, d, d, &m, &n);
            let closed = xi_contraction(&m, &n, d).unwrap();
            assert!((direct.re - closed).abs() < 1e-12, "{} vs {closed}", direct.re);
        }
    }
}
