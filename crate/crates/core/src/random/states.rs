use super::haar::{ginibre_vector, haar_vector, sample_haar_with};
use super::rng::RngSpec;
use crate::error::{Error, Result};
use crate::linalg::{j_map, Channel, ChannelDescription, ComplexMatrix, QuantumState};

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn sample_ginibre(rows: usize, cols: usize, rng: RngSpec) -> ComplexMatrix {
    let mut r = rng.rng();
    let v = ginibre_vector(rows * cols, &mut r);
    ComplexMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Random Hermitian matrix `(G + G^dagger)/2`.
pub fn sample_hermitian(d: usize, rng: RngSpec) -> ComplexMatrix {
    sample_ginibre(d, d, rng).hermitian_part()
}

/// Haar-random pure state on `⊗ dims`.
pub fn sample_pure_state(dims: Vec<usize>, rng: RngSpec) -> Result<QuantumState> {
    let d: usize = dims.iter().product();
    let v = haar_vector(d, &mut rng.rng());
    QuantumState::pure(&v, dims)
}

/// Induced-measure mixed state `G G^dagger / tr(G G^dagger)` with `G` of size `d x rank`.
pub fn sample_mixed_state(dims: Vec<usize>, rank: usize, rng: RngSpec) -> Result<QuantumState> {
    if rank == 0 {
        return Err(Error::InvalidParameter("rank must be positive".into()));
    }
    let d: usize = dims.iter().product();
    let g = sample_ginibre(d, rank, rng);
    let rho = g.matmul(&g.adjoint());
    let tr = rho.trace().re;
    QuantumState::normalized(rho.scale(1.0 / tr).hermitian_part(), dims)
}

/// Kraus operators of a random CPTP map, cut from a Haar isometry.
pub fn sample_kraus(d_in: usize, d_out: usize, n_kraus: usize, rng: RngSpec) -> Result<Vec<ComplexMatrix>> {
    if d_in == 0 || d_out == 0 || n_kraus == 0 {
        return Err(Error::InvalidParameter("Kraus sampling needs positive sizes".into()));
    }
    let big = d_out * n_kraus;
    if big < d_in {
        return Err(Error::InvalidParameter(format!(
            "{n_kraus} Kraus operators of size {d_out}x{d_in} cannot form an isometry"
        )));
    }
    let u = sample_haar_with(big, &mut rng.rng());
    Ok((0..n_kraus).map(|k| ComplexMatrix::from_fn(d_out, d_in, |i, j| u[(k * d_out + i, j)])).collect())
}

/// Random CPTP channel from `d_in` to `d_out`.
pub fn sample_channel(d_in: usize, d_out: usize, n_kraus: usize, rng: RngSpec) -> Result<Channel> {
    j_map(&ChannelDescription::Kraus(sample_kraus(d_in, d_out, n_kraus, rng)?))
}

/// Random CP (not necessarily trace-preserving) map with Ginibre Kraus operators.
pub fn sample_cp_map(d_in: usize, d_out: usize, n_kraus: usize, rng: RngSpec) -> Result<Channel> {
    let ops: Vec<ComplexMatrix> = (0..n_kraus as u64)
        .map(|k| sample_ginibre(d_out, d_in, rng.stream(rng.stream_index.wrapping_mul(1000).wrapping_add(k))))
        .collect();
    j_map(&ChannelDescription::Kraus(ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::apply_kraus;

    #[test]
    fn sampled_channels_are_cptp() {
        let ops = sample_kraus(2, 4, 3, RngSpec::new(1, 2)).unwrap();
        let mut sum = ComplexMatrix::zeros(2, 2);
        for k in &ops {
            sum += &k.adjoint().matmul(k);
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        let ch = j_map(&ChannelDescription::Kraus(ops.clone())).unwrap();
        assert!(ch.is_trace_preserving());
        let rho = sample_mixed_state(vec![2], 2, RngSpec::new(3, 3)).unwrap();
        let direct = apply_kraus(&ops, rho.matrix());
        assert!(ch.apply(rho.matrix()).unwrap().max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn sampled_states_are_valid() {
        let s = sample_pure_state(vec![2, 4], RngSpec::new(0, 1)).unwrap();
        assert!((s.purity() - 1.0).abs() < 1e-12);
        let m = sample_mixed_state(vec![4], 4, RngSpec::new(0, 2)).unwrap();
        assert!((m.trace() - 1.0).abs() < 1e-12);
    }
}
