use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::RngSpec;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub(crate) fn ginibre_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect()
}

/// Haar-random unit vector in dimension `n`.
pub(crate) fn haar_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v = ginibre_vector(n, rng);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// QR of a Ginibre matrix by modified Gram-Schmidt with one reorthogonalization
/// pass. The implicit R has a positive diagonal, which makes Q Haar distributed.
pub(crate) fn sample_haar_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|_| ginibre_vector(d, rng)).collect();
    for k in 0..d {
        for _pass in 0..2 {
            for j in 0..k {
                let (done, rest) = cols.split_at_mut(k);
                let q = &done[j];
                let v = &mut rest[0];
                let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[k] {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Haar-random unitary of size `d`.
pub fn sample_haar(d: usize, rng: RngSpec) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(sample_haar_with(d, &mut rng.rng()))
}

/// Haar-random pure state vector of dimension `d`.
pub fn sample_haar_vector(d: usize, rng: RngSpec) -> Result<Vec<Complex64>> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(haar_vector(d, &mut rng.rng()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_samples_are_unitary() {
        for d in [1, 2, 5, 16] {
            let u = sample_haar(d, RngSpec::new(2, d as u64)).unwrap();
            assert!(u.adjoint().matmul(&u).max_abs_diff(&ComplexMatrix::identity(d)) < 1e-10);
        }
    }

    #[test]
    fn reproducible() {
        assert_eq!(sample_haar(4, RngSpec::new(9, 1)).unwrap(), sample_haar(4, RngSpec::new(9, 1)).unwrap());
    }
}
