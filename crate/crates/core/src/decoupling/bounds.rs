use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Decoupling-error bounds that can be evaluated from entropies and dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    /// Haar unitaries, smooth min-entropies.
    HaarEq8,
    /// δ-approximate 2-designs.
    TwoDesignEq9,
    /// Random quantum circuits with a user-supplied `1/poly(N_A)` term.
    RqcEq10,
    /// `D[ℓ]` with collision entropies.
    Theorem4H2,
    /// `D[ℓ]` with smooth min-entropies.
    Theorem4Smooth,
    /// Probability that a `D[ℓ]` draw exceeds twice the mean bound by `η`.
    Theorem5Tail,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::HaarEq8,
        BoundKind::TwoDesignEq9,
        BoundKind::RqcEq10,
        BoundKind::Theorem4H2,
        BoundKind::Theorem4Smooth,
        BoundKind::Theorem5Tail,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::HaarEq8 => "haar_eq8",
            BoundKind::TwoDesignEq9 => "two_design_eq9",
            BoundKind::RqcEq10 => "rqc_eq10",
            BoundKind::Theorem4H2 => "theorem4_h2",
            BoundKind::Theorem4Smooth => "theorem4_smooth",
            BoundKind::Theorem5Tail => "theorem5_tail",
        }
    }

    /// Parameter names the bound reads.
    pub fn required(&self) -> &'static [&'static str] {
        match self {
            BoundKind::HaarEq8 => &["h_ar", "h_ab", "epsilon"],
            BoundKind::TwoDesignEq9 => &["h_ar", "h_ab", "d_a", "delta", "epsilon"],
            BoundKind::RqcEq10 => &["h_ar", "h_ab", "n_a", "eta", "poly_inverse"],
            BoundKind::Theorem4H2 => &["h_ar", "h_ab", "d_a", "ell"],
            BoundKind::Theorem4Smooth => &["h_ar", "h_ab", "d_a", "ell", "epsilon"],
            BoundKind::Theorem5Tail => &["d_a", "ell", "eta", "k"],
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        BoundKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Parse(format!("unknown bound `{s}`")))
    }
}

/// Named real parameters for [`bound_evaluate`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundParams(BTreeMap<String, f64>);

impl BoundParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.0.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        let v = *self.0.get(key).ok_or_else(|| Error::MissingParameter(key.to_string()))?;
        if v.is_nan() {
            return Err(Error::InvalidParameter(format!("{key} is NaN")));
        }
        Ok(v)
    }

    fn non_negative(&self, key: &str) -> Result<f64> {
        let v = self.get(key)?;
        if v < 0.0 {
            return Err(Error::InvalidParameter(format!("{key} = {v} must be non-negative")));
        }
        Ok(v)
    }

    fn positive_integer(&self, key: &str) -> Result<f64> {
        let v = self.get(key)?;
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!("{key} = {v} must be a positive integer")));
        }
        Ok(v)
    }
}

/// `√(1 + 8 d^{2−ℓ})`.
pub fn theorem4_coefficient(d_a: f64, ell: f64) -> f64 {
    (1.0 + 8.0 * d_a.powf(2.0 - ell)).sqrt()
}

/// `χ_ℓ = 1 / (2¹¹ (2ℓ+1)³ K⁴ π²)`.
pub fn chi(ell: f64, k: f64) -> f64 {
    1.0 / (2048.0 * (2.0 * ell + 1.0).powi(3) * k.powi(4) * PI * PI)
}

/// Evaluates one of the closed-form bounds. Entropies are passed as `h_ar`, `h_ab` in bits.
pub fn bound_evaluate(which: BoundKind, params: &BoundParams) -> Result<f64> {
    let entropic = || -> Result<f64> { Ok((-0.5 * (params.get("h_ar")? + params.get("h_ab")?)).exp2()) };
    Ok(match which {
        BoundKind::HaarEq8 => entropic()? + 12.0 * params.non_negative("epsilon")?,
        BoundKind::TwoDesignEq9 => {
            let d = params.positive_integer("d_a")?;
            let delta = params.non_negative("delta")?;
            let eps = params.non_negative("epsilon")?;
            (1.0 + 4.0 * delta * d.powi(4)).sqrt() * entropic()? + 8.0 * d * delta * eps + 12.0 * eps
        }
        BoundKind::RqcEq10 => {
            let n = params.positive_integer("n_a")?;
            let eta = params.non_negative("eta")?;
            let p = params.non_negative("poly_inverse")?;
            let h = params.get("h_ar")? + params.get("h_ab")?;
            (p + (2.0 * eta * n - h).exp2()).sqrt()
        }
        BoundKind::Theorem4H2 => {
            theorem4_coefficient(params.positive_integer("d_a")?, params.positive_integer("ell")?) * entropic()?
        }
        BoundKind::Theorem4Smooth => {
            theorem4_coefficient(params.positive_integer("d_a")?, params.positive_integer("ell")?) * entropic()?
                + 12.0 * params.non_negative("epsilon")?
        }
        BoundKind::Theorem5Tail => {
            let d = params.positive_integer("d_a")?;
            let ell = params.positive_integer("ell")?;
            let eta = params.non_negative("eta")?;
            let k = params.get("k")?;
            if k <= 0.0 {
                return Err(Error::InvalidParameter(format!("k = {k} must be positive")));
            }
            2.0 * (-chi(ell, k) * d * eta.powi(4)).exp()
        }
    })
}

/// `Λ = −log₂ Δ`.
pub fn lambda_rate(bound: f64) -> f64 {
    -bound.log2()
}
