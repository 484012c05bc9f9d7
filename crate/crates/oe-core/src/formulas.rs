//! Closed-form main terms and block-size targets for extremal products.
//!
//! # Overview
//!
//! The leading term of the maximal product ∏|𝓕_k| over m-overlapping
//! systems on [n] is
//!
//! ```text
//! 2^n · ∏_S (1/m_S!) · (m_S·n / Σ_{S'} m_{S'})^{m_S}
//! ```
//!
//! with S ranging over the vertex pairs. [`asymptotic_main_term`] evaluates
//! it for an arbitrary bound matrix, [`uniform_asymptotic`] for the uniform
//! case [(1/m!)(n/C(ℓ,2))^m]^{C(ℓ,2)}·2^n, and [`block_size_targets`] gives
//! the ideal block sizes m_S·n/Σm_{S'} that balanced plans round.
//!
//! # Design
//!
//! Everything is an exact rational times 2^n — never a float — so ratio
//! tests against enumerated products are exact.

use crate::family::OverlapSpec;
use crate::{Error, Result};
use num::rational::{BigRational, Ratio};
use num::{BigInt, One};

/// An exact main term `coeff · 2^n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MainTerm {
    n: u32,
    coeff: BigRational,
}

impl MainTerm {
    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// The rational factor multiplying 2^n.
    #[inline]
    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    /// The full value coeff · 2^n.
    pub fn value(&self) -> BigRational {
        self.coeff.clone() * BigRational::from(BigInt::one() << self.n)
    }
}

fn factorial(m: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=m {
        acc *= BigInt::from(i);
    }
    acc
}

/// Main term of the maximal product for an arbitrary bound matrix. When all
/// bounds are zero the product degenerates and the exact value 2^n is
/// returned (coefficient 1).
pub fn asymptotic_main_term(n: u32, spec: &OverlapSpec) -> MainTerm {
    let sum = spec.sum_m();
    let mut coeff = BigRational::one();
    if sum > 0 {
        for (_, _, m) in spec.pairs() {
            if m == 0 {
                continue;
            }
            let base = BigRational::new(
                BigInt::from(m as u64 * n as u64),
                BigInt::from(sum),
            );
            coeff *= num::pow::pow(base, m as usize)
                / BigRational::from(factorial(m));
        }
    }
    MainTerm { n, coeff }
}

/// Main term for the uniform bound m on every pair of [ℓ]:
/// [(1/m!)·(n/C(ℓ,2))^m]^{C(ℓ,2)} · 2^n. With no pairs (ℓ ≤ 1) or m = 0
/// this is exactly 2^n.
pub fn uniform_asymptotic(n: u32, ell: usize, m: u32) -> MainTerm {
    let npairs = ell * ell.saturating_sub(1) / 2;
    let mut coeff = BigRational::one();
    if npairs > 0 && m > 0 {
        let base = BigRational::new(BigInt::from(n), BigInt::from(npairs as u64));
        let bracket = num::pow::pow(base, m as usize) / BigRational::from(factorial(m));
        coeff = num::pow::pow(bracket, npairs);
    }
    MainTerm { n, coeff }
}

/// Ideal block sizes m_S·n/Σm_{S'}, one per pair with a positive bound, in
/// the fixed pair order. Errors when every bound is zero (no blocks exist).
pub fn block_size_targets(
    n: u32,
    spec: &OverlapSpec,
) -> Result<Vec<((usize, usize), Ratio<i128>)>> {
    let sum = spec.sum_m();
    if sum == 0 {
        return Err(Error::Invalid(
            "block targets need at least one positive overlap bound".into(),
        ));
    }
    Ok(spec
        .pairs()
        .into_iter()
        .filter(|&(_, _, m)| m > 0)
        .map(|(k1, k2, m)| {
            (
                (k1, k2),
                Ratio::new(m as i128 * n as i128, sum as i128),
            )
        })
        .collect())
}
