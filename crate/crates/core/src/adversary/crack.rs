use num_bigint::BigInt;
use num_rational::BigRational;

use super::AdversaryError;

/// Percentage chance of guessing an `n`-bit token in one try, `100 / 2^n`.
pub fn crack_probability(n: u32) -> Result<f64, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::ZeroBits);
    }
    Ok(100.0 * 2f64.powi(-(n as i32)))
}

/// [`crack_probability`] as an exact rational.
pub fn crack_probability_exact(n: u32) -> Result<BigRational, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::ZeroBits);
    }
    Ok(BigRational::new(
        BigInt::from(100),
        BigInt::from(1) << n as usize,
    ))
}
