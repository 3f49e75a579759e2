//! Exact rationals for densities and overhead ratios.

use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

pub type Rational = Ratio<u64>;

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parse `"0.25"`, `"1/4"` or `"1"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidParameter(format!("not a non-negative rational: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if (int.is_empty() && frac.is_empty()) || frac.len() > 18 {
        return Err(bad());
    }
    let digits = |t: &str| t.is_empty() || t.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || !digits(frac) {
        return Err(bad());
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_v: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(den).and_then(|x| x.checked_add(frac_v)).ok_or_else(bad)?;
    Ok(Rational::new(num, den))
}

pub fn format_rational(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
