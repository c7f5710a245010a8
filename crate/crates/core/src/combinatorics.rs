//! Exact integer counting helpers. Counts such as `C(N, K)` overflow native
//! widths quickly, so everything here is `BigUint`; logarithms are taken from
//! the exact value.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // exact at every step: the running value is C(n, i + 1)
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `(Σ parts)! / Π parts_i!`.
pub fn multinomial(parts: &[usize]) -> BigUint {
    let mut remaining: usize = parts.iter().sum();
    let mut acc = BigUint::one();
    for &p in parts {
        acc *= binomial(remaining, p);
        remaining -= p;
    }
    acc
}

pub fn product(values: &[usize]) -> BigUint {
    values
        .iter()
        .fold(BigUint::one(), |acc, &v| acc * BigUint::from(v))
}

/// Base-2 logarithm of an exact integer. Returns `-inf` for zero.
pub fn log2_big(value: &BigUint) -> f64 {
    if value.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = value.bits();
    if bits <= 64 {
        return value.to_u64().map(|v| (v as f64).log2()).unwrap();
    }
    let shift = bits - 64;
    let top = (value >> shift).to_u64().unwrap();
    (top as f64).log2() + shift as f64
}
