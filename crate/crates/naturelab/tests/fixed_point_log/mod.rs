//! Independent high-precision evaluation of the stage-bound formulas,
//! used only to cross-check the library's route. Deliberately different
//! machinery: fixed-point BigInt arithmetic with the logarithm computed
//! by repeated integer square roots, instead of exact-rational atanh
//! series intervals.

use naturelab::rational::Rat;
use num::bigint::BigInt;
use num::traits::{One, ToPrimitive};

/// Fractional bits of the fixed-point representation.
const S: u32 = 192;
/// Square-root halvings applied before the short log series.
const HALVINGS: u32 = 64;

fn isqrt(x: &BigInt) -> BigInt {
    x.sqrt()
}

/// round(ln(y)·2^(S+HALVINGS)) >> HALVINGS for y given in fixed point,
/// y ≥ 2^(S-1). ln(y) = 2^HALVINGS · ln(y^(1/2^HALVINGS)), and after the
/// sqrt chain the argument is so close to 1 that three series terms are
/// far below the rounding floor.
fn ln_chain(mut y: BigInt) -> BigInt {
    for _ in 0..HALVINGS {
        y = isqrt(&(y << S));
    }
    let u = y - (BigInt::one() << S);
    let u2 = (&u * &u) >> S;
    let u3 = (&u2 * &u) >> S;
    let series = &u - u2 / 2 + u3 / 3;
    series << HALVINGS
}

/// floor((p/q) / 2^e · 2^S): the normalized mantissa in fixed point.
fn mantissa(p: &BigInt, q: &BigInt, e: i64) -> BigInt {
    if e >= 0 {
        (p.clone() << S) / (q.clone() << e as u32)
    } else {
        (p.clone() << (S as i64 - e) as u32) / q.clone()
    }
}

/// round(ln(p/q)·2^S) for p, q > 0, within a couple of low-order ulps.
fn ln_fixed(p: &BigInt, q: &BigInt) -> BigInt {
    let one = BigInt::one() << S;
    let two = &one << 1u32;
    let mut e: i64 = p.bits() as i64 - q.bits() as i64;
    let mut y = mantissa(p, q, e);
    while y < one {
        e -= 1;
        y = mantissa(p, q, e);
    }
    while y >= two {
        e += 1;
        y = mantissa(p, q, e);
    }
    let ln2 = ln_chain(BigInt::from(2) << S);
    ln_chain(y) + BigInt::from(e) * ln2
}

/// ⌈max(α₁, α₂) + 2⌉ with
///   α₁ = (128/δ²)·ln(256/δ³)
///   α₂ = (n²(8n/δ + 1)·ln(2n²/δ) + 1) / ((3/4)δ)
/// for δ = p/q, evaluated entirely in fixed point.
pub fn stage_bound_oracle(delta: &Rat, n: u32) -> u64 {
    let p = delta.numer();
    let q = delta.denom();
    let one = BigInt::one() << S;

    // alpha1 = 128·(q/p)² · ln(256·(q/p)³)
    let ln_a1 = ln_fixed(&(BigInt::from(256) * q * q * q), &(p * p * p));
    let alpha1 = BigInt::from(128) * q * q * ln_a1 / (p * p);

    // alpha2 = (n²·(8nq + p)/p · ln(2n²·q/p) + 1) · 4q/(3p)
    let n_big = BigInt::from(n);
    let ln_a2 = ln_fixed(&(BigInt::from(2) * &n_big * &n_big * q), p);
    let inner = &n_big * &n_big * (BigInt::from(8) * &n_big * q + p) * ln_a2 / p + &one;
    let alpha2 = inner * BigInt::from(4) * q / (BigInt::from(3) * p);

    let v = alpha1.max(alpha2) + (BigInt::from(2) << S);
    let int_part: BigInt = &v >> S;
    let frac = &v - (&int_part << S);
    // the true value is irrational; if it ever sat this close to an
    // integer the ceiling would be in doubt and the oracle must not
    // pretend otherwise
    let margin = BigInt::one() << (S - 64);
    assert!(
        frac > margin && frac < &one - &margin,
        "oracle value suspiciously close to an integer"
    );
    (int_part + 1u32).to_u64().expect("bound fits in u64")
}
