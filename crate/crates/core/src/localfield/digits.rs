//! Fixed-length digit-window arithmetic. A window of length `len` holds the
//! coefficients of `ϖ^0 .. ϖ^{len-1}` of an element of `Ω / 𝔭^len`, low
//! order first. In `Q_p` the digits carry; in `F_p[[t]]` they do not.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::Characteristic;

pub(crate) fn to_big(p: u32, d: &[u32]) -> BigUint {
    let mut n = BigUint::zero();
    for &x in d.iter().rev() {
        n = n * p + x;
    }
    n
}

pub(crate) fn from_big(p: u32, mut n: BigUint, len: usize) -> Vec<u32> {
    let pb = BigUint::from(p);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let (q, r) = n.div_rem(&pb);
        out.push(r.to_u32().unwrap());
        n = q;
    }
    out
}

fn modulus(p: u32, len: usize) -> BigUint {
    BigUint::from(p).pow(len as u32)
}

pub(crate) fn add(p: u32, ch: Characteristic, a: &[u32], b: &[u32], len: usize) -> Vec<u32> {
    match ch {
        Characteristic::Positive => (0..len)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
        Characteristic::Zero => {
            let mut out = Vec::with_capacity(len);
            let mut carry = 0;
            for i in 0..len {
                let s = a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0) + carry;
                out.push(s % p);
                carry = s / p;
            }
            out
        }
    }
}

pub(crate) fn neg(p: u32, ch: Characteristic, a: &[u32], len: usize) -> Vec<u32> {
    match ch {
        Characteristic::Positive => {
            (0..len).map(|i| (p - a.get(i).copied().unwrap_or(0) % p) % p).collect()
        }
        Characteristic::Zero => {
            let m = modulus(p, len);
            let x = to_big(p, &a[..a.len().min(len)]) % &m;
            from_big(p, (&m - x) % &m, len)
        }
    }
}

pub(crate) fn mul(p: u32, ch: Characteristic, a: &[u32], b: &[u32], len: usize) -> Vec<u32> {
    match ch {
        Characteristic::Positive => {
            let mut out = vec![0u64; len];
            for (i, &x) in a.iter().enumerate().take(len) {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate().take(len - i) {
                    out[i + j] += x as u64 * y as u64;
                }
            }
            out.into_iter().map(|v| (v % p as u64) as u32).collect()
        }
        Characteristic::Zero => {
            let m = modulus(p, len);
            let x = to_big(p, &a[..a.len().min(len)]) * to_big(p, &b[..b.len().min(len)]);
            from_big(p, x % m, len)
        }
    }
}

/// Inverse of a unit (`a[0] != 0`) modulo `ϖ^len`.
pub(crate) fn inv_unit(p: u32, ch: Characteristic, a: &[u32], len: usize) -> Vec<u32> {
    debug_assert!(!a[0].is_multiple_of(p));
    match ch {
        Characteristic::Positive => {
            let inv0 = inv_mod_u32(a[0], p);
            let mut out = vec![0u32; len];
            for n in 0..len {
                // a_0 b_n + sum_{i>=1} a_i b_{n-i} = [n == 0]
                let mut s: i64 = if n == 0 { 1 } else { 0 };
                for i in 1..=n {
                    s -= a.get(i).copied().unwrap_or(0) as i64 * out[n - i] as i64;
                }
                out[n] = (s.rem_euclid(p as i64) as u32 * inv0) % p;
            }
            out
        }
        Characteristic::Zero => {
            let m = BigInt::from(modulus(p, len));
            let x = BigInt::from(to_big(p, &a[..a.len().min(len)]));
            let inv = mod_inverse(&x, &m).expect("unit");
            from_big(p, inv.to_biguint().unwrap(), len)
        }
    }
}

pub(crate) fn inv_mod_u32(a: u32, p: u32) -> u32 {
    let r = mod_inverse(&BigInt::from(a), &BigInt::from(p)).expect("unit mod p");
    r.to_u32().unwrap()
}

/// Inverse of `x` modulo `m` in `[0, m)`, if it exists.
pub(crate) fn mod_inverse(x: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = x.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}
