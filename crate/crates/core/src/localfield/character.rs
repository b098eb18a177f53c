use serde::{Deserialize, Serialize};

use super::{FieldSpec, TruncRing, TruncatedElement};
use crate::error::{Error, Result};

/// `ζ_{p^level}^exp`, with `exp` reduced mod `p^level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootOfUnity {
    pub level: u32,
    pub exp: u64,
}

impl RootOfUnity {
    pub const ONE: Self = Self { level: 0, exp: 0 };

    /// Lowest level at which this root is written.
    pub fn normalized(mut self, p: u32) -> Self {
        let p = p as u64;
        self.exp %= p.pow(self.level);
        while self.level > 0 && self.exp.is_multiple_of(p) {
            self.exp /= p;
            self.level -= 1;
        }
        self
    }
}

/// The additive character `Λ` of conductor `𝔭`: trivial on `𝔭`, and on `Ω`
/// equal to `x ↦ exp(2πi x̄ / p)` where `x̄` is the residue.
///
/// In `Q_p`, `Λ(x) = exp(2πi {x/p}_p)`; in `F_p((t))`, `Λ(x) = ζ_p^{c_0}`
/// with `c_0` the constant coefficient. `level_cap` bounds the root-of-unity
/// level (hence how negative `ord x` may be in `Q_p`).
pub fn conductor_character(a: &TruncatedElement, level_cap: u32) -> Result<RootOfUnity> {
    let field = a.field();
    let v = match a.valuation() {
        None => return Ok(RootOfUnity::ONE),
        Some(v) if v >= 1 => return Ok(RootOfUnity::ONE),
        Some(v) => v,
    };
    let level = (1 - v) as u32;
    if field.is_positive() {
        return Ok(RootOfUnity { level: 1, exp: a.digit(0)? as u64 }.normalized(field.p()));
    }
    if level > level_cap {
        return Err(Error::LevelCapExceeded { valuation: v, cap: level_cap });
    }
    let u = a.to_scaled(v, level)?;
    Ok(RootOfUnity { level, exp: u }.normalized(field.p()))
}

/// The additive character of conductor `Ω`: `ψ(x) = Λ(ϖ x)`, i.e. the
/// `p`-adic fractional part `{x}_p` in `Q_p` and the residue of the `t^{-1}`
/// coefficient in `F_p((t))`.
pub fn standard_character(a: &TruncatedElement, level_cap: u32) -> Result<RootOfUnity> {
    conductor_character(&a.shift(1), level_cap)
}

/// `Λ(ϖ^s u)` for `u ∈ Ω/𝔭^k`. Requires `s + k ≥ 1`. Not normalized.
#[inline]
pub(crate) fn lambda_scaled(ring: &TruncRing, field: FieldSpec, u: u64, s: i64) -> RootOfUnity {
    if s >= 1 || u == 0 {
        return RootOfUnity::ONE;
    }
    let top = (1 - s) as u32;
    debug_assert!(top <= ring.k());
    if field.is_positive() {
        RootOfUnity { level: 1, exp: ring.digit(u, top - 1) }
    } else {
        RootOfUnity { level: top, exp: ring.reduce(u, top) }
    }
}
