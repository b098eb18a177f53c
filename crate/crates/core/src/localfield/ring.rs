use super::{Characteristic, FieldSpec};
use crate::error::{Error, Result};

/// The residue ring `Ω / 𝔭^k` packed into a machine word.
///
/// An element is stored as the integer `Σ d_i p^i` of its digits. For `Q_p`
/// this is the usual representative mod `p^k`; for `F_p[[t]]` the digits add
/// without carry. Multiplication by `ϖ^e`, digit extraction and reduction to
/// a smaller `k` are the same integer operations in both cases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncRing {
    p: u64,
    k: u32,
    modulus: u64,
    positive: bool,
    pows: Vec<u64>,
}

impl TruncRing {
    pub fn new(field: FieldSpec, k: u32) -> Result<Self> {
        let p = field.p() as u64;
        let mut pows = vec![1u64];
        for _ in 0..k {
            let next = pows.last().unwrap().checked_mul(p).ok_or(Error::PrecisionOverflow(k))?;
            pows.push(next);
        }
        let modulus = pows[k as usize];
        if modulus > (1u64 << 62) {
            return Err(Error::PrecisionOverflow(k));
        }
        Ok(Self {
            p,
            k,
            modulus,
            positive: field.characteristic() == Characteristic::Positive,
            pows,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Number of elements, `p^k`.
    pub fn size(&self) -> u64 {
        self.modulus
    }

    pub fn pow_p(&self, e: u32) -> u64 {
        self.pows[e as usize]
    }

    #[inline]
    pub fn add(&self, x: u64, y: u64) -> u64 {
        if !self.positive {
            let s = x + y;
            if s >= self.modulus {
                s - self.modulus
            } else {
                s
            }
        } else {
            let (mut x, mut y) = (x, y);
            let mut out = 0;
            let mut i = 0;
            while x != 0 || y != 0 {
                let d = (x % self.p + y % self.p) % self.p;
                out += d * self.pows[i];
                x /= self.p;
                y /= self.p;
                i += 1;
            }
            out
        }
    }

    #[inline]
    pub fn neg(&self, x: u64) -> u64 {
        if !self.positive {
            if x == 0 {
                0
            } else {
                self.modulus - x
            }
        } else {
            let mut x = x;
            let mut out = 0;
            let mut i = 0;
            while x != 0 {
                let d = x % self.p;
                out += ((self.p - d) % self.p) * self.pows[i];
                x /= self.p;
                i += 1;
            }
            out
        }
    }

    #[inline]
    pub fn sub(&self, x: u64, y: u64) -> u64 {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        if !self.positive {
            ((x as u128 * y as u128) % self.modulus as u128) as u64
        } else {
            if x == 0 || y == 0 {
                return 0;
            }
            let k = self.k as usize;
            let mut a = [0u64; 64];
            let mut b = [0u64; 64];
            let (mut xx, mut yy) = (x, y);
            let (mut la, mut lb) = (0, 0);
            while xx != 0 {
                a[la] = xx % self.p;
                xx /= self.p;
                la += 1;
            }
            while yy != 0 {
                b[lb] = yy % self.p;
                yy /= self.p;
                lb += 1;
            }
            let mut out = 0;
            for n in 0..k.min(la + lb) {
                let mut s = 0;
                for i in n.saturating_sub(lb - 1)..=n.min(la - 1) {
                    s += a[i] * b[n - i];
                }
                out += (s % self.p) * self.pows[n];
            }
            out
        }
    }

    /// The image of an integer.
    pub fn from_i64(&self, n: i64) -> u64 {
        if self.positive {
            n.rem_euclid(self.p as i64) as u64 % self.modulus.max(1)
        } else {
            n.rem_euclid(self.modulus as i64) as u64
        }
    }

    /// Valuation, or `k` for zero.
    #[inline]
    pub fn ord(&self, x: u64) -> u32 {
        if x == 0 {
            return self.k;
        }
        let mut v = 0;
        let mut x = x;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// Multiplication by `ϖ^e`.
    #[inline]
    pub fn shift_up(&self, x: u64, e: u32) -> u64 {
        if e >= self.k {
            return 0;
        }
        (x % self.pows[(self.k - e) as usize]) * self.pows[e as usize]
    }

    /// Division by `ϖ^e` of an element of `𝔭^e`, landing in `Ω/𝔭^{k-e}`.
    #[inline]
    pub fn shift_down(&self, x: u64, e: u32) -> u64 {
        debug_assert_eq!(x % self.pows[e as usize], 0);
        x / self.pows[e as usize]
    }

    /// Reduction to `Ω / 𝔭^j`.
    #[inline]
    pub fn reduce(&self, x: u64, j: u32) -> u64 {
        if j >= self.k {
            x
        } else {
            x % self.pows[j as usize]
        }
    }

    #[inline]
    pub fn digit(&self, x: u64, i: u32) -> u64 {
        (x / self.pows[i as usize]) % self.p
    }

    /// Inverse of a unit.
    pub fn inv_unit(&self, x: u64) -> Option<u64> {
        if x.is_multiple_of(self.p) {
            return None;
        }
        if !self.positive {
            let (mut a, mut b) = (x as i128, self.modulus as i128);
            let (mut s, mut t) = (1i128, 0i128);
            while b != 0 {
                let q = a / b;
                (a, b) = (b, a - q * b);
                (s, t) = (t, s - q * t);
            }
            Some(s.rem_euclid(self.modulus as i128) as u64)
        } else {
            // Newton iteration y <- y (2 - x y)
            let mut y = {
                let d = x % self.p;
                (1..self.p).find(|&c| c * d % self.p == 1).unwrap()
            };
            let mut prec = 1;
            while prec < self.k {
                let xy = self.mul(x, y);
                let two = self.from_i64(2);
                y = self.mul(y, self.sub(two, xy));
                prec *= 2;
            }
            Some(y)
        }
    }

    /// Solves `a y ≡ r (mod 𝔭^k)`. Returns the solutions as `y0 + j ϖ^{k-e}`
    /// parameters `(y0, e)` where `e = ord(a)`, or `None` if insoluble.
    pub fn solve_linear(&self, a: u64, r: u64) -> Option<(u64, u32)> {
        let e = self.ord(a);
        if e == self.k {
            return if r == 0 { Some((0, self.k)) } else { None };
        }
        if !r.is_multiple_of(self.pows[e as usize]) {
            return None;
        }
        let sub = Self {
            p: self.p,
            k: self.k - e,
            modulus: self.pows[(self.k - e) as usize],
            positive: self.positive,
            pows: self.pows[..=(self.k - e) as usize].to_vec(),
        };
        let a1 = self.shift_down(a, e) % sub.modulus;
        let r1 = self.shift_down(r, e) % sub.modulus;
        let y0 = sub.mul(r1, sub.inv_unit(a1)?);
        Some((y0, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rings() -> Vec<TruncRing> {
        vec![
            TruncRing::new(FieldSpec::qp(5).unwrap(), 4).unwrap(),
            TruncRing::new(FieldSpec::fpt(5).unwrap(), 4).unwrap(),
            TruncRing::new(FieldSpec::fpt(7).unwrap(), 3).unwrap(),
        ]
    }

    #[test]
    fn unit_inverse() {
        for r in rings() {
            for x in 0..r.size() {
                match r.inv_unit(x) {
                    Some(y) => assert_eq!(r.mul(x, y), 1),
                    None => assert_eq!(x % r.p(), 0),
                }
            }
        }
    }

    #[test]
    fn linear_solver() {
        for r in rings() {
            for a in [0, 1, r.p(), 3 * r.p() * r.p()] {
                for rhs in 0..r.size() {
                    let sols: Vec<u64> = (0..r.size()).filter(|&y| r.mul(a, y) == rhs).collect();
                    match r.solve_linear(a, rhs) {
                        None => assert!(sols.is_empty()),
                        Some((y0, e)) => {
                            let step = if e >= r.k() { 1 } else { r.pow_p(r.k() - e) };
                            let count = if e >= r.k() { r.size() } else { r.pow_p(e) };
                            let mut mine: Vec<u64> =
                                (0..count).map(|j| r.add(y0, r.mul(j % r.size(), step % r.size().max(1)))).collect();
                            if e >= r.k() {
                                mine = (0..r.size()).collect();
                            }
                            mine.sort();
                            assert_eq!(mine, sols);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn ring_axioms(x in 0u64..625, y in 0u64..625, z in 0u64..625) {
            for r in rings() {
                let (x, y, z) = (x % r.size(), y % r.size(), z % r.size());
                prop_assert_eq!(r.add(x, y), r.add(y, x));
                prop_assert_eq!(r.mul(x, y), r.mul(y, x));
                prop_assert_eq!(r.mul(x, r.add(y, z)), r.add(r.mul(x, y), r.mul(x, z)));
                prop_assert_eq!(r.mul(r.mul(x, y), z), r.mul(x, r.mul(y, z)));
                prop_assert_eq!(r.add(x, r.neg(x)), 0);
                prop_assert_eq!(r.shift_up(x, 1), r.mul(x, r.p()));
            }
        }
    }
}
