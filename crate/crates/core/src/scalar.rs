//! Scalar abstraction shared by the exact linear-algebra layers.
//!
//! The LP solver, the alcove geometry and the cyclotomic value type are
//! written against [`Scalar`]; the crate root fixes the concrete exact
//! instantiations. Floating-point scalars satisfy the bound too, but no
//! computation in this crate is ever run with them.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed};

/// An ordered field element usable in exact pivoting.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync
{
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_i64(numer).expect("integer embeds") / Self::from_i64(denom).expect("integer embeds")
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync
{
}

/// Formats a rational as `"p/q"` (or `"p"` for integers).
pub fn rational_string(r: &num_rational::BigRational) -> String {
    if r.denom() == &num_bigint::BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Option<num_rational::BigRational> {
    use num_bigint::BigInt;
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(num_rational::BigRational::new(n, d))
        }
        None => Some(num_rational::BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Serde adapter for rationals as `"p/q"` strings.
pub mod rational_serde {
    use num_rational::BigRational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::rational_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational `{s}`")))
    }

    pub mod vec {
        use num_rational::BigRational;
        use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(crate::scalar::rational_string))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| {
                    crate::scalar::parse_rational(s)
                        .ok_or_else(|| D::Error::custom(format!("bad rational `{s}`")))
                })
                .collect()
        }
    }
}
