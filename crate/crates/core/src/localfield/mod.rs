//! Non-archimedean local fields `Q_p` and `F_p((t))` with truncated digit
//! expansions, the angular component, additive characters, and a fast
//! machine-word residue ring used by the enumeration kernels.

mod character;
mod digits;
mod element;
mod ring;

pub use character::{conductor_character, standard_character, RootOfUnity};
pub(crate) use character::lambda_scaled;
pub use element::TruncatedElement;
pub use ring::TruncRing;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Characteristic of the local field: `Q_p` (zero) or `F_p((t))` (positive).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Characteristic {
    #[serde(rename = "zero")]
    Zero,
    #[serde(rename = "pos")]
    Positive,
}

/// A local field with odd residue characteristic and residue field `F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSpec {
    p: u32,
    char: Characteristic,
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d: &u32| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl FieldSpec {
    pub fn new(p: u32, char: Characteristic) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(Error::InvalidField("residue characteristic 2 is not supported".into()));
        }
        Ok(Self { p, char })
    }

    pub fn qp(p: u32) -> Result<Self> {
        Self::new(p, Characteristic::Zero)
    }

    pub fn fpt(p: u32) -> Result<Self> {
        Self::new(p, Characteristic::Positive)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Residue field cardinality. Only prime residue fields are modelled.
    pub fn q(&self) -> u64 {
        self.p as u64
    }

    pub fn characteristic(&self) -> Characteristic {
        self.char
    }

    pub fn is_positive(&self) -> bool {
        self.char == Characteristic::Positive
    }

    /// The field with the same `p` and the other characteristic.
    pub fn partner(&self) -> Self {
        let char = match self.char {
            Characteristic::Zero => Characteristic::Positive,
            Characteristic::Positive => Characteristic::Zero,
        };
        Self { p: self.p, char }
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::FieldMismatch(self.to_string(), other.to_string()));
        }
        Ok(())
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.char {
            Characteristic::Zero => write!(f, "Q_{}", self.p),
            Characteristic::Positive => write!(f, "F_{}((t))", self.p),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FieldSpecRepr {
    p: u32,
    char: Characteristic,
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldSpecRepr { p: self.p, char: self.char }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FieldSpecRepr::deserialize(d)?;
        FieldSpec::new(r.p, r.char).map_err(serde::de::Error::custom)
    }
}
