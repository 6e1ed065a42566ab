//! Scalar abstraction used by every distance table and barrier computation.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type for distances and chain costs: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tolerance for triangle and ultrametric checks on analytically exact input.
    fn triangle_tolerance() -> Self;

    /// Agreement required between a reconstructed witness chain and its barrier value.
    fn witness_tolerance() -> Self;

    /// Converts an `f64` literal, panicking only if the value is not representable at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar literal out of range")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn triangle_tolerance() -> Self {
        1e-12
    }

    fn witness_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn triangle_tolerance() -> Self {
        1e-5
    }

    fn witness_tolerance() -> Self {
        1e-4
    }
}

/// Cost composition used along a chain.
///
/// `Length` sums gap distances, `Bound` keeps the largest gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bound,
    Length,
}

impl Mode {
    #[inline]
    pub fn compose<T: Scalar>(self, acc: T, step: T) -> T {
        match self {
            Mode::Length => acc + step,
            Mode::Bound => acc.max(step),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Bound => "bound",
            Mode::Length => "length",
        }
    }
}

impl Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bound" | "m" => Ok(Mode::Bound),
            "length" | "l" => Ok(Mode::Length),
            other => Err(crate::Error::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

/// Writes a scalar the way every CSV/JSON export in this crate does:
/// shortest round-trip decimal, with `inf` for positive infinity.
pub fn format_scalar<T: Scalar>(x: T) -> String {
    let v = x.as_f64();
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else if v.is_infinite() {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

pub fn parse_scalar<T: Scalar>(s: &str) -> Result<T, crate::Error> {
    let s = s.trim();
    let v = match s {
        "inf" | "+inf" | "Infinity" => f64::INFINITY,
        "-inf" | "-Infinity" => f64::NEG_INFINITY,
        _ => s
            .parse::<f64>()
            .map_err(|_| crate::Error::Parse(format!("not a number: '{s}'")))?,
    };
    T::from_f64(v).ok_or_else(|| crate::Error::Parse(format!("not representable: '{s}'")))
}

/// Serde helpers that map non-finite scalars to the strings `"inf"`/`"nan"`.
pub mod serde_scalar {
    use super::{format_scalar, Scalar};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    fn one<T: Scalar, S: Serializer>(x: T, s: S) -> Result<S::Ok, S::Error> {
        let v = x.as_f64();
        if v.is_finite() {
            s.serialize_f64(v)
        } else {
            s.serialize_str(&format_scalar(x))
        }
    }

    pub fn serialize<T: Scalar, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
        one(*x, s)
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    impl Raw {
        fn get<T: Scalar, E: serde::de::Error>(self) -> Result<T, E> {
            let v = match self {
                Raw::Num(v) => v,
                Raw::Text(t) if t == "nan" || t == "NaN" => f64::NAN,
                Raw::Text(t) => return super::parse_scalar(&t).map_err(E::custom),
            };
            T::from_f64(v).ok_or_else(|| E::custom(format!("not representable: {v}")))
        }
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        Raw::deserialize(d)?.get()
    }

    pub mod option {
        use super::*;

        pub fn serialize<T: Scalar, S: Serializer>(x: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => one(*v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Option<T>, D::Error> {
            Option::<Raw>::deserialize(d)?.map(Raw::get).transpose()
        }
    }

    pub mod table {
        use super::*;

        struct Row<'a, T>(&'a [T]);

        impl<T: Scalar> serde::Serialize for Row<'_, T> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for x in self.0 {
                    seq.serialize_element(&Cell(*x))?;
                }
                seq.end()
            }
        }

        struct Cell<T>(T);

        impl<T: Scalar> serde::Serialize for Cell<T> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                one(self.0, s)
            }
        }

        pub fn serialize<T: Scalar, S: Serializer>(rows: &[Vec<T>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(rows.len()))?;
            for r in rows {
                seq.serialize_element(&Row(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<T>>, D::Error> {
            Vec::<Vec<Raw>>::deserialize(d)?
                .into_iter()
                .map(|r| r.into_iter().map(Raw::get).collect())
                .collect()
        }
    }
}
