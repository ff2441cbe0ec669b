use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar used by the distance and bound evaluators.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn count(v: u64) -> Self {
        Self::from_u64(v).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Arbitrary precision rational used for exact identities.
pub type Rational = num_rational::BigRational;

/// Serializes a [`Rational`] as its `num/den` string.
pub(crate) mod rational_string {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(|_| D::Error::custom(format!("invalid rational {text:?}")))
    }
}
