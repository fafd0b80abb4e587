use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::FromPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Scalar type used for feature values, hyperplane coefficients and weights.
pub trait Float:
    num_traits::Float
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; every `f64` is representable (possibly rounded).
    fn cast(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Float converts to f64")
    }
}

impl Float for f32 {}
impl Float for f64 {}
