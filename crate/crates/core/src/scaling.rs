//! Value types for scaling laws and closed-form loss prediction.
//!
//! A [`PowerLaw`] predicts contrastive entropy from a single size variable,
//! `L(x) = (scale / x)^exponent + offset`. A [`JointLaw`] predicts it from
//! model and data size together,
//! `L(f, d) = [(M / f)^(mu / eta) + D / d]^eta + delta`.
//!
//! Sizes are taken as positive reals so that fitting and budget search can
//! evaluate the laws continuously; [`ModelSize`] and [`DataSize`] are the
//! integer forms used when ingesting experiment records. Losses are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-negative contrastive entropy, in nats.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Loss(f64);

impl Loss {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Loss(value))
        } else {
            Err(Error::domain(format!("loss must be finite and non-negative, got {value}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Loss {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Loss::new(v)
    }
}

impl From<Loss> for f64 {
    fn from(l: Loss) -> f64 {
        l.0
    }
}

macro_rules! size_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "u64", into = "u64")]
        pub struct $name(u64);

        impl $name {
            pub fn new(value: u64) -> Result<Self> {
                if value >= 1 {
                    Ok($name(value))
                } else {
                    Err(Error::domain(concat!(stringify!($name), " must be at least 1")))
                }
            }

            #[inline]
            pub fn get(self) -> u64 {
                self.0
            }

            #[inline]
            pub fn as_f64(self) -> f64 {
                self.0 as f64
            }
        }

        impl TryFrom<u64> for $name {
            type Error = Error;
            fn try_from(v: u64) -> Result<Self> {
                $name::new(v)
            }
        }

        impl From<$name> for u64 {
            fn from(s: $name) -> u64 {
                s.0
            }
        }
    };
}

size_newtype!(
    /// Number of non-embedding parameters of a retriever.
    ModelSize
);
size_newtype!(
    /// Number of annotated query-passage training pairs.
    DataSize
);

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite and positive, got {v}")))
    }
}

fn check_offset(v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("offset must be finite and non-negative, got {v}")))
    }
}

/// Single-variable scaling law `(scale / x)^exponent + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPowerLaw")]
pub struct PowerLaw {
    scale: f64,
    exponent: f64,
    offset: f64,
}

#[derive(Deserialize)]
struct RawPowerLaw {
    scale: f64,
    exponent: f64,
    offset: f64,
}

impl TryFrom<RawPowerLaw> for PowerLaw {
    type Error = Error;
    fn try_from(r: RawPowerLaw) -> Result<Self> {
        PowerLaw::new(r.scale, r.exponent, r.offset)
    }
}

impl PowerLaw {
    pub fn new(scale: f64, exponent: f64, offset: f64) -> Result<Self> {
        check_positive("scale", scale)?;
        check_positive("exponent", exponent)?;
        check_offset(offset)?;
        Ok(PowerLaw { scale, exponent, offset })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Irreducible loss the law approaches as the size grows.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// The reducible part `(scale / size)^exponent`, without validation.
    #[inline]
    pub fn reducible(&self, size: f64) -> f64 {
        (self.scale / size).powf(self.exponent)
    }

    /// Predicted loss, without validation of `size`.
    #[inline]
    pub fn predict(&self, size: f64) -> f64 {
        self.reducible(size) + self.offset
    }

    pub fn eval(&self, size: f64) -> Result<Loss> {
        check_positive("size", size)?;
        Loss::new(self.predict(size))
    }

    /// Size at which the reducible loss has shrunk by `improvement_fraction`
    /// relative to its value at `current_size`.
    pub fn required_scale(&self, current_size: f64, improvement_fraction: f64) -> Result<f64> {
        check_positive("current_size", current_size)?;
        if !(improvement_fraction > 0.0 && improvement_fraction < 1.0) {
            return Err(Error::domain(format!(
                "improvement fraction must lie in (0, 1), got {improvement_fraction}"
            )));
        }
        if self.reducible(current_size) <= 0.0 {
            return Err(Error::domain("loss already at the irreducible offset"));
        }
        Ok(current_size * (1.0 - improvement_fraction).powf(-1.0 / self.exponent))
    }
}

/// Data-model joint scaling law
/// `[(model_scale / f)^(model_exponent / data_exponent) + data_scale / d]^data_exponent + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJointLaw")]
pub struct JointLaw {
    model_scale: f64,
    data_scale: f64,
    model_exponent: f64,
    data_exponent: f64,
    offset: f64,
}

#[derive(Deserialize)]
struct RawJointLaw {
    model_scale: f64,
    data_scale: f64,
    model_exponent: f64,
    data_exponent: f64,
    offset: f64,
}

impl TryFrom<RawJointLaw> for JointLaw {
    type Error = Error;
    fn try_from(r: RawJointLaw) -> Result<Self> {
        JointLaw::new(r.model_scale, r.data_scale, r.model_exponent, r.data_exponent, r.offset)
    }
}

impl JointLaw {
    pub fn new(
        model_scale: f64,
        data_scale: f64,
        model_exponent: f64,
        data_exponent: f64,
        offset: f64,
    ) -> Result<Self> {
        check_positive("model_scale", model_scale)?;
        check_positive("data_scale", data_scale)?;
        check_positive("model_exponent", model_exponent)?;
        check_positive("data_exponent", data_exponent)?;
        check_offset(offset)?;
        Ok(JointLaw {
            model_scale,
            data_scale,
            model_exponent,
            data_exponent,
            offset,
        })
    }

    pub fn model_scale(&self) -> f64 {
        self.model_scale
    }

    pub fn data_scale(&self) -> f64 {
        self.data_scale
    }

    pub fn model_exponent(&self) -> f64 {
        self.model_exponent
    }

    pub fn data_exponent(&self) -> f64 {
        self.data_exponent
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Predicted loss at continuous sizes, without validation.
    #[inline]
    pub fn predict(&self, model: f64, data: f64) -> f64 {
        let model_term = (self.model_scale / model).powf(self.model_exponent / self.data_exponent);
        let data_term = self.data_scale / data;
        (model_term + data_term).powf(self.data_exponent) + self.offset
    }

    pub fn eval(&self, model: f64, data: f64) -> Result<Loss> {
        check_positive("model size", model)?;
        check_positive("data size", data)?;
        Loss::new(self.predict(model, data))
    }

    pub fn eval_sizes(&self, model: ModelSize, data: DataSize) -> Loss {
        Loss(self.predict(model.as_f64(), data.as_f64()))
    }
}
