use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Open interval `(lo, hi)` on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::domain(format!("invalid interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && self.lo < x && x < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// A bounded window used where grids need finite extent.
    ///
    /// Bounded intervals are returned unchanged. An infinite side is cut at
    /// ten times the scale of the finite endpoint (or at +-10 when both sides
    /// are infinite).
    pub fn working_window(&self) -> Interval {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => *self,
            (true, false) => Interval {
                lo: self.lo,
                hi: self.lo + 10.0 * self.lo.abs().max(1.0),
            },
            (false, true) => Interval {
                lo: self.hi - 10.0 * self.hi.abs().max(1.0),
                hi: self.hi,
            },
            (false, false) => Interval { lo: -10.0, hi: 10.0 },
        }
    }

    /// Centered sub-interval covering `fraction` of a bounded interval.
    pub fn shrink(&self, fraction: f64) -> Interval {
        let w = self.working_window();
        let mid = 0.5 * (w.lo + w.hi);
        let half = 0.5 * fraction * (w.hi - w.lo);
        Interval {
            lo: mid - half,
            hi: mid + half,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        let w = self.working_window();
        0.5 * (w.lo + w.hi)
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `count` strictly interior sample points in increasing order.
    ///
    /// Bounded intervals are sampled uniformly. Infinite sides are reached
    /// through `t / (1 - t)` with `t <= 0.99`, so samples extend to roughly 99
    /// times the endpoint scale.
    pub fn sample_points(&self, count: usize) -> Vec<f64> {
        let n = count.max(1);
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let step = (self.hi - self.lo) / (n + 1) as f64;
                (1..=n).map(|k| self.lo + step * k as f64).collect()
            }
            (true, false) => {
                let scale = self.lo.abs().max(1.0);
                (1..=n)
                    .map(|k| {
                        let t = 0.99 * k as f64 / n as f64;
                        self.lo + scale * t / (1.0 - t)
                    })
                    .collect()
            }
            (false, true) => {
                let scale = self.hi.abs().max(1.0);
                (1..=n)
                    .rev()
                    .map(|k| {
                        let t = 0.99 * k as f64 / n as f64;
                        self.hi - scale * t / (1.0 - t)
                    })
                    .collect()
            }
            (false, false) => (1..=n)
                .map(|k| {
                    let t = 0.99 * (2.0 * k as f64 / (n + 1) as f64 - 1.0);
                    t / (1.0 - t.abs())
                })
                .collect(),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

fn write_endpoint<S: SerializeTuple>(seq: &mut S, v: f64) -> std::result::Result<(), S::Error> {
    if v == f64::INFINITY {
        seq.serialize_element("inf")
    } else if v == f64::NEG_INFINITY {
        seq.serialize_element("-inf")
    } else {
        seq.serialize_element(&v)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_tuple(2)?;
        write_endpoint(&mut seq, self.lo)?;
        write_endpoint(&mut seq, self.hi)?;
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Num(f64),
    Text(String),
}

impl Endpoint {
    fn value<E: de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            Endpoint::Num(v) => Ok(v),
            Endpoint::Text(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(E::custom(format!("unknown interval endpoint {other:?}"))),
            },
        }
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct IntervalVisitor;

        impl<'de> Visitor<'de> for IntervalVisitor {
            type Value = Interval;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a two-element array [lo, hi]")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Interval, A::Error> {
                let lo: Endpoint = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let hi: Endpoint = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Interval::new(lo.value()?, hi.value()?).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_tuple(2, IntervalVisitor)
    }
}
