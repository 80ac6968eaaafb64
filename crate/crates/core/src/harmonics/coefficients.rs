use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::{canonical_index, coefficient_count};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Degree/order pair `(l, m)` with `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub l: i64,
    pub m: i64,
}

impl HarmonicIndex {
    pub fn new(l: i64, m: i64) -> Result<Self> {
        let idx = Self { l, m };
        idx.validate()?;
        Ok(idx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 0 || self.m.abs() > self.l {
            return Err(Error::InvalidIndex { l: self.l, m: self.m });
        }
        Ok(())
    }

    /// Every index with `l <= band_limit`, in canonical order.
    pub fn all(band_limit: usize) -> impl Iterator<Item = HarmonicIndex> {
        (0..=band_limit as i64).flat_map(|l| (-l..=l).map(move |m| HarmonicIndex { l, m }))
    }
}

/// Dense, band-limited list of real spherical-harmonic coefficients in
/// canonical order (l ascending, then m from -l to l).
///
/// Used for shapes, exterior multipole data and forward-map values alike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficients<T>", into = "RawCoefficients<T>")]
#[serde(bound = "T: Real")]
pub struct CoefficientVector<T> {
    band_limit: usize,
    values: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
struct RawCoefficients<T> {
    band_limit: usize,
    values: Vec<T>,
}

impl<T: Real> TryFrom<RawCoefficients<T>> for CoefficientVector<T> {
    type Error = Error;
    fn try_from(raw: RawCoefficients<T>) -> Result<Self> {
        Self::from_values(raw.band_limit, raw.values)
    }
}

impl<T: Real> From<CoefficientVector<T>> for RawCoefficients<T> {
    fn from(c: CoefficientVector<T>) -> Self {
        Self {
            band_limit: c.band_limit,
            values: c.values,
        }
    }
}

impl<T: Real> CoefficientVector<T> {
    pub fn zeros(band_limit: usize) -> Self {
        Self {
            band_limit,
            values: vec![T::zero(); coefficient_count(band_limit)],
        }
    }

    pub fn from_values(band_limit: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != coefficient_count(band_limit) {
            return Err(Error::Format(format!(
                "band limit {band_limit} needs {} coefficients, got {}",
                coefficient_count(band_limit),
                values.len()
            )));
        }
        Ok(Self { band_limit, values })
    }

    /// Coefficients of the constant function `radius` (a perfect sphere when
    /// read as a shape).
    pub fn sphere(band_limit: usize, radius: T) -> Self {
        let mut c = Self::zeros(band_limit);
        c.values[0] = radius * (T::lit(4.0) * T::pi()).sqrt();
        c
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, l: usize, m: i64) -> T {
        self[(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, value: T) {
        self[(l, m)] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (HarmonicIndex, T)> + '_ {
        HarmonicIndex::all(self.band_limit).zip(self.values.iter().copied())
    }

    /// Copy truncated or zero-padded to another band limit.
    pub fn with_band_limit(&self, band_limit: usize) -> Self {
        let mut out = Self::zeros(band_limit);
        let n = out.values.len().min(self.values.len());
        out.values[..n].copy_from_slice(&self.values[..n]);
        out
    }

    pub fn norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
    }

    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.band_limit, other.band_limit, "band limits differ");
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            band_limit: self.band_limit,
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        assert_eq!(self.band_limit, other.band_limit, "band limits differ");
        Self {
            band_limit: self.band_limit,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + s * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-T::one(), other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(T::one(), other)
    }

    /// CSV with header `l,m,value`, one row per coefficient in canonical
    /// order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,m,value\n");
        for (idx, v) in self.iter() {
            writeln!(s, "{},{},{}", idx.l, idx.m, v).unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("l,m,value") => {}
            other => {
                return Err(Error::Format(format!(
                    "expected header `l,m,value`, found {other:?}"
                )))
            }
        }
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Format(format!("row {}: expected 3 fields", row + 1)));
            }
            let parse_int = |s: &str| {
                s.parse::<i64>()
                    .map_err(|e| Error::Format(format!("row {}: {e}", row + 1)))
            };
            let (l, m) = (parse_int(fields[0])?, parse_int(fields[1])?);
            let (el, em) = index_of_position(row);
            if el != l || em != m {
                return Err(Error::Format(format!(
                    "row {}: found ({l},{m}), canonical order requires ({el},{em})",
                    row + 1
                )));
            }
            let v = fields[2]
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {}: {e}", row + 1)))?;
            values.push(T::lit(v));
        }
        let band_limit = (values.len() as f64).sqrt().round() as usize;
        if band_limit == 0 && values.is_empty() {
            return Err(Error::Format("no coefficients".into()));
        }
        Self::from_values(band_limit.saturating_sub(1), values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficient vector serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn index_of_position(k: usize) -> (i64, i64) {
    let mut l = (k as f64).sqrt() as i64;
    while (l + 1) * (l + 1) <= k as i64 {
        l += 1;
    }
    while l * l > k as i64 {
        l -= 1;
    }
    (l, k as i64 - l * l - l)
}

impl<T: Real> Index<(usize, i64)> for CoefficientVector<T> {
    type Output = T;
    fn index(&self, (l, m): (usize, i64)) -> &T {
        assert!(l <= self.band_limit && m.unsigned_abs() as usize <= l);
        &self.values[canonical_index(l, m)]
    }
}

impl<T: Real> IndexMut<(usize, i64)> for CoefficientVector<T> {
    fn index_mut(&mut self, (l, m): (usize, i64)) -> &mut T {
        assert!(l <= self.band_limit && m.unsigned_abs() as usize <= l);
        &mut self.values[canonical_index(l, m)]
    }
}
