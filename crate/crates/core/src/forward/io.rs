//! Measurement-set CSV files.

use std::fmt::Write as _;

use super::{GradientTensor, InlineCrossline};
use crate::error::{Error, Result};
use crate::scalar::{Point3, Real};

/// Parses receiver locations from CSV with header `x,y,z`.
pub fn read_points_csv<T: Real>(text: &str) -> Result<Vec<Point3<T>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(|h| h.replace(' ', "")) {
        Some(h) if h == "x,y,z" => {}
        other => return Err(Error::Format(format!("expected header `x,y,z`, found {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("receiver row {}: {e}", i + 1)))?;
            if v.len() != 3 {
                return Err(Error::Format(format!("receiver row {}: expected 3 fields", i + 1)));
            }
            Ok([T::lit(v[0]), T::lit(v[1]), T::lit(v[2])])
        })
        .collect()
}

pub fn write_points_csv<T: Real>(points: &[Point3<T>]) -> String {
    let mut s = String::from("x,y,z\n");
    for p in points {
        writeln!(s, "{},{},{}", p[0], p[1], p[2]).unwrap();
    }
    s
}

/// `x,y,z,phi` rows.
pub fn potential_csv<T: Real>(points: &[Point3<T>], phi: &[T]) -> String {
    let mut s = String::from("x,y,z,phi\n");
    for (p, v) in points.iter().zip(phi) {
        writeln!(s, "{},{},{},{}", p[0], p[1], p[2], v).unwrap();
    }
    s
}

/// `x,y,z,Txx,Tyy,Tzz,Txy,Txz,Tyz,Mplus,Mcross,V` rows. Tensor components
/// are in the global frame; `Mplus`, `Mcross` and `V` in the local frame at
/// each receiver (z-axis radial).
pub fn gradient_csv<T: Real>(
    points: &[Point3<T>],
    tensors: &[GradientTensor<T>],
    local: &[InlineCrossline<T>],
) -> String {
    let mut s = String::from("x,y,z,Txx,Tyy,Tzz,Txy,Txz,Tyz,Mplus,Mcross,V\n");
    for ((p, t), o) in points.iter().zip(tensors).zip(local) {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p[0],
            p[1],
            p[2],
            t.xx,
            t.yy,
            t.zz,
            t.xy,
            t.xz,
            t.yz,
            o.m_plus,
            o.m_cross,
            o.v()
        )
        .unwrap();
    }
    s
}
