use std::fmt::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::PointLattice;
use crate::error::{domain, Error, Result};
use crate::forward::GravityConstant;
use crate::scalar::{norm3, sub3, Real};

/// Magic bytes opening the binary matrix layout.
pub const MATRIX_MAGIC: &[u8; 8] = b"GKFMAT01";

/// The point-mass Green's matrix `F_ij = -G / |r_i - r_j|`, receivers by
/// sources, so that `Phi = F m`.
#[derive(Debug, Clone)]
pub struct ForwardMatrix<T: Real> {
    pub matrix: DMatrix<T>,
    pub lattice: PointLattice<T>,
    pub gravity: GravityConstant<T>,
}

/// Assembles `F` in parallel over receivers. Only the coincidence of a
/// source with a receiver is an error here, so that deliberately
/// degenerate lattices (repeated receivers) can still be analyzed.
pub fn build_forward_matrix<T: Real>(lattice: &PointLattice<T>, gravity: GravityConstant<T>) -> Result<ForwardMatrix<T>> {
    let g = gravity.value();
    let rows: Vec<Vec<T>> = lattice
        .receivers
        .par_iter()
        .map(|x| {
            lattice
                .sources
                .iter()
                .map(|s| {
                    let d = norm3(&sub3(x, s));
                    if d > T::zero() {
                        Ok(-g / d)
                    } else {
                        domain(format!("receiver {x:?} coincides with a source"))
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let (m, n) = (lattice.receivers.len(), lattice.sources.len());
    Ok(ForwardMatrix {
        matrix: DMatrix::from_fn(m, n, |i, j| rows[i][j]),
        lattice: lattice.clone(),
        gravity,
    })
}

impl<T: Real> ForwardMatrix<T> {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Receiver potentials `F m` of the source masses `m`.
    pub fn apply(&self, masses: &[T]) -> Result<Vec<T>> {
        if masses.len() != self.cols() {
            return domain(format!("expected {} masses, got {}", self.cols(), masses.len()));
        }
        Ok((&self.matrix * DVector::from_column_slice(masses)).iter().copied().collect())
    }

    pub fn to_csv(&self) -> String {
        matrix_to_csv(&self.matrix, self.gravity.value())
    }
}

/// CSV layout: header `M,N,G`, one line with those values, then `M` rows of
/// `N` entries.
pub fn matrix_to_csv<T: Real>(matrix: &DMatrix<T>, gravity: T) -> String {
    let mut out = format!("M,N,G\n{},{},{:e}\n", matrix.nrows(), matrix.ncols(), gravity);
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:e}", matrix[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv<T: Real>(text: &str) -> Result<(DMatrix<T>, T)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "M,N,G" => {}
        _ => return Err(Error::Format("matrix CSV must start with the header M,N,G".into())),
    }
    let (ln, dims) = lines
        .next()
        .ok_or_else(|| Error::Format("matrix CSV is missing its dimension line".into()))?;
    let fields: Vec<&str> = dims.split(',').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(Error::Format(format!("line {}: expected M,N,G", ln + 1)));
    }
    let bad = |what: &str| Error::Format(format!("line {}: invalid {what}", ln + 1));
    let m: usize = fields[0].parse().map_err(|_| bad("M"))?;
    let n: usize = fields[1].parse().map_err(|_| bad("N"))?;
    let g: f64 = fields[2].parse().map_err(|_| bad("G"))?;
    let mut data = Vec::with_capacity(m * n);
    let mut row_count = 0;
    for (ln, line) in lines {
        row_count += 1;
        let before = data.len();
        for v in line.split(',') {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: invalid number {v:?}", ln + 1)))?;
            data.push(T::lit(x));
        }
        if data.len() - before != n {
            return Err(Error::Format(format!("line {}: expected {n} entries", ln + 1)));
        }
    }
    if row_count != m {
        return Err(Error::Format(format!("expected {m} matrix rows, found {row_count}")));
    }
    Ok((DMatrix::from_row_slice(m, n, &data), T::lit(g)))
}

/// Binary layout: the 8 magic bytes, `M` and `N` as little-endian `u32`,
/// then the entries as little-endian `f64`, row-major.
pub fn matrix_to_bytes<T: Real>(matrix: &DMatrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * matrix.len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(matrix.nrows() as u32).to_le_bytes());
    out.extend_from_slice(&(matrix.ncols() as u32).to_le_bytes());
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            out.extend_from_slice(&matrix[(i, j)].as_f64().to_le_bytes());
        }
    }
    out
}

pub fn matrix_from_bytes<T: Real>(bytes: &[u8]) -> Result<DMatrix<T>> {
    if bytes.len() < 16 || &bytes[..8] != MATRIX_MAGIC {
        return Err(Error::Format("not a binary forward matrix (bad magic)".into()));
    }
    let m = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if body.len() != 8 * m * n {
        return Err(Error::Format(format!(
            "binary matrix body has {} bytes, expected {}",
            body.len(),
            8 * m * n
        )));
    }
    let data: Vec<T> = body
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Ok(DMatrix::from_row_slice(m, n, &data))
}
