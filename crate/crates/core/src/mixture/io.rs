//! Plain-text mixture export: a `K d` line, the weights, one mean per line and
//! one row-major covariance per line. Lines starting with `#` are comments.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mixture::MixtureState;
use crate::mvn::{CovMatrix, GaussianParams};
use crate::scalar::Scalar;

fn join<T: Scalar>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_mixture<T: Scalar, W: Write>(m: &MixtureState<T>, mut w: W) -> Result<()> {
    writeln!(w, "# K d")?;
    writeln!(w, "{} {}", m.k(), m.dim())?;
    writeln!(w, "# weights")?;
    writeln!(w, "{}", join(m.weights()))?;
    writeln!(w, "# means")?;
    for c in m.components() {
        writeln!(w, "{}", join(&c.mean))?;
    }
    writeln!(w, "# covariances, row-major")?;
    for c in m.components() {
        writeln!(w, "{}", join(c.cov.entries().as_slice()))?;
    }
    Ok(())
}

pub fn read_mixture<T: Scalar, R: BufRead>(r: R) -> Result<MixtureState<T>> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let vals = t
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidData(format!("line {}: bad number `{s}`", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(vals);
    }
    let bad = |msg: &str| Error::InvalidData(format!("mixture file: {msg}"));
    let head = rows.first().ok_or_else(|| bad("empty"))?;
    if head.len() != 2 {
        return Err(bad("first line must be `K d`"));
    }
    let (k, d) = (head[0] as usize, head[1] as usize);
    if k == 0 || d == 0 || rows.len() != 2 + 2 * k {
        return Err(bad("wrong number of lines for K and d"));
    }
    let conv = |v: &[f64]| v.iter().map(|&x| T::cst(x)).collect::<Vec<T>>();
    let weights = conv(&rows[1]);
    Error::check_dim(k, weights.len())?;
    let mut comps = Vec::with_capacity(k);
    for j in 0..k {
        let mean = conv(&rows[2 + j]);
        Error::check_dim(d, mean.len())?;
        let cov = conv(&rows[2 + k + j]);
        Error::check_dim(d * d, cov.len())?;
        comps.push(GaussianParams::new(
            mean,
            CovMatrix::new(Matrix::from_row_major(d, d, cov)?)?,
        )?);
    }
    MixtureState::new(weights, comps)
}
