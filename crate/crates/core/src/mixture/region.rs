use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::mixture::MixtureState;
use crate::scalar::Scalar;

/// Raster resolution used when none is given.
pub const DEFAULT_RASTER_RES: usize = 300;

/// 1-based region index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionLabel(usize);

impl RegionLabel {
    pub fn new(label: usize, k: usize) -> Result<Self> {
        if (1..=k).contains(&label) {
            Ok(RegionLabel(label))
        } else {
            Err(Error::Domain(format!(
                "region label {label} outside 1..={k}"
            )))
        }
    }

    pub fn from_index(index: usize) -> Self {
        RegionLabel(index + 1)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based component index.
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Component whose density (weights ignored) is largest at `x`; ties go to
/// the lowest index. `x.len()` must equal the mixture dimension.
pub fn region_assign<T: Scalar>(x: &[T], m: &MixtureState<T>) -> RegionLabel {
    let mut best = 0;
    let mut best_val = T::neg_infinity();
    for (k, c) in m.components().iter().enumerate() {
        let v = c.log_pdf_unchecked(x);
        if v > best_val {
            best = k;
            best_val = v;
        }
    }
    RegionLabel::from_index(best)
}

/// Bounds and resolution of a 2-D raster over the free coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RasterGrid<T> {
    pub x_range: (T, T),
    pub y_range: (T, T),
    pub res: usize,
}

impl<T: Scalar> RasterGrid<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (T, T)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(self.x_range) || !ok(self.y_range) {
            return Err(Error::BadGrid(
                "bounds must be finite with min < max".into(),
            ));
        }
        if self.res < 2 {
            return Err(Error::BadGrid(format!("resolution {} below 2", self.res)));
        }
        Ok(())
    }

    /// Evenly spaced coordinates from `lo` to `hi` inclusive.
    pub fn ticks((lo, hi): (T, T), res: usize) -> Vec<T> {
        let step = (hi - lo) / T::from_count(res - 1);
        (0..res).map(|i| lo + step * T::from_count(i)).collect()
    }
}

/// Row-major label grid: row `i` is the `i`-th x tick, column `j` the `j`-th y tick.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelGrid<T> {
    pub grid: RasterGrid<T>,
    pub labels: Vec<u16>,
}

impl<T: Scalar> LabelGrid<T> {
    pub fn label(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.grid.res + col]
    }

    pub fn fraction_with(&self, label: u16) -> f64 {
        self.labels.iter().filter(|&&l| l == label).count() as f64 / self.labels.len() as f64
    }

    /// Text export: `xmin xmax ymin ymax res`, then `res` rows of labels.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        writeln!(
            w,
            "{} {} {} {} {}",
            g.x_range.0, g.x_range.1, g.y_range.0, g.y_range.1, g.res
        )?;
        for row in self.labels.chunks(g.res) {
            let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::BadGrid("empty raster file".into()))??;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 {
            return Err(Error::BadGrid(format!("header `{header}` needs 5 fields")));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map(T::cst)
                .map_err(|_| Error::BadGrid(format!("bad bound `{s}`")))
        };
        let res: usize = h[4]
            .parse()
            .map_err(|_| Error::BadGrid(format!("bad resolution `{}`", h[4])))?;
        let grid = RasterGrid {
            x_range: (num(h[0])?, num(h[1])?),
            y_range: (num(h[2])?, num(h[3])?),
            res,
        };
        grid.validate()?;
        let mut labels = Vec::with_capacity(res * res);
        for (i, line) in lines.enumerate().take(res) {
            let line = line?;
            let row: Vec<u16> = line
                .split_whitespace()
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::BadGrid(format!("row {}: bad label `{s}`", i + 1)))
                })
                .collect::<Result<_>>()?;
            if row.len() != res {
                return Err(Error::BadGrid(format!(
                    "row {} has {} labels, expected {res}",
                    i + 1,
                    row.len()
                )));
            }
            labels.extend(row);
        }
        if labels.len() != res * res {
            return Err(Error::BadGrid("raster truncated".into()));
        }
        Ok(LabelGrid { grid, labels })
    }
}

/// Labels a 2-D slice of the region partition. `fixed` pins every coordinate
/// except two; the remaining two (in increasing index order) span the grid.
pub fn region_slice_raster<T: Scalar>(
    m: &MixtureState<T>,
    fixed: &[(usize, T)],
    grid: &RasterGrid<T>,
) -> Result<LabelGrid<T>> {
    grid.validate()?;
    let dim = m.dim();
    let mut point = vec![T::zero(); dim];
    let mut is_fixed = vec![false; dim];
    for &(i, v) in fixed {
        if i >= dim || is_fixed[i] {
            return Err(Error::BadGrid(format!(
                "fixed coordinate {i} invalid or repeated"
            )));
        }
        is_fixed[i] = true;
        point[i] = v;
    }
    let free: Vec<usize> = (0..dim).filter(|&i| !is_fixed[i]).collect();
    if free.len() != 2 {
        return Err(Error::BadGrid(format!(
            "slice must leave exactly two free coordinates, found {}",
            free.len()
        )));
    }
    let xs = RasterGrid::ticks(grid.x_range, grid.res);
    let ys = RasterGrid::ticks(grid.y_range, grid.res);
    let mut labels = Vec::with_capacity(grid.res * grid.res);
    for &x in &xs {
        point[free[0]] = x;
        for &y in &ys {
            point[free[1]] = y;
            labels.push(region_assign(&point, m).get() as u16);
        }
    }
    Ok(LabelGrid {
        grid: *grid,
        labels,
    })
}
