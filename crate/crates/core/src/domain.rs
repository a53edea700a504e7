//! Grids, fields, capacity frames, masks and the row/column segmentation of
//! irregular domains.
//!
//! Storage is row-major with row 0 the northernmost row. The `x` direction
//! runs along a row (column index), `y` along a column (row index).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::LineMut;
use crate::{Error, Result};

/// Uniform lattice with equal spacing in both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Parameter(format!("grid must be non-empty, got {nx}x{ny}")));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Parameter(format!("grid spacing must be positive, got {dx}")));
        }
        Ok(Self { nx, ny, dx })
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nx + col
    }

    /// Length of the longest grid line, `max(nx, ny)`.
    pub fn max_line(&self) -> usize {
        self.nx.max(self.ny)
    }

    /// Number of lines along `axis` (rows for `X`, columns for `Y`).
    pub fn lines(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.ny,
            Axis::Y => self.nx,
        }
    }

    /// Number of cells in one line along `axis`.
    pub fn line_len(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
        }
    }

    /// Flat index of position `pos` within line `line` along `axis`.
    #[inline]
    pub fn line_index(&self, axis: Axis, line: usize, pos: usize) -> usize {
        match axis {
            Axis::X => line * self.nx + pos,
            Axis::Y => pos * self.nx + line,
        }
    }

    fn same_shape(&self, other: &GridSpec) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dx == other.dx
    }

    pub fn ensure_matches(&self, other: &GridSpec) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} (dx={}) vs {}x{} (dx={})",
                self.nx, self.ny, self.dx, other.nx, other.ny, other.dx
            )))
        }
    }
}

/// Sweep direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Along rows.
    X,
    /// Along columns.
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// Population density on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.cells()] }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite density at cell {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(row, col)` at every cell.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.cells());
        for row in 0..grid.ny {
            for col in 0..grid.nx {
                values.push(f(row, col));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.grid.index(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let i = self.grid.index(row, col);
        self.values[i] = value;
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Zeroes every water cell and returns how many were nonzero.
    pub fn apply_mask(&mut self, mask: &MapMask) -> Result<usize> {
        self.grid.ensure_matches(&mask.grid)?;
        let mut cleared = 0;
        for (v, &land) in self.values.iter_mut().zip(&mask.habitable) {
            if !land && *v != 0.0 {
                *v = 0.0;
                cleared += 1;
            }
        }
        Ok(cleared)
    }

    /// Values of one row (`X`) or column (`Y`).
    pub fn line(&self, axis: Axis, line: usize) -> Vec<f64> {
        (0..self.grid.line_len(axis))
            .map(|p| self.values[self.grid.line_index(axis, line, p)])
            .collect()
    }
}

/// Carrying capacity `K` at one point in time: 0 on water, (0, 1] on land.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityFrame {
    grid: GridSpec,
    time: f64,
    values: Vec<f64>,
}

impl CapacityFrame {
    pub fn new(grid: GridSpec, time: f64, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if !time.is_finite() {
            return Err(Error::Parameter(format!("frame time must be finite, got {time}")));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Domain(format!(
                "capacity {} at cell {i} outside [0, 1]",
                values[i]
            )));
        }
        Ok(Self { grid, time, values })
    }

    pub fn uniform(grid: GridSpec, time: f64, value: f64) -> Result<Self> {
        Self::new(grid, time, vec![value; grid.cells()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.grid.index(row, col)]
    }
}

/// Habitable (land) versus water cells.
#[derive(Debug, Clone, PartialEq)]
pub struct MapMask {
    grid: GridSpec,
    habitable: Vec<bool>,
}

impl MapMask {
    pub fn new(grid: GridSpec, habitable: Vec<bool>) -> Result<Self> {
        check_len(&grid, habitable.len())?;
        Ok(Self { grid, habitable })
    }

    pub fn all_land(grid: GridSpec) -> Self {
        Self { grid, habitable: vec![true; grid.cells()] }
    }

    /// Land wherever `K > 0`.
    pub fn from_capacity(frame: &CapacityFrame) -> Self {
        Self {
            grid: frame.grid,
            habitable: frame.values.iter().map(|&k| k > 0.0).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cells(&self) -> &[bool] {
        &self.habitable
    }

    #[inline]
    pub fn is_habitable(&self, row: usize, col: usize) -> bool {
        self.habitable[self.grid.index(row, col)]
    }

    pub fn land_count(&self) -> usize {
        self.habitable.iter().filter(|&&b| b).count()
    }

    /// Checks `K > 0` exactly on land.
    pub fn check_capacity(&self, frame: &CapacityFrame) -> Result<()> {
        self.grid.ensure_matches(&frame.grid)?;
        for (i, (&land, &k)) in self.habitable.iter().zip(&frame.values).enumerate() {
            if land != (k > 0.0) {
                let (row, col) = (i / self.grid.nx, i % self.grid.nx);
                return Err(Error::Domain(format!(
                    "capacity {k} at row {row}, col {col} disagrees with mask (land = {land})"
                )));
            }
        }
        Ok(())
    }
}

fn check_len(grid: &GridSpec, len: usize) -> Result<()> {
    if len != grid.cells() {
        return Err(Error::GridMismatch(format!(
            "expected {} values for {}x{} grid, got {len}",
            grid.cells(),
            grid.nx,
            grid.ny
        )));
    }
    Ok(())
}

/// Maximal run of habitable cells within one line; both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Compressed per-row and per-column segment lists.
///
/// Segments of row `i` are `row_segments[row_offsets[i]..row_offsets[i + 1]]`,
/// likewise for columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    nx: usize,
    ny: usize,
    row_offsets: Vec<usize>,
    row_segments: Vec<Segment>,
    col_offsets: Vec<usize>,
    col_segments: Vec<Segment>,
}

impl Segmentation {
    pub fn rows(&self) -> usize {
        self.ny
    }

    pub fn columns(&self) -> usize {
        self.nx
    }

    pub fn row(&self, row: usize) -> &[Segment] {
        &self.row_segments[self.row_offsets[row]..self.row_offsets[row + 1]]
    }

    pub fn column(&self, col: usize) -> &[Segment] {
        &self.col_segments[self.col_offsets[col]..self.col_offsets[col + 1]]
    }

    /// Segments of line `line` along `axis`.
    pub fn line(&self, axis: Axis, line: usize) -> &[Segment] {
        match axis {
            Axis::X => self.row(line),
            Axis::Y => self.column(line),
        }
    }

    /// Per-row segment counts.
    pub fn row_counts(&self) -> Vec<usize> {
        self.row_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Per-column segment counts.
    pub fn column_counts(&self) -> Vec<usize> {
        self.col_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn total_segments(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.row_segments.len(),
            Axis::Y => self.col_segments.len(),
        }
    }

    /// Total cells covered by the segments along `axis`.
    pub fn covered_cells(&self, axis: Axis) -> usize {
        let segs = match axis {
            Axis::X => &self.row_segments,
            Axis::Y => &self.col_segments,
        };
        segs.iter().map(Segment::len).sum()
    }
}

/// Splits every row and column of `mask` into maximal habitable runs.
pub fn segment_mask(mask: &MapMask) -> Segmentation {
    let g = mask.grid;
    let (row_offsets, row_segments) = runs(g.ny, g.nx, |line, p| mask.habitable[g.index(line, p)]);
    let (col_offsets, col_segments) = runs(g.nx, g.ny, |line, p| mask.habitable[g.index(p, line)]);
    Segmentation { nx: g.nx, ny: g.ny, row_offsets, row_segments, col_offsets, col_segments }
}

fn runs(
    lines: usize,
    len: usize,
    land: impl Fn(usize, usize) -> bool,
) -> (Vec<usize>, Vec<Segment>) {
    let mut offsets = Vec::with_capacity(lines + 1);
    let mut segments = Vec::new();
    offsets.push(0);
    for line in 0..lines {
        let mut open: Option<usize> = None;
        for p in 0..len {
            match (land(line, p), open) {
                (true, None) => open = Some(p),
                (false, Some(s)) => {
                    segments.push(Segment { start: s, end: p - 1 });
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(s) = open {
            segments.push(Segment { start: s, end: len - 1 });
        }
        offsets.push(segments.len());
    }
    (offsets, segments)
}

fn check_segment(grid: &GridSpec, axis: Axis, line: usize, seg: Segment) -> Result<()> {
    if line >= grid.lines(axis) {
        return Err(Error::Index(format!("{axis:?} line {line} of {}", grid.lines(axis))));
    }
    if seg.start > seg.end || seg.end >= grid.line_len(axis) {
        return Err(Error::Index(format!(
            "segment {}..={} in line of length {}",
            seg.start,
            seg.end,
            grid.line_len(axis)
        )));
    }
    Ok(())
}

fn extract_padded(
    grid: &GridSpec,
    values: &[f64],
    axis: Axis,
    line: usize,
    seg: Segment,
    ghost: f64,
) -> Result<Vec<f64>> {
    check_segment(grid, axis, line, seg)?;
    let mut out = Vec::with_capacity(seg.len() + 2);
    out.push(ghost);
    out.extend((seg.start..=seg.end).map(|p| values[grid.line_index(axis, line, p)]));
    out.push(ghost);
    Ok(out)
}

/// Segment values with a zero ghost cell at each end (`u = 0` boundary).
pub fn extract_segment(field: &Field2D, axis: Axis, line: usize, seg: Segment) -> Result<Vec<f64>> {
    extract_padded(&field.grid, &field.values, axis, line, seg, 0.0)
}

/// Segment capacities with a ghost value of 1 at each end.
pub fn extract_capacity_segment(
    frame: &CapacityFrame,
    axis: Axis,
    line: usize,
    seg: Segment,
) -> Result<Vec<f64>> {
    extract_padded(&frame.grid, &frame.values, axis, line, seg, 1.0)
}

/// Writes the interior of a padded segment vector back into the field.
pub fn write_segment(
    field: &mut Field2D,
    axis: Axis,
    line: usize,
    seg: Segment,
    padded: &[f64],
) -> Result<()> {
    check_segment(&field.grid, axis, line, seg)?;
    if padded.len() != seg.len() + 2 {
        return Err(Error::Index(format!(
            "padded vector of length {} for segment of length {}",
            padded.len(),
            seg.len()
        )));
    }
    for (k, p) in (seg.start..=seg.end).enumerate() {
        let i = field.grid.line_index(axis, line, p);
        field.values[i] = padded[k + 1];
    }
    Ok(())
}

/// One column of a row-major buffer viewed as a line.
pub struct StridedLine<'a> {
    data: &'a mut [f64],
    offset: usize,
    stride: usize,
    len: usize,
}

impl<'a> StridedLine<'a> {
    pub fn new(data: &'a mut [f64], offset: usize, stride: usize, len: usize) -> Self {
        assert!(len == 0 || offset + (len - 1) * stride < data.len(), "strided line out of bounds");
        Self { data, offset, stride, len }
    }
}

impl LineMut for StridedLine<'_> {
    fn len(&self) -> usize {
        self.len
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        self.data[self.offset + i * self.stride]
    }

    #[inline]
    fn set(&mut self, i: usize, value: f64) {
        self.data[self.offset + i * self.stride] = value;
    }
}
