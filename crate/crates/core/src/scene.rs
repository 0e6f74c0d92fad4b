//! Region-of-interest pixel grid, target placement and the fine scatterer cloud.
//!
//! Pixels are indexed row-major with `y` as the outer (row) axis and `x` as the
//! inner (column) axis: `index = row * n_cols + col`. Every output file records
//! this ordering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};

/// Pixel ordering tag written to output metadata.
pub const PIXEL_ORDERING: &str = "row-major: index = row * n_cols + col, row along y, col along x";

const RATIO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelGrid {
    roi_length: f64,
    roi_width: f64,
    pixel_length: f64,
    pixel_width: f64,
    n_cols: usize,
    n_rows: usize,
    /// Lower-left corner of the ROI.
    origin: Point2,
}

fn integral_ratio(side: f64, pixel: f64) -> Result<usize> {
    let ratio = side / pixel;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > RATIO_TOLERANCE * ratio {
        return Err(Error::NonDivisibleRoi { side, pixel });
    }
    Ok(rounded as usize)
}

impl PixelGrid {
    /// Tessellates an `roi_length x roi_width` region into pixels of
    /// `pixel_length x pixel_width`, with the ROI's lower-left corner at the origin.
    pub fn new(roi_length: f64, roi_width: f64, pixel_length: f64, pixel_width: f64) -> Result<Self> {
        Self::with_origin(roi_length, roi_width, pixel_length, pixel_width, Point2::new(0.0, 0.0))
    }

    pub fn with_origin(
        roi_length: f64,
        roi_width: f64,
        pixel_length: f64,
        pixel_width: f64,
        origin: Point2,
    ) -> Result<Self> {
        for (name, v) in [
            ("roi length", roi_length),
            ("roi width", roi_width),
            ("pixel length", pixel_length),
            ("pixel width", pixel_width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        let n_cols = integral_ratio(roi_length, pixel_length)?;
        let n_rows = integral_ratio(roi_width, pixel_width)?;
        Ok(Self { roi_length, roi_width, pixel_length, pixel_width, n_cols, n_rows, origin })
    }

    pub fn roi_length(&self) -> f64 {
        self.roi_length
    }

    pub fn roi_width(&self) -> f64 {
        self.roi_width
    }

    pub fn pixel_length(&self) -> f64 {
        self.pixel_length
    }

    pub fn pixel_width(&self) -> f64 {
        self.pixel_width
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_pixels(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn roi(&self) -> Rect {
        Rect::new(
            Point2::new(self.origin.x + 0.5 * self.roi_length, self.origin.y + 0.5 * self.roi_width),
            self.roi_length,
            self.roi_width,
        )
    }

    pub fn pixel_diagonal(&self) -> f64 {
        self.pixel_length.hypot(self.pixel_width)
    }

    /// `(row, col)` of a pixel index.
    pub fn row_col(&self, index: usize) -> (usize, usize) {
        (index / self.n_cols, index % self.n_cols)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_cols + col
    }

    pub fn center(&self, index: usize) -> Point2 {
        let (row, col) = self.row_col(index);
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.pixel_length,
            self.origin.y + (row as f64 + 0.5) * self.pixel_width,
        )
    }

    pub fn pixel_rect(&self, index: usize) -> Rect {
        Rect::new(self.center(index), self.pixel_length, self.pixel_width)
    }

    /// Pixel containing `p`; points on the ROI's far edges belong to the last row/column.
    pub fn index_of(&self, p: &Point2) -> Option<usize> {
        if !self.roi().contains_closed(p) {
            return None;
        }
        let col = (((p.x - self.origin.x) / self.pixel_length).floor() as usize).min(self.n_cols - 1);
        let row = (((p.y - self.origin.y) / self.pixel_width).floor() as usize).min(self.n_rows - 1);
        Some(self.index(row, col))
    }

    /// Range of pixel indices along one axis that a `[lo, hi]` interval can touch.
    fn span(lo: f64, hi: f64, start: f64, pitch: f64, count: usize) -> std::ops::Range<usize> {
        let a = ((lo - start) / pitch).floor().max(0.0) as usize;
        let b = (((hi - start) / pitch).ceil().max(0.0) as usize).min(count);
        a.min(count)..b
    }

    /// Pixel indices whose rectangles may intersect `r`.
    pub fn pixels_touching(&self, r: &Rect) -> impl Iterator<Item = usize> + '_ {
        let cols = Self::span(r.x_min(), r.x_max(), self.origin.x, self.pixel_length, self.n_cols);
        let rows = Self::span(r.y_min(), r.y_max(), self.origin.y, self.pixel_width, self.n_rows);
        rows.flat_map(move |row| cols.clone().map(move |col| self.index(row, col)))
    }

    /// Uniformly rescales every length about the origin, keeping the pixel count.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::with_origin(
            self.roi_length * factor,
            self.roi_width * factor,
            self.pixel_length * factor,
            self.pixel_width * factor,
            Point2::new(self.origin.x * factor, self.origin.y * factor),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Point,
    Rectangle,
    /// Union of an `length x width` bar and its 90-degree rotation sharing one center.
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetShape {
    pub kind: TargetKind,
    pub center: Point2,
    #[serde(default, rename = "l_t", alias = "length")]
    pub length: f64,
    #[serde(default, rename = "w_t", alias = "width")]
    pub width: f64,
    #[serde(default = "unit_coefficient")]
    pub coefficient: f64,
}

fn unit_coefficient() -> f64 {
    1.0
}

impl TargetShape {
    pub fn point(center: Point2, coefficient: f64) -> Self {
        Self { kind: TargetKind::Point, center, length: 0.0, width: 0.0, coefficient }
    }

    pub fn rectangle(center: Point2, length: f64, width: f64, coefficient: f64) -> Self {
        Self { kind: TargetKind::Rectangle, center, length, width, coefficient }
    }

    pub fn cross(center: Point2, length: f64, width: f64, coefficient: f64) -> Self {
        Self { kind: TargetKind::Cross, center, length, width, coefficient }
    }

    /// Rectangles whose union is the target's support; empty for points.
    pub fn parts(&self) -> Vec<Rect> {
        match self.kind {
            TargetKind::Point => Vec::new(),
            TargetKind::Rectangle => vec![Rect::new(self.center, self.length, self.width)],
            TargetKind::Cross => vec![
                Rect::new(self.center, self.length, self.width),
                Rect::new(self.center, self.width, self.length),
            ],
        }
    }

    pub fn bounding_box(&self) -> Rect {
        match self.kind {
            TargetKind::Point => Rect::new(self.center, 0.0, 0.0),
            TargetKind::Rectangle => Rect::new(self.center, self.length, self.width),
            TargetKind::Cross => {
                let side = self.length.max(self.width);
                Rect::new(self.center, side, side)
            }
        }
    }

    /// Area of the target's support inside `r`.
    pub fn overlap_area(&self, r: &Rect) -> f64 {
        let parts = self.parts();
        match parts.as_slice() {
            [] => 0.0,
            [one] => one.overlap_area(r),
            [h, v] => {
                let shared = h.intersection(v).map_or(0.0, |c| c.overlap_area(r));
                h.overlap_area(r) + v.overlap_area(r) - shared
            }
            _ => unreachable!("targets have at most two parts"),
        }
    }

    pub fn contains(&self, p: &Point2) -> bool {
        self.parts().iter().any(|r| r.contains_half_open(p))
    }

    fn validate(&self, index: usize, roi: &Rect) -> Result<()> {
        if !(self.coefficient > 0.0 && self.coefficient <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "target {index} coefficient {} outside (0, 1]",
                self.coefficient
            )));
        }
        if self.kind != TargetKind::Point && !(self.length > 0.0 && self.width > 0.0) {
            return Err(Error::InvalidArgument(format!("target {index} needs positive length and width")));
        }
        let bb = self.bounding_box();
        let slack = 1e-12 * roi.length.max(roi.width);
        let inside = bb.x_min() >= roi.x_min() - slack
            && bb.x_max() <= roi.x_max() + slack
            && bb.y_min() >= roi.y_min() - slack
            && bb.y_max() <= roi.y_max() + slack;
        if inside {
            Ok(())
        } else {
            Err(Error::TargetOutOfBounds { index })
        }
    }

    pub fn scaled_about(&self, origin: Point2, factor: f64) -> Self {
        Self {
            kind: self.kind,
            center: Point2::new(
                origin.x + (self.center.x - origin.x) * factor,
                origin.y + (self.center.y - origin.y) * factor,
            ),
            length: self.length * factor,
            width: self.width * factor,
            coefficient: self.coefficient,
        }
    }
}

/// Pixelized scattering coefficients together with the targets that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterField {
    grid: PixelGrid,
    coefficients: Vec<f64>,
    occupancy: Vec<bool>,
    targets: Vec<TargetShape>,
}

/// Overlap fractions below this are treated as floating-point residue.
const OCCUPANCY_EPS: f64 = 1e-12;

impl ScatterField {
    /// Rasterizes targets onto the grid. Partially covered pixels receive the
    /// covered area fraction times the coefficient; overlapping targets take the
    /// maximum.
    pub fn place_targets(grid: &PixelGrid, targets: &[TargetShape]) -> Result<Self> {
        let roi = grid.roi();
        let n = grid.n_pixels();
        let mut coefficients = vec![0.0f64; n];
        let mut occupancy = vec![false; n];
        let pixel_area = grid.pixel_length() * grid.pixel_width();
        for (i, t) in targets.iter().enumerate() {
            t.validate(i, &roi)?;
            if t.kind == TargetKind::Point {
                let idx = grid.index_of(&t.center).ok_or(Error::TargetOutOfBounds { index: i })?;
                coefficients[idx] = coefficients[idx].max(t.coefficient);
                occupancy[idx] = true;
                continue;
            }
            for idx in grid.pixels_touching(&t.bounding_box()) {
                let fraction = t.overlap_area(&grid.pixel_rect(idx)) / pixel_area;
                if fraction > OCCUPANCY_EPS {
                    let value = (t.coefficient * fraction).clamp(0.0, 1.0);
                    coefficients[idx] = coefficients[idx].max(value);
                    occupancy[idx] = true;
                }
            }
        }
        Ok(Self { grid: grid.clone(), coefficients, occupancy, targets: targets.to_vec() })
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Ground-truth occupancy: any target overlap, regardless of coefficient.
    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn targets(&self) -> &[TargetShape] {
        &self.targets
    }

    /// Samples every target on a sub-pixel lattice of pitch
    /// `(pixel_length / subdivision, pixel_width / subdivision)`.
    pub fn rasterize_fine(&self, subdivision: usize) -> Result<FineCloud> {
        FineCloud::from_field(self, subdivision)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinePoint {
    pub position: Point2,
    pub weight: f64,
    /// Pixel that contains the point.
    pub pixel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineCloud {
    points: Vec<FinePoint>,
    subdivision: usize,
}

impl FineCloud {
    fn from_field(field: &ScatterField, subdivision: usize) -> Result<Self> {
        if subdivision == 0 {
            return Err(Error::InvalidArgument("subdivision must be at least 1".into()));
        }
        let grid = field.grid();
        let per_pixel = (subdivision * subdivision) as f64;
        let dx = grid.pixel_length() / subdivision as f64;
        let dy = grid.pixel_width() / subdivision as f64;
        let origin = grid.origin();
        let planar: Vec<&TargetShape> =
            field.targets().iter().filter(|t| t.kind != TargetKind::Point).collect();

        let mut points = Vec::new();
        for t in field.targets().iter().filter(|t| t.kind == TargetKind::Point) {
            let pixel = grid.index_of(&t.center).expect("validated on placement");
            points.push(FinePoint { position: t.center, weight: t.coefficient, pixel });
        }

        // Lattice cells covering the union of planar supports.
        let n_x = grid.n_cols() * subdivision;
        let n_y = grid.n_rows() * subdivision;
        let mut x_lo = n_x;
        let mut x_hi = 0;
        let mut y_lo = n_y;
        let mut y_hi = 0;
        for t in &planar {
            let bb = t.bounding_box();
            x_lo = x_lo.min(((bb.x_min() - origin.x) / dx).floor().max(0.0) as usize);
            x_hi = x_hi.max((((bb.x_max() - origin.x) / dx).ceil().max(0.0) as usize).min(n_x));
            y_lo = y_lo.min(((bb.y_min() - origin.y) / dy).floor().max(0.0) as usize);
            y_hi = y_hi.max((((bb.y_max() - origin.y) / dy).ceil().max(0.0) as usize).min(n_y));
        }
        for j in y_lo..y_hi {
            for i in x_lo..x_hi {
                let p = Point2::new(origin.x + (i as f64 + 0.5) * dx, origin.y + (j as f64 + 0.5) * dy);
                let coefficient = planar
                    .iter()
                    .filter(|t| t.contains(&p))
                    .map(|t| t.coefficient)
                    .fold(0.0_f64, f64::max);
                if coefficient > 0.0 {
                    let pixel = grid.index(j / subdivision, i / subdivision);
                    points.push(FinePoint { position: p, weight: coefficient / per_pixel, pixel });
                }
            }
        }
        Ok(Self { points, subdivision })
    }

    pub fn from_points(points: Vec<FinePoint>, subdivision: usize) -> Self {
        Self { points, subdivision }
    }

    pub fn points(&self) -> &[FinePoint] {
        &self.points
    }

    pub fn subdivision(&self) -> usize {
        self.subdivision
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }
}
