//! Planar points and axis-aligned rectangles, in meters.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned rectangle given by its center and side lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Point2,
    /// Extent along x.
    pub length: f64,
    /// Extent along y.
    pub width: f64,
}

impl Rect {
    pub const fn new(center: Point2, length: f64, width: f64) -> Self {
        Self { center, length, width }
    }

    pub fn x_min(&self) -> f64 {
        self.center.x - 0.5 * self.length
    }

    pub fn x_max(&self) -> f64 {
        self.center.x + 0.5 * self.length
    }

    pub fn y_min(&self) -> f64 {
        self.center.y - 0.5 * self.width
    }

    pub fn y_max(&self) -> f64 {
        self.center.y + 0.5 * self.width
    }

    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    pub fn diagonal(&self) -> f64 {
        self.length.hypot(self.width)
    }

    /// Closed containment test.
    pub fn contains_closed(&self, p: &Point2) -> bool {
        p.x >= self.x_min() && p.x <= self.x_max() && p.y >= self.y_min() && p.y <= self.y_max()
    }

    /// Half-open containment, `[min, max)` on both axes.
    pub fn contains_half_open(&self, p: &Point2) -> bool {
        p.x >= self.x_min() && p.x < self.x_max() && p.y >= self.y_min() && p.y < self.y_max()
    }

    pub fn overlap_area(&self, other: &Rect) -> f64 {
        let dx = self.x_max().min(other.x_max()) - self.x_min().max(other.x_min());
        let dy = self.y_max().min(other.y_max()) - self.y_min().max(other.y_min());
        if dx <= 0.0 || dy <= 0.0 {
            0.0
        } else {
            dx * dy
        }
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x_min().max(other.x_min());
        let x1 = self.x_max().min(other.x_max());
        let y0 = self.y_min().max(other.y_min());
        let y1 = self.y_max().min(other.y_max());
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(Rect::new(Point2::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)), x1 - x0, y1 - y0))
    }

    /// Smallest distance from `p` to any point of the closed rectangle.
    pub fn distance_to(&self, p: &Point2) -> f64 {
        let dx = (self.x_min() - p.x).max(0.0).max(p.x - self.x_max());
        let dy = (self.y_min() - p.y).max(0.0).max(p.y - self.y_max());
        dx.hypot(dy)
    }

    pub fn scaled_about(&self, origin: Point2, factor: f64) -> Rect {
        Rect::new(
            Point2::new(
                origin.x + (self.center.x - origin.x) * factor,
                origin.y + (self.center.y - origin.y) * factor,
            ),
            self.length * factor,
            self.width * factor,
        )
    }
}
