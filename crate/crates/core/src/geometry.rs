use serde::{Deserialize, Serialize};

/// Smallest width or height a normalized box may have.
pub const MIN_EXTENT: f64 = 1e-3;

/// Axis-aligned box stored as center and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self { cx, cy, w, h }
    }

    pub fn from_corners(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        let (l, r) = (x1.min(x2), x1.max(x2));
        let (t, b) = (y1.min(y2), y1.max(y2));
        Self {
            cx: (l + r) / 2.0,
            cy: (t + b) / 2.0,
            w: r - l,
            h: b - t,
        }
    }

    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Divides by the frame size, keeps the center inside `[0, 1]` and the
    /// extents within `[MIN_EXTENT, 1]`.
    pub fn normalized(&self, frame_w: f64, frame_h: f64) -> Self {
        Self {
            cx: (self.cx / frame_w).clamp(0.0, 1.0),
            cy: (self.cy / frame_h).clamp(0.0, 1.0),
            w: (self.w / frame_w).clamp(MIN_EXTENT, 1.0),
            h: (self.h / frame_h).clamp(MIN_EXTENT, 1.0),
        }
    }

    /// Extents raised to at least `MIN_EXTENT`.
    pub fn clamped(&self) -> Self {
        Self {
            w: self.w.max(MIN_EXTENT),
            h: self.h.max(MIN_EXTENT),
            ..*self
        }
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = (self.right().min(other.right()) - self.left().max(other.left())).max(0.0);
        let h = (self.bottom().min(other.bottom()) - self.top().max(other.top())).max(0.0);
        w * h
    }

    /// Fraction of this box's area that lies inside `outer`.
    pub fn contained_fraction(&self, outer: &BBox) -> f64 {
        let area = self.area();
        if area <= 0.0 {
            return 0.0;
        }
        self.intersection_area(outer) / area
    }

    pub fn center_distance(&self, other: &BBox) -> f64 {
        (self.cx - other.cx).hypot(self.cy - other.cy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_and_edges() {
        let b = BBox::from_corners(200.0, 150.0, 100.0, 100.0);
        assert_eq!(b, BBox::new(150.0, 125.0, 100.0, 50.0));
        assert_eq!((b.left(), b.right(), b.top(), b.bottom()), (100.0, 200.0, 100.0, 150.0));
    }

    #[test]
    fn normalization_clamps() {
        let b = BBox::new(500.0, -3.0, 0.0, 2000.0).normalized(450.0, 800.0);
        assert_eq!(b, BBox::new(1.0, 0.0, MIN_EXTENT, 1.0));
    }

    #[test]
    fn containment() {
        let outer = BBox::from_corners(0.1, 0.1, 0.5, 0.2);
        let inside = BBox::from_corners(0.2, 0.12, 0.4, 0.18);
        let half = BBox::from_corners(0.4, 0.12, 0.6, 0.18);
        assert!((inside.contained_fraction(&outer) - 1.0).abs() < 1e-12);
        assert!((half.contained_fraction(&outer) - 0.5).abs() < 1e-12);
        assert_eq!(BBox::new(0.0, 0.0, 0.0, 1.0).contained_fraction(&outer), 0.0);
    }
}
