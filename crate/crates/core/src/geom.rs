use core::fmt;

/// Axis-aligned pixel rectangle: top-left corner plus extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    /// Build from exclusive corner coordinates `(x0, y0)..(x1, y1)`.
    pub fn from_corners(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self::new(x0, y0, x1.saturating_sub(x0), y1.saturating_sub(y0))
    }

    #[inline]
    pub fn x1(&self) -> u32 {
        self.x + self.w
    }

    #[inline]
    pub fn y1(&self) -> u32 {
        self.y + self.h
    }

    #[inline]
    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    /// Positive-area overlap.
    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.x1() && other.x < self.x1() && self.y < other.y1() && other.y < self.y1()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.x1() <= self.x1() && other.y1() <= self.y1()
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        self.x1() <= width && self.y1() <= height
    }

    /// Smallest rectangle covering both.
    pub fn union(&self, other: &Rect) -> Rect {
        let x0 = self.x.min(other.x);
        let y0 = self.y.min(other.y);
        Rect::from_corners(x0, y0, self.x1().max(other.x1()), self.y1().max(other.y1()))
    }

    /// Doubled center, so that centers stay integral.
    pub fn center2(&self) -> (i64, i64) {
        (
            2 * self.x as i64 + self.w as i64,
            2 * self.y as i64 + self.h as i64,
        )
    }

    /// Euclidean distance between centers.
    pub fn center_distance(&self, other: &Rect) -> f64 {
        let (ax, ay) = self.center2();
        let (bx, by) = other.center2();
        let dx = (ax - bx) as f64 / 2.0;
        let dy = (ay - by) as f64 / 2.0;
        crate::math::sqrt(dx * dx + dy * dy)
    }

    pub fn aspect(&self) -> f64 {
        self.w as f64 / self.h as f64
    }

    /// Whether `(w_other/h_other) / (w_self/h_self)` lies in `[1 - eps, 1 + eps]`.
    pub fn aspect_ratio_within(&self, other: &Rect, eps: f64) -> bool {
        // cross-multiplied to stay exact in integers where possible
        let num = other.w as f64 * self.h as f64;
        let den = other.h as f64 * self.w as f64;
        if den == 0.0 {
            return false;
        }
        let ratio = num / den;
        ratio >= 1.0 - eps && ratio <= 1.0 + eps
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}x{})", self.x, self.y, self.w, self.h)
    }
}
