/// Axis-aligned rectangle, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }
}

/// Line segment, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub ax: f64,
    pub ay: f64,
    pub bx: f64,
    pub by: f64,
}

impl Segment {
    pub fn len(&self) -> f64 {
        ((self.bx - self.ax).powi(2) + (self.by - self.ay).powi(2)).sqrt()
    }

    /// Distance from a point to this segment.
    pub fn distance_to(&self, px: f64, py: f64) -> f64 {
        let ex = self.bx - self.ax;
        let ey = self.by - self.ay;
        let l2 = ex * ex + ey * ey;
        let t = if l2 > 0.0 {
            (((px - self.ax) * ex + (py - self.ay) * ey) / l2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let cx = self.ax + t * ex;
        let cy = self.ay + t * ey;
        ((px - cx).powi(2) + (py - cy).powi(2)).sqrt()
    }
}

/// Oriented square (the robot footprint): centre, half side, heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub cx: f64,
    pub cy: f64,
    pub half: f64,
    pub heading: f64,
}

impl Obb {
    pub fn corners(&self) -> [(f64, f64); 4] {
        let (s, c) = self.heading.sin_cos();
        let h = self.half;
        let mut out = [(0.0, 0.0); 4];
        for (k, (lx, ly)) in [(h, h), (h, -h), (-h, -h), (-h, h)].into_iter().enumerate() {
            out[k] = (self.cx + lx * c - ly * s, self.cy + lx * s + ly * c);
        }
        out
    }

    /// Closed intersection test against an axis-aligned box via the
    /// separating-axis theorem; touching counts as intersecting.
    pub fn intersects_aabb(&self, bx: f64, by: f64, hx: f64, hy: f64) -> bool {
        let corners = self.corners();
        let box_pts = [
            (bx + hx, by + hy),
            (bx + hx, by - hy),
            (bx - hx, by - hy),
            (bx - hx, by + hy),
        ];
        let (s, c) = self.heading.sin_cos();
        let axes = [(1.0, 0.0), (0.0, 1.0), (c, s), (-s, c)];
        for (ax, ay) in axes {
            let project = |pts: &[(f64, f64); 4]| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &(px, py) in pts {
                    let p = px * ax + py * ay;
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
                (lo, hi)
            };
            let (lo1, hi1) = project(&corners);
            let (lo2, hi2) = project(&box_pts);
            if hi1 < lo2 || hi2 < lo1 {
                return false;
            }
        }
        true
    }

    /// Closed intersection test against a segment: transform the segment into
    /// the box frame and clip against the axis-aligned square.
    pub fn intersects_segment(&self, seg: &Segment) -> bool {
        let (s, c) = self.heading.sin_cos();
        let to_local = |x: f64, y: f64| {
            let dx = x - self.cx;
            let dy = y - self.cy;
            (dx * c + dy * s, -dx * s + dy * c)
        };
        let (x0, y0) = to_local(seg.ax, seg.ay);
        let (x1, y1) = to_local(seg.bx, seg.by);
        segment_intersects_centered_square(x0, y0, x1, y1, self.half)
    }
}

/// Liang-Barsky clip of a segment against [-h, h]^2 (closed).
fn segment_intersects_centered_square(x0: f64, y0: f64, x1: f64, y1: f64, h: f64) -> bool {
    let dx = x1 - x0;
    let dy = y1 - y0;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-dx, x0 + h),
        (dx, h - x0),
        (-dy, y0 + h),
        (dy, h - y0),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obb_far_from_box_is_clear() {
        let r = Obb { cx: 0.0, cy: 0.0, half: 0.2, heading: 0.3 };
        assert!(!r.intersects_aabb(5.0, 5.0, 0.5, 0.5));
    }

    #[test]
    fn coincident_centres_collide() {
        let r = Obb { cx: 1.0, cy: 1.0, half: 0.2, heading: 1.0 };
        assert!(r.intersects_aabb(1.0, 1.0, 0.5, 0.5));
    }

    #[test]
    fn corner_graze_is_closed() {
        // Axis-aligned robot whose right edge exactly touches the box's left
        // edge: distance 0 must count as a collision.
        let r = Obb { cx: 0.0, cy: 0.0, half: 0.2, heading: 0.0 };
        assert!(r.intersects_aabb(0.7, 0.0, 0.5, 0.5));
        assert!(!r.intersects_aabb(0.7 + 1e-9, 0.0, 0.5, 0.5));
    }

    #[test]
    fn segment_tests() {
        let r = Obb { cx: 0.0, cy: 0.0, half: 0.2, heading: 0.0 };
        assert!(r.intersects_segment(&Segment { ax: -1.0, ay: 0.0, bx: 1.0, by: 0.0 }));
        assert!(r.intersects_segment(&Segment { ax: 0.2, ay: -1.0, bx: 0.2, by: 1.0 }));
        assert!(!r.intersects_segment(&Segment { ax: 0.21, ay: -1.0, bx: 0.21, by: 1.0 }));
    }

    #[test]
    fn rotated_diagonal_reach() {
        // Rotated 45 degrees, the square reaches sqrt(2)*half along x.
        let r = Obb { cx: 0.0, cy: 0.0, half: 0.2, heading: std::f64::consts::FRAC_PI_4 };
        let reach = 0.2 * std::f64::consts::SQRT_2;
        assert!(r.intersects_segment(&Segment {
            ax: reach - 1e-9,
            ay: -1.0,
            bx: reach - 1e-9,
            by: 1.0
        }));
        assert!(!r.intersects_segment(&Segment {
            ax: reach + 1e-6,
            ay: -1.0,
            bx: reach + 1e-6,
            by: 1.0
        }));
    }
}
