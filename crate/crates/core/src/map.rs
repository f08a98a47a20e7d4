//! The discrete map `[0..M] x [0..N]`, its points, and the distance metrics
//! used by radius-style action rules.
//!
//! Points are enumerated x-major: `(0,0), (0,1), .., (0,N), (1,0), ..`. Every
//! canonical index in the crate (points, ground atoms, action-point pairs) is
//! derived from this order.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A lattice point on the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

impl Point {
    pub const fn new(x: u32, y: u32) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// The map `[0..width_bound] x [0..height_bound]`. Both bounds are inclusive,
/// so a `GridMap::new(0, 0)` has exactly one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridMap {
    width_bound: u32,
    height_bound: u32,
}

impl GridMap {
    pub const fn new(width_bound: u32, height_bound: u32) -> Self {
        GridMap {
            width_bound,
            height_bound,
        }
    }

    pub fn width_bound(&self) -> u32 {
        self.width_bound
    }

    pub fn height_bound(&self) -> u32 {
        self.height_bound
    }

    pub fn point_count(&self) -> usize {
        (self.width_bound as usize + 1) * (self.height_bound as usize + 1)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x <= self.width_bound && p.y <= self.height_bound
    }

    /// Canonical index of `p`. Caller guarantees `self.contains(p)`.
    pub fn point_index(&self, p: Point) -> usize {
        debug_assert!(self.contains(p), "{p} outside map");
        p.x as usize * (self.height_bound as usize + 1) + p.y as usize
    }

    pub fn point_at(&self, index: usize) -> Point {
        let rows = self.height_bound as usize + 1;
        Point::new((index / rows) as u32, (index % rows) as u32)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.point_count()).map(move |i| self.point_at(i))
    }

    /// Points `q` with `metric.distance(center, q) <= radius`, in canonical order.
    pub fn ball(&self, center: Point, radius: f64, metric: Metric) -> Vec<Point> {
        if radius < 0.0 {
            return Vec::new();
        }
        // every metric here dominates chebyshev, so the box bounds the ball
        let r = radius.floor().min(u32::MAX as f64) as u32;
        let x0 = center.x.saturating_sub(r);
        let x1 = center.x.saturating_add(r).min(self.width_bound);
        let y0 = center.y.saturating_sub(r);
        let y1 = center.y.saturating_add(r).min(self.height_bound);
        let mut out = Vec::new();
        for x in x0..=x1 {
            for y in y0..=y1 {
                let q = Point::new(x, y);
                if metric.within(center, q, radius) {
                    out.push(q);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

const DIST_EPS: f64 = 1e-9;

impl Metric {
    pub fn distance(self, p: Point, q: Point) -> f64 {
        let dx = (p.x as f64 - q.x as f64).abs();
        let dy = (p.y as f64 - q.y as f64).abs();
        match self {
            Metric::Euclidean => dx.hypot(dy),
            Metric::Manhattan => dx + dy,
            Metric::Chebyshev => dx.max(dy),
        }
    }

    pub fn within(self, p: Point, q: Point, radius: f64) -> bool {
        match self {
            // squared form keeps integer radii exact
            Metric::Euclidean => {
                let dx = p.x as f64 - q.x as f64;
                let dy = p.y as f64 - q.y as f64;
                dx * dx + dy * dy <= radius * radius + DIST_EPS
            }
            _ => self.distance(p, q) <= radius + DIST_EPS,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Chebyshev => "chebyshev",
        })
    }
}
