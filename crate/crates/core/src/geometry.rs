//! Observation windows (rectangles and convex polygons), areas, containment,
//! and convex hulls of point sets.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point in the plane. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist2(&self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point { x: v[0], y: v[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Cross product of (a - o) and (b - o); positive for a counterclockwise turn.
fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// An observation window: an axis-aligned rectangle or a strictly convex
/// polygon (counterclockwise vertices, first vertex lexicographically
/// minimal). The region is closed: boundary points count as contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub enum Window {
    Rect {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    Polygon {
        vertices: Vec<Point>,
    },
}

/// Wire form: `{type:"rect", xmin, xmax, ymin, ymax}` or
/// `{type:"polygon", vertices:[[x,y],...]}`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum WindowRepr {
    Rect {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

impl TryFrom<WindowRepr> for Window {
    type Error = Error;

    fn try_from(r: WindowRepr) -> Result<Self> {
        match r {
            WindowRepr::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => Window::rect(xmin, xmax, ymin, ymax),
            WindowRepr::Polygon { vertices } => {
                Window::convex_polygon(vertices.into_iter().map(Point::from).collect())
            }
        }
    }
}

impl From<Window> for WindowRepr {
    fn from(w: Window) -> Self {
        match w {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => WindowRepr::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            },
            Window::Polygon { vertices } => WindowRepr::Polygon {
                vertices: vertices.into_iter().map(<[f64; 2]>::from).collect(),
            },
        }
    }
}

impl Window {
    /// Axis-aligned rectangle; requires `xmin < xmax` and `ymin < ymax`.
    pub fn rect(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidWindow("rectangle bounds must be finite".into()));
        }
        if xmin >= xmax || ymin >= ymax {
            return Err(Error::InvalidWindow(format!(
                "rectangle requires xmin < xmax and ymin < ymax, got [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Window::Rect {
            xmin,
            xmax,
            ymin,
            ymax,
        })
    }

    /// The unit square `[0,1] x [0,1]`.
    pub fn unit_square() -> Self {
        Window::Rect {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        }
    }

    /// Strictly convex polygon. Accepts either orientation, removes repeated
    /// vertices, and normalizes to counterclockwise order starting at the
    /// lexicographically smallest vertex.
    pub fn convex_polygon(vertices: Vec<Point>) -> Result<Self> {
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidWindow("polygon vertices must be finite".into()));
        }
        let mut vs = vertices;
        // Drop consecutive duplicates, including a repeated closing vertex.
        vs.dedup_by(|a, b| a == b);
        while vs.len() > 1 && vs.first() == vs.last() {
            vs.pop();
        }
        if vs.len() < 3 {
            return Err(Error::InvalidWindow(
                "polygon requires at least 3 distinct vertices".into(),
            ));
        }
        if signed_area(&vs) < 0.0 {
            vs.reverse();
        }
        let area = signed_area(&vs);
        if !(area > 0.0) {
            return Err(Error::InvalidWindow("polygon area must be positive".into()));
        }
        let n = vs.len();
        for i in 0..n {
            let o = vs[i];
            let a = vs[(i + 1) % n];
            let b = vs[(i + 2) % n];
            if cross(o, a, b) <= 0.0 {
                return Err(Error::InvalidWindow(format!(
                    "polygon is not strictly convex at vertex ({}, {})",
                    a.x, a.y
                )));
            }
        }
        // Rotate so the lexicographically smallest vertex comes first.
        let start = (0..n)
            .min_by(|&i, &j| {
                (vs[i].x, vs[i].y)
                    .partial_cmp(&(vs[j].x, vs[j].y))
                    .unwrap()
            })
            .unwrap();
        vs.rotate_left(start);
        Ok(Window::Polygon { vertices: vs })
    }

    /// Lebesgue measure of the window.
    pub fn area(&self) -> f64 {
        match self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => (xmax - xmin) * (ymax - ymin),
            Window::Polygon { vertices } => signed_area(vertices),
        }
    }

    /// Closed containment test. Polygon edges use a small relative tolerance
    /// so points on the boundary are retained.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => p.x >= *xmin && p.x <= *xmax && p.y >= *ymin && p.y <= *ymax,
            Window::Polygon { vertices } => {
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let m = [a.x, a.y, b.x, b.y, p.x, p.y]
                        .iter()
                        .fold(1.0f64, |acc, v| acc.max(v.abs()));
                    if cross(a, b, p) < -1e-12 * m * m {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Axis-aligned bounding box as `(xmin, xmax, ymin, ymax)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => (*xmin, *xmax, *ymin, *ymax),
            Window::Polygon { vertices } => {
                let mut xmin = f64::INFINITY;
                let mut xmax = f64::NEG_INFINITY;
                let mut ymin = f64::INFINITY;
                let mut ymax = f64::NEG_INFINITY;
                for v in vertices {
                    xmin = xmin.min(v.x);
                    xmax = xmax.max(v.x);
                    ymin = ymin.min(v.y);
                    ymax = ymax.max(v.y);
                }
                (xmin, xmax, ymin, ymax)
            }
        }
    }

    /// Length of the shorter side of the bounding box.
    pub fn shorter_side(&self) -> f64 {
        let (xmin, xmax, ymin, ymax) = self.bounding_box();
        (xmax - xmin).min(ymax - ymin)
    }
}

/// Shoelace area; positive for counterclockwise vertex order.
fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

/// Convex hull of a finite point set (monotone chain). Collinear boundary
/// points are removed; the result is counterclockwise starting from the
/// lexicographically smallest vertex.
pub fn convex_hull(points: &[Point]) -> Result<Window> {
    let mut pts: Vec<Point> = points
        .iter()
        .copied()
        .filter(|p| p.x.is_finite() && p.y.is_finite())
        .collect();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::DegenerateInput(
            "convex hull requires at least 3 distinct points".into(),
        ));
    }

    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    if lower.len() < 3 {
        return Err(Error::DegenerateInput("all points are collinear".into()));
    }
    // Monotone chain already yields counterclockwise order starting at the
    // lexicographic minimum.
    Ok(Window::Polygon { vertices: lower })
}
