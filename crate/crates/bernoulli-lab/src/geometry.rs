//! Admissible domains and their uniform grid discretizations.
//!
//! A [`DomainSpec`] describes an open domain D in 1 or 2 dimensions
//! (interval, rectangle, disk, annulus, convex polygon, or the region under a
//! sampled Lipschitz graph). [`Grid::build`] lays a uniform lattice of cell
//! centers over its bounding box and classifies every cell as interior,
//! boundary, or exterior:
//!
//! * a cell is **interior** when its center lies in the open domain;
//! * a cell is **boundary** when it is not interior but one of its
//!   8-neighborhood stencil cells is (in 1D, one of its two neighbors);
//! * everything else is **exterior**.
//!
//! The 8-neighborhood closure guarantees that every interior cell sees only
//! interior or boundary cells in its 5-point solver stencil, and that the
//! boundary ring of an axis-aligned rectangle includes its corner cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of the domain, one of the supported shapes.
///
/// Serializes as `{"kind": ..., "params": {...}, "dimension": d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: Shape,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Shape {
    /// 1D interval (a, b).
    Interval { a: f64, b: f64 },
    /// Axis-aligned open rectangle (x0, x1) x (y0, y1).
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { center: [f64; 2], radius: f64 },
    /// Open annulus inner < |x - center| < outer.
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    /// Vertices in counterclockwise convex position.
    ConvexPolygon { vertices: Vec<[f64; 2]> },
    /// Region between a floor level and a piecewise-linear graph y = f(x)
    /// sampled at increasing abscissae. `direction = "+y"` (default) puts the
    /// domain below the graph; `"-y"` mirrors it above.
    LipschitzGraph {
        xs: Vec<f64>,
        ys: Vec<f64>,
        floor: f64,
        #[serde(default = "default_direction")]
        direction: String,
    },
}

fn default_direction() -> String {
    "+y".to_string()
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64) -> Self {
        DomainSpec {
            shape: Shape::Interval { a, b },
            dimension: 1,
        }
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        DomainSpec {
            shape: Shape::Rectangle { x0, x1, y0, y1 },
            dimension: 2,
        }
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 1.0, 0.0, 1.0)
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        DomainSpec {
            shape: Shape::Disk { center, radius },
            dimension: 2,
        }
    }

    pub fn annulus(center: [f64; 2], inner: f64, outer: f64) -> Self {
        DomainSpec {
            shape: Shape::Annulus {
                center,
                inner,
                outer,
            },
            dimension: 2,
        }
    }

    pub fn convex_polygon(vertices: Vec<[f64; 2]>) -> Self {
        DomainSpec {
            shape: Shape::ConvexPolygon { vertices },
            dimension: 2,
        }
    }

    pub fn lipschitz_graph(xs: Vec<f64>, ys: Vec<f64>, floor: f64) -> Self {
        DomainSpec {
            shape: Shape::LipschitzGraph {
                xs,
                ys,
                floor,
                direction: default_direction(),
            },
            dimension: 2,
        }
    }

    /// Checks the structural invariants: positive measure, convex position of
    /// polygon vertices, single-valued finite-slope graphs, inner < outer.
    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            Shape::Interval { a, b } => {
                if self.dimension != 1 {
                    return Err(Error::Validation("interval requires dimension 1".into()));
                }
                if !(b > a) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::Validation(format!(
                        "interval ({a}, {b}) has nonpositive length"
                    )));
                }
            }
            Shape::Rectangle { x0, x1, y0, y1 } => {
                self.require_2d()?;
                if !(x1 > x0 && y1 > y0) {
                    return Err(Error::Validation("rectangle has nonpositive extent".into()));
                }
            }
            Shape::Disk { radius, .. } => {
                self.require_2d()?;
                if !(*radius > 0.0) {
                    return Err(Error::Validation("disk radius must be positive".into()));
                }
            }
            Shape::Annulus { inner, outer, .. } => {
                self.require_2d()?;
                if !(*inner > 0.0 && outer > inner) {
                    return Err(Error::Validation(format!(
                        "annulus radii must satisfy 0 < inner < outer, got {inner}, {outer}"
                    )));
                }
            }
            Shape::ConvexPolygon { vertices } => {
                self.require_2d()?;
                if vertices.len() < 3 {
                    return Err(Error::Validation("polygon needs at least 3 vertices".into()));
                }
                // Convex position: all cross products of consecutive edge
                // pairs share a sign (counterclockwise turns).
                let n = vertices.len();
                for i in 0..n {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    let r = vertices[(i + 2) % n];
                    let cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
                    if cross <= 0.0 {
                        return Err(Error::Validation(format!(
                            "polygon vertices are not in counterclockwise convex position \
                             (turn at vertex {} has cross product {cross})",
                            (i + 1) % n
                        )));
                    }
                }
            }
            Shape::LipschitzGraph {
                xs, ys, floor, direction,
            } => {
                self.require_2d()?;
                if xs.len() != ys.len() || xs.len() < 2 {
                    return Err(Error::Validation(
                        "graph needs matching xs/ys with at least 2 samples".into(),
                    ));
                }
                if direction != "+y" && direction != "-y" {
                    return Err(Error::Validation(format!(
                        "graph direction must be \"+y\" or \"-y\", got {direction:?}"
                    )));
                }
                for w in xs.windows(2) {
                    if !(w[1] > w[0]) {
                        return Err(Error::Validation(
                            "graph sample abscissae must be strictly increasing".into(),
                        ));
                    }
                }
                if !ys.iter().all(|y| y.is_finite()) {
                    return Err(Error::Validation("graph samples must be finite".into()));
                }
                let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
                let bad = match direction.as_str() {
                    "+y" => !(lo > *floor),
                    _ => !(*floor > ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
                };
                if bad {
                    return Err(Error::Validation(
                        "graph floor must leave positive thickness everywhere".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn require_2d(&self) -> Result<()> {
        if self.dimension != 2 {
            return Err(Error::Validation(format!(
                "{:?} requires dimension 2",
                std::mem::discriminant(&self.shape)
            )));
        }
        Ok(())
    }

    /// Open-set membership test at a point.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match &self.shape {
            Shape::Interval { a, b } => p[0] > *a && p[0] < *b,
            Shape::Rectangle { x0, x1, y0, y1 } => {
                p[0] > *x0 && p[0] < *x1 && p[1] > *y0 && p[1] < *y1
            }
            Shape::Disk { center, radius } => dist(p, *center) < *radius,
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = dist(p, *center);
                r > *inner && r < *outer
            }
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) > 0.0
                })
            }
            Shape::LipschitzGraph {
                xs, ys, floor, direction,
            } => {
                if p[0] <= xs[0] || p[0] >= *xs.last().unwrap() {
                    return false;
                }
                let g = interp_graph(xs, ys, p[0]);
                if direction == "+y" {
                    p[1] > *floor && p[1] < g
                } else {
                    p[1] < *floor && p[1] > g
                }
            }
        }
    }

    /// Axis-aligned bounding box as (lo, hi) corners.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match &self.shape {
            Shape::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Shape::Rectangle { x0, x1, y0, y1 } => ([*x0, *y0], [*x1, *y1]),
            Shape::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Shape::Annulus { center, outer, .. } => (
                [center[0] - outer, center[1] - outer],
                [center[0] + outer, center[1] + outer],
            ),
            Shape::ConvexPolygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Shape::LipschitzGraph {
                xs, ys, floor, direction,
            } => {
                let ylo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
                let yhi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if direction == "+y" {
                    ([xs[0], *floor], [*xs.last().unwrap(), yhi])
                } else {
                    ([xs[0], ylo], [*xs.last().unwrap(), *floor])
                }
            }
        }
    }

    /// Analytic d-dimensional measure where a closed form exists (used by the
    /// grid refinement tests). Returns `None` for graph domains.
    pub fn analytic_measure(&self) -> Option<f64> {
        match &self.shape {
            Shape::Interval { a, b } => Some(b - a),
            Shape::Rectangle { x0, x1, y0, y1 } => Some((x1 - x0) * (y1 - y0)),
            Shape::Disk { radius, .. } => Some(std::f64::consts::PI * radius * radius),
            Shape::Annulus { inner, outer, .. } => {
                Some(std::f64::consts::PI * (outer * outer - inner * inner))
            }
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut twice_area = 0.0;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    twice_area += a[0] * b[1] - b[0] * a[1];
                }
                Some(0.5 * twice_area.abs())
            }
            Shape::LipschitzGraph { .. } => None,
        }
    }

    /// Maximal local Lipschitz slope of the boundary graph over windows of
    /// the given scale.
    ///
    /// Straight pieces contribute 0; a polygon corner with edge directions at
    /// angle gamma contributes cot(gamma / 2) in the frame where both edges
    /// are graphs; a circle of radius r seen through a window of arc radius
    /// `scale` contributes tan(scale / r). For sampled graphs the slope is
    /// piecewise constant, so the answer is the maximal segment slope.
    pub fn lipschitz_constant(&self, scale: f64) -> Result<f64> {
        self.validate()?;
        if !(scale > 0.0) {
            return Err(Error::Argument("scale must be positive".into()));
        }
        Ok(match &self.shape {
            Shape::Interval { .. } => 0.0,
            Shape::Rectangle { .. } => 1.0, // right-angle corners: cot(pi/4)
            Shape::Disk { radius, .. } => circle_window_slope(*radius, scale),
            Shape::Annulus { inner, outer, .. } => {
                circle_window_slope(*inner, scale).max(circle_window_slope(*outer, scale))
            }
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    let prev = vertices[(i + n - 1) % n];
                    let v = vertices[i];
                    let next = vertices[(i + 1) % n];
                    let u = normalize([prev[0] - v[0], prev[1] - v[1]]);
                    let w = normalize([next[0] - v[0], next[1] - v[1]]);
                    let cosg = (u[0] * w[0] + u[1] * w[1]).clamp(-1.0, 1.0);
                    let gamma = cosg.acos();
                    worst = worst.max(1.0 / (gamma / 2.0).tan());
                }
                worst
            }
            Shape::LipschitzGraph { xs, ys, .. } => {
                let mut worst: f64 = 0.0;
                for i in 0..xs.len() - 1 {
                    worst = worst.max(((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).abs());
                }
                worst
            }
        })
    }
}

fn circle_window_slope(radius: f64, scale: f64) -> f64 {
    // Over a window of arc extent `scale` the circle is a graph over the
    // tangent at the window center; the max slope is attained at the ends.
    let theta = (scale / radius).min(std::f64::consts::FRAC_PI_2 * 0.999);
    theta.tan()
}

fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn interp_graph(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => ys[i],
        Err(i) => {
            // x strictly inside (xs[0], xs[last]) here
            let (x0, x1) = (xs[i - 1], xs[i]);
            let t = (x - x0) / (x1 - x0);
            ys[i - 1] * (1.0 - t) + ys[i] * t
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellLabel {
    Interior,
    Boundary,
    Exterior,
}

/// Uniform lattice over a domain's bounding box with per-cell classification.
///
/// Cell centers sit at `origin + (ix, iy) * h`; the lattice is anchored so
/// that the bounding box corner is itself a center, which puts the ring of an
/// axis-aligned box exactly on lattice points. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Grid {
    pub spec: DomainSpec,
    pub h: f64,
    pub origin: [f64; 2],
    /// Lattice extents (nx, ny); ny == 1 in 1D.
    pub n: [usize; 2],
    pub labels: Vec<CellLabel>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h && self.origin == other.origin && self.n == other.n
    }
}

impl Grid {
    /// Builds and classifies the lattice. Fails when the spacing leaves no
    /// interior cells or is too coarse for the domain's smallest feature.
    pub fn build(spec: &DomainSpec, h: f64) -> Result<Grid> {
        spec.validate()?;
        if !(h > 0.0) {
            return Err(Error::Config("grid spacing h must be positive".into()));
        }
        if let Shape::Annulus { inner, outer, .. } = &spec.shape {
            if h >= (outer - inner) / 4.0 {
                return Err(Error::Config(format!(
                    "h = {h} too coarse for annulus gap {} (need h < gap/4)",
                    outer - inner
                )));
            }
        }
        let (lo, hi) = spec.bounding_box();
        let d = spec.dimension;
        // anchor nodes on integer multiples of h so refinements by 2 nest
        // and aligned features (unit boxes, circles about lattice points)
        // land on cell centers
        let mut origin = [0.0f64; 2];
        let mut n = [0usize; 2];
        for k in 0..d {
            origin[k] = ((lo[k] - h) / h).floor() * h;
            n[k] = ((hi[k] + h - origin[k]) / h).ceil() as usize + 1;
        }
        if d == 1 {
            n[1] = 1;
        }
        let total = n[0] * n[1];
        if total > 50_000_000 {
            return Err(Error::Config(format!(
                "grid of {total} cells exceeds the supported size"
            )));
        }

        let mut labels = vec![CellLabel::Exterior; total];
        let center = |ix: usize, iy: usize| -> [f64; 2] {
            [origin[0] + ix as f64 * h, origin[1] + iy as f64 * h]
        };
        for iy in 0..n[1] {
            for ix in 0..n[0] {
                if spec.contains(center(ix, iy)) {
                    labels[iy * n[0] + ix] = CellLabel::Interior;
                }
            }
        }
        // Boundary closure: non-interior cells adjacent (8-neighborhood in
        // 2D, 2-neighborhood in 1D) to an interior cell.
        let mut boundary = Vec::new();
        for iy in 0..n[1] {
            for ix in 0..n[0] {
                let idx = iy * n[0] + ix;
                if labels[idx] == CellLabel::Interior {
                    continue;
                }
                let mut touches = false;
                'scan: for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        if d == 1 && dy != 0 {
                            continue;
                        }
                        let jx = ix as i64 + dx;
                        let jy = iy as i64 + dy;
                        if jx < 0 || jy < 0 || jx >= n[0] as i64 || jy >= n[1] as i64 {
                            continue;
                        }
                        if labels[jy as usize * n[0] + jx as usize] == CellLabel::Interior {
                            touches = true;
                            break 'scan;
                        }
                    }
                }
                if touches {
                    boundary.push(idx);
                }
            }
        }
        for &idx in &boundary {
            labels[idx] = CellLabel::Boundary;
        }
        let interior: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == CellLabel::Interior)
            .map(|(i, _)| i)
            .collect();
        if interior.is_empty() {
            return Err(Error::Config(format!(
                "h = {h} too coarse: no interior cells for {:?}",
                spec.shape
            )));
        }
        Ok(Grid {
            spec: spec.clone(),
            h,
            origin,
            n,
            labels,
            interior,
            boundary,
        })
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn num_cells(&self) -> usize {
        self.n[0] * self.n[1]
    }

    /// Cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        if self.dimension() == 1 {
            self.h
        } else {
            self.h * self.h
        }
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n[0] + ix
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n[0], idx / self.n[0])
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(idx);
        [
            self.origin[0] + ix as f64 * self.h,
            self.origin[1] + iy as f64 * self.h,
        ]
    }

    pub fn label(&self, idx: usize) -> CellLabel {
        self.labels[idx]
    }

    pub fn interior_cells(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_cells(&self) -> &[usize] {
        &self.boundary
    }

    /// 5-point stencil neighbors of an interior cell, order (-x, +x, -y, +y).
    /// All of them are non-exterior by the boundary closure.
    pub fn stencil(&self, idx: usize) -> StencilIter {
        let (ix, iy) = self.coords(idx);
        StencilIter {
            nx: self.n[0],
            base: idx,
            ix,
            iy,
            ny: self.n[1],
            k: 0,
            one_d: self.dimension() == 1,
        }
    }

    /// Euclidean distance from a cell center to the nearest boundary-cell
    /// center; zero for boundary cells, error for exterior ones.
    pub fn distance_to_boundary(&self, idx: usize) -> Result<f64> {
        match self.labels[idx] {
            CellLabel::Exterior => Err(Error::Argument(format!(
                "cell {idx} is exterior; distance to boundary is undefined"
            ))),
            CellLabel::Boundary => Ok(0.0),
            CellLabel::Interior => {
                let p = self.center(idx);
                let mut best = f64::INFINITY;
                for &b in &self.boundary {
                    let q = self.center(b);
                    let dx = p[0] - q[0];
                    let dy = p[1] - q[1];
                    best = best.min(dx * dx + dy * dy);
                }
                Ok(best.sqrt())
            }
        }
    }

    /// Distances for every non-exterior cell in one pass (NaN for exterior).
    pub fn distance_field(&self) -> Vec<f64> {
        let bcenters: Vec<[f64; 2]> = self.boundary.iter().map(|&b| self.center(b)).collect();
        let mut out = vec![f64::NAN; self.num_cells()];
        for &b in &self.boundary {
            out[b] = 0.0;
        }
        for &i in &self.interior {
            let p = self.center(i);
            let mut best = f64::INFINITY;
            for q in &bcenters {
                let dx = p[0] - q[0];
                let dy = p[1] - q[1];
                let d2 = dx * dx + dy * dy;
                if d2 < best {
                    best = d2;
                }
            }
            out[i] = best.sqrt();
        }
        out
    }

    /// Interior measure estimate: interior cell count times h^d.
    pub fn interior_measure(&self) -> f64 {
        self.interior.len() as f64 * self.cell_volume()
    }

    /// Grid dump rows as `ix,iy,x,y,label` (see [`crate::io`] for the writer).
    pub fn dump_rows(&self) -> Vec<(usize, usize, f64, f64, &'static str)> {
        (0..self.num_cells())
            .map(|idx| {
                let (ix, iy) = self.coords(idx);
                let c = self.center(idx);
                let label = match self.labels[idx] {
                    CellLabel::Interior => "interior",
                    CellLabel::Boundary => "boundary",
                    CellLabel::Exterior => "exterior",
                };
                (ix, iy, c[0], c[1], label)
            })
            .collect()
    }
}

/// Iterator over the 5-point stencil of a cell (2 neighbors in 1D).
pub struct StencilIter {
    nx: usize,
    ny: usize,
    base: usize,
    ix: usize,
    iy: usize,
    k: u8,
    one_d: bool,
}

impl Iterator for StencilIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            let k = self.k;
            if k >= 4 || (self.one_d && k >= 2) {
                return None;
            }
            self.k += 1;
            match k {
                0 if self.ix > 0 => return Some(self.base - 1),
                1 if self.ix + 1 < self.nx => return Some(self.base + 1),
                2 if self.iy > 0 => return Some(self.base - self.nx),
                3 if self.iy + 1 < self.ny => return Some(self.base + self.nx),
                _ => continue,
            }
        }
    }
}
