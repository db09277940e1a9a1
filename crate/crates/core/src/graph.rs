//! Random graph models: sparse Erdős–Rényi graphs and random geometric
//! graphs built on uniform point clouds in a box.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Erdős–Rényi parameters: `n` vertices, edge probability `c / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    n: usize,
    c: f64,
}

impl ErParams {
    /// `c = 0` is accepted and yields the empty graph.
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if !c.is_finite() || c < 0.0 {
            return Err(invalid(format!("c must be a finite non-negative number, got {c}")));
        }
        if c > n as f64 {
            return Err(invalid(format!("c = {c} exceeds n = {n} (edge probability above 1)")));
        }
        Ok(Self { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn edge_probability(&self) -> f64 {
        self.c / self.n as f64
    }

    /// Mean number of unexplored neighbours when `x` vertices are explored.
    pub fn gamma_n(&self, x: f64) -> f64 {
        ((self.n as f64 - x - 1.0) * self.edge_probability()).max(0.0)
    }
}

/// Axis-aligned box `[0, L1] x ... x [0, Ld]` with a Poisson intensity and a
/// connection radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGeometry {
    sides: Vec<f64>,
    intensity: f64,
    radius: f64,
}

impl BoxGeometry {
    pub fn new(sides: Vec<f64>, intensity: f64, radius: f64) -> Result<Self> {
        if !(1..=2).contains(&sides.len()) {
            return Err(invalid(format!("dimension must be 1 or 2, got {}", sides.len())));
        }
        if sides.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(invalid("box sides must be positive (zero-volume box)"));
        }
        if !intensity.is_finite() || intensity <= 0.0 {
            return Err(invalid("intensity must be positive"));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(invalid("radius must be positive"));
        }
        let geom = Self { sides, intensity, radius };
        if geom.ball_volume() >= geom.volume() {
            return Err(invalid("ball volume must be smaller than the box volume"));
        }
        Ok(geom)
    }

    /// Cube of volume `n / intensity` whose radius is chosen so that the mean
    /// degree `intensity * |B(r)|` equals `c`.
    pub fn with_mean_degree(dimension: usize, n: usize, intensity: f64, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if !c.is_finite() || c <= 0.0 {
            return Err(invalid(format!("c must be > 0, got {c}")));
        }
        let volume = n as f64 / intensity;
        let ball = c / intensity;
        let (side, radius) = match dimension {
            1 => (volume, ball / 2.0),
            2 => (volume.sqrt(), (ball / PI).sqrt()),
            d => return Err(invalid(format!("dimension must be 1 or 2, got {d}"))),
        };
        Self::new(vec![side; dimension], intensity, radius)
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Volume `v` of a free ball of radius `r`.
    pub fn ball_volume(&self) -> f64 {
        ball_volume(self.dimension(), self.radius)
    }

    /// Mean degree `c = lambda * v`.
    pub fn mean_degree(&self) -> f64 {
        self.intensity * self.ball_volume()
    }

    pub fn expected_count(&self) -> f64 {
        self.intensity * self.volume()
    }

    pub fn diagonal(&self) -> f64 {
        self.sides.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Distance from `p` to the nearest wall.
    pub fn wall_distance(&self, p: &Point) -> f64 {
        self.sides
            .iter()
            .enumerate()
            .map(|(k, s)| p[k].min(s - p[k]))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn ball_volume(dimension: usize, radius: f64) -> f64 {
    match dimension {
        1 => 2.0 * radius,
        _ => PI * radius * radius,
    }
}

/// Coordinates; the second component is always 0 in dimension 1.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// `N = round(lambda |C|)` points.
    Fixed,
    /// `N ~ Poisson(lambda |C|)`.
    Poisson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dimension: usize,
    positions: Vec<Point>,
}

impl PointCloud {
    pub fn new(dimension: usize, positions: Vec<Point>) -> Self {
        Self { dimension, positions }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

pub fn sample_point_cloud<R: Rng + ?Sized>(
    geom: &BoxGeometry,
    mode: CountMode,
    rng: &mut R,
) -> Result<PointCloud> {
    let mean = geom.expected_count();
    let n = match mode {
        CountMode::Fixed => mean.round() as usize,
        CountMode::Poisson => {
            let dist = Poisson::new(mean).map_err(|e| invalid(format!("poisson mean {mean}: {e}")))?;
            dist.sample(rng) as usize
        }
    };
    let sides = geom.sides();
    let positions = (0..n)
        .map(|_| {
            let mut p = [0.0; 2];
            for (k, s) in sides.iter().enumerate() {
                p[k] = rng.random::<f64>() * s;
            }
            p
        })
        .collect();
    Ok(PointCloud::new(geom.dimension(), positions))
}

/// Undirected simple graph stored as sorted neighbour lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    pub fn empty(n: usize) -> Self {
        Self { neighbors: vec![Vec::new(); n] }
    }

    /// Builds from an edge list; duplicates and self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for (a, b) in edges {
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Self { neighbors }
    }

    pub fn complete(n: usize) -> Self {
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Symmetric, loop-free and sorted.
    pub fn is_well_formed(&self) -> bool {
        self.neighbors.iter().enumerate().all(|(i, list)| {
            list.windows(2).all(|w| w[0] < w[1])
                && list.iter().all(|&j| j != i && self.neighbors[j].binary_search(&i).is_ok())
        })
    }
}

/// Each unordered pair is linked independently with probability `c / n`.
pub fn sample_er_graph<R: Rng + ?Sized>(params: &ErParams, rng: &mut R) -> AdjacencyGraph {
    let n = params.n();
    let p = params.edge_probability();
    let mut neighbors = vec![Vec::new(); n];
    if p > 0.0 {
        for i in 0..n {
            for j in i + 1..n {
                if p >= 1.0 || rng.random::<f64>() < p {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
    }
    // i ascending, j ascending: lists are already sorted.
    AdjacencyGraph { neighbors }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborMethod {
    GridIndex,
    BruteForce,
}

#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Edge iff the Euclidean distance is at most `r` (closed ball, hard walls).
pub fn build_rgg(cloud: &PointCloud, r: f64, method: NeighborMethod) -> Result<AdjacencyGraph> {
    if !r.is_finite() || r <= 0.0 {
        return Err(invalid("radius must be positive"));
    }
    let pts = cloud.positions();
    let r2 = r * r;
    let mut neighbors = vec![Vec::new(); pts.len()];
    match method {
        NeighborMethod::BruteForce => {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    if dist2(&pts[i], &pts[j]) <= r2 {
                        neighbors[i].push(j);
                        neighbors[j].push(i);
                    }
                }
            }
        }
        NeighborMethod::GridIndex => {
            let grid = SpatialGrid::new(pts, r);
            for (i, list) in neighbors.iter_mut().enumerate() {
                grid.for_each_within(pts, &pts[i], r, |j| {
                    if j != i {
                        list.push(j);
                    }
                });
                list.sort_unstable();
            }
        }
    }
    Ok(AdjacencyGraph { neighbors })
}

/// Uniform bucket grid over the bounding box of a point set.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell: f64,
    origin: Point,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
}

impl SpatialGrid {
    pub fn new(pts: &[Point], cell: f64) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in pts {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if pts.is_empty() {
            lo = [0.0; 2];
            hi = [0.0; 2];
        }
        let cols = ((hi[0] - lo[0]) / cell).floor() as usize + 1;
        let rows = ((hi[1] - lo[1]) / cell).floor() as usize + 1;
        let mut grid = Self {
            cell,
            origin: lo,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
        };
        for (i, p) in pts.iter().enumerate() {
            let (cx, cy) = grid.cell_of(p);
            grid.buckets[cy * cols + cx].push(i);
        }
        grid
    }

    fn cell_of(&self, p: &Point) -> (usize, usize) {
        let cx = ((p[0] - self.origin[0]) / self.cell).floor().max(0.0) as usize;
        let cy = ((p[1] - self.origin[1]) / self.cell).floor().max(0.0) as usize;
        (cx.min(self.cols - 1), cy.min(self.rows - 1))
    }

    /// Calls `f` for every point index within distance `radius` of `center`.
    /// With `radius <= cell` this scans exactly the 3^d surrounding cells.
    pub fn for_each_within(&self, pts: &[Point], center: &Point, radius: f64, mut f: impl FnMut(usize)) {
        let r2 = radius * radius;
        let reach = (radius / self.cell).ceil() as isize;
        let (cx, cy) = self.cell_of(center);
        let (cx, cy) = (cx as isize, cy as isize);
        let y0 = (cy - reach).max(0);
        let y1 = (cy + reach).min(self.rows as isize - 1);
        let x0 = (cx - reach).max(0);
        let x1 = (cx + reach).min(self.cols as isize - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                for &j in &self.buckets[y as usize * self.cols + x as usize] {
                    if dist2(&pts[j], center) <= r2 {
                        f(j);
                    }
                }
            }
        }
    }
}
