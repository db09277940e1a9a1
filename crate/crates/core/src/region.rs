//! Explored volume `E_n` inside the box.
//!
//! In one dimension the region is an exact union of intervals. In two
//! dimensions it is a bit mask over square-ish cells: a cell belongs to a ball
//! iff its centre does, and every area is a cell count times the cell area.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::graph::{BoxGeometry, Point};

#[derive(Debug, Clone)]
pub enum ExploredRegion {
    Intervals(IntervalSet),
    Raster(RasterMask),
}

impl ExploredRegion {
    /// Empty region for `geom`. `raster_cell` is the requested cell side in
    /// two dimensions and is ignored in one.
    pub fn for_geometry(geom: &BoxGeometry, raster_cell: f64) -> Result<Self> {
        match geom.dimension() {
            1 => Ok(Self::Intervals(IntervalSet::new(geom.sides()[0]))),
            2 => Ok(Self::Raster(RasterMask::new(geom.sides()[0], geom.sides()[1], raster_cell)?)),
            d => Err(invalid(format!("unsupported dimension {d}"))),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Self::Intervals(s) => s.covered(),
            Self::Raster(m) => m.covered_area(),
        }
    }

    pub fn box_volume(&self) -> f64 {
        match self {
            Self::Intervals(s) => s.length,
            Self::Raster(m) => m.width * m.height,
        }
    }

    /// `|B(center, radius) ∩ box ∩ E^c|` without modifying the region.
    pub fn free_area(&self, center: &Point, radius: f64) -> f64 {
        match self {
            Self::Intervals(s) => s.free_length(center[0], radius),
            Self::Raster(m) => m.free_cells(center, radius) as f64 * m.cell_area(),
        }
    }

    /// Adds `B(center, radius)` and returns the newly covered area.
    pub fn cover(&mut self, center: &Point, radius: f64) -> f64 {
        match self {
            Self::Intervals(s) => s.cover(center[0], radius),
            Self::Raster(m) => m.cover(center, radius) as f64 * m.cell_area(),
        }
    }

    /// Smallest radius in `[r_min, r_max]` whose free area reaches `target`
    /// (to within `tol`), found by monotone bisection. Returns `r_max` and
    /// `saturated = true` when even `r_max` falls short.
    pub fn radius_for_free_area(&self, center: &Point, target: f64, r_min: f64, r_max: f64, tol: f64) -> (f64, bool) {
        if self.free_area(center, r_min) >= target - tol {
            return (r_min, false);
        }
        let mut lo = r_min;
        let mut hi = r_min;
        loop {
            hi = (2.0 * hi).min(r_max);
            if self.free_area(center, hi) >= target - tol {
                break;
            }
            if hi >= r_max {
                return (r_max, true);
            }
            lo = hi;
        }
        let resolution = match self {
            Self::Intervals(_) => 1e-12 * r_min.max(1.0),
            Self::Raster(m) => 1e-6 * m.hx.min(m.hy),
        };
        for _ in 0..200 {
            if hi - lo <= resolution {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let a = self.free_area(center, mid);
            if a >= target - tol {
                hi = mid;
                if a <= target + tol {
                    break;
                }
            } else {
                lo = mid;
            }
        }
        (hi, false)
    }

    /// Rough bound on the rasterisation error of a region whose boundary has
    /// length `perimeter`: the area of a band one cell diagonal wide. Zero in
    /// one dimension.
    pub fn boundary_error_estimate(&self, perimeter: f64) -> f64 {
        match self {
            Self::Intervals(_) => 0.0,
            Self::Raster(m) => perimeter * m.hx.hypot(m.hy),
        }
    }

    /// Free-ball pathwise tolerance for `|S_k| <= v`.
    pub fn ball_tolerance(&self, radius: f64) -> f64 {
        self.boundary_error_estimate(2.0 * PI * radius) + 1e-12
    }
}

/// Area of `B(center, radius) ∩ box` not yet in `region`.
pub fn step_area(region: &ExploredRegion, center: &Point, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    Ok(region.free_area(center, radius))
}

/// Disjoint sorted closed intervals covering part of `[0, length]`.
#[derive(Debug, Clone)]
pub struct IntervalSet {
    length: f64,
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(length: f64) -> Self {
        Self {
            length,
            intervals: Vec::new(),
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn covered(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    fn clip(&self, center: f64, radius: f64) -> (f64, f64) {
        ((center - radius).max(0.0), (center + radius).min(self.length))
    }

    fn overlap(&self, a: f64, b: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(x, y)| (y.min(b) - x.max(a)).max(0.0))
            .sum()
    }

    pub fn free_length(&self, center: f64, radius: f64) -> f64 {
        let (a, b) = self.clip(center, radius);
        if b <= a {
            return 0.0;
        }
        ((b - a) - self.overlap(a, b)).max(0.0)
    }

    pub fn cover(&mut self, center: f64, radius: f64) -> f64 {
        let added = self.free_length(center, radius);
        let (mut a, mut b) = self.clip(center, radius);
        if b <= a {
            return 0.0;
        }
        let mut merged = Vec::with_capacity(self.intervals.len() + 1);
        let mut placed = false;
        for &(x, y) in &self.intervals {
            if y < a {
                merged.push((x, y));
            } else if x > b {
                if !placed {
                    merged.push((a, b));
                    placed = true;
                }
                merged.push((x, y));
            } else {
                a = a.min(x);
                b = b.max(y);
            }
        }
        if !placed {
            merged.push((a, b));
        }
        self.intervals = merged;
        added
    }
}

/// Bit mask over an `nx x ny` grid of cells covering `[0, width] x [0, height]`.
#[derive(Debug, Clone)]
pub struct RasterMask {
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    words_per_row: usize,
    bits: Vec<u64>,
    covered: usize,
}

impl RasterMask {
    /// The cell side is adjusted down so that the cells tile the box exactly.
    pub fn new(width: f64, height: f64, cell: f64) -> Result<Self> {
        if !(cell.is_finite() && cell > 0.0) {
            return Err(invalid("raster cell size must be positive"));
        }
        let nx = (width / cell).ceil().max(1.0) as usize;
        let ny = (height / cell).ceil().max(1.0) as usize;
        let cells = nx as f64 * ny as f64;
        if cells > 4e9 {
            return Err(invalid(format!("raster of {cells} cells is too large; increase the cell size")));
        }
        let words_per_row = nx.div_ceil(64);
        Ok(Self {
            width,
            height,
            nx,
            ny,
            hx: width / nx as f64,
            hy: height / ny as f64,
            words_per_row,
            bits: vec![0; words_per_row * ny],
            covered: 0,
        })
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    pub fn covered_cells(&self) -> usize {
        self.covered
    }

    pub fn covered_area(&self) -> f64 {
        self.covered as f64 * self.cell_area()
    }

    pub fn is_covered(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.words_per_row + i / 64] >> (i % 64) & 1 == 1
    }

    /// Row spans `(j, i_lo, i_hi)` of cells whose centres lie in the ball.
    fn spans(&self, center: &Point, radius: f64) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (cx, cy) = (center[0], center[1]);
        let r2 = radius * radius;
        let j_lo = ((cy - radius) / self.hy - 0.5).ceil().max(0.0) as usize;
        let j_hi = ((cy + radius) / self.hy - 0.5).floor();
        let j_end = if j_hi < 0.0 { 0 } else { (j_hi as usize + 1).min(self.ny) };
        (j_lo..j_end).filter_map(move |j| {
            let dy = (j as f64 + 0.5) * self.hy - cy;
            let rest = r2 - dy * dy;
            if rest < 0.0 {
                return None;
            }
            let half = rest.sqrt();
            let lo = ((cx - half) / self.hx - 0.5).ceil().max(0.0);
            let hi = ((cx + half) / self.hx - 0.5).floor().min(self.nx as f64 - 1.0);
            if hi < lo {
                return None;
            }
            Some((j, lo as usize, hi as usize))
        })
    }

    fn span_words(&self, j: usize, lo: usize, hi: usize) -> impl Iterator<Item = (usize, u64)> {
        let row = j * self.words_per_row;
        let (w_lo, w_hi) = (lo / 64, hi / 64);
        (w_lo..=w_hi).map(move |w| {
            let start = if w == w_lo { lo % 64 } else { 0 };
            let end = if w == w_hi { hi % 64 } else { 63 };
            let width = end - start + 1;
            let mask = if width == 64 { u64::MAX } else { ((1u64 << width) - 1) << start };
            (row + w, mask)
        })
    }

    pub fn free_cells(&self, center: &Point, radius: f64) -> usize {
        let mut free = 0;
        for (j, lo, hi) in self.spans(center, radius) {
            let mut taken = 0;
            for (idx, mask) in self.span_words(j, lo, hi) {
                taken += (self.bits[idx] & mask).count_ones() as usize;
            }
            free += hi - lo + 1 - taken;
        }
        free
    }

    pub fn cover(&mut self, center: &Point, radius: f64) -> usize {
        let spans: Vec<_> = self.spans(center, radius).collect();
        let mut added = 0;
        for (j, lo, hi) in spans {
            let words: Vec<_> = self.span_words(j, lo, hi).collect();
            for (idx, mask) in words {
                added += (!self.bits[idx] & mask).count_ones() as usize;
                self.bits[idx] |= mask;
            }
        }
        self.covered += added;
        added
    }
}
