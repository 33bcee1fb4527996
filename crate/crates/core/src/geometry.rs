//! Hexagonal cell geometry, the two-ring interferer layout, the equal-area
//! annulus partition, spatial Poisson sampling and F-ALOHA thinning.
//!
//! The cell is a hexagon of circumradius `R_c` with vertices at angles
//! `kπ/3`; neighbouring base stations sit across its edges.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Self {
            x: r * theta.cos(),
            y: r * theta.sin(),
        }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn rotated(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }
}

pub const INTERFERER_COUNT: usize = 18;

/// Positions of the 18 interfering macrocell base stations: rings at
/// `√3 R_c` (angles `π/6 + kπ/3`), `3 R_c` (angles `kπ/3`) and `2√3 R_c`
/// (angles `π/6 + kπ/3`).
pub fn interferer_positions(macro_radius: f64) -> [Point; INTERFERER_COUNT] {
    let s3 = 3f64.sqrt();
    let mut out = [Point::ORIGIN; INTERFERER_COUNT];
    for k in 0..6 {
        let kf = k as f64;
        out[k] = Point::polar(s3 * macro_radius, FRAC_PI_6 + kf * FRAC_PI_3);
        out[6 + k] = Point::polar(3.0 * macro_radius, kf * FRAC_PI_3);
        out[12 + k] = Point::polar(2.0 * s3 * macro_radius, FRAC_PI_6 + kf * FRAC_PI_3);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub macro_radius: f64,
    /// `|H| = (3√3/2) R_c²`.
    pub area: f64,
    /// Radius of the circle with the same area as the hexagon.
    pub equivalent_radius: f64,
    pub interferers: [Point; INTERFERER_COUNT],
}

impl CellGeometry {
    pub fn new(macro_radius: f64) -> Result<Self> {
        if !(macro_radius > 0.0) || !macro_radius.is_finite() {
            return Err(invalid("R_c", format!("must be positive, got {macro_radius}")));
        }
        let area = 1.5 * 3f64.sqrt() * macro_radius * macro_radius;
        Ok(Self {
            macro_radius,
            area,
            equivalent_radius: (area / PI).sqrt(),
            interferers: interferer_positions(macro_radius),
        })
    }

    /// Whether `p` lies inside the hexagon.
    pub fn contains(&self, p: Point) -> bool {
        let r = self.macro_radius;
        let s3 = 3f64.sqrt();
        p.y.abs() <= 0.5 * s3 * r && s3 * p.x.abs() + p.y.abs() <= s3 * r
    }
}

/// Radii `0 = R_0 < R_1 < … < R_M` of concentric annuli.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusPartition {
    radii: Vec<f64>,
}

impl AnnulusPartition {
    /// `M` annuli of equal radial width covering the equal-area circle.
    pub fn equal_width(outer_radius: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(invalid("M", "need at least one annulus"));
        }
        if !(outer_radius > 0.0) {
            return Err(invalid("R_M", format!("must be positive, got {outer_radius}")));
        }
        let step = outer_radius / count as f64;
        let mut radii: Vec<f64> = (0..=count).map(|m| m as f64 * step).collect();
        radii[count] = outer_radius;
        Ok(Self { radii })
    }

    /// Explicit radii; must start at 0 and increase strictly.
    pub fn from_radii(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii[0] != 0.0 {
            return Err(invalid("radii", "need R_0 = 0 and at least one outer radius"));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("radii", "must be strictly increasing"));
        }
        Ok(Self { radii })
    }

    pub fn for_cell(cell: &CellGeometry, count: usize) -> Result<Self> {
        Self::equal_width(cell.equivalent_radius, count)
    }

    pub fn count(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `(inner, outer)` radii of annulus `m`, `0 <= m < M`.
    pub fn bounds(&self, m: usize) -> (f64, f64) {
        (self.radii[m], self.radii[m + 1])
    }

    pub fn area(&self, m: usize) -> f64 {
        let (a, b) = self.bounds(m);
        PI * (b * b - a * a)
    }
}

/// `n` points uniform over the hexagon of circumradius `R_c` at the origin.
/// The hexagon splits into three rhombi spanned by alternate vertices.
pub fn sample_hex_uniform<R: Rng + ?Sized>(rng: &mut R, macro_radius: f64, n: usize) -> Vec<Point> {
    (0..n).map(|_| hex_point(rng, macro_radius)).collect()
}

pub(crate) fn hex_point<R: Rng + ?Sized>(rng: &mut R, macro_radius: f64) -> Point {
    let k = rng.random_range(0..3u32) as f64;
    let e1 = Point::polar(macro_radius, 2.0 * k * FRAC_PI_3);
    let e2 = Point::polar(macro_radius, (2.0 * k + 2.0) * FRAC_PI_3);
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    Point::new(u * e1.x + v * e2.x, u * e1.y + v * e2.y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disc { center: Point, radius: f64 },
    /// Hexagon of the given circumradius centered at the origin.
    Hexagon { radius: f64 },
}

impl Region {
    pub fn area(&self) -> f64 {
        match *self {
            Region::Disc { radius, .. } => PI * radius * radius,
            Region::Hexagon { radius } => 1.5 * 3f64.sqrt() * radius * radius,
        }
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            Region::Disc { center, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let p = Point::polar(r, 2.0 * PI * rng.random::<f64>());
                Point::new(center.x + p.x, center.y + p.y)
            }
            Region::Hexagon { radius } => hex_point(rng, radius),
        }
    }
}

/// Number of points of a homogeneous SPPP in a region of area `area`.
pub fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let p = Poisson::new(mean).expect("finite positive Poisson mean");
    let k: f64 = p.sample(rng);
    k as u64
}

/// Homogeneous SPPP of the given intensity (points/m²) restricted to
/// `region`.
pub fn sample_sppp<R: Rng + ?Sized>(rng: &mut R, intensity: f64, region: Region) -> Result<Vec<Point>> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(invalid("intensity", format!("must be finite and >= 0, got {intensity}")));
    }
    let n = poisson_count(rng, intensity * region.area());
    Ok((0..n).map(|_| region.sample_point(rng)).collect())
}

/// Probability that a femtocell accessing `k` of `F_f` subchannels picks a
/// given subchannel, `k/F_f`.
pub fn faloha_select_prob(k: usize, femto_subchannels: usize) -> Result<f64> {
    if femto_subchannels == 0 {
        return Err(invalid("F_f", "need at least one femtocell subchannel"));
    }
    if k > femto_subchannels {
        return Err(invalid("k", format!("{k} exceeds F_f = {femto_subchannels}")));
    }
    Ok(k as f64 / femto_subchannels as f64)
}

/// Independent thinning: each point survives with probability `rho_f`.
pub fn thin<R: Rng + ?Sized>(rng: &mut R, points: &[Point], rho_f: f64) -> Result<Vec<Point>> {
    if !(0.0..=1.0).contains(&rho_f) {
        return Err(invalid("rho_f", format!("must lie in [0, 1], got {rho_f}")));
    }
    if rho_f == 1.0 {
        return Ok(points.to_vec());
    }
    Ok(points
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < rho_f)
        .collect())
}
