//! Euclidean geometry of ball configurations: points, windows, the Gilbert
//! graph, connectivity probes and the boundary influence zone.
//!
//! Coordinates are dyadic fixed-point reals with `wbits` fractional bits. All
//! intersection and connectivity predicates are decided in scaled integer
//! arithmetic, so tangency (closed balls touching in a single point) is exact.

use crate::error::{Error, Result};
use arrayvec::ArrayVec;

/// Hard cap on the spatial dimension; together with the key width limit this
/// keeps order keys inside u128.
pub const MAX_DIM: usize = 3;

pub type Coords = ArrayVec<f64, MAX_DIM>;

/// Scale a coordinate to raw grid units, flooring to its cell corner.
///
/// Dyadic inputs convert exactly (multiplying an f64 by a power of two never
/// rounds); anything else is identified with the cell that contains it.
pub fn to_raw(x: f64, wbits: u32) -> i64 {
    let scaled = x * (1u64 << wbits) as f64;
    debug_assert!(scaled.abs() < 9.0e15, "coordinate overflows the grid");
    scaled.floor() as i64
}

/// Inverse of [`to_raw`]; exact for all in-range raws.
pub fn from_raw(raw: i64, wbits: u32) -> f64 {
    raw as f64 / (1u64 << wbits) as f64
}

/// True when `x` lies exactly on the `wbits` grid.
pub fn is_dyadic(x: f64, wbits: u32) -> bool {
    let scaled = x * (1u64 << wbits) as f64;
    scaled.fract() == 0.0 && scaled.abs() < 9.0e15
}

/// Floor to the `wbits` grid.
pub fn quantize_floor(x: f64, wbits: u32) -> f64 {
    from_raw(to_raw(x, wbits), wbits)
}

/// A ball: center in `dim() <= 3` dimensions plus a nonnegative radius.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pos: Coords,
    radius: f64,
}

impl Point {
    pub fn new(pos: &[f64], radius: f64) -> Result<Self> {
        if pos.is_empty() || pos.len() > MAX_DIM {
            return Err(Error::InvalidParam(format!(
                "dimension {} outside 1..={MAX_DIM}",
                pos.len()
            )));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParam(format!("radius {radius} must be >= 0")));
        }
        if pos.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParam("non-finite coordinate".into()));
        }
        Ok(Point {
            pos: pos.iter().copied().collect(),
            radius,
        })
    }

    /// Construct with every coordinate and the radius floored to the grid.
    pub fn quantized(pos: &[f64], radius: f64, wbits: u32) -> Result<Self> {
        let q: Vec<f64> = pos.iter().map(|&c| quantize_floor(c, wbits)).collect();
        Point::new(&q, quantize_floor(radius, wbits))
    }

    pub fn dim(&self) -> usize {
        self.pos.len()
    }

    pub fn pos(&self) -> &[f64] {
        &self.pos
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Euclidean distance between two location vectors.
pub fn dist(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

fn sq_dist_raw(x: &[f64], y: &[f64], wbits: u32) -> i128 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = (to_raw(a, wbits) - to_raw(b, wbits)) as i128;
            d * d
        })
        .sum()
}

/// Closed-ball intersection test, exact on the grid: tangency counts.
pub fn balls_intersect(a: &Point, b: &Point, wbits: u32) -> bool {
    debug_assert_eq!(a.dim(), b.dim());
    let rsum = (to_raw(a.radius, wbits) + to_raw(b.radius, wbits)) as i128;
    sq_dist_raw(a.pos(), b.pos(), wbits) <= rsum * rsum
}

/// Squared distance from a point to an axis-aligned box, in raw grid units.
fn sq_dist_point_box_raw(x: &[f64], lo: &[f64], hi: &[f64], wbits: u32) -> i128 {
    let mut acc: i128 = 0;
    for i in 0..x.len() {
        let xi = to_raw(x[i], wbits);
        let l = to_raw(lo[i], wbits);
        let h = to_raw(hi[i], wbits);
        let d = if xi < l {
            l - xi
        } else if xi > h {
            xi - h
        } else {
            0
        };
        acc += (d as i128) * (d as i128);
    }
    acc
}

/// A finite simple set of points (a realization).
#[derive(Clone, Debug, Default)]
pub struct Configuration {
    points: Vec<Point>,
}

// configurations are sets; insertion order is irrelevant
impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.points.len() == other.points.len()
            && self.points.iter().all(|p| other.contains(p))
    }
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration { points: Vec::new() }
    }

    /// Build from points, rejecting duplicates (the process is simple).
    pub fn new(points: Vec<Point>) -> Result<Self> {
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::InvalidParam(format!(
                        "duplicate point at index {i}"
                    )));
                }
            }
        }
        Ok(Configuration { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.iter().any(|q| q == p)
    }

    /// Set union; duplicates in `other` are dropped.
    pub fn union(&self, other: &Configuration) -> Configuration {
        let mut points = self.points.clone();
        for p in &other.points {
            if !points.contains(p) {
                points.push(p.clone());
            }
        }
        Configuration { points }
    }

    pub fn with(&self, p: Point) -> Configuration {
        let mut points = self.points.clone();
        if !points.contains(&p) {
            points.push(p);
        }
        Configuration { points }
    }

    pub fn push(&mut self, p: Point) {
        if !self.points.contains(&p) {
            self.points.push(p);
        }
    }

    /// True when no two balls of `self` and `other` share a point.
    pub fn disjoint_as_sets(&self, other: &Configuration) -> bool {
        !self.points.iter().any(|p| other.contains(p))
    }
}

impl FromIterator<Point> for Configuration {
    fn from_iter<T: IntoIterator<Item = Point>>(iter: T) -> Self {
        let mut cfg = Configuration::empty();
        for p in iter {
            cfg.push(p);
        }
        cfg
    }
}

/// Union-find over configuration indices, rebuilt per configuration.
#[derive(Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(size: usize) -> Self {
        DisjointSet {
            parent: (0..size).collect(),
            rank: vec![0; size],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return;
        }
        if self.rank[rx] < self.rank[ry] {
            self.parent[rx] = ry;
        } else if self.rank[rx] > self.rank[ry] {
            self.parent[ry] = rx;
        } else {
            self.parent[ry] = rx;
            self.rank[rx] += 1;
        }
    }
}

/// Build the union-find of the Gilbert graph of `points`.
pub fn gilbert_components(points: &[Point], wbits: u32) -> DisjointSet {
    let mut dsu = DisjointSet::new(points.len());
    for i in 0..points.len() {
        for j in 0..i {
            if balls_intersect(&points[i], &points[j], wbits) {
                dsu.union(i, j);
            }
        }
    }
    dsu
}

/// Number of connected components of the Gilbert graph.
pub fn component_count(points: &[Point], wbits: u32) -> usize {
    let mut dsu = gilbert_components(points, wbits);
    let mut roots: Vec<usize> = (0..points.len()).map(|i| dsu.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// The simulation window: a bounded axis-aligned box plus the radius bound,
/// so the domain is `box x [0, r_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    lo: Coords,
    hi: Coords,
    r_max: f64,
    wbits: u32,
}

impl Window {
    pub fn new(lo: &[f64], hi: &[f64], r_max: f64, wbits: u32) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch(lo.len(), hi.len()));
        }
        if lo.is_empty() || lo.len() > MAX_DIM {
            return Err(Error::InvalidParam(format!(
                "dimension {} outside 1..={MAX_DIM}",
                lo.len()
            )));
        }
        if wbits == 0 || wbits > 52 {
            return Err(Error::InvalidParam(format!("wbits {wbits} outside 1..=52")));
        }
        for (i, (&a, &b)) in lo.iter().zip(hi).enumerate() {
            if !(a < b) {
                return Err(Error::InvalidParam(format!("empty box on axis {i}")));
            }
            for v in [a, b] {
                if !is_dyadic(v, wbits) {
                    return Err(Error::NotDyadic {
                        what: format!("box bound {v}"),
                        wbits,
                    });
                }
            }
        }
        if !(r_max > 0.0) || !is_dyadic(r_max, wbits) {
            return Err(Error::NotDyadic {
                what: format!("r_max {r_max}"),
                wbits,
            });
        }
        Ok(Window {
            lo: lo.iter().copied().collect(),
            hi: hi.iter().copied().collect(),
            r_max,
            wbits,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn wbits(&self) -> u32 {
        self.wbits
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Lebesgue volume of the spatial box.
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Domain membership: the spatial box is half-open per axis (cell
    /// corners), the radius range `[0, r_max]` is closed.
    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.pos()
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&x, (&a, &b))| x >= a && x < b)
            && p.radius >= 0.0
            && p.radius <= self.r_max
    }

    /// Whether some domain point's ball can intersect `ball`: the gap between
    /// the box and the ball center must not exceed `r_max + r_ball`. Exact.
    pub fn reachable_by(&self, ball: &Point) -> bool {
        let reach = (to_raw(self.r_max, self.wbits) + to_raw(ball.radius, self.wbits)) as i128;
        sq_dist_point_box_raw(ball.pos(), &self.lo, &self.hi, self.wbits) <= reach * reach
    }
}

/// Connectivity endpoints: a ball, a whole configuration, a spatial box
/// probed at radius zero, or the complement of a ball around a center
/// (the "distance ring" used by the percolation experiments).
#[derive(Clone, Debug)]
pub enum Probe {
    Ball(Point),
    Config(Configuration),
    /// Axis-aligned spatial box, probed with radius-0 points.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{x : |x - center| >= dist}`, probed with radius-0 points.
    BallComplement { center: Vec<f64>, dist: f64 },
}

impl Probe {
    pub fn origin_ring(dim: usize, dist: f64) -> Probe {
        Probe::BallComplement {
            center: vec![0.0; dim],
            dist,
        }
    }

    fn touches_ball(&self, ball: &Point, wbits: u32) -> bool {
        match self {
            Probe::Ball(p) => balls_intersect(p, ball, wbits),
            Probe::Config(cfg) => cfg.iter().any(|p| balls_intersect(p, ball, wbits)),
            Probe::Box { lo, hi } => {
                let r = to_raw(ball.radius, wbits) as i128;
                sq_dist_point_box_raw(ball.pos(), lo, hi, wbits) <= r * r
            }
            Probe::BallComplement { center, dist } => {
                // Some x with |x - center| >= dist lies in B(ball) iff
                // |ball.center - center| + ball.radius >= dist.
                let need = to_raw(*dist, wbits) - to_raw(ball.radius, wbits);
                if need <= 0 {
                    return true;
                }
                sq_dist_raw(ball.pos(), center, wbits) >= (need as i128) * (need as i128)
            }
        }
    }

    /// Direct contact between two probes with no configuration in between.
    fn touches_probe(&self, other: &Probe, wbits: u32) -> bool {
        match (self, other) {
            (Probe::Ball(a), _) => other.touches_ball(a, wbits),
            (_, Probe::Ball(b)) => self.touches_ball(b, wbits),
            (Probe::Config(cfg), _) => cfg.iter().any(|p| other.touches_ball(p, wbits)),
            (_, Probe::Config(cfg)) => cfg.iter().any(|p| self.touches_ball(p, wbits)),
            (Probe::Box { lo: l1, hi: h1 }, Probe::Box { lo: l2, hi: h2 }) => {
                // Radius-0 probes meet iff the closed boxes share a point.
                l1.iter()
                    .zip(h1)
                    .zip(l2.iter().zip(h2))
                    .all(|((a1, b1), (a2, b2))| a1 <= b2 && a2 <= b1)
            }
            (Probe::Box { lo, hi }, Probe::BallComplement { center, dist })
            | (Probe::BallComplement { center, dist }, Probe::Box { lo, hi }) => {
                // Farthest box corner from the center reaches the complement?
                let far: f64 = lo
                    .iter()
                    .zip(hi)
                    .zip(center)
                    .map(|((&a, &b), &c)| (a - c).abs().max((b - c).abs()).powi(2))
                    .sum::<f64>()
                    .sqrt();
                far >= *dist
            }
            (
                Probe::BallComplement { dist: d1, .. },
                Probe::BallComplement { dist: d2, .. },
            ) => {
                // Two complements always intersect unless one covers nothing;
                // at the scales used here they share far-away points.
                *d1 >= 0.0 && *d2 >= 0.0
            }
        }
    }
}

/// Whether `a` and `b` are connected through the Gilbert graph of `omega`
/// (the probes themselves are added to the graph).
pub fn connected(omega: &Configuration, a: &Probe, b: &Probe, wbits: u32) -> bool {
    if a.touches_probe(b, wbits) {
        return true;
    }
    let pts = omega.points();
    let mut dsu = gilbert_components(pts, wbits);
    let mut touches_a = vec![false; pts.len()];
    let mut touches_b = vec![false; pts.len()];
    for (i, p) in pts.iter().enumerate() {
        touches_a[i] = a.touches_ball(p, wbits);
        touches_b[i] = b.touches_ball(p, wbits);
    }
    let mut root_hits_a = vec![false; pts.len()];
    let mut root_hits_b = vec![false; pts.len()];
    for i in 0..pts.len() {
        let r = dsu.find(i);
        root_hits_a[r] |= touches_a[i];
        root_hits_b[r] |= touches_b[i];
    }
    (0..pts.len()).any(|r| root_hits_a[r] && root_hits_b[r])
}

/// A measurable sub-domain of a window: the full domain, optionally
/// intersected with the reach of one configuration and minus the reach of
/// another. This is exactly the shape the coupling recursion produces.
#[derive(Clone, Debug)]
pub struct Region {
    window: Window,
    include_reach: Option<Configuration>,
    exclude_reach: Configuration,
}

impl Region {
    /// The whole domain of `window`.
    pub fn full(window: Window) -> Self {
        Region {
            window,
            include_reach: None,
            exclude_reach: Configuration::empty(),
        }
    }

    /// The influence zone: domain points whose ball can touch `boundary`.
    ///
    /// An empty boundary yields the empty region.
    pub fn influence_zone(window: Window, boundary: Configuration) -> Self {
        Region {
            window,
            include_reach: Some(boundary),
            exclude_reach: Configuration::empty(),
        }
    }

    /// Restrict further: keep only points touching `boundary` (on top of any
    /// existing include restriction this replaces it; callers in the coupling
    /// recursion always narrow from `full`/`minus_reach` regions).
    pub fn intersect_reach(mut self, boundary: Configuration) -> Self {
        self.include_reach = Some(boundary);
        self
    }

    /// Remove the reach of `boundary` from the region.
    pub fn minus_reach(mut self, boundary: Configuration) -> Self {
        self.exclude_reach = self.exclude_reach.union(&boundary);
        self
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn include_reach(&self) -> Option<&Configuration> {
        self.include_reach.as_ref()
    }

    pub fn exclude_reach(&self) -> &Configuration {
        &self.exclude_reach
    }

    pub fn is_full(&self) -> bool {
        self.include_reach.is_none() && self.exclude_reach.is_empty()
    }

    /// Decidable membership predicate.
    pub fn member(&self, p: &Point) -> bool {
        let w = self.window.wbits();
        if !self.window.contains(p) {
            return false;
        }
        if let Some(inc) = &self.include_reach {
            if inc.is_empty() || !inc.iter().any(|y| balls_intersect(p, y, w)) {
                return false;
            }
        }
        !self
            .exclude_reach
            .iter()
            .any(|y| balls_intersect(p, y, w))
    }

    /// Analytic emptiness certificate for include-restricted regions on the
    /// full window: true when no boundary ball can reach the domain at all.
    pub fn certainly_empty(&self) -> bool {
        match &self.include_reach {
            Some(inc) => !inc.iter().any(|y| self.window.reachable_by(y)),
            None => false,
        }
    }
}
