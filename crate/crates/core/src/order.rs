//! The measurable total order on the ball domain.
//!
//! A point `(x_1..x_d, r)` is linearised by interleaving the binary digits of
//! its fixed-point components into one unsigned key; comparing keys realizes
//! the total order. Keys are half-open cells of side `2^-wbits`, so encode and
//! decode are exact inverses and ties cannot occur. Order intervals decompose
//! into O(bits) dyadic hyperblocks, which gives exact interval measures under
//! `Lebesgue x Q` and a bisection-based successor at prescribed mass.

use crate::error::{Error, Result};
use crate::poisson::RadiusLaw;
use crate::space::{from_raw, to_raw, Point, Region, Window};
use arrayvec::ArrayVec;
use rand::Rng;

const MAX_COMPONENTS: usize = 4;

/// Bit-interleaved linearisation of a point; ordered as an unsigned integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderKey(pub u128);

/// A scalar estimate with its standard error (zero for exact values).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measure {
    pub value: f64,
    pub std_error: f64,
}

impl Measure {
    pub fn exact(value: f64) -> Self {
        Measure {
            value,
            std_error: 0.0,
        }
    }
}

/// Half-open key interval `[lo, hi)`, optionally restricted to a region.
/// `hi = None` is the end-of-domain sentinel (the key range is bounded).
#[derive(Clone, Debug)]
pub struct OrderInterval {
    pub lo: OrderKey,
    pub hi: Option<OrderKey>,
    pub region: Option<Region>,
}

impl OrderInterval {
    pub fn full() -> Self {
        OrderInterval {
            lo: OrderKey(0),
            hi: None,
            region: None,
        }
    }

    /// `[from, end)`.
    pub fn tail(from: OrderKey) -> Self {
        OrderInterval {
            lo: from,
            hi: None,
            region: None,
        }
    }

    pub fn between(lo: OrderKey, hi: OrderKey) -> Self {
        OrderInterval {
            lo,
            hi: Some(hi),
            region: None,
        }
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = Some(region);
        self
    }

    /// The sub-interval `[from, hi)` of `self`, keeping the region.
    pub fn tail_from(&self, from: OrderKey) -> Self {
        OrderInterval {
            lo: OrderKey(self.lo.0.max(from.0)),
            hi: self.hi,
            region: self.region.clone(),
        }
    }
}

/// An aligned dyadic key block `[start, start + 2^level)`.
#[derive(Clone, Copy, Debug)]
pub struct KeyBlock {
    pub start: u128,
    pub level: u32,
}

/// Per-component raw cell ranges `[a, b)` of a clipped hyperblock.
#[derive(Clone, Debug)]
pub struct CellBox {
    pub ranges: ArrayVec<(u64, u64), MAX_COMPONENTS>,
}

/// Encodes points of a window domain into order keys and back.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderCodec {
    m: usize,
    wbits: u32,
    comp_bits: u32,
    offsets: ArrayVec<i64, MAX_COMPONENTS>,
    extents: ArrayVec<u64, MAX_COMPONENTS>,
}

fn bit_len(x: u64) -> u32 {
    64 - x.leading_zeros()
}

impl OrderCodec {
    /// Codec for a window's domain `box x [0, r_max]`; component `d` is the
    /// radius. The box is translated into the nonnegative orthant.
    pub fn for_window(window: &Window) -> Result<Self> {
        let w = window.wbits();
        let d = window.dim();
        let m = d + 1;
        let mut offsets: ArrayVec<i64, MAX_COMPONENTS> = ArrayVec::new();
        let mut extents: ArrayVec<u64, MAX_COMPONENTS> = ArrayVec::new();
        for i in 0..d {
            let lo = to_raw(window.lo()[i], w);
            let hi = to_raw(window.hi()[i], w);
            offsets.push(lo);
            extents.push((hi - lo) as u64);
        }
        offsets.push(0);
        // radius cells 0..=r_max, closed upper end
        extents.push(to_raw(window.r_max(), w) as u64 + 1);
        let comp_bits = extents
            .iter()
            .map(|&e| bit_len(e.saturating_sub(1)))
            .max()
            .unwrap()
            .max(1);
        if (m as u32) * comp_bits > 128 {
            return Err(Error::OutOfRange(format!(
                "key needs {} bits (m={m}, {comp_bits} bits/component)",
                m as u32 * comp_bits
            )));
        }
        Ok(OrderCodec {
            m,
            wbits: w,
            comp_bits,
            offsets,
            extents,
        })
    }

    /// Raw codec over `m` components of `comp_bits` bits each, no offsets.
    pub fn with_bits(m: usize, comp_bits: u32, wbits: u32) -> Result<Self> {
        if m == 0 || m > MAX_COMPONENTS || comp_bits == 0 || comp_bits > 63 {
            return Err(Error::InvalidParam(format!(
                "codec shape m={m}, comp_bits={comp_bits}"
            )));
        }
        if (m as u32) * comp_bits > 128 {
            return Err(Error::OutOfRange(format!(
                "key needs {} bits",
                m as u32 * comp_bits
            )));
        }
        let mut offsets = ArrayVec::new();
        let mut extents = ArrayVec::new();
        for _ in 0..m {
            offsets.push(0i64);
            extents.push(1u64 << comp_bits);
        }
        Ok(OrderCodec {
            m,
            wbits,
            comp_bits,
            offsets,
            extents,
        })
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn wbits(&self) -> u32 {
        self.wbits
    }

    pub fn total_bits(&self) -> u32 {
        self.m as u32 * self.comp_bits
    }

    /// One past the largest key; `None` when the key space spans all 128 bits.
    pub fn key_end(&self) -> Option<u128> {
        let t = self.total_bits();
        if t < 128 {
            Some(1u128 << t)
        } else {
            None
        }
    }

    /// Digit-interleave raw component values (component 0 gets bit 0).
    pub fn interleave(&self, raws: &[u64]) -> u128 {
        debug_assert_eq!(raws.len(), self.m);
        let mut key = 0u128;
        for q in 0..self.comp_bits {
            for (i, &r) in raws.iter().enumerate() {
                let bit = (r >> q) & 1;
                key |= (bit as u128) << (q as usize * self.m + i);
            }
        }
        key
    }

    pub fn deinterleave(&self, key: u128) -> ArrayVec<u64, MAX_COMPONENTS> {
        let mut raws: ArrayVec<u64, MAX_COMPONENTS> = ArrayVec::new();
        for _ in 0..self.m {
            raws.push(0);
        }
        for q in 0..self.comp_bits {
            for i in 0..self.m {
                let bit = (key >> (q as usize * self.m + i)) & 1;
                raws[i] |= (bit as u64) << q;
            }
        }
        raws
    }

    pub fn encode_raws(&self, raws: &[u64]) -> Result<OrderKey> {
        if raws.len() != self.m {
            return Err(Error::DimensionMismatch(raws.len(), self.m));
        }
        for (i, &r) in raws.iter().enumerate() {
            if r >= self.extents[i] {
                return Err(Error::OutOfRange(format!(
                    "component {i} raw {r} >= extent {}",
                    self.extents[i]
                )));
            }
        }
        Ok(OrderKey(self.interleave(raws)))
    }

    pub fn encode(&self, p: &Point) -> Result<OrderKey> {
        if p.dim() + 1 != self.m {
            return Err(Error::DimensionMismatch(p.dim() + 1, self.m));
        }
        let mut raws: ArrayVec<u64, MAX_COMPONENTS> = ArrayVec::new();
        for i in 0..p.dim() {
            let raw = to_raw(p.pos()[i], self.wbits) - self.offsets[i];
            if raw < 0 || raw as u64 >= self.extents[i] {
                return Err(Error::OutOfRange(format!(
                    "coordinate {} = {}",
                    i,
                    p.pos()[i]
                )));
            }
            raws.push(raw as u64);
        }
        let rr = to_raw(p.radius(), self.wbits);
        if rr < 0 || rr as u64 >= self.extents[self.m - 1] {
            return Err(Error::OutOfRange(format!("radius {}", p.radius())));
        }
        raws.push(rr as u64);
        Ok(OrderKey(self.interleave(&raws)))
    }

    pub fn decode(&self, key: OrderKey) -> Result<Point> {
        let raws = self.deinterleave(key.0);
        for (i, &r) in raws.iter().enumerate() {
            if r >= self.extents[i] {
                return Err(Error::OutOfRange(format!(
                    "key component {i} raw {r} outside domain"
                )));
            }
        }
        let d = self.m - 1;
        let pos: Vec<f64> = (0..d)
            .map(|i| from_raw(raws[i] as i64 + self.offsets[i], self.wbits))
            .collect();
        let radius = from_raw(raws[d] as i64, self.wbits);
        Point::new(&pos, radius)
    }

    /// Order of two points under the interleaved key order.
    pub fn compare(&self, x: &Point, y: &Point) -> Result<std::cmp::Ordering> {
        Ok(self.encode(x)?.cmp(&self.encode(y)?))
    }

    /// Maximal aligned dyadic blocks covering `[lo, hi)`.
    pub fn decompose(&self, lo: u128, hi: Option<u128>) -> Vec<KeyBlock> {
        let total = self.total_bits();
        let end = match hi {
            Some(h) => Some(h.min(self.key_end().unwrap_or(u128::MAX))),
            None => self.key_end(),
        };
        if let (None, 0) = (end, lo) {
            // whole 128-bit key space in one block
            return vec![KeyBlock {
                start: 0,
                level: total,
            }];
        }
        let mut out = Vec::new();
        let mut cur = lo;
        loop {
            let remaining = match end {
                Some(e) => {
                    if cur >= e {
                        break;
                    }
                    e - cur
                }
                None => cur.wrapping_neg(), // 2^128 - cur, cur > 0 here
            };
            let align = if cur == 0 {
                total
            } else {
                cur.trailing_zeros()
            };
            let size = 127 - remaining.leading_zeros();
            let level = align.min(size).min(total);
            out.push(KeyBlock { start: cur, level });
            let (next, overflow) = cur.overflowing_add(1u128 << level);
            if overflow {
                break;
            }
            cur = next;
            if end.is_none() && cur == 0 {
                break;
            }
        }
        out
    }

    /// Clip a block to the domain extents; `None` when nothing survives.
    pub fn block_cellbox(&self, block: &KeyBlock) -> Option<CellBox> {
        let bases = self.deinterleave(block.start);
        let mut ranges: ArrayVec<(u64, u64), MAX_COMPONENTS> = ArrayVec::new();
        for i in 0..self.m {
            // free bits of component i inside this block
            let level = block.level as usize;
            let free = if level > i {
                ((level - i) + self.m - 1) / self.m
            } else {
                0
            } as u32;
            let span = if free >= 64 { u64::MAX } else { 1u64 << free };
            let a = bases[i];
            let b = a.saturating_add(span).min(self.extents[i]);
            if a >= b {
                return None;
            }
            ranges.push((a, b));
        }
        Some(CellBox { ranges })
    }

    /// `Lebesgue x Q` mass of a clipped hyperblock.
    pub fn cellbox_mass(&self, cb: &CellBox, law: &RadiusLaw) -> f64 {
        let d = self.m - 1;
        let cell = 1.0 / (1u64 << self.wbits) as f64;
        let mut vol = 1.0;
        for i in 0..d {
            vol *= (cb.ranges[i].1 - cb.ranges[i].0) as f64 * cell;
        }
        let (ra, rb) = cb.ranges[d];
        vol * law.interval_mass(ra as f64 * cell, rb as f64 * cell)
    }

    /// Q*-mass of an order interval. Exact for unrestricted intervals; with a
    /// region attached, a Monte-Carlo membership fraction with its standard
    /// error scales the exact enclosing mass.
    pub fn interval_measure<R: Rng + ?Sized>(
        &self,
        iv: &OrderInterval,
        law: &RadiusLaw,
        mc_budget: usize,
        rng: &mut R,
    ) -> Measure {
        let sampler = self.interval_sampler(iv, law);
        let total = sampler.total();
        match &iv.region {
            None => Measure::exact(total),
            Some(region) if region.is_full() => Measure::exact(total),
            Some(region) => {
                if total == 0.0 || mc_budget == 0 {
                    return Measure::exact(0.0);
                }
                let mut hits = 0usize;
                for _ in 0..mc_budget {
                    if region.member(&sampler.sample_unrestricted(rng)) {
                        hits += 1;
                    }
                }
                let frac = hits as f64 / mc_budget as f64;
                let se = (frac * (1.0 - frac) / mc_budget as f64).sqrt();
                Measure {
                    value: total * frac,
                    std_error: total * se,
                }
            }
        }
    }

    /// Sampler for the reference measure restricted to an interval.
    pub fn interval_sampler(&self, iv: &OrderInterval, law: &RadiusLaw) -> IntervalSampler {
        let mut boxes = Vec::new();
        let mut cum = Vec::new();
        let mut total = 0.0;
        for block in self.decompose(iv.lo.0, iv.hi.map(|k| k.0)) {
            if let Some(cb) = self.block_cellbox(&block) {
                let mass = self.cellbox_mass(&cb, law);
                if mass > 0.0 {
                    total += mass;
                    boxes.push(cb);
                    cum.push(total);
                }
            }
        }
        IntervalSampler {
            codec: self.clone(),
            law: law.clone(),
            region: iv.region.clone(),
            boxes,
            cum,
            total,
        }
    }

    /// Smallest domain key `>= key`, or `None` past the end.
    pub fn next_domain_key(&self, key: u128) -> Option<OrderKey> {
        for block in self.decompose(key, None) {
            if let Some(k) = self.min_key_in_block(&block) {
                return Some(OrderKey(k));
            }
        }
        None
    }

    fn min_key_in_block(&self, block: &KeyBlock) -> Option<u128> {
        self.block_cellbox(block)?;
        if block.level == 0 {
            return Some(block.start);
        }
        let top = block.level - 1;
        let child0 = KeyBlock {
            start: block.start,
            level: top,
        };
        if let Some(k) = self.min_key_in_block(&child0) {
            return Some(k);
        }
        let child1 = KeyBlock {
            start: block.start | (1u128 << top),
            level: top,
        };
        self.min_key_in_block(&child1)
    }

    /// The point `X_eps` with `X ⪯ X_eps` and `Q*([X, X_eps)) = eps` up to
    /// one key quantum. Works on unrestricted intervals only.
    pub fn successor_at_mass(
        &self,
        x: &Point,
        eps: f64,
        law: &RadiusLaw,
    ) -> Result<Successor> {
        let from = self.encode(x)?;
        let mut scratch = rand_chacha::ChaCha12Rng::seed_from_u64(0);
        let measure_to = |hi: Option<u128>, rng: &mut rand_chacha::ChaCha12Rng| -> f64 {
            let iv = OrderInterval {
                lo: from,
                hi: hi.map(OrderKey),
                region: None,
            };
            self.interval_measure(&iv, law, 0, rng).value
        };
        let remaining = measure_to(None, &mut scratch);
        if eps > remaining * (1.0 + 1e-12) {
            return Err(Error::InsufficientMass {
                requested: eps,
                available: remaining,
            });
        }
        if eps <= 0.0 {
            return Ok(Successor::Point(x.clone()));
        }
        if eps >= remaining {
            return Ok(Successor::End);
        }
        // minimal K with Q*([X, K)) >= eps, by bisection on the key offset
        let end_off = match self.key_end() {
            Some(e) => e - from.0,
            None => from.0.wrapping_neg(),
        };
        let mut lo_off: u128 = 0; // measure 0 < eps
        let mut hi_off: u128 = end_off; // measure = remaining >= eps
        while hi_off - lo_off > 1 {
            let mid = lo_off + (hi_off - lo_off) / 2;
            let m = measure_to(Some(from.0 + mid), &mut scratch);
            if m >= eps {
                hi_off = mid;
            } else {
                lo_off = mid;
            }
        }
        match self.next_domain_key(from.0 + hi_off) {
            Some(k) => Ok(Successor::Point(self.decode(k)?)),
            None => Ok(Successor::End),
        }
    }
}

use rand_chacha::rand_core::SeedableRng;

/// Result of [`OrderCodec::successor_at_mass`]: either a domain point or the
/// end-of-domain sentinel when the requested mass exhausts the interval.
#[derive(Clone, Debug, PartialEq)]
pub enum Successor {
    Point(Point),
    End,
}

/// Draws points from the reference measure on a fixed order interval.
pub struct IntervalSampler {
    codec: OrderCodec,
    law: RadiusLaw,
    region: Option<Region>,
    boxes: Vec<CellBox>,
    cum: Vec<f64>,
    total: f64,
}

impl IntervalSampler {
    /// Q*-mass of the interval ignoring any region restriction.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0.0
    }

    /// One point from Q* restricted to the interval (region ignored).
    pub fn sample_unrestricted<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        debug_assert!(self.total > 0.0);
        let u: f64 = rng.random::<f64>() * self.total;
        let idx = self.cum.partition_point(|&c| c < u).min(self.boxes.len() - 1);
        let cb = &self.boxes[idx];
        let d = self.codec.m - 1;
        let w = self.codec.wbits;
        let cell = 1.0 / (1u64 << w) as f64;
        let pos: Vec<f64> = (0..d)
            .map(|i| {
                let (a, b) = cb.ranges[i];
                from_raw(rng.random_range(a..b) as i64 + self.codec.offsets[i], w)
            })
            .collect();
        let (ra, rb) = cb.ranges[d];
        let r = self
            .law
            .sample_in(ra as f64 * cell, rb as f64 * cell, rng)
            .expect("positive-mass radius range");
        Point::new(&pos, crate::space::quantize_floor(r, w)).expect("valid point")
    }

    /// One point respecting the region restriction; `None` if rejection fails
    /// within `max_tries` (degenerate or vanishing regions).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_tries: usize) -> Option<Point> {
        if self.total == 0.0 {
            return None;
        }
        match &self.region {
            None => Some(self.sample_unrestricted(rng)),
            Some(region) => {
                for _ in 0..max_tries {
                    let p = self.sample_unrestricted(rng);
                    if region.member(&p) {
                        return Some(p);
                    }
                }
                None
            }
        }
    }
}

/// Merged spatial sections of an order interval at one fixed radius row:
/// the set `{x : (x, r) in iv}` for d = 1, as disjoint real intervals.
/// The backbone of the exact one-dimensional partition-function oracles.
pub fn spatial_sections_1d(
    codec: &OrderCodec,
    iv: &OrderInterval,
    radius: f64,
) -> Result<Vec<(f64, f64)>> {
    if codec.m != 2 {
        return Err(Error::InvalidParam(
            "spatial sections need a 1-d window codec".into(),
        ));
    }
    let w = codec.wbits;
    let r_raw = to_raw(radius, w) as u64;
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for block in codec.decompose(iv.lo.0, iv.hi.map(|k| k.0)) {
        if let Some(cb) = codec.block_cellbox(&block) {
            let (ra, rb) = cb.ranges[1];
            if ra <= r_raw && r_raw < rb {
                let (a, b) = cb.ranges[0];
                pieces.push((
                    from_raw(a as i64 + codec.offsets[0], w),
                    from_raw(b as i64 + codec.offsets[0], w),
                ));
            }
        }
    }
    let mut sections = ivset::normalize(pieces);
    if let Some(region) = &iv.region {
        if let Some(inc) = region.include_reach() {
            let reach = reach_intervals(inc, radius);
            sections = ivset::intersect(&sections, &reach);
        }
        let excl = reach_intervals(region.exclude_reach(), radius);
        sections = ivset::subtract(&sections, &excl);
    }
    Ok(sections)
}

/// Spatial reach of a boundary configuration for a probe ball of `radius`:
/// positions whose ball intersects some boundary ball (d = 1).
pub fn reach_intervals(boundary: &crate::space::Configuration, radius: f64) -> Vec<(f64, f64)> {
    ivset::normalize(
        boundary
            .iter()
            .map(|y| {
                let reach = y.radius() + radius;
                (y.pos()[0] - reach, y.pos()[0] + reach)
            })
            .collect(),
    )
}

/// Set algebra on unions of real intervals, kept sorted and disjoint.
pub mod ivset {
    pub fn normalize(mut xs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
        xs.retain(|&(a, b)| b > a);
        xs.sort_by(|u, v| u.0.partial_cmp(&v.0).unwrap());
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
        for (a, b) in xs {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        out
    }

    pub fn intersect(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < xs.len() && j < ys.len() {
            let a = xs[i].0.max(ys[j].0);
            let b = xs[i].1.min(ys[j].1);
            if b > a {
                out.push((a, b));
            }
            if xs[i].1 <= ys[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        out
    }

    pub fn subtract(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &(mut a, b) in xs {
            for &(c, d) in ys {
                if d <= a || c >= b {
                    continue;
                }
                if c > a {
                    out.push((a, c));
                }
                a = a.max(d);
                if a >= b {
                    break;
                }
            }
            if b > a {
                out.push((a, b));
            }
        }
        out
    }

    pub fn total_len(xs: &[(f64, f64)]) -> f64 {
        xs.iter().map(|&(a, b)| b - a).sum()
    }
}
