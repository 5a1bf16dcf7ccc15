//! Run-length-encoded binary masks.
//!
//! Pixels are ordered column-major (index `col * height + row`), and the run
//! list alternates background/foreground starting with background, the same
//! convention as uncompressed COCO RLE. A mask is always stored in canonical
//! form: no zero-length runs except a single leading zero when the first pixel
//! is foreground.
//!
//! Set operations work directly on the runs; nothing here decodes to a pixel
//! grid except [`Mask::decode`] itself.

use crate::error::{Error, Result};
use crate::flow::FlowField;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    height: u32,
    width: u32,
    runs: Vec<u32>,
}

/// Decoded mask: one boolean per pixel, column-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelGrid {
    height: u32,
    width: u32,
    data: Vec<bool>,
}

impl PixelGrid {
    pub fn new(height: u32, width: u32) -> Self {
        PixelGrid {
            height,
            width,
            data: vec![false; height as usize * width as usize],
        }
    }

    pub fn from_fn(height: u32, width: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut grid = PixelGrid::new(height, width);
        for col in 0..width {
            for row in 0..height {
                grid.set(row, col, f(row, col));
            }
        }
        grid
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn get(&self, row: u32, col: u32) -> bool {
        self.data[self.index(row, col)]
    }

    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        let idx = self.index(row, col);
        self.data[idx] = value;
    }

    pub fn count(&self) -> u64 {
        self.data.iter().filter(|&&v| v).count() as u64
    }

    /// Column-major pixel values.
    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    fn index(&self, row: u32, col: u32) -> usize {
        assert!(row < self.height && col < self.width, "pixel out of bounds");
        col as usize * self.height as usize + row as usize
    }
}

impl Mask {
    /// Builds a mask from a run list, canonicalizing it. Fails if the runs do
    /// not cover exactly `height * width` pixels.
    pub fn from_runs(height: u32, width: u32, runs: &[u32]) -> Result<Self> {
        let total: u64 = runs.iter().map(|&r| r as u64).sum();
        let expected = height as u64 * width as u64;
        if total != expected {
            return Err(Error::format(
                "rle",
                format!("run lengths sum to {total}, expected {height}x{width} = {expected}"),
            ));
        }
        let mut intervals = Vec::new();
        let mut pos = 0u32;
        for (i, &len) in runs.iter().enumerate() {
            if i % 2 == 1 && len > 0 {
                intervals.push((pos, pos + len));
            }
            pos += len;
        }
        Ok(Mask::from_intervals(height, width, &intervals))
    }

    pub fn empty(height: u32, width: u32) -> Self {
        Mask::from_intervals(height, width, &[])
    }

    pub fn full(height: u32, width: u32) -> Self {
        let n = height * width;
        Mask::from_intervals(height, width, &[(0, n)])
    }

    /// Axis-aligned rectangle with top-left corner (`top`, `left`), clipped to the grid.
    pub fn rect(height: u32, width: u32, top: i64, left: i64, rect_h: u32, rect_w: u32) -> Self {
        let r0 = top.clamp(0, height as i64) as u32;
        let r1 = (top + rect_h as i64).clamp(0, height as i64) as u32;
        let c0 = left.clamp(0, width as i64) as u32;
        let c1 = (left + rect_w as i64).clamp(0, width as i64) as u32;
        let mut intervals = Vec::new();
        if r0 < r1 {
            for col in c0..c1 {
                let base = col * height;
                intervals.push((base + r0, base + r1));
            }
        }
        Mask::from_intervals(height, width, &intervals)
    }

    /// Encodes a pixel grid.
    pub fn encode(grid: &PixelGrid) -> Self {
        let mut intervals = Vec::new();
        let mut start = None;
        for (i, &v) in grid.data.iter().enumerate() {
            match (v, start) {
                (true, None) => start = Some(i as u32),
                (false, Some(s)) => {
                    intervals.push((s, i as u32));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            intervals.push((s, grid.data.len() as u32));
        }
        Mask::from_intervals(grid.height, grid.width, &intervals)
    }

    /// Builds a canonical mask from sorted, non-overlapping half-open
    /// foreground intervals of column-major pixel indices. Touching
    /// intervals are merged.
    pub(crate) fn from_intervals(height: u32, width: u32, intervals: &[(u32, u32)]) -> Self {
        let n = height * width;
        let mut runs = Vec::with_capacity(intervals.len() * 2 + 1);
        let mut pos = 0u32;
        let mut open: Option<(u32, u32)> = None;
        let flush = |runs: &mut Vec<u32>, pos: &mut u32, (s, e): (u32, u32)| {
            runs.push(s - *pos);
            runs.push(e - s);
            *pos = e;
        };
        for &(s, e) in intervals {
            debug_assert!(s <= e && e <= n);
            if s == e {
                continue;
            }
            open = match open {
                Some((os, oe)) if s <= oe => Some((os, oe.max(e))),
                Some(prev) => {
                    flush(&mut runs, &mut pos, prev);
                    Some((s, e))
                }
                None => Some((s, e)),
            };
        }
        if let Some(prev) = open {
            flush(&mut runs, &mut pos, prev);
        }
        if pos < n {
            runs.push(n - pos);
        }
        Mask {
            height,
            width,
            runs,
        }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.height, self.width)
    }

    /// Canonical run list.
    pub fn runs(&self) -> &[u32] {
        &self.runs
    }

    pub fn decode(&self) -> PixelGrid {
        let mut grid = PixelGrid::new(self.height, self.width);
        for (s, e) in self.intervals() {
            grid.data[s as usize..e as usize].fill(true);
        }
        grid
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).map(|&r| r as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    /// Half-open foreground intervals over column-major pixel indices.
    pub fn intervals(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let mut pos = 0u32;
        self.runs.chunks(2).filter_map(move |pair| {
            let start = pos + pair[0];
            let len = pair.get(1).copied().unwrap_or(0);
            pos = start + len;
            (len > 0).then_some((start, start + len))
        })
    }

    /// Iterates foreground pixels as `(row, col)`.
    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let h = self.height;
        self.intervals()
            .flat_map(move |(s, e)| (s..e).map(move |i| (i % h, i / h)))
    }

    fn check_dims(&self, other: &Mask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::contract(format!(
                "mask dimensions differ: {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    pub fn intersection_area(&self, other: &Mask) -> Result<u64> {
        self.check_dims(other)?;
        Ok(intersection_len(self.intervals(), other.intervals()))
    }

    /// Intersection over union. Two empty masks have IoU 0.
    pub fn iou(&self, other: &Mask) -> Result<f64> {
        let inter = self.intersection_area(other)?;
        let union = self.area() + other.area() - inter;
        if union == 0 {
            return Ok(0.0);
        }
        Ok(inter as f64 / union as f64)
    }

    pub fn union(&self, other: &Mask) -> Result<Mask> {
        self.check_dims(other)?;
        let merged = union_intervals(
            &self.intervals().collect::<Vec<_>>(),
            &other.intervals().collect::<Vec<_>>(),
        );
        Ok(Mask::from_intervals(self.height, self.width, &merged))
    }

    /// Pixels of `self` not in `other`.
    pub fn difference(&self, other: &Mask) -> Result<Mask> {
        self.check_dims(other)?;
        let diff = difference_intervals(
            &self.intervals().collect::<Vec<_>>(),
            &other.intervals().collect::<Vec<_>>(),
        );
        Ok(Mask::from_intervals(self.height, self.width, &diff))
    }

    pub fn is_subset_of(&self, other: &Mask) -> Result<bool> {
        Ok(self.intersection_area(other)? == self.area())
    }

    /// Forward-splats every foreground pixel `(x, y)` to
    /// `(round(x + dx), round(y + dy))`. Destinations outside the grid are
    /// dropped; collisions set the destination once. No hole filling.
    pub fn warp(&self, flow: &FlowField) -> Result<Mask> {
        if flow.dims() != self.dims() {
            return Err(Error::contract(format!(
                "flow is {}x{} but mask is {}x{}",
                flow.height(),
                flow.width(),
                self.height,
                self.width
            )));
        }
        let (h, w) = (self.height as f64, self.width as f64);
        let mut dest: Vec<u32> = Vec::with_capacity(self.area() as usize);
        for (row, col) in self.pixels() {
            let (dx, dy) = flow.at(row, col);
            let x = (col as f64 + dx as f64).round();
            let y = (row as f64 + dy as f64).round();
            if x >= 0.0 && x < w && y >= 0.0 && y < h {
                dest.push(x as u32 * self.height + y as u32);
            }
        }
        dest.sort_unstable();
        dest.dedup();
        let mut intervals: Vec<(u32, u32)> = Vec::new();
        for idx in dest {
            match intervals.last_mut() {
                Some(last) if last.1 == idx => last.1 += 1,
                _ => intervals.push((idx, idx + 1)),
            }
        }
        Ok(Mask::from_intervals(self.height, self.width, &intervals))
    }
}

/// Resolves overlaps by priority: each pixel goes to the first mask in
/// `masks` that covers it. Output masks are pairwise disjoint, each a subset
/// of its input, and may be empty.
pub fn clip_stack(masks: &[Mask]) -> Result<Vec<Mask>> {
    let Some(first) = masks.first() else {
        return Ok(Vec::new());
    };
    let mut covered: Vec<(u32, u32)> = Vec::new();
    let mut out = Vec::with_capacity(masks.len());
    for mask in masks {
        first.check_dims(mask)?;
        let own: Vec<(u32, u32)> = mask.intervals().collect();
        let clipped = difference_intervals(&own, &covered);
        out.push(Mask::from_intervals(mask.height, mask.width, &clipped));
        covered = union_intervals(&covered, &own);
    }
    Ok(out)
}

fn intersection_len(
    a: impl Iterator<Item = (u32, u32)>,
    b: impl Iterator<Item = (u32, u32)>,
) -> u64 {
    let mut a = a.peekable();
    let mut b = b.peekable();
    let mut total = 0u64;
    while let (Some(&(as_, ae)), Some(&(bs, be))) = (a.peek(), b.peek()) {
        let lo = as_.max(bs);
        let hi = ae.min(be);
        if lo < hi {
            total += (hi - lo) as u64;
        }
        if ae <= be {
            a.next();
        } else {
            b.next();
        }
    }
    total
}

fn union_intervals(a: &[(u32, u32)], b: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let mut all: Vec<(u32, u32)> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i].0 <= b[j].0) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        match all.last_mut() {
            Some(last) if next.0 <= last.1 => last.1 = last.1.max(next.1),
            _ => all.push(next),
        }
    }
    all
}

fn difference_intervals(a: &[(u32, u32)], b: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &(s, e) in a {
        let mut cur = s;
        while j < b.len() && b[j].1 <= cur {
            j += 1;
        }
        let mut k = j;
        while k < b.len() && b[k].0 < e {
            if b[k].0 > cur {
                out.push((cur, b[k].0));
            }
            cur = cur.max(b[k].1);
            if cur >= e {
                break;
            }
            k += 1;
        }
        if cur < e {
            out.push((cur, e));
        }
    }
    out
}
