//! Merged resource-state layers at site granularity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{HardwareConfig, OnlineError, TEMPORAL_RESERVE};

/// Neighbour order used everywhere: up, right, down, left.
pub(crate) const DIRS: [(i32, i32); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
const UP: usize = 0;
const RIGHT: usize = 1;
const DOWN: usize = 2;
const LEFT: usize = 3;

/// Half-open site rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedLayer {
    pub width: u32,
    pub height: u32,
    /// Degree left on each site after merging.
    pub degree: Vec<u32>,
    /// Quarter-turn byproducts recorded by failed merges, per site.
    pub byproducts: Vec<u32>,
    /// Qubits set aside for the layers below and above.
    pub temporal_reserved: Vec<u32>,
    right: Vec<bool>,
    up: Vec<bool>,
}

impl MergedLayer {
    /// A layer with no bonds and full degree.
    pub fn empty(width: u32, height: u32) -> Self {
        let n = (width * height) as usize;
        Self {
            width,
            height,
            degree: vec![super::REQUIRED_DEGREE; n],
            byproducts: vec![0; n],
            temporal_reserved: vec![TEMPORAL_RESERVE; n],
            right: vec![false; n],
            up: vec![false; n],
        }
    }

    /// Every in-plane bond present.
    pub fn full(width: u32, height: u32) -> Self {
        let mut l = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                let i = l.idx(x, y);
                l.right[i] = x + 1 < width;
                l.up[i] = y + 1 < height;
            }
        }
        l
    }

    /// Plain bond percolation: each bond present with probability `p`.
    pub fn bernoulli(width: u32, height: u32, p: f64, rng: &mut impl Rng) -> Self {
        let mut l = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                let i = l.idx(x, y);
                if x + 1 < width {
                    l.right[i] = rng.random_bool(p);
                }
                if y + 1 < height {
                    l.up[i] = rng.random_bool(p);
                }
            }
        }
        l
    }

    pub fn sites(&self) -> usize {
        (self.width * self.height) as usize
    }

    pub fn idx(&self, x: u32, y: u32) -> usize {
        (y * self.width + x) as usize
    }

    pub fn coords(&self, i: usize) -> (u32, u32) {
        (i as u32 % self.width, i as u32 / self.width)
    }

    pub(crate) fn step(&self, x: u32, y: u32, d: usize) -> Option<(u32, u32)> {
        let (dx, dy) = DIRS[d];
        let nx = x as i32 + dx;
        let ny = y as i32 + dy;
        (nx >= 0 && ny >= 0 && (nx as u32) < self.width && (ny as u32) < self.height).then_some((nx as u32, ny as u32))
    }

    /// Whether the bond from `(x, y)` in direction `d` is present.
    pub fn bond(&self, x: u32, y: u32, d: usize) -> bool {
        match (d, self.step(x, y, d)) {
            (_, None) => false,
            (UP, _) => self.up[self.idx(x, y)],
            (RIGHT, _) => self.right[self.idx(x, y)],
            (DOWN, _) => self.up[self.idx(x, y - 1)],
            (_, _) => self.right[self.idx(x - 1, y)],
        }
    }

    pub fn set_bond(&mut self, x: u32, y: u32, d: usize, on: bool) {
        if self.step(x, y, d).is_none() {
            return;
        }
        match d {
            UP => {
                let i = self.idx(x, y);
                self.up[i] = on
            }
            RIGHT => {
                let i = self.idx(x, y);
                self.right[i] = on
            }
            DOWN => {
                let i = self.idx(x, y - 1);
                self.up[i] = on
            }
            _ => {
                let i = self.idx(x - 1, y);
                self.right[i] = on
            }
        }
    }

    /// Bonded neighbours of site `i` in up, right, down, left order.
    pub fn bonded(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, y) = self.coords(i);
        (0..4).filter_map(move |d| {
            if self.bond(x, y, d) {
                self.step(x, y, d).map(|(nx, ny)| self.idx(nx, ny))
            } else {
                None
            }
        })
    }

    pub fn bond_count(&self) -> usize {
        self.right.iter().chain(&self.up).filter(|b| **b).count()
    }

    pub fn possible_bonds(&self) -> usize {
        let (w, h) = (self.width as usize, self.height as usize);
        2 * w * h - w - h
    }
}

/// Qubits a site spends on each in-plane direction (up, right, down, left).
///
/// One per direction first; spare degree then goes round-robin starting
/// with the direction that faces the site's checkerboard partner, so that
/// neighbouring sites put their spares on the same bond.
pub(crate) fn direction_budget(x: u32, y: u32, degree: u32) -> [u32; 4] {
    let mut in_plane = degree.saturating_sub(TEMPORAL_RESERVE);
    let mut c = [0u32; 4];
    for slot in c.iter_mut() {
        if in_plane == 0 {
            break;
        }
        *slot = 1;
        in_plane -= 1;
    }
    let v = if y.is_multiple_of(2) { UP } else { DOWN };
    let h = if x.is_multiple_of(2) { RIGHT } else { LEFT };
    let order = [v, h, v ^ 2, h ^ 2];
    let mut k = 0;
    while in_plane > 0 {
        c[order[k % 4]] += 1;
        in_plane -= 1;
        k += 1;
    }
    c
}

/// Merges `m` stars per site, then fuses in-plane bonds in one batch plus
/// `retry_batches` retry rounds. Degree shortfalls only cost retries: the
/// first batch always attempts every adjacent pair. Returns the layer and
/// the exact number of attempted fusions `(merge, in_plane, retries)`.
pub fn build_merged_layer(cfg: &HardwareConfig, rng: &mut impl Rng) -> Result<(MergedLayer, [u64; 3]), OnlineError> {
    let m = cfg.merge_factor()?;
    let s = cfg.resource_state_size;
    let p = cfg.p_eff();
    let mut l = MergedLayer::empty(cfg.rsl_width, cfg.rsl_height);
    let mut counts = [0u64; 3];
    for i in 0..l.sites() {
        let mut deg = (s - 1) as i64;
        let mut byp = 0;
        for _ in 1..m {
            counts[0] += 1;
            if rng.random_bool(p) {
                deg += (s - 2) as i64;
                continue;
            }
            // The consumed leaf costs one degree; the partner star's leaves
            // survive as a clique and can be retried from another leaf.
            deg -= 1;
            byp += 1;
            if cfg.retry_batches > 0 && deg > 0 {
                counts[0] += 1;
                if rng.random_bool(p) {
                    deg += s as i64 - 3;
                } else {
                    deg -= 1;
                }
            }
        }
        l.degree[i] = deg.max(0) as u32;
        l.byproducts[i] = byp;
        l.temporal_reserved[i] = l.degree[i].min(TEMPORAL_RESERVE);
    }
    let budgets: Vec<[u32; 4]> = (0..l.sites())
        .map(|i| {
            let (x, y) = l.coords(i);
            direction_budget(x, y, l.degree[i])
        })
        .collect();
    // Every adjacent pair is fused once; a failed bond may be retried as
    // often as both ends have spare qubits facing each other.
    let mut pending: Vec<(u32, u32, usize, u32)> = Vec::new();
    for y in 0..l.height {
        for x in 0..l.width {
            for d in [RIGHT, UP] {
                let Some((nx, ny)) = l.step(x, y, d) else { continue };
                let a = budgets[l.idx(x, y)][d].saturating_sub(1);
                let b = budgets[l.idx(nx, ny)][d ^ 2].saturating_sub(1);
                let spare = a.min(b);
                counts[1] += 1;
                if rng.random_bool(p) {
                    l.set_bond(x, y, d, true);
                } else if spare > 0 {
                    pending.push((x, y, d, spare));
                }
            }
        }
    }
    for _ in 0..cfg.retry_batches {
        let mut next = Vec::new();
        for (x, y, d, left) in pending {
            counts[2] += 1;
            if rng.random_bool(p) {
                l.set_bond(x, y, d, true);
            } else if left > 1 {
                next.push((x, y, d, left - 1));
            }
        }
        pending = next;
    }
    Ok((l, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::online::substream;

    #[test]
    fn certain_fusions_give_full_grid() {
        for s in [4, 7] {
            let cfg = HardwareConfig { p_fusion: 1.0, ..HardwareConfig::new(6, 5, s, 1.0) };
            let (l, c) = build_merged_layer(&cfg, &mut substream(1, 0, 0)).unwrap();
            assert_eq!(l.bond_count(), l.possible_bonds());
            let m = cfg.merge_factor().unwrap() as u64;
            assert_eq!(c, [(m - 1) * 30, 2 * 30 - 6 - 5, 0]);
        }
    }

    #[test]
    fn impossible_fusions_leave_no_bonds() {
        let mut cfg = HardwareConfig::new(6, 6, 7, 1.0);
        cfg.p_fusion = 1e-300;
        let (l, c) = build_merged_layer(&cfg, &mut substream(1, 0, 0)).unwrap();
        assert_eq!(l.bond_count(), 0);
        // Seven-qubit stars: one attempt per pair, no spare degree to retry.
        assert_eq!(c, [0, 60, 0]);
    }

    #[test]
    fn budgets_pair_spares() {
        assert_eq!(direction_budget(0, 0, 6), [1, 1, 1, 1]);
        assert_eq!(direction_budget(0, 0, 7), [2, 1, 1, 1]);
        assert_eq!(direction_budget(0, 1, 7), [1, 1, 2, 1]);
        assert_eq!(direction_budget(0, 0, 4), [1, 1, 0, 0]);
        assert_eq!(direction_budget(0, 0, 1), [0; 4]);
    }

    #[test]
    fn retry_density_on_eligible_bonds() {
        // Four-qubit stars merge to degree 7 when all merges succeed; bonds
        // between rows 2k and 2k+1 then carry a spare on both ends.
        let mut cfg = HardwareConfig::new(48, 48, 4, 0.75);
        cfg.retry_batches = 1;
        let (mut hits, mut total) = (0u64, 0u64);
        for seed in 0..100 {
            let (l, _) = build_merged_layer(&cfg, &mut substream(seed, 0, 0)).unwrap();
            for y in (0..47).step_by(2) {
                for x in 0..48 {
                    let (a, b) = (l.idx(x, y), l.idx(x, y + 1));
                    if l.degree[a] >= 7 && l.degree[b] >= 7 {
                        total += 1;
                        hits += l.bond(x, y, UP) as u64;
                    }
                }
            }
        }
        let density = hits as f64 / total as f64;
        assert!((density - 0.9375).abs() < 0.01, "{density}");
    }

    #[test]
    fn bond_accessors_agree() {
        let mut l = MergedLayer::empty(3, 3);
        l.set_bond(1, 1, LEFT, true);
        assert!(l.bond(0, 1, RIGHT));
        l.set_bond(1, 1, DOWN, true);
        assert!(l.bond(1, 0, UP));
        assert_eq!(l.bonded(l.idx(1, 1)).collect::<Vec<_>>(), vec![l.idx(1, 0), l.idx(0, 1)]);
        assert!(!l.bond(0, 0, LEFT));
    }
}
