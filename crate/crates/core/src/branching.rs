//! Greedy input branching with a Monte-Carlo anchor.
//!
//! The root box is sampled once to get empirical extremes of the function.
//! The branch whose bound is farthest from those extremes is split in
//! halves along every free coordinate, its children are bounded in
//! parallel, and the process repeats for a fixed number of splits. The final
//! enclosure is the hull of all leaf bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linear::{BoundError, InputBox, Interval};

pub const DEFAULT_WIDTH_FLOOR: f64 = 1e-12;
const SAMPLE_CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum BranchError {
    #[error("box with {free} free coordinates splits into {expected} children, not {found}")]
    SplitCount {
        free: usize,
        expected: usize,
        found: usize,
    },
    #[error("at least one sample is required")]
    NoSamples,
    #[error("function value {value} at {point:?} is not finite")]
    NonFinite { point: Vec<f64>, value: f64 },
    #[error("bounding box lo={lo:?} hi={hi:?} failed: {source}")]
    Bounder {
        lo: Vec<f64>,
        hi: Vec<f64>,
        source: BoundError,
    },
}

/// Halves every free coordinate at its midpoint. `n_d` must equal `2^free`.
pub fn domain_split(b: &InputBox, n_d: usize) -> Result<Vec<InputBox>, BranchError> {
    let free: Vec<usize> = (0..b.dim()).filter(|&i| !b.is_degenerate(i)).collect();
    let expected = 1usize << free.len();
    if n_d != expected {
        return Err(BranchError::SplitCount {
            free: free.len(),
            expected,
            found: n_d,
        });
    }
    let mut out = Vec::with_capacity(n_d);
    for mask in 0..n_d {
        let (mut lo, mut hi) = (b.lo().to_vec(), b.hi().to_vec());
        for (bit, &i) in free.iter().enumerate() {
            let mid = 0.5 * (lo[i] + hi[i]);
            if mask >> bit & 1 == 0 {
                hi[i] = mid;
            } else {
                lo[i] = mid;
            }
        }
        out.push(InputBox::new(lo, hi).expect("halves of a valid box are valid"));
    }
    Ok(out)
}

/// Uniform samples from the box; the result depends only on `seed`, not on
/// the number of worker threads.
pub fn mc_sample<F>(f: F, b: &InputBox, n_s: usize, seed: u64) -> Result<Interval, BranchError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n_s == 0 {
        return Err(BranchError::NoSamples);
    }
    let chunks = n_s.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<Result<Interval, BranchError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = SAMPLE_CHUNK.min(n_s - c * SAMPLE_CHUNK);
            let mut x = b.lo().to_vec();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..count {
                for (i, v) in x.iter_mut().enumerate() {
                    let (l, h) = (b.lo()[i], b.hi()[i]);
                    *v = if l == h { l } else { rng.gen_range(l..=h) };
                }
                let y = f(&x);
                if !y.is_finite() {
                    return Err(BranchError::NonFinite {
                        point: x.clone(),
                        value: y,
                    });
                }
                lo = lo.min(y);
                hi = hi.max(y);
            }
            Ok(Interval { lo, hi })
        })
        .collect();
    let mut acc: Option<Interval> = None;
    for p in parts {
        let p = p?;
        acc = Some(acc.map_or(p, |a| a.hull(&p)));
    }
    Ok(acc.expect("at least one chunk"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub region: InputBox,
    pub bound: Interval,
    pub gap: f64,
}

impl BranchRecord {
    fn new(region: InputBox, bound: Interval, empirical: &Interval) -> Self {
        let gap = (empirical.lo - bound.lo).max(bound.hi - empirical.hi);
        BranchRecord { region, bound, gap }
    }
}

#[derive(Serialize)]
struct DumpLine<'a> {
    lo: &'a [f64],
    hi: &'a [f64],
    bound_lo: f64,
    bound_hi: f64,
    gap: f64,
}

#[derive(Debug, Clone)]
pub struct BranchReport {
    pub global: Interval,
    pub empirical: Interval,
    /// Number of branches that were split.
    pub splits: usize,
    pub leaves: Vec<BranchRecord>,
    pub seconds: f64,
    pub seed: u64,
}

impl BranchReport {
    /// One JSON object per leaf and line.
    pub fn write_ndjson(&self, mut w: impl Write) -> std::io::Result<()> {
        for r in &self.leaves {
            let line = DumpLine {
                lo: r.region.lo(),
                hi: r.region.hi(),
                bound_lo: r.bound.lo,
                bound_hi: r.bound.hi,
                gap: r.gap,
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchConfig {
    pub n_b: usize,
    pub n_s: usize,
    pub seed: u64,
    /// Branches narrower than this are never split again.
    pub width_floor: f64,
    /// Also sample every new child and widen the empirical interval.
    pub sample_children: bool,
}

impl BranchConfig {
    pub fn new(n_b: usize, n_s: usize, seed: u64) -> Self {
        BranchConfig {
            n_b,
            n_s,
            seed,
            width_floor: DEFAULT_WIDTH_FLOOR,
            sample_children: false,
        }
    }
}

struct Entry {
    gap: f64,
    seq: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // largest gap first, earliest insertion among ties
    fn cmp(&self, other: &Self) -> Ordering {
        self.gap
            .total_cmp(&other.gap)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn bound_box<B>(bounder: &B, b: &InputBox) -> Result<Interval, BranchError>
where
    B: Fn(&InputBox) -> Result<Interval, BoundError>,
{
    bounder(b).map_err(|source| BranchError::Bounder {
        lo: b.lo().to_vec(),
        hi: b.hi().to_vec(),
        source,
    })
}

/// Splits the branch with the largest gap `n_b` times. Child bounds are
/// intersected with their parent's bound, so the global enclosure never
/// widens as `n_b` grows.
pub fn greedy_branch<B, F>(
    bounder: B,
    f: F,
    root: &InputBox,
    cfg: &BranchConfig,
) -> Result<BranchReport, BranchError>
where
    B: Fn(&InputBox) -> Result<Interval, BoundError> + Sync,
    F: Fn(&[f64]) -> f64 + Sync,
{
    let start = Instant::now();
    let mut empirical = mc_sample(&f, root, cfg.n_s, cfg.seed)?;
    let root_bound = bound_box(&bounder, root)?;
    let mut records: Vec<Option<BranchRecord>> = vec![Some(BranchRecord::new(
        root.clone(),
        root_bound,
        &empirical,
    ))];
    let mut heap = BinaryHeap::new();
    let splittable =
        |r: &BranchRecord| r.bound.width() >= cfg.width_floor && r.region.free_coordinates() > 0;
    if splittable(records[0].as_ref().expect("root")) {
        heap.push(Entry {
            gap: records[0].as_ref().expect("root").gap,
            seq: 0,
        });
    }
    let mut splits = 0;
    while splits < cfg.n_b {
        let Some(top) = heap.pop() else { break };
        let parent = records[top.seq].take().expect("queued branches are leaves");
        let n_d = 1usize << parent.region.free_coordinates();
        let children = domain_split(&parent.region, n_d)?;
        let bounds: Vec<Result<Interval, BranchError>> = children
            .par_iter()
            .map(|c| bound_box(&bounder, c))
            .collect();
        if cfg.sample_children {
            for (k, c) in children.iter().enumerate() {
                let s = cfg.seed ^ ((records.len() + k) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                empirical = empirical.hull(&mc_sample(&f, c, cfg.n_s, s)?);
            }
        }
        for (c, bound) in children.into_iter().zip(bounds) {
            let bound = bound?.intersect(&parent.bound);
            let rec = BranchRecord::new(c, bound, &empirical);
            let seq = records.len();
            if splittable(&rec) {
                heap.push(Entry { gap: rec.gap, seq });
            }
            records.push(Some(rec));
        }
        splits += 1;
        tracing::trace!(splits, gap = top.gap, "split branch");
    }
    let leaves: Vec<BranchRecord> = records.into_iter().flatten().collect();
    let global = leaves
        .iter()
        .map(|r| r.bound)
        .reduce(|a, b| a.hull(&b))
        .expect("at least the root");
    // gaps against the final empirical interval
    let leaves = leaves
        .into_iter()
        .map(|r| BranchRecord::new(r.region, r.bound, &empirical))
        .collect();
    Ok(BranchReport {
        global,
        empirical,
        splits,
        leaves,
        seconds: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
    })
}
