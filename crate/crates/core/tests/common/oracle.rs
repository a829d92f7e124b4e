//! Straight-line reimplementation of the location-scale test on plain
//! vectors: explicit loops over every resample, lattice point and node, with
//! the random streams rebuilt from ChaCha8 directly.
#![allow(dead_code)]

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BOOTSTRAP_DOMAIN: u64 = 0x6273_7472_6170;

#[derive(Debug, Clone)]
pub struct Instance {
    pub base: Vec<f64>,
    pub comparisons: Vec<Vec<f64>>,
    /// Per comparison: (lower, upper) of the (location, scale) box.
    pub boxes: Vec<([f64; 2], [f64; 2])>,
    /// Lattice points per dimension.
    pub resolution: usize,
    pub nodes: Vec<f64>,
    pub tau: f64,
    pub alpha: f64,
    pub n_boot: usize,
    pub seed: u64,
}

#[derive(Debug)]
pub struct Outcome {
    pub statistic: f64,
    pub theta: Vec<[f64; 2]>,
    pub boot_stats: Vec<f64>,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64, domain: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        Stream(rng)
    }

    /// Multiply-high with rejection of the biased low products.
    fn below(&mut self, n: u64) -> usize {
        loop {
            let wide = self.0.next_u64() as u128 * n as u128;
            if (wide as u64) >= n.wrapping_neg() % n {
                return (wide >> 64) as usize;
            }
        }
    }
}

fn ascending(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

fn resample(v: &[f64], rng: &mut Stream) -> Vec<f64> {
    let s = ascending(v);
    (0..s.len()).map(|_| s[rng.below(s.len() as u64)]).collect()
}

fn ecdf(v: &[f64], t: f64) -> f64 {
    let mut count = 0usize;
    for &x in v {
        if x <= t {
            count += 1;
        }
    }
    count as f64 / v.len() as f64
}

fn axis(lo: f64, hi: f64, r: usize) -> Vec<f64> {
    if r == 1 {
        return vec![lo + (hi - lo) * 0.5];
    }
    let mut out = Vec::new();
    for i in 0..r {
        out.push(if i == r - 1 { hi } else { lo + (hi - lo) * (i as f64 / (r - 1) as f64) });
    }
    out
}

/// Resampled base, resampled comparisons, mix `c`.
type Star<'a> = (&'a [f64], &'a [Vec<f64>], f64);

/// `min_θ Σ_k (1/m) Σ_j φ̃_k²` with `φ̃ = d + c(d* − d)`; returns the minimum
/// and the lexicographically first minimizers.
fn criterion(inst: &Instance, star: Option<Star<'_>>) -> (f64, Vec<[f64; 2]>) {
    let mut total = 0.0;
    let mut thetas = Vec::new();
    for (k, y) in inst.comparisons.iter().enumerate() {
        let (lo, hi) = inst.boxes[k];
        let mut best = f64::INFINITY;
        let mut arg = [0.0, 0.0];
        for a in axis(lo[0], hi[0], inst.resolution) {
            for b in axis(lo[1], hi[1], inst.resolution) {
                let mut sum = 0.0;
                for &x in &inst.nodes {
                    let g = (x - a) / b;
                    let d = ecdf(&inst.base, x) - ecdf(y, g);
                    let phi = match star {
                        None => d,
                        Some((bs, cs, c)) => d + c * ((ecdf(bs, x) - ecdf(&cs[k], g)) - d),
                    };
                    sum += phi * phi;
                }
                let value = sum / inst.nodes.len() as f64;
                if value < best {
                    best = value;
                    arg = [a, b];
                }
            }
        }
        total += best;
        thetas.push(arg);
    }
    (total, thetas)
}

pub fn run(inst: &Instance) -> Outcome {
    let n_x = inst.base.len() as f64;
    let n = inst.base.len() + inst.comparisons.iter().map(Vec::len).sum::<usize>();
    let mut num = n_x;
    for y in &inst.comparisons {
        num *= y.len() as f64;
    }
    let t_n = num / (n as f64).powi(inst.comparisons.len() as i32);
    let c = inst.tau * t_n.sqrt();

    let (l0, theta) = criterion(inst, None);
    let mut boot_stats = Vec::new();
    for b in 0..inst.n_boot {
        let mut rng = Stream::new(inst.seed, BOOTSTRAP_DOMAIN, b as u64);
        let base_star = resample(&inst.base, &mut rng);
        let comp_star: Vec<Vec<f64>> = inst.comparisons.iter().map(|y| resample(y, &mut rng)).collect();
        let (l1, _) = criterion(inst, Some((&base_star, &comp_star, c)));
        boot_stats.push((l1 - l0) / (inst.tau * inst.tau));
    }
    let statistic = t_n * l0;
    let sorted = ascending(&boot_stats);
    let b = sorted.len();
    let mut rank = 1;
    while (rank as f64) < (1.0 - inst.alpha) * b as f64 - 1e-9 {
        rank += 1;
    }
    let critical_value = sorted[rank.min(b) - 1];
    let p_value = boot_stats.iter().filter(|&&s| s >= statistic).count() as f64 / b as f64;
    Outcome { statistic, theta, boot_stats, critical_value, p_value, reject: statistic > critical_value }
}
