#![allow(dead_code)]

use rand::Rng;
use senrel::eval::WspParams;
use senrel::{DftNode, DormancyFactor, FailureDistribution};

/// Log-uniform rate in [lo, hi].
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

pub struct TreeGen {
    pub max_leaves: usize,
    pub rate_lo: f64,
    pub rate_hi: f64,
    next_id: u64,
}

impl TreeGen {
    pub fn new(max_leaves: usize, rate_lo: f64, rate_hi: f64) -> Self {
        Self {
            max_leaves,
            rate_lo,
            rate_hi,
            next_id: 0,
        }
    }

    /// A valid random fault tree with between 1 and `max_leaves` leaves,
    /// mixing OR/AND gates of fan-in 1..=4, basic events and warm spares.
    pub fn dft<R: Rng>(&mut self, rng: &mut R) -> DftNode {
        self.next_id = 0;
        let leaves = rng.random_range(1..=self.max_leaves);
        self.node(rng, leaves, 0)
    }

    fn node<R: Rng>(&mut self, rng: &mut R, leaves: usize, depth: usize) -> DftNode {
        if leaves == 1 && (depth > 0 || rng.random_bool(0.5)) {
            return self.leaf(rng);
        }
        let fan_in = rng.random_range(1..=leaves.min(4));
        // split `leaves` into `fan_in` positive parts
        let mut cuts: Vec<usize> = (1..leaves).collect();
        for i in 0..fan_in - 1 {
            let j = rng.random_range(i..cuts.len());
            cuts.swap(i, j);
        }
        let mut cuts: Vec<usize> = cuts[..fan_in - 1].to_vec();
        cuts.sort_unstable();
        cuts.insert(0, 0);
        cuts.push(leaves);
        let children = cuts
            .windows(2)
            .map(|w| self.node(rng, w[1] - w[0], depth + 1))
            .collect();
        if rng.random_bool(0.5) {
            DftNode::Or(children)
        } else {
            DftNode::And(children)
        }
    }

    fn leaf<R: Rng>(&mut self, rng: &mut R) -> DftNode {
        let id = self.next_id;
        self.next_id += 1;
        let rate = log_uniform(rng, self.rate_lo, self.rate_hi);
        let dist = FailureDistribution::exponential(rate).unwrap();
        if rng.random_bool(0.25) {
            let active = FailureDistribution::exponential(log_uniform(rng, self.rate_lo, self.rate_hi)).unwrap();
            let alpha = DormancyFactor::new(rng.random_range(0.05..=1.0)).unwrap();
            DftNode::wsp(id, WspParams::with_dormancy(dist, active, alpha))
        } else {
            DftNode::basic(id, dist)
        }
    }
}
