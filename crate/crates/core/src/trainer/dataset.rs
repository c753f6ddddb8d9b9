use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{TrainConfig, TrainingSample};
use crate::fem::ForwardModel;
use crate::geometry::dist;
use crate::rng::{self, Stream};
use crate::{Point, Rect, Result};

/// Query points closer than this to their source (km) are never sampled.
pub const EXCLUSION_RADIUS: f64 = 0.02;

/// Unlabeled `(source, query)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePair {
    pub p: Point,
    pub q: Point,
}

fn uniform(rng: &mut ChaCha8Rng, b: &Rect) -> Point {
    [
        rng.random_range(b.lo[0]..b.hi[0]),
        rng.random_range(b.lo[1]..b.hi[1]),
    ]
}

fn draw(
    rng: &mut ChaCha8Rng,
    total: usize,
    per_source: usize,
    radius: f64,
    p_box: &Rect,
    domain: &Rect,
) -> Vec<SamplePair> {
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let p = uniform(rng, p_box);
        for _ in 0..per_source.min(total - out.len()) {
            let q = loop {
                let q = uniform(rng, domain);
                if dist(p, q) >= radius {
                    break q;
                }
            };
            out.push(SamplePair { p, q });
        }
    }
    out
}

/// Training pairs: `n_sources` positions uniform in `p_box`, each with
/// `n_queries_per_source` queries uniform in `domain` outside the exclusion
/// ball. Pairs are grouped by source.
pub fn sample_dataset(config: &TrainConfig, p_box: &Rect, domain: &Rect) -> Vec<SamplePair> {
    let mut rng = rng::stream(config.seed, Stream::TrainData);
    draw(
        &mut rng,
        config.n_training(),
        config.n_queries_per_source,
        config.exclusion_radius,
        p_box,
        domain,
    )
}

/// Held-out pairs drawn from an independent stream: `test_set_size` pairs in
/// groups of `n_queries_per_source` per fresh source.
pub fn sample_test_set(config: &TrainConfig, p_box: &Rect, domain: &Rect) -> Vec<SamplePair> {
    let mut rng = rng::stream(config.seed, Stream::TestData);
    draw(
        &mut rng,
        config.test_set_size,
        config.n_queries_per_source,
        config.exclusion_radius,
        p_box,
        domain,
    )
}

#[derive(Debug, Clone)]
pub struct LabeledSet {
    pub samples: Vec<TrainingSample>,
    /// Number of forward solves performed (one per distinct source).
    pub fem_solves: usize,
}

/// Labels every pair with the FEM value and element gradient at `q`,
/// solving once per distinct source position.
pub fn label_dataset(pairs: &[SamplePair], model: &ForwardModel) -> Result<LabeledSet> {
    let mut groups: Vec<(Point, Vec<usize>)> = Vec::new();
    let mut index: HashMap<[u64; 2], usize> = HashMap::new();
    for (i, pair) in pairs.iter().enumerate() {
        let key = [pair.p[0].to_bits(), pair.p[1].to_bits()];
        let g = *index.entry(key).or_insert_with(|| {
            groups.push((pair.p, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(i);
    }

    let mut samples = vec![
        TrainingSample {
            p: [0.0; 2],
            q: [0.0; 2],
            u_ref: 0.0,
            grad_ref: [0.0; 2],
        };
        pairs.len()
    ];
    for (p, members) in &groups {
        let field = model.solve_source(*p)?;
        for &i in members {
            let q = pairs[i].q;
            let (u_ref, grad_ref) = field.eval(q)?;
            samples[i] = TrainingSample { p: *p, q, u_ref, grad_ref };
        }
    }
    Ok(LabeledSet {
        samples,
        fem_solves: groups.len(),
    })
}
