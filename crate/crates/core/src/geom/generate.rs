use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LocalFrame, NodeId, Position3};

/// Name of the generator behind [`seeded_rng`], recorded in run reports.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform samples in the unit cube, or the unit square at `z = 0`.
pub fn random_positions<R: Rng + ?Sized>(n: usize, coplanar: bool, rng: &mut R) -> Vec<Position3> {
    (0..n)
        .map(|_| {
            let x = rng.random::<f64>();
            let y = rng.random::<f64>();
            let z = if coplanar { 0.0 } else { rng.random::<f64>() };
            Position3::new(x, y, z)
        })
        .collect()
}

/// Every pair closer than `radius`.
pub fn random_geometric_edges(positions: &[Position3], radius: f64) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for (a, pa) in positions.iter().enumerate() {
        for (b, pb) in positions.iter().enumerate().skip(a + 1) {
            if (pb - pa).norm() < radius {
                edges.push((NodeId(a), NodeId(b)));
            }
        }
    }
    edges
}

pub fn random_frames<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<LocalFrame> {
    (0..n).map(|_| LocalFrame::random(rng)).collect()
}
