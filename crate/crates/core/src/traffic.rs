//! Seeded request streams.
//!
//! Requests never depart, so arrival times reduce to stream order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequestKind {
    /// QKD demand: one quantum key channel plus three classical channels.
    Quantum,
    /// A single classical lightpath unrelated to key generation.
    ClassicalStandalone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Request {
    pub source: NodeId,
    pub destination: NodeId,
    pub sequence: usize,
    pub kind: RequestKind,
}

impl Request {
    pub fn quantum(source: NodeId, destination: NodeId, sequence: usize) -> Self {
        Self {
            source,
            destination,
            sequence,
            kind: RequestKind::Quantum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficConfig {
    pub total_requests: usize,
    pub seed: u64,
    /// Probability that a request is a standalone classical demand.
    pub classical_fraction: f64,
}

impl TrafficConfig {
    pub fn new(total_requests: usize, seed: u64) -> Self {
        Self {
            total_requests,
            seed,
            classical_fraction: 0.0,
        }
    }
}

/// Draws `total_requests` requests with `(s, d)` uniform over ordered pairs
/// `s != d`. The stream depends only on the config and `node_count`.
///
/// Every request consumes the same number of draws whatever
/// `classical_fraction` is, so endpoints stay aligned across fractions.
pub fn generate(config: &TrafficConfig, node_count: usize) -> Vec<Request> {
    assert!(node_count >= 2, "traffic needs at least two nodes");
    assert!(
        (0.0..=1.0).contains(&config.classical_fraction),
        "classical_fraction must lie in [0, 1]"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.total_requests)
        .map(|sequence| {
            let s = rng.gen_range(0..node_count);
            let mut d = rng.gen_range(0..node_count - 1);
            if d >= s {
                d += 1;
            }
            let classical = rng.gen::<f64>() < config.classical_fraction;
            Request {
                source: NodeId(s),
                destination: NodeId(d),
                sequence,
                kind: if classical {
                    RequestKind::ClassicalStandalone
                } else {
                    RequestKind::Quantum
                },
            }
        })
        .collect()
}
