//! Brute-force references for checking the heuristics on small instances.
//!
//! Nothing here calls into `routing` or `snr` beyond the shared data types,
//! so agreement between the two is meaningful.

use thiserror::Error;

use crate::routing::Path;
use crate::snr::{Attenuation, SnrParams};
use crate::topology::{Band, LinkId, NodeId, Topology};

/// Largest topology the exhaustive searches accept.
pub const MAX_ORACLE_NODES: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("oracle refuses a {nodes}-node topology (limit {MAX_ORACLE_NODES})")]
pub struct TooLarge {
    pub nodes: usize,
}

fn guard(topology: &Topology) -> Result<(), TooLarge> {
    if topology.node_count() > MAX_ORACLE_NODES {
        Err(TooLarge {
            nodes: topology.node_count(),
        })
    } else {
        Ok(())
    }
}

fn extend(
    topology: &Topology,
    here: NodeId,
    d: NodeId,
    visited: &mut Vec<bool>,
    trail: &mut Vec<LinkId>,
    out: &mut Vec<Vec<LinkId>>,
) {
    if here == d {
        out.push(trail.clone());
        return;
    }
    for link in topology.links() {
        if link.source != here || visited[link.target.0] {
            continue;
        }
        visited[link.target.0] = true;
        trail.push(link.id);
        extend(topology, link.target, d, visited, trail, out);
        trail.pop();
        visited[link.target.0] = false;
    }
}

/// Every simple `s -> d` path by plain recursion, sorted by length, hops and
/// link ids.
pub fn brute_force_paths(topology: &Topology, s: NodeId, d: NodeId) -> Result<Vec<Path>, TooLarge> {
    guard(topology)?;
    let mut raw = Vec::new();
    let mut visited = vec![false; topology.node_count()];
    visited[s.0] = true;
    extend(topology, s, d, &mut visited, &mut Vec::new(), &mut raw);

    let mut keyed: Vec<(f64, Vec<LinkId>)> = raw
        .into_iter()
        .map(|links| {
            let mut length = 0.0;
            for l in &links {
                length += topology.link(*l).length_km;
            }
            (length, links)
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite lengths")
            .then(a.1.len().cmp(&b.1.len()))
            .then(a.1.cmp(&b.1))
    });
    Ok(keyed
        .into_iter()
        .map(|(_, links)| Path::from_links(topology, links))
        .collect())
}

/// Smallest number of quantum-shared links over all simple `s -> d` paths
/// that have some classical wavelength free end to end. `None` when no path
/// has one.
pub fn brute_force_min_overlap<'a, I>(
    topology: &Topology,
    s: NodeId,
    d: NodeId,
    established_quantum: I,
) -> Result<Option<usize>, TooLarge>
where
    I: IntoIterator<Item = &'a Path>,
{
    let quantum: Vec<&Path> = established_quantum.into_iter().collect();
    let on_quantum_fiber = |link: LinkId| {
        let fiber = topology.link(link).fiber_id;
        quantum.iter().any(|q| {
            q.links()
                .iter()
                .any(|&ql| topology.link(ql).fiber_id == fiber)
        })
    };
    let has_free_wavelength = |p: &Path| {
        (0..topology.w_classical()).any(|i| {
            p.links()
                .iter()
                .all(|&l| topology.is_free(l, Band::Classical, i))
        })
    };
    Ok(brute_force_paths(topology, s, d)?
        .iter()
        .filter(|p| has_free_wavelength(p))
        .map(|p| p.links().iter().filter(|&&l| on_quantum_fiber(l)).count())
        .min())
}

/// The quantum SNR evaluated directly from its defining formula.
pub fn independent_snr<'a, I>(
    topology: &Topology,
    quantum_path: &Path,
    classical_paths: I,
    params: &SnrParams,
) -> f64
where
    I: IntoIterator<Item = &'a Path>,
{
    let mut quantum_length = 0.0;
    for &l in quantum_path.links() {
        quantum_length += topology.link(l).length_km;
    }
    let mut noise = params.n_fiber;
    for classical in classical_paths {
        let mut shared = 0.0;
        for &ql in quantum_path.links() {
            let q = topology.link(ql);
            let overlaps = classical
                .links()
                .iter()
                .any(|&cl| topology.link(cl).fiber_id == q.fiber_id);
            if overlaps {
                shared += q.length_km;
            }
        }
        noise += params.n_shared * shared;
    }
    let alpha = match params.attenuation {
        Attenuation::Literal => params.alpha,
        Attenuation::DecibelPerKm => params.alpha * 10f64.ln() / 10.0,
    };
    params.p_tx * (-alpha * quantum_length).exp() / noise
}
