//! Path computation over a [`Topology`].
//!
//! All path lists share one deterministic total order, [`path_order`]:
//! total length, then hop count, then the link-id sequence compared
//! lexicographically. Only loopless paths are produced.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use crate::topology::{LinkId, NodeId, Topology};

/// A loopless directed route.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    links: Vec<LinkId>,
    length_km: f64,
}

impl Path {
    /// Builds a path from a link sequence, summing lengths in order.
    ///
    /// Panics if the links do not form a connected walk in `topology`.
    pub fn from_links(topology: &Topology, links: Vec<LinkId>) -> Self {
        for pair in links.windows(2) {
            assert_eq!(
                topology.link(pair[0]).target,
                topology.link(pair[1]).source,
                "links {} and {} are not consecutive",
                pair[0],
                pair[1]
            );
        }
        let length_km = links.iter().map(|&l| topology.link(l).length_km).sum();
        Self { links, length_km }
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn length_km(&self) -> f64 {
        self.length_km
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Visited nodes, source first. Empty for an empty path.
    pub fn nodes(&self, topology: &Topology) -> Vec<NodeId> {
        let mut nodes = Vec::with_capacity(self.links.len() + 1);
        if let Some(&first) = self.links.first() {
            nodes.push(topology.link(first).source);
        }
        nodes.extend(self.links.iter().map(|&l| topology.link(l).target));
        nodes
    }

    /// Physical fibers traversed, in path order.
    pub fn fibers<'a>(&'a self, topology: &'a Topology) -> impl Iterator<Item = usize> + 'a {
        self.links.iter().map(move |&l| topology.link(l).fiber_id)
    }
}

/// The canonical ordering: length, hops, then lexicographic link ids.
pub fn path_order(a: &Path, b: &Path) -> Ordering {
    a.length_km
        .total_cmp(&b.length_km)
        .then(a.links.len().cmp(&b.links.len()))
        .then_with(|| a.links.cmp(&b.links))
}

/// Heap entry ordered so that `BinaryHeap` pops the smallest key first.
struct Frontier {
    length_km: f64,
    links: Vec<LinkId>,
    node: NodeId,
}

impl Frontier {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.length_km
            .total_cmp(&other.length_km)
            .then(self.links.len().cmp(&other.links.len()))
            .then_with(|| self.links.cmp(&other.links))
    }
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

/// Dijkstra under the canonical order, avoiding banned links and nodes.
///
/// Labels carry the full link sequence so that ties are settled exactly as
/// [`path_order`] would settle them.
fn best_path(
    topology: &Topology,
    from: NodeId,
    to: NodeId,
    banned_links: &HashSet<LinkId>,
    banned_nodes: &[bool],
) -> Option<Vec<LinkId>> {
    let mut settled = vec![false; topology.node_count()];
    let mut heap = BinaryHeap::new();
    heap.push(Frontier {
        length_km: 0.0,
        links: Vec::new(),
        node: from,
    });
    while let Some(Frontier {
        length_km,
        links,
        node,
    }) = heap.pop()
    {
        if settled[node.0] {
            continue;
        }
        settled[node.0] = true;
        if node == to {
            return Some(links);
        }
        for &l in topology.out_links(node) {
            let link = topology.link(l);
            if banned_links.contains(&l) || banned_nodes[link.target.0] || settled[link.target.0] {
                continue;
            }
            let mut next = links.clone();
            next.push(l);
            heap.push(Frontier {
                length_km: length_km + link.length_km,
                links: next,
                node: link.target,
            });
        }
    }
    None
}

/// Up to `k` shortest loopless `s -> d` paths (Yen's algorithm).
pub fn k_shortest_paths(topology: &Topology, s: NodeId, d: NodeId, k: usize) -> Vec<Path> {
    assert_ne!(s, d, "source and destination must differ");
    let no_nodes = vec![false; topology.node_count()];
    let Some(first) = (k > 0)
        .then(|| best_path(topology, s, d, &HashSet::new(), &no_nodes))
        .flatten()
    else {
        return Vec::new();
    };

    let mut accepted = vec![Path::from_links(topology, first)];
    let mut seen: HashSet<Vec<LinkId>> = HashSet::new();
    seen.insert(accepted[0].links.clone());
    let mut candidates: Vec<Path> = Vec::new();

    while accepted.len() < k {
        let previous = accepted.last().expect("non-empty").clone();
        let nodes = previous.nodes(topology);
        for spur_index in 0..previous.hops() {
            let root = &previous.links[..spur_index];
            let spur_node = nodes[spur_index];

            let banned_links: HashSet<LinkId> = accepted
                .iter()
                .filter(|p| p.hops() > spur_index && &p.links[..spur_index] == root)
                .map(|p| p.links[spur_index])
                .collect();
            let mut banned_nodes = vec![false; topology.node_count()];
            for n in &nodes[..spur_index] {
                banned_nodes[n.0] = true;
            }

            if let Some(spur) = best_path(topology, spur_node, d, &banned_links, &banned_nodes) {
                let mut links = root.to_vec();
                links.extend(spur);
                if seen.insert(links.clone()) {
                    candidates.push(Path::from_links(topology, links));
                }
            }
        }
        let Some(best) = candidates
            .iter()
            .enumerate()
            .min_by(|a, b| path_order(a.1, b.1))
            .map(|(i, _)| i)
        else {
            break;
        };
        accepted.push(candidates.swap_remove(best));
    }
    accepted
}

/// Every loopless `s -> d` path, truncated to the `cap` smallest.
///
/// Partial paths are expanded best-first, so complete paths come out already
/// in canonical order and the search stops once `cap` have been found.
pub fn all_simple_paths(topology: &Topology, s: NodeId, d: NodeId, cap: usize) -> Vec<Path> {
    assert_ne!(s, d, "source and destination must differ");
    let mut found = Vec::new();
    if cap == 0 {
        return found;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Frontier {
        length_km: 0.0,
        links: Vec::new(),
        node: s,
    });
    while let Some(partial) = heap.pop() {
        if partial.node == d {
            found.push(Path::from_links(topology, partial.links));
            if found.len() == cap {
                break;
            }
            continue;
        }
        let on_path: BTreeSet<NodeId> = std::iter::once(s)
            .chain(partial.links.iter().map(|&l| topology.link(l).target))
            .collect();
        for &l in topology.out_links(partial.node) {
            let link = topology.link(l);
            if on_path.contains(&link.target) {
                continue;
            }
            let mut links = partial.links.clone();
            links.push(l);
            heap.push(Frontier {
                length_km: partial.length_km + link.length_km,
                links,
                node: link.target,
            });
        }
    }
    found
}

/// Marks every fiber used by any of `paths`.
pub fn fiber_mask<'a, I>(topology: &Topology, paths: I) -> Vec<bool>
where
    I: IntoIterator<Item = &'a Path>,
{
    let mut mask = vec![false; topology.fiber_count()];
    for fiber in paths.into_iter().flat_map(|p| p.fibers(topology)) {
        mask[fiber] = true;
    }
    mask
}

/// Number of links in `path` whose fiber is set in `mask`.
pub fn shared_links_with_mask(topology: &Topology, path: &Path, mask: &[bool]) -> usize {
    path.fibers(topology).filter(|&f| mask[f]).count()
}

/// Number of links in `path` whose fiber also carries any of `quantum_paths`.
///
/// Each link of `path` counts at most once; direction is ignored.
pub fn shared_quantum_links<'a, I>(topology: &Topology, path: &Path, quantum_paths: I) -> usize
where
    I: IntoIterator<Item = &'a Path>,
{
    shared_links_with_mask(topology, path, &fiber_mask(topology, quantum_paths))
}

/// Kilometres of `quantum_path` lying on fibers that `classical_path` also uses.
pub fn shared_length_km(topology: &Topology, classical_path: &Path, quantum_path: &Path) -> f64 {
    let classical: HashSet<usize> = classical_path.fibers(topology).collect();
    quantum_path
        .links
        .iter()
        .map(|&l| topology.link(l))
        .filter(|link| classical.contains(&link.fiber_id))
        .map(|link| link.length_km)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Topology {
        Topology::new(3, 4, 2, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap()
    }

    fn lengths(paths: &[Path]) -> Vec<f64> {
        paths.iter().map(Path::length_km).collect()
    }

    #[test]
    fn ksp_default_zero_to_three() {
        let t = Topology::default_topology();
        let paths = k_shortest_paths(&t, NodeId(0), NodeId(3), 3);
        assert_eq!(lengths(&paths), vec![10.0, 30.0, 30.0]);
        // chord 0->3 is link 12
        assert_eq!(paths[0].links(), &[LinkId(12)]);
        // 0->1->2->3 uses links 0,2,4; 0->5->4->3 uses links 11,9,7
        assert_eq!(paths[1].links(), &[LinkId(0), LinkId(2), LinkId(4)]);
        assert_eq!(paths[2].links(), &[LinkId(11), LinkId(9), LinkId(7)]);
    }

    #[test]
    fn ksp_single_route_and_disconnected() {
        let t = Topology::new(3, 4, 2, &[(0, 1, 2.0)]).unwrap();
        assert_eq!(k_shortest_paths(&t, NodeId(0), NodeId(1), 5).len(), 1);
        assert!(k_shortest_paths(&t, NodeId(0), NodeId(2), 5).is_empty());
        assert!(all_simple_paths(&t, NodeId(0), NodeId(2), 5).is_empty());
    }

    #[test]
    fn triangle_enumeration() {
        let t = triangle();
        let paths = all_simple_paths(&t, NodeId(0), NodeId(1), 64);
        assert_eq!(lengths(&paths), vec![1.0, 2.0]);
        assert_eq!(paths[1].nodes(&t), vec![NodeId(0), NodeId(2), NodeId(1)]);
        assert_eq!(all_simple_paths(&t, NodeId(0), NodeId(1), 1).len(), 1);
    }

    #[test]
    fn ksp_matches_enumeration_prefix() {
        let t = Topology::default_topology();
        for s in 0..6 {
            for d in (0..6).filter(|&d| d != s) {
                let all = all_simple_paths(&t, NodeId(s), NodeId(d), usize::MAX);
                let ksp = k_shortest_paths(&t, NodeId(s), NodeId(d), usize::MAX);
                assert_eq!(all, ksp, "{s}->{d}");
                assert!(all.windows(2).all(|w| path_order(&w[0], &w[1]).is_lt()));
            }
        }
    }

    #[test]
    fn overlap_counts() {
        let t = Topology::default_topology();
        let chord = Path::from_links(&t, vec![LinkId(12)]);
        let reverse_chord = Path::from_links(&t, vec![LinkId(13)]);
        let arc = Path::from_links(&t, vec![LinkId(0), LinkId(2), LinkId(4)]);
        assert_eq!(shared_quantum_links(&t, &arc, []), 0);
        assert_eq!(shared_quantum_links(&t, &arc, [&arc]), 3);
        assert_eq!(shared_quantum_links(&t, &reverse_chord, [&chord]), 1);
        assert_eq!(shared_quantum_links(&t, &arc, [&chord]), 0);
    }

    #[test]
    fn shared_lengths() {
        let t = Topology::new(
            5,
            4,
            2,
            &[(0, 1, 10.0), (1, 2, 10.0), (2, 3, 10.0), (3, 4, 10.0)],
        )
        .unwrap();
        let forward = Path::from_links(&t, vec![LinkId(0), LinkId(2), LinkId(4), LinkId(6)]);
        assert_eq!(shared_length_km(&t, &forward, &forward), 40.0);
        let two = Path::from_links(&t, vec![LinkId(0), LinkId(2)]);
        let back = Path::from_links(&t, vec![LinkId(3), LinkId(1)]);
        assert_eq!(shared_length_km(&t, &back, &two), 20.0);
        let tail = Path::from_links(&t, vec![LinkId(4), LinkId(6)]);
        assert_eq!(shared_length_km(&t, &tail, &two), 0.0);
    }
}
