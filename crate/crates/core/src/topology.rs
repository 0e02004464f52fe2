//! Physical network graph and per-link wavelength occupancy.
//!
//! Every bidirectional fiber is modelled as two directed [`Link`]s that share a
//! `fiber_id`. Each directed link owns two independent wavelength pools: a
//! quantum pool of `w_quantum` slots and a classical pool of
//! `w_total - w_quantum` slots. Both pools are indexed from zero.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

/// Dense node index in `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Dense directed-link index in `0..link_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

/// Identifier of an established (or tentatively held) lightpath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LightpathId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which wavelength pool a slot belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    /// Reserved pool for quantum key channels (O-band).
    Quantum,
    /// Pool shared by every classical channel (C-band).
    Classical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub source: NodeId,
    pub target: NodeId,
    pub length_km: f64,
    /// Shared by the two directions of one physical fiber.
    pub fiber_id: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid topology: {0}")]
    Invalid(String),
    #[error("link {0} does not exist")]
    UnknownLink(LinkId),
    #[error("wavelength {index} is outside the {band:?} pool of size {pool_size}")]
    IndexOutOfRange {
        band: Band,
        index: usize,
        pool_size: usize,
    },
    #[error("slot ({link}, {band:?}, {index}) is already held by lightpath {holder:?}")]
    SlotOccupied {
        link: LinkId,
        band: Band,
        index: usize,
        holder: LightpathId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Slot {
    link: LinkId,
    band: Band,
    index: usize,
}

/// Occupancy of both pools on every directed link.
///
/// A slot holds `Some(id)` iff lightpath `id` occupies it. The reverse index
/// `held` lets [`Topology::release`] free a holder without scanning all slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WavelengthState {
    quantum: Vec<Vec<Option<LightpathId>>>,
    classical: Vec<Vec<Option<LightpathId>>>,
    held: BTreeMap<LightpathId, Vec<Slot>>,
}

impl WavelengthState {
    fn new(links: usize, w_quantum: usize, w_classical: usize) -> Self {
        Self {
            quantum: vec![vec![None; w_quantum]; links],
            classical: vec![vec![None; w_classical]; links],
            held: BTreeMap::new(),
        }
    }

    fn pool(&self, link: LinkId, band: Band) -> &[Option<LightpathId>] {
        match band {
            Band::Quantum => &self.quantum[link.0],
            Band::Classical => &self.classical[link.0],
        }
    }

    fn pool_mut(&mut self, link: LinkId, band: Band) -> &mut [Option<LightpathId>] {
        match band {
            Band::Quantum => &mut self.quantum[link.0],
            Band::Classical => &mut self.classical[link.0],
        }
    }
}

/// The directed graph `G(N, L, W_T, W_Q)` together with its wavelength state.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    node_count: usize,
    links: Vec<Link>,
    w_total: usize,
    w_quantum: usize,
    out_links: Vec<Vec<LinkId>>,
    state: WavelengthState,
}

impl Topology {
    /// Builds a topology from bidirectional `(u, v, length_km)` triples.
    ///
    /// Triple `i` becomes links `2i` (u to v) and `2i + 1` (v to u), both with
    /// `fiber_id = i`.
    pub fn new(
        node_count: usize,
        w_total: usize,
        w_quantum: usize,
        fibers: &[(usize, usize, f64)],
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Invalid("node count must be positive".into()));
        }
        if w_quantum == 0 || w_quantum >= w_total {
            return Err(TopologyError::Invalid(format!(
                "need 0 < W_Q < W_T, got W_Q={w_quantum} W_T={w_total}"
            )));
        }
        let mut links = Vec::with_capacity(fibers.len() * 2);
        for (fiber_id, &(u, v, length_km)) in fibers.iter().enumerate() {
            if u >= node_count || v >= node_count {
                return Err(TopologyError::Invalid(format!(
                    "link {u}-{v} references a node outside 0..{node_count}"
                )));
            }
            if u == v {
                return Err(TopologyError::Invalid(format!("self-loop at node {u}")));
            }
            if !(length_km.is_finite() && length_km > 0.0) {
                return Err(TopologyError::Invalid(format!(
                    "link {u}-{v} has non-positive length {length_km}"
                )));
            }
            for (source, target) in [(u, v), (v, u)] {
                links.push(Link {
                    id: LinkId(links.len()),
                    source: NodeId(source),
                    target: NodeId(target),
                    length_km,
                    fiber_id,
                });
            }
        }
        let mut out_links = vec![Vec::new(); node_count];
        for link in &links {
            out_links[link.source.0].push(link.id);
        }
        let state = WavelengthState::new(links.len(), w_quantum, w_total - w_quantum);
        Ok(Self {
            node_count,
            links,
            w_total,
            w_quantum,
            out_links,
            state,
        })
    }

    /// Six nodes on a 10 km ring `0-1-2-3-4-5-0` plus the chord `0-3`, with 80
    /// wavelengths of which 40 are reserved for quantum channels.
    pub fn default_topology() -> Self {
        let fibers = [
            (0, 1, 10.0),
            (1, 2, 10.0),
            (2, 3, 10.0),
            (3, 4, 10.0),
            (4, 5, 10.0),
            (5, 0, 10.0),
            (0, 3, 10.0),
        ];
        Self::new(6, 80, 40, &fibers).expect("built-in topology is valid")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node.0]
    }

    /// Number of physical fibers (half the directed link count).
    pub fn fiber_count(&self) -> usize {
        self.links.len() / 2
    }

    pub fn w_total(&self) -> usize {
        self.w_total
    }

    pub fn w_quantum(&self) -> usize {
        self.w_quantum
    }

    pub fn w_classical(&self) -> usize {
        self.w_total - self.w_quantum
    }

    pub fn pool_size(&self, band: Band) -> usize {
        match band {
            Band::Quantum => self.w_quantum,
            Band::Classical => self.w_classical(),
        }
    }

    pub fn state(&self) -> &WavelengthState {
        &self.state
    }

    /// Current holder of a slot, `None` when free.
    pub fn holder(&self, link: LinkId, band: Band, index: usize) -> Option<LightpathId> {
        self.state.pool(link, band).get(index).copied().flatten()
    }

    pub fn is_free(&self, link: LinkId, band: Band, index: usize) -> bool {
        index < self.pool_size(band) && self.holder(link, band, index).is_none()
    }

    pub fn occupy(
        &mut self,
        link: LinkId,
        band: Band,
        index: usize,
        holder: LightpathId,
    ) -> Result<(), TopologyError> {
        if link.0 >= self.links.len() {
            return Err(TopologyError::UnknownLink(link));
        }
        let pool_size = self.pool_size(band);
        if index >= pool_size {
            return Err(TopologyError::IndexOutOfRange {
                band,
                index,
                pool_size,
            });
        }
        let slot = &mut self.state.pool_mut(link, band)[index];
        if let Some(current) = *slot {
            return Err(TopologyError::SlotOccupied {
                link,
                band,
                index,
                holder: current,
            });
        }
        *slot = Some(holder);
        self.state
            .held
            .entry(holder)
            .or_default()
            .push(Slot { link, band, index });
        Ok(())
    }

    /// Frees every slot held by `holder`. Unknown holders are ignored.
    pub fn release(&mut self, holder: LightpathId) {
        if let Some(slots) = self.state.held.remove(&holder) {
            for slot in slots {
                self.state.pool_mut(slot.link, slot.band)[slot.index] = None;
            }
        }
    }

    /// Frees the whole network, returning it to its freshly loaded state.
    pub fn clear(&mut self) {
        self.state = WavelengthState::new(self.links.len(), self.w_quantum, self.w_classical());
    }

    pub fn occupied_slots(&self) -> usize {
        self.state.held.values().map(Vec::len).sum()
    }

    /// Bidirectional fibers as `(u, v, length_km)`, in `fiber_id` order.
    pub fn fibers(&self) -> Vec<(usize, usize, f64)> {
        self.links
            .iter()
            .step_by(2)
            .map(|l| (l.source.0, l.target.0, l.length_km))
            .collect()
    }

    /// Serializes the topology description (not the occupancy).
    pub fn to_description(&self) -> String {
        let mut out = String::new();
        writeln!(out, "nodes {}", self.node_count).unwrap();
        writeln!(out, "w_total {}", self.w_total).unwrap();
        writeln!(out, "w_quantum {}", self.w_quantum).unwrap();
        for (u, v, length) in self.fibers() {
            writeln!(out, "{u} {v} {length}").unwrap();
        }
        out
    }

    /// Parses a topology description.
    ///
    /// ```text
    /// # comment
    /// nodes 6
    /// w_total 80
    /// w_quantum 40
    /// 0 1 10.0      # bidirectional link u v length_km
    /// ```
    pub fn from_description(text: &str) -> Result<Self, TopologyError> {
        let mut nodes = None;
        let mut w_total = None;
        let mut w_quantum = None;
        let mut fibers = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or_default();
            let fields: Vec<&str> = content.split_whitespace().collect();
            let parse_err = |message: String| TopologyError::Parse { line, message };
            match fields.as_slice() {
                [] => {}
                [key, value] => {
                    let value: usize = value
                        .parse()
                        .map_err(|_| parse_err(format!("expected an integer, got {value:?}")))?;
                    let slot = match *key {
                        "nodes" => &mut nodes,
                        "w_total" => &mut w_total,
                        "w_quantum" => &mut w_quantum,
                        other => return Err(parse_err(format!("unknown key {other:?}"))),
                    };
                    if slot.replace(value).is_some() {
                        return Err(parse_err(format!("{key} declared twice")));
                    }
                }
                [u, v, length] => {
                    let u = u
                        .parse()
                        .map_err(|_| parse_err(format!("bad node id {u:?}")))?;
                    let v = v
                        .parse()
                        .map_err(|_| parse_err(format!("bad node id {v:?}")))?;
                    let length = length
                        .parse()
                        .map_err(|_| parse_err(format!("bad length {length:?}")))?;
                    fibers.push((u, v, length));
                }
                _ => {
                    return Err(parse_err(format!(
                        "expected `key value` or `u v length_km`, got {:?}",
                        content.trim()
                    )))
                }
            }
        }
        let missing = |key: &str| TopologyError::Parse {
            line: 0,
            message: format!("missing `{key}` declaration"),
        };
        Self::new(
            nodes.ok_or_else(|| missing("nodes"))?,
            w_total.ok_or_else(|| missing("w_total"))?,
            w_quantum.ok_or_else(|| missing("w_quantum"))?,
            &fibers,
        )
    }
}

impl FromStr for Topology {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_description(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_sized_document() {
        let doc = "# six nodes\nnodes 6\nw_total 80\nw_quantum 40\n\
                   0 1 10\n1 2 10\n2 3 10\n3 4 10\n4 5 10\n5 0 10\n0 3 10\n";
        let t = Topology::from_description(doc).unwrap();
        assert_eq!(t.node_count(), 6);
        assert_eq!(t.link_count(), 14);
        assert_eq!(t.occupied_slots(), 0);
        assert_eq!(t.w_quantum(), 40);
        assert_eq!(t.w_classical(), 40);
    }

    #[test]
    fn smallest_network_pairs_fiber() {
        let t = Topology::new(2, 2, 1, &[(0, 1, 3.5)]).unwrap();
        assert_eq!(t.link_count(), 2);
        let (a, b) = (t.link(LinkId(0)), t.link(LinkId(1)));
        assert_eq!(a.fiber_id, b.fiber_id);
        assert_eq!((a.source, a.target), (b.target, b.source));
    }

    #[test]
    fn rejects_bad_documents() {
        let full = Topology::from_description("nodes 2\nw_total 80\nw_quantum 80\n0 1 1\n");
        assert!(matches!(full, Err(TopologyError::Invalid(_))));
        let dangling = Topology::new(2, 80, 40, &[(0, 2, 1.0)]);
        assert!(matches!(dangling, Err(TopologyError::Invalid(_))));
        let zero = Topology::new(2, 80, 40, &[(0, 1, 0.0)]);
        assert!(matches!(zero, Err(TopologyError::Invalid(_))));
        let junk = Topology::from_description("nodes 2\n0 1\n");
        assert!(matches!(junk, Err(TopologyError::Parse { line: 2, .. })));
        let missing = Topology::from_description("nodes 2\nw_total 4\n0 1 1\n");
        assert!(matches!(missing, Err(TopologyError::Parse { .. })));
    }

    #[test]
    fn default_topology_shape() {
        let t = Topology::default_topology();
        assert_eq!(t.node_count(), 6);
        assert_eq!(t.link_count(), 14);
        let total: f64 = t.fibers().iter().map(|f| f.2).sum();
        assert_eq!(total, 70.0);
        let free = t
            .links()
            .iter()
            .map(|l| {
                (0..40)
                    .filter(|&i| t.is_free(l.id, Band::Quantum, i))
                    .count()
                    + (0..40)
                        .filter(|&i| t.is_free(l.id, Band::Classical, i))
                        .count()
            })
            .sum::<usize>();
        assert_eq!(free, 80 * 14);
    }

    #[test]
    fn occupy_and_release() {
        let mut t = Topology::default_topology();
        let fresh = t.clone();
        let lp1 = LightpathId(1);
        t.occupy(LinkId(0), Band::Quantum, 0, lp1).unwrap();
        assert_eq!(t.holder(LinkId(0), Band::Quantum, 0), Some(lp1));
        assert_eq!(
            t.occupy(LinkId(0), Band::Quantum, 0, LightpathId(2)),
            Err(TopologyError::SlotOccupied {
                link: LinkId(0),
                band: Band::Quantum,
                index: 0,
                holder: lp1
            })
        );
        assert!(matches!(
            t.occupy(LinkId(0), Band::Classical, 40, LightpathId(2)),
            Err(TopologyError::IndexOutOfRange { pool_size: 40, .. })
        ));
        t.occupy(LinkId(3), Band::Classical, 7, lp1).unwrap();
        t.occupy(LinkId(5), Band::Quantum, 1, lp1).unwrap();
        assert_eq!(t.occupied_slots(), 3);
        t.release(LightpathId(99));
        assert_eq!(t.occupied_slots(), 3);
        t.release(lp1);
        assert_eq!(t, fresh);
    }

    #[test]
    fn description_round_trip() {
        let t = Topology::new(
            3,
            10,
            3,
            &[(0, 1, 0.1), (1, 2, 12.345678901234), (2, 0, 1e-3)],
        )
        .unwrap();
        let back = Topology::from_description(&t.to_description()).unwrap();
        assert_eq!(back, t);
    }
}
