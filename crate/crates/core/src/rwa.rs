//! Routing and wavelength assignment for QKD requests.
//!
//! Quantum key channels always use k-shortest-paths with First Fit over the
//! quantum pool. Classical channels follow a [`Policy`]:
//!
//! * [`Policy::Spff`]: k-shortest-paths with First Fit over the classical pool.
//! * [`Policy::Mqo`]: every candidate route, tried in increasing number of
//!   links shared with quantum lightpaths.
//! * [`Policy::Qtd`]: the shortest route that shares no fiber with any quantum
//!   lightpath, or nothing.
//!
//! [`Network::serve`] allocates every channel of a request, runs the SNR
//! admission checks and either commits the whole request or leaves the
//! network exactly as it found it.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::routing::{
    all_simple_paths, fiber_mask, k_shortest_paths, shared_links_with_mask, Path,
};
use crate::snr::{admission_ok, breakdown, compute_snr, SnrParams};
use crate::topology::{Band, LightpathId, NodeId, Topology};
use crate::traffic::{Request, RequestKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// Quantum key channel (QKCh).
    QuantumKey,
    /// Measuring-basis channel (MBCh): public discussion and synchronization.
    MeasuringBasis,
    /// Traditional data channel (TDCh).
    TraditionalData,
    ClassicalStandalone,
}

impl ChannelKind {
    pub fn band(self) -> Band {
        match self {
            ChannelKind::QuantumKey => Band::Quantum,
            _ => Band::Classical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lightpath {
    pub id: LightpathId,
    pub kind: ChannelKind,
    pub path: Path,
    pub band: Band,
    pub wavelength: usize,
    pub source: NodeId,
    pub destination: NodeId,
}

/// Strategy for the classical channels of a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    /// Shortest path, first fit.
    Spff,
    /// Minimum quantum overlap.
    Mqo,
    /// Quantum totally disjoint.
    Qtd,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Spff, Policy::Mqo, Policy::Qtd];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Spff => "spff",
            Policy::Mqo => "mqo",
            Policy::Qtd => "qtd",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spff" | "sp-ff" => Ok(Policy::Spff),
            "mqo" => Ok(Policy::Mqo),
            "qtd" => Ok(Policy::Qtd),
            other => Err(format!(
                "unknown policy {other:?} (expected spff, mqo or qtd)"
            )),
        }
    }
}

/// Why a request was refused. Each variant names the first failing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockReason {
    NoQuantumResource,
    NoClassicalResource,
    /// The new quantum channel would fall below the SNR threshold.
    NewChannelSnr,
    /// The new classical channels would push an established quantum channel
    /// below the SNR threshold.
    DegradesExistingSnr,
}

impl BlockReason {
    pub fn is_snr(self) -> bool {
        matches!(
            self,
            BlockReason::NewChannelSnr | BlockReason::DegradesExistingSnr
        )
    }
}

/// A route and wavelength chosen for one channel, not yet committed.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub path: Path,
    pub wavelength: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaConfig {
    /// Depth of the k-shortest-paths search (quantum channels and SP-FF).
    pub k: usize,
    /// Bound on the candidate routes enumerated by MQO and QTD.
    pub cap: usize,
    /// Let QTD fall through to longer disjoint routes when the shortest one
    /// has no free wavelength.
    pub qtd_try_all_disjoint: bool,
    /// Add a second data channel from destination to source.
    pub tdch_bidirectional: bool,
    pub snr: SnrParams,
}

impl Default for RwaConfig {
    fn default() -> Self {
        Self {
            k: 3,
            cap: 64,
            qtd_try_all_disjoint: false,
            tdch_bidirectional: false,
            snr: SnrParams::default(),
        }
    }
}

/// An accepted request and the lightpaths committed for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub request: Request,
    /// QKCh, MBCh s->d, MBCh d->s, TDCh s->d (then TDCh d->s when
    /// bidirectional). A standalone classical request holds one lightpath.
    pub lightpaths: Vec<Lightpath>,
    /// SNR of the new quantum channel at acceptance time.
    pub quantum_snr: Option<f64>,
}

/// Smallest wavelength index free on every link of `path`, if any.
pub fn first_fit(topology: &Topology, path: &Path, band: Band) -> Option<usize> {
    debug_assert!(!path.is_empty());
    (0..topology.pool_size(band)).find(|&index| {
        path.links()
            .iter()
            .all(|&link| topology.holder(link, band, index).is_none())
    })
}

fn first_fit_in_order<'a, I>(topology: &Topology, candidates: I, band: Band) -> Option<Assignment>
where
    I: IntoIterator<Item = &'a Path>,
{
    candidates.into_iter().find_map(|path| {
        first_fit(topology, path, band).map(|wavelength| Assignment {
            path: path.clone(),
            wavelength,
        })
    })
}

fn spff_over(topology: &Topology, candidates: &[Path], band: Band) -> Option<Assignment> {
    first_fit_in_order(topology, candidates, band)
}

/// `candidates` must already be in canonical path order; the stable sort keeps
/// it as the tie-break among equal overlap counts.
fn mqo_over(
    topology: &Topology,
    candidates: &[Path],
    quantum_fibers: &[bool],
) -> Option<Assignment> {
    let mut ranked: Vec<(usize, &Path)> = candidates
        .iter()
        .map(|p| (shared_links_with_mask(topology, p, quantum_fibers), p))
        .collect();
    ranked.sort_by_key(|(shared, _)| *shared);
    first_fit_in_order(
        topology,
        ranked.into_iter().map(|(_, p)| p),
        Band::Classical,
    )
}

fn qtd_over(
    topology: &Topology,
    candidates: &[Path],
    quantum_fibers: &[bool],
    try_all: bool,
) -> Option<Assignment> {
    let mut disjoint = candidates
        .iter()
        .filter(|p| shared_links_with_mask(topology, p, quantum_fibers) == 0);
    if try_all {
        first_fit_in_order(topology, disjoint, Band::Classical)
    } else {
        first_fit_in_order(topology, disjoint.next(), Band::Classical)
    }
}

/// Quantum channel selection: first of the `k` shortest paths with a free
/// quantum wavelength.
pub fn allocate_quantum(
    topology: &Topology,
    s: NodeId,
    d: NodeId,
    k: usize,
) -> Result<Assignment, BlockReason> {
    spff_over(
        topology,
        &k_shortest_paths(topology, s, d, k),
        Band::Quantum,
    )
    .ok_or(BlockReason::NoQuantumResource)
}

pub fn allocate_classical_spff(
    topology: &Topology,
    s: NodeId,
    d: NodeId,
    k: usize,
) -> Result<Assignment, BlockReason> {
    spff_over(
        topology,
        &k_shortest_paths(topology, s, d, k),
        Band::Classical,
    )
    .ok_or(BlockReason::NoClassicalResource)
}

pub fn allocate_classical_mqo<'a, I>(
    topology: &Topology,
    s: NodeId,
    d: NodeId,
    established_quantum: I,
    cap: usize,
) -> Result<Assignment, BlockReason>
where
    I: IntoIterator<Item = &'a Path>,
{
    let mask = fiber_mask(topology, established_quantum);
    mqo_over(topology, &all_simple_paths(topology, s, d, cap), &mask)
        .ok_or(BlockReason::NoClassicalResource)
}

pub fn allocate_classical_qtd<'a, I>(
    topology: &Topology,
    s: NodeId,
    d: NodeId,
    established_quantum: I,
    cap: usize,
    try_all_disjoint: bool,
) -> Result<Assignment, BlockReason>
where
    I: IntoIterator<Item = &'a Path>,
{
    let mask = fiber_mask(topology, established_quantum);
    qtd_over(
        topology,
        &all_simple_paths(topology, s, d, cap),
        &mask,
        try_all_disjoint,
    )
    .ok_or(BlockReason::NoClassicalResource)
}

/// Candidate routes for every ordered node pair, computed once per topology.
#[derive(Debug)]
pub struct RouteTable {
    k: usize,
    cap: usize,
    shortest: HashMap<(NodeId, NodeId), Vec<Path>>,
    enumerated: HashMap<(NodeId, NodeId), Vec<Path>>,
}

impl RouteTable {
    pub fn new(topology: &Topology, k: usize, cap: usize) -> Self {
        let n = topology.node_count();
        let mut shortest = HashMap::new();
        let mut enumerated = HashMap::new();
        for s in (0..n).map(NodeId) {
            for d in (0..n).map(NodeId).filter(|&d| d != s) {
                shortest.insert((s, d), k_shortest_paths(topology, s, d, k));
                enumerated.insert((s, d), all_simple_paths(topology, s, d, cap));
            }
        }
        Self {
            k,
            cap,
            shortest,
            enumerated,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn shortest(&self, s: NodeId, d: NodeId) -> &[Path] {
        &self.shortest[&(s, d)]
    }

    pub fn enumerated(&self, s: NodeId, d: NodeId) -> &[Path] {
        &self.enumerated[&(s, d)]
    }
}

/// A topology plus its established lightpaths.
///
/// Tracks, per fiber, how many classical lightpaths cross it, which turns an
/// SNR evaluation into a sum over the quantum route's own links.
#[derive(Debug, Clone)]
pub struct Network {
    topology: Topology,
    config: RwaConfig,
    routes: Arc<RouteTable>,
    lightpaths: Vec<Lightpath>,
    classical_per_fiber: Vec<u32>,
    next_id: u64,
}

/// Compares network state only; the cached route table is derived data.
impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.topology == other.topology
            && self.config == other.config
            && self.lightpaths == other.lightpaths
            && self.classical_per_fiber == other.classical_per_fiber
            && self.next_id == other.next_id
    }
}

impl Network {
    /// Takes `topology` with its current occupancy discarded.
    pub fn new(mut topology: Topology, config: RwaConfig) -> Self {
        topology.clear();
        let routes = Arc::new(RouteTable::new(&topology, config.k, config.cap));
        Self::with_routes(topology, config, routes)
    }

    /// Reuses a route table computed for the same topology, `k` and `cap`.
    pub fn with_routes(mut topology: Topology, config: RwaConfig, routes: Arc<RouteTable>) -> Self {
        assert_eq!((routes.k(), routes.cap()), (config.k, config.cap));
        topology.clear();
        let fibers = topology.fiber_count();
        Self {
            topology,
            config,
            routes,
            lightpaths: Vec::new(),
            classical_per_fiber: vec![0; fibers],
            next_id: 0,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn config(&self) -> &RwaConfig {
        &self.config
    }

    pub fn routes(&self) -> &Arc<RouteTable> {
        &self.routes
    }

    pub fn lightpaths(&self) -> &[Lightpath] {
        &self.lightpaths
    }

    pub fn quantum_lightpaths(&self) -> impl Iterator<Item = &Lightpath> {
        self.lightpaths.iter().filter(|lp| lp.band == Band::Quantum)
    }

    pub fn classical_lightpaths(&self) -> impl Iterator<Item = &Lightpath> {
        self.lightpaths
            .iter()
            .filter(|lp| lp.band == Band::Classical)
    }

    /// SNR of a quantum route against every classical lightpath currently held.
    pub fn snr_of(&self, quantum_path: &Path) -> f64 {
        let shared: f64 = quantum_path
            .links()
            .iter()
            .map(|&l| {
                let link = self.topology.link(l);
                link.length_km * f64::from(self.classical_per_fiber[link.fiber_id])
            })
            .sum();
        breakdown(quantum_path.length_km(), shared, &self.config.snr).ratio()
    }

    /// SNR of every quantum lightpath, from the per-fiber counters.
    pub fn quantum_snrs(&self) -> Vec<(LightpathId, f64)> {
        self.quantum_lightpaths()
            .map(|q| (q.id, self.snr_of(&q.path)))
            .collect()
    }

    /// SNR of every quantum lightpath, recomputed pairwise with
    /// [`compute_snr`].
    pub fn quantum_snrs_from_scratch(&self) -> Vec<(LightpathId, f64)> {
        let classical: Vec<&Path> = self.classical_lightpaths().map(|c| &c.path).collect();
        self.quantum_lightpaths()
            .map(|q| {
                let snr = compute_snr(
                    &self.topology,
                    &q.path,
                    classical.iter().copied(),
                    &self.config.snr,
                );
                (q.id, snr)
            })
            .collect()
    }

    /// Mean SNR over established quantum lightpaths, `None` when there are none.
    pub fn average_quantum_snr(&self) -> Option<f64> {
        let snrs = self.quantum_snrs();
        (!snrs.is_empty()).then(|| snrs.iter().map(|s| s.1).sum::<f64>() / snrs.len() as f64)
    }

    /// Serves one request: allocate, check SNR, then commit or roll back.
    pub fn serve(&mut self, request: &Request, policy: Policy) -> Result<Connection, BlockReason> {
        assert_ne!(request.source, request.destination);
        let mark = (self.lightpaths.len(), self.next_id);
        let outcome = match request.kind {
            RequestKind::Quantum => self.try_quantum(request, policy, mark.0),
            RequestKind::ClassicalStandalone => self.try_standalone(request, policy, mark.0),
        };
        if outcome.is_err() {
            self.rollback(mark);
        }
        outcome
    }

    fn try_quantum(
        &mut self,
        request: &Request,
        policy: Policy,
        first_new: usize,
    ) -> Result<Connection, BlockReason> {
        let (s, d) = (request.source, request.destination);
        let quantum = spff_over(&self.topology, self.routes.shortest(s, d), Band::Quantum)
            .ok_or(BlockReason::NoQuantumResource)?;
        self.hold(ChannelKind::QuantumKey, s, d, quantum);

        let mut classical = vec![
            (ChannelKind::MeasuringBasis, s, d),
            (ChannelKind::MeasuringBasis, d, s),
            (ChannelKind::TraditionalData, s, d),
        ];
        if self.config.tdch_bidirectional {
            classical.push((ChannelKind::TraditionalData, d, s));
        }
        for (kind, from, to) in classical {
            let assignment = self.select_classical(policy, from, to, first_new)?;
            self.hold(kind, from, to, assignment);
        }

        let new_quantum = &self.lightpaths[first_new];
        let quantum_snr = self.snr_of(&new_quantum.path);
        if !admission_ok(quantum_snr, &self.config.snr) {
            return Err(BlockReason::NewChannelSnr);
        }
        self.check_existing(first_new)?;
        Ok(Connection {
            request: *request,
            lightpaths: self.lightpaths[first_new..].to_vec(),
            quantum_snr: Some(quantum_snr),
        })
    }

    fn try_standalone(
        &mut self,
        request: &Request,
        policy: Policy,
        first_new: usize,
    ) -> Result<Connection, BlockReason> {
        let (s, d) = (request.source, request.destination);
        let assignment = self.select_classical(policy, s, d, first_new)?;
        self.hold(ChannelKind::ClassicalStandalone, s, d, assignment);
        self.check_existing(first_new)?;
        Ok(Connection {
            request: *request,
            lightpaths: self.lightpaths[first_new..].to_vec(),
            quantum_snr: None,
        })
    }

    /// Every quantum lightpath established before `first_new` must still
    /// meet the threshold.
    fn check_existing(&self, first_new: usize) -> Result<(), BlockReason> {
        let degraded = self.lightpaths[..first_new]
            .iter()
            .filter(|lp| lp.band == Band::Quantum)
            .any(|q| !admission_ok(self.snr_of(&q.path), &self.config.snr));
        if degraded {
            Err(BlockReason::DegradesExistingSnr)
        } else {
            Ok(())
        }
    }

    /// Applies `policy` against the quantum lightpaths of earlier requests.
    /// The request's own quantum channel is not part of that set; its SNR is
    /// checked once all channels are placed.
    fn select_classical(
        &self,
        policy: Policy,
        s: NodeId,
        d: NodeId,
        committed: usize,
    ) -> Result<Assignment, BlockReason> {
        let topology = &self.topology;
        let chosen = match policy {
            Policy::Spff => spff_over(topology, self.routes.shortest(s, d), Band::Classical),
            Policy::Mqo => {
                let mask = self.committed_quantum_fibers(committed);
                mqo_over(topology, self.routes.enumerated(s, d), &mask)
            }
            Policy::Qtd => {
                let mask = self.committed_quantum_fibers(committed);
                qtd_over(
                    topology,
                    self.routes.enumerated(s, d),
                    &mask,
                    self.config.qtd_try_all_disjoint,
                )
            }
        };
        chosen.ok_or(BlockReason::NoClassicalResource)
    }

    /// Fibers carrying quantum lightpaths committed before index `committed`.
    fn committed_quantum_fibers(&self, committed: usize) -> Vec<bool> {
        fiber_mask(
            &self.topology,
            self.lightpaths[..committed]
                .iter()
                .filter(|lp| lp.band == Band::Quantum)
                .map(|q| &q.path),
        )
    }

    fn hold(&mut self, kind: ChannelKind, source: NodeId, destination: NodeId, a: Assignment) {
        let id = LightpathId(self.next_id);
        self.next_id += 1;
        let band = kind.band();
        for &link in a.path.links() {
            self.topology
                .occupy(link, band, a.wavelength, id)
                .expect("first fit only returns free slots");
        }
        if band == Band::Classical {
            for fiber in a.path.fibers(&self.topology) {
                self.classical_per_fiber[fiber] += 1;
            }
        }
        self.lightpaths.push(Lightpath {
            id,
            kind,
            path: a.path,
            band,
            wavelength: a.wavelength,
            source,
            destination,
        });
    }

    fn rollback(&mut self, (len, next_id): (usize, u64)) {
        for lp in self.lightpaths.drain(len..) {
            self.topology.release(lp.id);
            if lp.band == Band::Classical {
                for fiber in lp.path.fibers(&self.topology) {
                    self.classical_per_fiber[fiber] -= 1;
                }
            }
        }
        self.next_id = next_id;
    }
}
