//! Scenario execution: sweeps over load levels and repeated runs.
//!
//! Each run starts from an empty network, draws its own request stream and
//! serves it in order. Streams are seeded from `(base_seed, load, run)` only,
//! so every policy sees the same requests for a given load and run.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::rwa::{BlockReason, Network, Policy, RouteTable, RwaConfig};
use crate::snr::snr_to_db;
use crate::topology::Topology;
use crate::traffic::{generate, TrafficConfig};

/// Which quantum channels the per-run average SNR is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrAverage {
    /// Channels established at the end of the run, evaluated against the
    /// final network state.
    #[default]
    EndOfRun,
    /// Each accepted channel's SNR at the moment it was admitted.
    AtAcceptance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub topology: Topology,
    pub policy: Policy,
    pub loads: Vec<usize>,
    pub runs_per_load: usize,
    pub base_seed: u64,
    pub rwa: RwaConfig,
    pub classical_fraction: f64,
    pub snr_average: SnrAverage,
}

impl ScenarioConfig {
    /// Default topology and constants, loads 10 to 100 in steps of 10,
    /// 100 runs per load.
    pub fn reference(policy: Policy) -> Self {
        Self {
            topology: Topology::default_topology(),
            policy,
            loads: (1..=10).map(|i| i * 10).collect(),
            runs_per_load: 100,
            base_seed: 1,
            rwa: RwaConfig::default(),
            classical_fraction: 0.0,
            snr_average: SnrAverage::EndOfRun,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.loads.is_empty() {
            return Err(SimError::Config(
                "at least one load level is required".into(),
            ));
        }
        if self.runs_per_load == 0 {
            return Err(SimError::Config("runs per load must be at least 1".into()));
        }
        if self.rwa.k == 0 || self.rwa.cap == 0 {
            return Err(SimError::Config("k and cap must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.classical_fraction) {
            return Err(SimError::Config(format!(
                "classical fraction {} is outside [0, 1]",
                self.classical_fraction
            )));
        }
        if self.topology.node_count() < 2 {
            return Err(SimError::Config("topology needs at least two nodes".into()));
        }
        self.rwa.snr.validate().map_err(SimError::Config)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("nothing to aggregate")]
    EmptyResults,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReasonCounts {
    pub no_quantum: usize,
    pub no_classical: usize,
    pub new_snr: usize,
    pub degrade_snr: usize,
}

impl ReasonCounts {
    pub fn record(&mut self, reason: BlockReason) {
        match reason {
            BlockReason::NoQuantumResource => self.no_quantum += 1,
            BlockReason::NoClassicalResource => self.no_classical += 1,
            BlockReason::NewChannelSnr => self.new_snr += 1,
            BlockReason::DegradesExistingSnr => self.degrade_snr += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.no_quantum + self.no_classical + self.new_snr + self.degrade_snr
    }

    pub fn snr_related(&self) -> usize {
        self.new_snr + self.degrade_snr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub policy: Policy,
    pub load: usize,
    pub run: usize,
    pub blocked: usize,
    pub total: usize,
    pub blocking_ratio: f64,
    /// `None` when no quantum channel contributes to the average.
    pub avg_snr_linear: Option<f64>,
    pub reasons: ReasonCounts,
}

/// Per `(policy, load)` means across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSummary {
    pub policy: Policy,
    pub load: usize,
    pub runs: usize,
    pub mean_blocking_ratio: f64,
    /// Mean of the defined per-run averages.
    pub mean_snr_linear: Option<f64>,
    pub snr_defined_runs: usize,
    pub snr_undefined_runs: usize,
}

impl LoadSummary {
    /// The mean linear SNR expressed in dB.
    pub fn mean_snr_db(&self) -> Option<f64> {
        self.mean_snr_linear.map(snr_to_db)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Traffic seed for one `(load, run)` cell. Independent of the policy.
pub fn derive_seed(base_seed: u64, load: usize, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ load as u64) ^ run as u64)
}

fn run_on(config: &ScenarioConfig, routes: &Arc<RouteTable>, load: usize, run: usize) -> RunResult {
    let mut network = Network::with_routes(config.topology.clone(), config.rwa, routes.clone());
    let traffic = TrafficConfig {
        total_requests: load,
        seed: derive_seed(config.base_seed, load, run),
        classical_fraction: config.classical_fraction,
    };
    let mut reasons = ReasonCounts::default();
    let mut accepted_snrs = Vec::new();
    for request in generate(&traffic, config.topology.node_count()) {
        match network.serve(&request, config.policy) {
            Ok(connection) => accepted_snrs.extend(connection.quantum_snr),
            Err(reason) => reasons.record(reason),
        }
    }
    let avg_snr_linear = match config.snr_average {
        SnrAverage::EndOfRun => network.average_quantum_snr(),
        SnrAverage::AtAcceptance => (!accepted_snrs.is_empty())
            .then(|| accepted_snrs.iter().sum::<f64>() / accepted_snrs.len() as f64),
    };
    let blocked = reasons.total();
    RunResult {
        policy: config.policy,
        load,
        run,
        blocked,
        total: load,
        blocking_ratio: if load == 0 {
            0.0
        } else {
            blocked as f64 / load as f64
        },
        avg_snr_linear,
        reasons,
    }
}

fn route_table(config: &ScenarioConfig) -> Arc<RouteTable> {
    Arc::new(RouteTable::new(
        &config.topology,
        config.rwa.k,
        config.rwa.cap,
    ))
}

/// One run of `load` requests. A load of zero gives a blocking ratio of 0
/// and an undefined average SNR.
pub fn run_once(config: &ScenarioConfig, load: usize, run: usize) -> Result<RunResult, SimError> {
    config.validate()?;
    Ok(run_on(config, &route_table(config), load, run))
}

/// Every `(load, run)` cell, ordered by load (as listed) then run index.
/// Cells execute in parallel; the output does not depend on scheduling.
pub fn run_sweep(config: &ScenarioConfig) -> Result<Vec<RunResult>, SimError> {
    config.validate()?;
    let routes = route_table(config);
    let cells: Vec<(usize, usize)> = config
        .loads
        .iter()
        .flat_map(|&load| (0..config.runs_per_load).map(move |run| (load, run)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(load, run)| run_on(config, &routes, load, run))
        .collect())
}

/// Means per `(policy, load)`, in policy then load order.
pub fn aggregate(results: &[RunResult]) -> Result<Vec<LoadSummary>, SimError> {
    if results.is_empty() {
        return Err(SimError::EmptyResults);
    }
    let mut groups: BTreeMap<(Policy, usize), Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        groups.entry((r.policy, r.load)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((policy, load), runs)| {
            let snrs: Vec<f64> = runs.iter().filter_map(|r| r.avg_snr_linear).collect();
            LoadSummary {
                policy,
                load,
                runs: runs.len(),
                mean_blocking_ratio: runs.iter().map(|r| r.blocking_ratio).sum::<f64>()
                    / runs.len() as f64,
                mean_snr_linear: (!snrs.is_empty())
                    .then(|| snrs.iter().sum::<f64>() / snrs.len() as f64),
                snr_defined_runs: snrs.len(),
                snr_undefined_runs: runs.len() - snrs.len(),
            }
        })
        .collect())
}
