//! Routing and wavelength assignment for WDM networks in which quantum key
//! distribution (QKD) channels share fiber with classical traffic.
//!
//! A QKD request needs four lightpaths: a quantum key channel in a reserved
//! wavelength pool, two measuring-basis channels (one per direction) and a
//! data channel. Classical light leaking into the quantum channel lowers its
//! signal-to-noise ratio, so requests are admitted only if the new quantum
//! channel, and every quantum channel already in place, stays above an SNR
//! threshold.
//!
//! * [`topology`]: the fiber graph and wavelength occupancy.
//! * [`routing`]: k-shortest paths, simple-path enumeration, fiber overlap.
//! * [`snr`]: quantum SNR and the admission test.
//! * [`rwa`]: First Fit, the SP-FF / MQO / QTD policies and request serving.
//! * [`traffic`]: seeded request streams.
//! * [`sim`]: load sweeps, blocking ratio and average SNR.
//! * [`cli`]: the `qkd-rwa` command and its CSV / plot-data writers.
//! * [`oracle`]: brute-force references used by the test suite.
//!
//! ```
//! use qkd_rwa::{Network, NodeId, Policy, Request, RwaConfig, Topology};
//!
//! let mut net = Network::new(Topology::default_topology(), RwaConfig::default());
//! let conn = net.serve(&Request::quantum(NodeId(0), NodeId(3), 0), Policy::Mqo).unwrap();
//! assert_eq!(conn.lightpaths.len(), 4);
//! assert!(conn.quantum_snr.unwrap() > 31.5);
//! ```

pub mod cli;
pub mod oracle;
pub mod routing;
pub mod rwa;
pub mod sim;
pub mod snr;
pub mod topology;
pub mod traffic;

pub use routing::{all_simple_paths, k_shortest_paths, Path};
pub use rwa::{BlockReason, ChannelKind, Connection, Lightpath, Network, Policy, RwaConfig};
pub use sim::{aggregate, run_once, run_sweep, RunResult, ScenarioConfig};
pub use snr::{compute_snr, SnrParams};
pub use topology::{Band, LinkId, NodeId, Topology};
pub use traffic::{Request, RequestKind, TrafficConfig};

/// The guide's chapters, compiled so their snippets run as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/topology.md")]
    pub mod topology {}
    #[doc = include_str!("../../../book/src/routing.md")]
    pub mod routing {}
    #[doc = include_str!("../../../book/src/snr.md")]
    pub mod snr {}
    #[doc = include_str!("../../../book/src/rwa.md")]
    pub mod rwa {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
