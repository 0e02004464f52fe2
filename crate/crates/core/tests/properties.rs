use proptest::prelude::*;

use qkd_rwa::cli::{read_runs_csv, write_runs_csv};
use qkd_rwa::oracle::brute_force_paths;
use qkd_rwa::routing::{path_order, shared_length_km, shared_quantum_links};
use qkd_rwa::rwa::{allocate_classical_mqo, allocate_classical_qtd, allocate_classical_spff};
use qkd_rwa::sim::ReasonCounts;
use qkd_rwa::snr::{breakdown, SnrParams};
use qkd_rwa::topology::{Band, LightpathId};
use qkd_rwa::traffic::RequestKind;
use qkd_rwa::{
    all_simple_paths, k_shortest_paths, Network, NodeId, Policy, Request, RunResult, RwaConfig,
    Topology,
};

/// Connected graph on 2 to 6 nodes with small wavelength pools so that
/// contention shows up quickly.
fn topology() -> impl Strategy<Value = Topology> {
    (2usize..=6).prop_flat_map(|n| {
        let tree = proptest::collection::vec((any::<prop::sample::Index>(), 1u32..=60), n - 1);
        let extra = proptest::collection::vec((0..n, 0..n, 1u32..=60), 0..=n);
        (Just(n), tree, extra).prop_map(|(n, tree, extra)| {
            let mut fibers: Vec<(usize, usize, f64)> = tree
                .into_iter()
                .enumerate()
                .map(|(i, (parent, len))| (parent.index(i + 1), i + 1, len as f64))
                .collect();
            fibers.extend(
                extra
                    .into_iter()
                    .filter(|(u, v, _)| u != v)
                    .map(|(u, v, len)| (u, v, len as f64)),
            );
            Topology::new(n, 6, 2, &fibers).unwrap()
        })
    })
}

fn requests(max: usize) -> impl Strategy<Value = Vec<(usize, usize, bool)>> {
    proptest::collection::vec((0usize..6, 0usize..6, prop::bool::weighted(0.2)), 1..=max)
}

fn to_request(n: usize, seq: usize, (s, d, standalone): (usize, usize, bool)) -> Option<Request> {
    let (s, d) = (s % n, d % n);
    (s != d).then_some(Request {
        source: NodeId(s),
        destination: NodeId(d),
        sequence: seq,
        kind: if standalone {
            RequestKind::ClassicalStandalone
        } else {
            RequestKind::Quantum
        },
    })
}

fn policy() -> impl Strategy<Value = Policy> {
    prop::sample::select(Policy::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn release_undoes_occupy(
        topo in topology(),
        picks in proptest::collection::vec((any::<prop::sample::Index>(), any::<bool>(), 0usize..6, 0u64..5), 0..40),
    ) {
        let fresh = topo.clone();
        let mut topo = topo;
        let mut taken = 0;
        for (link, quantum, index, holder) in picks {
            let link = topo.links()[link.index(topo.link_count())].id;
            let band = if quantum { Band::Quantum } else { Band::Classical };
            if topo.occupy(link, band, index, LightpathId(holder)).is_ok() {
                taken += 1;
            }
            prop_assert_eq!(topo.occupied_slots(), taken);
        }
        for holder in 0..5 {
            topo.release(LightpathId(holder));
        }
        prop_assert_eq!(topo.occupied_slots(), 0);
        prop_assert_eq!(topo, fresh);
    }

    #[test]
    fn serve_is_all_or_nothing(topo in topology(), stream in requests(30), policy in policy()) {
        let n = topo.node_count();
        let mut net = Network::new(topo, RwaConfig::default());
        for (seq, r) in stream.into_iter().enumerate() {
            let Some(request) = to_request(n, seq, r) else { continue };
            let before = net.clone();
            match net.serve(&request, policy) {
                Ok(conn) => {
                    let expected = match request.kind {
                        RequestKind::Quantum => 4,
                        RequestKind::ClassicalStandalone => 1,
                    };
                    prop_assert_eq!(conn.lightpaths.len(), expected);
                    prop_assert_eq!(net.lightpaths().len(), before.lightpaths().len() + expected);
                }
                Err(_) => prop_assert!(net == before),
            }
            let hops: usize = net.lightpaths().iter().map(|lp| lp.path.hops()).sum();
            prop_assert_eq!(net.topology().occupied_slots(), hops);
            prop_assert_eq!(net.quantum_snrs(), net.quantum_snrs_from_scratch());
        }
    }

    #[test]
    fn snr_falls_with_crosstalk_and_length(
        length in 0.0f64..200.0,
        shared in 0.0f64..500.0,
        extra in 0.001f64..100.0,
    ) {
        let params = SnrParams::default();
        let base = breakdown(length, shared, &params).ratio();
        prop_assert!(breakdown(length, shared + extra, &params).ratio() < base);
        prop_assert!(breakdown(length + extra, shared, &params).ratio() < base);
    }

    #[test]
    fn crosstalk_noise_is_linear(shared in 0.0f64..500.0, scale in 0.0f64..10.0) {
        let params = SnrParams::default();
        let one = breakdown(30.0, shared, &params).crosstalk_noise;
        let scaled = breakdown(30.0, shared * scale, &params).crosstalk_noise;
        prop_assert!((scaled - one * scale).abs() <= 1e-12 * one.abs().max(1e-30) * scale.max(1.0));
    }

    #[test]
    fn routing_matches_enumeration(topo in topology(), s in 0usize..6, d in 0usize..6, k in 1usize..6) {
        let n = topo.node_count();
        let (s, d) = (NodeId(s % n), NodeId(d % n));
        prop_assume!(s != d);
        let mut all = brute_force_paths(&topo, s, d).unwrap();
        all.sort_by(path_order);
        prop_assert_eq!(&all_simple_paths(&topo, s, d, usize::MAX), &all);
        let expected: Vec<_> = all.into_iter().take(k).collect();
        prop_assert_eq!(k_shortest_paths(&topo, s, d, k), expected);
    }

    #[test]
    fn policies_agree_without_quantum_channels(topo in topology(), s in 0usize..6, d in 0usize..6) {
        let n = topo.node_count();
        let (s, d) = (NodeId(s % n), NodeId(d % n));
        prop_assume!(s != d);
        let spff = allocate_classical_spff(&topo, s, d, 3).unwrap();
        let mqo = allocate_classical_mqo(&topo, s, d, [], 64).unwrap();
        let qtd = allocate_classical_qtd(&topo, s, d, [], 64, false).unwrap();
        prop_assert_eq!(&spff, &mqo);
        prop_assert_eq!(&spff, &qtd);
    }

    #[test]
    fn shared_length_is_symmetric(topo in topology(), a in (0usize..6, 0usize..6), b in (0usize..6, 0usize..6)) {
        let n = topo.node_count();
        let route = |(s, d): (usize, usize)| {
            let (s, d) = (NodeId(s % n), NodeId(d % n));
            (s != d).then(|| k_shortest_paths(&topo, s, d, 1).remove(0))
        };
        let (Some(p), Some(q)) = (route(a), route(b)) else { return Ok(()) };
        prop_assert_eq!(shared_length_km(&topo, &p, &q), shared_length_km(&topo, &q, &p));
        prop_assert!(shared_length_km(&topo, &p, &p) == p.length_km());
    }

    #[test]
    fn adding_quantum_routes_never_lowers_overlap(topo in topology(), pairs in proptest::collection::vec((0usize..6, 0usize..6), 1..5)) {
        let n = topo.node_count();
        let routes: Vec<_> = pairs
            .into_iter()
            .map(|(s, d)| (NodeId(s % n), NodeId(d % n)))
            .filter(|(s, d)| s != d)
            .map(|(s, d)| k_shortest_paths(&topo, s, d, 1).remove(0))
            .collect();
        prop_assume!(!routes.is_empty());
        let probe = &routes[0];
        let mut last = 0;
        for i in 0..=routes.len() {
            let count = shared_quantum_links(&topo, probe, &routes[..i]);
            prop_assert!(count >= last);
            prop_assert!(count <= probe.hops());
            last = count;
        }
    }

    #[test]
    fn runs_csv_round_trips(
        rows in proptest::collection::vec(
            (policy(), 0usize..200, 0usize..200, 0usize..200, 1usize..200, prop::option::of(1e-3f64..1e9), [0usize..50, 0usize..50, 0usize..50, 0usize..50]),
            0..20,
        ),
    ) {
        let results: Vec<RunResult> = rows
            .into_iter()
            .map(|(policy, load, run, blocked, total, snr, r)| RunResult {
                policy,
                load,
                run,
                blocked,
                total,
                blocking_ratio: blocked as f64 / total as f64,
                avg_snr_linear: snr,
                reasons: ReasonCounts {
                    no_quantum: r[0],
                    no_classical: r[1],
                    new_snr: r[2],
                    degrade_snr: r[3],
                },
            })
            .collect();
        let mut bytes = Vec::new();
        write_runs_csv(&results, &mut bytes).unwrap();
        let back = read_runs_csv(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.len(), results.len());
        for (a, b) in results.iter().zip(&back) {
            prop_assert_eq!(
                (a.policy, a.load, a.run, a.blocked, a.total, &a.reasons),
                (b.policy, b.load, b.run, b.blocked, b.total, &b.reasons)
            );
            prop_assert_eq!(a.blocking_ratio, b.blocking_ratio);
            match (a.avg_snr_linear, b.avg_snr_linear) {
                (None, None) => {}
                (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-12 * x),
                other => prop_assert!(false, "snr mismatch {:?}", other),
            }
        }
    }
}
