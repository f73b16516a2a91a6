use blockfresh::abm::{build_network, run_mechanism, run_simulation, Mechanism};
use blockfresh::export::{write_sim_trace, RunManifest};
use blockfresh::PropagationProbabilities;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graphs_are_simple_and_regular(n in 6u64..300, k in 1u64..6, seed in any::<u64>()) {
        prop_assume!(k < n && (n * k) % 2 == 0);
        let net = build_network(n, k, seed).unwrap();
        for v in 0..net.n() {
            let nb = net.neighbors(v);
            prop_assert_eq!(nb.len(), k as usize);
            for &w in nb {
                prop_assert!(w as usize != v);
                prop_assert!(net.are_adjacent(w as usize, v));
            }
            let mut sorted = nb.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), k as usize);
        }
    }

    #[test]
    fn traces_conserve_miners(
        f in 0.0f64..=1.0, e in 0.0f64..=1.0, r in 0.0f64..=1.0, i in 0.01f64..=1.0,
        seed in 0u64..1000,
    ) {
        let net = build_network(200, 4, 7).unwrap();
        let p = PropagationProbabilities::new(f, e, r, i).unwrap();
        let trace = run_simulation(&net, &p, 40, seed).unwrap();
        let mut refusers = 0;
        for rec in &trace.records {
            prop_assert_eq!(rec.counts.iter().sum::<u64>(), 200);
            prop_assert!(rec.counts[3] >= refusers);
            refusers = rec.counts[3];
        }
        prop_assert!(trace.forwarders <= trace.informed);
    }
}

#[test]
fn exported_trace_is_reproducible() {
    let net = build_network(500, 3, 11).unwrap();
    let p = PropagationProbabilities::new(0.6, 0.1, 0.3, 0.2).unwrap();
    let render = || {
        let t = run_mechanism(&net, &p, &Mechanism::probabilistic_flooding(), 30, 5).unwrap();
        let mut buf = Vec::new();
        write_sim_trace(&mut buf, &t).unwrap();
        (buf, RunManifest::of(&t))
    };
    let (a, ma) = render();
    let (b, mb) = render();
    assert_eq!(a, b);
    assert_eq!(ma, mb);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(
        "epoch,count_i,count_s,count_u,count_r,count_e,p_f_effective,transmissions\n"
    ));
    assert_eq!(text.lines().count(), 32);
}
