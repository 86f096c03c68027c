use proptest::prelude::*;

use attractorlab::maps::*;
use attractorlab::measures::*;
use attractorlab::numeric::EventTime;
use attractorlab::partition::{Partition, TICKS};
use attractorlab::timelines::generate_timeline;

fn sp(mu: f64) -> SaddleParams {
    SaddleParams::new(mu, 1.0, 1.0).unwrap()
}

fn switches() -> impl Strategy<Value = (u32, Vec<(f64, u32)>)> {
    (0u32..3, prop::collection::vec((0.0f64..1.0, 0u32..3), 0..30)).prop_map(|(i, mut v)| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        (i, v)
    })
}

fn mbe_sources(seeds: &[f64]) -> Vec<OrbitSource> {
    let m = PolycycleModel::modified_bowen(SaddleNodeParams::new(0.0, 1.0).unwrap(), sp(2.0)).unwrap();
    seeds.iter().map(|&z| OrbitSource::Timeline(generate_timeline(&m, z, 6).unwrap())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_product_marginals((ia, sa) in switches(), (ib, sb) in switches()) {
        let (pa, pb) = (Partition::from_switches(ia, sa), Partition::from_switches(ib, sb));
        let j = pa.product(&pb, 3);
        let t = j.tick_totals(9);
        prop_assert_eq!(t.iter().sum::<u64>(), TICKS);
        let (ta, tb) = (pa.tick_totals(3), pb.tick_totals(3));
        for x in 0..3 {
            prop_assert_eq!((0..3).map(|y| t[x * 3 + y]).sum::<u64>(), ta[x]);
            prop_assert_eq!((0..3).map(|y| t[y * 3 + x]).sum::<u64>(), tb[x]);
        }
    }

    #[test]
    fn weights_conserved_and_marginals_exact(
        z1 in 0.02f64..0.5, z2 in 0.02f64..0.5, h in 0.01f64..1.0, kind in 0usize..2,
    ) {
        let m = if kind == 0 {
            PolycycleModel::biangle(sp(2.0), sp(3.0)).unwrap()
        } else {
            PolycycleModel::loop_model(sp(2.0), 1.0).unwrap()
        };
        let (a, b) = (generate_timeline(&m, z1, 12).unwrap(), generate_timeline(&m, z2, 12).unwrap());
        let src = OrbitSource::product(OrbitSource::Timeline(a.clone()), OrbitSource::Timeline(b.clone()));
        let (ra, rb) = (RegionSystem::legs(""), RegionSystem::legs("~"));
        let rp = RegionSystem::product(&ra, &rb);
        let horizon = EventTime::Plain(h * src.horizon_max().to_f64());
        let j = accumulate(&src, &rp, &horizon).unwrap();
        prop_assert_eq!(j.ticks.iter().sum::<u64>(), TICKS);
        prop_assert!((j.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(j.marginal(&rp, 0, &ra.names).unwrap(), accumulate(&OrbitSource::Timeline(a), &ra, &horizon).unwrap());
        prop_assert_eq!(j.marginal(&rp, 1, &rb.names).unwrap(), accumulate(&OrbitSource::Timeline(b), &rb, &horizon).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hierarchy_and_threshold_monotone(
        seeds in prop::collection::vec(0.02f64..0.5, 30..40), t1 in 0.01f64..0.49, t2 in 0.01f64..0.49,
    ) {
        let src = mbe_sources(&seeds);
        let legs = RegionSystem::legs("");
        let sched = HorizonSchedule::Arrivals(vec![1, 2, 3, 4]);
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let a = estimate_attractors(&src, &legs, &sched, lo).unwrap();
        let b = estimate_attractors(&src, &legs, &sched, hi).unwrap();
        for e in [&a, &b] {
            prop_assert!(e.minimal_cells.iter().all(|c| e.statistical_cells.contains(c)));
            prop_assert!(e.statistical_cells.iter().all(|c| e.milnor_cells.contains(c)));
        }
        prop_assert!(b.statistical_cells.iter().all(|c| a.statistical_cells.contains(c)));
        prop_assert!(b.minimal_cells.iter().all(|c| a.minimal_cells.contains(c)));
    }
}
