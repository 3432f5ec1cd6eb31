//! Acceptance gate: one test per release criterion, numbered so the harness
//! output reads as a checklist. Expected values come from the reference
//! oracles in `common` or from pinned ensemble measurements at master seed
//! 42; tolerances are written next to each assert. Some of the heavier
//! checks take minutes; the per-test elapsed asserts encode the agreed
//! runtime budgets.

mod common;

use std::sync::Arc;
use std::time::Instant;

use mutperc::analysis::{
    eval_point, find_pc, find_qc, thresholds, EnsembleCfg, MapSpec, TopologySpec, TransitionOrder,
};
use mutperc::cascade::{attack, run_cascade, run_cascade_partial_explicit, AttackSpec, SystemState};
use mutperc::depmap::{
    derangements, expected_fixed_points, identity_map, rewire_map, DependencyMap, MapKind,
};
use mutperc::entropy::{apen, apen_of_map, ApEnParams};
use mutperc::exec::ExecMode;
use mutperc::graphs::{
    generate_er, generate_sf, generate_square_lattice, generate_ws, giant_component, AliveMask,
};
use mutperc::seed::{derive_seed, f64_bits};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn lattice_cfg(side: usize, map: MapSpec, realizations: usize) -> EnsembleCfg {
    EnsembleCfg {
        topology: TopologySpec::Lattice { side },
        map,
        realizations,
        master_seed: 42,
        exec: ExecMode::Parallel,
    }
}

#[test]
fn criterion_01_permutation_combinatorics() {
    let t0 = Instant::now();

    // Full enumeration of S_n: the summed fixed-point count over all n!
    // permutations is exactly n!, so the enumerated mean is exactly 1.
    for n in 1..=8usize {
        let fact: u64 = (1..=n as u64).product();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut enumerated = 0u64;
        let mut perms = 0u64;
        loop {
            enumerated += perm.iter().enumerate().filter(|(i, &t)| *i == t).count() as u64;
            perms += 1;
            if !common::next_permutation(&mut perm) {
                break;
            }
        }
        assert_eq!(perms, fact, "S_{n} enumeration incomplete");
        let mean = enumerated as f64 / fact as f64;
        assert_eq!(
            expected_fixed_points(n),
            mean,
            "expected_fixed_points({n}) vs full enumeration"
        );
        assert_eq!(mean, 1.0);
    }

    // Derangement counts against the closed form round(n!/e).
    for n in 2..=15usize {
        let fact: u64 = (1..=n as u64).product();
        let rounded = (fact as f64 / std::f64::consts::E + 0.5).floor() as u64;
        assert_eq!(
            derangements(n).to_string(),
            rounded.to_string(),
            "derangements({n}) vs round(n!/e)"
        );
    }

    // Expectation bound: stays within [0, 1 + e/2] everywhere we evaluate.
    let bound = 1.0 + std::f64::consts::E / 2.0;
    for n in 1..=64usize {
        let e = expected_fixed_points(n);
        assert!((0.0..=bound).contains(&e), "fixed-point bound at n={n}");
    }

    let dt = t0.elapsed();
    assert!(dt.as_secs() < 10, "combinatorics budget exceeded: {dt:?}");
    println!("criterion 01 combinatorics: PASS ({dt:?})");
}

#[test]
fn criterion_02_identity_map_equivalence() {
    let t0 = Instant::now();
    let graph = Arc::new(generate_square_lattice(200).unwrap());
    let n = graph.node_count();
    for &p in &[0.4, 0.6, 0.8] {
        for s in 0..50u64 {
            let spec = AttackSpec::random(p, derive_seed(42, &[f64_bits(p), s]));
            let victims = spec.victims(n).unwrap();
            let mut state =
                SystemState::new(Arc::clone(&graph), identity_map(n).unwrap()).unwrap();
            attack(&mut state, &spec).unwrap();
            let r = run_cascade(&mut state);
            let oracle = common::single_layer_giant_fraction(&graph, &victims);
            assert_eq!(
                r.p_infinity.to_bits(),
                oracle.to_bits(),
                "identity cascade vs single-layer oracle at p={p} seed {s}"
            );
            assert_eq!(r.noi, 1, "identity coupling settles in one round");
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs() < 60, "identity-equivalence budget exceeded: {dt:?}");
    println!("criterion 02 identity equivalence: PASS ({dt:?})");
}

#[test]
fn criterion_03_single_lattice_threshold() {
    let t0 = Instant::now();
    let cfg = lattice_cfg(400, MapSpec::Identity, 50);
    let cp = find_pc(&cfg, thresholds::TOL_P).unwrap();
    println!(
        "criterion 03 single-lattice threshold: p_c={} order={} ({:?})",
        cp.p_c,
        cp.order.as_str(),
        t0.elapsed()
    );
    assert!(
        (cp.p_c - 0.593).abs() <= 0.010,
        "single-lattice p_c {} departs from 0.593 +/- 0.010",
        cp.p_c
    );
    assert!(t0.elapsed().as_secs() < 600, "threshold budget exceeded");
    println!("criterion 03 single-lattice threshold: PASS");
}

#[test]
fn criterion_04_transition_order_reproduction() {
    let t0 = Instant::now();
    let expectations = [
        (0.1, TransitionOrder::Second),
        (0.2, TransitionOrder::First),
        (1.0, TransitionOrder::First),
    ];
    for (q, want) in expectations {
        let cfg = lattice_cfg(316, MapSpec::Rewired { q }, 50);
        let cp = find_pc(&cfg, thresholds::TOL_P).unwrap();
        println!(
            "criterion 04 order at q={q}: p_c={} order={} jump={:.4}",
            cp.p_c,
            cp.order.as_str(),
            cp.jump_size
        );
        assert_eq!(cp.order, want, "transition order at q={q}");
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs() < 1800, "transition-order budget exceeded: {dt:?}");
    println!("criterion 04 transition orders: PASS ({dt:?})");
}

#[test]
fn criterion_05_qc_lattice_desk_scale() {
    let t0 = Instant::now();
    let cfg = lattice_cfg(316, MapSpec::Identity, 30);
    let qc = find_qc(&cfg, thresholds::TOL_Q).unwrap();
    println!(
        "criterion 05 q_c: value={} bracket=[{}, {}] ({:?})",
        qc.value,
        qc.lower,
        qc.upper,
        t0.elapsed()
    );
    assert!(
        (qc.value - 0.13).abs() <= 0.05,
        "lattice q_c {} departs from 0.13 +/- 0.05",
        qc.value
    );
    assert!(t0.elapsed().as_secs() < 7200, "q_c budget exceeded");
    println!("criterion 05 q_c: PASS");
}

#[test]
fn criterion_06_pc_monotone_with_plateau() {
    let t0 = Instant::now();
    let q_grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.05).collect();
    let mut pcs = Vec::with_capacity(q_grid.len());
    for &q in &q_grid {
        let cfg = lattice_cfg(316, MapSpec::Rewired { q }, 50);
        let cp = find_pc(&cfg, thresholds::TOL_P).unwrap();
        println!("criterion 06 grid: q={q:.2} p_c={}", cp.p_c);
        pcs.push(cp.p_c);
    }
    let diffs: Vec<f64> = pcs.windows(2).map(|w| w[1] - w[0]).collect();

    // Non-decreasing within the agreed 0.01 slack.
    for (k, &d) in diffs.iter().enumerate() {
        assert!(
            d >= -0.01,
            "p_c decreases by {} between q={} and q={}",
            -d,
            q_grid[k],
            q_grid[k + 1]
        );
    }

    // Plateau: past some grid point the curve flattens. The fine grid
    // quantizes every estimate to 0.002, so single differences alternate
    // between quanta; the flatness test therefore reads the mean slope from
    // a candidate onward. The empirical knee is the first grid point from
    // which that mean drops below 0.005.
    let knee = (0..diffs.len()).find(|&k| {
        let tail = &diffs[k..];
        tail.iter().sum::<f64>() / (tail.len() as f64) < 0.005
    });
    let knee = knee.expect("p_c(q) never flattens below 0.005 mean slope");
    println!(
        "criterion 06 plateau: knee at q={:.2}, mean onward slope {:.4}",
        q_grid[knee],
        diffs[knee..].iter().sum::<f64>() / (diffs.len() - knee) as f64
    );
    assert!(
        q_grid[knee] <= 0.45,
        "plateau must start inside the scanned q range"
    );
    // The plateau follows a genuine rise: p_c has already climbed by the
    // time the curve flattens.
    assert!(
        pcs[knee] - pcs[0] >= 0.02,
        "p_c rise before the plateau is too small: {} -> {}",
        pcs[0],
        pcs[knee]
    );
    println!("criterion 06 p_c(q) monotone with plateau: PASS ({:?})", t0.elapsed());
}

#[test]
fn criterion_07_noi_divergence_at_pc() {
    let t0 = Instant::now();
    let cfg = lattice_cfg(100, MapSpec::Rewired { q: 1.0 }, 100);
    let cp = find_pc(&cfg, thresholds::TOL_P).unwrap();
    let below = eval_point(&cfg, cp.p_c - 0.05).unwrap();
    let above = eval_point(&cfg, cp.p_c + 0.05).unwrap();
    println!(
        "criterion 07 NOI divergence: p_c={} noi_at_pc={:.2} noi(p_c-0.05)={:.2} noi(p_c+0.05)={:.2} ratios {:.2}/{:.2} ({:?})",
        cp.p_c,
        cp.noi_at_pc,
        below.mean_noi,
        above.mean_noi,
        cp.noi_at_pc / below.mean_noi,
        cp.noi_at_pc / above.mean_noi,
        t0.elapsed()
    );
    assert!(
        cp.noi_at_pc > 5.0 * below.mean_noi && cp.noi_at_pc > 5.0 * above.mean_noi,
        "NOI peak {:.2} does not exceed 5x the off-critical means {:.2}/{:.2}; \
         the peak sharpens with system size and N=10^4 leaves it below this factor",
        cp.noi_at_pc,
        below.mean_noi,
        above.mean_noi
    );
    println!("criterion 07 NOI divergence: PASS");
}

#[test]
fn criterion_08_apen_monotone_in_q() {
    let t0 = Instant::now();
    let n = 10_000usize;
    let seeds = 20u64;
    let base = identity_map(n).unwrap();
    let params = ApEnParams::default();
    let mut means = Vec::new();
    let mut ses = Vec::new();
    for k in 0..=10 {
        let q = k as f64 * 0.1;
        let vals: Vec<f64> = (0..seeds)
            .map(|s| apen_of_map(&rewire_map(&base, q, 1000 + s).unwrap(), &params).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var =
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (vals.len() - 1) as f64;
        means.push(mean);
        ses.push((var / vals.len() as f64).sqrt());
        println!("criterion 08 grid: q={q:.1} mean={mean:.4} se={:.5}", ses[k]);
    }
    assert!(means[0] < 0.05, "identity-map ApEn {} not near zero", means[0]);
    for k in 0..10 {
        let pooled = (ses[k] * ses[k] + ses[k + 1] * ses[k + 1]).sqrt();
        assert!(
            means[k + 1] >= means[k] - pooled,
            "ApEn falls beyond one pooled SE between q={:.1} and q={:.1}",
            k as f64 * 0.1,
            (k + 1) as f64 * 0.1
        );
    }
    let argmax = means
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert_eq!(argmax, 10, "ApEn maximum must sit at q=1");
    println!("criterion 08 ApEn monotone: PASS ({:?})", t0.elapsed());
}

#[test]
fn criterion_09_linear_and_block_classification() {
    let t0 = Instant::now();
    let cases: Vec<(MapSpec, TransitionOrder, &str)> = vec![
        (MapSpec::Linear { r: 8 }, TransitionOrder::Second, "linear r=8"),
        (MapSpec::Linear { r: 25 }, TransitionOrder::Second, "linear r=25"),
        (MapSpec::Linear { r: 50 }, TransitionOrder::Second, "linear r=50"),
        (MapSpec::Linear { r: 200 }, TransitionOrder::Second, "linear r=L"),
        (MapSpec::BlockLocal { r: 8 }, TransitionOrder::Second, "block r=8"),
        (MapSpec::BlockLocal { r: 50 }, TransitionOrder::First, "block r=50"),
    ];
    for (map, want, label) in cases {
        let cfg = lattice_cfg(200, map, 30);
        let cp = find_pc(&cfg, thresholds::TOL_P).unwrap();
        println!(
            "criterion 09 {label}: p_c={} order={} jump={:.4}",
            cp.p_c,
            cp.order.as_str(),
            cp.jump_size
        );
        assert_eq!(cp.order, want, "classification for {label}");
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs() < 3600, "linear/block budget exceeded: {dt:?}");
    println!("criterion 09 linear/block classification: PASS ({dt:?})");
}

#[test]
fn criterion_10_discriminating_configuration() {
    let t0 = Instant::now();
    let graph = Arc::new(generate_square_lattice(3).unwrap());
    let five_sets: Vec<Vec<u32>> = common::combinations(9, 5)
        .into_iter()
        .map(|c| c.into_iter().map(|v| v as u32).collect())
        .collect();

    let mut tested = 0u64;
    let mut witnesses = 0u64;
    let mut first: Option<(Vec<u32>, Vec<u32>, Vec<u32>)> = None;
    for marked in &five_sets {
        // Every arrangement of the marked nodes' partners among themselves;
        // unmarked nodes keep their identity partner.
        let mut arrangement = marked.clone();
        loop {
            let mut targets: Vec<u32> = (0..9).collect();
            for (slot, &t) in marked.iter().zip(&arrangement) {
                targets[*slot as usize] = t;
            }
            let map = DependencyMap::from_permutation(targets, MapKind::Identity).unwrap();
            for att in &five_sets {
                tested += 1;
                let mut state =
                    SystemState::new(Arc::clone(&graph), map.clone()).unwrap();
                attack(&mut state, &AttackSpec::explicit(att.clone())).unwrap();
                let full = run_cascade(&mut state);
                if !full.final_alive.is_empty() {
                    continue;
                }
                let mut state =
                    SystemState::new(Arc::clone(&graph), map.clone()).unwrap();
                let partial = run_cascade_partial_explicit(
                    &mut state,
                    marked,
                    &AttackSpec::explicit(att.clone()),
                )
                .unwrap();
                if partial.final_alive.len() == 4 {
                    witnesses += 1;
                    if first.is_none() {
                        first =
                            Some((map.targets().to_vec(), att.clone(), marked.clone()));
                    }
                }
            }
            if !common::next_permutation(&mut arrangement) {
                break;
            }
        }
    }
    let dt = t0.elapsed();
    println!(
        "criterion 10 exhaustive 3x3 search: tested={tested} witnesses={witnesses} ({dt:?})"
    );
    assert_eq!(tested, 126 * 120 * 126, "search space not exhausted");
    assert!(
        witnesses > 0,
        "no (map, attack) pair collapses the full model to 0/9 while the \
         partial model keeps 4/9"
    );
    let (map, att, marked) = first.unwrap();
    println!("criterion 10 first witness: map={map:?} attack={att:?} marked={marked:?}");
    assert!(dt.as_secs() < 60, "exhaustive-search budget exceeded: {dt:?}");
    println!("criterion 10 discriminating configuration: PASS");
}

#[test]
fn criterion_11_oracle_equivalence() {
    let t0 = Instant::now();

    // ApEn: optimized counting vs the quadratic reference.
    let params = ApEnParams::default();
    let mut rng = StdRng::seed_from_u64(7);
    for case in 0..100 {
        let len = rng.gen_range(10..=2000);
        let series: Vec<f64> = match case % 3 {
            0 => (0..len).map(|_| rng.gen_range(0.0..10.0)).collect(),
            1 => (0..len)
                .map(|_| rng.gen_range(0..6) as f64)
                .collect(),
            _ => {
                let mut walk = 0.0;
                (0..len)
                    .map(|_| {
                        walk += rng.gen_range(-1.0..1.0);
                        walk
                    })
                    .collect()
            }
        };
        let fast = apen(&series, &params).unwrap();
        let reference = common::naive_apen(&series, params.m, params.tolerance_factor);
        assert!(
            (fast - reference).abs() <= 1e-12,
            "apen mismatch on case {case}: {fast} vs {reference}"
        );
    }
    // Constant series return 0 by convention in both implementations.
    let flat = vec![3.25; 64];
    assert_eq!(apen(&flat, &params).unwrap(), 0.0);
    assert_eq!(common::naive_apen(&flat, params.m, params.tolerance_factor), 0.0);

    // Giant component vs flood fill on mixed random topologies and masks.
    for case in 0..500u64 {
        let g = match case % 4 {
            0 => generate_square_lattice(rng.gen_range(2..=14)).unwrap(),
            1 => generate_er(
                rng.gen_range(2..=200),
                rng.gen_range(0.5..6.0),
                derive_seed(11, &[case]),
            )
            .unwrap(),
            2 => generate_ws(
                rng.gen_range(10..=200),
                4,
                rng.gen_range(0.0..0.5),
                derive_seed(11, &[case]),
            )
            .unwrap(),
            _ => generate_sf(
                rng.gen_range(100..=200),
                rng.gen_range(2.2..3.5),
                rng.gen_range(2.0..5.0),
                derive_seed(11, &[case]),
            )
            .unwrap(),
        };
        let density = rng.gen_range(0.2..0.95);
        let bits: Vec<bool> = (0..g.node_count()).map(|_| rng.gen_bool(density)).collect();
        let mask = AliveMask::from_bits(bits.clone());
        let mut fast = giant_component(&g, &mask);
        let mut reference = common::flood_fill_giant(&g, &bits);
        fast.sort_unstable();
        reference.sort_unstable();
        assert_eq!(fast, reference, "giant component mismatch on case {case}");
    }
    println!("criterion 11 oracle equivalence: PASS ({:?})", t0.elapsed());
}

#[test]
fn criterion_12_topology_ordering_of_qc() {
    let t0 = Instant::now();
    let reals = 30;
    let qc_for = |topology: TopologySpec| {
        let cfg = EnsembleCfg {
            topology,
            map: MapSpec::Identity,
            realizations: reals,
            master_seed: 42,
            exec: ExecMode::Parallel,
        };
        find_qc(&cfg, thresholds::TOL_Q).unwrap()
    };
    let lattice = qc_for(TopologySpec::Lattice { side: 100 });
    let sf = qc_for(TopologySpec::ScaleFree {
        n: 10_000,
        exponent: 3.0,
        mean_degree: 4.0,
    });
    println!(
        "criterion 12 q_c brackets: lattice [{}, {}] scale-free [{}, {}]",
        lattice.lower, lattice.upper, sf.lower, sf.upper
    );
    assert!(
        lattice.upper < sf.lower,
        "lattice and scale-free q_c brackets overlap"
    );

    // Informational four-way ordering; reported, not asserted, since the
    // middle pair is not resolvable with desk-scale statistics.
    let ws = qc_for(TopologySpec::WattsStrogatz {
        n: 10_000,
        mean_degree: 4,
        beta: 0.1,
    });
    let er = qc_for(TopologySpec::ErdosRenyi {
        n: 10_000,
        mean_degree: 4.0,
    });
    let ordered = lattice.value < ws.value && ws.value < er.value && er.value < sf.value;
    println!(
        "criterion 12 informational ordering: lattice {} < small-world {} < random {} < scale-free {} holds={ordered}",
        lattice.value, ws.value, er.value, sf.value
    );
    println!("criterion 12 topology ordering: PASS ({:?})", t0.elapsed());
}
