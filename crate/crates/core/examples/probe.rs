//! Calibration probe: prints raw sweep statistics used to pin the
//! analysis-layer thresholds. Not part of the test suite.

use std::sync::Arc;

use mutperc::cascade::{attack, run_cascade, AttackSpec, SystemState};
use mutperc::depmap::{block_local_map, identity_map, linear_map, rewire_map};
use mutperc::entropy::{apen_of_map_offset, ApEnParams};
use mutperc::graphs::generate_square_lattice;
use mutperc::seed::{derive_seed, f64_bits};

fn sweep(side: usize, q: f64, p_lo: f64, p_hi: f64, step: f64, reals: u64, master: u64) {
    let n = side * side;
    let g = Arc::new(generate_square_lattice(side).unwrap());
    let base = identity_map(n).unwrap();
    println!("# L={side} q={q} reals={reals}");
    println!("p,mean_pinf,surv_frac,cond_mean,mean_noi,max_noi");
    let mut p = p_lo;
    while p <= p_hi + 1e-9 {
        let mut sum = 0.0;
        let mut surv = 0usize;
        let mut cond_sum = 0.0;
        let mut noi_sum = 0usize;
        let mut noi_max = 0usize;
        for i in 0..reals {
            let ms = derive_seed(master, &[f64_bits(q), f64_bits(p), i]);
            let map = rewire_map(&base, q, ms).unwrap();
            let mut state = SystemState::new(Arc::clone(&g), map).unwrap();
            attack(&mut state, &AttackSpec::random(p, ms ^ 0x5151)).unwrap();
            let r = run_cascade(&mut state);
            sum += r.p_infinity;
            noi_sum += r.noi;
            noi_max = noi_max.max(r.noi);
            if r.p_infinity >= 0.005 {
                surv += 1;
                cond_sum += r.p_infinity;
            }
        }
        let rf = reals as f64;
        println!(
            "{p:.4},{:.5},{:.3},{:.5},{:.2},{noi_max}",
            sum / rf,
            surv as f64 / rf,
            if surv > 0 { cond_sum / surv as f64 } else { 0.0 },
            noi_sum as f64 / rf
        );
        p += step;
    }
}

fn apen_probe() {
    let params = ApEnParams::default();
    for side in [200usize, 1000] {
        for r in [8usize, 25, 50] {
            let mut vals = Vec::new();
            for seed in 0..5u64 {
                let map = block_local_map(side, r, seed).unwrap();
                vals.push(apen_of_map_offset(&map, &params, seed).unwrap());
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            println!("block L={side} r={r} mean={mean:.4} vals={vals:?}");
        }
        for r in [8usize, 25, 50, side] {
            let map = linear_map(side, r).unwrap();
            let v = apen_of_map_offset(&map, &params, 0).unwrap();
            println!("linear L={side} r={r} v={v:.4}");
        }
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    match args.get(1).map(String::as_str) {
        Some("single") => {
            sweep(400, 0.0, 0.50, 0.65, 0.005, 10, 1);
        }
        Some("singlefine") => {
            sweep(400, 0.0, 0.575, 0.615, 0.002, 30, 2);
        }
        Some("q1") => {
            sweep(316, 1.0, 0.660, 0.710, 0.002, 20, 3);
        }
        Some("q01") => {
            sweep(316, 0.1, 0.580, 0.650, 0.004, 20, 4);
        }
        Some("q02") => {
            sweep(316, 0.2, 0.600, 0.680, 0.004, 20, 5);
        }
        Some("noi") => {
            sweep(100, 1.0, 0.600, 0.760, 0.004, 50, 6);
        }
        Some("apen") => {
            apen_probe();
        }
        Some("q013") => {
            sweep(316, 0.13, 0.600, 0.660, 0.004, 20, 7);
        }
        Some("q015") => {
            sweep(316, 0.15, 0.600, 0.660, 0.004, 20, 8);
        }
        Some("q016") => {
            sweep(316, 0.16, 0.600, 0.660, 0.004, 20, 11);
        }
        Some("q018") => {
            sweep(316, 0.18, 0.600, 0.660, 0.004, 20, 9);
        }
        Some("q012") => {
            sweep(316, 0.12, 0.590, 0.650, 0.004, 20, 10);
        }
        Some("findpc") => {
            // args: side q realizations master
            let side: usize = std::env::args().nth(2).unwrap().parse().unwrap();
            let q: f64 = std::env::args().nth(3).unwrap().parse().unwrap();
            let reals: usize = std::env::args().nth(4).unwrap().parse().unwrap();
            let master: u64 = std::env::args().nth(5).unwrap().parse().unwrap();
            let cfg = mutperc::analysis::EnsembleCfg {
                topology: mutperc::analysis::TopologySpec::Lattice { side },
                map: if q == 0.0 {
                    mutperc::analysis::MapSpec::Identity
                } else {
                    mutperc::analysis::MapSpec::Rewired { q }
                },
                realizations: reals,
                master_seed: master,
                exec: mutperc::exec::ExecMode::Parallel,
            };
            let t0 = std::time::Instant::now();
            let cp = mutperc::analysis::find_pc(&cfg, mutperc::analysis::thresholds::TOL_P);
            println!("{:?} elapsed={:?}", cp, t0.elapsed());
        }
        Some("findpc_topo") => {
            // args: topo n realizations master  (q = 1 coupling)
            let topo = std::env::args().nth(2).unwrap();
            let n: usize = std::env::args().nth(3).unwrap().parse().unwrap();
            let reals: usize = std::env::args().nth(4).unwrap().parse().unwrap();
            let master: u64 = std::env::args().nth(5).unwrap().parse().unwrap();
            let topology = match topo.as_str() {
                "er" => mutperc::analysis::TopologySpec::ErdosRenyi {
                    n,
                    mean_degree: 4.0,
                },
                "ws" => mutperc::analysis::TopologySpec::WattsStrogatz {
                    n,
                    mean_degree: 4,
                    beta: 0.2,
                },
                "sf" => mutperc::analysis::TopologySpec::ScaleFree {
                    n,
                    exponent: 2.7,
                    mean_degree: 4.0,
                },
                _ => panic!("unknown topo"),
            };
            let cfg = mutperc::analysis::EnsembleCfg {
                topology,
                map: mutperc::analysis::MapSpec::Rewired { q: 1.0 },
                realizations: reals,
                master_seed: master,
                exec: mutperc::exec::ExecMode::Parallel,
            };
            let t0 = std::time::Instant::now();
            let cp = mutperc::analysis::find_pc(&cfg, mutperc::analysis::thresholds::TOL_P);
            println!("{:?} elapsed={:?}", cp, t0.elapsed());
        }
        Some("qc") => {
            // args: side realizations master
            let side: usize = std::env::args().nth(2).unwrap().parse().unwrap();
            let reals: usize = std::env::args().nth(3).unwrap().parse().unwrap();
            let master: u64 = std::env::args().nth(4).unwrap().parse().unwrap();
            let cfg = mutperc::analysis::EnsembleCfg {
                topology: mutperc::analysis::TopologySpec::Lattice { side },
                map: mutperc::analysis::MapSpec::Identity,
                realizations: reals,
                master_seed: master,
                exec: mutperc::exec::ExecMode::Parallel,
            };
            let t0 = std::time::Instant::now();
            let qc = mutperc::analysis::find_qc(&cfg, mutperc::analysis::thresholds::TOL_Q);
            println!("{:?} elapsed={:?}", qc, t0.elapsed());
        }
        Some("predict") => {
            // args: side table_reals
            let side: usize = std::env::args().nth(2).unwrap().parse().unwrap();
            let reals: usize = std::env::args().nth(3).unwrap().parse().unwrap();
            let xs: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
            let t0 = std::time::Instant::now();
            let table = mutperc::analysis::tabulate_pinf(
                &mutperc::analysis::TopologySpec::Lattice { side },
                &xs,
                reals,
                17,
                mutperc::exec::ExecMode::Parallel,
            )
            .unwrap();
            let pc = mutperc::analysis::predict_pc(&table, 1e-4);
            println!("predicted_pc={pc} elapsed={:?}", t0.elapsed());
            for x in [0.55, 0.60, 0.62, 0.65, 0.70, 0.80, 0.90, 1.0] {
                println!("table({x}) = {}", table.eval(x));
            }
            for p in [0.5, 0.6, 0.65, 0.68, 0.7, 0.75, 0.9] {
                println!(
                    "solve({p}) = {}",
                    mutperc::analysis::solve_fixed_point(p, &table)
                );
            }
        }
        Some("crit6") => {
            // p_c over the q grid of the monotonicity criterion
            let side: usize = std::env::args().nth(2).unwrap().parse().unwrap();
            let reals: usize = std::env::args().nth(3).unwrap().parse().unwrap();
            for k in 0..=10 {
                let q = k as f64 * 0.05;
                let cfg = mutperc::analysis::EnsembleCfg {
                    topology: mutperc::analysis::TopologySpec::Lattice { side },
                    map: if q == 0.0 {
                        mutperc::analysis::MapSpec::Identity
                    } else {
                        mutperc::analysis::MapSpec::Rewired { q }
                    },
                    realizations: reals,
                    master_seed: 42,
                    exec: mutperc::exec::ExecMode::Parallel,
                };
                let cp =
                    mutperc::analysis::find_pc(&cfg, mutperc::analysis::thresholds::TOL_P).unwrap();
                println!(
                    "q={q:.2} p_c={} order={:?} jump={:.4} noi={:.2}",
                    cp.p_c, cp.order, cp.jump_size, cp.noi_at_pc
                );
            }
        }
        Some("crit9") => {
            // linear and block-local classification at L=200
            let reals: usize = std::env::args().nth(2).unwrap().parse().unwrap();
            let side = 200usize;
            let specs: Vec<(String, mutperc::analysis::MapSpec)> = vec![
                ("linear r=8".into(), mutperc::analysis::MapSpec::Linear { r: 8 }),
                ("linear r=25".into(), mutperc::analysis::MapSpec::Linear { r: 25 }),
                ("linear r=50".into(), mutperc::analysis::MapSpec::Linear { r: 50 }),
                ("linear r=200".into(), mutperc::analysis::MapSpec::Linear { r: 200 }),
                (
                    "block r=8".into(),
                    mutperc::analysis::MapSpec::BlockLocal { r: 8 },
                ),
                (
                    "block r=50".into(),
                    mutperc::analysis::MapSpec::BlockLocal { r: 50 },
                ),
            ];
            for (name, map) in specs {
                let cfg = mutperc::analysis::EnsembleCfg {
                    topology: mutperc::analysis::TopologySpec::Lattice { side },
                    map,
                    realizations: reals,
                    master_seed: 42,
                    exec: mutperc::exec::ExecMode::Parallel,
                };
                let t0 = std::time::Instant::now();
                match mutperc::analysis::find_pc(&cfg, mutperc::analysis::thresholds::TOL_P) {
                    Ok(cp) => println!(
                        "{name}: p_c={} order={:?} jump={:.4} noi={:.2} ({:?})",
                        cp.p_c,
                        cp.order,
                        cp.jump_size,
                        cp.noi_at_pc,
                        t0.elapsed()
                    ),
                    Err(e) => println!("{name}: ERROR {e}"),
                }
            }
        }
        Some("apenq") => {
            // rewired-map ApEn means and pooled SE over the q grid
            let n: usize = std::env::args().nth(2).unwrap().parse().unwrap();
            let seeds: u64 = std::env::args().nth(3).unwrap().parse().unwrap();
            let mut prev_mean = f64::MIN;
            for k in 0..=10 {
                let q = k as f64 * 0.1;
                let mut vals = Vec::new();
                for s in 0..seeds {
                    let base = mutperc::depmap::identity_map(n).unwrap();
                    let map = mutperc::depmap::rewire_map(&base, q, 1000 + s).unwrap();
                    vals.push(mutperc::entropy::apen_of_map(&map, &Default::default()).unwrap());
                }
                let m = vals.iter().sum::<f64>() / vals.len() as f64;
                let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
                    / (vals.len() - 1) as f64;
                let se = (var / vals.len() as f64).sqrt();
                println!(
                    "q={q:.1} mean={m:.4} se={se:.5} rise_ok={}",
                    m >= prev_mean - se
                );
                prev_mean = m;
            }
        }
        Some("qc_topo") => {
            // find_qc on a named topology at N=10^4
            let topo = std::env::args().nth(2).unwrap();
            let reals: usize = std::env::args().nth(3).unwrap().parse().unwrap();
            let topology = match topo.as_str() {
                "lattice" => mutperc::analysis::TopologySpec::Lattice { side: 100 },
                "er" => mutperc::analysis::TopologySpec::ErdosRenyi {
                    n: 10_000,
                    mean_degree: 4.0,
                },
                "ws" => mutperc::analysis::TopologySpec::WattsStrogatz {
                    n: 10_000,
                    mean_degree: 4,
                    beta: 0.1,
                },
                "sf" => mutperc::analysis::TopologySpec::ScaleFree {
                    n: 10_000,
                    exponent: 3.0,
                    mean_degree: 4.0,
                },
                _ => panic!("unknown topo"),
            };
            let cfg = mutperc::analysis::EnsembleCfg {
                topology,
                map: mutperc::analysis::MapSpec::Identity,
                realizations: reals,
                master_seed: 42,
                exec: mutperc::exec::ExecMode::Parallel,
            };
            let t0 = std::time::Instant::now();
            let qc = mutperc::analysis::find_qc(&cfg, mutperc::analysis::thresholds::TOL_Q);
            println!("{topo}: {:?} elapsed={:?}", qc, t0.elapsed());
        }
        Some("fig2") => {
            // witness density for the 3x3 discriminating configuration
            fig2_probe(false);
        }
        Some("fig2open") => {
            fig2_probe(true);
        }
        Some("fig2hist") => {
            fig2_hist();
        }
        Some("crit7") => {
            // NOI divergence at q=1, N=10^4, 100 realizations
            let cfg = mutperc::analysis::EnsembleCfg {
                topology: mutperc::analysis::TopologySpec::Lattice { side: 100 },
                map: mutperc::analysis::MapSpec::Rewired { q: 1.0 },
                realizations: 100,
                master_seed: 42,
                exec: mutperc::exec::ExecMode::Parallel,
            };
            let t0 = std::time::Instant::now();
            let cp = mutperc::analysis::find_pc(&cfg, mutperc::analysis::thresholds::TOL_P).unwrap();
            let lo = mutperc::analysis::eval_point(&cfg, cp.p_c - 0.05).unwrap();
            let hi = mutperc::analysis::eval_point(&cfg, cp.p_c + 0.05).unwrap();
            println!(
                "p_c={} noi_at_pc={} noi(pc-0.05)={} noi(pc+0.05)={} ratio_lo={:.2} ratio_hi={:.2} ({:?})",
                cp.p_c,
                cp.noi_at_pc,
                lo.mean_noi,
                hi.mean_noi,
                cp.noi_at_pc / lo.mean_noi,
                cp.noi_at_pc / hi.mean_noi,
                t0.elapsed()
            );
        }
        Some(other) => eprintln!("unknown probe {other}"),
        None => eprintln!("usage: probe <single|singlefine|q1|q01|q02|noi|apen|findpc|qc|predict>"),
    }
}

// witness search for the 3x3 discriminating configuration: same 5-node
// marked set M and attack for both models; full couples all 9 pairs,
// partial couples only M
fn fig2_probe(open: bool) {
    use mutperc::cascade::{attack, run_cascade, run_cascade_partial_explicit, AttackSpec, SystemState};
    use mutperc::depmap::DependencyMap;
    use mutperc::graphs::{generate_square_lattice, Graph, TopologyTag};
    use std::sync::Arc;

    let graph = if open {
        let mut edges = Vec::new();
        for y in 0..3u32 {
            for x in 0..3u32 {
                let u = x + 3 * y;
                if x < 2 {
                    edges.push((u, u + 1));
                }
                if y < 2 {
                    edges.push((u, u + 3));
                }
            }
        }
        Arc::new(Graph::from_edges(9, &edges, TopologyTag::Lattice, None))
    } else {
        Arc::new(generate_square_lattice(3).unwrap())
    };
    let combos5: Vec<Vec<u32>> = combinations(9, 5);
    let mut tested = 0u64;
    let mut full_zero = 0u64;
    let mut witnesses = 0u64;
    let mut first: Option<(Vec<u32>, Vec<u32>, Vec<u32>)> = None;
    let t0 = std::time::Instant::now();
    for marked in &combos5 {
        // arrangements of the marked targets
        let mut arrangement = marked.clone();
        loop {
            let mut targets: Vec<u32> = (0..9).collect();
            for (slot, &t) in marked.iter().zip(&arrangement) {
                targets[*slot as usize] = t;
            }
            let map =
                DependencyMap::from_permutation(targets, mutperc::depmap::MapKind::Identity)
                    .unwrap();
            for att in &combos5 {
                tested += 1;
                let mut state = SystemState::new(Arc::clone(&graph), map.clone()).unwrap();
                attack(&mut state, &AttackSpec::explicit(att.clone())).unwrap();
                let r = run_cascade(&mut state);
                if !r.final_alive.is_empty() {
                    continue;
                }
                full_zero += 1;
                let mut state = SystemState::new(Arc::clone(&graph), map.clone()).unwrap();
                let rp = run_cascade_partial_explicit(
                    &mut state,
                    marked,
                    &AttackSpec::explicit(att.clone()),
                )
                .unwrap();
                if rp.final_alive.len() == 4 {
                    witnesses += 1;
                    if first.is_none() {
                        first = Some((map.targets().to_vec(), att.clone(), marked.clone()));
                    }
                }
            }
            if !next_permutation(&mut arrangement) {
                break;
            }
        }
    }
    println!(
        "open={open}: tested={tested} full_zero={full_zero} witnesses={witnesses} elapsed={:?}",
        t0.elapsed()
    );
    if let Some((m, a, d)) = &first {
        println!("first witness: map={m:?} attack={a:?} marked={d:?}");
    }
}

// outcome distribution of the full and partial models on both 3x3 variants
fn fig2_hist() {
    use mutperc::cascade::{attack, run_cascade, run_cascade_partial_explicit, AttackSpec, SystemState};
    use mutperc::depmap::DependencyMap;
    use mutperc::graphs::{generate_square_lattice, Graph, TopologyTag};
    use std::sync::Arc;

    for open in [false, true] {
        let graph = if open {
            let mut edges = Vec::new();
            for y in 0..3u32 {
                for x in 0..3u32 {
                    let u = x + 3 * y;
                    if x < 2 {
                        edges.push((u, u + 1));
                    }
                    if y < 2 {
                        edges.push((u, u + 3));
                    }
                }
            }
            Arc::new(Graph::from_edges(9, &edges, TopologyTag::Lattice, None))
        } else {
            Arc::new(generate_square_lattice(3).unwrap())
        };
        let combos5: Vec<Vec<u32>> = combinations(9, 5);
        let mut full_hist = [0u64; 10];
        let mut perm: Vec<u32> = (0..9).collect();
        // partial outcome histogram restricted to (map, attack) with full = 0
        let mut partial_hist = [0u64; 10];
        let mut zero_pairs = 0u64;
        loop {
            let map =
                DependencyMap::from_permutation(perm.clone(), mutperc::depmap::MapKind::Identity)
                    .unwrap();
            for att in &combos5 {
                let mut state = SystemState::new(Arc::clone(&graph), map.clone()).unwrap();
                attack(&mut state, &AttackSpec::explicit(att.clone())).unwrap();
                let r = run_cascade(&mut state);
                full_hist[r.final_alive.len()] += 1;
                if r.final_alive.is_empty() {
                    zero_pairs += 1;
                    if zero_pairs <= 200 {
                        for dep in &combos5 {
                            let mut state =
                                SystemState::new(Arc::clone(&graph), map.clone()).unwrap();
                            let rp = run_cascade_partial_explicit(
                                &mut state,
                                dep,
                                &AttackSpec::explicit(att.clone()),
                            )
                            .unwrap();
                            partial_hist[rp.final_alive.len()] += 1;
                        }
                    }
                }
            }
            if !next_permutation(&mut perm) {
                break;
            }
            // sample every 97th permutation to keep this quick
            for _ in 0..96 {
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
        println!(
            "open={open}: full outcome histogram (alive count 0..9): {:?}",
            full_hist
        );
        println!(
            "open={open}: zero_pairs={zero_pairs} partial histogram over dep 5-sets: {:?}",
            partial_hist
        );
    }
}

fn combinations(n: u32, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::with_capacity(k);
    fn rec(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn next_permutation(arr: &mut [u32]) -> bool {
    if arr.len() < 2 {
        return false;
    }
    let mut i = arr.len() - 1;
    while i > 0 && arr[i - 1] >= arr[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = arr.len() - 1;
    while arr[j] <= arr[i - 1] {
        j -= 1;
    }
    arr.swap(i - 1, j);
    arr[i..].reverse();
    true
}
