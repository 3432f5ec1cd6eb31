//! Mutual-percolation cascade between two interdependent layers.
//!
//! After an initial attack the two layers are alternately pruned to their
//! giant components, each pruning killing the dependency partners of the
//! removed nodes in the opposite layer, until a round passes with no
//! casualties. Full interdependence couples every node pair; the partial
//! variant couples only a designated subset of pairs and leaves the rest
//! autonomous.

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::depmap::DependencyMap;
use crate::error::{Error, Result};
use crate::graphs::{AliveMask, ComponentScratch, Graph};

/// Two coupled layers plus their aliveness state. Layer B always carries a
/// copy of layer A's topology; both handles may point at the same `Graph`.
#[derive(Debug, Clone)]
pub struct SystemState {
    graph_a: Arc<Graph>,
    graph_b: Arc<Graph>,
    map: DependencyMap,
    inverse: Vec<u32>,
    alive_a: AliveMask,
    alive_b: AliveMask,
    alive_a_count: usize,
    alive_b_count: usize,
}

impl SystemState {
    /// Both layers share one topology, per the model's mirrored construction.
    pub fn new(graph: Arc<Graph>, map: DependencyMap) -> Result<SystemState> {
        let copy = Arc::clone(&graph);
        SystemState::with_layers(graph, copy, map)
    }

    pub fn with_layers(
        graph_a: Arc<Graph>,
        graph_b: Arc<Graph>,
        map: DependencyMap,
    ) -> Result<SystemState> {
        let n = graph_a.node_count();
        if graph_b.node_count() != n {
            return Err(Error::InvalidParameter(format!(
                "layer node counts differ: {} vs {}",
                n,
                graph_b.node_count()
            )));
        }
        if map.len() != n {
            return Err(Error::InvalidParameter(format!(
                "map covers {} nodes but layers have {n}",
                map.len()
            )));
        }
        map.validate()?;
        let inverse = map.inverse();
        Ok(SystemState {
            graph_a,
            graph_b,
            map,
            inverse,
            alive_a: AliveMask::all_alive(n),
            alive_b: AliveMask::all_alive(n),
            alive_a_count: n,
            alive_b_count: n,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph_a.node_count()
    }

    pub fn graph_a(&self) -> &Graph {
        &self.graph_a
    }

    pub fn graph_b(&self) -> &Graph {
        &self.graph_b
    }

    pub fn map(&self) -> &DependencyMap {
        &self.map
    }

    pub fn alive_a(&self) -> &AliveMask {
        &self.alive_a
    }

    pub fn alive_b(&self) -> &AliveMask {
        &self.alive_b
    }

    /// Revive every node, keeping graphs and map.
    pub fn reset(&mut self) {
        let n = self.node_count();
        self.alive_a = AliveMask::all_alive(n);
        self.alive_b = AliveMask::all_alive(n);
        self.alive_a_count = n;
        self.alive_b_count = n;
    }

    #[inline]
    fn kill_a(&mut self, u: u32) -> bool {
        if self.alive_a.is_alive(u) {
            self.alive_a.kill(u);
            self.alive_a_count -= 1;
            true
        } else {
            false
        }
    }

    #[inline]
    fn kill_b(&mut self, v: u32) -> bool {
        if self.alive_b.is_alive(v) {
            self.alive_b.kill(v);
            self.alive_b_count -= 1;
            true
        } else {
            false
        }
    }
}

/// Initial random damage: fraction 1-p of layer A's nodes.
#[derive(Debug, Clone)]
pub struct AttackSpec {
    pub p: f64,
    pub seed: u64,
    /// Explicit victim list overriding the random choice.
    pub explicit_set: Option<Vec<u32>>,
}

impl AttackSpec {
    pub fn random(p: f64, seed: u64) -> AttackSpec {
        AttackSpec {
            p,
            seed,
            explicit_set: None,
        }
    }

    pub fn explicit(victims: Vec<u32>) -> AttackSpec {
        AttackSpec {
            p: 1.0,
            seed: 0,
            explicit_set: Some(victims),
        }
    }

    /// Resolve the concrete victim list for a system of `n` nodes: the
    /// explicit set when given, otherwise floor((1-p)n) distinct nodes drawn
    /// from the seeded generator. Exposed so oracles can replay an attack.
    pub fn victims(&self, n: usize) -> Result<Vec<u32>> {
        if let Some(set) = &self.explicit_set {
            let mut seen = vec![false; n];
            for &u in set {
                if u as usize >= n {
                    return Err(Error::InvalidParameter(format!(
                        "attack victim {u} out of range for N = {n}"
                    )));
                }
                if seen[u as usize] {
                    return Err(Error::InvalidParameter(format!(
                        "attack victim {u} listed twice"
                    )));
                }
                seen[u as usize] = true;
            }
            return Ok(set.clone());
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!(
                "surviving fraction must lie in [0, 1], got {}",
                self.p
            )));
        }
        // the small slack absorbs representation error of (1-p)*N, which is
        // an exact integer for grid-aligned p up to N ~ 1e8
        let m = ((1.0 - self.p) * n as f64 + 1e-9).floor() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let victims = rand::seq::index::sample(&mut rng, n, m)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        Ok(victims)
    }
}

/// Remove the attacked nodes from A and their dependency partners from B.
/// Under full dependency this equals simultaneous removal from both layers.
pub fn attack(state: &mut SystemState, spec: &AttackSpec) -> Result<()> {
    attack_with_dependent(state, spec, None)
}

fn attack_with_dependent(
    state: &mut SystemState,
    spec: &AttackSpec,
    dependent: Option<&[bool]>,
) -> Result<()> {
    let victims = spec.victims(state.node_count())?;
    for u in victims {
        state.kill_a(u);
        if dependent.map_or(true, |dep| dep[u as usize]) {
            state.kill_b(state.map.target(u));
        }
    }
    Ok(())
}

/// Outcome of one cascade run. Fractions are relative to the original N.
#[derive(Debug, Clone)]
pub struct CascadeResult {
    /// Final mutual giant-component fraction.
    pub p_infinity: f64,
    /// Number of pruning rounds in which at least one node died (minimum 1:
    /// even an attack-free system is verified once).
    pub noi: usize,
    /// Layer-A survivor fraction: entry 0 right after the attack, then one
    /// entry per round. Non-increasing; noi = trace.len() - 1.
    pub trace: Vec<f64>,
    /// Layer-B survivor fractions at the same round boundaries.
    pub trace_b: Vec<f64>,
    /// Survivor fraction of the layer just pruned, one entry per half-step
    /// (A, B, A, B, ...), preceded by the post-attack fraction. This is the
    /// sequence the recursive survivor-fraction equation speaks about.
    pub half_steps: Vec<f64>,
    /// Layer-A nodes alive at termination, ascending.
    pub final_alive: Vec<u32>,
}

/// Run the cascade to completion under full interdependence. The attack must
/// already have been applied.
pub fn run_cascade(state: &mut SystemState) -> CascadeResult {
    cascade_loop(state, None)
}

/// Partial-interdependence contrast model: a random `dependent_fraction` of
/// node pairs (i, pi[i]) is coupled, the rest are autonomous. The attack is
/// applied inside, so that partner damage respects the coupling.
pub fn run_cascade_partial(
    state: &mut SystemState,
    dependent_fraction: f64,
    attack_spec: &AttackSpec,
    dependent_seed: u64,
) -> Result<CascadeResult> {
    if !(0.0..=1.0).contains(&dependent_fraction) {
        return Err(Error::InvalidParameter(format!(
            "dependent fraction must lie in [0, 1], got {dependent_fraction}"
        )));
    }
    let n = state.node_count();
    let count = (dependent_fraction * n as f64 + 1e-9).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(dependent_seed);
    let mut dependent = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, n, count) {
        dependent[i] = true;
    }
    attack_with_dependent(state, attack_spec, Some(&dependent))?;
    Ok(cascade_loop(state, Some(&dependent)))
}

/// [`run_cascade_partial`] with the coupled A-side nodes given explicitly.
pub fn run_cascade_partial_explicit(
    state: &mut SystemState,
    dependent_nodes: &[u32],
    attack_spec: &AttackSpec,
) -> Result<CascadeResult> {
    let n = state.node_count();
    let mut dependent = vec![false; n];
    for &u in dependent_nodes {
        if u as usize >= n {
            return Err(Error::InvalidParameter(format!(
                "dependent node {u} out of range for N = {n}"
            )));
        }
        dependent[u as usize] = true;
    }
    attack_with_dependent(state, attack_spec, Some(&dependent))?;
    Ok(cascade_loop(state, Some(&dependent)))
}

/// Prune the given layer to its giant component; report how many died and
/// kill the opposite partners of coupled victims.
///
/// A giant of a single node is treated as no giant at all: a mutual giant
/// component carries connectivity, and an isolated survivor supports no
/// links. Extensive giants are never size 1, so this only decides micro
/// systems, where it lets a cascade grind a lattice down to nothing instead
/// of parking forever on one aligned node pair.
fn prune_layer(
    state: &mut SystemState,
    scratch: &mut ComponentScratch,
    layer_a: bool,
    dependent: Option<&[bool]>,
) -> usize {
    let n = state.node_count();
    let graph = if layer_a {
        Arc::clone(&state.graph_a)
    } else {
        Arc::clone(&state.graph_b)
    };
    let alive = if layer_a {
        state.alive_a.as_slice()
    } else {
        state.alive_b.as_slice()
    };
    let giant_root = scratch
        .largest_component(&graph, alive)
        .filter(|&(_, size)| size >= 2);
    let mut killed = 0usize;
    for u in 0..n as u32 {
        let alive_here = if layer_a {
            state.alive_a.is_alive(u)
        } else {
            state.alive_b.is_alive(u)
        };
        if !alive_here {
            continue;
        }
        let in_giant = match giant_root {
            Some((root, _)) => scratch.in_component(u, root),
            None => false,
        };
        if in_giant {
            continue;
        }
        if layer_a {
            state.kill_a(u);
            killed += 1;
            if dependent.map_or(true, |dep| dep[u as usize]) {
                if state.kill_b(state.map.target(u)) {
                    killed += 1;
                }
            }
        } else {
            state.kill_b(u);
            killed += 1;
            let partner = state.inverse[u as usize];
            if dependent.map_or(true, |dep| dep[partner as usize]) {
                if state.kill_a(partner) {
                    killed += 1;
                }
            }
        }
    }
    killed
}

fn cascade_loop(state: &mut SystemState, dependent: Option<&[bool]>) -> CascadeResult {
    let n = state.node_count();
    let nf = n as f64;
    let mut scratch = ComponentScratch::new(n);
    let mut trace = vec![state.alive_a_count as f64 / nf];
    let mut trace_b = vec![state.alive_b_count as f64 / nf];
    let mut half_steps = vec![state.alive_a_count as f64 / nf];
    let mut rounds = 0usize;
    loop {
        let mut killed = prune_layer(state, &mut scratch, true, dependent);
        half_steps.push(state.alive_a_count as f64 / nf);
        killed += prune_layer(state, &mut scratch, false, dependent);
        half_steps.push(state.alive_b_count as f64 / nf);
        rounds += 1;
        if killed == 0 && rounds > 1 {
            // quiet round after the cascade already ran: not an iteration
            half_steps.truncate(half_steps.len() - 2);
            break;
        }
        debug_assert!(state.alive_a_count as f64 / nf <= trace.last().unwrap() + 1e-12);
        trace.push(state.alive_a_count as f64 / nf);
        trace_b.push(state.alive_b_count as f64 / nf);
        if killed == 0 {
            break;
        }
    }
    let noi = trace.len() - 1;
    assert!(noi <= n / 2 + 2, "cascade ran {noi} rounds on {n} nodes");
    let final_alive: Vec<u32> = (0..n as u32).filter(|&u| state.alive_a.is_alive(u)).collect();
    let p_infinity = final_alive.len() as f64 / nf;
    debug_assert_eq!(p_infinity, *trace.last().unwrap());
    check_terminal_consistency(state, &mut scratch, dependent);
    CascadeResult {
        p_infinity,
        noi,
        trace,
        trace_b,
        half_steps,
        final_alive,
    }
}

/// Termination postcondition: each layer's alive set is exactly its own giant
/// component, and coupled pairs are alive-consistent across layers.
fn check_terminal_consistency(
    state: &SystemState,
    scratch: &mut ComponentScratch,
    dependent: Option<&[bool]>,
) {
    let n = state.node_count();
    for (graph, alive) in [
        (&state.graph_a, &state.alive_a),
        (&state.graph_b, &state.alive_b),
    ] {
        let root = scratch.largest_component(graph, alive.as_slice());
        for u in 0..n as u32 {
            if alive.is_alive(u) {
                let (r, _) = root.expect("alive node without any component");
                assert!(
                    scratch.in_component(u, r),
                    "alive node {u} outside the giant component at termination"
                );
            }
        }
    }
    for u in 0..n as u32 {
        if dependent.map_or(true, |dep| dep[u as usize]) {
            assert_eq!(
                state.alive_a.is_alive(u),
                state.alive_b.is_alive(state.map.target(u)),
                "coupled pair ({u}, {}) inconsistent at termination",
                state.map.target(u)
            );
        }
    }
}

/// CSV export: one row per round boundary.
pub fn write_trace_csv<W: Write>(result: &CascadeResult, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "iteration,alive_fraction_a,alive_fraction_b")?;
    for (i, (a, b)) in result.trace.iter().zip(&result.trace_b).enumerate() {
        writeln!(out, "{i},{a},{b}")?;
    }
    Ok(())
}
