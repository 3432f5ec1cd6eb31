//! Ensemble sweeps, critical-point location, transition-order
//! classification, and the steady-state fixed-point solver.
//!
//! Everything here is deterministic given the master seed: each realization
//! draws its seeds from (master, topology, map parameter, p, index), so
//! results are independent of sweep order and thread count.

use std::io::Write;
use std::sync::Arc;

use crate::cascade::{attack, run_cascade, AttackSpec, SystemState};
use crate::depmap::{
    block_local_map, identity_map, linear_map, linear_map_axis, rewire_map, DependencyMap,
};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::graphs::{
    generate_er, generate_sf, generate_square_lattice, generate_ws, giant_component, AliveMask,
    Graph, TopologyTag,
};
use crate::seed::{derive_seed, f64_bits};

/// Numeric knobs of the critical-point machinery. Values are frozen here so
/// every consumer (tests, CLI, reported CSV headers) agrees on them.
pub mod thresholds {
    /// A realization survives when its final giant fraction reaches
    /// max(SURVIVAL_COUNT / N, SURVIVAL_FLOOR). The floor dominates at all
    /// desk scales and sits just above the largest subcritical remnants a
    /// square lattice leaves behind (measured 0.003-0.005 at L = 316-400).
    pub const SURVIVAL_FLOOR: f64 = 0.005;
    pub const SURVIVAL_COUNT: f64 = 10.0;

    /// Conditional giant-fraction jump above which a transition counts as
    /// first-order. Measured jumps: ~0.006 for the continuous cases (q <=
    /// 0.15 lattice rewiring) versus >= 0.15 for the abrupt ones (q >= 0.2),
    /// so 0.1 splits the two regimes with a wide margin on both sides.
    pub const JUMP_THRESHOLD: f64 = 0.1;

    /// Fine-scan step and reported resolution of p_c.
    pub const TOL_P: f64 = 0.002;

    /// Bisection resolution of q_c.
    pub const TOL_Q: f64 = 0.01;

    /// Fraction of realizations that must survive before a grid point is
    /// treated as part of the living branch. 3/4 keeps single-seed flicker
    /// out of the order classification (survival fractions near the collapse
    /// hover anywhere in 0.1-0.6 when the remnant size sits at the survival
    /// floor).
    pub const SURVIVAL_MAJORITY: f64 = 0.75;

    /// Half-width, in fine-grid steps, of the centered difference used to
    /// locate the steepest rise of the mean giant fraction. One step (0.002)
    /// is noisier than the realization scatter at 30-50 realizations; three
    /// steps (0.006) centers the estimate to within the desk-scale
    /// finite-size window.
    pub const SLOPE_WINDOW_STEPS: usize = 3;

    /// Coarse bracketing step of the p scan.
    pub const COARSE_STEP: f64 = 0.02;

    /// Bounds of the coarse p scan; outside them the transition is treated
    /// as non-bracketed.
    pub const P_SCAN_MIN: f64 = 0.02;
    pub const P_SCAN_MAX: f64 = 0.98;
}

/// Survival threshold for one realization's final giant fraction.
pub fn eps_surv(n: usize) -> f64 {
    (thresholds::SURVIVAL_COUNT / n as f64).max(thresholds::SURVIVAL_FLOOR)
}

// ---------------------------------------------------------------------------
// Ensemble specification
// ---------------------------------------------------------------------------

/// Which single-layer topology an ensemble runs on. All variants target mean
/// degree 4 by default so results are comparable across families.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    Lattice { side: usize },
    ErdosRenyi { n: usize, mean_degree: f64 },
    WattsStrogatz { n: usize, mean_degree: usize, beta: f64 },
    ScaleFree { n: usize, exponent: f64, mean_degree: f64 },
}

impl TopologySpec {
    pub fn node_count(&self) -> usize {
        match *self {
            TopologySpec::Lattice { side } => side * side,
            TopologySpec::ErdosRenyi { n, .. } => n,
            TopologySpec::WattsStrogatz { n, .. } => n,
            TopologySpec::ScaleFree { n, .. } => n,
        }
    }

    pub fn tag(&self) -> TopologyTag {
        match self {
            TopologySpec::Lattice { .. } => TopologyTag::Lattice,
            TopologySpec::ErdosRenyi { .. } => TopologyTag::ErdosRenyi,
            TopologySpec::WattsStrogatz { .. } => TopologyTag::WattsStrogatz,
            TopologySpec::ScaleFree { .. } => TopologyTag::ScaleFree,
        }
    }

    /// The lattice is deterministic; the random families draw a fresh graph
    /// per realization.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, TopologySpec::Lattice { .. })
    }

    pub fn build(&self, seed: u64) -> Result<Graph> {
        match *self {
            TopologySpec::Lattice { side } => generate_square_lattice(side),
            TopologySpec::ErdosRenyi { n, mean_degree } => generate_er(n, mean_degree, seed),
            TopologySpec::WattsStrogatz {
                n,
                mean_degree,
                beta,
            } => generate_ws(n, mean_degree, beta, seed),
            TopologySpec::ScaleFree {
                n,
                exponent,
                mean_degree,
            } => generate_sf(n, exponent, mean_degree, seed),
        }
    }

    fn seed_parts(&self) -> Vec<u64> {
        match *self {
            TopologySpec::Lattice { side } => vec![1, side as u64],
            TopologySpec::ErdosRenyi { n, mean_degree } => vec![2, n as u64, f64_bits(mean_degree)],
            TopologySpec::WattsStrogatz {
                n,
                mean_degree,
                beta,
            } => vec![3, n as u64, mean_degree as u64, f64_bits(beta)],
            TopologySpec::ScaleFree {
                n,
                exponent,
                mean_degree,
            } => vec![4, n as u64, f64_bits(exponent), f64_bits(mean_degree)],
        }
    }
}

/// Which dependency-map family couples the layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapSpec {
    Identity,
    Rewired { q: f64 },
    BlockLocal { r: usize },
    Linear { r: usize },
    LinearAxis { r: usize },
}

impl MapSpec {
    /// Scalar recorded in the `q` CSV column: the rewiring probability for
    /// the rewired family, the block side / shift length for the spatial
    /// families, 0 for identity.
    pub fn parameter(&self) -> f64 {
        match *self {
            MapSpec::Identity => 0.0,
            MapSpec::Rewired { q } => q,
            MapSpec::BlockLocal { r } | MapSpec::Linear { r } | MapSpec::LinearAxis { r } => {
                r as f64
            }
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            MapSpec::Identity => "identity",
            MapSpec::Rewired { .. } => "rewired",
            MapSpec::BlockLocal { .. } => "block_local",
            MapSpec::Linear { .. } => "linear",
            MapSpec::LinearAxis { .. } => "linear_axis",
        }
    }

    pub fn build(&self, topology: &TopologySpec, seed: u64) -> Result<DependencyMap> {
        let n = topology.node_count();
        let side = match *topology {
            TopologySpec::Lattice { side } => Some(side),
            _ => None,
        };
        match *self {
            MapSpec::Identity => identity_map(n),
            MapSpec::Rewired { q } => {
                let base = identity_map(n)?;
                rewire_map(&base, q, seed)
            }
            MapSpec::BlockLocal { r } => {
                let side = side.ok_or_else(|| {
                    Error::InvalidParameter("block-local maps need a lattice topology".into())
                })?;
                block_local_map(side, r, seed)
            }
            MapSpec::Linear { r } => {
                let side = side.ok_or_else(|| {
                    Error::InvalidParameter("linear maps need a lattice topology".into())
                })?;
                linear_map(side, r)
            }
            MapSpec::LinearAxis { r } => {
                let side = side.ok_or_else(|| {
                    Error::InvalidParameter("linear maps need a lattice topology".into())
                })?;
                linear_map_axis(side, r)
            }
        }
    }

    fn seed_parts(&self) -> Vec<u64> {
        match *self {
            MapSpec::Identity => vec![10],
            MapSpec::Rewired { q } => vec![11, f64_bits(q)],
            MapSpec::BlockLocal { r } => vec![12, r as u64],
            MapSpec::Linear { r } => vec![13, r as u64],
            MapSpec::LinearAxis { r } => vec![14, r as u64],
        }
    }
}

/// A reproducible ensemble: topology family, coupling family, sample size.
#[derive(Debug, Clone)]
pub struct EnsembleCfg {
    pub topology: TopologySpec,
    pub map: MapSpec,
    pub realizations: usize,
    pub master_seed: u64,
    pub exec: ExecMode,
}

impl EnsembleCfg {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidParameter(
                "ensemble needs at least one realization".into(),
            ));
        }
        Ok(())
    }

    /// Base seed for realization `i` at surviving fraction `p`; graph, map
    /// and attack seeds branch off it.
    fn point_seed(&self, p: f64, i: usize) -> u64 {
        let mut parts = self.topology.seed_parts();
        parts.extend(self.map.seed_parts());
        parts.push(f64_bits(p));
        parts.push(i as u64);
        derive_seed(self.master_seed, &parts)
    }
}

// ---------------------------------------------------------------------------
// Point evaluation and p sweeps
// ---------------------------------------------------------------------------

/// Aggregated cascade outcomes at one surviving fraction.
#[derive(Debug, Clone)]
pub struct PointStats {
    pub p: f64,
    pub mean_pinf: f64,
    pub std_pinf: f64,
    pub mean_noi: f64,
    /// Fraction of realizations whose final giant reached [`eps_surv`].
    pub surv_frac: f64,
    /// Mean final giant fraction over surviving realizations (0 when none).
    pub cond_mean_pinf: f64,
    pub realizations: usize,
}

/// Run `cfg.realizations` independent cascades at surviving fraction `p`.
/// Quenched averaging: every realization draws a fresh graph (for random
/// topologies) and a fresh map.
pub fn eval_point(cfg: &EnsembleCfg, p: f64) -> Result<PointStats> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "surviving fraction must lie in [0, 1], got {p}"
        )));
    }
    let shared_graph = if cfg.topology.is_deterministic() {
        Some(Arc::new(cfg.topology.build(0)?))
    } else {
        None
    };
    let n = cfg.topology.node_count();
    let eps = eps_surv(n);
    let outcomes: Vec<Result<(f64, usize)>> = map_indexed(cfg.exec, cfg.realizations, |i| {
        let base = cfg.point_seed(p, i);
        let graph = match &shared_graph {
            Some(g) => Arc::clone(g),
            None => Arc::new(cfg.topology.build(derive_seed(base, &[1]))?),
        };
        let map = cfg.map.build(&cfg.topology, derive_seed(base, &[2]))?;
        let mut state = SystemState::new(graph, map)?;
        attack(&mut state, &AttackSpec::random(p, derive_seed(base, &[3])))?;
        let r = run_cascade(&mut state);
        Ok((r.p_infinity, r.noi))
    });
    let mut pinf = Vec::with_capacity(cfg.realizations);
    let mut noi_sum = 0usize;
    let mut surv = 0usize;
    let mut cond_sum = 0.0;
    for out in outcomes {
        let (pi, noi) = out?;
        if pi >= eps {
            surv += 1;
            cond_sum += pi;
        }
        noi_sum += noi;
        pinf.push(pi);
    }
    let rf = cfg.realizations as f64;
    let mean = pinf.iter().sum::<f64>() / rf;
    let var = if cfg.realizations > 1 {
        pinf.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (rf - 1.0)
    } else {
        0.0
    };
    Ok(PointStats {
        p,
        mean_pinf: mean,
        std_pinf: var.sqrt(),
        mean_noi: noi_sum as f64 / rf,
        surv_frac: surv as f64 / rf,
        cond_mean_pinf: if surv > 0 { cond_sum / surv as f64 } else { 0.0 },
        realizations: cfg.realizations,
    })
}

/// Mean giant fraction and NOI along an ordered p grid.
#[derive(Debug, Clone)]
pub struct PercolationCurve {
    pub topology: TopologyTag,
    pub map: MapSpec,
    pub samples: Vec<PointStats>,
    pub realizations: usize,
    pub n: usize,
}

impl PercolationCurve {
    /// Sanity of the finished curve: ordered grid, and mean giant fraction
    /// non-decreasing in p within two pooled standard errors.
    pub fn validate(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if w[1].p <= w[0].p {
                return Err(Error::InvalidParameter(format!(
                    "curve grid not ascending at p = {}",
                    w[1].p
                )));
            }
            let se0 = w[0].std_pinf / (w[0].realizations as f64).sqrt();
            let se1 = w[1].std_pinf / (w[1].realizations as f64).sqrt();
            let slack = 2.0 * (se0 * se0 + se1 * se1).sqrt();
            if w[1].mean_pinf < w[0].mean_pinf - slack {
                return Err(Error::InvalidParameter(format!(
                    "giant fraction decreases beyond noise between p = {} and p = {}",
                    w[0].p, w[1].p
                )));
            }
        }
        Ok(())
    }
}

/// Evaluate the cascade along `p_grid` (ascending, inside [0, 1]).
pub fn sweep_p(cfg: &EnsembleCfg, p_grid: &[f64]) -> Result<PercolationCurve> {
    cfg.validate()?;
    if p_grid.is_empty() {
        return Err(Error::InvalidParameter("empty p grid".into()));
    }
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("p grid must be ascending".into()));
    }
    let mut samples = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        samples.push(eval_point(cfg, p)?);
    }
    let curve = PercolationCurve {
        topology: cfg.topology.tag(),
        map: cfg.map,
        samples,
        realizations: cfg.realizations,
        n: cfg.topology.node_count(),
    };
    curve.validate()?;
    Ok(curve)
}

// ---------------------------------------------------------------------------
// Critical point and transition order
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionOrder {
    First,
    Second,
}

impl TransitionOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub p_c: f64,
    pub order: TransitionOrder,
    /// Giant-fraction discontinuity at the collapse: conditional mean over
    /// survivors where the ensemble first survives reliably, minus the
    /// unconditional mean one fine step below.
    pub jump_size: f64,
    /// Mean NOI at the fine-grid point nearest p_c.
    pub noi_at_pc: f64,
}

/// Locate the percolation transition.
///
/// Procedure: a coarse scan brackets the steepest rise of the mean giant
/// fraction; a fine scan at step `tol` around it (extended downward until the
/// ensemble is reliably dead, upward until reliably alive) then yields
///
/// * p_c: center of the steepest rise of mean giant fraction over a
///   +/-[`thresholds::SLOPE_WINDOW_STEPS`]-step window. The survival
///   threshold alone cannot place p_c on a square lattice at desk scale:
///   subcritical remnants already reach the 0.005 survival floor several
///   hundredths below the transition, while the slope center tracks it to
///   within the finite-size window for both transition orders.
/// * jump_size and order: let p_live be the smallest fine-grid p whose
///   survival fraction reaches [`thresholds::SURVIVAL_MAJORITY`]. A
///   continuous transition reaches p_live with a barely-extensive giant
///   (conditional mean near the survival floor), an abrupt one arrives on
///   the upper branch; jump_size = conditional mean at p_live minus the
///   unconditional mean one step below, first-order iff it exceeds
///   [`thresholds::JUMP_THRESHOLD`].
///
/// Errors with [`Error::NoTransition`] when the scan window does not bracket
/// a transition (alive at the bottom or dead at the top).
pub fn find_pc(cfg: &EnsembleCfg, tol: f64) -> Result<CriticalPoint> {
    cfg.validate()?;
    let n = cfg.topology.node_count();
    if tol < 1.0 / n as f64 {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} finer than 1/N = {}",
            1.0 / n as f64
        )));
    }

    // coarse bracketing with a reduced sample, same seed derivation
    let coarse_cfg = EnsembleCfg {
        realizations: (cfg.realizations / 5).max(4).min(cfg.realizations),
        ..cfg.clone()
    };
    let coarse_steps = ((thresholds::P_SCAN_MAX - thresholds::P_SCAN_MIN)
        / thresholds::COARSE_STEP)
        .round() as usize;
    let mut coarse = Vec::with_capacity(coarse_steps + 1);
    for k in 0..=coarse_steps {
        let p = thresholds::P_SCAN_MIN + k as f64 * thresholds::COARSE_STEP;
        coarse.push(eval_point(&coarse_cfg, p)?);
    }
    let bottom = coarse.first().unwrap();
    if bottom.surv_frac >= thresholds::SURVIVAL_MAJORITY {
        return Err(Error::NoTransition(format!(
            "system already survives at p = {} (survival fraction {})",
            bottom.p, bottom.surv_frac
        )));
    }
    let top = coarse.last().unwrap();
    if top.surv_frac < thresholds::SURVIVAL_MAJORITY {
        return Err(Error::NoTransition(format!(
            "system does not survive even at p = {} (survival fraction {})",
            top.p, top.surv_frac
        )));
    }
    let mut best_k = 0;
    let mut best_rise = f64::MIN;
    for k in 0..coarse.len() - 1 {
        let rise = coarse[k + 1].mean_pinf - coarse[k].mean_pinf;
        if rise > best_rise {
            best_rise = rise;
            best_k = k;
        }
    }
    let center = (coarse[best_k].p + coarse[best_k + 1].p) / 2.0;

    // fine grid on integer multiples of tol so p values are reproducible
    let idx_of = |p: f64| (p / tol).round() as i64;
    let p_of = |i: i64| i as f64 * tol;
    let margin = (thresholds::COARSE_STEP / tol).round() as i64
        + thresholds::SLOPE_WINDOW_STEPS as i64;
    let mut lo_idx = idx_of(center) - margin;
    let mut hi_idx = idx_of(center) + margin;
    let floor_idx = 1i64.max(idx_of(thresholds::P_SCAN_MIN));
    let ceil_idx = idx_of(0.999_f64.min(thresholds::P_SCAN_MAX + thresholds::COARSE_STEP));
    lo_idx = lo_idx.max(floor_idx);
    hi_idx = hi_idx.min(ceil_idx);

    let mut fine: std::collections::BTreeMap<i64, PointStats> = std::collections::BTreeMap::new();
    for i in lo_idx..=hi_idx {
        fine.insert(i, eval_point(cfg, p_of(i))?);
    }
    // extend down until two consecutive bottom points are reliably dead, so
    // the living branch cannot continue below the grid
    loop {
        let mut it = fine.values();
        let a = it.next().unwrap();
        let b = it.next().unwrap();
        let dead = a.surv_frac < 0.25 && b.surv_frac < 0.25;
        if dead || lo_idx <= floor_idx {
            break;
        }
        for _ in 0..5 {
            if lo_idx > floor_idx {
                lo_idx -= 1;
                fine.insert(lo_idx, eval_point(cfg, p_of(lo_idx))?);
            }
        }
    }
    // extend up until the ensemble survives reliably
    while fine.values().last().unwrap().surv_frac < thresholds::SURVIVAL_MAJORITY
        && hi_idx < ceil_idx
    {
        hi_idx += 1;
        fine.insert(hi_idx, eval_point(cfg, p_of(hi_idx))?);
    }

    let stats: Vec<&PointStats> = fine.values().collect();
    let w = thresholds::SLOPE_WINDOW_STEPS;
    if stats.len() < 2 * w + 1 {
        return Err(Error::InsufficientData(
            "fine scan window too small for slope estimation".into(),
        ));
    }
    let mut pc_idx = w;
    let mut best = f64::MIN;
    for k in w..stats.len() - w {
        let rise = stats[k + w].mean_pinf - stats[k - w].mean_pinf;
        if rise > best {
            best = rise;
            pc_idx = k;
        }
    }
    let p_c = stats[pc_idx].p;

    let live_idx = stats
        .iter()
        .position(|s| s.surv_frac >= thresholds::SURVIVAL_MAJORITY)
        .ok_or_else(|| {
            Error::NoTransition("no fine-grid point survives reliably".into())
        })?;
    let below = if live_idx > 0 {
        stats[live_idx - 1].mean_pinf
    } else {
        0.0
    };
    let jump_size = stats[live_idx].cond_mean_pinf - below;
    let order = if jump_size > thresholds::JUMP_THRESHOLD {
        TransitionOrder::First
    } else {
        TransitionOrder::Second
    };
    Ok(CriticalPoint {
        p_c,
        order,
        jump_size,
        noi_at_pc: stats[pc_idx].mean_noi,
    })
}

/// q_c estimate with its final bisection bracket.
#[derive(Debug, Clone)]
pub struct QcEstimate {
    pub value: f64,
    /// Largest probed q classified second-order.
    pub lower: f64,
    /// Smallest probed q classified first-order.
    pub upper: f64,
}

/// Boundary rewiring probability between second- and first-order transitions
/// for the given topology, by bisection of the [`find_pc`] classification.
pub fn find_qc(cfg: &EnsembleCfg, tol_q: f64) -> Result<QcEstimate> {
    let order_at = |q: f64| -> Result<TransitionOrder> {
        let cfg_q = EnsembleCfg {
            map: MapSpec::Rewired { q },
            ..cfg.clone()
        };
        Ok(find_pc(&cfg_q, thresholds::TOL_P)?.order)
    };
    if order_at(0.0)? != TransitionOrder::Second {
        return Err(Error::NoTransition(
            "identity coupling already classifies first-order; no boundary in (0, 1)".into(),
        ));
    }
    if order_at(1.0)? != TransitionOrder::First {
        return Err(Error::NoTransition(
            "random coupling still classifies second-order; no boundary in (0, 1)".into(),
        ));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > tol_q {
        let mid = (lo + hi) / 2.0;
        match order_at(mid)? {
            TransitionOrder::Second => lo = mid,
            TransitionOrder::First => hi = mid,
        }
    }
    Ok(QcEstimate {
        value: (lo + hi) / 2.0,
        lower: lo,
        upper: hi,
    })
}

/// NOI at the critical point for each q on the grid.
pub fn noi_vs_q(cfg: &EnsembleCfg, q_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let cfg_q = EnsembleCfg {
            map: MapSpec::Rewired { q },
            ..cfg.clone()
        };
        let cp = find_pc(&cfg_q, thresholds::TOL_P)?;
        out.push((q, cp.noi_at_pc));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Single-network giant-fraction table and the steady-state fixed point
// ---------------------------------------------------------------------------

/// Tabulated single-network giant fraction P(x): fraction of all N nodes in
/// the giant component when a uniformly random fraction x is retained.
#[derive(Debug, Clone)]
pub struct PinfTable {
    pub topology: TopologyTag,
    pub n: usize,
    xs: Vec<f64>,
    values: Vec<f64>,
}

impl PinfTable {
    pub fn grid(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.values)
    }

    /// Piecewise-linear interpolation, clamped at the grid ends.
    pub fn eval(&self, x: f64) -> f64 {
        let xs = &self.xs;
        if x <= xs[0] {
            return self.values[0];
        }
        if x >= *xs.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let k = xs.partition_point(|&g| g <= x) - 1;
        let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
        self.values[k] + t * (self.values[k + 1] - self.values[k])
    }
}

/// Average the single-network giant fraction over random node retention on
/// `x_grid`, then project onto the monotone cone (pool adjacent violators)
/// before storing: the true function is non-decreasing, the estimate is
/// noisy. Means below [`eps_surv`] are stored as zero: subcritical remnant
/// clusters are not a giant, and keeping their tail would hand the
/// steady-state solver a spurious near-zero fixed point at every p.
pub fn tabulate_pinf(
    topology: &TopologySpec,
    x_grid: &[f64],
    realizations: usize,
    master_seed: u64,
    exec: ExecMode,
) -> Result<PinfTable> {
    if x_grid.is_empty() {
        return Err(Error::InvalidParameter("empty x grid".into()));
    }
    if x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("x grid must be ascending".into()));
    }
    if x_grid.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::InvalidParameter("x grid must lie in [0, 1]".into()));
    }
    if realizations == 0 {
        return Err(Error::InvalidParameter(
            "table needs at least one realization".into(),
        ));
    }
    let shared_graph = if topology.is_deterministic() {
        Some(Arc::new(topology.build(0)?))
    } else {
        None
    };
    let n = topology.node_count();
    let mut values = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let sizes: Vec<Result<usize>> = map_indexed(exec, realizations, |i| {
            let mut parts = topology.seed_parts();
            parts.extend([90, f64_bits(x), i as u64]);
            let base = derive_seed(master_seed, &parts);
            let graph = match &shared_graph {
                Some(g) => Arc::clone(g),
                None => Arc::new(topology.build(derive_seed(base, &[1]))?),
            };
            let spec = AttackSpec::random(x, derive_seed(base, &[3]));
            let mut mask = AliveMask::all_alive(n);
            for u in spec.victims(n)? {
                mask.kill(u);
            }
            Ok(giant_component(&graph, &mask).len())
        });
        let mut total = 0usize;
        for s in sizes {
            total += s?;
        }
        let mean = total as f64 / (realizations * n) as f64;
        values.push(if mean < eps_surv(n) { 0.0 } else { mean });
    }
    isotonic_project(&mut values);
    Ok(PinfTable {
        topology: topology.tag(),
        n,
        xs: x_grid.to_vec(),
        values,
    })
}

/// Pool-adjacent-violators projection onto non-decreasing sequences
/// (least-squares, equal weights).
fn isotonic_project(values: &mut [f64]) {
    let n = values.len();
    let mut level: Vec<f64> = Vec::with_capacity(n);
    let mut count: Vec<usize> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = values[k];
        let mut c = 1usize;
        while let Some(&last) = level.last() {
            if last > v {
                let lc = *count.last().unwrap();
                v = (v * c as f64 + last * lc as f64) / (c + lc) as f64;
                c += lc;
                level.pop();
                count.pop();
            } else {
                break;
            }
        }
        level.push(v);
        count.push(c);
    }
    let mut k = 0;
    for (v, c) in level.into_iter().zip(count) {
        for _ in 0..c {
            values[k] = v;
            k += 1;
        }
    }
}

/// Which steady-state equation [`solve_fixed_point_with_form`] solves.
/// The displayed equation x = sqrt(p * P(x)) and the prose construction
/// "y = p * P(x) against y = x" disagree; the square-root form is the one
/// whose solution reproduces simulated critical points (the literal
/// intersection has no positive solution for p < 1 because P(x) <= x), so it
/// is the default and the literal construction stays available for
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixedPointForm {
    /// x^2 = p * P(x), i.e. x = p * P(x) / x.
    #[default]
    SquareRoot,
    /// x = p * P(x) taken literally.
    Graphical,
}

/// Largest non-negative fixed point under the default (square-root) form.
pub fn solve_fixed_point(p: f64, table: &PinfTable) -> f64 {
    solve_fixed_point_with_form(p, table, FixedPointForm::SquareRoot)
}

/// Scan the table downward for the largest intersection of the chosen
/// steady-state equation, solving exactly on each interpolated segment.
/// Returns 0 when no positive intersection exists (total collapse).
pub fn solve_fixed_point_with_form(p: f64, table: &PinfTable, form: FixedPointForm) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
    let (xs, vs) = table.grid();
    for k in (0..xs.len() - 1).rev() {
        if xs[k + 1] <= 0.0 {
            break;
        }
        if let Some(root) = candidate_in_segment(p, xs, vs, k, form) {
            // fixed points below 1e-6 are indistinguishable from collapse
            // and make the quotient form numerically meaningless
            if root < 1e-6 {
                continue;
            }
            let residual = match form {
                FixedPointForm::SquareRoot => (root - p * table.eval(root) / root).abs(),
                FixedPointForm::Graphical => (root - p * table.eval(root)).abs(),
            };
            assert!(
                residual <= 1e-8,
                "fixed point residual {residual} exceeds segment solver accuracy"
            );
            return root;
        }
    }
    0.0
}

/// Exact root of the steady-state equation on segment k of the
/// piecewise-linear table, if one lies inside the segment. The table piece is
/// P(x) = a + b x.
fn candidate_in_segment(
    p: f64,
    xs: &[f64],
    vs: &[f64],
    k: usize,
    form: FixedPointForm,
) -> Option<f64> {
    let (x0, x1) = (xs[k], xs[k + 1]);
    let b = (vs[k + 1] - vs[k]) / (x1 - x0);
    let a = vs[k] - b * x0;
    let root = match form {
        FixedPointForm::SquareRoot => {
            // x^2 - p b x - p a = 0, larger root
            let disc = p * b * p * b + 4.0 * p * a;
            if disc < 0.0 {
                return None;
            }
            (p * b + disc.sqrt()) / 2.0
        }
        FixedPointForm::Graphical => {
            let denom = 1.0 - p * b;
            if denom.abs() < 1e-12 {
                // the line runs along the diagonal: the whole segment is
                // fixed when the offset also vanishes
                return ((p * a).abs() < 1e-12).then_some(x1);
            }
            p * a / denom
        }
    };
    (x0 - 1e-12..=x1 + 1e-12).contains(&root).then_some(root)
}

/// Smallest p (to within `tol`) at which a positive fixed point exists under
/// the square-root form: the predicted critical point of the random-coupling
/// cascade.
pub fn predict_pc(table: &PinfTable, tol: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    if solve_fixed_point(1.0, table) <= 0.0 {
        return 1.0;
    }
    while hi - lo > tol {
        let mid = (lo + hi) / 2.0;
        if solve_fixed_point(mid, table) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / 2.0
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// `q,p,mean_pinf,std_pinf,mean_noi,realizations,N` rows; the q column
/// carries the map family's parameter (rewiring probability, or block side /
/// shift length).
pub fn write_curve_csv<W: Write>(curve: &PercolationCurve, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "q,p,mean_pinf,std_pinf,mean_noi,realizations,N")?;
    let q = curve.map.parameter();
    for s in &curve.samples {
        writeln!(
            out,
            "{q},{},{},{},{},{},{}",
            s.p, s.mean_pinf, s.std_pinf, s.mean_noi, s.realizations, curve.n
        )?;
    }
    Ok(())
}

/// `topology,q,p_c,order,jump,noi_at_pc` rows.
pub fn write_critical_csv<W: Write>(
    rows: &[(TopologyTag, f64, CriticalPoint)],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "topology,q,p_c,order,jump,noi_at_pc")?;
    for (topo, q, cp) in rows {
        writeln!(
            out,
            "{},{q},{},{},{},{}",
            topo.as_str(),
            cp.p_c,
            cp.order.as_str(),
            cp.jump_size,
            cp.noi_at_pc
        )?;
    }
    Ok(())
}
