//! Trial execution.

use std::time::Instant;

use gfid_core::dst::{build_system, ObservationSet, SystemVariant};
use gfid_core::filters::{apply_filter, generate_input, InputKind};
use gfid_core::graph::generate_graph;
use gfid_core::noise::{corrupt, NoiseSpec};
use gfid_core::recover_ls::{alignment_error, solve_nullspace};
use gfid_core::sparse::{build_weights, certificate, pinned_error, solve_l1_equality, SparseProblem};
use gfid_core::spectral::eigendecompose;
use gfid_core::Error;
use nalgebra::DVector;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Method, Process, ScenarioConfig, Setting};
use crate::constrained::constrained_variants;

/// Instances redrawn at most this many times when `require_rank` is set.
pub const MAX_REDRAWS: u64 = 100;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial. Depends only on its position, never on scheduling.
pub fn child_seed(master: u64, cell: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ cell as u64) ^ trial as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub setting: String,
    pub k: Option<usize>,
    pub sigma: f64,
    pub trial: usize,
    pub seed: u64,
    pub error: Option<f64>,
    pub success: bool,
    /// `σ_min/σ_second` for least squares, `ξ` for ℓ1 methods, or the
    /// failure message of a trial that did not finish.
    pub diag: String,
    pub wall_ms: u64,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.error.is_none()
    }

    pub fn diag_value(&self) -> Option<f64> {
        self.diag.parse().ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub full_scale: bool,
    pub serial: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Cell<'a> {
    pub index: usize,
    pub setting: &'a Setting,
    pub k: Option<usize>,
    pub sigma: f64,
}

/// Cells in output order: settings, then bandwidths, then noise levels.
pub fn cells(cfg: &ScenarioConfig) -> Vec<Cell<'_>> {
    let mut out = Vec::with_capacity(cfg.n_cells());
    for setting in &cfg.settings {
        for k in cfg.k_values() {
            for &sigma in &cfg.sigma {
                out.push(Cell { index: out.len(), setting, k, sigma });
            }
        }
    }
    out
}

pub fn trials_for(cfg: &ScenarioConfig, opts: &RunOptions) -> usize {
    opts.trials.unwrap_or(if opts.full_scale { cfg.full_scale_trials.unwrap_or(cfg.trials) } else { cfg.trials })
}

pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Vec<ResultRow> {
    let master = opts.seed.unwrap_or(cfg.seed);
    let trials = trials_for(cfg, opts);
    let jobs: Vec<(Cell, usize)> = cells(cfg).into_iter().flat_map(|c| (0..trials).map(move |t| (c, t))).collect();
    let run = |&(cell, trial): &(Cell, usize)| run_trial(cfg, cell, trial, child_seed(master, cell.index, trial));
    if opts.serial {
        jobs.iter().map(run).collect()
    } else {
        jobs.par_iter().map(run).collect()
    }
}

pub fn run_trial(cfg: &ScenarioConfig, cell: Cell, trial: usize, seed: u64) -> ResultRow {
    let start = Instant::now();
    let mut used = seed;
    let mut result = Err(Error::InvalidParams("no draw attempted".into()));
    for attempt in 0..MAX_REDRAWS {
        used = if attempt == 0 { seed } else { splitmix64(seed ^ attempt) };
        result = simulate(cfg, cell, used);
        if !matches!(result, Ok(Outcome::Redraw)) {
            break;
        }
    }
    let wall_ms = if cfg.record_wall_time { start.elapsed().as_millis() as u64 } else { 0 };
    let (error, success, diag) = match result {
        Ok(Outcome::Done { error, diag }) => {
            (Some(error), error < cfg.threshold, diag.map(|d| d.to_string()).unwrap_or_default())
        }
        Ok(Outcome::Redraw) => (None, false, format!("failed: rank condition unmet after {MAX_REDRAWS} draws")),
        Err(e) => (None, false, format!("failed: {e}")),
    };
    ResultRow {
        setting: cell.setting.label.clone(),
        k: cell.k,
        sigma: cell.sigma,
        trial,
        seed: used,
        error,
        success,
        diag,
        wall_ms,
    }
}

enum Outcome {
    Done {
        error: f64,
        diag: Option<f64>,
    },
    /// The instance misses a required condition; draw another.
    Redraw,
}

type PaddedFn = Box<dyn Fn(&[usize]) -> gfid_core::Result<DVector<f64>>>;

struct Instance {
    obs: ObservationSet,
    known: SystemVariant,
    /// Coefficients matching `known`.
    truth: DVector<f64>,
    /// Coefficients of the overshoot system for the given orders.
    padded: PaddedFn,
    overshoot: fn(Vec<usize>) -> SystemVariant,
}

fn simulate(cfg: &ScenarioConfig, cell: Cell, seed: u64) -> gfid_core::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let setting = cell.setting;
    let basis = eigendecompose(&generate_graph(cfg.graph_for(setting), &mut rng)?)?;
    let inst = match cfg.process {
        Process::Multi => {
            let bank = setting.filters.generate_bank(&mut rng)?;
            let outputs = draw_outputs(bank.filters(), cell, &basis, &mut rng)?;
            Instance {
                obs: ObservationSet::new(outputs, &basis)?,
                known: SystemVariant::MultiKnown { orders: bank.orders() },
                truth: bank.stacked(),
                padded: Box::new(move |q| bank.padded(q)),
                overshoot: |orders| SystemVariant::MultiOvershoot { orders },
            }
        }
        Process::Single => {
            let inc = setting.filters.generate_increments(&mut rng)?;
            let outputs = draw_outputs(inc.to_filter_bank().filters(), cell, &basis, &mut rng)?;
            Instance {
                obs: ObservationSet::new(outputs, &basis)?,
                known: SystemVariant::SingleKnown { orders: inc.orders().to_vec() },
                truth: DVector::from_column_slice(inc.d()),
                padded: Box::new(move |q| inc.padded(q)),
                overshoot: |orders| SystemVariant::SingleOvershoot { orders },
            }
        }
    };

    match &setting.method {
        Method::Ls => {
            let sys = build_system(&inst.obs, &basis, &inst.known)?;
            let res = solve_nullspace(&sys)?;
            let error = alignment_error(&res.estimate, &inst.truth)?;
            Ok(Outcome::Done { error, diag: Some(res.gap_ratio()) })
        }
        Method::L1Eq { overshoot, weights, delta, pin, require_rank }
        | Method::L1Ball { overshoot, weights, delta, pin, require_rank, .. } => {
            let sys = build_system(&inst.obs, &basis, &(inst.overshoot)(overshoot.clone()))?;
            let truth = (inst.padded)(overshoot)?;
            let w = build_weights(weights, overshoot)?;
            let problem = SparseProblem::from_system(&sys, &w, *pin)?.with_truth(&truth)?;
            let cert = certificate(&problem, *delta).ok();
            if *require_rank && !cert.as_ref().is_some_and(|c| c.rank_ok) {
                return Ok(Outcome::Redraw);
            }
            let sol = match &setting.method {
                Method::L1Ball { constraint, .. } => {
                    let eps = problem.oracle_epsilon()?;
                    constrained_variants(&problem.with_epsilon(eps)?, overshoot, *constraint)?
                }
                _ => solve_l1_equality(&problem)?,
            };
            let error = pinned_error(&sol.full, &truth, *pin)?;
            Ok(Outcome::Done { error, diag: cert.map(|c| c.xi) })
        }
    }
}

fn draw_outputs(
    filters: &[gfid_core::filters::GraphFilter],
    cell: Cell,
    basis: &gfid_core::spectral::SpectralBasis,
    rng: &mut ChaCha8Rng,
) -> gfid_core::Result<Vec<DVector<f64>>> {
    let kind = match cell.k {
        Some(k) => InputKind::Bandlimited { k },
        None => InputKind::FullNormal,
    };
    let (x, _) = generate_input(kind, basis, rng)?;
    let clean = filters.iter().map(|f| apply_filter(f, basis, &x)).collect::<gfid_core::Result<Vec<_>>>()?;
    corrupt(&clean, NoiseSpec::new(cell.sigma)?, rng)
}
