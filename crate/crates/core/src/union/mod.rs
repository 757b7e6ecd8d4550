//! Union-of-subspaces fitting: given `F` and bounds `l`, `r`, minimize
//! `sum_f min_j d^2(f, V_j)` over `l` subspaces of dimension at most `r`.
//!
//! Each block of a fixed partition is solved exactly by
//! [`best_subspace`], so the global optimum is the minimum over partitions.
//! [`exhaustive_union`] enumerates those partitions; [`k_subspaces`]
//! alternates assignment and refitting from several seeded starts.

mod partitions;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approximation::{best_subspace, distance_sq, DataSet, Subspace};
use crate::error::{Error, Result};
use crate::fiber::FiberedModel;

pub use partitions::RestrictedGrowth;

/// Ordered list of subspaces sharing an ambient dimension, each of dimension
/// at most `rank_bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnionModel {
    subspaces: Vec<Subspace>,
    rank_bound: usize,
}

impl UnionModel {
    pub fn new(subspaces: Vec<Subspace>, rank_bound: usize) -> Result<Self> {
        let Some(first) = subspaces.first() else {
            return Err(Error::invalid("union model needs at least one subspace"));
        };
        let d = first.ambient_dim();
        for s in &subspaces {
            if s.ambient_dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.ambient_dim(),
                });
            }
            if s.dim() > rank_bound {
                return Err(Error::invalid(format!(
                    "subspace of dimension {} exceeds rank bound {rank_bound}",
                    s.dim()
                )));
            }
        }
        Ok(UnionModel {
            subspaces,
            rank_bound,
        })
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn count(&self) -> usize {
        self.subspaces.len()
    }

    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    pub fn ambient_dim(&self) -> usize {
        self.subspaces[0].ambient_dim()
    }
}

/// Maps each data index to a subspace index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub assignment: Vec<usize>,
}

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Self {
        Partition { assignment }
    }

    /// Index lists per block, `blocks` of them.
    pub fn blocks(&self, blocks: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); blocks];
        for (i, b) in self.assignment.iter().enumerate() {
            out[*b].push(i);
        }
        out
    }
}

/// Tunables for [`k_subspaces`] and [`exhaustive_union`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Relative stopping threshold, scaled by `1 + sum ||f||^2`.
    pub tol_improve: f64,
    pub exhaustive_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 20,
            max_iters: 200,
            seed: 0,
            tol_improve: 1e-10,
            exhaustive_limit: 12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.tol_improve >= 0.0 && self.tol_improve.is_finite()) {
            return Err(Error::invalid("tol_improve must be finite and non-negative"));
        }
        if self.exhaustive_limit == 0 {
            return Err(Error::invalid("exhaustive_limit must be at least 1"));
        }
        Ok(())
    }
}

/// A fitted model of either kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Union(UnionModel),
    Invariant(FiberedModel),
}

impl Model {
    /// Least-squares cost of `data` against the model.
    pub fn cost(&self, data: &DataSet) -> Result<f64> {
        match self {
            Model::Union(m) => cost_union(data, m),
            Model::Invariant(m) => m.cost(data),
        }
    }
}

/// Outcome of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub cost: f64,
    pub model: Model,
    pub partition: Partition,
    pub iterations: usize,
    pub restarts_used: usize,
    pub seed: u64,
    pub converged: bool,
    /// Per-iteration costs; the last entry equals `cost`.
    pub trace: Vec<f64>,
    pub warnings: Vec<String>,
}

fn check_model(data: &DataSet, model: &UnionModel) -> Result<()> {
    if model.ambient_dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.ambient_dim(),
            found: data.dim(),
        });
    }
    Ok(())
}

/// Index of the nearest subspace and the squared distance to it; the lowest
/// index wins ties.
fn nearest(f: &[crate::C64], model: &UnionModel) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, s) in model.subspaces.iter().enumerate() {
        let d2 = distance_sq(f, s).expect("dimensions checked by caller");
        if d2 < best.1 {
            best = (j, d2);
        }
    }
    best
}

/// `sum_f min_j d^2(f, V_j)`.
pub fn cost_union(data: &DataSet, model: &UnionModel) -> Result<f64> {
    check_model(data, model)?;
    Ok(data.vectors().iter().map(|f| nearest(f, model).1).sum())
}

/// Nearest-subspace assignment, ties to the lowest index.
pub fn assign(data: &DataSet, model: &UnionModel) -> Result<Partition> {
    check_model(data, model)?;
    Ok(Partition::new(
        data.vectors().iter().map(|f| nearest(f, model).0).collect(),
    ))
}

/// Fits each block of `partition` with [`best_subspace`]; empty blocks get the
/// zero subspace. The model has `count` subspaces.
pub fn fit_partition(
    data: &DataSet,
    partition: &Partition,
    count: usize,
    rank: usize,
) -> Result<UnionModel> {
    if partition.assignment.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            found: partition.assignment.len(),
        });
    }
    if count == 0 {
        return Err(Error::invalid("subspace count must be at least 1"));
    }
    if let Some(bad) = partition.assignment.iter().find(|b| **b >= count) {
        return Err(Error::invalid(format!(
            "assignment value {bad} out of range for {count} subspaces"
        )));
    }
    let subspaces = partition
        .blocks(count)
        .iter()
        .map(|idx| match data.select(idx) {
            Some(block) => best_subspace(&block, rank).map(|(v, _)| v),
            None => Ok(Subspace::zero(data.dim())),
        })
        .collect::<Result<Vec<_>>>()?;
    UnionModel::new(subspaces, rank)
}

fn check_bounds(data: &DataSet, count: usize, rank: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::invalid("subspace count must be at least 1"));
    }
    if rank > data.dim() {
        return Err(Error::invalid(format!(
            "rank {rank} exceeds ambient dimension {}",
            data.dim()
        )));
    }
    Ok(())
}

/// Global optimum by enumerating every partition of the data into at most
/// `count` blocks. Block costs are memoized per subset, so the work is
/// dominated by at most `2^m` SVDs.
pub fn exhaustive_union(
    data: &DataSet,
    count: usize,
    rank: usize,
    limit: usize,
) -> Result<FitReport> {
    check_bounds(data, count, rank)?;
    let m = data.len();
    if m > limit {
        return Err(Error::TooLarge { points: m, limit });
    }
    if count > m {
        return Err(Error::invalid(format!(
            "subspace count {count} exceeds number of points {m}"
        )));
    }
    if m >= usize::BITS as usize {
        return Err(Error::TooLarge { points: m, limit: usize::BITS as usize - 1 });
    }

    let mut memo = vec![f64::NAN; 1usize << m];
    let mut block_cost = |mask: usize| -> Result<f64> {
        if mask == 0 {
            return Ok(0.0);
        }
        if memo[mask].is_nan() {
            let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let block = data.select(&idx).expect("non-empty mask");
            memo[mask] = best_subspace(&block, rank)?.1;
        }
        Ok(memo[mask])
    };

    let mut best_cost = f64::INFINITY;
    let mut best_assignment = vec![0; m];
    let mut masks = vec![0usize; count];
    let mut rgs = RestrictedGrowth::new(m, count);
    let mut visited = 0usize;
    while let Some(a) = rgs.next_partition() {
        visited += 1;
        masks.iter_mut().for_each(|x| *x = 0);
        for (i, b) in a.iter().enumerate() {
            masks[*b] |= 1 << i;
        }
        let mut total = 0.0;
        for mask in &masks {
            total += block_cost(*mask)?;
        }
        if total < best_cost {
            best_cost = total;
            best_assignment.copy_from_slice(a);
        }
    }

    let partition = Partition::new(best_assignment);
    let model = fit_partition(data, &partition, count, rank)?;
    Ok(FitReport {
        cost: best_cost,
        model: Model::Union(model),
        partition,
        iterations: visited,
        restarts_used: 0,
        seed: 0,
        converged: true,
        trace: vec![best_cost],
        warnings: Vec::new(),
    })
}

struct RunOutcome {
    cost: f64,
    model: UnionModel,
    partition: Partition,
    trace: Vec<f64>,
    converged: bool,
    unrepaired: bool,
}

/// Moves worst-fit points into empty blocks. A donor block keeps at least one
/// point. Returns `false` when some block stays empty.
fn repair_empty(partition: &mut Partition, residuals: &[f64], count: usize) -> bool {
    let mut sizes = vec![0usize; count];
    for b in &partition.assignment {
        sizes[*b] += 1;
    }
    let mut moved = vec![false; residuals.len()];
    for j in 0..count {
        if sizes[j] > 0 {
            continue;
        }
        let donor = (0..residuals.len())
            .filter(|i| !moved[*i] && sizes[partition.assignment[*i]] > 1)
            .fold(None::<usize>, |acc, i| match acc {
                Some(k) if residuals[k] >= residuals[i] => Some(k),
                _ => Some(i),
            });
        let Some(i) = donor else {
            return false;
        };
        sizes[partition.assignment[i]] -= 1;
        partition.assignment[i] = j;
        sizes[j] += 1;
        moved[i] = true;
    }
    true
}

fn residuals(data: &DataSet, model: &UnionModel, partition: &Partition) -> Vec<f64> {
    data.vectors()
        .iter()
        .zip(&partition.assignment)
        .map(|(f, b)| distance_sq(f, &model.subspaces[*b]).expect("dimensions checked"))
        .collect()
}

/// Greedy seeding: the largest vector first, then repeatedly the point
/// farthest from the lines already chosen. The initial partition is the
/// nearest-line assignment.
fn farthest_point_partition(data: &DataSet, count: usize, rank: usize) -> Result<Partition> {
    let d = data.dim();
    let mut seeds: Vec<Subspace> = Vec::with_capacity(count);
    let first = (0..data.len())
        .max_by(|a, b| {
            let na = crate::linalg::norm_sq(data.vector(*a));
            let nb = crate::linalg::norm_sq(data.vector(*b));
            na.total_cmp(&nb).then(b.cmp(a))
        })
        .expect("non-empty data");
    let line = |i: usize| -> Result<Subspace> {
        if rank == 0 {
            Ok(Subspace::zero(d))
        } else {
            Subspace::span(d, &[data.vector(i).to_vec()])
        }
    };
    seeds.push(line(first)?);
    while seeds.len() < count {
        let model = UnionModel::new(seeds.clone(), rank.max(1))?;
        let far = (0..data.len())
            .map(|i| (i, nearest(data.vector(i), &model).1))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        seeds.push(line(far.0)?);
    }
    let model = UnionModel::new(seeds, rank.max(1))?;
    assign(data, &model)
}

fn run_restart(
    data: &DataSet,
    count: usize,
    rank: usize,
    cfg: &SolverConfig,
    index: usize,
) -> Result<RunOutcome> {
    let mut partition = if index == 0 {
        farthest_point_partition(data, count, rank)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
        Partition::new((0..data.len()).map(|_| rng.random_range(0..count)).collect())
    };
    let tol = cfg.tol_improve * (1.0 + data.energy());

    let mut model = fit_partition(data, &partition, count, rank)?;
    let mut unrepaired = false;
    let res = residuals(data, &model, &partition);
    if !repair_empty(&mut partition, &res, count) {
        unrepaired = true;
    }
    model = fit_partition(data, &partition, count, rank)?;
    let mut cost = cost_union(data, &model)?;
    let mut trace = vec![cost];
    let mut converged = false;

    for _ in 1..cfg.max_iters {
        let mut next = assign(data, &model)?;
        let res = residuals(data, &model, &next);
        if !repair_empty(&mut next, &res, count) {
            unrepaired = true;
        }
        let next_model = fit_partition(data, &next, count, rank)?;
        let next_cost = cost_union(data, &next_model)?;
        if next_cost > cost {
            // rounding-level increase: keep the previous model
            converged = true;
            break;
        }
        let improvement = cost - next_cost;
        trace.push(next_cost);
        model = next_model;
        cost = next_cost;
        let unchanged = next == partition;
        partition = next;
        if improvement < tol || unchanged {
            converged = true;
            break;
        }
    }
    let partition = assign(data, &model)?;
    Ok(RunOutcome {
        cost,
        model,
        partition,
        trace,
        converged,
        unrepaired,
    })
}

/// K-subspaces: alternate nearest-subspace assignment and per-block
/// [`best_subspace`] refits from `cfg.restarts` starts, keeping the cheapest.
/// Start 0 uses farthest-point seeding; start `i > 0` draws a uniform random
/// assignment from a generator seeded with `cfg.seed + i`. Empty blocks are
/// reseeded with the worst-fit point. Restarts run in parallel; ties go to the
/// lowest start index.
pub fn k_subspaces(
    data: &DataSet,
    count: usize,
    rank: usize,
    cfg: &SolverConfig,
) -> Result<FitReport> {
    check_bounds(data, count, rank)?;
    cfg.validate()?;
    let runs: Vec<RunOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| run_restart(data, count, rank, cfg, i))
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    if runs.iter().any(|r| r.unrepaired) {
        warnings.push(format!(
            "fewer points than subspaces: some of the {count} subspaces stay empty"
        ));
    }
    let not_converged = runs.iter().filter(|r| !r.converged).count();
    if not_converged > 0 {
        warnings.push(format!(
            "{not_converged} restart(s) stopped at max_iters = {}",
            cfg.max_iters
        ));
    }
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("at least one restart");
    Ok(FitReport {
        cost: best.cost,
        model: Model::Union(best.model),
        partition: best.partition,
        iterations: best.trace.len(),
        restarts_used: cfg.restarts,
        seed: cfg.seed,
        converged: best.converged,
        trace: best.trace,
        warnings,
    })
}
