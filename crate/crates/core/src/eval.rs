//! Experiment harness: delay-combination selection from measured data,
//! model-versus-simulator accuracy tables, asymmetry sweeps and the
//! link-count rule.

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::metrics::{self, avg_delay_asymmetry, MetricsError};
use crate::model::{run_model, ModelError};
use crate::scenario::{units, DelayDataset, LinkDelays, ModelConfig, PathSet, Scenario};
use crate::sim::{run_sim, SimOptions};

pub const DEFAULT_COMBINATION_COUNT: usize = 36;
pub const DEFAULT_COMBINATION_CAP: u64 = 10_000_000;

/// Per-link bandwidths of the accuracy experiment, Mbps. Link `m` of an
/// m-link run uses the first `m` entries.
pub const DEFAULT_BANDWIDTHS_MBPS: [f64; 8] = [35.9, 18.4, 33.3, 14.7, 14.8, 4.4, 22.5, 12.5];

/// Accuracies reported for the same experiment against NS3, by link count.
/// Shown next to our own numbers; never asserted against.
pub const NS3_REFERENCE_ACCURACY: [(usize, f64); 7] = [
    (2, 0.8968),
    (3, 0.8314),
    (4, 0.7926),
    (5, 0.7599),
    (6, 0.7324),
    (7, 0.7106),
    (8, 0.6950),
];
pub const NS3_REFERENCE_MEAN: f64 = 0.7741;

pub fn ns3_reference(m: usize) -> Option<f64> {
    NS3_REFERENCE_ACCURACY
        .iter()
        .find(|(k, _)| *k == m)
        .map(|(_, a)| *a)
}

pub fn default_bandwidths_bps() -> Vec<f64> {
    DEFAULT_BANDWIDTHS_MBPS
        .iter()
        .map(|&b| units::mbps_to_bps(b))
        .collect()
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("requested {requested} links but the dataset has {available}")]
    NotEnoughLinks { requested: usize, available: usize },
    #[error("requested {requested} links but only {available} bandwidths are given")]
    NotEnoughBandwidths { requested: usize, available: usize },
    #[error("link count must be at least 1")]
    ZeroLinks,
    #[error("invalid range for {axis}: {reason}")]
    Range { axis: &'static str, reason: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One per-link delay assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    /// Rank in the ascending asymmetry ordering of the ranked set.
    pub id: usize,
    pub delays_s: Vec<f64>,
    pub asymmetry_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComboSelection {
    /// Product of the per-link sample counts.
    pub population: u128,
    /// Size of the set actually ranked; smaller than `population` when
    /// subsampling kicked in.
    pub ranked: usize,
    pub subsampled: bool,
    /// Ascending by asymmetry.
    pub selected: Vec<Combination>,
}

/// Evenly spaced ranks over `n` sorted items; first and last always
/// included. A single pick takes the middle rank.
pub fn evenly_spaced_ranks(n: usize, count: usize) -> Vec<usize> {
    if n == 0 || count == 0 {
        return Vec::new();
    }
    if count >= n {
        return (0..n).collect();
    }
    if count == 1 {
        return vec![((n - 1) as f64 / 2.0).round() as usize];
    }
    (0..count)
        .map(|k| ((k * (n - 1)) as f64 / (count - 1) as f64).round() as usize)
        .collect()
}

/// `k` values taken at evenly spaced quantiles of the sorted samples.
fn quantile_subsample(values: &[f64], k: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    evenly_spaced_ranks(sorted.len(), k)
        .into_iter()
        .map(|r| sorted[r])
        .collect()
}

/// Ranks all delay combinations of the first `m` dataset links by
/// average delay asymmetry and picks `count` of them at evenly spaced
/// ranks.
///
/// When the number of combinations exceeds `cap`, each link's samples are
/// first thinned to evenly spaced quantiles (the same number per link) so
/// that the product fits under the cap. Every part of each link's
/// distribution stays represented.
pub fn select_combinations(
    dataset: &DelayDataset,
    m: usize,
    count: usize,
    cap: u64,
) -> Result<ComboSelection, EvalError> {
    if m == 0 {
        return Err(EvalError::ZeroLinks);
    }
    if m > dataset.link_count() {
        return Err(EvalError::NotEnoughLinks {
            requested: m,
            available: dataset.link_count(),
        });
    }
    let links: &[LinkDelays] = &dataset.links()[..m];
    let population: u128 = links.iter().map(|l| l.delays_s.len() as u128).product();
    let cap = cap.max(1);

    let (lists, subsampled): (Vec<Vec<f64>>, bool) = if population <= u128::from(cap) {
        (links.iter().map(|l| l.delays_s.clone()).collect(), false)
    } else {
        let mut k = (cap as f64).powf(1.0 / m as f64).ceil().max(1.0) as usize;
        while k > 1 && (k as u128).pow(m as u32) > u128::from(cap) {
            k -= 1;
        }
        let lists: Vec<Vec<f64>> = links
            .iter()
            .map(|l| quantile_subsample(&l.delays_s, k))
            .collect();
        let ranked: u128 = lists.iter().map(|l| l.len() as u128).product();
        log::warn!(
            "{population} delay combinations for {m} links exceed the cap of {cap}; \
             ranking {ranked} after per-link quantile thinning"
        );
        (lists, true)
    };

    let sizes: Vec<usize> = lists.iter().map(Vec::len).collect();
    let ranked: usize = sizes.iter().product();
    // Mixed-radix decoding of a linear index, first link most significant.
    let decode = |mut idx: usize, buf: &mut Vec<f64>| {
        buf.clear();
        buf.resize(m, 0.0);
        for l in (0..m).rev() {
            buf[l] = lists[l][idx % sizes[l]];
            idx /= sizes[l];
        }
    };
    let mut order: Vec<(f64, usize)> = (0..ranked)
        .into_par_iter()
        .map_init(Vec::new, |buf, idx| {
            decode(idx, buf);
            (avg_delay_asymmetry(buf), idx)
        })
        .collect();
    order.par_sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let selected = evenly_spaced_ranks(ranked, count)
        .into_iter()
        .map(|r| {
            let mut delays_s = Vec::with_capacity(m);
            decode(order[r].1, &mut delays_s);
            Combination {
                id: r,
                delays_s,
                asymmetry_s: order[r].0,
            }
        })
        .collect();
    Ok(ComboSelection {
        population,
        ranked,
        subsampled,
        selected,
    })
}

/// A dataset of `links` links whose samples are evenly spaced over
/// `[lo_s, hi_s]`. Link `l` is shifted by `l/links` of a step so no two
/// links share the same sample values; the last link's top sample lands
/// just below `hi_s`.
pub fn spread_delay_dataset(
    links: usize,
    samples_per_link: usize,
    lo_s: f64,
    hi_s: f64,
) -> DelayDataset {
    let samples = samples_per_link.max(1);
    let step = if samples > 1 {
        (hi_s - lo_s) / samples as f64
    } else {
        0.0
    };
    let links = (0..links)
        .map(|l| LinkDelays {
            label: format!("L{}", l + 1),
            delays_s: (0..samples)
                .map(|k| lo_s + (k as f64 + l as f64 / links as f64) * step)
                .collect(),
        })
        .collect();
    DelayDataset::new(links).expect("spread dataset has positive samples")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCell {
    pub combo_id: usize,
    pub asymmetry_s: f64,
    pub t_sim_bps: f64,
    pub t_model_bps: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub combo_id: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub m: usize,
    pub cells: Vec<AccuracyCell>,
    pub failures: Vec<CellFailure>,
}

impl AccuracyRow {
    pub fn mean_accuracy(&self) -> Option<f64> {
        if self.cells.is_empty() {
            return None;
        }
        Some(self.cells.iter().map(|c| c.accuracy).sum::<f64>() / self.cells.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccuracyTable {
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyTable {
    pub const CSV_HEADER: &'static str = "m,combo_id,asym_s,T_sim_bps,T_model_bps,accuracy";

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.cells.is_empty())
    }

    pub fn cell_count(&self) -> usize {
        self.rows.iter().map(|r| r.cells.len()).sum()
    }

    /// Mean of the per-row means, over rows with at least one cell.
    pub fn grand_mean(&self) -> Option<f64> {
        let means: Vec<f64> = self.rows.iter().filter_map(|r| r.mean_accuracy()).collect();
        if means.is_empty() {
            None
        } else {
            Some(means.iter().sum::<f64>() / means.len() as f64)
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for row in &self.rows {
            for c in &row.cells {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    row.m, c.combo_id, c.asymmetry_s, c.t_sim_bps, c.t_model_bps, c.accuracy
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyOptions {
    pub count: usize,
    pub cap: u64,
    pub sim: SimOptions,
}

impl Default for AccuracyOptions {
    fn default() -> Self {
        Self {
            count: DEFAULT_COMBINATION_COUNT,
            cap: DEFAULT_COMBINATION_CAP,
            sim: SimOptions::default(),
        }
    }
}

fn evaluate_cell(
    combo: &Combination,
    bandwidths_bps: &[f64],
    config: &ModelConfig,
    sim: SimOptions,
) -> Result<AccuracyCell, String> {
    let paths = PathSet::from_vectors(bandwidths_bps, &combo.delays_s);
    let scenario = Scenario::new(paths, config.clone(), format!("combo-{}", combo.id));
    let model = run_model(&scenario).map_err(|e| format!("model: {e}"))?;
    let simr = run_sim(&scenario, sim).map_err(|e| format!("sim: {e}"))?;
    let t_model = model.throughput_bps();
    let accuracy = metrics::prediction_accuracy(simr.throughput_bps, t_model)
        .map_err(|e| format!("accuracy: {e}"))?;
    Ok(AccuracyCell {
        combo_id: combo.id,
        asymmetry_s: combo.asymmetry_s,
        t_sim_bps: simr.throughput_bps,
        t_model_bps: t_model,
        accuracy,
    })
}

/// Runs the model and the simulator on every selected delay combination
/// for each link count and tabulates prediction accuracy. Link `m` of a
/// scenario takes the first `m` bandwidths. Cells whose model or
/// simulator run fails are recorded and skipped.
pub fn accuracy_experiment(
    dataset: &DelayDataset,
    bandwidths_bps: &[f64],
    link_counts: &[usize],
    config: &ModelConfig,
    opts: &AccuracyOptions,
) -> Result<AccuracyTable, EvalError> {
    let mut rows = Vec::with_capacity(link_counts.len());
    for &m in link_counts {
        if m > bandwidths_bps.len() {
            return Err(EvalError::NotEnoughBandwidths {
                requested: m,
                available: bandwidths_bps.len(),
            });
        }
        let selection = select_combinations(dataset, m, opts.count, opts.cap)?;
        let bws = &bandwidths_bps[..m];
        let results: Vec<Result<AccuracyCell, CellFailure>> = selection
            .selected
            .par_iter()
            .map(|c| {
                evaluate_cell(c, bws, config, opts.sim).map_err(|message| CellFailure {
                    combo_id: c.id,
                    message,
                })
            })
            .collect();
        let mut row = AccuracyRow {
            m,
            cells: Vec::new(),
            failures: Vec::new(),
        };
        for r in results {
            match r {
                Ok(c) => row.cells.push(c),
                Err(f) => {
                    log::warn!("m={m} combo {}: {}", f.combo_id, f.message);
                    row.failures.push(f)
                }
            }
        }
        rows.push(row);
    }
    Ok(AccuracyTable { rows })
}

/// A closed range sampled at `steps` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Self {
        Self { lo, hi, steps }
    }

    pub fn point(v: f64) -> Self {
        Self::new(v, v, 1)
    }

    pub fn check(&self, axis: &'static str) -> Result<(), EvalError> {
        let bad = |reason: String| Err(EvalError::Range { axis, reason });
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo < 0.0 {
            return bad(format!(
                "bounds must be finite and non-negative ({}..{})",
                self.lo, self.hi
            ));
        }
        if self.lo > self.hi {
            return bad(format!(
                "lower bound {} exceeds upper bound {}",
                self.lo, self.hi
            ));
        }
        if self.steps == 0 {
            return bad("needs at least one step".into());
        }
        if self.steps == 1 && self.lo != self.hi {
            return bad("a single step needs equal bounds".into());
        }
        if self.steps > 1 && self.lo == self.hi {
            return bad("equal bounds allow only one step".into());
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.lo];
        }
        let span = self.hi - self.lo;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + span * k as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

/// Model throughput over link count × minimum delay × delay asymmetry ×
/// bandwidth asymmetry. Single-link cells ignore both asymmetries.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub link_counts: Vec<usize>,
    pub d_mins_s: Vec<f64>,
    pub delay_asyms_s: Vec<f64>,
    pub bw_asyms_bps: Vec<f64>,
    pub b_min_bps: f64,
    throughput_bps: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub m: usize,
    pub d_min_s: f64,
    pub delay_asym_s: f64,
    pub bw_asym_bps: f64,
    pub throughput_bps: f64,
}

impl SweepGrid {
    pub const SURFACE_CSV_HEADER: &'static str = "m,delay_asym_s,bw_asym_s,throughput_bps";
    pub const LINES_CSV_HEADER: &'static str = "m,d_min_s,delay_asym_s,throughput_bps";

    fn index(&self, mi: usize, di: usize, ai: usize, bi: usize) -> usize {
        ((mi * self.d_mins_s.len() + di) * self.delay_asyms_s.len() + ai) * self.bw_asyms_bps.len()
            + bi
    }

    pub fn len(&self) -> usize {
        self.throughput_bps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.throughput_bps.is_empty()
    }

    /// Throughput at axis indices.
    pub fn at(&self, m_idx: usize, d_min_idx: usize, delay_idx: usize, bw_idx: usize) -> f64 {
        self.throughput_bps[self.index(m_idx, d_min_idx, delay_idx, bw_idx)]
    }

    pub fn link_index_of(&self, m: usize) -> Option<usize> {
        self.link_counts.iter().position(|&k| k == m)
    }

    pub fn d_min_index_of(&self, d_min_s: f64) -> Option<usize> {
        self.d_mins_s
            .iter()
            .position(|&d| (d - d_min_s).abs() <= 1e-12 * d_min_s.abs().max(1.0))
    }

    /// Throughput along the delay-asymmetry axis.
    pub fn line(&self, m: usize, d_min_s: f64, bw_idx: usize) -> Option<Vec<f64>> {
        let mi = self.link_index_of(m)?;
        let di = self.d_min_index_of(d_min_s)?;
        Some(
            (0..self.delay_asyms_s.len())
                .map(|ai| self.at(mi, di, ai, bw_idx))
                .collect(),
        )
    }

    pub fn cells(&self) -> impl Iterator<Item = SweepCell> + '_ {
        let nd = self.d_mins_s.len();
        let na = self.delay_asyms_s.len();
        let nb = self.bw_asyms_bps.len();
        (0..self.link_counts.len()).flat_map(move |mi| {
            (0..nd).flat_map(move |di| {
                (0..na).flat_map(move |ai| {
                    (0..nb).map(move |bi| SweepCell {
                        m: self.link_counts[mi],
                        d_min_s: self.d_mins_s[di],
                        delay_asym_s: self.delay_asyms_s[ai],
                        bw_asym_bps: self.bw_asyms_bps[bi],
                        throughput_bps: self.at(mi, di, ai, bi),
                    })
                })
            })
        })
    }

    /// Surface layout; the bandwidth-asymmetry column is in bits/s.
    pub fn write_surface_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::SURFACE_CSV_HEADER)?;
        for c in self.cells() {
            writeln!(
                out,
                "{},{},{},{}",
                c.m, c.delay_asym_s, c.bw_asym_bps, c.throughput_bps
            )?;
        }
        Ok(())
    }

    pub fn write_lines_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::LINES_CSV_HEADER)?;
        for c in self.cells() {
            writeln!(
                out,
                "{},{},{},{}",
                c.m, c.d_min_s, c.delay_asym_s, c.throughput_bps
            )?;
        }
        Ok(())
    }

    /// Where the `m`-link curve first drops to the `baseline_m` curve at
    /// the given minimum delay (first bandwidth-asymmetry column).
    pub fn crossover(&self, m: usize, baseline_m: usize, d_min_s: f64) -> Option<Crossover> {
        let curve = self.line(m, d_min_s, 0)?;
        let base = self.line(baseline_m, d_min_s, 0)?;
        Some(crossover_threshold(&self.delay_asyms_s, &curve, &base))
    }
}

/// Link parameters for one sweep cell. A single link takes the minimum
/// delay and bandwidth regardless of the requested asymmetry.
pub fn synth_paths(
    m: usize,
    d_min_s: f64,
    delay_asym_s: f64,
    b_min_bps: f64,
    bw_asym_bps: f64,
) -> Result<PathSet, EvalError> {
    if m == 0 {
        return Err(EvalError::ZeroLinks);
    }
    let (da, ba) = if m == 1 {
        (0.0, 0.0)
    } else {
        (delay_asym_s, bw_asym_bps)
    };
    let d = metrics::synth_delays(m, d_min_s, da)?;
    let b = metrics::synth_bandwidths(m, b_min_bps, ba)?;
    Ok(PathSet::from_vectors(&b, &d))
}

pub fn model_throughput(paths: PathSet, config: &ModelConfig) -> Result<f64, EvalError> {
    let scenario = Scenario::new(paths, config.clone(), "sweep");
    Ok(run_model(&scenario)?.throughput_bps())
}

fn build_grid(
    link_counts: &[usize],
    d_mins_s: Vec<f64>,
    delay_asyms_s: Vec<f64>,
    bw_asyms_bps: Vec<f64>,
    b_min_bps: f64,
    config: &ModelConfig,
) -> Result<SweepGrid, EvalError> {
    if link_counts.is_empty() || link_counts.contains(&0) {
        return Err(EvalError::ZeroLinks);
    }
    let coords: Vec<(usize, f64, f64, f64)> = link_counts
        .iter()
        .flat_map(|&m| {
            let (d, a, b) = (&d_mins_s, &delay_asyms_s, &bw_asyms_bps);
            d.iter().flat_map(move |&dm| {
                a.iter()
                    .flat_map(move |&da| b.iter().map(move |&ba| (m, dm, da, ba)))
            })
        })
        .collect();
    let throughput_bps = coords
        .par_iter()
        .map(|&(m, dm, da, ba)| model_throughput(synth_paths(m, dm, da, b_min_bps, ba)?, config))
        .collect::<Result<Vec<f64>, EvalError>>()?;
    Ok(SweepGrid {
        link_counts: link_counts.to_vec(),
        d_mins_s,
        delay_asyms_s,
        bw_asyms_bps,
        b_min_bps,
        throughput_bps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    pub link_counts: Vec<usize>,
    pub d_min_s: f64,
    pub b_min_bps: f64,
    pub delay_asym_s: Axis,
    pub bw_asym_bps: Axis,
    pub config: ModelConfig,
}

impl Default for SurfaceSpec {
    /// Links 1..4, 5 ms and 100 kbps minima, 0–35 ms by 0–700 kbps.
    fn default() -> Self {
        Self {
            link_counts: vec![1, 2, 3, 4],
            d_min_s: 0.005,
            b_min_bps: 100e3,
            delay_asym_s: Axis::new(0.0, 0.035, 8),
            bw_asym_bps: Axis::new(0.0, 700e3, 8),
            config: ModelConfig::default(),
        }
    }
}

pub fn sweep_surface(spec: &SurfaceSpec) -> Result<SweepGrid, EvalError> {
    spec.delay_asym_s.check("delay asymmetry")?;
    spec.bw_asym_bps.check("bandwidth asymmetry")?;
    check_positive("minimum delay", spec.d_min_s)?;
    check_positive("minimum bandwidth", spec.b_min_bps)?;
    build_grid(
        &spec.link_counts,
        vec![spec.d_min_s],
        spec.delay_asym_s.values(),
        spec.bw_asym_bps.values(),
        spec.b_min_bps,
        &spec.config,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinesSpec {
    pub link_counts: Vec<usize>,
    pub d_mins_s: Vec<f64>,
    pub delay_asym_s: Axis,
    pub bandwidth_bps: f64,
    pub config: ModelConfig,
}

impl Default for LinesSpec {
    /// Links 1..4, minimum delays 5/20/35/50 ms, asymmetry 10–90 ms in
    /// 5 ms steps, 100 kbps per link.
    fn default() -> Self {
        Self {
            link_counts: vec![1, 2, 3, 4],
            d_mins_s: vec![0.005, 0.020, 0.035, 0.050],
            delay_asym_s: Axis::new(0.010, 0.090, 17),
            bandwidth_bps: 100e3,
            config: ModelConfig::default(),
        }
    }
}

pub fn sweep_lines(spec: &LinesSpec) -> Result<SweepGrid, EvalError> {
    spec.delay_asym_s.check("delay asymmetry")?;
    check_positive("bandwidth", spec.bandwidth_bps)?;
    if spec.d_mins_s.is_empty() {
        return Err(EvalError::Range {
            axis: "minimum delay",
            reason: "no values given".into(),
        });
    }
    for &d in &spec.d_mins_s {
        check_positive("minimum delay", d)?;
    }
    build_grid(
        &spec.link_counts,
        spec.d_mins_s.clone(),
        spec.delay_asym_s.values(),
        vec![0.0],
        spec.bandwidth_bps,
        &spec.config,
    )
}

fn check_positive(axis: &'static str, v: f64) -> Result<(), EvalError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(EvalError::Range {
            axis,
            reason: format!("must be positive (got {v})"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossover {
    At(f64),
    NoCrossover,
}

impl Crossover {
    pub fn value(self) -> Option<f64> {
        match self {
            Crossover::At(x) => Some(x),
            Crossover::NoCrossover => None,
        }
    }
}

/// Smallest `x` at which `curve` falls to or below `baseline`, linearly
/// interpolated between the bracketing samples.
pub fn crossover_threshold(xs: &[f64], curve: &[f64], baseline: &[f64]) -> Crossover {
    let n = xs.len().min(curve.len()).min(baseline.len());
    let gap = |i: usize| curve[i] - baseline[i];
    for i in 0..n {
        let g = gap(i);
        if g <= 0.0 {
            if i == 0 {
                return Crossover::At(xs[0]);
            }
            let g0 = gap(i - 1);
            let t = g0 / (g0 - g);
            return Crossover::At(xs[i - 1] + t * (xs[i] - xs[i - 1]));
        }
    }
    Crossover::NoCrossover
}

/// Link count in `1..=max_links` with the highest model throughput when
/// delays are spread from `d_min_s` with the given average asymmetry.
/// Ties go to fewer links.
pub fn optimal_link_count(
    d_min_s: f64,
    target_asym_s: f64,
    bandwidth_bps: f64,
    max_links: usize,
    config: &ModelConfig,
) -> Result<usize, EvalError> {
    if max_links == 0 {
        return Err(EvalError::ZeroLinks);
    }
    let mut best = (1, f64::NEG_INFINITY);
    for m in 1..=max_links {
        let t = model_throughput(
            synth_paths(m, d_min_s, target_asym_s, bandwidth_bps, 0.0)?,
            config,
        )?;
        if t > best.1 {
            best = (m, t);
        }
    }
    Ok(best.0)
}
