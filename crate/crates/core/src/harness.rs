//! Monte-Carlo grid runner: repeated simulation, estimation, metric
//! collection, theory comparison, CSV/JSON output.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{alignment, cca_fit_from_moments, sample_moments, FitOptions};
use crate::limits::{limit_rho1, predicted_limits, theorem1_constants, LimitPrediction, Regime};
use crate::model::{PopulationModel, SpikedParams, StructuredSqrt};
use crate::sample::{generate_dataset, SeedRecord};

fn default_sigma2() -> f64 {
    1.0
}
fn default_k() -> usize {
    5
}
fn default_rank_tol() -> f64 {
    1e-10
}

/// Grid configuration, mirrored one-to-one by the TOML config file.
/// Unknown keys in the file are errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub alpha_values: Vec<f64>,
    pub rho: f64,
    pub theta_x: f64,
    pub theta_y: f64,
    #[serde(default = "default_sigma2")]
    pub sigma2_x: f64,
    #[serde(default = "default_sigma2")]
    pub tau2_x: f64,
    #[serde(default = "default_sigma2")]
    pub sigma2_y: f64,
    #[serde(default = "default_sigma2")]
    pub tau2_y: f64,
    pub reps: u32,
    /// Components reported per replication.
    #[serde(default = "default_k")]
    pub k: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub center: bool,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl GridConfig {
    /// The eight-cell grid of the reference simulation study:
    /// n in {20, 80}, d in {200, 500}, alpha in {0.2, 8}, rho = 0.7,
    /// theta = 0.75 pi, 100 repetitions, first five components.
    pub fn section5(master_seed: u64) -> Self {
        Self {
            n_values: vec![20, 80],
            d_values: vec![200, 500],
            alpha_values: vec![0.2, 8.0],
            rho: 0.7,
            theta_x: 0.75 * std::f64::consts::PI,
            theta_y: 0.75 * std::f64::consts::PI,
            sigma2_x: 1.0,
            tau2_x: 1.0,
            sigma2_y: 1.0,
            tau2_y: 1.0,
            reps: 100,
            k: 5,
            master_seed,
            center: false,
            rank_tol: 1e-10,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.d_values.is_empty() || self.alpha_values.is_empty() {
            return Err(Error::Config("parameter lists must be nonempty".into()));
        }
        if self.reps < 1 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.alpha_values.iter().any(|&a| a == 1.0) {
            return Err(Error::Config(
                "alpha = 1 is the open boundary case and is not supported".into(),
            ));
        }
        for &n in &self.n_values {
            if n < 2 {
                return Err(Error::Config("sample sizes must be >= 2".into()));
            }
            if self.k > n {
                return Err(Error::Config(format!(
                    "k = {} exceeds the sample size n = {n}",
                    self.k
                )));
            }
        }
        // Validate one parameter set per (d, alpha) combination.
        for &d in &self.d_values {
            for &alpha in &self.alpha_values {
                self.params(d, alpha).validate()?;
            }
        }
        Ok(())
    }

    fn params(&self, d: usize, alpha: f64) -> SpikedParams<f64> {
        SpikedParams {
            sigma2_x: self.sigma2_x,
            tau2_x: self.tau2_x,
            sigma2_y: self.sigma2_y,
            tau2_y: self.tau2_y,
            alpha,
            rho: self.rho,
            theta_x: self.theta_x,
            theta_y: self.theta_y,
            dim: d,
        }
    }
}

/// Loads a [`GridConfig`] from a TOML file.
pub fn load_grid_config(path: &Path) -> Result<GridConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: GridConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Per-component metrics of one replication.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComponentMetrics {
    pub rho_hat: f64,
    pub inner_x: f64,
    pub abs_inner_x: f64,
    pub angle_x_deg: f64,
    pub inner_y: f64,
    pub abs_inner_y: f64,
    pub angle_y_deg: f64,
}

/// Everything recorded for one replication of one grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct RepRecord {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub rho: f64,
    pub rep: u32,
    /// k entries on success, empty on failure.
    pub components: Vec<ComponentMetrics>,
    /// n * lambda_x1 / max(d^alpha, d).
    pub lambda_x1_scaled: f64,
    /// Second cross-covariance singular value over d.
    pub lambda_xy2_over_d: Option<f64>,
    /// First-coefficient limit evaluated on this draw's latent rows
    /// (only defined for rho > 0 and alpha > 1).
    pub oracle_rho1: Option<f64>,
    /// "ok" or an error tag; failed reps are recorded, not dropped.
    pub status: String,
}

impl RepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Immutable per-cell state shared by its replications.
pub struct CellContext {
    pub params: SpikedParams<f64>,
    pub model: PopulationModel<f64>,
    pub sqrt: StructuredSqrt<f64>,
    pub n: usize,
    pub cell_index: usize,
    pub cfg: GridConfig,
}

impl CellContext {
    pub fn new(cfg: &GridConfig, cell_index: usize, n: usize, d: usize, alpha: f64) -> Result<Self> {
        let params = cfg.params(d, alpha);
        let model = PopulationModel::build(params)?;
        let sqrt = StructuredSqrt::from_model(&model)?;
        Ok(Self {
            params,
            model,
            sqrt,
            n,
            cell_index,
            cfg: cfg.clone(),
        })
    }

    fn seed_for(&self, rep: u32) -> SeedRecord {
        let stream = self.cell_index as u64 * self.cfg.reps as u64 + rep as u64;
        SeedRecord::new(self.cfg.master_seed, stream)
    }
}

/// Runs one replication: sample, fit, align against the population
/// weights, evaluate the per-draw limit.
pub fn run_rep(ctx: &CellContext, rep: u32) -> RepRecord {
    let seed = ctx.seed_for(rep);
    let base = RepRecord {
        n: ctx.n,
        d: ctx.params.dim,
        alpha: ctx.params.alpha,
        rho: ctx.params.rho,
        rep,
        components: Vec::new(),
        lambda_x1_scaled: f64::NAN,
        lambda_xy2_over_d: None,
        oracle_rho1: None,
        status: String::new(),
    };

    let ds = generate_dataset(&ctx.model, &ctx.sqrt, ctx.n, seed);
    let moments = match sample_moments(&ds.x, &ds.y, ctx.cfg.center, ctx.cfg.rank_tol) {
        Ok(m) => m,
        Err(e) => {
            return RepRecord {
                status: format!("error:{e}"),
                ..base
            }
        }
    };
    let opts = FitOptions {
        center: ctx.cfg.center,
        rank_tol: ctx.cfg.rank_tol,
        components: Some(ctx.cfg.k),
        pad_components: true,
    };
    let est = match cca_fit_from_moments(&moments, &opts) {
        Ok(e) => e,
        Err(e) => {
            return RepRecord {
                status: format!("error:{e}"),
                ..base
            }
        }
    };

    let mut components = Vec::with_capacity(ctx.cfg.k);
    for i in 0..ctx.cfg.k {
        let ax = alignment(&est.psi_x_hat.column(i).into_owned(), &ctx.model.psi_x)
            .expect("estimate columns are unit vectors");
        let ay = alignment(&est.psi_y_hat.column(i).into_owned(), &ctx.model.psi_y)
            .expect("estimate columns are unit vectors");
        components.push(ComponentMetrics {
            rho_hat: est.rho_hat[i],
            inner_x: ax.inner,
            abs_inner_x: ax.abs_inner,
            angle_x_deg: ax.angle_deg,
            inner_y: ay.inner,
            abs_inner_y: ay.abs_inner,
            angle_y_deg: ay.angle_deg,
        });
    }

    let d = ctx.params.dim as f64;
    let scale = d.powf(ctx.params.alpha).max(d);
    let lambda_x1_scaled = ctx.n as f64 * moments.full_vals_x()[0] / scale;
    let cross = moments.cross_singular_values();
    let lambda_xy2_over_d = (cross.len() >= 2).then(|| cross[1] / d);
    let oracle_rho1 = if ctx.params.rho > 0.0 && ctx.params.alpha > 1.0 {
        theorem1_constants(ctx.params.sigma2_x, ctx.params.sigma2_y, ctx.params.rho)
            .and_then(|c| limit_rho1(&ds.z1, &ds.z2, &c))
            .ok()
    } else {
        None
    };

    RepRecord {
        components,
        lambda_x1_scaled,
        lambda_xy2_over_d,
        oracle_rho1,
        status: "ok".into(),
        ..base
    }
}

/// Mean / standard deviation / median of one metric over a cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricStats {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

impl MetricStats {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n > 0, "stats need at least one value");
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Self { mean, std, median }
    }
}

/// Observed statistics of one component next to its predicted limit.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentSummary {
    /// 1-based component index.
    pub component: usize,
    pub rho_hat: MetricStats,
    pub inner_x: MetricStats,
    pub abs_inner_x: MetricStats,
    pub angle_x_deg: MetricStats,
    pub inner_y: MetricStats,
    pub abs_inner_y: MetricStats,
    pub angle_y_deg: MetricStats,
    /// Predicted limit of rho_hat_i; absent for the first component above
    /// the boundary, whose limit is the draw-specific random quantity.
    pub predicted_rho: Option<f64>,
    pub predicted_abs_inner_x: f64,
    pub predicted_abs_inner_y: f64,
}

/// Per-cell summary with observed-vs-predicted columns.
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub rho: f64,
    pub center: bool,
    pub rank_tol: f64,
    pub reps: usize,
    pub failed: usize,
    pub regime: Regime,
    pub components: Vec<ComponentSummary>,
    pub lambda_x1_scaled: MetricStats,
    pub lambda_xy2_over_d: Option<MetricStats>,
    pub oracle_rho1: Option<MetricStats>,
    /// |rho_hat_1 - oracle| per rep, when the oracle is defined.
    pub oracle_abs_gap: Option<MetricStats>,
    pub predicted_lambda_xy_rest_over_d: f64,
}

/// Aggregates records into per-cell summaries with theory columns.
///
/// Cells are ordered by (n, d, alpha); failed reps are counted and
/// excluded from every statistic.
pub fn summarize(records: &[RepRecord], cfg: &GridConfig) -> Result<Vec<CellSummary>> {
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    for &n in &cfg.n_values {
        for &d in &cfg.d_values {
            for &alpha in &cfg.alpha_values {
                cells.push((n, d, alpha));
            }
        }
    }
    cells.sort_by(|a, b| {
        (a.0, a.1)
            .cmp(&(b.0, b.1))
            .then(a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
    });

    let mut out = Vec::with_capacity(cells.len());
    for (n, d, alpha) in cells {
        let cell_records: Vec<&RepRecord> = records
            .iter()
            .filter(|r| r.n == n && r.d == d && r.alpha == alpha)
            .collect();
        if cell_records.is_empty() {
            continue;
        }
        let ok: Vec<&RepRecord> = cell_records.iter().copied().filter(|r| r.is_ok()).collect();
        let failed = cell_records.len() - ok.len();
        if ok.is_empty() {
            return Err(Error::Config(format!(
                "cell (n={n}, d={d}, alpha={alpha}) has no successful replication"
            )));
        }

        let prediction: LimitPrediction<f64> = predicted_limits(&cfg.params(d, alpha), n)?;

        let mut components = Vec::with_capacity(cfg.k);
        for i in 0..cfg.k {
            let collect = |f: &dyn Fn(&ComponentMetrics) -> f64| -> Vec<f64> {
                ok.iter().map(|r| f(&r.components[i])).collect()
            };
            // Above the boundary the first coefficient converges to a
            // draw-specific random quantity, not a constant.
            let first_above = i == 0 && prediction.regime == Regime::AlphaAbove1;
            let predicted_rho = (!first_above).then_some(prediction.rho_rest);
            components.push(ComponentSummary {
                component: i + 1,
                rho_hat: MetricStats::from_values(&collect(&|c| c.rho_hat)),
                inner_x: MetricStats::from_values(&collect(&|c| c.inner_x)),
                abs_inner_x: MetricStats::from_values(&collect(&|c| c.abs_inner_x)),
                angle_x_deg: MetricStats::from_values(&collect(&|c| c.angle_x_deg)),
                inner_y: MetricStats::from_values(&collect(&|c| c.inner_y)),
                abs_inner_y: MetricStats::from_values(&collect(&|c| c.abs_inner_y)),
                angle_y_deg: MetricStats::from_values(&collect(&|c| c.angle_y_deg)),
                predicted_rho,
                predicted_abs_inner_x: if i == 0 {
                    prediction.abs_inner_x_first
                } else {
                    prediction.abs_inner_rest
                },
                predicted_abs_inner_y: if i == 0 {
                    prediction.abs_inner_y_first
                } else {
                    prediction.abs_inner_rest
                },
            });
        }

        let lam1: Vec<f64> = ok.iter().map(|r| r.lambda_x1_scaled).collect();
        let lam_xy: Vec<f64> = ok.iter().filter_map(|r| r.lambda_xy2_over_d).collect();
        let oracle: Vec<f64> = ok.iter().filter_map(|r| r.oracle_rho1).collect();
        let gaps: Vec<f64> = ok
            .iter()
            .filter_map(|r| {
                r.oracle_rho1
                    .map(|o| (r.components[0].rho_hat - o).abs())
            })
            .collect();

        out.push(CellSummary {
            n,
            d,
            alpha,
            rho: cfg.rho,
            center: cfg.center,
            rank_tol: cfg.rank_tol,
            reps: cell_records.len(),
            failed,
            regime: prediction.regime,
            components,
            lambda_x1_scaled: MetricStats::from_values(&lam1),
            lambda_xy2_over_d: (!lam_xy.is_empty()).then(|| MetricStats::from_values(&lam_xy)),
            oracle_rho1: (!oracle.is_empty()).then(|| MetricStats::from_values(&oracle)),
            oracle_abs_gap: (!gaps.is_empty()).then(|| MetricStats::from_values(&gaps)),
            predicted_lambda_xy_rest_over_d: prediction.lambda_xy_rest_over_d,
        });
    }
    Ok(out)
}

/// Result of a full grid run.
pub struct GridOutput {
    pub records: Vec<RepRecord>,
    pub summary: Vec<CellSummary>,
}

/// Runs every replication of every cell.
///
/// Replications execute in parallel on the current rayon pool; each one
/// derives its own random stream from (master_seed, cell, rep), so the
/// numeric output is identical for any thread count. Records come back
/// in deterministic (cell, rep) order.
pub fn run_grid(cfg: &GridConfig) -> Result<GridOutput> {
    cfg.validate()?;

    let mut contexts = Vec::new();
    let mut cell_index = 0;
    for &n in &cfg.n_values {
        for &d in &cfg.d_values {
            for &alpha in &cfg.alpha_values {
                contexts.push(CellContext::new(cfg, cell_index, n, d, alpha)?);
                cell_index += 1;
            }
        }
    }

    let jobs: Vec<(usize, u32)> = contexts
        .iter()
        .enumerate()
        .flat_map(|(ci, _)| (0..cfg.reps).map(move |rep| (ci, rep)))
        .collect();

    let records: Vec<RepRecord> = jobs
        .par_iter()
        .map(|&(ci, rep)| run_rep(&contexts[ci], rep))
        .collect();

    let summary = summarize(&records, cfg)?;
    Ok(GridOutput { records, summary })
}

/// Fixed column layout of the records CSV.
pub const RECORDS_HEADER: &str = "n,d,alpha,rho,rep,component,rho_hat,inner_x,abs_inner_x,angle_x_deg,inner_y,abs_inner_y,angle_y_deg,lambda_x1_scaled,lambda_xy2_over_d,oracle_rho1,status";

/// Writes one row per (replication, component); failed replications get a
/// single row with component 0 and empty metric fields.
pub fn write_records_csv(path: &Path, records: &[RepRecord]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{RECORDS_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for r in records {
        if !r.is_ok() {
            writeln!(
                file,
                "{},{},{},{},{},0,,,,,,,,,,,{}",
                r.n, r.d, r.alpha, r.rho, r.rep, r.status
            )?;
            continue;
        }
        for (i, c) in r.components.iter().enumerate() {
            writeln!(
                file,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.d,
                r.alpha,
                r.rho,
                r.rep,
                i + 1,
                c.rho_hat,
                c.inner_x,
                c.abs_inner_x,
                c.angle_x_deg,
                c.inner_y,
                c.abs_inner_y,
                c.angle_y_deg,
                r.lambda_x1_scaled,
                opt(r.lambda_xy2_over_d),
                opt(r.oracle_rho1),
                r.status
            )?;
        }
    }
    file.flush()?;
    Ok(())
}

pub fn write_summary_json(path: &Path, summary: &[CellSummary]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), summary)
        .map_err(|e| Error::Config(format!("summary serialization: {e}")))?;
    Ok(())
}

/// Runs the grid and writes `records.csv` and `summary.json` into `dir`.
/// Records are flushed before the summary is attempted.
pub fn run_grid_to_dir(cfg: &GridConfig, dir: &Path) -> Result<GridOutput> {
    let out = run_grid(cfg)?;
    std::fs::create_dir_all(dir)?;
    write_records_csv(&dir.join("records.csv"), &out.records)?;
    write_summary_json(&dir.join("summary.json"), &out.summary)?;
    Ok(out)
}
