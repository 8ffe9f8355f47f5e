use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{variant_seed, Design, ExperimentConfig, ExperimentId, ExperimentResult};
use crate::error::Result;
use crate::eval::Metric;
use crate::output::{write_atomic, write_json};

#[derive(Debug, Clone, Serialize)]
pub struct TaskProvenance {
    pub variant: String,
    pub seed: u64,
    pub stream_id: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: ExperimentId,
    pub design: Design,
    pub config: ExperimentConfig,
    pub crate_version: &'static str,
    pub tasks: Vec<TaskProvenance>,
}

pub fn manifest(cfg: &ExperimentConfig, result: &ExperimentResult) -> Manifest {
    let mut tasks = Vec::new();
    for &seed in &cfg.seeds {
        for v in &result.variants {
            tasks.push(TaskProvenance {
                variant: v.def.label.clone(),
                seed,
                stream_id: variant_seed(seed, &v.def.label).stream_id,
            });
        }
    }
    Manifest {
        experiment: cfg.experiment,
        design: cfg.experiment.design(),
        config: cfg.clone(),
        crate_version: env!("CARGO_PKG_VERSION"),
        tasks,
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per seed × variant × method × learner.
pub fn rows_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "seed",
        "variant",
        "ir_target",
        "sep_target",
        "clusters",
        "n_total",
        "ir",
        "separability",
        "n_minority",
        "cluster_estimate",
        "method",
        "learner",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let primary = result.metric.name().to_lowercase();
    header.push(format!("base_{primary}"));
    header.push(format!("score_{primary}"));
    for m in Metric::ALL {
        let name = m.name().to_lowercase();
        header.push(format!("delta_{name}"));
        header.push(format!("rel_{name}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in &result.rows {
        let mut rec = vec![
            r.seed.to_string(),
            r.def.label.clone(),
            opt(r.def.ir_target),
            opt(r.def.sep_target),
            opt(r.def.clusters),
            opt(r.def.n_total),
            r.profile.ir.to_string(),
            r.profile.separability.to_string(),
            r.profile.n_minority.to_string(),
            r.profile.cluster_estimate.to_string(),
            r.method.to_string(),
            r.learner.to_string(),
            opt(r.base.get(&result.metric)),
            opt(r.score.get(&result.metric)),
        ];
        for m in Metric::ALL {
            match (r.base.get(&m), r.score.get(&m)) {
                (Some(&b), Some(&o)) => {
                    rec.push((o - b).to_string());
                    rec.push(opt(crate::eval::relative_improvement(b, o)));
                }
                _ => rec.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Parse(e.to_string())
}

/// Writes `rows.csv`, `headline.json` and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, result: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join("rows.csv"), rows_csv(result)?.as_bytes())?;
    write_json(&dir.join("headline.json"), result)?;
    write_json(&dir.join("manifest.json"), &manifest(cfg, result))
}
