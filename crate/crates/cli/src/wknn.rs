use serde::Serialize;
use tbf_core::baseline::{eval_localization, wknn_locate, Bucket, FingerprintDatabase};
use tbf_core::export::{database_from_loaded, read_dataset};
use tbf_core::scene::{build_dataset, build_records, build_scene, plan_queries, Point, Scene};

use crate::data::scene_for;
use crate::output::{num, report, write_csv};
use crate::{CliConfig, CliError, CliResult, EvalArgs, GlobalArgs};

/// Query features and true positions.
pub struct QuerySet {
    pub ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub truths: Vec<Point>,
}

impl QuerySet {
    fn from_db(db: &FingerprintDatabase, ids: Vec<String>) -> Self {
        Self {
            ids,
            features: db.entries.iter().map(|e| e.features.clone()).collect(),
            truths: db.entries.iter().map(|e| e.position).collect(),
        }
    }
}

/// Random test UTs of the configured area at `snr_db`.
pub fn generated_queries(cfg: &CliConfig, scene: &Scene, snr_db: Option<f64>) -> CliResult<QuerySet> {
    let plan = plan_queries(scene, &cfg.dataset, cfg.wknn.n_queries)?;
    let ds = tbf_core::scene::DatasetConfig { snr_db, ..cfg.dataset.clone() };
    let recs = build_records(scene, &plan, &ds, &cfg.geometry, &cfg.ofdm)?;
    Ok(QuerySet {
        ids: recs.iter().map(|r| r.id.clone()).collect(),
        features: recs.iter().map(|r| r.inputs.x_ad.iter().copied().collect()).collect(),
        truths: recs.iter().map(|r| r.position).collect(),
    })
}

pub fn locate_all(cfg: &CliConfig, db: &FingerprintDatabase, q: &QuerySet) -> CliResult<Vec<Point>> {
    q.features.iter().map(|f| Ok(wknn_locate(db, f, cfg.wknn.k, cfg.wknn.weighting)?)).collect()
}

#[derive(Serialize)]
struct SnrPoint {
    snr_db: f64,
    mean_error_m: f64,
}

#[derive(Serialize)]
struct EvalSummary {
    k: usize,
    db_records: usize,
    queries: usize,
    query_snr_db: Option<f64>,
    mean_error_m: f64,
    median_error_m: f64,
    range_buckets: Vec<Bucket>,
    snr_sweep: Vec<SnrPoint>,
}

pub fn eval(cfg: &CliConfig, g: &GlobalArgs, a: &EvalArgs) -> CliResult {
    let (scene, db) = match &a.db {
        Some(dir) => {
            let (m, loaded) = read_dataset(dir)?;
            (scene_for(&m, cfg)?, database_from_loaded(&loaded))
        }
        None => {
            let scene = build_scene(&cfg.scene)?;
            let recs = build_dataset(&scene, &cfg.dataset, &cfg.geometry, &cfg.ofdm)?;
            let db = FingerprintDatabase::from_records(&recs)?;
            (scene, db)
        }
    };
    if db.is_empty() {
        return Err(CliError::Invalid("fingerprint database is empty".into()));
    }
    let queries = match &a.queries {
        Some(dir) => {
            let (_, loaded) = read_dataset(dir)?;
            let ids = loaded.iter().map(|r| r.record.id.clone()).collect();
            QuerySet::from_db(&database_from_loaded(&loaded), ids)
        }
        None => generated_queries(cfg, &scene, cfg.wknn.query_snr_db)?,
    };
    let est = locate_all(cfg, &db, &queries)?;
    let rep = eval_localization(&est, &queries.truths, scene.bs_position)?;

    let mut snr_sweep = Vec::new();
    if a.queries.is_none() {
        for &snr in &cfg.wknn.snr_sweep_db {
            let q = generated_queries(cfg, &scene, Some(snr))?;
            let e = locate_all(cfg, &db, &q)?;
            snr_sweep.push(SnrPoint { snr_db: snr, mean_error_m: eval_localization(&e, &q.truths, scene.bs_position)?.mean_error });
        }
    }

    if let Some(dir) = crate::output::out_dir(g)? {
        write_csv(&dir.join("cdf.csv"), &["error_m", "cdf"], rep.cdf_points.iter().map(|&(e, p)| vec![num(e), num(p)]))?;
        let rows = queries.ids.iter().zip(&queries.truths).zip(est.iter().zip(&rep.errors)).map(|((id, t), (e, err))| {
            vec![id.clone(), num(t[0]), num(t[1]), num(t[2]), num(e[0]), num(e[1]), num(e[2]), num(*err)]
        });
        write_csv(&dir.join("errors.csv"), &["id", "x_m", "y_m", "z_m", "est_x_m", "est_y_m", "est_z_m", "error_m"], rows)?;
        let rows = rep.range_buckets.iter().map(|b| vec![b.label(), b.count.to_string(), b.mean_error.map_or(String::new(), num)]);
        write_csv(&dir.join("range_table.csv"), &["distance_m", "count", "wknn"], rows)?;
        if !snr_sweep.is_empty() {
            let mut header = vec!["snr_db".to_string()];
            header.extend(snr_sweep.iter().map(|p| num(p.snr_db)));
            let mut row = vec!["wknn".to_string()];
            row.extend(snr_sweep.iter().map(|p| num(p.mean_error_m)));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            write_csv(&dir.join("snr_sweep.csv"), &header, [row])?;
        }
    }

    let mut sorted = rep.errors.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let summary = EvalSummary {
        k: cfg.wknn.k,
        db_records: db.len(),
        queries: n,
        query_snr_db: if a.queries.is_some() { None } else { cfg.wknn.query_snr_db },
        mean_error_m: rep.mean_error,
        median_error_m: median,
        range_buckets: rep.range_buckets,
        snr_sweep,
    };
    report(g, "wknn_eval.json", &summary)
}
