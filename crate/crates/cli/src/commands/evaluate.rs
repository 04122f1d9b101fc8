//! `evaluate`: apply every method in the model file to the test split and
//! report stratified metrics, bootstrap summaries, AUC (single detectors),
//! and the load-estimate error tables.

use std::collections::BTreeMap;

use serde::Serialize;

use loadseg::ensemble::apply_ensemble;
use loadseg::evaluate::{
    bootstrap, category_auc_points, confusion_by_category, metrics_from_confusions,
    BootstrapCategory, CategoryMetrics, Confusion, MeanStd, OBJECTIVE_BETA,
};
use loadseg::loadest::{estimate_errors, load_estimate, EstimateErrorTable, FilterMask};
use loadseg::model::{point_classes, DifferenceSeries, LengthCategory, PointClass};
use loadseg::modelfile::{MethodModel, ModelFile};
use loadseg::pipeline::{apply_single, score_detector};
use loadseg::PredictionSeries;

use crate::config::RunConfig;
use crate::util::{
    atomic_write, load_stations, partition_by_split, preprocess_all, CliError, CliResult,
};

#[derive(Serialize)]
struct CategoryReport {
    #[serde(flatten)]
    metrics: CategoryMetrics,
    auc: Option<f64>,
    bootstrap: Option<BootstrapCategory>,
}

#[derive(Serialize)]
struct LoadErrorsReport {
    filtered: EstimateErrorTable,
    unfiltered: EstimateErrorTable,
    /// Test stations skipped because a filter removed every point.
    fully_filtered_stations: Vec<String>,
}

#[derive(Serialize)]
struct MethodReport {
    average_f: f64,
    average_f_bootstrap: MeanStd,
    per_category: [Option<CategoryReport>; 4],
    load_errors: LoadErrorsReport,
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    bootstrap_iterations: u64,
    beta: f64,
    methods: BTreeMap<String, MethodReport>,
}

fn load_errors(
    test: &[DifferenceSeries],
    predictions: &[PredictionSeries],
) -> CliResult<LoadErrorsReport> {
    let mut truth = Vec::new();
    let mut filtered = Vec::new();
    let mut unfiltered = Vec::new();
    let mut skipped = Vec::new();
    for (station, pred) in test.iter().zip(predictions) {
        let attempt = || -> Result<_, loadseg::Error> {
            let t = load_estimate(station, &FilterMask::GroundTruth)?;
            let f = load_estimate(station, &FilterMask::Predictions(pred))?;
            let u = load_estimate(station, &FilterMask::None)?;
            Ok((t, f, u))
        };
        match attempt() {
            Ok((t, f, u)) => {
                truth.push(t);
                filtered.push(f);
                unfiltered.push(u);
            }
            Err(loadseg::Error::FullyFiltered { station_id }) => skipped.push(station_id),
            Err(e) => return Err(CliError::from(e)),
        }
    }
    Ok(LoadErrorsReport {
        filtered: estimate_errors(&truth, &filtered).map_err(CliError::from)?,
        unfiltered: estimate_errors(&truth, &unfiltered).map_err(CliError::from)?,
        fully_filtered_stations: skipped,
    })
}

fn single_auc(
    detector: &loadseg::DetectorConfig,
    test: &[DifferenceSeries],
    seed: u64,
) -> CliResult<[Option<f64>; 4]> {
    let scores = score_detector(detector, test, seed).map_err(CliError::from)?;
    let mut points: Vec<(f64, PointClass)> = Vec::new();
    for (series, score) in test.iter().zip(&scores) {
        let classes = point_classes(&series.carried_labels);
        points.extend(score.effective().into_iter().zip(classes));
    }
    Ok(category_auc_points(&points))
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let stations = load_stations(&config.paths.data_dir)?;
    let outcomes = preprocess_all(&stations, &config.preprocess)?;
    let series: Vec<DifferenceSeries> = outcomes.into_iter().map(|o| o.series).collect();
    let [_train, _validation, test] = partition_by_split(series, &config.paths.split_file())?;
    if test.is_empty() {
        return Err(CliError::Data("test split is empty".into()));
    }
    let model_path = config.paths.model_file();
    let model_file = ModelFile::read(&model_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", model_path.display())))?;

    let mut methods = BTreeMap::new();
    let mut plot_csv = String::from("method,category,metric,mean,std\n");
    for (name, method) in &model_file.methods {
        let (predictions, auc) = match method {
            MethodModel::Single(m) => (
                apply_single(m, &test, model_file.seed).map_err(CliError::from)?,
                single_auc(&m.detector, &test, model_file.seed)?,
            ),
            MethodModel::Ensemble(m) => (
                apply_ensemble(m, &test, model_file.seed).map_err(CliError::from)?,
                [None; 4],
            ),
        };

        let confusions: Vec<[Confusion; 4]> = test
            .iter()
            .zip(&predictions)
            .map(|(s, p)| confusion_by_category(&s.carried_labels, &p.predictions))
            .collect::<Result<_, loadseg::Error>>()
            .map_err(CliError::from)?;
        let mut pooled = [Confusion::default(); 4];
        for c in &confusions {
            for (acc, x) in pooled.iter_mut().zip(c) {
                acc.add(x);
            }
        }
        let metrics =
            metrics_from_confusions(&pooled, OBJECTIVE_BETA).map_err(CliError::from)?;
        let boot = bootstrap(&confusions, config.bootstrap_iterations, config.seed)
            .map_err(CliError::from)?;

        let mut per_category: [Option<CategoryReport>; 4] = [None, None, None, None];
        for category in LengthCategory::ALL {
            let i = category.index();
            if let Some(m) = metrics.per_category[i] {
                let b = boot.per_category[i].clone();
                if let Some(b) = &b {
                    for (metric, stat) in [
                        ("precision", b.precision),
                        ("recall", b.recall),
                        ("f15", b.f_beta),
                    ] {
                        plot_csv.push_str(&format!(
                            "{name},{category:?},{metric},{},{}\n",
                            stat.mean, stat.std
                        ));
                    }
                }
                per_category[i] = Some(CategoryReport {
                    metrics: m,
                    auc: auc[i],
                    bootstrap: b,
                });
            }
        }
        plot_csv.push_str(&format!(
            "{name},all,average_f15,{},{}\n",
            boot.average_f.mean, boot.average_f.std
        ));

        println!(
            "{name}: test average F = {:.4} (bootstrap {:.4} +/- {:.4})",
            metrics.average_f, boot.average_f.mean, boot.average_f.std
        );
        methods.insert(
            name.clone(),
            MethodReport {
                average_f: metrics.average_f,
                average_f_bootstrap: boot.average_f,
                per_category,
                load_errors: load_errors(&test, &predictions)?,
            },
        );
    }

    let report = Report {
        seed: config.seed,
        bootstrap_iterations: config.bootstrap_iterations,
        beta: OBJECTIVE_BETA,
        methods,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
    atomic_write(&config.paths.output_dir.join("report.json"), json.as_bytes())?;
    atomic_write(
        &config.paths.output_dir.join("plot_data.csv"),
        plot_csv.as_bytes(),
    )?;
    println!(
        "report written to {}",
        config.paths.output_dir.join("report.json").display()
    );
    Ok(())
}
