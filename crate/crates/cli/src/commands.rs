use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gfconv::demo;
use gfconv::field::{ScalarField, ValidMask, VectorField};
use gfconv::gfc::{integrate_gradient, OperatorCache};
use gfconv::gis::{gis_forward, gis_timing_bench, solve_timing_bench, ChannelLayout, GisConfig};
use gfconv::io::{self, is_image_path};
use gfconv::metrics::{self, GroundTruth, MetricReport, PRCurve};
use gfconv::perturb::{darken, salt_pepper, NoiseSpec};
use rayon::prelude::*;

use crate::error::CliError;

const REPORT_HEADER: [&str; 8] = ["name", "Fm", "Pmax", "meanPR", "AUC", "MAE", "RMSE", "CE"];
const CURVE_HEADER: [&str; 4] = ["threshold", "P", "R", "notR"];

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Io(format!("no such file: {}", path.display())))
    }
}

fn require_dir(path: &Path) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::Io(format!("no such directory: {}", path.display())))
    }
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

/// Image files in `dir` keyed by file stem, in name order.
fn images_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>, CliError> {
    let entries =
        fs::read_dir(dir).map_err(|e| CliError::Io(format!("cannot read {}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", dir.display())))?
            .path();
        if !path.is_file() || !is_image_path(&path) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            if let Some(prev) = out.insert(stem.to_string(), path.clone()) {
                return Err(CliError::Usage(format!(
                    "ambiguous stem {stem:?}: {} and {}",
                    prev.display(),
                    path.display()
                )));
            }
        }
    }
    Ok(out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_report_csv(path: &Path, rows: &[(String, MetricReport)]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(REPORT_HEADER)?;
    for (name, r) in rows {
        w.write_record([
            name.clone(),
            r.f_measure.to_string(),
            r.max_precision.to_string(),
            r.mean_pr.to_string(),
            r.auc.to_string(),
            r.mae.to_string(),
            r.rmse.to_string(),
            r.cross_entropy.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn write_curve_csv(path: &Path, curve: &PRCurve) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(CURVE_HEADER)?;
    for p in curve.points() {
        w.write_record([
            p.threshold.to_string(),
            p.precision.to_string(),
            p.recall.to_string(),
            p.false_positive_rate.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn integrate(ex: &Path, ey: &Path, out: &Path) -> Result<(), CliError> {
    require_file(ex)?;
    require_file(ey)?;
    let field = VectorField::new(io::load_field(ex)?, io::load_field(ey)?)?;
    let result = integrate_gradient(&field, &OperatorCache::new());
    create_parent(out)?;
    io::save_field(&result, out)?;
    Ok(())
}

pub fn gis(input: &Path, out: &Path, layout: &str, time: bool) -> Result<(), CliError> {
    require_file(input)?;
    let layout: ChannelLayout = layout.parse()?;
    let batch = io::read_batch(input)?;
    let cache = OperatorCache::new();
    let cfg = GisConfig::with_layout(layout);

    let start = Instant::now();
    let result = gis_forward(&batch, &cfg, &cache)?;
    let elapsed = start.elapsed();

    create_parent(out)?;
    io::write_batch(out, &result)?;
    if time {
        let solves = batch.n_items() * batch.n_channels() / 3;
        println!(
            "gis: {} solves of {}x{} in {:.6} s ({:.6} s per solve, cold cache)",
            solves,
            batch.height(),
            batch.width(),
            elapsed.as_secs_f64(),
            elapsed.as_secs_f64() / solves as f64
        );
    }
    Ok(())
}

pub struct EvalArgs {
    pub pred: PathBuf,
    pub gt: PathBuf,
    pub mask: Option<PathBuf>,
    pub levels: usize,
    pub beta2: f64,
    pub out: PathBuf,
    pub curves: Option<PathBuf>,
}

struct EvalJob {
    name: String,
    pred: PathBuf,
    gt: PathBuf,
    mask: Option<PathBuf>,
}

fn evaluate_job(job: &EvalJob, levels: usize, beta2: f64) -> Result<(MetricReport, PRCurve), CliError> {
    let s = io::load_image(&job.pred)?;
    let g = io::load_image(&job.gt)?;
    if s.dims() != g.dims() {
        return Err(CliError::Numeric(format!(
            "{}: prediction is {:?} but ground truth is {:?}",
            job.name,
            s.dims(),
            g.dims()
        )));
    }
    let mask = match &job.mask {
        Some(p) => ValidMask::from_field(&io::load_image(p)?),
        None => ValidMask::all(s.height(), s.width()),
    };
    let g = GroundTruth::binarize(&g, 0.5);
    metrics::evaluate_with_curve(&s, &g, &mask, levels, beta2)
        .map_err(|e| CliError::from(e).with_context(&job.name))
}

impl CliError {
    fn with_context(self, name: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{name}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{name}: {m}")),
            CliError::Numeric(m) => CliError::Numeric(format!("{name}: {m}")),
        }
    }
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    require_dir(&args.pred)?;
    require_dir(&args.gt)?;
    if let Some(m) = &args.mask {
        require_dir(m)?;
    }
    if !(args.beta2 > 0.0 && args.beta2.is_finite()) {
        return Err(CliError::Usage(format!("beta2 must be positive, got {}", args.beta2)));
    }

    let preds = images_by_stem(&args.pred)?;
    let gts = images_by_stem(&args.gt)?;
    let masks = match &args.mask {
        Some(dir) => Some(images_by_stem(dir)?),
        None => None,
    };
    if preds.is_empty() {
        return Err(CliError::Io(format!("no images in {}", args.pred.display())));
    }
    let mut jobs = Vec::with_capacity(preds.len());
    for (name, pred) in preds {
        let gt = gts
            .get(&name)
            .ok_or_else(|| CliError::Io(format!("no ground truth for {name} in {}", args.gt.display())))?;
        let mask = match &masks {
            Some(m) => Some(
                m.get(&name)
                    .ok_or_else(|| CliError::Io(format!("no mask for {name}")))?
                    .clone(),
            ),
            None => None,
        };
        jobs.push(EvalJob {
            name,
            pred,
            gt: gt.clone(),
            mask,
        });
    }

    let results = jobs
        .par_iter()
        .map(|job| evaluate_job(job, args.levels, args.beta2))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows: Vec<(String, MetricReport)> = jobs
        .iter()
        .zip(&results)
        .map(|(job, (report, _))| (job.name.clone(), *report))
        .collect();
    let reports: Vec<MetricReport> = results.iter().map(|(r, _)| *r).collect();
    let mean = metrics::average_reports(&reports).expect("at least one image");
    rows.push(("mean".to_string(), mean));

    create_parent(&args.out)?;
    write_report_csv(&args.out, &rows)?;
    if let Some(dir) = &args.curves {
        create_dir(dir)?;
        for (job, (_, curve)) in jobs.iter().zip(&results) {
            write_curve_csv(&dir.join(format!("{}.csv", job.name)), curve)?;
        }
    }
    println!(
        "{} images: Fm {} AUC {} MAE {}",
        reports.len(),
        mean.f_measure,
        mean.auc,
        mean.mae
    );
    Ok(())
}

/// FNV-1a, so each file gets its own noise stream derived from one seed.
fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn perturb(
    input: &Path,
    out: &Path,
    noise: Option<f64>,
    seed: u64,
    factor: Option<f64>,
) -> Result<(), CliError> {
    require_dir(input)?;
    if noise.is_none() && factor.is_none() {
        return Err(CliError::Usage("nothing to do: pass --noise and/or --darken".into()));
    }
    if let Some(f) = noise {
        NoiseSpec::new(f, seed)?;
    }
    if let Some(f) = factor {
        if !(0.0..=1.0).contains(&f) {
            return Err(CliError::Usage(format!("darken factor {f} outside [0, 1]")));
        }
    }
    let files = images_by_stem(input)?;
    create_dir(out)?;
    if out.canonicalize().ok() == input.canonicalize().ok() {
        return Err(CliError::Usage("output directory must differ from input".into()));
    }

    files.par_iter().try_for_each(|(_, path)| -> Result<(), CliError> {
        let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let mut img: ScalarField = io::load_image(path)?;
        if let Some(f) = noise {
            img = salt_pepper(&img, &NoiseSpec::new(f, seed ^ name_hash(file_name))?);
        }
        if let Some(f) = factor {
            img = darken(&img, f)?;
        }
        io::save_image(&img, out.join(file_name))?;
        Ok(())
    })?;
    println!("perturbed {} images into {}", files.len(), out.display());
    Ok(())
}

fn gradient_magnitude(field: &VectorField) -> ScalarField {
    let (ex, ey) = (field.ex().values(), field.ey().values());
    let (h, w) = field.dims();
    ScalarField::from_fn(h, w, |r, c| {
        let i = r * w + c;
        ex[i].hypot(ey[i])
    })
}

pub fn demo_disk(size: usize, radius: f64, out: &Path) -> Result<(), CliError> {
    let cache = OperatorCache::new();
    let result = demo::demo_disk(
        size,
        radius,
        metrics::DEFAULT_LEVELS,
        metrics::DEFAULT_BETA_SQUARED,
        &cache,
    )?;
    create_dir(out)?;
    io::save_image(&result.ground_truth, out.join("ground_truth.pgm"))?;
    io::save_image(&gradient_magnitude(&result.edges).min_max_normalized(), out.join("edges.pgm"))?;
    io::write_field_tensor(out.join("ex.gfct"), result.edges.ex())?;
    io::write_field_tensor(out.join("ey.gfct"), result.edges.ey())?;
    io::save_image(&result.normalized, out.join("integrated.pgm"))?;
    io::write_field_tensor(out.join("integrated.gfct"), &result.integrated)?;
    write_report_csv(&out.join("metrics.csv"), &[("disk".to_string(), result.report)])?;
    write_curve_csv(&out.join("curve.csv"), &result.curve)?;
    println!(
        "disk size {size} radius {radius}: Fm {} AUC {} MAE {}",
        result.report.f_measure, result.report.auc, result.report.mae
    );
    Ok(())
}

pub fn bench(size: usize, count: usize, batch: usize) -> Result<(), CliError> {
    if size < 8 || count == 0 || batch == 0 {
        return Err(CliError::Usage(
            "bench needs --size >= 8 and positive --count and --batch".into(),
        ));
    }
    let solves = solve_timing_bench(size, size, count)?;
    println!(
        "solve_laplacian {size}x{size}: operator build {:.6} s; {count} warm solves in {:.6} s; mean {:.6} s, stddev {:.6} s",
        solves.cold.as_secs_f64(),
        solves.total.as_secs_f64(),
        solves.mean.as_secs_f64(),
        solves.stddev.as_secs_f64()
    );
    let repeats = count.div_ceil(batch);
    let gis = gis_timing_bench(size, size, batch, repeats, &GisConfig::default())?;
    println!(
        "gis_forward batch {batch}: cold {:.6} s; warm {:.6} s per batch (stddev {:.6}); {:.6} s per solve ({:.2}x bare solve)",
        gis.cold.as_secs_f64(),
        gis.warm_mean.as_secs_f64(),
        gis.warm_stddev.as_secs_f64(),
        gis.per_solve().as_secs_f64(),
        gis.per_solve().as_secs_f64() / solves.mean.as_secs_f64()
    );
    Ok(())
}
