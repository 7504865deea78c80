use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mdid_core::cnn::{read_model, train_fc, write_model};
use mdid_core::config::Config;
use mdid_core::eval::{
    class_labels, confusion_csv, confusion_table, repeated_trials_with_seeds, repetition_seeds, summary_header, summary_line,
    ConfusionMatrix, Metrics,
};
use mdid_core::formats::{read_frame_file, read_pgm_file, write_frame_file, write_pgm_file, Manifest, ManifestEntry, FRAME_HEADER_LEN};
use mdid_core::params::{doppler_resolution, image_dimensions, nyquist_velocity, raw_sample_count};
use mdid_core::seed::{derive_seed, TAG_INIT};
use mdid_core::synth::{capture_background, dataset_plan, envelope_sigma, render_trial};
use mdid_core::{CnnModel, Error, Hyperparams, Label, SpectrogramImage};
use rayon::prelude::*;

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.tsv";
pub const BACKGROUND_NAME: &str = "background.uwbf";

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| Error::format(dir, format!("cannot create directory: {e}")))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| Error::format(path, format!("cannot write: {e}")))?;
    Ok(())
}

/// Renders every trial of the configured identities, plus the empty-room
/// background, and writes a frame manifest.
pub fn synth(config: &Config, out: &Path, seed: u64) -> Result<(), CliError> {
    let frames_dir = out.join("frames");
    create_dir(&frames_dir)?;
    let params = &config.radar;
    let scenario = &config.scenario;
    let profiles = &config.identities;

    let background = capture_background(scenario, params, seed)?;
    write_frame_file(&background, &out.join(BACKGROUND_NAME))?;

    let plan = dataset_plan(profiles, config.trials_per_identity, seed)?;
    let entries = plan
        .par_iter()
        .map(|spec| {
            let name = format!("id{}_trial{:03}.uwbf", spec.label, spec.trial);
            let raw = render_trial(&profiles[spec.profile_index], scenario, params, spec.seed)?;
            write_frame_file(&raw, &frames_dir.join(&name))?;
            Ok(ManifestEntry { path: Path::new("frames").join(name), label: spec.label, trial: spec.trial, seed: spec.seed })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let manifest = Manifest { entries };
    manifest.write(&out.join(MANIFEST_NAME))?;
    println!(
        "synth: {} identities × {} trials → {} frame files, background and manifest in {}",
        profiles.len(),
        config.trials_per_identity,
        manifest.entries.len(),
        out.display()
    );
    Ok(())
}

/// Converts each frame file of `manifest_path` into a PGM image and writes
/// an image manifest carrying the same labels, trial indices and seeds.
pub fn spectrogram(
    config: &Config,
    manifest_path: &Path,
    out: &Path,
    background: Option<&Path>,
    no_clutter_removal: bool,
    csv: bool,
) -> Result<(), CliError> {
    let manifest = Manifest::read(manifest_path)?;
    let background = if no_clutter_removal {
        None
    } else {
        let path: PathBuf = match background {
            Some(p) => p.to_path_buf(),
            None => manifest_path.parent().unwrap_or(Path::new(".")).join(BACKGROUND_NAME),
        };
        if !path.exists() {
            return Err(Error::format(&path, "background file not found (pass --background or --no-clutter-removal)").into());
        }
        Some(read_frame_file(&path, &config.radar)?)
    };
    let images_dir = out.join("images");
    create_dir(&images_dir)?;

    let entries = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let source = Manifest::resolve(manifest_path, entry);
            let raw = read_frame_file(&source, &config.radar)?;
            let in_file = |e: Error| match e {
                Error::Format { .. } | Error::Io(_) => e,
                other => Error::format(&source, other.to_string()),
            };
            let pipeline = config.image_pipeline_for(raw.params()).map_err(in_file)?;
            let spec = pipeline.spectrogram(&raw, background.as_ref()).map_err(in_file)?;
            let image = mdid_core::dsp::to_image(&spec, pipeline.dynamic_range_db).map_err(in_file)?;
            let stem = source.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string();
            let name = format!("{stem}.pgm");
            write_pgm_file(&image, &images_dir.join(&name))?;
            if csv {
                let csv_path = images_dir.join(format!("{stem}.csv"));
                fs::write(&csv_path, spec.to_csv()).map_err(|e| Error::format(&csv_path, e.to_string()))?;
            }
            Ok(ManifestEntry { path: Path::new("images").join(name), ..entry.clone() })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let count = entries.len();
    Manifest { entries }.write(&out.join(MANIFEST_NAME))?;
    println!(
        "spectrogram: {count} images ({}) in {}",
        if no_clutter_removal { "no clutter removal" } else { "background subtracted" },
        out.display()
    );
    Ok(())
}

fn load_images(manifest_path: &Path) -> Result<Vec<(SpectrogramImage, Label)>, CliError> {
    let manifest = Manifest::read(manifest_path)?;
    let images = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let image = read_pgm_file(&Manifest::resolve(manifest_path, entry))?;
            Ok((image.with_label(entry.label), entry.label))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(images)
}

/// Model files store labels as 1..=N, so training data must use exactly those.
fn check_contiguous_labels(labels: &[Label], source: &Path) -> Result<(), CliError> {
    if labels.len() < 2 || labels.iter().enumerate().any(|(i, l)| l.0 as usize != i + 1) {
        return Err(Error::format(
            source,
            format!("training needs at least two classes labelled 1..=N, found {:?}", labels.iter().map(|l| l.0).collect::<Vec<_>>()),
        )
        .into());
    }
    Ok(())
}

fn hyperparams(config: &Config, seed: u64) -> Hyperparams {
    Hyperparams { seed, ..config.hyperparams }
}

pub fn train(config: &Config, manifest_path: &Path, out: &Path, seed: u64) -> Result<(), CliError> {
    let data = load_images(manifest_path)?;
    let labels = class_labels(&data);
    check_contiguous_labels(&labels, manifest_path)?;
    let model = CnnModel::init_with_labels(labels, derive_seed(seed, &[TAG_INIT]))?;
    let (trained, report) = train_fc(&model, &data, &hyperparams(config, seed))?;
    let file = File::create(out).map_err(|e| Error::format(out, e.to_string()))?;
    write_model(&trained, BufWriter::new(file))?;
    let first = report.loss_history.first().copied().unwrap_or(f64::NAN);
    let last = report.loss_history.last().copied().unwrap_or(f64::NAN);
    println!(
        "train: {} images, {} classes, {} epochs, loss {first:.4} → {last:.4}; model written to {}",
        data.len(),
        trained.n_out(),
        report.loss_history.len(),
        out.display()
    );
    Ok(())
}

fn write_results(out: &Path, confusion: &ConfusionMatrix) -> Result<String, CliError> {
    create_dir(out)?;
    let table = confusion_table(confusion);
    write_text(&out.join("confusion.txt"), &table)?;
    write_text(&out.join("confusion.csv"), &confusion_csv(confusion))?;
    Ok(table)
}

pub fn crossval(config: &Config, manifest_path: &Path, out: &Path, seed: u64) -> Result<(), CliError> {
    let data = load_images(manifest_path)?;
    let seeds = repetition_seeds(seed, config.n_seeds);
    let result = repeated_trials_with_seeds(&data, config.folds, &hyperparams(config, seed), &seeds)?;
    let metrics = Metrics::from_confusion(&result.confusion)?;
    let table = write_results(out, &result.confusion)?;
    let summary = format!("{}\n{}\n", summary_header(), summary_line(&result.stats, &metrics));
    write_text(&out.join("summary.csv"), &summary)?;
    let per_seed: String = result.stats.accuracies.iter().map(|a| format!("{a:.4}\n")).collect();
    write_text(&out.join("accuracies.csv"), &format!("accuracy\n{per_seed}"))?;
    print!("{table}\n{summary}");
    Ok(())
}

pub fn eval(model_path: &Path, manifest_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let file = File::open(model_path).map_err(|e| Error::format(model_path, e.to_string()))?;
    let model = read_model(std::io::BufReader::new(file), model_path)?;
    let data = load_images(manifest_path)?;
    let predictions: Vec<Label> = data.par_iter().map(|(image, _)| model.predict(image)).collect();
    let mut confusion = ConfusionMatrix::new(model.class_labels().to_vec());
    for ((_, actual), estimated) in data.iter().zip(&predictions) {
        confusion.record(*actual, *estimated)?;
    }
    let metrics = Metrics::from_confusion(&confusion)?;
    let table = match out {
        Some(dir) => write_results(dir, &confusion)?,
        None => confusion_table(&confusion),
    };
    print!("{table}");
    println!("accuracy {:.4}, precision {:.4}, recall {:.4}, f {:.4}", metrics.accuracy, metrics.precision, metrics.recall, metrics.f);
    Ok(())
}

pub fn info(config: &Config, model: Option<&Path>, frames: Option<&Path>) -> Result<(), CliError> {
    let p = &config.radar;
    let (rows, cols) = image_dimensions(p)?;
    println!("center frequency      {:.4} GHz", p.center_frequency / 1e9);
    println!("bandwidth             {:.4} GHz", p.bandwidth / 1e9);
    println!("sampling interval     {} ms ({} Hz)", p.time_sampling_interval * 1e3, p.sampling_rate());
    println!("range spacing         {} mm", p.range_sampling_interval * 1e3);
    println!("range resolution      {:.2} cm", p.range_resolution() * 100.0);
    println!("envelope sigma        {:.2} cm", envelope_sigma(p) * 100.0);
    println!("observation time      {} s ({} samples)", p.observation_time, raw_sample_count(p)?);
    println!("window                {} s ({} samples)", p.window_width, p.window_len()?);
    println!("nyquist velocity      {:.4} m/s", nyquist_velocity(p)?);
    println!("doppler resolution    {:.4} m/s", doppler_resolution(p)?);
    println!("velocity per bin      {:.4} m/s", p.velocity_per_bin());
    println!("image                 {rows} × {cols}");
    println!("range bins rendered   {}", config.scenario.range_bins(p));
    println!("range gate            {} m to {} m", config.pipeline.gate.0, config.pipeline.gate.1);
    println!("identities            {} × {} trials", config.identities.len(), config.trials_per_identity);
    println!(
        "training              lr {}, momentum {}, {} epochs, batch {}, {} folds × {} seeds",
        config.hyperparams.learning_rate,
        config.hyperparams.momentum,
        config.hyperparams.epochs,
        config.hyperparams.batch_size,
        config.folds,
        config.n_seeds
    );
    if let Some(path) = frames {
        let raw = read_frame_file(path, p)?;
        println!(
            "frame file            {}: {} × {} samples, {} Hz, header {FRAME_HEADER_LEN} bytes",
            path.display(),
            raw.n_times(),
            raw.n_ranges(),
            raw.params().sampling_rate()
        );
    }
    if let Some(path) = model {
        let file = File::open(path).map_err(|e| Error::format(path, e.to_string()))?;
        let m = read_model(std::io::BufReader::new(file), path)?;
        println!(
            "model                 {}: {} classes, init seed {}, {} trainable parameters",
            path.display(),
            m.n_out(),
            m.init_seed(),
            m.trainable_parameters()
        );
    }
    Ok(())
}
