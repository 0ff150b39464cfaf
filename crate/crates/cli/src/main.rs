use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sur_assoc::classifiers::{ClassifierBank, ScoreContext};
use sur_assoc::dataset::{load_dataset, load_sample, Dataset};
use sur_assoc::ensemble::{default_weights, score_all, WeightVector};
use sur_assoc::evaluation::{
    baseline_configurations, evaluate, render_report, Configuration, ReportFormat, Selector,
};
use sur_assoc::geojson::{candidates_geojson, ranked_geojson};
use sur_assoc::geometry::GeoPoint;
use sur_assoc::osm::{OsmData, OsmIndex, RadiusTable, DEFAULT_CANDIDATE_RADIUS};
use sur_assoc::trainer::{parse_weights, prepare_dataset, train, GaConfig, WeightsFile};

/// Match space usage rule observations to OpenStreetMap polygons.
#[derive(Parser)]
#[command(name = "sur-assoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct World {
    /// OpenStreetMap XML extract.
    #[arg(long)]
    osm: PathBuf,
    /// Node buffer radius table (defaults to the built-in one).
    #[arg(long)]
    radius_table: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Rules {
    /// Directory with description.json, mapping.json, vision.json and
    /// constants.json (defaults to the built-in rules).
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the candidate polygons around a point as GeoJSON.
    Candidates {
        #[command(flatten)]
        world: World,
        #[arg(long, allow_negative_numbers = true)]
        lat: f64,
        #[arg(long, allow_negative_numbers = true)]
        lon: f64,
        /// Search radius in meters.
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_RADIUS)]
        radius: f64,
    },
    /// Rank the candidates of one sample and print them as GeoJSON.
    Score {
        #[command(flatten)]
        world: World,
        #[command(flatten)]
        rules: Rules,
        /// Sample record (JSON, manifest entry format).
        #[arg(long)]
        sample: PathBuf,
        /// Weights JSON; `default_weights()` when omitted.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Score for one of the sample's SUR types instead of all jointly.
        #[arg(long)]
        sur: Option<String>,
    },
    /// Learn weights with the genetic algorithm.
    Train {
        #[command(flatten)]
        world: World,
        #[command(flatten)]
        rules: Rules,
        /// Dataset directory holding manifest.json.
        #[arg(long)]
        dataset: PathBuf,
        /// GA configuration JSON; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Fitness trace CSV (default: next to --out with a .trace.csv suffix).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate weight vectors on a labeled dataset.
    Eval {
        #[command(flatten)]
        world: World,
        #[command(flatten)]
        rules: Rules,
        #[arg(long)]
        dataset: PathBuf,
        /// One or more weights files; each becomes a report row.
        #[arg(long, num_args = 1..)]
        weights: Vec<PathBuf>,
        /// Add the default, equal-weight and single-classifier rows.
        #[arg(long)]
        baselines: bool,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
    },
}

fn load_world(w: &World) -> Result<OsmIndex> {
    let radii = match &w.radius_table {
        Some(p) => fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .parse::<RadiusTable>()
            .with_context(|| format!("parsing {}", p.display()))?,
        None => RadiusTable::default(),
    };
    let data = OsmData::from_path(&w.osm).with_context(|| format!("loading {}", w.osm.display()))?;
    for d in &data.dangling {
        log::warn!("way {} references missing node {}", d.way, d.node);
    }
    Ok(OsmIndex::new(data, radii))
}

fn load_bank(r: &Rules) -> Result<ClassifierBank> {
    match &r.rules {
        Some(dir) => ClassifierBank::load(dir).with_context(|| format!("loading rules from {}", dir.display())),
        None => Ok(ClassifierBank::default()),
    }
}

fn read_weights(path: &Path) -> Result<WeightVector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_weights(&text).with_context(|| format!("parsing weights {}", path.display()))
}

fn read_dataset(dir: &Path) -> Result<Dataset> {
    let loaded = load_dataset(dir).with_context(|| format!("loading dataset {}", dir.display()))?;
    if !loaded.rejected.is_empty() {
        log::warn!("{} sample(s) skipped", loaded.rejected.len());
    }
    Ok(loaded.dataset)
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Candidates { world, lat, lon, radius } => {
            if !(radius.is_finite() && radius > 0.0) {
                bail!("--radius must be a positive number of meters");
            }
            let center = GeoPoint::new(lat, lon)?;
            let index = load_world(&world)?;
            print_json(&candidates_geojson(&index.candidates_within(center, radius), center))
        }
        Command::Score {
            world,
            rules,
            sample,
            weights,
            sur,
        } => {
            let index = load_world(&world)?;
            let bank = load_bank(&rules)?;
            let weights = match weights {
                Some(p) => read_weights(&p)?,
                None => default_weights(),
            };
            let obs = load_sample(&sample).with_context(|| format!("loading {}", sample.display()))?;
            let image = obs.image_path().map(|p| match sample.parent() {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.to_path_buf(),
            });
            let mut ctx = ScoreContext::new(&obs).with_indoor_outdoor(bank.indoor_outdoor(image.as_deref()));
            if let Some(s) = &sur {
                if !obs.sur_types().iter().any(|t| t == s) {
                    bail!("sample {} has no SUR type {s:?}", obs.id());
                }
                ctx = ctx.for_sur(s);
            }
            let cands = index.candidates_within(obs.location(), ctx.candidate_radius);
            let ranked = score_all(&bank, &ctx, &cands, &weights);
            let truth = obs.ground_truth().transpose()?;
            print_json(&ranked_geojson(&obs, &ranked, truth.as_ref()))
        }
        Command::Train {
            world,
            rules,
            dataset,
            config,
            out,
            trace,
        } => {
            let cfg: GaConfig = match config {
                Some(p) => serde_json::from_str(
                    &fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
                )
                .with_context(|| format!("parsing {}", p.display()))?,
                None => GaConfig::default(),
            };
            cfg.validate()?;
            let index = load_world(&world)?;
            let bank = load_bank(&rules)?;
            let ds = read_dataset(&dataset)?;
            let prepared = prepare_dataset(&ds, &index, &bank)?;
            let outcome = train(&cfg, &prepared)?;
            let file = WeightsFile::from(&outcome);
            fs::write(&out, serde_json::to_string_pretty(&file)? + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            let trace = trace.unwrap_or_else(|| out.with_extension("trace.csv"));
            let f = fs::File::create(&trace).with_context(|| format!("writing {}", trace.display()))?;
            outcome.write_trace_csv(f)?;
            eprintln!("fitness {:.4}: {}", outcome.fitness, outcome.weights);
            Ok(())
        }
        Command::Eval {
            world,
            rules,
            dataset,
            weights,
            baselines,
            format,
        } => {
            let mut configs = Vec::new();
            for p in &weights {
                let label = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into());
                configs.push(Configuration::new(label, Selector::Weights(read_weights(p)?)));
            }
            if baselines {
                configs.push(Configuration::new("Default Weights", Selector::Weights(default_weights())));
                configs.push(Configuration::new("Equal Weights", Selector::Weights(WeightVector::equal())));
                configs.extend(baseline_configurations());
            }
            if configs.is_empty() {
                log::warn!("no configurations: pass --weights or --baselines");
            }
            let index = load_world(&world)?;
            let bank = load_bank(&rules)?;
            let ds = read_dataset(&dataset)?;
            let prepared = prepare_dataset(&ds, &index, &bank)?;
            let report = evaluate(ds.name(), &prepared, &configs);
            print!("{}", render_report(&report, format));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
