//! Genetic search for the weight vector.
//!
//! Training works on [`PreparedSample`]s: every candidate's weak scores and
//! its intersection ratio against the ground truth are computed once, so a
//! fitness evaluation is only dot products and an argmax.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{ClassifierBank, ScoreContext, CLASSIFIER_COUNT};
use crate::dataset::{Dataset, DatasetError, SurObservation};
use crate::ensemble::{rank_order, weak_values, RankKey, WeightVector, W_MAX};
use crate::evaluation::intersection_ratio;
use crate::osm::{OsmIndex, Provenance, DEFAULT_CANDIDATE_RADIUS};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("sample {0:?} has no ground truth")]
    MissingGroundTruth(String),
    #[error("sample {id:?}: {source}")]
    Sample {
        id: String,
        #[source]
        source: DatasetError,
    },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
}

/// A candidate reduced to what selection and fitness need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedCandidate {
    pub provenance: Provenance,
    pub scores: [f64; CLASSIFIER_COUNT],
    pub contains: bool,
    pub area: f64,
    pub centroid_distance: f64,
    /// Intersection ratio against the sample's ground truth.
    pub ratio: f64,
}

impl PreparedCandidate {
    pub fn rank_key(&self, w: &WeightVector) -> RankKey<'_> {
        RankKey {
            total: w.total(&self.scores),
            contains: self.contains,
            area: self.area,
            provenance: &self.provenance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedSample {
    pub id: String,
    pub candidates: Vec<PreparedCandidate>,
}

impl PreparedSample {
    pub fn new(id: impl Into<String>, candidates: Vec<PreparedCandidate>) -> Self {
        Self {
            id: id.into(),
            candidates,
        }
    }

    /// Query the index, score every candidate and measure it against the
    /// ground truth.
    pub fn prepare(
        obs: &SurObservation,
        image: Option<&Path>,
        index: &OsmIndex,
        bank: &ClassifierBank,
    ) -> Result<Self, TrainError> {
        let truth = obs
            .ground_truth()
            .ok_or_else(|| TrainError::MissingGroundTruth(obs.id().to_string()))?
            .map_err(|source| TrainError::Sample {
                id: obs.id().to_string(),
                source,
            })?;
        let ctx = ScoreContext::new(obs).with_indoor_outdoor(bank.indoor_outdoor(image));
        let candidates = index
            .candidates_within(obs.location(), DEFAULT_CANDIDATE_RADIUS)
            .into_iter()
            .map(|c| PreparedCandidate {
                scores: weak_values(&bank.score_all(&ctx, &c)),
                contains: c.geometry.contains(&ctx.position),
                area: c.geometry.area(),
                centroid_distance: c.geometry.centroid().distance(&ctx.position),
                ratio: intersection_ratio(&truth, &c.geometry).unwrap_or(0.0),
                provenance: c.provenance,
            })
            .collect();
        Ok(Self::new(obs.id(), candidates))
    }

    /// The candidate the strong classifier picks under `w`.
    pub fn select(&self, w: &WeightVector) -> Option<&PreparedCandidate> {
        self.candidates
            .iter()
            .min_by(|a, b| rank_order(&a.rank_key(w), &b.rank_key(w)))
    }

    /// R of the selected candidate; 0 when there is nothing to select.
    pub fn selected_ratio(&self, w: &WeightVector) -> f64 {
        self.select(w).map_or(0.0, |c| c.ratio)
    }
}

/// Prepare every sample of a dataset, in parallel.
pub fn prepare_dataset(
    dataset: &Dataset,
    index: &OsmIndex,
    bank: &ClassifierBank,
) -> Result<Vec<PreparedSample>, TrainError> {
    dataset
        .samples()
        .par_iter()
        .map(|s| PreparedSample::prepare(s, dataset.resolve_image(s).as_deref(), index, bank))
        .collect()
}

/// Mean selected R over the samples, in [0, 1]. Zero for an empty slice.
pub fn fitness(weights: &WeightVector, samples: &[PreparedSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.selected_ratio(weights)).sum::<f64>() / samples.len() as f64
}

/// Genetic algorithm settings. Missing JSON fields take the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub elitism_count: usize,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 64,
            generations: 100,
            tournament_size: 4,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_sigma: 0.5,
            elitism_count: 2,
            rng_seed: 0x5eed,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if self.elitism_count >= self.population_size {
            return bad("elitism_count must be below population_size");
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be positive");
        }
        for (name, p) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma >= 0.0) {
            return bad("mutation_sigma must be finite and nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingOutcome {
    pub weights: WeightVector,
    pub fitness: f64,
    /// Generation 0 is the random initial population.
    pub trace: Vec<GenerationStats>,
    pub config: GaConfig,
}

impl TrainingOutcome {
    /// `generation,best,mean` rows with a header.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.trace {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Persisted training result: the weights plus how they were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub weights: WeightVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<GaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
}

impl From<&TrainingOutcome> for WeightsFile {
    fn from(o: &TrainingOutcome) -> Self {
        Self {
            weights: o.weights,
            fitness: Some(o.fitness),
            config: Some(o.config),
            rng_seed: Some(o.config.rng_seed),
        }
    }
}

/// Accepts a [`WeightsFile`] or a bare name-to-weight map.
pub fn parse_weights(text: &str) -> Result<WeightVector, serde_json::Error> {
    match serde_json::from_str::<WeightsFile>(text) {
        Ok(f) => Ok(f.weights),
        Err(wrapped) => serde_json::from_str::<WeightVector>(text).map_err(|bare| {
            if text.contains("\"weights\"") {
                wrapped
            } else {
                bare
            }
        }),
    }
}

/// Independent stream per (seed, generation, individual).
fn stream_rng(seed: u64, generation: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | index as u64);
    rng
}

fn random_individual(rng: &mut ChaCha8Rng) -> [f64; CLASSIFIER_COUNT] {
    std::array::from_fn(|_| rng.random_range(0.0..=W_MAX))
}

/// A vector with every gene zero gets one gene resampled.
fn repair(genes: &mut [f64; CLASSIFIER_COUNT], rng: &mut ChaCha8Rng) {
    while genes.iter().all(|&g| g == 0.0) {
        let i = rng.random_range(0..CLASSIFIER_COUNT);
        genes[i] = rng.random_range(0.0..=W_MAX);
    }
}

fn tournament(fit: &[f64], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..fit.len());
    for _ in 1..size {
        let c = rng.random_range(0..fit.len());
        if fit[c] > fit[best] || (fit[c] == fit[best] && c < best) {
            best = c;
        }
    }
    best
}

fn to_weights(genes: [f64; CLASSIFIER_COUNT]) -> WeightVector {
    WeightVector::new(genes).expect("genes are clamped and repaired")
}

pub fn train(config: &GaConfig, samples: &[PreparedSample]) -> Result<TrainingOutcome, TrainError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    let evaluate = |pop: &[[f64; CLASSIFIER_COUNT]]| -> Vec<f64> {
        pop.par_iter().map(|g| fitness(&to_weights(*g), samples)).collect()
    };
    let stats = |generation, fit: &[f64]| GenerationStats {
        generation,
        best: fit.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        mean: fit.iter().sum::<f64>() / fit.len() as f64,
    };
    let n = config.population_size;
    let mut pop: Vec<[f64; CLASSIFIER_COUNT]> = (0..n)
        .map(|i| {
            let mut rng = stream_rng(config.rng_seed, 0, i);
            let mut g = random_individual(&mut rng);
            repair(&mut g, &mut rng);
            g
        })
        .collect();
    let mut fit = evaluate(&pop);
    let mut trace = vec![stats(0, &fit)];
    let best_of = |fit: &[f64]| (0..fit.len()).fold(0, |b, i| if fit[i] > fit[b] { i } else { b });
    let mut best_i = best_of(&fit);
    let (mut best_genes, mut best_fit) = (pop[best_i], fit[best_i]);
    let normal = Normal::new(0.0, config.mutation_sigma).expect("sigma validated");

    for generation in 1..=config.generations {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fit[b].total_cmp(&fit[a]).then(a.cmp(&b)));
        let offspring: Vec<[f64; CLASSIFIER_COUNT]> = (config.elitism_count..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(config.rng_seed, generation, i);
                let a = pop[tournament(&fit, config.tournament_size, &mut rng)];
                let b = pop[tournament(&fit, config.tournament_size, &mut rng)];
                let mut child = if rng.random_bool(config.crossover_rate) {
                    let l: f64 = rng.random();
                    std::array::from_fn(|k| l * a[k] + (1.0 - l) * b[k])
                } else {
                    a
                };
                for g in child.iter_mut() {
                    if rng.random_bool(config.mutation_rate) {
                        *g += normal.sample(&mut rng);
                    }
                    *g = g.clamp(0.0, W_MAX);
                }
                repair(&mut child, &mut rng);
                child
            })
            .collect();
        let mut next: Vec<_> = order[..config.elitism_count].iter().map(|&i| pop[i]).collect();
        let mut next_fit: Vec<_> = order[..config.elitism_count].iter().map(|&i| fit[i]).collect();
        next_fit.extend(evaluate(&offspring));
        next.extend(offspring);
        pop = next;
        fit = next_fit;
        trace.push(stats(generation, &fit));
        best_i = best_of(&fit);
        if fit[best_i] > best_fit {
            best_fit = fit[best_i];
            best_genes = pop[best_i];
        }
    }
    Ok(TrainingOutcome {
        weights: to_weights(best_genes),
        fitness: best_fit,
        trace,
        config: *config,
    })
}
