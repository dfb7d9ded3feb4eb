//! Multi-view training stream construction.
//!
//! Each training slot draws X ~ Bernoulli(eta); X = 1 pulls the next
//! generation-view instance, X = 0 pulls the next ranking instance. A triple
//! contributes its true-labeled and false-labeled instances adjacently and
//! they occupy two slots. Streams cycle when exhausted; reshuffling between
//! epochs is off by default and, when enabled, uses its own seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::templates::{T2TExample, View};

/// Mixing configuration: generation-view probability, draw seed, stream
/// length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixConfig {
    pub eta: f64,
    pub seed: u64,
    pub total_examples: usize,
    /// When set, each stream reshuffles at every epoch boundary with this
    /// seed (pairs stay adjacent).
    #[serde(default)]
    pub epoch_shuffle_seed: Option<u64>,
}

impl Default for MixConfig {
    fn default() -> Self {
        MixConfig {
            eta: 0.15,
            seed: 0,
            total_examples: 0,
            epoch_shuffle_seed: None,
        }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidConfig(format!(
                "mixing rate eta must be in [0,1], got {}",
                self.eta
            )));
        }
        Ok(())
    }
}

/// Outcome of one Bernoulli draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewDraw {
    Ranking,
    Generation,
}

impl ViewDraw {
    pub fn is_generation(self) -> bool {
        matches!(self, ViewDraw::Generation)
    }
}

/// Deterministic Bernoulli(eta) draw state.
pub struct DrawState {
    rng: ChaCha8Rng,
    eta: f64,
}

impl DrawState {
    pub fn new(cfg: &MixConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(DrawState {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            eta: cfg.eta,
        })
    }

    /// P(Generation) = eta; the sequence is fully determined by the seed.
    pub fn draw(&mut self) -> ViewDraw {
        if self.rng.gen::<f64>() < self.eta {
            ViewDraw::Generation
        } else {
            ViewDraw::Ranking
        }
    }
}

const RANK_STREAM_SALT: u64 = 0x72616e6b;
const GEN_STREAM_SALT: u64 = 0x67656e;

fn epoch_rng(shuffle_seed: u64, salt: u64, epoch: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        shuffle_seed ^ salt.wrapping_mul(0x9e3779b97f4a7c15) ^ epoch.wrapping_mul(0xbf58476d1ce4e5b9),
    )
}

/// Cycles over pairs, yielding one instance at a time (pair members stay
/// adjacent across epoch reshuffles).
struct PairCycle<'a> {
    pairs: &'a [[T2TExample; 2]],
    order: Vec<usize>,
    pos: usize,
    epoch: u64,
    shuffle_seed: Option<u64>,
}

impl<'a> PairCycle<'a> {
    fn new(pairs: &'a [[T2TExample; 2]], shuffle_seed: Option<u64>) -> Self {
        PairCycle {
            pairs,
            order: (0..pairs.len()).collect(),
            pos: 0,
            epoch: 0,
            shuffle_seed,
        }
    }

    fn next(&mut self) -> Result<&'a T2TExample> {
        if self.pairs.is_empty() {
            return Err(Error::Empty {
                what: "ranking stream selected by draw".into(),
            });
        }
        if self.pos == 2 * self.order.len() {
            self.epoch += 1;
            self.pos = 0;
            if let Some(seed) = self.shuffle_seed {
                self.order.shuffle(&mut epoch_rng(seed, RANK_STREAM_SALT, self.epoch));
            }
        }
        let pair = &self.pairs[self.order[self.pos / 2]];
        let instance = &pair[self.pos % 2];
        self.pos += 1;
        Ok(instance)
    }
}

struct ItemCycle<'a> {
    items: &'a [T2TExample],
    order: Vec<usize>,
    pos: usize,
    epoch: u64,
    shuffle_seed: Option<u64>,
}

impl<'a> ItemCycle<'a> {
    fn new(items: &'a [T2TExample], shuffle_seed: Option<u64>) -> Self {
        ItemCycle {
            items,
            order: (0..items.len()).collect(),
            pos: 0,
            epoch: 0,
            shuffle_seed,
        }
    }

    fn next(&mut self) -> Result<&'a T2TExample> {
        if self.items.is_empty() {
            return Err(Error::Empty {
                what: "generation stream selected by draw".into(),
            });
        }
        if self.pos == self.order.len() {
            self.epoch += 1;
            self.pos = 0;
            if let Some(seed) = self.shuffle_seed {
                self.order.shuffle(&mut epoch_rng(seed, GEN_STREAM_SALT, self.epoch));
            }
        }
        let item = &self.items[self.order[self.pos]];
        self.pos += 1;
        Ok(item)
    }
}

/// Build the mixed training stream of `cfg.total_examples` instances.
pub fn mix_streams(
    rank_pairs: &[[T2TExample; 2]],
    gen_stream: &[T2TExample],
    cfg: &MixConfig,
) -> Result<Vec<T2TExample>> {
    let mut draws = DrawState::new(cfg)?;
    let mut rank = PairCycle::new(rank_pairs, cfg.epoch_shuffle_seed);
    let mut gen = ItemCycle::new(gen_stream, cfg.epoch_shuffle_seed);
    let mut out = Vec::with_capacity(cfg.total_examples);
    for _ in 0..cfg.total_examples {
        let ex = match draws.draw() {
            ViewDraw::Generation => gen.next()?,
            ViewDraw::Ranking => rank.next()?,
        };
        out.push(ex.clone());
    }
    Ok(out)
}

/// Realized per-view proportions of a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixReport {
    pub total: usize,
    pub counts: BTreeMap<View, usize>,
    pub proportions: BTreeMap<View, f64>,
    /// Fraction of instances carrying a generation-data view tag.
    pub generation_fraction: f64,
}

/// Count view tags over a stream; proportions sum to 1.
pub fn empirical_mix_report(stream: &[T2TExample]) -> Result<MixReport> {
    if stream.is_empty() {
        return Err(Error::Empty {
            what: "stream for mix report".into(),
        });
    }
    let mut counts: BTreeMap<View, usize> = BTreeMap::new();
    for ex in stream {
        *counts.entry(ex.view).or_insert(0) += 1;
    }
    let total = stream.len();
    let proportions: BTreeMap<View, f64> = counts
        .iter()
        .map(|(&v, &c)| (v, c as f64 / total as f64))
        .collect();
    let generation_fraction = counts
        .iter()
        .filter(|(v, _)| !v.is_ranking())
        .map(|(_, &c)| c as f64)
        .sum::<f64>()
        / total as f64;
    Ok(MixReport {
        total,
        counts,
        proportions,
        generation_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TrainTriple;
    use crate::templates::{render_generation, triple_to_rank_examples};

    fn rank_pairs(n: usize) -> Vec<[T2TExample; 2]> {
        (0..n)
            .map(|i| {
                let t = TrainTriple::new(format!("q{i}"), format!("pos {i}"), format!("neg {i}"))
                    .unwrap();
                triple_to_rank_examples(&t, false).unwrap()
            })
            .collect()
    }

    fn gen_items(n: usize) -> Vec<T2TExample> {
        (0..n)
            .map(|i| render_generation(&format!("q{i}"), &format!("p{i}"), View::P2q).unwrap())
            .collect()
    }

    fn cfg(eta: f64, seed: u64, total: usize) -> MixConfig {
        MixConfig {
            eta,
            seed,
            total_examples: total,
            epoch_shuffle_seed: None,
        }
    }

    #[test]
    fn eta_zero_is_always_ranking() {
        let mut s = DrawState::new(&cfg(0.0, 1, 0)).unwrap();
        assert!((0..1000).all(|_| s.draw() == ViewDraw::Ranking));
    }

    #[test]
    fn eta_one_is_always_generation() {
        let mut s = DrawState::new(&cfg(1.0, 1, 0)).unwrap();
        assert!((0..1000).all(|_| s.draw() == ViewDraw::Generation));
    }

    #[test]
    fn empirical_rate_close_to_eta() {
        let mut s = DrawState::new(&cfg(0.15, 42, 0)).unwrap();
        let hits = (0..100_000).filter(|_| s.draw().is_generation()).count();
        let rate = hits as f64 / 100_000.0;
        assert!((0.14..=0.16).contains(&rate), "rate {rate}");
    }

    #[test]
    fn invalid_eta_rejected() {
        assert!(DrawState::new(&cfg(1.5, 0, 0)).is_err());
        assert!(DrawState::new(&cfg(-0.1, 0, 0)).is_err());
    }

    #[test]
    fn eta_zero_expands_triples_in_order() {
        let pairs = rank_pairs(6);
        let stream = mix_streams(&pairs, &gen_items(3), &cfg(0.0, 9, 10)).unwrap();
        assert_eq!(stream.len(), 10);
        for i in 0..5 {
            assert_eq!(stream[2 * i], pairs[i][0]);
            assert_eq!(stream[2 * i + 1], pairs[i][1]);
        }
    }

    #[test]
    fn eta_one_takes_generation_prefix() {
        let gens = gen_items(5);
        let stream = mix_streams(&rank_pairs(2), &gens, &cfg(1.0, 9, 3)).unwrap();
        assert_eq!(stream, gens[..3].to_vec());
    }

    #[test]
    fn stream_is_seed_deterministic() {
        let pairs = rank_pairs(10);
        let gens = gen_items(10);
        let a = mix_streams(&pairs, &gens, &cfg(0.5, 77, 1000)).unwrap();
        let b = mix_streams(&pairs, &gens, &cfg(0.5, 77, 1000)).unwrap();
        assert_eq!(a, b);
        let c = mix_streams(&pairs, &gens, &cfg(0.5, 78, 1000)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn streams_cycle_when_exhausted() {
        let pairs = rank_pairs(2);
        let stream = mix_streams(&pairs, &gen_items(1), &cfg(0.0, 3, 10)).unwrap();
        // 2 pairs = 4 instances per epoch, repeated without reshuffle
        for i in 0..10 {
            assert_eq!(stream[i], stream[i % 4].clone());
        }
    }

    #[test]
    fn empty_generation_stream_fails_when_drawn() {
        let err = mix_streams(&rank_pairs(2), &[], &cfg(1.0, 3, 5)).unwrap_err();
        assert!(err.to_string().contains("generation"), "{err}");
    }

    #[test]
    fn empty_rank_stream_fails_when_drawn() {
        let err = mix_streams(&[], &gen_items(2), &cfg(0.0, 3, 5)).unwrap_err();
        assert!(err.to_string().contains("ranking"), "{err}");
    }

    #[test]
    fn unneeded_empty_stream_is_fine() {
        assert!(mix_streams(&rank_pairs(2), &[], &cfg(0.0, 3, 4)).is_ok());
    }

    #[test]
    fn report_proportions_sum_to_one() {
        let stream = mix_streams(&rank_pairs(5), &gen_items(5), &cfg(0.3, 5, 500)).unwrap();
        let report = empirical_mix_report(&stream).unwrap();
        let sum: f64 = report.proportions.values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(report.generation_fraction > 0.2 && report.generation_fraction < 0.4);
    }

    #[test]
    fn single_view_report() {
        let stream = mix_streams(&rank_pairs(5), &gen_items(5), &cfg(0.0, 5, 100)).unwrap();
        let report = empirical_mix_report(&stream).unwrap();
        assert_eq!(report.proportions.len(), 1);
        assert_eq!(report.proportions[&View::Rank], 1.0);
        assert_eq!(report.generation_fraction, 0.0);
    }

    #[test]
    fn empty_stream_report_is_error() {
        assert!(empirical_mix_report(&[]).is_err());
    }

    #[test]
    fn long_run_generation_fraction_near_eta() {
        let stream = mix_streams(&rank_pairs(7), &gen_items(7), &cfg(0.15, 42, 100_000)).unwrap();
        let report = empirical_mix_report(&stream).unwrap();
        assert!(
            (0.14..=0.16).contains(&report.generation_fraction),
            "{}",
            report.generation_fraction
        );
    }

    #[test]
    fn stub_loss_counting_identity() {
        // with constant per-slot losses, the stream mean equals the
        // proportion-weighted mean of per-view losses
        let stream = mix_streams(&rank_pairs(8), &gen_items(8), &cfg(0.25, 11, 4000)).unwrap();
        let stub = |v: View| if v.is_ranking() { 3.25f64 } else { 0.5f64 };
        let mean = stream.iter().map(|e| stub(e.view)).sum::<f64>() / stream.len() as f64;
        let report = empirical_mix_report(&stream).unwrap();
        let weighted: f64 = report
            .proportions
            .iter()
            .map(|(&v, &p)| p * stub(v))
            .sum();
        assert!((mean - weighted).abs() < 1e-12);
    }

    #[test]
    fn epoch_shuffle_is_deterministic_and_preserves_pairs() {
        let pairs = rank_pairs(4);
        let mut cfg = cfg(0.0, 3, 24);
        cfg.epoch_shuffle_seed = Some(99);
        let a = mix_streams(&pairs, &[], &cfg).unwrap();
        let b = mix_streams(&pairs, &[], &cfg).unwrap();
        assert_eq!(a, b);
        // second epoch (instances 8..16) still keeps true/false adjacent
        for i in (8..16).step_by(2) {
            assert_eq!(a[i].target, "true");
            assert_eq!(a[i + 1].target, "false");
            let src_true = &a[i].source;
            let src_false = &a[i + 1].source;
            let q_true = src_true.split(" Document:").next().unwrap();
            let q_false = src_false.split(" Document:").next().unwrap();
            assert_eq!(q_true, q_false);
        }
    }
}
