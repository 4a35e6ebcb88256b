//! Discretization and plug-in information measures over sensor recordings.
//!
//! Sensor traces are binned into symbol sequences over a fixed per-channel
//! range, and entropy / one-step predictive information (the mutual
//! information of consecutive symbols) are estimated from empirical
//! histograms with base-2 logarithms. High-dimensional traces are handled
//! by averaging normalized pairwise statistics over randomly sampled
//! channel pairs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A discretized single- or joint-channel recording.
///
/// Every symbol lies in `0..alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidConfig(
                "alphabet size must be at least 1".into(),
            ));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::InvalidConfig(format!(
                "symbol {bad} out of range for alphabet size {alphabet_size}"
            )));
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A multichannel time series with declared per-channel value ranges.
///
/// The ranges are the fixed physical bounds used for binning; recorded
/// values are clamped into their channel's range on ingestion so that the
/// discretization is stationary across episodes.
#[derive(Debug, Clone)]
pub struct SensorTrace {
    /// One inner vector per channel, all of identical length.
    values: Vec<Vec<f64>>,
    ranges: Vec<(f64, f64)>,
}

impl SensorTrace {
    /// Creates an empty trace with one `(min, max)` range per channel.
    pub fn new(ranges: Vec<(f64, f64)>) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::InvalidConfig(
                "a trace needs at least one channel".into(),
            ));
        }
        for (i, &(lo, hi)) in ranges.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidConfig(format!(
                    "channel {i} range [{lo}, {hi}] is not a finite interval"
                )));
            }
        }
        let values = vec![Vec::new(); ranges.len()];
        Ok(Self { values, ranges })
    }

    /// Builds a trace directly from per-channel value vectors.
    pub fn from_channels(channels: Vec<Vec<f64>>, ranges: Vec<(f64, f64)>) -> Result<Self> {
        if channels.len() != ranges.len() {
            return Err(Error::InputMismatch(format!(
                "{} channels but {} ranges",
                channels.len(),
                ranges.len()
            )));
        }
        let mut trace = Self::new(ranges)?;
        let len = channels.first().map_or(0, |c| c.len());
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InputMismatch(
                "all channels must have identical length".into(),
            ));
        }
        for t in 0..len {
            let step: Vec<f64> = channels.iter().map(|c| c[t]).collect();
            trace.push_step(&step)?;
        }
        Ok(trace)
    }

    /// Appends one step of readings (one value per channel), clamped into
    /// the declared ranges.
    pub fn push_step(&mut self, readings: &[f64]) -> Result<()> {
        if readings.len() != self.values.len() {
            return Err(Error::InputMismatch(format!(
                "got {} readings for {} channels",
                readings.len(),
                self.values.len()
            )));
        }
        for (c, &v) in readings.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("reading on channel {c}")));
            }
            let (lo, hi) = self.ranges[c];
            self.values[c].push(v.clamp(lo, hi));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.values.len()
    }

    /// Number of recorded steps.
    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> Result<&[f64]> {
        self.values
            .get(index)
            .map(|v| v.as_slice())
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "channel index {index} out of range ({} channels)",
                    self.values.len()
                ))
            })
    }

    pub fn range(&self, index: usize) -> Result<(f64, f64)> {
        self.ranges.get(index).copied().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "channel index {index} out of range ({} channels)",
                self.ranges.len()
            ))
        })
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }
}

/// Distinct unordered channel pairs used for pairwise approximations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorPairing {
    pairs: Vec<(usize, usize)>,
}

impl SensorPairing {
    /// Validates that all pairs are distinct as unordered pairs with
    /// `first != second` and indices below `channels`.
    pub fn new(pairs: Vec<(usize, usize)>, channels: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(k, l) in &pairs {
            if k == l {
                return Err(Error::InvalidConfig(format!("pair ({k}, {l}) is degenerate")));
            }
            if k >= channels || l >= channels {
                return Err(Error::InvalidConfig(format!(
                    "pair ({k}, {l}) out of range for {channels} channels"
                )));
            }
            if !seen.insert((k.min(l), k.max(l))) {
                return Err(Error::InvalidConfig(format!(
                    "pair ({k}, {l}) appears more than once"
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Bins one channel of a trace into uniform-width bins over its declared
/// range. A value equal to the range maximum maps to the top bin.
pub fn discretize(trace: &SensorTrace, channel: usize, bins: usize) -> Result<SymbolSequence> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if trace.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "trace must contain at least 2 steps, got {}",
            trace.len()
        )));
    }
    let values = trace.channel(channel)?;
    let (lo, hi) = trace.range(channel)?;
    let width = hi - lo;
    let symbols = values
        .iter()
        .map(|&v| {
            let idx = ((v - lo) / width * bins as f64).floor() as usize;
            idx.min(bins - 1)
        })
        .collect();
    SymbolSequence::new(symbols, bins)
}

/// Shannon entropy of counts in bits, with zero-count bins contributing
/// zero (plug-in / maximum-likelihood estimate).
fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

/// Plug-in Shannon entropy of the empirical symbol distribution, in bits.
pub fn entropy(seq: &SymbolSequence) -> Result<f64> {
    if seq.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot compute entropy of an empty sequence".into(),
        ));
    }
    let mut counts = vec![0usize; seq.alphabet_size()];
    for &s in seq.symbols() {
        counts[s] += 1;
    }
    // Rounding can push the estimate a hair past the log2 |alphabet| bound.
    Ok(entropy_of_counts(&counts, seq.len()).min((seq.alphabet_size() as f64).log2()))
}

/// One-step predictive information in bits: the plug-in mutual information
/// `I(S_{t+1}; S_t)` of the empirical distribution over consecutive symbol
/// pairs, computed as `H(S_t) + H(S_{t+1}) - H(S_t, S_{t+1})`.
pub fn one_step_pi(seq: &SymbolSequence) -> Result<f64> {
    if seq.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "one-step predictive information needs at least 2 symbols, got {}",
            seq.len()
        )));
    }
    let a = seq.alphabet_size();
    let mut joint = vec![0usize; a * a];
    let mut from = vec![0usize; a];
    let mut to = vec![0usize; a];
    let symbols = seq.symbols();
    for w in symbols.windows(2) {
        joint[w[0] * a + w[1]] += 1;
        from[w[0]] += 1;
        to[w[1]] += 1;
    }
    let pairs = seq.len() - 1;
    let mi = entropy_of_counts(&from, pairs) + entropy_of_counts(&to, pairs)
        - entropy_of_counts(&joint, pairs);
    Ok(mi.max(0.0))
}

fn alphabet_bound(alphabet_size: usize) -> Result<f64> {
    if alphabet_size < 2 {
        return Err(Error::InvalidConfig(format!(
            "normalization needs an alphabet of at least 2 symbols, got {alphabet_size}"
        )));
    }
    Ok((alphabet_size as f64).log2())
}

/// One-step predictive information divided by its upper bound
/// `log2 |alphabet|`; lies in `[0, 1]`.
pub fn normalized_pi(seq: &SymbolSequence) -> Result<f64> {
    let bound = alphabet_bound(seq.alphabet_size())?;
    Ok((one_step_pi(seq)? / bound).clamp(0.0, 1.0))
}

/// Entropy divided by its upper bound `log2 |alphabet|`; lies in `[0, 1]`.
pub fn normalized_entropy(seq: &SymbolSequence) -> Result<f64> {
    let bound = alphabet_bound(seq.alphabet_size())?;
    Ok((entropy(seq)? / bound).clamp(0.0, 1.0))
}

/// Draws `n` distinct unordered channel pairs uniformly without
/// replacement. Deterministic for a fixed generator state.
pub fn sample_pairings<R: Rng>(channels: usize, n: usize, rng: &mut R) -> Result<SensorPairing> {
    let total = channels.saturating_mul(channels.saturating_sub(1)) / 2;
    if n > total {
        return Err(Error::InvalidConfig(format!(
            "requested {n} pairings but only {total} distinct pairs exist for {channels} channels"
        )));
    }
    let mut all: Vec<(usize, usize)> = Vec::with_capacity(total);
    for k in 0..channels {
        for l in (k + 1)..channels {
            all.push((k, l));
        }
    }
    // Partial Fisher-Yates: the first n slots are a uniform sample.
    for i in 0..n {
        let j = rng.random_range(i..total);
        all.swap(i, j);
    }
    all.truncate(n);
    SensorPairing::new(all, channels)
}

fn joint_pair_sequence(
    trace: &SensorTrace,
    k: usize,
    l: usize,
    bins: usize,
) -> Result<SymbolSequence> {
    let a = discretize(trace, k, bins)?;
    let b = discretize(trace, l, bins)?;
    let symbols = a
        .symbols()
        .iter()
        .zip(b.symbols())
        .map(|(&x, &y)| x * bins + y)
        .collect();
    SymbolSequence::new(symbols, bins * bins)
}

fn pairwise<F>(
    trace: &SensorTrace,
    pairing: &SensorPairing,
    bins_per_channel: usize,
    measure: F,
) -> Result<(f64, f64)>
where
    F: Fn(&SymbolSequence) -> Result<f64>,
{
    if pairing.is_empty() {
        return Err(Error::InvalidConfig(
            "pairwise statistics need at least one sensor pair".into(),
        ));
    }
    let bound = alphabet_bound(bins_per_channel * bins_per_channel)?;
    let mut raw_sum = 0.0;
    for &(k, l) in pairing.pairs() {
        let seq = joint_pair_sequence(trace, k, l, bins_per_channel)?;
        raw_sum += measure(&seq)?;
    }
    let mean = (raw_sum / (pairing.len() as f64 * bound)).clamp(0.0, 1.0);
    Ok((mean, raw_sum))
}

/// Mean over the pairing of per-pair one-step predictive information on the
/// joint (product-alphabet) symbol stream, each term normalized by
/// `log2(bins^2)`; lies in `[0, 1]`.
pub fn pairwise_pi(
    trace: &SensorTrace,
    pairing: &SensorPairing,
    bins_per_channel: usize,
) -> Result<f64> {
    pairwise(trace, pairing, bins_per_channel, one_step_pi).map(|(mean, _)| mean)
}

/// Unnormalized sum of per-pair one-step predictive information, in bits.
pub fn pairwise_pi_sum(
    trace: &SensorTrace,
    pairing: &SensorPairing,
    bins_per_channel: usize,
) -> Result<f64> {
    pairwise(trace, pairing, bins_per_channel, one_step_pi).map(|(_, sum)| sum)
}

/// Mean over the pairing of per-pair joint entropy, each term normalized by
/// `log2(bins^2)`; lies in `[0, 1]`.
pub fn pairwise_entropy(
    trace: &SensorTrace,
    pairing: &SensorPairing,
    bins_per_channel: usize,
) -> Result<f64> {
    pairwise(trace, pairing, bins_per_channel, entropy).map(|(mean, _)| mean)
}

/// Unnormalized sum of per-pair joint entropies, in bits.
pub fn pairwise_entropy_sum(
    trace: &SensorTrace,
    pairing: &SensorPairing,
    bins_per_channel: usize,
) -> Result<f64> {
    pairwise(trace, pairing, bins_per_channel, entropy).map(|(_, sum)| sum)
}
