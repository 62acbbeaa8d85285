//! Symbolic event streams and time-lagged mutual information.
//!
//! Days are coded on a four-state severity scale, windows of days are reduced
//! to their modal symbol, and MI is measured between one series at day `t` and
//! the modal symbol of another series over a window shifted by some offset.

use serde::{Deserialize, Serialize};

use crate::boot::{mi_boot, BootstrapConfig, Estimate};
use crate::error::{InfoError, Result};
use crate::info::JointCountMatrix;
use crate::par::map_indexed;
use crate::rng::child_seed;

/// Size of the severity codebook.
pub const CODEBOOK_SIZE: usize = 4;

/// Aggregated activity for one region and day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRecord {
    pub events: u64,
    /// Injuries plus deaths.
    pub casualties: u64,
}

impl DayRecord {
    pub fn new(events: u64, casualties: u64) -> Result<Self> {
        if casualties > 0 && events == 0 {
            return Err(InfoError::param("casualties reported on a day with no events"));
        }
        Ok(DayRecord { events, casualties })
    }
}

/// 0: no events; 1: events, no casualties; 2: one or two casualties;
/// 3: more than two.
pub fn encode_codebook(d: DayRecord) -> Result<u8> {
    let d = DayRecord::new(d.events, d.casualties)?;
    Ok(match (d.events, d.casualties) {
        (0, _) => 0,
        (_, 0) => 1,
        (_, 1..=2) => 2,
        _ => 3,
    })
}

/// A gap-free sequence of symbols from `0..alphabet`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSeries {
    symbols: Vec<u8>,
    alphabet: usize,
}

impl SymbolSeries {
    pub fn new(symbols: Vec<u8>, alphabet: usize) -> Result<Self> {
        if alphabet == 0 || alphabet > 256 {
            return Err(InfoError::param(format!("alphabet size {alphabet} outside 1..=256")));
        }
        if let Some(s) = symbols.iter().find(|&&s| s as usize >= alphabet) {
            return Err(InfoError::param(format!("symbol {s} outside alphabet of {alphabet}")));
        }
        Ok(SymbolSeries { symbols, alphabet })
    }

    /// A series over the four-state codebook.
    pub fn codebook(symbols: Vec<u8>) -> Result<Self> {
        SymbolSeries::new(symbols, CODEBOOK_SIZE)
    }

    pub fn from_days(days: &[DayRecord]) -> Result<Self> {
        let symbols = days.iter().map(|&d| encode_codebook(d)).collect::<Result<_>>()?;
        SymbolSeries::codebook(symbols)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Most frequent symbol in a window. Tied modes are sorted and the
/// lower-middle one is returned, so the result is always a symbol that occurs.
pub fn modal_symbol(window: &[u8]) -> Result<u8> {
    if window.is_empty() {
        return Err(InfoError::EmptySample);
    }
    let mut freq = [0u32; 256];
    for &s in window {
        freq[s as usize] += 1;
    }
    let top = *freq.iter().max().expect("nonempty");
    let tied: Vec<u8> = (0..=255u8).filter(|&s| freq[s as usize] == top).collect();
    Ok(tied[(tied.len() - 1) / 2])
}

/// One offset/window pair. Non-negative offsets look at `b`'s future
/// (`[t+d, t+d+w−1]`), negative ones at its past (`[t+d−w+1, t+d]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lag {
    pub offset: i64,
    pub window: usize,
}

impl Lag {
    /// Number of time indices whose window fits in a series of length `len`.
    pub fn valid_count(&self, len: usize) -> usize {
        (len as i64 - self.offset.abs() - self.window as i64 + 1).max(0) as usize
    }

    fn first_t(&self) -> usize {
        if self.offset >= 0 {
            0
        } else {
            (-self.offset) as usize + self.window - 1
        }
    }

    fn window_start(&self, t: usize) -> usize {
        if self.offset >= 0 {
            t + self.offset as usize
        } else {
            t + 1 - (-self.offset) as usize - self.window
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagSpec {
    pub lags: Vec<Lag>,
}

impl LagSpec {
    /// Every offset in `offsets` with the same window length.
    pub fn uniform(offsets: impl IntoIterator<Item = i64>, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(InfoError::param("window length must be at least 1"));
        }
        Ok(LagSpec {
            lags: offsets.into_iter().map(|offset| Lag { offset, window }).collect(),
        })
    }
}

/// Joint histogram of `(a_t, modal symbol of b over the lag window)` over every
/// valid `t`.
pub fn lagged_joint(a: &SymbolSeries, b: &SymbolSeries, lag: Lag) -> Result<JointCountMatrix> {
    if a.len() != b.len() {
        return Err(InfoError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if lag.window == 0 {
        return Err(InfoError::param("window length must be at least 1"));
    }
    let count = lag.valid_count(a.len());
    if count < 2 {
        return Err(InfoError::InsufficientData(format!(
            "offset {} with window {} leaves {count} time indices",
            lag.offset, lag.window
        )));
    }
    let cols = b.alphabet();
    let mut cells = vec![0u64; a.alphabet() * cols];
    let t0 = lag.first_t();
    for t in t0..t0 + count {
        let start = lag.window_start(t);
        let m = modal_symbol(&b.symbols[start..start + lag.window])?;
        cells[a.symbols[t] as usize * cols + m as usize] += 1;
    }
    JointCountMatrix::new(a.alphabet(), cols, cells)
}

/// Bootstrap-corrected MI for each lag. Each offset gets its own seed derived
/// from `cfg.seed`, so the curve does not depend on evaluation order.
pub fn lagged_mi_curve(
    a: &SymbolSeries,
    b: &SymbolSeries,
    spec: &LagSpec,
    cfg: &BootstrapConfig,
) -> Result<Vec<(i64, Estimate)>> {
    let results = map_indexed(cfg.execution, spec.lags.len(), |i| {
        let lag = spec.lags[i];
        let joint = lagged_joint(a, b, lag)?;
        let cfg = BootstrapConfig {
            seed: child_seed(cfg.seed, &[lag.offset as u64, lag.window as u64]),
            ..*cfg
        };
        Ok((lag.offset, mi_boot(&joint, &cfg)?))
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{entropy_of_counts, mi_of_cells};

    #[test]
    fn codebook_examples() {
        let code = |e, c| encode_codebook(DayRecord { events: e, casualties: c });
        assert_eq!(code(0, 0).unwrap(), 0);
        assert_eq!(code(2, 2).unwrap(), 2);
        assert_eq!(code(5, 0).unwrap(), 1);
        assert_eq!(code(1, 3).unwrap(), 3);
        assert!(code(0, 1).is_err());
    }

    #[test]
    fn codebook_is_monotone_in_casualties() {
        for events in 1..5 {
            let codes: Vec<u8> = (0..20).map(|c| encode_codebook(DayRecord { events, casualties: c }).unwrap()).collect();
            assert!(codes.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn modal_examples() {
        assert_eq!(modal_symbol(&[1, 1, 3]).unwrap(), 1);
        assert_eq!(modal_symbol(&[2]).unwrap(), 2);
        assert_eq!(modal_symbol(&[0, 0, 3, 3]).unwrap(), 0);
        assert_eq!(modal_symbol(&[3, 1, 2]).unwrap(), 2);
        assert!(modal_symbol(&[]).is_err());
    }

    #[test]
    fn window_placement() {
        let fut = Lag { offset: 2, window: 3 };
        assert_eq!((fut.first_t(), fut.window_start(0)), (0, 2));
        let past = Lag { offset: -2, window: 3 };
        // t = 4 looks at [0, 2]
        assert_eq!(past.first_t(), 4);
        assert_eq!(past.window_start(4), 0);
        assert_eq!(past.valid_count(10), 6);
        assert_eq!(fut.valid_count(10), 6);
    }

    #[test]
    fn sample_count_bookkeeping() {
        let a = SymbolSeries::codebook((0..50).map(|i| (i * 7 % 4) as u8).collect()).unwrap();
        for offset in -6..=6 {
            for window in 1..=4 {
                let lag = Lag { offset, window };
                let j = lagged_joint(&a, &a, lag).unwrap();
                assert_eq!(j.total() as i64, 50 - offset.abs() - window as i64 + 1);
            }
        }
        let short = SymbolSeries::codebook(vec![0, 1, 2]).unwrap();
        assert!(lagged_joint(&short, &short, Lag { offset: 2, window: 1 }).is_err());
    }

    #[test]
    fn lagged_joint_aligns_past_and_future() {
        let a = SymbolSeries::codebook(vec![0, 1, 2, 3, 0, 1, 2, 3]).unwrap();
        let b = SymbolSeries::codebook(vec![1, 2, 3, 0, 1, 2, 3, 0]).unwrap();
        // b_t = a_{t+1}, so a_t is b one day back: perfect dependence at offset −1
        let j = lagged_joint(&a, &b, Lag { offset: -1, window: 1 }).unwrap();
        for (i, row) in j.cells().chunks(4).enumerate() {
            for (k, &c) in row.iter().enumerate() {
                assert!(c == 0 || k == i, "row {i} col {k}");
            }
        }
    }

    #[test]
    fn self_information_at_zero_lag() {
        let a = SymbolSeries::codebook((0..400).map(|i| ((i * 2654435761u64) >> 7) as u8 % 4).collect()).unwrap();
        let spec = LagSpec::uniform([0], 1).unwrap();
        let r = lagged_mi_curve(&a, &a, &spec, &BootstrapConfig::monte_carlo(300, 1)).unwrap();
        let mut counts = [0u64; 4];
        for &s in a.symbols() {
            counts[s as usize] += 1;
        }
        let h = entropy_of_counts(&counts);
        assert!((r[0].1.value_bits - h).abs() < 4.0 * r[0].1.stderr_bits + 0.02);
    }

    #[test]
    fn modal_reduction_never_adds_information() {
        // Alphabet 3, window 3: compare against the full window configuration.
        let len = 12;
        for seed in 0..30u64 {
            let gen = |s: u64| -> Vec<u8> {
                (0..len).map(|i| ((s.wrapping_mul(6364136223846793005).wrapping_add(i as u64 * 1442695040888963407)) >> 33) as u8 % 3).collect()
            };
            let a = SymbolSeries::new(gen(seed), 3).unwrap();
            let b = SymbolSeries::new(gen(seed + 100), 3).unwrap();
            let lag = Lag { offset: 1, window: 3 };
            let modal = lagged_joint(&a, &b, lag).unwrap();
            let mut full = vec![0u64; 3 * 27];
            for t in 0..lag.valid_count(len) {
                let w = &b.symbols()[t + 1..t + 4];
                let code = w[0] as usize * 9 + w[1] as usize * 3 + w[2] as usize;
                full[a.symbols()[t] as usize * 27 + code] += 1;
            }
            let lhs = mi_of_cells(modal.cells(), 3, 3);
            let rhs = mi_of_cells(&full, 3, 27);
            assert!(lhs <= rhs + 1e-12);
        }
    }
}
