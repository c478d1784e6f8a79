//! Shared synthetic datasets for the benchmarks.

use revmeta_core::{EffectEstimate, Measure, StudyEstimate, StudyTable, TwoByTwoTable};

/// Deterministic pseudo-random 2x2 tables; a tiny LCG keeps the crate free
/// of RNG dependencies and the inputs reproducible.
pub fn synthetic_tables(k: usize) -> Vec<StudyTable> {
    let mut state: u64 = 0x5DEECE66D;
    let mut next = |modulus: u64| {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 33) % modulus
    };
    (0..k)
        .map(|i| {
            let total1 = 20 + next(400) as u32;
            let total2 = 20 + next(400) as u32;
            let events1 = 1 + next(u64::from(total1) - 1) as u32;
            let events2 = 1 + next(u64::from(total2) - 1) as u32;
            StudyTable {
                id: format!("Study {i:03}"),
                table: TwoByTwoTable::new(events1, total1, events2, total2).unwrap(),
            }
        })
        .collect()
}

pub fn synthetic_estimates(k: usize) -> Vec<StudyEstimate> {
    synthetic_tables(k)
        .into_iter()
        .map(|s| StudyEstimate {
            estimate: revmeta_core::odds_ratio(&s.table, 0.95),
            id: s.id,
        })
        .collect()
}

/// A right-skewed analysis-scale point set for trim-and-fill.
pub fn skewed_points(k: usize) -> Vec<StudyEstimate> {
    (0..k)
        .map(|i| {
            let centred = (i as f64 - k as f64 / 2.0) / k as f64;
            let value = centred + if i % 3 == 0 { 0.8 } else { 0.0 };
            StudyEstimate {
                id: format!("P{i:03}"),
                estimate: EffectEstimate::from_analysis(
                    Measure::OddsRatio,
                    value,
                    0.2 + 0.05 * (i % 7) as f64,
                    0.95,
                    false,
                ),
            }
        })
        .collect()
}

/// A MEDLINE export of `k` records.
pub fn synthetic_medline(k: usize) -> String {
    let mut out = String::new();
    for i in 0..k {
        out.push_str(&format!(
            "PMID- {pmid}\nTI  - Synthetic study number {i} with a title long enough to\n      wrap across continuation lines for benchmarking.\nAU  - Author A{i}\nAU  - Author B{i}\nTA  - J Synth Res\nDP  - {year} Jan\nVI  - {vol}\nPG  - {page}-{page_end}\n\n",
            pmid = 10_000_000 + i,
            year = 1990 + (i % 30),
            vol = 1 + i % 40,
            page = 100 + i,
            page_end = 110 + i,
        ));
    }
    out
}
