//! Per-session counts and ratios, and the mean ± standard-error report over
//! several sessions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub enemies_spawned: u64,
    pub enemies_killed: u64,
    pub elements_spawned: u64,
    pub elements_noticed: u64,
    pub deaths: u64,
    /// Percent of spawned enemies that were killed.
    pub kill_ratio: f64,
    /// Percent of spawned obstacles and enemies that were noticed.
    pub noticed_ratio: f64,
}

pub fn percent(count: u64, of: u64) -> f64 {
    if of == 0 {
        0.0
    } else {
        100.0 * count as f64 / of as f64
    }
}

impl SessionMetrics {
    pub fn from_counts(enemies_spawned: u64, enemies_killed: u64, elements_spawned: u64, elements_noticed: u64, deaths: u64) -> Self {
        Self {
            enemies_spawned,
            enemies_killed,
            elements_spawned,
            elements_noticed,
            deaths,
            kill_ratio: percent(enemies_killed, enemies_spawned),
            noticed_ratio: percent(elements_noticed, elements_spawned),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSte {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    /// Standard error of the mean, `std / sqrt(n)`.
    pub ste: f64,
}

impl MeanSte {
    /// A single value has zero spread by convention.
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Some(Self { mean, std: 0.0, ste: 0.0 });
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        Some(Self {
            mean,
            std,
            ste: std / (n as f64).sqrt(),
        })
    }
}

impl std::fmt::Display for MeanSte {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.1} ± {:.1}", self.mean, self.ste)
    }
}

/// Table-style summary: killed-enemy ratio, noticed-element ratio and deaths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub sessions: usize,
    pub kill_ratio: MeanSte,
    pub noticed_ratio: MeanSte,
    pub deaths: MeanSte,
}

pub fn aggregate_sessions(sessions: &[SessionMetrics]) -> Option<AggregateReport> {
    let col = |f: fn(&SessionMetrics) -> f64| MeanSte::of(&sessions.iter().map(f).collect::<Vec<_>>());
    Some(AggregateReport {
        sessions: sessions.len(),
        kill_ratio: col(|m| m.kill_ratio)?,
        noticed_ratio: col(|m| m.noticed_ratio)?,
        deaths: col(|m| m.deaths as f64)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_are_percentages() {
        let m = SessionMetrics::from_counts(1000, 656, 0, 0, 0);
        assert!((m.kill_ratio - 65.6).abs() < 1e-12);
        assert_eq!(m.noticed_ratio, 0.0);
    }

    #[test]
    fn mean_and_standard_error() {
        let m = MeanSte::of(&[60.0, 70.0, 80.0]).unwrap();
        assert_eq!(m.mean, 70.0);
        assert!((m.std - 10.0).abs() < 1e-12);
        assert!((m.ste - 10.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((m.ste - 5.7735).abs() < 1e-4);

        let same = MeanSte::of(&[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(same.ste, 0.0);
        let one = MeanSte::of(&[42.0]).unwrap();
        assert_eq!((one.mean, one.ste), (42.0, 0.0));
        assert!(MeanSte::of(&[]).is_none());
        assert!(aggregate_sessions(&[]).is_none());
    }
}
