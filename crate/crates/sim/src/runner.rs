//! Drives whole sessions with a synthetic player and writes their artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gazerun_core::engine::{aggregate_sessions, write_trace, AggregateReport, AttentionMode};
use gazerun_core::{Digest, Engine, EventLog, InputFrame, SessionMetrics, SimConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::policy::{GazePolicy, Player};

#[derive(Debug, Clone)]
pub struct PlayedSession {
    pub metrics: SessionMetrics,
    pub log: EventLog,
    /// Every frame fed to the engine, one per tick.
    pub trace: Vec<InputFrame>,
}

impl PlayedSession {
    pub fn digest(&self) -> Digest {
        self.log.digest()
    }
}

/// Plays one full session. The policy's noise is seeded from the config seed.
pub fn play(config: &SimConfig, policy: &GazePolicy) -> Result<PlayedSession> {
    let mut engine = Engine::new(config.clone())?;
    if let GazePolicy::Scripted(frames) = policy {
        if let Some(last) = frames.last() {
            if last.tick >= engine.total_ticks() {
                bail!("trace frame at tick {} is past the session end", last.tick);
            }
        }
    }
    let mut player = Player::new(policy.clone(), config.seed);
    let mut trace = Vec::with_capacity(engine.total_ticks() as usize);
    while !engine.is_finished() {
        let frame = player.frame(&engine);
        engine.tick(&frame)?;
        trace.push(frame);
    }
    Ok(PlayedSession {
        metrics: engine.metrics(),
        log: engine.into_log(),
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub config: SimConfig,
    pub policy: GazePolicy,
    pub sessions: u32,
}

impl RunSpec {
    /// Config for session `n` (1-based): seeds are consecutive.
    pub fn session_config(&self, n: u32) -> SimConfig {
        SimConfig {
            seed: self.config.seed.wrapping_add(u64::from(n) - 1),
            ..self.config.clone()
        }
    }

    pub fn run(&self) -> Result<Vec<PlayedSession>> {
        if self.sessions == 0 {
            bail!("at least one session is required");
        }
        (1..=self.sessions)
            .into_par_iter()
            .map(|n| play(&self.session_config(n), &self.policy).with_context(|| format!("session {n}")))
            .collect()
    }
}

#[derive(Serialize)]
struct AggregateFile<'a> {
    policy: &'a str,
    attention_mode: AttentionMode,
    seed: u64,
    sessions: &'a [SessionMetrics],
    aggregate: AggregateReport,
}

pub fn session_dir(out: &Path, n: usize) -> PathBuf {
    out.join(format!("session_{n}"))
}

/// Writes the per-session files, `aggregate.json` and `digest.txt`.
pub fn write_outputs(out: &Path, spec: &RunSpec, played: &[PlayedSession]) -> Result<AggregateReport> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut digests = String::new();
    for (i, s) in played.iter().enumerate() {
        let n = i + 1;
        let dir = session_dir(out, n);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&s.metrics)?)?;
        fs::write(dir.join("events.ndjson"), s.log.to_ndjson())?;
        fs::write(dir.join("trace.csv"), write_trace(&s.trace))?;
        digests.push_str(&format!("session_{n} {}\n", s.digest()));
    }
    let metrics: Vec<SessionMetrics> = played.iter().map(|s| s.metrics).collect();
    let aggregate = aggregate_sessions(&metrics).context("no sessions")?;
    let file = AggregateFile {
        policy: spec.policy.name(),
        attention_mode: spec.config.attention_mode,
        seed: spec.config.seed,
        sessions: &metrics,
        aggregate: aggregate.clone(),
    };
    fs::write(out.join("aggregate.json"), serde_json::to_string_pretty(&file)?)?;
    fs::write(out.join("digest.txt"), digests)?;
    Ok(aggregate)
}

/// Parses a `digest.txt` into session number → digest.
pub fn parse_digests(text: &str) -> Result<BTreeMap<usize, Digest>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (name, hex) = line
            .split_once(char::is_whitespace)
            .with_context(|| format!("digest line {}: expected `session_<n> <hex>`", i + 1))?;
        let n: usize = name
            .strip_prefix("session_")
            .and_then(|s| s.parse().ok())
            .with_context(|| format!("digest line {}: bad session name {name:?}", i + 1))?;
        let d: Digest = hex
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("digest line {}: bad digest {hex:?}", i + 1))?;
        out.insert(n, d);
    }
    Ok(out)
}

/// Sessions whose digest differs from (or is missing in) the expected set.
pub fn digest_mismatches(expected: &BTreeMap<usize, Digest>, played: &[PlayedSession]) -> Vec<String> {
    let mut bad = Vec::new();
    for (i, s) in played.iter().enumerate() {
        let n = i + 1;
        match expected.get(&n) {
            Some(d) if *d == s.digest() => {}
            Some(d) => bad.push(format!("session_{n}: expected {d}, got {}", s.digest())),
            None => bad.push(format!("session_{n}: no expected digest")),
        }
    }
    for n in expected.keys().filter(|n| **n > played.len() || **n == 0) {
        bad.push(format!("session_{n}: not run"));
    }
    bad
}

/// One-line table row in the style `kill ratio 71.2 ± 1.3`.
pub fn summary_line(label: &str, r: &AggregateReport) -> String {
    format!(
        "{label:<10} kill% {:>6.2} ± {:>5.2}   noticed% {:>6.2} ± {:>5.2}   deaths {:>5.2} ± {:>4.2}",
        r.kill_ratio.mean, r.kill_ratio.ste, r.noticed_ratio.mean, r.noticed_ratio.ste, r.deaths.mean, r.deaths.ste
    )
}
