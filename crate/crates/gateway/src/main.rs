use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{ensure, Context, Result};
use clap::Parser;
use gazerun_core::SimConfig;
use gazerun_gateway::server;
use gazerun_gateway::GatewayConfig;

#[derive(Parser)]
#[command(name = "gazerun-gateway", version, about = "Serve live gaze-runner sessions over a websocket at /ws")]
struct Args {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// JSON engine config; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving one `session_<n>` folder per played session.
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    snapshot_hz: f64,
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt().with_target(false).init();
    let args = Args::parse();
    ensure!(args.snapshot_hz.is_finite() && args.snapshot_hz > 0.0, "--snapshot-hz must be positive");
    let sim = match &args.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(dir) = &args.record {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let cfg = GatewayConfig {
        sim,
        snapshot_hz: args.snapshot_hz,
        record: args.record,
        ..Default::default()
    };
    let (addr, handle) = server::spawn(SocketAddr::new(args.host, args.port), cfg).await?;
    tracing::info!("listening on ws://{addr}/ws");
    handle.await??;
    Ok(())
}
