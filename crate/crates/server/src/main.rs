use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use sketchsearch::classifier::{read_weights, NeuralRecognizer, Recognizer, TemplateRecognizer};
use sketchsearch::corpus::load_index;
use sketchsearch::search::MetricWeights;
use sketchsearch_server::{router, AppState, ServiceConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Backend {
    Template,
    Neural,
}

/// Serve sketch search over HTTP.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(long, env = "SKETCHSEARCH_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Index file written by `sketchsearch index build`.
    #[arg(long, env = "SKETCHSEARCH_INDEX")]
    index: PathBuf,
    /// Directory holding `<id>.thumb.<ext>` and `<id>.full.<ext>` images.
    #[arg(long, env = "SKETCHSEARCH_SCREENS")]
    screens: Option<PathBuf>,
    /// Idle session lifetime in seconds.
    #[arg(long, env = "SKETCHSEARCH_SESSION_TTL", default_value_t = 3600)]
    session_ttl: u64,
    #[arg(long, env = "SKETCHSEARCH_RECOGNIZER", value_enum, default_value_t = Backend::Template)]
    recognizer: Backend,
    /// Weights file for the neural recognizer.
    #[arg(long, env = "SKETCHSEARCH_MODEL")]
    model: Option<PathBuf>,
    #[arg(long, env = "SKETCHSEARCH_POSITION_WEIGHT", default_value_t = 0.7)]
    position_weight: f64,
    #[arg(long, env = "SKETCHSEARCH_SHAPE_WEIGHT", default_value_t = 0.3)]
    shape_weight: f64,
    #[arg(long, env = "SKETCHSEARCH_FEEDBACK_LOG", default_value = "feedback.jsonl")]
    feedback_log: PathBuf,
}

async fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let index = Arc::new(load_index(&args.index)?);
    let recognizer: Arc<dyn Recognizer> = match args.recognizer {
        Backend::Template => Arc::new(TemplateRecognizer::shipped()),
        Backend::Neural => {
            let path = args.model.ok_or("--model is required with --recognizer neural")?;
            Arc::new(NeuralRecognizer::new(read_weights(path)?))
        }
    };
    let config = ServiceConfig {
        session_ttl: Duration::from_secs(args.session_ttl),
        screens_dir: args.screens,
        feedback_log: args.feedback_log,
        weights: MetricWeights::new(args.position_weight, args.shape_weight)?,
    };
    let state = AppState::new(index, recognizer, config)?;
    tracing::info!(screens = state.index().len(), addr = %args.listen, "serving");

    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let dropped = sweeper.sessions().sweep();
            if dropped > 0 {
                tracing::debug!(dropped, "expired sessions");
            }
        }
    });

    let listener = tokio::net::TcpListener::bind(args.listen).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let args = Args::parse();
    if let Err(e) = run(args).await {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}
