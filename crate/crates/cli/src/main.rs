//! `fmcts`: train local-pattern features from self-play, evaluate the
//! feature-biased searcher against plain UCT, and inspect feature files.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fmcts_core::{
    builtin_games, compile, curve_csv, learning_curve, match_csv, measure_slowdown, parse_game,
    play_match, prune, run_self_play, serialize_feature_set, slowdown_csv, AgentSpec, FeatureSet,
    Game, LinearPolicy, MatchConfig, SearchBudget, TrainConfig,
};

#[derive(Parser)]
#[command(name = "fmcts", version, about = "Feature-biased MCTS workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run self-play training and write checkpoints plus a log
    Train(TrainArgs),
    /// Play evaluation matches from a feature file or a checkpoint directory
    Eval(EvalArgs),
    /// Inspect or prune feature files
    Features {
        #[command(subcommand)]
        command: FeaturesCommand,
    },
    /// Measure the iteration slowdown of the biased searcher
    Slowdown(SlowdownArgs),
    /// Query the shipped games
    Games {
        #[command(subcommand)]
        command: GamesCommand,
    },
}

/// Exactly one budget mode per run.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct BudgetArgs {
    /// Search iterations per move (deterministic)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    iterations: Option<u32>,
    /// Wall-clock milliseconds per move
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    time_ms: Option<u64>,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        match (self.iterations, self.time_ms) {
            (Some(n), None) => SearchBudget::Iterations(n),
            (None, Some(ms)) => SearchBudget::WallClock(Duration::from_millis(ms)),
            _ => unreachable!("clap enforces exactly one budget flag"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    AddRandom,
    CombineRandom,
    CombineMax,
    Correlation,
}

impl From<StrategyArg> for fmcts_core::DiscoveryStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::AddRandom => Self::AddRandom,
            StrategyArg::CombineRandom => Self::CombineRandom,
            StrategyArg::CombineMax => Self::CombineMax,
            StrategyArg::Correlation => Self::CorrelationBased,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Built-in game name or path to a .lud-mini file
    #[arg(long)]
    game: String,
    /// Feature discovery strategy
    #[arg(long, value_enum, default_value = "correlation")]
    strategy: StrategyArg,
    /// Number of self-play games
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    games: u32,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for checkpoints and the training log
    #[arg(long)]
    out: PathBuf,
    /// SGD step size
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// L2 regularisation coefficient
    #[arg(long, default_value_t = 1e-6)]
    lambda: f64,
    #[arg(long, default_value_t = 20)]
    sgd_batch: usize,
    #[arg(long, default_value_t = 30)]
    discovery_batch: usize,
    /// PUCT exploration constant
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    c_puct: f64,
    /// Checkpoint schedule (game counts); the final game is always written
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u32>>,
    /// Start from an existing feature file instead of the atomic set
    #[arg(long)]
    features: Option<PathBuf>,
    /// Disable feature discovery (retrain weights on a frozen set)
    #[arg(long)]
    freeze: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpponentArg {
    Uct,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalAgentArg {
    Biased,
    Greedy,
}

#[derive(Args)]
struct EvalArgs {
    /// Built-in game name or path to a .lud-mini file
    #[arg(long)]
    game: String,
    /// Feature file, or a directory of checkpoint-<g>.feat files for a
    /// learning curve
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_enum, default_value = "uct")]
    opponent: OpponentArg,
    /// Agent under evaluation
    #[arg(long, value_enum, default_value = "biased")]
    agent: EvalAgentArg,
    /// Evaluation games per match
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV: per-game records for a single match, curve rows for a
    /// checkpoint directory
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    c_puct: f64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    c_ucb1: f64,
}

#[derive(Subcommand)]
enum FeaturesCommand {
    /// Print features sorted by absolute weight, rendered on the board
    Show {
        #[arg(long)]
        file: PathBuf,
        /// How many features to print
        #[arg(long, default_value_t = 15)]
        top: usize,
        /// Game providing the board geometry
        #[arg(long)]
        game: String,
    },
    /// Keep only the k features with the greatest absolute weights
    Prune {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 15)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SlowdownArgs {
    #[arg(long)]
    game: String,
    #[arg(long)]
    features: PathBuf,
    /// Wall-clock milliseconds per move
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    time_ms: u64,
    /// Fresh games to sample (two moves each)
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    games: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    c_puct: f64,
}

#[derive(Subcommand)]
enum GamesCommand {
    /// List built-in games
    List,
}

fn load_game(spec: &str) -> Result<Game> {
    let source = if let Some((_, src)) = builtin_games().iter().find(|(n, _)| *n == spec) {
        (*src).to_string()
    } else {
        let path = Path::new(spec);
        if !path.exists() {
            bail!(
                "unknown game `{spec}`: not a built-in ({}) and not a file",
                builtin_games().iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            );
        }
        fs::read_to_string(path).with_context(|| format!("reading {spec}"))?
    };
    let rules = parse_game(&source).map_err(|e| anyhow::anyhow!("parsing {spec}: {e}"))?;
    Ok(Game::new(rules)?)
}

fn load_features(path: &Path) -> Result<(FeatureSet, Vec<f64>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    fmcts_core::parse_feature_set(&text)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn threads_from_env() -> Option<usize> {
    std::env::var("FMCTS_THREADS").ok().and_then(|v| v.parse().ok())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let initial = match &args.features {
        Some(path) => Some(load_features(path)?),
        None => None,
    };
    let mut config = TrainConfig::new(args.games, args.budget.budget(), args.seed);
    config.strategy = args.strategy.into();
    config.step_size = args.alpha;
    config.l2 = args.lambda;
    config.sgd_batch = args.sgd_batch;
    config.discovery_batch = args.discovery_batch;
    config.exploration = args.c_puct;
    config.freeze = args.freeze;
    if let Some(schedule) = &args.checkpoints {
        config.checkpoints = schedule.clone();
    }

    let artifacts = run_self_play(&game, initial, &config);

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for (g, text) in &artifacts.checkpoints {
        fs::write(args.out.join(format!("checkpoint-{g}.feat")), text)?;
    }
    fs::write(args.out.join("train-log.csv"), artifacts.log_csv())?;

    let last = artifacts.log.last().expect("at least one game");
    println!(
        "trained {} games of {}: {} features, final buffer cross-entropy {:.4}",
        args.games,
        game.rules().name,
        artifacts.features.len(),
        last.buffer_cross_entropy,
    );
    println!("checkpoints and train-log.csv written to {}", args.out.display());
    Ok(())
}

/// Checkpoint files `checkpoint-<g>.feat` in a directory, sorted by g.
fn collect_checkpoints(dir: &Path) -> Result<Vec<(u32, FeatureSet, Vec<f64>)>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some(label) = name
            .strip_prefix("checkpoint-")
            .and_then(|n| n.strip_suffix(".feat"))
            .and_then(|n| n.parse::<u32>().ok())
        else {
            continue;
        };
        let (features, weights) = load_features(&path)?;
        found.push((label, features, weights));
    }
    if found.is_empty() {
        bail!("no checkpoint-<g>.feat files in {}", dir.display());
    }
    found.sort_by_key(|(g, _, _)| *g);
    Ok(found)
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let cfg = MatchConfig {
        games: args.n,
        budget: args.budget.budget(),
        seed: args.seed,
        threads: threads_from_env(),
    };
    let opponent = match args.opponent {
        OpponentArg::Uct => AgentSpec::Uct { exploration: args.c_ucb1 },
        OpponentArg::Random => AgentSpec::Random,
    };

    if args.features.is_dir() {
        let checkpoints = collect_checkpoints(&args.features)?;
        let rows = learning_curve(&game, &checkpoints, &opponent, args.c_puct, &cfg);
        fs::write(&args.out, curve_csv(&rows))?;
        for row in &rows {
            println!(
                "after {:>4} games: win rate {:.3} [{:.3}, {:.3}] with {} features",
                row.games_of_self_play, row.win_rate, row.ci_lo, row.ci_hi, row.feature_count
            );
        }
        println!("curve written to {}", args.out.display());
        return Ok(());
    }

    let (features, weights) = load_features(&args.features)?;
    let compiled = Arc::new(compile(&features, &game.board_handle()));
    let policy = Arc::new(LinearPolicy::with_weights(weights, 0.05, 1e-6));
    let agent = match args.agent {
        EvalAgentArg::Biased => AgentSpec::Biased {
            exploration: args.c_puct,
            policy,
            features: compiled,
        },
        EvalAgentArg::Greedy => AgentSpec::Greedy { policy, features: compiled },
    };
    let result = play_match(&game, &agent, &opponent, &cfg);
    fs::write(&args.out, match_csv(&result))?;
    println!(
        "{} games: win rate {:.3}, 95% CI [{:.3}, {:.3}] (ties count half)",
        result.games, result.win_rate_a, result.ci95.0, result.ci95.1
    );
    println!("records written to {}", args.out.display());
    Ok(())
}

fn cmd_features_show(file: &Path, top: usize, game_spec: &str) -> Result<()> {
    let game = load_game(game_spec)?;
    let (features, weights) = load_features(file)?;
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .abs()
            .partial_cmp(&weights[a].abs())
            .expect("finite weights")
            .then(a.cmp(&b))
    });
    for &idx in order.iter().take(top) {
        let feature = features.iter().nth(idx).expect("index in range");
        println!("feature {idx}: weight {}", weights[idx]);
        print!("{}", render::render_feature(&game, feature));
        println!();
    }
    Ok(())
}

fn cmd_features_prune(file: &Path, k: usize, out: &Path) -> Result<()> {
    let (features, weights) = load_features(file)?;
    if features.len() <= k {
        eprintln!(
            "warning: file has {} features, k = {k}: copying unchanged",
            features.len()
        );
    }
    let (kept, kept_weights) = prune(&features, &weights, k);
    fs::write(out, serialize_feature_set(&kept, &kept_weights))?;
    println!("kept {} of {} features -> {}", kept.len(), features.len(), out.display());
    Ok(())
}

fn cmd_slowdown(args: &SlowdownArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let (features, weights) = load_features(&args.features)?;
    let compiled = Arc::new(compile(&features, &game.board_handle()));
    let policy = Arc::new(LinearPolicy::with_weights(weights, 0.05, 1e-6));
    let report = measure_slowdown(
        &game,
        &policy,
        &compiled,
        SearchBudget::WallClock(Duration::from_millis(args.time_ms)),
        args.games,
        args.c_puct,
        args.seed,
    )?;
    fs::write(&args.out, slowdown_csv(&report))?;
    println!(
        "mean iterations: plain {:.1}, biased {:.1}, slowdown ratio {:.3}",
        report.mean_iterations_uct, report.mean_iterations_biased, report.ratio
    );
    Ok(())
}

fn cmd_games_list() -> Result<()> {
    for (name, src) in builtin_games() {
        let game = Game::new(parse_game(src).expect("built-ins parse"))?;
        println!(
            "{name:15} {} ({} vertices)",
            game.rules().name,
            game.board().vertex_count()
        );
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Features { command } => match command {
            FeaturesCommand::Show { file, top, game } => cmd_features_show(file, *top, game),
            FeaturesCommand::Prune { file, k, out } => cmd_features_prune(file, *k, out),
        },
        Command::Slowdown(args) => cmd_slowdown(args),
        Command::Games { command } => match command {
            GamesCommand::List => cmd_games_list(),
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
