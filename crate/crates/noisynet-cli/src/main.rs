//! Command-line front end: estimate densities and error rates from noisy
//! network files, build coexpression networks from expression matrices,
//! generate constrained ground truths, run the simulation harness, and print
//! subgraph counts.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage or identifiability
//! refusal.

mod report;

use clap::{Args, Parser, Subcommand};
use noisynet::bootstrap::{bootstrap_samples_csv, joint_cis, joint_covariance};
use noisynet::coexpress::{bonferroni_level, coexpression_network};
use noisynet::error::Error as NetError;
use noisynet::generate::{generate_constrained, GraphTargets, DEFAULT_MAX_PROPOSALS};
use noisynet::graph::{clustering_coefficient, count_triangles, count_two_stars, edge_density};
use noisynet::io::{read_expression_csv, read_network, write_dense_csv, write_edge_list};
use noisynet::moments::{
    estimate_all_unknown, estimate_alpha_known, estimate_beta_known, estimate_both_known,
    EstimationMode, MomentTriple, DEFAULT_ALPHA0, DEFAULT_FP_MAX_ITER, DEFAULT_FP_TOL,
};
use noisynet::pattern::{c_hat, clustering_estimate, PatternKind, SubgraphPattern};
use noisynet::sim::{run_grid, standard_grid, SimulationConfig};
use noisynet::AdjacencyMatrix;
use report::{ClusteringReport, EstimateReportDoc, InputFile, PatternReport};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "noisynet",
    version,
    about = "Subgraph densities and error rates from noisy network replicates"
)]
struct Cli {
    /// Base RNG seed for anything stochastic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all available).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Confidence level for all intervals.
    #[arg(long, global = true, default_value_t = 0.95)]
    level: f64,

    /// Emit JSON (default for `estimate` and `coexpress`).
    #[arg(long, global = true)]
    json: bool,

    /// Emit CSV (default for `simulate` and `subgraph`).
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate error rates and subgraph densities from 1-3 network files.
    Estimate(EstimateArgs),
    /// Threshold Fisher-transformed correlations into coexpression networks.
    Coexpress(CoexpressArgs),
    /// Generate a graph with exact edge/two-star/triangle counts.
    Generate(GenerateArgs),
    /// Run replicated Monte-Carlo scenarios and report MAE/coverage tables.
    Simulate(SimulateArgs),
    /// Print edge, two-star and triangle counts and the clustering coefficient.
    Subgraph(SubgraphArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Network files (edge-list or dense CSV), replicates of one graph.
    #[arg(required = true)]
    networks: Vec<PathBuf>,

    /// Known spurious-edge rate. Omit to estimate it.
    #[arg(long)]
    alpha: Option<f64>,

    /// Known missed-edge rate. Omit to estimate it.
    #[arg(long)]
    beta: Option<f64>,

    /// Take alpha as the nominal Bonferroni testing level fwer/(p(p-1)/2)
    /// computed from the network size (the only accepted value is `nominal`).
    #[arg(long, value_name = "nominal", conflicts_with = "alpha")]
    assume_alpha: Option<String>,

    /// Family-wise error rate used with --assume-alpha nominal.
    #[arg(long, default_value_t = 0.05)]
    fwer: f64,

    /// Comma-separated pattern list: edge, two-star, triangle, open-triple,
    /// path:k, cycle:k.
    #[arg(long, default_value = "edge,two-star,triangle")]
    patterns: String,

    /// Bootstrap replicates for the density intervals (0 = point estimates
    /// and the delta interval only).
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,

    /// Dump the bootstrap statistics as CSV (one row per replicate).
    #[arg(long)]
    bootstrap_dump: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoexpressArgs {
    /// Expression CSV: header row with sample labels, one row per gene.
    expression: PathBuf,

    /// Family-wise error rate for the Bonferroni-corrected edge tests.
    #[arg(long, default_value_t = 0.05)]
    fwer: f64,

    /// Partition of sample columns into replicate sets, e.g. "0,2,4;1,3,5"
    /// (0-based, excluding the gene label column). Default: one set of all
    /// columns.
    #[arg(long)]
    groups: Option<String>,

    /// Output path prefix; writes `<prefix>.setK.edges` per replicate set.
    #[arg(long, default_value = "coexpression")]
    out_prefix: String,
}

#[derive(Args)]
struct GenerateArgs {
    /// Vertex count.
    #[arg(long)]
    p: usize,

    /// Edge density; the edge count is floor(delta * p(p-1)/2).
    #[arg(long, conflicts_with = "edges")]
    delta: Option<f64>,

    /// Exact edge count (alternative to --delta).
    #[arg(long)]
    edges: Option<usize>,

    /// Exact two-star count.
    #[arg(long = "two-stars")]
    two_stars: u64,

    /// Exact triangle count.
    #[arg(long)]
    triangles: u64,

    /// Proposal budget for the rewiring search.
    #[arg(long, default_value_t = DEFAULT_MAX_PROPOSALS)]
    max_iters: u64,

    /// Output file (edge-list format; a `.csv` extension switches to the
    /// dense format).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Row of the standard 16-row grid (1-based); may repeat.
    #[arg(long = "table1-row")]
    table1_rows: Vec<usize>,

    /// Run the whole 16-row grid.
    #[arg(long)]
    all_rows: bool,

    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long = "two-stars")]
    two_stars: Option<u64>,
    #[arg(long)]
    triangles: Option<u64>,

    /// Replications per scenario.
    #[arg(long, default_value_t = 500)]
    reps: usize,

    /// Bootstrap replicates per replication (0 disables the interval stage).
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,

    /// Estimation mode: both-unknown, alpha-known, beta-known, both-known.
    #[arg(long, default_value = "both-unknown")]
    mode: String,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SubgraphArgs {
    /// Network file (edge-list or dense CSV).
    network: PathBuf,
}

/// Errors with a process exit code attached.
enum CliError {
    Usage(String),
    Computation(String),
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        CliError::Computation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Computation(format!("i/o error: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if !(0.0 < cli.level && cli.level < 1.0) {
        return Err(CliError::Usage(format!(
            "--level {} outside (0, 1)",
            cli.level
        )));
    }
    match &cli.cmd {
        Cmd::Estimate(args) => cmd_estimate(cli, args),
        Cmd::Coexpress(args) => cmd_coexpress(cli, args),
        Cmd::Generate(args) => cmd_generate(cli, args),
        Cmd::Simulate(args) => cmd_simulate(cli, args),
        Cmd::Subgraph(args) => cmd_subgraph(cli, args),
    }
}

fn read_network_file(path: &Path) -> CliResult<(AdjacencyMatrix, InputFile)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Computation(format!("{}: {e}", path.display())))?;
    let net = read_network(&text)
        .map_err(|e| CliError::Computation(format!("{}: {e}", path.display())))?;
    Ok((net, InputFile::new(path, &text)))
}

/// Print to stdout, treating a closed pipe as a normal end of output.
fn print_stdout(content: &str) -> CliResult<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let done = out.write_all(content.as_bytes()).and_then(|_| {
        if content.ends_with('\n') {
            Ok(())
        } else {
            out.write_all(b"\n")
        }
    });
    match done {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(Into::into),
    }
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => print_stdout(content),
    }
}

fn cmd_estimate(cli: &Cli, args: &EstimateArgs) -> CliResult<()> {
    let mut networks = Vec::new();
    let mut inputs = Vec::new();
    for path in &args.networks {
        let (net, input) = read_network_file(path)?;
        networks.push(net);
        inputs.push(input);
    }
    let p = networks[0].p();
    for (net, path) in networks.iter().zip(&args.networks) {
        if net.p() != p {
            return Err(CliError::Usage(format!(
                "{} has {} vertices, expected {p}",
                path.display(),
                net.p()
            )));
        }
    }
    if networks.len() > 3 {
        return Err(CliError::Usage(format!(
            "at most 3 replicates are used, got {}",
            networks.len()
        )));
    }

    let alpha = match (&args.assume_alpha, args.alpha) {
        (Some(word), None) => {
            if word != "nominal" {
                return Err(CliError::Usage(format!(
                    "--assume-alpha accepts only `nominal`, got {word:?}"
                )));
            }
            if !(0.0 < args.fwer && args.fwer < 1.0) {
                return Err(CliError::Usage(format!(
                    "--fwer {} outside (0, 1)",
                    args.fwer
                )));
            }
            Some(bonferroni_level(p, args.fwer))
        }
        (None, a) => a,
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    let mode = match (alpha, args.beta) {
        (Some(_), Some(_)) => EstimationMode::BothKnown,
        (Some(_), None) => EstimationMode::AlphaKnown,
        (None, Some(_)) => EstimationMode::BetaKnown,
        (None, None) => EstimationMode::BothUnknown,
    };
    let needed = match mode {
        EstimationMode::BothKnown => 1,
        EstimationMode::AlphaKnown | EstimationMode::BetaKnown => 2,
        EstimationMode::BothUnknown => 3,
    };
    if networks.len() < needed {
        if mode == EstimationMode::BothUnknown {
            return Err(CliError::Usage(format!(
                "{} network(s) cannot identify the error rates: the complement graph \
                 observed with swapped rates yields exactly the same distribution, so no \
                 consistent estimate exists. Provide 3 replicates, or pass --alpha and/or \
                 --beta.",
                networks.len()
            )));
        }
        return Err(CliError::Usage(format!(
            "mode {mode} needs {needed} replicates, got {}",
            networks.len()
        )));
    }

    let refs: Vec<&AdjacencyMatrix> = networks.iter().take(needed).collect();
    let moments = MomentTriple::from_replicates(&refs)?;
    let est = match mode {
        EstimationMode::BothUnknown => estimate_all_unknown(
            &moments,
            DEFAULT_ALPHA0,
            DEFAULT_FP_TOL,
            DEFAULT_FP_MAX_ITER,
            cli.level,
        )?,
        EstimationMode::AlphaKnown => {
            estimate_alpha_known(alpha.expect("mode"), &moments, cli.level)?
        }
        EstimationMode::BetaKnown => {
            estimate_beta_known(args.beta.expect("mode"), &moments, cli.level)?
        }
        EstimationMode::BothKnown => estimate_both_known(
            alpha.expect("mode"),
            args.beta.expect("mode"),
            &moments,
            cli.level,
        )?,
    };

    let mut warnings = Vec::new();
    if est.out_of_range {
        warnings.push(
            "a raw estimate fell outside [0, 1]; clamped companions are reported alongside"
                .to_string(),
        );
    }
    if est.variance_floored {
        warnings.push("the plug-in variance for delta was floored at zero".to_string());
    }

    let pattern_names: Vec<String> = args
        .patterns
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let patterns: Vec<SubgraphPattern> = pattern_names
        .iter()
        .map(|name| SubgraphPattern::parse(name).map_err(|e| CliError::Usage(e.to_string())))
        .collect::<CliResult<_>>()?;

    let y = &networks[0];
    let (alpha_t, beta_t) = (est.alpha, est.beta);
    let estimates: Vec<_> = patterns
        .iter()
        .map(|pat| c_hat(y, pat, alpha_t, beta_t))
        .collect::<Result<_, _>>()?;

    let cis = if args.bootstrap > 0 && !patterns.is_empty() {
        match joint_covariance(
            y,
            &patterns,
            alpha_t,
            beta_t,
            est.delta,
            mode,
            args.bootstrap,
            cli.seed,
        ) {
            // no admissible resampler (e.g. a rate estimate at or below 0):
            // report point estimates without density intervals
            Err(NetError::NoValidGamma { reason, .. }) => {
                warnings.push(format!(
                    "bootstrap intervals skipped: no admissible resampling probabilities ({reason})"
                ));
                None
            }
            Err(e) => return Err(e.into()),
            Ok(vp) => {
                if let Some(dump) = &args.bootstrap_dump {
                    let samples = noisynet::bootstrap::bootstrap_samples(
                        y,
                        &patterns,
                        alpha_t,
                        beta_t,
                        args.bootstrap,
                        cli.seed,
                    )?;
                    std::fs::write(dump, bootstrap_samples_csv(&samples, &pattern_names))?;
                }
                let cis = joint_cis(&estimates, &vp, p, cli.level)?;
                if cis.variance_floored {
                    warnings.push("a negative estimated variance was floored at zero".to_string());
                }
                if cis.unstable_kappa3 {
                    warnings.push(
                        "1 - alpha - beta is below 0.1; corrected densities are numerically unstable"
                            .to_string(),
                    );
                }
                Some(cis)
            }
        }
    } else {
        None
    };

    let mut pattern_reports = Vec::new();
    for (q, (pat_name, est_q)) in pattern_names.iter().zip(&estimates).enumerate() {
        pattern_reports.push(PatternReport {
            pattern: pat_name.clone(),
            c_hat: est_q.c_hat,
            t_hat: est_q.t_hat,
            implied_count: est_q.implied_count,
            ci: cis.as_ref().map(|c| c.densities[q].into()),
            count_ci: cis.as_ref().and_then(|c| c.counts[q].map(Into::into)),
            variance_route: if cis.is_some() {
                "bootstrap-assembled".into()
            } else {
                "none".into()
            },
        });
    }

    let clustering = {
        let ts = estimates
            .iter()
            .position(|e| e.pattern.kind() == PatternKind::TwoStar);
        let tri = estimates
            .iter()
            .position(|e| e.pattern.kind() == PatternKind::Triangle);
        match (ts, tri) {
            (Some(s), Some(t)) if s < t => Some(ClusteringReport {
                gamma_hat: clustering_estimate(&estimates[s], &estimates[t])?,
                ci: cis
                    .as_ref()
                    .and_then(|c| c.clustering.map(|(_, iv)| iv.into())),
            }),
            _ => None,
        }
    };

    let doc = EstimateReportDoc::new(
        inputs,
        cli.seed,
        mode,
        cli.level,
        &moments,
        &est,
        pattern_reports,
        clustering,
        args.bootstrap,
        warnings,
    );
    let rendered = if cli.csv {
        doc.to_csv()
    } else {
        serde_json::to_string_pretty(&doc).expect("report serializes")
    };
    write_or_print(&args.out, &rendered)
}

fn parse_groups(spec: &str) -> CliResult<Vec<Vec<usize>>> {
    spec.split(';')
        .map(|set| {
            set.split(',')
                .map(|tok| {
                    tok.trim().parse::<usize>().map_err(|_| {
                        CliError::Usage(format!("bad column index {tok:?} in --groups"))
                    })
                })
                .collect::<CliResult<Vec<usize>>>()
        })
        .collect()
}

fn cmd_coexpress(_cli: &Cli, args: &CoexpressArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.expression)
        .map_err(|e| CliError::Computation(format!("{}: {e}", args.expression.display())))?;
    let mut em = read_expression_csv(&text)?;
    if let Some(spec) = &args.groups {
        em = em.with_grouping(parse_groups(spec)?)?;
    }
    let sets = em.replicate_sets();
    let alpha_b = bonferroni_level(em.n_genes(), args.fwer);

    #[derive(serde::Serialize)]
    struct SetSummary {
        path: String,
        columns: Vec<usize>,
        p: usize,
        edges: usize,
        density: f64,
    }
    #[derive(serde::Serialize)]
    struct CoexpressSummary {
        tool: String,
        input: InputFile,
        fwer: f64,
        alpha_nominal: f64,
        genes: usize,
        networks: Vec<SetSummary>,
    }

    let mut summaries = Vec::new();
    for (k, set) in sets.iter().enumerate() {
        let net = coexpression_network(&em, set, args.fwer)?;
        let path = format!("{}.set{}.edges", args.out_prefix, k + 1);
        std::fs::write(&path, write_edge_list(&net))?;
        summaries.push(SetSummary {
            path,
            columns: set.clone(),
            p: net.p(),
            edges: net.edge_count(),
            density: edge_density(&net),
        });
    }
    let summary = CoexpressSummary {
        tool: format!("noisynet {}", env!("CARGO_PKG_VERSION")),
        input: InputFile::new(&args.expression, &text),
        fwer: args.fwer,
        alpha_nominal: alpha_b,
        genes: em.n_genes(),
        networks: summaries,
    };
    print_stdout(&serde_json::to_string_pretty(&summary).expect("serializes"))
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> CliResult<()> {
    let targets = match (args.delta, args.edges) {
        (Some(delta), None) => {
            GraphTargets::from_density(args.p, delta, args.two_stars, args.triangles)?
        }
        (None, Some(edges)) => GraphTargets::new(args.p, edges, args.two_stars, args.triangles)?,
        (None, None) => {
            return Err(CliError::Usage("provide --delta or --edges".into()));
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let a = generate_constrained(&targets, cli.seed, args.max_iters)?;
    let text = if args.out.extension().is_some_and(|e| e == "csv") {
        write_dense_csv(&a)
    } else {
        write_edge_list(&a)
    };
    std::fs::write(&args.out, text)?;
    eprintln!(
        "wrote {} (p={}, edges={}, two_stars={}, triangles={})",
        args.out.display(),
        a.p(),
        a.edge_count(),
        count_two_stars(&a),
        count_triangles(&a)
    );
    Ok(())
}

fn parse_mode(s: &str) -> CliResult<EstimationMode> {
    match s {
        "both-unknown" | "both_unknown" => Ok(EstimationMode::BothUnknown),
        "alpha-known" | "alpha_known" => Ok(EstimationMode::AlphaKnown),
        "beta-known" | "beta_known" => Ok(EstimationMode::BetaKnown),
        "both-known" | "both_known" => Ok(EstimationMode::BothKnown),
        other => Err(CliError::Usage(format!("unknown mode {other:?}"))),
    }
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> CliResult<()> {
    let mode = parse_mode(&args.mode)?;
    let mut configs: Vec<SimulationConfig> = Vec::new();
    let grid = standard_grid(args.reps, args.bootstrap, cli.seed);
    if args.all_rows {
        configs.extend(grid.iter().copied());
    }
    for &row in &args.table1_rows {
        if row == 0 || row > grid.len() {
            return Err(CliError::Usage(format!(
                "--table1-row {row} outside 1..={}",
                grid.len()
            )));
        }
        configs.push(grid[row - 1]);
    }
    if let (Some(p), Some(delta), Some(n2), Some(n3)) =
        (args.p, args.delta, args.two_stars, args.triangles)
    {
        configs.push(SimulationConfig {
            p,
            delta,
            alpha: args.alpha,
            beta: args.beta,
            two_star_target: n2,
            triangle_target: n3,
            replications: args.reps,
            bootstrap_b: args.bootstrap,
            mode,
            base_seed: cli.seed,
            ci_level: cli.level,
        });
    } else if args.p.is_some()
        || args.delta.is_some()
        || args.two_stars.is_some()
        || args.triangles.is_some()
    {
        return Err(CliError::Usage(
            "custom scenarios need --p, --delta, --two-stars and --triangles".into(),
        ));
    }
    if configs.is_empty() {
        return Err(CliError::Usage(
            "nothing to run: pass --table1-row, --all-rows, or a custom scenario".into(),
        ));
    }
    for cfg in &mut configs {
        cfg.mode = mode;
        cfg.ci_level = cli.level;
    }
    let report = run_grid(&configs)?;
    let rendered = if cli.json {
        serde_json::to_string_pretty(&report).expect("report serializes")
    } else {
        report.to_csv()
    };
    write_or_print(&args.out, &rendered)?;
    for row in &report.rows {
        if let Some(err) = &row.error {
            eprintln!(
                "scenario p={} delta={} failed: {err}",
                row.config.p, row.config.delta
            );
        }
    }
    Ok(())
}

fn cmd_subgraph(cli: &Cli, args: &SubgraphArgs) -> CliResult<()> {
    let (net, input) = read_network_file(&args.network)?;
    let n2 = count_two_stars(&net);
    let n3 = count_triangles(&net);
    let gamma = clustering_coefficient(&net).ok();
    if cli.json {
        #[derive(serde::Serialize)]
        struct SubgraphOut {
            input: InputFile,
            p: usize,
            edges: usize,
            two_stars: u64,
            triangles: u64,
            clustering: Option<f64>,
        }
        let out = SubgraphOut {
            input,
            p: net.p(),
            edges: net.edge_count(),
            two_stars: n2,
            triangles: n3,
            clustering: gamma,
        };
        print_stdout(&serde_json::to_string_pretty(&out).expect("serializes"))?;
    } else {
        print_stdout(&format!(
            "edges,two_stars,triangles,clustering\n{},{},{},{}",
            net.edge_count(),
            n2,
            n3,
            gamma.map_or("NA".to_string(), |g| format!("{g}"))
        ))?;
    }
    Ok(())
}
