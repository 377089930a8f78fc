//! Command-line front end: run the full rank analysis on a web file, or
//! inspect the intermediate objects the analysis is built from — the
//! combinatorial bounds, the derivative-coefficient tables, the prolongation
//! matrices, and the connection/curvature at a chosen level.
//!
//! Exit codes: 0 when the analysis reaches a conclusion (or an inspection
//! subcommand succeeds), 2 when the analysis is inconclusive, 1 on input
//! errors (missing or malformed file, malformed point, pole at a fixed
//! point).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use webrank::connection::{connection_form, curvature, lift_sections};
use webrank::multi_index::enumerate_multi_indices;
use webrank::rational::format_rational;
use webrank::{
    analyze_rank, load_web_file, render_text, serialize_expression, AnalyzeOptions, Combinatorics,
    MultiIndex, Point, PointData, RationalMatrix, ReportDocument, Sampler, SectionFrame, Status,
    WebSpec,
};

#[derive(Parser)]
#[command(
    name = "webrank",
    version,
    about = "Exact rank analysis of codimension-one webs given by rational first integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full rank analysis on a web file and print a report.
    Analyze(AnalyzeArgs),
    /// Print the combinatorial profile of an (n, d) web: h0, c, beta, rank bounds.
    Combinatorics(CombinatoricsArgs),
    /// Print the derivative-coefficient tables of the first integrals at a point.
    Ctable(CtableArgs),
    /// Print the prolongation matrices evaluated at a point, with their ranks.
    Matrices(MatricesArgs),
    /// Build the connection at one level and print its form and curvature.
    Curvature(CurvatureArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Web definition file: a "vars:" header, then one first integral per line.
    #[arg(long, value_name = "FILE")]
    web: PathBuf,
    /// Highest level to examine before giving up (default: h0 + 8).
    #[arg(long, value_name = "H")]
    max_level: Option<usize>,
    /// Number of random sample points.
    #[arg(long, value_name = "S", default_value_t = 3)]
    samples: usize,
    /// Seed for the sample-point generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed evaluation point "1, -2/3, 5" overriding sampling.
    #[arg(long, value_name = "COORDS")]
    point: Option<String>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for per-sample evaluation.
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct CombinatoricsArgs {
    /// Number of variables (at least 2).
    #[arg(long)]
    n: usize,
    /// Number of first integrals (more than n).
    #[arg(long)]
    d: usize,
}

#[derive(Args)]
struct CtableArgs {
    /// Web definition file.
    #[arg(long, value_name = "FILE")]
    web: PathBuf,
    /// Base point "1, -2/3, 5".
    #[arg(long, value_name = "COORDS")]
    point: String,
    /// Table depth: highest derivative order |L| (default: h0).
    #[arg(long, value_name = "D")]
    deg: Option<usize>,
}

#[derive(Args)]
struct MatricesArgs {
    /// Web definition file.
    #[arg(long, value_name = "FILE")]
    web: PathBuf,
    /// Base point "1, -2/3, 5".
    #[arg(long, value_name = "COORDS")]
    point: String,
    /// Prolongation level k (default: h0).
    #[arg(long, value_name = "K")]
    level: Option<usize>,
}

#[derive(Args)]
struct CurvatureArgs {
    /// Web definition file.
    #[arg(long, value_name = "FILE")]
    web: PathBuf,
    /// Kernel level h whose section bundle is connected.
    #[arg(long, value_name = "H")]
    level: usize,
    /// Fixed base point "1, -2/3, 5" (default: sampled).
    #[arg(long, value_name = "COORDS")]
    point: Option<String>,
    /// Seed for the sample-point generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random sample points when no fixed point is given.
    #[arg(long, value_name = "S", default_value_t = 3)]
    samples: usize,
}

fn main() -> ExitCode {
    // Die quietly when the reader of a pipe goes away (`webrank … | head`)
    // instead of panicking on the failed write, matching other line tools.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Combinatorics(args) => cmd_combinatorics(args),
        Command::Ctable(args) => cmd_ctable(args),
        Command::Matrices(args) => cmd_matrices(args),
        Command::Curvature(args) => cmd_curvature(args),
    }
}

fn load(path: &Path) -> Result<WebSpec, String> {
    load_web_file(path).map_err(|e| e.to_string())
}

fn parse_point(text: &str, n: usize) -> Result<Point, String> {
    let point = Point::parse(text)
        .ok_or_else(|| format!("malformed point {text:?}; expected \"1, -2/3, 5\""))?;
    if point.n() != n {
        return Err(format!(
            "the point has {} coordinates but the web has {} variables",
            point.n(),
            n
        ));
    }
    Ok(point)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode, String> {
    let web = load(&args.web)?;
    let fixed_point = args
        .point
        .as_deref()
        .map(|text| parse_point(text, web.n()))
        .transpose()?;
    let options = AnalyzeOptions {
        max_level: args.max_level,
        samples: args.samples,
        seed: args.seed,
        fixed_point,
        jobs: args.jobs.max(1),
    };
    let report = analyze_rank(&web, &options);
    if args.point.is_some() && report.points.is_empty() {
        return Err(report.warnings.join("; "));
    }
    match args.format {
        Format::Text => print!("{}", render_text(&report)),
        Format::Json => println!("{}", ReportDocument::from_report(&report).to_json()),
    }
    Ok(match report.status {
        Status::RankDetermined | Status::RankZero => ExitCode::SUCCESS,
        Status::Inconclusive => ExitCode::from(2),
    })
}

fn cmd_combinatorics(args: CombinatoricsArgs) -> Result<ExitCode, String> {
    if args.n < 2 {
        return Err("need at least 2 variables (--n 2 or more)".to_string());
    }
    if args.d <= args.n {
        return Err(format!(
            "need more first integrals than variables (--d {} or more)",
            args.n + 1
        ));
    }
    let comb = Combinatorics::new(args.n, args.d);
    println!("n = {}, d = {}", comb.n, comb.d);
    println!("h0 = {} (least h with c(n,h) >= d)", comb.h0);
    let c_values: Vec<String> = (1..=comb.h0).map(|h| comb.c(h).to_string()).collect();
    println!("c(n,h), h = 1..{}: {}", comb.h0, c_values.join(", "));
    let beta_values: Vec<String> = (1..=comb.h0 + 1)
        .map(|k| comb.beta(k).to_string())
        .collect();
    println!("beta(k), k = 1..{}: {}", comb.h0 + 1, beta_values.join(", "));
    println!("pi'(n,d) = {}", comb.pi_prime);
    println!("pi(n,d) = {}", comb.pi_castelnuovo);
    Ok(ExitCode::SUCCESS)
}

fn cmd_ctable(args: CtableArgs) -> Result<ExitCode, String> {
    let web = load(&args.web)?;
    let point = parse_point(&args.point, web.n())?;
    let deg = args.deg.unwrap_or(web.combinatorics().h0).max(1);
    let pd = PointData::new(&web, Arc::new(point), deg, 0)
        .map_err(|e| format!("cannot evaluate the integrals at this point: {e}"))?;
    println!("coefficient tables at {} up to |L| = {}", pd.base(), deg);
    for (i, u) in web.integrals().iter().enumerate() {
        println!();
        println!(
            "integral {}: {}",
            i + 1,
            serialize_expression(u, web.variables())
        );
        let table = pd.table(i);
        for j in 1..=deg {
            for l in enumerate_multi_indices(web.n(), j) {
                let values: Vec<String> = (0..j)
                    .map(|h| format!("C^{h} = {}", format_rational(table.value(&l, h))))
                    .collect();
                println!("  L = {}: {}", format_multi_index(&l), values.join(", "));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_matrices(args: MatricesArgs) -> Result<ExitCode, String> {
    let web = load(&args.web)?;
    let point = parse_point(&args.point, web.n())?;
    let level = args.level.unwrap_or(web.combinatorics().h0).max(1);
    let pd = PointData::new(&web, Arc::new(point), level, 0)
        .map_err(|e| format!("cannot evaluate the integrals at this point: {e}"))?;
    let m = pd.m_script_value(level);
    println!(
        "level-{} prolongation matrix at {}: {} x {}, rank {}",
        level,
        pd.base(),
        m.rows(),
        m.cols(),
        m.rank()
    );
    print_matrix(&m);
    for j in 1..=level {
        let p = pd.p_value(j);
        println!();
        println!("P_{}: {} x {}, rank {}", j, p.rows(), p.cols(), p.rank());
        print_matrix(&p);
    }
    if level >= 2 {
        let q = pd.q_value(level);
        println!();
        println!("Q_{}: {} x {}", level, q.rows(), q.cols());
        print_matrix(&q);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_curvature(args: CurvatureArgs) -> Result<ExitCode, String> {
    let web = load(&args.web)?;
    let points: Vec<Arc<Point>> = match &args.point {
        Some(text) => vec![Arc::new(parse_point(text, web.n())?)],
        None => {
            let mut sampler = Sampler::new(args.seed);
            sampler
                .point_set(&web, args.samples.max(1), true)
                .map_err(|e| e.to_string())?
        }
    };
    let h = args.level;
    let mut m_rank = 0;
    for base in &points {
        let pd = PointData::new(&web, base.clone(), h + 1, 0)
            .map_err(|e| format!("cannot evaluate the integrals at this point: {e}"))?;
        m_rank = m_rank.max(pd.m_script_value(h + 1).rank());
    }
    let vars = web.variables();
    let mut all = true;
    for base in &points {
        let pd = PointData::new(&web, base.clone(), h + 2, 2)
            .map_err(|e| format!("cannot evaluate the integrals at this point: {e}"))?;
        let frame = SectionFrame::compute(&pd, h, m_rank).map_err(|e| e.to_string())?;
        if frame.is_empty() {
            return Err(format!(
                "the level-{h} kernel is zero at this point; nothing to connect"
            ));
        }
        let lifts = lift_sections(&pd, &frame).map_err(|e| e.to_string())?;
        let conn = connection_form(&pd, &frame, &lifts).map_err(|e| e.to_string())?;
        let report = curvature(&conn);
        println!(
            "point {}: {} kernel {} at level {}",
            base,
            frame.len(),
            if frame.len() == 1 { "section" } else { "sections" },
            h
        );
        for (lambda, omega) in conn.omega.iter().enumerate() {
            println!("omega_{} =", vars[lambda]);
            print_matrix(&omega.value_matrix());
        }
        for (lambda, mu, k) in &report.components {
            println!("K_{{{},{}}} =", vars[*lambda], vars[*mu]);
            print_matrix(k);
        }
        println!(
            "curvature vanishes here: {}",
            if report.vanishes { "yes" } else { "no" }
        );
        println!();
        all &= report.vanishes;
    }
    println!(
        "curvature vanishes at every point: {}",
        if all { "yes" } else { "no" }
    );
    Ok(ExitCode::SUCCESS)
}

fn format_multi_index(l: &MultiIndex) -> String {
    let entries: Vec<String> = l.entries().iter().map(|e| e.to_string()).collect();
    format!("({})", entries.join(","))
}

fn print_matrix(m: &RationalMatrix) {
    if m.rows() == 0 || m.cols() == 0 {
        println!("  (empty)");
        return;
    }
    let cells: Vec<Vec<String>> = (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| format_rational(m.get(r, c))).collect())
        .collect();
    let widths: Vec<usize> = (0..m.cols())
        .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(1))
        .collect();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, width)| format!("{cell:>width$}"))
            .collect();
        println!("  [ {} ]", line.join("  "));
    }
}
