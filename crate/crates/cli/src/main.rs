use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::TypedValueParser;
use clap::{CommandFactory, Parser, Subcommand};

use folner::io::canonical;
use folner::{
    gen_instance, output_to_json, parse_output, parse_quotient, rips_components, run_pipeline,
    verify_certificate, verify_naive, Dist, Error, ErrorKind, GenKind, GenParams, Instance,
    PipelineOptions, Scalar,
};

/// Turn bounded chain witnesses on a finite metric space into plain subset
/// witnesses, and check the result.
#[derive(Parser)]
#[command(name = "folner", version)]
struct Cli {
    /// Worker threads for per-point work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance.
    Generate(GenerateArgs),
    /// Run the construction on an instance and write subsets plus certificate.
    Run {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-iteration flow traces to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check an output against its instance.
    Verify { instance: PathBuf, output: PathBuf },
    /// Print the flow iterations for one point, or all points.
    Trace {
        instance: PathBuf,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print parameters, decomposition, classification and annulus points.
    Inspect { instance: PathBuf },
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(value_parser = kind_parser())]
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Points on a line, or the order of the cyclic group.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Number of paths in a disjoint union.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, default_value_t = 5)]
    min_len: usize,
    #[arg(long, default_value_t = 300)]
    max_len: usize,
    #[arg(long, value_parser = parse_dist)]
    gap: Option<Dist>,
    /// Comma-separated generators of the cyclic group.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,-1")]
    generators: Vec<i64>,
    /// Radius of the ball translated around the cyclic group.
    #[arg(long, default_value_t = 3)]
    k: u64,
    /// Comma-separated ball radii summed into each chain.
    #[arg(long, value_delimiter = ',', value_parser = parse_dist)]
    radii: Option<Vec<Dist>>,
    #[arg(long = "R", value_parser = parse_dist, default_value = "2")]
    r: Dist,
    #[arg(long = "S", value_parser = parse_dist)]
    s: Option<Dist>,
    #[arg(long, default_value = "1/2")]
    epsilon: String,
    /// Mark each line or path as a window into an unbounded component.
    #[arg(long)]
    unbounded: bool,
}

fn kind_parser() -> impl TypedValueParser<Value = GenKind> {
    clap::builder::PossibleValuesParser::new(GenKind::ALL.map(|k| k.as_str()))
        .map(|s| s.parse::<GenKind>().expect("listed kind"))
}

fn parse_dist(s: &str) -> Result<Dist, String> {
    Dist::parse_exact(s).ok_or_else(|| format!("not an exact number: {s:?}"))
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Malformed => 2,
            ErrorKind::Precondition => 3,
            ErrorKind::Internal => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.kind() == clap::error::ErrorKind::InvalidValue => {
            eprint!("{e}");
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Run {
            instance,
            out,
            trace,
        } => run(&instance, out.as_deref(), trace.as_deref()),
        Command::Verify { instance, output } => verify(&instance, &output),
        Command::Trace {
            instance,
            point,
            out,
        } => trace(&instance, point.as_deref(), out.as_deref()),
        Command::Inspect { instance } => inspect(&instance),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn load(path: &Path) -> Result<Instance<Dist>, Failure> {
    Ok(Instance::from_json(&read(path)?)?)
}

fn generate(args: GenerateArgs) -> Result<u8, Failure> {
    let epsilon = parse_quotient(&args.epsilon).ok_or_else(|| Failure {
        code: 2,
        message: format!("bad epsilon {:?}", args.epsilon),
    })?;
    let params = GenParams {
        n: args.n,
        width: args.width,
        height: args.height,
        paths: args.paths,
        min_len: args.min_len,
        max_len: args.max_len,
        gap: args.gap,
        generators: args.generators,
        k: args.k,
        radii: args.radii,
        r: args.r,
        s: args.s,
        epsilon,
        unbounded: args.unbounded,
    };
    let instance = gen_instance(args.kind, &params, args.seed)?;
    write(args.out.as_deref(), &instance.to_json())?;
    Ok(0)
}

fn run(path: &Path, out: Option<&Path>, trace: Option<&Path>) -> Result<u8, Failure> {
    let inst = load(path)?;
    let options = PipelineOptions {
        jobs: None,
        trace: trace.is_some(),
    };
    let result = run_pipeline(&inst.space, &inst.chains, &inst.r, &inst.epsilon, &inst.s, &options)?;
    for w in &result.certificate.warnings {
        eprintln!("warning: {w}");
    }
    write(out, &output_to_json(&inst.space, &result.subsets, &result.certificate))?;
    if let Some(t) = trace {
        let lines: Vec<&str> = result
            .points
            .iter()
            .flat_map(|p| p.trace.iter().map(String::as_str))
            .collect();
        write(Some(t), &(lines.join("\n") + "\n"))?;
    }
    let c = &result.certificate;
    eprintln!(
        "ok: {} points, L = {}, N = {}, worst ratio {} (eps {}), worst radius {} (bound {})",
        inst.space.len(),
        c.params.l,
        c.params.n,
        c.worst_ratio,
        c.params.epsilon,
        c.worst_radius,
        c.bound_radius
    );
    Ok(0)
}

fn verify(instance: &Path, output: &Path) -> Result<u8, Failure> {
    let inst = load(instance)?;
    let (subsets, certificate) = parse_output(&inst.space, &read(output)?)?;

    let naive = verify_naive(&inst.space, &subsets, &inst.r, &inst.epsilon)?;
    let radius = naive.support_radius.map(|r| r.to_string()).unwrap_or_default();
    if naive.passed {
        println!(
            "naive: PASS ({} pairs, worst ratio {}, support radius {radius})",
            naive.pairs_checked, naive.worst_ratio
        );
    } else {
        println!("naive: FAIL ({} violations)", naive.failures.len());
        for f in naive.failures.iter().take(10) {
            println!("  {f}");
        }
    }

    let cert = verify_certificate(
        &inst.space,
        &inst.chains,
        (&inst.r, &inst.epsilon, &inst.s),
        &subsets,
        &certificate,
    )?;
    match cert.failures.first() {
        None => println!("certificate: PASS"),
        Some(first) => println!("certificate: FAIL at {first}"),
    }
    Ok(if naive.passed && cert.passed { 0 } else { 1 })
}

fn trace(path: &Path, point: Option<&str>, out: Option<&Path>) -> Result<u8, Failure> {
    let inst = load(path)?;
    let only = point.map(|p| inst.space.index_of(p)).transpose()?;
    let options = PipelineOptions {
        jobs: None,
        trace: true,
    };
    let result = run_pipeline(&inst.space, &inst.chains, &inst.r, &inst.epsilon, &inst.s, &options)?;
    let mut text = String::new();
    for (x, p) in result.points.iter().enumerate() {
        if only.is_some_and(|o| o != x) {
            continue;
        }
        for line in &p.trace {
            text.push_str(line);
            text.push('\n');
        }
    }
    write(out, &text)?;
    Ok(0)
}

fn inspect(path: &Path) -> Result<u8, Failure> {
    let inst = load(path)?;
    let space = &inst.space;
    let params = inst.params()?;
    let decomposition = rips_components(space, &inst.s);
    let plan = folner::classify(space, &decomposition, &inst.chains, &params)?;
    let summary = serde_json::json!({
        "points": space.len(),
        "growth_profile": {
            "R": space.growth_profile(&inst.r),
            "S": space.growth_profile(&inst.s),
        },
        "params": {
            "R": inst.r.to_string(),
            "epsilon": inst.epsilon.to_string(),
            "S": inst.s.to_string(),
            "L": params.l,
            "N": params.n,
            "inner": plan.inner.to_string(),
            "outer": plan.outer.to_string(),
            "bound_radius": params.bound_radius().to_string(),
        },
        "components": plan.decomposition.components.iter().map(|c| serde_json::json!({
            "id": c.id,
            "size": c.points.len(),
            "basepoint": space.id(c.basepoint),
            "class": c.class.as_str(),
            "annulus": plan.annulus[c.id].iter().map(|&z| space.id(z)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "warnings": plan.warnings,
    });
    write(None, &canonical(&summary))?;
    Ok(0)
}
