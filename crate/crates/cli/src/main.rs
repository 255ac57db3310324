use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use persuasion::dataset::{dataset_from_json, dataset_to_json, SdscDataset};
use persuasion::forward::{generate_dataset, problems_from_json, solve};
use persuasion::geometry::posterior_cover;
use persuasion::mean::{
    check_mean, mean_dataset_from_json, mean_dataset_to_json, mean_generate_dataset, mean_problems_from_json,
    mean_solve, replay_mean_verdict, MeanDataset,
};
use persuasion::numeric::{approx, render, render_vec, Rational};
use persuasion::persuasion::{check, exclusions_from_json, replay_verdict, Axiom, NbpsMode, Outcome, Verdict};
use persuasion::report::{self, Labels};
use persuasion::Error;

const EXIT_VIOLATED: u8 = 3;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 1;

#[derive(Parser)]
#[command(name = "persuade", version, about = "Revealed-preference tests for Bayesian persuasion data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a dataset: obedience first, then the balanced-improvement axiom.
    Check(CheckArgs),
    /// Solve the sender's problem for every menu and prior in a problem file.
    Solve(ProblemArgs),
    /// Write the dataset an optimising sender would generate.
    Gen(GenArgs),
    /// Print each menu's optimality regions and their vertices.
    Cover(CoverArgs),
    /// Re-verify a certificate produced by `check` against its dataset.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct CheckArgs {
    dataset: PathBuf,
    /// Sender utility depends only on the action.
    #[arg(long, conflicts_with_all = ["posterior_mean", "varying_priors", "exclude"])]
    transparent_motives: bool,
    /// Read a posterior-mean dataset and run the mean tests.
    #[arg(long, conflicts_with_all = ["varying_priors", "exclude"])]
    posterior_mean: bool,
    /// Allow a different prior in each observation.
    #[arg(long, conflicts_with = "exclude")]
    varying_priors: bool,
    /// Posteriors at which the sender must strictly lose.
    #[arg(long, value_name = "POINTS")]
    exclude: Option<PathBuf>,
    /// Print only the JSON certificate.
    #[arg(long)]
    json: bool,
    /// Also write the JSON certificate to this file.
    #[arg(long, value_name = "FILE")]
    certificate: Option<PathBuf>,
}

#[derive(Args)]
struct ProblemArgs {
    problems: PathBuf,
    /// The file describes posterior-mean problems.
    #[arg(long)]
    posterior_mean: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    input: ProblemArgs,
    /// Write the dataset here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoverArgs {
    dataset: PathBuf,
    /// Read a posterior-mean dataset and print each action's interval of means.
    #[arg(long)]
    posterior_mean: bool,
    /// Machine-readable output with exact strings.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReplayArgs {
    certificate: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Exclusions used when the certificate was produced.
    #[arg(long, value_name = "POINTS")]
    exclude: Option<PathBuf>,
}

/// What a subcommand reports back to `main`.
enum Done {
    Ok,
    Verdict(Outcome),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => run_check(&args),
        Command::Solve(args) => run_solve(&args),
        Command::Gen(args) => run_gen(&args),
        Command::Cover(args) => run_cover(&args),
        Command::Replay(args) => run_replay(&args),
    };
    match result {
        Ok(Done::Ok) | Ok(Done::Verdict(Outcome::Consistent)) => ExitCode::SUCCESS,
        Ok(Done::Verdict(Outcome::Violated)) => ExitCode::from(EXIT_VIOLATED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { EXIT_INPUT } else { EXIT_INTERNAL })
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<SdscDataset, Error> {
    let data = dataset_from_json(&read(path)?)?;
    data.ensure_valid()?;
    Ok(data)
}

fn load_mean_dataset(path: &Path) -> Result<MeanDataset, Error> {
    let data = mean_dataset_from_json(&read(path)?)?;
    data.ensure_valid()?;
    Ok(data)
}

fn emit(verdict: &Verdict, labels: &Labels, args: &CheckArgs) -> Result<Done, Error> {
    let json = report::to_json(verdict, labels);
    if !args.json {
        print!("{}", report::human(verdict, labels));
        println!();
    }
    println!("{json}");
    if let Some(path) = &args.certificate {
        write(path, &(json + "\n"))?;
    }
    Ok(Done::Verdict(verdict.outcome))
}

fn run_check(args: &CheckArgs) -> Result<Done, Error> {
    if args.posterior_mean {
        let data = load_mean_dataset(&args.dataset)?;
        let result = check_mean(&data)?;
        return emit(result.decisive(), &Labels::of_mean(&data.world), args);
    }
    let data = load_dataset(&args.dataset)?;
    let mode = if args.transparent_motives {
        NbpsMode::Transparent
    } else if args.varying_priors {
        NbpsMode::VaryingPriors
    } else if let Some(path) = &args.exclude {
        NbpsMode::Extended(exclusions_from_json(&read(path)?, &data)?)
    } else {
        NbpsMode::StateDependent
    };
    let result = check(&data, &mode)?;
    emit(result.decisive(), &Labels::of_world(&data.world), args)
}

fn show(value: &Rational) -> String {
    if value.is_integer() {
        render(value)
    } else {
        format!("{} (~{:.4})", render(value), approx(value))
    }
}

fn run_solve(args: &ProblemArgs) -> Result<Done, Error> {
    let text = read(&args.problems)?;
    if args.posterior_mean {
        let set = mean_problems_from_json(&text)?;
        for k in 0..set.problems.len() {
            let s = mean_solve(&set.problem(k))?;
            println!("problem {k}: value {} without information {}", show(&s.value), show(&s.prior_value));
            println!("  benefits from persuasion: {}", s.value > s.prior_value);
            for a in &s.atoms {
                println!("  {} at mean {} with mass {}", set.world.actions[a.action], show(&a.mean), show(&a.mass));
            }
            let kinks: Vec<String> = s.price.kinks().iter().map(show).collect();
            println!("  price kinks [{}]", kinks.join(", "));
        }
        return Ok(Done::Ok);
    }
    let set = problems_from_json(&text)?;
    let labels = &set.world.states;
    for k in 0..set.problems.len() {
        let s = solve(&set.problem(k))?;
        println!("problem {k}: value {} without information {}", show(&s.value), show(&s.prior_value));
        println!("  benefits from persuasion: {}", s.value > s.prior_value);
        for a in &s.atoms {
            println!(
                "  {} at posterior {} with mass {}",
                set.world.actions[a.action],
                render_vec(&a.posterior),
                show(&a.mass)
            );
        }
        println!("  value hyperplane over ({}) {}", labels.join(", "), render_vec(&s.menu_value));
    }
    Ok(Done::Ok)
}

fn run_gen(args: &GenArgs) -> Result<Done, Error> {
    let text = read(&args.input.problems)?;
    let out = if args.input.posterior_mean {
        let set = mean_problems_from_json(&text)?;
        mean_dataset_to_json(&mean_generate_dataset(&set.world, &set.sender_utility, &set.problems)?)
    } else {
        let set = problems_from_json(&text)?;
        dataset_to_json(&generate_dataset(&set.world, &set.sender_utility, &set.problems)?)
    };
    match &args.output {
        Some(path) => write(path, &(out + "\n"))?,
        None => println!("{out}"),
    }
    Ok(Done::Ok)
}

fn distinct_menus(menus: impl Iterator<Item = Vec<usize>>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for m in menus {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn run_cover(args: &CoverArgs) -> Result<Done, Error> {
    if args.posterior_mean {
        let data = load_mean_dataset(&args.dataset)?;
        let world = &data.world;
        let mut listing = Vec::new();
        for menu in distinct_menus(data.observations.iter().map(|o| o.menu.clone())) {
            let names: Vec<&str> = menu.iter().map(|&a| world.actions[a].as_str()).collect();
            if !args.json {
                println!("menu {{{}}}", names.join(", "));
            }
            let mut regions = serde_json::Map::new();
            for &a in &menu {
                let interval = world.interval(&menu, a);
                if !args.json {
                    match &interval {
                        Some((lo, hi)) => println!("  {}: [{}, {}]", world.actions[a], render(lo), render(hi)),
                        None => println!("  {}: never optimal", world.actions[a]),
                    }
                }
                let value = interval.map_or(serde_json::Value::Null, |(lo, hi)| serde_json::json!([render(&lo), render(&hi)]));
                regions.insert(world.actions[a].clone(), value);
            }
            listing.push(serde_json::json!({"menu": names, "intervals": regions}));
        }
        if args.json {
            println!("{}", serde_json::to_string_pretty(&listing).expect("cover serializes"));
        }
        return Ok(Done::Ok);
    }
    let data = load_dataset(&args.dataset)?;
    let world = &data.world;
    let binary = world.n_states() == 2;
    let mut listing = Vec::new();
    for menu in distinct_menus(data.observations.iter().map(|o| o.menu.clone())) {
        let cover = posterior_cover(world, &menu);
        let names: Vec<&str> = menu.iter().map(|&a| world.actions[a].as_str()).collect();
        if !args.json {
            println!("menu {{{}}}", names.join(", "));
        }
        let mut regions = serde_json::Map::new();
        for region in &cover.regions {
            let name = &world.actions[region.action];
            let vertices: Vec<Vec<String>> =
                region.vertices.iter().map(|v| v.iter().map(render).collect()).collect();
            if !args.json {
                if region.is_empty() {
                    println!("  {name}: never optimal");
                } else if binary {
                    // Binary beliefs are indexed by the probability of the second state.
                    let lo = region.vertices.iter().map(|v| &v[1]).min().expect("nonempty");
                    let hi = region.vertices.iter().map(|v| &v[1]).max().expect("nonempty");
                    println!("  {name}: {} in [{}, {}]", world.states[1], render(lo), render(hi));
                } else {
                    let shown: Vec<String> = region.vertices.iter().map(|v| render_vec(v)).collect();
                    println!("  {name}: vertices {}", shown.join(" "));
                }
            }
            regions.insert(name.clone(), serde_json::json!(vertices));
        }
        let outer: Vec<Vec<String>> = cover.outer_points.iter().map(|v| v.iter().map(render).collect()).collect();
        if !args.json {
            let shown: Vec<String> = cover.outer_points.iter().map(|v| render_vec(v)).collect();
            println!("  outer points over ({}): {}", world.states.join(", "), shown.join(" "));
        }
        listing.push(serde_json::json!({"menu": names, "states": world.states, "regions": regions, "outer_points": outer}));
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&listing).expect("cover serializes"));
    }
    Ok(Done::Ok)
}

fn replay_mode(axiom: Axiom, exclude: Option<NbpsMode>) -> Result<NbpsMode, Error> {
    Ok(match axiom {
        Axiom::SiNbps => NbpsMode::Transparent,
        Axiom::Unias | Axiom::Unbps => NbpsMode::VaryingPriors,
        Axiom::NbpsExt => exclude.ok_or_else(|| Error::input("this certificate needs --exclude"))?,
        _ => NbpsMode::StateDependent,
    })
}

fn run_replay(args: &ReplayArgs) -> Result<Done, Error> {
    let cert = read(&args.certificate)?;
    let head: serde_json::Value = serde_json::from_str(&cert)?;
    let axiom = head
        .get("axiom")
        .and_then(|a| a.as_str())
        .and_then(Axiom::from_name)
        .ok_or_else(|| Error::input("certificate has no known axiom"))?;
    let checked = if matches!(axiom, Axiom::NiasMean | Axiom::NbpsMean) {
        let data = load_mean_dataset(&args.dataset)?;
        let verdict = report::from_json(&cert, &Labels::of_mean(&data.world))?;
        replay_mean_verdict(&data, &verdict).map(|_| verdict)
    } else {
        let data = load_dataset(&args.dataset)?;
        let exclude = match &args.exclude {
            Some(path) => Some(NbpsMode::Extended(exclusions_from_json(&read(path)?, &data)?)),
            None => None,
        };
        let mode = replay_mode(axiom, exclude)?;
        let verdict = report::from_json(&cert, &Labels::of_world(&data.world))?;
        replay_verdict(&data, &verdict, &mode).map(|_| verdict)
    };
    match checked {
        Ok(verdict) => {
            println!("certificate verified: {} {}", verdict.axiom.name(), match verdict.outcome {
                Outcome::Consistent => "consistent",
                Outcome::Violated => "violated",
            });
            Ok(Done::Ok)
        }
        Err(reason) => Err(Error::input(format!("certificate does not verify: {reason}"))),
    }
}
