use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qor_core::attacks::{intercept_measure, InterceptPlan};
use qor_core::classgroup::{
    class_number, enumerate_reduced, random_element, Discriminant, QuadraticForm, RandomElementParams,
};
use qor_core::protocol::{run, RunConfig, RunContext, RunReport};
use qor_core::scheme::{
    adjacency, export_scheme, export_table, load_action_table, num_classes, spectral, ActionTable, CycleSelection,
    GraphFormat,
};

/// Recovered-message fidelity below this fails a run.
const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;
/// Allowed gap between closed-form and numeric eigenvalues.
const SPECTRUM_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "qor", version, about = "Quantum onion routing over class-group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Five-actor run a→b→c→d→e with ω = 2, Ω = 5 on the bundled fixture.
    Demo5 {
        #[arg(long, default_value_t = 1)]
        shots: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Runs a JSON run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Runs a configuration with an eavesdropper following a JSON plan.
    Attack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Closed-form vs numeric spectra of the cyclic scheme of order n.
    Spectra {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = SpectraFormat::Csv)]
        format: SpectraFormat,
    },
    /// Cycle graphs of a fixture, or the class graphs of a cyclic scheme.
    ExportGraph {
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Cycle name, or `all` to overlay every cycle.
        #[arg(long, default_value = "all")]
        cycle: String,
        /// Export class `s` of the cyclic scheme of order `--scheme-order` instead.
        #[arg(long, requires = "scheme_class")]
        scheme_order: Option<usize>,
        #[arg(long, requires = "scheme_order")]
        scheme_class: Option<usize>,
        #[arg(long, default_value = "dot")]
        format: String,
    },
    /// Binary quadratic form class-group utilities.
    #[command(subcommand)]
    Classgroup(ClassGroupCommand),
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    transmit_index: bool,
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(shots) = self.shots {
            config.shots = shots;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(fixture) = &self.fixture {
            config.fixture = Some(fixture.clone());
        }
        if self.transmit_index {
            config.transmit_index = true;
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectraFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum ClassGroupCommand {
    /// h(Δ) by enumerating reduced forms.
    #[command(allow_negative_numbers = true)]
    ClassNumber { discriminant: i64 },
    /// Reduced representative of (a, b, c).
    #[command(allow_negative_numbers = true)]
    Reduce { a: i64, b: i64, c: i64 },
    /// Product of two forms.
    #[command(allow_negative_numbers = true)]
    Compose { a1: i64, b1: i64, c1: i64, a2: i64, b2: i64, c2: i64 },
    /// (a, b, c) raised to a non-negative power.
    #[command(allow_negative_numbers = true)]
    Power { a: i64, b: i64, c: i64, n: u64 },
    /// Inverse class.
    #[command(allow_negative_numbers = true)]
    Inverse { a: i64, b: i64, c: i64 },
    /// All reduced primitive forms of discriminant Δ.
    #[command(allow_negative_numbers = true)]
    Enumerate { discriminant: i64 },
    /// g^e for e the sum of a random word over random exponents.
    #[command(allow_negative_numbers = true)]
    Random {
        #[arg(long)]
        discriminant: i64,
        /// Generator as `a,b,c`; the first non-principal reduced form if absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        generator: Option<Vec<i64>>,
        /// Group order; h(Δ) if absent.
        #[arg(long)]
        order: Option<u64>,
        #[arg(long)]
        exponents: Option<usize>,
        #[arg(long)]
        word_length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn write_report(report: &RunReport, out_dir: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)? + "\n";
    let t = write_file(out_dir, "transcript.json", &json)?;
    let h = write_file(out_dir, "histogram.csv", &report.histogram_csv())?;
    println!("wrote {} and {}", t.display(), h.display());
    Ok(())
}

/// Prints the run summary; `Ok(false)` if any shot missed the key or garbled
/// the message.
fn summarize(report: &RunReport) -> bool {
    let stats = &report.statistics;
    println!("shots: {}", stats.shots);
    for (outcome, count) in &report.histogram {
        println!("  {outcome}: {count}");
    }
    for (key, count) in &report.recovered_keys {
        println!("recovered key {key}: {count} shot(s)");
    }
    if let Some(u) = &stats.index_uniformity {
        println!("index uniformity: chi2 = {:.4}, p = {:.4}", u.statistic, u.p_value);
    }
    let fidelity_ok = stats.min_message_fidelity.is_none_or(|f| f >= FIDELITY_FLOOR);
    if let Some(f) = stats.min_message_fidelity {
        println!("minimum message fidelity: {f:.12}");
    }
    let ok = report.all_recovered() && fidelity_ok;
    if !ok {
        eprintln!(
            "mismatch: expected key {} on every shot, {} of {} matched",
            stats.expected_key, stats.recovered_expected, stats.shots
        );
    }
    ok
}

fn load_table(fixture: Option<&Path>) -> Result<ActionTable> {
    Ok(match fixture {
        Some(path) => load_action_table(path)?,
        None => ActionTable::bundled(),
    })
}

fn demo5(shots: usize, seed: u64, out_dir: &Path, fixture: Option<PathBuf>) -> Result<bool> {
    let mut config = RunConfig::demo5(shots, seed);
    config.fixture = fixture;
    let ctx = RunContext::new(config)?;
    let report = run(&ctx)?;
    write_report(&report, out_dir)?;
    let ok = summarize(&report);
    println!("recovered key: {}", report.transcript.recovered_key().unwrap_or_default());
    Ok(ok)
}

fn run_config(path: &Path, overrides: &Overrides, out_dir: &Path) -> Result<bool> {
    let mut config = RunConfig::load(path)?;
    overrides.apply(&mut config);
    let report = run(&RunContext::new(config)?)?;
    write_report(&report, out_dir)?;
    Ok(summarize(&report))
}

fn attack(config: &Path, plan: &Path, overrides: &Overrides, out_dir: &Path) -> Result<bool> {
    let mut config = RunConfig::load(config)?;
    overrides.apply(&mut config);
    let plan = InterceptPlan::load(plan)?;
    let report = intercept_measure(&RunContext::new(config)?, &plan)?;
    let path = write_file(out_dir, "attack.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    println!("wrote {}", path.display());
    for hop in &report.hops {
        println!("hop {} ({} -> {}): support {:?}", hop.hop, hop.from, hop.to, hop.support);
        for (j, count) in &hop.histogram {
            println!("  {j}: {count}");
        }
        if let Some(u) = &hop.uniformity {
            println!("  chi2 = {:.4}, p = {:.4}", u.statistic, u.p_value);
        }
    }
    for (key, count) in &report.recovered_keys {
        println!("recovered key {key}: {count} shot(s)");
    }
    if !report.key_unchanged() {
        eprintln!("receiver key changed under interception");
    }
    Ok(report.key_unchanged())
}

fn spectra(n: usize, format: SpectraFormat) -> Result<bool> {
    let data = spectral(n)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for s in 0..=num_classes(n) {
        let closed = data.spectrum(s);
        let mut numeric: Vec<f64> =
            adjacency(n, s)?.entries().clone().symmetric_eigenvalues().iter().copied().collect();
        numeric.sort_by(f64::total_cmp);
        for (k, (c, x)) in closed.iter().zip(&numeric).enumerate() {
            worst = worst.max((c - x).abs());
            rows.push((s, k, *c, *x));
        }
    }
    match format {
        SpectraFormat::Csv => {
            println!("class,k,closed_form,numeric");
            for (s, k, c, x) in &rows {
                println!("{s},{k},{c:.12},{x:.12}");
            }
        }
        SpectraFormat::Json => {
            let json: Vec<_> = rows
                .iter()
                .map(|(s, k, c, x)| serde_json::json!({"class": s, "k": k, "closed_form": c, "numeric": x}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
    }
    if worst > SPECTRUM_TOLERANCE {
        eprintln!("closed form deviates from numeric spectrum by {worst:e}");
        return Ok(false);
    }
    Ok(true)
}

fn export_graph(fixture: Option<&Path>, cycle: &str, scheme: Option<(usize, usize)>, format: &str) -> Result<bool> {
    let format: GraphFormat = format.parse()?;
    let text = match scheme {
        Some((n, s)) => export_scheme(&adjacency(n, s)?, format),
        None => {
            let selection = if cycle == "all" { CycleSelection::Union } else { CycleSelection::One(cycle.to_string()) };
            export_table(&load_table(fixture)?, &selection, format)?
        }
    };
    print!("{text}");
    Ok(true)
}

fn form(a: i64, b: i64, c: i64) -> QuadraticForm {
    QuadraticForm::new(a, b, c)
}

fn classgroup(cmd: ClassGroupCommand) -> Result<bool> {
    match cmd {
        ClassGroupCommand::ClassNumber { discriminant } => {
            println!("{}", class_number(&Discriminant::new(discriminant)?)?);
        }
        ClassGroupCommand::Reduce { a, b, c } => println!("{}", form(a, b, c).reduce()?),
        ClassGroupCommand::Compose { a1, b1, c1, a2, b2, c2 } => {
            println!("{}", form(a1, b1, c1).compose(&form(a2, b2, c2))?)
        }
        ClassGroupCommand::Power { a, b, c, n } => println!("{}", form(a, b, c).pow(n)?),
        ClassGroupCommand::Inverse { a, b, c } => println!("{}", form(a, b, c).inverse()?),
        ClassGroupCommand::Enumerate { discriminant } => {
            for f in enumerate_reduced(&Discriminant::new(discriminant)?)? {
                println!("{f}");
            }
        }
        ClassGroupCommand::Random { discriminant, generator, order, exponents, word_length, seed } => {
            let disc = Discriminant::new(discriminant)?;
            let generator = match generator {
                Some(g) if g.len() == 3 => form(g[0], g[1], g[2]).reduce()?,
                Some(g) => bail!("--generator takes three integers a,b,c, got {}", g.len()),
                None => match enumerate_reduced(&disc)?.into_iter().find(|f| !f.is_principal()) {
                    Some(f) => f,
                    None => bail!("class group of discriminant {discriminant} is trivial"),
                },
            };
            let order = match order {
                Some(r) => r,
                None => class_number(&disc)?,
            };
            let mut params = RandomElementParams::with_default_exponents(generator, order, word_length, seed);
            if let Some(k) = exponents {
                params.num_exponents = k;
            }
            let out = random_element(&params)?;
            println!("exponents: {:?}", out.exponents);
            println!("word: {:?}", out.word);
            println!("e = {}", out.exponent);
            println!("{}", out.element);
        }
    }
    Ok(true)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Demo5 { shots, seed, out_dir, fixture } => demo5(shots, seed, &out_dir, fixture),
        Command::Run { config, overrides, out_dir } => run_config(&config, &overrides, &out_dir),
        Command::Attack { config, plan, overrides, out_dir } => attack(&config, &plan, &overrides, &out_dir),
        Command::Spectra { n, format } => spectra(n, format),
        Command::ExportGraph { fixture, cycle, scheme_order, scheme_class, format } => {
            export_graph(fixture.as_deref(), &cycle, scheme_order.zip(scheme_class), &format)
        }
        Command::Classgroup(cmd) => classgroup(cmd),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
