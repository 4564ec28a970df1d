use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sbba_bench::compare::{self, CompareConfig, Family};
use sbba_bench::generate::{self, SdmSpec};
use sbba_bench::schema::{parse_instance, serialize_instance, Instance};
use sbba_bench::suite::{audit_sdm, audit_single, sdm_suite, single_suite};
use sbba_bench::{all_mechanisms, mechanism, reproduce, DynMechanism, MECHANISM_NAMES};
use sbba_core::mechanisms::sample;
use sbba_core::sdm::sbba_sdm;
use sbba_core::{Money, OutcomeDistribution};

#[derive(Parser)]
#[command(name = "sbba", version, about = "Run, compare and audit double-auction mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mechanism on an instance file.
    Run(RunArgs),
    /// Check IR, budget balance and truthfulness on a file or a random suite.
    Audit(AuditArgs),
    /// Tabulate efficiency and budget of the mechanisms over random instances.
    Compare(CompareArgs),
    /// Write a random or adversarial instance file.
    Generate(GenerateArgs),
    /// Recompute a worked example and compare with its closed form.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    /// Instance file (JSON).
    input: PathBuf,
    /// Single-market mechanism; multi-market files always use sbba_sdm.
    #[arg(long, default_value = "sbba")]
    mechanism: String,
    /// Draw one branch with the seeded RNG instead of printing the lottery.
    #[arg(long)]
    sample: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AuditArgs {
    /// Audit this file instead of a generated suite.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Mechanisms to audit (repeatable); defaults to all single-market ones.
    #[arg(long)]
    mechanism: Vec<String>,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    /// Most traders per side in generated single-market instances.
    #[arg(long, default_value_t = 6)]
    max_side: usize,
    #[arg(long, default_value_t = 0)]
    lo: i64,
    #[arg(long, default_value_t = 20)]
    hi: i64,
    /// Audit a generated multi-market suite with sbba_sdm.
    #[arg(long)]
    sdm: bool,
    #[arg(long)]
    skip_truthfulness: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Uniform,
    Adversarial,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    mechanism: Vec<String>,
    /// Breakeven indices, e.g. `5`, `2,3,4` or `2..10` (inclusive).
    #[arg(long, default_value = "5")]
    k: String,
    #[arg(long, default_value_t = 500)]
    instances: usize,
    #[arg(long, value_enum, default_value_t = FamilyArg::Uniform)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    lo: i64,
    #[arg(long, default_value_t = 100)]
    hi: i64,
    #[arg(long, default_value_t = 1000)]
    budget: i64,
    #[arg(long, default_value_t = 1)]
    eps: i64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Uniform,
    Breakeven,
    Adversarial,
    Sdm,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Kind::Uniform)]
    kind: Kind,
    #[arg(long, default_value_t = 5)]
    buyers: usize,
    #[arg(long, default_value_t = 5)]
    sellers: usize,
    #[arg(long, default_value_t = 0)]
    lo: i64,
    #[arg(long, default_value_t = 100)]
    hi: i64,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    budget: i64,
    #[arg(long, default_value_t = 1)]
    eps: i64,
    #[arg(long, default_value_t = 2)]
    markets: usize,
    /// Transit cost between every pair of markets.
    #[arg(long, default_value_t = 4)]
    transit: i64,
    #[arg(long, default_value_t = 4)]
    traders_per_market: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Example {
    Example1,
    SdmMain,
    SdmAppendix,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    example: Example,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Budget B; integer, decimal or fraction.
    #[arg(long, default_value = "10")]
    budget: Money,
    #[arg(long, default_value = "1")]
    eps: Money,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Audit(a) => audit(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Reproduce(a) => reproduce_cmd(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn pick_mechanisms(names: &[String]) -> Result<Vec<DynMechanism>> {
    if names.is_empty() {
        return Ok(all_mechanisms());
    }
    names
        .iter()
        .map(|n| {
            mechanism(n).with_context(|| format!("unknown mechanism `{n}`; expected one of {}", MECHANISM_NAMES.join(", ")))
        })
        .collect()
}

#[derive(Serialize)]
struct BranchRecord<'a> {
    probability: &'a Money,
    broker_surplus: &'a Money,
    buyers: &'a std::collections::BTreeMap<sbba_core::TraderId, Money>,
    sellers: &'a std::collections::BTreeMap<sbba_core::TraderId, Money>,
}

fn render_distribution(dist: &OutcomeDistribution, format: Format) -> Result<String> {
    let records: Vec<BranchRecord> = dist
        .branches()
        .iter()
        .map(|b| BranchRecord {
            probability: &b.probability,
            broker_surplus: b.outcome.broker_surplus(),
            buyers: b.outcome.buyer_fills(),
            sellers: b.outcome.seller_fills(),
        })
        .collect();
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&records)? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["branch", "probability", "trader", "side", "price"])?;
            for (i, b) in dist.branches().iter().enumerate() {
                let fills = b
                    .outcome
                    .buyer_fills()
                    .iter()
                    .map(|f| ("buy", f))
                    .chain(b.outcome.seller_fills().iter().map(|f| ("sell", f)));
                for (side, (id, price)) in fills {
                    w.write_record([i.to_string(), b.probability.to_string(), id.to_string(), side.into(), price.to_string()])?;
                }
            }
            String::from_utf8(w.into_inner()?)?
        }
        Format::Human => {
            let mut s = String::new();
            for (i, r) in records.iter().enumerate() {
                s += &format!("branch {i}: probability {}, broker surplus {}\n", r.probability, r.broker_surplus);
                for (id, p) in r.buyers {
                    s += &format!("  buy  {id:<12} pays     {p}\n");
                }
                for (id, p) in r.sellers {
                    s += &format!("  sell {id:<12} receives {p}\n");
                }
            }
            s
        }
    })
}

fn run(a: RunArgs) -> Result<bool> {
    let instance = read_instance(&a.input)?;
    let (dist, header) = match &instance {
        Instance::Single(i) => {
            let m = mechanism(&a.mechanism).with_context(|| format!("unknown mechanism `{}`", a.mechanism))?;
            (m.run(i)?, format!("{} on {} traders\n", m.name(), i.len()))
        }
        Instance::Sdm(s) => {
            let out = sbba_sdm(s)?;
            let prices: Vec<String> = out.prices.iter().map(|(m, p)| format!("{m}={p}")).collect();
            let header = format!(
                "sbba_sdm: circulation cost {}, {} component(s), prices [{}]\n",
                out.circulation.total_cost(),
                out.partition.components().len(),
                prices.join(", ")
            );
            (out.distribution, header)
        }
    };
    let dist = if a.sample {
        let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
        OutcomeDistribution::deterministic(sample(&dist, &mut rng).clone())
    } else {
        dist
    };
    let mut text = render_distribution(&dist, a.common.format)?;
    if a.common.format == Format::Human {
        text = header + &text;
    }
    emit(a.common.out.as_deref(), &text)?;
    Ok(true)
}

fn audit(a: AuditArgs) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    let truth = !a.skip_truthfulness;
    let mut text = String::new();
    let mut ok = true;
    let sdm_instances = match &a.input {
        Some(path) => match read_instance(path)? {
            Instance::Single(i) => {
                for m in pick_mechanisms(&a.mechanism)? {
                    let s = audit_single(m.as_ref(), std::slice::from_ref(&i), truth)?;
                    ok &= s.passed();
                    text += &s.to_string();
                }
                None
            }
            Instance::Sdm(s) => Some(vec![s]),
        },
        None if a.sdm => {
            let spec = SdmSpec {
                markets: 3,
                value_lo: a.lo,
                value_hi: a.hi,
                ..SdmSpec::default()
            };
            Some(sdm_suite(&mut rng, a.instances, &spec)?)
        }
        None => {
            let suite = single_suite(&mut rng, a.instances, a.max_side, a.lo, a.hi)?;
            for m in pick_mechanisms(&a.mechanism)? {
                let s = audit_single(m.as_ref(), &suite, truth)?;
                ok &= s.passed();
                text += &s.to_string();
            }
            None
        }
    };
    if let Some(instances) = sdm_instances {
        let s = audit_sdm(&instances, truth)?;
        ok &= s.passed();
        text += &s.to_string();
    }
    text += if ok { "PASS\n" } else { "FAIL\n" };
    emit(a.common.out.as_deref(), &text)?;
    Ok(ok)
}

/// `5`, `2,3,4` or `2..10` (inclusive).
fn parse_ks(s: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().trim_start_matches('=').parse()?);
        if a > b {
            bail!("empty k range {s}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| Ok(x.trim().parse()?)).collect()
}

fn compare_cmd(a: CompareArgs) -> Result<bool> {
    let family = match a.family {
        FamilyArg::Uniform => Family::Uniform { lo: a.lo, hi: a.hi },
        FamilyArg::Adversarial => Family::Adversarial {
            budget: a.budget,
            eps: a.eps,
        },
    };
    let config = CompareConfig {
        ks: parse_ks(&a.k)?,
        instances: a.instances,
        family,
        seed: a.common.seed,
    };
    let suite = compare::instances(&config)?;
    let rows = compare::compare(&pick_mechanisms(&a.mechanism)?, &suite)?;
    let text = match a.common.format {
        Format::Human => compare::human_table(&rows),
        Format::Csv => {
            let mut buf = Vec::new();
            compare::write_csv(&rows, &mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Json => {
            let mut buf = Vec::new();
            compare::write_json(&rows, &mut buf)?;
            String::from_utf8(buf)?
        }
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(true)
}

fn generate_cmd(a: GenerateArgs) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let instance = match a.kind {
        Kind::Uniform => Instance::Single(generate::uniform(&mut rng, a.buyers, a.sellers, a.lo, a.hi)?),
        Kind::Breakeven => Instance::Single(generate::with_breakeven(&mut rng, a.k, a.lo, a.hi)?),
        Kind::Adversarial => Instance::Single(generate::adversarial(a.k, a.budget, a.eps)?),
        Kind::Sdm => Instance::Sdm(generate::sdm(
            &mut rng,
            &SdmSpec {
                markets: a.markets,
                max_traders_per_market: a.traders_per_market,
                value_lo: a.lo,
                value_hi: a.hi,
                transit_lo: a.transit,
                transit_hi: a.transit,
            },
        )?),
    };
    emit(a.out.as_deref(), &serialize_instance(&instance))?;
    Ok(true)
}

fn reproduce_cmd(a: ReproduceArgs) -> Result<bool> {
    let report = match a.example {
        Example::Example1 => {
            if a.k < 2 {
                bail!("example1 needs k >= 2");
            }
            if !a.eps.is_positive() || a.eps >= a.budget {
                bail!("example1 needs 0 < eps < B");
            }
            reproduce::example1(a.k, &a.budget, &a.eps)?
        }
        Example::SdmMain => reproduce::sdm_main()?,
        Example::SdmAppendix => reproduce::sdm_lottery()?,
    };
    let text = match a.format {
        Format::Human => report.to_string(),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["check", "expected", "actual", "ok"])?;
            for c in &report.checks {
                w.write_record([c.label.as_str(), &c.expected, &c.actual, if c.ok { "true" } else { "false" }])?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Rec<'a> {
                check: &'a str,
                expected: &'a str,
                actual: &'a str,
                ok: bool,
            }
            let recs: Vec<Rec> = report
                .checks
                .iter()
                .map(|c| Rec {
                    check: &c.label,
                    expected: &c.expected,
                    actual: &c.actual,
                    ok: c.ok,
                })
                .collect();
            serde_json::to_string_pretty(&recs)? + "\n"
        }
    };
    print!("{text}");
    if !report.passed() {
        eprintln!("{}: mismatch", report.name);
    }
    Ok(report.passed())
}
