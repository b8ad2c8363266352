//! Command-line surface: generate, verify, trace, bound, search, report.
//!
//! Inputs are the JSON documents of [`crate::model`]; the kind is detected by
//! the presence of a `blocks` (set system) or `words` (code) field. Exit
//! status 0 means success or property holds, 1 means the property fails and a
//! witness was emitted, 2 means the invocation or input was unusable.

use crate::bounds::{ipps_bounds, ipps_expected_size, mippc_rate_bounds, optimize_p, rate_table_report};
use crate::fchannel::{is_scheme_direct, is_scheme_local, Channel, SchemeVerdict, Universe};
use crate::ipps::{
    check_2ipps, delta_construction, find_bad_packets, random_expurgated_ipps_with,
    structural_report, DeletionRule, ExpurgationOptions, IppsError,
};
use crate::mippc::{
    check_ippc_implies_mippc, random_expurgated_mippc_with, trace_ippc, trace_mippc, MippcError,
};
use crate::model::{
    parse_code, parse_descendant, parse_set_system, serialize_code, serialize_set_system, Code,
    Descendant, SetSystem,
};
use crate::search::{max_ipps_with, max_mippc_with, SearchOptions};
use crate::TraceError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use num::ToPrimitive;
use serde_json::json;
use std::error::Error;
use std::io::Read;
use std::process::ExitCode;

type CliResult = Result<ExitCode, Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "pidkit",
    version,
    about = "Parent-identifying set systems and codes: generate, verify, trace, bound, search"
)]
struct Cli {
    /// Emit machine-readable JSON instead of plain text where both exist.
    #[arg(long, global = true)]
    json: bool,
    /// Thread cap, accepted for script compatibility. The algorithms run
    /// sequentially, so any value produces identical results.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a parent-identifying set system.
    GenIpps(GenIpps),
    /// Generate a code surviving the symbol-set channel.
    GenMippc(GenMippc),
    /// Decide the parent-identifying property for a system or code.
    Verify(Verify),
    /// Intersect the possible parent coalitions of one descendant.
    Trace(Trace),
    /// Closed-form size and rate bounds.
    Bounds(BoundsCmd),
    /// Exact maximum sizes by exhaustive search at small parameters.
    Search(SearchCmd),
    /// Structural statistics for a system, or channel comparison for a code.
    Report(Report),
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum RuleArg {
    /// Delete the lexicographically largest member of each offending group.
    #[default]
    LexLargest,
    /// Delete members covering the most offending groups first.
    Greedy,
}

impl From<RuleArg> for DeletionRule {
    fn from(rule: RuleArg) -> DeletionRule {
        match rule {
            RuleArg::LexLargest => DeletionRule::LexLargest,
            RuleArg::Greedy => DeletionRule::GreedyCover,
        }
    }
}

#[derive(Args)]
struct GenIpps {
    /// Ground-set size.
    #[arg(long)]
    v: u32,
    /// Block size.
    #[arg(long)]
    w: u32,
    /// Emit the shared-core construction (size v-w+1, works for every t)
    /// instead of sampling.
    #[arg(long)]
    delta: bool,
    /// Coalition size bound.
    #[arg(long, required_unless_present = "delta", conflicts_with = "delta")]
    t: Option<u32>,
    /// RNG seed; required for the randomized construction.
    #[arg(long, required_unless_present = "delta", conflicts_with = "delta")]
    seed: Option<u64>,
    /// Keep-probability for block sampling; defaults to the grid optimum.
    #[arg(long, conflicts_with = "delta")]
    p: Option<f64>,
    #[arg(long, value_enum, default_value_t, conflicts_with = "delta")]
    rule: RuleArg,
    /// Cap on enumeration work; PIDKIT_BUDGET is the fallback.
    #[arg(long, conflicts_with = "delta")]
    budget: Option<u64>,
}

#[derive(Args)]
struct GenMippc {
    /// Word length.
    #[arg(long)]
    n: u32,
    /// Alphabet size.
    #[arg(long)]
    q: u32,
    /// Coalition size bound.
    #[arg(long)]
    t: u32,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Words to sample; defaults to ceil(epsilon * q^(tn/(2t-1))).
    #[arg(long)]
    m: Option<usize>,
    /// Scale factor for the default word count.
    #[arg(long, default_value_t = 1.0, conflicts_with = "m")]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t)]
    rule: RuleArg,
    /// Cap on enumeration work; PIDKIT_BUDGET is the fallback.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum MethodArg {
    /// Enumerate every coalition and descendant.
    #[default]
    Direct,
    /// Check all small sub-universes, each by the direct method.
    Local,
    /// Count pairwise union overlaps; set systems with t = 2 only.
    Overlap,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum ChannelArg {
    /// Block channel for systems, symbol-set channel for codes.
    #[default]
    Auto,
    /// Descendants are w-subsets of the coalition's block union.
    Ipps,
    /// The single descendant is the whole block union.
    Or,
    /// The single descendant is the coordinate symbol-set vector.
    Mippc,
    /// Descendants are words in the coordinate product.
    Ippc,
}

#[derive(Args)]
struct Verify {
    /// Coalition size bound.
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum, default_value_t)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t)]
    channel: ChannelArg,
    /// Path to the JSON document, or - for stdin.
    input: String,
}

#[derive(Args)]
struct Trace {
    /// Coalition size bound.
    #[arg(long)]
    t: u32,
    /// Path to the descendant document {"kind": ..., "value": ...}.
    #[arg(long)]
    descendant: String,
    /// Path to the JSON document, or - for stdin.
    input: String,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("family").required(true).args(["ipps", "mippc", "rate_table"])))]
struct BoundsCmd {
    /// Size bounds for block systems; needs --v --w --t.
    #[arg(long)]
    ipps: bool,
    /// Asymptotic rate bounds for codes; needs --n --t.
    #[arg(long)]
    mippc: bool,
    /// Reproduce the published rate comparison table.
    #[arg(long)]
    rate_table: bool,
    #[arg(long)]
    v: Option<u32>,
    #[arg(long)]
    w: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    t: Option<u32>,
    /// Alphabet size for the finite-alphabet ceiling; needs --c.
    #[arg(long, requires = "c")]
    q: Option<u32>,
    /// Constant in the finite-alphabet ceiling; needs --q.
    #[arg(long, requires = "q")]
    c: Option<f64>,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("family").required(true).args(["ipps", "mippc"])))]
struct SearchCmd {
    /// Maximum block-system size; needs --v --w --t.
    #[arg(long)]
    ipps: bool,
    /// Maximum code size; needs --n --q --t.
    #[arg(long)]
    mippc: bool,
    #[arg(long)]
    v: Option<u32>,
    #[arg(long)]
    w: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    /// Coalition size bound.
    #[arg(long)]
    t: u32,
    /// Node budget; PIDKIT_BUDGET is the fallback.
    #[arg(long)]
    budget: Option<u64>,
    /// Search all families instead of only those containing the least
    /// block or word.
    #[arg(long)]
    no_isomorph_rejection: bool,
}

#[derive(Args)]
struct Report {
    /// Coalition size bound for packet and channel checks.
    #[arg(long, default_value_t = 2)]
    t: u32,
    /// Path to the JSON document, or - for stdin.
    input: String,
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::GenIpps(args) => gen_ipps(args),
        Command::GenMippc(args) => gen_mippc(args),
        Command::Verify(args) => verify(args, cli.json),
        Command::Trace(args) => trace(args, cli.json),
        Command::Bounds(args) => bounds(args, cli.json),
        Command::Search(args) => search(args, cli.json),
        Command::Report(args) => report(args, cli.json),
    }
}

enum InputDoc {
    System(SetSystem),
    Code(Code),
}

fn read_text(path: &str) -> Result<String, Box<dyn Error>> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        Ok(std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?)
    }
}

fn read_input(path: &str) -> Result<InputDoc, Box<dyn Error>> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let keys = value.as_object().ok_or("input must be a JSON object")?;
    if keys.contains_key("blocks") {
        Ok(InputDoc::System(parse_set_system(&text)?))
    } else if keys.contains_key("words") {
        Ok(InputDoc::Code(parse_code(&text)?))
    } else {
        Err(r#"input needs a "blocks" (set system) or "words" (code) field"#.into())
    }
}

fn resolve_budget(flag: Option<u64>) -> Result<Option<u64>, Box<dyn Error>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("PIDKIT_BUDGET") {
        Ok(text) => Ok(Some(text.parse().map_err(|_| format!("PIDKIT_BUDGET: {text:?} is not a number"))?)),
        Err(_) => Ok(None),
    }
}

fn expurgation_options(rule: RuleArg, budget: Option<u64>) -> Result<ExpurgationOptions, Box<dyn Error>> {
    let mut options = ExpurgationOptions { rule: rule.into(), ..Default::default() };
    if let Some(budget) = resolve_budget(budget)? {
        options.budget = budget;
    }
    Ok(options)
}

/// ceil(epsilon * q^(tn/(2t-1))), nudged below the float before rounding up
/// so representation noise on exact integers cannot add one.
fn default_word_count(n: u32, q: u32, t: u32, epsilon: f64) -> usize {
    let exponent = t as f64 * n as f64 / (2.0 * t as f64 - 1.0);
    let x = epsilon * (q as f64).powf(exponent);
    (x - 1e-9).ceil().max(1.0) as usize
}

fn gen_ipps(args: GenIpps) -> CliResult {
    let system = if args.delta {
        delta_construction(args.v, args.w)?
    } else {
        let (t, seed) = (args.t.expect("required"), args.seed.expect("required"));
        let p = match args.p {
            Some(p) => p,
            None => optimize_p(args.v, args.w, t)?,
        };
        let options = expurgation_options(args.rule, args.budget)?;
        random_expurgated_ipps_with(args.v, args.w, t, p, seed, options)?
    };
    println!("{}", serialize_set_system(&system));
    Ok(ExitCode::SUCCESS)
}

fn gen_mippc(args: GenMippc) -> CliResult {
    let m = args.m.unwrap_or_else(|| default_word_count(args.n, args.q, args.t, args.epsilon));
    let options = expurgation_options(args.rule, args.budget)?;
    let code = random_expurgated_mippc_with(args.n, args.q, m, args.t, args.seed, options)?;
    println!("{}", serialize_code(&code));
    Ok(ExitCode::SUCCESS)
}

fn channel_name(channel: Channel) -> &'static str {
    match channel {
        Channel::Ipps { .. } => "ipps",
        Channel::Or => "or",
        Channel::Mippc => "mippc",
        Channel::Ippc => "ippc",
    }
}

fn pick_channel(doc: &InputDoc, arg: ChannelArg) -> Result<Channel, Box<dyn Error>> {
    match (doc, arg) {
        (InputDoc::System(s), ChannelArg::Auto | ChannelArg::Ipps) => {
            Ok(Channel::Ipps { w: s.w() })
        }
        (InputDoc::System(_), ChannelArg::Or) => Ok(Channel::Or),
        (InputDoc::Code(_), ChannelArg::Auto | ChannelArg::Mippc) => Ok(Channel::Mippc),
        (InputDoc::Code(_), ChannelArg::Ippc) => Ok(Channel::Ippc),
        (InputDoc::System(_), _) => Err("that channel applies to codes, but the input is a set system".into()),
        (InputDoc::Code(_), _) => Err("that channel applies to set systems, but the input is a code".into()),
    }
}

fn emit_verdict(verdict: &SchemeVerdict, t: u32, channel: Channel, json: bool) -> CliResult {
    if json {
        println!("{}", serde_json::to_string_pretty(verdict)?);
    } else {
        match verdict.violation() {
            None => println!("property holds (t = {t}, channel = {})", channel_name(channel)),
            Some(v) => {
                println!("property violated (t = {t}, channel = {})", channel_name(channel));
                println!("coalition: {}", serde_json::to_string(&v.coalition)?);
                println!("descendant: {}", serde_json::to_string(&v.descendant)?);
                println!("producing coalitions: {}", serde_json::to_string(&v.parents)?);
            }
        }
    }
    Ok(if verdict.holds() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn verify(args: Verify, json: bool) -> CliResult {
    let doc = read_input(&args.input)?;
    let channel = pick_channel(&doc, args.channel)?;
    let universe: Universe = match &doc {
        InputDoc::System(s) => s.into(),
        InputDoc::Code(c) => c.into(),
    };
    match args.method {
        MethodArg::Direct => emit_verdict(&is_scheme_direct(universe, args.t, channel)?, args.t, channel, json),
        MethodArg::Local => emit_verdict(&is_scheme_local(universe, args.t, channel)?, args.t, channel, json),
        MethodArg::Overlap => {
            let InputDoc::System(system) = &doc else {
                return Err("the overlap method only checks set systems".into());
            };
            if args.t != 2 {
                return Err("the overlap method decides t = 2 only; pass --t 2".into());
            }
            if !matches!(channel, Channel::Ipps { .. }) {
                return Err("the overlap method uses the block channel".into());
            }
            match check_2ipps(system) {
                None => {
                    if json {
                        println!("{}", json!({ "verdict": "holds" }));
                    } else {
                        println!("property holds (t = 2, channel = ipps)");
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Some(witness) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::to_string_pretty(&json!({
                                "verdict": "violated",
                                "witness": witness,
                            }))?
                        );
                    } else {
                        println!("property violated (t = 2, channel = ipps)");
                        println!("witness: {}", serde_json::to_string(&witness)?);
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn emit_trace(outcome: Result<Vec<usize>, TraceError>, json: bool) -> CliResult {
    match outcome {
        Ok(members) => {
            if json {
                println!("{}", json!({ "traced": members }));
            } else {
                println!("guaranteed members: {members:?}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(failure) => {
            if json {
                println!("{}", serde_json::to_string(&failure)?);
            } else {
                println!("{failure}");
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn trace(args: Trace, json: bool) -> CliResult {
    let doc = read_input(&args.input)?;
    let descendant = parse_descendant(&read_text(&args.descendant)?)?;
    match (&doc, descendant) {
        (InputDoc::System(system), Descendant::PointSet(points)) => {
            match crate::ipps::trace_ipps(system, &points, args.t) {
                Ok(members) => emit_trace(Ok(members), json),
                Err(IppsError::Trace(failure)) => emit_trace(Err(failure), json),
                Err(other) => Err(other.into()),
            }
        }
        (InputDoc::Code(code), Descendant::ColumnSets(sets)) => {
            match trace_mippc(code, &sets, args.t) {
                Ok(members) => emit_trace(Ok(members), json),
                Err(MippcError::Trace(failure)) => emit_trace(Err(failure), json),
                Err(other) => Err(other.into()),
            }
        }
        (InputDoc::Code(code), Descendant::Word(word)) => {
            match trace_ippc(code, &word, args.t) {
                Ok(members) => emit_trace(Ok(members), json),
                Err(MippcError::Trace(failure)) => emit_trace(Err(failure), json),
                Err(other) => Err(other.into()),
            }
        }
        (InputDoc::System(_), d) => Err(format!(
            "a set system traces point_set descendants, got {}",
            descendant_kind(&d)
        )
        .into()),
        (InputDoc::Code(_), d) => Err(format!(
            "a code traces column_sets or word descendants, got {}",
            descendant_kind(&d)
        )
        .into()),
    }
}

fn descendant_kind(d: &Descendant) -> &'static str {
    match d {
        Descendant::PointSet(_) => "point_set",
        Descendant::Word(_) => "word",
        Descendant::ColumnSets(_) => "column_sets",
        Descendant::UnionSet(_) => "union_set",
    }
}

fn need(flag: Option<u32>, name: &str, mode: &str) -> Result<u32, Box<dyn Error>> {
    flag.ok_or_else(|| format!("{mode} requires {name}").into())
}

fn bounds(args: BoundsCmd, json: bool) -> CliResult {
    if args.rate_table {
        let table = rate_table_report();
        if json {
            println!("{}", serde_json::to_string_pretty(&table)?);
        } else {
            println!("{:<8} {:>9} {:>9} {:>6}   {:>9} {:>9} {:>6}", "(n,t)", "lower", "printed", "ok", "upper", "printed", "ok");
            for c in &table {
                println!(
                    "{:<8} {:>9.3} {:>9.3} {:>6}   {:>9.3} {:>9.3} {:>6}",
                    format!("({},{})", c.n, c.t),
                    c.lower_computed.as_f64(),
                    c.lower_printed.as_f64(),
                    if c.lower_matches { "yes" } else { "FLAG" },
                    c.upper_computed.as_f64(),
                    c.upper_printed.as_f64(),
                    if c.upper_matches { "yes" } else { "FLAG" },
                );
            }
        }
        return Ok(ExitCode::SUCCESS);
    }

    if args.ipps {
        let (v, w, t) = (
            need(args.v, "--v", "--ipps")?,
            need(args.w, "--w", "--ipps")?,
            need(args.t, "--t", "--ipps")?,
        );
        let b = ipps_bounds(v, w, t)?;
        let p = optimize_p(v, w, t)?;
        let expected = ipps_expected_size(v, w, t, &BigRational::from_float(p).expect("grid p is finite"))?;
        if json {
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "bounds": b,
                    "optimized_p": p,
                    "expected_size_at_p": {
                        "num": expected.numer().to_string(),
                        "den": expected.denom().to_string(),
                        "approx": expected.to_f64(),
                    },
                }))?
            );
        } else {
            println!("size bounds for w = {w} blocks over {v} points, coalitions up to {t}");
            println!("  construction lower bound: {}", b.lower);
            println!("  counting upper bound: {}", b.upper);
            println!("  randomized growth exponent: v^({})", b.growth_exponent);
            if let Some(exact) = b.exact {
                println!("  known exact maximum: {exact}");
            }
            println!("  optimized keep probability: {p:.6e}");
            println!(
                "  expected surviving blocks at that probability: {:.6}",
                expected.to_f64().unwrap_or(f64::NAN)
            );
        }
        return Ok(ExitCode::SUCCESS);
    }

    let (n, t) = (need(args.n, "--n", "--mippc")?, need(args.t, "--t", "--mippc")?);
    let finite = args.q.map(|q| (q, args.c.expect("clap ties --q to --c")));
    let r = mippc_rate_bounds(n, t, finite)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        println!("asymptotic rate bounds for length {n}, coalitions up to {t}");
        println!("  lower rate: {} = {:.3}", r.lower_rate, r.lower_rate.as_f64());
        println!("  upper rate: {} = {:.3}", r.upper_rate, r.upper_rate.as_f64());
        if let (Some((q, c)), Some(words)) = (finite, r.finite_upper) {
            println!("  word-count ceiling at q = {q}, c = {c}: {words:.3}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn search(args: SearchCmd, json: bool) -> CliResult {
    let mut options = SearchOptions::default();
    if let Some(budget) = resolve_budget(args.budget)? {
        options.node_budget = budget;
    }
    options.isomorph_rejection = !args.no_isomorph_rejection;

    if args.ipps {
        let (v, w) = (need(args.v, "--v", "--ipps")?, need(args.w, "--w", "--ipps")?);
        let r = max_ipps_with(v, w, args.t, options)?;
        if json {
            println!("{}", serde_json::to_string_pretty(&r)?);
        } else {
            println!("maximum size: {} (nodes explored: {})", r.max_size, r.nodes_explored);
            println!("witness: {}", serialize_set_system(&r.witness));
        }
    } else {
        let (n, q) = (need(args.n, "--n", "--mippc")?, need(args.q, "--q", "--mippc")?);
        let r = max_mippc_with(n, q, args.t, options)?;
        if json {
            println!("{}", serde_json::to_string_pretty(&r)?);
        } else {
            println!("maximum size: {} (nodes explored: {})", r.max_size, r.nodes_explored);
            println!("witness: {}", serialize_code(&r.witness));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report(args: Report, json: bool) -> CliResult {
    match read_input(&args.input)? {
        InputDoc::System(system) => {
            let structure = structural_report(&system);
            let packets = find_bad_packets(&system, args.t)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "structure": structure,
                        "bad_packets": packets,
                    }))?
                );
            } else {
                println!("blocks: {}", system.len());
                println!("max pairwise intersection: {}", structure.max_pairwise_intersection);
                println!("blocks with a private point: {}", structure.one_own_subset_block_count);
                println!(
                    "blocks sharing exactly two points with another: {}",
                    structure.two_intersection_block_count
                );
                println!(
                    "some pair shares all but one point: {}",
                    structure.has_pair_sharing_all_but_one
                );
                println!("bad packets (t = {}): {}", args.t, packets.len());
                for p in &packets {
                    println!("  blocks {:?} span {:?}", p.blocks, p.span);
                }
            }
        }
        InputDoc::Code(code) => {
            let comparison = check_ippc_implies_mippc(&code, args.t)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&comparison)?);
            } else {
                println!("word channel (ippc): {}", if comparison.ippc.holds() { "holds" } else { "violated" });
                println!("symbol-set channel (mippc): {}", if comparison.mippc.holds() { "holds" } else { "violated" });
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
