use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specseq::complex::{dual_cone_comparison, mapping_cone, ComplexError, FilteredComplex};
use specseq::cube::{Code, CodeSet, CubeError};
use specseq::format::{
    complex_to_json, pages_doc, parse_complex, parse_pd, BundleDoc, CubeDoc, FormatError, MapDoc,
};
use specseq::keylemma::{check_hypotheses, run_random_instances, verify_filtered_key_lemma, verify_key_lemma};
use specseq::khovanov::{build_complex, determinant_oracle, KhovanovError, QUANTUM};
use specseq::random::ComplexParams;
use specseq::reduce::{
    compute_pages, cone_e1_comparison, oracle_pages, page_pairing, reduce_through, PageLimit, ReduceError,
    ReduceOptions, ScanOrder,
};
use specseq::triads::{format_rational, triad_from_fraction, ContinuedFraction, Convention};

#[derive(Parser)]
#[command(name = "specseq", version, about = "Filtered complexes, spectral sequence pages, cubes of resolutions and triads")]
struct Cli {
    /// Seed for every randomized harness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Khovanov resolution and random batches.
    #[arg(long, global = true, env = "SPECSEQ_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a complex document: shapes, gradings, filtration and d^2 = 0.
    Validate { input: PathBuf },
    /// Homology ranks per degree.
    Homology { input: PathBuf },
    /// Spectral sequence pages as a rank table.
    Pages(PagesArgs),
    /// Cancel every arrow of filtration drop up to --length and emit the reduced complex.
    Reduce(ReduceArgs),
    /// Mapping cone of a chain map document.
    Cone {
        input: PathBuf,
        /// Compare page 1 of the cone with the cone of the page-1 induced map.
        #[arg(long)]
        e1: bool,
    },
    /// Dual complex, or with --map compare MC(F*) with MC(F)*.
    Dual {
        input: PathBuf,
        #[arg(long)]
        map: bool,
    },
    /// Pairing between the pages of a complex and of its dual.
    Pair {
        input: PathBuf,
        #[arg(long, default_value = "collapse")]
        max_r: MaxR,
    },
    /// Assemble a cube of resolutions document.
    Cube(CubeArgs),
    /// GF(2) Khovanov complex of a planar diagram.
    Khovanov(KhovanovArgs),
    /// Continued fraction to framing triad.
    Triad(TriadArgs),
    /// Check the triangle lemma on a bundle or on random instances.
    Keylemma(KeylemmaArgs),
}

#[derive(Clone, Copy)]
enum MaxR {
    Collapse,
    Upto(usize),
}

impl std::str::FromStr for MaxR {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "collapse" {
            return Ok(MaxR::Collapse);
        }
        s.parse().map(MaxR::Upto).map_err(|_| format!("expected a page number or `collapse`, got {s:?}"))
    }
}

impl From<MaxR> for PageLimit {
    fn from(m: MaxR) -> Self {
        match m {
            MaxR::Collapse => PageLimit::Collapse,
            MaxR::Upto(r) => PageLimit::Upto(r),
        }
    }
}

#[derive(Args)]
struct PagesArgs {
    input: PathBuf,
    #[arg(long, default_value = "collapse")]
    max_r: MaxR,
    /// Cross-check against the rank-formula oracle.
    #[arg(long)]
    oracle: bool,
    /// Emit survivors and page differentials as JSON instead of the rank table.
    #[arg(long)]
    json: bool,
    /// Scan generators in a seeded random order (needs --seed).
    #[arg(long)]
    shuffle: bool,
}

#[derive(Args)]
struct ReduceArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    length: i64,
    /// Write the reduced complex here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CubeArgs {
    input: PathBuf,
    /// Comma-separated code set; defaults to all codes over the document alphabet.
    #[arg(long)]
    codes: Option<String>,
    /// Print the page rank table (codes in {a,b}^n only).
    #[arg(long)]
    pages: bool,
}

#[derive(Args)]
struct KhovanovArgs {
    input: PathBuf,
    #[arg(long)]
    reduced: bool,
    /// Marked arc for the reduced theory; defaults to the smallest label.
    #[arg(long)]
    basepoint: Option<u32>,
    /// Also write the assembled complex document here.
    #[arg(long)]
    emit_complex: Option<PathBuf>,
}

#[derive(Args)]
struct TriadArgs {
    /// Terms, e.g. `1,-2`.
    #[arg(long, allow_hyphen_values = true)]
    cf: String,
    /// Framing of the first appended unknot.
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    p: i64,
    /// Pairwise intersections -1 instead of +1.
    #[arg(long)]
    boundary: bool,
}

#[derive(Args)]
struct KeylemmaArgs {
    input: Option<PathBuf>,
    /// Run this many random instances instead (needs --seed).
    #[arg(long, conflicts_with = "input")]
    random: Option<usize>,
    #[arg(long, default_value_t = 10)]
    max_generators: usize,
}

/// An input that parsed but violates an invariant; exit code 2.
#[derive(Debug)]
struct Violation(String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Violation {}

fn violation(msg: impl Into<String>) -> anyhow::Error {
    Violation(msg.into()).into()
}

fn complex_violation(e: &ComplexError) -> Option<String> {
    match e {
        ComplexError::Invalid(report) => Some(format!("invalid complex:\n{report}")),
        ComplexError::InvalidMap(v) => Some(format!("invalid map: {v:?}")),
        ComplexError::HomotopyDefect(m) => Some(format!("homotopy defect, entries {:?}", m.entries().collect::<Vec<_>>())),
        _ => None,
    }
}

fn cube_violation(e: &CubeError) -> Option<String> {
    match e {
        CubeError::SquareNonzero { defect, pairs } => Some(format!(
            "D^2 != 0 between code pairs {}\ndefect entries (row, col, coeff): {:?}",
            pairs.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" "),
            defect.entries().collect::<Vec<_>>()
        )),
        CubeError::InvalidVertex { code, report } => Some(format!("vertex {code}:\n{report}")),
        CubeError::Invalid(report) => Some(format!("assembled complex:\n{report}")),
        CubeError::Incomplete { .. } | CubeError::E1(_) => Some(e.to_string()),
        CubeError::Complex(c) => complex_violation(c),
        _ => None,
    }
}

fn classify(e: FormatError) -> anyhow::Error {
    let v = match &e {
        FormatError::Complex(c) => complex_violation(c),
        FormatError::Cube(c) => cube_violation(c),
        _ => None,
    };
    match v {
        Some(msg) => violation(msg),
        None => anyhow!(e),
    }
}

fn classify_cube(e: CubeError) -> anyhow::Error {
    match cube_violation(&e) {
        Some(msg) => violation(msg),
        None => anyhow!(e),
    }
}

fn classify_khovanov(e: KhovanovError) -> anyhow::Error {
    match &e {
        KhovanovError::Cube(c) => cube_violation(c).map(violation).unwrap_or_else(|| anyhow!(e)),
        _ => anyhow!(e),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_complex(path: &Path) -> Result<Arc<FilteredComplex>> {
    parse_complex(&read(path)?).map(Arc::new).map_err(classify)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn reduce_error(e: ReduceError) -> anyhow::Error {
    match &e {
        ReduceError::Complex(c) => complex_violation(c).map(violation).unwrap_or_else(|| anyhow!(e)),
        _ => violation(e.to_string()),
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| anyhow!("{what} needs an explicit --seed"))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { input } => {
            let c = load_complex(&input)?;
            println!("valid: {} generators over GF({})", c.len(), c.field().characteristic());
        }
        Command::Homology { input } => {
            let c = load_complex(&input)?;
            println!("degree\trank");
            for (d, r) in c.homology_ranks() {
                println!("{d}\t{r}");
            }
            println!("total\t{}", c.total_homology_rank());
        }
        Command::Pages(args) => pages(args, cli.seed)?,
        Command::Reduce(args) => {
            let c = load_complex(&args.input)?;
            let red = reduce_through(&c, args.length, ReduceOptions::default()).map_err(reduce_error)?;
            let report = red.check();
            if !report.passed() {
                return Err(violation(format!("reduction witnesses fail: {report}")));
            }
            eprintln!("{report}");
            let json = complex_to_json(&red.after);
            match args.out {
                Some(path) => fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
        }
        Command::Cone { input, e1 } => {
            let f = load_json::<MapDoc>(&input)?.to_map().map_err(classify)?;
            if e1 {
                let report = cone_e1_comparison(&f).map_err(reduce_error)?;
                println!("degree\tfiltration_level\tcone_page1\tinduced_cone");
                let keys: std::collections::BTreeSet<_> =
                    report.cone_page1.keys().chain(report.induced_cone.keys()).collect();
                for k in keys {
                    let get = |m: &BTreeMap<(i64, i64), usize>| m.get(k).copied().unwrap_or(0);
                    println!("{}\t{}\t{}\t{}", k.0, k.1, get(&report.cone_page1), get(&report.induced_cone));
                }
                println!("match: {}", yes_no(report.matches()));
                if !report.matches() {
                    return Err(violation("page-1 tables differ"));
                }
            } else {
                let cone = mapping_cone(&f).map_err(|e| complex_violation(&e).map(violation).unwrap_or_else(|| anyhow!(e)))?;
                println!("{}", complex_to_json(&cone.complex));
            }
        }
        Command::Dual { input, map } => {
            if map {
                let f = load_json::<MapDoc>(&input)?.to_map().map_err(classify)?;
                let r = dual_cone_comparison(&f)?;
                println!("differential equal: {}", yes_no(r.differential_equal));
                println!("filtrations equal: {}", yes_no(r.filtrations_equal));
                println!("degree shift: {}", r.degree_shift.map_or("inconsistent".into(), |s| s.to_string()));
                if !(r.differential_equal && r.filtrations_equal) {
                    return Err(violation("MC(F*) differs from MC(F)*"));
                }
            } else {
                println!("{}", complex_to_json(&load_complex(&input)?.dualize()));
            }
        }
        Command::Pair { input, max_r } => {
            let c = load_complex(&input)?;
            let report = page_pairing(&c, max_r.into()).map_err(reduce_error)?;
            println!("r\tsurvivors\tpairing_rank\ttranspose\tbidegrees_match");
            for p in &report.pages {
                println!("{}\t{}\t{}\t{}\t{}", p.r, p.survivors, p.pairing_rank, yes_no(p.transpose), yes_no(p.bidegrees_match));
            }
            println!("dual table matches: {}", yes_no(report.dual_table_matches));
            println!("perfect: {}", yes_no(report.perfect()));
            if !report.perfect() {
                return Err(violation("pairing is not perfect"));
            }
        }
        Command::Cube(args) => cube(args)?,
        Command::Khovanov(args) => khovanov(args)?,
        Command::Triad(args) => triad(args)?,
        Command::Keylemma(args) => keylemma(args, cli.seed)?,
    }
    Ok(())
}

fn pages(args: PagesArgs, seed: Option<u64>) -> Result<()> {
    let c = load_complex(&args.input)?;
    let order = if args.shuffle {
        ScanOrder::Shuffled(require_seed(seed, "--shuffle")?)
    } else {
        ScanOrder::Stored
    };
    let opts = ReduceOptions { order, homotopy: true };
    let pages = compute_pages(&c, args.max_r.into(), opts).map_err(reduce_error)?;
    let table = pages.rank_table();
    if args.json {
        println!("{}", serde_json::to_string_pretty(&pages_doc(&pages))?);
    } else {
        print!("{}", table.to_tsv());
        let totals: Vec<String> = pages.pages.iter().map(|p| format!("E{}:{}", p.r, p.complex.len())).collect();
        eprintln!("totals: {}", totals.join(" "));
    }
    if args.oracle {
        let oracle = oracle_pages(&c, pages.last().r);
        if oracle != table {
            let mut dump = String::from("oracle mismatch\n");
            for k in table.0.keys().chain(oracle.0.keys()).collect::<std::collections::BTreeSet<_>>() {
                let (a, b) = (table.0.get(k).copied().unwrap_or(0), oracle.0.get(k).copied().unwrap_or(0));
                if a != b {
                    dump.push_str(&format!("r={} degree={} level={}: engine {a}, oracle {b}\n", k.0, k.1, k.2));
                }
            }
            return Err(violation(dump));
        }
        eprintln!("oracle: match through page {}", pages.last().r);
    }
    Ok(())
}

fn cube(args: CubeArgs) -> Result<()> {
    let cube = load_json::<CubeDoc>(&args.input)?.to_cube().map_err(classify)?;
    if args.pages {
        let (_, pages) = cube.pages(ReduceOptions::default()).map_err(classify_cube)?;
        print!("{}", pages.rank_table().to_tsv());
        println!("collapse page: {}", pages.collapse_page().map_or("none".into(), |r| r.to_string()));
        return Ok(());
    }
    let set: CodeSet = match &args.codes {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<Code>())
            .collect::<Result<_, _>>()
            .map_err(|e| anyhow!("bad code list: {e}"))?,
        None => CodeSet::full(cube.n, cube.alphabet),
    };
    let assembled = cube.assemble(&set).map_err(classify_cube)?;
    println!("{}", complex_to_json(&assembled.complex));
    Ok(())
}

fn khovanov(args: KhovanovArgs) -> Result<()> {
    let mut pd = parse_pd(&read(&args.input)?).map_err(classify)?;
    if pd.signs.is_none() {
        pd = pd.with_inferred_signs();
    }
    let basepoint = if args.reduced {
        Some(args.basepoint.or_else(|| pd.arcs().into_iter().min()).unwrap_or(1))
    } else {
        if args.basepoint.is_some() {
            bail!("--basepoint needs --reduced");
        }
        None
    };
    let k = build_complex(&pd, basepoint).map_err(classify_khovanov)?;
    let (_, pages) = k.cube.pages(ReduceOptions::default()).map_err(classify_cube)?;
    if k.signs_missing {
        eprintln!("warning: crossing signs unavailable; gradings are unnormalized");
    }
    println!("crossings: {} (n+ = {}, n- = {})", pd.len(), k.sign_counts.0, k.sign_counts.1);
    println!("generators: {}", k.complex().len());
    println!("h\tq\trank");
    let mut by_hq: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for g in pages.last().survivors() {
        *by_hq.entry((-g.degree, g.gradings.get(QUANTUM).copied().unwrap_or(0))).or_insert(0) += 1;
    }
    for ((h, q), r) in &by_hq {
        println!("{h}\t{q}\t{r}");
    }
    println!("pages:");
    print!("{}", pages.rank_table().to_tsv());
    let collapse = pages.collapse_page();
    println!("collapse page: {}", collapse.map_or("none".into(), |r| r.to_string()));
    let total = k.total_rank();
    if args.reduced {
        let det = determinant_oracle(&pd).map_err(classify_khovanov)?;
        println!("total reduced rank: {total}");
        println!("det oracle: {det}");
        println!("match: {}", yes_no(total as u64 == det));
    } else {
        println!("total rank: {total}");
    }
    if let Some(path) = args.emit_complex {
        fs::write(&path, complex_to_json(k.complex())).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn triad(args: TriadArgs) -> Result<()> {
    let cf: ContinuedFraction = args.cf.parse().map_err(|e| anyhow!("{e}"))?;
    let convention = if args.boundary { Convention::Boundary } else { Convention::Diagram };
    let t = triad_from_fraction(&cf, args.p, convention).map_err(|e| anyhow!("{e}"))?;
    println!("{}", format_rational(&t.evaluation.value));
    println!("i\tc_i\tA_i\tB_i");
    let conv = &t.evaluation.convergents;
    for i in -1..=cf.0.len() as i64 {
        let c = if i >= 1 { cf.0[i as usize - 1].to_string() } else { "-".into() };
        println!("{i}\t{c}\t{}\t{}", conv.numerator(i), conv.denominator(i));
    }
    println!("triad: {}", t.triad);
    println!("chain ({} length):", if t.even { "even" } else { "odd" });
    for s in &t.chain {
        let terms: Vec<String> = s.terms.iter().map(i64::to_string).collect();
        println!("  [{}] -> {}", terms.join(","), s.curve);
    }
    Ok(())
}

fn keylemma(args: KeylemmaArgs, seed: Option<u64>) -> Result<()> {
    if let Some(count) = args.random {
        let mut rng = ChaCha8Rng::seed_from_u64(require_seed(seed, "--random")?);
        let params = ComplexParams::gf2(args.max_generators, 3);
        let stats = run_random_instances(&mut rng, &params, count);
        println!(
            "generated {}, discarded {}, passed {}, failed {}",
            stats.generated, stats.discarded, stats.passed, stats.failed
        );
        if stats.failed > 0 || stats.passed < count {
            return Err(violation("random instances failed the lemma"));
        }
        return Ok(());
    }
    let path = args.input.ok_or_else(|| anyhow!("keylemma needs a bundle file or --random N"))?;
    let t = load_json::<BundleDoc>(&path)?.to_datum().map_err(classify)?;
    let hyp = check_hypotheses(&t)?;
    println!("hypothesis 1 (f_(i+1) f_i = dH_i + H_i d): {}", yes_no(hyp.first_holds()));
    println!("hypothesis 2 (psi_i quasi-isomorphism): {}", yes_no(hyp.second_holds()));
    if !hyp.passed() {
        return Err(violation(hyp.summary()));
    }
    let lemma = verify_key_lemma(&t)?;
    println!("i\talpha_qi\tbeta_qi\talpha_beta_psi\tcone_rank\ttarget_rank\titerated_cone_rank");
    for r in &lemma.indices {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.i,
            yes_no(r.alpha_quasi_iso.is_quasi_isomorphism),
            yes_no(r.beta_quasi_iso.is_quasi_isomorphism),
            yes_no(r.alpha_beta_is_psi),
            r.cone_rank,
            r.target_rank,
            r.iterated_cone_rank
        );
    }
    let filtered = verify_filtered_key_lemma(&t)?;
    println!("conclusion: {}", yes_no(lemma.passed()));
    println!("filtered conclusion: {}", yes_no(filtered.passed()));
    if !(lemma.passed() && filtered.passed()) {
        return Err(violation("lemma conclusion fails"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<Violation>() {
            Some(v) => {
                eprintln!("invariant violation: {v}");
                ExitCode::from(2)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
