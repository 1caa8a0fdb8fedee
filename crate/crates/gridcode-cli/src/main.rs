//! Command-line front end: build, sample, locate, verify, export, and
//! benchmark workflows over multiset-window positioning codes.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use gridcode::grid::{ColourMultiset, GridColouring};
use gridcode::packing::PackingMatrix;
use gridcode::params::{bound_check, derive_params, CodeParams};
use gridcode::profiles::Profile;
use gridcode::verify::{self, VerificationReport, DEFAULT_VERIFY_CAP};

#[derive(Parser)]
#[command(name = "gridcode", version, about = "Multiset-window positioning codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a grid colouring and write it to a file.
    Build {
        #[arg(short)]
        d: u32,
        #[arg(short)]
        b: u32,
        #[arg(short)]
        t: u64,
        /// Output path for the grid.
        #[arg(long)]
        out: PathBuf,
        /// Output format: the native grid file or a pixmap (d = 2 only).
        #[arg(long, value_enum, default_value_t = BuildFormat::Bin)]
        format: BuildFormat,
    },
    /// Print the colour multiset of one window of a stored grid.
    Sample {
        /// Grid file to sample.
        #[arg(long = "in")]
        input: PathBuf,
        /// Window corner, comma-separated coordinates.
        #[arg(long)]
        at: String,
        /// Optional multiset file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the window corner holding a colour multiset.
    Locate {
        #[arg(short, requires = "b", requires = "t")]
        d: Option<u32>,
        #[arg(short)]
        b: Option<u32>,
        #[arg(short)]
        t: Option<u64>,
        /// Counts (`5,3,8`), pairs (`0:5,1:3,2:8`), or `@file`.
        #[arg(long)]
        multiset: String,
        /// Grid file; its parameters replace -d/-b/-t when given.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Cross-check the answer against the exhaustive window scan.
        #[arg(long)]
        oracle_check: bool,
        /// Skip the packing-level round-trip verification of the answer.
        #[arg(long)]
        no_verify: bool,
    },
    /// Run every verification oracle over a stored grid.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Cap on windows/cells examined per check.
        #[arg(long, default_value_t = DEFAULT_VERIFY_CAP)]
        cap: u64,
        /// Parallel workers for the uniqueness scan.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Print a profile sequence (or its dual) as CSV.
    Profile {
        /// Profile parameter s_p.
        #[arg(long)]
        sp: u64,
        #[arg(short)]
        m: u64,
        /// Repetition parameter; 0 selects the base family.
        #[arg(long, default_value_t = 0)]
        reps: u64,
        /// Print the m-dual instead of the profile itself.
        #[arg(long)]
        dual: bool,
    },
    /// Print a packing matrix as CSV: rows, duals, or window sums.
    Packing {
        #[arg(long)]
        sp: u64,
        #[arg(short)]
        m: u64,
        #[arg(short)]
        b: u32,
        #[arg(long, value_enum, default_value_t = PackingTable::Rows)]
        table: PackingTable,
    },
    /// Export a stored two-dimensional grid as a binary pixmap.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure build throughput and decode latency.
    Bench {
        #[arg(short)]
        d: u32,
        #[arg(short)]
        b: u32,
        #[arg(short)]
        t: u64,
        /// Grid builds to time.
        #[arg(long, default_value_t = 3)]
        reps: u64,
        /// Random multisets to decode.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuildFormat {
    Bin,
    Ppm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PackingTable {
    Rows,
    Duals,
    Sums,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code(&err));
        }
    }
}

/// 1 for usage and parameter errors, 3 when a resource guard tripped.
fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<gridcode::Error>() {
        Some(gridcode::Error::InstanceTooLarge { .. })
        | Some(gridcode::Error::CapExceeded { .. }) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Build { d, b, t, out, format } => cmd_build(d, b, t, &out, format),
        Command::Sample { input, at, out } => cmd_sample(&input, &at, out.as_deref()),
        Command::Locate { d, b, t, multiset, input, oracle_check, no_verify } => {
            cmd_locate(d, b, t, &multiset, input.as_deref(), oracle_check, no_verify)
        }
        Command::Verify { input, cap, workers, format } => cmd_verify(&input, cap, workers, format),
        Command::Profile { sp, m, reps, dual } => cmd_profile(sp, m, reps, dual),
        Command::Packing { sp, m, b, table } => cmd_packing(sp, m, b, table),
        Command::Export { input, out } => {
            let grid = gridcode::io::read_grid(&input)?;
            gridcode::io::export_image(&grid, &out)?;
            let n = grid.params().n;
            println!("wrote {} ({n}x{n} pixmap)", out.display());
            Ok(0)
        }
        Command::Bench { d, b, t, reps, samples } => cmd_bench(d, b, t, reps, samples),
    }
}

fn print_params(p: &CodeParams) {
    println!(
        "params: d={} b={} t={} m={} k={} s_p={} s_max={} n={}",
        p.d, p.b, p.t, p.m, p.k, p.s_p, p.s_max, p.n
    );
    let reps: Vec<String> = p.reps.iter().map(|r| r.to_string()).collect();
    println!("reps: [{}]", reps.join(", "));
    let bound = bound_check(p);
    println!(
        "bound: n^d = {} <= {} = C(m^d + k - 1, k - 1): {} (margin {})",
        bound.windows,
        bound.multisets,
        bound.holds,
        bound.margin().map_or_else(|| "-".into(), |m| m.to_string()),
    );
}

fn cmd_build(
    d: u32,
    b: u32,
    t: u64,
    out: &std::path::Path,
    format: BuildFormat,
) -> anyhow::Result<i32> {
    let p = derive_params(d, b, t)?;
    print_params(&p);
    let started = Instant::now();
    let grid = GridColouring::build(&p)?;
    println!("built {} cells in {:?}", p.cell_count(), started.elapsed());
    match format {
        BuildFormat::Bin => gridcode::io::write_grid(&grid, out)?,
        BuildFormat::Ppm => gridcode::io::export_image(&grid, out)?,
    }
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_sample(
    input: &std::path::Path,
    at: &str,
    out: Option<&std::path::Path>,
) -> anyhow::Result<i32> {
    let grid = gridcode::io::read_grid(input)?;
    let corner = parse_coords(at, grid.params().d)?;
    let mult = grid.colour_multiset(&corner);
    let mut line = Vec::new();
    gridcode::io::write_multiset_to(&mult, &mut line)?;
    print!("{}", String::from_utf8_lossy(&line));
    if let Some(path) = out {
        gridcode::io::write_multiset(&mult, path)?;
    }
    Ok(0)
}

fn cmd_locate(
    d: Option<u32>,
    b: Option<u32>,
    t: Option<u64>,
    multiset: &str,
    input: Option<&std::path::Path>,
    oracle_check: bool,
    no_verify: bool,
) -> anyhow::Result<i32> {
    let stored = input.map(gridcode::io::read_grid).transpose()?;
    let p = match (&stored, d, b, t) {
        (Some(grid), _, _, _) => grid.params().clone(),
        (None, Some(d), Some(b), Some(t)) => derive_params(d, b, t)?,
        _ => bail!("pass -d/-b/-t or --in to identify the code instance"),
    };
    let mult = parse_multiset_arg(multiset, p.k)?;

    let pos = if no_verify {
        gridcode::grid::localize(&mult, &p)?
    } else {
        let matrix = PackingMatrix::build(p.s_p, p.m, p.b)?;
        gridcode::grid::localize_checked(&mult, &p, &matrix)?
    };

    if oracle_check {
        let grid = match stored {
            Some(g) => g,
            None => GridColouring::build(&p)?,
        };
        let oracle = verify::oracle_localize(&grid, &mult, DEFAULT_VERIFY_CAP)?;
        if oracle.as_ref() != Some(&pos) {
            eprintln!(
                "oracle disagreement: decoder found {pos}, scan found {}",
                oracle.map_or_else(|| "nothing".into(), |o| o.to_string())
            );
            return Ok(2);
        }
        println!("oracle agreement over {} windows", p.cell_count());
    }
    println!("{pos}");
    Ok(0)
}

fn cmd_verify(
    input: &std::path::Path,
    cap: u64,
    workers: usize,
    format: ReportFormat,
) -> anyhow::Result<i32> {
    let grid = gridcode::io::read_grid(input)?;
    print_params(grid.params());
    let reports = verify::verify_all(&grid, cap, workers)?;
    let mut stdout = std::io::stdout().lock();
    match format {
        ReportFormat::Text => {
            for rep in &reports {
                writeln!(stdout, "{rep}")?;
            }
        }
        ReportFormat::Json => writeln!(stdout, "{}", reports_json(&reports))?,
        ReportFormat::Csv => {
            writeln!(stdout, "property,passed,examined,elapsed_ns,first,second,values")?;
            for r in &reports {
                let (first, second, values) = r.counterexample.as_ref().map_or(
                    (String::new(), String::new(), String::new()),
                    |ce| (join(&ce.first, ";"), join(&ce.second, ";"), ce.values.clone()),
                );
                writeln!(
                    stdout,
                    "{},{},{},{},{},{},\"{}\"",
                    r.property,
                    r.passed,
                    r.examined,
                    r.elapsed.as_nanos(),
                    first,
                    second,
                    values.replace('"', "'"),
                )?;
            }
        }
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 2 })
}

fn cmd_profile(sp: u64, m: u64, reps: u64, dual: bool) -> anyhow::Result<i32> {
    let profile = Profile::for_reps(sp, m, reps)?;
    let seq = if dual { profile.dual() } else { profile.entries().to_vec() };
    println!("{}", join(&seq, ","));
    Ok(0)
}

fn cmd_packing(sp: u64, m: u64, b: u32, table: PackingTable) -> anyhow::Result<i32> {
    let matrix = PackingMatrix::build(sp, m, b)?;
    match table {
        PackingTable::Rows => {
            for j in 0..b as usize {
                let row: Vec<u64> = matrix.row(j).iter().map(|&e| u64::from(e)).collect();
                println!("{}", join(&row, ","));
            }
        }
        PackingTable::Duals => {
            for j in 0..b as usize {
                println!("{}", join(&matrix.dual_row(j), ","));
            }
        }
        PackingTable::Sums => {
            for i in 0..matrix.width() {
                let mut fields = vec![i];
                fields.extend(matrix.window_sum(i));
                println!("{}", join(&fields, ","));
            }
        }
    }
    Ok(0)
}

fn cmd_bench(d: u32, b: u32, t: u64, reps: u64, samples: u64) -> anyhow::Result<i32> {
    if reps == 0 {
        bail!("reps must be >= 1");
    }
    let p = derive_params(d, b, t)?;
    print_params(&p);

    let mut build_rates = Vec::new();
    for _ in 0..reps {
        let started = Instant::now();
        let grid = GridColouring::build(&p)?;
        let secs = started.elapsed().as_secs_f64();
        std::hint::black_box(&grid);
        build_rates.push(p.cell_count() as f64 / secs);
    }
    build_rates.sort_by(|a, b| a.total_cmp(b));
    println!(
        "build: reps={reps} median_cells_per_s={:.0}",
        build_rates[build_rates.len() / 2]
    );

    let multisets = random_multisets(&p, samples, 0x5EED_C0DE)?;
    let batches = 20usize;
    let mut per_op = Vec::with_capacity(batches);
    for chunk in multisets.chunks(multisets.len().div_ceil(batches).max(1)) {
        let started = Instant::now();
        for mult in chunk {
            std::hint::black_box(gridcode::grid::localize(mult, &p)?);
        }
        per_op.push(started.elapsed().as_nanos() as f64 / chunk.len() as f64);
    }
    per_op.sort_by(|a, b| a.total_cmp(b));
    println!(
        "decode: samples={samples} batches={} median_ns_per_op={:.1}",
        per_op.len(),
        per_op[per_op.len() / 2]
    );
    Ok(0)
}

/// Realizable multisets drawn from random window corners: each pigment's
/// counts come straight from the packing's window-sum table, the blank
/// absorbs the rest of the window volume.
fn random_multisets(p: &CodeParams, samples: u64, seed: u64) -> anyhow::Result<Vec<ColourMultiset>> {
    let matrix = PackingMatrix::build(p.s_p, p.m, p.b)?;
    let duals: Vec<Vec<u64>> = (0..p.b as usize).map(|j| matrix.dual_row(j)).collect();
    let volume = p.window_volume();
    let (d, b) = (p.d as usize, p.b as usize);
    let mut state = seed;
    let mut out = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let mut counts = vec![0u64; p.k as usize];
        let mut coloured = 0u64;
        for i in 0..d {
            let coord = (splitmix64(&mut state) % p.n) as usize;
            for (shade, dual) in duals.iter().enumerate() {
                counts[shade * d + i] = dual[coord];
                coloured += dual[coord];
            }
        }
        counts[b * d] = volume - coloured;
        out.push(ColourMultiset::new(counts));
    }
    Ok(out)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

fn parse_coords(text: &str, d: u32) -> anyhow::Result<Vec<u64>> {
    let coords = text
        .split(',')
        .map(|part| part.trim().parse::<u64>().map_err(|_| anyhow!("bad coordinate {part:?}")))
        .collect::<anyhow::Result<Vec<u64>>>()?;
    if coords.len() != d as usize {
        bail!("expected {d} coordinates, got {}", coords.len());
    }
    Ok(coords)
}

/// Accepts `counts,...`, `colour:count,...`, or `@path` to a multiset file.
fn parse_multiset_arg(text: &str, k: u32) -> anyhow::Result<ColourMultiset> {
    if let Some(path) = text.strip_prefix('@') {
        return Ok(gridcode::io::read_multiset(std::path::Path::new(path))?);
    }
    if text.contains(':') {
        let pairs = text
            .split(',')
            .map(|part| {
                let (colour, count) = part
                    .split_once(':')
                    .ok_or_else(|| anyhow!("bad colour:count pair {part:?}"))?;
                Ok((
                    colour.trim().parse::<u32>().context("colour index")?,
                    count.trim().parse::<u64>().context("count")?,
                ))
            })
            .collect::<anyhow::Result<Vec<(u32, u64)>>>()?;
        return Ok(ColourMultiset::from_pairs(&pairs, k)?);
    }
    Ok(gridcode::io::parse_multiset(text)?)
}

fn reports_json(reports: &[VerificationReport]) -> String {
    let mut out = String::from("{\n  \"reports\": [\n");
    for (i, r) in reports.iter().enumerate() {
        let ce = r.counterexample.as_ref().map_or("null".to_string(), |ce| {
            format!(
                "{{\"first\": [{}], \"second\": [{}], \"values\": \"{}\"}}",
                join(&ce.first, ", "),
                join(&ce.second, ", "),
                ce.values.replace('\\', "\\\\").replace('"', "\\\""),
            )
        });
        out.push_str(&format!(
            "    {{\"property\": \"{}\", \"passed\": {}, \"examined\": {}, \
             \"elapsed_ns\": {}, \"counterexample\": {}}}{}\n",
            r.property,
            r.passed,
            r.examined,
            r.elapsed.as_nanos(),
            ce,
            if i + 1 < reports.len() { "," } else { "" },
        ));
    }
    out.push_str("  ]\n}");
    out
}
