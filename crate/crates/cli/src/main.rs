use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fpc_core::container::{self, DEFAULT_MODEL_CAP_BITS};
use fpc_core::entropy::EntropyAccumulator;
use fpc_core::{debruijn, AlphabetMap, AlphabetMode, Capacity, CodecChoice, CompressOptions};

/// One-pass context move-to-front compressor with bounded model memory.
#[derive(Parser)]
#[command(name = "fpc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into an FPC1 container.
    Compress(CompressArgs),
    /// Restore the original bytes from an FPC1 container.
    Decompress(IoArgs),
    /// Print empirical entropies H_0..H_L of a file.
    Analyze(AnalyzeArgs),
    /// Emit or count linear de Bruijn sequences.
    Debruijn(DebruijnArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input file, `-` for standard input.
    #[arg(default_value = "-")]
    input: PathBuf,
    /// Output file; standard output when omitted.
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphabetArg {
    Raw,
    Dense,
}

impl From<AlphabetArg> for AlphabetMode {
    fn from(a: AlphabetArg) -> Self {
        match a {
            AlphabetArg::Raw => AlphabetMode::Raw,
            AlphabetArg::Dense => AlphabetMode::Dense,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecArg {
    Footprint,
    Mtf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct CompressArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Context order ℓ.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// List capacity k per context.
    #[arg(long, conflicts_with = "epsilon")]
    capacity: Option<u32>,
    /// Capacity exponent: k = min(floor(n^epsilon), n).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "raw")]
    alphabet: AlphabetArg,
    #[arg(long, value_enum, default_value = "footprint")]
    codec: CodecArg,
    /// Write the size report here instead of standard error.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    report_format: ReportFormat,
    /// Refuse models whose n^ℓ·k·⌈log2 n⌉ budget exceeds this many bits.
    #[arg(long, default_value_t = DEFAULT_MODEL_CAP_BITS)]
    model_cap_bits: u64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input file, `-` for standard input.
    #[arg(default_value = "-")]
    input: PathBuf,
    /// Highest order L to report.
    #[arg(long, default_value_t = 2)]
    max_order: usize,
    #[arg(long, value_enum, default_value = "raw")]
    alphabet: AlphabetArg,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DebruijnMode {
    Emit,
    Count,
}

#[derive(Args)]
struct DebruijnArgs {
    /// Alphabet size.
    #[arg(long)]
    n: u32,
    /// Order ℓ.
    #[arg(long)]
    order: usize,
    #[arg(long, value_enum, default_value = "emit")]
    mode: DebruijnMode,
    /// Emit the whole linear sequence instead of its first n^ℓ symbols.
    #[arg(long)]
    full: bool,
    /// Output file; standard output when omitted.
    output: Option<PathBuf>,
}

fn is_stdin(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if is_stdin(path) {
        Ok(Box::new(io::stdin().lock()))
    } else {
        let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
        Ok(Box::new(file))
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn compress(args: CompressArgs) -> Result<()> {
    let codec = match args.codec {
        CodecArg::Footprint => {
            let capacity = match (args.capacity, args.epsilon) {
                (Some(k), None) => Capacity::Fixed(k),
                (None, Some(eps)) => Capacity::Epsilon(eps),
                _ => bail!("the footprint codec needs exactly one of --capacity or --epsilon"),
            };
            CodecChoice::Footprint { order: args.order, capacity }
        }
        CodecArg::Mtf => CodecChoice::Mtf,
    };
    let options = CompressOptions {
        codec,
        alphabet: args.alphabet.into(),
        model_cap_bits: args.model_cap_bits,
    };

    let path = &args.io.input;
    let output = open_output(args.io.output.as_deref())?;
    let (mut output, report) = if is_stdin(path) {
        let mut data = Vec::new();
        io::stdin().lock().read_to_end(&mut data).context("cannot read standard input")?;
        let header = options.header(AlphabetMap::for_mode(options.alphabet, &data), data.len() as u64)?;
        container::compress_stream(&data[..], output, &header)?
    } else {
        let length = std::fs::metadata(path)
            .with_context(|| format!("cannot read {}", path.display()))?
            .len();
        let alphabet = match options.alphabet {
            AlphabetMode::Raw => AlphabetMap::Raw,
            AlphabetMode::Dense => {
                // The map goes in the header, so collect it before coding.
                let mut present = [false; 256];
                let mut reader = BufReader::new(open_input(path)?);
                let mut buf = [0u8; 1 << 16];
                loop {
                    let read = reader.read(&mut buf)?;
                    if read == 0 {
                        break;
                    }
                    for &b in &buf[..read] {
                        present[usize::from(b)] = true;
                    }
                }
                AlphabetMap::dense_from_presence(&present)
            }
        };
        let header = options.header(alphabet, length)?;
        container::compress_stream(open_input(path)?, output, &header)?
    };
    output.flush()?;

    let rendered = match args.report_format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json() + "\n",
    };
    match args.report {
        Some(p) => std::fs::write(&p, rendered).with_context(|| format!("cannot write {}", p.display()))?,
        None => io::stderr().write_all(rendered.as_bytes())?,
    }
    Ok(())
}

fn decompress(args: IoArgs) -> Result<()> {
    let input = BufReader::new(open_input(&args.input)?);
    let output = open_output(args.output.as_deref())?;
    match container::decompress_stream(input, output) {
        Ok((mut output, _)) => {
            output.flush()?;
            Ok(())
        }
        Err(e) => {
            if let Some(p) = &args.output {
                let _ = std::fs::remove_file(p);
            }
            Err(e.into())
        }
    }
}

/// Largest order whose context space `n^L` stays within 2^32.
fn order_cap(n: u32) -> usize {
    let mut cap = 0;
    while u64::from(n).checked_pow(cap as u32 + 1).is_some_and(|c| c <= 1 << 32) {
        cap += 1;
    }
    cap
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let mut reader = BufReader::new(open_input(&args.input)?);
    // Counting on raw byte values keeps one pass; ascending byte order is
    // also dense symbol order, so the entropies are identical.
    let mut acc = EntropyAccumulator::new(256, args.max_order)?;
    let mut present = [false; 256];
    let mut buf = [0u8; 1 << 16];
    loop {
        let read = reader.read(&mut buf)?;
        if read == 0 {
            break;
        }
        for &b in &buf[..read] {
            present[usize::from(b)] = true;
            acc.push(u32::from(b));
        }
    }
    let n = match args.alphabet {
        AlphabetArg::Raw => 256,
        AlphabetArg::Dense => AlphabetMap::dense_from_presence(&present).alphabet_size(),
    };
    let cap = order_cap(n);
    if args.max_order > cap {
        bail!("--max-order {} exceeds the cap of {cap} for an alphabet of size {n}", args.max_order);
    }
    let mut report = acc.report();
    report.alphabet_size = n;

    let mut out = io::stdout().lock();
    match args.format {
        ReportFormat::Json => {
            let mut value = serde_json::to_value(&report)?;
            for e in &report.values {
                value[format!("h{}", e.order)] = e.bits.into();
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        }
        ReportFormat::Text => {
            writeln!(out, "n {n}")?;
            writeln!(out, "symbols {}", report.length)?;
            writeln!(out, "distinct {}", report.distinct)?;
            writeln!(out, "log2_n {}", f64::from(n).log2())?;
            for e in &report.values {
                writeln!(out, "h{} {}", e.order, e.bits)?;
            }
            for b in &report.breakdown {
                let total = report.length as f64 * report.get(b.order).unwrap_or(0.0);
                let ok = (b.weighted_sum - total).abs() <= 1e-9 * total.max(1.0);
                writeln!(out, "contexts{} {}", b.order, b.rows.len())?;
                writeln!(out, "decomposition{} {} {} {}", b.order, b.weighted_sum, total, if ok { "ok" } else { "mismatch" })?;
            }
        }
    }
    Ok(())
}

fn debruijn_cmd(args: DebruijnArgs) -> Result<()> {
    match args.mode {
        DebruijnMode::Count => {
            let counted = debruijn::enumerate_count(args.n, args.order)?;
            let formula = debruijn::formula_count(args.n, args.order)
                .map_or_else(|| "overflow".to_string(), |f| f.to_string());
            let mut out = open_output(args.output.as_deref())?;
            writeln!(out, "{counted} {formula}")?;
            out.flush()?;
        }
        DebruijnMode::Emit => {
            if args.n > 256 {
                bail!("cannot emit symbols of a {}-ary alphabet as bytes", args.n);
            }
            let mut sequence = debruijn::generate(args.n, args.order)?;
            if !args.full {
                sequence.truncate(sequence.len() + 1 - args.order);
            }
            let bytes: Vec<u8> = sequence.into_iter().map(|s| s as u8).collect();
            let mut out = open_output(args.output.as_deref())?;
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Compress(args) => compress(args),
        Command::Decompress(args) => decompress(args),
        Command::Analyze(args) => analyze(args),
        Command::Debruijn(args) => debruijn_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fpc: {e:#}");
            ExitCode::FAILURE
        }
    }
}
