use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use graphloom::bench::{
    generate_dataset, render_report, run_experiment, BenchError, ExperimentConfig, GeneratorSpec,
    ReportFormat, SinkSpec,
};
use graphloom::ingest::{write_delimited, IngestError, RowReader};
use graphloom::integrate::{integrate, IntegratedClass, IntegrateError, IntegrationStats};
use graphloom::mapping::{parse_mapping_document, MappingSet, SourceFormat, TriplesMap};
use graphloom::normalize::{normalize_streaming, NormalizeError, NormalizeStats, NormalizedTable};
use graphloom::rdf::{
    rdfize, DedupeSink, ExecutionPlan, NtriplesWriter, PlanBinding, RdfizeError, Strategy,
};

#[derive(Parser)]
#[command(name = "graphloom", version, about = "Materializes RDF knowledge graphs from delimited data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a mapping, read its sources, and write N-Triples
    Materialize(MaterializeArgs),
    /// Run the strategy-comparison benchmark grid from a JSON config
    Bench(BenchArgs),
    /// Check that every column a mapping references exists in its source
    Validate(ValidateArgs),
    /// Write a synthetic TSV dataset (unique key column C0, random values)
    Generate(GenerateArgs),
}

#[derive(Args)]
struct MaterializeArgs {
    /// Mapping document (Turtle subset)
    #[arg(long)]
    mapping: PathBuf,
    /// Directory that logical source names resolve against
    #[arg(long)]
    source_dir: PathBuf,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Output N-Triples file
    #[arg(long)]
    output: PathBuf,
    /// Emit per-source triples without merging entities across sources
    #[arg(long)]
    no_integrate: bool,
    /// Keep exact duplicate triples instead of dropping them
    #[arg(long)]
    no_dedup: bool,
    /// Also write each normalized table as TSV into this directory
    #[arg(long, value_name = "DIR")]
    dump_normalized: Option<PathBuf>,
    /// Read every source as this format instead of sniffing extensions
    #[arg(long, value_enum)]
    source_format: Option<FormatArg>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatOut::Json)]
    format: FormatOut,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's sink: `null` isolates transform cost from I/O
    #[arg(long, value_enum)]
    sink: Option<SinkArg>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    mapping: PathBuf,
    #[arg(long)]
    source_dir: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    rows: u64,
    #[arg(long)]
    columns: u32,
    /// Probability that a non-key cell is empty, in [0, 1)
    #[arg(long)]
    null_rate: f64,
    #[arg(long)]
    seed: u64,
    /// Output TSV file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Class,
    Attribute,
}

impl From<StrategyArg> for Strategy {
    fn from(arg: StrategyArg) -> Self {
        match arg {
            StrategyArg::Class => Strategy::ClassBased,
            StrategyArg::Attribute => Strategy::AttributeBased,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Tsv,
}

impl From<FormatArg> for SourceFormat {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Csv => SourceFormat::Csv,
            FormatArg::Tsv => SourceFormat::Tsv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatOut {
    Json,
    Csv,
    Md,
}

impl From<FormatOut> for ReportFormat {
    fn from(arg: FormatOut) -> Self {
        match arg {
            FormatOut::Json => ReportFormat::Json,
            FormatOut::Csv => ReportFormat::Csv,
            FormatOut::Md => ReportFormat::Markdown,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SinkArg {
    File,
    Null,
}

/// Exit code 1: the input was wrong. Exit code 2: the machine failed.
enum CliError {
    User(String),
    Internal(String),
}

impl From<graphloom::mapping::MappingError> for CliError {
    fn from(e: graphloom::mapping::MappingError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { .. } => CliError::Internal(e.to_string()),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<NormalizeError> for CliError {
    fn from(e: NormalizeError) -> Self {
        match e {
            NormalizeError::Ingest(inner) => inner.into(),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<RdfizeError> for CliError {
    fn from(e: RdfizeError) -> Self {
        match e {
            RdfizeError::Io(inner) => CliError::Internal(inner.to_string()),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(_) => CliError::User(e.to_string()),
            BenchError::Ingest(inner) => inner.into(),
            BenchError::Normalize(inner) => inner.into(),
            BenchError::Rdfize(inner) => inner.into(),
            BenchError::Io(inner) => CliError::Internal(inner.to_string()),
            BenchError::Invariant(_) => CliError::Internal(e.to_string()),
        }
    }
}

fn io_internal(context: &str, e: std::io::Error) -> CliError {
    CliError::Internal(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Materialize(args) => cmd_materialize(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError::User(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(message)) => {
            eprintln!("internal error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load_mapping(path: &PathBuf) -> Result<MappingSet, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| io_internal(&format!("reading {}", path.display()), e))?;
    Ok(parse_mapping_document(&text)?)
}

fn cmd_materialize(args: MaterializeArgs) -> Result<u8, CliError> {
    let mapping = load_mapping(&args.mapping)?;
    let format_override = args.source_format.map(SourceFormat::from);

    // Fail on unbound columns before any output is written.
    let mut issues = Vec::new();
    for map in &mapping.triples_maps {
        let path = args.source_dir.join(&map.logical_source.source_name);
        let reader = RowReader::open(&path, format_override)?;
        for issue in map.validate_against_header(reader.header()) {
            issues.push(format!("<{}>: {issue}", map.id));
        }
    }
    if !issues.is_empty() {
        return Err(CliError::User(issues.join("\n")));
    }

    let mut normalized: Vec<(NormalizedTable, &TriplesMap)> = Vec::new();
    let mut norm_totals = NormalizeStats::default();
    for map in &mapping.triples_maps {
        let path = args.source_dir.join(&map.logical_source.source_name);
        let reader = RowReader::open(&path, format_override)?;
        let header = reader.header().to_vec();
        let (table, stats) =
            normalize_streaming(&map.logical_source.source_name, &header, reader, map)?;
        norm_totals.rows_read += stats.rows_read;
        norm_totals.dropped_null_subject += stats.dropped_null_subject;
        norm_totals.dropped_duplicates += stats.dropped_duplicates;
        normalized.push((table, map));
    }

    if let Some(dir) = &args.dump_normalized {
        fs::create_dir_all(dir).map_err(|e| io_internal(&format!("creating {}", dir.display()), e))?;
        for (i, (table, map)) in normalized.iter().enumerate() {
            let path = dir.join(format!("{i:02}-{}.tsv", iri_fragment(&map.id)));
            let file = File::create(&path)
                .map_err(|e| io_internal(&format!("creating {}", path.display()), e))?;
            write_delimited(&table.header, &table.rows, SourceFormat::Tsv, file)?;
        }
    }

    let mut integration_totals = IntegrationStats::default();
    let mut integrated: Vec<(IntegratedClass, Vec<&TriplesMap>)> = Vec::new();
    let bindings: Vec<PlanBinding<'_>> = if args.no_integrate {
        normalized.iter().map(|(table, map)| PlanBinding::Table { map, table }).collect()
    } else {
        let mut groups: Vec<(&str, Vec<(&NormalizedTable, &TriplesMap)>)> = Vec::new();
        for (table, map) in &normalized {
            let class = map.subject_map.class_iri.as_str();
            match groups.iter_mut().find(|(c, _)| *c == class) {
                Some((_, pairs)) => pairs.push((table, map)),
                None => groups.push((class, vec![(table, map)])),
            }
        }
        for (class_iri, pairs) in groups {
            let maps = pairs.iter().map(|&(_, map)| map).collect();
            let outcome = integrate(class_iri, pairs)?;
            integration_totals.rows_processed += outcome.stats.rows_processed;
            integration_totals.rows_skipped += outcome.stats.rows_skipped;
            integration_totals.rows_merged += outcome.stats.rows_merged;
            integration_totals.duplicate_pairs_collapsed += outcome.stats.duplicate_pairs_collapsed;
            integrated.push((outcome.class, maps));
        }
        integrated
            .iter()
            .map(|(class, maps)| PlanBinding::entities_for(class, maps.iter().copied()))
            .collect()
    };

    let plan = ExecutionPlan { strategy: args.strategy.into(), bindings };
    let file = File::create(&args.output)
        .map_err(|e| io_internal(&format!("creating {}", args.output.display()), e))?;
    let writer = NtriplesWriter::new(BufWriter::new(file));
    let (stats, dropped) = if args.no_dedup {
        let mut sink = writer;
        (rdfize(&plan, &mut sink)?, 0)
    } else {
        let mut sink = DedupeSink::new(writer);
        let stats = rdfize(&plan, &mut sink)?;
        let dropped = sink.dropped();
        (stats, dropped)
    };

    eprintln!(
        "wrote {} triples to {} in {:.3} s ({} strategy, {} passes)",
        stats.triples_emitted - dropped,
        args.output.display(),
        stats.seconds(),
        plan.strategy,
        stats.passes_performed,
    );
    eprintln!(
        "rows read: {}; null-subject rows dropped: {}; duplicate source rows dropped: {}",
        norm_totals.rows_read, norm_totals.dropped_null_subject, norm_totals.dropped_duplicates,
    );
    if !args.no_integrate {
        eprintln!(
            "entities: {}; rows merged into existing entities: {}; duplicate attribute pairs collapsed: {}",
            integrated.iter().map(|(c, _)| c.entities.len()).sum::<usize>(),
            integration_totals.rows_merged,
            integration_totals.duplicate_pairs_collapsed,
        );
    }
    if stats.rows_skipped > 0 {
        eprintln!("rows skipped at emission (null subject placeholder): {}", stats.rows_skipped);
    }
    if !args.no_dedup {
        eprintln!("duplicate triples dropped: {dropped}");
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::User(format!("reading {}: {e}", args.config.display())))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::User(format!("{}: {e}", args.config.display())))?;
    if let Some(sink) = args.sink {
        config.sink = match sink {
            SinkArg::File => SinkSpec::File,
            SinkArg::Null => SinkSpec::Null,
        };
    }
    config.validate()?;

    let cell_count = config.fractions.len() * config.attribute_counts.len() * config.strategies.len();
    eprintln!(
        "running {cell_count} cells ({} warmup + {} measured runs each, single-threaded)",
        config.warmup_runs, config.repeats,
    );
    let report = run_experiment(&config)?;
    eprintln!("done: {} cells", report.cells.len());

    let rendered = render_report(&report, args.format.into());
    match &args.out {
        Some(path) => fs::write(path, rendered)
            .map_err(|e| io_internal(&format!("writing {}", path.display()), e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| io_internal("writing report", e))?;
        }
    }
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<u8, CliError> {
    let mapping = load_mapping(&args.mapping)?;
    let mut issues = 0usize;
    let mut stdout = std::io::stdout().lock();
    for map in &mapping.triples_maps {
        let path = args.source_dir.join(&map.logical_source.source_name);
        let reader = RowReader::open(&path, None)?;
        for issue in map.validate_against_header(reader.header()) {
            issues += 1;
            writeln!(stdout, "<{}>: {issue}", map.id).map_err(|e| io_internal("writing report", e))?;
        }
    }
    writeln!(stdout, "{issues} issues").map_err(|e| io_internal("writing report", e))?;
    Ok(if issues == 0 { 0 } else { 1 })
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, CliError> {
    let spec = GeneratorSpec {
        rows: args.rows,
        columns: args.columns,
        null_rate: args.null_rate,
        seed: args.seed,
    };
    spec.validate()?;
    let file = File::create(&args.out)
        .map_err(|e| io_internal(&format!("creating {}", args.out.display()), e))?;
    let mut out = BufWriter::new(file);
    let summary = generate_dataset(&spec, &mut out)?;
    out.flush().map_err(|e| io_internal("flushing output", e))?;
    eprintln!(
        "wrote {} rows x {} columns ({} bytes) to {}",
        summary.rows,
        summary.columns,
        summary.bytes,
        args.out.display(),
    );
    Ok(0)
}

fn iri_fragment(iri: &str) -> String {
    let tail = iri.rsplit(['#', '/']).next().unwrap_or(iri);
    let cleaned: String = tail
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if cleaned.is_empty() {
        "map".to_owned()
    } else {
        cleaned
    }
}
