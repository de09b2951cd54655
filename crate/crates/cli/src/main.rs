use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tracelab::dataset::{build_dataset, build_test_suite, emit_training_text, swap_traces, Instance, TEST_SET_SIZE};
use tracelab::eval::{load_responses, render, score, EvalReport, ReportFormat, ResponseRecord};
use tracelab::generators::{generate, GeneratorConfig, GeneratorKind};
use tracelab::sokoban::gen_sokoban;
use tracelab::tokens::{encode_problem, encode_sokoban_problem, to_line};
use tracelab::validate::Problem;
use tracelab::{batch, seed, Dataset, Source, TextMode};

#[derive(Parser)]
#[command(name = "tracelab", version, about = "Search-trace datasets for grid mazes and Sokoban")]
struct Cli {
    /// Worker threads for batch stages (0 = all cores).
    #[arg(long, global = true, env = "TRACELAB_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Size {
    #[arg(long, default_value_t = 30)]
    width: u16,
    #[arg(long, default_value_t = 30)]
    height: u16,
}

#[derive(Subcommand)]
enum Command {
    /// Generate maze instances as JSON lines.
    GenMaze {
        #[arg(long)]
        generator: GeneratorKind,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[command(flatten)]
        size: Size,
        /// Emit problem token lines instead of JSON.
        #[arg(long)]
        tokens: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate Sokoban instances as JSON lines.
    GenSokoban {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        tokens: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate, solve and label a dataset; writes records plus manifest.
    BuildDataset {
        /// wilson, kruskal, dfs, drunkard, searchformer or sokoban.
        #[arg(long)]
        generator: Source,
        #[arg(long)]
        count: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reassign traces between records so none keeps its own.
    Swap {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        swap_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one training line per record.
    EmitText {
        #[arg(long)]
        dataset: PathBuf,
        /// solution_only or with_trace.
        #[arg(long)]
        mode: TextMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the held-out test set for every maze generator.
    BuildTests {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = TEST_SET_SIZE)]
        count: u64,
        #[command(flatten)]
        size: Size,
        /// Output directory; one `<generator>.jsonl` per test set.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a dataset's digest and re-validate every stored trace and plan.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "text-table")]
        format: ReportFormat,
    },
    /// Score response files against test sets. `--dataset` and
    /// `--responses` pair up in order.
    Score {
        #[arg(long, required = true)]
        dataset: Vec<PathBuf>,
        #[arg(long, required = true)]
        responses: Vec<PathBuf>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render a JSON evaluation report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "text-table")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn lines(items: impl IntoIterator<Item = String>) -> String {
    items.into_iter().map(|mut l| {
        l.push('\n');
        l
    }).collect()
}

fn instance_line(problem: &Problem, index: u64, seed: u64, tokens: bool) -> Result<String> {
    if tokens {
        let toks = match problem {
            Problem::Maze(m) => encode_problem(m)?,
            Problem::Sokoban(s) => encode_sokoban_problem(s)?,
        };
        return Ok(to_line(&toks));
    }
    let mut v = serde_json::to_value(Instance::from_problem(problem))?;
    v["index"] = index.into();
    v["seed"] = seed.into();
    Ok(serde_json::to_string(&v)?)
}

fn test_set_name(path: &Path, dataset: &Dataset) -> String {
    match dataset.manifest.generator {
        Source::Maze(k) => k.name().to_string(),
        Source::Sokoban => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    }
}

fn load(path: &Path) -> Result<Dataset> {
    Dataset::load(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenMaze { generator, seed: master, count, size, tokens, out } => {
            let template = GeneratorConfig::new(generator, master).with_size(size.width, size.height);
            template.validate()?;
            let rows = batch::map_range(count, |i| -> Result<String> {
                let s = seed::derive(master, i);
                let m = generate(&template.clone().with_seed(s))?;
                instance_line(&Problem::Maze(m), i, s, tokens)
            });
            write_output(out.as_deref(), &lines(rows.into_iter().collect::<Result<Vec<_>>>()?))
        }
        Command::GenSokoban { seed: master, count, tokens, out } => {
            let rows = batch::map_range(count, |i| -> Result<String> {
                let s = seed::derive(master, i);
                instance_line(&Problem::Sokoban(gen_sokoban(s)?), i, s, tokens)
            });
            write_output(out.as_deref(), &lines(rows.into_iter().collect::<Result<Vec<_>>>()?))
        }
        Command::BuildDataset { generator, count, seed, size, out } => {
            let kind = match generator {
                Source::Maze(k) => k,
                Source::Sokoban => GeneratorKind::Wilson,
            };
            let template = GeneratorConfig::new(kind, seed).with_size(size.width, size.height);
            eprintln!("building {count} {generator} records (seed {seed})");
            let d = build_dataset(generator, &template, count, seed)?;
            d.write(&out)?;
            eprintln!("wrote {} ({})", out.display(), d.manifest.content_digest);
            Ok(())
        }
        Command::Swap { dataset, swap_seed, out } => {
            let d = load(&dataset)?;
            let s = swap_traces(&d, swap_seed)?;
            s.write(&out)?;
            eprintln!("wrote {} ({} records, swap seed {swap_seed})", out.display(), s.records.len());
            Ok(())
        }
        Command::EmitText { dataset, mode, out } => {
            let d = load(&dataset)?;
            write_output(out.as_deref(), &lines(emit_training_text(&d, mode)?))
        }
        Command::BuildTests { seed, count, size, out } => {
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let template = GeneratorConfig::new(GeneratorKind::Wilson, seed).with_size(size.width, size.height);
            eprintln!("building {} test sets of {count}", GeneratorKind::ALL.len());
            for (d, kind) in build_test_suite(&template, seed, count)?.iter().zip(GeneratorKind::ALL) {
                let path = out.join(format!("{}.jsonl", kind.name()));
                d.write(&path)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Validate { dataset, format } => {
            let d = load(&dataset)?;
            let own: Vec<(usize, ResponseRecord)> = d
                .records
                .iter()
                .enumerate()
                .map(|(i, r)| (i + 1, ResponseRecord { id: r.id, response_text: format!("{} {}", r.trace_text, r.plan_text) }))
                .collect();
            let rep = score(&test_set_name(&dataset, &d), &d, &own)?;
            write_output(None, &render(&EvalReport::new(vec![rep.clone()]), format))?;
            let n = rep.responses;
            let [[_, _], [swapped, valid]] = rep.matrix;
            match d.manifest.swap_seed {
                None if valid != n => bail!("{} of {n} records fail self-validation", n - valid),
                Some(_) if swapped != n => bail!("swapped dataset: expected {n} plan-valid, trace-invalid records, found {swapped}"),
                _ => {
                    eprintln!("{n} records consistent");
                    Ok(())
                }
            }
        }
        Command::Score { dataset, responses, format, out } => {
            if dataset.len() != responses.len() {
                bail!("{} --dataset paths but {} --responses paths", dataset.len(), responses.len());
            }
            let mut sets = Vec::new();
            for (dp, rp) in dataset.iter().zip(&responses) {
                let d = load(dp)?;
                let r = load_responses(rp).with_context(|| format!("reading responses {}", rp.display()))?;
                let name = test_set_name(dp, &d);
                sets.push(score(&name, &d, &r).with_context(|| format!("scoring {}", rp.display()))?);
                eprintln!("scored {name}: {} responses", r.len());
            }
            write_output(out.as_deref(), &render(&EvalReport::new(sets), format))
        }
        Command::Report { input, format, out } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let report: EvalReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", input.display()))?;
            write_output(out.as_deref(), &render(&report, format))
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_jobs(jobs: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().context("configuring thread pool")
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(_jobs: usize) -> Result<()> {
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_jobs(cli.jobs).and_then(|_| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
