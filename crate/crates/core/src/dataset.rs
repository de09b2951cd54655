//! Dataset construction, swap corruption, and persistence.
//!
//! A dataset is a JSON-lines file of [`DatasetRecord`]s plus a sibling
//! `<stem>.manifest.json` holding a [`DatasetManifest`]. The manifest's
//! `content_digest` is the SHA-256 of the record file bytes.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::batch;
use crate::error::{DatasetError, DomainError, GenerationError};
use crate::generators::{generate, GeneratorConfig, GeneratorKind, SearchFormerSession};
use crate::grid::{Coord, GridMaze, WallGrid};
use crate::search::astar_maze;
use crate::seed;
use crate::sokoban::{astar_sokoban, gen_sokoban, SokobanInstance};
use crate::tokens::{
    encode_plan, encode_problem, encode_sokoban_problem, encode_trace, from_line, to_line, Domain, TokenStream,
    GRAMMAR_VERSION,
};
use crate::validate::Problem;

/// Where a record's instance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Source {
    Maze(GeneratorKind),
    Sokoban,
}

impl Source {
    pub fn domain(self) -> Domain {
        match self {
            Source::Maze(_) => Domain::Maze,
            Source::Sokoban => Domain::Sokoban,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Source::Maze(k) => k.name(),
            Source::Sokoban => "sokoban",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("sokoban") {
            Ok(Source::Sokoban)
        } else {
            s.parse::<GeneratorKind>().map(Source::Maze).map_err(|_| format!("unknown generator `{s}`"))
        }
    }
}

impl TryFrom<String> for Source {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Source> for String {
    fn from(s: Source) -> Self {
        s.name().to_string()
    }
}

/// Problem layout as stored in a record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "lowercase")]
pub enum Instance {
    Maze { width: u16, height: u16, walls: Vec<Coord>, start: Coord, goal: Coord },
    Sokoban { width: u16, height: u16, walls: Vec<Coord>, docks: [Coord; 2], boxes: [Coord; 2], worker: Coord },
}

impl Instance {
    pub fn from_problem(p: &Problem) -> Self {
        match p {
            Problem::Maze(m) => Instance::Maze {
                width: m.width(),
                height: m.height(),
                walls: m.grid().walls().collect(),
                start: m.start(),
                goal: m.goal(),
            },
            Problem::Sokoban(s) => Instance::Sokoban {
                width: s.walls().width(),
                height: s.walls().height(),
                walls: s.walls().walls().collect(),
                docks: s.docks(),
                boxes: s.boxes_start(),
                worker: s.worker_start(),
            },
        }
    }

    pub fn to_problem(&self) -> Result<Problem, DomainError> {
        match self {
            Instance::Maze { width, height, walls, start, goal } => {
                let grid = WallGrid::from_walls(*width, *height, walls.iter().copied())?;
                Ok(Problem::Maze(GridMaze::new(grid, *start, *goal)?))
            }
            Instance::Sokoban { width, height, walls, docks, boxes, worker } => {
                let grid = WallGrid::from_walls(*width, *height, walls.iter().copied())?;
                Ok(Problem::Sokoban(SokobanInstance::new(grid, *docks, *boxes, *worker)?))
            }
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Instance::Maze { .. } => Domain::Maze,
            Instance::Sokoban { .. } => Domain::Sokoban,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: u64,
    #[serde(flatten)]
    pub instance: Instance,
    pub generator: Source,
    pub trace_text: String,
    pub plan_text: String,
    /// Id of the record whose search produced `trace_text`.
    pub trace_source_id: u64,
}

impl DatasetRecord {
    pub fn problem(&self) -> Result<Problem, DatasetError> {
        self.instance.to_problem().map_err(|e| DatasetError::Record { id: self.id, message: e.to_string() })
    }

    pub fn problem_tokens(&self) -> Result<TokenStream, DatasetError> {
        let encoded = match self.problem()? {
            Problem::Maze(m) => encode_problem(&m),
            Problem::Sokoban(s) => encode_sokoban_problem(&s),
        };
        encoded.map_err(|source| DatasetError::Encode { index: self.id, source })
    }

    /// The target continuation: trace events followed by the plan section.
    pub fn response_tokens(&self) -> TokenStream {
        let mut t = from_line(&self.trace_text);
        t.extend(from_line(&self.plan_text));
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub grammar_version: String,
    pub domain: Domain,
    pub generator: Source,
    /// Template config; the per-record seed replaces `seed`. Absent for Sokoban.
    pub config: Option<GeneratorConfig>,
    pub master_seed: u64,
    pub record_count: usize,
    pub swap_seed: Option<u64>,
    /// Digest of the dataset this one was derived from by swapping.
    pub source_digest: Option<String>,
    pub content_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub records: Vec<DatasetRecord>,
}

/// Seed of record `index` under `master`.
pub fn record_seed(master: u64, index: u64) -> u64 {
    seed::derive(master, index)
}

fn serialize_records(records: &[DatasetRecord]) -> Result<Vec<u8>, DatasetError> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn digest_records(records: &[DatasetRecord]) -> Result<String, DatasetError> {
    Ok(hex::encode(Sha256::digest(serialize_records(records)?)))
}

fn label_maze(id: u64, source: Source, maze: &GridMaze) -> Result<DatasetRecord, DatasetError> {
    let result = astar_maze(maze).map_err(|source| DatasetError::Search { index: id, source })?;
    let trace = encode_trace(&result.trace).map_err(|source| DatasetError::Encode { index: id, source })?;
    Ok(DatasetRecord {
        id,
        instance: Instance::from_problem(&Problem::Maze(maze.clone())),
        generator: source,
        trace_text: to_line(&trace),
        plan_text: to_line(&encode_plan(&result.plan)),
        trace_source_id: id,
    })
}

fn label_sokoban(id: u64, inst: &SokobanInstance) -> Result<DatasetRecord, DatasetError> {
    let result = astar_sokoban(inst).map_err(|source| DatasetError::Search { index: id, source })?;
    let trace = encode_trace(&result.trace).map_err(|source| DatasetError::Encode { index: id, source })?;
    Ok(DatasetRecord {
        id,
        instance: Instance::from_problem(&Problem::Sokoban(inst.clone())),
        generator: Source::Sokoban,
        trace_text: to_line(&trace),
        plan_text: to_line(&encode_plan(&result.plan)),
        trace_source_id: id,
    })
}

/// Labels a generated instance into a record (A* trace plus optimal plan).
pub fn label_problem(id: u64, source: Source, problem: &Problem) -> Result<DatasetRecord, DatasetError> {
    match problem {
        Problem::Maze(m) => label_maze(id, source, m),
        Problem::Sokoban(s) => label_sokoban(id, s),
    }
}

/// Generates and labels `count` records. Record `i` uses
/// `record_seed(master_seed, i)`; SearchFormer-style instances are
/// deduplicated across the whole dataset in id order.
pub fn build_dataset(
    source: Source,
    template: &GeneratorConfig,
    count: u64,
    master_seed: u64,
) -> Result<Dataset, DatasetError> {
    if count == 0 {
        return Err(DatasetError::TooSmall { needed: 1, found: 0 });
    }
    let gen_err = |index: u64| move |source: GenerationError| DatasetError::Generation { index, source };
    let config = match source {
        Source::Maze(kind) => {
            let cfg = GeneratorConfig { kind, ..template.clone() };
            cfg.validate().map_err(gen_err(0))?;
            Some(cfg)
        }
        Source::Sokoban => None,
    };

    let problems: Vec<Result<Problem, DatasetError>> = batch::map_range(count, |i| {
        let s = record_seed(master_seed, i);
        match &config {
            Some(cfg) => generate(&cfg.clone().with_seed(s)).map(Problem::Maze).map_err(gen_err(i)),
            None => gen_sokoban(s).map(Problem::Sokoban).map_err(gen_err(i)),
        }
    });
    let mut problems = problems.into_iter().collect::<Result<Vec<_>, _>>()?;

    if let Some(cfg) = config.as_ref().filter(|c| c.kind == GeneratorKind::SearchFormerStyle) {
        let mut session = SearchFormerSession::new();
        for (i, p) in problems.iter_mut().enumerate() {
            let Problem::Maze(m) = p else { unreachable!() };
            if !session.admit(m.clone()) {
                let retry = cfg.clone().with_seed(seed::derive(record_seed(master_seed, i as u64), 1));
                *m = session.generate(&retry).map_err(gen_err(i as u64))?;
            }
        }
    }

    let records: Vec<Result<DatasetRecord, DatasetError>> = {
        let indexed: Vec<(u64, Problem)> = problems.into_iter().enumerate().map(|(i, p)| (i as u64, p)).collect();
        batch::map_slice(&indexed, |(i, p)| label_problem(*i, source, p))
    };
    let records = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    let manifest = DatasetManifest {
        grammar_version: GRAMMAR_VERSION.to_string(),
        domain: source.domain(),
        generator: source,
        config,
        master_seed,
        record_count: records.len(),
        swap_seed: None,
        source_digest: None,
        content_digest: digest_records(&records)?,
    };
    Ok(Dataset { manifest, records })
}

const TEST_SUITE_STREAM: u64 = 0x07E5_75E7;
pub const TEST_SET_SIZE: u64 = 1000;

/// Master seed of the held-out test set for `kind`, disjoint from the
/// per-record seeds of a training set built from `master_seed`.
pub fn test_suite_seed(master_seed: u64, kind: GeneratorKind) -> u64 {
    let idx = GeneratorKind::ALL.iter().position(|&k| k == kind).unwrap() as u64;
    seed::derive(seed::derive(master_seed, TEST_SUITE_STREAM), idx)
}

/// One labeled test set per maze generator.
pub fn build_test_suite(
    template: &GeneratorConfig,
    master_seed: u64,
    count: u64,
) -> Result<Vec<Dataset>, DatasetError> {
    GeneratorKind::ALL
        .into_iter()
        .map(|kind| build_dataset(Source::Maze(kind), template, count, test_suite_seed(master_seed, kind)))
        .collect()
}

/// Reassigns traces by a seeded derangement: no record keeps a trace that
/// was produced for it. Plans and instances are untouched.
pub fn swap_traces(dataset: &Dataset, swap_seed: u64) -> Result<Dataset, DatasetError> {
    const MAX_SHUFFLES: usize = 10_000;
    let recs = &dataset.records;
    let n = recs.len();
    if n < 2 {
        return Err(DatasetError::TooSmall { needed: 2, found: n });
    }
    let mut rng = seed::rng(swap_seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut found = false;
    for _ in 0..MAX_SHUFFLES {
        perm.shuffle(&mut rng);
        if (0..n).all(|i| recs[perm[i]].trace_source_id != recs[i].id) {
            found = true;
            break;
        }
    }
    if !found {
        return Err(DatasetError::Record {
            id: recs[0].id,
            message: format!("no derangement found in {MAX_SHUFFLES} shuffles"),
        });
    }
    let records: Vec<DatasetRecord> = recs
        .iter()
        .zip(&perm)
        .map(|(r, &j)| DatasetRecord {
            trace_text: recs[j].trace_text.clone(),
            trace_source_id: recs[j].trace_source_id,
            ..r.clone()
        })
        .collect();
    let manifest = DatasetManifest {
        swap_seed: Some(swap_seed),
        source_digest: Some(dataset.manifest.content_digest.clone()),
        content_digest: digest_records(&records)?,
        ..dataset.manifest.clone()
    };
    Ok(Dataset { manifest, records })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextMode {
    SolutionOnly,
    WithTrace,
}

impl FromStr for TextMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "solution_only" => Ok(TextMode::SolutionOnly),
            "with_trace" => Ok(TextMode::WithTrace),
            _ => Err(format!("unknown text mode `{s}` (expected solution_only or with_trace)")),
        }
    }
}

/// One training line per record.
pub fn emit_training_text(dataset: &Dataset, mode: TextMode) -> Result<Vec<String>, DatasetError> {
    if dataset.manifest.grammar_version != GRAMMAR_VERSION {
        return Err(DatasetError::GrammarVersion {
            expected: GRAMMAR_VERSION.into(),
            found: dataset.manifest.grammar_version.clone(),
        });
    }
    dataset
        .records
        .iter()
        .map(|r| {
            let mut line = to_line(&r.problem_tokens()?);
            match mode {
                TextMode::WithTrace => {
                    if !r.trace_text.is_empty() {
                        line.push(' ');
                        line.push_str(&r.trace_text);
                    }
                }
                TextMode::SolutionOnly => {
                    let cut = line.strip_suffix(" trace").map(str::len).unwrap_or(line.len());
                    line.truncate(cut);
                }
            }
            line.push(' ');
            line.push_str(&r.plan_text);
            Ok(line)
        })
        .collect()
}

pub fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

impl Dataset {
    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        let bytes = serialize_records(&self.records)?;
        fs::write(path, &bytes)?;
        let mut w = BufWriter::new(fs::File::create(manifest_path(path))?);
        serde_json::to_writer_pretty(&mut w, &self.manifest)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    /// Loads records and manifest, checking count and digest.
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let mpath = manifest_path(path);
        let manifest: DatasetManifest = serde_json::from_reader(BufReader::new(fs::File::open(&mpath)?))
            .map_err(|e| DatasetError::Parse { path: mpath.display().to_string(), line: 0, message: e.to_string() })?;
        let records: Vec<DatasetRecord> = read_jsonl(path)?;
        let digest = digest_records(&records)?;
        let problem = |message: String| DatasetError::Parse { path: path.display().to_string(), line: 0, message };
        if records.len() != manifest.record_count {
            return Err(problem(format!(
                "manifest lists {} records, file has {}",
                manifest.record_count,
                records.len()
            )));
        }
        if digest != manifest.content_digest {
            return Err(problem(format!("content digest {digest} does not match manifest")));
        }
        Ok(Dataset { manifest, records })
    }

    /// Instance identities, for disjointness checks between datasets.
    pub fn instance_set(&self) -> HashSet<&Instance> {
        self.records.iter().map(|r| &r.instance).collect()
    }
}

/// Reads a JSON-lines file, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            path: path.display().to_string(),
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::classify_response;

    fn small(kind: GeneratorKind) -> GeneratorConfig {
        GeneratorConfig::new(kind, 0).with_size(10, 10)
    }

    #[test]
    fn build_is_deterministic() {
        let a = build_dataset(Source::Maze(GeneratorKind::Wilson), &small(GeneratorKind::Wilson), 20, 7).unwrap();
        let b = build_dataset(Source::Maze(GeneratorKind::Wilson), &small(GeneratorKind::Wilson), 20, 7).unwrap();
        assert_eq!(a.manifest.content_digest, b.manifest.content_digest);
        assert_eq!(a.records.len(), 20);
        assert!(a.records.iter().enumerate().all(|(i, r)| r.id == i as u64 && r.trace_source_id == r.id));
    }

    #[test]
    fn zero_count_rejected() {
        let r = build_dataset(Source::Maze(GeneratorKind::Wilson), &small(GeneratorKind::Wilson), 0, 7);
        assert!(matches!(r, Err(DatasetError::TooSmall { .. })));
    }

    #[test]
    fn record_json_shape() {
        let d = build_dataset(Source::Maze(GeneratorKind::Kruskal), &small(GeneratorKind::Kruskal), 1, 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&d.records[0]).unwrap();
        for key in ["id", "domain", "generator", "width", "height", "walls", "start", "goal", "trace_text", "plan_text", "trace_source_id"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["domain"], "maze");
        assert_eq!(v["generator"], "kruskal");
        let back: DatasetRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, d.records[0]);
    }

    #[test]
    fn swap_single_record_errors() {
        let d = build_dataset(Source::Maze(GeneratorKind::Wilson), &small(GeneratorKind::Wilson), 1, 7).unwrap();
        assert!(matches!(swap_traces(&d, 3), Err(DatasetError::TooSmall { needed: 2, found: 1 })));
    }

    #[test]
    fn swap_two_records_exchanges() {
        let d = build_dataset(Source::Maze(GeneratorKind::Wilson), &small(GeneratorKind::Wilson), 2, 7).unwrap();
        let s = swap_traces(&d, 3).unwrap();
        assert_eq!(s.records[0].trace_text, d.records[1].trace_text);
        assert_eq!(s.records[1].trace_source_id, 0);
        assert_eq!(s.manifest.swap_seed, Some(3));
        assert_eq!(s.manifest.source_digest.as_deref(), Some(d.manifest.content_digest.as_str()));
    }

    #[test]
    fn training_text_modes() {
        let d = build_dataset(Source::Maze(GeneratorKind::Wilson), &small(GeneratorKind::Wilson), 4, 2).unwrap();
        let lines = emit_training_text(&d, TextMode::SolutionOnly).unwrap();
        for l in &lines {
            assert!(!l.contains("create") && !l.contains("close") && !l.contains(" trace"));
            assert!(l.starts_with("bos start") && l.ends_with("eos"));
        }
        let lines = emit_training_text(&d, TextMode::WithTrace).unwrap();
        for (l, r) in lines.iter().zip(&d.records) {
            let toks = from_line(l);
            let at = toks.iter().position(|t| t == "trace").unwrap();
            let cls = classify_response(&r.problem().unwrap(), &toks[at + 1..]);
            assert!(cls.plan_valid && cls.trace_valid);
        }
        let mut stale = d.clone();
        stale.manifest.grammar_version = "old".into();
        assert!(matches!(emit_training_text(&stale, TextMode::WithTrace), Err(DatasetError::GrammarVersion { .. })));
    }

    #[test]
    fn write_load_round_trip_and_digest_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let d = build_dataset(Source::Sokoban, &small(GeneratorKind::Wilson), 3, 5).unwrap();
        d.write(&path).unwrap();
        assert!(dir.path().join("d.manifest.json").exists());
        assert_eq!(Dataset::load(&path).unwrap(), d);
        let text = fs::read_to_string(&path).unwrap().replacen("plan", "plan up", 1);
        fs::write(&path, text).unwrap();
        assert!(matches!(Dataset::load(&path), Err(DatasetError::Parse { .. })));
    }

    #[test]
    fn source_names_round_trip() {
        for s in GeneratorKind::ALL.map(Source::Maze).into_iter().chain([Source::Sokoban]) {
            assert_eq!(s.name().parse::<Source>().unwrap(), s);
        }
        assert!("prim".parse::<Source>().is_err());
    }
}
