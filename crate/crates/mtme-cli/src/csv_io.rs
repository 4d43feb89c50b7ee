//! CSV readers and writers for task sets, archives, run logs and experiment
//! aggregates.
//!
//! All files are UTF-8 with a header row. Floats are written in scientific
//! notation with 17 significant digits, which round-trips every f64
//! bit-exactly. Undefined statistics (empty archive) are written as `NA`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use mtme_core::engine::BatchRecord;
use mtme_core::{Archive, Genome, TaskGenMode, TaskSet};

/// 17 significant digits: enough for exact f64 round-trips.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().with_context(|| format!("bad float {s:?}"))
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "NA".into(),
    }
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == "NA" {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    Ok(BufReader::new(file).lines())
}

fn expect_header(got: Option<std::io::Result<String>>, want: &str, path: &Path) -> Result<()> {
    match got {
        Some(Ok(line)) if line == want => Ok(()),
        Some(Ok(line)) => bail!("{}: expected header {want:?}, got {line:?}", path.display()),
        _ => bail!("{}: missing header", path.display()),
    }
}

/// tasks.csv: `task_id,t0,...,t{k-1}`, one row per task, ordered by id.
pub fn write_tasks(path: &Path, task_set: &TaskSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "task_id")?;
    for k in 0..task_set.d_task() {
        write!(w, ",t{k}")?;
    }
    writeln!(w)?;
    for task in task_set.iter() {
        write!(w, "{}", task.id)?;
        for p in &task.params {
            write!(w, ",{}", fmt_f64(*p))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tasks(path: &Path) -> Result<TaskSet> {
    let mut lines = open_lines(path)?;
    let header = match lines.next() {
        Some(Ok(line)) => line,
        _ => bail!("{}: missing header", path.display()),
    };
    if !header.starts_with("task_id,t0") {
        bail!("{}: not a task file", path.display());
    }
    let mut params = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let mut fields = line.split(',');
        let id: usize = fields
            .next()
            .context("empty row")?
            .parse()
            .with_context(|| format!("{}: row {i}", path.display()))?;
        if id != i {
            bail!("{}: row {i} has task_id {id}", path.display());
        }
        let row: Vec<f64> = fields.map(parse_f64).collect::<Result<_>>()?;
        params.push(row);
    }
    Ok(TaskSet::from_params(params, TaskGenMode::External))
}

/// archive.csv: `task_id,t0..,fitness,g0..`, one row per filled niche,
/// ordered by task id.
pub fn write_archive(path: &Path, archive: &Archive, task_set: &TaskSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "task_id")?;
    for k in 0..task_set.d_task() {
        write!(w, ",t{k}")?;
    }
    write!(w, ",fitness")?;
    let d_genome = archive
        .iter_filled()
        .next()
        .map(|(_, e)| e.genome.dim())
        .unwrap_or(0);
    for k in 0..d_genome {
        write!(w, ",g{k}")?;
    }
    writeln!(w)?;
    for (task_id, elite) in archive.iter_filled() {
        write!(w, "{task_id}")?;
        for p in task_set.params(task_id) {
            write!(w, ",{}", fmt_f64(*p))?;
        }
        write!(w, ",{}", fmt_f64(elite.fitness))?;
        for g in elite.genome.values() {
            write!(w, ",{}", fmt_f64(*g))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuild an archive from archive.csv. `n_tasks` comes from the matching
/// task file since the archive rows only cover filled niches.
pub fn read_archive(path: &Path, task_set: &TaskSet) -> Result<Archive> {
    let mut lines = open_lines(path)?;
    let header = match lines.next() {
        Some(Ok(line)) => line,
        _ => bail!("{}: missing header", path.display()),
    };
    let d_task = task_set.d_task();
    let fitness_col = 1 + d_task;
    if !header.starts_with("task_id,t0") || !header.contains(",fitness") {
        bail!("{}: not an archive file", path.display());
    }
    let mut archive = Archive::new(task_set.len());
    for line in lines {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() <= fitness_col {
            bail!("{}: short row {line:?}", path.display());
        }
        let task_id: usize = fields[0].parse()?;
        let fitness = parse_f64(fields[fitness_col])?;
        let genome: Vec<f64> = fields[fitness_col + 1..]
            .iter()
            .map(|s| parse_f64(s))
            .collect::<Result<_>>()?;
        let inserted = archive.insert(task_id, Genome::new(genome), fitness, 0)?;
        if !inserted {
            bail!("{}: duplicate or non-improving row for task {task_id}", path.display());
        }
    }
    Ok(archive)
}

pub const LOG_HEADER: &str = "evals,coverage,mean_fitness,max_fitness,tournament_size,batch_successes";

/// Streams log.csv one record at a time, flushing after every row so a
/// crashed run keeps everything logged up to its last whole batch.
pub struct LogWriter {
    w: BufWriter<File>,
}

impl LogWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{LOG_HEADER}")?;
        w.flush()?;
        Ok(LogWriter { w })
    }

    pub fn push(&mut self, r: &BatchRecord) -> Result<()> {
        writeln!(
            self.w,
            "{},{},{},{},{},{}",
            r.evals,
            fmt_f64(r.coverage),
            fmt_opt(r.mean_fitness),
            fmt_opt(r.max_fitness),
            r.tournament_size,
            r.successes
        )?;
        self.w.flush()?;
        Ok(())
    }
}

pub fn write_log(path: &Path, records: &[BatchRecord]) -> Result<()> {
    let mut w = LogWriter::create(path)?;
    for r in records {
        w.push(r)?;
    }
    Ok(())
}

pub fn read_log(path: &Path) -> Result<Vec<BatchRecord>> {
    let mut lines = open_lines(path)?;
    expect_header(lines.next(), LOG_HEADER, path)?;
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            bail!("{}: bad row {line:?}", path.display());
        }
        records.push(BatchRecord {
            evals: fields[0].parse()?,
            coverage: parse_f64(fields[1])?,
            mean_fitness: parse_opt(fields[2])?,
            max_fitness: parse_opt(fields[3])?,
            tournament_size: fields[4].parse()?,
            successes: fields[5].parse()?,
        });
    }
    Ok(records)
}

/// One replicate's outcome in aggregate.csv.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub method: String,
    pub replicate: u64,
    pub seed: u64,
    pub final_mean_fitness: Option<f64>,
    pub final_coverage: Option<f64>,
    /// "ok", or an error description for a failed run.
    pub status: String,
}

pub const AGGREGATE_HEADER: &str =
    "method,replicate,seed,final_mean_fitness,final_coverage,status";

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{AGGREGATE_HEADER}")?;
    for r in rows {
        assert!(!r.method.contains(',') && !r.status.contains(','));
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.method,
            r.replicate,
            r.seed,
            fmt_opt(r.final_mean_fitness),
            fmt_opt(r.final_coverage),
            r.status
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut lines = open_lines(path)?;
    expect_header(lines.next(), AGGREGATE_HEADER, path)?;
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            bail!("{}: bad row {line:?}", path.display());
        }
        rows.push(AggregateRow {
            method: fields[0].to_string(),
            replicate: fields[1].parse()?,
            seed: fields[2].parse()?,
            final_mean_fitness: parse_opt(fields[3])?,
            final_coverage: parse_opt(fields[4])?,
            status: fields[5].to_string(),
        });
    }
    Ok(rows)
}
