//! Plot-ready exports: a fitness map over 2-D task spaces (SVG + CSV), a
//! long-format genome dump, and cross-evaluation of top elites.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use mtme_core::{Archive, Domain, TaskSet};

use crate::csv_io::fmt_f64;

/// Map low..high fitness to a blue -> yellow ramp; flat landscapes get the
/// midpoint color.
fn fitness_color(fitness: f64, min: f64, max: f64) -> String {
    let t = if max > min {
        ((fitness - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.5
    };
    let r = (40.0 + 215.0 * t) as u8;
    let g = (60.0 + 170.0 * t) as u8;
    let b = (180.0 - 140.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub struct HeatmapOutput {
    pub csv: PathBuf,
    /// None when the task space is not 2-D.
    pub svg: Option<PathBuf>,
}

/// Write `heatmap.csv` (task_id, params, fitness per filled niche) and, for
/// 2-D task spaces, `heatmap.svg`: every niche as a circle at its task
/// coordinates, colored by fitness; empty niches in gray.
pub fn export_heatmap(archive: &Archive, task_set: &TaskSet, out_dir: &Path) -> Result<HeatmapOutput> {
    let csv_path = out_dir.join("heatmap.csv");
    let mut w = BufWriter::new(File::create(&csv_path)?);
    write!(w, "task_id")?;
    for k in 0..task_set.d_task() {
        write!(w, ",t{k}")?;
    }
    writeln!(w, ",fitness")?;
    for (task_id, elite) in archive.iter_filled() {
        write!(w, "{task_id}")?;
        for p in task_set.params(task_id) {
            write!(w, ",{}", fmt_f64(*p))?;
        }
        writeln!(w, ",{}", fmt_f64(elite.fitness))?;
    }
    w.flush()?;

    if task_set.d_task() != 2 {
        eprintln!(
            "warning: task space is {}-dimensional; writing CSV only, no SVG",
            task_set.d_task()
        );
        return Ok(HeatmapOutput { csv: csv_path, svg: None });
    }

    let (min, max) = archive.iter_filled().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), (_, e)| (lo.min(e.fitness), hi.max(e.fitness)),
    );
    let size = 640.0;
    let margin = 20.0;
    let scale = size - 2.0 * margin;
    let svg_path = out_dir.join("heatmap.svg");
    let mut svg = BufWriter::new(File::create(&svg_path)?);
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    )?;
    writeln!(svg, "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>")?;
    for task in task_set.iter() {
        let x = margin + task.params[0] * scale;
        // y axis points down in SVG; flip so larger t1 is higher
        let y = size - margin - task.params[1] * scale;
        let color = match archive.slot(task.id) {
            Some(elite) => fitness_color(elite.fitness, min, max),
            None => "#d0d0d0".to_string(),
        };
        writeln!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{color}\"/>")?;
    }
    writeln!(svg, "</svg>")?;
    svg.flush()?;
    Ok(HeatmapOutput { csv: csv_path, svg: Some(svg_path) })
}

/// Long-format genome dump: one row per (elite, genome component), for
/// external parallel-coordinates plots of the elite set's structure.
pub fn export_genome_plot(archive: &Archive, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "elite_id,param_index,param_value,fitness")?;
    for (task_id, elite) in archive.iter_filled() {
        for (k, v) in elite.genome.values().iter().enumerate() {
            writeln!(w, "{task_id},{k},{},{}", fmt_f64(*v), fmt_f64(elite.fitness))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One cross-evaluation result: how much better (positive) or worse
/// (negative) a top elite is on `target_task_id` than the elite stored
/// there.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossEvalRow {
    pub source_task_id: usize,
    pub target_task_id: usize,
    pub delta: f64,
}

/// Take the best `top_fraction` of elites (by fitness, ties toward lower
/// task id), evaluate each on every filled niche's task, and report
/// f(top elite, task) - f(stored elite) per pair.
pub fn cross_evaluate_top_elites(
    archive: &Archive,
    task_set: &TaskSet,
    domain: &dyn Domain,
    top_fraction: f64,
) -> Result<Vec<CrossEvalRow>> {
    if archive.is_empty() {
        bail!("archive is empty");
    }
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        bail!("top_fraction must be in (0, 1]");
    }
    let mut elites: Vec<(usize, f64)> = archive
        .iter_filled()
        .map(|(id, e)| (id, e.fitness))
        .collect();
    elites.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let count = ((top_fraction * elites.len() as f64).ceil() as usize).max(1);
    let mut rows = Vec::new();
    for &(source_id, _) in elites.iter().take(count) {
        let genome = &archive.slot(source_id).expect("filled").genome;
        for (target_id, stored) in archive.iter_filled() {
            let f = domain.evaluate(genome, task_set.params(target_id));
            rows.push(CrossEvalRow {
                source_task_id: source_id,
                target_task_id: target_id,
                delta: f - stored.fitness,
            });
        }
    }
    Ok(rows)
}

pub fn write_cross_eval(path: &Path, rows: &[CrossEvalRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "source_task_id,target_task_id,delta")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.source_task_id, r.target_task_id, fmt_f64(r.delta))?;
    }
    w.flush()?;
    Ok(())
}
