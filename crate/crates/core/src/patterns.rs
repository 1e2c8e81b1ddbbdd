//! Multitype point pattern data model and CSV ingestion/emission.
//!
//! CSV format: UTF-8, header `taxon,x,y`, one point per row, `.` decimal
//! separator. The window is not part of the CSV; it travels in the run
//! configuration.

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Index of a taxon within a pattern's taxon list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaxonId(pub usize);

/// A labeled point pattern of `m` taxa inside an observation window.
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MultitypePattern {
    window: Window,
    taxa: Vec<String>,
    points: Vec<(Point, usize)>,
}

impl MultitypePattern {
    /// Build a validated pattern. Taxon names must be unique and nonempty,
    /// every point must lie in the window, and every point's taxon index must
    /// refer to the taxon list.
    pub fn new(window: Window, taxa: Vec<String>, points: Vec<(Point, usize)>) -> Result<Self> {
        for (i, name) in taxa.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidParameter(format!("taxon {i} has an empty name")));
            }
            if taxa[..i].contains(name) {
                return Err(Error::InvalidParameter(format!("duplicate taxon name `{name}`")));
            }
        }
        for (p, t) in &points {
            if *t >= taxa.len() {
                return Err(Error::InvalidParameter(format!(
                    "point ({}, {}) refers to unknown taxon index {t}",
                    p.x, p.y
                )));
            }
            if !window.contains(*p) {
                return Err(Error::InvalidParameter(format!(
                    "point ({}, {}) lies outside the window",
                    p.x, p.y
                )));
            }
        }
        Ok(MultitypePattern {
            window,
            taxa,
            points,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    /// All points as `(location, taxon index)` pairs, in insertion order.
    pub fn points(&self) -> &[(Point, usize)] {
        &self.points
    }

    pub fn total(&self) -> usize {
        self.points.len()
    }

    pub fn taxon_index(&self, name: &str) -> Option<TaxonId> {
        self.taxa.iter().position(|t| t == name).map(TaxonId)
    }

    pub fn taxon_name(&self, id: TaxonId) -> &str {
        &self.taxa[id.0]
    }

    /// Number of points carrying the given taxon label.
    pub fn count(&self, taxon: &str) -> Result<usize> {
        let TaxonId(idx) = self
            .taxon_index(taxon)
            .ok_or_else(|| Error::UnknownTaxon(taxon.to_string()))?;
        Ok(self.count_by_index(idx))
    }

    pub fn count_by_index(&self, idx: usize) -> usize {
        self.points.iter().filter(|(_, t)| *t == idx).count()
    }

    /// Per-taxon counts aligned with `taxa()`.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.taxa.len()];
        for (_, t) in &self.points {
            counts[*t] += 1;
        }
        counts
    }

    /// Locations of one taxon, in insertion order.
    pub fn points_of(&self, idx: usize) -> Vec<Point> {
        self.points
            .iter()
            .filter(|(_, t)| *t == idx)
            .map(|(p, _)| *p)
            .collect()
    }

    /// Re-express this pattern over a caller-supplied taxon list (a superset
    /// of the taxa present). Taxa absent from the pattern get zero points;
    /// a pattern taxon missing from `taxa` is an error.
    pub fn align_taxa(&self, taxa: &[String]) -> Result<MultitypePattern> {
        let mut remap = Vec::with_capacity(self.taxa.len());
        for name in &self.taxa {
            let idx = taxa
                .iter()
                .position(|t| t == name)
                .ok_or_else(|| Error::UnknownTaxon(name.clone()))?;
            remap.push(idx);
        }
        MultitypePattern::new(
            self.window.clone(),
            taxa.to_vec(),
            self.points
                .iter()
                .map(|(p, t)| (*p, remap[*t]))
                .collect(),
        )
    }
}

/// What to do with CSV rows whose location falls outside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutOfWindowPolicy {
    /// Fail, listing the offending rows (default).
    #[default]
    Error,
    /// Drop offending rows and report how many were dropped.
    Clip,
}

/// Result of a CSV read: the pattern plus the number of clipped rows
/// (always 0 under the error policy).
#[derive(Debug)]
pub struct CsvReadOutcome {
    pub pattern: MultitypePattern,
    pub dropped: usize,
}

/// Read a `taxon,x,y` CSV into a pattern over the given window. Taxa are
/// registered in order of first appearance.
pub fn read_pattern_csv(
    path: &Path,
    window: Window,
    policy: OutOfWindowPolicy,
) -> Result<CsvReadOutcome> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let reader = BufReader::new(file);

    let mut taxa: Vec<String> = Vec::new();
    let mut points: Vec<(Point, usize)> = Vec::new();
    let mut out_of_window: Vec<usize> = Vec::new();
    let mut dropped = 0usize;

    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?,
        None => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: "empty file; expected header `taxon,x,y`".into(),
            })
        }
    };
    if header.trim_end_matches('\r') != "taxon,x,y" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected header `taxon,x,y`, got `{header}`"),
        });
    }

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (taxon, xs, ys) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(t), Some(x), Some(y), None) => (t, x, y),
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("expected 3 comma-separated fields, got `{line}`"),
                })
            }
        };
        if taxon.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: "empty taxon label".into(),
            });
        }
        let parse_coord = |s: &str, name: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("invalid {name} coordinate `{s}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("non-finite {name} coordinate `{s}`"),
                });
            }
            Ok(v)
        };
        let x = parse_coord(xs, "x")?;
        let y = parse_coord(ys, "y")?;
        let p = Point::new(x, y);

        let taxon_idx = match taxa.iter().position(|t| t == taxon) {
            Some(i) => i,
            None => {
                taxa.push(taxon.to_string());
                taxa.len() - 1
            }
        };
        if !window.contains(p) {
            match policy {
                OutOfWindowPolicy::Error => out_of_window.push(line_no),
                OutOfWindowPolicy::Clip => dropped += 1,
            }
            continue;
        }
        points.push((p, taxon_idx));
    }

    if !out_of_window.is_empty() {
        return Err(Error::OutOfWindow {
            path: path.to_path_buf(),
            lines: out_of_window,
        });
    }

    Ok(CsvReadOutcome {
        pattern: MultitypePattern::new(window, taxa, points)?,
        dropped,
    })
}

/// Write a pattern as `taxon,x,y` CSV. Coordinates use the shortest
/// representation that round-trips exactly, so `read(write(p))` recovers the
/// same floating-point values.
pub fn write_pattern_csv(pattern: &MultitypePattern, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    writeln!(w, "taxon,x,y").map_err(io_err)?;
    for (p, t) in pattern.points() {
        writeln!(w, "{},{},{}", pattern.taxa()[*t], p.x, p.y).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
