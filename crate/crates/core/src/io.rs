//! Output files: CSV tables, tiling dumps and gnuplot data.
//!
//! Every file starts with comment lines (`#`) carrying the tool version and
//! the configuration hash.
//!
//! CSV columns (format version 1):
//!
//! * kpz, measure: `epsilon,replica,count,unresolved_hits`
//! * ball: `radius,replica,count,truncated`
//! * ptp: `epsilon,replica,distance,censored` (`distance` empty when censored)
//!
//! Floats are written in shortest round-trip form and booleans as `0`/`1`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dyadic::DyadicSquare;
use crate::error::{Error, Result};
use crate::experiment::{BallRecord, KpzRecord, PtpRecord};
use crate::field::FieldId;
use crate::params::Params;
use crate::tiling::{Cell, Tiling};
use crate::VERSION;

pub const CSV_FORMAT_VERSION: u32 = 1;
const TILING_MAGIC: &str = "# dyadic-lqg tiling v1";

/// Provenance written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputMeta {
    pub command: String,
    pub config_hash: String,
}

impl OutputMeta {
    pub fn new(command: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Self { command: command.into(), config_hash: config_hash.into() }
    }

    fn write_header(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# dyadic-lqg {VERSION} format {CSV_FORMAT_VERSION}")?;
        writeln!(out, "# command {}", self.command)?;
        writeln!(out, "# config_hash {}", self.config_hash)
    }
}

/// A row of one of the CSV tables.
pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

impl CsvRow for KpzRecord {
    const HEADER: &'static [&'static str] = &["epsilon", "replica", "count", "unresolved_hits"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.epsilon.to_string(),
            self.replica.to_string(),
            self.count.to_string(),
            self.unresolved_hits.to_string(),
        ]
    }
}

impl CsvRow for BallRecord {
    const HEADER: &'static [&'static str] = &["radius", "replica", "count", "truncated"];

    fn fields(&self) -> Vec<String> {
        vec![self.radius.to_string(), self.replica.to_string(), self.count.to_string(), flag(self.truncated)]
    }
}

impl CsvRow for PtpRecord {
    const HEADER: &'static [&'static str] = &["epsilon", "replica", "distance", "censored"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.epsilon.to_string(),
            self.replica.to_string(),
            self.distance.map(|d| d.to_string()).unwrap_or_default(),
            flag(self.censored),
        ]
    }
}

/// Write `rows` as CSV, preceded by the provenance comments.
pub fn write_csv<R: CsvRow>(out: &mut impl Write, meta: &OutputMeta, rows: &[R]) -> std::io::Result<()> {
    meta.write_header(out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()
}

pub fn emit_csv<R: CsvRow>(path: &Path, meta: &OutputMeta, rows: &[R]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut f = BufWriter::new(File::create(path).map_err(io)?);
    write_csv(&mut f, meta, rows).map_err(io)?;
    f.flush().map_err(io)
}

fn float_field(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// Write `t` in the dump format: header lines, then one `level ix iy mass flag`
/// record per square in `(level, ix, iy)` order. Flags: `A` accepted,
/// `U` unresolved, `P` pruned (mass `-`).
pub fn write_tiling(out: &mut impl Write, t: &Tiling, meta: &OutputMeta) -> std::io::Result<()> {
    writeln!(out, "{TILING_MAGIC}")?;
    meta.write_header(out)?;
    writeln!(out, "domain {} {} {}", t.domain.level, t.domain.ix, t.domain.iy)?;
    writeln!(out, "epsilon {}", t.epsilon)?;
    writeln!(out, "q {}", t.params.q)?;
    writeln!(out, "c_m {}", t.params.c_m)?;
    writeln!(out, "gamma {}", float_field(t.params.gamma))?;
    writeln!(out, "depth_cap {}", t.depth_cap)?;
    writeln!(out, "backend {}", t.field_id.backend)?;
    writeln!(out, "seed {}", t.field_id.seed)?;
    writeln!(out, "records {}", t.squares.len() + t.unresolved.len() + t.pruned.len())?;
    let mut rows: Vec<(DyadicSquare, Option<f64>, char)> = t
        .squares
        .iter()
        .map(|c| (c.square, Some(c.mass), 'A'))
        .chain(t.unresolved.iter().map(|c| (c.square, Some(c.mass), 'U')))
        .chain(t.pruned.iter().map(|s| (*s, None, 'P')))
        .collect();
    rows.sort_by_key(|r| r.0);
    for (s, m, f) in rows {
        let mass = m.map_or_else(|| "-".to_string(), |v| v.to_string());
        writeln!(out, "{} {} {} {mass} {f}", s.level, s.ix, s.iy)?;
    }
    Ok(())
}

pub fn dump_tiling(t: &Tiling, meta: &OutputMeta, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut f = BufWriter::new(File::create(path).map_err(io)?);
    write_tiling(&mut f, t, meta).map_err(io)?;
    f.flush().map_err(io)
}

struct LineReader<'a, R> {
    lines: std::iter::Enumerate<std::io::Lines<R>>,
    path: &'a Path,
    line: usize,
}

impl<R: BufRead> LineReader<'_, R> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format { path: self.path.to_path_buf(), line: self.line, msg: msg.into() }
    }

    /// Next line that is not a comment.
    fn next(&mut self) -> Result<Option<String>> {
        for (i, l) in self.lines.by_ref() {
            self.line = i + 1;
            let l = l.map_err(|e| Error::io(self.path, e))?;
            if !l.starts_with('#') {
                return Ok(Some(l));
            }
        }
        Ok(None)
    }

    fn field(&mut self, name: &str) -> Result<String> {
        let l = self.next()?.ok_or_else(|| self.err(format!("missing `{name}`")))?;
        match l.split_once(' ') {
            Some((k, v)) if k == name => Ok(v.to_string()),
            _ => Err(self.err(format!("expected `{name}`, found {l:?}"))),
        }
    }

    fn typed<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let v = self.field(name)?;
        self.parse(&v, name)
    }

    fn parse<T: std::str::FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("cannot read {what} from {s:?}")))
    }
}

pub fn read_tiling(input: impl BufRead, path: &Path) -> Result<Tiling> {
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, Ok(l))) if l == TILING_MAGIC => {}
        _ => return Err(Error::Format { path: path.to_path_buf(), line: 1, msg: "not a tiling dump".into() }),
    }
    let mut r = LineReader { lines, path, line: 1 };
    let domain = r.field("domain")?;
    let d: Vec<&str> = domain.split(' ').collect();
    if d.len() != 3 {
        return Err(r.err("domain needs `level ix iy`"));
    }
    let domain = DyadicSquare::new(r.parse(d[0], "level")?, r.parse(d[1], "ix")?, r.parse(d[2], "iy")?);
    let epsilon: f64 = r.typed("epsilon")?;
    let q: f64 = r.typed("q")?;
    let c_m: f64 = r.typed("c_m")?;
    let gamma = r.field("gamma")?;
    let gamma = if gamma == "none" { None } else { Some(r.parse(&gamma, "gamma")?) };
    let depth_cap = r.typed("depth_cap")?;
    let backend = r.field("backend")?;
    let seed = r.typed("seed")?;
    let n: usize = r.typed("records")?;
    let mut squares = Vec::new();
    let mut unresolved = Vec::new();
    let mut pruned = Vec::new();
    let mut last: Option<DyadicSquare> = None;
    while let Some(l) = r.next()? {
        let f: Vec<&str> = l.split(' ').collect();
        if f.len() != 5 {
            return Err(r.err("expected `level ix iy mass flag`"));
        }
        let s = DyadicSquare::new(r.parse(f[0], "level")?, r.parse(f[1], "ix")?, r.parse(f[2], "iy")?);
        if last.is_some_and(|p| p >= s) {
            return Err(r.err("records out of order"));
        }
        last = Some(s);
        match f[4] {
            "A" => squares.push(Cell { square: s, mass: r.parse(f[3], "mass")? }),
            "U" => unresolved.push(Cell { square: s, mass: r.parse(f[3], "mass")? }),
            "P" => pruned.push(s),
            other => return Err(r.err(format!("unknown flag {other:?}"))),
        }
    }
    if squares.len() + unresolved.len() + pruned.len() != n {
        return Err(r.err(format!("expected {n} records")));
    }
    Ok(Tiling {
        domain,
        epsilon,
        params: Params { c_m, q, gamma },
        depth_cap,
        squares,
        unresolved,
        pruned,
        field_id: FieldId { backend, seed },
    })
}

pub fn load_tiling(path: &Path) -> Result<Tiling> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_tiling(BufReader::new(f), path)
}

/// One named curve of a plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Write `<stem>.dat` (two-column blocks, one per series) and `<stem>.gp`.
pub fn write_plot(dir: &Path, stem: &str, meta: &OutputMeta, labels: (&str, &str), series: &[Series]) -> Result<()> {
    let dat = dir.join(format!("{stem}.dat"));
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |e| Error::io(p, e)
    };
    let mut f = BufWriter::new(File::create(&dat).map_err(io(&dat))?);
    let body = (|| -> std::io::Result<()> {
        meta.write_header(&mut f)?;
        for (i, s) in series.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
                writeln!(f)?;
            }
            writeln!(f, "# {}", s.name)?;
            for (x, y) in &s.points {
                writeln!(f, "{x} {y}")?;
            }
        }
        f.flush()
    })();
    body.map_err(io(&dat))?;

    let gp = dir.join(format!("{stem}.gp"));
    let plots: Vec<String> = series
        .iter()
        .enumerate()
        .map(|(i, s)| format!("'{stem}.dat' index {i} with linespoints title '{}'", s.name.replace('\'', "")))
        .collect();
    let script = format!(
        "# dyadic-lqg {VERSION} config_hash {}\nset xlabel '{}'\nset ylabel '{}'\nset key left top\nplot {}\n",
        meta.config_hash,
        labels.0,
        labels.1,
        plots.join(", \\\n     ")
    );
    std::fs::write(&gp, script).map_err(io(&gp))
}
