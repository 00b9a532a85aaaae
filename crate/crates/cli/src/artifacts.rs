//! Deterministic CSV/JSON emission and the run report.
//!
//! Every float goes through [`fmt_f64`], which prints 17 significant digits
//! so that values round-trip bit for bit.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use landau::kinetic::{Diagnostics, FieldHistory};
use landau::lintheory::DensityHistory;
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::SimConfig;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Hash of everything a run depends on: the configuration text and the
/// effective seed.
pub fn input_hash(config_text: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(format!("config {}\0", config_text.len()));
    h.update(config_text.as_bytes());
    h.update(format!("\0seed {seed}"));
    let mut s = String::with_capacity(64);
    for b in h.finalize() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Small CSV builder; numbers only, comma separated, LF line ends.
pub struct Csv {
    out: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { out: header.join(",") + "\n", width: header.len() }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Self { width: header.len(), out: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.width);
        let mut first = true;
        for c in cells {
            if !first {
                self.out.push(',');
            }
            first = false;
            match c {
                Cell::F(x) => self.out.push_str(&fmt_f64(*x)),
                Cell::I(i) => {
                    let _ = write!(self.out, "{i}");
                }
                Cell::S(s) => self.out.push_str(s),
            }
        }
        self.out.push('\n');
    }

    pub fn floats(&mut self, xs: &[f64]) {
        let cells: Vec<Cell> = xs.iter().map(|&x| Cell::F(x)).collect();
        self.row(&cells);
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub enum Cell<'a> {
    F(f64),
    I(i64),
    S(&'a str),
}

pub fn density_history_csv(h: &DensityHistory) -> String {
    let mut csv = Csv::new(&["t", "re_rho", "im_rho", "abs_rho"]);
    for (j, z) in h.rho_hat.iter().enumerate() {
        csv.floats(&[h.time(j), z.re, z.im, z.norm()]);
    }
    csv.finish()
}

pub fn field_history_csv(h: &FieldHistory) -> String {
    let mut csv = Csv::new(&["t", "k", "re_rho", "im_rho", "abs_rho", "re_E", "im_E", "abs_E"]);
    for (i, &t) in h.times.iter().enumerate() {
        for k in 0..=h.k_max {
            let (r, e): (Complex64, Complex64) = (h.rho[i][k], h.e[i][k]);
            csv.row(&[
                Cell::F(t),
                Cell::I(k as i64),
                Cell::F(r.re),
                Cell::F(r.im),
                Cell::F(r.norm()),
                Cell::F(e.re),
                Cell::F(e.im),
                Cell::F(e.norm()),
            ]);
        }
    }
    csv.finish()
}

pub fn diagnostics_csv(d: &Diagnostics) -> String {
    let mut header: Vec<String> = ["t", "mass", "momentum", "l2"].iter().map(|s| s.to_string()).collect();
    header.extend(d.labels.iter().cloned());
    let mut csv = Csv::with_header(header);
    for r in &d.rows {
        let mut xs = vec![r.t, r.mass, r.momentum, r.l2];
        xs.extend(&r.norms);
        csv.floats(&xs);
    }
    csv.finish()
}

/// JSON formatter: pretty layout, floats with 17 significant digits.
struct Precise(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for Precise {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files under one directory and remembers what it wrote.
#[derive(Debug)]
pub struct Artifacts {
    dir: Option<PathBuf>,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: Some(dir.to_path_buf()), files: Vec::new() })
    }

    /// Records hashes without touching the file system.
    pub fn in_memory() -> Self {
        Self { dir: None, files: Vec::new() }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        if let Some(dir) = &self.dir {
            std::fs::write(dir.join(name), contents)?;
        }
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len() as u64,
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }
}

/// One measured check: `measured <relation> tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub relation: &'static str,
    pub tolerance: f64,
    pub detail: String,
}

impl Criterion {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(name.into(), measured, "<=", tolerance, measured <= tolerance)
    }

    pub fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(name.into(), measured, "<", tolerance, measured < tolerance)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(name.into(), measured, ">=", tolerance, measured >= tolerance)
    }

    pub fn above(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(name.into(), measured, ">", tolerance, measured > tolerance)
    }

    /// A check that could not be measured.
    pub fn failed(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            relation: "n/a",
            tolerance: f64::NAN,
            detail: reason.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn make(name: String, measured: f64, relation: &'static str, tolerance: f64, passed: bool) -> Self {
        Self { name, passed, measured, relation, tolerance, detail: String::new() }
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {}: {} {} {}",
            if self.passed { "ok  " } else { "FAIL" },
            self.name,
            fmt_short(self.measured),
            self.relation,
            fmt_short(self.tolerance)
        );
        if !self.detail.is_empty() {
            s.push_str(" (");
            s.push_str(&self.detail);
            s.push(')');
        }
        s
    }
}

pub fn fmt_short(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e5) {
        format!("{x:.3e}")
    } else {
        format!("{x:.6}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub config: SimConfig,
    pub config_text: String,
    pub input_hash: String,
    pub criteria: Vec<Criterion>,
    pub passed: bool,
    pub wall_time_s: f64,
    pub files: Vec<FileEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_uses_full_precision() {
        #[derive(Serialize)]
        struct P {
            x: f64,
            n: Option<f64>,
        }
        let s = to_json(&P { x: 0.1, n: Some(f64::NAN) }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["x"].as_f64().unwrap(), 0.1);
        assert!(v["n"].is_null());
        assert!(s.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn criterion_relations() {
        assert!(Criterion::at_most("a", 1.0, 1.0).passed);
        assert!(!Criterion::below("a", 1.0, 1.0).passed);
        assert!(!Criterion::at_least("a", f64::NAN, 0.0).passed);
        assert!(!Criterion::failed("a", "b").passed);
    }

    #[test]
    fn hash_depends_on_seed() {
        assert_ne!(input_hash("x", 1), input_hash("x", 2));
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
