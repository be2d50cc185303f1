use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

pub const CSV_HEADER: &str =
    "experiment,N,lambda,level,max_rank,csp,rep_error,inv_residual,iterations,build_s,matvec_s,inverse_s,solve_s,peak_mem";

/// Memory figure of a row. Estimates derived from stored block sizes carry
/// an `est` suffix in the CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakMem {
    pub value: f64,
    pub estimated: bool,
}

impl PeakMem {
    pub fn measured(value: f64) -> Self {
        Self { value, estimated: false }
    }

    pub fn estimated(value: f64) -> Self {
        Self { value, estimated: true }
    }
}

impl fmt::Display for PeakMem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.value, if self.estimated { "est" } else { "" })
    }
}

impl FromStr for PeakMem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (num, estimated) = match s.strip_suffix("est") {
            Some(n) => (n, true),
            None => (s, false),
        };
        let value = num
            .parse()
            .map_err(|_| Error::Config(format!("bad peak_mem field '{s}'")))?;
        Ok(Self { value, estimated })
    }
}

fn ser_mem<S: Serializer>(m: &Option<PeakMem>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => s.serialize_str(&m.to_string()),
        None => s.serialize_none(),
    }
}

fn de_mem<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<PeakMem>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    match s.as_deref() {
        None | Some("") => Ok(None),
        Some(s) => s.parse().map(Some).map_err(serde::de::Error::custom),
    }
}

/// One CSV row. Empty fields mean "not measured".
///
/// Rows of the `scaling-fit` experiment carry log-log slopes in the timing
/// and `peak_mem` columns instead of seconds and bytes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub experiment: String,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    pub level: Option<usize>,
    pub max_rank: Option<usize>,
    pub csp: Option<usize>,
    pub rep_error: Option<f64>,
    pub inv_residual: Option<f64>,
    pub iterations: Option<usize>,
    pub build_s: Option<f64>,
    pub matvec_s: Option<f64>,
    pub inverse_s: Option<f64>,
    pub solve_s: Option<f64>,
    #[serde(serialize_with = "ser_mem", deserialize_with = "de_mem")]
    pub peak_mem: Option<PeakMem>,
}

impl BenchRecord {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            ..Self::default()
        }
    }

    /// Copy with the wall-clock columns cleared, for determinism checks.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        if r.experiment != "scaling-fit" {
            r.build_s = None;
            r.matvec_s = None;
            r.inverse_s = None;
            r.solve_s = None;
        }
        r
    }
}

/// Writes the header and one line per record.
pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER.split(','))?;
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[BenchRecord], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(f))
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header '{}'", header.join(","))));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn parse_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    read_csv(std::fs::File::open(path)?)
}
