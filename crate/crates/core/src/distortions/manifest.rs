//! Benchmark manifests: `image_id,family,level,path,score` CSV with optional
//! leading `#` comment lines. Relative paths resolve against the manifest's
//! directory.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::write_atomic;

/// Distortion family of a manifest row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// The undistorted source; level 0 of every distortion series.
    Pristine,
    Blur,
    Awgn,
    Compression,
}

impl Family {
    pub const DISTORTIONS: [Family; 3] = [Family::Blur, Family::Awgn, Family::Compression];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Pristine => "pristine",
            Family::Blur => "blur",
            Family::Awgn => "awgn",
            Family::Compression => "compression",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pristine" => Ok(Family::Pristine),
            "blur" => Ok(Family::Blur),
            "awgn" | "noise" => Ok(Family::Awgn),
            "compression" => Ok(Family::Compression),
            other => Err(Error::InvalidArgument(format!(
                "unknown distortion family `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestRow {
    pub image_id: String,
    pub family: Family,
    pub level: u8,
    pub path: PathBuf,
    pub score: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    /// Free-text header lines, written with a leading `# `.
    pub comments: Vec<String>,
    pub rows: Vec<ManifestRow>,
}

pub const MANIFEST_HEADER: [&str; 5] = ["image_id", "family", "level", "path", "score"];

impl Manifest {
    /// Serializes with paths relative to `base` where possible.
    pub fn to_csv(&self, base: &Path) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for c in &self.comments {
            out.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(MANIFEST_HEADER)?;
        for row in &self.rows {
            let path = row.path.strip_prefix(base).unwrap_or(&row.path);
            let score = row.score.map(|s| s.to_string()).unwrap_or_default();
            w.write_record([
                row.image_id.as_str(),
                row.family.as_str(),
                &row.level.to_string(),
                &path.to_string_lossy(),
                &score,
            ])?;
        }
        w.into_inner()
            .map_err(|e| Error::Config(format!("manifest buffer: {e}")))
    }

    /// Parses CSV text, joining relative paths onto `base`.
    pub fn from_csv(text: &str, base: &Path) -> Result<Self> {
        let comments = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| l.trim_start_matches('#').trim().to_string())
            .collect();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
            return Err(Error::format(
                "manifest",
                format!("header {:?}, expected {:?}", headers, MANIFEST_HEADER),
            ));
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let bad = |what: &str| Error::format("manifest", format!("row {}: {what}", i + 1));
            let level: u8 = record[2].parse().map_err(|_| bad("level is not an integer"))?;
            let score = match &record[4] {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|_| bad("score is not a number"))?),
            };
            let path = PathBuf::from(&record[3]);
            rows.push(ManifestRow {
                image_id: record[0].to_string(),
                family: record[1].parse()?,
                level,
                path: if path.is_absolute() { path } else { base.join(path) },
                score,
            });
        }
        Ok(Manifest { comments, rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_atomic(path, &self.to_csv(parent_dir(path))?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, parent_dir(path))
    }
}

fn parent_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new(""))
}
