//! Line-oriented manifests: `path<TAB>label<TAB>trial<TAB>seed`.
//! Paths are relative to the manifest's directory unless absolute.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Label,
    pub trial: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", e.path.display(), e.label, e.trial, e.seed);
        }
        out
    }

    pub fn parse(text: &str, source: &Path) -> Result<Manifest> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fail = |m: &str| Error::format(source, format!("line {}: {m}", n + 1));
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(fail(&format!("expected 4 tab-separated fields, found {}", fields.len())));
            }
            let label = fields[1].parse().map(Label).map_err(|_| fail("bad label"))?;
            let trial = fields[2].parse().map_err(|_| fail("bad trial index"))?;
            let seed = fields[3].parse().map_err(|_| fail("bad seed"))?;
            let path = PathBuf::from(fields[0]);
            if !seen.insert(path.clone()) {
                return Err(fail(&format!("duplicate path {}", path.display())));
            }
            entries.push(ManifestEntry { path, label, trial, seed });
        }
        Ok(Manifest { entries })
    }

    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::format(path, e.to_string()))?;
        Self::parse(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Resolves an entry path against the directory holding `manifest_path`.
    pub fn resolve(manifest_path: &Path, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            manifest_path.parent().unwrap_or(Path::new(".")).join(&entry.path)
        }
    }

    pub fn labels(&self) -> Vec<Label> {
        let mut l: Vec<Label> = self.entries.iter().map(|e| e.label).collect();
        l.sort();
        l.dedup();
        l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let m = Manifest {
            entries: vec![
                ManifestEntry { path: "a/1.pgm".into(), label: Label(1), trial: 0, seed: 99 },
                ManifestEntry { path: "a/2.pgm".into(), label: Label(2), trial: 3, seed: u64::MAX },
            ],
        };
        let text = m.to_text();
        assert_eq!(text.lines().next().unwrap(), "a/1.pgm\t1\t0\t99");
        assert_eq!(Manifest::parse(&text, Path::new("m")).unwrap(), m);
        assert_eq!(m.labels(), vec![Label(1), Label(2)]);
    }

    #[test]
    fn rejects_duplicates_and_bad_lines() {
        let p = Path::new("m");
        assert!(Manifest::parse("x\t1\t0\t1\nx\t2\t0\t1\n", p).is_err());
        assert!(Manifest::parse("x\t1\t0\n", p).is_err());
        let err = Manifest::parse("x\tone\t0\t1\n", p).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        assert_eq!(Manifest::parse("", p).unwrap().entries.len(), 0);
    }

    #[test]
    fn resolves_relative_paths() {
        let e = ManifestEntry { path: "f/1.uwbf".into(), label: Label(1), trial: 0, seed: 0 };
        assert_eq!(Manifest::resolve(Path::new("/d/manifest.tsv"), &e), PathBuf::from("/d/f/1.uwbf"));
    }
}
