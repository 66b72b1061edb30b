//! On-disk cache of realizable sets, one plain-text file per `(k, labels)`.
//!
//! ```text
//! ergm-realizable-cache v1
//! k 3
//! specs triangles,edges,mean_degree
//! total 8
//! rows 4
//! 0/1 0/1 0/1 1
//! ...
//! ```
//!
//! Each row lists the exact coordinates followed by the multiplicity, in the
//! set's sorted order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphspace::{realizable_set, RealizableSet, StatisticSpec};
use crate::rational::{format_rational, parse_rational, RationalVector};

const MAGIC: &str = "ergm-realizable-cache v1";

/// Environment variable naming the cache directory when none is configured.
pub const CACHE_DIR_ENV: &str = "ERGM_EXACT_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Disabled,
    Hit,
    Miss,
    /// The file existed but was rejected; the set was recomputed.
    Rejected {
        reason: String,
    },
}

pub fn cache_file_name(k: usize, specs: &[StatisticSpec]) -> String {
    let labels: Vec<&str> = specs.iter().map(|s| s.label.as_str()).collect();
    format!("k{k}-{}.txt", labels.join("+"))
}

fn render(set: &RealizableSet) -> String {
    let mut out = String::new();
    let labels: Vec<&str> = set.specs.iter().map(|s| s.label.as_str()).collect();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "k {}", set.k);
    let _ = writeln!(out, "specs {}", labels.join(","));
    let _ = writeln!(out, "total {}", set.total);
    let _ = writeln!(out, "rows {}", set.len());
    for (p, m) in set.points.iter().zip(&set.multiplicities) {
        for c in p.iter() {
            let _ = write!(out, "{} ", format_rational(c));
        }
        let _ = writeln!(out, "{m}");
    }
    out
}

pub fn write_cache(set: &RealizableSet, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, render(set))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    line.and_then(|l| l.strip_prefix(key))
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::Cache(format!("missing `{key}` header")))
}

/// Reads a cache file, checking that it belongs to `(k, specs)` and that the
/// stored set satisfies every realizable-set invariant.
pub fn read_cache(path: &Path, k: usize, specs: &[StatisticSpec]) -> Result<RealizableSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(Error::Cache("not a realizable-set cache".into()));
    }
    let bad = |what: &str| Error::Cache(format!("malformed {what}"));
    let cached_k: usize = header(lines.next(), "k")?.parse().map_err(|_| bad("k"))?;
    let labels = header(lines.next(), "specs")?;
    let expected: Vec<&str> = specs.iter().map(|s| s.label.as_str()).collect();
    if cached_k != k || labels != expected.join(",") {
        return Err(Error::Cache(format!(
            "key mismatch: file holds k={cached_k} [{labels}]"
        )));
    }
    let total: u64 = header(lines.next(), "total")?
        .parse()
        .map_err(|_| bad("total"))?;
    let rows: usize = header(lines.next(), "rows")?
        .parse()
        .map_err(|_| bad("rows"))?;

    let mut parsed = Vec::with_capacity(rows);
    for line in lines.by_ref().take(rows) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some((m, coords)) = fields.split_last() else {
            return Err(bad("row"));
        };
        let m: u64 = m.parse().map_err(|_| bad("multiplicity"))?;
        let point = coords
            .iter()
            .map(|c| parse_rational(c))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("coordinate"))?;
        parsed.push((RationalVector(point), m));
    }
    if parsed.len() != rows || lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Cache("row count does not match header".into()));
    }
    if parsed.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Cache("rows are not in canonical order".into()));
    }
    let set = RealizableSet::from_rows(k, specs.to_vec(), parsed)
        .map_err(|e| Error::Cache(e.to_string()))?;
    if set.total != total {
        return Err(Error::Cache("total does not match the rows".into()));
    }
    Ok(set)
}

/// Writes `set` to `path` and reads it back.
pub fn cache_roundtrip(set: &RealizableSet, path: &Path) -> Result<RealizableSet> {
    write_cache(set, path)?;
    read_cache(path, set.k, &set.specs)
}

/// The cache directory: the configured one, else the environment variable.
pub fn cache_dir(configured: Option<&Path>) -> Option<PathBuf> {
    configured
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
}

/// Loads the set from `dir` when a valid cache exists, otherwise enumerates
/// and (re)writes the cache.
pub fn load_or_build(
    k: usize,
    specs: &[StatisticSpec],
    dir: Option<&Path>,
) -> Result<(RealizableSet, CacheStatus)> {
    let Some(dir) = dir else {
        return Ok((realizable_set(k, specs)?, CacheStatus::Disabled));
    };
    let path = dir.join(cache_file_name(k, specs));
    let status = if path.exists() {
        match read_cache(&path, k, specs) {
            Ok(set) => return Ok((set, CacheStatus::Hit)),
            Err(e) => CacheStatus::Rejected {
                reason: e.to_string(),
            },
        }
    } else {
        CacheStatus::Miss
    };
    let set = realizable_set(k, specs)?;
    write_cache(&set, &path)?;
    Ok((set, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphspace::StatisticKind::*;

    fn tri_edge_deg() -> RealizableSet {
        realizable_set(3, &StatisticSpec::list(&[Triangles, Edges, MeanDegree])).unwrap()
    }

    #[test]
    fn roundtrip_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let set = tri_edge_deg();
        let back = cache_roundtrip(&set, &dir.path().join("tri_edge_deg.txt")).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn tampered_multiplicity_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri_edge_deg.txt");
        write_cache(&tri_edge_deg(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let tampered = text.replacen("0/1 0/1 0/1 1", "0/1 0/1 0/1 2", 1);
        assert_ne!(text, tampered);
        fs::write(&path, tampered).unwrap();
        let err = read_cache(&path, 3, &tri_edge_deg().specs).unwrap_err();
        assert!(matches!(err, Error::Cache(_)), "{err:?}");
    }

    #[test]
    fn key_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri_edge_deg.txt");
        write_cache(&tri_edge_deg(), &path).unwrap();
        assert!(matches!(
            read_cache(&path, 4, &tri_edge_deg().specs),
            Err(Error::Cache(_))
        ));
        let other = StatisticSpec::list(&[Edges, Triangles, MeanDegree]);
        assert!(matches!(read_cache(&path, 3, &other), Err(Error::Cache(_))));
    }

    #[test]
    fn truncated_and_garbage_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri_edge_deg.txt");
        write_cache(&tri_edge_deg(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(7).map(|l| format!("{l}\n")).collect();
        fs::write(&path, cut).unwrap();
        assert!(matches!(
            read_cache(&path, 3, &tri_edge_deg().specs),
            Err(Error::Cache(_))
        ));
        fs::write(&path, "hello").unwrap();
        assert!(matches!(
            read_cache(&path, 3, &tri_edge_deg().specs),
            Err(Error::Cache(_))
        ));
    }

    #[test]
    fn load_or_build_recovers_from_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let specs = tri_edge_deg().specs;
        let (a, s1) = load_or_build(3, &specs, Some(dir.path())).unwrap();
        assert_eq!(s1, CacheStatus::Miss);
        let (b, s2) = load_or_build(3, &specs, Some(dir.path())).unwrap();
        assert_eq!(s2, CacheStatus::Hit);
        assert_eq!(a, b);
        fs::write(dir.path().join(cache_file_name(3, &specs)), "junk").unwrap();
        let (c, s3) = load_or_build(3, &specs, Some(dir.path())).unwrap();
        assert!(matches!(s3, CacheStatus::Rejected { .. }));
        assert_eq!(a, c);
        let (_, s4) = load_or_build(3, &specs, Some(dir.path())).unwrap();
        assert_eq!(s4, CacheStatus::Hit);
    }
}
