use std::path::Path;

use super::{content_lines, parse_f64, CloudFormat, PointCloud};
use crate::error::{Error, Result};

pub fn parse_point_cloud(text: &str, format: CloudFormat, path: &Path) -> Result<PointCloud> {
    let mut coords = Vec::new();
    let mut dim = None;
    let mut rows = 0usize;
    let mut last = 0;
    for (l, line) in content_lines(text) {
        let toks: Vec<&str> = match format {
            CloudFormat::Xyz => line.split_whitespace().collect(),
            CloudFormat::Csv => line.split(',').map(str::trim).collect(),
        };
        // tolerate a leading header row in CSV files
        if rows == 0 && format == CloudFormat::Csv && toks.iter().all(|t| t.parse::<f64>().is_err()) {
            continue;
        }
        let d = *dim.get_or_insert(toks.len());
        if toks.len() != d {
            return Err(Error::parse(
                path,
                l,
                format!("row has {} columns, expected {d}", toks.len()),
            ));
        }
        for t in toks {
            coords.push(parse_f64(t, path, l)?);
        }
        rows += 1;
        last = l;
    }
    if rows < 2 {
        return Err(Error::parse(path, last.max(1), format!("need at least 2 points, found {rows}")));
    }
    PointCloud::new(coords, dim.unwrap_or(0))
}
