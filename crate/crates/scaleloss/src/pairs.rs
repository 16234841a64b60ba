//! Matched-pair CSV: a header followed by
//! `gt_x,gt_y,gt_w,gt_h,pr_x,pr_y,pr_w,pr_h` rows.

use std::io::Read;
use std::path::Path;

use scaleloss_core::{Bbox, MatchedPair};

use crate::error::{CliError, Result};

pub const HEADER: [&str; 8] = ["gt_x", "gt_y", "gt_w", "gt_h", "pr_x", "pr_y", "pr_w", "pr_h"];

/// Reads pairs; errors carry the 1-based data row and the file line.
pub fn read_pairs<R: Read>(input: R, origin: &Path) -> Result<Vec<MatchedPair>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(input);
    let header = rdr.headers().map_err(|e| CliError::parse(origin, format!("header: {e}")))?.clone();
    if header.iter().ne(HEADER) {
        return Err(CliError::parse(
            origin,
            format!("header must be `{}`, got `{}`", HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::parse(origin, format!("row {row}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut v = [0.0; 8];
        for (k, field) in rec.iter().enumerate() {
            v[k] = field.parse().map_err(|_| {
                CliError::parse(origin, format!("row {row} (line {line}): {} is not a number: {field:?}", HEADER[k]))
            })?;
        }
        let boxed = |o: usize| {
            Bbox::new(v[o], v[o + 1], v[o + 2], v[o + 3])
                .map_err(|e| CliError::parse(origin, format!("row {row} (line {line}): {e}")))
        };
        out.push(MatchedPair { gt: boxed(0)?, pred: boxed(4)? });
    }
    if out.is_empty() {
        return Err(CliError::parse(origin, "no pairs"));
    }
    Ok(out)
}

pub fn load_pairs(path: &Path) -> Result<Vec<MatchedPair>> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_pairs(f, path)
}
