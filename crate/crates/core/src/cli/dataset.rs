use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, Trim};

use super::CliError;
use crate::approximation::DataSet;
use crate::linalg::C64;

/// Parses one cell: a real (`-1.5`, `2e-3`) or a complex number written
/// `a+bi`, `a-bi`, `bi` or `i`.
pub fn parse_scalar(cell: &str) -> Option<C64> {
    let z = C64::from_str(cell).ok()?;
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

/// Reads a CSV file whose rows are data vectors. Lines starting with `#`
/// (such as a `# dim=d` header) are skipped.
pub fn parse_dataset(path: &Path) -> Result<DataSet, CliError> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    let data = read_dataset(file)?;
    Ok(match label {
        Some(l) => data.with_label(l),
        None => data,
    })
}

pub fn read_dataset<R: Read>(input: R) -> Result<DataSet, CliError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(rows.len() as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::Ragged {
                row: line,
                expected,
                found: record.len(),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                parse_scalar(cell).ok_or_else(|| CliError::Scalar {
                    row: line,
                    col: col + 1,
                    cell: cell.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::EmptyData);
    }
    Ok(DataSet::new(rows)?)
}
