//! CSV traces: header `time,var1[,var2,...]`, one row per sample.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use scl_core::PiecewiseConstantSignal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: duplicate timestamp {time}")]
    Duplicate { line: u64, time: f64 },
    #[error("line {line}: timestamp {time} is earlier than the previous row")]
    Unsorted { line: u64, time: f64 },
    #[error("header must start with `time` followed by at least one variable")]
    Header,
    #[error(transparent)]
    Signal(#[from] scl_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn read_trace(path: &Path) -> Result<PiecewiseConstantSignal, TraceError> {
    read_trace_from(fs::File::open(path)?)
}

/// Parses a trace; the duration is the last sample time.
pub fn read_trace_from<R: Read>(reader: R) -> Result<PiecewiseConstantSignal, TraceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| TraceError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.len() < 2 || &headers[0] != "time" {
        return Err(TraceError::Header);
    }
    let variables: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut samples: Vec<(f64, Vec<f64>)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| TraceError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |i: usize| -> Result<f64, TraceError> {
            let text = &record[i];
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TraceError::Malformed {
                    line,
                    message: format!("column {}: `{text}` is not a finite number", i + 1),
                })
        };
        let time = parse(0)?;
        let values = (1..record.len()).map(parse).collect::<Result<Vec<_>, _>>()?;
        if let Some((last, _)) = samples.last() {
            if time == *last {
                return Err(TraceError::Duplicate { line, time });
            }
            if time < *last {
                return Err(TraceError::Unsorted { line, time });
            }
        }
        samples.push((time, values));
    }
    Ok(PiecewiseConstantSignal::new(variables, samples, None)?)
}

/// Writes a trace; a duration beyond the last sample becomes one more row
/// repeating the last values.
pub fn write_trace_to<W: Write>(s: &PiecewiseConstantSignal, writer: W) -> Result<(), TraceError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["time".to_string()];
    header.extend(s.variables().iter().cloned());
    w.write_record(&header).map_err(csv_io)?;
    let row = |t: f64, values: &[f64]| -> Vec<String> {
        std::iter::once(t.to_string())
            .chain(values.iter().map(|v| v.to_string()))
            .collect()
    };
    for (t, values) in s.samples() {
        w.write_record(row(t, values)).map_err(csv_io)?;
    }
    let last = *s.times().last().expect("non-empty trace");
    if s.duration() > last {
        w.write_record(row(s.duration(), s.row(s.len() - 1))).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> TraceError {
    TraceError::Io(std::io::Error::other(e))
}

pub fn trace_to_string(s: &PiecewiseConstantSignal) -> String {
    let mut buf = Vec::new();
    write_trace_to(s, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii csv")
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = PiecewiseConstantSignal::new(
            vec!["G".into(), "I".into()],
            vec![(0.0, vec![100.5, 0.0]), (0.1, vec![1e-7, 2.0]), (1.0 / 3.0, vec![-3.0, 0.25])],
            None,
        )
        .unwrap();
        let text = trace_to_string(&s);
        assert_eq!(read_trace_from(text.as_bytes()).unwrap(), s);
    }

    #[test]
    fn duplicate_timestamp_names_the_line() {
        let err = read_trace_from("time,G\n0,1\n1,2\n1,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TraceError::Duplicate { line: 4, .. }), "{err}");
    }

    #[test]
    fn malformed_value_names_the_line() {
        let err = read_trace_from("time,G\n0,1\n2,abc\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
    }

    #[test]
    fn bad_header() {
        assert!(matches!(read_trace_from("t,G\n0,1\n".as_bytes()), Err(TraceError::Header)));
    }
}
