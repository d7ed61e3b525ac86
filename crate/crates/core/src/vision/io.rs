use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use super::{CameraEvent, Polarity};

#[derive(Debug, Error)]
pub enum VisionError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("{path}:{line}: parse error: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: timestamps must be non-decreasing ({prev} then {cur})")]
    NonMonotonic {
        path: String,
        line: usize,
        prev: u64,
        cur: u64,
    },
}

pub const EVENT_CSV_HEADER: &str = "t_us,x,y,polarity";
const MAX_X: u16 = 128;
const MAX_Y: u16 = 40;

/// Write events in the interchange format: UTF-8 CSV, header
/// `t_us,x,y,polarity`, polarity 1 = ON / 0 = OFF, timestamps in
/// microseconds.
pub fn save_events_to<W: Write>(events: &[CameraEvent], mut w: W) -> io::Result<()> {
    writeln!(w, "{EVENT_CSV_HEADER}")?;
    for e in events {
        let p = match e.polarity {
            Polarity::On => 1,
            Polarity::Off => 0,
        };
        writeln!(w, "{},{},{},{}", e.t_us, e.x, e.y, p)?;
    }
    Ok(())
}

pub fn save_events(events: &[CameraEvent], path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    save_events_to(events, &mut w)?;
    w.flush()
}

/// Read an event stream, validating coordinates and timestamp monotonicity.
/// Comment lines starting with `#` and the column header are skipped.
pub fn load_events_from<R: BufRead>(r: R, path_label: &str) -> Result<Vec<CameraEvent>, VisionError> {
    let mut events = Vec::new();
    let mut prev_t: Option<u64> = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed == EVENT_CSV_HEADER {
            continue;
        }
        let err = |reason: String| VisionError::Parse {
            path: path_label.to_string(),
            line: lineno,
            reason,
        };
        let mut parts = trimmed.split(',');
        let mut field = |name: &str| {
            parts
                .next()
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| err(format!("missing field '{name}'")))
        };
        let t_us: u64 = field("t_us")?.parse().map_err(|e| err(format!("t_us: {e}")))?;
        let x: u16 = field("x")?.parse().map_err(|e| err(format!("x: {e}")))?;
        let y: u16 = field("y")?.parse().map_err(|e| err(format!("y: {e}")))?;
        let pol = field("polarity")?;
        let polarity = match pol {
            "1" => Polarity::On,
            "0" => Polarity::Off,
            other => return Err(err(format!("polarity must be 0 or 1, got '{other}'"))),
        };
        if x >= MAX_X || y >= MAX_Y {
            return Err(err(format!("pixel ({x},{y}) out of 128x40 range")));
        }
        if let Some(p) = prev_t {
            if t_us < p {
                return Err(VisionError::NonMonotonic {
                    path: path_label.to_string(),
                    line: lineno,
                    prev: p,
                    cur: t_us,
                });
            }
        }
        prev_t = Some(t_us);
        events.push(CameraEvent { t_us, x, y, polarity });
    }
    Ok(events)
}

pub fn load_events(path: &Path) -> Result<Vec<CameraEvent>, VisionError> {
    let f = File::open(path).map_err(VisionError::Io)?;
    load_events_from(BufReader::new(f), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_empty_stream() {
        let ev = load_events_from(io::Cursor::new(""), "mem").unwrap();
        assert!(ev.is_empty());
    }

    #[test]
    fn single_row_parses_per_format_definition() {
        let ev = load_events_from(io::Cursor::new("0,5,7,1\n"), "mem").unwrap();
        assert_eq!(
            ev,
            vec![CameraEvent { t_us: 0, x: 5, y: 7, polarity: Polarity::On }]
        );
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let input = "t_us,x,y,polarity\n0,1,2,1\nnot,a,row\n";
        let err = load_events_from(io::Cursor::new(input), "mem").unwrap_err();
        match err {
            VisionError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_monotonic_timestamps_rejected() {
        let input = "5000,1,2,1\n0,1,2,0\n";
        let err = load_events_from(io::Cursor::new(input), "mem").unwrap_err();
        assert!(matches!(err, VisionError::NonMonotonic { line: 2, .. }));
    }

    #[test]
    fn out_of_range_coordinates_rejected() {
        let err = load_events_from(io::Cursor::new("0,128,0,1\n"), "mem").unwrap_err();
        assert!(matches!(err, VisionError::Parse { .. }));
    }
}
