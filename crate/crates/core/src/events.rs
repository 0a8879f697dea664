//! Space-time events: ingestion, projection onto the network, and time
//! normalization onto `[0, 1]`.

use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::network::{LinearNetwork, NetPoint};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<T> {
    pub location: NetPoint<T>,
    /// Normalized time in `[0, 1]`.
    pub time: T,
    /// Original timestamp (days since 1970-01-01 for dates, the raw value
    /// for float input).
    pub raw_time: f64,
}

impl<T: Scalar> Event<T> {
    pub fn new(location: NetPoint<T>, time: T) -> Self {
        Event {
            location,
            time,
            raw_time: time.f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeFormat {
    /// Plain numbers.
    Float,
    /// ISO-8601 dates or date-times, stored as fractional days.
    Date,
}

impl std::str::FromStr for TimeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(TimeFormat::Float),
            "date" => Ok(TimeFormat::Date),
            other => Err(Error::InvalidArgument(format!(
                "time format must be `float` or `date`, got `{other}`"
            ))),
        }
    }
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date")
}

/// Parses a raw timestamp into the numeric scale used for normalization.
pub fn parse_time(s: &str, format: TimeFormat) -> Result<f64> {
    let s = s.trim();
    match format {
        TimeFormat::Float => s
            .parse::<f64>()
            .map_err(|e| Error::InvalidArgument(format!("bad time `{s}`: {e}"))),
        TimeFormat::Date => {
            if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
                return Ok((d - epoch()).num_days() as f64);
            }
            for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
                if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
                    let secs = (dt - epoch().and_hms_opt(0, 0, 0).expect("midnight"))
                        .num_seconds();
                    return Ok(secs as f64 / 86_400.0);
                }
            }
            Err(Error::InvalidArgument(format!("bad ISO-8601 date `{s}`")))
        }
    }
}

/// Date for a day count produced by [`parse_time`] with [`TimeFormat::Date`].
pub fn date_of(days: f64) -> NaiveDate {
    epoch() + chrono::Duration::days(days.floor() as i64)
}

/// Calendar quarter label such as `2018 Q2`.
pub fn quarter_label(days: f64) -> String {
    let d = date_of(days);
    format!("{} Q{}", d.year(), (d.month0() / 3) + 1)
}

/// Affine map from raw timestamps onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(end > start) {
            return Err(Error::InvalidArgument(format!(
                "time window end {end} must exceed start {start}"
            )));
        }
        Ok(TimeWindow { start, end })
    }

    /// Window spanning the observed minimum and maximum.
    pub fn from_data(raw: &[f64]) -> Result<Self> {
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi)
    }

    pub fn normalize(&self, raw: f64) -> Result<f64> {
        let t = (raw - self.start) / (self.end - self.start);
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "timestamp {raw} lies outside the window [{}, {}]",
                self.start, self.end
            )));
        }
        Ok(t)
    }

    pub fn denormalize(&self, t: f64) -> f64 {
        self.start + t * (self.end - self.start)
    }
}

/// One row of an events file before projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawEvent {
    pub row: usize,
    pub xy: [f64; 2],
    pub raw_time: f64,
}

/// Reads an `x,y,t` file.
pub fn read_events_csv(path: impl AsRef<Path>, format: TimeFormat) -> Result<Vec<RawEvent>> {
    let path = path.as_ref();
    let mut reader = crate::table::reader(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("{}: missing column `{name}`", path.display())))
    };
    let (cx, cy, ct) = (col("x")?, col("y")?, col("t")?);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let num = |c: usize| -> Result<f64> {
            rec.get(c)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::BadRow { row, msg: e.to_string() })
        };
        let raw_time = parse_time(rec.get(ct).unwrap_or(""), format)
            .map_err(|e| Error::BadRow { row, msg: e.to_string() })?;
        out.push(RawEvent {
            row,
            xy: [num(cx)?, num(cy)?],
            raw_time,
        });
    }
    if out.is_empty() {
        return Err(Error::Empty(path.display().to_string()));
    }
    Ok(out)
}

/// Outcome of snapping raw events onto the network.
#[derive(Debug, Clone)]
pub struct PreparedEvents<T> {
    pub events: Vec<Event<T>>,
    /// Input row of each kept event.
    pub rows: Vec<usize>,
    /// Input rows dropped for lying beyond the cutoff.
    pub rejected: Vec<usize>,
}

/// Projects each event to the closest street within `cutoff` meters and
/// normalizes its time.
pub fn prepare_events<T: Scalar>(
    net: &LinearNetwork<T>,
    raw: &[RawEvent],
    cutoff: T,
    window: &TimeWindow,
) -> Result<PreparedEvents<T>> {
    let mut out = PreparedEvents {
        events: Vec::with_capacity(raw.len()),
        rows: Vec::with_capacity(raw.len()),
        rejected: Vec::new(),
    };
    for r in raw {
        match net.project_event([T::of(r.xy[0]), T::of(r.xy[1])], cutoff) {
            Some(p) => {
                let t = window
                    .normalize(r.raw_time)
                    .map_err(|e| Error::BadRow { row: r.row, msg: e.to_string() })?;
                out.events.push(Event {
                    location: p.point,
                    time: T::of(t),
                    raw_time: r.raw_time,
                });
                out.rows.push(r.row);
            }
            None => out.rejected.push(r.row),
        }
    }
    Ok(out)
}

/// Writes the standard `x,y,t` events file with normalized times.
pub fn write_events_csv<T: Scalar, W: std::io::Write>(w: W, events: &[Event<T>]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y", "t"])?;
    for e in events {
        wr.write_record([
            e.location.xy[0].to_string(),
            e.location.xy[1].to_string(),
            e.time.to_string(),
        ])?;
    }
    wr.flush().map_err(|e| Error::Io {
        path: "<events>".into(),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn quarter_of_a_date() {
        let d = parse_time("2018-05-10", TimeFormat::Date).unwrap();
        assert_eq!(quarter_label(d), "2018 Q2");
        assert_eq!(quarter_label(parse_time("2019-12-31", TimeFormat::Date).unwrap()), "2019 Q4");
        assert_eq!(quarter_label(parse_time("2018-01-01T10:30:00", TimeFormat::Date).unwrap()), "2018 Q1");
    }

    #[test]
    fn window_normalization() {
        let start = parse_time("2018-01-01", TimeFormat::Date).unwrap();
        let end = parse_time("2019-12-31", TimeFormat::Date).unwrap();
        let w = TimeWindow::new(start, end).unwrap();
        assert_eq!(w.normalize(start).unwrap(), 0.0);
        assert_eq!(w.normalize(end).unwrap(), 1.0);
        let mid = w.denormalize(0.5);
        assert!((w.normalize(mid).unwrap() - 0.5).abs() < 1e-15);
        assert!(w.normalize(end + 1.0).is_err());
        assert!(TimeWindow::new(3.0, 3.0).is_err());
    }

    #[test]
    fn reads_and_projects() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x,y,t\n10,5,2018-01-01\n50,700,2018-06-01\n90,-3,2018-12-31").unwrap();
        let raw = read_events_csv(f.path(), TimeFormat::Date).unwrap();
        assert_eq!(raw.len(), 3);
        let net = LinearNetwork::<f64>::from_segments([(1, [0.0, 0.0], [100.0, 0.0])]).unwrap();
        let win = TimeWindow::from_data(&raw.iter().map(|r| r.raw_time).collect::<Vec<_>>()).unwrap();
        let prep = prepare_events(&net, &raw, 500.0, &win).unwrap();
        assert_eq!(prep.events.len(), 2);
        assert_eq!(prep.rejected, vec![2]);
        assert_eq!(prep.events[0].time, 0.0);
        assert_eq!(prep.events[1].time, 1.0);
        assert!((prep.events[0].location.offset - 0.1).abs() < 1e-12);
    }

    #[test]
    fn bad_time_reports_row() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x,y,t\n1,2,0.5\n1,2,yesterday").unwrap();
        assert!(matches!(
            read_events_csv(f.path(), TimeFormat::Float),
            Err(Error::BadRow { row: 2, .. })
        ));
    }
}
