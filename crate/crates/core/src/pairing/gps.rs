//! Tractor/trailer GPS consistency check.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsFix {
    /// Sample index; tractor and trailer fixes pair up on equal `t`.
    pub t: u64,
    pub x: f64,
    pub y: f64,
}

impl GpsFix {
    pub fn new(t: u64, x: f64, y: f64) -> Self {
        Self { t, x, y }
    }
}

/// How the antenna separation enters the residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Offset {
    /// The scalar separation added to both axes.
    Scalar(f64),
    /// A separate offset per axis.
    PerAxis { dx: f64, dy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpoofCheckParams {
    pub offset: Offset,
    /// Tractor receiver maximum error.
    pub e_t: f64,
    /// Trailer receiver maximum error.
    pub e_r: f64,
}

impl SpoofCheckParams {
    pub fn new(d: f64, e_t: f64, e_r: f64) -> Result<Self, GpsError> {
        check_param("d", d, true)?;
        check_param("e_T", e_t, true)?;
        check_param("e_R", e_r, true)?;
        Ok(Self { offset: Offset::Scalar(d), e_t, e_r })
    }

    pub fn per_axis(dx: f64, dy: f64, e_t: f64, e_r: f64) -> Result<Self, GpsError> {
        check_param("dx", dx, false)?;
        check_param("dy", dy, false)?;
        check_param("e_T", e_t, true)?;
        check_param("e_R", e_r, true)?;
        Ok(Self { offset: Offset::PerAxis { dx, dy }, e_t, e_r })
    }

    pub fn budget(&self) -> f64 {
        self.e_t + self.e_r
    }

    fn offsets(&self) -> (f64, f64) {
        match self.offset {
            Offset::Scalar(d) => (d, d),
            Offset::PerAxis { dx, dy } => (dx, dy),
        }
    }

    /// Absolute x and y residuals for one pair of fixes.
    pub fn residuals(&self, tractor: &GpsFix, trailer: &GpsFix) -> (f64, f64) {
        let (dx, dy) = self.offsets();
        ((tractor.x - (trailer.x + dx)).abs(), (tractor.y - (trailer.y + dy)).abs())
    }
}

fn check_param(name: &'static str, v: f64, nonneg: bool) -> Result<(), GpsError> {
    if !v.is_finite() {
        return Err(GpsError::NonFinite(name));
    }
    if nonneg && v < 0.0 {
        return Err(GpsError::Negative(name));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    SpoofOrMalfunction,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::SpoofOrMalfunction => "spoof-or-malfunction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GpsError {
    #[error("series lengths differ: tractor {tractor}, trailer {trailer}")]
    LengthMismatch { tractor: usize, trailer: usize },
    #[error("series not aligned at index {index}: tractor t={tractor_t}, trailer t={trailer_t}")]
    Misaligned { index: usize, tractor_t: u64, trailer_t: u64 },
    #[error("parameter {0} must be non-negative")]
    Negative(&'static str),
    #[error("parameter {0} must be finite")]
    NonFinite(&'static str),
    #[error("empty series")]
    Empty,
}

/// Per-index verdicts. An index is consistent when both residuals are
/// within the combined error budget; equality counts as consistent.
pub fn spoof_check(tractor: &[GpsFix], trailer: &[GpsFix], p: &SpoofCheckParams) -> Result<Vec<Verdict>, GpsError> {
    if tractor.len() != trailer.len() {
        return Err(GpsError::LengthMismatch { tractor: tractor.len(), trailer: trailer.len() });
    }
    let budget = p.budget();
    tractor
        .iter()
        .zip(trailer)
        .enumerate()
        .map(|(index, (a, b))| {
            if a.t != b.t {
                return Err(GpsError::Misaligned { index, tractor_t: a.t, trailer_t: b.t });
            }
            let (rx, ry) = p.residuals(a, b);
            Ok(if rx <= budget && ry <= budget { Verdict::Consistent } else { Verdict::SpoofOrMalfunction })
        })
        .collect()
}

/// Verdict on the most recent aligned pair only.
pub fn latest_consistent(tractor: &[GpsFix], trailer: &[GpsFix], p: &SpoofCheckParams) -> Result<bool, GpsError> {
    let (Some(a), Some(b)) = (tractor.last(), trailer.last()) else {
        return Err(GpsError::Empty);
    };
    Ok(spoof_check(std::slice::from_ref(a), std::slice::from_ref(b), p)? == [Verdict::Consistent])
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct GpsCsvError {
    pub line: u64,
    pub message: String,
}

/// Parses `t,x_T,y_T,x_R,y_R` rows. A header row is optional. Either side
/// may leave both of its columns empty to record a missing fix.
pub fn parse_gps_csv(text: &str) -> Result<(Vec<GpsFix>, Vec<GpsFix>), GpsCsvError> {
    let mut rd =
        csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let mut tractor = Vec::new();
    let mut trailer = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line_guess = i as u64 + 1;
        let rec = rec
            .map_err(|e| GpsCsvError { line: e.position().map_or(line_guess, |p| p.line()), message: e.to_string() })?;
        let line = rec.position().map_or(line_guess, |p| p.line());
        let err = |message: String| GpsCsvError { line, message };
        if i == 0 && rec.get(0).is_some_and(|f| f.eq_ignore_ascii_case("t")) {
            continue;
        }
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", rec.len())));
        }
        let t: u64 = rec[0].parse().map_err(|_| err(format!("bad index '{}'", &rec[0])))?;
        let coord = |j: usize| -> Result<Option<f64>, GpsCsvError> {
            let f = &rec[j];
            if f.is_empty() {
                return Ok(None);
            }
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(err(format!("bad coordinate '{f}' in column {}", j + 1))),
            }
        };
        for (side, xi, out) in [("tractor", 1, &mut tractor), ("trailer", 3, &mut trailer)] {
            match (coord(xi)?, coord(xi + 1)?) {
                (Some(x), Some(y)) => out.push(GpsFix { t, x, y }),
                (None, None) => {}
                _ => return Err(err(format!("{side} fix has only one coordinate"))),
            }
        }
    }
    Ok((tractor, trailer))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(xt: f64, yt: f64, xr: f64, yr: f64, p: SpoofCheckParams) -> Verdict {
        spoof_check(&[GpsFix::new(0, xt, yt)], &[GpsFix::new(0, xr, yr)], &p).unwrap()[0]
    }

    #[test]
    fn zero_case() {
        let s: Vec<_> = (0..10).map(|i| GpsFix::new(i, i as f64 * 1.5, -3.0)).collect();
        let p = SpoofCheckParams::new(0.0, 0.0, 0.0).unwrap();
        assert!(spoof_check(&s, &s, &p).unwrap().iter().all(|v| *v == Verdict::Consistent));
    }

    #[test]
    fn worked_examples() {
        let p = SpoofCheckParams::new(1.0, 0.25, 0.25).unwrap();
        assert_eq!(one(10.0, 5.0, 9.0, 4.0, p), Verdict::Consistent);
        assert_eq!(one(10.0, 5.0, 20.0, 4.0, p), Verdict::SpoofOrMalfunction);
    }

    #[test]
    fn boundary_is_consistent() {
        let p = SpoofCheckParams::new(0.0, 0.25, 0.25).unwrap();
        assert_eq!(one(1.5, 0.0, 1.0, 0.0, p), Verdict::Consistent);
        assert_eq!(one(1.5000001, 0.0, 1.0, 0.0, p), Verdict::SpoofOrMalfunction);
    }

    #[test]
    fn per_axis_variant() {
        let p = SpoofCheckParams::per_axis(2.0, 0.0, 0.1, 0.1).unwrap();
        assert_eq!(one(12.0, 4.0, 10.0, 4.0, p), Verdict::Consistent);
        let scalar = SpoofCheckParams::new(2.0, 0.1, 0.1).unwrap();
        assert_eq!(one(12.0, 4.0, 10.0, 4.0, scalar), Verdict::SpoofOrMalfunction);
    }

    #[test]
    fn errors() {
        let p = SpoofCheckParams::new(0.0, 1.0, 1.0).unwrap();
        let a = [GpsFix::new(0, 0.0, 0.0), GpsFix::new(1, 0.0, 0.0)];
        let b = [GpsFix::new(0, 0.0, 0.0), GpsFix::new(2, 0.0, 0.0)];
        assert_eq!(spoof_check(&a, &a[..1], &p), Err(GpsError::LengthMismatch { tractor: 2, trailer: 1 }));
        assert_eq!(spoof_check(&a, &b, &p), Err(GpsError::Misaligned { index: 1, tractor_t: 1, trailer_t: 2 }));
        assert_eq!(SpoofCheckParams::new(0.0, -1.0, 0.0), Err(GpsError::Negative("e_T")));
        assert_eq!(SpoofCheckParams::new(f64::NAN, 0.0, 0.0), Err(GpsError::NonFinite("d")));
        assert_eq!(latest_consistent(&[], &[], &p), Err(GpsError::Empty));
    }

    #[test]
    fn csv_parsing() {
        let (a, b) = parse_gps_csv("t,x_T,y_T,x_R,y_R\n0,10,5,9,4\n1, 10.5 ,5,9.5,4\n").unwrap();
        assert_eq!(a, vec![GpsFix::new(0, 10.0, 5.0), GpsFix::new(1, 10.5, 5.0)]);
        assert_eq!(b[1], GpsFix::new(1, 9.5, 4.0));
        let (a, b) = parse_gps_csv("0,1,1,,\n").unwrap();
        assert_eq!((a.len(), b.len()), (1, 0));
        assert_eq!(parse_gps_csv("t,x_T,y_T,x_R,y_R\n0,1,1,1,1\n1,1,x,1,1\n").unwrap_err().line, 3);
        assert_eq!(parse_gps_csv("0,1,1,1\n").unwrap_err().line, 1);
        assert_eq!(parse_gps_csv("0,1,1,1,\n").unwrap_err().line, 1);
    }
}
