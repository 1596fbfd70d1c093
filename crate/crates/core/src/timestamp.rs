//! UTC timestamps in the dump's ISO 8601 profile.
//!
//! Dumps write instants as `+2019-05-27T09:31:10Z`; the leading `+` is
//! optional on input and always emitted on output.

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A UTC instant with second precision, ordered chronologically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid timestamp {text:?}: {reason}")]
pub struct TimestampParseError {
    pub text: String,
    pub reason: &'static str,
}

impl Timestamp {
    pub fn from_unix_seconds(secs: i64) -> Self {
        Timestamp(secs)
    }

    pub fn unix_seconds(self) -> i64 {
        self.0
    }

    /// Parses `[+]YYYY-MM-DDTHH:MM:SSZ`.
    pub fn parse(text: &str) -> Result<Self, TimestampParseError> {
        let err = |reason| TimestampParseError {
            text: text.to_owned(),
            reason,
        };
        let body = text.strip_prefix('+').unwrap_or(text);
        let bytes = body.as_bytes();
        if bytes.len() != 20 {
            return Err(err("expected YYYY-MM-DDTHH:MM:SSZ"));
        }
        if bytes[4] != b'-'
            || bytes[7] != b'-'
            || bytes[10] != b'T'
            || bytes[13] != b':'
            || bytes[16] != b':'
            || bytes[19] != b'Z'
        {
            return Err(err("misplaced separators"));
        }
        let num = |range: std::ops::Range<usize>, reason| -> Result<i64, TimestampParseError> {
            body[range]
                .parse::<i64>()
                .map_err(|_| err(reason))
                .and_then(|v| if v < 0 { Err(err(reason)) } else { Ok(v) })
        };
        let year = num(0..4, "bad year")?;
        let month = num(5..7, "bad month")?;
        let day = num(8..10, "bad day")?;
        let hour = num(11..13, "bad hour")?;
        let minute = num(14..16, "bad minute")?;
        let sec = num(17..19, "bad second")?;
        if !(1..=12).contains(&month) {
            return Err(err("month out of range"));
        }
        if day < 1 || day > days_in_month(year, month) {
            return Err(err("day out of range"));
        }
        if hour > 23 || minute > 59 || sec > 59 {
            return Err(err("time out of range"));
        }
        let days = days_from_civil(year, month, day);
        Ok(Timestamp(days * 86_400 + hour * 3_600 + minute * 60 + sec))
    }

    fn civil(self) -> (i64, i64, i64, i64, i64, i64) {
        let days = self.0.div_euclid(86_400);
        let rem = self.0.rem_euclid(86_400);
        let (y, m, d) = civil_from_days(days);
        (y, m, d, rem / 3_600, rem % 3_600 / 60, rem % 60)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d, h, mi, s) = self.civil();
        write!(f, "+{y:04}-{m:02}-{d:02}T{h:02}:{mi:02}:{s:02}Z")
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Timestamp::parse(&text).map_err(de::Error::custom)
    }
}

fn is_leap(year: i64) -> bool {
    year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)
}

fn days_in_month(year: i64, month: i64) -> i64 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        _ => 28,
    }
}

// Proleptic Gregorian day count, days since 1970-01-01.
fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i64, i64, i64) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1_460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    (if m <= 2 { y + 1 } else { y }, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prefixed_and_unprefixed() {
        let a = Timestamp::parse("+2019-05-27T09:31:10Z").unwrap();
        let b = Timestamp::parse("2019-05-27T09:31:10Z").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn formats_with_prefix() {
        let t = Timestamp::parse("2019-05-27T09:31:10Z").unwrap();
        assert_eq!(t.to_string(), "+2019-05-27T09:31:10Z");
    }

    #[test]
    fn round_trips_epoch_boundaries() {
        for text in [
            "+1970-01-01T00:00:00Z",
            "+1969-12-31T23:59:59Z",
            "+2000-02-29T12:00:00Z",
            "+2021-11-01T00:00:00Z",
        ] {
            let t = Timestamp::parse(text).unwrap();
            assert_eq!(t.to_string(), text);
        }
    }

    #[test]
    fn epoch_is_zero() {
        assert_eq!(Timestamp::parse("1970-01-01T00:00:00Z").unwrap().unix_seconds(), 0);
        assert_eq!(Timestamp::parse("1970-01-02T00:00:00Z").unwrap().unix_seconds(), 86_400);
    }

    #[test]
    fn ordering_is_chronological() {
        let early = Timestamp::parse("+2019-05-27T09:31:10Z").unwrap();
        let late = Timestamp::parse("+2019-05-27T09:31:11Z").unwrap();
        assert!(early < late);
    }

    #[test]
    fn rejects_malformed() {
        for text in ["", "2019-05-27", "2019-13-01T00:00:00Z", "2019-02-30T00:00:00Z", "2019-05-27T24:00:00Z", "x019-05-27T09:31:10Z"] {
            assert!(Timestamp::parse(text).is_err(), "{text}");
        }
    }
}
