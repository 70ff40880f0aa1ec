//! Command-line surface for shaforge-core: single-curve analysis, coefficient
//! and local-data dumps, and the checkpointed family scan.

pub mod commands;
pub mod error;
pub mod journal;
pub mod record;
pub mod scan;

pub use error::{CliError, CliResult};

/// Parses `a..b` (inclusive) or a single value `a`.
pub fn parse_range<T: std::str::FromStr + PartialOrd + Copy>(s: &str) -> Result<(T, T), String> {
    let parse = |v: &str| v.trim().parse::<T>().map_err(|_| format!("bad bound {v:?} in {s:?}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range::<i64>("-50..50"), Ok((-50, 50)));
        assert_eq!(parse_range::<i64>("-756..-756"), Ok((-756, -756)));
        assert_eq!(parse_range::<u32>("0..=2"), Ok((0, 2)));
        assert_eq!(parse_range::<u32>("7"), Ok((7, 7)));
        assert!(parse_range::<u32>("3..1").is_err());
        assert!(parse_range::<u32>("a..1").is_err());
    }
}
