//! Parameter grids: a scalar or `lo:hi:n` with inclusive endpoints. Any
//! number may carry a `pi` suffix, e.g. `0.6pi:3.4pi:8`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn scalar(x: f64) -> Self {
        Self { lo: x, hi: x, n: 1 }
    }

    pub fn is_scalar(&self) -> bool {
        self.n == 1
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (body, factor) = match s.strip_suffix("pi") {
        Some("") => ("1", PI),
        Some(b) => (b.trim_end_matches('*'), PI),
        None => (s, 1.0),
    };
    let x: f64 = body.parse().map_err(|_| format!("not a number: {s:?}"))?;
    let x = x * factor;
    if !x.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(x)
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [x] => Grid::scalar(parse_number(x)?),
            [lo, hi, n] => {
                let n: usize = n.trim().parse().map_err(|_| format!("grid size must be a positive integer: {n:?}"))?;
                if n == 0 {
                    return Err("grid size must be at least 1".into());
                }
                let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
                if hi < lo {
                    return Err(format!("grid upper end {hi} is below lower end {lo}"));
                }
                if n == 1 && hi != lo {
                    return Err("a one-point grid needs lo = hi".into());
                }
                Grid { lo, hi, n }
            }
            _ => return Err(format!("expected a number or lo:hi:n, got {s:?}")),
        };
        if grid.lo < 0.0 {
            return Err(format!("value must be non-negative, got {}", grid.lo));
        }
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_scalar() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
        }
    }
}

/// Strictly positive float, for lengths and tolerances.
pub fn positive(s: &str) -> Result<f64, String> {
    let x = parse_number(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}
