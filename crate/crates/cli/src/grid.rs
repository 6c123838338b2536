//! `min:max:n[:lin|log]` grid specifications.

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub log: bool,
}

impl GridSpec {
    fn parse(text: &str, what: &str, allow_scale: bool) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Usage(format!("{what} '{text}': {why}"));
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let (nums, log) = match (parts.len(), allow_scale) {
            (3, _) => (&parts[..], false),
            (4, true) => match parts[3] {
                "lin" => (&parts[..3], false),
                "log" => (&parts[..3], true),
                _ => return Err(bad("scale must be lin or log")),
            },
            _ => {
                let form = if allow_scale { "min:max:n:lin|log" } else { "min:max:n" };
                return Err(bad(&format!("expected {form}")));
            }
        };
        let min: f64 = nums[0].parse().map_err(|_| bad("min is not a number"))?;
        let max: f64 = nums[1].parse().map_err(|_| bad("max is not a number"))?;
        let n: usize = nums[2].parse().map_err(|_| bad("n is not a count"))?;
        if n == 0 {
            return Err(bad("grid is empty"));
        }
        if !(min.is_finite() && max.is_finite()) || max < min || (n > 1 && max == min) {
            return Err(bad("need finite min < max"));
        }
        if log && min <= 0.0 {
            return Err(bad("log grid needs min > 0"));
        }
        Ok(Self { min, max, n, log })
    }

    pub fn parse_r(text: &str) -> Result<Self, CliError> {
        Self::parse(text, "r-grid", true)
    }

    pub fn parse_tau(text: &str) -> Result<Self, CliError> {
        Self::parse(text, "tau-grid", false)
    }

    /// Endpoints included; strictly increasing.
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.n == 1 {
            return Ok(vec![self.min]);
        }
        let last = (self.n - 1) as f64;
        Ok((0..self.n)
            .map(|i| {
                let x = i as f64 / last;
                if i + 1 == self.n {
                    self.max
                } else if self.log {
                    self.min * (self.max / self.min).powf(x)
                } else {
                    self.min + (self.max - self.min) * x
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log() {
        let g = GridSpec::parse_tau("0:12000:201").unwrap();
        let p = g.points().unwrap();
        assert_eq!((p.len(), p[100], p[200]), (201, 6000.0, 12000.0));
        let g = GridSpec::parse_r("0.01:100:5:log").unwrap().points().unwrap();
        assert!((g[2] - 1.0).abs() < 1e-15 && g[4] == 100.0);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in ["0:1:0", "1:0:5", "a:1:2", "0:1", "0:1:3:log"] {
            assert!(GridSpec::parse_r(bad).is_err(), "{bad}");
        }
        assert!(GridSpec::parse_tau("0:1:3:lin").is_err());
    }
}
