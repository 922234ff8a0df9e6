use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::CliError;

/// Environment variable overriding the cache location.
pub const CACHE_ENV: &str = "PRIMEWEB_CACHE";

/// Settings of one run: a flat `key = value` file, then flags on top.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hard_limit: u64,
    pub quadrature_tol: f64,
    pub angle_tol: f64,
    /// Largest collinearity defect accepted for a triplet root.
    pub root_tol: f64,
    /// 0 lets the thread pool decide.
    pub threads: usize,
    pub output_dir: PathBuf,
    pub cache_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hard_limit: 1 << 46,
            quadrature_tol: primeweb::laws::LAW_QUADRATURE_TOL,
            angle_tol: primeweb::web::EXACT_ANGLE_TOL,
            root_tol: 1e-9,
            threads: 0,
            output_dir: PathBuf::from("out"),
            cache_path: None,
        }
    }
}

const KEYS: [&str; 7] = ["hard_limit", "quadrature_tol", "angle_tol", "root_tol", "threads", "output_dir", "cache_path"];

fn number<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Config { line, message: format!("{key}: cannot read {value:?}") })
}

impl RunConfig {
    /// Applies one setting; `line` is used for error messages only.
    pub fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "hard_limit" => self.hard_limit = number(line, key, value)?,
            "quadrature_tol" => self.quadrature_tol = number(line, key, value)?,
            "angle_tol" => self.angle_tol = number(line, key, value)?,
            "root_tol" => self.root_tol = number(line, key, value)?,
            "threads" => self.threads = number(line, key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "cache_path" => self.cache_path = (!value.is_empty()).then(|| PathBuf::from(value)),
            _ => return Err(CliError::Config { line, message: format!("unknown key {key:?}") }),
        }
        Ok(())
    }

    /// Overrides the cache path from [`CACHE_ENV`] when it is set.
    pub fn apply_env(&mut self) {
        if let Some(p) = std::env::var_os(CACHE_ENV).filter(|p| !p.is_empty()) {
            self.cache_path = Some(PathBuf::from(p));
        }
    }
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config { line: n + 1, message: format!("expected key = value, got {line:?}") })?;
            cfg.set(n + 1, key.trim(), value.trim())?;
        }
        Ok(cfg)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let values = [
            self.hard_limit.to_string(),
            format!("{:?}", self.quadrature_tol),
            format!("{:?}", self.angle_tol),
            format!("{:?}", self.root_tol),
            self.threads.to_string(),
            self.output_dir.display().to_string(),
            self.cache_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
        ];
        for (k, v) in KEYS.iter().zip(values) {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trip() {
        let cfg = RunConfig {
            hard_limit: 1 << 40,
            quadrature_tol: 1e-10,
            angle_tol: 2.5e-9,
            root_tol: 1e-13,
            threads: 4,
            output_dir: PathBuf::from("/tmp/x y"),
            cache_path: Some(PathBuf::from("c.tsv")),
        };
        let text = cfg.to_string();
        let back: RunConfig = text.parse().unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_string(), text);
        assert_eq!(RunConfig::default().to_string().parse::<RunConfig>().unwrap(), RunConfig::default());
    }

    #[test]
    fn comments_and_errors() {
        let cfg: RunConfig = "# run\nthreads = 2 # two\n\noutput_dir=res\n".parse().unwrap();
        assert_eq!((cfg.threads, cfg.output_dir), (2, PathBuf::from("res")));
        assert!(matches!("threads = many".parse::<RunConfig>(), Err(CliError::Config { line: 1, .. })));
        assert!(matches!("\ncolour = red".parse::<RunConfig>(), Err(CliError::Config { line: 2, .. })));
        assert!("threads 2".parse::<RunConfig>().is_err());
    }
}
