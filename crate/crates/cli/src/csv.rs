//! CSV files with a commented metadata header:
//!
//! ```text
//! # difftd 0.1.0
//! # config: {"command":"eta-star",...}
//! omega,eta,residual
//! ...
//! ```

use difftd::instance::fmt_f64;

use crate::config::RunConfig;
use crate::error::CliError;

const CONFIG_PREFIX: &str = "# config: ";

pub struct Table {
    text: String,
}

impl Table {
    pub fn new(config: &RunConfig, extra: &[(&str, String)], columns: &[&str]) -> Self {
        let json = serde_json::to_string(config).expect("config serializes");
        let mut text = format!("# difftd {}\n{CONFIG_PREFIX}{json}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in extra {
            text.push_str(&format!("# {k}: {v}\n"));
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let cells: Vec<String> = cells.iter().map(Cell::render).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Cell::F(x) => fmt_f64(x),
            Cell::U(x) => x.to_string(),
            Cell::B(b) => u8::from(b).to_string(),
        }
    }
}

/// Recovers the run configuration from a file written by [`Table`].
pub fn read_config(text: &str) -> Result<RunConfig, CliError> {
    let line = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
        .ok_or_else(|| CliError::Usage("no `# config:` line in header".into()))?;
    serde_json::from_str(line).map_err(|e| CliError::Usage(format!("bad config header: {e}")))
}
