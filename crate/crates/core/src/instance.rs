//! Line-oriented instance files.
//!
//! ```text
//! difftd-instance 1
//! kind dense
//! n 2
//! d_mu
//! 5.0000000000000000e-1 5.0000000000000000e-1
//! p_pi
//! 0.0000000000000000e0 1.0000000000000000e0
//! 1.0000000000000000e0 0.0000000000000000e0
//! ```
//!
//! or `kind family` followed by `family example1` and `m 23`. Blank lines and
//! lines starting with `#` are ignored. Floats are written with 17
//! significant digits, so `load(save(x)) == x` bitwise.

use std::fmt::Write as _;
use std::path::Path;

use crate::counterexample::build_family;
use crate::error::{Error, Result};
use crate::polyalg::RealMatrix;
use crate::stability::StabilityInstance;

const MAGIC: &str = "difftd-instance 1";

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceFile {
    Dense { d_mu: Vec<f64>, p_pi: RealMatrix },
    Family { m: usize },
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &StabilityInstance) -> Self {
        InstanceFile::Dense {
            d_mu: inst.d_mu().to_vec(),
            p_pi: inst.p_pi().clone(),
        }
    }

    /// Validates and materializes the instance.
    pub fn instance(&self) -> Result<StabilityInstance> {
        match self {
            InstanceFile::Dense { d_mu, p_pi } => StabilityInstance::new(d_mu.clone(), p_pi.clone()),
            InstanceFile::Family { m } => build_family(*m)?.instance(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, xs: &[f64]| {
            let cells: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        };
        out.push_str(MAGIC);
        out.push('\n');
        match self {
            InstanceFile::Dense { d_mu, p_pi } => {
                let _ = writeln!(out, "kind dense\nn {}\nd_mu", d_mu.len());
                row(&mut out, d_mu);
                out.push_str("p_pi\n");
                for r in p_pi.rows() {
                    row(&mut out, r);
                }
            }
            InstanceFile::Family { m } => {
                let _ = writeln!(out, "kind family\nfamily example1\nm {m}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| perr(0, format!("unexpected end of file, expected {what}")))
        };
        let (no, magic) = next("header")?;
        if magic != MAGIC {
            return Err(perr(no, format!("expected `{MAGIC}`, found `{magic}`")));
        }
        let (no, kind) = next("kind")?;
        match kind {
            "kind dense" => {
                let n: usize = keyed(next("n")?, "n")?;
                if n == 0 {
                    return Err(perr(no, "n must be positive".into()));
                }
                expect(next("d_mu")?, "d_mu")?;
                let d_mu = floats(next("d_mu values")?, n)?;
                expect(next("p_pi")?, "p_pi")?;
                let mut data = Vec::with_capacity(n * n);
                for _ in 0..n {
                    data.extend(floats(next("p_pi row")?, n)?);
                }
                if let Some((no, l)) = lines.next() {
                    return Err(perr(no, format!("trailing content `{l}`")));
                }
                Ok(InstanceFile::Dense {
                    d_mu,
                    p_pi: RealMatrix::from_row_major(n, data)?,
                })
            }
            "kind family" => {
                let (no, fam) = next("family")?;
                if fam != "family example1" {
                    return Err(perr(no, format!("unknown family `{fam}`")));
                }
                let m: usize = keyed(next("m")?, "m")?;
                if let Some((no, l)) = lines.next() {
                    return Err(perr(no, format!("trailing content `{l}`")));
                }
                Ok(InstanceFile::Family { m })
            }
            other => Err(perr(no, format!("unknown `{other}`"))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn perr(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn expect((no, line): (usize, &str), word: &str) -> Result<()> {
    if line == word {
        Ok(())
    } else {
        Err(perr(no, format!("expected `{word}`, found `{line}`")))
    }
}

fn keyed<T: std::str::FromStr>((no, line): (usize, &str), key: &str) -> Result<T> {
    let mut it = line.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(k), Some(v), None) if k == key => v
            .parse()
            .map_err(|_| perr(no, format!("bad value `{v}` for {key}"))),
        _ => Err(perr(no, format!("expected `{key} <value>`, found `{line}`"))),
    }
}

fn floats((no, line): (usize, &str), n: usize) -> Result<Vec<f64>> {
    let xs = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| perr(no, format!("`{t}` is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if xs.len() != n {
        return Err(perr(no, format!("expected {n} numbers, found {}", xs.len())));
    }
    Ok(xs)
}
