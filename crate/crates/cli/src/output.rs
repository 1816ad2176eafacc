use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;

/// A finished output file, held in memory until every computation succeeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// `x` to nine significant digits, `%g` style, locale independent.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Label for a file name: `4`, `0.5`, `1e-03`.
pub fn fmt_label(x: f64) -> String {
    fmt_num(x).replace('+', "")
}

pub struct Table {
    lines: Vec<String>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            lines: vec![header.join(",")],
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.lines.push(cells.join(","));
    }

    pub fn into_artifact(self, name: impl Into<String>) -> Artifact {
        let mut contents = self.lines.join("\n");
        contents.push('\n');
        Artifact {
            name: name.into(),
            contents,
        }
    }
}

#[derive(Serialize)]
struct Header<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: Header<'a>,
    result: T,
}

pub fn json_artifact<T: Serialize>(
    name: &str,
    command: &str,
    cfg: &RunConfig,
    result: T,
) -> CliResult<Artifact> {
    let doc = Document {
        header: Header {
            tool: "nongauss",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed,
            config: cfg,
        },
        result,
    };
    let mut contents = serde_json::to_string_pretty(&doc)?;
    contents.push('\n');
    Ok(Artifact {
        name: name.into(),
        contents,
    })
}

/// Writes every artifact through a temporary file and a rename.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        let target = dir.join(&a.name);
        let tmp = dir.join(format!(".{}.tmp", a.name));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(a.contents.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &target)?;
    }
    Ok(())
}
