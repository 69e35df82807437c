use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

/// Flag set rendered as a single line, used as the `#` header of every CSV.
pub fn flag_line(command: &str, parameters: &Map<String, Value>) -> String {
    let mut line = format!("pantograph {command}");
    for (key, value) in parameters {
        let rendered = match value {
            Value::Null => continue,
            Value::Array(items) => items
                .iter()
                .map(render_scalar)
                .collect::<Vec<_>>()
                .join(","),
            other => render_scalar(other),
        };
        line.push_str(&format!(" --{}={}", key.replace('_', "-"), rendered));
    }
    line
}

fn render_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        // shortest representation that round-trips
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:?}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

pub fn parameters<A: Serialize>(args: &A) -> Map<String, Value> {
    match serde_json::to_value(args).expect("arguments serialize") {
        Value::Object(map) => map,
        _ => Map::new(),
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub tool_version: String,
    pub started_at: String,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saturated: Option<bool>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Map<String, Value>) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            outputs: Vec::new(),
            saturated: None,
        }
    }

    /// Writes `<first output>.manifest.json`; does nothing when no file was
    /// written.
    pub fn write(&self) -> io::Result<()> {
        let Some(first) = self.outputs.first() else {
            return Ok(());
        };
        let mut path = first.clone().into_os_string();
        path.push(".manifest.json");
        let mut w = BufWriter::new(File::create(PathBuf::from(path))?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()
    }
}

/// Runs `body` against the named file, or stdout when there is none.
pub fn with_output<F>(path: Option<&Path>, body: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            quiet_pipe(body(&mut w).and_then(|()| w.flush()))
        }
    }
}

/// A closed stdout (e.g. piped into `head`) is not an error.
fn quiet_pipe(r: io::Result<()>) -> io::Result<()> {
    match r {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

pub fn print_json<T: Serialize>(value: &T) -> io::Result<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    quiet_pipe(
        serde_json::to_writer(&mut w, value)
            .map_err(io::Error::from)
            .and_then(|()| writeln!(w)),
    )
}
