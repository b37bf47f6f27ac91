//! Number formatting and file emission.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::Value;

use crate::CliError;

/// Rounds to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Shortest form of `x` rounded to 9 significant digits; exponent notation
/// outside [1e-4, 1e15).
pub fn fmt9(x: f64) -> String {
    let y = round9(x);
    if y == 0.0 || (1e-4..1e15).contains(&y.abs()) {
        y.to_string()
    } else {
        format!("{y:e}")
    }
}

/// Rounds every float in a JSON tree to 9 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round9(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn to_rounded_json<T: serde::Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable");
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("valid json");
    s.push('\n');
    s
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `content` to `output` (plus a metadata sidecar) or to stdout.
pub fn emit(output: Option<&Path>, content: &str, mut meta: Value) -> Result<(), CliError> {
    let Some(path) = output else {
        std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))?;
        return Ok(());
    };
    let io_err =
        |p: &Path, e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", p.display()));
    std::fs::write(path, content).map_err(|e| io_err(path, e))?;

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    if let Value::Object(map) = &mut meta {
        map.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        map.insert("threads".into(), rayon::current_num_threads().into());
        map.insert("created_unix".into(), created.into());
        map.insert("data_file".into(), path.display().to_string().into());
    }
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).expect("valid json") + "\n";
    std::fs::write(&side, text).map_err(|e| io_err(&side, e))?;
    log::info!("wrote {} and {}", path.display(), side.display());
    Ok(())
}
