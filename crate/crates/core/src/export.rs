//! CSV and JSON output. Floats are written with 9 significant digits so that
//! reruns produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::rsa::CoupledRun;

/// `x` in scientific notation with 9 significant digits when it is very large
/// or very small, plain decimal otherwise.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" { "0".into() } else { s }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// CSV with a header row and already formatted cells.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Columns `step, Z, U, L, area_S, r_tilde, alpha`, one row per step up to
/// the last absorption among the three processes. Cells past a process's
/// absorption repeat `N`; undefined areas and radii are left empty.
pub fn coupled_trace_csv(run: &CoupledRun) -> Result<Vec<u8>> {
    let steps = run.l.hitting_time().max(run.z.hitting_time()).max(run.u.hitting_time());
    let rows = (0..=steps).map(|n| {
        let area = if n >= 1 { run.step_areas.get(n - 1).copied() } else { None };
        let r = if n >= 1 { run.r_tilde.get(n - 1).copied().flatten() } else { None };
        let alpha = if n >= 1 { run.alpha.get(n - 1).copied() } else { None };
        vec![
            n.to_string(),
            run.z.at(n).to_string(),
            run.u.at(n).to_string(),
            run.l.at(n).to_string(),
            fmt_opt(area),
            fmt_opt(r),
            fmt_opt(alpha),
        ]
    });
    csv_bytes(&["step", "Z", "U", "L", "area_S", "r_tilde", "alpha"], rows)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}
