//! Output formatting. Every float is printed with 17 significant digits so
//! runs are reproducible byte for byte; lines end with LF.

use gibbsim_core::order::OrderCodec;
use gibbsim_core::space::{Configuration, Point};

/// 17 significant digits, locale-free; valid inside JSON and CSV alike.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}


/// `[[x_1, .., x_d, r], ...]` with points in key order for canonical bytes.
pub fn json_points(cfg: &Configuration, codec: &OrderCodec) -> String {
    let mut pts: Vec<&Point> = cfg.iter().collect();
    pts.sort_by_key(|p| codec.encode(p).map(|k| k.0).unwrap_or(u128::MAX));
    let rows: Vec<String> = pts
        .iter()
        .map(|p| {
            let mut fields: Vec<String> = p.pos().iter().map(|&c| fmt_f64(c)).collect();
            fields.push(fmt_f64(p.radius()));
            format!("[{}]", fields.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

/// Escape a string for a JSON value.
pub fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Build one JSON object line from already-rendered (key, value) pairs.
pub fn json_object(fields: &[(&str, String)]) -> String {
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("{}:{}", json_str(k), v))
        .collect();
    format!("{{{}}}", body.join(","))
}
