//! CSV emission for sweep results.

use std::fs;
use std::path::Path;

use crate::sweep::SweepResult;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "sweep_var,model,p_success,p_collision,se,mc_mean,mc_stderr";

/// Formats `x` with 12 significant digits, `%.12g` style: fixed notation for
/// decimal exponents in `[-5, 12)`, scientific otherwise, trailing zeros
/// trimmed.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header plus one LF-terminated line per row.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * (result.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let fields = [
            format_sig12(r.sweep_var),
            r.model.to_string(),
            format_sig12(r.p_success),
            format_sig12(r.p_collision),
            format_sig12(r.se),
            format_sig12(r.mc_mean),
            format_sig12(r.mc_stderr),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, to_csv(result)).map_err(|e| Error::io(path, e))
}
