//! CSV tables for gain evaluations and sweeps.

use std::fmt::Write as _;

use crate::experiments::SweepResult;
use crate::simulator::GainResult;

pub const RESULT_COLUMNS: [&str; 7] = [
    "gain_db",
    "std_error_db",
    "gamma_irs",
    "los_amp",
    "irs_sum_amp",
    "wall_mean_amp",
    "mean_wall_power_mw",
];

/// Renders `v` with 6 significant digits in the style of C's `%.6g`.
pub fn fmt_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn push_result(line: &mut String, r: &GainResult) {
    let fields = [
        r.gain_db,
        r.std_error_db,
        r.gamma_irs,
        r.los_amplitude,
        r.irs_sum_amplitude,
        r.mean_wall_reflection_amplitude,
        r.mean_wall_power_mw,
    ];
    for (i, v) in fields.iter().enumerate() {
        if i > 0 || !line.is_empty() {
            line.push(',');
        }
        line.push_str(&fmt_sig6(*v));
    }
}

/// Header plus one row for a single evaluation.
pub fn gain_csv(r: &GainResult) -> String {
    let mut out = RESULT_COLUMNS.join(",");
    out.push('\n');
    let mut line = String::new();
    push_result(&mut line, r);
    out.push_str(&line);
    out.push('\n');
    out
}

/// Header plus one row per grid point. The leading columns are named after
/// the swept parameter and the overlay parameter, if any.
pub fn sweep_csv(res: &SweepResult) -> String {
    let spec = &res.metadata.spec;
    let mut out = String::from(spec.param.key());
    if let Some(ov) = &spec.overlay {
        out.push(',');
        out.push_str(ov.param.key());
    }
    for c in RESULT_COLUMNS {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for row in &res.rows {
        let mut line = fmt_sig6(row.value);
        if let Some(o) = row.overlay {
            let _ = write!(line, ",{}", fmt_sig6(o));
        }
        push_result(&mut line, &row.result);
        out.push_str(&line);
        out.push('\n');
    }
    out
}
