//! CSV output of sample batches.

use std::io::Write;

use super::SampleBatch;
use crate::error::{Error, Result};

/// Formats `x` with `digits` significant digits, like C's `%.{digits}g`.
pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1, "need at least one significant digit");
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -4 || exponent >= digits as i32 {
        format!("{}e{exponent}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes a batch as CSV with header `d`, `delta` or `d,delta`.
///
/// Reals carry 10 significant digits; lines end in LF.
pub fn write_csv<W: Write>(batch: &SampleBatch, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::domain(format!("write failed: {e}"));
    match (&batch.d_values, &batch.delta_values) {
        (Some(d), Some(x)) => {
            if d.len() != x.len() {
                return Err(Error::domain("D and Δ samples differ in length"));
            }
            writeln!(out, "d,delta").map_err(io)?;
            for (d, x) in d.iter().zip(x) {
                writeln!(out, "{d},{}", format_significant(*x, 10)).map_err(io)?;
            }
        }
        (Some(d), None) => {
            writeln!(out, "d").map_err(io)?;
            for d in d {
                writeln!(out, "{d}").map_err(io)?;
            }
        }
        (None, Some(x)) => {
            writeln!(out, "delta").map_err(io)?;
            for x in x {
                writeln!(out, "{}", format_significant(*x, 10)).map_err(io)?;
            }
        }
        (None, None) => return Err(Error::domain("batch holds no samples")),
    }
    out.flush().map_err(io)
}
