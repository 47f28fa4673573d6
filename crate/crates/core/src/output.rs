//! Number formatting and CSV emission shared by every table the crate writes.
//!
//! All floats go out rounded to 12 significant digits and then printed in
//! their shortest round-trip form, so identical inputs always give identical
//! bytes regardless of locale.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pointer::PointerState;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to 12 significant digits and prints it, e.g. `1.0`, `-0.5`,
/// `1.52299797447e-8`. Negative zero prints as `0.0`.
pub fn fmt_real(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        "0.0".to_string()
    } else {
        format!("{rounded:?}")
    }
}

/// Formats a complex number as `re, im`. Both parts are rounded relative to
/// the larger magnitude, so round-off crumbs such as the `1e-16` imaginary part
/// of `exp(-i pi)` print as `0.0`.
pub fn fmt_complex(z: Complex64) -> String {
    let scale = z.re.abs().max(z.im.abs());
    if scale == 0.0 || !scale.is_finite() {
        return format!("{}, {}", fmt_real(z.re), fmt_real(z.im));
    }
    let unit = 10f64.powi(scale.log10().floor() as i32 - (SIGNIFICANT_DIGITS as i32 - 1));
    let snap = |x: f64| (x / unit).round() * unit;
    format!("{}, {}", fmt_real(snap(z.re)), fmt_real(snap(z.im)))
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("CSV write failed: {e}"))
}

/// Writes a header row and one formatted row per record.
pub fn write_table<W: Write, const N: usize>(
    writer: W,
    header: [&str; N],
    rows: impl IntoIterator<Item = [f64; N]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_real(x)))
            .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParameter(format!("CSV flush failed: {e}")))
}

pub(crate) fn write_pointer_csv<W: Write>(
    writer: W,
    state: &PointerState,
    intensity: Option<&[f64]>,
) -> Result<()> {
    let grid = state.grid();
    if let Some(profile) = intensity {
        if profile.len() != grid.n() {
            return Err(Error::DimensionMismatch {
                expected: grid.n(),
                found: profile.len(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    let header: &[&str] = if intensity.is_some() {
        &["q", "re_amp", "im_amp", "intensity"]
    } else {
        &["q", "re_amp", "im_amp"]
    };
    w.write_record(header).map_err(csv_err)?;
    for (k, a) in state.amplitudes().iter().enumerate() {
        let mut record = vec![fmt_real(grid.q(k)), fmt_real(a.re), fmt_real(a.im)];
        if let Some(profile) = intensity {
            record.push(fmt_real(profile[k]));
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParameter(format!("CSV flush failed: {e}")))
}
