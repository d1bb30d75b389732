use serde::{Deserialize, Serialize};

use super::{Frame, SpotRow};
use crate::error::{Error, Result};
use crate::geometry::ScreenSpot;
use crate::pmcore::{Branch, Field, Mirror, Root};

pub const CSV_HEADER: [&str; 10] = [
    "alpha_deg",
    "lambda1_nm",
    "field",
    "branch_root",
    "branch_mirror",
    "lambda_nm",
    "theta_ext_deg",
    "beta_ext_deg",
    "x_mm",
    "y_mm",
];

/// Nine significant digits, shortest of fixed/exponent form, `-0` folded
/// to `0`. Output is byte-stable across platforms and thread counts.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.8e}");
        let (m, e) = s.split_once('e').expect("exponent form");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{e}")
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Flat record mirroring one CSV line.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CsvRecord {
    alpha_deg: f64,
    lambda1_nm: f64,
    field: u8,
    branch_root: Root,
    branch_mirror: Mirror,
    lambda_nm: f64,
    theta_ext_deg: f64,
    beta_ext_deg: f64,
    x_mm: f64,
    y_mm: f64,
}

impl From<&SpotRow> for CsvRecord {
    fn from(r: &SpotRow) -> Self {
        CsvRecord {
            alpha_deg: r.alpha_deg,
            lambda1_nm: r.lambda1_nm,
            field: r.spot.field.number(),
            branch_root: r.spot.branch.root,
            branch_mirror: r.spot.branch.mirror,
            lambda_nm: r.spot.lambda,
            theta_ext_deg: r.spot.theta_ext.to_degrees(),
            beta_ext_deg: r.spot.beta_ext.to_degrees(),
            x_mm: r.spot.x,
            y_mm: r.spot.y,
        }
    }
}

fn root_name(r: Root) -> &'static str {
    match r {
        Root::Plus => "plus",
        Root::Minus => "minus",
    }
}

fn mirror_name(m: Mirror) -> &'static str {
    match m {
        Mirror::Up => "up",
        Mirror::Down => "down",
    }
}

/// CSV of all frames in order.
pub fn spots_csv(frames: &[Frame]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in frames.iter().flat_map(|f| &f.rows) {
        let r = CsvRecord::from(row);
        w.write_record([
            fmt_sig(r.alpha_deg),
            fmt_sig(r.lambda1_nm),
            r.field.to_string(),
            root_name(r.branch_root).into(),
            mirror_name(r.branch_mirror).into(),
            fmt_sig(r.lambda_nm),
            fmt_sig(r.theta_ext_deg),
            fmt_sig(r.beta_ext_deg),
            fmt_sig(r.x_mm),
            fmt_sig(r.y_mm),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Parses CSV written by [`spots_csv`].
pub fn read_spots_csv(text: &str) -> Result<Vec<SpotRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> =
        rdr.headers().map_err(|e| Error::InvalidSpec(format!("spots CSV: {e}")))?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidSpec(format!("spots CSV header {header:?} does not match expected {CSV_HEADER:?}")));
    }
    rdr.deserialize::<CsvRecord>()
        .map(|r| {
            let r = r.map_err(|e| Error::InvalidSpec(format!("spots CSV: {e}")))?;
            let field = Field::from_number(r.field)
                .ok_or_else(|| Error::InvalidSpec(format!("spots CSV: unknown field {}", r.field)))?;
            Ok(SpotRow {
                alpha_deg: r.alpha_deg,
                lambda1_nm: r.lambda1_nm,
                spot: ScreenSpot {
                    x: r.x_mm,
                    y: r.y_mm,
                    lambda: r.lambda_nm,
                    field,
                    branch: Branch { root: r.branch_root, mirror: r.branch_mirror },
                    theta_ext: r.theta_ext_deg.to_radians(),
                    beta_ext: r.beta_ext_deg.to_radians(),
                },
            })
        })
        .collect()
}

/// JSON array of frames with their diagnostic counters.
pub fn spots_json(frames: &[Frame]) -> String {
    #[derive(Serialize)]
    struct JsonFrame<'a> {
        alpha_deg: f64,
        rho_deg: f64,
        diagnostics: &'a super::DiagnosticCounts,
        rows: Vec<CsvRecord>,
    }
    let out: Vec<JsonFrame> = frames
        .iter()
        .map(|f| JsonFrame {
            alpha_deg: f.alpha_deg,
            rho_deg: f.rho_deg,
            diagnostics: &f.diagnostics,
            rows: f.rows.iter().map(CsvRecord::from).collect(),
        })
        .collect();
    serde_json::to_string_pretty(&out).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-22.6801234567), "-22.6801235");
        assert_eq!(fmt_sig(632.8), "632.8");
        assert_eq!(fmt_sig(1.23456789012e-7), "1.23456789e-7");
        assert_eq!(fmt_sig(123456789012.0), "1.23456789e11");
        assert_eq!(fmt_sig(0.000123), "0.000123");
        assert_eq!(fmt_sig(-1e-12), "-1e-12");
    }

    #[test]
    fn csv_round_trip() {
        let row = SpotRow {
            alpha_deg: 34.5,
            lambda1_nm: 632.8,
            spot: ScreenSpot {
                x: 1.5,
                y: -22.25,
                lambda: 632.8,
                field: Field::F1,
                branch: Branch { root: Root::Minus, mirror: Mirror::Down },
                theta_ext: 0.1,
                beta_ext: -0.02,
            },
        };
        let frame = Frame { alpha_deg: 34.5, rho_deg: 0.0, rows: vec![row], diagnostics: Default::default() };
        let text = spots_csv(std::slice::from_ref(&frame));
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        assert!(text.contains(",minus,down,"));
        let back = read_spots_csv(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].spot.branch, row.spot.branch);
        assert!((back[0].spot.y - row.spot.y).abs() < 1e-12);
        assert!((back[0].spot.theta_ext - 0.1).abs() < 1e-9);
        let json: serde_json::Value = serde_json::from_str(&spots_json(&[frame])).unwrap();
        assert_eq!(json[0]["rows"][0]["branch_root"], "minus");
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_spots_csv("a,b\n1,2\n").is_err());
    }
}
