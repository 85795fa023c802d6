//! Frame files and deterministic JSON output.
//!
//! Two frame file formats are read:
//!
//! * JSON: `{"dim": n, "vectors": [[x_11, …, x_1n], …]}`; other keys are
//!   ignored.
//! * CSV: one vector per line, comma separated; blank lines and lines
//!   starting with `#` are skipped; the dimension is the length of the first
//!   row.
//!
//! JSON output writes every float with 17 significant digits in the style
//! of C's `%.17g`, so a value round-trips exactly and identical inputs give
//! identical bytes. Non-finite floats are written as `null`.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{FrameError, Result};
use crate::frame::Frame;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameFormat {
    Json,
    Csv,
}

impl FrameFormat {
    /// Guess from the extension, falling back to the first non-blank byte.
    pub fn detect(path: Option<&Path>, text: &str) -> Self {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => return FrameFormat::Json,
            Some(e) if e.eq_ignore_ascii_case("csv") => return FrameFormat::Csv,
            _ => {}
        }
        if text.trim_start().starts_with('{') {
            FrameFormat::Json
        } else {
            FrameFormat::Csv
        }
    }
}

#[derive(Deserialize)]
struct RawFrame {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

pub fn parse_frame_json<T: Scalar>(text: &str) -> Result<Frame<T>> {
    let raw: RawFrame = serde_json::from_str(text).map_err(|e| FrameError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let vectors = raw
        .vectors
        .into_iter()
        .map(|v| v.into_iter().map(T::lit).collect())
        .collect();
    Frame::new(raw.dim, vectors).map_err(|e| match e {
        FrameError::DimensionMismatch { index, expected, found } => FrameError::Parse {
            line: 0,
            column: 0,
            message: format!("vector {index} has {found} coordinates, expected {expected}"),
        },
        other => other,
    })
}

pub fn parse_frame_csv<T: Scalar>(text: &str) -> Result<Frame<T>> {
    let mut vectors: Vec<Vec<T>> = Vec::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        let mut offset = 0;
        for field in line.split(',') {
            let column = offset + 1 + (field.len() - field.trim_start().len());
            offset += field.len() + 1;
            let value: f64 = field.trim().parse().map_err(|_| FrameError::Parse {
                line: line_no,
                column,
                message: format!("not a number: {:?}", field.trim()),
            })?;
            if !value.is_finite() {
                return Err(FrameError::Parse {
                    line: line_no,
                    column,
                    message: "non-finite value".into(),
                });
            }
            row.push(T::lit(value));
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(FrameError::Parse {
                    line: line_no,
                    column: 1,
                    message: format!("row has {} values, expected {d}", row.len()),
                })
            }
            _ => {}
        }
        vectors.push(row);
    }
    let dim = dim.ok_or(FrameError::Empty("frame file has no vectors"))?;
    Frame::new(dim, vectors)
}

pub fn parse_frame<T: Scalar>(text: &str, format: FrameFormat) -> Result<Frame<T>> {
    match format {
        FrameFormat::Json => parse_frame_json(text),
        FrameFormat::Csv => parse_frame_csv(text),
    }
}

pub fn read_frame<T: Scalar>(path: &Path) -> Result<Frame<T>> {
    let text = std::fs::read_to_string(path)?;
    parse_frame(&text, FrameFormat::detect(Some(path), &text))
}

/// `%.17g` rendering of a finite `f64`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Pretty JSON formatter writing floats with [`format_g17`].
pub struct G17Formatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for G17Formatter<'_> {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for G17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        writer.write_all(format_g17(value as f64).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes `value` with [`G17Formatter`], ending with a newline.
pub fn to_json_string<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter::default());
    value
        .serialize(&mut ser)
        .map_err(|e| FrameError::Internal(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| FrameError::Internal(e.to_string()))
}

/// The frame in the JSON frame file format.
pub fn frame_to_json<T: Scalar + Serialize>(frame: &Frame<T>) -> Result<String> {
    to_json_string(frame)
}

/// The frame in the CSV frame file format.
pub fn frame_to_csv<T: Scalar>(frame: &Frame<T>) -> String {
    let mut out = String::new();
    for v in frame.vectors() {
        let row: Vec<String> = v.iter().map(|x| format_g17(x.to_f64_lossy())).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(-2.5), "-2.5");
        assert_eq!(format_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_g17(1e17), "1e+17");
        assert_eq!(format_g17(123456.0), "123456");
        assert_eq!(format_g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_g17(0.0001), "0.0001");
        assert_eq!(format_g17(2f64.sqrt()), "1.4142135623730951");
    }

    #[test]
    fn g17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 6.02e23, -1.5e-300, 1e16, 123.456, f64::MAX, 5e-324] {
            let back: f64 = format_g17(x).parse().unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn json_frame_round_trip() {
        let f = Frame::new(2, vec![vec![0.1f64, 1.0 / 3.0], vec![-2.0, 1e-7]]).unwrap();
        let text = frame_to_json(&f).unwrap();
        let g: Frame<f64> = parse_frame_json(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(text, frame_to_json(&g).unwrap());
    }

    #[test]
    fn csv_frame_round_trip() {
        let f = Frame::new(3, vec![vec![0.1f64, 0.2, 0.3], vec![1.0, -1.0, 0.5]]).unwrap();
        let g: Frame<f64> = parse_frame_csv(&frame_to_csv(&f)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn csv_errors_carry_positions() {
        let err = parse_frame_csv::<f64>("1,0\n0, x\n").unwrap_err();
        match err {
            FrameError::Parse { line, column, .. } => assert_eq!((line, column), (2, 4)),
            e => panic!("{e:?}"),
        }
        let err = parse_frame_csv::<f64>("# c\n1,0\n\n1,0,0\n").unwrap_err();
        assert!(matches!(err, FrameError::Parse { line: 4, .. }));
        assert!(parse_frame_csv::<f64>("\n# only comments\n").is_err());
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let err = parse_frame_json::<f64>("{\"dim\": 2, \"vectors\": [[1, 0],\n [0 1]]}").unwrap_err();
        match err {
            FrameError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_frame_json::<f64>("{\"dim\": 2, \"vectors\": [[1]]}"),
            Err(FrameError::Parse { .. })
        ));
    }

    #[test]
    fn non_finite_values_become_null() {
        let s = to_json_string(&vec![1.0f64, f64::INFINITY, f64::NAN]).unwrap();
        assert_eq!(s.split_whitespace().collect::<String>(), "[1,null,null]");
    }

    #[test]
    fn format_detection() {
        assert_eq!(FrameFormat::detect(Some(Path::new("a.csv")), "{"), FrameFormat::Csv);
        assert_eq!(FrameFormat::detect(None, "  {\"dim\":1}"), FrameFormat::Json);
        assert_eq!(FrameFormat::detect(Some(Path::new("a.txt")), "1,2"), FrameFormat::Csv);
    }
}
