//! Grid field files.
//!
//! Binary layout: an ASCII header of `key value...` lines terminated by
//! `end_header\n`, followed by the samples as little-endian `f64` in row-major
//! order. The CSV variant carries the same header as `#` comment lines and one
//! `coordinates..., value` row per node.

use std::fmt::Write as _;
use std::path::Path;

use super::{ExteriorModel, GridField, GridSpec, SupportBall};
use crate::error::{Error, Result};
use crate::real::Real;

const MAGIC: &str = "fracg-field 1";

fn fmt_list<T: Real>(v: &[T]) -> String {
    v.iter()
        .map(|x| format!("{:e}", x.to_f64_lossy()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn header<T: Real>(field: &GridField<T>) -> String {
    let spec = field.spec();
    let mut h = String::new();
    let _ = writeln!(h, "{MAGIC}");
    let _ = writeln!(h, "dim {}", spec.dim());
    let _ = writeln!(h, "origin {}", fmt_list(&spec.origin));
    let _ = writeln!(h, "spacing {:e}", spec.spacing.to_f64_lossy());
    let _ = writeln!(
        h,
        "extents {}",
        spec.extents.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
    );
    match field.exterior() {
        ExteriorModel::Zero => {
            let _ = writeln!(h, "exterior zero");
        }
        ExteriorModel::PowerDecay { c, beta } => {
            let _ = writeln!(
                h,
                "exterior power_decay {:e} {:e}",
                c.to_f64_lossy(),
                beta.to_f64_lossy()
            );
        }
    }
    match field.support() {
        None => {
            let _ = writeln!(h, "support none");
        }
        Some(b) => {
            let _ = writeln!(
                h,
                "support {} {:e} {:e}",
                fmt_list(&b.center),
                b.radius.to_f64_lossy(),
                b.exponent.to_f64_lossy()
            );
        }
    }
    h
}

#[derive(Default)]
struct Header {
    dim: Option<usize>,
    origin: Option<Vec<f64>>,
    spacing: Option<f64>,
    extents: Option<Vec<usize>>,
    exterior: Option<ExteriorModel<f64>>,
    support: Option<Option<(Vec<f64>, f64, f64)>>,
}

fn parse_floats(words: &[&str], line: usize) -> Result<Vec<f64>> {
    words
        .iter()
        .map(|w| {
            w.parse::<f64>()
                .map_err(|_| Error::Format(format!("line {line}: bad number `{w}`")))
        })
        .collect()
}

fn parse_header<'a>(lines: impl Iterator<Item = (usize, &'a str)>) -> Result<Header> {
    let mut h = Header::default();
    let mut saw_magic = false;
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == MAGIC {
            saw_magic = true;
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let rest = &words[1..];
        match words[0] {
            "dim" => {
                h.dim = Some(rest.first().and_then(|w| w.parse().ok()).ok_or_else(|| {
                    Error::Format(format!("line {no}: dim needs an integer"))
                })?)
            }
            "origin" => h.origin = Some(parse_floats(rest, no)?),
            "spacing" => {
                h.spacing = Some(
                    *parse_floats(rest, no)?
                        .first()
                        .ok_or_else(|| Error::Format(format!("line {no}: spacing needs a value")))?,
                )
            }
            "extents" => {
                h.extents = Some(
                    rest.iter()
                        .map(|w| {
                            w.parse::<usize>().map_err(|_| {
                                Error::Format(format!("line {no}: bad extent `{w}`"))
                            })
                        })
                        .collect::<Result<_>>()?,
                )
            }
            "exterior" => {
                h.exterior = Some(match rest {
                    ["zero"] => ExteriorModel::Zero,
                    ["power_decay", c, b] => {
                        let v = parse_floats(&[c, b], no)?;
                        ExteriorModel::PowerDecay { c: v[0], beta: v[1] }
                    }
                    _ => return Err(Error::Format(format!("line {no}: unknown exterior model"))),
                })
            }
            "support" => {
                h.support = Some(match rest {
                    ["none"] => None,
                    _ if rest.len() >= 3 => {
                        let v = parse_floats(rest, no)?;
                        let k = v.len();
                        Some((v[..k - 2].to_vec(), v[k - 2], v[k - 1]))
                    }
                    _ => return Err(Error::Format(format!("line {no}: malformed support"))),
                })
            }
            other => return Err(Error::Format(format!("line {no}: unknown header key `{other}`"))),
        }
    }
    if !saw_magic {
        return Err(Error::Format("missing `fracg-field 1` signature".into()));
    }
    Ok(h)
}

fn build<T: Real>(h: Header, samples: Vec<f64>) -> Result<GridField<T>> {
    let missing = |k: &str| Error::Format(format!("header is missing `{k}`"));
    let dim = h.dim.ok_or_else(|| missing("dim"))?;
    let origin = h.origin.ok_or_else(|| missing("origin"))?;
    let extents = h.extents.ok_or_else(|| missing("extents"))?;
    if origin.len() != dim || extents.len() != dim {
        return Err(Error::Format("origin/extents do not match dim".into()));
    }
    let spec = GridSpec::new(
        origin.into_iter().map(T::lit).collect(),
        T::lit(h.spacing.ok_or_else(|| missing("spacing"))?),
        extents,
    )?;
    let exterior = match h.exterior.unwrap_or(ExteriorModel::Zero) {
        ExteriorModel::Zero => ExteriorModel::Zero,
        ExteriorModel::PowerDecay { c, beta } => ExteriorModel::PowerDecay {
            c: T::lit(c),
            beta: T::lit(beta),
        },
    };
    let support = match h.support.flatten() {
        None => None,
        Some((c, r, a)) => Some(SupportBall::new(
            c.into_iter().map(T::lit).collect(),
            T::lit(r),
            T::lit(a),
        )?),
    };
    GridField::new(spec, samples.into_iter().map(T::lit).collect(), exterior, support)
}

pub fn to_bytes<T: Real>(field: &GridField<T>) -> Vec<u8> {
    let mut out = header(field).into_bytes();
    out.extend_from_slice(b"end_header\n");
    for v in field.samples() {
        out.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    out
}

pub fn from_bytes<T: Real>(bytes: &[u8]) -> Result<GridField<T>> {
    const END: &[u8] = b"end_header\n";
    let pos = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| Error::Format("missing end_header".into()))?;
    let text = std::str::from_utf8(&bytes[..pos])
        .map_err(|_| Error::Format("header is not ASCII".into()))?;
    let h = parse_header(text.lines().enumerate().map(|(i, l)| (i + 1, l)))?;
    let body = &bytes[pos + END.len()..];
    if !body.len().is_multiple_of(8) {
        return Err(Error::Format("sample block length is not a multiple of 8".into()));
    }
    let samples = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    build(h, samples)
}

pub fn to_csv<T: Real>(field: &GridField<T>) -> String {
    let mut out = String::new();
    for line in header(field).lines() {
        let _ = writeln!(out, "# {line}");
    }
    let spec = field.spec();
    let names: Vec<String> = (0..spec.dim()).map(|k| format!("x{k}")).collect();
    let _ = writeln!(out, "{},value", names.join(","));
    for (i, v) in field.samples().iter().enumerate() {
        let x = spec.node(i);
        let coords: Vec<String> = x.iter().map(|c| format!("{:e}", c.to_f64_lossy())).collect();
        let _ = writeln!(out, "{},{:e}", coords.join(","), v.to_f64_lossy());
    }
    out
}

/// Reads the CSV variant; the value is the last column of each data row.
pub fn from_csv<T: Real>(text: &str) -> Result<GridField<T>> {
    let mut header_lines = Vec::new();
    let mut samples = Vec::new();
    let mut saw_columns = false;
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            header_lines.push((no, rest.trim()));
            continue;
        }
        if t.is_empty() {
            continue;
        }
        if !saw_columns {
            saw_columns = true;
            if t.starts_with('x') {
                continue;
            }
        }
        let last = t
            .rsplit(',')
            .next()
            .ok_or_else(|| Error::Format(format!("line {no}: empty row")))?;
        samples.push(
            last.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("line {no}: bad value `{last}`")))?,
        );
    }
    let h = parse_header(header_lines.into_iter())?;
    build(h, samples)
}

/// Writes `.csv` paths as CSV and everything else in the binary layout.
pub fn save<T: Real>(field: &GridField<T>, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        std::fs::write(path, to_csv(field))?;
    } else {
        std::fs::write(path, to_bytes(field))?;
    }
    Ok(())
}

pub fn load<T: Real>(path: &Path) -> Result<GridField<T>> {
    if path.extension().is_some_and(|e| e == "csv") {
        from_csv(&std::fs::read_to_string(path)?)
    } else {
        from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> GridField<f64> {
        let spec = GridSpec::centered(&[0.0, 0.0], 1.0, 6).unwrap();
        let samples = (0..spec.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        GridField::new(
            spec,
            samples,
            ExteriorModel::PowerDecay { c: 0.5, beta: 1.25 },
            None,
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let f = sample_field();
        let back: GridField<f64> = from_bytes(&to_bytes(&f)).unwrap();
        assert_eq!(back.samples(), f.samples());
        assert_eq!(back.spec(), f.spec());
        assert_eq!(back.exterior(), f.exterior());
    }

    #[test]
    fn csv_round_trip() {
        let f = sample_field();
        let back: GridField<f64> = from_csv(&to_csv(&f)).unwrap();
        for (a, b) in back.samples().iter().zip(f.samples()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn support_survives_round_trip() {
        let spec = GridSpec::centered(&[0.0], 1.25, 20).unwrap();
        let ball = SupportBall::new(vec![0.0], 1.0, 0.5).unwrap();
        let samples = (0..spec.len()).map(|i| ball.weight(&spec.node(i))).collect();
        let f = GridField::new(spec, samples, ExteriorModel::Zero, Some(ball.clone())).unwrap();
        let back: GridField<f64> = from_bytes(&to_bytes(&f)).unwrap();
        assert_eq!(back.support(), Some(&ball));
    }

    #[test]
    fn corrupt_input_is_rejected() {
        assert!(from_bytes::<f64>(b"garbage").is_err());
        let mut bytes = to_bytes(&sample_field());
        bytes.pop();
        assert!(from_bytes::<f64>(&bytes).is_err());
    }
}
