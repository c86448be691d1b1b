//! Version-1 Touchstone `.s3p` files, real/imaginary format.
//!
//! Each frequency occupies three lines, one matrix row per line, with the
//! frequency (GHz) leading the first.

use std::fmt::Write as _;

use stmcirc_core::netcore::{Complex, CyclicThreePort};

pub type Matrix3 = [[Complex; 3]; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct S3p {
    /// Hz
    pub freqs: Vec<f64>,
    pub data: Vec<Matrix3>,
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TouchstoneError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing option line")]
    MissingOptions,
    #[error("data does not fill whole 3x3 records ({0} values)")]
    Truncated(usize),
}

fn num(x: f64) -> String {
    format!("{x:.8e}")
}

impl S3p {
    pub fn from_cyclic(freqs: &[f64], s: &[CyclicThreePort], z0: f64) -> Self {
        Self {
            freqs: freqs.to_vec(),
            data: s.iter().map(|m| m.expand()).collect(),
            z0,
        }
    }

    pub fn render(&self, comments: &[&str]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "! {c}");
        }
        let _ = writeln!(out, "# GHz S RI R {}", self.z0);
        for (f, m) in self.freqs.iter().zip(&self.data) {
            for (i, row) in m.iter().enumerate() {
                let lead = if i == 0 { num(f / 1e9) } else { " ".repeat(num(f / 1e9).len()) };
                let cells: Vec<String> = row.iter().map(|z| format!("{} {}", num(z.re), num(z.im))).collect();
                let _ = writeln!(out, "{lead} {}", cells.join(" "));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TouchstoneError> {
        let mut scale = None;
        let mut z0 = 50.0;
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('!').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(opts) = content.strip_prefix('#') {
                let toks: Vec<String> = opts.split_whitespace().map(|t| t.to_ascii_uppercase()).collect();
                let mut it = toks.iter();
                let mut unit = 1e9;
                while let Some(t) = it.next() {
                    match t.as_str() {
                        "HZ" => unit = 1.0,
                        "KHZ" => unit = 1e3,
                        "MHZ" => unit = 1e6,
                        "GHZ" => unit = 1e9,
                        "S" | "RI" => {}
                        "R" => {
                            z0 = it.next().and_then(|v| v.parse().ok()).ok_or(TouchstoneError::Syntax {
                                line,
                                message: "bad reference impedance".into(),
                            })?
                        }
                        other => {
                            return Err(TouchstoneError::Syntax {
                                line,
                                message: format!("unsupported option '{other}'"),
                            })
                        }
                    }
                }
                scale = Some(unit);
                continue;
            }
            for tok in content.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| TouchstoneError::Syntax {
                    line,
                    message: format!("'{tok}' is not a number"),
                })?);
            }
        }
        let scale = scale.ok_or(TouchstoneError::MissingOptions)?;
        const RECORD: usize = 1 + 18;
        if values.len() % RECORD != 0 {
            return Err(TouchstoneError::Truncated(values.len()));
        }
        let mut freqs = Vec::new();
        let mut data = Vec::new();
        for rec in values.chunks(RECORD) {
            freqs.push(rec[0] * scale);
            let mut m = [[Complex::new(0.0, 0.0); 3]; 3];
            for (k, pair) in rec[1..].chunks(2).enumerate() {
                m[k / 3][k % 3] = Complex::new(pair[0], pair[1]);
            }
            data.push(m);
        }
        Ok(Self { freqs, data, z0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = [
            CyclicThreePort::scattering(
                Complex::new(0.1, -0.2),
                Complex::new(0.912345678901, 0.0),
                Complex::new(-1e-5, 3.3e-7),
                0.02,
            ),
            CyclicThreePort::scattering(
                Complex::new(0.0, 0.0),
                Complex::new(0.5, 0.5),
                Complex::new(1e-300, -0.25),
                0.02,
            ),
        ];
        let file = S3p::from_cyclic(&[0.95e9, 1.0000000001e9], &s, 50.0);
        let text = file.render(&["test"]);
        assert!(text.contains("# GHz S RI R 50"));
        assert_eq!(text.lines().count(), 2 + 6);
        let back = S3p::parse(&text).unwrap();
        assert_eq!(back.z0, 50.0);
        for (a, b) in file.freqs.iter().zip(&back.freqs) {
            assert!((a - b).abs() / a < 1e-8);
        }
        for (ma, mb) in file.data.iter().zip(&back.data) {
            for i in 0..3 {
                for j in 0..3 {
                    let (a, b) = (ma[i][j], mb[i][j]);
                    assert!((a.re - b.re).abs() <= 5e-9 * a.re.abs() + 1e-300);
                    assert!((a.im - b.im).abs() <= 5e-9 * a.im.abs() + 1e-300);
                }
            }
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(S3p::parse("1 2 3\n"), Err(TouchstoneError::MissingOptions)));
        assert!(matches!(S3p::parse("# GHz S RI R 50\n1 2 3\n"), Err(TouchstoneError::Truncated(3))));
        assert!(S3p::parse("# GHz S MA R 50\n").is_err());
    }
}
