//! Plain-text network format.
//!
//! ```text
//! k_0 k_1 ... k_{H+1}
//! <k_1 lines: rows of W_1>
//! <1 line: B_1>
//! ...
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so `from_text(to_text(n))`
//! reproduces `n` exactly.

use std::fmt::Write as _;

use super::{CsrMatrix, Layer, NeuralNetwork};
use crate::{Error, Result};

fn write_row(out: &mut String, row: impl Iterator<Item = f64>) {
    let mut first = true;
    for v in row {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

impl NeuralNetwork {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let dims: Vec<String> = self.dims().as_slice().iter().map(|k| k.to_string()).collect();
        out.push_str(&dims.join(" "));
        out.push('\n');
        for layer in self.layers() {
            for row in layer.weights.to_dense() {
                write_row(&mut out, row.into_iter());
            }
            write_row(&mut out, layer.bias.iter().copied());
        }
        out
    }

    /// Streams the text form without densifying the whole network at once.
    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let dims: Vec<String> = self.dims().as_slice().iter().map(|k| k.to_string()).collect();
        writeln!(w, "{}", dims.join(" "))?;
        let mut line = String::new();
        for layer in self.layers() {
            let cols = layer.weights.cols();
            let mut dense = vec![0.0; cols];
            for i in 0..layer.weights.rows() {
                dense.iter_mut().for_each(|v| *v = 0.0);
                for (j, v) in layer.weights.row(i) {
                    dense[j] = v;
                }
                line.clear();
                write_row(&mut line, dense.iter().copied());
                w.write_all(line.as_bytes())?;
            }
            line.clear();
            write_row(&mut line, layer.bias.iter().copied());
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty network text".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| Error::Parse(format!("bad width {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        if dims.len() < 3 {
            return Err(Error::Parse(format!("need at least 3 widths, got {}", dims.len())));
        }
        let mut parse_vec = |len: usize| -> Result<Vec<f64>> {
            let line = lines.next().ok_or_else(|| Error::Parse("unexpected end of network text".into()))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|e| Error::Parse(format!("bad number {t:?}: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != len {
                return Err(Error::Parse(format!("expected {len} numbers, got {}", v.len())));
            }
            Ok(v)
        };
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let rows: Vec<Vec<f64>> = (0..w[1]).map(|_| parse_vec(w[0])).collect::<Result<_>>()?;
            let bias = parse_vec(w[1])?;
            layers.push(Layer::new(CsrMatrix::from_dense(&rows, w[0]), bias)?);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after last layer".into()));
        }
        NeuralNetwork::new(layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let net = NeuralNetwork::from_dense(vec![
            (vec![vec![0.1, -2.0], vec![0.0, 1.0 / 3.0]], vec![1e-300, -0.0]),
            (vec![vec![7.25, std::f64::consts::PI]], vec![-1.5]),
        ])
        .unwrap();
        let text = net.to_text();
        assert!(text.starts_with("2 2 1\n"));
        assert_eq!(NeuralNetwork::from_text(&text).unwrap(), net);
        let mut buf = Vec::new();
        net.write_text(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(NeuralNetwork::from_text("").is_err());
        assert!(NeuralNetwork::from_text("1 1\n1\n0\n").is_err());
        assert!(NeuralNetwork::from_text("1 1 1\n1\n0\n1\n").is_err());
        assert!(NeuralNetwork::from_text("1 1 1\n1\n0\n1\n0\n9\n").is_err());
        assert!(NeuralNetwork::from_text("1 1 1\nx\n0\n1\n0\n").is_err());
    }
}
