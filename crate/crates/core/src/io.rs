//! Matrix text format: parsing and rendering.
//!
//! Line 1 holds `rows cols`; each following line holds one matrix row of
//! whitespace-separated complex literals of the form `a`, `bi`, or `a+bi`
//! (signs and decimal or exponent notation allowed). Lines starting with `#`
//! are comments and blank lines are skipped. Rendering emits the shortest
//! decimal form that round-trips each double bitwise, so
//! `parse_matrix(render_matrix(m)) == m` exactly for finite entries.

use crate::error::{Error, Result};
use crate::matrix::{ComplexScalar, Matrix};

/// A matrix together with the path it was read from.
pub struct MatrixFile {
    pub path: String,
    pub parsed: Matrix,
}

impl MatrixFile {
    /// Reads and parses one matrix file.
    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_string(),
            source,
        })?;
        let parsed = parse_matrix(&text)?;
        Ok(Self {
            path: path.to_string(),
            parsed,
        })
    }
}

/// Parses the matrix text format.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'));

    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty input, expected a `rows cols` header"))?;
    let mut dims = header.split_whitespace();
    let rows = parse_dim(dims.next(), header_no, 1)?;
    let cols = parse_dim(dims.next(), header_no, 2)?;
    if dims.next().is_some() {
        return Err(parse_err(
            header_no,
            3,
            "header must be exactly `rows cols`",
        ));
    }

    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (line_no, line) = lines.next().ok_or_else(|| {
            parse_err(
                text.lines().count().max(1),
                1,
                &format!("expected {rows} matrix rows, input ended early"),
            )
        })?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != cols {
            return Err(parse_err(
                line_no,
                tokens.len().min(cols) + 1,
                &format!("expected {cols} entries, found {}", tokens.len()),
            ));
        }
        for (k, token) in tokens.iter().enumerate() {
            let value = parse_complex(token)
                .ok_or_else(|| parse_err(line_no, k + 1, &format!("malformed entry `{token}`")))?;
            entries.push(value);
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(parse_err(line_no, 1, "unexpected data after the last row"));
    }
    Matrix::new(rows, cols, entries)
}

/// Renders a matrix in the text format.
pub fn render_matrix(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&render_complex(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Renders one entry in the shortest form that parses back bitwise.
pub fn render_complex(v: ComplexScalar) -> String {
    let re_is_pos_zero = v.re.to_bits() == 0.0f64.to_bits();
    let im_is_pos_zero = v.im.to_bits() == 0.0f64.to_bits();
    if im_is_pos_zero {
        format!("{}", v.re)
    } else if re_is_pos_zero {
        format!("{}i", v.im)
    } else {
        format!("{}{:+}i", v.re, v.im)
    }
}

fn parse_err(line: usize, entry: usize, message: &str) -> Error {
    Error::Parse {
        line,
        entry,
        message: message.to_string(),
    }
}

fn parse_dim(token: Option<&str>, line: usize, entry: usize) -> Result<usize> {
    let token = token.ok_or_else(|| parse_err(line, entry, "header must be `rows cols`"))?;
    let value: usize = token
        .parse()
        .map_err(|_| parse_err(line, entry, &format!("`{token}` is not a dimension")))?;
    if value == 0 {
        return Err(parse_err(line, entry, "dimensions must be positive"));
    }
    Ok(value)
}

/// Parses one complex literal; `None` on any malformation.
fn parse_complex(token: &str) -> Option<ComplexScalar> {
    if let Some(body) = token.strip_suffix(['i', 'I']) {
        match split_imaginary(body) {
            Some((re_part, im_part)) => {
                let re = parse_real(re_part)?;
                let im = parse_signed_coefficient(im_part)?;
                Some(ComplexScalar::new(re, im))
            }
            None => Some(ComplexScalar::new(0.0, parse_signed_coefficient(body)?)),
        }
    } else {
        Some(ComplexScalar::new(parse_real(token)?, 0.0))
    }
}

/// Finds the sign that separates `a+b` / `a-b`, skipping exponent signs and
/// a leading sign. Returns `(a, signed b)` when the token has both parts.
fn split_imaginary(body: &str) -> Option<(&str, &str)> {
    let bytes = body.as_bytes();
    for pos in (1..bytes.len()).rev() {
        let c = bytes[pos];
        if (c == b'+' || c == b'-') && !matches!(bytes[pos - 1], b'e' | b'E') {
            return Some((&body[..pos], &body[pos..]));
        }
    }
    None
}

/// Parses an imaginary coefficient where a bare sign (or nothing) means one.
fn parse_signed_coefficient(text: &str) -> Option<f64> {
    match text {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_real(text),
    }
}

/// Parses a plain real literal, rejecting words like `inf` and `nan`.
fn parse_real(text: &str) -> Option<f64> {
    if text.is_empty()
        || !text
            .bytes()
            .all(|b| matches!(b, b'0'..=b'9' | b'.' | b'+' | b'-' | b'e' | b'E'))
    {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_identity() {
        let m = parse_matrix("2 2\n1 0\n0 1\n").unwrap();
        assert_eq!(m, Matrix::identity(2));
    }

    #[test]
    fn parses_complex_forms() {
        let m = parse_matrix("1 6\n1+1i -2i 3 -4.5e-1 1e2+1e-2i i\n").unwrap();
        assert_eq!(m[(0, 0)], ComplexScalar::new(1.0, 1.0));
        assert_eq!(m[(0, 1)], ComplexScalar::new(0.0, -2.0));
        assert_eq!(m[(0, 2)], ComplexScalar::new(3.0, 0.0));
        assert_eq!(m[(0, 3)], ComplexScalar::new(-0.45, 0.0));
        assert_eq!(m[(0, 4)], ComplexScalar::new(100.0, 0.01));
        assert_eq!(m[(0, 5)], ComplexScalar::new(0.0, 1.0));
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let m = parse_matrix("# header comment\n\n2 2\n# row comment\n1 2\n\n3 4\n").unwrap();
        assert_eq!(m[(1, 0)], ComplexScalar::new(3.0, 0.0));
    }

    #[test]
    fn reports_malformed_entry_location() {
        let err = parse_matrix("2 2\n1 bogus\n0 1\n").unwrap_err();
        match err {
            Error::Parse { line, entry, .. } => {
                assert_eq!((line, entry), (2, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_infinities_and_words() {
        assert!(parse_matrix("1 1\ninf\n").is_err());
        assert!(parse_matrix("1 1\nnan\n").is_err());
        assert!(parse_matrix("1 1\n0x10\n").is_err());
    }

    #[test]
    fn rejects_wrong_counts() {
        assert!(parse_matrix("2 2\n1 2 3\n4 5\n").is_err());
        assert!(parse_matrix("2 2\n1 2\n").is_err());
        assert!(parse_matrix("1 1\n1\n2\n").is_err());
    }

    #[test]
    fn accepts_crlf() {
        let m = parse_matrix("2 2\r\n1 0\r\n0 1\r\n").unwrap();
        assert_eq!(m, Matrix::identity(2));
    }

    #[test]
    fn roundtrip_preserves_bits() {
        let cases = [
            ComplexScalar::new(0.1, -0.3),
            ComplexScalar::new(-0.0, 0.0),
            ComplexScalar::new(0.0, -0.0),
            ComplexScalar::new(1.0e-308, 2.5e300),
            ComplexScalar::new(-7.0, f64::MIN_POSITIVE),
            ComplexScalar::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ];
        let m = Matrix::new(1, cases.len(), cases.to_vec()).unwrap();
        let back = parse_matrix(&render_matrix(&m)).unwrap();
        for j in 0..cases.len() {
            assert_eq!(m[(0, j)].re.to_bits(), back[(0, j)].re.to_bits());
            assert_eq!(m[(0, j)].im.to_bits(), back[(0, j)].im.to_bits());
        }
    }
}
