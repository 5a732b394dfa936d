//! Basis labels and mixed-radix index arithmetic.
//!
//! Wire 0 is the most significant digit, so labels read left to right in
//! wire order. Labels use one character per wire when every digit fits in a
//! single decimal character, and comma-separated integers otherwise.

use crate::error::{Error, Result};

/// Row-major strides: `strides[w] = Π dims[w+1..]`.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for w in (0..dims.len().saturating_sub(1)).rev() {
        out[w] = out[w + 1] * dims[w + 1];
    }
    out
}

pub fn encode(dims: &[usize], digits: &[usize]) -> Result<usize> {
    if digits.len() != dims.len() {
        return Err(Error::domain(format!(
            "expected {} digits, got {}",
            dims.len(),
            digits.len()
        )));
    }
    digits.iter().zip(dims).enumerate().try_fold(0, |acc, (w, (&x, &d))| {
        if x >= d {
            Err(Error::domain(format!(
                "digit {x} on wire {w} out of range for dimension {d}"
            )))
        } else {
            Ok(acc * d + x)
        }
    })
}

pub fn decode(dims: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for w in (0..dims.len()).rev() {
        out[w] = index % dims[w];
        index /= dims[w];
    }
    out
}

fn compact(dims: &[usize]) -> bool {
    dims.iter().all(|&d| d <= 10)
}

pub fn format_digits(digits: &[usize], dims: &[usize]) -> String {
    if compact(dims) {
        digits
            .iter()
            .map(|&x| char::from_digit(x as u32, 10).unwrap_or('?'))
            .collect()
    } else {
        digits
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Parses a label for wires of physical dimensions `dims`, checking ranges.
pub fn parse_digits(s: &str, dims: &[usize]) -> Result<Vec<usize>> {
    let s = s.trim();
    let digits: Vec<usize> = if s.contains(',') || !compact(dims) {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::domain(format!("malformed digit `{t}` in `{s}`")))
            })
            .collect::<Result<_>>()?
    } else {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::domain(format!("malformed digit `{c}` in `{s}`")))
            })
            .collect::<Result<_>>()?
    };
    encode(dims, &digits)?;
    Ok(digits)
}
