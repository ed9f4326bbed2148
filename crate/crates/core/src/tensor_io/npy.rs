//! NPY v1.0 reader and writer, restricted to 2-D little-endian `float32` in C order.
//!
//! Layout: the 6-byte magic `\x93NUMPY`, major/minor version bytes `1, 0`, a
//! little-endian `u16` header length, then an ASCII Python dict literal padded
//! with spaces and terminated by `\n` so the data section starts on a 64-byte
//! boundary. The raw row-major element bytes follow.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::TokenMatrix;
use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;
const PREAMBLE_LEN: usize = 10;

/// Reads a matrix from an `.npy` file.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<TokenMatrix> {
    let file = File::open(path)?;
    read_matrix_from(&mut BufReader::new(file))
}

/// Writes a matrix to an `.npy` file, replacing any existing file.
pub fn write_matrix(m: &TokenMatrix, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_matrix_to(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix_from<R: Read>(reader: &mut R) -> Result<TokenMatrix> {
    let mut preamble = [0u8; PREAMBLE_LEN];
    reader
        .read_exact(&mut preamble)
        .map_err(|_| Error::MalformedHeader("file shorter than the npy preamble".into()))?;
    if &preamble[..6] != MAGIC {
        return Err(Error::MalformedHeader("bad magic string".into()));
    }
    if preamble[6] != 1 || preamble[7] != 0 {
        return Err(Error::MalformedHeader(format!(
            "unsupported format version {}.{}",
            preamble[6], preamble[7]
        )));
    }
    let header_len = u16::from_le_bytes([preamble[8], preamble[9]]) as usize;
    let mut header = vec![0u8; header_len];
    reader
        .read_exact(&mut header)
        .map_err(|_| Error::MalformedHeader("truncated header".into()))?;
    let header = std::str::from_utf8(&header)
        .map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
    let dict = HeaderDict::parse(header)?;

    if dict.descr != "<f4" {
        return Err(Error::UnsupportedDtype(dict.descr));
    }
    if dict.fortran_order {
        return Err(Error::UnsupportedLayout("Fortran order".into()));
    }
    let &[rows, cols] = dict.shape.as_slice() else {
        return Err(Error::UnsupportedLayout(format!(
            "expected 2 dimensions, found {}",
            dict.shape.len()
        )));
    };
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::MalformedHeader("shape overflows".into()))?;

    let mut bytes = vec![0u8; len * 4];
    reader
        .read_exact(&mut bytes)
        .map_err(|_| Error::MalformedHeader("data section shorter than declared shape".into()))?;
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    TokenMatrix::new(rows, cols, data)
}

pub fn write_matrix_to<W: Write>(m: &TokenMatrix, writer: &mut W) -> Result<()> {
    let mut dict = format!(
        "{{'descr': '<f4', 'fortran_order': False, 'shape': ({}, {}), }}",
        m.rows(),
        m.cols()
    );
    let unpadded = PREAMBLE_LEN + dict.len() + 1;
    let pad = (ALIGN - unpadded % ALIGN) % ALIGN;
    dict.extend(std::iter::repeat(' ').take(pad));
    dict.push('\n');
    let header_len = u16::try_from(dict.len())
        .map_err(|_| Error::MalformedHeader("header exceeds v1.0 size limit".into()))?;

    writer.write_all(MAGIC)?;
    writer.write_all(&[1, 0])?;
    writer.write_all(&header_len.to_le_bytes())?;
    writer.write_all(dict.as_bytes())?;
    let mut bytes = Vec::with_capacity(m.data().len() * 4);
    for v in m.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    writer.write_all(&bytes)?;
    Ok(())
}

#[derive(Debug)]
struct HeaderDict {
    descr: String,
    fortran_order: bool,
    shape: Vec<usize>,
}

#[derive(Debug)]
enum Literal {
    Str(String),
    Bool(bool),
    Int(usize),
    Tuple(Vec<Literal>),
}

impl HeaderDict {
    fn parse(text: &str) -> Result<Self> {
        let mut p = Parser {
            s: text.trim_end().as_bytes(),
            pos: 0,
        };
        let entries = p.dict()?;
        let mut descr = None;
        let mut fortran_order = None;
        let mut shape = None;
        for (key, value) in entries {
            match (key.as_str(), value) {
                ("descr", Literal::Str(s)) => descr = Some(s),
                ("fortran_order", Literal::Bool(b)) => fortran_order = Some(b),
                ("shape", Literal::Tuple(items)) => {
                    let dims = items
                        .into_iter()
                        .map(|item| match item {
                            Literal::Int(n) => Ok(n),
                            other => Err(Error::MalformedHeader(format!(
                                "shape entry {other:?} is not an integer"
                            ))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    shape = Some(dims);
                }
                ("descr", Literal::Tuple(_)) => {
                    return Err(Error::UnsupportedDtype("structured dtype".into()))
                }
                (k, v) => {
                    return Err(Error::MalformedHeader(format!(
                        "unexpected header entry {k:?}: {v:?}"
                    )))
                }
            }
        }
        match (descr, fortran_order, shape) {
            (Some(descr), Some(fortran_order), Some(shape)) => Ok(Self {
                descr,
                fortran_order,
                shape,
            }),
            _ => Err(Error::MalformedHeader(
                "header must define descr, fortran_order and shape".into(),
            )),
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::MalformedHeader(format!("{what} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn dict(&mut self) -> Result<Vec<(String, Literal)>> {
        self.expect(b'{')?;
        let mut entries = Vec::new();
        loop {
            if self.peek() == Some(b'}') {
                self.pos += 1;
                break;
            }
            let Literal::Str(key) = self.literal()? else {
                return Err(self.err("dict key must be a string"));
            };
            self.expect(b':')?;
            let value = self.literal()?;
            entries.push((key, value));
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {}
                _ => return Err(self.err("expected ',' or '}'")),
            }
        }
        if self.peek().is_some() {
            return Err(self.err("trailing characters after dict"));
        }
        Ok(entries)
    }

    fn literal(&mut self) -> Result<Literal> {
        match self.peek() {
            Some(q @ (b'\'' | b'"')) => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos] != q {
                    self.pos += 1;
                }
                if self.pos == self.s.len() {
                    return Err(self.err("unterminated string"));
                }
                let text = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
                self.pos += 1;
                Ok(Literal::Str(text))
            }
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    if self.peek() == Some(b')') {
                        self.pos += 1;
                        break;
                    }
                    items.push(self.literal()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {}
                        _ => return Err(self.err("expected ',' or ')'")),
                    }
                }
                Ok(Literal::Tuple(items))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                // Python 2 era writers emit long literals such as `3L`.
                let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                if self.s.get(self.pos) == Some(&b'L') {
                    self.pos += 1;
                }
                digits
                    .parse()
                    .map(Literal::Int)
                    .map_err(|_| self.err("integer out of range"))
            }
            Some(_) => {
                for (word, value) in [("True", true), ("False", false)] {
                    if self.s[self.pos..].starts_with(word.as_bytes()) {
                        self.pos += word.len();
                        return Ok(Literal::Bool(value));
                    }
                }
                Err(self.err("unrecognised literal"))
            }
            None => Err(self.err("unexpected end of header")),
        }
    }
}
