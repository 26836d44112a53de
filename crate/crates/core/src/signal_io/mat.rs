//! Reader for the uncompressed Level-5 MAT subset used by the challenge
//! corpus: one numeric matrix per file, `int16` or `double` payload.

use super::{RawRecord, DEFAULT_SAMPLE_RATE_HZ};
use thiserror::Error;

const HEADER_LEN: usize = 128;
const TAG_LEN: usize = 8;

const MI_INT8: u32 = 1;
const MI_INT16: u32 = 3;
const MI_INT32: u32 = 5;
const MI_UINT32: u32 = 6;
const MI_DOUBLE: u32 = 9;
const MI_MATRIX: u32 = 14;
const MI_COMPRESSED: u32 = 15;

const FLAG_COMPLEX: u32 = 0x0800;

#[derive(Debug, Error, PartialEq)]
pub enum MatError {
    #[error("bad MAT header: {0}")]
    BadHeader(String),
    #[error("unsupported data element type {code}")]
    UnsupportedElement { code: u32 },
    #[error("truncated file: element at offset {offset} needs {needed} bytes, {available} remain")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("malformed matrix element: {0}")]
    Malformed(String),
    #[error("no numeric matrix variable found")]
    NoNumericMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Endian {
    Little,
    Big,
}

struct Reader<'a> {
    bytes: &'a [u8],
    endian: Endian,
}

impl Reader<'_> {
    fn slice(&self, offset: usize, len: usize) -> Result<&[u8], MatError> {
        let available = self.bytes.len().saturating_sub(offset);
        if len > available {
            return Err(MatError::Truncated {
                offset,
                needed: len,
                available,
            });
        }
        Ok(&self.bytes[offset..offset + len])
    }

    fn u16_at(&self, offset: usize) -> Result<u16, MatError> {
        let b: [u8; 2] = self.slice(offset, 2)?.try_into().unwrap();
        Ok(match self.endian {
            Endian::Little => u16::from_le_bytes(b),
            Endian::Big => u16::from_be_bytes(b),
        })
    }

    fn u32_at(&self, offset: usize) -> Result<u32, MatError> {
        let b: [u8; 4] = self.slice(offset, 4)?.try_into().unwrap();
        Ok(match self.endian {
            Endian::Little => u32::from_le_bytes(b),
            Endian::Big => u32::from_be_bytes(b),
        })
    }

    /// Reads the tag at `offset`, returning the element and the offset of
    /// the next element (64-bit aligned).
    fn element(&self, offset: usize) -> Result<(Element, usize), MatError> {
        let first = self.u32_at(offset)?;
        if first >> 16 != 0 {
            // Small data element: 2-byte size, 2-byte type, payload inside
            // the 8-byte tag.
            let size = (first >> 16) as usize;
            if size > 4 {
                return Err(MatError::Malformed(format!(
                    "small element at offset {offset} declares {size} bytes"
                )));
            }
            self.slice(offset, TAG_LEN)?;
            return Ok((
                Element {
                    data_type: first & 0xFFFF,
                    data_offset: offset + 4,
                    size,
                },
                offset + TAG_LEN,
            ));
        }
        let size = self.u32_at(offset + 4)? as usize;
        let data_offset = offset + TAG_LEN;
        self.slice(data_offset, size)?;
        let next = data_offset + size.div_ceil(8) * 8;
        Ok((
            Element {
                data_type: first,
                data_offset,
                size,
            },
            next.min(self.bytes.len()),
        ))
    }
}

#[derive(Debug, Clone, Copy)]
struct Element {
    data_type: u32,
    data_offset: usize,
    size: usize,
}

fn is_numeric_class(class: u32) -> bool {
    // mxDOUBLE_CLASS (6) through mxUINT64_CLASS (15).
    (6..=15).contains(&class)
}

/// Parse a complete MAT file image into a [`RawRecord`].
///
/// The first numeric matrix variable is returned, flattened row-major.
pub fn parse_mat_record(bytes: &[u8], id: &str) -> Result<RawRecord, MatError> {
    let samples = parse_first_numeric_matrix(bytes)?;
    RawRecord::new(id, samples, DEFAULT_SAMPLE_RATE_HZ)
        .map_err(|e| MatError::Malformed(e.to_string()))
}

fn parse_first_numeric_matrix(bytes: &[u8]) -> Result<Vec<f64>, MatError> {
    if bytes.len() < HEADER_LEN {
        return Err(MatError::BadHeader(format!(
            "file is {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let endian = match &bytes[126..128] {
        b"IM" => Endian::Little,
        b"MI" => Endian::Big,
        other => {
            return Err(MatError::BadHeader(format!(
                "endian indicator {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let reader = Reader { bytes, endian };
    let version = reader.u16_at(124)?;
    if version != 0x0100 {
        return Err(MatError::BadHeader(format!("version {version:#06x}")));
    }

    let mut offset = HEADER_LEN;
    while offset < bytes.len() {
        let (element, next) = reader.element(offset)?;
        match element.data_type {
            MI_MATRIX => {
                if let Some(samples) = read_matrix(&reader, element)? {
                    return Ok(samples);
                }
            }
            MI_COMPRESSED => return Err(MatError::UnsupportedElement { code: MI_COMPRESSED }),
            code => return Err(MatError::UnsupportedElement { code }),
        }
        offset = next;
    }
    Err(MatError::NoNumericMatrix)
}

/// Returns `None` for non-numeric matrices (char arrays, cells, structs).
fn read_matrix(reader: &Reader, matrix: Element) -> Result<Option<Vec<f64>>, MatError> {
    let end = matrix.data_offset + matrix.size;
    let sub = |offset: usize| -> Result<(Element, usize), MatError> {
        if offset >= end {
            return Err(MatError::Malformed("matrix ended early".into()));
        }
        let (el, next) = reader.element(offset)?;
        if el.data_offset + el.size > end {
            return Err(MatError::Malformed("sub-element overruns matrix".into()));
        }
        Ok((el, next))
    };

    let (flags, next) = sub(matrix.data_offset)?;
    if flags.data_type != MI_UINT32 || flags.size != 8 {
        return Err(MatError::Malformed("array flags".into()));
    }
    let flag_word = reader.u32_at(flags.data_offset)?;
    let class = flag_word & 0xFF;
    if !is_numeric_class(class) {
        return Ok(None);
    }
    if flag_word & FLAG_COMPLEX != 0 {
        return Err(MatError::Malformed("complex matrices are not supported".into()));
    }

    let (dims_el, next) = sub(next)?;
    if dims_el.data_type != MI_INT32 || dims_el.size < 8 || dims_el.size % 4 != 0 {
        return Err(MatError::Malformed("dimensions".into()));
    }
    let dims: Vec<usize> = (0..dims_el.size / 4)
        .map(|i| reader.u32_at(dims_el.data_offset + 4 * i).map(|d| d as i32))
        .collect::<Result<Vec<i32>, _>>()?
        .into_iter()
        .map(|d| usize::try_from(d).map_err(|_| MatError::Malformed(format!("negative dimension {d}"))))
        .collect::<Result<_, _>>()?;

    let (name_el, next) = sub(next)?;
    if name_el.data_type != MI_INT8 {
        return Err(MatError::Malformed("array name".into()));
    }

    let (real, _) = sub(next)?;
    let width = match real.data_type {
        MI_INT16 => 2,
        MI_DOUBLE => 8,
        code => return Err(MatError::UnsupportedElement { code }),
    };
    let count: usize = dims.iter().product();
    if real.size != count * width {
        return Err(MatError::Malformed(format!(
            "{} payload bytes for dimensions {dims:?}",
            real.size
        )));
    }
    let column_major: Vec<f64> = (0..count)
        .map(|i| {
            let at = real.data_offset + i * width;
            if width == 2 {
                reader.u16_at(at).map(|v| v as i16 as f64)
            } else {
                let hi_lo = reader.slice(at, 8)?;
                let b: [u8; 8] = hi_lo.try_into().unwrap();
                Ok(match reader.endian {
                    Endian::Little => f64::from_le_bytes(b),
                    Endian::Big => f64::from_be_bytes(b),
                })
            }
        })
        .collect::<Result<_, _>>()?;

    // Storage is column-major; emit row-major with trailing dimensions
    // folded into columns.
    let rows = dims[0];
    let cols = if rows == 0 { 0 } else { count / rows };
    let mut out = Vec::with_capacity(count);
    for r in 0..rows {
        for c in 0..cols {
            out.push(column_major[c * rows + r]);
        }
    }
    Ok(Some(out))
}
