//! The `.dext` tensor container.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "DEXT"
//!      4     1  version (1)
//!      5     1  dtype code: 0 = u8, 1 = i8 Q7, 2 = f32 little-endian
//!      6     2  reserved, zero
//!      8     4  channels, u32 LE
//!     12     4  height, u32 LE
//!     16     4  width, u32 LE
//!     20     -  payload, channel-major
//! ```

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::error::{DexError, Result};
use crate::tensor::{DType, ImageTensor, Shape, TensorData};

pub const MAGIC: [u8; 4] = *b"DEXT";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TensorFileHeader {
    pub dtype: DType,
    pub shape: Shape,
}

pub fn dtype_code(dtype: DType) -> u8 {
    match dtype {
        DType::U8 => 0,
        DType::I8Q7 => 1,
        DType::F32 => 2,
    }
}

fn dtype_from_code(code: u8) -> Option<DType> {
    match code {
        0 => Some(DType::U8),
        1 => Some(DType::I8Q7),
        2 => Some(DType::F32),
        _ => None,
    }
}

impl TensorFileHeader {
    pub fn to_bytes(&self) -> Result<[u8; HEADER_LEN]> {
        let dim = |v: usize| {
            u32::try_from(v).map_err(|_| DexError::Shape(format!("dimension {v} exceeds u32")))
        };
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5] = dtype_code(self.dtype);
        out[8..12].copy_from_slice(&dim(self.shape.channels)?.to_le_bytes());
        out[12..16].copy_from_slice(&dim(self.shape.height)?.to_le_bytes());
        out[16..20].copy_from_slice(&dim(self.shape.width)?.to_le_bytes());
        Ok(out)
    }

    pub fn parse(bytes: &[u8; HEADER_LEN]) -> Result<Self> {
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(DexError::BadMagic { found: magic });
        }
        if bytes[4] != VERSION {
            return Err(DexError::VersionMismatch(bytes[4]));
        }
        let dtype = dtype_from_code(bytes[5]).ok_or_else(|| {
            DexError::InvalidArgument(format!("unknown dtype code {}", bytes[5]))
        })?;
        let dim = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        Ok(TensorFileHeader {
            dtype,
            shape: Shape::new(dim(8), dim(12), dim(16)),
        })
    }

    /// Total file size implied by this header.
    pub fn file_len(&self) -> usize {
        HEADER_LEN + self.shape.len() * self.dtype.element_size()
    }
}

pub fn encode_tensor(tensor: &ImageTensor) -> Result<Vec<u8>> {
    let header = TensorFileHeader {
        dtype: tensor.dtype(),
        shape: tensor.shape(),
    };
    let mut out = Vec::with_capacity(header.file_len());
    out.extend_from_slice(&header.to_bytes()?);
    match tensor.data() {
        TensorData::U8(v) => out.extend_from_slice(v),
        TensorData::I8Q7(v) => out.extend(v.iter().map(|&x| x as u8)),
        TensorData::F32(v) => out.extend(v.iter().flat_map(|x| x.to_le_bytes())),
    }
    Ok(out)
}

pub fn decode_tensor(bytes: &[u8]) -> Result<ImageTensor> {
    let mut reader = bytes;
    read_from(&mut reader)
}

/// Reads one tensor from a stream positioned at its header.
pub fn read_from<R: Read>(reader: &mut R) -> Result<ImageTensor> {
    let mut head = [0u8; HEADER_LEN];
    reader.read_exact(&mut head).map_err(truncated)?;
    let header = TensorFileHeader::parse(&head)?;
    let mut payload = vec![0u8; header.shape.len() * header.dtype.element_size()];
    reader.read_exact(&mut payload).map_err(truncated)?;
    let data = match header.dtype {
        DType::U8 => TensorData::U8(payload),
        DType::I8Q7 => TensorData::I8Q7(payload.into_iter().map(|b| b as i8).collect()),
        DType::F32 => TensorData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
    };
    ImageTensor::new(header.shape, data)
}

fn truncated(e: io::Error) -> DexError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        DexError::Io(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated tensor file"))
    } else {
        DexError::Io(e)
    }
}

pub fn write_tensor(path: &Path, tensor: &ImageTensor) -> Result<()> {
    let bytes = encode_tensor(tensor)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<ImageTensor> {
    let bytes = fs::read(path)?;
    let tensor = decode_tensor(&bytes)?;
    let expected = HEADER_LEN + tensor.shape().len() * tensor.dtype().element_size();
    if bytes.len() != expected {
        return Err(DexError::Io(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("{} trailing bytes after payload", bytes.len() - expected),
        )));
    }
    Ok(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let t = ImageTensor::from_q7(Shape::new(2, 1, 3), vec![-1, 0, 1, 2, 3, 127]).unwrap();
        let bytes = encode_tensor(&t).unwrap();
        assert_eq!(&bytes[..4], b"DEXT");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 1);
        assert_eq!(&bytes[6..8], &[0, 0]);
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &1u32.to_le_bytes());
        assert_eq!(&bytes[16..20], &3u32.to_le_bytes());
        assert_eq!(&bytes[20..], &[0xff, 0, 1, 2, 3, 127]);
    }

    #[test]
    fn f32_payload_is_little_endian() {
        let t = ImageTensor::from_f32(Shape::new(1, 1, 1), vec![1.0]).unwrap();
        let bytes = encode_tensor(&t).unwrap();
        assert_eq!(bytes[5], 2);
        assert_eq!(&bytes[20..], &[0x00, 0x00, 0x80, 0x3f]);
    }

    #[test]
    fn q7_file_length() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.dext");
        let t = ImageTensor::from_q7(Shape::new(64, 32, 32), vec![0; 65536]).unwrap();
        write_tensor(&path, &t).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 20 + 65536);
        assert_eq!(read_tensor(&path).unwrap(), t);
    }

    #[test]
    fn rejects_bad_headers() {
        let t = ImageTensor::from_u8(Shape::new(1, 1, 2), vec![1, 2]).unwrap();
        let good = encode_tensor(&t).unwrap();
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_tensor(&bad), Err(DexError::BadMagic { .. })));
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode_tensor(&bad), Err(DexError::VersionMismatch(2))));
        assert!(matches!(decode_tensor(&good[..21]), Err(DexError::Io(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("long.dext");
        let mut long = good.clone();
        long.push(0);
        fs::write(&path, long).unwrap();
        assert!(matches!(read_tensor(&path), Err(DexError::Io(_))));
    }

    fn any_tensor() -> impl Strategy<Value = ImageTensor> {
        (1usize..5, 1usize..6, 1usize..6, 0u8..3).prop_flat_map(|(c, h, w, kind)| {
            let shape = Shape::new(c, h, w);
            let n = shape.len();
            match kind {
                0 => proptest::collection::vec(any::<u8>(), n)
                    .prop_map(move |v| ImageTensor::from_u8(shape, v).unwrap())
                    .boxed(),
                1 => proptest::collection::vec(any::<i8>(), n)
                    .prop_map(move |v| ImageTensor::from_q7(shape, v).unwrap())
                    .boxed(),
                _ => proptest::collection::vec(-1e6f32..1e6, n)
                    .prop_map(move |v| ImageTensor::from_f32(shape, v).unwrap())
                    .boxed(),
            }
        })
    }

    proptest! {
        #[test]
        fn round_trip(t in any_tensor()) {
            let bytes = encode_tensor(&t).unwrap();
            prop_assert_eq!(bytes.len(), HEADER_LEN + t.shape().len() * t.dtype().element_size());
            prop_assert_eq!(decode_tensor(&bytes).unwrap(), t);
        }
    }
}
