//! Little-endian named-tensor container used to inject trained parameters.
//!
//! ```text
//! magic   b"WGTS"
//! version u8            (= 1)
//! count   u32
//! count × {
//!     name_len u16, name utf-8,
//!     rank u8, dims u32 × rank,
//!     data f32 × prod(dims)
//! }
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"WGTS";
pub const VERSION: u8 = 1;

pub type NamedTensors = Vec<(String, Tensor)>;

pub fn write_weights<W: Write>(mut out: W, tensors: &[(String, Tensor)]) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&[VERSION])?;
    let count = u32::try_from(tensors.len()).map_err(|_| Error::format("weights", "too many tensors"))?;
    out.write_all(&count.to_le_bytes())?;
    for (name, t) in tensors {
        let len = u16::try_from(name.len())
            .map_err(|_| Error::format("weights", format!("tensor name too long: {name}")))?;
        out.write_all(&len.to_le_bytes())?;
        out.write_all(name.as_bytes())?;
        let rank = u8::try_from(t.rank()).map_err(|_| Error::format("weights", "rank above 255"))?;
        out.write_all(&[rank])?;
        for &d in t.shape() {
            let d = u32::try_from(d).map_err(|_| Error::format("weights", "dimension above u32"))?;
            out.write_all(&d.to_le_bytes())?;
        }
        for v in t.data() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_exact<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::format("weights", format!("truncated: {e}")))?;
    Ok(buf)
}

pub fn read_weights<R: Read>(mut r: R) -> Result<NamedTensors> {
    if &read_exact::<_, 4>(&mut r)? != MAGIC {
        return Err(Error::format("weights", "bad magic"));
    }
    let [version] = read_exact::<_, 1>(&mut r)?;
    if version != VERSION {
        return Err(Error::format("weights", format!("unsupported version {version}")));
    }
    let count = u32::from_le_bytes(read_exact(&mut r)?);
    let mut tensors = Vec::new();
    for _ in 0..count {
        let len = u16::from_le_bytes(read_exact(&mut r)?) as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)
            .map_err(|e| Error::format("weights", format!("truncated name: {e}")))?;
        let name = String::from_utf8(name).map_err(|_| Error::format("weights", "name is not utf-8"))?;
        let [rank] = read_exact::<_, 1>(&mut r)?;
        let shape = (0..rank)
            .map(|_| Ok(u32::from_le_bytes(read_exact(&mut r)?) as usize))
            .collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let mut raw = vec![0u8; n * 4];
        r.read_exact(&mut raw)
            .map_err(|e| Error::format("weights", format!("truncated data for {name}: {e}")))?;
        let data = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        tensors.push((name, Tensor::new(shape, data)?));
    }
    Ok(tensors)
}

pub fn save_weights(path: impl AsRef<Path>, tensors: &[(String, Tensor)]) -> Result<()> {
    write_weights(BufWriter::new(File::create(path)?), tensors)
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<NamedTensors> {
    read_weights(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_little_endian() {
        let t = Tensor::new(vec![2], vec![1.0, -2.0]).unwrap();
        let mut buf = Vec::new();
        write_weights(&mut buf, &[("ab".into(), t)]).unwrap();
        assert_eq!(&buf[..4], b"WGTS");
        assert_eq!(buf[4], 1);
        assert_eq!(&buf[5..9], &1u32.to_le_bytes());
        assert_eq!(&buf[9..11], &2u16.to_le_bytes());
        assert_eq!(&buf[11..13], b"ab");
        assert_eq!(buf[13], 1);
        assert_eq!(&buf[14..18], &2u32.to_le_bytes());
        assert_eq!(&buf[18..22], &1.0f32.to_le_bytes());
        assert_eq!(buf.len(), 26);
    }

    #[test]
    fn round_trip_and_truncation() {
        let tensors = vec![
            ("scalar".to_string(), Tensor::new(vec![], vec![0.5]).unwrap()),
            ("k".to_string(), Tensor::full(&[2, 3, 1, 1], -1.25)),
        ];
        let mut buf = Vec::new();
        write_weights(&mut buf, &tensors).unwrap();
        assert_eq!(read_weights(buf.as_slice()).unwrap(), tensors);
        assert!(read_weights(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_weights(bad.as_slice()).is_err());
    }
}
