//! Single-file tensor container.
//!
//! ```text
//! DNAGAN-CHECKPOINT
//! version 1
//! layout 2 8,8 32
//! meta step 500
//! array enc.0.w 256x256 0
//! array enc.0.b 256 262144
//! end
//! <little-endian f32 payloads, offsets relative to the first payload byte>
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::genome::GenomeLayout;
use crate::numerics::tensor::Tensor;

const MAGIC: &str = "DNAGAN-CHECKPOINT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub layout: Option<GenomeLayout>,
    /// Ordered `(key, value)` lines; keys contain no whitespace, values no newlines.
    pub meta: Vec<(String, String)>,
    pub arrays: Vec<(String, Tensor<f32>)>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn array(&self, name: &str) -> Option<&Tensor<f32>> {
        self.arrays.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut header = format!("{MAGIC}\nversion {FORMAT_VERSION}\n");
        if let Some(layout) = &self.layout {
            header.push_str(&format!("layout {layout}\n"));
        }
        for (k, v) in &self.meta {
            if k.is_empty() || k.chars().any(char::is_whitespace) || v.contains('\n') {
                return Err(bad(format!("unrepresentable meta entry `{k}`")));
            }
            header.push_str(&format!("meta {k} {v}\n"));
        }
        let mut offset = 0usize;
        for (name, t) in &self.arrays {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(bad(format!("unrepresentable array name `{name}`")));
            }
            let dims: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
            header.push_str(&format!("array {name} {} {offset}\n", dims.join("x")));
            offset += t.len() * 4;
        }
        header.push_str("end\n");
        let mut out = header.into_bytes();
        out.reserve(offset);
        for (_, t) in &self.arrays {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let end_marker = b"\nend\n";
        let header_end = bytes
            .windows(end_marker.len())
            .position(|w| w == end_marker)
            .ok_or_else(|| bad("header terminator not found"))?
            + end_marker.len();
        let header = std::str::from_utf8(&bytes[..header_end])
            .map_err(|_| bad("header is not UTF-8"))?;
        let payload = &bytes[header_end..];

        let mut lines = header.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad("missing magic line"));
        }
        match lines.next().and_then(|l| l.strip_prefix("version ")) {
            Some(v) if v.parse::<u32>().ok() == Some(FORMAT_VERSION) => {}
            other => return Err(bad(format!("unsupported version line {other:?}"))),
        }

        let mut ckpt = Checkpoint::default();
        let mut expected_offset = 0usize;
        for line in lines {
            if line == "end" {
                break;
            }
            let (kind, rest) = line.split_once(' ').ok_or_else(|| bad(format!("bad line `{line}`")))?;
            match kind {
                "layout" => ckpt.layout = Some(rest.parse()?),
                "meta" => {
                    let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                    ckpt.meta.push((k.to_string(), v.to_string()));
                }
                "array" => {
                    let parts: Vec<&str> = rest.split(' ').collect();
                    let [name, dims, offset] = parts[..] else {
                        return Err(bad(format!("bad array line `{line}`")));
                    };
                    let shape: Vec<usize> = dims
                        .split('x')
                        .map(|d| d.parse().map_err(|_| bad(format!("bad shape `{dims}`"))))
                        .collect::<Result<_>>()?;
                    let offset: usize = offset.parse().map_err(|_| bad(format!("bad offset `{offset}`")))?;
                    if offset != expected_offset {
                        return Err(bad(format!("array `{name}` at offset {offset}, expected {expected_offset}")));
                    }
                    let len: usize = shape.iter().product();
                    let bytes = payload
                        .get(offset..offset + len * 4)
                        .ok_or_else(|| bad(format!("payload truncated in `{name}`")))?;
                    let data = bytes
                        .chunks_exact(4)
                        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                        .collect();
                    ckpt.arrays.push((name.to_string(), Tensor::new(shape, data)?));
                    expected_offset += len * 4;
                }
                other => return Err(bad(format!("unknown header entry `{other}`"))),
            }
        }
        if expected_offset != payload.len() {
            return Err(bad(format!(
                "payload has {} bytes, directory describes {expected_offset}",
                payload.len()
            )));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            layout: Some(GenomeLayout::uniform(2, 3, 4).unwrap()),
            meta: vec![("step".into(), "12".into()), ("note".into(), "two words".into())],
            arrays: vec![
                ("w".into(), Tensor::new(vec![2, 2], vec![1.0, -0.0, f32::MIN_POSITIVE, 3.5]).unwrap()),
                ("b".into(), Tensor::new(vec![1], vec![7.25]).unwrap()),
            ],
        }
    }

    #[test]
    fn header_layout() {
        let bytes = sample().to_bytes().unwrap();
        let text = String::from_utf8_lossy(&bytes[..120]);
        assert!(text.starts_with("DNAGAN-CHECKPOINT\nversion 1\nlayout 2 3,3 4\nmeta step 12\n"));
        assert!(text.contains("array w 2x2 0\narray b 1 16\nend\n"));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = sample();
        let bytes = c.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes().unwrap(), bytes);
        assert_eq!(back.meta("note"), Some("two words"));
        assert_eq!(back.array("w").unwrap().data()[1].to_bits(), (-0.0f32).to_bits());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let bytes = sample().to_bytes().unwrap();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(Checkpoint::from_bytes(b"garbage").is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_payload_round_trips(bits in prop::collection::vec(any::<u32>(), 1..64)) {
            let data: Vec<f32> = bits.iter().map(|&b| f32::from_bits(b)).collect();
            let c = Checkpoint {
                layout: None,
                meta: vec![],
                arrays: vec![("x".into(), Tensor::new(vec![data.len()], data).unwrap())],
            };
            let bytes = c.to_bytes().unwrap();
            let back = Checkpoint::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes().unwrap(), bytes);
        }
    }
}
