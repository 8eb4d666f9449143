//! Checkpoint files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic         8 bytes   "UNTANGLE"
//! version       u32       CHECKPOINT_VERSION
//! header_len    u32       byte length of the JSON header
//! header        JSON      ModelConfig fields, kind list, kind-order version,
//!                         SHA-256 config digest (hex) and network dims
//! parameters    f64 * P   w1, b1, w2, b2 in row-major order
//! ```
//!
//! Parameters are stored as raw IEEE-754 bits, so a save/load round trip is
//! bit-exact. Loading recomputes the config digest from the current move
//! catalogue and refuses files whose action-grid layout differs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{NetDims, Params, PolicyNet};
use crate::braid::Encoding;
use crate::error::{Error, Result};
use crate::moves::{ActionTable, MoveKind, KIND_ORDER_VERSION};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"UNTANGLE";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything that fixes the input and output layout of a network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub strands: usize,
    pub slots: usize,
    pub insertion: bool,
    pub encoding: Encoding,
}

impl ModelConfig {
    pub fn table(&self) -> ActionTable {
        ActionTable::new(self.strands, self.slots, self.insertion)
    }

    pub fn dims(&self) -> NetDims {
        NetDims::for_braids(self.strands, self.slots, self.table().len())
    }

    fn kind_names(&self) -> Vec<String> {
        MoveKind::catalogue(self.strands, self.insertion)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// SHA-256 over shape, kind order and encoding.
    pub fn digest(&self) -> String {
        digest_of(self, KIND_ORDER_VERSION, &self.kind_names())
    }
}

fn digest_of(config: &ModelConfig, kind_version: u32, kinds: &[String]) -> String {
    let canonical = format!(
        "kinds_v{kind_version};n={};L={};insertion={};encoding={};kinds={}",
        config.strands,
        config.slots,
        config.insertion,
        config.encoding,
        kinds.join(",")
    );
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    kind_order_version: u32,
    kinds: Vec<String>,
    digest: String,
    dims: NetDims,
}

/// A network together with the layout it was trained for.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub net: PolicyNet,
}

impl Checkpoint {
    pub fn new(config: ModelConfig, net: PolicyNet) -> Result<Self> {
        if net.dims() != config.dims() {
            return Err(Error::Incompatible(format!(
                "network dims {:?} do not match config dims {:?}",
                net.dims(),
                config.dims()
            )));
        }
        Ok(Self { config, net })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            config: self.config,
            kind_order_version: KIND_ORDER_VERSION,
            kinds: self.config.kind_names(),
            digest: self.config.digest(),
            dims: self.net.dims(),
        };
        encode(&header, self.net.params())
    }

    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self> {
        let fail = |reason: String| Error::Checkpoint {
            path: origin.to_path_buf(),
            reason,
        };
        let mut cursor = Cursor { bytes, pos: 0 };
        let magic = cursor
            .take(8)
            .ok_or_else(|| fail("truncated magic".into()))?;
        if magic != CHECKPOINT_MAGIC {
            return Err(fail("not a checkpoint (bad magic)".into()));
        }
        let version = cursor
            .u32()
            .ok_or_else(|| fail("truncated version".into()))?;
        if version != CHECKPOINT_VERSION {
            return Err(fail(format!(
                "format version {version}, this build reads {CHECKPOINT_VERSION}"
            )));
        }
        let header_len = cursor
            .u32()
            .ok_or_else(|| fail("truncated header length".into()))?;
        let header_bytes = cursor
            .take(header_len as usize)
            .ok_or_else(|| fail("truncated header".into()))?;
        let header: Header =
            serde_json::from_slice(header_bytes).map_err(|e| fail(format!("bad header: {e}")))?;

        let expected = header.config.digest();
        if header.digest != expected
            || header.kind_order_version != KIND_ORDER_VERSION
            || header.kinds != header.config.kind_names()
        {
            return Err(fail(format!(
                "config digest mismatch: file has {} (kind order v{}: {}), this build expects {} (v{}: {})",
                header.digest,
                header.kind_order_version,
                header.kinds.join(","),
                expected,
                KIND_ORDER_VERSION,
                header.config.kind_names().join(",")
            )));
        }
        if header.dims != header.config.dims() {
            return Err(fail(format!(
                "dims {:?} do not match config dims {:?}",
                header.dims,
                header.config.dims()
            )));
        }

        let mut params = Params::zeros(header.dims);
        for (name, slot) in ["w1", "b1", "w2", "b2"]
            .into_iter()
            .zip(params.tensors_mut())
        {
            for v in slot.iter_mut() {
                *v = cursor
                    .f64()
                    .ok_or_else(|| fail(format!("truncated parameters in {name}")))?;
            }
        }
        if cursor.pos != bytes.len() {
            return Err(fail(format!(
                "{} trailing bytes after parameters",
                bytes.len() - cursor.pos
            )));
        }
        if !params.is_finite() {
            return Err(fail("non-finite parameter".into()));
        }
        let net = PolicyNet::from_params(header.dims, params)?;
        Ok(Self {
            config: header.config,
            net,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes, path)
    }
}

fn encode(header: &Header, params: &Params) -> Vec<u8> {
    let json = serde_json::to_vec(header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * params.iter().count());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for v in params.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let out = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(out)
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let config = ModelConfig {
            strands: 3,
            slots: 5,
            insertion: false,
            encoding: Encoding::Scaled,
        };
        Checkpoint::new(config, PolicyNet::init(config.dims(), 42).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let ck = sample();
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        let bits = |c: &Checkpoint| {
            c.net
                .params()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&back), bits(&ck));

        let x: Vec<f64> = (0..ck.net.dims().input)
            .map(|i| (i as f64 * 0.37).cos())
            .collect();
        let mask: Vec<bool> = (0..ck.net.dims().output).map(|k| k % 3 != 1).collect();
        assert_eq!(
            ck.net.forward(&x, &mask).unwrap(),
            back.net.forward(&x, &mask).unwrap()
        );
    }

    #[test]
    fn different_kind_order_is_rejected() {
        let ck = sample();
        let mut kinds = ck.config.kind_names();
        kinds.swap(0, 1);
        let header = Header {
            config: ck.config,
            kind_order_version: KIND_ORDER_VERSION,
            digest: digest_of(&ck.config, KIND_ORDER_VERSION, &kinds),
            kinds,
            dims: ck.net.dims(),
        };
        let bytes = encode(&header, ck.net.params());
        let err = Checkpoint::from_bytes(&bytes, Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("digest mismatch"), "{err}");
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let bytes = sample().to_bytes();
        for cut in [0, 5, 12, 20, bytes.len() - 1] {
            let err = Checkpoint::from_bytes(&bytes[..cut], Path::new("x")).unwrap_err();
            assert!(matches!(err, Error::Checkpoint { .. }), "{err}");
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(Checkpoint::from_bytes(&long, Path::new("x")).is_err());
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut bytes = sample().to_bytes();
        bytes[8] = 9;
        let err = Checkpoint::from_bytes(&bytes, Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn digest_tracks_layout() {
        let a = sample().config;
        let b = ModelConfig {
            encoding: Encoding::Raw,
            ..a
        };
        let c = ModelConfig {
            insertion: true,
            ..a
        };
        assert_ne!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
