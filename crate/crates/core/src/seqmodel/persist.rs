//! Binary model bank files.
//!
//! Layout (little endian):
//!
//! ```text
//! magic "NMBANK\n" | version u32 | alphabet size u32 | payload length u64
//! payload | FNV-1a 64 checksum of payload
//! ```
//!
//! The payload stores the hyperparameters as raw `f64` bits followed by the
//! base model and the 21 inclusion models, each as its trie of integer counts,
//! so a loaded bank reproduces every prediction bit for bit.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::bank::{InclKey, ModelBank};
use super::model::{Hyperparams, Node, SequenceModel};
use crate::error::{Error, Result};
use crate::symbol::ALPHABET_SIZE;

pub const MAGIC: &[u8; 7] = b"NMBANK\n";
pub const FORMAT_VERSION: u32 = 1;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::BankFormat("truncated payload".into()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
}

fn write_model(w: &mut Writer, model: &SequenceModel) {
    w.u64(model.trained_sequences);
    w.u32(model.nodes.len() as u32);
    for node in &model.nodes {
        w.u64(node.total);
        w.u32(node.counts.len() as u32);
        for &(s, c) in &node.counts {
            w.u8(s);
            w.u32(c);
        }
        w.u32(node.children.len() as u32);
        for &(s, c) in &node.children {
            w.u8(s);
            w.u32(c);
        }
    }
}

fn read_model(r: &mut Reader<'_>, params: &Hyperparams) -> Result<SequenceModel> {
    let trained_sequences = r.u64()?;
    let n_nodes = r.u32()? as usize;
    if n_nodes == 0 {
        return Err(Error::BankFormat("model without a root node".into()));
    }
    let mut nodes = Vec::with_capacity(n_nodes.min(1 << 20));
    for _ in 0..n_nodes {
        let total = r.u64()?;
        let n_counts = r.u32()? as usize;
        let mut counts = Vec::with_capacity(n_counts.min(ALPHABET_SIZE));
        let mut sum = 0u64;
        for _ in 0..n_counts {
            let s = r.u8()?;
            let c = r.u32()?;
            if s as usize >= ALPHABET_SIZE || c == 0 {
                return Err(Error::BankFormat("corrupt count entry".into()));
            }
            sum += c as u64;
            counts.push((s, c));
        }
        if sum != total {
            return Err(Error::BankFormat(
                "node total disagrees with its counts".into(),
            ));
        }
        let n_children = r.u32()? as usize;
        let mut children = Vec::with_capacity(n_children.min(ALPHABET_SIZE));
        for _ in 0..n_children {
            let s = r.u8()?;
            let c = r.u32()?;
            if s as usize >= ALPHABET_SIZE || c as usize >= n_nodes {
                return Err(Error::BankFormat("corrupt child entry".into()));
            }
            children.push((s, c));
        }
        nodes.push(Node {
            children,
            counts,
            total,
        });
    }
    Ok(SequenceModel {
        params: params.clone(),
        nodes,
        trained_sequences,
    })
}

pub fn encode_bank(bank: &ModelBank<SequenceModel>) -> Vec<u8> {
    let mut payload = Writer(Vec::new());
    let params = bank.params();
    payload.u32(params.max_depth as u32);
    for level in 0..=params.max_depth {
        payload.f64(params.discounts[level]);
        payload.f64(params.strengths[level]);
    }
    payload.u32(1 + bank.incl_count() as u32);
    write_model(&mut payload, bank.base());
    for (_, model) in bank.incl_models() {
        write_model(&mut payload, model);
    }

    let mut out = Writer(Vec::with_capacity(payload.0.len() + 32));
    out.0.extend_from_slice(MAGIC);
    out.u32(FORMAT_VERSION);
    out.u32(ALPHABET_SIZE as u32);
    out.u64(payload.0.len() as u64);
    out.0.extend_from_slice(&payload.0);
    out.u64(fnv1a(&payload.0));
    out.0
}

pub fn decode_bank(bytes: &[u8]) -> Result<ModelBank<SequenceModel>> {
    let mut header = Reader { buf: bytes, pos: 0 };
    let magic = header
        .take(MAGIC.len())
        .map_err(|_| Error::BankFormat("file too short for a bank header".into()))?;
    if magic != MAGIC {
        return Err(Error::BankFormat(
            "not a model bank file (bad magic)".into(),
        ));
    }
    let version = header.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::BankFormat(format!(
            "unsupported format version {version} (expected version {FORMAT_VERSION})"
        )));
    }
    let alphabet = header.u32()?;
    if alphabet as usize != ALPHABET_SIZE {
        return Err(Error::BankFormat(format!(
            "bank alphabet has {alphabet} symbols, expected {ALPHABET_SIZE}"
        )));
    }
    let len = header.u64()? as usize;
    let payload = header.take(len).map_err(|_| {
        Error::BankFormat(format!(
            "truncated file (expected version {FORMAT_VERSION} payload of {len} bytes)"
        ))
    })?;
    let checksum = header
        .u64()
        .map_err(|_| Error::BankFormat("truncated file: missing checksum".into()))?;
    if fnv1a(payload) != checksum {
        return Err(Error::BankFormat(
            "checksum mismatch; file is corrupt".into(),
        ));
    }

    let mut r = Reader {
        buf: payload,
        pos: 0,
    };
    let depth = r.u32()? as usize;
    if depth > Hyperparams::MAX_DEPTH_LIMIT {
        return Err(Error::BankFormat(format!("implausible max depth {depth}")));
    }
    let mut discounts = Vec::with_capacity(depth + 1);
    let mut strengths = Vec::with_capacity(depth + 1);
    for _ in 0..=depth {
        discounts.push(r.f64()?);
        strengths.push(r.f64()?);
    }
    let params = Hyperparams::per_level(discounts, strengths)
        .map_err(|e| Error::BankFormat(format!("stored hyperparameters invalid: {e}")))?;
    let count = r.u32()? as usize;
    if count != 1 + InclKey::COUNT {
        return Err(Error::BankFormat(format!(
            "bank holds {count} models, expected {}",
            1 + InclKey::COUNT
        )));
    }
    let base = read_model(&mut r, &params)?;
    let incl = (0..InclKey::COUNT)
        .map(|_| read_model(&mut r, &params))
        .collect::<Result<Vec<_>>>()?;
    if r.pos != payload.len() {
        return Err(Error::BankFormat("trailing bytes after models".into()));
    }
    ModelBank::from_parts(base, incl)
}

pub fn save_bank(bank: &ModelBank<SequenceModel>, path: &Path) -> Result<()> {
    let bytes = encode_bank(bank);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_bank(path: &Path) -> Result<ModelBank<SequenceModel>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_bank(&bytes)
}
