//! Model files.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! magic        8 bytes  "CBEMBED\0"
//! version      u32
//! region       str      (u32 byte length + UTF-8)
//! algorithm    str
//! config       str      (`key = value` lines)
//! total_tokens u64
//! vocab_size   u64
//! vocab        vocab_size × (str word, u64 count)
//! dim          u64
//! vectors      vocab_size × dim × f32
//! subwords     u8 flag; when 1: u32 ngram_min, u32 ngram_max, u64 buckets,
//!              buckets × dim × f32
//! ```
//!
//! The text format is the common word2vec layout: a `vocab_size dim` header
//! line followed by `word v1 ... vd` lines. It carries neither counts nor the
//! training configuration.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{Algorithm, EmbeddingModel, SubwordTable, TrainConfig, Vocabulary};
use crate::error::{Error, Result};
use crate::kv::KvFile;

pub const MAGIC: &[u8; 8] = b"CBEMBED\0";
pub const FORMAT_VERSION: u32 = 1;

const MAX_STR: u32 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Binary,
    Text,
}

impl ModelFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ModelFormat::Binary => "bin",
            ModelFormat::Text => "vec",
        }
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn write_f32s<W: Write>(w: &mut W, xs: &[f32]) -> io::Result<()> {
    for &x in xs {
        w.write_f32::<LittleEndian>(x)?;
    }
    Ok(())
}

/// Saves in the format chosen by `format`.
pub fn save_model(model: &EmbeddingModel, path: &Path, format: ModelFormat) -> Result<()> {
    match format {
        ModelFormat::Binary => save_binary(model, path),
        ModelFormat::Text => save_model_text(model, path),
    }
}

fn save_binary(model: &EmbeddingModel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        write_str(w, &model.region)?;
        write_str(w, model.algorithm.as_str())?;
        write_str(w, &model.config.to_kv().render())?;
        w.write_u64::<LittleEndian>(model.vocab.total_tokens())?;
        w.write_u64::<LittleEndian>(model.vocab.len() as u64)?;
        for (word, &count) in model.vocab.words().iter().zip(model.vocab.counts()) {
            write_str(w, word)?;
            w.write_u64::<LittleEndian>(count)?;
        }
        w.write_u64::<LittleEndian>(model.dim as u64)?;
        write_f32s(w, &model.vectors)?;
        match &model.subwords {
            None => w.write_u8(0)?,
            Some(t) => {
                w.write_u8(1)?;
                w.write_u32::<LittleEndian>(t.ngram_min as u32)?;
                w.write_u32::<LittleEndian>(t.ngram_max as u32)?;
                w.write_u64::<LittleEndian>(t.buckets as u64)?;
                write_f32s(w, &t.vectors)?;
            }
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(path, e))
}

/// Writes the `vocab_size dim` text layout. Floats use the shortest
/// representation that parses back to the same `f32`.
pub fn save_model_text(model: &EmbeddingModel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        writeln!(w, "{} {}", model.vocab.len(), model.dim)?;
        for (i, word) in model.vocab.words().iter().enumerate() {
            w.write_all(word.as_bytes())?;
            for x in model.row(i) {
                write!(w, " {x}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(path, e))
}

/// Loads either format, detected from the leading magic bytes.
pub fn load_model(path: &Path) -> Result<EmbeddingModel> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut head = [0u8; 8];
    let n = read_up_to(&mut file, &mut head).map_err(|e| Error::io(path, e))?;
    drop(file);
    if n == MAGIC.len() && &head == MAGIC {
        load_binary(path)
    } else {
        load_text(path)
    }
}

fn read_up_to<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}

struct BinReader<'p, R> {
    inner: R,
    path: &'p Path,
}

impl<R: Read> BinReader<'_, R> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::model(self.path, reason)
    }

    fn wrap(&self, e: io::Error) -> Error {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            self.fail("truncated file")
        } else {
            Error::io(self.path, e)
        }
    }

    fn u8(&mut self) -> Result<u8> {
        self.inner.read_u8().map_err(|e| self.wrap(e))
    }

    fn u32(&mut self) -> Result<u32> {
        self.inner.read_u32::<LittleEndian>().map_err(|e| self.wrap(e))
    }

    fn u64(&mut self) -> Result<u64> {
        self.inner.read_u64::<LittleEndian>().map_err(|e| self.wrap(e))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()?;
        if len > MAX_STR {
            return Err(self.fail(format!("string length {len} out of range")));
        }
        let mut buf = vec![0u8; len as usize];
        self.inner.read_exact(&mut buf).map_err(|e| self.wrap(e))?;
        String::from_utf8(buf).map_err(|_| self.fail("invalid UTF-8 string"))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let mut out = vec![0f32; n];
        self.inner
            .read_f32_into::<LittleEndian>(&mut out)
            .map_err(|e| self.wrap(e))?;
        Ok(out)
    }
}

fn load_binary(path: &Path) -> Result<EmbeddingModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BinReader {
        inner: BufReader::new(file),
        path,
    };
    let mut magic = [0u8; 8];
    r.inner.read_exact(&mut magic).map_err(|e| r.wrap(e))?;
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(r.fail(format!(
            "format version {version} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    let region = r.string()?;
    let algorithm: Algorithm = r.string()?.parse().map_err(|e: Error| r.fail(e.to_string()))?;
    let config_text = r.string()?;
    let config = KvFile::parse(&config_text)
        .and_then(|kv| TrainConfig::from_kv(&kv))
        .map_err(|e| r.fail(format!("config snapshot: {e}")))?;
    let total_tokens = r.u64()?;
    let size = r.u64()? as usize;
    let mut entries = Vec::with_capacity(size.min(1 << 24));
    for _ in 0..size {
        let word = r.string()?;
        let count = r.u64()?;
        entries.push((word, count));
    }
    let vocab = Vocabulary::from_parts(entries, total_tokens, config.min_count)
        .map_err(|e| r.fail(e.to_string()))?;
    let dim = r.u64()? as usize;
    if dim == 0 {
        return Err(r.fail("zero dimension"));
    }
    let vectors = r.f32s(size * dim)?;
    if let Some(i) = vectors.iter().position(|x| !x.is_finite()) {
        return Err(r.fail(format!("non-finite vector entry for word `{}`", vocab.word(i / dim))));
    }
    let subwords = match r.u8()? {
        0 => None,
        1 => {
            let ngram_min = r.u32()? as usize;
            let ngram_max = r.u32()? as usize;
            let buckets = r.u64()? as usize;
            let vectors = r.f32s(buckets * dim)?;
            if let Some(i) = vectors.iter().position(|x| !x.is_finite()) {
                return Err(r.fail(format!("non-finite entry in n-gram bucket {}", i / dim)));
            }
            Some(SubwordTable {
                ngram_min,
                ngram_max,
                buckets,
                vectors,
            })
        }
        flag => return Err(r.fail(format!("bad subword flag {flag}"))),
    };
    let mut rest = [0u8; 1];
    if r.inner.read(&mut rest).map_err(|e| r.wrap(e))? != 0 {
        return Err(r.fail("trailing data after model"));
    }
    Ok(EmbeddingModel {
        region,
        algorithm,
        config,
        vocab,
        dim,
        vectors,
        subwords,
    })
}

/// Region and algorithm come from a `<region>.<algorithm>.vec` file name when
/// it has that shape; counts are recorded as zero.
fn load_text(path: &Path) -> Result<EmbeddingModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let fail = |m: String| Error::model(path, m);
    let header = lines
        .next()
        .ok_or_else(|| fail("empty file".into()))?
        .map_err(|e| Error::io(path, e))?;
    let mut parts = header.split_whitespace();
    let (Some(size), Some(dim), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(fail(format!("bad header `{header}`")));
    };
    let size: usize = size.parse().map_err(|_| fail(format!("bad vocab size `{size}`")))?;
    let dim: usize = dim.parse().map_err(|_| fail(format!("bad dimension `{dim}`")))?;
    if dim == 0 {
        return Err(fail("zero dimension".into()));
    }

    let mut entries = Vec::with_capacity(size.min(1 << 24));
    let mut vectors = Vec::with_capacity(size.saturating_mul(dim).min(1 << 28));
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("non-empty line").to_string();
        let before = vectors.len();
        for f in fields {
            let x: f32 = f
                .parse()
                .map_err(|_| fail(format!("bad number `{f}` for word `{word}`")))?;
            if !x.is_finite() {
                return Err(fail(format!("non-finite vector entry for word `{word}`")));
            }
            vectors.push(x);
        }
        if vectors.len() - before != dim {
            return Err(fail(format!(
                "word `{word}` has {} components, expected {dim}",
                vectors.len() - before
            )));
        }
        entries.push((word, 0));
    }
    if entries.len() != size {
        return Err(fail(format!(
            "truncated file: header promises {size} words, found {}",
            entries.len()
        )));
    }

    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let (region, algorithm) = match stem.split_once('.') {
        Some((region, alg)) => match alg.parse::<Algorithm>() {
            Ok(a) => (region.to_string(), a),
            Err(_) => (stem.to_string(), Algorithm::SkipGram),
        },
        None => (stem.to_string(), Algorithm::SkipGram),
    };
    let mut config = TrainConfig::new(algorithm);
    config.dim = dim;
    let vocab = Vocabulary::from_parts(entries, 0, 0).map_err(|e| fail(e.to_string()))?;
    Ok(EmbeddingModel {
        region,
        algorithm,
        config,
        vocab,
        dim,
        vectors,
        subwords: None,
    })
}
