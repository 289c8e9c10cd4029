//! `PSDX1` index files.
//!
//! ```text
//! magic     5 bytes "PSDX1"
//! length    u64 body length
//! body      build info, label table, idf table, screens, postings
//! checksum  u64 FNV-1a over the body
//! ```
//!
//! All integers little-endian, strings as u32 length + UTF-8, floats as raw
//! IEEE-754 bits so a load reproduces every value exactly.

use std::path::Path;

use super::{BuildInfo, CategorySet, CorpusIndex, IndexedElement, IndexedScreen, INDEX_VERSION};
use crate::category::QUERY_CATEGORY_COUNT;
use crate::error::{Error, Result};
use crate::geometry::BBox;

pub const INDEX_MAGIC: &[u8; 5] = b"PSDX1";

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend((v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend(v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend(v.to_bits().to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend(s.as_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("index body truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Format("index string is not UTF-8".into()))
    }
    /// Element count guard: each counted item needs at least `min_bytes`.
    fn count(&mut self, min_bytes: usize) -> Result<usize> {
        let n = self.u32()?;
        if n.saturating_mul(min_bytes) > self.bytes.len() - self.pos {
            return Err(Error::Format(format!("count {n} exceeds remaining index bytes")));
        }
        Ok(n)
    }
}

pub fn encode_index(index: &CorpusIndex) -> Vec<u8> {
    let mut w = Writer::default();
    let info = index.info();
    for v in [
        info.screens,
        info.elements,
        info.invisible_elements,
        info.unmapped_elements,
        info.skipped_files,
    ] {
        w.u64(v);
    }
    w.u32(info.unmapped_labels.len());
    for l in &info.unmapped_labels {
        w.str(l);
    }
    w.u32(index.labels().len());
    for l in index.labels() {
        w.str(l);
    }
    for &v in index.idf_table() {
        w.f64(v);
    }
    w.u32(index.screens().len());
    for s in index.screens() {
        w.str(&s.id);
        match &s.source_app {
            Some(app) => {
                w.u8(1);
                w.str(app);
            }
            None => w.u8(0),
        }
        w.u32(s.elements.len());
        for e in &s.elements {
            w.u32(e.label as usize);
            w.u32(e.categories.bits() as usize);
            for v in [e.bbox.cx, e.bbox.cy, e.bbox.w, e.bbox.h] {
                w.f64(v);
            }
        }
    }
    for list in &index.postings {
        w.u32(list.len());
        for &i in list {
            w.u32(i as usize);
        }
    }
    let body = w.0;
    let mut out = Vec::with_capacity(body.len() + 21);
    out.extend(INDEX_MAGIC);
    out.extend((body.len() as u64).to_le_bytes());
    out.extend(&body);
    out.extend(fnv1a(&body).to_le_bytes());
    out
}

pub fn decode_index(bytes: &[u8]) -> Result<CorpusIndex> {
    if bytes.len() < INDEX_MAGIC.len() {
        return Err(Error::Format("file too short for an index header".into()));
    }
    let magic = &bytes[..INDEX_MAGIC.len()];
    if magic != INDEX_MAGIC {
        if magic.starts_with(b"PSDX") {
            return Err(Error::VersionMismatch {
                expected: INDEX_VERSION.to_string(),
                found: String::from_utf8_lossy(magic).into_owned(),
            });
        }
        return Err(Error::Format("not an index file (bad magic)".into()));
    }
    let rest = &bytes[INDEX_MAGIC.len()..];
    if rest.len() < 16 {
        return Err(Error::Format("index file truncated".into()));
    }
    let body_len = u64::from_le_bytes(rest[..8].try_into().unwrap());
    if body_len != (rest.len() - 16) as u64 {
        return Err(Error::Format(format!(
            "index declares {body_len} body bytes, file holds {}",
            rest.len().saturating_sub(16)
        )));
    }
    let body = &rest[8..8 + body_len as usize];
    let checksum = u64::from_le_bytes(rest[8 + body_len as usize..].try_into().unwrap());
    if fnv1a(body) != checksum {
        return Err(Error::Format("index checksum mismatch".into()));
    }

    let mut r = Reader { bytes: body, pos: 0 };
    let mut info = BuildInfo {
        version: INDEX_VERSION.to_string(),
        screens: r.u64()?,
        elements: r.u64()?,
        invisible_elements: r.u64()?,
        unmapped_elements: r.u64()?,
        skipped_files: r.u64()?,
        unmapped_labels: Vec::new(),
    };
    let n = r.count(4)?;
    for _ in 0..n {
        info.unmapped_labels.push(r.str()?);
    }
    let n = r.count(4)?;
    let labels = (0..n).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    let mut idf = [0.0; QUERY_CATEGORY_COUNT];
    for v in &mut idf {
        *v = r.f64()?;
    }
    let n = r.count(9)?;
    let mut screens = Vec::with_capacity(n);
    for _ in 0..n {
        let id = r.str()?;
        let source_app = match r.u8()? {
            0 => None,
            1 => Some(r.str()?),
            other => return Err(Error::Format(format!("bad app flag {other}"))),
        };
        let m = r.count(40)?;
        let mut elements = Vec::with_capacity(m);
        for _ in 0..m {
            let label = r.u32()? as u32;
            let categories = CategorySet::from_bits(r.u32()? as u32)
                .ok_or_else(|| Error::Format("category mask out of range".into()))?;
            let bbox = BBox::new(r.f64()?, r.f64()?, r.f64()?, r.f64()?);
            elements.push(IndexedElement {
                label,
                categories,
                bbox,
            });
        }
        screens.push(IndexedScreen {
            id,
            source_app,
            elements,
        });
    }
    let mut postings = Vec::with_capacity(QUERY_CATEGORY_COUNT);
    for _ in 0..QUERY_CATEGORY_COUNT {
        let n = r.count(4)?;
        postings.push((0..n).map(|_| r.u32().map(|v| v as u32)).collect::<Result<Vec<_>>>()?);
    }
    if r.pos != body.len() {
        return Err(Error::Format("trailing bytes in index body".into()));
    }
    CorpusIndex::from_parts(screens, labels, postings, idf, info)
}

/// Writes to a sibling temp file and renames, so readers never observe a
/// half-written index.
pub fn save_index(index: &CorpusIndex, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, encode_index(index)).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_index(path: impl AsRef<Path>) -> Result<CorpusIndex> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_index(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CategoryMapping, ScreenDocument, ScreenElement};

    fn sample() -> CorpusIndex {
        let docs = vec![
            ScreenDocument {
                id: "one".into(),
                source_app: Some("com.a".into()),
                elements: vec![
                    ScreenElement {
                        label: "Slider".into(),
                        bbox: BBox::new(0.3, 0.4, 0.5, 0.05),
                        visible: true,
                    },
                    ScreenElement {
                        label: "icon:share".into(),
                        bbox: BBox::new(0.9, 0.05, 0.1, 1.0 / 3.0),
                        visible: true,
                    },
                    ScreenElement {
                        label: "Web View".into(),
                        bbox: BBox::new(0.5, 0.5, 1.0, 1.0),
                        visible: true,
                    },
                ],
            },
            ScreenDocument {
                id: "two".into(),
                source_app: None,
                elements: vec![],
            },
        ];
        CorpusIndex::build(docs, &CategoryMapping::default()).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let idx = sample();
        let bytes = encode_index(&idx);
        let back = decode_index(&bytes).unwrap();
        assert_eq!(back, idx);
        for (a, b) in back.idf_table().iter().zip(idx.idf_table()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(encode_index(&back), bytes);
    }

    #[test]
    fn truncated_or_corrupt() {
        let bytes = encode_index(&sample());
        for cut in [0, 4, 5, 12, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(decode_index(&bytes[..cut]), Err(Error::Format(_))), "cut {cut}");
        }
        let mut flipped = bytes.clone();
        flipped[30] ^= 0x40;
        assert!(matches!(decode_index(&flipped), Err(Error::Format(_))));
    }

    #[test]
    fn older_version_named() {
        let mut bytes = encode_index(&sample());
        bytes[4] = b'0';
        match decode_index(&bytes) {
            Err(Error::VersionMismatch { expected, found }) => {
                assert_eq!(expected, "PSDX1");
                assert_eq!(found, "PSDX0");
                let msg = Error::VersionMismatch { expected, found }.to_string();
                assert!(msg.contains("PSDX0") && msg.contains("PSDX1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.psdx");
        let idx = sample();
        save_index(&idx, &path).unwrap();
        assert_eq!(load_index(&path).unwrap(), idx);
        assert!(!path.with_extension("tmp").exists());
    }
}
