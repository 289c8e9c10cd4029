//! Screen corpus ingestion and the query-ready index.

mod hierarchy;
mod index_file;
mod mapping;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

pub use hierarchy::{
    parse_hierarchy, to_hierarchy_json, ScreenDocument, ScreenElement, DEFAULT_SCREEN_HEIGHT,
    DEFAULT_SCREEN_WIDTH,
};
pub use index_file::{decode_index, encode_index, load_index, save_index, INDEX_MAGIC};
pub use mapping::{CategoryMapping, CategorySet};

use crate::category::{QueryCategory, QUERY_CATEGORY_COUNT};
use crate::error::{Error, Result};
use crate::geometry::BBox;

pub const INDEX_VERSION: &str = "PSDX1";

/// Occurrence-frequency weight: `ln(N / (1 + n)) + 1` for a category present
/// on `n` of `N` screens.
pub fn idf(screens: usize, containing: usize) -> f64 {
    (screens as f64 / (1.0 + containing as f64)).ln() + 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexedElement {
    /// Position in [`CorpusIndex::labels`].
    pub label: u32,
    pub categories: CategorySet,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedScreen {
    pub id: String,
    pub source_app: Option<String>,
    pub elements: Vec<IndexedElement>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildInfo {
    pub version: String,
    pub screens: u64,
    pub elements: u64,
    pub invisible_elements: u64,
    /// Visible elements whose label maps to no category.
    pub unmapped_elements: u64,
    /// Distinct labels among `unmapped_elements`, sorted.
    pub unmapped_labels: Vec<String>,
    pub skipped_files: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusIndex {
    screens: Vec<IndexedScreen>,
    labels: Vec<String>,
    /// Ascending screen positions per query category.
    postings: Vec<Vec<u32>>,
    idf: [f64; QUERY_CATEGORY_COUNT],
    info: BuildInfo,
}

impl CorpusIndex {
    /// Indexes visible elements whose label maps to at least one category.
    pub fn build(docs: Vec<ScreenDocument>, mapping: &CategoryMapping) -> Result<Self> {
        Self::build_with_skipped(docs, mapping, 0)
    }

    fn build_with_skipped(
        docs: Vec<ScreenDocument>,
        mapping: &CategoryMapping,
        skipped_files: u64,
    ) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut seen_ids = HashSet::new();
        let mut labels: Vec<String> = Vec::new();
        let mut label_ids: HashMap<String, u32> = HashMap::new();
        let mut label_sets: HashMap<String, CategorySet> = HashMap::new();
        let mut unmapped: BTreeMap<String, ()> = BTreeMap::new();
        let mut info = BuildInfo {
            version: INDEX_VERSION.to_string(),
            skipped_files,
            ..Default::default()
        };

        let mut screens = Vec::with_capacity(docs.len());
        for doc in docs {
            if !seen_ids.insert(doc.id.clone()) {
                return Err(Error::invalid(format!("duplicate screen id `{}`", doc.id)));
            }
            let mut elements = Vec::new();
            for e in doc.elements {
                if !e.visible {
                    info.invisible_elements += 1;
                    continue;
                }
                let set = *label_sets
                    .entry(e.label.clone())
                    .or_insert_with(|| mapping.map_label(&e.label));
                if set.is_empty() {
                    info.unmapped_elements += 1;
                    unmapped.insert(e.label, ());
                    continue;
                }
                let id = *label_ids.entry(e.label.clone()).or_insert_with(|| {
                    labels.push(e.label.clone());
                    (labels.len() - 1) as u32
                });
                elements.push(IndexedElement {
                    label: id,
                    categories: set,
                    bbox: e.bbox.clamped(),
                });
            }
            info.elements += elements.len() as u64;
            screens.push(IndexedScreen {
                id: doc.id,
                source_app: doc.source_app,
                elements,
            });
        }
        info.screens = screens.len() as u64;
        info.unmapped_labels = unmapped.into_keys().collect();

        let postings = compute_postings(&screens);
        let idf = compute_idf(screens.len(), &postings);
        Ok(Self {
            screens,
            labels,
            postings,
            idf,
            info,
        })
    }

    pub(crate) fn from_parts(
        screens: Vec<IndexedScreen>,
        labels: Vec<String>,
        postings: Vec<Vec<u32>>,
        idf: [f64; QUERY_CATEGORY_COUNT],
        info: BuildInfo,
    ) -> Result<Self> {
        if postings != compute_postings(&screens) {
            return Err(Error::Format("postings disagree with screens".into()));
        }
        if screens
            .iter()
            .flat_map(|s| &s.elements)
            .any(|e| e.label as usize >= labels.len())
        {
            return Err(Error::Format("element label out of range".into()));
        }
        Ok(Self {
            screens,
            labels,
            postings,
            idf,
            info,
        })
    }

    pub fn screens(&self) -> &[IndexedScreen] {
        &self.screens
    }

    pub fn len(&self) -> usize {
        self.screens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.screens.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, element: &IndexedElement) -> &str {
        &self.labels[element.label as usize]
    }

    pub fn posting(&self, c: QueryCategory) -> &[u32] {
        &self.postings[c.index()]
    }

    pub fn idf(&self, c: QueryCategory) -> f64 {
        self.idf[c.index()]
    }

    pub fn idf_table(&self) -> &[f64; QUERY_CATEGORY_COUNT] {
        &self.idf
    }

    pub fn info(&self) -> &BuildInfo {
        &self.info
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.screens.iter().position(|s| s.id == id)
    }

    pub fn screen(&self, id: &str) -> Option<&IndexedScreen> {
        self.position(id).map(|i| &self.screens[i])
    }
}

fn compute_postings(screens: &[IndexedScreen]) -> Vec<Vec<u32>> {
    let mut postings = vec![Vec::new(); QUERY_CATEGORY_COUNT];
    for (i, s) in screens.iter().enumerate() {
        let present = s
            .elements
            .iter()
            .fold(0u32, |acc, e| acc | e.categories.bits());
        for (c, list) in postings.iter_mut().enumerate() {
            if present & (1 << c) != 0 {
                list.push(i as u32);
            }
        }
    }
    postings
}

fn compute_idf(screens: usize, postings: &[Vec<u32>]) -> [f64; QUERY_CATEGORY_COUNT] {
    let mut out = [0.0; QUERY_CATEGORY_COUNT];
    for (slot, list) in out.iter_mut().zip(postings) {
        *slot = idf(screens, list.len());
    }
    out
}

/// Reads every `*.json` hierarchy under `dir` (sorted by file name; id =
/// file stem). Files that fail to parse are skipped and counted.
pub fn ingest(dir: impl AsRef<Path>, mapping: &CategoryMapping) -> Result<CorpusIndex> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "json") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();

    let mut docs = Vec::with_capacity(files.len());
    let mut skipped = 0;
    for path in files {
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
            skipped += 1;
            continue;
        };
        let parsed = std::fs::read_to_string(&path)
            .map_err(|e| Error::io(&path, e))
            .and_then(|text| parse_hierarchy(id, &text));
        match parsed {
            Ok(doc) => docs.push(doc),
            Err(_) => skipped += 1,
        }
    }
    CorpusIndex::build_with_skipped(docs, mapping, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::Category;

    fn el(label: &str, visible: bool) -> ScreenElement {
        ScreenElement {
            label: label.into(),
            bbox: BBox::new(0.5, 0.5, 0.2, 0.1),
            visible,
        }
    }

    fn doc(id: &str, labels: &[&str]) -> ScreenDocument {
        ScreenDocument {
            id: id.into(),
            elements: labels.iter().map(|l| el(l, true)).collect(),
            source_app: None,
        }
    }

    const SLIDER: QueryCategory = QueryCategory::Primitive(Category::Slider);

    #[test]
    fn idf_values() {
        let m = CategoryMapping::default();
        let idx = CorpusIndex::build(
            vec![doc("a", &["Slider"]), doc("b", &["Slider", "Text"]), doc("c", &["Slider"])],
            &m,
        )
        .unwrap();
        assert!((idx.idf(SLIDER) - ((3.0f64 / 4.0).ln() + 1.0)).abs() < 1e-15);
        assert!((idx.idf(SLIDER) - 0.7123).abs() < 1e-4);
        let star = QueryCategory::Primitive(Category::Star);
        assert!((idx.idf(star) - 2.0986).abs() < 1e-4);
        assert!(idx.posting(star).is_empty());
        assert_eq!(idx.posting(SLIDER), &[0, 1, 2]);
        assert_eq!(idx.posting(QueryCategory::Primitive(Category::Squiggle)), &[1]);
    }

    #[test]
    fn invisible_and_unmapped_are_excluded() {
        let m = CategoryMapping::default();
        let mut d = doc("a", &["Text", "Web View", "Web View", "Advertisement"]);
        d.elements.push(el("Slider", false));
        let idx = CorpusIndex::build(vec![d, doc("b", &[])], &m).unwrap();
        assert_eq!(idx.screens()[0].elements.len(), 1);
        assert!(idx.posting(SLIDER).is_empty());
        let info = idx.info();
        assert_eq!(info.invisible_elements, 1);
        assert_eq!(info.unmapped_elements, 3);
        assert_eq!(info.unmapped_labels, vec!["Advertisement", "Web View"]);
        // Empty screens stay in the index.
        assert_eq!(idx.len(), 2);
    }

    #[test]
    fn empty_and_duplicate() {
        let m = CategoryMapping::default();
        assert!(matches!(CorpusIndex::build(vec![], &m), Err(Error::EmptyCorpus)));
        assert!(CorpusIndex::build(vec![doc("a", &[]), doc("a", &[])], &m).is_err());
    }

    #[test]
    fn idf_is_decreasing() {
        for n in 0..50 {
            assert!(idf(50, n) > idf(50, n + 1));
            assert!(idf(50, n) > 0.0);
        }
    }

    #[test]
    fn ingest_directory() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        std::fs::write(
            p.join("b.json"),
            r#"{"root": {"componentLabel": "Slider", "bounds": [0, 0, 100, 100]}}"#,
        )
        .unwrap();
        std::fs::write(
            p.join("a.json"),
            r#"{"root": {"componentLabel": "Text", "bounds": [0, 0, 100, 100]}}"#,
        )
        .unwrap();
        std::fs::write(p.join("broken.json"), "{").unwrap();
        std::fs::write(p.join("a.thumb"), [0u8; 4]).unwrap();
        let idx = ingest(p, &CategoryMapping::default()).unwrap();
        let ids: Vec<_> = idx.screens().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b"]);
        assert_eq!(idx.info().skipped_files, 1);

        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(
            ingest(empty.path(), &CategoryMapping::default()),
            Err(Error::EmptyCorpus)
        ));
        assert!(matches!(
            ingest(p.join("missing"), &CategoryMapping::default()),
            Err(Error::Io { .. })
        ));
    }
}
