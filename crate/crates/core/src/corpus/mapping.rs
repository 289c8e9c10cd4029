//! Which corpus labels each query category matches.
//!
//! Corpus labels are Rico component labels (`Text`, `Image`, `Slider`, ...)
//! and icon classes written `icon:<class>`. A pattern ending in `*` matches
//! any label with that prefix, so `icon:*` covers every icon class.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::category::{Category, QueryCategory, QUERY_CATEGORY_COUNT};
use crate::error::{Error, Result};

const DEFAULT_MAPPING: &str = include_str!("../../data/category_mapping.json");

/// A set of query categories as a bit mask over [`QueryCategory::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategorySet(u32);

impl CategorySet {
    pub const EMPTY: CategorySet = CategorySet(0);

    pub fn from_bits(bits: u32) -> Option<Self> {
        (bits >> QUERY_CATEGORY_COUNT == 0).then_some(Self(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn insert(&mut self, c: QueryCategory) {
        self.0 |= 1 << c.index();
    }

    pub fn contains(self, c: QueryCategory) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn intersects(self, other: CategorySet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = QueryCategory> {
        QueryCategory::all().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<QueryCategory> for CategorySet {
    fn from_iter<I: IntoIterator<Item = QueryCategory>>(iter: I) -> Self {
        let mut s = CategorySet::EMPTY;
        for c in iter {
            s.insert(c);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Pattern {
    Exact(String),
    Prefix(String),
}

impl Pattern {
    fn parse(s: &str) -> Self {
        match s.strip_suffix('*') {
            Some(prefix) => Pattern::Prefix(prefix.to_string()),
            None => Pattern::Exact(s.to_string()),
        }
    }

    fn matches(&self, label: &str) -> bool {
        match self {
            Pattern::Exact(e) => e == label,
            Pattern::Prefix(p) => label.starts_with(p.as_str()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct MappingFile(BTreeMap<String, Vec<String>>);

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryMapping {
    rules: Vec<(QueryCategory, Vec<Pattern>)>,
}

impl CategoryMapping {
    /// Parses `{"<category>": ["<label or prefix*>", ...], ...}`. Every one
    /// of the 23 primitives must appear; `text_button` is optional.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MappingFile = serde_json::from_str(text)?;
        let mut rules = Vec::new();
        for (name, labels) in file.0 {
            let category: QueryCategory = name
                .parse()
                .map_err(|_| Error::Format(format!("mapping names unknown category `{name}`")))?;
            rules.push((category, labels.iter().map(|l| Pattern::parse(l)).collect()));
        }
        rules.sort_by_key(|(c, _)| c.index());
        for c in Category::ALL {
            if !rules.iter().any(|(r, _)| *r == QueryCategory::Primitive(c)) {
                return Err(Error::Format(format!("mapping has no entry for `{c}`")));
            }
        }
        Ok(Self { rules })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = MappingFile(
            self.rules
                .iter()
                .map(|(c, pats)| {
                    let labels = pats
                        .iter()
                        .map(|p| match p {
                            Pattern::Exact(e) => e.clone(),
                            Pattern::Prefix(p) => format!("{p}*"),
                        })
                        .collect();
                    (c.name().to_string(), labels)
                })
                .collect(),
        );
        serde_json::to_string_pretty(&file).expect("mapping serializes")
    }

    /// Every category whose match set contains `label`. Unknown labels give
    /// the empty set.
    pub fn map_label(&self, label: &str) -> CategorySet {
        self.rules
            .iter()
            .filter(|(_, pats)| pats.iter().any(|p| p.matches(label)))
            .map(|(c, _)| *c)
            .collect()
    }
}

impl Default for CategoryMapping {
    fn default() -> Self {
        Self::from_json(DEFAULT_MAPPING).expect("shipped mapping is valid")
    }
}
