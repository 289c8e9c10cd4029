//! Interactive canvas state and its conversion into a search query.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::category::{Category, QueryCategory};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::stroke::{Stroke, StrokeSequence};

pub const CANVAS_WIDTH: f64 = 450.0;
pub const CANVAS_HEIGHT: f64 = 800.0;

/// Minimum fraction of a squiggle's area inside a square for the pair to
/// fuse into a text button.
pub const FUSION_CONTAINMENT: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedElement {
    pub category: Category,
    /// Tight bounds of `strokes` in canvas units.
    pub bbox: BBox,
    pub strokes: StrokeSequence,
}

/// Result of an editing action that may have nothing to act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Edit {
    Applied,
    NothingToUndo,
    NothingToRedo,
    NothingToRemove,
}

impl Edit {
    pub fn is_noop(self) -> bool {
        self != Edit::Applied
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanvasState {
    committed: Vec<PlacedElement>,
    current: StrokeSequence,
    redo: Vec<Stroke>,
    width: f64,
    height: f64,
}

impl Default for CanvasState {
    fn default() -> Self {
        Self::new(CANVAS_WIDTH, CANVAS_HEIGHT)
    }
}

impl CanvasState {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            committed: Vec::new(),
            current: StrokeSequence::default(),
            redo: Vec::new(),
            width,
            height,
        }
    }

    pub fn committed(&self) -> &[PlacedElement] {
        &self.committed
    }

    pub fn current(&self) -> &StrokeSequence {
        &self.current
    }

    pub fn redo_depth(&self) -> usize {
        self.redo.len()
    }

    pub fn dims(&self) -> (f64, f64) {
        (self.width, self.height)
    }

    pub fn add_stroke(&mut self, stroke: Stroke) {
        self.current.push(stroke);
        self.redo.clear();
    }

    pub fn undo_stroke(&mut self) -> Edit {
        match self.current.pop() {
            Some(s) => {
                self.redo.push(s);
                Edit::Applied
            }
            None => Edit::NothingToUndo,
        }
    }

    pub fn redo_stroke(&mut self) -> Edit {
        match self.redo.pop() {
            Some(s) => {
                self.current.push(s);
                Edit::Applied
            }
            None => Edit::NothingToRedo,
        }
    }

    /// Drops the most recent element. Its strokes are discarded; the stroke
    /// redo stack is left alone.
    pub fn remove_last_icon(&mut self) -> Edit {
        match self.committed.pop() {
            Some(_) => Edit::Applied,
            None => Edit::NothingToRemove,
        }
    }

    /// Turns the strokes in progress into an element of `category`.
    pub fn commit_element(&mut self, category: Category) -> Result<&PlacedElement> {
        let bounds = self
            .current
            .bounds()
            .ok_or_else(|| Error::InvalidState("no strokes to commit".into()))?;
        let clamp = |v: f64, max: f64| v.clamp(0.0, max);
        let bbox = BBox::from_corners(
            clamp(bounds.min.x, self.width),
            clamp(bounds.min.y, self.height),
            clamp(bounds.max.x, self.width),
            clamp(bounds.max.y, self.height),
        );
        self.committed.push(PlacedElement {
            category,
            bbox,
            strokes: std::mem::take(&mut self.current),
        });
        self.redo.clear();
        Ok(self.committed.last().unwrap())
    }

    /// Places an element directly, as when replaying a session snapshot.
    pub fn place(&mut self, category: Category, bbox: BBox) {
        self.committed.push(PlacedElement {
            category,
            bbox,
            strokes: StrokeSequence::default(),
        });
    }

    pub fn clear(&mut self) {
        *self = Self::new(self.width, self.height);
    }

    pub fn build_query(&self) -> Result<SearchQuery> {
        build_query(&self.committed, self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compound {
    TextButton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryElement {
    pub category: Category,
    /// Normalized to the canvas.
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compound: Option<Compound>,
}

impl QueryElement {
    pub fn new(category: Category, bbox: BBox) -> Self {
        Self {
            category,
            bbox,
            compound: None,
        }
    }

    /// What screen elements this element can match.
    pub fn query_category(&self) -> QueryCategory {
        match self.compound {
            Some(Compound::TextButton) => QueryCategory::TextButton,
            None => QueryCategory::Primitive(self.category),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub elements: Vec<QueryElement>,
}

impl SearchQuery {
    pub fn new(elements: Vec<QueryElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyQuery);
        }
        Ok(Self { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Normalizes element boxes by the canvas size and fuses each square with
/// the squiggle most contained in it (at least `FUSION_CONTAINMENT` of the
/// squiggle's area; ties go to the earlier squiggle) into a text button
/// carrying the square's box. Elements keep commit order; a fused squiggle
/// disappears.
pub fn build_query(elements: &[PlacedElement], width: f64, height: f64) -> Result<SearchQuery> {
    if elements.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let boxes: Vec<BBox> = elements
        .iter()
        .map(|e| e.bbox.normalized(width, height))
        .collect();

    let mut candidates = Vec::new();
    for (sq, e) in elements.iter().enumerate() {
        if e.category != Category::Square {
            continue;
        }
        for (sg, f) in elements.iter().enumerate() {
            if f.category != Category::Squiggle {
                continue;
            }
            let frac = boxes[sg].contained_fraction(&boxes[sq]);
            if frac >= FUSION_CONTAINMENT {
                candidates.push((frac, sg, sq));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut fused_square = vec![false; elements.len()];
    let mut fused_squiggle = vec![false; elements.len()];
    for (_, sg, sq) in candidates {
        if !fused_square[sq] && !fused_squiggle[sg] {
            fused_square[sq] = true;
            fused_squiggle[sg] = true;
        }
    }

    let out = elements
        .iter()
        .zip(&boxes)
        .enumerate()
        .filter(|(i, _)| !fused_squiggle[*i])
        .map(|(i, (e, b))| QueryElement {
            category: e.category,
            bbox: *b,
            compound: fused_square[i].then_some(Compound::TextButton),
        })
        .collect();
    SearchQuery::new(out)
}

/// A committed element as written in a session snapshot, in canvas units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotElement {
    pub category: Category,
    /// `[cx, cy, w, h]`.
    pub bbox: [f64; 4],
}

/// One line of a session snapshot file: the committed elements of a session
/// and, for evaluation, the screen the user was looking for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default = "default_canvas")]
    pub canvas: [f64; 2],
    pub elements: Vec<SnapshotElement>,
}

fn default_canvas() -> [f64; 2] {
    [CANVAS_WIDTH, CANVAS_HEIGHT]
}

impl SessionSnapshot {
    pub fn from_canvas(state: &CanvasState, target: Option<String>) -> Self {
        let (w, h) = state.dims();
        Self {
            target,
            canvas: [w, h],
            elements: state
                .committed()
                .iter()
                .map(|e| SnapshotElement {
                    category: e.category,
                    bbox: [e.bbox.cx, e.bbox.cy, e.bbox.w, e.bbox.h],
                })
                .collect(),
        }
    }

    pub fn to_canvas(&self) -> CanvasState {
        let mut state = CanvasState::new(self.canvas[0], self.canvas[1]);
        for e in &self.elements {
            let [cx, cy, w, h] = e.bbox;
            state.place(e.category, BBox::new(cx, cy, w, h));
        }
        state
    }

    pub fn query(&self) -> Result<SearchQuery> {
        self.to_canvas().build_query()
    }
}

/// Parses newline-delimited snapshots, skipping blank lines.
pub fn parse_snapshots(text: &str) -> Result<Vec<SessionSnapshot>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))
        })
        .collect()
}
