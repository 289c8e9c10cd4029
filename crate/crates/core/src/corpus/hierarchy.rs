//! Screen hierarchy files.
//!
//! One JSON document per screen, named `<id>.json`:
//!
//! ```json
//! {
//!   "app": "com.example.notes",
//!   "width": 1440, "height": 2560,
//!   "root": {
//!     "componentLabel": "Card", "bounds": [0, 84, 1440, 600], "visible": true,
//!     "children": [
//!       { "componentLabel": "Icon", "iconClass": "share", "bounds": [1300, 100, 1400, 200] }
//!     ]
//!   }
//! }
//! ```
//!
//! `width`/`height` default to 1440x2560. A node's corpus label is
//! `icon:<iconClass>` when an icon class is present, else its
//! `componentLabel`; nodes with neither are structural and contribute no
//! element. Visibility (`visible` or `visible-to-user`) defaults to true and
//! is inherited: children of a hidden node are hidden. The root may also be
//! nested as `activity.root`, as in raw Rico view hierarchies.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::BBox;

pub const DEFAULT_SCREEN_WIDTH: f64 = 1440.0;
pub const DEFAULT_SCREEN_HEIGHT: f64 = 2560.0;

/// Nesting deeper than this is treated as malformed.
const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenElement {
    pub label: String,
    /// Normalized to the screen, see [`BBox::normalized`].
    pub bbox: BBox,
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenDocument {
    pub id: String,
    pub elements: Vec<ScreenElement>,
    pub source_app: Option<String>,
}

fn number(v: &Value, key: &str) -> Result<Option<f64>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(n) => n
            .as_f64()
            .filter(|x| x.is_finite())
            .map(Some)
            .ok_or_else(|| Error::Format(format!("`{key}` is not a number"))),
    }
}

fn visibility(node: &Map<String, Value>) -> Result<bool> {
    match node.get("visible").or_else(|| node.get("visible-to-user")) {
        None | Some(Value::Null) => Ok(true),
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(Error::Format("visibility is not a boolean".into())),
    }
}

fn label(node: &Map<String, Value>) -> Option<String> {
    if let Some(class) = node.get("iconClass").and_then(Value::as_str) {
        if !class.is_empty() {
            return Some(format!("icon:{class}"));
        }
    }
    node.get("componentLabel")
        .and_then(Value::as_str)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

fn walk(
    node: &Value,
    parent_visible: bool,
    dims: (f64, f64),
    depth: usize,
    out: &mut Vec<ScreenElement>,
) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::Format("hierarchy nested too deeply".into()));
    }
    let node = node
        .as_object()
        .ok_or_else(|| Error::Format("hierarchy node is not an object".into()))?;
    let visible = parent_visible && visibility(node)?;
    if let Some(label) = label(node) {
        let bounds = node
            .get("bounds")
            .and_then(Value::as_array)
            .filter(|b| b.len() == 4)
            .ok_or_else(|| Error::Format(format!("`{label}` node lacks 4-value bounds")))?;
        let mut c = [0.0; 4];
        for (slot, v) in c.iter_mut().zip(bounds) {
            *slot = v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Format("bounds are not numbers".into()))?;
        }
        let (w, h) = dims;
        let bbox = BBox::from_corners(
            c[0].clamp(0.0, w),
            c[1].clamp(0.0, h),
            c[2].clamp(0.0, w),
            c[3].clamp(0.0, h),
        )
        .normalized(w, h);
        out.push(ScreenElement {
            label,
            bbox,
            visible,
        });
    }
    match node.get("children") {
        None | Some(Value::Null) => {}
        Some(Value::Array(children)) => {
            for child in children {
                walk(child, visible, dims, depth + 1, out)?;
            }
        }
        Some(_) => return Err(Error::Format("`children` is not a list".into())),
    }
    Ok(())
}

/// Parses one hierarchy document. Elements come out in pre-order.
pub fn parse_hierarchy(id: &str, text: &str) -> Result<ScreenDocument> {
    let doc: Value = serde_json::from_str(text)?;
    let width = number(&doc, "width")?.unwrap_or(DEFAULT_SCREEN_WIDTH);
    let height = number(&doc, "height")?.unwrap_or(DEFAULT_SCREEN_HEIGHT);
    if width <= 0.0 || height <= 0.0 {
        return Err(Error::Format(format!("screen dimensions {width}x{height} are not positive")));
    }
    let root = doc
        .get("root")
        .or_else(|| doc.get("activity").and_then(|a| a.get("root")))
        .ok_or_else(|| Error::Format("document has no `root` node".into()))?;
    let mut elements = Vec::new();
    walk(root, true, (width, height), 0, &mut elements)?;
    Ok(ScreenDocument {
        id: id.to_string(),
        elements,
        source_app: doc.get("app").and_then(Value::as_str).map(str::to_string),
    })
}

/// Writes a document back as a flat hierarchy (all elements children of an
/// unlabeled root) with pixel bounds on a `width` x `height` screen.
pub fn to_hierarchy_json(doc: &ScreenDocument, width: f64, height: f64) -> String {
    let children: Vec<Value> = doc
        .elements
        .iter()
        .map(|e| {
            let b = e.bbox;
            let bounds = [
                b.left() * width,
                b.top() * height,
                b.right() * width,
                b.bottom() * height,
            ];
            let mut node = Map::new();
            match e.label.strip_prefix("icon:") {
                Some(class) => {
                    node.insert("componentLabel".into(), json!("Icon"));
                    node.insert("iconClass".into(), json!(class));
                }
                None => {
                    node.insert("componentLabel".into(), json!(e.label));
                }
            }
            node.insert("bounds".into(), json!(bounds));
            if !e.visible {
                node.insert("visible".into(), json!(false));
            }
            Value::Object(node)
        })
        .collect();
    let mut root = Map::new();
    if let Some(app) = &doc.source_app {
        root.insert("app".into(), json!(app));
    }
    root.insert("width".into(), json!(width));
    root.insert("height".into(), json!(height));
    root.insert(
        "root".into(),
        json!({ "bounds": [0.0, 0.0, width, height], "children": children }),
    );
    serde_json::to_string_pretty(&Value::Object(root)).expect("hierarchy serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "app": "com.example",
        "width": 1000, "height": 2000,
        "root": {
            "bounds": [0, 0, 1000, 2000],
            "children": [
                {"componentLabel": "Text", "bounds": [100, 100, 300, 200]},
                {"componentLabel": "Icon", "iconClass": "share", "bounds": [900, 0, 1000, 100]},
                {"componentLabel": "Card", "bounds": [0, 500, 1000, 900], "visible": false,
                 "children": [{"componentLabel": "Image", "bounds": [0, 500, 500, 900]}]},
                {"componentLabel": "Divider", "bounds": [0, 1000, 1200, 1000]}
            ]
        }
    }"#;

    #[test]
    fn parses_labels_bounds_visibility() {
        let doc = parse_hierarchy("s1", SAMPLE).unwrap();
        assert_eq!(doc.source_app.as_deref(), Some("com.example"));
        let labels: Vec<_> = doc.elements.iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, vec!["Text", "icon:share", "Card", "Image", "Divider"]);
        assert_eq!(doc.elements[0].bbox, BBox::new(0.2, 0.075, 0.2, 0.05));
        assert!(doc.elements[0].visible);
        // Hidden parent hides the child.
        assert!(!doc.elements[2].visible && !doc.elements[3].visible);
        // Off-screen bounds clamp, zero height becomes the minimum extent.
        let div = doc.elements[4].bbox;
        assert_eq!((div.w, div.h), (1.0, 1e-3));
    }

    #[test]
    fn rico_activity_root_and_defaults() {
        let text = r#"{"activity": {"root": {"componentLabel": "Slider", "bounds": [0, 0, 1440, 256], "visible-to-user": true}}}"#;
        let doc = parse_hierarchy("x", text).unwrap();
        assert_eq!(doc.elements[0].bbox, BBox::new(0.5, 0.05, 1.0, 0.1));
    }

    #[test]
    fn malformed_documents() {
        for bad in [
            "not json",
            r#"{"width": 10}"#,
            r#"{"root": {"componentLabel": "Text"}}"#,
            r#"{"root": {"componentLabel": "Text", "bounds": [0, 0, "a", 1]}}"#,
            r#"{"width": -1, "root": {}}"#,
            r#"{"root": {"children": 3}}"#,
            r#"{"root": {"visible": "yes"}}"#,
        ] {
            assert!(parse_hierarchy("b", bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flat_export_reparses() {
        let doc = parse_hierarchy("s1", SAMPLE).unwrap();
        let text = to_hierarchy_json(&doc, 1000.0, 2000.0);
        let back = parse_hierarchy("s1", &text).unwrap();
        assert_eq!(back.elements.len(), doc.elements.len());
        for (a, b) in back.elements.iter().zip(&doc.elements) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.visible, b.visible);
            assert!((a.bbox.cx - b.bbox.cx).abs() < 1e-12);
        }
    }
}
