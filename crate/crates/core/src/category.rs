//! The 23 sketchable primitive categories and the query-side compound kind.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub const CATEGORY_COUNT: usize = 23;

/// A sketchable UI primitive. Declaration order is the canonical logit order:
/// the seven QuickDraw-sourced classes first, then the sixteen DoodleUINet
/// classes, each group alphabetical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Camera,
    Cloud,
    Envelope,
    House,
    JailWindow,
    Square,
    Star,
    Avatar,
    Back,
    Cancel,
    Checkbox,
    DropDown,
    Forward,
    LeftArrow,
    Menu,
    Play,
    Plus,
    Search,
    Setting,
    Share,
    Slider,
    Squiggle,
    Switch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    QuickDraw,
    DoodleUiNet,
}

impl Category {
    pub const ALL: [Category; CATEGORY_COUNT] = [
        Category::Camera,
        Category::Cloud,
        Category::Envelope,
        Category::House,
        Category::JailWindow,
        Category::Square,
        Category::Star,
        Category::Avatar,
        Category::Back,
        Category::Cancel,
        Category::Checkbox,
        Category::DropDown,
        Category::Forward,
        Category::LeftArrow,
        Category::Menu,
        Category::Play,
        Category::Plus,
        Category::Search,
        Category::Setting,
        Category::Share,
        Category::Slider,
        Category::Squiggle,
        Category::Switch,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Category> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Camera => "camera",
            Category::Cloud => "cloud",
            Category::Envelope => "envelope",
            Category::House => "house",
            Category::JailWindow => "jail_window",
            Category::Square => "square",
            Category::Star => "star",
            Category::Avatar => "avatar",
            Category::Back => "back",
            Category::Cancel => "cancel",
            Category::Checkbox => "checkbox",
            Category::DropDown => "drop_down",
            Category::Forward => "forward",
            Category::LeftArrow => "left_arrow",
            Category::Menu => "menu",
            Category::Play => "play",
            Category::Plus => "plus",
            Category::Search => "search",
            Category::Setting => "setting",
            Category::Share => "share",
            Category::Slider => "slider",
            Category::Squiggle => "squiggle",
            Category::Switch => "switch",
        }
    }

    pub fn source(self) -> Source {
        if self.index() < 7 {
            Source::QuickDraw
        } else {
            Source::DoodleUiNet
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    /// Accepts the snake_case name plus a few spellings seen in doodle
    /// datasets ("jail window", "drop-down").
    fn from_str(s: &str) -> Result<Self, Error> {
        let key: String = s
            .trim()
            .chars()
            .map(|c| match c {
                ' ' | '-' => '_',
                c => c.to_ascii_lowercase(),
            })
            .collect();
        let key = match key.as_str() {
            "jailwindow" => "jail_window",
            "dropdown" => "drop_down",
            "leftarrow" => "left_arrow",
            "settings" => "setting",
            other => other,
        };
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.name() == key)
            .ok_or_else(|| Error::invalid(format!("unknown category `{s}`")))
    }
}

/// What a query element asks for: a primitive, or a text button fused from a
/// squiggle drawn inside a square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryCategory {
    Primitive(Category),
    TextButton,
}

pub const QUERY_CATEGORY_COUNT: usize = CATEGORY_COUNT + 1;

impl QueryCategory {
    pub fn index(self) -> usize {
        match self {
            QueryCategory::Primitive(c) => c.index(),
            QueryCategory::TextButton => CATEGORY_COUNT,
        }
    }

    pub fn from_index(i: usize) -> Option<QueryCategory> {
        if i == CATEGORY_COUNT {
            Some(QueryCategory::TextButton)
        } else {
            Category::from_index(i).map(QueryCategory::Primitive)
        }
    }

    pub fn all() -> impl Iterator<Item = QueryCategory> {
        (0..QUERY_CATEGORY_COUNT).filter_map(QueryCategory::from_index)
    }

    pub fn name(self) -> &'static str {
        match self {
            QueryCategory::Primitive(c) => c.name(),
            QueryCategory::TextButton => "text_button",
        }
    }
}

impl fmt::Display for QueryCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "text_button" | "Text Button" | "text-button" => Ok(QueryCategory::TextButton),
            other => other.parse().map(QueryCategory::Primitive),
        }
    }
}

impl From<Category> for QueryCategory {
    fn from(c: Category) -> Self {
        QueryCategory::Primitive(c)
    }
}

impl Serialize for QueryCategory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for QueryCategory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
