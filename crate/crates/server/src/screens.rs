//! Screen images at two resolutions, stored as `<id>.thumb.<ext>` and
//! `<id>.full.<ext>` in one directory.

use std::path::PathBuf;

use crate::error::{ApiError, ErrorCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Thumb,
    Full,
}

impl Resolution {
    pub fn as_str(self) -> &'static str {
        match self {
            Resolution::Thumb => "thumb",
            Resolution::Full => "full",
        }
    }
}

const EXTENSIONS: &[(&str, &str)] = &[
    ("png", "image/png"),
    ("jpg", "image/jpeg"),
    ("jpeg", "image/jpeg"),
    ("webp", "image/webp"),
];

#[derive(Debug, Clone)]
pub struct ScreenImages {
    dir: Option<PathBuf>,
}

pub struct Image {
    pub bytes: Vec<u8>,
    pub content_type: &'static str,
    pub etag: String,
}

fn etag(bytes: &[u8]) -> String {
    let h = bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    });
    format!("\"{h:016x}\"")
}

impl ScreenImages {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    /// The caller has already checked that `id` is in the corpus.
    pub fn load(&self, id: &str, res: Resolution) -> Result<Image, ApiError> {
        let missing = || ApiError::new(ErrorCode::ImageMissing, format!("no {} image for screen `{id}`", res.as_str()));
        // Ids come from the index, but keep them from naming other paths.
        if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
            return Err(missing());
        }
        let dir = self.dir.as_ref().ok_or_else(missing)?;
        for &(ext, content_type) in EXTENSIONS {
            let path = dir.join(format!("{id}.{}.{ext}", res.as_str()));
            match std::fs::read(&path) {
                Ok(bytes) => {
                    return Ok(Image {
                        etag: etag(&bytes),
                        bytes,
                        content_type,
                    })
                }
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => {
                    return Err(ApiError::new(
                        ErrorCode::Internal,
                        format!("reading {}: {e}", path.display()),
                    ))
                }
            }
        }
        Err(missing())
    }
}
