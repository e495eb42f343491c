//! On-disk dataset layout:
//!
//! ```text
//! <root>/drawings/<image_id>/<k>.json
//! <root>/images/<image_id>.{jpg,png}
//! <root>/fields_src/<image_id>.png     (optional, boundary maps for the game)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use super::{parse_drawing, Drawing};
use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone)]
pub struct Dataset {
    root: PathBuf,
}

/// One image of the dataset and the files that belong to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageEntry {
    pub image_id: String,
    pub drawing_paths: Vec<PathBuf>,
    pub image_path: Option<PathBuf>,
}

impl Dataset {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let drawings = root.join("drawings");
        if !drawings.is_dir() {
            return Err(Error::InvalidArgument(format!(
                "{} has no drawings/ directory",
                root.display()
            )));
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Image ids in lexicographic order.
    pub fn image_ids(&self) -> Result<Vec<String>> {
        let dir = self.root.join("drawings");
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            if entry.path().is_dir() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn entry(&self, image_id: &str) -> Result<ImageEntry> {
        let dir = self.root.join("drawings").join(image_id);
        let mut drawing_paths = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = entry.map_err(io_err(&dir))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                drawing_paths.push(path);
            }
        }
        // numeric order for 0.json, 1.json, ..., 10.json
        drawing_paths.sort_by_key(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (stem.parse::<u64>().unwrap_or(u64::MAX), stem)
        });
        let image_path = ["png", "jpg", "jpeg"]
            .iter()
            .map(|ext| self.root.join("images").join(format!("{image_id}.{ext}")))
            .find(|p| p.is_file());
        Ok(ImageEntry {
            image_id: image_id.to_owned(),
            drawing_paths,
            image_path,
        })
    }

    pub fn drawings(&self, image_id: &str) -> Result<Vec<Drawing>> {
        self.entry(image_id)?
            .drawing_paths
            .iter()
            .map(|p| read_drawing(p))
            .collect()
    }

    pub fn field_source(&self, image_id: &str) -> PathBuf {
        self.root.join("fields_src").join(format!("{image_id}.png"))
    }
}

pub fn read_drawing(path: &Path) -> Result<Drawing> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_drawing(&text)
}
