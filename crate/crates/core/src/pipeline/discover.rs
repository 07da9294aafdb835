use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// `<root>/JPEGImages/*`
    Voc,
    /// `<root>/<split>/*` for every split directory (e.g. `train2017`),
    /// or `<root>/images/<split>/*` when an `images` directory exists.
    Coco,
    /// Every image below `<root>`, recursively.
    #[default]
    Flat,
}

impl Layout {
    pub fn as_str(self) -> &'static str {
        match self {
            Layout::Voc => "voc",
            Layout::Coco => "coco",
            Layout::Flat => "flat",
        }
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voc" => Ok(Layout::Voc),
            "coco" => Ok(Layout::Coco),
            "flat" => Ok(Layout::Flat),
            other => Err(Error::config(format!("unknown layout {other:?} (voc|coco|flat)"))),
        }
    }
}

pub fn is_image_path(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}

fn require_dir(path: PathBuf, what: &'static str) -> Result<PathBuf> {
    if path.is_dir() {
        Ok(path)
    } else {
        Err(Error::Layout { path, what })
    }
}

fn images_in(root: &Path, dir: &Path, max_depth: usize) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).min_depth(1).max_depth(max_depth) {
        let entry = entry.map_err(|e| Error::Io(e.into()))?;
        if entry.file_type().is_file() && is_image_path(entry.path()) {
            let rel = entry.path().strip_prefix(root).expect("walk stays under root");
            out.push(rel.to_path_buf());
        }
    }
    Ok(out)
}

/// Image paths relative to `root`, sorted lexicographically.
pub fn discover(root: &Path, layout: Layout) -> Result<Vec<PathBuf>> {
    let root = require_dir(root.to_path_buf(), "input root directory")?;
    let mut found = match layout {
        Layout::Voc => {
            let dir = require_dir(root.join("JPEGImages"), "VOC JPEGImages directory")?;
            images_in(&root, &dir, 1)?
        }
        Layout::Coco => {
            let base = if root.join("images").is_dir() {
                root.join("images")
            } else {
                root.clone()
            };
            let mut splits: Vec<PathBuf> = std::fs::read_dir(&base)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n != "annotations"))
                .collect();
            splits.sort();
            if splits.is_empty() {
                return Err(Error::Layout {
                    path: base.join("<split>"),
                    what: "COCO split directory (e.g. train2017)",
                });
            }
            let mut all = Vec::new();
            for split in splits {
                all.extend(images_in(&root, &split, 1)?);
            }
            all
        }
        Layout::Flat => images_in(&root, &root, usize::MAX)?,
    };
    found.sort();
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn touch(p: &Path) {
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, b"").unwrap();
    }

    #[test]
    fn flat_sorted_and_filtered() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.png", "a.png", "c.JPG", "d.jpeg", "notes.txt", "e.gif", "sub/f.png"] {
            touch(&dir.path().join(name));
        }
        let got = discover(dir.path(), Layout::Flat).unwrap();
        let want: Vec<PathBuf> = ["a.png", "b.png", "c.JPG", "d.jpeg", "sub/f.png"]
            .iter()
            .map(PathBuf::from)
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn voc_requires_jpegimages() {
        let dir = tempfile::tempdir().unwrap();
        touch(&dir.path().join("Annotations/1.xml"));
        match discover(dir.path(), Layout::Voc) {
            Err(Error::Layout { path, .. }) => assert!(path.ends_with("JPEGImages")),
            other => panic!("expected layout error, got {other:?}"),
        }
        touch(&dir.path().join("JPEGImages/2008_000001.jpg"));
        touch(&dir.path().join("JPEGImages/2008_000000.jpg"));
        assert_eq!(
            discover(dir.path(), Layout::Voc).unwrap(),
            vec![
                PathBuf::from("JPEGImages/2008_000000.jpg"),
                PathBuf::from("JPEGImages/2008_000001.jpg")
            ]
        );
    }

    #[test]
    fn coco_scans_splits() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(discover(dir.path(), Layout::Coco), Err(Error::Layout { .. })));
        touch(&dir.path().join("val2017/2.jpg"));
        touch(&dir.path().join("train2017/1.jpg"));
        touch(&dir.path().join("annotations/instances.json"));
        assert_eq!(
            discover(dir.path(), Layout::Coco).unwrap(),
            vec![PathBuf::from("train2017/1.jpg"), PathBuf::from("val2017/2.jpg")]
        );
    }

    #[test]
    fn missing_root_is_layout_error() {
        assert!(matches!(
            discover(Path::new("/definitely/not/here"), Layout::Flat),
            Err(Error::Layout { .. })
        ));
    }
}
