//! Loaded source files and physical locations.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Index of a file within a [`SourceSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FileId(pub u32);

/// A physical position: file, 1-based line, 1-based column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc {
    pub file: FileId,
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub fn new(file: FileId, line: u32, col: u32) -> Self {
        Loc { file, line, col }
    }
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub id: FileId,
    pub path: String,
    pub contents: String,
}

impl SourceFile {
    pub fn new(id: FileId, path: impl Into<String>, contents: impl Into<String>) -> Self {
        SourceFile {
            id,
            path: path.into(),
            contents: contents.into(),
        }
    }

    /// Text of a 1-based physical line, without the terminator.
    pub fn line_text(&self, line: u32) -> Option<&str> {
        self.contents
            .split('\n')
            .nth(line.checked_sub(1)? as usize)
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
    }
}

/// Abstraction over where source text comes from, so the analyzer can run
/// against the real filesystem or an in-memory tree.
pub trait FileProvider {
    fn read(&self, path: &Path) -> Option<String>;
}

/// Reads from disk. Bytes that are not valid UTF-8 are passed through lossily;
/// the analyzer treats source as 8-bit text.
#[derive(Debug, Default, Clone, Copy)]
pub struct DiskFiles;

impl FileProvider for DiskFiles {
    fn read(&self, path: &Path) -> Option<String> {
        let bytes = std::fs::read(path).ok()?;
        Some(match String::from_utf8(bytes) {
            Ok(s) => s,
            Err(e) => String::from_utf8_lossy(e.as_bytes()).into_owned(),
        })
    }
}

/// In-memory file tree keyed by path, used by tests and the C API.
#[derive(Debug, Default, Clone)]
pub struct MemoryFiles {
    files: HashMap<PathBuf, String>,
}

impl MemoryFiles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<PathBuf>, contents: impl Into<String>) {
        self.files.insert(normalize(&path.into()), contents.into());
    }

    pub fn with(mut self, path: impl Into<PathBuf>, contents: impl Into<String>) -> Self {
        self.insert(path, contents);
        self
    }
}

impl FileProvider for MemoryFiles {
    fn read(&self, path: &Path) -> Option<String> {
        self.files.get(&normalize(path)).cloned()
    }
}

/// Lexical path normalization (`a/./b/../c` -> `a/c`) without touching the disk.
pub fn normalize(path: &Path) -> PathBuf {
    use std::path::Component;
    let mut out: Vec<Component<'_>> = Vec::new();
    for comp in path.components() {
        match comp {
            Component::CurDir => {}
            Component::ParentDir => match out.last() {
                Some(Component::Normal(_)) => {
                    out.pop();
                }
                _ => out.push(comp),
            },
            other => out.push(other),
        }
    }
    out.iter().collect()
}

/// All files loaded during one analysis run. File ids are assigned in load
/// order and are unique for the run.
#[derive(Debug, Default, Clone)]
pub struct SourceSet {
    files: Vec<SourceFile>,
    by_path: HashMap<String, FileId>,
}

impl SourceSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a file, or returns the existing id if the path was loaded before.
    pub fn add(&mut self, path: impl Into<String>, contents: impl Into<String>) -> FileId {
        let path = path.into();
        if let Some(&id) = self.by_path.get(&path) {
            return id;
        }
        let id = FileId(self.files.len() as u32);
        self.files.push(SourceFile::new(id, path.clone(), contents));
        self.by_path.insert(path, id);
        id
    }

    pub fn get(&self, id: FileId) -> &SourceFile {
        &self.files[id.0 as usize]
    }

    pub fn try_get(&self, id: FileId) -> Option<&SourceFile> {
        self.files.get(id.0 as usize)
    }

    pub fn path(&self, id: FileId) -> &str {
        &self.get(id).path
    }

    pub fn lookup(&self, path: &str) -> Option<FileId> {
        self.by_path.get(path).copied()
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SourceFile> {
        self.files.iter()
    }

    /// True if `loc` names a real position inside a loaded file.
    pub fn contains(&self, loc: Loc) -> bool {
        let Some(file) = self.try_get(loc.file) else {
            return false;
        };
        if loc.line == 0 || loc.col == 0 {
            return false;
        }
        match file.line_text(loc.line) {
            Some(text) => (loc.col as usize) <= text.len() + 1,
            None => false,
        }
    }

    pub fn display(&self, loc: Loc) -> LocDisplay<'_> {
        LocDisplay { set: self, loc }
    }
}

pub struct LocDisplay<'a> {
    set: &'a SourceSet,
    loc: Loc,
}

impl fmt::Display for LocDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.set.path(self.loc.file), self.loc.line, self.loc.col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_collapses_dots() {
        assert_eq!(normalize(Path::new("a/./b/../c.h")), PathBuf::from("a/c.h"));
        assert_eq!(normalize(Path::new("../x.h")), PathBuf::from("../x.h"));
    }

    #[test]
    fn ids_are_unique_and_stable() {
        let mut set = SourceSet::new();
        let a = set.add("a.c", "int x;\n");
        let b = set.add("b.c", "");
        assert_ne!(a, b);
        assert_eq!(set.add("a.c", "ignored"), a);
        assert_eq!(set.get(a).contents, "int x;\n");
    }

    #[test]
    fn contains_checks_physical_bounds() {
        let mut set = SourceSet::new();
        let a = set.add("a.c", "ab\ncd\n");
        assert!(set.contains(Loc::new(a, 1, 1)));
        assert!(set.contains(Loc::new(a, 2, 2)));
        assert!(!set.contains(Loc::new(a, 9, 1)));
        assert!(!set.contains(Loc::new(a, 1, 0)));
    }
}
