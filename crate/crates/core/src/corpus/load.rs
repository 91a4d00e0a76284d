use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;

use super::{ClassId, Corpus, DocId, Document, TokenizerConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

/// A loaded corpus plus every file that was passed over.
#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub skipped: Vec<SkippedFile>,
}

impl LoadedCorpus {
    pub fn warnings(&self) -> usize {
        self.skipped.len()
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

/// Loads a `<root>/<class>/<document>` tree.
///
/// Classes are the immediate subdirectories in lexicographic order. Files
/// that cannot be read, or that tokenize to nothing, are skipped and
/// reported; a class left without documents is an error. Bytes are decoded
/// as UTF-8 with lossy replacement, since newsgroup dumps mix encodings.
pub fn load_directory_corpus(root: &Path, config: &TokenizerConfig) -> Result<LoadedCorpus> {
    if !root.is_dir() {
        return Err(Error::MissingCorpus(root.to_path_buf()));
    }

    let mut class_dirs = Vec::new();
    for entry in sorted_entries(root)? {
        let path = entry.path();
        if path.is_dir() {
            class_dirs.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }

    let mut files = Vec::new();
    for (class, (name, dir)) in class_dirs.iter().enumerate() {
        for entry in sorted_entries(dir)? {
            let file_name = entry.file_name().to_string_lossy().into_owned();
            files.push((class, format!("{name}/{file_name}"), entry.path()));
        }
    }

    // parallel read, results gathered back in sorted order
    let loaded: Vec<_> = files
        .par_iter()
        .map(|(class, id, path)| {
            let outcome = match fs::read(path) {
                Ok(bytes) => {
                    let doc = Document::from_text(
                        DocId::new(id.as_str()),
                        &String::from_utf8_lossy(&bytes),
                        config,
                    );
                    if doc.tokens.is_empty() {
                        Err("no tokens after preprocessing".to_owned())
                    } else {
                        Ok(doc)
                    }
                }
                Err(e) => Err(e.to_string()),
            };
            (*class, path, outcome)
        })
        .collect();

    let mut entries = Vec::with_capacity(loaded.len());
    let mut skipped = Vec::new();
    let mut per_class = vec![0usize; class_dirs.len()];
    for (class, path, outcome) in loaded {
        match outcome {
            Ok(doc) => {
                per_class[class] += 1;
                entries.push((doc, Some(ClassId::new(class))));
            }
            Err(reason) => {
                warn!("skipping {}: {reason}", path.display());
                skipped.push(SkippedFile {
                    path: path.clone(),
                    reason,
                });
            }
        }
    }
    if let Some(empty) = per_class.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(class_dirs[empty].0.clone()));
    }

    let classes = class_dirs.into_iter().map(|(name, _)| name).collect();
    Ok(LoadedCorpus {
        corpus: Corpus::new(classes, entries)?,
        skipped,
    })
}
