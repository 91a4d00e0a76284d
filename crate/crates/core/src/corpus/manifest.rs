//! Replayable record of one trial's split: `doc_id<TAB>side<TAB>labeled_flag`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use super::{Corpus, DocId, GroundTruth, MaskedSplit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Train,
    Test,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Train => "train",
            Side::Test => "test",
        })
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Side::Train),
            "test" => Ok(Side::Test),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub doc_id: DocId,
    pub side: Side,
    pub labeled: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitManifest {
    pub entries: Vec<ManifestEntry>,
}

impl SplitManifest {
    /// Train entries in `train` order, then test entries in `test` order.
    pub fn from_split(train: &Corpus, test: &Corpus, masked: &MaskedSplit) -> Result<Self> {
        let labeled: HashSet<&DocId> = masked.labeled.documents().iter().map(|d| &d.id).collect();
        let unlabeled: HashSet<&DocId> =
            masked.unlabeled.documents().iter().map(|d| &d.id).collect();
        let mut entries = Vec::with_capacity(train.len() + test.len());
        for doc in train.documents() {
            let is_labeled = labeled.contains(&doc.id);
            if !is_labeled && !unlabeled.contains(&doc.id) {
                return Err(Error::Invariant(format!(
                    "training document `{}` is neither labeled nor unlabeled",
                    doc.id
                )));
            }
            entries.push(ManifestEntry {
                doc_id: doc.id.clone(),
                side: Side::Train,
                labeled: is_labeled,
            });
        }
        if labeled.len() + unlabeled.len() != train.len() {
            return Err(Error::Invariant(
                "mask does not partition the training half".into(),
            ));
        }
        entries.extend(test.documents().iter().map(|doc| ManifestEntry {
            doc_id: doc.id.clone(),
            side: Side::Test,
            labeled: false,
        }));
        Ok(SplitManifest { entries })
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for entry in &self.entries {
            writeln!(
                out,
                "{}\t{}\t{}",
                entry.doc_id,
                entry.side,
                u8::from(entry.labeled)
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("manifest is UTF-8")
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<manifest>", e))?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [id, side, flag] = fields[..] else {
                return Err(Error::parse(
                    "manifest",
                    n + 1,
                    "expected three tab-separated fields",
                ));
            };
            let side = side
                .parse()
                .map_err(|e| Error::parse("manifest", n + 1, e))?;
            let labeled = match flag {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::parse(
                        "manifest",
                        n + 1,
                        format!("labeled flag must be 0 or 1, got `{other}`"),
                    ))
                }
            };
            if side == Side::Test && labeled {
                return Err(Error::parse(
                    "manifest",
                    n + 1,
                    "test documents cannot be labeled",
                ));
            }
            entries.push(ManifestEntry {
                doc_id: DocId::new(id),
                side,
                labeled,
            });
        }
        Ok(SplitManifest { entries })
    }

    /// Rebuilds `(train, test, masked)` from a fully labeled `corpus`.
    ///
    /// Documents of `corpus` absent from the manifest are ignored; manifest
    /// ids absent from `corpus` are an error.
    pub fn apply(&self, corpus: &Corpus) -> Result<(Corpus, Corpus, MaskedSplit)> {
        corpus.require_fully_labeled()?;
        let mut lookup = HashMap::with_capacity(self.entries.len());
        for entry in &self.entries {
            if lookup.insert(&entry.doc_id, entry).is_some() {
                return Err(Error::DuplicateDocument(entry.doc_id.clone()));
            }
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        let mut labeled = Vec::new();
        let mut unlabeled = Vec::new();
        let mut hidden = std::collections::BTreeMap::new();
        let mut matched = 0;
        for (doc, label) in corpus.iter() {
            let Some(entry) = lookup.get(&doc.id) else {
                continue;
            };
            matched += 1;
            match (entry.side, entry.labeled) {
                (Side::Test, _) => test.push((doc.clone(), label)),
                (Side::Train, true) => {
                    train.push((doc.clone(), label));
                    labeled.push((doc.clone(), label));
                }
                (Side::Train, false) => {
                    train.push((doc.clone(), label));
                    unlabeled.push((doc.clone(), None));
                    hidden.insert(doc.id.clone(), label.expect("fully labeled"));
                }
            }
        }
        if matched != self.entries.len() {
            let missing = self
                .entries
                .iter()
                .find(|e| !corpus.documents().iter().any(|d| d.id == e.doc_id))
                .map(|e| e.doc_id.clone())
                .expect("some entry is unmatched");
            return Err(Error::UnknownDocument(missing));
        }
        let masked = MaskedSplit {
            labeled: corpus.derive(labeled),
            unlabeled: corpus.derive(unlabeled),
            hidden: GroundTruth {
                classes: corpus.shared_classes(),
                labels: hidden,
            },
        };
        Ok((corpus.derive(train), corpus.derive(test), masked))
    }
}
