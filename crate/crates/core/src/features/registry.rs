use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::content::{content_names, domain_names};
use super::developer::{ACTIVENESS_NAMES, EXPERIENCE_NAMES, SENTIMENT_NAMES};
use super::issue::{background_names, content_feature_names};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureGroup {
    Cont,
    Dom,
    Gener,
    Act,
    Senti,
    IssCont,
    IssBack,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 7] = [
        FeatureGroup::Cont,
        FeatureGroup::Dom,
        FeatureGroup::Gener,
        FeatureGroup::Act,
        FeatureGroup::Senti,
        FeatureGroup::IssCont,
        FeatureGroup::IssBack,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Cont => "Cont",
            FeatureGroup::Dom => "Dom",
            FeatureGroup::Gener => "Gener",
            FeatureGroup::Act => "Act",
            FeatureGroup::Senti => "Senti",
            FeatureGroup::IssCont => "IssCont",
            FeatureGroup::IssBack => "IssBack",
        }
    }

    fn description(self) -> &'static str {
        match self {
            FeatureGroup::Cont => "content preference",
            FeatureGroup::Dom => "domain preference",
            FeatureGroup::Gener => "general OSS experience",
            FeatureGroup::Act => "activeness",
            FeatureGroup::Senti => "sentiment",
            FeatureGroup::IssCont => "issue content",
            FeatureGroup::IssBack => "issue background",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureGroup {
    type Err = String;

    /// Accepts `Cont` as well as the ablation spelling `noCont`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bare = s.strip_prefix("no").unwrap_or(s);
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(bare))
            .ok_or_else(|| format!("unknown feature group {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureEntry {
    pub name: String,
    pub group: FeatureGroup,
    pub description: String,
}

/// Ordered feature names with their ablation groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRegistry {
    entries: Vec<FeatureEntry>,
    version: Arc<str>,
}

impl FeatureRegistry {
    pub fn from_entries(entries: Vec<FeatureEntry>) -> Self {
        let mut h = Sha256::new();
        for e in &entries {
            h.update(e.name.as_bytes());
            h.update([0]);
            h.update(e.group.as_str().as_bytes());
            h.update([0]);
        }
        let digest = h.finalize();
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        FeatureRegistry { version: format!("fr1-{}-{hex}", entries.len()).into(), entries }
    }

    /// Group boundaries of the full registry, in assembly order.
    pub fn standard() -> Self {
        let mut entries = Vec::new();
        let mut add = |group: FeatureGroup, names: Vec<String>| {
            for name in names {
                entries.push(FeatureEntry { name, group, description: group.description().to_string() });
            }
        };
        let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        add(FeatureGroup::Cont, content_names());
        add(FeatureGroup::Dom, domain_names());
        add(FeatureGroup::Gener, owned(EXPERIENCE_NAMES));
        add(FeatureGroup::Act, owned(ACTIVENESS_NAMES));
        add(FeatureGroup::Senti, owned(SENTIMENT_NAMES));
        add(FeatureGroup::IssCont, content_feature_names());
        add(FeatureGroup::IssBack, background_names());
        Self::from_entries(entries)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub(crate) fn version_arc(&self) -> Arc<str> {
        self.version.clone()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn group_size(&self, group: FeatureGroup) -> usize {
        self.entries.iter().filter(|e| e.group == group).count()
    }

    /// Registry without `group`, plus the kept column indices of the original.
    pub fn without(&self, group: FeatureGroup) -> (FeatureRegistry, Vec<usize>) {
        let keep: Vec<usize> = (0..self.entries.len()).filter(|&i| self.entries[i].group != group).collect();
        let entries = keep.iter().map(|&i| self.entries[i].clone()).collect();
        (FeatureRegistry::from_entries(entries), keep)
    }

    /// `name,group,index` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,group,index\n");
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", e.name, e.group, i));
        }
        out
    }
}

/// Values in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub registry_version: Arc<str>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn select(&self, keep: &[usize], registry: &FeatureRegistry) -> FeatureVector {
        FeatureVector {
            values: keep.iter().map(|&i| self.values[i]).collect(),
            registry_version: registry.version_arc(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_registry_shape() {
        let r = FeatureRegistry::standard();
        let mut names: Vec<&str> = r.entries().iter().map(|e| e.name.as_str()).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n, "names must be unique");
        let sizes: Vec<usize> = FeatureGroup::ALL.iter().map(|g| r.group_size(*g)).collect();
        assert_eq!(sizes, vec![35, 10, 6, 9, 4, 23, 23]);
        assert_eq!(r.len(), 110);
        // Groups appear as contiguous blocks in ALL order.
        let groups: Vec<FeatureGroup> = r.entries().iter().map(|e| e.group).collect();
        let mut blocks = groups.clone();
        blocks.dedup();
        assert_eq!(blocks, FeatureGroup::ALL.to_vec());
    }

    #[test]
    fn version_is_stable_and_mask_sensitive() {
        let a = FeatureRegistry::standard();
        let b = FeatureRegistry::standard();
        assert_eq!(a.version(), b.version());
        let (masked, keep) = a.without(FeatureGroup::Senti);
        assert_eq!(masked.len(), a.len() - 4);
        assert_eq!(keep.len(), masked.len());
        assert_ne!(masked.version(), a.version());
        assert_eq!(masked.group_size(FeatureGroup::Senti), 0);
    }

    #[test]
    fn group_parsing() {
        assert_eq!("noIssBack".parse::<FeatureGroup>().unwrap(), FeatureGroup::IssBack);
        assert_eq!("senti".parse::<FeatureGroup>().unwrap(), FeatureGroup::Senti);
        assert!("nothing".parse::<FeatureGroup>().is_err());
    }

    #[test]
    fn csv_dump() {
        let r = FeatureRegistry::standard();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "name,group,index");
        assert_eq!(lines[1], "pr_cos,Cont,0");
        assert_eq!(lines.len(), r.len() + 1);
    }
}
