use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug)]
struct Inner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

/// Ordered set of distinct activity labels.
///
/// The construction order is fixed and defines the row index of every matrix
/// built against this alphabet. Cloning is cheap; two alphabets compare equal
/// when they hold the same labels in the same order.
#[derive(Debug, Clone)]
pub struct Alphabet {
    inner: Arc<Inner>,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            inner: Arc::new(Inner { labels, index }),
        })
    }

    /// Number of activity labels, the row count `n` of matrices over this alphabet.
    pub fn len(&self) -> usize {
        self.inner.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        // An alphabet always holds at least one label.
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.inner.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index.get(label).copied()
    }

    pub(crate) fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.labels == other.inner.labels
    }
}

impl Eq for Alphabet {}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.inner.labels.join(" "))
    }
}
