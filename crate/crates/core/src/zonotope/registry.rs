use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Where an error symbol came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymbolKind {
    /// Created while abstracting the training data; one per uncertain cell.
    Data,
    /// Created by linearization, order reduction or joins.
    Fresh,
}

/// An error symbol ranging over `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ErrorSymbolId {
    id: u64,
    kind: SymbolKind,
}

impl ErrorSymbolId {
    pub fn id(self) -> u64 {
        self.id
    }

    pub fn kind(self) -> SymbolKind {
        self.kind
    }

    pub fn is_data(self) -> bool {
        self.kind == SymbolKind::Data
    }
}

impl fmt::Display for ErrorSymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.id)
    }
}

static NEXT_REGISTRY_TAG: AtomicU64 = AtomicU64::new(1);

/// Hands out unique error symbols. Allocation is lock-free so parallel tasks
/// can share one registry.
#[derive(Debug)]
pub struct Registry {
    tag: u64,
    next: AtomicU64,
}

impl Registry {
    pub fn new() -> Arc<Self> {
        Arc::new(Registry {
            tag: NEXT_REGISTRY_TAG.fetch_add(1, Ordering::Relaxed),
            next: AtomicU64::new(0),
        })
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn data_symbol(&self) -> ErrorSymbolId {
        self.allocate(SymbolKind::Data)
    }

    pub fn fresh_symbol(&self) -> ErrorSymbolId {
        self.allocate(SymbolKind::Fresh)
    }

    pub fn fresh_symbols(&self, count: usize) -> Vec<ErrorSymbolId> {
        (0..count).map(|_| self.fresh_symbol()).collect()
    }

    /// Number of symbols handed out so far.
    pub fn allocated(&self) -> u64 {
        self.next.load(Ordering::Relaxed)
    }

    fn allocate(&self, kind: SymbolKind) -> ErrorSymbolId {
        ErrorSymbolId {
            id: self.next.fetch_add(1, Ordering::Relaxed),
            kind,
        }
    }
}

/// A value in `[-1, 1]` for every error symbol a form may mention.
pub trait Assignment {
    /// Value of `symbol`; unassigned symbols evaluate to 0 (the center).
    fn value(&self, symbol: ErrorSymbolId) -> f64;
}

impl Assignment for HashMap<ErrorSymbolId, f64> {
    fn value(&self, symbol: ErrorSymbolId) -> f64 {
        self.get(&symbol).copied().unwrap_or(0.0)
    }
}

impl Assignment for BTreeMap<ErrorSymbolId, f64> {
    fn value(&self, symbol: ErrorSymbolId) -> f64 {
        self.get(&symbol).copied().unwrap_or(0.0)
    }
}

impl<F: Fn(ErrorSymbolId) -> f64> Assignment for F {
    fn value(&self, symbol: ErrorSymbolId) -> f64 {
        self(symbol)
    }
}
