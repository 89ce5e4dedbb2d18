use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Linear measurements consumed, by sketch name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementLedger {
    counters: BTreeMap<String, u64>,
}

impl MeasurementLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, rows: u64) {
        let c = self.counters.entry(name.to_string()).or_insert(0);
        *c = c.saturating_add(rows);
    }

    pub fn get(&self, name: &str) -> u64 {
        self.counters.get(name).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counters.values().fold(0u64, |a, &b| a.saturating_add(b))
    }

    pub fn counters(&self) -> &BTreeMap<String, u64> {
        &self.counters
    }

    pub fn absorb(&mut self, other: &MeasurementLedger) {
        for (k, &v) in &other.counters {
            self.register(k, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulates() {
        let mut l = MeasurementLedger::new();
        l.register("cs", 12);
        l.register("cs", 3);
        l.register("g", 5);
        assert_eq!(l.get("cs"), 15);
        assert_eq!(l.total(), 20);
        assert_eq!(l.get("missing"), 0);
    }
}
