use std::collections::HashMap;

use super::BOS;

/// Raw n-gram counts of orders `1..=order` over `<s>`/`</s>`-padded sentences.
#[derive(Debug, Clone, Default)]
pub struct NgramCounts {
    order: usize,
    /// `raw[k - 1]` holds k-gram counts.
    raw: Vec<HashMap<Vec<u32>, u64>>,
}

impl NgramCounts {
    pub fn new(order: usize) -> Self {
        NgramCounts {
            order,
            raw: vec![HashMap::new(); order],
        }
    }

    /// Adds one padded sentence (`<s> … </s>`, already mapped to ids).
    pub fn add_padded(&mut self, ids: &[u32]) {
        for k in 1..=self.order {
            for window in ids.windows(k) {
                *self.raw[k - 1].entry(window.to_vec()).or_insert(0) += 1;
            }
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn raw_count(&self, gram: &[u32]) -> u64 {
        match gram.len() {
            0 => 0,
            k if k <= self.order => self.raw[k - 1].get(gram).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn raw_level(&self, k: usize) -> &HashMap<Vec<u32>, u64> {
        &self.raw[k - 1]
    }

    /// Kneser-Ney counts per level: raw counts at the top order and for grams
    /// starting with `<s>`, the number of distinct left extensions otherwise.
    pub fn adjusted(&self) -> Vec<HashMap<Vec<u32>, u64>> {
        let mut levels = Vec::with_capacity(self.order);
        for k in 1..=self.order {
            if k == self.order {
                levels.push(self.raw[k - 1].clone());
                continue;
            }
            let mut level: HashMap<Vec<u32>, u64> = HashMap::new();
            for gram in self.raw[k].keys() {
                if gram[1] != BOS {
                    *level.entry(gram[1..].to_vec()).or_insert(0) += 1;
                }
            }
            for (gram, &count) in &self.raw[k - 1] {
                if gram[0] == BOS {
                    level.insert(gram.clone(), count);
                }
            }
            levels.push(level);
        }
        levels
    }
}
