//! Weighted prefix-free codes over `{+1, -1}` whose word for `x` has length
//! at most `2 * ceil(log2(total / weight(x)))`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::util::ceil_log2_ratio;

#[derive(Debug, Error, PartialEq)]
pub enum CodeError {
    #[error("code needs at least one element")]
    Empty,
    #[error("element {index} has non-positive weight {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("elements must be distinct (got {0} twice)")]
    SameElement(usize),
    #[error("element {0} has no word")]
    Unknown(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixCode {
    pub words: Vec<Vec<i8>>,
    pub weights: Vec<f64>,
}

#[derive(PartialEq)]
struct Item {
    weight: f64,
    id: usize,
    node: usize,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight.total_cmp(&other.weight).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Huffman code: repeatedly merge the two lightest items (ties by id; a
/// merged item takes the smaller id). The child with the smaller id gets
/// `+1`, the other `-1`.
pub fn build_code(weights: &[f64]) -> Result<PrefixCode, CodeError> {
    if weights.is_empty() {
        return Err(CodeError::Empty);
    }
    if let Some((index, &weight)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
        return Err(CodeError::BadWeight { index, weight });
    }
    let m = weights.len();
    // nodes 0..m are leaves; merged nodes get (child_plus, child_minus)
    let mut children: Vec<Option<(usize, usize)>> = vec![None; m];
    let mut heap: BinaryHeap<Reverse<Item>> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| Reverse(Item { weight: w, id: i, node: i }))
        .collect();
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().expect("two items");
        let Reverse(b) = heap.pop().expect("two items");
        let (plus, minus) = if a.id < b.id { (&a, &b) } else { (&b, &a) };
        children.push(Some((plus.node, minus.node)));
        heap.push(Reverse(Item {
            weight: a.weight + b.weight,
            id: a.id.min(b.id),
            node: children.len() - 1,
        }));
    }
    let root = heap.pop().expect("one item").0.node;
    let mut words = vec![Vec::new(); m];
    let mut stack = vec![(root, Vec::new())];
    while let Some((node, word)) = stack.pop() {
        match children[node] {
            None => words[node] = word,
            Some((p, q)) => {
                let mut wp = word.clone();
                wp.push(1);
                let mut wq = word;
                wq.push(-1);
                stack.push((p, wp));
                stack.push((q, wq));
            }
        }
    }
    Ok(PrefixCode { words, weights: weights.to_vec() })
}

impl PrefixCode {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `2 * ceil(log2(total / weight(x)))`.
    pub fn length_bound(&self, x: usize) -> usize {
        2 * ceil_log2_ratio(self.total_weight(), self.weights[x]) as usize
    }

    /// Word of `x` extended with `+1` to exactly `length_bound(x)` symbols.
    pub fn padded_word(&self, x: usize) -> Vec<i8> {
        let mut w = self.words[x].clone();
        let len = self.length_bound(x).max(w.len());
        w.resize(len, 1);
        w
    }

    pub fn is_prefix_free(&self) -> bool {
        for (i, a) in self.words.iter().enumerate() {
            for (j, b) in self.words.iter().enumerate() {
                if i != j && b.starts_with(a) {
                    return false;
                }
            }
        }
        true
    }
}

/// First 1-based position where both words are defined and differ, with the
/// two symbols there.
pub fn first_disagreement(c: &PrefixCode, x: usize, y: usize) -> Result<(usize, i8, i8), CodeError> {
    if x == y {
        return Err(CodeError::SameElement(x));
    }
    let wx = c.words.get(x).ok_or(CodeError::Unknown(x))?;
    let wy = c.words.get(y).ok_or(CodeError::Unknown(y))?;
    wx.iter()
        .zip(wy)
        .position(|(a, b)| a != b)
        .map(|i| (i + 1, wx[i], wy[i]))
        .ok_or(CodeError::Unknown(if wx.len() <= wy.len() { x } else { y }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_element_has_empty_word() {
        let c = build_code(&[3.0]).unwrap();
        assert_eq!(c.words, vec![Vec::<i8>::new()]);
        assert_eq!(c.length_bound(0), 0);
    }

    #[test]
    fn uniform_four() {
        let c = build_code(&[1.0; 4]).unwrap();
        assert!(c.is_prefix_free());
        for x in 0..4 {
            assert_eq!(c.words[x].len(), 2);
            assert_eq!(c.length_bound(x), 4);
        }
    }

    #[test]
    fn heavy_element_gets_short_word() {
        let c = build_code(&[8.0, 4.0, 2.0, 1.0, 1.0]).unwrap();
        assert!(c.words[0].len() <= 2);
        assert_eq!(c.length_bound(0), 2);
        assert_eq!(c.padded_word(0).len(), 2);
    }

    #[test]
    fn rejects_bad_weights() {
        assert_eq!(build_code(&[]), Err(CodeError::Empty));
        assert_eq!(build_code(&[1.0, 0.0]), Err(CodeError::BadWeight { index: 1, weight: 0.0 }));
    }

    #[test]
    fn disagreement_indices() {
        let c = PrefixCode { words: vec![vec![1, 1], vec![1, -1], vec![-1]], weights: vec![1.0; 3] };
        assert_eq!(first_disagreement(&c, 0, 1).unwrap(), (2, 1, -1));
        assert_eq!(first_disagreement(&c, 2, 0).unwrap(), (1, -1, 1));
        assert_eq!(first_disagreement(&c, 1, 1), Err(CodeError::SameElement(1)));
    }

    fn naive(a: &[i8], b: &[i8]) -> Option<usize> {
        let mut i = 0;
        while i < a.len() && i < b.len() {
            if a[i] != b[i] {
                return Some(i + 1);
            }
            i += 1;
        }
        None
    }

    proptest! {
        #[test]
        fn code_invariants(ws in prop::collection::vec(1u32..1000, 1..64)) {
            let weights: Vec<f64> = ws.iter().map(|&w| w as f64).collect();
            let c = build_code(&weights).unwrap();
            prop_assert!(c.is_prefix_free());
            for x in 0..weights.len() {
                prop_assert!(c.words[x].len() <= c.length_bound(x));
            }
        }

        #[test]
        fn disagreement_matches_scan(ws in prop::collection::vec(0.01f64..10.0, 2..10)) {
            let c = build_code(&ws).unwrap();
            for x in 0..ws.len() {
                for y in 0..ws.len() {
                    if x != y {
                        let (i, sx, sy) = first_disagreement(&c, x, y).unwrap();
                        prop_assert_eq!(Some(i), naive(&c.words[x], &c.words[y]));
                        prop_assert_eq!((sx, sy), (c.words[x][i - 1], c.words[y][i - 1]));
                    }
                }
            }
        }
    }
}
