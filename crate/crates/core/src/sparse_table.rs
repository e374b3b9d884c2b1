//! Static range-minimum queries in O(1) after O(n log n) preprocessing.

#[derive(Debug, Clone)]
pub struct SparseTable<T> {
    levels: Vec<Vec<T>>,
}

impl<T: Ord + Clone> SparseTable<T> {
    pub fn new(values: &[T]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next: Vec<T> = (0..=values.len() - 2 * width)
                .map(|i| std::cmp::min(&prev[i], &prev[i + width]).clone())
                .collect();
            levels.push(next);
            width *= 2;
        }
        SparseTable { levels }
    }

    pub fn len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels[0].is_empty()
    }

    /// Minimum over the half-open range `lo..hi`, or `None` if it is empty.
    pub fn min(&self, lo: usize, hi: usize) -> Option<&T> {
        if lo >= hi || hi > self.len() {
            return None;
        }
        let k = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        let row = &self.levels[k];
        Some(std::cmp::min(&row[lo], &row[hi - (1 << k)]))
    }
}
