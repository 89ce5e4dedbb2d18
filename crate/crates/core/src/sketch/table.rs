use std::collections::HashMap;

/// Fractional bits of the fixed-point accumulators.
pub const FRAC_BITS: u32 = 48;
const SCALE: f64 = (1u64 << FRAC_BITS) as f64;

/// Above this many cells a table switches to sparse storage.
const DENSE_LIMIT: u128 = 1 << 21;

#[inline]
pub fn quantize(x: f64) -> i128 {
    (x * SCALE).round() as i128
}

#[inline]
pub fn dequantize(v: i128) -> f64 {
    v as f64 / SCALE
}

#[derive(Clone, Debug)]
enum Store {
    Dense(Vec<i128>),
    Sparse(HashMap<u64, Box<[i128]>>),
}

/// `reps × buckets` cells, each a vector of `width` accumulators.
#[derive(Clone, Debug)]
pub(crate) struct Table {
    reps: usize,
    buckets: u64,
    width: usize,
    store: Store,
}

impl Table {
    pub fn new(reps: usize, buckets: u64, width: usize) -> Self {
        let cells = reps as u128 * buckets as u128 * width as u128;
        let store = if cells <= DENSE_LIMIT {
            Store::Dense(vec![0; cells as usize])
        } else {
            Store::Sparse(HashMap::new())
        };
        Self { reps, buckets, width, store }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    fn key(&self, rep: usize, bucket: u64) -> u64 {
        rep as u64 * self.buckets + bucket
    }

    #[inline]
    pub fn add(&mut self, rep: usize, bucket: u64, col: usize, v: i128) {
        let key = self.key(rep, bucket);
        let w = self.width;
        match &mut self.store {
            Store::Dense(d) => d[key as usize * w + col] += v,
            Store::Sparse(m) => m.entry(key).or_insert_with(|| vec![0; w].into_boxed_slice())[col] += v,
        }
    }

    /// Adds `sign · vals` to a whole cell.
    pub fn add_cell(&mut self, rep: usize, bucket: u64, vals: &[i128], negate: bool) {
        let key = self.key(rep, bucket);
        let w = self.width;
        let cell: &mut [i128] = match &mut self.store {
            Store::Dense(d) => &mut d[key as usize * w..(key as usize + 1) * w],
            Store::Sparse(m) => m.entry(key).or_insert_with(|| vec![0; w].into_boxed_slice()),
        };
        if negate {
            cell.iter_mut().zip(vals).for_each(|(c, v)| *c -= v);
        } else {
            cell.iter_mut().zip(vals).for_each(|(c, v)| *c += v);
        }
    }

    #[inline]
    pub fn get(&self, rep: usize, bucket: u64, col: usize) -> i128 {
        let key = self.key(rep, bucket);
        match &self.store {
            Store::Dense(d) => d[key as usize * self.width + col],
            Store::Sparse(m) => m.get(&key).map_or(0, |c| c[col]),
        }
    }

    pub fn cell(&self, rep: usize, bucket: u64) -> Vec<i128> {
        let key = self.key(rep, bucket);
        let w = self.width;
        match &self.store {
            Store::Dense(d) => d[key as usize * w..(key as usize + 1) * w].to_vec(),
            Store::Sparse(m) => m.get(&key).map_or_else(|| vec![0; w], |c| c.to_vec()),
        }
    }

    pub fn same_shape(&self, other: &Table) -> bool {
        self.reps == other.reps && self.buckets == other.buckets && self.width == other.width
    }

    pub fn merge(&mut self, other: &Table) {
        debug_assert!(self.same_shape(other));
        match (&mut self.store, &other.store) {
            (Store::Dense(a), Store::Dense(b)) => a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
            (Store::Sparse(a), Store::Sparse(b)) => {
                for (k, cell) in b {
                    let dst = a.entry(*k).or_insert_with(|| vec![0; cell.len()].into_boxed_slice());
                    dst.iter_mut().zip(cell.iter()).for_each(|(x, y)| *x += y);
                }
            }
            _ => unreachable!("storage kind is a function of shape"),
        }
    }

    fn nonzero_cells(&self) -> Vec<(u64, Vec<i128>)> {
        let w = self.width;
        let mut out: Vec<(u64, Vec<i128>)> = match &self.store {
            Store::Dense(d) => d
                .chunks(w)
                .enumerate()
                .filter(|(_, c)| c.iter().any(|&x| x != 0))
                .map(|(k, c)| (k as u64, c.to_vec()))
                .collect(),
            Store::Sparse(m) => m
                .iter()
                .filter(|(_, c)| c.iter().any(|&x| x != 0))
                .map(|(k, c)| (*k, c.to_vec()))
                .collect(),
        };
        out.sort_by_key(|(k, _)| *k);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.nonzero_cells().is_empty()
    }
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other) && self.nonzero_cells() == other.nonzero_cells()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_roundtrip() {
        for x in [0.0, 1.0, -3.25, 1e-9, 12345.678] {
            assert!((dequantize(quantize(x)) - x).abs() <= 0.5 / SCALE + 1e-15 * x.abs());
        }
    }

    #[test]
    fn dense_and_sparse_agree() {
        let mut d = Table::new(3, 5, 2);
        let mut s = Table::new(3, 1 << 40, 2);
        for (rep, b, col, v) in [(0, 1, 0, 5), (2, 4, 1, -3), (0, 1, 0, 2)] {
            d.add(rep, b, col, v);
            s.add(rep, b, col, v);
        }
        assert_eq!(d.get(0, 1, 0), 7);
        assert_eq!(s.get(0, 1, 0), 7);
        assert_eq!(s.get(1, 1, 0), 0);
        s.add(2, 4, 1, 3);
        assert_eq!(s.cell(2, 4), vec![0, 0]);
    }

    #[test]
    fn equality_ignores_zero_cells() {
        let mut a = Table::new(1, 1 << 40, 1);
        let b = Table::new(1, 1 << 40, 1);
        a.add(0, 9, 0, 4);
        a.add(0, 9, 0, -4);
        assert_eq!(a, b);
        assert!(a.is_zero());
    }
}
