use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset `S ⊆ [n] = {1, …, n}`, stored ascending, with its complement in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SSelector {
    n: usize,
    s: Vec<usize>,
}

impl SSelector {
    pub fn new(n: usize, mut s: Vec<usize>) -> Result<Self> {
        s.sort_unstable();
        s.dedup();
        if s.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::InvalidSpec(format!("selector {s:?} is not a subset of [1, {n}]")));
        }
        Ok(SSelector { n, s })
    }

    /// `S = [n]`.
    pub fn all(n: usize) -> Self {
        SSelector { n, s: (1..=n).collect() }
    }

    /// The contiguous block `{i, …, j}`.
    pub fn slice(n: usize, i: usize, j: usize) -> Result<Self> {
        Self::new(n, (i..=j).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.s
    }

    pub fn size(&self) -> usize {
        self.s.len()
    }

    pub fn complement(&self) -> Vec<usize> {
        (1..=self.n).filter(|i| self.s.binary_search(i).is_err()).collect()
    }
}

/// `x *_S y`: components of `x` go to the positions in `S`, those of `y` to the rest, in order.
pub fn interleave<T: Clone>(x: &[T], sel: &SSelector, y: &[T]) -> Result<Vec<T>> {
    if x.len() != sel.size() {
        return Err(Error::ArityMismatch { expected: sel.size(), got: x.len() });
    }
    if y.len() != sel.n - sel.size() {
        return Err(Error::ArityMismatch { expected: sel.n - sel.size(), got: y.len() });
    }
    let (mut xi, mut yi) = (x.iter(), y.iter());
    Ok((1..=sel.n)
        .map(|i| {
            let src = if sel.s.binary_search(&i).is_ok() { &mut xi } else { &mut yi };
            src.next().expect("lengths checked").clone()
        })
        .collect())
}

/// Inverse of [`interleave`].
pub fn project<T: Clone>(v: &[T], sel: &SSelector) -> Result<(Vec<T>, Vec<T>)> {
    if v.len() != sel.n {
        return Err(Error::ArityMismatch { expected: sel.n, got: v.len() });
    }
    let (mut x, mut y) = (Vec::with_capacity(sel.size()), Vec::with_capacity(sel.n - sel.size()));
    for (i, c) in v.iter().enumerate() {
        if sel.s.binary_search(&(i + 1)).is_ok() {
            x.push(c.clone());
        } else {
            y.push(c.clone());
        }
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn placement() {
        let sel = SSelector::new(3, vec![3, 1]).unwrap();
        assert_eq!(interleave(&["a", "b"], &sel, &["c"]).unwrap(), vec!["a", "c", "b"]);
        assert_eq!(sel.complement(), vec![2]);
        let all = SSelector::all(2);
        assert_eq!(interleave(&[1, 2], &all, &[]).unwrap(), vec![1, 2]);
        let none = SSelector::new(2, vec![]).unwrap();
        assert_eq!(interleave(&[], &none, &[5, 6]).unwrap(), vec![5, 6]);
        assert!(matches!(interleave(&[1], &sel, &[2]), Err(Error::ArityMismatch { expected: 2, got: 1 })));
        assert!(SSelector::new(2, vec![0]).is_err());
        assert!(SSelector::new(2, vec![3]).is_err());
    }

    #[test]
    fn slices() {
        let v = [10, 11, 12, 13, 14];
        let sel = SSelector::slice(5, 2, 4).unwrap();
        assert_eq!(project(&v, &sel).unwrap(), (vec![11, 12, 13], vec![10, 14]));
        assert_eq!(project(&v, &SSelector::all(5)).unwrap(), (v.to_vec(), vec![]));
    }

    #[test]
    fn exhaustive_small_round_trips() {
        for n in 0..=5usize {
            let v: Vec<usize> = (0..n).map(|i| 100 + i).collect();
            for mask in 0..(1u32 << n) {
                let s: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
                let sel = SSelector::new(n, s).unwrap();
                let (x, y) = project(&v, &sel).unwrap();
                assert_eq!(interleave(&x, &sel, &y).unwrap(), v);
            }
        }
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.random_range(1..12);
            let v: Vec<i64> = (0..n).map(|_| rng.random_range(-50..50)).collect();
            let s: Vec<usize> = (1..=n).filter(|_| rng.random_bool(0.5)).collect();
            let sel = SSelector::new(n, s).unwrap();
            let (x, y) = project(&v, &sel).unwrap();
            assert_eq!(interleave(&x, &sel, &y).unwrap(), v);
        }
    }
}
