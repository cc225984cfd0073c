use std::ops::Range;

/// A lattice index `(k1, k2)`.
pub type Mode = (i32, i32);

/// The half-lattice `{k1 > 0} U {k1 = 0, k2 > 0}` with `|k1|, |k2| <= N`.
///
/// Storage order is block by block in `l = k1`: the `l = 0` block holds
/// `k2 = 1..=N`, every `l >= 1` block holds `k2 = -N..=N`. Each block of the
/// rotation operator is therefore a contiguous slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    n: usize,
}

impl Lattice {
    pub fn new(n: usize) -> Self {
        Lattice { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of half-lattice modes, `2N(N+1)`.
    pub fn len(&self) -> usize {
        2 * self.n * (self.n + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn width(&self) -> usize {
        2 * self.n + 1
    }

    /// Storage index of a mode that lies in the half-lattice.
    pub fn index(&self, k1: i32, k2: i32) -> Option<usize> {
        let n = self.n as i32;
        if k1 < 0 || k1 > n || k2.abs() > n {
            return None;
        }
        if k1 == 0 {
            if k2 <= 0 {
                return None;
            }
            return Some(k2 as usize - 1);
        }
        Some(self.n + (k1 as usize - 1) * self.width() + (k2 + n) as usize)
    }

    /// Storage index of `k` or `-k` together with the sign relating the
    /// signed amplitude at `k` to the stored coefficient. `None` for the zero
    /// mode and for modes outside the truncation.
    pub fn locate(&self, k1: i32, k2: i32) -> Option<(usize, f64)> {
        if let Some(i) = self.index(k1, k2) {
            Some((i, 1.0))
        } else {
            self.index(-k1, -k2).map(|i| (i, -1.0))
        }
    }

    pub fn mode(&self, index: usize) -> Mode {
        assert!(index < self.len(), "lattice index {index} out of range");
        if index < self.n {
            return (0, index as i32 + 1);
        }
        let rest = index - self.n;
        let l = rest / self.width() + 1;
        let j = (rest % self.width()) as i32 - self.n as i32;
        (l as i32, j)
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    /// Storage range of the `l`-th block.
    pub fn block_range(&self, l: usize) -> Range<usize> {
        assert!(l <= self.n, "block {l} out of range");
        if l == 0 {
            0..self.n
        } else {
            let start = self.n + (l - 1) * self.width();
            start..start + self.width()
        }
    }

    /// First `k2` of block `l` in storage order.
    pub fn block_first_j(&self, l: usize) -> i32 {
        if l == 0 {
            1
        } else {
            -(self.n as i32)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_and_mode_are_inverse() {
        for n in 1..6 {
            let lat = Lattice::new(n);
            assert_eq!(lat.modes().count(), lat.len());
            for (i, (k1, k2)) in lat.modes().enumerate() {
                assert_eq!(lat.index(k1, k2), Some(i));
                assert_eq!(lat.locate(-k1, -k2), Some((i, -1.0)));
                assert!(k1 > 0 || (k1 == 0 && k2 > 0));
            }
        }
    }

    #[test]
    fn degrees_of_freedom_for_n8() {
        assert_eq!(Lattice::new(8).len(), 144);
    }

    #[test]
    fn out_of_range_and_zero_mode() {
        let lat = Lattice::new(3);
        assert_eq!(lat.locate(0, 0), None);
        assert_eq!(lat.locate(4, 0), None);
        assert_eq!(lat.locate(1, -4), None);
        assert_eq!(lat.index(0, -1), None);
    }

    #[test]
    fn blocks_tile_the_storage() {
        let lat = Lattice::new(4);
        let mut next = 0;
        for l in 0..=4 {
            let r = lat.block_range(l);
            assert_eq!(r.start, next);
            assert_eq!(lat.mode(r.start), (l as i32, lat.block_first_j(l)));
            next = r.end;
        }
        assert_eq!(next, lat.len());
    }
}
