use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::GridParams;

/// The backward (`a`) and forward (`b`) elimination sequences of a block and
/// their uniform bounds `2^(2m) / (l lambda)` and `1 / (l lambda)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSequences {
    pub l: usize,
    /// `d_1, ..., d_n` with `d_i = l^(2m) + (i-1)^(2m)`.
    pub d: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub bound_a: f64,
    pub bound_b: f64,
}

impl BoundSequences {
    pub fn within_bounds(&self) -> bool {
        self.a.iter().all(|&a| (0.0..=self.bound_a).contains(&a))
            && self.b.iter().all(|&b| (0.0..=self.bound_b).contains(&b))
    }
}

/// Evaluates the two-step recursions
///
/// ```text
/// a_j = (d_(n-2j+2) + a_(j-1) L^2) / (d_(n-2j+1) d_(n-2j+2) + a_(j-1) d_(n-2j+1) L^2 + L^2)
/// b_j = (d_(2j-1)   + b_(j-1) L^2) / (d_(2j) d_(2j-1)         + b_(j-1) d_(2j) L^2     + L^2)
/// ```
///
/// with `L = l lambda`, `a_0 = b_0 = 0`, `j = 1..=n/2`. The sequence length `n`
/// is `N`, rounded up to the next even number.
pub fn bound_sequences(l: usize, params: &GridParams) -> Result<BoundSequences> {
    if l < 1 || !(params.lambda > 0.0) {
        return Err(Error::InvalidParams(format!(
            "bound sequences need l >= 1 and lambda > 0 (got l = {l}, lambda = {})",
            params.lambda
        )));
    }
    let n = params.n + params.n % 2;
    let d: Vec<f64> = (1..=n)
        .map(|i| params.laplacian(l as i32, i as i32 - 1))
        .collect();
    let dd = |i: usize| d[i - 1];
    let big = l as f64 * params.lambda;
    let l2 = big * big;
    let (mut a, mut b) = (Vec::with_capacity(n / 2), Vec::with_capacity(n / 2));
    let (mut ap, mut bp) = (0.0, 0.0);
    for j in 1..=n / 2 {
        let (hi, lo) = (dd(n - 2 * j + 2), dd(n - 2 * j + 1));
        ap = (hi + ap * l2) / (lo * hi + ap * lo * l2 + l2);
        let (o, e) = (dd(2 * j - 1), dd(2 * j));
        bp = (o + bp * l2) / (e * o + bp * e * l2 + l2);
        a.push(ap);
        b.push(bp);
    }
    let seq = BoundSequences {
        l,
        d,
        a,
        b,
        bound_a: 2f64.powf(2.0 * params.m) / big,
        bound_b: 1.0 / big,
    };
    if !seq.within_bounds() {
        return Err(Error::Certification(format!(
            "sequence bound violated at l = {l}, m = {}, lambda = {}, N = {}",
            params.m, params.lambda, params.n
        )));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        let p = GridParams::new(4, 2.0, 10.0).unwrap();
        let s = bound_sequences(1, &p).unwrap();
        assert_eq!(s.d, vec![1.0, 2.0, 17.0, 82.0]);
        assert_eq!(s.a[0], 82.0 / 1494.0);
        assert_eq!(s.b[0], 1.0 / 102.0);
        assert_eq!(s.a.len(), 2);
        assert!(s.a[0] <= 1.6 && s.b[0] <= 0.1);
    }

    #[test]
    fn odd_n_extends_by_one() {
        let p = GridParams::new(5, 2.0, 10.0).unwrap();
        let s = bound_sequences(1, &p).unwrap();
        assert_eq!(s.d.len(), 6);
        assert_eq!(s.a.len(), 3);
    }

    #[test]
    fn rejects_degenerate_input() {
        let p = GridParams::new(4, 2.0, 0.0).unwrap();
        assert!(bound_sequences(1, &p).is_err());
        assert!(bound_sequences(0, &p.with_lambda(1.0)).is_err());
    }
}
