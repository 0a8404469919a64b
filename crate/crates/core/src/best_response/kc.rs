//! Optimal pick set for the first agent of a strict alternation against an
//! opponent who picks items in index order.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::clones::alternate;

/// Items are `0..values.len()`, which must be even; the opponent ranks them
/// by index. Returns the best set of `len / 2` items for agent 1, in index
/// order. Values must be pairwise distinct.
pub fn kc_best_response<S: Scalar>(values: &[S]) -> Result<Vec<usize>> {
    let m2 = values.len();
    if !m2.is_multiple_of(2) {
        return Err(Error::OddCloneCount(m2));
    }
    for i in 0..m2 {
        for j in i + 1..m2 {
            if values[i] == values[j] {
                return Err(Error::TiedValues(i, j));
            }
        }
    }
    if m2 == 0 {
        return Ok(Vec::new());
    }
    let by_value_desc = |a: &usize, b: &usize| {
        values[*b]
            .partial_cmp(&values[*a])
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    let mut set = vec![if values[0] > values[1] { 0 } else { 1 }];
    for k in 2..=m2 / 2 {
        let mut pool = set.clone();
        pool.extend([2 * k - 2, 2 * k - 1]);
        pool.sort_by(by_value_desc);
        pool.truncate(k);
        pool.sort_unstable();
        set = pool;
    }
    Ok(set)
}

/// A report realizing [`kc_best_response`]: the chosen items in index order
/// followed by the others in the order the opponent takes them.
pub fn kc_preference<S: Scalar>(values: &[S]) -> Result<Vec<usize>> {
    let set = kc_best_response(values)?;
    let opponent: Vec<usize> = (0..values.len()).collect();
    let mut first = set.clone();
    first.extend(opponent.iter().copied().filter(|i| !set.contains(i)));
    let (_, taken_by_opponent) = alternate(&first, &opponent);
    let mut out = set;
    out.extend(taken_by_opponent);
    Ok(out)
}
