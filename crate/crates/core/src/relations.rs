//! Comparing two allocations of a single agent: stochastic dominance,
//! downward lexicographic order and expected utility.

use crate::error::{Error, Result};
use crate::model::{ComparisonOutcome, PreferenceList};
use crate::scalar::Scalar;

fn check(p: &[impl Sized], q: &[impl Sized], pref: &PreferenceList) -> Result<()> {
    if p.len() != q.len() || p.len() != pref.house_count() {
        return Err(Error::DimensionMismatch(format!(
            "rows of length {} and {} against {} houses",
            p.len(),
            q.len(),
            pref.house_count()
        )));
    }
    if !pref.is_complete() {
        return Err(Error::IncompletePreference {
            agent: 0,
            len: pref.len(),
            houses: pref.house_count(),
        });
    }
    Ok(())
}

/// Stochastic dominance via cumulative shares along `pref`.
pub fn sd_compare<S: Scalar>(p: &[S], q: &[S], pref: &PreferenceList) -> Result<ComparisonOutcome> {
    check(p, q, pref)?;
    let mut cp = S::zero();
    let mut cq = S::zero();
    let mut p_ahead = false;
    let mut q_ahead = false;
    for &h in pref.order() {
        cp = cp + p[h].clone();
        cq = cq + q[h].clone();
        if cp > cq {
            p_ahead = true;
        } else if cq > cp {
            q_ahead = true;
        }
    }
    Ok(match (p_ahead, q_ahead) {
        (false, false) => ComparisonOutcome::Equal,
        (true, false) => ComparisonOutcome::StrictlyPreferred,
        (false, true) => ComparisonOutcome::StrictlyDispreferred,
        (true, true) => ComparisonOutcome::Incomparable,
    })
}

/// Downward lexicographic: decided at the most preferred house where the
/// shares differ.
pub fn dl_compare<S: Scalar>(p: &[S], q: &[S], pref: &PreferenceList) -> Result<ComparisonOutcome> {
    check(p, q, pref)?;
    Ok(dl_compare_unchecked(p, q, pref.order()))
}

pub(crate) fn dl_compare_unchecked<S: Scalar>(
    p: &[S],
    q: &[S],
    order: &[usize],
) -> ComparisonOutcome {
    for &h in order {
        if p[h] > q[h] {
            return ComparisonOutcome::StrictlyPreferred;
        }
        if p[h] < q[h] {
            return ComparisonOutcome::StrictlyDispreferred;
        }
    }
    ComparisonOutcome::Equal
}

/// Exact dot product of an allocation row with a utility row.
pub fn eu_value<S: Scalar>(p: &[S], u: &[S]) -> S {
    p.iter()
        .zip(u)
        .filter(|(x, _)| !x.is_zero())
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn eu_compare<S: Scalar>(p: &[S], q: &[S], u: &[S]) -> ComparisonOutcome {
    let a = eu_value(p, u);
    let b = eu_value(q, u);
    if a > b {
        ComparisonOutcome::StrictlyPreferred
    } else if a < b {
        ComparisonOutcome::StrictlyDispreferred
    } else {
        ComparisonOutcome::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;
    use ComparisonOutcome::*;

    fn r(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(a, b)| rat(a, b)).collect()
    }

    fn id(m: usize) -> PreferenceList {
        PreferenceList::identity(m)
    }

    #[test]
    fn truthful_and_misreported_rows_are_sd_incomparable() {
        let p = r(&[(3, 4), (0, 1), (1, 4)]);
        let q = r(&[(1, 3), (1, 2), (1, 6)]);
        assert_eq!(sd_compare(&p, &q, &id(3)).unwrap(), Incomparable);
        assert_eq!(dl_compare(&p, &q, &id(3)).unwrap(), StrictlyPreferred);
    }

    #[test]
    fn equal_rows() {
        let p = r(&[(1, 2), (1, 2)]);
        assert_eq!(sd_compare(&p, &p, &id(2)).unwrap(), Equal);
        assert_eq!(dl_compare(&p, &p, &id(2)).unwrap(), Equal);
    }

    #[test]
    fn top_house_dominates() {
        let p = r(&[(1, 1), (0, 1)]);
        let q = r(&[(0, 1), (1, 1)]);
        assert_eq!(sd_compare(&p, &q, &id(2)).unwrap(), StrictlyPreferred);
        assert_eq!(sd_compare(&q, &p, &id(2)).unwrap(), StrictlyDispreferred);
    }

    #[test]
    fn dl_first_difference_at_second_house() {
        let p = r(&[(1, 2), (1, 2), (0, 1)]);
        let q = r(&[(1, 2), (0, 1), (1, 2)]);
        assert_eq!(dl_compare(&p, &q, &id(3)).unwrap(), StrictlyPreferred);
    }

    #[test]
    fn expected_utilities_of_three_agent_rows() {
        let u = r(&[(7, 1), (6, 1), (0, 1)]);
        let truthful = eu_value(&r(&[(3, 4), (0, 1), (1, 4)]), &u);
        let manipulated = eu_value(&r(&[(1, 3), (1, 2), (1, 6)]), &u);
        assert_eq!(truthful, rat(21, 4));
        assert_eq!(manipulated, rat(16, 3));
        assert!(manipulated > truthful);
        assert_eq!(eu_value(&r(&[(0, 1); 3]), &u), rat(0, 1));
    }

    #[test]
    fn partial_preference_rejected() {
        let l = PreferenceList::new(vec![0], 2).unwrap();
        let p = r(&[(1, 1), (0, 1)]);
        assert!(matches!(
            dl_compare(&p, &p, &l),
            Err(Error::IncompletePreference { .. })
        ));
        assert!(sd_compare(&p, &p, &l).is_err());
    }

    fn row_and_pref(
    ) -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>, PreferenceList, Vec<i64>)> {
        (1usize..7).prop_flat_map(|m| {
            let cell = (0i64..4, 1i64..4).prop_map(|(a, b)| rat(a, b));
            (
                proptest::collection::vec(cell.clone(), m),
                proptest::collection::vec(cell, m),
                Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
                proptest::collection::vec(1i64..50, m),
            )
                .prop_map(move |(p, q, order, mut gaps)| {
                    gaps.sort();
                    (p, q, PreferenceList::new(order, m).unwrap(), gaps)
                })
        })
    }

    proptest! {
        #[test]
        fn dl_refines_sd((p, q, pref, _) in row_and_pref()) {
            if sd_compare(&p, &q, &pref).unwrap() == StrictlyPreferred {
                prop_assert_eq!(dl_compare(&p, &q, &pref).unwrap(), StrictlyPreferred);
            }
        }

        #[test]
        fn dl_is_antisymmetric((p, q, pref, _) in row_and_pref()) {
            let a = dl_compare(&p, &q, &pref).unwrap();
            let b = dl_compare(&q, &p, &pref).unwrap();
            prop_assert_eq!(a.reverse(), b);
            prop_assert_ne!(a, Incomparable);
        }

        #[test]
        fn sd_dominance_implies_weakly_higher_utility((p, q, pref, gaps) in row_and_pref()) {
            // Strictly decreasing utilities along pref built from cumulative gaps.
            let m = pref.len();
            let mut u = vec![Rational::zero(); m];
            let mut level: i64 = gaps.iter().sum();
            for (k, &h) in pref.order().iter().enumerate() {
                u[h] = rat(level, 1);
                level -= gaps[k];
            }
            if sd_compare(&p, &q, &pref).unwrap() == StrictlyPreferred {
                prop_assert!(eu_value(&p, &u) >= eu_value(&q, &u));
            }
        }
    }
}
