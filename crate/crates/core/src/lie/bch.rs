//! Dynkin's form of the Baker–Campbell–Hausdorff series, truncated at a
//! fixed bracket depth.
//!
//! Every right-nested bracket `[w₁,[w₂,…[w_{m−1},w_m]…]]` with letters in
//! `{X, Y}` gets one rational coefficient, summed over all ways of cutting the
//! word into blocks `X^r Y^s`:
//!
//! `(−1)^{k−1} / (k · m · Π rᵢ! sᵢ!)` for a cut into `k` blocks.

use num_traits::{One, Zero};

use crate::field::{int, Rational};

/// One term of the truncated series: `coefficient · nested(word)`, where
/// `word[i] == false` is `X` and `true` is `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct BchTerm {
    pub coefficient: Rational,
    pub word: Vec<bool>,
}

/// All nonzero terms of bracket depth at most `depth`.
pub fn bch_terms(depth: usize) -> Vec<BchTerm> {
    let mut terms = Vec::new();
    for m in 1..=depth {
        for bits in 0u64..(1u64 << m) {
            let word: Vec<bool> = (0..m).map(|i| bits >> (m - 1 - i) & 1 == 1).collect();
            // [.., [a, a]] vanishes identically.
            if m >= 2 && word[m - 1] == word[m - 2] {
                continue;
            }
            let c = dynkin_coefficient(&word);
            if !c.is_zero() {
                terms.push(BchTerm { coefficient: c, word });
            }
        }
    }
    terms
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * int(k))
}

fn dynkin_coefficient(word: &[bool]) -> Rational {
    let m = word.len();
    let mut total = Rational::zero();
    // Each subset of the m−1 gaps is a candidate cut.
    for cuts in 0u64..(1u64 << (m - 1)) {
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        let mut valid = true;
        for end in 1..=m {
            if end == m || cuts >> (end - 1) & 1 == 1 {
                let block = &word[start..end];
                // must look like X…XY…Y
                let r = block.iter().take_while(|&&y| !y).count();
                if block[r..].iter().any(|&y| !y) {
                    valid = false;
                    break;
                }
                blocks.push((r, block.len() - r));
                start = end;
            }
        }
        if !valid {
            continue;
        }
        let k = blocks.len();
        let denom = blocks
            .iter()
            .fold(int(k as i64) * int(m as i64), |acc, &(r, s)| acc * factorial(r) * factorial(s));
        let sign = if k % 2 == 1 { int(1) } else { int(-1) };
        total += sign / denom;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ratio;

    fn coef(terms: &[BchTerm], w: &str) -> Rational {
        let word: Vec<bool> = w.chars().map(|c| c == 'Y').collect();
        terms.iter().find(|t| t.word == word).map(|t| t.coefficient.clone()).unwrap_or_else(Rational::zero)
    }

    #[test]
    fn low_order_coefficients() {
        let t = bch_terms(3);
        assert_eq!(coef(&t, "X"), ratio(1, 1));
        assert_eq!(coef(&t, "Y"), ratio(1, 1));
        // 1/2 [X,Y] appears as 1/4 [X,Y] − 1/4 [Y,X]
        assert_eq!(coef(&t, "XY") - coef(&t, "YX"), ratio(1, 2));
    }

    #[test]
    fn third_order_matches_known_series() {
        // Degree-3 part is (1/12)[X,[X,Y]] − (1/12)[Y,[X,Y]]. In the right-nested
        // word basis: [X,[X,Y]] = XXY, [Y,[X,Y]] = YXY, and [X,[Y,X]] = −XXY etc.
        let t = bch_terms(3);
        let xxy = coef(&t, "XXY") - coef(&t, "XYX");
        let yxy = coef(&t, "YXY") - coef(&t, "YYX");
        assert_eq!(xxy, ratio(1, 12));
        assert_eq!(yxy, ratio(-1, 12));
    }
}
