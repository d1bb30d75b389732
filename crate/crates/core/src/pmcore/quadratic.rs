use serde::{Deserialize, Serialize};

/// Which root of the `tanϑ₃` quadratic a solution came from: `Plus` is
/// `(−b + √Δ) / 2a`, `Minus` is `(−b − √Δ) / 2a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Root {
    Plus,
    Minus,
}

/// Real roots of `a x² + b x + c`, tagged, `Plus` first.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadraticRoots {
    /// Discriminant negative.
    None,
    /// `a = b = 0`: no information about `x`.
    Degenerate,
    Roots(Vec<(Root, f64)>),
}

/// Solves with the cancellation-free form `q = −(b + sign(b)√Δ)/2`, roots
/// `q/a` and `c/q`. With `a = 0` the linear root is tagged by the branch it
/// continues as `a → 0`.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> QuadraticRoots {
    if a == 0.0 {
        if b == 0.0 {
            return QuadraticRoots::Degenerate;
        }
        // As a → 0 the finite root is −c/b, which is the Plus root for b > 0.
        let tag = if b > 0.0 { Root::Plus } else { Root::Minus };
        return QuadraticRoots::Roots(vec![(tag, -c / b)]);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || !disc.is_finite() {
        return QuadraticRoots::None;
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    if q == 0.0 {
        // b = 0 and c = 0
        return QuadraticRoots::Roots(vec![(Root::Plus, 0.0), (Root::Minus, 0.0)]);
    }
    let (r0, r1) = (q / a, c / q);
    let (hi, lo) = if a > 0.0 { (r0.max(r1), r0.min(r1)) } else { (r0.min(r1), r0.max(r1)) };
    QuadraticRoots::Roots(vec![(Root::Plus, hi), (Root::Minus, lo)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots(a: f64, b: f64, c: f64) -> Vec<(Root, f64)> {
        match solve_quadratic(a, b, c) {
            QuadraticRoots::Roots(r) => r,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn textbook_cases() {
        assert_eq!(roots(1.0, -3.0, 2.0), vec![(Root::Plus, 2.0), (Root::Minus, 1.0)]);
        assert_eq!(roots(1.0, 3.0, 2.0), vec![(Root::Plus, -1.0), (Root::Minus, -2.0)]);
        assert_eq!(solve_quadratic(1.0, 0.0, 1.0), QuadraticRoots::None);
        assert_eq!(solve_quadratic(0.0, 0.0, 1.0), QuadraticRoots::Degenerate);
    }

    #[test]
    fn small_leading_coefficient_keeps_finite_root_accurate() {
        // x² * 1e-20 + x - 1 = 0: finite root ≈ 1 - 1e-20
        let r = roots(1e-20, 1.0, -1.0);
        assert_eq!(r[0].0, Root::Plus);
        assert!((r[0].1 - 1.0).abs() < 1e-15);
        // naive formula loses everything here
        let naive = (-1.0 + (1.0f64 + 4e-20).sqrt()) / 2e-20;
        assert!((naive - 1.0).abs() > 1e-3);
    }

    #[test]
    fn linear_tag_continues_branch() {
        for (a, b) in [(1e-12, 2.0), (1e-12, -2.0), (-1e-12, 2.0), (-1e-12, -2.0)] {
            let lin = roots(0.0, b, -1.0);
            let near = roots(a, b, -1.0);
            let (tag, x) = lin[0];
            let cont = near.iter().find(|(t, _)| *t == tag).unwrap().1;
            assert!((x - cont).abs() < 1e-9, "a={a} b={b}: {x} vs {cont}");
        }
    }

    proptest::proptest! {
        #[test]
        fn roots_satisfy_equation(a in 1e-6f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0) {
            if let QuadraticRoots::Roots(r) = solve_quadratic(a, b, c) {
                proptest::prop_assert!(r[0].1 >= r[1].1);
                for (_, x) in r {
                    let scale = (a * x * x).abs() + (b * x).abs() + c.abs();
                    proptest::prop_assert!((a * x * x + b * x + c).abs() <= 1e-12 * scale.max(1e-300));
                }
            } else {
                proptest::prop_assert!(b * b - 4.0 * a * c < 0.0);
            }
        }
    }
}
