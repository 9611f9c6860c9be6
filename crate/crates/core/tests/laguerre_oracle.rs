use magnetic_ncg::laguerre::eval_generalized_laguerre;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Exact `L_n^(alpha)(x)` from the three-term recurrence over the rationals.
fn exact_laguerre(n: usize, alpha: i64, x: &BigRational) -> BigRational {
    let r = |v: i64| BigRational::from_integer(BigInt::from(v));
    let (mut prev, mut cur) = (BigRational::zero(), r(1));
    for k in 0..n as i64 {
        let next = ((r(2 * k + 1 + alpha) - x) * &cur - r(k + alpha) * &prev) / r(k + 1);
        prev = cur;
        cur = next;
    }
    cur
}

#[test]
fn float_laguerre_matches_exact_recurrence() {
    let mut worst = 0.0f64;
    for n in 0..=24 {
        for alpha in [-6i64, -3, -1, 0, 1, 2, 5, 11] {
            for (num, den) in [(0, 1), (1, 4), (1, 1), (7, 2), (13, 1), (61, 2)] {
                let x = BigRational::new(BigInt::from(num), BigInt::from(den));
                let want = exact_laguerre(n, alpha, &x).to_f64().unwrap();
                let got = eval_generalized_laguerre(n, alpha, num as f64 / den as f64).unwrap();
                worst = worst.max((got - want).abs() / want.abs().max(1.0));
            }
        }
    }
    assert!(worst < 1e-10, "worst relative deviation {worst:.3e}");
}

#[test]
fn known_low_order_values() {
    let x = BigRational::new(BigInt::from(3), BigInt::from(2));
    // L_2^(1)(x) = (x^2 - 6x + 6)/2
    let want = BigRational::new(BigInt::from(-3), BigInt::from(8));
    assert_eq!(exact_laguerre(2, 1, &x), want);
    assert!((eval_generalized_laguerre(2, 1, 1.5).unwrap() + 0.375).abs() < 1e-14);
}

