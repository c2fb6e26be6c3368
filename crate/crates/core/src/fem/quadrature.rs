//! Quadrature rules exact for degree-4 integrands on the reference element,
//! given as (barycentric coordinates, weight) with weights summing to one.

use crate::Real;

/// 3-point Gauss-Legendre on a segment (exact to degree 5).
pub fn segment_gauss3<T: Real>() -> Vec<([T; 3], T)> {
    let a = T::lit(0.5) * T::lit(0.6).sqrt();
    let half = T::lit(0.5);
    let w_end = T::lit(5.0) / T::lit(18.0);
    let w_mid = T::lit(8.0) / T::lit(18.0);
    vec![
        ([half + a, half - a, T::zero()], w_end),
        ([half, half, T::zero()], w_mid),
        ([half - a, half + a, T::zero()], w_end),
    ]
}

/// Symmetric 6-point triangle rule of degree 4.
pub fn triangle_deg4<T: Real>() -> Vec<([T; 3], T)> {
    let a1 = T::lit(0.445_948_490_915_964_886_32);
    let w1 = T::lit(0.223_381_589_678_011_465_70);
    let a2 = T::lit(0.091_576_213_509_770_743_46);
    let w2 = T::lit(0.109_951_743_655_321_867_64);
    let b1 = T::one() - a1 - a1;
    let b2 = T::one() - a2 - a2;
    vec![
        ([b1, a1, a1], w1),
        ([a1, b1, a1], w1),
        ([a1, a1, b1], w1),
        ([b2, a2, a2], w2),
        ([a2, b2, a2], w2),
        ([a2, a2, b2], w2),
    ]
}

/// Degree-4 rule for a `dim`-simplex.
pub fn degree4_rule<T: Real>(dim: usize) -> Vec<([T; 3], T)> {
    if dim == 1 {
        segment_gauss3()
    } else {
        triangle_deg4()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // exact: int_T l1^a l2^b l3^c = a! b! c! 2! / (a+b+c+2)! * |T|
    fn fact(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn triangle_rule_is_exact_to_degree_four() {
        let rule = triangle_deg4::<f64>();
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                for c in 0..=(4 - a - b) {
                    let q: f64 = rule
                        .iter()
                        .map(|(l, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32))
                        .sum();
                    let exact = fact(a) * fact(b) * fact(c) * 2.0 / fact(a + b + c + 2);
                    assert!((q - exact).abs() < 1e-15, "{a}{b}{c}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn segment_rule_is_exact_to_degree_five() {
        let rule = segment_gauss3::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = rule.iter().map(|(l, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32)).sum();
                let exact = fact(a) * fact(b) / fact(a + b + 1);
                assert!((q - exact).abs() < 1e-15);
            }
        }
    }
}
