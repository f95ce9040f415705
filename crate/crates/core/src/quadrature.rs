//! Gauss–Legendre rules on a single cell.

/// Nodes on `[0, 1]` and matching weights of the 3-point rule (exact to degree 5).
pub const GL3: ([f64; 3], [f64; 3]) = (
    [
        0.112_701_665_379_258_31,
        0.5,
        0.887_298_334_620_741_7,
    ],
    [
        0.277_777_777_777_777_8,
        0.444_444_444_444_444_4,
        0.277_777_777_777_777_8,
    ],
);

/// 5-point rule on `[0, 1]` (exact to degree 9).
pub const GL5: ([f64; 5], [f64; 5]) = (
    [
        0.046_910_077_030_668_004,
        0.230_765_344_947_158_45,
        0.5,
        0.769_234_655_052_841_6,
        0.953_089_922_969_332,
    ],
    [
        0.118_463_442_528_094_54,
        0.239_314_335_249_683_23,
        0.284_444_444_444_444_45,
        0.239_314_335_249_683_23,
        0.118_463_442_528_094_54,
    ],
);

/// `∫_a^b f` with the given unit-interval rule.
pub fn integrate<const N: usize>(rule: &([f64; N], [f64; N]), a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = b - a;
    rule.0
        .iter()
        .zip(rule.1.iter())
        .map(|(x, w)| w * f(a + h * x))
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        assert!((GL3.1.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((GL5.1.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        let v = integrate(&GL3, 1.0, 3.0, |x| x.powi(5));
        assert!((v - (729.0 - 1.0) / 6.0).abs() < 1e-11);
        let v = integrate(&GL5, -1.0, 2.0, |x| x.powi(9) - x);
        assert!((v - ((1024.0 - 1.0) / 10.0 - 1.5)).abs() < 1e-10);
    }
}
