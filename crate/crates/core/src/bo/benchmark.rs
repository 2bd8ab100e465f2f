/// Branin function rescaled to the unit square, negated and normalized so
/// the maximum is about 1.05 (three global maxima).
pub fn branin_unit(x: &[f64]) -> f64 {
    use std::f64::consts::PI;
    let x1 = 15.0 * x[0] - 5.0;
    let x2 = 15.0 * x[1];
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    let f = (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0;
    -(f - 54.31) / 51.95
}

/// Value of [`branin_unit`] at its global maxima.
pub const BRANIN_UNIT_MAX: f64 = (54.31 - 0.397_887_357_729_738) / 51.95;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_optima() {
        for (a, b) in [(-std::f64::consts::PI, 12.275), (std::f64::consts::PI, 2.275), (9.42478, 2.475)] {
            let v = branin_unit(&[(a + 5.0) / 15.0, b / 15.0]);
            assert!((v - BRANIN_UNIT_MAX).abs() < 1e-5, "{v}");
        }
    }
}
