use crate::error::{Error, Result};

/// Inputs below this value are treated as this value plus a linear tail.
pub const BARRIER_FLOOR: f64 = 1e-6;

/// Clamped log-barrier: `-((z - z0)^2 / z) ln(z / z0)` below `z0`, zero above.
///
/// Continuous with a continuous first derivative at `z0`.
pub fn clog(z: f64, z0: f64) -> Result<f64> {
    if !(z > 0.0) || !(z0 > 0.0) {
        return Err(Error::Domain(format!("clog undefined for z = {z}, z0 = {z0}")));
    }
    Ok(clog_unchecked(z, z0))
}

fn clog_unchecked(z: f64, z0: f64) -> f64 {
    if z >= z0 {
        return 0.0;
    }
    let d = z - z0;
    -(d * d / z) * (z / z0).ln()
}

/// d clog / dz for `z > 0`.
pub fn clog_derivative(z: f64, z0: f64) -> Result<f64> {
    if !(z > 0.0) || !(z0 > 0.0) {
        return Err(Error::Domain(format!("clog undefined for z = {z}, z0 = {z0}")));
    }
    Ok(clog_derivative_unchecked(z, z0))
}

fn clog_derivative_unchecked(z: f64, z0: f64) -> f64 {
    if z >= z0 {
        return 0.0;
    }
    let ln = (z / z0).ln();
    -(z - z0) / (z * z) * ((z + z0) * ln + (z - z0))
}

/// Barrier value and slope that stay finite for any `z`.
///
/// At and above [`BARRIER_FLOOR`] this is exactly [`clog`]. Below the floor
/// the barrier continues along its tangent at the floor, so the value stays
/// finite while the slope keeps pointing out of penetration.
pub fn clog_smooth(z: f64, z0: f64) -> (f64, f64) {
    let floor = BARRIER_FLOOR.min(0.5 * z0);
    if z >= floor {
        (clog_unchecked(z, z0), clog_derivative_unchecked(z, z0))
    } else {
        let v = clog_unchecked(floor, z0);
        let s = clog_derivative_unchecked(floor, z0);
        (v + s * (z - floor), s)
    }
}
