use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
use crate::error::Result;
use crate::geometry::{quat_angle, Quat, Vec3};
use crate::object::RigidObject;

/// Weights of the midpoint and alignment terms of the grasp quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityWeights {
    /// Per metre of midpoint offset.
    pub midpoint: f64,
    pub alignment: f64,
}

impl Default for QualityWeights {
    fn default() -> Self {
        Self { midpoint: 100.0, alignment: 5.0 }
    }
}

/// Unit direction from the lower tip to the upper tip, in the lower-stick
/// frame. Defined at `phi = 0` by continuity.
pub fn opening_direction(phi: f64) -> Vec3 {
    Vec3::new(0.0, (phi / 2.0).cos(), (phi / 2.0).sin())
}

/// Places the pair at orientation `o` so the tip midpoint sits on the object
/// centre and the tip separation equals the object's width along the tip
/// line.
pub fn complete_config(o: &Quat, object: &RigidObject, spec: &ChopstickSpec) -> Result<ChopstickConfig> {
    let mut phi = 0.0;
    for _ in 0..30 {
        let d = o * opening_direction(phi);
        let next = spec.phi_for_separation(object.width_along(&d))?;
        let done = (next - phi).abs() < 1e-13;
        phi = next;
        if done {
            break;
        }
    }
    let half = o * opening_direction(phi) * (0.5 * spec.separation(phi));
    Ok(ChopstickConfig::new(object.center() - half, *o, phi))
}

/// `exp(-w1 |m - c|) exp(-w2 sum(1 - |n.d|))` over the two points where the
/// tip line meets the object surface.
pub fn grasp_quality(config: &ChopstickConfig, object: &RigidObject, spec: &ChopstickSpec, w: &QualityWeights) -> f64 {
    let (upper, lower) = config.tips(spec);
    let m = 0.5 * (upper + lower);
    let diff = upper - lower;
    let d = if diff.norm() > 1e-12 { diff.normalize() } else { config.orientation * opening_direction(config.phi) };
    let normals = match object.line_hits(&m, &d) {
        Some((t_in, t_out)) => [object.normal(&(m + d * t_in)), object.normal(&(m + d * t_out))],
        None => [object.normal(&lower), object.normal(&upper)],
    };
    let misalignment: f64 = normals.iter().map(|n| 1.0 - n.dot(&d).abs()).sum();
    quality_from_terms((m - object.center()).norm(), misalignment, w)
}

/// Quality from the midpoint offset (m) and the summed misalignment.
pub fn quality_from_terms(offset: f64, misalignment: f64, w: &QualityWeights) -> f64 {
    (-w.midpoint * offset).exp() * (-w.alignment * misalignment).exp()
}

/// `exp(-5 angle(o, o0))`.
pub fn continuity_score(o: &Quat, current: &Quat) -> f64 {
    (-5.0 * quat_angle(o, current)).exp()
}
