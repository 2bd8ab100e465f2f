use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{HandModel, ARM_DOFS};
use crate::error::{Error, Result};

/// Per-DoF servo gains and torque limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PDGains {
    pub kp: Vec<f64>,
    pub kd: Vec<f64>,
    pub torque_limit: Vec<f64>,
}

/// Servo output plus which entries hit their limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Torque {
    pub tau: Vec<f64>,
    pub saturated: Vec<bool>,
}

impl Torque {
    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|&s| s)
    }
}

#[derive(Deserialize)]
struct GainsFile {
    format: String,
    #[serde(flatten)]
    gains: PDGains,
}

pub const GAINS_FORMAT: &str = "pd-gains/1";

impl PDGains {
    /// Uniform gains with kd = 0.1 kp.
    pub fn uniform(dofs: usize, kp: f64, limit: f64) -> Self {
        Self { kp: vec![kp; dofs], kd: vec![0.1 * kp; dofs], torque_limit: vec![limit; dofs] }
    }

    /// Placeholder defaults: stiff arm, soft fingers.
    pub fn default_for(model: &HandModel) -> Self {
        let n = model.dof_count();
        let kp: Vec<f64> = (0..n).map(|i| if i < ARM_DOFS { 50.0 } else { 3.0 }).collect();
        let kd = kp.iter().map(|k| 0.1 * k).collect();
        let torque_limit = (0..n).map(|i| if i < ARM_DOFS { 80.0 } else { 1.5 }).collect();
        Self { kp, kd, torque_limit }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.kp.len();
        for len in [self.kd.len(), self.torque_limit.len()] {
            if len != n {
                return Err(Error::Dimension { expected: n, got: len });
            }
        }
        let ok = |v: &[f64]| v.iter().all(|x| *x >= 0.0);
        if !ok(&self.kp) || !ok(&self.kd) || !ok(&self.torque_limit) {
            return Err(Error::Invalid("gains and torque limits must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: GainsFile = toml::from_str(text).map_err(|e| crate::config::toml_error(text, &e))?;
        if f.format != GAINS_FORMAT {
            return Err(Error::Invalid(format!("unsupported gains format '{}'", f.format)));
        }
        f.gains.validate()?;
        Ok(f.gains)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// `tau = kp (q_target - q) - kd qdot`, clamped to the torque limits.
pub fn pd_torque(gains: &PDGains, q_target: &[f64], q: &[f64], qdot: &[f64]) -> Result<Torque> {
    let n = gains.kp.len();
    for len in [gains.kd.len(), gains.torque_limit.len(), q_target.len(), q.len(), qdot.len()] {
        if len != n {
            return Err(Error::Dimension { expected: n, got: len });
        }
    }
    let mut tau = Vec::with_capacity(n);
    let mut saturated = Vec::with_capacity(n);
    for i in 0..n {
        let raw = gains.kp[i] * (q_target[i] - q[i]) - gains.kd[i] * qdot[i];
        let lim = gains.torque_limit[i];
        saturated.push(raw.abs() > lim);
        tau.push(raw.clamp(-lim, lim));
    }
    Ok(Torque { tau, saturated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_zero_torque() {
        let g = PDGains::uniform(3, 2.0, 10.0);
        let t = pd_torque(&g, &[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3], &[0.0; 3]).unwrap();
        assert_eq!(t.tau, vec![0.0; 3]);
        assert!(!t.any_saturated());
    }

    #[test]
    fn unit_gain_spot_value() {
        let g = PDGains { kp: vec![1.0], kd: vec![0.0], torque_limit: vec![5.0] };
        let t = pd_torque(&g, &[0.1], &[0.0], &[0.0]).unwrap();
        assert!((t.tau[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn saturation_flags() {
        let g = PDGains::uniform(2, 100.0, 1.0);
        let t = pd_torque(&g, &[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(t.tau, vec![1.0, 0.0]);
        assert_eq!(t.saturated, vec![true, false]);
    }

    #[test]
    fn length_mismatch() {
        let g = PDGains::uniform(2, 1.0, 1.0);
        assert!(pd_torque(&g, &[0.0], &[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn parse_gains_file() {
        let g = PDGains::parse("format = \"pd-gains/1\"\nkp = [1.0]\nkd = [0.1]\ntorque_limit = [2.0]\n").unwrap();
        assert_eq!(g.kp, vec![1.0]);
        assert!(PDGains::parse("format = \"pd-gains/1\"\nkp = [-1.0]\nkd = [0.1]\ntorque_limit = [2.0]\n").is_err());
    }
}
