use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Quaternion, Translation3};

use super::phase::Phase;
use super::task::{PhaseSummary, TaskTrajectory, TrajFrame};
use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
use crate::error::{Error, Result};
use crate::geometry::{Quat, RigidTransform, Vec3};
use crate::hand::ARM_DOFS;
use crate::styles::GrippingStyle;
use crate::tracking::{BodyState, SimFrame};

pub const TRAJECTORY_FORMAT: &str = "trajectory/1";

/// Column names of a frame record, in order.
pub const FRAME_COLUMNS: &str = "time phase chop_p[3] chop_o[4] phi upper_p[3] upper_o[4] lower_p[3] lower_o[4] \
root_p[3] root_o[4] arm_q[7] swivel object_p[3] object_o[4]";

const FRAME_NUMBERS: usize = 1 + 3 + 4 + 1 + 7 + 7 + 7 + ARM_DOFS + 1 + 7;

fn push_pose(out: &mut Vec<f64>, p: &Vec3, o: &Quat) {
    out.extend_from_slice(p.as_slice());
    out.extend_from_slice(&[o.w, o.i, o.j, o.k]);
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Plain-text form; floats are written in shortest round-trip notation.
pub fn write_trajectory(t: &TaskTrajectory) -> String {
    let spec = ChopstickSpec::default();
    let mut s = String::new();
    let _ = writeln!(s, "{TRAJECTORY_FORMAT}");
    let _ = writeln!(s, "dt = {}", t.dt);
    let _ = writeln!(s, "frames = {}", t.frames.len());
    let _ = writeln!(s, "hand = {}", t.hand);
    let _ = writeln!(s, "morphology = {:016x}", t.morphology_hash);
    let _ = writeln!(s, "style = {}", t.style.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
    let _ = writeln!(s, "object = {}", t.object_id);
    let _ = writeln!(s, "holding_offset = {}", t.holding_offset);
    let _ = writeln!(s, "grip_q = {}", join(&t.grip_q));
    for p in &t.phases {
        let _ = writeln!(s, "phase = {} {} {} {}", p.phase, p.duration, p.arc_length, p.frames);
    }
    let _ = writeln!(s, "columns = {FRAME_COLUMNS}");
    for f in &t.frames {
        let mut v = Vec::with_capacity(FRAME_NUMBERS);
        v.push(f.time);
        push_pose(&mut v, &f.chop.position, &f.chop.orientation);
        v.push(f.chop.phi);
        for frame in [f.chop.upper_frame(&spec), f.chop.lower_frame()] {
            push_pose(&mut v, &frame.translation.vector, &crate::geometry::canonical(frame.rotation));
        }
        push_pose(&mut v, &f.hand_root.translation.vector, &f.hand_root.rotation);
        v.extend_from_slice(&f.arm_q);
        v.push(f.swivel);
        push_pose(&mut v, &f.object.translation.vector, &f.object.rotation);
        let _ = write!(s, "{} {}", f.phase, v[0]);
        for x in &v[1..] {
            let _ = write!(s, " {x}");
        }
        s.push('\n');
    }
    s
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn numbers(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace().map(|w| w.parse::<f64>().map_err(|_| perr(line, format!("bad number '{w}'")))).collect()
}

fn pose_at(v: &[f64]) -> (Vec3, Quat) {
    (Vec3::new(v[0], v[1], v[2]), Quat::new_unchecked(Quaternion::new(v[3], v[4], v[5], v[6])))
}

pub fn parse_trajectory(text: &str) -> Result<TaskTrajectory> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, TRAJECTORY_FORMAT)) => {}
        Some((n, other)) => return Err(perr(n, format!("expected header '{TRAJECTORY_FORMAT}', found '{other}'"))),
        None => return Err(perr(1, "empty file")),
    }
    let mut t = TaskTrajectory {
        dt: 0.0,
        hand: String::new(),
        morphology_hash: 0,
        style: GrippingStyle(Vec::new()),
        grip_q: Vec::new(),
        holding_offset: 0.0,
        object_id: String::new(),
        phases: Vec::new(),
        frames: Vec::new(),
    };
    let mut expected = None;
    for (n, line) in lines {
        if let Some((key, value)) = line.split_once(" = ") {
            let value = value.trim();
            match key.trim() {
                "dt" => t.dt = numbers(n, value)?.first().copied().ok_or_else(|| perr(n, "missing dt"))?,
                "frames" => expected = Some(value.parse::<usize>().map_err(|_| perr(n, "bad frame count"))?),
                "hand" => t.hand = value.to_string(),
                "morphology" => t.morphology_hash = u64::from_str_radix(value, 16).map_err(|_| perr(n, "bad morphology hash"))?,
                "style" => t.style = value.parse().map_err(|e: Error| perr(n, e.to_string()))?,
                "object" => t.object_id = value.to_string(),
                "holding_offset" => t.holding_offset = numbers(n, value)?.first().copied().unwrap_or(0.0),
                "grip_q" => t.grip_q = numbers(n, value)?,
                "phase" => {
                    let mut it = value.split_whitespace();
                    let phase: Phase = it.next().ok_or_else(|| perr(n, "missing phase"))?.parse().map_err(|e: Error| perr(n, e.to_string()))?;
                    let rest = numbers(n, &it.collect::<Vec<_>>().join(" "))?;
                    if rest.len() != 3 {
                        return Err(perr(n, "phase needs duration, arc length and frame count"));
                    }
                    t.phases.push(PhaseSummary { phase, duration: rest[0], arc_length: rest[1], frames: rest[2] as usize });
                }
                "columns" => {}
                other => return Err(perr(n, format!("unknown key '{other}'"))),
            }
            continue;
        }
        let (tag, rest) = line.split_once(' ').ok_or_else(|| perr(n, "malformed frame"))?;
        let phase: Phase = tag.parse().map_err(|e: Error| perr(n, e.to_string()))?;
        let v = numbers(n, rest)?;
        if v.len() != FRAME_NUMBERS {
            return Err(perr(n, format!("frame has {} numbers, expected {FRAME_NUMBERS}", v.len())));
        }
        let (cp, co) = pose_at(&v[1..8]);
        let (rp, ro) = pose_at(&v[23..30]);
        let mut arm_q = [0.0; ARM_DOFS];
        arm_q.copy_from_slice(&v[30..37]);
        let (op, oo) = pose_at(&v[38..45]);
        t.frames.push(TrajFrame {
            time: v[0],
            phase,
            chop: ChopstickConfig { position: cp, orientation: co, phi: v[8] },
            hand_root: RigidTransform::from_parts(Translation3::from(rp), ro),
            arm_q,
            swivel: v[37],
            object: RigidTransform::from_parts(Translation3::from(op), oo),
        });
    }
    if expected != Some(t.frames.len()) {
        return Err(perr(0, format!("header announces {expected:?} frames, found {}", t.frames.len())));
    }
    if !(t.dt > 0.0) {
        return Err(perr(0, "missing or invalid dt"));
    }
    Ok(t)
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<TaskTrajectory> {
    parse_trajectory(&std::fs::read_to_string(path)?)
}

/// Frames in the form the tracking reward expects. Rates, contact gaps and
/// forces are zero: the file carries positions only.
pub fn to_sim_frames(t: &TaskTrajectory) -> Vec<SimFrame> {
    let spec = ChopstickSpec::default();
    let fingers = t.style.finger_count();
    (0..t.frames.len())
        .map(|i| {
            let f = &t.frames[i];
            SimFrame::at_rest(&spec, t.joint_vector(i), f.hand_root, f.chop, Some(BodyState::at_rest(&f.object)), vec![0.0; fingers])
        })
        .collect()
}
