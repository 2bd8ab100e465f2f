use std::collections::HashSet;
use std::path::Path;

use nalgebra::{Quaternion, Translation3};
use serde::{Deserialize, Serialize};

use crate::config::toml_error;
use crate::error::{Error, Result};
use crate::geometry::{Capsule, OrientedBox, Quat, RigidTransform, Vec3};
use crate::grasp::Workspace;
use crate::object::{Primitive, RigidObject};
use crate::trajectory::Goal;

pub const SCENE_FORMAT: &str = "scene/1";
pub const TASK_FORMAT: &str = "task/1";

/// Table, objects and operating cuboid.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub table_height: f64,
    pub workspace: Workspace,
    pub objects: Vec<RigidObject>,
}

impl SceneSpec {
    pub fn object(&self, id: &str) -> Option<&RigidObject> {
        self.objects.iter().find(|o| o.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Move,
    Throw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskStep {
    pub object: String,
    pub mode: Mode,
    /// Goal position of the object centre (landing point when thrown).
    pub position: Vec3,
    /// Goal orientation; the current one is kept when absent.
    pub orientation: Option<Quat>,
}

impl TaskStep {
    pub fn goal(&self, current: &RigidTransform) -> Goal {
        match self.mode {
            Mode::Move => Goal::Move(RigidTransform::from_parts(Translation3::from(self.position), self.orientation.unwrap_or(current.rotation))),
            Mode::Throw => Goal::Throw { target: self.position },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskSpec {
    pub steps: Vec<TaskStep>,
    /// Standard deviation (m) of the offset added to the grasp position.
    pub noise_sigma: f64,
}

#[derive(Serialize, Deserialize)]
struct WorkspaceEntry {
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct ObjectEntry {
    id: String,
    #[serde(flatten)]
    primitive: Primitive,
    position: [f64; 3],
    /// `[w, x, y, z]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientation: Option<[f64; 4]>,
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    format: String,
    #[serde(default)]
    table_height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workspace: Option<WorkspaceEntry>,
    #[serde(default, rename = "object")]
    objects: Vec<ObjectEntry>,
}

#[derive(Serialize, Deserialize)]
struct StepEntry {
    object: String,
    mode: String,
    position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientation: Option<[f64; 4]>,
}

#[derive(Serialize, Deserialize)]
struct TaskFile {
    format: String,
    #[serde(default)]
    noise_sigma: f64,
    #[serde(default, rename = "step")]
    steps: Vec<StepEntry>,
}

fn quat(v: [f64; 4]) -> Result<Quat> {
    let q = Quaternion::new(v[0], v[1], v[2], v[3]);
    if !(q.norm() > 1e-9) || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid(format!("bad orientation {v:?}")));
    }
    Ok(crate::geometry::canonical(Quat::from_quaternion(q)))
}

fn quat_array(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    let f: SceneFile = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    if f.format != SCENE_FORMAT {
        return Err(Error::Invalid(format!("unsupported scene format '{}'", f.format)));
    }
    let workspace = f.workspace.map_or(Workspace::default(), |w| Workspace { min: w.min.into(), max: w.max.into() });
    if (0..3).any(|i| workspace.min[i] >= workspace.max[i]) {
        return Err(Error::Invalid("workspace min must be below max".into()));
    }
    let mut objects = Vec::with_capacity(f.objects.len());
    for o in f.objects {
        o.primitive.validate()?;
        let rot = o.orientation.map(quat).transpose()?.unwrap_or_else(Quat::identity);
        objects.push(RigidObject::new(o.id, o.primitive, RigidTransform::from_parts(Translation3::from(Vec3::from(o.position)), rot)));
    }
    Ok(SceneSpec { table_height: f.table_height, workspace, objects })
}

pub fn write_scene(scene: &SceneSpec) -> String {
    let f = SceneFile {
        format: SCENE_FORMAT.into(),
        table_height: scene.table_height,
        workspace: Some(WorkspaceEntry { min: scene.workspace.min.into(), max: scene.workspace.max.into() }),
        objects: scene
            .objects
            .iter()
            .map(|o| ObjectEntry {
                id: o.id.clone(),
                primitive: o.primitive,
                position: o.center().into(),
                orientation: Some(quat_array(&o.pose.rotation)),
            })
            .collect(),
    };
    toml::to_string(&f).expect("scene serializes")
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneSpec> {
    parse_scene(&std::fs::read_to_string(path)?)
}

pub fn parse_task(text: &str) -> Result<TaskSpec> {
    let f: TaskFile = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    if f.format != TASK_FORMAT {
        return Err(Error::Invalid(format!("unsupported task format '{}'", f.format)));
    }
    if !(f.noise_sigma >= 0.0) {
        return Err(Error::Invalid(format!("noise_sigma must be nonnegative, got {}", f.noise_sigma)));
    }
    let steps = f
        .steps
        .into_iter()
        .map(|s| {
            let mode = match s.mode.as_str() {
                "move" => Mode::Move,
                "throw" => Mode::Throw,
                m => return Err(Error::Invalid(format!("unknown mode '{m}'"))),
            };
            Ok(TaskStep { object: s.object, mode, position: s.position.into(), orientation: s.orientation.map(quat).transpose()? })
        })
        .collect::<Result<_>>()?;
    Ok(TaskSpec { steps, noise_sigma: f.noise_sigma })
}

pub fn write_task(task: &TaskSpec) -> String {
    let f = TaskFile {
        format: TASK_FORMAT.into(),
        noise_sigma: task.noise_sigma,
        steps: task
            .steps
            .iter()
            .map(|s| StepEntry {
                object: s.object.clone(),
                mode: if s.mode == Mode::Move { "move" } else { "throw" }.into(),
                position: s.position.into(),
                orientation: s.orientation.as_ref().map(quat_array),
            })
            .collect(),
    };
    toml::to_string(&f).expect("task serializes")
}

pub fn load_task(path: impl AsRef<Path>) -> Result<TaskSpec> {
    parse_task(&std::fs::read_to_string(path)?)
}

/// Checks that every step names a scene object.
pub fn check_task(scene: &SceneSpec, task: &TaskSpec) -> Result<()> {
    for s in &task.steps {
        if scene.object(&s.object).is_none() {
            return Err(Error::Invalid(format!("task names unknown object '{}'", s.object)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

const TOUCH_TOL: f64 = 1e-9;

fn as_capsule(o: &RigidObject) -> Option<Capsule> {
    match o.primitive {
        Primitive::Sphere { radius } => Some(Capsule::new(0.0, radius, o.pose)),
        Primitive::Capsule { radius, length } => Some(Capsule::new(0.5 * length, radius, o.pose)),
        Primitive::Box { .. } => None,
    }
}

/// Separating-axis test on the face normals and edge cross products.
fn boxes_overlap(a: &OrientedBox, b: &OrientedBox) -> bool {
    let ra = a.frame.rotation.to_rotation_matrix();
    let rb = b.frame.rotation.to_rotation_matrix();
    let (ma, mb) = (ra.matrix(), rb.matrix());
    let d = b.frame.translation.vector - a.frame.translation.vector;
    let mut axes: Vec<Vec3> = Vec::with_capacity(15);
    for i in 0..3 {
        axes.push(ma.column(i).into_owned());
        axes.push(mb.column(i).into_owned());
    }
    for i in 0..3 {
        for j in 0..3 {
            let c = ma.column(i).cross(&mb.column(j));
            if c.norm() > 1e-9 {
                axes.push(c.normalize());
            }
        }
    }
    let radius = |m: &nalgebra::Matrix3<f64>, h: &Vec3, n: &Vec3| (0..3).map(|i| h[i] * m.column(i).dot(n).abs()).sum::<f64>();
    axes.iter().all(|n| d.dot(n).abs() < radius(ma, &a.half_extents, n) + radius(mb, &b.half_extents, n) - TOUCH_TOL)
}

/// True when two objects interpenetrate; touching is allowed.
pub fn objects_overlap(a: &RigidObject, b: &RigidObject) -> bool {
    match (as_capsule(a), as_capsule(b)) {
        (Some(ca), _) => b.shape().distance_to_capsule(&ca).distance < -TOUCH_TOL,
        (None, Some(cb)) => a.shape().distance_to_capsule(&cb).distance < -TOUCH_TOL,
        (None, None) => match (a.shape(), b.shape()) {
            (crate::geometry::Shape::Box(x), crate::geometry::Shape::Box(y)) => boxes_overlap(&x, &y),
            _ => unreachable!("non-capsule objects are boxes"),
        },
    }
}

/// Height of the lowest point of an object.
pub fn lowest_point(o: &RigidObject) -> f64 {
    match o.primitive {
        Primitive::Sphere { radius } => o.center().z - radius,
        Primitive::Capsule { radius, length } => {
            let axis = o.pose.rotation * Vec3::z();
            o.center().z - 0.5 * length * axis.z.abs() - radius
        }
        Primitive::Box { size } => {
            let m = o.pose.rotation.to_rotation_matrix();
            o.center().z - (0..3).map(|i| 0.5 * size[i] * m[(2, i)].abs()).sum::<f64>()
        }
    }
}

/// Size-range and containment warnings; duplicate-id, table and overlap errors.
pub fn validate_scene(scene: &SceneSpec) -> Diagnostics {
    let mut d = Diagnostics::default();
    let mut seen = HashSet::new();
    for o in &scene.objects {
        if !seen.insert(o.id.as_str()) {
            d.errors.push(format!("duplicate object id '{}'", o.id));
        }
        for w in o.primitive.range_warnings() {
            d.warnings.push(format!("{}: {w}", o.id));
        }
        if !scene.workspace.contains(&o.center()) {
            d.warnings.push(format!("{}: centre outside the operating cuboid", o.id));
        }
        if lowest_point(o) < scene.table_height - TOUCH_TOL {
            d.errors.push(format!("{}: below the table surface", o.id));
        }
    }
    for (i, a) in scene.objects.iter().enumerate() {
        for b in &scene.objects[i + 1..] {
            if objects_overlap(a, b) {
                d.errors.push(format!("objects '{}' and '{}' overlap", a.id, b.id));
            }
        }
    }
    d
}
