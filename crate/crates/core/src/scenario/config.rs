//! Scenario description files.

use std::path::Path;

use nalgebra::{DVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::constraints::{ActuatorBox, ConstraintSettings, FamilySwitches, FrictionPyramid, JointLimits, WorkspaceBox};
use crate::control::{NominalGains, Reference};
use crate::dynamics::{FingerModel, GraspState, HandObjectModel, ObjectModel};
use crate::error::{GraspError, Result};
use crate::qp::QpSettings;
use crate::spatial::{euler_zyx_to_rot, Pose, Rot3};
use crate::zcbf::{BarrierSpec, ClassKappa};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub simulation: SimulationConfig,
    pub hand: HandConfig,
    pub object: ObjectConfig,
    pub contacts: Vec<ContactConfig>,
    pub workspace: WorkspaceConfig,
    pub friction: FrictionConfig,
    pub barrier: BarrierConfig,
    pub actuator: ActuatorConfig,
    pub gains: GainConfig,
    pub reference: ReferenceConfig,
    pub constraints: ConstraintSwitches,
    pub qp: QpConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub dt: f64,
    pub duration: f64,
    /// Magnitude of gravity along `-z` of the palm frame.
    pub gravity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandConfig {
    pub link_length: f64,
    pub link_width: f64,
    pub link_mass: f64,
    pub tip_radius: f64,
    pub q_min: [f64; 3],
    pub q_max: [f64; 3],
    pub fingers: Vec<FingerMount>,
}

/// Finger base on the palm plane; the base `x` axis points radially outward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerMount {
    pub azimuth: f64,
    pub radius: f64,
    pub height: f64,
    /// Starting point for the initial-grasp solve.
    pub q_guess: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    pub mass: f64,
    pub edge: f64,
    pub position: [f64; 3],
    /// Roll, pitch, yaw.
    pub orientation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactConfig {
    /// One of `+x, -x, +y, -y, +z, -z`.
    pub face: String,
    pub xi_o: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceConfig {
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionConfig {
    pub mu: f64,
    pub pyramid_faces: usize,
    pub slip_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassKConfig {
    pub coefficient: f64,
    pub power: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    pub alpha1: ClassKConfig,
    pub alpha2: ClassKConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorConfig {
    pub u_min: f64,
    pub u_max: f64,
}

/// Diagonal gains; `kp`, `kd` ordered like the pose vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainConfig {
    pub kp: [f64; 6],
    pub kd: [f64; 6],
    pub kf: f64,
}

/// `r(t) = base + amplitude cos(frequency t)`, pose vector
/// `(x, y, z, roll, pitch, yaw)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub base: [f64; 6],
    pub amplitude: [f64; 6],
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSwitches {
    pub slip: bool,
    pub joint_limits: bool,
    pub rolling: bool,
    pub actuator: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpConfig {
    pub max_iterations: usize,
}

pub fn face_index(name: &str) -> Option<usize> {
    ["+x", "-x", "+y", "-y", "+z", "-z"].iter().position(|f| *f == name)
}

impl ScenarioConfig {
    /// Three fingers on +x, +y and -x faces of the cube, the cube held at
    /// the reference start pose.
    pub fn paper() -> Self {
        let yaw0 = 2.0;
        let mount = |k: f64| FingerMount {
            azimuth: yaw0 + k * std::f64::consts::FRAC_PI_2,
            radius: 0.656,
            height: 0.0,
            q_guess: [2.16, 0.0, 0.98],
        };
        let pi = std::f64::consts::PI;
        ScenarioConfig {
            simulation: SimulationConfig { dt: 1e-3, duration: 15.0, gravity: 9.81 },
            hand: HandConfig {
                link_length: 0.3,
                link_width: 0.05,
                link_mass: 0.3,
                tip_radius: 0.06,
                q_min: [0.0, -pi / 3.0, 0.0],
                q_max: [1.5 * pi, pi / 3.0, 1.5 * pi],
                fingers: vec![mount(0.0), mount(1.0), mount(2.0)],
            },
            object: ObjectConfig { mass: 0.11, edge: 0.2604, position: [0.0, 0.0, 0.25], orientation: [0.0, 0.0, yaw0] },
            contacts: ["+x", "+y", "-x"]
                .iter()
                .map(|f| ContactConfig { face: f.to_string(), xi_o: [0.0, 0.0] })
                .collect(),
            workspace: WorkspaceConfig { a_min: -pi / 2.0, a_max: pi / 2.0, b_min: -pi, b_max: 0.0 },
            friction: FrictionConfig { mu: 0.9, pyramid_faces: 8, slip_margin: 1e-3 },
            barrier: BarrierConfig {
                alpha1: ClassKConfig { coefficient: 1.0, power: 3 },
                alpha2: ClassKConfig { coefficient: 1.0, power: 3 },
            },
            actuator: ActuatorConfig { u_min: -20.0, u_max: 20.0 },
            gains: GainConfig { kp: [1.0; 6], kd: [2.5; 6], kf: 10.0 },
            reference: ReferenceConfig {
                base: [0.0; 6],
                amplitude: [0.0, 0.0, 0.25, 0.0, 0.0, 2.0],
                frequency: 1.0,
            },
            constraints: ConstraintSwitches { slip: true, joint_limits: true, rolling: true, actuator: true },
            qp: QpConfig { max_iterations: 500 },
        }
    }

    /// Same start pose, reference amplitudes scaled by `factor`.
    pub fn with_scaled_reference(mut self, factor: f64) -> Self {
        for i in 0..6 {
            let start = self.reference.base[i] + self.reference.amplitude[i];
            self.reference.amplitude[i] *= factor;
            self.reference.base[i] = start - self.reference.amplitude[i];
        }
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| GraspError::ConfigInvalid(e.to_string()))?;
        if let Err((key, msg)) = cfg.check() {
            let loc = locate_key(text, &key).map(|l| format!("line {l}: ")).unwrap_or_default();
            return Err(GraspError::ConfigInvalid(format!("{loc}{key}: {msg}")));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            GraspError::ConfigInvalid(m) => GraspError::ConfigInvalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(k, m)| GraspError::ConfigInvalid(format!("{k}: {m}")))
    }

    fn check(&self) -> std::result::Result<(), (String, String)> {
        let err = |k: &str, m: &str| Err((k.to_string(), m.to_string()));
        let positive = [
            ("simulation.dt", self.simulation.dt),
            ("hand.link_length", self.hand.link_length),
            ("hand.link_width", self.hand.link_width),
            ("hand.link_mass", self.hand.link_mass),
            ("hand.tip_radius", self.hand.tip_radius),
            ("object.mass", self.object.mass),
            ("object.edge", self.object.edge),
            ("friction.mu", self.friction.mu),
            ("friction.slip_margin", self.friction.slip_margin),
            ("barrier.alpha1.coefficient", self.barrier.alpha1.coefficient),
            ("barrier.alpha2.coefficient", self.barrier.alpha2.coefficient),
            ("gains.kf", self.gains.kf),
            ("reference.frequency", self.reference.frequency),
        ];
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return err(k, "must be a finite positive number");
            }
        }
        if !(self.simulation.duration.is_finite() && self.simulation.duration >= 0.0) {
            return err("simulation.duration", "must be finite and non-negative");
        }
        if !(self.simulation.gravity.is_finite() && self.simulation.gravity >= 0.0) {
            return err("simulation.gravity", "must be finite and non-negative");
        }
        for j in 0..3 {
            if self.hand.q_min[j].partial_cmp(&self.hand.q_max[j]) != Some(std::cmp::Ordering::Less) {
                return err("hand.q_min", "q_min must be below q_max componentwise");
            }
        }
        if self.hand.fingers.len() < 3 {
            return err("hand.fingers", "at least three fingers are required");
        }
        if self.contacts.len() != self.hand.fingers.len() {
            return err("contacts", "one contact per finger is required");
        }
        for c in &self.contacts {
            if face_index(&c.face).is_none() {
                return err("face", "unknown face (expected one of +x, -x, +y, -y, +z, -z)");
            }
            let h = 0.5 * self.object.edge;
            if c.xi_o.iter().any(|x| x.abs().partial_cmp(&h) != Some(std::cmp::Ordering::Less)) {
                return err("xi_o", "contact must lie inside its face");
            }
        }
        let w = &self.workspace;
        if !(w.a_min < w.a_max && w.b_min < w.b_max) {
            return err("workspace", "box must have a nonempty interior");
        }
        let pi = std::f64::consts::PI;
        if w.a_min < -pi / 2.0 || w.a_max > pi / 2.0 || w.b_min < -pi || w.b_max > 0.0 {
            return err("workspace", "box must lie inside the hemisphere chart (-pi/2, pi/2) x (-pi, 0)");
        }
        if self.friction.pyramid_faces < 3 {
            return err("friction.pyramid_faces", "at least three faces are required");
        }
        for (k, a) in [("barrier.alpha1.power", self.barrier.alpha1), ("barrier.alpha2.power", self.barrier.alpha2)] {
            if a.power % 2 == 0 {
                return err(k, "power must be odd");
            }
        }
        if self.actuator.u_min.partial_cmp(&self.actuator.u_max) != Some(std::cmp::Ordering::Less) {
            return err("actuator.u_min", "u_min must be below u_max");
        }
        for (k, g) in [("gains.kp", &self.gains.kp), ("gains.kd", &self.gains.kd)] {
            if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return err(k, "gain matrix must be positive definite (positive diagonal)");
            }
        }
        if self.qp.max_iterations == 0 {
            return err("qp.max_iterations", "must be positive");
        }
        Ok(())
    }

    pub fn gravity_vector(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -self.simulation.gravity)
    }

    pub fn object_pose(&self) -> Pose<f64> {
        let [roll, pitch, yaw] = self.object.orientation;
        Pose::new(Vector3::from(self.object.position), euler_zyx_to_rot(&Vector3::new(yaw, pitch, roll)))
    }

    pub fn build_model(&self) -> HandObjectModel<f64> {
        let h = &self.hand;
        let fingers = h
            .fingers
            .iter()
            .map(|f| {
                let base = Pose::new(
                    Vector3::new(f.radius * f.azimuth.cos(), f.radius * f.azimuth.sin(), f.height),
                    Rot3::rot_z(f.azimuth),
                );
                FingerModel::three_joint(base, h.link_length, h.link_width, h.link_mass, h.tip_radius)
            })
            .collect();
        HandObjectModel {
            fingers,
            object: ObjectModel::cube(self.object.mass, self.object.edge),
            contact_faces: self.contacts.iter().map(|c| face_index(&c.face).unwrap_or(0)).collect(),
            gravity: self.gravity_vector(),
        }
    }

    /// Static initial grasp; rejects configurations that start outside the
    /// joint box or the fingertip workspace.
    pub fn initial_state(&self, model: &HandObjectModel<f64>) -> Result<GraspState<f64>> {
        let guess = DVector::from_iterator(3 * self.hand.fingers.len(), self.hand.fingers.iter().flat_map(|f| f.q_guess));
        let xi_o: Vec<_> = self.contacts.iter().map(|c| Vector2::from(c.xi_o)).collect();
        let state = model.static_grasp(self.object_pose(), &xi_o, &guess)?;
        for (j, q) in state.q.iter().enumerate() {
            let k = j % 3;
            if !(self.hand.q_min[k] < *q && *q < self.hand.q_max[k]) {
                return Err(GraspError::ConfigInvalid(format!("initial joint {j} = {q} is outside the joint limits")));
            }
        }
        let w = &self.workspace;
        for (i, c) in state.contacts.iter().enumerate() {
            if !(w.a_min < c.xi_f.x && c.xi_f.x < w.a_max && w.b_min < c.xi_f.y && c.xi_f.y < w.b_max) {
                return Err(GraspError::ConfigInvalid(format!("initial contact {i} is outside the fingertip workspace")));
            }
        }
        Ok(state)
    }
}

impl ScenarioConfig {
    pub fn constraint_settings(&self) -> ConstraintSettings<f64> {
        let n = self.hand.fingers.len();
        let m = 3 * n;
        let per_joint = |v: &[f64; 3]| DVector::from_iterator(m, (0..m).map(|j| v[j % 3]));
        let w = &self.workspace;
        let k = |c: &ClassKConfig| ClassKappa { coefficient: c.coefficient, power: c.power };
        let s = self.constraints;
        ConstraintSettings {
            pyramid: FrictionPyramid::new(self.friction.mu, self.friction.pyramid_faces),
            slip_margin: self.friction.slip_margin,
            limits: JointLimits { q_min: per_joint(&self.hand.q_min), q_max: per_joint(&self.hand.q_max) },
            workspace: WorkspaceBox { a_min: w.a_min, a_max: w.a_max, b_min: w.b_min, b_max: w.b_max },
            barrier: BarrierSpec { alpha1: k(&self.barrier.alpha1), alpha2: k(&self.barrier.alpha2) },
            actuator: ActuatorBox {
                u_min: DVector::from_element(m, self.actuator.u_min),
                u_max: DVector::from_element(m, self.actuator.u_max),
            },
            enabled: FamilySwitches { slip: s.slip, joint_limits: s.joint_limits, rolling: s.rolling, actuator: s.actuator },
        }
    }

    pub fn gains(&self) -> Result<NominalGains<f64>> {
        let d = |v: &[f64; 6]| nalgebra::Matrix6::from_diagonal(&nalgebra::Vector6::from_column_slice(v));
        NominalGains::new(d(&self.gains.kp), d(&self.gains.kd), self.gains.kf)
    }

    pub fn reference(&self) -> Reference<f64> {
        Reference {
            base: nalgebra::Vector6::from_column_slice(&self.reference.base),
            amplitude: nalgebra::Vector6::from_column_slice(&self.reference.amplitude),
            frequency: self.reference.frequency,
        }
    }

    pub fn qp_settings(&self) -> QpSettings<f64> {
        QpSettings { max_iterations: self.qp.max_iterations, ..QpSettings::default() }
    }
}

/// 1-based line of `key` (dotted path, last segment matched) in `text`.
fn locate_key(text: &str, key: &str) -> Option<usize> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop()?;
    let section = parts.first().copied();
    let mut in_section = section.is_none();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            let name = t.trim_matches(|c| c == '[' || c == ']').trim();
            in_section = match section {
                Some(s) => name == s || name.starts_with(&format!("{s}.")),
                None => true,
            };
            if in_section && parts.len() == 1 && section.is_some() && name == leaf {
                return Some(i + 1);
            }
            continue;
        }
        if in_section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == leaf {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}
