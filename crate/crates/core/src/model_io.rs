//! Load, validate and serialize manipulator models from the `.psm` text
//! format: nested key-value blocks describing gravity and an ordered list of
//! modules (see `docs/model_format.md`). Parsing reports syntax errors with
//! line numbers and physics errors with the offending context; no input can
//! panic the loader.

use std::error::Error;
use std::fmt;

use nalgebra::{Matrix3, Vector3};

use crate::assembly::SerialModuleParams;
use crate::closed_loop::ParallelModuleParams;
use crate::solver::{ManipulatorModel, Module, ModuleKind};
use crate::spatial::{SpatialInertia, SpatialMotionVector, SpatialTransform};
use crate::tol;

/// Bundled single-loop demo model (hanging boom rig, ~415 kg).
pub const DEMO_1DOF: &str = include_str!("../models/demo_1dof.psm");
/// Bundled 4-DoF demo manipulator (revolute + two loops + prismatic, ~1063 kg).
pub const DEMO_4DOF: &str = include_str!("../models/demo_4dof.psm");

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Parse { line: usize, message: String },
    Validation { context: String, message: String },
}

impl ModelError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }

    fn invalid(context: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation {
            context: context.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parse { line, message } => write!(f, "model line {line}: {message}"),
            Self::Validation { context, message } => write!(f, "model {context}: {message}"),
        }
    }
}

impl Error for ModelError {}

// ---------------------------------------------------------------------------
// generic block syntax
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct Block {
    name: String,
    arg: Option<String>,
    line: usize,
    values: Vec<KeyValues>,
    blocks: Vec<Block>,
}

#[derive(Debug)]
struct KeyValues {
    key: String,
    values: Vec<String>,
    line: usize,
}

impl Block {
    fn child(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    fn child_with_arg(&self, name: &str, arg: &str) -> Option<&Block> {
        self.blocks
            .iter()
            .find(|b| b.name == name && b.arg.as_deref() == Some(arg))
    }

    fn value(&self, key: &str) -> Option<&KeyValues> {
        self.values.iter().find(|v| v.key == key)
    }

    fn numbers(&self, key: &str, count: usize) -> Result<Option<Vec<f64>>, ModelError> {
        match self.value(key) {
            None => Ok(None),
            Some(kv) => {
                if kv.values.len() != count {
                    return Err(ModelError::parse(
                        kv.line,
                        format!("'{key}' expects {count} numbers, found {}", kv.values.len()),
                    ));
                }
                let mut out = Vec::with_capacity(count);
                for v in &kv.values {
                    out.push(v.parse::<f64>().map_err(|e| {
                        ModelError::parse(kv.line, format!("bad number '{v}': {e}"))
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    fn require_numbers(&self, key: &str, count: usize) -> Result<Vec<f64>, ModelError> {
        self.numbers(key, count)?.ok_or_else(|| {
            ModelError::parse(self.line, format!("block '{}' is missing '{key}'", self.name))
        })
    }
}

fn parse_blocks(text: &str) -> Result<Block, ModelError> {
    let mut root = Block {
        name: "<root>".into(),
        arg: None,
        line: 0,
        values: Vec::new(),
        blocks: Vec::new(),
    };
    let mut stack: Vec<Block> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line == "}" {
            let done = stack
                .pop()
                .ok_or_else(|| ModelError::parse(lineno, "unmatched '}'"))?;
            match stack.last_mut() {
                Some(parent) => parent.blocks.push(done),
                None => root.blocks.push(done),
            }
            continue;
        }
        if let Some(head) = line.strip_suffix('{') {
            let mut parts = head.split_whitespace();
            let name = parts
                .next()
                .ok_or_else(|| ModelError::parse(lineno, "block is missing a name"))?
                .to_string();
            let arg = parts.next().map(str::to_string);
            if parts.next().is_some() {
                return Err(ModelError::parse(lineno, "too many tokens before '{'"));
            }
            stack.push(Block {
                name,
                arg,
                line: lineno,
                values: Vec::new(),
                blocks: Vec::new(),
            });
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap().to_string();
        let values: Vec<String> = parts.map(str::to_string).collect();
        let target = stack.last_mut().unwrap_or(&mut root);
        target.values.push(KeyValues {
            key,
            values,
            line: lineno,
        });
    }

    if let Some(open) = stack.last() {
        return Err(ModelError::parse(
            open.line,
            format!("block '{}' is never closed", open.name),
        ));
    }
    Ok(root)
}

// ---------------------------------------------------------------------------
// interpretation
// ---------------------------------------------------------------------------

fn parse_transform(block: Option<&Block>, context: &str) -> Result<SpatialTransform<f64>, ModelError> {
    let Some(block) = block else {
        return Ok(SpatialTransform::identity());
    };
    let translation = block
        .numbers("translation", 3)?
        .map_or_else(Vector3::zeros, |v| Vector3::new(v[0], v[1], v[2]));

    let mut rotation_specs = 0;
    let mut rotation = Matrix3::identity();
    if let Some(v) = block.numbers("rpy", 3)? {
        rotation = SpatialTransform::from_rpy(v[0], v[1], v[2]).rotation;
        rotation_specs += 1;
    }
    if let Some(v) = block.numbers("axis_angle", 4)? {
        rotation = SpatialTransform::from_axis_angle(&Vector3::new(v[0], v[1], v[2]), v[3]).rotation;
        rotation_specs += 1;
    }
    if let Some(v) = block.numbers("matrix", 9)? {
        rotation = Matrix3::from_row_slice(&v);
        rotation_specs += 1;
    }
    if rotation_specs > 1 {
        return Err(ModelError::parse(
            block.line,
            "give at most one of 'rpy', 'axis_angle' or 'matrix'",
        ));
    }

    let transform = SpatialTransform::new(rotation, translation);
    if transform.rotation_error() > 1e-6 {
        return Err(ModelError::invalid(
            context.to_string(),
            "rotation matrix is not orthonormal",
        ));
    }
    // clean up rounding from text representations once, at load
    Ok(transform.orthonormalized())
}

fn parse_body(module: &Block, name: &str, context: &str) -> Result<SpatialInertia<f64>, ModelError> {
    let block = module.child_with_arg("body", name).ok_or_else(|| {
        ModelError::invalid(context.to_string(), format!("missing 'body {name}' block"))
    })?;
    let ctx = format!("{context} body {name}");
    let mass = block.require_numbers("mass", 1)?[0];
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(ModelError::invalid(ctx, "mass must be positive and finite"));
    }
    let com = block
        .numbers("com", 3)?
        .map_or_else(Vector3::zeros, |v| Vector3::new(v[0], v[1], v[2]));

    let inertia = if let Some(v) = block.numbers("inertia_diag", 3)? {
        Matrix3::from_diagonal(&Vector3::new(v[0], v[1], v[2]))
    } else if let Some(v) = block.numbers("inertia", 6)? {
        // upper triangle: ixx ixy ixz iyy iyz izz
        Matrix3::new(v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5])
    } else {
        return Err(ModelError::invalid(
            ctx,
            "missing 'inertia_diag' or 'inertia'",
        ));
    };

    let spatial = SpatialInertia::from_mass_properties(mass, &com, &inertia);
    if spatial.min_eigenvalue() < -tol::ORACLE_TOL {
        return Err(ModelError::invalid(
            ctx,
            "spatial inertia is not positive semi-definite \
             (rotational inertia too small for the mass/COM)",
        ));
    }
    Ok(spatial)
}

fn parse_parallel(module: &Block, context: &str) -> Result<ParallelModuleParams<f64>, ModelError> {
    let lengths = module.child("lengths").ok_or_else(|| {
        ModelError::invalid(context.to_string(), "missing 'lengths' block")
    })?;
    let l = lengths.require_numbers("l", 1)?[0];
    let l1 = lengths.require_numbers("l1", 1)?[0];
    let lc = lengths.require_numbers("lc", 1)?[0];
    let lc0 = lengths.require_numbers("lc0", 1)?[0];
    if !(l > 0.0) || !(l1 > 0.0) {
        return Err(ModelError::invalid(
            context.to_string(),
            "link lengths l and l1 must be positive",
        ));
    }
    if lc < 0.0 || lc0 < 0.0 {
        return Err(ModelError::invalid(
            context.to_string(),
            "offsets lc and lc0 must be non-negative",
        ));
    }

    let params = ParallelModuleParams {
        base_span: l,
        boom_length: l1,
        rod_length: lc,
        cylinder_offset: lc0,
        tip_offset: parse_transform(module.child("tip_offset"), context)?,
        body_base: parse_body(module, "base", context)?,
        body_boom: parse_body(module, "boom", context)?,
        body_cylinder: parse_body(module, "cylinder", context)?,
        body_rod: parse_body(module, "rod", context)?,
        body_tip: parse_body(module, "tip", context)?,
    };
    let (lo, hi) = params.actuator_range();
    if hi <= lo || hi <= 0.0 {
        return Err(ModelError::invalid(
            context.to_string(),
            "closure geometry leaves no usable actuator range with x >= 0",
        ));
    }
    Ok(params)
}

fn parse_serial(module: &Block, context: &str) -> Result<SerialModuleParams<f64>, ModelError> {
    let joint = module.value("joint").ok_or_else(|| {
        ModelError::invalid(context.to_string(), "missing 'joint' entry")
    })?;
    let screw = match joint.values.first().map(String::as_str) {
        Some("revolute_z") => SpatialMotionVector::revolute_z(),
        Some("prismatic_x") => SpatialMotionVector::prismatic_x(),
        Some("screw") => {
            if joint.values.len() != 7 {
                return Err(ModelError::parse(
                    joint.line,
                    "'joint screw' expects six numbers (vx vy vz wx wy wz)",
                ));
            }
            let mut v = [0.0; 6];
            for (slot, s) in v.iter_mut().zip(&joint.values[1..]) {
                *slot = s
                    .parse()
                    .map_err(|e| ModelError::parse(joint.line, format!("bad number '{s}': {e}")))?;
            }
            SpatialMotionVector::new(
                Vector3::new(v[0], v[1], v[2]),
                Vector3::new(v[3], v[4], v[5]),
            )
        }
        other => {
            return Err(ModelError::parse(
                joint.line,
                format!(
                    "unknown joint '{}' (expected revolute_z, prismatic_x or screw ...)",
                    other.unwrap_or("")
                ),
            ))
        }
    };
    if screw.unit_screw_error() > tol::SCREW_TOL {
        return Err(ModelError::invalid(
            context.to_string(),
            "joint screw must be a unit rotation axis or unit translation direction",
        ));
    }

    Ok(SerialModuleParams {
        screw,
        joint_origin: parse_transform(module.child("joint_origin"), context)?,
        tip_offset: parse_transform(module.child("tip_offset"), context)?,
        body_base: parse_body(module, "base", context)?,
        body_link: parse_body(module, "link", context)?,
    })
}

/// Parse and validate a `.psm` document.
pub fn load_model(text: &str) -> Result<ManipulatorModel<f64>, ModelError> {
    let root = parse_blocks(text)?;

    let version = root
        .value("psm")
        .ok_or_else(|| ModelError::parse(1, "missing 'psm <version>' header"))?;
    if version.values.as_slice() != ["1"] {
        return Err(ModelError::parse(
            version.line,
            "unsupported format version (expected 'psm 1')",
        ));
    }

    let g = root
        .numbers("gravity", 3)?
        .ok_or_else(|| ModelError::parse(1, "missing 'gravity gx gy gz'"))?;

    let mut modules = Vec::new();
    for block in root.blocks.iter().filter(|b| b.name == "module") {
        let name = block
            .arg
            .clone()
            .ok_or_else(|| ModelError::parse(block.line, "module needs a name"))?;
        let context = format!("module '{name}'");
        let kind_kv = block
            .value("kind")
            .ok_or_else(|| ModelError::invalid(context.clone(), "missing 'kind'"))?;
        let mount = parse_transform(block.child("mount"), &context)?;
        let kind = match kind_kv.values.first().map(String::as_str) {
            Some("parallel") => ModuleKind::Parallel(parse_parallel(block, &context)?),
            Some("serial") => ModuleKind::Serial(parse_serial(block, &context)?),
            other => {
                return Err(ModelError::parse(
                    kind_kv.line,
                    format!("unknown module kind '{}'", other.unwrap_or("")),
                ))
            }
        };
        modules.push(Module { name, mount, kind });
    }

    if modules.is_empty() {
        return Err(ModelError::invalid("document", "no modules defined"));
    }

    Ok(ManipulatorModel {
        gravity: Vector3::new(g[0], g[1], g[2]),
        modules,
    })
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

fn write_transform(out: &mut String, name: &str, t: &SpatialTransform<f64>, indent: &str) {
    out.push_str(&format!("{indent}{name} {{\n"));
    let p = t.translation;
    out.push_str(&format!("{indent}  translation {} {} {}\n", p.x, p.y, p.z));
    let r = t.rotation;
    out.push_str(&format!(
        "{indent}  matrix {} {} {} {} {} {} {} {} {}\n",
        r[(0, 0)],
        r[(0, 1)],
        r[(0, 2)],
        r[(1, 0)],
        r[(1, 1)],
        r[(1, 2)],
        r[(2, 0)],
        r[(2, 1)],
        r[(2, 2)]
    ));
    out.push_str(&format!("{indent}}}\n"));
}

fn write_body(out: &mut String, name: &str, body: &SpatialInertia<f64>) {
    let m = body.mass();
    let c = body.mass_center();
    let i = body.matrix().fixed_view::<3, 3>(3, 3).into_owned();
    out.push_str(&format!("  body {name} {{\n"));
    out.push_str(&format!("    mass {m}\n"));
    out.push_str(&format!("    com {} {} {}\n", c.x, c.y, c.z));
    out.push_str(&format!(
        "    inertia {} {} {} {} {} {}\n",
        i[(0, 0)],
        i[(0, 1)],
        i[(0, 2)],
        i[(1, 1)],
        i[(1, 2)],
        i[(2, 2)]
    ));
    out.push_str("  }\n");
}

/// Canonical text form of a model; `load_model(serialize_model(m))` is a
/// field-exact round trip.
pub fn serialize_model(model: &ManipulatorModel<f64>) -> String {
    let mut out = String::from("psm 1\n\n");
    let g = model.gravity;
    out.push_str(&format!("gravity {} {} {}\n", g.x, g.y, g.z));
    for module in &model.modules {
        out.push_str(&format!("\nmodule {} {{\n", module.name));
        match &module.kind {
            ModuleKind::Parallel(p) => {
                out.push_str("  kind parallel\n");
                write_transform(&mut out, "mount", &module.mount, "  ");
                out.push_str("  lengths {\n");
                out.push_str(&format!("    l {}\n", p.base_span));
                out.push_str(&format!("    l1 {}\n", p.boom_length));
                out.push_str(&format!("    lc {}\n", p.rod_length));
                out.push_str(&format!("    lc0 {}\n", p.cylinder_offset));
                out.push_str("  }\n");
                write_transform(&mut out, "tip_offset", &p.tip_offset, "  ");
                write_body(&mut out, "base", &p.body_base);
                write_body(&mut out, "boom", &p.body_boom);
                write_body(&mut out, "cylinder", &p.body_cylinder);
                write_body(&mut out, "rod", &p.body_rod);
                write_body(&mut out, "tip", &p.body_tip);
            }
            ModuleKind::Serial(s) => {
                out.push_str("  kind serial\n");
                let v = s.screw.to_vector();
                out.push_str(&format!(
                    "  joint screw {} {} {} {} {} {}\n",
                    v[0], v[1], v[2], v[3], v[4], v[5]
                ));
                write_transform(&mut out, "mount", &module.mount, "  ");
                write_transform(&mut out, "joint_origin", &s.joint_origin, "  ");
                write_transform(&mut out, "tip_offset", &s.tip_offset, "  ");
                write_body(&mut out, "base", &s.body_base);
                write_body(&mut out, "link", &s.body_link);
            }
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_models_load() {
        let m1 = load_model(DEMO_1DOF).unwrap();
        assert_eq!(m1.dof(), 1);
        let m4 = load_model(DEMO_4DOF).unwrap();
        assert_eq!(m4.dof(), 4);
    }

    #[test]
    fn zero_length_link_is_rejected() {
        let text = DEMO_1DOF.replace("l1 2.4", "l1 0");
        match load_model(&text) {
            Err(ModelError::Validation { message, .. }) => {
                assert!(message.contains("must be positive"), "{message}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn negative_mass_is_rejected_not_a_crash() {
        let text = DEMO_1DOF.replacen("mass 60", "mass -1", 1);
        assert!(matches!(
            load_model(&text),
            Err(ModelError::Validation { .. })
        ));
    }

    #[test]
    fn syntax_error_carries_line_number() {
        let text = "psm 1\ngravity 0 -9.81 0\nmodule broken {\n  kind parallel\n";
        match load_model(text) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
