//! Reading and writing rigid transforms as 16 row-major homogeneous
//! numbers. Accepted inputs: plain whitespace-separated text, a bare JSON
//! array, or any JSON object with a 16-number `transform` field (e.g. a
//! registration result record). Rigidity is re-validated on every load.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::geometry::{GeometryError, RigidTransform};

#[derive(Debug, Error)]
pub enum TransformFileError {
    #[error("cannot parse transform: {0}")]
    Parse(String),
    #[error("matrix is not a rigid transform: {0}")]
    NotRigid(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses a transform from text in any accepted shape.
pub fn parse_transform_text(text: &str) -> Result<RigidTransform, TransformFileError> {
    let values = extract_values(text)?;
    Ok(RigidTransform::from_row_major(&values)?)
}

fn extract_values(text: &str) -> Result<[f64; 16], TransformFileError> {
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(text) {
        let array = match &value {
            serde_json::Value::Array(a) => Some(a),
            serde_json::Value::Object(o) => o.get("transform").and_then(|t| t.as_array()),
            _ => None,
        };
        if let Some(array) = array {
            let numbers: Option<Vec<f64>> = array.iter().map(|v| v.as_f64()).collect();
            let numbers = numbers
                .ok_or_else(|| TransformFileError::Parse("non-numeric array entry".into()))?;
            return to_sixteen(&numbers);
        }
        if value.is_object() {
            return Err(TransformFileError::Parse(
                "JSON object has no 16-number transform field".into(),
            ));
        }
        // A bare JSON number is also a valid plain-text token stream;
        // fall through to the whitespace path for a proper count error.
    }
    let numbers: Result<Vec<f64>, _> = text
        .split_whitespace()
        .map(|token| {
            token
                .parse::<f64>()
                .map_err(|e| TransformFileError::Parse(format!("{e} at token {token:?}")))
        })
        .collect();
    to_sixteen(&numbers?)
}

fn to_sixteen(numbers: &[f64]) -> Result<[f64; 16], TransformFileError> {
    <[f64; 16]>::try_from(numbers).map_err(|_| {
        TransformFileError::Parse(format!("expected 16 numbers, found {}", numbers.len()))
    })
}

/// Reads a transform file from disk.
pub fn read_transform(path: impl AsRef<Path>) -> Result<RigidTransform, TransformFileError> {
    parse_transform_text(&fs::read_to_string(path)?)
}

/// Writes a transform as four rows of four numbers.
pub fn write_transform_to(transform: &RigidTransform, out: &mut impl Write) -> io::Result<()> {
    let m = transform.to_row_major();
    for row in m.chunks(4) {
        writeln!(out, "{} {} {} {}", row[0], row[1], row[2], row[3])?;
    }
    Ok(())
}

/// Writes a transform file to disk.
pub fn write_transform(
    transform: &RigidTransform,
    path: impl AsRef<Path>,
) -> Result<(), TransformFileError> {
    let mut buf = Vec::new();
    write_transform_to(transform, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector3;

    fn sample() -> RigidTransform {
        let rot = nalgebra::Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(Vector3::new(1.0, -0.5, 2.0)),
            0.9,
        )
        .into_inner();
        RigidTransform::new(rot, Vector3::new(0.25, -3.0, 1.5)).unwrap()
    }

    #[test]
    fn plain_text_round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        write_transform_to(&t, &mut buf).unwrap();
        let back = parse_transform_text(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(t.to_row_major(), back.to_row_major());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pose.txt");
        let t = sample();
        write_transform(&t, &path).unwrap();
        assert_eq!(
            read_transform(&path).unwrap().to_row_major(),
            t.to_row_major()
        );
    }

    #[test]
    fn json_array_and_result_record_both_parse() {
        let t = sample();
        let m = t.to_row_major();
        let array = serde_json::to_string(&m.to_vec()).unwrap();
        let parsed = parse_transform_text(&array).unwrap();
        assert_eq!(parsed.to_row_major(), m);

        let record = format!("{{\"final_loss\": 0.5, \"transform\": {array}}}");
        let parsed = parse_transform_text(&record).unwrap();
        assert_eq!(parsed.to_row_major(), m);
    }

    #[test]
    fn identity_from_plain_numbers() {
        let text = "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
        let t = parse_transform_text(text).unwrap();
        assert_eq!(t.to_row_major(), RigidTransform::identity().to_row_major());
    }

    #[test]
    fn near_rigid_input_is_projected() {
        // A rotation perturbed at the 1e-7 level loads (tolerance 1e-6)
        // and is snapped back to an exact rotation.
        let t = sample();
        let mut m = t.to_row_major();
        m[0] += 3e-7;
        m[5] -= 2e-7;
        let text = m.map(|v| format!("{v:.17}")).join(" ");
        let loaded = parse_transform_text(&text).unwrap();
        let r = loaded.rotation();
        let residual = (r.transpose() * r - nalgebra::Matrix3::identity())
            .abs()
            .max();
        assert!(residual <= 1e-9);
    }

    #[test]
    fn rejects_non_rigid_and_malformed() {
        // Scaled rotation: clearly outside the 1e-6 gate.
        let text = "2 0 0 0 0 2 0 0 0 0 2 0 0 0 0 1";
        assert!(matches!(
            parse_transform_text(text).unwrap_err(),
            TransformFileError::NotRigid(_)
        ));
        assert!(matches!(
            parse_transform_text("1 2 3").unwrap_err(),
            TransformFileError::Parse(_)
        ));
        assert!(matches!(
            parse_transform_text("one two three").unwrap_err(),
            TransformFileError::Parse(_)
        ));
        assert!(matches!(
            parse_transform_text("{\"foo\": 1}").unwrap_err(),
            TransformFileError::Parse(_)
        ));
        // Bad bottom row.
        let text = "1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 2";
        assert!(matches!(
            parse_transform_text(text).unwrap_err(),
            TransformFileError::NotRigid(_)
        ));
    }
}
