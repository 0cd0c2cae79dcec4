//! Wavefront OBJ subset: `v x y z` and triangular `f i j k` records.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::{MeshError, TriMesh, Vec3};

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face has {count} vertices, only triangles are supported")]
    NonTriangular { line: usize, count: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriMesh, ObjError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ObjError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<TriMesh, ObjError> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            None => continue,
            Some("v") => {
                let coords: Vec<&str> = tokens.collect();
                if coords.len() < 3 {
                    return Err(ObjError::Parse {
                        line,
                        message: format!("vertex needs 3 coordinates, found {}", coords.len()),
                    });
                }
                let mut xyz = [0.0; 3];
                for (slot, tok) in xyz.iter_mut().zip(&coords) {
                    *slot = tok.parse().map_err(|_| ObjError::Parse {
                        line,
                        message: format!("invalid coordinate {tok:?}"),
                    })?;
                }
                positions.push(Vec3::from(xyz));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(ObjError::NonTriangular {
                        line,
                        count: refs.len(),
                    });
                }
                let mut face = [0usize; 3];
                for (slot, tok) in face.iter_mut().zip(&refs) {
                    *slot = parse_index(tok, positions.len(), line)?;
                }
                faces.push(face);
            }
            // Normals, texture coordinates, groups and materials carry no
            // geometry we use.
            Some("vn" | "vt" | "vp" | "o" | "g" | "s" | "usemtl" | "mtllib") => continue,
            Some(other) => {
                return Err(ObjError::Parse {
                    line,
                    message: format!("unsupported record {other:?}"),
                })
            }
        }
    }
    if positions.is_empty() || faces.is_empty() {
        return Err(ObjError::Parse {
            line: 0,
            message: "file contains no vertices or no faces".into(),
        });
    }
    Ok(TriMesh::build(positions, faces)?)
}

fn parse_index(token: &str, seen: usize, line: usize) -> Result<usize, ObjError> {
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head.parse().map_err(|_| ObjError::Parse {
        line,
        message: format!("invalid face index {token:?}"),
    })?;
    let index = match raw {
        0 => None,
        r if r > 0 => Some(r as usize - 1),
        r => (seen as i64 + r).try_into().ok(),
    };
    index.ok_or_else(|| ObjError::Parse {
        line,
        message: format!("face index {raw} out of range"),
    })
}

/// Serializes with shortest round-trip float formatting, so a reload
/// reproduces every coordinate bit for bit.
pub fn write_obj(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(40 * (mesh.vertex_count() + mesh.face_count()));
    for p in mesh.positions() {
        let _ = writeln!(out, "v {:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn save_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), ObjError> {
    let path = path.as_ref();
    fs::write(path, write_obj(mesh)).map_err(|source| ObjError::Io {
        path: path.display().to_string(),
        source,
    })
}
