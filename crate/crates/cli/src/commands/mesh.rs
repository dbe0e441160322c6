use std::path::Path;

use serde::Serialize;
use trimhelix::mesh::{helicoid_mesh, mesh_metadata, MeshMetadata};

use crate::error::{CliError, Exit};
use crate::manifest::sha256_hex;
use crate::output::{emit, envelope, render, write_file, write_sidecar, Format};

#[derive(Serialize)]
struct MeshReport<'a> {
    stl: String,
    stl_sha256: String,
    format: &'static str,
    metadata: &'a MeshMetadata,
}

pub fn run(path: &Path, out: &Path, resolution: usize, ascii: bool) -> Result<Exit, CliError> {
    let (design, _mat, mut manifest) = super::load_design(path, "mesh", None)?;
    let spec = design.spec;
    let mesh = helicoid_mesh(&spec, resolution)?;
    let meta = mesh_metadata(&spec, resolution, &mesh)?;
    let bytes = if ascii {
        mesh.to_ascii_stl("trimhelix")?.into_bytes()
    } else {
        mesh.to_stl_bytes()?
    };
    write_file(out, &bytes)?;
    manifest.resolved("resolution", resolution);
    let report = MeshReport {
        stl: out.display().to_string(),
        stl_sha256: sha256_hex(&bytes),
        format: if ascii { "ascii" } else { "binary" },
        metadata: &meta,
    };
    let manifest = manifest.build();
    write_sidecar(out, &manifest, &report)?;
    emit(&render(&envelope(&manifest, &report), Format::Json), None)?;
    Ok(Exit::Ok)
}
