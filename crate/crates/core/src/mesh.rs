//! Watertight triangle mesh of a helicoid segment and STL I/O.
//!
//! The solid is the radial extrusion, between `r_c - w/2` and `r_c + w/2`,
//! of a region on the unrolled cylinder `(theta, z)`: a bottom strip
//! `z in [0, t]`, a top strip `z in [H - t, H]`, and `N_h` ribbons, each a
//! half-turn helix of normal thickness `t`. The region is triangulated
//! column by column between angular grid lines; every angle where the
//! region changes shape (ribbon ends, ribbons leaving or joining a strip)
//! is a grid line, so neighbouring columns share vertices exactly.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::io::{self, Write as _};
use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{derive_geometry, GeometryError, HelicoidSpec};

pub const MIN_SEGMENTS_PER_TURN: usize = 8;
pub const DEFAULT_SEGMENTS_PER_TURN: usize = 128;
const STL_HEADER: &[u8] = b"trimhelix binary STL";
const TOPOLOGY_NOTE: &str = "N_h independent half-turn helical ribbons of section w x t at the \
centroid radius, joined by annular end rings of height t; simplified stand-in for the exact \
trimmed-helicoid surface";

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("resolution {0} is below {MIN_SEGMENTS_PER_TURN} segments per turn")]
    Resolution(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("adjacent helices overlap: vertical clearance {clearance:.3e} m <= 0")]
    HelixOverlap { clearance: f64 },
    #[error("helices never clear the end rings (free span {span:.3e} m <= 0)")]
    NoFreeSpan { span: f64 },
    #[error("mesh is empty")]
    Empty,
    #[error("mesh is not a closed oriented manifold: {0}")]
    NotWatertight(String),
    #[error("malformed STL: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TriMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub triangle_count: usize,
    pub euler_characteristic: i64,
    pub genus: i64,
    pub signed_volume: f64,
}

impl TriMesh {
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize].coords);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Checks that every directed edge appears once and its reverse once
    /// (closed, manifold, consistently wound), that no triangle is
    /// degenerate in index terms, and that the enclosed volume is positive.
    pub fn check(&self) -> Result<MeshReport, MeshError> {
        if self.triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = self.vertices.len() as u32;
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= n) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::NotWatertight(format!("triangle {k} has bad indices {t:?}")));
            }
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *directed.entry(e).or_default() += 1;
            }
        }
        for (&(a, b), &c) in &directed {
            if c != 1 {
                return Err(MeshError::NotWatertight(format!("edge {a}-{b} used {c} times in one direction")));
            }
            if directed.get(&(b, a)) != Some(&1) {
                return Err(MeshError::NotWatertight(format!("edge {a}-{b} has no opposite")));
            }
        }
        let vol = self.signed_volume();
        if !(vol > 0.0) {
            return Err(MeshError::NotWatertight(format!("signed volume {vol} is not positive")));
        }
        let mut used = vec![false; self.vertices.len()];
        self.triangles.iter().flatten().for_each(|&i| used[i as usize] = true);
        let v = used.iter().filter(|u| **u).count() as i64;
        let e = (directed.len() / 2) as i64;
        let f = self.triangles.len() as i64;
        let chi = v - e + f;
        Ok(MeshReport {
            vertex_count: v as usize,
            edge_count: e as usize,
            triangle_count: f as usize,
            euler_characteristic: chi,
            genus: (2 - chi) / 2,
            signed_volume: vol,
        })
    }

    fn normal(&self, t: &[u32; 3]) -> Vector3<f64> {
        let [a, b, c] = t.map(|i| self.vertices[i as usize]);
        (b - a).cross(&(c - a)).try_normalize(0.0).unwrap_or_else(Vector3::zeros)
    }

    /// Binary STL: 80-byte header, little-endian u32 count, then per facet
    /// normal, three vertices (f32) and a zero attribute word.
    pub fn to_stl_bytes(&self) -> Result<Vec<u8>, MeshError> {
        self.check()?;
        let mut out = Vec::with_capacity(84 + 50 * self.triangles.len());
        let mut header = [0u8; 80];
        header[..STL_HEADER.len()].copy_from_slice(STL_HEADER);
        out.extend_from_slice(&header);
        out.extend_from_slice(&(self.triangles.len() as u32).to_le_bytes());
        for t in &self.triangles {
            let nrm = self.normal(t);
            let mut put = |v: &Vector3<f64>| {
                for c in v.iter() {
                    out.extend_from_slice(&(*c as f32).to_le_bytes());
                }
            };
            put(&nrm);
            for &i in t {
                put(&self.vertices[i as usize].coords);
            }
            out.extend_from_slice(&0u16.to_le_bytes());
        }
        Ok(out)
    }

    pub fn to_ascii_stl(&self, name: &str) -> Result<String, MeshError> {
        self.check()?;
        let mut s = format!("solid {name}\n");
        for t in &self.triangles {
            let n = self.normal(t).map(|c| c as f32);
            s.push_str(&format!("  facet normal {:e} {:e} {:e}\n    outer loop\n", n.x, n.y, n.z));
            for &i in t {
                let p = self.vertices[i as usize].map(|c| c as f32);
                s.push_str(&format!("      vertex {:e} {:e} {:e}\n", p.x, p.y, p.z));
            }
            s.push_str("    endloop\n  endfacet\n");
        }
        s.push_str(&format!("endsolid {name}\n"));
        Ok(s)
    }

    /// Parses binary STL, merging vertices with identical f32 coordinates.
    pub fn from_stl_bytes(bytes: &[u8]) -> Result<Self, MeshError> {
        if bytes.len() < 84 {
            return Err(MeshError::Malformed("shorter than the 84-byte preamble".into()));
        }
        let count = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
        if bytes.len() != 84 + 50 * count {
            return Err(MeshError::Malformed(format!(
                "{count} facets need {} bytes, file has {}",
                84 + 50 * count,
                bytes.len()
            )));
        }
        let mut mesh = TriMesh::default();
        let mut index: HashMap<[u32; 3], u32> = HashMap::new();
        let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        for k in 0..count {
            let base = 84 + 50 * k + 12;
            let mut tri = [0u32; 3];
            for (j, slot) in tri.iter_mut().enumerate() {
                let o = base + 12 * j;
                let p = [f(o), f(o + 4), f(o + 8)];
                let key = p.map(f32::to_bits);
                *slot = *index.entry(key).or_insert_with(|| {
                    mesh.vertices.push(Point3::new(p[0] as f64, p[1] as f64, p[2] as f64));
                    (mesh.vertices.len() - 1) as u32
                });
            }
            mesh.triangles.push(tri);
        }
        Ok(mesh)
    }
}

pub fn write_stl(mesh: &TriMesh, path: &Path) -> Result<(), MeshError> {
    let bytes = mesh.to_stl_bytes()?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_stl(path: &Path) -> Result<TriMesh, MeshError> {
    TriMesh::from_stl_bytes(&std::fs::read(path)?)
}

/// Ribbon layout on the unrolled cylinder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RibbonLayout {
    pub centroid_radius: f64,
    /// Pitch angle of the ribbon centreline at `r_c`.
    pub alpha: f64,
    /// Vertical thickness `t / cos(alpha)`.
    pub vertical_thickness: f64,
    /// Rise per radian, `(H - t_v) / pi`.
    pub rise: f64,
    pub phases: Vec<f64>,
}

pub fn ribbon_layout(spec: &HelicoidSpec) -> Result<RibbonLayout, MeshError> {
    let g = derive_geometry(spec)?;
    let rc = g.centroid_radius;
    let (h, t) = (spec.height, spec.thickness);
    let mut alpha = (h / (PI * rc)).atan();
    for _ in 0..200 {
        let tv = t / alpha.cos();
        let next = ((h - tv) / (PI * rc)).atan();
        if (next - alpha).abs() < 1e-15 {
            alpha = next;
            break;
        }
        alpha = next;
    }
    let tv = t / alpha.cos();
    let n = spec.helices as usize;
    let rise = (h - tv) / PI;
    let clearance = 2.0 * PI * rise / n as f64 - tv;
    if !(h - tv > 0.0) || clearance <= 0.0 {
        return Err(MeshError::HelixOverlap { clearance });
    }
    let span = h - 2.0 * t - tv;
    if span <= 0.0 {
        return Err(MeshError::NoFreeSpan { span });
    }
    Ok(RibbonLayout {
        centroid_radius: rc,
        alpha,
        vertical_thickness: tv,
        rise,
        phases: (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect(),
    })
}

/// Boundary curve of the region in `(theta, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Curve {
    Level(f64),
    RibbonLow(usize),
    RibbonHigh(usize),
}

/// Ribbon parameter `u` of `theta` for ribbon `i`, in `[0, 2 pi)`.
fn ribbon_u(layout: &RibbonLayout, i: usize, theta: f64) -> f64 {
    (theta - layout.phases[i]).rem_euclid(2.0 * PI)
}

fn eval(curve: Curve, layout: &RibbonLayout, theta: f64, near_start: bool) -> f64 {
    let u = |i: usize| {
        let u = ribbon_u(layout, i, theta);
        // the ribbon's start line wraps to 2 pi when approached from inside
        if near_start && u > PI { 0.0 } else { u.min(PI) }
    };
    match curve {
        Curve::Level(z) => z,
        Curve::RibbonLow(i) => layout.rise * u(i),
        Curve::RibbonHigh(i) => layout.rise * u(i) + layout.vertical_thickness,
    }
}

/// Vertical extents of the region at `theta`, merged, each with its lower
/// and upper boundary curve.
fn intervals(spec: &HelicoidSpec, layout: &RibbonLayout, theta: f64) -> Vec<(f64, f64, Curve, Curve)> {
    let (h, t) = (spec.height, spec.thickness);
    let mut raw = vec![
        (0.0, t, Curve::Level(0.0), Curve::Level(t)),
        (h - t, h, Curve::Level(h - t), Curve::Level(h)),
    ];
    for i in 0..layout.phases.len() {
        let u = ribbon_u(layout, i, theta);
        if u > 0.0 && u < PI {
            let lo = layout.rise * u;
            raw.push((lo, lo + layout.vertical_thickness, Curve::RibbonLow(i), Curve::RibbonHigh(i)));
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64, Curve, Curve)> = Vec::new();
    for r in raw {
        match out.last_mut() {
            Some(last) if r.0 <= last.1 => {
                if r.1 > last.1 {
                    last.1 = r.1;
                    last.3 = r.3;
                }
            }
            _ => out.push(r),
        }
    }
    out
}

/// Sorted angular grid lines in `[0, 2 pi)`: a uniform grid plus every
/// event angle, with near-duplicates collapsed onto the event.
fn grid_lines(spec: &HelicoidSpec, layout: &RibbonLayout, segments: usize) -> Vec<f64> {
    let (h, t) = (spec.height, spec.thickness);
    let tv = layout.vertical_thickness;
    let events_u = [0.0, t / layout.rise, (h - t - tv) / layout.rise, PI];
    let mut events: Vec<f64> = layout
        .phases
        .iter()
        .flat_map(|p| events_u.map(|u| (p + u).rem_euclid(2.0 * PI)))
        .collect();
    events.sort_by(f64::total_cmp);
    let tol = 1e-9;
    let mut lines: Vec<f64> = events.clone();
    for k in 0..segments {
        let a = 2.0 * PI * k as f64 / segments as f64;
        let close = |e: &f64| {
            let d = (a - e).abs();
            d.min(2.0 * PI - d) < tol
        };
        if !events.iter().any(close) {
            lines.push(a);
        }
    }
    lines.sort_by(f64::total_cmp);
    lines.dedup_by(|a, b| (*a - *b).abs() < tol);
    if lines.len() > 1 && (lines[0] + 2.0 * PI - lines[lines.len() - 1]) < tol {
        lines.pop();
    }
    lines
}

struct Polygon {
    left: (f64, f64),
    right: (f64, f64),
}

/// Mesh of one segment in canonical pose (base ring on `z = 0`, axis `+z`).
pub fn helicoid_mesh(spec: &HelicoidSpec, segments_per_turn: usize) -> Result<TriMesh, MeshError> {
    if segments_per_turn < MIN_SEGMENTS_PER_TURN {
        return Err(MeshError::Resolution(segments_per_turn));
    }
    spec.check()?;
    let layout = ribbon_layout(spec)?;
    let lines = grid_lines(spec, &layout, segments_per_turn);
    let m = lines.len();
    let theta_at = |j: usize| if j == m { lines[0] + 2.0 * PI } else { lines[j] };
    let snap_tol = 1e-12 * spec.height;

    // polygons per column, by evaluating the mid-column curves on both lines
    let mut columns: Vec<Vec<Polygon>> = Vec::with_capacity(m);
    for j in 0..m {
        let (a, b) = (theta_at(j), theta_at(j + 1));
        let mid = 0.5 * (a + b);
        let polys = intervals(spec, &layout, mid)
            .into_iter()
            .map(|(_, _, lo, hi)| Polygon {
                left: (eval(lo, &layout, a, true), eval(hi, &layout, a, true)),
                right: (eval(lo, &layout, b, false), eval(hi, &layout, b, false)),
            })
            .collect();
        columns.push(polys);
    }

    // canonical z values per line
    let mut line_z: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (j, polys) in columns.iter().enumerate() {
        for p in polys {
            line_z[j].extend([p.left.0, p.left.1]);
            line_z[(j + 1) % m].extend([p.right.0, p.right.1]);
        }
    }
    for zs in &mut line_z {
        zs.sort_by(f64::total_cmp);
        zs.dedup_by(|a, b| (*a - *b).abs() <= snap_tol);
    }
    let snap = |j: usize, z: f64| -> usize {
        let zs = &line_z[j];
        let k = zs.partition_point(|v| *v < z - snap_tol);
        debug_assert!(k < zs.len() && (zs[k] - z).abs() <= snap_tol);
        k
    };

    // 2D vertex ids, assigned in line order
    let mut vid: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut planar: Vec<(f64, f64)> = Vec::new();
    for (j, zs) in line_z.iter().enumerate() {
        for (k, z) in zs.iter().enumerate() {
            vid.insert((j, k), planar.len() as u32);
            planar.push((lines[j], *z));
        }
    }

    let mut tris2d: Vec<[u32; 3]> = Vec::new();
    for (j, polys) in columns.iter().enumerate() {
        let jr = (j + 1) % m;
        for p in polys {
            let (l0, l1) = (snap(j, p.left.0), snap(j, p.left.1));
            let (r0, r1) = (snap(jr, p.right.0), snap(jr, p.right.1));
            let left: Vec<u32> = (l0..=l1).map(|k| vid[&(j, k)]).collect();
            let right: Vec<u32> = (r0..=r1).map(|k| vid[&(jr, k)]).collect();
            let z = |v: u32| planar[v as usize].1;
            let (mut a, mut b) = (0usize, 0usize);
            while a + 1 < left.len() || b + 1 < right.len() {
                let advance_left = if a + 1 == left.len() {
                    false
                } else if b + 1 == right.len() {
                    true
                } else {
                    z(left[a + 1]) <= z(right[b + 1])
                };
                if advance_left {
                    tris2d.push([left[a], right[b], left[a + 1]]);
                    a += 1;
                } else {
                    tris2d.push([left[a], right[b], right[b + 1]]);
                    b += 1;
                }
            }
        }
    }

    // extrude: vertex k -> outer 2k, inner 2k + 1
    let (r_in, r_out) = (
        layout.centroid_radius - spec.width / 2.0,
        layout.centroid_radius + spec.width / 2.0,
    );
    let mut mesh = TriMesh::default();
    for &(th, z) in &planar {
        let (s, c) = th.sin_cos();
        mesh.vertices.push(Point3::new(r_out * c, r_out * s, z));
        mesh.vertices.push(Point3::new(r_in * c, r_in * s, z));
    }
    let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
    for t in &tris2d {
        for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *directed.entry(e).or_default() += 1;
        }
        mesh.triangles.push(t.map(|v| 2 * v));
        mesh.triangles.push([2 * t[0] + 1, 2 * t[2] + 1, 2 * t[1] + 1]);
    }
    let mut boundary: Vec<(u32, u32)> = directed
        .keys()
        .filter(|(a, b)| !directed.contains_key(&(*b, *a)))
        .copied()
        .collect();
    boundary.sort_unstable();
    for (a, b) in boundary {
        let (ao, ai, bo, bi) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        mesh.triangles.push([ao, ai, bi]);
        mesh.triangles.push([ao, bi, bo]);
    }
    mesh.check()?;
    Ok(mesh)
}

/// `N_h * (pi r_c / cos alpha) * w * t + 2 * (2 pi r_c w) * t`.
pub fn swept_volume_estimate(spec: &HelicoidSpec) -> Result<f64, MeshError> {
    let l = ribbon_layout(spec)?;
    let rc = l.centroid_radius;
    let (w, t) = (spec.width, spec.thickness);
    Ok(spec.helices as f64 * (PI * rc / l.alpha.cos()) * w * t + 2.0 * (2.0 * PI * rc * w) * t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshMetadata {
    pub spec: HelicoidSpec,
    pub segments_per_turn: usize,
    pub triangle_count: usize,
    pub vertex_count: usize,
    pub volume_m3: f64,
    pub estimated_volume_m3: f64,
    pub euler_characteristic: i64,
    pub genus: i64,
    pub topology: &'static str,
}

pub fn mesh_metadata(spec: &HelicoidSpec, segments_per_turn: usize, mesh: &TriMesh) -> Result<MeshMetadata, MeshError> {
    let r = mesh.check()?;
    Ok(MeshMetadata {
        spec: *spec,
        segments_per_turn,
        triangle_count: r.triangle_count,
        vertex_count: r.vertex_count,
        volume_m3: r.signed_volume,
        estimated_volume_m3: swept_volume_estimate(spec)?,
        euler_characteristic: r.euler_characteristic,
        genus: r.genus,
        topology: TOPOLOGY_NOTE,
    })
}
