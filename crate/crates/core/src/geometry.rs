//! Convex polytopes in R² and R³: Minkowski sums, exact volume/surface
//! measures, isoperimetric ratios, and the two speculative inequalities
//! relating them. Conjecture deficits are reported, never asserted —
//! negative values are counterexample candidates to persist, not failures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{DeficitReport, Params};
use crate::rng::{derive_seed, Rng};
use crate::special::unit_ball_volume;

/// Convex polytope given by vertices; hull, facets and measures are derived
/// on construction. A single-point "body" is allowed only so it can act as
/// the Minkowski identity; measure queries on it fail.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawBody", into = "RawBody")]
pub struct ConvexBody {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Vec<usize>>,
    volume: f64,
    surface: f64,
}

impl ConvexBody {
    pub fn from_vertices(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidDimension(
                "bodies live in dimension 2 or 3".into(),
            ));
        }
        if points.is_empty() || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidBody(
                "need a nonempty point list of matching dimension".into(),
            ));
        }
        if points
            .iter()
            .any(|p| p.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidBody("vertices must be finite".into()));
        }
        let mut pts = points.to_vec();
        canonical_dedup(&mut pts);
        if pts.len() == 1 {
            return Ok(ConvexBody {
                dim,
                vertices: pts,
                facets: Vec::new(),
                volume: 0.0,
                surface: 0.0,
            });
        }
        match dim {
            2 => {
                let hull = hull_2d(&pts)?;
                let (volume, surface) = polygon_measures(&hull);
                if volume <= 1e-12 {
                    return Err(Error::InvalidBody("hull is not full-dimensional".into()));
                }
                let n = hull.len();
                let facets = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
                Ok(ConvexBody {
                    dim,
                    vertices: hull,
                    facets,
                    volume,
                    surface,
                })
            }
            _ => {
                let (verts, tris) = hull_3d(&pts)?;
                let (volume, surface) = polyhedron_measures(&verts, &tris);
                if volume <= 1e-12 {
                    return Err(Error::InvalidBody("hull is not full-dimensional".into()));
                }
                Ok(ConvexBody {
                    dim,
                    vertices: verts,
                    facets: tris.into_iter().map(|t| t.to_vec()).collect(),
                    volume,
                    surface,
                })
            }
        }
    }

    /// Axis-aligned box from opposite corners.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dim = lo.len();
        let mut pts = Vec::new();
        for mask in 0..(1usize << dim) {
            let p: Vec<f64> = (0..dim)
                .map(|a| if mask >> a & 1 == 1 { hi[a] } else { lo[a] })
                .collect();
            pts.push(p);
        }
        Self::from_vertices(dim, &pts)
    }

    /// Regular n-gon approximation of the disk of radius r.
    pub fn disk_polygon(r: f64, n: usize) -> Result<Self> {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        Self::from_vertices(2, &pts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    pub fn is_degenerate(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn surface(&self) -> f64 {
        self.surface
    }

    /// |∂A| / |∂B_A| where B_A is the ball of equal volume:
    /// |∂B_A| = d·ω_d^{1/d}·Vol^{(d−1)/d}.
    pub fn iso_ratio(&self) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::InvalidBody("degenerate body has no ratio".into()));
        }
        let d = self.dim as f64;
        let omega = unit_ball_volume(self.dim);
        let ball_surface = d * omega.powf(1.0 / d) * self.volume.powf((d - 1.0) / d);
        Ok(self.surface / ball_surface)
    }

    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        let pts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|p| p.iter().zip(shift).map(|(x, s)| x + s).collect())
            .collect();
        Self::from_vertices(self.dim, &pts)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        if s <= 0.0 {
            return Err(Error::InvalidScale(s));
        }
        let pts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|p| p.iter().map(|x| x * s).collect())
            .collect();
        Self::from_vertices(self.dim, &pts)
    }
}

/// Summary row for one body.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoReport {
    pub body_id: String,
    pub volume: f64,
    pub surface: f64,
    pub ball_surface: f64,
    pub iso_ratio: f64,
}

impl IsoReport {
    pub fn of(id: impl Into<String>, body: &ConvexBody) -> Result<Self> {
        let ratio = body.iso_ratio()?;
        Ok(IsoReport {
            body_id: id.into(),
            volume: body.volume(),
            surface: body.surface(),
            ball_surface: body.surface() / ratio,
            iso_ratio: ratio,
        })
    }
}

fn canonical_dedup(pts: &mut Vec<Vec<f64>>) {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, &x| m.max(x.abs()));
    let tol = 1e-12 * scale;
    pts.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (*x - *y).abs() <= tol));
}

/// Andrew monotone chain; returns the hull in counter-clockwise order.
fn hull_2d(pts: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let cross =
        |o: &[f64], a: &[f64], b: &[f64]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &sorted {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in sorted.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::InvalidBody("2-d hull is degenerate".into()));
    }
    Ok(lower)
}

/// Shoelace area and perimeter of a CCW polygon.
fn polygon_measures(hull: &[Vec<f64>]) -> (f64, f64) {
    let n = hull.len();
    let mut area2 = 0.0;
    let mut perim = 0.0;
    for i in 0..n {
        let a = &hull[i];
        let b = &hull[(i + 1) % n];
        area2 += a[0] * b[1] - b[0] * a[1];
        perim += ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    }
    (area2.abs() / 2.0, perim)
}

type P3 = [f64; 3];

fn sub(a: &P3, b: &P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: &P3, b: &P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: &P3, b: &P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &P3) -> f64 {
    dot3(a, a).sqrt()
}

type HullMesh = (Vec<Vec<f64>>, Vec<[usize; 3]>);

/// Incremental convex hull; returns hull vertices and outward-oriented
/// triangles indexing into them. Points within tolerance of a face are
/// treated as interior, so coplanar inputs cannot flip faces.
fn hull_3d(points: &[Vec<f64>]) -> Result<HullMesh> {
    let pts: Vec<P3> = points.iter().map(|p| [p[0], p[1], p[2]]).collect();
    let n = pts.len();
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, &x| m.max(x.abs()));
    let eps = 1e-9 * scale;

    if n < 4 {
        return Err(Error::InvalidBody("3-d hull needs ≥ 4 points".into()));
    }

    // initial tetrahedron: spread pair, then farthest from line, then plane
    let i0 = 0;
    let i1 = (0..n)
        .max_by(|&a, &b| {
            norm3(&sub(&pts[a], &pts[i0]))
                .partial_cmp(&norm3(&sub(&pts[b], &pts[i0])))
                .unwrap()
        })
        .unwrap();
    let dir = sub(&pts[i1], &pts[i0]);
    if norm3(&dir) < eps {
        return Err(Error::InvalidBody("all points coincide".into()));
    }
    let i2 = (0..n)
        .max_by(|&a, &b| {
            let da = norm3(&cross3(&dir, &sub(&pts[a], &pts[i0])));
            let db = norm3(&cross3(&dir, &sub(&pts[b], &pts[i0])));
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let normal = cross3(&dir, &sub(&pts[i2], &pts[i0]));
    if norm3(&normal) < eps {
        return Err(Error::InvalidBody("points are collinear".into()));
    }
    let i3 = (0..n)
        .max_by(|&a, &b| {
            let da = dot3(&normal, &sub(&pts[a], &pts[i0])).abs();
            let db = dot3(&normal, &sub(&pts[b], &pts[i0])).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    if dot3(&normal, &sub(&pts[i3], &pts[i0])).abs() < eps {
        return Err(Error::InvalidBody("points are coplanar".into()));
    }

    let centroid = [
        (pts[i0][0] + pts[i1][0] + pts[i2][0] + pts[i3][0]) / 4.0,
        (pts[i0][1] + pts[i1][1] + pts[i2][1] + pts[i3][1]) / 4.0,
        (pts[i0][2] + pts[i1][2] + pts[i2][2] + pts[i3][2]) / 4.0,
    ];

    // (vertex indices, outward normal, plane offset)
    struct Face {
        v: [usize; 3],
        normal: P3,
        offset: f64,
    }
    let make_face = |a: usize, b: usize, c: usize| -> Face {
        let mut v = [a, b, c];
        let mut normal = cross3(&sub(&pts[b], &pts[a]), &sub(&pts[c], &pts[a]));
        if dot3(&normal, &sub(&centroid, &pts[a])) > 0.0 {
            v = [a, c, b];
            normal = [-normal[0], -normal[1], -normal[2]];
        }
        let offset = dot3(&normal, &pts[v[0]]);
        Face { v, normal, offset }
    };

    let mut faces = vec![
        make_face(i0, i1, i2),
        make_face(i0, i1, i3),
        make_face(i0, i2, i3),
        make_face(i1, i2, i3),
    ];

    let mut in_hull = vec![false; n];
    for &i in &[i0, i1, i2, i3] {
        in_hull[i] = true;
    }

    for p in 0..n {
        if in_hull[p] {
            continue;
        }
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| {
                dot3(&f.normal, &pts[p]) - f.offset > eps * norm3(&f.normal).max(1.0)
            })
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // horizon: directed edges of visible faces whose reverse edge is not
        // itself part of the visible set
        use std::collections::HashSet;
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &fi in &visible {
            let v = faces[fi].v;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|&&(a, b)| !edges.contains(&(b, a)))
            .cloned()
            .collect();
        let mut visible_sorted = visible.clone();
        visible_sorted.sort_unstable_by(|a, b| b.cmp(a));
        for fi in visible_sorted {
            faces.swap_remove(fi);
        }
        for (a, b) in horizon {
            faces.push(make_face(a, b, p));
        }
        in_hull[p] = true;
    }

    // collect used vertices, remap deterministically
    let mut used: Vec<usize> = faces.iter().flat_map(|f| f.v).collect();
    used.sort_unstable();
    used.dedup();
    let remap: std::collections::HashMap<usize, usize> =
        used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let verts: Vec<Vec<f64>> = used.iter().map(|&i| points[i].clone()).collect();
    let tris: Vec<[usize; 3]> = faces
        .iter()
        .map(|f| [remap[&f.v[0]], remap[&f.v[1]], remap[&f.v[2]]])
        .collect();
    Ok((verts, tris))
}

/// Signed tetrahedron volume sum and facet area sum, with outward faces.
fn polyhedron_measures(verts: &[Vec<f64>], tris: &[[usize; 3]]) -> (f64, f64) {
    let mut vol6 = 0.0;
    let mut area = 0.0;
    for t in tris {
        let a: P3 = [verts[t[0]][0], verts[t[0]][1], verts[t[0]][2]];
        let b: P3 = [verts[t[1]][0], verts[t[1]][1], verts[t[1]][2]];
        let c: P3 = [verts[t[2]][0], verts[t[2]][1], verts[t[2]][2]];
        let cr = cross3(&b, &c);
        vol6 += dot3(&a, &cr);
        area += norm3(&cross3(&sub(&b, &a), &sub(&c, &a))) / 2.0;
    }
    (vol6.abs() / 6.0, area)
}

/// Minkowski sum: convex hull of all pairwise vertex sums (exact for
/// polytopes). `A + {0} = A`.
pub fn minkowski_sum(a: &ConvexBody, b: &ConvexBody) -> Result<ConvexBody> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidPair(format!(
            "dimension mismatch {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let mut sums = Vec::with_capacity(a.vertices.len() * b.vertices.len());
    for pa in &a.vertices {
        for pb in &b.vertices {
            sums.push(pa.iter().zip(pb).map(|(x, y)| x + y).collect());
        }
    }
    ConvexBody::from_vertices(a.dim(), &sums)
}

/// First conjectured inequality:
/// Vol(A+B)^{1/d} ≤ (Vol(A)^{1/d} + Vol(B)^{1/d})·(λ·iso(A) + λ̄·iso(B)),
/// λ = Vol(B)^{1/d}/(Vol(A)^{1/d} + Vol(B)^{1/d}). Reported, never asserted.
pub fn conjecture1_deficit(a: &ConvexBody, b: &ConvexBody) -> Result<DeficitReport> {
    let d = a.dim() as f64;
    let sum = minkowski_sum(a, b)?;
    let ra = a.volume().powf(1.0 / d);
    let rb = b.volume().powf(1.0 / d);
    let lambda = rb / (ra + rb);
    let lhs = sum.volume().powf(1.0 / d);
    let rhs = (ra + rb) * (lambda * a.iso_ratio()? + (1.0 - lambda) * b.iso_ratio()?);
    Ok(DeficitReport::new(
        "conjecture1",
        crate::estimate::Estimate::exact(lhs),
        crate::estimate::Estimate::exact(rhs),
        Params::default().with_lambda(lambda),
    ))
}

/// Second conjectured inequality: iso(A+B) ≤ iso(A)·iso(B). Reported only.
pub fn conjecture2_deficit(a: &ConvexBody, b: &ConvexBody) -> Result<DeficitReport> {
    let sum = minkowski_sum(a, b)?;
    let lhs = sum.iso_ratio()?;
    let rhs = a.iso_ratio()? * b.iso_ratio()?;
    Ok(DeficitReport::new(
        "conjecture2",
        crate::estimate::Estimate::exact(lhs),
        crate::estimate::Estimate::exact(rhs),
        Params::default(),
    ))
}

/// Brunn–Minkowski sanity deficit (a classical theorem, usable as an oracle):
/// Vol(A+B)^{1/d} − Vol(A)^{1/d} − Vol(B)^{1/d} ≥ 0.
pub fn brunn_minkowski_gap(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    let d = a.dim() as f64;
    let sum = minkowski_sum(a, b)?;
    Ok(sum.volume().powf(1.0 / d) - a.volume().powf(1.0 / d) - b.volume().powf(1.0 / d))
}

/// Point generators for random bodies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    GaussianCloud,
    Sphere,
    Anisotropic,
}

/// Hull of k random points; deterministic in the seed, retried (with derived
/// seeds) on the measure-zero degenerate draws.
pub fn random_body(seed: u64, dim: usize, k: usize, generator: Generator) -> Result<ConvexBody> {
    if k < dim + 1 {
        return Err(Error::InvalidBody(format!(
            "need at least dim+1 = {} points, got {k}",
            dim + 1
        )));
    }
    for attempt in 0..32u64 {
        let mut rng = Rng::new(derive_seed(seed, attempt));
        let mut pts = Vec::with_capacity(k);
        for _ in 0..k {
            let mut p: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
            match generator {
                Generator::GaussianCloud => {}
                Generator::Sphere => {
                    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                    for x in p.iter_mut() {
                        *x /= norm;
                    }
                }
                Generator::Anisotropic => {
                    for (a, x) in p.iter_mut().enumerate() {
                        *x *= 1.0 + 2.0 * a as f64;
                    }
                }
            }
            pts.push(p);
        }
        if let Ok(body) = ConvexBody::from_vertices(dim, &pts) {
            if !body.is_degenerate() {
                return Ok(body);
            }
        }
    }
    Err(Error::InvalidBody(
        "degenerate draws persisted beyond the retry bound".into(),
    ))
}

/// Search configuration for the conjecture prober.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchConfig {
    pub dim: usize,
    pub pairs: usize,
    pub points_per_body: usize,
    pub seed: u64,
    pub generator: Generator,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairOutcome {
    pub seed_a: u64,
    pub seed_b: u64,
    pub dim: usize,
    pub conj1_deficit: f64,
    pub conj2_deficit: f64,
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub outcomes: Vec<PairOutcome>,
    pub min_conj1: f64,
    pub min_conj2: f64,
    pub negative_conj1: usize,
    pub negative_conj2: usize,
    /// The minimizing pairs for each conjecture, for persistence.
    pub worst_conj1: Option<(ConvexBody, ConvexBody)>,
    pub worst_conj2: Option<(ConvexBody, ConvexBody)>,
}

pub fn search_counterexamples(config: &SearchConfig) -> Result<SearchReport> {
    use rayon::prelude::*;
    let outcomes: Vec<PairOutcome> = (0..config.pairs)
        .into_par_iter()
        .map(|i| -> Result<PairOutcome> {
            let seed_a = derive_seed(config.seed, 2 * i as u64);
            let seed_b = derive_seed(config.seed, 2 * i as u64 + 1);
            let a = random_body(seed_a, config.dim, config.points_per_body, config.generator)?;
            let b = random_body(seed_b, config.dim, config.points_per_body, config.generator)?;
            Ok(PairOutcome {
                seed_a,
                seed_b,
                dim: config.dim,
                conj1_deficit: conjecture1_deficit(&a, &b)?.deficit,
                conj2_deficit: conjecture2_deficit(&a, &b)?.deficit,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rebuild = |o: &PairOutcome| -> Result<(ConvexBody, ConvexBody)> {
        Ok((
            random_body(o.seed_a, config.dim, config.points_per_body, config.generator)?,
            random_body(o.seed_b, config.dim, config.points_per_body, config.generator)?,
        ))
    };
    let argmin1 = outcomes
        .iter()
        .min_by(|a, b| a.conj1_deficit.partial_cmp(&b.conj1_deficit).unwrap());
    let argmin2 = outcomes
        .iter()
        .min_by(|a, b| a.conj2_deficit.partial_cmp(&b.conj2_deficit).unwrap());
    Ok(SearchReport {
        min_conj1: argmin1.map(|o| o.conj1_deficit).unwrap_or(f64::NAN),
        min_conj2: argmin2.map(|o| o.conj2_deficit).unwrap_or(f64::NAN),
        negative_conj1: outcomes.iter().filter(|o| o.conj1_deficit < 0.0).count(),
        negative_conj2: outcomes.iter().filter(|o| o.conj2_deficit < 0.0).count(),
        worst_conj1: argmin1.map(rebuild).transpose()?,
        worst_conj2: argmin2.map(rebuild).transpose()?,
        outcomes,
    })
}

// ---- serde bridge ----

#[derive(Serialize, Deserialize)]
struct RawBody {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<RawBody> for ConvexBody {
    type Error = Error;
    fn try_from(raw: RawBody) -> Result<Self> {
        ConvexBody::from_vertices(raw.dim, &raw.vertices)
    }
}

impl From<ConvexBody> for RawBody {
    fn from(b: ConvexBody) -> Self {
        RawBody {
            dim: b.dim,
            vertices: b.vertices,
        }
    }
}
