//! Synthetic ground-truth fields: 1D gradient transects and 2D patchy grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::material::{MaterialClass, MaterialColumn, PHI_BOUNDS};
use super::{EnvironmentConfig, TerrainError};

const SPAN_TOLERANCE: f64 = 1e-9;

/// One stretch of a transect. `span` is a pair of fractions of the transect
/// length; when `end` is given the column is linearly interpolated across it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub span: [f64; 2],
    pub class: MaterialClass,
    pub start: MaterialColumn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<MaterialColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSpec {
    /// m
    pub length: f64,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    /// Patch center, m.
    pub center: [f64; 2],
    /// m
    pub radius: f64,
    pub column: MaterialColumn,
}

fn default_cell() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub width: f64,
    pub height: f64,
    #[serde(default = "default_cell")]
    pub cell: f64,
    pub background: MaterialColumn,
    #[serde(default)]
    pub patches: Vec<Patch>,
    /// Per-cell uniform perturbation of packing fraction, drawn from the
    /// environment seed. Zero disables it.
    #[serde(default)]
    pub phi_jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Transect1D { length: f64 },
    Grid2D { width: f64, height: f64, cell: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Columns {
    Segments(Vec<Segment>),
    Cells {
        nx: usize,
        ny: usize,
        /// Row-major, `j * nx + i`.
        cells: Vec<MaterialColumn>,
        /// Index of the covering patch per cell, if any.
        owner: Vec<Option<usize>>,
        patches: Vec<Patch>,
    },
}

/// An immutable ground-truth field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainField {
    geometry: Geometry,
    columns: Columns,
}

pub fn make_transect(spec: &GradientSpec, _env: &EnvironmentConfig) -> Result<TerrainField, TerrainError> {
    if !(spec.length > 0.0 && spec.length.is_finite()) {
        return Err(TerrainError::Specification(format!(
            "transect length must be positive, got {}",
            spec.length
        )));
    }
    if spec.segments.is_empty() {
        return Err(TerrainError::Specification("transect has no segments".into()));
    }
    let mut cursor = 0.0;
    for (i, seg) in spec.segments.iter().enumerate() {
        let [a, b] = seg.span;
        if !(b > a) {
            return Err(TerrainError::Specification(format!(
                "segment {i} has empty span [{a}, {b}]"
            )));
        }
        if (a - cursor).abs() > SPAN_TOLERANCE {
            let what = if a < cursor { "overlaps" } else { "leaves a gap before" };
            return Err(TerrainError::Specification(format!(
                "segment {i} {what} fraction {cursor}"
            )));
        }
        cursor = b;
        seg.start.validate()?;
        if seg.start.class() != seg.class {
            return Err(TerrainError::Specification(format!(
                "segment {i} declares {:?} but its column is {:?}",
                seg.class,
                seg.start.class()
            )));
        }
        if let Some(end) = &seg.end {
            end.validate()?;
            // Interpolation must be well formed across the whole span.
            seg.start.lerp(end, 0.5)?.validate()?;
        }
    }
    if (cursor - 1.0).abs() > SPAN_TOLERANCE {
        return Err(TerrainError::Specification(format!(
            "segment fractions cover {cursor}, expected 1"
        )));
    }
    Ok(TerrainField {
        geometry: Geometry::Transect1D { length: spec.length },
        columns: Columns::Segments(spec.segments.clone()),
    })
}

pub fn make_patchy(spec: &PatchSpec, env: &EnvironmentConfig) -> Result<TerrainField, TerrainError> {
    if !(spec.cell > 0.0 && spec.width > 0.0 && spec.height > 0.0) {
        return Err(TerrainError::Specification("empty grid".into()));
    }
    let nx = (spec.width / spec.cell).round() as usize;
    let ny = (spec.height / spec.cell).round() as usize;
    if nx == 0 || ny == 0 {
        return Err(TerrainError::Specification("empty grid".into()));
    }
    spec.background.validate()?;
    for (i, p) in spec.patches.iter().enumerate() {
        if !(p.radius > 0.0) {
            return Err(TerrainError::Specification(format!(
                "patch {i} radius must be positive"
            )));
        }
        let [cx, cy] = p.center;
        if !(0.0..=spec.width).contains(&cx) || !(0.0..=spec.height).contains(&cy) {
            return Err(TerrainError::Specification(format!(
                "patch {i} center ({cx}, {cy}) outside grid"
            )));
        }
        p.column.validate()?;
    }
    if !(0.0..=0.1).contains(&spec.phi_jitter) {
        return Err(TerrainError::Specification("phi_jitter must be in [0, 0.1]".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(env.rng_seed);
    let mut cells = Vec::with_capacity(nx * ny);
    let mut owner = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = cell_center(spec.cell, i, j);
            let covering = spec
                .patches
                .iter()
                .rposition(|p| distance([x, y], p.center) <= p.radius);
            let mut column = covering
                .map(|k| spec.patches[k].column.clone())
                .unwrap_or_else(|| spec.background.clone());
            if spec.phi_jitter > 0.0 {
                let delta = rng.random_range(-spec.phi_jitter..=spec.phi_jitter);
                column.phi = (column.phi + delta).clamp(PHI_BOUNDS.0, PHI_BOUNDS.1);
            }
            cells.push(column);
            owner.push(covering);
        }
    }
    Ok(TerrainField {
        geometry: Geometry::Grid2D {
            width: spec.width,
            height: spec.height,
            cell: spec.cell,
        },
        columns: Columns::Cells {
            nx,
            ny,
            cells,
            owner,
            patches: spec.patches.clone(),
        },
    })
}

fn cell_center(cell: f64, i: usize, j: usize) -> (f64, f64) {
    ((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell)
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl TerrainField {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Column at `x` metres along a transect.
    pub fn column_at_m(&self, x: f64) -> Result<MaterialColumn, TerrainError> {
        match (&self.geometry, &self.columns) {
            (Geometry::Transect1D { length }, Columns::Segments(segments)) => {
                if !(0.0..=*length).contains(&x) {
                    return Err(TerrainError::OutOfBounds(format!("x = {x} m outside [0, {length}]")));
                }
                let f = x / length;
                let seg = segments
                    .iter()
                    .find(|s| f >= s.span[0] && f < s.span[1])
                    .unwrap_or_else(|| segments.last().expect("validated nonempty"));
                match &seg.end {
                    None => Ok(seg.start.clone()),
                    Some(end) => {
                        let t = ((f - seg.span[0]) / (seg.span[1] - seg.span[0])).clamp(0.0, 1.0);
                        seg.start.lerp(end, t)
                    }
                }
            }
            _ => Err(TerrainError::Specification("column_at_m needs a transect field".into())),
        }
    }

    /// Column at a point in metres of a grid field.
    pub fn column_at_xy(&self, x: f64, y: f64) -> Result<MaterialColumn, TerrainError> {
        let (i, j) = self.cell_of(x, y)?;
        self.cell_column(i, j).cloned()
    }

    /// Column at normalized position `s ∈ [0, 1]` along a straight path.
    pub fn column_on_path(&self, path: &PathSpec, s: f64) -> Result<MaterialColumn, TerrainError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(TerrainError::OutOfBounds(format!("path coordinate {s} outside [0, 1]")));
        }
        match self.geometry {
            Geometry::Transect1D { .. } => {
                let [a, b] = [path.from[0], path.to[0]];
                self.column_at_m(a + (b - a) * s)
            }
            Geometry::Grid2D { .. } => {
                let [x, y] = path.point(s);
                self.column_at_xy(x, y)
            }
        }
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Result<(usize, usize), TerrainError> {
        match (&self.geometry, &self.columns) {
            (Geometry::Grid2D { width, height, cell }, Columns::Cells { nx, ny, .. }) => {
                if !(0.0..=*width).contains(&x) || !(0.0..=*height).contains(&y) {
                    return Err(TerrainError::OutOfBounds(format!(
                        "({x}, {y}) outside {width} x {height} grid"
                    )));
                }
                let i = ((x / cell) as usize).min(nx - 1);
                let j = ((y / cell) as usize).min(ny - 1);
                Ok((i, j))
            }
            _ => Err(TerrainError::Specification("cell lookup needs a grid field".into())),
        }
    }

    pub fn grid_size(&self) -> Option<(usize, usize)> {
        match &self.columns {
            Columns::Cells { nx, ny, .. } => Some((*nx, *ny)),
            Columns::Segments(_) => None,
        }
    }

    pub fn cell_column(&self, i: usize, j: usize) -> Result<&MaterialColumn, TerrainError> {
        match &self.columns {
            Columns::Cells { nx, ny, cells, .. } if i < *nx && j < *ny => Ok(&cells[j * nx + i]),
            Columns::Cells { .. } => Err(TerrainError::OutOfBounds(format!("cell ({i}, {j})"))),
            Columns::Segments(_) => Err(TerrainError::Specification("cell lookup needs a grid field".into())),
        }
    }

    /// Index of the last patch covering cell `(i, j)`, if any.
    pub fn cell_owner(&self, i: usize, j: usize) -> Option<usize> {
        match &self.columns {
            Columns::Cells { nx, ny, owner, .. } if i < *nx && j < *ny => owner[j * nx + i],
            _ => None,
        }
    }

    /// Cells on the rim of a patch: center distance in `(radius - cell, radius]`.
    pub fn patch_boundary_cells(&self, patch: usize) -> Vec<(usize, usize)> {
        let (Geometry::Grid2D { cell, .. }, Columns::Cells { nx, ny, patches, .. }) = (&self.geometry, &self.columns)
        else {
            return Vec::new();
        };
        let Some(p) = patches.get(patch) else {
            return Vec::new();
        };
        // Only cells within the patch's bounding box can qualify.
        let lo = |c: f64| (((c - p.radius) / cell).floor().max(0.0)) as usize;
        let hi = |c: f64, n: usize| ((((c + p.radius) / cell).ceil()) as usize).min(n);
        let mut out = Vec::new();
        for j in lo(p.center[1])..hi(p.center[1], *ny) {
            for i in lo(p.center[0])..hi(p.center[0], *nx) {
                let (x, y) = cell_center(*cell, i, j);
                let d = distance([x, y], p.center);
                if d > p.radius - cell && d <= p.radius {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Normalized positions along `path` where the material class changes,
    /// found by scanning `samples` evenly spaced points.
    pub fn class_boundaries_on_path(&self, path: &PathSpec, samples: usize) -> Result<Vec<f64>, TerrainError> {
        let samples = samples.max(2);
        let mut out = Vec::new();
        let mut prev = self.column_on_path(path, 0.0)?.class();
        for n in 1..samples {
            let s = n as f64 / (samples - 1) as f64;
            let class = self.column_on_path(path, s)?.class();
            if class != prev {
                let s_prev = (n - 1) as f64 / (samples - 1) as f64;
                out.push(0.5 * (s + s_prev));
                prev = class;
            }
        }
        Ok(out)
    }
}

/// Straight measurement path through a field, in metres. For transects only
/// the first coordinate of each end is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub from: [f64; 2],
    pub to: [f64; 2],
}

impl PathSpec {
    pub fn along_transect(length: f64) -> Self {
        PathSpec {
            from: [0.0, 0.0],
            to: [length, 0.0],
        }
    }

    pub fn length(&self) -> f64 {
        distance(self.from, self.to)
    }

    pub fn point(&self, s: f64) -> [f64; 2] {
        [
            self.from[0] + (self.to[0] - self.from[0]) * s,
            self.from[1] + (self.to[1] - self.from[1]) * s,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::material::ClassParams;

    fn env() -> EnvironmentConfig {
        EnvironmentConfig::default()
    }

    fn sand(phi: f64) -> MaterialColumn {
        MaterialColumn::cohesionless(phi, 2650.0, 250e-6, 0.52, 10.0)
    }

    fn ice() -> MaterialColumn {
        sand(0.59).with_params(ClassParams::IceCemented { ice_fraction: 0.1 })
    }

    fn single(span_end: f64) -> GradientSpec {
        GradientSpec {
            length: 10.0,
            segments: vec![Segment {
                span: [0.0, span_end],
                class: MaterialClass::Cohesionless,
                start: sand(0.59),
                end: None,
            }],
        }
    }

    #[test]
    fn single_segment_everywhere() {
        let f = make_transect(&single(1.0), &env()).unwrap();
        for x in [0.0, 2.5, 9.99, 10.0] {
            assert_eq!(f.column_at_m(x).unwrap(), sand(0.59));
        }
        assert!(f.column_at_m(10.5).is_err());
    }

    #[test]
    fn underfull_and_overlapping_segments_rejected() {
        assert!(matches!(
            make_transect(&single(0.9), &env()),
            Err(TerrainError::Specification(_))
        ));
        let mut spec = single(0.6);
        spec.segments.push(Segment {
            span: [0.5, 1.0],
            class: MaterialClass::Cohesionless,
            start: sand(0.6),
            end: None,
        });
        assert!(make_transect(&spec, &env()).is_err());
    }

    #[test]
    fn interpolates_within_segment() {
        let mut spec = single(1.0);
        spec.segments[0].end = Some(sand(0.63));
        let f = make_transect(&spec, &env()).unwrap();
        let c = f.column_at_m(5.0).unwrap();
        assert!((c.phi - 0.61).abs() < 1e-12);
    }

    fn one_patch() -> PatchSpec {
        PatchSpec {
            width: 10.0,
            height: 10.0,
            cell: 0.25,
            background: sand(0.59),
            patches: vec![Patch {
                center: [5.0, 5.0],
                radius: 2.0,
                column: ice(),
            }],
            phi_jitter: 0.0,
        }
    }

    #[test]
    fn patch_containment_and_exclusion() {
        let f = make_patchy(&one_patch(), &env()).unwrap();
        assert_eq!(f.column_at_xy(5.0, 5.0).unwrap().class(), MaterialClass::IceCemented);
        assert_eq!(f.column_at_xy(8.0, 5.0).unwrap().class(), MaterialClass::Cohesionless);
    }

    #[test]
    fn empty_grid_rejected() {
        let mut spec = one_patch();
        spec.width = 0.0;
        assert!(make_patchy(&spec, &env()).is_err());
        let mut spec = one_patch();
        spec.width = 0.1;
        assert!(make_patchy(&spec, &env()).is_err());
    }

    #[test]
    fn boundary_cells_match_full_scan() {
        let f = make_patchy(&one_patch(), &env()).unwrap();
        let (nx, ny) = f.grid_size().unwrap();
        let mut expected = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let d = distance([(i as f64 + 0.5) * 0.25, (j as f64 + 0.5) * 0.25], [5.0, 5.0]);
                if d > 1.75 && d <= 2.0 {
                    expected.push((i, j));
                }
            }
        }
        assert!(!expected.is_empty());
        assert_eq!(f.patch_boundary_cells(0), expected);
    }

    #[test]
    fn jitter_is_seeded() {
        let mut spec = one_patch();
        spec.phi_jitter = 0.02;
        let a = make_patchy(&spec, &env()).unwrap();
        let b = make_patchy(&spec, &env()).unwrap();
        assert_eq!(a, b);
        let other = EnvironmentConfig { rng_seed: 99, ..env() };
        assert_ne!(a, make_patchy(&spec, &other).unwrap());
    }

    #[test]
    fn path_boundaries_on_grid() {
        let f = make_patchy(&one_patch(), &env()).unwrap();
        let path = PathSpec {
            from: [0.0, 5.1],
            to: [10.0, 5.1],
        };
        let b = f.class_boundaries_on_path(&path, 401).unwrap();
        assert_eq!(b.len(), 2);
        assert!((b[0] - 0.3).abs() < 0.03, "{b:?}");
        assert!((b[1] - 0.7).abs() < 0.03, "{b:?}");
    }
}
