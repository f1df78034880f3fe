use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("mesh needs at least one cell in every direction (field `{0}`)")]
    ZeroCells(&'static str),
    #[error("`{field}` = {value} must be finite and positive")]
    InvalidExtent { field: &'static str, value: f64 },
    #[error("contact {index} on side {side:?} is not on the boundary: range [{lo}, {hi}] leaves [0, {len}]")]
    ContactOffBoundary {
        index: usize,
        side: Side,
        lo: f64,
        hi: f64,
        len: f64,
    },
    #[error("contacts {first} and {second} overlap on side {side:?}")]
    OverlappingContacts {
        first: usize,
        second: usize,
        side: Side,
    },
    #[error("side {0:?} does not exist on a 1D mesh")]
    SideNotAvailable(Side),
    #[error("Dirichlet boundary has zero measure (assumption A1 requires m(Γ_D) > 0)")]
    NoDirichletBoundary,
}

/// Side of the interval or rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Geometry of the device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// `[0, length]`. With `grading = r` consecutive cell widths grow by `r`.
    Interval {
        length: f64,
        cells: usize,
        #[serde(default)]
        grading: Option<f64>,
    },
    /// `[0, width] × [0, height]` with a tensor grid of `nx × ny` cells.
    Rectangle {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    },
}

/// A Dirichlet contact: a side and, in 2D, an optional sub-range of it.
/// Faces whose midpoints fall in the range belong to the contact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactSpec {
    pub side: Side,
    #[serde(default)]
    pub range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub geometry: Geometry,
    pub contacts: Vec<ContactSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub centroid: [f64; 2],
    pub measure: f64,
}

/// Face shared by two cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorEdge {
    pub cells: [usize; 2],
    pub midpoint: [f64; 2],
    pub measure: f64,
    /// Distance between the two centroids.
    pub distance: f64,
}

impl InteriorEdge {
    /// `m(σ) / d_σ`.
    pub fn transmissibility(&self) -> f64 {
        self.measure / self.distance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum BoundaryTag {
    DirichletContact { contact: usize },
    NeumannInsulating,
}

/// Face on `∂Ω` with its single adjacent cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub cell: usize,
    pub midpoint: [f64; 2],
    pub measure: f64,
    /// Distance from the cell centroid to the face.
    pub distance: f64,
    pub side: Side,
    pub tag: BoundaryTag,
}

impl BoundaryEdge {
    pub fn transmissibility(&self) -> f64 {
        self.measure / self.distance
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self.tag, BoundaryTag::DirichletContact { .. })
    }
}

/// Admissible cell–edge mesh for two-point flux approximations.
///
/// Cells are numbered x-fastest, so every coupling lies within `nx` of the
/// diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceMesh {
    dimension: u8,
    extent: [f64; 2],
    shape: [usize; 2],
    cells: Vec<Cell>,
    interior_edges: Vec<InteriorEdge>,
    boundary_edges: Vec<BoundaryEdge>,
}

fn check_extent(field: &'static str, value: f64) -> Result<(), MeshError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(MeshError::InvalidExtent { field, value })
    }
}

fn side_length(side: Side, extent: [f64; 2]) -> f64 {
    match side {
        Side::Left | Side::Right => extent[1],
        Side::Bottom | Side::Top => extent[0],
    }
}

fn contact_ranges(spec: &MeshSpec, dimension: u8, extent: [f64; 2]) -> Result<Vec<[f64; 2]>, MeshError> {
    let mut ranges = Vec::with_capacity(spec.contacts.len());
    for (index, c) in spec.contacts.iter().enumerate() {
        if dimension == 1 && matches!(c.side, Side::Bottom | Side::Top) {
            return Err(MeshError::SideNotAvailable(c.side));
        }
        let len = if dimension == 1 { 0.0 } else { side_length(c.side, extent) };
        let [lo, hi] = c.range.unwrap_or([0.0, len]);
        let off = !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < 0.0 || hi > len;
        if off && dimension == 2 {
            return Err(MeshError::ContactOffBoundary {
                index,
                side: c.side,
                lo,
                hi,
                len,
            });
        }
        ranges.push(if dimension == 1 { [0.0, 0.0] } else { [lo, hi] });
    }
    for i in 0..ranges.len() {
        for j in i + 1..ranges.len() {
            let (a, b) = (&spec.contacts[i], &spec.contacts[j]);
            if a.side != b.side {
                continue;
            }
            let overlap = ranges[i][1].min(ranges[j][1]) - ranges[i][0].max(ranges[j][0]);
            if dimension == 1 || overlap > 0.0 {
                return Err(MeshError::OverlappingContacts {
                    first: i,
                    second: j,
                    side: a.side,
                });
            }
        }
    }
    Ok(ranges)
}

fn tag_for(spec: &MeshSpec, ranges: &[[f64; 2]], side: Side, coordinate: f64) -> BoundaryTag {
    spec.contacts
        .iter()
        .zip(ranges)
        .position(|(c, r)| c.side == side && coordinate >= r[0] && coordinate <= r[1])
        .map(|contact| BoundaryTag::DirichletContact { contact })
        .unwrap_or(BoundaryTag::NeumannInsulating)
}

fn interval_faces(length: f64, cells: usize, grading: f64) -> Vec<f64> {
    let widths: Vec<f64> = (0..cells).map(|i| grading.powi(i as i32)).collect();
    let total: f64 = widths.iter().sum();
    let mut faces = Vec::with_capacity(cells + 1);
    let mut x = 0.0;
    faces.push(0.0);
    for w in &widths[..cells - 1] {
        x += w * length / total;
        faces.push(x);
    }
    faces.push(length);
    faces
}

impl DeviceMesh {
    pub fn build(spec: &MeshSpec) -> Result<Self, MeshError> {
        let mesh = match spec.geometry {
            Geometry::Interval {
                length,
                cells,
                grading,
            } => {
                check_extent("length", length)?;
                if cells == 0 {
                    return Err(MeshError::ZeroCells("cells"));
                }
                let grading = grading.unwrap_or(1.0);
                check_extent("grading", grading)?;
                let extent = [length, 0.0];
                let ranges = contact_ranges(spec, 1, extent)?;
                let faces = interval_faces(length, cells, grading);
                let centroids: Vec<f64> = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                let cell_list = faces
                    .windows(2)
                    .zip(&centroids)
                    .map(|(w, &c)| Cell {
                        centroid: [c, 0.0],
                        measure: w[1] - w[0],
                    })
                    .collect();
                let interior_edges = (0..cells - 1)
                    .map(|i| InteriorEdge {
                        cells: [i, i + 1],
                        midpoint: [faces[i + 1], 0.0],
                        measure: 1.0,
                        distance: centroids[i + 1] - centroids[i],
                    })
                    .collect();
                let boundary_edges = vec![
                    BoundaryEdge {
                        cell: 0,
                        midpoint: [0.0, 0.0],
                        measure: 1.0,
                        distance: centroids[0],
                        side: Side::Left,
                        tag: tag_for(spec, &ranges, Side::Left, 0.0),
                    },
                    BoundaryEdge {
                        cell: cells - 1,
                        midpoint: [length, 0.0],
                        measure: 1.0,
                        distance: length - centroids[cells - 1],
                        side: Side::Right,
                        tag: tag_for(spec, &ranges, Side::Right, 0.0),
                    },
                ];
                Self {
                    dimension: 1,
                    extent,
                    shape: [cells, 1],
                    cells: cell_list,
                    interior_edges,
                    boundary_edges,
                }
            }
            Geometry::Rectangle {
                width,
                height,
                nx,
                ny,
            } => {
                check_extent("width", width)?;
                check_extent("height", height)?;
                if nx == 0 {
                    return Err(MeshError::ZeroCells("nx"));
                }
                if ny == 0 {
                    return Err(MeshError::ZeroCells("ny"));
                }
                let extent = [width, height];
                let ranges = contact_ranges(spec, 2, extent)?;
                let (hx, hy) = (width / nx as f64, height / ny as f64);
                let id = |i: usize, j: usize| i + nx * j;
                let cx = |i: usize| (i as f64 + 0.5) * hx;
                let cy = |j: usize| (j as f64 + 0.5) * hy;
                let mut cells = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        cells.push(Cell {
                            centroid: [cx(i), cy(j)],
                            measure: hx * hy,
                        });
                    }
                }
                let mut interior_edges = Vec::new();
                for j in 0..ny {
                    for i in 0..nx {
                        if i + 1 < nx {
                            interior_edges.push(InteriorEdge {
                                cells: [id(i, j), id(i + 1, j)],
                                midpoint: [(i + 1) as f64 * hx, cy(j)],
                                measure: hy,
                                distance: hx,
                            });
                        }
                        if j + 1 < ny {
                            interior_edges.push(InteriorEdge {
                                cells: [id(i, j), id(i, j + 1)],
                                midpoint: [cx(i), (j + 1) as f64 * hy],
                                measure: hx,
                                distance: hy,
                            });
                        }
                    }
                }
                let mut boundary_edges = Vec::new();
                let mut push = |cell: usize, midpoint: [f64; 2], measure: f64, distance: f64, side: Side, along: f64| {
                    boundary_edges.push(BoundaryEdge {
                        cell,
                        midpoint,
                        measure,
                        distance,
                        side,
                        tag: tag_for(spec, &ranges, side, along),
                    })
                };
                for i in 0..nx {
                    push(id(i, 0), [cx(i), 0.0], hx, 0.5 * hy, Side::Bottom, cx(i));
                }
                for j in 0..ny {
                    push(id(nx - 1, j), [width, cy(j)], hy, 0.5 * hx, Side::Right, cy(j));
                }
                for i in 0..nx {
                    push(id(i, ny - 1), [cx(i), height], hx, 0.5 * hy, Side::Top, cx(i));
                }
                for j in 0..ny {
                    push(id(0, j), [0.0, cy(j)], hy, 0.5 * hx, Side::Left, cy(j));
                }
                Self {
                    dimension: 2,
                    extent,
                    shape: [nx, ny],
                    cells,
                    interior_edges,
                    boundary_edges,
                }
            }
        };
        if !(mesh.dirichlet_measure() > 0.0) {
            return Err(MeshError::NoDirichletBoundary);
        }
        Ok(mesh)
    }

    pub fn dimension(&self) -> u8 {
        self.dimension
    }

    /// `[length, 0]` in 1D, `[width, height]` in 2D.
    pub fn extent(&self) -> [f64; 2] {
        self.extent
    }

    /// Cells per direction, `[cells, 1]` in 1D.
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn interior_edges(&self) -> &[InteriorEdge] {
        &self.interior_edges
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn dirichlet_edges(&self) -> impl Iterator<Item = (usize, &BoundaryEdge)> {
        self.boundary_edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_dirichlet())
    }

    pub fn total_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }

    pub fn dirichlet_measure(&self) -> f64 {
        self.dirichlet_edges().map(|(_, e)| e.measure).sum()
    }

    /// Half bandwidth of cell-coupling matrices.
    pub fn bandwidth(&self) -> usize {
        if self.dimension == 1 {
            1
        } else {
            self.shape[0]
        }
    }

    /// Measure-weighted integral of a cell field.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        self.cells.iter().zip(field).map(|(c, v)| c.measure * v).sum()
    }

    /// Measure-weighted mean of a cell field.
    pub fn mean(&self, field: &[f64]) -> f64 {
        self.integrate(field) / self.total_measure()
    }
}
