use super::mesh::DeviceMesh;
use super::profile::{Profile, ProfileError};
use crate::statistics::inverse_fd_half;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundaryError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("`{field}` must be strictly positive (assumption A3), found {value} at {location}")]
    NotPositive {
        field: &'static str,
        value: f64,
        location: String,
    },
}

/// Values of the boundary extension at one set of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionValues {
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    /// `g(n̄) - V̄`
    pub psi_n: Vec<f64>,
    /// `g(p̄) + V̄`
    pub psi_p: Vec<f64>,
}

impl ExtensionValues {
    fn evaluate(
        points: impl Iterator<Item = ([f64; 2], String)>,
        n: &Profile,
        p: &Profile,
        v: &Profile,
    ) -> Result<Self, BoundaryError> {
        let mut out = Self {
            n: Vec::new(),
            p: Vec::new(),
            v: Vec::new(),
            psi_n: Vec::new(),
            psi_p: Vec::new(),
        };
        for (x, location) in points {
            let (nv, pv, vv) = (n.eval(x), p.eval(x), v.eval(x));
            for (field, value) in [("n_bar", nv), ("p_bar", pv)] {
                if !(value > 0.0) {
                    return Err(BoundaryError::NotPositive {
                        field,
                        value,
                        location,
                    });
                }
            }
            out.n.push(nv);
            out.p.push(pv);
            out.v.push(vv);
            out.psi_n.push(inverse_fd_half(nv).expect("positive") - vv);
            out.psi_p.push(inverse_fd_half(pv).expect("positive") + vv);
        }
        Ok(out)
    }
}

/// Dirichlet data `n̄, p̄, V̄`, given as profiles on the whole device and
/// evaluated at cell centroids and at every boundary face.
///
/// The Dirichlet traces are the face values on contact faces; the cell
/// values form the interior extension entering the free energy and `Λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    n_bar: Profile,
    p_bar: Profile,
    v_bar: Profile,
    cells: ExtensionValues,
    faces: ExtensionValues,
}

impl BoundaryData {
    pub fn new(n_bar: Profile, p_bar: Profile, v_bar: Profile, mesh: &DeviceMesh) -> Result<Self, BoundaryError> {
        n_bar.validate("n_bar")?;
        p_bar.validate("p_bar")?;
        v_bar.validate("V_bar")?;
        let cells = ExtensionValues::evaluate(
            mesh.cells()
                .iter()
                .enumerate()
                .map(|(i, c)| (c.centroid, format!("cell {i}"))),
            &n_bar,
            &p_bar,
            &v_bar,
        )?;
        let faces = ExtensionValues::evaluate(
            mesh.boundary_edges()
                .iter()
                .enumerate()
                .map(|(i, e)| (e.midpoint, format!("boundary face {i}"))),
            &n_bar,
            &p_bar,
            &v_bar,
        )?;
        Ok(Self {
            n_bar,
            p_bar,
            v_bar,
            cells,
            faces,
        })
    }

    /// Constant data `n̄ = p̄ = density`, `V̄ = 0`: thermal equilibrium.
    pub fn equilibrium(density: f64, mesh: &DeviceMesh) -> Result<Self, BoundaryError> {
        Self::new(
            Profile::constant(density),
            Profile::constant(density),
            Profile::constant(0.0),
            mesh,
        )
    }

    pub fn profiles(&self) -> (&Profile, &Profile, &Profile) {
        (&self.n_bar, &self.p_bar, &self.v_bar)
    }

    /// Extension evaluated at cell centroids.
    pub fn cells(&self) -> &ExtensionValues {
        &self.cells
    }

    /// Extension evaluated at boundary faces, indexed like
    /// [`DeviceMesh::boundary_edges`].
    pub fn faces(&self) -> &ExtensionValues {
        &self.faces
    }
}

/// `Λ = 2 (max_σ |D_σ ψ_n|² + max_σ |D_σ ψ_p|²)` with two-point difference
/// quotients of the extended quasi-Fermi levels over every edge of the mesh.
pub fn lambda_const(bc: &BoundaryData, mesh: &DeviceMesh) -> f64 {
    let cells = bc.cells();
    let faces = bc.faces();
    let max_sq = |psi_cell: &[f64], psi_face: &[f64]| {
        let interior = mesh.interior_edges().iter().map(|e| {
            let [k, l] = e.cells;
            ((psi_cell[k] - psi_cell[l]) / e.distance).powi(2)
        });
        let boundary = mesh
            .boundary_edges()
            .iter()
            .enumerate()
            .map(|(i, e)| ((psi_cell[e.cell] - psi_face[i]) / e.distance).powi(2));
        interior.chain(boundary).fold(0.0, f64::max)
    };
    2.0 * (max_sq(&cells.psi_n, &faces.psi_n) + max_sq(&cells.psi_p, &faces.psi_p))
}
