use crate::device::{BoundaryData, DeviceMesh, SystemState};
use serde::{Deserialize, Serialize};

/// `(Σ m(K) |u_K|^{5/3})^{3/5}`
pub fn l53_norm(u: &[f64], mesh: &DeviceMesh) -> f64 {
    mesh.cells()
        .iter()
        .zip(u)
        .map(|(c, x)| c.measure * x.abs().powf(5.0 / 3.0))
        .sum::<f64>()
        .powf(0.6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breach {
    pub step: usize,
    /// `"n"` or `"p"`.
    pub field: char,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub ceiling: f64,
    /// Running maxima of `‖n‖_∞` and `‖p‖_∞`, one entry per observed state.
    pub running_max_n: Vec<f64>,
    pub running_max_p: Vec<f64>,
    /// Discrete `L^∞(0,T; L^{5/3})` norms.
    pub l53_n: f64,
    pub l53_p: f64,
    pub l53_d: f64,
    /// First state whose density exceeded the ceiling.
    pub breach: Option<Breach>,
}

impl BoundednessReport {
    pub fn pass(&self) -> bool {
        self.breach.is_none()
    }
}

/// Tracks the sup norms of `n` and `p` along a run and flags the first step
/// at which either exceeds a fixed ceiling.
#[derive(Debug, Clone)]
pub struct BoundednessMonitor {
    report: BoundednessReport,
}

impl BoundednessMonitor {
    pub fn new(ceiling: f64) -> Self {
        Self {
            report: BoundednessReport {
                ceiling,
                running_max_n: Vec::new(),
                running_max_p: Vec::new(),
                l53_n: 0.0,
                l53_p: 0.0,
                l53_d: 0.0,
                breach: None,
            },
        }
    }

    /// Largest density among the initial state and the boundary extension.
    pub fn reference_max(initial: &SystemState, bc: &BoundaryData) -> f64 {
        let ext = bc.cells();
        let faces = bc.faces();
        [&initial.n, &initial.p, &ext.n, &ext.p, &faces.n, &faces.p]
            .iter()
            .flat_map(|v| v.iter())
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn observe(&mut self, step: usize, state: &SystemState, mesh: &DeviceMesh) {
        let r = &mut self.report;
        let sup = |v: &[f64]| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        let (n, p) = (sup(&state.n), sup(&state.p));
        let prev_n = r.running_max_n.last().copied().unwrap_or(0.0);
        let prev_p = r.running_max_p.last().copied().unwrap_or(0.0);
        r.running_max_n.push(prev_n.max(n));
        r.running_max_p.push(prev_p.max(p));
        r.l53_n = r.l53_n.max(l53_norm(&state.n, mesh));
        r.l53_p = r.l53_p.max(l53_norm(&state.p, mesh));
        r.l53_d = r.l53_d.max(l53_norm(&state.d, mesh));
        if r.breach.is_none() {
            if !(n <= r.ceiling) {
                r.breach = Some(Breach { step, field: 'n', value: n });
            } else if !(p <= r.ceiling) {
                r.breach = Some(Breach { step, field: 'p', value: p });
            }
        }
    }

    pub fn report(self) -> BoundednessReport {
        self.report
    }
}

/// Monitors a stored sequence of states, step index = position.
pub fn boundedness_monitor(states: &[SystemState], mesh: &DeviceMesh, ceiling: f64) -> BoundednessReport {
    let mut m = BoundednessMonitor::new(ceiling);
    for (i, s) in states.iter().enumerate() {
        m.observe(i, s, mesh);
    }
    m.report()
}
