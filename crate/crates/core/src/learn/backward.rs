use crate::error::{Error, Result};
use crate::imaging::HitLedger;
use crate::scene::{interpolation_adjoint, Channel, Mesh};

/// Per-vertex gradient accumulator in channel order `(h, l, eps_r, tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBuffer {
    grads: Vec<[f64; 4]>,
}

impl GradBuffer {
    pub fn zeros(n: usize) -> Self {
        GradBuffer {
            grads: vec![[0.0; 4]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn get(&self, vertex: usize) -> [f64; 4] {
        self.grads[vertex]
    }

    pub fn values(&self) -> &[[f64; 4]] {
        &self.grads
    }

    pub fn add(&mut self, vertex: usize, g: [f64; 4]) {
        for (a, b) in self.grads[vertex].iter_mut().zip(g) {
            *a += b;
        }
    }

    pub fn add_channel(&mut self, vertex: usize, ch: Channel, g: f64) {
        self.grads[vertex][ch.index()] += g;
    }

    /// Adds `other` element-wise; panics on a length mismatch.
    pub fn merge(&mut self, other: &GradBuffer) {
        assert_eq!(self.len(), other.len(), "gradient buffers differ in length");
        for (v, g) in other.grads.iter().enumerate() {
            self.add(v, *g);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.grads.iter().flatten().all(|v| v.is_finite())
    }
}

/// Chains per-pixel loss gradients back to per-vertex parameter gradients:
/// each ledger entry contributes `dL/dI[pixel] * weight * dsigma/dparams`,
/// split over its facet's vertices by the barycentric weights. Entries are
/// visited in ledger order, so the result is reproducible.
pub fn backward(ledger: &HitLedger, dl_di: &[f64], cols: usize, mesh: &Mesh) -> Result<GradBuffer> {
    let mut out = GradBuffer::zeros(mesh.num_vertices());
    for e in ledger.entries() {
        let pix = e.row * cols + e.range_bin;
        if e.range_bin >= cols || pix >= dl_di.len() {
            return Err(Error::Shape(format!(
                "ledger pixel ({}, {}) lies outside the gradient image",
                e.row, e.range_bin
            )));
        }
        let g = dl_di[pix];
        if g == 0.0 {
            continue;
        }
        let s = g * e.weight;
        let d = e.sigma.grad().map(|p| p * s);
        for (v, dv) in interpolation_adjoint(mesh, e.hit.facet_id, e.hit.m1, e.hit.m2, d)? {
            out.add(v, dv);
        }
    }
    Ok(out)
}
