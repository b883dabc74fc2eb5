//! Quadratic B-spline interpolation kernel over a 3x3 node stencil.

use super::{EdgeMode, GridLayout, Staggering};
use crate::math::Vec2;

/// 1D quadratic B-spline weight for a node-to-point distance in cell units.
pub fn quadratic_weight(r: f64) -> f64 {
    let a = r.abs();
    if a < 0.5 {
        0.75 - a * a
    } else if a < 1.5 {
        0.5 * (1.5 - a) * (1.5 - a)
    } else {
        0.0
    }
}

/// Weights and weight gradients of the nine nodes surrounding a point.
#[derive(Clone, Copy, Debug)]
pub struct KernelStencil {
    pub base_i: isize,
    pub base_j: isize,
    pub wx: [f64; 3],
    pub wy: [f64; 3],
    /// d/dx of `wx`, already divided by `dx`.
    pub dwx: [f64; 3],
    pub dwy: [f64; 3],
}

#[inline]
fn axis_weights(f: f64) -> (isize, [f64; 3], [f64; 3]) {
    let base = (f - 0.5).floor();
    let d = f - base;
    let w = [
        0.5 * (1.5 - d) * (1.5 - d),
        0.75 - (d - 1.0) * (d - 1.0),
        0.5 * (d - 0.5) * (d - 0.5),
    ];
    let dw = [-(1.5 - d), -2.0 * (d - 1.0), d - 0.5];
    (base as isize, w, dw)
}

/// Builds the stencil of `x` against the nodes of `stag`.
#[inline]
pub fn make_stencil(layout: &GridLayout, stag: Staggering, x: Vec2) -> KernelStencil {
    let (ox, oy) = stag.offset();
    let inv = 1.0 / layout.dx;
    let (bi, wx, mut dwx) = axis_weights(x.x * inv - ox);
    let (bj, wy, mut dwy) = axis_weights(x.y * inv - oy);
    for k in 0..3 {
        dwx[k] *= inv;
        dwy[k] *= inv;
    }
    KernelStencil {
        base_i: bi,
        base_j: bj,
        wx,
        wy,
        dwx,
        dwy,
    }
}

impl KernelStencil {
    #[inline]
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.wx[a] * self.wy[b]
    }

    #[inline]
    pub fn gradient(&self, a: usize, b: usize) -> Vec2 {
        Vec2::new(self.dwx[a] * self.wy[b], self.wx[a] * self.dwy[b])
    }

    /// Offset of node `(a, b)` from `x`, i.e. `x_node - x`.
    #[inline]
    pub fn node_offset(&self, layout: &GridLayout, stag: Staggering, x: Vec2, a: usize, b: usize) -> Vec2 {
        let (ox, oy) = stag.offset();
        Vec2::new(
            (self.base_i as f64 + a as f64 + ox) * layout.dx - x.x,
            (self.base_j as f64 + b as f64 + oy) * layout.dx - x.y,
        )
    }

    /// Visits every node of the stencil that resolves to storage.
    #[inline]
    pub fn for_each(
        &self,
        layout: &GridLayout,
        stag: Staggering,
        mode: EdgeMode,
        mut f: impl FnMut(usize, usize, usize),
    ) {
        let (ni, nj) = layout.dims(stag);
        let li = if layout.boundaries.periodic_x() { layout.nx } else { ni };
        let lj = if layout.boundaries.periodic_y() { layout.ny } else { nj };
        if self.base_i >= 0 && self.base_j >= 0 && self.base_i + 2 < li as isize && self.base_j + 2 < lj as isize {
            let base = self.base_i as usize + self.base_j as usize * ni;
            for b in 0..3 {
                for a in 0..3 {
                    f(a, b, base + a + b * ni);
                }
            }
            return;
        }
        for b in 0..3 {
            for a in 0..3 {
                let i = self.base_i + a as isize;
                let j = self.base_j + b as isize;
                if let Some(idx) = layout.resolve(stag, i, j, mode) {
                    f(a, b, idx);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundaries;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn weights_partition_unity_and_gradients_cancel(f in -3.0f64..40.0) {
            let (base, w, dw) = axis_weights(f);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            prop_assert!(dw.iter().sum::<f64>().abs() < 1e-14);
            // First moment reproduces the point.
            let m: f64 = (0..3).map(|k| w[k] * (base as f64 + k as f64)).sum();
            prop_assert!((m - f).abs() < 1e-12);
            for k in 0..3 {
                prop_assert!((w[k] - quadratic_weight(f - (base as f64 + k as f64))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let layout = GridLayout::new(8, 8, 0.125, Boundaries::walls());
        let x = Vec2::new(0.431, 0.377);
        let h = 1e-6;
        let s = make_stencil(&layout, Staggering::Cells, x);
        let sp = make_stencil(&layout, Staggering::Cells, x + Vec2::new(h, 0.0));
        let sm = make_stencil(&layout, Staggering::Cells, x - Vec2::new(h, 0.0));
        assert_eq!(sp.base_i, sm.base_i);
        for a in 0..3 {
            let fd = (sp.wx[a] - sm.wx[a]) / (2.0 * h);
            assert!((fd - s.dwx[a]).abs() < 1e-6);
        }
    }
}
