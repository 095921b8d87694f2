use crate::CoreError;
use serde::{Deserialize, Serialize};

/// Quantization grid: bin counts per box attribute plus the canvas extent in
/// layout units.
///
/// Quantization maps a value `v` on an extent `E` to `floor(v / E * bins)`
/// clamped into `[0, bins-1]`; dequantization returns the bin center
/// `(q + 0.5) / bins * E`, so `quantize(dequantize(q)) == q` for every valid
/// bin index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantGrid {
    pub bins_x: u16,
    pub bins_y: u16,
    pub bins_w: u16,
    pub bins_h: u16,
    pub canvas_w: f64,
    pub canvas_h: f64,
}

impl QuantGrid {
    /// Uniform grid with the same bin count on all four attributes.
    pub fn uniform(bins: u16, canvas_w: f64, canvas_h: f64) -> Self {
        Self { bins_x: bins, bins_y: bins, bins_w: bins, bins_h: bins, canvas_w, canvas_h }
    }

    /// Default 64-bin grid over a unit-square-like 64x64 canvas.
    pub fn default64() -> Self {
        Self::uniform(64, 64.0, 64.0)
    }

    fn quantize_one(value: f64, extent: f64, bins: u16) -> u16 {
        let q = (value / extent * f64::from(bins)).floor();
        q.clamp(0.0, f64::from(bins - 1)) as u16
    }

    fn dequantize_one(q: u16, extent: f64, bins: u16) -> f64 {
        (f64::from(q) + 0.5) / f64::from(bins) * extent
    }

    /// Quantize a `(x, y, w, h)` box given in layout units.
    ///
    /// The box must lie on the canvas up to a one-bin tolerance; anything
    /// farther out is rejected as invalid geometry. Width and height must be
    /// strictly positive.
    pub fn quantize_box(&self, b: [f64; 4]) -> Result<[u16; 4], CoreError> {
        let [x, y, w, h] = b;
        if !b.iter().all(|v| v.is_finite()) {
            return Err(CoreError::InvalidGeometry(format!("non-finite box {b:?}")));
        }
        if x < 0.0 || y < 0.0 || w <= 0.0 || h <= 0.0 {
            return Err(CoreError::InvalidGeometry(format!(
                "box {b:?} has negative origin or non-positive extent"
            )));
        }
        let tol_x = self.canvas_w / f64::from(self.bins_x);
        let tol_y = self.canvas_h / f64::from(self.bins_y);
        if x > self.canvas_w + tol_x
            || y > self.canvas_h + tol_y
            || x + w > self.canvas_w + tol_x
            || y + h > self.canvas_h + tol_y
        {
            return Err(CoreError::InvalidGeometry(format!(
                "box {b:?} outside canvas {}x{}",
                self.canvas_w, self.canvas_h
            )));
        }
        Ok([
            Self::quantize_one(x, self.canvas_w, self.bins_x),
            Self::quantize_one(y, self.canvas_h, self.bins_y),
            Self::quantize_one(w, self.canvas_w, self.bins_w),
            Self::quantize_one(h, self.canvas_h, self.bins_h),
        ])
    }

    /// Map bin indices back to layout units (bin centers).
    pub fn dequantize_box(&self, q: [u16; 4]) -> [f64; 4] {
        [
            Self::dequantize_one(q[0], self.canvas_w, self.bins_x),
            Self::dequantize_one(q[1], self.canvas_h, self.bins_y),
            Self::dequantize_one(q[2], self.canvas_w, self.bins_w),
            Self::dequantize_one(q[3], self.canvas_h, self.bins_h),
        ]
    }

    /// Dequantize and scale to the unit square (x, w by canvas width; y, h by
    /// canvas height).
    pub fn normalize_box(&self, q: [u16; 4]) -> [f64; 4] {
        let [x, y, w, h] = self.dequantize_box(q);
        [x / self.canvas_w, y / self.canvas_h, w / self.canvas_w, h / self.canvas_h]
    }

    /// True when all four bin indices are inside the grid.
    pub fn contains(&self, q: [u16; 4]) -> bool {
        q[0] < self.bins_x && q[1] < self.bins_y && q[2] < self.bins_w && q[3] < self.bins_h
    }

    /// Quantize a single attribute (`0..4` = x, y, w, h) given in layout
    /// units, clamping into the grid.
    pub fn quantize_attr(&self, attr: usize, value: f64) -> u16 {
        let (extent, bins) = match attr {
            0 => (self.canvas_w, self.bins_x),
            1 => (self.canvas_h, self.bins_y),
            2 => (self.canvas_w, self.bins_w),
            3 => (self.canvas_h, self.bins_h),
            _ => panic!("attribute index {attr} out of range"),
        };
        Self::quantize_one(value, extent, bins)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn extreme_corners_clamp() {
        let g = QuantGrid::uniform(64, 640.0, 480.0);
        let q = g.quantize_box([0.0, 0.0, 640.0, 480.0]).unwrap();
        assert_eq!(q, [0, 0, 63, 63]);
    }

    #[test]
    fn exact_midpoint() {
        let g = QuantGrid::uniform(64, 640.0, 480.0);
        let q = g.quantize_box([320.0, 240.0, 160.0, 120.0]).unwrap();
        assert_eq!(q, [32, 32, 16, 16]);
    }

    #[test]
    fn quantize_dequantize_idempotent() {
        // quantize . dequantize . quantize == quantize on random boxes
        let g = QuantGrid::uniform(64, 800.0, 600.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = rng.gen_range(0.0..700.0);
            let y = rng.gen_range(0.0..500.0);
            let w = rng.gen_range(1.0..(800.0 - x));
            let h = rng.gen_range(1.0..(600.0 - y));
            let q1 = g.quantize_box([x, y, w, h]).unwrap();
            let q2 = g.quantize_box(g.dequantize_box(q1)).unwrap();
            assert_eq!(q1, q2);
        }
    }

    #[test]
    fn round_trip_on_all_bins() {
        let g = QuantGrid::uniform(32, 320.0, 320.0);
        for q in 0..32u16 {
            // position bins with minimal size, then size bins at the origin
            let back = g.quantize_box(g.dequantize_box([q, q, 0, 0])).unwrap();
            assert_eq!(back, [q, q, 0, 0]);
            let back = g.quantize_box(g.dequantize_box([0, 0, q, q])).unwrap();
            assert_eq!(back, [0, 0, q, q]);
        }
    }

    #[test]
    fn far_outside_rejected() {
        let g = QuantGrid::uniform(64, 100.0, 100.0);
        assert!(g.quantize_box([0.0, 0.0, 120.0, 10.0]).is_err());
        assert!(g.quantize_box([-5.0, 0.0, 10.0, 10.0]).is_err());
        assert!(g.quantize_box([0.0, 0.0, 0.0, 10.0]).is_err());
    }
}
