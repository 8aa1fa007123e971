//! Nearest-neighbour distances from each query point to a reference cloud.

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// O(|query| * |reference|) oracle.
pub fn nn_brute(query: &[[f64; 2]], reference: &[[f64; 2]]) -> Vec<f64> {
    query
        .iter()
        .map(|&q| reference.iter().map(|&r| dist(q, r)).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Uniform grid over a reference cloud. Lookups scan square rings of cells
/// outward from the query's cell and stop once the best distance found is
/// no larger than the distance to the next unscanned ring.
#[derive(Debug, Clone)]
pub struct GridIndex {
    points: Vec<[f64; 2]>,
    origin: [f64; 2],
    cell: f64,
    nx: i64,
    ny: i64,
    /// `starts[c]..starts[c + 1]` indexes `points` for cell `c`.
    starts: Vec<usize>,
}

impl GridIndex {
    pub fn new(reference: &[[f64; 2]]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in reference {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if reference.is_empty() {
            lo = [0.0; 2];
            hi = [0.0; 2];
        }
        let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
        // about two points per cell
        let area = (w * h).max(w.max(h).powi(2) / reference.len().max(1) as f64);
        let mut cell = (2.0 * area / reference.len().max(1) as f64).sqrt();
        if !(cell.is_finite() && cell > 0.0) {
            cell = 1.0;
        }
        let nx = ((w / cell).floor() as i64 + 1).max(1);
        let ny = ((h / cell).floor() as i64 + 1).max(1);
        let cell_of = |p: &[f64; 2]| -> usize {
            let ix = (((p[0] - lo[0]) / cell).floor() as i64).clamp(0, nx - 1);
            let iy = (((p[1] - lo[1]) / cell).floor() as i64).clamp(0, ny - 1);
            (iy * nx + ix) as usize
        };
        let n_cells = (nx * ny) as usize;
        let mut counts = vec![0usize; n_cells + 1];
        for p in reference {
            counts[cell_of(p) + 1] += 1;
        }
        for c in 0..n_cells {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut points = vec![[0.0; 2]; reference.len()];
        for p in reference {
            let c = cell_of(p);
            points[fill[c]] = *p;
            fill[c] += 1;
        }
        Self {
            points,
            origin: lo,
            cell,
            nx,
            ny,
            starts: counts,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn scan_cell(&self, ix: i64, iy: i64, q: [f64; 2], best: &mut f64) {
        if ix < 0 || iy < 0 || ix >= self.nx || iy >= self.ny {
            return;
        }
        let c = (iy * self.nx + ix) as usize;
        for &p in &self.points[self.starts[c]..self.starts[c + 1]] {
            *best = best.min(dist(q, p));
        }
    }

    /// Distance from `q` to its nearest reference point; infinite if empty.
    pub fn nearest(&self, q: [f64; 2]) -> f64 {
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        let fx = (q[0] - self.origin[0]) / self.cell;
        let fy = (q[1] - self.origin[1]) / self.cell;
        let (qx, qy) = (fx.floor() as i64, fy.floor() as i64);
        // Rings beyond this cannot contain grid cells.
        let max_ring = [qx, self.nx - 1 - qx, qy, self.ny - 1 - qy]
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or(0)
            + 1;
        let mut best = f64::INFINITY;
        for k in 0..=max_ring {
            if k == 0 {
                self.scan_cell(qx, qy, q, &mut best);
            } else {
                for i in -k..=k {
                    self.scan_cell(qx + i, qy - k, q, &mut best);
                    self.scan_cell(qx + i, qy + k, q, &mut best);
                }
                for j in -k + 1..k {
                    self.scan_cell(qx - k, qy + j, q, &mut best);
                    self.scan_cell(qx + k, qy + j, q, &mut best);
                }
            }
            // Any cell outside rings 0..=k is at least this far from q.
            let gap = [
                fx - (qx - k) as f64,
                (qx + k + 1) as f64 - fx,
                fy - (qy - k) as f64,
                (qy + k + 1) as f64 - fy,
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
                * self.cell;
            if best <= gap {
                break;
            }
        }
        best
    }
}

/// Grid-accelerated equivalent of [`nn_brute`].
pub fn nn_accel(query: &[[f64; 2]], reference: &[[f64; 2]]) -> Vec<f64> {
    let index = GridIndex::new(reference);
    query.iter().map(|&q| index.nearest(q)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_points() {
        let a = [[1.0, 2.0]];
        let b = [[4.0, 6.0]];
        assert_eq!(nn_accel(&a, &b), vec![5.0]);
        assert_eq!(nn_brute(&a, &b), vec![5.0]);
    }

    #[test]
    fn degenerate_cloud() {
        let b = vec![[1.5, -2.0]; 50];
        let q = [[0.0, 0.0], [1.5, -2.0], [10.0, 3.0]];
        assert_eq!(nn_accel(&q, &b), nn_brute(&q, &b));
        let self_d = nn_accel(&b, &b);
        assert!(self_d.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn collinear_reference() {
        let b: Vec<[f64; 2]> = (0..30).map(|i| [i as f64 * 0.1, 0.0]).collect();
        let q: Vec<[f64; 2]> = (0..40).map(|i| [i as f64 * 0.09 - 0.5, (i % 7) as f64 - 3.0]).collect();
        assert_eq!(nn_accel(&q, &b), nn_brute(&q, &b));
    }

    #[test]
    fn empty_reference_is_infinite() {
        assert_eq!(nn_accel(&[[0.0, 0.0]], &[]), vec![f64::INFINITY]);
    }

    fn cloud(max: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
        prop::collection::vec((-20.0f64..20.0, 0.0f64..10.0).prop_map(|(x, y)| [x, y]), 1..max)
    }

    proptest! {
        #[test]
        fn accel_equals_brute(a in cloud(300), b in cloud(300)) {
            prop_assert_eq!(nn_accel(&a, &b), nn_brute(&a, &b));
        }

        #[test]
        fn accel_equals_brute_far_queries(b in cloud(100), qx in -1e3f64..1e3, qy in -1e3f64..1e3) {
            prop_assert_eq!(nn_accel(&[[qx, qy]], &b), nn_brute(&[[qx, qy]], &b));
        }
    }
}
