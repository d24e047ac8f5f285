use std::collections::VecDeque;

/// Recent accepted solution points, oldest first, with strictly increasing
/// times.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    points: VecDeque<(f64, Vec<f64>)>,
    capacity: usize,
    degree: usize,
}

impl History {
    /// Keeps up to `3(degree+1)` points and interpolates with polynomials of
    /// the given degree.
    pub fn new(degree: usize) -> Self {
        Self {
            points: VecDeque::with_capacity(3 * (degree + 1)),
            capacity: 3 * (degree + 1),
            degree,
        }
    }

    pub fn clear(&mut self) {
        self.points.clear();
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&(f64, Vec<f64>)> {
        self.points.back()
    }

    /// Appends a point; points not strictly after the last one are ignored.
    pub fn push(&mut self, t: f64, y: Vec<f64>) {
        if let Some((tl, _)) = self.points.back() {
            if t <= *tl {
                return;
            }
        }
        if self.points.len() == self.capacity {
            self.points.pop_front();
        }
        self.points.push_back((t, y));
    }

    /// Time span covered by the most recent `degree+1` points.
    pub fn recent_span(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        let first = n.saturating_sub(self.degree + 1);
        self.points[n - 1].0 - self.points[first].0
    }

    /// Index range of the `degree+1` consecutive points best centred on `t`;
    /// the most recent ones when `t` lies beyond the last point.
    fn window(&self, t: f64) -> std::ops::Range<usize> {
        let n = self.points.len();
        let w = (self.degree + 1).min(n);
        if t >= self.points[n - 1].0 {
            return n - w..n;
        }
        let mut best = n - w;
        let mut best_d = f64::INFINITY;
        for s in 0..=n - w {
            let mid = 0.5 * (self.points[s].0 + self.points[s + w - 1].0);
            let d = (mid - t).abs();
            if d < best_d {
                best_d = d;
                best = s;
            }
        }
        best..best + w
    }

    /// Value of the interpolating polynomial through the selected window.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        assert!(
            !self.points.is_empty(),
            "interpolation needs at least one point"
        );
        let range = self.window(t);
        self.lagrange(range, t)
    }

    /// Extrapolation from the most recent `degree+1` points.
    pub fn extrapolate(&self, t: f64) -> Vec<f64> {
        let n = self.points.len();
        let w = (self.degree + 1).min(n);
        self.lagrange(n - w..n, t)
    }

    fn lagrange(&self, range: std::ops::Range<usize>, t: f64) -> Vec<f64> {
        let pts: Vec<&(f64, Vec<f64>)> = range.map(|i| &self.points[i]).collect();
        let m = pts[0].1.len();
        let mut out = vec![0.0; m];
        for (i, (ti, yi)) in pts.iter().enumerate() {
            let mut w = 1.0;
            for (j, (tj, _)) in pts.iter().enumerate() {
                if i != j {
                    w *= (t - tj) / (ti - tj);
                }
            }
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(yi) {
                    *o += w * v;
                }
            }
        }
        out
    }
}
