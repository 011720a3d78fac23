//! Log-domain helpers and compensated summation.

/// `ln Σ exp(x_i)`, shifted by the maximum.
pub(crate) fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
    }

    /// Adds `f·other`, keeping both parts of `other`.
    pub fn add_scaled(&mut self, other: &Compensated, f: f64) {
        self.add(other.sum * f);
        self.add(other.comp * f);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
