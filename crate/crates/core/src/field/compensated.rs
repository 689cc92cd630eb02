use num_complex::Complex64;

/// Neumaier's variant of Kahan summation. Terms must be added in a fixed
/// order for results to be reproducible bit-for-bit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    abs_total: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
        self.abs_total += value.abs();
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Σ|term|, the scale of the rounding error.
    pub fn abs_total(&self) -> f64 {
        self.abs_total
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedComplex {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplex {
    #[inline]
    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
