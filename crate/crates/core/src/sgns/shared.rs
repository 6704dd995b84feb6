use std::sync::atomic::{AtomicU32, Ordering};

use crate::matrix::Matrix;

/// Matrix shared by lock-free training workers.
///
/// Every element is an `AtomicU32` holding `f32` bits, loaded and stored
/// with relaxed ordering: concurrent workers may lose each other's updates,
/// but no reader ever observes a torn scalar.
pub(crate) struct SharedMatrix {
    cols: usize,
    data: Vec<AtomicU32>,
}

impl SharedMatrix {
    pub fn from_matrix(m: &Matrix) -> Self {
        SharedMatrix {
            cols: m.cols(),
            data: m.as_slice().iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
        }
    }

    pub fn into_matrix(self) -> Matrix {
        let rows = self.data.len().checked_div(self.cols).unwrap_or(0);
        let cols = self.cols;
        let data = self.data.into_iter().map(|a| f32::from_bits(a.into_inner())).collect();
        Matrix::from_vec(rows, cols, data)
    }

    fn row(&self, i: usize) -> &[AtomicU32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn load_row(&self, i: usize, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(self.row(i)) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    pub fn store_row(&self, i: usize, values: &[f32]) {
        for (a, v) in self.row(i).iter().zip(values) {
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    /// `row[i] += delta`, element by element.
    pub fn add_to_row(&self, i: usize, delta: &[f32]) {
        for (a, d) in self.row(i).iter().zip(delta) {
            let current = f32::from_bits(a.load(Ordering::Relaxed));
            a.store((current + d).to_bits(), Ordering::Relaxed);
        }
    }
}
