use std::cell::UnsafeCell;

/// Row-major `f32` matrix shared between training threads without locking.
///
/// Threads read and write rows concurrently (Hogwild-style SGD). Sparse
/// updates make collisions rare and their effect on convergence negligible,
/// but results are no longer reproducible once more than one thread runs.
/// With a single thread every access is ordinary sequential code.
pub(crate) struct SharedMatrix {
    data: UnsafeCell<Vec<f32>>,
    dim: usize,
}

// SAFETY: see type docs; concurrent unsynchronized row access is the
// documented training mode and rows are never resized while shared.
unsafe impl Sync for SharedMatrix {}

impl SharedMatrix {
    pub fn new(data: Vec<f32>, dim: usize) -> Self {
        debug_assert_eq!(data.len() % dim, 0);
        SharedMatrix {
            data: UnsafeCell::new(data),
            dim,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        let data = unsafe { &*self.data.get() };
        &data[i * self.dim..(i + 1) * self.dim]
    }

    #[allow(clippy::mut_from_ref)]
    #[inline]
    pub fn row_mut(&self, i: usize) -> &mut [f32] {
        let data = unsafe { &mut *self.data.get() };
        &mut data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.data.into_inner()
    }
}

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy(a: f32, x: &[f32], y: &mut [f32]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
