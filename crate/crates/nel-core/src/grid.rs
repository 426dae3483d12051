//! Dense row-major 2D storage used for images and masks.

/// A height x width grid stored row-major. Row index `i` is the image row
/// (y, downward), column index `j` the image column (x, rightward).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid2<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }
}

impl<T> Grid2<T> {
    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), height * width, "grid data length mismatch");
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.height && j < self.width);
        i * self.width + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = self.idx(i, j);
        self.data[k] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn same_shape<U>(&self, other: &Grid2<U>) -> bool {
        self.height == other.height && self.width == other.width
    }
}
