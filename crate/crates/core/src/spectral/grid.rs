use crate::error::{invalid, Result};

/// Integer frequency lattice `{ξ ∈ ℤ^d : |ξ_i| ≤ N}` of the torus of side 2π.
///
/// Points are indexed lexicographically with the first coordinate slowest,
/// each coordinate running from `-N` to `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrequencyGrid {
    dim: usize,
    cutoff: usize,
}

impl FrequencyGrid {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return invalid(format!("frequency grid dimension must be 1 or 2, got {dim}"));
        }
        if cutoff < 1 {
            return invalid("frequency cutoff N must be at least 1");
        }
        Ok(Self { dim, cutoff })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice point at `idx`; unused coordinates are zero.
    pub fn point(&self, idx: usize) -> [i64; 2] {
        let n = self.cutoff as i64;
        let side = self.side();
        match self.dim {
            1 => [idx as i64 - n, 0],
            _ => [(idx / side) as i64 - n, (idx % side) as i64 - n],
        }
    }

    pub fn index_of(&self, xi: [i64; 2]) -> Option<usize> {
        let n = self.cutoff as i64;
        let side = self.side();
        let inside = |v: i64| (-n..=n).contains(&v);
        match self.dim {
            1 => inside(xi[0]).then(|| (xi[0] + n) as usize),
            _ => (inside(xi[0]) && inside(xi[1]))
                .then(|| (xi[0] + n) as usize * side + (xi[1] + n) as usize),
        }
    }

    /// Index of `-ξ`.
    pub fn negated(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn zero_index(&self) -> usize {
        self.len() / 2
    }

    pub fn points(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// `max_i |ξ_i|`.
    pub fn max_norm(xi: [i64; 2]) -> i64 {
        xi[0].abs().max(xi[1].abs())
    }

    /// Whether `idx` lies on the outer shell `max_i |ξ_i| = N`.
    pub fn on_boundary(&self, idx: usize) -> bool {
        Self::max_norm(self.point(idx)) == self.cutoff as i64
    }

    /// Indices ordered by ascending `|ξ|²`, ties broken lexicographically.
    /// Every reduction over the lattice uses this order.
    pub fn summation_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| {
            let p = self.point(i);
            (p[0] * p[0] + p[1] * p[1], p[0], p[1])
        });
        order
    }
}
