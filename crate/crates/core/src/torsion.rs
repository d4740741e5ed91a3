//! Skew-symmetric torsion components in a packed block layout.
//!
//! Only the components `T_ab^c` with `a < b` are stored. Blocks are labelled
//! by the lower pair `(a, b)`: pairs not containing the last index come
//! first ("front blocks", lexicographic), then the pairs `(a, n)` ("rear
//! blocks"); inside a block the upper index `c` runs in increasing order and
//! the slot with `c = n` is the block's "tail". Slot classification:
//!
//! * front short block (`b < n, c < n`) — never appears in the Randers
//!   compatibility equations,
//! * front tail (`b < n, c = n`),
//! * rear diagonal (`b = n, c = a`),
//! * rear off-diagonal (`b = n, c < n, c != a`),
//! * rear tail (`b = n, c = n`).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Classification of a packed slot within the block layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    FrontShort,
    FrontTail,
    RearDiagonal,
    RearOffDiagonal,
    RearTail,
}

impl BlockKind {
    pub fn name(self) -> &'static str {
        match self {
            BlockKind::FrontShort => "front_short",
            BlockKind::FrontTail => "front_tail",
            BlockKind::RearDiagonal => "rear_diagonal",
            BlockKind::RearOffDiagonal => "rear_offdiagonal",
            BlockKind::RearTail => "rear_tail",
        }
    }
}

/// Packed layout of the `n * C(n,2)` independent torsion components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    n: usize,
}

impl BlockLayout {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        BlockLayout { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of lower pairs `a < b`.
    pub fn pair_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    /// Total number of packed slots.
    pub fn slot_count(&self) -> usize {
        self.n * self.pair_count()
    }

    /// Slots in front short blocks; these are structurally absent from the
    /// compatibility equations.
    pub fn front_short_count(&self) -> usize {
        let m = self.n - 1;
        m * (m - 1) / 2 * (self.n - 1)
    }

    /// Slots that actually appear in the equations: `(n-1)(3n-2)/2`.
    pub fn appearing_count(&self) -> usize {
        self.slot_count() - self.front_short_count()
    }

    /// Dimension of the solution space at solvable points:
    /// `n * C(n-1, 2)`.
    pub fn solution_space_dim(&self) -> usize {
        let m = self.n - 1;
        self.n * (m * (m - 1) / 2)
    }

    /// Index of the lower pair `(a, b)`, `a < b`, front blocks first.
    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.n);
        let last = self.n - 1;
        if b < last {
            // lexicographic among pairs drawn from {0, .., n-2}
            let m = last;
            a * m - a * (a + 1) / 2 + (b - a - 1)
        } else {
            let m = last;
            m * (m - 1) / 2 + a
        }
    }

    /// Packed slot of `T_ab^c`, `a < b`.
    pub fn slot(&self, a: usize, b: usize, c: usize) -> usize {
        debug_assert!(c < self.n);
        self.pair_index(a, b) * self.n + c
    }

    /// Inverse of [`slot`](Self::slot): the `(a, b, c)` triple stored there.
    pub fn indices(&self, slot: usize) -> (usize, usize, usize) {
        let pair = slot / self.n;
        let c = slot % self.n;
        let (a, b) = self.pair_indices(pair);
        (a, b, c)
    }

    fn pair_indices(&self, pair: usize) -> (usize, usize) {
        let m = self.n - 1;
        let front = m * (m - 1) / 2;
        if pair < front {
            let mut k = pair;
            for a in 0..m {
                let row = m - a - 1;
                if k < row {
                    return (a, a + 1 + k);
                }
                k -= row;
            }
            unreachable!("pair index out of range");
        } else {
            (pair - front, self.n - 1)
        }
    }

    pub fn kind(&self, a: usize, b: usize, c: usize) -> BlockKind {
        debug_assert!(a < b && b < self.n && c < self.n);
        let last = self.n - 1;
        if b < last {
            if c < last {
                BlockKind::FrontShort
            } else {
                BlockKind::FrontTail
            }
        } else if c == last {
            BlockKind::RearTail
        } else if c == a {
            BlockKind::RearDiagonal
        } else {
            BlockKind::RearOffDiagonal
        }
    }

    /// 1-based label like `T[1,2]^3` for reports.
    pub fn label(&self, slot: usize) -> String {
        let (a, b, c) = self.indices(slot);
        format!("T[{},{}]^{}", a + 1, b + 1, c + 1)
    }
}

/// Point value of a skew-symmetric (1,2)-tensor in the packed block layout.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionTensor {
    layout: BlockLayout,
    components: Vec<f64>,
}

impl TorsionTensor {
    pub fn zeros(n: usize) -> Self {
        let layout = BlockLayout::new(n);
        TorsionTensor {
            layout,
            components: vec![0.0; layout.slot_count()],
        }
    }

    /// Wrap a packed component vector (layout order).
    pub fn from_components(n: usize, components: Vec<f64>) -> Self {
        let layout = BlockLayout::new(n);
        assert_eq!(components.len(), layout.slot_count());
        TorsionTensor { layout, components }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn layout(&self) -> BlockLayout {
        self.layout
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// `T_ab^c` for arbitrary lower indices; skew-symmetry is applied.
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        use core::cmp::Ordering;
        match a.cmp(&b) {
            Ordering::Less => self.components[self.layout.slot(a, b, c)],
            Ordering::Greater => -self.components[self.layout.slot(b, a, c)],
            Ordering::Equal => 0.0,
        }
    }

    /// Set the stored component `T_ab^c`, `a < b`.
    pub fn set(&mut self, a: usize, b: usize, c: usize, value: f64) {
        assert!(a < b, "only components with a < b are stored");
        let slot = self.layout.slot(a, b, c);
        self.components[slot] = value;
    }

    /// Pointwise norm `sqrt(sum over a<b, c of (T_ab^c)^2)` — the tensor
    /// norm induced by the metric when the components are expressed in an
    /// orthonormal frame.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|v| v * v).sum()
    }

    /// Component-space scalar product (orthonormal-frame inner product).
    pub fn dot(&self, other: &TorsionTensor) -> f64 {
        self.components
            .iter()
            .zip(other.components.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Iterate `(slot, a, b, c, kind, value)` in layout order.
    pub fn iter_slots(&self) -> impl Iterator<Item = (usize, usize, usize, usize, BlockKind, f64)> + '_ {
        let layout = self.layout;
        self.components.iter().enumerate().map(move |(s, v)| {
            let (a, b, c) = layout.indices(s);
            (s, a, b, c, layout.kind(a, b, c), *v)
        })
    }
}
